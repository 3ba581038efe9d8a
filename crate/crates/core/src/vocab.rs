use std::collections::HashMap;

use crate::model::{Trajectory, WordId};

/// Keyword strings with dense ids assigned in first-seen order, plus the
/// frequency statistics the query planner and the cost model read.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, WordId>,
    /// Trajectories whose keyword union contains the word.
    df: Vec<u32>,
    /// Places carrying the word.
    place_freq: Vec<u64>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Id of `word`, assigning the next id if unseen.
    pub fn intern(&mut self, word: &str) -> WordId {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.words.len() as WordId;
        self.words.push(word.to_owned());
        self.ids.insert(word.to_owned(), id);
        self.df.push(0);
        self.place_freq.push(0);
        id
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn df(&self, id: WordId) -> u32 {
        self.df.get(id as usize).copied().unwrap_or(0)
    }

    pub fn place_freq(&self, id: WordId) -> u64 {
        self.place_freq.get(id as usize).copied().unwrap_or(0)
    }

    /// Adds one trajectory's contribution to the frequency counts.
    pub fn count(&mut self, traj: &Trajectory) {
        for w in traj.keyword_union() {
            self.df[w as usize] += 1;
        }
        for p in traj.places() {
            for &w in p.keywords() {
                self.place_freq[w as usize] += 1;
            }
        }
    }

    pub fn reset_counts(&mut self) {
        self.df.fill(0);
        self.place_freq.fill(0);
    }

    /// Resolves keyword strings; `None` if any is unknown.
    pub fn resolve<S: AsRef<str>>(&self, words: &[S]) -> Option<Vec<WordId>> {
        words
            .iter()
            .map(|w| self.id(&normalize_keyword(w.as_ref())))
            .collect()
    }

    pub(crate) fn from_parts(words: Vec<String>, df: Vec<u32>, place_freq: Vec<u64>) -> Self {
        let ids = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as WordId))
            .collect();
        Vocabulary {
            words,
            ids,
            df,
            place_freq,
        }
    }
}

/// Keywords are matched case-insensitively and without surrounding blanks.
pub fn normalize_keyword(word: &str) -> String {
    word.trim().to_lowercase()
}
