//! Adaptive quadtree leaves, Morton codes and window decomposition.

use trajkw::grid::{deinterleave, interleave, Bounds, Grid, Rect};
use trajkw::Point;

fn main() {
    let code = interleave(5, 3, 3).unwrap();
    println!("cell (5,3) at level 3 has code {code}, back to {:?}", deinterleave(code));

    // Points crowded into one corner force that corner to split further.
    let mut points = Vec::new();
    for i in 0..200 {
        let f = i as f64;
        points.push(Point::new(1.0 + (f * 0.37) % 10.0, 1.0 + (f * 0.73) % 10.0));
    }
    points.push(Point::new(90.0, 90.0));
    let bounds = Bounds::new(0.0, 0.0, 100.0).unwrap();
    let grid = Grid::build(points, bounds, 16, 6).unwrap();
    println!("{} leaves", grid.leaf_count());
    for leaf in grid.leaves().take(8) {
        let r = grid.cell_rect(leaf);
        println!("  level {} code {:5} [{:.2},{:.2}]x[{:.2},{:.2}]", leaf.level, leaf.code, r.min_x, r.max_x, r.min_y, r.max_y);
    }

    let window = Rect::square(Point::new(8.0, 8.0), 6.0);
    let intervals = grid.window_to_intervals(&window);
    println!("window around (8,8) covers {} code intervals: {:?}", intervals.len(), intervals);
    let q = grid.count_quads(&window);
    println!("overlapping leaves {}, fully enclosed {}", q.overlapping, q.enclosed);
}
