use std::collections::{HashMap, HashSet};

use crate::labels::{Point, Polygon};

type Corner = (i64, i64);

/// Outer boundary of an 8-connected pixel set, on pixel corners.
///
/// Edges run along pixel sides with the interior on the right-hand side in
/// screen coordinates (y down), which gives a positive shoelace area. At a corner
/// where two pixels touch only diagonally the walk turns away from the interior,
/// so diagonal neighbours stay inside one outline. Collinear vertices are merged.
/// Holes are not traced. Panics on an empty pixel set.
pub fn trace_boundary(pixels: &[(u32, u32)]) -> Polygon {
    assert!(!pixels.is_empty(), "trace_boundary of an empty pixel set");
    let set: HashSet<(i64, i64)> = pixels.iter().map(|&(x, y)| (i64::from(x), i64::from(y))).collect();
    let inside = |x: i64, y: i64| set.contains(&(x, y));

    // boundary edges keyed by start corner
    let mut edges: HashMap<Corner, Vec<Corner>> = HashMap::new();
    let mut add = |a: Corner, b: Corner| edges.entry(a).or_default().push(b);
    for &(x, y) in &set {
        if !inside(x, y - 1) {
            add((x, y), (x + 1, y));
        }
        if !inside(x + 1, y) {
            add((x + 1, y), (x + 1, y + 1));
        }
        if !inside(x, y + 1) {
            add((x + 1, y + 1), (x, y + 1));
        }
        if !inside(x - 1, y) {
            add((x, y + 1), (x, y));
        }
    }

    // top-most, then left-most pixel: its top edge lies on the outer boundary
    let &(sx, sy) = set.iter().min_by_key(|&&(x, y)| (y, x)).expect("nonempty");
    let start = (sx, sy);
    let mut path = vec![start];
    let mut prev = start;
    let mut cur = (sx + 1, sy);
    while cur != start {
        path.push(cur);
        let dir = (cur.0 - prev.0, cur.1 - prev.1);
        let outs = &edges[&cur];
        let next = if outs.len() == 1 {
            outs[0]
        } else {
            // screen-left of travel direction (dx, dy) is (dy, -dx)
            let left = (dir.1, -dir.0);
            *outs
                .iter()
                .find(|o| (o.0 - cur.0, o.1 - cur.1) == left)
                .unwrap_or(&outs[0])
        };
        prev = cur;
        cur = next;
    }

    let n = path.len();
    let corners: Vec<Point> = (0..n)
        .filter(|&i| {
            let a = path[(i + n - 1) % n];
            let b = path[i];
            let c = path[(i + 1) % n];
            (b.0 - a.0, b.1 - a.1) != (c.0 - b.0, c.1 - b.1)
        })
        .map(|i| Point::new(path[i].0 as f64, path[i].1 as f64))
        .collect();
    Polygon::new(corners, Vec::new()).expect("pixel outline has at least 4 corners")
}
