use super::BinaryMask;

/// One 8-connected foreground region. Pixels are `(x, y)`, sorted row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub label: u32,
    pub pixels: Vec<(u32, u32)>,
}

/// Labels maximal 8-connected foreground regions 1..=n in row-major first-encounter order.
pub fn connected_components(mask: &BinaryMask) -> Vec<Component> {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let mut labels = vec![0u32; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if mask.data()[start] == 0 || labels[start] != 0 {
            continue;
        }
        let label = out.len() as u32 + 1;
        labels[start] = label;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            pixels.push((x as u32, y as u32));
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if mask.data()[j] != 0 && labels[j] == 0 {
                        labels[j] = label;
                        stack.push(j);
                    }
                }
            }
        }
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        out.push(Component { label, pixels });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShift64Star;
    use std::collections::{HashSet, VecDeque};

    #[test]
    fn diagonal_pixels_join() {
        let m = BinaryMask::from_vec(2, 2, vec![1, 0, 0, 1]).unwrap();
        let cc = connected_components(&m);
        assert_eq!(cc.len(), 1);
        assert_eq!(cc[0].pixels, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn empty_mask_has_no_components() {
        assert!(connected_components(&BinaryMask::zeros(5, 5).unwrap()).is_empty());
    }

    #[test]
    fn labels_in_first_encounter_order() {
        #[rustfmt::skip]
        let m = BinaryMask::from_vec(5, 3, vec![
            0, 0, 0, 1, 1,
            1, 0, 0, 0, 0,
            1, 0, 1, 0, 0,
        ]).unwrap();
        let cc = connected_components(&m);
        assert_eq!(cc.len(), 3);
        assert_eq!(cc[0].pixels[0], (3, 0));
        assert_eq!(cc[1].pixels[0], (0, 1));
        assert_eq!(cc[2].pixels, vec![(2, 2)]);
    }

    /// Independent BFS flood fill counting regions.
    fn flood_count(m: &BinaryMask) -> usize {
        let (w, h) = (m.width() as i64, m.height() as i64);
        let mut seen = HashSet::new();
        let mut count = 0;
        for y in 0..h {
            for x in 0..w {
                if m.get(x as u32, y as u32) == 0 || seen.contains(&(x, y)) {
                    continue;
                }
                count += 1;
                let mut q = VecDeque::from([(x, y)]);
                seen.insert((x, y));
                while let Some((cx, cy)) = q.pop_front() {
                    for dy in -1..=1 {
                        for dx in -1..=1 {
                            let (nx, ny) = (cx + dx, cy + dy);
                            if nx >= 0 && ny >= 0 && nx < w && ny < h
                                && m.get(nx as u32, ny as u32) == 1
                                && seen.insert((nx, ny))
                            {
                                q.push_back((nx, ny));
                            }
                        }
                    }
                }
            }
        }
        count
    }

    #[test]
    fn hundred_separated_blocks() {
        // 3x3 blocks on a 5-pixel lattice with random jitter of at most 1, so gaps stay >= 1
        let mut rng = XorShift64Star::new(100);
        let mut m = BinaryMask::zeros(60, 60).unwrap();
        let mut cells: Vec<(u32, u32)> = (0..12).flat_map(|i| (0..12).map(move |j| (i, j))).collect();
        rng.shuffle(&mut cells);
        for &(i, j) in cells.iter().take(100) {
            let (ox, oy) = (i * 5 + rng.range_inclusive(0, 1), j * 5 + rng.range_inclusive(0, 1));
            for y in oy..oy + 3 {
                for x in ox..ox + 3 {
                    m.set(x, y, 1);
                }
            }
        }
        let cc = connected_components(&m);
        assert_eq!(flood_count(&m), 100);
        assert_eq!(cc.len(), 100);
    }

    #[test]
    fn components_partition_foreground() {
        let mut rng = XorShift64Star::new(3);
        for _ in 0..30 {
            let data: Vec<u8> = (0..400).map(|_| u8::from(rng.next_f64() < 0.35)).collect();
            let m = BinaryMask::from_vec(20, 20, data).unwrap();
            let cc = connected_components(&m);
            assert_eq!(cc.len(), flood_count(&m));
            let mut all = HashSet::new();
            for c in &cc {
                for p in &c.pixels {
                    assert!(all.insert(*p), "pixel in two components");
                    assert_eq!(m.get(p.0, p.1), 1);
                }
            }
            assert_eq!(all.len(), m.count_nonzero());
        }
    }
}
