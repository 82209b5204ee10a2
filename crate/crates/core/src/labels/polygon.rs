use std::fmt;

use super::LabelError;

/// A pixel-space coordinate; x grows to the right, y grows downward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Axis-aligned bounding box, `min` inclusive corner and `max` exclusive corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

/// Polygon with an implicitly closed exterior ring and optional holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Vec<Point>,
    holes: Vec<Vec<Point>>,
}

fn validate_ring(ring: &mut Vec<Point>) -> Result<(), LabelError> {
    if ring.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(LabelError::NonFinite);
    }
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    let mut distinct: Vec<Point> = Vec::with_capacity(ring.len());
    for p in ring.iter() {
        if !distinct.contains(p) {
            distinct.push(*p);
        }
    }
    if distinct.len() < 3 {
        return Err(LabelError::TooFewVertices(distinct.len()));
    }
    Ok(())
}

impl Polygon {
    /// Builds a polygon, dropping a repeated closing vertex on each ring.
    pub fn new(exterior: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Self, LabelError> {
        let mut exterior = exterior;
        validate_ring(&mut exterior)?;
        let mut holes = holes;
        for h in holes.iter_mut() {
            validate_ring(h)?;
        }
        Ok(Self { exterior, holes })
    }

    /// Axis-aligned rectangle `[x0,x1]×[y0,y1]` with positive shoelace orientation,
    /// the same orientation traced boundaries use.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, LabelError> {
        Self::new(
            vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1),
            ],
            Vec::new(),
        )
    }

    pub fn exterior(&self) -> &[Point] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<Point>] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Point]> {
        std::iter::once(self.exterior.as_slice()).chain(self.holes.iter().map(|h| h.as_slice()))
    }

    pub fn bbox(&self) -> BoundingBox {
        let mut b = BoundingBox {
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
        };
        for p in &self.exterior {
            b.min_x = b.min_x.min(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_x = b.max_x.max(p.x);
            b.max_y = b.max_y.max(p.y);
        }
        b
    }

    /// Signed shoelace area of one ring. Positive means counterclockwise in the
    /// usual mathematical sense of the formula (clockwise on screen, since y points down).
    pub fn ring_signed_area(ring: &[Point]) -> f64 {
        let n = ring.len();
        let mut acc = 0.0;
        for i in 0..n {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            acc += a.x * b.y - b.x * a.y;
        }
        acc / 2.0
    }

    /// Exterior area minus hole areas.
    pub fn area(&self) -> f64 {
        let outer = Self::ring_signed_area(&self.exterior).abs();
        let holes: f64 = self.holes.iter().map(|h| Self::ring_signed_area(h).abs()).sum();
        outer - holes
    }

    /// Even-odd containment test over all rings.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let mut inside = false;
        for ring in self.rings() {
            let n = ring.len();
            let mut j = n - 1;
            for i in 0..n {
                let (pi, pj) = (ring[i], ring[j]);
                if (pi.y > y) != (pj.y > y) {
                    let cross_x = pj.x + (y - pj.y) * (pi.x - pj.x) / (pi.y - pj.y);
                    if x < cross_x {
                        inside = !inside;
                    }
                }
                j = i;
            }
        }
        inside
    }

    /// Clamps every vertex into `[0,width]×[0,height]`; the flag reports whether anything moved.
    pub fn clamped(&self, width: u32, height: u32) -> (Polygon, bool) {
        let (w, h) = (f64::from(width), f64::from(height));
        let mut moved = false;
        let mut clamp_ring = |ring: &[Point]| -> Vec<Point> {
            ring.iter()
                .map(|p| {
                    let q = Point::new(p.x.clamp(0.0, w), p.y.clamp(0.0, h));
                    moved |= q != *p;
                    q
                })
                .collect()
        };
        let exterior = clamp_ring(&self.exterior);
        let holes = self.holes.iter().map(|r| clamp_ring(r)).collect();
        (Polygon { exterior, holes }, moved)
    }

    /// WKT text; closing vertex repeated as the grammar requires.
    pub fn to_wkt(&self) -> String {
        self.to_string()
    }
}

fn write_ring(f: &mut fmt::Formatter<'_>, ring: &[Point]) -> fmt::Result {
    f.write_str("(")?;
    for (i, p) in ring.iter().chain(ring.first()).enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{} {}", p.x, p.y)?;
    }
    f.write_str(")")
}

impl fmt::Display for Polygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("POLYGON (")?;
        for (i, ring) in self.rings().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write_ring(f, ring)?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_area_and_bbox() {
        let p = Polygon::rectangle(2.0, 3.0, 7.0, 5.0).unwrap();
        assert_eq!(p.area(), 10.0);
        let b = p.bbox();
        assert_eq!((b.min_x, b.min_y, b.max_x, b.max_y), (2.0, 3.0, 7.0, 5.0));
    }

    #[test]
    fn closing_vertex_dropped() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 0.0)];
        let p = Polygon::new(pts.iter().map(|&t| t.into()).collect(), vec![]).unwrap();
        assert_eq!(p.exterior().len(), 3);
    }

    #[test]
    fn degenerate_rejected() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 0.0)];
        assert!(matches!(Polygon::new(pts, vec![]), Err(LabelError::TooFewVertices(2))));
        let pts = vec![Point::new(0.0, f64::NAN), Point::new(1.0, 1.0), Point::new(2.0, 0.0)];
        assert!(matches!(Polygon::new(pts, vec![]), Err(LabelError::NonFinite)));
    }

    #[test]
    fn even_odd_hole() {
        let p = Polygon::new(
            vec![Point::new(0.0, 0.0), Point::new(8.0, 0.0), Point::new(8.0, 8.0), Point::new(0.0, 8.0)],
            vec![vec![Point::new(2.0, 2.0), Point::new(6.0, 2.0), Point::new(6.0, 6.0), Point::new(2.0, 6.0)]],
        )
        .unwrap();
        assert!(p.contains(1.0, 1.0));
        assert!(!p.contains(4.0, 4.0));
        assert!(!p.contains(9.0, 4.0));
        assert_eq!(p.area(), 48.0);
    }

    #[test]
    fn clamping_reports_motion() {
        let p = Polygon::rectangle(-2.0, 0.0, 5.0, 12.0).unwrap();
        let (c, moved) = p.clamped(10, 10);
        assert!(moved);
        let b = c.bbox();
        assert_eq!((b.min_x, b.max_y), (0.0, 10.0));
        let (_, moved) = c.clamped(10, 10);
        assert!(!moved);
    }
}
