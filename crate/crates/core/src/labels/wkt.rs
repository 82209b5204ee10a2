use std::str::FromStr;

use wkt::Wkt;

use super::{LabelError, Point, Polygon};

/// Parses a WKT `POLYGON` into exterior and holes, dropping the closing vertex of each ring.
pub fn parse_wkt_polygon(text: &str) -> Result<Polygon, LabelError> {
    let geom = Wkt::<f64>::from_str(text.trim()).map_err(|e| LabelError::Wkt(e.to_string()))?;
    let Wkt::Polygon(poly) = geom else {
        return Err(LabelError::Wkt(format!("expected POLYGON, got {}", geometry_name(&geom))));
    };
    let mut rings = poly.rings().iter().map(|ring| {
        ring.coords().iter().map(|c| Point::new(c.x, c.y)).collect::<Vec<_>>()
    });
    let exterior = rings.next().ok_or(LabelError::TooFewVertices(0))?;
    Polygon::new(exterior, rings.collect())
}

fn geometry_name(g: &Wkt<f64>) -> &'static str {
    match g {
        Wkt::Point(_) => "POINT",
        Wkt::LineString(_) => "LINESTRING",
        Wkt::Polygon(_) => "POLYGON",
        Wkt::MultiPoint(_) => "MULTIPOINT",
        Wkt::MultiLineString(_) => "MULTILINESTRING",
        Wkt::MultiPolygon(_) => "MULTIPOLYGON",
        Wkt::GeometryCollection(_) => "GEOMETRYCOLLECTION",
    }
}
