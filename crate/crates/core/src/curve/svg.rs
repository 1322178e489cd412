use std::fmt::Write;

use crate::curve::MappingTable;
use crate::error::{Error, Result};

const CELL_PX: f64 = 16.0;

/// Draws a 2D table as a standalone SVG: one polyline through region cell
/// centres in index order, `i` pointing up.
pub fn render_svg(table: &MappingTable) -> Result<String> {
    let spec = table.spec();
    if spec.n() != 2 {
        return Err(Error::UnsupportedDimension {
            required: 2,
            found: spec.n(),
        });
    }
    let ext = table.region().extents();
    let (rows, cols) = (ext[0] as f64, ext[1] as f64);
    let (w, h) = (cols * CELL_PX, rows * CELL_PX);

    let mut points = String::new();
    for (k, (cell, _)) in table.entries().enumerate() {
        let c = cell.coords();
        let x = (c[1] as f64 + 0.5) * CELL_PX;
        let y = (rows - c[0] as f64 - 0.5) * CELL_PX;
        if k > 0 {
            points.push(' ');
        }
        let _ = write!(points, "{x},{y}");
    }

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        svg,
        r#"  <polyline fill="none" stroke="black" stroke-width="2" stroke-linejoin="round" points="{points}"/>"#
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}
