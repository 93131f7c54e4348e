//! Mesh dumps and SVG pictures of fillings and templates.

use super::map::SquareMap;
use super::templates::{CellKind, Mesh};
use crate::algebra::{GroupF, SolvableGroup};
use serde::Serialize;
use std::fmt::Write;

/// `f` sampled on an `n × n` grid of the square.
#[derive(Clone, Debug, Serialize)]
pub struct GridDump {
    pub grid: usize,
    /// `(t, s)` of each vertex, row-major with `s` the row.
    pub vertices: Vec<[f64; 2]>,
    /// Corner indices of each square cell, counterclockwise.
    pub cells: Vec<[usize; 4]>,
    /// `(a, u)` coordinates of `f` at each vertex.
    pub values: Vec<Vec<f64>>,
    /// Largest edge ratio on the boundary of each cell.
    pub cell_lip: Vec<f64>,
}

fn coords(g: &GroupF) -> Vec<f64> {
    g.a.iter().chain(&g.u).cloned().collect()
}

pub fn sample_grid(group: &SolvableGroup, f: &SquareMap, n: usize) -> GridDump {
    let n = n.max(1);
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    let mut vals = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let (t, s) = (i as f64 * h, j as f64 * h);
            vertices.push([t, s]);
            vals.push(f.eval(group, t, s));
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let ratio = |p: usize, q: usize| group.left_quotient_f64(&vals[p], &vals[q]).coord_norm() / h;
    let mut cells = Vec::with_capacity(n * n);
    let mut cell_lip = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let c = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            let lip = (0..4).map(|k| ratio(c[k], c[(k + 1) % 4])).fold(0.0, f64::max);
            cells.push(c);
            cell_lip.push(lip);
        }
    }
    GridDump {
        grid: n,
        vertices,
        cells,
        values: vals.iter().map(coords).collect(),
        cell_lip,
    }
}

/// White to dark red.
fn heat(x: f64) -> String {
    let x = x.clamp(0.0, 1.0);
    let g = (255.0 * (1.0 - x)) as u8;
    let r = (255.0 - 90.0 * x * x) as u8;
    format!("#{r:02x}{g:02x}{g:02x}")
}

const SIZE: f64 = 512.0;

/// Per-cell Lipschitz heatmap; `t` runs right, `s` runs up.
pub fn svg_heatmap(d: &GridDump, title: &str) -> String {
    let hi = d.cell_lip.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let w = SIZE / d.grid as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        SIZE,
        SIZE + 24.0,
        SIZE,
        SIZE + 24.0
    );
    let _ = writeln!(out, r#"<text x="4" y="16" font-size="12" font-family="monospace">{} (max {:.4})</text>"#, escape(title), hi);
    for (k, lip) in d.cell_lip.iter().enumerate() {
        let (i, j) = (k % d.grid, k / d.grid);
        let _ = writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
            i as f64 * w,
            24.0 + SIZE - (j + 1) as f64 * w,
            w,
            w,
            heat(lip / hi)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Template cells coloured by their chart constant.
pub fn svg_template(m: &Mesh, title: &str) -> String {
    let hi = m.constant.max(1e-300);
    let px = |p: [f64; 2]| ((p[0] + 1.0) * SIZE / 2.0, 24.0 + (1.0 - p[1]) * SIZE / 2.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        SIZE,
        SIZE + 24.0,
        SIZE,
        SIZE + 24.0
    );
    let _ = writeln!(
        out,
        r#"<text x="4" y="16" font-size="12" font-family="monospace">{} ({} cells, constant {:.3})</text>"#,
        escape(title),
        m.cells.len(),
        m.constant
    );
    for c in &m.cells {
        let fill = c.constant.map_or("#eeeeee".to_string(), |k| heat(k / hi));
        if c.kind == CellKind::InnerDisk {
            let (cx, cy) = px([0.0, 0.0]);
            let r = m.vertices[c.corners[0]];
            let rad = (r[0] * r[0] + r[1] * r[1]).sqrt() * SIZE / 2.0;
            let _ = writeln!(out, r##"<circle cx="{cx:.3}" cy="{cy:.3}" r="{rad:.3}" fill="{fill}" stroke="#333" stroke-width="0.5"/>"##);
            continue;
        }
        let pts: Vec<String> = c
            .corners
            .iter()
            .map(|&i| {
                let (x, y) = px(m.vertices[i]);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r##"<polygon points="{}" fill="{fill}" stroke="#333" stroke-width="0.5"/>"##,
            pts.join(" ")
        );
    }
    let (cx, cy) = px([0.0, 0.0]);
    let _ = writeln!(out, r##"<circle cx="{cx:.3}" cy="{cy:.3}" r="{:.3}" fill="none" stroke="#000"/>"##, SIZE / 2.0);
    out.push_str("</svg>\n");
    out
}

/// CSV of the grid dump: `t,s,lip` per cell centre.
pub fn csv_cells(d: &GridDump) -> String {
    let mut out = String::from("t,s,lip\n");
    let h = 1.0 / d.grid as f64;
    for (k, lip) in d.cell_lip.iter().enumerate() {
        let (i, j) = (k % d.grid, k / d.grid);
        let _ = writeln!(out, "{},{},{}", (i as f64 + 0.5) * h, (j as f64 + 0.5) * h, lip);
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filling::templates::web_template;
    use crate::presets::load_preset;

    #[test]
    fn constant_map_has_zero_heat() {
        let g = SolvableGroup::new(load_preset("sol").unwrap()).unwrap();
        let d = sample_grid(&g, &SquareMap::Const(g.identity_f64()), 4);
        assert_eq!(d.vertices.len(), 25);
        assert_eq!(d.cells.len(), 16);
        assert!(d.cell_lip.iter().all(|&x| x == 0.0));
        let svg = svg_heatmap(&d, "const");
        assert_eq!(svg.matches("<rect").count(), 16);
        assert_eq!(csv_cells(&d).lines().count(), 17);
    }

    #[test]
    fn template_svg_draws_every_cell() {
        let m = web_template(0.5).unwrap();
        let svg = svg_template(&m, "web <1/2>");
        assert_eq!(svg.matches("<polygon").count(), m.cells.len());
        assert!(svg.contains("web &lt;1/2&gt;"));
    }
}
