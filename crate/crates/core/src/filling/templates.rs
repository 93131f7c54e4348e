//! Disk templates: a web of small triangles, and a sun of thin sectors around
//! an inner disk. Every small cell carries a chart onto the disk of radius
//! `ε` together with an analytic bilipschitz bound for that chart.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::f64::consts::{PI, TAU};

pub type Pt = [f64; 2];

fn sub(p: Pt, q: Pt) -> Pt {
    [p[0] - q[0], p[1] - q[1]]
}

fn dot(p: Pt, q: Pt) -> f64 {
    p[0] * q[0] + p[1] * q[1]
}

fn norm(p: Pt) -> f64 {
    dot(p, p).sqrt()
}

/// Convex cell `{x : n·x ≤ c for each half-plane}`, optionally intersected
/// with the closed unit disk.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexCell {
    pub half_planes: Vec<(Pt, f64)>,
    pub in_unit_disk: bool,
}

impl ConvexCell {
    fn contains(&self, x: Pt) -> bool {
        self.half_planes.iter().all(|(n, c)| dot(*n, x) <= c + 1e-12) && (!self.in_unit_disk || norm(x) <= 1.0 + 1e-12)
    }

    /// Distance from `c` to the boundary along the unit direction `d`.
    fn ray_exit(&self, c: Pt, d: Pt) -> f64 {
        let mut t = f64::INFINITY;
        for (n, k) in &self.half_planes {
            let nd = dot(*n, d);
            if nd > 0.0 {
                t = t.min((k - dot(*n, c)) / nd);
            }
        }
        if self.in_unit_disk {
            let b = dot(c, d);
            t = t.min(-b + (b * b - dot(c, c) + 1.0).sqrt());
        }
        t
    }
}

/// Chart of a cell onto the disk of radius `eps`.
#[derive(Clone, Debug, Serialize)]
pub enum Chart {
    /// `x ↦ eps · g(x − c) · (x − c)/|x − c|` with `g` the gauge of the cell
    /// centred at `c`.
    Radial { center: Pt, eps: f64 },
    /// Annular sector `r ∈ [r0, r1]`, `θ ∈ [θ0, θ0 + dθ]`, first unrolled to
    /// a rectangle of width `mid·dθ`, then radially onto the disk.
    Sector { r0: f64, r1: f64, theta0: f64, dtheta: f64, eps: f64 },
    /// Inner disk: scaled onto the unit disk.
    Scale { radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CellKind {
    Triangle,
    Sector,
    InnerDisk,
}

#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub kind: CellKind,
    /// Corner indices into the mesh vertices, counterclockwise.
    pub corners: Vec<usize>,
    pub chart: Chart,
    /// Bilipschitz bound of the chart (both directions); `None` for the
    /// inner disk, which is not a small cell.
    pub constant: Option<f64>,
    #[serde(skip)]
    region: Region,
}

#[derive(Clone, Debug, Default)]
enum Region {
    Convex(ConvexCell),
    Annular,
    #[default]
    Disk,
}

#[derive(Clone, Debug, Serialize)]
pub struct Mesh {
    pub eps: f64,
    pub vertices: Vec<Pt>,
    pub cells: Vec<Cell>,
    /// Largest per-cell constant.
    pub constant: f64,
}

/// `(t + √(t² + 4))/2`, the norm of `[[1, t], [0, 1]]`.
fn shear_norm(t: f64) -> f64 {
    (t + (t * t + 4.0).sqrt()) / 2.0
}

/// Bound for the radial chart of a convex body with inradius `r_in` and
/// outer radius `r_out` about the centre, onto the disk of radius `eps`.
/// The boundary direction makes angle at most `acos(r_in/ρ)` with the ray,
/// so `|ρ'|/ρ ≤ √(r_out²/r_in² − 1)`.
fn radial_bound(r_in: f64, r_out: f64, eps: f64) -> (f64, f64) {
    let t = ((r_out / r_in).powi(2) - 1.0).max(0.0).sqrt();
    let k = shear_norm(t);
    (eps / r_in * k, r_out / eps * k)
}

impl Chart {
    pub fn apply(&self, x: Pt, cell: &Cell) -> Pt {
        match (self, &cell.region) {
            (Chart::Radial { center, eps }, Region::Convex(cc)) => radial(cc, *center, *eps, x),
            (Chart::Sector { r0, r1, theta0, dtheta, eps }, _) => {
                let mid = (r0 + r1) / 2.0;
                let r = norm(x);
                let mut th = x[1].atan2(x[0]) - theta0;
                th = th.rem_euclid(TAU);
                if th > PI + dtheta / 2.0 {
                    th -= TAU;
                }
                let y = [r - mid, mid * (th - dtheta / 2.0)];
                radial(&rect(r1 - r0, mid * dtheta), [0.0, 0.0], *eps, y)
            }
            (Chart::Scale { radius }, _) => [x[0] / radius, x[1] / radius],
            _ => unreachable!("chart and region disagree"),
        }
    }
}

fn rect(w: f64, h: f64) -> ConvexCell {
    ConvexCell {
        half_planes: vec![
            ([1.0, 0.0], w / 2.0),
            ([-1.0, 0.0], w / 2.0),
            ([0.0, 1.0], h / 2.0),
            ([0.0, -1.0], h / 2.0),
        ],
        in_unit_disk: false,
    }
}

fn radial(cc: &ConvexCell, c: Pt, eps: f64, x: Pt) -> Pt {
    let v = sub(x, c);
    let r = norm(v);
    if r == 0.0 {
        return [0.0, 0.0];
    }
    let d = [v[0] / r, v[1] / r];
    let k = eps * r / cc.ray_exit(c, d);
    [k * d[0], k * d[1]]
}

fn incenter(a: Pt, b: Pt, c: Pt) -> Pt {
    let (la, lb, lc) = (norm(sub(b, c)), norm(sub(c, a)), norm(sub(a, b)));
    let s = la + lb + lc;
    [
        (la * a[0] + lb * b[0] + lc * c[0]) / s,
        (la * a[1] + lb * b[1] + lc * c[1]) / s,
    ]
}

/// Outward half-plane of the edge `p → q` of a counterclockwise polygon.
fn edge_plane(p: Pt, q: Pt) -> (Pt, f64) {
    let e = sub(q, p);
    let len = norm(e);
    let n = [e[1] / len, -e[0] / len];
    (n, dot(n, p))
}

fn on_circle(p: Pt) -> bool {
    (norm(p) - 1.0).abs() < 1e-12
}

/// Triangle `abc` (counterclockwise); when two corners lie on the unit
/// circle the edge between them is the arc instead of the chord.
fn triangle_cell(vs: &[Pt], idx: [usize; 3], eps: f64) -> Cell {
    let [a, b, c] = idx.map(|i| vs[i]);
    let corners = [a, b, c];
    let mut planes = Vec::new();
    let mut arc = false;
    for k in 0..3 {
        let (p, q) = (corners[k], corners[(k + 1) % 3]);
        if on_circle(p) && on_circle(q) {
            arc = true;
        } else {
            planes.push(edge_plane(p, q));
        }
    }
    let center = incenter(a, b, c);
    let mut r_in = planes
        .iter()
        .map(|(n, k)| k - dot(*n, center))
        .fold(f64::INFINITY, f64::min);
    let mut r_out = corners.iter().map(|p| norm(sub(*p, center))).fold(0.0, f64::max);
    if arc {
        r_in = r_in.min(1.0 - norm(center));
        // the farthest point of the circle from the centre lies opposite it;
        // it is on a short arc only if the arc spans half the circle
        let far = 1.0 + norm(center);
        let (p, q) = (0..3)
            .map(|k| (corners[k], corners[(k + 1) % 3]))
            .find(|(p, q)| on_circle(*p) && on_circle(*q))
            .unwrap();
        if dot(p, q) < 0.0 {
            r_out = r_out.max(far);
        }
    }
    let (fwd, back) = radial_bound(r_in, r_out, eps);
    Cell {
        kind: CellKind::Triangle,
        corners: idx.to_vec(),
        chart: Chart::Radial { center, eps },
        constant: Some(fwd.max(back)),
        region: Region::Convex(ConvexCell {
            half_planes: planes,
            in_unit_disk: arc,
        }),
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Invalid(format!("template scale must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Concentric rings at radii `k/K` (`K = ⌈1/ε⌉`) with `6k` equally spaced
/// vertices each; consecutive rings are zipped into `12k − 6` triangles, so
/// the web has `6K²` cells.
pub fn web_template(eps: f64) -> Result<Mesh> {
    check_eps(eps)?;
    let k_max = (1.0 / eps).ceil() as usize;
    let mut vertices = vec![[0.0, 0.0]];
    let mut rings: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..=k_max {
        let r = k as f64 / k_max as f64;
        let n = 6 * k;
        let ring: Vec<usize> = (0..n)
            .map(|j| {
                let th = TAU * j as f64 / n as f64;
                vertices.push(if k == k_max { [th.cos(), th.sin()] } else { [r * th.cos(), r * th.sin()] });
                vertices.len() - 1
            })
            .collect();
        rings.push(ring);
    }
    let cell_eps = eps;
    let mut cells = Vec::new();
    for k in 1..=k_max {
        let (inner, outer) = (&rings[k - 1], &rings[k]);
        if k == 1 {
            for j in 0..6 {
                cells.push(triangle_cell(&vertices, [0, outer[j], outer[(j + 1) % 6]], cell_eps));
            }
            continue;
        }
        // zip by angle: inner vertex i sits at i/(6(k−1)), outer j at j/(6k)
        let (ni, no) = (inner.len(), outer.len());
        let (mut i, mut j) = (0, 0);
        while i < ni || j < no {
            let next_i = (i + 1) as f64 / ni as f64;
            let next_j = (j + 1) as f64 / no as f64;
            if j < no && (i == ni || next_j <= next_i) {
                cells.push(triangle_cell(&vertices, [inner[i % ni], outer[j], outer[(j + 1) % no]], cell_eps));
                j += 1;
            } else {
                cells.push(triangle_cell(&vertices, [inner[i], outer[j % no], inner[(i + 1) % ni]], cell_eps));
                i += 1;
            }
        }
    }
    let constant = cells.iter().filter_map(|c| c.constant).fold(0.0, f64::max);
    Ok(Mesh {
        eps,
        vertices,
        cells,
        constant,
    })
}

/// Inner disk of radius `1 − ε` and `⌈2π/ε⌉` sectors of the annulus, each
/// bounded by two radial segments and two arcs.
pub fn sun_template(eps: f64) -> Result<Mesh> {
    check_eps(eps)?;
    let n = (TAU / eps).ceil() as usize;
    let dtheta = TAU / n as f64;
    let r0 = 1.0 - eps;
    let mut vertices = Vec::with_capacity(2 * n);
    for j in 0..n {
        let th = dtheta * j as f64;
        vertices.push([r0 * th.cos(), r0 * th.sin()]);
        vertices.push([th.cos(), th.sin()]);
    }
    let mid = (r0 + 1.0) / 2.0;
    let width = mid * dtheta;
    // unrolling: the polar metric differs from the rectangle's by r/mid, and
    // a chord leaves the annulus by at most the factor 1/cos(dθ/2)
    let unroll_fwd = (mid / r0).max(1.0) / (dtheta / 2.0).cos();
    let unroll_back = (1.0 / mid).max(1.0);
    let half_diag = (eps * eps + width * width).sqrt() / 2.0;
    let (rf, rb) = radial_bound(eps.min(width) / 2.0, half_diag, eps);
    let constant = (unroll_fwd * rf).max(unroll_back * rb);
    let mut cells = vec![Cell {
        kind: CellKind::InnerDisk,
        corners: (0..n).map(|j| 2 * j).collect(),
        chart: Chart::Scale { radius: r0 },
        constant: None,
        region: Region::Disk,
    }];
    for j in 0..n {
        let k = (j + 1) % n;
        cells.push(Cell {
            kind: CellKind::Sector,
            corners: vec![2 * j, 2 * j + 1, 2 * k + 1, 2 * k],
            chart: Chart::Sector {
                r0,
                r1: 1.0,
                theta0: dtheta * j as f64,
                dtheta,
                eps,
            },
            constant: Some(constant),
            region: Region::Annular,
        });
    }
    Ok(Mesh {
        eps,
        vertices,
        cells,
        constant,
    })
}

impl Cell {
    /// Uniform point of the cell.
    pub fn sample(&self, mesh: &Mesh, rng: &mut impl Rng) -> Pt {
        match (&self.region, &self.chart) {
            (Region::Annular, Chart::Sector { r0, r1, theta0, dtheta, .. }) => {
                let r = (r0 * r0 + rng.random_range(0.0..1.0) * (r1 * r1 - r0 * r0)).sqrt();
                let th = theta0 + rng.random_range(0.0..*dtheta);
                [r * th.cos(), r * th.sin()]
            }
            (Region::Convex(cc), _) => {
                let pts: Vec<Pt> = self.corners.iter().map(|&i| mesh.vertices[i]).collect();
                let pad = if cc.in_unit_disk { mesh.eps } else { 0.0 };
                let lo = [0, 1].map(|a| pts.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min) - pad);
                let hi = [0, 1].map(|a| pts.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max) + pad);
                loop {
                    let x = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
                    if cc.contains(x) {
                        return x;
                    }
                }
            }
            _ => {
                let r = match self.chart {
                    Chart::Scale { radius } => radius,
                    _ => 1.0,
                };
                let rho = r * rng.random_range(0.0f64..1.0).sqrt();
                let th = rng.random_range(0.0..TAU);
                [rho * th.cos(), rho * th.sin()]
            }
        }
    }

    pub fn contains(&self, x: Pt) -> bool {
        match (&self.region, &self.chart) {
            (Region::Convex(cc), _) => cc.contains(x),
            (Region::Annular, Chart::Sector { r0, r1, theta0, dtheta, .. }) => {
                let r = norm(x);
                let th = (x[1].atan2(x[0]) - theta0).rem_euclid(TAU);
                r >= r0 - 1e-12 && r <= r1 + 1e-12 && (th <= dtheta + 1e-12 || th >= TAU - 1e-12)
            }
            _ => norm(x) <= 1.0 + 1e-12,
        }
    }

    pub fn chart_point(&self, x: Pt) -> Pt {
        self.chart.apply(x, self)
    }
}

/// Distortion measured on random point pairs against the recorded bounds.
#[derive(Clone, Debug, Serialize)]
pub struct DistortionCheck {
    pub pairs: usize,
    pub seed: u64,
    /// Largest `max(|ψp − ψq|/|p − q|, |p − q|/|ψp − ψq|)` seen.
    pub worst: f64,
    /// Largest value of `worst / constant` over cells.
    pub worst_fraction: f64,
    pub violations: usize,
}

/// Sample `pairs` pairs over the small cells (round robin) and compare the
/// chart distortion with each cell's constant.
pub fn check_distortion(mesh: &Mesh, pairs: usize, seed: u64) -> DistortionCheck {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let small: Vec<&Cell> = mesh.cells.iter().filter(|c| c.constant.is_some()).collect();
    let mut worst: f64 = 0.0;
    let mut frac: f64 = 0.0;
    let mut violations = 0;
    for k in 0..pairs {
        let cell = small[k % small.len()];
        let (p, q) = (cell.sample(mesh, &mut rng), cell.sample(mesh, &mut rng));
        let d = norm(sub(p, q));
        if d < 1e-12 {
            continue;
        }
        let e = norm(sub(cell.chart_point(p), cell.chart_point(q)));
        let ratio = (e / d).max(d / e);
        let c = cell.constant.unwrap();
        worst = worst.max(ratio);
        frac = frac.max(ratio / c);
        if ratio > c {
            violations += 1;
        }
    }
    DistortionCheck {
        pairs,
        seed,
        worst,
        worst_fraction: frac,
        violations,
    }
}

impl Mesh {
    pub fn small_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.constant.is_some()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn web_counts_are_six_k_squared() {
        for (eps, k) in [(0.5, 2), (0.25, 4), (0.3, 4)] {
            assert_eq!(web_template(eps).unwrap().cells.len(), 6 * k * k);
        }
    }

    #[test]
    fn web_cells_tile_the_disk() {
        let m = web_template(0.25).unwrap();
        let area: f64 = m
            .cells
            .iter()
            .map(|c| {
                let p: Vec<Pt> = c.corners.iter().map(|&i| m.vertices[i]).collect();
                let a = sub(p[1], p[0]);
                let b = sub(p[2], p[0]);
                (a[0] * b[1] - a[1] * b[0]) / 2.0
            })
            .sum();
        // chords only: the inscribed 24-gon
        let polygon = 24.0 / 2.0 * (TAU / 24.0).sin();
        assert!((area - polygon).abs() < 1e-9);
        assert!(m.cells.iter().all(|c| {
            let p: Vec<Pt> = c.corners.iter().map(|&i| m.vertices[i]).collect();
            let a = sub(p[1], p[0]);
            let b = sub(p[2], p[0]);
            a[0] * b[1] - a[1] * b[0] > 0.0
        }));
    }

    #[test]
    fn charts_send_corners_to_the_boundary_circle() {
        let m = web_template(0.125).unwrap();
        for c in &m.cells {
            for &i in &c.corners {
                let y = c.chart_point(m.vertices[i]);
                assert!((norm(y) - 0.125).abs() < 1e-9, "{y:?}");
            }
        }
        let s = sun_template(0.25).unwrap();
        for c in s.cells.iter().skip(1) {
            for &i in &c.corners {
                assert!((norm(c.chart_point(s.vertices[i])) - 0.25).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sun_has_two_pi_over_eps_sectors() {
        let s = sun_template(0.25).unwrap();
        assert_eq!(s.small_cells(), 26);
        assert_eq!(s.cells[0].kind, CellKind::InnerDisk);
    }

    #[test]
    fn distortion_stays_under_the_constants() {
        for m in [web_template(0.25).unwrap(), sun_template(0.125).unwrap()] {
            let chk = check_distortion(&m, 2000, 7);
            assert_eq!(chk.violations, 0, "{chk:?}");
            assert!(chk.worst > 1.0);
        }
    }

    #[test]
    fn bad_eps_is_rejected() {
        assert!(web_template(0.0).is_err());
        assert!(sun_template(1.0).is_err());
    }
}
