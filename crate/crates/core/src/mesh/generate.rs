//! Graded tensor-product quad meshes with refinement bands, rectangular
//! cutouts and O-grid circular holes.

use serde::{Deserialize, Serialize};

use super::{Cell, Mesh};
use crate::error::{Error, Result};

/// Axis-aligned box inside which every element edge is at most `target_h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementBand {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub target_h: f64,
}

impl RefinementBand {
    pub fn new(x: [f64; 2], y: [f64; 2], target_h: f64) -> Self {
        Self { x, y, target_h }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x[0] && p[0] <= self.x[1] && p[1] >= self.y[0] && p[1] <= self.y[1]
    }
}

/// Circular hole meshed by an O-grid between the circle and a surrounding box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircularHole {
    pub name: String,
    pub center: [f64; 2],
    pub radius: f64,
}

impl CircularHole {
    pub fn new(name: &str, center: [f64; 2], radius: f64) -> Self {
        Self {
            name: name.to_string(),
            center,
            radius,
        }
    }

    fn box_half(&self) -> f64 {
        1.25 * self.radius
    }
}

/// Minimum number of segments on a hole boundary.
pub const MIN_HOLE_SEGMENTS: usize = 64;

#[derive(Clone, Debug)]
pub struct RectMeshBuilder {
    width: f64,
    height: f64,
    coarse_h: f64,
    grading: f64,
    bands: Vec<RefinementBand>,
    x_breaks: Vec<f64>,
    y_breaks: Vec<f64>,
    cutouts: Vec<([f64; 2], [f64; 2])>,
    holes: Vec<CircularHole>,
}

impl RectMeshBuilder {
    pub fn new(width: f64, height: f64, coarse_h: f64) -> Self {
        Self {
            width,
            height,
            coarse_h,
            grading: 1.5,
            bands: Vec::new(),
            x_breaks: Vec::new(),
            y_breaks: Vec::new(),
            cutouts: Vec::new(),
            holes: Vec::new(),
        }
    }

    /// Size growth per unit distance is `grading − 1`.
    pub fn grading(mut self, g: f64) -> Self {
        self.grading = g;
        self
    }

    pub fn band(mut self, band: RefinementBand) -> Self {
        self.bands.push(band);
        self
    }

    pub fn bands(mut self, bands: impl IntoIterator<Item = RefinementBand>) -> Self {
        self.bands.extend(bands);
        self
    }

    /// Forces a grid line at `x`.
    pub fn x_break(mut self, x: f64) -> Self {
        self.x_breaks.push(x);
        self
    }

    pub fn y_break(mut self, y: f64) -> Self {
        self.y_breaks.push(y);
        self
    }

    /// Removes all cells whose centroid lies inside the box.
    pub fn cutout(mut self, lo: [f64; 2], hi: [f64; 2]) -> Self {
        self.cutouts.push((lo, hi));
        self
    }

    pub fn hole(mut self, hole: CircularHole) -> Self {
        self.holes.push(hole);
        self
    }

    fn check(&self) -> Result<Vec<RefinementBand>> {
        let pos = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive, got {v}")))
            }
        };
        pos("width", self.width)?;
        pos("height", self.height)?;
        pos("coarse_h", self.coarse_h)?;
        if !(self.grading > 1.0) {
            return Err(Error::param("grading", format!("must exceed 1, got {}", self.grading)));
        }
        let mut bands = Vec::new();
        for (i, b) in self.bands.iter().enumerate() {
            if !(b.target_h > 0.0) || !b.target_h.is_finite() {
                return Err(Error::Mesh(format!("band {i}: target_h must be positive, got {}", b.target_h)));
            }
            if b.target_h > self.coarse_h {
                return Err(Error::Mesh(format!(
                    "band {i}: target_h {} exceeds coarse_h {}",
                    b.target_h, self.coarse_h
                )));
            }
            let x = [b.x[0].max(0.0), b.x[1].min(self.width)];
            let y = [b.y[0].max(0.0), b.y[1].min(self.height)];
            if !(x[1] > x[0] && y[1] > y[0]) {
                return Err(Error::Mesh(format!(
                    "band {i} ({:?} x {:?}) does not intersect the domain",
                    b.x, b.y
                )));
            }
            bands.push(RefinementBand::new(x, y, b.target_h));
        }
        for h in &self.holes {
            let b = h.box_half();
            let [cx, cy] = h.center;
            if !(h.radius > 0.0) {
                return Err(Error::Mesh(format!("hole `{}`: radius must be positive", h.name)));
            }
            if cx - b < 0.0 || cy - b < 0.0 || cx + b > self.width || cy + b > self.height {
                return Err(Error::Mesh(format!(
                    "hole `{}`: surrounding box of half-size {b} leaves the domain",
                    h.name
                )));
            }
            for (lo, hi) in &self.cutouts {
                if cx - b < hi[0] && cx + b > lo[0] && cy - b < hi[1] && cy + b > lo[1] {
                    return Err(Error::Mesh(format!("hole `{}` overlaps a cutout", h.name)));
                }
            }
            let hb = b / (MIN_HOLE_SEGMENTS as f64 / 8.0);
            bands.push(RefinementBand::new([cx - b, cx + b], [cy - b, cy + b], hb.min(self.coarse_h)));
        }
        Ok(bands)
    }

    pub fn build(&self) -> Result<Mesh> {
        let bands = self.check()?;
        let g = self.grading - 1.0;

        let mut xb = vec![0.0, self.width];
        let mut yb = vec![0.0, self.height];
        for b in &bands {
            xb.extend(b.x);
            yb.extend(b.y);
        }
        xb.extend(&self.x_breaks);
        yb.extend(&self.y_breaks);
        for (lo, hi) in &self.cutouts {
            xb.extend([lo[0], hi[0]]);
            yb.extend([lo[1], hi[1]]);
        }
        let xs = axis_nodes(xb, self.width, |x| {
            bands
                .iter()
                .map(|b| b.target_h + g * interval_dist(x, b.x))
                .fold(self.coarse_h, f64::min)
        });
        let ys = axis_nodes(yb, self.height, |y| {
            bands
                .iter()
                .map(|b| b.target_h + g * interval_dist(y, b.y))
                .fold(self.coarse_h, f64::min)
        });

        let nx = xs.len();
        let id = |i: usize, j: usize| i + j * nx;
        let mut mesh = Mesh::default();
        for &y in &ys {
            for &x in &xs {
                mesh.nodes.push([x, y]);
            }
        }
        let hole_boxes: Vec<_> = self
            .holes
            .iter()
            .map(|h| {
                let b = h.box_half();
                ([h.center[0] - b, h.center[1] - b], [h.center[0] + b, h.center[1] + b])
            })
            .collect();
        let inside = |p: [f64; 2], lo: [f64; 2], hi: [f64; 2]| p[0] > lo[0] && p[0] < hi[0] && p[1] > lo[1] && p[1] < hi[1];
        for j in 0..ys.len() - 1 {
            for i in 0..nx - 1 {
                let c = [0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])];
                let removed = self.cutouts.iter().chain(hole_boxes.iter()).any(|(lo, hi)| inside(c, *lo, *hi));
                if !removed {
                    mesh.cells
                        .push(Cell::Quad4([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]));
                }
            }
        }

        for (hole, (lo, hi)) in self.holes.iter().zip(&hole_boxes) {
            let find = |v: &[f64], t: f64| {
                v.iter()
                    .position(|&a| (a - t).abs() <= 1e-9 * (1.0 + t.abs()))
                    .expect("hole box edge is a grid line")
            };
            let (i0, i1) = (find(&xs, lo[0]), find(&xs, hi[0]));
            let (j0, j1) = (find(&ys, lo[1]), find(&ys, hi[1]));
            let mut ring: Vec<usize> = Vec::new();
            ring.extend((i0..i1).map(|i| id(i, j0)));
            ring.extend((j0..j1).map(|j| id(i1, j)));
            ring.extend((i0 + 1..=i1).rev().map(|i| id(i, j1)));
            ring.extend((j0 + 1..=j1).rev().map(|j| id(i0, j)));
            if ring.len() < MIN_HOLE_SEGMENTS {
                return Err(Error::Mesh(format!("hole `{}`: only {} boundary segments", hole.name, ring.len())));
            }
            let spacing = 8.0 * hole.box_half() / ring.len() as f64;
            // the widest gap is at the box corners
            let max_gap = std::f64::consts::SQRT_2 * hole.box_half() - hole.radius;
            let layers = ((max_gap / spacing - 1e-9).ceil() as usize).max(2);
            add_o_grid(&mut mesh, hole, &ring, layers);
        }

        mesh.compact();
        for (i, b) in bands.iter().enumerate().take(self.bands.len()) {
            let ids = (0..mesh.cells.len()).filter(|&c| b.contains(mesh.centroid(c))).collect();
            mesh.cell_sets.insert(format!("band{i}"), ids);
        }
        let tol = 1e-9 * self.width.max(self.height);
        let (w, h) = (self.width, self.height);
        mesh.add_boundary_set_where("left", |p| p[0].abs() <= tol);
        mesh.add_boundary_set_where("right", |p| (p[0] - w).abs() <= tol);
        mesh.add_boundary_set_where("bottom", |p| p[1].abs() <= tol);
        mesh.add_boundary_set_where("top", |p| (p[1] - h).abs() <= tol);
        for hole in &self.holes {
            let (c, r) = (hole.center, hole.radius);
            mesh.add_boundary_set_where(&hole.name, |p| ((p[0] - c[0]).hypot(p[1] - c[1]) - r).abs() <= 1e-9 * r);
        }
        mesh.validate()?;
        Ok(mesh)
    }
}

/// Uniform or graded structured quad mesh of `[0, width] × [0, height]`.
pub fn generate_rect_mesh(width: f64, height: f64, coarse_h: f64, bands: &[RefinementBand]) -> Result<Mesh> {
    RectMeshBuilder::new(width, height, coarse_h).bands(bands.iter().cloned()).build()
}

fn interval_dist(x: f64, iv: [f64; 2]) -> f64 {
    (iv[0] - x).max(x - iv[1]).max(0.0)
}

/// Grid coordinates along one axis: breakpoints are kept, each segment is
/// split so that local spacing follows `size`.
fn axis_nodes(mut breaks: Vec<f64>, len: f64, size: impl Fn(f64) -> f64) -> Vec<f64> {
    let tol = 1e-12 * len;
    breaks.retain(|&b| b >= -tol && b <= len + tol);
    for b in &mut breaks {
        *b = b.clamp(0.0, len);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= tol);

    const SAMPLES: usize = 512;
    let mut out = vec![breaks[0]];
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dx = (b - a) / SAMPLES as f64;
        let mut cum = vec![0.0; SAMPLES + 1];
        for k in 0..SAMPLES {
            cum[k + 1] = cum[k] + dx / size(a + (k as f64 + 0.5) * dx);
        }
        let total = cum[SAMPLES];
        let n = ((total - 1e-9).ceil() as usize).max(1);
        let mut k = 0;
        for m in 1..n {
            let t = total * m as f64 / n as f64;
            while cum[k + 1] < t {
                k += 1;
            }
            let frac = (t - cum[k]) / (cum[k + 1] - cum[k]);
            out.push(a + (k as f64 + frac) * dx);
        }
        out.push(b);
    }
    out
}

fn add_o_grid(mesh: &mut Mesh, hole: &CircularHole, ring: &[usize], layers: usize) {
    let [cx, cy] = hole.center;
    let p = ring.len();
    // rings[k][i], k = 0 on the circle, k = layers on the box
    let mut rings: Vec<Vec<usize>> = Vec::with_capacity(layers + 1);
    for k in 0..layers {
        let t = k as f64 / layers as f64;
        let ids = ring
            .iter()
            .map(|&n| {
                let [x, y] = mesh.nodes[n];
                let d = (x - cx).hypot(y - cy);
                let on = [cx + hole.radius * (x - cx) / d, cy + hole.radius * (y - cy) / d];
                mesh.nodes.push([on[0] + t * (x - on[0]), on[1] + t * (y - on[1])]);
                mesh.nodes.len() - 1
            })
            .collect();
        rings.push(ids);
    }
    rings.push(ring.to_vec());
    for k in 0..layers {
        for i in 0..p {
            let j = (i + 1) % p;
            mesh.cells
                .push(Cell::Quad4([rings[k][i], rings[k + 1][i], rings[k + 1][j], rings[k][j]]));
        }
    }
}
