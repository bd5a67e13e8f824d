//! Lagrange shape functions and Gauss rules for `quad4` and `tri3`.

use crate::scalar::Real;

/// Maximum nodes per supported element.
pub const MAX_NODES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Quad4,
    Tri3,
}

impl ElementKind {
    pub fn node_count(self) -> usize {
        match self {
            ElementKind::Quad4 => 4,
            ElementKind::Tri3 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Quad4 => "quad4",
            ElementKind::Tri3 => "tri3",
        }
    }

    /// Reference coordinates and weights: 2×2 Gauss for quads, centroid for triangles.
    pub fn quadrature(self) -> &'static [([f64; 2], f64)] {
        const G: f64 = 0.577_350_269_189_625_8;
        const QUAD: [([f64; 2], f64); 4] = [([-G, -G], 1.0), ([G, -G], 1.0), ([G, G], 1.0), ([-G, G], 1.0)];
        const TRI: [([f64; 2], f64); 1] = [([1.0 / 3.0, 1.0 / 3.0], 0.5)];
        match self {
            ElementKind::Quad4 => &QUAD,
            ElementKind::Tri3 => &TRI,
        }
    }

    /// Shape values and reference derivatives at `xi`.
    pub fn reference<T: Real>(self, xi: [T; 2]) -> ([T; MAX_NODES], [[T; 2]; MAX_NODES]) {
        let mut n = [T::zero(); MAX_NODES];
        let mut d = [[T::zero(); 2]; MAX_NODES];
        match self {
            ElementKind::Quad4 => {
                let q = T::lit(0.25);
                let signs = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
                for (a, &(sx, sy)) in signs.iter().enumerate() {
                    let (sx, sy) = (T::lit(sx), T::lit(sy));
                    let fx = T::one() + sx * xi[0];
                    let fy = T::one() + sy * xi[1];
                    n[a] = q * fx * fy;
                    d[a] = [q * sx * fy, q * fx * sy];
                }
            }
            ElementKind::Tri3 => {
                n[0] = T::one() - xi[0] - xi[1];
                n[1] = xi[0];
                n[2] = xi[1];
                d[0] = [-T::one(), -T::one()];
                d[1] = [T::one(), T::zero()];
                d[2] = [T::zero(), T::one()];
            }
        }
        (n, d)
    }
}

/// Shape data mapped to physical coordinates at one quadrature point.
#[derive(Clone, Copy, Debug)]
pub struct ShapeEval<T> {
    pub n: [T; MAX_NODES],
    pub dndx: [[T; 2]; MAX_NODES],
    pub det_j: T,
    /// `det J · w`.
    pub jxw: T,
}

/// Evaluates shape functions at every quadrature point of an element.
///
/// Returns `Err(det J)` for the first non-positive Jacobian.
pub fn evaluate<T: Real>(kind: ElementKind, coords: &[[T; 2]]) -> Result<Vec<ShapeEval<T>>, T> {
    let nn = kind.node_count();
    kind.quadrature()
        .iter()
        .map(|&(xi, w)| {
            let (n, d) = kind.reference([T::lit(xi[0]), T::lit(xi[1])]);
            let mut j = [[T::zero(); 2]; 2];
            for a in 0..nn {
                for r in 0..2 {
                    for c in 0..2 {
                        j[r][c] += coords[a][r] * d[a][c];
                    }
                }
            }
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if !(det > T::zero()) {
                return Err(det);
            }
            let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
            let mut dndx = [[T::zero(); 2]; MAX_NODES];
            for a in 0..nn {
                // dN/dx_r = Σ_c dN/dξ_c · dξ_c/dx_r
                for r in 0..2 {
                    dndx[a][r] = d[a][0] * inv[0][r] + d[a][1] * inv[1][r];
                }
            }
            Ok(ShapeEval {
                n,
                dndx,
                det_j: det,
                jxw: det * T::lit(w),
            })
        })
        .collect()
}

/// Row sums of the consistent mass matrix, `∫ N_a dΩ`.
pub fn lumped_weights<T: Real>(kind: ElementKind, shapes: &[ShapeEval<T>]) -> [T; MAX_NODES] {
    let mut out = [T::zero(); MAX_NODES];
    for gp in shapes {
        for (a, w) in out.iter_mut().enumerate().take(kind.node_count()) {
            *w += gp.n[a] * gp.jxw;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_area() {
        let quad = [[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [0.0, 1.5]];
        let sh = evaluate(ElementKind::Quad4, &quad).unwrap();
        let area: f64 = sh.iter().map(|g| g.jxw).sum();
        // shoelace
        let exact = 0.5 * ((0.0 * 0.0 - 2.0 * 0.0) + (2.0 * 1.0 - 2.5 * 0.0) + (2.5 * 1.5 - 0.0 * 1.0) + (0.0 - 0.0));
        assert!((area - exact).abs() < 1e-14);
        for g in &sh {
            let s: f64 = g.n.iter().take(4).sum();
            assert!((s - 1.0).abs() < 1e-15);
            let dx: f64 = g.dndx.iter().take(4).map(|d| d[0]).sum();
            assert!(dx.abs() < 1e-14);
        }
        let w = lumped_weights(ElementKind::Quad4, &sh);
        assert!((w.iter().sum::<f64>() - exact).abs() < 1e-14);
    }

    #[test]
    fn linear_field_gradient_is_exact() {
        let tri = [[0.0, 0.0], [1.0, 0.2], [0.3, 1.1]];
        let sh = evaluate(ElementKind::Tri3, &tri).unwrap();
        let f = |p: [f64; 2]| 3.0 * p[0] - 2.0 * p[1] + 1.0;
        let g = &sh[0];
        let gx: f64 = (0..3).map(|a| f(tri[a]) * g.dndx[a][0]).sum();
        let gy: f64 = (0..3).map(|a| f(tri[a]) * g.dndx[a][1]).sum();
        assert!((gx - 3.0).abs() < 1e-13 && (gy + 2.0).abs() < 1e-13);
    }

    #[test]
    fn clockwise_element_rejected() {
        let quad = [[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]];
        assert!(evaluate::<f64>(ElementKind::Quad4, &quad).is_err());
    }
}
