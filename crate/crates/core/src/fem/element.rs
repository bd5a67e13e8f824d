//! Element and nodal kernels.
//!
//! The bulk kernel integrates the displacement and phase-field equations with
//! full Gauss quadrature. The slack constraint `θ² = φ − ⁿφ` is integrated
//! with nodal quadrature (lumped weights `A_a = ∫ N_a`), so it holds node by
//! node.

use crate::error::{Error, Result};
use crate::fem::shape::{self, ElementKind, MAX_NODES};
use crate::material::{clamp_phase, PhaseFieldModel};
use crate::scalar::Real;
use crate::tensor::{split_response, LameParams, Tensor2s};

/// Local unknowns of the bulk kernel: `u` (two per node) then `φ`.
pub const MAX_LOCAL: usize = 3 * MAX_NODES;

/// Lower bound on `g` in the displacement tangent. The residual uses the
/// exact `g`, so converged solutions are unaffected.
pub const TANGENT_DEGRADATION_FLOOR: f64 = 1e-8;

/// Constitutive data shared by all elements.
#[derive(Clone, Copy, Debug)]
pub struct BulkMaterial<T> {
    pub model: PhaseFieldModel<T>,
    pub lame: LameParams<T>,
    pub gc: T,
    pub length_scale: T,
}

/// Nodal data of one element.
#[derive(Clone, Copy, Debug)]
pub struct ElementState<'a, T> {
    pub kind: ElementKind,
    pub coords: &'a [[T; 2]],
    pub u: &'a [[T; 2]],
    pub phi: &'a [T],
}

/// Residual and tangent of one element in local ordering
/// `[u_x0, u_y0, .., u_x(n-1), u_y(n-1), φ_0, .., φ_(n-1)]`.
#[derive(Clone, Debug)]
pub struct ElementSystem<T> {
    pub n_nodes: usize,
    pub residual: [T; MAX_LOCAL],
    pub tangent: [[T; MAX_LOCAL]; MAX_LOCAL],
    pub energy: T,
    pub clipped: bool,
}

impl<T: Real> ElementSystem<T> {
    fn zero(n_nodes: usize) -> Self {
        Self {
            n_nodes,
            residual: [T::zero(); MAX_LOCAL],
            tangent: [[T::zero(); MAX_LOCAL]; MAX_LOCAL],
            energy: T::zero(),
            clipped: false,
        }
    }

    pub fn n_local(&self) -> usize {
        3 * self.n_nodes
    }

    /// Local index of `φ_a`.
    pub fn phi_index(&self, a: usize) -> usize {
        2 * self.n_nodes + a
    }
}

/// Bulk residual `(Rᵘ, Rᵠ)` and its full Jacobian for one element.
///
/// `Rᵘ = ∫ Bᵀ(g σ⁺ + σ⁻)`,
/// `Rᵠ = ∫ (G_c w'/(c_w l) + g' Ψ⁺) N + (2 G_c l / c_w) ∇φ·∇N`.
pub fn element_bulk<T: Real>(id: usize, el: &ElementState<'_, T>, mat: &BulkMaterial<T>) -> Result<ElementSystem<T>> {
    let nn = el.kind.node_count();
    let shapes = shape::evaluate(el.kind, el.coords).map_err(|_| Error::ElementNaN {
        element: id,
        what: "non-positive Jacobian",
    })?;
    let two = T::lit(2.0);
    let cw = mat.model.c_w();
    let crack_local = mat.gc / (cw * mat.length_scale);
    let crack_grad = two * mat.gc * mat.length_scale / cw;

    let mut out = ElementSystem::zero(nn);
    for gp in &shapes {
        let mut e = [T::zero(); 3];
        let mut phi = T::zero();
        let mut gphi = [T::zero(); 2];
        for a in 0..nn {
            let [dx, dy] = gp.dndx[a];
            e[0] += dx * el.u[a][0];
            e[1] += dy * el.u[a][1];
            e[2] += dy * el.u[a][0] + dx * el.u[a][1];
            phi += gp.n[a] * el.phi[a];
            gphi[0] += dx * el.phi[a];
            gphi[1] += dy * el.phi[a];
        }
        let eps = Tensor2s::from_engineering(e);
        let resp = split_response(&eps, &mat.lame);
        out.clipped |= clamp_phase(phi).1;
        let g = mat.model.degradation(phi).map_err(|_| Error::ElementNaN {
            element: id,
            what: "phase field",
        })?;
        let w = mat.model.local_fracture_energy(phi).map_err(|_| Error::ElementNaN {
            element: id,
            what: "phase field",
        })?;

        let sp = resp.sigma_plus.to_stress_voigt();
        let sm = resp.sigma_minus.to_stress_voigt();
        let sigma = [g.value * sp[0] + sm[0], g.value * sp[1] + sm[1], g.value * sp[2] + sm[2]];
        // tangent only: keeps K_uu invertible where an iterate has φ ≥ 1
        let g_tan = g.value.max(T::lit(TANGENT_DEGRADATION_FLOOR));
        let mut c = [[T::zero(); 3]; 3];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = g_tan * resp.tangent.plus[i][j] + resp.tangent.minus[i][j];
            }
        }
        let drive = crack_local * w.d1 + g.d1 * resp.psi_plus;
        let drive1 = crack_local * w.d2 + g.d2 * resp.psi_plus;
        let jxw = gp.jxw;
        let grad2 = gphi[0] * gphi[0] + gphi[1] * gphi[1];
        out.energy +=
            jxw * (g.value * resp.psi_plus + resp.psi_minus + mat.gc / cw * (w.value / mat.length_scale + mat.length_scale * grad2));

        // B_a maps (u_x, u_y) of node a to engineering strain
        let b = |a: usize| {
            let [dx, dy] = gp.dndx[a];
            [[dx, T::zero()], [T::zero(), dy], [dy, dx]]
        };
        for a in 0..nn {
            let ba = b(a);
            let pa = out.phi_index(a);
            for k in 0..2 {
                let r = 2 * a + k;
                out.residual[r] += jxw * (ba[0][k] * sigma[0] + ba[1][k] * sigma[1] + ba[2][k] * sigma[2]);
                let sp_b = ba[0][k] * sp[0] + ba[1][k] * sp[1] + ba[2][k] * sp[2];
                for bb in 0..nn {
                    let pb = out.phi_index(bb);
                    let v = jxw * g.d1 * sp_b * gp.n[bb];
                    out.tangent[r][pb] += v;
                    out.tangent[pb][r] += v;
                }
            }
            out.residual[pa] += jxw * (drive * gp.n[a] + crack_grad * (gphi[0] * gp.dndx[a][0] + gphi[1] * gp.dndx[a][1]));
            for bb in 0..nn {
                let bbm = b(bb);
                // Bᵀ C B block
                for k in 0..2 {
                    for l in 0..2 {
                        let mut s = T::zero();
                        for i in 0..3 {
                            if ba[i][k] == T::zero() {
                                continue;
                            }
                            for j in 0..3 {
                                s += ba[i][k] * c[i][j] * bbm[j][l];
                            }
                        }
                        out.tangent[2 * a + k][2 * bb + l] += jxw * s;
                    }
                }
                let pb = out.phi_index(bb);
                out.tangent[pa][pb] +=
                    jxw * (drive1 * gp.n[a] * gp.n[bb] + crack_grad * (gp.dndx[a][0] * gp.dndx[bb][0] + gp.dndx[a][1] * gp.dndx[bb][1]));
            }
        }
    }
    if out.residual[..out.n_local()].iter().any(|v: &T| !v.is_finite()) {
        return Err(Error::ElementNaN {
            element: id,
            what: "residual",
        });
    }
    if out.tangent[..out.n_local()]
        .iter()
        .any(|row| row[..out.n_local()].iter().any(|v| !v.is_finite()))
    {
        return Err(Error::ElementNaN {
            element: id,
            what: "tangent",
        });
    }
    Ok(out)
}

/// Displacement rows of [`element_bulk`]: internal force with `K_uu` and `K_uφ`.
pub fn element_residual_u<T: Real>(id: usize, el: &ElementState<'_, T>, mat: &BulkMaterial<T>) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let sys = element_bulk(id, el, mat)?;
    let rows = 0..2 * sys.n_nodes;
    Ok((
        sys.residual[rows.clone()].to_vec(),
        sys.tangent[rows].iter().map(|r| r[..sys.n_local()].to_vec()).collect(),
    ))
}

/// Phase-field rows of [`element_bulk`] without the constraint term.
pub fn element_residual_phi<T: Real>(id: usize, el: &ElementState<'_, T>, mat: &BulkMaterial<T>) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let sys = element_bulk(id, el, mat)?;
    let rows = 2 * sys.n_nodes..sys.n_local();
    Ok((
        sys.residual[rows.clone()].to_vec(),
        sys.tangent[rows].iter().map(|r| r[..sys.n_local()].to_vec()).collect(),
    ))
}

/// Constraint contribution at one node, ordered `[φ, θ, Λ]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NodalSystem<T> {
    pub residual: [T; 3],
    pub tangent: [[T; 3]; 3],
}

/// Lagrange multiplier terms with lumped weight `area`:
/// `Rᵠ −= AΛ`, `Rᶿ = 2AΛθ`, `Rᴧ = −A(h − θ²)`.
pub fn nodal_lmm<T: Real>(area: T, h: T, theta: T, lambda: T) -> NodalSystem<T> {
    let two = T::lit(2.0);
    let z = T::zero();
    NodalSystem {
        residual: [-area * lambda, two * area * lambda * theta, -area * (h - theta * theta)],
        tangent: [
            [z, z, -area],
            [z, two * area * lambda, two * area * theta],
            [-area, two * area * theta, z],
        ],
    }
}

/// Penalty terms with lumped weight `area`:
/// `Rᵠ += ηA(h − θ²)`, `Rᶿ = −2ηAθ(h − θ²)`.
pub fn nodal_penalty<T: Real>(area: T, h: T, theta: T, eta: T) -> NodalSystem<T> {
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let z = T::zero();
    let gap = h - theta * theta;
    let ea = eta * area;
    NodalSystem {
        residual: [ea * gap, -two * ea * theta * gap, z],
        tangent: [
            [ea, -two * ea * theta, z],
            [-two * ea * theta, -two * ea * gap + four * ea * theta * theta, z],
            [z, z, z],
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{QuasiBrittle, Softening};

    fn unit_square() -> [[f64; 2]; 4] {
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    fn at2() -> BulkMaterial<f64> {
        BulkMaterial {
            model: PhaseFieldModel::BrittleAt2,
            lame: LameParams::new(121_154.0, 80_769.0).unwrap(),
            gc: 2.7,
            length_scale: 0.015,
        }
    }

    #[test]
    fn zero_displacement_zero_residual() {
        let x = unit_square();
        let u = [[0.0; 2]; 4];
        let phi = [0.3; 4];
        let sys = element_bulk(
            0,
            &ElementState {
                kind: ElementKind::Quad4,
                coords: &x,
                u: &u,
                phi: &phi,
            },
            &at2(),
        )
        .unwrap();
        assert!(sys.residual[..8].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn broken_element_in_tension_carries_no_stress() {
        let x = unit_square();
        let u = x.map(|p| [0.0, 1e-3 * p[1]]);
        let phi = [1.0; 4];
        let sys = element_bulk(
            0,
            &ElementState {
                kind: ElementKind::Quad4,
                coords: &x,
                u: &u,
                phi: &phi,
            },
            &at2(),
        )
        .unwrap();
        assert!(sys.residual[..8].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn homogeneous_phase_residual_density() {
        // φ uniform, ∇φ = 0: Rᵠ_a = (G_c/l · φ − 2(1−φ)Ψ⁺) · A_a
        let m = at2();
        let x = unit_square();
        let e = 1e-3;
        let u = x.map(|p| [0.0, e * p[1]]);
        let phi = [0.25; 4];
        let sys = element_bulk(
            0,
            &ElementState {
                kind: ElementKind::Quad4,
                coords: &x,
                u: &u,
                phi: &phi,
            },
            &m,
        )
        .unwrap();
        let psi = 0.5 * m.lame.lambda * e * e + m.lame.mu * e * e;
        let expect = 0.25 * (m.gc / m.length_scale * 0.25 - 2.0 * 0.75 * psi);
        for a in 0..4 {
            assert!((sys.residual[8 + a] - expect).abs() < 1e-9 * expect.abs().max(1.0));
        }
    }

    fn fd_check(mat: &BulkMaterial<f64>, u: [[f64; 2]; 4], phi: [f64; 4]) {
        let x = [[0.0, 0.0], [1.2, 0.1], [1.0, 0.9], [-0.1, 1.1]];
        let eval = |u: &[[f64; 2]; 4], phi: &[f64; 4]| {
            element_bulk(
                0,
                &ElementState {
                    kind: ElementKind::Quad4,
                    coords: &x,
                    u,
                    phi,
                },
                mat,
            )
            .unwrap()
        };
        let base = eval(&u, &phi);
        let h = 1e-7;
        for j in 0..12 {
            let (mut up, mut pp) = (u, phi);
            let (mut um, mut pm) = (u, phi);
            let step = if j < 8 { h * 1e-2 } else { h };
            if j < 8 {
                up[j / 2][j % 2] += step;
                um[j / 2][j % 2] -= step;
            } else {
                pp[j - 8] += step;
                pm[j - 8] -= step;
            }
            let (rp, rm) = (eval(&up, &pp), eval(&um, &pm));
            for i in 0..12 {
                let fd = (rp.residual[i] - rm.residual[i]) / (2.0 * step);
                let an = base.tangent[i][j];
                let scale = base.tangent[i].iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!((fd - an).abs() <= 1e-5 * scale, "K[{i}][{j}]: fd {fd} vs {an}");
            }
            // energy gradient equals residual
            let fe = (rp.energy - rm.energy) / (2.0 * step);
            assert!((fe - base.residual[j]).abs() <= 1e-5 * base.residual.iter().fold(1e-12f64, |m, v| m.max(v.abs())));
        }
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let u = [[0.0, 0.0], [1e-3, -2e-4], [4e-4, 1.5e-3], [-3e-4, 8e-4]];
        let phi = [0.1, 0.3, 0.5, 0.2];
        fd_check(&at2(), u, phi);
        let mut qb = at2();
        qb.model = PhaseFieldModel::QuasiBrittle(QuasiBrittle::new(Softening::Cornelissen, 199.83));
        fd_check(&qb, u, phi);
    }

    #[test]
    fn nodal_kernels_vanish_at_complementarity() {
        let r = nodal_lmm(0.3f64, 0.04, 0.2, 0.0);
        assert!(r.residual.iter().all(|v| v.abs() < 1e-15));
        let p = nodal_penalty(0.3f64, 0.04, 0.2, 1e6);
        assert!(p.residual.iter().all(|v| v.abs() < 1e-9));
        let neg = nodal_penalty(1.0f64, -1e-3, 0.0, 1e6);
        assert!((neg.residual[0] + 1e3).abs() < 1e-9);
    }

    #[test]
    fn nodal_tangents_match_finite_differences() {
        let (a, h, th, la, eta) = (0.7, 0.03, 0.11, 2.5, 1e3);
        let lmm = |x: [f64; 3]| nodal_lmm(a, x[0] - 0.02, x[1], x[2]).residual;
        let pen = |x: [f64; 3]| nodal_penalty(a, x[0] - 0.02, x[1], eta).residual;
        for (f, k) in [
            (&lmm as &dyn Fn([f64; 3]) -> [f64; 3], nodal_lmm(a, h - 0.02, th, la).tangent),
            (&pen, nodal_penalty(a, h - 0.02, th, eta).tangent),
        ] {
            let x0 = [h, th, la];
            for j in 0..3 {
                let mut xp = x0;
                let mut xm = x0;
                xp[j] += 1e-6;
                xm[j] -= 1e-6;
                let (rp, rm) = (f(xp), f(xm));
                for i in 0..3 {
                    let fd = (rp[i] - rm[i]) / 2e-6;
                    assert!((fd - k[i][j]).abs() < 1e-6 * (1.0 + k[i][j].abs()), "[{i}][{j}] {fd} {}", k[i][j]);
                }
            }
        }
    }
}
