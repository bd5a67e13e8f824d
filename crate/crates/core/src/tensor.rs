//! Small-strain tensor algebra in 2D.
//!
//! Strains and stresses are stored as symmetric 2×2 tensors with a single
//! tensorial shear component. Assembled vectors use the engineering
//! convention `γ_xy = 2 ε_xy`; the conversion happens only in
//! [`Tensor2s::from_engineering`] and [`Tensor2s::to_stress_voigt`].
//!
//! The tensile/compressive split follows the spectral decomposition
//! `ε± = Σ ⟨εᵢ⟩± pᵢ⊗pᵢ` with split energies
//! `Ψ± = ½ λ ⟨tr ε⟩±² + μ ε±:ε±` and stresses `σ± = λ ⟨tr ε⟩± I + 2μ ε±`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::Error;
use crate::scalar::Real;

/// Voigt 3×3 matrix mapping engineering strain `[ε_xx, ε_yy, γ_xy]` to
/// stress `[σ_xx, σ_yy, σ_xy]`.
pub type Voigt3<T> = [[T; 3]; 3];

/// Symmetric second-order tensor in 2D.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Tensor2s<T> {
    pub xx: T,
    pub yy: T,
    /// Tensorial off-diagonal component (not engineering shear).
    pub xy: T,
}

impl<T: Real> Tensor2s<T> {
    pub fn new(xx: T, yy: T, xy: T) -> Self {
        Self { xx, yy, xy }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::one(), T::zero())
    }

    pub fn diag(a: T, b: T) -> Self {
        Self::new(a, b, T::zero())
    }

    /// Builds a strain tensor from `[ε_xx, ε_yy, γ_xy]`.
    pub fn from_engineering(v: [T; 3]) -> Self {
        Self::new(v[0], v[1], v[2] * T::lit(0.5))
    }

    /// Engineering strain vector `[ε_xx, ε_yy, 2 ε_xy]`.
    pub fn to_engineering(&self) -> [T; 3] {
        [self.xx, self.yy, self.xy + self.xy]
    }

    /// Stress vector `[σ_xx, σ_yy, σ_xy]`; dotted with an engineering strain
    /// vector it gives the double contraction.
    pub fn to_stress_voigt(&self) -> [T; 3] {
        [self.xx, self.yy, self.xy]
    }

    pub fn trace(&self) -> T {
        self.xx + self.yy
    }

    /// Double contraction `A : B`.
    pub fn ddot(&self, other: &Self) -> T {
        self.xx * other.xx + self.yy * other.yy + T::lit(2.0) * self.xy * other.xy
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.ddot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.yy.is_finite() && self.xy.is_finite()
    }

    /// `p ⊗ p` for a vector `p`.
    pub fn outer(p: [T; 2]) -> Self {
        Self::new(p[0] * p[0], p[1] * p[1], p[0] * p[1])
    }

    /// `R A Rᵀ` for the rotation by `angle`.
    pub fn rotated(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let xx = c * c * self.xx - T::lit(2.0) * c * s * self.xy + s * s * self.yy;
        let yy = s * s * self.xx + T::lit(2.0) * c * s * self.xy + c * c * self.yy;
        let xy = c * s * (self.xx - self.yy) + (c * c - s * s) * self.xy;
        Self::new(xx, yy, xy)
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> T {
        self.xx.abs().max(self.yy.abs()).max(self.xy.abs())
    }
}

impl<T: Real> Add for Tensor2s<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.xx + o.xx, self.yy + o.yy, self.xy + o.xy)
    }
}

impl<T: Real> Sub for Tensor2s<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.xx - o.xx, self.yy - o.yy, self.xy - o.xy)
    }
}

impl<T: Real> Neg for Tensor2s<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.xx, -self.yy, -self.xy)
    }
}

impl<T: Real> Mul<T> for Tensor2s<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        Self::new(self.xx * k, self.yy * k, self.xy * k)
    }
}

/// Which half of a Macaulay split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// `⟨x⟩± = (x ± |x|) / 2`.
#[inline]
pub fn macaulay<T: Real>(x: T, branch: Branch) -> T {
    match branch {
        Branch::Plus => (x + x.abs()) * T::lit(0.5),
        Branch::Minus => (x - x.abs()) * T::lit(0.5),
    }
}

/// Derivative of [`macaulay`]. Ties at zero go to the plus branch.
#[inline]
pub fn macaulay_slope<T: Real>(x: T, branch: Branch) -> T {
    let plus = x >= T::zero();
    match (branch, plus) {
        (Branch::Plus, true) | (Branch::Minus, false) => T::one(),
        _ => T::zero(),
    }
}

/// Eigen-decomposition of a strain and its tensile/compressive parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralSplit<T> {
    /// `ε₁ ≥ ε₂`.
    pub eigenvalues: [T; 2],
    /// Unit eigenvectors matching `eigenvalues`.
    pub eigenvectors: [[T; 2]; 2],
    pub eps_plus: Tensor2s<T>,
    pub eps_minus: Tensor2s<T>,
}

impl<T: Real> SpectralSplit<T> {
    pub fn part(&self, branch: Branch) -> Tensor2s<T> {
        match branch {
            Branch::Plus => self.eps_plus,
            Branch::Minus => self.eps_minus,
        }
    }
}

/// Closed-form symmetric 2×2 eigendecomposition.
///
/// The principal direction angle is `½ atan2(2ε_xy, ε_xx − ε_yy)`, which
/// returns the coordinate axes when the eigenvalues coincide.
pub fn eigen<T: Real>(eps: &Tensor2s<T>) -> ([T; 2], [[T; 2]; 2]) {
    let half = T::lit(0.5);
    let mean = (eps.xx + eps.yy) * half;
    let dev = (eps.xx - eps.yy) * half;
    let radius = dev.hypot(eps.xy);
    let angle = (eps.xy + eps.xy).atan2(eps.xx - eps.yy) * half;
    let (s, c) = angle.sin_cos();
    ([mean + radius, mean - radius], [[c, s], [-s, c]])
}

pub fn spectral_split<T: Real>(eps: &Tensor2s<T>) -> SpectralSplit<T> {
    let (values, vectors) = eigen(eps);
    let p1 = Tensor2s::outer(vectors[0]);
    let p2 = Tensor2s::outer(vectors[1]);
    let eps_plus = p1 * macaulay(values[0], Branch::Plus) + p2 * macaulay(values[1], Branch::Plus);
    let eps_minus = p1 * macaulay(values[0], Branch::Minus) + p2 * macaulay(values[1], Branch::Minus);
    SpectralSplit {
        eigenvalues: values,
        eigenvectors: vectors,
        eps_plus,
        eps_minus,
    }
}

/// Lamé constants `λ_L` and `μ` (N/mm²).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LameParams<T> {
    pub lambda: T,
    pub mu: T,
}

impl<T: Real> LameParams<T> {
    pub fn new(lambda: T, mu: T) -> Result<Self, Error> {
        let ok = mu > T::zero() && lambda + mu * T::lit(2.0 / 3.0) > T::zero();
        if !ok || !lambda.is_finite() || !mu.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lame",
                reason: format!("need mu > 0 and positive bulk modulus, got lambda={}, mu={}", lambda, mu),
            });
        }
        Ok(Self { lambda, mu })
    }

    /// Isotropic elasticity in Voigt form.
    pub fn elasticity(&self) -> Voigt3<T> {
        let (l, m) = (self.lambda, self.mu);
        let z = T::zero();
        [[l + m + m, l, z], [l, l + m + m, z], [z, z, m]]
    }

    pub fn stress(&self, eps: &Tensor2s<T>) -> Tensor2s<T> {
        Tensor2s::identity() * (self.lambda * eps.trace()) + *eps * (self.mu + self.mu)
    }
}

/// Returns `(Ψ⁺, Ψ⁻)`.
pub fn psi_split<T: Real>(eps: &Tensor2s<T>, lame: &LameParams<T>) -> (T, T) {
    let split = spectral_split(eps);
    psi_from_split(eps, &split, lame)
}

pub(crate) fn psi_from_split<T: Real>(eps: &Tensor2s<T>, split: &SpectralSplit<T>, lame: &LameParams<T>) -> (T, T) {
    let tr = eps.trace();
    let half = T::lit(0.5);
    let energy = |b: Branch| {
        let t = macaulay(tr, b);
        let e = split.part(b);
        half * lame.lambda * t * t + lame.mu * e.ddot(&e)
    };
    (energy(Branch::Plus), energy(Branch::Minus))
}

/// Returns `(σ⁺, σ⁻)`.
pub fn stress_split<T: Real>(eps: &Tensor2s<T>, lame: &LameParams<T>) -> (Tensor2s<T>, Tensor2s<T>) {
    let split = spectral_split(eps);
    stress_from_split(eps, &split, lame)
}

pub(crate) fn stress_from_split<T: Real>(eps: &Tensor2s<T>, split: &SpectralSplit<T>, lame: &LameParams<T>) -> (Tensor2s<T>, Tensor2s<T>) {
    let tr = eps.trace();
    let two_mu = lame.mu + lame.mu;
    let stress = |b: Branch| Tensor2s::identity() * (lame.lambda * macaulay(tr, b)) + split.part(b) * two_mu;
    (stress(Branch::Plus), stress(Branch::Minus))
}

/// Consistent tangents `∂σ±/∂ε` in Voigt form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitTangent<T> {
    pub plus: Voigt3<T>,
    pub minus: Voigt3<T>,
    /// Set when the eigenvalue gap fell below the degeneracy threshold and
    /// the coalescence limit was used for the shear coupling term.
    pub regularized: bool,
}

/// Relative eigenvalue gap below which the spectral tangent switches to its
/// coalescence limit.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

pub fn material_tangent<T: Real>(eps: &Tensor2s<T>, lame: &LameParams<T>) -> SplitTangent<T> {
    let split = spectral_split(eps);
    tangent_from_split(eps, &split, lame)
}

pub(crate) fn tangent_from_split<T: Real>(eps: &Tensor2s<T>, split: &SpectralSplit<T>, lame: &LameParams<T>) -> SplitTangent<T> {
    let [e1, e2] = split.eigenvalues;
    let gap = e1 - e2;
    let threshold = T::lit(DEGENERACY_THRESHOLD) * T::one().max(e1.abs() + e2.abs());
    let regularized = gap.abs() < threshold;

    let p1 = Tensor2s::outer(split.eigenvectors[0]);
    let p2 = Tensor2s::outer(split.eigenvectors[1]);
    let pv1 = p1.to_stress_voigt();
    let pv2 = p2.to_stress_voigt();
    // Q = p₁⊗p₂ + p₂⊗p₁ in stress-like storage.
    let [c, s] = split.eigenvectors[0];
    let two = T::lit(2.0);
    let q = [-two * c * s, two * c * s, c * c - s * s];
    let m = [T::one(), T::one(), T::zero()];
    let tr = eps.trace();

    let build = |b: Branch| -> Voigt3<T> {
        let coupling = if regularized {
            macaulay_slope((e1 + e2) * T::lit(0.5), b)
        } else {
            (macaulay(e1, b) - macaulay(e2, b)) / gap
        };
        let d1 = macaulay_slope(e1, b);
        let d2 = macaulay_slope(e2, b);
        let vol = lame.lambda * macaulay_slope(tr, b);
        let two_mu = lame.mu + lame.mu;
        let half = T::lit(0.5);
        let mut out = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let dev = d1 * pv1[i] * pv1[j] + d2 * pv2[i] * pv2[j] + coupling * half * q[i] * q[j];
                out[i][j] = vol * m[i] * m[j] + two_mu * dev;
            }
        }
        out
    };

    SplitTangent {
        plus: build(Branch::Plus),
        minus: build(Branch::Minus),
        regularized,
    }
}

/// Everything the element kernels need at one integration point.
#[derive(Clone, Copy, Debug)]
pub struct SplitResponse<T> {
    pub psi_plus: T,
    pub psi_minus: T,
    pub sigma_plus: Tensor2s<T>,
    pub sigma_minus: Tensor2s<T>,
    pub tangent: SplitTangent<T>,
}

pub fn split_response<T: Real>(eps: &Tensor2s<T>, lame: &LameParams<T>) -> SplitResponse<T> {
    let split = spectral_split(eps);
    let (psi_plus, psi_minus) = psi_from_split(eps, &split, lame);
    let (sigma_plus, sigma_minus) = stress_from_split(eps, &split, lame);
    let tangent = tangent_from_split(eps, &split, lame);
    SplitResponse {
        psi_plus,
        psi_minus,
        sigma_plus,
        sigma_minus,
        tangent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    fn tclose(a: &Tensor2s<f64>, b: &Tensor2s<f64>, tol: f64) -> bool {
        close(a.xx, b.xx, tol) && close(a.yy, b.yy, tol) && close(a.xy, b.xy, tol)
    }

    #[test]
    fn macaulay_branches() {
        assert_eq!(macaulay(3.0, Branch::Plus), 3.0);
        assert_eq!(macaulay(-3.0, Branch::Plus), 0.0);
        assert_eq!(macaulay(-3.0, Branch::Minus), -3.0);
        assert_eq!(macaulay(3.0, Branch::Minus), 0.0);
    }

    #[test]
    fn split_of_diagonal_tensor() {
        let s = spectral_split(&Tensor2s::diag(2.0, -1.0));
        assert!(tclose(&s.eps_plus, &Tensor2s::diag(2.0, 0.0), 1e-15));
        assert!(tclose(&s.eps_minus, &Tensor2s::diag(0.0, -1.0), 1e-15));
    }

    #[test]
    fn split_of_pure_shear() {
        let s = spectral_split(&Tensor2s::new(0.0, 0.0, 1.0));
        assert!(tclose(&s.eps_plus, &Tensor2s::new(0.5, 0.5, 0.5), 1e-14));
        assert!(tclose(&s.eps_minus, &Tensor2s::new(-0.5, -0.5, 0.5), 1e-14));
        assert!(close(s.eigenvalues[0], 1.0, 1e-15));
        assert!(close(s.eigenvalues[1], -1.0, 1e-15));
    }

    #[test]
    fn split_of_zero() {
        let s = spectral_split(&Tensor2s::<f64>::zero());
        assert_eq!(s.eps_plus, Tensor2s::zero());
        assert_eq!(s.eps_minus, Tensor2s::zero());
    }

    #[test]
    fn psi_hand_values() {
        let lame = LameParams::new(1.0, 1.0).unwrap();
        assert_eq!(psi_split(&Tensor2s::zero(), &lame), (0.0, 0.0));
        let (pp, _) = psi_split(&Tensor2s::diag(2.0, -1.0), &lame);
        assert!(close(pp, 4.5, 1e-15));
        let (pp, pm) = psi_split(&Tensor2s::diag(-0.3, -0.3), &lame);
        assert_eq!(pp, 0.0);
        assert!(pm > 0.0);
    }

    #[test]
    fn stress_hand_values() {
        let lame = LameParams::new(1.0, 1.0).unwrap();
        let (sp, sm) = stress_split(&Tensor2s::diag(2.0, -1.0), &lame);
        assert!(tclose(&sp, &Tensor2s::diag(5.0, 1.0), 1e-15));
        assert!(tclose(&sm, &Tensor2s::diag(0.0, -2.0), 1e-15));
        let eps = Tensor2s::new(0.3, -0.1, 0.25);
        let (sp, sm) = stress_split(&eps, &lame);
        assert!(tclose(&(sp + sm), &lame.stress(&eps), 1e-14));
    }

    #[test]
    fn zero_strain_tangent_ties_to_plus() {
        let lame = LameParams::new(3.0, 2.0).unwrap();
        let t = material_tangent(&Tensor2s::zero(), &lame);
        assert!(t.regularized);
        assert_eq!(t.plus, lame.elasticity());
        assert_eq!(t.minus, [[0.0; 3]; 3]);
    }

    #[test]
    fn near_coalescent_tangent_is_finite() {
        let lame = LameParams::new(1.0, 1.0).unwrap();
        let t = material_tangent(&Tensor2s::diag(1.0, 1.0 - 1e-14), &lame);
        assert!(t.regularized);
        assert!(t.plus.iter().flatten().all(|v: &f64| v.is_finite()));
        // both eigenvalues positive: the tensile tangent is the full elasticity
        for (a, b) in t.plus.iter().flatten().zip(lame.elasticity().iter().flatten()) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn tangent_matches_fd_of_stress() {
        let lame = LameParams::new(1.0, 1.0).unwrap();
        let eps = Tensor2s::diag(2.0, -1.0);
        let t = material_tangent(&eps, &lame);
        let v = eps.to_engineering();
        let h = 1e-6;
        for j in 0..3 {
            let mut vp = v;
            let mut vm = v;
            vp[j] += h;
            vm[j] -= h;
            let (sp, _) = stress_split(&Tensor2s::from_engineering(vp), &lame);
            let (smm, _) = stress_split(&Tensor2s::from_engineering(vm), &lame);
            let col = (sp - smm) * (0.5 / h);
            let col = col.to_stress_voigt();
            for i in 0..3 {
                assert!(close(t.plus[i][j], col[i], 1e-6), "({i},{j}) {} vs {}", t.plus[i][j], col[i]);
            }
        }
    }

    #[test]
    fn f32_instantiation_agrees_with_f64() {
        let lame64 = LameParams::new(121.154f64, 80.769).unwrap();
        let lame32 = LameParams::new(121.154f32, 80.769).unwrap();
        let e64 = Tensor2s::new(0.013f64, -0.004, 0.007);
        let e32 = Tensor2s::new(0.013f32, -0.004, 0.007);
        let (p64, m64) = psi_split(&e64, &lame64);
        let (p32, m32) = psi_split(&e32, &lame32);
        assert!(close(p32 as f64, p64, 1e-5));
        assert!(close(m32 as f64, m64, 1e-5));
    }

    #[test]
    fn lame_validation() {
        assert!(LameParams::new(1.0, 0.0).is_err());
        assert!(LameParams::new(-1.0, 1.0).is_err());
        assert!(LameParams::new(-0.5, 1.0).is_ok());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn strain() -> impl Strategy<Value = Tensor2s<f64>> {
            (-1e-2..1e-2f64, -1e-2..1e-2f64, -1e-2..1e-2f64).prop_map(|(a, b, c)| Tensor2s::new(a, b, c))
        }

        proptest! {
            #[test]
            fn split_sums_and_is_orthogonal(e in strain()) {
                let s = spectral_split(&e);
                let n = e.norm().max(1e-300);
                prop_assert!((s.eps_plus + s.eps_minus - e).max_abs() <= 1e-12 * n);
                prop_assert!(s.eps_plus.ddot(&s.eps_minus).abs() <= 1e-12 * n * n);
            }

            #[test]
            fn energies_are_nonnegative_and_add_up(e in strain(), lambda in 0.0..2e5f64, mu in 1.0..2e5f64) {
                let lame = LameParams::new(lambda, mu).unwrap();
                let (p, m) = psi_split(&e, &lame);
                let total = 0.5 * lame.stress(&e).ddot(&e);
                prop_assert!(p >= 0.0 && m >= 0.0);
                prop_assert!((p + m - total).abs() <= 1e-12 * total.max(1e-300));
            }

            #[test]
            fn split_is_rotation_covariant(e in strain(), angle in 0.0..6.3f64) {
                let s = spectral_split(&e);
                let r = spectral_split(&e.rotated(angle));
                let n = e.norm().max(1e-300);
                prop_assert!((r.eps_plus - s.eps_plus.rotated(angle)).max_abs() <= 1e-10 * n);
            }
        }
    }
}
