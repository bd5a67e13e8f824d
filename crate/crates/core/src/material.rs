//! Degradation functions, local fracture energy functions and the
//! quasi-brittle parameter pipeline.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::LameParams;

/// Value and first two derivatives of a scalar function of `φ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivs<T> {
    pub value: T,
    pub d1: T,
    pub d2: T,
}

impl<T> Derivs<T> {
    pub fn new(value: T, d1: T, d2: T) -> Self {
        Self { value, d1, d2 }
    }
}

/// Cohesive softening laws reproduced by the quasi-brittle model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Softening {
    Linear,
    Exponential,
    Cornelissen,
}

impl fmt::Display for Softening {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Softening::Linear => "linear",
            Softening::Exponential => "exponential",
            Softening::Cornelissen => "cornelissen",
        };
        f.write_str(s)
    }
}

/// `(p, a₂, a₃)` for a softening law.
pub fn softening_constants(softening: Softening) -> (f64, f64, f64) {
    match softening {
        Softening::Linear => (2.0, -0.5, 0.0),
        Softening::Exponential => (2.5, 2f64.powf(5.0 / 3.0) - 3.0, 0.0),
        Softening::Cornelissen => (2.0, 1.3868, 0.6567),
    }
}

/// Parameters of the rational degradation function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiBrittle<T> {
    pub softening: Softening,
    pub p: T,
    pub a1: T,
    pub a2: T,
    pub a3: T,
}

impl<T: Real> QuasiBrittle<T> {
    pub fn new(softening: Softening, a1: T) -> Self {
        let (p, a2, a3) = softening_constants(softening);
        Self {
            softening,
            p: T::lit(p),
            a1,
            a2: T::lit(a2),
            a3: T::lit(a3),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    BrittleAt1,
    BrittleAt2,
    QuasiBrittle,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::BrittleAt1 => "brittle_at1",
            ModelKind::BrittleAt2 => "brittle_at2",
            ModelKind::QuasiBrittle => "quasi_brittle",
        };
        f.write_str(s)
    }
}

/// Choice of `g(φ)`, `w(φ)` and `c_w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseFieldModel<T> {
    BrittleAt1,
    BrittleAt2,
    QuasiBrittle(QuasiBrittle<T>),
}

/// Overshoot beyond `[0, 1]` that counts as a clipping event.
pub const CLIP_TOLERANCE: f64 = 1e-8;

/// Clamps `φ` into `[0, 1]`; the flag reports an overshoot above
/// [`CLIP_TOLERANCE`].
#[inline]
pub fn clamp_phase<T: Real>(phi: T) -> (T, bool) {
    let tol = T::lit(CLIP_TOLERANCE);
    let flagged = phi < -tol || phi > T::one() + tol;
    (phi.max(T::zero()).min(T::one()), flagged)
}

impl<T: Real> PhaseFieldModel<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            PhaseFieldModel::BrittleAt1 => ModelKind::BrittleAt1,
            PhaseFieldModel::BrittleAt2 => ModelKind::BrittleAt2,
            PhaseFieldModel::QuasiBrittle(_) => ModelKind::QuasiBrittle,
        }
    }

    /// Normalisation constant `c_w`.
    pub fn c_w(&self) -> T {
        match self {
            PhaseFieldModel::BrittleAt1 => T::lit(8.0 / 3.0),
            PhaseFieldModel::BrittleAt2 => T::lit(2.0),
            PhaseFieldModel::QuasiBrittle(_) => T::lit(PI),
        }
    }

    /// `g(φ)` with derivatives, evaluated at the clamped phase field.
    pub fn degradation(&self, phi: T) -> Result<Derivs<T>> {
        if phi.is_nan() {
            return Err(Error::NotFinite("degradation"));
        }
        let (phi, _) = clamp_phase(phi);
        let one = T::one();
        let two = T::lit(2.0);
        Ok(match self {
            PhaseFieldModel::BrittleAt1 | PhaseFieldModel::BrittleAt2 => {
                let r = one - phi;
                Derivs::new(r * r, -two * r, two)
            }
            PhaseFieldModel::QuasiBrittle(qb) => rational_degradation(qb, phi),
        })
    }

    /// `w(φ)` with derivatives.
    pub fn local_fracture_energy(&self, phi: T) -> Result<Derivs<T>> {
        if phi.is_nan() {
            return Err(Error::NotFinite("local_fracture_energy"));
        }
        let (phi, _) = clamp_phase(phi);
        let two = T::lit(2.0);
        Ok(match self {
            PhaseFieldModel::BrittleAt1 => Derivs::new(phi, T::one(), T::zero()),
            PhaseFieldModel::BrittleAt2 => Derivs::new(phi * phi, two * phi, two),
            PhaseFieldModel::QuasiBrittle(_) => Derivs::new(two * phi - phi * phi, two - two * phi, -two),
        })
    }
}

fn rational_degradation<T: Real>(qb: &QuasiBrittle<T>, phi: T) -> Derivs<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let six = T::lit(6.0);
    let r = one - phi;
    let p = qb.p;
    let (a1, a2, a3) = (qb.a1, qb.a2, qb.a3);

    let n = r.powf(p);
    let n1 = if r > T::zero() { -p * r.powf(p - one) } else { T::zero() };
    let n2 = if r > T::zero() {
        p * (p - one) * r.powf(p - two)
    } else if p == two {
        two
    } else {
        T::zero()
    };

    let poly = a1 * phi + a1 * a2 * phi * phi + a1 * a2 * a3 * phi * phi * phi;
    let poly1 = a1 + two * a1 * a2 * phi + three * a1 * a2 * a3 * phi * phi;
    let poly2 = two * a1 * a2 + six * a1 * a2 * a3 * phi;

    let q = n + poly;
    let q1 = n1 + poly1;
    let q2 = n2 + poly2;

    let g = n / q;
    let g1 = n1 / q - n * q1 / (q * q);
    let g2 = n2 / q - two * n1 * q1 / (q * q) - n * q2 / (q * q) + two * n * q1 * q1 / (q * q * q);
    Derivs::new(g, g1, g2)
}

/// Fracture and (for quasi-brittle models) strength parameters, in N and mm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractureParams {
    /// Griffith fracture energy `G_c` (N/mm).
    pub gc: f64,
    /// Regularisation length `l` (mm).
    pub length_scale: f64,
    /// Young's modulus `E₀` (N/mm²), quasi-brittle only.
    pub e0: Option<f64>,
    /// Tensile strength `f_t` (N/mm²), quasi-brittle only.
    pub ft: Option<f64>,
    pub nu: Option<f64>,
}

impl FractureParams {
    pub fn brittle(gc: f64, length_scale: f64) -> Result<Self> {
        let p = Self {
            gc,
            length_scale,
            e0: None,
            ft: None,
            nu: None,
        };
        p.validate(false)?;
        Ok(p)
    }

    pub fn quasi_brittle(gc: f64, length_scale: f64, e0: f64, ft: f64, nu: f64) -> Result<Self> {
        let p = Self {
            gc,
            length_scale,
            e0: Some(e0),
            ft: Some(ft),
            nu: Some(nu),
        };
        p.validate(true)?;
        Ok(p)
    }

    pub fn validate(&self, quasi_brittle: bool) -> Result<()> {
        positive("gc", self.gc)?;
        positive("length_scale", self.length_scale)?;
        if quasi_brittle {
            positive("e0", self.e0.unwrap_or(f64::NAN))?;
            positive("ft", self.ft.unwrap_or(f64::NAN))?;
        }
        Ok(())
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}

/// `a₁ = 4 E₀ G_c / (π l f_t²)`.
pub fn compute_a1(params: &FractureParams) -> Result<f64> {
    params.validate(true)?;
    let e0 = params.e0.unwrap_or_default();
    let ft = params.ft.unwrap_or_default();
    Ok(4.0 * e0 * params.gc / (PI * params.length_scale * ft * ft))
}

/// In-plane kinematic assumption.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneCondition {
    #[default]
    PlaneStrain,
    PlaneStress,
}

impl fmt::Display for PlaneCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlaneCondition::PlaneStrain => "plane_strain",
            PlaneCondition::PlaneStress => "plane_stress",
        })
    }
}

/// Lamé constants from `E` and `ν`.
pub fn lame_from_engineering(e: f64, nu: f64, plane: PlaneCondition) -> Result<LameParams<f64>> {
    positive("e0", e)?;
    if !(nu > -1.0 && nu < 0.5) {
        return Err(Error::param("nu", format!("must lie in (-1, 0.5), got {nu}")));
    }
    let mu = e / (2.0 * (1.0 + nu));
    let lambda = match plane {
        PlaneCondition::PlaneStrain => e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
        PlaneCondition::PlaneStress => e * nu / (1.0 - nu * nu),
    };
    LameParams::new(lambda, mu)
}

/// Converts given Lamé constants to the effective in-plane pair.
///
/// Under plane stress `λ* = 2λμ/(λ + 2μ)`; plane strain is the identity.
pub fn effective_lame(lame: LameParams<f64>, plane: PlaneCondition) -> Result<LameParams<f64>> {
    match plane {
        PlaneCondition::PlaneStrain => Ok(lame),
        PlaneCondition::PlaneStress => LameParams::new(2.0 * lame.lambda * lame.mu / (lame.lambda + 2.0 * lame.mu), lame.mu),
    }
}
