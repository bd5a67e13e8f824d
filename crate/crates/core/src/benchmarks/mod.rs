//! The five benchmark problems as executable definitions, plus the boundary
//! condition machinery they share.

mod catalog;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use catalog::{
    band_ratio, build, build_lpanel, build_notched_hole, build_sens, build_sent, build_tpb, build_with, default_params,
    homogeneous_element, notched_hole_short_length, COARSE_RATIO, HOLE_CENTER, LPANEL_CORNER, PIN_LOWER, PIN_RADIUS, PIN_UPPER,
};

use crate::error::{Error, Result};
use crate::fem::{BulkMaterial, DofKind, DofMap, FeProblem, Formulation};
use crate::material::{
    compute_a1, effective_lame, lame_from_engineering, FractureParams, ModelKind, PhaseFieldModel, PlaneCondition, QuasiBrittle, Softening,
};
use crate::mesh::{closed_loop, Mesh};
use crate::solver::{LoadedProblem, Monitor, StepSchedule};
use crate::tensor::LameParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Sent,
    Sens,
    NotchedHole,
    Tpb,
    Lpanel,
}

impl Benchmark {
    pub const ALL: [Benchmark; 5] = [
        Benchmark::Sent,
        Benchmark::Sens,
        Benchmark::NotchedHole,
        Benchmark::Tpb,
        Benchmark::Lpanel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Sent => "sent",
            Benchmark::Sens => "sens",
            Benchmark::NotchedHole => "notched_hole",
            Benchmark::Tpb => "tpb",
            Benchmark::Lpanel => "lpanel",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Benchmark::Sent => "single edge notched specimen under tension",
            Benchmark::Sens => "single edge notched specimen under shear",
            Benchmark::NotchedHole => "notched plate with a hole loaded through pins",
            Benchmark::Tpb => "notched three-point bending beam",
            Benchmark::Lpanel => "L-shaped panel",
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL.into_iter().find(|b| b.name() == s).ok_or_else(|| {
            let names: Vec<_> = Benchmark::ALL.iter().map(|b| b.name()).collect();
            Error::param(
                "benchmark",
                format!("unknown benchmark `{s}`, expected one of {}", names.join(", ")),
            )
        })
    }
}

/// Material description in N, mm. Brittle benchmarks give Lamé constants,
/// quasi-brittle ones `E₀` and `ν`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    pub model: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub softening: Option<Softening>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ft: Option<f64>,
    pub gc: f64,
    pub length_scale: f64,
    pub plane: PlaneCondition,
    /// Out-of-plane thickness (mm).
    pub thickness: f64,
}

impl MaterialParams {
    /// Brittle AT2 in plane strain, unit thickness.
    pub fn at2(lambda: f64, mu: f64, gc: f64, length_scale: f64) -> Self {
        Self {
            model: ModelKind::BrittleAt2,
            softening: None,
            lambda: Some(lambda),
            mu: Some(mu),
            e0: None,
            nu: None,
            ft: None,
            gc,
            length_scale,
            plane: PlaneCondition::PlaneStrain,
            thickness: 1.0,
        }
    }

    /// Quasi-brittle with Cornelissen softening in plane strain, unit thickness.
    pub fn cornelissen(e0: f64, nu: f64, ft: f64, gc: f64, length_scale: f64) -> Self {
        Self {
            model: ModelKind::QuasiBrittle,
            softening: Some(Softening::Cornelissen),
            lambda: None,
            mu: None,
            e0: Some(e0),
            nu: Some(nu),
            ft: Some(ft),
            gc,
            length_scale,
            plane: PlaneCondition::PlaneStrain,
            thickness: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fracture()?;
        self.lame()?;
        self.model()?;
        if !(self.thickness > 0.0 && self.thickness.is_finite()) {
            return Err(Error::param("thickness", format!("must be positive, got {}", self.thickness)));
        }
        Ok(())
    }

    pub fn fracture(&self) -> Result<FractureParams> {
        match self.model {
            ModelKind::QuasiBrittle => FractureParams::quasi_brittle(
                self.gc,
                self.length_scale,
                self.e0.ok_or_else(|| Error::param("e0", "required by the quasi-brittle model"))?,
                self.ft.ok_or_else(|| Error::param("ft", "required by the quasi-brittle model"))?,
                self.nu.unwrap_or(0.0),
            ),
            _ => FractureParams::brittle(self.gc, self.length_scale),
        }
    }

    /// In-plane Lamé constants.
    pub fn lame(&self) -> Result<LameParams<f64>> {
        match (self.lambda, self.mu, self.e0, self.nu) {
            (Some(l), Some(m), _, _) => effective_lame(LameParams::new(l, m)?, self.plane),
            (None, None, Some(e), Some(nu)) => lame_from_engineering(e, nu, self.plane),
            _ => Err(Error::param("lambda", "give either lambda and mu, or e0 and nu")),
        }
    }

    pub fn model(&self) -> Result<PhaseFieldModel<f64>> {
        Ok(match self.model {
            ModelKind::BrittleAt1 => PhaseFieldModel::BrittleAt1,
            ModelKind::BrittleAt2 => PhaseFieldModel::BrittleAt2,
            ModelKind::QuasiBrittle => {
                let softening = self
                    .softening
                    .ok_or_else(|| Error::param("softening", "required by the quasi-brittle model"))?;
                PhaseFieldModel::QuasiBrittle(QuasiBrittle::new(softening, compute_a1(&self.fracture()?)?))
            }
        })
    }

    pub fn bulk(&self) -> Result<BulkMaterial<f64>> {
        Ok(BulkMaterial {
            model: self.model()?,
            lame: self.lame()?,
            gc: self.gc,
            length_scale: self.length_scale,
        })
    }
}

/// Mesh sizing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshParams {
    /// Element size inside the refinement bands (mm).
    pub band_h: f64,
    /// Far-field element size (mm).
    pub coarse_h: f64,
    /// Multiplier on the band half-widths around the expected crack path.
    pub band_scale: f64,
}

impl MeshParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.band_h > 0.0) {
            return Err(Error::param("band_h", format!("must be positive, got {}", self.band_h)));
        }
        if !(self.coarse_h >= self.band_h) {
            return Err(Error::param("coarse_h", format!("must be at least band_h, got {}", self.coarse_h)));
        }
        if !(self.band_scale > 0.0) {
            return Err(Error::param("band_scale", format!("must be positive, got {}", self.band_scale)));
        }
        Ok(())
    }
}

/// Every tunable input of a benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkParams {
    pub material: MaterialParams,
    pub mesh: MeshParams,
    pub schedule: StepSchedule,
}

impl BenchmarkParams {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.mesh.validate()
    }
}

/// How a pin's master unknowns are driven.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PinDrive {
    /// Translations and rotation fixed.
    Fixed,
    /// Translation along `axis` equals `factor · u_applied`; the other
    /// translation is fixed and the rotation is free.
    Driven { axis: usize, factor: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    /// Both displacement components zero on a node set.
    Fixed { set: String },
    /// One component zero.
    FixedComponent { set: String, axis: usize },
    /// One component equal to `factor · u_applied`.
    Prescribed { set: String, axis: usize, factor: f64 },
    /// Nodes on a closed loop move rigidly with a pin at `center`.
    RigidPin { set: String, center: [f64; 2], drive: PinDrive },
}

/// Reaction reported as the load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LoadOutput {
    /// Sum over a node set of the reaction along `axis`, oriented by `sign`.
    Set { set: String, axis: usize, sign: f64 },
    /// Reaction on translation `axis` of pin number `pin`.
    Pin { pin: usize, axis: usize, sign: f64 },
}

/// A fully specified benchmark ready for discretisation.
#[derive(Clone, Debug)]
pub struct BenchmarkProblem {
    pub name: String,
    pub params: BenchmarkParams,
    pub mesh: Mesh,
    pub bcs: Vec<BoundaryCondition>,
    pub load: LoadOutput,
    /// Modelling assumptions not fixed by the source tables.
    pub notes: Vec<String>,
}

fn check_axis(axis: usize) -> Result<()> {
    if axis < 2 {
        Ok(())
    } else {
        Err(Error::Setup(format!("displacement axis {axis} is not 0 or 1")))
    }
}

/// Constraint rows tying the nodes of `set` to the masters of pin `pin`:
/// `u_x = U_x − ω (y − y_c)`, `u_y = U_y + ω (x − x_c)`.
pub fn apply_rigid_pin(
    mesh: &Mesh,
    dofs: &DofMap,
    pin: usize,
    set: &str,
    center: [f64; 2],
    drive: PinDrive,
) -> Result<Vec<(usize, DofKind)>> {
    let edges = mesh.edge_set(set)?;
    closed_loop(edges).map_err(|e| Error::Setup(format!("rigid pin `{set}`: {e}")))?;
    if 3 * pin + 2 >= dofs.n_masters() {
        return Err(Error::Setup(format!("pin {pin} has no master DOFs")));
    }
    let [mx, my, mw] = [dofs.master(3 * pin), dofs.master(3 * pin + 1), dofs.master(3 * pin + 2)];
    let mut rows = Vec::new();
    for &n in mesh.node_set(set)? {
        let [x, y] = mesh.nodes[n];
        rows.push((dofs.u(n, 0), DofKind::Tied(vec![(mx, 1.0), (mw, -(y - center[1]))])));
        rows.push((dofs.u(n, 1), DofKind::Tied(vec![(my, 1.0), (mw, x - center[0])])));
    }
    match drive {
        PinDrive::Fixed => {
            for m in [mx, my, mw] {
                rows.push((m, DofKind::Prescribed(0.0)));
            }
        }
        PinDrive::Driven { axis, factor } => {
            check_axis(axis)?;
            let (driven, other) = if axis == 0 { (mx, my) } else { (my, mx) };
            rows.push((driven, DofKind::Prescribed(factor)));
            rows.push((other, DofKind::Prescribed(0.0)));
        }
    }
    Ok(rows)
}

impl BenchmarkProblem {
    fn pin_count(&self) -> usize {
        self.bcs.iter().filter(|b| matches!(b, BoundaryCondition::RigidPin { .. })).count()
    }

    /// DOF map with every boundary condition applied; later conditions
    /// override earlier ones on shared DOFs. Pin ties are applied last.
    pub fn dof_map(&self, formulation: Formulation) -> Result<DofMap> {
        let mesh = &self.mesh;
        let mut dofs = DofMap::new(mesh.node_count(), formulation, 3 * self.pin_count());
        let mut rows = Vec::new();
        for bc in &self.bcs {
            match bc {
                BoundaryCondition::Fixed { set } => {
                    for &n in mesh.node_set(set)? {
                        rows.push((dofs.u(n, 0), DofKind::Prescribed(0.0)));
                        rows.push((dofs.u(n, 1), DofKind::Prescribed(0.0)));
                    }
                }
                BoundaryCondition::FixedComponent { set, axis } => {
                    check_axis(*axis)?;
                    for &n in mesh.node_set(set)? {
                        rows.push((dofs.u(n, *axis), DofKind::Prescribed(0.0)));
                    }
                }
                BoundaryCondition::Prescribed { set, axis, factor } => {
                    check_axis(*axis)?;
                    for &n in mesh.node_set(set)? {
                        rows.push((dofs.u(n, *axis), DofKind::Prescribed(*factor)));
                    }
                }
                BoundaryCondition::RigidPin { .. } => {}
            }
        }
        dofs.constrain(rows)?;
        let mut pin = 0;
        let mut tied = Vec::new();
        for bc in &self.bcs {
            if let BoundaryCondition::RigidPin { set, center, drive } = bc {
                tied.extend(apply_rigid_pin(mesh, &dofs, pin, set, *center, *drive)?);
                pin += 1;
            }
        }
        dofs.constrain(tied)?;
        Ok(dofs)
    }

    pub fn monitor(&self, dofs: &DofMap) -> Result<Monitor> {
        match &self.load {
            LoadOutput::Set { set, axis, sign } => {
                check_axis(*axis)?;
                Ok(Monitor {
                    dofs: self.mesh.node_set(set)?.iter().map(|&n| dofs.u(n, *axis)).collect(),
                    sign: *sign,
                })
            }
            LoadOutput::Pin { pin, axis, sign } => {
                check_axis(*axis)?;
                if 3 * pin + axis >= dofs.n_masters() {
                    return Err(Error::Setup(format!("load output refers to missing pin {pin}")));
                }
                Ok(Monitor {
                    dofs: vec![dofs.master(3 * pin + axis)],
                    sign: *sign,
                })
            }
        }
    }

    /// Builds the discrete problem for one formulation.
    pub fn discretize(&self, formulation: Formulation) -> Result<LoadedProblem> {
        self.params.validate()?;
        let dofs = self.dof_map(formulation)?;
        let monitor = self.monitor(&dofs)?;
        let fe = FeProblem::new(self.mesh.clone(), dofs, self.params.material.bulk()?)?;
        Ok(LoadedProblem {
            fe,
            monitor,
            thickness: self.params.material.thickness,
        })
    }

    /// Same problem on a different mesh carrying the same named sets.
    pub fn with_mesh(mut self, mesh: Mesh) -> Self {
        self.mesh = mesh;
        self
    }
}
