use super::Benchmark;
use super::{BenchmarkParams, BenchmarkProblem, BoundaryCondition, LoadOutput, MaterialParams, MeshParams, PinDrive};
use crate::error::Result;
use crate::mesh::{cut_notch, CircularHole, Mesh, RectMeshBuilder, RefinementBand};
use crate::solver::StepSchedule;

/// Far-field element size as a multiple of the band size.
pub const COARSE_RATIO: f64 = 10.0;

fn schedule(s: &str) -> StepSchedule {
    s.parse().expect("catalog schedules are valid")
}

fn brittle(lambda: f64, mu: f64, gc: f64, l: f64) -> MaterialParams {
    MaterialParams::at2(lambda, mu, gc, l)
}

fn concrete(e0: f64, nu: f64, ft: f64, gc: f64, l: f64) -> MaterialParams {
    MaterialParams {
        thickness: 100.0,
        ..MaterialParams::cornelissen(e0, nu, ft, gc, l)
    }
}

fn mesh_params(band_h: f64) -> MeshParams {
    MeshParams {
        band_h,
        coarse_h: COARSE_RATIO * band_h,
        band_scale: 1.0,
    }
}

/// Element size in the band relative to `l` used by each benchmark.
pub fn band_ratio(b: Benchmark) -> f64 {
    match b {
        Benchmark::Sent | Benchmark::Sens | Benchmark::NotchedHole => 0.5,
        Benchmark::Tpb | Benchmark::Lpanel => 0.2,
    }
}

/// Parameters of the canonical benchmarks in N, mm.
pub fn default_params(b: Benchmark) -> BenchmarkParams {
    match b {
        Benchmark::Sent => BenchmarkParams {
            material: brittle(121.154e3, 80.769e3, 2.7, 1.5e-2),
            mesh: mesh_params(7.5e-3),
            schedule: schedule("450*1e-5, 2000*1e-6"),
        },
        Benchmark::Sens => BenchmarkParams {
            material: brittle(121.154e3, 80.769e3, 2.7, 1.5e-2),
            mesh: mesh_params(7.5e-3),
            schedule: schedule("90*1e-4, 600*1e-5"),
        },
        Benchmark::NotchedHole => BenchmarkParams {
            material: brittle(1.94e3, 2.45e3, 2.28, 0.25),
            mesh: mesh_params(0.125),
            schedule: schedule("2000*1e-3"),
        },
        Benchmark::Tpb => BenchmarkParams {
            material: concrete(2.0e4, 0.2, 2.4, 0.113, 2.5),
            mesh: mesh_params(0.5),
            schedule: schedule("1000*1e-3"),
        },
        Benchmark::Lpanel => BenchmarkParams {
            material: concrete(2.0e4, 0.18, 2.5, 0.130, 5.0),
            mesh: mesh_params(1.0),
            schedule: schedule("1000*1e-3"),
        },
    }
}

/// The notched plate with the shorter length scale of the earlier study.
pub fn notched_hole_short_length() -> BenchmarkParams {
    let mut p = default_params(Benchmark::NotchedHole);
    p.material.length_scale = 0.1;
    p.mesh = mesh_params(0.05);
    p
}

pub fn build(b: Benchmark) -> Result<BenchmarkProblem> {
    build_with(b, default_params(b))
}

pub fn build_with(b: Benchmark, params: BenchmarkParams) -> Result<BenchmarkProblem> {
    params.validate()?;
    match b {
        Benchmark::Sent => sent(params),
        Benchmark::Sens => sens(params),
        Benchmark::NotchedHole => notched_hole(params),
        Benchmark::Tpb => tpb(params),
        Benchmark::Lpanel => lpanel(params),
    }
}

pub fn build_sent() -> Result<BenchmarkProblem> {
    build(Benchmark::Sent)
}

pub fn build_sens() -> Result<BenchmarkProblem> {
    build(Benchmark::Sens)
}

pub fn build_notched_hole() -> Result<BenchmarkProblem> {
    build(Benchmark::NotchedHole)
}

pub fn build_tpb() -> Result<BenchmarkProblem> {
    build(Benchmark::Tpb)
}

pub fn build_lpanel() -> Result<BenchmarkProblem> {
    build(Benchmark::Lpanel)
}

fn notched_square(params: &BenchmarkParams, band: RefinementBand) -> Result<Mesh> {
    let m = &params.mesh;
    let mesh = RectMeshBuilder::new(1.0, 1.0, m.coarse_h)
        .band(band)
        .x_break(0.5)
        .y_break(0.5)
        .build()?;
    cut_notch(&mesh, [0.0, 0.5], [0.5, 0.5])
}

fn sent(params: BenchmarkParams) -> Result<BenchmarkProblem> {
    let w = 4.0 * params.material.length_scale * params.mesh.band_scale;
    let band = RefinementBand::new([0.5 - w, 1.0], [0.5 - w, 0.5 + w], params.mesh.band_h);
    let mesh = notched_square(&params, band)?;
    Ok(BenchmarkProblem {
        name: Benchmark::Sent.name().into(),
        mesh,
        bcs: vec![
            BoundaryCondition::Fixed { set: "bottom".into() },
            BoundaryCondition::FixedComponent {
                set: "top".into(),
                axis: 0,
            },
            BoundaryCondition::Prescribed {
                set: "top".into(),
                axis: 1,
                factor: 1.0,
            },
        ],
        load: LoadOutput::Set {
            set: "top".into(),
            axis: 1,
            sign: 1.0,
        },
        notes: vec![
            "top edge: horizontal displacement fixed".into(),
            format!("refinement band y = 0.5 +/- {w} right of x = {}", 0.5 - w),
        ],
        params,
    })
}

fn sens(params: BenchmarkParams) -> Result<BenchmarkProblem> {
    let w = 4.0 * params.material.length_scale * params.mesh.band_scale;
    // bounding box of the diagonal crack path towards the lower right corner
    let band = RefinementBand::new([0.5 - w, 1.0], [0.0, 0.5 + w], params.mesh.band_h);
    let mesh = notched_square(&params, band)?;
    Ok(BenchmarkProblem {
        name: Benchmark::Sens.name().into(),
        mesh,
        bcs: vec![
            BoundaryCondition::FixedComponent {
                set: "left".into(),
                axis: 1,
            },
            BoundaryCondition::FixedComponent {
                set: "right".into(),
                axis: 1,
            },
            BoundaryCondition::Fixed { set: "bottom".into() },
            BoundaryCondition::FixedComponent {
                set: "top".into(),
                axis: 1,
            },
            BoundaryCondition::Prescribed {
                set: "top".into(),
                axis: 0,
                factor: 1.0,
            },
        ],
        load: LoadOutput::Set {
            set: "top".into(),
            axis: 0,
            sign: 1.0,
        },
        notes: vec![
            "refinement band: axis-aligned box enclosing the expected diagonal crack path".into(),
            "top edge: vertical displacement fixed".into(),
        ],
        params,
    })
}

pub const HOLE_CENTER: [f64; 2] = [36.5, 51.0];
pub const PIN_LOWER: [f64; 2] = [20.0, 20.0];
pub const PIN_UPPER: [f64; 2] = [20.0, 100.0];
pub const PIN_RADIUS: f64 = 5.0;

fn notched_hole(params: BenchmarkParams) -> Result<BenchmarkProblem> {
    let m = &params.mesh;
    let w = 4.0 * params.material.length_scale * m.band_scale;
    // notch tip (10, 65) down to the upper left of the hole, then from the
    // right of the hole to the right edge
    let bands = [
        RefinementBand::new([10.0 - w, 29.0 + w], [56.0 - w, 65.0 + w], m.band_h),
        RefinementBand::new([44.0 - w, 65.0], [45.0 - w, 57.0 + w], m.band_h),
    ];
    let mesh = RectMeshBuilder::new(65.0, 120.0, m.coarse_h)
        .bands(bands)
        .x_break(10.0)
        .y_break(65.0)
        .hole(CircularHole::new("hole", HOLE_CENTER, 10.0))
        .hole(CircularHole::new("pin_lower", PIN_LOWER, PIN_RADIUS))
        .hole(CircularHole::new("pin_upper", PIN_UPPER, PIN_RADIUS))
        .build()?;
    let mesh = cut_notch(&mesh, [0.0, 65.0], [10.0, 65.0])?;
    Ok(BenchmarkProblem {
        name: Benchmark::NotchedHole.name().into(),
        mesh,
        bcs: vec![
            BoundaryCondition::RigidPin {
                set: "pin_lower".into(),
                center: PIN_LOWER,
                drive: PinDrive::Fixed,
            },
            BoundaryCondition::RigidPin {
                set: "pin_upper".into(),
                center: PIN_UPPER,
                drive: PinDrive::Driven { axis: 1, factor: 1.0 },
            },
        ],
        load: LoadOutput::Pin {
            pin: 1,
            axis: 1,
            sign: 1.0,
        },
        notes: vec![
            format!("pin centres {PIN_LOWER:?} and {PIN_UPPER:?}, radius {PIN_RADIUS} mm, read from the schematic"),
            "upper pin: horizontal translation fixed, rotation free".into(),
        ],
        params,
    })
}

fn tpb(params: BenchmarkParams) -> Result<BenchmarkProblem> {
    let m = &params.mesh;
    let w = 4.0 * params.material.length_scale * m.band_scale;
    let band = RefinementBand::new([225.0 - w, 225.0 + w], [40.0, 100.0], m.band_h);
    let mut mesh = RectMeshBuilder::new(450.0, 100.0, m.coarse_h)
        .band(band)
        .cutout([222.5, 0.0], [227.5, 50.0])
        .x_break(220.0)
        .x_break(230.0)
        .build()?;
    let left = mesh.nearest_node([0.0, 0.0]);
    let right = mesh.nearest_node([450.0, 0.0]);
    mesh.node_sets.insert("support_left".into(), vec![left]);
    mesh.node_sets.insert("support_right".into(), vec![right]);
    mesh.add_node_set_where("load", |p| (p[1] - 100.0).abs() < 1e-9 && (p[0] - 225.0).abs() <= 5.0 + 1e-9);
    Ok(BenchmarkProblem {
        name: Benchmark::Tpb.name().into(),
        mesh,
        bcs: vec![
            BoundaryCondition::Fixed {
                set: "support_left".into(),
            },
            BoundaryCondition::FixedComponent {
                set: "support_right".into(),
                axis: 1,
            },
            BoundaryCondition::Prescribed {
                set: "load".into(),
                axis: 1,
                factor: -1.0,
            },
        ],
        load: LoadOutput::Set {
            set: "load".into(),
            axis: 1,
            sign: -1.0,
        },
        notes: vec![
            "supports are single nodes at the bottom corners".into(),
            "load applied on top nodes with |x - 225| <= 5 mm".into(),
        ],
        params,
    })
}

/// Re-entrant corner of the L-panel.
pub const LPANEL_CORNER: [f64; 2] = [250.0, 250.0];

fn lpanel(params: BenchmarkParams) -> Result<BenchmarkProblem> {
    let m = &params.mesh;
    let s = m.band_scale;
    let band = RefinementBand::new(
        [250.0 - 150.0 * s, 250.0 + 10.0 * s],
        [250.0 - 10.0 * s, 250.0 + 80.0 * s],
        m.band_h,
    );
    let mut mesh = RectMeshBuilder::new(500.0, 500.0, m.coarse_h)
        .band(band)
        .cutout([250.0, 0.0], [500.0, 250.0])
        .x_break(470.0)
        .build()?;
    mesh.add_node_set_where("load", |p| (p[1] - 250.0).abs() < 1e-9 && p[0] >= 470.0 - 1e-9);
    Ok(BenchmarkProblem {
        name: Benchmark::Lpanel.name().into(),
        mesh,
        bcs: vec![
            BoundaryCondition::Fixed { set: "bottom".into() },
            BoundaryCondition::Prescribed {
                set: "load".into(),
                axis: 1,
                factor: 1.0,
            },
        ],
        load: LoadOutput::Set {
            set: "load".into(),
            axis: 1,
            sign: 1.0,
        },
        notes: vec!["load applied on the 30 mm segment at the free end of the short edge".into()],
        params,
    })
}

/// One unit-square element under uniaxial strain `ε_yy = u_applied`, with
/// `u_x = 0` everywhere. Returns the problem and the strain at which
/// `Ψ⁺ = G_c / (2l)`.
pub fn homogeneous_element(material: MaterialParams) -> Result<(BenchmarkProblem, f64)> {
    material.validate()?;
    let lame = material.lame()?;
    let e_star = (material.gc / (2.0 * material.length_scale) / (0.5 * lame.lambda + lame.mu)).sqrt();
    let mut mesh = RectMeshBuilder::new(1.0, 1.0, 1.0).build()?;
    mesh.add_node_set_where("all", |_| true);
    let params = BenchmarkParams {
        material,
        mesh: MeshParams {
            band_h: 1.0,
            coarse_h: 1.0,
            band_scale: 1.0,
        },
        schedule: StepSchedule::new([(1, e_star)])?,
    };
    Ok((
        BenchmarkProblem {
            name: "homogeneous".into(),
            mesh,
            bcs: vec![
                BoundaryCondition::FixedComponent {
                    set: "all".into(),
                    axis: 0,
                },
                BoundaryCondition::FixedComponent {
                    set: "bottom".into(),
                    axis: 1,
                },
                BoundaryCondition::Prescribed {
                    set: "top".into(),
                    axis: 1,
                    factor: 1.0,
                },
            ],
            load: LoadOutput::Set {
                set: "top".into(),
                axis: 1,
                sign: 1.0,
            },
            notes: Vec::new(),
            params,
        },
        e_star,
    ))
}
