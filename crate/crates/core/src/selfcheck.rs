//! Quick oracle and invariant suite behind the `check` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::benchmarks::{default_params, homogeneous_element, Benchmark, MaterialParams};
use crate::error::Result;
use crate::fem::{
    near_split_kink, tangent_fd_check, AssemblyOptions, BulkMaterial, DofMap, FeProblem, Formulation, KktReport, SystemState,
};
use crate::material::{compute_a1, PhaseFieldModel, QuasiBrittle, Softening};
use crate::mesh::generate_rect_mesh;
use crate::solver::{error_norm, run_simulation, FieldUpdate, Outcome, SolverConfig, StepSchedule};
use crate::tensor::{psi_split, spectral_split, stress_split, LameParams, Tensor2s};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn from(name: impl Into<String>, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((ok, d)) => Self::new(name, ok, d),
            Err(e) => Self::new(name, false, e.to_string()),
        }
    }
}

fn sent_material() -> MaterialParams {
    default_params(Benchmark::Sent).material
}

/// Uniform strain at `Ψ⁺ = G_c/(2l)` on one element: AT2 gives `φ = 1/2`.
pub fn homogeneous_phase(f: Formulation) -> Result<f64> {
    let (prob, e) = homogeneous_element(sent_material())?;
    let lp = prob.discretize(f)?;
    let cfg = SolverConfig {
        formulation: f,
        tol: 1e-10,
        ..Default::default()
    };
    let res = run_simulation(&lp, &StepSchedule::new([(1, e)])?, &cfg)?;
    if let Outcome::Failed(e) = res.outcome {
        return Err(e);
    }
    Ok((0..4).map(|a| (res.state.phi(&lp.fe.dofs, a) - 0.5).abs()).fold(0.0, f64::max))
}

/// Loads the single element to `φ ≈ 1/2` and unloads to zero strain in ten
/// steps. Returns the largest nodal decrease of `φ` below its peak and the
/// KKT report of every step.
pub fn unload_history(f: Formulation, cfg: &SolverConfig) -> Result<(f64, Vec<KktReport>)> {
    let (prob, e) = homogeneous_element(sent_material())?;
    let lp = prob.discretize(f)?;
    let cfg = SolverConfig {
        formulation: f,
        ..cfg.clone()
    };
    let sched = StepSchedule::new([(1, e), (10, -e / 10.0)])?;
    let mut peak = [0.0f64; 4];
    let mut drop = 0.0f64;
    let mut obs = |p: &crate::solver::LoadedProblem, s: &SystemState, _: &crate::solver::StepRecord, _: &KktReport| {
        for (a, m) in peak.iter_mut().enumerate() {
            let phi = s.phi(&p.fe.dofs, a);
            drop = drop.max(*m - phi);
            *m = m.max(phi);
        }
        Ok(())
    };
    let res = crate::solver::run_simulation_from(&lp, &sched, &cfg, None, &mut obs)?;
    if let Outcome::Failed(e) = res.outcome {
        return Err(e);
    }
    Ok((drop, res.kkt))
}

/// KKT thresholds for a converged step. LMM: `h ≥ −1e-6`, `|Λθ|` and `|Λh|`
/// relative to `S_Λ`. Penalty: only the sign of the effective multiplier,
/// since `h` itself is violated by `O(1/η)` by construction.
pub fn kkt_ok(f: Formulation, k: &KktReport, cfg: &SolverConfig, scale: f64) -> bool {
    match f {
        Formulation::Lmm => k.primal >= -1e-6 && k.lambda_theta <= 1e-6 * scale && k.complementarity <= 1e-5 * scale,
        Formulation::Penalty => k.dual >= -1e-3 * cfg.eta * cfg.tol,
    }
}

fn random_strain(rng: &mut ChaCha8Rng) -> Tensor2s<f64> {
    Tensor2s::new(rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3))
}

/// Largest violation of `ε⁺ + ε⁻ = ε` and `ε⁺ : ε⁻ = 0`, relative to `|ε|`.
pub fn split_identities(samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let e = random_strain(&mut rng);
        let s = spectral_split(&e);
        let n = e.norm().max(f64::MIN_POSITIVE);
        worst = worst
            .max((s.eps_plus + s.eps_minus - e).max_abs() / n)
            .max(s.eps_plus.ddot(&s.eps_minus).abs() / (n * n));
    }
    worst
}

/// Largest relative difference between `σ±` and central differences of `Ψ±`.
pub fn stress_energy_consistency(lame: &LameParams<f64>, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let e = random_strain(&mut rng);
        let (sp, sm) = stress_split(&e, lame);
        let d = 1e-6 * e.norm();
        let scale = lame.stress(&e).norm();
        for (k, dir) in [
            Tensor2s::new(1.0, 0.0, 0.0),
            Tensor2s::new(0.0, 1.0, 0.0),
            Tensor2s::new(0.0, 0.0, 0.5),
        ]
        .into_iter()
        .enumerate()
        {
            let (pp, mp) = psi_split(&(e + dir * d), lame);
            let (pm, mm) = psi_split(&(e - dir * d), lame);
            let fd = [(pp - pm) / (2.0 * d), (mp - mm) / (2.0 * d)];
            // dir has unit weight on σ_xy through both off-diagonal slots
            let an = |s: &Tensor2s<f64>| [s.xx, s.yy, s.xy][k];
            worst = worst.max((fd[0] - an(&sp)).abs() / scale).max((fd[1] - an(&sm)).abs() / scale);
        }
    }
    worst
}

/// Random states on a 2×2-element patch; returns the worst relative tangent
/// mismatch and how many samples were skipped at split kinks.
pub fn patch_tangent(
    model: PhaseFieldModel<f64>,
    lame: LameParams<f64>,
    f: Formulation,
    samples: usize,
    seed: u64,
) -> Result<(f64, usize)> {
    let (gc, l) = (2.7, 0.5);
    let mesh = generate_rect_mesh(2.0, 2.0, 1.0, &[])?;
    let dofs = DofMap::new(mesh.node_count(), f, 0);
    let p = FeProblem::new(
        mesh,
        dofs,
        BulkMaterial {
            model,
            lame,
            gc,
            length_scale: l,
        },
    )?;
    let opts = AssemblyOptions::new(1e6, gc, l);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut skipped) = (0.0f64, 0);
    for _ in 0..samples {
        let mut s = SystemState::new(&p.dofs);
        for a in 0..p.dofs.n_nodes() {
            for c in 0..2 {
                s.values[p.dofs.u(a, c)] = rng.gen_range(-1e-3..1e-3);
            }
            let phi = rng.gen_range(0.0..0.8);
            s.values[p.dofs.phi(a)] = phi;
            s.phi_prev[a] = phi * rng.gen_range(0.0..1.0);
            s.values[p.dofs.theta(a)] = rng.gen_range(-0.5..0.5);
            if let Some(g) = p.dofs.lambda(a) {
                s.values[g] = rng.gen_range(0.0..2.0 * gc / l);
            }
        }
        if near_split_kink(&p, &s, 1e-8) {
            skipped += 1;
            continue;
        }
        let r = tangent_fd_check(&p, &s, &opts, [1e-9, 1e-7, 1e-7, 1e-5])?;
        worst = worst.max(r.relative());
    }
    Ok((worst, skipped))
}

/// The quick suite: every oracle at its tolerance with reduced sample counts.
pub fn run_all() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for f in [Formulation::Lmm, Formulation::Penalty] {
        out.push(CheckResult::from(
            format!("homogeneous phase field ({f})"),
            homogeneous_phase(f).map(|d| (d <= 1e-6, format!("|phi - 0.5| = {d:.2e}"))),
        ));
        let cfg = SolverConfig::default();
        let m = sent_material();
        let scale = cfg.lambda_scale(m.gc, m.length_scale);
        out.push(CheckResult::from(
            format!("irreversibility and KKT under unloading ({f})"),
            unload_history(f, &cfg).map(|(drop, kkt)| {
                let kkt_pass = kkt.iter().all(|k| kkt_ok(f, k, &cfg, scale));
                (
                    drop <= 10.0 * cfg.tol && kkt_pass,
                    format!("max phi decrease {drop:.2e}, KKT {}", if kkt_pass { "ok" } else { "violated" }),
                )
            }),
        ));
    }
    let d = split_identities(1000, 1);
    out.push(CheckResult::new("spectral split identities", d <= 1e-12, format!("worst {d:.2e}")));
    let lame = LameParams::new(121.154e3, 80.769e3).expect("valid constants");
    let d = stress_energy_consistency(&lame, 1000, 2);
    out.push(CheckResult::new(
        "stress equals energy gradient",
        d <= 1e-6,
        format!("worst {d:.2e}"),
    ));
    let qb = PhaseFieldModel::QuasiBrittle(QuasiBrittle::new(Softening::Cornelissen, 199.83));
    for (name, model) in [("AT2", PhaseFieldModel::BrittleAt2), ("quasi-brittle", qb)] {
        for f in [Formulation::Lmm, Formulation::Penalty] {
            out.push(CheckResult::from(
                format!("tangent against finite differences ({name}, {f})"),
                patch_tangent(model, lame, f, 5, 3).map(|(w, s)| (w <= 1e-5, format!("worst {w:.2e}, {s} skipped"))),
            ));
        }
    }
    for (b, want) in [(Benchmark::Tpb, 199.83), (Benchmark::Lpanel, 105.93)] {
        out.push(CheckResult::from(
            format!("a1 for {b}"),
            default_params(b)
                .material
                .fracture()
                .and_then(|p| compute_a1(&p))
                .map(|a1| ((a1 - want).abs() <= 0.05, format!("{a1:.3}"))),
        ));
    }
    let err = error_norm(&[FieldUpdate {
        update: &[1e-5],
        solution: &[0.5],
        scale: 1.0,
    }]);
    out.push(CheckResult::new(
        "error norm single DOF",
        (err - 1e-5).abs() < 1e-18,
        format!("{err:e}"),
    ));
    out
}
