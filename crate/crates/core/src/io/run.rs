//! A configured run: problem set-up, stepping, snapshots, checkpoints and
//! the output directory layout.
//!
//! ```text
//! out/
//!   metadata.json      solver and model choices, mesh statistics, outcome
//!   load_displacement.csv
//!   kkt.csv
//!   fields_00010.vtk   every `snapshot_every` steps and after the last step
//!   checkpoint.json    state to resume from
//! ```

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::RunConfig;
use super::csv::{write_kkt_csv, write_ld_csv};
use super::vtk::write_fields;
use crate::benchmarks::{BenchmarkParams, BenchmarkProblem};
use crate::error::{Error, Result};
use crate::fem::{AssemblyOptions, FeProblem, Formulation, KktReport, SystemState, FICTITIOUS_FACTOR};
use crate::solver::{run_simulation_from, LoadedProblem, Outcome, SolverConfig, StepObserver, StepRecord};

pub const METADATA_FILE: &str = "metadata.json";
pub const LD_FILE: &str = "load_displacement.csv";
pub const KKT_FILE: &str = "kkt.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

pub fn snapshot_name(step: usize) -> String {
    format!("fields_{step:05}.vtk")
}

/// Everything needed to continue a run after its last accepted step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub benchmark: String,
    pub formulation: Formulation,
    pub params: BenchmarkParams,
    /// Accepted state with `ⁿφ` already advanced.
    pub state: SystemState,
    pub records: Vec<StepRecord>,
    pub kkt: Vec<KktReport>,
}

impl Checkpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).expect("checkpoint serialises");
        // write then rename so an interrupted write keeps the previous checkpoint
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub records: Vec<StepRecord>,
    pub outcome: Outcome,
    /// Steps taken by this invocation.
    pub new_steps: usize,
}

impl RunSummary {
    pub fn peak_load(&self) -> f64 {
        self.records.iter().map(|r| r.load_kn).fold(0.0, f64::max)
    }
}

fn mesh_stats(fe: &FeProblem) -> serde_json::Value {
    let mesh = &fe.mesh;
    let sizes: Vec<f64> = (0..mesh.cell_count()).map(|c| mesh.max_edge(c)).collect();
    json!({
        "nodes": mesh.node_count(),
        "cells": mesh.cell_count(),
        "dofs": fe.dofs.total_dofs(),
        "free_dofs": fe.dofs.n_free(),
        "constrained_dofs": fe.dofs.constrained_count(),
        "pin_masters": fe.dofs.n_masters(),
        "min_element_size": sizes.iter().copied().fold(f64::INFINITY, f64::min),
        "max_element_size": sizes.iter().copied().fold(0.0, f64::max),
        "node_sets": mesh.node_sets.keys().collect::<Vec<_>>(),
    })
}

fn metadata(
    cfg: &RunConfig,
    problem: &BenchmarkProblem,
    loaded: &LoadedProblem,
    outcome: Option<(&Outcome, &[StepRecord], f64)>,
) -> serde_json::Value {
    let p = &problem.params;
    let s = &cfg.solver;
    let opts = AssemblyOptions::new(s.eta, p.material.gc, p.material.length_scale);
    let mut v = json!({
        "program": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "benchmark": problem.name,
        "formulation": s.formulation,
        "eta": s.eta,
        "fictitious_factor": FICTITIOUS_FACTOR,
        "kappa_theta": opts.kappa_theta,
        "kappa_lambda": opts.kappa_lambda,
        "scales": {
            "u": s.scale_u,
            "phi": s.scale_phi,
            "theta": s.scale_theta,
            "lambda": s.lambda_scale(p.material.gc, p.material.length_scale),
        },
        "tol": s.tol,
        "plane": p.material.plane,
        "model": p.material.model,
        "interpolation": "u and phi bilinear with full Gauss quadrature; theta and lambda nodal, constraint integrated with nodal quadrature",
        "params": p,
        "solver": s,
        "mesh_file": cfg.run.mesh_file,
        "mesh": mesh_stats(&loaded.fe),
        "reference_curves": cfg.run.reference_curves,
        "notes": problem.notes,
        "units": {"length": "mm", "force": "kN (reactions), N internally", "stress": "N/mm^2"},
    });
    if let Some((outcome, records, seconds)) = outcome {
        let (status, detail) = match outcome {
            Outcome::Completed => ("completed", String::new()),
            Outcome::Stopped(why) => ("stopped", why.clone()),
            Outcome::Failed(e) => ("failed", e.to_string()),
        };
        v["outcome"] = json!({
            "status": status,
            "detail": detail,
            "steps": records.len(),
            "last_u_mm": records.last().map(|r| r.u_mm),
            "peak_load_kN": records.iter().map(|r| r.load_kn).fold(0.0, f64::max),
            "wall_seconds": seconds,
        });
    }
    v
}

fn write_json(path: &Path, v: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).expect("json serialises");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

struct Recorder<'a> {
    dir: &'a Path,
    every: usize,
    benchmark: String,
    formulation: Formulation,
    params: BenchmarkParams,
    records: Vec<StepRecord>,
    kkt: Vec<KktReport>,
    /// Last accepted state before `ⁿφ` was advanced, and whether it was written.
    last: Option<(SystemState, bool)>,
}

impl Recorder<'_> {
    fn checkpoint(&self, state: &SystemState, dofs: &crate::fem::DofMap) -> Result<()> {
        let mut state = state.clone();
        state.commit_phase(dofs);
        Checkpoint {
            benchmark: self.benchmark.clone(),
            formulation: self.formulation,
            params: self.params.clone(),
            state,
            records: self.records.clone(),
            kkt: self.kkt.clone(),
        }
        .save(&self.dir.join(CHECKPOINT_FILE))?;
        write_ld_csv(&self.records, &self.dir.join(LD_FILE))
    }
}

impl StepObserver for Recorder<'_> {
    fn on_step(&mut self, problem: &LoadedProblem, state: &SystemState, record: &StepRecord, kkt: &KktReport) -> Result<()> {
        self.records.push(record.clone());
        self.kkt.push(*kkt);
        let due = self.every > 0 && record.step.is_multiple_of(self.every);
        if due {
            let fe = &problem.fe;
            write_fields(&fe.mesh, &fe.dofs, state, &self.dir.join(snapshot_name(record.step)))?;
            self.checkpoint(state, &fe.dofs)?;
        }
        self.last = Some((state.clone(), due));
        Ok(())
    }
}

/// Runs a configuration, writing every output under `cfg.run.output_dir`.
/// With `resume`, continues from the checkpoint found there.
pub fn execute(cfg: &RunConfig, resume: bool) -> Result<RunSummary> {
    cfg.validate()?;
    let problem = cfg.problem()?;
    let loaded = problem.discretize(cfg.solver.formulation)?;
    let dir = cfg.run.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for path in &cfg.run.reference_curves {
        std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    }
    let (start, records, kkt) = if resume {
        let cp = Checkpoint::load(&dir.join(CHECKPOINT_FILE))?;
        if cp.benchmark != problem.name || cp.formulation != cfg.solver.formulation || cp.params != problem.params {
            return Err(Error::Setup(format!(
                "checkpoint in {} was written for a different configuration",
                dir.display()
            )));
        }
        cp.state.check(&loaded.fe.dofs)?;
        info!("resuming after step {} (u = {:e} mm)", cp.state.step, cp.state.u_applied);
        (Some(cp.state), cp.records, cp.kkt)
    } else {
        (None, Vec::new(), Vec::new())
    };
    write_json(&dir.join(METADATA_FILE), &metadata(cfg, &problem, &loaded, None))?;

    let clock = Instant::now();
    let prior = records.len();
    let mut rec = Recorder {
        dir: &dir,
        every: cfg.run.snapshot_every,
        benchmark: problem.name.clone(),
        formulation: cfg.solver.formulation,
        params: problem.params.clone(),
        records,
        kkt,
        last: None,
    };
    let solver: &SolverConfig = &cfg.solver;
    let result = run_simulation_from(&loaded, &problem.params.schedule, solver, start, &mut rec)?;
    let fe = &loaded.fe;
    if let Some((state, written)) = rec.last.take() {
        if !written {
            write_fields(&fe.mesh, &fe.dofs, &state, &dir.join(snapshot_name(state.step)))?;
        }
        rec.checkpoint(&state, &fe.dofs)?;
    }
    write_ld_csv(&rec.records, &dir.join(LD_FILE))?;
    write_kkt_csv(&rec.records, &rec.kkt, &dir.join(KKT_FILE))?;
    let seconds = clock.elapsed().as_secs_f64();
    write_json(
        &dir.join(METADATA_FILE),
        &metadata(cfg, &problem, &loaded, Some((&result.outcome, &rec.records, seconds))),
    )?;
    let records = rec.records;
    Ok(RunSummary {
        output_dir: dir,
        new_steps: records.len() - prior,
        records,
        outcome: result.outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::Benchmark;

    fn tiny(dir: &Path) -> RunConfig {
        let mut cfg = RunConfig::for_benchmark(Benchmark::Sent);
        cfg.material.length_scale = Some(0.1);
        cfg.mesh.band_h = Some(0.1);
        cfg.mesh.coarse_h = Some(0.25);
        cfg.run.schedule = Some("4*1e-3".parse().unwrap());
        cfg.run.output_dir = dir.to_path_buf();
        cfg.run.snapshot_every = 2;
        cfg
    }

    #[test]
    fn writes_outputs_and_resumes() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(dir.path());
        cfg.solver.max_steps = Some(3);
        let first = execute(&cfg, false).unwrap();
        assert!(matches!(first.outcome, Outcome::Stopped(_)));
        assert_eq!(first.records.len(), 3);
        for f in [
            METADATA_FILE,
            LD_FILE,
            KKT_FILE,
            CHECKPOINT_FILE,
            &snapshot_name(2),
            &snapshot_name(3),
        ] {
            assert!(dir.path().join(f).exists(), "{f} missing");
        }
        let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(METADATA_FILE)).unwrap()).unwrap();
        assert_eq!(meta["formulation"], "lmm");
        assert_eq!(meta["outcome"]["steps"], 3);

        cfg.solver.max_steps = None;
        let second = execute(&cfg, true).unwrap();
        assert!(matches!(second.outcome, Outcome::Completed));
        assert_eq!(second.new_steps, 1);
        assert_eq!(second.records.len(), 4);

        // an uninterrupted run gives the same table
        let other = tempfile::tempdir().unwrap();
        let straight = execute(&tiny(other.path()), false).unwrap();
        assert_eq!(straight.records, second.records);
        assert_eq!(
            std::fs::read(other.path().join(LD_FILE)).unwrap(),
            std::fs::read(dir.path().join(LD_FILE)).unwrap()
        );
    }

    #[test]
    fn resume_rejects_other_configuration() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(dir.path());
        cfg.solver.max_steps = Some(1);
        execute(&cfg, false).unwrap();
        cfg.solver.formulation = Formulation::Penalty;
        assert!(matches!(execute(&cfg, true), Err(Error::Setup(_))));
    }

    #[test]
    fn missing_checkpoint_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(execute(&tiny(dir.path()), true), Err(Error::Io { .. })));
    }
}
