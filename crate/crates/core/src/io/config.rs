//! Run configuration files.
//!
//! TOML with four tables: `[run]` selects the problem and the outputs,
//! `[material]` and `[mesh]` override single benchmark parameters and
//! `[solver]` sets Newton and stepping controls.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::benchmarks::{band_ratio, build_with, default_params, Benchmark, BenchmarkParams, BenchmarkProblem, COARSE_RATIO};
use crate::error::{Error, Result};
use crate::material::{ModelKind, PlaneCondition, Softening};
use crate::mesh::load_mesh;
use crate::solver::{SolverConfig, StepSchedule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub benchmark: Benchmark,
    /// Replaces the generated mesh; the file must carry the benchmark's named sets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Write a field snapshot every this many steps; 0 keeps only the final one.
    pub snapshot_every: usize,
    /// Reference load-displacement curves listed in the metadata for overlay plots.
    pub reference_curves: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<StepSchedule>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            benchmark: Benchmark::Sent,
            mesh_file: None,
            output_dir: PathBuf::from("out"),
            snapshot_every: 10,
            reference_curves: Vec::new(),
            schedule: None,
        }
    }
}

/// Single-value overrides of the benchmark material.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
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
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane: Option<PlaneCondition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thickness: Option<f64>,
}

/// Mesh sizing overrides. When `length_scale` is overridden and `band_h` is
/// not, the band size follows the benchmark's `h/l` ratio and the far field
/// stays `COARSE_RATIO` times coarser.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarse_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_scale: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub material: MaterialOverrides,
    pub mesh: MeshOverrides,
    pub solver: SolverConfig,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

/// Parses and validates a configuration held in memory; `path` is only used in messages.
pub fn parse_config_str(text: &str, path: &Path) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().trim().to_string();
        match e.span() {
            Some(span) => {
                let (line, column) = line_col(text, span.start);
                Error::Config {
                    path: path.to_path_buf(),
                    message: format!("line {line}, column {column}: {message}"),
                }
            }
            None => Error::Config {
                path: path.to_path_buf(),
                message,
            },
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}

pub fn write_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("run configuration serialises")
}

impl RunConfig {
    pub fn for_benchmark(benchmark: Benchmark) -> Self {
        Self {
            run: RunSection {
                benchmark,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    /// Benchmark parameters with every override applied.
    pub fn params(&self) -> Result<BenchmarkParams> {
        let b = self.run.benchmark;
        let mut p = default_params(b);
        let o = &self.material;
        let m = &mut p.material;
        if let Some(v) = o.model {
            m.model = v;
        }
        if o.softening.is_some() {
            m.softening = o.softening;
        }
        // Lamé and engineering constants are alternatives: setting one pair
        // drops the other
        if o.lambda.is_some() || o.mu.is_some() {
            m.lambda = o.lambda.or(m.lambda);
            m.mu = o.mu.or(m.mu);
            if o.e0.is_none() && o.nu.is_none() {
                m.e0 = None;
                m.nu = None;
            }
        }
        if o.e0.is_some() || o.nu.is_some() {
            m.e0 = o.e0.or(m.e0);
            m.nu = o.nu.or(m.nu);
            if o.lambda.is_none() && o.mu.is_none() {
                m.lambda = None;
                m.mu = None;
            }
        }
        if o.ft.is_some() {
            m.ft = o.ft;
        }
        if let Some(v) = o.gc {
            m.gc = v;
        }
        if let Some(v) = o.plane {
            m.plane = v;
        }
        if let Some(v) = o.thickness {
            m.thickness = v;
        }
        if let Some(l) = o.length_scale {
            m.length_scale = l;
            p.mesh.band_h = band_ratio(b) * l;
            p.mesh.coarse_h = COARSE_RATIO * p.mesh.band_h;
        }
        if let Some(h) = self.mesh.band_h {
            p.mesh.band_h = h;
            p.mesh.coarse_h = COARSE_RATIO * h;
        }
        if let Some(h) = self.mesh.coarse_h {
            p.mesh.coarse_h = h;
        }
        if let Some(s) = self.mesh.band_scale {
            p.mesh.band_scale = s;
        }
        if let Some(s) = &self.run.schedule {
            p.schedule = s.clone();
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.material.length_scale.is_none_or(|l| l > 0.0 && l.is_finite())) {
            return Err(Error::param("length_scale", "must be positive"));
        }
        self.params()?.validate()?;
        self.solver.validate()
    }

    /// The benchmark problem this configuration describes.
    pub fn problem(&self) -> Result<BenchmarkProblem> {
        let problem = build_with(self.run.benchmark, self.params()?)?;
        match &self.run.mesh_file {
            Some(path) => Ok(problem.with_mesh(load_mesh(path)?)),
            None => Ok(problem),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Formulation;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config_str(text, Path::new("test.toml"))
    }

    #[test]
    fn minimal_config_gets_table_defaults() {
        let cfg = parse("[run]\nbenchmark = \"sent\"\n[solver]\nformulation = \"lmm\"\n").unwrap();
        assert_eq!(cfg.solver.formulation, Formulation::Lmm);
        assert_eq!(cfg.params().unwrap(), default_params(Benchmark::Sent));
        assert_eq!(cfg.solver.eta, 1e6);
    }

    #[test]
    fn eta_override() {
        let cfg = parse("[run]\nbenchmark = \"sent\"\n[solver]\neta = 1e3\n").unwrap();
        assert_eq!(cfg.solver.eta, 1e3);
    }

    #[test]
    fn negative_length_scale_names_field() {
        let e = parse("[run]\nbenchmark = \"tpb\"\n[material]\nlength_scale = -1.0\n").unwrap_err();
        assert!(e.to_string().contains("length_scale"), "{e}");
    }

    #[test]
    fn unknown_key_reports_location() {
        let e = parse("[run]\nbenchmark = \"sent\"\n\n[solver]\nfoo = 1\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 5"), "{msg}");
        assert!(msg.contains("foo"), "{msg}");
    }

    #[test]
    fn syntax_error_reports_location() {
        let e = parse("[run]\nbenchmark = sent\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(parse(&write_config(&cfg)).unwrap(), cfg);
        let mut cfg = RunConfig::for_benchmark(Benchmark::Lpanel);
        cfg.material.length_scale = Some(10.0);
        cfg.run.schedule = Some("20*2e-2".parse().unwrap());
        cfg.solver.max_steps = Some(3);
        assert_eq!(parse(&write_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn length_scale_override_rescales_mesh() {
        let mut cfg = RunConfig::for_benchmark(Benchmark::Sent);
        cfg.material.length_scale = Some(0.03);
        let p = cfg.params().unwrap();
        assert_eq!(p.mesh.band_h, 0.015);
        assert!((p.mesh.coarse_h - 0.15).abs() < 1e-15);
        cfg.mesh.band_h = Some(0.02);
        assert_eq!(cfg.params().unwrap().mesh.band_h, 0.02);
    }

    #[test]
    fn engineering_constants_replace_lame() {
        let mut cfg = RunConfig::for_benchmark(Benchmark::Sent);
        cfg.material.e0 = Some(210e3);
        cfg.material.nu = Some(0.3);
        let m = cfg.params().unwrap().material;
        assert_eq!((m.lambda, m.mu), (None, None));
        assert!(m.lame().is_ok());
    }
}
