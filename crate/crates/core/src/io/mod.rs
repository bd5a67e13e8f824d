//! Configuration files, result tables, field snapshots and run orchestration.

pub mod config;
pub mod csv;
pub mod run;
pub mod vtk;

pub use config::{parse_config, parse_config_str, write_config, MaterialOverrides, MeshOverrides, RunConfig, RunSection};
pub use csv::{kkt_csv, ld_csv, read_ld_csv, write_kkt_csv, write_ld_csv, KKT_HEADER, LD_HEADER};
pub use run::{execute, snapshot_name, Checkpoint, RunSummary, CHECKPOINT_FILE, KKT_FILE, LD_FILE, METADATA_FILE};
pub use vtk::{fields_vtk, mesh_vtk, write_fields};
