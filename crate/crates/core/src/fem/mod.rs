//! Finite-element discretisation of the slack-variable phase-field system.

pub mod assembly;
pub mod check;
pub mod dofs;
pub mod element;
pub mod kkt;
pub mod shape;
pub mod sparse;

pub use assembly::{AssembledSystem, AssemblyOptions, FeProblem, FICTITIOUS_FACTOR};
pub use check::{near_split_kink, tangent_fd_check, TangentCheck};
pub use dofs::{DofKind, DofMap, Field, Formulation, SystemState};
pub use element::{
    element_bulk, element_residual_phi, element_residual_u, nodal_lmm, nodal_penalty, BulkMaterial, ElementState, ElementSystem,
    NodalSystem,
};
pub use kkt::{kkt_report, KktReport, KktTolerance};
pub use shape::ElementKind;
pub use sparse::CsrMatrix;
