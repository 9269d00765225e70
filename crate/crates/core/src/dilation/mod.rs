//! Hermitian dilation of diagonal non-Hermitian Hamiltonians.
//!
//! A system state `ψ` evolving under `H_s` is paired with a dump state `ηψ`
//! on a second ancilla pointer. The metric `M = η†η + 𝕀` absorbs the norm
//! change, so the full state evolves unitarily under a Hermitian block
//! Hamiltonian, and `ψ` is recovered by post-selecting the first pointer.

mod blocks;
mod impossibility;
mod metric;
mod pipeline;
mod state;

pub use blocks::{
    assemble_4dim, assemble_8dim, assemble_general, compute_ab, compute_ab_general,
    BlockHamiltonian,
};
pub use impossibility::{demonstrate_4dim_impossibility, ImpossibilityReport};
pub use metric::{
    propagate_m, propagate_m_stepped, DilationFrame, MetricFrame, MetricTrack, UnitaryChoice,
    DEFAULT_M0, MIN_M0,
};
pub use pipeline::{evolve_full, DilatedSource, Dilation, FullRun, FullSample};
pub use state::{project_measurement, project_postselect, FullState};
