//! Reproducible experiment drivers: CHSH runs (quantum and noncontextual
//! baseline), Kochen–Specker colorability, and the two-level walkthrough.

mod chsh;
mod kochen_specker;
mod pauli;

pub use chsh::{
    chsh_exact_correlation, chsh_run, classical_chsh_baseline, ChshConfig, ChshReport,
    ClassicalChshReport, SettingReport,
};
pub use kochen_specker::{ks_check, KsInstance, KsVerdict};
pub use pauli::{pauli_walkthrough, CheckRow, PauliReport};
