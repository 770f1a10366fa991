//! Multi-soliton solutions of the focusing cubic NLS equation
//! `i q_t + q_xx + 2|q|²q = 0`: Zakharov–Shabat dressing, closed forms,
//! split-step evolution, direct scattering and orbital-stability experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dressing;
pub mod error;
pub mod evolve;
pub mod field;
pub mod forms;
pub mod io;
pub mod lax;
pub mod linalg;
pub mod par;
pub mod scattering;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
pub use evolve::{evolve, l2_norm, weighted_norm, EvolveConfig, Scheme, Trajectory};
pub use field::{ComplexField, Grid};
pub use scattering::{scatter, ScatteringData, SearchRegion};
pub use stability::{run_experiment, ExperimentConfig, StabilityReport};
pub use lax::{GramianSystem, Mat2, SpectralPoint, ZsVector};
pub use forms::{n_soliton, one_soliton, two_soliton, SolitonParams};
