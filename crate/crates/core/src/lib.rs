//! Three-dimensional metriplectic systems `ẋ = P dH + g dS`.
//!
//! Given a Poisson tensor `P`, an energy `H` and a Casimir `S` of `P`, the
//! metric `g = ∇H ⊗ ∇H − I‖∇H‖²` turns the Hamiltonian flow into one that
//! still conserves `H` but strictly dissipates `S` away from rest states.
//!
//! * [`linalg3`]: vectors, matrices, rank and eigenvalues in R³
//! * [`fields`]: polynomial scalar fields and Poisson matrix fields
//! * [`metric`]: the dissipative metric and its identities
//! * [`dynamics`]: the combined vector field and pointwise diagnostics
//! * [`analysis`]: trajectory integration and equilibrium classification
//! * [`systems`]: the built-in example systems
//! * [`config`]: the flat `key = value` run configuration format

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod fields;
pub mod linalg3;
pub mod metric;
pub mod sampling;
pub mod systems;

pub use dynamics::{diagnose, rest_state, xi_field, DiagnosticSample, MetriplecticSystem};
pub use fields::{PoissonField, ScalarField};
pub use linalg3::{Mat3, Vec3};
pub use metric::{build_g, DissipativeMetric};
