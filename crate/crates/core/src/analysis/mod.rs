//! Integration with invariant monitoring, equilibria and their stability.

pub mod checks;
pub mod equilibria;
pub mod integrate;
pub mod structure;

pub use checks::{
    check_degenerate_invariance, check_invariant_leaf, check_regular_equivalence, CheckError, DegenerateExample,
    DegenerateReport, LeafReport, RegularEquivalenceReport,
};
pub use equilibria::{
    default_seeds, find_equilibria, EquilibriumKind, EquilibriumOptions, EquilibriumReport, EquilibriumSearch,
    Stability,
};
pub use integrate::{integrate, IntegrationError, IntegratorConfig, Method, TrajectoryRecord, TrajectorySummary};
pub use structure::{closed_form_check, structural_suite, CheckResult, StructuralReport, SuiteOptions};
