//! Rooted trees, B-series and pseudo-energy-preserving Runge-Kutta methods.
//!
//! The crate is organised bottom-up:
//!
//! * [`trees`]: enumeration, symmetry/density and energy-preserving conjugates
//! * [`bseries`]: elementary weights, modified equations, PEP conditions
//! * [`methods`]: Butcher tableaus, the built-in registry, tableau files
//! * [`integrate`]: fixed-step integration of Hamiltonian test problems
//! * [`bbm`]: pseudospectral BBM semidiscretization
//! * [`search`]: multistart least-squares search for new tableaus

pub mod bbm;
pub mod bseries;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod methods;
pub mod poly;
pub mod scalar;
pub mod search;
pub mod trees;

pub use bseries::{
    classical_order, conditions_on_weights, derive_conditions, elementary_weights, ep_flow_defect,
    exact_flow_weights, map_from_flow, modified_equation, pep_order, CoefficientSeries, Condition,
    ConditionTarget, Defect, SeriesKind, Tolerances,
};
pub use error::{Error, Result};
pub use methods::{validate, ButcherTableau, Tableau, ValidationReport};
pub use scalar::{Rational, Scalar};
pub use trees::{Forest, LeafRef, RootedTree};
