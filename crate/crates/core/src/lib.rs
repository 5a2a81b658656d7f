//! Exact simulation of a postselected quantum test for group non-membership
//! when the subgroup order is part of the input, together with the counting
//! certificate `G(w) / F(w)` that places the problem in AWPP.
//!
//! Pipeline: [`group`] oracles and closure → [`walk`] exact branch counts →
//! [`analytics`] closed-form probabilities (cross-checked by
//! [`statevector`]) → [`certificate`] decision.

pub mod analytics;
pub mod certificate;
pub mod cli;
pub mod dyadic;
pub mod exact;
pub mod group;
pub mod statevector;
pub mod walk;

pub use analytics::{outcome_report, ProbabilityReport};
pub use certificate::{build_certificate, extract_gap_numerator, Certificate, Decision};
pub use dyadic::Dyadic;
pub use group::{ConcreteGroup, ElementCode, GroupOracle, ProblemInstance};
pub use walk::{choose_steps, gamma_exact, GammaTable, WalkConfig};
