//! Maintenance of discrete Bayesian-network knowledge bases.
//!
//! Structural edits (new outcomes, split outcomes, new variables and arcs,
//! removals, table replacement) are applied as pure transactions. Three
//! edit modes reuse the probabilities already in the knowledge base instead
//! of re-eliciting them, and [`cost`] / [`audit`] quantify how many
//! assessments each edit saves.

pub mod audit;
pub mod cli;
pub mod cost;
pub mod diff;
pub mod format;
pub mod maintenance;
pub mod network;
pub mod oracle;

pub use audit::{audit_transaction, AssessmentReport, NodeAssessment};
pub use cost::{assessment_cost, ratio_curves, Case, CostQuery, CostResult, Role};
pub use format::{network_from_json, network_to_json};
pub use maintenance::{apply_op, apply_script, EditError, EditOp, Mode, Transaction};
pub use network::{validate_network, Network, ParentConfig, Variable};
