//! Linear-Gaussian Bayesian networks for Likert-scale questionnaires.
//!
//! The pipeline runs from raw survey exports ([`ingest`]) through score-based
//! structure learning with bootstrap averaging ([`structure`]), parameter
//! fitting ([`params`]), network analytics ([`analytics`], [`influence`]) and
//! comparisons against published results ([`compare`]).

pub mod analytics;
pub mod compare;
pub mod dag;
pub mod error;
pub mod influence;
pub mod ingest;
pub mod par;
pub mod params;
pub mod score;
pub mod structure;

pub use analytics::{CentralityKind, CentralityVector, Partition};
pub use dag::Dag;
pub use error::{Error, Result};
pub use ingest::ResponseTable;
pub use par::Execution;
pub use params::{GaussianBnParams, Model};
pub use score::{ScoreKind, SufficientStats};
pub use structure::{ArcStrengthTable, SearchConfig};
