//! Simulation and verification of quantum switch correlations: exact
//! density-matrix simulation, discrete distribution tables, hidden causal
//! order models, and the causal Mermin and chained inequalities.

pub mod channel;
pub mod dist;
mod error;
pub mod hco;
pub mod inequality;
pub mod linalg;
pub mod report;
pub mod scenario;
pub mod suite;

pub use channel::{ControlBasis, CpMap, Instrument};
pub use dist::{Event, PossTable, ProbTable, Table, VarSpec, DEFAULT_EPS};
pub use error::{Error, Result};
pub use hco::{CertificateVerdict, ProofCertificate};
pub use inequality::{ChainReport, MerminReport, Verdict};
pub use linalg::{Matrix, SystemLayout, C64};
pub use scenario::{ChainedScenarioConfig, GhzScenarioConfig, ScenarioData};
pub use suite::{selfcheck, SuiteResult};
