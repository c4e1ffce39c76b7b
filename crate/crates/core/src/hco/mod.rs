//! Hidden causal order models: possibilistic extensions of a single switch,
//! the three-switch contradiction replay, brute-force deterministic oracles
//! and random probabilistic models.

pub mod bruteforce;
pub mod contradiction;
pub mod extension;
pub mod random;

pub use bruteforce::{
    bruteforce_bc_bound, bruteforce_parity_models, bruteforce_parity_models_with, BcBruteForce,
    DeterministicChainModel, DeterministicJointModel, ParityBruteForce,
};
pub use contradiction::{
    replay_possibilistic_contradiction, replay_with_targets, CertificateCondition, CertificateVerdict, ProofCertificate,
};
pub use extension::{check_forced_determinism, enumerate_single_switch_extensions, ExtensionSearch, HcoExtension};
pub use random::{random_probabilistic_hco, ChainHcoModel, MerminHcoModel, ModelFamily, RandomHcoSpec};
