//! Replay of the possibilistic three-switch contradiction as a checkable
//! certificate.

use serde::Serialize;

use crate::error::Result;
use crate::hco::bruteforce::{bruteforce_parity_models_with, PARITY_TARGETS};
use crate::hco::extension::enumerate_single_switch_extensions;
use crate::scenario::{verify_switch_data_conditions, ScenarioData, SWITCH_WINGS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertificateVerdict {
    /// The data rule out every hidden causal order model.
    Infeasible,
    /// The preconditions hold but the parity system is satisfiable.
    NoContradiction,
    /// Some precondition fails; see the failing conditions.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCondition {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ProofCertificate {
    pub verdict: CertificateVerdict,
    pub conditions: Vec<CertificateCondition>,
    pub forced_determinism: bool,
    /// XOR of the parity targets; 1 means the system has no solution.
    pub xor_system_parity: u8,
}

impl ProofCertificate {
    pub fn failures(&self) -> impl Iterator<Item = &CertificateCondition> {
        self.conditions.iter().filter(|c| !c.pass)
    }
}

pub fn replay_possibilistic_contradiction(d: &ScenarioData) -> Result<ProofCertificate> {
    replay_with_targets(d, PARITY_TARGETS)
}

/// Replays the contradiction with the parity targets replaced by `targets`
/// (order `λA⊕λB⊕λC`, `λA⊕b3⊕c3`, `a3⊕λB⊕c3`, `a3⊕b3⊕λC`). The data
/// conditions are always checked against the true targets.
pub fn replay_with_targets(d: &ScenarioData, targets: [u8; 4]) -> Result<ProofCertificate> {
    let mut conditions: Vec<CertificateCondition> = verify_switch_data_conditions(d)?
        .conditions
        .into_iter()
        .map(|c| CertificateCondition { name: c.name, pass: c.pass, detail: c.detail })
        .collect();

    let inputs: Vec<&str> = d.inputs.iter().map(String::as_str).collect();
    let input_support = d.possible.marginalize(&inputs)?;
    let missing = input_support.values().iter().filter(|&&b| !b).count();
    conditions.push(CertificateCondition {
        name: "every input combination possible".into(),
        pass: missing == 0,
        detail: format!("{missing} of {} input combinations impossible", input_support.len()),
    });

    let mut forced_determinism = true;
    for (label, w) in ["A", "B", "C"].iter().zip(SWITCH_WINGS) {
        let [o1, o2, _, i1, i2] = w;
        let base =
            d.possible.marginalize(&[o1, o2, i1, i2])?.rename(&[(o1, "a1"), (o2, "a2"), (i1, "x1"), (i2, "x2")])?;
        let (pass, detail) = match enumerate_single_switch_extensions(&base) {
            Ok(search) => {
                let forced = search.forced_determinism;
                let detail = format!(
                    "{} of {} candidate extensions valid; {o1}={} at {i1}={i2}=1 in all",
                    search.valid_count,
                    search.candidates,
                    if forced { "lambda" } else { "not lambda" }
                );
                (forced && search.valid_count > 0, detail)
            }
            Err(e) => (false, e.to_string()),
        };
        forced_determinism &= pass;
        conditions.push(CertificateCondition { name: format!("{label}: forced determinism"), pass, detail });
    }

    let xor_system_parity = targets.iter().fold(0, |acc, t| acc ^ t);
    let brute = bruteforce_parity_models_with(targets);
    conditions.push(CertificateCondition {
        name: "parity system by exhaustion".into(),
        pass: (brute.satisfying_all == 0) == (xor_system_parity == 1),
        detail: format!(
            "{} of {} deterministic models satisfy all constraints; at most {} satisfied at once",
            brute.satisfying_all, brute.models, brute.max_satisfied
        ),
    });

    let preconditions_hold = conditions[..conditions.len() - 1].iter().all(|c| c.pass);
    let verdict = if !preconditions_hold {
        CertificateVerdict::NotApplicable
    } else if xor_system_parity == 1 && brute.satisfying_all == 0 {
        CertificateVerdict::Infeasible
    } else {
        CertificateVerdict::NoContradiction
    };
    Ok(ProofCertificate { verdict, conditions, forced_determinism, xor_system_parity })
}
