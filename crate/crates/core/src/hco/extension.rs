//! Possibilistic hidden-causal-order extensions of a single switch.
//!
//! Any extension `r(a1 a2 x1 x2 λ)` whose λ-marginal is the base table must
//! give every possible base cell a nonempty set of λ values and every
//! impossible cell the empty set, so enumerating λ-subsets over the support
//! is exhaustive.

use serde::Serialize;

use crate::dist::{bits, Event, Given, PossTable, Table};
use crate::error::{Error, Result};

pub const SWITCH_VARS: [&str; 4] = ["a1", "a2", "x1", "x2"];
pub const LAMBDA: &str = "lambda";
pub const MAX_SUPPORT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct HcoExtension {
    /// Possibility table over `(a1, a2, x1, x2, lambda)`.
    pub table: PossTable,
    /// Each base support cell `(a1, a2, x1, x2)` with its λ values.
    pub provenance: Vec<([usize; 4], Vec<u8>)>,
}

/// Largest valid-extension count that is materialized as tables.
pub const MAX_LISTED: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionSearch {
    pub support_size: usize,
    pub candidates: u64,
    pub valid_count: u64,
    /// Whether `x1 = x2 = 1 ⟹ a1 = λ` holds in every valid extension.
    pub forced_determinism: bool,
    /// The valid extensions in lexicographic candidate order, or empty when
    /// there are more than [`MAX_LISTED`].
    pub valid: Vec<HcoExtension>,
}

fn support_of(base: &PossTable) -> Result<Vec<[usize; 4]>> {
    for v in SWITCH_VARS {
        if base.card(v)? != 2 {
            return Err(Error::MalformedTable(format!("`{v}` must be binary")));
        }
    }
    if base.len() != 16 {
        return Err(Error::MalformedTable("base must have exactly the variables a1, a2, x1, x2".into()));
    }
    let ordered = base.marginalize(&SWITCH_VARS)?;
    let inputs = ordered.marginalize(&["x1", "x2"])?;
    if !inputs.values().iter().all(|&b| b) {
        return Err(Error::InvalidParameter("base must have every input pair possible".into()));
    }
    Ok(ordered.support().into_iter().map(|c| [c[0], c[1], c[2], c[3]]).collect())
}

/// Checks the three defining conditions of a hidden causal order model.
pub fn is_hco_model(ext: &PossTable) -> Result<bool> {
    Ok(ext.check_independence(&[LAMBDA], &["x1", "x2"], Given::Nothing)?.independent
        && ext.check_independence(&["a1"], &["x2"], Given::Assignment(&[(LAMBDA, 0)]))?.independent
        && ext.check_independence(&["a2"], &["x1"], Given::Assignment(&[(LAMBDA, 1)]))?.independent)
}

/// For each subset of the support (bit i = cell i), whether it can be the
/// set of cells compatible with `λ = lambda`: empty, or covering every input
/// pair with the leader's output independent of the other agent's input.
fn admissible_sets(support: &[[usize; 4]], lambda: usize) -> Vec<bool> {
    let s = support.len();
    (0..1usize << s)
        .map(|m| {
            if m == 0 {
                return true;
            }
            let (mut inputs, mut pairs) = (0u8, 0u8);
            for (i, c) in support.iter().enumerate() {
                if m >> i & 1 == 1 {
                    inputs |= 1 << (c[2] * 2 + c[3]);
                    let (out, other_in) = if lambda == 0 { (c[0], c[3]) } else { (c[1], c[2]) };
                    pairs |= 1 << (out * 2 + other_in);
                }
            }
            let outs = (pairs | pairs >> 1) & 0b101;
            let ins = (pairs | pairs >> 2) & 0b11;
            let product = (0..4).filter(|p| outs >> (p & 2) & 1 == 1 && ins >> (p & 1) & 1 == 1);
            inputs == 0b1111 && product.fold(0u8, |acc, p| acc | 1 << p) == pairs
        })
        .collect()
}

/// Calls `f(S0, S1)` for every valid pair of λ-cell sets covering the
/// support, in no particular order.
fn for_each_valid_pair(support: &[[usize; 4]], mut f: impl FnMut(usize, usize)) {
    let full = (1usize << support.len()) - 1;
    let ok0 = admissible_sets(support, 0);
    let ok1 = admissible_sets(support, 1);
    for s0 in (0..=full).filter(|&m| ok0[m]) {
        // S1 must contain every cell outside S0; iterate over the rest.
        let rest = full & !s0;
        let mut u = s0;
        loop {
            if ok1[rest | u] {
                f(s0, rest | u);
            }
            if u == 0 {
                break;
            }
            u = (u - 1) & s0;
        }
    }
}

fn extension_from_sets(
    support: &[[usize; 4]],
    vars: &[crate::dist::VarSpec],
    s0: usize,
    s1: usize,
) -> Result<HcoExtension> {
    let mut values = vec![false; 32];
    let mut provenance = Vec::with_capacity(support.len());
    for (i, c) in support.iter().enumerate() {
        let base_idx = ((c[0] * 2 + c[1]) * 2 + c[2]) * 2 + c[3];
        let mut lambdas = Vec::new();
        for (l, set) in [s0, s1].into_iter().enumerate() {
            if set >> i & 1 == 1 {
                values[base_idx * 2 + l] = true;
                lambdas.push(l as u8);
            }
        }
        provenance.push((*c, lambdas));
    }
    Ok(HcoExtension { table: Table::new(vars.to_vec(), values)?, provenance })
}

/// Every hidden causal order model extending `base`. Candidates are the
/// `3^|support|` assignments of a nonempty λ-subset to each support cell;
/// validity is decided per λ-cell set, so the search never visits invalid
/// halves twice.
pub fn enumerate_single_switch_extensions(base: &PossTable) -> Result<ExtensionSearch> {
    let support = support_of(base)?;
    let s = support.len();
    if s > MAX_SUPPORT {
        return Err(Error::SupportTooLarge(s));
    }
    // Cells at x1 = x2 = 1 whose a1 differs from λ = 0 (resp. λ = 1).
    let mask = |want_a1: usize| {
        support
            .iter()
            .enumerate()
            .filter(|(_, c)| c[2] == 1 && c[3] == 1 && c[0] == want_a1)
            .fold(0, |m, (i, _)| m | 1 << i)
    };
    let (bad0, bad1) = (mask(1), mask(0));
    let mut valid_count = 0u64;
    let mut forced_determinism = true;
    for_each_valid_pair(&support, |s0, s1| {
        valid_count += 1;
        forced_determinism &= s0 & bad0 == 0 && s1 & bad1 == 0;
    });
    let mut valid = Vec::new();
    if valid_count <= MAX_LISTED {
        let mut pairs = Vec::new();
        for_each_valid_pair(&support, |s0, s1| pairs.push((s0, s1)));
        // Lexicographic candidate order: first support cell most significant,
        // λ-subsets ordered {0}, {1}, {0,1}.
        let key = |&(s0, s1): &(usize, usize)| -> Vec<usize> {
            (0..s).map(|i| (s0 >> i & 1) + 2 * (s1 >> i & 1) - 1).collect()
        };
        pairs.sort_by_key(key);
        let vars = bits(SWITCH_VARS.into_iter().chain([LAMBDA]));
        for (s0, s1) in pairs {
            valid.push(extension_from_sets(&support, &vars, s0, s1)?);
        }
    }
    Ok(ExtensionSearch { support_size: s, candidates: 3u64.pow(s as u32), valid_count, forced_determinism, valid })
}

/// Whether every extension satisfies `x1 = x2 = 1 ⟹ a1 = λ`.
pub fn check_forced_determinism(exts: &[HcoExtension]) -> Result<bool> {
    let ante = Event::assign([("x1", 1), ("x2", 1)]);
    let cons = Event::parity(["a1", LAMBDA], 0);
    for e in exts {
        if !e.table.check_implication(&ante, &cons)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Summary of an extension search, for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtensionSummary {
    pub support_size: usize,
    pub candidates: u64,
    pub valid: u64,
    pub forced_determinism: bool,
    /// λ-subsets of each support cell, per valid extension; empty when there
    /// are too many to list.
    pub extensions: Vec<Vec<ProvenanceEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvenanceEntry {
    pub cell: [usize; 4],
    pub lambdas: Vec<u8>,
}

impl ExtensionSearch {
    pub fn listed_all(&self) -> bool {
        self.valid.len() as u64 == self.valid_count
    }

    pub fn summary(&self) -> ExtensionSummary {
        ExtensionSummary {
            support_size: self.support_size,
            candidates: self.candidates,
            valid: self.valid_count,
            forced_determinism: self.forced_determinism,
            extensions: self
                .valid
                .iter()
                .map(|e| e.provenance.iter().map(|(c, l)| ProvenanceEntry { cell: *c, lambdas: l.clone() }).collect())
                .collect(),
        }
    }
}

/// The possibility table over `(a1, a2, x1, x2)` listing exactly `cells`.
pub fn base_from_cells(cells: &[[usize; 4]]) -> Result<PossTable> {
    Table::from_fn(bits(SWITCH_VARS), |v| cells.iter().any(|c| c[..] == *v))
}
