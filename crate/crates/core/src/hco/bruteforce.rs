//! Exhaustive deterministic-model oracles for the classical bounds.

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{bits, ProbTable, Table, VarSpec};
use crate::error::{Error, Result};
use crate::scenario::{switch_parity_rows, GHZ_SWITCH_INPUTS, GHZ_SWITCH_OUTPUTS};

/// Parity targets of the four setting-𝟎 constraints, in the order
/// `λA⊕λB⊕λC`, `λA⊕b3⊕c3`, `a3⊕λB⊕c3`, `a3⊕b3⊕λC`.
pub const PARITY_TARGETS: [u8; 4] = [0, 1, 1, 1];

/// A deterministic three-switch model: each switch's causal order and each
/// wing's third output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeterministicJointModel {
    pub lambda: [u8; 3],
    pub third: [u8; 3],
}

impl DeterministicJointModel {
    /// All 64 models in lexicographic order of `(λA, λB, λC, a3, b3, c3)`.
    pub fn all() -> impl Iterator<Item = Self> {
        (0..64u8).map(|m| {
            let bit = |k: u8| (m >> (5 - k)) & 1;
            DeterministicJointModel { lambda: [bit(0), bit(1), bit(2)], third: [bit(3), bit(4), bit(5)] }
        })
    }

    /// Left-hand sides of the four parity constraints.
    pub fn parities(&self) -> [u8; 4] {
        let [la, lb, lc] = self.lambda;
        let [a3, b3, c3] = self.third;
        [la ^ lb ^ lc, la ^ b3 ^ c3, a3 ^ lb ^ c3, a3 ^ b3 ^ lc]
    }

    pub fn satisfied(&self, targets: [u8; 4]) -> usize {
        self.parities().iter().zip(targets).filter(|(p, t)| **p == *t).count()
    }

    /// The model's observable table under uniform inputs. With causal order
    /// λ the first agent outputs 0 and the second outputs `t1 ∧ t2`, so
    /// every zero condition holds and `s1 = λ` at setting 11.
    pub fn to_prob_table(&self) -> Result<ProbTable> {
        let vars = bits(GHZ_SWITCH_OUTPUTS.into_iter().chain(GHZ_SWITCH_INPUTS));
        let mass = 1.0 / 64.0;
        Table::from_fn(vars, |v| {
            let ok = (0..3).all(|w| {
                let (t1, t2) = (v[9 + 2 * w], v[10 + 2 * w]);
                let both = t1 & t2;
                let (s1, s2) = if self.lambda[w] == 0 { (0, both) } else { (both, 0) };
                v[3 * w] == s1 && v[3 * w + 1] == s2 && v[3 * w + 2] == self.third[w] as usize
            });
            if ok {
                mass
            } else {
                0.0
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ParityBruteForce {
    pub models: usize,
    pub max_satisfied: usize,
    pub satisfying_all: usize,
}

pub fn bruteforce_parity_models() -> ParityBruteForce {
    bruteforce_parity_models_with(PARITY_TARGETS)
}

pub fn bruteforce_parity_models_with(targets: [u8; 4]) -> ParityBruteForce {
    let mut out = ParityBruteForce { models: 0, max_satisfied: 0, satisfying_all: 0 };
    for m in DeterministicJointModel::all() {
        let s = m.satisfied(targets);
        out.models += 1;
        out.max_satisfied = out.max_satisfied.max(s);
        out.satisfying_all += usize::from(s == 4);
    }
    out
}

/// Parity targets of the observable constraints in
/// [`switch_parity_rows`] order, for cross-reference in reports.
pub fn observable_targets() -> [u8; 4] {
    switch_parity_rows().map(|(_, t)| t)
}

/// A deterministic chained-scenario model: `a(x3)`, `b(y)` and a causal
/// order bit that only enters through the constraint `a(0) = λ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicChainModel {
    pub lambda: u8,
    pub a: Vec<u8>,
    pub b: Vec<u8>,
}

impl DeterministicChainModel {
    fn from_masks(lambda: u8, a: u32, b: u32, k: usize) -> Self {
        let unpack = |m: u32| (0..k).map(|i| ((m >> i) & 1) as u8).collect();
        DeterministicChainModel { lambda, a: unpack(a), b: unpack(b) }
    }

    /// The point-mass table `R(a, b | x3, y)`.
    pub fn to_r_table(&self) -> Result<ProbTable> {
        let k = self.a.len();
        if self.b.len() != k {
            return Err(Error::DimensionMismatch(format!("a has {k} settings, b has {}", self.b.len())));
        }
        let vars = vec![VarSpec::bit("a"), VarSpec::bit("b"), VarSpec::new("x3", k), VarSpec::new("y", k)];
        Table::from_fn(vars, |v| if self.a[v[2]] as usize == v[0] && self.b[v[3]] as usize == v[1] { 1.0 } else { 0.0 })
    }
}

/// The chained expression of a deterministic model given as bit masks
/// (bit `i` of `a` is `a(i)`).
fn bc_of_masks(a: u32, b: u32, n: usize) -> i64 {
    let full = (1u32 << (n + 1)) - 1;
    let low = (1u32 << n) - 1;
    let diag = (!(a ^ b) & full).count_ones() as i64;
    let shifted = (!((a >> 1) ^ b) & low).count_ones() as i64;
    let last = i64::from((a ^ (b >> n)) & 1 == 0);
    diag + shifted - last
}

fn chsh_of_masks(a: u32, b: u32, i: usize) -> i64 {
    let eq = |x: usize, y: usize| i64::from((a >> x) & 1 == (b >> y) & 1);
    eq(0, i - 1) + eq(i, i - 1) + eq(i, i) - eq(0, i)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BcBruteForce {
    #[serde(rename = "N")]
    pub n: usize,
    pub models: u64,
    /// Max of the chained expression over models with `a(0) = λ`.
    pub max_constrained: f64,
    pub max_unconstrained: f64,
    /// Every `CHSH_{0,i;i−1,i} ≤ 4 − 2⟦a(0)=λ⟧` and the aggregate
    /// `BC_N ≤ N(4 − 2⟦a(0)=λ⟧)` hold on every model.
    pub monogamy_holds: bool,
    /// One model attaining `max_constrained`, first in enumeration order.
    #[serde(skip)]
    pub argmax: DeterministicChainModel,
}

pub const BC_BRUTEFORCE_MAX_N: usize = 10;

pub fn bruteforce_bc_bound(n: usize) -> Result<BcBruteForce> {
    if !(2..=BC_BRUTEFORCE_MAX_N).contains(&n) {
        return Err(Error::InvalidN(n, "brute force needs 2 <= N <= 10"));
    }
    let k = n + 1;
    let per = 1u32 << k;
    // (max constrained, its first (λ, a, b), max unconstrained, monogamy)
    type Acc = (i64, (u8, u32, u32), i64, bool);
    let fold = |acc: Acc, x: Acc| -> Acc {
        let best = if x.0 > acc.0 || (x.0 == acc.0 && x.1 < acc.1) { (x.0, x.1) } else { (acc.0, acc.1) };
        (best.0, best.1, acc.2.max(x.2), acc.3 && x.3)
    };
    let init = (i64::MIN, (u8::MAX, u32::MAX, u32::MAX), i64::MIN, true);
    let acc = (0..2 * per)
        .into_par_iter()
        .map(|outer| {
            let lambda = (outer / per) as u8;
            let a = outer % per;
            let pinned = u32::from(lambda) == a & 1;
            let cap = 4 - 2 * i64::from(pinned);
            let mut acc = init;
            for b in 0..per {
                let bc = bc_of_masks(a, b, n);
                let terms_ok = (1..=n).all(|i| chsh_of_masks(a, b, i) <= cap);
                let x = (if pinned { bc } else { i64::MIN }, (lambda, a, b), bc, terms_ok && bc <= n as i64 * cap);
                acc = fold(acc, x);
            }
            acc
        })
        .reduce(|| init, fold);
    let (lambda, a, b) = acc.1;
    Ok(BcBruteForce {
        n,
        models: 2 * u64::from(per) * u64::from(per),
        max_constrained: acc.0 as f64,
        max_unconstrained: acc.2 as f64,
        monogamy_holds: acc.3,
        argmax: DeterministicChainModel::from_masks(lambda, a, b, k),
    })
}
