//! Seeded random hidden-causal-order models.
//!
//! Models are sampled in product form, so the independence conditions hold
//! by construction: inputs are independent of the hidden variables, each
//! switch's first agent ignores the other agent's input, and no wing reads a
//! remote input. Third outputs come either from local response functions or
//! from a parity box whose marginals are uniform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{bits, ProbTable, Table, VarSpec};
use crate::error::{Error, Result};
use crate::scenario::{CHAINED_INPUTS, CHAINED_OUTPUTS, GHZ_SWITCH_INPUTS, GHZ_SWITCH_OUTPUTS};

/// Shared hidden variable cardinality, besides the causal order bits.
pub const MU_CARD: usize = 4;

pub const MERMIN_LAMBDAS: [&str; 3] = ["lambdaA", "lambdaB", "lambdaC"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Mermin,
    Chained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomHcoSpec {
    pub seed: u64,
    /// Chain length; ignored for the Mermin family.
    pub n: usize,
    pub family: ModelFamily,
}

struct Sampler {
    rng: ChaCha8Rng,
    deterministic: bool,
}

impl Sampler {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let deterministic = rng.gen_bool(0.5);
        Sampler { rng, deterministic }
    }

    /// A response probability: a hard 0/1 in deterministic models, otherwise
    /// a hard value or a uniform draw with equal odds.
    fn response(&mut self) -> f64 {
        if self.deterministic || self.rng.gen_bool(0.5) {
            f64::from(u8::from(self.rng.gen_bool(0.5)))
        } else {
            self.rng.gen()
        }
    }

    fn responses(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.response()).collect()
    }

    /// A distribution with full support.
    fn positive_dist(&mut self, len: usize) -> Vec<f64> {
        let w: Vec<f64> = (0..len).map(|_| self.rng.gen_range(0.1..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    }

    /// A point mass half the time, otherwise a random distribution.
    fn hidden_dist(&mut self, len: usize) -> Vec<f64> {
        if self.rng.gen_bool(0.5) {
            let k = self.rng.gen_range(0..len);
            (0..len).map(|i| f64::from(u8::from(i == k))).collect()
        } else {
            let w: Vec<f64> = (0..len).map(|_| self.rng.gen::<f64>()).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        }
    }

    fn bits(&mut self, len: usize) -> Vec<u8> {
        (0..len).map(|_| u8::from(self.rng.gen_bool(0.5))).collect()
    }
}

fn bernoulli(p1: f64, v: usize) -> f64 {
    if v == 1 {
        p1
    } else {
        1.0 - p1
    }
}

/// Responses of a switch's first two agents to `(λ, μ, t1, t2)`. Half of
/// the sampled responses are uniform over the structural class, the other
/// half are near the zero-penalty responses.
///
/// Under order λ = 0 the leader is `s1` and reads only `t1`; under λ = 1 the
/// leader is `s2` and reads only `t2`. The follower may read both inputs and
/// the leader's output.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchResponse {
    /// `P(leader = 1)`, indexed `[λ][μ][own input]`.
    pub leader: Vec<f64>,
    /// `P(follower = 1)`, indexed `[λ][μ][leader output][t1][t2]`.
    pub follower: Vec<f64>,
}

impl SwitchResponse {
    fn random(s: &mut Sampler) -> Self {
        if !s.rng.gen_bool(0.5) {
            return SwitchResponse { leader: s.responses(2 * MU_CARD * 2), follower: s.responses(2 * MU_CARD * 8) };
        }
        // Close to the responses that meet every zero condition: the leader
        // outputs 0 and the follower outputs t1 ∧ t2.
        let eps = if s.rng.gen_bool(0.5) { 0.0 } else { s.rng.gen_range(0.0..0.2) };
        let mut blend = |exact: f64| (1.0 - eps) * exact + eps * s.rng.gen::<f64>();
        let leader = (0..2 * MU_CARD * 2).map(|_| blend(0.0)).collect();
        let follower = (0..2 * MU_CARD * 8).map(|i| blend(if i % 4 == 3 { 1.0 } else { 0.0 })).collect();
        SwitchResponse { leader, follower }
    }

    /// Distribution over `s1 s2` (index `2·s1 + s2`).
    pub fn dist(&self, lambda: usize, mu: usize, t1: usize, t2: usize) -> [f64; 4] {
        let own = if lambda == 0 { t1 } else { t2 };
        let pl = self.leader[(lambda * MU_CARD + mu) * 2 + own];
        let mut out = [0.0; 4];
        for lead in 0..2 {
            let pf = self.follower[((lambda * MU_CARD + mu) * 2 + lead) * 4 + t1 * 2 + t2];
            for fol in 0..2 {
                let p = bernoulli(pl, lead) * bernoulli(pf, fol);
                let (s1, s2) = if lambda == 0 { (lead, fol) } else { (fol, lead) };
                out[s1 * 2 + s2] += p;
            }
        }
        out
    }
}

/// A random model of the three-switch scenario with hidden variables
/// `λA, λB, λC` and a shared `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MerminHcoModel {
    /// `P(t = 1)` for each of the six inputs.
    pub input_bias: [f64; 6],
    /// `P(λA λB λC μ)`, index `λ-bits · MU_CARD + μ`.
    pub hidden: Vec<f64>,
    pub switches: [SwitchResponse; 3],
    pub third: MerminThird,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MerminThird {
    /// `P(s3 = 1)` per wing, indexed `[λ][μ][t1 t2][s1 s2]`.
    Local([Vec<f64>; 3]),
    /// `a3 b3 c3` uniform on the strings of parity `f(inputs)`.
    ParityBox(Vec<u8>),
}

impl MerminHcoModel {
    pub fn random(seed: u64) -> Self {
        let mut s = Sampler::new(seed);
        let input_bias = std::array::from_fn(|_| s.rng.gen_range(0.1..0.9));
        let hidden = s.hidden_dist(8 * MU_CARD);
        let switches = std::array::from_fn(|_| SwitchResponse::random(&mut s));
        let third = if s.rng.gen_bool(0.5) {
            MerminThird::Local(std::array::from_fn(|_| s.responses(2 * MU_CARD * 16)))
        } else {
            MerminThird::ParityBox(s.bits(64))
        };
        MerminHcoModel { input_bias, hidden, switches, third }
    }

    /// `P(outputs, inputs, λA λB λC)` over the nine outputs, six inputs and
    /// three order bits, in that variable order.
    pub fn to_table(&self) -> Result<ProbTable> {
        let vars = bits(GHZ_SWITCH_OUTPUTS.into_iter().chain(GHZ_SWITCH_INPUTS).chain(MERMIN_LAMBDAS));
        let mut values = vec![0.0; 1 << 18];
        for inp in 0..64usize {
            let p_in: f64 = (0..6).map(|k| bernoulli(self.input_bias[k], (inp >> (5 - k)) & 1)).product();
            let t = [(inp >> 4) & 3, (inp >> 2) & 3, inp & 3];
            for h in 0..8 * MU_CARD {
                let w = p_in * self.hidden[h];
                if w == 0.0 {
                    continue;
                }
                let (lams, mu) = (h / MU_CARD, h % MU_CARD);
                let lam = [(lams >> 2) & 1, (lams >> 1) & 1, lams & 1];
                let pair: [[f64; 4]; 3] =
                    std::array::from_fn(|k| self.switches[k].dist(lam[k], mu, t[k] >> 1, t[k] & 1));
                // Distribution of each wing's three outputs, or of the pairs
                // combined with the box.
                let wing: [[f64; 8]; 3] = match &self.third {
                    MerminThird::Local(resp) => std::array::from_fn(|k| {
                        let mut d = [0.0; 8];
                        for s in 0..4 {
                            let p3 = resp[k][((lam[k] * MU_CARD + mu) * 4 + t[k]) * 4 + s];
                            d[s * 2 + 1] = pair[k][s] * p3;
                            d[s * 2] = pair[k][s] * (1.0 - p3);
                        }
                        d
                    }),
                    MerminThird::ParityBox(_) => std::array::from_fn(|k| {
                        let mut d = [0.0; 8];
                        for s in 0..4 {
                            d[s * 2] = pair[k][s];
                            d[s * 2 + 1] = pair[k][s];
                        }
                        d
                    }),
                };
                let box_parity = match &self.third {
                    MerminThird::ParityBox(f) => Some(f[inp]),
                    MerminThird::Local(_) => None,
                };
                for out in 0..512usize {
                    let (oa, ob, oc) = (out >> 6, (out >> 3) & 7, out & 7);
                    let mut p = w * wing[0][oa] * wing[1][ob] * wing[2][oc];
                    if let Some(f) = box_parity {
                        let parity = (oa ^ ob ^ oc) & 1;
                        p *= if parity == f as usize { 0.25 } else { 0.0 };
                    }
                    values[(out << 9) | (inp << 3) | lams] += p;
                }
            }
        }
        Table::new(vars, values)
    }
}

/// A random model of the chained scenario with order bit `λ` and a shared
/// `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainHcoModel {
    pub n: usize,
    /// `P(x1 = 1)`, `P(x2 = 1)`.
    pub switch_bias: [f64; 2],
    pub x3_dist: Vec<f64>,
    pub y_dist: Vec<f64>,
    /// `P(λ μ)`, index `λ · MU_CARD + μ`.
    pub hidden: Vec<f64>,
    pub switch: SwitchResponse,
    pub third: ChainThird,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainThird {
    /// `P(a3 = 1)` indexed `[λ][μ][x1 x2][a1 a2][x3]`, and `P(b = 1)`
    /// indexed `[λ][μ][y]`.
    Local { a3: Vec<f64>, b: Vec<f64> },
    /// `a3, b` uniform with `a3 ⊕ b = g(x3, y)`, `g` indexed `[x3][y]`.
    ParityBox(Vec<u8>),
}

impl ChainHcoModel {
    pub fn random(seed: u64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidN(n, "chained models need N >= 2"));
        }
        let k = n + 1;
        let mut s = Sampler::new(seed);
        let switch_bias = [s.rng.gen_range(0.1..0.9), s.rng.gen_range(0.1..0.9)];
        let x3_dist = s.positive_dist(k);
        let y_dist = s.positive_dist(k);
        let hidden = s.hidden_dist(2 * MU_CARD);
        let switch = SwitchResponse::random(&mut s);
        let third = match s.rng.gen_range(0..3) {
            0 => ChainThird::Local { a3: s.responses(2 * MU_CARD * 16 * k), b: s.responses(2 * MU_CARD * k) },
            1 => ChainThird::ParityBox(s.bits(k * k)),
            // The box that anti-correlates only the (0, N) setting.
            _ => ChainThird::ParityBox((0..k * k).map(|i| u8::from(i == n)).collect()),
        };
        Ok(ChainHcoModel { n, switch_bias, x3_dist, y_dist, hidden, switch, third })
    }

    /// `P(a1 a2 a3 b x1 x2 x3 y λ)` in that variable order.
    pub fn to_table(&self) -> Result<ProbTable> {
        let k = self.n + 1;
        let mut vars = bits(CHAINED_OUTPUTS.into_iter().chain(["x1", "x2"]));
        vars.push(VarSpec::new(CHAINED_INPUTS[2], k));
        vars.push(VarSpec::new(CHAINED_INPUTS[3], k));
        vars.push(VarSpec::bit("lambda"));
        let mut values = vec![0.0; 16 * 4 * k * k * 2];
        for x12 in 0..4 {
            let (x1, x2) = (x12 >> 1, x12 & 1);
            let p12 = bernoulli(self.switch_bias[0], x1) * bernoulli(self.switch_bias[1], x2);
            for x3 in 0..k {
                for y in 0..k {
                    let p_in = p12 * self.x3_dist[x3] * self.y_dist[y];
                    for h in 0..2 * MU_CARD {
                        let w = p_in * self.hidden[h];
                        if w == 0.0 {
                            continue;
                        }
                        let (lam, mu) = (h / MU_CARD, h % MU_CARD);
                        let pair = self.switch.dist(lam, mu, x1, x2);
                        for a12 in 0..4 {
                            for a3 in 0..2 {
                                for b in 0..2 {
                                    let p3b = match &self.third {
                                        ChainThird::Local { a3: ra, b: rb } => {
                                            let pa = ra[(((lam * MU_CARD + mu) * 4 + x12) * 4 + a12) * k + x3];
                                            let pb = rb[(lam * MU_CARD + mu) * k + y];
                                            bernoulli(pa, a3) * bernoulli(pb, b)
                                        }
                                        ChainThird::ParityBox(g) => {
                                            if (a3 ^ b) as u8 == g[x3 * k + y] {
                                                0.5
                                            } else {
                                                0.0
                                            }
                                        }
                                    };
                                    let out = (a12 * 2 + a3) * 2 + b;
                                    let idx = (((out * 4 + x12) * k + x3) * k + y) * 2 + lam;
                                    values[idx] += w * pair[a12] * p3b;
                                }
                            }
                        }
                    }
                }
            }
        }
        Table::new(vars, values)
    }
}

/// The joint table of a random model, hidden variables included.
pub fn random_probabilistic_hco(spec: &RandomHcoSpec) -> Result<ProbTable> {
    match spec.family {
        ModelFamily::Mermin => MerminHcoModel::random(spec.seed).to_table(),
        ModelFamily::Chained => ChainHcoModel::random(spec.seed, spec.n)?.to_table(),
    }
}
