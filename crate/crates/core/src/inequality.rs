//! Causal Mermin and chained (Braunstein–Caves) inequality evaluators.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dist::{Event, ProbTable, TABLE_TOL};
use crate::error::{Error, Result};
use crate::linalg::PHYSICAL_TOL;
use crate::report::{r9, r9_seq};
use crate::scenario::{restrict_chained, switch_parity_rows, ScenarioData, SWITCH_WINGS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Violated,
    NotViolated,
}

impl Verdict {
    /// Strict comparison against `bound` with 1e-9 slack.
    pub fn against(value: f64, bound: f64) -> Verdict {
        if value > bound + PHYSICAL_TOL {
            Verdict::Violated
        } else {
            Verdict::NotViolated
        }
    }
}

/// `P(s1=1 | 10) + P(s2=1 | 01) + P(s1 s2=00 | 11)` for one switch with
/// variables `[s1, s2, t1, t2]`.
pub fn switch_penalty(joint: &ProbTable, [s1, s2, t1, t2]: [&str; 4]) -> Result<f64> {
    let setting = |u, v| Event::assign([(t1, u), (t2, v)]);
    Ok(joint.cond_prob(&Event::assign([(s1, 1)]), &setting(1, 0))?
        + joint.cond_prob(&Event::assign([(s2, 1)]), &setting(0, 1))?
        + joint.cond_prob(&Event::assign([(s1, 0), (s2, 0)]), &setting(1, 1))?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MerminReport {
    /// The four parity-term probabilities, in the order settings 111, 100,
    /// 010, 001.
    #[serde(serialize_with = "r9_seq")]
    pub parity_terms: Vec<f64>,
    #[serde(serialize_with = "r9")]
    pub alpha: f64,
    #[serde(serialize_with = "r9")]
    pub beta: f64,
    #[serde(serialize_with = "r9")]
    pub gamma: f64,
    #[serde(serialize_with = "r9")]
    pub total: f64,
    pub classical_bound: u32,
    pub algebraic_max: u32,
    pub verdict: Verdict,
}

/// Evaluates the causal Mermin expression on any joint table carrying the
/// three-switch variables (extra variables such as hidden ones are summed
/// over).
pub fn eval_causal_mermin_table(joint: &ProbTable) -> Result<MerminReport> {
    let mut parity_terms = Vec::with_capacity(4);
    for (setting, target) in switch_parity_rows() {
        let mut given = Vec::new();
        let mut outs = Vec::new();
        for (w, &s) in SWITCH_WINGS.iter().zip(&setting) {
            given.push((w[3], s));
            given.push((w[4], s));
            outs.push(if s == 1 { w[0] } else { w[2] });
        }
        parity_terms.push(joint.cond_prob(&Event::parity(outs, target), &Event::assign(given))?);
    }
    let pens =
        SWITCH_WINGS.iter().map(|w| switch_penalty(joint, [w[0], w[1], w[3], w[4]])).collect::<Result<Vec<_>>>()?;
    let total = parity_terms.iter().sum::<f64>() - 2.0 * pens.iter().sum::<f64>();
    Ok(MerminReport {
        parity_terms,
        alpha: pens[0],
        beta: pens[1],
        gamma: pens[2],
        total,
        classical_bound: 3,
        algebraic_max: 4,
        verdict: Verdict::against(total, 3.0),
    })
}

pub fn eval_causal_mermin(d: &ScenarioData) -> Result<MerminReport> {
    eval_causal_mermin_table(&d.joint)
}

fn check_r_shape(r: &ProbTable) -> Result<(usize, usize)> {
    for v in ["a", "b"] {
        if r.card(v)? != 2 {
            return Err(Error::MalformedTable(format!("`{v}` must be binary")));
        }
    }
    Ok((r.card("x3")?, r.card("y")?))
}

/// `R(a = b | x3, y)`, normalizing by the mass of the setting cell.
fn eq_prob(r: &ProbTable, x: usize, y: usize) -> Result<f64> {
    let (kx, ky) = check_r_shape(r)?;
    if x >= kx || y >= ky {
        return Err(Error::IndexOutOfRange(format!("setting ({x}, {y}) outside {kx}x{ky}")));
    }
    r.cond_prob(&Event::parity(["a", "b"], 0), &Event::assign([("x3", x), ("y", y)]))
}

/// `R(=|ξ₀υ₀) + R(=|ξ₁υ₀) + R(=|ξ₁υ₁) − R(=|ξ₀υ₁)` on a table over
/// `(a, b, x3, y)`.
pub fn chsh_expr(r: &ProbTable, xi0: usize, xi1: usize, up0: usize, up1: usize) -> Result<f64> {
    Ok(eq_prob(r, xi0, up0)? + eq_prob(r, xi1, up0)? + eq_prob(r, xi1, up1)? - eq_prob(r, xi0, up1)?)
}

/// The chained expression as its `2N + 2`-term expansion.
pub fn eval_bc(r: &ProbTable, n: usize) -> Result<f64> {
    let (kx, ky) = check_r_shape(r)?;
    if kx < n + 1 || ky < n + 1 {
        return Err(Error::IndexOutOfRange(format!("table has {kx}x{ky} settings, N = {n} needs {0}x{0}", n + 1)));
    }
    let mut sum = 0.0;
    for i in 0..n {
        sum += eq_prob(r, i, i)? + eq_prob(r, i + 1, i)?;
    }
    Ok(sum + eq_prob(r, n, n)? - eq_prob(r, 0, n)?)
}

/// The same quantity as a sum of CHSH expressions `CHSH_{0,i;i−1,i}` over
/// `i = 1..=N`, which telescopes to the expansion.
pub fn eval_bc_compact(r: &ProbTable, n: usize) -> Result<f64> {
    (1..=n).map(|i| chsh_expr(r, 0, i, i - 1, i)).sum()
}

pub fn chained_closed_form(n: usize) -> f64 {
    let k = (n + 1) as f64;
    k * ((PI / k).cos() + 1.0) - 1.0
}

/// Upper bound on the fraction of runs with a definite causal order given
/// the ideal chained data: `(N+1)(1 − cos π/(N+1))`.
pub fn causal_fraction_bound(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidN(n, "the chained inequality needs N >= 2"));
    }
    let k = (n + 1) as f64;
    Ok(k * (1.0 - (PI / k).cos()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(serialize_with = "r9")]
    pub bc_value: f64,
    #[serde(serialize_with = "r9")]
    pub alpha: f64,
    #[serde(serialize_with = "r9")]
    pub constrained_value: f64,
    pub classical_bound: usize,
    pub algebraic_max: usize,
    #[serde(serialize_with = "r9")]
    pub closed_form: f64,
    #[serde(serialize_with = "r9")]
    pub causal_fraction_bound: f64,
    pub verdict: Verdict,
}

impl ChainReport {
    pub const CSV_HEADER: [&'static str; 8] = [
        "N",
        "bcValue",
        "alpha",
        "constrainedValue",
        "classicalBound",
        "algebraicMax",
        "closedForm",
        "causalFractionBound",
    ];

    /// One CSV row in [`Self::CSV_HEADER`] order, floats at 9 decimals.
    pub fn csv_row(&self) -> Vec<String> {
        let f = |x: f64| format!("{:.9}", crate::report::round9(x));
        vec![
            self.n.to_string(),
            f(self.bc_value),
            f(self.alpha),
            f(self.constrained_value),
            self.classical_bound.to_string(),
            self.algebraic_max.to_string(),
            f(self.closed_form),
            f(self.causal_fraction_bound),
        ]
    }
}

/// Evaluates `BC_N[R] − 2N·α` on chained data with `N` settings.
pub fn eval_chain_causal(d: &ScenarioData, n: usize) -> Result<ChainReport> {
    let (r, alpha) = restrict_chained(d, n)?;
    let bc_value = eval_bc(&r, n)?;
    let constrained_value = bc_value - 2.0 * n as f64 * alpha;
    Ok(ChainReport {
        n,
        bc_value,
        alpha,
        constrained_value,
        classical_bound: 2 * n,
        algebraic_max: 2 * n + 1,
        closed_form: chained_closed_form(n),
        causal_fraction_bound: causal_fraction_bound(n)?,
        verdict: Verdict::against(constrained_value, (2 * n) as f64),
    })
}

/// `true` when every cell of `r` is nonnegative and every setting cell
/// carries unit mass.
pub fn is_conditional_r(r: &ProbTable) -> bool {
    r.values().iter().all(|&p| p >= -TABLE_TOL)
        && r.marginalize(&["x3", "y"])
            .map(|m| m.values().iter().all(|v| (v - 1.0).abs() < PHYSICAL_TOL))
            .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Table, VarSpec};
    use crate::scenario::{build_chained_switch, build_ghz_three_switch, ChainedScenarioConfig, GhzScenarioConfig};
    use proptest::prelude::*;

    fn r_vars(n: usize) -> Vec<VarSpec> {
        vec![VarSpec::bit("a"), VarSpec::bit("b"), VarSpec::new("x3", n + 1), VarSpec::new("y", n + 1)]
    }

    fn correlated(n: usize) -> ProbTable {
        Table::from_fn(r_vars(n), |v| if v[0] == v[1] { 0.5 } else { 0.0 }).unwrap()
    }

    #[test]
    fn chsh_reference_values() {
        let r = correlated(2);
        assert!((chsh_expr(&r, 0, 1, 0, 1).unwrap() - 2.0).abs() < 1e-12);
        let u = ProbTable::uniform(r_vars(2)).unwrap();
        assert!((chsh_expr(&u, 0, 1, 0, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(chsh_expr(&u, 0, 3, 0, 1), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn chsh_on_switch_data_matches_bloch_geometry() {
        // Three neighbouring pairs at cos²(θ/2) = 3/4; the (0, 1) pair is
        // the chain points v0 and v3, which sit at right angles for N = 2.
        let cfg = ChainedScenarioConfig::new(2);
        let d = build_chained_switch(&cfg).unwrap();
        let (r, _) = restrict_chained(&d, 2).unwrap();
        let (a, b) = crate::scenario::chained_directions(&cfg).unwrap();
        let dot = a[0][0] * b[1][0] - a[0][1] * b[1][1] + a[0][2] * b[1][2];
        let expected = 3.0 * 0.75 - (1.0 + dot) / 2.0;
        assert!((chsh_expr(&r, 0, 1, 0, 1).unwrap() - expected).abs() < PHYSICAL_TOL);
        assert!((chsh_expr(&r, 0, 1, 0, 1).unwrap() - 1.75).abs() < PHYSICAL_TOL);
    }

    #[test]
    fn bc_extremes() {
        for n in 2..6 {
            // All-equal outputs also saturate the subtracted term.
            assert!((eval_bc(&correlated(n), n).unwrap() - (2 * n) as f64).abs() < 1e-12);
            let best = Table::from_fn(r_vars(n), |v| {
                let anti = v[2] == 0 && v[3] == n;
                if (v[0] == v[1]) != anti {
                    0.5
                } else {
                    0.0
                }
            })
            .unwrap();
            assert!((eval_bc(&best, n).unwrap() - (2 * n + 1) as f64).abs() < 1e-12);
            let u = ProbTable::uniform(r_vars(n)).unwrap();
            assert!((eval_bc(&u, n).unwrap() - n as f64).abs() < 1e-12);
        }
        assert!(matches!(eval_bc(&correlated(2), 3), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn compact_sum_equals_expansion() {
        for n in 2..7 {
            let d = build_chained_switch(&ChainedScenarioConfig::new(n)).unwrap();
            let (r, _) = restrict_chained(&d, n).unwrap();
            let a = eval_bc(&r, n).unwrap();
            let b = eval_bc_compact(&r, n).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_values() {
        assert!((chained_closed_form(3) - 5.828_427_125).abs() < 1e-9);
        assert!((chained_closed_form(7) - 14.391_036_260).abs() < 1e-9);
        assert!((chained_closed_form(9) - 18.510_565_163).abs() < 1e-9);
        assert!((causal_fraction_bound(3).unwrap() - 1.171_572_875).abs() < 1e-9);
        assert!((causal_fraction_bound(9).unwrap() - 0.489_434_837).abs() < 1e-9);
        assert!(causal_fraction_bound(1).is_err());
        let mut prev = f64::INFINITY;
        for n in 2..=64 {
            let b = causal_fraction_bound(n).unwrap();
            assert!(b < prev && b > 0.0);
            prev = b;
        }
        // Deficit from the algebraic maximum equals the causal fraction bound.
        for n in 2..20 {
            let deficit = (2 * n + 1) as f64 - chained_closed_form(n);
            assert!((deficit - causal_fraction_bound(n).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn mermin_on_noiseless_and_fully_mixed_data() {
        let rep = eval_causal_mermin(&build_ghz_three_switch(&GhzScenarioConfig::default()).unwrap()).unwrap();
        assert!((rep.total - 4.0).abs() < PHYSICAL_TOL);
        assert_eq!(rep.verdict, Verdict::Violated);
        assert!(rep.alpha.abs() < 1e-12 && rep.beta.abs() < 1e-12 && rep.gamma.abs() < 1e-12);

        let mixed = eval_causal_mermin(&build_ghz_three_switch(&GhzScenarioConfig::noisy(1.0)).unwrap()).unwrap();
        assert!(mixed.parity_terms.iter().all(|t| (t - 0.5).abs() < PHYSICAL_TOL));
        assert!((mixed.total - 2.0).abs() < PHYSICAL_TOL);
        assert_eq!(mixed.verdict, Verdict::NotViolated);
    }

    #[test]
    fn chain_reports() {
        let r3 = eval_chain_causal(&build_chained_switch(&ChainedScenarioConfig::new(3)).unwrap(), 3).unwrap();
        assert!((r3.constrained_value - 5.828_427).abs() < 1e-6);
        assert_eq!(r3.verdict, Verdict::NotViolated);
        let r9 = eval_chain_causal(&build_chained_switch(&ChainedScenarioConfig::new(9)).unwrap(), 9).unwrap();
        assert!((r9.constrained_value - 18.510_565).abs() < 1e-6);
        assert_eq!(r9.verdict, Verdict::Violated);
        assert_eq!(r9.csv_row()[3], "18.510565163");
        let j = serde_json::to_value(&r9).unwrap();
        assert_eq!(j["N"], 9);
        assert_eq!(j["verdict"], "VIOLATED");
        assert_eq!(j["classicalBound"], 18);
    }

    #[test]
    fn planar_schedule_falls_short() {
        use crate::scenario::AngleSchedule;
        let cfg = ChainedScenarioConfig { n: 3, schedule: AngleSchedule::PlanarMonotone };
        let rep = eval_chain_causal(&build_chained_switch(&cfg).unwrap(), 3).unwrap();
        let expected = 6.0 * (cfg.theta() / 2.0).cos().powi(2);
        assert!((rep.bc_value - expected).abs() < PHYSICAL_TOL);
        assert!(rep.bc_value < chained_closed_form(3) - 0.5);
    }

    proptest! {
        #[test]
        fn bc_never_exceeds_algebraic_max(n in 2usize..6, vals in prop::collection::vec(0.0f64..1.0, 4 * 36)) {
            let k = n + 1;
            let r = Table::from_fn(r_vars(n), |v| {
                let cell = v[2] * k + v[3];
                let w: Vec<f64> = (0..4).map(|o| vals[cell * 4 + o] + 1e-3).collect();
                w[v[0] * 2 + v[1]] / w.iter().sum::<f64>()
            }).unwrap();
            prop_assert!(is_conditional_r(&r));
            prop_assert!(eval_bc(&r, n).unwrap() <= (2 * n + 1) as f64 + 1e-9);
        }
    }
}
