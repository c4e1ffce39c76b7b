//! The concrete experiments, simulated exactly as probability tables.
//!
//! * the plain three-qubit GHZ/Mermin experiment,
//! * three X-controlled switches sharing a GHZ control state,
//! * one Z-controlled switch whose control is Bell-paired with an ancilla,
//!   measured at the chained (Braunstein–Caves) settings.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::channel::{
    bloch_measurement, joint_switch_instrument, x_measurement, y_measurement, ControlBasis, Instrument,
};
use crate::dist::{bits, Event, PossTable, ProbTable, Table, VarSpec, DEFAULT_EPS, TABLE_TOL};
use crate::error::{Error, Result};
use crate::inequality::switch_penalty;
use crate::linalg::{kets, projector, Matrix, SystemLayout};

/// Output and input variable names of the three-switch experiment.
pub const GHZ_SWITCH_OUTPUTS: [&str; 9] = ["a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3"];
pub const GHZ_SWITCH_INPUTS: [&str; 6] = ["x1", "x2", "y1", "y2", "z1", "z2"];

/// Per-switch variable names `(out1, out2, out3, in1, in2)`.
pub const SWITCH_WINGS: [[&str; 5]; 3] =
    [["a1", "a2", "a3", "x1", "x2"], ["b1", "b2", "b3", "y1", "y2"], ["c1", "c2", "c3", "z1", "z2"]];

/// Variable names of the chained experiment.
pub const CHAINED_OUTPUTS: [&str; 4] = ["a1", "a2", "a3", "b"];
pub const CHAINED_INPUTS: [&str; 4] = ["x1", "x2", "x3", "y"];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GhzScenarioConfig {
    /// Weight of white noise mixed into the GHZ control state, in `[0, 1]`.
    pub depolarizing: f64,
}

impl GhzScenarioConfig {
    pub fn noisy(depolarizing: f64) -> Self {
        GhzScenarioConfig { depolarizing }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.depolarizing) {
            return Err(Error::InvalidParameter(format!(
                "depolarizing strength {} is outside [0, 1]",
                self.depolarizing
            )));
        }
        Ok(())
    }

    fn state(&self) -> Matrix {
        let ghz = projector(&kets::ghz3()).expect("GHZ ket is normalized");
        let white = Matrix::identity(8).scale_real(1.0 / 8.0);
        &ghz.scale_real(1.0 - self.depolarizing) + &white.scale_real(self.depolarizing)
    }
}

/// How the chained measurement directions are laid out on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleSchedule {
    /// Neighbouring directions `θ` apart along a spiral from `+Z` that ends
    /// `π − θ` away from its start, which is what the chained closed form
    /// requires.
    #[default]
    Spiral,
    /// `A_j` at `2jθ` and `B_i` at `(2i+1)θ` in the Z–X plane. The last
    /// pair then closes the circle at angle `θ` instead of `π − θ`, so this
    /// schedule falls short of the closed form; kept for comparison.
    PlanarMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainedScenarioConfig {
    pub n: usize,
    pub schedule: AngleSchedule,
}

impl ChainedScenarioConfig {
    pub fn new(n: usize) -> Self {
        ChainedScenarioConfig { n, schedule: AngleSchedule::Spiral }
    }

    pub fn theta(&self) -> f64 {
        std::f64::consts::PI / (self.n + 1) as f64
    }
}

/// Unit Bloch vectors, one per setting.
pub type Directions = Vec<[f64; 3]>;

/// Bloch directions of the chained measurements: `(a_dirs, b_dirs)`, each of
/// length `N + 1`, indexed by `x3` and `y` respectively.
///
/// `b_dirs` are the directions the ancilla is measured along. With a `Φ⁺`
/// pair the correlator is `n_A · D n_B` for `D = diag(1, −1, 1)`, so the
/// ancilla directions are the chain points reflected through the X–Z plane.
pub fn chained_directions(cfg: &ChainedScenarioConfig) -> Result<(Directions, Directions)> {
    let n = cfg.n;
    if n < 2 {
        return Err(Error::InvalidN(n, "the chained experiment needs N >= 2"));
    }
    let theta = cfg.theta();
    let chain: Vec<[f64; 3]> = match cfg.schedule {
        AngleSchedule::PlanarMonotone => (0..2 * n + 2)
            .map(|k| {
                let phi = k as f64 * theta;
                [phi.sin(), 0.0, phi.cos()]
            })
            .collect(),
        AngleSchedule::Spiral => {
            let delta = (std::f64::consts::PI - 2.0 * theta) / (2 * n) as f64;
            let mut pts = vec![[0.0, 0.0, 1.0]];
            let mut azimuth = 0.0;
            let mut prev_polar = theta;
            pts.push([theta.sin(), 0.0, theta.cos()]);
            for k in 2..=2 * n + 1 {
                let polar = theta + (k - 1) as f64 * delta;
                let cos_step = (theta.cos() - prev_polar.cos() * polar.cos()) / (prev_polar.sin() * polar.sin());
                azimuth += cos_step.clamp(-1.0, 1.0).acos();
                pts.push([polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()]);
                prev_polar = polar;
            }
            pts
        }
    };
    let a_dirs = (0..=n).map(|j| chain[2 * j]).collect();
    let b_dirs = (0..=n)
        .map(|i| {
            let [x, y, z] = chain[2 * i + 1];
            [x, -y, z]
        })
        .collect();
    Ok((a_dirs, b_dirs))
}

/// Simulated data: the conditional table of outputs given inputs, the joint
/// table under uniform inputs, and its possibilistic shadow.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioData {
    pub conditional: ProbTable,
    pub joint: ProbTable,
    pub possible: PossTable,
    pub outputs: Vec<String>,
    pub inputs: Vec<String>,
    pub config: Value,
}

impl ScenarioData {
    /// Wraps a conditional table whose variables are `outputs ++ inputs`,
    /// attaching the uniform input distribution.
    pub fn from_conditional(conditional: ProbTable, n_outputs: usize, config: Value) -> Result<Self> {
        let names: Vec<String> = conditional.var_names().iter().map(|s| s.to_string()).collect();
        let (outputs, inputs) = names.split_at(n_outputs);
        let input_vars: Vec<VarSpec> = conditional.vars()[n_outputs..].to_vec();
        let uniform = ProbTable::uniform(input_vars)?;
        let joint = conditional.multiply_by(&uniform)?;
        Ok(ScenarioData {
            possible: joint.possibilize(DEFAULT_EPS),
            conditional,
            joint,
            outputs: outputs.to_vec(),
            inputs: inputs.to_vec(),
            config,
        })
    }

    /// Wraps a joint table, deriving the conditional table from it. Input
    /// cells of zero mass get an all-zero conditional slice.
    pub fn from_joint(joint: ProbTable, inputs: &[&str], config: Value) -> Result<Self> {
        let outputs: Vec<String> =
            joint.var_names().into_iter().filter(|n| !inputs.contains(n)).map(str::to_string).collect();
        let mut order: Vec<&str> = outputs.iter().map(String::as_str).collect();
        order.extend_from_slice(inputs);
        let joint = joint.marginalize(&order)?;
        let marg = joint.marginalize(inputs)?;
        let n_in = marg.len();
        let values = joint
            .values()
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let m = marg.values()[i % n_in];
                if m > TABLE_TOL {
                    p / m
                } else {
                    0.0
                }
            })
            .collect();
        let conditional = Table::new(joint.vars().to_vec(), values)?;
        Ok(ScenarioData {
            possible: joint.possibilize(DEFAULT_EPS),
            conditional,
            joint,
            outputs,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            config,
        })
    }

    /// Re-derives the possibility table with threshold `eps`.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.possible = self.joint.possibilize(eps);
        self
    }

    /// Largest deviation of any input cell's conditional mass from 1.
    pub fn normalization_defect(&self) -> Result<f64> {
        let names: Vec<&str> = self.inputs.iter().map(String::as_str).collect();
        let per_input = self.conditional.marginalize(&names)?;
        Ok(per_input.values().iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> Value {
        let mut table = self.joint.to_json();
        table["config"] = self.config.clone();
        table
    }
}

impl Serialize for ScenarioData {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

/// Applies one instrument per subsystem in turn and records the Born weight
/// of every outcome combination that can occur. `sink` receives the concatenated outcome
/// tuple and its probability.
fn born_table(
    rho: &Matrix,
    layout: &SystemLayout,
    parts: &[(&str, &Instrument)],
    sink: &mut impl FnMut(&[u8], f64),
) -> Result<()> {
    fn go(
        rho: &Matrix,
        layout: &SystemLayout,
        parts: &[(&str, &Instrument)],
        prefix: &mut Vec<u8>,
        sink: &mut impl FnMut(&[u8], f64),
    ) -> Result<()> {
        let Some(((label, inst), rest)) = parts.split_first() else {
            sink(prefix, rho.trace().re);
            return Ok(());
        };
        for (o, m) in inst.branches() {
            let len = prefix.len();
            prefix.extend_from_slice(o);
            // Zero branches leave their cells at the table's initial zero.
            if !m.is_zero() {
                let (next, next_layout) = m.apply_on(rho, layout, label)?;
                go(&next, &next_layout, rest, prefix, sink)?;
            }
            prefix.truncate(len);
        }
        Ok(())
    }

    go(rho, layout, parts, &mut Vec::new(), sink)
}

fn bits_to_index(bits: impl IntoIterator<Item = usize>) -> usize {
    bits.into_iter().fold(0, |acc, b| acc * 2 + b)
}

/// The plain GHZ experiment: outputs `a, b, c`, inputs `x, y, z`, where
/// input 0 measures Y and input 1 measures X.
pub fn build_ghz_mermin(cfg: &GhzScenarioConfig) -> Result<ScenarioData> {
    cfg.validate()?;
    let rho = cfg.state();
    let layout = SystemLayout::qubits(["A", "B", "C"])?;
    let meas = [y_measurement(), x_measurement()];
    let mut values = vec![0.0; 64];
    for x in 0..2usize {
        for y in 0..2usize {
            for z in 0..2usize {
                let parts = [("A", &meas[x]), ("B", &meas[y]), ("C", &meas[z])];
                born_table(&rho, &layout, &parts, &mut |o, p| {
                    let idx = bits_to_index(o.iter().map(|&b| b as usize).chain([x, y, z]));
                    values[idx] = p;
                })?;
            }
        }
    }
    let table = Table::new(bits(["a", "b", "c", "x", "y", "z"]), values)?;
    ScenarioData::from_conditional(table, 3, json!({ "scenario": "ghz_mermin", "depolarizing": cfg.depolarizing }))
}

/// Three X-controlled switches on a shared GHZ control state; every switch's
/// target starts in `|0⟩` and its control is finally measured in the Y basis.
pub fn build_ghz_three_switch(cfg: &GhzScenarioConfig) -> Result<ScenarioData> {
    cfg.validate()?;
    let rho = cfg.state();
    let layout = SystemLayout::qubits(["CA", "CB", "CC"])?;
    let target = projector(&kets::zero())?;
    let final_meas = y_measurement();
    let wings = (0..4u8)
        .map(|x| joint_switch_instrument(x >> 1, x & 1, &final_meas, ControlBasis::XBasis, &target))
        .collect::<Result<Vec<_>>>()?;

    let mut values = vec![0.0; 1 << 15];
    for xa in 0..4usize {
        for xb in 0..4usize {
            for xc in 0..4usize {
                let parts = [("CA", &wings[xa]), ("CB", &wings[xb]), ("CC", &wings[xc])];
                let setting = (xa << 4) | (xb << 2) | xc;
                born_table(&rho, &layout, &parts, &mut |o, p| {
                    let out = bits_to_index(o.iter().map(|&b| b as usize));
                    values[(out << 6) | setting] = p;
                })?;
            }
        }
    }
    let vars = bits(GHZ_SWITCH_OUTPUTS.into_iter().chain(GHZ_SWITCH_INPUTS));
    let table = Table::new(vars, values)?;
    ScenarioData::from_conditional(
        table,
        9,
        json!({
            "scenario": "ghz_three_switch",
            "control_basis": ControlBasis::XBasis,
            "final_measurement": "y",
            "target_init": "|0>",
            "depolarizing": cfg.depolarizing,
        }),
    )
}

/// One single-switch Z-controlled experiment whose control is half of a
/// `Φ⁺` pair. Outputs `a1, a2, a3, b`; inputs `x1, x2` (switch agents),
/// `x3` (control measurement) and `y` (ancilla measurement), the last two
/// ranging over `0..=N`.
pub fn build_chained_switch(cfg: &ChainedScenarioConfig) -> Result<ScenarioData> {
    let (a_dirs, b_dirs) = chained_directions(cfg)?;
    let n = cfg.n;
    let k = n + 1;
    let rho = projector(&kets::phi_plus())?;
    let layout = SystemLayout::qubits(["C", "B"])?;
    let target = projector(&kets::zero())?;
    let b_meas = b_dirs.iter().map(|&d| bloch_measurement(d)).collect::<Result<Vec<_>>>()?;

    let vars = vec![
        VarSpec::bit("a1"),
        VarSpec::bit("a2"),
        VarSpec::bit("a3"),
        VarSpec::bit("b"),
        VarSpec::bit("x1"),
        VarSpec::bit("x2"),
        VarSpec::new("x3", k),
        VarSpec::new("y", k),
    ];
    let mut values = vec![0.0; 16 * 4 * k * k];
    for x1 in 0..2u8 {
        for x2 in 0..2u8 {
            for (x3, dir) in a_dirs.iter().enumerate() {
                let wing = joint_switch_instrument(x1, x2, &bloch_measurement(*dir)?, ControlBasis::ZBasis, &target)?;
                for (y, bm) in b_meas.iter().enumerate() {
                    let parts = [("C", &wing), ("B", bm)];
                    let setting = ((x1 as usize * 2 + x2 as usize) * k + x3) * k + y;
                    born_table(&rho, &layout, &parts, &mut |o, p| {
                        let out = bits_to_index(o.iter().map(|&b| b as usize));
                        values[out * 4 * k * k + setting] = p;
                    })?;
                }
            }
        }
    }
    let table = Table::new(vars, values)?;
    ScenarioData::from_conditional(
        table,
        4,
        json!({
            "scenario": "chained_switch",
            "n": n,
            "schedule": cfg.schedule,
            "control_basis": ControlBasis::ZBasis,
            "shared_state": "phi_plus",
            "target_init": "|0>",
        }),
    )
}

/// The data restriction used by the chained inequality: `R(a, b | x3, y)`
/// reads `a1` at `x1 = x2 = 1` when `x3 = 0` and `a3` at `x1 = x2 = 0`
/// otherwise. Also returns the switch penalty `α`.
pub fn restrict_chained(d: &ScenarioData, n: usize) -> Result<(ProbTable, f64)> {
    let cond = &d.conditional;
    let k = n + 1;
    if cond.card("x3")? != k || cond.card("y")? != k {
        return Err(Error::InvalidN(n, "does not match the scenario's setting count"));
    }
    let r_vars = vec![VarSpec::bit("a"), VarSpec::bit("b"), VarSpec::new("x3", k), VarSpec::new("y", k)];
    let ab = cond.marginalize(&["a1", "a3", "b", "x1", "x2", "x3", "y"])?;
    let r = Table::from_fn(r_vars, |v| {
        let (a, b, x3, y) = (v[0], v[1], v[2], v[3]);
        let mut p = 0.0;
        for other in 0..2 {
            let cell = if x3 == 0 { [a, other, b, 1, 1, x3, y] } else { [other, a, b, 0, 0, x3, y] };
            p += ab.at(&cell).expect("cell within range");
        }
        p
    })?;
    let alpha = switch_penalty(&d.joint, ["a1", "a2", "x1", "x2"])?;
    Ok((r, alpha))
}

/// Outcome of one data condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    /// Probability mass of the cells that would violate the condition.
    #[serde(serialize_with = "crate::report::r9")]
    pub violating_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DataConditionReport {
    pub conditions: Vec<ConditionCheck>,
    pub all_pass: bool,
}

impl DataConditionReport {
    fn new(conditions: Vec<ConditionCheck>) -> Self {
        let all_pass = conditions.iter().all(|c| c.pass);
        DataConditionReport { conditions, all_pass }
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.conditions.iter().filter(|c| !c.pass)
    }
}

fn implication_check(d: &ScenarioData, name: String, antecedent: Event, consequent: Event) -> Result<ConditionCheck> {
    let pass = d.possible.check_implication(&antecedent, &consequent)?;
    let violating_mass = d.joint.prob(&antecedent.and(consequent.not()))?;
    let detail = format!("violating mass {violating_mass:.3e}");
    Ok(ConditionCheck { name, pass, detail, violating_mass })
}

fn impossibility_check(d: &ScenarioData, name: String, event: Event) -> Result<ConditionCheck> {
    let pass = !d.possible.is_possible(&event)?;
    let violating_mass = d.joint.prob(&event)?;
    let detail = format!("mass {violating_mass:.3e}");
    Ok(ConditionCheck { name, pass, detail, violating_mass })
}

/// The four GHZ parity implications on a table with variables
/// `a, b, c, x, y, z`.
pub fn verify_ghz_parities(d: &ScenarioData) -> Result<DataConditionReport> {
    let rows = [([1, 1, 1], 0u8), ([1, 0, 0], 1), ([0, 1, 0], 1), ([0, 0, 1], 1)];
    let checks = rows
        .iter()
        .map(|&(s, t)| {
            implication_check(
                d,
                format!("xyz={}{}{} => a^b^c={t}", s[0], s[1], s[2]),
                Event::assign_all(["x", "y", "z"], &s),
                Event::parity(["a", "b", "c"], t),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DataConditionReport::new(checks))
}

/// The four parity implications of the three-switch data, with the
/// outputs that simulate each measurement: `*1` at setting 11, `*3` at 00.
pub fn switch_parity_rows() -> [([usize; 3], u8); 4] {
    [([1, 1, 1], 0), ([1, 0, 0], 1), ([0, 1, 0], 1), ([0, 0, 1], 1)]
}

fn switch_parity_event(setting: [usize; 3], target: u8) -> (String, Event, Event) {
    let mut ante = Vec::new();
    let mut outs = Vec::new();
    let mut label = String::new();
    for (w, &s) in SWITCH_WINGS.iter().zip(&setting) {
        ante.push((w[3], s));
        ante.push((w[4], s));
        let out = if s == 1 { w[0] } else { w[2] };
        outs.push(out);
        label.push_str(if s == 1 { "1" } else { "0" });
    }
    let name = format!("settings {label} => {}={target}", outs.join("^"));
    (name, Event::assign(ante), Event::parity(outs, target))
}

/// All 13 data conditions of the three-switch experiment: the 4 parity
/// implications and, per switch, the 3 zero conditions that pin down the
/// agents' causal roles.
pub fn verify_switch_data_conditions(d: &ScenarioData) -> Result<DataConditionReport> {
    let mut checks = Vec::with_capacity(13);
    for (setting, target) in switch_parity_rows() {
        let (name, ante, cons) = switch_parity_event(setting, target);
        checks.push(implication_check(d, name, ante, cons)?);
    }
    for (label, w) in ["A", "B", "C"].iter().zip(SWITCH_WINGS) {
        let [o1, o2, _, i1, i2] = w;
        checks.push(impossibility_check(
            d,
            format!("{label}: {o1}=1 with {i2}=0 impossible"),
            Event::assign([(o1, 1), (i2, 0)]),
        )?);
        checks.push(impossibility_check(
            d,
            format!("{label}: {o2}=1 with {i1}=0 impossible"),
            Event::assign([(o2, 1), (i1, 0)]),
        )?);
        checks.push(impossibility_check(
            d,
            format!("{label}: {o1}={o2}=0 with {i1}={i2}=1 impossible"),
            Event::assign([(o1, 0), (o2, 0), (i1, 1), (i2, 1)]),
        )?);
    }
    Ok(DataConditionReport::new(checks))
}

/// The single-switch marginal `(a1, a2, x1, x2)` of wing `wing` (0, 1, 2
/// for A, B, C), renamed to the A-wing variable names.
pub fn switch_marginal(d: &ScenarioData, wing: usize) -> Result<ProbTable> {
    let [o1, o2, _, i1, i2] = SWITCH_WINGS.get(wing).ok_or_else(|| Error::IndexOutOfRange(format!("switch {wing}")))?;
    d.joint.marginalize(&[o1, o2, i1, i2])?.rename(&[(o1, "a1"), (o2, "a2"), (i1, "x1"), (i2, "x2")])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PHYSICAL_TOL;

    fn noiseless() -> ScenarioData {
        build_ghz_three_switch(&GhzScenarioConfig::default()).unwrap()
    }

    fn ones<'a>(names: &[&'a str]) -> Vec<(&'a str, usize)> {
        names.iter().map(|n| (*n, 1)).collect()
    }

    #[test]
    fn ghz_mermin_parities_hold() {
        let d = build_ghz_mermin(&GhzScenarioConfig::default()).unwrap();
        let rep = verify_ghz_parities(&d).unwrap();
        assert!(rep.all_pass, "{rep:?}");
        assert!(rep.conditions.iter().all(|c| c.violating_mass < 1e-12));
        assert!(d.normalization_defect().unwrap() < PHYSICAL_TOL);
        let wrong = d
            .possible
            .check_implication(&Event::assign([("x", 1), ("y", 1), ("z", 1)]), &Event::parity(["a", "b", "c"], 1))
            .unwrap();
        assert!(!wrong);
    }

    #[test]
    fn ghz_outcomes_depend_on_settings() {
        let d = build_ghz_mermin(&GhzScenarioConfig::default()).unwrap();
        let rep =
            d.possible.check_independence(&["a", "b", "c"], &["x", "y", "z"], crate::dist::Given::Nothing).unwrap();
        assert!(!rep.independent);
    }

    #[test]
    fn three_switch_basic_values() {
        let d = noiseless();
        assert_eq!(d.joint.len(), 1 << 15);
        assert!(d.normalization_defect().unwrap() < PHYSICAL_TOL);
        assert!((d.joint.total() - 1.0).abs() < PHYSICAL_TOL);
        let all_ones = ones(&GHZ_SWITCH_INPUTS);
        let c = d.joint.condition(&all_ones).unwrap();
        let p = c.prob(&Event::parity(["a1", "b1", "c1"], 0)).unwrap();
        assert!((p - 1.0).abs() < PHYSICAL_TOL);
        let leak = d.joint.prob(&Event::assign([("a1", 1), ("x2", 0)])).unwrap();
        assert!(leak.abs() < 1e-12);
        let inputs = d.joint.marginalize(&GHZ_SWITCH_INPUTS).unwrap();
        assert!(inputs.values().iter().all(|&p| (p - 1.0 / 64.0).abs() < PHYSICAL_TOL));
    }

    #[test]
    fn all_thirteen_conditions_pass_without_noise() {
        let rep = verify_switch_data_conditions(&noiseless()).unwrap();
        assert_eq!(rep.conditions.len(), 13);
        assert!(rep.all_pass, "{:?}", rep.failures().collect::<Vec<_>>());
        assert!(rep.conditions.iter().all(|c| c.violating_mass < 1e-12));
    }

    #[test]
    fn noise_breaks_only_parities() {
        let d = build_ghz_three_switch(&GhzScenarioConfig::noisy(0.5)).unwrap();
        let rep = verify_switch_data_conditions(&d).unwrap();
        assert!(rep.conditions[..4].iter().all(|c| !c.pass && c.violating_mass > 1e-3));
        assert!(rep.conditions[4..].iter().all(|c| c.pass));
    }

    #[test]
    fn fully_mixed_control_gives_fair_y_outcomes() {
        let d = build_ghz_three_switch(&GhzScenarioConfig::noisy(1.0)).unwrap();
        for ys in [[0, 0, 0, 0], [1, 0, 1, 1], [1, 1, 0, 1]] {
            let given = [("x1", 0), ("x2", 0), ("y1", ys[0]), ("y2", ys[1]), ("z1", ys[2]), ("z2", ys[3])];
            let p = d.joint.condition(&given).unwrap().prob(&Event::assign([("a3", 0)])).unwrap();
            assert!((p - 0.5).abs() < PHYSICAL_TOL);
        }
    }

    #[test]
    fn invalid_noise_rejected() {
        assert!(build_ghz_three_switch(&GhzScenarioConfig::noisy(1.5)).is_err());
        assert!(build_ghz_mermin(&GhzScenarioConfig::noisy(-0.1)).is_err());
    }

    #[test]
    fn hand_built_negative_fails_exactly_one_condition() {
        // Start from the real data, then move a sliver of mass at
        // (x1=0, a2=0) onto a2=1 so only "a2=1 with x1=0" breaks.
        let d = noiseless();
        let j = &d.joint;
        let a2 = j.index_of("a2").unwrap();
        let x1 = j.index_of("x1").unwrap();
        let mut values = j.values().to_vec();
        let mut moved = false;
        j.for_each_cell(|a, p| {
            if !moved && a[a2] == 0 && a[x1] == 0 && p > 1e-3 {
                let mut b = a.to_vec();
                b[a2] = 1;
                let from = j.flat_index(a).unwrap();
                let to = j.flat_index(&b).unwrap();
                values[from] -= 1e-3;
                values[to] += 1e-3;
                moved = true;
            }
        });
        let broken = Table::new(j.vars().to_vec(), values).unwrap();
        let bd = ScenarioData::from_joint(broken, &GHZ_SWITCH_INPUTS, Value::Null).unwrap();
        let rep = verify_switch_data_conditions(&bd).unwrap();
        let failed: Vec<_> = rep.failures().map(|c| c.name.as_str()).collect();
        assert_eq!(failed, ["A: a2=1 with x1=0 impossible"]);
    }

    #[test]
    fn invariant_under_switch_relabelling() {
        let d = noiseless();
        // Rotate A -> B -> C -> A.
        let perm = [1usize, 2, 0];
        let mut order = Vec::new();
        for &w in &perm {
            order.extend_from_slice(&SWITCH_WINGS[w][..3]);
        }
        for &w in &perm {
            order.extend_from_slice(&SWITCH_WINGS[w][3..]);
        }
        let rotated = d.joint.marginalize(&order).unwrap();
        let renamed = Table::new(d.joint.vars().to_vec(), rotated.values().to_vec()).unwrap();
        assert!(renamed.max_abs_diff(&d.joint).unwrap() < 1e-12);
    }

    #[test]
    fn per_switch_marginals_meet_zero_conditions() {
        let d = noiseless();
        for w in 0..3 {
            let m = switch_marginal(&d, w).unwrap();
            assert_eq!(m.var_names(), ["a1", "a2", "x1", "x2"]);
            assert!(m.prob(&Event::assign([("a1", 1), ("x2", 0)])).unwrap() < 1e-12);
            assert!(m.prob(&Event::assign([("a2", 1), ("x1", 0)])).unwrap() < 1e-12);
            assert!(m.prob(&Event::assign([("a1", 0), ("a2", 0), ("x1", 1), ("x2", 1)])).unwrap() < 1e-12);
        }
    }

    #[test]
    fn observations_on_reduced_control() {
        // Reduced GHZ control is I/2: Y and X outcomes are fair coins.
        let d = noiseless();
        let zeros = [("x1", 0), ("x2", 0), ("y1", 1), ("y2", 0), ("z1", 0), ("z2", 1)];
        let p = d.joint.condition(&zeros).unwrap().prob(&Event::assign([("a3", 0)])).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let ones_ = [("x1", 1), ("x2", 1), ("y1", 0), ("y2", 0), ("z1", 1), ("z2", 0)];
        let p = d.joint.condition(&ones_).unwrap().prob(&Event::assign([("a1", 0)])).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    fn angle_between(u: [f64; 3], v: [f64; 3]) -> f64 {
        let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        dot.clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn spiral_schedule_geometry() {
        for n in 2..12 {
            let cfg = ChainedScenarioConfig::new(n);
            let (a, b) = chained_directions(&cfg).unwrap();
            let theta = cfg.theta();
            let unflip = |v: [f64; 3]| [v[0], -v[1], v[2]];
            assert_eq!(a[0], [0.0, 0.0, 1.0]);
            for i in 0..=n {
                assert!((angle_between(a[i], unflip(b[i])) - theta).abs() < 1e-12);
                if i < n {
                    assert!((angle_between(a[i + 1], unflip(b[i])) - theta).abs() < 1e-12);
                }
            }
            let closing = angle_between(a[0], unflip(b[n]));
            assert!((closing - (std::f64::consts::PI - theta)).abs() < 1e-12);
        }
        assert!(matches!(chained_directions(&ChainedScenarioConfig::new(1)), Err(Error::InvalidN(1, _))));
    }

    #[test]
    fn chained_scenario_basics() {
        let cfg = ChainedScenarioConfig::new(2);
        let d = build_chained_switch(&cfg).unwrap();
        assert!(d.normalization_defect().unwrap() < PHYSICAL_TOL);
        let p = d.joint.cond_prob(&Event::assign([("a1", 1)]), &Event::assign([("x1", 1), ("x2", 0)])).unwrap();
        assert!(p.abs() < 1e-12);
        let theta = cfg.theta();
        for i in 0..=2 {
            let given = Event::assign([("x1", 0), ("x2", 0), ("x3", i), ("y", i)]);
            let p = d.joint.cond_prob(&Event::parity(["a3", "b"], 0), &given).unwrap();
            assert!((p - (theta / 2.0).cos().powi(2)).abs() < PHYSICAL_TOL);
            assert!((p - 0.75).abs() < PHYSICAL_TOL);
        }
    }

    #[test]
    fn restriction_normalizes_and_alpha_vanishes() {
        for n in [2, 3, 5] {
            let cfg = ChainedScenarioConfig::new(n);
            let d = build_chained_switch(&cfg).unwrap();
            let (r, alpha) = restrict_chained(&d, n).unwrap();
            assert!(alpha.abs() < 1e-12);
            let per = r.marginalize(&["x3", "y"]).unwrap();
            assert!(per.values().iter().all(|m| (m - 1.0).abs() < PHYSICAL_TOL));
            let eq = r.get(&[("a", 0), ("b", 0), ("x3", 0), ("y", 0)]).unwrap()
                + r.get(&[("a", 1), ("b", 1), ("x3", 0), ("y", 0)]).unwrap();
            assert!((eq - (cfg.theta() / 2.0).cos().powi(2)).abs() < PHYSICAL_TOL);
            assert!(matches!(restrict_chained(&d, n + 1), Err(Error::InvalidN(..))));
        }
    }

    #[test]
    fn scenario_json_has_config_block() {
        let d = build_ghz_mermin(&GhzScenarioConfig::default()).unwrap();
        let j = serde_json::to_value(&d).unwrap();
        assert_eq!(j["config"]["scenario"], "ghz_mermin");
        assert_eq!(j["vars"].as_array().unwrap().len(), 6);
        assert_eq!(j["values"].as_array().unwrap().len(), 64);
    }
}
