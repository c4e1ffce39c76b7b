//! Dense joint tables over named finite variables.
//!
//! One generic [`Table`] serves both semantics: real probabilities
//! ([`ProbTable`]) and Boolean possibilities ([`PossTable`]), the latter being
//! the same algebra over the semiring `({0,1}, ∨, ∧)`. Cells are stored in
//! mixed-radix order with the first variable most significant.

use std::fmt::Debug;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::report::round9;

/// Default threshold separating simulated zeros from genuine probabilities.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Absolute tolerance for factorization defects and vanishing masses.
pub const TABLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarSpec {
    pub name: String,
    pub card: usize,
}

impl VarSpec {
    pub fn new(name: impl Into<String>, card: usize) -> Self {
        VarSpec { name: name.into(), card }
    }

    pub fn bit(name: impl Into<String>) -> Self {
        VarSpec::new(name, 2)
    }
}

/// Shorthand for a list of binary variables.
pub fn bits<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<VarSpec> {
    names.into_iter().map(VarSpec::bit).collect()
}

/// Commutative semiring of cell values.
pub trait Weight: Copy + PartialEq + Debug + Send + Sync + 'static {
    const ZERO: Self;
    const ONE: Self;
    fn add(self, other: Self) -> Self;
    fn mul(self, other: Self) -> Self;
    fn is_zero(self) -> bool;
    /// Factorization defect of one `(a, b, c)` cell given the masses
    /// `p(abc)`, `p(ac)`, `p(bc)`, `p(c)`.
    fn independence_defect(abc: Self, ac: Self, bc: Self, c: Self) -> f64;
    fn to_json(self) -> Value;
    fn from_json(v: &Value) -> Option<Self>;
}

impl Weight for f64 {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;

    fn add(self, other: f64) -> f64 {
        self + other
    }

    fn mul(self, other: f64) -> f64 {
        self * other
    }

    fn is_zero(self) -> bool {
        self == 0.0
    }

    fn independence_defect(abc: f64, ac: f64, bc: f64, c: f64) -> f64 {
        if c <= TABLE_TOL {
            return 0.0;
        }
        (abc / c - (ac / c) * (bc / c)).abs()
    }

    fn to_json(self) -> Value {
        Value::from(round9(self))
    }

    fn from_json(v: &Value) -> Option<f64> {
        v.as_f64()
    }
}

impl Weight for bool {
    const ZERO: bool = false;
    const ONE: bool = true;

    fn add(self, other: bool) -> bool {
        self || other
    }

    fn mul(self, other: bool) -> bool {
        self && other
    }

    fn is_zero(self) -> bool {
        !self
    }

    fn independence_defect(abc: bool, ac: bool, bc: bool, _c: bool) -> f64 {
        if abc != (ac && bc) {
            1.0
        } else {
            0.0
        }
    }

    fn to_json(self) -> Value {
        Value::from(u8::from(self))
    }

    fn from_json(v: &Value) -> Option<bool> {
        match v.as_u64()? {
            0 => Some(false),
            1 => Some(true),
            _ => None,
        }
    }
}

/// A predicate on full assignments, referring to variables by name.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// Every listed variable takes the given value.
    Assign(Vec<(String, usize)>),
    /// XOR of the listed binary variables equals `target`.
    Parity {
        vars: Vec<String>,
        target: u8,
    },
    /// Conjunction; the empty conjunction is always true.
    All(Vec<Event>),
    Not(Box<Event>),
}

impl Event {
    pub fn assign<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Event {
        Event::Assign(pairs.into_iter().map(|(n, v)| (n.to_string(), v)).collect())
    }

    /// Assigns `values` to `names` position by position.
    pub fn assign_all<'a>(names: impl IntoIterator<Item = &'a str>, values: &[usize]) -> Event {
        Event::assign(names.into_iter().zip(values.iter().copied()))
    }

    pub fn parity<'a>(vars: impl IntoIterator<Item = &'a str>, target: u8) -> Event {
        Event::Parity { vars: vars.into_iter().map(str::to_string).collect(), target: target & 1 }
    }

    pub fn always() -> Event {
        Event::All(Vec::new())
    }

    pub fn and(self, other: Event) -> Event {
        match self {
            Event::All(mut v) => {
                v.push(other);
                Event::All(v)
            }
            e => Event::All(vec![e, other]),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Event {
        Event::Not(Box::new(self))
    }
}

/// An [`Event`] resolved against a table's variable order.
#[derive(Debug, Clone)]
pub enum CompiledEvent {
    Assign(Vec<(usize, usize)>),
    Parity { idx: Vec<usize>, target: usize },
    All(Vec<CompiledEvent>),
    Not(Box<CompiledEvent>),
}

impl CompiledEvent {
    pub fn holds(&self, assignment: &[usize]) -> bool {
        match self {
            CompiledEvent::Assign(p) => p.iter().all(|&(i, v)| assignment[i] == v),
            CompiledEvent::Parity { idx, target } => idx.iter().fold(0, |acc, &i| acc ^ assignment[i]) == *target,
            CompiledEvent::All(es) => es.iter().all(|e| e.holds(assignment)),
            CompiledEvent::Not(e) => !e.holds(assignment),
        }
    }
}

/// What the independence check conditions on.
#[derive(Debug, Clone, Copy)]
pub enum Given<'a> {
    Nothing,
    /// Every value of these variables.
    Vars(&'a [&'a str]),
    /// One specific cell.
    Assignment(&'a [(&'a str, usize)]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub independent: bool,
    pub max_defect: f64,
}

/// Both sides of `Σ P(Aᵢ) ≤ P(A₁…Aₙ) + n − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table<V> {
    vars: Vec<VarSpec>,
    strides: Vec<usize>,
    values: Vec<V>,
}

pub type ProbTable = Table<f64>;
pub type PossTable = Table<bool>;

fn strides_for(vars: &[VarSpec]) -> Vec<usize> {
    let mut strides = vec![1; vars.len()];
    for i in (0..vars.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * vars[i + 1].card;
    }
    strides
}

fn grid_size(vars: &[VarSpec]) -> usize {
    vars.iter().map(|v| v.card).product()
}

fn validate_vars(vars: &[VarSpec]) -> Result<()> {
    for (i, v) in vars.iter().enumerate() {
        if v.card == 0 {
            return Err(Error::MalformedTable(format!("variable `{}` has cardinality 0", v.name)));
        }
        if vars[..i].iter().any(|w| w.name == v.name) {
            return Err(Error::DuplicateVariable(v.name.clone()));
        }
    }
    Ok(())
}

/// Calls `f(flat_index, assignment)` for every cell of the grid, in order.
pub fn for_each_assignment(vars: &[VarSpec], mut f: impl FnMut(usize, &[usize])) {
    let n = grid_size(vars);
    let mut digits = vec![0usize; vars.len()];
    for flat in 0..n {
        f(flat, &digits);
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < vars[k].card {
                break;
            }
            digits[k] = 0;
        }
    }
}

impl<V: Weight> Table<V> {
    pub fn new(vars: Vec<VarSpec>, values: Vec<V>) -> Result<Self> {
        validate_vars(&vars)?;
        let n = grid_size(&vars);
        if values.len() != n {
            return Err(Error::MalformedTable(format!("{} values for a grid of {n} cells", values.len())));
        }
        Ok(Table { strides: strides_for(&vars), vars, values })
    }

    pub fn from_fn(vars: Vec<VarSpec>, mut f: impl FnMut(&[usize]) -> V) -> Result<Self> {
        validate_vars(&vars)?;
        let mut values = Vec::with_capacity(grid_size(&vars));
        for_each_assignment(&vars, |_, a| values.push(f(a)));
        Ok(Table { strides: strides_for(&vars), vars, values })
    }

    pub fn filled(vars: Vec<VarSpec>, value: V) -> Result<Self> {
        Table::from_fn(vars, |_| value)
    }

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.vars.iter().position(|v| v.name == name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn has_var(&self, name: &str) -> bool {
        self.vars.iter().any(|v| v.name == name)
    }

    pub fn card(&self, name: &str) -> Result<usize> {
        Ok(self.vars[self.index_of(name)?].card)
    }

    pub fn flat_index(&self, assignment: &[usize]) -> Result<usize> {
        if assignment.len() != self.vars.len() {
            return Err(Error::DimensionMismatch(format!(
                "assignment has {} entries, table has {} variables",
                assignment.len(),
                self.vars.len()
            )));
        }
        let mut idx = 0;
        for ((v, s), &a) in self.vars.iter().zip(&self.strides).zip(assignment) {
            if a >= v.card {
                return Err(Error::ValueOutOfRange { name: v.name.clone(), card: v.card, value: a });
            }
            idx += s * a;
        }
        Ok(idx)
    }

    pub fn assignment(&self, flat: usize) -> Vec<usize> {
        self.vars.iter().zip(&self.strides).map(|(v, s)| (flat / s) % v.card).collect()
    }

    /// Value at a full assignment, given in table variable order.
    pub fn at(&self, assignment: &[usize]) -> Result<V> {
        Ok(self.values[self.flat_index(assignment)?])
    }

    /// Value at a full assignment given by name.
    pub fn get(&self, named: &[(&str, usize)]) -> Result<V> {
        let mut a = vec![usize::MAX; self.vars.len()];
        for &(n, v) in named {
            a[self.index_of(n)?] = v;
        }
        if let Some(i) = a.iter().position(|&v| v == usize::MAX) {
            return Err(Error::InvalidParameter(format!("no value given for `{}`", self.vars[i].name)));
        }
        self.at(&a)
    }

    pub fn for_each_cell(&self, mut f: impl FnMut(&[usize], V)) {
        for_each_assignment(&self.vars, |i, a| f(a, self.values[i]));
    }

    pub fn compile(&self, event: &Event) -> Result<CompiledEvent> {
        Ok(match event {
            Event::Assign(pairs) => CompiledEvent::Assign(
                pairs
                    .iter()
                    .map(|(n, v)| {
                        let i = self.index_of(n)?;
                        if *v >= self.vars[i].card {
                            return Err(Error::ValueOutOfRange { name: n.clone(), card: self.vars[i].card, value: *v });
                        }
                        Ok((i, *v))
                    })
                    .collect::<Result<_>>()?,
            ),
            Event::Parity { vars, target } => CompiledEvent::Parity {
                idx: vars
                    .iter()
                    .map(|n| {
                        let i = self.index_of(n)?;
                        if self.vars[i].card != 2 {
                            return Err(Error::NonBinaryParity(n.clone()));
                        }
                        Ok(i)
                    })
                    .collect::<Result<_>>()?,
                target: usize::from(*target & 1),
            },
            Event::All(es) => CompiledEvent::All(es.iter().map(|e| self.compile(e)).collect::<Result<_>>()?),
            Event::Not(e) => CompiledEvent::Not(Box::new(self.compile(e)?)),
        })
    }

    /// Semiring sum of the cells satisfying `event`.
    pub fn mass(&self, event: &Event) -> Result<V> {
        let ev = self.compile(event)?;
        let mut acc = V::ZERO;
        self.for_each_cell(|a, v| {
            if ev.holds(a) {
                acc = acc.add(v);
            }
        });
        Ok(acc)
    }

    pub fn total(&self) -> V {
        self.values.iter().fold(V::ZERO, |acc, &v| acc.add(v))
    }

    /// Sums out every variable not in `keep`; the result lists `keep` in the
    /// given order.
    pub fn marginalize(&self, keep: &[&str]) -> Result<Table<V>> {
        let idx = keep.iter().map(|n| self.index_of(n)).collect::<Result<Vec<_>>>()?;
        for (i, n) in keep.iter().enumerate() {
            if keep[..i].contains(n) {
                return Err(Error::DuplicateVariable(n.to_string()));
            }
        }
        let vars: Vec<VarSpec> = idx.iter().map(|&i| self.vars[i].clone()).collect();
        let out_strides = strides_for(&vars);
        let mut target_stride = vec![0usize; self.vars.len()];
        for (k, &i) in idx.iter().enumerate() {
            target_stride[i] = out_strides[k];
        }
        let mut values = vec![V::ZERO; grid_size(&vars)];
        self.for_each_cell(|a, v| {
            let t: usize = a.iter().zip(&target_stride).map(|(x, s)| x * s).sum();
            values[t] = values[t].add(v);
        });
        Ok(Table { vars, strides: out_strides, values })
    }

    /// Keeps every variable except those listed.
    pub fn sum_out(&self, drop: &[&str]) -> Result<Table<V>> {
        for n in drop {
            self.index_of(n)?;
        }
        let keep: Vec<&str> = self.vars.iter().map(|v| v.name.as_str()).filter(|n| !drop.contains(n)).collect();
        self.marginalize(&keep)
    }

    pub fn rename(&self, map: &[(&str, &str)]) -> Result<Table<V>> {
        let mut vars = self.vars.clone();
        for &(from, to) in map {
            let i = self.index_of(from)?;
            vars[i].name = to.to_string();
        }
        validate_vars(&vars)?;
        Ok(Table { vars, strides: self.strides.clone(), values: self.values.clone() })
    }

    /// Outer product with a table on disjoint variables.
    pub fn product(&self, other: &Table<V>) -> Result<Table<V>> {
        if let Some(v) = other.vars.iter().find(|v| self.has_var(&v.name)) {
            return Err(Error::OverlappingSets(v.name.clone()));
        }
        let mut vars = self.vars.clone();
        vars.extend(other.vars.iter().cloned());
        let mut values = Vec::with_capacity(self.len() * other.len());
        for &a in &self.values {
            for &b in &other.values {
                values.push(a.mul(b));
            }
        }
        Ok(Table { strides: strides_for(&vars), vars, values })
    }

    /// Multiplies cellwise by a table over a subset of this table's variables.
    pub fn multiply_by(&self, factor: &Table<V>) -> Result<Table<V>> {
        let idx = factor
            .vars
            .iter()
            .map(|v| {
                let i = self.index_of(&v.name)?;
                if self.vars[i].card != v.card {
                    return Err(Error::DimensionMismatch(format!(
                        "`{}` has cardinality {} here and {} in the factor",
                        v.name, self.vars[i].card, v.card
                    )));
                }
                Ok(i)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut values = Vec::with_capacity(self.len());
        self.for_each_cell(|a, v| {
            let f: usize = idx.iter().zip(&factor.strides).map(|(&i, s)| a[i] * s).sum();
            values.push(v.mul(factor.values[f]));
        });
        Ok(Table { vars: self.vars.clone(), strides: self.strides.clone(), values })
    }

    /// Checks `xs ⫫ ys | given` cell by cell.
    pub fn check_independence(&self, xs: &[&str], ys: &[&str], given: Given<'_>) -> Result<IndependenceReport> {
        let (cs, fixed): (Vec<&str>, Option<Vec<usize>>) = match given {
            Given::Nothing => (Vec::new(), None),
            Given::Vars(v) => (v.to_vec(), None),
            Given::Assignment(pairs) => {
                (pairs.iter().map(|p| p.0).collect(), Some(pairs.iter().map(|p| p.1).collect()))
            }
        };
        for (i, n) in xs.iter().chain(ys).chain(&cs).enumerate() {
            self.index_of(n)?;
            if xs.iter().chain(ys).chain(&cs).take(i).any(|m| m == n) {
                return Err(Error::OverlappingSets(n.to_string()));
            }
        }
        let nx = xs.len();
        let ny = ys.len();
        let all: Vec<&str> = xs.iter().chain(ys).chain(&cs).copied().collect();
        let abc = self.marginalize(&all)?;
        let ac_names: Vec<&str> = xs.iter().chain(&cs).copied().collect();
        let bc_names: Vec<&str> = ys.iter().chain(&cs).copied().collect();
        let ac = abc.marginalize(&ac_names)?;
        let bc = abc.marginalize(&bc_names)?;
        let c = abc.marginalize(&cs)?;
        if let Some(f) = &fixed {
            c.flat_index(f)?;
        }

        let mut max_defect: f64 = 0.0;
        abc.for_each_cell(|a, v| {
            let cpart = &a[nx + ny..];
            if fixed.as_deref().is_some_and(|f| f != cpart) {
                return;
            }
            let i_ac: usize = a[..nx].iter().chain(cpart).zip(&ac.strides).map(|(x, s)| x * s).sum();
            let i_bc: usize = a[nx..].iter().zip(&bc.strides).map(|(x, s)| x * s).sum();
            let i_c: usize = cpart.iter().zip(&c.strides).map(|(x, s)| x * s).sum();
            let d = V::independence_defect(v, ac.values[i_ac], bc.values[i_bc], c.values[i_c]);
            max_defect = max_defect.max(d);
        });
        Ok(IndependenceReport { independent: max_defect <= TABLE_TOL, max_defect })
    }

    /// JSON object `{vars: [{name, card}], values: [...]}`.
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "vars": self.vars,
            "values": self.values.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let vars: Vec<VarSpec> = serde_json::from_value(value.get("vars").cloned().unwrap_or(Value::Null))
            .map_err(|e| Error::MalformedTable(format!("bad `vars`: {e}")))?;
        let raw = value
            .get("values")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::MalformedTable("missing `values` array".into()))?;
        let values = raw
            .iter()
            .map(|v| V::from_json(v).ok_or_else(|| Error::MalformedTable(format!("bad cell value {v}"))))
            .collect::<Result<Vec<_>>>()?;
        Table::new(vars, values)
    }
}

impl<V: Weight> Serialize for Table<V> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Table", 2)?;
        s.serialize_field("vars", &self.vars)?;
        let values: Vec<Value> = self.values.iter().map(|v| v.to_json()).collect();
        s.serialize_field("values", &values)?;
        s.end()
    }
}

impl ProbTable {
    /// Uniform distribution over the grid.
    pub fn uniform(vars: Vec<VarSpec>) -> Result<Self> {
        let n = grid_size(&vars) as f64;
        Table::filled(vars, 1.0 / n)
    }

    /// Cell is possible iff its probability exceeds `eps`.
    pub fn possibilize(&self, eps: f64) -> PossTable {
        Table {
            vars: self.vars.clone(),
            strides: self.strides.clone(),
            values: self.values.iter().map(|&p| p > eps).collect(),
        }
    }

    pub fn prob(&self, event: &Event) -> Result<f64> {
        self.mass(event)
    }

    /// `P(event | given)`.
    pub fn cond_prob(&self, event: &Event, given: &Event) -> Result<f64> {
        let denom = self.mass(given)?;
        if denom <= TABLE_TOL {
            return Err(Error::ZeroMassCondition(denom));
        }
        Ok(self.mass(&given.clone().and(event.clone()))? / denom)
    }

    /// Slice at `on` with the conditioned variables removed, renormalized.
    pub fn condition(&self, on: &[(&str, usize)]) -> Result<ProbTable> {
        let mut fixed = vec![None; self.vars.len()];
        for &(n, v) in on {
            let i = self.index_of(n)?;
            if v >= self.vars[i].card {
                return Err(Error::ValueOutOfRange { name: n.to_string(), card: self.vars[i].card, value: v });
            }
            fixed[i] = Some(v);
        }
        let vars: Vec<VarSpec> =
            self.vars.iter().zip(&fixed).filter(|(_, f)| f.is_none()).map(|(v, _)| v.clone()).collect();
        let mut values = Vec::with_capacity(grid_size(&vars));
        self.for_each_cell(|a, p| {
            if a.iter().zip(&fixed).all(|(x, f)| f.is_none_or(|f| f == *x)) {
                values.push(p);
            }
        });
        let mass: f64 = values.iter().sum();
        if mass <= TABLE_TOL {
            return Err(Error::ZeroMassCondition(mass));
        }
        values.iter_mut().for_each(|p| *p /= mass);
        Table::new(vars, values)
    }

    /// Evaluates `Σ P(Aᵢ)` against `P(A₁…Aₙ) + n − 1`.
    pub fn joint_lower_bound(&self, events: &[Event]) -> Result<LowerBound> {
        if events.is_empty() {
            return Err(Error::InvalidParameter("need at least one event".into()));
        }
        let compiled = events.iter().map(|e| self.compile(e)).collect::<Result<Vec<_>>>()?;
        let mut singles = vec![0.0; events.len()];
        let mut joint = 0.0;
        self.for_each_cell(|a, p| {
            let mut all = true;
            for (s, e) in singles.iter_mut().zip(&compiled) {
                if e.holds(a) {
                    *s += p;
                } else {
                    all = false;
                }
            }
            if all {
                joint += p;
            }
        });
        let lhs: f64 = singles.iter().sum();
        let rhs = joint + (events.len() - 1) as f64;
        Ok(LowerBound { lhs, rhs, holds: lhs <= rhs + TABLE_TOL })
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.total() - 1.0).abs() <= tol && self.values.iter().all(|&p| p >= -tol)
    }

    pub fn max_abs_diff(&self, other: &ProbTable) -> Result<f64> {
        if self.vars != other.vars {
            return Err(Error::DimensionMismatch("tables have different variables".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

impl PossTable {
    /// Valid possibilistic tables have at least one possible cell.
    pub fn is_valid(&self) -> bool {
        self.values.iter().any(|&b| b)
    }

    pub fn is_possible(&self, event: &Event) -> Result<bool> {
        self.mass(event)
    }

    /// `antecedent ⟹ consequent`: no possible cell satisfies the antecedent
    /// but not the consequent.
    pub fn check_implication(&self, antecedent: &Event, consequent: &Event) -> Result<bool> {
        let a = self.compile(antecedent)?;
        let c = self.compile(consequent)?;
        let mut ok = true;
        self.for_each_cell(|x, v| {
            if v && a.holds(x) && !c.holds(x) {
                ok = false;
            }
        });
        Ok(ok)
    }

    /// Possible cells, as assignments in table variable order.
    pub fn support(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each_cell(|a, v| {
            if v {
                out.push(a.to_vec());
            }
        });
        out
    }
}
