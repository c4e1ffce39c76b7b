//! Completely positive maps, instruments and the quantum switch.
//!
//! Maps are stored in Kraus form. An [`Instrument`] is a list of
//! `(outcome, CpMap)` branches whose maps sum to a trace-preserving map; an
//! outcome is a tuple of small integers so that composed instruments (the
//! switch, the joint agent instrument) can carry several agents' results.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, kets, tensor_product, Matrix, SystemLayout, ALGEBRAIC_TOL};

/// Outcome tuple of an instrument, one entry per contributing agent.
pub type Outcome = Vec<u8>;

#[derive(Debug, Clone, PartialEq)]
pub struct CpMap {
    kraus: Vec<Matrix>,
    in_dim: usize,
    out_dim: usize,
}

impl CpMap {
    pub fn new(kraus: Vec<Matrix>, in_dim: usize, out_dim: usize) -> Result<Self> {
        for k in &kraus {
            if k.rows() != out_dim || k.cols() != in_dim {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator is {}x{}, map is {in_dim} -> {out_dim}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        Ok(CpMap { kraus, in_dim, out_dim })
    }

    /// The pure operation `ρ ↦ KρK†`.
    pub fn pure(k: Matrix) -> Self {
        let (out_dim, in_dim) = (k.rows(), k.cols());
        CpMap { kraus: vec![k], in_dim, out_dim }
    }

    /// The map sending everything to zero (no Kraus operators).
    pub fn zero(in_dim: usize, out_dim: usize) -> Self {
        CpMap { kraus: Vec::new(), in_dim, out_dim }
    }

    pub fn identity(dim: usize) -> Self {
        CpMap::pure(Matrix::identity(dim))
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn is_zero(&self) -> bool {
        self.kraus.is_empty()
    }

    pub fn apply(&self, rho: &Matrix) -> Result<Matrix> {
        if rho.rows() != self.in_dim || rho.cols() != self.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "map expects {0}x{0} input, got {1}x{2}",
                self.in_dim,
                rho.rows(),
                rho.cols()
            )));
        }
        let mut out = Matrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out = &out + &k.sandwich(rho)?;
        }
        Ok(out)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &CpMap) -> Result<CpMap> {
        if self.out_dim != next.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {} -> {} with {} -> {}",
                self.in_dim, self.out_dim, next.in_dim, next.out_dim
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for n in &next.kraus {
            for k in &self.kraus {
                kraus.push(n.matmul(k)?);
            }
        }
        Ok(CpMap { kraus, in_dim: self.in_dim, out_dim: next.out_dim })
    }

    pub fn tensor(&self, other: &CpMap) -> CpMap {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(tensor_product(a, b));
            }
        }
        CpMap { kraus, in_dim: self.in_dim * other.in_dim, out_dim: self.out_dim * other.out_dim }
    }

    /// `Σ K†K`, the effect of this map.
    pub fn effect(&self) -> Matrix {
        self.kraus.iter().fold(Matrix::zeros(self.in_dim, self.in_dim), |acc, k| &acc + &(&k.adjoint() * k))
    }

    /// Applies the map to subsystem `label` of a state laid out as `layout`.
    /// The returned layout has that subsystem resized to the output
    /// dimension (removed if the output is trivial).
    pub fn apply_on(&self, rho: &Matrix, layout: &SystemLayout, label: &str) -> Result<(Matrix, SystemLayout)> {
        let pos = layout.position(label).ok_or_else(|| Error::LayoutMismatch(format!("no subsystem `{label}`")))?;
        let dims = layout.dims();
        if dims[pos] != self.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "subsystem `{label}` has dimension {}, map expects {}",
                dims[pos], self.in_dim
            )));
        }
        if rho.rows() != layout.total_dim() || !rho.is_square() {
            return Err(Error::LayoutMismatch("state does not match its layout".into()));
        }
        let before: usize = dims[..pos].iter().product();
        let after: usize = dims[pos + 1..].iter().product();
        let id_before = Matrix::identity(before);
        let id_after = Matrix::identity(after);
        let out_dim = before * self.out_dim * after;
        let mut out = Matrix::zeros(out_dim, out_dim);
        for k in &self.kraus {
            let big = tensor_product(&tensor_product(&id_before, k), &id_after);
            out = &out + &big.sandwich(rho)?;
        }
        Ok((out, layout.with_dim(label, self.out_dim)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    branches: Vec<(Outcome, CpMap)>,
    in_dim: usize,
    out_dim: usize,
}

impl Instrument {
    pub fn new(branches: Vec<(Outcome, CpMap)>) -> Result<Self> {
        let Some((_, first)) = branches.first() else {
            return Err(Error::InvalidParameter("instrument needs at least one outcome".into()));
        };
        let (in_dim, out_dim) = (first.in_dim, first.out_dim);
        for (i, (o, m)) in branches.iter().enumerate() {
            if m.in_dim != in_dim || m.out_dim != out_dim {
                return Err(Error::DimensionMismatch(format!(
                    "outcome {o:?} maps {} -> {}, expected {in_dim} -> {out_dim}",
                    m.in_dim, m.out_dim
                )));
            }
            if branches[..i].iter().any(|(p, _)| p == o) {
                return Err(Error::InvalidParameter(format!("duplicate outcome {o:?}")));
            }
        }
        Ok(Instrument { branches, in_dim, out_dim })
    }

    /// The one-outcome identity instrument.
    pub fn identity(dim: usize) -> Self {
        Instrument { branches: vec![(Vec::new(), CpMap::identity(dim))], in_dim: dim, out_dim: dim }
    }

    pub fn branches(&self) -> &[(Outcome, CpMap)] {
        &self.branches
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &Outcome> {
        self.branches.iter().map(|(o, _)| o)
    }

    pub fn branch(&self, outcome: &[u8]) -> Option<&CpMap> {
        self.branches.iter().find(|(o, _)| o == outcome).map(|(_, m)| m)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// Effect of the total (outcome-summed) map.
    pub fn total_effect(&self) -> Matrix {
        self.branches.iter().fold(Matrix::zeros(self.in_dim, self.in_dim), |acc, (_, m)| &acc + &m.effect())
    }

    /// Born-rule outcome probabilities `Tr 𝓔^e(ρ)`, in branch order.
    pub fn probabilities(&self, rho: &Matrix) -> Result<Vec<(Outcome, f64)>> {
        self.branches.iter().map(|(o, m)| Ok((o.clone(), m.apply(rho)?.trace().re))).collect()
    }

    /// Sequential composition: run `self`, then `next` on its output.
    /// Outcome tuples are concatenated.
    pub fn then(&self, next: &Instrument) -> Result<Instrument> {
        let mut branches = Vec::with_capacity(self.branches.len() * next.branches.len());
        for (o1, m1) in &self.branches {
            for (o2, m2) in &next.branches {
                let mut o = o1.clone();
                o.extend_from_slice(o2);
                branches.push((o, m1.then(m2)?));
            }
        }
        Instrument::new(branches)
    }

    /// Precomposes every branch with a fixed channel.
    pub fn after(&self, first: &CpMap) -> Result<Instrument> {
        let branches =
            self.branches.iter().map(|(o, m)| Ok((o.clone(), first.then(m)?))).collect::<Result<Vec<_>>>()?;
        Instrument::new(branches)
    }
}

/// Result of checking an instrument's completeness relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InstrumentReport {
    /// Largest entry of `|Σ K†K − I|`.
    pub max_deviation: f64,
    pub pass: bool,
}

/// Checks that the outcome-summed map is trace preserving within 1e-12.
pub fn validate_instrument(inst: &Instrument) -> InstrumentReport {
    let dev = inst.total_effect().max_abs_diff(&Matrix::identity(inst.in_dim));
    InstrumentReport { max_deviation: dev, pass: dev <= ALGEBRAIC_TOL }
}

/// Basis in which the switch's control qubit selects the order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlBasis {
    /// `|+⟩` applies E then F, `|−⟩` applies F then E.
    XBasis,
    /// `|0⟩` applies E then F, `|1⟩` applies F then E.
    ZBasis,
}

impl ControlBasis {
    fn projectors(self) -> (Matrix, Matrix) {
        let (k0, k1) = match self {
            ControlBasis::XBasis => (kets::plus(), kets::minus()),
            ControlBasis::ZBasis => (kets::zero(), kets::one()),
        };
        (&k0 * &k0.adjoint(), &k1 * &k1.adjoint())
    }
}

/// `W = P₀ ⊗ FE + P₁ ⊗ EF` on control ⊗ target.
pub fn switch_operator(e: &Matrix, f: &Matrix, basis: ControlBasis) -> Result<Matrix> {
    if !e.is_square() || !f.is_square() || e.rows() != f.rows() {
        return Err(Error::DimensionMismatch(format!(
            "switch needs two square operators of equal size, got {}x{} and {}x{}",
            e.rows(),
            e.cols(),
            f.rows(),
            f.cols()
        )));
    }
    let (p0, p1) = basis.projectors();
    let fe = f.matmul(e)?;
    let ef = e.matmul(f)?;
    Ok(&tensor_product(&p0, &fe) + &tensor_product(&p1, &ef))
}

/// The quantum switch applied to two instruments on the same target.
/// Outcome tuples are `e_outcome ++ f_outcome`.
pub fn switch_supermap(e_inst: &Instrument, f_inst: &Instrument, basis: ControlBasis) -> Result<Instrument> {
    let d = e_inst.in_dim;
    if e_inst.out_dim != d || f_inst.in_dim != d || f_inst.out_dim != d {
        return Err(Error::DimensionMismatch("switch needs both instruments to act on the same target space".into()));
    }
    let mut branches = Vec::new();
    for (oe, me) in &e_inst.branches {
        for (of, mf) in &f_inst.branches {
            let mut kraus = Vec::with_capacity(me.kraus.len() * mf.kraus.len());
            for ek in &me.kraus {
                for fk in &mf.kraus {
                    kraus.push(switch_operator(ek, fk, basis)?);
                }
            }
            let mut o = oe.clone();
            o.extend_from_slice(of);
            branches.push((o, CpMap::new(kraus, 2 * d, 2 * d)?));
        }
    }
    Instrument::new(branches)
}

/// One of the two agents inside a switch, acting on the qubit target.
///
/// `x = 0`: no intervention, output `a = 0` (the `a = 1` branch is the zero
/// map). `x = 1`: measure in the computational basis, record `a`, and
/// re-prepare `|1⟩`, i.e. Kraus operator `|1⟩⟨a|`.
pub fn agent_instrument(x: u8) -> Result<Instrument> {
    match x {
        0 => Instrument::new(vec![(vec![0], CpMap::identity(2)), (vec![1], CpMap::zero(2, 2))]),
        1 => {
            let one = kets::one();
            Instrument::new(
                (0..2u8)
                    .map(|a| {
                        let k = &one * &Matrix::basis(2, a as usize).adjoint();
                        (vec![a], CpMap::pure(k))
                    })
                    .collect(),
            )
        }
        _ => Err(Error::InvalidParameter(format!("agent input must be a bit, got {x}"))),
    }
}

/// Destructive two-outcome qubit measurement; outcome `k` projects onto
/// `basis[k]` and leaves no quantum output.
pub fn destructive_measurement(basis: [Matrix; 2]) -> Result<Instrument> {
    let branches = basis
        .into_iter()
        .enumerate()
        .map(|(k, ket)| Ok((vec![k as u8], CpMap::new(vec![ket.adjoint()], 2, 1)?)))
        .collect::<Result<Vec<_>>>()?;
    Instrument::new(branches)
}

/// Measurement along Bloch direction `n`; outcome 0 is the `+1` eigenvector
/// of `n·σ`.
pub fn bloch_measurement(direction: [f64; 3]) -> Result<Instrument> {
    let [x, y, z] = direction;
    if (x * x + y * y + z * z).sqrt() < 1e-12 {
        return Err(Error::InvalidParameter("measurement direction must be nonzero".into()));
    }
    destructive_measurement([kets::bloch(direction), kets::bloch([-x, -y, -z])])
}

/// Measurement along `cos φ·Z + sin φ·X`.
pub fn angle_measurement(phi: f64) -> Instrument {
    let (s, cs) = (phi / 2.0).sin_cos();
    let up = Matrix::column(&[c(cs, 0.0), c(s, 0.0)]);
    let down = Matrix::column(&[c(-s, 0.0), c(cs, 0.0)]);
    destructive_measurement([up, down]).expect("qubit kets are well formed")
}

/// Y-basis measurement, outcome 0 ↔ `|+i⟩`.
pub fn y_measurement() -> Instrument {
    destructive_measurement([kets::plus_i(), kets::minus_i()]).expect("qubit kets are well formed")
}

/// X-basis measurement, outcome 0 ↔ `|+⟩`.
pub fn x_measurement() -> Instrument {
    angle_measurement(std::f64::consts::FRAC_PI_2)
}

/// The instrument one switch wing implements on its control qubit: prepend
/// the target in `target_init`, run the switch over the two agents with
/// inputs `x1`, `x2`, then measure the control with `final_meas` and discard
/// the target. Outcomes are `(a1, a2, a3)`.
pub fn joint_switch_instrument(
    x1: u8,
    x2: u8,
    final_meas: &Instrument,
    basis: ControlBasis,
    target_init: &Matrix,
) -> Result<Instrument> {
    if target_init.rows() != 2 || !target_init.is_density_operator(1e-9) {
        return Err(Error::InvalidParameter("target initial state must be a qubit density operator".into()));
    }
    if final_meas.in_dim() != 2 {
        return Err(Error::DimensionMismatch("final measurement must act on the control qubit".into()));
    }
    let id_c = Matrix::identity(2);
    let prep_kraus = target_init.psd_factor(1e-15)?.iter().map(|v| tensor_product(&id_c, v)).collect();
    let prepare = CpMap::new(prep_kraus, 2, 4)?;

    let switched = switch_supermap(&agent_instrument(x1)?, &agent_instrument(x2)?, basis)?;

    let out = final_meas.out_dim();
    let readout_branches = final_meas
        .branches()
        .iter()
        .map(|(o, m)| {
            let mut kraus = Vec::new();
            for k in m.kraus() {
                for t in 0..2 {
                    kraus.push(tensor_product(k, &Matrix::basis(2, t).adjoint()));
                }
            }
            Ok((o.clone(), CpMap::new(kraus, 4, out)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let readout = Instrument::new(readout_branches)?;

    switched.then(&readout)?.after(&prepare)
}
