//! Dense complex matrices for the handful of qubits the scenarios need.
//!
//! Everything here is deliberately small: dimensions never exceed a few
//! dozen, so matrices are plain row-major `Vec<Complex64>` buffers. The
//! tensor-factor convention is "first factor most significant", i.e. the flat
//! index of `|i⟩ ⊗ |j⟩` is `i * dim_b + j`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute tolerance for algebraic identities.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Absolute tolerance for physical predictions.
pub const PHYSICAL_TOL: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("matrix dimensions must be positive, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from real row slices; panics on ragged input, so only
    /// use it for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cols = rows[0].len();
        let data = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), cols, "ragged matrix literal");
                row.iter().map(|&x| c(x, 0.0))
            })
            .collect();
        Matrix { rows: r, cols, data }
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let r = rows.len();
        let cols = rows[0].len();
        let data = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), cols, "ragged matrix literal");
                row.iter().copied()
            })
            .collect();
        Matrix { rows: r, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Column vector from amplitudes.
    pub fn column(amps: &[C64]) -> Self {
        Matrix { rows: amps.len(), cols: 1, data: amps.to_vec() }
    }

    /// Computational basis ket `|index⟩` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut m = Matrix::zeros(dim, 1);
        m.data[index] = ONE;
        m
    }

    pub fn scalar(z: C64) -> Self {
        Matrix { rows: 1, cols: 1, data: vec![z] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, col: usize) -> C64 {
        self.data[r * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, r: usize, col: usize, z: C64) {
        self.data[r * self.cols + col] = z;
    }

    pub fn adjoint(&self) -> Matrix {
        adjoint(self)
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        tensor_product(self, other)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `K ρ K†`.
    pub fn sandwich(&self, rho: &Matrix) -> Result<Matrix> {
        self.matmul(rho)?.matmul(&self.adjoint())
    }

    pub fn scale(&self, z: C64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * z).collect() }
    }

    pub fn scale_real(&self, x: f64) -> Matrix {
        self.scale(c(x, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise absolute difference; `f64::INFINITY` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Euclidean norm of the entries (Frobenius norm).
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Hermitian with unit trace, both within `tol`.
    pub fn is_density_operator(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (self.trace() - ONE).norm() <= tol
    }

    /// Factors a positive semidefinite matrix as `Σ_m v_m v_m†` using an
    /// outer-product Cholesky sweep. Columns whose pivot falls below `tol`
    /// are dropped. Returns the column vectors `v_m`.
    pub fn psd_factor(&self, tol: f64) -> Result<Vec<Matrix>> {
        if !self.is_hermitian(tol.max(ALGEBRAIC_TOL)) {
            return Err(Error::InvalidParameter("psd_factor needs a Hermitian matrix".into()));
        }
        let n = self.rows;
        let mut work = self.clone();
        let mut vectors = Vec::new();
        for k in 0..n {
            let pivot = work.get(k, k).re;
            if pivot < -tol {
                return Err(Error::InvalidParameter(format!("matrix is not positive semidefinite (pivot {pivot:e})")));
            }
            if pivot <= tol {
                continue;
            }
            let s = pivot.sqrt();
            let v: Vec<C64> = (0..n).map(|i| work.get(i, k) / s).collect();
            for i in 0..n {
                for j in 0..n {
                    let d = work.get(i, j) - v[i] * v[j].conj();
                    work.set(i, j, d);
                }
            }
            vectors.push(Matrix::column(&v));
        }
        Ok(vectors)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for col in 0..self.cols {
                let z = self.get(r, col);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    /// Panics on shape mismatch; use [`Matrix::matmul`] for a checked product.
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

/// Kronecker product, `a`'s indices most significant.
pub fn tensor_product(a: &Matrix, b: &Matrix) -> Matrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut data = vec![ZERO; rows * cols];
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a.get(ar, ac);
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                let base = (ar * b.rows + br) * cols + ac * b.cols;
                for bc in 0..b.cols {
                    data[base + bc] = x * b.get(br, bc);
                }
            }
        }
    }
    Matrix { rows, cols, data }
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a Matrix>) -> Matrix {
    factors.into_iter().fold(Matrix::scalar(ONE), |acc, m| tensor_product(&acc, m))
}

pub fn adjoint(a: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.cols, a.rows);
    for r in 0..a.rows {
        for col in 0..a.cols {
            out.data[col * a.rows + r] = a.get(r, col).conj();
        }
    }
    out
}

/// `|ψ⟩⟨ψ|` for a unit column vector (within 1e-9).
pub fn projector(psi: &Matrix) -> Result<Matrix> {
    if psi.cols != 1 {
        return Err(Error::DimensionMismatch(format!(
            "projector needs a column vector, got {}x{}",
            psi.rows, psi.cols
        )));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > PHYSICAL_TOL {
        return Err(Error::NotUnitVector(norm));
    }
    Ok(psi * &psi.adjoint())
}

/// Ordered subsystem labels with their local dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemLayout {
    systems: Vec<(String, usize)>,
}

impl SystemLayout {
    pub fn new<S: Into<String>>(systems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let systems: Vec<(String, usize)> = systems.into_iter().map(|(s, d)| (s.into(), d)).collect();
        for (i, (name, dim)) in systems.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::LayoutMismatch(format!("subsystem `{name}` has dimension 0")));
            }
            if systems[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::LayoutMismatch(format!("duplicate subsystem `{name}`")));
            }
        }
        Ok(SystemLayout { systems })
    }

    /// A layout of qubits with the given labels.
    pub fn qubits<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        SystemLayout::new(labels.into_iter().map(|l| (l, 2)))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.systems.iter().map(|(s, _)| s.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|&(_, d)| d).collect()
    }

    pub fn len(&self) -> usize {
        self.systems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.systems.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.systems.iter().map(|&(_, d)| d).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.systems.iter().position(|(s, _)| s == label)
    }

    pub fn dim_of(&self, label: &str) -> Option<usize> {
        self.position(label).map(|i| self.systems[i].1)
    }

    /// Same layout with subsystem `label` replaced by one of dimension `dim`;
    /// a dimension of 1 removes the subsystem altogether.
    pub fn with_dim(&self, label: &str, dim: usize) -> Result<Self> {
        let pos = self.position(label).ok_or_else(|| Error::LayoutMismatch(format!("no subsystem `{label}`")))?;
        let mut systems = self.systems.clone();
        if dim == 1 {
            systems.remove(pos);
        } else {
            systems[pos].1 = dim;
        }
        Ok(SystemLayout { systems })
    }

    /// Sub-layout of the kept labels, in layout order.
    pub fn keep(&self, keep: &[&str]) -> Self {
        SystemLayout { systems: self.systems.iter().filter(|(s, _)| keep.contains(&s.as_str())).cloned().collect() }
    }
}

/// Traces out every subsystem not named in `keep`. The kept factors stay in
/// layout order; keeping nothing yields the 1x1 matrix `[Tr ρ]`.
pub fn partial_trace(rho: &Matrix, layout: &SystemLayout, keep: &[&str]) -> Result<Matrix> {
    if !rho.is_square() {
        return Err(Error::DimensionMismatch("partial trace needs a square matrix".into()));
    }
    if layout.total_dim() != rho.rows {
        return Err(Error::LayoutMismatch(format!(
            "layout dimension {} does not match matrix dimension {}",
            layout.total_dim(),
            rho.rows
        )));
    }
    for k in keep {
        if layout.position(k).is_none() {
            return Err(Error::LayoutMismatch(format!("no subsystem `{k}`")));
        }
    }
    let dims = layout.dims();
    let kept: Vec<bool> = layout.labels().map(|l| keep.contains(&l)).collect();
    let keep_dim: usize = dims.iter().zip(&kept).filter(|(_, &k)| k).map(|(d, _)| d).product();
    let trace_dim: usize = dims.iter().zip(&kept).filter(|(_, &k)| !k).map(|(d, _)| d).product();

    // Flat index of (kept multi-index, traced multi-index) in the full space.
    let compose = |ki: usize, ti: usize| -> usize {
        let mut ki_rem = ki;
        let mut ti_rem = ti;
        let mut k_stride = keep_dim;
        let mut t_stride = trace_dim;
        let mut flat = 0;
        for (d, &is_kept) in dims.iter().zip(&kept) {
            let digit = if is_kept {
                k_stride /= d;
                let dgt = ki_rem / k_stride;
                ki_rem %= k_stride;
                dgt
            } else {
                t_stride /= d;
                let dgt = ti_rem / t_stride;
                ti_rem %= t_stride;
                dgt
            };
            flat = flat * d + digit;
        }
        flat
    };

    let mut out = Matrix::zeros(keep_dim, keep_dim);
    for i in 0..keep_dim {
        for j in 0..keep_dim {
            let mut acc = ZERO;
            for t in 0..trace_dim {
                acc += rho.get(compose(i, t), compose(j, t));
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Named single-qubit kets and the entangled resource states.
pub mod kets {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    pub fn zero() -> Matrix {
        Matrix::basis(2, 0)
    }

    pub fn one() -> Matrix {
        Matrix::basis(2, 1)
    }

    pub fn plus() -> Matrix {
        Matrix::column(&[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)])
    }

    pub fn minus() -> Matrix {
        Matrix::column(&[c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)])
    }

    /// `(|0⟩ + i|1⟩)/√2`
    pub fn plus_i() -> Matrix {
        Matrix::column(&[c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)])
    }

    /// `(|0⟩ − i|1⟩)/√2`
    pub fn minus_i() -> Matrix {
        Matrix::column(&[c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)])
    }

    /// `(|000⟩ + |111⟩)/√2`
    pub fn ghz3() -> Matrix {
        let mut amps = vec![ZERO; 8];
        amps[0] = c(FRAC_1_SQRT_2, 0.0);
        amps[7] = c(FRAC_1_SQRT_2, 0.0);
        Matrix::column(&amps)
    }

    /// `(|00⟩ + |11⟩)/√2`
    pub fn phi_plus() -> Matrix {
        let mut amps = vec![ZERO; 4];
        amps[0] = c(FRAC_1_SQRT_2, 0.0);
        amps[3] = c(FRAC_1_SQRT_2, 0.0);
        Matrix::column(&amps)
    }

    /// Qubit ket with Bloch vector `(x, y, z)` (normalised internally).
    pub fn bloch(direction: [f64; 3]) -> Matrix {
        let [x, y, z] = direction;
        let r = (x * x + y * y + z * z).sqrt();
        let (x, y, z) = (x / r, y / r, z / r);
        let polar = z.clamp(-1.0, 1.0).acos();
        let azimuth = y.atan2(x);
        Matrix::column(&[c((polar / 2.0).cos(), 0.0), C64::from_polar((polar / 2.0).sin(), azimuth)])
    }
}

/// Pauli matrices.
pub mod pauli {
    use super::*;

    pub fn x() -> Matrix {
        Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> Matrix {
        Matrix::from_rows(&[&[ZERO, c(0.0, -1.0)], &[c(0.0, 1.0), ZERO]])
    }

    pub fn z() -> Matrix {
        Matrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }
}
