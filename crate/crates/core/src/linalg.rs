//! Dense complex linear algebra shared by every other module.
//!
//! Matrices are stored densely; the target sizes are small (at most a few
//! hundred rows). Eigen- and singular-value decompositions are delegated to
//! `nalgebra`, everything quantum-specific (partial traces, the bipartite
//! reshaping, spectral calculus with explicit zero conventions) lives here.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Numerical thresholds used throughout the crate.
///
/// `eig` bounds reconstruction and invariant residuals, `rank` is the
/// relative singular-value cutoff for rank and span decisions, and `cluster`
/// is the gap below which eigenvalues are merged into one spectral point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eig: f64,
    pub rank: f64,
    pub cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig: 1e-10,
            rank: 1e-9,
            cluster: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn new(eig: f64, rank: f64, cluster: f64) -> Result<Self> {
        let tol = Tolerances { eig, rank, cluster };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eig", self.eig), ("rank", self.rank), ("cluster", self.cluster)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::precondition(
                    "tolerances strictly positive",
                    format!("tolerance {name} = {v}"),
                ));
            }
        }
        Ok(())
    }
}

/// Dense complex matrix. Vectors are `n x 1` matrices when a matrix is needed,
/// and plain `C64` slices otherwise.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixLiteral", into = "MatrixLiteral")]
pub struct ComplexMatrix(DMatrix<C64>);

/// JSON form of a matrix: row-major `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixLiteral {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixLiteral> for ComplexMatrix {
    type Error = Error;

    fn try_from(lit: MatrixLiteral) -> Result<Self> {
        let entries = lit.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::from_row_major(lit.rows, lit.cols, entries)
    }
}

impl From<ComplexMatrix> for MatrixLiteral {
    fn from(m: ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.rows() * m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let z = m.0[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixLiteral {
            rows: m.rows(),
            cols: m.cols(),
            data,
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes,
    /// length mismatches and non-finite entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::dimension(format!("matrix shape {rows}x{cols} must be positive")));
        }
        if entries.len() != rows * cols {
            return Err(Error::dimension(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::precondition(
                "matrix entries finite",
                format!("entry {pos} is {}", entries[pos]),
            ));
        }
        Ok(ComplexMatrix(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Real-valued row-major convenience constructor.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        ComplexMatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO })
    }

    /// Matrix unit `E_ij` (zero-based indices): a single 1 at `(i, j)`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == i && c == j { ONE } else { ZERO })
    }

    /// Column vector `n x 1`.
    pub fn column(v: &[C64]) -> Self {
        ComplexMatrix(DMatrix::from_column_slice(v.len(), 1, v))
    }

    /// Rank-one operator `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        ComplexMatrix(m)
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn column_vec(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.diagonal().iter().sum()
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols(), v.len(), "matrix-vector shape mismatch");
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `‖a − a†‖_F`; zero exactly for Hermitian input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol * self.norm().max(1.0)
    }

    /// `(a + a†)/2`.
    pub fn hermitian_part(&self) -> Self {
        ComplexMatrix((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.shape() == other.shape() && (self - other).norm() <= tol
    }

    /// Inverse of a square matrix, `None` if singular.
    pub fn try_inverse(&self) -> Option<Self> {
        self.0.clone().try_inverse().map(ComplexMatrix)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Rounds to `digits` significant decimal digits (non-finite values pass
/// through).
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Euclidean inner product `<a|b>`, antilinear in `a`.
pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vdistance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Hilbert-Schmidt inner product `Tr[a† b]`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::dimension(format!(
            "hs_inner of {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a.0.iter().zip(b.0.iter()).map(|(x, y)| x.conj() * y).sum())
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    svd(a).singular_values
}

/// Thin singular value decomposition `A = U diag(σ) V†` with `σ` descending
/// and `min(rows, cols)` triplets. `U` and `V` have orthonormal columns even
/// where `σ` vanishes.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let sigma: Vec<C64> = self.singular_values.iter().map(|&s| C64::new(s, 0.0)).collect();
        &(&self.u * &ComplexMatrix::from_diagonal(&sigma)) * &self.v.adjoint()
    }
}

/// One-sided Jacobi SVD, after a QR reduction when the input is tall.
///
/// nalgebra's complex bidiagonal SVD loses accuracy on clustered singular
/// values (reconstruction errors of order 1e-3 at gaps of 1e-5), which the
/// Schmidt decomposition cannot tolerate.
pub fn svd(a: &ComplexMatrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = svd(&a.adjoint());
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    if n == 0 {
        return Svd {
            u: ComplexMatrix::zeros(m, 0),
            singular_values: Vec::new(),
            v: ComplexMatrix::zeros(0, 0),
        };
    }
    let (q, r) = if m > n {
        let qr = a.0.clone().qr();
        (Some(qr.q()), qr.r())
    } else {
        (None, a.0.clone())
    };
    let (w, v) = jacobi_columns(r);
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|k| w.column(k).norm()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let singular_values: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let mut u = DMatrix::<C64>::zeros(n, n);
    let mut vs = DMatrix::<C64>::zeros(n, n);
    for (slot, &k) in order.iter().enumerate() {
        if norms[k] > 0.0 {
            u.set_column(slot, &(w.column(k) / C64::new(norms[k], 0.0)));
        }
        vs.set_column(slot, &v.column(k));
    }
    orthonormalize_columns(&mut u);
    let u = match q {
        Some(q) => q * u,
        None => u,
    };
    Svd {
        u: ComplexMatrix(u),
        singular_values,
        v: ComplexMatrix(vs),
    }
}

/// Rotates column pairs of `a` until they are mutually orthogonal; returns
/// `(A V, V)`.
fn jacobi_columns(mut a: DMatrix<C64>) -> (DMatrix<C64>, DMatrix<C64>) {
    let n = a.ncols();
    let mut v = DMatrix::<C64>::identity(n, n);
    let threshold = f64::EPSILON * n as f64;
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= threshold * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let x = mat[(i, p)];
                        let y = mat[(i, q)];
                        mat[(i, p)] = x * c - y * phase.conj() * s;
                        mat[(i, q)] = x * phase * s + y * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (a, v)
}

/// Gram-Schmidt in column order; columns that vanish after projection are
/// replaced by completions from the standard basis.
fn orthonormalize_columns(u: &mut DMatrix<C64>) {
    let (m, n) = u.shape();
    let mut next_unit = 0;
    for k in 0..n {
        let mut col = u.column(k).into_owned();
        for _ in 0..2 {
            for j in 0..k {
                let proj = u.column(j).dotc(&col);
                col -= u.column(j) * proj;
            }
        }
        let mut norm = col.norm();
        while norm < 0.5 {
            col = nalgebra::DVector::zeros(m);
            col[next_unit] = C64::new(1.0, 0.0);
            next_unit += 1;
            for _ in 0..2 {
                for j in 0..k {
                    let proj = u.column(j).dotc(&col);
                    col -= u.column(j) * proj;
                }
            }
            norm = col.norm();
        }
        u.set_column(k, &(col / C64::new(norm, 0.0)));
    }
}

/// Operator norm: the largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Spectral data of a Hermitian matrix: ascending eigenvalues and a unitary
/// whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column_vec(k)
    }

    /// `U f(Λ) U†` for an arbitrary complex-valued spectral map.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let values: Vec<C64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.reconstruct_from_values(&values)
    }

    /// `U diag(values) U†`.
    pub fn reconstruct_from_values(&self, values: &[C64]) -> ComplexMatrix {
        let u = &self.eigenvectors.0;
        let mut scaled = u.clone();
        for (k, &fk) in values.iter().enumerate() {
            for z in scaled.column_mut(k).iter_mut() {
                *z *= fk;
            }
        }
        ComplexMatrix(scaled * u.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| C64::new(x, 0.0))
    }

    /// Groups eigenvalues whose consecutive gaps are below `gap` into
    /// spectral points. Each group is `(representative value, column indices)`.
    pub fn clusters(&self, gap: f64) -> Vec<(f64, Vec<usize>)> {
        let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            match out.last_mut() {
                Some((_, idx)) if lambda - self.eigenvalues[*idx.last().unwrap()] < gap => idx.push(k),
                _ => out.push((lambda, vec![k])),
            }
        }
        for (value, idx) in out.iter_mut() {
            *value = idx.iter().map(|&k| self.eigenvalues[k]).sum::<f64>() / idx.len() as f64;
        }
        out
    }
}

fn require_hermitian(a: &ComplexMatrix, tol: &Tolerances) -> Result<()> {
    if !a.is_square() {
        return Err(Error::dimension(format!(
            "expected a square matrix, got {:?}",
            a.shape()
        )));
    }
    let defect = a.hermitian_defect();
    if defect > tol.eig * a.norm().max(1.0) {
        return Err(Error::precondition(
            "hermitian input",
            format!("‖a − a†‖ = {defect:.3e} exceeds {:.1e}", tol.eig),
        ));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues ascending.
pub fn eig_hermitian(a: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigenSystem> {
    require_hermitian(a, tol)?;
    let eig = a.hermitian_part().0.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let n = order.len();
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    Ok(HermitianEigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

/// How a spectral function treats eigenvalues that are numerically zero
/// (`|λ| ≤ τ_rank`) where it would otherwise be undefined, e.g. `log`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroConvention {
    /// Zero eigenvalues are outside the domain and raise a domain error.
    #[default]
    Undefined,
    /// `f(0) := 0`, i.e. the function acts on the support only
    /// (`0·log 0 = 0` for entropies).
    MapToZero,
}

fn spectral_map(a: &ComplexMatrix, tol: &Tolerances, f: impl Fn(f64) -> Option<C64>) -> Result<ComplexMatrix> {
    let sys = eig_hermitian(a, tol)?;
    let values: Vec<Option<C64>> = sys.eigenvalues.iter().map(|&x| f(x)).collect();
    let bad: Vec<f64> = sys
        .eigenvalues
        .iter()
        .zip(&values)
        .filter(|(_, v)| v.is_none())
        .map(|(&x, _)| x)
        .collect();
    if !bad.is_empty() {
        return Err(Error::Domain { eigenvalues: bad });
    }
    let values: Vec<C64> = values.into_iter().map(Option::unwrap).collect();
    Ok(sys.reconstruct_from_values(&values))
}

/// Spectral calculus `U f(Λ) U†` for a real function of a Hermitian matrix.
/// `f` returns `None` where it is undefined.
pub fn matrix_function(a: &ComplexMatrix, f: impl Fn(f64) -> Option<f64>, tol: &Tolerances) -> Result<ComplexMatrix> {
    spectral_map(a, tol, |x| f(x).map(|y| C64::new(y, 0.0)))
}

/// Spectral calculus with a complex-valued function, used for unitary
/// groups such as `ρ^{is}`.
pub fn matrix_function_complex(
    a: &ComplexMatrix,
    f: impl Fn(f64) -> Option<C64>,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    spectral_map(a, tol, f)
}

/// Natural logarithm of a positive semidefinite matrix.
pub fn matrix_log(a: &ComplexMatrix, zero: ZeroConvention, tol: &Tolerances) -> Result<ComplexMatrix> {
    let cutoff = tol.rank;
    matrix_function(
        a,
        |x| {
            if x > cutoff {
                Some(x.ln())
            } else if x >= -tol.eig.max(cutoff) && zero == ZeroConvention::MapToZero {
                Some(0.0)
            } else {
                None
            }
        },
        tol,
    )
}

/// `a^{is}` on the support of a positive semidefinite `a` (principal branch),
/// with `0^{is} := 0`.
pub fn imaginary_power(a: &ComplexMatrix, s: f64, tol: &Tolerances) -> Result<ComplexMatrix> {
    let cutoff = tol.rank;
    matrix_function_complex(
        a,
        |x| {
            if x > cutoff {
                Some(C64::from_polar(1.0, s * x.ln()))
            } else if x >= -tol.eig.max(cutoff) {
                Some(ZERO)
            } else {
                None
            }
        },
        tol,
    )
}

/// Kronecker product; `kron(a, b)[(i·p + k, j·q + l)] = a[i,j]·b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Which tensor factor of `H₁ ⊗ H₂` an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    #[default]
    First,
    Second,
}

impl Subsystem {
    pub fn other(self) -> Self {
        match self {
            Subsystem::First => Subsystem::Second,
            Subsystem::Second => Subsystem::First,
        }
    }
}

/// Reduced matrix of the kept subsystem of an operator on `C^{d1} ⊗ C^{d2}`.
pub fn partial_trace(rho: &ComplexMatrix, dims: (usize, usize), keep: Subsystem) -> Result<ComplexMatrix> {
    let (d1, d2) = dims;
    if !rho.is_square() || rho.rows() != d1 * d2 || d1 == 0 || d2 == 0 {
        return Err(Error::dimension(format!(
            "partial trace of {:?} over factorization {d1}x{d2}",
            rho.shape()
        )));
    }
    let r = &rho.0;
    Ok(match keep {
        Subsystem::First => ComplexMatrix::from_fn(d1, d1, |i, j| (0..d2).map(|k| r[(i * d2 + k, j * d2 + k)]).sum()),
        Subsystem::Second => ComplexMatrix::from_fn(d2, d2, |k, l| (0..d1).map(|i| r[(i * d2 + k, i * d2 + l)]).sum()),
    })
}

/// Coefficient matrix `Ψ̃[a, b] = <a,b|Ψ>` of a vector in `C^n ⊗ C^m`.
/// Left multiplication acts on the first slot, right multiplication by
/// `bᵀ` on the second, and `Ψ̃Ψ̃† = ρ₁`.
pub fn coefficient_matrix(psi: &[C64], dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (n, m) = dims;
    if n == 0 || m == 0 || psi.len() != n * m {
        return Err(Error::dimension(format!(
            "vector of length {} does not factor as {n}x{m}",
            psi.len()
        )));
    }
    ComplexMatrix::from_row_major(n, m, psi.to_vec())
}

/// The square-bipartition version of [`coefficient_matrix`].
pub fn partial_transpose_to_matrix(psi: &[C64], dims: (usize, usize)) -> Result<ComplexMatrix> {
    if dims.0 != dims.1 {
        return Err(Error::dimension(format!(
            "partial transpose needs a square bipartition, got {}x{}",
            dims.0, dims.1
        )));
    }
    coefficient_matrix(psi, dims)
}

/// Inverse of [`coefficient_matrix`]: row-major flattening.
pub fn matrix_to_vector(m: &ComplexMatrix) -> Vec<C64> {
    m.to_row_major()
}

/// Permutation `|a,b> -> |b,a>` on `C^n ⊗ C^n`.
pub fn swap_operator(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n * n, n * n, |r, c| {
        let (a, b) = (c / n, c % n);
        if r == b * n + a {
            ONE
        } else {
            ZERO
        }
    })
}

/// Serializes a complex scalar as `[re, im]`.
pub fn serialize_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

/// Seeded random matrices and states for tests and experiments.
pub mod random {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
    }

    pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
        gaussian_matrix(rng, n, n).hermitian_part()
    }

    /// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
    pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
        let g = gaussian_matrix(rng, n, n).into_inner();
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        ComplexMatrix::from_inner(q)
    }

    pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<C64> {
        let v: Vec<C64> = (0..len).map(|_| complex_gaussian(rng)).collect();
        let norm = vnorm(&v);
        v.into_iter().map(|z| z / norm).collect()
    }

    /// Random density matrix `G G† / Tr`.
    pub fn density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
        let g = gaussian_matrix(rng, n, n);
        let rho = &g * &g.adjoint();
        let tr = rho.trace().re;
        rho.scale_real(1.0 / tr).hermitian_part()
    }

    /// Random orthogonal projector of the given rank.
    pub fn projector<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ComplexMatrix {
        let u = unitary(rng, n);
        let mut p = ComplexMatrix::zeros(n, n);
        for k in 0..rank {
            let col = u.column_vec(k);
            p = &p + &ComplexMatrix::outer(&col, &col);
        }
        p.hermitian_part()
    }

    /// Unit vector in `C^n ⊗ C^n` whose Schmidt coefficients are all at least
    /// `floor / sqrt(n)`: random local unitaries around a random coefficient
    /// profile.
    pub fn full_rank_state<R: Rng + ?Sized>(rng: &mut R, n: usize, floor: f64) -> Vec<C64> {
        let weights: Vec<f64> = (0..n).map(|_| floor + rng.random::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        let coeffs: Vec<f64> = weights.iter().map(|w| (w / total).sqrt()).collect();
        let u = unitary(rng, n);
        let v = unitary(rng, n);
        let mut tilde = ComplexMatrix::zeros(n, n);
        for (k, &c) in coeffs.iter().enumerate() {
            let uk = u.column_vec(k);
            let vk = v.column_vec(k);
            tilde = &tilde + &ComplexMatrix::from_fn(n, n, |a, b| uk[a] * vk[b] * c);
        }
        let psi = matrix_to_vector(&tilde);
        let norm = vnorm(&psi);
        psi.into_iter().map(|z| z / norm).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn hs_inner_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(hs_inner(&i2, &i2).unwrap(), c(2.0));
        let ip = i2.scale_real(std::f64::consts::FRAC_1_SQRT_2);
        assert!((hs_inner(&ip, &ip).unwrap() - c(1.0)).norm() < 1e-15);
        let e12 = ComplexMatrix::unit(2, 0, 1);
        let e21 = ComplexMatrix::unit(2, 1, 0);
        assert_eq!(hs_inner(&e12, &e21).unwrap(), c(0.0));
        assert!(matches!(
            hs_inner(&i2, &ComplexMatrix::identity(3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn svd_on_clustered_and_deficient_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for gap in [1e-2, 1e-5, 1e-9, 0.0] {
            for (m, n) in [(3, 3), (5, 3), (3, 5)] {
                let k = m.min(n);
                let mut sigma = vec![0.68, 0.68 - gap, 0.27, 0.0, 0.0];
                sigma.truncate(k);
                let u0 = random::unitary(&mut rng, m);
                let v0 = random::unitary(&mut rng, n);
                let s0 = ComplexMatrix::from_fn(m, n, |i, j| if i == j { C64::new(sigma[i], 0.0) } else { ZERO });
                let a = &(&u0 * &s0) * &v0.adjoint();
                let d = svd(&a);
                assert!(d.reconstruct().approx_eq(&a, 1e-14), "gap {gap} shape {m}x{n}");
                assert!((&d.u.adjoint() * &d.u).approx_eq(&ComplexMatrix::identity(k), 1e-14));
                assert!((&d.v.adjoint() * &d.v).approx_eq(&ComplexMatrix::identity(k), 1e-14));
                for (x, y) in d.singular_values.iter().zip(&sigma) {
                    assert!((x - y).abs() < 1e-14);
                }
            }
        }
        let d = svd(&ComplexMatrix::zeros(2, 4));
        assert_eq!(d.singular_values, vec![0.0, 0.0]);
        assert!((&d.u.adjoint() * &d.u).approx_eq(&ComplexMatrix::identity(2), 1e-15));
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&ComplexMatrix::identity(5)) - 1.0).abs() < 1e-14);
        assert_eq!(operator_norm(&ComplexMatrix::zeros(3, 3)), 0.0);
        let d = ComplexMatrix::from_real_diagonal(&[3.0, -4.0]);
        // singular values of diag(3,-4) are |3| and |-4|
        assert!((operator_norm(&d) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn eig_examples() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 0.0]);
        let e = eig_hermitian(&d, &tol()).unwrap();
        assert_eq!(e.eigenvalues.len(), 3);
        for (got, want) in e.eigenvalues.iter().zip([0.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }

        let p = ComplexMatrix::from_fn(3, 3, |_, _| c(1.0 / 3.0));
        let e = eig_hermitian(&p, &tol()).unwrap();
        for (got, want) in e.eigenvalues.iter().zip([0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }

        // σ_x: characteristic polynomial λ² − 1
        let sx = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = eig_hermitian(&sx, &tol()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let e12 = ComplexMatrix::unit(2, 0, 1);
        match eig_hermitian(&e12, &tol()) {
            Err(Error::Precondition { invariant, detail }) => {
                assert_eq!(invariant, "hermitian input");
                assert!(detail.contains("1.414e0"), "{detail}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_cluster_basis_is_orthonormal() {
        let p = ComplexMatrix::from_fn(4, 4, |_, _| c(0.25));
        let e = eig_hermitian(&p, &tol()).unwrap();
        let u = &e.eigenvectors;
        assert!((&u.adjoint() * u).approx_eq(&ComplexMatrix::identity(4), 1e-13));
        let clusters = e.clusters(tol().cluster);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].1.len(), 3);
    }

    #[test]
    fn matrix_function_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random::projector(&mut rng, 4, 2);
        let sq = matrix_function(&p, |x| Some(x * x), &tol()).unwrap();
        assert!(sq.approx_eq(&p, 1e-12));

        let d = ComplexMatrix::from_real_diagonal(&[1.0, 4.0]);
        let r = matrix_function(&d, |x| (x >= 0.0).then(|| x.sqrt()), &tol()).unwrap();
        assert!(r.approx_eq(&ComplexMatrix::from_real_diagonal(&[1.0, 2.0]), 1e-14));

        let e = std::f64::consts::E;
        let d = ComplexMatrix::from_real_diagonal(&[e, e * e]);
        let l = matrix_log(&d, ZeroConvention::Undefined, &tol()).unwrap();
        assert!(l.approx_eq(&ComplexMatrix::from_real_diagonal(&[1.0, 2.0]), 1e-14));
    }

    #[test]
    fn matrix_log_domain_errors() {
        let d = ComplexMatrix::from_real_diagonal(&[-0.5, 0.0, 2.0]);
        match matrix_log(&d, ZeroConvention::Undefined, &tol()) {
            Err(Error::Domain { eigenvalues }) => assert_eq!(eigenvalues.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
        match matrix_log(&d, ZeroConvention::MapToZero, &tol()) {
            Err(Error::Domain { eigenvalues }) => assert_eq!(eigenvalues, vec![-0.5]),
            other => panic!("unexpected {other:?}"),
        }
        let d = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        let l = matrix_log(&d, ZeroConvention::MapToZero, &tol()).unwrap();
        assert!(l.approx_eq(&ComplexMatrix::zeros(2, 2), 1e-15));
    }

    #[test]
    fn kron_examples() {
        let p = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert_eq!(kron(&p, &p), ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(
            kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)),
            ComplexMatrix::identity(4)
        );
        // E12 ⊗ E21: (i,j)=(0,1), (k,l)=(1,0) → row 0·2+1 = 1, col 1·2+0 = 2
        let k = kron(&ComplexMatrix::unit(2, 0, 1), &ComplexMatrix::unit(2, 1, 0));
        assert_eq!(k, ComplexMatrix::unit(4, 1, 2));
    }

    #[test]
    fn partial_trace_examples() {
        // entangled example: |c1|²=p1 on |00>, |c2|²=p2 on |11>, coherences c1 c̄2
        let (c1, c2) = (C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        let psi = vec![c1, ZERO, ZERO, c2];
        let rho = ComplexMatrix::outer(&psi, &psi);
        let ra = partial_trace(&rho, (2, 2), Subsystem::First).unwrap();
        assert!(ra.approx_eq(&ComplexMatrix::from_real_diagonal(&[0.36, 0.64]), 1e-15));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random::density(&mut rng, 2);
        let b = random::density(&mut rng, 3);
        let pa = partial_trace(&kron(&a, &b), (2, 3), Subsystem::First).unwrap();
        assert!(pa.approx_eq(&a, 1e-14));
        let pb = partial_trace(&kron(&a, &b), (2, 3), Subsystem::Second).unwrap();
        assert!(pb.approx_eq(&b, 1e-14));

        let mixed = ComplexMatrix::identity(4).scale_real(0.25);
        for keep in [Subsystem::First, Subsystem::Second] {
            let r = partial_trace(&mixed, (2, 2), keep).unwrap();
            assert!(r.approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-15));
        }
        assert!(partial_trace(&mixed, (3, 2), Subsystem::First).is_err());
    }

    #[test]
    fn partial_transpose_examples() {
        let cs = [c(0.5), c(0.3), C64::new(0.1, 0.7)];
        let mut psi = vec![ZERO; 9];
        for (k, &ck) in cs.iter().enumerate() {
            psi[k * 3 + k] = ck;
        }
        let t = partial_transpose_to_matrix(&psi, (3, 3)).unwrap();
        assert_eq!(t, ComplexMatrix::from_diagonal(&cs));

        // |1> ⊗ |2> (one-based) is E12
        let mut psi = vec![ZERO; 4];
        psi[1] = ONE;
        assert_eq!(
            partial_transpose_to_matrix(&psi, (2, 2)).unwrap(),
            ComplexMatrix::unit(2, 0, 1)
        );

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = random::unit_vector(&mut rng, 16);
        let t = partial_transpose_to_matrix(&psi, (4, 4)).unwrap();
        let rho = ComplexMatrix::outer(&psi, &psi);
        let r1 = partial_trace(&rho, (4, 4), Subsystem::First).unwrap();
        let r2 = partial_trace(&rho, (4, 4), Subsystem::Second).unwrap();
        assert!((&t * &t.adjoint()).approx_eq(&r1, 1e-14));
        // Ψ̃†Ψ̃ is ρ₂ in the transposed (dual) basis
        assert!((&t.adjoint() * &t).approx_eq(&r2.transpose(), 1e-14));
        assert_eq!(matrix_to_vector(&t), psi);

        assert!(partial_transpose_to_matrix(&[ONE; 6], (2, 3)).is_err());
        assert!(partial_transpose_to_matrix(&[ONE; 5], (2, 2)).is_err());
    }

    #[test]
    fn matrix_literal_rejects_bad_shapes() {
        let bad: std::result::Result<ComplexMatrix, _> =
            serde_json::from_str(r#"{"rows": 2, "cols": 2, "data": [[1,0],[0,0],[0,0]]}"#);
        assert!(bad.is_err());
        let bad: std::result::Result<ComplexMatrix, _> =
            serde_json::from_str(r#"{"rows": 1, "cols": 1, "data": [[1]]}"#);
        assert!(bad.is_err());
        let ok: ComplexMatrix = serde_json::from_str(r#"{"rows": 1, "cols": 2, "data": [[1,0],[0,-2.5]]}"#).unwrap();
        assert_eq!(ok.get(0, 1), C64::new(0.0, -2.5));
    }

    #[test]
    fn swap_operator_swaps_slots() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random::gaussian_matrix(&mut rng, 3, 3);
        let b = random::gaussian_matrix(&mut rng, 3, 3);
        let s = swap_operator(3);
        let lhs = &(&s * &kron(&a, &b)) * &s;
        assert!(lhs.approx_eq(&kron(&b, &a), 1e-13));
    }
}
