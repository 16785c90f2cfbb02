//! Finite-dimensional *-algebras of matrices.
//!
//! An algebra is stored as an orthonormal basis (Hilbert-Schmidt inner
//! product) of its linear span. In finite dimensions every operator topology
//! coincides, so closing under products and adjoints at the level of the
//! linear span is all the closure a von Neumann algebra needs.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hs_inner, ComplexMatrix, Tolerances, C64, ZERO};

/// A unital, *-closed linear subspace of `n x n` matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "AlgebraLiteral", into = "AlgebraLiteral")]
pub struct StarAlgebra {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraLiteral {
    pub ambient_dim: usize,
    pub basis: Vec<ComplexMatrix>,
}

impl TryFrom<AlgebraLiteral> for StarAlgebra {
    type Error = Error;

    fn try_from(lit: AlgebraLiteral) -> Result<Self> {
        StarAlgebra::from_basis(lit.ambient_dim, lit.basis, &Tolerances::default())
    }
}

impl From<StarAlgebra> for AlgebraLiteral {
    fn from(a: StarAlgebra) -> Self {
        AlgebraLiteral {
            ambient_dim: a.ambient_dim,
            basis: a.basis,
        }
    }
}

/// Gram-Schmidt (two passes) of `x` against an orthonormal list. Returns the
/// normalized remainder if its relative size is at least `tol_rank`.
fn orthogonal_remainder(basis: &[ComplexMatrix], x: &ComplexMatrix, tol_rank: f64) -> Option<ComplexMatrix> {
    let norm = x.norm();
    if norm <= tol_rank {
        return None;
    }
    let mut r = x.clone();
    for _ in 0..2 {
        for b in basis {
            let coeff = hs_inner(b, &r).expect("basis shapes agree");
            r = &r - &b.scale(coeff);
        }
    }
    let rn = r.norm();
    (rn >= tol_rank * norm).then(|| r.scale_real(1.0 / rn))
}

/// `‖x − P x‖ / ‖x‖` for the orthogonal projection `P` onto the span of an
/// orthonormal list; zero for `x = 0`.
fn relative_residual(basis: &[ComplexMatrix], x: &ComplexMatrix) -> f64 {
    let norm = x.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut r = x.clone();
    for b in basis {
        let coeff = hs_inner(b, &r).expect("basis shapes agree");
        r = &r - &b.scale(coeff);
    }
    r.norm() / norm
}

fn vectorize(m: &ComplexMatrix) -> Vec<C64> {
    m.to_row_major()
}

/// Orthonormal basis of the kernel of `m`, using a singular-value cutoff
/// relative to the largest singular value.
fn null_space(m: &DMatrix<C64>, tol_rank: f64) -> Vec<Vec<C64>> {
    let (rows, cols) = m.shape();
    // the thin SVD only returns min(rows, cols) right singular vectors
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = crate::linalg::svd(&ComplexMatrix::from_inner(padded));
    let sigma_max = svd.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = tol_rank * sigma_max;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| sigma_max <= tol_rank || s <= cutoff)
        .map(|(k, _)| svd.v.column_vec(k))
        .collect()
}

fn unvectorize(n: usize, v: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

impl StarAlgebra {
    /// Validates an explicit basis: square matrices of the ambient size,
    /// HS-orthonormal, with a span that contains the identity and is closed
    /// under adjoints and products.
    pub fn from_basis(ambient_dim: usize, basis: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::dimension("ambient dimension must be positive"));
        }
        for b in &basis {
            if b.shape() != (ambient_dim, ambient_dim) {
                return Err(Error::dimension(format!(
                    "basis element of shape {:?} in an algebra on C^{ambient_dim}",
                    b.shape()
                )));
            }
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let g = hs_inner(a, b)?;
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - C64::new(want, 0.0)).norm() > tol.eig.max(1e-12) * 10.0 {
                    return Err(Error::precondition(
                        "basis HS-orthonormal",
                        format!("<b{i}, b{j}> = {g}"),
                    ));
                }
            }
        }
        let alg = StarAlgebra { ambient_dim, basis };
        alg.check_closure(tol)?;
        Ok(alg)
    }

    /// Orthonormalizes a spanning set and validates that the span is a
    /// unital *-algebra, without closing it.
    pub fn from_span(ambient_dim: usize, spanning: &[ComplexMatrix], tol: &Tolerances) -> Result<Self> {
        let mut basis = Vec::new();
        for m in spanning {
            if m.shape() != (ambient_dim, ambient_dim) {
                return Err(Error::dimension(format!(
                    "matrix of shape {:?} in an algebra on C^{ambient_dim}",
                    m.shape()
                )));
            }
            if let Some(r) = orthogonal_remainder(&basis, m, tol.rank) {
                basis.push(r);
            }
        }
        let alg = StarAlgebra { ambient_dim, basis };
        alg.check_closure(tol)?;
        Ok(alg)
    }

    /// `M_n`, with the matrix units as basis.
    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .flat_map(|i| (0..n).map(move |j| ComplexMatrix::unit(n, i, j)))
            .collect();
        StarAlgebra { ambient_dim: n, basis }
    }

    /// `ℂ·I_n`.
    pub fn scalars(n: usize) -> Self {
        StarAlgebra {
            ambient_dim: n,
            basis: vec![ComplexMatrix::identity(n).scale_real(1.0 / (n as f64).sqrt())],
        }
    }

    fn check_closure(&self, tol: &Tolerances) -> Result<()> {
        let n = self.ambient_dim;
        let id_res = relative_residual(&self.basis, &ComplexMatrix::identity(n));
        if id_res >= tol.rank {
            return Err(Error::precondition(
                "algebra contains identity",
                format!("identity projection residual {id_res:.3e}"),
            ));
        }
        for (i, b) in self.basis.iter().enumerate() {
            let res = relative_residual(&self.basis, &b.adjoint());
            if res >= tol.rank {
                return Err(Error::precondition(
                    "algebra closed under adjoint",
                    format!("adjoint of basis element {i} has residual {res:.3e}"),
                ));
            }
        }
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let res = relative_residual(&self.basis, &(a * b));
                if res >= tol.rank {
                    return Err(Error::precondition(
                        "algebra closed under multiplication",
                        format!("product of basis elements {i}, {j} has residual {res:.3e}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    /// Relative distance of `m` from the span.
    pub fn residual(&self, m: &ComplexMatrix) -> f64 {
        relative_residual(&self.basis, m)
    }

    pub fn contains(&self, m: &ComplexMatrix, tol: &Tolerances) -> bool {
        m.shape() == (self.ambient_dim, self.ambient_dim) && self.residual(m) < tol.rank
    }

    /// Span containment `self ⊆ other`.
    pub fn is_subalgebra_of(&self, other: &StarAlgebra, tol: &Tolerances) -> bool {
        self.ambient_dim == other.ambient_dim && self.basis.iter().all(|b| other.contains(b, tol))
    }

    /// Equality as linear spans (bases are not canonical).
    pub fn span_equals(&self, other: &StarAlgebra, tol: &Tolerances) -> bool {
        self.dim() == other.dim() && self.is_subalgebra_of(other, tol) && other.is_subalgebra_of(self, tol)
    }

    pub fn is_commutative(&self, tol: &Tolerances) -> bool {
        self.basis
            .iter()
            .enumerate()
            .all(|(i, a)| self.basis[i + 1..].iter().all(|b| a.commutator(b).norm() <= tol.eig))
    }
}

/// Smallest unital *-algebra of `n x n` matrices containing `generators`.
///
/// Seeds the span with the identity, the generators and their adjoints,
/// then multiplies basis pairs and absorbs new directions until the
/// dimension stops growing (it is bounded by `n²`).
pub fn generate_algebra(ambient_dim: usize, generators: &[ComplexMatrix], tol: &Tolerances) -> Result<StarAlgebra> {
    if ambient_dim == 0 {
        return Err(Error::dimension("ambient dimension must be positive"));
    }
    if let Some(g) = generators.iter().find(|g| g.shape() != (ambient_dim, ambient_dim)) {
        return Err(Error::dimension(format!(
            "generator of shape {:?} in an algebra on C^{ambient_dim}",
            g.shape()
        )));
    }
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    let absorb = |basis: &mut Vec<ComplexMatrix>, m: &ComplexMatrix| -> bool {
        match orthogonal_remainder(basis, m, tol.rank) {
            Some(r) => {
                basis.push(r);
                true
            }
            None => false,
        }
    };
    absorb(&mut basis, &ComplexMatrix::identity(ambient_dim));
    for g in generators {
        absorb(&mut basis, g);
        absorb(&mut basis, &g.adjoint());
    }
    // pairs (i, j) with max(i, j) < checked were already multiplied
    let mut checked = 0;
    while checked < basis.len() {
        let frontier = basis.len();
        for i in 0..frontier {
            for j in 0..frontier {
                if i < checked && j < checked {
                    continue;
                }
                let prod = &basis[i] * &basis[j];
                if absorb(&mut basis, &prod) {
                    let adj = basis.last().unwrap().adjoint();
                    absorb(&mut basis, &adj);
                }
            }
        }
        checked = frontier;
    }
    Ok(StarAlgebra { ambient_dim, basis })
}

/// `𝒜′`: the joint kernel of `B ↦ A_i B − B A_i` over the basis of `alg`.
pub fn commutant(alg: &StarAlgebra, tol: &Tolerances) -> StarAlgebra {
    let n = alg.ambient_dim;
    let nn = n * n;
    let k = alg.dim();
    // row-major vec: vec(AB) = (A ⊗ I) vec B, vec(BA) = (I ⊗ Aᵀ) vec B
    let mut stacked = DMatrix::<C64>::zeros(k * nn, nn);
    for (blk, a) in alg.basis.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let row = blk * nn + i * n + j;
                for m in 0..n {
                    // (A B)_{ij} = Σ_m A_{im} B_{mj};  (B A)_{ij} = Σ_m B_{im} A_{mj}
                    stacked[(row, m * n + j)] += a.get(i, m);
                    stacked[(row, i * n + m)] -= a.get(m, j);
                }
            }
        }
    }
    let kernel = null_space(&stacked, tol.rank);
    let mut basis = Vec::with_capacity(kernel.len());
    for v in kernel {
        if let Some(r) = orthogonal_remainder(&basis, &unvectorize(n, &v), tol.rank) {
            basis.push(r);
        }
    }
    StarAlgebra { ambient_dim: n, basis }
}

/// Orthonormal basis of `span(a) ∩ span(b)` (both orthonormal lists of
/// matrices of the same shape), from the kernel of `[A | −B]`.
pub fn span_intersection(a: &[ComplexMatrix], b: &[ComplexMatrix], tol: &Tolerances) -> Vec<ComplexMatrix> {
    let Some(first) = a.first().or(b.first()) else {
        return Vec::new();
    };
    let (rows, cols) = first.shape();
    let len = rows * cols;
    let mut stacked = DMatrix::<C64>::zeros(len, a.len() + b.len());
    for (c, m) in a.iter().enumerate() {
        for (r, z) in vectorize(m).into_iter().enumerate() {
            stacked[(r, c)] = z;
        }
    }
    for (c, m) in b.iter().enumerate() {
        for (r, z) in vectorize(m).into_iter().enumerate() {
            stacked[(r, a.len() + c)] = -z;
        }
    }
    let mut out = Vec::new();
    for x in null_space(&stacked, tol.rank) {
        let mut m = ComplexMatrix::zeros(rows, cols);
        for (i, ai) in a.iter().enumerate() {
            if x[i] != ZERO {
                m = &m + &ai.scale(x[i]);
            }
        }
        if let Some(r) = orthogonal_remainder(&out, &m, tol.rank) {
            out.push(r);
        }
    }
    out
}

/// Commutant, bicommutant and center of an algebra with the derived
/// factor / von Neumann flags.
#[derive(Debug, Clone, Serialize)]
pub struct CommutantReport {
    pub commutant: StarAlgebra,
    pub bicommutant: StarAlgebra,
    pub center: Vec<ComplexMatrix>,
    /// Dimension of the commutant.
    pub dimension: usize,
    pub center_dim: usize,
    pub is_factor: bool,
    pub is_von_neumann: bool,
}

pub fn analyze(alg: &StarAlgebra, tol: &Tolerances) -> CommutantReport {
    let comm = commutant(alg, tol);
    let bicomm = commutant(&comm, tol);
    let center = span_intersection(&alg.basis, &comm.basis, tol);
    let center_dim = center.len();
    let is_von_neumann = alg.span_equals(&bicomm, tol);
    CommutantReport {
        dimension: comm.dim(),
        commutant: comm,
        bicommutant: bicomm,
        center,
        center_dim,
        is_factor: center_dim == 1,
        is_von_neumann,
    }
}
