//! Density matrices, the Born rule and Schmidt decompositions of bipartite
//! pure states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{coefficient_matrix, eig_hermitian, kron, vnorm, ComplexMatrix, Tolerances, C64, ZERO};
use crate::projlat::spectral_pvm;

/// Positive, unit-trace Hermitian matrix.
#[derive(Debug, Clone, Serialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dimension(format!(
                "density matrix of shape {:?}",
                matrix.shape()
            )));
        }
        let defect = matrix.hermitian_defect();
        if defect > tol.eig * matrix.norm().max(1.0) {
            return Err(Error::precondition(
                "density matrix hermitian",
                format!("‖ρ − ρ†‖ = {defect:.3e}, expected ≤ {:.0e}", tol.eig),
            ));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > tol.eig {
            return Err(Error::precondition(
                "density matrix trace",
                format!(
                    "density matrix trace = {}, expected 1 ± {:.0e}",
                    crate::linalg::round_significant(tr, 12),
                    tol.eig
                ),
            ));
        }
        let sys = eig_hermitian(&matrix, tol)?;
        if sys.eigenvalues[0] < -tol.eig {
            return Err(Error::precondition(
                "density matrix positive",
                format!(
                    "smallest eigenvalue {:.3e}, expected ≥ −{:.0e}",
                    sys.eigenvalues[0], tol.eig
                ),
            ));
        }
        Ok(DensityMatrix {
            matrix: matrix.hermitian_part(),
        })
    }

    /// `|ψ><ψ|` for a unit vector.
    pub fn pure(psi: &[C64], tol: &Tolerances) -> Result<Self> {
        let norm = vnorm(psi);
        if (norm - 1.0).abs() > tol.eig {
            return Err(Error::precondition(
                "state vector normalized",
                format!("‖ψ‖ = {norm}, expected 1 ± {:.0e}", tol.eig),
            ));
        }
        Ok(DensityMatrix {
            matrix: ComplexMatrix::outer(psi, psi),
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Reduced density on one factor of `C^{d1} ⊗ C^{d2}`.
    pub fn reduce(&self, dims: (usize, usize), keep: crate::linalg::Subsystem) -> Result<DensityMatrix> {
        Ok(DensityMatrix {
            matrix: crate::linalg::partial_trace(&self.matrix, dims, keep)?,
        })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(&self.matrix, &Tolerances::default())
            .expect("validated hermitian")
            .eigenvalues
    }
}

/// `Tr[ρ · O]`.
pub fn expectation(rho: &DensityMatrix, obs: &ComplexMatrix) -> Result<C64> {
    if obs.shape() != rho.matrix.shape() {
        return Err(Error::dimension(format!(
            "observable {:?} against density {:?}",
            obs.shape(),
            rho.matrix.shape()
        )));
    }
    Ok((&rho.matrix * obs).trace())
}

/// Closed real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Probability that measuring `obs` in state `rho` yields a value in the
/// interval: `Tr[P(interval) ρ]` with `P` from the spectral measure of `obs`.
pub fn born_probability(rho: &DensityMatrix, obs: &ComplexMatrix, interval: Interval, tol: &Tolerances) -> Result<f64> {
    if obs.shape() != rho.matrix.shape() {
        return Err(Error::dimension(format!(
            "observable {:?} against density {:?}",
            obs.shape(),
            rho.matrix.shape()
        )));
    }
    let pvm = spectral_pvm(obs, tol)?;
    let p = pvm.projector_where(|x| interval.contains(x));
    Ok((&p * &rho.matrix).trace().re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Purity {
    Pure,
    Mixed,
    MaximallyMixed,
}

pub fn purity_class(rho: &DensityMatrix, tol: &Tolerances) -> Purity {
    let m = &rho.matrix;
    if (&(m * m) - m).norm() < tol.eig {
        return Purity::Pure;
    }
    let n = rho.dim();
    if m.approx_eq(&ComplexMatrix::identity(n).scale_real(1.0 / n as f64), tol.eig) {
        Purity::MaximallyMixed
    } else {
        Purity::Mixed
    }
}

/// `Ψ = Σ_k c_k left_k ⊗ right_k` with `c` descending.
#[derive(Debug, Clone, Serialize)]
pub struct SchmidtDecomposition {
    pub dims: (usize, usize),
    pub coefficients: Vec<f64>,
    /// `n x r` with orthonormal columns, `r = min(n, m)`.
    pub left_basis: ComplexMatrix,
    /// `m x r` with orthonormal columns.
    pub right_basis: ComplexMatrix,
    pub schmidt_rank: usize,
}

impl SchmidtDecomposition {
    /// `Σ c_k left_k ⊗ right_k` as a vector.
    pub fn reconstruct(&self) -> Vec<C64> {
        let (n, m) = self.dims;
        let mut out = vec![ZERO; n * m];
        for (k, &c) in self.coefficients.iter().enumerate() {
            for a in 0..n {
                for b in 0..m {
                    out[a * m + b] += self.left_basis.get(a, k) * self.right_basis.get(b, k) * c;
                }
            }
        }
        out
    }

    /// Coefficient matrix `Σ c_k left_k right_kᵀ`.
    pub fn tilde(&self) -> ComplexMatrix {
        coefficient_matrix(&self.reconstruct(), self.dims).expect("dims consistent")
    }

    pub fn norm_squared(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }
}

/// Schmidt decomposition from the singular value decomposition of the
/// coefficient matrix `Ψ̃ = W Σ Y†`: `left = W`, `right = conj(Y)`.
pub fn schmidt(psi: &[C64], dims: (usize, usize), tol: &Tolerances) -> Result<SchmidtDecomposition> {
    let tilde = coefficient_matrix(psi, dims)?;
    let norm = vnorm(psi);
    if norm == 0.0 {
        return Err(Error::precondition(
            "state vector nonzero",
            "zero vector has no Schmidt decomposition",
        ));
    }
    let svd = crate::linalg::svd(&tilde);
    let coefficients = svd.singular_values;
    let left_basis = svd.u;
    let right_basis = svd.v.conj();
    let schmidt_rank = coefficients.iter().filter(|&&c| c > tol.rank * norm).count();
    Ok(SchmidtDecomposition {
        dims,
        coefficients,
        left_basis,
        right_basis,
        schmidt_rank,
    })
}

/// Pure-state entanglement: Schmidt rank at least two.
pub fn is_entangled_pure(psi: &[C64], dims: (usize, usize), tol: &Tolerances) -> Result<bool> {
    Ok(schmidt(psi, dims, tol)?.schmidt_rank >= 2)
}

/// Builds `Σ c_k left_k ⊗ right_k` from explicit Schmidt data.
pub fn state_from_schmidt(coefficients: &[C64], left: &ComplexMatrix, right: &ComplexMatrix) -> Result<Vec<C64>> {
    let r = coefficients.len();
    if left.cols() != r || right.cols() != r {
        return Err(Error::dimension(format!(
            "{r} coefficients with bases of {} and {} columns",
            left.cols(),
            right.cols()
        )));
    }
    let (n, m) = (left.rows(), right.rows());
    let mut out = vec![ZERO; n * m];
    for (k, &c) in coefficients.iter().enumerate() {
        for a in 0..n {
            for b in 0..m {
                out[a * m + b] += left.get(a, k) * right.get(b, k) * c;
            }
        }
    }
    Ok(out)
}

/// Two-qubit states used in worked examples.
pub mod worked {
    use super::*;

    /// `(|00> + |11>)/√2`.
    pub fn bell() -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]
    }

    /// `c₁|00> + c₂|11>`.
    pub fn entangled_pure(c1: C64, c2: C64) -> Vec<C64> {
        vec![c1, ZERO, ZERO, c2]
    }

    /// `p₁ |0><0|⊗|0><0| + p₂ |1><1|⊗|1><1|`.
    pub fn separable_mixed(p1: f64, p2: f64) -> ComplexMatrix {
        let e0 = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let e1 = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        &kron(&e0, &e0).scale_real(p1) + &kron(&e1, &e1).scale_real(p2)
    }
}
