//! Von Neumann, entanglement and Araki relative entropies, in nats.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, matrix_log, vnorm, ComplexMatrix, Subsystem, Tolerances, ZeroConvention, C64};
use crate::modular::relative_modular;
use crate::states::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMethod {
    DirectTrace,
    ModularOperator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    /// Nats; `+∞` when the support condition of a relative entropy fails.
    pub value: f64,
    pub method: EntropyMethod,
    /// Rank of the state (for relative entropies, of the reference state).
    pub support_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl EntropyReport {
    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

fn support_dim(eigenvalues: &[f64], tol: &Tolerances) -> usize {
    eigenvalues.iter().filter(|&&x| x > tol.rank).count()
}

/// `−Σ λ ln λ` over the spectrum with `0·ln 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix, tol: &Tolerances) -> EntropyReport {
    let eig = rho.eigenvalues();
    let value = -eig.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>();
    EntropyReport {
        value,
        method: EntropyMethod::DirectTrace,
        support_dim: support_dim(&eig, tol),
        diagnostic: None,
    }
}

/// Entropy of the reduced state of `psi` on the first factor.
pub fn entanglement_entropy(psi: &[C64], dims: (usize, usize), tol: &Tolerances) -> Result<EntropyReport> {
    entanglement_entropy_of(psi, dims, Subsystem::First, tol)
}

pub fn entanglement_entropy_of(
    psi: &[C64],
    dims: (usize, usize),
    keep: Subsystem,
    tol: &Tolerances,
) -> Result<EntropyReport> {
    if psi.len() != dims.0 * dims.1 {
        return Err(Error::dimension(format!(
            "vector of length {} in C^{} ⊗ C^{}",
            psi.len(),
            dims.0,
            dims.1
        )));
    }
    if vnorm(psi) == 0.0 {
        return Err(Error::precondition(
            "state vector nonzero",
            "zero vector has no entropy",
        ));
    }
    let reduced = DensityMatrix::pure(psi, tol)?.reduce(dims, keep)?;
    Ok(von_neumann_entropy(&reduced, tol))
}

fn swap_factors(psi: &[C64], n: usize) -> Vec<C64> {
    let mut out = psi.to_vec();
    for a in 0..n {
        for b in 0..n {
            out[b * n + a] = psi[a * n + b];
        }
    }
    out
}

/// Araki relative entropy `−⟨Ψ| log Δ_{Ψ|Φ} |Ψ⟩` for the first-slot algebra.
pub fn araki_relative_entropy(
    psi: &[C64],
    phi: &[C64],
    dims: (usize, usize),
    tol: &Tolerances,
) -> Result<EntropyReport> {
    araki_relative_entropy_on(psi, phi, dims, Subsystem::First, tol)
}

/// As [`araki_relative_entropy`], for the algebra of the chosen slot.
///
/// The logarithm acts as `log σ₁` from the left and `log ρ₁` from the right
/// in the Schmidt coordinates of `Ψ`. Returns `+∞` with a diagnostic when
/// `Ψ` puts weight on the kernel of `σ₁`.
pub fn araki_relative_entropy_on(
    psi: &[C64],
    phi: &[C64],
    dims: (usize, usize),
    slot: Subsystem,
    tol: &Tolerances,
) -> Result<EntropyReport> {
    let (psi, phi) = match slot {
        Subsystem::First => (psi.to_vec(), phi.to_vec()),
        Subsystem::Second => {
            if dims.0 != dims.1 || psi.len() != dims.0 * dims.1 || phi.len() != psi.len() {
                return Err(Error::dimension(format!(
                    "states of lengths {} and {} in C^{} ⊗ C^{}",
                    psi.len(),
                    phi.len(),
                    dims.0,
                    dims.1
                )));
            }
            (swap_factors(psi, dims.0), swap_factors(phi, dims.0))
        }
    };
    let rel = relative_modular(&psi, &phi, dims, tol)?;
    let sigma = rel.sigma1_frame();
    let sys = eig_hermitian(&sigma, tol)?;
    let support = support_dim(&sys.eigenvalues, tol);
    let c = rel.psi().coefficients();
    let mut kernel_weight = 0.0;
    for (k, &s) in sys.eigenvalues.iter().enumerate() {
        if s <= tol.rank {
            let v = sys.eigenvector(k);
            kernel_weight += v.iter().zip(c).map(|(z, ci)| z.norm_sqr() * ci * ci).sum::<f64>();
        }
    }
    if kernel_weight > tol.rank {
        return Ok(EntropyReport {
            value: f64::INFINITY,
            method: EntropyMethod::ModularOperator,
            support_dim: support,
            diagnostic: Some(format!(
                "support of ρ₁ not contained in support of σ₁: weight {kernel_weight:.3e} on ker σ₁"
            )),
        });
    }
    let log_psi = rel.log_modular_operator_apply(&psi, ZeroConvention::MapToZero)?;
    let value = -crate::linalg::vdot(&psi, &log_psi).re;
    Ok(EntropyReport {
        value,
        method: EntropyMethod::ModularOperator,
        support_dim: support,
        diagnostic: None,
    })
}

/// `Tr[ρ(log ρ − log σ)]` from the density matrices themselves.
pub fn relative_entropy_oracle(rho: &DensityMatrix, sigma: &DensityMatrix, tol: &Tolerances) -> Result<EntropyReport> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dimension(format!(
            "densities of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let sys = eig_hermitian(sigma.matrix(), tol)?;
    let support = support_dim(&sys.eigenvalues, tol);
    let mut kernel_weight = 0.0;
    for (k, &s) in sys.eigenvalues.iter().enumerate() {
        if s <= tol.rank {
            let v = sys.eigenvector(k);
            kernel_weight += crate::linalg::vdot(&v, &rho.matrix().apply(&v)).re;
        }
    }
    if kernel_weight > tol.rank {
        return Ok(EntropyReport {
            value: f64::INFINITY,
            method: EntropyMethod::DirectTrace,
            support_dim: support,
            diagnostic: Some(format!(
                "support of ρ not contained in support of σ: weight {kernel_weight:.3e}"
            )),
        });
    }
    let log_rho = matrix_log(rho.matrix(), ZeroConvention::MapToZero, tol)?;
    let log_sigma = matrix_log(sigma.matrix(), ZeroConvention::MapToZero, tol)?;
    let diff: ComplexMatrix = &log_rho - &log_sigma;
    let value = (rho.matrix() * &diff).trace().re;
    Ok(EntropyReport {
        value,
        method: EntropyMethod::DirectTrace,
        support_dim: support,
        diagnostic: None,
    })
}
