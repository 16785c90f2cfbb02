//! Projector lattice: spectral measures, the positivity order `≤`,
//! Murray-von Neumann equivalence `∼` and the preorder `⪯`.
//!
//! Equivalence is decided inside a full matrix algebra `B(H)` (where it is
//! a rank comparison) or inside a block-diagonal direct sum of full matrix
//! algebras (per-block rank comparison). Witness partial isometries are
//! built from eigenbases of the ranges, so they are not unique.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, Tolerances, C64};
use crate::staralg::StarAlgebra;

/// Hermitian idempotent.
#[derive(Debug, Clone, Serialize)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dimension(format!("projector of shape {:?}", matrix.shape())));
        }
        let scale = matrix.norm().max(1.0);
        let defect = matrix.hermitian_defect();
        if defect > tol.eig * scale {
            return Err(Error::precondition(
                "projector hermitian",
                format!("‖P − P†‖ = {defect:.3e}"),
            ));
        }
        let idem = (&(&matrix * &matrix) - &matrix).norm();
        if idem > tol.eig * scale {
            return Err(Error::precondition(
                "projector idempotent",
                format!("‖P² − P‖ = {idem:.3e}"),
            ));
        }
        let sys = eig_hermitian(&matrix, tol)?;
        if let Some(x) = sys
            .eigenvalues
            .iter()
            .find(|&&x| x.abs() > tol.cluster && (x - 1.0).abs() > tol.cluster)
        {
            return Err(Error::precondition(
                "projector spectrum in {0, 1}",
                format!("eigenvalue {x}"),
            ));
        }
        let rank = sys.eigenvalues.iter().filter(|&&x| x > 0.5).count();
        Ok(Projector { matrix, rank })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Orthonormal basis of the range, as columns of an `n x rank` matrix.
    pub fn range_basis(&self) -> ComplexMatrix {
        let sys = eig_hermitian(&self.matrix, &Tolerances::default()).expect("validated hermitian");
        let n = self.dim();
        // eigenvalues ascending: the unit eigenvalues are the last `rank`
        let offset = n - self.rank;
        ComplexMatrix::from_fn(n, self.rank, |i, k| sys.eigenvectors.get(i, offset + k))
    }

    /// Sub-projector of rank `r ≤ rank` spanned by the first `r` range vectors.
    pub fn subprojector(&self, r: usize) -> Projector {
        assert!(r <= self.rank, "subprojector rank exceeds rank");
        let basis = self.range_basis();
        let n = self.dim();
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            (0..r).map(|k| basis.get(i, k) * basis.get(j, k).conj()).sum()
        });
        Projector {
            matrix: m.hermitian_part(),
            rank: r,
        }
    }
}

/// `U` with `U†U` (initial projector) and `UU†` (final projector).
#[derive(Debug, Clone, Serialize)]
pub struct PartialIsometry {
    pub matrix: ComplexMatrix,
    pub initial: Projector,
    pub final_: Projector,
}

impl PartialIsometry {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let initial = Projector::new((&matrix.adjoint() * &matrix).hermitian_part(), tol)?;
        let final_ = Projector::new((&matrix * &matrix.adjoint()).hermitian_part(), tol)?;
        if initial.rank != final_.rank {
            return Err(Error::precondition(
                "partial isometry ranks agree",
                format!("rank U†U = {}, rank UU† = {}", initial.rank, final_.rank),
            ));
        }
        Ok(PartialIsometry {
            matrix,
            initial,
            final_,
        })
    }

    pub fn adjoint(&self) -> PartialIsometry {
        PartialIsometry {
            matrix: self.matrix.adjoint(),
            initial: self.final_.clone(),
            final_: self.initial.clone(),
        }
    }
}

/// Projection-valued measure of a Hermitian matrix: clustered eigenvalues
/// with their spectral projectors.
#[derive(Debug, Clone, Serialize)]
pub struct Pvm {
    pub values: Vec<f64>,
    pub projectors: Vec<Projector>,
}

impl Pvm {
    /// `Σ x_i E_i`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.projectors[0].dim();
        self.values
            .iter()
            .zip(&self.projectors)
            .fold(ComplexMatrix::zeros(n, n), |acc, (&x, e)| {
                &acc + &e.matrix.scale_real(x)
            })
    }

    /// Sum of the projectors whose value passes `keep`.
    pub fn projector_where(&self, keep: impl Fn(f64) -> bool) -> ComplexMatrix {
        let n = self.projectors[0].dim();
        self.values
            .iter()
            .zip(&self.projectors)
            .filter(|(&x, _)| keep(x))
            .fold(ComplexMatrix::zeros(n, n), |acc, (_, e)| &acc + &e.matrix)
    }
}

pub fn spectral_pvm(x: &ComplexMatrix, tol: &Tolerances) -> Result<Pvm> {
    let sys = eig_hermitian(x, tol)?;
    let n = sys.dim();
    let mut values = Vec::new();
    let mut projectors = Vec::new();
    for (value, idx) in sys.clusters(tol.cluster) {
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            idx.iter()
                .map(|&k| sys.eigenvectors.get(i, k) * sys.eigenvectors.get(j, k).conj())
                .sum::<C64>()
        });
        values.push(value);
        projectors.push(Projector {
            matrix: m.hermitian_part(),
            rank: idx.len(),
        });
    }
    Ok(Pvm { values, projectors })
}

fn same_dim(p: &Projector, q: &Projector) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::dimension(format!(
            "projectors on C^{} and C^{}",
            p.dim(),
            q.dim()
        )));
    }
    Ok(())
}

/// `p ≤ q`, i.e. `q − p ≥ 0`.
pub fn leq_positive(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<bool> {
    same_dim(p, q)?;
    let diff = &q.matrix - &p.matrix;
    let sys = eig_hermitian(&diff, tol)?;
    Ok(sys.eigenvalues[0] >= -tol.eig)
}

/// Murray-von Neumann equivalence in `B(H)`: when the ranks agree, returns
/// `U` with `U†U = p` and `UU† = q`, built as `Σ_k q_k p_k†` over
/// orthonormal range bases.
pub fn mvn_equivalent(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<Option<PartialIsometry>> {
    same_dim(p, q)?;
    if p.rank != q.rank {
        return Ok(None);
    }
    let pb = p.range_basis();
    let qb = q.range_basis();
    let u = &qb * &pb.adjoint();
    Ok(Some(PartialIsometry::new(u, tol)?))
}

/// The preorder `p ⪯ q` in `B(H)`: `p ∼ e ≤ q` for some projector `e`,
/// which holds exactly when `rank p ≤ rank q`.
pub fn preceq(p: &Projector, q: &Projector, _tol: &Tolerances) -> Result<bool> {
    same_dim(p, q)?;
    Ok(p.rank <= q.rank)
}

/// A witness `(e, U)` for `p ⪯ q`: `e ≤ q` and `U†U = p`, `UU† = e`.
pub fn preceq_witness(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<Option<(Projector, PartialIsometry)>> {
    if !preceq(p, q, tol)? {
        return Ok(None);
    }
    let e = q.subprojector(p.rank);
    let u = mvn_equivalent(p, &e, tol)?.expect("ranks match by construction");
    Ok(Some((e, u)))
}

/// Block sizes of a block-diagonal direct sum `M_{d₁} ⊕ … ⊕ M_{d_k}`.
fn block_ranges(blocks: &[usize], n: usize) -> Result<Vec<std::ops::Range<usize>>> {
    if blocks.iter().sum::<usize>() != n || blocks.contains(&0) {
        return Err(Error::dimension(format!("block sizes {blocks:?} do not partition {n}")));
    }
    let mut start = 0;
    Ok(blocks
        .iter()
        .map(|&d| {
            let r = start..start + d;
            start += d;
            r
        })
        .collect())
}

fn block_ranks(p: &Projector, ranges: &[std::ops::Range<usize>], tol: &Tolerances) -> Result<Vec<usize>> {
    let m = &p.matrix;
    for (a, ra) in ranges.iter().enumerate() {
        for (b, rb) in ranges.iter().enumerate() {
            if a == b {
                continue;
            }
            for i in ra.clone() {
                for j in rb.clone() {
                    if m.get(i, j).norm() > tol.eig {
                        return Err(Error::precondition(
                            "projector in block algebra",
                            format!("off-block entry ({i}, {j}) = {}", m.get(i, j)),
                        ));
                    }
                }
            }
        }
    }
    ranges
        .iter()
        .map(|r| {
            let d = r.len();
            let sub = ComplexMatrix::from_fn(d, d, |i, j| m.get(r.start + i, r.start + j));
            Ok(Projector::new(sub, tol)?.rank)
        })
        .collect()
}

/// Equivalence inside the block-diagonal algebra `⊕ M_{d_k}`: ranks must
/// agree block by block, and the witness is assembled blockwise.
pub fn mvn_equivalent_in_blocks(
    p: &Projector,
    q: &Projector,
    blocks: &[usize],
    tol: &Tolerances,
) -> Result<Option<PartialIsometry>> {
    same_dim(p, q)?;
    let ranges = block_ranges(blocks, p.dim())?;
    if block_ranks(p, &ranges, tol)? != block_ranks(q, &ranges, tol)? {
        return Ok(None);
    }
    let n = p.dim();
    let mut u = ComplexMatrix::zeros(n, n);
    for r in &ranges {
        let d = r.len();
        let pb = Projector::new(
            ComplexMatrix::from_fn(d, d, |i, j| p.matrix.get(r.start + i, r.start + j)),
            tol,
        )?;
        let qb = Projector::new(
            ComplexMatrix::from_fn(d, d, |i, j| q.matrix.get(r.start + i, r.start + j)),
            tol,
        )?;
        let ub = &qb.range_basis() * &pb.range_basis().adjoint();
        for i in 0..d {
            for j in 0..d {
                u.set(r.start + i, r.start + j, ub.get(i, j));
            }
        }
    }
    Ok(Some(PartialIsometry::new(u, tol)?))
}

/// `p ⪯ q` inside `⊕ M_{d_k}`: blockwise rank comparison.
pub fn preceq_in_blocks(p: &Projector, q: &Projector, blocks: &[usize], tol: &Tolerances) -> Result<bool> {
    same_dim(p, q)?;
    let ranges = block_ranges(blocks, p.dim())?;
    let rp = block_ranks(p, &ranges, tol)?;
    let rq = block_ranks(q, &ranges, tol)?;
    Ok(rp.iter().zip(&rq).all(|(a, b)| a <= b))
}

/// `p 𝒜 p = ℂ p`, tested on a basis of `alg`.
pub fn is_minimal(p: &Projector, alg: &StarAlgebra, tol: &Tolerances) -> Result<bool> {
    if p.dim() != alg.ambient_dim() {
        return Err(Error::dimension(format!(
            "projector on C^{} against algebra on C^{}",
            p.dim(),
            alg.ambient_dim()
        )));
    }
    let res = alg.residual(&p.matrix);
    if res >= tol.rank {
        return Err(Error::precondition(
            "projector in algebra",
            format!("projection residual {res:.3e}"),
        ));
    }
    let pp = p.matrix.norm().powi(2);
    if pp == 0.0 {
        return Ok(false);
    }
    for a in alg.basis() {
        let pap = &(&p.matrix * a) * &p.matrix;
        let coeff = crate::linalg::hs_inner(&p.matrix, &pap)? / pp;
        if (&pap - &p.matrix.scale(coeff)).norm() > tol.eig.max(1e-12) * 10.0 {
            return Ok(false);
        }
    }
    Ok(true)
}
