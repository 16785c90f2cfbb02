//! Tomita-Takesaki objects for a bipartite pure state `Ψ ∈ Cⁿ ⊗ Cⁿ`, with
//! `𝒜 = Mₙ ⊗ 1` acting on the first slot and `𝒜′ = 1 ⊗ Mₙ` on the second.
//!
//! Vectors are handled through coefficient matrices `ξ̃` (row-major
//! reshaping, see [`coefficient_matrix`]). Writing the Schmidt form as
//! `Ψ̃ = L diag(c) Rᵀ`, the coordinates `X = L† ξ̃ conj(R)` expand
//! `ξ = Σ X_ij |i,j⟩` in the Schmidt product basis `|i,j⟩ = lᵢ ⊗ rⱼ`. There
//!
//! * `S X = c⁻¹ X† c`, so `S|j,i⟩ = (c_j/c_i)|i,j⟩`
//! * `Δ X = c² X c⁻²`, so `Δ|i,j⟩ = (c_i²/c_j²)|i,j⟩`
//! * `J X = X†`
//!
//! The `*_apply` functions rotate into these coordinates and back. The
//! explicit operators ([`ModularData::tomita_operator`] and friends) are
//! built from computational-basis formulas instead, which makes them useful
//! as cross-checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    coefficient_matrix, kron, matrix_function, matrix_function_complex, matrix_to_vector, swap_operator, vnorm,
    ComplexMatrix, Subsystem, Tolerances, ZeroConvention, C64, ZERO,
};
use crate::states::{schmidt, DensityMatrix, SchmidtDecomposition};

/// Antilinear map `x ↦ M·conj(x)`, stored by its matrix `M`.
///
/// Composition and adjoints go through the methods here; treating `M` as an
/// ordinary linear operator gives wrong answers.
#[derive(Debug, Clone)]
pub struct Antilinear {
    matrix: ComplexMatrix,
}

impl Antilinear {
    pub fn new(matrix: ComplexMatrix) -> Self {
        Antilinear { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let conj: Vec<C64> = x.iter().map(|z| z.conj()).collect();
        self.matrix.apply(&conj)
    }

    /// The adjoint `A†` defined by `⟨Aξ, η⟩ = ⟨A†η, ξ⟩`; its matrix is `Mᵀ`.
    pub fn adjoint(&self) -> Antilinear {
        Antilinear {
            matrix: self.matrix.transpose(),
        }
    }

    /// `self ∘ other`, which is linear: `M₁ conj(M₂)`.
    pub fn after(&self, other: &Antilinear) -> ComplexMatrix {
        &self.matrix * &other.matrix.conj()
    }

    /// `self ∘ l` for a linear `l`.
    pub fn after_linear(&self, l: &ComplexMatrix) -> Antilinear {
        Antilinear {
            matrix: &self.matrix * &l.conj(),
        }
    }

    /// `l ∘ self` for a linear `l`.
    pub fn before_linear(&self, l: &ComplexMatrix) -> Antilinear {
        Antilinear {
            matrix: l * &self.matrix,
        }
    }
}

fn square_dim(dims: (usize, usize)) -> Result<usize> {
    if dims.0 != dims.1 || dims.0 == 0 {
        return Err(Error::dimension(format!(
            "modular theory needs a square bipartition, got {} x {}",
            dims.0, dims.1
        )));
    }
    Ok(dims.0)
}

fn require_unit(psi: &[C64], tol: &Tolerances) -> Result<()> {
    let norm = vnorm(psi);
    if (norm - 1.0).abs() > tol.eig.max(tol.rank) {
        return Err(Error::precondition(
            "state vector normalized",
            format!("‖ψ‖ = {}, expected 1", crate::linalg::round_significant(norm, 12)),
        ));
    }
    Ok(())
}

fn require_len(xi: &[C64], n: usize) -> Result<()> {
    if xi.len() != n * n {
        return Err(Error::dimension(format!(
            "vector of length {} in C^{n} ⊗ C^{n}",
            xi.len()
        )));
    }
    Ok(())
}

fn require_operator(a: &ComplexMatrix, n: usize) -> Result<()> {
    if a.shape() != (n, n) {
        return Err(Error::dimension(format!("operator {:?} on C^{n}", a.shape())));
    }
    Ok(())
}

/// True iff every Schmidt coefficient exceeds `τ_rank`, i.e. `Ψ` is cyclic
/// and separating for both `𝒜` and `𝒜′`.
pub fn is_cyclic_separating(psi: &[C64], dims: (usize, usize), tol: &Tolerances) -> Result<bool> {
    let n = square_dim(dims)?;
    require_unit(psi, tol)?;
    Ok(schmidt(psi, dims, tol)?.schmidt_rank == n)
}

/// Modular data of a cyclic and separating state.
#[derive(Debug, Clone)]
pub struct ModularData {
    n: usize,
    psi: Vec<C64>,
    state: SchmidtDecomposition,
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    tol: Tolerances,
}

impl ModularData {
    pub fn new(psi: &[C64], dims: (usize, usize), tol: &Tolerances) -> Result<Self> {
        let n = square_dim(dims)?;
        require_len(psi, n)?;
        require_unit(psi, tol)?;
        let state = schmidt(psi, dims, tol)?;
        if state.schmidt_rank < n {
            return Err(Error::precondition(
                "state cyclic and separating",
                format!(
                    "Schmidt rank {} < {n}, smallest coefficient {:.3e}",
                    state.schmidt_rank,
                    state.coefficients.last().copied().unwrap_or(0.0)
                ),
            ));
        }
        let pure = DensityMatrix::pure(psi, tol)?;
        Ok(ModularData {
            n,
            psi: psi.to_vec(),
            rho1: pure.reduce(dims, Subsystem::First)?,
            rho2: pure.reduce(dims, Subsystem::Second)?,
            state,
            tol: *tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn psi(&self) -> &[C64] {
        &self.psi
    }

    pub fn schmidt(&self) -> &SchmidtDecomposition {
        &self.state
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.state.coefficients
    }

    pub fn rho1(&self) -> &DensityMatrix {
        &self.rho1
    }

    pub fn rho2(&self) -> &DensityMatrix {
        &self.rho2
    }

    /// `c_i² / c_j²`, the eigenvalue of `Δ` on `|i,j⟩`.
    pub fn delta_eigenvalue(&self, i: usize, j: usize) -> f64 {
        let c = &self.state.coefficients;
        (c[i] / c[j]).powi(2)
    }

    /// The Schmidt product basis vector `lᵢ ⊗ rⱼ`.
    pub fn schmidt_ket(&self, i: usize, j: usize) -> Vec<C64> {
        let n = self.n;
        let l = self.state.left_basis.column_vec(i);
        let r = self.state.right_basis.column_vec(j);
        let mut out = vec![ZERO; n * n];
        for a in 0..n {
            for b in 0..n {
                out[a * n + b] = l[a] * r[b];
            }
        }
        out
    }

    pub(crate) fn to_frame(&self, xi: &[C64]) -> Result<ComplexMatrix> {
        require_len(xi, self.n)?;
        let tilde = coefficient_matrix(xi, (self.n, self.n))?;
        Ok(&(&self.state.left_basis.adjoint() * &tilde) * &self.state.right_basis.conj())
    }

    pub(crate) fn from_frame(&self, x: &ComplexMatrix) -> Vec<C64> {
        let tilde = &(&self.state.left_basis * x) * &self.state.right_basis.transpose();
        matrix_to_vector(&tilde)
    }

    fn map_frame(&self, xi: &[C64], f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Result<Vec<C64>> {
        let x = self.to_frame(xi)?;
        Ok(self.from_frame(&f(&x)))
    }

    /// Coefficient matrix of `Ψ`.
    pub fn tilde(&self) -> ComplexMatrix {
        coefficient_matrix(&self.psi, (self.n, self.n)).expect("length checked")
    }

    /// `S` as an explicit antilinear matrix: `S ξ̃ = Ψ̃^{-†} ξ̃† Ψ̃`, i.e.
    /// `M = (Ψ̃^{-†} ⊗ Ψ̃ᵀ)·SWAP`.
    pub fn tomita_operator(&self) -> Antilinear {
        let t = self.tilde();
        let inv_dag = t.try_inverse().expect("full Schmidt rank").adjoint();
        Antilinear::new(&kron(&inv_dag, &t.transpose()) * &swap_operator(self.n))
    }

    /// `J` as an explicit antilinear matrix: `J ξ̃ = W ξ̃† W` with `W` the
    /// unitary polar factor of `Ψ̃`.
    pub fn conjugation_operator(&self) -> Antilinear {
        let w = &self.state.left_basis * &self.state.right_basis.transpose();
        Antilinear::new(&kron(&w, &w.transpose()) * &swap_operator(self.n))
    }

    /// `Δ^z = ρ₁^z ⊗ ρ₂^{-z}` as an `n² × n²` matrix.
    pub fn delta_power_matrix(&self, z: C64) -> ComplexMatrix {
        let pow = |m: &ComplexMatrix, w: C64| {
            matrix_function_complex(m, |x| Some((w * x.max(f64::MIN_POSITIVE).ln()).exp()), &self.tol)
                .expect("density is hermitian")
        };
        kron(&pow(self.rho1.matrix(), z), &pow(self.rho2.matrix(), -z))
    }

    pub fn delta_matrix(&self) -> ComplexMatrix {
        self.delta_power_matrix(C64::new(1.0, 0.0))
    }

    /// Residuals of the defining identities, measured on the Schmidt product
    /// basis and on `(E_ij ⊗ 1)Ψ` for all matrix units.
    pub fn residuals(&self) -> ModularResiduals {
        let n = self.n;
        let mut out = ModularResiduals::default();
        let diff = |a: &[C64], b: &[C64]| crate::linalg::vdistance(a, b);
        out.tomita_fixes_psi = diff(&tomita_apply(self, &self.psi).unwrap(), &self.psi);
        out.delta_fixes_psi = diff(&modular_operator_apply(self, &self.psi).unwrap(), &self.psi);
        let half = C64::new(0.5, 0.0);
        for i in 0..n {
            for j in 0..n {
                let ket = self.schmidt_ket(i, j);
                let s = tomita_apply(self, &ket).unwrap();
                let ss = tomita_apply(self, &s).unwrap();
                out.tomita_involution = out.tomita_involution.max(diff(&ss, &ket));
                let polar =
                    modular_conjugation_apply(self, &modular_operator_power_apply(self, &ket, half).unwrap()).unwrap();
                out.polar = out.polar.max(diff(&polar, &s));
                let jdj = modular_conjugation_apply(
                    self,
                    &modular_operator_apply(self, &modular_conjugation_apply(self, &ket).unwrap()).unwrap(),
                )
                .unwrap();
                let inv = modular_operator_power_apply(self, &ket, C64::new(-1.0, 0.0)).unwrap();
                out.j_delta_j = out.j_delta_j.max(diff(&jdj, &inv) / vnorm(&inv).max(1.0));

                let e = ComplexMatrix::unit(n, i, j);
                let a_psi = kron(&e, &ComplexMatrix::identity(n)).apply(&self.psi);
                let adag_psi = kron(&e.adjoint(), &ComplexMatrix::identity(n)).apply(&self.psi);
                let lhs = tomita_apply(self, &a_psi).unwrap();
                out.tomita_on_algebra = out.tomita_on_algebra.max(diff(&lhs, &adag_psi));
            }
        }
        out
    }
}

/// Largest deviations from the modular identities, see
/// [`ModularData::residuals`].
#[derive(Debug, Clone, Default, Serialize)]
pub struct ModularResiduals {
    /// `‖SΨ − Ψ‖`
    pub tomita_fixes_psi: f64,
    /// `‖ΔΨ − Ψ‖`
    pub delta_fixes_psi: f64,
    /// `‖S²ξ − ξ‖`
    pub tomita_involution: f64,
    /// `‖JΔ^{1/2}ξ − Sξ‖`
    pub polar: f64,
    /// `‖JΔJξ − Δ⁻¹ξ‖`, relative to `‖Δ⁻¹ξ‖` when that exceeds one
    pub j_delta_j: f64,
    /// `‖S(a⊗1)Ψ − (a†⊗1)Ψ‖` over matrix units `a`
    pub tomita_on_algebra: f64,
}

impl ModularResiduals {
    pub fn max(&self) -> f64 {
        [
            self.tomita_fixes_psi,
            self.delta_fixes_psi,
            self.tomita_involution,
            self.polar,
            self.j_delta_j,
            self.tomita_on_algebra,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn scale_cols_rows(x: &ComplexMatrix, f: impl Fn(usize, usize) -> C64) -> ComplexMatrix {
    ComplexMatrix::from_fn(x.rows(), x.cols(), |i, j| x.get(i, j) * f(i, j))
}

/// `S_Ψ ξ`; antilinear, `S|j,i⟩ = (c_j/c_i)|i,j⟩` in the Schmidt basis.
pub fn tomita_apply(md: &ModularData, xi: &[C64]) -> Result<Vec<C64>> {
    let c = &md.state.coefficients;
    md.map_frame(xi, |x| scale_cols_rows(&x.adjoint(), |i, j| C64::new(c[j] / c[i], 0.0)))
}

/// `S_Ψ† η`; antilinear, `S†|j,i⟩ = (c_i/c_j)|i,j⟩`.
pub fn tomita_adjoint_apply(md: &ModularData, eta: &[C64]) -> Result<Vec<C64>> {
    let c = &md.state.coefficients;
    md.map_frame(eta, |x| {
        scale_cols_rows(&x.adjoint(), |i, j| C64::new(c[i] / c[j], 0.0))
    })
}

/// `Δ_Ψ ξ = S†S ξ`.
pub fn modular_operator_apply(md: &ModularData, xi: &[C64]) -> Result<Vec<C64>> {
    modular_operator_power_apply(md, xi, C64::new(1.0, 0.0))
}

/// `Δ_Ψ^z ξ` for complex `z`; `|i,j⟩ ↦ (c_i²/c_j²)^z |i,j⟩`.
pub fn modular_operator_power_apply(md: &ModularData, xi: &[C64], z: C64) -> Result<Vec<C64>> {
    let c = &md.state.coefficients;
    md.map_frame(xi, |x| {
        scale_cols_rows(x, |i, j| (z * (2.0 * (c[i] / c[j]).ln())).exp())
    })
}

/// `J_Ψ ξ`; antilinear swap `|j,i⟩ ↦ |i,j⟩` in the Schmidt basis.
pub fn modular_conjugation_apply(md: &ModularData, xi: &[C64]) -> Result<Vec<C64>> {
    md.map_frame(xi, |x| x.adjoint())
}

/// `ρ₁^{is} a ρ₁^{-is}`, the first-slot factor of `Δ^{is}(a⊗1)Δ^{-is}`.
pub fn modular_flow(md: &ModularData, a: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    require_operator(a, md.n)?;
    let u = crate::linalg::imaginary_power(md.rho1.matrix(), s, &md.tol)?;
    Ok(&(&u * a) * &u.adjoint())
}

/// The operator `b` on the second slot with `J(a⊗1)J = 1⊗b`. In the
/// Schmidt bases `b` is the entrywise conjugate of `a`.
pub fn conjugation_to_commutant(md: &ModularData, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_operator(a, md.n)?;
    let l = &md.state.left_basis;
    let r = &md.state.right_basis;
    let in_frame = &(&l.adjoint() * a) * l;
    Ok(&(r * &in_frame.conj()) * &r.adjoint())
}

/// Relative modular data of `Ψ` (cyclic and separating) and an arbitrary
/// unit vector `Φ`. In `Ψ`'s Schmidt coordinates, with `Φ′ = L† Φ̃ conj(R)`
/// and `σ₁′ = Φ′Φ′†`,
///
/// * `S_{Ψ|Φ} X = c⁻¹ X† Φ′`
/// * `Δ_{Ψ|Φ} X = σ₁′ X c⁻²`
///
/// so `Δ_{Ψ|Φ}` is the superoperator `ξ̃ ↦ σ₁ ξ̃ ρ₁⁻¹` of that frame, and
/// `σ₁ ⊗ ρ₂⁻¹` as a matrix on `Cⁿ ⊗ Cⁿ`.
#[derive(Debug, Clone)]
pub struct RelativeModularData {
    psi: ModularData,
    phi: Vec<C64>,
    /// `Φ` in the Schmidt coordinates of `Ψ`
    phi_frame: ComplexMatrix,
    sigma1: DensityMatrix,
    tol: Tolerances,
}

pub fn relative_modular(
    psi: &[C64],
    phi: &[C64],
    dims: (usize, usize),
    tol: &Tolerances,
) -> Result<RelativeModularData> {
    let md = ModularData::new(psi, dims, tol)?;
    RelativeModularData::from_modular(md, phi)
}

impl RelativeModularData {
    pub fn from_modular(md: ModularData, phi: &[C64]) -> Result<Self> {
        let n = md.n;
        require_len(phi, n)?;
        require_unit(phi, &md.tol)?;
        let tol = md.tol;
        let sigma1 = DensityMatrix::pure(phi, &tol)?.reduce((n, n), Subsystem::First)?;
        let phi_frame = md.to_frame(phi)?;
        Ok(RelativeModularData {
            psi: md,
            phi: phi.to_vec(),
            phi_frame,
            sigma1,
            tol,
        })
    }

    pub fn psi(&self) -> &ModularData {
        &self.psi
    }

    pub fn phi(&self) -> &[C64] {
        &self.phi
    }

    pub fn phi_frame(&self) -> &ComplexMatrix {
        &self.phi_frame
    }

    pub fn sigma1(&self) -> &DensityMatrix {
        &self.sigma1
    }

    pub fn rho1(&self) -> &DensityMatrix {
        &self.psi.rho1
    }

    /// `σ₁` in the Schmidt coordinates of `Ψ`.
    pub fn sigma1_frame(&self) -> ComplexMatrix {
        (&self.phi_frame * &self.phi_frame.adjoint()).hermitian_part()
    }

    /// `S_{Ψ|Φ} ξ`; maps `(a⊗1)Ψ` to `(a†⊗1)Φ`.
    pub fn tomita_apply(&self, xi: &[C64]) -> Result<Vec<C64>> {
        let c = &self.psi.state.coefficients;
        self.psi.map_frame(xi, |x| {
            let inv_c_xdag = scale_cols_rows(&x.adjoint(), |i, _| C64::new(1.0 / c[i], 0.0));
            &inv_c_xdag * &self.phi_frame
        })
    }

    /// `S_{Ψ|Φ}† η = Φ̃ η̃† Ψ̃^{-†}` (in frame coordinates `Φ′ Y† c⁻¹`).
    pub fn tomita_adjoint_apply(&self, eta: &[C64]) -> Result<Vec<C64>> {
        let c = &self.psi.state.coefficients;
        self.psi.map_frame(eta, |y| {
            let prod = &self.phi_frame * &y.adjoint();
            scale_cols_rows(&prod, |_, j| C64::new(1.0 / c[j], 0.0))
        })
    }

    /// `Δ_{Ψ|Φ} ξ`.
    pub fn modular_operator_apply(&self, xi: &[C64]) -> Result<Vec<C64>> {
        let c = &self.psi.state.coefficients;
        let sigma = self.sigma1_frame();
        self.psi.map_frame(xi, |x| {
            let right = scale_cols_rows(x, |_, j| C64::new(1.0 / (c[j] * c[j]), 0.0));
            &sigma * &right
        })
    }

    /// `log Δ_{Ψ|Φ} ξ = (log σ₁′) X − X (log c²)`. On the kernel of `σ₁`
    /// the logarithm follows `zero`.
    pub fn log_modular_operator_apply(&self, xi: &[C64], zero: ZeroConvention) -> Result<Vec<C64>> {
        let c = &self.psi.state.coefficients;
        let log_sigma = crate::linalg::matrix_log(&self.sigma1_frame(), zero, &self.tol)?;
        let x = self.psi.to_frame(xi)?;
        let left = &log_sigma * &x;
        let right = scale_cols_rows(&x, |_, j| C64::new(2.0 * c[j].ln(), 0.0));
        Ok(self.psi.from_frame(&(&left - &right)))
    }

    /// `Δ_{Ψ|Φ}^z = σ₁^z ⊗ ρ₂^{-z}` as an `n² × n²` matrix, with `0^z := 0`
    /// on the kernel of `σ₁`.
    pub fn delta_power_matrix(&self, z: C64) -> ComplexMatrix {
        let cutoff = self.tol.rank;
        let sigma_z = matrix_function_complex(
            self.sigma1.matrix(),
            |x| Some(if x > cutoff { (z * x.ln()).exp() } else { ZERO }),
            &self.tol,
        )
        .expect("density is hermitian");
        let rho_z = matrix_function_complex(
            self.psi.rho2.matrix(),
            |x| Some((-z * x.max(f64::MIN_POSITIVE).ln()).exp()),
            &self.tol,
        )
        .expect("density is hermitian");
        kron(&sigma_z, &rho_z)
    }

    pub fn delta_matrix(&self) -> ComplexMatrix {
        let rho2_inv =
            matrix_function(self.psi.rho2.matrix(), |x| Some(1.0 / x), &self.tol).expect("density is hermitian");
        kron(self.sigma1.matrix(), &rho2_inv)
    }

    /// Eigenvalues `s_α / c_j²` of `Δ_{Ψ|Φ}`, ascending, where `s_α` runs over
    /// the spectrum of `σ₁`.
    pub fn spectrum(&self) -> Vec<f64> {
        let s = self.sigma1.eigenvalues();
        let c = &self.psi.state.coefficients;
        let mut out: Vec<f64> = s
            .iter()
            .flat_map(|&sa| c.iter().map(move |&cj| sa.max(0.0) / (cj * cj)))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// `σ₁^{is} a σ₁^{-is}`, the first-slot factor of
    /// `Δ_{Ψ|Φ}^{is}(a⊗1)Δ_{Ψ|Φ}^{-is}`. Independent of `Ψ`.
    pub fn flow(&self, a: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
        require_operator(a, self.psi.n)?;
        let u = crate::linalg::imaginary_power(self.sigma1.matrix(), s, &self.tol)?;
        Ok(&(&u * a) * &u.adjoint())
    }
}
