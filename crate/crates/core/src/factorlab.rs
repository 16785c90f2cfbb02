//! Truncated infinite tensor products of 2x2 site vectors.
//!
//! A chain state is `v₁ ⊗ v₂ ⊗ ⋯` where each `v_k` is a 2x2 matrix (a vector
//! of `C² ⊗ C²`) with `Tr[v_k† v_k] = 1`. Finitely many sites are given
//! explicitly; beyond them every site carries `k_{2,λ_k}` from a [`TailRule`].
//! Sites are numbered from 1. Inner products and `F(a) = ⟨Ψ|a|Ψ⟩` factorize
//! over sites, so nothing of dimension `4^N` is ever built.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hs_inner, random, ComplexMatrix, Tolerances, C64, ONE, ZERO};

/// `k_{2,λ} = (1+λ)^{-1/2} diag(1, √λ)`.
pub fn k_matrix(lambda: f64) -> Result<ComplexMatrix> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidArgument(format!("λ = {lambda} outside (0, 1]")));
    }
    let s = (1.0 + lambda).sqrt().recip();
    Ok(ComplexMatrix::from_real_diagonal(&[s, s * lambda.sqrt()]))
}

/// Rule for the tail parameters `λ_i`, `i = 1, 2, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum TailRule {
    /// `λ_i = 1`, i.e. every tail site is `I₂/√2`.
    IdentityNormalized,
    Constant {
        lambda: f64,
    },
    /// `λ_i = limit + amplitude · i^{-exponent}`.
    Convergent {
        limit: f64,
        amplitude: f64,
        exponent: f64,
    },
    /// `λ` on odd `i`, `λ̃` on even `i`.
    Alternating {
        lambda: f64,
        lambda_tilde: f64,
    },
    /// `λ_i = initial · ratio^{i-1}`.
    Geometric {
        initial: f64,
        ratio: f64,
    },
    /// Explicit values for `λ_1 … λ_h`, then `rest`.
    WithHead {
        head: Vec<f64>,
        rest: Box<TailRule>,
    },
}

impl TailRule {
    /// `λ_i` for `i ≥ 1`.
    pub fn lambda(&self, i: usize) -> Result<f64> {
        if i == 0 {
            return Err(Error::InvalidArgument("tail index starts at 1".into()));
        }
        let x = i as f64;
        let value = match self {
            TailRule::IdentityNormalized => 1.0,
            TailRule::Constant { lambda } => *lambda,
            TailRule::Convergent {
                limit,
                amplitude,
                exponent,
            } => limit + amplitude * x.powf(-exponent),
            TailRule::Alternating { lambda, lambda_tilde } => {
                if i % 2 == 1 {
                    *lambda
                } else {
                    *lambda_tilde
                }
            }
            TailRule::Geometric { initial, ratio } => initial * ratio.powf(x - 1.0),
            TailRule::WithHead { head, rest } => match head.get(i - 1) {
                Some(&v) => v,
                None => rest.lambda(i)?,
            },
        };
        if !(value > 0.0 && value <= 1.0) {
            return Err(Error::precondition("tail lambda in (0, 1]", format!("λ_{i} = {value}")));
        }
        Ok(value)
    }

    /// `λ_1 … λ_count`.
    pub fn lambdas(&self, count: usize) -> Result<Vec<f64>> {
        (1..=count).map(|i| self.lambda(i)).collect()
    }
}

/// Truncated chain `v₁ ⊗ ⋯ ⊗ v_p ⊗ k_{2,λ_{p+1}} ⊗ ⋯ ⊗ k_{2,λ_N}`.
#[derive(Debug, Clone)]
pub struct TensorChainState {
    prefix: Vec<ComplexMatrix>,
    tail: TailRule,
    truncation: usize,
}

impl TensorChainState {
    pub fn new(prefix: Vec<ComplexMatrix>, tail: TailRule, truncation: usize, tol: &Tolerances) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::InvalidArgument("truncation must be at least 1".into()));
        }
        if prefix.len() > truncation {
            return Err(Error::InvalidArgument(format!(
                "prefix of {} sites exceeds truncation {truncation}",
                prefix.len()
            )));
        }
        for (k, v) in prefix.iter().enumerate() {
            if v.shape() != (2, 2) {
                return Err(Error::dimension(format!("site {} has shape {:?}", k + 1, v.shape())));
            }
            let norm = hs_inner(v, v)?.re;
            if (norm - 1.0).abs() > tol.eig {
                return Err(Error::precondition(
                    "site vector normalized",
                    format!("Tr[v{}† v{}] = {norm}", k + 1, k + 1),
                ));
            }
        }
        Ok(TensorChainState {
            prefix,
            tail,
            truncation,
        })
    }

    /// Tail-only chain.
    pub fn from_tail(tail: TailRule, truncation: usize) -> Result<Self> {
        Self::new(Vec::new(), tail, truncation, &Tolerances::default())
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn prefix(&self) -> &[ComplexMatrix] {
        &self.prefix
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    /// The site vector `v_k`, `1 ≤ k ≤ N`.
    pub fn site(&self, k: usize) -> Result<ComplexMatrix> {
        if k == 0 || k > self.truncation {
            return Err(Error::InvalidArgument(format!(
                "site {k} outside 1..={}",
                self.truncation
            )));
        }
        match self.prefix.get(k - 1) {
            Some(v) => Ok(v.clone()),
            None => k_matrix(self.tail.lambda(k)?),
        }
    }

    /// First site carried by the tail, if within the truncation.
    pub fn first_tail_site(&self) -> Option<usize> {
        let k = self.prefix.len() + 1;
        (k <= self.truncation).then_some(k)
    }
}

/// Convergence window and per-site threshold for infinite products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    pub window: usize,
    pub tau_chain: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            window: 50,
            tau_chain: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Converged,
    DivergingToZero,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Trend {
    convergence: Convergence,
    decay_exponent: Option<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Classifies `Σ m_k` for nonnegative increments `m_k = |log o_k|`.
///
/// The increments are settled once their mean over the last window drops
/// below `τ_chain`. Otherwise the decay exponent `p` of `m_k ~ k^{-p}` is
/// estimated from the window means at `N/2` and at `N`: `p ≥ 1.5` counts as
/// summable, `p ≤ 0.5` as divergent.
fn assess(m: &[f64], opts: &ChainOptions) -> Trend {
    let n = m.len();
    let unclear = Trend {
        convergence: Convergence::Undetermined,
        decay_exponent: None,
    };
    if n < 8 {
        return unclear;
    }
    let w = opts.window.min(n / 4).max(1);
    let late = mean(&m[n - w..]);
    if late < opts.tau_chain {
        return Trend {
            convergence: Convergence::Converged,
            decay_exponent: None,
        };
    }
    let mid_end = n / 2;
    let mid = mean(&m[mid_end - w..mid_end]);
    if mid <= opts.tau_chain {
        return unclear;
    }
    let half = (w as f64 - 1.0) / 2.0;
    let centre_mid = mid_end as f64 - half;
    let centre_late = n as f64 - half;
    let p = (mid / late).ln() / (centre_late / centre_mid).ln();
    let convergence = if p >= 1.5 {
        Convergence::Converged
    } else if p <= 0.5 {
        Convergence::DivergingToZero
    } else {
        Convergence::Undetermined
    };
    Trend {
        convergence,
        decay_exponent: Some(p),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainInner {
    #[serde(serialize_with = "crate::linalg::serialize_complex")]
    pub value: C64,
    /// `Σ log |⟨v_k, w_k⟩|`, `-∞` if some factor vanishes.
    pub log_modulus: f64,
    pub convergence: Convergence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_exponent: Option<f64>,
}

/// `⟨v, w⟩ = Π_k Tr[v_k† w_k]` over `k ≤ N`.
pub fn chain_inner(v: &TensorChainState, w: &TensorChainState, opts: &ChainOptions) -> Result<ChainInner> {
    if v.truncation != w.truncation {
        return Err(Error::InvalidArgument(format!(
            "truncations {} and {} differ",
            v.truncation, w.truncation
        )));
    }
    let mut value = ONE;
    let mut increments = Vec::with_capacity(v.truncation);
    for k in 1..=v.truncation {
        let o = hs_inner(&v.site(k)?, &w.site(k)?)?;
        if o.norm() == 0.0 {
            return Ok(ChainInner {
                value: ZERO,
                log_modulus: f64::NEG_INFINITY,
                convergence: Convergence::Converged,
                decay_exponent: None,
            });
        }
        value *= o;
        increments.push(o.norm().ln());
    }
    let magnitudes: Vec<f64> = increments.iter().map(|d| d.abs()).collect();
    let trend = assess(&magnitudes, opts);
    Ok(ChainInner {
        value,
        log_modulus: increments.iter().sum(),
        convergence: trend.convergence,
        decay_exponent: trend.decay_exponent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `a(V) = aV`
    LeftAction,
    /// `b(V) = V b†`
    RightAction,
}

/// `⊗_k a_k` with `a_k = I₂` away from finitely many sites.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteSupportOperator {
    pub factors: BTreeMap<usize, ComplexMatrix>,
    pub side: Side,
}

impl FiniteSupportOperator {
    pub fn new(factors: BTreeMap<usize, ComplexMatrix>, side: Side) -> Result<Self> {
        for (&k, a) in &factors {
            if k == 0 {
                return Err(Error::InvalidArgument("sites are numbered from 1".into()));
            }
            if a.shape() != (2, 2) {
                return Err(Error::dimension(format!(
                    "factor at site {k} has shape {:?}",
                    a.shape()
                )));
            }
        }
        Ok(FiniteSupportOperator { factors, side })
    }

    pub fn identity(side: Side) -> Self {
        FiniteSupportOperator {
            factors: BTreeMap::new(),
            side,
        }
    }

    pub fn single(site: usize, a: ComplexMatrix, side: Side) -> Result<Self> {
        Self::new(BTreeMap::from([(site, a)]), side)
    }

    /// Largest site with a non-identity factor.
    pub fn support_end(&self) -> usize {
        self.factors.keys().next_back().copied().unwrap_or(0)
    }

    /// `self ∘ other`, computed factor by factor.
    pub fn compose(&self, other: &FiniteSupportOperator) -> Result<FiniteSupportOperator> {
        if self.side != other.side {
            return Err(Error::InvalidArgument("cannot compose left and right actions".into()));
        }
        let mut factors = self.factors.clone();
        for (&k, b) in &other.factors {
            let merged = match factors.get(&k) {
                Some(a) => a * b,
                None => b.clone(),
            };
            factors.insert(k, merged);
        }
        Ok(FiniteSupportOperator {
            factors,
            side: self.side,
        })
    }

    fn act(&self, k: usize, v: &ComplexMatrix) -> ComplexMatrix {
        match self.factors.get(&k) {
            None => v.clone(),
            Some(a) => match self.side {
                Side::LeftAction => a * v,
                Side::RightAction => v * &a.adjoint(),
            },
        }
    }
}

/// `F(a) = ⟨Ψ|aΨ⟩ = Π_k Tr[v_k† a_k(v_k)]`; unsupported sites contribute
/// `Tr[v_k† v_k] = 1`.
pub fn functional_f(state: &TensorChainState, a: &FiniteSupportOperator) -> Result<C64> {
    if a.support_end() > state.truncation {
        return Err(Error::InvalidArgument(format!(
            "operator support reaches site {} beyond truncation {}",
            a.support_end(),
            state.truncation
        )));
    }
    let mut value = ONE;
    for &k in a.factors.keys() {
        let v = state.site(k)?;
        value *= hs_inner(&v, &a.act(k, &v))?;
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceVerdict {
    Tracial,
    NonTracial,
}

/// `F(E₁₂E₂₁)` and `F(E₂₁E₁₂)` at one site.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub site: usize,
    pub f_ab: f64,
    pub f_ba: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub max_deviation: f64,
    pub verdict: TraceVerdict,
    pub trials: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// Samples `trials` pairs of left-acting operators on the same one to three
/// random sites, with complex Gaussian factors, and records
/// `max |F(ab) − F(ba)|`. The matrix-unit pair `E₁₂, E₂₁` on the first tail
/// site is always included. Tracial iff the maximum is below `10·τ_eig`.
pub fn trace_property_test(
    state: &TensorChainState,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<TraceReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = state.truncation;
    let mut max_deviation: f64 = 0.0;
    for _ in 0..trials {
        let count = rng.random_range(1..=n.min(3));
        let sites = sample(&mut rng, n, count);
        let mut fa = BTreeMap::new();
        let mut fb = BTreeMap::new();
        for s in sites.iter() {
            fa.insert(s + 1, random::gaussian_matrix(&mut rng, 2, 2));
            fb.insert(s + 1, random::gaussian_matrix(&mut rng, 2, 2));
        }
        let a = FiniteSupportOperator::new(fa, Side::LeftAction)?;
        let b = FiniteSupportOperator::new(fb, Side::LeftAction)?;
        let ab = functional_f(state, &a.compose(&b)?)?;
        let ba = functional_f(state, &b.compose(&a)?)?;
        max_deviation = max_deviation.max((ab - ba).norm());
    }
    let witness = match state.first_tail_site() {
        Some(site) => {
            let a = FiniteSupportOperator::single(site, ComplexMatrix::unit(2, 0, 1), Side::LeftAction)?;
            let b = FiniteSupportOperator::single(site, ComplexMatrix::unit(2, 1, 0), Side::LeftAction)?;
            let f_ab = functional_f(state, &a.compose(&b)?)?;
            let f_ba = functional_f(state, &b.compose(&a)?)?;
            max_deviation = max_deviation.max((f_ab - f_ba).norm());
            Some(Witness {
                site,
                f_ab: f_ab.re,
                f_ba: f_ba.re,
            })
        }
        None => None,
    };
    let verdict = if max_deviation < 10.0 * tol.eig {
        TraceVerdict::Tracial
    } else {
        TraceVerdict::NonTracial
    };
    Ok(TraceReport {
        max_deviation,
        verdict,
        trials,
        seed,
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type")]
pub enum FactorType {
    #[serde(rename = "II_1")]
    TypeII1,
    #[serde(rename = "III_0_like")]
    TypeIII0Like,
    #[serde(rename = "III_lambda")]
    TypeIIILambda { lambda: f64 },
    #[serde(rename = "III_1_like")]
    TypeIII1Like,
    #[serde(rename = "I_inf_like")]
    TypeIInfLike,
}

/// Sum of the trailing half of the window below which a sequence tending
/// to zero counts as summable.
pub const SUMMABLE_THRESHOLD: f64 = 1e-2;

/// Heuristic type of the factor generated by tails `k_{2,λ_i}`, read off
/// `λ_1 … λ_window`.
///
/// * trailing half all within `τ_cluster` of 1: `II_1`
/// * late-quarter spread at least 0.9 of the early-quarter spread: the
///   sequence keeps oscillating, `III_1_like`
/// * otherwise the limit `L` is extrapolated (Aitken, at `i = q, 2q, 4q`
///   with `q = window/4`, exact for power-law approach): `L ≈ 1` gives
///   `II_1`, `L ≈ 0` gives `I_inf_like` when the trailing half sums below
///   [`SUMMABLE_THRESHOLD`] and `III_0_like` otherwise, anything else
///   `III_lambda(L)`.
pub fn classify_type(tail: &TailRule, window: usize, tol: &Tolerances) -> Result<FactorType> {
    if window < 16 {
        return Err(Error::InvalidArgument(format!(
            "window of {window} terms is too short to classify (need 16)"
        )));
    }
    let lam = tail.lambdas(window)?;
    let w = window;
    let trailing = &lam[w / 2..];
    if trailing.iter().all(|x| (x - 1.0).abs() <= tol.cluster) {
        return Ok(FactorType::TypeII1);
    }
    let spread = |xs: &[f64]| {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let early = spread(&lam[w / 2..3 * w / 4]);
    let late = spread(&lam[3 * w / 4..]);
    if late > tol.cluster && late >= 0.9 * early {
        return Ok(FactorType::TypeIII1Like);
    }
    let q = w / 4;
    let (x0, x1, x2) = (lam[q - 1], lam[2 * q - 1], lam[4 * q - 1]);
    let (d1, d2) = (x1 - x0, x2 - x1);
    let denom = d2 - d1;
    let mut limit = if denom.abs() > f64::EPSILON * (x0.abs() + x1.abs() + x2.abs()) {
        x2 - d2 * d2 / denom
    } else {
        x2
    };
    if !limit.is_finite() {
        limit = x2;
    }
    let limit = limit.clamp(0.0, 1.0);
    if (limit - 1.0).abs() <= tol.cluster {
        Ok(FactorType::TypeII1)
    } else if limit <= tol.cluster {
        if trailing.iter().sum::<f64>() < SUMMABLE_THRESHOLD {
            Ok(FactorType::TypeIInfLike)
        } else {
            Ok(FactorType::TypeIII0Like)
        }
    } else {
        Ok(FactorType::TypeIIILambda { lambda: limit })
    }
}

/// Per-site overlaps `c_k = |⟨ψ′_k|ψ_k⟩|`, `k = 1, 2, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum OverlapRule {
    Constant {
        value: f64,
    },
    /// `c_k = cos θ`, angle in degrees.
    Angle {
        degrees: f64,
    },
    /// `c_k = 1 − k^{-exponent}`.
    OneMinusPower {
        exponent: f64,
    },
    /// `c_k = values[k-1]`.
    Explicit {
        values: Vec<f64>,
    },
}

impl OverlapRule {
    pub fn overlap(&self, k: usize) -> Result<f64> {
        let x = k as f64;
        Ok(match self {
            OverlapRule::Constant { value } => *value,
            OverlapRule::Angle { degrees } => degrees.to_radians().cos(),
            OverlapRule::OneMinusPower { exponent } => 1.0 - x.powf(-exponent),
            OverlapRule::Explicit { values } => *values
                .get(k.wrapping_sub(1))
                .ok_or_else(|| Error::dimension(format!("{} explicit overlaps, site {k} requested", values.len())))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorVerdict {
    SameSector,
    OrthogonalSectors,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    /// `Π_{j ≤ k} c_j` over kept terms, one entry per site.
    pub partial_products: Vec<f64>,
    pub log_partial_sums: Vec<f64>,
    pub dropped_zeros: usize,
    pub product: f64,
    pub verdict: SectorVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_exponent: Option<f64>,
}

/// Overlap of two product states, `Π c_k`, with exact zeros removed first.
pub fn sector_overlap(rule: &OverlapRule, truncation: usize, opts: &ChainOptions) -> Result<SectorReport> {
    let c = (1..=truncation)
        .map(|k| rule.overlap(k))
        .collect::<Result<Vec<f64>>>()?;
    sector_overlap_of(&c, opts)
}

/// As [`sector_overlap`] for explicit `c_1 … c_N`.
pub fn sector_overlap_of(c: &[f64], opts: &ChainOptions) -> Result<SectorReport> {
    if c.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "truncation {} below the minimum of 10",
            c.len()
        )));
    }
    let mut log_sum = 0.0;
    let mut dropped_zeros = 0;
    let mut partial_products = Vec::with_capacity(c.len());
    let mut log_partial_sums = Vec::with_capacity(c.len());
    let mut magnitudes = Vec::with_capacity(c.len());
    for (i, &ck) in c.iter().enumerate() {
        if !(0.0..=1.0).contains(&ck) {
            return Err(Error::precondition("overlap in [0, 1]", format!("c_{} = {ck}", i + 1)));
        }
        if ck == 0.0 {
            dropped_zeros += 1;
        } else {
            log_sum += ck.ln();
            magnitudes.push(-ck.ln());
        }
        log_partial_sums.push(log_sum);
        partial_products.push(log_sum.exp());
    }
    let trend = assess(&magnitudes, opts);
    let verdict = match trend.convergence {
        Convergence::Converged => SectorVerdict::SameSector,
        Convergence::DivergingToZero => SectorVerdict::OrthogonalSectors,
        Convergence::Undetermined => SectorVerdict::Undetermined,
    };
    Ok(SectorReport {
        product: log_sum.exp(),
        partial_products,
        log_partial_sums,
        dropped_zeros,
        verdict,
        decay_exponent: trend.decay_exponent,
    })
}
