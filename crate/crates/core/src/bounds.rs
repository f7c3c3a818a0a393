//! Closed-form recovery threshold, stability bound and tolerable eigenbasis
//! perturbation for the convex estimator, plus the exact algebraic identities
//! behind them.
//!
//! Notation follows the rest of the crate: `g0`/`h0` are the reciprocal
//! inverse/forward frequency responses, `x0` the sparse source, `Ω` its
//! support, `V` the true basis and `V_p = V − Δ` the one handed to the
//! estimator.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::filters::{apply_spectral, node_operator};
use crate::graph::u_tilde;
use crate::linalg::{
    khatri_rao_columns, norm2, norm_1_1, norm_1to2, project_ones_complement, spectral_norm,
    DenseMatrix,
};

/// Largest admissible sparsity level.
pub const THETA_MAX: f64 = 0.324;
const WORST_CASE_GRID: usize = 1001;
const SPECTRAL_TOL: f64 = 1e-10;

/// The σ at which `Q` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaChoice {
    Value(f64),
    /// Minimum over a 1001-point grid on [0, 1].
    WorstCase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    pub theta: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub sigma4: f64,
    pub delta_prob: f64,
    pub c1: f64,
    pub sigma_q: SigmaChoice,
}

impl BoundParams {
    /// σ1, σ2 at their upper limits (smallest `a0`), σ3 = σ4 = 0.1,
    /// δ = 0.05, `C1 = 1`, worst-case σ in `Q`.
    pub fn defaults(theta: f64) -> Self {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        Self {
            theta,
            sigma1: sigma1_max(theta),
            sigma2: sqrt_pi * theta / 2.0,
            sigma3: 0.1,
            sigma4: 0.1,
            delta_prob: 0.05,
            c1: 1.0,
            sigma_q: SigmaChoice::WorstCase,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let t = self.theta;
        if !(t > 0.0 && t <= THETA_MAX) {
            bad.push(format!("theta = {t} not in (0, {THETA_MAX}]"));
        }
        let s1_max = sigma1_max(t);
        if !(self.sigma1 > 0.0 && self.sigma1 <= s1_max * (1.0 + 1e-12)) {
            bad.push(format!("sigma1 = {} not in (0, {s1_max}]", self.sigma1));
        }
        let s2_max = std::f64::consts::PI.sqrt() * t / 2.0;
        if !(self.sigma2 > 0.0 && self.sigma2 <= s2_max * (1.0 + 1e-12)) {
            bad.push(format!("sigma2 = {} not in (0, {s2_max}]", self.sigma2));
        }
        if !(self.sigma3 > 0.0) {
            bad.push(format!("sigma3 = {} must be positive", self.sigma3));
        }
        if !(self.sigma4 > 0.0 && self.sigma4 < 1.0) {
            bad.push(format!("sigma4 = {} not in (0, 1)", self.sigma4));
        }
        if !(self.delta_prob > 0.0 && self.delta_prob < 1.0) {
            bad.push(format!("delta_prob = {} not in (0, 1)", self.delta_prob));
        }
        if !(self.c1 > 0.0) {
            bad.push(format!("c1 = {} must be positive", self.c1));
        }
        if let SigmaChoice::Value(s) = self.sigma_q {
            if !(0.0..=1.0).contains(&s) {
                bad.push(format!("sigma_q = {s} not in [0, 1]"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            input(format!("invalid bound parameters: {}", bad.join("; ")))
        }
    }

    /// `min(σ1, σ2, σ3, σ4)`.
    pub fn sigma_min(&self) -> f64 {
        self.sigma1
            .min(self.sigma2)
            .min(self.sigma3)
            .min(self.sigma4)
    }

    /// Sample-size requirement `C′ σ_m⁻² log(4/δ)` for a caller-supplied
    /// constant `C′`. Reported, never enforced.
    pub fn sample_size_requirement(&self, c_prime: f64) -> f64 {
        c_prime * (4.0 / self.delta_prob).ln() / self.sigma_min().powi(2)
    }
}

fn sigma1_max(theta: f64) -> f64 {
    std::f64::consts::PI.sqrt() * theta.powf(1.5) / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecoveryThreshold {
    /// `max(a0, 0)`.
    pub a0: f64,
    /// Unclipped formula value.
    pub raw: f64,
    pub sigma_max_u: f64,
    /// `(1 − σ1) − 2θ(1 + σ2) ≤ 0`: the threshold is vacuous.
    pub bracket_nonpositive: bool,
}

/// Recovery threshold
/// `a0 = √(1 − σ²_max(Ũ))·[(1 − σ1) − 2θ(1 + σ2)]·(1 − σ4) / ((1 + σ3)√θ)`.
pub fn a0(v: &DenseMatrix, params: &BoundParams) -> Result<RecoveryThreshold> {
    params.validate()?;
    let sigma_max_u = spectral_norm(&u_tilde(v)?, SPECTRAL_TOL);
    Ok(a0_from_sigma(sigma_max_u, params))
}

pub(crate) fn a0_from_sigma(sigma_max_u: f64, p: &BoundParams) -> RecoveryThreshold {
    let root = (1.0 - sigma_max_u * sigma_max_u).max(0.0).sqrt();
    let bracket = (1.0 - p.sigma1) - 2.0 * p.theta * (1.0 + p.sigma2);
    let raw = root * bracket * (1.0 - p.sigma4) / ((1.0 + p.sigma3) * p.theta.sqrt());
    RecoveryThreshold {
        a0: raw.max(0.0),
        raw,
        sigma_max_u,
        bracket_nonpositive: bracket <= 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecoveryCheck {
    pub holds: bool,
    /// `‖P₁⊥ g0‖₂`.
    pub lhs: f64,
    /// `a0`.
    pub rhs: f64,
}

pub fn exact_recovery_check(
    g0: &[f64],
    v: &DenseMatrix,
    params: &BoundParams,
) -> Result<RecoveryCheck> {
    if g0.len() != v.rows() {
        return input("g0 and V dimensions disagree");
    }
    let lhs = norm2(&project_ones_complement(g0));
    let rhs = a0(v, params)?.a0;
    Ok(RecoveryCheck {
        holds: lhs <= rhs,
        lhs,
        rhs,
    })
}

fn check_reciprocal(g0: &[f64], h0: &[f64]) -> Result<()> {
    if g0.len() != h0.len() {
        return input("g0 and h0 lengths differ");
    }
    if let Some(i) = g0
        .iter()
        .zip(h0)
        .position(|(g, h)| (g * h - 1.0).abs() > 1e-8)
    {
        return input(format!("g0 ∘ h0 ≠ 1 at index {i}"));
    }
    Ok(())
}

/// `[Δ̄ᵀ − diag(g0) Δ̄ᵀ H0] X0` for a perturbation (direction) `delta`.
fn inner_error(
    delta: &DenseMatrix,
    g0: &[f64],
    h0_op: &DenseMatrix,
    x0: &DenseMatrix,
) -> DenseMatrix {
    let dt = delta.transpose();
    dt.sub(&dt.matmul(h0_op).scale_rows(g0)).matmul(x0)
}

/// `E = (V − Δ)[Δᵀ − diag(g0)ΔᵀH0] X0` with `Δ = V − V_p`, `H0 = V diag(h0) Vᵀ`.
pub fn error_matrix_e(
    v: &DenseMatrix,
    v_p: &DenseMatrix,
    g0: &[f64],
    h0: &[f64],
    x0: &DenseMatrix,
) -> Result<DenseMatrix> {
    check_reciprocal(g0, h0)?;
    let n = g0.len();
    if v.shape() != (n, n) || v_p.shape() != (n, n) || x0.rows() != n {
        return input("dimension mismatch in error_matrix_e");
    }
    for (name, m) in [("V", v), ("V_p", v_p)] {
        let d = m.orthonormality_defect();
        if d > 1e-8 {
            return input(format!("{name} not orthonormal: ‖MᵀM − I‖_F = {d:e}"));
        }
    }
    let delta = v.sub(v_p);
    let h0_op = node_operator(v, h0);
    Ok(v_p.matmul(&inner_error(&delta, g0, &h0_op, x0)))
}

/// `E ∘ (1 − Ω)`: keeps `E` off the support of the source.
pub fn restrict_complement(e: &DenseMatrix, support: &DenseMatrix) -> Result<DenseMatrix> {
    if e.shape() != support.shape() {
        return input(format!(
            "E is {:?} but the support mask is {:?}",
            e.shape(),
            support.shape()
        ));
    }
    Ok(e.zip_map(support, |v, m| if m != 0.0 { 0.0 } else { v }))
}

/// `Q(σ) = C1 √θ (√(a0² − (1 − σ)²‖P₁⊥g0‖²) − σ‖P₁⊥g0‖)`.
pub fn q_at_sigma(alpha: f64, a0: f64, theta: f64, c1: f64, sigma: f64) -> f64 {
    let inner = (a0 * a0 - (1.0 - sigma).powi(2) * alpha * alpha).max(0.0);
    c1 * theta.sqrt() * (inner.sqrt() - sigma * alpha)
}

/// `Q` at `params.sigma_q`; errors when `‖P₁⊥g0‖₂ > a0`.
pub fn q_factor(g0: &[f64], a0: f64, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    let alpha = norm2(&project_ones_complement(g0));
    if alpha > a0 {
        return input(format!(
            "recovery condition fails: ‖P₁⊥g0‖ = {alpha} exceeds a0 = {a0}"
        ));
    }
    let q = |s: f64| q_at_sigma(alpha, a0, params.theta, params.c1, s);
    Ok(match params.sigma_q {
        SigmaChoice::Value(s) => q(s),
        SigmaChoice::WorstCase => (0..WORST_CASE_GRID)
            .map(|k| q(k as f64 / (WORST_CASE_GRID - 1) as f64))
            .fold(f64::INFINITY, f64::min),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StabilityBound {
    /// `None` when the denominator is not positive.
    pub bound: Option<f64>,
    pub numerator: f64,
    pub denominator: f64,
    /// `‖(E^{S^c})ᵀV ⊙ V‖_{1→2}`.
    pub khatri_rao_term: f64,
}

/// `2σ_max(diag(g0) − g0g0ᵀ/N)‖E_c‖_{1,1} / (PQ − a0‖E_c‖_{1,1} − ‖E_cᵀV ⊙ V‖_{1→2})`.
pub fn stability_bound(
    g0: &[f64],
    e_comp: &DenseMatrix,
    v: &DenseMatrix,
    a0: f64,
    q: f64,
    p: usize,
) -> Result<StabilityBound> {
    let n = g0.len();
    if v.shape() != (n, n) || e_comp.rows() != n {
        return input("dimension mismatch in stability_bound");
    }
    let nf = n as f64;
    let centered = DenseMatrix::from_fn(n, n, |i, j| {
        (if i == j { g0[i] } else { 0.0 }) - g0[i] * g0[j] / nf
    });
    let e11 = norm_1_1(e_comp);
    let numerator = 2.0 * spectral_norm(&centered, SPECTRAL_TOL) * e11;
    let kr = norm_1to2(&khatri_rao_columns(&e_comp.t_matmul(v), v)?);
    let denominator = p as f64 * q - a0 * e11 - kr;
    let bound = if denominator > 0.0 {
        Some(numerator / denominator)
    } else if numerator == 0.0 && e11 == 0.0 {
        Some(0.0)
    } else {
        None
    };
    Ok(StabilityBound {
        bound,
        numerator,
        denominator,
        khatri_rao_term: kr,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ToleranceBound {
    pub m1: f64,
    pub m2: f64,
    /// `PQ/(M1 M2)`; `+∞` when `M1 M2 = 0`.
    pub max_delta_norm: f64,
}

/// Tolerable `‖Δ‖_F ≤ PQ/(M1 M2)` along the unit direction `delta_dir`.
///
/// `M2 = ‖[Δ̄ᵀ − diag(g0)Δ̄ᵀH0]X0‖_F`; `M1 = a0‖Ē_c‖_{1,1} + ‖Ē_cᵀV ⊙ V‖_{1→2}`
/// with `Ē_c` the unit-Frobenius off-support part of `basis_p·[Δ̄ᵀ − …]X0`.
/// `basis_p` is the perturbed basis when known; passing `V` gives the
/// first-order (small-Δ) value.
#[allow(clippy::too_many_arguments)]
pub fn tolerable_delta_bound(
    g0: &[f64],
    h0: &[f64],
    x0: &DenseMatrix,
    support: &DenseMatrix,
    v: &DenseMatrix,
    basis_p: &DenseMatrix,
    delta_dir: &DenseMatrix,
    a0: f64,
    q: f64,
    p: usize,
) -> Result<ToleranceBound> {
    check_reciprocal(g0, h0)?;
    let nd = delta_dir.frobenius_norm();
    if (nd - 1.0).abs() > 1e-10 {
        return input(format!("direction must have unit Frobenius norm, got {nd}"));
    }
    let h0_op = node_operator(v, h0);
    let inner = inner_error(delta_dir, g0, &h0_op, x0);
    let m2 = inner.frobenius_norm();
    let e_comp = restrict_complement(&basis_p.matmul(&inner), support)?;
    let ec_norm = e_comp.frobenius_norm();
    let m1 = if ec_norm == 0.0 {
        0.0
    } else {
        let unit = e_comp.scale(1.0 / ec_norm);
        a0 * norm_1_1(&unit) + norm_1to2(&khatri_rao_columns(&unit.t_matmul(v), v)?)
    };
    let prod = m1 * m2;
    let max_delta_norm = if prod == 0.0 {
        f64::INFINITY
    } else {
        p as f64 * q / prod
    };
    Ok(ToleranceBound {
        m1,
        m2,
        max_delta_norm,
    })
}

/// `‖V_p diag(g) V_pᵀ Y − P(w)[X0 + E]‖_F` with `w = g ∘ h0` and
/// `P(w) = V diag(w) Vᵀ`. Zero (to rounding) at `g = g0`; reported, not
/// asserted, elsewhere.
pub fn change_of_variables_residual(
    v: &DenseMatrix,
    v_p: &DenseMatrix,
    g: &[f64],
    g0: &[f64],
    h0: &[f64],
    x0: &DenseMatrix,
) -> Result<f64> {
    let e = error_matrix_e(v, v_p, g0, h0, x0)?;
    let y = apply_spectral(v, h0, x0);
    let lhs = apply_spectral(v_p, g, &y);
    let w: Vec<f64> = g.iter().zip(h0).map(|(a, b)| a * b).collect();
    let rhs = apply_spectral(v, &w, &x0.add(&e));
    Ok(lhs.sub(&rhs).frobenius_norm())
}

/// Everything the `bounds` CLI prints for one scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub a0: RecoveryThreshold,
    pub recovery: RecoveryCheck,
    pub q_at_sigma: Option<f64>,
    pub q_worst_case: f64,
    pub m1: f64,
    pub m2: f64,
    pub delta_norm: f64,
    /// Stability bound on `‖ĝ_p − g0‖₂`, or `None` when infeasible.
    pub stability_bound: Option<f64>,
    pub stability_denominator: f64,
    pub tolerable_delta_norm: f64,
    pub sample_size_requirement: Option<f64>,
}

/// Evaluates every bound quantity for a concrete scenario.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_bounds(
    v: &DenseMatrix,
    v_p: &DenseMatrix,
    g0: &[f64],
    h0: &[f64],
    x0: &DenseMatrix,
    support: &DenseMatrix,
    params: &BoundParams,
    c_prime: Option<f64>,
) -> Result<BoundReport> {
    let thr = a0(v, params)?;
    let recovery = exact_recovery_check(g0, v, params)?;
    if !recovery.holds {
        return Err(Error::Input(format!(
            "recovery condition fails: ‖P₁⊥g0‖ = {} exceeds a0 = {}",
            recovery.lhs, recovery.rhs
        )));
    }
    let q_worst = q_factor(
        g0,
        thr.a0,
        &BoundParams {
            sigma_q: SigmaChoice::WorstCase,
            ..params.clone()
        },
    )?;
    let q_sel = q_factor(g0, thr.a0, params)?;
    let q_at = match params.sigma_q {
        SigmaChoice::Value(_) => Some(q_sel),
        SigmaChoice::WorstCase => None,
    };
    let p = x0.cols();
    let e = error_matrix_e(v, v_p, g0, h0, x0)?;
    let e_comp = restrict_complement(&e, support)?;
    let stab = stability_bound(g0, &e_comp, v, thr.a0, q_sel, p)?;
    let delta = v.sub(v_p);
    let delta_norm = delta.frobenius_norm();
    let (m1, m2, tol) = if delta_norm > 0.0 {
        let t = tolerable_delta_bound(
            g0,
            h0,
            x0,
            support,
            v,
            v_p,
            &delta.scale(1.0 / delta_norm),
            thr.a0,
            q_sel,
            p,
        )?;
        (t.m1, t.m2, t.max_delta_norm)
    } else {
        (0.0, 0.0, f64::INFINITY)
    };
    Ok(BoundReport {
        a0: thr,
        recovery,
        q_at_sigma: q_at,
        q_worst_case: q_worst,
        m1,
        m2,
        delta_norm,
        stability_bound: stab.bound,
        stability_denominator: stab.denominator,
        tolerable_delta_norm: tol,
        sample_size_requirement: c_prime.map(|c| params.sample_size_requirement(c)),
    })
}
