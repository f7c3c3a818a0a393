//! Eigenbasis perturbation models: a Cayley rotation `V_p = C(W, ξ) V` with a
//! closed-form `‖V − V_p‖_F`, and the basis estimated from the sample
//! covariance of the observations.

use crate::error::{input, Error, Result};
use crate::graph::EigenBasis;
use crate::linalg::{eigh_symmetric, solve_linear, DenseMatrix};
use crate::rng::SeededRng;

const BISECTION_UPPER: f64 = 1e6;
const BISECTION_MAX_ITERS: usize = 200;

/// How the given basis `V_p` is derived from the true one.
#[derive(Clone, Debug, PartialEq)]
pub enum PerturbationSpec {
    /// `V_p = (I + ξW)⁻¹(I − ξW) V` for a unit-Frobenius skew `W`.
    Cayley { w: DenseMatrix, xi: f64 },
    /// Eigenvectors of the sample covariance of `Y`.
    Covariance,
}

impl PerturbationSpec {
    pub fn cayley(w: DenseMatrix, xi: f64) -> Result<Self> {
        check_unit_skew(&w)?;
        if !(xi >= 0.0 && xi.is_finite()) {
            return input(format!("xi must be finite and non-negative, got {xi}"));
        }
        Ok(Self::Cayley { w, xi })
    }

    /// The perturbed basis for true basis `v` and observations `y`.
    pub fn apply(&self, v: &DenseMatrix, y: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            Self::Cayley { w, xi } => cayley_perturb(v, w, *xi),
            Self::Covariance => Ok(covariance_eigenbasis(y)?.vectors),
        }
    }
}

fn check_unit_skew(w: &DenseMatrix) -> Result<()> {
    if !w.is_square() {
        return input("W must be square");
    }
    let skew = w.add(&w.transpose()).max_abs();
    if skew > 1e-12 {
        return input(format!("W is not skew-symmetric (max |W + Wᵀ| = {skew:e})"));
    }
    let nf = w.frobenius_norm();
    if (nf - 1.0).abs() > 1e-12 {
        return input(format!("W must have unit Frobenius norm, got {nf}"));
    }
    Ok(())
}

/// Skew-symmetric matrix with standard-normal strict upper triangle,
/// antisymmetrized and scaled to unit Frobenius norm.
pub fn random_unit_skew(n: usize, rng_seed: u64) -> Result<DenseMatrix> {
    if n < 2 {
        return input("need n ≥ 2 for a nonzero skew matrix");
    }
    let mut rng = SeededRng::new(rng_seed);
    let mut b = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            b[(i, j)] = rng.normal();
        }
    }
    let w = b.sub(&b.transpose()).scale(0.5);
    let nf = w.frobenius_norm();
    Ok(w.scale(1.0 / nf))
}

/// `(I + ξW)⁻¹(I − ξW)`.
pub fn cayley_matrix(w: &DenseMatrix, xi: f64) -> Result<DenseMatrix> {
    let n = w.rows();
    let id = DenseMatrix::identity(n);
    let lhs = id.add(&w.scale(xi));
    let rhs = id.sub(&w.scale(xi));
    solve_linear(&lhs, &rhs)
        .map_err(|e| Error::Numerical(format!("Cayley system I + ξW singular: {e}")))
}

pub fn cayley_perturb(v: &DenseMatrix, w: &DenseMatrix, xi: f64) -> Result<DenseMatrix> {
    if !(xi >= 0.0) {
        return input(format!("xi must be non-negative, got {xi}"));
    }
    if v.rows() != w.rows() || !w.is_square() {
        return input("V and W dimensions disagree");
    }
    let defect = v.orthonormality_defect();
    if defect > 1e-8 {
        return input(format!("V not orthonormal: ‖VᵀV − I‖_F = {defect:e}"));
    }
    if xi == 0.0 {
        return Ok(v.clone());
    }
    Ok(cayley_matrix(w, xi)?.matmul(v))
}

/// Squared magnitudes `μ_k²` of the (imaginary) eigenvalues of `W`, from the
/// eigenvalues of `WᵀW`. Values below [`SPECTRUM_FLOOR`] times the largest
/// are flushed to zero so that the numerical rank is well defined.
pub fn skew_spectrum_sq(w: &DenseMatrix) -> Result<Vec<f64>> {
    let (vals, _) = eigh_symmetric(&w.t_matmul(w), 1e-10)?;
    let top = vals.iter().cloned().fold(0.0, f64::max);
    Ok(vals
        .into_iter()
        .map(|v| if v > SPECTRUM_FLOOR * top { v } else { 0.0 })
        .collect())
}

/// Relative threshold below which an eigenvalue of `WᵀW` counts as zero.
pub const SPECTRUM_FLOOR: f64 = 1e-10;

fn delta_norm_from_spectrum(mu_sq: &[f64], xi: f64) -> f64 {
    if xi == 0.0 {
        return 0.0;
    }
    let x2 = xi * xi;
    // 4μ²/(1/ξ² + μ²) written as 4μ²ξ²/(1 + ξ²μ²).
    mu_sq
        .iter()
        .map(|&m| 4.0 * m * x2 / (1.0 + x2 * m))
        .sum::<f64>()
        .sqrt()
}

/// Closed-form `‖V − C(W, ξ)V‖_F`, independent of `V`.
pub fn predicted_delta_norm(w: &DenseMatrix, xi: f64) -> Result<f64> {
    if !(xi >= 0.0) {
        return input(format!("xi must be non-negative, got {xi}"));
    }
    Ok(delta_norm_from_spectrum(&skew_spectrum_sq(w)?, xi))
}

/// Supremum of the predicted norm as ξ → ∞: `2·√(#{μ_k ≠ 0})`.
pub fn delta_norm_supremum(w: &DenseMatrix) -> Result<f64> {
    let rank = skew_spectrum_sq(w)?.iter().filter(|&&m| m > 0.0).count();
    Ok(2.0 * (rank as f64).sqrt())
}

/// Bisection on `ξ ∈ [0, 1e6]` for `predicted_delta_norm(W, ξ) = target`.
pub fn xi_for_target_delta(w: &DenseMatrix, target_delta: f64, tol: f64) -> Result<f64> {
    if !(target_delta >= 0.0) {
        return input(format!("target must be non-negative, got {target_delta}"));
    }
    if target_delta == 0.0 {
        return Ok(0.0);
    }
    let mu_sq = skew_spectrum_sq(w)?;
    let reach = delta_norm_from_spectrum(&mu_sq, BISECTION_UPPER);
    if target_delta >= delta_norm_supremum(w)? || target_delta > reach + tol {
        return input(format!(
            "target ‖Δ‖_F = {target_delta} is not achievable (supremum {reach})"
        ));
    }
    let (mut lo, mut hi) = (0.0, BISECTION_UPPER);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..BISECTION_MAX_ITERS {
        mid = 0.5 * (lo + hi);
        let val = delta_norm_from_spectrum(&mu_sq, mid);
        if (val - target_delta).abs() <= tol {
            return Ok(mid);
        }
        if val < target_delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Eigenbasis of `Ĉ_y = YYᵀ/(P − 1)`, columns ordered by descending
/// covariance eigenvalue (ties keep their ascending-solver order).
pub fn covariance_eigenbasis(y: &DenseMatrix) -> Result<EigenBasis> {
    let p = y.cols();
    if p < 2 {
        return input(format!("need at least 2 samples, got {p}"));
    }
    let cov = y.matmul_t(y).scale(1.0 / (p - 1) as f64);
    let (vals, vecs) = eigh_symmetric(&cov, 1e-10)?;
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &vecs.column(src));
    }
    Ok(EigenBasis {
        eigenvalues: order.iter().map(|&i| vals[i]).collect(),
        vectors,
    })
}
