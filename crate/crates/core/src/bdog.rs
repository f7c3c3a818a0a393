//! Convex blind deconvolution on a fixed eigenbasis.
//!
//! Minimizes the Huber-smoothed sparsity criterion
//! `f(g̃) = Σ_ij h_ε([V diag(g̃) Vᵀ Y]_ij)` over the affine set `1ᵀg̃ = N` by
//! projected gradient descent with Barzilai–Borwein trial steps and Armijo
//! backtracking. As `ε → 0` this is the `‖·‖_{1,1}` program.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::linalg::{norm2, norm_1_1, DenseMatrix};

/// Huber function `x²/(2ε)` inside `|x| < ε`, `|x| − ε/2` outside.
#[inline]
pub fn huber(x: f64, epsilon: f64) -> f64 {
    let a = x.abs();
    if a < epsilon {
        x * x / (2.0 * epsilon)
    } else {
        a - 0.5 * epsilon
    }
}

#[inline]
pub fn huber_deriv(x: f64, epsilon: f64) -> f64 {
    if x.abs() < epsilon {
        x / epsilon
    } else {
        x.signum()
    }
}

/// Scale-aware Huber knee: `1e-3 · ‖Y‖_{1,1} / (N·P)`.
pub fn default_epsilon(y: &DenseMatrix) -> f64 {
    let count = (y.rows() * y.cols()).max(1) as f64;
    let eps = 1e-3 * norm_1_1(y) / count;
    if eps > 0.0 {
        eps
    } else {
        1e-3
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BdogConfig {
    /// Huber knee; `None` picks [`default_epsilon`] from the observations.
    pub epsilon: Option<f64>,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
}

impl Default for BdogConfig {
    fn default() -> Self {
        Self {
            epsilon: None,
            max_iters: 5000,
            grad_tol: 1e-8,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
        }
    }
}

impl BdogConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return input(format!("epsilon must be positive, got {e}"));
            }
        }
        if self.max_iters == 0 {
            return input("max_iters must be positive");
        }
        if !(self.grad_tol > 0.0) {
            return input("grad_tol must be positive");
        }
        for (name, v) in [
            ("armijo_c", self.armijo_c),
            ("armijo_shrink", self.armijo_shrink),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return input(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        Ok(())
    }

    pub fn resolve_epsilon(&self, y: &DenseMatrix) -> f64 {
        self.epsilon.unwrap_or_else(|| default_epsilon(y))
    }
}

/// Why the iteration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Projected gradient below `grad_tol·(1 + |f|)`.
    GradientTolerance,
    /// No step along the projected gradient lowers `f` by more than its
    /// rounding error; the iterate is stationary to working precision.
    PrecisionFloor,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub g_hat: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub wall_time: f64,
}

/// Smoothed objective on a fixed basis with `B = VᵀY` cached.
pub(crate) struct SmoothedProblem<'a> {
    v: &'a DenseMatrix,
    b: DenseMatrix,
    epsilon: f64,
}

impl<'a> SmoothedProblem<'a> {
    pub(crate) fn new(v: &'a DenseMatrix, y: &DenseMatrix, epsilon: f64) -> Self {
        Self {
            v,
            b: v.t_matmul(y),
            epsilon,
        }
    }

    /// `Z = V diag(g) B`.
    pub(crate) fn residual(&self, g: &[f64]) -> DenseMatrix {
        self.v.matmul(&self.b.scale_rows(g))
    }

    pub(crate) fn value(&self, g: &[f64]) -> f64 {
        let eps = self.epsilon;
        self.residual(g)
            .as_slice()
            .iter()
            .map(|&z| huber(z, eps))
            .sum()
    }

    pub(crate) fn value_and_grad(&self, g: &[f64]) -> (f64, Vec<f64>) {
        let eps = self.epsilon;
        let z = self.residual(g);
        let value = z.as_slice().iter().map(|&x| huber(x, eps)).sum();
        let d = z.map(|x| huber_deriv(x, eps));
        // ∂f/∂g_k = Σ_j (VᵀD)_kj B_kj.
        let vtd = self.v.t_matmul(&d);
        let grad = (0..g.len())
            .map(|k| {
                vtd.row(k)
                    .iter()
                    .zip(self.b.row(k))
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        (value, grad)
    }
}

fn check_dims(g: &[f64], v: &DenseMatrix, y: &DenseMatrix) -> Result<()> {
    if !v.is_square() || v.rows() != y.rows() || g.len() != v.rows() {
        return input(format!(
            "dimension mismatch: g {}, V {}x{}, Y {}x{}",
            g.len(),
            v.rows(),
            v.cols(),
            y.rows(),
            y.cols()
        ));
    }
    Ok(())
}

pub fn smoothed_objective(
    g: &[f64],
    v: &DenseMatrix,
    y: &DenseMatrix,
    epsilon: f64,
) -> Result<f64> {
    check_dims(g, v, y)?;
    Ok(SmoothedProblem::new(v, y, epsilon).value(g))
}

/// Gradient of [`smoothed_objective`] in `g̃`: `diag(Vᵀ D Yᵀ V)` with
/// `D = h_ε'(Z)`.
pub fn objective_grad_g(
    g: &[f64],
    v: &DenseMatrix,
    y: &DenseMatrix,
    epsilon: f64,
) -> Result<Vec<f64>> {
    check_dims(g, v, y)?;
    Ok(SmoothedProblem::new(v, y, epsilon).value_and_grad(g).1)
}

/// Removes the mean of `grad`, the projection onto `{d : 1ᵀd = 0}`.
fn project_direction(grad: &[f64]) -> Vec<f64> {
    let mean = grad.iter().sum::<f64>() / grad.len() as f64;
    grad.iter().map(|v| v - mean).collect()
}

/// Shifts `g` so that `1ᵀg = N` exactly (up to rounding).
fn restore_feasibility(g: &mut [f64]) {
    let n = g.len() as f64;
    let shift = (n - g.iter().sum::<f64>()) / n;
    g.iter_mut().for_each(|v| *v += shift);
}

const BB_MIN: f64 = 1e-8;
const BB_MAX: f64 = 1e4;
const MAX_BACKTRACKS: usize = 60;
/// Relative decrease below which a step is indistinguishable from rounding.
const PRECISION_FLOOR: f64 = 16.0 * f64::EPSILON;

/// Projected gradient descent on the smoothed objective over `1ᵀg̃ = N`.
///
/// Stops with `converged = true` when the projected gradient satisfies
/// `‖d‖₂ ≤ grad_tol·(1 + |f|)`, or when backtracking cannot find a step whose
/// decrease exceeds the rounding error of `f` (see [`StopReason`]). Hitting
/// `max_iters` returns the last iterate with `converged = false`.
pub fn solve_bdog(
    y: &DenseMatrix,
    v: &DenseMatrix,
    cfg: &BdogConfig,
    g_init: Option<&[f64]>,
) -> Result<SolveReport> {
    cfg.validate()?;
    let n = v.rows();
    let defect = v.orthonormality_defect();
    if !v.is_square() || defect > 1e-6 {
        return input(format!(
            "V must be square orthonormal (‖VᵀV − I‖_F = {defect:e})"
        ));
    }
    if y.rows() != n {
        return input(format!("Y has {} rows, V has {n}", y.rows()));
    }
    let mut g = match g_init {
        Some(g0) => {
            if g0.len() != n {
                return input(format!("g_init has length {}, expected {n}", g0.len()));
            }
            let sum: f64 = g0.iter().sum();
            if (sum - n as f64).abs() > 1e-6 {
                return input(format!("g_init violates 1ᵀg = N (sum {sum})"));
            }
            g0.to_vec()
        }
        None => vec![1.0; n],
    };
    restore_feasibility(&mut g);

    let start = Instant::now();
    let problem = SmoothedProblem::new(v, y, cfg.resolve_epsilon(y));
    let (mut f, grad) = problem.value_and_grad(&g);
    let mut d: Vec<f64> = project_direction(&grad).iter().map(|x| -x).collect();
    let mut trace = vec![f];
    let mut stop_reason = StopReason::MaxIterations;
    let mut iterations = 0;
    let mut step = {
        let nd = norm2(&d);
        if nd > 0.0 {
            (1.0 / nd).clamp(BB_MIN, BB_MAX)
        } else {
            1.0
        }
    };

    while iterations < cfg.max_iters {
        let nd = norm2(&d);
        if nd == 0.0 || nd <= cfg.grad_tol * (1.0 + f.abs()) {
            stop_reason = StopReason::GradientTolerance;
            break;
        }
        iterations += 1;

        let slope = nd * nd;
        let floor = PRECISION_FLOOR * f.abs().max(f64::MIN_POSITIVE);
        let mut alpha = step;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial: Vec<f64> = g.iter().zip(&d).map(|(gi, di)| gi + alpha * di).collect();
            restore_feasibility(&mut trial);
            let ft = problem.value(&trial);
            if ft <= f - cfg.armijo_c * alpha * slope && f - ft > floor {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= cfg.armijo_shrink;
        }
        let Some((g_next, _)) = accepted else {
            stop_reason = StopReason::PrecisionFloor;
            break;
        };

        let (f_next, grad_next) = problem.value_and_grad(&g_next);
        let d_next: Vec<f64> = project_direction(&grad_next).iter().map(|x| -x).collect();

        // Barzilai–Borwein: s = Δg, r = Δ(projected gradient) = −Δd.
        let mut ss = 0.0;
        let mut sr = 0.0;
        for i in 0..n {
            let s = g_next[i] - g[i];
            let r = d[i] - d_next[i];
            ss += s * s;
            sr += s * r;
        }
        step = if sr > 0.0 {
            (ss / sr).clamp(BB_MIN, BB_MAX)
        } else {
            BB_MAX.min(alpha * 2.0).max(BB_MIN)
        };

        g = g_next;
        f = f_next;
        d = d_next;
        trace.push(f);
    }

    Ok(SolveReport {
        g_hat: g,
        objective_trace: trace,
        iterations,
        converged: stop_reason != StopReason::MaxIterations,
        stop_reason,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn huber_examples() {
        let eps = 0.3;
        assert_eq!(huber(0.0, eps), 0.0);
        assert_eq!(huber_deriv(0.0, eps), 0.0);
        let inside = eps * eps / (2.0 * eps);
        assert!((inside - eps / 2.0).abs() < 1e-15);
        assert!((huber(eps, eps) - eps / 2.0).abs() < 1e-15);
        assert_eq!(huber_deriv(eps, eps), 1.0);
        assert_eq!(huber_deriv(-2.0, eps), -1.0);
        assert!((huber_deriv(0.15, eps) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn huber_sandwich() {
        let mut rng = SeededRng::new(3);
        for _ in 0..1000 {
            let x = 3.0 * rng.normal();
            let eps = rng.uniform() + 1e-6;
            let h = huber(x, eps);
            assert!(h <= x.abs() + 1e-15 && x.abs() <= h + eps / 2.0 + 1e-15);
        }
    }

    fn instance(n: usize, p: usize, seed: u64) -> (DenseMatrix, DenseMatrix, Vec<f64>) {
        let mut rng = SeededRng::new(seed);
        let v = rng.orthonormal(n);
        let y = rng.normal_matrix(n, p);
        let g = (0..n).map(|_| 1.0 + 0.5 * rng.normal()).collect();
        (v, y, g)
    }

    #[test]
    fn objective_examples() {
        let (v, y, g) = instance(6, 6, 1);
        assert_eq!(smoothed_objective(&[0.0; 6], &v, &y, 0.1).unwrap(), 0.0);
        let z = v.scale_cols(&g).matmul_t(&v).matmul(&y);
        let f = smoothed_objective(&g, &v, &y, 0.1).unwrap();
        assert!(f <= norm_1_1(&z));
        let tiny = 1e-10;
        let f0 = smoothed_objective(&g, &v, &y, tiny).unwrap();
        assert!((norm_1_1(&z) - f0).abs() <= 36.0 * tiny / 2.0 + 1e-12);
        assert!(smoothed_objective(&g[..3], &v, &y, 0.1).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..10 {
            let (v, y, g) = instance(6, 6, 10 + seed);
            let eps = 0.05;
            let grad = objective_grad_g(&g, &v, &y, eps).unwrap();
            let h = 1e-6;
            for k in 0..6 {
                let mut gp = g.clone();
                let mut gm = g.clone();
                gp[k] += h;
                gm[k] -= h;
                let fd = (smoothed_objective(&gp, &v, &y, eps).unwrap()
                    - smoothed_objective(&gm, &v, &y, eps).unwrap())
                    / (2.0 * h);
                let rel = (fd - grad[k]).abs() / grad[k].abs().max(1e-8);
                assert!(
                    rel < 1e-5,
                    "seed {seed} k {k}: fd {fd} analytic {}",
                    grad[k]
                );
            }
        }
    }

    #[test]
    fn gradient_zero_when_residual_vanishes() {
        let (v, y, _) = instance(5, 4, 2);
        let grad = objective_grad_g(&[0.0; 5], &v, &y, 0.1).unwrap();
        assert!(grad.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn gradient_is_linear_in_scale_inside_quadratic_zone() {
        let (v, y, g) = instance(5, 4, 3);
        let eps = 1e3;
        let g1 = objective_grad_g(&g, &v, &y, eps).unwrap();
        let g2 = objective_grad_g(&g, &v, &y.scale(2.0), eps).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert!((b - 4.0 * a).abs() <= 1e-10 * a.abs().max(1e-12));
        }
    }

    #[test]
    fn solver_keeps_feasibility_and_descends() {
        let (v, y, _) = instance(8, 12, 4);
        let report = solve_bdog(&y, &v, &BdogConfig::default(), None).unwrap();
        assert!((report.g_hat.iter().sum::<f64>() - 8.0).abs() < 1e-9);
        assert!(report
            .objective_trace
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn warm_start_at_solution_stops_quickly() {
        let (v, y, _) = instance(6, 10, 5);
        let cfg = BdogConfig::default();
        let first = solve_bdog(&y, &v, &cfg, None).unwrap();
        assert!(first.converged, "{} iterations", first.iterations);
        let again = solve_bdog(&y, &v, &cfg, Some(&first.g_hat)).unwrap();
        assert!(again.iterations <= 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (v, y, _) = instance(4, 4, 6);
        let cfg = BdogConfig::default();
        assert!(solve_bdog(&y, &v.scale(1.1), &cfg, None).is_err());
        assert!(solve_bdog(&y, &v, &cfg, Some(&[1.0, 1.0, 1.0, 2.0])).is_err());
        let bad = BdogConfig {
            armijo_c: 1.5,
            ..BdogConfig::default()
        };
        assert!(solve_bdog(&y, &v, &bad, None).is_err());
    }

    #[test]
    fn objective_is_convex_along_segments() {
        let (v, y, _) = instance(6, 8, 7);
        let mut rng = SeededRng::new(70);
        for _ in 0..20 {
            let a: Vec<f64> = (0..6).map(|_| 1.0 + rng.normal()).collect();
            let b: Vec<f64> = (0..6).map(|_| 1.0 + rng.normal()).collect();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            let f = |g: &[f64]| smoothed_objective(g, &v, &y, 0.01).unwrap();
            assert!(f(&mid) <= 0.5 * (f(&a) + f(&b)) + 1e-12);
        }
    }
}
