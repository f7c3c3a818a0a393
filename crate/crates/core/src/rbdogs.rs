//! Robust blind deconvolution with eigenbasis denoising.
//!
//! Alternates an exact minimization over the inverse-filter response `g̃`
//! (the smoothed convex program of [`crate::bdog`]) with one Riemannian
//! gradient step on the orthogonal group for the basis `V`, retracted by the
//! Cayley transform. The objective is
//!
//! ```text
//! F(g̃, V) = Σ_ij h_ε([V diag(g̃) Vᵀ Y]_ij) + (ρ/2)·‖V − V_p‖²_F,   1ᵀg̃ = N.
//! ```

use serde::{Deserialize, Serialize};

use crate::bdog::{default_epsilon, huber, huber_deriv, solve_bdog, BdogConfig, SmoothedProblem};
use crate::error::{input, Error, Result};
use crate::linalg::{norm2, norm_1_1, orthonormalize_columns, solve_linear, DenseMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RbdogsConfig {
    /// Proximity weight; `None` uses `‖Y‖_{1,1}/N²`.
    pub rho: Option<f64>,
    /// Huber knee; `None` uses the scale-aware default of the inner solver.
    pub epsilon: Option<f64>,
    pub delta_stop: f64,
    pub max_outer: usize,
    pub inner: BdogConfig,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    pub ortho_refresh_tol: f64,
}

impl Default for RbdogsConfig {
    fn default() -> Self {
        Self {
            rho: None,
            epsilon: None,
            delta_stop: 1e-6,
            max_outer: 200,
            inner: BdogConfig::default(),
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            ortho_refresh_tol: 1e-9,
        }
    }
}

impl RbdogsConfig {
    pub fn validate(&self) -> Result<()> {
        self.inner.validate()?;
        for (name, v) in [("rho", self.rho), ("epsilon", self.epsilon)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return input(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if !(self.delta_stop > 0.0) || !(self.ortho_refresh_tol > 0.0) || self.max_outer == 0 {
            return input("delta_stop, ortho_refresh_tol and max_outer must be positive");
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
}

pub fn default_rho(y: &DenseMatrix) -> f64 {
    let n = y.rows().max(1) as f64;
    let rho = norm_1_1(y) / (n * n);
    if rho > 0.0 {
        rho
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbdogsReport {
    pub g_hat: Vec<f64>,
    pub v_hat: DenseMatrix,
    pub x_hat: DenseMatrix,
    pub f_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
    /// Largest `‖V[t]ᵀV[t] − I‖_F` over all iterates.
    pub max_ortho_defect: f64,
    pub wall_time: f64,
}

fn check_shapes(g: &[f64], v: &DenseMatrix, v_p: &DenseMatrix, y: &DenseMatrix) -> Result<()> {
    let n = g.len();
    if v.shape() != (n, n) || v_p.shape() != (n, n) || y.rows() != n {
        return input(format!(
            "dimension mismatch: g {n}, V {:?}, V_p {:?}, Y {:?}",
            v.shape(),
            v_p.shape(),
            y.shape()
        ));
    }
    Ok(())
}

fn proximity(v: &DenseMatrix, v_p: &DenseMatrix) -> f64 {
    let d = v.sub(v_p).frobenius_norm();
    d * d
}

/// `F = f(g̃, V) + (ρ/2)‖V − V_p‖²_F`.
pub fn full_objective(
    g: &[f64],
    v: &DenseMatrix,
    v_p: &DenseMatrix,
    y: &DenseMatrix,
    epsilon: f64,
    rho: f64,
) -> Result<f64> {
    check_shapes(g, v, v_p, y)?;
    let f = SmoothedProblem::new(v, y, epsilon).value(g);
    Ok(f + 0.5 * rho * proximity(v, v_p))
}

/// `∇_V F = (D Yᵀ + Y Dᵀ) V diag(g̃) + ρ (V − V_p)` with `D = h_ε'(Z)`.
pub fn euclidean_grad_v(
    g: &[f64],
    v: &DenseMatrix,
    v_p: &DenseMatrix,
    y: &DenseMatrix,
    epsilon: f64,
    rho: f64,
) -> Result<DenseMatrix> {
    check_shapes(g, v, v_p, y)?;
    Ok(grad_v_unchecked(g, v, v_p, y, epsilon, rho).1)
}

fn grad_v_unchecked(
    g: &[f64],
    v: &DenseMatrix,
    v_p: &DenseMatrix,
    y: &DenseMatrix,
    epsilon: f64,
    rho: f64,
) -> (f64, DenseMatrix) {
    let z = SmoothedProblem::new(v, y, epsilon).residual(g);
    let f: f64 = z.as_slice().iter().map(|&x| huber(x, epsilon)).sum();
    let d = z.map(|x| huber_deriv(x, epsilon));
    let vg = v.scale_cols(g);
    // (D Yᵀ + Y Dᵀ) V diag(g) = D (Yᵀ V diag(g)) + Y (Dᵀ V diag(g)).
    let grad = d
        .matmul(&y.t_matmul(&vg))
        .add(&y.matmul(&d.t_matmul(&vg)))
        .add(&v.sub(v_p).scale(rho));
    (f + 0.5 * rho * proximity(v, v_p), grad)
}

/// `GVᵀ − VGᵀ`, the skew generator of the Riemannian descent direction.
pub fn skew_generator(v: &DenseMatrix, grad: &DenseMatrix) -> DenseMatrix {
    let gv = grad.matmul_t(v);
    gv.sub(&gv.transpose())
}

/// Cayley retraction `V₊ = (I + (β/2)M)⁻¹(I − (β/2)M) V`, `M = GVᵀ − VGᵀ`.
pub fn cayley_step(v: &DenseMatrix, grad: &DenseMatrix, beta: f64) -> Result<DenseMatrix> {
    let defect = v.orthonormality_defect();
    if defect > 1e-8 {
        return input(format!("V not orthonormal: ‖VᵀV − I‖_F = {defect:e}"));
    }
    if !(beta > 0.0) {
        return input(format!("step size must be positive, got {beta}"));
    }
    if grad.shape() != v.shape() {
        return input("gradient and basis shapes differ");
    }
    cayley_apply(v, &skew_generator(v, grad), beta)
}

fn cayley_apply(v: &DenseMatrix, m: &DenseMatrix, beta: f64) -> Result<DenseMatrix> {
    let n = v.rows();
    let half = m.scale(0.5 * beta);
    let id = DenseMatrix::identity(n);
    let rhs = id.sub(&half).matmul(v);
    solve_linear(&id.add(&half), &rhs)
        .map_err(|e| Error::Numerical(format!("Cayley system singular at beta = {beta:e}: {e}")))
}

const MIN_BETA: f64 = 1e-12;

/// Runs the alternating scheme from `V[0] = V_p`, `g̃[0] = 1`.
pub fn rbdogs(y: &DenseMatrix, v_p: &DenseMatrix, cfg: &RbdogsConfig) -> Result<RbdogsReport> {
    cfg.validate()?;
    let n = v_p.rows();
    let defect = v_p.orthonormality_defect();
    if !v_p.is_square() || defect > 1e-6 {
        return input(format!(
            "V_p must be square orthonormal (‖VᵀV − I‖_F = {defect:e})"
        ));
    }
    if y.rows() != n {
        return input(format!("Y has {} rows, V_p has {n}", y.rows()));
    }
    let start = std::time::Instant::now();
    let epsilon = cfg.epsilon.unwrap_or_else(|| default_epsilon(y));
    let rho = cfg.rho.unwrap_or_else(|| default_rho(y));
    let inner = BdogConfig {
        epsilon: Some(epsilon),
        ..cfg.inner.clone()
    };

    let mut v = v_p.clone();
    let mut g = vec![1.0; n];
    let mut f_trace = vec![full_objective(&g, &v, v_p, y, epsilon, rho)?];
    let mut max_defect = defect;
    let mut converged = false;
    let mut outer = 0;

    while outer < cfg.max_outer {
        outer += 1;
        let g_prev = g.clone();
        let v_prev = v.clone();

        let sub = solve_bdog(y, &v, &inner, Some(&g)).map_err(|e| {
            Error::Numerical(format!(
                "blind-deconvolution block failed at outer iteration {outer}: {e}"
            ))
        })?;
        g = sub.g_hat;

        let (f_cur, grad) = grad_v_unchecked(&g, &v, v_p, y, epsilon, rho);
        let m = skew_generator(&v, &grad);
        let m_sq = {
            let nm = m.frobenius_norm();
            nm * nm
        };
        let mut beta = 1.0 / (1.0 + grad.frobenius_norm());
        let mut f_next = f_cur;
        while beta >= MIN_BETA && m_sq > 0.0 {
            let cand = cayley_apply(&v, &m, beta)?;
            let f_cand = full_objective(&g, &cand, v_p, y, epsilon, rho)?;
            if f_cand <= f_cur - cfg.armijo_c * beta * m_sq / 2.0 {
                v = cand;
                f_next = f_cand;
                break;
            }
            beta *= cfg.armijo_shrink;
        }

        let d = v.orthonormality_defect();
        if d > cfg.ortho_refresh_tol {
            v = orthonormalize_columns(&v)?;
            f_next = full_objective(&g, &v, v_p, y, epsilon, rho)?;
        }
        max_defect = max_defect.max(v.orthonormality_defect());
        f_trace.push(f_next);

        let dg = norm2(
            &g.iter()
                .zip(&g_prev)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        );
        let dv = v.sub(&v_prev).frobenius_norm();
        if dg <= cfg.delta_stop && dv <= cfg.delta_stop {
            converged = true;
            break;
        }
    }

    let x_hat = v.matmul(&v.t_matmul(y).scale_rows(&g));
    Ok(RbdogsReport {
        g_hat: g,
        v_hat: v,
        x_hat,
        f_trace,
        outer_iterations: outer,
        converged,
        max_ortho_defect: max_defect,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
