//! Figures of merit.

use crate::error::{input, Error, Result};
use crate::filters::node_operator;
use crate::linalg::{norm2, DenseMatrix};

/// Default support threshold.
pub const DEFAULT_TAU: f64 = 0.1;
/// Floor applied to `|ĝ|` before inverting it for `Ĥ`.
pub const INVERSE_CLIP: f64 = 1e-8;

/// `‖ĝ − g0‖₂ / ‖g0‖₂`.
pub fn re_g(g_hat: &[f64], g0: &[f64]) -> Result<f64> {
    if g_hat.len() != g0.len() {
        return input(format!("lengths differ: {} vs {}", g_hat.len(), g0.len()));
    }
    let den = norm2(g0);
    if den == 0.0 {
        return Err(Error::UndefinedMetric("RE_g with zero reference".into()));
    }
    let diff: Vec<f64> = g_hat.iter().zip(g0).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff) / den)
}

/// Fraction of the true `τ`-support that the estimate also marks.
pub fn acc_x(x_hat: &DenseMatrix, x0: &DenseMatrix, tau: f64) -> Result<f64> {
    if x_hat.shape() != x0.shape() {
        return input(format!(
            "shapes differ: {:?} vs {:?}",
            x_hat.shape(),
            x0.shape()
        ));
    }
    let (mut truth, mut hit) = (0usize, 0usize);
    for (a, b) in x_hat.as_slice().iter().zip(x0.as_slice()) {
        if b.abs() > tau {
            truth += 1;
            if a.abs() > tau {
                hit += 1;
            }
        }
    }
    if truth == 0 {
        return Err(Error::UndefinedMetric(format!(
            "no true entry exceeds tau = {tau}"
        )));
    }
    Ok(hit as f64 / truth as f64)
}

/// `‖est − truth‖_F / ‖truth‖_F`.
pub fn re_operator(estimated: &DenseMatrix, truth: &DenseMatrix) -> Result<f64> {
    if estimated.shape() != truth.shape() {
        return input(format!(
            "shapes differ: {:?} vs {:?}",
            estimated.shape(),
            truth.shape()
        ));
    }
    let den = truth.frobenius_norm();
    if den == 0.0 {
        return Err(Error::UndefinedMetric(
            "relative error with zero reference".into(),
        ));
    }
    Ok(estimated.sub(truth).frobenius_norm() / den)
}

/// `Ĥ = V̂ diag(1/ĝ) V̂ᵀ` with `|ĝ|` floored at [`INVERSE_CLIP`].
pub fn estimated_forward_operator(v_hat: &DenseMatrix, g_hat: &[f64]) -> DenseMatrix {
    let inv: Vec<f64> = g_hat
        .iter()
        .map(|&g| {
            let m = g.abs().max(INVERSE_CLIP);
            1.0 / if g < 0.0 { -m } else { m }
        })
        .collect();
    node_operator(v_hat, &inv)
}

/// Node-domain errors `(RE_G, RE_H, RE_X)` of an estimate `(V̂, ĝ, X̂)`.
pub fn node_domain_errors(
    v_hat: &DenseMatrix,
    g_hat: &[f64],
    x_hat: &DenseMatrix,
    g_true: &DenseMatrix,
    h_true: &DenseMatrix,
    x_true: &DenseMatrix,
) -> Result<(f64, f64, f64)> {
    Ok((
        re_operator(&node_operator(v_hat, g_hat), g_true)?,
        re_operator(&estimated_forward_operator(v_hat, g_hat), h_true)?,
        re_operator(x_hat, x_true)?,
    ))
}

/// Spearman rank correlation (average ranks for ties); `None` when a side is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let mean = (a.len() as f64 + 1.0) / 2.0;
    let (mut num, mut da, mut db) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        num += (x - mean) * (y - mean);
        da += (x - mean).powi(2);
        db += (y - mean).powi(2);
    }
    if da == 0.0 || db == 0.0 {
        None
    } else {
        Some(num / (da * db).sqrt())
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut out = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && v[idx[end]] == v[idx[start]] {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            out[k] = r;
        }
        start = end;
    }
    out
}

pub fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) / 2.0
    })
}
