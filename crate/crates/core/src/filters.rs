//! Polynomial graph filters, sparse Bernoulli–Gaussian sources and the
//! observation model `Y = H X`.

use crate::error::{input, Error, Result};
use crate::graph::{vandermonde, EigenBasis};
use crate::linalg::{norm2, project_ones_complement, DenseMatrix};
use crate::rng::SeededRng;

/// Default floor on `|h̃_i|` for a filter to count as invertible.
pub const DEFAULT_MIN_ABS: f64 = 1e-3;

const MAX_REDRAWS: usize = 100;

/// A graph filter `V diag(h̃) Vᵀ`, optionally remembering the polynomial taps
/// it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphFilter {
    basis: EigenBasis,
    freq_response: Vec<f64>,
    taps: Option<Vec<f64>>,
}

impl GraphFilter {
    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    pub fn freq_response(&self) -> &[f64] {
        &self.freq_response
    }

    pub fn taps(&self) -> Option<&[f64]> {
        self.taps.as_deref()
    }

    /// Node-domain operator.
    pub fn operator(&self) -> DenseMatrix {
        node_operator(&self.basis.vectors, &self.freq_response)
    }

    /// Applies the filter to each column of `x` without forming the operator.
    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        apply_spectral(&self.basis.vectors, &self.freq_response, x)
    }
}

/// `V diag(d) Vᵀ`.
pub fn node_operator(v: &DenseMatrix, d: &[f64]) -> DenseMatrix {
    v.scale_cols(d).matmul_t(v)
}

/// `V diag(d) Vᵀ X`.
pub fn apply_spectral(v: &DenseMatrix, d: &[f64], x: &DenseMatrix) -> DenseMatrix {
    v.matmul(&v.t_matmul(x).scale_rows(d))
}

/// Filter `Σ_l h_l S^l` expressed through `h̃ = Ψ_L h`.
pub fn filter_from_taps(basis: &EigenBasis, taps: &[f64]) -> Result<GraphFilter> {
    let n = basis.n();
    if taps.is_empty() || taps.len() > n {
        return input(format!("need 1 ≤ L ≤ {n} taps, got {}", taps.len()));
    }
    let freq_response = vandermonde(&basis.eigenvalues, taps.len())?.matvec(taps);
    Ok(GraphFilter {
        basis: basis.clone(),
        freq_response,
        taps: Some(taps.to_vec()),
    })
}

pub fn filter_from_freq(basis: &EigenBasis, freq_response: &[f64]) -> Result<GraphFilter> {
    if freq_response.len() != basis.n() {
        return input(format!(
            "frequency response has length {}, expected {}",
            freq_response.len(),
            basis.n()
        ));
    }
    if freq_response.iter().any(|v| !v.is_finite()) {
        return input("non-finite frequency response");
    }
    Ok(GraphFilter {
        basis: basis.clone(),
        freq_response: freq_response.to_vec(),
        taps: None,
    })
}

/// Entrywise reciprocal of the frequency response.
pub fn inverse_filter(f: &GraphFilter, min_abs: f64) -> Result<GraphFilter> {
    check_invertible(&f.freq_response, min_abs)?;
    Ok(GraphFilter {
        basis: f.basis.clone(),
        freq_response: f.freq_response.iter().map(|h| 1.0 / h).collect(),
        taps: None,
    })
}

fn check_invertible(h: &[f64], min_abs: f64) -> Result<()> {
    match h.iter().position(|v| v.abs() < min_abs) {
        Some(index) => Err(Error::NotInvertible {
            index,
            value: h[index].abs(),
            min_abs,
        }),
        None => Ok(()),
    }
}

/// Inverse-filter response `g̃₀ = 1 + α·P₁⊥b/‖P₁⊥b‖` with `b` standard
/// normal, and its reciprocal `h̃₀`.
///
/// `b` is redrawn (up to 100 times) while `min |g̃₀| < 1e-3`.
pub fn controlled_inverse_response(
    n: usize,
    alpha: f64,
    rng_seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 {
        return input("need at least two frequencies");
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return input(format!(
            "alpha must be finite and non-negative, got {alpha}"
        ));
    }
    let mut rng = SeededRng::new(rng_seed);
    for _ in 0..MAX_REDRAWS {
        let b = project_ones_complement(&rng.normal_vec(n));
        let nb = norm2(&b);
        if nb == 0.0 {
            continue;
        }
        let g: Vec<f64> = b.iter().map(|v| 1.0 + alpha * v / nb).collect();
        if check_invertible(&g, DEFAULT_MIN_ABS).is_ok() {
            let h = g.iter().map(|v| 1.0 / v).collect();
            return Ok((g, h));
        }
    }
    Err(Error::Numerical(format!(
        "no invertible inverse response for alpha = {alpha} after {MAX_REDRAWS} draws"
    )))
}

/// Taps `e₁ + h′` with `h′` standard normal rescaled to unit norm; redrawn
/// (up to 100 times) until the response clears `min_abs`.
pub fn random_unit_perturbed_taps(
    basis: &EigenBasis,
    taps_len: usize,
    min_abs: f64,
    rng_seed: u64,
) -> Result<GraphFilter> {
    let mut rng = SeededRng::new(rng_seed);
    for _ in 0..MAX_REDRAWS {
        let mut h = rng.normal_vec(taps_len);
        let nh = norm2(&h);
        if nh == 0.0 {
            continue;
        }
        h.iter_mut().for_each(|v| *v /= nh);
        h[0] += 1.0;
        let f = filter_from_taps(basis, &h)?;
        if check_invertible(&f.freq_response, min_abs).is_ok() {
            return Ok(f);
        }
    }
    Err(Error::Numerical(format!(
        "no invertible tap filter after {MAX_REDRAWS} draws"
    )))
}

/// Sparse source matrix together with its Bernoulli support.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSignal {
    pub x: DenseMatrix,
    pub support: DenseMatrix,
    pub theta: f64,
}

impl SparseSignal {
    pub fn nnz(&self) -> usize {
        self.support
            .as_slice()
            .iter()
            .filter(|&&m| m != 0.0)
            .count()
    }
}

/// `X_ip = Ω_ip γ_ip / √θ`, `Ω ~ Bernoulli(θ)`, `γ ~ N(0, 1)`, all i.i.d.
///
/// Entries are visited row-major; each draws its Bernoulli, then its normal.
pub fn sample_bernoulli_gaussian(
    n: usize,
    p: usize,
    theta: f64,
    rng_seed: u64,
) -> Result<SparseSignal> {
    if !(theta > 0.0 && theta < 1.0) {
        return input(format!("theta must lie in (0, 1), got {theta}"));
    }
    let mut rng = SeededRng::new(rng_seed);
    let scale = 1.0 / theta.sqrt();
    let mut x = DenseMatrix::zeros(n, p);
    let mut support = DenseMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            let on = rng.bernoulli(theta);
            let gamma = rng.normal();
            if on {
                // γ = 0 has probability zero, but keep supp(X) = supp(Ω) exact.
                let gamma = if gamma == 0.0 {
                    f64::MIN_POSITIVE
                } else {
                    gamma
                };
                support[(i, j)] = 1.0;
                x[(i, j)] = gamma * scale;
            }
        }
    }
    Ok(SparseSignal { x, support, theta })
}

pub fn synthesize_observations(f: &GraphFilter, x: &SparseSignal) -> Result<DenseMatrix> {
    if x.x.rows() != f.basis.n() {
        return input(format!(
            "signal has {} rows, filter acts on {} nodes",
            x.x.rows(),
            f.basis.n()
        ));
    }
    Ok(f.apply(&x.x))
}
