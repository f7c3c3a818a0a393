//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`SeededRng`] (ChaCha8) built
//! from an explicit `u64` seed. Experiment cells derive their seeds from the
//! master seed and their grid coordinates with [`cell_seed`], so a cell's
//! stream never depends on which worker runs it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{orthonormalize_columns, DenseMatrix};

#[derive(Clone, Debug)]
pub struct SeededRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Standard normal via the Box–Muller transform; the second variate of
    /// each pair is cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| self.normal())
    }

    /// Random orthogonal matrix: Gram–Schmidt on a standard normal matrix.
    pub fn orthonormal(&mut self, n: usize) -> DenseMatrix {
        loop {
            let g = self.normal_matrix(n, n);
            if let Ok(q) = orthonormalize_columns(&g) {
                return q;
            }
        }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a cell's index tuple into an independent seed.
pub fn cell_seed(master: u64, indices: &[u64]) -> u64 {
    indices.iter().fold(splitmix64(master), |acc, &i| {
        splitmix64(acc ^ splitmix64(i.wrapping_add(0x5851_f42d)))
    })
}

/// Sub-stream seed for one role (graph, filter, signal, ...) inside a cell.
pub fn stream_seed(cell: u64, role: u64) -> u64 {
    splitmix64(cell ^ role.wrapping_mul(0xd6e8_feb8_6659_fd93))
}
