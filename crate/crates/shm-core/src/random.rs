//! Seeded random generators for test matrices and probe directions.
//!
//! Everything runs off ChaCha8 so that fixed seeds reproduce bit-identical
//! streams across platforms and thread counts.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{vector_norm, ComplexMatrix};

/// Deterministic generator handle.
pub struct SeededRng {
    rng: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `index` under the same seed; used to make
    /// restart batches prefix-stable when the restart count grows.
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index.wrapping_add(1));
        Self { rng }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(re, im)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn complex_vector(&mut self, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| self.complex_normal()).collect()
    }

    pub fn unit_vector(&mut self, n: usize) -> Vec<Complex64> {
        loop {
            let v = self.complex_vector(n);
            let norm = vector_norm(&v);
            if norm > 1e-6 {
                return v.into_iter().map(|z| z / norm).collect();
            }
        }
    }

    /// Gaussian complex matrix.
    pub fn complex_matrix(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        let entries = (0..rows * cols).map(|_| self.complex_normal()).collect();
        ComplexMatrix::new(rows, cols, entries).expect("gaussian entries are finite")
    }

    /// Complex matrix with entries uniform in the closed unit disc.
    pub fn unit_disc_matrix(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        let entries = (0..rows * cols)
            .map(|_| {
                let r = self.rng.random::<f64>().sqrt();
                let theta = self.uniform(0.0, std::f64::consts::TAU);
                Complex64::from_polar(r, theta)
            })
            .collect();
        ComplexMatrix::new(rows, cols, entries).expect("disc entries are finite")
    }

    /// Random Hermitian matrix (G + G*)/2 from a Gaussian G.
    pub fn hermitian(&mut self, n: usize) -> ComplexMatrix {
        self.complex_matrix(n, n).hermitize()
    }

    /// Haar-distributed unitary via Gram-Schmidt on a Gaussian matrix with
    /// the diagonal phase fixed.
    pub fn unitary(&mut self, n: usize) -> ComplexMatrix {
        loop {
            if let Some(u) = try_orthonormalize(self.complex_matrix(n, n)) {
                return u;
            }
        }
    }

    /// Unimodular diagonal matrix.
    pub fn unimodular_diagonal(&mut self, n: usize) -> ComplexMatrix {
        let phases: Vec<Complex64> = (0..n)
            .map(|_| Complex64::from_polar(1.0, self.uniform(0.0, std::f64::consts::TAU)))
            .collect();
        ComplexMatrix::diagonal(&phases)
    }

    /// Positive masses drawn uniformly from [lo, hi].
    pub fn masses(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.uniform(lo, hi)).collect()
    }
}

fn try_orthonormalize(g: ComplexMatrix) -> Option<ComplexMatrix> {
    let n = g.rows();
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| (0..n).map(|i| g[(i, j)]).collect())
        .collect();
    for j in 0..n {
        // two rounds of modified Gram-Schmidt for orthogonality to ~1e-15
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 = cols[j]
                    .iter()
                    .zip(&cols[k])
                    .map(|(a, b)| a * b.conj())
                    .sum();
                let prev = cols[k].clone();
                for (x, p) in cols[j].iter_mut().zip(&prev) {
                    *x -= proj * p;
                }
            }
        }
        let norm = vector_norm(&cols[j]);
        if norm < 1e-8 {
            return None;
        }
        // fix the phase so the leading nonzero component is positive real
        let lead = cols[j]
            .iter()
            .find(|z| z.norm() > 1e-12)
            .copied()
            .unwrap_or(Complex64::new(1.0, 0.0));
        let phase = lead.conj() / lead.norm();
        for x in cols[j].iter_mut() {
            *x = *x * phase / norm;
        }
    }
    Some(ComplexMatrix::from_fn(n, n, |i, j| cols[j][i]))
}
