//! Finite spectral measures, double operator integrals, Schur multipliers
//! with respect to spectral measures, and the isometry verification
//! harness.
//!
//! A finite spectral measure is a family of mutually orthogonal projections
//! summing to the identity, tagged by distinct real points. The double
//! operator integral of a symbol against two such measures is the finite
//! sum Σ_jk Φ(x_j, y_k) P_j T Q_k. Its transformer norm on the trace class
//! depends only on the value matrix Φ(x_j, y_k), never on the projection
//! ranks, and equals the Haagerup factorization bound of that matrix; this
//! module computes both sides and reports whether they meet.

use num_complex::Complex64;

use crate::eig::{hermitian_eig, thin_svd};
use crate::error::{Error, Result};
use crate::exec::{indexed_map, Execution};
use crate::matrix::{hilbert_schmidt_norm, vector_norm, ComplexMatrix};
use crate::oracle::OracleEstimate;
use crate::random::SeededRng;
use crate::schur::{multiplier_norm_with, MultiplierNormOptions, MultiplierNormResult};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Distinct real points paired with mutually orthogonal projections that
/// sum to the identity.
#[derive(Debug, Clone)]
pub struct FiniteSpectralMeasure {
    points: Vec<f64>,
    projections: Vec<ComplexMatrix>,
}

/// Entrywise tolerance for the projection invariants.
const PROJECTION_TOL: f64 = 1e-10;

impl FiniteSpectralMeasure {
    pub fn new(points: Vec<f64>, projections: Vec<ComplexMatrix>) -> Result<Self> {
        if points.is_empty() || points.len() != projections.len() {
            return Err(Error::InvalidSpectralMeasure(format!(
                "{} points for {} projections",
                points.len(),
                projections.len()
            )));
        }
        for (i, a) in points.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::InvalidSpectralMeasure(format!(
                    "point {i} is not finite"
                )));
            }
            for b in points.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::InvalidSpectralMeasure(format!(
                        "points must be distinct, found {a} twice"
                    )));
                }
            }
        }
        let dim = projections[0].rows();
        let scale = 1.0 + 1.0;
        for (j, p) in projections.iter().enumerate() {
            if p.rows() != dim || p.cols() != dim {
                return Err(Error::InvalidSpectralMeasure(format!(
                    "projection {j} is {}x{}, expected {dim}x{dim}",
                    p.rows(),
                    p.cols()
                )));
            }
            if p.hermitian_deviation() > PROJECTION_TOL * scale {
                return Err(Error::InvalidSpectralMeasure(format!(
                    "projection {j} is not Hermitian"
                )));
            }
            let idem = p.matmul(p).sub(p)?.max_abs();
            if idem > PROJECTION_TOL {
                return Err(Error::InvalidSpectralMeasure(format!(
                    "projection {j} is not idempotent: defect {idem:.3e}"
                )));
            }
        }
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (j, p) in projections.iter().enumerate() {
            sum = sum.add(p)?;
            for (k, q) in projections.iter().enumerate() {
                if j != k {
                    let cross = p.matmul(q).max_abs();
                    if cross > PROJECTION_TOL {
                        return Err(Error::InvalidSpectralMeasure(format!(
                            "projections {j} and {k} are not orthogonal: {cross:.3e}"
                        )));
                    }
                }
            }
        }
        let identity_defect = sum.sub(&ComplexMatrix::identity(dim))?.max_abs();
        if identity_defect > PROJECTION_TOL {
            return Err(Error::InvalidSpectralMeasure(format!(
                "projections sum to identity only within {identity_defect:.3e}"
            )));
        }
        Ok(Self {
            points,
            projections,
        })
    }

    /// Rank-one coordinate projections at the given points.
    pub fn coordinate(points: Vec<f64>) -> Result<Self> {
        let n = points.len();
        let projections = (0..n)
            .map(|j| {
                let mut p = ComplexMatrix::zeros(n, n);
                p[(j, j)] = Complex64::new(1.0, 0.0);
                p
            })
            .collect();
        Self::new(points, projections)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dimension of the underlying space.
    pub fn dimension(&self) -> usize {
        self.projections[0].rows()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn projections(&self) -> &[ComplexMatrix] {
        &self.projections
    }

    /// Σ f(x_j) P_j.
    pub fn apply_function(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let dim = self.dimension();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (x, p) in self.points.iter().zip(&self.projections) {
            let fx = f(*x);
            for i in 0..dim {
                for j in 0..dim {
                    out[(i, j)] += fx * p[(i, j)];
                }
            }
        }
        out
    }
}

/// Spectral measure of a Hermitian matrix with eigenvalues grouped when
/// their gap is at most `group_tol * (1 + |λ|)`.
pub fn spectral_measure_of_hermitian(
    a: &ComplexMatrix,
    group_tol: f64,
) -> Result<FiniteSpectralMeasure> {
    if !(group_tol > 0.0) || !group_tol.is_finite() {
        return Err(Error::parameter("group_tol", "must be positive and finite"));
    }
    let eig = hermitian_eig(a)?;
    let n = eig.eigenvalues.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let lambda = eig.eigenvalues[i];
        let start_new = match groups.last() {
            Some(group) => {
                let prev = eig.eigenvalues[*group.last().expect("nonempty group")];
                lambda - prev > group_tol * (1.0 + lambda.abs())
            }
            None => true,
        };
        if start_new {
            groups.push(vec![i]);
        } else {
            groups.last_mut().expect("nonempty").push(i);
        }
    }
    let mut points = Vec::with_capacity(groups.len());
    let mut projections = Vec::with_capacity(groups.len());
    for group in groups {
        let mean = group.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / group.len() as f64;
        let mut p = ComplexMatrix::zeros(n, n);
        for &idx in &group {
            for i in 0..n {
                let vi = eig.eigenvectors[(i, idx)];
                for j in 0..n {
                    p[(i, j)] += vi * eig.eigenvectors[(j, idx)].conj();
                }
            }
        }
        points.push(mean);
        projections.push(p.hermitize());
    }
    FiniteSpectralMeasure::new(points, projections)
}

/// Symbol values Φ(x_j, y_k) on the product of two spectra.
#[derive(Debug, Clone)]
pub struct SymbolOnSpectra {
    pub values: ComplexMatrix,
}

impl SymbolOnSpectra {
    pub fn from_values(values: ComplexMatrix) -> Self {
        Self { values }
    }

    /// Evaluates a scalar function once per point pair.
    pub fn from_fn(
        e1: &FiniteSpectralMeasure,
        e2: &FiniteSpectralMeasure,
        f: impl Fn(f64, f64) -> Complex64,
    ) -> Self {
        let values = ComplexMatrix::from_fn(e1.len(), e2.len(), |j, k| {
            f(e1.points()[j], e2.points()[k])
        });
        Self { values }
    }

    pub fn constant_one(e1: &FiniteSpectralMeasure, e2: &FiniteSpectralMeasure) -> Self {
        Self {
            values: ComplexMatrix::ones(e1.len(), e2.len()),
        }
    }
}

fn check_compatibility(
    symbol: &SymbolOnSpectra,
    e1: &FiniteSpectralMeasure,
    e2: &FiniteSpectralMeasure,
) -> Result<()> {
    if symbol.values.rows() != e1.len() || symbol.values.cols() != e2.len() {
        return Err(Error::DimensionMismatch {
            left_rows: symbol.values.rows(),
            left_cols: symbol.values.cols(),
            right_rows: e1.len(),
            right_cols: e2.len(),
        });
    }
    Ok(())
}

/// Double operator integral Σ_jk Φ(x_j, y_k) P_j T Q_k.
pub fn doi(
    symbol: &SymbolOnSpectra,
    e1: &FiniteSpectralMeasure,
    e2: &FiniteSpectralMeasure,
    t: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_compatibility(symbol, e1, e2)?;
    if t.rows() != e1.dimension() || t.cols() != e2.dimension() {
        return Err(Error::DimensionMismatch {
            left_rows: e1.dimension(),
            left_cols: e2.dimension(),
            right_rows: t.rows(),
            right_cols: t.cols(),
        });
    }
    let t_right: Vec<ComplexMatrix> = e2.projections().iter().map(|q| t.matmul(q)).collect();
    let mut out = ComplexMatrix::zeros(t.rows(), t.cols());
    for (j, p) in e1.projections().iter().enumerate() {
        let mut mixed = ComplexMatrix::zeros(t.rows(), t.cols());
        for (k, tq) in t_right.iter().enumerate() {
            let phi = symbol.values[(j, k)];
            if phi == ZERO {
                continue;
            }
            for i in 0..t.rows() {
                for l in 0..t.cols() {
                    mixed[(i, l)] += phi * tq[(i, l)];
                }
            }
        }
        out = out.add(&p.matmul(&mixed))?;
    }
    Ok(out)
}

/// Hilbert-Schmidt bound ‖doi(Φ, T)‖_S2 ≤ max|Φ| ‖T‖_S2.
#[derive(Debug, Clone)]
pub struct HsBoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn doi_hs_bound_check(
    symbol: &SymbolOnSpectra,
    e1: &FiniteSpectralMeasure,
    e2: &FiniteSpectralMeasure,
    t: &ComplexMatrix,
) -> Result<HsBoundReport> {
    let image = doi(symbol, e1, e2, t)?;
    let lhs = hilbert_schmidt_norm(&image);
    let rhs = symbol.values.max_abs() * hilbert_schmidt_norm(t);
    Ok(HsBoundReport {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-10) + 1e-300,
    })
}

/// Multiplier norm bracket of the symbol with respect to the two spectral
/// measures: the matrix bracket of the value matrix.
pub fn spectral_multiplier_norm(
    symbol: &SymbolOnSpectra,
    e1: &FiniteSpectralMeasure,
    e2: &FiniteSpectralMeasure,
    rel_tol: f64,
) -> Result<MultiplierNormResult> {
    spectral_multiplier_norm_with(symbol, e1, e2, &MultiplierNormOptions::with_rel_tol(rel_tol))
}

pub fn spectral_multiplier_norm_with(
    symbol: &SymbolOnSpectra,
    e1: &FiniteSpectralMeasure,
    e2: &FiniteSpectralMeasure,
    opts: &MultiplierNormOptions,
) -> Result<MultiplierNormResult> {
    check_compatibility(symbol, e1, e2)?;
    multiplier_norm_with(&symbol.values, opts)
}

/// sup over unit u, v of ‖Σ_jk Φ_jk (P_j u)(Q_k v)*‖_S1 by multi-start
/// projected gradient ascent; always a lower bound on the transformer norm.
pub fn spectral_transformer_oracle(
    symbol: &SymbolOnSpectra,
    e1: &FiniteSpectralMeasure,
    e2: &FiniteSpectralMeasure,
    restarts: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    spectral_transformer_oracle_with(symbol, e1, e2, restarts, seed, Execution::default())
}

pub fn spectral_transformer_oracle_with(
    symbol: &SymbolOnSpectra,
    e1: &FiniteSpectralMeasure,
    e2: &FiniteSpectralMeasure,
    restarts: usize,
    seed: u64,
    execution: Execution,
) -> Result<OracleEstimate> {
    check_compatibility(symbol, e1, e2)?;
    let restarts = restarts.max(1);
    let n1 = e1.dimension();
    let n2 = e2.dimension();

    let one = Complex64::new(1.0, 0.0);
    let mut starts: Vec<(Vec<Complex64>, Vec<Complex64>)> = Vec::with_capacity(restarts);
    'coords: for i in 0..n1 {
        for j in 0..n2 {
            if starts.len() >= restarts.min(32) {
                break 'coords;
            }
            let mut u = vec![ZERO; n1];
            let mut v = vec![ZERO; n2];
            u[i] = one;
            v[j] = one;
            starts.push((u, v));
        }
    }
    let mut index = 0u64;
    while starts.len() < restarts {
        let mut rng = SeededRng::substream(seed, index);
        index += 1;
        starts.push((rng.unit_vector(n1), rng.unit_vector(n2)));
    }

    let outcomes = indexed_map(execution, starts.len(), |i| {
        let (u, v) = starts[i].clone();
        spectral_ascent(symbol, e1, e2, u, v)
    });
    let mut best = 0usize;
    for (i, out) in outcomes.iter().enumerate() {
        if out.0 > outcomes[best].0 {
            best = i;
        }
    }
    let (value, argmax_u, argmax_v) = outcomes.into_iter().nth(best).expect("nonempty starts");
    Ok(OracleEstimate {
        value,
        argmax_u,
        argmax_v,
        restarts,
        seed,
    })
}

/// Σ_jk Φ_jk (P_j u)(Q_k v)* expressed through the component families.
fn spectral_image(
    symbol: &SymbolOnSpectra,
    pu: &[Vec<Complex64>],
    qv: &[Vec<Complex64>],
    n1: usize,
    n2: usize,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n1, n2);
    for (j, pj) in pu.iter().enumerate() {
        // w_j = Σ_k Φ_jk qv_k
        let mut w = vec![ZERO; n2];
        for (k, qk) in qv.iter().enumerate() {
            let phi = symbol.values[(j, k)];
            if phi == ZERO {
                continue;
            }
            for (wi, qi) in w.iter_mut().zip(qk) {
                *wi += phi * qi;
            }
        }
        for a in 0..n1 {
            if pj[a] == ZERO {
                continue;
            }
            for b in 0..n2 {
                out[(a, b)] += pj[a] * w[b].conj();
            }
        }
    }
    out
}

fn spectral_ascent(
    symbol: &SymbolOnSpectra,
    e1: &FiniteSpectralMeasure,
    e2: &FiniteSpectralMeasure,
    mut u: Vec<Complex64>,
    mut v: Vec<Complex64>,
) -> (f64, Vec<Complex64>, Vec<Complex64>) {
    let n1 = e1.dimension();
    let n2 = e2.dimension();
    let components = |u: &[Complex64], v: &[Complex64]| {
        let pu: Vec<Vec<Complex64>> = e1.projections().iter().map(|p| p.matvec(u)).collect();
        let qv: Vec<Vec<Complex64>> = e2.projections().iter().map(|q| q.matvec(v)).collect();
        (pu, qv)
    };
    let objective = |u: &[Complex64], v: &[Complex64]| {
        let (pu, qv) = components(u, v);
        let image = spectral_image(symbol, &pu, &qv, n1, n2);
        let svd = thin_svd(&image);
        (svd.trace_norm(), svd)
    };

    let (mut value, mut svd) = objective(&u, &v);
    let mut stall = 0usize;
    for _ in 0..600 {
        let previous = value;
        let mut improved_this_round = false;
        for mu_rel in [0.0, 1e-3, 3e-2, 0.3] {
            let (_, qv) = components(&u, &v);
            let sigma_max = svd.sigma.first().copied().unwrap_or(0.0);
            let polar = if mu_rel == 0.0 {
                svd.polar_factor(n1, n2)
            } else {
                svd.smoothed_polar_factor(n1, n2, mu_rel * sigma_max)
            };

            // du = Σ_j P_j (polar · w_j), w_j = Σ_k conj(Φ_jk) qv_k
            let mut du = vec![ZERO; n1];
            for (j, p) in e1.projections().iter().enumerate() {
                let mut w = vec![ZERO; n2];
                for (k, qk) in qv.iter().enumerate() {
                    let phi = symbol.values[(j, k)].conj();
                    if phi == ZERO {
                        continue;
                    }
                    for (wi, qi) in w.iter_mut().zip(qk) {
                        *wi += phi * qi;
                    }
                }
                let pw = polar.matvec(&w);
                let contrib = p.matvec(&pw);
                for (d, c) in du.iter_mut().zip(contrib) {
                    *d += c;
                }
            }
            if let Some((new_u, new_value, new_svd)) =
                spectral_line_search(&u, &du, 0.5, |cand| objective(cand, &v), value)
            {
                u = new_u;
                value = new_value;
                svd = new_svd;
                improved_this_round = true;
            }

            let (pu, _) = components(&u, &v);
            let sigma_max = svd.sigma.first().copied().unwrap_or(0.0);
            let polar = if mu_rel == 0.0 {
                svd.polar_factor(n1, n2)
            } else {
                svd.smoothed_polar_factor(n1, n2, mu_rel * sigma_max)
            };
            // dv = Σ_k Q_k (polar* · s_k), s_k = Σ_j Φ_jk pu_j
            let polar_adj = polar.adjoint();
            let mut dv = vec![ZERO; n2];
            for (k, q) in e2.projections().iter().enumerate() {
                let mut s = vec![ZERO; n1];
                for (j, pj) in pu.iter().enumerate() {
                    let phi = symbol.values[(j, k)];
                    if phi == ZERO {
                        continue;
                    }
                    for (si, pi) in s.iter_mut().zip(pj) {
                        *si += phi * pi;
                    }
                }
                let ps = polar_adj.matvec(&s);
                let contrib = q.matvec(&ps);
                for (d, c) in dv.iter_mut().zip(contrib) {
                    *d += c;
                }
            }
            if let Some((new_v, new_value, new_svd)) =
                spectral_line_search(&v, &dv, 0.5, |cand| objective(&u, cand), value)
            {
                v = new_v;
                value = new_value;
                svd = new_svd;
                improved_this_round = true;
            }
            if improved_this_round {
                break;
            }
        }
        if !improved_this_round {
            break;
        }
        let improvement = value - previous;
        if improvement <= 1e-10 * value.max(f64::MIN_POSITIVE) {
            stall += 1;
            if stall >= 5 {
                break;
            }
        } else {
            stall = 0;
        }
    }
    (value, u, v)
}

fn spectral_line_search<F>(
    at: &[Complex64],
    direction: &[Complex64],
    initial_step: f64,
    objective: F,
    current: f64,
) -> Option<(Vec<Complex64>, f64, crate::eig::ThinSvd)>
where
    F: Fn(&[Complex64]) -> (f64, crate::eig::ThinSvd),
{
    let dir_norm = vector_norm(direction);
    if dir_norm <= 1e-300 {
        return None;
    }
    let mut alpha = initial_step / dir_norm.max(1e-12);
    for _ in 0..25 {
        let mut candidate: Vec<Complex64> = at
            .iter()
            .zip(direction)
            .map(|(x, d)| x + d * alpha)
            .collect();
        let norm = vector_norm(&candidate);
        if norm > 0.0 {
            for z in candidate.iter_mut() {
                *z /= norm;
            }
        }
        let (val, svd) = objective(&candidate);
        if val > current {
            return Some((candidate, val, svd));
        }
        alpha *= 0.5;
    }
    None
}

/// Verdict of the isometry check: the transformer lower bound must sit
/// inside the certified Haagerup bracket at the requested tolerance.
#[derive(Debug, Clone)]
pub struct IsometryReport {
    pub bracket: MultiplierNormResult,
    pub oracle: OracleEstimate,
    pub witness_bound: f64,
    pub witness_residual: f64,
    /// oracle ≤ upper·(1 + 1e-6)
    pub oracle_within_upper: bool,
    /// upper − max(oracle, lower) ≤ rel_tol·upper
    pub width_within: bool,
    pub passed: bool,
}

/// Runs both routes to the norm and compares: the certified factorization
/// bracket of the value matrix and the ascent over rank-one trace-class
/// operators in the full space.
pub fn verify_isometry(
    symbol: &SymbolOnSpectra,
    e1: &FiniteSpectralMeasure,
    e2: &FiniteSpectralMeasure,
    rel_tol: f64,
    restarts: usize,
    seed: u64,
) -> Result<IsometryReport> {
    let bracket = spectral_multiplier_norm(symbol, e1, e2, rel_tol)?;
    let oracle = spectral_transformer_oracle(symbol, e1, e2, restarts, seed)?;
    let witness_bound = bracket.witness.bound();
    let witness_residual = bracket
        .witness
        .reconstruct()
        .sub(&symbol.values)?
        .max_abs();
    let oracle_within_upper = oracle.value <= bracket.upper * (1.0 + 1e-6) + 1e-300;
    let floor = oracle.value.max(bracket.lower);
    let width_within = bracket.upper - floor <= rel_tol * bracket.upper + 1e-300;
    let witness_ok = witness_residual <= 1e-8 * (1.0 + witness_bound)
        && witness_bound <= bracket.upper * (1.0 + 1e-8);
    Ok(IsometryReport {
        bracket,
        oracle,
        witness_bound,
        witness_residual,
        oracle_within_upper,
        width_within,
        passed: oracle_within_upper && width_within && witness_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::operator_norm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn blocky_measure(seed: u64, ranks: &[usize], points: &[f64]) -> FiniteSpectralMeasure {
        let n: usize = ranks.iter().sum();
        let mut rng = SeededRng::new(seed);
        let basis = rng.unitary(n);
        let mut projections = Vec::new();
        let mut offset = 0;
        for &r in ranks {
            let mut p = ComplexMatrix::zeros(n, n);
            for col in offset..offset + r {
                for i in 0..n {
                    let vi = basis[(i, col)];
                    for j in 0..n {
                        p[(i, j)] += vi * basis[(j, col)].conj();
                    }
                }
            }
            projections.push(p.hermitize());
            offset += r;
        }
        FiniteSpectralMeasure::new(points.to_vec(), projections).unwrap()
    }

    #[test]
    fn grouping_examples() {
        let a = ComplexMatrix::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0])
            .unwrap();
        let e = spectral_measure_of_hermitian(&a, 1e-8).unwrap();
        assert_eq!(e.points(), &[1.0, 2.0]);
        let ranks: Vec<usize> = e
            .projections()
            .iter()
            .map(|p| {
                (0..3)
                    .map(|i| p[(i, i)].re)
                    .sum::<f64>()
                    .round() as usize
            })
            .collect();
        assert_eq!(ranks, vec![2, 1]);

        let id = ComplexMatrix::identity(4);
        let e = spectral_measure_of_hermitian(&id, 1e-8).unwrap();
        assert_eq!(e.len(), 1);
        assert!(e.projections()[0]
            .sub(&ComplexMatrix::identity(4))
            .unwrap()
            .max_abs()
            < 1e-12);

        let mut rng = SeededRng::new(2);
        let h = rng.hermitian(5);
        let e = spectral_measure_of_hermitian(&h, 1e-8).unwrap();
        let mut sum = ComplexMatrix::zeros(5, 5);
        for p in e.projections() {
            sum = sum.add(p).unwrap();
        }
        assert!(sum.sub(&ComplexMatrix::identity(5)).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn measure_validation_rejects_junk() {
        let p = ComplexMatrix::from_real(2, 2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        // not idempotent
        assert!(FiniteSpectralMeasure::new(vec![0.0], vec![p]).is_err());
        // duplicate points
        let e = FiniteSpectralMeasure::coordinate(vec![0.0, 0.0]);
        assert!(e.is_err());
    }

    #[test]
    fn doi_constant_symbol_returns_t() {
        let mut rng = SeededRng::new(3);
        let e1 = blocky_measure(4, &[2, 2], &[0.0, 1.0]);
        let e2 = blocky_measure(5, &[1, 3], &[-1.0, 2.0]);
        let t = rng.complex_matrix(4, 4);
        let one = SymbolOnSpectra::constant_one(&e1, &e2);
        let image = doi(&one, &e1, &e2, &t).unwrap();
        assert!(image.sub(&t).unwrap().max_abs() <= 1e-12 * (1.0 + t.max_abs()));
    }

    #[test]
    fn doi_sum_symbol_gives_anticommutator() {
        let mut rng = SeededRng::new(7);
        let a = rng.hermitian(4);
        let e = spectral_measure_of_hermitian(&a, 1e-8).unwrap();
        let t = rng.complex_matrix(4, 4);
        let sum_symbol = SymbolOnSpectra::from_fn(&e, &e, |x, y| c(x + y, 0.0));
        let image = doi(&sum_symbol, &e, &e, &t).unwrap();
        let expected = a.matmul(&t).add(&t.matmul(&a)).unwrap();
        let scale = 1.0 + expected.max_abs();
        assert!(image.sub(&expected).unwrap().max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn doi_separable_symbol_factors() {
        let mut rng = SeededRng::new(11);
        let a = rng.hermitian(4);
        let b = rng.hermitian(4);
        let e1 = spectral_measure_of_hermitian(&a, 1e-8).unwrap();
        let e2 = spectral_measure_of_hermitian(&b, 1e-8).unwrap();
        let t = rng.complex_matrix(4, 4);
        let phi = |x: f64| Complex64::new(x * x, 0.5 * x);
        let psi = |y: f64| Complex64::new(1.0 / (1.0 + y * y), -y);
        let symbol = SymbolOnSpectra::from_fn(&e1, &e2, |x, y| phi(x) * psi(y));
        let image = doi(&symbol, &e1, &e2, &t).unwrap();
        let expected = e1
            .apply_function(phi)
            .matmul(&t)
            .matmul(&e2.apply_function(psi));
        let scale = 1.0 + expected.max_abs();
        assert!(image.sub(&expected).unwrap().max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn doi_indicator_symbol_picks_one_block() {
        let e1 = blocky_measure(13, &[2, 2], &[0.0, 1.0]);
        let e2 = blocky_measure(17, &[3, 1], &[0.5, 1.5]);
        let mut rng = SeededRng::new(19);
        let t = rng.complex_matrix(4, 4);
        let mut values = ComplexMatrix::zeros(2, 2);
        values[(1, 0)] = c(1.0, 0.0);
        let symbol = SymbolOnSpectra::from_values(values);
        let image = doi(&symbol, &e1, &e2, &t).unwrap();
        let expected = e1.projections()[1]
            .matmul(&t)
            .matmul(&e2.projections()[0]);
        assert!(image.sub(&expected).unwrap().max_abs() <= 1e-13 * (1.0 + t.max_abs()));
    }

    #[test]
    fn doi_is_bilinear_in_symbol_and_t() {
        let mut rng = SeededRng::new(23);
        let e1 = blocky_measure(29, &[1, 2], &[0.0, 2.0]);
        let e2 = blocky_measure(31, &[2, 1], &[1.0, 3.0]);
        let t1 = rng.complex_matrix(3, 3);
        let t2 = rng.complex_matrix(3, 3);
        let s1 = SymbolOnSpectra::from_values(rng.unit_disc_matrix(2, 2));
        let s2 = SymbolOnSpectra::from_values(rng.unit_disc_matrix(2, 2));

        let lhs = doi(&s1, &e1, &e2, &t1.add(&t2).unwrap()).unwrap();
        let rhs = doi(&s1, &e1, &e2, &t1)
            .unwrap()
            .add(&doi(&s1, &e1, &e2, &t2).unwrap())
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12);

        let combined = SymbolOnSpectra::from_values(
            s1.values.add(&s2.values).unwrap(),
        );
        let lhs = doi(&combined, &e1, &e2, &t1).unwrap();
        let rhs = doi(&s1, &e1, &e2, &t1)
            .unwrap()
            .add(&doi(&s2, &e1, &e2, &t1).unwrap())
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn hs_bound_examples() {
        let mut rng = SeededRng::new(37);
        let e1 = blocky_measure(41, &[2, 2, 2], &[0.0, 1.0, 2.0]);
        let e2 = blocky_measure(43, &[3, 3], &[0.0, 1.0]);
        let one = SymbolOnSpectra::constant_one(&e1, &e2);
        let t = rng.complex_matrix(6, 6);
        let rep = doi_hs_bound_check(&one, &e1, &e2, &t).unwrap();
        assert!(rep.holds);
        assert!((rep.lhs - hilbert_schmidt_norm(&t)).abs() <= 1e-10 * rep.rhs);

        let zero_t = ComplexMatrix::zeros(6, 6);
        let rep = doi_hs_bound_check(&one, &e1, &e2, &zero_t).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.lhs, 0.0);

        for trial in 0..5 {
            let symbol = SymbolOnSpectra::from_values(rng.unit_disc_matrix(3, 2));
            let t = rng.complex_matrix(6, 6);
            let rep = doi_hs_bound_check(&symbol, &e1, &e2, &t).unwrap();
            assert!(rep.holds, "trial {trial}: {rep:?}");
        }
    }

    #[test]
    fn spectral_norm_trivial_symbols() {
        let e1 = blocky_measure(47, &[2, 1], &[0.0, 1.0]);
        let e2 = blocky_measure(53, &[1, 2], &[0.0, 1.0]);
        let one = SymbolOnSpectra::constant_one(&e1, &e2);
        let res = spectral_multiplier_norm(&one, &e1, &e2, 1e-6).unwrap();
        assert!(res.lower <= 1.0 && 1.0 <= res.upper);

        let delta = SymbolOnSpectra::from_values(ComplexMatrix::identity(2));
        let res = spectral_multiplier_norm(&delta, &e1, &e2, 1e-6).unwrap();
        assert!(res.lower <= 1.0 && 1.0 <= res.upper);
        assert!(res.width() <= 1e-6 * res.upper);
    }

    #[test]
    fn oracle_reduces_to_matrix_case_for_rank_one_projections() {
        let e1 = FiniteSpectralMeasure::coordinate(vec![0.0, 1.0, 2.0]).unwrap();
        let e2 = FiniteSpectralMeasure::coordinate(vec![0.0, 1.0]).unwrap();
        let mut rng = SeededRng::new(59);
        let values = rng.unit_disc_matrix(3, 2);
        let symbol = SymbolOnSpectra::from_values(values.clone());
        let spectral = spectral_transformer_oracle(&symbol, &e1, &e2, 32, 0).unwrap();
        let matrix = crate::oracle::s1_transformer_norm(&values, 32, 0);
        assert!(
            (spectral.value - matrix.value).abs() <= 1e-6 * matrix.value.max(1.0),
            "{} vs {}",
            spectral.value,
            matrix.value
        );
    }

    #[test]
    fn multiplicity_does_not_change_the_norm() {
        let h = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, -1.0]).unwrap();
        let symbol = SymbolOnSpectra::from_values(h.clone());
        let e1 = blocky_measure(61, &[2, 2], &[0.0, 1.0]);
        let e2 = blocky_measure(67, &[2, 2], &[0.0, 1.0]);
        let est = spectral_transformer_oracle(&symbol, &e1, &e2, 48, 0).unwrap();
        let target = 2.0f64.sqrt();
        assert!((est.value - target).abs() <= 1e-3 * target, "{}", est.value);

        let bracket = spectral_multiplier_norm(&symbol, &e1, &e2, 1e-6).unwrap();
        assert!(est.value <= bracket.upper * (1.0 + 1e-6));
    }

    #[test]
    fn verify_isometry_trivial_cases() {
        let e1 = blocky_measure(71, &[2, 1], &[0.0, 1.0]);
        let e2 = blocky_measure(73, &[1, 2], &[0.5, 2.0]);
        let one = SymbolOnSpectra::constant_one(&e1, &e2);
        let report = verify_isometry(&one, &e1, &e2, 1e-3, 32, 0).unwrap();
        assert!(report.passed, "{report:?}");
        assert!((report.oracle.value - 1.0).abs() <= 1e-6);
        assert!(report.bracket.lower <= 1.0 && 1.0 <= report.bracket.upper);

        let zero = SymbolOnSpectra::from_values(ComplexMatrix::zeros(2, 2));
        let report = verify_isometry(&zero, &e1, &e2, 1e-3, 8, 0).unwrap();
        assert!(report.passed);
        assert_eq!(report.oracle.value, 0.0);
        assert_eq!(report.bracket.upper, 0.0);
    }

    #[test]
    fn verify_isometry_random_symbol() {
        let mut rng = SeededRng::new(79);
        let e1 = blocky_measure(83, &[2, 2, 2], &[0.0, 1.0, 2.0]);
        let e2 = blocky_measure(89, &[1, 2, 3], &[0.0, 1.0, 2.0]);
        let symbol = SymbolOnSpectra::from_values(rng.unit_disc_matrix(3, 3));
        let report = verify_isometry(&symbol, &e1, &e2, 1e-3, 64, 0).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn doi_norm_never_exceeds_certified_upper_times_input_norm() {
        let mut rng = SeededRng::new(97);
        let e1 = blocky_measure(101, &[2, 2], &[0.0, 1.0]);
        let e2 = blocky_measure(103, &[2, 2], &[0.0, 1.0]);
        let symbol = SymbolOnSpectra::from_values(rng.unit_disc_matrix(2, 2));
        let bracket = spectral_multiplier_norm(&symbol, &e1, &e2, 1e-6).unwrap();
        for _ in 0..5 {
            let t = rng.complex_matrix(4, 4);
            let image = doi(&symbol, &e1, &e2, &t).unwrap();
            assert!(
                operator_norm(&image)
                    <= bracket.upper * operator_norm(&t) * (1.0 + 1e-9)
            );
        }
    }
}
