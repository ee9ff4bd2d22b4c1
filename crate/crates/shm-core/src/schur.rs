//! Matrix Schur multipliers: entrywise products, the multiplier norm as the
//! best Haagerup factorization bound, positive semidefinite block
//! certificates, and test-contraction lower bounds.
//!
//! The norm is bracketed from two sides. The lower side evaluates the
//! transformer on explicit contractions. The upper side produces a pair
//! (R, S) with bounded diagonal making [[R, Φ], [Φ*, S]] positive
//! semidefinite; factoring that block yields vector families x_s, y_t with
//! Φ(s,t) = <x_s, y_t>. A weighted-trace-norm ascent supplies near-optimal
//! certificates directly; alternating projections onto the semidefinite
//! cone with Dykstra corrections remain as the general feasibility engine.

use num_complex::Complex64;

use crate::eig::{hermitian_eig, min_eigenvalue, psd_project, thin_svd, ThinSvd};
use crate::error::{Error, Result};
use crate::exec::{indexed_map, Execution};
use crate::matrix::{operator_norm, vector_norm, ComplexMatrix};
use crate::random::SeededRng;

/// Relative guard applied to reported bracket endpoints so that the true
/// norm stays inside the bracket despite evaluation roundoff.
const FLOAT_GUARD: f64 = 1e-12;
/// PSD defect accepted by a certificate, relative to its level.
const PSD_FEASIBLE_REL: f64 = 1e-9;
/// Internal reconstruction tolerance for direct certificates, kept under
/// the 1e-8 contract of the factorization.
const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Factorization columns below this norm are dropped.
const COLUMN_DROP: f64 = 1e-10;
/// Rows participate in the direct certificate when their ascent weight is
/// at least this fraction of the largest weight; lighter rows are completed
/// by a least-norm solve.
const ACTIVE_FLOOR_REL: f64 = 1e-3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Entrywise (Schur) product of two matrices of identical shape.
pub fn schur_product(phi: &ComplexMatrix, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !phi.same_shape(a) {
        return Err(phi.shape_mismatch(a));
    }
    Ok(ComplexMatrix::from_fn(phi.rows(), phi.cols(), |i, j| {
        phi[(i, j)] * a[(i, j)]
    }))
}

/// Vector families x_s (rows of X) and y_t (rows of Y) realizing
/// Φ(s,t) = <x_s, y_t> = Σ_k X[s,k] conj(Y[t,k]).
#[derive(Debug, Clone)]
pub struct HaagerupFactorization {
    m: usize,
    n: usize,
    /// Columns of X, each of length m.
    left_columns: Vec<Vec<Complex64>>,
    /// Columns of Y, each of length n.
    right_columns: Vec<Vec<Complex64>>,
    bound: f64,
}

impl HaagerupFactorization {
    pub fn empty(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            left_columns: Vec::new(),
            right_columns: Vec::new(),
            bound: 0.0,
        }
    }

    fn from_columns(
        m: usize,
        n: usize,
        left_columns: Vec<Vec<Complex64>>,
        right_columns: Vec<Vec<Complex64>>,
    ) -> Self {
        let mut out = Self {
            m,
            n,
            left_columns,
            right_columns,
            bound: 0.0,
        };
        out.bound = out.max_left_row_norm() * out.max_right_row_norm();
        out
    }

    pub fn rank(&self) -> usize {
        self.left_columns.len()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// X as an m x d matrix, if the rank is positive.
    pub fn left(&self) -> Option<ComplexMatrix> {
        if self.rank() == 0 {
            return None;
        }
        Some(ComplexMatrix::from_fn(self.m, self.rank(), |i, k| {
            self.left_columns[k][i]
        }))
    }

    /// Y as an n x d matrix, if the rank is positive.
    pub fn right(&self) -> Option<ComplexMatrix> {
        if self.rank() == 0 {
            return None;
        }
        Some(ComplexMatrix::from_fn(self.n, self.rank(), |i, k| {
            self.right_columns[k][i]
        }))
    }

    /// Σ_k X[s,k] conj(Y[t,k]).
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.m, self.n);
        for k in 0..self.rank() {
            for s in 0..self.m {
                let x = self.left_columns[k][s];
                for t in 0..self.n {
                    out[(s, t)] += x * self.right_columns[k][t].conj();
                }
            }
        }
        out
    }

    pub fn max_left_row_norm(&self) -> f64 {
        (0..self.m)
            .map(|s| self.row_norm_sq_left(s).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn max_right_row_norm(&self) -> f64 {
        (0..self.n)
            .map(|t| self.row_norm_sq_right(t).sqrt())
            .fold(0.0, f64::max)
    }

    fn row_norm_sq_left(&self, s: usize) -> f64 {
        self.left_columns
            .iter()
            .map(|col| col[s].norm_sqr())
            .sum::<f64>()
    }

    fn row_norm_sq_right(&self, t: usize) -> f64 {
        self.right_columns
            .iter()
            .map(|col| col[t].norm_sqr())
            .sum::<f64>()
    }

    /// Gram matrix X X* of the left family.
    pub fn left_gram(&self) -> ComplexMatrix {
        gram_of_columns(self.m, &self.left_columns)
    }

    /// Gram matrix Y Y* of the right family.
    pub fn right_gram(&self) -> ComplexMatrix {
        gram_of_columns(self.n, &self.right_columns)
    }

    /// Separable column pairs (φ_k over rows, ψ_k over columns) with
    /// Φ = Σ_k φ_k^T ψ_k; feed these to [`projective_certificate`].
    pub fn separable_pairs(&self) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
        let phis = self.left_columns.clone();
        let psis = self
            .right_columns
            .iter()
            .map(|col| col.iter().map(|z| z.conj()).collect())
            .collect();
        (phis, psis)
    }

    /// Factorization of the entrywise product of the two certified symbols:
    /// columns are entrywise products of column pairs.
    pub fn schur_tensor(&self, other: &Self) -> Result<Self> {
        if self.m != other.m || self.n != other.n {
            return Err(Error::DimensionMismatch {
                left_rows: self.m,
                left_cols: self.n,
                right_rows: other.m,
                right_cols: other.n,
            });
        }
        let mut left = Vec::with_capacity(self.rank() * other.rank());
        let mut right = Vec::with_capacity(self.rank() * other.rank());
        for k1 in 0..self.rank() {
            for k2 in 0..other.rank() {
                left.push(
                    (0..self.m)
                        .map(|s| self.left_columns[k1][s] * other.left_columns[k2][s])
                        .collect(),
                );
                right.push(
                    (0..self.n)
                        .map(|t| self.right_columns[k1][t] * other.right_columns[k2][t])
                        .collect(),
                );
            }
        }
        Ok(Self::from_columns(self.m, self.n, left, right))
    }

    /// Σ_k ‖X[:,k]‖_∞ ‖Y[:,k]‖_∞, the projective value of the column pairs;
    /// invariant under per-column rescaling.
    pub fn projective_value_of_columns(&self) -> f64 {
        (0..self.rank())
            .map(|k| {
                let a = self.left_columns[k]
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                let b = self.right_columns[k]
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                a * b
            })
            .sum()
    }

    /// Drops dead columns and rescales the two sides by a global factor so
    /// their largest row norms agree. Reconstruction and bound are
    /// unchanged up to roundoff; the Gram diagonals tighten to the bound.
    fn global_balance(&mut self) {
        let mut keep_left = Vec::new();
        let mut keep_right = Vec::new();
        for k in 0..self.rank() {
            let a = vector_norm(&self.left_columns[k]);
            let b = vector_norm(&self.right_columns[k]);
            if a <= 1e-14 || b <= 1e-14 {
                continue;
            }
            keep_left.push(self.left_columns[k].clone());
            keep_right.push(self.right_columns[k].clone());
        }
        self.left_columns = keep_left;
        self.right_columns = keep_right;
        let max_left = self.max_left_row_norm();
        let max_right = self.max_right_row_norm();
        if max_left > 0.0 && max_right > 0.0 {
            let t = (max_right / max_left).sqrt();
            for col in self.left_columns.iter_mut() {
                for z in col.iter_mut() {
                    *z *= t;
                }
            }
            for col in self.right_columns.iter_mut() {
                for z in col.iter_mut() {
                    *z /= t;
                }
            }
        }
        self.bound = self.max_left_row_norm() * self.max_right_row_norm();
    }

    /// Rescales each column pair so both sides carry equal sup-norms, then
    /// re-equalizes the sides. Guarantees bound ≤ projective value of the
    /// columns, at the price of possibly inflating the bound; only used
    /// when the raw factorization violates that chain.
    fn column_rebalance(&mut self) {
        let mut keep_left = Vec::new();
        let mut keep_right = Vec::new();
        for k in 0..self.rank() {
            let a = self.left_columns[k]
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            let b = self.right_columns[k]
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if a <= 1e-14 || b <= 1e-14 {
                continue;
            }
            let c = (b / a).sqrt();
            keep_left.push(
                self.left_columns[k]
                    .iter()
                    .map(|z| z * c)
                    .collect::<Vec<_>>(),
            );
            keep_right.push(
                self.right_columns[k]
                    .iter()
                    .map(|z| z / c)
                    .collect::<Vec<_>>(),
            );
        }
        self.left_columns = keep_left;
        self.right_columns = keep_right;
        self.global_balance();
    }

    /// Ensures the factorization bound does not exceed the projective value
    /// of its own columns, rebalancing only when necessary.
    fn enforce_projective_chain(&mut self) {
        if self.bound > self.projective_value_of_columns() * (1.0 + 1e-12) {
            self.column_rebalance();
        }
    }
}

fn gram_of_columns(dim: usize, columns: &[Vec<Complex64>]) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim, dim);
    for col in columns {
        for i in 0..dim {
            for j in 0..dim {
                g[(i, j)] += col[i] * col[j].conj();
            }
        }
    }
    g.hermitize()
}

/// Hermitian pair (R, S) with diagonal at most `level` such that
/// [[R, Φ], [Φ*, S]] is positive semidefinite up to `1e-9 * level`.
#[derive(Debug, Clone)]
pub struct PsdBlockCertificate {
    pub r: ComplexMatrix,
    pub s: ComplexMatrix,
    pub level: f64,
}

/// Outcome of verifying a certificate against the symbol it certifies.
#[derive(Debug, Clone)]
pub struct CertificateCheck {
    pub min_eigenvalue: f64,
    pub max_diagonal: f64,
    pub ok: bool,
}

impl PsdBlockCertificate {
    pub fn zero(m: usize, n: usize) -> Self {
        Self {
            r: ComplexMatrix::zeros(m, m),
            s: ComplexMatrix::zeros(n, n),
            level: 0.0,
        }
    }

    /// Assembles [[R, Φ], [Φ*, S]].
    pub fn block_matrix(&self, phi: &ComplexMatrix) -> ComplexMatrix {
        let (m, n) = (phi.rows(), phi.cols());
        let mut block = ComplexMatrix::zeros(m + n, m + n);
        block.set_block(0, 0, &self.r);
        block.set_block(0, m, phi);
        block.set_block(m, 0, &phi.adjoint());
        block.set_block(m, m, &self.s);
        block
    }

    pub fn max_diagonal(&self) -> f64 {
        let rd = (0..self.r.rows()).map(|i| self.r[(i, i)].re);
        let sd = (0..self.s.rows()).map(|i| self.s[(i, i)].re);
        rd.chain(sd).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks the diagonal bound and the PSD defect of the assembled block.
    pub fn verify(&self, phi: &ComplexMatrix) -> CertificateCheck {
        let min_eigenvalue = min_eigenvalue(&self.block_matrix(phi));
        let max_diagonal = self.max_diagonal();
        let slack = PSD_FEASIBLE_REL * self.level.max(f64::MIN_POSITIVE);
        let ok = min_eigenvalue >= -slack && max_diagonal <= self.level * (1.0 + PSD_FEASIBLE_REL);
        CertificateCheck {
            min_eigenvalue,
            max_diagonal,
            ok,
        }
    }
}

/// Certified bracket for the multiplier norm with both witnesses.
#[derive(Debug, Clone)]
pub struct MultiplierNormResult {
    pub lower: f64,
    pub upper: f64,
    pub witness: HaagerupFactorization,
    pub certificate: PsdBlockCertificate,
    /// Contraction B with ‖Φ∘B‖/‖B‖ equal to `lower` up to the reporting
    /// guard.
    pub lower_witness: ComplexMatrix,
    pub iterations: usize,
    pub converged: bool,
}

impl MultiplierNormResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Options for the norm computation. Defaults match the CLI defaults.
#[derive(Debug, Clone)]
pub struct MultiplierNormOptions {
    pub rel_tol: f64,
    pub seed: u64,
    /// Number of ascent starts (uniform, spiked, then random).
    pub restarts: usize,
    /// Iterations per start before the best start is polished.
    pub start_iters: usize,
    /// Total ascent iteration budget including polishing.
    pub max_iters: usize,
    /// Trials for the coarse random-search lower bound.
    pub lower_bound_trials: usize,
    pub execution: Execution,
    pub feasibility: FeasibilityOptions,
}

impl Default for MultiplierNormOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            seed: 0,
            restarts: 12,
            start_iters: 200,
            max_iters: 40_000,
            lower_bound_trials: 50,
            execution: Execution::default(),
            feasibility: FeasibilityOptions::default(),
        }
    }
}

impl MultiplierNormOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Options for a single feasibility decision.
#[derive(Debug, Clone)]
pub struct FeasibilityOptions {
    /// Projection budget for the alternating scheme; one round spends two
    /// projections.
    pub max_projections: usize,
    /// Try the ascent-built certificate and refutation before alternating
    /// projections.
    pub use_fast_paths: bool,
    pub seed: u64,
    pub restarts: usize,
    pub execution: Execution,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        Self {
            max_projections: 10_000,
            use_fast_paths: true,
            seed: 0,
            restarts: 8,
            execution: Execution::default(),
        }
    }
}

/// Decision returned by [`psd_feasibility`].
#[derive(Debug, Clone)]
pub enum FeasibilityOutcome {
    Feasible(PsdBlockCertificate),
    Infeasible(InfeasibilityReport),
    /// Budget exhausted without a decision; callers widen their bracket.
    Indeterminate { best_violation: f64 },
}

/// The alternating scheme converged to a point violating the constraints,
/// or a test contraction certified that the level is below the norm.
#[derive(Debug, Clone)]
pub struct InfeasibilityReport {
    pub violation: f64,
    /// Witnessed lower bound on the norm when the refutation came from a
    /// test contraction.
    pub witnessed_lower: Option<f64>,
}

/// Value of the transformer on an explicit contraction, with the argmax.
#[derive(Debug, Clone)]
pub struct LowerBoundEstimate {
    pub value: f64,
    pub witness: ComplexMatrix,
}

/// Projective upper bound Σ_k ‖φ_k‖_∞ ‖ψ_k‖_∞ and the matrix Σ_k φ_k^T ψ_k
/// it certifies.
#[derive(Debug, Clone)]
pub struct ProjectiveCertificate {
    pub value: f64,
    pub matrix: Option<ComplexMatrix>,
}

/// Σ_k ‖φ_k‖_∞ ‖ψ_k‖_∞ over separable pairs; empty input certifies the
/// zero symbol.
pub fn projective_certificate(
    phis: &[Vec<Complex64>],
    psis: &[Vec<Complex64>],
) -> Result<ProjectiveCertificate> {
    if phis.len() != psis.len() {
        return Err(Error::parameter(
            "psis",
            format!("expected {} pairs, got {}", phis.len(), psis.len()),
        ));
    }
    if phis.is_empty() {
        return Ok(ProjectiveCertificate {
            value: 0.0,
            matrix: None,
        });
    }
    let m = phis[0].len();
    let n = psis[0].len();
    if m == 0 || n == 0 {
        return Err(Error::parameter("phis", "vectors must be nonempty"));
    }
    let mut value = 0.0;
    let mut matrix = ComplexMatrix::zeros(m, n);
    for (phi, psi) in phis.iter().zip(psis) {
        if phi.len() != m || psi.len() != n {
            return Err(Error::parameter(
                "phis",
                "all pairs must share the same dimensions",
            ));
        }
        let a = phi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let b = psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        value += a * b;
        for s in 0..m {
            for t in 0..n {
                matrix[(s, t)] += phi[s] * psi[t];
            }
        }
    }
    Ok(ProjectiveCertificate {
        value,
        matrix: Some(matrix),
    })
}

/// Best transformer value over explicit test contractions: the truncated
/// identity, all coordinate matrices, seeded random unitary corners and
/// rank-one u v*. Deterministic for a fixed seed.
pub fn multiplier_lower_bound(
    phi: &ComplexMatrix,
    trials: usize,
    seed: u64,
) -> Result<LowerBoundEstimate> {
    multiplier_lower_bound_with(phi, trials, seed, Execution::default())
}

pub fn multiplier_lower_bound_with(
    phi: &ComplexMatrix,
    trials: usize,
    seed: u64,
    execution: Execution,
) -> Result<LowerBoundEstimate> {
    if trials == 0 {
        return Err(Error::parameter("trials", "must be at least 1"));
    }
    let (m, n) = (phi.rows(), phi.cols());
    let mut candidates: Vec<ComplexMatrix> = Vec::new();

    let mut truncated_identity = ComplexMatrix::zeros(m, n);
    for i in 0..m.min(n) {
        truncated_identity[(i, i)] = ONE;
    }
    candidates.push(truncated_identity);
    for s in 0..m {
        for t in 0..n {
            let mut e = ComplexMatrix::zeros(m, n);
            e[(s, t)] = ONE;
            candidates.push(e);
        }
    }
    let mut rng = SeededRng::new(seed);
    let k = m.max(n);
    for _ in 0..trials {
        let u = rng.unitary(k);
        candidates.push(u.block(0, 0, m, n));
    }
    for _ in 0..trials {
        let u = rng.unit_vector(m);
        let v = rng.unit_vector(n);
        candidates.push(ComplexMatrix::from_fn(m, n, |s, t| u[s] * v[t].conj()));
    }

    let ratios = indexed_map(execution, candidates.len(), |i| {
        let b = &candidates[i];
        let denom = operator_norm(b);
        if denom < 1e-12 {
            return 0.0;
        }
        operator_norm(&schur_product(phi, b).expect("shapes match")) / denom
    });
    let mut best = 0usize;
    for (i, &r) in ratios.iter().enumerate() {
        if r > ratios[best] {
            best = i;
        }
    }
    Ok(LowerBoundEstimate {
        value: ratios[best],
        witness: candidates.swap_remove(best),
    })
}

// ---------------------------------------------------------------------------
// weighted-trace-norm ascent
//
// For probability weights p over rows and q over columns let
// A(p,q) = diag(sqrt p) Φ diag(sqrt q). The maximum of ‖A(p,q)‖_S1 over the
// two simplices equals the multiplier norm; at a maximizer the singular
// factors assemble an optimal certificate.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct AscentState {
    value: f64,
    p: Vec<f64>,
    q: Vec<f64>,
    svd: ThinSvd,
    iterations: usize,
}

fn weighted_matrix(phi: &ComplexMatrix, p: &[f64], q: &[f64]) -> ComplexMatrix {
    let sp: Vec<f64> = p.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let sq: Vec<f64> = q.iter().map(|&x| x.max(0.0).sqrt()).collect();
    ComplexMatrix::from_fn(phi.rows(), phi.cols(), |s, t| phi[(s, t)] * sp[s] * sq[t])
}

fn normalize_weights(w: &mut [f64]) -> bool {
    let total: f64 = w.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return false;
    }
    for x in w.iter_mut() {
        *x /= total;
    }
    true
}

/// One multiplicative update of the row weights (columns by symmetry via
/// the adjoint call pattern below). Monotone in the ascent objective.
fn updated_row_weights(phi: &ComplexMatrix, q: &[f64], svd: &ThinSvd) -> Option<Vec<f64>> {
    let m = phi.rows();
    let sq: Vec<f64> = q.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let mut weights = vec![0.0; m];
    for s in 0..m {
        // c_s = Σ_k (Φ diag(sqrt q) z_k)[s] conj(w_k[s])
        let mut c = ZERO;
        for k in 0..svd.rank() {
            let mut dot = ZERO;
            for t in 0..phi.cols() {
                dot += phi[(s, t)] * sq[t] * svd.right[k][t];
            }
            c += dot * svd.left[k][s].conj();
        }
        weights[s] = c.norm_sqr();
    }
    if normalize_weights(&mut weights) {
        Some(weights)
    } else {
        None
    }
}

fn ascend(
    phi: &ComplexMatrix,
    mut p: Vec<f64>,
    mut q: Vec<f64>,
    max_iters: usize,
    rel_stall: f64,
) -> AscentState {
    let phi_adj = phi.adjoint();
    let mut svd = thin_svd(&weighted_matrix(phi, &p, &q));
    let mut value = svd.trace_norm();
    let mut best = AscentState {
        value,
        p: p.clone(),
        q: q.clone(),
        svd: svd.clone(),
        iterations: 0,
    };
    let mut stall = 0usize;
    let mut iterations = 0usize;
    while iterations < max_iters {
        iterations += 1;
        let prev = value;
        if let Some(new_p) = updated_row_weights(phi, &q, &svd) {
            p = new_p;
        }
        svd = thin_svd(&weighted_matrix(phi, &p, &q));
        // the adjoint swaps the roles of rows and columns, and conjugation
        // leaves the singular data usable for the q update
        let svd_adj = ThinSvd {
            sigma: svd.sigma.clone(),
            left: svd.right.clone(),
            right: svd.left.clone(),
        };
        if let Some(new_q) = updated_row_weights(&phi_adj, &p, &svd_adj) {
            q = new_q;
        }
        svd = thin_svd(&weighted_matrix(phi, &p, &q));
        value = svd.trace_norm();
        if value > best.value {
            best = AscentState {
                value,
                p: p.clone(),
                q: q.clone(),
                svd: svd.clone(),
                iterations,
            };
        }
        if value - prev <= rel_stall * value.max(f64::MIN_POSITIVE) {
            stall += 1;
            if stall >= 6 {
                break;
            }
        } else {
            stall = 0;
        }
    }
    best.iterations = iterations;
    best
}

fn ascent_starts(m: usize, n: usize, restarts: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let uniform_p = vec![1.0 / m as f64; m];
    let uniform_q = vec![1.0 / n as f64; n];
    let mut starts = vec![(uniform_p.clone(), uniform_q.clone())];
    // spiked starts keep every weight positive so no row is absorbed
    for s in 0..m {
        if starts.len() >= restarts.max(1) {
            break;
        }
        let mut p = vec![0.1 / m as f64; m];
        p[s] += 0.9;
        let mut p = p;
        normalize_weights(&mut p);
        starts.push((p, uniform_q.clone()));
    }
    for t in 0..n {
        if starts.len() >= restarts.max(1) {
            break;
        }
        let mut q = vec![0.1 / n as f64; n];
        q[t] += 0.9;
        let mut q = q;
        normalize_weights(&mut q);
        starts.push((uniform_p.clone(), q));
    }
    let mut index = 0u64;
    while starts.len() < restarts.max(1) {
        let mut rng = SeededRng::substream(seed, index);
        index += 1;
        let mut p: Vec<f64> = (0..m).map(|_| rng.complex_normal().norm_sqr()).collect();
        let mut q: Vec<f64> = (0..n).map(|_| rng.complex_normal().norm_sqr()).collect();
        if normalize_weights(&mut p) && normalize_weights(&mut q) {
            starts.push((p, q));
        }
    }
    starts
}

fn dual_ascent(phi: &ComplexMatrix, opts: &MultiplierNormOptions) -> AscentState {
    let starts = ascent_starts(phi.rows(), phi.cols(), opts.restarts, opts.seed);
    let states = indexed_map(opts.execution, starts.len(), |i| {
        let (p, q) = starts[i].clone();
        ascend(phi, p, q, opts.start_iters, 1e-14)
    });
    let mut best = 0usize;
    for (i, st) in states.iter().enumerate() {
        if st.value > states[best].value {
            best = i;
        }
    }
    let iterations: usize = states.iter().map(|s| s.iterations).sum();
    let mut chosen = states.into_iter().nth(best).expect("at least one start");
    chosen.iterations = iterations;
    chosen
}

/// Contraction B = conj(W Z*) built from the singular factors of the
/// weighted matrix; ‖Φ ∘ B‖ is at least the ascent value.
fn contraction_from_state(phi: &ComplexMatrix, state: &AscentState) -> ComplexMatrix {
    if state.svd.rank() == 0 {
        let mut e = ComplexMatrix::zeros(phi.rows(), phi.cols());
        e[(0, 0)] = ONE;
        return e;
    }
    state.svd.polar_factor(phi.rows(), phi.cols()).conj()
}

/// Least-norm x with x Y* = rhs (rhs over the active columns), via the
/// normal equations of the Gram matrix of the columns.
fn least_norm_completion(
    columns: &[Vec<Complex64>],
    rhs: &[Complex64],
) -> Option<Vec<Complex64>> {
    let d = columns.len();
    if d == 0 {
        return if rhs.iter().all(|z| z.norm() <= 1e-14) {
            Some(Vec::new())
        } else {
            None
        };
    }
    let rows = columns[0].len();
    debug_assert_eq!(rows, rhs.len());
    // gram[k][l] = <col_l, col_k> so that gram * x solves the normal system
    let mut gram = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        for l in 0..d {
            let mut acc = ZERO;
            for t in 0..rows {
                acc += columns[l][t].conj() * columns[k][t];
            }
            gram[(k, l)] = acc;
        }
    }
    let mut b = vec![ZERO; d];
    for (k, bk) in b.iter_mut().enumerate() {
        for t in 0..rows {
            *bk += rhs[t] * columns[k][t];
        }
    }
    // pseudo-inverse through the eigensystem of the Hermitian Gram matrix
    let eig = hermitian_eig(&gram.hermitize()).ok()?;
    let lam_max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    let cutoff = lam_max * 1e-12;
    let mut x = vec![ZERO; d];
    for j in 0..d {
        let lam = eig.eigenvalues[j];
        if lam <= cutoff {
            continue;
        }
        let mut coeff = ZERO;
        for k in 0..d {
            coeff += eig.eigenvectors[(k, j)].conj() * b[k];
        }
        coeff /= lam;
        for k in 0..d {
            x[k] += coeff * eig.eigenvectors[(k, j)];
        }
    }
    Some(x)
}

struct DirectCertificate {
    witness: HaagerupFactorization,
    certificate: PsdBlockCertificate,
}

/// Builds the factorization X = D_p^{-1/2} W Σ^{1/2}, Y = D_q^{-1/2} Z Σ^{1/2}
/// on the rows and columns the ascent weights keep active, completes the
/// remaining rows by least-norm solves, and verifies the result against Φ.
fn certificate_from_state(phi: &ComplexMatrix, state: &AscentState) -> Option<DirectCertificate> {
    let (m, n) = (phi.rows(), phi.cols());
    let max_p = state.p.iter().cloned().fold(0.0, f64::max);
    let max_q = state.q.iter().cloned().fold(0.0, f64::max);
    if max_p <= 0.0 || max_q <= 0.0 {
        return None;
    }
    let active_rows: Vec<usize> = (0..m)
        .filter(|&s| state.p[s] >= ACTIVE_FLOOR_REL * max_p)
        .collect();
    let active_cols: Vec<usize> = (0..n)
        .filter(|&t| state.q[t] >= ACTIVE_FLOOR_REL * max_q)
        .collect();
    if active_rows.is_empty() || active_cols.is_empty() {
        return None;
    }

    let mut p_act: Vec<f64> = active_rows.iter().map(|&s| state.p[s]).collect();
    let mut q_act: Vec<f64> = active_cols.iter().map(|&t| state.q[t]).collect();
    if !normalize_weights(&mut p_act) || !normalize_weights(&mut q_act) {
        return None;
    }
    let sub = phi.select(&active_rows, &active_cols);
    let svd = thin_svd(&weighted_matrix(&sub, &p_act, &q_act));
    let d = svd.rank();
    if d == 0 {
        return None;
    }

    // factor columns on the active sets
    let mut left: Vec<Vec<Complex64>> = vec![vec![ZERO; m]; d];
    let mut right: Vec<Vec<Complex64>> = vec![vec![ZERO; n]; d];
    for k in 0..d {
        let root = svd.sigma[k].sqrt();
        for (i, &s) in active_rows.iter().enumerate() {
            left[k][s] = svd.left[k][i] * root / p_act[i].sqrt();
        }
        for (j, &t) in active_cols.iter().enumerate() {
            right[k][t] = svd.right[k][j] * root / q_act[j].sqrt();
        }
    }

    // complete light rows against the active column family
    let right_active: Vec<Vec<Complex64>> = (0..d)
        .map(|k| active_cols.iter().map(|&t| right[k][t]).collect())
        .collect();
    for s in 0..m {
        if active_rows.contains(&s) {
            continue;
        }
        let rhs: Vec<Complex64> = active_cols.iter().map(|&t| phi[(s, t)]).collect();
        let x = least_norm_completion(&right_active, &rhs)?;
        for k in 0..d {
            left[k][s] = x[k];
        }
    }
    // complete light columns against the full row family
    let left_full: Vec<Vec<Complex64>> = left.clone();
    for t in 0..n {
        if active_cols.contains(&t) {
            continue;
        }
        let rhs: Vec<Complex64> = (0..m).map(|s| phi[(s, t)].conj()).collect();
        let left_conj: Vec<Vec<Complex64>> = left_full
            .iter()
            .map(|col| col.iter().map(|z| z.conj()).collect())
            .collect();
        let y = least_norm_completion(&left_conj, &rhs)?;
        for k in 0..d {
            right[k][t] = y[k];
        }
    }

    let mut witness = HaagerupFactorization::from_columns(m, n, left, right);
    let residual = witness.reconstruct().sub(phi).ok()?.max_abs();
    if residual > RECONSTRUCTION_TOL * (1.0 + witness.bound()) {
        return None;
    }
    // equalizing the two sides tightens the Gram diagonals to the bound
    witness.global_balance();
    witness.enforce_projective_chain();
    let r = witness.left_gram();
    let s = witness.right_gram();
    let level = PsdBlockCertificate {
        r: r.clone(),
        s: s.clone(),
        level: 0.0,
    }
    .max_diagonal()
    .max(witness.bound())
    .max(0.0);
    let certificate = PsdBlockCertificate { r, s, level };
    let check = certificate.verify(phi);
    if !check.ok {
        return None;
    }
    Some(DirectCertificate {
        witness,
        certificate,
    })
}

// ---------------------------------------------------------------------------
// feasibility: is ‖Φ‖ at most C?
// ---------------------------------------------------------------------------

/// Decides whether a certificate exists at level `c`: a positive answer
/// returns the certificate, a negative one describes the violation.
///
/// The ascent-based fast paths settle clear cases; the alternating
/// projection scheme with Dykstra corrections handles the remainder within
/// the projection budget.
pub fn psd_feasibility(
    phi: &ComplexMatrix,
    c: f64,
    tol: f64,
) -> Result<FeasibilityOutcome> {
    psd_feasibility_with(phi, c, tol, &FeasibilityOptions::default())
}

pub fn psd_feasibility_with(
    phi: &ComplexMatrix,
    c: f64,
    tol: f64,
    opts: &FeasibilityOptions,
) -> Result<FeasibilityOutcome> {
    if !(c > 0.0) {
        return Err(Error::parameter("c", "level must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::parameter("tol", "tolerance must be positive"));
    }
    if phi.is_zero() {
        return Ok(FeasibilityOutcome::Feasible(PsdBlockCertificate {
            r: ComplexMatrix::zeros(phi.rows(), phi.rows()),
            s: ComplexMatrix::zeros(phi.cols(), phi.cols()),
            level: c,
        }));
    }

    if opts.use_fast_paths {
        let ascent_opts = MultiplierNormOptions {
            seed: opts.seed,
            restarts: opts.restarts,
            execution: opts.execution,
            ..MultiplierNormOptions::default()
        };
        let state = dual_ascent(phi, &ascent_opts);
        let contraction = contraction_from_state(phi, &state);
        let denom = operator_norm(&contraction);
        if denom > 1e-12 {
            let witnessed =
                operator_norm(&schur_product(phi, &contraction)?) / denom * (1.0 - FLOAT_GUARD);
            if witnessed > c * (1.0 + PSD_FEASIBLE_REL) {
                return Ok(FeasibilityOutcome::Infeasible(InfeasibilityReport {
                    violation: witnessed - c,
                    witnessed_lower: Some(witnessed),
                }));
            }
        }
        if let Some(direct) = certificate_from_state(phi, &state) {
            if direct.certificate.level <= c * (1.0 + PSD_FEASIBLE_REL) {
                return Ok(FeasibilityOutcome::Feasible(direct.certificate));
            }
        }
    }

    alternating_projections(phi, c, tol, opts.max_projections)
}

/// Dykstra-corrected alternating projections between the PSD cone and the
/// affine/box set {off-diagonal block = Φ, diag ≤ C}.
fn alternating_projections(
    phi: &ComplexMatrix,
    c: f64,
    tol: f64,
    max_projections: usize,
) -> Result<FeasibilityOutcome> {
    let (m, n) = (phi.rows(), phi.cols());
    let dim = m + n;
    let feasible_slack = PSD_FEASIBLE_REL * c;

    let project_constraints = |mat: &ComplexMatrix| -> ComplexMatrix {
        let mut out = mat.hermitize();
        for s in 0..m {
            for t in 0..n {
                out[(s, m + t)] = phi[(s, t)];
                out[(m + t, s)] = phi[(s, t)].conj();
            }
        }
        for i in 0..dim {
            let d = out[(i, i)].re.min(c);
            out[(i, i)] = Complex64::new(d, 0.0);
        }
        out
    };

    let mut here = project_constraints(&ComplexMatrix::zeros(dim, dim));
    let mut psd_correction = ComplexMatrix::zeros(dim, dim);
    let mut box_correction = ComplexMatrix::zeros(dim, dim);
    let mut best_violation = f64::INFINITY;
    let mut stall_count = 0usize;
    let rounds = max_projections / 2;

    for _ in 0..rounds {
        let violation = (-min_eigenvalue(&here)).max(0.0);
        best_violation = best_violation.min(violation);
        if violation <= feasible_slack {
            return Ok(FeasibilityOutcome::Feasible(PsdBlockCertificate {
                r: here.block(0, 0, m, m),
                s: here.block(m, m, n, n),
                level: c,
            }));
        }

        let psd_input = here.add(&psd_correction)?;
        let onto_cone = psd_project(&psd_input)?;
        psd_correction = psd_input.sub(&onto_cone)?;
        let box_input = onto_cone.add(&box_correction)?;
        let onto_box = project_constraints(&box_input);
        box_correction = box_input.sub(&onto_box)?;

        let step = onto_box.sub(&here)?.max_abs();
        here = onto_box;
        if step <= 1e-13 * (1.0 + c) {
            stall_count += 1;
            if stall_count >= 30 {
                let violation = (-min_eigenvalue(&here)).max(0.0);
                if violation > tol {
                    return Ok(FeasibilityOutcome::Infeasible(InfeasibilityReport {
                        violation,
                        witnessed_lower: None,
                    }));
                }
                return Ok(FeasibilityOutcome::Indeterminate {
                    best_violation: violation,
                });
            }
        } else {
            stall_count = 0;
        }
    }
    Ok(FeasibilityOutcome::Indeterminate { best_violation })
}

// ---------------------------------------------------------------------------
// the norm bracket
// ---------------------------------------------------------------------------

/// Multiplier norm of Φ as a certified bracket of relative width `rel_tol`.
///
/// The upper endpoint is witnessed by a factorization and a PSD block
/// certificate, the lower endpoint by a test contraction. Runs are
/// deterministic; all randomness is seeded (seed 0 here).
pub fn multiplier_norm(phi: &ComplexMatrix, rel_tol: f64) -> Result<MultiplierNormResult> {
    multiplier_norm_with(phi, &MultiplierNormOptions::with_rel_tol(rel_tol))
}

pub fn multiplier_norm_with(
    phi: &ComplexMatrix,
    opts: &MultiplierNormOptions,
) -> Result<MultiplierNormResult> {
    if !(opts.rel_tol > 0.0 && opts.rel_tol <= 0.1) {
        return Err(Error::parameter("rel_tol", "must lie in (0, 0.1]"));
    }
    let (m, n) = (phi.rows(), phi.cols());
    if phi.is_zero() {
        let mut e = ComplexMatrix::zeros(m, n);
        e[(0, 0)] = ONE;
        return Ok(MultiplierNormResult {
            lower: 0.0,
            upper: 0.0,
            witness: HaagerupFactorization::empty(m, n),
            certificate: PsdBlockCertificate::zero(m, n),
            lower_witness: e,
            iterations: 0,
            converged: true,
        });
    }

    let coarse = multiplier_lower_bound_with(phi, opts.lower_bound_trials, opts.seed, opts.execution)?;
    let mut state = dual_ascent(phi, opts);
    let mut iterations = state.iterations;
    let mut direct: Option<DirectCertificate> = None;
    let mut lower_value = coarse.value;
    let mut lower_witness = coarse.witness.clone();

    let mut polish_budget = [2_000usize, 8_000, 20_000].into_iter();
    loop {
        let contraction = contraction_from_state(phi, &state);
        let denom = operator_norm(&contraction);
        if denom > 1e-12 {
            let ratio = operator_norm(&schur_product(phi, &contraction)?) / denom;
            if ratio > lower_value {
                lower_value = ratio;
                lower_witness = contraction;
            }
        }
        direct = certificate_from_state(phi, &state).or(direct);
        if let Some(ref d) = direct {
            let upper = d.certificate.level.max(lower_value);
            if upper - lower_value <= opts.rel_tol * upper {
                break;
            }
        }
        match polish_budget.next() {
            Some(extra) if iterations + extra <= opts.max_iters => {
                let polished = ascend(phi, state.p.clone(), state.q.clone(), extra, 1e-15);
                iterations += polished.iterations;
                if polished.value >= state.value {
                    state = polished;
                }
            }
            _ => break,
        }
    }

    // documented general engine as fallback when the direct construction
    // does not close the bracket
    if direct.is_none() {
        let init_upper = (operator_norm(phi).max(phi.max_abs())) * 2.0;
        let mut lo = lower_value;
        let mut hi = init_upper.max(lower_value * (1.0 + opts.rel_tol));
        let mut cert: Option<PsdBlockCertificate> = None;
        for _ in 0..60 {
            if hi - lo <= opts.rel_tol * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let ap_opts = FeasibilityOptions {
                use_fast_paths: false,
                ..opts.feasibility.clone()
            };
            match psd_feasibility_with(phi, mid, PSD_FEASIBLE_REL * mid, &ap_opts)? {
                FeasibilityOutcome::Feasible(c) => {
                    hi = mid;
                    cert = Some(c);
                }
                FeasibilityOutcome::Infeasible(_) => lo = mid,
                FeasibilityOutcome::Indeterminate { .. } => break,
            }
            iterations += 1;
        }
        if let Some(c) = cert {
            let witness = haagerup_factorize(&c, phi)?;
            direct = Some(DirectCertificate {
                witness,
                certificate: c,
            });
        }
    }

    let Some(direct) = direct else {
        // no certificate at all: report the trivial factorization level
        let fallback_level = (operator_norm(phi).max(phi.max_abs())) * 2.0;
        let cert = PsdBlockCertificate {
            r: ComplexMatrix::identity(m).scale(Complex64::new(fallback_level, 0.0)),
            s: ComplexMatrix::identity(n).scale(Complex64::new(fallback_level, 0.0)),
            level: fallback_level,
        };
        let witness = haagerup_factorize(&cert, phi)?;
        return Ok(MultiplierNormResult {
            lower: lower_value * (1.0 - FLOAT_GUARD),
            upper: fallback_level.max(witness.bound()) * (1.0 + FLOAT_GUARD),
            witness,
            certificate: cert,
            lower_witness,
            iterations,
            converged: false,
        });
    };

    let lower = lower_value * (1.0 - FLOAT_GUARD);
    let mut upper = direct
        .certificate
        .level
        .max(direct.witness.bound())
        .max(lower)
        * (1.0 + FLOAT_GUARD);
    if upper < lower {
        upper = lower;
    }
    let mut certificate = direct.certificate;
    certificate.level = certificate.level.max(upper / (1.0 + FLOAT_GUARD));
    let converged = upper - lower <= opts.rel_tol * upper;
    Ok(MultiplierNormResult {
        lower,
        upper,
        witness: direct.witness,
        certificate,
        lower_witness,
        iterations,
        converged,
    })
}

/// Extracts vector families from a certificate by factoring the PSD block
/// as G G*: X is the top block of G, Y the bottom block, columns below the
/// drop threshold removed and the rest balanced.
pub fn haagerup_factorize(
    cert: &PsdBlockCertificate,
    phi: &ComplexMatrix,
) -> Result<HaagerupFactorization> {
    let (m, n) = (phi.rows(), phi.cols());
    if cert.r.rows() != m || cert.s.rows() != n {
        return Err(Error::CertificateMismatch(format!(
            "certificate blocks {}x{} / {}x{} do not match symbol {}x{}",
            cert.r.rows(),
            cert.r.cols(),
            cert.s.rows(),
            cert.s.cols(),
            m,
            n
        )));
    }
    if phi.is_zero() && cert.level == 0.0 {
        return Ok(HaagerupFactorization::empty(m, n));
    }
    let check = cert.verify(phi);
    if !check.ok {
        return Err(Error::CertificateMismatch(format!(
            "certificate invariants fail: min eigenvalue {:.3e}, max diagonal {:.6e}, level {:.6e}",
            check.min_eigenvalue, check.max_diagonal, cert.level
        )));
    }
    let block = cert.block_matrix(phi);
    let eig = hermitian_eig(&block)?;
    let dim = m + n;
    let mut left = Vec::new();
    let mut right = Vec::new();
    // descending eigenvalues; clamp tiny negatives
    for j in (0..dim).rev() {
        let lam = eig.eigenvalues[j];
        if lam <= 0.0 {
            continue;
        }
        let root = lam.sqrt();
        let col: Vec<Complex64> = (0..dim).map(|i| eig.eigenvectors[(i, j)] * root).collect();
        if vector_norm(&col) <= COLUMN_DROP {
            continue;
        }
        left.push(col[0..m].to_vec());
        right.push(col[m..dim].to_vec());
    }
    let mut fact = HaagerupFactorization::from_columns(m, n, left, right);
    fact.global_balance();
    fact.enforce_projective_chain();
    let residual = fact.reconstruct().sub(phi)?.max_abs();
    let allowance = 1e-8 * (1.0 + fact.bound().max(cert.level));
    if residual > allowance {
        return Err(Error::CertificateMismatch(format!(
            "factorization residual {residual:.3e} exceeds {allowance:.3e}"
        )));
    }
    Ok(fact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::trace_norm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hadamard2() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, -1.0]).unwrap()
    }

    #[test]
    fn schur_product_examples() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let ones = ComplexMatrix::ones(2, 2);
        assert_eq!(schur_product(&ones, &a).unwrap(), a);
        let zero = ComplexMatrix::zeros(2, 2);
        assert!(schur_product(&zero, &a).unwrap().is_zero());
        let id = ComplexMatrix::identity(2);
        let diag = schur_product(&id, &a).unwrap();
        assert_eq!(diag[(0, 0)], c(1.0, 0.0));
        assert_eq!(diag[(0, 1)], ZERO);
        assert_eq!(diag[(1, 1)], c(4.0, 0.0));
        let wide = ComplexMatrix::zeros(2, 3);
        assert!(schur_product(&a, &wide).is_err());
    }

    #[test]
    fn norm_of_all_ones_is_one() {
        let res = multiplier_norm(&ComplexMatrix::ones(3, 3), 1e-6).unwrap();
        assert!(res.converged);
        assert!(res.lower <= 1.0 && 1.0 <= res.upper, "{res:?}");
        assert!(res.width() <= 1e-6 * res.upper);
        assert!(res.witness.bound() <= res.upper * (1.0 + 1e-8));
    }

    #[test]
    fn norm_of_identity_indicator_is_one() {
        let res = multiplier_norm(&ComplexMatrix::identity(3), 1e-6).unwrap();
        assert!(res.converged);
        assert!(res.lower <= 1.0 && 1.0 <= res.upper);
        assert!(res.width() <= 1e-6 * res.upper);
    }

    #[test]
    fn norm_of_hadamard_is_sqrt_two() {
        let res = multiplier_norm(&hadamard2(), 1e-6).unwrap();
        let target = 2.0_f64.sqrt();
        assert!(res.converged, "{res:?}");
        assert!(res.lower <= target && target <= res.upper, "{res:?}");
        assert!(res.width() <= 1e-6 * res.upper);
        // independent cross-check: ‖Φ‖_S1 / sqrt(mn) = 2 sqrt(2) / 2
        let s1_over = trace_norm(&hadamard2()) / 2.0;
        assert!((s1_over - target).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_short_circuits() {
        let res = multiplier_norm(&ComplexMatrix::zeros(2, 3), 1e-3).unwrap();
        assert_eq!(res.lower, 0.0);
        assert_eq!(res.upper, 0.0);
        assert_eq!(res.witness.rank(), 0);
        assert!(res.converged);
    }

    #[test]
    fn witness_reconstructs_symbol() {
        let mut rng = SeededRng::new(17);
        for _ in 0..5 {
            let phi = rng.unit_disc_matrix(4, 3);
            let res = multiplier_norm(&phi, 1e-6).unwrap();
            let residual = res.witness.reconstruct().sub(&phi).unwrap().max_abs();
            assert!(residual <= 1e-8 * (1.0 + res.witness.bound()), "{residual}");
            assert!(res.witness.bound() <= res.upper * (1.0 + 1e-8));
            let check = res.certificate.verify(&phi);
            assert!(check.ok, "{check:?}");
        }
    }

    #[test]
    fn lower_bound_examples() {
        let ones = ComplexMatrix::ones(3, 3);
        let est = multiplier_lower_bound(&ones, 5, 0).unwrap();
        assert!((est.value - 1.0).abs() <= 1e-9, "{}", est.value);

        let zero = ComplexMatrix::zeros(2, 2);
        assert_eq!(multiplier_lower_bound(&zero, 5, 0).unwrap().value, 0.0);

        let est = multiplier_lower_bound(&hadamard2(), 100, 0).unwrap();
        assert!(est.value >= 1.41, "{}", est.value);
        assert!(est.value <= 2.0_f64.sqrt() + 1e-9);
    }

    #[test]
    fn feasibility_examples() {
        let ones = ComplexMatrix::ones(2, 2);
        match psd_feasibility(&ones, 1.0, 1e-6).unwrap() {
            FeasibilityOutcome::Feasible(cert) => {
                assert!(cert.verify(&ones).ok);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
        match psd_feasibility(&ones, 0.5, 1e-6).unwrap() {
            FeasibilityOutcome::Infeasible(report) => {
                assert!(report.violation > 0.1, "{report:?}");
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        let h = hadamard2();
        assert!(matches!(
            psd_feasibility(&h, 1.2, 1e-6).unwrap(),
            FeasibilityOutcome::Infeasible(_)
        ));
        assert!(matches!(
            psd_feasibility(&h, 1.5, 1e-6).unwrap(),
            FeasibilityOutcome::Feasible(_)
        ));
    }

    #[test]
    fn alternating_projections_engine() {
        // strictly feasible level for the all-ones symbol, fast paths off
        let ones = ComplexMatrix::ones(2, 2);
        let opts = FeasibilityOptions {
            use_fast_paths: false,
            ..FeasibilityOptions::default()
        };
        match psd_feasibility_with(&ones, 1.05, 1e-6, &opts).unwrap() {
            FeasibilityOutcome::Feasible(cert) => {
                let check = cert.verify(&ones);
                assert!(check.ok, "{check:?}");
            }
            other => panic!("expected feasible, got {other:?}"),
        }
        match psd_feasibility_with(&ones, 0.5, 1e-6, &opts).unwrap() {
            FeasibilityOutcome::Infeasible(report) => assert!(report.violation > 1e-6),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn factorize_from_feasibility_certificate() {
        let phi = hadamard2();
        let res = multiplier_norm(&phi, 1e-6).unwrap();
        let fact = haagerup_factorize(&res.certificate, &phi).unwrap();
        let residual = fact.reconstruct().sub(&phi).unwrap().max_abs();
        assert!(residual <= 1e-8 * (1.0 + res.certificate.level));
        assert!(fact.bound() <= res.certificate.level * (1.0 + 1e-8));
    }

    #[test]
    fn factorize_rejects_mismatched_certificate() {
        let ones = ComplexMatrix::ones(2, 2);
        let res = multiplier_norm(&ones, 1e-6).unwrap();
        let other = ComplexMatrix::from_real(2, 2, &[5.0, 0.0, 0.0, 5.0]).unwrap();
        assert!(haagerup_factorize(&res.certificate, &other).is_err());
    }

    #[test]
    fn projective_certificate_examples() {
        let ones_pair = projective_certificate(
            &[vec![ONE, ONE]],
            &[vec![ONE, ONE]],
        )
        .unwrap();
        assert_eq!(ones_pair.value, 1.0);
        assert!(ones_pair
            .matrix
            .unwrap()
            .sub(&ComplexMatrix::ones(2, 2))
            .unwrap()
            .is_zero());

        let empty = projective_certificate(&[], &[]).unwrap();
        assert_eq!(empty.value, 0.0);
        assert!(empty.matrix.is_none());

        // rows of I paired with rows of I: value n, certifies the identity
        let n = 3;
        let rows: Vec<Vec<Complex64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { ONE } else { ZERO }).collect())
            .collect();
        let cert = projective_certificate(&rows, &rows).unwrap();
        assert_eq!(cert.value, n as f64);
        assert!(cert
            .matrix
            .unwrap()
            .sub(&ComplexMatrix::identity(n))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn bound_stays_below_projective_value_of_witness_columns() {
        let mut rng = SeededRng::new(23);
        for _ in 0..8 {
            let phi = rng.unit_disc_matrix(4, 4);
            let res = multiplier_norm(&phi, 1e-6).unwrap();
            let (phis, psis) = res.witness.separable_pairs();
            let proj = projective_certificate(&phis, &psis).unwrap();
            assert!(
                res.witness.bound() <= proj.value * (1.0 + 1e-9),
                "bound {} proj {}",
                res.witness.bound(),
                proj.value
            );
            let diff = proj.matrix.unwrap().sub(&phi).unwrap().max_abs();
            assert!(diff <= 1e-8 * (1.0 + res.witness.bound()));
        }
    }

    #[test]
    fn scaling_and_permutation_invariance() {
        let mut rng = SeededRng::new(31);
        let phi = rng.unit_disc_matrix(3, 3);
        let base = multiplier_norm(&phi, 1e-6).unwrap();

        let scaled = multiplier_norm(&phi.scale(c(-2.5, 0.0)), 1e-6).unwrap();
        assert!((scaled.upper - 2.5 * base.upper).abs() <= 3e-6 * scaled.upper);
        assert!((scaled.lower - 2.5 * base.lower).abs() <= 3e-6 * scaled.upper);

        // swap two rows and two columns
        let perm = ComplexMatrix::from_fn(3, 3, |i, j| {
            let pi = [1, 0, 2][i];
            let pj = [2, 1, 0][j];
            phi[(pi, pj)]
        });
        let permuted = multiplier_norm(&perm, 1e-6).unwrap();
        assert!((permuted.upper - base.upper).abs() <= 3e-6 * base.upper);
    }

    #[test]
    fn submultiplicative_via_tensor_witness() {
        let mut rng = SeededRng::new(37);
        let a = rng.unit_disc_matrix(3, 3);
        let b = rng.unit_disc_matrix(3, 3);
        let ra = multiplier_norm(&a, 1e-6).unwrap();
        let rb = multiplier_norm(&b, 1e-6).unwrap();
        let prod = schur_product(&a, &b).unwrap();
        let rp = multiplier_norm(&prod, 1e-6).unwrap();
        assert!(rp.upper <= ra.upper * rb.upper * (1.0 + 3e-6));

        let tensor = ra.witness.schur_tensor(&rb.witness).unwrap();
        let residual = tensor.reconstruct().sub(&prod).unwrap().max_abs();
        assert!(residual <= 1e-7 * (1.0 + tensor.bound()));
        assert!(tensor.bound() <= ra.witness.bound() * rb.witness.bound() * (1.0 + 1e-9));
    }

    #[test]
    fn sup_norm_below_upper() {
        let mut rng = SeededRng::new(41);
        for _ in 0..5 {
            let phi = rng.unit_disc_matrix(4, 4);
            let res = multiplier_norm(&phi, 1e-6).unwrap();
            assert!(phi.max_abs() <= res.upper * (1.0 + 1e-6));
        }
    }

    #[test]
    fn submatrix_bracket_is_monotone() {
        let mut rng = SeededRng::new(43);
        let phi = rng.unit_disc_matrix(4, 4);
        let full = multiplier_norm(&phi, 1e-6).unwrap();
        let sub = phi.block(0, 0, 3, 2);
        let part = multiplier_norm(&sub, 1e-6).unwrap();
        assert!(part.upper <= full.upper * (1.0 + 1e-6));
    }

    #[test]
    fn rejects_bad_rel_tol() {
        let ones = ComplexMatrix::ones(2, 2);
        assert!(multiplier_norm(&ones, 0.0).is_err());
        assert!(multiplier_norm(&ones, 0.2).is_err());
    }
}
