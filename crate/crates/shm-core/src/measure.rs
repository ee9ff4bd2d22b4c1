//! Finite measure spaces, coarsenings, conditional expectations, step
//! kernels and step symbols, and the reduction of measure-space Schur
//! multipliers to weighted matrix problems.
//!
//! A step kernel h on cells S_j x T_k acts as an integral operator between
//! the weighted L2 spaces; its operator norm equals the operator norm of
//! the matrix c_jk = sqrt(mu_j) h_jk sqrt(nu_k). A step symbol's multiplier
//! norm is the plain matrix multiplier norm of its value matrix and does
//! not depend on the masses at all. Conditional expectation onto a coarser
//! partition never increases either norm.

use crate::error::{Error, Result};
use crate::matrix::{operator_norm, ComplexMatrix};
use crate::schur::{multiplier_norm_with, MultiplierNormOptions, MultiplierNormResult};

/// Finitely many cells with positive masses and finite total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasureSpace {
    labels: Vec<String>,
    masses: Vec<f64>,
}

impl FiniteMeasureSpace {
    pub fn new(labels: Vec<String>, masses: Vec<f64>) -> Result<Self> {
        if labels.is_empty() || labels.len() != masses.len() {
            return Err(Error::InvalidMeasureSpace(format!(
                "{} labels for {} masses",
                labels.len(),
                masses.len()
            )));
        }
        let mut total = 0.0;
        for (i, &m) in masses.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::InvalidMeasureSpace(format!(
                    "mass of cell {i} is {m}; masses must be positive and finite"
                )));
            }
            total += m;
        }
        if !total.is_finite() {
            return Err(Error::InvalidMeasureSpace(
                "total mass is not finite".into(),
            ));
        }
        Ok(Self { labels, masses })
    }

    /// Cells labelled by their index.
    pub fn from_masses(masses: Vec<f64>) -> Result<Self> {
        let labels = (0..masses.len()).map(|i| format!("c{i}")).collect();
        Self::new(labels, masses)
    }

    pub fn unit(n: usize) -> Self {
        Self::from_masses(vec![1.0; n]).expect("unit masses are valid")
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Surjective map from fine cells onto coarse cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Coarsening {
    map: Vec<usize>,
    coarse_len: usize,
}

impl Coarsening {
    pub fn new(map: Vec<usize>, coarse_len: usize) -> Result<Self> {
        if map.is_empty() || coarse_len == 0 {
            return Err(Error::InvalidCoarsening("empty coarsening".into()));
        }
        let mut hit = vec![false; coarse_len];
        for (i, &c) in map.iter().enumerate() {
            if c >= coarse_len {
                return Err(Error::InvalidCoarsening(format!(
                    "cell {i} maps to {c}, out of range {coarse_len}"
                )));
            }
            hit[c] = true;
        }
        if !hit.iter().all(|&h| h) {
            return Err(Error::InvalidCoarsening("map is not surjective".into()));
        }
        Ok(Self { map, coarse_len })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
            coarse_len: n,
        }
    }

    /// Merges exactly the two given cells of an n-cell space.
    pub fn merge_pair(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidCoarsening(format!(
                "cannot merge cells {a} and {b} out of {n}"
            )));
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let mut map = Vec::with_capacity(n);
        for i in 0..n {
            let target = if i == hi {
                lo
            } else if i > hi {
                i - 1
            } else {
                i
            };
            map.push(target);
        }
        Self::new(map, n - 1)
    }

    pub fn fine_len(&self) -> usize {
        self.map.len()
    }

    pub fn coarse_len(&self) -> usize {
        self.coarse_len
    }

    pub fn target(&self, fine: usize) -> usize {
        self.map[fine]
    }

    /// `self` followed by `next` on the coarse side.
    pub fn compose(&self, next: &Coarsening) -> Result<Coarsening> {
        if next.fine_len() != self.coarse_len {
            return Err(Error::InvalidCoarsening(format!(
                "composition mismatch: {} coarse cells vs {} fine cells",
                self.coarse_len,
                next.fine_len()
            )));
        }
        Coarsening::new(
            self.map.iter().map(|&c| next.map[c]).collect(),
            next.coarse_len,
        )
    }

    /// Image measure space: coarse masses are sums of mapped fine masses,
    /// labels are joined.
    pub fn apply(&self, space: &FiniteMeasureSpace) -> Result<FiniteMeasureSpace> {
        if space.len() != self.fine_len() {
            return Err(Error::InvalidCoarsening(format!(
                "space has {} cells, coarsening expects {}",
                space.len(),
                self.fine_len()
            )));
        }
        let mut masses = vec![0.0; self.coarse_len];
        let mut labels: Vec<Vec<&str>> = vec![Vec::new(); self.coarse_len];
        for i in 0..space.len() {
            masses[self.map[i]] += space.mass(i);
            labels[self.map[i]].push(&space.labels()[i]);
        }
        FiniteMeasureSpace::new(
            labels.into_iter().map(|parts| parts.join("+")).collect(),
            masses,
        )
    }
}

/// Piecewise-constant kernel h_jk on products of cells; rows follow the
/// codomain (S side), columns the domain (T side).
#[derive(Debug, Clone)]
pub struct StepKernel {
    pub row_space: FiniteMeasureSpace,
    pub col_space: FiniteMeasureSpace,
    pub values: ComplexMatrix,
}

impl StepKernel {
    pub fn new(
        row_space: FiniteMeasureSpace,
        col_space: FiniteMeasureSpace,
        values: ComplexMatrix,
    ) -> Result<Self> {
        check_shape(&row_space, &col_space, &values)?;
        Ok(Self {
            row_space,
            col_space,
            values,
        })
    }

    /// Coarse kernel under the paired conditional expectation.
    pub fn conditional_expectation(
        &self,
        row_c: &Coarsening,
        col_c: &Coarsening,
    ) -> Result<StepKernel> {
        let values = conditional_expectation(
            &self.values,
            &self.row_space,
            &self.col_space,
            row_c,
            col_c,
        )?;
        StepKernel::new(row_c.apply(&self.row_space)?, col_c.apply(&self.col_space)?, values)
    }
}

/// Piecewise-constant multiplier symbol on the same grid as a step kernel.
#[derive(Debug, Clone)]
pub struct StepSymbol {
    pub row_space: FiniteMeasureSpace,
    pub col_space: FiniteMeasureSpace,
    pub values: ComplexMatrix,
}

impl StepSymbol {
    pub fn new(
        row_space: FiniteMeasureSpace,
        col_space: FiniteMeasureSpace,
        values: ComplexMatrix,
    ) -> Result<Self> {
        check_shape(&row_space, &col_space, &values)?;
        Ok(Self {
            row_space,
            col_space,
            values,
        })
    }

    pub fn conditional_expectation(
        &self,
        row_c: &Coarsening,
        col_c: &Coarsening,
    ) -> Result<StepSymbol> {
        let values = conditional_expectation(
            &self.values,
            &self.row_space,
            &self.col_space,
            row_c,
            col_c,
        )?;
        StepSymbol::new(row_c.apply(&self.row_space)?, col_c.apply(&self.col_space)?, values)
    }
}

fn check_shape(
    rows: &FiniteMeasureSpace,
    cols: &FiniteMeasureSpace,
    values: &ComplexMatrix,
) -> Result<()> {
    if values.rows() != rows.len() || values.cols() != cols.len() {
        return Err(Error::DimensionMismatch {
            left_rows: rows.len(),
            left_cols: cols.len(),
            right_rows: values.rows(),
            right_cols: values.cols(),
        });
    }
    Ok(())
}

/// Matrix C with c_jk = sqrt(mu_j) h_jk sqrt(nu_k); its operator norm equals
/// the norm of the integral operator of the kernel between the weighted L2
/// spaces.
pub fn kernel_operator_matrix(kernel: &StepKernel) -> ComplexMatrix {
    let mu = kernel.row_space.masses();
    let nu = kernel.col_space.masses();
    ComplexMatrix::from_fn(kernel.values.rows(), kernel.values.cols(), |j, k| {
        kernel.values[(j, k)] * (mu[j].sqrt() * nu[k].sqrt())
    })
}

/// Operator norm of the integral operator of a step kernel.
pub fn kernel_operator_norm(kernel: &StepKernel) -> f64 {
    operator_norm(&kernel_operator_matrix(kernel))
}

/// Multiplier norm of a step symbol: the matrix multiplier norm of the raw
/// value matrix, independent of the masses.
pub fn step_multiplier_norm(symbol: &StepSymbol, rel_tol: f64) -> Result<MultiplierNormResult> {
    step_multiplier_norm_with(symbol, &MultiplierNormOptions::with_rel_tol(rel_tol))
}

pub fn step_multiplier_norm_with(
    symbol: &StepSymbol,
    opts: &MultiplierNormOptions,
) -> Result<MultiplierNormResult> {
    multiplier_norm_with(&symbol.values, opts)
}

/// Mass-weighted averaging onto the coarse grid:
/// coarse(J,K) = Σ_{j->J, k->K} mu_j nu_k v(j,k) / (mu_J nu_K).
pub fn conditional_expectation(
    values: &ComplexMatrix,
    row_space: &FiniteMeasureSpace,
    col_space: &FiniteMeasureSpace,
    row_c: &Coarsening,
    col_c: &Coarsening,
) -> Result<ComplexMatrix> {
    check_shape(row_space, col_space, values)?;
    if row_c.fine_len() != row_space.len() || col_c.fine_len() != col_space.len() {
        return Err(Error::InvalidCoarsening(format!(
            "coarsenings for {}x{} cells do not match a {}x{} grid",
            row_c.fine_len(),
            col_c.fine_len(),
            row_space.len(),
            col_space.len()
        )));
    }
    let coarse_rows = row_c.apply(row_space)?;
    let coarse_cols = col_c.apply(col_space)?;
    let mut numerator = ComplexMatrix::zeros(coarse_rows.len(), coarse_cols.len());
    for j in 0..row_space.len() {
        for k in 0..col_space.len() {
            let w = row_space.mass(j) * col_space.mass(k);
            numerator[(row_c.target(j), col_c.target(k))] += values[(j, k)] * w;
        }
    }
    Ok(ComplexMatrix::from_fn(
        coarse_rows.len(),
        coarse_cols.len(),
        |jj, kk| numerator[(jj, kk)] / (coarse_rows.mass(jj) * coarse_cols.mass(kk)),
    ))
}

/// Fine and coarse operator norms with the contraction verdict.
#[derive(Debug, Clone)]
pub struct OperatorContractionReport {
    pub fine: f64,
    pub coarse: f64,
    pub holds: bool,
}

/// Checks that conditional expectation does not increase the integral
/// operator norm.
pub fn projection_contracts_operator_norm(
    kernel: &StepKernel,
    row_c: &Coarsening,
    col_c: &Coarsening,
) -> Result<OperatorContractionReport> {
    let fine = kernel_operator_norm(kernel);
    let coarse = kernel_operator_norm(&kernel.conditional_expectation(row_c, col_c)?);
    Ok(OperatorContractionReport {
        fine,
        coarse,
        holds: coarse <= fine * (1.0 + 1e-10) + 1e-300,
    })
}

/// Fine and coarse multiplier brackets with the contraction verdict.
#[derive(Debug, Clone)]
pub struct MultiplierContractionReport {
    pub fine: MultiplierNormResult,
    pub coarse: MultiplierNormResult,
    pub rel_tol: f64,
    pub holds: bool,
}

/// Checks that conditional expectation does not increase the multiplier
/// norm beyond the bracket tolerance.
pub fn projection_contracts_multiplier_norm(
    symbol: &StepSymbol,
    row_c: &Coarsening,
    col_c: &Coarsening,
    rel_tol: f64,
) -> Result<MultiplierContractionReport> {
    let fine = step_multiplier_norm(symbol, rel_tol)?;
    let coarse = step_multiplier_norm(&symbol.conditional_expectation(row_c, col_c)?, rel_tol)?;
    let holds = coarse.upper <= fine.upper * (1.0 + 3.0 * rel_tol) + 1e-300;
    Ok(MultiplierContractionReport {
        fine,
        coarse,
        rel_tol,
        holds,
    })
}

/// Moves densities into the masses: new masses xi_j mu_j and eta_k nu_k,
/// new values h_jk / sqrt(xi_j eta_k). Operator and multiplier norms are
/// unchanged.
pub fn density_rescale(kernel: &StepKernel, xi: &[f64], eta: &[f64]) -> Result<StepKernel> {
    if xi.len() != kernel.row_space.len() || eta.len() != kernel.col_space.len() {
        return Err(Error::parameter(
            "densities",
            format!(
                "expected {} and {} densities, got {} and {}",
                kernel.row_space.len(),
                kernel.col_space.len(),
                xi.len(),
                eta.len()
            ),
        ));
    }
    for (i, &x) in xi.iter().chain(eta.iter()).enumerate() {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::parameter(
                "densities",
                format!("density {i} is {x}; must be positive and finite"),
            ));
        }
    }
    let row_space = FiniteMeasureSpace::new(
        kernel.row_space.labels().to_vec(),
        kernel
            .row_space
            .masses()
            .iter()
            .zip(xi)
            .map(|(&m, &x)| m * x)
            .collect(),
    )?;
    let col_space = FiniteMeasureSpace::new(
        kernel.col_space.labels().to_vec(),
        kernel
            .col_space
            .masses()
            .iter()
            .zip(eta)
            .map(|(&m, &e)| m * e)
            .collect(),
    )?;
    let values = ComplexMatrix::from_fn(kernel.values.rows(), kernel.values.cols(), |j, k| {
        kernel.values[(j, k)] / (xi[j] * eta[k]).sqrt()
    });
    StepKernel::new(row_space, col_space, values)
}

/// ‖F‖_{L2(mu x nu)} of a value grid.
pub fn weighted_l2_norm(
    values: &ComplexMatrix,
    row_space: &FiniteMeasureSpace,
    col_space: &FiniteMeasureSpace,
) -> f64 {
    let mut acc = 0.0;
    for j in 0..values.rows() {
        for k in 0..values.cols() {
            acc += row_space.mass(j) * col_space.mass(k) * values[(j, k)].norm_sqr();
        }
    }
    acc.sqrt()
}

/// Coarse approximation of a symbol together with its exact L2 error and
/// the multiplier-norm comparison.
#[derive(Debug, Clone)]
pub struct SymbolApproximation {
    pub symbol: StepSymbol,
    pub row_coarsening: Coarsening,
    pub col_coarsening: Coarsening,
    pub l2_error: f64,
    pub norm_report: MultiplierContractionReport,
}

/// Greedily merges the pair of cells with the smallest mass-weighted L2
/// perturbation while the distance to the original symbol stays below
/// `epsilon`; ties prefer row merges and then the lowest cell indices.
pub fn approximate_symbol(symbol: &StepSymbol, epsilon: f64) -> Result<SymbolApproximation> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::parameter("epsilon", "must be positive and finite"));
    }
    let mut row_c = Coarsening::identity(symbol.row_space.len());
    let mut col_c = Coarsening::identity(symbol.col_space.len());
    let mut current = symbol.clone();

    loop {
        let rows = current.row_space.len();
        let cols = current.col_space.len();
        // cheapest merge among all row pairs and all column pairs
        let mut best: Option<(f64, bool, usize, usize)> = None;
        let mut consider = |cost: f64, is_row: bool, a: usize, b: usize| {
            let candidate = (cost, is_row, a, b);
            let better = match best {
                None => true,
                Some((c, r, x, y)) => {
                    (cost, !is_row, a, b) < (c, !r, x, y)
                        || (cost == c && is_row == r && (a, b) < (x, y))
                }
            };
            let _ = better;
            // ordering: smaller cost first, rows before columns, then indices
            let key = |(c, row, a, b): (f64, bool, usize, usize)| (c, !row as u8, a, b);
            if best.is_none() || key(candidate) < key(best.unwrap()) {
                best = Some(candidate);
            }
        };
        if rows > 1 {
            for a in 0..rows {
                for b in (a + 1)..rows {
                    consider(row_merge_cost(&current, a, b), true, a, b);
                }
            }
        }
        if cols > 1 {
            for a in 0..cols {
                for b in (a + 1)..cols {
                    consider(col_merge_cost(&current, a, b), false, a, b);
                }
            }
        }
        let Some((_, is_row, a, b)) = best else {
            break; // 1x1 grid
        };

        // apply the merge tentatively and measure the exact distance to the
        // original symbol
        let (next_row_c, next_col_c) = if is_row {
            (
                row_c.compose(&Coarsening::merge_pair(rows, a, b)?)?,
                col_c.clone(),
            )
        } else {
            (
                row_c.clone(),
                col_c.compose(&Coarsening::merge_pair(cols, a, b)?)?,
            )
        };
        let candidate = symbol.conditional_expectation(&next_row_c, &next_col_c)?;
        let error = approximation_error(symbol, &candidate, &next_row_c, &next_col_c);
        if error >= epsilon {
            break;
        }
        row_c = next_row_c;
        col_c = next_col_c;
        current = candidate;
    }

    let l2_error = approximation_error(symbol, &current, &row_c, &col_c);
    let norm_report = projection_contracts_multiplier_norm(symbol, &row_c, &col_c, 1e-6)?;
    Ok(SymbolApproximation {
        symbol: current,
        row_coarsening: row_c,
        col_coarsening: col_c,
        l2_error,
        norm_report,
    })
}

fn row_merge_cost(symbol: &StepSymbol, a: usize, b: usize) -> f64 {
    let ma = symbol.row_space.mass(a);
    let mb = symbol.row_space.mass(b);
    let w = ma * mb / (ma + mb);
    let mut acc = 0.0;
    for k in 0..symbol.col_space.len() {
        let d = symbol.values[(a, k)] - symbol.values[(b, k)];
        acc += symbol.col_space.mass(k) * d.norm_sqr();
    }
    (w * acc).sqrt()
}

fn col_merge_cost(symbol: &StepSymbol, a: usize, b: usize) -> f64 {
    let ma = symbol.col_space.mass(a);
    let mb = symbol.col_space.mass(b);
    let w = ma * mb / (ma + mb);
    let mut acc = 0.0;
    for j in 0..symbol.row_space.len() {
        let d = symbol.values[(j, a)] - symbol.values[(j, b)];
        acc += symbol.row_space.mass(j) * d.norm_sqr();
    }
    (w * acc).sqrt()
}

/// Exact mass-weighted L2 distance between the fine symbol and a coarse
/// approximation pulled back through the coarsenings.
fn approximation_error(
    fine: &StepSymbol,
    coarse: &StepSymbol,
    row_c: &Coarsening,
    col_c: &Coarsening,
) -> f64 {
    let diff = ComplexMatrix::from_fn(fine.values.rows(), fine.values.cols(), |j, k| {
        fine.values[(j, k)] - coarse.values[(row_c.target(j), col_c.target(k))]
    });
    weighted_l2_norm(&diff, &fine.row_space, &fine.col_space)
}
