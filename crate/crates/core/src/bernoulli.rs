//! Multivariate Bernoulli moments of an edge-indicator vector.
//!
//! Only the reduced parameter collection is represented: the marginal
//! success probabilities `p_i` and the pairwise joint probabilities `p_ij`.
//! The covariance follows as `sigma_ij = p_ij - p_i p_j`.
//!
//! All estimates are built from integer co-occurrence counts, so the
//! plug-in covariance entries are single correctly rounded divisions of an
//! exact integer numerator by `m^2`.

use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Incidence;

/// Absolute tolerance for the symmetry check on input matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Slack applied to every covariance bound.
pub const BOUND_TOL: f64 = 1e-9;
/// Eigenvalues in `[-EIGEN_CLAMP, 0)` are reported as zero.
pub const EIGEN_CLAMP: f64 = 1e-9;

/// Covariance estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// `p_ij - p_i p_j` from empirical proportions.
    #[default]
    Plugin,
    /// Plug-in value scaled by `m / (m - 1)`. May exceed the Bernoulli
    /// bounds for small `m`.
    Unbiased,
}

#[derive(Debug, Clone)]
struct Spectrum {
    values: Vec<f64>,
    clamped: usize,
}

/// Symmetric `k x k` covariance matrix with a lazily cached spectrum.
#[derive(Debug, Clone)]
pub struct CovMatrix {
    entries: DMatrix<f64>,
    spectrum: OnceLock<Spectrum>,
}

impl PartialEq for CovMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl CovMatrix {
    /// Checks squareness and symmetry (to [`SYMMETRY_TOL`]), then stores
    /// the symmetrized matrix `(M + M^T) / 2`.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        if let Some(bad) = entries.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(format!("covariance entry {bad} is not finite")));
        }
        for i in 0..rows {
            for j in i + 1..cols {
                let gap = (entries[(i, j)] - entries[(j, i)]).abs();
                if gap > SYMMETRY_TOL {
                    return Err(Error::Asymmetric { i, j, gap });
                }
            }
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        Ok(CovMatrix {
            entries: sym,
            spectrum: OnceLock::new(),
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let k = rows.len();
        let mut m = DMatrix::zeros(k, k);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != k {
                return Err(Error::NotSquare {
                    rows: k,
                    cols: row.len(),
                });
            }
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        CovMatrix::new(m)
    }

    pub fn zeros(k: usize) -> Self {
        CovMatrix::new(DMatrix::zeros(k, k)).expect("zero matrix is symmetric")
    }

    /// `c * I_k`; `scaled_identity(k, 0.25)` is the maximum-entropy matrix.
    pub fn scaled_identity(k: usize, c: f64) -> Self {
        CovMatrix::new(DMatrix::identity(k, k) * c).expect("diagonal matrix is symmetric")
    }

    /// Direct sum of two matrices.
    pub fn block_diag(&self, other: &CovMatrix) -> CovMatrix {
        let (p, q) = (self.dim(), other.dim());
        let mut m = DMatrix::zeros(p + q, p + q);
        m.view_mut((0, 0), (p, p)).copy_from(&self.entries);
        m.view_mut((p, p), (q, q)).copy_from(&other.entries);
        CovMatrix::new(m).expect("direct sum of symmetric matrices")
    }

    /// Parses `k` lines of `k` comma-separated decimals.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line: i + 1,
                        message: format!("not a number: `{}`", cell.trim()),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 1,
                message: "empty covariance file".into(),
            });
        }
        CovMatrix::from_rows(&rows)
    }

    /// CSV with shortest round-trip decimal representations.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.entries[(i, j)]);
            }
            out.push('\n');
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().sum()
    }

    fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let eig = SymmetricEigen::new(self.entries.clone());
            let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            values.sort_by(|a, b| b.total_cmp(a));
            let mut clamped = 0;
            for v in &mut values {
                if *v < 0.0 && *v >= -EIGEN_CLAMP {
                    *v = 0.0;
                    clamped += 1;
                }
            }
            Spectrum { values, clamped }
        })
    }

    /// Eigenvalues in descending order. Values in `[-1e-9, 0)` are clamped
    /// to zero; see [`CovMatrix::clamped_eigenvalues`].
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum().values
    }

    /// How many eigenvalues were clamped to zero.
    pub fn clamped_eigenvalues(&self) -> usize {
        self.spectrum().clamped
    }

    /// Determinant as the product of the (clamped) eigenvalues.
    pub fn determinant(&self) -> f64 {
        self.eigenvalues().iter().product()
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> Result<CovMatrix> {
        check_indices(idx, self.dim())?;
        let m = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.entries[(idx[r], idx[c])]);
        CovMatrix::new(m)
    }
}

/// Free-function form of [`CovMatrix::eigenvalues`].
pub fn eigenvalues(sigma: &CovMatrix) -> Vec<f64> {
    sigma.eigenvalues().to_vec()
}

fn check_indices(idx: &[usize], k: usize) -> Result<()> {
    if idx.is_empty() {
        return Err(Error::InvalidIndex("index list is empty".into()));
    }
    for w in idx.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidIndex(format!(
                "indices must be strictly increasing, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= k) {
        return Err(Error::InvalidIndex(format!("index {bad} out of range for dimension {k}")));
    }
    Ok(())
}

/// First and second moments estimated from `m` observed structures.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    m: usize,
    estimator: Estimator,
    counts: DMatrix<u64>,
    p_hat: Vec<f64>,
    p_hat2: DMatrix<f64>,
    sigma_hat: CovMatrix,
}

impl MomentEstimate {
    fn from_counts(m: usize, counts: DMatrix<u64>, estimator: Estimator) -> Self {
        let k = counts.nrows();
        let mf = m as f64;
        let p_hat: Vec<f64> = (0..k).map(|i| counts[(i, i)] as f64 / mf).collect();
        let p_hat2 = counts.map(|c| c as f64 / mf);
        let denom = match estimator {
            Estimator::Plugin => mf * mf,
            Estimator::Unbiased => mf * (mf - 1.0),
        };
        let sigma = DMatrix::from_fn(k, k, |i, j| {
            let num = m as i128 * counts[(i, j)] as i128
                - counts[(i, i)] as i128 * counts[(j, j)] as i128;
            num as f64 / denom
        });
        MomentEstimate {
            m,
            estimator,
            counts,
            p_hat,
            p_hat2,
            sigma_hat: CovMatrix::new(sigma).expect("co-occurrence counts are symmetric"),
        }
    }

    /// Sample count `m`.
    pub fn samples(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.p_hat.len()
    }

    pub fn estimator(&self) -> Estimator {
        self.estimator
    }

    /// Marginal edge frequencies `p_i`.
    pub fn p_hat(&self) -> &[f64] {
        &self.p_hat
    }

    /// Joint frequencies `p_ij`; the diagonal equals `p_hat`.
    pub fn p_hat2(&self) -> &DMatrix<f64> {
        &self.p_hat2
    }

    pub fn sigma_hat(&self) -> &CovMatrix {
        &self.sigma_hat
    }

    /// Number of structures containing both edges `i` and `j`.
    pub fn joint_count(&self, i: usize, j: usize) -> u64 {
        self.counts[(i, j)]
    }
}

/// Plug-in moment estimate.
///
/// ```
/// use netvar::{estimate_moments, graph::Incidence};
/// let rows = Incidence::from_bit_strings(&["11", "10", "01", "00"]).unwrap();
/// let est = estimate_moments(&rows);
/// assert_eq!(est.p_hat(), &[0.5, 0.5]);
/// assert_eq!(est.sigma_hat().get(0, 1), 0.0);
/// assert_eq!(est.sigma_hat().get(0, 0), 0.25);
/// ```
pub fn estimate_moments(incidence: &Incidence) -> MomentEstimate {
    estimate_moments_with(incidence, Estimator::Plugin).expect("plug-in estimator is total")
}

/// Moment estimate with an explicit estimator. `Unbiased` needs `m >= 2`.
pub fn estimate_moments_with(incidence: &Incidence, estimator: Estimator) -> Result<MomentEstimate> {
    let m = incidence.samples();
    if estimator == Estimator::Unbiased && m < 2 {
        return Err(Error::domain("the unbiased estimator needs at least two samples"));
    }
    let k = incidence.dim();
    let mut counts = DMatrix::<u64>::zeros(k, k);
    let mut present = Vec::with_capacity(k);
    for row in incidence.rows() {
        present.clear();
        present.extend(row.iter().enumerate().filter(|(_, &x)| x == 1).map(|(i, _)| i));
        for &i in &present {
            for &j in &present {
                counts[(i, j)] += 1;
            }
        }
    }
    Ok(MomentEstimate::from_counts(m, counts, estimator))
}

/// Restriction of an estimate to the edges in `idx` (strictly increasing).
pub fn marginal_subvector(est: &MomentEstimate, idx: &[usize]) -> Result<MomentEstimate> {
    check_indices(idx, est.dim())?;
    let counts = DMatrix::from_fn(idx.len(), idx.len(), |r, c| est.counts[(idx[r], idx[c])]);
    Ok(MomentEstimate::from_counts(est.m, counts, est.estimator))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `sigma_ii` outside `[0, 1/4]`.
    DiagonalRange,
    /// `|sigma_ij| > 1/4`.
    OffDiagonalRange,
    /// `sigma_ij^2 > sigma_ii sigma_jj`.
    CauchySchwarz,
    /// An eigenvalue below `-1e-9`.
    NegativeEigenvalue,
    /// Eigenvalue sum above `k/4`.
    TraceBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub indices: Vec<usize>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

/// Checks every bound a multivariate Bernoulli covariance must satisfy.
pub fn validate_covariance(sigma: &CovMatrix) -> Diagnostic {
    let k = sigma.dim();
    let mut violations = Vec::new();
    for i in 0..k {
        let d = sigma.get(i, i);
        if d < -BOUND_TOL {
            violations.push(Violation {
                kind: ViolationKind::DiagonalRange,
                indices: vec![i],
                value: d,
                bound: 0.0,
            });
        } else if d > 0.25 + BOUND_TOL {
            violations.push(Violation {
                kind: ViolationKind::DiagonalRange,
                indices: vec![i],
                value: d,
                bound: 0.25,
            });
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            let s = sigma.get(i, j);
            if s.abs() > 0.25 + BOUND_TOL {
                violations.push(Violation {
                    kind: ViolationKind::OffDiagonalRange,
                    indices: vec![i, j],
                    value: s,
                    bound: 0.25,
                });
            }
            let bound = (sigma.get(i, i).max(0.0) * sigma.get(j, j).max(0.0)).sqrt();
            if s.abs() > bound + BOUND_TOL {
                violations.push(Violation {
                    kind: ViolationKind::CauchySchwarz,
                    indices: vec![i, j],
                    value: s,
                    bound,
                });
            }
        }
    }
    let eig = sigma.eigenvalues();
    for (i, &l) in eig.iter().enumerate() {
        if l < -EIGEN_CLAMP {
            violations.push(Violation {
                kind: ViolationKind::NegativeEigenvalue,
                indices: vec![i],
                value: l,
                bound: 0.0,
            });
        }
    }
    let total: f64 = eig.iter().sum();
    let cap = k as f64 / 4.0;
    if total > cap + BOUND_TOL {
        violations.push(Violation {
            kind: ViolationKind::TraceBound,
            indices: Vec::new(),
            value: total,
            bound: cap,
        });
    }
    Diagnostic {
        valid: violations.is_empty(),
        violations,
    }
}

/// Outcome of a block-independence check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockIndependence {
    pub independent: bool,
    pub max_abs_cross: f64,
}

/// Two groups of edges are independent iff their cross-covariance
/// block vanishes (here: every entry within `1e-9`).
pub fn block_independence(
    sigma: &CovMatrix,
    left: &[usize],
    right: &[usize],
) -> Result<BlockIndependence> {
    let k = sigma.dim();
    if left.is_empty() || right.is_empty() {
        return Err(Error::InvalidIndex("both index sets must be non-empty".into()));
    }
    for &i in left.iter().chain(right) {
        if i >= k {
            return Err(Error::InvalidIndex(format!("index {i} out of range for dimension {k}")));
        }
    }
    if let Some(shared) = left.iter().find(|i| right.contains(i)) {
        return Err(Error::InvalidIndex(format!("index {shared} appears in both sets")));
    }
    let max_abs_cross = left
        .iter()
        .flat_map(|&i| right.iter().map(move |&j| sigma.get(i, j).abs()))
        .fold(0.0, f64::max);
    Ok(BlockIndependence {
        independent: max_abs_cross <= BOUND_TOL,
        max_abs_cross,
    })
}
