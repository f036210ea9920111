//! Descriptive variability statistics of a Bernoulli covariance matrix.
//!
//! Three scalar summaries are provided:
//!
//! * total variance `tr(Σ)`, bounded by `[0, k/4]`;
//! * generalized variance `det(Σ)`, bounded by `[0, 4^-k]`;
//! * squared Frobenius distance `||Σ - (k/4) I||²`, bounded by
//!   `[k(k-1)²/16, k³/16]`.
//!
//! Each is mapped onto `[0, 1]` so that larger normalized values mean a more
//! variable structure; the complement `1 - normalized` measures the distance
//! from the maximum-entropy case `Σ = I/4`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bernoulli::{CovMatrix, BOUND_TOL};
use crate::error::{Error, Result};
use crate::graph::Incidence;

/// Residual variances at or below this are treated as zero when reducing a
/// rank-deficient matrix.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatKind {
    Total,
    Generalized,
    Frobenius,
}

impl StatKind {
    pub const ALL: [StatKind; 3] = [StatKind::Total, StatKind::Generalized, StatKind::Frobenius];

    pub fn name(self) -> &'static str {
        match self {
            StatKind::Total => "total",
            StatKind::Generalized => "generalized",
            StatKind::Frobenius => "frobenius",
        }
    }
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How to treat a rank-deficient matrix in the generalized variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankPolicy {
    /// Plain determinant over all `k` coordinates.
    Strict,
    /// Determinant of a full-rank principal submatrix: constant edges and
    /// collinear coordinates are dropped.
    #[default]
    Reduce,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedVariance {
    pub value: f64,
    pub rank_deficient: bool,
    pub k_effective: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatValue {
    pub kind: StatKind,
    pub raw: f64,
    pub normalized: f64,
    pub complemented: f64,
    pub rank_deficient: bool,
    pub k_effective: usize,
}

pub fn var_total(sigma: &CovMatrix) -> f64 {
    sigma.trace()
}

pub fn var_generalized(sigma: &CovMatrix, policy: RankPolicy) -> GeneralizedVariance {
    let k = sigma.dim();
    match policy {
        RankPolicy::Strict => GeneralizedVariance {
            value: sigma.determinant(),
            rank_deficient: false,
            k_effective: k,
        },
        RankPolicy::Reduce => {
            let (value, k_effective) = full_rank_determinant(sigma);
            GeneralizedVariance {
                value,
                rank_deficient: k_effective < k,
                k_effective,
            }
        }
    }
}

/// Determinant of a full-rank principal submatrix picked by greedy
/// diagonal pivoting (pivoted Cholesky). Constant edges are never picked;
/// the selected coordinates form a Bernoulli subvector, so the result stays
/// within `[0, 4^-k_effective]`.
fn full_rank_determinant(sigma: &CovMatrix) -> (f64, usize) {
    let k = sigma.dim();
    let mut a = sigma.entries().clone();
    let mut free: Vec<usize> = (0..k).collect();
    let mut det = 1.0;
    let mut rank = 0;
    while !free.is_empty() {
        let (pos, &p) = free
            .iter()
            .enumerate()
            .max_by(|x, y| a[(*x.1, *x.1)].total_cmp(&a[(*y.1, *y.1)]).then(y.1.cmp(x.1)))
            .expect("non-empty");
        let pivot = a[(p, p)];
        if pivot <= RANK_TOL {
            break;
        }
        det *= pivot;
        rank += 1;
        free.swap_remove(pos);
        for &i in &free {
            for &j in &free {
                a[(i, j)] -= a[(i, p)] * a[(p, j)] / pivot;
            }
        }
    }
    if rank == 0 {
        // Every edge is constant: nothing varies.
        return (0.0, 0);
    }
    (det, rank)
}

/// `Σ (λ_i - k/4)²`.
pub fn var_frobenius(sigma: &CovMatrix) -> f64 {
    let shift = sigma.dim() as f64 / 4.0;
    sigma.eigenvalues().iter().map(|l| (l - shift).powi(2)).sum()
}

/// Range of the squared Frobenius statistic over all valid covariances:
/// `(k(k-1)²/16, k³/16)`, attained at `I/4` and at the zero matrix.
pub fn frobenius_bounds(k: usize) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let k = k as f64;
    Ok((k * (k - 1.0).powi(2) / 16.0, k.powi(3) / 16.0))
}

fn bounds(kind: StatKind, k: usize) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    Ok(match kind {
        StatKind::Total => (0.0, k as f64 / 4.0),
        StatKind::Generalized => (0.0, 4f64.powi(-(k as i32))),
        StatKind::Frobenius => frobenius_bounds(k)?,
    })
}

/// Maps a raw statistic onto `[0, 1]`, high meaning high variability.
/// Values within `1e-9` outside the theoretical range are clamped.
pub fn normalize(kind: StatKind, raw: f64, k: usize) -> Result<f64> {
    let (lo, hi) = bounds(kind, k)?;
    if !(raw >= lo - BOUND_TOL && raw <= hi + BOUND_TOL) {
        return Err(Error::OutOfBounds {
            kind: kind.name(),
            value: raw,
            lo,
            hi,
        });
    }
    let raw = raw.clamp(lo, hi);
    let kf = k as f64;
    let v = match kind {
        StatKind::Total => 4.0 * raw / kf,
        StatKind::Generalized => 4f64.powi(k as i32) * raw,
        StatKind::Frobenius => (kf.powi(3) - 16.0 * raw) / (kf * (2.0 * kf - 1.0)),
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Raw, normalized and complemented value of one statistic.
pub fn statistic(sigma: &CovMatrix, kind: StatKind, policy: RankPolicy) -> Result<StatValue> {
    let k = sigma.dim();
    let (raw, rank_deficient, k_effective) = match kind {
        StatKind::Total => (var_total(sigma), false, k),
        StatKind::Frobenius => (var_frobenius(sigma), false, k),
        StatKind::Generalized => {
            let g = var_generalized(sigma, policy);
            (g.value, g.rank_deficient, g.k_effective)
        }
    };
    let normalized = if kind == StatKind::Generalized && k_effective == 0 {
        0.0
    } else {
        normalize(kind, raw, k_effective)?
    };
    Ok(StatValue {
        kind,
        raw,
        normalized,
        complemented: 1.0 - normalized,
        rank_deficient,
        k_effective,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entropy {
    /// Every sampled structure is identical.
    Minimum,
    /// Several distinct structures were observed.
    Intermediate,
}

/// One distinct structure and how often it was observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureFrequency {
    pub edges: Vec<u8>,
    pub count: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyClass {
    pub entropy: Entropy,
    /// Distinct structures, most frequent first, ties in first-seen order.
    pub structures: Vec<StructureFrequency>,
}

/// Minimum or intermediate entropy, with the structure frequency table.
///
/// The maximum-entropy case is a property of the population and is never
/// reported from a finite sample.
pub fn classify_entropy(incidence: &Incidence) -> EntropyClass {
    let m = incidence.samples();
    let mut counts: BTreeMap<&[u8], (usize, usize)> = BTreeMap::new();
    for (order, row) in incidence.rows().enumerate() {
        counts.entry(row).or_insert((0, order)).0 += 1;
    }
    let mut structures: Vec<(usize, StructureFrequency)> = counts
        .into_iter()
        .map(|(row, (count, first))| {
            (
                first,
                StructureFrequency {
                    edges: row.to_vec(),
                    count,
                    frequency: count as f64 / m as f64,
                },
            )
        })
        .collect();
    structures.sort_by(|a, b| b.1.count.cmp(&a.1.count).then(a.0.cmp(&b.0)));
    let structures: Vec<StructureFrequency> = structures.into_iter().map(|(_, s)| s).collect();
    EntropyClass {
        entropy: if structures.len() == 1 {
            Entropy::Minimum
        } else {
            Entropy::Intermediate
        },
        structures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn from(rows: &[[f64; 2]; 2], scale: f64) -> CovMatrix {
        let r: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x / scale).collect()).collect();
        CovMatrix::from_rows(&r).unwrap()
    }

    fn sigmas() -> [CovMatrix; 3] {
        [
            from(&[[6.0, 1.0], [1.0, 6.0]], 25.0),
            from(&[[66.0, -21.0], [-21.0, 126.0]], 625.0),
            from(&[[66.0, 91.0], [91.0, 126.0]], 625.0),
        ]
    }

    #[test]
    fn raw_statistics() {
        let [s1, s2, s3] = sigmas();
        assert_abs_diff_eq!(var_total(&s1), 0.48, epsilon = 1e-15);
        assert_abs_diff_eq!(var_total(&s2), 0.3072, epsilon = 1e-15);
        assert_eq!(var_total(&CovMatrix::zeros(3)), 0.0);
        assert_abs_diff_eq!(var_generalized(&s1, RankPolicy::Strict).value, 0.056, epsilon = 1e-15);
        assert_abs_diff_eq!(var_generalized(&s3, RankPolicy::Strict).value, 8.96e-5, epsilon = 1e-14);
        assert_abs_diff_eq!(var_frobenius(&s1), 0.1384, epsilon = 1e-14);
        assert!((var_frobenius(&s2) - 0.2468).abs() < 1e-4);
        assert_eq!(var_frobenius(&CovMatrix::zeros(2)), 0.5);
    }

    #[test]
    fn reduce_drops_constant_edges() {
        let m = CovMatrix::scaled_identity(3, 0.25).block_diag(&CovMatrix::zeros(1));
        let g = var_generalized(&m, RankPolicy::Reduce);
        assert_abs_diff_eq!(g.value, 4f64.powi(-3), epsilon = 1e-18);
        assert_eq!(g.k_effective, 3);
        assert!(g.rank_deficient);
        assert_eq!(var_generalized(&m, RankPolicy::Strict).value, 0.0);
        let full = var_generalized(&CovMatrix::scaled_identity(3, 0.25), RankPolicy::Reduce);
        assert!(!full.rank_deficient);
    }

    #[test]
    fn reduce_falls_back_to_spectral_truncation() {
        // Two perfectly correlated edges: no constant coordinate, rank one.
        let m = CovMatrix::from_rows(&[[0.25, 0.25], [0.25, 0.25]]).unwrap();
        let g = var_generalized(&m, RankPolicy::Reduce);
        assert_eq!(g.k_effective, 1);
        assert_abs_diff_eq!(g.value, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(
            statistic(&m, StatKind::Generalized, RankPolicy::Reduce).unwrap().normalized,
            1.0,
            epsilon = 1e-15
        );
        assert!(g.rank_deficient);
    }

    #[test]
    fn bounds_table() {
        assert_eq!(frobenius_bounds(2).unwrap(), (0.125, 0.5));
        assert_eq!(frobenius_bounds(1).unwrap(), (0.0, 1.0 / 16.0));
        assert_eq!(frobenius_bounds(3).unwrap(), (0.75, 1.6875));
        assert!(frobenius_bounds(0).is_err());
    }

    #[test]
    fn normalization_examples() {
        assert_abs_diff_eq!(normalize(StatKind::Total, 0.48, 2).unwrap(), 0.96, epsilon = 1e-15);
        assert_abs_diff_eq!(
            normalize(StatKind::Generalized, 0.056, 2).unwrap(),
            0.896,
            epsilon = 1e-15
        );
        assert!((normalize(StatKind::Frobenius, 0.1384, 2).unwrap() - 0.9642).abs() < 1e-4);
        assert!(normalize(StatKind::Total, 0.6, 2).is_err());
        assert_eq!(normalize(StatKind::Total, 0.5 + 1e-10, 2).unwrap(), 1.0);
        assert!(normalize(StatKind::Frobenius, 0.1, 2).is_err());
    }

    #[test]
    fn extremes() {
        for k in 1..6 {
            let zero = CovMatrix::zeros(k);
            let maxent = CovMatrix::scaled_identity(k, 0.25);
            for policy in [RankPolicy::Strict, RankPolicy::Reduce] {
                let n = |m: &CovMatrix, kind| statistic(m, kind, policy).unwrap().normalized;
                assert_eq!(n(&zero, StatKind::Total), 0.0);
                assert_eq!(n(&zero, StatKind::Generalized), 0.0);
                assert_eq!(n(&zero, StatKind::Frobenius), 0.0);
                assert_eq!(n(&maxent, StatKind::Total), 1.0);
                assert_eq!(n(&maxent, StatKind::Generalized), 1.0);
                assert_eq!(n(&maxent, StatKind::Frobenius), 1.0);
            }
        }
    }

    #[test]
    fn complement_is_exact() {
        for s in sigmas() {
            for kind in StatKind::ALL {
                let v = statistic(&s, kind, RankPolicy::Strict).unwrap();
                assert_eq!(v.complemented, 1.0 - v.normalized);
            }
        }
    }

    #[test]
    fn entropy_classes() {
        let c = classify_entropy(&Incidence::from_bit_strings(&["10", "10", "10"]).unwrap());
        assert_eq!(c.entropy, Entropy::Minimum);
        assert_eq!(c.structures.len(), 1);
        assert_eq!(c.structures[0].count, 3);

        let c = classify_entropy(&Incidence::from_bit_strings(&["11", "10", "10"]).unwrap());
        assert_eq!(c.entropy, Entropy::Intermediate);
        assert_eq!(c.structures[0].edges, vec![1, 0]);
        assert_eq!(c.structures[0].count, 2);
        assert_eq!(c.structures[1].edges, vec![1, 1]);
        assert_eq!(c.structures[1].count, 1);

        let c = classify_entropy(&Incidence::from_bit_strings(&["00", "01", "10", "11"]).unwrap());
        assert_eq!(c.entropy, Entropy::Intermediate);
        assert!(c.structures.iter().all(|s| s.frequency == 0.25));
    }
}
