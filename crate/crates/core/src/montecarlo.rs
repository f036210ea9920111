//! Monte Carlo significance under the maximum-entropy null.
//!
//! Under `Σ = I/4` the edges are independent `Ber(1/2)` variables, so null
//! covariance matrices are cheap to simulate: draw `m` rows of `k` fair
//! bits, form the plug-in covariance, and evaluate the distance statistic.
//! The significance value is the fraction of replicates at least as far from
//! the null as the observation.
//!
//! Replicate `r` draws from ChaCha8 stream `r` under the configured seed, so
//! the result is a pure function of `(seed, R)` regardless of how the
//! replicates are spread across worker threads.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotic::frobenius_quarter_max;
use crate::bernoulli::CovMatrix;
use crate::error::{Error, Result};
use crate::variability::StatKind;

/// Replicate statistics within this fraction of the statistic's range of the
/// observed value count as ties, and ties count as exceedances.
pub const TIE_RTOL: f64 = 1e-12;

const BATCH: usize = 4096;

/// Estimator used to turn the exceedance count into a significance value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueRule {
    /// `count / R`.
    #[default]
    Proportion,
    /// `(count + 1) / (R + 1)`; never zero.
    AddOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub replicates: usize,
    /// Sample size per replicate.
    pub m: usize,
    /// Dimension of the observed matrix.
    pub k: usize,
    pub seed: u64,
    pub stat: StatKind,
    pub rule: PValueRule,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(stat: StatKind, m: usize, k: usize, replicates: usize, seed: u64) -> Self {
        McConfig {
            replicates,
            m,
            k,
            seed,
            stat,
            rule: PValueRule::Proportion,
            threads: None,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_rule(mut self, rule: PValueRule) -> Self {
        self.rule = rule;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::domain("replicate count R must be at least 1"));
        }
        if self.m == 0 {
            return Err(Error::domain("sample size m must be at least 1"));
        }
        if self.k == 0 {
            return Err(Error::domain("dimension k must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::domain("thread count must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub stat: StatKind,
    pub p_value: f64,
    pub replicates: usize,
    /// Replicates with a statistic at least as large as the observed one.
    pub exceedances: u64,
    /// `sqrt(p (1 - p) / R)`.
    pub stderr: f64,
    pub seed: u64,
    pub m: usize,
    pub observed_statistic: f64,
    /// No replicate reached the observed statistic: read `p = 0` as `p < 1/R`.
    pub below_resolution: bool,
}

/// Distance from the maximum-entropy case on the spectrum of `Σ`:
/// `k/4 - Σλ` (total), `4^-k - Πλ` (generalized), `Σ (λ - 1/4)²`
/// (frobenius). Zero at `Σ = I/4`, larger further away.
pub fn distance_statistic(stat: StatKind, eigenvalues: &[f64]) -> f64 {
    let k = eigenvalues.len();
    match stat {
        StatKind::Total => k as f64 / 4.0 - eigenvalues.iter().sum::<f64>(),
        StatKind::Generalized => 4f64.powi(-(k as i32)) - eigenvalues.iter().product::<f64>(),
        StatKind::Frobenius => eigenvalues.iter().map(|l| (l - 0.25).powi(2)).sum(),
    }
}

fn statistic_scale(stat: StatKind, k: usize) -> f64 {
    match stat {
        StatKind::Total => k as f64 / 4.0,
        StatKind::Generalized => 4f64.powi(-(k as i32)),
        StatKind::Frobenius => frobenius_quarter_max(k),
    }
}

/// Plug-in covariance of `m` rows of `k` independent fair bits.
pub fn null_covariance<R: RngCore>(m: usize, k: usize, rng: &mut R) -> CovMatrix {
    let mut counts = vec![0u64; k * k];
    let mut present = Vec::with_capacity(k);
    let mut word = 0u64;
    let mut left = 0u32;
    for _ in 0..m {
        present.clear();
        for j in 0..k {
            if left == 0 {
                word = rng.next_u64();
                left = 64;
            }
            if word & 1 == 1 {
                present.push(j);
            }
            word >>= 1;
            left -= 1;
        }
        for &a in &present {
            for &b in &present {
                counts[a * k + b] += 1;
            }
        }
    }
    let mm = (m * m) as f64;
    let entries = nalgebra::DMatrix::from_fn(k, k, |i, j| {
        let num = m as i128 * counts[i * k + j] as i128
            - counts[i * k + i] as i128 * counts[j * k + j] as i128;
        num as f64 / mm
    });
    CovMatrix::new(entries).expect("co-occurrence counts are symmetric")
}

/// One draw of the distance statistic under the null.
pub fn null_statistic<R: RngCore>(stat: StatKind, m: usize, k: usize, rng: &mut R) -> f64 {
    distance_statistic(stat, null_covariance(m, k, rng).eigenvalues())
}

fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Null statistic of replicate `r` for the given configuration.
pub fn replicate_statistic(cfg: &McConfig, replicate: usize) -> f64 {
    null_statistic(cfg.stat, cfg.m, cfg.k, &mut replicate_rng(cfg.seed, replicate))
}

fn count_exceedances(cfg: &McConfig, threshold: f64) -> u64 {
    let batches = cfg.replicates.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let end = ((b + 1) * BATCH).min(cfg.replicates);
            (b * BATCH..end)
                .filter(|&r| replicate_statistic(cfg, r) >= threshold)
                .count() as u64
        })
        .sum()
}

/// Monte Carlo significance of `observed` against the maximum-entropy null.
pub fn mc_pvalue(observed: &CovMatrix, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    if observed.dim() != cfg.k {
        return Err(Error::DimensionMismatch {
            expected: cfg.k,
            found: observed.dim(),
        });
    }
    let t0 = distance_statistic(cfg.stat, observed.eigenvalues());
    let threshold = t0 - TIE_RTOL * statistic_scale(cfg.stat, cfg.k);

    let exceedances = match cfg.threads {
        None => count_exceedances(cfg, threshold),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?
            .install(|| count_exceedances(cfg, threshold)),
    };

    let r = cfg.replicates as f64;
    let p_value = match cfg.rule {
        PValueRule::Proportion => exceedances as f64 / r,
        PValueRule::AddOne => (exceedances as f64 + 1.0) / (r + 1.0),
    };
    let frac = exceedances as f64 / r;
    Ok(McEstimate {
        stat: cfg.stat,
        p_value,
        replicates: cfg.replicates,
        exceedances,
        stderr: (frac * (1.0 - frac) / r).sqrt(),
        seed: cfg.seed,
        m: cfg.m,
        observed_statistic: t0,
        below_resolution: exceedances == 0,
    })
}
