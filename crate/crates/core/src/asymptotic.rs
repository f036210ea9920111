//! Asymptotic tests of the maximum-entropy hypothesis `Σ = I/4`.
//!
//! | method | statistic                          | reference              | tail  |
//! |--------|------------------------------------|------------------------|-------|
//! | `tt`   | `4m tr(Σ)`                         | `χ²(mk)`               | lower |
//! | `tg1`  | `√m (4^k det Σ - 1)`               | `N(0, 2k)`             | lower |
//! | `tg2`  | `(mk/2) (4^k det Σ)^(1/k)`         | `Gamma(k(m+1-k)/2, 1)` | lower |
//! | `tn`   | `(m/2) tr((4Σ - I)²)`              | `χ²(k(k+1)/2)`         | upper |
//!
//! Each test also reports a finite-sample correction: the significance
//! conditioned on the statistic lying in the range it can actually attain
//! over valid Bernoulli covariances.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bernoulli::CovMatrix;
use crate::error::{Error, Result};
use crate::special;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Total variance, chi-square reference.
    #[serde(rename = "tt")]
    Total,
    /// Generalized variance, Gaussian reference.
    #[serde(rename = "tg1")]
    GeneralizedGaussian,
    /// Generalized variance, gamma reference.
    #[serde(rename = "tg2")]
    GeneralizedGamma,
    /// Nagao's test on the squared Frobenius distance from `I/4`.
    #[serde(rename = "tn")]
    Nagao,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Total,
        Method::GeneralizedGaussian,
        Method::GeneralizedGamma,
        Method::Nagao,
    ];

    /// Short name as used on the command line.
    pub fn code(self) -> &'static str {
        match self {
            Method::Total => "tt",
            Method::GeneralizedGaussian => "tg1",
            Method::GeneralizedGamma => "tg2",
            Method::Nagao => "tn",
        }
    }

    pub fn from_code(code: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.code() == code)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Reference distribution of a test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Reference {
    ChiSquare { df: f64 },
    Normal { mean: f64, variance: f64 },
    Gamma { shape: f64, rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub reference: Reference,
    pub p_raw: f64,
    pub p_adjusted: f64,
    /// The corrected value fell marginally outside `[0, 1]` and was clamped.
    pub clamped: bool,
    pub m: usize,
    pub k: usize,
}

impl TestResult {
    /// Raw or finite-sample corrected significance.
    pub fn p_value(&self, adjusted: bool) -> f64 {
        if adjusted {
            self.p_adjusted
        } else {
            self.p_raw
        }
    }
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::domain("sample count m must be at least 1"))
    } else {
        Ok(())
    }
}

fn clamp_unit(p: f64) -> (f64, bool) {
    if p.is_nan() || p > 1.0 {
        (1.0, true)
    } else if p < 0.0 {
        (0.0, true)
    } else {
        (p, false)
    }
}

/// `4^k det Σ`, floored at zero.
fn det_ratio(sigma: &CovMatrix) -> f64 {
    (4f64.powi(sigma.dim() as i32) * sigma.determinant()).max(0.0)
}

/// Total-variance test, `t_T = 4m tr(Σ) ~ χ²(mk)`, lower tail. The
/// correction conditions on `t_T <= mk`.
pub fn test_total(sigma: &CovMatrix, m: usize) -> Result<TestResult> {
    check_m(m)?;
    let k = sigma.dim();
    let df = (m * k) as f64;
    let statistic = 4.0 * m as f64 * sigma.trace();
    let ln_raw = special::ln_reg_lower_gamma(df / 2.0, statistic.max(0.0) / 2.0)?;
    let ln_norm = special::ln_reg_lower_gamma(df / 2.0, df / 2.0)?;
    let (p_adjusted, clamped) = clamp_unit((ln_raw - ln_norm).exp());
    Ok(TestResult {
        method: Method::Total,
        statistic,
        reference: Reference::ChiSquare { df },
        p_raw: ln_raw.exp(),
        p_adjusted,
        clamped,
        m,
        k,
    })
}

/// Generalized-variance test with a Gaussian reference,
/// `t_G1 = √m (det Σ / det(I/4) - 1) ~ N(0, 2k)`, lower tail. The correction
/// conditions on `t_G1 ∈ [-√m, 0]`.
pub fn test_gen_gaussian(sigma: &CovMatrix, m: usize) -> Result<TestResult> {
    check_m(m)?;
    let k = sigma.dim();
    let sd = (2.0 * k as f64).sqrt();
    let root_m = (m as f64).sqrt();
    let statistic = root_m * (det_ratio(sigma) - 1.0);
    let p_raw = special::std_normal_cdf(statistic / sd)?;
    let floor = special::std_normal_cdf(-root_m / sd)?;
    let (p_adjusted, clamped) = clamp_unit((p_raw - floor) / (0.5 - floor));
    Ok(TestResult {
        method: Method::GeneralizedGaussian,
        statistic,
        reference: Reference::Normal {
            mean: 0.0,
            variance: 2.0 * k as f64,
        },
        p_raw,
        p_adjusted,
        clamped,
        m,
        k,
    })
}

/// Generalized-variance test with a gamma reference,
/// `t_G2 = (mk/2) (det Σ / det(I/4))^(1/k) ~ Gamma(k(m+1-k)/2, 1)`, lower
/// tail. The correction conditions on `t_G2 <= mk/2`. Needs `m + 1 > k`.
pub fn test_gen_gamma(sigma: &CovMatrix, m: usize) -> Result<TestResult> {
    check_m(m)?;
    let k = sigma.dim();
    if m < k {
        return Err(Error::GammaShape { m, k });
    }
    let shape = (k * (m + 1 - k)) as f64 / 2.0;
    let half_mk = (m * k) as f64 / 2.0;
    let statistic = half_mk * det_ratio(sigma).powf(1.0 / k as f64);
    let ln_raw = special::ln_reg_lower_gamma(shape, statistic)?;
    let ln_norm = special::ln_reg_lower_gamma(shape, half_mk)?;
    let (p_adjusted, clamped) = clamp_unit((ln_raw - ln_norm).exp());
    Ok(TestResult {
        method: Method::GeneralizedGamma,
        statistic,
        reference: Reference::Gamma { shape, rate: 1.0 },
        p_raw: ln_raw.exp(),
        p_adjusted,
        clamped,
        m,
        k,
    })
}

/// Largest attainable `Σ (λ_i - 1/4)²` over valid covariances.
///
/// The objective is convex, so its maximum over the polytope
/// `{λ >= 0, Σλ <= k/4}` sits at a vertex: either the origin (`k/16`) or
/// `(k/4) e_i`, giving `((k-1)/4)² + (k-1)/16 = k(k-1)/16`.
pub fn frobenius_quarter_max(k: usize) -> f64 {
    let k = k as f64;
    k.max(k * (k - 1.0)) / 16.0
}

/// Nagao's statistic from the spectrum: `8m Σ (λ_i - 1/4)²`.
pub fn nagao_statistic(sigma: &CovMatrix, m: usize) -> f64 {
    let ss: f64 = sigma.eigenvalues().iter().map(|l| (l - 0.25).powi(2)).sum();
    8.0 * m as f64 * ss
}

/// Nagao's statistic from the entries: `(m/2) tr((4Σ - I)²)`.
pub fn nagao_statistic_entrywise(sigma: &CovMatrix, m: usize) -> f64 {
    let k = sigma.dim();
    let mut ss = 0.0;
    for i in 0..k {
        for j in 0..k {
            let d = 4.0 * sigma.get(i, j) - if i == j { 1.0 } else { 0.0 };
            ss += d * d;
        }
    }
    m as f64 / 2.0 * ss
}

/// Nagao's test, `t_N ~ χ²(k(k+1)/2)`, upper tail. The correction conditions
/// on `t_N <= t_N^max = 8m · max Σ(λ - 1/4)²`, which is `m` for `k = 2`.
pub fn test_nagao(sigma: &CovMatrix, m: usize) -> Result<TestResult> {
    check_m(m)?;
    let k = sigma.dim();
    let df = (k * (k + 1)) as f64 / 2.0;
    let statistic = nagao_statistic(sigma, m);
    let p_raw = special::chi_square_sf(statistic, df)?;
    let t_max = 8.0 * m as f64 * frobenius_quarter_max(k);
    let beyond = special::chi_square_sf(t_max, df)?;
    let within = special::chi_square_cdf(t_max, df)?;
    let (p_adjusted, clamped) = clamp_unit((p_raw - beyond) / within);
    Ok(TestResult {
        method: Method::Nagao,
        statistic,
        reference: Reference::ChiSquare { df },
        p_raw,
        p_adjusted,
        clamped,
        m,
        k,
    })
}

/// Runs one test by method.
pub fn run_test(method: Method, sigma: &CovMatrix, m: usize) -> Result<TestResult> {
    match method {
        Method::Total => test_total(sigma, m),
        Method::GeneralizedGaussian => test_gen_gaussian(sigma, m),
        Method::GeneralizedGamma => test_gen_gamma(sigma, m),
        Method::Nagao => test_nagao(sigma, m),
    }
}
