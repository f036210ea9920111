use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use netvar::bernoulli::validate_covariance;
use netvar::montecarlo::{self, McConfig};
use netvar::variability::{self, classify_entropy, RankPolicy, StatKind};
use netvar::{asymptotic, CovMatrix, Estimator, Method, MomentEstimate, SampleSet};

use crate::report::{Bounds, InputSummary, Moments, Report, Source, TestEntry};

pub struct Options {
    pub samples: Option<PathBuf>,
    pub cov: Option<PathBuf>,
    pub m: Option<usize>,
    pub directed: bool,
    pub rank_policy: RankPolicy,
    pub estimator: Estimator,
    pub force: bool,
}

enum Input {
    Samples { set: SampleSet, est: Box<MomentEstimate> },
    Cov { sigma: CovMatrix },
}

impl Input {
    fn sigma(&self) -> &CovMatrix {
        match self {
            Input::Samples { est, .. } => est.sigma_hat(),
            Input::Cov { sigma } => sigma,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn located(path: &Path, e: netvar::Error) -> anyhow::Error {
    match e {
        netvar::Error::Parse { line, message } => anyhow!("{}:{line}: {message}", path.display()),
        other => anyhow!("{}: {other}", path.display()),
    }
}

fn load(opts: &Options) -> Result<(Input, InputSummary, Vec<String>)> {
    let mut warnings = Vec::new();
    if let Some(path) = &opts.samples {
        let set = netvar::parse_sample_set(&read(path)?, opts.directed).map_err(|e| located(path, e))?;
        let est = netvar::estimate_moments_with(set.incidence(), opts.estimator)
            .map_err(|e| located(path, e))?;
        let summary = InputSummary {
            source: Source::Samples,
            path: path.display().to_string(),
            m: Some(set.samples()),
            k: set.dim(),
            nodes: Some(set.nodes().labels().to_vec()),
            directed: opts.directed,
            estimator: opts.estimator,
            rank_policy: opts.rank_policy,
        };
        return Ok((Input::Samples { set, est: Box::new(est) }, summary, warnings));
    }
    let path = opts.cov.as_ref().expect("clap requires --samples or --cov");
    let sigma = CovMatrix::from_csv(&read(path)?).map_err(|e| located(path, e))?;
    if opts.m == Some(0) {
        bail!("--m must be at least 1");
    }
    if opts.estimator != Estimator::Plugin {
        warnings.push("--estimator only affects sample-set input; the covariance CSV is used as given".into());
    }
    let summary = InputSummary {
        source: Source::Covariance,
        path: path.display().to_string(),
        m: opts.m,
        k: sigma.dim(),
        nodes: None,
        directed: false,
        estimator: opts.estimator,
        rank_policy: opts.rank_policy,
    };
    Ok((Input::Cov { sigma }, summary, warnings))
}

/// Loads the input and checks the covariance against the Bernoulli bounds.
/// Violations are errors unless `--force` turns them into warnings.
fn start(command: &str, opts: &Options) -> Result<(Input, Report)> {
    let (input, summary, warnings) = load(opts)?;
    let mut report = Report::new(command, summary);
    report.warnings = warnings;
    let diag = validate_covariance(input.sigma());
    for v in &diag.violations {
        let msg = format!(
            "covariance violates {:?} at {:?}: {} against bound {}",
            v.kind, v.indices, v.value, v.bound
        );
        if opts.force {
            report.warnings.push(msg);
        } else {
            report.errors.push(msg);
        }
    }
    let clamped = input.sigma().clamped_eigenvalues();
    if clamped > 0 {
        report
            .warnings
            .push(format!("{clamped} eigenvalue(s) in [-1e-9, 0) clamped to 0"));
    }
    Ok((input, report))
}

fn require_m(report: &Report) -> Result<usize> {
    report
        .input
        .m
        .ok_or_else(|| anyhow!("--m is required with --cov for `{}`", report.command))
}

fn require_samples(command: &str, opts: &Options) -> Result<()> {
    if opts.cov.is_some() {
        bail!("`{command}` needs the raw structures; pass --samples instead of --cov");
    }
    Ok(())
}

fn add_statistics(report: &mut Report, sigma: &CovMatrix, policy: RankPolicy) {
    let k = sigma.dim();
    for kind in StatKind::ALL {
        match variability::statistic(sigma, kind, policy) {
            Ok(v) => {
                if v.rank_deficient {
                    report.warnings.push(match policy {
                        RankPolicy::Reduce => format!(
                            "covariance is rank deficient; generalized variance taken over {} of {k} coordinates",
                            v.k_effective
                        ),
                        RankPolicy::Strict => "covariance is rank deficient; generalized variance is 0".into(),
                    });
                }
                report.statistics.push(v);
            }
            Err(e) => report.errors.push(format!("{kind}: {e}")),
        }
    }
    if let Ok((min, max)) = variability::frobenius_bounds(k) {
        report.frobenius_bounds = Some(Bounds { min, max });
    }
}

pub fn moments(opts: &Options, cov_out: Option<&Path>) -> Result<Report> {
    require_samples("moments", opts)?;
    let (input, mut report) = start("moments", opts)?;
    let Input::Samples { set, est } = &input else {
        unreachable!("sample set checked above")
    };
    let k = est.dim();
    let sigma = est.sigma_hat();
    let rows = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
        (0..k).map(|i| (0..k).map(|j| f(i, j)).collect()).collect()
    };
    report.moments = Some(Moments {
        edges: (0..k)
            .map(|j| {
                let (a, b) = set.nodes().edge_labels(j).expect("column within edge range");
                [a.to_string(), b.to_string()]
            })
            .collect(),
        p_hat: est.p_hat().to_vec(),
        p_joint: rows(&|i, j| est.p_hat2()[(i, j)]),
        sigma: rows(&|i, j| sigma.get(i, j)),
        eigenvalues: sigma.eigenvalues().to_vec(),
        diagnostic: validate_covariance(sigma),
    });
    report.entropy = Some(classify_entropy(set.incidence()));
    if let Some(path) = cov_out {
        std::fs::write(path, sigma.to_csv()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(report)
}

pub fn stats(opts: &Options) -> Result<Report> {
    let (input, mut report) = start("stats", opts)?;
    if report.errors.is_empty() {
        add_statistics(&mut report, input.sigma(), opts.rank_policy);
    }
    Ok(report)
}

pub fn test(opts: &Options, methods: &[Method], adjusted: bool) -> Result<Report> {
    let (input, mut report) = start("test", opts)?;
    let m = require_m(&report)?;
    if !report.errors.is_empty() {
        return Ok(report);
    }
    for &method in methods {
        match asymptotic::run_test(method, input.sigma(), m) {
            Ok(r) => {
                if r.clamped {
                    report
                        .warnings
                        .push(format!("{method}: adjusted significance clamped to [0, 1]"));
                }
                report.tests.push(TestEntry {
                    method,
                    p_value: Some(r.p_value(adjusted)),
                    result: Some(r),
                    error: None,
                });
            }
            Err(e) => {
                report.errors.push(format!("{method}: {e}"));
                report.tests.push(TestEntry {
                    method,
                    p_value: None,
                    result: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    Ok(report)
}

fn worker_threads() -> Result<Option<usize>> {
    match std::env::var("NETVAR_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => bail!("NETVAR_THREADS must be a positive integer, got `{v}`"),
        },
        Err(_) => Ok(None),
    }
}

pub fn mc(opts: &Options, stats: &[StatKind], replicates: usize, seed: u64) -> Result<Report> {
    if replicates < 1 {
        bail!("--replicates must be at least 1");
    }
    let threads = worker_threads()?;
    let (input, mut report) = start("mc", opts)?;
    let m = require_m(&report)?;
    if !report.errors.is_empty() {
        return Ok(report);
    }
    let sigma = input.sigma();
    for &stat in stats {
        let mut cfg = McConfig::new(stat, m, sigma.dim(), replicates, seed);
        cfg.threads = threads;
        match montecarlo::mc_pvalue(sigma, &cfg) {
            Ok(e) => {
                if e.below_resolution {
                    report.warnings.push(format!(
                        "{stat}: no replicate reached the observed statistic; p < 1/{replicates}"
                    ));
                }
                report.mc.push(e);
            }
            Err(e) => report.errors.push(format!("{stat}: {e}")),
        }
    }
    Ok(report)
}

pub fn classify(opts: &Options) -> Result<Report> {
    require_samples("classify", opts)?;
    let (input, mut report) = start("classify", opts)?;
    let Input::Samples { set, .. } = &input else {
        unreachable!("sample set checked above")
    };
    report.entropy = Some(classify_entropy(set.incidence()));
    if report.errors.is_empty() {
        add_statistics(&mut report, input.sigma(), opts.rank_policy);
    }
    Ok(report)
}
