use std::fmt::Write as _;

use netvar::bernoulli::{Diagnostic, Estimator};
use netvar::variability::{EntropyClass, RankPolicy, StatValue};
use netvar::{McEstimate, Method, TestResult};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "netvar-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub input: InputSummary,
    pub moments: Option<Moments>,
    pub statistics: Vec<StatValue>,
    pub frobenius_bounds: Option<Bounds>,
    pub tests: Vec<TestEntry>,
    pub mc: Vec<McEstimate>,
    pub entropy: Option<EntropyClass>,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Samples,
    Covariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub source: Source,
    pub path: String,
    pub m: Option<usize>,
    pub k: usize,
    pub nodes: Option<Vec<String>>,
    pub directed: bool,
    pub estimator: Estimator,
    pub rank_policy: RankPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// Endpoint labels of each edge column.
    pub edges: Vec<[String; 2]>,
    pub p_hat: Vec<f64>,
    pub p_joint: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub diagnostic: Diagnostic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    pub method: Method,
    /// Raw or adjusted value, whichever was asked for.
    pub p_value: Option<f64>,
    pub result: Option<TestResult>,
    pub error: Option<String>,
}

impl Report {
    pub fn new(command: &str, input: InputSummary) -> Self {
        Report {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            input,
            moments: None,
            statistics: Vec::new(),
            frobenius_bounds: None,
            tests: Vec::new(),
            mc: Vec::new(),
            entropy: None,
            warnings: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let i = &self.input;
        let m = i.m.map_or("-".to_string(), |m| m.to_string());
        let _ = writeln!(out, "{} ({}): m = {m}, k = {}", i.path, source_name(i.source), i.k);

        if let Some(mo) = &self.moments {
            let _ = writeln!(out, "\nedge        p_hat");
            for (e, p) in mo.edges.iter().zip(&mo.p_hat) {
                let _ = writeln!(out, "{:<11} {}", format!("{}-{}", e[0], e[1]), sig7(*p));
            }
            let _ = writeln!(out, "\nsigma");
            for row in &mo.sigma {
                let cells: Vec<String> = row.iter().map(|&x| format!("{:>13}", sig7(x))).collect();
                let _ = writeln!(out, "{}", cells.join(" "));
            }
            let eig: Vec<String> = mo.eigenvalues.iter().map(|&x| sig7(x)).collect();
            let _ = writeln!(out, "\neigenvalues {}", eig.join(" "));
            let _ = writeln!(
                out,
                "valid       {}{}",
                mo.diagnostic.valid,
                if mo.diagnostic.valid {
                    String::new()
                } else {
                    format!(" ({} violations)", mo.diagnostic.violations.len())
                }
            );
        }

        if !self.statistics.is_empty() {
            let _ = writeln!(out, "\nstatistic          raw   normalized complemented");
            for s in &self.statistics {
                let _ = writeln!(
                    out,
                    "{:<11} {:>12} {:>12} {:>12}",
                    s.kind.name(),
                    sig7(s.raw),
                    sig7(s.normalized),
                    sig7(s.complemented)
                );
            }
        }
        if let Some(b) = &self.frobenius_bounds {
            let _ = writeln!(out, "frobenius bounds [{}, {}]", sig7(b.min), sig7(b.max));
        }

        if !self.tests.is_empty() {
            let _ = writeln!(out, "\ntest    statistic        p_raw   p_adjusted");
            for t in &self.tests {
                match &t.result {
                    Some(r) => {
                        let _ = writeln!(
                            out,
                            "{:<5} {:>12} {:>12} {:>12}",
                            t.method.code(),
                            sig7(r.statistic),
                            sig7(r.p_raw),
                            sig7(r.p_adjusted)
                        );
                    }
                    None => {
                        let _ = writeln!(out, "{:<5} error: {}", t.method.code(), t.error.as_deref().unwrap_or(""));
                    }
                }
            }
        }

        if !self.mc.is_empty() {
            let _ = writeln!(out, "\nmc stat        p_value       stderr   replicates  seed");
            for e in &self.mc {
                let _ = writeln!(
                    out,
                    "{:<11} {:>12} {:>12} {:>12}  {}",
                    mc_name(e),
                    sig7(e.p_value),
                    sig7(e.stderr),
                    e.replicates,
                    e.seed
                );
            }
        }

        if let Some(ent) = &self.entropy {
            let label = match ent.entropy {
                netvar::variability::Entropy::Minimum => "minimum",
                netvar::variability::Entropy::Intermediate => "intermediate",
            };
            let _ = writeln!(out, "\nentropy {label}, {} distinct structures", ent.structures.len());
            let _ = writeln!(out, "count   frequency  edges");
            for s in &ent.structures {
                let bits: String = s.edges.iter().map(|b| char::from(b'0' + b)).collect();
                let _ = writeln!(out, "{:<7} {:>9}  {bits}", s.count, sig7(s.frequency));
            }
        }

        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        for e in &self.errors {
            let _ = writeln!(out, "error: {e}");
        }
        out
    }
}

fn source_name(s: Source) -> &'static str {
    match s {
        Source::Samples => "samples",
        Source::Covariance => "covariance",
    }
}

fn mc_name(e: &McEstimate) -> &'static str {
    match e.stat {
        netvar::StatKind::Total => "vart",
        netvar::StatKind::Generalized => "varg",
        netvar::StatKind::Frobenius => "varn",
    }
}

/// Seven significant digits; fixed notation for moderate magnitudes.
pub fn sig7(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.6e}");
    let exp: i32 = sci.split_once('e').map_or(0, |(_, e)| e.parse().unwrap_or(0));
    if (-4..7).contains(&exp) {
        let decimals = (6 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}
