//! Grid reports shared by the checkers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::levy::ExponentValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SatisfiedOnGrid,
    Violated,
    Inconclusive,
}

impl Verdict {
    /// Process exit code for a set of verdicts: any violation wins over
    /// inconclusive, which wins over satisfied.
    pub fn exit_code(verdicts: &[Verdict]) -> i32 {
        if verdicts.contains(&Verdict::Violated) {
            1
        } else if verdicts.contains(&Verdict::Inconclusive) {
            2
        } else {
            0
        }
    }
}

/// One grid point. `margin > 0` means the inequality holds there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub z: f64,
    pub psi: Option<ExponentValue>,
    pub margin: f64,
    /// Numerical uncertainty of `margin`.
    pub err: f64,
}

impl Sample {
    pub fn new(z: f64, psi: Option<ExponentValue>, margin: f64, err: f64) -> Sample {
        Sample { z, psi, margin, err }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub argmin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub name: String,
    pub samples: Vec<Sample>,
    pub summary: Summary,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
}

impl ConditionReport {
    /// Report whose verdict follows the margins: violated if some margin is
    /// below `-err`, satisfied if all are at least `err`, else inconclusive.
    pub fn from_margins(name: &str, samples: Vec<Sample>) -> ConditionReport {
        let verdict = if samples.iter().any(|s| s.margin < -s.err) {
            Verdict::Violated
        } else if samples.iter().all(|s| s.margin >= s.err) {
            Verdict::SatisfiedOnGrid
        } else {
            Verdict::Inconclusive
        };
        Self::with_verdict(name, samples, verdict)
    }

    pub fn with_verdict(name: &str, samples: Vec<Sample>, verdict: Verdict) -> ConditionReport {
        let summary = summarize(&samples);
        ConditionReport {
            name: name.to_string(),
            samples,
            summary,
            verdict,
            notes: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn note(mut self, text: impl Into<String>) -> ConditionReport {
        self.notes.push(text.into());
        self
    }

    pub fn metric(mut self, key: &str, value: f64) -> ConditionReport {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn grid(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.z).collect()
    }

    pub fn margins(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.margin).collect()
    }
}

fn summarize(samples: &[Sample]) -> Summary {
    let mut out = Summary { min: f64::NAN, max: f64::NAN, argmin: f64::NAN };
    for s in samples {
        if !(s.margin >= out.min) {
            out.min = s.margin;
            out.argmin = s.z;
        }
        if !(s.margin <= out.max) {
            out.max = s.margin;
        }
    }
    out
}

/// `per_decade` log-spaced points per decade on `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && per_decade > 0);
    let (a, b) = (lo.log10(), hi.log10());
    let n = ((b - a) * per_decade as f64).ceil().max(1.0) as usize;
    (0..=n).map(|i| 10f64.powf(a + (b - a) * i as f64 / n as f64)).collect()
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
