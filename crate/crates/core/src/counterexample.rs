//! The band subordinator `rho = sum_k x^{-1-alpha} 1_{(1/(2 n_k^2), 1/n_k^2)}`
//! with recursively chosen `n_k`, in two flavours: `PaperLog` (exact
//! thresholds, every magnitude kept as a log) and `Toy` (small `n_k` that fit
//! in a float, used for direct quadrature).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_table, OscKind};
use crate::levy::{LevyTriplet, MeasureComponent, Side};
use crate::logreal::LogReal;
use crate::report::{linear_fit, ConditionReport, Sample, Verdict};

const LOG2: f64 = std::f64::consts::LOG10_2;

/// Relative tolerance for the window inequalities. Several of them are tight
/// at the window edge by construction (e.g. the lower `Im` bound at `n_k/2`).
pub const WINDOW_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CxMode {
    PaperLog,
    Toy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyOverrides {
    pub n1: f64,
    /// Exponent of the toy recursion `n_k = ceil(max(sqrt2 n + 1, n^theta_toy))`.
    pub theta_toy: f64,
}

impl Default for ToyOverrides {
    fn default() -> Self {
        ToyOverrides { n1: 64.0, theta_toy: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    pub alpha: f64,
    pub mode: CxMode,
    /// Number of levels.
    pub k: usize,
    /// `log10 n_k`, `k = 1..=K`.
    pub log10_n: Vec<f64>,
    pub theta: f64,
    pub c: f64,
    /// Exact integer levels (toy mode only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toy_overrides: Option<ToyOverrides>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.5 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (1/2, 1), got {alpha}")))
    }
}

/// `max(5/(2-2a), (4+2a)/(2a-1))`.
pub fn theta(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((5.0 / (2.0 - 2.0 * alpha)).max((4.0 + 2.0 * alpha) / (2.0 * alpha - 1.0)))
}

/// Recursion constant `max(sqrt 2, 96^{1/(2a-1)})`. Any larger value keeps
/// every estimate of the construction valid.
pub fn recursion_constant(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(2f64.sqrt().max(96f64.powf(1.0 / (2.0 * alpha - 1.0))))
}

/// Smallest integer `n` with `n^{2a-1}/8 > 6/(1-a)`.
pub fn minimal_n1(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let ok = |n: f64| n.powf(2.0 * alpha - 1.0) / 8.0 > 6.0 / (1.0 - alpha);
    let guess = (48.0 / (1.0 - alpha)).powf(1.0 / (2.0 * alpha - 1.0));
    if !guess.is_finite() || guess > 1e15 {
        return Err(Error::Overflow(format!("first level threshold {guess} not representable as an integer")));
    }
    let mut n = guess.floor().max(1.0);
    while n > 1.0 && ok(n - 1.0) {
        n -= 1.0;
    }
    while !ok(n) {
        n += 1.0;
    }
    Ok(n)
}

/// Build the level sequence. `overrides` only matters in toy mode.
pub fn build_spec(alpha: f64, k: usize, mode: CxMode, overrides: Option<ToyOverrides>) -> Result<CounterexampleSpec> {
    if k == 0 {
        return Err(Error::Domain("need at least one level".into()));
    }
    let th = theta(alpha)?;
    let c = recursion_constant(alpha)?;
    let mut log10_n = Vec::with_capacity(k);
    let mut n_values = Vec::new();
    let toy_overrides = match mode {
        CxMode::PaperLog => {
            log10_n.push(minimal_n1(alpha)?.log10());
            for j in 2..=k {
                let prev = log10_n[j - 2];
                let factor = ((j - 1) as f64).log10() / (2.0 * alpha - 1.0);
                log10_n.push(th * prev + c.log10() + factor);
            }
            None
        }
        CxMode::Toy => {
            let o = overrides.unwrap_or_default();
            if !(o.n1 >= 2.0 && o.n1.fract() == 0.0) {
                return Err(Error::Domain(format!("toy n1 must be an integer >= 2, got {}", o.n1)));
            }
            if !(o.theta_toy >= 1.0) {
                return Err(Error::Domain(format!("toy exponent must be >= 1, got {}", o.theta_toy)));
            }
            let mut n = o.n1;
            log10_n.push(n.log10());
            n_values.push(n);
            for _ in 2..=k {
                n = (2f64.sqrt() * n + 1.0).max(n.powf(o.theta_toy)).ceil();
                if !n.is_finite() {
                    return Err(Error::Overflow("toy level exceeds the float range; use paper-log mode".into()));
                }
                log10_n.push(n.log10());
                n_values.push(n);
            }
            Some(o)
        }
    };
    let spec = CounterexampleSpec { alpha, mode, k, log10_n, theta: th, c, n_values, toy_overrides };
    spec.validate()?;
    Ok(spec)
}

impl CounterexampleSpec {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.log10_n.len() != self.k || self.k == 0 {
            return Err(Error::Validation(format!("expected {} levels, got {}", self.k, self.log10_n.len())));
        }
        for w in self.log10_n.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Validation("levels must be strictly increasing".into()));
            }
            // n_k^2 > 2 n_{k-1}^2
            if !(2.0 * w[1] > LOG2 + 2.0 * w[0]) {
                return Err(Error::Validation(format!("bands overlap: n = 10^{} and 10^{}", w[0], w[1])));
            }
        }
        if !self.n_values.is_empty() {
            if self.n_values.len() != self.k {
                return Err(Error::Validation("n_values must list every level".into()));
            }
            for (n, l) in self.n_values.iter().zip(&self.log10_n) {
                if (n.log10() - l).abs() > 1e-12 * l.abs().max(1.0) {
                    return Err(Error::Validation(format!("n_values entry {n} disagrees with log10_n {l}")));
                }
            }
        }
        if self.log10_n[0] < LOG2 {
            return Err(Error::Validation("n_1 must be at least 2".into()));
        }
        Ok(())
    }

    /// `n_k` (1-based) as a float; `inf` when not representable.
    pub fn n(&self, k: usize) -> f64 {
        match self.n_values.get(k - 1) {
            Some(&n) => n,
            None => 10f64.powf(self.log10_n[k - 1]),
        }
    }

    pub fn n_log(&self, k: usize) -> LogReal {
        LogReal::from_log10(self.log10_n[k - 1])
    }

    /// Residuals of `log n_k - theta log n_{k-1} - log c - log (k-1)/(2a-1)`.
    pub fn recursion_residuals(&self) -> Vec<f64> {
        (2..=self.k)
            .map(|j| {
                self.log10_n[j - 1]
                    - self.theta * self.log10_n[j - 2]
                    - self.c.log10()
                    - ((j - 1) as f64).log10() / (2.0 * self.alpha - 1.0)
            })
            .collect()
    }

    /// `recursion_residuals` divided by `log10 n_k`. At `K = 10` the
    /// exponents reach `10^10`, where one ulp is already `~2e-6`, so only the
    /// relative form can be held to a tight tolerance.
    pub fn recursion_residuals_rel(&self) -> Vec<f64> {
        self.recursion_residuals().iter().zip(&self.log10_n[1..]).map(|(r, l)| r / l.abs()).collect()
    }

    /// True when every band endpoint is a normal float.
    pub fn representable(&self, levels: usize) -> bool {
        levels <= self.k && (levels == 0 || 2.0 * self.log10_n[levels - 1] + LOG2 < 300.0)
    }
}

/// Mass of band `k`: `n_k^{2a} (2^a - 1)/a`.
pub fn band_mass(spec: &CounterexampleSpec, k: usize) -> LogReal {
    let a = spec.alpha;
    LogReal::from_log10(2.0 * a * spec.log10_n[k - 1]).scale((2f64.powf(a) - 1.0) / a)
}

/// Bands `1..=levels` as ordinary components.
pub fn counterexample_measure(spec: &CounterexampleSpec, levels: usize) -> Result<Vec<MeasureComponent>> {
    if levels > spec.k {
        return Err(Error::Domain(format!("asked for {levels} levels, spec has {}", spec.k)));
    }
    (1..=levels)
        .map(|k| {
            let l = spec.log10_n[k - 1];
            let (lo, hi) = match spec.n_values.get(k - 1) {
                Some(&n) => (0.5 / (n * n), 1.0 / (n * n)),
                None => (10f64.powf(-2.0 * l - LOG2), 10f64.powf(-2.0 * l)),
            };
            if !(lo >= f64::MIN_POSITIVE) {
                return Err(Error::Representation(format!(
                    "band {k} lies below the float range (n_k = 10^{l:.3}); use the log-space evaluator"
                )));
            }
            Ok(MeasureComponent::power_band(1.0, spec.alpha, lo, hi))
        })
        .collect()
}

/// Driftless subordinator with the first `levels` bands.
pub fn counterexample_triplet(spec: &CounterexampleSpec, levels: usize) -> Result<LevyTriplet> {
    Ok(LevyTriplet::drift(0.0, counterexample_measure(spec, levels)?))
}

/// Same bands mirrored onto the negative axis: `Im psi` vanishes identically.
pub fn symmetric_control(spec: &CounterexampleSpec, levels: usize) -> Result<LevyTriplet> {
    let m = counterexample_measure(spec, levels)?.into_iter().map(|c| c.with_side(Side::Symmetric)).collect();
    Ok(LevyTriplet::general(0.0, 0.0, m))
}

/// Index `beta` of the construction. Band `k` contributes
/// `n_k^{2(a-t)} (2^{a-t} - 1)/(a-t)` to `int x^t rho`, which stays bounded
/// away from zero for `t <= a` and decays doubly exponentially for `t > a`.
pub fn counterexample_beta(spec: &CounterexampleSpec) -> f64 {
    spec.alpha
}

/// Exponent value with both parts in log form; `im` is `int sin(zx) rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogPsi {
    pub re: LogReal,
    pub im: LogReal,
}

impl LogPsi {
    pub const ZERO: LogPsi = LogPsi { re: LogReal::ZERO, im: LogReal::ZERO };

    pub fn add(self, o: LogPsi) -> LogPsi {
        LogPsi { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    /// `1 + Re psi`.
    pub fn a(&self) -> LogReal {
        LogReal::ONE.add(self.re)
    }

    /// `|1 + psi|`.
    pub fn b(&self) -> LogReal {
        let a = self.a();
        a.mul(a).add(self.im.mul(self.im)).sqrt()
    }
}

// t^{-2+a} int_{t/2}^{t} (1-cos u) u^{-1-a} du and t^{-1+a} int_{t/2}^{t} sin u u^{-1-a} du
fn small_t_series(alpha: f64, t: f64) -> (f64, f64) {
    let t2 = t * t;
    let (mut c, mut s) = (0.0, 0.0);
    let (mut pc, mut ps) = (1.0, 1.0); // t^{2m-2}, t^{2m}
    let mut fact_even = 2.0; // (2m)!
    let mut fact_odd = 1.0; // (2m+1)!
    for m in 1..12 {
        let mf = m as f64;
        let e = 2.0 * mf - alpha;
        let tc = pc * (1.0 - 2f64.powf(-e)) / (fact_even * e);
        c += if m % 2 == 1 { tc } else { -tc };
        let j = m - 1; // sine term index
        let e = 2.0 * j as f64 + 1.0 - alpha;
        let ts = ps * (1.0 - 2f64.powf(-e)) / (fact_odd * e);
        s += if j % 2 == 0 { ts } else { -ts };
        pc *= t2;
        ps *= t2;
        fact_even *= (2.0 * mf + 1.0) * (2.0 * mf + 2.0);
        fact_odd *= (2.0 * mf) * (2.0 * mf + 1.0);
        if tc.abs() < 1e-18 * c.abs() && ts.abs() < 1e-18 * s.abs() {
            break;
        }
    }
    (c, s)
}

/// One band `x^{-1-a}` on `(1/(2n^2), 1/n^2)` at `z = 10^{log10_z} > 0`.
/// After `u = zx` only `t = z/n^2` and `z^a` enter, so nothing over- or
/// underflows even when `n` itself is far outside the float range.
pub fn band_exponent_log(alpha: f64, log10_n: f64, log10_z: f64) -> Result<LogPsi> {
    check_alpha(alpha)?;
    if log10_z == f64::NEG_INFINITY {
        return Ok(LogPsi::ZERO);
    }
    let lt_hi = log10_z - 2.0 * log10_n;
    let lt_lo = lt_hi - LOG2;
    if lt_hi < -3.0 {
        let (c, s) = small_t_series(alpha, 10f64.powf(lt_hi));
        let re = LogReal::from_log10(alpha * log10_z + (2.0 - alpha) * lt_hi).scale(c);
        let im = LogReal::from_log10(alpha * log10_z + (1.0 - alpha) * lt_hi).scale(s);
        return Ok(LogPsi { re, im });
    }
    if lt_lo > 250.0 {
        // the oscillating remainder is below 10^{-250} relative to the mass
        let mass = LogReal::from_log10(2.0 * alpha * log10_n).scale((2f64.powf(alpha) - 1.0) / alpha);
        return Ok(LogPsi { re: mass, im: LogReal::ZERO });
    }
    let tab = kernel_table(alpha)?;
    let (t0, t1) = (10f64.powf(lt_lo), 10f64.powf(lt_hi));
    let c = tab.increment(OscKind::Cos, t0, t1)?.value;
    let s = tab.increment(OscKind::Sin, t0, t1)?.value;
    let za = LogReal::from_log10(alpha * log10_z);
    Ok(LogPsi { re: za.scale(c), im: za.scale(s) })
}

/// Band `k` of the construction.
pub fn level_psi_log(spec: &CounterexampleSpec, k: usize, log10_z: f64) -> Result<LogPsi> {
    band_exponent_log(spec.alpha, spec.log10_n[k - 1], log10_z)
}

/// Sum of bands `1..=levels`.
pub fn psi_log(spec: &CounterexampleSpec, levels: usize, log10_z: f64) -> Result<LogPsi> {
    let mut acc = LogPsi::ZERO;
    for k in 1..=levels.min(spec.k) {
        acc = acc.add(level_psi_log(spec, k, log10_z)?);
    }
    Ok(acc)
}

/// Bound on `|psi_{<=K}(z) - psi_{<=K'}(z)|` for every `K' > k_used` within
/// the construction, from `1 - cos u <= u^2/2` and `|sin u| <= u` per band.
pub fn tail_bound_log(spec: &CounterexampleSpec, k_used: usize, log10_z: f64) -> LogReal {
    let a = spec.alpha;
    let mut acc = LogReal::ZERO;
    for j in (k_used + 1)..=spec.k {
        let l = spec.log10_n[j - 1];
        let re = LogReal::from_log10(2.0 * log10_z + (2.0 * a - 4.0) * l).scale(2.0 / (2.0 - a));
        let im = LogReal::from_log10(log10_z + (2.0 * a - 2.0) * l).scale(2.0 / (1.0 - a));
        acc = acc.add(re).add(im);
    }
    acc
}

pub fn tail_bound(spec: &CounterexampleSpec, k_used: usize, z: f64) -> f64 {
    tail_bound_log(spec, k_used, z.abs().log10()).to_f64()
}

/// `n` evenly spaced multipliers `s` of `n_k` covering `[1/2, 2]`.
pub fn window_multipliers(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| 0.5 + 1.5 * i as f64 / (n - 1) as f64).collect()
}

/// Window `k` points `s n_k` as floats.
pub fn window_grid(spec: &CounterexampleSpec, k: usize, n: usize) -> Result<Vec<f64>> {
    let nk = spec.n(k);
    if !nk.is_finite() {
        return Err(Error::Representation(format!("n_{k} is outside the float range")));
    }
    Ok(window_multipliers(n).into_iter().map(|s| s * nk).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    /// Whether the bound counts towards the window verdict in this mode.
    pub enforced: bool,
    /// `(rhs - lhs)/|rhs|` for upper bounds, `(lhs - rhs)/|rhs|` for lower ones.
    pub margins: Vec<f64>,
    pub verdict: Verdict,
}

impl BoundCheck {
    fn new(name: &str, enforced: bool, margins: Vec<f64>) -> BoundCheck {
        let verdict =
            if margins.iter().any(|m| !(*m >= -WINDOW_TOL)) { Verdict::Violated } else { Verdict::SatisfiedOnGrid };
        BoundCheck { name: name.to_string(), enforced, margins, verdict }
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub k: usize,
    /// `z / n_k`.
    pub s: Vec<f64>,
    pub log10_z: Vec<f64>,
    pub re_psi: Vec<LogReal>,
    /// `int sin(zx) rho`, signed.
    pub im_psi: Vec<LogReal>,
    /// `tail_bound` of the bands after `k`, per sample.
    pub tail_after_k: Vec<LogReal>,
    pub bounds: Vec<BoundCheck>,
}

impl WindowReport {
    pub fn bound(&self, name: &str) -> Option<&BoundCheck> {
        self.bounds.iter().find(|b| b.name == name)
    }

    /// Worst verdict over the enforced bounds.
    pub fn verdict(&self) -> Verdict {
        let v: Vec<Verdict> = self.bounds.iter().filter(|b| b.enforced).map(|b| b.verdict).collect();
        if v.contains(&Verdict::Violated) {
            Verdict::Violated
        } else {
            Verdict::SatisfiedOnGrid
        }
    }
}

fn upper_margin(lhs: LogReal, rhs: LogReal) -> f64 {
    rhs.sub(lhs).div(rhs.abs()).to_f64()
}

fn lower_margin(lhs: LogReal, rhs: LogReal) -> f64 {
    lhs.sub(rhs).div(rhs.abs()).to_f64()
}

/// Check the window inequalities of level `k` at `z = s n_k`, `s` in `svals`.
pub fn verify_window(spec: &CounterexampleSpec, k: usize, svals: &[f64]) -> Result<WindowReport> {
    if k == 0 || k > spec.k {
        return Err(Error::Domain(format!("window {k} outside 1..={}", spec.k)));
    }
    let a = spec.alpha;
    let ln = spec.log10_n[k - 1];
    let lz: Vec<f64> = svals.iter().map(|s| s.log10() + ln).collect();

    struct Row {
        total: LogPsi,
        own: LogPsi,
        higher: Vec<LogPsi>,
    }
    let rows: Vec<Row> = lz
        .par_iter()
        .map(|&l| {
            let mut total = LogPsi::ZERO;
            let mut own = LogPsi::ZERO;
            let mut higher = Vec::new();
            for j in 1..=spec.k {
                let p = level_psi_log(spec, j, l)?;
                total = total.add(p);
                if j == k {
                    own = p;
                } else if j > k {
                    higher.push(p);
                }
            }
            Ok(Row { total, own, higher })
        })
        .collect::<Result<_>>()?;

    let enforce_all = spec.mode == CxMode::PaperLog;
    let mut bounds = Vec::new();

    let r_hgf7 = LogReal::from_log10((2.0 * a - 1.0) * ln).scale(1.0 / 8.0);
    bounds.push(BoundCheck::new("hgf7", true, rows.iter().map(|r| lower_margin(r.own.im, r_hgf7)).collect()));

    let r_jkl1 = LogReal::from_log10((2.0 * a - 2.0) * ln).scale(2.0 / (2.0 - a));
    bounds.push(BoundCheck::new("jkl1", true, rows.iter().map(|r| upper_margin(r.own.re, r_jkl1)).collect()));

    // global bounds at 100 arbitrary points z in [n_k^{-1}, n_k^3]
    let r_global = LogReal::from_log10(2.0 * a * ln).scale(4.0);
    let glz: Vec<f64> = (0..100).map(|i| -ln + 4.0 * ln * i as f64 / 99.0).collect();
    let global: Vec<LogPsi> = glz.par_iter().map(|&l| level_psi_log(spec, k, l)).collect::<Result<_>>()?;
    bounds.push(BoundCheck::new("21", true, global.iter().map(|p| upper_margin(p.re, r_global)).collect()));
    bounds.push(BoundCheck::new("22", true, global.iter().map(|p| upper_margin(p.im.abs(), r_global)).collect()));

    // cross-window: bands j > k evaluated on window k
    let p1: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.higher
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let lj = spec.log10_n[k + i];
                    let rhs = LogReal::from_log10(2.0 * ln + (2.0 * a - 4.0) * lj).scale(2.0 / (2.0 - a));
                    upper_margin(p.re, rhs)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let p2: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.higher
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let lj = spec.log10_n[k + i];
                    let rhs = LogReal::from_log10(ln + (2.0 * a - 2.0) * lj).scale(2.0 / (1.0 - a));
                    upper_margin(p.im.abs(), rhs)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    bounds.push(BoundCheck::new("p1", true, p1));
    bounds.push(BoundCheck::new("p2", true, p2));

    // aggregates over the whole (truncated) series
    let anchor = level_psi_log(spec, k, ln - LOG2)?.im;
    let inv4: LogReal = spec.log10_n.iter().fold(LogReal::ZERO, |s, l| s.add(LogReal::from_log10(-4.0 * l)));
    let mut g1_rhs = LogReal::from_f64(2.0).add(inv4.scale(2.0 / (1.0 - a)));
    if k >= 2 {
        g1_rhs = g1_rhs.add(anchor.div(LogReal::from_log10(4.0 * spec.log10_n[k - 2]).scale(3.0)));
    }
    let g2_rhs = LogReal::ONE.sub(inv4.scale(1.0 / 3.0)).mul(anchor);
    bounds.push(BoundCheck::new(
        "general1",
        enforce_all,
        rows.iter().map(|r| upper_margin(r.total.re, g1_rhs)).collect(),
    ));
    bounds.push(BoundCheck::new(
        "general2",
        enforce_all,
        rows.iter().map(|r| lower_margin(r.total.im, g2_rhs)).collect(),
    ));

    Ok(WindowReport {
        k,
        s: svals.to_vec(),
        re_psi: rows.iter().map(|r| r.total.re).collect(),
        im_psi: rows.iter().map(|r| r.total.im).collect(),
        tail_after_k: lz.iter().map(|&l| tail_bound_log(spec, k, l)).collect(),
        log10_z: lz,
        bounds,
    })
}

/// Per-window minima of `|Im psi|/(1 + Re psi)` on the construction's own bands.
pub fn ratio_growth(spec: &CounterexampleSpec, ks: &[usize], svals: &[f64]) -> Result<ConditionReport> {
    ratio_growth_with(spec, ks, svals, &|lz| psi_log(spec, spec.k, lz))
}

/// As `ratio_growth`, but with `psi` taken from an arbitrary triplet (the
/// windows still come from `spec`).
pub fn ratio_growth_for(
    triplet: &LevyTriplet,
    spec: &CounterexampleSpec,
    ks: &[usize],
    svals: &[f64],
) -> Result<ConditionReport> {
    ratio_growth_with(spec, ks, svals, &|lz| {
        let v = crate::levy::eval_psi(triplet, 10f64.powf(lz))?;
        Ok(LogPsi { re: LogReal::from_f64(v.re), im: LogReal::from_f64(v.im_signed) })
    })
}

fn ratio_growth_with(
    spec: &CounterexampleSpec,
    ks: &[usize],
    svals: &[f64],
    psi: &(dyn Fn(f64) -> Result<LogPsi> + Sync),
) -> Result<ConditionReport> {
    if ks.is_empty() || ks.iter().any(|&k| k == 0 || k > spec.k) {
        return Err(Error::Domain(format!("windows must lie in 1..={}", spec.k)));
    }
    let th = spec.theta;
    struct Win {
        k: usize,
        min_ratio: LogReal,
        argmin_lz: f64,
        min_witness: LogReal,
        max_re: LogReal,
        ratios: Vec<(f64, LogReal)>,
    }
    let wins: Vec<Win> = ks
        .iter()
        .map(|&k| {
            let ln = spec.log10_n[k - 1];
            let vals: Vec<(f64, LogPsi)> = svals
                .par_iter()
                .map(|s| {
                    let lz = s.log10() + ln;
                    Ok((lz, psi(lz)?))
                })
                .collect::<Result<_>>()?;
            let mut w = Win {
                k,
                min_ratio: LogReal::from_log10(f64::INFINITY),
                argmin_lz: f64::NAN,
                min_witness: LogReal::from_log10(f64::INFINITY),
                max_re: LogReal::ZERO,
                ratios: Vec::new(),
            };
            for (lz, p) in vals {
                let a = p.a();
                let r = p.im.abs().div(a);
                if r.total_cmp(&w.min_ratio).is_lt() {
                    w.min_ratio = r;
                    w.argmin_lz = lz;
                }
                let la = a.ln().max(1.0);
                w.min_witness = w.min_witness.min(p.b().div(a.scale(la)));
                w.max_re = w.max_re.max(p.re);
                w.ratios.push((lz, r));
            }
            Ok(w)
        })
        .collect::<Result<_>>()?;

    let mut rep;
    let mut metrics = Vec::new();
    for w in &wins {
        metrics.push((format!("log10_min_ratio_{}", w.k), w.min_ratio.log10));
        metrics.push((format!("log10_min_rao_witness_{}", w.k), w.min_witness.log10));
        metrics.push((format!("log10_max_re_{}", w.k), w.max_re.log10));
    }
    match spec.mode {
        CxMode::Toy => {
            let samples: Vec<Sample> = wins
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let margin = if i == 0 { f64::INFINITY } else { w.min_ratio.log10 - wins[i - 1].min_ratio.log10 };
                    Sample::new(10f64.powf(w.argmin_lz), None, margin, 0.0)
                })
                .collect();
            let increasing =
                samples.iter().skip(1).all(|s| s.margin > 0.0) && wins.iter().all(|w| !w.min_ratio.is_zero());
            rep = ConditionReport::with_verdict(
                "ratio-growth",
                samples,
                if increasing { Verdict::SatisfiedOnGrid } else { Verdict::Violated },
            )
            .note("toy mode: margin is the log10 increase of the window minimum over the previous window");
            if wins.iter().any(|w| w.min_ratio.is_zero()) {
                rep = rep.note("no growth: Im psi vanishes on some window");
            } else if !increasing {
                rep = rep.note("no growth: window minima are not strictly increasing");
            }
            let witness_up = wins.windows(2).all(|p| p[1].min_witness.log10 > p[0].min_witness.log10);
            rep = rep.metric("rao_witness_increasing", if witness_up { 1.0 } else { 0.0 });
        }
        CxMode::PaperLog => {
            // c3 from the first window, then ratio >= c3 (z/2)^{3/theta} everywhere
            let shape = |lz: f64| LogReal::from_log10((lz - LOG2) * 3.0 / th);
            let c3 = wins[0]
                .ratios
                .iter()
                .map(|(lz, r)| r.div(shape(*lz)))
                .fold(LogReal::from_log10(f64::INFINITY), LogReal::min);
            let samples: Vec<Sample> = wins
                .iter()
                .skip(1)
                .flat_map(|w| w.ratios.iter())
                .map(|(lz, r)| {
                    let rhs = c3.mul(shape(*lz));
                    Sample::new(10f64.powf(*lz), None, lower_margin(*r, rhs), WINDOW_TOL)
                })
                .collect();
            rep = ConditionReport::from_margins("ratio-growth", samples)
                .note("paper-log mode: margin is (ratio - c3 (z/2)^{3/theta}) relative, c3 fitted on the first window")
                .metric("log10_c3", c3.log10);
            // break1 shape: max Re psi on window k against n_{k-1}^{a theta - 3}
            let bshape: Vec<(usize, f64)> = wins
                .iter()
                .filter(|w| w.k >= 2)
                .map(|w| (w.k, w.max_re.log10 - (spec.alpha * th - 3.0) * spec.log10_n[w.k - 2]))
                .collect();
            if let Some(&(_, first)) = bshape.first() {
                let worst = bshape.iter().map(|(_, v)| v - first).fold(f64::NEG_INFINITY, f64::max);
                rep = rep.metric("log10_c4", first).metric("break1_log10_excess", worst);
            }
        }
    }
    for (k, v) in metrics {
        rep = rep.metric(&k, v);
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplainFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_rel_residual: f64,
}

/// Affine fit of `log10 log10 n_k` against `k` over `k >= 3`.
pub fn explain_fit(spec: &CounterexampleSpec) -> Result<ExplainFit> {
    if spec.k < 4 {
        return Err(Error::Domain("need at least four levels for the fit".into()));
    }
    let ks: Vec<f64> = (3..=spec.k).map(|k| k as f64).collect();
    let y: Vec<f64> = (3..=spec.k).map(|k| spec.log10_n[k - 1].log10()).collect();
    let (slope, intercept) = linear_fit(&ks, &y);
    let max_rel_residual =
        ks.iter().zip(&y).map(|(k, y)| ((slope * k + intercept) - y).abs() / y.abs()).fold(0.0, f64::max);
    Ok(ExplainFit { slope, intercept, max_rel_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{band_exponent, eval_psi};
    use crate::quad::{integrate, QuadOptions};

    #[test]
    fn theta_values() {
        assert_eq!(theta(0.75).unwrap(), 11.0);
        assert!((theta(0.9).unwrap() - 25.0).abs() < 1e-12);
        assert!(theta(0.5 + 1e-9).unwrap() > 1e9);
        assert!(theta(0.5).is_err() && theta(1.0).is_err());
    }

    #[test]
    fn log_mode_first_level() {
        // brute force over integers: n^{1/2}/8 > 24
        let brute = (1u64..).find(|&n| (n as f64).sqrt() / 8.0 > 24.0).unwrap();
        assert_eq!(minimal_n1(0.75).unwrap(), brute as f64);
        assert_eq!(brute, 36865);
    }

    #[test]
    fn log_mode_recursion_identity() {
        let s = build_spec(0.75, 10, CxMode::PaperLog, None).unwrap();
        assert_eq!(s.c, 9216.0);
        for r in s.recursion_residuals() {
            assert!(r.abs() <= 1e-12 * 1f64.max(s.log10_n[9]), "{r}");
        }
        // n_2 = 96^2 n_1^11
        let want = 11.0 * 36865f64.log10() + 9216f64.log10();
        assert!((s.log10_n[1] - want).abs() < 1e-12);
    }

    #[test]
    fn toy_levels() {
        let s = build_spec(0.75, 3, CxMode::Toy, None).unwrap();
        let n: Vec<f64> = (1..=3).map(|k| s.n(k)).collect();
        assert_eq!(n, vec![64.0, 4096.0, 16777216.0]);
        let m = counterexample_measure(&s, 1).unwrap();
        assert_eq!(m[0], MeasureComponent::power_band(1.0, 0.75, 1.0 / 8192.0, 1.0 / 4096.0));
        // sqrt2 n + 1 alone already separates the bands
        let slow = build_spec(0.75, 3, CxMode::Toy, Some(ToyOverrides { n1: 64.0, theta_toy: 1.0 })).unwrap();
        assert_eq!(slow.n_values, vec![64.0, 92.0, 132.0]);
        let mut bad = s.clone();
        bad.n_values = vec![64.0, 90.0, 4096.0];
        bad.log10_n = bad.n_values.iter().map(|n| n.log10()).collect();
        assert!(matches!(bad.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn band_mass_quadrature() {
        let s = build_spec(0.75, 2, CxMode::Toy, None).unwrap();
        for k in 1..=2 {
            let n = s.n(k);
            let q = integrate(|x: f64| x.powf(-1.75), 0.5 / (n * n), 1.0 / (n * n), QuadOptions::rel(1e-13));
            let m = band_mass(&s, k).to_f64();
            assert!((q.value / m - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn log_mode_band_underflow_is_reported() {
        let s = build_spec(0.75, 3, CxMode::PaperLog, None).unwrap();
        assert!(counterexample_measure(&s, 1).is_ok());
        assert!(matches!(counterexample_measure(&s, 3), Err(Error::Representation(_))));
    }

    #[test]
    fn log_engine_matches_direct() {
        let s = build_spec(0.75, 3, CxMode::Toy, Some(ToyOverrides { n1: 64.0, theta_toy: 4.0 })).unwrap();
        let m = counterexample_measure(&s, 3).unwrap();
        for k in 1..=3 {
            for lz in [-2.0, 0.5, 1.8, 3.0, 7.3, 12.0, 25.0, 31.0] {
                let p = level_psi_log(&s, k, lz).unwrap();
                let d = band_exponent(10f64.powf(lz), &m[k - 1]).unwrap();
                let tol = 1e-10 * d.re.abs().max(1e-300) + d.abs_err;
                assert!((p.re.to_f64() - d.re).abs() <= tol, "k={k} lz={lz} {} {}", p.re.to_f64(), d.re);
                // Im is a signed oscillating quantity; compare against the modulus scale
                let scale = d.re.abs().max(d.im_signed.abs());
                assert!((p.im.to_f64() - d.im_signed).abs() <= 1e-10 * scale + d.abs_err, "k={k} lz={lz}");
            }
        }
    }

    #[test]
    fn tail_bound_brackets_deeper_truncations() {
        let s = build_spec(0.75, 3, CxMode::Toy, Some(ToyOverrides { n1: 64.0, theta_toy: 4.0 })).unwrap();
        let t1 = counterexample_triplet(&s, 1).unwrap();
        let t3 = counterexample_triplet(&s, 3).unwrap();
        let mut prev = 0.0;
        for z in crate::report::log_grid(1e-1, 1e8, 4) {
            let a = eval_psi(&t1, z).unwrap();
            let b = eval_psi(&t3, z).unwrap();
            let diff = (a.to_complex() - b.to_complex()).norm();
            let tb = tail_bound(&s, 1, z);
            assert!(diff <= tb * (1.0 + 1e-12) + a.abs_err + b.abs_err, "z={z}");
            assert!(tb >= prev);
            prev = tb;
        }
        assert_eq!(tail_bound(&s, 3, 10.0), 0.0);
    }

    #[test]
    fn toy_windows_hold() {
        let s = build_spec(0.75, 3, CxMode::Toy, Some(ToyOverrides { n1: 64.0, theta_toy: 4.0 })).unwrap();
        let sv = window_multipliers(33);
        for k in 1..=3 {
            let w = verify_window(&s, k, &sv).unwrap();
            for name in ["hgf7", "jkl1", "21", "22", "p1", "p2"] {
                let b = w.bound(name).unwrap();
                assert_eq!(b.verdict, Verdict::SatisfiedOnGrid, "k={k} {name} {}", b.min_margin());
            }
        }
    }

    #[test]
    fn ratio_growth_toy_and_control() {
        let s = build_spec(0.75, 3, CxMode::Toy, Some(ToyOverrides { n1: 64.0, theta_toy: 4.0 })).unwrap();
        let sv = window_multipliers(33);
        let r = ratio_growth(&s, &[1, 2, 3], &sv).unwrap();
        assert_eq!(r.verdict, Verdict::SatisfiedOnGrid, "{:?}", r.metrics);
        let ctl = symmetric_control(&s, 3).unwrap();
        let r = ratio_growth_for(&ctl, &s, &[1, 2, 3], &sv).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(r.notes.iter().any(|n| n.contains("no growth")));
    }

    #[test]
    fn explain_is_affine() {
        let s = build_spec(0.75, 10, CxMode::PaperLog, None).unwrap();
        let f = explain_fit(&s).unwrap();
        assert!(f.max_rel_residual < 0.05, "{f:?}");
        assert!((f.slope - 11f64.log10()).abs() < 0.05);
    }
}
