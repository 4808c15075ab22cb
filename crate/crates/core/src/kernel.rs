//! Master kernels for power-law bands.
//!
//! For a density `x^{-1-alpha}` the substitution `u = |z| x` reduces every
//! band contribution to increments of
//!
//! ```text
//! G_cos(t) = int_0^t (1 - cos u) u^{-1-alpha} du
//! G_sin(t) = int_0^t sin(u) u^{-1-alpha} du        (alpha < 1)
//! ```
//!
//! Evaluation: Taylor series for `t <= 1`, cached Gauss-Kronrod panels aligned
//! to multiples of pi up to `ASYMPTOTIC_START`, and the integration-by-parts
//! expansion of `int_t^inf e^{iu} u^{-1-alpha} du` beyond.
//!
//! `G_sin` diverges at the origin for `alpha >= 1`; increments
//! `G_sin(t1) - G_sin(t0)` with `t0 > 0` remain finite and are computed from
//! an antiderivative anchored at `u = 1` instead.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate, Integral, QuadOptions};

/// Number of pi-periods tabulated before switching to the asymptotic tail.
const TABLE_PERIODS: usize = 32;
/// Start of the asymptotic regime, `32 pi`.
pub const ASYMPTOTIC_START: f64 = TABLE_PERIODS as f64 * PI;
const SERIES_TERMS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OscKind {
    Cos,
    Sin,
}

/// `1 - cos u` without cancellation near zero.
#[inline]
pub fn one_minus_cos(u: f64) -> f64 {
    let s = (0.5 * u).sin();
    2.0 * s * s
}

fn kernel(kind: OscKind, alpha: f64, u: f64) -> f64 {
    let w = u.powf(-1.0 - alpha);
    match kind {
        OscKind::Cos => one_minus_cos(u) * w,
        OscKind::Sin => u.sin() * w,
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Cached antiderivative values of both kernels for one `alpha`.
#[derive(Debug, Clone)]
pub struct OscKernelTable {
    alpha: f64,
    /// Nodes `1, pi, 2pi, ..., 32pi`.
    nodes: Vec<f64>,
    cos_at: Vec<f64>,
    sin_at: Vec<f64>,
    /// Accumulated quadrature error up to each node.
    err_at: Vec<f64>,
    cos_limit: f64,
    sin_limit: f64,
}

impl OscKernelTable {
    pub fn new(alpha: f64) -> Result<OscKernelTable> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::Domain(format!("kernel alpha must lie in (0,2), got {alpha}")));
        }
        let mut nodes = vec![1.0];
        nodes.extend((1..=TABLE_PERIODS).map(|k| k as f64 * PI));
        let mut t = OscKernelTable {
            alpha,
            nodes: nodes.clone(),
            cos_at: vec![0.0; nodes.len()],
            sin_at: vec![0.0; nodes.len()],
            err_at: vec![0.0; nodes.len()],
            cos_limit: 0.0,
            sin_limit: 0.0,
        };
        t.cos_at[0] = t.series(OscKind::Cos, 1.0);
        t.sin_at[0] = t.series(OscKind::Sin, 1.0);
        let opts = QuadOptions::rel(1e-13);
        for i in 1..nodes.len() {
            let c = integrate(|u| kernel(OscKind::Cos, alpha, u), nodes[i - 1], nodes[i], opts);
            let s = integrate(|u| kernel(OscKind::Sin, alpha, u), nodes[i - 1], nodes[i], opts);
            t.cos_at[i] = t.cos_at[i - 1] + c.value;
            t.sin_at[i] = t.sin_at[i - 1] + s.value;
            t.err_at[i] = t.err_at[i - 1] + c.abs_err + s.abs_err;
        }
        let last = nodes.len() - 1;
        t.cos_limit = t.cos_at[last] + t.tail(OscKind::Cos, ASYMPTOTIC_START);
        t.sin_limit = t.sin_at[last] + t.tail(OscKind::Sin, ASYMPTOTIC_START);
        Ok(t)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn sin_anchored_at_origin(&self) -> bool {
        self.alpha < 1.0
    }

    /// Series antiderivative for `t <= 1` (anchored at 0, or at 1 for the
    /// sine kernel when `alpha >= 1`).
    fn series(&self, kind: OscKind, t: f64) -> f64 {
        let a = self.alpha;
        let mut sum = 0.0;
        match kind {
            OscKind::Cos => {
                for m in 1..=SERIES_TERMS {
                    let p = 2.0 * m as f64 - a;
                    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                    sum += sign * t.powf(p) / (factorial(2 * m) * p);
                }
            }
            OscKind::Sin if self.sin_anchored_at_origin() => {
                for m in 0..SERIES_TERMS {
                    let p = 2.0 * m as f64 + 1.0 - a;
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    sum += sign * t.powf(p) / (factorial(2 * m + 1) * p);
                }
            }
            OscKind::Sin => {
                // -(int_t^1 sin u u^{-1-a} du)
                for m in 0..SERIES_TERMS {
                    let p = 2.0 * m as f64 + 1.0 - a;
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    let j = if p.abs() < 1e-12 { -t.ln() } else { (1.0 - t.powf(p)) / p };
                    sum -= sign * j / factorial(2 * m + 1);
                }
            }
        }
        sum
    }

    /// `int_t^inf e^{iu} u^{-beta} du` by its asymptotic series, `t >= 32 pi`.
    fn exp_tail(&self, t: f64) -> Complex64 {
        let beta = 1.0 + self.alpha;
        let mut term: f64 = 1.0; // (beta)_k t^{-k}
        let mut acc = Complex64::new(0.0, 0.0);
        let mut phase = Complex64::new(1.0, 0.0); // (-i)^k
        let mut prev = f64::INFINITY;
        for k in 0..60 {
            if term.abs() > prev {
                break;
            }
            acc += phase * term;
            prev = term.abs();
            if prev < 1e-18 {
                break;
            }
            term *= (beta + k as f64) / t;
            phase *= Complex64::new(0.0, -1.0);
        }
        Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, t) * t.powf(-beta) * acc
    }

    /// `int_t^inf kernel(u) du` for `t >= 32 pi`.
    fn tail(&self, kind: OscKind, t: f64) -> f64 {
        let i = self.exp_tail(t);
        match kind {
            OscKind::Cos => t.powf(-self.alpha) / self.alpha - i.re,
            OscKind::Sin => i.im,
        }
    }

    fn table_value(&self, kind: OscKind, i: usize) -> f64 {
        match kind {
            OscKind::Cos => self.cos_at[i],
            OscKind::Sin => self.sin_at[i],
        }
    }

    fn limit(&self, kind: OscKind) -> f64 {
        match kind {
            OscKind::Cos => self.cos_limit,
            OscKind::Sin => self.sin_limit,
        }
    }

    /// Antiderivative value for finite `t > 0` (or `t >= 0` when anchored at 0).
    fn antiderivative(&self, kind: OscKind, t: f64) -> Integral {
        if t <= 1.0 {
            return Integral::exact(self.series(kind, t));
        }
        if t >= ASYMPTOTIC_START {
            let v = self.limit(kind) - self.tail(kind, t);
            return Integral { value: v, abs_err: *self.err_at.last().unwrap() };
        }
        let i = if t < PI { 0 } else { (t / PI).floor() as usize };
        let i = i.min(self.nodes.len() - 1);
        let base = self.table_value(kind, i);
        let piece = integrate(|u| kernel(kind, self.alpha, u), self.nodes[i], t, QuadOptions::rel(1e-13));
        Integral { value: base + piece.value, abs_err: self.err_at[i] + piece.abs_err }
    }

    /// `G_kind(t)`; `t` may be `+inf`.
    pub fn value(&self, kind: OscKind, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Domain(format!("kernel argument must be >= 0, got {t}")));
        }
        if kind == OscKind::Sin && !self.sin_anchored_at_origin() {
            return Err(Error::Domain(format!("G_sin diverges at the origin for alpha = {} >= 1", self.alpha)));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if t.is_infinite() {
            return Ok(self.limit(kind));
        }
        Ok(self.antiderivative(kind, t).value)
    }

    /// `int_{t0}^{t1} kernel(u) du` for `0 <= t0 <= t1 <= inf`.
    pub fn increment(&self, kind: OscKind, t0: f64, t1: f64) -> Result<Integral> {
        if !(t0 >= 0.0 && t1 >= t0) {
            return Err(Error::Domain(format!("bad kernel interval [{t0}, {t1}]")));
        }
        if t0 == t1 {
            return Ok(Integral::exact(0.0));
        }
        if t0 == 0.0 && kind == OscKind::Sin && !self.sin_anchored_at_origin() {
            return Err(Error::Domain(format!("sine kernel not integrable at 0 for alpha = {}", self.alpha)));
        }
        if t1 - t0 <= 4.0 * PI && t1 <= 64.0 * t0 {
            // short interval: integrate directly instead of differencing
            return Ok(integrate(|u| kernel(kind, self.alpha, u), t0, t1, QuadOptions::rel(1e-13)));
        }
        if t0 >= ASYMPTOTIC_START {
            let hi = if t1.is_infinite() { 0.0 } else { self.tail(kind, t1) };
            let v = self.tail(kind, t0) - hi;
            return Ok(Integral { value: v, abs_err: 1e-15 * v.abs() });
        }
        let lo = if t0 == 0.0 { Integral::exact(0.0) } else { self.antiderivative(kind, t0) };
        let hi = if t1.is_infinite() {
            Integral { value: self.limit(kind), abs_err: *self.err_at.last().unwrap() }
        } else {
            self.antiderivative(kind, t1)
        };
        let v = hi.value - lo.value;
        let rounding = 4.0 * f64::EPSILON * (hi.value.abs() + lo.value.abs());
        // shared table error cancels in the difference when both ends use the table
        let err = (hi.abs_err - lo.abs_err).abs() + rounding;
        Ok(Integral { value: v, abs_err: err })
    }
}

fn cache() -> &'static Mutex<HashMap<u64, Arc<OscKernelTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<OscKernelTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared kernel table for `alpha`, built on first use.
pub fn kernel_table(alpha: f64) -> Result<Arc<OscKernelTable>> {
    let key = alpha.to_bits();
    if let Some(t) = cache().lock().expect("kernel cache poisoned").get(&key) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(OscKernelTable::new(alpha)?);
    let mut guard = cache().lock().expect("kernel cache poisoned");
    Ok(Arc::clone(guard.entry(key).or_insert(table)))
}

/// `G_kind(t; alpha)`, `t` in `[0, inf]`.
pub fn osc_master(t: f64, alpha: f64, kind: OscKind) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!("alpha must lie in (0,2), got {alpha}")));
    }
    kernel_table(alpha)?.value(kind, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(kind: OscKind, alpha: f64, t0: f64, t1: f64) -> f64 {
        // independent oracle: plain GK on unit panels
        let n = ((t1 - t0).ceil() as usize).max(1) * 4;
        let h = (t1 - t0) / n as f64;
        (0..n)
            .map(|i| {
                integrate(
                    |u| kernel(kind, alpha, u),
                    t0 + i as f64 * h,
                    t0 + (i + 1) as f64 * h,
                    QuadOptions::rel(1e-13),
                )
                .value
            })
            .sum()
    }

    #[test]
    fn zero_at_origin() {
        assert_eq!(osc_master(0.0, 0.75, OscKind::Cos).unwrap(), 0.0);
    }

    #[test]
    fn small_t_leading_taylor_term() {
        let v = osc_master(0.01, 0.5, OscKind::Sin).unwrap();
        let lead = 0.01f64.powf(0.5) / 0.5;
        assert!((v / lead - 1.0).abs() < 0.01);
    }

    #[test]
    fn cos_limit_matches_truncated_brute_force() {
        // oracle: quadrature to 1e4 then analytic tail t^-a/a with
        // oscillatory remainder bounded by 2 t^{-1-a}
        let a = 0.75;
        let t_cut = 2.0e3;
        let head = integrate(|u: f64| kernel(OscKind::Cos, a, u), 1e-12, 1.0, QuadOptions::rel(1e-13)).value
            + brute(OscKind::Cos, a, 1.0, t_cut);
        let tail = t_cut.powf(-a) / a;
        let v = osc_master(f64::INFINITY, a, OscKind::Cos).unwrap();
        assert!(v > 0.0);
        assert!((v - head - tail).abs() < 2.0 * t_cut.powf(-1.0 - a) + 1e-8, "{v} vs {}", head + tail);
    }

    #[test]
    fn moderate_values_match_brute_force() {
        for &a in &[0.3, 0.75, 1.0, 1.5] {
            let tab = kernel_table(a).unwrap();
            for &(t0, t1) in &[(1.5, 7.0), (0.5, 40.0), (3.0, 300.0), (150.0, 400.0)] {
                for kind in [OscKind::Cos, OscKind::Sin] {
                    let got = tab.increment(kind, t0, t1).unwrap().value;
                    let want = brute(kind, a, t0, t1);
                    assert!(
                        (got - want).abs() <= 1e-10 * want.abs().max(1e-3),
                        "a={a} {kind:?} [{t0},{t1}] {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn limits_match_gamma_closed_form() {
        use statrs::function::gamma::gamma;
        for &a in &[0.2, 0.5, 0.75, 0.95] {
            let g = -gamma(-a);
            let c = osc_master(f64::INFINITY, a, OscKind::Cos).unwrap();
            let s = osc_master(f64::INFINITY, a, OscKind::Sin).unwrap();
            let half = std::f64::consts::FRAC_PI_2 * a;
            assert!((c / (g * half.cos()) - 1.0).abs() < 1e-10, "a={a}");
            assert!((s / (g * half.sin()) - 1.0).abs() < 1e-10, "a={a}");
        }
        let c = osc_master(f64::INFINITY, 1.5, OscKind::Cos).unwrap();
        let want = -gamma(-1.5) * (std::f64::consts::FRAC_PI_2 * 1.5).cos();
        assert!((c / want - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sin_requires_alpha_below_one_from_origin() {
        assert!(osc_master(1.0, 1.2, OscKind::Sin).is_err());
        assert!(kernel_table(1.2).unwrap().increment(OscKind::Sin, 0.5, 2.0).is_ok());
    }

    #[test]
    fn domain_errors() {
        assert!(osc_master(1.0, 2.0, OscKind::Cos).is_err());
        assert!(osc_master(-1.0, 0.5, OscKind::Cos).is_err());
    }

    #[test]
    fn cos_kernel_monotone() {
        let tab = kernel_table(0.9).unwrap();
        let mut prev = 0.0;
        for i in 1..400 {
            let t = i as f64 * 0.37;
            let v = tab.value(OscKind::Cos, t).unwrap();
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }
}
