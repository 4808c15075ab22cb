//! Smooth one-sided densities and the transform
//! `int_lo^hi (1 - e^{-w x}) rho(x) dx`, `Re w >= 0`.
//!
//! `w = -iz` gives the characteristic exponent contribution, `w = s > 0` the
//! Laplace exponent, and complex `w` with `Re w >= 0` the subordinated
//! exponent. The range is split at `1/|w|` and `U/|w|`:
//! below `1/|w|` the integrand is smooth in `ln x`; between the two cut points
//! panels are aligned to half periods; above `U/|w|` the oscillatory part
//! `int e^{-wx} rho` is replaced by its integration-by-parts expansion.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quad::{integrate, integrate_with_breaks, Integral, QuadOptions};

const U_ASYM: f64 = 64.0;
const JET_ORDER: usize = 40;
const MAX_PANELS: usize = 400_000;

pub trait SmoothDensity: Sync {
    fn value(&self, x: f64) -> f64;

    /// Taylor jet of the density at `x`.
    fn jet(&self, x: f64, order: usize) -> Jet;

    /// Length over which the density changes by O(1) near `x`.
    fn scale(&self, x: f64) -> f64 {
        x
    }

    /// Closed-form `int_a^b rho`, if known. `b` may be infinite.
    fn mass(&self, _a: f64, _b: f64) -> Option<f64> {
        None
    }

    /// Closed-form `int_0^x0 (1 - e^{-wx}) rho(x) dx` for `|w| x0 <= 1/2`.
    fn origin_series(&self, _x0: f64, _w: Complex64) -> Option<Complex64> {
        None
    }
}

/// `coeff * x^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerDensity {
    pub coeff: f64,
    pub p: f64,
}

impl SmoothDensity for PowerDensity {
    fn value(&self, x: f64) -> f64 {
        self.coeff * x.powf(self.p)
    }

    fn jet(&self, x: f64, order: usize) -> Jet {
        Jet::power(x, self.p, order).scale(self.coeff)
    }

    fn mass(&self, a: f64, b: f64) -> Option<f64> {
        let q = self.p + 1.0;
        if q.abs() < 1e-14 {
            return Some(self.coeff * (b / a).ln());
        }
        let fb = if b.is_infinite() {
            if q < 0.0 {
                0.0
            } else {
                return None;
            }
        } else {
            b.powf(q)
        };
        let fa = if a == 0.0 {
            if q > 0.0 {
                0.0
            } else {
                return None;
            }
        } else {
            a.powf(q)
        };
        Some(self.coeff * (fb - fa) / q)
    }

    fn origin_series(&self, x0: f64, w: Complex64) -> Option<Complex64> {
        // sum_n (-1)^{n+1} w^n x0^{n+p+1} / (n! (n+p+1)); needs p > -2
        if self.p <= -2.0 {
            return None;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut wn = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for n in 1..40 {
            wn *= w * x0;
            fact *= n as f64;
            let e = n as f64 + self.p + 1.0;
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            let term = wn * (sign / (fact * e));
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        Some(sum * self.coeff * x0.powf(self.p + 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogMode {
    /// `coeff / ((-ln x) x^{1+alpha})`
    Reciprocal,
    /// `coeff (-ln x) / x^{1+alpha}`
    Direct,
}

/// Log-corrected power density on a subinterval of `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPowerDensity {
    pub coeff: f64,
    pub alpha: f64,
    pub mode: LogMode,
}

impl SmoothDensity for LogPowerDensity {
    fn value(&self, x: f64) -> f64 {
        let l = -x.ln();
        let base = self.coeff * x.powf(-1.0 - self.alpha);
        match self.mode {
            LogMode::Reciprocal => base / l,
            LogMode::Direct => base * l,
        }
    }

    fn jet(&self, x: f64, order: usize) -> Jet {
        let pow = Jet::power(x, -1.0 - self.alpha, order).scale(self.coeff);
        let l = Jet::ln(x, order).scale(-1.0);
        match self.mode {
            LogMode::Reciprocal => pow.mul(&l.recip()),
            LogMode::Direct => pow.mul(&l),
        }
    }

    fn scale(&self, x: f64) -> f64 {
        x * x.ln().abs().min(1.0)
    }
}

/// `1 - e^{-q}` accurate for small `|q|`.
pub fn one_minus_exp(q: Complex64) -> Complex64 {
    let e = (-q.re).exp();
    let half = 0.5 * q.im;
    let s = half.sin();
    let re = -(-q.re).exp_m1() * q.im.cos() + 2.0 * s * s;
    Complex64::new(re, e * q.im.sin())
}

fn numeric_mass<D: SmoothDensity + ?Sized>(rho: &D, a: f64, b: f64, opts: QuadOptions) -> Integral {
    if let Some(m) = rho.mass(a, b) {
        return Integral { value: m, abs_err: 4.0 * f64::EPSILON * m.abs() };
    }
    integrate(
        |s: f64| {
            let x = s.exp();
            rho.value(x) * x
        },
        a.ln(),
        b.ln(),
        opts,
    )
}

/// Asymptotic expansion of `int_a^b e^{-wx} rho(x) dx`; `None` when the
/// terms do not shrink below `target`.
fn ibp_tail<D: SmoothDensity + ?Sized>(
    rho: &D,
    a: f64,
    b: f64,
    w: Complex64,
    target: f64,
) -> Option<Integral<Complex64>> {
    let ja = rho.jet(a, JET_ORDER);
    let ea = (-w * a).exp();
    let (jb, eb) =
        if b.is_finite() { (Some(rho.jet(b, JET_ORDER)), (-w * b).exp()) } else { (None, Complex64::new(0.0, 0.0)) };
    let winv = w.inv();
    let mut wpow = winv;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 0..JET_ORDER {
        let mut t = ea * ja.derivative(k);
        if let Some(jb) = &jb {
            t -= eb * jb.derivative(k);
        }
        let term = t * wpow;
        let size = term.norm();
        if size > prev {
            return None;
        }
        sum += term;
        if size <= target {
            return Some(Integral { value: sum, abs_err: size });
        }
        prev = size;
        wpow *= winv;
    }
    None
}

fn panel_breaks(a: f64, b: f64, h: f64) -> Vec<f64> {
    let n = ((b - a) / h).ceil().max(1.0) as usize;
    let step = (b - a) / n as f64;
    let mut pts: Vec<f64> = (0..n).map(|i| a + i as f64 * step).collect();
    pts.push(b);
    pts
}

/// `int_lo^hi (1 - e^{-wx}) rho(x) dx` for `Re w >= 0`, `0 <= lo < hi <= inf`.
pub fn transform_integral<D: SmoothDensity + ?Sized>(
    rho: &D,
    lo: f64,
    hi: f64,
    w: Complex64,
    opts: QuadOptions,
) -> Result<Integral<Complex64>> {
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::Domain(format!("bad density support [{lo}, {hi}]")));
    }
    if w.re < -1e-300 || !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::Domain(format!("transform argument needs finite Re w >= 0, got {w}")));
    }
    let m = w.norm();
    if m == 0.0 {
        return Ok(Integral::exact(Complex64::new(0.0, 0.0)));
    }
    let mut total = Integral::<Complex64>::zero();

    // origin piece
    let mut start = lo;
    if lo == 0.0 {
        let x0 = (0.5 / m).min(hi);
        let v = rho.origin_series(x0, w).ok_or_else(|| Error::Domain("density not integrable at the origin".into()))?;
        total = total + Integral { value: v, abs_err: 1e-15 * v.norm() };
        start = x0;
    }
    if start >= hi {
        return Ok(total);
    }

    // smooth piece in log coordinates
    let x1 = (1.0 / m).clamp(start, hi);
    if x1 > start {
        let r = integrate(
            |s: f64| {
                let x = s.exp();
                one_minus_exp(w * x) * (rho.value(x) * x)
            },
            start.ln(),
            x1.ln(),
            opts,
        );
        total = total + r;
    }
    if x1 >= hi {
        return Ok(total);
    }

    // mass minus oscillatory part on [x1, hi]
    total = total + numeric_mass(rho, x1, hi, opts).into_complex();
    let nu = w.im.abs();
    let x2 = (U_ASYM / m).clamp(x1, hi);
    if x2 > x1 {
        let h = if nu > 0.0 { PI / nu } else { x2 - x1 };
        let pts = panel_breaks(x1, x2, h);
        let r: Integral<Complex64> = integrate_with_breaks(|x: f64| (-w * x).exp() * rho.value(x), &pts, opts);
        total.value -= r.value;
        total.abs_err += r.abs_err;
    }
    if x2 < hi {
        let scale_ok = m * rho.scale(x2) >= U_ASYM * (1.0 - 1e-9);
        let target = 1e-14 * total.value.norm().max(f64::MIN_POSITIVE);
        let tail = if scale_ok { ibp_tail(rho, x2, hi, w, target) } else { None };
        let tail = match tail {
            Some(t) => t,
            None => {
                if !hi.is_finite() {
                    return Err(Error::Domain("asymptotic tail failed on unbounded support".into()));
                }
                let h = if nu > 0.0 { PI / nu } else { hi - x2 };
                if (hi - x2) / h > MAX_PANELS as f64 {
                    return Err(Error::Domain(format!("oscillatory range too long for panel quadrature (w = {w})")));
                }
                let pts = panel_breaks(x2, hi, h);
                integrate_with_breaks(|x: f64| (-w * x).exp() * rho.value(x), &pts, opts)
            }
        };
        total.value -= tail.value;
        total.abs_err += tail.abs_err;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute<D: SmoothDensity>(rho: &D, lo: f64, hi: f64, w: Complex64, n: usize) -> Complex64 {
        // midpoint rule in ln x, independent of the region split
        let (a, b) = (lo.ln(), hi.ln());
        let h = (b - a) / n as f64;
        (0..n)
            .map(|i| {
                let x = (a + (i as f64 + 0.5) * h).exp();
                (Complex64::new(1.0, 0.0) - (-w * x).exp()) * rho.value(x) * x * h
            })
            .sum()
    }

    #[test]
    fn one_minus_exp_small_and_large() {
        let q = Complex64::new(1e-9, 2e-9);
        let v = one_minus_exp(q);
        assert!((v - q).norm() < 1e-17);
        let q = Complex64::new(0.3, 2.0);
        assert!((one_minus_exp(q) - (1.0 - (-q).exp())).norm() < 1e-15);
    }

    #[test]
    fn power_band_imaginary_argument() {
        let rho = PowerDensity { coeff: 1.0, p: -1.75 };
        for &z in &[0.5, 30.0, 2000.0] {
            let w = Complex64::new(0.0, -z);
            let got = transform_integral(&rho, 1e-3, 0.7, w, QuadOptions::default()).unwrap();
            let want = brute(&rho, 1e-3, 0.7, w, 1_000_000);
            assert!((got.value - want).norm() < 1e-6 * want.norm(), "z={z} {got:?} {want}");
        }
    }

    #[test]
    fn log_power_matches_brute() {
        for mode in [LogMode::Reciprocal, LogMode::Direct] {
            let rho = LogPowerDensity { coeff: 1.0, alpha: 0.75, mode };
            for &z in &[3.0, 400.0, 50_000.0] {
                let w = Complex64::new(0.0, -z);
                let got = transform_integral(&rho, 1e-6, 0.5, w, QuadOptions::default()).unwrap();
                let want = brute(&rho, 1e-6, 0.5, w, 2_000_000);
                assert!((got.value - want).norm() < 1e-5 * want.norm(), "{mode:?} z={z}");
            }
        }
    }

    #[test]
    fn stable_laplace_closed_form() {
        use statrs::function::gamma::gamma;
        let a = 0.6;
        let rho = PowerDensity { coeff: 1.0, p: -1.0 - a };
        for &s in &[1e-3, 1.0, 250.0] {
            let got = transform_integral(&rho, 0.0, f64::INFINITY, Complex64::new(s, 0.0), QuadOptions::default())
                .unwrap()
                .value;
            let want = gamma(1.0 - a) / a * s.powf(a);
            assert!((got.re / want - 1.0).abs() < 1e-9, "s={s}");
            assert!(got.im.abs() < 1e-12 * want);
        }
    }

    #[test]
    fn complex_argument_stable_matches_principal_power() {
        use statrs::function::gamma::gamma;
        let a = 0.4;
        let rho = PowerDensity { coeff: 1.0, p: -1.0 - a };
        let w = Complex64::new(2.0, -7.0);
        let got = transform_integral(&rho, 0.0, f64::INFINITY, w, QuadOptions::default()).unwrap().value;
        let want = w.powf(a) * (gamma(1.0 - a) / a);
        assert!((got - want).norm() < 1e-9 * want.norm());
    }

    #[test]
    fn zero_argument() {
        let rho = PowerDensity { coeff: 1.0, p: -1.5 };
        let v = transform_integral(&rho, 0.1, 1.0, Complex64::new(0.0, 0.0), QuadOptions::default()).unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
    }
}
