//! Levy measures built from components, and the Levy-Khintchine exponent.
//!
//! Conventions. General form:
//! `psi(z) = i a z + Q z^2 / 2 + int (1 - e^{izx} + izx 1{|x|<1}) mu(dx)`.
//! Drift form (subordinators): `psi(z) = -i d z + int (1 - e^{izx}) mu(dx)`.
//!
//! `ExponentValue::im_signed` stores `-Im psi`, so that for a measure on
//! `(0, inf)` without linear term it equals `S(z) = int sin(zx) mu(dx)`.
//! Every condition downstream uses `|im_signed|` only.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{transform_integral, LogMode, LogPowerDensity, PowerDensity, SmoothDensity};
use crate::error::{Error, Result};
use crate::kernel::{kernel_table, OscKind};
use crate::quad::{integrate, Integral, QuadOptions};

/// Which half-line(s) a component charges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Positive,
    Negative,
    /// The same density on both half-lines.
    Symmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `coeff x^{-1-alpha}` on `(lower, upper)`. `lower = 0` is allowed for
    /// `alpha < 1`.
    PowerBand {
        coeff: f64,
        alpha: f64,
        lower: f64,
        upper: f64,
    },
    /// `coeff x^{-1-alpha}` on `(0, inf)`, `alpha < 1`.
    StableTail {
        coeff: f64,
        alpha: f64,
    },
    LogPowerBand {
        coeff: f64,
        alpha: f64,
        lower: f64,
        upper: f64,
        mode: LogMode,
    },
    Atoms {
        atoms: Vec<(f64, f64)>,
    },
    /// Piecewise power law through `(knots[i], values[i])`.
    Tabulated {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureComponent {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub side: Side,
}

/// Contribution of a component or of a whole exponent at one `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ExponentValue {
    pub re: f64,
    pub im_signed: f64,
    pub abs_err: f64,
}

impl ExponentValue {
    pub const ZERO: ExponentValue = ExponentValue { re: 0.0, im_signed: 0.0, abs_err: 0.0 };

    pub fn add(self, o: ExponentValue) -> ExponentValue {
        ExponentValue { re: self.re + o.re, im_signed: self.im_signed + o.im_signed, abs_err: self.abs_err + o.abs_err }
    }

    /// `A = 1 + Re psi`.
    pub fn a(&self) -> f64 {
        1.0 + self.re
    }

    /// `B = |1 + psi|`.
    pub fn b(&self) -> f64 {
        (1.0 + self.re).hypot(self.im_signed)
    }

    /// `psi` itself under the exact sign convention.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re, -self.im_signed)
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions::rel(1e-11)
}

fn log_power_between(coeff: f64, p: f64, a: f64, b: f64) -> f64 {
    PowerDensity { coeff, p }.mass(a, b).unwrap_or(f64::INFINITY)
}

/// Segments of a tabulated density as power laws `(lo, hi, density)`.
fn tabulated_segments(knots: &[f64], values: &[f64]) -> Vec<(f64, f64, PowerDensity)> {
    knots
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[0] > 0.0 && v[1] > 0.0)
        .map(|(x, v)| {
            let p = (v[1] / v[0]).ln() / (x[1] / x[0]).ln();
            (x[0], x[1], PowerDensity { coeff: v[0] * x[0].powf(-p), p })
        })
        .collect()
}

impl MeasureComponent {
    pub fn new(family: Family) -> MeasureComponent {
        MeasureComponent { family, side: Side::Positive }
    }

    pub fn power_band(coeff: f64, alpha: f64, lower: f64, upper: f64) -> MeasureComponent {
        Self::new(Family::PowerBand { coeff, alpha, lower, upper })
    }

    pub fn stable_tail(coeff: f64, alpha: f64) -> MeasureComponent {
        Self::new(Family::StableTail { coeff, alpha })
    }

    pub fn log_power_band(coeff: f64, alpha: f64, lower: f64, upper: f64, mode: LogMode) -> MeasureComponent {
        Self::new(Family::LogPowerBand { coeff, alpha, lower, upper, mode })
    }

    pub fn atoms(atoms: Vec<(f64, f64)>) -> MeasureComponent {
        Self::new(Family::Atoms { atoms })
    }

    pub fn tabulated(knots: Vec<f64>, values: Vec<f64>) -> MeasureComponent {
        Self::new(Family::Tabulated { knots, values })
    }

    pub fn with_side(mut self, side: Side) -> MeasureComponent {
        self.side = side;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidComponent(m));
        let pos = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidComponent(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match &self.family {
            Family::PowerBand { coeff, alpha, lower, upper } => {
                pos("coeff", *coeff)?;
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return bad(format!("alpha must lie in (0,2), got {alpha}"));
                }
                if !(*lower >= 0.0 && lower < upper && upper.is_finite()) {
                    return bad(format!("need 0 <= lower < upper < inf, got ({lower}, {upper})"));
                }
                if *lower == 0.0 && *alpha >= 1.0 {
                    return bad("lower = 0 requires alpha < 1".into());
                }
            }
            Family::StableTail { coeff, alpha } => {
                pos("coeff", *coeff)?;
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return bad(format!("stable tail alpha must lie in (0,1), got {alpha}"));
                }
            }
            Family::LogPowerBand { coeff, alpha, lower, upper, .. } => {
                pos("coeff", *coeff)?;
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return bad(format!("alpha must lie in (0,1), got {alpha}"));
                }
                if !(*lower > 0.0 && lower < upper && *upper < 1.0) {
                    return bad(format!("need 0 < lower < upper < 1, got ({lower}, {upper})"));
                }
            }
            Family::Atoms { atoms } => {
                for &(x, m) in atoms {
                    pos("atom location", x)?;
                    pos("atom mass", m)?;
                }
            }
            Family::Tabulated { knots, values } => {
                if knots.len() < 2 || knots.len() != values.len() {
                    return bad("tabulated density needs >= 2 knots and one value per knot".into());
                }
                if knots[0] <= 0.0 || knots.windows(2).any(|w| w[1] <= w[0]) || !knots[knots.len() - 1].is_finite() {
                    return bad("knots must be positive, finite and strictly increasing".into());
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return bad("tabulated values must be nonnegative".into());
                }
            }
        }
        Ok(())
    }

    /// Whether the component has infinite mass accumulating at 0.
    pub fn accumulates_at_zero(&self) -> bool {
        match &self.family {
            Family::PowerBand { lower, .. } => *lower == 0.0,
            Family::StableTail { .. } => true,
            _ => false,
        }
    }

    /// Smallest and largest point of the support on one half-line.
    pub fn support(&self) -> (f64, f64) {
        match &self.family {
            Family::PowerBand { lower, upper, .. } | Family::LogPowerBand { lower, upper, .. } => (*lower, *upper),
            Family::StableTail { .. } => (0.0, f64::INFINITY),
            Family::Atoms { atoms } => {
                atoms.iter().fold((f64::INFINITY, 0.0), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)))
            }
            Family::Tabulated { knots, .. } => (knots[0], knots[knots.len() - 1]),
        }
    }

    fn side_factor(&self) -> f64 {
        if self.side == Side::Symmetric {
            2.0
        } else {
            1.0
        }
    }

    fn odd_factor(&self) -> f64 {
        match self.side {
            Side::Positive => 1.0,
            Side::Negative => -1.0,
            Side::Symmetric => 0.0,
        }
    }

    /// `int x^k` over `a <= x < b` on one half-line, `k` in {0, 1}.
    fn half_moment(&self, k: i32, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let kf = k as f64;
        match &self.family {
            Family::PowerBand { coeff, alpha, lower, upper } => {
                let (lo, hi) = (a.max(*lower), b.min(*upper));
                if hi <= lo {
                    0.0
                } else {
                    log_power_between(*coeff, kf - 1.0 - alpha, lo, hi)
                }
            }
            Family::StableTail { coeff, alpha } => log_power_between(*coeff, kf - 1.0 - alpha, a, b),
            Family::LogPowerBand { coeff, alpha, lower, upper, mode } => {
                let (lo, hi) = (a.max(*lower), b.min(*upper));
                if hi <= lo {
                    return 0.0;
                }
                let rho = LogPowerDensity { coeff: *coeff, alpha: *alpha, mode: *mode };
                integrate(
                    |s: f64| {
                        let x = s.exp();
                        rho.value(x) * x.powi(k + 1)
                    },
                    lo.ln(),
                    hi.ln(),
                    QuadOptions::rel(1e-13),
                )
                .value
            }
            Family::Atoms { atoms } => {
                atoms.iter().filter(|(x, _)| *x >= a && *x < b).map(|(x, m)| m * x.powi(k)).sum()
            }
            Family::Tabulated { knots, values } => tabulated_segments(knots, values)
                .iter()
                .map(|(lo, hi, d)| {
                    let (lo, hi) = (a.max(*lo), b.min(*hi));
                    if hi <= lo {
                        0.0
                    } else {
                        log_power_between(d.coeff, d.p + kf, lo, hi)
                    }
                })
                .sum(),
        }
    }

    /// `mu({a <= |x| < b})` for this component.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.side_factor() * self.half_moment(0, a, b)
    }

    /// `int_{a <= |x| < b} x mu(dx)`.
    pub fn first_moment_between(&self, a: f64, b: f64) -> f64 {
        self.odd_factor() * self.half_moment(1, a, b)
    }

    /// The component restricted to `|x| < delta`, or `None` if nothing is left.
    pub fn restricted_below(&self, delta: f64) -> Option<MeasureComponent> {
        let (lo, hi) = self.support();
        if lo >= delta {
            return None;
        }
        if hi < delta {
            return Some(self.clone());
        }
        let family = match &self.family {
            Family::PowerBand { coeff, alpha, lower, .. } => {
                Family::PowerBand { coeff: *coeff, alpha: *alpha, lower: *lower, upper: delta }
            }
            Family::StableTail { coeff, alpha } => {
                Family::PowerBand { coeff: *coeff, alpha: *alpha, lower: 0.0, upper: delta }
            }
            Family::LogPowerBand { coeff, alpha, lower, mode, .. } => {
                Family::LogPowerBand { coeff: *coeff, alpha: *alpha, lower: *lower, upper: delta, mode: *mode }
            }
            Family::Atoms { atoms } => {
                Family::Atoms { atoms: atoms.iter().copied().filter(|(x, _)| *x < delta).collect() }
            }
            Family::Tabulated { knots, values } => {
                let mut ks = Vec::new();
                let mut vs = Vec::new();
                for (i, (&x, &v)) in knots.iter().zip(values).enumerate() {
                    if x < delta {
                        ks.push(x);
                        vs.push(v);
                    } else {
                        // interpolate the cut point on segment i-1 -> i
                        let (x0, v0) = (knots[i - 1], values[i - 1]);
                        let vd = if v0 > 0.0 && v > 0.0 {
                            v0 * (delta / x0).powf((v / v0).ln() / (x / x0).ln())
                        } else {
                            0.0
                        };
                        ks.push(delta);
                        vs.push(vd);
                        break;
                    }
                }
                if ks.len() < 2 {
                    return None;
                }
                Family::Tabulated { knots: ks, values: vs }
            }
        };
        Some(MeasureComponent { family, side: self.side })
    }

    /// `int_0^inf (1 - e^{-wx}) nu(dx)` for the one-sided density `nu` of
    /// this component, `Re w >= 0`.
    pub fn half_transform(&self, w: Complex64) -> Result<Integral<Complex64>> {
        let opts = quad_opts();
        match &self.family {
            Family::PowerBand { coeff, alpha, lower, upper } => {
                transform_integral(&PowerDensity { coeff: *coeff, p: -1.0 - alpha }, *lower, *upper, w, opts)
            }
            Family::StableTail { coeff, alpha } => {
                transform_integral(&PowerDensity { coeff: *coeff, p: -1.0 - alpha }, 0.0, f64::INFINITY, w, opts)
            }
            Family::LogPowerBand { coeff, alpha, lower, upper, mode } => transform_integral(
                &LogPowerDensity { coeff: *coeff, alpha: *alpha, mode: *mode },
                *lower,
                *upper,
                w,
                opts,
            ),
            Family::Atoms { atoms } => {
                let v: Complex64 = atoms.iter().map(|&(x, m)| crate::density::one_minus_exp(w * x) * m).sum();
                Ok(Integral { value: v, abs_err: 4.0 * f64::EPSILON * v.norm() })
            }
            Family::Tabulated { knots, values } => {
                let mut acc = Integral::<Complex64>::zero();
                for (lo, hi, d) in tabulated_segments(knots, values) {
                    acc = acc + transform_integral(&d, lo, hi, w, opts)?;
                }
                Ok(acc)
            }
        }
    }

    /// `(int (1 - cos zx) nu(dx), int sin(zx) nu(dx))` over one half-line, `z > 0`.
    fn half_exponent(&self, z: f64) -> Result<ExponentValue> {
        match &self.family {
            Family::PowerBand { coeff, alpha, lower, upper } => {
                let tab = kernel_table(*alpha)?;
                let scale = coeff * z.powf(*alpha);
                let c = tab.increment(OscKind::Cos, z * lower, z * upper)?;
                let s = tab.increment(OscKind::Sin, z * lower, z * upper)?;
                Ok(ExponentValue {
                    re: scale * c.value,
                    im_signed: scale * s.value,
                    abs_err: scale * (c.abs_err + s.abs_err),
                })
            }
            Family::StableTail { coeff, alpha } => {
                let tab = kernel_table(*alpha)?;
                let scale = coeff * z.powf(*alpha);
                let c = tab.value(OscKind::Cos, f64::INFINITY)?;
                let s = tab.value(OscKind::Sin, f64::INFINITY)?;
                Ok(ExponentValue { re: scale * c, im_signed: scale * s, abs_err: 1e-13 * scale * (c + s.abs()) })
            }
            _ => {
                let v = self.half_transform(Complex64::new(0.0, -z))?;
                Ok(ExponentValue { re: v.value.re, im_signed: -v.value.im, abs_err: v.abs_err })
            }
        }
    }
}

/// Contribution `int (1 - e^{izx}) comp(dx)` at `z`, with `im_signed = int sin(zx) comp(dx)`.
pub fn band_exponent(z: f64, comp: &MeasureComponent) -> Result<ExponentValue> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("z must be finite, got {z}")));
    }
    if z == 0.0 {
        return Ok(ExponentValue::ZERO);
    }
    let h = comp.half_exponent(z.abs())?;
    let sign = z.signum() * comp.odd_factor();
    let f = comp.side_factor();
    Ok(ExponentValue { re: f * h.re, im_signed: sign * h.im_signed, abs_err: f * h.abs_err })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    #[default]
    General,
    Drift,
}

/// One-dimensional characteristic triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyTriplet {
    /// `a` in general form, `d` in drift form.
    pub linear: f64,
    pub gaussian: f64,
    pub measure: Vec<MeasureComponent>,
    pub form: Form,
}

impl LevyTriplet {
    pub fn general(linear: f64, gaussian: f64, measure: Vec<MeasureComponent>) -> LevyTriplet {
        LevyTriplet { linear, gaussian, measure, form: Form::General }
    }

    pub fn drift(d: f64, measure: Vec<MeasureComponent>) -> LevyTriplet {
        LevyTriplet { linear: d, gaussian: 0.0, measure, form: Form::Drift }
    }

    pub fn zero() -> LevyTriplet {
        LevyTriplet::general(0.0, 0.0, Vec::new())
    }

    pub fn dimension(&self) -> usize {
        1
    }

    pub fn validate(&self) -> Result<()> {
        if !self.linear.is_finite() {
            return Err(Error::InvalidTriplet("linear term must be finite".into()));
        }
        if !(self.gaussian >= 0.0 && self.gaussian.is_finite()) {
            return Err(Error::InvalidTriplet("gaussian coefficient must be >= 0".into()));
        }
        for c in &self.measure {
            c.validate()?;
        }
        if self.form == Form::Drift {
            if self.gaussian != 0.0 {
                return Err(Error::InvalidTriplet("drift form requires gaussian = 0".into()));
            }
            if self.measure.iter().any(|c| c.side != Side::Positive) {
                return Err(Error::InvalidTriplet("drift form requires a measure on (0, inf)".into()));
            }
        }
        Ok(())
    }

    pub fn is_subordinator(&self) -> bool {
        self.form == Form::Drift && self.linear >= 0.0
    }

    pub fn total_mass_between(&self, a: f64, b: f64) -> f64 {
        self.measure.iter().map(|c| c.mass_between(a, b)).sum()
    }

    /// `int_{|x|<1} x mu(dx)`.
    pub fn small_jump_mean(&self) -> f64 {
        self.measure.iter().map(|c| c.first_moment_between(0.0, 1.0)).sum()
    }

    /// The same process written in general form (`a = -d - int_{|x|<1} x mu`).
    pub fn to_general(&self) -> LevyTriplet {
        match self.form {
            Form::General => self.clone(),
            Form::Drift => LevyTriplet::general(-self.linear - self.small_jump_mean(), 0.0, self.measure.clone()),
        }
    }
}

/// `psi(z)` as (Re psi, -Im psi) with accumulated error.
pub fn eval_psi(triplet: &LevyTriplet, z: f64) -> Result<ExponentValue> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("z must be finite, got {z}")));
    }
    if z == 0.0 {
        return Ok(ExponentValue::ZERO);
    }
    let za = z.abs();
    let mut acc = ExponentValue::ZERO;
    for c in &triplet.measure {
        acc = acc.add(band_exponent(za, c)?);
    }
    match triplet.form {
        Form::General => {
            acc.re += 0.5 * triplet.gaussian * za * za;
            let m1 = triplet.small_jump_mean();
            acc.im_signed -= za * (triplet.linear + m1);
            acc.abs_err += 1e-13 * za * m1.abs();
        }
        Form::Drift => acc.im_signed += triplet.linear * za,
    }
    if !(acc.re.is_finite() && acc.im_signed.is_finite()) {
        return Err(Error::Overflow(format!("exponent not representable at z = {z}")));
    }
    if z < 0.0 {
        acc.im_signed = -acc.im_signed;
    }
    Ok(acc)
}

/// `eval_psi` over a grid, in parallel, results in grid order.
pub fn eval_grid(triplet: &LevyTriplet, zgrid: &[f64]) -> Result<Vec<ExponentValue>> {
    use rayon::prelude::*;
    zgrid.par_iter().map(|&z| eval_psi(triplet, z)).collect()
}

/// `(A, B) = (1 + Re psi, |1 + psi|)`.
pub fn ab(triplet: &LevyTriplet, z: f64) -> Result<(f64, f64)> {
    let v = eval_psi(triplet, z)?;
    Ok((v.a(), v.b()))
}

/// `d s + int (1 - e^{-sx}) mu(dx)` for a drift-form triplet.
pub fn laplace_exponent(triplet: &LevyTriplet, s: f64) -> Result<f64> {
    if triplet.form != Form::Drift {
        return Err(Error::Domain("laplace exponent needs a drift-form triplet".into()));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("laplace argument must be positive, got {s}")));
    }
    let mut acc = triplet.linear * s;
    for c in &triplet.measure {
        acc += c.half_transform(Complex64::new(s, 0.0))?.value.re;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn brute_half(rho: impl Fn(f64) -> f64, lo: f64, hi: f64, z: f64, n: usize) -> (f64, f64) {
        let (a, b) = (lo.ln(), hi.ln());
        let h = (b - a) / n as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..n {
            let x = (a + (i as f64 + 0.5) * h).exp();
            let w = rho(x) * x * h;
            let s = (0.5 * z * x).sin();
            re += 2.0 * s * s * w;
            im += (z * x).sin() * w;
        }
        (re, im)
    }

    #[test]
    fn zero_at_origin() {
        let c = MeasureComponent::stable_tail(1.0, 0.5);
        assert_eq!(band_exponent(0.0, &c).unwrap(), ExponentValue::ZERO);
        let t = LevyTriplet::general(0.0, 1.0, vec![c]);
        assert_eq!(eval_psi(&t, 0.0).unwrap(), ExponentValue::ZERO);
    }

    #[test]
    fn stable_phase_ratio() {
        for &a in &[0.3, 0.5, 0.75] {
            let c = MeasureComponent::stable_tail(1.0, a);
            for &z in &[0.01, 1.0, 1e4] {
                let v = band_exponent(z, &c).unwrap();
                assert!((v.im_signed / v.re - (PI * a / 2.0).tan()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn counterexample_first_band_bounds() {
        let n = 64.0f64;
        let a = 0.75;
        let c = MeasureComponent::power_band(1.0, a, 1.0 / (2.0 * n * n), 1.0 / (n * n));
        let v = band_exponent(n, &c).unwrap();
        assert!(v.re <= 2.0 * n.powf(2.0 * a - 2.0) / (2.0 - a));
        assert!(v.im_signed >= n.powf(2.0 * a - 1.0) / 8.0);
        let (re, im) = brute_half(|x| x.powf(-1.0 - a), 1.0 / (2.0 * n * n), 1.0 / (n * n), n, 1_000_000);
        assert!((v.re / re - 1.0).abs() < 1e-6);
        assert!((v.im_signed / im - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sides() {
        let c = MeasureComponent::power_band(1.0, 0.7, 0.01, 2.0);
        let p = band_exponent(5.0, &c).unwrap();
        let n = band_exponent(5.0, &c.clone().with_side(Side::Negative)).unwrap();
        let s = band_exponent(5.0, &c.clone().with_side(Side::Symmetric)).unwrap();
        assert_eq!(n.re, p.re);
        assert_eq!(n.im_signed, -p.im_signed);
        assert_eq!(s.re, 2.0 * p.re);
        assert_eq!(s.im_signed, 0.0);
    }

    #[test]
    fn conjugate_symmetry() {
        let t = LevyTriplet::general(
            0.3,
            0.2,
            vec![
                MeasureComponent::power_band(1.0, 1.3, 0.01, 3.0),
                MeasureComponent::atoms(vec![(0.5, 2.0), (4.0, 1.0)]).with_side(Side::Negative),
            ],
        );
        for &z in &[0.1, 7.0, 300.0] {
            let p = eval_psi(&t, z).unwrap();
            let m = eval_psi(&t, -z).unwrap();
            assert_eq!(p.re, m.re);
            assert_eq!(p.im_signed, -m.im_signed);
        }
    }

    #[test]
    fn atoms_exact() {
        let c = MeasureComponent::atoms(vec![(0.5, 2.0)]);
        let v = band_exponent(3.0, &c).unwrap();
        assert!((v.re - 2.0 * (1.0 - 1.5f64.cos())).abs() < 1e-15);
        assert!((v.im_signed - 2.0 * 1.5f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn tabulated_power_law_matches_band() {
        let a = 0.6;
        let knots: Vec<f64> = vec![0.001, 0.01, 0.1, 1.0];
        let values: Vec<f64> = knots.iter().map(|x: &f64| x.powf(-1.0 - a)).collect();
        let t = MeasureComponent::tabulated(knots, values);
        let b = MeasureComponent::power_band(1.0, a, 0.001, 1.0);
        for &z in &[2.0, 900.0] {
            let u = band_exponent(z, &t).unwrap();
            let v = band_exponent(z, &b).unwrap();
            assert!((u.re / v.re - 1.0).abs() < 1e-8);
            assert!((u.im_signed / v.im_signed - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn drift_and_general_forms_agree() {
        let mu = vec![MeasureComponent::power_band(2.0, 0.6, 0.0, 0.4), MeasureComponent::atoms(vec![(2.0, 0.5)])];
        let d = LevyTriplet::drift(0.7, mu);
        let g = d.to_general();
        for &z in &[0.3, 11.0, 500.0] {
            let u = eval_psi(&d, z).unwrap();
            let v = eval_psi(&g, z).unwrap();
            assert!((u.re - v.re).abs() < 1e-12 * u.re.abs().max(1.0));
            assert!((u.im_signed - v.im_signed).abs() < 1e-10 * u.im_signed.abs().max(1.0));
        }
    }

    #[test]
    fn pure_drift_laplace() {
        let t = LevyTriplet::drift(1.0, vec![]);
        assert_eq!(laplace_exponent(&t, 3.5).unwrap(), 3.5);
        assert!(laplace_exponent(&t, 0.0).is_err());
    }

    #[test]
    fn mass_and_moment() {
        let c = MeasureComponent::power_band(1.0, 0.5, 0.25, 4.0);
        // int_{0.25}^{1} x^{-1.5} = 2(2 - 1) = 2
        assert!((c.mass_between(0.0, 1.0) - 2.0).abs() < 1e-14);
        let r = c.restricted_below(1.0).unwrap();
        assert!((r.mass_between(0.0, f64::INFINITY) - 2.0).abs() < 1e-14);
        assert!(c.restricted_below(0.2).is_none());
    }

    #[test]
    fn validation() {
        assert!(MeasureComponent::power_band(1.0, 1.2, 0.0, 1.0).validate().is_err());
        assert!(MeasureComponent::stable_tail(1.0, 1.2).validate().is_err());
        assert!(MeasureComponent::log_power_band(1.0, 0.5, 0.1, 1.5, LogMode::Direct).validate().is_err());
        assert!(MeasureComponent::tabulated(vec![1.0, 0.5], vec![1.0, 1.0]).validate().is_err());
        let d = LevyTriplet::drift(0.0, vec![MeasureComponent::stable_tail(1.0, 0.5).with_side(Side::Negative)]);
        assert!(d.validate().is_err());
    }
}
