//! Adaptive Gauss-Kronrod (7/15) quadrature with a global error queue.
//!
//! The error estimate is the usual QUADPACK-style `|K15 - G7|` rescaling.
//! It is an estimate, not a rigorous enclosure, but it is conservative for
//! the smooth, non-oscillatory integrands this crate feeds it (oscillation
//! is removed beforehand by panel alignment or asymptotic expansion).

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Values the integrator can accumulate: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

/// Result of a quadrature: value plus estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T = f64> {
    pub value: T,
    pub abs_err: f64,
}

impl<T: QuadValue> Integral<T> {
    pub fn zero() -> Self {
        Integral { value: T::zero(), abs_err: 0.0 }
    }

    pub fn exact(value: T) -> Self {
        Integral { value, abs_err: 0.0 }
    }
}

impl<T: QuadValue> Add for Integral<T> {
    type Output = Integral<T>;
    fn add(self, rhs: Self) -> Self {
        Integral { value: self.value + rhs.value, abs_err: self.abs_err + rhs.abs_err }
    }
}

impl Integral<f64> {
    pub fn into_complex(self) -> Integral<Complex64> {
        Integral { value: Complex64::new(self.value, 0.0), abs_err: self.abs_err }
    }
}

/// Tolerances and subdivision budget.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 0.0, rel_tol: 1e-11, max_subdivisions: 2000 }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        QuadOptions { rel_tol, ..Default::default() }
    }

    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
pub fn gk15<T, F>(f: &F, a: f64, b: f64) -> Integral<T>
where
    T: QuadValue,
    F: Fn(f64) -> T + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = f_center.norm() * WGK[7];
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        res_k = res_k + sum * WGK[j];
        res_abs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            res_g = res_g + sum * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let ah = half.abs();
    let err = (res_k - res_g).norm() * ah;
    Integral { value: res_k * half, abs_err: rescale_error(err, res_abs * ah, res_asc * ah) }
}

struct Panel<T> {
    a: f64,
    b: f64,
    est: Integral<T>,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.est.abs_err == other.est.abs_err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.est.abs_err.total_cmp(&other.est.abs_err)
    }
}

/// Adaptive integration of `f` over `[a, b]`; `b < a` flips the sign.
pub fn integrate<T, F>(f: F, a: f64, b: f64, opts: QuadOptions) -> Integral<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_with_breaks(f, &[a, b], opts)
}

/// Adaptive integration over consecutive intervals `[p0,p1], [p1,p2], ...`
/// sharing one error budget.
pub fn integrate_with_breaks<T, F>(f: F, points: &[f64], opts: QuadOptions) -> Integral<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut heap = BinaryHeap::new();
    let mut total = Integral::<T>::zero();
    for w in points.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let est = gk15(&f, w[0], w[1]);
        total = total + est;
        heap.push(Panel { a: w[0], b: w[1], est });
    }
    let mut splits = 0;
    while !heap.is_empty() {
        let tol = opts.abs_tol.max(opts.rel_tol * total.value.norm());
        if total.abs_err <= tol || splits >= opts.max_subdivisions {
            break;
        }
        let worst = heap.pop().expect("peeked");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            // interval exhausted at machine resolution; keep its estimate
            heap.push(worst);
            break;
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        total.value = total.value - worst.est.value + left.value + right.value;
        total.abs_err += left.abs_err + right.abs_err - worst.est.abs_err;
        heap.push(Panel { a: worst.a, b: mid, est: left });
        heap.push(Panel { a: mid, b: worst.b, est: right });
        splits += 1;
        if splits % 64 == 0 {
            // resum occasionally to stop cancellation drift
            total.abs_err = heap.iter().map(|p| p.est.abs_err).sum();
        }
    }
    total
}

/// Composite trapezoid rule on given nodes (used by brute-force oracles and
/// for integrands with indicator discontinuities).
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x * x, 0.0, 3.0, QuadOptions::default());
        assert!((r.value - 9.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // int_0^1 x^{-1/2} dx = 2
        let r = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, QuadOptions::rel(1e-10));
        assert!((r.value - 2.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate(|x: f64| x.exp(), 1.0, 0.0, QuadOptions::default());
        assert!((r.value + (std::f64::consts::E - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn complex_integrand() {
        let r = integrate(|x: f64| Complex64::new(0.0, x).exp(), 0.0, std::f64::consts::PI, QuadOptions::default());
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn trapezoid_linear() {
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((trapezoid(&xs, &ys) - 2.0).abs() < 1e-14);
    }
}
