//! Big-jump truncation, resolvent comparison and subordination.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::{eval_psi, ExponentValue, Form, LevyTriplet};
use crate::report::{ConditionReport, Sample, Verdict};

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationResult {
    pub truncated: LevyTriplet,
    /// `C`, the mass of jumps with `|x| >= delta`.
    pub removed_mass: f64,
    pub delta: f64,
}

/// Drop jumps of size `>= delta`. In general form the linear term absorbs
/// the removed part of the compensator; the drift form keeps `d` as is.
pub fn truncate(triplet: &LevyTriplet, delta: f64) -> Result<TruncationResult> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let measure: Vec<_> = triplet.measure.iter().filter_map(|c| c.restricted_below(delta)).collect();
    let removed_mass: f64 = triplet.measure.iter().map(|c| c.mass_between(delta, f64::INFINITY)).sum();
    let linear = match triplet.form {
        Form::General if delta < 1.0 => {
            triplet.linear + triplet.measure.iter().map(|c| c.first_moment_between(delta, 1.0)).sum::<f64>()
        }
        _ => triplet.linear,
    };
    let truncated = LevyTriplet { linear, gaussian: triplet.gaussian, measure, form: triplet.form };
    Ok(TruncationResult { truncated, removed_mass, delta })
}

/// `Re 1/(lambda + psi(z))`.
pub fn resolvent_real(triplet: &LevyTriplet, lambda: f64, z: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let v = eval_psi(triplet, z)?;
    Ok(resolvent_from(&v, lambda))
}

fn resolvent_from(v: &ExponentValue, lambda: f64) -> f64 {
    let a = lambda + v.re;
    a / (a * a + v.im_signed * v.im_signed)
}

/// Relative uncertainty of `resolvent_from` caused by `abs_err`.
fn resolvent_rel_err(v: &ExponentValue, lambda: f64) -> f64 {
    let a = lambda + v.re;
    let d = (a * a + v.im_signed * v.im_signed).sqrt();
    v.abs_err * (1.0 / a + 2.0 / d)
}

/// Ratio `Re 1/(lambda+psi) / Re 1/(lambda+psi')` on a grid, where `psi'`
/// drops the jumps of size `>= delta`; it should stay in `[1/4, 4]` once
/// `lambda >= 2C`.
pub fn comparison_margin(triplet: &LevyTriplet, delta: f64, lambda: f64, zgrid: &[f64]) -> Result<ConditionReport> {
    let tr = truncate(triplet, delta)?;
    let c = tr.removed_mass;
    let rows: Vec<(f64, ExponentValue, ExponentValue)> = zgrid
        .par_iter()
        .map(|&z| Ok((z, eval_psi(triplet, z)?, eval_psi(&tr.truncated, z)?)))
        .collect::<Result<_>>()?;
    let mut max_dre = 0.0f64;
    let mut max_dim = 0.0f64;
    let mut aux_c = 0usize;
    let mut aux_2c = 0usize;
    let samples: Vec<Sample> = rows
        .iter()
        .map(|(z, v, w)| {
            let r = resolvent_from(v, lambda) / resolvent_from(w, lambda);
            let err = r * (resolvent_rel_err(v, lambda) + resolvent_rel_err(w, lambda)) + 1e-14 * r;
            let dre = v.re - w.re;
            let dim = v.im_signed.abs() - w.im_signed.abs();
            let tol = v.abs_err + w.abs_err + 1e-13 * (v.re.abs() + w.re.abs() + c);
            if dre.abs() > c + tol || dim.abs() > c + tol || dre < -tol {
                aux_c += 1;
            }
            if dre > 2.0 * c + tol || dim.abs() > c + tol || dre < -tol {
                aux_2c += 1;
            }
            max_dre = max_dre.max(dre.abs());
            max_dim = max_dim.max(dim.abs());
            Sample::new(*z, Some(*v), (r - 0.25).min(4.0 - r), err)
        })
        .collect();
    let applicable = lambda >= 2.0 * c;
    let mut rep = if applicable {
        ConditionReport::from_margins("comparison", samples)
    } else {
        ConditionReport::with_verdict("comparison", samples, Verdict::Inconclusive)
            .note("lambda < 2C: the comparison bound makes no claim here")
    };
    if c == 0.0 {
        rep = rep.note("truncation removed nothing; ratio is identically 1");
    }
    rep = rep
        .metric("removed_mass", c)
        .metric("lambda", lambda)
        .metric("delta", delta)
        .metric("max_abs_delta_re", max_dre)
        .metric("max_abs_delta_abs_im", max_dim)
        .metric("aux_bound_c_violations", aux_c as f64)
        .metric("aux_bound_2c_violations", aux_2c as f64);
    Ok(rep)
}

/// Exponent of a Levy triplet as a complex-valued function (exact sign).
pub fn psi_fn(triplet: &LevyTriplet) -> impl Fn(f64) -> Result<Complex64> + Sync + '_ {
    move |z| eval_psi(triplet, z).map(|v| v.to_complex())
}

/// `z -> int (1 - e^{-phi(z) x}) mu(dx)` for a zero-drift subordinator.
pub struct Subordinated<'a, F> {
    outer: F,
    sub: &'a LevyTriplet,
}

/// Compose an outer exponent with a driftless subordinator.
pub fn subordinate<F>(outer: F, sub: &LevyTriplet) -> Result<Subordinated<'_, F>>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if sub.form != Form::Drift {
        return Err(Error::Domain("subordinator must be given in drift form".into()));
    }
    if sub.linear != 0.0 {
        return Err(Error::Domain(format!("subordinator must have zero drift, got d = {}", sub.linear)));
    }
    sub.validate()?;
    Ok(Subordinated { outer, sub })
}

impl<F> Subordinated<'_, F>
where
    F: Fn(f64) -> Result<Complex64>,
{
    pub fn eval(&self, z: f64) -> Result<ExponentValue> {
        let phi = (self.outer)(z)?;
        if phi.re < 0.0 {
            return Err(Error::Domain(format!("outer exponent has negative real part at z = {z}")));
        }
        let mut acc = crate::quad::Integral::<Complex64>::zero();
        for c in &self.sub.measure {
            acc = acc + c.half_transform(phi)?;
        }
        Ok(ExponentValue { re: acc.value.re, im_signed: -acc.value.im, abs_err: acc.abs_err })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{MeasureComponent, Side};
    use crate::report::log_grid;

    #[test]
    fn general_truncation_adjusts_linear_term() {
        let t = LevyTriplet::general(0.5, 0.0, vec![MeasureComponent::power_band(1.0, 0.5, 0.25, 4.0)]);
        let tr = truncate(&t, 2.0).unwrap();
        assert_eq!(tr.truncated.linear, 0.5);
        let tr = truncate(&t, 0.5).unwrap();
        // int_{0.5}^{1} x^{-0.5} = 2(1 - sqrt(0.5))
        let want = 0.5 + 2.0 * (1.0 - 0.5f64.sqrt());
        assert!((tr.truncated.linear - want).abs() < 1e-14);
        // removed mass int_{0.5}^4 x^{-1.5} = 2(0.5^{-0.5} - 0.5)
        assert!((tr.removed_mass - 2.0 * (2f64.sqrt() - 0.5)).abs() < 1e-13);
    }

    #[test]
    fn vacuous_truncation() {
        let t = LevyTriplet::general(0.0, 0.0, vec![MeasureComponent::power_band(1.0, 0.5, 0.01, 0.2)]);
        let tr = truncate(&t, 1.0).unwrap();
        assert_eq!(tr.truncated, t);
        assert_eq!(tr.removed_mass, 0.0);
        let rep = comparison_margin(&t, 1.0, 1.0, &log_grid(0.1, 100.0, 5)).unwrap();
        assert!(rep.samples.iter().all(|s| (s.margin - 0.75).abs() < 1e-15));
    }

    #[test]
    fn drift_truncation_matches_general() {
        let mu = vec![MeasureComponent::stable_tail(1.0, 0.6), MeasureComponent::atoms(vec![(0.3, 1.0), (2.0, 0.5)])];
        let d = LevyTriplet::drift(0.4, mu);
        let a = truncate(&d, 0.5).unwrap().truncated;
        let b = truncate(&d.to_general(), 0.5).unwrap().truncated;
        for z in log_grid(0.1, 1e3, 4) {
            let u = eval_psi(&a, z).unwrap();
            let v = eval_psi(&b, z).unwrap();
            assert!((u.re - v.re).abs() < 1e-10 * u.re.max(1.0));
            assert!((u.im_signed - v.im_signed).abs() < 1e-10 * u.im_signed.abs().max(1.0));
        }
    }

    #[test]
    fn resolvent_bounds() {
        let t = LevyTriplet::zero();
        assert_eq!(resolvent_real(&t, 2.0, 3.0).unwrap(), 0.5);
        let t =
            LevyTriplet::general(1.0, 0.0, vec![MeasureComponent::stable_tail(1.0, 0.5).with_side(Side::Symmetric)]);
        assert!(resolvent_real(&t, 2.0, 3.0).unwrap() <= 0.5);
    }

    #[test]
    fn subordinate_rejects_drift() {
        let s = LevyTriplet::drift(1.0, vec![]);
        let f = |_z: f64| Ok(Complex64::new(1.0, 0.0));
        assert!(subordinate(f, &s).is_err());
    }

    #[test]
    fn subordinate_zero_outer() {
        let s = LevyTriplet::drift(0.0, vec![MeasureComponent::stable_tail(1.0, 0.5)]);
        let p = subordinate(|_z: f64| Ok(Complex64::new(0.0, 0.0)), &s).unwrap();
        assert_eq!(p.eval(3.0).unwrap(), ExponentValue::ZERO);
    }
}
