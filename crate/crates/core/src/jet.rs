//! Truncated Taylor series ("jets") used to get high-order derivatives of
//! smooth densities for asymptotic integration by parts.

/// Coefficients `c[k]` of `f(x0 + h) = sum_k c[k] h^k`, truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet(pub Vec<f64>);

impl Jet {
    pub fn constant(v: f64, order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet(c)
    }

    /// `(x0 + h)^p`.
    pub fn power(x0: f64, p: f64, order: usize) -> Jet {
        let mut c = Vec::with_capacity(order + 1);
        let mut coef = x0.powf(p);
        c.push(coef);
        for k in 1..=order {
            coef *= (p - (k as f64 - 1.0)) / (k as f64 * x0);
            c.push(coef);
        }
        Jet(c)
    }

    /// `ln(x0 + h)`.
    pub fn ln(x0: f64, order: usize) -> Jet {
        let mut c = Vec::with_capacity(order + 1);
        c.push(x0.ln());
        let mut pow = 1.0;
        for k in 1..=order {
            pow /= x0;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            c.push(sign * pow / k as f64);
        }
        Jet(c)
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn scale(mut self, s: f64) -> Jet {
        self.0.iter_mut().for_each(|c| *c *= s);
        self
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.0.len().min(other.0.len());
        let mut c = vec![0.0; n];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = (0..=i).map(|j| self.0[j] * other.0[i - j]).sum();
        }
        Jet(c)
    }

    /// `1 / f`, requires `f(x0) != 0`.
    pub fn recip(&self) -> Jet {
        let n = self.0.len();
        let mut c = vec![0.0; n];
        c[0] = 1.0 / self.0[0];
        for i in 1..n {
            let s: f64 = (1..=i).map(|j| self.0[j] * c[i - j]).sum();
            c[i] = -s / self.0[0];
        }
        Jet(c)
    }

    /// `k`-th derivative at the expansion point.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.0[k] * fact
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_derivatives() {
        let j = Jet::power(2.0, -1.5, 4);
        // d/dx x^-1.5 = -1.5 x^-2.5
        assert!((j.derivative(1) + 1.5 * 2f64.powf(-2.5)).abs() < 1e-14);
        assert!((j.derivative(2) - 1.5 * 2.5 * 2f64.powf(-3.5)).abs() < 1e-14);
    }

    #[test]
    fn recip_of_log() {
        // f = 1/ln x at x0 = 0.3; f' = -1/(x ln^2 x)
        let x0 = 0.3f64;
        let j = Jet::ln(x0, 5).recip();
        let expect = -1.0 / (x0 * x0.ln().powi(2));
        assert!((j.derivative(1) - expect).abs() < 1e-12);
    }

    #[test]
    fn product_matches_power_sum() {
        let a = Jet::power(1.7, 0.3, 6);
        let b = Jet::power(1.7, -1.1, 6);
        let c = Jet::power(1.7, -0.8, 6);
        for (x, y) in a.mul(&b).0.iter().zip(c.0.iter()) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
