//! Signed numbers stored as `(sign, log10 |x|)`, for magnitudes far outside
//! the `f64` range (the full-scale construction reaches `10^600` and beyond).

use std::cmp::Ordering;
use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// Serialized as a plain number when it fits in an `f64` (with a margin),
/// otherwise as a string such as `"-3.16227766016838e597"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogReal {
    /// `-1`, `0` or `1`.
    pub sign: i8,
    /// `log10 |x|`; `-inf` for zero.
    pub log10: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { sign: 0, log10: f64::NEG_INFINITY };
    pub const ONE: LogReal = LogReal { sign: 1, log10: 0.0 };

    pub fn from_f64(x: f64) -> LogReal {
        if x == 0.0 {
            LogReal::ZERO
        } else {
            LogReal { sign: if x > 0.0 { 1 } else { -1 }, log10: x.abs().log10() }
        }
    }

    /// Positive number `10^l`.
    pub fn from_log10(l: f64) -> LogReal {
        if l == f64::NEG_INFINITY {
            LogReal::ZERO
        } else {
            LogReal { sign: 1, log10: l }
        }
    }

    /// Nearest `f64`; underflows to 0 and overflows to `+-inf`.
    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * 10f64.powf(self.log10)
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> LogReal {
        if self.sign == 0 {
            self
        } else {
            LogReal { sign: 1, log10: self.log10 }
        }
    }

    pub fn neg(self) -> LogReal {
        LogReal { sign: -self.sign, log10: self.log10 }
    }

    pub fn mul(self, o: LogReal) -> LogReal {
        if self.sign == 0 || o.sign == 0 {
            return LogReal::ZERO;
        }
        LogReal { sign: self.sign * o.sign, log10: self.log10 + o.log10 }
    }

    pub fn div(self, o: LogReal) -> LogReal {
        assert!(o.sign != 0, "LogReal division by zero");
        if self.sign == 0 {
            return LogReal::ZERO;
        }
        LogReal { sign: self.sign * o.sign, log10: self.log10 - o.log10 }
    }

    pub fn scale(self, x: f64) -> LogReal {
        self.mul(LogReal::from_f64(x))
    }

    /// `|x|^p` with the sign dropped.
    pub fn powf(self, p: f64) -> LogReal {
        if self.sign == 0 {
            return if p > 0.0 { LogReal::ZERO } else { LogReal::ONE };
        }
        LogReal { sign: 1, log10: self.log10 * p }
    }

    pub fn add(self, o: LogReal) -> LogReal {
        if self.sign == 0 {
            return o;
        }
        if o.sign == 0 {
            return self;
        }
        let (big, small) = if self.log10 >= o.log10 { (self, o) } else { (o, self) };
        let d = small.log10 - big.log10; // <= 0
        let r = 10f64.powf(d);
        if big.sign == small.sign {
            LogReal { sign: big.sign, log10: big.log10 + r.ln_1p() / std::f64::consts::LN_10 }
        } else if r == 1.0 {
            LogReal::ZERO
        } else {
            LogReal { sign: big.sign, log10: big.log10 + (-r).ln_1p() / std::f64::consts::LN_10 }
        }
    }

    pub fn sub(self, o: LogReal) -> LogReal {
        self.add(o.neg())
    }

    pub fn sqrt(self) -> LogReal {
        assert!(self.sign >= 0, "sqrt of negative LogReal");
        self.powf(0.5)
    }

    /// `ln |x|` as an ordinary float.
    pub fn ln(self) -> f64 {
        self.log10 * std::f64::consts::LN_10
    }

    pub fn total_cmp(&self, o: &LogReal) -> Ordering {
        match self.sign.cmp(&o.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.log10.total_cmp(&o.log10),
                _ => o.log10.total_cmp(&self.log10),
            },
            c => c,
        }
    }

    pub fn max(self, o: LogReal) -> LogReal {
        if self.total_cmp(&o) == Ordering::Less {
            o
        } else {
            self
        }
    }

    pub fn min(self, o: LogReal) -> LogReal {
        if self.total_cmp(&o) == Ordering::Greater {
            o
        } else {
            self
        }
    }
}

impl Serialize for LogReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.sign == 0 || self.log10.abs() < 300.0 {
            s.serialize_f64(self.to_f64())
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for LogReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<LogReal, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(LogReal::from_f64(x)),
            Repr::Text(t) => t.parse().map_err(de::Error::custom),
        }
    }
}

impl std::str::FromStr for LogReal {
    type Err = String;

    /// Accepts `[-]m e E` with an arbitrary integer exponent.
    fn from_str(t: &str) -> std::result::Result<LogReal, String> {
        let t = t.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, t),
        };
        let (m, e) = match body.split_once(['e', 'E']) {
            Some((m, e)) => (m, e),
            None => (body, "0"),
        };
        let m: f64 = m.parse().map_err(|_| format!("bad mantissa in {t:?}"))?;
        let e: f64 = e.parse::<i64>().map_err(|_| format!("bad exponent in {t:?}"))? as f64;
        if m == 0.0 {
            return Ok(LogReal::ZERO);
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(format!("bad mantissa in {t:?}"));
        }
        let v = LogReal { sign: 1, log10: m.log10() + e };
        Ok(if neg { v.neg() } else { v })
    }
}

impl fmt::Display for LogReal {
    /// Scientific notation with 15 significant digits, e.g. `1.23e597`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 0 {
            return write!(f, "0");
        }
        let mut e = self.log10.floor();
        let mut m = 10f64.powf(self.log10 - e);
        if m >= 10.0 {
            m /= 10.0;
            e += 1.0;
        }
        let s = if self.sign < 0 { "-" } else { "" };
        write!(f, "{s}{m:.14}e{}", e as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_arithmetic() {
        let a = LogReal::from_f64(3.0);
        let b = LogReal::from_f64(-5.0);
        assert!((a.add(b).to_f64() + 2.0).abs() < 1e-14);
        assert!((a.mul(b).to_f64() + 15.0).abs() < 1e-13);
        assert!((b.div(a).to_f64() + 5.0 / 3.0).abs() < 1e-14);
        assert!(a.sub(a).is_zero());
    }

    #[test]
    fn huge_values() {
        let x = LogReal::from_log10(600.0);
        let y = x.add(x);
        assert!((y.log10 - (600.0 + 2f64.log10())).abs() < 1e-12);
        assert_eq!(x.to_f64(), f64::INFINITY);
        assert_eq!(format!("{}", LogReal::from_log10(597.5)), "3.16227766016838e597");
    }

    #[test]
    fn serde_forms() {
        let small = LogReal::from_f64(-2.5);
        assert_eq!(serde_json::to_string(&small).unwrap(), "-2.5");
        let big = LogReal::from_log10(597.5).neg();
        let js = serde_json::to_string(&big).unwrap();
        assert_eq!(js, "\"-3.16227766016838e597\"");
        let back: LogReal = serde_json::from_str(&js).unwrap();
        assert!((back.log10 - 597.5).abs() < 1e-13 && back.sign == -1);
        let z: LogReal = serde_json::from_str("0.0").unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn ordering() {
        let a = LogReal::from_f64(-1e300);
        let b = LogReal::from_f64(1e-300);
        assert_eq!(a.total_cmp(&b), Ordering::Less);
        assert_eq!(LogReal::from_f64(2.0).max(LogReal::from_f64(3.0)).to_f64(), 3.0);
    }
}
