//! Arbitrary precision rationals and their string form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.125"` / `"1.5e-3"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..].parse().map_err(|_| bad())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i64;
    if scale.unsigned_abs() > 10_000 {
        return Err(Error::Parse(format!("exponent out of range in {s:?}")));
    }
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Non-authoritative decimal rendering used next to exact values in reports.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // ratio of huge integers: shift both down to a representable range
        let nb = r.numer().bits() as i64;
        let db = r.denom().bits() as i64;
        let shift = (nb.max(db) - 900).max(0) as usize;
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn floor_int(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn ceil_int(r: &Rational) -> BigInt {
    -(-r.numer()).div_floor(r.denom())
}

/// Nearest integer, ties rounded up.
pub fn round_int(r: &Rational) -> BigInt {
    floor_int(&(r + rat(1, 2)))
}

pub fn is_integral(r: &Rational) -> bool {
    r.denom().is_one()
}

/// Largest integer `m` with `m² ≤ r`, for `r ≥ 0`.
pub fn isqrt_floor(r: &Rational) -> BigInt {
    debug_assert!(!r.is_negative());
    floor_int(r).sqrt()
}

/// Whether `r ≥ 0` is the square of a rational; returns the root if so.
pub fn exact_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

pub fn pow(r: &Rational, e: u32) -> Rational {
    num_traits::pow(r.clone(), e as usize)
}

pub mod serde_rational {
    use super::{parse_rational, Rational};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(D::Error::custom)
    }
}

pub mod serde_rational_vec {
    use super::{parse_rational, Rational};
    use serde::{de::Error as _, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&r.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(D::Error::custom))
            .collect()
    }
}

pub mod serde_rational_mat {
    use super::{parse_rational, Rational};
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<Vec<String>> = m
            .iter()
            .map(|row| row.iter().map(|r| r.to_string()).collect())
            .collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let m = Vec::<Vec<String>>::deserialize(d)?;
        m.iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_rational(s).map_err(D::Error::custom))
                    .collect()
            })
            .collect()
    }
}

pub mod serde_opt_rational {
    use super::{parse_rational, Rational};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse_rational(&s).map_err(D::Error::custom))
            .transpose()
    }
}

pub mod serde_bigint_vec {
    use num_bigint::BigInt;
    use serde::{de::Error as _, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&r.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.trim().parse::<BigInt>().map_err(D::Error::custom))
            .collect()
    }
}

pub mod serde_i64_vec {
    use serde::{de::Error as _, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[i64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&r.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<i64>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.trim().parse::<i64>().map_err(D::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("-3/7").unwrap(), rat(-3, 7));
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("-1.5e-2").unwrap(), rat(-3, 200));
        assert_eq!(parse_rational("2E3").unwrap(), int(2000));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn formats_like_p_over_q() {
        assert_eq!(format_rational(&rat(-3, 7)), "-3/7");
        assert_eq!(format_rational(&rat(4, 2)), "2");
    }

    #[test]
    fn rounding_helpers() {
        assert_eq!(floor_int(&rat(-1, 2)), BigInt::from(-1));
        assert_eq!(ceil_int(&rat(-1, 2)), BigInt::from(0));
        assert_eq!(round_int(&rat(5, 2)), BigInt::from(3));
        assert_eq!(round_int(&rat(-5, 2)), BigInt::from(-2));
        assert_eq!(isqrt_floor(&rat(99, 4)), BigInt::from(4));
        assert_eq!(exact_sqrt(&rat(4, 9)), Some(rat(2, 3)));
        assert_eq!(exact_sqrt(&rat(2, 9)), None);
    }
}
