//! Exact rationals and their `p/q` text form.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use num_rational::BigRational as Rational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `2^-e` exactly.
pub fn pow2_neg(e: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << e)
}

pub fn pow(r: &Rational, k: u32) -> Rational {
    (0..k).fold(one(), |acc, _| acc * r)
}

pub fn abs(r: &Rational) -> Rational {
    r.abs()
}

/// Always `p/q`, reduced, including integers (`1/1`).
pub fn to_text(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse(s: &str) -> Option<Rational> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().ok()?;
    let q: BigInt = q.trim().parse().ok()?;
    (!q.is_zero()).then(|| Rational::new(p, q))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact comparison `r <= x` against a finite real.
pub fn le_real(r: &Rational, x: f64) -> bool {
    match Rational::from_float(x) {
        Some(xr) => *r <= xr,
        None => x == f64::INFINITY,
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_text {
    use super::Rational;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::to_text(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).ok_or_else(|| de::Error::custom(format!("bad rational {s:?}")))
    }

    pub mod vec {
        use super::super::Rational;
        use serde::ser::SerializeSeq;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(rs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(rs.len()))?;
            for r in rs {
                seq.serialize_element(&super::super::to_text(r))?;
            }
            seq.end()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        assert_eq!(to_text(&ratio(120, 512)), "15/64");
        assert_eq!(to_text(&one()), "1/1");
        assert_eq!(parse("7/16"), Some(ratio(7, 16)));
        assert_eq!(parse("3"), Some(from_int(3)));
        assert_eq!(parse("1/0"), None);
    }

    #[test]
    fn real_comparison_is_exact() {
        assert!(le_real(&ratio(7, 16), 2.0 * 2f64.powf(-0.9)));
        assert!(!le_real(&ratio(1, 3), 0.333));
        assert!(le_real(&pow2_neg(3), 0.125));
    }
}
