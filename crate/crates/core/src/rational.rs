//! Exact rational numbers and their text form.
//!
//! Rationals are written as `"p/q"` strings, or plain integers when the
//! denominator is one. Parsing additionally accepts decimal literals such
//! as `"0.25"`, which are converted exactly.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `2^e` for a possibly negative exponent.
pub fn pow2(e: i32) -> Rational {
    let base = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(base)
    } else {
        Rational::new(BigInt::one(), base)
    }
}

/// `⌊log₂ q⌋` for a positive rational.
pub fn floor_log2(q: &Rational) -> i64 {
    assert!(q.is_positive(), "floor_log2 of non-positive value");
    let mut e = q.numer().bits() as i64 - q.denom().bits() as i64;
    // 2^(e-1) < q < 2^(e+1) after the bit-length estimate; settle it exactly.
    while pow2(e as i32) > *q {
        e -= 1;
    }
    while pow2(e as i32 + 1) <= *q {
        e += 1;
    }
    e
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `"p/q"`, or `"p"` for integers.
pub fn format(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse(text: &str) -> Result<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Structural("empty rational".into()));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Structural(format!("bad decimal `{text}`")));
        }
        let numer = BigInt::from_str(&digits).map_err(|e| Error::Structural(e.to_string()))?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        let q = Rational::new(numer, denom);
        return Ok(if negative { -q } else { q });
    }
    let q = Rational::from_str(text)
        .map_err(|e| Error::Structural(format!("bad rational `{text}`: {e}")))?;
    Ok(q)
}

/// Serde adapter: rationals as `"p/q"` strings; integers and decimals also
/// accepted on input.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        if q.is_integer() {
            if let Some(v) = q.numer().to_i64() {
                return s.serialize_i64(v);
            }
        }
        s.serialize_str(&format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl Visitor<'_> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("an integer, a decimal, or a \"p/q\" string")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Rational, E> {
            Ok(int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Rational, E> {
            // The shortest decimal that round-trips is what the user wrote.
            parse(&v.to_string()).map_err(E::custom)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Rational, E> {
            parse(v).map_err(E::custom)
        }
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_rational_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for q in v {
            seq.serialize_element(&Wrapped(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let raw: Vec<Owned> = serde::Deserialize::deserialize(d)?;
        Ok(raw.into_iter().map(|o| o.0).collect())
    }

    pub(crate) struct Wrapped<'a>(pub &'a Rational);

    impl Serialize for Wrapped<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            serde_rational::serialize(self.0, s)
        }
    }

    pub(crate) struct Owned(pub Rational);

    impl<'de> serde::Deserialize<'de> for Owned {
        fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
            serde_rational::deserialize(d).map(Owned)
        }
    }
}

/// Serde adapter for `Option<Vec<Rational>>`.
pub mod serde_rational_opt_vec {
    use super::serde_rational_vec::{Owned, Wrapped};
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &Option<Vec<Rational>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(v) => s.collect_seq(v.iter().map(Wrapped)),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
        let raw: Option<Vec<Owned>> = serde::Deserialize::deserialize(d)?;
        Ok(raw.map(|v| v.into_iter().map(|o| o.0).collect()))
    }
}

/// Serde adapter for an optional rational.
pub mod serde_rational_opt {
    use super::serde_rational_vec::{Owned, Wrapped};
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &Option<Rational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(q) => s.serialize_some(&Wrapped(q)),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rational>, D::Error> {
        let raw: Option<Owned> = serde::Deserialize::deserialize(d)?;
        Ok(raw.map(|o| o.0))
    }
}

/// Serde adapter for a square matrix of rationals.
pub mod serde_rational_matrix {
    use super::serde_rational_vec::{Owned, Wrapped};
    use super::*;

    pub fn serialize<S: Serializer>(
        m: &[Vec<Rational>],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(
            m.iter()
                .map(|row| row.iter().map(Wrapped).collect::<Vec<_>>()),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Vec<Rational>>, D::Error> {
        let raw: Vec<Vec<Owned>> = serde::Deserialize::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|row| row.into_iter().map(|o| o.0).collect())
            .collect())
    }
}
