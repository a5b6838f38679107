//! Exact rationals and their `"p/q"` text form.

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serializer};

pub type Rational = Ratio<i64>;

pub fn to_text(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn from_text(s: &str) -> Option<Rational> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: i64 = p.trim().parse().ok()?;
    let q: i64 = q.trim().parse().ok()?;
    (q != 0).then(|| Rational::new(p, q))
}

/// Serde adapter writing a rational as `"p/q"`.
pub mod text {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_text(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        from_text(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s}")))
    }
}

/// Serde adapter for optional rationals (`null` when absent).
pub mod opt_text {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&to_text(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| from_text(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s}"))))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for r in [Rational::new(2, 3), Rational::new(-7, 4), Rational::from_integer(5)] {
            assert_eq!(from_text(&to_text(&r)), Some(r));
        }
        assert_eq!(from_text("3"), Some(Rational::from_integer(3)));
        assert_eq!(from_text("1/0"), None);
    }
}
