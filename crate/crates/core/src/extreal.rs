//! Extended reals with Moreau lower addition.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value in `[-inf, +inf]`, stored as an IEEE double that is never NaN.
///
/// `+` is the Moreau lower addition: `(+inf) + (-inf) = -inf`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal(0.0);
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);
    pub const NEG_INFINITY: ExtReal = ExtReal(f64::NEG_INFINITY);

    /// # Panics
    /// If `v` is NaN.
    #[inline]
    pub fn new(v: f64) -> Self {
        assert!(!v.is_nan(), "ExtReal cannot hold NaN");
        ExtReal(v)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    #[inline]
    pub fn is_pos_inf(self) -> bool {
        self.0 == f64::INFINITY
    }

    #[inline]
    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Multiplication by a nonnegative weight, with `0 * (+-inf) = 0`.
    #[inline]
    pub fn scale(self, w: f64) -> Self {
        debug_assert!(w >= 0.0);
        if w == 0.0 {
            ExtReal::ZERO
        } else {
            ExtReal(self.0 * w)
        }
    }

    #[inline]
    pub fn min(self, other: Self) -> Self {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    #[inline]
    pub fn max(self, other: Self) -> Self {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }
}

/// Moreau lower addition.
#[inline]
pub fn low_add(a: ExtReal, b: ExtReal) -> ExtReal {
    if a.0 == f64::NEG_INFINITY || b.0 == f64::NEG_INFINITY {
        ExtReal::NEG_INFINITY
    } else {
        ExtReal(a.0 + b.0)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    #[inline]
    fn add(self, rhs: ExtReal) -> ExtReal {
        low_add(self, rhs)
    }
}

impl AddAssign for ExtReal {
    #[inline]
    fn add_assign(&mut self, rhs: ExtReal) {
        *self = low_add(*self, rhs);
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;

    #[inline]
    fn neg(self) -> ExtReal {
        ExtReal(-self.0)
    }
}

/// `a - b` is `a + (-b)` under lower addition.
impl Sub for ExtReal {
    type Output = ExtReal;

    #[inline]
    fn sub(self, rhs: ExtReal) -> ExtReal {
        low_add(self, -rhs)
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        ExtReal::new(v)
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        // -0.0 and 0.0 compare equal, unlike total_cmp
        self.0.partial_cmp(&other.0).expect("ExtReal is never NaN")
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pos_inf() {
            f.write_str("+inf")
        } else if self.is_neg_inf() {
            f.write_str("-inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_pos_inf() {
            s.serialize_str("inf")
        } else if self.is_neg_inf() {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                if v.is_nan() {
                    return Err(E::custom("NaN is not an extended real"));
                }
                Ok(ExtReal(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v {
                    "inf" | "+inf" => Ok(ExtReal::INFINITY),
                    "-inf" => Ok(ExtReal::NEG_INFINITY),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(ExtVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLASSES: [f64; 5] = [f64::NEG_INFINITY, -2.5, 0.0, 4.0, f64::INFINITY];

    #[test]
    fn lower_addition_examples() {
        assert_eq!(low_add(ExtReal::INFINITY, ExtReal::NEG_INFINITY), ExtReal::NEG_INFINITY);
        assert_eq!(low_add(ExtReal::NEG_INFINITY, ExtReal::INFINITY), ExtReal::NEG_INFINITY);
        assert_eq!(low_add(3.5.into(), 2.5.into()), ExtReal::new(6.0));
        assert_eq!(low_add(ExtReal::INFINITY, 7.0.into()), ExtReal::INFINITY);
        assert_eq!(low_add(ExtReal::INFINITY, ExtReal::INFINITY), ExtReal::INFINITY);
    }

    #[test]
    fn commutative_and_associative_over_sign_classes() {
        for &a in &CLASSES {
            for &b in &CLASSES {
                let (a, b) = (ExtReal::new(a), ExtReal::new(b));
                assert_eq!(a + b, b + a);
                for &c in &CLASSES {
                    let c = ExtReal::new(c);
                    assert_eq!((a + b) + c, a + (b + c), "{a:?} {b:?} {c:?}");
                }
            }
        }
    }

    #[test]
    fn json_sentinels() {
        let v = vec![ExtReal::INFINITY, ExtReal::new(1.5), ExtReal::NEG_INFINITY];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["inf",1.5,"-inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn scale_by_zero_kills_infinity() {
        assert_eq!(ExtReal::INFINITY.scale(0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::INFINITY.scale(0.5), ExtReal::INFINITY);
    }
}
