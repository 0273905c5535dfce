//! Two-scale time coordinates.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `(day, fast step)` coordinate. Field order gives the lexicographic order.
///
/// Step `M + 1` is the fictitious end-of-day step at which slow (renewal)
/// decisions are taken. Day `D + 1` only exists at step 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwoScaleIndex {
    pub day: usize,
    pub step: usize,
}

impl TwoScaleIndex {
    /// Checked constructor for a horizon of `last_day + 1` days with
    /// `last_step + 1` fast steps each.
    pub fn new(day: usize, step: usize, last_day: usize, last_step: usize) -> Result<Self> {
        let valid = if day <= last_day {
            step <= last_step + 1
        } else {
            day == last_day + 1 && step == 0
        };
        if !valid {
            return Err(Error::InvalidIndex { day, step });
        }
        Ok(Self { day, step })
    }
}

pub fn lex_compare(a: TwoScaleIndex, b: TwoScaleIndex) -> Ordering {
    a.day.cmp(&b.day).then(a.step.cmp(&b.step))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ix(day: usize, step: usize) -> TwoScaleIndex {
        TwoScaleIndex { day, step }
    }

    #[test]
    fn lexicographic_examples() {
        assert_eq!(lex_compare(ix(3, 5), ix(4, 0)), Ordering::Less);
        assert_eq!(lex_compare(ix(2, 7), ix(2, 7)), Ordering::Equal);
        assert_eq!(lex_compare(ix(5, 48), ix(5, 3)), Ordering::Greater);
    }

    #[test]
    fn derived_order_agrees() {
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        assert_eq!(ix(a, b).cmp(&ix(c, d)), lex_compare(ix(a, b), ix(c, d)));
                    }
                }
            }
        }
    }

    #[test]
    fn index_validation() {
        assert!(TwoScaleIndex::new(3, 48, 3, 47).is_ok());
        assert!(TwoScaleIndex::new(3, 49, 3, 47).is_err());
        assert!(TwoScaleIndex::new(4, 0, 3, 47).is_ok());
        assert!(TwoScaleIndex::new(4, 1, 3, 47).is_err());
        assert!(TwoScaleIndex::new(5, 0, 3, 47).is_err());
    }
}
