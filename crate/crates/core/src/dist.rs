//! Finite-support probability laws.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;

/// Tolerance on the total mass.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistRepr<T>", into = "DistRepr<T>")]
#[serde(bound(
    serialize = "T: Serialize + Clone",
    deserialize = "T: Deserialize<'de>"
))]
pub struct DiscreteDist<T = f64> {
    support: Vec<T>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistRepr<T> {
    support: Vec<T>,
    probs: Vec<f64>,
}

impl<T> TryFrom<DistRepr<T>> for DiscreteDist<T> {
    type Error = Error;

    fn try_from(r: DistRepr<T>) -> Result<Self> {
        DiscreteDist::new(r.support, r.probs)
    }
}

impl<T> From<DiscreteDist<T>> for DistRepr<T> {
    fn from(d: DiscreteDist<T>) -> Self {
        DistRepr {
            support: d.support,
            probs: d.probs,
        }
    }
}

impl<T> DiscreteDist<T> {
    pub fn new(support: Vec<T>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} atoms but {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution("negative or non-finite probability".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { support, probs })
    }

    /// Dirac mass.
    pub fn point(v: T) -> Self {
        Self {
            support: vec![v],
            probs: vec![1.0],
        }
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, f64)> {
        self.support.iter().zip(self.probs.iter().copied())
    }

    /// `Σ p_i f(s_i)` under lower addition; zero-probability atoms are skipped.
    pub fn expectation(&self, mut f: impl FnMut(&T) -> ExtReal) -> ExtReal {
        let mut acc = ExtReal::ZERO;
        for (s, p) in self.iter() {
            if p == 0.0 {
                continue;
            }
            acc += f(s).scale(p);
        }
        acc
    }

    /// Index of an atom drawn from the law.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            cum += p;
            if u < cum {
                return i;
            }
        }
        // rounding left a sliver above the last cumulative sum
        self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &T {
        &self.support[self.sample_index(rng)]
    }
}

impl DiscreteDist<f64> {
    pub fn mean(&self) -> f64 {
        self.iter().map(|(s, p)| s * p).sum()
    }

    /// Index of the atom closest to `x` (ties to the smaller index).
    pub fn nearest_atom(&self, x: f64) -> usize {
        let mut best = 0;
        for (i, s) in self.support.iter().enumerate() {
            if (s - x).abs() < (self.support[best] - x).abs() {
                best = i;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn expectation_examples() {
        let d = DiscreteDist::new(vec![1.0, 3.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(d.expectation(|x| ExtReal::new(*x)), ExtReal::new(2.0));

        let d = DiscreteDist::point(0.0);
        assert_eq!(d.expectation(|_| ExtReal::INFINITY), ExtReal::INFINITY);

        let d = DiscreteDist::new(vec!['a', 'b'], vec![0.25, 0.75]).unwrap();
        let v = d.expectation(|c| ExtReal::new(if *c == 'a' { 4.0 } else { 0.0 }));
        assert_eq!(v, ExtReal::new(1.0));
    }

    #[test]
    fn zero_probability_atoms_are_ignored() {
        let d = DiscreteDist::new(vec![0, 1], vec![0.0, 1.0]).unwrap();
        let v = d.expectation(|i| if *i == 0 { ExtReal::NEG_INFINITY } else { ExtReal::new(2.0) });
        assert_eq!(v, ExtReal::new(2.0));
    }

    #[test]
    fn validation() {
        assert!(DiscreteDist::new(Vec::<f64>::new(), vec![]).is_err());
        assert!(DiscreteDist::new(vec![1.0], vec![0.9]).is_err());
        assert!(DiscreteDist::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(DiscreteDist::new(vec![1.0, 2.0], vec![1.5, -0.5]).is_err());
        assert!(DiscreteDist::new(vec![1.0, 2.0], vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn json_round_trip_validates() {
        let d = DiscreteDist::new(vec![1.0, 2.0], vec![0.3, 0.7]).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: DiscreteDist = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<DiscreteDist>(r#"{"support":[1.0],"probs":[0.5]}"#).is_err());
    }

    #[test]
    fn sampling_frequencies() {
        let d = DiscreteDist::new(vec![0.0, 1.0], vec![0.2, 0.8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20_000;
        let ones = (0..n).filter(|_| d.sample_index(&mut rng) == 1).count();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.8).abs() < 0.02, "{freq}");
    }
}
