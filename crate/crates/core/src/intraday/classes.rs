//! Periodicity classes: days sharing cost, dynamics and noise law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DAYS_PER_YEAR: usize = 365;

/// Day-of-year starts of the four trimesters.
const TRIMESTER_STARTS: [usize; 4] = [0, 90, 181, 273];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassScheme {
    /// Day-of-year blocks repeated every year; trimesters when `I = 4`.
    Trimester,
    /// Explicit list of classes, each a list of days.
    Custom { classes: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicityClassMap {
    /// Class id (1-based) of every day `0..=D`.
    day_class: Vec<usize>,
    /// Representative day of class `i` at position `i - 1`.
    representatives: Vec<usize>,
}

impl PeriodicityClassMap {
    pub fn num_days(&self) -> usize {
        self.day_class.len()
    }

    pub fn num_classes(&self) -> usize {
        self.representatives.len()
    }

    pub fn class_of(&self, day: usize) -> usize {
        self.day_class[day]
    }

    pub fn representative(&self, class: usize) -> usize {
        self.representatives[class - 1]
    }

    pub fn days_of(&self, class: usize) -> impl Iterator<Item = usize> + '_ {
        self.day_class
            .iter()
            .enumerate()
            .filter(move |(_, c)| **c == class)
            .map(|(d, _)| d)
    }

    fn from_day_class(day_class: Vec<usize>, n_classes: usize) -> Result<Self> {
        let mut representatives = vec![usize::MAX; n_classes];
        for (d, c) in day_class.iter().enumerate() {
            let r = &mut representatives[c - 1];
            if *r == usize::MAX {
                *r = d;
            }
        }
        if let Some(i) = representatives.iter().position(|r| *r == usize::MAX) {
            return Err(Error::InvalidClasses(format!("class {} has no day", i + 1)));
        }
        Ok(Self {
            day_class,
            representatives,
        })
    }
}

fn day_of_year_class(doy: usize, n_classes: usize) -> usize {
    if n_classes == 4 {
        TRIMESTER_STARTS.iter().rposition(|s| doy >= *s).unwrap() + 1
    } else {
        doy * n_classes / DAYS_PER_YEAR + 1
    }
}

/// Classes for days `0..=last_day`.
pub fn build_periodicity_classes(
    last_day: usize,
    n_classes: usize,
    scheme: &ClassScheme,
) -> Result<PeriodicityClassMap> {
    if n_classes == 0 {
        return Err(Error::InvalidClasses("need at least one class".into()));
    }
    let n_days = last_day + 1;
    match scheme {
        ClassScheme::Trimester => {
            if n_classes > DAYS_PER_YEAR {
                return Err(Error::InvalidClasses(format!(
                    "at most {DAYS_PER_YEAR} day-of-year classes"
                )));
            }
            let day_class = (0..n_days)
                .map(|d| day_of_year_class(d % DAYS_PER_YEAR, n_classes))
                .collect();
            PeriodicityClassMap::from_day_class(day_class, n_classes)
        }
        ClassScheme::Custom { classes } => {
            if classes.len() != n_classes {
                return Err(Error::InvalidClasses(format!(
                    "{} classes listed, {} expected",
                    classes.len(),
                    n_classes
                )));
            }
            let mut day_class = vec![0usize; n_days];
            for (i, days) in classes.iter().enumerate() {
                for &d in days {
                    if d >= n_days {
                        return Err(Error::InvalidClasses(format!("day {d} beyond horizon")));
                    }
                    if day_class[d] != 0 {
                        return Err(Error::InvalidClasses(format!("day {d} listed twice")));
                    }
                    day_class[d] = i + 1;
                }
            }
            if let Some(d) = day_class.iter().position(|c| *c == 0) {
                return Err(Error::InvalidClasses(format!("day {d} has no class")));
            }
            PeriodicityClassMap::from_day_class(day_class, n_classes)
        }
    }
}
