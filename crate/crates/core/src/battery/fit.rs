//! Fitting discrete netload and battery-price laws with 1-D k-means.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::intraday::classes::PeriodicityClassMap;

use super::scenarios::{scenario_rng, ScenarioSet};

const MAX_LLOYD_ITERS: usize = 200;

/// Lloyd's algorithm on scalar data with k-means++ seeding. Returns sorted
/// centroids and cluster sizes; coinciding centroids are merged.
pub fn kmeans_1d<R: Rng>(data: &[f64], k: usize, rng: &mut R) -> (Vec<f64>, Vec<usize>) {
    assert!(k >= 1 && data.len() >= k, "k-means needs at least k points");
    let mut xs = data.to_vec();
    xs.sort_by(f64::total_cmp);

    let mut centroids = Vec::with_capacity(k);
    centroids.push(xs[rng.random_range(0..xs.len())]);
    let mut d2: Vec<f64> = xs.iter().map(|x| (x - centroids[0]).powi(2)).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut cum = 0.0;
            let mut j = xs.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                cum += w;
                if u < cum {
                    j = i;
                    break;
                }
            }
            j
        } else {
            rng.random_range(0..xs.len())
        };
        let c = xs[pick];
        centroids.push(c);
        for (w, x) in d2.iter_mut().zip(&xs) {
            *w = w.min((x - c).powi(2));
        }
    }

    let mut assign = vec![usize::MAX; xs.len()];
    for _ in 0..MAX_LLOYD_ITERS {
        let mut changed = false;
        for (a, x) in assign.iter_mut().zip(&xs) {
            let j = nearest(&centroids, *x);
            if *a != j {
                *a = j;
                changed = true;
            }
        }
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (a, x) in assign.iter().zip(&xs) {
            sums[*a] += x;
            counts[*a] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j] / counts[j] as f64;
            }
        }
        let empty: Vec<usize> = (0..k).filter(|j| counts[*j] == 0).collect();
        for j in empty {
            // reseed from the point worst served by its own centroid
            let far = (0..xs.len())
                .max_by(|a, b| {
                    let da = (xs[*a] - centroids[assign[*a]]).abs();
                    let db = (xs[*b] - centroids[assign[*b]]).abs();
                    da.total_cmp(&db)
                })
                .expect("nonempty data");
            centroids[j] = xs[far];
            assign[far] = j;
            changed = true;
        }
        if !changed {
            break;
        }
    }

    let mut counts = vec![0usize; k];
    for a in &assign {
        counts[*a] += 1;
    }
    let mut pairs: Vec<(f64, usize)> = centroids
        .into_iter()
        .zip(counts)
        .filter(|(_, n)| *n > 0)
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, usize)> = Vec::with_capacity(pairs.len());
    for (c, n) in pairs {
        match merged.last_mut() {
            Some(last) if last.0 == c => last.1 += n,
            _ => merged.push((c, n)),
        }
    }
    merged.into_iter().unzip()
}

fn nearest(centroids: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (j, c) in centroids.iter().enumerate() {
        if (x - c).abs() < (x - centroids[best]).abs() {
            best = j;
        }
    }
    best
}

/// Empirical law from k-means on `data`.
pub fn fit_law<R: Rng>(data: &[f64], k: usize, rng: &mut R) -> Result<DiscreteDist> {
    let (atoms, counts) = kmeans_1d(data, k, rng);
    let n = data.len() as f64;
    let probs = counts.iter().map(|c| *c as f64 / n).collect();
    DiscreteDist::new(atoms, probs)
}

/// One netload law per (class, slot).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetloadLaws {
    slots: usize,
    /// Row-major over `(class - 1, slot)`.
    laws: Vec<DiscreteDist>,
}

impl NetloadLaws {
    pub fn new(slots: usize, laws: Vec<DiscreteDist>) -> Result<Self> {
        if slots == 0 || laws.is_empty() || laws.len() % slots != 0 {
            return Err(Error::Incompatible(format!(
                "{} laws do not tile {slots} slots",
                laws.len()
            )));
        }
        Ok(Self { slots, laws })
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn num_classes(&self) -> usize {
        self.laws.len() / self.slots
    }

    pub fn law(&self, class: usize, m: usize) -> &DiscreteDist {
        &self.laws[(class - 1) * self.slots + m]
    }

    pub fn class_laws(&self, class: usize) -> &[DiscreteDist] {
        &self.laws[(class - 1) * self.slots..class * self.slots]
    }
}

/// k-means law per (class, slot) over all scenarios and days of the class.
pub fn fit_netload_distributions(
    raw: &ScenarioSet,
    classes: &PeriodicityClassMap,
    k: usize,
    seed: u64,
) -> Result<NetloadLaws> {
    if k == 0 {
        return Err(Error::Config("support size k must be positive".into()));
    }
    if raw.num_days() < classes.num_days() {
        return Err(Error::ScenarioTooShort {
            scenario: 0,
            got: raw.num_days(),
            needed: classes.num_days(),
        });
    }
    let slots = raw.slots();
    let n_classes = classes.num_classes();
    let mut pools = vec![Vec::new(); n_classes * slots];
    for i in 0..raw.num_scenarios() {
        for d in 0..classes.num_days() {
            let c = classes.class_of(d);
            for (m, v) in raw.day_netload(i, d).iter().enumerate() {
                pools[(c - 1) * slots + m].push(*v);
            }
        }
    }
    let short: Vec<(usize, usize)> = pools
        .iter()
        .enumerate()
        .filter(|(_, p)| p.len() < k)
        .map(|(j, _)| (j / slots + 1, j % slots))
        .collect();
    if !short.is_empty() {
        return Err(Error::InsufficientData(short));
    }
    let laws = pools
        .par_iter()
        .enumerate()
        .map(|(j, data)| fit_law(data, k, &mut scenario_rng(seed, j as u64)))
        .collect::<Result<Vec<_>>>()?;
    NetloadLaws::new(slots, laws)
}

/// Battery-price law for each day from the price scenarios of that day.
pub fn fit_price_laws(raw: &ScenarioSet, days: usize, k: usize, seed: u64) -> Result<Vec<DiscreteDist>> {
    if raw.num_days() < days {
        return Err(Error::ScenarioTooShort {
            scenario: 0,
            got: raw.num_days(),
            needed: days,
        });
    }
    let k = k.min(raw.num_scenarios()).max(1);
    (0..days)
        .into_par_iter()
        .map(|d| {
            let data: Vec<f64> = (0..raw.num_scenarios()).map(|i| raw.price(i, d)).collect();
            fit_law(&data, k, &mut scenario_rng(seed ^ 0x5e_ed0f_da7a, d as u64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_cluster_is_the_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = fit_law(&[1.0, 2.0, 6.0], 1, &mut rng).unwrap();
        assert_eq!(d.support(), &[3.0]);
        assert_eq!(d.probs(), &[1.0]);
    }

    #[test]
    fn two_obvious_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = fit_law(&[0.0, 0.0, 10.0, 10.0], 2, &mut rng).unwrap();
        assert_eq!(d.support(), &[0.0, 10.0]);
        assert_eq!(d.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn duplicates_merge() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = fit_law(&[5.0; 12], 4, &mut rng).unwrap();
        assert_eq!(d.support(), &[5.0]);
    }

    #[test]
    fn insufficient_data_lists_cells() {
        let set = ScenarioSet::new(1, 2, 3, vec![0.0; 6], vec![1.0; 2]).unwrap();
        let classes = crate::intraday::classes::build_periodicity_classes(
            1,
            1,
            &crate::intraday::classes::ClassScheme::Trimester,
        )
        .unwrap();
        match fit_netload_distributions(&set, &classes, 3, 0) {
            Err(Error::InsufficientData(cells)) => assert_eq!(cells, vec![(1, 0), (1, 1), (1, 2)]),
            other => panic!("{other:?}"),
        }
    }
}
