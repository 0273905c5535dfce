//! Artifact layout, JSON helpers and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

/// File locations under the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    root: PathBuf,
}

/// Which decomposition an artifact belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decomposition {
    Price,
    Resource,
}

impl Decomposition {
    pub fn letter(self) -> char {
        match self {
            Decomposition::Price => 'P',
            Decomposition::Resource => 'R',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Decomposition::Price => "price",
            Decomposition::Resource => "resource",
        }
    }
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn fit_dir(&self) -> PathBuf {
        self.root.join("fit")
    }

    pub fn noise_law(&self, class: usize, slot: usize) -> PathBuf {
        self.fit_dir().join(format!("noise_class{class}_slot{slot}.json"))
    }

    pub fn price_law(&self) -> PathBuf {
        self.fit_dir().join("price_law.json")
    }

    pub fn classes(&self) -> PathBuf {
        self.fit_dir().join("classes.json")
    }

    pub fn intraday_dir(&self) -> PathBuf {
        self.root.join("intraday")
    }

    pub fn intraday_table(&self, kind: Decomposition, class: usize) -> PathBuf {
        self.intraday_dir()
            .join(format!("intraday_{}_class{class}.json", kind.letter()))
    }

    pub fn intraday_fast(&self, kind: Decomposition, class: usize) -> PathBuf {
        self.intraday_dir()
            .join(format!("intraday_{}_class{class}_fast.bin", kind.letter()))
    }

    pub fn bellman_dir(&self) -> PathBuf {
        self.root.join("bellman")
    }

    pub fn bellman(&self, kind: Decomposition, day: usize) -> PathBuf {
        self.bellman_dir()
            .join(format!("bellman_{}_d{day}.json", kind.letter()))
    }

    pub fn simulate_dir(&self) -> PathBuf {
        self.root.join("simulate")
    }

    pub fn simulation_csv(&self, kind: Decomposition) -> PathBuf {
        self.simulate_dir().join(format!("simulation_{}.csv", kind.name()))
    }

    pub fn simulation_json(&self, kind: Decomposition) -> PathBuf {
        self.simulate_dir().join(format!("simulation_{}.json", kind.name()))
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }

    pub fn report_json(&self) -> PathBuf {
        self.report_dir().join("report.json")
    }

    pub fn report_csv(&self) -> PathBuf {
        self.report_dir().join("gap_series.csv")
    }

    pub fn verify_json(&self) -> PathBuf {
        self.root.join("verify.json")
    }

    pub fn complexity_json(&self) -> PathBuf {
        self.root.join("complexity.json")
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

pub fn read_bytes(path: &Path, what: &str) -> Result<Vec<u8>, CliError> {
    if !path.exists() {
        return Err(CliError::Missing {
            what: what.to_string(),
            path: path.to_path_buf(),
        });
    }
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let bytes = read_bytes(path, what)?;
    serde_json::from_slice(&bytes).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub config_hash: String,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    /// Wall-clock seconds per stage and sub-stage.
    pub timings: BTreeMap<String, f64>,
    pub updated_unix_secs: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub config: serde_json::Value,
    pub discount: f64,
    pub final_cost: String,
    pub seed: u64,
    pub stages: BTreeMap<String, StageRecord>,
    pub metadata: Metadata,
}

impl Manifest {
    pub fn fresh(cfg: &RunConfig) -> Self {
        Self {
            config_hash: cfg.hash(),
            config: serde_json::to_value(cfg).expect("config serializes"),
            discount: cfg.battery.discount,
            final_cost: format!("{:?}", cfg.battery.final_cost),
            seed: cfg.seed,
            ..Self::default()
        }
    }

    /// The manifest on disk, or a fresh one when there is none yet.
    pub fn load_or_fresh(layout: &Layout, cfg: &RunConfig) -> Result<Self, CliError> {
        let path = layout.manifest();
        if !path.exists() {
            return Ok(Self::fresh(cfg));
        }
        let mut m: Manifest = read_json(&path, "manifest")?;
        let fresh = Self::fresh(cfg);
        m.config_hash = fresh.config_hash;
        m.config = fresh.config;
        m.discount = fresh.discount;
        m.final_cost = fresh.final_cost;
        m.seed = fresh.seed;
        Ok(m)
    }

    /// Checks that `stage` ran with the current config.
    pub fn require(&self, stage: &str, what: &str, layout: &Layout, force: bool) -> Result<(), CliError> {
        let Some(rec) = self.stages.get(stage) else {
            return Err(CliError::Missing {
                what: what.to_string(),
                path: layout.root().join(stage),
            });
        };
        if rec.config_hash != self.config_hash && !force {
            return Err(CliError::HashMismatch {
                stage: stage.to_string(),
                expected: self.config_hash.clone(),
                found: rec.config_hash.clone(),
            });
        }
        for out in &rec.outputs {
            let p = layout.root().join(out);
            if !p.exists() {
                return Err(CliError::Missing {
                    what: what.to_string(),
                    path: p,
                });
            }
        }
        Ok(())
    }

    pub fn record(&mut self, stage: &str, layout: &Layout, outputs: &[PathBuf]) {
        let rel = outputs
            .iter()
            .map(|p| {
                p.strip_prefix(layout.root())
                    .unwrap_or(p)
                    .to_string_lossy()
                    .into_owned()
            })
            .collect();
        self.stages.insert(
            stage.to_string(),
            StageRecord {
                config_hash: self.config_hash.clone(),
                outputs: rel,
            },
        );
    }

    pub fn save(&mut self, layout: &Layout) -> Result<(), CliError> {
        self.metadata.updated_unix_secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        write_json(&layout.manifest(), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn require_reports_missing_and_mismatched_stages() {
        let dir = tempfile::tempdir().unwrap();
        let layout = Layout::new(dir.path());
        let cfg = RunConfig::default();
        let mut m = Manifest::fresh(&cfg);
        let err = m.require("intraday", "intraday tables", &layout, false).unwrap_err();
        assert!(err.to_string().contains("intraday tables missing"));
        assert_eq!(err.exit_code(), 3);

        m.record("intraday", &layout, &[]);
        m.require("intraday", "intraday tables", &layout, false).unwrap();
        m.config_hash = "other".into();
        let err = m.require("intraday", "intraday tables", &layout, false).unwrap_err();
        assert!(matches!(err, CliError::HashMismatch { .. }));
        m.require("intraday", "intraday tables", &layout, true).unwrap();
    }

    #[test]
    fn file_names() {
        let l = Layout::new("/o");
        assert_eq!(l.noise_law(2, 47), PathBuf::from("/o/fit/noise_class2_slot47.json"));
        assert_eq!(
            l.intraday_fast(Decomposition::Resource, 1),
            PathBuf::from("/o/intraday/intraday_R_class1_fast.bin")
        );
        assert_eq!(l.bellman(Decomposition::Price, 12), PathBuf::from("/o/bellman/bellman_P_d12.json"));
    }
}
