use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{
    generate_homogeneous_synthetic, generate_lower_bound_instance, generate_table1_shaped,
    HomogeneousParams, Instance,
};
use crate::policies::PolicyKind;

/// Scarcity applied when `rho` is neither swept nor given.
pub const DEFAULT_RHO: f64 = 2.0;
/// Capacity floor applied when `b_floor` is neither swept nor given.
pub const DEFAULT_B_FLOOR: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceSource {
    File(PathBuf),
    LowerBound {
        n: usize,
    },
    Homogeneous {
        #[serde(default = "d_n")]
        n_supply: usize,
        #[serde(default = "d_n")]
        n_demand: usize,
        #[serde(default = "d_degree")]
        avg_degree: usize,
        #[serde(default = "d_capacity")]
        capacity: u32,
        #[serde(default = "d_kappa")]
        kappa_floor: f64,
        #[serde(default)]
        seed: u64,
    },
    Table1 {
        #[serde(default)]
        seed: u64,
    },
}

fn d_n() -> usize {
    500
}
fn d_degree() -> usize {
    10
}
fn d_capacity() -> u32 {
    5
}
fn d_kappa() -> f64 {
    1.0
}

impl InstanceSource {
    /// Builds the base instance; `kappa_floor` overrides the homogeneous generator's.
    pub fn build(&self, kappa_floor: Option<f64>) -> Result<Instance> {
        match self {
            InstanceSource::File(path) => {
                if kappa_floor.is_some() {
                    return Err(Error::Config(
                        "a kappa_floor sweep needs the homogeneous generator".into(),
                    ));
                }
                Instance::load(path)
            }
            InstanceSource::LowerBound { n } => {
                if kappa_floor.is_some() {
                    return Err(Error::Config(
                        "a kappa_floor sweep needs the homogeneous generator".into(),
                    ));
                }
                generate_lower_bound_instance(*n)
            }
            InstanceSource::Homogeneous {
                n_supply,
                n_demand,
                avg_degree,
                capacity,
                kappa_floor: k,
                seed,
            } => generate_homogeneous_synthetic(
                HomogeneousParams {
                    n_supply: *n_supply,
                    n_demand: *n_demand,
                    avg_degree: *avg_degree,
                    capacity: *capacity,
                    kappa_floor: kappa_floor.unwrap_or(*k),
                },
                *seed,
            ),
            InstanceSource::Table1 { seed } => {
                if kappa_floor.is_some() {
                    return Err(Error::Config(
                        "a kappa_floor sweep needs the homogeneous generator".into(),
                    ));
                }
                generate_table1_shaped(*seed)
            }
        }
    }

    /// Lower-bound instances keep their native scarcity unless it is swept.
    fn native_scarcity(&self) -> bool {
        matches!(self, InstanceSource::LowerBound { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    Rho(Vec<f64>),
    BFloor(Vec<u32>),
    KappaFloor(Vec<f64>),
    Tau(Vec<f64>),
}

impl Sweep {
    pub fn name(&self) -> &'static str {
        match self {
            Sweep::Rho(_) => "rho",
            Sweep::BFloor(_) => "b_floor",
            Sweep::KappaFloor(_) => "kappa_floor",
            Sweep::Tau(_) => "tau",
        }
    }

    /// Sweep values as they appear in output tables.
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::Rho(v) | Sweep::KappaFloor(v) | Sweep::Tau(v) => v.clone(),
            Sweep::BFloor(v) => v.iter().map(|&b| f64::from(b)).collect(),
        }
    }

    fn len(&self) -> usize {
        match self {
            Sweep::Rho(v) | Sweep::KappaFloor(v) | Sweep::Tau(v) => v.len(),
            Sweep::BFloor(v) => v.len(),
        }
    }
}

/// A policy entry; `alg-tau` without a value takes its threshold from a tau sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    Fixed(PolicyKind),
    SweptTau,
}

impl PolicySpec {
    pub fn resolve(&self, tau: Option<f64>) -> Result<PolicyKind> {
        match (self, tau) {
            (PolicySpec::Fixed(k), _) => Ok(*k),
            (PolicySpec::SweptTau, Some(t)) => Ok(PolicyKind::AlgTau(t)),
            (PolicySpec::SweptTau, None) => {
                Err(Error::Config("bare alg-tau needs a tau sweep".into()))
            }
        }
    }
}

impl Serialize for PolicySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PolicySpec::Fixed(k) => k.serialize(s),
            PolicySpec::SweptTau => s.serialize_str("alg-tau"),
        }
    }
}

impl<'de> Deserialize<'de> for PolicySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "alg-tau" {
            Ok(PolicySpec::SweptTau)
        } else {
            s.parse()
                .map(PolicySpec::Fixed)
                .map_err(serde::de::Error::custom)
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub instance: InstanceSource,
    pub policies: Vec<PolicySpec>,
    pub sweep: Sweep,
    /// Base scarcity when `rho` is not swept.
    #[serde(default)]
    pub rho: Option<f64>,
    /// Base capacity floor when `b_floor` is not swept.
    #[serde(default)]
    pub b_floor: Option<u32>,
    pub replications: u64,
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub lp_cache: bool,
    /// Also emit per-group ASR/RSR tables at scarcity 1, 2 and 3.
    #[serde(default)]
    pub group_breakdown: bool,
}

/// One sweep cell's settings after defaults are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSettings {
    pub value: f64,
    pub rho: Option<f64>,
    pub b_floor: u32,
    pub kappa_floor: Option<f64>,
    pub tau: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative instance path is taken relative to the file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if let InstanceSource::File(p) = &mut cfg.instance {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!(
                "experiment name {:?} is not a plain file name",
                self.name
            ));
        }
        if self.replications == 0 {
            return bad("replications must be >= 1".into());
        }
        if self.policies.is_empty() {
            return bad("policy list is empty".into());
        }
        if self.sweep.len() == 0 {
            return bad(format!("{} sweep has no values", self.sweep.name()));
        }
        match &self.sweep {
            Sweep::Rho(v) => {
                if let Some(r) = v.iter().find(|r| !(r.is_finite() && **r >= 1.0)) {
                    return bad(format!("rho must be >= 1, got {r}"));
                }
                if self.rho.is_some() {
                    return bad("rho is both swept and fixed".into());
                }
            }
            Sweep::BFloor(v) => {
                if v.contains(&0) {
                    return bad("b_floor values must be >= 1".into());
                }
                if self.b_floor.is_some() {
                    return bad("b_floor is both swept and fixed".into());
                }
            }
            Sweep::KappaFloor(v) => {
                if let Some(k) = v.iter().find(|k| !(**k > 0.0 && **k <= 1.0)) {
                    return bad(format!("kappa_floor must lie in (0, 1], got {k}"));
                }
                if !matches!(self.instance, InstanceSource::Homogeneous { .. }) {
                    return bad("a kappa_floor sweep needs the homogeneous generator".into());
                }
            }
            Sweep::Tau(v) => {
                if let Some(t) = v.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                    return bad(format!("tau must lie in [0, 1], got {t}"));
                }
            }
        }
        if !matches!(self.sweep, Sweep::Tau(_)) && self.policies.contains(&PolicySpec::SweptTau) {
            return bad("bare alg-tau needs a tau sweep".into());
        }
        if let Some(r) = self.rho {
            if !(r.is_finite() && r >= 1.0) {
                return bad(format!("rho must be >= 1, got {r}"));
            }
        }
        if self.b_floor == Some(0) {
            return bad("b_floor must be >= 1".into());
        }
        Ok(())
    }

    /// Settings of every sweep cell, in sweep order.
    pub fn cells(&self) -> Vec<CellSettings> {
        let base_rho = match self.rho {
            Some(r) => Some(r),
            None if self.instance.native_scarcity() => None,
            None => Some(DEFAULT_RHO),
        };
        let base = CellSettings {
            value: 0.0,
            rho: base_rho,
            b_floor: self.b_floor.unwrap_or(DEFAULT_B_FLOOR),
            kappa_floor: None,
            tau: None,
        };
        match &self.sweep {
            Sweep::Rho(v) => v
                .iter()
                .map(|&r| CellSettings {
                    value: r,
                    rho: Some(r),
                    ..base
                })
                .collect(),
            Sweep::BFloor(v) => v
                .iter()
                .map(|&b| CellSettings {
                    value: f64::from(b),
                    b_floor: b,
                    ..base
                })
                .collect(),
            Sweep::KappaFloor(v) => v
                .iter()
                .map(|&k| CellSettings {
                    value: k,
                    kappa_floor: Some(k),
                    ..base
                })
                .collect(),
            Sweep::Tau(v) => v
                .iter()
                .map(|&t| CellSettings {
                    value: t,
                    tau: Some(t),
                    ..base
                })
                .collect(),
        }
    }
}
