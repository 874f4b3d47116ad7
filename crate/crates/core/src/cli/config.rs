use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact::ListRule;

/// Subcommand selected on the command line or in the config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Waterfill,
    AwgnRule,
    Exact,
    Optimize,
    Simulate,
    Figure,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Waterfill => "waterfill",
            Kind::AwgnRule => "awgn-rule",
            Kind::Exact => "exact",
            Kind::Optimize => "optimize",
            Kind::Simulate => "simulate",
            Kind::Figure => "figure",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Genie,
    Bch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AwgnRule {
    PerBlock,
    Integral,
}

/// A scalar or a list of scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![*x],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Experiment configuration as read from JSON. Every field is optional;
/// each command checks the ones it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composition: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<OneOrMany>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_rule: Option<ListRule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_over_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_fractions: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoder: Option<DecoderKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bch_m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub awgn_rule: Option<AwgnRule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub include_zero_pattern: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list_budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

pub const DEFAULT_SEED: u64 = 1;
pub const FIG4_GRID: [u64; 5] = [1021, 2041, 5102, 10204, 20408];
pub const FIG5_GRID: [u64; 4] = [100, 200, 400, 800];

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).or_else(|e| invalid(format!("config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .or_else(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fill preset parameters. Stated values may be repeated but not changed;
    /// unstated ones get defaults only where the config leaves them open.
    pub fn apply_preset(&mut self) -> Result<()> {
        let Some(preset) = self.preset else { return Ok(()) };
        let name = match preset {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        };
        match preset {
            Preset::Fig2 => {
                pin(&mut self.n, 511, "N", name)?;
                pin(&mut self.t, 5, "t", name)?;
                pin(&mut self.m, 2, "M", name)?;
                pin(&mut self.p, vec![0.02, 0.03], "p", name)?;
                pin(&mut self.composition, vec![477, 40], "composition", name)?;
            }
            Preset::Fig3 => {
                pin(&mut self.sigma, OneOrMany::Many(vec![0.5, 0.75, 1.2]), "sigma", name)?;
                self.n.get_or_insert(511);
                self.t.get_or_insert(5);
            }
            Preset::Fig4 => {
                pin(&mut self.m, 1, "M", name)?;
                pin(&mut self.t_over_n, 9.8e-4, "t_over_n", name)?;
                pin(&mut self.p, vec![1e-3], "p", name)?;
                pin(&mut self.class_fractions, vec![1.0], "class_fractions", name)?;
                self.n_grid.get_or_insert_with(|| FIG4_GRID.to_vec());
            }
            Preset::Fig5 => {
                pin(&mut self.m, 2, "M", name)?;
                pin(&mut self.t_over_n, 0.079, "t_over_n", name)?;
                pin(&mut self.p, vec![0.083, 0.081], "p", name)?;
                pin(&mut self.class_fractions, vec![0.4, 0.6], "class_fractions", name)?;
                self.n_grid.get_or_insert_with(|| FIG5_GRID.to_vec());
            }
        }
        Ok(())
    }

    /// Check that `M` agrees with every per-class vector that is present.
    pub fn check_classes(&self) -> Result<()> {
        let lens = [
            ("p", self.p.as_ref().map(Vec::len)),
            ("composition", self.composition.as_ref().map(Vec::len)),
            ("priors", self.priors.as_ref().map(Vec::len)),
            ("q", self.q.as_ref().map(Vec::len)),
            ("class_fractions", self.class_fractions.as_ref().map(Vec::len)),
        ];
        let mut expected = self.m;
        for (name, len) in lens {
            if let Some(len) = len {
                match expected {
                    Some(m) if m != len => return invalid(format!("{name} has {len} entries, expected M = {m}")),
                    None => expected = Some(len),
                    _ => {}
                }
            }
        }
        if expected == Some(0) {
            return invalid("M must be positive");
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

fn pin<T: PartialEq + fmt::Debug>(slot: &mut Option<T>, value: T, field: &str, preset: &str) -> Result<()> {
    match slot {
        Some(v) if *v != value => invalid(format!("preset {preset} fixes {field} = {value:?}, config has {v:?}")),
        _ => {
            *slot = Some(value);
            Ok(())
        }
    }
}

pub(crate) fn require<'a, T>(slot: &'a Option<T>, field: &str, kind: Kind) -> Result<&'a T> {
    match slot {
        Some(v) => Ok(v),
        None => invalid(format!("{kind} requires field `{field}`")),
    }
}
