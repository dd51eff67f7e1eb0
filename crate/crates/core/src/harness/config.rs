use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opt::{DSIC_LP_CAP, MENU_LP_TYPE_CAP};

/// Which family of instances to generate and which checker to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Setting {
    /// One buyer, independent item values.
    Independent = 1,
    /// One buyer, values `t_0 + t_j`.
    Additive = 2,
    /// Several buyers, item capacities.
    Matching = 3,
    /// Several buyers, an arbitrary matroid on agent-item pairs.
    Matroid = 4,
}

impl TryFrom<u8> for Setting {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Setting::Independent),
            2 => Ok(Setting::Additive),
            3 => Ok(Setting::Matching),
            4 => Ok(Setting::Matroid),
            _ => Err(Error::Validation(format!(
                "setting must be 1 to 4, got {v}"
            ))),
        }
    }
}

impl From<Setting> for u8 {
    fn from(s: Setting) -> u8 {
        s as u8
    }
}

impl Setting {
    pub fn single_buyer(self) -> bool {
        matches!(self, Setting::Independent | Setting::Additive)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Rational,
    Float,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            _ => Err(Error::Validation(format!(
                "mode must be rational or float, got {s:?}"
            ))),
        }
    }
}

/// Largest value in the generated supports; values are integers `0..=VALUE_MAX`.
pub const VALUE_MAX: u32 = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub setting: Setting,
    /// Agents; forced to 1 for single-buyer settings.
    pub n: usize,
    pub m: usize,
    /// Largest support size of each generated distribution.
    pub support: usize,
    /// Largest item capacity in matching instances.
    pub capacity: usize,
    pub count: usize,
    pub mode: Mode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            setting: Setting::Independent,
            n: 1,
            m: 2,
            support: 2,
            capacity: 2,
            count: 10,
            mode: Mode::Rational,
        }
    }
}

impl ExperimentConfig {
    pub fn agents(&self) -> usize {
        if self.setting.single_buyer() {
            1
        } else {
            self.n
        }
    }

    /// Reject sizes whose largest instance would exceed a solver cap.
    pub fn validate(&self) -> Result<()> {
        let n = self.agents();
        if n == 0 || self.m == 0 || self.support == 0 {
            return Err(Error::Validation(
                "n, m and support must be positive".into(),
            ));
        }
        if self.support as u32 > VALUE_MAX + 1 {
            return Err(Error::Validation(format!(
                "support {} exceeds the {} grid values",
                self.support,
                VALUE_MAX + 1
            )));
        }
        if self.setting == Setting::Matching && self.capacity == 0 {
            return Err(Error::Validation("capacity must be positive".into()));
        }
        let capacity = |what, count: u128, cap: usize| {
            if count > cap as u128 {
                Err(Error::Capacity {
                    what,
                    count,
                    cap: cap as u128,
                })
            } else {
                Ok(())
            }
        };
        let s = self.support as u128;
        match self.setting {
            Setting::Independent => {
                let types = s.saturating_pow(self.m as u32);
                capacity("buyer types", types, MENU_LP_TYPE_CAP)?;
                capacity("copies program size", types * self.m as u128, DSIC_LP_CAP)
            }
            Setting::Additive => capacity(
                "buyer types",
                s.saturating_pow(self.m as u32 + 1),
                MENU_LP_TYPE_CAP,
            ),
            Setting::Matching | Setting::Matroid => {
                let pairs = (n * self.m) as u32;
                capacity(
                    "profile program size",
                    s.saturating_pow(pairs) * pairs as u128,
                    DSIC_LP_CAP,
                )
            }
        }
    }
}
