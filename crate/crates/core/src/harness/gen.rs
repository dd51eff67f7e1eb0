use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{DiscreteDist, TypeSpace, TypeSpaceJson};
use crate::error::{Error, Result};
use crate::feas::{FeasJson, FeasibilitySystem, MatroidOracle};
use crate::scalar::{Rational, Scalar};

use super::config::{ExperimentConfig, Setting, VALUE_MAX};

#[derive(Clone, Debug)]
pub struct Instance<T> {
    pub id: String,
    pub setting: Setting,
    pub ts: TypeSpace<T>,
    /// Absent for single-buyer settings.
    pub fs: Option<FeasibilitySystem>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct InstanceJson<T> {
    pub instance_id: String,
    pub setting: Setting,
    pub type_space: TypeSpaceJson<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasJson>,
}

impl<T: Scalar> Instance<T> {
    pub fn to_json(&self) -> InstanceJson<T> {
        InstanceJson {
            instance_id: self.id.clone(),
            setting: self.setting,
            type_space: self.ts.to_json(),
            feasibility: self.fs.as_ref().map(FeasibilitySystem::to_json),
        }
    }
}

impl<T: Scalar> InstanceJson<T> {
    pub fn build(self) -> Result<Instance<T>> {
        let ts = self.type_space.build()?;
        let fs = match (self.setting.single_buyer(), self.feasibility) {
            (true, _) => None,
            (false, Some(f)) => Some(f.build(ts.n_agents(), ts.n_items())?),
            (false, None) => {
                return Err(Error::Validation(format!(
                    "instance {} needs a feasibility system",
                    self.instance_id
                )))
            }
        };
        Ok(Instance {
            id: self.instance_id,
            setting: self.setting,
            ts,
            fs,
        })
    }
}

pub fn instance_id(cfg: &ExperimentConfig, index: usize) -> String {
    format!("s{}-{}-{index:04}", cfg.setting as u8, cfg.seed)
}

/// Every instance has its own stream, so instances can be generated in any
/// order and in parallel.
fn rng_for(cfg: &ExperimentConfig, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    rng
}

/// Distinct integer values from `0..=VALUE_MAX` with random positive weights.
fn random_dist(rng: &mut ChaCha8Rng, max_support: usize) -> Result<DiscreteDist<Rational>> {
    let size = rng.gen_range(1..=max_support);
    let mut values: Vec<usize> = sample(rng, VALUE_MAX as usize + 1, size).into_vec();
    values.sort_unstable();
    let weights: Vec<i64> = (0..size).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = weights.iter().sum();
    DiscreteDist::new(
        values
            .into_iter()
            .map(|v| Rational::from_i64(v as i64))
            .collect(),
        weights
            .into_iter()
            .map(|w| Rational::from_ratio(w, total))
            .collect(),
    )
}

fn random_matroid(rng: &mut ChaCha8Rng, ground: usize) -> Result<MatroidOracle> {
    if rng.gen_bool(0.5) {
        return MatroidOracle::uniform(ground, rng.gen_range(1..=ground));
    }
    let blocks = rng.gen_range(1..=ground);
    let mut members = vec![Vec::new(); blocks];
    for e in 0..ground {
        members[rng.gen_range(0..blocks)].push(e);
    }
    members.retain(|b| !b.is_empty());
    let capacities = members
        .iter()
        .map(|b| rng.gen_range(1..=b.len().min(2)))
        .collect();
    MatroidOracle::partition(ground, &members, capacities)
}

/// The `index`-th instance of the configured family, in exact arithmetic.
pub fn generate_instance(cfg: &ExperimentConfig, index: usize) -> Result<Instance<Rational>> {
    cfg.validate()?;
    let mut rng = rng_for(cfg, index);
    let (n, m) = (cfg.agents(), cfg.m);
    let mut dists = |count: usize| -> Result<Vec<DiscreteDist<Rational>>> {
        (0..count)
            .map(|_| random_dist(&mut rng, cfg.support))
            .collect()
    };
    let (ts, fs) = match cfg.setting {
        Setting::Independent => (TypeSpace::product(vec![dists(m)?])?, None),
        Setting::Additive => (TypeSpace::additive(dists(m + 1)?)?, None),
        Setting::Matching | Setting::Matroid => {
            let ts = TypeSpace::product((0..n).map(|_| dists(m)).collect::<Result<_>>()?)?;
            let fs = if cfg.setting == Setting::Matching {
                let caps = (0..m).map(|_| rng.gen_range(1..=cfg.capacity)).collect();
                FeasibilitySystem::matching(n, caps)?
            } else {
                FeasibilitySystem::general(n, m, random_matroid(&mut rng, n * m)?)?
            };
            (ts, Some(fs))
        }
    };
    Ok(Instance {
        id: instance_id(cfg, index),
        setting: cfg.setting,
        ts,
        fs,
    })
}

/// The same instance with every number converted to `T`.
pub fn convert_instance<T: Scalar>(inst: &Instance<Rational>) -> Result<Instance<T>> {
    let text = serde_json::to_value(inst.to_json())?;
    serde_json::from_value::<InstanceJson<T>>(text)?.build()
}
