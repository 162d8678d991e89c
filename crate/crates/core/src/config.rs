//! Game configuration and its on-disk (TOML) form.

use std::collections::BTreeMap;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ConfigError;
use crate::money::Money;
use crate::policy::{BaseStockParams, PolicySpec};
use crate::role::{Role, CHAIN_LENGTH};

/// What a seat may see of the rest of the chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisibilityMode {
    /// Peers' costs, backlogs and order histories, plus end-customer demand.
    #[default]
    Full,
    /// Only the seat's own state and its incoming order stream.
    Restricted,
}

/// One ordering policy per role.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Policies([PolicySpec; CHAIN_LENGTH]);

impl Policies {
    pub fn uniform(spec: PolicySpec) -> Self {
        Policies([spec; CHAIN_LENGTH])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Role, &PolicySpec)> {
        Role::ALL.into_iter().zip(self.0.iter())
    }

    pub fn has_human(&self) -> bool {
        self.0.iter().any(PolicySpec::is_human)
    }

    /// Roles whose seat takes orders from a player.
    pub fn human_roles(&self) -> Vec<Role> {
        self.iter()
            .filter(|(_, p)| p.is_human())
            .map(|(r, _)| r)
            .collect()
    }

    fn from_overrides(overrides: &BTreeMap<Role, PolicySpec>, fallback: PolicySpec) -> Self {
        Policies(Role::ALL.map(|r| overrides.get(&r).copied().unwrap_or(fallback)))
    }

    fn to_map(self) -> BTreeMap<Role, PolicySpec> {
        Role::ALL.into_iter().zip(self.0).collect()
    }
}

impl Index<Role> for Policies {
    type Output = PolicySpec;
    fn index(&self, role: Role) -> &PolicySpec {
        &self.0[role.index()]
    }
}

impl IndexMut<Role> for Policies {
    fn index_mut(&mut self, role: Role) -> &mut PolicySpec {
        &mut self.0[role.index()]
    }
}

/// Everything needed to play one game from week 1 to the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGameConfig", into = "RawGameConfig")]
pub struct GameConfig {
    pub horizon_weeks: u32,
    pub review_period: u32,
    pub shipping_delay: u32,
    pub order_delay: u32,
    pub holding_cost: Money,
    pub backorder_cost: Money,
    pub demand_mean: f64,
    pub demand_std: f64,
    /// Fixed end-customer demand for the first weeks; later weeks are drawn.
    pub demand_script: Option<Vec<u64>>,
    pub rng_seed: u64,
    pub initial_inventory: u64,
    pub initial_pipeline_fill: u64,
    pub visibility: VisibilityMode,
    /// Safety factor given to roles without an explicit policy.
    pub service_factor_z: f64,
    pub policies: Policies,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            horizon_weeks: 24,
            review_period: 1,
            shipping_delay: 2,
            order_delay: 1,
            holding_cost: Money::from_cents(50),
            backorder_cost: Money::from_cents(100),
            demand_mean: 4.0,
            demand_std: 2.0,
            demand_script: None,
            rng_seed: 1,
            initial_inventory: 12,
            initial_pipeline_fill: 4,
            visibility: VisibilityMode::Full,
            service_factor_z: 0.0,
            policies: Policies::uniform(PolicySpec::BaseStock { z: 0.0 }),
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Invalid(#[from] ConfigError),
}

impl GameConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.horizon_weeks < 1 {
            return Err(ConfigError::new("horizon_weeks", "must be at least 1"));
        }
        if self.review_period < 1 {
            return Err(ConfigError::new("review_period_R", "must be at least 1"));
        }
        if self.holding_cost.is_negative() {
            return Err(ConfigError::new("holding_cost", "must not be negative"));
        }
        if self.backorder_cost.is_negative() {
            return Err(ConfigError::new("backorder_cost", "must not be negative"));
        }
        if !self.demand_mean.is_finite() || self.demand_mean < 0.0 {
            return Err(ConfigError::new(
                "demand_mean",
                "must be finite and non-negative",
            ));
        }
        if !self.demand_std.is_finite() || self.demand_std < 0.0 {
            return Err(ConfigError::new(
                "demand_std",
                "must be finite and non-negative",
            ));
        }
        if !self.service_factor_z.is_finite() {
            return Err(ConfigError::new("service_factor_z", "must be finite"));
        }
        for (role, spec) in self.policies.iter() {
            spec.validate(&format!("policies.{role}"))?;
        }
        Ok(())
    }

    /// Base-stock inputs from the configured (not forecast) demand.
    pub fn base_stock_params(&self, z: f64) -> BaseStockParams {
        BaseStockParams {
            review_period: self.review_period,
            lead_time: self.shipping_delay,
            demand_mean: self.demand_mean,
            demand_std: self.demand_std,
            z,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, LoadError> {
        let config: GameConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("game configuration always serializes")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub(crate) struct RawGameConfig {
    horizon_weeks: u32,
    #[serde(rename = "review_period_R", alias = "review_period")]
    review_period: u32,
    #[serde(rename = "shipping_delay_L", alias = "shipping_delay")]
    shipping_delay: u32,
    order_delay: u32,
    holding_cost: Money,
    backorder_cost: Money,
    demand_mean: f64,
    demand_std: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    demand_script: Option<Vec<u64>>,
    rng_seed: u64,
    initial_inventory: u64,
    initial_pipeline_fill: u64,
    visibility: VisibilityMode,
    service_factor_z: f64,
    policies: BTreeMap<Role, PolicySpec>,
}

impl Default for RawGameConfig {
    fn default() -> Self {
        GameConfig::default().into()
    }
}

impl TryFrom<RawGameConfig> for GameConfig {
    type Error = ConfigError;

    fn try_from(raw: RawGameConfig) -> Result<Self, ConfigError> {
        let fallback = PolicySpec::BaseStock {
            z: raw.service_factor_z,
        };
        Ok(GameConfig {
            horizon_weeks: raw.horizon_weeks,
            review_period: raw.review_period,
            shipping_delay: raw.shipping_delay,
            order_delay: raw.order_delay,
            holding_cost: raw.holding_cost,
            backorder_cost: raw.backorder_cost,
            demand_mean: raw.demand_mean,
            demand_std: raw.demand_std,
            demand_script: raw.demand_script,
            rng_seed: raw.rng_seed,
            initial_inventory: raw.initial_inventory,
            initial_pipeline_fill: raw.initial_pipeline_fill,
            visibility: raw.visibility,
            service_factor_z: raw.service_factor_z,
            policies: Policies::from_overrides(&raw.policies, fallback),
        })
    }
}

impl From<GameConfig> for RawGameConfig {
    fn from(c: GameConfig) -> Self {
        RawGameConfig {
            horizon_weeks: c.horizon_weeks,
            review_period: c.review_period,
            shipping_delay: c.shipping_delay,
            order_delay: c.order_delay,
            holding_cost: c.holding_cost,
            backorder_cost: c.backorder_cost,
            demand_mean: c.demand_mean,
            demand_std: c.demand_std,
            demand_script: c.demand_script,
            rng_seed: c.rng_seed,
            initial_inventory: c.initial_inventory,
            initial_pipeline_fill: c.initial_pipeline_fill,
            visibility: c.visibility,
            service_factor_z: c.service_factor_z,
            policies: c.policies.to_map(),
        }
    }
}

/// Applies per-role overrides on top of existing policies.
pub fn override_policies(base: Policies, overrides: &BTreeMap<Role, PolicySpec>) -> Policies {
    let mut out = base;
    for (&role, &spec) in overrides {
        out[role] = spec;
    }
    out
}
