//! Ordering decisions for automated seats.
//!
//! Every agent sees the chain through an [`Observation`], which the engine
//! builds according to the game's [`VisibilityMode`]. Under restricted
//! visibility the peer and end-customer fields are `None`, so a policy has no
//! way to read them.

use serde::{Deserialize, Serialize};

use crate::config::VisibilityMode;
use crate::error::{ConfigError, EngineError};
use crate::money::Money;
use crate::role::Role;

/// Mean absolute deviation to standard deviation, for normally distributed
/// forecast errors.
pub const MAD_TO_STD: f64 = 1.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicySpec {
    /// Orders are entered by a player each week.
    Human,
    /// Order up to a fixed base-stock level computed from the configured
    /// demand mean and standard deviation.
    BaseStock { z: f64 },
    /// Order up to a base-stock level whose demand estimates are smoothed
    /// from the demand stream the seat is allowed to see.
    ForecastBaseStock { z: f64, smoothing_alpha: f64 },
    /// Order a fixed quantity whenever the inventory position falls strictly
    /// below the reorder point.
    #[serde(rename = "s_q")]
    ReorderPoint {
        #[serde(rename = "s")]
        reorder_point: u64,
        #[serde(rename = "Q", alias = "q")]
        quantity: u64,
    },
}

impl PolicySpec {
    pub fn is_human(&self) -> bool {
        matches!(self, PolicySpec::Human)
    }

    pub fn smoothing_alpha(&self) -> Option<f64> {
        match *self {
            PolicySpec::ForecastBaseStock {
                smoothing_alpha, ..
            } => Some(smoothing_alpha),
            _ => None,
        }
    }

    pub fn validate(&self, field: &str) -> Result<(), ConfigError> {
        match *self {
            PolicySpec::Human => Ok(()),
            PolicySpec::BaseStock { z } => check_z(field, z),
            PolicySpec::ForecastBaseStock { z, smoothing_alpha } => {
                check_z(field, z)?;
                if !(0.0..=1.0).contains(&smoothing_alpha) {
                    return Err(ConfigError::new(
                        format!("{field}.smoothing_alpha"),
                        format!("must lie in [0, 1], got {smoothing_alpha}"),
                    ));
                }
                Ok(())
            }
            PolicySpec::ReorderPoint { quantity, .. } => {
                if quantity < 1 {
                    return Err(ConfigError::new(format!("{field}.Q"), "must be at least 1"));
                }
                Ok(())
            }
        }
    }
}

fn check_z(field: &str, z: f64) -> Result<(), ConfigError> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(format!("{field}.z"), "must be finite"))
    }
}

/// Inputs of the periodic-review base-stock computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseStockParams {
    /// Weeks between reviews.
    pub review_period: u32,
    /// Weeks from shipment to arrival.
    pub lead_time: u32,
    pub demand_mean: f64,
    pub demand_std: f64,
    /// Safety factor (standard normal quantile of the target service level).
    pub z: f64,
}

impl BaseStockParams {
    /// Weeks of demand one order has to cover: the review period plus lead time.
    pub fn protection_weeks(&self) -> f64 {
        f64::from(self.review_period) + f64::from(self.lead_time)
    }

    pub fn safety_stock(&self) -> f64 {
        self.z * self.demand_std * self.protection_weeks().sqrt()
    }

    /// Unrounded order-up-to level `mean·(R+L) + z·std·√(R+L)`.
    pub fn order_up_to_level(&self) -> f64 {
        self.demand_mean * self.protection_weeks() + self.safety_stock()
    }

    /// Average on-hand inventory under the policy: half a review period of
    /// cycle stock plus the safety stock.
    pub fn average_inventory_level(&self) -> f64 {
        f64::from(self.review_period) * self.demand_mean / 2.0 + self.safety_stock()
    }

    pub fn with_z(self, z: f64) -> Self {
        BaseStockParams { z, ..self }
    }

    pub fn with_demand(self, demand_mean: f64, demand_std: f64) -> Self {
        BaseStockParams {
            demand_mean,
            demand_std,
            ..self
        }
    }
}

/// Order-up-to level in whole units, rounded up.
pub fn base_stock_level(params: &BaseStockParams) -> u64 {
    let level = params.order_up_to_level();
    if level.is_nan() || level <= 0.0 {
        return 0;
    }
    // Products like 4·3 must not round up through float noise.
    (level - 1e-9).ceil().min(u64::MAX as f64) as u64
}

/// Running demand estimate kept by each seat.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastState {
    pub mean: f64,
    pub std: f64,
}

/// Exponential smoothing of the mean, and of the absolute forecast error
/// (scaled to a standard deviation).
pub fn update_forecast(state: ForecastState, observed: u64, alpha: f64) -> ForecastState {
    let d = observed as f64;
    let error = (d - state.mean).abs();
    ForecastState {
        mean: (alpha * d + (1.0 - alpha) * state.mean).max(0.0),
        std: (alpha * MAD_TO_STD * error + (1.0 - alpha) * state.std).max(0.0),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeerInfo<'a> {
    pub role: Role,
    pub cumulative_cost: Money,
    pub backlog: u64,
    pub order_history: &'a [u64],
}

#[derive(Clone, Debug, PartialEq)]
pub struct EndCustomerDemand<'a> {
    pub history: &'a [u64],
    pub mean: f64,
    pub std: f64,
}

impl<'a> EndCustomerDemand<'a> {
    pub fn from_history(history: &'a [u64]) -> Self {
        let n = history.len() as f64;
        let mean = if history.is_empty() {
            0.0
        } else {
            history.iter().map(|&d| d as f64).sum::<f64>() / n
        };
        let std = if history.len() < 2 {
            0.0
        } else {
            let ss: f64 = history.iter().map(|&d| (d as f64 - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        };
        EndCustomerDemand { history, mean, std }
    }
}

/// What a seat may base its order on.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation<'a> {
    pub role: Role,
    pub week: u32,
    pub visibility: VisibilityMode,
    pub on_hand: u64,
    pub backlog: u64,
    pub inventory_position: i64,
    /// Orders received from the immediate downstream (end-customer demand for
    /// the retailer).
    pub demand_history: &'a [u64],
    pub order_history: &'a [u64],
    pub forecast: ForecastState,
    pub peers: Option<Vec<PeerInfo<'a>>>,
    pub end_customer: Option<EndCustomerDemand<'a>>,
}

impl Observation<'_> {
    /// Latest demand figure the seat may forecast from: end-customer demand
    /// when it is visible, otherwise the seat's own incoming orders.
    pub fn demand_signal(&self) -> Option<u64> {
        match &self.end_customer {
            Some(end) => end.history.last().copied(),
            None => self.demand_history.last().copied(),
        }
    }
}

/// Order quantity for an automated seat. Pure: no randomness, no state.
pub fn decide_order(
    spec: &PolicySpec,
    obs: &Observation<'_>,
    params: &BaseStockParams,
) -> Result<u64, EngineError> {
    let order = match *spec {
        PolicySpec::Human => return Err(EngineError::HumanPolicy(obs.role)),
        PolicySpec::BaseStock { z } => {
            order_up_to(base_stock_level(&params.with_z(z)), obs.inventory_position)
        }
        PolicySpec::ForecastBaseStock { z, .. } => {
            let params = params
                .with_z(z)
                .with_demand(obs.forecast.mean, obs.forecast.std);
            order_up_to(base_stock_level(&params), obs.inventory_position)
        }
        PolicySpec::ReorderPoint {
            reorder_point,
            quantity,
        } => {
            if obs.inventory_position < i64::try_from(reorder_point).unwrap_or(i64::MAX) {
                quantity
            } else {
                0
            }
        }
    };
    Ok(order)
}

fn order_up_to(level: u64, inventory_position: i64) -> u64 {
    let gap = i128::from(level) - i128::from(inventory_position);
    gap.clamp(0, i128::from(u64::MAX)) as u64
}
