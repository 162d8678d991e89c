//! The weekly state machine.
//!
//! A week runs five phases over all roles, each phase on the balances left
//! by the previous one:
//!
//! 1. receive the shipment due this week;
//! 2. receive the order due this week (the retailer draws end-customer demand);
//! 3. fill backlog plus new demand from stock, ship to the downstream role;
//! 4. charge holding and backorder cost on the closing balances;
//! 5. place orders, upstream or (factory) to the raw-material source.
//!
//! Shipments placed in week `t` arrive in phase 1 of week `t + L`; a zero
//! shipping delay delivers them at the end of phase 3 of the same week. Orders
//! placed in week `t` are received in phase 2 of week `t + max(order_delay, 1)`,
//! since phase 5 comes after phase 2. The source behind the factory fills
//! every order in full.

use std::collections::{BTreeMap, VecDeque};

use crate::config::{GameConfig, VisibilityMode};
use crate::demand::{generate_demand, DemandRng};
use crate::error::{ConfigError, EngineError};
use crate::money::Money;
use crate::policy::{
    decide_order, update_forecast, EndCustomerDemand, ForecastState, Observation, PeerInfo,
    PolicySpec,
};
use crate::record::{RoleWeek, WeekRecord};
use crate::role::{Role, CHAIN_LENGTH};

/// Orders entered by players for the coming week.
pub type HumanOrders = BTreeMap<Role, u64>;

#[derive(Clone, Debug, PartialEq)]
pub struct RoleState {
    pub role: Role,
    pub on_hand: u64,
    pub backlog: u64,
    /// Front slot arrives next week.
    pub shipping_pipeline: VecDeque<u64>,
    /// Orders from the downstream role still in the mail; front is read next.
    pub inbound_order_queue: VecDeque<u64>,
    /// Units ordered from the supplier that it has not shipped yet (in the
    /// mail or on its backlog).
    pub on_order: u64,
    pub cumulative_cost: Money,
    pub order_history: Vec<u64>,
    pub demand_history: Vec<u64>,
    pub forecast: ForecastState,
}

impl RoleState {
    fn new(role: Role, config: &GameConfig) -> Self {
        let fill = config.initial_pipeline_fill;
        RoleState {
            role,
            on_hand: config.initial_inventory,
            backlog: 0,
            shipping_pipeline: std::iter::repeat_n(fill, config.shipping_delay as usize).collect(),
            inbound_order_queue: std::iter::repeat_n(fill, config.order_delay as usize).collect(),
            on_order: fill * u64::from(config.order_delay),
            cumulative_cost: Money::ZERO,
            order_history: Vec::new(),
            demand_history: Vec::new(),
            forecast: ForecastState {
                mean: config.demand_mean,
                std: config.demand_std,
            },
        }
    }

    pub fn in_transit(&self) -> u64 {
        self.shipping_pipeline.iter().sum()
    }
}

/// On hand, minus backlog, plus in transit, plus on order.
pub fn inventory_position(state: &RoleState) -> i64 {
    let on_hand = i64::try_from(state.on_hand).unwrap_or(i64::MAX);
    let backlog = i64::try_from(state.backlog).unwrap_or(i64::MAX);
    let in_transit = i64::try_from(state.in_transit()).unwrap_or(i64::MAX);
    let on_order = i64::try_from(state.on_order).unwrap_or(i64::MAX);
    on_hand
        .saturating_sub(backlog)
        .saturating_add(in_transit)
        .saturating_add(on_order)
}

/// One game in progress. Plain data, so it can move between threads.
#[derive(Clone, Debug, PartialEq)]
pub struct GameState {
    config: GameConfig,
    week: u32,
    roles: [RoleState; CHAIN_LENGTH],
    /// Factory orders on their way to the raw-material source.
    supply_queue: VecDeque<u64>,
    external_demand: Vec<u64>,
    rng: DemandRng,
}

pub fn new_game(config: GameConfig) -> Result<GameState, ConfigError> {
    GameState::new(config)
}

pub fn advance_week(
    state: &mut GameState,
    human_orders: &HumanOrders,
) -> Result<WeekRecord, EngineError> {
    state.advance_week(human_orders)
}

impl GameState {
    pub fn new(config: GameConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let roles = Role::ALL.map(|r| RoleState::new(r, &config));
        let supply_queue =
            std::iter::repeat_n(config.initial_pipeline_fill, config.order_delay as usize)
                .collect();
        let rng = DemandRng::seed_from(config.rng_seed);
        Ok(GameState {
            config,
            week: 0,
            roles,
            supply_queue,
            external_demand: Vec::new(),
            rng,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    /// Weeks played so far.
    pub fn week(&self) -> u32 {
        self.week
    }

    pub fn is_finished(&self) -> bool {
        self.week >= self.config.horizon_weeks
    }

    pub fn role(&self, role: Role) -> &RoleState {
        &self.roles[role.index()]
    }

    pub fn roles(&self) -> &[RoleState; CHAIN_LENGTH] {
        &self.roles
    }

    pub fn external_demand_history(&self) -> &[u64] {
        &self.external_demand
    }

    pub fn supply_queue(&self) -> &VecDeque<u64> {
        &self.supply_queue
    }

    /// The seat's view of the chain under the configured visibility.
    pub fn observation(&self, role: Role) -> Observation<'_> {
        let own = self.role(role);
        let full = self.config.visibility == VisibilityMode::Full;
        let peers = full.then(|| {
            self.roles
                .iter()
                .filter(|r| r.role != role)
                .map(|r| PeerInfo {
                    role: r.role,
                    cumulative_cost: r.cumulative_cost,
                    backlog: r.backlog,
                    order_history: &r.order_history,
                })
                .collect()
        });
        let end_customer = full.then(|| EndCustomerDemand::from_history(&self.external_demand));
        Observation {
            role,
            week: self.week,
            visibility: self.config.visibility,
            on_hand: own.on_hand,
            backlog: own.backlog,
            inventory_position: inventory_position(own),
            demand_history: &own.demand_history,
            order_history: &own.order_history,
            forecast: own.forecast,
            peers,
            end_customer,
        }
    }

    fn is_review_week(&self, week: u32) -> bool {
        (week - 1).is_multiple_of(self.config.review_period)
    }

    /// Plays one week. On error the state is left untouched.
    pub fn advance_week(&mut self, human_orders: &HumanOrders) -> Result<WeekRecord, EngineError> {
        if self.is_finished() {
            return Err(EngineError::Finished(self.week));
        }
        for (role, spec) in self.config.policies.iter() {
            if spec.is_human() && !human_orders.contains_key(&role) {
                return Err(EngineError::IncompleteTurn(role));
            }
        }
        let week = self.week + 1;

        // Exactly one draw per week, even when the demand is scripted.
        let drawn = generate_demand(
            &mut self.rng,
            self.config.demand_mean,
            self.config.demand_std,
        );
        let external = self
            .config
            .demand_script
            .as_ref()
            .and_then(|s| s.get(week as usize - 1).copied())
            .unwrap_or(drawn);

        // 1. receive shipments
        for rs in &mut self.roles {
            if let Some(arrived) = rs.shipping_pipeline.pop_front() {
                rs.on_hand += arrived;
            }
        }

        // 2. receive orders
        let mut demand = [0u64; CHAIN_LENGTH];
        for (i, rs) in self.roles.iter_mut().enumerate() {
            demand[i] = if i == 0 {
                external
            } else {
                rs.inbound_order_queue.pop_front().unwrap_or(0)
            };
        }
        let supply = self.supply_queue.pop_front().unwrap_or(0);

        // 3. fulfill
        let mut shipped = [0u64; CHAIN_LENGTH];
        for (i, rs) in self.roles.iter_mut().enumerate() {
            let owed = rs.backlog + demand[i];
            shipped[i] = rs.on_hand.min(owed);
            rs.on_hand -= shipped[i];
            rs.backlog = owed - shipped[i];
        }
        // what each role receives from its supplier; the retailer's shipments
        // leave the chain
        let mut deliveries = [0u64; CHAIN_LENGTH];
        deliveries[..CHAIN_LENGTH - 1].copy_from_slice(&shipped[1..]);
        deliveries[CHAIN_LENGTH - 1] = supply;
        let immediate = self.config.shipping_delay == 0;
        for (rs, &units) in self.roles.iter_mut().zip(&deliveries) {
            debug_assert!(rs.on_order >= units);
            rs.on_order = rs.on_order.saturating_sub(units);
            if immediate {
                rs.on_hand += units;
            } else {
                rs.shipping_pipeline.push_back(units);
            }
        }

        // 4. cost
        let mut week_cost = [Money::ZERO; CHAIN_LENGTH];
        for (i, rs) in self.roles.iter_mut().enumerate() {
            week_cost[i] =
                self.config.holding_cost * rs.on_hand + self.config.backorder_cost * rs.backlog;
            rs.cumulative_cost += week_cost[i];
        }

        // 5. order, every seat deciding on the same snapshot
        for (rs, &d) in self.roles.iter_mut().zip(&demand) {
            rs.demand_history.push(d);
        }
        self.external_demand.push(external);
        self.week = week;

        let review = self.is_review_week(week);
        let mut orders = [0u64; CHAIN_LENGTH];
        let mut forecasts = [ForecastState {
            mean: 0.0,
            std: 0.0,
        }; CHAIN_LENGTH];
        for role in Role::ALL {
            let i = role.index();
            let spec = self.config.policies[role];
            let mut obs = self.observation(role);
            if let (Some(alpha), Some(signal)) = (spec.smoothing_alpha(), obs.demand_signal()) {
                obs.forecast = update_forecast(obs.forecast, signal, alpha);
            }
            forecasts[i] = obs.forecast;
            orders[i] = match spec {
                PolicySpec::Human => human_orders[&role],
                _ if !review => 0,
                _ => {
                    let params = self.config.base_stock_params(0.0);
                    decide_order(&spec, &obs, &params)?
                }
            };
        }
        for (i, rs) in self.roles.iter_mut().enumerate() {
            rs.order_history.push(orders[i]);
            rs.forecast = forecasts[i];
            rs.on_order += orders[i];
        }
        for (upstream, &order) in self.roles[1..].iter_mut().zip(&orders) {
            upstream.inbound_order_queue.push_back(order);
        }
        self.supply_queue.push_back(orders[CHAIN_LENGTH - 1]);

        let roles = Role::ALL.map(|role| {
            let i = role.index();
            let rs = &self.roles[i];
            RoleWeek {
                role,
                demand_received: demand[i],
                shipped: shipped[i],
                order_placed: orders[i],
                ending_inventory: rs.on_hand,
                ending_backlog: rs.backlog,
                week_cost: week_cost[i],
                cumulative_cost: rs.cumulative_cost,
            }
        });
        Ok(WeekRecord {
            week,
            external_demand: external,
            roles,
        })
    }

    /// Plays to the horizon with no human input.
    pub fn run_to_end(&mut self) -> Result<Vec<WeekRecord>, EngineError> {
        let empty = HumanOrders::new();
        let mut records = Vec::with_capacity(self.config.horizon_weeks as usize);
        while !self.is_finished() {
            records.push(self.advance_week(&empty)?);
        }
        Ok(records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::to_csv_string;

    fn quiet_config() -> GameConfig {
        GameConfig {
            shipping_delay: 2,
            initial_pipeline_fill: 0,
            demand_mean: 0.0,
            demand_std: 0.0,
            policies: crate::config::Policies::uniform(PolicySpec::Human),
            ..GameConfig::default()
        }
    }

    fn zero_orders() -> HumanOrders {
        Role::ALL.into_iter().map(|r| (r, 0)).collect()
    }

    #[test]
    fn default_initial_state() {
        let g = new_game(GameConfig::default()).unwrap();
        for rs in g.roles() {
            assert_eq!(rs.on_hand, 12);
            assert_eq!(rs.backlog, 0);
            assert_eq!(rs.shipping_pipeline, [4, 4]);
            assert_eq!(rs.inbound_order_queue, [4]);
            assert_eq!(rs.cumulative_cost, Money::ZERO);
            assert_eq!(inventory_position(rs), 24);
        }
        assert_eq!(g.week(), 0);
    }

    #[test]
    fn zero_initial_inventory() {
        let g = new_game(GameConfig {
            initial_inventory: 0,
            ..GameConfig::default()
        })
        .unwrap();
        assert!(g
            .roles()
            .iter()
            .all(|r| r.on_hand == 0 && r.backlog == 0 && r.cumulative_cost == Money::ZERO));
    }

    #[test]
    fn same_seed_same_state() {
        let a = new_game(GameConfig::default()).unwrap();
        let b = new_game(GameConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_config_names_field() {
        let err = new_game(GameConfig {
            horizon_weeks: 0,
            ..GameConfig::default()
        })
        .unwrap_err();
        assert_eq!(err.field, "horizon_weeks");
    }

    #[test]
    fn pure_holding_week() {
        let mut g = new_game(quiet_config()).unwrap();
        let rec = g.advance_week(&zero_orders()).unwrap();
        for rw in &rec.roles {
            assert_eq!(rw.ending_inventory, 12);
            assert_eq!(rw.week_cost, Money::from_cents(600));
        }
        assert_eq!(rec.chain_week_cost(), Money::from_units(24));
    }

    #[test]
    fn backorder_week() {
        let mut g = new_game(GameConfig {
            initial_inventory: 4,
            demand_script: Some(vec![10]),
            ..quiet_config()
        })
        .unwrap();
        let rec = g.advance_week(&zero_orders()).unwrap();
        let r = rec.role(Role::Retailer);
        assert_eq!((r.shipped, r.ending_backlog), (4, 6));
        assert_eq!(r.week_cost, Money::from_units(6));
    }

    #[test]
    fn position_examples() {
        let mut rs = RoleState::new(Role::Wholesaler, &GameConfig::default());
        assert_eq!(inventory_position(&rs), 24);
        rs.on_hand = 0;
        rs.backlog = 6;
        rs.shipping_pipeline.clear();
        rs.on_order = 0;
        assert_eq!(inventory_position(&rs), -6);
    }

    #[test]
    fn missing_human_order_leaves_state() {
        let mut g = new_game(quiet_config()).unwrap();
        let before = g.clone();
        let mut partial = zero_orders();
        partial.remove(&Role::Distributor);
        assert_eq!(
            g.advance_week(&partial),
            Err(EngineError::IncompleteTurn(Role::Distributor))
        );
        assert_eq!(g, before);
    }

    #[test]
    fn finished_game_refuses_more_weeks() {
        let mut g = new_game(GameConfig {
            horizon_weeks: 2,
            ..GameConfig::default()
        })
        .unwrap();
        assert_eq!(g.run_to_end().unwrap().len(), 2);
        assert_eq!(
            g.advance_week(&HumanOrders::new()),
            Err(EngineError::Finished(2))
        );
    }

    #[test]
    fn zero_shipping_delay_delivers_same_week() {
        let mut g = new_game(GameConfig {
            shipping_delay: 0,
            initial_inventory: 10,
            demand_script: Some(vec![3]),
            ..quiet_config()
        })
        .unwrap();
        let mut orders = zero_orders();
        // wholesaler receives nothing in week 1 (order queue starts empty)
        orders.insert(Role::Retailer, 5);
        let rec = g.advance_week(&orders).unwrap();
        assert_eq!(rec.role(Role::Retailer).ending_inventory, 7);
        let rec = g.advance_week(&zero_orders()).unwrap();
        // the retailer's 5 are shipped by the wholesaler and on hand the same week
        assert_eq!(rec.role(Role::Wholesaler).shipped, 5);
        assert_eq!(rec.role(Role::Retailer).ending_inventory, 7 + 5);
    }

    #[test]
    fn review_period_gates_agent_orders() {
        let mut g = new_game(GameConfig {
            review_period: 3,
            demand_std: 0.0,
            initial_inventory: 0,
            initial_pipeline_fill: 0,
            policies: crate::config::Policies::uniform(PolicySpec::BaseStock { z: 0.0 }),
            ..GameConfig::default()
        })
        .unwrap();
        let records = g.run_to_end().unwrap();
        for rec in &records {
            let order = rec.role(Role::Retailer).order_placed;
            if (rec.week - 1) % 3 != 0 {
                assert_eq!(order, 0, "week {}", rec.week);
            }
        }
        assert!(records[0].role(Role::Retailer).order_placed > 0);
    }

    #[test]
    fn csv_header() {
        let mut g = new_game(GameConfig::default()).unwrap();
        let rec = g.advance_week(&HumanOrders::new()).unwrap();
        let csv = to_csv_string(&[rec]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(crate::record::CSV_HEADER));
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().nth(1).unwrap().starts_with("1,retailer,"));
    }
}
