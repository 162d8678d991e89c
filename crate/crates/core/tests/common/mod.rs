#![allow(dead_code)]

use beergame_core::config::{GameConfig, Policies, VisibilityMode};
use beergame_core::record::{to_csv_string, WeekRecord};
use beergame_core::{GameState, Money, PolicySpec, Role};
use proptest::prelude::*;

pub fn policy_strategy() -> impl Strategy<Value = PolicySpec> {
    prop_oneof![
        (-1.0f64..3.0).prop_map(|z| PolicySpec::BaseStock { z }),
        (-1.0f64..3.0, 0.0f64..=1.0).prop_map(|(z, smoothing_alpha)| {
            PolicySpec::ForecastBaseStock { z, smoothing_alpha }
        }),
        (0u64..30, 1u64..20).prop_map(|(reorder_point, quantity)| PolicySpec::ReorderPoint {
            reorder_point,
            quantity
        }),
    ]
}

prop_compose! {
    pub fn config_strategy()(
        horizon_weeks in 1u32..40,
        review_period in 1u32..5,
        shipping_delay in 0u32..5,
        order_delay in 0u32..4,
        holding in 0i64..200,
        backorder in 0i64..300,
        demand_mean in 0.0f64..12.0,
        demand_std in 0.0f64..6.0,
        rng_seed in any::<u64>(),
        initial_inventory in 0u64..30,
        initial_pipeline_fill in 0u64..9,
        full in any::<bool>(),
        service_factor_z in -1.0f64..3.0,
        policies in prop::array::uniform4(policy_strategy()),
    ) -> GameConfig {
        let mut p = Policies::uniform(PolicySpec::BaseStock { z: 0.0 });
        for (role, spec) in Role::ALL.into_iter().zip(policies) {
            p[role] = spec;
        }
        GameConfig {
            horizon_weeks,
            review_period,
            shipping_delay,
            order_delay,
            holding_cost: Money::from_cents(holding),
            backorder_cost: Money::from_cents(backorder),
            demand_mean,
            demand_std,
            demand_script: None,
            rng_seed,
            initial_inventory,
            initial_pipeline_fill,
            visibility: if full { VisibilityMode::Full } else { VisibilityMode::Restricted },
            service_factor_z,
            policies: p,
        }
    }
}

pub fn play(config: &GameConfig) -> Vec<WeekRecord> {
    GameState::new(config.clone())
        .expect("generated configs are valid")
        .run_to_end()
        .expect("agent games run to the horizon")
}

fn series(records: &[WeekRecord], f: impl Fn(&WeekRecord) -> u64) -> Vec<u64> {
    records.iter().map(f).collect()
}

/// Units a role receives from upstream at the start of week `t` (1-based).
fn arrivals(cfg: &GameConfig, records: &[WeekRecord], role: Role, t: usize) -> u64 {
    let l = cfg.shipping_delay as usize;
    let upstream_ship = |week: usize| -> u64 {
        match role.upstream() {
            Some(up) => records[week - 1].role(up).shipped,
            None => source_supply(cfg, records, week),
        }
    };
    if l == 0 {
        upstream_ship(t)
    } else if t <= l {
        cfg.initial_pipeline_fill
    } else {
        upstream_ship(t - l)
    }
}

/// Order that `from` placed and that reaches its supplier in week `t`.
fn delayed_order(cfg: &GameConfig, records: &[WeekRecord], from: Role, t: usize) -> u64 {
    let d = cfg.order_delay as usize;
    let effective = d.max(1);
    if t <= effective {
        if t <= d {
            cfg.initial_pipeline_fill
        } else {
            0
        }
    } else {
        records[t - effective - 1].role(from).order_placed
    }
}

fn source_supply(cfg: &GameConfig, records: &[WeekRecord], t: usize) -> u64 {
    delayed_order(cfg, records, Role::Factory, t)
}

/// Stock balance: on hand moves only by arrivals and shipments.
pub fn check_conservation(cfg: &GameConfig, records: &[WeekRecord]) -> Result<(), String> {
    let immediate = cfg.shipping_delay == 0;
    for role in Role::ALL {
        let mut on_hand = cfg.initial_inventory;
        for (k, rec) in records.iter().enumerate() {
            let t = k + 1;
            let rw = rec.role(role);
            let arrived = arrivals(cfg, records, role, t);
            let available = if immediate {
                on_hand
            } else {
                on_hand + arrived
            };
            if rw.shipped > available {
                return Err(format!(
                    "{role} week {t}: shipped {} > available {available}",
                    rw.shipped
                ));
            }
            on_hand = on_hand + arrived - rw.shipped;
            if on_hand != rw.ending_inventory {
                return Err(format!(
                    "{role} week {t}: inventory {} != balance {on_hand}",
                    rw.ending_inventory
                ));
            }
        }
    }
    let chain_in: u64 = (1..=records.len())
        .map(|t| arrivals(cfg, records, Role::Factory, t))
        .sum();
    let chain_out: u64 = series(records, |r| r.role(Role::Retailer).shipped)
        .iter()
        .sum();
    let start = 4 * cfg.initial_inventory;
    let end: u64 = records
        .last()
        .map_or(start, |r| r.roles.iter().map(|x| x.ending_inventory).sum());
    // units in transit between roles are not in anyone's on-hand figure
    let mut transit_in = 0u64;
    let mut transit_out = 0u64;
    for role in [Role::Retailer, Role::Wholesaler, Role::Distributor] {
        transit_in += (1..=records.len())
            .map(|t| arrivals(cfg, records, role, t))
            .sum::<u64>();
        transit_out += series(records, |r| r.role(role.upstream().unwrap()).shipped)
            .iter()
            .sum::<u64>();
    }
    if start + chain_in + transit_in != end + chain_out + transit_out {
        return Err("chain-wide stock does not balance".into());
    }
    Ok(())
}

pub fn check_non_negativity(cfg: &GameConfig, records: &[WeekRecord]) -> Result<(), String> {
    for rec in records {
        for rw in &rec.roles {
            if rw.week_cost.is_negative() || rw.cumulative_cost.is_negative() {
                return Err(format!("{} week {}: negative cost", rw.role, rec.week));
            }
            if cfg.shipping_delay > 0 && rw.ending_inventory > 0 && rw.ending_backlog > 0 {
                return Err(format!(
                    "{} week {}: stock held while in backlog",
                    rw.role, rec.week
                ));
            }
        }
    }
    Ok(())
}

/// Orders travel unchanged through the order delay; backlog books every
/// unit of demand not yet shipped.
pub fn check_flow_conservation(cfg: &GameConfig, records: &[WeekRecord]) -> Result<(), String> {
    for (k, rec) in records.iter().enumerate() {
        let t = k + 1;
        if rec.role(Role::Retailer).demand_received != rec.external_demand {
            return Err(format!("week {t}: retailer demand is not external demand"));
        }
        for role in [Role::Wholesaler, Role::Distributor, Role::Factory] {
            let downstream = role.downstream().unwrap();
            let expected = delayed_order(cfg, records, downstream, t);
            if rec.role(role).demand_received != expected {
                return Err(format!(
                    "{role} week {t}: demand {} != order {expected}",
                    rec.role(role).demand_received
                ));
            }
        }
    }
    for role in Role::ALL {
        let mut backlog = 0u64;
        for rec in records {
            let rw = rec.role(role);
            let owed = backlog + rw.demand_received;
            if rw.shipped > owed {
                return Err(format!("{role} week {}: shipped more than owed", rec.week));
            }
            backlog = owed - rw.shipped;
            if backlog != rw.ending_backlog {
                return Err(format!("{role} week {}: backlog drift", rec.week));
            }
        }
    }
    Ok(())
}

pub fn check_cost_identity(cfg: &GameConfig, records: &[WeekRecord]) -> Result<(), String> {
    let mut cum = [Money::ZERO; 4];
    for rec in records {
        for rw in &rec.roles {
            let expect =
                cfg.holding_cost * rw.ending_inventory + cfg.backorder_cost * rw.ending_backlog;
            if rw.week_cost != expect {
                return Err(format!(
                    "{} week {}: cost {} != {expect}",
                    rw.role, rec.week, rw.week_cost
                ));
            }
            cum[rw.role.index()] += rw.week_cost;
            if rw.cumulative_cost != cum[rw.role.index()] {
                return Err(format!("{} week {}: cumulative drift", rw.role, rec.week));
            }
        }
    }
    Ok(())
}

pub fn check_determinism(cfg: &GameConfig, records: &[WeekRecord]) -> Result<(), String> {
    let again = play(cfg);
    if to_csv_string(&again) != to_csv_string(records) {
        return Err("same config and seed gave different runs".into());
    }
    Ok(())
}

/// Demand for `active` weeks then none, with room for a long drain.
pub fn drain_config(mut cfg: GameConfig, active: &[u64]) -> GameConfig {
    let mut script = active.to_vec();
    script.extend(std::iter::repeat_n(0, DRAIN_CAP));
    cfg.horizon_weeks = script.len() as u32;
    cfg.demand_script = Some(script);
    cfg
}

const DRAIN_CAP: usize = 50_000;

/// Once demand stops, every backlog clears in finitely many weeks. Returns
/// the week it happened.
pub fn check_eventual_fulfillment(cfg: &GameConfig, active: &[u64]) -> Result<u32, String> {
    let mut game = GameState::new(drain_config(cfg.clone(), active)).map_err(|e| e.to_string())?;
    let none = beergame_core::HumanOrders::new();
    while !game.is_finished() {
        let rec = game.advance_week(&none).map_err(|e| e.to_string())?;
        if rec.week as usize > active.len() && rec.roles.iter().all(|r| r.ending_backlog == 0) {
            return Ok(rec.week);
        }
    }
    Err(format!(
        "backlog outstanding {DRAIN_CAP} weeks after demand stopped"
    ))
}

/// Every per-run invariant, plus fulfillment on a drained variant.
pub fn check_all(cfg: &GameConfig, active: &[u64]) -> Result<(), String> {
    let records = play(cfg);
    if records.len() != cfg.horizon_weeks as usize {
        return Err("wrong number of weeks".into());
    }
    check_conservation(cfg, &records)?;
    check_non_negativity(cfg, &records)?;
    check_flow_conservation(cfg, &records)?;
    check_cost_identity(cfg, &records)?;
    check_determinism(cfg, &records)?;
    check_eventual_fulfillment(cfg, active).map(|_| ())
}

/// Three weeks worked out by hand outside this crate.
pub const TRACE: &str = "\
week,role,demand,shipped,order,inventory,backlog,week_cost,cum_cost
1,retailer,4,4,0,12,0,6.00,6.00
1,wholesaler,4,4,0,12,0,6.00,6.00
1,distributor,4,4,0,12,0,6.00,6.00
1,factory,4,4,0,12,0,6.00,6.00
2,retailer,4,4,0,12,0,6.00,12.00
2,wholesaler,0,0,0,16,0,8.00,14.00
2,distributor,0,0,0,16,0,8.00,14.00
2,factory,0,0,0,16,0,8.00,14.00
3,retailer,8,8,4,8,0,4.00,16.00
3,wholesaler,0,0,0,20,0,10.00,24.00
3,distributor,0,0,0,20,0,10.00,24.00
3,factory,0,0,0,20,0,10.00,24.00
";

pub fn scripted_config() -> GameConfig {
    GameConfig {
        horizon_weeks: 3,
        demand_script: Some(vec![4, 4, 8]),
        ..GameConfig::default()
    }
}
