//! Figures computed from week ledgers: per-role totals, order dispersion,
//! bullwhip ratios, subgroup tables, group comparisons and player reports.

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::money::Money;
use crate::record::WeekRecord;
use crate::role::{Role, CHAIN_LENGTH};

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample variance, n−1 denominator.
pub fn sample_variance(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs)?;
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    Some(ss / (xs.len() - 1) as f64)
}

pub fn sample_std(xs: &[f64]) -> Option<f64> {
    sample_variance(xs).map(f64::sqrt)
}

pub fn order_series(records: &[WeekRecord], role: Role) -> Vec<f64> {
    records
        .iter()
        .map(|r| r.role(role).order_placed as f64)
        .collect()
}

pub fn total_cost(records: &[WeekRecord], role: Role) -> Result<Money, MetricsError> {
    records
        .last()
        .map(|r| r.role(role).cumulative_cost)
        .ok_or(MetricsError::EmptyRecords)
}

pub fn order_std(records: &[WeekRecord], role: Role) -> Result<f64, MetricsError> {
    sample_std(&order_series(records, role)).ok_or(MetricsError::TooFewWeeks(records.len()))
}

/// Variance of the role's orders over the variance of end-customer demand.
pub fn bullwhip_ratio(records: &[WeekRecord], role: Role) -> Result<f64, MetricsError> {
    let demand: Vec<f64> = records.iter().map(|r| r.external_demand as f64).collect();
    let demand_var = sample_variance(&demand).ok_or(MetricsError::TooFewWeeks(records.len()))?;
    if demand_var == 0.0 {
        return Err(MetricsError::ZeroDemandVariance);
    }
    let orders_var = sample_variance(&order_series(records, role))
        .ok_or(MetricsError::TooFewWeeks(records.len()))?;
    Ok(orders_var / demand_var)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoleSummary {
    pub role: Role,
    pub total_cost: Money,
    pub order_std: f64,
    /// Absent when end-customer demand did not vary.
    pub bullwhip_ratio: Option<f64>,
}

/// End-of-run figures for one game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub roles: [RoleSummary; CHAIN_LENGTH],
    pub chain_total_cost: Money,
    pub avg_order_std: f64,
}

impl RunSummary {
    /// A one-week run has no order dispersion; its order STD is reported as 0.
    pub fn from_records(records: &[WeekRecord]) -> Result<Self, MetricsError> {
        if records.is_empty() {
            return Err(MetricsError::EmptyRecords);
        }
        let roles = Role::ALL.map(|role| RoleSummary {
            role,
            total_cost: total_cost(records, role).unwrap_or(Money::ZERO),
            order_std: order_std(records, role).unwrap_or(0.0),
            bullwhip_ratio: bullwhip_ratio(records, role).ok(),
        });
        Ok(Self::assemble(roles))
    }

    /// Summary from already-aggregated per-role figures, e.g. a published
    /// table row.
    pub fn from_figures(costs: [Money; CHAIN_LENGTH], order_stds: [f64; CHAIN_LENGTH]) -> Self {
        let roles = Role::ALL.map(|role| RoleSummary {
            role,
            total_cost: costs[role.index()],
            order_std: order_stds[role.index()],
            bullwhip_ratio: None,
        });
        Self::assemble(roles)
    }

    fn assemble(roles: [RoleSummary; CHAIN_LENGTH]) -> Self {
        let chain_total_cost = roles.iter().map(|r| r.total_cost).sum();
        let avg_order_std = roles.iter().map(|r| r.order_std).sum::<f64>() / CHAIN_LENGTH as f64;
        RunSummary {
            roles,
            chain_total_cost,
            avg_order_std,
        }
    }

    pub fn role(&self, role: Role) -> &RoleSummary {
        &self.roles[role.index()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub label: String,
    pub summary: RunSummary,
}

/// Column means over a group's rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupAverages {
    pub role_costs: [f64; CHAIN_LENGTH],
    pub chain_total_cost: f64,
    pub order_stds: [f64; CHAIN_LENGTH],
    pub avg_order_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupTable {
    pub rows: Vec<GroupRow>,
    pub averages: GroupAverages,
    pub group_total_cost: Money,
}

pub fn group_table(runs: Vec<RunSummary>, labels: Vec<String>) -> Result<GroupTable, MetricsError> {
    if runs.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    if runs.len() != labels.len() {
        return Err(MetricsError::LabelMismatch {
            labels: labels.len(),
            runs: runs.len(),
        });
    }
    let column = |f: &dyn Fn(&RunSummary) -> f64| -> f64 {
        mean(&runs.iter().map(f).collect::<Vec<_>>()).unwrap_or(0.0)
    };
    let averages = GroupAverages {
        role_costs: Role::ALL.map(|r| column(&|s| s.role(r).total_cost.to_f64())),
        chain_total_cost: column(&|s| s.chain_total_cost.to_f64()),
        order_stds: Role::ALL.map(|r| column(&|s| s.role(r).order_std)),
        avg_order_std: column(&|s| s.avg_order_std),
    };
    let group_total_cost = runs.iter().map(|s| s.chain_total_cost).sum();
    let rows = labels
        .into_iter()
        .zip(runs)
        .map(|(label, summary)| GroupRow { label, summary })
        .collect();
    Ok(GroupTable {
        rows,
        averages,
        group_total_cost,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Better {
    A,
    B,
    Tie,
}

impl Better {
    fn lower(a: f64, b: f64) -> Better {
        if a < b {
            Better::A
        } else if b < a {
            Better::B
        } else {
            Better::Tie
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a_total_cost: f64,
    pub b_total_cost: f64,
    /// `(b − a) / a · 100`; absent when `a` is zero and `b` is not.
    pub percent_difference: Option<f64>,
    pub a_avg_order_std: f64,
    pub b_avg_order_std: f64,
    /// `b / a` of the average order STDs.
    pub std_ratio: Option<f64>,
    pub lower_total_cost: Better,
    pub lower_order_std: Better,
}

pub fn compare_totals(a_total: f64, b_total: f64, a_std: f64, b_std: f64) -> ComparisonReport {
    let ratio = |a: f64, b: f64| {
        if a != 0.0 {
            Some(b / a)
        } else if b == 0.0 {
            Some(1.0)
        } else {
            None
        }
    };
    ComparisonReport {
        a_total_cost: a_total,
        b_total_cost: b_total,
        percent_difference: ratio(a_total, b_total).map(|r| (r - 1.0) * 100.0),
        a_avg_order_std: a_std,
        b_avg_order_std: b_std,
        std_ratio: ratio(a_std, b_std),
        lower_total_cost: Better::lower(a_total, b_total),
        lower_order_std: Better::lower(a_std, b_std),
    }
}

pub fn compare_groups(a: &GroupTable, b: &GroupTable) -> ComparisonReport {
    compare_totals(
        a.group_total_cost.to_f64(),
        b.group_total_cost.to_f64(),
        a.averages.avg_order_std,
        b.averages.avg_order_std,
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerWeek {
    pub week: u32,
    pub demand: u64,
    pub shipped: u64,
    pub inventory: u64,
    pub backlog: u64,
    pub order: u64,
    pub week_cost: Money,
    pub cumulative_cost: Money,
}

/// Week-by-week performance of one seat, with its end-of-run figures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerReport {
    pub role: Role,
    pub weeks: Vec<PlayerWeek>,
    pub total_cost: Money,
    /// Absent for a one-week run.
    pub order_std: Option<f64>,
}

pub fn player_report(records: &[WeekRecord], role: Role) -> Result<PlayerReport, MetricsError> {
    let total_cost = total_cost(records, role)?;
    let weeks = records
        .iter()
        .map(|r| {
            let rw = r.role(role);
            PlayerWeek {
                week: r.week,
                demand: rw.demand_received,
                shipped: rw.shipped,
                inventory: rw.ending_inventory,
                backlog: rw.ending_backlog,
                order: rw.order_placed,
                week_cost: rw.week_cost,
                cumulative_cost: rw.cumulative_cost,
            }
        })
        .collect();
    Ok(PlayerReport {
        role,
        weeks,
        total_cost,
        order_std: order_std(records, role).ok(),
    })
}

impl PlayerReport {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("week,demand,shipped,inventory,backlog,order,week_cost,cum_cost\n");
        for w in &self.weeks {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                w.week,
                w.demand,
                w.shipped,
                w.inventory,
                w.backlog,
                w.order,
                w.week_cost,
                w.cumulative_cost
            ));
        }
        out
    }

    /// Series for the inventory / backlog / order / cost charts.
    pub fn chart_payload(&self) -> serde_json::Value {
        serde_json::json!({
            "role": self.role,
            "weeks": self.weeks.iter().map(|w| w.week).collect::<Vec<_>>(),
            "inventory": self.weeks.iter().map(|w| w.inventory).collect::<Vec<_>>(),
            "backlog": self.weeks.iter().map(|w| w.backlog).collect::<Vec<_>>(),
            "order": self.weeks.iter().map(|w| w.order).collect::<Vec<_>>(),
            "cost": self.weeks.iter().map(|w| w.cumulative_cost).collect::<Vec<_>>(),
            "total_cost": self.total_cost,
            "order_std": self.order_std,
        })
    }
}
