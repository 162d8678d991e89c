//! Per-week ledger and its CSV form.

use std::io;

use serde::{Deserialize, Serialize};

use crate::money::Money;
use crate::role::{Role, CHAIN_LENGTH};

/// Header of the week-by-role CSV export.
pub const CSV_HEADER: &str = "week,role,demand,shipped,order,inventory,backlog,week_cost,cum_cost";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleWeek {
    pub role: Role,
    pub demand_received: u64,
    pub shipped: u64,
    pub order_placed: u64,
    pub ending_inventory: u64,
    pub ending_backlog: u64,
    pub week_cost: Money,
    pub cumulative_cost: Money,
}

/// What happened in one week, for every role.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeekRecord {
    pub week: u32,
    pub external_demand: u64,
    pub roles: [RoleWeek; CHAIN_LENGTH],
}

impl WeekRecord {
    pub fn role(&self, role: Role) -> &RoleWeek {
        &self.roles[role.index()]
    }

    pub fn chain_week_cost(&self) -> Money {
        self.roles.iter().map(|r| r.week_cost).sum()
    }
}

#[derive(Serialize)]
struct CsvRow {
    week: u32,
    role: &'static str,
    demand: u64,
    shipped: u64,
    order: u64,
    inventory: u64,
    backlog: u64,
    week_cost: String,
    cum_cost: String,
}

/// One row per (week, role), roles in chain order.
pub fn write_csv<W: io::Write>(records: &[WeekRecord], out: W) -> csv::Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    if records.is_empty() {
        writer.write_record(CSV_HEADER.split(','))?;
    }
    for record in records {
        for rw in &record.roles {
            writer.serialize(CsvRow {
                week: record.week,
                role: rw.role.name(),
                demand: rw.demand_received,
                shipped: rw.shipped,
                order: rw.order_placed,
                inventory: rw.ending_inventory,
                backlog: rw.ending_backlog,
                week_cost: rw.week_cost.to_string(),
                cum_cost: rw.cumulative_cost.to_string(),
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn to_csv_string(records: &[WeekRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}
