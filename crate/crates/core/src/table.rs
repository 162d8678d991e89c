//! Text and CSV renderings of group tables.
//!
//! Column order: R, W, D, F costs, total cost, R, W, D, F order STDs, and the
//! mean of the four STDs. Subgroup rows show whole-unit costs; the closing AVG
//! row shows column means to one decimal and the exact group total.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::metrics::GroupTable;
use crate::role::Role;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Text,
}

impl std::str::FromStr for TableFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "text" | "txt" => Ok(TableFormat::Text),
            other => Err(format!("unknown format `{other}` (expected csv or text)")),
        }
    }
}

/// A group table with its group label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledTable {
    pub label: String,
    pub table: GroupTable,
}

pub fn render(tables: &[LabeledTable], format: TableFormat) -> String {
    match format {
        TableFormat::Csv => render_csv(tables),
        TableFormat::Text => tables
            .iter()
            .map(|t| render_text(&t.label, &t.table))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

pub fn render_text(group: &str, table: &GroupTable) -> String {
    let mut out = String::new();
    let first = format!("Group {group}");
    let width = table
        .rows
        .iter()
        .map(|r| r.label.len())
        .chain([first.len(), 3])
        .max()
        .unwrap_or(3);
    let _ = write!(out, "{first:<width$}");
    for role in Role::ALL {
        let _ = write!(out, " {:>8}", role.initial());
    }
    let _ = write!(out, " {:>11}", "Total Cost");
    for (i, role) in Role::ALL.into_iter().enumerate() {
        let head = if i == 0 {
            format!("STD {}", role.initial())
        } else {
            role.initial().to_owned()
        };
        let _ = write!(out, " {head:>7}");
    }
    let _ = writeln!(out, " {:>7}", "AVG");

    for row in &table.rows {
        let s = &row.summary;
        let _ = write!(out, "{:<width$}", row.label);
        for r in &s.roles {
            let _ = write!(out, " {:>8}", r.total_cost.whole_units());
        }
        let _ = write!(out, " {:>11}", s.chain_total_cost.whole_units());
        for r in &s.roles {
            let _ = write!(out, " {:>7.2}", r.order_std);
        }
        let _ = writeln!(out, " {:>7.2}", s.avg_order_std);
    }

    let a = &table.averages;
    let _ = write!(out, "{:<width$}", "AVG");
    for c in a.role_costs {
        let _ = write!(out, " {c:>8.1}");
    }
    let _ = write!(out, " {:>11}", table.group_total_cost.whole_units());
    for s in a.order_stds {
        let _ = write!(out, " {s:>7.1}");
    }
    let _ = writeln!(out, " {:>7.1}", a.avg_order_std);
    out
}

pub fn render_csv(tables: &[LabeledTable]) -> String {
    let mut out = String::from(
        "group,label,cost_R,cost_W,cost_D,cost_F,total_cost,std_R,std_W,std_D,std_F,avg_std\n",
    );
    for LabeledTable {
        label: group,
        table,
    } in tables
    {
        for row in &table.rows {
            let s = &row.summary;
            let _ = write!(out, "{group},{}", row.label);
            for r in &s.roles {
                let _ = write!(out, ",{}", r.total_cost);
            }
            let _ = write!(out, ",{}", s.chain_total_cost);
            for r in &s.roles {
                let _ = write!(out, ",{:.4}", r.order_std);
            }
            let _ = writeln!(out, ",{:.4}", s.avg_order_std);
        }
        let a = &table.averages;
        let _ = write!(out, "{group},AVG");
        for c in a.role_costs {
            let _ = write!(out, ",{c:.1}");
        }
        let _ = write!(out, ",{}", table.group_total_cost);
        for s in a.order_stds {
            let _ = write!(out, ",{s:.1}");
        }
        let _ = writeln!(out, ",{:.1}", a.avg_order_std);
    }
    out
}
