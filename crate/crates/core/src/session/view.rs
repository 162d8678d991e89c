//! Per-seat views pushed to player clients.

use serde::{Deserialize, Serialize};

use super::{Phase, Seat, SessionId, SessionState};
use crate::config::VisibilityMode;
use crate::engine::inventory_position;
use crate::metrics::{RoleSummary, RunSummary};
use crate::money::Money;
use crate::role::Role;

/// Wire protocol version carried as `"v"` in every payload.
pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeatView {
    Agent,
    Human { player_name: String },
}

/// One role's week-by-week history.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoleSeries {
    pub orders: Vec<u64>,
    pub inventory: Vec<u64>,
    pub backlog: Vec<u64>,
    pub cumulative_cost: Vec<Money>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OwnView {
    pub on_hand: u64,
    pub backlog: u64,
    pub inventory_position: i64,
    pub cumulative_cost: Money,
    /// Order already submitted for the current week, if any.
    pub pending_order: Option<u64>,
    pub demand_stream: Vec<u64>,
    pub series: RoleSeries,
    /// Own final figures, once the game is over.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<RoleSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeerView {
    pub role: Role,
    pub on_hand: u64,
    pub backlog: u64,
    pub cumulative_cost: Money,
    pub orders: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainView {
    /// Indexed retailer to factory.
    pub cumulative_cost: [Vec<Money>; 4],
    pub orders: [Vec<u64>; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewPayload {
    pub v: u32,
    pub session_id: SessionId,
    pub role: Role,
    pub visibility: VisibilityMode,
    pub phase: Phase,
    pub weeks_played: u32,
    pub horizon_weeks: u32,
    pub seat: SeatView,
    pub own: OwnView,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peers: Option<Vec<PeerView>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_customer_demand: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<RunSummary>,
}

fn series(state: &SessionState, role: Role) -> RoleSeries {
    let mut s = RoleSeries::default();
    for rec in state.records() {
        let rw = rec.role(role);
        s.orders.push(rw.order_placed);
        s.inventory.push(rw.ending_inventory);
        s.backlog.push(rw.ending_backlog);
        s.cumulative_cost.push(rw.cumulative_cost);
    }
    s
}

pub(super) fn build(state: &SessionState, role: Role) -> ViewPayload {
    let game = state.game();
    let rs = game.role(role);
    let summary = state.summary();
    let own = OwnView {
        on_hand: rs.on_hand,
        backlog: rs.backlog,
        inventory_position: inventory_position(rs),
        cumulative_cost: rs.cumulative_cost,
        pending_order: state.pending_orders().get(&role).copied(),
        demand_stream: rs.demand_history.clone(),
        series: series(state, role),
        summary: summary.as_ref().map(|s| s.role(role).clone()),
    };
    let seat = match state.seat(role) {
        Seat::Agent => SeatView::Agent,
        Seat::Human { player_name, .. } => SeatView::Human {
            player_name: player_name.clone(),
        },
    };
    let visibility = state.config().visibility;
    let (peers, chain, end_customer_demand, summary) = match visibility {
        VisibilityMode::Restricted => (None, None, None, None),
        VisibilityMode::Full => {
            let peers = Role::ALL
                .into_iter()
                .filter(|r| *r != role)
                .map(|r| {
                    let p = game.role(r);
                    PeerView {
                        role: r,
                        on_hand: p.on_hand,
                        backlog: p.backlog,
                        cumulative_cost: p.cumulative_cost,
                        orders: p.order_history.clone(),
                    }
                })
                .collect();
            let all = Role::ALL.map(|r| series(state, r));
            let chain = ChainView {
                cumulative_cost: all.clone().map(|s| s.cumulative_cost),
                orders: all.map(|s| s.orders),
            };
            (
                Some(peers),
                Some(chain),
                Some(game.external_demand_history().to_vec()),
                summary,
            )
        }
    };
    ViewPayload {
        v: PROTOCOL_VERSION,
        session_id: state.session_id().clone(),
        role,
        visibility,
        phase: state.phase(),
        weeks_played: game.week(),
        horizon_weeks: state.config().horizon_weeks,
        seat,
        own,
        peers,
        chain,
        end_customer_demand,
        summary,
    }
}
