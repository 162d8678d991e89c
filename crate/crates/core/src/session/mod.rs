//! Live multi-player sessions.
//!
//! A session is an append-only list of [`Event`]s; [`SessionState`] is the
//! fold of that list. Commands validate against the current state, append
//! events and apply them, so [`SessionState::replay`] of a session's log
//! rebuilds the identical state.

mod log;
mod view;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::GameConfig;
use crate::engine::GameState;
use crate::error::{ConfigError, EngineError};
use crate::metrics::RunSummary;
use crate::policy::PolicySpec;
use crate::record::WeekRecord;
use crate::role::{Role, CHAIN_LENGTH};

pub use log::{read_log, EventLog};
pub use view::{ChainView, OwnView, PeerView, RoleSeries, SeatView, ViewPayload, PROTOCOL_VERSION};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(String);

impl SessionId {
    pub fn random() -> Self {
        SessionId(uuid::Uuid::new_v4().simple().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<String> for SessionId {
    fn from(s: String) -> Self {
        SessionId(s)
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Opaque token identifying a seated player.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(String);

impl PlayerId {
    pub fn random() -> Self {
        PlayerId(uuid::Uuid::new_v4().simple().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<String> for PlayerId {
    fn from(s: String) -> Self {
        PlayerId(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Seat {
    Agent,
    Human {
        player_id: PlayerId,
        player_name: String,
    },
}

impl Seat {
    pub fn is_human(&self) -> bool {
        matches!(self, Seat::Human { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Phase {
    Lobby,
    /// Collecting orders for `week` (1-based).
    AwaitingOrders {
        week: u32,
    },
    Finished,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Lobby => f.write_str("lobby"),
            Phase::AwaitingOrders { week } => write!(f, "awaiting orders for week {week}"),
            Phase::Finished => f.write_str("finished"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    SessionCreated {
        session_id: SessionId,
        config: GameConfig,
    },
    PlayerJoined {
        role: Role,
        player_id: PlayerId,
        player_name: String,
    },
    GameStarted,
    OrderSubmitted {
        role: Role,
        week: u32,
        quantity: u64,
    },
    WeekAdvanced {
        record: WeekRecord,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error(transparent)]
    InvalidConfig(#[from] ConfigError),
    #[error("seat {0} is already taken")]
    SeatTaken(Role),
    #[error("session is {actual}; this needs {expected}")]
    WrongPhase {
        expected: &'static str,
        actual: Phase,
    },
    #[error("unknown player")]
    UnknownPlayer,
    #[error("stale turn: order for week {submitted}, session is at week {current}")]
    StaleTurn { current: u32, submitted: u32 },
    #[error("game is finished")]
    Finished,
    #[error("event log does not replay: {0}")]
    Replay(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderAck {
    pub role: Role,
    pub week: u32,
    /// The order on record; for a repeated submission, the first one.
    pub quantity: u64,
    pub duplicate: bool,
    /// Weeks played after this submission.
    pub weeks_played: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SessionState {
    session_id: SessionId,
    config: GameConfig,
    seats: [Seat; CHAIN_LENGTH],
    pending_orders: BTreeMap<Role, u64>,
    game: GameState,
    phase: Phase,
    records: Vec<WeekRecord>,
    event_log: Vec<Event>,
}

impl SessionState {
    pub fn create(config: GameConfig) -> Result<Self, SessionError> {
        Self::create_with_id(config, SessionId::random())
    }

    pub fn create_with_id(config: GameConfig, session_id: SessionId) -> Result<Self, SessionError> {
        let game = GameState::new(seated_config(&config, &Self::agent_seats()))?;
        let mut state = SessionState {
            session_id: session_id.clone(),
            config: config.clone(),
            seats: Self::agent_seats(),
            pending_orders: BTreeMap::new(),
            game,
            phase: Phase::Lobby,
            records: Vec::new(),
            event_log: Vec::new(),
        };
        state
            .event_log
            .push(Event::SessionCreated { session_id, config });
        Ok(state)
    }

    fn agent_seats() -> [Seat; CHAIN_LENGTH] {
        [Seat::Agent, Seat::Agent, Seat::Agent, Seat::Agent]
    }

    /// Rebuilds a session from its event log.
    pub fn replay(events: &[Event]) -> Result<Self, SessionError> {
        let (first, rest) = events
            .split_first()
            .ok_or_else(|| SessionError::Replay("empty log".into()))?;
        let Event::SessionCreated { session_id, config } = first else {
            return Err(SessionError::Replay(
                "log must start with session_created".into(),
            ));
        };
        let mut state = Self::create_with_id(config.clone(), session_id.clone())?;
        for event in rest {
            state.replay_event(event.clone())?;
        }
        Ok(state)
    }

    pub fn session_id(&self) -> &SessionId {
        &self.session_id
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn seats(&self) -> &[Seat; CHAIN_LENGTH] {
        &self.seats
    }

    pub fn seat(&self, role: Role) -> &Seat {
        &self.seats[role.index()]
    }

    pub fn pending_orders(&self) -> &BTreeMap<Role, u64> {
        &self.pending_orders
    }

    pub fn game(&self) -> &GameState {
        &self.game
    }

    pub fn records(&self) -> &[WeekRecord] {
        &self.records
    }

    pub fn events(&self) -> &[Event] {
        &self.event_log
    }

    pub fn summary(&self) -> Option<RunSummary> {
        (self.phase == Phase::Finished)
            .then(|| RunSummary::from_records(&self.records).ok())
            .flatten()
    }

    pub fn role_of(&self, player: &PlayerId) -> Option<Role> {
        Role::ALL
            .into_iter()
            .find(|r| matches!(self.seat(*r), Seat::Human { player_id, .. } if player_id == player))
    }

    pub fn join(&mut self, role: Role, player_name: &str) -> Result<PlayerId, SessionError> {
        self.expect_lobby()?;
        if self.seat(role).is_human() {
            return Err(SessionError::SeatTaken(role));
        }
        let player_id = PlayerId::random();
        self.commit(Event::PlayerJoined {
            role,
            player_id: player_id.clone(),
            player_name: player_name.to_owned(),
        })?;
        Ok(player_id)
    }

    /// Leaves the lobby. Weeks with no human seat to wait for are played
    /// straight away.
    pub fn start(&mut self) -> Result<(), SessionError> {
        self.expect_lobby()?;
        self.commit(Event::GameStarted)?;
        self.advance_while_ready()
    }

    pub fn submit_order(
        &mut self,
        player: &PlayerId,
        week: u32,
        quantity: u64,
    ) -> Result<OrderAck, SessionError> {
        let role = self.role_of(player).ok_or(SessionError::UnknownPlayer)?;
        let current = match self.phase {
            Phase::AwaitingOrders { week } => week,
            Phase::Finished => return Err(SessionError::Finished),
            Phase::Lobby => {
                return Err(SessionError::WrongPhase {
                    expected: "a started game",
                    actual: self.phase,
                })
            }
        };
        if week != current {
            return Err(SessionError::StaleTurn {
                current,
                submitted: week,
            });
        }
        if let Some(&first) = self.pending_orders.get(&role) {
            return Ok(OrderAck {
                role,
                week,
                quantity: first,
                duplicate: true,
                weeks_played: self.game.week(),
            });
        }
        self.commit(Event::OrderSubmitted {
            role,
            week,
            quantity,
        })?;
        self.advance_while_ready()?;
        Ok(OrderAck {
            role,
            week,
            quantity,
            duplicate: false,
            weeks_played: self.game.week(),
        })
    }

    pub fn state_view(&self, role: Role) -> ViewPayload {
        view::build(self, role)
    }

    fn expect_lobby(&self) -> Result<(), SessionError> {
        if self.phase == Phase::Lobby {
            Ok(())
        } else {
            Err(SessionError::WrongPhase {
                expected: "lobby",
                actual: self.phase,
            })
        }
    }

    fn quorum(&self) -> bool {
        Role::ALL
            .into_iter()
            .filter(|r| self.seat(*r).is_human())
            .all(|r| self.pending_orders.contains_key(&r))
    }

    fn advance_while_ready(&mut self) -> Result<(), SessionError> {
        while matches!(self.phase, Phase::AwaitingOrders { .. }) && self.quorum() {
            let record = self.game.advance_week(&self.pending_orders)?;
            self.close_week(record.clone());
            self.event_log.push(Event::WeekAdvanced { record });
        }
        Ok(())
    }

    fn close_week(&mut self, record: WeekRecord) {
        self.pending_orders.clear();
        self.records.push(record);
        self.phase = if self.game.is_finished() {
            Phase::Finished
        } else {
            Phase::AwaitingOrders {
                week: self.game.week() + 1,
            }
        };
    }

    fn commit(&mut self, event: Event) -> Result<(), SessionError> {
        self.apply(&event)?;
        self.event_log.push(event);
        Ok(())
    }

    fn apply(&mut self, event: &Event) -> Result<(), SessionError> {
        match event {
            Event::SessionCreated { .. } => {
                return Err(SessionError::Replay("second session_created".into()))
            }
            Event::PlayerJoined {
                role,
                player_id,
                player_name,
            } => {
                self.seats[role.index()] = Seat::Human {
                    player_id: player_id.clone(),
                    player_name: player_name.clone(),
                };
            }
            Event::GameStarted => {
                self.game = GameState::new(seated_config(&self.config, &self.seats))?;
                self.phase = if self.game.is_finished() {
                    Phase::Finished
                } else {
                    Phase::AwaitingOrders { week: 1 }
                };
            }
            Event::OrderSubmitted { role, quantity, .. } => {
                self.pending_orders.insert(*role, *quantity);
            }
            Event::WeekAdvanced { .. } => {
                return Err(SessionError::Replay(
                    "weeks advance only through orders".into(),
                ))
            }
        }
        Ok(())
    }

    fn replay_event(&mut self, event: Event) -> Result<(), SessionError> {
        match event {
            Event::WeekAdvanced { record } => {
                let replayed = self.game.advance_week(&self.pending_orders)?;
                if replayed != record {
                    return Err(SessionError::Replay(format!(
                        "week {} does not reproduce its logged record",
                        record.week
                    )));
                }
                self.close_week(replayed);
                self.event_log.push(Event::WeekAdvanced { record });
                Ok(())
            }
            other => self.commit(other),
        }
    }
}

/// The game actually played: human seats take `Human` policies, and agent
/// seats configured as human fall back to base stock.
fn seated_config(config: &GameConfig, seats: &[Seat; CHAIN_LENGTH]) -> GameConfig {
    let mut out = config.clone();
    for role in Role::ALL {
        if seats[role.index()].is_human() {
            out.policies[role] = PolicySpec::Human;
        } else if out.policies[role].is_human() {
            out.policies[role] = PolicySpec::BaseStock {
                z: config.service_factor_z,
            };
        }
    }
    out
}
