//! Beer Game simulation: engine, ordering policies, metrics, batch
//! experiments and live sessions.

pub mod config;
pub mod demand;
pub mod engine;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod metrics;
pub mod money;
pub mod policy;
pub mod record;
pub mod role;
pub mod session;
pub mod table;

pub use config::{GameConfig, Policies, VisibilityMode};
pub use engine::{advance_week, new_game, GameState, HumanOrders};
pub use error::{ConfigError, EngineError, MetricsError};
pub use money::Money;
pub use policy::PolicySpec;
pub use record::{RoleWeek, WeekRecord};
pub use role::Role;
