use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One echelon of the chain, ordered downstream to upstream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Retailer,
    Wholesaler,
    Distributor,
    Factory,
}

pub const CHAIN_LENGTH: usize = 4;

impl Role {
    pub const ALL: [Role; CHAIN_LENGTH] = [
        Role::Retailer,
        Role::Wholesaler,
        Role::Distributor,
        Role::Factory,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Role> {
        Role::ALL.get(index).copied()
    }

    /// `None` for the retailer, whose customer is external.
    pub fn downstream(self) -> Option<Role> {
        self.index().checked_sub(1).and_then(Role::from_index)
    }

    /// `None` for the factory, which draws on an unbounded raw-material source.
    pub fn upstream(self) -> Option<Role> {
        Role::from_index(self.index() + 1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Retailer => "retailer",
            Role::Wholesaler => "wholesaler",
            Role::Distributor => "distributor",
            Role::Factory => "factory",
        }
    }

    pub fn initial(self) -> &'static str {
        match self {
            Role::Retailer => "R",
            Role::Wholesaler => "W",
            Role::Distributor => "D",
            Role::Factory => "F",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown role `{0}`")]
pub struct UnknownRole(pub String);

impl FromStr for Role {
    type Err = UnknownRole;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s) || r.initial().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownRole(s.to_owned()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbours() {
        assert_eq!(Role::Retailer.downstream(), None);
        assert_eq!(Role::Retailer.upstream(), Some(Role::Wholesaler));
        assert_eq!(Role::Factory.upstream(), None);
        assert_eq!(Role::Factory.downstream(), Some(Role::Distributor));
    }

    #[test]
    fn parse() {
        assert_eq!("Wholesaler".parse::<Role>(), Ok(Role::Wholesaler));
        assert_eq!("f".parse::<Role>(), Ok(Role::Factory));
        assert!("brewer".parse::<Role>().is_err());
    }
}
