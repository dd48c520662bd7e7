use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument violated a documented invariant (the message names it).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A scan would exceed the configured number of elementary operations.
    #[error("operation budget exceeded: scan needs {required} operations, budget is {limit}")]
    BudgetExceeded { required: u128, limit: u64 },
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    /// A division that the algorithm guarantees to be exact was not.
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Default number of elementary operations a single command may spend.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Upper limit on the scan volume of a single command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    limit: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit }
    }

    pub fn unlimited() -> Self {
        Budget { limit: u64::MAX }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn check(&self, required: u128) -> Result<()> {
        if required > self.limit as u128 {
            Err(Error::BudgetExceeded {
                required,
                limit: self.limit,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET)
    }
}
