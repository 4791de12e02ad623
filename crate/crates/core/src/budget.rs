use crate::error::{Error, Result};

pub const DEFAULT_PATH_BUDGET: u64 = 1 << 22;

/// Upper bound on the number of path combinations an operation may enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathBudget(pub u64);

impl Default for PathBudget {
    fn default() -> Self {
        PathBudget(DEFAULT_PATH_BUDGET)
    }
}

impl PathBudget {
    pub fn unlimited() -> Self {
        PathBudget(u64::MAX)
    }

    pub fn check(&self, required: u128) -> Result<()> {
        if required > self.0 as u128 {
            Err(Error::BudgetExceeded {
                required,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// `2^bits`, saturating.
pub(crate) fn pow2(bits: usize) -> u128 {
    if bits >= 127 {
        u128::MAX
    } else {
        1u128 << bits
    }
}
