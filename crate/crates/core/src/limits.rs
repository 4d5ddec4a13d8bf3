use crate::error::{Error, Result};

/// Default cap on the tensor dimension `n^k` and on dense matrix sides.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Default cap on the number of sequences `enumerate_r` may produce.
pub const DEFAULT_MAX_SEQUENCES: usize = 1_000_000;

/// Size caps shared by every operation whose cost grows like `n^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest allowed tensor dimension `n^k`; dense results are at most
    /// `max_dim x max_dim`.
    pub max_dim: usize,
    /// Largest allowed length of an enumerated `R(n,k)` list.
    pub max_sequences: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_dim: DEFAULT_MAX_DIM,
            max_sequences: DEFAULT_MAX_SEQUENCES,
        }
    }
}

impl Limits {
    pub fn with_max_dim(max_dim: usize) -> Self {
        Limits {
            max_dim,
            ..Limits::default()
        }
    }

    pub(crate) fn check_dim(&self, what: &str, dim: u128) -> Result<usize> {
        if dim > self.max_dim as u128 {
            return Err(Error::resource(what, dim, self.max_dim as u128));
        }
        Ok(dim as usize)
    }

    /// Checks `n^k` against `max_dim` and returns it.
    pub(crate) fn check_power(&self, what: &str, n: usize, k: usize) -> Result<usize> {
        self.check_dim(what, checked_pow(n, k))
    }
}

/// `n^k` saturating at `u128::MAX`.
pub(crate) fn checked_pow(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc = match acc.checked_mul(n as u128) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    acc
}
