//! Exact algebra over finite-field towers and machine checks for Moore
//! determinants, the inseparable Cremona map, 1-foliations, divisor ledgers,
//! linear systems and point counts.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod counting;
pub mod cremona;
pub mod divlat;
pub mod error;
pub mod field;
pub mod foliation;
pub mod linalg;
pub mod linsys;
pub mod moore;
pub mod mpoly;
pub mod registry;
pub mod report;

pub use error::{Error, Result};
pub use field::{Fe, FieldTower};
pub use mpoly::{ChartSubstitution, Derivation, MPoly};
pub use report::{CheckReport, Status};

/// Hard resource caps shared by every check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Largest admissible |F_{q^m}|.
    pub max_field_size: u64,
    /// Largest admissible number of enumerated points or pairs.
    pub max_points: u64,
    /// Largest admissible degree of a Moore determinant.
    pub max_degree: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_field_size: 1 << 20,
            max_points: 10_000_000,
            max_degree: 200,
        }
    }
}

impl Budget {
    pub fn check_degree(&self, what: &str, degree: u64) -> Result<()> {
        if degree > self.max_degree {
            return Err(Error::Resource(alloc::format!(
                "{what} has degree {degree}, budget is {}",
                self.max_degree
            )));
        }
        Ok(())
    }

    pub fn check_points(&self, what: &str, count: u64) -> Result<()> {
        if count > self.max_points {
            return Err(Error::Resource(alloc::format!(
                "{what} needs {count} enumerations, budget is {}",
                self.max_points
            )));
        }
        Ok(())
    }
}

/// (q^k - 1)/(q - 1) = 1 + q + ... + q^{k-1}.
pub fn q_number(q: u64, k: u32) -> u64 {
    (0..k).map(|i| q.pow(i)).sum()
}

/// Ordinary binomial coefficient; 0 when k > n.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
