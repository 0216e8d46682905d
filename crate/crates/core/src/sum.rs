//! Summation helpers with a fixed reduction order.
//!
//! Monte Carlo reductions are split into fixed-size chunks, each chunk is
//! reduced sequentially, and the chunk results are combined pairwise in index
//! order. The result therefore does not depend on how many threads did the
//! work.

use num_complex::Complex64;
use rayon::prelude::*;
use std::ops::{Add, Range};

/// Points per work unit. Part of the determinism contract: changing it
/// changes the rounding of every Monte Carlo estimate.
pub const CHUNK: usize = 4096;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// `self - earlier`, keeping the low-order parts separate until the end.
    pub fn difference(&self, earlier: &Self) -> f64 {
        (self.sum - earlier.sum) + (self.comp - earlier.comp)
    }
}

/// Pairwise reduction in index order.
pub fn pairwise<T: Copy + Add<Output = T>>(values: &[T], zero: T) -> T {
    match values.len() {
        0 => zero,
        1 => values[0],
        n => {
            let mid = n / 2;
            pairwise(&values[..mid], zero) + pairwise(&values[mid..], zero)
        }
    }
}

pub fn pairwise_f64(values: &[f64]) -> f64 {
    pairwise(values, 0.0)
}

pub fn pairwise_complex(values: &[Complex64]) -> Complex64 {
    pairwise(values, Complex64::new(0.0, 0.0))
}

/// Runs `f` over `0..len` in [`CHUNK`]-sized ranges (in parallel) and returns
/// the per-chunk results in index order.
pub fn map_chunks<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let chunks = len.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(len)))
        .collect()
}
