//! Parameter sweeps over the polytropic index.
//!
//! Every solve is a pure function of `(n, config)`, so sweeps map
//! independently over the list. With the `parallel` feature (default) the map
//! runs on the rayon pool; otherwise it is a plain loop. Results always come
//! back in input order.

use serde::Serialize;

use crate::algebra::{determining_scan, Rat, ScanResult};
use crate::error::Result;
use crate::ode::{first_zero_state, Index, SolverConfig};

/// One row of the first-zero table. Missing values mean `ψ > 0` up to `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroRow {
    pub n: f64,
    pub xi1: Option<f64>,
    /// `-ψ'(ξ₁)`.
    pub minus_dpsi: Option<f64>,
}

impl ZeroRow {
    pub fn termination(&self) -> &'static str {
        if self.xi1.is_some() {
            "first_zero"
        } else {
            "reached_r_max"
        }
    }
}

pub fn map_sequential<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_parallel<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    map_sequential(items, f)
}

/// Chooses between the two maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Sequential,
    #[default]
    Parallel,
}

fn map<T, U, F>(mode: Mode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match mode {
        Mode::Sequential => map_sequential(items, f),
        Mode::Parallel => map_parallel(items, f),
    }
}

pub fn zero_row(n: Index, config: &SolverConfig) -> Result<ZeroRow> {
    let state = first_zero_state(n, config)?;
    Ok(ZeroRow { n: n.value(), xi1: state.map(|s| s.r), minus_dpsi: state.map(|s| -s.dpsi) })
}

/// First zeros for every index in `ns`; the first failure aborts the table.
pub fn first_zero_table(ns: &[Index], config: &SolverConfig, mode: Mode) -> Result<Vec<ZeroRow>> {
    config.validate()?;
    map(mode, ns, |&n| zero_row(n, config)).into_iter().collect()
}

pub fn scan_sweep(ns: &[Rat], degree: u32, mode: Mode) -> Result<Vec<ScanResult>> {
    map(mode, ns, |n| determining_scan(n, degree)).into_iter().collect()
}
