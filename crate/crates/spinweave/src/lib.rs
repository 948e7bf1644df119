//! Simulator and metrology toolkit for engineered spin networks.
//!
//! Everything here lives in the zero-, one- and two-excitation subspaces of
//! XY-coupled spin networks with engineered couplings. Networks are described
//! as weighted graphs ([`network::NetworkSpec`]), turned into dense Hermitian
//! subspace Hamiltonians ([`dynamics::assemble`]) and propagated exactly by
//! eigendecomposition. On top of that sit the interferometric chain-length
//! protocols ([`protocols`]) and the dual-rail / holonomic gate constructions
//! ([`gates`]).
//!
//! Units: ħ = 1, the chain strength λ defaults to 1 and all times are in
//! units of 1/λ (the end-to-end transfer time is then π).
//!
//! Coupling convention: the amplitude stored on a network edge is the
//! single-excitation matrix element itself. A spin coupling written as
//! J (σxσx + σyσy) contributes a hop element of 2J, so the perfect chain
//! with J_n = λ√(n(N−n))/4 stores hop amplitudes (λ/2)√(n(N−n)).

pub mod cli;
pub mod dynamics;
pub mod gates;
pub mod network;
pub mod protocols;

use thiserror::Error;

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network size: {0}")]
    InvalidSize(String),
    #[error("site index {site} out of range for {n_sites} sites")]
    InvalidSite { site: usize, n_sites: usize },
    #[error("link index {r} out of range 1..={max}")]
    InvalidLink { r: usize, max: usize },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("excitation number {0} not supported (must be 1 or 2)")]
    InvalidExcitationNumber(usize),
    #[error("dimension mismatch: operator {op} vs state {state}")]
    DimensionMismatch { op: usize, state: usize },
    #[error("vacuum amplitude too small to serve as a phase reference")]
    VanishingVacuum,
    #[error("sweep grid too coarse: {points} points for {needed} required")]
    GridTooCoarse { points: usize, needed: usize },
    #[error("no root found in bracket for P = {0}")]
    NoRoot(f64),
    #[error("invalid error model: {0}")]
    InvalidErrorModel(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Wrap an angle to (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut y = x % two_pi;
    if y <= -std::f64::consts::PI {
        y += two_pi;
    } else if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

/// Binomial coefficient as f64 (exact for the small arguments used here).
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.3) - 0.3).abs() < 1e-15);
        assert!((wrap_angle(-7.0) - (-7.0 + 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn binomial_small() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(9, 0), 1.0);
        assert_eq!(binomial(4, 5), 0.0);
        assert_eq!(binomial(15, 7), 6435.0);
    }
}
