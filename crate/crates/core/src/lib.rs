//! Average interference at a radar from a Poisson field of elevation-beamforming
//! massive MIMO base stations, and exclusion-zone sizing against thresholds.
//!
//! The library is organized around two cell-shape models for the worst-case
//! elevation angle of each base station:
//!
//! * **CBC** (circumcircle-based cell): every Voronoi cell is replaced by the
//!   smallest disk centered at its nucleus that contains it. The circumradius
//!   of the typical Poisson-Voronoi cell has a known series density
//!   ([`geometry::CircumradiusDistribution`]), and averaging the monotone
//!   beamforming-gain bound over it yields a tight upper bound on the mean
//!   interference ([`analytic::interference_cbc`]).
//! * **AAECC** (average-area-equivalent circular cell): every cell is replaced
//!   by a disk of area `1/lambda`, yielding the nominal mean interference
//!   ([`analytic::interference_aaecc`]).
//!
//! Both models are validated against a full tessellation Monte Carlo oracle
//! ([`montecarlo::run_simulation`]), and closed-form approximations of both
//! drive the exclusion-zone radius solver
//! ([`analytic::solve_exclusion_radius`]).
//!
//! [`results::run_config`] wires everything into a configuration-driven runner
//! that emits CSV tables and SVG sweep plots.

// validation guards use negated comparisons deliberately: `!(x > 0.0)`
// rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod array;
pub mod channel;
pub mod geometry;
pub mod montecarlo;
pub mod quad;
pub mod results;
pub mod svg;

/// Converts a linear power in watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Converts a power in dBm to linear watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Derives an independent substream seed from a master seed and an index
/// (SplitMix64 step); realizations, jitter, and fallback draws all run on
/// substreams of this form.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) use derive_seed as mix_seed;
