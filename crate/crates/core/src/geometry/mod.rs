//! Poisson point patterns, their Delaunay/Voronoi structure, per-cell
//! circumradii, and the analytic circumradius distribution of the typical
//! Poisson-Voronoi cell.

mod circumradius;
mod delaunay;
mod ppp;

pub use circumradius::CircumradiusDistribution;
pub use delaunay::{build_tessellation, build_tessellation_with_guard, cell_circumradius, CellRadius, Tessellation};
pub use ppp::{empirical_circumradius_sample, sample_ppp, AnnulusRegion, PointPattern};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("degenerate region: inner radius {inner} must be below outer radius {outer}")]
    DegenerateRegion { inner: f64, outer: f64 },
    #[error("intensity must be positive and finite, got {0}")]
    BadIntensity(f64),
    #[error("need at least 3 points to tessellate, got {0}")]
    TooFewPoints(usize),
    #[error("all input points are collinear")]
    CollinearPoints,
    #[error("nucleus index {index} out of range for {count} nuclei")]
    BadNucleusIndex { index: usize, count: usize },
    #[error("point location failed during triangulation (degenerate input?)")]
    LocationFailed,
    #[error("region sizing failed: {0}")]
    RegionSizing(String),
    #[error(
        "truncated circumradius series went negative ({value:.3e} at r = {r:.4}); \
         increase series_terms or simplex_samples"
    )]
    SeriesNotConverged { r: f64, value: f64 },
    #[error("distribution parameter out of range: {0}")]
    BadDistributionParameter(String),
}
