//! Homogeneous Poisson point process sampling on annular regions, and the
//! empirical circumradius sampler used as the validation oracle for the
//! analytic distribution.

use super::delaunay::{build_tessellation_with_guard, CellRadius};
use super::GeometryError;
use crate::mix_seed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

/// Guard depth for the empirical sampler, in units of `1/sqrt(pi*intensity)`:
/// nuclei closer than this to the region edge are discarded so that a typical
/// cell's circumcircle is not clipped by the sampling window.
const EMPIRICAL_GUARD_FACTOR: f64 = 3.0;

/// Accepted-cell target per realization when sizing the sampling window.
const CELLS_PER_REALIZATION: usize = 2500;

/// An annulus `inner <= |x| <= outer` centered at the origin. `inner == 0`
/// degenerates to a disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusRegion {
    pub inner_m: f64,
    pub outer_m: f64,
}

impl AnnulusRegion {
    pub fn new(inner_m: f64, outer_m: f64) -> Result<Self, GeometryError> {
        if !(inner_m >= 0.0 && outer_m.is_finite() && inner_m < outer_m) {
            return Err(GeometryError::DegenerateRegion { inner: inner_m, outer: outer_m });
        }
        Ok(Self { inner_m, outer_m })
    }

    pub fn disk(radius_m: f64) -> Result<Self, GeometryError> {
        Self::new(0.0, radius_m)
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * (self.outer_m * self.outer_m - self.inner_m * self.inner_m)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        r >= self.inner_m - 1e-9 && r <= self.outer_m + 1e-9
    }

    /// Distance from `p` to the nearest region edge (negative outside).
    pub fn depth(&self, p: [f64; 2]) -> f64 {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if self.inner_m > 0.0 {
            (r - self.inner_m).min(self.outer_m - r)
        } else {
            self.outer_m - r
        }
    }
}

/// A realized Poisson point pattern: positions, the region they were drawn
/// on, the generating intensity and the seed (kept for reproducibility).
#[derive(Debug, Clone)]
pub struct PointPattern {
    pub points: Vec<[f64; 2]>,
    pub region: AnnulusRegion,
    pub intensity: f64,
    pub seed: u64,
}

impl PointPattern {
    /// Wraps externally supplied points (lattices, fixtures) in a pattern.
    pub fn from_points(points: Vec<[f64; 2]>, region: AnnulusRegion) -> Self {
        let intensity = (points.len().max(1)) as f64 / region.area();
        Self { points, region, intensity, seed: 0 }
    }
}

/// Samples a homogeneous PPP of the given intensity (points per m^2) on the
/// region. The count is Poisson with mean `intensity * area`; positions are
/// i.i.d. uniform. Deterministic in `seed`.
pub fn sample_ppp(
    intensity: f64,
    region: AnnulusRegion,
    seed: u64,
) -> Result<PointPattern, GeometryError> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(GeometryError::BadIntensity(intensity));
    }
    let mean = intensity * region.area();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = Poisson::new(mean)
        .map_err(|_| GeometryError::BadIntensity(intensity))?
        .sample(&mut rng) as usize;
    let inner_sq = region.inner_m * region.inner_m;
    let span_sq = region.outer_m * region.outer_m - inner_sq;
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let r = (inner_sq + rng.random::<f64>() * span_sq).sqrt();
        let theta = rng.random::<f64>() * std::f64::consts::TAU;
        points.push([r * theta.cos(), r * theta.sin()]);
    }
    Ok(PointPattern { points, region, intensity, seed })
}

/// Circumradii of interior (non-boundary-flagged) cells collected from
/// repeated tessellations of disks sized so that each realization yields a
/// few thousand accepted cells. Returns at least `n_cells` values.
///
/// Deterministic in `seed`; realization `i` uses the substream
/// `mix_seed(seed, i)`. Because the sampling window scales as
/// `1/sqrt(intensity)` while the expected count stays fixed, identical seeds
/// at different intensities produce exactly scale-equivalent patterns.
pub fn empirical_circumradius_sample(
    intensity: f64,
    n_cells: usize,
    seed: u64,
) -> Result<Vec<f64>, GeometryError> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(GeometryError::BadIntensity(intensity));
    }
    if n_cells == 0 {
        return Err(GeometryError::RegionSizing("requested zero cells".into()));
    }
    let guard = EMPIRICAL_GUARD_FACTOR / (std::f64::consts::PI * intensity).sqrt();
    let per = CELLS_PER_REALIZATION.min(n_cells.max(200));
    let r_accept = (per as f64 / (std::f64::consts::PI * intensity)).sqrt();
    let region = AnnulusRegion::disk(r_accept + guard)?;

    let mut out = Vec::with_capacity(n_cells + per);
    let max_realizations = 16 + 4 * n_cells.div_ceil(per);
    let mut realization = 0u64;
    while out.len() < n_cells {
        if realization as usize >= max_realizations {
            return Err(GeometryError::RegionSizing(format!(
                "collected only {} of {} cells after {} realizations",
                out.len(),
                n_cells,
                realization
            )));
        }
        let pattern = sample_ppp(intensity, region, mix_seed(seed, realization))?;
        realization += 1;
        if pattern.points.len() < 3 {
            continue;
        }
        let tess = build_tessellation_with_guard(&pattern, guard)?;
        for radius in &tess.circumradii {
            if let CellRadius::Interior(r) = radius {
                out.push(*r);
            }
        }
    }
    Ok(out)
}
