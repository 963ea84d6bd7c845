//! Full-network Monte Carlo oracle: sample BS deployments on the network
//! disk, resolve each cell's worst-case elevation from its circumradius, and
//! accumulate the per-BS worst-case interference.
//!
//! Patterns are sampled on the whole disk including the exclusion zone: the
//! zone silences transmitters but does not change the cell structure of the
//! surviving network, so circumradii always come from the unthinned pattern.

use crate::analytic::{GainBoundTable, NetworkScenario};
use crate::array::BeamDirection;
use crate::array::normalized_gain;
use crate::channel::ChannelError;
use crate::geometry::{
    build_tessellation_with_guard, sample_ppp, AnnulusRegion, CellRadius,
    CircumradiusDistribution, GeometryError,
};
use crate::mix_seed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("simulation plan invalid: {0}")]
    BadPlan(String),
    #[error("boundary policy left zero usable interior BSs across all realizations")]
    ZeroInteriorBs,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("scenario invalid: {0}")]
    BadScenario(String),
}

/// How each BS's circumradius (hence worst-case elevation) is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircumradiusMode {
    /// From the Voronoi cell of the realized pattern (oracle for the CBC model).
    TrueVoronoi,
    /// Independent draws from the analytic density (same expectation as CBC
    /// by construction).
    IidAnalytic,
    /// The constant average-area radius (oracle for the AAECC model).
    FixedAverageArea,
}

/// What to do with cells flagged as boundary-affected in true-Voronoi mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryFallback {
    /// Substitute an analytic circumradius draw (default; keeps the estimate
    /// unbiased since the analytic law is the correct marginal).
    AnalyticDraw,
    /// Drop the flagged transmitters from the sum.
    Exclude,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundaryPolicy {
    /// Guard depth in units of `1/sqrt(pi*lambda)`.
    pub guard_factor: f64,
    pub fallback: BoundaryFallback,
}

impl Default for BoundaryPolicy {
    fn default() -> Self {
        Self { guard_factor: 3.0, fallback: BoundaryFallback::AnalyticDraw }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimulationPlan {
    pub scenario: NetworkScenario,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub circumradius_mode: CircumradiusMode,
    pub boundary_policy: BoundaryPolicy,
}

/// Monte Carlo mean with its standard error and the retained per-realization
/// network totals (watts).
#[derive(Debug, Clone)]
pub struct SimulationEstimate {
    pub mean_watts: f64,
    pub std_error_watts: f64,
    pub n_realizations: usize,
    pub per_realization_totals: Vec<f64>,
    /// Fraction of transmitters whose circumradius came from the boundary
    /// fallback (true-Voronoi mode only).
    pub fallback_fraction: f64,
}

/// One sweep cell: the estimate at a `(lambda, r_exc)` pair.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub intensity_bs: f64,
    pub r_exc_m: f64,
    pub estimate: SimulationEstimate,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

/// Runs the plan at its scenario's intensity and exclusion radius.
pub fn run_simulation(plan: &SimulationPlan) -> Result<SimulationEstimate, SimulationError> {
    let mut table = sweep(plan, &[plan.scenario.r_exc_m], &[plan.scenario.intensity_bs])?;
    Ok(table.rows.remove(0).estimate)
}

/// Cartesian sweep over exclusion radii and BS intensities. Realizations are
/// shared across exclusion radii by thinning the same pattern, so
/// per-realization totals are non-increasing in the exclusion radius.
pub fn sweep(
    plan: &SimulationPlan,
    r_exc_values_m: &[f64],
    intensity_values: &[f64],
) -> Result<SweepTable, SimulationError> {
    if plan.n_realizations == 0 {
        return Err(SimulationError::BadPlan("n_realizations must be >= 1".into()));
    }
    if r_exc_values_m.is_empty() || intensity_values.is_empty() {
        return Err(SimulationError::BadPlan("sweep grids must be non-empty".into()));
    }
    let s = &plan.scenario;
    if !s.r_net_m.is_finite() {
        return Err(SimulationError::BadPlan(
            "Monte Carlo needs a finite network extent".into(),
        ));
    }
    for &r in r_exc_values_m {
        if !(r > 0.0 && r < s.r_net_m) {
            return Err(SimulationError::BadPlan(format!(
                "exclusion radius {r} outside (0, {})",
                s.r_net_m
            )));
        }
    }

    // table over the LoS elevation span of all possible transmitter ranges
    let min_r_exc = r_exc_values_m.iter().copied().fold(f64::INFINITY, f64::min);
    let dh = s.pathloss.delta_h();
    let phi_a = (dh / s.r_net_m).atan();
    let phi_b = (dh / min_r_exc).atan();
    let table = GainBoundTable::new(&s.bs_array, phi_a.min(phi_b), phi_a.max(phi_b));

    let mut rows = Vec::with_capacity(intensity_values.len() * r_exc_values_m.len());
    for (lambda_index, &intensity) in intensity_values.iter().enumerate() {
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(SimulationError::BadPlan(format!("intensity {intensity} invalid")));
        }
        let dist = match plan.circumradius_mode {
            CircumradiusMode::IidAnalytic => Some(CircumradiusDistribution::with_defaults(intensity)?),
            CircumradiusMode::TrueVoronoi
                if plan.boundary_policy.fallback == BoundaryFallback::AnalyticDraw =>
            {
                Some(CircumradiusDistribution::with_defaults(intensity)?)
            }
            _ => None,
        };
        let lambda_seed = mix_seed(plan.master_seed, 0x10_0000 + lambda_index as u64);

        let per_real: Result<Vec<(Vec<f64>, usize, usize)>, SimulationError> = (0..plan.n_realizations)
            .into_par_iter()
            .map(|idx| {
                realization_totals(
                    s,
                    intensity,
                    plan.circumradius_mode,
                    plan.boundary_policy,
                    dist.as_ref(),
                    &table,
                    mix_seed(lambda_seed, idx as u64),
                    r_exc_values_m,
                )
            })
            .collect();
        let per_real = per_real?;

        let n = plan.n_realizations;
        let used: usize = per_real.iter().map(|(_, used, _)| used).sum();
        let fallbacks: usize = per_real.iter().map(|(_, _, f)| f).sum();
        if used == 0 && plan.boundary_policy.fallback == BoundaryFallback::Exclude {
            return Err(SimulationError::ZeroInteriorBs);
        }
        let fallback_fraction = if used > 0 { fallbacks as f64 / used as f64 } else { 0.0 };
        if fallback_fraction > 0.0 {
            log::debug!(
                "boundary fallback used for {:.2}% of transmitters at intensity {intensity:.3e}",
                100.0 * fallback_fraction
            );
        }

        for (rx, &r_exc) in r_exc_values_m.iter().enumerate() {
            let totals: Vec<f64> = per_real.iter().map(|(t, _, _)| t[rx]).collect();
            let mean = totals.iter().sum::<f64>() / n as f64;
            let var = if n > 1 {
                totals.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            rows.push(SweepRow {
                intensity_bs: intensity,
                r_exc_m: r_exc,
                estimate: SimulationEstimate {
                    mean_watts: mean,
                    std_error_watts: (var / n as f64).sqrt(),
                    n_realizations: n,
                    per_realization_totals: totals,
                    fallback_fraction,
                },
            });
        }
    }
    Ok(SweepTable { rows })
}

/// One realization: sample the full-disk pattern, resolve circumradii, and
/// total the per-BS worst-case interference for every exclusion radius.
/// Returns (totals per r_exc, transmitters used, fallback draws).
#[allow(clippy::too_many_arguments)]
fn realization_totals(
    s: &NetworkScenario,
    intensity: f64,
    mode: CircumradiusMode,
    policy: BoundaryPolicy,
    dist: Option<&CircumradiusDistribution>,
    table: &GainBoundTable,
    seed: u64,
    r_exc_values_m: &[f64],
) -> Result<(Vec<f64>, usize, usize), SimulationError> {
    let region = AnnulusRegion::disk(s.r_net_m)?;
    let pattern = sample_ppp(intensity, region, seed)?;
    let n = pattern.points.len();
    let mut aux = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xfa11));
    let mut fallbacks = 0usize;

    // per-point circumradius; None = excluded by policy
    let radii: Vec<Option<f64>> = match mode {
        CircumradiusMode::FixedAverageArea => {
            let ra = 1.0 / (PI * intensity).sqrt();
            vec![Some(ra); n]
        }
        CircumradiusMode::IidAnalytic => {
            let d = dist.expect("distribution prepared for iid mode");
            (0..n).map(|_| Some(d.sample(&mut aux))).collect()
        }
        CircumradiusMode::TrueVoronoi => {
            let guard = policy.guard_factor / (PI * intensity).sqrt();
            let flags: Vec<CellRadius> = if n >= 3 {
                match build_tessellation_with_guard(&pattern, guard) {
                    Ok(t) => t.circumradii,
                    Err(GeometryError::CollinearPoints) => vec![CellRadius::Boundary; n],
                    Err(e) => return Err(e.into()),
                }
            } else {
                vec![CellRadius::Boundary; n]
            };
            flags
                .iter()
                .map(|flag| match flag {
                    CellRadius::Interior(r) => Some(*r),
                    CellRadius::Boundary => match policy.fallback {
                        BoundaryFallback::AnalyticDraw => {
                            fallbacks += 1;
                            Some(dist.expect("distribution prepared for fallback").sample(&mut aux))
                        }
                        BoundaryFallback::Exclude => None,
                    },
                })
                .collect()
        }
    };

    let dh = s.pathloss.delta_h();
    let h_bs = s.pathloss.h_bs_m;
    let power = s.dl.p_bs_watts / (s.dl.k_users as f64 * s.dl.fdr);
    let mut totals = vec![0.0f64; r_exc_values_m.len()];
    let mut used = 0usize;
    for (p, rc) in pattern.points.iter().zip(&radii) {
        let range = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let max_rx = r_exc_values_m.iter().filter(|&&rx| range >= rx).count();
        if max_rx == 0 {
            continue;
        }
        let theta = p[1].atan2(p[0]);
        // the radar collects interference from the front half-plane sector
        // only, matching the azimuth domain of the analytic models
        if !(-PI / 2.0..PI / 2.0).contains(&theta) {
            continue;
        }
        let Some(rc) = rc else { continue };
        used += 1;
        let beta = s.pathloss.pathloss(range)?;
        let phi_t = (dh / range).atan();
        let g_rad = normalized_gain(
            &s.radar_array,
            s.radar_scan,
            BeamDirection { azimuth_rad: theta, elevation_rad: -phi_t },
        );
        let g_bs = table.lookup(phi_t, (h_bs / rc).atan());
        let contribution = beta * g_rad * g_bs * power;
        for (rx, &r_exc) in r_exc_values_m.iter().enumerate() {
            if range >= r_exc {
                totals[rx] += contribution;
            }
        }
    }
    Ok((totals, used, fallbacks))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{interference_aaecc, interference_cbc, CellRadiusLaw, interference_cbc_with};
    use crate::array::ArrayGeometry;
    use crate::channel::{DownlinkConfig, PathlossModel};

    fn scenario(lambda_per_km2: f64, r_exc_km: f64) -> NetworkScenario {
        NetworkScenario {
            bs_array: ArrayGeometry::new(10, 10, 50.0).unwrap(),
            radar_array: ArrayGeometry::new(40, 40, 20.0).unwrap(),
            radar_scan: BeamDirection::from_degrees(60.0, -10.0).unwrap(),
            dl: DownlinkConfig::new(4, 1.0, BeamDirection::from_degrees(0.0, 5.0).unwrap())
                .unwrap(),
            pathloss: PathlossModel::uma_los(5.0, 50.0, 20.0).unwrap(),
            intensity_bs: lambda_per_km2 * 1e-6,
            r_exc_m: r_exc_km * 1e3,
            r_net_m: 100e3,
        }
    }

    fn plan(lambda_per_km2: f64, r_exc_km: f64, mode: CircumradiusMode, n: usize) -> SimulationPlan {
        SimulationPlan {
            scenario: scenario(lambda_per_km2, r_exc_km),
            n_realizations: n,
            master_seed: 11,
            circumradius_mode: mode,
            boundary_policy: BoundaryPolicy::default(),
        }
    }

    #[test]
    fn vanishing_intensity_gives_zero_estimate() {
        let p = plan(1e-7, 5.0, CircumradiusMode::FixedAverageArea, 8);
        let table = sweep(&p, &[5e3], &[1e-19]).unwrap();
        assert_eq!(table.rows[0].estimate.mean_watts, 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let p = plan(0.05, 5.0, CircumradiusMode::TrueVoronoi, 6);
        let a = run_simulation(&p).unwrap();
        let b = run_simulation(&p).unwrap();
        assert_eq!(a.per_realization_totals, b.per_realization_totals);
        let mut p2 = p;
        p2.master_seed = 12;
        let c = run_simulation(&p2).unwrap();
        assert_ne!(a.per_realization_totals, c.per_realization_totals);
    }

    #[test]
    fn totals_non_increasing_in_exclusion_radius() {
        let p = plan(0.05, 5.0, CircumradiusMode::IidAnalytic, 10);
        let grid = [5e3, 10e3, 20e3, 30e3];
        let table = sweep(&p, &grid, &[p.scenario.intensity_bs]).unwrap();
        for i in 0..p.n_realizations {
            for w in 0..grid.len() - 1 {
                let a = table.rows[w].estimate.per_realization_totals[i];
                let b = table.rows[w + 1].estimate.per_realization_totals[i];
                assert!(b <= a + 1e-30, "realization {i}: {b} > {a}");
            }
        }
    }

    #[test]
    fn fixed_average_area_matches_analytic_aaecc() {
        let p = plan(0.1, 5.0, CircumradiusMode::FixedAverageArea, 64);
        let est = run_simulation(&p).unwrap();
        let ana = interference_aaecc(&p.scenario, 1e-5).unwrap();
        let gap = (est.mean_watts - ana.mean_watts).abs();
        assert!(
            gap <= 3.0 * est.std_error_watts,
            "gap {gap} vs 3 SE {}",
            3.0 * est.std_error_watts
        );
    }

    #[test]
    fn iid_analytic_matches_analytic_cbc() {
        let p = plan(0.1, 5.0, CircumradiusMode::IidAnalytic, 64);
        let est = run_simulation(&p).unwrap();
        let d = CircumradiusDistribution::with_defaults(p.scenario.intensity_bs).unwrap();
        let ana = interference_cbc(&p.scenario, &d, 1e-5).unwrap();
        let gap = (est.mean_watts - ana.mean_watts).abs();
        assert!(
            gap <= 3.0 * est.std_error_watts,
            "gap {gap} vs 3 SE {}",
            3.0 * est.std_error_watts
        );
    }

    #[test]
    fn true_voronoi_consistent_with_empirical_cbc() {
        let p = plan(0.05, 5.0, CircumradiusMode::TrueVoronoi, 48);
        let est = run_simulation(&p).unwrap();
        let sample =
            crate::geometry::empirical_circumradius_sample(p.scenario.intensity_bs, 3000, 5)
                .unwrap();
        let ana =
            interference_cbc_with(&p.scenario, CellRadiusLaw::Empirical(&sample), 1e-5).unwrap();
        let gap = (est.mean_watts - ana.mean_watts).abs();
        assert!(
            gap <= 4.0 * est.std_error_watts,
            "gap {gap} vs {}",
            4.0 * est.std_error_watts
        );
    }

    #[test]
    fn empty_grids_rejected() {
        let p = plan(0.1, 5.0, CircumradiusMode::FixedAverageArea, 4);
        assert!(sweep(&p, &[], &[1e-7]).is_err());
        assert!(sweep(&p, &[5e3], &[]).is_err());
        let mut p0 = p;
        p0.n_realizations = 0;
        assert!(sweep(&p0, &[5e3], &[1e-7]).is_err());
    }

    #[test]
    fn exclude_policy_errors_when_everything_is_boundary() {
        // tiny network: every cell touches the hull, Exclude drops them all
        let mut p = plan(0.001, 5.0, CircumradiusMode::TrueVoronoi, 4);
        p.boundary_policy =
            BoundaryPolicy { guard_factor: 3.0, fallback: BoundaryFallback::Exclude };
        p.scenario.r_net_m = 20e3;
        match run_simulation(&p) {
            Err(SimulationError::ZeroInteriorBs) => {}
            other => panic!("expected ZeroInteriorBs, got {other:?}"),
        }
    }
}
