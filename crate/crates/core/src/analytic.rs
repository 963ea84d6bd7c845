//! Network-level mean interference: quadrature evaluation of the CBC and
//! AAECC cell-shape models, their closed-form approximations, the worst-case
//! to nominal ratio, and the exclusion-zone radius solver.
//!
//! The CBC integrand factors as
//!
//! ```text
//! lambda * P / K * PL(r0) * G_rad(theta, -phi_t(r)) * r * (r^2 + dh^2)^{-alpha/2}
//!        * E_f[ Gmax(phi_t(r), phi_m(Rc)) ]
//! ```
//!
//! and is evaluated as iterated 1D adaptive integrals: azimuth outermost
//! (pre-split at the radar pattern nulls), ground range in the middle, and
//! the circumradius expectation innermost on fixed density nodes. The gain
//! bound is served from a bilinear `(phi, phi_m)` table at 0.02 degree step.

use crate::array::{max_gain_bound, normalized_gain, ArrayGeometry, BeamDirection};
use crate::channel::{ChannelError, DownlinkConfig, PathlossModel};
use crate::geometry::{CircumradiusDistribution, GeometryError};
use crate::quad::{adaptive_quadrature, QuadError, QuadResult};
use std::f64::consts::PI;
use thiserror::Error;

/// Default relative tolerance for the interference quadratures.
pub const DEFAULT_TOLERANCE: f64 = 1e-4;
/// The circumradius integral is truncated at this quantile of the density.
const QUANTILE_CUT: f64 = 1.0 - 1e-6;
/// Gain-bound table step (both axes), in degrees.
const TABLE_STEP_DEG: f64 = 0.02;
/// Numeric truncation radius used when the network extent is infinite; the
/// remaining tail is added in closed form from the horizon-limit integrand.
const INFINITE_SPLIT_M: f64 = 1.0e6;
const MAX_PANELS: usize = 20_000;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("scenario invalid: {0}")]
    BadScenario(String),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("interference threshold must be positive, got {0} W")]
    BadThreshold(f64),
    #[error("empirical circumradius sample is empty")]
    EmptySample,
}

/// Full deployment description for the network-level interference models.
#[derive(Debug, Clone, Copy)]
pub struct NetworkScenario {
    pub bs_array: ArrayGeometry,
    pub radar_array: ArrayGeometry,
    pub radar_scan: BeamDirection,
    pub dl: DownlinkConfig,
    pub pathloss: PathlossModel,
    /// BS density in points per square meter.
    pub intensity_bs: f64,
    pub r_exc_m: f64,
    /// Outer network truncation; `f64::INFINITY` for an unbounded network.
    pub r_net_m: f64,
}

impl NetworkScenario {
    pub fn validate(&self) -> Result<(), AnalyticError> {
        if !(self.intensity_bs > 0.0 && self.intensity_bs.is_finite()) {
            return Err(AnalyticError::BadScenario(format!(
                "BS intensity must be positive, got {}",
                self.intensity_bs
            )));
        }
        if !(self.r_exc_m > 0.0 && self.r_exc_m.is_finite()) {
            return Err(AnalyticError::BadScenario(format!(
                "exclusion radius must be positive and finite, got {}",
                self.r_exc_m
            )));
        }
        if self.r_exc_m >= self.r_net_m {
            return Err(AnalyticError::BadScenario(format!(
                "exclusion radius {} must be below the network extent {}",
                self.r_exc_m, self.r_net_m
            )));
        }
        if self.r_net_m.is_infinite() && self.pathloss.alpha() <= 2.0 {
            return Err(AnalyticError::BadScenario(
                "infinite network extent needs pathloss exponent above 2".into(),
            ));
        }
        if (self.bs_array.height_m - self.pathloss.h_bs_m).abs() > 1e-9
            || (self.radar_array.height_m - self.pathloss.h_rad_m).abs() > 1e-9
        {
            return Err(AnalyticError::BadScenario(
                "array mount heights disagree with the pathloss model heights".into(),
            ));
        }
        Ok(())
    }

    /// Equal-area cell radius `1/sqrt(pi * lambda)`.
    pub fn average_area_radius(&self) -> f64 {
        1.0 / (PI * self.intensity_bs).sqrt()
    }

    /// Elevation parameter `h_bs * sqrt(pi * lambda)` controlling gain
    /// saturation.
    pub fn elevation_parameter(&self) -> f64 {
        self.pathloss.h_bs_m * (PI * self.intensity_bs).sqrt()
    }
}

/// Which interference model produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterferenceModel {
    Cbc,
    CbcApprox,
    Aaecc,
    AaeccApprox,
    MonteCarlo,
}

impl InterferenceModel {
    pub fn name(&self) -> &'static str {
        match self {
            InterferenceModel::Cbc => "cbc",
            InterferenceModel::CbcApprox => "cbc-approx",
            InterferenceModel::Aaecc => "aaecc",
            InterferenceModel::AaeccApprox => "aaecc-approx",
            InterferenceModel::MonteCarlo => "monte-carlo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cbc" => Some(Self::Cbc),
            "cbc-approx" => Some(Self::CbcApprox),
            "aaecc" => Some(Self::Aaecc),
            "aaecc-approx" => Some(Self::AaeccApprox),
            "monte-carlo" => Some(Self::MonteCarlo),
            _ => None,
        }
    }
}

impl std::fmt::Display for InterferenceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameter echo and evaluation cost attached to every result.
#[derive(Debug, Clone, Copy)]
pub struct ResultMetadata {
    pub intensity_bs: f64,
    pub r_exc_m: f64,
    pub r_net_m: f64,
    pub tolerance: f64,
    pub evaluations: u64,
}

/// A `(model, parameters) -> mean interference` record. `error_estimate` is a
/// quadrature error bound for the analytic models and a confidence half-width
/// for Monte Carlo.
#[derive(Debug, Clone, Copy)]
pub struct InterferenceResult {
    pub model: InterferenceModel,
    pub mean_watts: f64,
    pub error_estimate: f64,
    pub metadata: ResultMetadata,
}

/// Source of the per-cell circumradius expectation: the analytic density, an
/// empirical circumradius sample (plug-in average), or a point mass.
#[derive(Debug, Clone, Copy)]
pub enum CellRadiusLaw<'a> {
    Analytic(&'a CircumradiusDistribution),
    Empirical(&'a [f64]),
    PointMass(f64),
}

impl CellRadiusLaw<'_> {
    fn nodes(&self) -> Result<Vec<(f64, f64)>, AnalyticError> {
        match self {
            CellRadiusLaw::Analytic(d) => Ok(d.expectation_nodes(QUANTILE_CUT)),
            CellRadiusLaw::Empirical(sample) => {
                if sample.is_empty() {
                    return Err(AnalyticError::EmptySample);
                }
                let w = 1.0 / sample.len() as f64;
                Ok(sample.iter().map(|&r| (r, w)).collect())
            }
            CellRadiusLaw::PointMass(r) => Ok(vec![(*r, 1.0)]),
        }
    }
}

/// Bilinear lookup table for the gain bound over `(phi, phi_m)`, 0.02 degree
/// step on both axes; the triple integral touches it millions of times.
pub(crate) struct GainBoundTable {
    phi_lo: f64,
    phi_step: f64,
    n_phi: usize,
    phim_step: f64,
    n_phim: usize,
    values: Vec<f64>,
}

impl GainBoundTable {
    pub(crate) fn new(g: &ArrayGeometry, phi_lo: f64, phi_hi: f64) -> Self {
        let step = TABLE_STEP_DEG.to_radians();
        let span = (phi_hi - phi_lo).max(step);
        let n_phi = (span / step).ceil() as usize + 2;
        let n_phim = (0.5 * PI / step).ceil() as usize + 2;
        let mut values = Vec::with_capacity(n_phi * n_phim);
        for i in 0..n_phi {
            let phi = phi_lo + step * i as f64;
            for j in 0..n_phim {
                let phim = (step * j as f64).min(0.5 * PI);
                values.push(max_gain_bound(g, phi.clamp(-0.5 * PI, 0.5 * PI - 1e-12), phim));
            }
        }
        GainBoundTable { phi_lo, phi_step: step, n_phi, phim_step: step, n_phim, values }
    }

    pub(crate) fn lookup(&self, phi: f64, phi_m: f64) -> f64 {
        let x = ((phi - self.phi_lo) / self.phi_step).clamp(0.0, (self.n_phi - 2) as f64);
        let y = (phi_m / self.phim_step).clamp(0.0, (self.n_phim - 2) as f64);
        let i = x.floor() as usize;
        let j = y.floor() as usize;
        let fx = x - i as f64;
        let fy = y - j as f64;
        let row0 = &self.values[i * self.n_phim + j..];
        let row1 = &self.values[(i + 1) * self.n_phim + j..];
        let v00 = row0[0];
        let v01 = row0[1];
        let v10 = row1[0];
        let v11 = row1[1];
        v00 * (1.0 - fx) * (1.0 - fy) + v01 * (1.0 - fx) * fy + v10 * fx * (1.0 - fy) + v11 * fx * fy
    }
}

/// Interpolated map `phi_t -> E[Gmax(phi_t, phi_m(Rc))]`; the expectation over
/// the circumradius nodes is pre-tabulated on a dense grid of line-of-sight
/// elevations (far finer than the sanctioned 0.02 degree table).
struct ExpectedBoundCurve {
    phi_lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl ExpectedBoundCurve {
    fn new(
        table: &GainBoundTable,
        h_bs: f64,
        nodes: &[(f64, f64)],
        phi_lo: f64,
        phi_hi: f64,
    ) -> Self {
        const POINTS: usize = 1025;
        let span = (phi_hi - phi_lo).max(1e-12);
        let step = span / (POINTS - 1) as f64;
        let mut values = Vec::with_capacity(POINTS);
        for i in 0..POINTS {
            let phi = phi_lo + step * i as f64;
            let mut acc = 0.0;
            for &(rc, w) in nodes {
                acc += w * table.lookup(phi, (h_bs / rc).atan());
            }
            values.push(acc);
        }
        ExpectedBoundCurve { phi_lo, step, values }
    }

    fn eval(&self, phi: f64) -> f64 {
        let x = ((phi - self.phi_lo) / self.step).clamp(0.0, (self.values.len() - 2) as f64);
        let i = x.floor() as usize;
        let f = x - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

/// Azimuths of the radar-pattern nulls (and the mainlobe center) used to
/// pre-split the outer integral: `sin(theta) cos(phi) = sin(ts) cos(ps) - 2m/N`.
fn azimuth_breakpoints(radar: &ArrayGeometry, scan: BeamDirection, cos_phi: f64) -> Vec<f64> {
    let target = scan.azimuth_rad.sin() * scan.elevation_rad.cos();
    let n = radar.n_az as f64;
    let mut out = Vec::new();
    let mut m = -(2.0 * n) as i64;
    while (m as f64) <= 2.0 * n {
        let s = (target - m as f64 / n) / cos_phi;
        if s.abs() < 1.0 {
            out.push(s.asin());
        }
        m += 1;
    }
    out
}

/// Shared middle/inner evaluation: the radial integral at a fixed azimuth.
#[allow(clippy::too_many_arguments)]
fn radial_integral(
    s: &NetworkScenario,
    theta: f64,
    curve: &ExpectedBoundCurve,
    r_hi: f64,
    infinite_tail: bool,
    tol: f64,
    evals: &mut u64,
) -> Result<f64, QuadError> {
    let dh = s.pathloss.delta_h();
    let alpha = s.pathloss.alpha();
    let radar = s.radar_array;
    let scan = s.radar_scan;
    let integrand = |r: f64| {
        let phi_t = (dh / r).atan();
        let arrival = BeamDirection { azimuth_rad: theta, elevation_rad: -phi_t };
        let g_rad = normalized_gain(&radar, scan, arrival);
        let kernel = r * (r * r + dh * dh).powf(-0.5 * alpha);
        g_rad * kernel * curve.eval(phi_t)
    };
    // geometric pre-split tames the power-law decay
    let mut splits = Vec::new();
    let mut x = 2.0 * s.r_exc_m;
    while x < r_hi {
        splits.push(x);
        x *= 2.0;
    }
    let res = adaptive_quadrature(integrand, s.r_exc_m, r_hi, &splits, tol, 0.0, MAX_PANELS)?;
    *evals += res.evaluations;
    let mut value = res.value;
    if infinite_tail {
        // beyond the split the integrand is its horizon limit times r^{1-alpha}
        let g_rad_inf = normalized_gain(
            &radar,
            scan,
            BeamDirection { azimuth_rad: theta, elevation_rad: 0.0 },
        );
        value += g_rad_inf * curve.eval(0.0) * r_hi.powf(2.0 - alpha) / (alpha - 2.0);
    }
    Ok(value)
}

fn triple_integral(
    s: &NetworkScenario,
    nodes: &[(f64, f64)],
    tol: f64,
    model: InterferenceModel,
) -> Result<InterferenceResult, AnalyticError> {
    s.validate()?;
    let infinite = s.r_net_m.is_infinite();
    let r_hi = if infinite { INFINITE_SPLIT_M.max(10.0 * s.r_exc_m) } else { s.r_net_m };
    let dh = s.pathloss.delta_h();
    let phi_a = (dh / r_hi).atan();
    let phi_b = (dh / s.r_exc_m).atan();
    let (phi_lo, phi_hi) = if infinite {
        (phi_a.min(phi_b).min(0.0), phi_a.max(phi_b).max(0.0))
    } else {
        (phi_a.min(phi_b), phi_a.max(phi_b))
    };

    let table = GainBoundTable::new(&s.bs_array, phi_lo, phi_hi);
    let curve = ExpectedBoundCurve::new(&table, s.pathloss.h_bs_m, nodes, phi_lo, phi_hi);

    let breakpoints = azimuth_breakpoints(&s.radar_array, s.radar_scan, phi_b.cos());
    let mut evals = 0u64;
    let mut inner_failure: Option<QuadError> = None;
    let outer = adaptive_quadrature(
        |theta| {
            match radial_integral(s, theta, &curve, r_hi, infinite, tol * 0.25, &mut evals) {
                Ok(v) => v,
                Err(e) => {
                    if inner_failure.is_none() {
                        inner_failure = Some(e);
                    }
                    f64::NAN
                }
            }
        },
        -PI / 2.0,
        PI / 2.0,
        &breakpoints,
        tol * 0.5,
        0.0,
        MAX_PANELS,
    );
    if let Some(e) = inner_failure {
        return Err(e.into());
    }
    let outer = outer?;

    let prefactor = s.intensity_bs * s.dl.p_bs_watts * s.pathloss.pl_r0_linear()
        / (s.dl.k_users as f64 * s.dl.fdr);
    let mean = prefactor * outer.value;
    let error = prefactor * outer.error + 0.25 * tol * mean.abs();
    Ok(InterferenceResult {
        model,
        mean_watts: mean,
        error_estimate: error,
        metadata: ResultMetadata {
            intensity_bs: s.intensity_bs,
            r_exc_m: s.r_exc_m,
            r_net_m: s.r_net_m,
            tolerance: tol,
            evaluations: evals + outer.evaluations,
        },
    })
}

/// Worst-case mean interference: the circumcircle-based cell model, with the
/// circumradius expectation taken under the analytic density.
pub fn interference_cbc(
    s: &NetworkScenario,
    d: &CircumradiusDistribution,
    tol: f64,
) -> Result<InterferenceResult, AnalyticError> {
    interference_cbc_with(s, CellRadiusLaw::Analytic(d), tol)
}

/// As [`interference_cbc`] with an explicit circumradius law (analytic,
/// empirical plug-in, or point mass).
pub fn interference_cbc_with(
    s: &NetworkScenario,
    law: CellRadiusLaw<'_>,
    tol: f64,
) -> Result<InterferenceResult, AnalyticError> {
    let nodes = law.nodes()?;
    triple_integral(s, &nodes, tol, InterferenceModel::Cbc)
}

/// Nominal mean interference: every cell replaced by the average-area disk,
/// i.e. the CBC integral against a point mass at `1/sqrt(pi*lambda)`.
pub fn interference_aaecc(s: &NetworkScenario, tol: f64) -> Result<InterferenceResult, AnalyticError> {
    let nodes = [(s.average_area_radius(), 1.0)];
    triple_integral(s, &nodes, tol, InterferenceModel::Aaecc)
}

/// Closed radial term shared by the approximations:
/// `lambda P PL(r0) / (K (alpha-2) r_exc^{alpha-2})`.
fn approx_prefactor(s: &NetworkScenario) -> f64 {
    let alpha = s.pathloss.alpha();
    s.intensity_bs * s.dl.p_bs_watts * s.pathloss.pl_r0_linear()
        / (s.dl.k_users as f64 * s.dl.fdr * (alpha - 2.0) * s.r_exc_m.powf(alpha - 2.0))
}

/// Azimuth integral of the radar gain along the horizon.
fn horizon_azimuth_integral(s: &NetworkScenario, tol: f64) -> Result<QuadResult, AnalyticError> {
    let radar = s.radar_array;
    let scan = s.radar_scan;
    let breakpoints = azimuth_breakpoints(&radar, scan, 1.0);
    Ok(adaptive_quadrature(
        |theta| {
            normalized_gain(&radar, scan, BeamDirection { azimuth_rad: theta, elevation_rad: 0.0 })
        },
        -PI / 2.0,
        PI / 2.0,
        &breakpoints,
        tol,
        0.0,
        MAX_PANELS,
    )?)
}

/// Expectation of the gain bound at the horizon under the circumradius law.
fn expected_horizon_bound(s: &NetworkScenario, nodes: &[(f64, f64)]) -> f64 {
    nodes
        .iter()
        .map(|&(rc, w)| w * max_gain_bound(&s.bs_array, 0.0, (s.pathloss.h_bs_m / rc).atan()))
        .sum()
}

/// Closed-form approximate worst-case interference: the radial integral is
/// collapsed to its infinite-network power law and the line-of-sight
/// elevations to the horizon.
pub fn interference_cbc_approx(
    s: &NetworkScenario,
    d: &CircumradiusDistribution,
) -> Result<InterferenceResult, AnalyticError> {
    interference_cbc_approx_with(s, CellRadiusLaw::Analytic(d))
}

pub fn interference_cbc_approx_with(
    s: &NetworkScenario,
    law: CellRadiusLaw<'_>,
) -> Result<InterferenceResult, AnalyticError> {
    s.validate()?;
    let nodes = law.nodes()?;
    let azimuth = horizon_azimuth_integral(s, DEFAULT_TOLERANCE * 0.25)?;
    let gain = expected_horizon_bound(s, &nodes);
    let mean = approx_prefactor(s) * azimuth.value * gain;
    Ok(InterferenceResult {
        model: InterferenceModel::CbcApprox,
        mean_watts: mean,
        error_estimate: approx_prefactor(s) * azimuth.error * gain,
        metadata: ResultMetadata {
            intensity_bs: s.intensity_bs,
            r_exc_m: s.r_exc_m,
            r_net_m: f64::INFINITY,
            tolerance: DEFAULT_TOLERANCE,
            evaluations: azimuth.evaluations,
        },
    })
}

/// Closed-form approximate nominal interference.
pub fn interference_aaecc_approx(s: &NetworkScenario) -> Result<InterferenceResult, AnalyticError> {
    s.validate()?;
    let azimuth = horizon_azimuth_integral(s, DEFAULT_TOLERANCE * 0.25)?;
    let nodes = [(s.average_area_radius(), 1.0)];
    let gain = expected_horizon_bound(s, &nodes);
    let mean = approx_prefactor(s) * azimuth.value * gain;
    Ok(InterferenceResult {
        model: InterferenceModel::AaeccApprox,
        mean_watts: mean,
        error_estimate: approx_prefactor(s) * azimuth.error * gain,
        metadata: ResultMetadata {
            intensity_bs: s.intensity_bs,
            r_exc_m: s.r_exc_m,
            r_net_m: f64::INFINITY,
            tolerance: DEFAULT_TOLERANCE,
            evaluations: azimuth.evaluations,
        },
    })
}

/// Ratio of worst-case to nominal mean interference,
/// `E[Gmax(0, phi_m(Rc))] / Gmax(0, phi_m(1/sqrt(pi lambda)))`; equals the
/// ratio of the two approximations exactly and is at least 1.
pub fn eta_ratio(s: &NetworkScenario, d: &CircumradiusDistribution) -> Result<f64, AnalyticError> {
    s.validate()?;
    let nodes = CellRadiusLaw::Analytic(d).nodes()?;
    let num = expected_horizon_bound(s, &nodes);
    let den = expected_horizon_bound(s, &[(s.average_area_radius(), 1.0)]);
    Ok(num / den)
}

/// Exclusion-zone radius (meters) at which the approximate worst-case
/// interference equals the threshold: the closed inversion of the
/// approximation, exact against [`interference_cbc_approx`] by construction.
pub fn solve_exclusion_radius(
    s: &NetworkScenario,
    d: &CircumradiusDistribution,
    threshold_watts: f64,
) -> Result<f64, AnalyticError> {
    if !(threshold_watts > 0.0 && threshold_watts.is_finite()) {
        return Err(AnalyticError::BadThreshold(threshold_watts));
    }
    s.validate()?;
    let alpha = s.pathloss.alpha();
    let nodes = CellRadiusLaw::Analytic(d).nodes()?;
    let azimuth = horizon_azimuth_integral(s, DEFAULT_TOLERANCE * 0.25)?;
    let gain = expected_horizon_bound(s, &nodes);
    let numerator = s.intensity_bs * s.dl.p_bs_watts * s.pathloss.pl_r0_linear() * azimuth.value
        * gain
        / (s.dl.k_users as f64 * s.dl.fdr * (alpha - 2.0));
    Ok((numerator / threshold_watts).powf(1.0 / (alpha - 2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::BeamDirection;

    fn scenario(lambda_per_km2: f64, r_exc_km: f64, r_net_km: f64) -> NetworkScenario {
        let bs = ArrayGeometry::new(10, 10, 50.0).unwrap();
        let radar = ArrayGeometry::new(40, 40, 20.0).unwrap();
        NetworkScenario {
            bs_array: bs,
            radar_array: radar,
            radar_scan: BeamDirection::from_degrees(60.0, -10.0).unwrap(),
            dl: DownlinkConfig::new(4, 1.0, BeamDirection::from_degrees(0.0, 5.0).unwrap())
                .unwrap(),
            pathloss: PathlossModel::uma_los(5.0, 50.0, 20.0).unwrap(),
            intensity_bs: lambda_per_km2 * 1e-6,
            r_exc_m: r_exc_km * 1e3,
            r_net_m: r_net_km * 1e3,
        }
    }

    fn dist(lambda_per_km2: f64) -> CircumradiusDistribution {
        CircumradiusDistribution::new(lambda_per_km2 * 1e-6, 8, 40_000, 1e-4).unwrap()
    }

    #[test]
    fn gain_table_matches_direct_evaluation() {
        let g = ArrayGeometry::new(10, 10, 50.0).unwrap();
        let table = GainBoundTable::new(&g, 0.0, 0.01);
        for &(phi, phim) in &[(0.001, 0.02), (0.005, 0.3), (0.009, 1.2), (0.0, 0.004)] {
            let direct = max_gain_bound(&g, phi, phim);
            let cached = table.lookup(phi, phim);
            assert!(
                (direct - cached).abs() <= 2e-3 * direct.max(1.0),
                "phi={phi} phim={phim}: {cached} vs {direct}"
            );
        }
    }

    #[test]
    fn aaecc_equals_cbc_with_point_mass_law() {
        let s = scenario(0.1, 5.0, 100.0);
        let a = interference_aaecc(&s, 1e-5).unwrap();
        let b = interference_cbc_with(
            &s,
            CellRadiusLaw::PointMass(s.average_area_radius()),
            1e-5,
        )
        .unwrap();
        assert!((a.mean_watts - b.mean_watts).abs() <= 1e-12 * a.mean_watts);
    }

    #[test]
    fn cbc_dominates_aaecc() {
        let d = dist(0.1);
        for &(lam, rexc) in &[(0.1, 5.0), (0.1, 20.0)] {
            let s = scenario(lam, rexc, 100.0);
            let cbc = interference_cbc(&s, &d, 1e-4).unwrap();
            let aaecc = interference_aaecc(&s, 1e-4).unwrap();
            assert!(
                cbc.mean_watts >= aaecc.mean_watts,
                "lam={lam} rexc={rexc}: {} < {}",
                cbc.mean_watts,
                aaecc.mean_watts
            );
        }
    }

    #[test]
    fn linear_scaling_in_saturated_regime() {
        // h*sqrt(pi*lambda) ~ 3e-3: the gain bound is saturated and the
        // result scales linearly with intensity
        let lam = 1.27e-3; // per km^2
        let d1 = dist(lam);
        let d2 = dist(2.0 * lam);
        let s1 = scenario(lam, 5.0, 100.0);
        let s2 = scenario(2.0 * lam, 5.0, 100.0);
        let i1 = interference_cbc(&s1, &d1, 1e-5).unwrap().mean_watts;
        let i2 = interference_cbc(&s2, &d2, 1e-5).unwrap().mean_watts;
        assert!((i2 / i1 - 2.0).abs() < 0.01 * 2.0, "ratio {}", i2 / i1);
    }

    #[test]
    fn single_element_arrays_reduce_to_closed_form() {
        let mut s = scenario(0.1, 10.0, 100.0);
        s.bs_array = ArrayGeometry::new(1, 1, 50.0).unwrap();
        s.radar_array = ArrayGeometry::new(1, 1, 20.0).unwrap();
        let d = dist(0.1);
        let approx = interference_cbc_approx(&s, &d).unwrap();
        let alpha = 4.0;
        let expect = s.intensity_bs * 1.0 * s.pathloss.pl_r0_linear() * PI
            / (4.0 * (alpha - 2.0) * s.r_exc_m.powf(alpha - 2.0));
        assert!(
            (approx.mean_watts - expect).abs() <= 1e-9 * expect,
            "{} vs {expect}",
            approx.mean_watts
        );
    }

    #[test]
    fn approx_power_law_in_exclusion_radius() {
        let d = dist(0.1);
        let s10 = scenario(0.1, 10.0, 100.0);
        let s5 = scenario(0.1, 5.0, 100.0);
        let i10 = interference_cbc_approx(&s10, &d).unwrap().mean_watts;
        let i5 = interference_cbc_approx(&s5, &d).unwrap().mean_watts;
        // alpha = 4: halving the radius quadruples the approximation
        assert!((i5 / i10 - 4.0).abs() < 1e-9 * 4.0, "ratio {}", i5 / i10);
    }

    #[test]
    fn approx_error_shrinks_with_exclusion_radius() {
        let d = dist(0.1);
        let mut last = f64::INFINITY;
        for rexc in [5.0, 10.0, 20.0, 30.0] {
            let mut s = scenario(0.1, rexc, 100.0);
            s.r_net_m = f64::INFINITY;
            let full = interference_cbc(&s, &d, 1e-5).unwrap().mean_watts;
            let approx = interference_cbc_approx(&s, &d).unwrap().mean_watts;
            let rel = (approx - full).abs() / full;
            assert!(rel < last, "rexc={rexc}: rel {rel} !< {last}");
            last = rel;
        }
        assert!(last < 0.10, "30 km relative error {last}");
    }

    #[test]
    fn eta_equals_ratio_of_approximations() {
        let d = dist(0.1);
        let s = scenario(0.1, 10.0, 100.0);
        let eta = eta_ratio(&s, &d).unwrap();
        let cbc = interference_cbc_approx(&s, &d).unwrap().mean_watts;
        let aaecc = interference_aaecc_approx(&s).unwrap().mean_watts;
        assert!((eta - cbc / aaecc).abs() < 1e-12 * eta);
    }

    #[test]
    fn eta_is_at_least_one_across_densities() {
        for lambda in [0.003, 0.03, 0.3, 1.5] {
            let d = dist(lambda);
            let s = scenario(lambda, 10.0, 100.0);
            let eta = eta_ratio(&s, &d).unwrap();
            assert!(eta >= 1.0, "lambda={lambda}: eta {eta}");
        }
    }

    #[test]
    fn eta_tends_to_one_in_saturated_regime() {
        let lam = 1.27e-4; // h*sqrt(pi*lambda) ~ 1e-3
        let d = dist(lam);
        let s = scenario(lam, 5.0, 100.0);
        let eta = eta_ratio(&s, &d).unwrap();
        assert!((eta - 1.0).abs() < 1e-3, "eta {eta}");
        // the full-integral ratio approaches 1 as well
        let cbc = interference_cbc(&s, &d, 1e-4).unwrap().mean_watts;
        let aaecc = interference_aaecc(&s, 1e-4).unwrap().mean_watts;
        assert!((cbc / aaecc - 1.0).abs() < 5e-3, "full ratio {}", cbc / aaecc);
    }

    #[test]
    fn exclusion_radius_round_trip() {
        let d = dist(0.1);
        let s = scenario(0.1, 10.0, 100.0);
        let target = interference_cbc_approx(&s, &d).unwrap().mean_watts;
        let r = solve_exclusion_radius(&s, &d, target).unwrap();
        assert!((r - 10_000.0).abs() < 1e-6 * 10_000.0, "r {r}");
        // power law: scaling the threshold by 2^{alpha-2} halves the radius
        let r2 = solve_exclusion_radius(&s, &d, target * 4.0).unwrap();
        assert!((r2 - 5_000.0).abs() < 1e-6 * 5_000.0, "r2 {r2}");
    }

    #[test]
    fn exclusion_radius_cross_checks_against_full_model() {
        let d = dist(0.1);
        let mut s = scenario(0.1, 10.0, 100.0);
        s.r_net_m = f64::INFINITY;
        let threshold = crate::dbm_to_watts(-90.0);
        let closed = solve_exclusion_radius(&s, &d, threshold).unwrap();

        // independent route: bisection on the full CBC integral
        let eval = |r: f64| {
            let mut sc = s;
            sc.r_exc_m = r;
            interference_cbc(&sc, &d, 1e-5).unwrap().mean_watts
        };
        let (mut lo, mut hi) = (closed / 3.0, closed * 3.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if eval(mid) > threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        // agreement within the approximation error, radius-scaled by alpha-2
        let approx_err = {
            let mut sc = s;
            sc.r_exc_m = root;
            let full = eval(root);
            let ap = interference_cbc_approx(&sc, &d).unwrap().mean_watts;
            (ap - full).abs() / full
        };
        let rel = (closed - root).abs() / root;
        assert!(
            rel <= approx_err / (s.pathloss.alpha() - 2.0) * 1.5 + 1e-6,
            "closed {closed} root {root} rel {rel} approx_err {approx_err}"
        );
    }

    #[test]
    fn halving_tolerance_stays_within_reported_error() {
        let d = dist(0.1);
        let s = scenario(0.1, 5.0, 100.0);
        let loose = interference_cbc(&s, &d, 2e-4).unwrap();
        let tight = interference_cbc(&s, &d, 1e-4).unwrap();
        assert!(
            (loose.mean_watts - tight.mean_watts).abs() <= loose.error_estimate,
            "drift {} vs estimate {}",
            (loose.mean_watts - tight.mean_watts).abs(),
            loose.error_estimate
        );
    }

    #[test]
    fn monotone_in_parameters() {
        let d = dist(0.1);
        let mut last_cbc = f64::INFINITY;
        let mut last_aaecc = f64::INFINITY;
        for rexc in [5.0, 10.0, 20.0, 30.0] {
            let s = scenario(0.1, rexc, 100.0);
            let v = interference_cbc(&s, &d, 1e-4).unwrap().mean_watts;
            let w = interference_aaecc(&s, 1e-4).unwrap().mean_watts;
            assert!(v < last_cbc, "cbc at rexc {rexc}");
            assert!(w < last_aaecc, "aaecc at rexc {rexc}");
            last_cbc = v;
            last_aaecc = w;
        }
        // non-decreasing in power
        let s = scenario(0.1, 10.0, 100.0);
        let mut s2 = s;
        s2.dl.p_bs_watts = 2.0;
        assert!(
            interference_cbc(&s2, &d, 1e-4).unwrap().mean_watts
                > interference_cbc(&s, &d, 1e-4).unwrap().mean_watts
        );
    }

    #[test]
    fn scenario_validation_rejects_inconsistencies() {
        let mut s = scenario(0.1, 10.0, 100.0);
        s.r_exc_m = 200_000.0;
        assert!(s.validate().is_err());
        let mut s = scenario(0.1, 10.0, 100.0);
        s.bs_array = ArrayGeometry::new(10, 10, 40.0).unwrap();
        assert!(s.validate().is_err());
        let mut s = scenario(0.1, 10.0, 100.0);
        s.intensity_bs = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn empirical_law_plugs_in() {
        let s = scenario(0.1, 10.0, 100.0);
        let sample = crate::geometry::empirical_circumradius_sample(1e-7, 1500, 31).unwrap();
        let emp = interference_cbc_with(&s, CellRadiusLaw::Empirical(&sample), 1e-4).unwrap();
        let d = dist(0.1);
        let ana = interference_cbc(&s, &d, 1e-4).unwrap();
        let rel = (emp.mean_watts - ana.mean_watts).abs() / ana.mean_watts;
        assert!(rel < 0.05, "empirical vs analytic relative gap {rel}");
        assert!(matches!(
            interference_cbc_with(&s, CellRadiusLaw::Empirical(&[]), 1e-4),
            Err(AnalyticError::EmptySample)
        ));
    }
}
