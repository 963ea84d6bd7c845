//! Pathloss models, the high-K-factor Rician base-station-to-radar channel,
//! the per-link worst-case interference bound, and its Monte Carlo oracle.
//!
//! All powers are linear watts; decibel conversions happen at the CLI
//! boundary only.

use crate::array::{normalized_gain, steering_vector, ArrayGeometry, BeamDirection};
use crate::mix_seed;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Ranges below this are rejected; the far-field pathloss models are
/// meaningless at sub-meter distances.
const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("pathloss exponent must exceed 2 for radial convergence, got {0}")]
    BadExponent(f64),
    #[error("carrier frequency must be positive, got {0} GHz")]
    BadFrequency(f64),
    #[error("reference pathloss must be positive and finite, got {0}")]
    BadReferencePathloss(f64),
    #[error("UMa LoS model requires distinct BS and radar heights, got both {0} m")]
    EqualHeights(f64),
    #[error("3D distance {0:.3} m below the {MIN_DISTANCE_M} m model floor")]
    DistanceBelowFloor(f64),
    #[error("downlink needs at least one user cluster")]
    NoUsers,
    #[error("transmit power must be positive, got {0} W")]
    BadPower(f64),
    #[error("Rician K-factor must be positive, got {0}")]
    BadKFactor(f64),
    #[error("need at least {needed} realizations or paths, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("precoder check needs at least 2 cluster beams, got {0}")]
    TooFewClusters(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathlossVariant {
    /// `beta(d) = pl_r0 * d^{-alpha}` with a caller-supplied exponent.
    ReferenceExponent,
    /// 3GPP 3D UMa line-of-sight:
    /// `PL(d) dB = 28 - 9 log10((h_bs - h_rad)^2) + 20 log10(fc_GHz) + 40 log10(d_m)`,
    /// an effective exponent of 4.
    UmaLos,
}

/// Large-scale pathloss `beta(d) = PL(r0) d^{-alpha}` over the 3D distance
/// between the BS and radar array centers. Owns both mount heights.
#[derive(Debug, Clone, Copy)]
pub struct PathlossModel {
    pub variant: PathlossVariant,
    pl_r0_linear: f64,
    alpha: f64,
    pub fc_ghz: f64,
    pub h_bs_m: f64,
    pub h_rad_m: f64,
}

impl PathlossModel {
    pub fn reference_exponent(
        pl_r0_linear: f64,
        alpha: f64,
        fc_ghz: f64,
        h_bs_m: f64,
        h_rad_m: f64,
    ) -> Result<Self, ChannelError> {
        if !(alpha > 2.0 && alpha.is_finite()) {
            return Err(ChannelError::BadExponent(alpha));
        }
        if !(fc_ghz > 0.0) {
            return Err(ChannelError::BadFrequency(fc_ghz));
        }
        if !(pl_r0_linear > 0.0 && pl_r0_linear.is_finite()) {
            return Err(ChannelError::BadReferencePathloss(pl_r0_linear));
        }
        Ok(Self {
            variant: PathlossVariant::ReferenceExponent,
            pl_r0_linear,
            alpha,
            fc_ghz,
            h_bs_m,
            h_rad_m,
        })
    }

    pub fn uma_los(fc_ghz: f64, h_bs_m: f64, h_rad_m: f64) -> Result<Self, ChannelError> {
        if !(fc_ghz > 0.0) {
            return Err(ChannelError::BadFrequency(fc_ghz));
        }
        let dh = h_bs_m - h_rad_m;
        if dh == 0.0 {
            return Err(ChannelError::EqualHeights(h_bs_m));
        }
        let intercept_db = 28.0 - 9.0 * (dh * dh).log10() + 20.0 * fc_ghz.log10();
        Ok(Self {
            variant: PathlossVariant::UmaLos,
            pl_r0_linear: 10f64.powf(-intercept_db / 10.0),
            alpha: 4.0,
            fc_ghz,
            h_bs_m,
            h_rad_m,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Linear pathloss at 1 m reference distance.
    pub fn pl_r0_linear(&self) -> f64 {
        self.pl_r0_linear
    }

    pub fn delta_h(&self) -> f64 {
        self.h_bs_m - self.h_rad_m
    }

    /// Linear power ratio over a ground range, using the 3D distance
    /// `sqrt(r^2 + (h_bs - h_rad)^2)`.
    pub fn pathloss(&self, ground_range_m: f64) -> Result<f64, ChannelError> {
        let dh = self.delta_h();
        let d = (ground_range_m * ground_range_m + dh * dh).sqrt();
        if d < MIN_DISTANCE_M {
            return Err(ChannelError::DistanceBelowFloor(d));
        }
        Ok(self.pl_r0_linear * d.powf(-self.alpha))
    }
}

/// Downlink power allocation and the dominant interfering user cluster: the
/// one cluster whose angular support overlaps the BS boresight toward the
/// radar. Power splits equally over `k_users` clusters; `fdr` divides the
/// received interference (1 = fully co-channel).
#[derive(Debug, Clone, Copy)]
pub struct DownlinkConfig {
    pub k_users: usize,
    pub p_bs_watts: f64,
    pub diuc_beam: BeamDirection,
    pub fdr: f64,
}

impl DownlinkConfig {
    pub fn new(k_users: usize, p_bs_watts: f64, diuc_beam: BeamDirection) -> Result<Self, ChannelError> {
        if k_users == 0 {
            return Err(ChannelError::NoUsers);
        }
        if !(p_bs_watts > 0.0 && p_bs_watts.is_finite()) {
            return Err(ChannelError::BadPower(p_bs_watts));
        }
        Ok(Self { k_users, p_bs_watts, diuc_beam, fdr: 1.0 })
    }
}

/// Line-of-sight elevation angles for a BS at the given ground range:
/// departure `phi_t = atan((h_bs - h_rad)/r)` and arrival `phi_r = -phi_t`.
pub fn los_elevations(pl: &PathlossModel, ground_range_m: f64) -> (f64, f64) {
    let phi_t = (pl.delta_h() / ground_range_m).atan();
    (phi_t, -phi_t)
}

/// Worst-case mean interference power (watts) at the radar from one BS whose
/// dominant interfering cluster is served on `dl.diuc_beam`:
///
/// `beta(d) * G_rad(azimuth, phi_r) * |a^H(0, phi_t) a(beam)|^2 * P / (M_bs * K)`
///
/// with the BS boresight toward the radar, so the LoS departure azimuth is
/// zero. `bs_azimuth_rad` is the azimuth of the BS as seen from the radar.
pub fn worst_case_bs_interference(
    bs: &ArrayGeometry,
    radar: &ArrayGeometry,
    scan: BeamDirection,
    dl: &DownlinkConfig,
    pl: &PathlossModel,
    ground_range_m: f64,
    bs_azimuth_rad: f64,
) -> Result<f64, ChannelError> {
    let beta = pl.pathloss(ground_range_m)?;
    let (phi_t, phi_r) = los_elevations(pl, ground_range_m);
    let arrival = BeamDirection { azimuth_rad: bs_azimuth_rad, elevation_rad: phi_r };
    let g_rad = normalized_gain(radar, scan, arrival);
    let departure = BeamDirection { azimuth_rad: 0.0, elevation_rad: phi_t };
    let g_bs = normalized_gain(bs, departure, dl.diuc_beam);
    Ok(beta * g_rad * g_bs * dl.p_bs_watts / (dl.k_users as f64 * dl.fdr))
}

/// Multipath angle sampler for the Rician oracle: azimuths uniform over the
/// front half-plane, elevations uniform over a below-horizon band.
#[derive(Debug, Clone, Copy)]
pub struct NlosAngleLaw {
    pub azimuth_range: (f64, f64),
    pub elevation_range: (f64, f64),
}

impl Default for NlosAngleLaw {
    fn default() -> Self {
        Self {
            azimuth_range: (-PI / 2.0, PI / 2.0),
            elevation_range: (0.0, 20f64.to_radians()),
        }
    }
}

impl NlosAngleLaw {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> BeamDirection {
        let (a0, a1) = self.azimuth_range;
        let (e0, e1) = self.elevation_range;
        BeamDirection {
            azimuth_rad: a0 + (a1 - a0) * rng.random::<f64>(),
            elevation_rad: e0 + (e1 - e0) * rng.random::<f64>(),
        }
    }
}

/// Rician channel controls for the single-BS Monte Carlo oracle.
#[derive(Debug, Clone, Copy)]
pub struct RicianChannelParams {
    pub k_factor: f64,
    pub n_paths: usize,
    pub nlos_angle_law: NlosAngleLaw,
    pub seed: u64,
}

impl RicianChannelParams {
    pub fn new(k_factor: f64, n_paths: usize, seed: u64) -> Result<Self, ChannelError> {
        if !(k_factor > 0.0) {
            return Err(ChannelError::BadKFactor(k_factor));
        }
        if n_paths == 0 {
            return Err(ChannelError::TooFewSamples { needed: 1, got: 0 });
        }
        Ok(Self { k_factor, n_paths, nlos_angle_law: NlosAngleLaw::default(), seed })
    }
}

/// The multipath (departure, arrival) directions the oracle will use for
/// these channel parameters; drawn deterministically from the params seed so
/// admissibility conditions can be checked on the same angles.
pub fn sample_nlos_angles(params: &RicianChannelParams) -> Vec<(BeamDirection, BeamDirection)> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.seed, 0x5eed));
    (0..params.n_paths)
        .map(|_| {
            let dep = params.nlos_angle_law.draw(&mut rng);
            let arr = params.nlos_angle_law.draw(&mut rng);
            (dep, arr)
        })
        .collect()
}

/// Sample mean and 95% confidence half-width of the squared interference
/// envelope under the Rician channel, with the identity baseband precoder and
/// the DIUC-only RF beamformer. Multipath angles come from
/// [`sample_nlos_angles`] and stay fixed; fading, residual phases, and data
/// symbols are redrawn per realization. Unbiased for the two-term mean that
/// the worst-case bound dominates.
#[allow(clippy::too_many_arguments)]
pub fn mc_single_bs_interference(
    params: &RicianChannelParams,
    bs: &ArrayGeometry,
    radar: &ArrayGeometry,
    scan: BeamDirection,
    dl: &DownlinkConfig,
    pl: &PathlossModel,
    ground_range_m: f64,
    bs_azimuth_rad: f64,
    n_realizations: usize,
) -> Result<(f64, f64), ChannelError> {
    if n_realizations == 0 {
        return Err(ChannelError::TooFewSamples { needed: 1, got: 0 });
    }
    let beta = pl.pathloss(ground_range_m)?;
    let (phi_t, phi_r) = los_elevations(pl, ground_range_m);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.seed, 0xfade));

    let w_rad = normalized_beam(radar, scan);
    let w_bs = normalized_beam(bs, dl.diuc_beam);
    let a_r_los = steering_vector(radar, BeamDirection { azimuth_rad: bs_azimuth_rad, elevation_rad: phi_r });
    let a_t_los = steering_vector(bs, BeamDirection { azimuth_rad: 0.0, elevation_rad: phi_t });
    let c_los = dot_h(&w_rad, &a_r_los) * dot_h(&a_t_los, &w_bs);

    // per-path coupling constants (angles fixed across realizations)
    let c_path: Vec<Complex64> = sample_nlos_angles(params)
        .into_iter()
        .map(|(dep, arr)| {
            let a_r = steering_vector(radar, arr);
            let a_t = steering_vector(bs, dep);
            dot_h(&w_rad, &a_r) * dot_h(&a_t, &w_bs)
        })
        .collect();

    // an infinite K-factor is the exact LoS-only channel
    let (amp_los, amp_path) = if params.k_factor.is_finite() {
        let denom = 1.0 + params.k_factor;
        (
            (beta * params.k_factor / denom).sqrt(),
            (beta / (denom * params.n_paths as f64)).sqrt(),
        )
    } else {
        (beta.sqrt(), 0.0)
    };
    let sym_power = (dl.p_bs_watts / (dl.k_users as f64 * dl.fdr)).sqrt();

    // Welford accumulation keeps the variance stable when realizations are
    // nearly identical (LoS-dominated channels)
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for j in 0..n_realizations {
        let alpha0 = TAU * rng.random::<f64>();
        let mut field = amp_los * Complex64::from_polar(1.0, -alpha0) * c_los;
        for c in &c_path {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let gamma = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            let alpha_i = TAU * rng.random::<f64>();
            field += amp_path * gamma.conj() * Complex64::from_polar(1.0, -alpha_i) * c;
        }
        // constant-modulus symbol with uniform phase: E[|d|^2] = P/(K*fdr)
        let d = Complex64::from_polar(sym_power, TAU * rng.random::<f64>());
        let p = (field * d).norm_sqr();
        let delta = p - mean;
        mean += delta / (j + 1) as f64;
        m2 += delta * (p - mean);
    }
    let n = n_realizations as f64;
    let var = if n_realizations > 1 { m2 / (n - 1.0) } else { 0.0 };
    let half_width = 1.96 * (var / n).sqrt();
    Ok((mean, half_width))
}

/// Two-term closed-form mean of the oracle for fixed multipath couplings;
/// used by tests to pin the Monte Carlo estimator.
pub fn rician_mean_fixed_angles(
    beta: f64,
    k_factor: f64,
    c_los_sq: f64,
    c_path_sq: &[f64],
    symbol_power: f64,
) -> f64 {
    let nlos: f64 = c_path_sq.iter().sum::<f64>() / c_path_sq.len() as f64;
    beta / (1.0 + k_factor) * (k_factor * c_los_sq + nlos) * symbol_power
}

/// Largest off-diagonal magnitude of `W_RF^H W_RF - I` for RF beamforming
/// columns built from normalized steering vectors toward the cluster beams.
pub fn precoder_diagonality_check(
    bs: &ArrayGeometry,
    cluster_beams: &[BeamDirection],
) -> Result<f64, ChannelError> {
    if cluster_beams.len() < 2 {
        return Err(ChannelError::TooFewClusters(cluster_beams.len()));
    }
    let cols: Vec<Vec<Complex64>> = cluster_beams.iter().map(|b| normalized_beam(bs, *b)).collect();
    let mut worst = 0.0f64;
    for i in 0..cols.len() {
        for j in 0..cols.len() {
            if i == j {
                continue;
            }
            worst = worst.max(dot_h(&cols[i], &cols[j]).norm());
        }
    }
    Ok(worst)
}

fn normalized_beam(g: &ArrayGeometry, d: BeamDirection) -> Vec<Complex64> {
    let scale = 1.0 / (g.elements() as f64).sqrt();
    steering_vector(g, d).into_iter().map(|z| z * scale).collect()
}

fn dot_h(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
