//! Uniform rectangular array steering vectors, beam-pattern gains, and the
//! piecewise monotone upper bound on the beamforming gain.
//!
//! Element spacing is fixed at half a wavelength on both axes. Elevation
//! angles are signed: negative is above the horizon, positive below it.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Below this magnitude of `sin(x)` the Dirichlet ratio `sin^2(Nx)/sin^2(x)`
/// is evaluated at its limit `N^2` (mainlobe center and grating repetitions).
const SIN_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ArrayError {
    #[error("array needs at least one element per axis, got {n_az}x{n_el}")]
    EmptyArray { n_az: usize, n_el: usize },
    #[error("mount height must be finite and non-negative, got {0}")]
    BadHeight(f64),
    #[error("azimuth {0} rad outside [-pi/2, pi/2)")]
    AzimuthRange(f64),
    #[error("elevation {0} rad outside [-pi/2, pi/2]")]
    ElevationRange(f64),
}

/// A uniform rectangular array: element counts on the azimuth and elevation
/// axes plus the mount height of the array center above ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub n_az: usize,
    pub n_el: usize,
    pub height_m: f64,
}

impl ArrayGeometry {
    pub fn new(n_az: usize, n_el: usize, height_m: f64) -> Result<Self, ArrayError> {
        if n_az < 1 || n_el < 1 {
            return Err(ArrayError::EmptyArray { n_az, n_el });
        }
        if !height_m.is_finite() || height_m < 0.0 {
            return Err(ArrayError::BadHeight(height_m));
        }
        Ok(Self { n_az, n_el, height_m })
    }

    /// Total element count `n_az * n_el`.
    pub fn elements(&self) -> usize {
        self.n_az * self.n_el
    }
}

/// A look direction. Azimuth in `[-pi/2, pi/2)`, elevation in `[-pi/2, pi/2]`
/// with negative elevations above the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamDirection {
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
}

impl BeamDirection {
    pub fn new(azimuth_rad: f64, elevation_rad: f64) -> Result<Self, ArrayError> {
        if !(-PI / 2.0..PI / 2.0).contains(&azimuth_rad) {
            return Err(ArrayError::AzimuthRange(azimuth_rad));
        }
        if !(-PI / 2.0..=PI / 2.0).contains(&elevation_rad) {
            return Err(ArrayError::ElevationRange(elevation_rad));
        }
        Ok(Self { azimuth_rad, elevation_rad })
    }

    pub fn from_degrees(azimuth_deg: f64, elevation_deg: f64) -> Result<Self, ArrayError> {
        Self::new(azimuth_deg.to_radians(), elevation_deg.to_radians())
    }
}

/// Steering vector of the array toward `d`, as the Kronecker product of the
/// azimuth vector (phases `-pi*m*sin(theta)*cos(phi)`) and the elevation
/// vector (phases `-pi*n*sin(phi)`). Entry `m*n_el + n` pairs azimuth element
/// `m` with elevation element `n`; every entry has unit magnitude.
pub fn steering_vector(g: &ArrayGeometry, d: BeamDirection) -> Vec<Complex64> {
    let az_phase = -PI * d.azimuth_rad.sin() * d.elevation_rad.cos();
    let el_phase = -PI * d.elevation_rad.sin();
    let mut out = Vec::with_capacity(g.elements());
    for m in 0..g.n_az {
        let pm = az_phase * m as f64;
        for n in 0..g.n_el {
            out.push(Complex64::from_polar(1.0, pm + el_phase * n as f64));
        }
    }
    out
}

/// Dirichlet power ratio `sin^2(N*pi*delta/2) / sin^2(pi*delta/2)` with the
/// removable singularities evaluated at the limit `N^2`.
pub fn dirichlet_power_ratio(n: usize, delta: f64) -> f64 {
    let x = 0.5 * PI * delta;
    let s = x.sin();
    if s.abs() < SIN_EPS {
        (n * n) as f64
    } else {
        let t = (n as f64 * x).sin();
        (t * t) / (s * s)
    }
}

/// Normalized beamforming gain `|a^H(observe) a(beam)|^2 / (n_az*n_el)`.
///
/// This is the product of the azimuth and elevation Dirichlet kernels; it is
/// also the receive gain of a radar whose beamformer is the normalized
/// steering vector toward `observe`, evaluated on an arrival from `beam`.
/// Ranges over `[0, n_az*n_el]`, attaining the maximum at `observe == beam`.
pub fn normalized_gain(g: &ArrayGeometry, observe: BeamDirection, beam: BeamDirection) -> f64 {
    let d_az = observe.azimuth_rad.sin() * observe.elevation_rad.cos()
        - beam.azimuth_rad.sin() * beam.elevation_rad.cos();
    let d_el = observe.elevation_rad.sin() - beam.elevation_rad.sin();
    dirichlet_power_ratio(g.n_az, d_az) / g.n_az as f64
        * (dirichlet_power_ratio(g.n_el, d_el) / g.n_el as f64)
}

/// Monotone upper bound on the beamforming gain toward any direction with
/// elevation at least `phi_m`, observed from elevation `phi` (any azimuth).
///
/// Three cases, evaluated in order:
/// 1. `phi_m <= phi`: the full array gain `n_az*n_el` is attainable.
/// 2. `sin(phi_m) <= (1 + n_el*sin(phi))/n_el`: the elevation kernel is still
///    on its mainlobe slope, so the gain at `phi_k = phi_m` dominates.
/// 3. otherwise: the elevation kernel numerator is relaxed to 1, leaving
///    `(n_az/n_el)/sin^2(pi*(sin(phi_m)-sin(phi))/2)`.
///
/// Ties on the case-2/case-3 boundary resolve to case 2 (the tighter value).
/// The result never exceeds `n_az*n_el`, and for `sin(phi_m) - sin(phi) <= 1`
/// (always true when `phi >= 0`) it dominates the gain toward every beam with
/// elevation at least `phi_m` and is non-increasing in `phi_m` past `phi`.
/// The case-3 construction loses those properties for strongly above-horizon
/// observations where the elevation kernel argument passes `pi/2`; the
/// interference models only query line-of-sight elevations within a fraction
/// of a degree of the horizon.
pub fn max_gain_bound(g: &ArrayGeometry, phi: f64, phi_m: f64) -> f64 {
    debug_assert!((-PI / 2.0..PI / 2.0).contains(&phi));
    debug_assert!((0.0..=PI / 2.0).contains(&phi_m));
    let full = (g.n_az * g.n_el) as f64;
    if phi_m <= phi {
        return full;
    }
    let s_m = phi_m.sin();
    let s = phi.sin();
    if s_m <= (1.0 + g.n_el as f64 * s) / g.n_el as f64 {
        let el = dirichlet_power_ratio(g.n_el, s - s_m) / g.n_el as f64;
        (g.n_az as f64 * el).min(full)
    } else {
        let x = (0.5 * PI * (s_m - s)).sin();
        ((g.n_az as f64 / g.n_el as f64) / (x * x)).min(full)
    }
}
