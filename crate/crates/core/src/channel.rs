//! Air-to-ground mmWave channel vectors for a uniform linear transmit array.
//!
//! A link between a hovering base station and a ground user is modeled as a
//! sum of paths, each with a complex gain and an angle of departure. The
//! array response toward angle `theta` is the unit-norm steering vector
//!
//! ```text
//! a(theta)[n] = exp(-i * 2*pi * (M/zeta) * sin(theta) * n) / sqrt(N)
//! ```
//!
//! with `M/zeta` the antenna spacing in wavelengths. The channel itself is
//!
//! ```text
//! h = sqrt(N) * sum_p alpha_p * a(theta_p) / sqrt(1 + d^gamma)
//! ```
//!
//! so a single line-of-sight path has `|h|^2 = N * |alpha|^2 / (1 + d^gamma)`.
//! Since the stations hover well above the scatterers, the engine uses the
//! line-of-sight form everywhere; the multipath form is kept for tests and
//! ad-hoc studies.
//!
//! Angles are radians throughout; degrees only appear at I/O boundaries.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{distance, Point3};

/// One complex channel coefficient.
pub type ComplexScalar = Complex64;

/// Length-N array response or channel vector.
pub type ComplexVector = Vec<Complex64>;

/// Transmit-array description: element count and spacing in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    /// Number of antenna elements, N >= 1.
    pub n: usize,
    /// Element spacing divided by carrier wavelength; 0.5 is half-wavelength.
    pub spacing_ratio: f64,
}

impl ArrayConfig {
    pub fn new(n: usize, spacing_ratio: f64) -> Self {
        debug_assert!(n >= 1 && spacing_ratio > 0.0);
        Self { n, spacing_ratio }
    }

    /// Half-wavelength spacing.
    pub fn half_wavelength(n: usize) -> Self {
        Self::new(n, 0.5)
    }
}

/// Large-scale link model: path-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub path_loss_exp: f64,
}

impl LinkParams {
    pub fn new(path_loss_exp: f64) -> Self {
        debug_assert!(path_loss_exp >= 0.0);
        Self { path_loss_exp }
    }
}

/// One propagation path: complex gain and angle of departure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub gain: ComplexScalar,
    pub aod_rad: f64,
}

/// Errors from channel construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChannelError {
    /// Transmitter and receiver coincide; no direction is defined.
    #[error("degenerate link: transmitter and receiver coincide")]
    DegenerateLink,
    /// The multipath form needs at least one path.
    #[error("multipath channel requested with an empty path set")]
    EmptyPathSet,
}

/// Unit-norm steering vector of the uniform linear array toward `theta`.
pub fn steering_vector(theta: f64, cfg: &ArrayConfig) -> ComplexVector {
    let scale = 1.0 / (cfg.n as f64).sqrt();
    let step = -2.0 * std::f64::consts::PI * cfg.spacing_ratio * theta.sin();
    (0..cfg.n)
        .map(|n| Complex64::from_polar(scale, step * n as f64))
        .collect()
}

/// Elevation angle of departure from the station down toward the user:
/// `asin((station.z - user.z) / d)`, in `[-pi/2, pi/2]`.
pub fn aod(station: Point3, user: Point3) -> Result<f64, ChannelError> {
    let d = distance(station, user);
    if d == 0.0 {
        return Err(ChannelError::DegenerateLink);
    }
    Ok(((station.z - user.z) / d).asin())
}

/// Line-of-sight channel between a station position and a user.
///
/// `h = sqrt(N) * alpha * a(theta) / sqrt(1 + d^gamma)`.
pub fn los_channel(
    station: Point3,
    user: Point3,
    alpha: ComplexScalar,
    params: &LinkParams,
    cfg: &ArrayConfig,
) -> Result<ComplexVector, ChannelError> {
    let d = distance(station, user);
    if d == 0.0 {
        return Err(ChannelError::DegenerateLink);
    }
    let theta = ((station.z - user.z) / d).asin();
    let gain = alpha * (cfg.n as f64).sqrt() / (1.0 + d.powf(params.path_loss_exp)).sqrt();
    Ok(steering_vector(theta, cfg)
        .into_iter()
        .map(|a| gain * a)
        .collect())
}

/// General multipath channel at link distance `d`:
/// `h = sqrt(N) * sum_p alpha_p * a(theta_p) / sqrt(1 + d^gamma)`.
///
/// A single path reproduces [`los_channel`] for the same gain, angle, and
/// distance.
pub fn multipath_channel(
    paths: &[PathComponent],
    d: f64,
    params: &LinkParams,
    cfg: &ArrayConfig,
) -> Result<ComplexVector, ChannelError> {
    if paths.is_empty() {
        return Err(ChannelError::EmptyPathSet);
    }
    debug_assert!(d > 0.0);
    let scale = (cfg.n as f64).sqrt() / (1.0 + d.powf(params.path_loss_exp)).sqrt();
    let mut h = vec![Complex64::new(0.0, 0.0); cfg.n];
    for path in paths {
        for (acc, a) in h.iter_mut().zip(steering_vector(path.aod_rad, cfg)) {
            *acc += path.gain * a;
        }
    }
    for v in &mut h {
        *v *= scale;
    }
    Ok(h)
}

/// Draw a circularly symmetric complex Gaussian gain with unit variance:
/// real and imaginary parts are independent N(0, 1/2).
pub fn sample_complex_gain<R: Rng + ?Sized>(rng: &mut R) -> ComplexScalar {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum()
}

/// Inner product `h^H w`.
pub fn inner(h: &[Complex64], w: &[Complex64]) -> Complex64 {
    debug_assert_eq!(h.len(), w.len());
    h.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}
