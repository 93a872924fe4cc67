//! Geometry, path loss, LoS probability and fading composition: turns
//! scenario positions into the three linear link gains.
//!
//! Path loss follows the log-distance model `L = L(d0) + 10·α·log10(d/d0)`
//! with `L(d0)` the free-space loss at the reference distance. The AP-UAV
//! and AP-GU links use fixed exponents; the UAV-GU exponent is an affine
//! function of the elevation-angle LoS probability
//! `P(θ) = 1 / (1 + a2·exp(−b2(θ − a2)))`. Linear gains are
//! `G = z · 10^(−L/10)` with `z` the fading power gain.

use serde::{Deserialize, Serialize};

use crate::scenario::ScenarioConfig;

/// Propagation speed used for the free-space reference loss. The rounded
/// radio-engineering value keeps the d0 = 100 m, f = 2 GHz reference at
/// 78.4624 dB.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Configuration-level channel errors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChannelError {
    #[error("channel configuration error: {0}")]
    Config(String),
}

/// A point in meters; `z` is height above ground. Serialized as `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Position3D { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Position3D {
    fn from(v: [f64; 3]) -> Self {
        Position3D::new(v[0], v[1], v[2])
    }
}

impl From<Position3D> for [f64; 3] {
    fn from(p: Position3D) -> Self {
        [p.x, p.y, p.z]
    }
}

/// Path-loss model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathLossParams {
    /// Reference distance d0 in meters.
    pub d0_m: f64,
    /// Carrier frequency in Hz (sets the free-space loss at d0).
    pub carrier_hz: f64,
    /// AP-UAV path-loss exponent (LoS).
    pub alpha1: f64,
    /// AP-GU path-loss exponent (NLoS).
    pub alpha2: f64,
    /// Slope of the UAV-GU exponent in the LoS probability.
    pub a1: f64,
    /// Intercept of the UAV-GU exponent.
    pub b1: f64,
    /// LoS-probability sigmoid offset.
    pub a2: f64,
    /// LoS-probability sigmoid steepness.
    pub b2: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        // Rural-area air-to-ground setup: α1 = 2 (LoS), α2 = 3.5 (NLoS),
        // α3 = a1·P(θ) + b1 with (a1, b1) = (−1.5, 2), sigmoid (9.61, 0.16).
        PathLossParams {
            d0_m: 100.0,
            carrier_hz: 2.0e9,
            alpha1: 2.0,
            alpha2: 3.5,
            a1: -1.5,
            b1: 2.0,
            a2: 9.61,
            b2: 0.16,
        }
    }
}

impl PathLossParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.d0_m > 0.0) {
            return Err(ChannelError::Config("path_loss.d0_m must be > 0".into()));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(ChannelError::Config("path_loss.carrier_hz must be > 0".into()));
        }
        if !(self.alpha1 > 0.0) || !(self.alpha2 > 0.0) {
            return Err(ChannelError::Config("path_loss exponents must be > 0".into()));
        }
        if !(self.b2 > 0.0) {
            return Err(ChannelError::Config("path_loss.b2 must be > 0".into()));
        }
        Ok(())
    }

    /// Free-space path loss at the reference distance, in dB.
    pub fn reference_loss_db(&self) -> f64 {
        20.0 * (4.0 * std::f64::consts::PI * self.d0_m * self.carrier_hz / SPEED_OF_LIGHT).log10()
    }
}

/// The three linear power gains plus noise power for one frame realization.
///
/// A gain of zero models a dead link (e.g. a zero fading draw); the schemes
/// reject such budgets and solvers report the allocation infeasible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// AP → UAV linear gain.
    pub g1: f64,
    /// AP → GU linear gain.
    pub g2: f64,
    /// UAV → GU linear gain.
    pub g3: f64,
    /// Noise power σ² in watts.
    pub noise_w: f64,
}

/// Euclidean distance in meters.
pub fn distance(a: Position3D, b: Position3D) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Elevation angle of the UAV as seen from the GU, in degrees in (0, 90].
///
/// Requires the UAV strictly above the GU; a coincident ground projection
/// yields 90°.
pub fn elevation_angle_deg(uav: Position3D, gu: Position3D) -> Result<f64, ChannelError> {
    let dz = uav.z - gu.z;
    if !(dz > 0.0) {
        return Err(ChannelError::Config(
            "elevation angle requires the UAV above the GU".into(),
        ));
    }
    let dh = ((uav.x - gu.x).powi(2) + (uav.y - gu.y).powi(2)).sqrt();
    if dh == 0.0 {
        return Ok(90.0);
    }
    Ok((dz / dh).atan().to_degrees())
}

/// Sigmoid LoS probability `P(θ) = 1 / (1 + a2·exp(−b2(θ − a2)))`,
/// strictly increasing in θ for a2, b2 > 0.
pub fn los_probability(theta_deg: f64, a2: f64, b2: f64) -> f64 {
    1.0 / (1.0 + a2 * (-b2 * (theta_deg - a2)).exp())
}

/// UAV-GU path-loss exponent `α3 = a1·P(θ) + b1`.
pub fn uav_gu_exponent(theta_deg: f64, params: &PathLossParams) -> Result<f64, ChannelError> {
    let alpha3 = params.a1 * los_probability(theta_deg, params.a2, params.b2) + params.b1;
    if !(alpha3 > 0.0) {
        return Err(ChannelError::Config(format!(
            "UAV-GU path-loss exponent {alpha3} <= 0 at theta = {theta_deg} deg"
        )));
    }
    Ok(alpha3)
}

/// Log-distance path loss in dB: `L(d0) + 10·α·log10(d/d0)`.
pub fn path_loss_db(d_m: f64, alpha: f64, params: &PathLossParams) -> f64 {
    params.reference_loss_db() + 10.0 * alpha * (d_m / params.d0_m).log10()
}

/// Linear power gain `G = z · 10^(−L/10)` for a path loss `L` in dB and a
/// fading power gain `z >= 0`.
pub fn link_gain(loss_db: f64, z: f64) -> f64 {
    z * 10f64.powf(-loss_db / 10.0)
}

/// Builds the per-frame link budget for a scenario and one fading draw
/// `(z1, z2, z3)` for the AP-UAV, AP-GU and UAV-GU links.
pub fn build_link_budget(
    cfg: &ScenarioConfig,
    fading: [f64; 3],
) -> Result<LinkBudget, ChannelError> {
    cfg.path_loss.validate()?;
    for (i, z) in fading.iter().enumerate() {
        if !(*z >= 0.0) {
            return Err(ChannelError::Config(format!("fading gain z{} must be >= 0", i + 1)));
        }
    }
    for (name, p) in [("ap_pos", cfg.ap_pos), ("uav_pos", cfg.uav_pos), ("gu_pos", cfg.gu_pos)] {
        if !p.is_finite() {
            return Err(ChannelError::Config(format!("{name} must be finite")));
        }
    }
    let p = &cfg.path_loss;
    let d1 = distance(cfg.ap_pos, cfg.uav_pos);
    let d2 = distance(cfg.ap_pos, cfg.gu_pos);
    let d3 = distance(cfg.uav_pos, cfg.gu_pos);
    if d1 <= 0.0 || d2 <= 0.0 || d3 <= 0.0 {
        return Err(ChannelError::Config("node positions must be distinct".into()));
    }
    let theta = elevation_angle_deg(cfg.uav_pos, cfg.gu_pos)?;
    let alpha3 = uav_gu_exponent(theta, p)?;
    Ok(LinkBudget {
        g1: link_gain(path_loss_db(d1, p.alpha1, p), fading[0]),
        g2: link_gain(path_loss_db(d2, p.alpha2, p), fading[1]),
        g3: link_gain(path_loss_db(d3, alpha3, p), fading[2]),
        noise_w: cfg.noise_watts(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn p(x: f64, y: f64, z: f64) -> Position3D {
        Position3D::new(x, y, z)
    }

    #[test]
    fn distance_basics() {
        assert_eq!(distance(p(0.0, 0.0, 0.0), p(0.0, 0.0, 0.0)), 0.0);
        // AP (0,0,20) to GU (700,0,0) and UAV (100,0,100), frozen arithmetic.
        assert!(rel(distance(p(0.0, 0.0, 20.0), p(700.0, 0.0, 0.0)), 700.285_656_000_463_86) < 1e-14);
        assert!(rel(distance(p(0.0, 0.0, 20.0), p(100.0, 0.0, 100.0)), 128.062_484_748_656_97) < 1e-14);
    }

    #[test]
    fn elevation_angle_cases() {
        // Directly overhead.
        assert_eq!(elevation_angle_deg(p(3.0, 4.0, 50.0), p(3.0, 4.0, 0.0)).unwrap(), 90.0);
        // Isoceles: Δz equals horizontal distance.
        assert!(rel(elevation_angle_deg(p(10.0, 0.0, 10.0), p(0.0, 0.0, 0.0)).unwrap(), 45.0) < 1e-14);
        // Frozen arithmetic: atan(100/600) in degrees.
        let th = elevation_angle_deg(p(100.0, 0.0, 100.0), p(700.0, 0.0, 0.0)).unwrap();
        assert!(rel(th, 9.462_322_208_025_617_4) < 1e-14);
        // UAV below GU is a configuration error.
        assert!(elevation_angle_deg(p(0.0, 0.0, 1.0), p(5.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn los_probability_anchors() {
        let (a2, b2) = (9.61, 0.16);
        // θ = a2 zeroes the exponent.
        assert!(rel(los_probability(a2, a2, b2), 1.0 / (1.0 + a2)) < 1e-15);
        // Near-certain LoS at zenith.
        assert!(los_probability(90.0, a2, b2) > 0.99);
        // Frozen value at the default-topology elevation angle.
        assert!(rel(los_probability(9.462_322_208_025_617_4, a2, b2), 0.092_252_852_027_240_913) < 1e-13);
        assert!(rel(los_probability(45.0, a2, b2), 0.967_691_899_947_242_34) < 1e-13);
    }

    #[test]
    fn los_probability_monotone_in_theta() {
        for &(a2, b2) in &[(9.61, 0.16), (4.88, 0.43), (12.0, 0.11)] {
            let mut prev = 0.0;
            for i in 1..=90 {
                let v = los_probability(i as f64, a2, b2);
                assert!(v > prev && v < 1.0);
                prev = v;
            }
        }
    }

    #[test]
    fn uav_gu_exponent_cases() {
        let params = PathLossParams::default();
        // Frozen composition of the sigmoid at 45°.
        assert!(rel(uav_gu_exponent(45.0, &params).unwrap(), 0.548_462_150_079_136_50) < 1e-12);
        assert!(rel(
            uav_gu_exponent(9.462_322_208_025_617_4, &params).unwrap(),
            1.861_620_721_959_138_6
        ) < 1e-12);
        // P(θ)→0 limit tends to b1, P(θ)→1 limit to a1 + b1.
        assert!((uav_gu_exponent(-200.0, &params).unwrap() - params.b1).abs() < 1e-9);
        assert!((uav_gu_exponent(400.0, &params).unwrap() - (params.a1 + params.b1)).abs() < 1e-9);
        // A slope that drives α3 negative is a configuration error.
        let bad = PathLossParams { a1: -3.0, ..params };
        assert!(uav_gu_exponent(89.0, &bad).is_err());
    }

    #[test]
    fn path_loss_reference_and_slope() {
        let params = PathLossParams::default();
        let l0 = params.reference_loss_db();
        // Free-space loss at 100 m, 2 GHz.
        assert!(rel(l0, 78.462_372_099_328_300) < 1e-14);
        assert!(rel(path_loss_db(100.0, 2.0, &params), l0) < 1e-14);
        // One decade at α = 2 adds exactly 20 dB.
        assert!(rel(path_loss_db(1000.0, 2.0, &params), l0 + 20.0) < 1e-14);
    }

    #[test]
    fn path_loss_monotone_in_distance_and_exponent() {
        let params = PathLossParams::default();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..50 {
            let d = 100.0 * 1.1f64.powi(i);
            let l = path_loss_db(d, 3.5, &params);
            assert!(l > prev);
            prev = l;
        }
        assert!(path_loss_db(500.0, 3.5, &params) > path_loss_db(500.0, 2.0, &params));
    }

    #[test]
    fn link_gain_cases() {
        assert_eq!(link_gain(0.0, 1.0), 1.0);
        assert!(rel(link_gain(10.0, 1.0), 0.1) < 1e-15);
        assert!(rel(link_gain(78.46, 0.5), 7.128_037_968_010_940_9e-9) < 1e-13);
    }

    #[test]
    fn default_topology_budget_matches_frozen_gains() {
        let cfg = ScenarioConfig::default();
        let b = build_link_budget(&cfg, [1.0, 1.0, 1.0]).unwrap();
        assert!(rel(b.g1, 8.687_982_591_282_773_8e-9) < 1e-12);
        assert!(rel(b.g2, 1.567_831_848_811_122_5e-11) < 1e-12);
        assert!(rel(b.g3, 4.943_839_660_584_628_5e-10) < 1e-12);
        assert!(rel(b.noise_w, 1e-11) < 1e-15);
        // The AP-UAV link outranks the AP-GU link at the default topology.
        assert!(b.g1 > b.g2);
    }

    #[test]
    fn dead_link_and_determinism() {
        let cfg = ScenarioConfig::default();
        let b = build_link_budget(&cfg, [0.0, 1.0, 1.0]).unwrap();
        assert_eq!(b.g1, 0.0);
        let b2 = build_link_budget(&cfg, [0.0, 1.0, 1.0]).unwrap();
        assert_eq!(b, b2);
        assert!(build_link_budget(&cfg, [-0.1, 1.0, 1.0]).is_err());
    }

    #[test]
    fn g1_exceeds_g2_across_gu_distances() {
        // Ground sweep 150–1000 m with unit fading.
        let mut cfg = ScenarioConfig::default();
        for i in 0..=85 {
            let d = 150.0 + 10.0 * i as f64;
            cfg.gu_pos = p(d, 0.0, 0.0);
            let b = build_link_budget(&cfg, [1.0, 1.0, 1.0]).unwrap();
            assert!(b.g1 > b.g2, "g1 <= g2 at {d} m");
        }
    }
}
