//! Scalar rate/error primitives for the infinite- and finite-blocklength
//! regimes.
//!
//! The finite-blocklength achievable rate follows the normal approximation
//!
//! ```text
//! r = log2(1 + γ) − log2(e) · sqrt(γ(γ+2) / ((γ+1)² m)) · Q⁻¹(ε) + log2(m)/m
//! ```
//!
//! in bits per channel use, for blocklength `m` (symbols), linear SNR `γ`
//! and block error probability `ε`. [`fbl_error`] is the exact algebraic
//! inverse in `ε`, and [`invert_snr_for_error`] the numeric inverse in `γ`.
//! Blocklength is treated as a positive real throughout; integrality is a
//! solver-level choice.

use crate::search::{bisect_root, RootError};

/// Default linear-SNR cap for bracketed inversion, far beyond any physical
/// SNR in the scenarios of interest.
pub const DEFAULT_SNR_CAP: f64 = 1e9;

/// Relative bracket tolerance for SNR inversion. Tighter than the error-side
/// tolerance because the error probability is exponentially sensitive to γ.
const INVERT_REL_TOL: f64 = 1e-12;
const INVERT_MAX_ITER: usize = 200;

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Errors from the scalar rate primitives.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FblError {
    /// An argument lies outside the stated domain.
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// No SNR below the cap achieves the required rate at the target error.
    #[error("rate {rate} unreachable below the SNR cap {snr_cap:.3e}")]
    InfeasibleRate { rate: f64, snr_cap: f64 },
    /// The required rate is at or below what the approximation already
    /// yields at vanishing SNR (the `log2(m)/m` floor), so the inversion
    /// has no root; callers treat this as the γ → 0 limit.
    #[error("rate {rate} is at or below the approximation floor {floor}")]
    RateBelowFloor { rate: f64, floor: f64 },
}

/// Gaussian tail integral `Q(x) = ∫ₓ^∞ φ(t) dt`, with `φ` the standard
/// normal density. Strictly decreasing; `Q(0) = 0.5`.
///
/// Total on finite input; underflows to 0 for `x ≳ 38` as the tail drops
/// below the smallest positive `f64`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
fn gaussian_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse Q-function: the `x` with `q_function(x) = p`, for `p ∈ (0, 1)`.
///
/// A rational approximation seeds the value; two Newton steps against
/// [`q_function`] polish it to well below 1e-10 relative error.
pub fn inv_q(p: f64) -> Result<f64, FblError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(FblError::Domain("inv_q requires 0 < p < 1"));
    }
    let mut x = -acklam_norm_ppf(p);
    for _ in 0..2 {
        let pdf = gaussian_pdf(x);
        if pdf > 0.0 {
            x += (q_function(x) - p) / pdf;
        }
    }
    Ok(x)
}

/// Acklam's rational approximation of the standard normal quantile,
/// |relative error| < 1.15e-9 over (0, 1).
fn acklam_norm_ppf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -39.696_830_286_653_8,
        220.946_098_424_521,
        -275.928_510_446_969,
        138.357_751_867_269,
        -30.664_798_066_147_2,
        2.506_628_277_459_24,
    ];
    const B: [f64; 5] = [
        -54.476_098_798_224_1,
        161.585_836_858_041,
        -155.698_979_859_887,
        66.801_311_887_719_7,
        -13.280_681_552_885_7,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_29e-3,
        -0.322_396_458_041_136,
        -2.400_758_277_161_84,
        -2.549_732_539_343_73,
        4.374_664_141_464_97,
        2.938_163_982_698_78,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_46e-3,
        0.322_467_129_070_04,
        2.445_134_137_143,
        3.754_408_661_907_42,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Shannon capacity `log2(1 + γ)` in bits per symbol, for linear SNR γ ≥ 0.
pub fn shannon_capacity(snr: f64) -> Result<f64, FblError> {
    if !(snr >= 0.0) {
        return Err(FblError::Domain("shannon_capacity requires snr >= 0"));
    }
    Ok((1.0 + snr).log2())
}

/// Channel dispersion factor `γ(γ+2)/(γ+1)²`.
fn dispersion(snr: f64) -> f64 {
    snr * (snr + 2.0) / ((snr + 1.0) * (snr + 1.0))
}

/// A finite-blocklength rate value.
///
/// The raw three-term approximation can turn negative at small blocklength,
/// low SNR and tiny target error; such values are clamped to zero and
/// `clamped` is set. A clamped rate makes any allocation built on it
/// infeasible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FblRate {
    /// Achievable rate in bits per channel use (non-negative).
    pub bits_per_use: f64,
    /// True when the raw approximation was negative and reported as zero.
    pub clamped: bool,
}

/// One self-consistent operating point of the rate model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    /// Blocklength in symbols (positive real).
    pub blocklength: f64,
    /// Linear SNR (or SINR).
    pub snr: f64,
    /// Block error probability in (0, 1).
    pub error: f64,
    /// Rate in bits per channel use (non-negative).
    pub rate: f64,
}

impl RatePoint {
    /// Builds the point from a target error, computing the rate.
    pub fn from_target_error(blocklength: f64, snr: f64, error: f64) -> Result<Self, FblError> {
        let r = fbl_rate(blocklength, snr, error)?;
        Ok(RatePoint { blocklength, snr, error, rate: r.bits_per_use })
    }

    /// Builds the point from a fixed rate, computing the error.
    pub fn from_rate(blocklength: f64, snr: f64, rate: f64) -> Result<Self, FblError> {
        let error = fbl_error(blocklength, snr, rate)?;
        Ok(RatePoint { blocklength, snr, error, rate })
    }
}

/// Raw (unclamped) normal-approximation rate. Callers must have validated
/// the domain.
fn raw_rate(m: f64, snr: f64, q_inv_eps: f64) -> f64 {
    (1.0 + snr).log2() - LOG2_E * (dispersion(snr) / m).sqrt() * q_inv_eps + m.log2() / m
}

/// Finite-blocklength achievable rate in bits per channel use.
///
/// Requires `m >= 1`, `snr > 0`, `0 < error < 1`. Negative raw values are
/// clamped to zero with [`FblRate::clamped`] set.
pub fn fbl_rate(m: f64, snr: f64, error: f64) -> Result<FblRate, FblError> {
    if !(m >= 1.0) {
        return Err(FblError::Domain("fbl_rate requires m >= 1"));
    }
    if !(snr > 0.0) {
        return Err(FblError::Domain("fbl_rate requires snr > 0"));
    }
    if !(error > 0.0 && error < 1.0) {
        return Err(FblError::Domain("fbl_rate requires 0 < error < 1"));
    }
    let raw = raw_rate(m, snr, inv_q(error)?);
    if raw < 0.0 {
        Ok(FblRate { bits_per_use: 0.0, clamped: true })
    } else {
        Ok(FblRate { bits_per_use: raw, clamped: false })
    }
}

/// Block error probability at a fixed coding rate:
///
/// ```text
/// ε = Q( (log2(1+γ) − r + log2(m)/m) / (log2(e) · sqrt(γ(γ+2)/((γ+1)² m))) )
/// ```
///
/// Requires `m >= 1`, `snr > 0`, `rate >= 0`.
pub fn fbl_error(m: f64, snr: f64, rate: f64) -> Result<f64, FblError> {
    if !(m >= 1.0) {
        return Err(FblError::Domain("fbl_error requires m >= 1"));
    }
    if !(snr > 0.0) {
        return Err(FblError::Domain("fbl_error requires snr > 0"));
    }
    if !(rate >= 0.0) {
        return Err(FblError::Domain("fbl_error requires rate >= 0"));
    }
    let num = (1.0 + snr).log2() - rate + m.log2() / m;
    let den = LOG2_E * (dispersion(snr) / m).sqrt();
    Ok(q_function(num / den))
}

/// SNR below which the raw rate decreases in γ (the dispersion term grows
/// faster than capacity). Solves `(γ+1)·sqrt(γ(γ+2)·m) = Q⁻¹(ε)` in closed
/// form; zero when `Q⁻¹(ε) <= 0` (ε ≥ 0.5).
fn increasing_branch_start(m: f64, q_inv_eps: f64) -> f64 {
    if q_inv_eps <= 0.0 {
        return 0.0;
    }
    // (γ+1)²·((γ+1)²−1) = q²/m, quadratic in w = (γ+1)².
    let rhs = q_inv_eps * q_inv_eps / m;
    let w = 0.5 * (1.0 + (1.0 + 4.0 * rhs).sqrt());
    (w.sqrt() - 1.0).max(0.0)
}

/// Finds the linear SNR at which a rate `rate` is achievable with error
/// `error` at blocklength `m`, i.e. solves `fbl_error(m, γ, rate) = error`
/// on the physically meaningful (rate-increasing) branch.
///
/// Uses bracketed bisection on the monotone branch. Errors with
/// [`FblError::InfeasibleRate`] when no γ below `DEFAULT_SNR_CAP` reaches
/// the rate, and with [`FblError::RateBelowFloor`] when the approximation
/// already exceeds the rate as γ → 0 (callers treat that as γ = 0).
pub fn invert_snr_for_error(m: f64, error: f64, rate: f64) -> Result<f64, FblError> {
    invert_snr_in(m, error, rate, None, DEFAULT_SNR_CAP)
}

/// As [`invert_snr_for_error`] with an explicit SNR cap.
pub fn invert_snr_capped(m: f64, error: f64, rate: f64, snr_cap: f64) -> Result<f64, FblError> {
    invert_snr_in(m, error, rate, None, snr_cap)
}

/// As [`invert_snr_for_error`] with an explicit lower SNR bound and cap.
///
/// With `floor = Some(γ₀)` the search never evaluates the rate model below
/// γ₀; if the target rate is already met at γ₀ the root lies below the
/// bound and `Ok(None)` is returned so the caller can apply its own
/// boundary semantics.
pub fn invert_snr_at_least(
    m: f64,
    error: f64,
    rate: f64,
    floor: f64,
    snr_cap: f64,
) -> Result<Option<f64>, FblError> {
    match invert_snr_in(m, error, rate, Some(floor), snr_cap) {
        Ok(g) => Ok(Some(g)),
        Err(FblError::RateBelowFloor { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn invert_snr_in(
    m: f64,
    error: f64,
    rate: f64,
    floor: Option<f64>,
    snr_cap: f64,
) -> Result<f64, FblError> {
    if !(m >= 1.0) {
        return Err(FblError::Domain("invert_snr_for_error requires m >= 1"));
    }
    if !(error > 0.0 && error < 1.0) {
        return Err(FblError::Domain("invert_snr_for_error requires 0 < error < 1"));
    }
    if !(rate > 0.0) {
        return Err(FblError::Domain("invert_snr_for_error requires rate > 0"));
    }
    let q = inv_q(error)?;
    let lo = match floor {
        Some(f) => f.max(1e-12),
        None => increasing_branch_start(m, q).max(1e-12),
    };
    let rate_at = |g: f64| raw_rate(m, g, q);
    let f_lo = rate_at(lo) - rate;
    if f_lo >= 0.0 {
        return Err(FblError::RateBelowFloor { rate, floor: rate_at(lo) });
    }
    let mut hi = (2.0 * lo).max(1.0);
    while rate_at(hi) < rate {
        hi *= 4.0;
        if hi > snr_cap {
            return Err(FblError::InfeasibleRate { rate, snr_cap });
        }
    }
    bisect_root(|g| rate_at(g) - rate, lo, hi.min(snr_cap), INVERT_REL_TOL, INVERT_MAX_ITER)
        .map_err(|e| match e {
            RootError::NoBracket { .. } => FblError::InfeasibleRate { rate, snr_cap },
            RootError::MaxIterations(_) => FblError::Domain("snr inversion did not converge"),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent quadrature oracle for the Gaussian tail: composite
    /// Simpson over [x, x+12], where the remaining tail is below 1e-31.
    fn q_oracle(x: f64) -> f64 {
        let (a, b) = (x, x + 12.0);
        let n = 48_000usize; // even
        let h = (b - a) / n as f64;
        let mut acc = gaussian_pdf(a) + gaussian_pdf(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * gaussian_pdf(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn q_at_zero_is_half() {
        assert_eq!(q_function(0.0), 0.5);
    }

    #[test]
    fn q_matches_quadrature_oracle() {
        // 0.158655... frozen from 50-digit evaluation of the tail integral.
        assert!(rel(q_function(1.0), 0.158_655_253_931_457_05) < 1e-13);
        for &x in &[0.0, 0.5, 1.0, 2.0, 2.3263, 3.0, 4.0, 5.9978] {
            assert!(rel(q_function(x), q_oracle(x)) < 1e-9, "x={x}");
        }
    }

    #[test]
    fn q_near_paper_anchor() {
        // Q(2.3263) ≈ 1e-2: the anchor behind the (2.3263, 5.9978) interval.
        assert!(rel(q_function(2.3263), 1.000_127_601_679_860_8e-2) < 1e-12);
    }

    #[test]
    fn q_strictly_decreasing() {
        let xs: Vec<f64> = (0..200).map(|i| -6.0 + i as f64 * 0.06).collect();
        for w in xs.windows(2) {
            assert!(q_function(w[1]) < q_function(w[0]));
        }
    }

    #[test]
    fn inv_q_anchors() {
        assert_eq!(inv_q(0.5).unwrap(), 0.0);
        assert!(rel(inv_q(1e-2).unwrap(), 2.326_347_874_040_841_1) < 1e-12);
        assert!(rel(inv_q(1e-9).unwrap(), 5.997_807_015_007_686_9) < 1e-12);
    }

    #[test]
    fn inv_q_roundtrip_log_spaced() {
        // 1e-9 .. 0.5, log-spaced.
        let n = 60;
        for i in 0..=n {
            let p = 10f64.powf(-9.0 + 8.698_970_004_336_019 * i as f64 / n as f64);
            let x = inv_q(p).unwrap();
            assert!(rel(q_function(x), p) < 1e-10, "p={p}");
        }
    }

    #[test]
    fn inv_q_rejects_out_of_range() {
        assert!(inv_q(0.0).is_err());
        assert!(inv_q(1.0).is_err());
        assert!(inv_q(-0.1).is_err());
        assert!(inv_q(f64::NAN).is_err());
    }

    #[test]
    fn capacity_basics() {
        assert_eq!(shannon_capacity(0.0).unwrap(), 0.0);
        assert_eq!(shannon_capacity(1.0).unwrap(), 1.0);
        assert!(rel(shannon_capacity(10.0).unwrap(), 3.459_431_618_637_297_3) < 1e-15);
        assert!(shannon_capacity(-0.5).is_err());
    }

    #[test]
    fn rate_at_half_error_drops_dispersion() {
        // Q⁻¹(0.5) = 0 kills the dispersion term.
        for &g in &[0.3, 1.0, 10.0, 500.0] {
            let r = fbl_rate(400.0, g, 0.5).unwrap();
            let want = (1.0 + g).log2() + 400f64.log2() / 400.0;
            assert!(rel(r.bits_per_use, want) < 1e-14, "g={g}");
            assert!(!r.clamped);
        }
    }

    #[test]
    fn rate_approaches_capacity_at_large_blocklength() {
        let c = shannon_capacity(10.0).unwrap();
        let r = fbl_rate(1e12, 10.0, 1e-3).unwrap().bits_per_use;
        assert!((c - r).abs() < 1e-5);
        assert!(r < c);
    }

    #[test]
    fn rate_golden_value() {
        // Frozen from 50-digit evaluation of the three-term formula.
        let r = fbl_rate(400.0, 10.0, 1e-3).unwrap();
        assert!(rel(r.bits_per_use, 3.259_051_157_692_660_0) < 1e-12);
        assert!(!r.clamped);
    }

    #[test]
    fn rate_clamps_negative_raw_values() {
        // Small m, low SNR, tiny ε drive the raw approximation negative.
        let r = fbl_rate(84.0, 0.2, 1e-9).unwrap();
        assert_eq!(r.bits_per_use, 0.0);
        assert!(r.clamped);
    }

    #[test]
    fn error_at_zero_margin_is_half() {
        for &(m, g) in &[(84.0f64, 2.0f64), (400.0, 10.0)] {
            let r = (1.0 + g).log2() + m.log2() / m;
            assert!(rel(fbl_error(m, g, r).unwrap(), 0.5) < 1e-12);
        }
    }

    #[test]
    fn error_golden_value() {
        assert!(rel(fbl_error(84.0, 2.0, 1.0).unwrap(), 4.207_607_360_243_909_5e-6) < 1e-11);
    }

    #[test]
    fn rate_error_inverse_pair() {
        let eps = 1e-3;
        let r = fbl_rate(400.0, 10.0, eps).unwrap().bits_per_use;
        assert!(rel(fbl_error(400.0, 10.0, r).unwrap(), eps) < 1e-10);
    }

    #[test]
    fn invert_snr_roundtrip() {
        let r = fbl_rate(400.0, 5.0, 1e-3).unwrap().bits_per_use;
        let g = invert_snr_for_error(400.0, 1e-3, r).unwrap();
        assert!(rel(g, 5.0) < 1e-9);
    }

    #[test]
    fn invert_snr_half_error_matches_capacity_inverse() {
        // ε = 0.5: log2(1+γ) = r − log2(m)/m exactly.
        let m = 400.0;
        let c = 3.0;
        let g = invert_snr_for_error(m, 0.5, c).unwrap();
        let want = 2f64.powf(c - m.log2() / m) - 1.0;
        assert!(rel(g, want) < 1e-9);
    }

    #[test]
    fn invert_snr_golden_value() {
        // Frozen from 1e-12-tolerance bisection at 50-digit precision.
        let g = invert_snr_for_error(400.0, 1e-3, 2.0).unwrap();
        assert!(rel(g, 3.581_847_947_797_158_7) < 1e-10);
        assert!(rel(fbl_error(400.0, g, 2.0).unwrap(), 1e-3) < 1e-9);
    }

    #[test]
    fn invert_snr_infeasible_above_cap() {
        let e = invert_snr_for_error(84.0, 1e-3, 50.0);
        assert!(matches!(e, Err(FblError::InfeasibleRate { .. })));
    }

    #[test]
    fn invert_snr_reports_floor_rates() {
        // Below the log2(m)/m floor no γ solves the equation.
        let e = invert_snr_for_error(400.0, 1e-3, 1e-4);
        assert!(matches!(e, Err(FblError::RateBelowFloor { .. })));
    }

    #[test]
    fn invert_snr_floored_variant() {
        // Root above the floor: found. Root below: reported as None.
        let r = fbl_rate(200.0, 7.0, 1e-3).unwrap().bits_per_use;
        let g = invert_snr_at_least(200.0, 1e-3, r, 1.0, DEFAULT_SNR_CAP).unwrap();
        assert!(rel(g.unwrap(), 7.0) < 1e-9);
        let low = fbl_rate(200.0, 0.5, 1e-3).unwrap().bits_per_use;
        let g = invert_snr_at_least(200.0, 1e-3, low, 1.0, DEFAULT_SNR_CAP).unwrap();
        assert!(g.is_none());
    }

    #[test]
    fn rate_point_constructors_are_consistent() {
        let p = RatePoint::from_target_error(400.0, 10.0, 1e-3).unwrap();
        let q = RatePoint::from_rate(400.0, 10.0, p.rate).unwrap();
        assert!(rel(q.error, 1e-3) < 1e-10);
    }

    #[test]
    fn monotone_in_snr_and_blocklength_on_practical_domain() {
        // Prop-3 style finite differences on a coarse grid.
        for &m in &[84.0, 200.0, 1000.0] {
            for &g in &[1.0, 5.0, 100.0] {
                for &e in &[1e-9, 1e-3, 1e-1] {
                    let r0 = fbl_rate(m, g, e).unwrap().bits_per_use;
                    assert!(fbl_rate(m, g * 1.01, e).unwrap().bits_per_use > r0);
                    assert!(fbl_rate(m * 1.01, g, e).unwrap().bits_per_use > r0);
                }
            }
        }
    }
}
