//! Forward throughput models: given powers and phase blocklengths, the UAV
//! and GU throughputs for each (scheme, regime) pair.
//!
//! NOMA superposes both signals over the whole frame; the UAV cancels the
//! GU's signal (SIC) before decoding its own, so in the FBL regime the SIC
//! error and the UAV's own decoding error share the ν₁ reliability budget.
//! Relaying splits the frame: the AP sends a combined packet to the UAV in
//! phase one (m1 symbols) and the UAV forwards the GU's part in phase two,
//! so the UAV's net throughput is the first-hop throughput minus the GU's.

use serde::{Deserialize, Serialize};

use crate::channel::LinkBudget;
use crate::fbl::{self, FblError};

/// Transmission scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Noma,
    Relay,
}

/// Blocklength regime selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Ibl,
    Fbl,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Noma => "noma",
            Scheme::Relay => "relay",
        })
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Ibl => "ibl",
            Regime::Fbl => "fbl",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "noma" => Ok(Scheme::Noma),
            "relay" => Ok(Scheme::Relay),
            other => Err(format!("unknown scheme `{other}` (expected noma|relay)")),
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ibl" => Ok(Regime::Ibl),
            "fbl" => Ok(Regime::Fbl),
            other => Err(format!("unknown regime `{other}` (expected ibl|fbl)")),
        }
    }
}

/// All four (scheme, regime) combinations, in fixed report order.
pub const ALL_SCHEME_REGIMES: [(Scheme, Regime); 4] = [
    (Scheme::Noma, Regime::Ibl),
    (Scheme::Noma, Regime::Fbl),
    (Scheme::Relay, Regime::Ibl),
    (Scheme::Relay, Regime::Fbl),
];

/// End-to-end error-probability targets for the UAV (ν₁) and GU (ν₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityTargets {
    pub nu1: f64,
    pub nu2: f64,
}

impl ReliabilityTargets {
    pub fn new(nu1: f64, nu2: f64) -> Result<Self, String> {
        if !(nu1 > 0.0 && nu1 < 1.0) {
            return Err("nu1 must lie in (0, 1)".into());
        }
        if !(nu2 > 0.0 && nu2 < 1.0) {
            return Err("nu2 must lie in (0, 1)".into());
        }
        Ok(ReliabilityTargets { nu1, nu2 })
    }

    /// Per-hop GU decoding target under relaying: `1 − (1−ν₂)/(1−ν₁)`.
    /// Positive only when ν₁ < ν₂.
    pub fn relay_gu_target(&self) -> f64 {
        1.0 - (1.0 - self.nu2) / (1.0 - self.nu1)
    }
}

/// One resource split: per-symbol powers and phase blocklengths.
/// NOMA uses `m1 = m2 = M`; relaying splits `m1 + m2 = M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Allocation {
    pub p1_w: f64,
    pub p2_w: f64,
    pub m1: f64,
    pub m2: f64,
}

/// Per-stage rates and error probabilities populated by every model; the
/// CSV output and the acceptance checks read these.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    /// Coding rate of the UAV's data (NOMA) or the first hop (relaying).
    pub r1: Option<f64>,
    /// Coding rate of the GU's data (NOMA) or the second hop (relaying).
    pub r2: Option<f64>,
    /// SIC error probability at the UAV (NOMA FBL).
    pub eps_sic: Option<f64>,
    /// UAV own-data decoding target after the SIC budget (NOMA FBL).
    pub eps_n1_star: Option<f64>,
    /// GU decoding target in phase two (relaying FBL).
    pub eps_r2_star: Option<f64>,
    /// First-hop throughput in bits (relaying): uav + gu sums to this.
    pub first_hop_bits: Option<f64>,
    /// True when any underlying rate was clamped at zero.
    pub rate_clamped: bool,
}

/// UAV and GU throughputs in bits per frame.
///
/// `uav_bits` may be negative under relaying (the first hop cannot cover
/// the GU's share); such pairs are flagged infeasible rather than clamped
/// so solvers can use the sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputPair {
    pub uav_bits: f64,
    pub gu_bits: f64,
    pub diag: Diagnostics,
}

impl ThroughputPair {
    /// A pair is usable only if the UAV throughput is non-negative and no
    /// rate was clamped.
    pub fn flagged_infeasible(&self) -> bool {
        self.uav_bits < 0.0 || self.diag.rate_clamped
    }
}

/// Model-level failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemeError {
    /// SIC ordering invalid: requires g1 > g2.
    #[error("SIC ordering requires g1 > g2 (g1 = {g1:.3e}, g2 = {g2:.3e})")]
    SicOrdering { g1: f64, g2: f64 },
    /// The SIC error alone exceeds the UAV reliability budget.
    #[error("SIC error {eps_sic:.3e} exhausts the UAV reliability budget nu1 = {nu1:.3e}")]
    SicBudgetExhausted { eps_sic: f64, nu1: f64 },
    /// Relaying FBL requires nu1 < nu2.
    #[error("relaying FBL requires nu1 < nu2 (nu1 = {nu1:.3e}, nu2 = {nu2:.3e})")]
    ReliabilityOrdering { nu1: f64, nu2: f64 },
    #[error("scheme domain error: {0}")]
    Domain(&'static str),
    #[error(transparent)]
    Fbl(#[from] FblError),
}

fn check_budget(b: &LinkBudget) -> Result<(), SchemeError> {
    if !(b.noise_w > 0.0) {
        return Err(SchemeError::Domain("noise power must be > 0"));
    }
    Ok(())
}

/// GU throughput when the AP serves it alone with the full budget `p0`:
/// the reference the guarantee `beta * mu0` is measured against.
///
/// IBL: `M log2(1 + p0 g2 / σ²)`. FBL: `M · R(M, p0 g2/σ², ν₂) · (1 − ν₂)`
/// (`nu2` required).
pub fn solo_throughput(
    regime: Regime,
    budget: &LinkBudget,
    m: f64,
    p0_w: f64,
    nu2: Option<f64>,
) -> Result<f64, SchemeError> {
    check_budget(budget)?;
    if !(p0_w >= 0.0) {
        return Err(SchemeError::Domain("p0 must be >= 0"));
    }
    let snr = p0_w * budget.g2 / budget.noise_w;
    match regime {
        Regime::Ibl => Ok(m * fbl::shannon_capacity(snr)?),
        Regime::Fbl => {
            let nu2 = nu2.ok_or(SchemeError::Domain("solo FBL throughput requires nu2"))?;
            if !(nu2 > 0.0 && nu2 < 1.0) {
                return Err(SchemeError::Domain("nu2 must lie in (0, 1)"));
            }
            if snr == 0.0 {
                return Ok(0.0);
            }
            Ok(m * fbl::fbl_rate(m, snr, nu2)?.bits_per_use * (1.0 - nu2))
        }
    }
}

fn check_noma_inputs(budget: &LinkBudget, p1: f64, p2: f64) -> Result<(), SchemeError> {
    check_budget(budget)?;
    if !(p1 > 0.0 && p2 > 0.0) {
        return Err(SchemeError::Domain("NOMA powers must be > 0"));
    }
    // The fractional SIC condition p2G1/(p1G1+σ²) > p2G2/(p1G2+σ²) reduces
    // to σ²(G1 − G2) > 0.
    if !(budget.g1 > budget.g2) {
        return Err(SchemeError::SicOrdering { g1: budget.g1, g2: budget.g2 });
    }
    Ok(())
}

/// NOMA throughputs in the IBL regime:
/// `uav = M log2(1 + p1 g1/σ²)`, `gu = M log2(1 + p2 g2 / (p1 g2 + σ²))`.
pub fn noma_throughputs_ibl(
    budget: &LinkBudget,
    m: f64,
    p1: f64,
    p2: f64,
) -> Result<ThroughputPair, SchemeError> {
    check_noma_inputs(budget, p1, p2)?;
    let snr_uav = p1 * budget.g1 / budget.noise_w;
    let sinr_gu = p2 * budget.g2 / (p1 * budget.g2 + budget.noise_w);
    let r1 = fbl::shannon_capacity(snr_uav)?;
    let r2 = fbl::shannon_capacity(sinr_gu)?;
    Ok(ThroughputPair {
        uav_bits: m * r1,
        gu_bits: m * r2,
        diag: Diagnostics { r1: Some(r1), r2: Some(r2), ..Diagnostics::default() },
    })
}

/// NOMA throughputs in the FBL regime.
///
/// The GU decodes at rate `r2 = R(M, p2 g2/(p1 g2 + σ²), ν₂)`. The UAV
/// first cancels the GU signal (error `ε_SIC = P(M, p2 g1/(p1 g1+σ²), r2)`),
/// then decodes its own data at the residual budget
/// `ε₁* = 1 − (1−ν₁)/(1−ε_SIC)`, so the two stages compose exactly to ν₁
/// and `uav = M · r1 · (1 − ν₁)`.
pub fn noma_throughputs_fbl(
    budget: &LinkBudget,
    m: f64,
    p1: f64,
    p2: f64,
    targets: &ReliabilityTargets,
) -> Result<ThroughputPair, SchemeError> {
    check_noma_inputs(budget, p1, p2)?;
    let sinr_gu = p2 * budget.g2 / (p1 * budget.g2 + budget.noise_w);
    let r2 = fbl::fbl_rate(m, sinr_gu, targets.nu2)?;
    let gu_bits = m * r2.bits_per_use * (1.0 - targets.nu2);

    let sinr_sic = p2 * budget.g1 / (p1 * budget.g1 + budget.noise_w);
    let eps_sic = fbl::fbl_error(m, sinr_sic, r2.bits_per_use)?;
    if eps_sic >= targets.nu1 {
        return Err(SchemeError::SicBudgetExhausted { eps_sic, nu1: targets.nu1 });
    }
    let eps_n1_star = 1.0 - (1.0 - targets.nu1) / (1.0 - eps_sic);
    let r1 = fbl::fbl_rate(m, p1 * budget.g1 / budget.noise_w, eps_n1_star)?;
    Ok(ThroughputPair {
        uav_bits: m * r1.bits_per_use * (1.0 - targets.nu1),
        gu_bits,
        diag: Diagnostics {
            r1: Some(r1.bits_per_use),
            r2: Some(r2.bits_per_use),
            eps_sic: Some(eps_sic),
            eps_n1_star: Some(eps_n1_star),
            rate_clamped: r1.clamped || r2.clamped,
            ..Diagnostics::default()
        },
    })
}

fn check_relay_inputs(budget: &LinkBudget, m: f64, m1: f64, p1: f64, p2: f64) -> Result<(), SchemeError> {
    check_budget(budget)?;
    if !(m1 > 0.0 && m1 <= m) {
        return Err(SchemeError::Domain("relaying requires 0 < m1 <= M"));
    }
    if !(p1 > 0.0) {
        return Err(SchemeError::Domain("first-hop power must be > 0"));
    }
    if !(p2 >= 0.0) {
        return Err(SchemeError::Domain("second-hop power must be >= 0"));
    }
    Ok(())
}

/// Relaying throughputs in the IBL regime:
/// `gu = (M−m1) log2(1 + p2 g3/σ²)`,
/// `uav = m1 log2(1 + p1 g1/σ²) − gu` (negative values flag infeasibility).
pub fn relay_throughputs_ibl(
    budget: &LinkBudget,
    m: f64,
    m1: f64,
    p1: f64,
    p2: f64,
) -> Result<ThroughputPair, SchemeError> {
    check_relay_inputs(budget, m, m1, p1, p2)?;
    let m2 = m - m1;
    let r1 = fbl::shannon_capacity(p1 * budget.g1 / budget.noise_w)?;
    let r2 = fbl::shannon_capacity(p2 * budget.g3 / budget.noise_w)?;
    let first_hop = m1 * r1;
    let gu_bits = m2 * r2;
    Ok(ThroughputPair {
        uav_bits: first_hop - gu_bits,
        gu_bits,
        diag: Diagnostics {
            r1: Some(r1),
            r2: Some(r2),
            first_hop_bits: Some(first_hop),
            ..Diagnostics::default()
        },
    })
}

/// Relaying throughputs in the FBL regime.
///
/// The combined first-hop packet carries both users' data at the UAV target
/// ν₁; phase two delivers the GU's part at `ε₂* = 1 − (1−ν₂)/(1−ν₁)` so the
/// two hops compose to ν₂. Requires ν₁ < ν₂ and both phase blocklengths in
/// the rate model's domain.
pub fn relay_throughputs_fbl(
    budget: &LinkBudget,
    m: f64,
    m1: f64,
    p1: f64,
    p2: f64,
    targets: &ReliabilityTargets,
) -> Result<ThroughputPair, SchemeError> {
    check_relay_inputs(budget, m, m1, p1, p2)?;
    if !(targets.nu1 < targets.nu2) {
        return Err(SchemeError::ReliabilityOrdering { nu1: targets.nu1, nu2: targets.nu2 });
    }
    let m2 = m - m1;
    let eps_r2_star = targets.relay_gu_target();
    let r1 = fbl::fbl_rate(m1, p1 * budget.g1 / budget.noise_w, targets.nu1)?;
    let first_hop = m1 * r1.bits_per_use * (1.0 - targets.nu1);
    let (gu_bits, r2, r2_clamped) = if m2 == 0.0 || p2 == 0.0 {
        (0.0, None, false)
    } else {
        let r2 = fbl::fbl_rate(m2, p2 * budget.g3 / budget.noise_w, eps_r2_star)?;
        (m2 * r2.bits_per_use * (1.0 - targets.nu2), Some(r2.bits_per_use), r2.clamped)
    };
    Ok(ThroughputPair {
        uav_bits: first_hop - gu_bits,
        gu_bits,
        diag: Diagnostics {
            r1: Some(r1.bits_per_use),
            r2,
            eps_r2_star: Some(eps_r2_star),
            first_hop_bits: Some(first_hop),
            rate_clamped: r1.clamped || r2_clamped,
            ..Diagnostics::default()
        },
    })
}
