//! Parameter sweeps, the relaying IBL-vs-FBL ablation, and the CSV table
//! format.
//!
//! CSV contract: UTF-8, comma-separated, one header row, LF line endings,
//! numeric cells in scientific notation with 12 significant digits. Powers
//! cross this boundary in dBm; an exactly-zero power (no second phase) is
//! an empty cell since 0 W has no dBm representation. Output is
//! byte-identical for identical inputs: rows follow input order, never
//! completion order.

use crate::channel::build_link_budget;
use crate::montecarlo::{self, MonteCarloReport};
use crate::scenario::{watts_to_dbm, ConfigError, ScenarioConfig};
use crate::schemes::{Regime, Scheme, ALL_SCHEME_REGIMES};
use crate::solvers::{self, AllocationResult, SolveError};

/// Sweepable scenario parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Beta,
    GuDistance,
    FrameLength,
    Nu2,
    UavGroundDistance,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Beta => "beta",
            SweepParam::GuDistance => "gu_distance",
            SweepParam::FrameLength => "frame_length",
            SweepParam::Nu2 => "nu2",
            SweepParam::UavGroundDistance => "uav_ground_distance",
        }
    }

    /// Returns the scenario with this parameter set to `value`. Distances
    /// move the node along its current ground azimuth (defaulting to +x).
    pub fn apply(&self, cfg: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut out = cfg.clone();
        match self {
            SweepParam::Beta => out.beta = value,
            SweepParam::FrameLength => out.frame_length = value,
            SweepParam::Nu2 => out.nu2 = Some(value),
            SweepParam::GuDistance => {
                let (x, y) = ground_direction(cfg.gu_pos.x, cfg.gu_pos.y);
                out.gu_pos.x = value * x;
                out.gu_pos.y = value * y;
            }
            SweepParam::UavGroundDistance => {
                let (x, y) = ground_direction(cfg.uav_pos.x, cfg.uav_pos.y);
                out.uav_pos.x = value * x;
                out.uav_pos.y = value * y;
            }
        }
        out
    }
}

fn ground_direction(x: f64, y: f64) -> (f64, f64) {
    let norm = (x * x + y * y).sqrt();
    if norm > 0.0 {
        (x / norm, y / norm)
    } else {
        (1.0, 0.0)
    }
}

impl std::str::FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "beta" => SweepParam::Beta,
            "gu_distance" => SweepParam::GuDistance,
            "frame_length" => SweepParam::FrameLength,
            "nu2" => SweepParam::Nu2,
            "uav_ground_distance" => SweepParam::UavGroundDistance,
            other => {
                return Err(format!(
                    "unknown sweep parameter `{other}` (expected beta|gu_distance|frame_length|nu2|uav_ground_distance)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Campaign(#[from] montecarlo::CampaignError),
}

/// One evaluated point of a sweep table.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub swept_name: &'static str,
    pub swept_value: f64,
    pub scheme: Scheme,
    pub regime: Regime,
    pub p1_w: Option<f64>,
    pub p2_w: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub uav_bits: Option<f64>,
    pub gu_bits: Option<f64>,
    pub feasible: bool,
    /// For deterministic rows: 0 when feasible, 1 when not. For campaign
    /// rows: the estimated outage probability.
    pub outage: f64,
    pub seed: Option<u64>,
}

impl SweepRow {
    fn from_result(name: &'static str, value: f64, r: &AllocationResult) -> Self {
        let ok = r.feasible && r.uav_bits() >= 0.0;
        SweepRow {
            swept_name: name,
            swept_value: value,
            scheme: r.scheme,
            regime: r.regime,
            p1_w: r.allocation.map(|a| a.p1_w),
            p2_w: r.allocation.map(|a| a.p2_w),
            m1: r.allocation.map(|a| a.m1),
            m2: r.allocation.map(|a| a.m2),
            uav_bits: r.throughputs.map(|t| t.uav_bits),
            gu_bits: r.throughputs.map(|t| t.gu_bits),
            feasible: ok,
            outage: if ok { 0.0 } else { 1.0 },
            seed: None,
        }
    }

    fn unsolvable(name: &'static str, value: f64, scheme: Scheme, regime: Regime) -> Self {
        SweepRow {
            swept_name: name,
            swept_value: value,
            scheme,
            regime,
            p1_w: None,
            p2_w: None,
            m1: None,
            m2: None,
            uav_bits: None,
            gu_bits: None,
            feasible: false,
            outage: 1.0,
            seed: None,
        }
    }

    fn from_report(
        name: &'static str,
        value: f64,
        scheme: Scheme,
        regime: Regime,
        rep: &MonteCarloReport,
    ) -> Self {
        SweepRow {
            swept_name: name,
            swept_value: value,
            scheme,
            regime,
            p1_w: None,
            p2_w: None,
            m1: None,
            m2: None,
            uav_bits: (rep.feasible_trials > 0).then_some(rep.mean_uav_bits),
            gu_bits: (rep.feasible_trials > 0).then_some(rep.mean_gu_bits),
            feasible: rep.feasible_trials > 0,
            outage: rep.outage_probability,
            seed: Some(rep.seed),
        }
    }
}

/// The fading draw deterministic commands evaluate at: the unit override,
/// or an explicitly pinned realization from the config.
pub fn deterministic_fading(cfg: &ScenarioConfig) -> [f64; 3] {
    if cfg.fading.unit {
        [1.0, 1.0, 1.0]
    } else {
        cfg.fading.fixed.unwrap_or([1.0, 1.0, 1.0])
    }
}

/// Solves the configured scenario once on its deterministic link budget.
pub fn solve_scenario(
    cfg: &ScenarioConfig,
    scheme: Scheme,
    regime: Regime,
) -> Result<Result<AllocationResult, SolveError>, ConfigError> {
    cfg.validate()?;
    let targets = match regime {
        Regime::Fbl => Some(cfg.fbl_targets()?),
        Regime::Ibl => None,
    };
    let budget = build_link_budget(cfg, deterministic_fading(cfg))
        .map_err(|e| ConfigError::new("<channel>", e.to_string()))?;
    Ok(solvers::solve(
        scheme,
        regime,
        &budget,
        cfg.frame_length,
        cfg.p0_watts(),
        cfg.beta,
        targets.as_ref(),
        &cfg.solver.to_options(),
    ))
}

/// Evaluates a sweep: `steps` evenly spaced values from `from` to `to`
/// (inclusive), each solved deterministically for every (scheme, regime)
/// combination unless `restrict` narrows it.
pub fn run_sweep(
    cfg: &ScenarioConfig,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    restrict: Option<(Scheme, Option<Regime>)>,
) -> Result<Vec<SweepRow>, SweepError> {
    if steps == 0 {
        return Err(SweepError::Usage("sweep needs at least one step".into()));
    }
    let combos: Vec<(Scheme, Regime)> = match restrict {
        None => ALL_SCHEME_REGIMES.to_vec(),
        Some((s, None)) => ALL_SCHEME_REGIMES.iter().copied().filter(|(sc, _)| *sc == s).collect(),
        Some((s, Some(r))) => vec![(s, r)],
    };
    let mut rows = Vec::with_capacity(steps * combos.len());
    for i in 0..steps {
        let value = if steps == 1 {
            from
        } else {
            from + (to - from) * i as f64 / (steps - 1) as f64
        };
        let point = param.apply(cfg, value);
        point.validate()?;
        for &(scheme, regime) in &combos {
            if regime == Regime::Fbl {
                point.fbl_targets()?;
            }
            let row = match solve_scenario(&point, scheme, regime)? {
                Ok(r) => SweepRow::from_result(param.name(), value, &r),
                Err(_) => SweepRow::unsolvable(param.name(), value, scheme, regime),
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Campaign rows at the configured operating point: one per (scheme,
/// regime) combination unless restricted.
pub fn run_montecarlo_rows(
    cfg: &ScenarioConfig,
    trials: usize,
    seed: u64,
    restrict: Option<(Scheme, Option<Regime>)>,
) -> Result<Vec<SweepRow>, SweepError> {
    cfg.validate()?;
    let combos: Vec<(Scheme, Regime)> = match restrict {
        None => ALL_SCHEME_REGIMES.to_vec(),
        Some((s, None)) => ALL_SCHEME_REGIMES.iter().copied().filter(|(sc, _)| *sc == s).collect(),
        Some((s, Some(r))) => vec![(s, r)],
    };
    let mut rows = Vec::with_capacity(combos.len());
    for &(scheme, regime) in &combos {
        let rep = montecarlo::run_campaign(cfg, scheme, regime, cfg.beta, trials, seed)?;
        rows.push(SweepRow::from_report("beta", cfg.beta, scheme, regime, &rep));
    }
    Ok(rows)
}

/// One row of the relaying ablation: the IBL-optimal design, the
/// FBL-optimal design, and the FBL throughput when the phase split is
/// frozen at the IBL optimizer (power re-solved for the GU requirement).
#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub m_frame: f64,
    pub nu2: f64,
    pub uav_ibl_bits: Option<f64>,
    pub m1_ibl: Option<f64>,
    pub uav_fbl_bits: Option<f64>,
    pub m1_fbl: Option<f64>,
    /// None when the IBL split is not admissible under the FBL model (a
    /// flagged row).
    pub uav_fbl_at_ibl_m1_bits: Option<f64>,
    pub flagged: bool,
}

/// Computes the ablation at the configured scenario (relay scheme).
pub fn ablation_row(cfg: &ScenarioConfig) -> Result<AblationRow, SweepError> {
    cfg.validate()?;
    let targets = cfg.fbl_targets()?;
    let budget = build_link_budget(cfg, deterministic_fading(cfg))
        .map_err(|e| ConfigError::new("<channel>", e.to_string()))?;
    let m = cfg.frame_length;
    let p0 = cfg.p0_watts();
    let opts = cfg.solver.to_options();

    let ibl = solvers::solve_relay_ibl(&budget, m, p0, cfg.beta, &opts)
        .map_err(|e| ConfigError::new("<solver>", e.to_string()))?;
    let fbl = solvers::solve_relay_fbl(&budget, m, p0, cfg.beta, &targets, &opts)
        .map_err(|e| ConfigError::new("<solver>", e.to_string()))?;

    let ibl_ok = ibl.feasible && ibl.uav_bits() >= 0.0;
    let fbl_ok = fbl.feasible && fbl.uav_bits() >= 0.0;

    // Freeze the IBL split, re-run the FBL power step.
    let mut at_ibl = None;
    let mut flagged = !ibl_ok || !fbl_ok;
    if let (true, Some(a)) = (ibl_ok, ibl.allocation) {
        match solvers::relay_fbl_at_split(&budget, m, p0, cfg.beta, &targets, &opts, a.m1) {
            Some(uav) => at_ibl = Some(uav),
            None => flagged = true,
        }
    }
    Ok(AblationRow {
        m_frame: m,
        nu2: targets.nu2,
        uav_ibl_bits: ibl_ok.then(|| ibl.uav_bits()),
        m1_ibl: ibl.allocation.filter(|_| ibl_ok).map(|a| a.m1),
        uav_fbl_bits: fbl_ok.then(|| fbl.uav_bits()),
        m1_fbl: fbl.allocation.filter(|_| fbl_ok).map(|a| a.m1),
        uav_fbl_at_ibl_m1_bits: at_ibl,
        flagged,
    })
}

// ---------------------------------------------------------------------------
// CSV formatting
// ---------------------------------------------------------------------------

/// Scientific notation with 12 significant digits, the fixed numeric cell
/// format of every CSV this crate emits.
pub fn format_sci(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(format_sci).unwrap_or_default()
}

fn power_cell_dbm(p_w: Option<f64>) -> String {
    match p_w {
        Some(p) if p > 0.0 => format_sci(watts_to_dbm(p)),
        _ => String::new(),
    }
}

/// Renders sweep (or campaign) rows. With a configured symbol rate the
/// table gains derived bits-per-second columns.
pub fn sweep_csv(rows: &[SweepRow], frame_length: f64, symbol_rate_hz: Option<f64>) -> String {
    let mut out = String::new();
    out.push_str("swept_name,swept_value,scheme,regime,p1_dbm,p2_dbm,m1,m2,uav_bits,gu_bits,feasible,outage,seed");
    if symbol_rate_hz.is_some() {
        out.push_str(",uav_bps,gu_bps");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.swept_name,
            format_sci(r.swept_value),
            r.scheme,
            r.regime,
            power_cell_dbm(r.p1_w),
            power_cell_dbm(r.p2_w),
            opt_cell(r.m1),
            opt_cell(r.m2),
            opt_cell(r.uav_bits),
            opt_cell(r.gu_bits),
            r.feasible,
            format_sci(r.outage),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
        ));
        if let Some(rate) = symbol_rate_hz {
            let to_bps = |bits: Option<f64>| opt_cell(bits.map(|b| b * rate / frame_length));
            out.push_str(&format!(",{},{}", to_bps(r.uav_bits), to_bps(r.gu_bits)));
        }
        out.push('\n');
    }
    out
}

/// Renders ablation rows.
pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from(
        "m_frame,nu2,uav_ibl_bits,m1_ibl,uav_fbl_bits,m1_fbl,uav_fbl_at_ibl_m1_bits,flagged\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            format_sci(r.m_frame),
            format_sci(r.nu2),
            opt_cell(r.uav_ibl_bits),
            opt_cell(r.m1_ibl),
            opt_cell(r.uav_fbl_bits),
            opt_cell(r.m1_fbl),
            opt_cell(r.uav_fbl_at_ibl_m1_bits),
            r.flagged,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_sci_is_stable_and_12_digits() {
        assert_eq!(format_sci(2441.197115732215), "2.44119711573e3");
        assert_eq!(format_sci(0.0), "0.00000000000e0");
        assert_eq!(format_sci(-1e-11), "-1.00000000000e-11");
    }

    #[test]
    fn single_point_sweep_equals_solve() {
        let cfg = ScenarioConfig::default();
        let rows = run_sweep(
            &cfg,
            SweepParam::Beta,
            1.0,
            1.0,
            1,
            Some((Scheme::Relay, Some(Regime::Ibl))),
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
        let solve = solve_scenario(&cfg, Scheme::Relay, Regime::Ibl).unwrap().unwrap();
        assert_eq!(rows[0].uav_bits.unwrap(), solve.uav_bits());
        assert!(rows[0].feasible);
        assert_eq!(rows[0].outage, 0.0);
    }

    #[test]
    fn beta_sweep_reproduces_scheme_feasibility_ranges() {
        let cfg = ScenarioConfig::default();
        let rows = run_sweep(&cfg, SweepParam::Beta, 0.5, 2.0, 7, None).unwrap();
        assert_eq!(rows.len(), 28);
        for r in &rows {
            match (r.scheme, r.swept_value) {
                // NOMA cannot serve the UAV once beta exceeds one.
                (Scheme::Noma, b) if b > 1.0 => assert!(!r.feasible, "beta {b}"),
                (Scheme::Noma, b) if b < 1.0 => assert!(r.feasible, "beta {b}"),
                // Relaying stays feasible past one at this topology.
                (Scheme::Relay, b) if b <= 1.25 => assert!(r.feasible, "beta {b}"),
                _ => {}
            }
        }
    }

    #[test]
    fn sweep_csv_is_byte_stable() {
        let cfg = ScenarioConfig::default();
        let rows =
            run_sweep(&cfg, SweepParam::Beta, 0.5, 1.5, 3, Some((Scheme::Relay, None))).unwrap();
        let a = sweep_csv(&rows, cfg.frame_length, None);
        let rows2 =
            run_sweep(&cfg, SweepParam::Beta, 0.5, 1.5, 3, Some((Scheme::Relay, None))).unwrap();
        let b = sweep_csv(&rows2, cfg.frame_length, None);
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        assert!(!a.contains('\r'));
        assert!(a.starts_with("swept_name,"));
    }

    #[test]
    fn symbol_rate_adds_bps_columns() {
        let mut cfg = ScenarioConfig::default();
        cfg.symbol_rate_hz = Some(1e6);
        let rows = run_sweep(
            &cfg,
            SweepParam::Beta,
            1.0,
            1.0,
            1,
            Some((Scheme::Relay, Some(Regime::Ibl))),
        )
        .unwrap();
        let csv = sweep_csv(&rows, cfg.frame_length, cfg.symbol_rate_hz);
        assert!(csv.lines().next().unwrap().ends_with("uav_bps,gu_bps"));
        // bits/frame × symbols/s ÷ symbols/frame.
        let uav_bits = rows[0].uav_bits.unwrap();
        assert!(csv.contains(&format_sci(uav_bits * 1e6 / 400.0)));
    }

    #[test]
    fn ablation_orders_columns() {
        let cfg = ScenarioConfig::default();
        let row = ablation_row(&cfg).unwrap();
        assert!(!row.flagged);
        let fbl = row.uav_fbl_bits.unwrap();
        let at_ibl = row.uav_fbl_at_ibl_m1_bits.unwrap();
        assert!(fbl >= at_ibl, "fbl {fbl} < frozen-split {at_ibl}");
        // Frozen value matches the stand-alone evaluation to high accuracy.
        assert!((fbl - at_ibl) / fbl < 0.05);
    }

    #[test]
    fn ablation_columns_converge_at_large_frames() {
        // The regimes coincide asymptotically in the frame length.
        let cfg = SweepParam::FrameLength.apply(&ScenarioConfig::default(), 20_000.0);
        let row = ablation_row(&cfg).unwrap();
        let ibl = row.uav_ibl_bits.unwrap();
        let fbl = row.uav_fbl_bits.unwrap();
        let frozen = row.uav_fbl_at_ibl_m1_bits.unwrap();
        assert!((fbl - ibl).abs() / fbl < 0.01);
        assert!((fbl - frozen).abs() / fbl < 0.01);
    }

    #[test]
    fn distance_sweep_moves_the_gu() {
        let cfg = ScenarioConfig::default();
        let moved = SweepParam::GuDistance.apply(&cfg, 400.0);
        assert_eq!(moved.gu_pos.x, 400.0);
        assert_eq!(moved.gu_pos.y, 0.0);
        assert_eq!(moved.gu_pos.z, 0.0);
    }

    #[test]
    fn zero_steps_is_a_usage_error() {
        let cfg = ScenarioConfig::default();
        assert!(matches!(
            run_sweep(&cfg, SweepParam::Beta, 0.5, 2.0, 0, None),
            Err(SweepError::Usage(_))
        ));
    }
}
