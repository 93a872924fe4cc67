//! The self-check suite behind `uavalloc validate`: every module's key
//! invariants exercised at desk scale, each reported as a named pass/fail
//! line.

use rand::Rng;

use crate::channel::{build_link_budget, LinkBudget};
use crate::fbl;
use crate::montecarlo::{self, sample_fading, trial_rng, FadingSpec};
use crate::scenario::ScenarioConfig;
use crate::schemes::{Regime, ReliabilityTargets, Scheme};
use crate::solvers::{self, SolverOptions};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Options for the validation run.
#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Deliberately corrupts the inverse-Q anchor check to prove the suite
    /// reports failures by name (a self-test of the harness itself).
    pub negative_control: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// A randomized but physically sane scenario for solver campaigns: GU at
/// 300–800 m, UAV within a few hundred meters at 80–150 m altitude, budget
/// 0.8–2 W, frames of 250–800 symbols, GU reliability 3e-4 to 3e-3 with a
/// ten-times-stricter UAV target. These stay inside the region where the
/// GU equality is attainable within the validated FBL domain.
pub fn random_scenario<R: Rng>(rng: &mut R) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.gu_pos.x = rng.gen_range(300.0..800.0);
    cfg.uav_pos.x = rng.gen_range(50.0..300.0);
    cfg.uav_pos.z = rng.gen_range(80.0..150.0);
    cfg.p0_dbm = rng.gen_range(29.0..33.0);
    cfg.frame_length = rng.gen_range(250.0f64..800.0).round();
    let nu2 = 10f64.powf(rng.gen_range(-3.52..-2.52));
    cfg.nu2 = Some(nu2);
    cfg.nu1 = Some(nu2 / 10.0);
    cfg
}

/// The deterministic unit-fading budget of a scenario.
pub fn unit_budget(cfg: &ScenarioConfig) -> LinkBudget {
    build_link_budget(cfg, [1.0, 1.0, 1.0]).expect("valid scenario")
}

/// Runs the full suite. Order is fixed; each entry is independent.
pub fn run_all(opts: &ValidateOptions) -> Vec<CheckResult> {
    vec![
        check_inv_q_roundtrip(opts),
        check_rate_error_inverse_pair(),
        check_error_snr_inverse_pair(),
        check_rate_capacity_bound(),
        check_rate_monotone_on_validated_domain(),
        check_ibl_fbl_gap_shrinks(),
        check_los_probability_monotone(),
        check_path_loss_monotone(),
        check_uav_link_outranks_gu_link(),
        check_solver_equalities(),
        check_relay_ibl_concavity(),
        check_noma_beta_cap(),
        check_relay_win_win(),
        check_fbl_gu_power_savings(),
        check_fading_unit_mean(),
        check_solver_vs_oracle(),
        check_outage_monotone_in_beta(),
    ]
}

fn check_inv_q_roundtrip(opts: &ValidateOptions) -> CheckResult {
    let sabotage = if opts.negative_control { 1e-6 } else { 0.0 };
    let mut worst = 0.0f64;
    let n = 40;
    for i in 0..=n {
        let p = 10f64.powf(-9.0 + (9.0 - std::f64::consts::LOG10_2) * i as f64 / n as f64);
        let x = fbl::inv_q(p).unwrap() + sabotage;
        worst = worst.max(rel(fbl::q_function(x), p));
    }
    // The anchors behind the documented Q^{-1} interval.
    worst = worst.max(rel(fbl::inv_q(1e-2).unwrap() + sabotage, 2.326_347_874_040_841_1));
    worst = worst.max(rel(fbl::inv_q(1e-9).unwrap() + sabotage, 5.997_807_015_007_686_9));
    CheckResult {
        name: "inv-q-roundtrip",
        passed: worst <= 1e-9,
        detail: format!("worst relative error {worst:.3e} (tolerance 1e-9)"),
    }
}

fn check_rate_error_inverse_pair() -> CheckResult {
    let mut worst = 0.0f64;
    for &m in &[84.0, 200.0, 400.0, 1000.0] {
        for &g in &[1.0, 5.0, 10.0, 100.0] {
            for &e in &[1e-9, 1e-7, 1e-5, 1e-3, 1e-1] {
                let r = fbl::fbl_rate(m, g, e).unwrap();
                if r.clamped {
                    continue;
                }
                worst = worst.max(rel(fbl::fbl_error(m, g, r.bits_per_use).unwrap(), e));
            }
        }
    }
    CheckResult {
        name: "rate-error-inverse-pair",
        passed: worst <= 1e-6,
        detail: format!("worst relative error {worst:.3e} (tolerance 1e-6)"),
    }
}

fn check_error_snr_inverse_pair() -> CheckResult {
    let mut worst = 0.0f64;
    for &m in &[84.0, 400.0, 1000.0] {
        for &g in &[1.5, 5.0, 50.0] {
            for &e in &[1e-6, 1e-3, 1e-1] {
                let r = fbl::fbl_rate(m, g, e).unwrap();
                if r.clamped || r.bits_per_use == 0.0 {
                    continue;
                }
                let back = fbl::invert_snr_for_error(m, e, r.bits_per_use).unwrap();
                worst = worst.max(rel(back, g));
            }
        }
    }
    CheckResult {
        name: "error-snr-inverse-pair",
        passed: worst <= 1e-6,
        detail: format!("worst relative error {worst:.3e} (tolerance 1e-6)"),
    }
}

fn check_rate_capacity_bound() -> CheckResult {
    let mut ok = true;
    for &m in &[84.0, 400.0, 4000.0] {
        for &g in &[0.5, 2.0, 20.0, 500.0] {
            for &e in &[1e-9, 1e-4, 0.4] {
                let r = fbl::fbl_rate(m, g, e).unwrap().bits_per_use;
                let bound = fbl::shannon_capacity(g).unwrap() + m.log2() / m;
                ok &= r <= bound + 1e-12;
            }
        }
    }
    CheckResult {
        name: "rate-capacity-bound",
        passed: ok,
        detail: "rate <= capacity + log2(m)/m for error targets below 1/2".into(),
    }
}

fn check_rate_monotone_on_validated_domain() -> CheckResult {
    let mut ok = true;
    let ms = [84.0, 120.0, 200.0, 400.0, 1000.0, 4000.0];
    let gs = [1.0, 2.0, 5.0, 20.0, 100.0, 1000.0];
    let es = [1e-9, 1e-7, 1e-5, 1e-3, 1e-1];
    for &e in &es {
        for &g in &gs {
            for w in ms.windows(2) {
                ok &= fbl::fbl_rate(w[1], g, e).unwrap().bits_per_use
                    > fbl::fbl_rate(w[0], g, e).unwrap().bits_per_use;
            }
        }
        for &m in &ms {
            for w in gs.windows(2) {
                ok &= fbl::fbl_rate(m, w[1], e).unwrap().bits_per_use
                    > fbl::fbl_rate(m, w[0], e).unwrap().bits_per_use;
            }
        }
    }
    CheckResult {
        name: "rate-monotone-validated-domain",
        passed: ok,
        detail: "forward differences positive in m and snr on m>=84, e<=0.1, snr>=1".into(),
    }
}

fn check_ibl_fbl_gap_shrinks() -> CheckResult {
    let mut ok = true;
    let ms: Vec<f64> = (0..=24).map(|i| 84.0 * (10_000f64 / 84.0).powf(i as f64 / 24.0)).collect();
    for &g in &[1.0, 5.0, 20.0, 200.0] {
        let cap = fbl::shannon_capacity(g).unwrap();
        let mut prev = f64::INFINITY;
        for &m in &ms {
            let gap = cap - fbl::fbl_rate(m, g, 1e-4).unwrap().bits_per_use;
            ok &= gap > 0.0 && gap < prev;
            prev = gap;
        }
    }
    CheckResult {
        name: "ibl-fbl-gap-shrinks-with-blocklength",
        passed: ok,
        detail: "capacity minus rate at e=1e-4 positive, strictly decreasing in m".into(),
    }
}

fn check_los_probability_monotone() -> CheckResult {
    let mut ok = true;
    for &(a2, b2) in &[(9.61, 0.16), (4.88, 0.43), (27.23, 0.08)] {
        let mut prev = -1.0;
        for i in 1..=180 {
            let v = crate::channel::los_probability(i as f64 * 0.5, a2, b2);
            // Strict growth except where the sigmoid saturates at the f64
            // resolution just below one.
            ok &= (v > prev || (v == prev && v > 1.0 - 1e-12)) && v > 0.0 && v < 1.0;
            prev = v;
        }
    }
    CheckResult {
        name: "los-probability-monotone",
        passed: ok,
        detail: "sigmoid strictly increasing in elevation for a2, b2 > 0".into(),
    }
}

fn check_path_loss_monotone() -> CheckResult {
    let p = crate::channel::PathLossParams::default();
    let mut ok = true;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..60 {
        let d = 100.0 * 1.08f64.powi(i);
        let l = crate::channel::path_loss_db(d, 3.5, &p);
        ok &= l > prev;
        prev = l;
    }
    ok &= crate::channel::path_loss_db(350.0, 3.5, &p) > crate::channel::path_loss_db(350.0, 2.0, &p);
    CheckResult {
        name: "path-loss-monotone",
        passed: ok,
        detail: "loss increases with distance beyond d0 and with the exponent".into(),
    }
}

fn check_uav_link_outranks_gu_link() -> CheckResult {
    let mut cfg = ScenarioConfig::default();
    let mut ok = true;
    for i in 0..=85 {
        cfg.gu_pos.x = 150.0 + 10.0 * i as f64;
        let b = unit_budget(&cfg);
        ok &= b.g1 > b.g2;
    }
    CheckResult {
        name: "uav-link-outranks-gu-link",
        passed: ok,
        detail: "g1 > g2 with unit fading for GU ground distances 150-1000 m".into(),
    }
}

fn check_solver_equalities() -> CheckResult {
    let mut rng = trial_rng(2024, 0);
    let opts = SolverOptions::default();
    let mut worst_gu = 0.0f64;
    let mut worst_budget = 0.0f64;
    let mut feasible = 0;
    for _ in 0..25 {
        let cfg = random_scenario(&mut rng);
        let budget = unit_budget(&cfg);
        let targets = cfg.fbl_targets().ok();
        let m = cfg.frame_length;
        let p0 = cfg.p0_watts();
        for (scheme, regime) in crate::schemes::ALL_SCHEME_REGIMES {
            let beta = match scheme {
                Scheme::Noma => rng.gen_range(0.3..0.9),
                Scheme::Relay => rng.gen_range(0.5..1.1),
            };
            let Ok(r) = solvers::solve(scheme, regime, &budget, m, p0, beta, targets.as_ref(), &opts)
            else {
                continue;
            };
            if !r.feasible || r.gu_over_delivery || r.gu_target_bits == 0.0 {
                continue;
            }
            feasible += 1;
            worst_gu = worst_gu.max(rel(r.gu_bits(), r.gu_target_bits));
            let a = r.allocation.unwrap();
            let budget_gap = match scheme {
                Scheme::Noma => rel(a.p1_w + a.p2_w, p0),
                Scheme::Relay => rel(a.m1 * a.p1_w + a.m2 * a.p2_w, m * p0),
            };
            worst_budget = worst_budget.max(budget_gap);
        }
    }
    CheckResult {
        name: "solver-equalities",
        passed: feasible > 40 && worst_gu <= 1e-6 && worst_budget <= 1e-9,
        detail: format!(
            "{feasible} feasible solves: GU-target gap {worst_gu:.3e} (<=1e-6), budget gap {worst_budget:.3e} (<=1e-9)"
        ),
    }
}

fn check_relay_ibl_concavity() -> CheckResult {
    let mut rng = trial_rng(77, 0);
    let opts = SolverOptions::default();
    let mut ok = true;
    let mut tested = 0;
    for _ in 0..20 {
        let cfg = random_scenario(&mut rng);
        let budget = unit_budget(&cfg);
        let beta = rng.gen_range(0.5..1.2);
        let m = cfg.frame_length;
        let p0 = cfg.p0_watts();
        let Ok(r) = solvers::solve_relay_ibl(&budget, m, p0, beta, &opts) else { continue };
        let Some(a) = r.allocation else { continue };
        if !r.feasible {
            continue;
        }
        tested += 1;
        // Second differences at interior points around the optimum.
        let span = (a.m1 - 5.0).max(1.0)..(a.m1 + 5.0).min(m - 5.0);
        let target = r.gu_target_bits;
        let f = |m1: f64| {
            let m2 = m - m1;
            let p2 = (2f64.powf(target / m2) - 1.0) * budget.noise_w / budget.g3;
            let p1 = (m * p0 - m2 * p2) / m1;
            if p1 <= 0.0 {
                return None;
            }
            Some(m1 * (1.0 + p1 * budget.g1 / budget.noise_w).log2() - target)
        };
        for i in 0..25 {
            let x = span.start + (span.end - span.start) * i as f64 / 24.0;
            let h = 0.1;
            if let (Some(a_), Some(b_), Some(c_)) = (f(x - h), f(x), f(x + h)) {
                ok &= a_ - 2.0 * b_ + c_ <= 1e-9;
            }
        }
    }
    CheckResult {
        name: "relay-ibl-concavity",
        passed: ok && tested >= 10,
        detail: format!("second differences non-positive at interior points ({tested} scenarios)"),
    }
}

fn check_noma_beta_cap() -> CheckResult {
    let cfg = ScenarioConfig::default();
    let budget = unit_budget(&cfg);
    let opts = SolverOptions::default();
    let t = ReliabilityTargets::new(1e-4, 1e-3).unwrap();
    let ibl =
        solvers::max_feasible_beta(&budget, 400.0, 1.0, Scheme::Noma, Regime::Ibl, None, &opts);
    let fbl =
        solvers::max_feasible_beta(&budget, 400.0, 1.0, Scheme::Noma, Regime::Fbl, Some(&t), &opts);
    let ok = (ibl.beta - 1.0).abs() <= 1e-4 && (fbl.beta - 1.0).abs() <= 1e-4;
    CheckResult {
        name: "noma-beta-cap",
        passed: ok,
        detail: format!("max beta ibl {:.6}, fbl {:.6} (want 1 +- 1e-4)", ibl.beta, fbl.beta),
    }
}

fn check_relay_win_win() -> CheckResult {
    let cfg = ScenarioConfig::default();
    let budget = unit_budget(&cfg);
    let opts = SolverOptions::default();
    let t = ReliabilityTargets::new(1e-4, 1e-3).unwrap();
    let ibl = solvers::solve_relay_ibl(&budget, 400.0, 1.0, 1.05, &opts);
    let fbl = solvers::solve_relay_fbl(&budget, 400.0, 1.0, 1.05, &t, &opts);
    let ok = matches!(&ibl, Ok(r) if r.feasible && r.uav_bits() > 0.0)
        && matches!(&fbl, Ok(r) if r.feasible && r.uav_bits() > 0.0);
    CheckResult {
        name: "relay-win-win",
        passed: ok,
        detail: "relaying serves the UAV with positive throughput at beta = 1.05".into(),
    }
}

fn check_fbl_gu_power_savings() -> CheckResult {
    // Equal split, beta = 1, UAV target ten times stricter, all SNRs > 1:
    // the GU equality needs less second-hop power under the FBL model.
    let cfg = ScenarioConfig::default();
    let budget = unit_budget(&cfg);
    let t = ReliabilityTargets::new(1e-4, 1e-3).unwrap();
    let m = 400.0;
    let gamma20 = 1.0 * budget.g2 / budget.noise_w;
    let p2_ibl = ((1.0 + gamma20).powi(2) - 1.0) * budget.noise_w / budget.g3;
    let mu0_fbl =
        crate::schemes::solo_throughput(Regime::Fbl, &budget, m, 1.0, Some(t.nu2)).unwrap();
    let r_req = mu0_fbl / ((m / 2.0) * (1.0 - t.nu2));
    let gamma3 = fbl::invert_snr_for_error(m / 2.0, t.relay_gu_target(), r_req).unwrap();
    let p2_fbl = gamma3 * budget.noise_w / budget.g3;
    let snrs_above_one = gamma20 > 1.0 && gamma3 > 1.0;
    CheckResult {
        name: "fbl-gu-power-savings",
        passed: p2_fbl < p2_ibl && snrs_above_one,
        detail: format!("p2 fbl {p2_fbl:.6} W < p2 ibl {p2_ibl:.6} W at beta=1, equal split"),
    }
}

fn check_fading_unit_mean() -> CheckResult {
    let specs = [
        FadingSpec::Rician { non_centrality: 1.0 },
        FadingSpec::Rayleigh,
        FadingSpec::Rician { non_centrality: 0.09 },
    ];
    let mut ok = true;
    let mut detail = String::new();
    for (i, s) in specs.iter().enumerate() {
        let mut rng = trial_rng(500 + i as u64, 0);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_fading(s, &mut rng);
        }
        let mean = sum / n as f64;
        ok &= (mean - 1.0).abs() < 0.01;
        detail.push_str(&format!("stream{} mean {:.4} ", i + 1, mean));
    }
    CheckResult { name: "fading-unit-mean", passed: ok, detail: detail.trim_end().into() }
}

fn check_solver_vs_oracle() -> CheckResult {
    let mut rng = trial_rng(31, 0);
    let opts = SolverOptions::default();
    let mut ok = true;
    let mut tested = 0;
    let mut detail = String::new();
    for (scheme, regime) in crate::schemes::ALL_SCHEME_REGIMES {
        for _ in 0..2 {
            let cfg = random_scenario(&mut rng);
            let budget = unit_budget(&cfg);
            let targets = cfg.fbl_targets().ok();
            let beta = match scheme {
                Scheme::Noma => rng.gen_range(0.3..0.9),
                Scheme::Relay => rng.gen_range(0.5..1.0),
            };
            let m = cfg.frame_length;
            let p0 = cfg.p0_watts();
            let resolution = if scheme == Scheme::Noma { 1e-5 } else { 1.0 };
            let (Ok(s), Ok(o)) = (
                solvers::solve(scheme, regime, &budget, m, p0, beta, targets.as_ref(), &opts),
                solvers::grid_oracle(
                    &budget,
                    m,
                    p0,
                    scheme,
                    regime,
                    beta,
                    targets.as_ref(),
                    resolution,
                    &opts,
                ),
            ) else {
                continue;
            };
            if !(s.feasible && o.feasible) {
                ok &= s.feasible == o.feasible;
                continue;
            }
            tested += 1;
            if s.uav_bits() < o.uav_bits() - 1e-9 {
                ok = false;
                detail.push_str(&format!("{scheme}/{regime} solver below oracle; "));
            }
        }
    }
    CheckResult {
        name: "solver-vs-oracle",
        passed: ok && tested >= 4,
        detail: if detail.is_empty() {
            format!("solver at or above the oracle on {tested} scenarios")
        } else {
            detail
        },
    }
}

fn check_outage_monotone_in_beta() -> CheckResult {
    let cfg = ScenarioConfig::default();
    let mut prev = -1.0;
    let mut ok = true;
    let mut detail = String::new();
    for beta in [0.5, 1.0, 1.6] {
        let r = montecarlo::run_campaign(&cfg, Scheme::Relay, Regime::Ibl, beta, 200, 7).unwrap();
        ok &= r.outage_probability >= prev;
        prev = r.outage_probability;
        detail.push_str(&format!("beta {beta}: outage {:.3} ", r.outage_probability));
    }
    CheckResult { name: "outage-monotone-in-beta", passed: ok, detail: detail.trim_end().into() }
}
