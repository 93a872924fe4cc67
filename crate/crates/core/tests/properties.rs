//! Property tests for the module invariants: randomized inputs instead of
//! fixed grids.

use proptest::prelude::*;

use uavalloc_core::channel::{build_link_budget, los_probability};
use uavalloc_core::fbl;
use uavalloc_core::scenario::ScenarioConfig;
use uavalloc_core::schemes::{
    self, noma_throughputs_ibl, relay_throughputs_fbl, relay_throughputs_ibl, Regime,
    ReliabilityTargets,
};
use uavalloc_core::solvers::{self, SolverOptions};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn paper_budget() -> uavalloc_core::channel::LinkBudget {
    build_link_budget(&ScenarioConfig::default(), [1.0, 1.0, 1.0]).unwrap()
}

proptest! {
    #[test]
    fn q_inverse_roundtrip(exp in -9.0f64..-0.31) {
        let p = 10f64.powf(exp);
        let x = fbl::inv_q(p).unwrap();
        prop_assert!(rel(fbl::q_function(x), p) <= 1e-9);
    }

    #[test]
    fn rate_below_capacity_plus_log_term(
        m in 1.0f64..20_000.0,
        g in 1e-3f64..1e6,
        e in 1e-9f64..0.499,
    ) {
        let r = fbl::fbl_rate(m, g, e).unwrap().bits_per_use;
        let bound = fbl::shannon_capacity(g).unwrap() + m.log2() / m;
        prop_assert!(r <= bound + 1e-12);
    }

    #[test]
    fn rate_error_inverse_pair(
        m in 84.0f64..5_000.0,
        g in 0.5f64..1e4,
        exp in -9.0f64..-1.0,
    ) {
        let e = 10f64.powf(exp);
        let r = fbl::fbl_rate(m, g, e).unwrap();
        if !r.clamped {
            prop_assert!(rel(fbl::fbl_error(m, g, r.bits_per_use).unwrap(), e) <= 1e-6);
        }
    }

    #[test]
    fn los_probability_stays_in_unit_interval_and_grows(
        theta in 0.1f64..89.0,
        a2 in 0.5f64..30.0,
        b2 in 0.01f64..1.0,
    ) {
        let v = los_probability(theta, a2, b2);
        // Open interval mathematically; the top saturates at f64 resolution.
        prop_assert!(v > 0.0 && v <= 1.0);
        let above = los_probability(theta + 1.0, a2, b2);
        prop_assert!(above >= v);
        if v < 1.0 - 1e-12 {
            prop_assert!(above > v);
        }
    }

    #[test]
    fn relay_sum_identity(
        m1 in 1.0f64..399.0,
        p1 in 1e-3f64..3.0,
        p2 in 0.0f64..3.0,
    ) {
        let b = paper_budget();
        let t = relay_throughputs_ibl(&b, 400.0, m1, p1, p2).unwrap();
        let hop1 = t.diag.first_hop_bits.unwrap();
        prop_assert!((t.uav_bits + t.gu_bits - hop1).abs()
            <= 1e-9 * hop1.abs().max(t.gu_bits.abs()).max(1.0));
        if m1 >= 84.0 && 400.0 - m1 >= 84.0 && p1 > 1e-2 {
            let targets = ReliabilityTargets::new(1e-4, 1e-3).unwrap();
            let t = relay_throughputs_fbl(&b, 400.0, m1, p1, p2, &targets).unwrap();
            let hop1 = t.diag.first_hop_bits.unwrap();
            prop_assert!((t.uav_bits + t.gu_bits - hop1).abs()
                <= 1e-9 * hop1.abs().max(t.gu_bits.abs()).max(1.0));
        }
    }

    #[test]
    fn noma_gu_decreasing_uav_increasing_in_p1(
        p1 in 0.01f64..0.98,
        dp in 1e-3f64..0.01,
    ) {
        let b = paper_budget();
        let p1b = (p1 + dp).min(0.99);
        let a = noma_throughputs_ibl(&b, 400.0, p1, 1.0 - p1).unwrap();
        let c = noma_throughputs_ibl(&b, 400.0, p1b, 1.0 - p1b).unwrap();
        prop_assert!(c.uav_bits > a.uav_bits);
        // Interference rises and the GU's own power falls.
        prop_assert!(c.gu_bits < a.gu_bits);
    }

    #[test]
    fn noma_infeasible_beyond_beta_one(extra in 1e-6f64..4.0) {
        let b = paper_budget();
        let opts = SolverOptions::default();
        let beta = 1.0 + extra;
        let r = solvers::solve_noma_ibl(&b, 400.0, 1.0, beta, &opts).unwrap();
        prop_assert!(!r.feasible);
        let t = ReliabilityTargets::new(1e-4, 1e-3).unwrap();
        let r = solvers::solve_noma_fbl(&b, 400.0, 1.0, beta, &t, &opts).unwrap();
        prop_assert!(!r.feasible);
    }

    #[test]
    fn feasibility_monotone_in_beta_on_sweep_range(
        lo in 0.5f64..2.0,
        d in 0.05f64..1.0,
    ) {
        let b = paper_budget();
        let opts = SolverOptions::default();
        let t = ReliabilityTargets::new(1e-4, 1e-3).unwrap();
        let hi = lo + d;
        for regime in [Regime::Ibl, Regime::Fbl] {
            let feasible = |beta: f64| {
                solvers::solve(schemes::Scheme::Relay, regime, &b, 400.0, 1.0, beta, Some(&t), &opts)
                    .map(|r| r.feasible && r.uav_bits() >= 0.0)
                    .unwrap_or(false)
            };
            if feasible(hi) {
                prop_assert!(feasible(lo), "feasible at {hi} but not {lo} ({regime})");
            }
        }
    }

    #[test]
    fn solo_fbl_below_ibl(p0 in 0.05f64..4.0) {
        let b = paper_budget();
        let ibl = schemes::solo_throughput(Regime::Ibl, &b, 400.0, p0, None).unwrap();
        let fbl = schemes::solo_throughput(Regime::Fbl, &b, 400.0, p0, Some(1e-3)).unwrap();
        prop_assert!(fbl < ibl);
    }
}
