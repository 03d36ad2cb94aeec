//! Properties of evolved trajectories.

use entflow::flow::{evolve_at, record_times};
use entflow::{evolve, FlowState, FlowVariant, PeriodicGrid, StepperConfig, SupportGrid};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn circles_stay_round(r0 in 0.3..3.0f64, omega in 1u32..=3) {
        let g = PeriodicGrid::new(omega, 16).unwrap();
        let s = SupportGrid::from_fn(&g, |_| r0).unwrap();
        // small circles are stiff in time; cap the step so RK4 error stays below the bound
        let cfg = StepperConfig { max_dt: 1e-3, ..StepperConfig::default() };
        let tr = evolve(&FlowState::new(s, FlowVariant::Unscaled), 0.3, &cfg, 0.1).unwrap();
        for st in &tr.states {
            let exact = (r0 * r0 + 2.0 * st.time).sqrt();
            let (lo, hi) = (st.h().min(), st.h().max());
            prop_assert!(hi - lo <= 1e-13 * exact);
            prop_assert!((hi - exact).abs() <= 1e-9 * exact, "t = {}, err = {:e}", st.time, (hi - exact).abs() / exact);
        }
    }

    // 3|a2| + 8|b3| + 15|a4| < 0.85 keeps every draw convex
    #[test]
    fn accepted_states_are_convex(a2 in -0.1..0.1f64, b3 in -0.03..0.03f64, a4 in -0.02..0.02f64) {
        let g = PeriodicGrid::new(1, 32).unwrap();
        let s = SupportGrid::from_fn(&g, |t| 1.0 + a2 * (2.0 * t).cos() + b3 * (3.0 * t).sin() + a4 * (4.0 * t).cos())
            .unwrap();
        let mut margins = Vec::new();
        let times = record_times(0.0, 0.05, 1e-3, None).unwrap();
        evolve_at(&FlowState::new(s, FlowVariant::Unscaled), &times, &StepperConfig::default(), |st, rec| {
            margins.push((st.support.convexity_margin(), rec.margin));
        })
        .unwrap();
        prop_assert_eq!(margins.len(), times.len() + 1);
        prop_assert!(margins.iter().all(|&(m, r)| m > 0.0 && (m - r).abs() <= 1e-12 * m));
    }

    #[test]
    fn l2_distance_contracts(eps in -0.02..0.02f64, mode in 2u32..=5) {
        let g = PeriodicGrid::new(1, 32).unwrap();
        let h1 = SupportGrid::from_fn(&g, |t| 1.0 + 0.1 * (2.0 * t).cos()).unwrap();
        let h2 = SupportGrid::from_fn(&g, |t| 1.0 + 0.1 * (2.0 * t).cos() + eps * (mode as f64 * t).sin()).unwrap();
        let times = record_times(0.0, 0.02, 2e-3, None).unwrap();
        let cfg = StepperConfig::default();
        let a = evolve_at(&FlowState::new(h1, FlowVariant::Unscaled), &times, &cfg, |_, _| {}).unwrap();
        let b = evolve_at(&FlowState::new(h2, FlowVariant::Unscaled), &times, &cfg, |_, _| {}).unwrap();
        let d: Vec<f64> = a.states.iter().zip(&b.states)
            .map(|(x, y)| x.h().zip_map(y.h(), |p, q| (p - q).powi(2)).unwrap().integrate())
            .collect();
        prop_assert!(d.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-300));
    }
}
