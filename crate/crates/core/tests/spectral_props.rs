//! Calculus identities of the periodic spectral grid.

use entflow::{GridFunction, PeriodicGrid};
use proptest::prelude::*;

/// `c + Σ_{m=1}^{M} (a_m cos(mθ/ω) + b_m sin(mθ/ω))` with `M < n/2`.
fn band_limited(grid: &PeriodicGrid, c: f64, coeffs: &[(f64, f64)]) -> GridFunction {
    let omega = grid.omega() as f64;
    GridFunction::from_fn(grid, |t| {
        coeffs.iter().enumerate().fold(c, |acc, (i, (a, b))| {
            let m = (i + 1) as f64 / omega;
            acc + a * (m * t).cos() + b * (m * t).sin()
        })
    })
}

fn setup() -> impl Strategy<Value = (PeriodicGrid, GridFunction, GridFunction)> {
    (1u32..=3, 3usize..=6, -2.0..2.0f64, -2.0..2.0f64).prop_flat_map(|(omega, log_n, c1, c2)| {
        let n = 1 << log_n;
        let coeff = prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n / 2 - 1);
        (coeff.clone(), coeff).prop_map(move |(f, g)| {
            let grid = PeriodicGrid::new(omega, n).unwrap();
            let ff = band_limited(&grid, c1, &f);
            let gg = band_limited(&grid, c2, &g);
            (grid, ff, gg)
        })
    })
}

fn max_abs_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_composition((_g, f, _h) in setup()) {
        let d11 = f.deriv(1).unwrap().deriv(1).unwrap();
        let d2 = f.deriv(2).unwrap();
        prop_assert!(max_abs_diff(&d11, &d2) <= 1e-10 * d2.max_abs().max(1.0));
    }

    #[test]
    fn derivative_has_zero_mean((_g, f, _h) in setup()) {
        prop_assert!(f.deriv(1).unwrap().integrate().abs() <= 1e-10);
    }

    #[test]
    fn integration_by_parts((_g, f, g) in setup()) {
        let a = f.zip_map(&g.deriv(1).unwrap(), |x, y| x * y).unwrap().integrate();
        let b = g.zip_map(&f.deriv(1).unwrap(), |x, y| x * y).unwrap().integrate();
        prop_assert!((a + b).abs() <= 1e-9);
    }

    #[test]
    fn transform_round_trip((grid, f, _h) in setup()) {
        let back = grid.inverse(f.spectrum());
        let err = back.iter().zip(f.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-13 * f.max_abs().max(1.0));
    }

    #[test]
    fn denoised_derivatives_agree_on_band_limited((_g, f, _h) in setup()) {
        let plain = f.derivs(&[1, 2, 3]).unwrap();
        let filtered = f.derivs_denoised(&[1, 2, 3], 1e-15).unwrap();
        for (a, b) in plain.iter().zip(&filtered) {
            prop_assert!(max_abs_diff(a, b) <= 1e-10 * a.max_abs().max(1.0));
        }
    }
}

#[test]
fn analytic_derivative_error_decays_faster_than_any_power() {
    // f = exp(sin θ), f' = cos θ·f
    let errors: Vec<f64> = [8usize, 12, 16, 24]
        .iter()
        .map(|&n| {
            let grid = PeriodicGrid::new(1, n).unwrap();
            let f = GridFunction::from_fn(&grid, |t| t.sin().exp());
            let d = f.deriv(1).unwrap();
            grid.nodes()
                .iter()
                .zip(d.values())
                .map(|(t, v)| (v - t.cos() * t.sin().exp()).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    // local algebraic orders log(e_i/e_{i+1})/log(n_{i+1}/n_i) keep growing
    let ns = [8.0f64, 12.0, 16.0, 24.0];
    let orders: Vec<f64> = (0..3).map(|i| (errors[i] / errors[i + 1]).ln() / (ns[i + 1] / ns[i]).ln()).collect();
    assert!(orders.windows(2).all(|w| w[1] > w[0]), "{errors:?} {orders:?}");
    assert!(errors[3] < 1e-12, "{errors:?}");
}
