//! Acceptance criteria, one test each. Every test prints a single
//! `criterion NN PASS|FAIL ...` line followed by its sub-checks.

use std::io::Write;

use entflow_cli::acceptance;

fn criterion(id: u8) {
    let outcome = acceptance::run(id);
    let text = format!("{}\n", outcome.report());
    // written past the test harness capture so the verdict is always visible
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).unwrap();
    out.flush().unwrap();
    assert!(outcome.passed(), "{}", outcome.summary_line());
}

macro_rules! criteria {
    ($($name:ident = $id:expr),* $(,)?) => {
        $(#[test] fn $name() { criterion($id) })*
    };
}

criteria! {
    criterion_01_circles = 1,
    criterion_02_ellipse_slope = 2,
    criterion_03_entropy_dissipation = 3,
    criterion_04_monotone_quantities = 4,
    criterion_05_length_bounds = 5,
    criterion_06_entropy_bounds = 6,
    criterion_07_area = 7,
    criterion_08_contraction = 8,
    criterion_09_rescaled_convergence = 9,
    criterion_10_rescaling_consistency = 10,
    criterion_11_graph_parametrization = 11,
    criterion_12_parametrization_identity = 12,
    criterion_13_convergence_orders = 13,
}
