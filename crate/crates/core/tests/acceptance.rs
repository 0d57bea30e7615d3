//! Acceptance checklist, one test per criterion.
//!
//! Each test prints its criterion's verdict line, so
//! `cargo test --test acceptance -- --nocapture --test-threads=1`
//! shows the whole checklist in order.

use pinchjet::acceptance::{self, CriterionReport};

fn run(criterion: fn() -> CriterionReport) {
    let report = criterion();
    println!("{report}");
    assert!(report.pass, "{report}");
}

#[test]
fn criterion_1_liftability() {
    run(acceptance::criterion_liftability);
}

#[test]
fn criterion_2_gauge_invariance() {
    run(acceptance::criterion_gauge_invariance);
}

#[test]
fn criterion_3_double_pinch() {
    run(acceptance::criterion_double_pinch);
}

#[test]
fn criterion_4_orbit_dimensions() {
    run(acceptance::criterion_orbit_dimensions);
}

#[test]
fn criterion_5_trace_formula() {
    run(acceptance::criterion_trace_formula);
}

#[test]
fn criterion_6_eigen_route() {
    run(acceptance::criterion_eigen_route);
}

#[test]
fn criterion_7_symplectization() {
    run(acceptance::criterion_symplectization);
}

#[test]
fn criterion_8_family_obstruction() {
    run(acceptance::criterion_family_obstruction);
}

#[test]
fn criterion_9_scaling_degeneration() {
    run(acceptance::criterion_scaling_degeneration);
}
