//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! (followed by the failing comparisons) on stderr.

use std::io::Write;

use lorouter::verify::{self, CriterionReport, VerifyConfig};

fn report(r: CriterionReport) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{}", r.line());
    for d in &r.details {
        let _ = writeln!(err, "    {d}");
    }
    assert!(r.passed, "{}", r.line());
}

macro_rules! criterion {
    ($name:ident, $f:path) => {
        #[test]
        fn $name() {
            report($f(&VerifyConfig::default()));
        }
    };
}

criterion!(criterion_01_fixed_router_amplitudes, verify::criterion_1);
criterion!(
    criterion_02_fixed_router_success_probability,
    verify::criterion_2
);
criterion!(criterion_03_signal_preservation, verify::criterion_3);
criterion!(criterion_04_feed_forward_equivalence, verify::criterion_4);
criterion!(criterion_05_equalized_mode, verify::criterion_5);
criterion!(criterion_06_tunable_gate_probability, verify::criterion_6);
criterion!(criterion_07_tunable_router_amplitudes, verify::criterion_7);
criterion!(criterion_08_argmax_control_angle, verify::criterion_8);
criterion!(criterion_09_minimum_probability_report, verify::criterion_9);
criterion!(criterion_10_multi_signal_routing, verify::criterion_10);
criterion!(criterion_11_property_suites, verify::criterion_11);
criterion!(criterion_12_determinism, verify::criterion_12);
