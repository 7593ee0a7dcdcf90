//! The default verification suite must come back green: every ordering,
//! invariance and cross-route property at its documented tolerance.

use mvar::orders::{run_suite, SuiteConfig};

#[test]
fn default_suite_passes() {
    let report = run_suite(&SuiteConfig::default()).unwrap();
    print!("{}", report.render_text());
    assert!(report.checks.len() > 30, "suite looks truncated");
    assert!(report.all_passed(), "\n{}", report.render_text());
}

#[test]
fn suite_is_deterministic() {
    let config = SuiteConfig {
        alpha_points: 19,
        mc_samples: 20_000,
        seed: 12345,
        ..SuiteConfig::default()
    };
    let a = run_suite(&config).unwrap().render_text();
    let b = run_suite(&config).unwrap().render_text();
    assert_eq!(a, b);
}
