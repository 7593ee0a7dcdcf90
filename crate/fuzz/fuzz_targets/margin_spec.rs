//! Fuzzes the margin spec grammar (`uniform`, `exp:RATE`, `lognorm:MU:SIGMA`,
//! `pareto:SCALE:SHAPE`). Any margin that parses is valid by construction, so
//! its quantile at an interior point must succeed.

#![no_main]

use libfuzzer_sys::fuzz_target;

use mvar::margins::Margin;

fuzz_target!(|spec: &str| {
    if let Ok(margin) = spec.parse::<Margin>() {
        let q = margin.quantile(0.5).expect("parsed margins have quantiles");
        let _ = margin.cdf(q);
        let _ = margin.survival_quantile(0.25);
        let _ = margin.mean();
    }
});
