//! Fuzzes the copula spec grammar `family:theta:dim` (theta lists allowed).
//! Parsing must never panic; any model that parses must evaluate without
//! panicking.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|spec: &str| {
    if let Ok(models) = mvar_cli::parse_copula_list(spec) {
        for model in models {
            // keep evaluation cheap and bounded for absurd dimensions
            if model.dim() > 16 {
                continue;
            }
            let point = vec![0.7; model.dim()];
            let _ = model.cdf(&point);
            let _ = mvar::KendallDistribution::new(model).cdf(0.5);
            if model.is_archimedean() {
                let _ = model.generator(0.5);
            }
        }
    }
});
