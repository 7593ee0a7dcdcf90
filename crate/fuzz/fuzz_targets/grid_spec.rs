//! Fuzzes the alpha-grid grammar `start:stop:step`. Valid grids must
//! materialize a bounded, nonempty point set strictly inside (0, 1).

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|spec: &str| {
    if let Ok(grid) = mvar_cli::parse_alpha_grid(spec) {
        let points = grid.points();
        assert!(!points.is_empty());
        assert!(points.iter().all(|a| *a > 0.0 && *a < 1.0));
        assert!(points.windows(2).all(|w| w[0] < w[1]));
    }
});
