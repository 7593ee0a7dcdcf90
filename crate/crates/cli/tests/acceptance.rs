//! Acceptance gate: one test per numbered criterion, each printing one
//! pass/fail line. Run with
//! `cargo test -p mvar-cli --test acceptance -- --nocapture`.

use std::process::Command;
use std::time::{Duration, Instant};

use mvar::copula::{CopulaModel, Family};
use mvar::kendall::KendallDistribution;
use mvar::margins::Margin;
use mvar::orders::{run_suite, SuiteConfig};
use mvar::riskmeasure::{
    lower_var_closed, lower_var_monte_carlo, lower_var_quadrature, marginal_var, upper_var_closed,
    upper_var_monte_carlo, var_closed_form, Portfolio,
};

const ALPHAS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

fn gate(name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {name} failed: {detail}");
}

fn uniform2() -> Vec<Margin> {
    vec![Margin::uniform(), Margin::uniform()]
}

fn filtered_suite(filter: &str, alpha_points: usize) -> (bool, String) {
    let config = SuiteConfig {
        only: Some(filter.to_string()),
        alpha_points,
        mc_samples: 100_000,
        ..SuiteConfig::default()
    };
    let report = run_suite(&config).expect("suite runs");
    assert!(
        !report.checks.is_empty(),
        "filter `{filter}` selected no checks"
    );
    let worst = report
        .checks
        .iter()
        .map(|c| c.max_violation - c.tolerance)
        .fold(f64::NEG_INFINITY, f64::max);
    (report.all_passed(), format!("worst excess {worst:.3e}"))
}

#[test]
fn criterion_01_bivariate_closed_forms_reproduced() {
    let clock = Instant::now();
    let mut worst: f64 = 0.0;

    for theta in [-0.5, 0.5, 2.0, 10.0] {
        let model = CopulaModel::clayton(theta, 2).unwrap();
        let portfolio = Portfolio::new(model, uniform2()).unwrap();
        for alpha in ALPHAS {
            let closed = var_closed_form(Family::Clayton, Some(theta), alpha, 2).unwrap();
            let quad = lower_var_quadrature(&portfolio, alpha, 128).unwrap();
            worst = worst.max((quad.components[0] - closed).abs());
        }
    }

    let indep = Portfolio::new(CopulaModel::independence(2).unwrap(), uniform2()).unwrap();
    let ratio = Portfolio::new(CopulaModel::clayton(1.0, 2).unwrap(), uniform2()).unwrap();
    for alpha in ALPHAS {
        let closed = var_closed_form(Family::Independence, None, alpha, 2).unwrap();
        let quad = lower_var_quadrature(&indep, alpha, 128).unwrap();
        worst = worst.max((quad.components[0] - closed).abs());

        // the unit-parameter Clayton copula u v / (u + v - u v)
        let closed = alpha * alpha.ln() / (alpha - 1.0);
        let quad = lower_var_quadrature(&ratio, alpha, 128).unwrap();
        worst = worst.max((quad.components[0] - closed).abs());
    }

    let mut exact = true;
    for alpha in ALPHAS {
        let como = var_closed_form(Family::Comonotonic, None, alpha, 2).unwrap();
        exact &= como == alpha;
        let cm = var_closed_form(Family::CounterMonotonic, None, alpha, 2).unwrap();
        exact &= cm == (1.0 + alpha) / 2.0;
    }

    let elapsed = clock.elapsed();
    let pass = worst <= 1e-8 && exact && elapsed < Duration::from_secs(1);
    gate(
        "1 (bivariate closed forms vs quadrature)",
        pass,
        &format!("worst |diff| {worst:.3e}, exact rows {exact}, {elapsed:?}"),
    );
}

#[test]
fn criterion_02_trivariate_clayton_reproduced() {
    let mut worst: f64 = 0.0;
    for theta in [-0.25, 1.0, 3.0] {
        let model = CopulaModel::clayton(theta, 3).unwrap();
        let portfolio = Portfolio::new(model, vec![Margin::uniform(); 3]).unwrap();
        for alpha in ALPHAS {
            let closed = var_closed_form(Family::Clayton, Some(theta), alpha, 3).unwrap();
            let quad = lower_var_quadrature(&portfolio, alpha, 128).unwrap();
            worst = worst.max((quad.components[0] - closed).abs());
        }
    }

    let mut limit_gap: f64 = 0.0;
    for alpha in ALPHAS {
        let near_zero = var_closed_form(Family::Clayton, Some(1e-6), alpha, 3).unwrap();
        let l = alpha.ln();
        let independent = -2.0 * (1.0 - alpha + l) / (l * l);
        limit_gap = limit_gap.max((near_zero - independent).abs());
    }

    let pass = worst <= 1e-8 && limit_gap <= 1e-4;
    gate(
        "2 (trivariate closed form vs quadrature)",
        pass,
        &format!("worst |diff| {worst:.3e}, independence-limit gap {limit_gap:.3e}"),
    );
}

#[test]
fn criterion_03_monte_carlo_consistency() {
    let clock = Instant::now();
    let models = [
        CopulaModel::clayton(2.0, 2).unwrap(),
        CopulaModel::frank(3.0, 2).unwrap(),
        CopulaModel::gumbel(2.0, 2).unwrap(),
        CopulaModel::ali_mikhail_haq(0.5).unwrap(),
    ];
    let margin_sets = [uniform2(), vec![Margin::exponential(1.0).unwrap(); 2]];
    let mut worst_excess = f64::NEG_INFINITY;
    for model in models {
        for margins in &margin_sets {
            let portfolio = Portfolio::new(model, margins.clone()).unwrap();
            let quad = lower_var_quadrature(&portfolio, 0.5, 128).unwrap();
            let mc = lower_var_monte_carlo(&portfolio, 0.5, 1_000_000, 0.005, 20250801).unwrap();
            let stderr = mc.stderr.as_ref().unwrap();
            for ((se, mc_c), quad_c) in stderr.iter().zip(&mc.components).zip(&quad.components) {
                let allowance = (3.0 * se).max(0.01);
                worst_excess = worst_excess.max((mc_c - quad_c).abs() - allowance);
            }
        }
    }
    let elapsed = clock.elapsed();
    let pass = worst_excess <= 0.0 && elapsed < Duration::from_secs(60);
    gate(
        "3 (Monte Carlo within max(0.01, 3 stderr) of quadrature)",
        pass,
        &format!("worst excess {worst_excess:.3e}, {elapsed:?}"),
    );
}

#[test]
fn criterion_04_sandwich_property() {
    let (pass, detail) = filtered_suite("var/sandwich", 99);
    gate("4 (upper <= marginal <= lower everywhere)", pass, &detail);
}

#[test]
fn criterion_05_comonotonic_collapse() {
    let margin_sets = [uniform2(), vec![Margin::exponential(1.0).unwrap(); 2]];
    let mut exact = true;
    for margins in margin_sets {
        let model = CopulaModel::comonotonic(2).unwrap();
        let portfolio = Portfolio::new(model, margins.clone()).unwrap();
        for alpha in ALPHAS {
            let lower = lower_var_closed(&portfolio, alpha).unwrap();
            let upper = upper_var_closed(&portfolio, alpha).unwrap();
            let mc_lower = lower_var_monte_carlo(&portfolio, alpha, 10_000, 0.005, 1).unwrap();
            let mc_upper = upper_var_monte_carlo(&portfolio, alpha, 10_000, 0.005, 1).unwrap();
            for (i, margin) in margins.iter().enumerate() {
                let quantile = marginal_var(margin, alpha).unwrap();
                exact &= lower.components[i] == quantile;
                exact &= upper.components[i] == quantile;
                exact &= mc_lower.components[i] == quantile;
                exact &= mc_upper.components[i] == quantile;
            }
        }
    }
    gate(
        "5 (comonotonic VaR equals marginal quantiles exactly)",
        exact,
        "bit-exact equality across margins, orthants, routes",
    );
}

#[test]
fn criterion_06_homogeneity_and_translation() {
    let (pass_h, detail_h) = filtered_suite("var/homogeneity", 99);
    let (pass_t, detail_t) = filtered_suite("var/translation", 99);
    gate(
        "6 (positive homogeneity and translation invariance)",
        pass_h && pass_t,
        &format!("scaling: {detail_h}; shifting: {detail_t}"),
    );
}

#[test]
fn criterion_07_reflection_identity() {
    let (pass, detail) = filtered_suite("var/reflection", 99);
    gate(
        "7 (upper VaR at alpha mirrors lower VaR at 1 - alpha)",
        pass,
        &detail,
    );
}

#[test]
fn criterion_08_monotonicity_suites() {
    let (pass_alpha, detail_alpha) = filtered_suite("var/alpha-monotone", 99);
    let (pass_theta, detail_theta) = filtered_suite("var/theta-monotone", 99);
    gate(
        "8 (risk-level and dependence monotonicity)",
        pass_alpha && pass_theta,
        &format!("risk level: {detail_alpha}; dependence: {detail_theta}"),
    );
}

#[test]
fn criterion_09_kendall_suite() {
    let (pass_diag, _) = filtered_suite("kendall/diagonal", 99);
    let (pass_slope, _) = filtered_suite("kendall/theta-slope", 99);
    let (pass_emp, detail_emp) = filtered_suite("kendall/empirical", 99);

    let tau_indep = KendallDistribution::new(CopulaModel::independence(2).unwrap())
        .tau()
        .unwrap();
    let tau_como = KendallDistribution::new(CopulaModel::comonotonic(2).unwrap())
        .tau()
        .unwrap();
    let taus_ok = tau_indep.abs() <= 1e-10 && (tau_como - 1.0).abs() <= 1e-10;

    let pass = pass_diag && pass_slope && pass_emp && taus_ok;
    gate(
        "9 (Kendall diagonal, slope, tau and empirical checks)",
        pass,
        &format!(
            "tau(independence) = {tau_indep:.2e}, tau(comonotonic) - 1 = {:.2e}, empirical: {detail_emp}",
            tau_como - 1.0
        ),
    );
}

#[test]
fn criterion_10_verify_determinism() {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_mvar"))
            .args([
                "verify",
                "--seed",
                "99",
                "--alpha-points",
                "29",
                "--mc-samples",
                "20000",
            ])
            .output()
            .expect("binary runs")
    };
    let first = run();
    let second = run();
    let pass = first.status.success()
        && second.status.success()
        && first.stdout == second.stdout
        && !first.stdout.is_empty();
    gate(
        "10 (repeated verify runs are byte-identical)",
        pass,
        &format!("{} report bytes", first.stdout.len()),
    );
}
