//! Stochastic-order checks and the consolidated verification suite that
//! executes every ordering, invariance and cross-route property the library
//! promises.

use crate::copula::{CopulaModel, Family};
use crate::error::{Error, Result};
use crate::kendall::{self, KendallDistribution};
use crate::margins::Margin;
use crate::numeric::adaptive_simpson;
use crate::riskmeasure::{
    beta_mean_quadrature, conditional_marginal_cdf, lower_var_closed, lower_var_monte_carlo,
    lower_var_quadrature, marginal_var, upper_var_closed, upper_var_monte_carlo,
    upper_var_quadrature, var_closed_form, Orthant, Portfolio,
};

/// Tolerance used by the analytic order checks.
const ORDER_TOL: f64 = 1e-9;

const DEFAULT_NODES: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    /// Pointwise ordering of quantile functions.
    Stochastic,
    /// Ordering of expected excesses over every threshold.
    StopLoss,
}

#[derive(Debug, Clone, Copy)]
pub struct Violation {
    pub point: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Outcome of a single order comparison over a grid.
#[derive(Debug, Clone)]
pub struct OrderReport {
    pub kind: OrderKind,
    pub grid: Vec<f64>,
    pub violations: Vec<Violation>,
    pub tolerance: f64,
    pub passed: bool,
}

impl OrderReport {
    fn from_pairs(kind: OrderKind, grid: Vec<f64>, pairs: Vec<(f64, f64, f64)>) -> Self {
        let violations: Vec<Violation> = pairs
            .into_iter()
            .filter(|&(_, lhs, rhs)| lhs > rhs + ORDER_TOL)
            .map(|(point, lhs, rhs)| Violation { point, lhs, rhs })
            .collect();
        OrderReport {
            kind,
            grid,
            passed: violations.is_empty(),
            violations,
            tolerance: ORDER_TOL,
        }
    }
}

/// Checks first-order stochastic dominance: `qa(p) <= qb(p)` pointwise.
pub fn check_st_order<A, B>(quantile_a: A, quantile_b: B, grid: &[f64]) -> Result<OrderReport>
where
    A: Fn(f64) -> Result<f64>,
    B: Fn(f64) -> Result<f64>,
{
    let mut pairs = Vec::with_capacity(grid.len());
    for &p in grid {
        pairs.push((p, quantile_a(p)?, quantile_b(p)?));
    }
    Ok(OrderReport::from_pairs(
        OrderKind::Stochastic,
        grid.to_vec(),
        pairs,
    ))
}

/// Checks the stop-loss order of C(U) against C*(U*) through their Kendall
/// stop-loss transforms.
pub fn check_sl_order_kendall(
    model_a: &CopulaModel,
    model_b: &CopulaModel,
    t_grid: &[f64],
) -> Result<OrderReport> {
    for model in [model_a, model_b] {
        if !model.is_archimedean() {
            return Err(Error::UnsupportedFamily {
                family: model.family(),
            });
        }
    }
    let ka = KendallDistribution::new(*model_a);
    let kb = KendallDistribution::new(*model_b);
    let mut pairs = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        pairs.push((t, ka.stop_loss(t)?, kb.stop_loss(t)?));
    }
    Ok(OrderReport::from_pairs(
        OrderKind::StopLoss,
        t_grid.to_vec(),
        pairs,
    ))
}

/// Configuration of the verification suite.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    /// Base seed for every sampling check; the report is a pure function of it.
    pub seed: u64,
    /// Number of interior points in the alpha grids (99 reproduces the
    /// documented acceptance run).
    pub alpha_points: usize,
    /// Draws used by the sampling checks.
    pub mc_samples: usize,
    /// Run only checks whose name contains this substring.
    pub only: Option<String>,
    /// Replaces the per-family theta grids of the dependence-ordering checks;
    /// values must be admissible for every family the filter leaves enabled.
    pub theta_grid_override: Option<Vec<f64>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            alpha_points: 99,
            mc_samples: 100_000,
            only: None,
            theta_grid_override: None,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub max_violation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    /// Line-oriented rendering, one check per line plus a summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            let status = if check.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} {name} max_violation={mv:.6e} tolerance={tol:.6e}\n",
                name = check.name,
                mv = check.max_violation,
                tol = check.tolerance,
            ));
        }
        out.push_str(&format!(
            "{} checks, {} failures, seed {}\n",
            self.checks.len(),
            self.failures(),
            self.seed
        ));
        out
    }
}

/// Runs the property-verification suite and returns one record per check.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    if config.alpha_points < 2 {
        return Err(Error::InvalidParameter(
            "suite needs at least 2 alpha grid points".into(),
        ));
    }
    if config.mc_samples < 10_000 {
        return Err(Error::InvalidParameter(
            "suite sampling checks need at least 10000 draws".into(),
        ));
    }
    let mut suite = Suite {
        config,
        checks: Vec::new(),
    };
    suite.kendall_diagonal()?;
    suite.kendall_general_vs_bivariate()?;
    suite.kendall_theta_pointwise()?;
    suite.kendall_stop_loss_order()?;
    suite.kendall_tau_monotone()?;
    suite.kendall_theta_slope()?;
    suite.kendall_empirical()?;
    suite.var_sandwich()?;
    suite.var_comonotonic_collapse()?;
    suite.var_homogeneity_translation()?;
    suite.var_reflection()?;
    suite.var_alpha_monotone()?;
    suite.var_theta_monotone()?;
    suite.var_closed_vs_quadrature()?;
    suite.var_mc_vs_quadrature()?;
    suite.var_independence_integral()?;
    suite.var_marginal_shift()?;
    suite.prd_conditional_cdf()?;
    Ok(SuiteReport {
        seed: config.seed,
        checks: suite.checks,
    })
}

struct Suite<'a> {
    config: &'a SuiteConfig,
    checks: Vec<CheckResult>,
}

const PARAMETRIC: [Family; 4] = [
    Family::Clayton,
    Family::Gumbel,
    Family::Frank,
    Family::AliMikhailHaq,
];

fn default_theta_grid(family: Family) -> Vec<f64> {
    match family {
        Family::Clayton => vec![-0.5, 0.5, 2.0, 5.0, 10.0],
        Family::Gumbel => vec![1.0, 1.5, 2.0, 4.0, 8.0],
        Family::Frank => vec![-5.0, -1.0, 1.0, 3.0, 10.0],
        Family::AliMikhailHaq => vec![-1.0, -0.5, 0.0, 0.5, 0.9],
        _ => vec![],
    }
}

impl Suite<'_> {
    fn enabled(&self, name: &str) -> bool {
        self.config
            .only
            .as_deref()
            .is_none_or(|filter| name.contains(filter))
    }

    fn record(&mut self, name: &str, tolerance: f64, max_violation: f64) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed: max_violation <= tolerance,
            max_violation,
            tolerance,
        });
    }

    fn alpha_grid(&self) -> Vec<f64> {
        let n = self.config.alpha_points;
        (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
    }

    fn theta_grid(&self, family: Family) -> Vec<f64> {
        self.config
            .theta_grid_override
            .clone()
            .unwrap_or_else(|| default_theta_grid(family))
    }

    /// Representative model zoo for the pointwise Kendall checks.
    fn kendall_models(&self) -> Result<Vec<CopulaModel>> {
        let mut models = vec![
            CopulaModel::independence(2)?,
            CopulaModel::independence(3)?,
            CopulaModel::independence(5)?,
            CopulaModel::comonotonic(2)?,
            CopulaModel::comonotonic(3)?,
            CopulaModel::counter_monotonic()?,
            CopulaModel::clayton(0.5, 3)?,
            CopulaModel::clayton(2.0, 3)?,
            CopulaModel::gumbel(2.0, 3)?,
            CopulaModel::gumbel(3.0, 5)?,
            CopulaModel::frank(3.0, 3)?,
        ];
        for family in PARAMETRIC {
            for theta in default_theta_grid(family) {
                models.push(CopulaModel::new(family, Some(theta), 2)?);
            }
        }
        Ok(models)
    }

    fn kendall_diagonal(&mut self) -> Result<()> {
        let name = "kendall/diagonal";
        if !self.enabled(name) {
            return Ok(());
        }
        let grid = self.alpha_grid();
        let mut worst = f64::NEG_INFINITY;
        for model in self.kendall_models()? {
            let k = KendallDistribution::new(model);
            for &alpha in &grid {
                let v = k.cdf(alpha)?;
                worst = worst.max(alpha - v).max(v - 1.0);
            }
        }
        self.record(name, ORDER_TOL, worst);
        Ok(())
    }

    fn kendall_general_vs_bivariate(&mut self) -> Result<()> {
        let name = "kendall/general-vs-bivariate";
        if !self.enabled(name) {
            return Ok(());
        }
        let grid = self.alpha_grid();
        let mut worst: f64 = 0.0;
        for family in PARAMETRIC {
            for theta in self.theta_grid(family) {
                let model = CopulaModel::new(family, Some(theta), 2)?;
                let shortcut = KendallDistribution::new(model);
                for &alpha in &grid {
                    let diff =
                        (kendall::general_form(&model, alpha)? - shortcut.cdf(alpha)?).abs();
                    worst = worst.max(diff);
                }
            }
        }
        self.record(name, 1e-10, worst);
        Ok(())
    }

    fn kendall_theta_pointwise(&mut self) -> Result<()> {
        let grid = self.alpha_grid();
        for family in PARAMETRIC {
            let name = format!("kendall/theta-pointwise/{family}");
            if !self.enabled(&name) {
                continue;
            }
            let thetas = self.theta_grid(family);
            let mut worst = f64::NEG_INFINITY;
            for pair in thetas.windows(2) {
                let low = KendallDistribution::new(CopulaModel::new(family, Some(pair[0]), 2)?);
                let high = KendallDistribution::new(CopulaModel::new(family, Some(pair[1]), 2)?);
                for &alpha in &grid {
                    // larger theta pushes K down (stronger dependence)
                    worst = worst.max(high.cdf(alpha)? - low.cdf(alpha)?);
                }
            }
            self.record(&name, ORDER_TOL, worst);
        }
        Ok(())
    }

    fn kendall_stop_loss_order(&mut self) -> Result<()> {
        let t_grid: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
        for family in PARAMETRIC {
            let name = format!("kendall/stop-loss-order/{family}");
            if !self.enabled(&name) {
                continue;
            }
            let thetas = self.theta_grid(family);
            let mut worst = f64::NEG_INFINITY;
            for pair in thetas.windows(2) {
                let low = CopulaModel::new(family, Some(pair[0]), 2)?;
                let high = CopulaModel::new(family, Some(pair[1]), 2)?;
                let report = check_sl_order_kendall(&low, &high, &t_grid)?;
                let excess = report
                    .violations
                    .iter()
                    .map(|v| v.lhs - v.rhs)
                    .fold(0.0, f64::max);
                worst = worst.max(excess);
            }
            self.record(&name, ORDER_TOL, worst);
        }
        Ok(())
    }

    fn kendall_tau_monotone(&mut self) -> Result<()> {
        let name = "kendall/tau-clayton-increasing";
        if !self.enabled(name) {
            return Ok(());
        }
        let thetas = [-0.5, 0.5, 1.0, 2.0, 5.0, 10.0];
        let mut worst = f64::NEG_INFINITY;
        let mut last = f64::NEG_INFINITY;
        for theta in thetas {
            let tau = KendallDistribution::new(CopulaModel::clayton(theta, 2)?).tau()?;
            worst = worst.max(last - tau);
            last = tau;
        }
        self.record(name, ORDER_TOL, worst);
        Ok(())
    }

    fn kendall_theta_slope(&mut self) -> Result<()> {
        let alphas: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
        let grids: [(Family, &[f64]); 4] = [
            (Family::Clayton, &[-0.5, 0.5, 2.0, 5.0]),
            (Family::Gumbel, &[1.5, 2.0, 4.0]),
            (Family::Frank, &[-5.0, -1.0, 1.0, 3.0]),
            (Family::AliMikhailHaq, &[-0.5, 0.0, 0.5]),
        ];
        for (family, thetas) in grids {
            let name = format!("kendall/theta-slope/{family}");
            if !self.enabled(&name) {
                continue;
            }
            let mut worst = f64::NEG_INFINITY;
            for &theta in thetas {
                for &alpha in &alphas {
                    worst = worst.max(kendall::kendall_theta_slope(family, alpha, theta, 1e-4)?);
                }
            }
            self.record(&name, ORDER_TOL, worst);
        }
        Ok(())
    }

    fn kendall_empirical(&mut self) -> Result<()> {
        let n = self.config.mc_samples;
        let tol = 3.0 / (n as f64).sqrt();
        let grid = self.alpha_grid();
        let cases = [
            (CopulaModel::clayton(2.0, 2)?, 1u64),
            (CopulaModel::gumbel(2.0, 2)?, 2),
            (CopulaModel::independence(2)?, 3),
        ];
        for (model, offset) in cases {
            let name = format!("kendall/empirical/{}", model.family());
            if !self.enabled(&name) {
                continue;
            }
            let sample = model.sample(n, self.config.seed.wrapping_add(offset))?;
            let empirical = kendall::kendall_empirical(&sample, &model, &grid)?;
            let k = KendallDistribution::new(model);
            let mut sup: f64 = 0.0;
            for (e, &alpha) in empirical.iter().zip(&grid) {
                sup = sup.max((e - k.cdf(alpha)?).abs());
            }
            self.record(&name, tol, sup);
        }
        Ok(())
    }

    fn margin_sets(dim: usize) -> Result<Vec<Vec<Margin>>> {
        let pool = [
            Margin::uniform(),
            Margin::exponential(1.0)?,
            Margin::log_normal(0.0, 0.5)?,
            Margin::pareto(1.0, 2.5)?,
        ];
        Ok(pool
            .iter()
            .map(|&first| {
                let mut set = vec![first];
                // rotate through the pool so mixed margins are exercised
                for i in 1..dim {
                    set.push(pool[i % pool.len()]);
                }
                set
            })
            .collect())
    }

    fn var_sandwich(&mut self) -> Result<()> {
        let alphas = [0.1, 0.25, 0.5, 0.75, 0.9];
        for family in PARAMETRIC {
            let name = format!("var/sandwich/{family}");
            if !self.enabled(&name) {
                continue;
            }
            let mut worst = f64::NEG_INFINITY;
            for theta in self.theta_grid(family) {
                let model = CopulaModel::new(family, Some(theta), 2)?;
                for margins in Self::margin_sets(2)? {
                    let lower_p = Portfolio::new(model, margins.clone())?;
                    let upper_p = Portfolio::with_survival_copula(model, margins.clone())?;
                    for &alpha in &alphas {
                        let lower = lower_var_quadrature(&lower_p, alpha, DEFAULT_NODES)?;
                        let upper = upper_var_quadrature(&upper_p, alpha, DEFAULT_NODES)?;
                        for (i, margin) in margins.iter().enumerate() {
                            let mid = marginal_var(margin, alpha)?;
                            worst = worst
                                .max(mid - lower.components[i])
                                .max(upper.components[i] - mid);
                        }
                    }
                }
            }
            self.record(&name, 1e-8, worst);
        }
        Ok(())
    }

    fn var_comonotonic_collapse(&mut self) -> Result<()> {
        let name = "var/comonotonic-collapse";
        if !self.enabled(name) {
            return Ok(());
        }
        let mut worst: f64 = 0.0;
        for margins in [
            vec![Margin::uniform(), Margin::uniform()],
            vec![Margin::exponential(1.0)?, Margin::exponential(0.5)?],
        ] {
            let model = CopulaModel::comonotonic(2)?;
            let portfolio = Portfolio::new(model, margins.clone())?;
            for alpha in [0.1, 0.5, 0.95] {
                let lower = lower_var_closed(&portfolio, alpha)?;
                let upper = upper_var_closed(&portfolio, alpha)?;
                for (i, margin) in margins.iter().enumerate() {
                    let q = marginal_var(margin, alpha)?;
                    worst = worst
                        .max((lower.components[i] - q).abs())
                        .max((upper.components[i] - q).abs());
                }
            }
        }
        self.record(name, 0.0, worst);
        Ok(())
    }

    fn var_homogeneity_translation(&mut self) -> Result<()> {
        let scales: [[f64; 2]; 2] = [[2.0, 0.5], [1.0, 3.0]];
        let shifts: [[f64; 2]; 1] = [[0.1, 1.0]];
        let models = [CopulaModel::clayton(2.0, 2)?, CopulaModel::frank(3.0, 2)?];
        let margins = [Margin::uniform(), Margin::uniform()];
        let alphas = [0.25, 0.5, 0.75];

        let name = "var/homogeneity";
        if self.enabled(name) {
            let mut worst: f64 = 0.0;
            for model in models {
                for c in scales {
                    for &alpha in &alphas {
                        worst = worst.max(affine_invariance_gap(&model, &margins, alpha, c, [0.0; 2])?);
                    }
                }
            }
            self.record(name, 1e-8, worst);
        }

        let name = "var/translation";
        if self.enabled(name) {
            let mut worst: f64 = 0.0;
            for model in models {
                for shift in shifts {
                    for &alpha in &alphas {
                        worst = worst
                            .max(affine_invariance_gap(&model, &margins, alpha, [1.0; 2], shift)?);
                    }
                }
            }
            self.record(name, 1e-8, worst);
        }

        // Monte Carlo variant of the scaling law: c X with exponential
        // margins is again an exponential portfolio with rates 1/c.
        let name = "var/homogeneity-mc";
        if self.enabled(name) {
            let model = CopulaModel::clayton(2.0, 2)?;
            let scale = [2.0, 0.5];
            let base = vec![Margin::exponential(1.0)?; 2];
            let scaled = vec![
                Margin::exponential(1.0 / scale[0])?,
                Margin::exponential(1.0 / scale[1])?,
            ];
            let mut worst: f64 = f64::NEG_INFINITY;
            let n = self.config.mc_samples;
            let seed = self.config.seed.wrapping_add(21);
            for orthant in [Orthant::Lower, Orthant::Upper] {
                let (a, b) = match orthant {
                    Orthant::Lower => (
                        lower_var_monte_carlo(
                            &Portfolio::new(model, base.clone())?,
                            0.5,
                            n,
                            0.005,
                            seed,
                        )?,
                        lower_var_monte_carlo(
                            &Portfolio::new(model, scaled.clone())?,
                            0.5,
                            n,
                            0.005,
                            seed,
                        )?,
                    ),
                    Orthant::Upper => (
                        upper_var_monte_carlo(
                            &Portfolio::with_survival_copula(model, base.clone())?,
                            0.5,
                            n,
                            0.005,
                            seed,
                        )?,
                        upper_var_monte_carlo(
                            &Portfolio::with_survival_copula(model, scaled.clone())?,
                            0.5,
                            n,
                            0.005,
                            seed,
                        )?,
                    ),
                };
                let se_a = a.stderr.as_ref().expect("monte carlo carries stderr");
                let se_b = b.stderr.as_ref().expect("monte carlo carries stderr");
                for i in 0..2 {
                    let allowance = 3.0 * (scale[i] * se_a[i] + se_b[i]);
                    let gap = (b.components[i] - scale[i] * a.components[i]).abs();
                    worst = worst.max(gap - allowance);
                }
            }
            self.record(name, 0.0, worst);
        }
        Ok(())
    }

    fn var_reflection(&mut self) -> Result<()> {
        let grid = self.alpha_grid();
        let cases = [
            CopulaModel::clayton(2.0, 2)?,
            CopulaModel::gumbel(2.0, 2)?,
            CopulaModel::frank(3.0, 2)?,
            CopulaModel::ali_mikhail_haq(0.5)?,
        ];
        for model in cases {
            let name = format!("var/reflection/{}", model.family());
            if !self.enabled(&name) {
                continue;
            }
            let margins = vec![Margin::uniform(); 2];
            let lower_p = Portfolio::new(model, margins.clone())?;
            let upper_p = Portfolio::with_survival_copula(model, margins)?;
            let mut worst: f64 = 0.0;
            for &alpha in &grid {
                let upper = upper_var_quadrature(&upper_p, alpha, DEFAULT_NODES)?;
                let lower = lower_var_quadrature(&lower_p, 1.0 - alpha, DEFAULT_NODES)?;
                worst = worst.max((upper.components[0] - (1.0 - lower.components[0])).abs());
            }
            self.record(&name, 1e-8, worst);
        }
        Ok(())
    }

    fn var_alpha_monotone(&mut self) -> Result<()> {
        let grid = self.alpha_grid();
        let archimedean = [
            CopulaModel::clayton(2.0, 2)?,
            CopulaModel::clayton(-0.5, 2)?,
            CopulaModel::gumbel(2.0, 2)?,
            CopulaModel::frank(3.0, 2)?,
            CopulaModel::frank(-3.0, 2)?,
            CopulaModel::ali_mikhail_haq(0.5)?,
            CopulaModel::independence(2)?,
            CopulaModel::independence(3)?,
            CopulaModel::clayton(2.0, 3)?,
        ];
        for model in archimedean {
            let theta_tag = model
                .theta()
                .map(|t| format!(":{t}"))
                .unwrap_or_default();
            let name = format!(
                "var/alpha-monotone/{}{}-d{}",
                model.family(),
                theta_tag,
                model.dim()
            );
            if !self.enabled(&name) {
                continue;
            }
            let margins = vec![Margin::uniform(); model.dim()];
            let lower_p = Portfolio::new(model, margins.clone())?;
            let upper_p = Portfolio::with_survival_copula(model, margins)?;
            let mut worst = f64::NEG_INFINITY;
            let mut last_lower = f64::NEG_INFINITY;
            let mut last_upper = f64::NEG_INFINITY;
            for &alpha in &grid {
                let lo = lower_var_quadrature(&lower_p, alpha, DEFAULT_NODES)?.components[0];
                let up = upper_var_quadrature(&upper_p, alpha, DEFAULT_NODES)?.components[0];
                worst = worst.max(last_lower - lo).max(last_upper - up);
                last_lower = lo;
                last_upper = up;
            }
            self.record(&name, ORDER_TOL, worst);
        }
        for model in [CopulaModel::comonotonic(2)?, CopulaModel::counter_monotonic()?] {
            let name = format!("var/alpha-monotone/{}", model.family());
            if !self.enabled(&name) {
                continue;
            }
            let margins = vec![Margin::uniform(); 2];
            let lower_p = Portfolio::new(model, margins.clone())?;
            let upper_p = Portfolio::with_survival_copula(model, margins)?;
            let mut worst = f64::NEG_INFINITY;
            let mut last_lower = f64::NEG_INFINITY;
            let mut last_upper = f64::NEG_INFINITY;
            for &alpha in &grid {
                let lo = lower_var_closed(&lower_p, alpha)?.components[0];
                let up = upper_var_closed(&upper_p, alpha)?.components[0];
                worst = worst.max(last_lower - lo).max(last_upper - up);
                last_lower = lo;
                last_upper = up;
            }
            self.record(&name, ORDER_TOL, worst);
        }
        Ok(())
    }

    fn var_theta_monotone(&mut self) -> Result<()> {
        let alphas = [0.3, 0.7];
        let margin_sets = [
            vec![Margin::uniform(), Margin::uniform()],
            vec![Margin::exponential(1.0)?, Margin::exponential(1.0)?],
        ];
        for family in PARAMETRIC {
            let name = format!("var/theta-monotone/{family}");
            if !self.enabled(&name) {
                continue;
            }
            let thetas = self.theta_grid(family);
            let mut worst = f64::NEG_INFINITY;
            for margins in &margin_sets {
                for &alpha in &alphas {
                    let mut last_lower = f64::INFINITY;
                    let mut last_upper = f64::NEG_INFINITY;
                    for &theta in &thetas {
                        let model = CopulaModel::new(family, Some(theta), 2)?;
                        let lower_p = Portfolio::new(model, margins.clone())?;
                        let upper_p = Portfolio::with_survival_copula(model, margins.clone())?;
                        let lo = lower_var_quadrature(&lower_p, alpha, DEFAULT_NODES)?.components[0];
                        let up = upper_var_quadrature(&upper_p, alpha, DEFAULT_NODES)?.components[0];
                        // lower-orthant VaR falls, upper-orthant VaR rises in theta
                        worst = worst.max(lo - last_lower).max(last_upper - up);
                        last_lower = lo;
                        last_upper = up;
                    }
                }
            }
            self.record(&name, ORDER_TOL, worst);
        }
        Ok(())
    }

    fn var_closed_vs_quadrature(&mut self) -> Result<()> {
        let name = "var/cross-route/closed-quadrature";
        if !self.enabled(name) {
            return Ok(());
        }
        let alphas = [0.1, 0.25, 0.5, 0.75, 0.9];
        let mut cases: Vec<CopulaModel> = vec![
            CopulaModel::independence(2)?,
            CopulaModel::independence(3)?,
            CopulaModel::ali_mikhail_haq(-0.5)?,
            CopulaModel::ali_mikhail_haq(0.5)?,
            CopulaModel::clayton(-1.0, 2)?,
        ];
        for theta in [-0.5, 0.5, 2.0, 10.0] {
            cases.push(CopulaModel::clayton(theta, 2)?);
        }
        for theta in [-0.25, 1.0, 3.0] {
            cases.push(CopulaModel::clayton(theta, 3)?);
        }
        let mut worst: f64 = 0.0;
        for model in cases {
            let portfolio = Portfolio::new(model, vec![Margin::uniform(); model.dim()])?;
            for &alpha in &alphas {
                let closed = if model.family() == Family::Clayton && model.theta() == Some(-1.0) {
                    // the theta = -1 boundary is the counter-monotonic entry
                    var_closed_form(Family::CounterMonotonic, None, alpha, 2)?
                } else {
                    var_closed_form(model.family(), model.theta(), alpha, model.dim())?
                };
                let quad = lower_var_quadrature(&portfolio, alpha, DEFAULT_NODES)?;
                worst = worst.max((quad.components[0] - closed).abs());
            }
        }
        self.record(name, 1e-8, worst);
        Ok(())
    }

    fn var_mc_vs_quadrature(&mut self) -> Result<()> {
        let name = "var/cross-route/mc-quadrature";
        if !self.enabled(name) {
            return Ok(());
        }
        let cases = [
            (
                CopulaModel::clayton(2.0, 2)?,
                vec![Margin::uniform(), Margin::uniform()],
                11u64,
            ),
            (
                CopulaModel::frank(3.0, 2)?,
                vec![Margin::exponential(1.0)?, Margin::exponential(1.0)?],
                12,
            ),
        ];
        let mut worst: f64 = 0.0;
        for (model, margins, offset) in cases {
            let portfolio = Portfolio::new(model, margins)?;
            let quad = lower_var_quadrature(&portfolio, 0.5, DEFAULT_NODES)?;
            let mc = lower_var_monte_carlo(
                &portfolio,
                0.5,
                self.config.mc_samples,
                0.005,
                self.config.seed.wrapping_add(offset),
            )?;
            let stderr = mc.stderr.as_ref().expect("monte carlo carries stderr");
            for ((se, mc_c), quad_c) in stderr.iter().zip(&mc.components).zip(&quad.components) {
                let allowance = (3.0 * se).max(0.01);
                worst = worst.max((mc_c - quad_c).abs() - allowance);
            }
        }
        self.record(name, 0.0, worst);
        Ok(())
    }

    fn var_independence_integral(&mut self) -> Result<()> {
        let name = "var/independence-integral";
        if !self.enabled(name) {
            return Ok(());
        }
        let model = CopulaModel::independence(2)?;
        let mut worst: f64 = 0.0;
        for margin in [Margin::uniform(), Margin::exponential(1.0)?] {
            let portfolio = Portfolio::new(model, vec![margin, margin])?;
            for alpha in [0.25, 0.5, 0.75, 0.9] {
                let quad = lower_var_quadrature(&portfolio, alpha, DEFAULT_NODES)?.components[0];
                let integral = adaptive_simpson(
                    &|gamma: f64| margin.quantile(gamma).unwrap_or(f64::NAN) / gamma,
                    alpha,
                    1.0 - 1e-12,
                    1e-9,
                );
                let direct = integral / (-alpha.ln());
                worst = worst.max((quad - direct).abs());
            }
        }
        self.record(name, 1e-6, worst);
        Ok(())
    }

    fn var_marginal_shift(&mut self) -> Result<()> {
        let name = "var/marginal-shift";
        if !self.enabled(name) {
            return Ok(());
        }
        let model = CopulaModel::clayton(2.0, 2)?;
        // Exponential(0.5) dominates Exponential(1) stochastically
        let base = vec![Margin::exponential(1.0)?, Margin::exponential(1.0)?];
        let shifted = vec![Margin::exponential(0.5)?, Margin::exponential(1.0)?];
        let mut worst = f64::NEG_INFINITY;
        for alpha in [0.25, 0.5, 0.75] {
            for orthant in [Orthant::Lower, Orthant::Upper] {
                let (a, b) = match orthant {
                    Orthant::Lower => (
                        lower_var_quadrature(
                            &Portfolio::new(model, base.clone())?,
                            alpha,
                            DEFAULT_NODES,
                        )?,
                        lower_var_quadrature(
                            &Portfolio::new(model, shifted.clone())?,
                            alpha,
                            DEFAULT_NODES,
                        )?,
                    ),
                    Orthant::Upper => (
                        upper_var_quadrature(
                            &Portfolio::with_survival_copula(model, base.clone())?,
                            alpha,
                            DEFAULT_NODES,
                        )?,
                        upper_var_quadrature(
                            &Portfolio::with_survival_copula(model, shifted.clone())?,
                            alpha,
                            DEFAULT_NODES,
                        )?,
                    ),
                };
                // component 1 must rise by a real margin, component 2 must not move
                worst = worst.max(a.components[0] + 0.01 - b.components[0]);
                worst = worst.max((a.components[1] - b.components[1]).abs());
            }
        }
        self.record(name, ORDER_TOL, worst);
        Ok(())
    }

    fn prd_conditional_cdf(&mut self) -> Result<()> {
        let models = [
            CopulaModel::clayton(2.0, 2)?,
            CopulaModel::clayton(0.5, 3)?,
            CopulaModel::gumbel(2.0, 2)?,
            CopulaModel::frank(3.0, 2)?,
            CopulaModel::ali_mikhail_haq(0.5)?,
            CopulaModel::independence(2)?,
        ];
        for model in models {
            let name = format!("orders/prd/{}-d{}", model.family(), model.dim());
            if !self.enabled(&name) {
                continue;
            }
            let mut worst = f64::NEG_INFINITY;
            for i in 1..10 {
                let u = i as f64 / 10.0;
                let mut last = f64::INFINITY;
                for j in 1..40 {
                    let alpha = j as f64 / 40.0;
                    // P(U <= u | C(U) = alpha) falls as the level rises
                    let v = conditional_marginal_cdf(&model, u, alpha)?;
                    worst = worst.max(v - last);
                    last = v;
                }
            }
            self.record(&name, ORDER_TOL, worst);
        }
        Ok(())
    }
}

/// Largest deviation of VaR(c * X + shift) from c * VaR(X) + shift across
/// both orthants, computed through the quadrature representation with
/// transformed quantile functions.
fn affine_invariance_gap(
    model: &CopulaModel,
    margins: &[Margin; 2],
    alpha: f64,
    scale: [f64; 2],
    shift: [f64; 2],
) -> Result<f64> {
    let mut worst: f64 = 0.0;

    let base = Portfolio::new(*model, margins.to_vec())?;
    let lower = lower_var_quadrature(&base, alpha, DEFAULT_NODES)?;
    let transforms: Vec<_> = margins
        .iter()
        .zip(scale.iter().zip(&shift))
        .map(|(m, (&c, &b))| move |u: f64| Ok(c * m.quantile(u)? + b))
        .collect();
    let transformed = beta_mean_quadrature(model, alpha, &transforms, DEFAULT_NODES)?;
    for i in 0..2 {
        let expected = scale[i] * lower.components[i] + shift[i];
        worst = worst.max((transformed[i] - expected).abs());
    }

    let survival = Portfolio::with_survival_copula(*model, margins.to_vec())?;
    let upper = upper_var_quadrature(&survival, alpha, DEFAULT_NODES)?;
    let transforms: Vec<_> = margins
        .iter()
        .zip(scale.iter().zip(&shift))
        .map(|(m, (&c, &b))| move |u: f64| Ok(c * m.survival_quantile(u)? + b))
        .collect();
    let transformed = beta_mean_quadrature(model, 1.0 - alpha, &transforms, DEFAULT_NODES)?;
    for i in 0..2 {
        let expected = scale[i] * upper.components[i] + shift[i];
        worst = worst.max((transformed[i] - expected).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn st_order_examples() {
        let grid: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let exp1 = Margin::exponential(1.0).unwrap();
        let exp_half = Margin::exponential(0.5).unwrap();
        let report =
            check_st_order(|p| exp1.quantile(p), |p| exp_half.quantile(p), &grid).unwrap();
        assert!(report.passed);

        let report = check_st_order(|p| exp1.quantile(p), |p| exp1.quantile(p), &grid).unwrap();
        assert!(report.passed && report.violations.is_empty());

        let uni = Margin::uniform();
        let exp10 = Margin::exponential(10.0).unwrap();
        let report = check_st_order(|p| uni.quantile(p), |p| exp10.quantile(p), &grid).unwrap();
        assert!(!report.passed);
        assert!(report.violations.iter().any(|v| (v.point - 0.5).abs() < 0.3));

        // antisymmetry up to tolerance: strict dominance cannot hold both ways
        let forward =
            check_st_order(|p| exp1.quantile(p), |p| exp_half.quantile(p), &grid).unwrap();
        let backward =
            check_st_order(|p| exp_half.quantile(p), |p| exp1.quantile(p), &grid).unwrap();
        assert!(forward.passed && !backward.passed);
    }

    #[test]
    fn sl_order_examples() {
        let grid: Vec<f64> = (0..20).map(|i| i as f64 / 20.0).collect();
        let c1 = CopulaModel::clayton(1.0, 2).unwrap();
        let c3 = CopulaModel::clayton(3.0, 2).unwrap();
        assert!(check_sl_order_kendall(&c1, &c3, &grid).unwrap().passed);
        assert!(check_sl_order_kendall(&c1, &c1, &grid).unwrap().passed);
        assert!(!check_sl_order_kendall(&c3, &c1, &grid).unwrap().passed);

        let como = CopulaModel::comonotonic(2).unwrap();
        assert!(matches!(
            check_sl_order_kendall(&c1, &como, &grid),
            Err(Error::UnsupportedFamily { .. })
        ));
    }

    #[test]
    fn sl_order_agrees_with_sampled_stop_loss() {
        for theta in [1.0, 3.0] {
            let model = CopulaModel::clayton(theta, 2).unwrap();
            let kendall = KendallDistribution::new(model);
            let sample = model.sample(100_000, 55).unwrap();
            for t in [0.0, 0.3, 0.6] {
                let mut sum = 0.0;
                let mut sq = 0.0;
                for row in sample.rows() {
                    let excess = (model.cdf(row).unwrap() - t).max(0.0);
                    sum += excess;
                    sq += excess * excess;
                }
                let n = sample.len() as f64;
                let mean = sum / n;
                let se = ((sq / n - mean * mean) / n).sqrt();
                let exact = kendall.stop_loss(t).unwrap();
                assert!(
                    (mean - exact).abs() <= 3.0 * se + 1e-4,
                    "theta {theta} t {t}: {mean} vs {exact} (se {se})"
                );
            }
        }
    }

    #[test]
    fn suite_filter_restricts_execution() {
        let config = SuiteConfig {
            only: Some("sandwich".into()),
            alpha_points: 9,
            mc_samples: 10_000,
            ..SuiteConfig::default()
        };
        let report = run_suite(&config).unwrap();
        assert!(!report.checks.is_empty());
        assert!(report.checks.iter().all(|c| c.name.contains("sandwich")));
        assert!(report.all_passed(), "{}", report.render_text());
    }

    #[test]
    fn suite_negative_control_fails() {
        let config = SuiteConfig {
            only: Some("theta-monotone/clayton".into()),
            theta_grid_override: Some(vec![10.0, 2.0, 0.5]),
            alpha_points: 9,
            mc_samples: 10_000,
            ..SuiteConfig::default()
        };
        let report = run_suite(&config).unwrap();
        assert_eq!(report.checks.len(), 1);
        assert!(!report.all_passed());
        assert!(report.failures() > 0);
    }

    #[test]
    fn suite_rejects_bad_config() {
        let config = SuiteConfig {
            alpha_points: 1,
            ..SuiteConfig::default()
        };
        assert!(run_suite(&config).is_err());
    }

    #[test]
    fn report_rendering_is_line_oriented() {
        let report = SuiteReport {
            seed: 7,
            checks: vec![CheckResult {
                name: "demo".into(),
                passed: true,
                max_violation: 0.0,
                tolerance: 1e-9,
            }],
        };
        let text = report.render_text();
        assert!(text.lines().count() == 2);
        assert!(text.starts_with("PASS demo"));
        assert!(text.contains("seed 7"));
    }
}
