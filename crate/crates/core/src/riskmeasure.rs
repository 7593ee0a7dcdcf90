//! Lower- and upper-orthant multivariate Value-at-Risk, computed three ways:
//! tabulated closed forms (uniform margins), deterministic quadrature over the
//! Beta(1, d-1) simplex representation, and Monte Carlo band conditioning.

use std::fmt;
use std::str::FromStr;

use crate::copula::{CopulaModel, Family, GeneratorKind, THETA_EPS};
use crate::error::{Error, Result};
use crate::margins::Margin;
use crate::numeric::gauss_legendre_unit;

/// Two estimates of the conditional-mean integral must agree this closely
/// before the quadrature ladder stops refining.
const QUAD_TOL: f64 = 1e-9;

/// The conditioning band must capture at least this many draws.
const MIN_BAND_ROWS: usize = 200;

/// Widening attempts before the Monte Carlo band gives up.
const MAX_DOUBLINGS: u32 = 3;

/// Geometric quadrature panels halving toward s = 0, where the generator
/// layer and the margin tail concentrate.
const QUAD_PANELS: u32 = 45;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Orthant {
    Lower,
    Upper,
}

impl fmt::Display for Orthant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orthant::Lower => "lower",
            Orthant::Upper => "upper",
        })
    }
}

impl FromStr for Orthant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lower" => Ok(Orthant::Lower),
            "upper" => Ok(Orthant::Upper),
            other => Err(Error::InvalidParameter(format!(
                "unknown orthant `{other}` (expected lower|upper)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Method {
    Closed,
    Quadrature,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Closed => "closed",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "closed" => Ok(Method::Closed),
            "quadrature" => Ok(Method::Quadrature),
            "monte-carlo" | "mc" => Ok(Method::MonteCarlo),
            other => Err(Error::InvalidParameter(format!(
                "unknown method `{other}` (expected closed|quadrature|monte-carlo)"
            ))),
        }
    }
}

/// A d-component risk-measure result.
#[derive(Debug, Clone)]
pub struct VarVector {
    pub components: Vec<f64>,
    pub alpha: f64,
    pub orthant: Orthant,
    pub method: Method,
    /// Standard errors, present for Monte Carlo estimates only.
    pub stderr: Option<Vec<f64>>,
}

/// A risk vector: a copula model plus one margin per component. The model
/// describes either the joint CDF (for lower-orthant work) or the joint
/// survival function (for upper-orthant work); the constructor records which.
#[derive(Debug, Clone)]
pub struct Portfolio {
    model: CopulaModel,
    margins: Vec<Margin>,
    survival_model: bool,
}

impl Portfolio {
    /// The model is the copula of the vector; used by lower-orthant routes.
    pub fn new(model: CopulaModel, margins: Vec<Margin>) -> Result<Self> {
        Self::build(model, margins, false)
    }

    /// The model is the survival copula of the vector; used by upper-orthant
    /// routes.
    pub fn with_survival_copula(model: CopulaModel, margins: Vec<Margin>) -> Result<Self> {
        Self::build(model, margins, true)
    }

    fn build(model: CopulaModel, margins: Vec<Margin>, survival: bool) -> Result<Self> {
        if margins.len() != model.dim() {
            return Err(Error::InvalidParameter(format!(
                "{} margins supplied for a {}-dimensional model",
                margins.len(),
                model.dim()
            )));
        }
        Ok(Portfolio {
            model,
            margins,
            survival_model: survival,
        })
    }

    pub fn model(&self) -> &CopulaModel {
        &self.model
    }

    pub fn margins(&self) -> &[Margin] {
        &self.margins
    }

    pub fn describes_survival_copula(&self) -> bool {
        self.survival_model
    }

    fn dim(&self) -> usize {
        self.model.dim()
    }

    /// The Fréchet bounds and the independence copula equal their own
    /// survival copulas, so either declaration is acceptable for them.
    fn self_dual(&self) -> bool {
        matches!(
            self.model.family(),
            Family::Independence | Family::Comonotonic | Family::CounterMonotonic
        )
    }

    fn require_direct(&self) -> Result<()> {
        if self.survival_model && !self.self_dual() {
            Err(Error::InvalidParameter(
                "lower-orthant evaluation needs the model to describe the copula, \
                 but this portfolio declares a survival copula"
                    .into(),
            ))
        } else {
            Ok(())
        }
    }

    fn require_survival(&self) -> Result<()> {
        if !self.survival_model && !self.self_dual() {
            Err(Error::InvalidParameter(
                "upper-orthant evaluation needs the model to describe the survival copula; \
                 construct the portfolio with `with_survival_copula`"
                    .into(),
            ))
        } else {
            Ok(())
        }
    }

    fn uniform_margins(&self) -> bool {
        self.margins.iter().all(|m| *m == Margin::Uniform01)
    }
}

/// Univariate Value-at-Risk of one margin: its quantile at `alpha`.
pub fn marginal_var(margin: &Margin, alpha: f64) -> Result<f64> {
    margin.quantile(alpha)
}

/// P(U_k <= u | C(U) = alpha) = (1 - phi(u)/phi(alpha))^{d-1} for
/// alpha < u < 1; zero at or below alpha, one at or above 1.
pub fn conditional_marginal_cdf(model: &CopulaModel, u: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let gen = model.generator_kind()?;
    if u <= alpha {
        return Ok(0.0);
    }
    if u >= 1.0 {
        return Ok(1.0);
    }
    let ratio = gen.phi(u) / gen.phi(alpha);
    Ok((1.0 - ratio)
        .max(0.0)
        .powi(model.dim() as i32 - 1)
        .clamp(0.0, 1.0))
}

/// Tabulated lower-orthant VaR component for uniform margins.
///
/// Covers bivariate Clayton (including its counter-monotonic, independence,
/// Pi/(Sigma - Pi) and comonotonic parameter limits), bivariate
/// Ali-Mikhail-Haq, trivariate Clayton with its independence limit, and the
/// comonotonic copula in any dimension.
pub fn var_closed_form(
    family: Family,
    theta: Option<f64>,
    alpha: f64,
    dim: usize,
) -> Result<f64> {
    check_alpha(alpha)?;
    let no_form = || Error::NoClosedForm { family, dim };
    let th = theta.unwrap_or(f64::NAN);
    match (family, dim) {
        (Family::Comonotonic, _) => Ok(alpha),
        (Family::CounterMonotonic, 2) => Ok((1.0 + alpha) / 2.0),
        (Family::Independence, 2) => Ok(independence_2(alpha)),
        (Family::Independence, 3) => Ok(independence_3(alpha)),
        (Family::Clayton, 2) => {
            if th.abs() < THETA_EPS {
                Ok(independence_2(alpha))
            } else if (th - 1.0).abs() < THETA_EPS {
                Ok(alpha * alpha.ln() / (alpha - 1.0))
            } else {
                // theta/(theta-1) * (alpha^theta - alpha)/(alpha^theta - 1)
                let l = alpha.ln();
                Ok(th / (th - 1.0) * alpha * ((th - 1.0) * l).exp_m1() / (th * l).exp_m1())
            }
        }
        (Family::Clayton, 3) => {
            if th.abs() < THETA_EPS {
                Ok(independence_3(alpha))
            } else if (th - 0.5).abs() < THETA_EPS {
                let r = alpha.sqrt();
                Ok(2.0 * r - 2.0 * alpha * (r - 1.0 - alpha.ln() / 2.0) / ((1.0 - r) * (1.0 - r)))
            } else if (th - 1.0).abs() < THETA_EPS {
                let om = 1.0 - alpha;
                Ok(2.0 * alpha * (alpha - 1.0 - alpha.ln()) / (om * om))
            } else {
                // 2 theta ((theta-1) a^2t + (1-2 theta) a^t + theta a) over
                // (2 theta - 1)(theta - 1)(a^t - 1)^2, written in expm1 form
                // so the theta -> 0 limit does not cancel catastrophically
                let l = alpha.ln();
                let e1 = (th * l).exp_m1();
                let e2 = (2.0 * th * l).exp_m1();
                let num = th * (alpha - 1.0) + (th - 1.0) * e2 + (1.0 - 2.0 * th) * e1;
                let den = (2.0 * th - 1.0) * (th - 1.0) * e1 * e1;
                Ok(2.0 * th * num / den)
            }
        }
        (Family::AliMikhailHaq, 2) => {
            if th.abs() < THETA_EPS {
                Ok(independence_2(alpha))
            } else {
                let g = (-th * (1.0 - alpha)).ln_1p();
                Ok((th - 1.0) * g / (th * (g - alpha.ln())))
            }
        }
        _ => Err(no_form()),
    }
}

fn independence_2(alpha: f64) -> f64 {
    (alpha - 1.0) / alpha.ln()
}

fn independence_3(alpha: f64) -> f64 {
    let l = alpha.ln();
    -2.0 * (1.0 - alpha + l) / (l * l)
}

/// Closed-form lower-orthant VaR of a portfolio (uniform margins, except for
/// the comonotonic copula whose components are the marginal quantiles).
pub fn lower_var_closed(portfolio: &Portfolio, alpha: f64) -> Result<VarVector> {
    check_alpha(alpha)?;
    portfolio.require_direct()?;
    let components = closed_components(portfolio, alpha, Orthant::Lower)?;
    Ok(VarVector {
        components,
        alpha,
        orthant: Orthant::Lower,
        method: Method::Closed,
        stderr: None,
    })
}

/// Closed-form upper-orthant VaR. For uniform margins this is the point
/// reflection 1 - lower(1 - alpha) of the closed form; for the comonotonic
/// copula it is the vector of marginal quantiles.
pub fn upper_var_closed(portfolio: &Portfolio, alpha: f64) -> Result<VarVector> {
    check_alpha(alpha)?;
    portfolio.require_survival()?;
    let components = closed_components(portfolio, alpha, Orthant::Upper)?;
    Ok(VarVector {
        components,
        alpha,
        orthant: Orthant::Upper,
        method: Method::Closed,
        stderr: None,
    })
}

fn closed_components(portfolio: &Portfolio, alpha: f64, orthant: Orthant) -> Result<Vec<f64>> {
    let model = portfolio.model();
    if model.family() == Family::Comonotonic {
        return portfolio
            .margins()
            .iter()
            .map(|m| m.quantile(alpha))
            .collect();
    }
    if !portfolio.uniform_margins() {
        return Err(Error::NoClosedForm {
            family: model.family(),
            dim: model.dim(),
        });
    }
    let value = match orthant {
        Orthant::Lower => var_closed_form(model.family(), model.theta(), alpha, model.dim())?,
        Orthant::Upper => {
            1.0 - var_closed_form(model.family(), model.theta(), 1.0 - alpha, model.dim())?
        }
    };
    Ok(vec![value; model.dim()])
}

/// Lower-orthant VaR by deterministic quadrature of
/// E[F_i^{-1}(phi^{-1}(S phi(alpha)))], S ~ Beta(1, d-1).
pub fn lower_var_quadrature(portfolio: &Portfolio, alpha: f64, nodes: usize) -> Result<VarVector> {
    check_alpha(alpha)?;
    portfolio.require_direct()?;
    let quantiles: Vec<_> = portfolio
        .margins()
        .iter()
        .map(|m| move |u: f64| m.quantile(u))
        .collect();
    let components = beta_mean_quadrature(portfolio.model(), alpha, &quantiles, nodes)?;
    Ok(VarVector {
        components,
        alpha,
        orthant: Orthant::Lower,
        method: Method::Quadrature,
        stderr: None,
    })
}

/// Upper-orthant VaR by quadrature of
/// E[Fbar_i^{-1}(phi^{-1}(S phi(1 - alpha)))] where the model is the survival
/// copula of the portfolio.
pub fn upper_var_quadrature(portfolio: &Portfolio, alpha: f64, nodes: usize) -> Result<VarVector> {
    check_alpha(alpha)?;
    portfolio.require_survival()?;
    let quantiles: Vec<_> = portfolio
        .margins()
        .iter()
        .map(|m| move |u: f64| m.survival_quantile(u))
        .collect();
    let components = beta_mean_quadrature(portfolio.model(), 1.0 - alpha, &quantiles, nodes)?;
    Ok(VarVector {
        components,
        alpha,
        orthant: Orthant::Upper,
        method: Method::Quadrature,
        stderr: None,
    })
}

/// Conditional-mean quadrature shared by both orthants: for each transform q,
/// integrates q(phi^{-1}(s phi(level))) against the Beta(1, d-1) density
/// (d-1)(1-s)^{d-2} over s in (0, 1).
///
/// The generator boundary layer and the margin tail both sit at s = 0, so the
/// rule is a composite Gauss-Legendre scheme over panels halving toward 0;
/// the per-panel order doubles until two ladder rungs agree to 1e-9.
pub(crate) fn beta_mean_quadrature<Q>(
    model: &CopulaModel,
    level: f64,
    transforms: &[Q],
    nodes: usize,
) -> Result<Vec<f64>>
where
    Q: Fn(f64) -> Result<f64>,
{
    let gen = model.generator_kind()?;
    let phi_level = gen.phi(level);
    let dm1 = (model.dim() - 1) as f64;

    let mut order = (nodes / 16).clamp(4, 256);
    let mut prev: Option<Vec<f64>> = None;
    loop {
        let estimate = composite_pass(&gen, phi_level, dm1, transforms, order)?;
        if let Some(last) = prev {
            let diff = estimate
                .iter()
                .zip(&last)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if diff < QUAD_TOL || order >= 64 {
                return Ok(estimate);
            }
        }
        prev = Some(estimate);
        order *= 2;
    }
}

fn composite_pass<Q>(
    gen: &GeneratorKind,
    phi_level: f64,
    dm1: f64,
    transforms: &[Q],
    order: usize,
) -> Result<Vec<f64>>
where
    Q: Fn(f64) -> Result<f64>,
{
    let rule = gauss_legendre_unit(order);
    let mut acc = vec![0.0; transforms.len()];
    let mut hi = 1.0;
    for panel in 1..=QUAD_PANELS {
        let lo = if panel == QUAD_PANELS {
            0.0
        } else {
            (2.0f64).powi(-(panel as i32))
        };
        let width = hi - lo;
        for &(x, w) in &rule {
            let s = lo + width * x;
            let weight = w * width * dm1 * (1.0 - s).powf(dm1 - 1.0);
            let u = gen
                .phi_inv(s * phi_level)
                .clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
            for (sum, q) in acc.iter_mut().zip(transforms) {
                *sum += weight * q(u)?;
            }
        }
        hi = lo;
    }
    Ok(acc)
}

/// Lower-orthant VaR by the Feller band: the mean of draws whose joint CDF
/// value lands in (alpha, alpha + h], widening h when the band starves.
pub fn lower_var_monte_carlo(
    portfolio: &Portfolio,
    alpha: f64,
    n: usize,
    h: f64,
    seed: u64,
) -> Result<VarVector> {
    portfolio.require_direct()?;
    check_band(alpha, h, n)?;
    if let Some(components) = degenerate_band_bypass(portfolio, alpha, Orthant::Lower)? {
        return Ok(VarVector {
            components,
            alpha,
            orthant: Orthant::Lower,
            method: Method::Closed,
            stderr: None,
        });
    }
    let (components, stderr) = band_conditional_mean(portfolio, alpha, n, h, seed, Orthant::Lower)?;
    Ok(VarVector {
        components,
        alpha,
        orthant: Orthant::Lower,
        method: Method::MonteCarlo,
        stderr: Some(stderr),
    })
}

/// Upper-orthant VaR by the mirrored band: draws whose joint survival value
/// lands in [1 - alpha - h, 1 - alpha).
pub fn upper_var_monte_carlo(
    portfolio: &Portfolio,
    alpha: f64,
    n: usize,
    h: f64,
    seed: u64,
) -> Result<VarVector> {
    portfolio.require_survival()?;
    check_band(alpha, h, n)?;
    if let Some(components) = degenerate_band_bypass(portfolio, alpha, Orthant::Upper)? {
        return Ok(VarVector {
            components,
            alpha,
            orthant: Orthant::Upper,
            method: Method::Closed,
            stderr: None,
        });
    }
    let (components, stderr) = band_conditional_mean(portfolio, alpha, n, h, seed, Orthant::Upper)?;
    Ok(VarVector {
        components,
        alpha,
        orthant: Orthant::Upper,
        method: Method::MonteCarlo,
        stderr: Some(stderr),
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            name: "alpha",
            value: alpha,
            range: "(0, 1)",
        })
    }
}

fn check_band(alpha: f64, h: f64, n: usize) -> Result<()> {
    check_alpha(alpha)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "band width must be positive, got {h}"
        )));
    }
    if alpha + h >= 1.0 {
        return Err(Error::OutOfDomain {
            name: "alpha + h",
            value: alpha + h,
            range: "(0, 1)",
        });
    }
    if n < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "band conditioning needs at least 10000 draws, got {n}"
        )));
    }
    Ok(())
}

/// The Fréchet-bound models have degenerate Kendall distributions, so band
/// conditioning is ill-posed; both collapse to closed forms (the
/// counter-monotonic one only for uniform margins).
fn degenerate_band_bypass(
    portfolio: &Portfolio,
    alpha: f64,
    orthant: Orthant,
) -> Result<Option<Vec<f64>>> {
    match portfolio.model().family() {
        Family::Comonotonic => Ok(Some(closed_components(portfolio, alpha, orthant)?)),
        Family::CounterMonotonic => {
            if portfolio.uniform_margins() {
                Ok(Some(closed_components(portfolio, alpha, orthant)?))
            } else {
                Err(Error::NoClosedForm {
                    family: Family::CounterMonotonic,
                    dim: 2,
                })
            }
        }
        _ => Ok(None),
    }
}

fn band_conditional_mean(
    portfolio: &Portfolio,
    alpha: f64,
    n: usize,
    h: f64,
    seed: u64,
    orthant: Orthant,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let model = portfolio.model();
    let d = portfolio.dim();
    let sample = model.sample(n, seed)?;
    let mut joint = Vec::with_capacity(n);
    for row in sample.rows() {
        joint.push(model.cdf(row)?);
    }

    let mut rows_in_band = 0;
    let mut doublings = 0;
    loop {
        let width = h * (2.0f64).powi(doublings as i32);
        let (lo, hi, closed_low) = match orthant {
            // conditioning on F(X) = alpha through (alpha, alpha + width]
            Orthant::Lower => (alpha, alpha + width, false),
            // conditioning on Fbar(X) = 1 - alpha through [1-alpha-width, 1-alpha)
            Orthant::Upper => (1.0 - alpha - width, 1.0 - alpha, true),
        };
        if lo <= 0.0 || hi >= 1.0 {
            return Err(Error::BandStarvation {
                alpha,
                band: width,
                rows: rows_in_band,
                doublings,
            });
        }
        let in_band = |w: f64| {
            if closed_low {
                w >= lo && w < hi
            } else {
                w > lo && w <= hi
            }
        };
        rows_in_band = joint.iter().filter(|&&w| in_band(w)).count();
        if rows_in_band >= MIN_BAND_ROWS {
            let mut sums = vec![0.0; d];
            let mut sq_sums = vec![0.0; d];
            for (row, &w) in sample.rows().zip(&joint) {
                if !in_band(w) {
                    continue;
                }
                for i in 0..d {
                    let x = match orthant {
                        Orthant::Lower => portfolio.margins()[i].quantile(row[i])?,
                        Orthant::Upper => portfolio.margins()[i].survival_quantile(row[i])?,
                    };
                    sums[i] += x;
                    sq_sums[i] += x * x;
                }
            }
            let m = rows_in_band as f64;
            let means: Vec<f64> = sums.iter().map(|s| s / m).collect();
            let stderr: Vec<f64> = sq_sums
                .iter()
                .zip(&means)
                .map(|(sq, mean)| (((sq / m - mean * mean) * m / (m - 1.0)).max(0.0) / m).sqrt())
                .collect();
            return Ok((means, stderr));
        }
        if doublings == MAX_DOUBLINGS {
            return Err(Error::BandStarvation {
                alpha,
                band: width,
                rows: rows_in_band,
                doublings,
            });
        }
        doublings += 1;
    }
}
