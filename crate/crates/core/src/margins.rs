//! Univariate loss distributions: the quantile transforms that carry
//! copula-scale results onto the portfolio scale.
//!
//! Every accepted margin is supported on the nonnegative half-line, has a
//! strictly increasing absolutely continuous CDF there, and a finite mean
//! (Pareto therefore requires shape > 1).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::{norm_cdf, norm_quantile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Margin {
    Uniform01,
    Exponential { rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Pareto { scale: f64, shape: f64 },
}

impl Margin {
    pub fn uniform() -> Margin {
        Margin::Uniform01
    }

    pub fn exponential(rate: f64) -> Result<Margin> {
        if rate.is_finite() && rate > 0.0 {
            Ok(Margin::Exponential { rate })
        } else {
            Err(Error::InvalidParameter(format!(
                "exponential rate must be positive, got {rate}"
            )))
        }
    }

    pub fn log_normal(mu: f64, sigma: f64) -> Result<Margin> {
        if mu.is_finite() && sigma.is_finite() && sigma > 0.0 {
            Ok(Margin::LogNormal { mu, sigma })
        } else {
            Err(Error::InvalidParameter(format!(
                "lognormal needs finite mu and sigma > 0, got ({mu}, {sigma})"
            )))
        }
    }

    pub fn pareto(scale: f64, shape: f64) -> Result<Margin> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pareto scale must be positive, got {scale}"
            )));
        }
        if !(shape.is_finite() && shape > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "pareto shape must exceed 1 for a finite mean, got {shape}"
            )));
        }
        Ok(Margin::Pareto { scale, shape })
    }

    /// Quantile F^{-1}(p) for p in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::OutOfDomain {
                name: "p",
                value: p,
                range: "(0, 1)",
            });
        }
        Ok(match *self {
            Margin::Uniform01 => p,
            Margin::Exponential { rate } => -(-p).ln_1p() / rate,
            Margin::LogNormal { mu, sigma } => (mu + sigma * norm_quantile(p)).exp(),
            Margin::Pareto { scale, shape } => scale * (1.0 - p).powf(-1.0 / shape),
        })
    }

    /// Survival quantile: the value with survival probability `q`,
    /// i.e. quantile(1 - q).
    pub fn survival_quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::OutOfDomain {
                name: "q",
                value: q,
                range: "(0, 1)",
            });
        }
        self.quantile(1.0 - q)
    }

    /// Distribution function, defined on all of R.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Margin::Uniform01 => x.clamp(0.0, 1.0),
            Margin::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Margin::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    norm_cdf((x.ln() - mu) / sigma)
                }
            }
            Margin::Pareto { scale, shape } => {
                if x <= scale {
                    0.0
                } else {
                    1.0 - (scale / x).powf(shape)
                }
            }
        }
    }

    /// Closed-form mean (finite for every accepted parameterization).
    pub fn mean(&self) -> f64 {
        match *self {
            Margin::Uniform01 => 0.5,
            Margin::Exponential { rate } => 1.0 / rate,
            Margin::LogNormal { mu, sigma } => (mu + sigma * sigma / 2.0).exp(),
            Margin::Pareto { scale, shape } => scale * shape / (shape - 1.0),
        }
    }
}

impl fmt::Display for Margin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Margin::Uniform01 => write!(f, "uniform"),
            Margin::Exponential { rate } => write!(f, "exp:{rate}"),
            Margin::LogNormal { mu, sigma } => write!(f, "lognorm:{mu}:{sigma}"),
            Margin::Pareto { scale, shape } => write!(f, "pareto:{scale}:{shape}"),
        }
    }
}

impl FromStr for Margin {
    type Err = Error;

    /// Spec grammar: `uniform`, `exp:RATE`, `lognorm:MU:SIGMA`,
    /// `pareto:SCALE:SHAPE`.
    fn from_str(s: &str) -> Result<Margin> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = |s: &str| Error::InvalidParameter(format!("cannot parse margin spec `{s}`"));
        let num = |tok: &str| tok.trim().parse::<f64>().map_err(|_| bad(s));
        match parts.as_slice() {
            ["uniform"] => Ok(Margin::Uniform01),
            ["exp", rate] => Margin::exponential(num(rate)?),
            ["lognorm", mu, sigma] => Margin::log_normal(num(mu)?, num(sigma)?),
            ["pareto", scale, shape] => Margin::pareto(num(scale)?, num(shape)?),
            _ => Err(bad(s)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::adaptive_simpson;

    #[test]
    fn construction_guards() {
        assert!(Margin::exponential(0.0).is_err());
        assert!(Margin::exponential(-1.0).is_err());
        assert!(Margin::exponential(f64::INFINITY).is_err());
        assert!(Margin::log_normal(0.0, 0.0).is_err());
        assert!(Margin::pareto(1.0, 1.0).is_err());
        assert!(Margin::pareto(0.0, 2.0).is_err());
        assert!(Margin::pareto(1.0, 1.5).is_ok());
    }

    #[test]
    fn quantile_reference_values() {
        assert_eq!(Margin::uniform().quantile(0.95).unwrap(), 0.95);
        let exp = Margin::exponential(1.0).unwrap();
        assert!((exp.quantile(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-14);
        let pareto = Margin::pareto(1.0, 2.0).unwrap();
        assert!((pareto.quantile(0.75).unwrap() - 2.0).abs() < 1e-12);
        assert!(exp.quantile(0.0).is_err());
        assert!(exp.quantile(1.0).is_err());
    }

    #[test]
    fn survival_quantile_reference_values() {
        assert!((Margin::uniform().survival_quantile(0.05).unwrap() - 0.95).abs() < 1e-15);
        let exp = Margin::exponential(1.0).unwrap();
        assert!((exp.survival_quantile(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-14);
        let pareto = Margin::pareto(1.0, 2.0).unwrap();
        assert!((pareto.survival_quantile(0.25).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_reference_values() {
        assert_eq!(Margin::uniform().cdf(0.3), 0.3);
        assert_eq!(Margin::exponential(2.0).unwrap().cdf(0.0), 0.0);
        let lognorm = Margin::log_normal(0.0, 1.0).unwrap();
        assert!((lognorm.cdf(1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cdf_quantile_round_trip() {
        let margins = [
            Margin::uniform(),
            Margin::exponential(0.5).unwrap(),
            Margin::exponential(3.0).unwrap(),
            Margin::log_normal(0.0, 1.0).unwrap(),
            Margin::log_normal(-1.0, 0.3).unwrap(),
            Margin::pareto(1.0, 2.0).unwrap(),
            Margin::pareto(2.5, 1.2).unwrap(),
        ];
        for margin in margins {
            for i in 1..=99 {
                let p = i as f64 / 100.0;
                let x = margin.quantile(p).unwrap();
                assert!(
                    (margin.cdf(x) - p).abs() < 1e-10,
                    "{margin} at p = {p}: x = {x}, cdf = {}",
                    margin.cdf(x)
                );
            }
            // strictly increasing quantiles
            let mut last = f64::NEG_INFINITY;
            for i in 1..100 {
                let q = margin.quantile(i as f64 / 100.0).unwrap();
                assert!(q > last);
                last = q;
            }
        }
    }

    #[test]
    fn numeric_mean_is_finite_and_matches_closed_form() {
        let margins = [
            Margin::uniform(),
            Margin::exponential(2.0).unwrap(),
            Margin::log_normal(0.2, 0.8).unwrap(),
            Margin::pareto(1.0, 1.5).unwrap(),
        ];
        for margin in margins {
            let numeric = adaptive_simpson(
                &|p: f64| margin.quantile(p).unwrap(),
                1e-12,
                1.0 - 1e-12,
                1e-9,
            );
            assert!(numeric.is_finite());
            let tol = 1e-3 * margin.mean().max(1.0);
            assert!(
                (numeric - margin.mean()).abs() < tol,
                "{margin}: numeric {numeric} vs {}",
                margin.mean()
            );
        }
    }

    #[test]
    fn spec_strings_parse() {
        assert_eq!("uniform".parse::<Margin>().unwrap(), Margin::Uniform01);
        assert_eq!(
            "exp:0.5".parse::<Margin>().unwrap(),
            Margin::Exponential { rate: 0.5 }
        );
        assert_eq!(
            "lognorm:0:1".parse::<Margin>().unwrap(),
            Margin::LogNormal { mu: 0.0, sigma: 1.0 }
        );
        assert_eq!(
            "pareto:1:2".parse::<Margin>().unwrap(),
            Margin::Pareto { scale: 1.0, shape: 2.0 }
        );
        for bad in ["", "exp", "exp:-1", "pareto:1:1", "gamma:2", "uniform:1", "exp:abc"] {
            assert!(bad.parse::<Margin>().is_err(), "{bad}");
        }
    }
}
