//! # mvar
//!
//! Lower-orthant and upper-orthant multivariate Value-at-Risk for portfolios
//! with Archimedean (or Fréchet-bound) dependence.
//!
//! The lower-orthant VaR at level alpha is the conditional expectation of the
//! risk vector on the alpha-level set of its joint CDF; the upper-orthant VaR
//! conditions on the (1 - alpha)-level set of the joint survival function.
//! Both are d-vectors, computed here by three interchangeable routes:
//!
//! * closed forms for the tabulated families (uniform margins),
//! * deterministic quadrature over the Beta(1, d-1) simplex representation of
//!   Archimedean copulas,
//! * seeded Monte Carlo band conditioning.
//!
//! ```
//! use mvar::copula::CopulaModel;
//! use mvar::margins::Margin;
//! use mvar::riskmeasure::{lower_var_quadrature, Portfolio};
//!
//! let model = CopulaModel::clayton(2.0, 2).unwrap();
//! let portfolio = Portfolio::new(model, vec![Margin::uniform(); 2]).unwrap();
//! let var = lower_var_quadrature(&portfolio, 0.5, 128).unwrap();
//! assert!((var.components[0] - 2.0 / 3.0).abs() < 1e-8);
//! ```
//!
//! The [`orders`] module bundles every ordering and invariance property into a
//! runnable verification suite; the `mvar` CLI exposes it as `mvar verify`.

pub mod copula;
pub mod error;
pub mod kendall;
pub mod margins;
pub mod numeric;
pub mod orders;
pub mod riskmeasure;

pub use copula::{CopulaModel, Family, SampleMatrix, SampleScale};
pub use error::{Error, Result};
pub use kendall::KendallDistribution;
pub use margins::Margin;
pub use riskmeasure::{Method, Orthant, Portfolio, VarVector};
