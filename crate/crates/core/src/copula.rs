//! Copula families: parameter validation, generator calculus, joint and
//! survival CDF evaluation, and exact simulation through the simplex
//! representation.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kendall::KendallDistribution;
use crate::margins::Margin;

/// Parameters closer to a degenerate value than this are routed to the
/// independence formulas (the Clayton and Frank closed forms are 0/0 there).
pub(crate) const THETA_EPS: f64 = 1e-8;

/// Largest dimension for which inclusion-exclusion survival evaluation
/// (2^d terms) is allowed.
pub const SURVIVAL_DIM_CAP: usize = 8;

const CHUNK_ROWS: usize = 4096;

/// Supported dependence structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Family {
    Clayton,
    Gumbel,
    Frank,
    AliMikhailHaq,
    Independence,
    Comonotonic,
    CounterMonotonic,
}

impl Family {
    /// Whether the family carries a dependence parameter.
    pub fn has_theta(self) -> bool {
        matches!(
            self,
            Family::Clayton | Family::Gumbel | Family::Frank | Family::AliMikhailHaq
        )
    }

    /// Whether the family admits a generator (the independence copula does,
    /// with phi(t) = -ln t; only the Fréchet bounds do not).
    pub fn is_archimedean(self) -> bool {
        !matches!(self, Family::Comonotonic | Family::CounterMonotonic)
    }

    pub fn token(self) -> &'static str {
        match self {
            Family::Clayton => "clayton",
            Family::Gumbel => "gumbel",
            Family::Frank => "frank",
            Family::AliMikhailHaq => "amh",
            Family::Independence => "independence",
            Family::Comonotonic => "comonotonic",
            Family::CounterMonotonic => "countermonotonic",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clayton" => Ok(Family::Clayton),
            "gumbel" => Ok(Family::Gumbel),
            "frank" => Ok(Family::Frank),
            "amh" | "ali-mikhail-haq" => Ok(Family::AliMikhailHaq),
            "independence" | "indep" => Ok(Family::Independence),
            "comonotonic" => Ok(Family::Comonotonic),
            "countermonotonic" | "counter-monotonic" => Ok(Family::CounterMonotonic),
            other => Err(Error::InvalidParameter(format!(
                "unknown copula family `{other}`"
            ))),
        }
    }
}

/// A copula family together with its parameter and dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaModel {
    family: Family,
    theta: Option<f64>,
    dim: usize,
}

/// Generator dispatch after folding near-degenerate parameters onto the
/// independence generator.
#[derive(Debug, Clone, Copy)]
pub(crate) enum GeneratorKind {
    Clayton(f64),
    Gumbel(f64),
    Frank(f64),
    AliMikhailHaq(f64),
    Independence,
}

impl CopulaModel {
    pub fn new(family: Family, theta: Option<f64>, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        match (family.has_theta(), theta) {
            (true, None) => {
                return Err(Error::InvalidParameter(format!(
                    "{family} requires a dependence parameter"
                )))
            }
            (false, Some(_)) => {
                return Err(Error::InvalidParameter(format!(
                    "{family} takes no dependence parameter"
                )))
            }
            _ => {}
        }
        if let Some(th) = theta {
            if !th.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "dependence parameter must be finite, got {th}"
                )));
            }
        }
        let ok = match family {
            Family::Clayton => {
                let th = theta.unwrap();
                if dim == 2 {
                    th >= -1.0
                } else {
                    th > -1.0 / (dim as f64 - 1.0)
                }
            }
            Family::Gumbel => theta.unwrap() >= 1.0,
            Family::Frank => dim == 2 || theta.unwrap() > -THETA_EPS,
            Family::AliMikhailHaq => {
                let th = theta.unwrap();
                dim == 2 && (-1.0..1.0).contains(&th)
            }
            Family::CounterMonotonic => dim == 2,
            Family::Independence | Family::Comonotonic => true,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "parameters (theta = {:?}, dim = {dim}) are not admissible for {family}",
                theta
            )));
        }
        Ok(CopulaModel { family, theta, dim })
    }

    pub fn clayton(theta: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Clayton, Some(theta), dim)
    }

    pub fn gumbel(theta: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Gumbel, Some(theta), dim)
    }

    pub fn frank(theta: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Frank, Some(theta), dim)
    }

    pub fn ali_mikhail_haq(theta: f64) -> Result<Self> {
        Self::new(Family::AliMikhailHaq, Some(theta), 2)
    }

    pub fn independence(dim: usize) -> Result<Self> {
        Self::new(Family::Independence, None, dim)
    }

    pub fn comonotonic(dim: usize) -> Result<Self> {
        Self::new(Family::Comonotonic, None, dim)
    }

    pub fn counter_monotonic() -> Result<Self> {
        Self::new(Family::CounterMonotonic, None, 2)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_archimedean(&self) -> bool {
        self.family.is_archimedean()
    }

    pub(crate) fn generator_kind(&self) -> Result<GeneratorKind> {
        let kind = match self.family {
            Family::Clayton => {
                let th = self.theta.unwrap();
                if th.abs() < THETA_EPS {
                    GeneratorKind::Independence
                } else {
                    GeneratorKind::Clayton(th)
                }
            }
            Family::Gumbel => GeneratorKind::Gumbel(self.theta.unwrap()),
            Family::Frank => {
                let th = self.theta.unwrap();
                if th.abs() < THETA_EPS {
                    GeneratorKind::Independence
                } else {
                    GeneratorKind::Frank(th)
                }
            }
            Family::AliMikhailHaq => GeneratorKind::AliMikhailHaq(self.theta.unwrap()),
            Family::Independence => GeneratorKind::Independence,
            Family::Comonotonic | Family::CounterMonotonic => {
                return Err(Error::UnsupportedFamily {
                    family: self.family,
                })
            }
        };
        Ok(kind)
    }

    /// The Archimedean generator phi evaluated at `t` in (0, 1].
    ///
    /// Clayton: (t^-theta - 1)/theta; Gumbel: (-ln t)^theta;
    /// Frank: -ln((e^{-theta t} - 1)/(e^-theta - 1));
    /// Ali-Mikhail-Haq: ln((1 - theta(1 - t))/t); independence: -ln t.
    pub fn generator(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::OutOfDomain {
                name: "t",
                value: t,
                range: "(0, 1]",
            });
        }
        Ok(self.generator_kind()?.phi(t))
    }

    /// Inverse generator at `s >= 0`, returning a value in (0, 1].
    pub fn generator_inverse(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::OutOfDomain {
                name: "s",
                value: s,
                range: "[0, inf)",
            });
        }
        Ok(self.generator_kind()?.phi_inv(s))
    }

    /// Joint CDF at a point of the unit cube.
    pub fn cdf(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "point has {} coordinates, model dimension is {}",
                u.len(),
                self.dim
            )));
        }
        for &ui in u {
            if !(0.0..=1.0).contains(&ui) {
                return Err(Error::OutOfDomain {
                    name: "u",
                    value: ui,
                    range: "[0, 1]",
                });
            }
        }
        if u.contains(&0.0) {
            return Ok(0.0);
        }
        match self.family {
            Family::Comonotonic => Ok(u.iter().copied().fold(f64::INFINITY, f64::min)),
            Family::CounterMonotonic => Ok((u[0] + u[1] - 1.0).max(0.0)),
            _ => {
                let gen = self.generator_kind()?;
                let total: f64 = u.iter().map(|&ui| gen.phi(ui)).sum();
                Ok(gen.phi_inv(total))
            }
        }
    }

    /// Draws `n` rows from the copula, reproducibly for a given seed.
    ///
    /// Rows are produced in fixed-size chunks; chunk `i` uses an independent
    /// ChaCha substream derived from `(seed, i)`, so the output does not
    /// depend on how many worker threads participate.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleMatrix> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "sample size must be at least 1".into(),
            ));
        }
        let dim = self.dim;
        let chunks = n.div_ceil(CHUNK_ROWS);
        let parts: Result<Vec<Vec<f64>>> = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let rows = CHUNK_ROWS.min(n - chunk * CHUNK_ROWS);
                self.sample_chunk(seed, chunk as u64, rows)
            })
            .collect();
        let mut values = Vec::with_capacity(n * dim);
        for part in parts? {
            values.extend_from_slice(&part);
        }
        Ok(SampleMatrix {
            values,
            dim,
            seed,
            scale: SampleScale::Copula,
        })
    }

    fn sample_chunk(&self, seed: u64, chunk: u64, rows: usize) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let mut out = Vec::with_capacity(rows * self.dim);
        match self.family {
            Family::Comonotonic => {
                for _ in 0..rows {
                    let u = open01(&mut rng);
                    out.extend(std::iter::repeat_n(u, self.dim));
                }
            }
            Family::CounterMonotonic => {
                for _ in 0..rows {
                    let u = open01(&mut rng);
                    out.push(u);
                    out.push(1.0 - u);
                }
            }
            _ => match self.generator_kind()? {
                GeneratorKind::Independence => {
                    for _ in 0..rows {
                        for _ in 0..self.dim {
                            out.push(open01(&mut rng));
                        }
                    }
                }
                gen => {
                    let kendall = KendallDistribution::new(*self);
                    let mut exps = vec![0.0; self.dim];
                    for _ in 0..rows {
                        // radial part through the Kendall inverse-CDF
                        let w = kendall.inverse(open01(&mut rng))?;
                        let radius = gen.phi(w);
                        // uniform point of the simplex from normalized exponentials
                        let mut total = 0.0;
                        for e in exps.iter_mut() {
                            *e = -open01(&mut rng).ln();
                            total += *e;
                        }
                        for &e in &exps {
                            let u = gen.phi_inv(e / total * radius);
                            out.push(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0));
                        }
                    }
                }
            },
        }
        Ok(out)
    }
}

/// A draw from the open interval (0, 1).
fn open01<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.random();
        if x > 0.0 {
            return x;
        }
    }
}

impl GeneratorKind {
    pub(crate) fn phi(&self, t: f64) -> f64 {
        match *self {
            GeneratorKind::Clayton(th) => (-th * t.ln()).exp_m1() / th,
            GeneratorKind::Gumbel(th) => (-t.ln()).powf(th),
            GeneratorKind::Frank(th) => {
                // -ln((1 - e^{-theta t})/(1 - e^-theta)); for large positive
                // arguments the information lives in the gap between e^{-x}
                // and 1, so switch to the log1p-of-exponentials form there
                if th * t >= 0.5 {
                    (-(-th).exp()).ln_1p() - (-(-th * t).exp()).ln_1p()
                } else {
                    -((-th * t).exp_m1() / (-th).exp_m1()).ln()
                }
            }
            GeneratorKind::AliMikhailHaq(th) => (-th * (1.0 - t)).ln_1p() - t.ln(),
            GeneratorKind::Independence => -t.ln(),
        }
    }

    pub(crate) fn phi_inv(&self, s: f64) -> f64 {
        match *self {
            GeneratorKind::Clayton(th) => {
                if th < 0.0 && th * s <= -1.0 {
                    0.0
                } else {
                    (-(th * s).ln_1p() / th).exp()
                }
            }
            GeneratorKind::Gumbel(th) => (-s.powf(1.0 / th)).exp(),
            GeneratorKind::Frank(th) => {
                if th > 0.0 {
                    // 1 + e^{-s}(e^{-theta} - 1) = (1 - e^{-s}) + e^{-(s+theta)},
                    // a sum of positives that keeps tiny phi values exact
                    let near = -(-s).exp_m1();
                    let far = (-(s + th)).exp();
                    -(near + far).ln() / th
                } else {
                    -((-s).exp() * (-th).exp_m1()).ln_1p() / th
                }
            }
            GeneratorKind::AliMikhailHaq(th) => (1.0 - th) / (s.exp() - th),
            GeneratorKind::Independence => (-s).exp(),
        }
    }

    pub(crate) fn phi_deriv(&self, t: f64) -> f64 {
        match *self {
            GeneratorKind::Clayton(th) => -t.powf(-th - 1.0),
            GeneratorKind::Gumbel(th) => -th * (-t.ln()).powf(th - 1.0) / t,
            GeneratorKind::Frank(th) => th / (-(th * t).exp_m1()),
            GeneratorKind::AliMikhailHaq(th) => (th - 1.0) / (t * (1.0 - th + th * t)),
            GeneratorKind::Independence => -1.0 / t,
        }
    }

    pub(crate) fn phi_deriv2(&self, t: f64) -> f64 {
        match *self {
            GeneratorKind::Clayton(th) => (th + 1.0) * t.powf(-th - 2.0),
            GeneratorKind::Gumbel(th) => {
                let l = -t.ln();
                th * l.powf(th - 2.0) * (th - 1.0 + l) / (t * t)
            }
            GeneratorKind::Frank(th) => {
                let e = (th * t).exp();
                th * th * e / ((1.0 - e) * (1.0 - e))
            }
            GeneratorKind::AliMikhailHaq(th) => {
                let a = 1.0 - th + th * t;
                (1.0 - th) * (1.0 - th + 2.0 * th * t) / (t * t * a * a)
            }
            GeneratorKind::Independence => 1.0 / (t * t),
        }
    }
}

/// Joint survival probability P(X_1 > x_1, ..., X_d > x_d) by
/// inclusion-exclusion over the copula, capped at dimension 8.
pub fn survival_value(model: &CopulaModel, margins: &[Margin], x: &[f64]) -> Result<f64> {
    let d = model.dim();
    if d > SURVIVAL_DIM_CAP {
        return Err(Error::DimensionTooLarge {
            dim: d,
            max: SURVIVAL_DIM_CAP,
        });
    }
    if margins.len() != d || x.len() != d {
        return Err(Error::InvalidParameter(format!(
            "expected {d} margins and {d} coordinates"
        )));
    }
    let u: Vec<f64> = margins.iter().zip(x).map(|(m, &xi)| m.cdf(xi)).collect();
    let mut point = vec![1.0; d];
    let mut total = 0.0;
    for mask in 0u32..(1 << d) {
        for (i, p) in point.iter_mut().enumerate() {
            *p = if mask & (1 << i) != 0 { u[i] } else { 1.0 };
        }
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * model.cdf(&point)?;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Whether a sample matrix lives on the copula or the portfolio scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleScale {
    Copula,
    Portfolio,
}

/// An n x d matrix of draws, tagged with the seed that produced it.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    values: Vec<f64>,
    dim: usize,
    seed: u64,
    scale: SampleScale,
}

impl SampleMatrix {
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scale(&self) -> SampleScale {
        self.scale
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    /// Maps a copula-scale sample through marginal quantile functions.
    pub fn to_portfolio(&self, margins: &[Margin]) -> Result<SampleMatrix> {
        if self.scale != SampleScale::Copula {
            return Err(Error::ScaleMismatch {
                expected: "copula",
            });
        }
        if margins.len() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "expected {} margins",
                self.dim
            )));
        }
        let mut values = Vec::with_capacity(self.values.len());
        for row in self.rows() {
            for (m, &u) in margins.iter().zip(row) {
                values.push(m.quantile(u)?);
            }
        }
        Ok(SampleMatrix {
            values,
            dim: self.dim,
            seed: self.seed,
            scale: SampleScale::Portfolio,
        })
    }
}
