//! Parsers for the CLI spec grammars: copula specs `family:theta:dim`
//! (theta omitted for parameterless families, comma-separated where a list is
//! allowed), margin lists, and alpha grids `start:stop:step`.

use mvar::copula::{CopulaModel, Family};
use mvar::margins::Margin;

use crate::commands::CliError;

/// Upper bound on materialized grid points; protects against step sizes that
/// would explode memory.
const MAX_GRID_POINTS: usize = 1_000_000;

/// Parses `family:theta:dim`, with the theta token absent for the
/// independence, comonotonic and counter-monotonic families.
pub fn parse_copula_spec(spec: &str) -> Result<CopulaModel, CliError> {
    let models = parse_copula_list(spec)?;
    if models.len() != 1 {
        return Err(CliError::Config(format!(
            "copula spec `{spec}` lists several parameters where exactly one is expected"
        )));
    }
    Ok(models[0])
}

/// Like [`parse_copula_spec`] but the theta token may be a comma-separated
/// list, yielding one model per value (used by the curve subcommands).
pub fn parse_copula_list(spec: &str) -> Result<Vec<CopulaModel>, CliError> {
    let bad = |msg: String| CliError::Config(msg);
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.is_empty() || parts[0].is_empty() {
        return Err(bad(format!("empty copula spec `{spec}`")));
    }
    let family: Family = parts[0]
        .parse()
        .map_err(|e: mvar::Error| bad(e.to_string()))?;
    let (theta_tokens, dim_token) = match (family.has_theta(), parts.len()) {
        (true, 3) => (parts[1], parts[2]),
        (false, 2) => ("", parts[1]),
        (true, _) => {
            return Err(bad(format!(
                "copula spec `{spec}` must look like {family}:THETA:DIM"
            )))
        }
        (false, _) => {
            return Err(bad(format!(
                "copula spec `{spec}` must look like {family}:DIM"
            )))
        }
    };
    let dim: usize = dim_token
        .trim()
        .parse()
        .map_err(|_| bad(format!("cannot parse dimension `{dim_token}` in `{spec}`")))?;
    let thetas: Vec<Option<f64>> = if family.has_theta() {
        theta_tokens
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| bad(format!("cannot parse theta `{tok}` in `{spec}`")))
            })
            .collect::<Result<_, _>>()?
    } else {
        vec![None]
    };
    thetas
        .into_iter()
        .map(|theta| {
            CopulaModel::new(family, theta, dim).map_err(|e| CliError::Config(e.to_string()))
        })
        .collect()
}

/// Parses a comma-separated margin list; an empty option defaults to uniform
/// margins in every coordinate.
pub fn parse_margins(spec: Option<&str>, dim: usize) -> Result<Vec<Margin>, CliError> {
    let margins: Vec<Margin> = match spec {
        None => vec![Margin::uniform(); dim],
        Some(s) => s
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<Margin>()
                    .map_err(|e| CliError::Config(e.to_string()))
            })
            .collect::<Result<_, _>>()?,
    };
    if margins.len() != dim {
        return Err(CliError::Config(format!(
            "{} margins supplied for a {dim}-dimensional copula",
            margins.len()
        )));
    }
    Ok(margins)
}

/// An inclusive arithmetic grid strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AlphaGrid {
    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1.5) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.start + k as f64 * self.step)
            .filter(|&a| a <= self.stop + self.step * 1e-9)
            .collect()
    }
}

/// Parses `start:stop:step`; the grid must sit strictly inside (0, 1) and
/// the step must be positive.
pub fn parse_alpha_grid(spec: &str) -> Result<AlphaGrid, CliError> {
    let bad = |msg: String| CliError::Config(msg);
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad(format!(
            "alpha grid `{spec}` must look like START:STOP:STEP"
        )));
    }
    let mut nums = [0.0f64; 3];
    for (slot, tok) in nums.iter_mut().zip(&parts) {
        *slot = tok
            .trim()
            .parse()
            .map_err(|_| bad(format!("cannot parse `{tok}` in alpha grid `{spec}`")))?;
    }
    let [start, stop, step] = nums;
    if !(step > 0.0 && step.is_finite()) {
        return Err(bad(format!("alpha grid step must be positive, got {step}")));
    }
    if !(start > 0.0 && stop < 1.0 && start <= stop) {
        return Err(bad(format!(
            "alpha grid [{start}, {stop}] must sit strictly inside (0, 1)"
        )));
    }
    let grid = AlphaGrid { start, stop, step };
    if grid.len() > MAX_GRID_POINTS {
        return Err(bad(format!(
            "alpha grid would materialize {} points (cap {MAX_GRID_POINTS})",
            grid.len()
        )));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copula_specs_parse() {
        let m = parse_copula_spec("clayton:2:2").unwrap();
        assert_eq!(m.family(), Family::Clayton);
        assert_eq!(m.theta(), Some(2.0));
        assert_eq!(m.dim(), 2);

        let m = parse_copula_spec("comonotonic:3").unwrap();
        assert_eq!(m.family(), Family::Comonotonic);
        assert_eq!(m.dim(), 3);

        let list = parse_copula_list("clayton:-0.5,0,2,10:2").unwrap();
        assert_eq!(list.len(), 4);
        assert_eq!(list[1].theta(), Some(0.0));

        for bad in [
            "",
            "clayton",
            "clayton:2",
            "clayton:2:2:2",
            "clayton:abc:2",
            "clayton:2:0",
            "clayton:inf:2",
            "gumbel:0.5:2",
            "comonotonic",
            "comonotonic:2:2",
            "countermonotonic:3",
            "nosuch:2:2",
        ] {
            assert!(parse_copula_list(bad).is_err(), "{bad}");
        }
        assert!(parse_copula_spec("clayton:1,2:2").is_err());
    }

    #[test]
    fn margin_lists_parse() {
        let m = parse_margins(Some("uniform,exp:1"), 2).unwrap();
        assert_eq!(m.len(), 2);
        let m = parse_margins(None, 3).unwrap();
        assert_eq!(m, vec![Margin::uniform(); 3]);
        assert!(parse_margins(Some("uniform"), 2).is_err());
        assert!(parse_margins(Some("uniform,bogus:1"), 2).is_err());
    }

    #[test]
    fn alpha_grids_parse() {
        let g = parse_alpha_grid("0.01:0.99:0.01").unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 99);
        assert!((pts[0] - 0.01).abs() < 1e-12);
        assert!((pts[98] - 0.99).abs() < 1e-12);

        let g = parse_alpha_grid("0.5:0.5:0.1").unwrap();
        assert_eq!(g.points(), vec![0.5]);

        for bad in [
            "0.1:0.9:0",
            "0.1:0.9:-0.1",
            "0:0.9:0.1",
            "0.1:1:0.1",
            "0.9:0.1:0.1",
            "0.1:0.9",
            "a:b:c",
            "0.1:0.9:1e-9",
        ] {
            assert!(parse_alpha_grid(bad).is_err(), "{bad}");
        }
    }
}
