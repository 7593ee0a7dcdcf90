//! Subcommand implementations and the argv surface.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use mvar::copula::CopulaModel;
use mvar::margins::Margin;
use mvar::orders::{run_suite, SuiteConfig};
use mvar::riskmeasure::{
    lower_var_closed, lower_var_monte_carlo, lower_var_quadrature, upper_var_closed,
    upper_var_monte_carlo, upper_var_quadrature, Method, Orthant, Portfolio, VarVector,
};

use crate::format::fmt_sig;
use crate::parse::{parse_alpha_grid, parse_copula_list, parse_copula_spec, parse_margins};

/// At least one verification check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Configuration errors: malformed specs, out-of-range levels, bad grids.
pub const EXIT_CONFIG: i32 = 2;
/// Numerical failures: band starvation, missing closed forms.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Numeric(msg) | CliError::Io(msg) => {
                f.write_str(msg)
            }
        }
    }
}

impl From<mvar::Error> for CliError {
    fn from(err: mvar::Error) -> Self {
        use mvar::Error::*;
        match err {
            InvalidParameter(_) | OutOfDomain { .. } | ScaleMismatch { .. }
            | DimensionTooLarge { .. } => CliError::Config(err.to_string()),
            UnsupportedFamily { .. } | NoClosedForm { .. } | NoSolution(_)
            | BandStarvation { .. } => CliError::Numeric(err.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mvar",
    version,
    about = "Lower- and upper-orthant multivariate Value-at-Risk under Archimedean dependence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one VaR vector and print it as CSV
    Var(VarArgs),
    /// VaR curves over an alpha grid, one copula parameter per curve
    Curve(CurveArgs),
    /// Kendall distribution curves over an alpha grid
    Kendall(KendallArgs),
    /// Draw copula-scale samples
    Sample(SampleArgs),
    /// Run the property-verification suite
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct VarArgs {
    /// Copula spec `family:theta:dim`; theta is omitted for independence,
    /// comonotonic and countermonotonic
    #[arg(long)]
    pub copula: String,
    /// Comma-separated margins (`uniform`, `exp:RATE`, `lognorm:MU:SIGMA`,
    /// `pareto:SCALE:SHAPE`); defaults to uniform everywhere
    #[arg(long)]
    pub margins: Option<String>,
    /// Risk level in (0, 1)
    #[arg(long)]
    pub alpha: f64,
    /// lower | upper
    #[arg(long, default_value = "lower")]
    pub orthant: String,
    /// closed | quadrature | monte-carlo
    #[arg(long, default_value = "quadrature")]
    pub method: String,
    /// Gauss-Legendre node budget of the quadrature route
    #[arg(long, default_value_t = 128)]
    pub nodes: usize,
    /// Monte Carlo sample size
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    /// Monte Carlo conditioning band width
    #[arg(long = "h", default_value_t = 0.005)]
    pub band: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Copula spec; the theta token may be a comma-separated list to overlay
    /// curves, e.g. `clayton:-0.5,0,2,10:2`
    #[arg(long)]
    pub copula: String,
    #[arg(long)]
    pub margins: Option<String>,
    /// Alpha grid `start:stop:step`, strictly inside (0, 1)
    #[arg(long = "alpha-grid")]
    pub alpha_grid: String,
    #[arg(long, default_value = "lower")]
    pub orthant: String,
    #[arg(long, default_value = "quadrature")]
    pub method: String,
    #[arg(long, default_value_t = 128)]
    pub nodes: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long = "h", default_value_t = 0.005)]
    pub band: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KendallArgs {
    /// Copula spec; theta may be a comma-separated list
    #[arg(long)]
    pub copula: String,
    #[arg(long = "alpha-grid")]
    pub alpha_grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub copula: String,
    /// Number of rows to draw
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run only checks whose name contains this substring
    #[arg(long)]
    pub only: Option<String>,
    /// Points in the verification alpha grids
    #[arg(long = "alpha-points", default_value_t = 99)]
    pub alpha_points: usize,
    /// Draws used by the sampling checks
    #[arg(long = "mc-samples", default_value_t = 100_000)]
    pub mc_samples: usize,
    /// text | json
    #[arg(long, default_value = "text")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Executes a parsed invocation and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Var(args) => cmd_var(args).map(|csv| (csv, args.out.clone(), 0)),
        Command::Curve(args) => cmd_curve(args).map(|csv| (csv, args.out.clone(), 0)),
        Command::Kendall(args) => cmd_kendall(args).map(|csv| (csv, args.out.clone(), 0)),
        Command::Sample(args) => cmd_sample(args).map(|csv| (csv, args.out.clone(), 0)),
        Command::Verify(args) => {
            cmd_verify(args).map(|(report, code)| (report, args.out.clone(), code))
        }
    };
    match outcome {
        Ok((payload, out, code)) => {
            let written = match out {
                Some(path) => std::fs::write(&path, &payload)
                    .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
                None => {
                    print!("{payload}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn parse_orthant(s: &str) -> Result<Orthant, CliError> {
    s.parse().map_err(|e: mvar::Error| CliError::Config(e.to_string()))
}

fn parse_method(s: &str) -> Result<Method, CliError> {
    s.parse().map_err(|e: mvar::Error| CliError::Config(e.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn compute_var(
    model: CopulaModel,
    margins: Vec<Margin>,
    alpha: f64,
    orthant: Orthant,
    method: Method,
    nodes: usize,
    n: usize,
    band: f64,
    seed: u64,
) -> Result<VarVector, CliError> {
    let portfolio = match orthant {
        Orthant::Lower => Portfolio::new(model, margins),
        Orthant::Upper => Portfolio::with_survival_copula(model, margins),
    }?;
    let var = match (orthant, method) {
        (Orthant::Lower, Method::Closed) => lower_var_closed(&portfolio, alpha),
        (Orthant::Lower, Method::Quadrature) => lower_var_quadrature(&portfolio, alpha, nodes),
        (Orthant::Lower, Method::MonteCarlo) => {
            lower_var_monte_carlo(&portfolio, alpha, n, band, seed)
        }
        (Orthant::Upper, Method::Closed) => upper_var_closed(&portfolio, alpha),
        (Orthant::Upper, Method::Quadrature) => upper_var_quadrature(&portfolio, alpha, nodes),
        (Orthant::Upper, Method::MonteCarlo) => {
            upper_var_monte_carlo(&portfolio, alpha, n, band, seed)
        }
    }?;
    Ok(var)
}

fn push_var_rows(csv: &mut String, var: &VarVector, theta: Option<Option<f64>>) {
    for (i, value) in var.components.iter().enumerate() {
        let stderr = var
            .stderr
            .as_ref()
            .map(|s| fmt_sig(s[i]))
            .unwrap_or_default();
        let theta_col = match theta {
            None => String::new(),
            Some(None) => ",".to_string(),
            Some(Some(t)) => format!("{},", fmt_sig(t)),
        };
        csv.push_str(&format!(
            "{alpha},{theta_col}{orthant},{method},{component},{value},{stderr}\n",
            alpha = fmt_sig(var.alpha),
            orthant = var.orthant,
            method = var.method,
            component = i + 1,
            value = fmt_sig(*value),
        ));
    }
}

fn cmd_var(args: &VarArgs) -> Result<String, CliError> {
    let model = parse_copula_spec(&args.copula)?;
    let margins = parse_margins(args.margins.as_deref(), model.dim())?;
    let orthant = parse_orthant(&args.orthant)?;
    let method = parse_method(&args.method)?;
    let var = compute_var(
        model, margins, args.alpha, orthant, method, args.nodes, args.n, args.band, args.seed,
    )?;
    let mut csv = String::from("alpha,orthant,method,component,value,stderr\n");
    push_var_rows(&mut csv, &var, None);
    Ok(csv)
}

fn cmd_curve(args: &CurveArgs) -> Result<String, CliError> {
    let models = parse_copula_list(&args.copula)?;
    let grid = parse_alpha_grid(&args.alpha_grid)?;
    let orthant = parse_orthant(&args.orthant)?;
    let method = parse_method(&args.method)?;
    let mut csv = String::from("alpha,theta,orthant,method,component,value,stderr\n");
    for alpha in grid.points() {
        for model in &models {
            let margins = parse_margins(args.margins.as_deref(), model.dim())?;
            let var = compute_var(
                *model, margins, alpha, orthant, method, args.nodes, args.n, args.band, args.seed,
            )?;
            push_var_rows(&mut csv, &var, Some(model.theta()));
        }
    }
    Ok(csv)
}

fn cmd_kendall(args: &KendallArgs) -> Result<String, CliError> {
    let models = parse_copula_list(&args.copula)?;
    let grid = parse_alpha_grid(&args.alpha_grid)?;
    let mut csv = String::from("alpha,theta,K\n");
    for alpha in grid.points() {
        for model in &models {
            let k = mvar::KendallDistribution::new(*model).cdf(alpha)?;
            let theta = model.theta().map(fmt_sig).unwrap_or_default();
            csv.push_str(&format!("{},{theta},{}\n", fmt_sig(alpha), fmt_sig(k)));
        }
    }
    Ok(csv)
}

fn cmd_sample(args: &SampleArgs) -> Result<String, CliError> {
    let model = parse_copula_spec(&args.copula)?;
    let sample = model.sample(args.n, args.seed)?;
    let header: Vec<String> = (1..=model.dim()).map(|i| format!("u{i}")).collect();
    let mut csv = header.join(",");
    csv.push('\n');
    for row in sample.rows() {
        let cells: Vec<String> = row.iter().map(|&v| fmt_sig(v)).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    Ok(csv)
}

fn cmd_verify(args: &VerifyArgs) -> Result<(String, i32), CliError> {
    let config = SuiteConfig {
        seed: args.seed,
        alpha_points: args.alpha_points,
        mc_samples: args.mc_samples,
        only: args.only.clone(),
        theta_grid_override: None,
    };
    let report = run_suite(&config)?;
    let payload = match args.format.as_str() {
        "text" => report.render_text(),
        "json" => {
            let mut body = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Io(e.to_string()))?;
            body.push('\n');
            body
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown format `{other}` (expected text|json)"
            )))
        }
    };
    let code = if report.all_passed() {
        0
    } else {
        EXIT_CHECK_FAILED
    };
    Ok((payload, code))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var_args(copula: &str, alpha: f64, orthant: &str, method: &str) -> VarArgs {
        VarArgs {
            copula: copula.into(),
            margins: Some("uniform,uniform".into()),
            alpha,
            orthant: orthant.into(),
            method: method.into(),
            nodes: 128,
            n: 100_000,
            band: 0.005,
            seed: 0,
            out: None,
        }
    }

    #[test]
    fn var_closed_reference_rows() {
        let csv = cmd_var(&var_args("clayton:2:2", 0.5, "lower", "closed")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "alpha,orthant,method,component,value,stderr");
        assert_eq!(lines.next().unwrap(), "0.500000000,lower,closed,1,0.666666667,");
        assert_eq!(lines.next().unwrap(), "0.500000000,lower,closed,2,0.666666667,");

        let csv = cmd_var(&var_args("comonotonic:2", 0.95, "upper", "closed")).unwrap();
        assert!(csv.contains("0.950000000,upper,closed,1,0.950000000,"));
    }

    #[test]
    fn config_errors_exit_two() {
        let err = cmd_var(&var_args("clayton:2:2", 1.5, "lower", "closed")).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
        assert!(err.to_string().contains("alpha"), "{err}");

        let err = cmd_var(&var_args("clayton:2", 0.5, "lower", "closed")).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
    }

    #[test]
    fn numeric_errors_exit_three() {
        // Gumbel has no tabulated closed form
        let err = cmd_var(&var_args("gumbel:2:2", 0.5, "lower", "closed")).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_NUMERIC);

        // starved band
        let mut args = var_args("clayton:2:2", 0.5, "lower", "monte-carlo");
        args.n = 10_000;
        args.band = 1e-9;
        let err = cmd_var(&args).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_NUMERIC);
    }

    #[test]
    fn sample_comonotonic_columns_match() {
        let csv = cmd_sample(&SampleArgs {
            copula: "comonotonic:2".into(),
            n: 3,
            seed: 9,
            out: None,
        })
        .unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "u1,u2");
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells[0], cells[1]);
        }
    }

    #[test]
    fn verify_filter_and_json() {
        let args = VerifyArgs {
            seed: 1,
            only: Some("tau".into()),
            alpha_points: 9,
            mc_samples: 10_000,
            format: "json".into(),
            out: None,
        };
        let (payload, code) = cmd_verify(&args).unwrap();
        assert_eq!(code, 0);
        let parsed: serde_json::Value = serde_json::from_str(&payload).unwrap();
        let checks = parsed["checks"].as_array().unwrap();
        assert!(!checks.is_empty());
        assert!(checks
            .iter()
            .all(|c| c["name"].as_str().unwrap().contains("tau")));
    }
}
