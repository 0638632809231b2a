//! Command-line front end.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cascade::{bifurcation_scan, doubling_points, lyapunov_exponent};
use crate::config::RunConfig;
use crate::equilibrium::{
    coexistence_fixed_point, price_ratio_at_equilibrium, trivial_fixed_point, verify_fixed_point,
};
use crate::error::{Error, Result};
use crate::market_map::{iterate, MarketParams, MarketState};
use crate::output::{
    fmt_num, svg_document, write_file, write_orbit_csv, write_pgm, write_scan_csv,
    write_sweep_csv, PlotBounds,
};
use crate::stability::{stability_report, Classification};
use crate::sweep::{analytic_regime, sweep, Regime};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "marketmap",
    about = "Two-seller market map: equilibria, stability and the period-doubling cascade",
    arg_required_else_help = true
)]
struct Cli {
    /// Solver defaults as `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterate the coupled map and write the orbit as CSV.
    Iterate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.1)]
        x0: f64,
        #[arg(long, default_value_t = 0.1)]
        y0: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the coexistence and trivial equilibria.
    Fixpoint {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Evaluate the stability conditions at one parameter set.
    Stability {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Attractor samples of the logistic form over a range of gamma.
    Bifurcate {
        #[command(flatten)]
        scan: ScanArgs,
        /// Number of gamma values.
        #[arg(long, default_value_t = 801)]
        steps: usize,
        /// Maximum samples written per gamma value.
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long, default_value_t = 0.6)]
        gamma_min: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Lyapunov exponent of the logistic form at one gamma.
    Lyapunov {
        #[arg(long)]
        gamma: f64,
        #[command(flatten)]
        scan: ScanArgs,
        /// Iterates averaged after the burn-in.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Locate period-doubling points and estimate the Feigenbaum ratio.
    Cascade {
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, default_value_t = 0.7)]
        gamma_min: f64,
        #[arg(long, default_value_t = 0.9)]
        gamma_max: f64,
        /// Number of doublings to locate.
        #[arg(long)]
        doublings: Option<usize>,
        #[arg(long)]
        bisect_tol: Option<f64>,
    },
    /// Classify a grid over income and price ratio.
    Sweep {
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, default_value_t = 0.5)]
        c_min: f64,
        #[arg(long, default_value_t = 3.5)]
        c_max: f64,
        #[arg(long, default_value_t = 0.5)]
        ratio_min: f64,
        #[arg(long, default_value_t = 2.0)]
        ratio_max: f64,
        #[arg(long, default_value_t = 200)]
        nc: usize,
        #[arg(long, default_value_t = 200)]
        nr: usize,
        /// Fixed state supply volume.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        pgm: Option<PathBuf>,
        /// Scatter of the stable-coexistence cells.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.2)]
    c0: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    beta_x: f64,
    #[arg(long, default_value_t = 1.0)]
    beta_y: f64,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<MarketParams> {
        MarketParams::new(self.alpha, self.c0, self.mu, self.beta_x, self.beta_y, self.a)
    }
}

/// Overrides for the solver defaults.
#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    seed_z: Option<f64>,
}

impl ScanArgs {
    fn apply(&self, cfg: &RunConfig) -> Result<RunConfig> {
        let cfg = RunConfig {
            burn_in: self.burn_in.unwrap_or(cfg.burn_in),
            window: self.window.unwrap_or(cfg.window),
            seed_z: self.seed_z.unwrap_or(cfg.seed_z),
            ..*cfg
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Csv,
}

/// Ordered key/value report rendered as `key,value` or `key: value`.
struct Report(Vec<(&'static str, String)>);

impl Report {
    fn push(&mut self, key: &'static str, value: impl Into<String>) {
        self.0.push((key, value.into()));
    }

    fn classification(&mut self, key: &'static str, margin_key: &'static str, c: &Classification) {
        self.push(key, c.value.name());
        self.push(margin_key, fmt_num(c.margin));
    }

    fn render(&self, format: Format, w: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(w, "field,value")?;
                for (k, v) in &self.0 {
                    writeln!(w, "{k},{v}")?;
                }
            }
            Format::Plain => {
                let width = self.0.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in &self.0 {
                    writeln!(w, "{k:<width$}  {v}")?;
                }
            }
        }
        Ok(())
    }
}

fn params_report(params: &MarketParams) -> Report {
    let r = params.reduce();
    let mut rep = Report(Vec::new());
    rep.push("alpha", fmt_num(params.alpha()));
    rep.push("c0", fmt_num(params.c0()));
    rep.push("mu", fmt_num(params.mu()));
    rep.push("beta_x", fmt_num(params.beta_x()));
    rep.push("beta_y", fmt_num(params.beta_y()));
    rep.push("a", fmt_num(params.a()));
    rep.push("c", fmt_num(r.c));
    rep.push("delta_x", fmt_num(r.delta_x));
    rep.push("delta_y", fmt_num(r.delta_y));
    rep
}

fn io_err(path: &str) -> impl Fn(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: PathBuf::from(path),
        source,
    }
}

/// Writes to `path` when given, otherwise to `stdout`.
fn emit<F>(path: Option<&Path>, stdout: &mut dyn Write, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => write_file(p, body),
        None => body(stdout).map_err(io_err("<stdout>")),
    }
}

fn run_command(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Iterate {
            model,
            x0,
            y0,
            steps,
            out,
        } => {
            let params = model.params()?;
            let orbit = iterate(&params, MarketState::new(x0, y0), steps, cfg.divergence_threshold);
            emit(out.as_deref(), stdout, |w| write_orbit_csv(&orbit, w))
        }
        Command::Fixpoint { model, format } => {
            let params = model.params()?;
            let r = params.reduce();
            let co = coexistence_fixed_point(&r, params.a())?;
            let trivial = trivial_fixed_point(&r, params.a());
            let mut rep = params_report(&params);
            rep.push("coexistence_x", fmt_num(co.point.x_star));
            rep.push("coexistence_y", fmt_num(co.point.y_star));
            rep.push(
                "coexistence_status",
                if co.no_positive_equilibrium { "NoPositiveEquilibrium" } else { "Positive" },
            );
            rep.push(
                "coexistence_verified",
                verify_fixed_point(&params, &co.point, 1e-9).to_string(),
            );
            if let Ok(ratio) = price_ratio_at_equilibrium(&r, params.a(), co.point.y_star) {
                rep.push("price_ratio", fmt_num(ratio));
            }
            rep.push("delta_ratio", fmt_num(r.delta_y / r.delta_x));
            rep.push("trivial_x", fmt_num(trivial.x_star));
            rep.push("trivial_y", fmt_num(trivial.y_star));
            rep.render(format, stdout).map_err(io_err("<stdout>"))
        }
        Command::Stability { model, format } => {
            let params = model.params()?;
            let report = stability_report(&params);
            let mut rep = params_report(&params);
            rep.classification("private_condition", "private_margin", &report.private_cond);
            rep.classification("state_condition", "state_margin", &report.state_cond);
            rep.classification(
                "coexistence_condition",
                "coexistence_margin",
                &report.coexistence_cond,
            );
            rep.push("price_bound_ok", report.price_bound_ok.to_string());
            rep.push("jacobian_spectral_radius", fmt_num(report.jacobian_spectral_radius));
            rep.push("jacobian_stable", report.jacobian_stable.to_string());
            rep.push("regime", analytic_regime(&params).to_string());
            rep.render(format, stdout).map_err(io_err("<stdout>"))
        }
        Command::Bifurcate {
            scan,
            steps,
            samples,
            gamma_min,
            gamma_max,
            out,
            svg,
        } => {
            let cfg = scan.apply(&cfg)?;
            let points = bifurcation_scan(gamma_min, gamma_max, steps, samples, &cfg.period_settings())?;
            emit(out.as_deref(), stdout, |w| write_scan_csv(&points, w))?;
            if let Some(path) = svg {
                let pairs: Vec<(f64, f64)> = points
                    .iter()
                    .flat_map(|p| p.summary.samples.iter().map(move |z| (p.gamma, *z)))
                    .collect();
                let bounds = PlotBounds {
                    x_min: gamma_min,
                    x_max: gamma_max,
                    y_min: 0.0,
                    y_max: 1.0,
                };
                let doc = svg_document(&pairs, &bounds)?;
                write_file(&path, |w| w.write_all(doc.as_bytes()))?;
            }
            Ok(())
        }
        Command::Lyapunov { gamma, scan, steps } => {
            let cfg = scan.apply(&cfg)?;
            let n = steps.unwrap_or(cfg.lyapunov_steps);
            if n == 0 {
                return Err(Error::Config("`--steps` must be positive".into()));
            }
            let value = lyapunov_exponent(gamma, cfg.seed_z, cfg.burn_in, n)?;
            writeln!(stdout, "{}", fmt_num(value)).map_err(io_err("<stdout>"))
        }
        Command::Cascade {
            scan,
            gamma_min,
            gamma_max,
            doublings,
            bisect_tol,
        } => {
            let cfg = scan.apply(&cfg)?;
            let tol = bisect_tol.unwrap_or(cfg.bisect_tol);
            if !(tol > 0.0) {
                return Err(Error::Config("`--bisect-tol` must be positive".into()));
            }
            let k = doublings.unwrap_or(cfg.doublings);
            let cascade = doubling_points(gamma_min, gamma_max, k, tol, &cfg.period_settings())?;
            let mut text = String::new();
            for (i, g) in cascade.points.iter().enumerate() {
                text.push_str(&format!("gamma_{},{}\n", i + 1, fmt_num(*g)));
            }
            for (i, ratio) in cascade.feigenbaum_estimates.iter().enumerate() {
                text.push_str(&format!("ratio_{},{}\n", i + 1, fmt_num(*ratio)));
            }
            if let Some(last) = cascade.feigenbaum_estimates.last() {
                text.push_str(&format!("feigenbaum,{}\n", fmt_num(*last)));
            }
            stdout.write_all(text.as_bytes()).map_err(io_err("<stdout>"))
        }
        Command::Sweep {
            scan,
            c_min,
            c_max,
            ratio_min,
            ratio_max,
            nc,
            nr,
            a,
            out,
            pgm,
            svg,
        } => {
            let cfg = scan.apply(&cfg)?;
            if nc < 2 || nr < 2 || !(c_min < c_max) || !(ratio_min < ratio_max) {
                return Err(Error::Config(
                    "sweep needs ordered bounds and at least 2 points per axis".into(),
                ));
            }
            let grid = sweep(c_min, c_max, ratio_min, ratio_max, nc, nr, a, &cfg)?;
            emit(out.as_deref(), stdout, |w| write_sweep_csv(&grid, w))?;
            if let Some(path) = pgm {
                write_file(&path, |w| write_pgm(&grid, w))?;
            }
            if let Some(path) = svg {
                let stable: Vec<(f64, f64)> = grid
                    .iter()
                    .filter(|(_, _, cell)| cell.analytic == Regime::StableCoexistence)
                    .map(|(c, ratio, _)| (c, ratio))
                    .collect();
                let bounds = PlotBounds {
                    x_min: c_min,
                    x_max: c_max,
                    y_min: ratio_min,
                    y_max: ratio_max,
                };
                let doc = svg_document(&stable, &bounds)?;
                write_file(&path, |w| w.write_all(doc.as_bytes()))?;
            }
            Ok(())
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter { .. } | Error::InvalidSeed(_) | Error::Config(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let text = err.render().to_string();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match run_command(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            exit_code(&err)
        }
    }
}
