//! Command-line surface over the betamap library: digit tables, spectra,
//! parameter scans, eigenvalue-branch diagnostics, functional curves, decay
//! measurements, and the quartic-family verification battery.
//!
//! Outputs are deterministic: fixed iteration orders, fixed seeds, parallel
//! results merged by grid index. Usage errors exit 2; numerical failures
//! exit 1 with a structured JSON error on stderr.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use betamap::beta::{BetaSpec, Point, Precision};
use betamap::continuity::{holder_constants, nondiff_probe, track};
use betamap::error::Error;
use betamap::expansion::greedy_digits;
use betamap::functional::eval_f;
use betamap::quartic::{verify_family, Family, QuarticFamily};
use betamap::spectra::{locate_eigenvalues, scan_beta_range, LocateOptions};
use betamap::transfer::{decay_fit, decay_fit_dd, good_decay_construct, StepFn};

#[derive(Parser)]
#[command(name = "betamap", version, about = "transfer-operator spectra of beta-maps")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct RunConfig {
    /// Working float precision (env: BETAMAP_PRECISION)
    #[arg(long, global = true, value_enum)]
    precision: Option<PrecisionArg>,
    /// Series horizon cap
    #[arg(long, global = true, default_value_t = 2000)]
    horizon: usize,
    /// Residual tolerance
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format (default: json, except csv for track/functional)
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads (env: BETAMAP_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, ValueEnum)]
enum PrecisionArg {
    Double,
    #[value(name = "double-double")]
    DoubleDouble,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Greedy digit table of a point
    Digits {
        #[arg(long)]
        beta: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: usize,
    },
    /// Isolated eigenvalues of the transfer operator
    Spectrum {
        #[arg(long)]
        beta: String,
        /// Outer search radius as a fraction of beta
        #[arg(long, default_value_t = 0.95)]
        ceiling: f64,
    },
    /// Spectra over an even grid of bases
    Scan {
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        grid: usize,
    },
    /// Continue an eigenvalue branch across a beta window
    Track {
        #[arg(long)]
        beta0: String,
        /// Eigenvalue as re,im
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Half-width of the window around beta0
        #[arg(long)]
        window: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Holder-exponent constants and the difference-quotient probe
    Holder {
        #[arg(long)]
        beta0: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value_t = 6)]
        probes: usize,
    },
    /// Sample the eigenfunctional function F_lambda on [0,1]
    Functional {
        #[arg(long)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        samples: usize,
    },
    /// Iterate the transfer operator and fit the BV decay rate
    Decay {
        #[arg(long)]
        beta: String,
        /// Use the null-space construction instead of a generic observable
        #[arg(long)]
        construct: bool,
        #[arg(long, default_value_t = 40)]
        nmax: usize,
    },
    /// Verify the quartic families against their predicted profiles
    #[command(name = "verify-appendix")]
    VerifyAppendix {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        n: Option<u32>,
    },
}

fn precision_of(run: &RunConfig) -> Result<Precision, Error> {
    if let Some(p) = run.precision {
        return Ok(match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::DoubleDouble => Precision::DoubleDouble,
        });
    }
    match std::env::var("BETAMAP_PRECISION") {
        Ok(v) => v.parse(),
        Err(_) => Ok(Precision::Double),
    }
}

fn threads_of(run: &RunConfig) -> usize {
    run.threads
        .or_else(|| {
            std::env::var("BETAMAP_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1)
        .max(1)
}

/// Base grammar: a decimal literal, or `poly:cK,...,c1,c0@(lo,hi)` with
/// integer coefficients leading-first and an isolating interval.
fn parse_beta(spec: &str, precision: Precision) -> Result<BetaSpec, Error> {
    if let Some(rest) = spec.strip_prefix("poly:") {
        let (coefs, interval) = rest
            .split_once('@')
            .ok_or_else(|| Error::InvalidInput(format!("missing @(lo,hi) in `{spec}`")))?;
        let coeffs: Vec<i64> = coefs
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::InvalidInput(format!("bad coefficient `{t}`")))
            })
            .collect::<Result<_, _>>()?;
        let iv = interval
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::InvalidInput(format!("bad interval in `{spec}`")))?;
        let (lo, hi) = iv
            .split_once(',')
            .ok_or_else(|| Error::InvalidInput(format!("bad interval in `{spec}`")))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad interval endpoint `{lo}`")))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad interval endpoint `{hi}`")))?;
        BetaSpec::from_poly(&coeffs, lo, hi, precision)
    } else {
        let v: f64 = spec
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad base literal `{spec}`")))?;
        BetaSpec::from_value(v, precision)
    }
}

fn parse_lambda(s: &str) -> Result<Complex64, Error> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| Error::InvalidInput(format!("lambda must be re,im, got `{s}`")))?;
    Ok(Complex64::new(
        re.trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad re `{re}`")))?,
        im.trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad im `{im}`")))?,
    ))
}

fn parse_point(s: &str) -> Result<Point, Error> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad point `{s}`")))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::DomainError(format!("point {v} outside [0,1]")));
    }
    Ok(Point::Float(v))
}

struct Out {
    sink: Box<dyn Write>,
}

impl Out {
    fn new(path: &Option<PathBuf>) -> Result<Out, Error> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(
                std::fs::File::create(p)
                    .map_err(|e| Error::InvalidInput(format!("cannot open {p:?}: {e}")))?,
            ),
            None => Box::new(std::io::stdout()),
        };
        Ok(Out { sink })
    }

    fn line(&mut self, s: &str) -> Result<(), Error> {
        writeln!(self.sink, "{s}").map_err(|e| Error::InvalidInput(format!("write failed: {e}")))
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let precision = precision_of(&cli.run)?;
    let threads = threads_of(&cli.run);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let mut out = Out::new(&cli.run.output)?;
    let fmt = cli.run.format.unwrap_or(match &cli.cmd {
        Cmd::Track { .. } | Cmd::Functional { .. } => FormatArg::Csv,
        _ => FormatArg::Json,
    });
    match cli.cmd {
        Cmd::Digits { beta, x, n } => {
            let b = parse_beta(&beta, precision)?;
            let point = parse_point(&x)?;
            let seq = greedy_digits(&b, &point, n)?;
            let row: Vec<String> = seq.greedy.iter().map(|d| d.to_string()).collect();
            out.line(&row.join(" "))?;
        }
        Cmd::Spectrum { beta, ceiling } => {
            let b = parse_beta(&beta, precision)?;
            let rep = locate_eigenvalues(&b, LocateOptions { tol: cli.run.tol, ceiling })?;
            match fmt {
                FormatArg::Json => out.line(&serde_json::to_string(&rep).unwrap())?,
                FormatArg::Csv => {
                    out.line("beta,lambda_re,lambda_im,mult,residual,kind")?;
                    for e in &rep.eigenvalues {
                        out.line(&format!(
                            "{},{},{},{},{},{:?}",
                            rep.beta, e.lambda_re, e.lambda_im, e.multiplicity, e.residual, e.kind
                        ))?;
                    }
                }
            }
        }
        Cmd::Scan { lo, hi, grid } => {
            let records = pool.install(|| scan_beta_range(lo, hi, grid, precision))?;
            match fmt {
                FormatArg::Json => {
                    for r in &records {
                        out.line(&serde_json::to_string(r).unwrap())?;
                    }
                }
                FormatArg::Csv => {
                    out.line("beta,n_nonleading,M_beta,lambda_re,lambda_im,mult")?;
                    for r in &records {
                        match &r.report {
                            Some(rep) => {
                                let nl: Vec<_> = rep.non_leading().collect();
                                if nl.is_empty() {
                                    out.line(&format!("{},0,,,,", r.beta))?;
                                }
                                for e in &nl {
                                    out.line(&format!(
                                        "{},{},{},{},{},{}",
                                        r.beta,
                                        nl.len(),
                                        rep.subleading_modulus.unwrap_or(f64::NAN),
                                        e.lambda_re,
                                        e.lambda_im,
                                        e.multiplicity
                                    ))?;
                                }
                            }
                            None => out.line(&format!("{},error,,,,", r.beta))?,
                        }
                    }
                }
            }
        }
        Cmd::Track { beta0, lambda, window, steps } => {
            let b = parse_beta(&beta0, precision)?;
            let lam = parse_lambda(&lambda)?;
            let curve = track(&b, lam, b.value() - window, b.value() + window, steps)?;
            match fmt {
                FormatArg::Json => out.line(&serde_json::to_string(&curve).unwrap())?,
                FormatArg::Csv => {
                    out.line("beta,lambda_re,lambda_im,residual")?;
                    for k in 0..curve.betas.len() {
                        out.line(&format!(
                            "{},{},{},{}",
                            curve.betas[k], curve.lambda_re[k], curve.lambda_im[k], curve.residuals[k]
                        ))?;
                    }
                }
            }
        }
        Cmd::Holder { beta0, lambda, probes } => {
            let b = parse_beta(&beta0, precision)?;
            let lam = parse_lambda(&lambda)?;
            let rep = locate_eigenvalues(&b, LocateOptions { tol: cli.run.tol, ceiling: 0.95 })?;
            let mult = rep
                .eigenvalues
                .iter()
                .find(|e| (e.lambda() - lam).norm() < 1e-6)
                .map(|e| e.multiplicity)
                .unwrap_or(1);
            let mut est = holder_constants(&b, lam, mult, 64)?;
            let probe = nondiff_probe(&b, lam, probes)?;
            est.fitted_left = probe.fitted_exponent;
            match fmt {
                FormatArg::Json => {
                    let doc = serde_json::json!({
                        "schema": 1,
                        "estimate": est,
                        "probes": probe.steps,
                    });
                    out.line(&serde_json::to_string(&doc).unwrap())?;
                }
                FormatArg::Csv => {
                    out.line("N,beta_N,gap,lambda_re,lambda_im,quotient")?;
                    for (k, s) in probe.steps.iter().enumerate() {
                        out.line(&format!(
                            "{},{},{},{},{},{}",
                            k + 1,
                            s.beta_n,
                            s.gap,
                            s.lambda_re,
                            s.lambda_im,
                            s.quotient
                        ))?;
                    }
                }
            }
        }
        Cmd::Functional { beta, lambda, samples } => {
            let b = parse_beta(&beta, precision)?;
            let lam = parse_lambda(&lambda)?;
            if samples == 0 {
                return Err(Error::InvalidInput("samples must be >= 1".into()));
            }
            out.line("x,f_re,f_im")?;
            for k in 0..=samples {
                let x = k as f64 / samples as f64;
                let f = eval_f(&b, lam, &Point::Float(x), cli.run.tol.max(1e-12))?;
                out.line(&format!("{},{},{}", x, f.value.re, f.value.im))?;
            }
        }
        Cmd::Decay { beta, construct, nmax } => {
            let b = parse_beta(&beta, precision)?;
            let doc = if construct {
                let rep = locate_eigenvalues(&b, LocateOptions { tol: cli.run.tol, ceiling: 0.95 })?;
                let sub: Vec<_> = betamap::spectra::subleading_of(&rep)
                    .map(|(_, v)| v)
                    .unwrap_or_default();
                let obs = good_decay_construct(&b, &sub, None, 1e-18)?;
                let fit = decay_fit_dd(&b, &obs.step_dd, nmax, None)?;
                serde_json::json!({
                    "schema": 1,
                    "observable": {
                        "breakpoints": obs.breakpoints,
                        "coefficients_re": obs.coefficients.iter().map(|c| c.re).collect::<Vec<_>>(),
                        "coefficients_im": obs.coefficients.iter().map(|c| c.im).collect::<Vec<_>>(),
                        "constraint_residuals": obs.constraint_residuals,
                    },
                    "fit": fit,
                })
            } else {
                let f: StepFn<Complex64> = StepFn::from_terms(vec![
                    (betamap::transfer::breakpoint_at(&b, 0.41), Complex64::new(1.0, 0.0)),
                    (betamap::transfer::breakpoint_at(&b, 1.0), Complex64::new(-0.41, 0.0)),
                ]);
                let fit = decay_fit(&b, &f, nmax, None)?;
                serde_json::json!({
                    "schema": 1,
                    "observable": {
                        "breakpoints": [0.41, 1.0],
                        "coefficients_re": [1.0, -0.41],
                        "coefficients_im": [0.0, 0.0],
                    },
                    "fit": fit,
                })
            };
            match fmt {
                FormatArg::Json => out.line(&serde_json::to_string(&doc).unwrap())?,
                FormatArg::Csv => {
                    out.line("n,bv_norm")?;
                    for pair in doc["fit"]["rates"].as_array().unwrap() {
                        out.line(&format!(
                            "{},{}",
                            pair[0].as_u64().unwrap(),
                            pair[1].as_f64().unwrap()
                        ))?;
                    }
                }
            }
        }
        Cmd::VerifyAppendix { family, n } => {
            let fams: Vec<Family> = match family {
                Some(f) => vec![f.parse()?],
                None => vec![Family::P, Family::Q, Family::R],
            };
            let mut all_ok = true;
            let mut reports = Vec::new();
            for fam in fams {
                let ns: Vec<u32> = match n {
                    Some(k) => vec![k],
                    None => match fam {
                        Family::P => (3..=8).collect(),
                        Family::Q | Family::R => (4..=8).collect(),
                    },
                };
                for k in ns {
                    let member = QuarticFamily::new(fam, k)?;
                    let rep = verify_family(&member, cli.run.tol.max(1e-9))?;
                    all_ok &= rep.all_ok();
                    reports.push(rep);
                }
            }
            out.line(
                &serde_json::to_string(&serde_json::json!({
                    "schema": 1,
                    "reports": reports,
                    "all_ok": all_ok,
                }))
                .unwrap(),
            )?;
            return Ok(all_ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let doc = serde_json::json!({ "schema": 1, "error": e.to_string() });
            eprintln!("{doc}");
            ExitCode::from(1)
        }
    }
}
