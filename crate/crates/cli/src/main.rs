use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use surreal::borel::Method;
use surreal::config;
use surreal_cli::commands::{self, BorelRequest, Format};
use surreal_cli::eval::Options;
use surreal_cli::Failure;

/// Exact surreal, transseries and Borel-summation calculator.
///
/// Exit codes: 0 success, 2 syntax error, 3 unsupported fragment,
/// 4 needs more terms, 5 mathematical error, 1 anything else.
/// SURREAL_DEPTH_CAP and SURREAL_TERM_CAP override the resource caps.
#[derive(Parser, Debug)]
#[command(name = "surreal", version)]
struct Cli {
    /// Terms shown per exponential sector (and summed by `sum`).
    #[arg(long, global = true, default_value_t = 8)]
    truncate: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
    /// Absolute tolerance for numerical quadrature.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Significant digits for floating-point output.
    #[arg(long, global = true)]
    float_digits: Option<usize>,
    /// Accept error-bounded floats where no exact value exists.
    #[arg(long, global = true)]
    float: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SumMethod {
    Pade,
    LeastTerm,
    Pv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate an expression in w (surreal) or x (transseries).
    Eval { expr: String },
    /// Resolve a bracket {L|R} to its simplest element.
    Bracket { bracket: String },
    /// The genetic Ei: an interval at real x > 1, an expansion at infinite x.
    Ei { x: String },
    /// Borel summation of sum c_k x^(-k-1).
    Borel {
        #[command(subcommand)]
        action: BorelAction,
    },
    /// Expansions of special functions at w.
    Special {
        #[command(subcommand)]
        which: Special,
    },
    /// Run built-in consistency checks.
    Selftest,
}

#[derive(Subcommand, Debug)]
enum BorelAction {
    /// Sum at one or more points; prints x,value,error rows.
    Sum {
        /// Coefficient c_k as an expression in k, e.g. "(-1)^k*k!".
        #[arg(long)]
        coeffs: String,
        /// Points: a,b,c or start:stop:step.
        #[arg(long)]
        at: String,
        #[arg(long, value_enum, default_value_t = SumMethod::Pade)]
        method: SumMethod,
        /// Padé order used for the analytic continuation.
        #[arg(long, default_value_t = 8)]
        order: usize,
    },
}

#[derive(Subcommand, Debug)]
enum Special {
    /// Ei(w) = e^w sum k!/w^(k+1).
    EiAtOmega {
        #[arg(long)]
        terms: Option<usize>,
    },
    /// Gamma(w) reexpanded from ln Gamma(w).
    Stirling {
        #[arg(long)]
        terms: Option<usize>,
    },
}

fn run(cli: &Cli) -> Result<String, Failure> {
    if let Some(cap) = commands::env_cap("SURREAL_DEPTH_CAP")? {
        config::set_depth_cap(cap);
    }
    if let Some(cap) = commands::env_cap("SURREAL_TERM_CAP")? {
        config::set_term_cap(cap);
    }
    config::set_float_mode(cli.float);
    let format = match cli.format {
        OutFormat::Text => Format::Text,
        OutFormat::Json => Format::Json,
    };
    let opts = Options { truncate: cli.truncate, float: cli.float };
    match &cli.command {
        Command::Eval { expr } => commands::eval_expr(expr, &opts, format),
        Command::Bracket { bracket } => commands::bracket(bracket, &opts, format),
        Command::Ei { x } => commands::ei(x, &opts, format, cli.float_digits),
        Command::Borel { action: BorelAction::Sum { coeffs, at, method, order } } => {
            let at = commands::parse_points(at)?;
            let method = match method {
                SumMethod::Pade => Method::Pade,
                SumMethod::LeastTerm => Method::LeastTerm,
                SumMethod::Pv => Method::Pv,
            };
            let req = BorelRequest { coeffs, at: &at, method, order: *order, tol: cli.tol };
            commands::borel_sum(&req, format, cli.float_digits)
        }
        Command::Special { which: Special::EiAtOmega { terms } } => {
            commands::ei_at_omega(terms.unwrap_or(cli.truncate), format)
        }
        Command::Special { which: Special::Stirling { terms } } => {
            commands::stirling(terms.unwrap_or(cli.truncate), format)
        }
        Command::Selftest => {
            let (report, ok) = commands::selftest();
            if ok {
                Ok(report.trim_end().to_string())
            } else {
                print!("{report}");
                Err(Failure::Usage("selftest failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            println!("{}", out.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
