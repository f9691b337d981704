use casimir::cli::{self, config, ExitStatus, Mode};
use clap::Parser;
use std::io::Write;
use std::process::ExitCode;

const AFTER_HELP: &str = "\
All inputs are SI (m, K, m/s, rad/s) except particle polarizabilities, which
are Gaussian volumes in m^3: eps - 1 = 4 pi n alpha. To convert an SI
polarizability (C m^2/V) divide by 4 pi eps0; a volume of 1e-30 m^3 is
1.11e-40 C m^2/V.

Exit codes: 0 success, 1 validation error, 2 accuracy not reached,
3 verification failure.";

/// Casimir-Lifshitz pressure between plates at rest or in relative motion,
/// and the Casimir-Polder force on a particle.
#[derive(Parser, Debug)]
#[command(name = "casimir", version, after_help = AFTER_HELP)]
struct Args {
    /// Configuration file (key = value lines with [section] headers).
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Mode, overriding the configuration: static, dynamic, polder, sweep or verify.
    #[arg(long)]
    mode: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Relative tolerance, overriding the configuration.
    #[arg(long)]
    tol: Option<f64>,
    /// Run the self-verification suite.
    #[arg(long)]
    verify: bool,
}

fn fail(status: ExitStatus, lines: &[String]) -> ExitCode {
    for l in lines {
        eprintln!("{l}");
    }
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mode = match args.mode.as_deref().map(|m| (m, config::parse_mode(m))) {
        Some((m, None)) => {
            return fail(ExitStatus::Validation, &[format!("error,kind=validation,message=unknown mode {m:?}")]);
        }
        Some((_, Some(mode))) => Some(mode),
        None => None,
    };
    let mode = if args.verify { Some(Mode::Verify) } else { mode };
    let mut cfg = match (&args.config, mode) {
        (Some(path), _) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    let msg = format!("error,kind=validation,message=cannot read {}: {e}", path.display());
                    return fail(ExitStatus::Validation, &[msg]);
                }
            };
            match config::parse_config(&text) {
                Ok(c) => c,
                Err(errors) => {
                    let lines: Vec<String> = errors
                        .0
                        .iter()
                        .map(|e| format!("error,kind=validation,line={},message={}", e.line, e.message))
                        .collect();
                    return fail(ExitStatus::Validation, &lines);
                }
            }
        }
        (None, Some(Mode::Verify)) => config::RunConfig::new(Mode::Verify),
        (None, _) => {
            return fail(ExitStatus::Validation, &["error,kind=validation,message=--config is required".into()]);
        }
    };
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if let Some(t) = args.tol {
        if !(t > 0.0 && t <= 0.1) {
            return fail(ExitStatus::Validation, &[format!("error,kind=validation,message=--tol must lie in (0, 0.1], got {t}")]);
        }
        cfg.tol = t;
    }
    let problems = cfg.check();
    if !problems.is_empty() {
        let lines: Vec<String> = problems.iter().map(|p| format!("error,kind=validation,message={p}")).collect();
        return fail(ExitStatus::Validation, &lines);
    }
    let output = cli::run(&cfg);
    let path = args.out.or_else(|| cfg.out.as_ref().map(Into::into));
    let written = match &path {
        Some(p) => std::fs::write(p, &output.text),
        None => std::io::stdout().lock().write_all(output.text.as_bytes()),
    };
    if let Err(e) = written {
        return fail(ExitStatus::Validation, &[format!("error,kind=validation,message=cannot write output: {e}")]);
    }
    fail(output.status, &output.diagnostics)
}
