//! `converse`: replay congruence certificates, check concrete forms, and
//! run the level-13 tools from the command line.
//!
//! Exit status is 0 when every requested check passes, 1 on a
//! verification failure and 2 on usage or input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use converse_core::certificate::{self, blowup_check, verify_json, Certificate, ContextKind};
use converse_core::gamma0::{decompose_with_budget, Gamma0Error, DEFAULT_BUDGET};
use converse_core::numeric::{density_search, form_congruences, formcheck, EvalConfig, FormData, NumericError};
use converse_core::qseries::{eta_product, parse_coefficients, parse_eta_spec, write_coefficients, FormHeader};
use converse_core::text::parse_matrix;
use rug::Float;

#[derive(Parser)]
#[command(name = "converse", version, about = "Exact replay of the level-13 converse theorem and a numeric form checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ctx {
    F,
    G,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a congruence certificate step by step.
    Verify {
        /// Certificate JSON file.
        path: PathBuf,
        /// Context to verify against; must agree with the file.
        #[arg(long, value_enum)]
        context: Option<Ctx>,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check a coefficient file against the hypotheses of the theorem.
    Formcheck {
        /// Coefficient file ("# k=.. N=.. eps=.." header, then "n a_n").
        path: PathBuf,
        /// Expected weight; must match the header.
        #[arg(long)]
        k: Option<i64>,
        /// Expected level; must match the header.
        #[arg(long = "N", id = "level")]
        level: Option<u32>,
        /// Expected sign; must match the header.
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<i32>,
        /// Working precision in bits (HECKE_PREC overrides).
        #[arg(long, default_value_t = 256)]
        prec: u32,
        /// Residual tolerance.
        #[arg(long, default_value_t = 1e-20)]
        tol: f64,
        /// Minimum number of coefficients the file must contain.
        #[arg(long = "len", default_value_t = 512)]
        min_len: usize,
    },
    /// Write a matrix of Gamma0(13) as a word in P, W, g2, g3.
    Decompose {
        /// Matrix literal such as "[[1,0],[13,1]]".
        matrix: String,
        /// Node budget of the breadth-first fallback.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Find m, n with |Y^(2m+n*lambda) - X| <= tol.
    Density {
        x: String,
        tol: f64,
        /// Largest |m| and |n| allowed.
        #[arg(long, default_value_t = 1_000_000)]
        bound: i64,
    },
    /// Behaviour at 0 of z^(-k/2) summed over the conjugated g3 orbit.
    Asym {
        #[arg(allow_hyphen_values = true)]
        k: i64,
    },
    /// Print the coefficient file of an eta product such as "1^24".
    Eta {
        spec: String,
        /// Number of coefficients.
        len: usize,
        /// Sign written to the header.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        eps: i32,
        /// Level written to the header (default: lcm of the multipliers).
        #[arg(long = "N", id = "level")]
        level: Option<u32>,
    },
}

/// Error carrying the exit status it maps to.
struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl ToString) -> Failure {
    Failure { code: 2, msg: msg.to_string() }
}

fn failed(msg: impl ToString) -> Failure {
    Failure { code: 1, msg: msg.to_string() }
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn precision(flag: u32) -> Result<u32, Failure> {
    let prec = match std::env::var("HECKE_PREC") {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("HECKE_PREC={v:?} is not a bit count")))?,
        Err(_) => flag,
    };
    if !(64..=1 << 16).contains(&prec) {
        return Err(usage(format!("precision {prec} outside 64..=65536 bits")));
    }
    Ok(prec)
}

fn verify(path: &Path, context: Option<Ctx>, report: Option<&Path>) -> Result<(), Failure> {
    let json = read(path)?;
    let requested = context.map(|c| match c {
        Ctx::F => ContextKind::F,
        Ctx::G => ContextKind::G,
    });
    let (_, rep) = verify_json(&json, requested).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let text = rep.to_string();
    emit(&text);
    if let Some(out) = report {
        fs::write(out, format!("{text}\n")).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    }
    if rep.ok() {
        Ok(())
    } else {
        let names: Vec<_> = rep.failures().map(|s| s.id.clone()).collect();
        Err(failed(format!("failing steps: {}", names.join(", "))))
    }
}

#[allow(clippy::too_many_arguments)]
fn form_check(
    path: &Path,
    k: Option<i64>,
    level: Option<u32>,
    eps: Option<i32>,
    prec: u32,
    tol: f64,
    min_len: usize,
) -> Result<(), Failure> {
    let (h, series) = parse_coefficients(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let checks = [("k", k, h.k), ("N", level.map(i64::from), h.level.into()), ("eps", eps.map(i64::from), h.eps.into())];
    for (name, flag, file) in checks {
        if let Some(v) = flag.filter(|v| *v != file) {
            return Err(usage(format!("--{name} {v} does not match the header value {file}")));
        }
    }
    if series.len() < min_len {
        return Err(usage(format!("file has {} coefficients, at least {min_len} required", series.len())));
    }
    let form = FormData::new(series, h.k, h.level, h.eps).map_err(usage)?;
    let cfg = EvalConfig::for_level(h.level).with_prec(prec).with_tol(tol);
    let cert = (h.level == 13).then(|| Certificate::from_json(certificate::SHIPPED_F).expect("shipped certificate parses"));
    let congruences = form_congruences(h.level, cert.as_ref());
    let report = formcheck(&form, &congruences, &cfg).map_err(|e| match e {
        NumericError::BadForm(_) | NumericError::Precision { .. } | NumericError::Series(_) | NumericError::NoPoints(_) => usage(e),
        other => failed(other),
    })?;
    emit(&report.to_string());
    if report.ok() {
        Ok(())
    } else {
        Err(failed("form check failed"))
    }
}

fn decompose(matrix: &str, budget: usize) -> Result<(), Failure> {
    let m = parse_matrix(matrix).map_err(|e| usage(format!("{matrix:?}: {e}")))?;
    let w = decompose_with_budget(&m, budget).map_err(|e| match e {
        Gamma0Error::NotMember(_, n) => failed(format!("{matrix} is not in Gamma0({n})")),
        other => failed(other),
    })?;
    emit(&w.to_string());
    Ok(())
}

fn density(x: &str, tol: f64, bound: i64) -> Result<(), Failure> {
    let xv = Float::parse(x).map(|p| Float::with_val(256, p)).map_err(|e| usage(format!("X = {x:?}: {e}")))?;
    if !(xv.is_finite() && xv > 0) || !(tol > 0.0) {
        return Err(usage("X and tol must be positive"));
    }
    let r = density_search(&xv, tol, bound).map_err(failed)?;
    let err = if r.err.is_zero() { "0".to_string() } else { format!("{:.2e}", r.err.to_f64()) };
    emit(&format!("(m,n)=({},{}) err={err}", r.m, r.n));
    Ok(())
}

fn asym(k: i64) -> Result<(), Failure> {
    let r = blowup_check(k).map_err(usage)?;
    if r.identically_zero {
        emit("IDENTICALLY ZERO");
    } else {
        emit(&format!("POLE ORDER {} — NONZERO", r.pole_order));
    }
    Ok(())
}

fn eta(spec: &str, len: usize, eps: i32, level: Option<u32>) -> Result<(), Failure> {
    let spec = parse_eta_spec(spec).map_err(usage)?;
    let weight: i64 = spec.iter().map(|(_, r)| r).sum();
    if weight % 4 != 0 {
        return Err(usage(format!("total exponent {weight} does not give an even weight")));
    }
    if eps != 1 && eps != -1 {
        return Err(usage("--eps must be 1 or -1"));
    }
    let lcm = spec.iter().fold(1u64, |acc, &(m, _)| num_integer::lcm(acc, m as u64)) as u32;
    let series = eta_product(&spec, len);
    let header = FormHeader { k: weight / 2, level: level.unwrap_or(lcm), eps };
    let text = write_coefficients(&header, &series).map_err(usage)?;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { path, context, report } => verify(&path, context, report.as_deref()),
        Command::Formcheck { path, k, level, eps, prec, tol, min_len } => {
            precision(prec).and_then(|prec| form_check(&path, k, level, eps, prec, tol, min_len))
        }
        Command::Decompose { matrix, budget } => decompose(&matrix, budget),
        Command::Density { x, tol, bound } => density(&x, tol, bound),
        Command::Asym { k } => asym(k),
        Command::Eta { spec, len, eps, level } => eta(&spec, len, eps, level),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("converse: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
