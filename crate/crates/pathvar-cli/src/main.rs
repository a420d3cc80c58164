//! Command-line frontend: path generation and experiment drivers with
//! CSV/JSON outputs.
//!
//! Exit codes: 0 success, 2 invalid input, 1 numerical failure (resolution
//! guard, embedding failure).

use clap::{Args, Parser, Subcommand};
use pathvar::calculus::change_of_variable_residual;
use pathvar::error::ErrorClass;
use pathvar::functional::{
    functional_change_of_variable_residual, isometry_check, rough_smooth_decompose,
    CylindricalFunctional, GTerm,
};
use pathvar::functions::{ScalarFunction, VectorFunction};
use pathvar::localtime::{
    conjecture_experiment, local_time_raw, local_time_upcrossing, occupation_density,
    spatial_grid, tanaka_residual, test_panel, weak_pairing,
};
use pathvar::partitions::{lebesgue_dyadic, lebesgue_dyadic_unchecked, uniform_dyadic};
use pathvar::report;
use pathvar::roughpath::{
    canonical_lift, check_reduced_chen, controlled_from_function, grid_triples,
    integral_equivalence_check, rough_integral, CumulativeVariation,
};
use pathvar::variation::{pth_variation_scalar, signed_pth_sums, uniform_eval_times, GuardMode};
use pathvar::{generate_fbm, SampledPath, Scheme};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pathvar", version, about = "pathwise calculus along partition sequences")]
struct Cli {
    /// Worker threads (falls back to PATHVAR_THREADS, then all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PathArg {
    /// Input path CSV (header `t,x1[,...]`, uniform grid)
    #[arg(long)]
    path: PathBuf,
}

#[derive(Args, Clone)]
struct LevelRange {
    /// Refinement levels, inclusive `lo:hi`
    #[arg(long, value_parser = parse_range)]
    levels: (u32, u32),
}

#[derive(Args, Clone)]
struct EvalArg {
    /// Comma-separated eval times (default: 11 evenly spaced points)
    #[arg(long, value_parser = parse_times)]
    eval: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a fractional Brownian path and write it as CSV
    Fbm {
        #[arg(long)]
        hurst: f64,
        /// number of increments; the CSV has steps+1 sample rows
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cumulative p-th variation across levels (p even)
    Variation {
        #[command(flatten)]
        path: PathArg,
        #[arg(long)]
        p: u32,
        #[arg(long, value_parser = parse_scheme, default_value = "uniform")]
        scheme: Scheme,
        #[command(flatten)]
        levels: LevelRange,
        #[command(flatten)]
        eval: EvalArg,
        /// compute unresolved Lebesgue levels instead of failing
        #[arg(long)]
        relaxed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Signed p-th sums along Lebesgue partitions (p odd)
    Oddp {
        #[command(flatten)]
        path: PathArg,
        #[arg(long)]
        p: u32,
        #[command(flatten)]
        levels: LevelRange,
        #[command(flatten)]
        eval: EvalArg,
        #[arg(long)]
        relaxed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compensated Riemann sums and change-of-variable residuals
    Integrate {
        #[command(flatten)]
        path: PathArg,
        /// integrand, e.g. cos, monomial:m=4, poly:coeffs=1;0;2, ramp:a=0,m=3
        #[arg(long, value_parser = parse_function)]
        f: FunctionSpec,
        #[arg(long)]
        p: u32,
        #[arg(long, value_parser = parse_scheme, default_value = "uniform")]
        scheme: Scheme,
        #[command(flatten)]
        levels: LevelRange,
        #[command(flatten)]
        eval: EvalArg,
        #[arg(long)]
        relaxed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Functional compensated sums and the functional residual
    Functional {
        #[command(flatten)]
        path: PathArg,
        /// cylindrical functional, e.g. y, ym:m=2, ty, z, terms:1,0,2,0+0.5,1,1,1
        #[arg(long, value_parser = parse_functional)]
        functional: FunctionalSpec,
        /// kernel h for the running integral (default: identity)
        #[arg(long, value_parser = parse_function)]
        kernel: Option<FunctionSpec>,
        #[arg(long)]
        p: u32,
        #[arg(long, value_parser = parse_scheme, default_value = "uniform")]
        scheme: Scheme,
        #[command(flatten)]
        levels: LevelRange,
        #[command(flatten)]
        eval: EvalArg,
        #[arg(long)]
        relaxed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// p-th variation of F(., S) against the |∇F|^p-weighted variation of S
    Isometry {
        #[command(flatten)]
        path: PathArg,
        #[arg(long, value_parser = parse_functional)]
        functional: FunctionalSpec,
        #[arg(long, value_parser = parse_function)]
        kernel: Option<FunctionSpec>,
        #[arg(long)]
        p: u32,
        #[command(flatten)]
        levels: LevelRange,
        #[command(flatten)]
        eval: EvalArg,
        #[arg(long)]
        relaxed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rough-smooth split of F(., S) with variation diagnostics
    Decompose {
        #[command(flatten)]
        path: PathArg,
        #[arg(long, value_parser = parse_functional)]
        functional: FunctionalSpec,
        #[arg(long, value_parser = parse_function)]
        kernel: Option<FunctionSpec>,
        #[arg(long)]
        p: u32,
        #[command(flatten)]
        levels: LevelRange,
        #[command(flatten)]
        eval: EvalArg,
        #[arg(long)]
        relaxed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spatial local-time profile at one level and time
    Localtime {
        #[command(flatten)]
        path: PathArg,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value = "raw")]
        flavor: String,
        #[arg(long)]
        relaxed: bool,
        /// .csv gets the x,L table; .json adds the panel pairings
        #[arg(long)]
        out: PathBuf,
    },
    /// Residual of the exact local-time identity for ramp-family f
    Tanaka {
        #[command(flatten)]
        path: PathArg,
        #[arg(long)]
        p: u32,
        #[arg(long, value_parser = parse_function)]
        f: FunctionSpec,
        #[arg(long)]
        level: u32,
        #[arg(long, value_parser = parse_scheme, default_value = "lebesgue")]
        scheme: Scheme,
        #[arg(long)]
        t: Option<f64>,
        /// enforce the resolution guard (the identity itself is exact on the
        /// interpolant at any level)
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Crossing local time vs occupation density over an ensemble
    Conjecture {
        #[arg(long)]
        hurst: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 16)]
        ensemble: usize,
        #[command(flatten)]
        levels: LevelRange,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduced Chen relation of the canonical lift on random triples
    RoughpathChen {
        #[command(flatten)]
        path: PathArg,
        #[arg(long)]
        p: u32,
        /// level of the variation estimate feeding the lift
        #[arg(long)]
        level: u32,
        #[arg(long, default_value_t = 256)]
        triples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sewing integral of a ∇f-controlled path over dyadic refinements
    RoughpathIntegrate {
        #[command(flatten)]
        path: PathArg,
        #[arg(long)]
        p: u32,
        #[arg(long, value_parser = parse_function)]
        f: FunctionSpec,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gap between the sewing route and the compensated sums across levels
    Equivalence {
        #[command(flatten)]
        path: PathArg,
        #[arg(long, value_parser = parse_function)]
        f: FunctionSpec,
        #[arg(long)]
        p: u32,
        #[command(flatten)]
        levels: LevelRange,
        /// level of the variation estimate feeding the lift
        #[arg(long)]
        lift_level: u32,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone)]
struct FunctionSpec {
    raw: String,
    f: ScalarFunction,
}

#[derive(Debug, Clone)]
struct FunctionalSpec {
    raw: String,
    terms: Vec<GTerm>,
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: u32 = lo.parse().map_err(|_| format!("bad level `{lo}`"))?;
    let hi: u32 = hi.parse().map_err(|_| format!("bad level `{hi}`"))?;
    if lo > hi {
        return Err(format!("empty level range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_times(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|tok| tok.trim().parse::<f64>().map_err(|_| format!("bad time `{tok}`")))
        .collect()
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s {
        "uniform" => Ok(Scheme::UniformDyadic),
        "lebesgue" => Ok(Scheme::LebesgueDyadic),
        other => Err(format!("unknown scheme `{other}` (uniform|lebesgue)")),
    }
}

fn spec_params(s: &str) -> (String, Vec<(String, String)>) {
    match s.split_once(':') {
        None => (s.to_string(), Vec::new()),
        Some((name, rest)) => {
            let params = rest
                .split(',')
                .filter_map(|kv| {
                    kv.split_once('=').map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                })
                .collect();
            (name.to_string(), params)
        }
    }
}

fn get_f64(params: &[(String, String)], key: &str, default: f64) -> Result<f64, String> {
    match params.iter().find(|(k, _)| k == key) {
        None => Ok(default),
        Some((_, v)) => v.parse().map_err(|_| format!("bad value for {key}: `{v}`")),
    }
}

fn get_u32(params: &[(String, String)], key: &str) -> Result<Option<u32>, String> {
    match params.iter().find(|(k, _)| k == key) {
        None => Ok(None),
        Some((_, v)) => v.parse().map(Some).map_err(|_| format!("bad value for {key}: `{v}`")),
    }
}

fn parse_function(s: &str) -> Result<FunctionSpec, String> {
    let (name, params) = spec_params(s);
    let f = match name.as_str() {
        "x" | "identity" => ScalarFunction::Identity,
        "cos" => ScalarFunction::Cos {
            amp: get_f64(&params, "amp", 1.0)?,
            freq: get_f64(&params, "freq", 1.0)?,
        },
        "sin" => ScalarFunction::Sin {
            amp: get_f64(&params, "amp", 1.0)?,
            freq: get_f64(&params, "freq", 1.0)?,
        },
        "exp" => ScalarFunction::Exp {
            amp: get_f64(&params, "amp", 1.0)?,
            rate: get_f64(&params, "rate", 1.0)?,
        },
        "monomial" => {
            let m = get_u32(&params, "m")?.ok_or("monomial needs m=<power>")?;
            ScalarFunction::Monomial { m }
        }
        "poly" => {
            let coeffs = params
                .iter()
                .find(|(k, _)| k == "coeffs")
                .ok_or("poly needs coeffs=c0;c1;...")?
                .1
                .split(';')
                .map(|c| c.trim().parse::<f64>().map_err(|_| format!("bad coeff `{c}`")))
                .collect::<Result<Vec<_>, _>>()?;
            ScalarFunction::Polynomial { coeffs }
        }
        "ramp" => {
            let a = get_f64(&params, "a", 0.0)?;
            // the power defaults to p-1 at the call site when omitted
            let m = get_u32(&params, "m")?.unwrap_or(0);
            ScalarFunction::Ramp { a, m }
        }
        "const" => ScalarFunction::Constant { c: get_f64(&params, "c", 1.0)? },
        other => return Err(format!("unknown function `{other}`")),
    };
    Ok(FunctionSpec { raw: s.to_string(), f })
}

fn parse_functional(s: &str) -> Result<FunctionalSpec, String> {
    let (name, params) = spec_params(s);
    let terms = match name.as_str() {
        "y" => vec![GTerm::new(1.0, 0, 1, 0)],
        "ym" => {
            let m = get_u32(&params, "m")?.ok_or("ym needs m=<power>")?;
            vec![GTerm::new(1.0, 0, m, 0)]
        }
        "y2" => vec![GTerm::new(1.0, 0, 2, 0)],
        "ty" => vec![GTerm::new(1.0, 1, 1, 0)],
        "z" => vec![GTerm::new(1.0, 0, 0, 1)],
        "yz" => vec![GTerm::new(1.0, 0, 1, 1)],
        "terms" => {
            // terms:<c,i,j,k>+<c,i,j,k>+...
            let body = s.split_once(':').map(|x| x.1).unwrap_or("");
            body.split('+')
                .map(|term| {
                    let parts: Vec<&str> = term.split(',').collect();
                    if parts.len() != 4 {
                        return Err(format!("term `{term}` is not c,i,j,k"));
                    }
                    let c: f64 = parts[0].trim().parse().map_err(|_| "bad coef".to_string())?;
                    let i: u32 = parts[1].trim().parse().map_err(|_| "bad t power".to_string())?;
                    let j: u32 = parts[2].trim().parse().map_err(|_| "bad y power".to_string())?;
                    let k: u32 = parts[3].trim().parse().map_err(|_| "bad z power".to_string())?;
                    Ok(GTerm::new(c, i, j, k))
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        other => return Err(format!("unknown functional `{other}`")),
    };
    Ok(FunctionalSpec { raw: s.to_string(), terms })
}

fn load_path(path: &PathBuf) -> pathvar::Result<SampledPath> {
    let file = File::open(path)?;
    SampledPath::read_csv(BufReader::new(file))
}

fn guard_mode(relaxed: bool) -> GuardMode {
    if relaxed {
        GuardMode::Relaxed
    } else {
        GuardMode::Strict
    }
}

fn eval_or_default(eval: &EvalArg, horizon: f64) -> Vec<f64> {
    eval.eval.clone().unwrap_or_else(|| uniform_eval_times(horizon, 11))
}

fn emit(out: Option<&PathBuf>, report: &serde_json::Value) -> pathvar::Result<()> {
    let text = serde_json::to_string_pretty(report).expect("serializable report");
    match out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            writeln!(file, "{text}")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> pathvar::Result<()> {
    let threads = cli
        .threads
        .or_else(|| std::env::var("PATHVAR_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = threads {
        // a process-global pool; later installs are no-ops, which is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match cli.command {
        Command::Fbm { hurst, steps, seed, horizon, dim, out } => {
            let path = generate_fbm(hurst, horizon, steps, seed, dim)?;
            let mut file = BufWriter::new(File::create(&out)?);
            path.write_csv(&mut file)?;
            println!("wrote {} samples to {}", path.num_samples(), out.display());
            Ok(())
        }
        Command::Variation { path, p, scheme, levels, eval, relaxed, out } => {
            let s = load_path(&path.path)?;
            let eval_times = eval_or_default(&eval, s.horizon());
            let prof =
                pth_variation_scalar(&s, scheme, p, levels.levels, &eval_times, guard_mode(relaxed))?;
            let config = serde_json::json!({
                "command": "variation", "path": path.path, "p": p, "scheme": scheme,
                "levels": levels.levels, "eval": eval_times, "relaxed": relaxed,
            });
            emit(out.as_ref(), &report::envelope(config, prof.to_json()))
        }
        Command::Oddp { path, p, levels, eval, relaxed, out } => {
            let s = load_path(&path.path)?;
            let eval_times = eval_or_default(&eval, s.horizon());
            let prof = signed_pth_sums(&s, p, levels.levels, &eval_times, guard_mode(relaxed))?;
            let body = serde_json::json!({
                "p": prof.p,
                "levels": prof.levels.iter().map(|l| serde_json::json!({
                    "n": l.level, "resolved": l.resolved, "values": l.eval_values,
                })).collect::<Vec<_>>(),
                "diagnostics": prof.diagnostics,
            });
            let config = serde_json::json!({
                "command": "oddp", "path": path.path, "p": p,
                "levels": levels.levels, "eval": eval_times, "relaxed": relaxed,
            });
            emit(out.as_ref(), &report::envelope(config, body))
        }
        Command::Integrate { path, f, p, scheme, levels, eval, relaxed, out } => {
            let s = load_path(&path.path)?;
            let eval_times = eval_or_default(&eval, s.horizon());
            let func = VectorFunction::Scalar1d(resolve_ramp(f.f.clone(), p));
            let prof = change_of_variable_residual(
                &func,
                &s,
                scheme,
                p,
                levels.levels,
                &eval_times,
                guard_mode(relaxed),
            )?;
            let config = serde_json::json!({
                "command": "integrate", "path": path.path, "f": f.raw, "p": p,
                "scheme": scheme, "levels": levels.levels, "eval": eval_times,
                "relaxed": relaxed,
            });
            emit(out.as_ref(), &report::envelope(config, prof.to_json()))
        }
        Command::Functional { path, functional, kernel, p, scheme, levels, eval, relaxed, out } => {
            let s = load_path(&path.path)?;
            let eval_times = eval_or_default(&eval, s.horizon());
            let func = build_functional(&functional, kernel.as_ref());
            let prof = functional_change_of_variable_residual(
                &func,
                &s,
                scheme,
                p,
                levels.levels,
                &eval_times,
                guard_mode(relaxed),
            )?;
            let body = serde_json::json!({
                "p": prof.p,
                "scheme": prof.scheme,
                "mesh_warning": prof.mesh_warning,
                "eval_times": prof.eval_times,
                "levels": prof.levels.iter().map(|l| serde_json::json!({
                    "n": l.level, "resolved": l.resolved,
                    "values": l.values, "residuals": l.residuals,
                })).collect::<Vec<_>>(),
                "limit_estimate": prof.limit_estimate,
            });
            let config = serde_json::json!({
                "command": "functional", "path": path.path, "functional": functional.raw,
                "kernel": kernel.map(|k| k.raw), "p": p, "scheme": scheme,
                "levels": levels.levels, "eval": eval_times, "relaxed": relaxed,
            });
            emit(out.as_ref(), &report::envelope(config, body))
        }
        Command::Isometry { path, functional, kernel, p, levels, eval, relaxed, out } => {
            let s = load_path(&path.path)?;
            let eval_times = eval_or_default(&eval, s.horizon());
            let func = build_functional(&functional, kernel.as_ref());
            let rep = isometry_check(
                &func,
                &s,
                Scheme::UniformDyadic,
                p,
                levels.levels,
                &eval_times,
                guard_mode(relaxed),
            )?;
            let config = serde_json::json!({
                "command": "isometry", "path": path.path, "functional": functional.raw,
                "p": p, "levels": levels.levels, "eval": eval_times,
            });
            emit(out.as_ref(), &report::envelope(config, serde_json::to_value(&rep).unwrap()))
        }
        Command::Decompose { path, functional, kernel, p, levels, eval, relaxed, out } => {
            let s = load_path(&path.path)?;
            let eval_times = eval_or_default(&eval, s.horizon());
            let func = build_functional(&functional, kernel.as_ref());
            let rep = rough_smooth_decompose(
                &func,
                &s,
                Scheme::UniformDyadic,
                p,
                levels.levels,
                &eval_times,
                guard_mode(relaxed),
            )?;
            let config = serde_json::json!({
                "command": "decompose", "path": path.path, "functional": functional.raw,
                "p": p, "levels": levels.levels, "eval": eval_times,
            });
            emit(out.as_ref(), &report::envelope(config, serde_json::to_value(&rep).unwrap()))
        }
        Command::Localtime { path, p, level, t, flavor, relaxed, out } => {
            let s = load_path(&path.path)?;
            let t = t.unwrap_or(s.horizon());
            let grid = spatial_grid(&s, level)?;
            let profile = match flavor.as_str() {
                "raw" => {
                    let partition = if relaxed {
                        lebesgue_dyadic_unchecked(&s, level)?
                    } else {
                        lebesgue_dyadic(&s, level)?
                    };
                    local_time_raw(&s, &partition, p, t, &grid)?
                }
                "upcrossing" => {
                    local_time_upcrossing(&s, level, p, t, &grid, guard_mode(relaxed))?
                }
                "occupation" => occupation_density(&s, t, level)?,
                other => {
                    return Err(pathvar::Error::InvalidParameter(format!(
                        "unknown flavor `{other}` (raw|upcrossing|occupation)"
                    )))
                }
            };
            if out.extension().is_some_and(|e| e == "json") {
                let lo = *profile.xs.first().unwrap();
                let hi = *profile.xs.last().unwrap();
                let pairings: Vec<serde_json::Value> = test_panel(lo, hi)
                    .iter()
                    .map(|g| {
                        serde_json::json!({
                            "test_fn": format!("{g:?}"),
                            "pairing": weak_pairing(&profile, g),
                        })
                    })
                    .collect();
                let body = serde_json::json!({
                    "level": profile.level, "t": profile.t, "p": profile.p,
                    "flavor": profile.flavor,
                    "truncated_support": profile.truncated_support,
                    "degenerate": profile.degenerate,
                    "x": profile.xs, "values": profile.values,
                    "pairings": pairings,
                });
                let config = serde_json::json!({
                    "command": "localtime", "path": path.path, "p": p, "level": level,
                    "t": t, "flavor": flavor, "relaxed": relaxed,
                });
                emit(Some(&out), &report::envelope(config, body))
            } else {
                let mut file = BufWriter::new(File::create(&out)?);
                profile.write_csv(&mut file)?;
                println!("wrote {} grid points to {}", profile.xs.len(), out.display());
                Ok(())
            }
        }
        Command::Tanaka { path, p, f, level, scheme, t, strict, out } => {
            let s = load_path(&path.path)?;
            let t = t.unwrap_or(s.horizon());
            let func = resolve_ramp(f.f.clone(), p);
            let partition = match scheme {
                Scheme::UniformDyadic => uniform_dyadic(level, s.horizon()),
                Scheme::LebesgueDyadic => {
                    if strict {
                        lebesgue_dyadic(&s, level)?
                    } else {
                        lebesgue_dyadic_unchecked(&s, level)?
                    }
                }
            };
            let residual = tanaka_residual(&func, &s, &partition, p, t)?;
            println!("tanaka residual at t={t}, level {level}: {residual:e}");
            if out.is_some() {
                let config = serde_json::json!({
                    "command": "tanaka", "path": path.path, "p": p, "f": f.raw,
                    "level": level, "scheme": scheme, "t": t, "strict": strict,
                });
                let body = serde_json::json!({ "residual": residual });
                emit(out.as_ref(), &report::envelope(config, body))?;
            }
            Ok(())
        }
        Command::Conjecture { hurst, steps, ensemble, levels, seed, horizon, out } => {
            let threads = threads.unwrap_or_else(num_threads_default);
            let rep = conjecture_experiment(
                hurst,
                horizon,
                steps,
                ensemble,
                levels.levels,
                seed,
                threads,
            )?;
            let config = serde_json::json!({
                "command": "conjecture", "hurst": hurst, "steps": steps,
                "ensemble": ensemble, "levels": levels.levels, "seed": seed,
                "horizon": horizon,
            });
            emit(out.as_ref(), &report::envelope(config, serde_json::to_value(&rep).unwrap()))
        }
        Command::RoughpathChen { path, p, level, triples, seed, tol, out } => {
            let s = load_path(&path.path)?;
            let x = lift_from_path(&s, p, level)?;
            let panel = grid_triples(&s, triples, seed);
            let rep = check_reduced_chen(&x, &panel, tol)?;
            let config = serde_json::json!({
                "command": "roughpath-chen", "path": path.path, "p": p, "level": level,
                "triples": triples, "seed": seed, "tol": tol,
            });
            emit(out.as_ref(), &report::envelope(config, serde_json::to_value(&rep).unwrap()))
        }
        Command::RoughpathIntegrate { path, p, f, depth, level, t, out } => {
            let s = load_path(&path.path)?;
            let t = t.unwrap_or(s.horizon());
            let x = lift_from_path(&s, p, level)?;
            let func = VectorFunction::Scalar1d(resolve_ramp(f.f.clone(), p));
            let y = controlled_from_function(&func, &x)?;
            let rep = rough_integral(&y, &x, t, depth)?;
            let config = serde_json::json!({
                "command": "roughpath-integrate", "path": path.path, "p": p, "f": f.raw,
                "depth": depth, "level": level, "t": t,
            });
            emit(out.as_ref(), &report::envelope(config, serde_json::to_value(&rep).unwrap()))
        }
        Command::Equivalence { path, f, p, levels, lift_level, t, out } => {
            let s = load_path(&path.path)?;
            let t = t.unwrap_or(s.horizon());
            let x = lift_from_path(&s, p, lift_level)?;
            let func = VectorFunction::Scalar1d(resolve_ramp(f.f.clone(), p));
            let rep = integral_equivalence_check(&func, &s, &x, levels.levels, t)?;
            let config = serde_json::json!({
                "command": "equivalence", "path": path.path, "f": f.raw, "p": p,
                "levels": levels.levels, "lift_level": lift_level, "t": t,
            });
            emit(out.as_ref(), &report::envelope(config, serde_json::to_value(&rep).unwrap()))
        }
    }
}

/// `ramp` with no explicit power defaults to the point-mass family for the
/// requested p.
fn resolve_ramp(f: ScalarFunction, p: u32) -> ScalarFunction {
    match f {
        ScalarFunction::Ramp { a, m: 0 } => ScalarFunction::Ramp { a, m: p.saturating_sub(1) },
        other => other,
    }
}

fn build_functional(spec: &FunctionalSpec, kernel: Option<&FunctionSpec>) -> CylindricalFunctional {
    let kernel = kernel.map(|k| k.f.clone()).unwrap_or(ScalarFunction::Identity);
    CylindricalFunctional::new(spec.terms.clone(), kernel)
}

fn lift_from_path(
    s: &SampledPath,
    p: u32,
    level: u32,
) -> pathvar::Result<pathvar::roughpath::ReducedRoughPath> {
    let prof = pth_variation_scalar(
        s,
        Scheme::UniformDyadic,
        p,
        (level, level),
        &[s.horizon()],
        GuardMode::Strict,
    )?;
    let cum = CumulativeVariation::from_scalar_level(prof.finest(), p);
    canonical_lift(s, cum, p)
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err.class() {
                ErrorClass::Validation => ExitCode::from(2),
                ErrorClass::Numerical => ExitCode::from(1),
            }
        }
    }
}
