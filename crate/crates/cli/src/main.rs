//! `wzd`: batch front-end for Zariski decompositions and the MMP engine.
//!
//! Exit status: 0 on success, 1 when a validator rejects its input or a run
//! stops short of a minimal model or Mori fibre space, 2 on malformed input
//! or a failed precondition.

mod input;
mod render;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use wzd_core::decomp::{
    fujita_challengers, nef_threshold, validate_ckm, validate_fujita, validate_weak,
    DecompositionKind, WeakDecomposition,
};
use wzd_core::divisor::{alpha_split, theta};
use wzd_core::mmp::{
    pipeline, run_mmp, run_mmp_with_scaling, run_wzd_mmp, scaling_divisor, PipelineOptions,
};
use wzd_core::surface::zariski_decompose;
use wzd_core::toric::{log_discrepancy, log_smooth_model, sections, stable_base_locus};
use wzd_core::{Model, Outcome, Pair, Target};

use input::{
    load_boundary, load_divisor, load_model, load_raw_divisor,
    parse_vector, toric, CliError,
};

#[derive(Parser)]
#[command(name = "wzd", version, about = "Zariski decompositions and the minimal model program")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Append timing lines to this file (`-` for stderr).
    #[arg(long, global = true)]
    log: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Kb,
    Divisor,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Weak,
    Fujita,
    Ckm,
}

#[derive(Args)]
struct ModelArg {
    /// Model file: a fan, a surface lattice, or a tagged model.
    #[arg(long, visible_alias = "fan")]
    model: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long)]
    boundary: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Kb)]
    mode: ModeArg,
    /// The divisor to run on in divisor mode.
    #[arg(long)]
    divisor: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    step_limit: usize,
}

#[derive(Args)]
struct SplitArgs {
    /// Nef part `P`.
    #[arg(long = "p")]
    p: Option<PathBuf>,
    /// Negative part `N`.
    #[arg(long = "n")]
    n: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Zariski decomposition on a surface lattice.
    ZariskiSurface {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        divisor: PathBuf,
    },
    /// Validate a weak, Fujita or CKM decomposition of a divisor.
    Validate {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        divisor: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        /// Model carrying `P` and `N` when it differs from the base.
        #[arg(long)]
        decomposition_model: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        m_max: u64,
        #[arg(long, default_value_t = 50)]
        challengers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Largest `t` in [0,1] with `P + tN` nef.
    NefThreshold {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        split: SplitArgs,
    },
    /// MMP guided by a weak decomposition (trivial or scaling when none is given).
    Mmp {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        split: SplitArgs,
    },
    /// MMP with scaling of an ample divisor.
    ScalingMmp {
        #[command(flatten)]
        run: RunArgs,
        /// Scaling divisor; defaults to a multiple of a computed ample divisor.
        #[arg(long)]
        ample: Option<PathBuf>,
    },
    /// Characters of the global sections of `O(D)`.
    Sections {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        divisor: PathBuf,
    },
    /// Stable base locus over the multiples up to `m_max`.
    Sbl {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        divisor: PathBuf,
        #[arg(long, default_value_t = 24)]
        m_max: u64,
    },
    /// Log discrepancies of rays, or the log smooth model when no ray is given.
    Discrepancy {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        boundary: Option<PathBuf>,
        /// Primitive lattice vector such as `1,1`; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        ray: Vec<String>,
        #[arg(long, default_value_t = 64)]
        max_steps: usize,
    },
    /// Components of `N` outside the reduced boundary.
    Theta {
        #[arg(long)]
        boundary: PathBuf,
        #[arg(long = "n")]
        n: PathBuf,
    },
    /// First threshold at which `B + tN` gains a reduced component.
    AlphaSplit {
        #[arg(long)]
        boundary: PathBuf,
        #[arg(long = "n")]
        n: PathBuf,
    },
    /// Descent, decomposition-guided MMP and every validator on the result.
    Pipeline {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = 12)]
        m_max: u64,
        #[arg(long, default_value_t = 50)]
        challengers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

impl Command {
    fn verb(&self) -> &'static str {
        match self {
            Command::ZariskiSurface { .. } => "zariski-surface",
            Command::Validate { .. } => "validate",
            Command::NefThreshold { .. } => "nef-threshold",
            Command::Mmp { .. } => "mmp",
            Command::ScalingMmp { .. } => "scaling-mmp",
            Command::Sections { .. } => "sections",
            Command::Sbl { .. } => "sbl",
            Command::Discrepancy { .. } => "discrepancy",
            Command::Theta { .. } => "theta",
            Command::AlphaSplit { .. } => "alpha-split",
            Command::Pipeline { .. } => "pipeline",
        }
    }
}

/// An artifact and whether it affirms its question.
struct Artifact {
    value: Value,
    affirmed: bool,
}

fn artifact<T: Serialize>(v: &T, affirmed: bool) -> Result<Artifact, CliError> {
    let value = serde_json::to_value(v).map_err(|e| CliError::new("internal", e.to_string()))?;
    Ok(Artifact { value, affirmed })
}

fn target(run: &RunArgs, model: &Model) -> Result<Target, CliError> {
    match (run.mode, &run.divisor) {
        (ModeArg::Kb, None) => Ok(Target::LogCanonical),
        (ModeArg::Kb, Some(_)) => Err(CliError::new("usage", "--divisor requires --mode divisor")),
        (ModeArg::Divisor, Some(p)) => Ok(Target::Divisor(load_divisor(p, model)?)),
        (ModeArg::Divisor, None) => Err(CliError::new("usage", "--mode divisor requires --divisor")),
    }
}

fn pair_of(run: &RunArgs) -> Result<Pair, CliError> {
    let model = load_model(&run.model.model)?;
    let boundary = load_boundary(run.boundary.as_deref(), &model)?;
    Ok(Pair::new(model, boundary)?)
}

fn split_of(split: &SplitArgs, model: &Model) -> Result<Option<WeakDecomposition>, CliError> {
    match (&split.p, &split.n) {
        (None, None) => Ok(None),
        (Some(p), Some(n)) => Ok(Some(WeakDecomposition::new(
            DecompositionKind::Weak,
            model.clone(),
            load_divisor(p, model)?,
            load_divisor(n, model)?,
        )?)),
        _ => Err(CliError::new("usage", "--p and --n must be given together")),
    }
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::new("usage", format!("{flag} is required")))
}

fn reached(outcome: Outcome) -> bool {
    matches!(outcome, Outcome::MinimalModel | Outcome::MoriFibreSpace)
}

fn execute(command: &Command) -> Result<Artifact, CliError> {
    match command {
        Command::ZariskiSurface { model, divisor } => {
            let m = load_model(&model.model)?;
            let s = m
                .as_surface()
                .ok_or_else(|| CliError::new("precondition", "zariski-surface needs a surface lattice"))?;
            let d = load_divisor(divisor, &m)?;
            artifact(&zariski_decompose(&d, s)?, true)
        }
        Command::Validate {
            kind,
            model,
            divisor,
            split,
            decomposition_model,
            m_max,
            challengers,
            seed,
        } => {
            let base = load_model(&model.model)?;
            let d = load_divisor(divisor, &base)?;
            let w = match decomposition_model {
                Some(p) => load_model(p)?,
                None => base.clone(),
            };
            let p = load_divisor(require(&split.p, "--p")?, &w)?;
            let n = load_divisor(require(&split.n, "--n")?, &w)?;
            match kind {
                KindArg::Ckm => {
                    let x = toric(&base, "validate --kind ckm")?;
                    if w != base {
                        return Err(CliError::new(
                            "usage",
                            "a CKM decomposition lives on the base model",
                        ));
                    }
                    let report = validate_ckm(&d, &p, x, *m_max)?;
                    artifact(&report, report.valid)
                }
                KindArg::Weak | KindArg::Fujita => {
                    let wzd = WeakDecomposition::new(DecompositionKind::Weak, w.clone(), p, n)?;
                    let weak = validate_weak(&d, &base, &wzd)?;
                    if matches!(kind, KindArg::Weak) || !weak.valid {
                        return artifact(&weak, weak.valid);
                    }
                    let x = toric(&base, "validate --kind fujita")?;
                    let wt = toric(&w, "validate --kind fujita")?;
                    let family = fujita_challengers(x, &d, wt, *challengers, *seed)?;
                    let mut wzd = wzd;
                    wzd.kind = DecompositionKind::Fujita;
                    let report = validate_fujita(&d, &base, &wzd, &family)?;
                    artifact(&report, report.valid)
                }
            }
        }
        Command::NefThreshold { model, split } => {
            let m = load_model(&model.model)?;
            let p = load_divisor(require(&split.p, "--p")?, &m)?;
            let n = load_divisor(require(&split.n, "--n")?, &m)?;
            artifact(&nef_threshold(&p, &n, &m)?, true)
        }
        Command::Mmp { run, split } => {
            let pair = pair_of(run)?;
            let t = target(run, &pair.model)?;
            let trace = match split_of(split, &pair.model)? {
                Some(wzd) => run_wzd_mmp(&pair, &t, &wzd, run.step_limit)?,
                None => run_mmp(&pair, &t, run.step_limit)?,
            };
            artifact(&trace, reached(trace.outcome))
        }
        Command::ScalingMmp { run, ample } => {
            let pair = pair_of(run)?;
            let t = target(run, &pair.model)?;
            let h = match ample {
                Some(p) => load_divisor(p, &pair.model)?,
                None => {
                    let x = toric(&pair.model, "a computed scaling divisor")?;
                    scaling_divisor(x, &t.resolve(&pair)?)?
                }
            };
            let trace = run_mmp_with_scaling(&pair, &t, &h, run.step_limit)?;
            artifact(&trace, reached(trace.outcome))
        }
        Command::Sections { model, divisor } => {
            let m = load_model(&model.model)?;
            let x = toric(&m, "sections")?;
            let d = load_divisor(divisor, &m)?;
            let chars = sections(&d, x)?;
            artifact(&json!({ "divisor": d, "count": chars.len(), "characters": chars }), true)
        }
        Command::Sbl {
            model,
            divisor,
            m_max,
        } => {
            let m = load_model(&model.model)?;
            let x = toric(&m, "sbl")?;
            let d = load_divisor(divisor, &m)?;
            artifact(&stable_base_locus(&d, x, *m_max)?, true)
        }
        Command::Discrepancy {
            model,
            boundary,
            ray,
            max_steps,
        } => {
            let m = load_model(&model.model)?;
            let x = toric(&m, "discrepancy")?;
            let b = load_boundary(boundary.as_deref(), &m)?;
            if ray.is_empty() {
                return artifact(&log_smooth_model(x, &b, *max_steps)?, true);
            }
            let mut rows = Vec::new();
            for r in ray {
                let v = parse_vector(r)?;
                let a = log_discrepancy(&v, x, &b)?;
                rows.push(json!({ "ray": wzd_core::toric::ray_id(&v), "log_discrepancy": a }));
            }
            artifact(&json!({ "boundary": b, "rays": rows }), true)
        }
        Command::Theta { boundary, n } => {
            let b = wzd_core::Boundary::new(load_raw_divisor(boundary)?)?;
            let n = load_raw_divisor(n)?;
            artifact(&json!({ "theta": theta(&b, &n)? }), true)
        }
        Command::AlphaSplit { boundary, n } => {
            let b = wzd_core::Boundary::new(load_raw_divisor(boundary)?)?;
            let n = load_raw_divisor(n)?;
            artifact(&alpha_split(&b, &n)?, true)
        }
        Command::Pipeline {
            run,
            split,
            m_max,
            challengers,
            seed,
        } => {
            let pair = pair_of(run)?;
            let t = target(run, &pair.model)?;
            let wzd = split_of(split, &pair.model)?;
            let options = PipelineOptions {
                step_limit: run.step_limit,
                m_max: *m_max,
                challengers: *challengers,
                seed: *seed,
            };
            let report = pipeline(&pair, &t, wzd, &options)?;
            artifact(&report, report.valid)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(p) => fs::write(p, text).map_err(|e| CliError::new("io", format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(format: Format, value: &Value) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("values serialize");
            s.push('\n');
            s
        }
        Format::Text => render::text(value),
    }
}

fn log_line(path: &Path, line: &str) {
    if path == Path::new("-") {
        eprintln!("{line}");
        return;
    }
    if let Ok(mut f) = fs::OpenOptions::new().create(true).append(true).open(path) {
        let _ = writeln!(f, "{line}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = execute(&cli.command).and_then(|a| {
        emit(&cli, &render(cli.format, &a.value))?;
        Ok(a.affirmed)
    });
    let code: u8 = match &result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let body = json!({ "error": { "code": e.code, "message": e.message } });
            match cli.format {
                Format::Json => eprintln!("{body}"),
                Format::Text => eprintln!("error[{}]: {}", e.code, e.message),
            }
            2
        }
    };
    if let Some(path) = &cli.log {
        log_line(
            path,
            &format!(
                "verb={} exit={code} elapsed_ms={}",
                cli.command.verb(),
                started.elapsed().as_millis()
            ),
        );
    }
    ExitCode::from(code)
}
