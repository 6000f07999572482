//! `fqcong`: command-line front end for the congruence-class library.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails,
//! 2 for bad input or a refused enumeration cap.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fq_congruence::congruence::{
    delta_k_sampled, full_census_with_cap, ClassTally, DeltaCount, DEFAULT_TUPLE_CAP,
};
use fq_congruence::geometry::Space;
use fq_congruence::gfarith::FieldCtx;
use fq_congruence::harness::{
    canonical_json, render, resolve_set, run, Check, ExperimentReport, ExperimentSpec,
    HarnessError, OutputFormat, Sampling, SetSource, SpecFile,
};
use fq_congruence::isogroup::{OrthogonalGroup, DEFAULT_CANDIDATE_CAP};

#[derive(Parser)]
#[command(name = "fqcong", version, about = "Congruence classes of point configurations in F_q^d")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Describe GF(p^e): modulus, elements, traces and squares.
    FieldInfo {
        #[arg(long)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        e: u32,
        /// Monic modulus coefficients, constant term first, e.g. `1,0,1`.
        #[arg(long, value_delimiter = ',')]
        modulus: Option<Vec<u32>>,
    },
    /// Enumerate O(F_q^d) and check the group axioms.
    Group {
        #[command(flatten)]
        space: SpaceArgs,
        /// Also print every matrix, row-major element codes.
        #[arg(long)]
        list: bool,
    },
    /// Exact census of congruence classes of (k+1)-point configurations in F_q^d.
    Census {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_TUPLE_CAP as u64)]
        cap: u64,
    },
    /// Count the congruence classes determined by a point set.
    Classes {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = DEFAULT_TUPLE_CAP as u64)]
        cap: u64,
        /// Count distinct classes among this many random tuples instead (a lower bound).
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Run lemma and theorem checks on one point set.
    Verify {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        k: usize,
        #[arg(long = "check", value_enum, value_delimiter = ',', required = true)]
        checks: Vec<VerifyCheck>,
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = DEFAULT_TUPLE_CAP as u64)]
        cap: u64,
    },
    /// Run experiments from a spec file or from flags and write a report.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SpaceArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    d: usize,
    #[arg(long, value_delimiter = ',')]
    modulus: Option<Vec<u32>>,
}

#[derive(Args)]
struct SetArgs {
    /// Set file: one vector per line, comma-separated element codes.
    #[arg(long, conflicts_with_all = ["random", "full_space"])]
    set: Option<PathBuf>,
    /// Random set of N points; without N the threshold size ceil(q^s) is used.
    #[arg(long, num_args = 0..=1, conflicts_with = "full_space")]
    random: Option<Option<u64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use all of F_q^d.
    #[arg(long)]
    full_space: bool,
}

impl SetArgs {
    fn source(&self) -> Option<SetSource> {
        if let Some(path) = &self.set {
            Some(SetSource::File { path: path.clone() })
        } else if let Some(size) = self.random {
            Some(SetSource::Random {
                size,
                seed: self.seed,
            })
        } else if self.full_space {
            Some(SetSource::FullSpace)
        } else {
            None
        }
    }

    /// Random threshold-size set when nothing is given.
    fn source_or_default(&self) -> SetSource {
        self.source().unwrap_or(SetSource::Random {
            size: None,
            seed: self.seed,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyCheck {
    Lemma3,
    Lemma4,
    Lemma5,
    Thm1,
    Thm2,
}

impl From<VerifyCheck> for Check {
    fn from(c: VerifyCheck) -> Check {
        match c {
            VerifyCheck::Lemma3 => Check::Lemma3,
            VerifyCheck::Lemma4 => Check::Lemma4,
            VerifyCheck::Lemma5 => Check::Lemma5,
            VerifyCheck::Thm1 => Check::Census,
            VerifyCheck::Thm2 => Check::Thm2chain,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Census,
    Lemma3,
    Lemma4,
    Lemma5,
    Thm2chain,
}

impl From<CheckArg> for Check {
    fn from(c: CheckArg) -> Check {
        match c {
            CheckArg::Census => Check::Census,
            CheckArg::Lemma3 => Check::Lemma3,
            CheckArg::Lemma4 => Check::Lemma4,
            CheckArg::Lemma5 => Check::Lemma5,
            CheckArg::Thm2chain => Check::Thm2chain,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON spec file holding one spec or a list.
    #[arg(long, conflicts_with_all = ["q", "d", "k", "checks"])]
    spec: Option<PathBuf>,
    #[arg(long, required_unless_present = "spec")]
    q: Option<u64>,
    #[arg(long, required_unless_present = "spec")]
    d: Option<usize>,
    #[arg(long, required_unless_present = "spec")]
    k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    modulus: Option<Vec<u32>>,
    #[arg(long, value_enum, value_delimiter = ',')]
    checks: Vec<CheckArg>,
    #[command(flatten)]
    set: SetArgs,
    /// Fall back to this many random tuples when the exact class count is over the cap.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    cap: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

/// Outcome of a subcommand before it becomes an exit code.
enum Status {
    Pass,
    CheckFailed,
    CapOrInput,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(1),
        Ok(Status::CapOrInput) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<Status> {
    if let Some(w) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .context("building worker pool")?;
    }
    match &cli.cmd {
        Cmd::FieldInfo { p, e, modulus } => field_info(*p, *e, modulus.as_deref()),
        Cmd::Group { space, list } => group(space, *list),
        Cmd::Census { space, k, cap } => census(space, *k, *cap),
        Cmd::Classes {
            space,
            k,
            set,
            cap,
            samples,
        } => classes(space, *k, set, *cap, *samples),
        Cmd::Verify {
            space,
            k,
            checks,
            set,
            cap,
        } => {
            let mut spec = ExperimentSpec::new(
                space.q,
                space.d,
                *k,
                set.source_or_default(),
                checks.iter().map(|&c| c.into()).collect(),
            );
            spec.modulus = space.modulus.clone();
            spec.tuple_cap = Some(*cap);
            spec.workers = cli.workers;
            let report = run(&spec)?;
            emit(&report.to_canonical_json()?)?;
            Ok(status_of(std::slice::from_ref(&report)))
        }
        Cmd::Experiment(args) => experiment(args, cli.workers),
    }
}

fn build_space(args: &SpaceArgs) -> anyhow::Result<Space> {
    let field = FieldCtx::of_order(args.q, args.modulus.as_deref())?;
    Ok(Space::new(Arc::new(field), args.d)?)
}

/// Writes to stdout; a closed pipe downstream is not an error.
fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{}", text.trim_end()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    emit(&canonical_json(value)?)
}

fn field_info(p: u32, e: u32, modulus: Option<&[u32]>) -> anyhow::Result<Status> {
    let f = FieldCtx::new(p, e, modulus)?;
    let elements: Vec<_> = f
        .elements()
        .map(|a| {
            json!({
                "code": a.code(),
                "trace": f.trace(a).code(),
                "square": f.is_square(a),
                "inverse": f.inv(a).ok().map(|b| b.code()),
            })
        })
        .collect();
    print_json(&json!({
        "p": f.p(),
        "e": f.e(),
        "q": f.q(),
        "modulus": f.modulus(),
        "modulus_poly": f.modulus_string(),
        "field": f.to_string(),
        "elements": elements,
    }))?;
    Ok(Status::Pass)
}

fn group(args: &SpaceArgs, list: bool) -> anyhow::Result<Status> {
    let space = build_space(args)?;
    let g = match OrthogonalGroup::enumerate_with_cap(&space, DEFAULT_CANDIDATE_CAP) {
        Ok(g) => g,
        Err(e) => return Err(HarnessError::from(e).into()),
    };
    let axioms = g.verify_axioms();
    let mut out = json!({
        "q": space.q(),
        "d": space.dim(),
        "order": g.order(),
        "normalized_order": g.normalized_order(),
        "axioms_ok": axioms,
        "transporters": g.transporter_profile(),
    });
    if list {
        let mats: Vec<Vec<u32>> = g
            .elements()
            .iter()
            .map(|m| m.matrix().data().iter().map(|x| x.code()).collect())
            .collect();
        out["elements"] = json!(mats);
    }
    print_json(&out)?;
    Ok(if axioms { Status::Pass } else { Status::CheckFailed })
}

fn census(args: &SpaceArgs, k: usize, cap: u64) -> anyhow::Result<Status> {
    let space = build_space(args)?;
    let g = OrthogonalGroup::enumerate(&space).map_err(HarnessError::from)?;
    match full_census_with_cap(&g, k, cap as u128) {
        Ok(report) => {
            print_json(&report)?;
            Ok(if report.passed() { Status::Pass } else { Status::CheckFailed })
        }
        Err(e) => {
            let e = HarnessError::from(e);
            if e.is_cap() {
                eprintln!("error: {e}");
                Ok(Status::CapOrInput)
            } else {
                Err(e.into())
            }
        }
    }
}

fn classes(
    args: &SpaceArgs,
    k: usize,
    set: &SetArgs,
    cap: u64,
    samples: Option<u64>,
) -> anyhow::Result<Status> {
    let space = build_space(args)?;
    let source = set
        .source()
        .context("one of --set, --random or --full-space is required")?;
    let spec = ExperimentSpec::new(args.q, args.d, k, source, vec![]);
    let points = resolve_set(&space, &spec)?;
    let count: DeltaCount = match samples {
        Some(n) => delta_k_sampled(&points, k, n, set.seed)?,
        None => match ClassTally::over_set(&points, k, cap as u128) {
            Ok(t) => DeltaCount::from_tally(&points, &t),
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(Status::CapOrInput);
            }
        },
    };
    let distances = space.distance_set(&points)?;
    print_json(&json!({
        "seed": match spec.source { SetSource::Random { seed, .. } => Some(seed), _ => None },
        "set_size": points.len(),
        "distance_set_size": distances.len(),
        "delta": count,
    }))?;
    Ok(Status::Pass)
}

fn experiment(args: &ExperimentArgs, workers: Option<usize>) -> anyhow::Result<Status> {
    let specs = match &args.spec {
        Some(path) => SpecFile::read(path).with_context(|| format!("reading {}", path.display()))?,
        None => {
            let mut spec = ExperimentSpec::new(
                args.q.expect("required by clap"),
                args.d.expect("required by clap"),
                args.k.expect("required by clap"),
                args.set.source_or_default(),
                args.checks.iter().map(|&c| c.into()).collect(),
            );
            spec.modulus = args.modulus.clone();
            spec.tuple_cap = args.cap;
            spec.sampling = args.samples.map(|samples| Sampling {
                samples,
                seed: args.set.seed,
            });
            vec![spec]
        }
    };
    let mut reports: Vec<ExperimentReport> = Vec::with_capacity(specs.len());
    for mut spec in specs {
        if spec.workers.is_none() {
            spec.workers = workers;
        }
        log::info!("running q={} d={} k={}", spec.q, spec.d, spec.k);
        reports.push(run(&spec)?);
    }
    let format = args.format.into();
    let text = render(&reports, format)?;
    match &args.out {
        Some(path) => std::fs::write(path, format!("{}\n", text.trim_end()))
            .with_context(|| format!("writing {}", path.display()))?,
        None => emit(&text)?,
    }
    Ok(status_of(&reports))
}

fn status_of(reports: &[ExperimentReport]) -> Status {
    if reports.iter().any(|r| r.cap_hit()) {
        Status::CapOrInput
    } else if reports.iter().all(|r| r.passed) {
        Status::Pass
    } else {
        Status::CheckFailed
    }
}
