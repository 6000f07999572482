//! Experiment specs, seeded random sets and report assembly.
//!
//! A spec names the space, where the point set comes from and which checks
//! to run. `run` executes the checks on a dedicated worker pool and
//! assembles the report on the calling thread. Checks that hit a cap are
//! recorded in the flags and leave their report fields null.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::congruence::{
    delta_k_sampled, full_census_with_cap, threshold_exponent, threshold_set_size,
    CensusReport, ClassTally, CongruenceError, DeltaCount, DEFAULT_TUPLE_CAP,
};
use crate::geometry::{GeometryError, PointSet, Space};
use crate::gfarith::{FieldCtx, FieldError};
use crate::isogroup::{IsoError, OrthogonalGroup, TransporterProfile, DEFAULT_CANDIDATE_CAP};
use crate::spectral::{
    lemma3_check, lemma_bound_ratios, theorem2_chain, ChainReport, Lemma3Report, MomentReport,
    NuTable, SpectralError,
};

/// Name of the generator behind every random set.
pub const PRNG_NAME: &str = "pcg64 (rand_pcg::Pcg64::seed_from_u64)";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Iso(#[from] IsoError),
    #[error(transparent)]
    Congruence(#[from] CongruenceError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("cannot sample {requested} points from a space of {available}")]
    SampleTooLarge { requested: u64, available: u64 },
    #[error("random sets must have at least one point")]
    EmptySample,
    #[error("spec: {0}")]
    InvalidSpec(String),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Whether the error is a cap refusal rather than bad input.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            HarnessError::Iso(IsoError::CapExceeded { .. })
                | HarnessError::Congruence(CongruenceError::CapExceeded { .. })
                | HarnessError::Congruence(CongruenceError::Iso(IsoError::CapExceeded { .. }))
                | HarnessError::Geometry(GeometryError::SpaceTooLarge { .. })
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Census,
    Lemma3,
    Lemma4,
    Lemma5,
    Thm2chain,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::Census,
        Check::Lemma3,
        Check::Lemma4,
        Check::Lemma5,
        Check::Thm2chain,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSource {
    File { path: PathBuf },
    /// `size: None` means the threshold size `ceil(q^s)`.
    Random { size: Option<u64>, seed: u64 },
    FullSpace,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Random-tuple sampling used for `|Delta_k(E)|` when the exact count is over the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub q: u64,
    pub d: usize,
    pub k: usize,
    #[serde(default)]
    pub modulus: Option<Vec<u32>>,
    pub source: SetSource,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub sampling: Option<Sampling>,
    #[serde(default)]
    pub tuple_cap: Option<u64>,
}

impl ExperimentSpec {
    pub fn new(q: u64, d: usize, k: usize, source: SetSource, checks: Vec<Check>) -> Self {
        ExperimentSpec {
            q,
            d,
            k,
            modulus: None,
            source,
            checks,
            output: None,
            format: OutputFormat::Json,
            workers: None,
            sampling: None,
            tuple_cap: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn wants(&self, c: Check) -> bool {
        self.checks.contains(&c)
    }
}

/// A spec file holds one spec or a list of them.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SpecFile {
    One(ExperimentSpec),
    Many(Vec<ExperimentSpec>),
}

impl SpecFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Vec<ExperimentSpec>, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Ok(match serde_json::from_str(&text)? {
            SpecFile::One(s) => vec![s],
            SpecFile::Many(v) => v,
        })
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ReportFlags {
    /// Checks skipped because an enumeration would exceed its cap.
    pub cap_exceeded: Vec<String>,
    /// `delta_k` is a sampled lower bound, not an exact count.
    pub sampled: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub check: Check,
    /// `None` when the check could not run.
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub prng: &'static str,
    pub seed: Option<u64>,
    pub field: String,
    pub set_size: usize,
    pub threshold_exponent: String,
    pub threshold_set_size: u64,
    pub group_order: Option<usize>,
    pub census: Option<CensusReport>,
    /// `|Delta_k(E)|`.
    pub delta: Option<DeltaCount>,
    pub lemma3: Option<Lemma3Report>,
    pub moments: Option<MomentReport>,
    pub transporters: Option<TransporterProfile>,
    pub chain: Option<ChainReport>,
    /// `|Delta_k(F_q^d)|`.
    pub full_space_classes: Option<u64>,
    /// `|Delta_k(E)| / |Delta_k(F_q^d)|`.
    pub proportion: Option<f64>,
    /// `2^{-k^2}`, the constant in the lower bound on the proportion.
    pub proportion_reference: f64,
    pub outcomes: Vec<CheckOutcome>,
    pub flags: ReportFlags,
    pub passed: bool,
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    /// Canonical JSON: object keys sorted, absent results as `null`.
    pub fn to_canonical_json(&self) -> Result<String, HarnessError> {
        canonical_json(self)
    }

    pub fn cap_hit(&self) -> bool {
        !self.flags.cap_exceeded.is_empty()
    }
}

/// Serializes through `serde_json::Value`, whose maps keep keys sorted.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String, HarnessError> {
    let v = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&v)?)
}

/// `n` distinct points drawn uniformly from the space, fixed by `seed`.
pub fn sample_set(space: &Space, n: u64, seed: u64) -> Result<PointSet, HarnessError> {
    if n == 0 {
        return Err(HarnessError::EmptySample);
    }
    if n > space.size() {
        return Err(HarnessError::SampleTooLarge {
            requested: n,
            available: space.size(),
        });
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, space.size() as usize, n as usize);
    Ok(PointSet::from_codes(space, picks.into_iter().map(|c| c as u64))?)
}

/// Builds the point set named by the spec.
pub fn resolve_set(space: &Space, spec: &ExperimentSpec) -> Result<PointSet, HarnessError> {
    match &spec.source {
        SetSource::File { path } => Ok(PointSet::read_file(space, path)?),
        SetSource::Random { size, seed } => {
            let n = size.unwrap_or_else(|| threshold_set_size(spec.q, spec.d, spec.k));
            sample_set(space, n, *seed)
        }
        SetSource::FullSpace => Ok(PointSet::full(space)),
    }
}

/// Runs the spec on its own worker pool and writes the report if an output
/// path is set.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = spec.workers {
        if w == 0 {
            return Err(HarnessError::InvalidSpec("workers must be positive".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build()?;
    let report = pool.install(|| run_inner(spec))?;
    if let Some(path) = &spec.output {
        write_reports(std::slice::from_ref(&report), path, spec.format)?;
    }
    Ok(report)
}

fn run_inner(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    let start = Instant::now();
    if spec.k == 0 {
        return Err(HarnessError::InvalidSpec("k must be at least 1".into()));
    }
    let field = Arc::new(FieldCtx::of_order(spec.q, spec.modulus.as_deref())?);
    let space = Space::new(field.clone(), spec.d)?;
    let set = resolve_set(&space, spec)?;
    let cap = spec.tuple_cap.map_or(DEFAULT_TUPLE_CAP, u128::from);
    let mut flags = ReportFlags::default();
    let mut outcomes = Vec::new();

    let group = if !spec.checks.is_empty() {
        match OrthogonalGroup::enumerate_with_cap(&space, DEFAULT_CANDIDATE_CAP) {
            Ok(g) => Some(g),
            Err(e @ IsoError::CapExceeded { .. }) => {
                flags.cap_exceeded.push(format!("group: {e}"));
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let mut census = None;
    let mut full_space_classes = None;
    if let Some(g) = &group {
        if spec.wants(Check::Census) || spec.wants(Check::Thm2chain) {
            if let Some(c) = capped(full_census_with_cap(g, spec.k, cap), "census", &mut flags)? {
                full_space_classes = Some(c.total_classes);
                census = Some(c);
            }
        }
    }
    if spec.wants(Check::Census) {
        outcomes.push(CheckOutcome {
            check: Check::Census,
            passed: census.as_ref().map(|c| c.passed()),
        });
    }

    let spectral_wanted = [Check::Lemma3, Check::Lemma4, Check::Lemma5, Check::Thm2chain]
        .iter()
        .any(|c| spec.wants(*c));
    let nu = match (&group, spectral_wanted) {
        (Some(g), true) => Some(NuTable::new(&set, g)?),
        _ => None,
    };

    let mut lemma3 = None;
    if spec.wants(Check::Lemma3) {
        if let (Some(g), Some(nu)) = (&group, &nu) {
            lemma3 = Some(lemma3_check(&set, g, nu)?);
        }
        outcomes.push(CheckOutcome {
            check: Check::Lemma3,
            passed: lemma3.as_ref().map(|r| r.passed),
        });
    }

    let mut moments = None;
    let mut transporters = None;
    if spec.wants(Check::Lemma4) || spec.wants(Check::Lemma5) {
        if let (Some(g), Some(nu)) = (&group, &nu) {
            moments = Some(lemma_bound_ratios(&set, g, nu, spec.k)?);
            if spec.wants(Check::Lemma4) {
                transporters = Some(g.transporter_profile());
            }
        }
        for c in [Check::Lemma4, Check::Lemma5] {
            if spec.wants(c) {
                let passed = moments.as_ref().map(|m| match c {
                    Check::Lemma4 => {
                        m.row_sums_ok
                            && m.second_moment_split_ok
                            && m.lemma4a.ratio.is_finite()
                            && m.lemma4b.ratio.is_finite()
                    }
                    _ => m.row_sums_ok && m.lemma5.ratio.is_finite(),
                });
                outcomes.push(CheckOutcome { check: c, passed });
            }
        }
    }

    let mut delta = None;
    let mut chain = None;
    if spec.wants(Check::Thm2chain) {
        delta = match ClassTally::over_set(&set, spec.k, cap) {
            Ok(t) => Some(DeltaCount::from_tally(&set, &t)),
            Err(CongruenceError::CapExceeded { .. }) if spec.sampling.is_some() => {
                let s = spec.sampling.expect("checked above");
                flags.sampled = true;
                Some(delta_k_sampled(&set, spec.k, s.samples, s.seed)?)
            }
            Err(e) => capped(Err(e), "delta_k", &mut flags)?,
        };
        if let (Some(dc), Some(nu)) = (&delta, &nu) {
            if dc.is_exact() {
                chain = Some(theorem2_chain(&set, nu, dc)?);
            }
        }
        outcomes.push(CheckOutcome {
            check: Check::Thm2chain,
            passed: chain.as_ref().map(|c| c.holds()),
        });
    }

    let proportion = match (&delta, full_space_classes) {
        (Some(dc), Some(full)) if full > 0 => Some(dc.classes as f64 / full as f64),
        _ => None,
    };
    let passed = flags.cap_exceeded.is_empty() && outcomes.iter().all(|o| o.passed == Some(true));
    let seed = match spec.source {
        SetSource::Random { seed, .. } => Some(seed),
        _ => None,
    };
    Ok(ExperimentReport {
        spec: spec.clone(),
        prng: PRNG_NAME,
        seed,
        field: field.to_string(),
        set_size: set.len(),
        threshold_exponent: threshold_exponent(spec.d, spec.k).to_string(),
        threshold_set_size: threshold_set_size(spec.q, spec.d, spec.k),
        group_order: group.as_ref().map(|g| g.order()),
        census,
        delta,
        lemma3,
        moments,
        transporters,
        chain,
        full_space_classes,
        proportion,
        proportion_reference: 2f64.powi(-((spec.k * spec.k) as i32)),
        outcomes,
        flags,
        passed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Turns a cap refusal into a flag and `None`; other errors propagate.
fn capped<T>(
    r: Result<T, CongruenceError>,
    what: &str,
    flags: &mut ReportFlags,
) -> Result<Option<T>, HarnessError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(
            e @ (CongruenceError::CapExceeded { .. }
            | CongruenceError::Iso(IsoError::CapExceeded { .. })),
        ) => {
            flags.cap_exceeded.push(format!("{what}: {e}"));
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

/// One CSV line per report.
#[derive(Debug, Serialize)]
struct CsvRow {
    q: u64,
    d: usize,
    k: usize,
    seed: Option<u64>,
    set_size: usize,
    group_order: Option<usize>,
    delta_k: Option<u64>,
    delta_k_exact: Option<bool>,
    full_space_classes: Option<u64>,
    proportion: Option<f64>,
    census_passed: Option<bool>,
    lemma3_max_deviation: Option<f64>,
    lemma4a_ratio: Option<f64>,
    lemma4b_ratio: Option<f64>,
    lemma5_ratio: Option<f64>,
    chain_holds: Option<bool>,
    cap_exceeded: bool,
    sampled: bool,
    passed: bool,
    wall_clock_seconds: f64,
}

impl From<&ExperimentReport> for CsvRow {
    fn from(r: &ExperimentReport) -> Self {
        CsvRow {
            q: r.spec.q,
            d: r.spec.d,
            k: r.spec.k,
            seed: r.seed,
            set_size: r.set_size,
            group_order: r.group_order,
            delta_k: r.delta.as_ref().map(|d| d.classes),
            delta_k_exact: r.delta.as_ref().map(|d| d.is_exact()),
            full_space_classes: r.full_space_classes,
            proportion: r.proportion,
            census_passed: r.census.as_ref().map(|c| c.passed()),
            lemma3_max_deviation: r.lemma3.as_ref().map(|l| l.max_deviation),
            lemma4a_ratio: r.moments.as_ref().map(|m| m.lemma4a.ratio),
            lemma4b_ratio: r.moments.as_ref().map(|m| m.lemma4b.ratio),
            lemma5_ratio: r.moments.as_ref().map(|m| m.lemma5.ratio),
            chain_holds: r.chain.as_ref().map(|c| c.holds()),
            cap_exceeded: r.cap_hit(),
            sampled: r.flags.sampled,
            passed: r.passed,
            wall_clock_seconds: r.wall_clock_seconds,
        }
    }
}

/// CSV summary with a fixed header, one row per report.
pub fn write_csv<W: Write>(reports: &[ExperimentReport], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    if reports.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in reports {
        w.serialize(CsvRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub const CSV_HEADER: [&str; 20] = [
    "q",
    "d",
    "k",
    "seed",
    "set_size",
    "group_order",
    "delta_k",
    "delta_k_exact",
    "full_space_classes",
    "proportion",
    "census_passed",
    "lemma3_max_deviation",
    "lemma4a_ratio",
    "lemma4b_ratio",
    "lemma5_ratio",
    "chain_holds",
    "cap_exceeded",
    "sampled",
    "passed",
    "wall_clock_seconds",
];

/// JSON writes a single object for one report and an array otherwise.
pub fn render(reports: &[ExperimentReport], format: OutputFormat) -> Result<String, HarnessError> {
    match format {
        OutputFormat::Json => match reports {
            [one] => one.to_canonical_json(),
            many => canonical_json(&many),
        },
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_csv(reports, &mut buf)?;
            Ok(String::from_utf8(buf).expect("csv output is utf-8"))
        }
    }
}

pub fn write_reports(
    reports: &[ExperimentReport],
    path: &Path,
    format: OutputFormat,
) -> Result<(), HarnessError> {
    let mut text = render(reports, format)?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn space(q: u64, d: usize) -> Space {
        Space::new(Arc::new(FieldCtx::of_order(q, None).unwrap()), d).unwrap()
    }

    #[test]
    fn sampling_contract() {
        let s = space(3, 2);
        assert_eq!(sample_set(&s, 9, 4).unwrap(), PointSet::full(&s));
        assert!(matches!(sample_set(&s, 0, 1), Err(HarnessError::EmptySample)));
        assert!(matches!(
            sample_set(&s, 10, 1),
            Err(HarnessError::SampleTooLarge { requested: 10, available: 9 })
        ));
        let s = space(7, 2);
        assert_eq!(sample_set(&s, 26, 11).unwrap(), sample_set(&s, 26, 11).unwrap());
        assert_ne!(sample_set(&s, 26, 11).unwrap(), sample_set(&s, 26, 12).unwrap());
    }

    #[test]
    fn full_space_census_spec() {
        let spec = ExperimentSpec::new(3, 2, 2, SetSource::FullSpace, vec![Check::Census]);
        let r = run(&spec).unwrap();
        let c = r.census.as_ref().unwrap();
        assert_eq!(c.heuristic, 27.0);
        assert!(c.passed());
        assert!(r.passed);
        assert!(r.lemma3.is_none() && r.chain.is_none());
    }

    #[test]
    fn threshold_chain_spec() {
        let spec = ExperimentSpec::new(
            5,
            2,
            2,
            SetSource::Random { size: None, seed: 3 },
            vec![Check::Thm2chain],
        );
        let r = run(&spec).unwrap();
        assert_eq!(r.set_size, 15);
        assert!(r.chain.as_ref().unwrap().holds());
        assert!(r.proportion.unwrap() > 0.0);
        assert_eq!(r.seed, Some(3));
    }

    #[test]
    fn report_schema_is_stable() {
        let a = run(&ExperimentSpec::new(3, 2, 1, SetSource::FullSpace, vec![])).unwrap();
        let b = run(&ExperimentSpec::new(3, 2, 1, SetSource::FullSpace, Check::ALL.to_vec())).unwrap();
        let keys = |r: &ExperimentReport| {
            let serde_json::Value::Object(m) = serde_json::to_value(r).unwrap() else {
                panic!("report is an object")
            };
            m.keys().cloned().collect::<Vec<_>>()
        };
        assert_eq!(keys(&a), keys(&b));
        let json = a.to_canonical_json().unwrap();
        assert!(json.contains("\"census\": null"));
    }

    #[test]
    fn cap_is_flagged() {
        let mut spec = ExperimentSpec::new(3, 2, 3, SetSource::FullSpace, vec![Check::Census]);
        spec.tuple_cap = Some(10);
        let r = run(&spec).unwrap();
        assert!(r.cap_hit());
        assert!(!r.passed);
        assert!(r.census.is_none());
    }

    #[test]
    fn csv_has_fixed_header() {
        let r = run(&ExperimentSpec::new(3, 2, 1, SetSource::FullSpace, vec![Check::Census])).unwrap();
        let text = render(&[r], OutputFormat::Csv).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(text.lines().count(), 2);
    }

    fn arb_source() -> impl Strategy<Value = SetSource> {
        prop_oneof![
            Just(SetSource::FullSpace),
            (proptest::option::of(1u64..1000), any::<u64>())
                .prop_map(|(size, seed)| SetSource::Random { size, seed }),
            "[a-z/]{1,12}".prop_map(|p| SetSource::File { path: p.into() }),
        ]
    }

    proptest! {
        #[test]
        fn spec_round_trips(
            q in 3u64..100, d in 1usize..5, k in 1usize..5,
            source in arb_source(),
            checks in proptest::collection::vec(proptest::sample::select(Check::ALL.to_vec()), 0..5),
            workers in proptest::option::of(1usize..16),
            csv in any::<bool>(),
        ) {
            let mut spec = ExperimentSpec::new(q, d, k, source, checks);
            spec.workers = workers;
            spec.format = if csv { OutputFormat::Csv } else { OutputFormat::Json };
            let back = ExperimentSpec::from_json(&spec.to_json().unwrap()).unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}
