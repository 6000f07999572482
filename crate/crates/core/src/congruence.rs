//! Congruence of (k+1)-point configurations.
//!
//! Two configurations are congruent when a rigid motion carries one onto the
//! other entrywise. Pinning (subtracting the last point) removes the
//! translation, so congruence reduces to the O(F_q^d)-orbit of the pinned
//! tuple. Classes are identified by a [`CongruenceKey`]: the Gram matrix of
//! the pinned tuple together with its space of linear relations. Equal keys
//! give a well-defined isometry between the spans, which extends to the whole
//! space by Witt's theorem; the Gram matrix alone is not enough once the
//! span is degenerate.

use std::collections::{HashMap, HashSet};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{dot_coords, GeometryError, PointConfig, PointSet, Space, VectorFq};
use crate::gfarith::{FieldCtx, FieldElement};
use crate::isogroup::{IsoError, OrthogonalGroup};
use crate::linalg::Matrix;

/// Default cap on configurations visited by exact enumerations.
pub const DEFAULT_TUPLE_CAP: u128 = 50_000_000;

/// The census ratio and stratum bounds use this multiplicative band.
pub const CENSUS_BAND: f64 = 16.0;

#[derive(Debug, Error)]
pub enum CongruenceError {
    #[error("configurations have {left} and {right} points")]
    SizeMismatch { left: usize, right: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("{what} needs {needed} configurations, over the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
    #[error("point set is empty")]
    EmptySet,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Iso(#[from] IsoError),
}

/// The differences `x^i - x^{k+1}` for `i <= k`; the trailing zero is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PinnedConfig {
    diffs: Vec<VectorFq>,
}

impl PinnedConfig {
    pub fn diffs(&self) -> &[VectorFq] {
        &self.diffs
    }

    pub fn k(&self) -> usize {
        self.diffs.len()
    }

    /// The pinned tuple written out as a configuration ending in zero.
    pub fn to_config(&self, space: &Space) -> PointConfig {
        let mut pts = self.diffs.clone();
        pts.push(space.zero());
        PointConfig::new(pts).expect("pinned configurations have k >= 1")
    }
}

pub fn pin(space: &Space, x: &PointConfig) -> PinnedConfig {
    let pts = x.points();
    let last = &pts[pts.len() - 1];
    PinnedConfig {
        diffs: pts[..pts.len() - 1].iter().map(|p| space.sub(p, last)).collect(),
    }
}

/// Canonical congruence invariant of a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CongruenceKey {
    k: usize,
    /// k x k, row-major.
    gram: Vec<FieldElement>,
    /// RREF basis of `{ c : sum c_i diff_i = 0 }`, row-major with k columns.
    depkernel: Vec<FieldElement>,
}

impl CongruenceKey {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gram(&self) -> Matrix {
        Matrix::from_vec(self.k, self.k, self.gram.clone())
    }

    pub fn depkernel(&self) -> Matrix {
        Matrix::from_vec(self.kernel_dim(), self.k, self.depkernel.clone())
    }

    pub fn kernel_dim(&self) -> usize {
        self.depkernel.len() / self.k
    }

    /// Dimension of the affine span of the configuration.
    pub fn span_dim(&self) -> usize {
        self.k - self.kernel_dim()
    }
}

/// Key from `k` difference vectors of length `d`, given row-major.
fn key_from_flat(f: &FieldCtx, k: usize, d: usize, diffs: &[FieldElement]) -> CongruenceKey {
    let mut gram = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            gram.push(dot_coords(f, &diffs[i * d..(i + 1) * d], &diffs[j * d..(j + 1) * d]));
        }
    }
    depkernel_key(f, k, d, diffs, gram)
}

fn depkernel_key(
    f: &FieldCtx,
    k: usize,
    d: usize,
    diffs: &[FieldElement],
    gram: Vec<FieldElement>,
) -> CongruenceKey {
    // columns of the d x k matrix are the difference vectors
    let mut m = Matrix::zeros(d, k);
    for j in 0..k {
        for i in 0..d {
            m.set(i, j, diffs[j * d + i]);
        }
    }
    CongruenceKey {
        k,
        gram,
        depkernel: m.null_space(f).data().to_vec(),
    }
}

pub fn congruence_key(space: &Space, x: &PointConfig) -> CongruenceKey {
    pinned_key(space, &pin(space, x))
}

pub fn pinned_key(space: &Space, p: &PinnedConfig) -> CongruenceKey {
    let flat: Vec<FieldElement> = p.diffs.iter().flat_map(|v| v.coords().iter().copied()).collect();
    key_from_flat(space.field(), p.k(), space.dim(), &flat)
}

fn check_same_shape(x: &PointConfig, y: &PointConfig) -> Result<(), CongruenceError> {
    if x.points().len() != y.points().len() {
        return Err(CongruenceError::SizeMismatch {
            left: x.points().len(),
            right: y.points().len(),
        });
    }
    if x.dim() != y.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        }
        .into());
    }
    Ok(())
}

fn pinned_codes(space: &Space, x: &PointConfig) -> Vec<u64> {
    pin(space, x).diffs.iter().map(|v| space.encode(v)).collect()
}

/// Searches the whole group for `theta` with `theta pin(x) = pin(y)`.
pub fn brute_force_congruent(
    group: &OrthogonalGroup,
    x: &PointConfig,
    y: &PointConfig,
) -> Result<bool, CongruenceError> {
    check_same_shape(x, y)?;
    let space = group.space();
    if x.dim() != space.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: space.dim(),
            got: x.dim(),
        }
        .into());
    }
    let xc = pinned_codes(space, x);
    let yc = pinned_codes(space, y);
    Ok((0..group.order()).any(|g| xc.iter().zip(&yc).all(|(&a, &b)| group.act(g, a) == b)))
}

/// Size of the O-orbit of a pinned tuple given by vector codes.
pub fn pinned_orbit_size(group: &OrthogonalGroup, codes: &[u64]) -> usize {
    let orbit: HashSet<Vec<u64>> = (0..group.order())
        .map(|g| codes.iter().map(|&c| group.act(g, c)).collect())
        .collect();
    orbit.len()
}

/// Number of configurations congruent to `x`: `q^d` times the orbit size of
/// its pinned form.
pub fn class_size(group: &OrthogonalGroup, x: &PointConfig) -> u128 {
    let space = group.space();
    space.size() as u128 * pinned_orbit_size(group, &pinned_codes(space, x)) as u128
}

/// Multiplicities of every congruence key over E^{k+1}.
#[derive(Debug, Clone)]
pub struct ClassTally {
    k: usize,
    dim: usize,
    counts: HashMap<CongruenceKey, u64>,
}

impl ClassTally {
    /// Exhaustive pass over all `|E|^{k+1}` tuples.
    pub fn over_set(set: &PointSet, k: usize, cap: u128) -> Result<Self, CongruenceError> {
        if k == 0 {
            return Err(CongruenceError::ZeroK);
        }
        if set.is_empty() {
            return Err(CongruenceError::EmptySet);
        }
        let n = set.len();
        let needed = (n as u128).checked_pow(k as u32 + 1).unwrap_or(u128::MAX);
        if needed > cap {
            return Err(CongruenceError::CapExceeded {
                what: "exact class count",
                needed,
                cap,
            });
        }
        let space = set.space();
        let f = space.field();
        let d = space.dim();
        let points: Vec<VectorFq> = set.vectors().collect();

        let counts = (0..n)
            .into_par_iter()
            .fold(HashMap::new, |mut acc: HashMap<CongruenceKey, u64>, anchor| {
                let diffs: Vec<VectorFq> =
                    points.iter().map(|p| space.sub(p, &points[anchor])).collect();
                let dots: Vec<FieldElement> = (0..n * n)
                    .map(|ij| dot_coords(f, diffs[ij / n].coords(), diffs[ij % n].coords()))
                    .collect();
                let mut idx = vec![0usize; k];
                let mut flat = vec![FieldElement::ZERO; k * d];
                loop {
                    for (slot, &i) in idx.iter().enumerate() {
                        flat[slot * d..(slot + 1) * d].copy_from_slice(diffs[i].coords());
                    }
                    let mut gram = Vec::with_capacity(k * k);
                    for &i in &idx {
                        for &j in &idx {
                            gram.push(dots[i * n + j]);
                        }
                    }
                    *acc.entry(depkernel_key(f, k, d, &flat, gram)).or_insert(0) += 1;
                    if !advance(&mut idx, n) {
                        break;
                    }
                }
                acc
            })
            .reduce(HashMap::new, merge_counts);
        Ok(ClassTally { k, dim: d, counts })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn distinct(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn counts(&self) -> &HashMap<CongruenceKey, u64> {
        &self.counts
    }

    /// Distinct classes by affine span dimension `0..=d`.
    pub fn classes_by_span(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.dim + 1];
        for key in self.counts.keys() {
            out[key.span_dim()] += 1;
        }
        out
    }

    /// `#{(x, y) in E^{k+1} x E^{k+1} : x ~ y}`, the sum of squared class sizes.
    pub fn congruent_pairs(&self) -> u128 {
        self.counts.values().map(|&c| c as u128 * c as u128).sum()
    }

    pub fn tuples(&self) -> u128 {
        self.counts.values().map(|&c| c as u128).sum()
    }
}

fn merge_counts(
    mut a: HashMap<CongruenceKey, u64>,
    b: HashMap<CongruenceKey, u64>,
) -> HashMap<CongruenceKey, u64> {
    if a.len() < b.len() {
        return merge_counts(b, a);
    }
    for (key, c) in b {
        *a.entry(key).or_insert(0) += c;
    }
    a
}

/// Mixed-radix increment; false once every digit has wrapped.
fn advance(idx: &mut [usize], radix: usize) -> bool {
    for digit in idx.iter_mut() {
        *digit += 1;
        if *digit < radix {
            return true;
        }
        *digit = 0;
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountMode {
    Exact,
    /// Distinct keys among random tuples: a lower bound on the class count.
    Sampled { samples: u64, seed: u64 },
}

/// `|Delta_k(E)|` with its split by affine span dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaCount {
    pub k: usize,
    pub set_size: usize,
    pub classes: u64,
    /// Index r holds the number of classes whose affine span has dimension r.
    pub classes_by_span: Vec<u64>,
    pub tuples_examined: u128,
    pub mode: CountMode,
    /// Only available from exact counts.
    pub congruent_pairs: Option<u128>,
}

impl DeltaCount {
    pub fn from_tally(set: &PointSet, tally: &ClassTally) -> Self {
        DeltaCount {
            k: tally.k,
            set_size: set.len(),
            classes: tally.distinct(),
            classes_by_span: tally.classes_by_span(),
            tuples_examined: tally.tuples(),
            mode: CountMode::Exact,
            congruent_pairs: Some(tally.congruent_pairs()),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.mode == CountMode::Exact
    }
}

/// Exact `|Delta_k(E)|` over E^{k+1}.
pub fn delta_k_count(set: &PointSet, k: usize) -> Result<DeltaCount, CongruenceError> {
    let tally = ClassTally::over_set(set, k, DEFAULT_TUPLE_CAP)?;
    Ok(DeltaCount::from_tally(set, &tally))
}

/// Lower bound on `|Delta_k(E)|` from `samples` uniformly drawn tuples.
pub fn delta_k_sampled(
    set: &PointSet,
    k: usize,
    samples: u64,
    seed: u64,
) -> Result<DeltaCount, CongruenceError> {
    if k == 0 {
        return Err(CongruenceError::ZeroK);
    }
    if set.is_empty() {
        return Err(CongruenceError::EmptySet);
    }
    let space = set.space();
    let f = space.field();
    let d = space.dim();
    let points: Vec<VectorFq> = set.vectors().collect();
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut flat = vec![FieldElement::ZERO; k * d];
    for _ in 0..samples {
        let anchor = &points[rng.random_range(0..points.len())];
        for slot in 0..k {
            let p = &points[rng.random_range(0..points.len())];
            flat[slot * d..(slot + 1) * d].copy_from_slice(space.sub(p, anchor).coords());
        }
        seen.insert(key_from_flat(f, k, d, &flat));
    }
    let mut by_span = vec![0u64; d + 1];
    for key in &seen {
        by_span[key.span_dim()] += 1;
    }
    Ok(DeltaCount {
        k,
        set_size: set.len(),
        classes: seen.len() as u64,
        classes_by_span: by_span,
        tuples_examined: samples as u128,
        mode: CountMode::Sampled { samples, seed },
        congruent_pairs: None,
    })
}

/// `d - (d-1)/(k+1)`.
pub fn threshold_exponent(d: usize, k: usize) -> Ratio<i64> {
    if k < d {
        log::warn!("threshold exponent requested with k = {k} < d = {d}");
    }
    Ratio::from_integer(d as i64) - Ratio::new(d as i64 - 1, k as i64 + 1)
}

/// `ceil(q^s)` for the threshold exponent, computed in integers.
pub fn threshold_set_size(q: u64, d: usize, k: usize) -> u64 {
    let s = threshold_exponent(d, k);
    let (num, den) = (*s.numer() as u32, *s.denom() as u32);
    let target = (q as u128).pow(num);
    // smallest n with n^den >= q^num
    let mut n = (q as f64).powf(num as f64 / den as f64).floor() as u64;
    n = n.saturating_sub(1);
    while (n as u128).pow(den) < target {
        n += 1;
    }
    n
}

/// `m = d(k+1) - d(d+1)/2`.
pub fn heuristic_exponent(d: usize, k: usize) -> i64 {
    (d * (k + 1)) as i64 - (d * (d + 1) / 2) as i64
}

/// Number of k-tuples in an r-dimensional space that span it.
pub fn spanning_tuple_count(q: u64, r: usize, k: usize) -> u128 {
    if r > k {
        return 0;
    }
    let q = q as u128;
    (0..r).map(|i| q.pow(k as u32) - q.pow(i as u32)).product()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StratumReport {
    pub span_dim: usize,
    pub classes: u64,
    pub configurations: u128,
    /// Number of O-orbits of subspaces of this dimension.
    pub subspace_orbits: usize,
    /// Sum over orbit representatives V of (spanning k-tuples of V) / |Iso(V)|.
    pub formula_classes: u128,
    /// Every term of the formula divided exactly.
    pub formula_exact: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CensusChecks {
    /// Non-degenerate classes times q^d |O| equals the non-degenerate configuration count.
    pub theorem3_identity: bool,
    /// Sum of class sizes over all keys is q^{d(k+1)}, with every class one orbit.
    pub partition_identity: bool,
    /// Every stratum count matches its subspace-orbit formula.
    pub stratified_formula: bool,
    /// total / q^m lies in [1/16, 16].
    pub ratio_in_band: bool,
    /// Every degenerate stratum has at most 16 q^m classes.
    pub degenerate_strata_bounded: bool,
}

impl CensusChecks {
    pub fn all(&self) -> bool {
        self.theorem3_identity
            && self.partition_identity
            && self.stratified_formula
            && self.ratio_in_band
            && self.degenerate_strata_bounded
    }
}

/// Exact `|Delta_k(F_q^d)|`, split into affine-span strata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensusReport {
    pub q: u32,
    pub d: usize,
    pub k: usize,
    pub group_order: usize,
    /// Degenerate strata, span dimension 0..d.
    pub strata: Vec<StratumReport>,
    pub nondegenerate: StratumReport,
    pub total_classes: u64,
    pub total_configurations: u128,
    pub heuristic_exponent: i64,
    pub heuristic: f64,
    pub ratio: f64,
    /// `|Delta(F_q^d)|`, the plain distance set, for comparison with k = 1.
    pub distance_set_size: u64,
    /// Sum of class sizes over all keys.
    pub class_size_sum: u128,
    pub checks: CensusChecks,
}

impl CensusReport {
    pub fn passed(&self) -> bool {
        self.checks.all()
    }
}

/// Enumerates all pinned configurations of F_q^d and classifies them.
pub fn full_census(group: &OrthogonalGroup, k: usize) -> Result<CensusReport, CongruenceError> {
    full_census_with_cap(group, k, DEFAULT_TUPLE_CAP)
}

pub fn full_census_with_cap(
    group: &OrthogonalGroup,
    k: usize,
    cap: u128,
) -> Result<CensusReport, CongruenceError> {
    if k == 0 {
        return Err(CongruenceError::ZeroK);
    }
    let space = group.space();
    let f = space.field();
    let d = space.dim();
    let q = space.q() as u64;
    let size = space.size();
    let pinned_total = (size as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if pinned_total > cap {
        return Err(CongruenceError::CapExceeded {
            what: "census",
            needed: pinned_total,
            cap,
        });
    }
    let pinned_total = pinned_total as u64;

    // key -> (pinned tuples with this key, smallest pinned index)
    let chunk = 4096u64;
    let tally: HashMap<CongruenceKey, (u64, u64)> = (0..pinned_total.div_ceil(chunk))
        .into_par_iter()
        .fold(HashMap::new, |mut acc: HashMap<CongruenceKey, (u64, u64)>, c| {
            let mut flat = vec![FieldElement::ZERO; k * d];
            for idx in c * chunk..((c + 1) * chunk).min(pinned_total) {
                let mut rest = idx;
                for slot in 0..k {
                    space.decode_into(rest % size, &mut flat[slot * d..(slot + 1) * d]);
                    rest /= size;
                }
                let e = acc.entry(key_from_flat(f, k, d, &flat)).or_insert((0, idx));
                e.0 += 1;
                e.1 = e.1.min(idx);
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (key, (c, i)) in b {
                let e = a.entry(key).or_insert((0, i));
                e.0 += c;
                e.1 = e.1.min(i);
            }
            a
        });

    let mut classes = vec![0u64; d + 1];
    let mut pinned_by_span = vec![0u128; d + 1];
    for (key, &(count, _)) in &tally {
        classes[key.span_dim()] += 1;
        pinned_by_span[key.span_dim()] += count as u128;
    }

    // every key class must be a single orbit: orbit size == pinned count
    let (class_size_sum, single_orbit_classes): (u128, u64) = tally
        .par_iter()
        .map(|(_, &(count, rep))| {
            let mut rest = rep;
            let codes: Vec<u64> = (0..k)
                .map(|_| {
                    let c = rest % size;
                    rest /= size;
                    c
                })
                .collect();
            let orbit = pinned_orbit_size(group, &codes) as u64;
            (size as u128 * orbit as u128, (orbit == count) as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let total_configurations = pinned_total as u128 * size as u128;

    let mut strata = Vec::with_capacity(d + 1);
    for r in 0..=d {
        let orbits = group.subspace_orbit_reps(r)?;
        let spanning = spanning_tuple_count(q, r, k);
        let mut formula = 0u128;
        let mut exact = true;
        for v in &orbits.reps {
            let iso = v.iso_group_size(space)? as u128;
            exact &= spanning.is_multiple_of(iso);
            formula += spanning / iso;
        }
        strata.push(StratumReport {
            span_dim: r,
            classes: classes[r],
            configurations: pinned_by_span[r] * size as u128,
            subspace_orbits: orbits.reps.len(),
            formula_classes: formula,
            formula_exact: exact,
        });
    }
    let nondegenerate = strata.pop().expect("stratum d exists");

    let m = heuristic_exponent(d, k);
    let heuristic = (q as f64).powi(m as i32);
    let total_classes = tally.len() as u64;
    let ratio = total_classes as f64 / heuristic;
    let order = group.order() as u128;

    let checks = CensusChecks {
        theorem3_identity: nondegenerate.classes as u128 * size as u128 * order
            == nondegenerate.configurations,
        partition_identity: class_size_sum == total_configurations
            && single_orbit_classes == total_classes,
        stratified_formula: strata
            .iter()
            .chain(std::iter::once(&nondegenerate))
            .all(|s| s.formula_exact && s.formula_classes == s.classes as u128),
        ratio_in_band: (1.0 / CENSUS_BAND..=CENSUS_BAND).contains(&ratio),
        degenerate_strata_bounded: strata
            .iter()
            .all(|s| s.classes as f64 <= CENSUS_BAND * heuristic),
    };

    let distance_set_size = {
        let mut seen = vec![false; q as usize];
        let mut buf = vec![FieldElement::ZERO; d];
        for code in 0..size {
            space.decode_into(code, &mut buf);
            seen[dot_coords(f, &buf, &buf).code() as usize] = true;
        }
        seen.iter().filter(|&&b| b).count() as u64
    };

    Ok(CensusReport {
        q: space.q(),
        d,
        k,
        group_order: group.order(),
        strata,
        nondegenerate,
        total_classes,
        total_configurations,
        heuristic_exponent: m,
        heuristic,
        ratio,
        distance_set_size,
        class_size_sum,
        checks,
    })
}
