//! Fourier analysis on F_q^d and the rotation counting function
//! `nu_theta(z) = #{(u, v) in E x E : u - theta v = z}`.
//!
//! Counts and moments are exact integers. Bounds are evaluated as exact
//! rationals and only turned into `f64` for the reported ratios. Complex
//! arithmetic is confined to the transform checks, which are summed in a
//! fixed index order.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::congruence::{heuristic_exponent, DeltaCount};
use crate::geometry::{dot_coords, PointSet, Space};
use crate::gfarith::FieldElement;
use crate::isogroup::OrthogonalGroup;

/// Tolerance for Plancherel, inversion and the convolution identity.
pub const SPECTRAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("function table has {got} entries, expected q^d = {expected}")]
    SizeMismatch { expected: u64, got: usize },
    #[error("moment power must be at least 1")]
    ZeroPower,
    #[error("the chain needs an exact class count, not a sampled lower bound")]
    NotExact,
    #[error("set and group live in different spaces")]
    SpaceMismatch,
    #[error("{0} overflowed 128 bits")]
    Overflow(&'static str),
}

/// Fourier coefficients indexed by frequency code.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTable {
    values: Vec<Complex64>,
}

impl SpectralTable {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, code: u64) -> Complex64 {
        self.values[code as usize]
    }
}

fn all_coords(space: &Space) -> Vec<FieldElement> {
    let d = space.dim();
    let mut out = vec![FieldElement::ZERO; space.size() as usize * d];
    for (code, chunk) in out.chunks_exact_mut(d).enumerate() {
        space.decode_into(code as u64, chunk);
    }
    out
}

/// `f^(m) = q^{-d} sum_x chi(-x.m) f(x)`.
pub fn fourier_transform(space: &Space, f: &[Complex64]) -> Result<SpectralTable, SpectralError> {
    transform(space, f, true)
}

/// `f(x) = sum_m chi(x.m) f^(m)`.
pub fn inverse_fourier(space: &Space, t: &SpectralTable) -> Vec<Complex64> {
    transform(space, &t.values, false)
        .expect("tables built by fourier_transform have the right size")
        .values
}

fn transform(space: &Space, f: &[Complex64], forward: bool) -> Result<SpectralTable, SpectralError> {
    let n = space.size();
    if f.len() as u64 != n {
        return Err(SpectralError::SizeMismatch {
            expected: n,
            got: f.len(),
        });
    }
    let field = space.field();
    let d = space.dim();
    let coords = all_coords(space);
    let scale = if forward { 1.0 / n as f64 } else { 1.0 };
    let values = (0..n as usize)
        .into_par_iter()
        .map(|m| {
            let mc = &coords[m * d..(m + 1) * d];
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, fx) in f.iter().enumerate() {
                if *fx == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let dot = dot_coords(field, &coords[x * d..(x + 1) * d], mc);
                let arg = if forward { field.neg(dot) } else { dot };
                acc += field.character(arg) * fx;
            }
            acc * scale
        })
        .collect();
    Ok(SpectralTable { values })
}

/// `|sum_x |f(x)|^2 - q^d sum_m |f^(m)|^2|`.
pub fn plancherel_gap(space: &Space, f: &[Complex64], t: &SpectralTable) -> f64 {
    let lhs: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    let rhs: f64 = t.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * space.size() as f64;
    (lhs - rhs).abs()
}

/// Indicator of a set as a complex table.
pub fn indicator_table(set: &PointSet) -> Vec<Complex64> {
    set.indicator().into_iter().map(|v| Complex64::new(v, 0.0)).collect()
}

/// `nu_theta(z)` for every group element (rows) and translation code (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuTable {
    size: usize,
    counts: Vec<u64>,
}

impl NuTable {
    /// Direct double loop over E x E for every rotation.
    pub fn new(set: &PointSet, group: &OrthogonalGroup) -> Result<Self, SpectralError> {
        if set.space() != group.space() {
            return Err(SpectralError::SpaceMismatch);
        }
        let size = group.space().size() as usize;
        let counts = (0..group.order())
            .into_par_iter()
            .flat_map_iter(|g| nu_row(set, group, g))
            .collect();
        Ok(NuTable { size, counts })
    }

    pub fn rows(&self) -> usize {
        self.counts.len() / self.size
    }

    pub fn row(&self, g: usize) -> &[u64] {
        &self.counts[g * self.size..(g + 1) * self.size]
    }

    /// `sum_{theta, z} nu_theta(z)^p`.
    pub fn moment(&self, p: u32) -> Result<u128, SpectralError> {
        if p == 0 {
            return Err(SpectralError::ZeroPower);
        }
        self.counts.iter().try_fold(0u128, |acc, &c| {
            (c as u128)
                .checked_pow(p)
                .and_then(|v| acc.checked_add(v))
                .ok_or(SpectralError::Overflow("moment"))
        })
    }

    /// Whether every row sums to `|E|^2`.
    pub fn row_sums_match(&self, set_size: usize) -> bool {
        let target = (set_size * set_size) as u64;
        (0..self.rows()).all(|g| self.row(g).iter().sum::<u64>() == target)
    }
}

/// One row of the table: `nu_theta(z)` for the group element with index `g`.
pub fn nu_row(set: &PointSet, group: &OrthogonalGroup, g: usize) -> Vec<u64> {
    let space = group.space();
    let field = space.field();
    let d = space.dim();
    let mut row = vec![0u64; space.size() as usize];
    let mut u = vec![FieldElement::ZERO; d];
    let mut tv = vec![FieldElement::ZERO; d];
    let mut z = vec![FieldElement::ZERO; d];
    for &uc in set.codes() {
        space.decode_into(uc, &mut u);
        for &vc in set.codes() {
            space.decode_into(group.act(g, vc), &mut tv);
            for i in 0..d {
                z[i] = field.sub(u[i], tv[i]);
            }
            row[space.encode_coords(&z) as usize] += 1;
        }
    }
    row
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma3Report {
    /// Max over (theta, m) of `|nu^_theta(m) - q^d E^(m) conj(E^(theta^{-1} m))|`.
    pub max_deviation: f64,
    /// Every row sums to `|E|^2`, so `nu^_theta(0) = |E|^2 / q^d` exactly.
    pub zero_coefficient_exact: bool,
    /// Largest float error in `nu^_theta(0)` against `|E|^2 / q^d`.
    pub zero_coefficient_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares the transform of each `nu_theta` with the product of transforms
/// of the indicator of E, in the conjugated form.
pub fn lemma3_check(
    set: &PointSet,
    group: &OrthogonalGroup,
    nu: &NuTable,
) -> Result<Lemma3Report, SpectralError> {
    let space = group.space();
    let n = space.size() as f64;
    let e_hat = fourier_transform(space, &indicator_table(set))?;
    let mean = (set.len() * set.len()) as f64 / n;
    let mut max_dev = 0.0f64;
    let mut zero_err = 0.0f64;
    for g in 0..group.order() {
        let row: Vec<Complex64> = nu.row(g).iter().map(|&c| Complex64::new(c as f64, 0.0)).collect();
        let nu_hat = fourier_transform(space, &row)?;
        let inv = group.inverse_index(g);
        for m in 0..space.size() {
            let rhs = e_hat.at(m) * e_hat.at(group.act(inv, m)).conj() * n;
            max_dev = max_dev.max((nu_hat.at(m) - rhs).norm());
        }
        zero_err = zero_err.max((nu_hat.at(0) - Complex64::new(mean, 0.0)).norm());
    }
    let zero_exact = nu.row_sums_match(set.len());
    Ok(Lemma3Report {
        max_deviation: max_dev,
        zero_coefficient_exact: zero_exact,
        zero_coefficient_error: zero_err,
        tolerance: SPECTRAL_TOL,
        passed: zero_exact && max_dev < SPECTRAL_TOL && zero_err < SPECTRAL_TOL,
    })
}

/// Exact left and right sides of a bound with their quotient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRatio {
    pub lhs: String,
    pub rhs: String,
    pub ratio: f64,
}

impl BoundRatio {
    fn new(lhs: &BigRational, rhs: &BigRational) -> Self {
        BoundRatio {
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            ratio: (lhs / rhs).to_f64().unwrap_or(f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub k: usize,
    pub set_size: usize,
    pub group_order: usize,
    pub row_sums_ok: bool,
    /// `sum nu^p` for p = 1..=k+1.
    pub moments: Vec<u128>,
    pub centered_second_moment: String,
    /// `sum nu^2 = |O| |E|^4 / q^d + centered second moment`, exactly.
    pub second_moment_split_ok: bool,
    /// `|O| |E|^4 / q^d`, the Cauchy-Schwarz floor for `sum nu^2`.
    pub cauchy_schwarz_floor: String,
    pub lemma4a: BoundRatio,
    pub lemma4b: BoundRatio,
    pub lemma5: BoundRatio,
}

impl MomentReport {
    pub fn ratios_finite(&self) -> bool {
        [&self.lemma4a, &self.lemma4b, &self.lemma5]
            .iter()
            .all(|b| b.ratio.is_finite())
    }
}

fn big(n: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `q^e` as a rational, for any sign of `e`.
fn qpow(q: u64, e: i64) -> BigRational {
    let base = big(q as u128);
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        BigRational::one() / num_traits::pow(base, (-e) as usize)
    }
}

/// Exact moments and the three moment bounds with their ratios.
pub fn lemma_bound_ratios(
    set: &PointSet,
    group: &OrthogonalGroup,
    nu: &NuTable,
    k: usize,
) -> Result<MomentReport, SpectralError> {
    let space = group.space();
    let q = space.q() as u64;
    let d = space.dim() as i64;
    let n = space.size() as u128;
    let e = set.len() as u128;
    let order = group.order() as u128;

    let moments = (1..=k as u32 + 1)
        .map(|p| nu.moment(p))
        .collect::<Result<Vec<_>, _>>()?;
    let second = big(moments[1]);
    let top = big(moments[k]);

    // sum (nu - |E|^2/q^d)^2 = sum (q^d nu - |E|^2)^2 / q^{2d}
    let e2 = BigInt::from(e * e);
    let nb = BigInt::from(n);
    let centered_num: BigInt = nu
        .counts
        .iter()
        .map(|&c| {
            let dev = &nb * BigInt::from(c) - &e2;
            &dev * &dev
        })
        .sum();
    let centered = BigRational::new(centered_num, &nb * &nb);
    let floor = BigRational::new(BigInt::from(order) * &e2 * &e2, nb.clone());
    let split_ok = second == &floor + &centered;

    let binom_d2 = d * (d - 1) / 2;
    let ef = big(e);
    let rhs4b = qpow(q, binom_d2 + 1) * num_traits::pow(ef.clone(), 2);
    let rhs4a = num_traits::pow(ef.clone(), 4) * qpow(q, binom_d2 - d) + rhs4b.clone();
    let m = heuristic_exponent(d as usize, k);
    let rhs5 = num_traits::pow(big(2), k * k)
        * (qpow(q, binom_d2 + 1) * num_traits::pow(ef.clone(), k + 1)
            + num_traits::pow(ef.clone(), 2 * (k + 1)) * qpow(q, -m));

    Ok(MomentReport {
        k,
        set_size: set.len(),
        group_order: group.order(),
        row_sums_ok: nu.row_sums_match(set.len()),
        moments,
        centered_second_moment: centered.to_string(),
        second_moment_split_ok: split_ok,
        cauchy_schwarz_floor: floor.to_string(),
        lemma4a: BoundRatio::new(&second, &rhs4a),
        lemma4b: BoundRatio::new(&centered, &rhs4b),
        lemma5: BoundRatio::new(&top, &rhs5),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainReport {
    pub k: usize,
    pub set_size: usize,
    /// `|E|^{2(k+1)}`.
    pub lhs: u128,
    pub delta_k: u64,
    /// Ordered pairs of congruent tuples from E^{k+1}.
    pub congruent_pairs: u128,
    /// `sum_{theta, z} nu_theta(z)^{k+1}`.
    pub moment: u128,
    /// `|E|^{2(k+1)} <= |Delta_k(E)| * pairs`.
    pub cauchy_schwarz_holds: bool,
    /// `pairs <= sum nu^{k+1}`.
    pub union_bound_holds: bool,
}

impl ChainReport {
    pub fn holds(&self) -> bool {
        self.cauchy_schwarz_holds && self.union_bound_holds
    }
}

/// Checks both integer inequalities of the counting chain for E.
pub fn theorem2_chain(
    set: &PointSet,
    nu: &NuTable,
    delta: &DeltaCount,
) -> Result<ChainReport, SpectralError> {
    let pairs = delta.congruent_pairs.ok_or(SpectralError::NotExact)?;
    let k = delta.k;
    let lhs = (set.len() as u128)
        .checked_pow(2 * (k as u32 + 1))
        .ok_or(SpectralError::Overflow("|E|^{2(k+1)}"))?;
    let moment = nu.moment(k as u32 + 1)?;
    let product = BigUint::from(delta.classes) * BigUint::from(pairs);
    Ok(ChainReport {
        k,
        set_size: set.len(),
        lhs,
        delta_k: delta.classes,
        congruent_pairs: pairs,
        moment,
        cauchy_schwarz_holds: BigUint::from(lhs) <= product,
        union_bound_holds: pairs <= moment,
    })
}

/// Convenience: the second-moment floor `|O| |E|^4 / q^d` as a float.
pub fn second_moment_floor(group: &OrthogonalGroup, set_size: usize) -> f64 {
    let e = set_size as f64;
    group.order() as f64 * e.powi(4) / group.space().size() as f64
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::congruence::delta_k_count;
    use crate::gfarith::FieldCtx;

    fn space(q: u64, d: usize) -> Space {
        Space::new(Arc::new(FieldCtx::of_order(q, None).unwrap()), d).unwrap()
    }

    #[test]
    fn transform_of_delta_and_constant() {
        let s = space(5, 2);
        let n = s.size() as usize;
        let mut delta = vec![Complex64::new(0.0, 0.0); n];
        delta[0] = Complex64::new(1.0, 0.0);
        let t = fourier_transform(&s, &delta).unwrap();
        for v in t.values() {
            assert!((v - Complex64::new(1.0 / 25.0, 0.0)).norm() < 1e-12);
        }
        let ones = vec![Complex64::new(1.0, 0.0); n];
        let t = fourier_transform(&s, &ones).unwrap();
        assert!((t.at(0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(t.values()[1..].iter().all(|v| v.norm() < 1e-12));
        assert!(matches!(
            fourier_transform(&s, &ones[1..]),
            Err(SpectralError::SizeMismatch { expected: 25, got: 24 })
        ));
    }

    #[test]
    fn zero_coefficient_is_density() {
        let s = space(3, 2);
        let set = PointSet::from_codes(&s, [0, 1, 5, 7]).unwrap();
        let t = fourier_transform(&s, &indicator_table(&set)).unwrap();
        assert!((t.at(0).re - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn nu_examples() {
        let s = space(3, 2);
        let g = OrthogonalGroup::enumerate(&s).unwrap();
        let id = g.identity_index();
        let set = PointSet::from_vectors(&s, &[s.vector(&[0, 0]).unwrap(), s.vector(&[1, 0]).unwrap()])
            .unwrap();
        let row = nu_row(&set, &g, id);
        let at = |c: &[u32]| row[s.encode(&s.vector(c).unwrap()) as usize];
        assert_eq!(at(&[0, 0]), 2);
        assert_eq!(at(&[1, 0]), 1);
        assert_eq!(at(&[2, 0]), 1);
        assert_eq!(row.iter().sum::<u64>(), 4);

        let single = PointSet::from_codes(&s, [4]).unwrap();
        for gi in 0..g.order() {
            let row = nu_row(&single, &g, gi);
            let u = s.decode(4);
            let z = s.sub(&u, &g.element(gi).apply(&s, &u));
            assert_eq!(row[s.encode(&z) as usize], 1);
            assert_eq!(row.iter().sum::<u64>(), 1);
        }

        let full = NuTable::new(&PointSet::full(&s), &g).unwrap();
        assert!(full.counts.iter().all(|&c| c == 9));
    }

    #[test]
    fn moments_of_extreme_sets() {
        let s = space(3, 2);
        let g = OrthogonalGroup::enumerate(&s).unwrap();
        let full = NuTable::new(&PointSet::full(&s), &g).unwrap();
        for p in 1..4u32 {
            assert_eq!(full.moment(p).unwrap(), 8 * 9 * 9u128.pow(p));
        }
        let single = NuTable::new(&PointSet::from_codes(&s, [3]).unwrap(), &g).unwrap();
        assert_eq!(single.moment(3).unwrap(), 8);
        assert!(matches!(full.moment(0), Err(SpectralError::ZeroPower)));
    }

    #[test]
    fn full_space_has_zero_centered_moment() {
        let s = space(3, 2);
        let g = OrthogonalGroup::enumerate(&s).unwrap();
        let set = PointSet::full(&s);
        let nu = NuTable::new(&set, &g).unwrap();
        let r = lemma_bound_ratios(&set, &g, &nu, 2).unwrap();
        assert_eq!(r.centered_second_moment, "0");
        assert_eq!(r.lemma4b.ratio, 0.0);
        assert!(r.second_moment_split_ok);
        assert!(r.ratios_finite());
    }

    #[test]
    fn lemma3_full_space() {
        let s = space(3, 2);
        let g = OrthogonalGroup::enumerate(&s).unwrap();
        let set = PointSet::full(&s);
        let nu = NuTable::new(&set, &g).unwrap();
        let r = lemma3_check(&set, &g, &nu).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn chain_single_point() {
        let s = space(3, 2);
        let g = OrthogonalGroup::enumerate(&s).unwrap();
        let set = PointSet::from_codes(&s, [2]).unwrap();
        let nu = NuTable::new(&set, &g).unwrap();
        let delta = delta_k_count(&set, 2).unwrap();
        let c = theorem2_chain(&set, &nu, &delta).unwrap();
        assert_eq!((c.lhs, c.delta_k, c.congruent_pairs, c.moment), (1, 1, 1, 8));
        assert!(c.holds());
    }
}
