//! Vectors in F_q^d, the dot product, distance sets, spheres and affine span.
//!
//! Vectors have an integer code: coordinate `i` contributes
//! `code(x_i) * q^i`. Point sets store sorted codes.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gfarith::{FieldCtx, FieldElement};
use crate::linalg::Matrix;

/// Largest q^d a [`Space`] will accept.
pub const MAX_SPACE_SIZE: u64 = 1 << 32;
const BITMAP_LIMIT: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("q^d = {q}^{d} exceeds the space size cap")]
    SpaceTooLarge { q: u32, d: usize },
    #[error("expected a vector of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate code {code} is not an element of F_{q}")]
    CoordinateOutOfRange { code: u64, q: u32 },
    #[error("vector code {code} is outside a space of size {size}")]
    VectorCodeOutOfRange { code: u64, size: u64 },
    #[error("point set is empty")]
    EmptySet,
    #[error("point {0} appears twice")]
    DuplicatePoint(String),
    #[error("a configuration needs at least 2 points, got {0}")]
    ConfigTooShort(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A coordinate vector. Construct through [`Space::vector`] to validate it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorFq(Vec<FieldElement>);

impl VectorFq {
    pub fn from_elements(coords: Vec<FieldElement>) -> Self {
        VectorFq(coords)
    }

    pub fn coords(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }
}

impl fmt::Display for VectorFq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// F_q^d with the standard dot product.
#[derive(Debug, Clone)]
pub struct Space {
    field: Arc<FieldCtx>,
    dim: usize,
    size: u64,
}

impl PartialEq for Space {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && *self.field == *other.field
    }
}

impl Space {
    pub fn new(field: Arc<FieldCtx>, dim: usize) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        let size = (field.q() as u64)
            .checked_pow(dim as u32)
            .filter(|&s| s <= MAX_SPACE_SIZE)
            .ok_or(GeometryError::SpaceTooLarge { q: field.q(), d: dim })?;
        Ok(Space { field, dim, size })
    }

    #[inline]
    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<FieldCtx> {
        &self.field
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.field.q()
    }

    /// Number of vectors, q^d.
    #[inline]
    pub fn size(&self) -> u64 {
        self.size
    }

    /// Validates raw coordinate codes.
    pub fn vector(&self, coords: &[u32]) -> Result<VectorFq, GeometryError> {
        self.check_len(coords.len())?;
        coords
            .iter()
            .map(|&c| {
                self.field
                    .element(c)
                    .map_err(|_| GeometryError::CoordinateOutOfRange {
                        code: c as u64,
                        q: self.q(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(VectorFq)
    }

    /// Vector with prime-subfield coordinates given as (possibly negative) integers.
    pub fn vector_from_ints(&self, coords: &[i64]) -> Result<VectorFq, GeometryError> {
        self.check_len(coords.len())?;
        Ok(VectorFq(coords.iter().map(|&c| self.field.from_int(c)).collect()))
    }

    pub fn zero(&self) -> VectorFq {
        VectorFq(vec![FieldElement::ZERO; self.dim])
    }

    fn check_len(&self, got: usize) -> Result<(), GeometryError> {
        if got == self.dim {
            Ok(())
        } else {
            Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                got,
            })
        }
    }

    pub fn encode(&self, v: &VectorFq) -> u64 {
        self.encode_coords(v.coords())
    }

    #[inline]
    pub fn encode_coords(&self, coords: &[FieldElement]) -> u64 {
        let q = self.q() as u64;
        coords.iter().rev().fold(0, |acc, c| acc * q + c.code() as u64)
    }

    pub fn decode(&self, code: u64) -> VectorFq {
        let mut out = vec![FieldElement::ZERO; self.dim];
        self.decode_into(code, &mut out);
        VectorFq(out)
    }

    #[inline]
    pub fn decode_into(&self, mut code: u64, out: &mut [FieldElement]) {
        let q = self.q() as u64;
        for c in out.iter_mut() {
            *c = FieldElement::from_code((code % q) as u32);
            code /= q;
        }
    }

    pub fn vectors(&self) -> impl Iterator<Item = VectorFq> + '_ {
        (0..self.size).map(move |c| self.decode(c))
    }

    pub fn add(&self, u: &VectorFq, v: &VectorFq) -> VectorFq {
        VectorFq(u.0.iter().zip(&v.0).map(|(&a, &b)| self.field.add(a, b)).collect())
    }

    pub fn sub(&self, u: &VectorFq, v: &VectorFq) -> VectorFq {
        VectorFq(u.0.iter().zip(&v.0).map(|(&a, &b)| self.field.sub(a, b)).collect())
    }

    pub fn scale(&self, s: FieldElement, v: &VectorFq) -> VectorFq {
        VectorFq(v.0.iter().map(|&a| self.field.mul(s, a)).collect())
    }

    /// `sum u_i v_i`.
    pub fn dot(&self, u: &VectorFq, v: &VectorFq) -> Result<FieldElement, GeometryError> {
        self.check_len(u.dim())?;
        self.check_len(v.dim())?;
        Ok(dot_coords(&self.field, u.coords(), v.coords()))
    }

    /// `dot(u, u)`, the finite-field "distance" from the origin.
    pub fn norm(&self, u: &VectorFq) -> Result<FieldElement, GeometryError> {
        self.dot(u, u)
    }

    pub fn apply_matrix(&self, m: &Matrix, v: &VectorFq) -> VectorFq {
        VectorFq(m.mul_vec(&self.field, v.coords()))
    }

    /// `{ v : norm(v) = t }`.
    pub fn sphere_points(&self, t: FieldElement) -> Vec<VectorFq> {
        self.vectors()
            .filter(|v| dot_coords(&self.field, v.coords(), v.coords()) == t)
            .collect()
    }

    /// `{ norm(x - y) : x, y in E }`.
    pub fn distance_set(&self, set: &PointSet) -> Result<BTreeSet<FieldElement>, GeometryError> {
        if set.is_empty() {
            return Err(GeometryError::EmptySet);
        }
        let pts: Vec<VectorFq> = set.vectors().collect();
        let mut out = BTreeSet::new();
        for x in &pts {
            for y in &pts {
                let diff = self.sub(x, y);
                out.insert(dot_coords(&self.field, diff.coords(), diff.coords()));
            }
        }
        Ok(out)
    }

    /// Dimension of the affine span: the rank of the rows `x^i - x^{k+1}`.
    pub fn affine_span_dim(&self, config: &PointConfig) -> usize {
        let last = config.points.last().expect("configurations are nonempty");
        let rows: Vec<VectorFq> = config.points[..config.points.len() - 1]
            .iter()
            .map(|p| self.sub(p, last))
            .collect();
        Matrix::from_rows(self.dim, &rows.iter().map(|r| r.coords()).collect::<Vec<_>>())
            .rank(&self.field)
    }
}

#[inline]
pub(crate) fn dot_coords(f: &FieldCtx, u: &[FieldElement], v: &[FieldElement]) -> FieldElement {
    u.iter()
        .zip(v)
        .fold(FieldElement::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
}

#[derive(Debug, Clone)]
enum Membership {
    Bitmap(Vec<bool>),
    Hashed(HashSet<u64>),
}

/// A finite subset of F_q^d.
#[derive(Debug, Clone)]
pub struct PointSet {
    space: Space,
    codes: Vec<u64>,
    membership: Membership,
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.codes == other.codes
    }
}

impl Eq for PointSet {}

impl PointSet {
    /// Builds a set from vector codes; duplicates and out-of-range codes are errors.
    pub fn from_codes(
        space: &Space,
        codes: impl IntoIterator<Item = u64>,
    ) -> Result<Self, GeometryError> {
        let mut codes: Vec<u64> = codes.into_iter().collect();
        if let Some(&code) = codes.iter().find(|&&c| c >= space.size()) {
            return Err(GeometryError::VectorCodeOutOfRange {
                code,
                size: space.size(),
            });
        }
        codes.sort_unstable();
        if let Some(w) = codes.windows(2).find(|w| w[0] == w[1]) {
            return Err(GeometryError::DuplicatePoint(space.decode(w[0]).to_string()));
        }
        let membership = if space.size() <= BITMAP_LIMIT {
            let mut bits = vec![false; space.size() as usize];
            for &c in &codes {
                bits[c as usize] = true;
            }
            Membership::Bitmap(bits)
        } else {
            Membership::Hashed(codes.iter().copied().collect())
        };
        Ok(PointSet {
            space: space.clone(),
            codes,
            membership,
        })
    }

    pub fn from_vectors(space: &Space, vectors: &[VectorFq]) -> Result<Self, GeometryError> {
        for v in vectors {
            space.check_len(v.dim())?;
        }
        Self::from_codes(space, vectors.iter().map(|v| space.encode(v)))
    }

    /// All of F_q^d.
    pub fn full(space: &Space) -> Self {
        Self::from_codes(space, 0..space.size()).expect("full space is a valid set")
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Sorted vector codes.
    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn vectors(&self) -> impl Iterator<Item = VectorFq> + '_ {
        self.codes.iter().map(|&c| self.space.decode(c))
    }

    pub fn contains_code(&self, code: u64) -> bool {
        match &self.membership {
            Membership::Bitmap(bits) => bits.get(code as usize).copied().unwrap_or(false),
            Membership::Hashed(set) => set.contains(&code),
        }
    }

    pub fn contains(&self, v: &VectorFq) -> bool {
        v.dim() == self.space.dim() && self.contains_code(self.space.encode(v))
    }

    /// The indicator function E(x) as a table over all vector codes.
    pub fn indicator(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.space.size() as usize];
        for &c in &self.codes {
            out[c as usize] = 1.0;
        }
        out
    }

    /// Image of the set under a map on vectors.
    pub fn map<F: Fn(&VectorFq) -> VectorFq>(&self, f: F) -> Result<Self, GeometryError> {
        let images: Vec<VectorFq> = self.vectors().map(|v| f(&v)).collect();
        Self::from_vectors(&self.space, &images)
    }

    /// Parses the set-file format: one vector per line as `d` comma-separated
    /// element codes, with `#` comment lines and blank lines ignored.
    pub fn parse(space: &Space, text: &str) -> Result<Self, GeometryError> {
        let mut vectors = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| GeometryError::Parse { line: idx + 1, msg };
            let coords = line
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|e| parse_err(format!("bad element code {:?}: {e}", t.trim())))
                })
                .collect::<Result<Vec<u32>, _>>()?;
            let v = space.vector(&coords).map_err(|e| parse_err(e.to_string()))?;
            vectors.push(v);
        }
        Self::from_vectors(space, &vectors)
    }

    pub fn read_file(space: &Space, path: impl AsRef<Path>) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(space, &text)
    }

    pub fn to_set_file(&self) -> String {
        let mut out = String::new();
        for v in self.vectors() {
            let line: Vec<String> = v.coords().iter().map(|c| c.code().to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// A tuple `(x^1, ..., x^{k+1})` of points, `k >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointConfig {
    points: Vec<VectorFq>,
}

impl PointConfig {
    pub fn new(points: Vec<VectorFq>) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::ConfigTooShort(points.len()));
        }
        let d = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(GeometryError::DimensionMismatch {
                expected: d,
                got: p.dim(),
            });
        }
        Ok(PointConfig { points })
    }

    pub fn points(&self) -> &[VectorFq] {
        &self.points
    }

    /// Number of points minus one.
    pub fn k(&self) -> usize {
        self.points.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(q: u64, d: usize) -> Space {
        Space::new(Arc::new(FieldCtx::of_order(q, None).unwrap()), d).unwrap()
    }

    fn fe(c: u32) -> FieldElement {
        FieldElement::from_code(c)
    }

    #[test]
    fn dot_and_norm() {
        let s3 = space(3, 2);
        let e1 = s3.vector(&[1, 0]).unwrap();
        let e2 = s3.vector(&[0, 1]).unwrap();
        assert_eq!(s3.dot(&e1, &e2).unwrap(), fe(0));
        assert_eq!(s3.norm(&s3.vector(&[1, 1]).unwrap()).unwrap(), fe(2));
        let s5 = space(5, 2);
        assert_eq!(s5.norm(&s5.vector(&[1, 2]).unwrap()).unwrap(), fe(0));
        let s3d3 = space(3, 3);
        assert!(matches!(
            s3.dot(&e1, &s3d3.zero()),
            Err(GeometryError::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn encode_roundtrip() {
        let s = space(9, 2);
        for code in 0..s.size() {
            assert_eq!(s.encode(&s.decode(code)), code);
        }
        assert_eq!(s.encode(&s.vector(&[1, 2]).unwrap()), 1 + 2 * 9);
    }

    #[test]
    fn distance_sets() {
        let s = space(3, 2);
        let one = PointSet::from_codes(&s, [4]).unwrap();
        assert_eq!(s.distance_set(&one).unwrap(), BTreeSet::from([fe(0)]));
        let two = PointSet::from_vectors(&s, &[s.vector(&[0, 0]).unwrap(), s.vector(&[1, 0]).unwrap()])
            .unwrap();
        assert_eq!(s.distance_set(&two).unwrap(), BTreeSet::from([fe(0), fe(1)]));
        assert_eq!(s.distance_set(&PointSet::full(&s)).unwrap().len(), 3);
        let empty = PointSet::from_codes(&s, []).unwrap();
        assert!(matches!(s.distance_set(&empty), Err(GeometryError::EmptySet)));
    }

    #[test]
    fn full_space_distance_set_is_whole_field() {
        for (q, d) in [(5u64, 2usize), (7, 2), (3, 3), (9, 2)] {
            let s = space(q, d);
            assert_eq!(s.distance_set(&PointSet::full(&s)).unwrap().len() as u64, q);
        }
    }

    #[test]
    fn spheres() {
        let s3 = space(3, 2);
        let zero = s3.sphere_points(fe(0));
        assert_eq!(zero, vec![s3.zero()]);
        let unit = s3.sphere_points(fe(1));
        let expected: Vec<VectorFq> = [[1, 0], [2, 0], [0, 1], [0, 2]]
            .iter()
            .map(|c| s3.vector(c).unwrap())
            .collect();
        assert_eq!(unit.len(), 4);
        for v in expected {
            assert!(unit.contains(&v));
        }
        let s5 = space(5, 2);
        assert_eq!(s5.sphere_points(fe(0)).len(), 9);
    }

    #[test]
    fn spheres_partition_space() {
        for (q, d) in [(3u64, 2usize), (5, 2), (3, 3), (7, 2), (5, 3), (9, 2), (5, 5)] {
            let s = space(q, d);
            let total: usize = s.field().elements().map(|t| s.sphere_points(t).len()).sum();
            assert_eq!(total as u64, s.size());
        }
    }

    #[test]
    fn affine_span() {
        let s = space(3, 2);
        let cfg = |pts: &[[u32; 2]]| {
            PointConfig::new(pts.iter().map(|p| s.vector(p).unwrap()).collect()).unwrap()
        };
        assert_eq!(s.affine_span_dim(&cfg(&[[1, 1], [1, 1], [1, 1]])), 0);
        assert_eq!(s.affine_span_dim(&cfg(&[[0, 0], [1, 0], [2, 0]])), 1);
        assert_eq!(s.affine_span_dim(&cfg(&[[0, 0], [1, 0], [0, 1]])), 2);
    }

    #[test]
    fn config_validation() {
        let s = space(3, 2);
        assert!(matches!(
            PointConfig::new(vec![s.zero()]),
            Err(GeometryError::ConfigTooShort(1))
        ));
        let s3 = space(3, 3);
        assert!(matches!(
            PointConfig::new(vec![s.zero(), s3.zero()]),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn set_file_parsing() {
        let s = space(5, 2);
        let text = "# two points\n0,0\n\n 1, 2\n";
        let set = PointSet::parse(&s, text).unwrap();
        assert_eq!(set.len(), 2);
        assert!(set.contains(&s.vector(&[1, 2]).unwrap()));
        assert_eq!(PointSet::parse(&s, &set.to_set_file()).unwrap().codes(), set.codes());

        assert!(matches!(
            PointSet::parse(&s, "0,0\n0,5\n"),
            Err(GeometryError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            PointSet::parse(&s, "0,0,0\n"),
            Err(GeometryError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            PointSet::parse(&s, "1,x\n"),
            Err(GeometryError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            PointSet::parse(&s, "1,1\n1,1\n"),
            Err(GeometryError::DuplicatePoint(_))
        ));
    }
}
