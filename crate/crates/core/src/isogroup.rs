//! The orthogonal group O(F_q^d), rigid motions, and subspace geometry:
//! radicals, Witt complements, isometry extension, isometry groups of
//! subspaces and orbit representatives of subspaces.
//!
//! Groups are enumerated by building orthonormal frames column by column.
//! Every enumeration is bounded by a candidate cap so that oversized
//! requests fail instead of running for hours.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{dot_coords, GeometryError, Space, VectorFq};
use crate::gfarith::{FieldCtx, FieldElement};
use crate::linalg::Matrix;

/// Enumerations refuse to inspect more candidates than this.
pub const DEFAULT_CANDIDATE_CAP: u64 = 10_000_000;
const ACTION_TABLE_CAP: u64 = 1 << 28;

#[derive(Debug, Error)]
pub enum IsoError {
    #[error("{what} needs {needed} candidates, over the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u64,
    },
    #[error("{sources} source vectors but {images} images")]
    LengthMismatch { sources: usize, images: usize },
    #[error("source vectors are linearly dependent")]
    SourceDependent,
    #[error("map is not injective on the source subspace")]
    NotInjective,
    #[error("map does not preserve the Gram matrix")]
    NotGramPreserving,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A d x d matrix with `M^T M = I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct OrthMatrix(Matrix);

impl OrthMatrix {
    /// Checks `M^T M = I` exactly.
    pub fn new(f: &FieldCtx, m: Matrix) -> Option<Self> {
        (m.rows() == m.cols() && m.transpose().mul(f, &m).is_identity()).then_some(OrthMatrix(m))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn apply(&self, space: &Space, v: &VectorFq) -> VectorFq {
        space.apply_matrix(&self.0, v)
    }

    pub fn inverse(&self) -> OrthMatrix {
        OrthMatrix(self.0.transpose())
    }
}

/// `x -> rot * x + trans`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigidMotion {
    pub rot: OrthMatrix,
    pub trans: VectorFq,
}

impl RigidMotion {
    pub fn apply(&self, space: &Space, v: &VectorFq) -> VectorFq {
        space.add(&self.rot.apply(space, v), &self.trans)
    }
}

/// All of O(F_q^d) in a fixed order, with a precomputed action on vector codes.
#[derive(Debug, Clone)]
pub struct OrthogonalGroup {
    space: Space,
    elements: Vec<OrthMatrix>,
    action: Vec<u32>,
    inverse: Vec<usize>,
    identity: usize,
}

impl OrthogonalGroup {
    pub fn enumerate(space: &Space) -> Result<Self, IsoError> {
        Self::enumerate_with_cap(space, DEFAULT_CANDIDATE_CAP)
    }

    pub fn enumerate_with_cap(space: &Space, cap: u64) -> Result<Self, IsoError> {
        let f = space.field();
        let d = space.dim();
        let units: Vec<VectorFq> = space.sphere_points(FieldElement::ONE);
        let mut frames = Vec::new();
        let mut cols: Vec<usize> = Vec::with_capacity(d);
        let mut inspected = 0u64;
        extend_frame(f, &units, d, &mut cols, &mut frames, &mut inspected, cap)?;

        let elements: Vec<OrthMatrix> = frames
            .into_iter()
            .map(|cols: Vec<usize>| {
                let c: Vec<&[FieldElement]> = cols.iter().map(|&i| units[i].coords()).collect();
                OrthMatrix(Matrix::from_columns(d, &c))
            })
            .collect();

        let n = space.size();
        let table_len = elements.len() as u64 * n;
        if table_len > ACTION_TABLE_CAP {
            return Err(IsoError::CapExceeded {
                what: "group action table",
                needed: table_len as u128,
                cap: ACTION_TABLE_CAP,
            });
        }
        let mut action = Vec::with_capacity(table_len as usize);
        let mut buf = vec![FieldElement::ZERO; d];
        for g in &elements {
            for code in 0..n {
                space.decode_into(code, &mut buf);
                action.push(space.encode_coords(&g.0.mul_vec(f, &buf)) as u32);
            }
        }

        let index: HashMap<&Matrix, usize> =
            elements.iter().enumerate().map(|(i, g)| (&g.0, i)).collect();
        let inverse = elements.iter().map(|g| index[&g.0.transpose()]).collect();
        let identity = index[&Matrix::identity(d)];

        Ok(OrthogonalGroup {
            space: space.clone(),
            elements,
            action,
            inverse,
            identity,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[OrthMatrix] {
        &self.elements
    }

    pub fn element(&self, idx: usize) -> &OrthMatrix {
        &self.elements[idx]
    }

    pub fn identity_index(&self) -> usize {
        self.identity
    }

    pub fn inverse_index(&self, idx: usize) -> usize {
        self.inverse[idx]
    }

    /// Code of `g * x` for the group element with index `g`.
    #[inline]
    pub fn act(&self, g: usize, code: u64) -> u64 {
        self.action[g * self.space.size() as usize + code as usize] as u64
    }

    /// Row of the action table for one group element.
    pub fn action_row(&self, g: usize) -> &[u32] {
        let n = self.space.size() as usize;
        &self.action[g * n..(g + 1) * n]
    }

    /// Number of `theta` with `theta m = l`.
    pub fn transporter_count(&self, m: &VectorFq, l: &VectorFq) -> usize {
        let (mc, lc) = (self.space.encode(m), self.space.encode(l));
        (0..self.order()).filter(|&g| self.act(g, mc) == lc).count()
    }

    /// Largest `#{theta : theta m = l}` over nonzero `m`, `l` of equal norm,
    /// split by whether the norm is zero.
    pub fn transporter_profile(&self) -> TransporterProfile {
        let f = self.space.field();
        let n = self.space.size();
        let mut max_anisotropic = 0;
        let mut max_isotropic = None;
        let mut counts = vec![0usize; n as usize];
        for mc in 1..n {
            counts.iter_mut().for_each(|c| *c = 0);
            for g in 0..self.order() {
                counts[self.act(g, mc) as usize] += 1;
            }
            let top = counts.iter().copied().max().unwrap_or(0);
            let v = self.space.decode(mc);
            if dot_coords(f, v.coords(), v.coords()).is_zero() {
                max_isotropic = Some(max_isotropic.unwrap_or(0).max(top));
            } else {
                max_anisotropic = max_anisotropic.max(top);
            }
        }
        let d = self.space.dim() as u32;
        let e = d.saturating_sub(1) * d.saturating_sub(2) / 2;
        TransporterProfile {
            max_anisotropic,
            max_isotropic,
            reference: (self.space.q() as u64).pow(e),
        }
    }

    /// Exhaustive check of closure, inverses and identity on the matrices.
    pub fn verify_axioms(&self) -> bool {
        let f = self.space.field();
        let index: HashMap<&Matrix, usize> =
            self.elements.iter().enumerate().map(|(i, g)| (&g.0, i)).collect();
        if index.len() != self.elements.len() || !self.elements[self.identity].0.is_identity() {
            return false;
        }
        for (i, a) in self.elements.iter().enumerate() {
            if !a.0.mul(f, &self.elements[self.inverse[i]].0).is_identity() {
                return false;
            }
            for b in &self.elements {
                if !index.contains_key(&a.0.mul(f, &b.0)) {
                    return false;
                }
            }
        }
        true
    }

    /// `|O| / q^{d(d-1)/2}`.
    pub fn normalized_order(&self) -> f64 {
        let d = self.space.dim() as i32;
        self.order() as f64 / (self.space.q() as f64).powi(d * (d - 1) / 2)
    }

    /// Some `theta` in O with `theta s_i = t_i` for every pair, after
    /// checking that `s_i -> t_i` is an injective, Gram-preserving linear map.
    /// By Witt's theorem the result is `Some` whenever the checks pass.
    pub fn extend_isometry(
        &self,
        sources: &[VectorFq],
        images: &[VectorFq],
    ) -> Result<Option<OrthMatrix>, IsoError> {
        if sources.len() != images.len() {
            return Err(IsoError::LengthMismatch {
                sources: sources.len(),
                images: images.len(),
            });
        }
        let f = self.space.field();
        let d = self.space.dim();
        for v in sources.iter().chain(images) {
            if v.dim() != d {
                return Err(GeometryError::DimensionMismatch {
                    expected: d,
                    got: v.dim(),
                }
                .into());
            }
        }
        let rank = |vs: &[VectorFq]| {
            Matrix::from_rows(d, &vs.iter().map(|v| v.coords()).collect::<Vec<_>>()).rank(f)
        };
        if rank(sources) != sources.len() {
            return Err(IsoError::SourceDependent);
        }
        if rank(images) != images.len() {
            return Err(IsoError::NotInjective);
        }
        if gram_of(f, sources) != gram_of(f, images) {
            return Err(IsoError::NotGramPreserving);
        }
        let sc: Vec<u64> = sources.iter().map(|v| self.space.encode(v)).collect();
        let ic: Vec<u64> = images.iter().map(|v| self.space.encode(v)).collect();
        Ok((0..self.order())
            .find(|&g| sc.iter().zip(&ic).all(|(&s, &t)| self.act(g, s) == t))
            .map(|g| self.elements[g].clone()))
    }

    /// Representatives of the O-orbits on r-dimensional subspaces.
    pub fn subspace_orbit_reps(&self, r: usize) -> Result<SubspaceOrbits, IsoError> {
        self.subspace_orbit_reps_with_cap(r, DEFAULT_CANDIDATE_CAP)
    }

    pub fn subspace_orbit_reps_with_cap(
        &self,
        r: usize,
        cap: u64,
    ) -> Result<SubspaceOrbits, IsoError> {
        let all = enumerate_subspaces(&self.space, r, cap)?;
        let index: HashMap<&Subspace, usize> = all.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut seen = vec![false; all.len()];
        let mut reps = Vec::new();
        let mut orbit_sizes = Vec::new();
        for start in 0..all.len() {
            if seen[start] {
                continue;
            }
            let mut size = 0;
            for g in 0..self.order() {
                let image = self.image_of_subspace(g, &all[start]);
                let j = index[&image];
                if !seen[j] {
                    seen[j] = true;
                    size += 1;
                }
            }
            reps.push(all[start].clone());
            orbit_sizes.push(size);
        }
        Ok(SubspaceOrbits {
            dim: r,
            total_subspaces: all.len(),
            reps,
            orbit_sizes,
        })
    }

    fn image_of_subspace(&self, g: usize, v: &Subspace) -> Subspace {
        let rows: Vec<VectorFq> = v
            .basis_vectors()
            .map(|b| self.space.decode(self.act(g, self.space.encode(&b))))
            .collect();
        Subspace::span(&self.space, &rows)
    }
}

fn extend_frame(
    f: &FieldCtx,
    units: &[VectorFq],
    d: usize,
    cols: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    inspected: &mut u64,
    cap: u64,
) -> Result<(), IsoError> {
    if cols.len() == d {
        out.push(cols.clone());
        return Ok(());
    }
    *inspected += units.len() as u64;
    if *inspected > cap {
        return Err(IsoError::CapExceeded {
            what: "orthogonal group enumeration",
            needed: *inspected as u128,
            cap,
        });
    }
    for (i, u) in units.iter().enumerate() {
        let orthogonal = cols
            .iter()
            .all(|&c| dot_coords(f, units[c].coords(), u.coords()).is_zero());
        if orthogonal {
            cols.push(i);
            extend_frame(f, units, d, cols, out, inspected, cap)?;
            cols.pop();
        }
    }
    Ok(())
}

pub(crate) fn gram_of(f: &FieldCtx, vs: &[VectorFq]) -> Matrix {
    let n = vs.len();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g.set(i, j, dot_coords(f, vs[i].coords(), vs[j].coords()));
        }
    }
    g
}

/// A linear subspace of F_q^d, stored as its reduced row echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    pub fn span(space: &Space, vectors: &[VectorFq]) -> Self {
        let rows: Vec<&[FieldElement]> = vectors.iter().map(|v| v.coords()).collect();
        Subspace {
            basis: Matrix::from_rows(space.dim(), &rows).row_space_basis(space.field()),
        }
    }

    pub fn zero(space: &Space) -> Self {
        Subspace {
            basis: Matrix::zeros(0, space.dim()),
        }
    }

    pub fn full(space: &Space) -> Self {
        Subspace {
            basis: Matrix::identity(space.dim()),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> impl Iterator<Item = VectorFq> + '_ {
        self.basis.row_iter().map(|r| VectorFq::from_elements(r.to_vec()))
    }

    pub fn contains(&self, space: &Space, v: &VectorFq) -> bool {
        let mut rows: Vec<&[FieldElement]> = self.basis.row_iter().collect();
        rows.push(v.coords());
        Matrix::from_rows(space.dim(), &rows).rank(space.field()) == self.dim()
    }

    /// Gram matrix of the stored basis under the dot product.
    pub fn gram(&self, space: &Space) -> Matrix {
        gram_of(space.field(), &self.basis_vectors().collect::<Vec<_>>())
    }

    /// Vectors of `self` orthogonal to all of `self`.
    pub fn radical(&self, space: &Space) -> Subspace {
        let f = space.field();
        let coeffs = self.gram(space).null_space(f);
        let vectors: Vec<VectorFq> = coeffs
            .row_iter()
            .map(|c| VectorFq::from_elements(self.basis.transpose().mul_vec(f, c)))
            .collect();
        Subspace::span(space, &vectors)
    }

    /// Splits `self` as `radical + complement`, where the complement is
    /// spanned by the basis rows that extend a radical basis, taken in order.
    /// The form restricted to the complement is non-degenerate.
    pub fn witt_complement(&self, space: &Space) -> WittSplit {
        let f = space.field();
        let kernel = self.radical(space);
        let mut current: Vec<VectorFq> = kernel.basis_vectors().collect();
        let mut chosen = Vec::new();
        for b in self.basis_vectors() {
            current.push(b.clone());
            let rows: Vec<&[FieldElement]> = current.iter().map(|v| v.coords()).collect();
            if Matrix::from_rows(space.dim(), &rows).rank(f) == current.len() {
                chosen.push(b);
            } else {
                current.pop();
            }
        }
        WittSplit {
            kernel,
            complement: Subspace::span(space, &chosen),
        }
    }

    /// `|Iso(V)|`: invertible maps of V (in basis coordinates) preserving the
    /// restricted form, counted by brute force over all r x r matrices.
    pub fn iso_group_size(&self, space: &Space) -> Result<u64, IsoError> {
        self.iso_group_size_with_cap(space, DEFAULT_CANDIDATE_CAP)
    }

    pub fn iso_group_size_with_cap(&self, space: &Space, cap: u64) -> Result<u64, IsoError> {
        let f = space.field();
        let r = self.dim();
        if r == 0 {
            return Ok(1);
        }
        let q = space.q() as u64;
        let needed = (q as u128).checked_pow((r * r) as u32).unwrap_or(u128::MAX);
        if needed > cap as u128 {
            return Err(IsoError::CapExceeded {
                what: "subspace isometry search",
                needed,
                cap,
            });
        }
        let g = self.gram(space);
        let mut count = 0u64;
        let mut a = Matrix::zeros(r, r);
        for idx in 0..needed as u64 {
            let mut rest = idx;
            for i in 0..r {
                for j in 0..r {
                    a.set(i, j, FieldElement::from_code((rest % q) as u32));
                    rest /= q;
                }
            }
            if a.transpose().mul(f, &g).mul(f, &a) == g && a.rank(f) == r {
                count += 1;
            }
        }
        Ok(count)
    }
}

/// `V = kernel (+) complement`.
/// Measured transporter counts next to `q^{(d-1)(d-2)/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TransporterProfile {
    pub max_anisotropic: usize,
    /// `None` when no nonzero vector has norm zero.
    pub max_isotropic: Option<usize>,
    pub reference: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WittSplit {
    pub kernel: Subspace,
    pub complement: Subspace,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceOrbits {
    pub dim: usize,
    pub total_subspaces: usize,
    pub reps: Vec<Subspace>,
    pub orbit_sizes: Vec<usize>,
}

/// Number of r-dimensional subspaces of F_q^d.
pub fn gaussian_binomial(q: u64, d: usize, r: usize) -> u128 {
    if r > d {
        return 0;
    }
    let q = q as u128;
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..r {
        num *= q.pow((d - i) as u32) - 1;
        den *= q.pow((i + 1) as u32) - 1;
    }
    num / den
}

/// `|GL_s(F_q)|`.
pub fn gl_order(q: u64, s: usize) -> u128 {
    let q = q as u128;
    (0..s).map(|i| q.pow(s as u32) - q.pow(i as u32)).product()
}

/// Every r-dimensional subspace, in increasing order of RREF basis.
pub fn enumerate_subspaces(space: &Space, r: usize, cap: u64) -> Result<Vec<Subspace>, IsoError> {
    let d = space.dim();
    let q = space.q() as u64;
    let needed = gaussian_binomial(q, d, r);
    if needed > cap as u128 {
        return Err(IsoError::CapExceeded {
            what: "subspace enumeration",
            needed,
            cap,
        });
    }
    let mut out = Vec::with_capacity(needed as usize);
    let mut pivots: Vec<usize> = (0..r).collect();
    if r > d {
        return Ok(out);
    }
    loop {
        let free: Vec<(usize, usize)> = (0..r)
            .flat_map(|i| {
                let p = &pivots;
                ((p[i] + 1)..d).filter(move |c| !p.contains(c)).map(move |c| (i, c))
            })
            .collect();
        let count = q.pow(free.len() as u32);
        for idx in 0..count {
            let mut m = Matrix::zeros(r, d);
            for (i, &p) in pivots.iter().enumerate() {
                m.set(i, p, FieldElement::ONE);
            }
            let mut rest = idx;
            for &(i, c) in &free {
                m.set(i, c, FieldElement::from_code((rest % q) as u32));
                rest /= q;
            }
            out.push(Subspace { basis: m });
        }
        // next r-combination of 0..d
        let Some(i) = (0..r).rev().find(|&i| pivots[i] < d - r + i) else {
            break;
        };
        pivots[i] += 1;
        for j in i + 1..r {
            pivots[j] = pivots[j - 1] + 1;
        }
    }
    out.sort();
    Ok(out)
}

/// One row of the isometry-group lower-bound chain for a subspace V of
/// dimension r with radical of dimension s.
#[derive(Debug, Clone, Serialize)]
pub struct IsoBoundRow {
    pub dim: usize,
    pub radical_dim: usize,
    pub iso_size: u64,
    pub gl_radical: u128,
    /// `|O(F_q^{r-s})|` for the standard dot product.
    pub standard_orthogonal: u64,
    /// `|Iso(W)|` for the non-degenerate complement W actually inside V.
    pub complement_iso: u64,
    /// `|Iso(V)| >= |GL_s| |O(F_q^{r-s})|`.
    pub standard_bound_holds: bool,
    /// `|Iso(V)| >= |GL_s| |Iso(W)|`.
    pub block_bound_holds: bool,
}

pub fn iso_bound_row(space: &Space, v: &Subspace) -> Result<IsoBoundRow, IsoError> {
    let split = v.witt_complement(space);
    let r = v.dim();
    let s = split.kernel.dim();
    let iso_size = v.iso_group_size(space)?;
    let complement_iso = split.complement.iso_group_size(space)?;
    let standard_orthogonal = if r == s {
        1
    } else {
        let sub = Space::new(space.field_arc().clone(), r - s)?;
        OrthogonalGroup::enumerate(&sub)?.order() as u64
    };
    let gl_radical = gl_order(space.q() as u64, s);
    Ok(IsoBoundRow {
        dim: r,
        radical_dim: s,
        iso_size,
        gl_radical,
        standard_orthogonal,
        complement_iso,
        standard_bound_holds: iso_size as u128 >= gl_radical * standard_orthogonal as u128,
        block_bound_holds: iso_size as u128 >= gl_radical * complement_iso as u128,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn space(q: u64, d: usize) -> Space {
        Space::new(Arc::new(FieldCtx::of_order(q, None).unwrap()), d).unwrap()
    }

    fn v(s: &Space, c: &[u32]) -> VectorFq {
        s.vector(c).unwrap()
    }

    #[test]
    fn transporter_profiles() {
        let g = OrthogonalGroup::enumerate(&space(3, 2)).unwrap();
        let p = g.transporter_profile();
        assert_eq!((p.max_anisotropic, p.max_isotropic, p.reference), (2, None, 1));
        let g = OrthogonalGroup::enumerate(&space(5, 2)).unwrap();
        assert_eq!(g.transporter_profile().max_isotropic, Some(1));
    }

    #[test]
    fn group_orders() {
        assert_eq!(OrthogonalGroup::enumerate(&space(3, 2)).unwrap().order(), 8);
        assert_eq!(OrthogonalGroup::enumerate(&space(5, 2)).unwrap().order(), 8);
        assert_eq!(OrthogonalGroup::enumerate(&space(3, 3)).unwrap().order(), 48);
        assert_eq!(OrthogonalGroup::enumerate(&space(7, 1)).unwrap().order(), 2);
    }

    #[test]
    fn enumeration_respects_cap() {
        assert!(matches!(
            OrthogonalGroup::enumerate_with_cap(&space(5, 3), 100),
            Err(IsoError::CapExceeded { .. })
        ));
    }

    #[test]
    fn transporter_counts() {
        let s = space(3, 2);
        let g = OrthogonalGroup::enumerate(&s).unwrap();
        assert_eq!(g.transporter_count(&v(&s, &[1, 0]), &v(&s, &[1, 0])), 2);
        assert_eq!(g.transporter_count(&v(&s, &[1, 0]), &v(&s, &[1, 1])), 0);
        assert_eq!(g.transporter_count(&s.zero(), &s.zero()), 8);
    }

    #[test]
    fn radicals() {
        let s5 = space(5, 2);
        let iso = Subspace::span(&s5, &[v(&s5, &[1, 2])]);
        assert_eq!(iso.radical(&s5), iso);
        let s3 = space(3, 2);
        let line = Subspace::span(&s3, &[v(&s3, &[1, 0])]);
        assert_eq!(line.radical(&s3).dim(), 0);
        assert_eq!(Subspace::full(&s3).radical(&s3).dim(), 0);
    }

    #[test]
    fn witt_split_cases() {
        let s5 = space(5, 2);
        let full = Subspace::span(&s5, &[v(&s5, &[1, 2]), v(&s5, &[1, 0])]);
        let split = full.witt_complement(&s5);
        assert_eq!(split.kernel.dim(), 0);
        assert_eq!(split.complement, full);

        let iso = Subspace::span(&s5, &[v(&s5, &[1, 2])]);
        let split = iso.witt_complement(&s5);
        assert_eq!(split.kernel, iso);
        assert_eq!(split.complement.dim(), 0);
    }

    #[test]
    fn isometry_extension() {
        let s = space(3, 2);
        let g = OrthogonalGroup::enumerate(&s).unwrap();
        let theta = g.extend_isometry(&[v(&s, &[1, 0])], &[v(&s, &[0, 1])]).unwrap().unwrap();
        assert_eq!(theta.apply(&s, &v(&s, &[1, 0])), v(&s, &[0, 1]));
        assert!(matches!(
            g.extend_isometry(&[v(&s, &[1, 0])], &[v(&s, &[1, 1])]),
            Err(IsoError::NotGramPreserving)
        ));
        let id = g.extend_isometry(&[v(&s, &[1, 1])], &[v(&s, &[1, 1])]).unwrap().unwrap();
        assert_eq!(id.apply(&s, &v(&s, &[1, 1])), v(&s, &[1, 1]));

        let s5 = space(5, 2);
        let g5 = OrthogonalGroup::enumerate(&s5).unwrap();
        // isotropic vector sent to zero keeps the Gram matrix but is not injective
        assert!(matches!(
            g5.extend_isometry(&[v(&s5, &[1, 2])], &[s5.zero()]),
            Err(IsoError::NotInjective)
        ));
        assert!(matches!(
            g5.extend_isometry(&[v(&s5, &[1, 2]), v(&s5, &[2, 4])], &[v(&s5, &[1, 2]), v(&s5, &[2, 4])]),
            Err(IsoError::SourceDependent)
        ));
    }

    #[test]
    fn iso_group_sizes() {
        let s3 = space(3, 2);
        assert_eq!(Subspace::span(&s3, &[v(&s3, &[1, 0])]).iso_group_size(&s3).unwrap(), 2);
        assert_eq!(Subspace::full(&s3).iso_group_size(&s3).unwrap(), 8);
        let s5 = space(5, 2);
        assert_eq!(Subspace::span(&s5, &[v(&s5, &[1, 2])]).iso_group_size(&s5).unwrap(), 4);
        assert_eq!(Subspace::zero(&s5).iso_group_size(&s5).unwrap(), 1);
    }

    #[test]
    fn subspace_orbits() {
        let s3 = space(3, 2);
        let g3 = OrthogonalGroup::enumerate(&s3).unwrap();
        let lines = g3.subspace_orbit_reps(1).unwrap();
        assert_eq!(lines.total_subspaces, 4);
        assert_eq!(lines.reps.len(), 2);
        assert_eq!(lines.orbit_sizes.iter().sum::<usize>(), 4);

        let s5 = space(5, 2);
        let g5 = OrthogonalGroup::enumerate(&s5).unwrap();
        let lines = g5.subspace_orbit_reps(1).unwrap();
        assert_eq!(lines.total_subspaces, 6);
        assert_eq!(lines.reps.len(), 3);
        assert_eq!(g5.subspace_orbit_reps(2).unwrap().reps.len(), 1);
        assert_eq!(g5.subspace_orbit_reps(0).unwrap().reps.len(), 1);
    }

    #[test]
    fn gaussian_binomials() {
        assert_eq!(gaussian_binomial(3, 2, 1), 4);
        assert_eq!(gaussian_binomial(3, 3, 1), 13);
        assert_eq!(gaussian_binomial(3, 3, 2), 13);
        assert_eq!(gaussian_binomial(5, 4, 2), 806);
        let s = space(3, 3);
        for r in 0..=3 {
            let subs = enumerate_subspaces(&s, r, DEFAULT_CANDIDATE_CAP).unwrap();
            assert_eq!(subs.len() as u128, gaussian_binomial(3, 3, r));
        }
        assert_eq!(gl_order(3, 2), 48);
        assert_eq!(gl_order(5, 0), 1);
    }

    #[test]
    fn rigid_motion_applies() {
        let s = space(5, 2);
        let g = OrthogonalGroup::enumerate(&s).unwrap();
        let m = RigidMotion {
            rot: g.element(g.identity_index()).clone(),
            trans: v(&s, &[1, 1]),
        };
        assert_eq!(m.apply(&s, &v(&s, &[2, 3])), v(&s, &[3, 4]));
    }
}
