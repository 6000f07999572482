//! Brute-force oracles shared by the integration tests. None of them go
//! through congruence keys, action tables or Fourier transforms.

#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::Arc;

use fq_congruence::geometry::{PointSet, Space, VectorFq};
use fq_congruence::gfarith::{FieldCtx, FieldElement};
use fq_congruence::isogroup::OrthogonalGroup;

pub fn space(q: u64, d: usize) -> Space {
    Space::new(Arc::new(FieldCtx::of_order(q, None).unwrap()), d).unwrap()
}

pub fn dot(space: &Space, u: &VectorFq, v: &VectorFq) -> FieldElement {
    let f = space.field();
    u.coords()
        .iter()
        .zip(v.coords())
        .fold(FieldElement::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
}

/// Orthogonal matrices found by testing every d x d matrix, as column lists.
pub fn brute_orthogonal_matrices(space: &Space) -> Vec<Vec<VectorFq>> {
    let d = space.dim();
    let n = space.size();
    let mut out = Vec::new();
    let mut cols = vec![0u64; d];
    loop {
        let vs: Vec<VectorFq> = cols.iter().map(|&c| space.decode(c)).collect();
        let ok = (0..d).all(|i| {
            (0..d).all(|j| {
                let want = if i == j { FieldElement::ONE } else { FieldElement::ZERO };
                dot(space, &vs[i], &vs[j]) == want
            })
        });
        if ok {
            out.push(vs);
        }
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            cols[i] += 1;
            if cols[i] < n {
                break;
            }
            cols[i] = 0;
            i += 1;
        }
    }
}

/// `M v` for a matrix given by its columns.
pub fn apply_columns(space: &Space, cols: &[VectorFq], v: &VectorFq) -> VectorFq {
    cols.iter()
        .zip(v.coords())
        .fold(space.zero(), |acc, (c, &x)| space.add(&acc, &space.scale(x, c)))
}

/// Every tuple `theta x + z` over the brute-force group and all translations.
pub fn rigid_orbit(space: &Space, group: &[Vec<VectorFq>], x: &[VectorFq]) -> HashSet<Vec<u64>> {
    let mut out = HashSet::new();
    for cols in group {
        let rotated: Vec<VectorFq> = x.iter().map(|p| apply_columns(space, cols, p)).collect();
        for z in space.vectors() {
            out.insert(rotated.iter().map(|p| space.encode(&space.add(p, &z))).collect());
        }
    }
    out
}

/// `#{(theta, z, u_1..u_p, v_1..v_p) : u_i - theta v_i = z for all i}`.
pub fn tuple_moment(set: &PointSet, group: &OrthogonalGroup, p: usize) -> u128 {
    let space = set.space();
    let pts: Vec<VectorFq> = set.vectors().collect();
    let n = pts.len();
    let mut total = 0u128;
    for theta in group.elements() {
        let rotated: Vec<VectorFq> = pts.iter().map(|v| theta.apply(space, v)).collect();
        // all (u_i, v_i) index pairs, p at a time
        let pairs = n * n;
        let mut idx = vec![0usize; p];
        'outer: loop {
            let diff = |j: usize| {
                let (u, v) = (idx[j] / n, idx[j] % n);
                space.sub(&pts[u], &rotated[v])
            };
            let z = diff(0);
            if (1..p).all(|j| diff(j) == z) {
                total += 1;
            }
            let mut i = 0;
            loop {
                if i == p {
                    break 'outer;
                }
                idx[i] += 1;
                if idx[i] < pairs {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }
    total
}
