mod common;

use std::sync::{Arc, LazyLock};

use proptest::prelude::*;

use fq_congruence::congruence::{brute_force_congruent, congruence_key, delta_k_count};
use fq_congruence::geometry::{PointConfig, PointSet, Space};
use fq_congruence::gfarith::{FieldCtx, FieldElement};
use fq_congruence::harness::sample_set;
use fq_congruence::isogroup::OrthogonalGroup;
use fq_congruence::spectral::{theorem2_chain, NuTable};

use common::space;

const ORDERS: [u64; 10] = [3, 5, 7, 9, 11, 25, 27, 49, 81, 121];

// 121 has no built-in modulus; x^2 + 1 is irreducible over F_11
static FIELDS: LazyLock<Vec<FieldCtx>> = LazyLock::new(|| {
    ORDERS
        .iter()
        .map(|&q| match q {
            121 => FieldCtx::of_order(q, Some(&[1, 0, 1])).unwrap(),
            _ => FieldCtx::of_order(q, None).unwrap(),
        })
        .collect()
});

struct Fixture {
    space: Space,
    group: OrthogonalGroup,
}

fn fixture(q: u64, d: usize) -> Fixture {
    let space = space(q, d);
    let group = OrthogonalGroup::enumerate(&space).unwrap();
    Fixture { space, group }
}

static F3_2: LazyLock<Fixture> = LazyLock::new(|| fixture(3, 2));
static F5_2: LazyLock<Fixture> = LazyLock::new(|| fixture(5, 2));
static F3_3: LazyLock<Fixture> = LazyLock::new(|| fixture(3, 3));

fn field_and_elems() -> impl Strategy<Value = (usize, u32, u32, u32)> {
    (0..ORDERS.len()).prop_flat_map(|i| {
        let q = ORDERS[i] as u32;
        (Just(i), 0..q, 0..q, 0..q)
    })
}

fn tuple(f: &'static Fixture, len: usize) -> impl Strategy<Value = PointConfig> {
    proptest::collection::vec(0..f.space.size(), len).prop_map(move |codes| {
        PointConfig::new(codes.into_iter().map(|c| f.space.decode(c)).collect()).unwrap()
    })
}

fn el(f: &FieldCtx, c: u32) -> FieldElement {
    f.element(c).unwrap()
}

proptest! {
    #[test]
    fn field_axioms((i, a, b, c) in field_and_elems()) {
        let f = &FIELDS[i];
        let (a, b, c) = (el(f, a), el(f, b), el(f, c));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
        }
    }

    #[test]
    fn frobenius_and_trace((i, a, b, _c) in field_and_elems()) {
        let f = &FIELDS[i];
        let p = f.p() as u64;
        let (a, b) = (el(f, a), el(f, b));
        prop_assert_eq!(f.pow(f.add(a, b), p), f.add(f.pow(a, p), f.pow(b, p)));
        prop_assert_eq!(f.pow(a, f.q() as u64), a);
        prop_assert!(f.trace(a).code() < f.p());
        prop_assert_eq!(f.trace(f.add(a, b)), f.add(f.trace(a), f.trace(b)));
    }

    #[test]
    fn key_is_rigid_motion_invariant(
        x in (3usize..=5).prop_flat_map(|n| tuple(&F5_2, n)),
        g in 0usize..8,
        z in 0u64..25,
    ) {
        let f = &*F5_2;
        let z = f.space.decode(z);
        let theta = f.group.element(g);
        let y = PointConfig::new(
            x.points().iter().map(|p| f.space.add(&theta.apply(&f.space, p), &z)).collect(),
        ).unwrap();
        prop_assert_eq!(congruence_key(&f.space, &x), congruence_key(&f.space, &y));
    }

    #[test]
    fn key_agrees_with_rotation_scan_in_three_dimensions(
        (x, y) in (2usize..=4).prop_flat_map(|n| (tuple(&F3_3, n), tuple(&F3_3, n))),
    ) {
        let f = &*F3_3;
        prop_assert_eq!(
            congruence_key(&f.space, &x) == congruence_key(&f.space, &y),
            brute_force_congruent(&f.group, &x, &y).unwrap()
        );
    }

    #[test]
    fn nu_rows_sum_to_pairs(n in 1u64..=25, seed in any::<u64>()) {
        let f = &*F5_2;
        let set = sample_set(&f.space, n, seed).unwrap();
        let nu = NuTable::new(&set, &f.group).unwrap();
        prop_assert!(nu.row_sums_match(n as usize));
        prop_assert_eq!(nu.moment(1).unwrap(), 8 * (n as u128).pow(2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_holds_on_random_sets(n in 1u64..=9, seed in any::<u64>(), k in 1usize..=3) {
        let f = &*F3_2;
        let set = sample_set(&f.space, n, seed).unwrap();
        let nu = NuTable::new(&set, &f.group).unwrap();
        let delta = delta_k_count(&set, k).unwrap();
        let c = theorem2_chain(&set, &nu, &delta).unwrap();
        prop_assert!(c.holds(), "{:?}", c);
    }

    #[test]
    fn congruent_pairs_match_brute_force(n in 1u64..=4, seed in any::<u64>(), k in 1usize..=2) {
        let f = &*F3_2;
        let set = sample_set(&f.space, n, seed).unwrap();
        let pts: Vec<_> = set.vectors().collect();
        let tuples: Vec<PointConfig> = (0..pts.len().pow(k as u32 + 1))
            .map(|mut idx| {
                PointConfig::new(
                    (0..=k)
                        .map(|_| {
                            let p = pts[idx % pts.len()].clone();
                            idx /= pts.len();
                            p
                        })
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let mut brute = 0u128;
        for x in &tuples {
            for y in &tuples {
                brute += brute_force_congruent(&f.group, x, y).unwrap() as u128;
            }
        }
        prop_assert_eq!(delta_k_count(&set, k).unwrap().congruent_pairs, Some(brute));
    }
}

#[test]
fn additive_characters_are_orthogonal() {
    for f in FIELDS.iter() {
        for b in f.elements() {
            let sum: num_complex::Complex64 = f.elements().map(|a| f.character(f.mul(a, b))).sum();
            let want = if b.is_zero() { f.q() as f64 } else { 0.0 };
            assert!((sum.re - want).abs() < 1e-9 && sum.im.abs() < 1e-9, "{f} b={b:?}: {sum}");
        }
    }
}

#[test]
fn sampled_sets_live_in_the_space() {
    let s = Space::new(Arc::new(FieldCtx::of_order(49, None).unwrap()), 2).unwrap();
    let set = sample_set(&s, 100, 9).unwrap();
    assert_eq!(set.len(), 100);
    assert!(set.codes().windows(2).all(|w| w[0] < w[1]));
    assert!(set.codes().iter().all(|&c| c < s.size()));
    let full = PointSet::full(&s);
    assert!(set.vectors().all(|v| full.contains(&v)));
}
