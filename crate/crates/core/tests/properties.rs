//! Randomized structural invariants over generated posets and rational
//! vectors.

use crdist::incidence::{lower_op, mobius_invert_lower, upper_op, Mobius};
use crdist::scalar::Scalar;
use crdist::{Poset, Rational};
use num_traits::Zero;
use proptest::prelude::*;

/// Random poset from a random strict upper-triangular adjacency matrix:
/// edge i -> j (i < j) kept with the given bias, then transitively
/// reduced by `Poset::build`, which accepts any DAG cover-or-relation set.
fn arb_poset(max_n: usize) -> impl Strategy<Value = Poset> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::weighted(0.3), n * (n - 1) / 2).prop_map(
            move |bits| {
                let mut adj = vec![vec![false; n]; n];
                let mut idx = 0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        adj[i][j] = bits[idx];
                        idx += 1;
                    }
                }
                // reachability closure, then drop edges with a two-hop path
                let mut reach = adj.clone();
                for k in 0..n {
                    for i in 0..n {
                        if reach[i][k] {
                            for j in 0..n {
                                reach[i][j] |= reach[k][j];
                            }
                        }
                    }
                }
                let mut covers = Vec::new();
                for i in 0..n {
                    'edge: for j in (i + 1)..n {
                        if !reach[i][j] {
                            continue;
                        }
                        for k in 0..n {
                            if reach[i][k] && reach[k][j] {
                                continue 'edge;
                            }
                        }
                        covers.push((i, j));
                    }
                }
                Poset::build(n, &covers).unwrap()
            },
        )
    })
}

fn arb_rationals(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec((-50i64..50, 1i64..20), n)
        .prop_map(|pairs| pairs.into_iter().map(|(p, q)| Rational::from_ratio(p, q)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mobius_inversion_roundtrips((p, f) in arb_poset(10).prop_flat_map(|p| {
        let n = p.n_elements();
        (Just(p), arb_rationals(n))
    })) {
        let lf = lower_op(&p, &f);
        prop_assert_eq!(mobius_invert_lower(&p, &lf), f);
    }

    #[test]
    fn duality_of_lower_and_upper((p, seed) in arb_poset(10).prop_flat_map(|p| {
        let n = p.n_elements();
        (Just(p), arb_rationals(2 * n))
    })) {
        let n = p.n_elements();
        let (f, g) = seed.split_at(n);
        let zeros = vec![Rational::zero(); n];
        let lf = lower_op(&p, f);
        let ug = upper_op(&p, g, Some(&zeros)).unwrap();
        let dot = |a: &[Rational], b: &[Rational]| {
            a.iter().zip(b).map(|(x, y)| x.clone() * y.clone())
                .fold(Rational::zero(), |acc, v| acc + v)
        };
        prop_assert_eq!(dot(&lf, g), dot(f, &ug));
    }

    #[test]
    fn partial_order_laws(p in arb_poset(12)) {
        let n = p.n_elements();
        for x in 0..n {
            prop_assert!(p.leq(x, x));
            for y in 0..n {
                if x != y && p.leq(x, y) {
                    prop_assert!(!p.leq(y, x));
                }
                for z in 0..n {
                    if p.leq(x, y) && p.leq(y, z) {
                        prop_assert!(p.leq(x, z));
                    }
                }
            }
        }
    }

    #[test]
    fn covers_are_transitive_reduction(p in arb_poset(10)) {
        // children(x) must be exactly the minimal strict upper bounds:
        // rebuilding from the cover list reproduces the same order
        let n = p.n_elements();
        let mut covers = Vec::new();
        for x in 0..n {
            for &y in p.children(x) {
                covers.push((x, y));
                // no intermediate z with x < z < y
                for z in 0..n {
                    if z != x && z != y {
                        prop_assert!(!(p.leq(x, z) && p.leq(z, y)));
                    }
                }
            }
        }
        let rebuilt = Poset::build(n, &covers).unwrap();
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(p.leq(x, y), rebuilt.leq(x, y));
            }
        }
    }

    #[test]
    fn mobius_row_sums_vanish(p in arb_poset(10)) {
        // Σ_{x ≤ z ≤ y} μ(z, y) = 0 for x < y, = 1 for x = y
        let n = p.n_elements();
        let mob = Mobius::new(&p);
        for x in 0..n {
            for y in 0..n {
                if !p.leq(x, y) {
                    continue;
                }
                let mut total = Rational::zero();
                for z in 0..n {
                    if p.leq(x, z) && p.leq(z, y) {
                        total = total + mob.get(z, y).unwrap();
                    }
                }
                let expect = if x == y { Rational::from_ratio(1, 1) } else { Rational::zero() };
                prop_assert_eq!(total, expect);
            }
        }
    }

    #[test]
    fn upper_op_is_antitone_on_indicators(p in arb_poset(10)) {
        // F(x) = Σ_{y ⪰ x} f(y) with f ≥ 0 is antitone: x ≤ y ⇒ F(x) ≥ F(y)
        let n = p.n_elements();
        let f: Vec<Rational> = (0..n).map(|i| Rational::from_ratio((i as i64 % 5) + 1, 7)).collect();
        let zeros = vec![Rational::zero(); n];
        let big_f = upper_op(&p, &f, Some(&zeros)).unwrap();
        for x in 0..n {
            for y in 0..n {
                if p.leq(x, y) {
                    prop_assert!(big_f[x] >= big_f[y]);
                }
            }
        }
    }
}
