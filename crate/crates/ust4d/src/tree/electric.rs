//! Electrical quantities on trees with unit edge resistances: exact
//! effective resistance to an intrinsic sphere by leaf-to-root
//! conductance recursion, an independent full harmonic solve, and the
//! geodesic counts that bound the conductance.
//!
//! The kernels are generic over [`Scalar`] so that routine use runs in
//! `f64` while fixtures and exact batteries run in rational arithmetic.

use num_traits::{Signed, ToPrimitive};

use super::ball;
use crate::error::{Error, Result};
use crate::hashing::FastMap;
use crate::scalar::{solve_dense, Scalar};
use crate::wilson::SpanningTree;

/// Exact effective resistance between `v` and the identified sphere
/// `∂B(v, n)`, computed inside the ball by the series/parallel
/// recursion: child conductances add, a unit edge composes in series
/// as `c -> c / (1 + c)`, and sphere vertices short to the terminal.
///
/// In a tree every current path from `v` to the sphere lies in the
/// ball, so no generality is lost by truncating there.
pub fn resistance_to_sphere<S: Scalar>(tree: &SpanningTree, v: u32, n: u32) -> Result<S> {
    if n == 0 {
        return Err(Error::EmptySphere {
            center: v,
            radius: 0,
        });
    }
    let b = ball(tree, v, n)?;
    if b.sphere(n).is_empty() {
        return Err(Error::EmptySphere {
            center: v,
            radius: n,
        });
    }
    // BFS orientation away from the center: the BFS parent of a ball
    // vertex is its unique neighbor one level closer to v.
    let mut bfs_parent: FastMap<u32, u32> = FastMap::default();
    let mut level_of: FastMap<u32, u32> = FastMap::default();
    for (u, k) in b.iter_with_depth() {
        level_of.insert(u, k);
    }
    for (u, k) in b.iter_with_depth() {
        if k == 0 {
            continue;
        }
        let candidates = tree
            .children(u)
            .iter()
            .copied()
            .chain((!tree.is_root(u)).then(|| tree.parent(u)));
        for w in candidates {
            if level_of.get(&w) == Some(&(k - 1)) {
                bfs_parent.insert(u, w);
                break;
            }
        }
    }
    // Accumulate conductances level by level, deepest first.
    let mut acc: FastMap<u32, S> = FastMap::default();
    for k in (1..=n.min(b.levels.len() as u32 - 1)).rev() {
        for &u in b.sphere(k) {
            let f = if k == n {
                // Unit edge straight into the shorted terminal.
                S::one()
            } else {
                match acc.remove(&u) {
                    None => continue, // dead end, carries no current
                    Some(c) => {
                        if c.is_zero() {
                            continue;
                        }
                        c.clone() / (S::one() + c)
                    }
                }
            };
            let p = bfs_parent[&u];
            let entry = acc.entry(p).or_insert_with(S::zero);
            *entry = entry.clone() + f;
        }
    }
    let total = acc.remove(&v).unwrap_or_else(S::zero);
    if total.is_zero() {
        return Err(Error::EmptySphere {
            center: v,
            radius: n,
        });
    }
    Ok(S::one() / total)
}

/// Independent oracle for [`resistance_to_sphere`]: solve the full
/// harmonic system on the ball (potential 1 at `v`, 0 on the sphere,
/// harmonic elsewhere) by Gaussian elimination and return one over the
/// outflowing current. Dense; intended for fixtures.
pub fn harmonic_resistance<S>(tree: &SpanningTree, v: u32, n: u32) -> Result<S>
where
    S: Scalar + Signed + ToPrimitive,
{
    if n == 0 {
        return Err(Error::EmptySphere {
            center: v,
            radius: 0,
        });
    }
    let b = ball(tree, v, n)?;
    if b.sphere(n).is_empty() {
        return Err(Error::EmptySphere {
            center: v,
            radius: n,
        });
    }
    // Unknowns: inner vertices other than v. Sphere vertices are fixed
    // at 0, v at 1. Inner vertices have all tree neighbors inside the
    // ball, so the system is closed.
    let mut index: FastMap<u32, usize> = FastMap::default();
    let mut level_of: FastMap<u32, u32> = FastMap::default();
    for (u, k) in b.iter_with_depth() {
        level_of.insert(u, k);
        if k > 0 && k < n {
            let next = index.len();
            index.insert(u, next);
        }
    }
    let m = index.len();
    let mut a = vec![vec![S::zero(); m]; m];
    let mut rhs = vec![S::zero(); m];
    for (&u, &row) in &index {
        let neighbors: Vec<u32> = tree
            .children(u)
            .iter()
            .copied()
            .chain((!tree.is_root(u)).then(|| tree.parent(u)))
            .filter(|w| level_of.contains_key(w))
            .collect();
        a[row][row] = crate::scalar::from_count::<S>(neighbors.len());
        for w in neighbors {
            if w == v {
                rhs[row] = rhs[row].clone() + S::one();
            } else if let Some(&col) = index.get(&w) {
                a[row][col] = a[row][col].clone() - S::one();
            }
            // Sphere vertices contribute potential 0.
        }
    }
    let (phi, _) = solve_dense(a, rhs)?;
    // Current out of v: sum over neighbors of (1 - phi).
    let mut current = S::zero();
    for w in tree
        .children(v)
        .iter()
        .copied()
        .chain((!tree.is_root(v)).then(|| tree.parent(v)))
    {
        let Some(&k) = level_of.get(&w) else {
            continue;
        };
        let phi_w = if k == n {
            S::zero()
        } else {
            phi[index[&w]].clone()
        };
        current = current + (S::one() - phi_w);
    }
    if current.is_zero() || current < S::zero() {
        return Err(Error::IllConditioned { pivot_ratio: 0.0 });
    }
    Ok(S::one() / current)
}

/// `N_v(n, k)` for `k = 1..=n`: the number of vertices at distance
/// exactly `k` from `v` that lie on a geodesic from `v` to the sphere
/// `∂B(v, n)`, i.e. whose ball subtree reaches depth `n`. Computed by
/// one downward sweep.
pub fn geodesic_counts(tree: &SpanningTree, v: u32, n: u32) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::EmptySphere {
            center: v,
            radius: 0,
        });
    }
    let b = ball(tree, v, n)?;
    if b.sphere(n).is_empty() {
        return Err(Error::EmptySphere {
            center: v,
            radius: n,
        });
    }
    let mut level_of: FastMap<u32, u32> = FastMap::default();
    for (u, k) in b.iter_with_depth() {
        level_of.insert(u, k);
    }
    let mut reaches: FastMap<u32, ()> = FastMap::default();
    let mut counts = vec![0u64; n as usize];
    for k in (1..=n).rev() {
        for &u in b.sphere(k) {
            let hit = k == n || {
                // Did any ball neighbor one level deeper reach depth n?
                tree.children(u)
                    .iter()
                    .copied()
                    .chain((!tree.is_root(u)).then(|| tree.parent(u)))
                    .any(|w| level_of.get(&w) == Some(&(k + 1)) && reaches.contains_key(&w))
            };
            if hit {
                reaches.insert(u, ());
                counts[k as usize - 1] += 1;
            }
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::super::tests::random_tree;
    use super::*;
    use crate::lattice::RngSeed;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::Rng;

    fn big(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn line_resistance_is_exactly_n() {
        let line = SpanningTree::line_tree(300);
        for n in [1u32, 2, 17, 128, 256] {
            let r: BigRational = resistance_to_sphere(&line, 0, n).unwrap();
            assert_eq!(r, big(n as i64));
        }
    }

    #[test]
    fn binary_tree_resistance_closed_form() {
        // Root to depth-n sphere of the full binary tree: 1 - 2^{-n}.
        for n in [1u32, 3, 8, 14, 20] {
            let t = SpanningTree::full_binary_tree(n);
            let r: f64 = resistance_to_sphere(&t, 0, n).unwrap();
            let expected = 1.0 - 0.5f64.powi(n as i32);
            assert!((r - expected).abs() < 1e-10, "n={n}: {r} vs {expected}");

            let exact: BigRational = resistance_to_sphere(&t, 0, n).unwrap();
            let expected_exact = big(1) - big(1) / big(1i64 << n);
            assert_eq!(exact, expected_exact);
        }
    }

    #[test]
    fn recursion_matches_harmonic_solve_on_random_fixtures() {
        for trial in 0..50u64 {
            let size = 10 + (trial as usize * 7) % 41; // up to 50 vertices
            let t = random_tree(size, RngSeed::new(40).offset(trial));
            let mut rng = RngSeed::new(41).offset(trial).rng();
            let v = rng.gen_range(0..size) as u32;
            let max_n = ball(&t, v, u32::MAX.min(64)).unwrap().levels.len() as u32 - 1;
            if max_n == 0 {
                continue;
            }
            let n = rng.gen_range(1..=max_n);
            let fast: f64 = resistance_to_sphere(&t, v, n).unwrap();
            let oracle: f64 = harmonic_resistance(&t, v, n).unwrap();
            assert!(
                (fast - oracle).abs() <= 1e-10 * oracle.max(1.0),
                "size={size} v={v} n={n}: {fast} vs {oracle}"
            );
            // Exact agreement in rational arithmetic.
            let fast_q: BigRational = resistance_to_sphere(&t, v, n).unwrap();
            let oracle_q: BigRational = harmonic_resistance(&t, v, n).unwrap();
            assert_eq!(fast_q, oracle_q);
        }
    }

    #[test]
    fn resistance_bounded_by_distance_and_monotone() {
        for trial in 0..10u64 {
            let t = random_tree(200, RngSeed::new(42).offset(trial));
            let reach = ball(&t, 0, 64).unwrap().levels.len() as u32 - 1;
            let mut prev = 0.0f64;
            for n in 1..=reach {
                let r: f64 = resistance_to_sphere(&t, 0, n).unwrap();
                assert!(r <= n as f64 + 1e-12, "R={r} > n={n}");
                assert!(r >= prev - 1e-12, "Rayleigh monotonicity violated");
                prev = r;
            }
        }
    }

    #[test]
    fn empty_sphere_is_an_error() {
        let line = SpanningTree::line_tree(5);
        assert!(matches!(
            resistance_to_sphere::<f64>(&line, 0, 10),
            Err(Error::EmptySphere { .. })
        ));
        assert!(matches!(
            geodesic_counts(&line, 0, 10),
            Err(Error::EmptySphere { .. })
        ));
    }

    #[test]
    fn geodesic_counts_line_and_binary() {
        let line = SpanningTree::line_tree(40);
        assert_eq!(geodesic_counts(&line, 0, 30).unwrap(), vec![1u64; 30]);

        let bin = SpanningTree::full_binary_tree(6);
        let counts = geodesic_counts(&bin, 0, 5).unwrap();
        let expected: Vec<u64> = (1..=5).map(|k| 1u64 << k).collect();
        assert_eq!(counts, expected);
    }

    #[test]
    fn geodesic_counts_basic_invariants() {
        for trial in 0..20u64 {
            let t = random_tree(150, RngSeed::new(43).offset(trial));
            let reach = ball(&t, 0, 64).unwrap().levels.len() as u32 - 1;
            for n in 1..=reach {
                let counts = geodesic_counts(&t, 0, n).unwrap();
                assert!(counts.iter().all(|&c| c >= 1));
                assert_eq!(
                    counts[n as usize - 1],
                    ball(&t, 0, n).unwrap().sphere(n).len() as u64
                );
            }
        }
    }

    // C_eff(v <-> sphere) <= N_v(n,k) / k, exactly, in rationals.
    #[test]
    fn conductance_bounded_by_geodesic_counts() {
        for trial in 0..15u64 {
            let t = random_tree(120, RngSeed::new(44).offset(trial));
            let reach = ball(&t, 0, 32).unwrap().levels.len() as u32 - 1;
            for n in 1..=reach {
                let r: BigRational = resistance_to_sphere(&t, 0, n).unwrap();
                let c_eff = big(1) / r;
                let counts = geodesic_counts(&t, 0, n).unwrap();
                for k in 1..=n {
                    let bound = big(counts[k as usize - 1] as i64) / big(k as i64);
                    assert!(c_eff <= bound, "n={n} k={k}: {c_eff} > {bound}");
                }
            }
        }
    }
}
