//! Vertex weightings and the weighted graph distance on trees, plus
//! the deep-past indicator weighting used by the displacement bound.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::wilson::SpanningTree;
use crate::Real;

use super::future_and_meet;

/// A nonnegative weight per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexWeighting<S = Real> {
    values: Vec<S>,
}

impl<S: Scalar> VertexWeighting<S> {
    pub fn from_values(values: Vec<S>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, value: S) -> Self {
        Self {
            values: vec![value; n],
        }
    }

    pub fn get(&self, v: u32) -> S {
        self.values[v as usize].clone()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }
}

/// Weighted graph distance `d_ω(u, v)`: on a tree the infimum over
/// connecting paths is attained by the unique tree path, so this is the
/// sum of `(ω(a) + ω(b)) / 2` over its edges.
pub fn weighted_distance<S: Scalar>(
    tree: &SpanningTree,
    weighting: &VertexWeighting<S>,
    u: u32,
    v: u32,
) -> Result<S> {
    weighted_distance_with(tree, |w| weighting.get(w), u, v)
}

/// [`weighted_distance`] with the weights supplied as a function, so
/// families of weightings (one per radius) need not be materialized.
pub fn weighted_distance_with<S: Scalar>(
    tree: &SpanningTree,
    weight: impl Fn(u32) -> S,
    u: u32,
    v: u32,
) -> Result<S> {
    let meet = future_and_meet(tree, u, v)?;
    let two = S::from_u32(2).expect("2 representable");
    let mut total = S::zero();
    for leg in [&meet.path_u, &meet.path_v] {
        for pair in leg.windows(2) {
            total = total + (weight(pair[0]) + weight(pair[1])) / two.clone();
        }
    }
    Ok(total)
}

/// Height of the oriented subtree below each vertex, in edges (leaves
/// have height 0). One pass in reverse BFS order.
pub fn subtree_heights(tree: &SpanningTree) -> Vec<u32> {
    let n = tree.vertex_count();
    let mut order = Vec::with_capacity(n);
    order.push(tree.root());
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        order.extend_from_slice(tree.children(v));
    }
    let mut height = vec![0u32; n];
    for &v in order.iter().rev() {
        if !tree.is_root(v) {
            let p = tree.parent(v) as usize;
            height[p] = height[p].max(height[v as usize] + 1);
        }
    }
    height
}

/// The deep-past indicator weighting: `ω_r(v) = 1` iff the past of `v`
/// reaches intrinsic depth `r` below it (subtree height at least `r`).
/// A wired root counts as having infinite past and always weighs 1.
///
/// The degenerate reading in which any nonempty truncated past (which
/// always contains `v` itself) triggers the weight would make the
/// weighting identically 1; the depth reading is the one that makes
/// `d_T <= 4r + 4 d_{ω_r}` informative.
pub fn omega_r(tree: &SpanningTree, r: u32) -> Result<VertexWeighting<Real>> {
    if r == 0 {
        return Err(Error::Config("weighting radius must be positive".into()));
    }
    let heights = subtree_heights(tree);
    let values = (0..tree.vertex_count() as u32)
        .map(|v| {
            if tree.is_root(v) && tree.wired_root {
                1.0
            } else {
                Real::from(u8::from(heights[v as usize] >= r))
            }
        })
        .collect();
    Ok(VertexWeighting::from_values(values))
}

/// `ω_r` weight of one vertex given precomputed subtree heights.
pub fn omega_r_weight(tree: &SpanningTree, heights: &[u32], r: u32, v: u32) -> Real {
    if tree.is_root(v) && tree.wired_root {
        1.0
    } else {
        Real::from(u8::from(heights[v as usize] >= r))
    }
}

#[cfg(test)]
mod tests {
    use super::super::tree_distance;
    use super::*;
    use crate::lattice::RngSeed;
    use crate::wilson::{wired_box_ust, CoordMap};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::Rng;

    fn fixture() -> SpanningTree {
        SpanningTree::from_parents(vec![0, 0, 0, 1, 1, 2, 5], 0, CoordMap::None, false).unwrap()
    }

    #[test]
    fn unit_weighting_recovers_tree_distance() {
        let t = fixture();
        let ones = VertexWeighting::constant(7, 1.0);
        for u in 0..7u32 {
            for v in 0..7u32 {
                let dw = weighted_distance(&t, &ones, u, v).unwrap();
                assert_eq!(dw, tree_distance(&t, u, v).unwrap() as f64);
            }
        }
    }

    #[test]
    fn zero_weighting_gives_zero() {
        let t = fixture();
        let zeros = VertexWeighting::constant(7, 0.0);
        assert_eq!(weighted_distance(&t, &zeros, 3, 6).unwrap(), 0.0);
    }

    #[test]
    fn fixture_weights_hand_summed() {
        // Weights 0,1,2,... by vertex id; path 3 -> 1 -> 0 -> 2 -> 5 -> 6.
        let t = fixture();
        let w = VertexWeighting::from_values((0..7).map(|i| i as f64).collect());
        let d = weighted_distance(&t, &w, 3, 6).unwrap();
        // Edges: (3,1) (1,0) (0,2) (2,5) (5,6) -> (3+1)/2+(1+0)/2+(0+2)/2+(2+5)/2+(5+6)/2
        let expected = (4.0 + 1.0 + 2.0 + 7.0 + 11.0) / 2.0;
        assert_eq!(d, expected);
        // Exact in rationals as well.
        let wq = VertexWeighting::from_values(
            (0..7)
                .map(|i| BigRational::from_integer(BigInt::from(i)))
                .collect(),
        );
        let dq = weighted_distance(&t, &wq, 3, 6).unwrap();
        assert_eq!(dq, BigRational::new(BigInt::from(25), BigInt::from(2)));
    }

    #[test]
    fn weighted_distance_symmetric() {
        let t = fixture();
        let w = VertexWeighting::from_values((0..7).map(|i| (i % 3) as f64).collect());
        for u in 0..7u32 {
            for v in 0..7u32 {
                let a = weighted_distance(&t, &w, u, v).unwrap();
                let b = weighted_distance(&t, &w, v, u).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn subtree_heights_fixture() {
        let t = fixture();
        assert_eq!(subtree_heights(&t), vec![3, 1, 2, 0, 0, 1, 0]);
    }

    #[test]
    fn omega_r_leaves_weigh_zero() {
        let t = fixture();
        let w = omega_r(&t, 1).unwrap();
        for leaf in [3u32, 4, 6] {
            assert_eq!(w.get(leaf), 0.0);
        }
        assert_eq!(w.get(2), 1.0);
    }

    #[test]
    fn omega_r_line_count() {
        // Line on m+1 vertices: exactly m + 1 - r vertices have subtree
        // height >= r (the root here is a real vertex, not wired).
        let m = 20usize;
        let line = SpanningTree::line_tree(m);
        for r in 1..=m as u32 {
            let w = omega_r(&line, r).unwrap();
            let ones = w.values().iter().filter(|&&x| x == 1.0).count();
            assert_eq!(ones, m + 1 - r as usize, "r={r}");
        }
    }

    #[test]
    fn omega_r_wired_root_weighs_one() {
        let t = wired_box_ust(2, 3, RngSeed::new(50)).unwrap();
        let w = omega_r(&t, 1000).unwrap();
        assert_eq!(w.get(t.root()), 1.0);
    }

    // d_T(u, v) <= 4r + 4 d_{ω_r}(u, v), deterministically, on sampled
    // wired trees. The weights are 0/1 so the f64 sums are dyadic and
    // the comparison is exact.
    #[test]
    fn weighted_metric_inequality_on_sampled_trees() {
        for trial in 0..5u64 {
            let t = wired_box_ust(3, 4, RngSeed::new(51).offset(trial)).unwrap();
            let heights = subtree_heights(&t);
            let mut rng = RngSeed::new(52).offset(trial).rng();
            let n = t.vertex_count() as u32;
            for _ in 0..500 {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                let r = rng.gen_range(1..=8u32);
                let d_t = tree_distance(&t, u, v).unwrap() as f64;
                let d_w =
                    weighted_distance_with(&t, |x| omega_r_weight(&t, &heights, r, x), u, v)
                        .unwrap();
                assert!(
                    d_t <= 4.0 * r as f64 + 4.0 * d_w,
                    "u={u} v={v} r={r}: d_T={d_t}, d_w={d_w}"
                );
            }
        }
    }

    #[test]
    fn omega_r_matches_pointwise_helper() {
        let t = wired_box_ust(2, 4, RngSeed::new(53)).unwrap();
        let heights = subtree_heights(&t);
        for r in [1u32, 2, 5] {
            let w = omega_r(&t, r).unwrap();
            for v in 0..t.vertex_count() as u32 {
                assert_eq!(w.get(v), omega_r_weight(&t, &heights, r, v));
            }
        }
    }
}
