//! Exact analytics on a sampled [`SpanningTree`]: intrinsic balls and
//! spheres, pasts, meeting points, effective resistance, geodesic
//! counts, weighted metrics, extrinsic geometry, and the good-path set
//! extraction used by the lower-bound probes.

mod electric;
mod weights;

pub use electric::{geodesic_counts, harmonic_resistance, resistance_to_sphere};
pub use weights::{
    omega_r, omega_r_weight, subtree_heights, weighted_distance, weighted_distance_with,
    VertexWeighting,
};

use crate::error::{Error, Result};
use crate::hashing::{FastMap, FastSet};
use crate::lattice::LatticePoint;
use crate::paths::Path;
use crate::wilson::SpanningTree;

/// BFS levels of the intrinsic ball `B(center, radius)`: `levels[k]` is
/// the sphere at distance exactly `k`. Trailing empty levels are
/// dropped when the tree is exhausted before `radius`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallDecomposition {
    pub center: u32,
    pub radius: u32,
    pub levels: Vec<Vec<u32>>,
}

impl BallDecomposition {
    /// Sphere at distance `k` (empty past the explored depth).
    pub fn sphere(&self, k: u32) -> &[u32] {
        self.levels
            .get(k as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Number of vertices in the ball.
    pub fn volume(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn contains_vertex(&self, v: u32) -> bool {
        self.levels.iter().any(|level| level.contains(&v))
    }

    /// All (vertex, depth) pairs.
    pub fn iter_with_depth(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(k, level)| level.iter().map(move |&v| (v, k as u32)))
    }
}

/// Intrinsic ball of radius `n` around `v` in the unoriented tree
/// metric, as BFS levels.
pub fn ball(tree: &SpanningTree, v: u32, n: u32) -> Result<BallDecomposition> {
    if !tree.contains(v) {
        return Err(Error::UnknownVertex(v));
    }
    let mut visited: FastSet<u32> = FastSet::default();
    visited.insert(v);
    let mut levels = vec![vec![v]];
    for _ in 0..n {
        let mut next = Vec::new();
        for &u in levels.last().unwrap() {
            if !tree.is_root(u) {
                let p = tree.parent(u);
                if visited.insert(p) {
                    next.push(p);
                }
            }
            for &c in tree.children(u) {
                if visited.insert(c) {
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    Ok(BallDecomposition {
        center: v,
        radius: n,
        levels,
    })
}

/// The past of `v`: the oriented subtree below it (including `v`),
/// optionally truncated to intrinsic radius `n`. Undefined at the root,
/// which stands in for infinity.
pub fn past(tree: &SpanningTree, v: u32, n: Option<u32>) -> Result<Vec<u32>> {
    if !tree.contains(v) {
        return Err(Error::UnknownVertex(v));
    }
    if tree.is_root(v) {
        return Err(Error::RootHasNoPast);
    }
    let mut out = vec![v];
    let mut frontier = vec![v];
    let mut depth = 0u32;
    while !frontier.is_empty() {
        if let Some(cap) = n {
            if depth == cap {
                break;
            }
        }
        depth += 1;
        let mut next = Vec::new();
        for &u in &frontier {
            next.extend_from_slice(tree.children(u));
        }
        out.extend_from_slice(&next);
        frontier = next;
    }
    Ok(out)
}

/// Root-directed paths from `u` and `v` up to the first vertex their
/// futures share, and that meeting vertex. Both paths include their
/// endpoint and the meet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeetResult {
    pub path_u: Vec<u32>,
    pub path_v: Vec<u32>,
    pub meet: u32,
}

impl MeetResult {
    /// Intrinsic distance between the two query vertices.
    pub fn distance(&self) -> u32 {
        (self.path_u.len() + self.path_v.len() - 2) as u32
    }
}

/// Walk from `v` to the root, inclusive.
pub fn root_path(tree: &SpanningTree, v: u32) -> Vec<u32> {
    let mut path = vec![v];
    let mut u = v;
    while !tree.is_root(u) {
        u = tree.parent(u);
        path.push(u);
    }
    path
}

/// Futures of `u` and `v` and the unique vertex where they first meet.
pub fn future_and_meet(tree: &SpanningTree, u: u32, v: u32) -> Result<MeetResult> {
    if !tree.contains(u) {
        return Err(Error::UnknownVertex(u));
    }
    if !tree.contains(v) {
        return Err(Error::UnknownVertex(v));
    }
    let up = root_path(tree, u);
    let mut index_of: FastMap<u32, usize> = FastMap::default();
    for (i, &w) in up.iter().enumerate() {
        index_of.insert(w, i);
    }
    let mut path_v = Vec::new();
    let mut w = v;
    let meet = loop {
        path_v.push(w);
        if let Some(&i) = index_of.get(&w) {
            break i;
        }
        w = tree.parent(w);
    };
    Ok(MeetResult {
        path_u: up[..=meet].to_vec(),
        meet: up[meet],
        path_v,
    })
}

/// Intrinsic tree distance `d_T(u, v)`.
pub fn tree_distance(tree: &SpanningTree, u: u32, v: u32) -> Result<u32> {
    Ok(future_and_meet(tree, u, v)?.distance())
}

/// Extrinsic size of an intrinsic ball. The containment radius is the
/// smallest `R` with `B(v, n) ⊆ Λ(coords(v), R)`, which is exactly the
/// maximum sup-norm distance from the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtrinsicStats {
    pub max_sup_norm: u32,
    pub containment_radius: u32,
    /// False when the ball contains a vertex without coordinates (the
    /// wired supernode); the statistic is then boundary-contaminated.
    pub complete: bool,
}

/// Maximum sup-norm displacement from `v` over the intrinsic ball
/// `B(v, n)`. Requires `v` to carry coordinates.
pub fn extrinsic_stats(tree: &SpanningTree, v: u32, n: u32) -> Result<ExtrinsicStats> {
    let center = tree.coords_of(v).ok_or(Error::MissingCoords)?;
    let b = ball(tree, v, n)?;
    let mut max_norm = 0u32;
    let mut complete = true;
    for (u, _) in b.iter_with_depth() {
        match tree.coords_of(u) {
            Some(p) => max_norm = max_norm.max(p.sub(&center).sup_norm()),
            None => complete = false,
        }
    }
    Ok(ExtrinsicStats {
        max_sup_norm: max_norm,
        containment_radius: max_norm,
        complete,
    })
}

/// Vertices of the tree whose coordinates lie in `Λ(center, radius)`.
/// Box-indexed trees intersect the boxes directly; explicit embeddings
/// fall back to a scan.
pub fn vertices_in_box(tree: &SpanningTree, center: &LatticePoint, radius: u32) -> Vec<u32> {
    match tree.coord_map() {
        crate::wilson::CoordMap::Box { d, l } => {
            let d = *d as usize;
            let l = *l as i32;
            let r = radius as i32;
            let mut out = Vec::new();
            let mut cursor = vec![0i32; d];
            let lo: Vec<i32> = (0..d).map(|i| (center.coord(i) - r).max(-l)).collect();
            let hi: Vec<i32> = (0..d).map(|i| (center.coord(i) + r).min(l)).collect();
            if lo.iter().zip(&hi).any(|(a, b)| a > b) {
                return out;
            }
            cursor.copy_from_slice(&lo);
            loop {
                let p = LatticePoint::new(&cursor).unwrap();
                out.push(tree.vertex_of_point(&p).unwrap());
                let mut axis = 0;
                loop {
                    if axis == d {
                        return out;
                    }
                    cursor[axis] += 1;
                    if cursor[axis] <= hi[axis] {
                        break;
                    }
                    cursor[axis] = lo[axis];
                    axis += 1;
                }
            }
        }
        _ => (0..tree.vertex_count() as u32)
            .filter(|&v| {
                tree.coords_of(v)
                    .is_some_and(|p| p.sub(center).sup_norm() <= radius)
            })
            .collect(),
    }
}

/// The length threshold for the good-path set: `r^2 / (log r)^{1/3}`
/// with natural log, floored at 1. Requires `r >= 3` so the log is
/// safely above zero.
pub fn m_set_length_threshold(r: u32) -> Result<usize> {
    if r < 3 {
        return Err(Error::Config("good-path set needs r >= 3".into()));
    }
    let rf = r as f64;
    Ok(((rf * rf / rf.ln().powf(1.0 / 3.0)).floor() as usize).max(1))
}

/// Extract the set of vertices `y` in `Λ(coords(x), 3r)` whose tree
/// path to the meeting point with the origin's future stays in the
/// box, is short enough, and passes the supplied goodness classifier.
///
/// The classifier receives the path oriented from `y` toward the
/// meeting vertex. Paths through the wired supernode never qualify
/// (they leave every finite box).
pub fn extract_m_set(
    tree: &SpanningTree,
    x: u32,
    r: u32,
    classifier: impl Fn(&Path) -> bool,
) -> Result<Vec<u32>> {
    let center = tree.coords_of(x).ok_or(Error::MissingCoords)?;
    let max_len = m_set_length_threshold(r)?;
    let d = center.dim();
    let origin = tree
        .vertex_of_point(&LatticePoint::origin(d))
        .ok_or(Error::MissingCoords)?;

    let mut origin_future: FastSet<u32> = FastSet::default();
    for w in root_path(tree, origin) {
        origin_future.insert(w);
    }

    let inside =
        |u: u32| -> bool { tree.coords_of(u).is_some_and(|p| p.sub(&center).sup_norm() <= 3 * r) };

    let mut out = Vec::new();
    'candidates: for y in vertices_in_box(tree, &center, 3 * r) {
        let mut path_points = Vec::new();
        let mut u = y;
        loop {
            if !inside(u) {
                continue 'candidates;
            }
            path_points.push(tree.coords_of(u).unwrap());
            if path_points.len() > max_len + 1 {
                continue 'candidates;
            }
            if origin_future.contains(&u) {
                break;
            }
            u = tree.parent(u);
        }
        let path = Path::from_adjacent_points(path_points);
        if classifier(&path) {
            out.push(y);
        }
    }
    Ok(out)
}
