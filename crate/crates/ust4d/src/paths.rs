//! Lattice paths, chronological loop erasure with full index
//! bookkeeping, cut times, and finite-horizon surrogates for the
//! infinite loop erasure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::FastMap;
use crate::lattice::{sample_srw, LatticePoint, RngSeed};

/// An adjacency-consecutive sequence of lattice points. A path of
/// length `m` has `m + 1` points; a single point is a length-0 path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    points: Vec<LatticePoint>,
}

impl Path {
    /// Validating constructor: nonempty, equal dimensions, consecutive
    /// points at `l_1` distance exactly 1.
    pub fn new(points: Vec<LatticePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidPath("path must be nonempty".into()));
        }
        let d = points[0].dim();
        for w in points.windows(2) {
            if w[1].dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: w[1].dim(),
                });
            }
            if w[0].sub(&w[1]).l1_norm() != 1 {
                return Err(Error::InvalidPath(format!(
                    "points {:?} and {:?} are not lattice-adjacent",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { points })
    }

    /// Construction from points already known to be adjacent (walk
    /// generators). Adjacency is checked only in debug builds.
    pub(crate) fn from_adjacent_points(points: Vec<LatticePoint>) -> Self {
        debug_assert!(!points.is_empty());
        debug_assert!(points.windows(2).all(|w| w[0].sub(&w[1]).l1_norm() == 1));
        Self { points }
    }

    pub fn single(p: LatticePoint) -> Self {
        Self { points: vec![p] }
    }

    /// Path length: number of edges (one less than the point count).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<LatticePoint> {
        self.points
    }

    pub fn start(&self) -> LatticePoint {
        self.points[0]
    }

    pub fn end(&self) -> LatticePoint {
        *self.points.last().unwrap()
    }

    /// The path stopped at index `b` (inclusive).
    pub fn prefix(&self, b: usize) -> Path {
        Path {
            points: self.points[..=b].to_vec(),
        }
    }

    /// The sub-path on indices `t..=len` (its first point is `points[t]`).
    pub fn suffix_from(&self, t: usize) -> Path {
        Path {
            points: self.points[t..].to_vec(),
        }
    }

    /// No repeated points.
    pub fn is_simple(&self) -> bool {
        let mut seen: FastMap<LatticePoint, ()> = FastMap::default();
        self.points.iter().all(|p| seen.insert(*p, ()).is_none())
    }

    /// Maximum `l_infinity` distance from the start over the whole path.
    pub fn max_sup_norm_from_start(&self) -> u32 {
        let s = self.start();
        self.points
            .iter()
            .map(|p| p.sub(&s).sup_norm())
            .max()
            .unwrap()
    }
}

/// Result of loop-erasing a path: the erased (simple) path together
/// with the strictly increasing index sequence it was read off from,
/// so `erased[i] == input[ell[i]]` and `ell[0] == 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopErasureRecord {
    pub erased: Path,
    pub ell: Vec<usize>,
}

impl LoopErasureRecord {
    /// Number of points of the erased path surviving from the first
    /// `m` steps of the input: `max { k : ell[k] <= m }`. Inverse to
    /// `ell` in the sense that `ell[n] <= m` iff `rho(m) >= n`.
    pub fn rho(&self, m: usize) -> usize {
        assert!(
            self.ell[0] <= m,
            "rho index must be within the input path length"
        );
        // ell is strictly increasing; binary search for the last entry <= m.
        match self.ell.binary_search(&m) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }
}

/// Chronological loop erasure via the index recursion
/// `ell[0] = 0`, `ell[k+1] = 1 + max { j : input[j] == input[ell[k]] }`,
/// terminating when that maximum is the final index.
pub fn erase_loops(path: &Path) -> LoopErasureRecord {
    let points = path.points();
    let m = path.len();
    let mut last: FastMap<LatticePoint, usize> = FastMap::default();
    last.reserve(points.len());
    for (i, p) in points.iter().enumerate() {
        last.insert(*p, i);
    }
    let mut ell = Vec::new();
    let mut erased = Vec::new();
    let mut cur = 0usize;
    loop {
        ell.push(cur);
        erased.push(points[cur]);
        let k = last[&points[cur]];
        if k == m {
            break;
        }
        cur = k + 1;
    }
    LoopErasureRecord {
        erased: Path::from_adjacent_points(erased),
        ell,
    }
}

/// Streaming loop erasure: maintains the erased path as a stack while
/// the input is fed point by point. Produces exactly the same record as
/// [`erase_loops`]; the equivalence is pinned by tests.
#[derive(Debug, Default)]
pub struct IncrementalErasure {
    stack: Vec<(LatticePoint, usize)>,
    position: FastMap<LatticePoint, usize>,
    fed: usize,
}

impl IncrementalErasure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, p: LatticePoint) {
        if let Some(&j) = self.position.get(&p) {
            for (q, _) in self.stack.drain(j + 1..) {
                self.position.remove(&q);
            }
        } else {
            self.position.insert(p, self.stack.len());
            self.stack.push((p, self.fed));
        }
        self.fed += 1;
    }

    pub fn finish(self) -> LoopErasureRecord {
        let mut erased = Vec::with_capacity(self.stack.len());
        let mut ell = Vec::with_capacity(self.stack.len());
        for (p, i) in self.stack {
            erased.push(p);
            ell.push(i);
        }
        LoopErasureRecord {
            erased: Path::from_adjacent_points(erased),
            ell,
        }
    }
}

/// Loop erasure by the streaming route.
pub fn erase_loops_incremental(path: &Path) -> LoopErasureRecord {
    let mut inc = IncrementalErasure::new();
    for &p in path.points() {
        inc.push(p);
    }
    inc.finish()
}

/// All cut times of a finite path, ascending: indices `t` such that
/// `{path[0..=t]}` and `{path[t+1..]}` are disjoint point sets. The
/// final index always qualifies (empty remaining suffix).
pub fn cut_times(path: &Path) -> Vec<usize> {
    let points = path.points();
    let mut last: FastMap<LatticePoint, usize> = FastMap::default();
    last.reserve(points.len());
    for (i, p) in points.iter().enumerate() {
        last.insert(*p, i);
    }
    let mut out = Vec::new();
    let mut running_max = 0usize;
    for (t, p) in points.iter().enumerate() {
        running_max = running_max.max(last[p]);
        if running_max == t {
            out.push(t);
        }
    }
    out
}

/// Largest non-vacuous cut time `t < path.len()` (the vacuous final
/// index carries no escape evidence), if any.
fn last_proper_cut_time(path: &Path) -> Option<usize> {
    cut_times(path)
        .into_iter()
        .filter(|&t| t < path.len())
        .next_back()
}

/// The part of the eventual infinite loop erasure contributed by the
/// first `n` steps of `walk`: `erase_loops(walk).erased` truncated at
/// `rho(n)`.
///
/// `certified` is true when the walk exhibits a cut time at or after
/// `n`, in which case the returned prefix is expected to survive any
/// extension of the walk. For `n < len` only cut times with a nonempty
/// escape suffix count; for `n == len` the final index is accepted as
/// there is nothing left to witness. Certification is evidence, not
/// proof: a later excursion can in principle revisit the erased region.
pub fn le_prefix_certified(walk: &Path, n: usize) -> (Path, bool) {
    assert!(n <= walk.len(), "prefix index exceeds walk length");
    let record = erase_loops(walk);
    let r = record.rho(n);
    let prefix = record.erased.prefix(r);
    let certified = if n == walk.len() {
        // The final index is always a cut time of the finite path.
        true
    } else {
        last_proper_cut_time(walk).is_some_and(|t| t >= n)
    };
    (prefix, certified)
}

/// Sample a loop-erased random walk prefix of exactly `n` steps in
/// dimension `d`, extending the underlying walk until the prefix is
/// certified stable (a cut time after the `n`-th surviving point).
///
/// Deterministic in `seed`: each round replays the same stream with a
/// longer horizon, so the walk is extended rather than resampled.
pub fn sample_certified_lerw_prefix(d: usize, n: usize, seed: RngSeed) -> Result<Path> {
    let start = LatticePoint::origin(d);
    let base = ((2.0 * n as f64 * (n.max(2) as f64).ln().powf(1.0 / 3.0)) as usize).max(4 * n);
    for round in 1..=12u32 {
        let walk = sample_srw(start, base * round as usize, seed);
        let record = erase_loops(&walk);
        if record.erased.len() < n {
            continue;
        }
        let ell_n = record.ell[n];
        if last_proper_cut_time(&walk).is_some_and(|t| t >= ell_n) {
            return Ok(record.erased.prefix(n));
        }
    }
    Err(Error::InvalidPath(format!(
        "no certified loop-erased prefix of length {n} within the walk budget"
    )))
}

/// Raw loop-erasure of a fixed-length walk, for callers that manage
/// certification themselves.
pub fn lerw_of_walk(d: usize, walk_steps: usize, seed: RngSeed) -> LoopErasureRecord {
    erase_loops(&sample_srw(LatticePoint::origin(d), walk_steps, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::neighbors;

    fn p(coords: &[i32]) -> LatticePoint {
        LatticePoint::new(coords).unwrap()
    }

    /// Definitional oracle: repeatedly delete the first completed loop.
    fn naive_loop_erase(points: &[LatticePoint]) -> Vec<LatticePoint> {
        let mut pts = points.to_vec();
        'outer: loop {
            let mut seen: FastMap<LatticePoint, usize> = FastMap::default();
            for (i, q) in pts.iter().enumerate() {
                if let Some(&j) = seen.get(q) {
                    pts.drain(j + 1..=i);
                    continue 'outer;
                }
                seen.insert(*q, i);
            }
            return pts;
        }
    }

    fn four_point_zigzag() -> Path {
        // (0, e1, 0, e2)
        Path::new(vec![p(&[0, 0]), p(&[1, 0]), p(&[0, 0]), p(&[0, 1])]).unwrap()
    }

    #[test]
    fn erase_simple_path_is_identity() {
        let path = Path::new(vec![p(&[0]), p(&[1]), p(&[2]), p(&[3])]).unwrap();
        let rec = erase_loops(&path);
        assert_eq!(rec.erased, path);
        assert_eq!(rec.ell, vec![0, 1, 2, 3]);
    }

    #[test]
    fn erase_hand_trace() {
        let rec = erase_loops(&four_point_zigzag());
        assert_eq!(rec.erased.points(), &[p(&[0, 0]), p(&[0, 1])]);
        assert_eq!(rec.ell, vec![0, 3]);
    }

    #[test]
    fn erase_matches_naive_oracle_on_random_walks() {
        for d in [2usize, 4] {
            for trial in 0..1000u64 {
                let walk = sample_srw(
                    LatticePoint::origin(d),
                    100,
                    RngSeed::new(500 + d as u64).offset(trial),
                );
                let rec = erase_loops(&walk);
                let oracle = naive_loop_erase(walk.points());
                assert_eq!(rec.erased.points(), &oracle[..], "d={d} trial={trial}");
                // Index bookkeeping is consistent with the erased path.
                for (k, &i) in rec.ell.iter().enumerate() {
                    assert_eq!(walk.points()[i], rec.erased.points()[k]);
                }
                assert!(rec.ell.windows(2).all(|w| w[0] < w[1]));
                // Streaming erasure agrees entry for entry.
                assert_eq!(erase_loops_incremental(&walk), rec);
            }
        }
    }

    #[test]
    fn erase_is_idempotent_on_simple_paths() {
        for trial in 0..100u64 {
            let walk = sample_srw(LatticePoint::origin(4), 60, RngSeed::new(7).offset(trial));
            let once = erase_loops(&walk).erased;
            let twice = erase_loops(&once);
            assert_eq!(twice.erased, once);
            assert_eq!(twice.ell, (0..=once.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn rho_on_simple_path_is_identity() {
        let path = Path::new(vec![p(&[0]), p(&[1]), p(&[2])]).unwrap();
        let rec = erase_loops(&path);
        for m in 0..=2 {
            assert_eq!(rec.rho(m), m);
        }
    }

    #[test]
    fn rho_hand_trace() {
        let rec = erase_loops(&four_point_zigzag());
        assert_eq!(rec.rho(2), 0);
        assert_eq!(rec.rho(3), 1);
    }

    #[test]
    fn ell_rho_inversion_exhaustive() {
        for trial in 0..200u64 {
            let walk = sample_srw(LatticePoint::origin(4), 80, RngSeed::new(8).offset(trial));
            let rec = erase_loops(&walk);
            for n in 0..rec.ell.len() {
                for m in 0..=walk.len() {
                    assert_eq!(
                        rec.ell[n] <= m,
                        rec.rho(m) >= n,
                        "inversion failed at n={n} m={m}"
                    );
                }
            }
            // rho is nondecreasing and exhausts the erased path.
            let mut prev = rec.rho(0);
            for m in 1..=walk.len() {
                let r = rec.rho(m);
                assert!(r >= prev);
                prev = r;
            }
            assert_eq!(rec.rho(walk.len()), rec.erased.len());
        }
    }

    #[test]
    fn cut_times_monotone_path() {
        let path = Path::new((0..6).map(|i| p(&[i])).collect()).unwrap();
        assert_eq!(cut_times(&path), vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn cut_times_hand_trace() {
        assert_eq!(cut_times(&four_point_zigzag()), vec![2, 3]);
    }

    #[test]
    fn cut_time_concatenation_identity() {
        for trial in 0..500u64 {
            let walk = sample_srw(LatticePoint::origin(4), 100, RngSeed::new(9).offset(trial));
            let full = erase_loops(&walk).erased;
            for t in cut_times(&walk) {
                if t == walk.len() {
                    continue;
                }
                let head = erase_loops(&walk.prefix(t)).erased;
                let tail = erase_loops(&walk.suffix_from(t + 1)).erased;
                let mut glued = head.points().to_vec();
                glued.extend_from_slice(tail.points());
                assert_eq!(full.points(), &glued[..], "cut at t={t} trial={trial}");
            }
        }
    }

    #[test]
    fn le_prefix_full_length_and_monotone() {
        let walk = sample_srw(LatticePoint::origin(4), 50, RngSeed::new(10));
        let (prefix, certified) = le_prefix_certified(&walk, walk.len());
        assert_eq!(prefix, erase_loops(&walk).erased);
        assert!(certified);

        let line = Path::new((0..10).map(|i| p(&[i])).collect()).unwrap();
        for n in 0..=line.len() {
            let (pre, cert) = le_prefix_certified(&line, n);
            assert!(cert);
            assert_eq!(pre.points(), &line.points()[..=n]);
        }
    }

    // Whenever a prefix is certified, extending the same walk (same
    // stream, longer horizon) must leave the returned prefix unchanged.
    #[test]
    fn le_prefix_stable_under_extension_when_certified() {
        let n = 100usize;
        let base_len = 30_000usize;
        let mut certified_count = 0;
        for trial in 0..50u64 {
            let seed = RngSeed::new(606).offset(trial);
            let walk = sample_srw(LatticePoint::origin(4), base_len, seed);
            let (prefix, certified) = le_prefix_certified(&walk, n);
            if !certified {
                continue;
            }
            certified_count += 1;
            let longer = sample_srw(LatticePoint::origin(4), base_len + 10_000, seed);
            assert_eq!(&longer.points()[..=base_len], walk.points());
            let (prefix2, _) = le_prefix_certified(&longer, n);
            assert_eq!(prefix, prefix2, "prefix changed under extension, trial {trial}");
        }
        assert!(certified_count >= 45, "only {certified_count}/50 certified");
    }

    #[test]
    fn certified_lerw_prefix_has_requested_length() {
        for trial in 0..20u64 {
            let pre = sample_certified_lerw_prefix(4, 64, RngSeed::new(11).offset(trial)).unwrap();
            assert_eq!(pre.len(), 64);
            assert!(pre.is_simple());
            assert_eq!(pre.start(), LatticePoint::origin(4));
        }
    }

    #[test]
    fn path_validation() {
        assert!(Path::new(vec![]).is_err());
        assert!(Path::new(vec![p(&[0, 0]), p(&[1, 1])]).is_err());
        assert!(Path::new(vec![p(&[0, 0]), p(&[1, 0])]).is_ok());
        let single = Path::single(p(&[2, 2]));
        assert_eq!(single.len(), 0);
    }

    #[test]
    fn erased_length_matches_ell() {
        let walk = sample_srw(LatticePoint::origin(2), 300, RngSeed::new(12));
        let rec = erase_loops(&walk);
        assert_eq!(rec.erased.len() + 1, rec.ell.len());
        assert!(rec.erased.is_simple());
        // The erased path steps along lattice edges.
        for w in rec.erased.points().windows(2) {
            assert!(neighbors(&w[0]).contains(&w[1]));
        }
    }
}
