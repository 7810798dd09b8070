//! Random walk on a sampled spanning tree and ensemble estimators for
//! displacement, range, return probability, and exit times.
//!
//! Walks live on the tree restricted to lattice vertices: edges to a
//! wired supernode are treated as absent, and runs that touch a
//! supernode-adjacent vertex are flagged so ensembles can discard and
//! redraw them (the boundary contamination is measured, not hidden).

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{mean_and_se, median};
use crate::hashing::FastSet;
use crate::lattice::{LatticePoint, RngSeed};
use crate::tree::ball;
use crate::wilson::{wired_box_ust, SpanningTree};
use crate::Real;

/// Exact summary of one walk on a tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkSummary {
    pub steps: usize,
    /// `d_T(X_0, X_n)`.
    pub end_displacement: u32,
    /// `max_i d_T(X_0, X_i)`.
    pub max_displacement: u32,
    /// `max_i ||X_i - X_0||_inf`, when the tree is embedded.
    pub max_extrinsic: Option<u32>,
    /// Number of distinct vertices visited.
    pub range: u64,
    /// Visits to the start at even times `i >= 2`.
    pub even_returns: u64,
    /// The walk touched a vertex adjacent to the wired supernode.
    pub boundary_contact: bool,
    /// Vertex trajectory, retained on request.
    pub trajectory: Option<Vec<u32>>,
}

/// Prefix statistics of one walk, recorded at each grid point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkSnapshot {
    pub n: usize,
    pub end_displacement: u32,
    pub max_displacement: u32,
    pub max_extrinsic: Option<u32>,
    pub range: u64,
    pub at_start: bool,
}

#[derive(Debug, Clone)]
pub struct WalkProfile {
    pub snapshots: Vec<WalkSnapshot>,
    pub boundary_contact: bool,
}

struct WalkState<'a> {
    tree: &'a SpanningTree,
    start: u32,
    start_coords: Option<LatticePoint>,
    /// Geodesic from the start to the current vertex; the unique tree
    /// path, so one comparison per step maintains the distance.
    geodesic: Vec<u32>,
    visited: FastSet<u32>,
    max_displacement: u32,
    max_extrinsic: Option<u32>,
    even_returns: u64,
    boundary_contact: bool,
    step: usize,
}

impl<'a> WalkState<'a> {
    fn new(tree: &'a SpanningTree, start: u32) -> Result<Self> {
        if !tree.contains(start) {
            return Err(Error::UnknownVertex(start));
        }
        if tree.wired_root && tree.is_root(start) {
            return Err(Error::Config(
                "walks cannot start at the wired supernode".into(),
            ));
        }
        let mut visited = FastSet::default();
        visited.insert(start);
        let start_coords = tree.coords_of(start);
        let boundary_contact =
            tree.wired_root && !tree.is_root(start) && tree.parent(start) == tree.root();
        Ok(Self {
            tree,
            start,
            start_coords,
            geodesic: vec![start],
            visited,
            max_displacement: 0,
            max_extrinsic: start_coords.map(|_| 0),
            even_returns: 0,
            boundary_contact,
            step: 0,
        })
    }

    fn current(&self) -> u32 {
        *self.geodesic.last().unwrap()
    }

    fn distance(&self) -> u32 {
        (self.geodesic.len() - 1) as u32
    }

    /// One uniform step over available tree neighbors. Returns false
    /// when the current vertex has no usable edges (a lattice vertex
    /// attached only to the supernode).
    fn step<R: Rng>(&mut self, rng: &mut R) -> bool {
        let v = self.current();
        let children = self.tree.children(v);
        let exclude_parent = self.tree.is_root(v)
            || (self.tree.wired_root && self.tree.parent(v) == self.tree.root());
        let degree = children.len() + usize::from(!exclude_parent);
        if degree == 0 {
            self.boundary_contact = true;
            return false;
        }
        let choice = rng.gen_range(0..degree);
        let w = if choice < children.len() {
            children[choice]
        } else {
            self.tree.parent(v)
        };
        // Maintain the geodesic to the start.
        if self.geodesic.len() >= 2 && self.geodesic[self.geodesic.len() - 2] == w {
            self.geodesic.pop();
        } else {
            self.geodesic.push(w);
        }
        self.step += 1;
        self.visited.insert(w);
        self.max_displacement = self.max_displacement.max(self.distance());
        if let (Some(sc), Some(wc)) = (self.start_coords, self.tree.coords_of(w)) {
            let norm = wc.sub(&sc).sup_norm();
            self.max_extrinsic = Some(self.max_extrinsic.unwrap_or(0).max(norm));
        }
        if w == self.start && self.step % 2 == 0 {
            self.even_returns += 1;
        }
        if self.tree.wired_root && !self.tree.is_root(w) && self.tree.parent(w) == self.tree.root()
        {
            self.boundary_contact = true;
        }
        true
    }

    fn snapshot(&self) -> WalkSnapshot {
        WalkSnapshot {
            n: self.step,
            end_displacement: self.distance(),
            max_displacement: self.max_displacement,
            max_extrinsic: self.max_extrinsic,
            range: self.visited.len() as u64,
            at_start: self.current() == self.start,
        }
    }
}

/// Run a walk of `steps` uniform steps over tree neighbors and return
/// its exact summary. Deterministic in the seed.
pub fn run_walk(
    tree: &SpanningTree,
    start: u32,
    steps: usize,
    seed: RngSeed,
) -> Result<WalkSummary> {
    run_walk_with(tree, start, steps, seed, false)
}

pub fn run_walk_with(
    tree: &SpanningTree,
    start: u32,
    steps: usize,
    seed: RngSeed,
    retain_trajectory: bool,
) -> Result<WalkSummary> {
    let mut state = WalkState::new(tree, start)?;
    let mut rng = seed.rng();
    let mut trajectory = retain_trajectory.then(|| vec![start]);
    for _ in 0..steps {
        if !state.step(&mut rng) {
            break;
        }
        if let Some(t) = trajectory.as_mut() {
            t.push(state.current());
        }
    }
    let snap = state.snapshot();
    Ok(WalkSummary {
        steps,
        end_displacement: snap.end_displacement,
        max_displacement: snap.max_displacement,
        max_extrinsic: snap.max_extrinsic,
        range: snap.range,
        even_returns: state.even_returns,
        boundary_contact: state.boundary_contact,
        trajectory,
    })
}

/// One walk of `max(grid)` steps with prefix statistics recorded at
/// every grid point. The grid must be positive and ascending.
pub fn walk_profile(
    tree: &SpanningTree,
    start: u32,
    grid: &[usize],
    seed: RngSeed,
) -> Result<WalkProfile> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("grid must be ascending and nonempty".into()));
    }
    let mut state = WalkState::new(tree, start)?;
    let mut rng = seed.rng();
    let mut snapshots = Vec::with_capacity(grid.len());
    let mut next = 0;
    for step in 1..=*grid.last().unwrap() {
        if !state.step(&mut rng) {
            break;
        }
        if step == grid[next] {
            snapshots.push(state.snapshot());
            next += 1;
        }
    }
    Ok(WalkProfile {
        snapshots,
        boundary_contact: state.boundary_contact,
    })
}

/// Exit-time samples: the first time the walk reaches intrinsic
/// distance `n` from `start`. Walks touching the wired boundary are
/// discarded and redrawn on fresh streams; the discard count is
/// reported.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExitTimes {
    pub n: u32,
    pub taus: Vec<u64>,
    pub discarded: u64,
}

pub fn exit_time(
    tree: &SpanningTree,
    start: u32,
    n: u32,
    trials: u64,
    seed: RngSeed,
) -> Result<ExitTimes> {
    if n == 0 {
        return Err(Error::EmptySphere {
            center: start,
            radius: 0,
        });
    }
    // The sphere must be reachable, else the walk never exits.
    let b = ball(tree, start, n)?;
    if b.sphere(n).is_empty() {
        return Err(Error::EmptySphere {
            center: start,
            radius: n,
        });
    }
    let budget = trials * 4;
    let mut taus = Vec::with_capacity(trials as usize);
    let mut discarded = 0u64;
    let mut stream = 0u64;
    while (taus.len() as u64) < trials && stream < budget {
        let mut state = WalkState::new(tree, start)?;
        let mut rng = seed.offset(stream).rng();
        stream += 1;
        let mut contaminated = state.boundary_contact;
        while state.distance() < n {
            if !state.step(&mut rng) {
                contaminated = true;
                break;
            }
            if state.boundary_contact {
                contaminated = true;
                break;
            }
        }
        if contaminated {
            discarded += 1;
        } else {
            taus.push(state.step as u64);
        }
    }
    if taus.is_empty() {
        return Err(Error::Config(
            "all exit-time walks touched the boundary; use a larger box".into(),
        ));
    }
    Ok(ExitTimes { n, taus, discarded })
}

/// Source of trees for ensemble estimators: index-keyed so trials can
/// run in any order.
pub trait TreeProvider: Sync {
    /// Tree and start vertex for the given trial index.
    fn tree(&self, index: u32) -> Result<(Arc<SpanningTree>, u32)>;
}

/// Fresh wired-box UST per index, started at the lattice origin.
pub struct WiredBoxProvider {
    pub d: usize,
    pub l: u32,
    pub seed: RngSeed,
}

impl TreeProvider for WiredBoxProvider {
    fn tree(&self, index: u32) -> Result<(Arc<SpanningTree>, u32)> {
        let tree = wired_box_ust(self.d, self.l, self.seed.offset(index as u64))?;
        let origin = tree
            .vertex_of_point(&LatticePoint::origin(self.d))
            .expect("origin inside the box");
        Ok((Arc::new(tree), origin))
    }
}

/// The same fixed tree for every index (calibration surrogates).
pub struct FixedTreeProvider {
    tree: Arc<SpanningTree>,
    start: u32,
}

impl FixedTreeProvider {
    pub fn new(tree: SpanningTree, start: u32) -> Self {
        Self {
            tree: Arc::new(tree),
            start,
        }
    }
}

impl TreeProvider for FixedTreeProvider {
    fn tree(&self, _index: u32) -> Result<(Arc<SpanningTree>, u32)> {
        Ok((Arc::clone(&self.tree), self.start))
    }
}

/// Ensemble sizing and seeding.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnsembleOptions {
    pub trees: u32,
    pub walks_per_tree: u32,
    pub seed: RngSeed,
}

/// Point estimate with a between-tree confidence interval. Statistics
/// are aggregated within each tree first (the walk law given the tree),
/// then across trees, and the interval reflects the tree-level spread.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleEstimate {
    pub statistic: String,
    pub n: u64,
    pub estimate: Real,
    pub ci_lo: Real,
    pub ci_hi: Real,
    pub trees: u32,
    pub walks_per_tree: u32,
    pub discard_rate: Real,
    pub seed: u64,
}

fn from_tree_values(
    statistic: &str,
    n: u64,
    per_tree: &[Real],
    opts: &EnsembleOptions,
    discard_rate: Real,
) -> EnsembleEstimate {
    let (mean, se) = mean_and_se(per_tree);
    EnsembleEstimate {
        statistic: statistic.to_string(),
        n,
        estimate: mean,
        ci_lo: mean - 1.96 * se,
        ci_hi: mean + 1.96 * se,
        trees: opts.trees,
        walks_per_tree: opts.walks_per_tree,
        discard_rate,
        seed: opts.seed.seed,
    }
}

/// Walk-statistic names produced by [`walk_grid_ensemble`].
pub mod stat {
    pub const END_DISPLACEMENT: &str = "median_end_displacement";
    pub const MAX_DISPLACEMENT: &str = "median_max_displacement";
    pub const MAX_EXTRINSIC: &str = "median_max_extrinsic";
    pub const MEAN_SQ_MAX_DISPLACEMENT: &str = "mean_sq_max_displacement";
    pub const RANGE: &str = "median_range";
    pub const RETURN_PROBABILITY: &str = "return_probability";
    pub const EXIT_TIME: &str = "mean_exit_time";
}

/// Everything the grid ensemble measures, one estimate per (statistic,
/// grid point).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WalkGridEnsemble {
    pub estimates: Vec<EnsembleEstimate>,
    pub discard_rate: Real,
}

impl WalkGridEnsemble {
    pub fn series(&self, statistic: &str) -> Vec<&EnsembleEstimate> {
        self.estimates
            .iter()
            .filter(|e| e.statistic == statistic)
            .collect()
    }
}

/// Within-tree walk aggregates at each grid point (the conditional law
/// given the tree), later averaged across trees.
#[derive(Debug, Clone)]
pub struct TreeGridSummary {
    pub med_end: Vec<Real>,
    pub med_max: Vec<Real>,
    pub med_ext: Vec<Option<Real>>,
    pub mean_sq_max: Vec<Real>,
    pub med_range: Vec<Real>,
    pub at_start: Vec<Real>,
    pub walks_used: u32,
    pub walks_discarded: u64,
}

/// Run redraw-on-contamination walks over one tree and aggregate the
/// grid snapshots within it. Streams are keyed by the walk index under
/// `walk_base`, so the result is deterministic and scheduling-free.
pub fn tree_grid_summary(
    tree: &SpanningTree,
    start: u32,
    grid: &[usize],
    walks: u32,
    walk_base: RngSeed,
) -> Result<TreeGridSummary> {
    let target = walks as usize;
    let budget = 4 * walks as u64;
    let mut kept: Vec<Vec<WalkSnapshot>> = Vec::with_capacity(target);
    let mut discards = 0u64;
    let mut stream = 0u64;
    while kept.len() < target && stream < budget {
        let missing = (target - kept.len()) as u64;
        let batch: Vec<Option<Vec<WalkSnapshot>>> = (stream..(stream + missing).min(budget))
            .into_par_iter()
            .map(|j| {
                let profile = walk_profile(tree, start, grid, walk_base.offset(j))?;
                Ok::<_, Error>(
                    (!profile.boundary_contact && profile.snapshots.len() == grid.len())
                        .then_some(profile.snapshots),
                )
            })
            .collect::<Result<_>>()?;
        stream += batch.len() as u64;
        for snaps in batch {
            match snaps {
                Some(s) if kept.len() < target => kept.push(s),
                Some(_) => {}
                None => discards += 1,
            }
        }
    }
    if kept.is_empty() {
        return Err(Error::Config(
            "every walk touched the boundary; use a larger box".into(),
        ));
    }
    let mut summary = TreeGridSummary {
        med_end: Vec::with_capacity(grid.len()),
        med_max: Vec::with_capacity(grid.len()),
        med_ext: Vec::with_capacity(grid.len()),
        mean_sq_max: Vec::with_capacity(grid.len()),
        med_range: Vec::with_capacity(grid.len()),
        at_start: Vec::with_capacity(grid.len()),
        walks_used: kept.len() as u32,
        walks_discarded: discards,
    };
    for gi in 0..grid.len() {
        let mut end: Vec<Real> = kept
            .iter()
            .map(|w| w[gi].end_displacement as Real)
            .collect();
        let mut maxd: Vec<Real> = kept
            .iter()
            .map(|w| w[gi].max_displacement as Real)
            .collect();
        let mut range: Vec<Real> = kept.iter().map(|w| w[gi].range as Real).collect();
        summary.med_end.push(median(&mut end));
        summary
            .mean_sq_max
            .push(maxd.iter().map(|x| x * x).sum::<Real>() / maxd.len() as Real);
        summary.med_max.push(median(&mut maxd));
        summary.med_range.push(median(&mut range));
        summary
            .at_start
            .push(kept.iter().filter(|w| w[gi].at_start).count() as Real / kept.len() as Real);
        let ext: Option<Vec<Real>> = kept
            .iter()
            .map(|w| w[gi].max_extrinsic.map(|e| e as Real))
            .collect();
        summary.med_ext.push(ext.map(|mut v| median(&mut v)));
    }
    Ok(summary)
}

/// Assemble cross-tree estimates from per-tree summaries.
pub fn grid_estimates_from_summaries(
    summaries: &[TreeGridSummary],
    grid: &[usize],
    opts: &EnsembleOptions,
) -> WalkGridEnsemble {
    let examined: u64 = summaries
        .iter()
        .map(|s| s.walks_used as u64 + s.walks_discarded)
        .sum();
    let discards: u64 = summaries.iter().map(|s| s.walks_discarded).sum();
    let discard_rate = discards as Real / examined.max(1) as Real;
    let mut estimates = Vec::new();
    for (gi, &n) in grid.iter().enumerate() {
        let collect = |f: &dyn Fn(&TreeGridSummary) -> Real| -> Vec<Real> {
            summaries.iter().map(f).collect()
        };
        estimates.push(from_tree_values(
            stat::END_DISPLACEMENT,
            n as u64,
            &collect(&|s| s.med_end[gi]),
            opts,
            discard_rate,
        ));
        estimates.push(from_tree_values(
            stat::MAX_DISPLACEMENT,
            n as u64,
            &collect(&|s| s.med_max[gi]),
            opts,
            discard_rate,
        ));
        estimates.push(from_tree_values(
            stat::MEAN_SQ_MAX_DISPLACEMENT,
            n as u64,
            &collect(&|s| s.mean_sq_max[gi]),
            opts,
            discard_rate,
        ));
        estimates.push(from_tree_values(
            stat::RANGE,
            n as u64,
            &collect(&|s| s.med_range[gi]),
            opts,
            discard_rate,
        ));
        if summaries.iter().all(|s| s.med_ext[gi].is_some()) {
            estimates.push(from_tree_values(
                stat::MAX_EXTRINSIC,
                n as u64,
                &collect(&|s| s.med_ext[gi].unwrap()),
                opts,
                discard_rate,
            ));
        }
        if n % 2 == 0 {
            estimates.push(from_tree_values(
                stat::RETURN_PROBABILITY,
                n as u64,
                &collect(&|s| s.at_start[gi]),
                opts,
                discard_rate,
            ));
        }
    }
    WalkGridEnsemble {
        estimates,
        discard_rate,
    }
}

/// Walk statistics over a tree ensemble and a step grid: medians of the
/// displacement quantities and the range, mean squared maximal
/// displacement, and the at-start fraction at even grid points.
///
/// Walks contaminated by the wired boundary are discarded and redrawn
/// on fresh streams (bounded budget); the realized discard rate is
/// reported. Trees are processed one at a time to bound memory, the
/// walks within a tree run in parallel, and every stream is keyed by
/// (tree, walk) indices, so results are independent of scheduling.
pub fn walk_grid_ensemble(
    provider: &dyn TreeProvider,
    opts: &EnsembleOptions,
    grid: &[usize],
) -> Result<WalkGridEnsemble> {
    if opts.trees == 0 || opts.walks_per_tree == 0 {
        return Err(Error::Config("ensemble needs trees and walks".into()));
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("grid must be ascending and nonempty".into()));
    }
    let mut summaries: Vec<TreeGridSummary> = Vec::with_capacity(opts.trees as usize);
    for t in 0..opts.trees {
        let (tree, start) = provider.tree(t)?;
        let walk_base = opts.seed.offset(((t as u64) << 24) ^ 0x9e37_79b9);
        summaries.push(tree_grid_summary(
            &tree,
            start,
            grid,
            opts.walks_per_tree,
            walk_base,
        )?);
    }
    Ok(grid_estimates_from_summaries(&summaries, grid, opts))
}

/// Fraction of walks back at the start at (even) time `n`, aggregated
/// per tree then across trees. `n = 0` is exactly 1.
pub fn return_probability(
    provider: &dyn TreeProvider,
    opts: &EnsembleOptions,
    n: usize,
) -> Result<EnsembleEstimate> {
    if n % 2 != 0 {
        return Err(Error::Config(
            "return probability is measured at even times".into(),
        ));
    }
    if n == 0 {
        return Ok(EnsembleEstimate {
            statistic: stat::RETURN_PROBABILITY.to_string(),
            n: 0,
            estimate: 1.0,
            ci_lo: 1.0,
            ci_hi: 1.0,
            trees: opts.trees,
            walks_per_tree: opts.walks_per_tree,
            discard_rate: 0.0,
            seed: opts.seed.seed,
        });
    }
    let ensemble = walk_grid_ensemble(provider, opts, &[n])?;
    ensemble
        .estimates
        .into_iter()
        .find(|e| e.statistic == stat::RETURN_PROBABILITY)
        .ok_or_else(|| Error::Config("missing return-probability estimate".into()))
}

/// Median displacement statistics (intrinsic end and max, extrinsic
/// max) plus the mean squared maximal displacement over a step grid.
pub fn displacement_profile(
    provider: &dyn TreeProvider,
    opts: &EnsembleOptions,
    grid: &[usize],
) -> Result<Vec<EnsembleEstimate>> {
    let ensemble = walk_grid_ensemble(provider, opts, grid)?;
    Ok(ensemble
        .estimates
        .into_iter()
        .filter(|e| {
            e.statistic == stat::END_DISPLACEMENT
                || e.statistic == stat::MAX_DISPLACEMENT
                || e.statistic == stat::MAX_EXTRINSIC
                || e.statistic == stat::MEAN_SQ_MAX_DISPLACEMENT
        })
        .collect())
}

/// Median range of the walk over a step grid.
pub fn range_profile(
    provider: &dyn TreeProvider,
    opts: &EnsembleOptions,
    grid: &[usize],
) -> Result<Vec<EnsembleEstimate>> {
    let ensemble = walk_grid_ensemble(provider, opts, grid)?;
    Ok(ensemble
        .estimates
        .into_iter()
        .filter(|e| e.statistic == stat::RANGE)
        .collect())
}

/// Mean exit time of the intrinsic ball of radius `n`, per grid value,
/// aggregated per tree then across trees.
pub fn exit_time_profile(
    provider: &dyn TreeProvider,
    opts: &EnsembleOptions,
    radii: &[u32],
) -> Result<Vec<EnsembleEstimate>> {
    if opts.trees == 0 || opts.walks_per_tree == 0 {
        return Err(Error::Config("ensemble needs trees and walks".into()));
    }
    let mut per_tree_means: Vec<Vec<Real>> = vec![Vec::new(); radii.len()];
    let mut examined = 0u64;
    let mut discarded = 0u64;
    for t in 0..opts.trees {
        let (tree, start) = provider.tree(t)?;
        for (ri, &n) in radii.iter().enumerate() {
            let seed = opts
                .seed
                .offset(((t as u64) << 24) ^ ((ri as u64) << 16) ^ 0x5bd1_e995);
            let samples = exit_time(&tree, start, n, opts.walks_per_tree as u64, seed)?;
            examined += samples.taus.len() as u64 + samples.discarded;
            discarded += samples.discarded;
            let mean = samples.taus.iter().sum::<u64>() as Real / samples.taus.len() as Real;
            per_tree_means[ri].push(mean);
        }
    }
    let discard_rate = discarded as Real / examined.max(1) as Real;
    Ok(radii
        .iter()
        .enumerate()
        .map(|(ri, &n)| {
            from_tree_values(
                stat::EXIT_TIME,
                n as u64,
                &per_tree_means[ri],
                opts,
                discard_rate,
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::RngSeed;

    fn line_provider(m: usize) -> FixedTreeProvider {
        let tree = SpanningTree::line_tree(m);
        let start = (m / 2) as u32;
        FixedTreeProvider::new(tree, start)
    }

    #[test]
    fn zero_step_walk() {
        let tree = SpanningTree::line_tree(10);
        let s = run_walk(&tree, 5, 0, RngSeed::new(1)).unwrap();
        assert_eq!(s.end_displacement, 0);
        assert_eq!(s.max_displacement, 0);
        assert_eq!(s.range, 1);
        assert_eq!(s.even_returns, 0);
        assert_eq!(s.max_extrinsic, Some(0));
    }

    #[test]
    fn walk_summary_invariants_and_bookkeeping() {
        let tree = SpanningTree::line_tree(200);
        for trial in 0..50u64 {
            let steps = 300;
            let s = run_walk_with(&tree, 100, steps, RngSeed::new(2).offset(trial), true).unwrap();
            assert!(s.end_displacement <= s.max_displacement);
            assert!(s.max_displacement as usize <= steps);
            assert!(s.range as usize <= steps + 1);
            let traj = s.trajectory.as_ref().unwrap();
            assert_eq!(traj.len(), steps + 1);
            // Odd-time returns never happen on a bipartite graph.
            for (i, &v) in traj.iter().enumerate() {
                if i % 2 == 1 {
                    assert_ne!(v, 100);
                }
            }
            // range + repeated-visit steps = steps + 1, exactly.
            let mut seen = std::collections::HashSet::new();
            let mut repeats = 0u64;
            for &v in traj {
                if !seen.insert(v) {
                    repeats += 1;
                }
            }
            assert_eq!(s.range + repeats, steps as u64 + 1);
            // Even-return count matches the trajectory.
            let returns = traj
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(i, &v)| i % 2 == 0 && v == 100)
                .count() as u64;
            assert_eq!(s.even_returns, returns);
        }
    }

    #[test]
    fn walk_deterministic_in_seed() {
        let tree = SpanningTree::line_tree(50);
        let a = run_walk(&tree, 25, 1000, RngSeed::new(3)).unwrap();
        let b = run_walk(&tree, 25, 1000, RngSeed::new(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exit_time_radius_one_line_center() {
        // Both neighbors of the center are on the sphere: one step.
        let tree = SpanningTree::line_tree(10);
        let samples = exit_time(&tree, 5, 1, 50, RngSeed::new(4)).unwrap();
        assert!(samples.taus.iter().all(|&t| t == 1));
    }

    #[test]
    fn exit_time_line_matches_gamblers_ruin() {
        // Mean exit time of (-n, n) from the center is exactly n^2.
        let n = 64u32;
        let tree = SpanningTree::line_tree(160);
        let samples = exit_time(&tree, 80, n, 2500, RngSeed::new(5)).unwrap();
        assert_eq!(samples.discarded, 0);
        let mean = samples.taus.iter().sum::<u64>() as Real / samples.taus.len() as Real;
        let expected = (n as Real).powi(2);
        assert!(
            (mean - expected).abs() / expected < 0.05,
            "mean {mean} vs {expected}"
        );
        // Exit times dominate the radius.
        assert!(samples.taus.iter().all(|&t| t >= n as u64));
    }

    #[test]
    fn exit_time_rejects_unreachable_sphere() {
        let tree = SpanningTree::line_tree(10);
        assert!(matches!(
            exit_time(&tree, 5, 50, 10, RngSeed::new(6)),
            Err(Error::EmptySphere { .. })
        ));
    }

    #[test]
    fn return_probability_edge_cases() {
        let provider = line_provider(100);
        let opts = EnsembleOptions {
            trees: 3,
            walks_per_tree: 10,
            seed: RngSeed::new(7),
        };
        let at_zero = return_probability(&provider, &opts, 0).unwrap();
        assert_eq!(at_zero.estimate, 1.0);
        assert!(return_probability(&provider, &opts, 3).is_err());
    }

    #[test]
    fn grid_ensemble_medians_nondecreasing_on_line() {
        let provider = line_provider(400);
        let opts = EnsembleOptions {
            trees: 4,
            walks_per_tree: 64,
            seed: RngSeed::new(8),
        };
        let grid = [16usize, 64, 256, 1024];
        let ensemble = walk_grid_ensemble(&provider, &opts, &grid).unwrap();
        let maxd = ensemble.series(stat::MAX_DISPLACEMENT);
        assert_eq!(maxd.len(), 4);
        for w in maxd.windows(2) {
            assert!(w[1].estimate >= w[0].estimate, "max displacement medians must grow");
        }
        let range = ensemble.series(stat::RANGE);
        for (e, &n) in range.iter().zip(&grid) {
            assert!(e.estimate <= n as Real + 1.0);
        }
        // Extrinsic medians exist (the line is embedded) and grow.
        let ext = ensemble.series(stat::MAX_EXTRINSIC);
        assert_eq!(ext.len(), 4);
        for w in ext.windows(2) {
            assert!(w[1].estimate >= w[0].estimate);
        }
    }

    #[test]
    fn wired_ensemble_smoke_and_discard_reporting() {
        let provider = WiredBoxProvider {
            d: 2,
            l: 12,
            seed: RngSeed::new(9),
        };
        let opts = EnsembleOptions {
            trees: 3,
            walks_per_tree: 16,
            seed: RngSeed::new(10),
        };
        let ensemble = walk_grid_ensemble(&provider, &opts, &[4, 16]).unwrap();
        assert!(ensemble.discard_rate >= 0.0);
        assert!(!ensemble.series(stat::END_DISPLACEMENT).is_empty());
    }
}
