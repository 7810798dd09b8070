//! Escape probabilities of path tips, the per-index functional summing
//! their squares, goodness classification, and a rejection-sampling
//! estimator for the conditional duration of walks with a prescribed
//! loop erasure.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::binomial_se;
use crate::hashing::FastSet;
use crate::lattice::{neighbors, random_step, LatticePoint, RngSeed};
use crate::paths::{erase_loops, Path};
use crate::Real;

/// Enumerate exactly while `(2d)^k` stays within this budget; Monte
/// Carlo beyond (at `d = 4` that is `k <= 4`).
const ENUMERATION_BUDGET: u64 = 4096;

/// Largest `k` whose escape probability is computed by full
/// enumeration in dimension `d`.
pub fn exact_escape_depth(d: usize) -> usize {
    let base = (2 * d) as u64;
    let mut k = 0;
    let mut total = 1u64;
    while total.saturating_mul(base) <= ENUMERATION_BUDGET {
        total *= base;
        k += 1;
    }
    k
}

/// A single escape-probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeEstimate {
    pub value: Real,
    pub std_error: Real,
    pub exact: bool,
}

/// Count, per depth `j = 1..=k`, the number of `j`-step sequences from
/// `tip` that avoid `avoid` entirely. DFS with pruning; exact.
fn count_avoiding_sequences(
    tip: LatticePoint,
    avoid: &FastSet<LatticePoint>,
    k: usize,
    counts: &mut [u64],
) {
    fn dfs(p: LatticePoint, depth: usize, k: usize, avoid: &FastSet<LatticePoint>, counts: &mut [u64]) {
        if depth == k {
            return;
        }
        for q in neighbors(&p) {
            if !avoid.contains(&q) {
                counts[depth] += 1;
                dfs(q, depth + 1, k, avoid, counts);
            }
        }
    }
    dfs(tip, 0, k, avoid, counts);
}

fn escape_exact(tip: LatticePoint, avoid: &FastSet<LatticePoint>, k: usize, d: usize) -> Real {
    if avoid.contains(&tip) {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    let mut counts = vec![0u64; k];
    count_avoiding_sequences(tip, avoid, k, &mut counts);
    counts[k - 1] as Real / ((2 * d) as Real).powi(k as i32)
}

fn escape_mc(
    tip: LatticePoint,
    avoid: &FastSet<LatticePoint>,
    k: usize,
    trials: u64,
    seed: RngSeed,
) -> (Real, Real) {
    if avoid.contains(&tip) {
        return (0.0, 0.0);
    }
    if k == 0 {
        return (1.0, 0.0);
    }
    let trials = trials.max(1);
    let mut escapes = 0u64;
    for t in 0..trials {
        let mut rng = seed.offset(t).rng();
        let mut p = tip;
        let mut ok = true;
        for _ in 0..k {
            p = random_step(p, &mut rng);
            if avoid.contains(&p) {
                ok = false;
                break;
            }
        }
        escapes += u64::from(ok);
    }
    (
        escapes as Real / trials as Real,
        binomial_se(escapes, trials),
    )
}

/// `k`-step escape probability of the tip of `path`: the chance that a
/// fresh walk from the endpoint avoids all earlier points of the path
/// for `k` steps. Exact by enumeration for small `k`, Monte Carlo with
/// a standard error beyond.
pub fn escape_probability(path: &Path, k: usize, trials: u64, seed: RngSeed) -> EscapeEstimate {
    let avoid: FastSet<LatticePoint> = path.points()[..path.len()].iter().copied().collect();
    let d = path.dim();
    if k <= exact_escape_depth(d) {
        EscapeEstimate {
            value: escape_exact(path.end(), &avoid, k, d),
            std_error: 0.0,
            exact: true,
        }
    } else {
        let (value, se) = escape_mc(path.end(), &avoid, k, trials, seed);
        EscapeEstimate {
            value,
            std_error: se,
            exact: false,
        }
    }
}

/// Monte Carlo escape probability regardless of `k` (cross-checks the
/// enumeration inside the exact window).
pub fn escape_probability_mc(path: &Path, k: usize, trials: u64, seed: RngSeed) -> EscapeEstimate {
    let avoid: FastSet<LatticePoint> = path.points()[..path.len()].iter().copied().collect();
    let (value, se) = escape_mc(path.end(), &avoid, k, trials, seed);
    EscapeEstimate {
        value,
        std_error: se,
        exact: false,
    }
}

/// Escape profile of a simple path: the per-index values
/// `A_i = Σ_{k=1}^{n} Esc_k(prefix_i)^2 / k` with the inner sum always
/// running to the full path length, plus the per-`(i, k)` escape
/// probabilities when retained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EscapeProfile {
    pub path: Path,
    /// `A_i` for `i = 0..n-1`.
    pub a: Vec<Real>,
    /// Escape probabilities `[i][k-1]`, retained on request.
    pub esc: Option<Vec<Vec<Real>>>,
    /// Entries with `k` at or below this depth are exact.
    pub exact_depth: usize,
    pub mc_trials: u64,
}

impl EscapeProfile {
    /// Path length `n`.
    pub fn n(&self) -> usize {
        self.path.len()
    }

    /// Total functional: the sum of the `A_i`.
    pub fn total(&self) -> Real {
        self.a.iter().sum()
    }
}

/// Options for [`t_tilde_with`].
#[derive(Debug, Clone, Copy)]
pub struct TTildeOptions {
    pub trials: u64,
    pub retain_esc: bool,
}

/// The path functional dominating conditional walk durations:
/// `Σ_{i=0}^{n-1} A_i` with `A_i = Σ_{k=1}^n Esc_k(prefix_i)^2 / k`.
///
/// The empty prefix (`i = 0`) has nothing to hit, so its escape
/// probabilities are 1 and `A_0` is the harmonic number `H_n`. Squared
/// Monte Carlo escape probabilities use the unbiased `p^2` estimator.
pub fn t_tilde(path: &Path, trials: u64, seed: RngSeed) -> Result<(Real, EscapeProfile)> {
    t_tilde_with(
        path,
        TTildeOptions {
            trials,
            retain_esc: false,
        },
        seed,
    )
}

pub fn t_tilde_with(
    path: &Path,
    options: TTildeOptions,
    seed: RngSeed,
) -> Result<(Real, EscapeProfile)> {
    if !path.is_simple() {
        return Err(Error::NotSimple);
    }
    let n = path.len();
    if n == 0 {
        return Err(Error::InvalidPath("path must have positive length".into()));
    }
    let d = path.dim();
    let exact_depth = exact_escape_depth(d).min(n);
    let trials = options.trials.max(2);
    let points = path.points();

    let harmonic: Real = (1..=n).map(|k| 1.0 / k as Real).sum();
    let mut avoid: FastSet<LatticePoint> = FastSet::default();
    let mut a = Vec::with_capacity(n);
    let mut esc_rows = options.retain_esc.then(Vec::new);

    for i in 0..n {
        if i > 0 {
            avoid.insert(points[i - 1]);
        }
        let tip = points[i];
        if avoid.is_empty() {
            a.push(harmonic);
            if let Some(rows) = esc_rows.as_mut() {
                rows.push(vec![1.0; n]);
            }
            continue;
        }

        // Exact window by one pruned DFS.
        let mut counts = vec![0u64; exact_depth];
        count_avoiding_sequences(tip, &avoid, exact_depth, &mut counts);
        let base = (2 * d) as Real;
        let exact_esc: Vec<Real> = counts
            .iter()
            .enumerate()
            .map(|(j, &c)| c as Real / base.powi(j as i32 + 1))
            .collect();

        // One batch of walks serves every k in the Monte Carlo window:
        // record the first hit time and read off the survival counts.
        let mut survive = vec![0u64; n + 1];
        if exact_depth < n {
            for t in 0..trials {
                let mut rng = seed.offset((i as u64) << 32 | t).rng();
                let mut p = tip;
                let mut h = n + 1; // no hit within n steps
                for step in 1..=n {
                    p = random_step(p, &mut rng);
                    if avoid.contains(&p) {
                        h = step;
                        break;
                    }
                }
                // Walk survives all k < h.
                for k in 1..h.min(n + 1) {
                    survive[k] += 1;
                }
            }
        }

        let mut a_i = 0.0;
        let mut row = options.retain_esc.then(|| Vec::with_capacity(n));
        for k in 1..=n {
            if k <= exact_depth {
                let e = exact_esc[k - 1];
                a_i += e * e / k as Real;
                if let Some(r) = row.as_mut() {
                    r.push(e);
                }
            } else {
                let p_hat = survive[k] as Real / trials as Real;
                // Unbiased estimator of p^2.
                let p_sq =
                    (p_hat * (p_hat * trials as Real - 1.0) / (trials as Real - 1.0)).max(0.0);
                a_i += p_sq / k as Real;
                if let Some(r) = row.as_mut() {
                    r.push(p_hat);
                }
            }
        }
        a.push(a_i);
        if let (Some(rows), Some(r)) = (esc_rows.as_mut(), row) {
            rows.push(r);
        }
    }

    let profile = EscapeProfile {
        path: path.clone(),
        a,
        esc: esc_rows,
        exact_depth,
        mc_trials: trials,
    };
    Ok((profile.total(), profile))
}

/// Goodness classification: a profile of length `n >= 2` is good for
/// `delta` when the `A_i` mass above `(log n)^{1/3 + delta}` does not
/// exceed `delta · n` (natural log).
pub fn is_delta_good(profile: &EscapeProfile, delta: Real) -> Result<bool> {
    if !(0.0..=1.0).contains(&delta) || delta == 0.0 {
        return Err(Error::Config("delta must lie in (0, 1]".into()));
    }
    let n = profile.n();
    if n < 2 {
        return Err(Error::Config(
            "goodness classification needs a path of length >= 2".into(),
        ));
    }
    let threshold = (n as Real).ln().powf(1.0 / 3.0 + delta);
    let flagged: Real = profile
        .a
        .iter()
        .filter(|&&a_i| a_i >= threshold)
        .sum();
    Ok(flagged <= delta * n as Real)
}

/// Result of the rejection sampler for the conditional walk duration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TypicalTimeRun {
    /// Mean of the capped loop-length sums over accepted walks.
    pub t_hat: Real,
    pub acceptance_rate: Real,
    /// Fraction of walks abandoned at the step cutoff (mass leaking
    /// toward infinity under the conditioning).
    pub leakage_rate: Real,
    pub trials: u64,
    pub accepted: u64,
    /// Capped loop-length sums, one per accepted walk.
    pub capped_sums: Vec<u64>,
    /// Absorption times of accepted walks.
    pub tau_samples: Vec<u64>,
}

/// Step cutoff for the rejection sampler.
pub const REJECTION_CUTOFF: usize = 100_000;

/// Rejection-sample walks from the start of `gamma` until absorption on
/// `a_set ∪ b_set`; accept those hitting `a_set` first with loop
/// erasure exactly `gamma`, and average the capped loop-length sum
/// `Σ_i (ℓ_i - ℓ_{i-1}) ∧ |gamma|` over acceptances.
pub fn typical_time_mc(
    gamma: &Path,
    a_set: &[LatticePoint],
    b_set: &[LatticePoint],
    trials: u64,
    seed: RngSeed,
) -> Result<TypicalTimeRun> {
    let d = gamma.dim();
    if d < 3 {
        return Err(Error::RecurrentDimension { d, min: 3 });
    }
    let n = gamma.len();
    if n == 0 || n > 6 {
        return Err(Error::Config(
            "rejection sampling is feasible for path lengths 1..=6".into(),
        ));
    }
    if !gamma.is_simple() {
        return Err(Error::NotSimple);
    }
    let a: FastSet<LatticePoint> = a_set.iter().copied().collect();
    let b: FastSet<LatticePoint> = b_set.iter().copied().collect();
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.iter().any(|p| b.contains(p)) {
        return Err(Error::Config("absorbing sets must be disjoint".into()));
    }
    if !a.contains(&gamma.end()) {
        return Err(Error::Config("path must end inside the target set".into()));
    }
    for p in &gamma.points()[..n] {
        if a.contains(p) || b.contains(p) {
            return Err(Error::Config(
                "path must avoid the absorbing sets before its endpoint".into(),
            ));
        }
    }

    let start = gamma.start();
    let mut accepted_sums = Vec::new();
    let mut tau_samples = Vec::new();
    let mut rejected = 0u64;
    let mut leaked = 0u64;
    let mut buffer: Vec<LatticePoint> = Vec::with_capacity(1024);
    for t in 0..trials {
        let mut rng = seed.offset(t).rng();
        buffer.clear();
        buffer.push(start);
        let mut p = start;
        let mut outcome = None;
        for _ in 0..REJECTION_CUTOFF {
            p = random_step(p, &mut rng);
            buffer.push(p);
            if a.contains(&p) {
                outcome = Some(true);
                break;
            }
            if b.contains(&p) {
                outcome = Some(false);
                break;
            }
        }
        match outcome {
            None => leaked += 1,
            Some(false) => rejected += 1,
            Some(true) => {
                let walk = Path::from_adjacent_points(std::mem::take(&mut buffer));
                let record = erase_loops(&walk);
                if record.erased.points() == gamma.points() {
                    let capped: u64 = record
                        .ell
                        .windows(2)
                        .map(|w| (w[1] - w[0]).min(n) as u64)
                        .sum();
                    accepted_sums.push(capped);
                    tau_samples.push(walk.len() as u64);
                } else {
                    rejected += 1;
                }
                buffer = walk.into_points();
            }
        }
    }
    if accepted_sums.is_empty() {
        return Err(Error::NoAcceptedSamples {
            trials,
            rejected,
            leaked,
        });
    }
    let accepted = accepted_sums.len() as u64;
    Ok(TypicalTimeRun {
        t_hat: accepted_sums.iter().sum::<u64>() as Real / accepted as Real,
        acceptance_rate: accepted as Real / trials as Real,
        leakage_rate: leaked as Real / trials as Real,
        trials,
        accepted,
        capped_sums: accepted_sums,
        tau_samples,
    })
}
