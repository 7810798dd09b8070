//! Discrete capacity of finite sets in `Z^d` by two independent
//! estimators (escape-probability Monte Carlo and the variational route
//! through a Green table), uniform-point hitting sums, the greedy
//! covering construction, the box-local path goodness classifier, and
//! the loop-erased-prefix capacity probe.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::estimates::{binomial_se, median, quantile, CapacityEstimate, EstimateMethod};
use crate::hashing::{FastMap, FastSet};
use crate::lattice::{green_tail_bound, random_step, LatticeBox, LatticePoint, RngSeed};
use crate::paths::{sample_certified_lerw_prefix, Path};
use crate::scalar::solve_dense;
use crate::Real;

/// Default step cutoff for no-return probabilities.
pub const DEFAULT_ESCAPE_HORIZON: u64 = 1_000_000;

/// Extra sup-norm clearance beyond a set's bounding box after which a
/// walk is declared escaped; the conditional return probability from
/// that distance is folded into the reported error.
const ESCAPE_CLEARANCE: u32 = 96;

/// Asymptotic Green constant `a_d` with `G(x) ~ a_d |x|^{2-d}`; doubled
/// for safety when used as a bound.
fn hit_probability_bound(d: usize, points: usize, distance: u32) -> Real {
    if distance == 0 {
        return 1.0;
    }
    let df = d as Real;
    let a_d = df * gamma(df / 2.0 - 1.0) / (2.0 * std::f64::consts::PI.powf(df / 2.0));
    (points as Real * 2.0 * a_d * (distance as Real).powf(2.0 - df)).min(1.0)
}

fn validate_set(points: &[LatticePoint]) -> Result<(usize, Vec<LatticePoint>)> {
    let mut s: Vec<LatticePoint> = points.to_vec();
    s.sort_unstable();
    s.dedup();
    let Some(first) = s.first() else {
        return Err(Error::EmptySet);
    };
    let d = first.dim();
    for p in &s {
        if p.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.dim(),
            });
        }
    }
    Ok((d, s))
}

fn bounding_center_and_spread(s: &[LatticePoint]) -> (LatticePoint, u32) {
    let center = s[0];
    let spread = s.iter().map(|p| p.sub(&center).sup_norm()).max().unwrap();
    (center, spread)
}

/// Walk from `start` until it hits `target`, exits the escape box, or
/// exhausts the horizon. Returns true when the target was hit. Steps
/// counted from 1 (the start itself is not tested).
fn walk_hits_before_escape<R: Rng>(
    start: LatticePoint,
    target: &FastSet<LatticePoint>,
    escape_center: &LatticePoint,
    escape_radius: u32,
    horizon: u64,
    rng: &mut R,
) -> bool {
    let mut p = start;
    for _ in 0..horizon {
        p = random_step(p, rng);
        if target.contains(&p) {
            return true;
        }
        if p.sub(escape_center).sup_norm() >= escape_radius {
            return false;
        }
    }
    false
}

/// Escape-probability Monte Carlo for the capacity
/// `Cap(S) = 2d · Σ_{a in S} P_a(no return to S)`, `d >= 3`.
///
/// No-return probabilities are truncated at `horizon` steps and at a
/// generous escape distance; both truncation bounds are folded into
/// the standard error (truncation can only inflate the estimate).
pub fn capacity_escape_mc(
    points: &[LatticePoint],
    trials: u64,
    horizon: u64,
    seed: RngSeed,
) -> Result<CapacityEstimate> {
    let (d, s) = validate_set(points)?;
    if d < 3 {
        return Err(Error::RecurrentDimension { d, min: 3 });
    }
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let (center, spread) = bounding_center_and_spread(&s);
    let escape_radius = spread + ESCAPE_CLEARANCE;
    let target: FastSet<LatticePoint> = s.iter().copied().collect();
    let deg = (2 * d) as Real;

    let mut value = 0.0;
    let mut variance = 0.0;
    let mut stream = 0u64;
    for &a in &s {
        let mut escapes = 0u64;
        for _ in 0..trials {
            let mut rng = seed.offset(stream).rng();
            stream += 1;
            if !walk_hits_before_escape(a, &target, &center, escape_radius, horizon, &mut rng) {
                escapes += 1;
            }
        }
        let p = escapes as Real / trials as Real;
        value += p;
        variance += binomial_se(escapes, trials).powi(2);
    }
    let bias_per_point = hit_probability_bound(d, s.len(), ESCAPE_CLEARANCE)
        + s.len() as Real * green_tail_bound(d, horizon);
    Ok(CapacityEstimate {
        value: deg * value,
        std_error: deg * (variance.sqrt() + s.len() as Real * bias_per_point),
        trials: trials * s.len() as u64,
        method: EstimateMethod::EscapeMc,
    })
}

/// Monte Carlo Green table over canonical offsets, built from
/// visit-counting walks started at the origin. `G(u, v)` lookups reduce
/// `v - u` to its canonical representative under lattice symmetries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreenTable {
    pub d: usize,
    pub max_offset: u32,
    pub trials: u64,
    pub horizon: u64,
    pub seed: RngSeed,
    entries: Vec<(LatticePoint, CapacityEstimate)>,
    #[serde(skip)]
    index: FastMap<LatticePoint, usize>,
}

impl GreenTable {
    /// Number of lattice points sharing a canonical offset: distinct
    /// permutations of the absolute coordinates times a sign choice per
    /// nonzero coordinate. Visit counts accumulated per canonical class
    /// are divided by this to give the per-point Green value, which is
    /// exact by symmetry.
    fn orbit_size(canon: &LatticePoint) -> u64 {
        let coords = canon.coords();
        let d = coords.len();
        let mut perms = 1u64;
        for k in 1..=d as u64 {
            perms *= k;
        }
        let mut i = 0;
        while i < d {
            let mut j = i;
            while j < d && coords[j] == coords[i] {
                j += 1;
            }
            for k in 1..=(j - i) as u64 {
                perms /= k;
            }
            i = j;
        }
        let nonzero = coords.iter().filter(|&&c| c != 0).count() as u32;
        perms << nonzero
    }

    /// All canonical offsets with sup-norm at most `max_offset`:
    /// nonincreasing coordinate vectors.
    fn canonical_offsets(d: usize, max_offset: u32) -> Vec<LatticePoint> {
        let mut out = Vec::new();
        let mut coords = vec![0i32; d];
        loop {
            out.push(LatticePoint::new(&coords).unwrap());
            // Next nonincreasing vector, counting like an odometer.
            let mut axis = d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                let cap = if axis == 0 {
                    max_offset as i32
                } else {
                    coords[axis - 1]
                };
                if coords[axis] < cap {
                    coords[axis] += 1;
                    for c in coords.iter_mut().skip(axis + 1) {
                        *c = 0;
                    }
                    break;
                }
            }
        }
    }

    /// Build the table: `trials` walks of `horizon` steps from the
    /// origin, counting visits per canonical offset. The heat-kernel
    /// truncation tail is folded into each entry's standard error.
    pub fn build(
        d: usize,
        max_offset: u32,
        trials: u64,
        horizon: u64,
        seed: RngSeed,
    ) -> Result<Self> {
        if d < 3 {
            return Err(Error::RecurrentDimension { d, min: 3 });
        }
        let offsets = Self::canonical_offsets(d, max_offset);
        let mut index: FastMap<LatticePoint, usize> = FastMap::default();
        for (i, &p) in offsets.iter().enumerate() {
            index.insert(p, i);
        }
        let mut sum = vec![0.0f64; offsets.len()];
        let mut sum_sq = vec![0.0f64; offsets.len()];
        let mut counts = vec![0u32; offsets.len()];
        let mut touched = Vec::new();
        for t in 0..trials {
            let mut rng = seed.offset(t).rng();
            let mut p = LatticePoint::origin(d);
            let record = |q: &LatticePoint,
                          counts: &mut Vec<u32>,
                          touched: &mut Vec<usize>| {
                if q.sup_norm() <= max_offset {
                    if let Some(&i) = index.get(&q.canonical_offset()) {
                        if counts[i] == 0 {
                            touched.push(i);
                        }
                        counts[i] += 1;
                    }
                }
            };
            record(&p, &mut counts, &mut touched);
            for _ in 0..horizon {
                p = random_step(p, &mut rng);
                record(&p, &mut counts, &mut touched);
            }
            for &i in &touched {
                let v = counts[i] as f64;
                sum[i] += v;
                sum_sq[i] += v * v;
                counts[i] = 0;
            }
            touched.clear();
        }
        let deg = (2 * d) as Real;
        let tail = green_tail_bound(d, horizon) / deg;
        let n = trials as Real;
        let entries = offsets
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let orbit = Self::orbit_size(&p) as Real;
                let mean = sum[i] / n;
                let var = if trials > 1 {
                    (sum_sq[i] - sum[i] * sum[i] / n).max(0.0) / (n - 1.0)
                } else {
                    0.0
                };
                let est = CapacityEstimate {
                    value: mean / deg / orbit,
                    std_error: (var / n).sqrt() / deg / orbit + tail,
                    trials,
                    method: EstimateMethod::GreenMc,
                };
                (p, est)
            })
            .collect();
        Ok(Self {
            d,
            max_offset,
            trials,
            horizon,
            seed,
            entries,
            index,
        })
    }

    pub fn from_entries(
        d: usize,
        max_offset: u32,
        trials: u64,
        horizon: u64,
        seed: RngSeed,
        entries: Vec<(LatticePoint, CapacityEstimate)>,
    ) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (p, _))| (*p, i))
            .collect();
        Self {
            d,
            max_offset,
            trials,
            horizon,
            seed,
            entries,
            index,
        }
    }

    pub fn entries(&self) -> &[(LatticePoint, CapacityEstimate)] {
        &self.entries
    }

    /// Rebuild the lookup index (after deserialization).
    pub fn reindex(&mut self) {
        self.index = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, (p, _))| (*p, i))
            .collect();
    }

    /// `G(u, v)` via the canonical offset, if covered.
    pub fn g(&self, u: &LatticePoint, v: &LatticePoint) -> Option<&CapacityEstimate> {
        let off = v.sub(u).canonical_offset();
        self.index.get(&off).map(|&i| &self.entries[i].1)
    }
}

/// Equilibrium measure of the variational capacity problem: the
/// probability vector on `S` minimizing the Green quadratic form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumMeasure {
    pub support: Vec<LatticePoint>,
    pub weights: Vec<Real>,
    pub quadratic_form_value: Real,
}

/// Variational capacity: minimize `μᵀGμ` over probability measures on
/// `S` and return its inverse. The unconstrained stationary system
/// `G y = 1` is solved first; negative weights are dropped one at a
/// time (active set) until the measure is admissible.
pub fn capacity_variational(
    points: &[LatticePoint],
    table: &GreenTable,
) -> Result<(CapacityEstimate, EquilibriumMeasure)> {
    let (d, s) = validate_set(points)?;
    if d != table.d {
        return Err(Error::DimensionMismatch {
            expected: table.d,
            got: d,
        });
    }
    if s.len() > 64 {
        return Err(Error::Config(
            "variational capacity limited to 64 points".into(),
        ));
    }
    let m = s.len();
    let mut g = vec![vec![0.0f64; m]; m];
    let mut g_se = vec![vec![0.0f64; m]; m];
    for i in 0..m {
        for j in 0..m {
            let est = table.g(&s[i], &s[j]).ok_or_else(|| {
                Error::Config(format!(
                    "green table (max offset {}) does not cover the pair {:?}, {:?}",
                    table.max_offset, s[i], s[j]
                ))
            })?;
            g[i][j] = est.value;
            g_se[i][j] = est.std_error;
        }
    }

    let mut active: Vec<usize> = (0..m).collect();
    let (weights, pivot_ratio) = loop {
        let k = active.len();
        let a: Vec<Vec<f64>> = active
            .iter()
            .map(|&i| active.iter().map(|&j| g[i][j]).collect())
            .collect();
        let (y, ratio) = solve_dense(a, vec![1.0; k])?;
        if ratio < 1e-12 {
            return Err(Error::IllConditioned { pivot_ratio: ratio });
        }
        let total: f64 = y.iter().sum();
        if total <= 0.0 {
            return Err(Error::IllConditioned { pivot_ratio: ratio });
        }
        let mu: Vec<f64> = y.iter().map(|v| v / total).collect();
        // Drop the most negative weight, if any survives tolerance.
        if let Some((worst, &w)) = mu
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .filter(|(_, &w)| w < -1e-12)
        {
            debug_assert!(w < 0.0);
            active.remove(worst);
            if active.is_empty() {
                return Err(Error::IllConditioned { pivot_ratio: ratio });
            }
            continue;
        }
        let mut full = vec![0.0f64; m];
        let mut norm = 0.0;
        for (pos, &i) in active.iter().enumerate() {
            full[i] = mu[pos].max(0.0);
            norm += full[i];
        }
        for w in &mut full {
            *w /= norm;
        }
        break (full, ratio);
    };

    let mut quad = 0.0;
    let mut quad_se = 0.0;
    for i in 0..m {
        for j in 0..m {
            quad += weights[i] * weights[j] * g[i][j];
            quad_se += weights[i] * weights[j] * g_se[i][j];
        }
    }
    if quad <= 0.0 {
        return Err(Error::IllConditioned { pivot_ratio });
    }
    let cap = 1.0 / quad;
    let estimate = CapacityEstimate {
        value: cap,
        // First-order propagation of the (conservatively summed) Green
        // entry errors through 1/quad.
        std_error: cap * cap * quad_se,
        trials: table.trials,
        method: EstimateMethod::Variational,
    };
    let measure = EquilibriumMeasure {
        support: s,
        weights,
        quadratic_form_value: quad,
    };
    Ok((estimate, measure))
}

/// Monte Carlo estimate of `Σ_{x in Λ(r)} P_x(X hits S)` by uniform
/// start sampling. `S` must lie inside `Λ(r)`; the empty set gives an
/// exact zero.
pub fn uniform_hit_sum(
    points: &[LatticePoint],
    r: u32,
    trials: u64,
    horizon: u64,
    seed: RngSeed,
) -> Result<CapacityEstimate> {
    if points.is_empty() {
        return Ok(CapacityEstimate {
            value: 0.0,
            std_error: 0.0,
            trials: 0,
            method: EstimateMethod::HitSum,
        });
    }
    let (d, s) = validate_set(points)?;
    if d < 3 {
        return Err(Error::RecurrentDimension { d, min: 3 });
    }
    let origin = LatticePoint::origin(d);
    if s.iter().any(|p| p.sup_norm() > r) {
        return Err(Error::SetOutsideBox);
    }
    let sample_box = LatticeBox::centered(d, r);
    let escape_radius = r + ESCAPE_CLEARANCE;
    let target: FastSet<LatticePoint> = s.iter().copied().collect();
    let mut hits = 0u64;
    for t in 0..trials {
        let mut rng = seed.offset(t).rng();
        let start = sample_box.sample_uniform(&mut rng);
        let hit = target.contains(&start)
            || walk_hits_before_escape(start, &target, &origin, escape_radius, horizon, &mut rng);
        hits += u64::from(hit);
    }
    let volume = sample_box.vertex_count() as Real;
    let p = hits as Real / trials as Real;
    let bias = hit_probability_bound(d, s.len(), ESCAPE_CLEARANCE)
        + s.len() as Real * green_tail_bound(d, horizon);
    Ok(CapacityEstimate {
        value: volume * p,
        std_error: volume * (binomial_se(hits, trials) + bias),
        trials,
        method: EstimateMethod::HitSum,
    })
}

/// Ratio of a hitting-sum estimate to `r^{d-2} · Cap(S)`.
pub fn hit_sum_ratio(sum: &CapacityEstimate, r: u32, d: usize, cap: &CapacityEstimate) -> Real {
    sum.value / ((r as Real).powi(d as i32 - 2) * cap.value)
}

/// Greedy covering construction for a nonnegative subadditive set
/// function `f`: centers on the `(2r+1)Z^d` grid picked by repeated
/// argmax of `f(S ∩ Λ(x, r))`, removing the picked center's grid
/// neighborhood each round. Ties break to the lexicographically
/// smallest center. Pure in its inputs.
pub fn greedy_cover(
    points: &[LatticePoint],
    r: u32,
    f: &dyn Fn(&[LatticePoint]) -> Real,
) -> Result<Vec<LatticePoint>> {
    let (d, s) = validate_set(points)?;
    let cell = 2 * r as i32 + 1;
    let mut cells: FastMap<LatticePoint, Vec<LatticePoint>> = FastMap::default();
    for &p in &s {
        let coords: Vec<i32> = p
            .coords()
            .iter()
            .map(|&c| cell * (c + r as i32).div_euclid(cell))
            .collect();
        let center = LatticePoint::new(&coords).unwrap();
        debug_assert!(p.sub(&center).sup_norm() <= r);
        cells.entry(center).or_default().push(p);
    }
    // Candidate centers: cells where f is positive, with cached values.
    let mut candidates: Vec<(LatticePoint, Real)> = cells
        .iter()
        .map(|(c, pts)| (*c, f(pts)))
        .filter(|(_, v)| *v > 0.0)
        .collect();
    candidates.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let _ = d;

    let mut picked = Vec::new();
    while !candidates.is_empty() {
        let best = candidates
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                a.1.partial_cmp(&b.1)
                    .expect("set function values comparable")
                    // Lexicographically smallest center wins ties.
                    .then_with(|| b.0.cmp(&a.0))
            })
            .map(|(i, _)| i)
            .unwrap();
        let center = candidates[best].0;
        picked.push(center);
        candidates.retain(|(c, _)| c.sub(&center).sup_norm() > (2 * r + 1));
    }
    Ok(picked)
}

/// Verdict of the box-local goodness test for a path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoodnessVerdict {
    pub good: bool,
    /// Signed distance from the threshold in standard-error units
    /// (positive means comfortably good).
    pub margin_sigma: Real,
    pub hit_sum: CapacityEstimate,
    pub threshold: Real,
}

/// Classify a path as good when the estimated hitting sum
/// `Σ_{z in Λ(γ_0, 6r)} P_z(hit γ ∩ Λ(γ_0, 6r))` stays below
/// `α r^4 / log r` (natural log, `r >= 3`).
///
/// Every point of the path inside the box contributes at least 1 to
/// the true sum (it hits itself), so that deterministic floor backs
/// the verdict even when the Monte Carlo estimate fluctuates low.
pub fn alpha_r_good(
    path: &Path,
    alpha: Real,
    r: u32,
    trials: u64,
    seed: RngSeed,
) -> Result<GoodnessVerdict> {
    if r < 3 {
        return Err(Error::Config("goodness test needs r >= 3".into()));
    }
    if alpha < 0.0 {
        return Err(Error::Config("alpha must be nonnegative".into()));
    }
    let d = path.dim();
    if d < 3 {
        return Err(Error::RecurrentDimension { d, min: 3 });
    }
    let center = path.start();
    let box_radius = 6 * r;
    let target: FastSet<LatticePoint> = path
        .points()
        .iter()
        .copied()
        .filter(|p| p.sub(&center).sup_norm() <= box_radius)
        .collect();
    let sample_box = LatticeBox::new(center, box_radius);
    let escape_radius = box_radius + ESCAPE_CLEARANCE;
    let horizon = DEFAULT_ESCAPE_HORIZON;
    let mut hits = 0u64;
    for t in 0..trials {
        let mut rng = seed.offset(t).rng();
        let start = sample_box.sample_uniform(&mut rng);
        let hit = target.contains(&start)
            || walk_hits_before_escape(start, &target, &center, escape_radius, horizon, &mut rng);
        hits += u64::from(hit);
    }
    let volume = sample_box.vertex_count() as Real;
    let bias = hit_probability_bound(d, target.len(), ESCAPE_CLEARANCE)
        + target.len() as Real * green_tail_bound(d, horizon);
    let estimate = CapacityEstimate {
        value: volume * hits as Real / trials as Real,
        std_error: volume * (binomial_se(hits, trials) + bias),
        trials,
        method: EstimateMethod::HitSum,
    };
    let threshold = alpha * (r as Real).powi(4) / (r as Real).ln();
    // Deterministic floor: each in-box path point hits itself.
    let effective = estimate.value.max(target.len() as Real);
    let good = effective <= threshold;
    let margin_sigma = if estimate.std_error > 0.0 {
        (threshold - effective) / estimate.std_error
    } else if good {
        Real::INFINITY
    } else {
        Real::NEG_INFINITY
    };
    Ok(GoodnessVerdict {
        good,
        margin_sigma,
        hit_sum: estimate,
        threshold,
    })
}

/// Goodness test packaged as a classifier for the good-path set
/// extraction. Deterministic in (path, parameters, seed).
pub fn alpha_r_good_classifier(
    alpha: Real,
    r: u32,
    trials: u64,
    seed: RngSeed,
) -> impl Fn(&Path) -> bool {
    move |path: &Path| {
        alpha_r_good(path, alpha, r, trials, seed)
            .map(|v| v.good)
            .unwrap_or(false)
    }
}

/// Distribution summary for the capacity of certified loop-erased walk
/// prefixes, normalized by `n / (log n)^{2/3}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrefixCapacitySummary {
    pub n: usize,
    pub prefixes: usize,
    /// `Cap(prefix) · (log n)^{2/3} / n` per sampled prefix, sorted.
    pub normalized: Vec<Real>,
    pub median: Real,
    pub q25: Real,
    pub q75: Real,
}

/// Sample certified LERW prefixes of length `n` in `Z^4` and estimate
/// the capacity of each by escape Monte Carlo; summarize the
/// normalized values `Cap · (log n)^{2/3} / n`.
pub fn lerw_prefix_capacity(
    n: usize,
    prefixes: usize,
    escape_trials: u64,
    seed: RngSeed,
) -> Result<PrefixCapacitySummary> {
    if n < 8 {
        return Err(Error::Config("prefix capacity probe needs n >= 8".into()));
    }
    if prefixes == 0 {
        return Err(Error::Config("at least one prefix required".into()));
    }
    let norm = (n as Real).ln().powf(2.0 / 3.0) / n as Real;
    let mut values = Vec::with_capacity(prefixes);
    for k in 0..prefixes as u64 {
        let prefix = sample_certified_lerw_prefix(4, n, seed.offset(1_000_000 + k))?;
        let cap = capacity_escape_mc(
            prefix.points(),
            escape_trials,
            DEFAULT_ESCAPE_HORIZON,
            seed.offset(2_000_000 + k * 1_000_003),
        )?;
        values.push(cap.value * norm);
    }
    let mut sorted = values.clone();
    let med = median(&mut sorted);
    let q25 = quantile(&mut sorted, 0.25);
    let q75 = quantile(&mut sorted, 0.75);
    Ok(PrefixCapacitySummary {
        n,
        prefixes,
        normalized: sorted,
        median: med,
        q25,
        q75,
    })
}
