//! `Z^d` geometry, seeded random walk generation, and Green's-function
//! estimation. Everything else in the crate walks on this module.

use std::hash::{Hash, Hasher};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{CapacityEstimate, EstimateMethod};
use crate::paths::Path;
use crate::Real;

/// Maximum supported ambient dimension.
pub const MAX_DIM: usize = 8;

/// A site of `Z^d`, `1 <= d <= 8`. Coordinates beyond `d` are zero, so
/// derived equality/ordering/hashing are dimension-consistent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    coords: [i32; MAX_DIM],
    dim: u8,
}

impl Hash for LatticePoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Points live in hot hash sets (occupancy indices, loop erasure);
        // hashing the packed array beats field-by-field dispatch.
        self.coords.hash(state);
    }
}

impl LatticePoint {
    pub fn new(coords: &[i32]) -> Result<Self> {
        let d = coords.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::DimensionTooLarge { d, max: MAX_DIM });
        }
        let mut c = [0i32; MAX_DIM];
        c[..d].copy_from_slice(coords);
        Ok(Self {
            coords: c,
            dim: d as u8,
        })
    }

    /// The origin of `Z^d`.
    pub fn origin(d: usize) -> Self {
        Self::new(&vec![0; d]).expect("valid dimension")
    }

    /// `sign * e_axis` offset from this point.
    pub fn step(mut self, axis: usize, sign: i32) -> Self {
        debug_assert!(axis < self.dim as usize);
        self.coords[axis] += sign;
        self
    }

    /// Unit vector `e_axis` in dimension `d`.
    pub fn unit(d: usize, axis: usize) -> Self {
        Self::origin(d).step(axis, 1)
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    pub fn coord(&self, axis: usize) -> i32 {
        self.coords[axis]
    }

    /// `l_infinity` norm.
    pub fn sup_norm(&self) -> u32 {
        self.coords().iter().map(|c| c.unsigned_abs()).max().unwrap()
    }

    /// `l_1` norm.
    pub fn l1_norm(&self) -> u64 {
        self.coords().iter().map(|c| c.unsigned_abs() as u64).sum()
    }

    /// Squared Euclidean norm.
    pub fn l2_norm_sq(&self) -> u64 {
        self.coords()
            .iter()
            .map(|&c| (c as i64 * c as i64) as u64)
            .sum()
    }

    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim, other.dim);
        let mut c = [0i32; MAX_DIM];
        for i in 0..self.dim as usize {
            c[i] = self.coords[i] - other.coords[i];
        }
        LatticePoint {
            coords: c,
            dim: self.dim,
        }
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim, other.dim);
        let mut c = [0i32; MAX_DIM];
        for i in 0..self.dim as usize {
            c[i] = self.coords[i] + other.coords[i];
        }
        LatticePoint {
            coords: c,
            dim: self.dim,
        }
    }

    /// Canonical representative under the symmetries of `Z^d` (coordinate
    /// permutations and sign flips): absolute coordinates sorted
    /// descending. Walk distributions are invariant under these maps, so
    /// Green values may be cached per canonical offset.
    pub fn canonical_offset(&self) -> LatticePoint {
        let mut c = [0i32; MAX_DIM];
        for i in 0..self.dim as usize {
            c[i] = self.coords[i].abs();
        }
        c[..self.dim as usize].sort_unstable_by(|a, b| b.cmp(a));
        LatticePoint {
            coords: c,
            dim: self.dim,
        }
    }

    /// Pack into a `u64` key (16 bits per coordinate, `d <= 4`,
    /// coordinates within `±32767`). Used by the hot hash maps.
    pub fn packed_key(&self) -> Option<u64> {
        if self.dim > 4 {
            return None;
        }
        let mut key = 0u64;
        for i in 0..4 {
            let c = self.coords[i];
            if !(-32768..=32767).contains(&c) {
                return None;
            }
            key |= ((c as u16) as u64) << (16 * i);
        }
        Some(key)
    }
}

/// The `l_infinity` ball `Λ(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub center: LatticePoint,
    pub radius: u32,
}

impl LatticeBox {
    pub fn new(center: LatticePoint, radius: u32) -> Self {
        Self { center, radius }
    }

    /// Centered box `Λ(radius)` in dimension `d`.
    pub fn centered(d: usize, radius: u32) -> Self {
        Self::new(LatticePoint::origin(d), radius)
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.sub(&self.center).sup_norm() <= self.radius
    }

    /// `(2r + 1)^d`, checked.
    pub fn vertex_count(&self) -> u128 {
        let side = 2 * self.radius as u128 + 1;
        let mut n = 1u128;
        for _ in 0..self.center.dim() {
            n *= side;
        }
        n
    }

    /// Uniform sample from the box.
    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> LatticePoint {
        let d = self.center.dim();
        let r = self.radius as i32;
        let mut coords = [0i32; MAX_DIM];
        for (i, c) in coords.iter_mut().take(d).enumerate() {
            *c = self.center.coord(i) + rng.gen_range(-r..=r);
        }
        LatticePoint {
            coords,
            dim: d as u8,
        }
    }

    /// All points of the box, lexicographic order. Only for small boxes.
    pub fn points(&self) -> Vec<LatticePoint> {
        let d = self.center.dim();
        let side = 2 * self.radius as usize + 1;
        let count = self.vertex_count();
        assert!(count <= 1 << 24, "box too large to materialize");
        let mut out = Vec::with_capacity(count as usize);
        let mut idx = vec![0usize; d];
        loop {
            let mut coords = [0i32; MAX_DIM];
            for i in 0..d {
                coords[i] = self.center.coord(i) + idx[i] as i32 - self.radius as i32;
            }
            out.push(LatticePoint {
                coords,
                dim: d as u8,
            });
            let mut axis = d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < side {
                    break;
                }
                idx[axis] = 0;
            }
        }
    }
}

/// Seed for a counter-based generator: `(seed, stream)` fully determines
/// every trajectory sampled from it, and distinct streams are
/// independent, so trials can be farmed out in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    /// Stream offset by `k`; used to key independent trials.
    pub fn offset(self, k: u64) -> Self {
        Self {
            seed: self.seed,
            stream: self.stream.wrapping_add(k),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// The `2d` lattice neighbours of `p`, in the fixed order
/// `+e_1, -e_1, ..., +e_d, -e_d`.
pub fn neighbors(p: &LatticePoint) -> Vec<LatticePoint> {
    let d = p.dim();
    let mut out = Vec::with_capacity(2 * d);
    for axis in 0..d {
        out.push(p.step(axis, 1));
        out.push(p.step(axis, -1));
    }
    out
}

/// One uniform nearest-neighbour step.
#[inline]
pub fn random_step<R: Rng>(p: LatticePoint, rng: &mut R) -> LatticePoint {
    let d = p.dim();
    let dir = rng.gen_range(0..2 * d);
    let axis = dir >> 1;
    let sign = if dir & 1 == 0 { 1 } else { -1 };
    p.step(axis, sign)
}

/// Simple random walk of `steps` steps started at `start`; the returned
/// path has `steps + 1` points and is a pure function of the seed.
pub fn sample_srw(start: LatticePoint, steps: usize, seed: RngSeed) -> Path {
    let mut rng = seed.rng();
    let mut points = Vec::with_capacity(steps + 1);
    let mut p = start;
    points.push(p);
    for _ in 0..steps {
        p = random_step(p, &mut rng);
        points.push(p);
    }
    Path::from_adjacent_points(points)
}

/// Heat-kernel tail constant: `P(X_n = y) <= c_d / n^{d/2}` for the
/// simple random walk on `Z^d` (local CLT with the parity factor folded
/// in), so visits after time `H` contribute at most
/// `c_d H^{1-d/2} / (d/2 - 1)` to the Green sum.
fn heat_kernel_constant(d: usize) -> Real {
    let d = d as Real;
    2.0 * (d / (2.0 * std::f64::consts::PI)).powf(d / 2.0)
}

/// Truncation bound on `sum_{n > horizon} P_x(X_n = y)` in `d >= 3`.
pub(crate) fn green_tail_bound(d: usize, horizon: u64) -> Real {
    let half = d as Real / 2.0;
    heat_kernel_constant(d) * (horizon as Real).powf(1.0 - half) / (half - 1.0)
}

/// Monte Carlo estimate of the Green's function
/// `G(x, y) = (1/2d) E_x[# visits to y]`, truncated at `horizon` steps.
/// The neglected tail is bounded by the standard heat-kernel decay and
/// folded into the reported standard error.
///
/// Requires `d >= 3`; the walk is recurrent below that and `G` diverges.
pub fn green_estimate(
    x: &LatticePoint,
    y: &LatticePoint,
    trials: u64,
    horizon: u64,
    seed: RngSeed,
) -> Result<CapacityEstimate> {
    let d = x.dim();
    if d < 3 {
        return Err(Error::RecurrentDimension { d, min: 3 });
    }
    if y.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: y.dim(),
        });
    }
    let deg = (2 * d) as Real;
    let mut sum = 0.0_f64;
    let mut sum_sq = 0.0_f64;
    for t in 0..trials {
        let mut rng = seed.offset(t).rng();
        let mut p = *x;
        let mut visits = (p == *y) as u64;
        for _ in 0..horizon {
            p = random_step(p, &mut rng);
            visits += (p == *y) as u64;
        }
        let v = visits as Real;
        sum += v;
        sum_sq += v * v;
    }
    let n = trials as Real;
    let mean = sum / n;
    let var = if trials > 1 {
        (sum_sq - sum * sum / n).max(0.0) / (n - 1.0)
    } else {
        0.0
    };
    let se_mc = (var / n).sqrt() / deg;
    let tail = green_tail_bound(d, horizon) / deg;
    Ok(CapacityEstimate {
        value: mean / deg,
        std_error: se_mc + tail,
        trials,
        method: EstimateMethod::GreenMc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbors_d4_count_and_order() {
        let p = LatticePoint::origin(4);
        let ns = neighbors(&p);
        assert_eq!(ns.len(), 8);
        assert_eq!(ns[0], LatticePoint::unit(4, 0));
        assert_eq!(ns[1], LatticePoint::origin(4).step(0, -1));
        assert_eq!(ns[6], LatticePoint::unit(4, 3));
        for q in &ns {
            assert_eq!(q.sub(&p).sup_norm(), 1);
            assert_eq!(q.sub(&p).l1_norm(), 1);
        }
    }

    #[test]
    fn neighbors_d1() {
        let ns = neighbors(&LatticePoint::origin(1));
        assert_eq!(
            ns,
            vec![
                LatticePoint::new(&[1]).unwrap(),
                LatticePoint::new(&[-1]).unwrap()
            ]
        );
    }

    #[test]
    fn neighbors_symmetric_relation() {
        let seed = RngSeed::new(7);
        let mut rng = seed.rng();
        for _ in 0..50 {
            let p = LatticeBox::centered(4, 10).sample_uniform(&mut rng);
            for q in neighbors(&p) {
                assert!(neighbors(&q).contains(&p));
            }
        }
    }

    #[test]
    fn srw_zero_steps_single_point() {
        let start = LatticePoint::new(&[3, -1, 0, 2]).unwrap();
        let path = sample_srw(start, 0, RngSeed::new(1));
        assert_eq!(path.len(), 0);
        assert_eq!(path.points(), &[start]);
    }

    #[test]
    fn srw_consecutive_adjacent_and_length() {
        let path = sample_srw(LatticePoint::origin(4), 500, RngSeed::new(2));
        assert_eq!(path.len(), 500);
        for w in path.points().windows(2) {
            assert_eq!(w[0].sub(&w[1]).l1_norm(), 1);
        }
    }

    #[test]
    fn srw_deterministic() {
        let s = RngSeed::new(99).with_stream(5);
        let a = sample_srw(LatticePoint::origin(4), 1000, s);
        let b = sample_srw(LatticePoint::origin(4), 1000, s);
        assert_eq!(a.points(), b.points());
    }

    // E||X_n||_2^2 = n exactly for the simple random walk on Z^d: each
    // step changes one coordinate by +-1 and the cross term vanishes by
    // symmetry. Independent closed form, checked to 3 standard errors.
    #[test]
    fn srw_mean_squared_displacement() {
        let n = 100usize;
        let trials = 100_000u64;
        let seed = RngSeed::new(31);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for t in 0..trials {
            let p = sample_srw(LatticePoint::origin(4), n, seed.offset(t));
            let v = p.points()[n].l2_norm_sq() as Real;
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / trials as Real;
        let var = (sum_sq - sum * sum / trials as Real) / (trials as Real - 1.0);
        let se = (var / trials as Real).sqrt();
        assert!(
            (mean - n as Real).abs() <= 3.0 * se,
            "mean {mean} vs {n}, se {se}"
        );
    }

    #[test]
    fn green_rejects_recurrent_dimensions() {
        let p = LatticePoint::origin(2);
        assert!(matches!(
            green_estimate(&p, &p, 10, 100, RngSeed::new(0)),
            Err(Error::RecurrentDimension { .. })
        ));
    }

    #[test]
    fn green_symmetry_within_3_sigma() {
        let x = LatticePoint::origin(4);
        let y = LatticePoint::new(&[2, 1, 0, 0]).unwrap();
        let a = green_estimate(&x, &y, 4000, 5000, RngSeed::new(11)).unwrap();
        let b = green_estimate(&y, &x, 4000, 5000, RngSeed::new(12)).unwrap();
        assert!(a.agrees_within(&b, 3.0), "sigma {}", a.sigma_distance(&b));
    }

    #[test]
    fn green_monotone_decay_origin_vs_neighbor() {
        let x = LatticePoint::origin(4);
        let e1 = LatticePoint::unit(4, 0);
        let g00 = green_estimate(&x, &x, 6000, 5000, RngSeed::new(13)).unwrap();
        let g01 = green_estimate(&x, &e1, 6000, 5000, RngSeed::new(14)).unwrap();
        let sigma = (g00.std_error.powi(2) + g01.std_error.powi(2)).sqrt();
        assert!(
            g00.value - g01.value > 3.0 * sigma,
            "G(0,0)={} G(0,e1)={} sigma={}",
            g00.value,
            g01.value,
            sigma
        );
    }

    // Quadrupling the trial count should halve the reported SE within
    // 20% (the truncation term is held fixed and is negligible here).
    #[test]
    fn green_se_scales_like_inverse_sqrt_trials() {
        let x = LatticePoint::origin(4);
        let a = green_estimate(&x, &x, 2000, 2000, RngSeed::new(21)).unwrap();
        let b = green_estimate(&x, &x, 8000, 2000, RngSeed::new(21)).unwrap();
        let ratio = b.std_error / a.std_error;
        assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn box_membership_and_count() {
        let b = LatticeBox::centered(4, 3);
        assert_eq!(b.vertex_count(), 7u128.pow(4));
        assert!(b.contains(&LatticePoint::new(&[3, -3, 0, 1]).unwrap()));
        assert!(!b.contains(&LatticePoint::new(&[4, 0, 0, 0]).unwrap()));
        let small = LatticeBox::centered(2, 1).points();
        assert_eq!(small.len(), 9);
    }

    #[test]
    fn canonical_offset_sorts_abs() {
        let p = LatticePoint::new(&[-3, 1, 0, -2]).unwrap();
        assert_eq!(
            p.canonical_offset(),
            LatticePoint::new(&[3, 2, 1, 0]).unwrap()
        );
    }
}
