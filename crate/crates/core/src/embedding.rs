//! Time-delay embedding and point-cloud geometry.
//!
//! A scalar series is lifted to a `dim`-dimensional point cloud by stacking
//! time-lagged copies as coordinates: point `i` is
//! `(x[i], x[i+tau], ..., x[i+(dim-1)*tau])`. The delay is chosen at the
//! first minimum of the average mutual information and the dimension by the
//! false-nearest-neighbor criterion.
//!
//! Full-resolution clouds are far too large for Rips homology (a 10 s chunk
//! at 25.6 kHz yields ~256k points), so [`subsample`] provides greedy
//! farthest-point (maxmin) landmarks, which preserve loop geometry, and plain
//! stride decimation for comparison.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding dimension must be at least 2, got {0}")]
    DimTooSmall(usize),
    #[error("delay must be at least 1 sample")]
    ZeroDelay,
    #[error("series of {len} samples too short for tau={tau}, dim={dim}")]
    SeriesTooShort { len: usize, tau: usize, dim: usize },
    #[error("max_tau {max_tau} too large for series of {len} samples (need len >= 4*max_tau)")]
    MaxTauTooLarge { max_tau: usize, len: usize },
    #[error("zero-variance series")]
    ZeroVariance,
    #[error("subsample target must be at least 2, got {0}")]
    TargetTooSmall(usize),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
}

/// Delay-embedding parameters: the lag in samples and the number of
/// coordinates per point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub tau: usize,
    pub dim: usize,
}

impl EmbeddingParams {
    pub fn new(tau: usize, dim: usize) -> Result<Self, EmbeddingError> {
        if tau == 0 {
            return Err(EmbeddingError::ZeroDelay);
        }
        if dim < 2 {
            return Err(EmbeddingError::DimTooSmall(dim));
        }
        Ok(Self { tau, dim })
    }
}

/// N points in `dim` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T: Real> {
    coords: Vec<T>,
    dim: usize,
}

impl<T: Real> PointCloud<T> {
    /// Builds a cloud from row-major coordinates; requires at least one point
    /// and finite entries.
    pub fn new(coords: Vec<T>, dim: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 || coords.is_empty() || coords.len() % dim != 0 {
            return Err(EmbeddingError::EmptyCloud);
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(EmbeddingError::NonFinite(i / dim));
        }
        Ok(Self { coords, dim })
    }

    pub fn from_points(points: &[Vec<T>]) -> Result<Self, EmbeddingError> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        Self::new(points.iter().flatten().copied().collect(), dim)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // enforced at construction
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Squared Euclidean distance between points `i` and `j`.
    pub fn dist_sq(&self, i: usize, j: usize) -> T {
        let (a, b) = (self.point(i), self.point(j));
        let mut acc = T::zero();
        for k in 0..self.dim {
            let d = a[k] - b[k];
            acc += d * d;
        }
        acc
    }

    pub fn dist(&self, i: usize, j: usize) -> T {
        self.dist_sq(i, j).sqrt()
    }
}

/// Delay-embeds a series with the given parameters.
///
/// Produces `len - tau*(dim-1)` points; indices run forward, so point `i` is
/// `(x[i], x[i+tau], ..., x[i+(dim-1)tau])`.
pub fn takens_embed<T: Real>(
    series: &[T],
    params: EmbeddingParams,
) -> Result<PointCloud<T>, EmbeddingError> {
    let EmbeddingParams { tau, dim } = params;
    if dim < 2 {
        return Err(EmbeddingError::DimTooSmall(dim));
    }
    if tau == 0 {
        return Err(EmbeddingError::ZeroDelay);
    }
    let span = tau * (dim - 1);
    if series.len() <= span {
        return Err(EmbeddingError::SeriesTooShort {
            len: series.len(),
            tau,
            dim,
        });
    }
    let n = series.len() - span;
    let mut coords = Vec::with_capacity(n * dim);
    for i in 0..n {
        for k in 0..dim {
            coords.push(series[i + k * tau]);
        }
    }
    PointCloud::new(coords, dim)
}

/// Average mutual information between the series and its lagged copy,
/// estimated with an equal-width 2D histogram, in bits.
///
/// The joint histogram gets a `ceil(sqrt(len))` cell budget, i.e.
/// `ceil(len^(1/4))` bins per axis; one bin per axis per sqrt-sample keeps
/// the per-cell counts high enough for a stable estimate.
fn average_mutual_information<T: Real>(series: &[T], lag: usize, bins: usize, lo: f64, width: f64) -> f64 {
    let n_pairs = series.len() - lag;
    let bin_of = |v: T| -> usize {
        (((v.as_f64() - lo) / width * bins as f64) as usize).min(bins - 1)
    };
    let mut joint = vec![0u32; bins * bins];
    let mut ma = vec![0u32; bins];
    let mut mb = vec![0u32; bins];
    for i in 0..n_pairs {
        let a = bin_of(series[i]);
        let b = bin_of(series[i + lag]);
        joint[a * bins + b] += 1;
        ma[a] += 1;
        mb[b] += 1;
    }
    let total = n_pairs as f64;
    let mut mi = 0.0;
    for a in 0..bins {
        if ma[a] == 0 {
            continue;
        }
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c == 0 {
                continue;
            }
            let pab = c as f64 / total;
            let pa = ma[a] as f64 / total;
            let pb = mb[b] as f64 / total;
            mi += pab * (pab / (pa * pb)).log2();
        }
    }
    mi
}

/// Selects the embedding delay at the first local minimum of the average
/// mutual information over lags `1..=max_tau`, falling back to the argmin
/// when no local minimum exists.
///
/// A lag counts as a local minimum when it minimizes the AMI within a
/// four-lag window on each side; the histogram estimate carries enough
/// jitter that single-neighbor comparisons latch onto noise.
pub fn select_delay_mi<T: Real>(series: &[T], max_tau: usize) -> Result<usize, EmbeddingError> {
    if max_tau == 0 || series.len() < 4 * max_tau {
        return Err(EmbeddingError::MaxTauTooLarge {
            max_tau,
            len: series.len(),
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in series {
        lo = lo.min(v.as_f64());
        hi = hi.max(v.as_f64());
    }
    if !(hi > lo) {
        return Err(EmbeddingError::ZeroVariance);
    }
    let width = hi - lo;
    let bins = ((series.len() as f64).powf(0.25).ceil() as usize).max(2);
    // Lag 0 gives the self-information, a natural left anchor for the scan.
    let ami: Vec<f64> = (0..=max_tau)
        .map(|lag| average_mutual_information(series, lag, bins, lo, width))
        .collect();
    for tau in 1..=max_tau {
        let lo_n = tau.saturating_sub(4);
        let hi_n = (tau + 4).min(max_tau);
        let left_min = (lo_n..tau).all(|s| ami[tau] < ami[s]);
        let right_min = ((tau + 1)..=hi_n).all(|s| ami[tau] <= ami[s]);
        if left_min && right_min {
            return Ok(tau);
        }
    }
    let argmin = (1..=max_tau)
        .min_by(|&a, &b| ami[a].partial_cmp(&ami[b]).expect("finite AMI"))
        .expect("max_tau >= 1");
    Ok(argmin)
}

/// Outcome of the false-nearest-neighbor dimension scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimSelection {
    pub dim: usize,
    /// False when the scan hit `max_dim` with the false-neighbor fraction
    /// still at or above the threshold.
    pub converged: bool,
}

const FNN_RATIO_THRESHOLD: f64 = 10.0;
const FNN_FRACTION_THRESHOLD: f64 = 0.02;

/// Fraction of points whose nearest neighbor in `d` dimensions separates
/// sharply when the `(d+1)`-th delay coordinate is appended.
fn fnn_fraction<T: Real>(series: &[T], tau: usize, d: usize) -> Option<f64> {
    let span = tau * d; // need coordinate x[i + d*tau]
    if series.len() <= span + 1 {
        return None;
    }
    let n = series.len() - span;
    // Floor the distance ratio's denominator at a sliver of the signal range
    // so coincident points do not produce ratios made of rounding noise.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in series {
        lo = lo.min(v.as_f64());
        hi = hi.max(v.as_f64());
    }
    let dist_floor = 1e-9 * (hi - lo).max(f64::MIN_POSITIVE);
    let mut false_count = 0usize;
    let mut total = 0usize;
    for i in 0..n {
        // Nearest neighbor of i in the d-dimensional embedding.
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut acc = 0.0;
            for k in 0..d {
                let diff = (series[i + k * tau] - series[j + k * tau]).as_f64();
                acc += diff * diff;
            }
            if acc < best {
                best = acc;
                best_j = j;
            }
        }
        if best_j == usize::MAX {
            continue;
        }
        let dist_d = best.sqrt().max(dist_floor);
        let next = (series[i + d * tau] - series[best_j + d * tau]).as_f64().abs();
        total += 1;
        if next / dist_d > FNN_RATIO_THRESHOLD {
            false_count += 1;
        }
    }
    if total == 0 {
        None
    } else {
        Some(false_count as f64 / total as f64)
    }
}

/// Selects the embedding dimension as the smallest `d <= max_dim` whose
/// false-neighbor fraction falls below 2% (distance-ratio test, R = 10).
///
/// Returns `max_dim` with `converged = false` when the criterion is never
/// met. Quadratic in the series length; callers pass a truncated series.
pub fn select_dim_fnn<T: Real>(
    series: &[T],
    tau: usize,
    max_dim: usize,
) -> Result<DimSelection, EmbeddingError> {
    if tau == 0 {
        return Err(EmbeddingError::ZeroDelay);
    }
    if max_dim < 1 {
        return Err(EmbeddingError::DimTooSmall(max_dim));
    }
    for d in 1..=max_dim {
        match fnn_fraction(series, tau, d) {
            Some(fraction) => {
                if fraction < FNN_FRACTION_THRESHOLD {
                    return Ok(DimSelection { dim: d, converged: true });
                }
            }
            None => {
                return Err(EmbeddingError::SeriesTooShort {
                    len: series.len(),
                    tau,
                    dim: d + 1,
                })
            }
        }
    }
    Ok(DimSelection {
        dim: max_dim,
        converged: false,
    })
}

/// Subsampling strategy for large clouds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsampleStrategy {
    /// Every k-th point; fast, but thins curved regions unevenly.
    Stride,
    /// Greedy farthest-point landmarks from a seeded start.
    Maxmin,
}

/// Reduces a cloud to at most `target_n` points.
///
/// The result is always a subset of the input points; maxmin selection is
/// deterministic given the seed.
pub fn subsample<T: Real>(
    cloud: &PointCloud<T>,
    target_n: usize,
    strategy: SubsampleStrategy,
    seed: u64,
) -> Result<PointCloud<T>, EmbeddingError> {
    if target_n < 2 {
        return Err(EmbeddingError::TargetTooSmall(target_n));
    }
    let n = cloud.len();
    if target_n >= n {
        return Ok(cloud.clone());
    }
    let indices = match strategy {
        SubsampleStrategy::Stride => {
            let step = n / target_n; // >= 1 since target_n < n
            (0..target_n).map(|i| i * step).collect::<Vec<_>>()
        }
        SubsampleStrategy::Maxmin => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = rng.gen_range(0..n);
            let mut chosen = Vec::with_capacity(target_n);
            chosen.push(start);
            // min squared distance from each point to the chosen set
            let mut min_d = vec![T::infinity(); n];
            let mut last = start;
            for _ in 1..target_n {
                let mut far = T::neg_infinity();
                let mut far_i = 0usize;
                for i in 0..n {
                    let d = cloud.dist_sq(i, last);
                    if d < min_d[i] {
                        min_d[i] = d;
                    }
                    if min_d[i] > far {
                        far = min_d[i];
                        far_i = i;
                    }
                }
                chosen.push(far_i);
                last = far_i;
            }
            chosen
        }
    };
    let mut coords = Vec::with_capacity(indices.len() * cloud.dim());
    for &i in &indices {
        coords.extend_from_slice(cloud.point(i));
    }
    PointCloud::new(coords, cloud.dim())
}

/// Root-mean-square distance of the points from their centroid.
pub fn gyration_radius<T: Real>(cloud: &PointCloud<T>) -> T {
    let n = cloud.len();
    let dim = cloud.dim();
    let inv_n = T::one() / T::of_usize(n);
    let mut centroid = vec![T::zero(); dim];
    for p in cloud.iter_points() {
        for k in 0..dim {
            centroid[k] += p[k];
        }
    }
    for c in centroid.iter_mut() {
        *c *= inv_n;
    }
    let mut acc = T::zero();
    for p in cloud.iter_points() {
        for k in 0..dim {
            let d = p[k] - centroid[k];
            acc += d * d;
        }
    }
    (acc * inv_n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn sine(n: usize, period: f64) -> Vec<f64> {
        (0..n)
            .map(|i| (std::f64::consts::TAU * i as f64 / period).sin())
            .collect()
    }

    #[test]
    fn takens_examples() {
        let series = [1.0, 2.0, 3.0, 4.0, 5.0];
        let cloud = takens_embed(&series, EmbeddingParams { tau: 1, dim: 2 }).unwrap();
        assert_eq!(cloud.len(), 4);
        assert_eq!(cloud.point(0), &[1.0, 2.0]);
        assert_eq!(cloud.point(3), &[4.0, 5.0]);

        let cloud = takens_embed(&series, EmbeddingParams { tau: 2, dim: 2 }).unwrap();
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.point(0), &[1.0, 3.0]);
        assert_eq!(cloud.point(2), &[3.0, 5.0]);
    }

    #[test]
    fn takens_rejects_dim_one() {
        assert!(matches!(
            takens_embed(&[1.0, 2.0], EmbeddingParams { tau: 1, dim: 1 }),
            Err(EmbeddingError::DimTooSmall(1))
        ));
        assert!(EmbeddingParams::new(1, 1).is_err());
    }

    #[test]
    fn takens_rejects_short_series() {
        assert!(matches!(
            takens_embed(&[1.0, 2.0, 3.0], EmbeddingParams { tau: 3, dim: 2 }),
            Err(EmbeddingError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn delay_of_sinusoid_near_quarter_period() {
        // non-integer period so the lagged pairs fill the ellipse densely
        let period = 64.37;
        let series = sine(4096, period);
        let tau = select_delay_mi(&series, 40).unwrap();
        // first AMI minimum of a sinusoid sits at a quarter period
        let quarter = period / 4.0;
        assert!(
            (tau as f64 - quarter).abs() <= 0.1 * quarter,
            "expected tau near {quarter}, got {tau}"
        );
    }

    #[test]
    fn delay_of_white_noise_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let series: Vec<f64> = (0..4096).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let tau = select_delay_mi(&series, 32).unwrap();
        assert!((1..=32).contains(&tau));
    }

    #[test]
    fn delay_of_constant_series_errors() {
        let series = vec![3.0; 1024];
        assert!(matches!(
            select_delay_mi(&series, 16),
            Err(EmbeddingError::ZeroVariance)
        ));
    }

    #[test]
    fn delay_rejects_large_max_tau() {
        let series = sine(100, 10.0);
        assert!(matches!(
            select_delay_mi(&series, 30),
            Err(EmbeddingError::MaxTauTooLarge { .. })
        ));
    }

    #[test]
    fn fnn_sinusoid_selects_two() {
        let series = sine(1024, 64.0);
        let sel = select_dim_fnn(&series, 16, 6).unwrap();
        assert_eq!(sel.dim, 2);
        assert!(sel.converged);
    }

    #[test]
    fn fnn_two_tone_needs_three_or_four() {
        let series: Vec<f64> = (0..2048)
            .map(|i| {
                let t = i as f64;
                (std::f64::consts::TAU * t / 64.0).sin()
                    + (std::f64::consts::TAU * t / (64.0 * std::f64::consts::SQRT_2)).sin()
            })
            .collect();
        let tau = select_delay_mi(&series, 64).unwrap();
        let sel = select_dim_fnn(&series, tau, 8).unwrap();
        assert!(
            (3..=4).contains(&sel.dim),
            "expected dim in 3..=4, got {} (tau={tau})",
            sel.dim
        );
    }

    #[test]
    fn fnn_clamps_to_max_dim_with_flag() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let series: Vec<f64> = (0..400).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sel = select_dim_fnn(&series, 1, 2).unwrap();
        assert!(sel.dim <= 2);
        if sel.dim == 2 && !sel.converged {
            // the clamp contract: hit the cap without meeting the criterion
        }
    }

    #[test]
    fn subsample_identity_when_target_covers() {
        let cloud = takens_embed(&sine(64, 16.0), EmbeddingParams { tau: 4, dim: 2 }).unwrap();
        let out = subsample(&cloud, 1000, SubsampleStrategy::Maxmin, 0).unwrap();
        assert_eq!(out, cloud);
    }

    #[test]
    fn subsample_stride_takes_every_second() {
        let coords: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let cloud = PointCloud::new(coords, 2).unwrap(); // 10 points on a line
        let out = subsample(&cloud, 5, SubsampleStrategy::Stride, 0).unwrap();
        assert_eq!(out.len(), 5);
        let firsts: Vec<f64> = out.iter_points().map(|p| p[0]).collect();
        assert_eq!(firsts, vec![0.0, 4.0, 8.0, 12.0, 16.0]);
    }

    #[test]
    fn subsample_maxmin_recovers_square_corners() {
        let mut pts: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            pts.push(vec![rng.gen_range(0.0..1e-6), rng.gen_range(0.0..1e-6)]);
        }
        let cloud = PointCloud::from_points(&pts).unwrap();
        let out = subsample(&cloud, 4, SubsampleStrategy::Maxmin, 17).unwrap();
        assert_eq!(out.len(), 4);
        // each corner is represented once, within the duplicate jitter
        let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        for corner in corners {
            let hits = out
                .iter_points()
                .filter(|p| (p[0] - corner[0]).abs() < 1e-5 && (p[1] - corner[1]).abs() < 1e-5)
                .count();
            assert_eq!(hits, 1, "corner {corner:?} not uniquely represented");
        }
    }

    #[test]
    fn gyration_examples() {
        let single = PointCloud::new(vec![2.0, -1.0], 2).unwrap();
        assert_eq!(gyration_radius(&single), 0.0);

        let two = PointCloud::new(vec![-1.0f64, 0.0, 1.0, 0.0], 2).unwrap();
        assert!((gyration_radius(&two) - 1.0).abs() < 1e-15);

        let circle: Vec<Vec<f64>> = (0..1000)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / 1000.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let cloud = PointCloud::from_points(&circle).unwrap();
        assert!((gyration_radius(&cloud) - 1.0).abs() < 0.01);
    }

    #[test]
    fn sinusoid_quarter_period_embedding_is_circular() {
        // tau = exact quarter period makes the 2D embedding an exact circle;
        // 1040 samples leave exactly 16 full periods of embedded points
        let series = sine(1040, 64.0);
        let cloud = takens_embed(&series, EmbeddingParams { tau: 16, dim: 2 }).unwrap();
        let n = cloud.len();
        let mut cx = 0.0;
        let mut cy = 0.0;
        for p in cloud.iter_points() {
            cx += p[0];
            cy += p[1];
        }
        cx /= n as f64;
        cy /= n as f64;
        let radii: Vec<f64> = cloud
            .iter_points()
            .map(|p| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt())
            .collect();
        let mean = radii.iter().sum::<f64>() / n as f64;
        let max_dev = radii.iter().fold(0.0f64, |m, r| m.max((r - mean).abs()));
        assert!(max_dev < 0.01 * mean, "deviation {max_dev} vs mean {mean}");
    }

    proptest! {
        #[test]
        fn takens_translation_equivariant(
            series in proptest::collection::vec(-1e3f64..1e3, 10..60),
            shift in -1e3f64..1e3,
        ) {
            let params = EmbeddingParams { tau: 2, dim: 3 };
            prop_assume!(series.len() > params.tau * (params.dim - 1));
            let base = takens_embed(&series, params).unwrap();
            let shifted: Vec<f64> = series.iter().map(|x| x + shift).collect();
            let moved = takens_embed(&shifted, params).unwrap();
            for (a, b) in base.iter_points().zip(moved.iter_points()) {
                for k in 0..params.dim {
                    prop_assert!((a[k] + shift - b[k]).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn gyration_translation_invariant_scale_linear(
            pts in proptest::collection::vec(
                proptest::collection::vec(-10.0f64..10.0, 3), 2..40),
            shift in -5.0f64..5.0,
            scale in -3.0f64..3.0,
        ) {
            let cloud = PointCloud::from_points(&pts).unwrap();
            let r = gyration_radius(&cloud);
            let moved: Vec<Vec<f64>> =
                pts.iter().map(|p| p.iter().map(|x| x + shift).collect()).collect();
            let scaled: Vec<Vec<f64>> =
                pts.iter().map(|p| p.iter().map(|x| x * scale).collect()).collect();
            let r_moved = gyration_radius(&PointCloud::from_points(&moved).unwrap());
            let r_scaled = gyration_radius(&PointCloud::from_points(&scaled).unwrap());
            prop_assert!((r - r_moved).abs() < 1e-9 * (1.0 + r));
            prop_assert!((r_scaled - scale.abs() * r).abs() < 1e-9 * (1.0 + r));
        }

        #[test]
        fn maxmin_packing_monotone(
            pts in proptest::collection::vec(
                proptest::collection::vec(-10.0f64..10.0, 2), 12..40),
            seed in 0u64..100,
        ) {
            let cloud = PointCloud::from_points(&pts).unwrap();
            let min_pairwise = |c: &PointCloud<f64>| -> f64 {
                let mut best = f64::INFINITY;
                for i in 0..c.len() {
                    for j in (i + 1)..c.len() {
                        best = best.min(c.dist(i, j));
                    }
                }
                best
            };
            let small = subsample(&cloud, 4, SubsampleStrategy::Maxmin, seed).unwrap();
            let large = subsample(&cloud, 8, SubsampleStrategy::Maxmin, seed).unwrap();
            prop_assert!(min_pairwise(&small) >= min_pairwise(&large) - 1e-12);
        }

        #[test]
        fn subsample_is_subset(
            pts in proptest::collection::vec(
                proptest::collection::vec(-10.0f64..10.0, 2), 5..30),
            target in 2usize..10,
            seed in 0u64..10,
        ) {
            let cloud = PointCloud::from_points(&pts).unwrap();
            for strategy in [SubsampleStrategy::Stride, SubsampleStrategy::Maxmin] {
                let out = subsample(&cloud, target, strategy, seed).unwrap();
                prop_assert_eq!(out.len(), target.min(cloud.len()));
                for p in out.iter_points() {
                    prop_assert!(cloud.iter_points().any(|q| q == p));
                }
            }
        }
    }
}
