//! Scalar health indicators.
//!
//! Diagram summaries treat essential classes by substituting the filtration
//! cap for their infinite deaths (configurable via [`Essentials`]), so every
//! sum below is finite. The persistence entropy is normalized by
//! `log2(S)` of the diagram amplitude as the primary form, with the
//! pair-count normalization `log2(n)` available behind
//! [`EntropyNormalization`]. The f-indicators likewise ship in the
//! subtraction form by default and a product form behind [`FFamilyForm`].
//!
//! Kurtosis is reported as excess kurtosis throughout (Gaussian maps to 0)
//! and the output column is named `kurtosis_excess` to keep the convention
//! visible in every file this crate writes.

use chrono::{DateTime, Utc};
use indexmap::IndexMap;
use rustfft::FftNum;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{
    gyration_radius, select_delay_mi, select_dim_fnn, subsample, takens_embed, EmbeddingError,
    EmbeddingParams, SubsampleStrategy,
};
use crate::persistence::{
    betti_curve, rips_persistence, BettiCurve, PersistenceDiagram, PersistenceError,
    DEFAULT_SIMPLEX_BUDGET,
};
use crate::scalar::Real;
use crate::signal::TimeSeriesChunk;
use crate::spectral::{band_rms_demodulated, dominant_peak, fft_magnitude, Band, SpectralError};

#[derive(Debug, Error)]
pub enum IndicatorError {
    #[error("embedding: {0}")]
    Embedding(#[from] EmbeddingError),
    #[error("persistence: {0}")]
    Persistence(#[from] PersistenceError),
    #[error("spectral: {0}")]
    Spectral(#[from] SpectralError),
    #[error("statistics: need at least 4 samples, got {0}")]
    TooFewSamples(usize),
    #[error("statistics: zero-variance signal")]
    ZeroVariance,
}

/// Treatment of essential (infinite-death) pairs in the indicator formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Essentials {
    /// Substitute the filtration cap for infinite deaths.
    #[default]
    CapAtFiltration,
    /// Drop essential pairs from the sums.
    Ignore,
}

/// Denominator of the normalized persistence entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EntropyNormalization {
    /// `log2` of the diagram amplitude `S`.
    #[default]
    AmplitudeLog,
    /// `log2` of the number of pairs.
    PairCountLog,
}

/// Algebraic form of the second and fourth f-indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FFamilyForm {
    /// `sum (d_max - d) - (d - b)` and `sum (d_max - d)^2 - (d - b)^4`.
    #[default]
    Subtraction,
    /// `sum (d_max - d) * (d - b)` and `sum (d_max - d)^2 * (d - b)^4`.
    Product,
}

/// Finite (birth, death) view of one dimension under an essentials policy.
fn effective_pairs<T: Real>(
    diagram: &PersistenceDiagram<T>,
    dim: usize,
    essentials: Essentials,
) -> Vec<(T, T)> {
    let cap = diagram.max_filtration();
    diagram
        .pairs_in_dim(dim)
        .filter_map(|p| {
            if !p.is_essential() {
                Some((p.birth, p.death))
            } else {
                match essentials {
                    Essentials::CapAtFiltration if cap > p.birth => Some((p.birth, cap)),
                    _ => None,
                }
            }
        })
        .collect()
}

/// Longest bar in a dimension; 0 when the dimension is empty.
pub fn max_persistence<T: Real>(diagram: &PersistenceDiagram<T>, dim: usize) -> T {
    max_persistence_with(diagram, dim, Essentials::default())
}

pub fn max_persistence_with<T: Real>(
    diagram: &PersistenceDiagram<T>,
    dim: usize,
    essentials: Essentials,
) -> T {
    effective_pairs(diagram, dim, essentials)
        .iter()
        .map(|&(b, d)| d - b)
        .fold(T::zero(), |m, p| m.max(p))
}

/// Sum of bar lengths in a dimension; 0 when empty.
pub fn amplitude<T: Real>(diagram: &PersistenceDiagram<T>, dim: usize) -> T {
    amplitude_with(diagram, dim, Essentials::default())
}

pub fn amplitude_with<T: Real>(
    diagram: &PersistenceDiagram<T>,
    dim: usize,
    essentials: Essentials,
) -> T {
    effective_pairs(diagram, dim, essentials)
        .iter()
        .map(|&(b, d)| d - b)
        .fold(T::zero(), |acc, p| acc + p)
}

/// Normalized persistence entropy with a degeneracy flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy<T> {
    pub value: T,
    /// Set when the formula was undefined (empty dimension, zero amplitude,
    /// single pair, or a unit amplitude whose log vanishes).
    pub degenerate: bool,
}

/// Normalized persistence entropy in the primary (amplitude-log) form.
pub fn persistence_entropy<T: Real>(diagram: &PersistenceDiagram<T>, dim: usize) -> T {
    persistence_entropy_with(
        diagram,
        dim,
        EntropyNormalization::default(),
        Essentials::default(),
    )
    .value
}

pub fn persistence_entropy_with<T: Real>(
    diagram: &PersistenceDiagram<T>,
    dim: usize,
    normalization: EntropyNormalization,
    essentials: Essentials,
) -> Entropy<T> {
    let pairs = effective_pairs(diagram, dim, essentials);
    let total: T = pairs.iter().map(|&(b, d)| d - b).sum();
    if pairs.len() < 2 || total <= T::zero() {
        return Entropy {
            value: T::zero(),
            degenerate: true,
        };
    }
    let raw: T = pairs
        .iter()
        .map(|&(b, d)| {
            let p = (d - b) / total;
            if p > T::zero() {
                -(p * p.log2())
            } else {
                T::zero()
            }
        })
        .sum();
    let denom = match normalization {
        EntropyNormalization::AmplitudeLog => total.log2(),
        EntropyNormalization::PairCountLog => T::of_usize(pairs.len()).log2(),
    };
    if denom == T::zero() {
        return Entropy {
            value: T::zero(),
            degenerate: true,
        };
    }
    Entropy {
        value: raw / denom,
        degenerate: false,
    }
}

/// The four polynomial diagram summaries, subtraction form.
pub fn f_family<T: Real>(diagram: &PersistenceDiagram<T>, dim: usize) -> [T; 4] {
    f_family_with(diagram, dim, FFamilyForm::default(), Essentials::default())
}

pub fn f_family_with<T: Real>(
    diagram: &PersistenceDiagram<T>,
    dim: usize,
    form: FFamilyForm,
    essentials: Essentials,
) -> [T; 4] {
    let pairs = effective_pairs(diagram, dim, essentials);
    let d_max = pairs
        .iter()
        .map(|&(_, d)| d)
        .fold(T::zero(), |m, d| m.max(d));
    let mut f = [T::zero(); 4];
    for &(b, d) in &pairs {
        let life = d - b;
        let tail = d_max - d;
        f[0] += b * life;
        f[2] += b * b * life.powi(4);
        match form {
            FFamilyForm::Subtraction => {
                f[1] += tail - life;
                f[3] += tail * tail - life.powi(4);
            }
            FFamilyForm::Product => {
                f[1] += tail * life;
                f[3] += tail * tail * life.powi(4);
            }
        }
    }
    f
}

/// Area under a Betti curve (trapezoidal), normalized by the filtration cap.
pub fn betti_summary<T: Real>(curve: &BettiCurve<T>) -> T {
    if curve.grid.len() < 2 {
        return T::zero();
    }
    let mut area = T::zero();
    for i in 0..curve.grid.len() - 1 {
        let width = curve.grid[i + 1] - curve.grid[i];
        let avg = T::of_usize(curve.counts[i] + curve.counts[i + 1]) / T::of(2.0);
        area += width * avg;
    }
    let span = *curve.grid.last().expect("non-empty grid");
    if span > T::zero() {
        area / span
    } else {
        T::zero()
    }
}

fn central_moments<T: Real>(samples: &[T]) -> Result<(f64, f64, f64, f64), IndicatorError> {
    if samples.len() < 4 {
        return Err(IndicatorError::TooFewSamples(samples.len()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s.as_f64()).sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for s in samples {
        let d = s.as_f64() - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 == 0.0 {
        return Err(IndicatorError::ZeroVariance);
    }
    Ok((mean, m2, m3, m4))
}

/// Population skewness (third standardized moment).
pub fn skewness<T: Real>(chunk: &TimeSeriesChunk<T>) -> Result<T, IndicatorError> {
    let (_, m2, m3, _) = central_moments(chunk.samples())?;
    Ok(T::of(m3 / m2.powf(1.5)))
}

/// Population excess kurtosis (fourth standardized moment minus 3).
pub fn kurtosis<T: Real>(chunk: &TimeSeriesChunk<T>) -> Result<T, IndicatorError> {
    let (_, m2, _, m4) = central_moments(chunk.samples())?;
    Ok(T::of(m4 / (m2 * m2) - 3.0))
}

// ---------------------------------------------------------------------------
// Per-chunk indicator vector
// ---------------------------------------------------------------------------

/// Parameter that is either selected by the data-driven heuristic or pinned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamChoice {
    Auto(Auto),
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

impl ParamChoice {
    pub fn auto() -> Self {
        Self::Auto(Auto::Auto)
    }

    pub fn fixed(&self) -> Option<usize> {
        match self {
            Self::Auto(_) => None,
            Self::Fixed(v) => Some(*v),
        }
    }
}

/// Delay-embedding configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbeddingConfig {
    /// Delay in samples, or `"auto"` for the mutual-information heuristic.
    pub tau: ParamChoice,
    /// Embedding dimension, or `"auto"` for the false-nearest-neighbor scan.
    pub dim: ParamChoice,
    /// Lag range for the delay heuristic.
    pub max_tau: usize,
    /// Dimension cap for the FNN scan.
    pub max_dim: usize,
    /// Heuristics run on at most this many leading samples.
    pub selection_samples: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            tau: ParamChoice::auto(),
            // Loop-dominated vibration signals reduce to two dimensions; the
            // heuristic stays available behind "auto".
            dim: ParamChoice::Fixed(2),
            max_tau: 64,
            max_dim: 8,
            selection_samples: 4096,
        }
    }
}

/// Point-cloud subsampling configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubsampleConfig {
    pub target_points: usize,
    pub strategy: SubsampleStrategy,
}

impl Default for SubsampleConfig {
    fn default() -> Self {
        Self {
            target_points: 400,
            strategy: SubsampleStrategy::Maxmin,
        }
    }
}

/// Persistent-homology configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PersistenceConfig {
    pub max_dim: usize,
    /// Filtration cap; `null` means the maximum pairwise distance.
    pub max_filtration: Option<f64>,
    pub simplex_budget: usize,
    pub betti_grid: usize,
}

impl Default for PersistenceConfig {
    fn default() -> Self {
        Self {
            max_dim: 1,
            max_filtration: None,
            simplex_budget: DEFAULT_SIMPLEX_BUDGET,
            betti_grid: 256,
        }
    }
}

fn default_bands() -> Vec<Band> {
    vec![
        Band {
            lo_hz: 1000.0,
            hi_hz: 1800.0,
        },
        Band {
            lo_hz: 1800.0,
            hi_hz: 2300.0,
        },
        Band {
            lo_hz: 2300.0,
            hi_hz: 3000.0,
        },
    ]
}

fn default_true() -> bool {
    true
}

/// Spectral indicator configuration; omit to skip spectral indicators
/// entirely (short sliding windows cannot support them).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralIndicatorConfig {
    /// Peak-tracking bands.
    #[serde(default = "default_bands")]
    pub bands: Vec<Band>,
    /// Compute the demodulated band RMS (needs >= 1 s of signal).
    #[serde(default = "default_true")]
    pub demodulated_rms: bool,
}

impl Default for SpectralIndicatorConfig {
    fn default() -> Self {
        Self {
            bands: default_bands(),
            demodulated_rms: true,
        }
    }
}

fn default_spectral() -> Option<SpectralIndicatorConfig> {
    Some(SpectralIndicatorConfig::default())
}

/// Everything needed to turn one chunk into an indicator vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub embedding: EmbeddingConfig,
    pub subsample: SubsampleConfig,
    pub persistence: PersistenceConfig,
    pub spectral: Option<SpectralIndicatorConfig>,
    pub essentials: Essentials,
    pub entropy_normalization: EntropyNormalization,
    pub f_family_form: FFamilyForm,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            embedding: EmbeddingConfig::default(),
            subsample: SubsampleConfig::default(),
            persistence: PersistenceConfig::default(),
            spectral: default_spectral(),
            essentials: Essentials::default(),
            entropy_normalization: EntropyNormalization::default(),
            f_family_form: FFamilyForm::default(),
        }
    }
}

/// Where an indicator vector came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub timestamp: DateTime<Utc>,
    pub sensor_id: String,
    /// `None` for a full chunk, or the window offset in seconds.
    pub window_offset_s: Option<f64>,
    pub embedding: EmbeddingParams,
}

/// Named scalar indicators for one chunk or window, in registry order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorVector {
    values: IndexMap<String, f64>,
    pub provenance: Provenance,
}

impl IndicatorVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Appends a named value (used by the monitor for baseline-relative
    /// indicators that cannot be computed from a single chunk).
    pub fn insert(&mut self, name: impl Into<String>, value: f64) {
        self.values.insert(name.into(), value);
    }
}

/// Names of the topological and statistical indicators, in output order.
pub fn base_registry() -> Vec<&'static str> {
    vec![
        "max_persistence_h0",
        "max_persistence_h1",
        "entropy_h0",
        "entropy_h1",
        "amplitude_h0",
        "amplitude_h1",
        "betti_auc_h1",
        "f1_h0",
        "f2_h0",
        "f3_h0",
        "f4_h0",
        "f1_h1",
        "f2_h1",
        "f3_h1",
        "f4_h1",
        "gyration_radius",
        "skewness",
        "kurtosis_excess",
    ]
}

/// Full registry for a configuration, including spectral columns.
pub fn registry(config: &AnalysisConfig) -> Vec<String> {
    let mut names: Vec<String> = base_registry().iter().map(|s| s.to_string()).collect();
    if let Some(spectral) = &config.spectral {
        if spectral.demodulated_rms {
            names.push("band_rms_demodulated".into());
        }
        for b in 0..spectral.bands.len() {
            names.push(format!("peak_freq_hz_b{}", b + 1));
            names.push(format!("peak_height_b{}", b + 1));
            names.push(format!("peak_width_hz_b{}", b + 1));
        }
    }
    names
}

/// Runs embed -> subsample -> persistence -> summaries for one chunk,
/// together with the statistical and spectral indicators.
///
/// Deterministic for a fixed `(chunk, config, seed)`; the seed drives the
/// maxmin subsampling start.
pub fn indicator_vector<T: Real + FftNum>(
    chunk: &TimeSeriesChunk<T>,
    config: &AnalysisConfig,
    seed: u64,
) -> Result<IndicatorVector, IndicatorError> {
    let series = chunk.samples();

    let skew = skewness(chunk)?;
    let kurt = kurtosis(chunk)?;

    // Parameter heuristics run on a truncated prefix; FNN cost is quadratic.
    let head = &series[..series.len().min(config.embedding.selection_samples)];
    let tau = match config.embedding.tau.fixed() {
        Some(tau) => tau,
        None => {
            let max_tau = config.embedding.max_tau.min(head.len() / 4);
            select_delay_mi(head, max_tau.max(1))?
        }
    };
    let dim = match config.embedding.dim.fixed() {
        Some(dim) => dim,
        None => select_dim_fnn(head, tau, config.embedding.max_dim)?.dim.max(2),
    };
    let params = EmbeddingParams { tau, dim };

    let cloud = takens_embed(series, params)?;
    let gyration = gyration_radius(&cloud);
    let landmarks = subsample(
        &cloud,
        config.subsample.target_points,
        config.subsample.strategy,
        seed,
    )?;
    let diagram = rips_persistence(
        &landmarks,
        config.persistence.max_dim,
        config.persistence.max_filtration.map(T::of),
        config.persistence.simplex_budget,
    )?;

    let essentials = config.essentials;
    let curve_h1 = betti_curve(&diagram, 1, config.persistence.betti_grid)?;

    let mut values = IndexMap::new();
    values.insert(
        "max_persistence_h0".to_string(),
        max_persistence_with(&diagram, 0, essentials).as_f64(),
    );
    values.insert(
        "max_persistence_h1".to_string(),
        max_persistence_with(&diagram, 1, essentials).as_f64(),
    );
    values.insert(
        "entropy_h0".to_string(),
        persistence_entropy_with(&diagram, 0, config.entropy_normalization, essentials)
            .value
            .as_f64(),
    );
    values.insert(
        "entropy_h1".to_string(),
        persistence_entropy_with(&diagram, 1, config.entropy_normalization, essentials)
            .value
            .as_f64(),
    );
    values.insert(
        "amplitude_h0".to_string(),
        amplitude_with(&diagram, 0, essentials).as_f64(),
    );
    values.insert(
        "amplitude_h1".to_string(),
        amplitude_with(&diagram, 1, essentials).as_f64(),
    );
    values.insert(
        "betti_auc_h1".to_string(),
        betti_summary(&curve_h1).as_f64(),
    );
    for (dim_k, suffix) in [(0usize, "h0"), (1, "h1")] {
        let f = f_family_with(&diagram, dim_k, config.f_family_form, essentials);
        for (i, v) in f.into_iter().enumerate() {
            values.insert(format!("f{}_{}", i + 1, suffix), v.as_f64());
        }
    }
    values.insert("gyration_radius".into(), gyration.as_f64());
    values.insert("skewness".into(), skew.as_f64());
    values.insert("kurtosis_excess".into(), kurt.as_f64());

    if let Some(spectral_cfg) = &config.spectral {
        if spectral_cfg.demodulated_rms {
            let rms = band_rms_demodulated(chunk)?;
            values.insert("band_rms_demodulated".into(), rms.as_f64());
        }
        let spectrum = fft_magnitude(chunk);
        for (b, &band) in spectral_cfg.bands.iter().enumerate() {
            let peak = dominant_peak(&spectrum, band)?;
            values.insert(format!("peak_freq_hz_b{}", b + 1), peak.freq_hz);
            values.insert(format!("peak_height_b{}", b + 1), peak.height.as_f64());
            values.insert(format!("peak_width_hz_b{}", b + 1), peak.width_hz);
        }
    }

    Ok(IndicatorVector {
        values,
        provenance: Provenance {
            timestamp: chunk.timestamp,
            sensor_id: chunk.sensor_id.clone(),
            window_offset_s: None,
            embedding: params,
        },
    })
}
