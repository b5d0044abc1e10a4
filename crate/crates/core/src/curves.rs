//! Exploration curves and the metrics used to compare them.
//!
//! A curve is a time-binned series: per bin, the number of novel arena cells
//! discovered and the number of grid lines crossed. Metrics work on any
//! numeric series so they apply equally to single runs (integer counts) and
//! replicate means (reals).

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("series is empty")]
    EmptySeries,
    #[error("series total is zero")]
    ZeroTotal,
    #[error("fraction {0} is outside (0, 1]")]
    BadFraction(String),
    #[error("smoothing window {0} must be odd and at least 1")]
    BadWindow(usize),
    #[error("bin widths differ ({0} vs {1})")]
    BinWidthMismatch(u64, u64),
}

/// Per-bin event counts for one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExplorationCurve {
    pub bin_width: u64,
    pub novel: Vec<u32>,
    pub crossings: Vec<u32>,
}

impl ExplorationCurve {
    pub fn new(bin_width: u64) -> Self {
        Self {
            bin_width,
            novel: Vec::new(),
            crossings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.novel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.novel.is_empty()
    }

    pub fn novel_total(&self) -> u64 {
        self.novel.iter().map(|&n| u64::from(n)).sum()
    }

    pub fn crossings_total(&self) -> u64 {
        self.crossings.iter().map(|&n| u64::from(n)).sum()
    }

    /// Checks the per-bin invariants `novel <= crossings <= bin_width`.
    pub fn is_consistent(&self) -> bool {
        self.novel.len() == self.crossings.len()
            && self
                .novel
                .iter()
                .zip(&self.crossings)
                .all(|(&n, &c)| n <= c && u64::from(c) <= self.bin_width)
    }
}

/// A real-valued curve, e.g. a replicate mean or a curve read from a file
/// that holds means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealCurve {
    pub bin_width: u64,
    pub novel: Vec<f64>,
    pub crossings: Vec<f64>,
}

impl From<&ExplorationCurve> for RealCurve {
    fn from(c: &ExplorationCurve) -> Self {
        Self {
            bin_width: c.bin_width,
            novel: c.novel.iter().map(|&n| f64::from(n)).collect(),
            crossings: c.crossings.iter().map(|&n| f64::from(n)).collect(),
        }
    }
}

/// Anything that exposes a binned novel-cell series.
pub trait NovelSeries {
    fn bin_width(&self) -> u64;
    fn novel_values(&self) -> Vec<f64>;
}

impl NovelSeries for ExplorationCurve {
    fn bin_width(&self) -> u64 {
        self.bin_width
    }
    fn novel_values(&self) -> Vec<f64> {
        self.novel.iter().map(|&n| f64::from(n)).collect()
    }
}

impl NovelSeries for RealCurve {
    fn bin_width(&self) -> u64 {
        self.bin_width
    }
    fn novel_values(&self) -> Vec<f64> {
        self.novel.clone()
    }
}

/// Area under the curve by the rectangle rule (a plain sum of bins).
pub fn auc<T: Copy + Into<f64>>(series: &[T]) -> f64 {
    series.iter().map(|&v| v.into()).sum()
}

/// Earliest index attaining the maximum.
pub fn peak_bin<T: Copy + PartialOrd>(series: &[T]) -> Result<(usize, T), CurveError> {
    let (&first, rest) = series.split_first().ok_or(CurveError::EmptySeries)?;
    let mut best = (0, first);
    for (i, &v) in rest.iter().enumerate() {
        if v > best.1 {
            best = (i + 1, v);
        }
    }
    Ok(best)
}

/// Smallest bin whose cumulative sum reaches `q` of the total.
pub fn time_to_fraction<T: Copy + Into<f64>>(series: &[T], q: f64) -> Result<usize, CurveError> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(CurveError::BadFraction(q.to_string()));
    }
    let total = auc(series);
    if total <= 0.0 {
        return Err(CurveError::ZeroTotal);
    }
    let threshold = q * total;
    let mut cumulative = 0.0;
    for (i, &v) in series.iter().enumerate() {
        cumulative += v.into();
        if cumulative >= threshold {
            return Ok(i);
        }
    }
    // Rounding in the running sum can leave it a hair short of `total`.
    Ok(series.len() - 1)
}

/// Centred moving average; windows are truncated at the edges.
pub fn smooth<T: Copy + Into<f64>>(series: &[T], window: usize) -> Result<Vec<f64>, CurveError> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(CurveError::BadWindow(window));
    }
    let half = window / 2;
    let values: Vec<f64> = series.iter().map(|&v| v.into()).collect();
    Ok((0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(values.len());
            let span = &values[lo..hi];
            span.iter().sum::<f64>() / span.len() as f64
        })
        .collect())
}

/// True if the series rises then falls, tolerating wobble up to `epsilon`.
///
/// The rising prefix may extend as far as every step satisfies
/// `next >= prev - epsilon`; the falling suffix must begin no later than
/// that, with every step satisfying `next <= prev + epsilon`.
pub fn is_unimodal(series: &[f64], epsilon: f64) -> bool {
    let rise_end = series
        .windows(2)
        .position(|w| w[1] < w[0] - epsilon)
        .unwrap_or(series.len().saturating_sub(1));
    series[rise_end.min(series.len())..]
        .windows(2)
        .all(|w| w[1] <= w[0] + epsilon)
}

/// Timing and mass differences of `b` relative to `a`, on the novel series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftStats {
    pub delta_t50: i64,
    pub delta_peak: i64,
    pub auc_ratio: f64,
}

pub fn shift_stats<A: NovelSeries, B: NovelSeries>(a: &A, b: &B) -> Result<ShiftStats, CurveError> {
    if a.bin_width() != b.bin_width() {
        return Err(CurveError::BinWidthMismatch(a.bin_width(), b.bin_width()));
    }
    let (sa, sb) = (a.novel_values(), b.novel_values());
    let (auc_a, auc_b) = (auc(&sa), auc(&sb));
    if auc_a <= 0.0 || auc_b <= 0.0 {
        return Err(CurveError::ZeroTotal);
    }
    let t50 = |s: &[f64]| time_to_fraction(s, 0.5).map(|i| i as i64);
    let peak = |s: &[f64]| peak_bin(s).map(|(i, _)| i as i64);
    Ok(ShiftStats {
        delta_t50: t50(&sb)? - t50(&sa)?,
        delta_peak: peak(&sb)? - peak(&sa)?,
        auc_ratio: auc_b / auc_a,
    })
}
