//! Deterministic growth classification for measured series.
//!
//! The verdict is a pure function of the points. Checks run in a fixed
//! order with frozen thresholds chosen to separate the regimes that appear
//! at desk scale with wide margins: exponential, then logarithmic, then
//! constant, then the two least-squares fits. The logarithmic check demands
//! overall growth, so it never claims a series the constant band would
//! keep.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Growth {
    Constant,
    Logarithmic,
    Linear,
    Linearithmic,
    Exponential,
    Inconclusive,
}

impl Growth {
    pub const ALL: [Growth; 6] = [
        Growth::Constant,
        Growth::Logarithmic,
        Growth::Linear,
        Growth::Linearithmic,
        Growth::Exponential,
        Growth::Inconclusive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Growth::Constant => "constant",
            Growth::Logarithmic => "logarithmic",
            Growth::Linear => "linear",
            Growth::Linearithmic => "linearithmic",
            Growth::Exponential => "exponential",
            Growth::Inconclusive => "inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Growth> {
        Growth::ALL.iter().copied().find(|g| g.name() == s)
    }
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A measured series together with its verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthSeries {
    pub points: Vec<(u64, u64)>,
    pub verdict: Growth,
}

impl GrowthSeries {
    pub fn classify(points: Vec<(u64, u64)>) -> GrowthSeries {
        let verdict = classify(&points);
        GrowthSeries { points, verdict }
    }
}

/// Spread tolerated by the constant verdict, in the series' own unit. A
/// series inside the band that still grows end to end reads as logarithmic
/// first.
const CONSTANT_BAND: u64 = 2;
/// Minimum per-unit ratio certifying exponential growth on the tail.
const EXPONENTIAL_RATIO: f64 = 1.5;
/// Largest increment per doubling of n tolerated unconditionally by the
/// logarithmic verdict.
const DOUBLING_INCREMENT: u64 = 8;
/// Larger increments still count as logarithmic when they are flat across
/// doublings: max <= FACTOR * min + SLACK, and not consistently doubling
/// (which is the linear signature on a doubling grid).
const LOG_SPREAD_FACTOR: u64 = 2;
const LOG_SPREAD_SLACK: u64 = 2;
/// Largest relative root-mean-square residual accepted by the fits.
const FIT_RESIDUAL: f64 = 0.15;

fn is_exponential(points: &[(u64, u64)]) -> bool {
    // Skip the first pair; small-n warmup often lags the regime.
    let pairs = points.windows(2).skip(1);
    let mut any = false;
    for w in pairs {
        let (n0, v0) = w[0];
        let (n1, v1) = w[1];
        if v0 == 0 {
            return false;
        }
        let per_unit = EXPONENTIAL_RATIO.powi((n1 - n0) as i32);
        if (v1 as f64) < (v0 as f64) * per_unit {
            return false;
        }
        any = true;
    }
    any
}

fn is_logarithmic(points: &[(u64, u64)]) -> bool {
    if points.last().unwrap().1 <= points.first().unwrap().1 {
        return false;
    }
    let mut increments = Vec::new();
    for (i, (n, v)) in points.iter().enumerate() {
        for (m, w) in points.iter().skip(i + 1) {
            if *m == 2 * n {
                increments.push(w.saturating_sub(*v));
            }
        }
    }
    if increments.len() < 2 {
        return false;
    }
    if increments.iter().all(|d| *d <= DOUBLING_INCREMENT) {
        return true;
    }
    let lo = *increments.iter().min().unwrap();
    let hi = *increments.iter().max().unwrap();
    let (first, last) = (increments[0], *increments.last().unwrap());
    hi <= LOG_SPREAD_FACTOR * lo + LOG_SPREAD_SLACK && !(first >= 1 && last >= 2 * first)
}

/// Relative RMS residual of the least-squares affine fit of v against x.
fn affine_residual(xs: &[f64], vs: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let mv = vs.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxv: f64 = xs.iter().zip(vs).map(|(x, v)| (x - mx) * (v - mv)).sum();
    if sxx == 0.0 || mv <= 0.0 {
        return f64::INFINITY;
    }
    let b = sxv / sxx;
    if b <= 0.0 {
        return f64::INFINITY;
    }
    let a = mv - b * mx;
    let sse: f64 = xs
        .iter()
        .zip(vs)
        .map(|(x, v)| {
            let e = v - (a + b * x);
            e * e
        })
        .sum();
    (sse / k).sqrt() / mv
}

pub fn classify(points: &[(u64, u64)]) -> Growth {
    if points.len() < 4 || points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Growth::Inconclusive;
    }
    let values: Vec<u64> = points.iter().map(|p| p.1).collect();
    let max = *values.iter().max().unwrap();
    let min = *values.iter().min().unwrap();
    if is_exponential(points) {
        return Growth::Exponential;
    }
    // Before the constant band: logarithmic growth at desk scale can drift
    // by a bit or two across the whole range, and such a series reads as
    // growth, not noise. The band catches series with no overall growth.
    if is_logarithmic(points) {
        return Growth::Logarithmic;
    }
    if max - min <= CONSTANT_BAND {
        return Growth::Constant;
    }
    // Fits need visible growth beyond the constant band.
    if points.last().unwrap().1 > points.first().unwrap().1 + CONSTANT_BAND {
        let vs: Vec<f64> = values.iter().map(|v| *v as f64).collect();
        let lin_xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
        let nlogn_xs: Vec<f64> = points
            .iter()
            .map(|p| {
                let n = p.0 as f64;
                n * n.max(1.0).log2()
            })
            .collect();
        let lin = affine_residual(&lin_xs, &vs);
        let nlogn = affine_residual(&nlogn_xs, &vs);
        if lin <= nlogn && lin < FIT_RESIDUAL {
            return Growth::Linear;
        }
        if nlogn < FIT_RESIDUAL {
            return Growth::Linearithmic;
        }
    }
    Growth::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_example_series_classify_as_documented() {
        assert_eq!(classify(&[(2, 4), (4, 5), (8, 6), (16, 7)]), Growth::Logarithmic);
        assert_eq!(classify(&[(2, 4), (3, 8), (4, 16), (5, 32)]), Growth::Exponential);
        assert_eq!(classify(&[(2, 10), (4, 20), (8, 40), (16, 80)]), Growth::Linear);
    }

    #[test]
    fn flat_series_are_constant_within_the_band() {
        assert_eq!(classify(&[(1, 9), (2, 9), (3, 9), (4, 9)]), Growth::Constant);
        assert_eq!(classify(&[(1, 9), (2, 11), (3, 10), (4, 9)]), Growth::Constant);
        // A one-bit end-to-end rise on a doubling grid is growth, however
        // small: the logarithmic verdict takes it.
        assert_eq!(classify(&[(2, 53), (4, 53), (8, 54), (16, 54)]), Growth::Logarithmic);
    }

    #[test]
    fn flat_doubling_increments_classify_as_logarithmic() {
        // Logarithmic shape with a large per-doubling constant: +44 each
        // time n doubles.
        let pts = [(2, 522), (4, 566), (8, 610), (16, 654), (32, 698)];
        assert_eq!(classify(&pts), Growth::Logarithmic);
        // Increments that themselves double are linear, not logarithmic.
        assert_eq!(classify(&[(2, 10), (4, 20), (8, 40), (16, 80)]), Growth::Linear);
    }

    #[test]
    fn linearithmic_beats_linear_when_it_fits_better() {
        let pts: Vec<(u64, u64)> = [2u64, 4, 8, 16, 32]
            .iter()
            .map(|n| (*n, (*n as f64 * (*n as f64).log2()) as u64))
            .collect();
        assert_eq!(classify(&pts), Growth::Linearithmic);
    }

    #[test]
    fn degenerate_series_are_inconclusive() {
        assert_eq!(classify(&[(1, 1), (2, 2), (3, 4)]), Growth::Inconclusive);
        assert_eq!(classify(&[(2, 4), (2, 5), (3, 6), (4, 7)]), Growth::Inconclusive);
        assert_eq!(classify(&[(4, 4), (2, 5), (8, 6), (16, 7)]), Growth::Inconclusive);
        // Shrinking series fit nothing.
        assert_eq!(classify(&[(1, 40), (2, 30), (4, 20), (8, 10)]), Growth::Inconclusive);
    }

    #[test]
    fn dense_sampling_still_finds_the_log_and_exponential_regimes() {
        // Bit-space shape of a log-growing run sampled at every length.
        let log_pts: Vec<(u64, u64)> = (2..=16u64).map(|n| (n, 50 + crate::bits(n) * 4)).collect();
        assert_eq!(classify(&log_pts), Growth::Logarithmic);
        // Quadrupling per step, the environment-explosion shape.
        let exp_pts: Vec<(u64, u64)> = (2..=10u64).map(|n| (n, 3 << (2 * n))).collect();
        assert_eq!(classify(&exp_pts), Growth::Exponential);
        // Steady slope sampled densely.
        let lin_pts: Vec<(u64, u64)> = (2..=12u64).map(|n| (n, 160 + 32 * n)).collect();
        assert_eq!(classify(&lin_pts), Growth::Linear);
    }
}
