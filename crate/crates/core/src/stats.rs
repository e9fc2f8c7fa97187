//! Sub-Gaussian confidence intervals, sample-size planning and seeded streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{parameter, Result};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return parameter(format!("confidence budget must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

/// Half-width `σ √(2 ln(2/α) / n)` of a two-sided sub-Gaussian interval.
pub fn hoeffding_halfwidth(n: u64, sigma: f64, alpha: f64) -> Result<f64> {
    if n == 0 {
        return parameter("sample count must be at least 1");
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return parameter(format!("sigma must be positive, got {sigma}"));
    }
    check_alpha(alpha)?;
    Ok(sigma * (2.0 * (2.0 / alpha).ln() / n as f64).sqrt())
}

/// Smallest `n` whose half-width is at most `halfwidth`.
///
/// With `sigma == 0` a single sample is exact, so the answer is 1.
pub fn samples_needed(halfwidth: f64, sigma: f64, alpha: f64) -> Result<u64> {
    if !(halfwidth > 0.0 && halfwidth.is_finite()) {
        return parameter(format!("target half-width must be positive, got {halfwidth}"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return parameter(format!("sigma must be non-negative, got {sigma}"));
    }
    check_alpha(alpha)?;
    if sigma == 0.0 {
        return Ok(1);
    }
    let raw = (2.0 * sigma * sigma * (2.0 / alpha).ln() / (halfwidth * halfwidth)).ceil();
    if raw > 1e18 {
        return parameter(format!("half-width {halfwidth} needs more than 1e18 samples"));
    }
    let mut n = (raw as u64).max(1);
    // the closed form can be off by one after rounding
    while hoeffding_halfwidth(n, sigma, alpha)? > halfwidth {
        n += 1;
    }
    while n > 1 && hoeffding_halfwidth(n - 1, sigma, alpha)? <= halfwidth {
        n -= 1;
    }
    Ok(n)
}

/// Upper bound `2 (2σ²/m) exp(-m²/(4σ²))` on the bias introduced by clamping
/// a difference of two sub-Gaussian(σ²) samples to `[-m, m]`.
pub fn truncation_bias_bound(m: f64, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return parameter(format!("sigma must be non-negative, got {sigma}"));
    }
    if !(m >= 2.0 * sigma) || m <= 0.0 {
        return parameter(format!("threshold {m} is below 2σ = {}", 2.0 * sigma));
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let s2 = sigma * sigma;
    Ok(2.0 * (2.0 * s2 / m) * (-m * m / (4.0 * s2)).exp())
}

/// A symmetric interval around a sample mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    pub alpha: f64,
    pub n: u64,
}

impl ConfidenceInterval {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, v: f64) -> bool {
        (self.lower()..=self.upper()).contains(&v)
    }
}

/// Streaming mean with compensated summation.
#[derive(Debug, Clone)]
pub struct RunningMean {
    n: u64,
    sum: f64,
    comp: f64,
    sigma: f64,
    alpha: f64,
}

impl RunningMean {
    pub fn new(sigma: f64, alpha: f64) -> Self {
        Self { n: 0, sum: 0.0, comp: 0.0, sigma, alpha }
    }

    pub fn push(&mut self, v: f64) {
        // Neumaier's variant of Kahan summation
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
        self.n += 1;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// `NaN` before the first sample.
    pub fn mean(&self) -> f64 {
        (self.sum + self.comp) / self.n as f64
    }

    pub fn interval(&self) -> Result<ConfidenceInterval> {
        let half_width = if self.sigma == 0.0 {
            check_alpha(self.alpha)?;
            0.0
        } else {
            hoeffding_halfwidth(self.n, self.sigma, self.alpha)?
        };
        Ok(ConfidenceInterval { center: self.mean(), half_width, alpha: self.alpha, n: self.n })
    }
}

impl Extend<f64> for RunningMean {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.push(v);
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `root`; independent of evaluation order.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Random stream `index` under `root`.
pub fn stream_rng(root: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn quadrupling_halves_width() {
        let a = hoeffding_halfwidth(100, 1.3, 0.05).unwrap();
        let b = hoeffding_halfwidth(400, 1.3, 0.05).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn width_limit_near_alpha_one() {
        let w = hoeffding_halfwidth(10, 2.0, 1.0 - 1e-12).unwrap();
        let lim = 2.0 * (2.0 * 2f64.ln() / 10.0).sqrt();
        assert!((w - lim).abs() < 1e-9);
    }

    #[test]
    fn halfwidth_rejects_bad_input() {
        assert!(hoeffding_halfwidth(0, 1.0, 0.1).is_err());
        assert!(hoeffding_halfwidth(1, 0.0, 0.1).is_err());
        assert!(hoeffding_halfwidth(1, 1.0, 1.0).is_err());
        assert!(hoeffding_halfwidth(1, 1.0, 0.0).is_err());
        assert!(samples_needed(0.0, 1.0, 0.1).is_err());
        assert!(samples_needed(1.0, -1.0, 0.1).is_err());
    }

    #[test]
    fn rounding_sample_count() {
        for &(eps, delta) in &[(1.0, 0.2), (0.5, 0.05), (2.0, 0.1), (0.3, 0.01)] {
            let n = samples_needed(eps / 4.0, 1.0, delta / 4.0).unwrap();
            let closed = (32.0 / (eps * eps) * (8.0 / delta as f64).ln()).ceil() as u64;
            assert_eq!(n, closed);
        }
    }

    #[test]
    fn steepest_batch_count() {
        let (sig, h, delta, e, t) = (0.5f64, 0.125f64, 0.2f64, 3.0f64, 16.0f64);
        let n = samples_needed(h, sig, delta / (e * t)).unwrap();
        let closed = (2.0 * sig * sig / (h * h) * (2.0 * e * t / delta).ln()).ceil() as u64;
        assert_eq!(n, closed);
    }

    #[test]
    fn inverse_consistency() {
        for &(h, s, a) in &[(0.1, 1.0, 0.05), (0.37, 2.5, 0.2), (1.0, 0.5, 0.01), (3.0, 1.0, 0.5)] {
            let n = samples_needed(h, s, a).unwrap();
            assert!(hoeffding_halfwidth(n, s, a).unwrap() <= h);
            if n > 1 {
                assert!(hoeffding_halfwidth(n - 1, s, a).unwrap() > h);
            }
            let n2 = samples_needed(h / 2.0, s, a).unwrap();
            assert!(n2 >= 4 * n - 4 && n2 <= 4 * n);
        }
        assert_eq!(samples_needed(0.1, 0.0, 0.1).unwrap(), 1);
    }

    #[test]
    fn bias_bound_behaviour() {
        let b4 = truncation_bias_bound(4.0, 1.0).unwrap();
        assert!((b4 - 2.0 * 0.5 * (-4.0f64).exp()).abs() < 1e-15);
        assert!(truncation_bias_bound(5.0, 1.0).unwrap() < b4);
        assert!(truncation_bias_bound(60.0, 1.0).unwrap() < 1e-300);
        assert!(truncation_bias_bound(1.9, 1.0).is_err());
    }

    #[test]
    fn running_mean_matches_exact_sum() {
        // samples are dyadic rationals, so the exact sum fits in i128
        let mut rng = stream_rng(7, 0);
        let mut rm = RunningMean::new(1.0, 0.1);
        let mut exact: i128 = 0;
        let n = 1_000_000u64;
        for _ in 0..n {
            let mag = rng.random_range(0..40);
            let m: i64 = rng.random_range(-(1i64 << 12)..(1i64 << 12)) << mag;
            exact += m as i128;
            rm.push(m as f64 / (1u64 << 20) as f64);
        }
        let truth = exact as f64 / (1u64 << 20) as f64 / n as f64;
        assert!(((rm.mean() - truth) / truth).abs() <= 1e-12, "{} vs {truth}", rm.mean());
        assert_eq!(rm.count(), n);
    }

    #[test]
    fn empirical_coverage() {
        let mut rng = stream_rng(11, 3);
        let sigma = 1.5;
        let normal = Normal::new(2.0, sigma).unwrap();
        let trials = 2000;
        let mut hits = 0;
        for _ in 0..trials {
            let mut rm = RunningMean::new(sigma, 0.1);
            rm.extend((0..8).map(|_| normal.sample(&mut rng)));
            if rm.interval().unwrap().contains(2.0) {
                hits += 1;
            }
        }
        assert!(hits as f64 / trials as f64 >= 0.88);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(1, 5).random();
        let b: u64 = stream_rng(1, 5).random();
        let c: u64 = stream_rng(1, 6).random();
        let d: u64 = stream_rng(2, 5).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
