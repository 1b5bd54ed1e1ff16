//! Mutual information of the interval-constrained Gaussian channel.
//!
//! `C(L, P0/σ)` is `I(u; y)` for `u ~ Unif` over an interval of length `L`
//! and `y = u + n`, `n ~ N(0, (σ/P0)²)`. The rate depends on `(L, P0/σ)`
//! only through the product `t = L · P0/σ`, so everything is computed in
//! noise units: `h(Y)` by adaptive Simpson quadrature of the closed-form
//! output density, minus `h(N) = ½ log2(2πe)`. A seeded Monte-Carlo plug-in
//! estimator provides an independent cross-check of the quadrature.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// ln(2π)
const LN_2PI: f64 = 1.8378770664093454;
/// ln(2πe)
const LN_2PI_E: f64 = 2.8378770664093454;

#[derive(Debug, Error, PartialEq)]
pub enum CapacityError {
    #[error("interval length L = {0} must be nonnegative")]
    NegativeLength(f64),
    #[error("rate R = {0} must be nonnegative")]
    NegativeRate(f64),
    #[error("P0/sigma = {0} must be positive and finite")]
    InvalidSnr(f64),
    #[error("rate {rate} bits/use is unreachable below the bracket cap L = {l_cap}")]
    RateUnreachable { rate: f64, l_cap: f64 },
}

/// Linear ratio of peak optical power to noise standard deviation.
///
/// The noise on the normalized channel is `N(0, (σ/P0)²)`, so the noise
/// scale is the reciprocal of this ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrRatio {
    p0_over_sigma: f64,
}

impl SnrRatio {
    pub fn from_linear(p0_over_sigma: f64) -> Result<Self, CapacityError> {
        if p0_over_sigma > 0.0 && p0_over_sigma.is_finite() {
            Ok(Self { p0_over_sigma })
        } else {
            Err(CapacityError::InvalidSnr(p0_over_sigma))
        }
    }

    /// Amplitude-style dB conversion: `10^(dB/20)`.
    pub fn from_db_amplitude(db: f64) -> Result<Self, CapacityError> {
        Self::from_linear(10f64.powf(db / 20.0))
    }

    /// Power-style dB conversion: `10^(dB/10)`.
    ///
    /// Optical path gains are linear in received power, so a P0/σ budget
    /// quoted in dB for an intensity-modulated link uses this convention.
    /// The reference indoor scenario ("70 dB") is reproduced with it; see
    /// the README for the discussion.
    pub fn from_db_power(db: f64) -> Result<Self, CapacityError> {
        Self::from_linear(10f64.powf(db / 10.0))
    }

    pub fn linear(&self) -> f64 {
        self.p0_over_sigma
    }

    /// σ/P0, the standard deviation of the normalized noise.
    pub fn noise_scale(&self) -> f64 {
        1.0 / self.p0_over_sigma
    }
}

/// Quadrature configuration for the differential-entropy integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Integration truncation beyond `[0, t]`, in noise standard deviations.
    pub tail_sigmas: f64,
    /// Absolute tolerance on `h(Y)` in nats, per integration panel.
    pub tol_nats: f64,
    /// Recursion depth cap for adaptive Simpson.
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            // Gaussian mass beyond 8 sigma is below 1e-15.
            tail_sigmas: 8.0,
            tol_nats: 1e-11,
            max_depth: 48,
        }
    }
}

/// `P(a < Z <= b)` for standard normal `Z`, arranged to avoid cancellation
/// in either tail.
fn normal_cdf_diff(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        0.5 * (libm::erfc(a * FRAC_1_SQRT_2) - libm::erfc(b * FRAC_1_SQRT_2))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b * FRAC_1_SQRT_2) - libm::erfc(-a * FRAC_1_SQRT_2))
    } else {
        1.0 - 0.5 * (libm::erfc(-a * FRAC_1_SQRT_2) + libm::erfc(b * FRAC_1_SQRT_2))
    }
}

/// Density of `Z = V + N` at `z`, with `V ~ Unif[0, t]` and `N` standard
/// normal: `(Φ(z) - Φ(z - t)) / t`.
///
/// For small `t` the CDF difference cancels catastrophically, so the density
/// switches to a midpoint expansion of the averaged Gaussian,
/// `φ(m)(1 + (m² - 1) t²/24)` with `m = z - t/2`, accurate to `O(t⁴)`.
pub(crate) fn output_density(t: f64, z: f64) -> f64 {
    if t <= 1e-3 {
        let m = z - 0.5 * t;
        let phi = (-0.5 * m * m - 0.5 * LN_2PI).exp();
        return phi * (1.0 + (m * m - 1.0) * t * t / 24.0);
    }
    normal_cdf_diff(z - t, z) / t
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        // Stop once the correction reaches the rounding floor of the panel,
        // otherwise tolerance halving below f64 noise never converges.
        let noise_floor = 1e-14 * (left.abs() + right.abs());
        if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= noise_floor {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a >= b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

/// `C` in bits for a normalized interval length `t = L · P0/σ`.
fn capacity_normalized(t: f64, quad: &QuadratureSpec) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let integrand = |z: f64| {
        let p = output_density(t, z);
        if p > 0.0 {
            -p * p.ln()
        } else {
            0.0
        }
    };
    // Split at the interval edges: the density has its error-function
    // roll-offs there and is flat in between.
    let lo = -quad.tail_sigmas;
    let hi = t + quad.tail_sigmas;
    let mut h_y = adaptive_simpson(&integrand, lo, 0.0, quad.tol_nats, quad.max_depth);
    h_y += adaptive_simpson(&integrand, 0.0, t, quad.tol_nats, quad.max_depth);
    h_y += adaptive_simpson(&integrand, t, hi, quad.tol_nats, quad.max_depth);
    (h_y - 0.5 * LN_2PI_E) / LN_2
}

fn check_length(l: f64) -> Result<(), CapacityError> {
    if l >= 0.0 && l.is_finite() {
        Ok(())
    } else {
        Err(CapacityError::NegativeLength(l))
    }
}

/// `C(L, P0/σ)` in bits per channel use, with the default quadrature.
pub fn capacity(l: f64, snr: SnrRatio) -> Result<f64, CapacityError> {
    check_length(l)?;
    Ok(capacity_normalized(l * snr.linear(), &QuadratureSpec::default()))
}

/// `C^-1(R, P0/σ)`: the interval length achieving rate `R`, with the default
/// quadrature and bracket cap.
pub fn capacity_inverse(r: f64, snr: SnrRatio) -> Result<f64, CapacityError> {
    CapacityFn::new(snr).inverse(r)
}

/// Memoized `L ↦ C(L, P0/σ)` map with numerical inverse.
///
/// Boundary tracing and root finding evaluate the same lengths repeatedly;
/// results are cached keyed on the scale-invariant product `L · P0/σ`
/// quantized to 1e-12 relative. Safe for concurrent use.
#[derive(Debug)]
pub struct CapacityFn {
    snr: SnrRatio,
    quad: QuadratureSpec,
    /// Bracket cap for the inverse, as a multiple of the noise scale.
    l_cap_factor: f64,
    memo: Mutex<HashMap<i64, f64>>,
}

impl CapacityFn {
    pub fn new(snr: SnrRatio) -> Self {
        Self::with_quadrature(snr, QuadratureSpec::default())
    }

    pub fn with_quadrature(snr: SnrRatio, quad: QuadratureSpec) -> Self {
        Self {
            snr,
            quad,
            l_cap_factor: 1e6,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn snr(&self) -> SnrRatio {
        self.snr
    }

    /// Largest length the inverse will bracket before reporting
    /// [`CapacityError::RateUnreachable`].
    pub fn l_cap(&self) -> f64 {
        self.l_cap_factor * self.snr.noise_scale()
    }

    pub fn eval(&self, l: f64) -> Result<f64, CapacityError> {
        check_length(l)?;
        let t = l * self.snr.linear();
        if t == 0.0 {
            return Ok(0.0);
        }
        let key = (t.ln() * 1e12).round() as i64;
        if let Some(&c) = self.memo.lock().unwrap().get(&key) {
            return Ok(c);
        }
        let c = capacity_normalized(t, &self.quad);
        self.memo.lock().unwrap().insert(key, c);
        Ok(c)
    }

    /// Finds the `L` achieving rate `r` by doubling bracket plus bisection,
    /// using strict monotonicity of `C`. The bracket is driven to rounding
    /// level, so the result is accurate in length (not merely in rate, where
    /// flat stretches of `C` would leave the length loose); membership tests
    /// compare lengths directly against it.
    pub fn inverse(&self, r: f64) -> Result<f64, CapacityError> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(CapacityError::NegativeRate(r));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let l_cap = self.l_cap();
        let mut hi = self.snr.noise_scale();
        while self.eval(hi)? < r {
            hi *= 2.0;
            if hi > l_cap {
                if self.eval(l_cap)? < r {
                    return Err(CapacityError::RateUnreachable { rate: r, l_cap });
                }
                hi = l_cap;
                break;
            }
        }
        let mut lo = 0.0_f64;
        let mut mid = 0.5 * hi;
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let c = self.eval(mid)?;
            if c == r {
                break;
            }
            if c < r {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        Ok(mid)
    }
}

/// Monte-Carlo plug-in estimate of `I(u; y)` in bits: samples `(v, n)` pairs
/// and averages `log2 f(y|v) - log2 f(y)` with both densities in closed
/// form. Reproducible for a fixed seed.
pub fn mc_mutual_information(
    l: f64,
    snr: SnrRatio,
    num_samples: u64,
    seed: u64,
) -> Result<f64, CapacityError> {
    check_length(l)?;
    let t = l * snr.linear();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0_f64;
    for _ in 0..num_samples {
        let v = t * rng.random::<f64>();
        let n: f64 = rng.sample(StandardNormal);
        let z = v + n;
        let ln_cond = -0.5 * n * n - 0.5 * LN_2PI;
        let ln_marg = output_density(t, z).ln();
        acc += ln_cond - ln_marg;
    }
    Ok(acc / num_samples as f64 / LN_2)
}

/// Entropy-power lower bound `½ log2(1 + t²/(2πe))` with `t = L · P0/σ`.
pub fn epi_lower_bound(l: f64, snr: SnrRatio) -> f64 {
    let t = l * snr.linear();
    0.5 * (1.0 + t * t / LN_2PI_E.exp()).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snr(v: f64) -> SnrRatio {
        SnrRatio::from_linear(v).unwrap()
    }

    #[test]
    fn zero_length_is_zero_rate() {
        assert_eq!(capacity(0.0, snr(10.0)).unwrap(), 0.0);
        assert_eq!(capacity_inverse(0.0, snr(10.0)).unwrap(), 0.0);
    }

    #[test]
    fn negative_length_rejected() {
        assert!(matches!(
            capacity(-1.0, snr(10.0)),
            Err(CapacityError::NegativeLength(_))
        ));
    }

    #[test]
    fn db_conversions() {
        assert!((SnrRatio::from_db_amplitude(70.0).unwrap().linear() - 10f64.powf(3.5)).abs() < 1e-6);
        assert!((SnrRatio::from_db_power(70.0).unwrap().linear() - 1e7).abs() < 1e-3);
        assert!(SnrRatio::from_linear(0.0).is_err());
    }

    #[test]
    fn scale_invariance() {
        let k = 3.7;
        for l in [0.3, 1.0, 4.2] {
            let a = capacity(l, snr(25.0)).unwrap();
            let b = capacity(k * l, snr(25.0 / k)).unwrap();
            assert!((a - b).abs() < 1e-9, "l = {l}: {a} vs {b}");
        }
    }

    #[test]
    fn monotone_in_length() {
        let s = snr(50.0);
        let mut prev = -1.0;
        for k in 0..30 {
            let l = 1e-3 * 10f64.powf(k as f64 / 6.0);
            let c = capacity(l, s).unwrap();
            assert!(c > prev + 1e-9 || prev < 0.0, "l = {l}");
            prev = c;
        }
    }

    #[test]
    fn inverse_round_trip() {
        let s = snr(100.0);
        let r = capacity(0.8, s).unwrap();
        let l = capacity_inverse(r, s).unwrap();
        assert!((l - 0.8).abs() < 1e-6 * 0.8, "l = {l}");
    }

    #[test]
    fn unreachable_rate() {
        assert!(matches!(
            capacity_inverse(1e6, snr(10.0)),
            Err(CapacityError::RateUnreachable { .. })
        ));
    }

    #[test]
    fn mc_oracle_agrees_at_unit_length() {
        let s = snr(10.0);
        let c = capacity(1.0, s).unwrap();
        let mc = mc_mutual_information(1.0, s, 1_000_000, 7).unwrap();
        assert!((c - mc).abs() < 0.02, "quad {c} vs mc {mc}");
    }

    #[test]
    fn mc_zero_length_is_exactly_zero() {
        let est = mc_mutual_information(0.0, snr(10.0), 100_000, 1).unwrap();
        assert!(est.abs() < 1e-12);
    }

    #[test]
    fn mc_is_deterministic_per_seed() {
        let s = snr(10.0);
        let a = mc_mutual_information(1.0, s, 100_000, 42).unwrap();
        let b = mc_mutual_information(1.0, s, 100_000, 42).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn epi_bound_holds() {
        for t in [0.1, 1.0, 10.0, 100.0, 1e4] {
            let c = capacity(t, snr(1.0)).unwrap();
            let lb = epi_lower_bound(t, snr(1.0));
            assert!(c >= lb - 1e-6, "t = {t}: c {c} < lb {lb}");
        }
    }

    #[test]
    fn memoized_eval_matches_direct() {
        let f = CapacityFn::new(snr(30.0));
        let a = f.eval(0.7).unwrap();
        let b = f.eval(0.7).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - capacity(0.7, snr(30.0)).unwrap()).abs() < 1e-12);
    }
}
