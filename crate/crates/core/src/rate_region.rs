//! Achievable rate region of the zero-forcing precoder: boundary tracing,
//! membership tests, and the maximum rate pair along a ray `R2 = α R1`.
//!
//! A boundary point at horizontal side `x` is
//! `(C(x), C(L2^ξ(x)))`; sweeping `x` over `[0, l1_max(ξ)]` traces the whole
//! Pareto boundary.

use thiserror::Error;

use crate::capacity::{CapacityError, CapacityFn, SnrRatio};
use crate::geometry::{self, ChannelMatrix, GeometryError};

#[derive(Debug, Error)]
pub enum RegionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error("num_samples = {0} is too small; at least 2 required")]
    TooFewSamples(usize),
    #[error("alpha = {0} must be positive")]
    InvalidAlpha(f64),
}

/// One channel/SNR/dimming-target bundle defining a region computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimmingScenario {
    pub channel: ChannelMatrix,
    pub snr: SnrRatio,
    pub xi: f64,
}

/// Rate pair in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

impl RatePoint {
    pub fn new(r1: f64, r2: f64) -> Self {
        Self { r1, r2 }
    }
}

/// One traced boundary sample: horizontal side `x`, matching maximal
/// vertical side `L2^ξ(x)`, and the resulting rate pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub x: f64,
    pub l2: f64,
    pub rate: RatePoint,
}

/// Sampled Pareto boundary, ascending in `x` (so `r1` is non-decreasing and
/// `r2` non-increasing along the list).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionBoundary {
    pub xi: f64,
    pub samples: Vec<BoundarySample>,
}

/// Outcome of a region membership test. Infeasibility carries a diagnostic
/// rather than being an error.
#[derive(Debug, Clone, PartialEq)]
pub enum Containment {
    Inside,
    Outside(String),
}

impl Containment {
    pub fn is_inside(&self) -> bool {
        matches!(self, Containment::Inside)
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Containment::Inside => None,
            Containment::Outside(reason) => Some(reason),
        }
    }
}

/// Builds the `x` sample grid: `num_samples` uniform points over
/// `[0, l1_max]` plus the case breakpoints of `L2^ξ`, so every linear piece
/// of the boundary is represented exactly.
fn sample_grid(
    h: &ChannelMatrix,
    xi: f64,
    num_samples: usize,
) -> Result<Vec<f64>, RegionError> {
    if num_samples < 2 {
        return Err(RegionError::TooFewSamples(num_samples));
    }
    let cap = geometry::l1_max(h, xi)?;
    if cap == 0.0 {
        return Ok(vec![0.0]);
    }
    let mut xs: Vec<f64> = (0..num_samples)
        .map(|k| cap * k as f64 / (num_samples - 1) as f64)
        .collect();
    xs.extend(geometry::l2_breakpoints(h, xi)?);
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    Ok(xs)
}

/// Traces the rate-region boundary `(C(x), C(L2^ξ(x)))` over
/// `x ∈ [0, l1_max(ξ)]`.
pub fn trace_boundary(
    h: &ChannelMatrix,
    cap: &CapacityFn,
    xi: f64,
    num_samples: usize,
) -> Result<RegionBoundary, RegionError> {
    let xs = sample_grid(h, xi, num_samples)?;
    let mut samples = Vec::with_capacity(xs.len());
    for x in xs {
        let l2 = geometry::l2_xi(h, xi, x)?;
        let rate = RatePoint::new(cap.eval(x)?, cap.eval(l2)?);
        samples.push(BoundarySample { x, l2, rate });
    }
    Ok(RegionBoundary { xi, samples })
}

/// Membership test in the interval-length domain: inverts both target rates
/// through `C^-1` and compares against the inscribed-rectangle limits, with
/// a small inclusive slack on the lengths.
pub fn contains(
    h: &ChannelMatrix,
    cap: &CapacityFn,
    xi: f64,
    p: RatePoint,
) -> Result<Containment, RegionError> {
    let l1_cap = geometry::l1_max(h, xi)?;
    let slack = 1e-9 * (1.0 + l1_cap);
    let l1 = match cap.inverse(p.r1.max(0.0)) {
        Ok(l) => l,
        Err(CapacityError::RateUnreachable { rate, l_cap }) => {
            return Ok(Containment::Outside(format!(
                "r1 = {rate} bits exceeds every rate reachable below L = {l_cap}"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    if l1 > l1_cap + slack {
        return Ok(Containment::Outside(format!(
            "required L1 = {l1} exceeds l1_max = {l1_cap}"
        )));
    }
    let l2_cap = geometry::l2_xi(h, xi, l1.min(l1_cap))?;
    let l2 = match cap.inverse(p.r2.max(0.0)) {
        Ok(l) => l,
        Err(CapacityError::RateUnreachable { rate, l_cap }) => {
            return Ok(Containment::Outside(format!(
                "r2 = {rate} bits exceeds every rate reachable below L = {l_cap}"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    if l2 > l2_cap + slack {
        return Ok(Containment::Outside(format!(
            "required L2 = {l2} exceeds L2^xi(L1) = {l2_cap}"
        )));
    }
    Ok(Containment::Inside)
}

/// `r_alpha_max` result together with the rectangle that realizes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaRatePoint {
    /// Root of `α C(x) - C(L2^ξ(x))`: horizontal side of the rectangle.
    pub x: f64,
    /// Vertical side `L2^ξ(x)` at the root.
    pub l2: f64,
    pub rate: RatePoint,
}

/// Largest rate pair of the form `(r, α r)` in the region: the unique
/// intersection of the ray `R2 = α R1` with the Pareto boundary, located by
/// bisection on the monotone `f(x) = α C(x) - C(L2^ξ(x))`.
pub fn r_alpha_max_detail(
    h: &ChannelMatrix,
    cap: &CapacityFn,
    xi: f64,
    alpha: f64,
) -> Result<AlphaRatePoint, RegionError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(RegionError::InvalidAlpha(alpha));
    }
    let l1_cap = geometry::l1_max(h, xi)?;
    if l1_cap == 0.0 {
        return Ok(AlphaRatePoint {
            x: 0.0,
            l2: 0.0,
            rate: RatePoint::new(0.0, 0.0),
        });
    }
    let f = |x: f64| -> Result<f64, RegionError> {
        let l2 = geometry::l2_xi(h, xi, x)?;
        Ok(alpha * cap.eval(x)? - cap.eval(l2)?)
    };
    // Bisect to interval exhaustion: f is strictly monotone, so driving the
    // bracket down to rounding level keeps the root reproducible across
    // near-identical scenarios (mirrored layouts, ξ vs 1-ξ).
    let (mut lo, mut hi) = (0.0_f64, l1_cap);
    let mut x = 0.5 * l1_cap;
    for _ in 0..200 {
        x = 0.5 * (lo + hi);
        let v = f(x)?;
        if v == 0.0 {
            break;
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= f64::EPSILON * l1_cap {
            break;
        }
    }
    let r1 = cap.eval(x)?;
    Ok(AlphaRatePoint {
        x,
        l2: geometry::l2_xi(h, xi, x)?,
        rate: RatePoint::new(r1, alpha * r1),
    })
}

/// See [`r_alpha_max_detail`]; returns just the rate pair.
pub fn r_alpha_max(
    h: &ChannelMatrix,
    cap: &CapacityFn,
    xi: f64,
    alpha: f64,
) -> Result<RatePoint, RegionError> {
    Ok(r_alpha_max_detail(h, cap, xi, alpha)?.rate)
}

/// Maximum achievable symmetric rate: `r_alpha_max` at `α = 1`, i.e. the
/// largest inscribed square centered at the dimming point.
pub fn sym_rate(h: &ChannelMatrix, cap: &CapacityFn, xi: f64) -> Result<f64, RegionError> {
    Ok(r_alpha_max_detail(h, cap, xi, 1.0)?.rate.r1)
}

/// Result of the `ξ = 1/2` dominance sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContainmentReport {
    pub xi: f64,
    /// Max of `L2^ξ(x) - L2^{1/2}(x)` over the grid (positive = violation).
    pub max_l2_violation: f64,
    /// `l1_max(ξ) - l1_max(1/2)` (positive = violation).
    pub l1_violation: f64,
    pub samples: usize,
}

impl ContainmentReport {
    pub fn max_violation(&self) -> f64 {
        self.max_l2_violation.max(self.l1_violation)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation() <= tol
    }
}

/// Checks `L2^ξ(x) <= L2^{1/2}(x)` and `l1_max(ξ) <= l1_max(1/2)` across a
/// sample grid and reports the worst violation.
pub fn verify_containment(
    h: &ChannelMatrix,
    xi: f64,
    num_samples: usize,
) -> Result<ContainmentReport, RegionError> {
    let xs = sample_grid(h, xi, num_samples)?;
    let samples = xs.len();
    let mut max_l2_violation = f64::NEG_INFINITY;
    for x in xs {
        let at_xi = geometry::l2_xi(h, xi, x)?;
        let at_half = geometry::l2_xi(h, 0.5, x)?;
        max_l2_violation = max_l2_violation.max(at_xi - at_half);
    }
    Ok(ContainmentReport {
        xi,
        max_l2_violation,
        l1_violation: geometry::l1_max(h, xi)? - geometry::l1_max(h, 0.5)?,
        samples,
    })
}
