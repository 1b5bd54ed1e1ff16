//! Feasible-parallelogram geometry for the two-LED broadcast channel.
//!
//! The normalized per-LED powers `x' ∈ [0,1]²` map through the gain matrix H
//! to the signal parallelogram `R_//(H)` spanned by the two LED channel
//! vectors. Dimming pins the mean symbol vector to the point `D(H, ξ)` on the
//! main diagonal, and every achievable rate pair corresponds to an
//! axis-aligned rectangle centered there. This module provides the closed
//! forms for the largest such rectangles (`l1_max`, `l2_up`, `l2_down`,
//! `l2_xi`) together with a brute-force bisection oracle used to cross-check
//! them.

use thiserror::Error;

/// Absolute tolerance used when validating `x` against `l1_max`.
const X_RANGE_TOL: f64 = 1e-9;

/// Membership tolerance used inside the bisection oracles.
const ORACLE_MEMBERSHIP_TOL: f64 = 1e-12;

/// Relative determinant threshold below which a channel is treated as
/// singular. Covers exactly-zero determinants as well as users whose gain
/// rows coincide up to floating-point noise.
const SINGULAR_REL_TOL: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("channel matrix is singular (det = {det:e}); the zero-forcing precoder H^-1 does not exist")]
    SingularMatrix { det: f64 },
    #[error("LED {column} has an all-zero gain column; the feasible parallelogram is degenerate")]
    DegenerateChannel { column: usize },
    #[error("gain h{row}{column} = {value} is invalid; optical gains must be nonnegative")]
    InvalidGain { row: usize, column: usize, value: f64 },
    #[error("dimming target xi = {xi} lies outside [0, 1]")]
    InvalidXi { xi: f64 },
    #[error("x = {x} exceeds l1_max = {l1_max} at xi = {xi}")]
    OutOfRange { x: f64, l1_max: f64, xi: f64 },
}

/// Canonicalized 2x2 channel gain matrix.
///
/// Rows index users, columns index LEDs. The canonical labelling puts the
/// LED whose channel vector has the larger inclination from the u1 axis in
/// column 1, i.e. `h21/h11 > h22/h12`, which is equivalent to `det(H) < 0`.
/// User rows are never permuted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMatrix {
    h11: f64,
    h12: f64,
    h21: f64,
    h22: f64,
    swapped: bool,
}

impl ChannelMatrix {
    /// Builds the canonical form of a raw nonnegative gain matrix
    /// `[[h11, h12], [h21, h22]]`, swapping the LED columns when needed so
    /// that `det < 0`.
    pub fn canonicalize(raw: [[f64; 2]; 2]) -> Result<Self, GeometryError> {
        for (r, row) in raw.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(GeometryError::InvalidGain {
                        row: r + 1,
                        column: c + 1,
                        value: v,
                    });
                }
            }
        }
        for c in 0..2 {
            if raw[0][c] == 0.0 && raw[1][c] == 0.0 {
                return Err(GeometryError::DegenerateChannel { column: c + 1 });
            }
        }
        let det = raw[0][0] * raw[1][1] - raw[0][1] * raw[1][0];
        let col1 = (raw[0][0].powi(2) + raw[1][0].powi(2)).sqrt();
        let col2 = (raw[0][1].powi(2) + raw[1][1].powi(2)).sqrt();
        if det.abs() <= SINGULAR_REL_TOL * col1 * col2 {
            return Err(GeometryError::SingularMatrix { det });
        }
        if det < 0.0 {
            Ok(Self {
                h11: raw[0][0],
                h12: raw[0][1],
                h21: raw[1][0],
                h22: raw[1][1],
                swapped: false,
            })
        } else {
            Ok(Self {
                h11: raw[0][1],
                h12: raw[0][0],
                h21: raw[1][1],
                h22: raw[1][0],
                swapped: true,
            })
        }
    }

    pub fn h11(&self) -> f64 {
        self.h11
    }

    pub fn h12(&self) -> f64 {
        self.h12
    }

    pub fn h21(&self) -> f64 {
        self.h21
    }

    pub fn h22(&self) -> f64 {
        self.h22
    }

    /// True when canonicalization swapped the two LED columns.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn det(&self) -> f64 {
        self.h11 * self.h22 - self.h12 * self.h21
    }

    /// Row sums `(h11 + h12, h21 + h22)`: the far vertex of the
    /// parallelogram, i.e. the tip of the diagonal h1 + h2.
    pub fn diagonal_end(&self) -> (f64, f64) {
        (self.h11 + self.h12, self.h21 + self.h22)
    }

    /// Applies `H^-1` to a point of the signal plane, returning the
    /// normalized power pair `x'` that produces it.
    pub fn solve_powers(&self, u: (f64, f64)) -> (f64, f64) {
        let det = self.det();
        (
            (self.h22 * u.0 - self.h12 * u.1) / det,
            (-self.h21 * u.0 + self.h11 * u.1) / det,
        )
    }

    /// The mean symbol vector `D(H, ξ) = ξ (h1 + h2)`.
    pub fn dimming_point(&self, xi: f64) -> Result<DimmingPoint, GeometryError> {
        check_xi(xi)?;
        let (d1, d2) = self.diagonal_end();
        Ok(DimmingPoint {
            u1: xi * d1,
            u2: xi * d2,
            xi,
        })
    }
}

/// Mean symbol vector pinned by a dimming target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimmingPoint {
    pub u1: f64,
    pub u2: f64,
    pub xi: f64,
}

/// Axis-aligned rectangle in the signal plane. Degenerate (zero-length)
/// sides are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub center: (f64, f64),
    pub len_u1: f64,
    pub len_u2: f64,
}

impl Rectangle {
    pub fn new(center: (f64, f64), len_u1: f64, len_u2: f64) -> Self {
        Self {
            center,
            len_u1,
            len_u2,
        }
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        let (cx, cy) = self.center;
        let (a, b) = (0.5 * self.len_u1, 0.5 * self.len_u2);
        [
            (cx - a, cy - b),
            (cx + a, cy - b),
            (cx + a, cy + b),
            (cx - a, cy + b),
        ]
    }
}

fn check_xi(xi: f64) -> Result<(), GeometryError> {
    if (0.0..=1.0).contains(&xi) {
        Ok(())
    } else {
        Err(GeometryError::InvalidXi { xi })
    }
}

/// `min(ξ, 1-ξ)`, written as `1 - max(ξ, 1-ξ)` so that ξ and `1-ξ` produce
/// bit-identical results (the outer subtraction is exact for operands in
/// [1/2, 1]).
fn folded_xi(xi: f64) -> f64 {
    1.0 - xi.max(1.0 - xi)
}

/// True iff `u` lies in `R_//(H)`, i.e. `H^-1 u` is within `[-tol, 1+tol]²`.
pub fn in_parallelogram(h: &ChannelMatrix, u: (f64, f64), tol: f64) -> bool {
    let (x1, x2) = h.solve_powers(u);
    x1 >= -tol && x1 <= 1.0 + tol && x2 >= -tol && x2 <= 1.0 + tol
}

/// True iff all four corners of `r` lie in `R_//(H)`. Convexity makes the
/// corner check sufficient.
pub fn rect_in_parallelogram(h: &ChannelMatrix, r: &Rectangle, tol: f64) -> bool {
    r.corners().iter().all(|&c| in_parallelogram(h, c, tol))
}

/// Largest horizontal side of any rectangle centered at `D(H, ξ)` that fits
/// inside the parallelogram: `-2 min(ξ, 1-ξ) det(H) / max(h21, h22)`.
pub fn l1_max(h: &ChannelMatrix, xi: f64) -> Result<f64, GeometryError> {
    check_xi(xi)?;
    Ok(-2.0 * folded_xi(xi) * h.det() / h.h21.max(h.h22))
}

fn validate_x(h: &ChannelMatrix, xi: f64, x: f64) -> Result<f64, GeometryError> {
    let cap = l1_max(h, xi)?;
    let tol = X_RANGE_TOL * (1.0 + cap);
    if !x.is_finite() || x < -tol || x > cap + tol {
        return Err(GeometryError::OutOfRange {
            x,
            l1_max: cap,
            xi,
        });
    }
    Ok(x.clamp(0.0, cap))
}

/// Largest upward extension of the width-`x` segment centered at `D(H, ξ)`.
///
/// Piecewise linear in `x` with threshold `μ1 = h11/(h11+h12)` on ξ and
/// breakpoint `η3(ξ) = 2ξ h12 - 2(1-ξ) h11` on `x`.
pub fn l2_up(h: &ChannelMatrix, xi: f64, x: f64) -> Result<f64, GeometryError> {
    let x = validate_x(h, xi, x)?;
    let det = h.det();
    let mu1 = h.h11 / (h.h11 + h.h12);
    let v = if xi <= mu1 {
        (-xi * det - 0.5 * x * h.h21) / h.h11
    } else {
        let eta3 = 2.0 * xi * h.h12 - 2.0 * (1.0 - xi) * h.h11;
        if x <= eta3 {
            (-(1.0 - xi) * det - 0.5 * x * h.h22) / h.h12
        } else {
            (-xi * det - 0.5 * x * h.h21) / h.h11
        }
    };
    Ok(v.max(0.0))
}

/// Largest downward extension of the width-`x` segment centered at
/// `D(H, ξ)`; mirror of [`l2_up`] with threshold `μ2 = h12/(h11+h12)` and
/// breakpoint `η4(ξ) = 2(1-ξ) h12 - 2ξ h11`.
pub fn l2_down(h: &ChannelMatrix, xi: f64, x: f64) -> Result<f64, GeometryError> {
    let x = validate_x(h, xi, x)?;
    let det = h.det();
    let mu2 = h.h12 / (h.h11 + h.h12);
    let v = if xi <= mu2 {
        let eta4 = 2.0 * (1.0 - xi) * h.h12 - 2.0 * xi * h.h11;
        if x <= eta4 {
            (-xi * det - 0.5 * x * h.h22) / h.h12
        } else {
            (-(1.0 - xi) * det - 0.5 * x * h.h21) / h.h11
        }
    } else {
        (-(1.0 - xi) * det - 0.5 * x * h.h21) / h.h11
    };
    Ok(v.max(0.0))
}

/// Tallest rectangle of width `x` centered at `D(H, ξ)` that fits inside the
/// parallelogram: `2 min(l2_up, l2_down)`. Non-increasing and continuous in
/// `x`.
pub fn l2_xi(h: &ChannelMatrix, xi: f64, x: f64) -> Result<f64, GeometryError> {
    Ok(2.0 * l2_up(h, xi, x)?.min(l2_down(h, xi, x)?))
}

/// Breakpoints of the `l2_up` / `l2_down` case formulas that fall strictly
/// inside `(0, l1_max)`; boundary tracing inserts them into its sample grid
/// so every linear piece is represented exactly.
pub fn l2_breakpoints(h: &ChannelMatrix, xi: f64) -> Result<Vec<f64>, GeometryError> {
    let cap = l1_max(h, xi)?;
    let eta3 = 2.0 * xi * h.h12 - 2.0 * (1.0 - xi) * h.h11;
    let eta4 = 2.0 * (1.0 - xi) * h.h12 - 2.0 * xi * h.h11;
    Ok([eta3, eta4]
        .into_iter()
        .filter(|&e| e > 0.0 && e < cap)
        .collect())
}

/// Longest feasible horizontal segment through `D(H, ξ)`, found by bisection
/// on the membership predicate. Accurate to `grid_step`.
pub fn oracle_l1_max(h: &ChannelMatrix, xi: f64, grid_step: f64) -> Result<f64, GeometryError> {
    let d = h.dimming_point(xi)?;
    let center = (d.u1, d.u2);
    let hi = h.h11 + h.h12;
    Ok(bisect_feasible_len(hi, grid_step, |len| {
        rect_in_parallelogram(
            h,
            &Rectangle::new(center, len, 0.0),
            ORACLE_MEMBERSHIP_TOL,
        )
    }))
}

/// Tallest feasible rectangle of width `x` centered at `D(H, ξ)`, found by
/// bisection. Accurate to `grid_step`. Returns 0 when even the degenerate
/// rectangle of height 0 does not fit.
pub fn oracle_l2_xi(
    h: &ChannelMatrix,
    xi: f64,
    x: f64,
    grid_step: f64,
) -> Result<f64, GeometryError> {
    let d = h.dimming_point(xi)?;
    let center = (d.u1, d.u2);
    if !rect_in_parallelogram(h, &Rectangle::new(center, x, 0.0), ORACLE_MEMBERSHIP_TOL) {
        return Ok(0.0);
    }
    let hi = h.h21 + h.h22;
    Ok(bisect_feasible_len(hi, grid_step, |len| {
        rect_in_parallelogram(h, &Rectangle::new(center, x, len), ORACLE_MEMBERSHIP_TOL)
    }))
}

/// Bisects the largest `len` in `[0, hi]` with `feasible(len)` true, relying
/// on the predicate being monotone (shrinking a centered rectangle keeps it
/// inside a convex set). Returns the certified-feasible lower end of the
/// final bracket, so the result is within `grid_step` below the true value.
fn bisect_feasible_len(hi: f64, grid_step: f64, feasible: impl Fn(f64) -> bool) -> f64 {
    debug_assert!(grid_step > 0.0);
    if !feasible(0.0) {
        return 0.0;
    }
    if feasible(hi) {
        return hi;
    }
    let (mut lo, mut hi) = (0.0_f64, hi);
    while hi - lo > grid_step {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
