//! Indoor line-of-sight channel model: Lambertian LED emission, ideal
//! concentrator optics, and the room layouts used for placement studies.
//!
//! LEDs point straight down, photodiodes straight up; gains follow the
//! standard indoor model `h = (m+1) A / (2π d²) cosᵐ(φ) Ts g(ψ) cos(ψ)`
//! with `g(ψ) = n² / sin²(FOV)` inside the field of view and 0 outside.
//! Responsivity is folded in as 1, so the gains feed the normalized channel
//! matrix directly.

use rayon::prelude::*;
use thiserror::Error;

use crate::capacity::CapacityFn;
use crate::geometry::{ChannelMatrix, GeometryError};
use crate::rate_region::{self, RegionError};

#[derive(Debug, Error)]
pub enum ChannelModelError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("invalid Lambertian parameters: {0}")]
    InvalidParams(String),
    #[error("invalid room layout: {0}")]
    InvalidLayout(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }
}

/// Receiver/emitter optics parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertianParams {
    /// Photodiode area in m².
    pub pd_area_m2: f64,
    /// Receiver field-of-view half angle in degrees.
    pub fov_deg: f64,
    /// Refractive index of the concentrator lens at the PD.
    pub lens_refractive_index: f64,
    /// LED semi-angle at half power in degrees.
    pub semi_angle_deg: f64,
    /// Optical filter gain Ts.
    pub optical_filter_gain: f64,
}

impl Default for LambertianParams {
    fn default() -> Self {
        Self {
            pd_area_m2: 1e-4,
            fov_deg: 60.0,
            lens_refractive_index: 1.5,
            semi_angle_deg: 70.0,
            optical_filter_gain: 1.0,
        }
    }
}

impl LambertianParams {
    pub fn validate(&self) -> Result<(), ChannelModelError> {
        if !(self.pd_area_m2 > 0.0) {
            return Err(ChannelModelError::InvalidParams(format!(
                "pd_area_m2 = {} must be positive",
                self.pd_area_m2
            )));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg <= 90.0) {
            return Err(ChannelModelError::InvalidParams(format!(
                "fov_deg = {} must be in (0, 90]",
                self.fov_deg
            )));
        }
        if !(self.semi_angle_deg > 0.0 && self.semi_angle_deg < 90.0) {
            return Err(ChannelModelError::InvalidParams(format!(
                "semi_angle_deg = {} must be in (0, 90)",
                self.semi_angle_deg
            )));
        }
        if !(self.lens_refractive_index > 0.0) || !(self.optical_filter_gain >= 0.0) {
            return Err(ChannelModelError::InvalidParams(
                "lens index must be positive and filter gain nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Lambertian mode number `m = -ln 2 / ln cos(semi_angle)`.
    pub fn lambertian_order(&self) -> f64 {
        -std::f64::consts::LN_2 / self.semi_angle_deg.to_radians().cos().ln()
    }

    /// Concentrator gain `n² / sin²(FOV)`.
    pub fn concentrator_gain(&self) -> f64 {
        let n = self.lens_refractive_index;
        n * n / self.fov_deg.to_radians().sin().powi(2)
    }
}

/// Room geometry: LEDs on the ceiling pointing down, photodiodes on a
/// horizontal plane pointing up, all four coplanar in the sweep plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomLayout {
    /// Room dimensions (x, y, z) in meters.
    pub room: Point3,
    pub leds: [Point3; 2],
    pub pds: [Point3; 2],
}

impl Default for RoomLayout {
    /// 5 m x 5 m x 3 m room, LEDs 60 cm apart centered on the ceiling, users
    /// 4 m apart symmetric about the LED midline at a height of 50 cm.
    fn default() -> Self {
        Self::symmetric(0.6, 4.0)
    }
}

impl RoomLayout {
    /// Symmetric placement: LEDs `led_separation` apart on the ceiling, users
    /// `user_separation` apart at 50 cm height, both centered.
    pub fn symmetric(led_separation: f64, user_separation: f64) -> Self {
        Self::with_user_displacements(led_separation, -0.5 * user_separation, 0.5 * user_separation)
    }

    /// Places the users at signed displacements `d1`, `d2` along the sweep
    /// line (the horizontal line at 50 cm height in the LED plane, origin at
    /// the LED-pair midpoint).
    pub fn with_user_displacements(led_separation: f64, d1: f64, d2: f64) -> Self {
        let room = Point3::new(5.0, 5.0, 3.0);
        let cx = 0.5 * room.x;
        let cy = 0.5 * room.y;
        Self {
            room,
            leds: [
                Point3::new(cx - 0.5 * led_separation, cy, room.z),
                Point3::new(cx + 0.5 * led_separation, cy, room.z),
            ],
            pds: [
                Point3::new(cx + d1, cy, 0.5),
                Point3::new(cx + d2, cy, 0.5),
            ],
        }
    }

    /// x coordinate of the sweep origin: the LED-pair midpoint.
    pub fn sweep_origin_x(&self) -> f64 {
        0.5 * (self.leds[0].x + self.leds[1].x)
    }

    /// Returns a copy with the users moved to displacements `d1`, `d2` from
    /// the sweep origin, keeping heights and the sweep plane.
    pub fn displaced(&self, d1: f64, d2: f64) -> Self {
        let ox = self.sweep_origin_x();
        let mut out = *self;
        out.pds[0].x = ox + d1;
        out.pds[1].x = ox + d2;
        out
    }

    fn point_inside(&self, p: &Point3) -> bool {
        p.x >= 0.0
            && p.x <= self.room.x
            && p.y >= 0.0
            && p.y <= self.room.y
            && p.z >= 0.0
            && p.z <= self.room.z
    }

    pub fn validate(&self) -> Result<(), ChannelModelError> {
        for (label, p) in [
            ("LED 1", &self.leds[0]),
            ("LED 2", &self.leds[1]),
            ("PD 1", &self.pds[0]),
            ("PD 2", &self.pds[1]),
        ] {
            if !self.point_inside(p) {
                return Err(ChannelModelError::InvalidLayout(format!(
                    "{label} at ({}, {}, {}) is outside the room",
                    p.x, p.y, p.z
                )));
            }
        }
        for pd in &self.pds {
            for led in &self.leds {
                if pd.z >= led.z {
                    return Err(ChannelModelError::InvalidLayout(
                        "photodiodes must be below the LEDs".into(),
                    ));
                }
                if led.distance(pd) == 0.0 {
                    return Err(ChannelModelError::InvalidLayout(
                        "LED and PD positions must be distinct".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Line-of-sight gain between a downward LED and an upward photodiode.
/// Returns 0 when the incidence angle exceeds the receiver field of view.
pub fn los_gain(led: &Point3, pd: &Point3, params: &LambertianParams) -> f64 {
    let d = led.distance(pd);
    let dz = led.z - pd.z;
    // cos of the irradiance angle at the LED equals cos of the incidence
    // angle at the PD for this down/up orientation.
    let cos_angle = dz / d;
    if cos_angle < params.fov_deg.to_radians().cos() {
        return 0.0;
    }
    let m = params.lambertian_order();
    (m + 1.0) * params.pd_area_m2 / (2.0 * std::f64::consts::PI * d * d)
        * cos_angle.powf(m)
        * params.optical_filter_gain
        * params.concentrator_gain()
        * cos_angle
}

/// Builds the canonicalized channel matrix `h_ki = los_gain(LED i, PD k)`
/// for a layout. Co-located users produce identical rows and are reported
/// as a singular channel.
pub fn build_channel(
    layout: &RoomLayout,
    params: &LambertianParams,
) -> Result<ChannelMatrix, ChannelModelError> {
    layout.validate()?;
    params.validate()?;
    let mut raw = [[0.0; 2]; 2];
    for (k, pd) in layout.pds.iter().enumerate() {
        for (i, led) in layout.leds.iter().enumerate() {
            raw[k][i] = los_gain(led, pd, params);
        }
    }
    Ok(ChannelMatrix::canonicalize(raw)?)
}

/// One cell of a displacement sweep. Singular placements (co-located users)
/// report rate 0 with the flag set instead of failing the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub d1: f64,
    pub d2: f64,
    pub sym_rate_bits: f64,
    pub singular: bool,
}

/// Evaluates the maximum symmetric rate on the displacement grid
/// `d1s × d2s` (row-major, `d1` outermost). Cells are independent and run
/// in parallel; output order is fixed.
pub fn sweep_displacement(
    base: &RoomLayout,
    params: &LambertianParams,
    cap: &CapacityFn,
    xi: f64,
    d1s: &[f64],
    d2s: &[f64],
) -> Result<Vec<SweepCell>, ChannelModelError> {
    params.validate()?;
    let cells: Vec<(f64, f64)> = d1s
        .iter()
        .flat_map(|&d1| d2s.iter().map(move |&d2| (d1, d2)))
        .collect();
    cells
        .into_par_iter()
        .map(|(d1, d2)| {
            let layout = base.displaced(d1, d2);
            match build_channel(&layout, params) {
                Err(ChannelModelError::Geometry(GeometryError::SingularMatrix { .. })) => {
                    Ok(SweepCell {
                        d1,
                        d2,
                        sym_rate_bits: 0.0,
                        singular: true,
                    })
                }
                Err(e) => Err(e),
                Ok(h) => Ok(SweepCell {
                    d1,
                    d2,
                    sym_rate_bits: rate_region::sym_rate(&h, cap, xi)?,
                    singular: false,
                }),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossPoint {
    pub displacement_m: f64,
    pub loss_percent: f64,
}

/// Loss curve relative to the optimal placement, together with the optimum
/// it was measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct LossCurve {
    /// Optimal antisymmetric user displacement (users at -d and +d).
    pub optimum_displacement_m: f64,
    pub optimum_sym_rate_bits: f64,
    pub points: Vec<LossPoint>,
}

/// Finds the optimal antisymmetric placement (users at `-d*, +d*`) by a
/// fine scan, then reports the percentage loss in symmetric rate as both
/// users are displaced from their optimal locations toward each other,
/// mirror-symmetrically, by each value in `displacements`. Co-located
/// placements report 100% loss.
pub fn percentage_loss_curve(
    base: &RoomLayout,
    params: &LambertianParams,
    cap: &CapacityFn,
    xi: f64,
    displacements: &[f64],
) -> Result<LossCurve, ChannelModelError> {
    params.validate()?;
    let ox = base.sweep_origin_x();
    let d_max = (base.room.x - ox).min(ox) - 1e-9;
    let steps = 512;
    let rates: Vec<(f64, f64)> = (1..steps)
        .into_par_iter()
        .map(|k| {
            let d = d_max * k as f64 / steps as f64;
            let layout = base.displaced(-d, d);
            let h = build_channel(&layout, params)?;
            Ok((d, rate_region::sym_rate(&h, cap, xi)?))
        })
        .collect::<Result<_, ChannelModelError>>()?;
    let &(d_opt, r_opt) = rates
        .iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("non-empty scan");
    let points = displacements
        .par_iter()
        .map(|&delta| {
            let layout = base.displaced(-d_opt + delta, d_opt - delta);
            let r = match build_channel(&layout, params) {
                Err(ChannelModelError::Geometry(GeometryError::SingularMatrix { .. })) => 0.0,
                Err(e) => return Err(e),
                Ok(h) => rate_region::sym_rate(&h, cap, xi)?,
            };
            Ok(LossPoint {
                displacement_m: delta,
                loss_percent: 100.0 * (1.0 - r / r_opt),
            })
        })
        .collect::<Result<_, ChannelModelError>>()?;
    Ok(LossCurve {
        optimum_displacement_m: d_opt,
        optimum_sym_rate_bits: r_opt,
        points,
    })
}
