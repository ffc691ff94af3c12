//! Walker-delta constellation geometry in the Earth-centred inertial frame.
//!
//! Orbits are circular two-body Kepler orbits about a spherical, non-precessing
//! Earth. The ground station sits on the rotating Earth surface; `t = 0` is the
//! simulation epoch, at which the station's longitude equals its ECI longitude.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Earth gravitational parameter, m³/s².
pub const MU_EARTH: f64 = 3.986004418e14;
/// Mean (spherical) Earth radius, m.
pub const R_EARTH: f64 = 6_371_000.0;
/// Earth sidereal rotation rate, rad/s.
pub const OMEGA_EARTH: f64 = 7.2921159e-5;

/// Cartesian vector in metres, ECI frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle<T: Scalar>(a: T) -> T {
    let two_pi = T::lit(std::f64::consts::TAU);
    let r = a % two_pi;
    let r = if r < T::zero() { r + two_pi } else { r };
    // `r + 2π` can round up to exactly 2π for tiny negative inputs.
    if r >= two_pi {
        T::zero()
    } else {
        r
    }
}

/// Circular-orbit elements of one satellite (eccentricity is always zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalElements<T> {
    pub semi_major_axis_m: T,
    pub inclination_rad: T,
    pub raan_rad: T,
    /// Argument of latitude at `t = 0`.
    pub phase0_rad: T,
}

impl<T: Scalar> OrbitalElements<T> {
    pub fn new(semi_major_axis_m: T, inclination_rad: T, raan_rad: T, phase0_rad: T) -> Result<Self> {
        if !(semi_major_axis_m.is_finite() && semi_major_axis_m > T::lit(R_EARTH)) {
            return Err(Error::InvalidConstellation(format!(
                "semi-major axis {semi_major_axis_m} m must exceed the Earth radius"
            )));
        }
        if !(inclination_rad.is_finite() && raan_rad.is_finite() && phase0_rad.is_finite()) {
            return Err(Error::InvalidConstellation("non-finite orbital angle".into()));
        }
        Ok(Self {
            semi_major_axis_m,
            inclination_rad: normalize_angle(inclination_rad),
            raan_rad: normalize_angle(raan_rad),
            phase0_rad: normalize_angle(phase0_rad),
        })
    }

    /// Mean motion `sqrt(μ / a³)`, rad/s.
    pub fn mean_motion(&self) -> T {
        let a = self.semi_major_axis_m;
        (T::lit(MU_EARTH) / (a * a * a)).sqrt()
    }

    /// Orbital period `2π sqrt(a³ / μ)`, s.
    pub fn period_s(&self) -> T {
        T::lit(std::f64::consts::TAU) / self.mean_motion()
    }

    pub fn altitude_m(&self) -> T {
        self.semi_major_axis_m - T::lit(R_EARTH)
    }
}

/// Ground station site on the rotating spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStation<T> {
    pub latitude_rad: T,
    /// ECI longitude at `t = 0`.
    pub longitude_rad: T,
    pub altitude_m: T,
    pub min_elevation_rad: T,
}

impl<T: Scalar> GroundStation<T> {
    pub fn new(latitude_rad: T, longitude_rad: T, altitude_m: T, min_elevation_rad: T) -> Result<Self> {
        let half_pi = T::lit(std::f64::consts::FRAC_PI_2);
        if !(latitude_rad >= -half_pi && latitude_rad <= half_pi) {
            return Err(Error::InvalidGroundStation(format!(
                "latitude {latitude_rad} rad outside [-π/2, π/2]"
            )));
        }
        if !(min_elevation_rad >= T::zero() && min_elevation_rad < half_pi) {
            return Err(Error::InvalidGroundStation(format!(
                "minimum elevation {min_elevation_rad} rad outside [0, π/2)"
            )));
        }
        if !longitude_rad.is_finite() || !altitude_m.is_finite() || altitude_m <= -T::lit(R_EARTH) {
            return Err(Error::InvalidGroundStation("invalid longitude or altitude".into()));
        }
        Ok(Self {
            latitude_rad,
            longitude_rad,
            altitude_m,
            min_elevation_rad,
        })
    }
}

/// Walker-delta constellation layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSpec<T> {
    pub planes: usize,
    pub sats_per_plane: usize,
    pub inclination_rad: T,
    /// Altitude of each plane; length must equal `planes`.
    pub altitudes_m: Vec<T>,
    /// Phase offset between adjacent planes' first satellites.
    pub phasing_offset_rad: T,
}

impl<T: Scalar> ConstellationSpec<T> {
    pub fn total_satellites(&self) -> usize {
        self.planes * self.sats_per_plane
    }

    /// Plane index of a satellite id.
    pub fn plane_of(&self, satellite_id: usize) -> usize {
        satellite_id / self.sats_per_plane
    }
}

/// Expands a Walker-delta layout into per-satellite elements.
///
/// Plane `k` has RAAN `2πk/m`; satellite `s` of plane `k` has initial phase
/// `2πs/S + k·phasing_offset` and id `k·S + s`.
pub fn build_constellation<T: Scalar>(spec: &ConstellationSpec<T>) -> Result<Vec<OrbitalElements<T>>> {
    if spec.planes == 0 {
        return Err(Error::InvalidConstellation("plane count must be positive".into()));
    }
    if spec.sats_per_plane == 0 {
        return Err(Error::InvalidConstellation(
            "satellites per plane must be positive".into(),
        ));
    }
    if spec.altitudes_m.len() != spec.planes {
        return Err(Error::InvalidConstellation(format!(
            "{} altitudes given for {} planes",
            spec.altitudes_m.len(),
            spec.planes
        )));
    }
    if let Some(bad) = spec.altitudes_m.iter().find(|h| !(**h > T::zero())) {
        return Err(Error::InvalidConstellation(format!(
            "altitude {bad} m must be positive"
        )));
    }

    let two_pi = T::lit(std::f64::consts::TAU);
    let planes = T::from_count(spec.planes);
    let per_plane = T::from_count(spec.sats_per_plane);
    let mut out = Vec::with_capacity(spec.total_satellites());
    for (k, &altitude) in spec.altitudes_m.iter().enumerate() {
        let kf = T::from_count(k);
        let raan = two_pi * kf / planes;
        for s in 0..spec.sats_per_plane {
            let phase = two_pi * T::from_count(s) / per_plane + kf * spec.phasing_offset_rad;
            out.push(OrbitalElements::new(
                T::lit(R_EARTH) + altitude,
                spec.inclination_rad,
                raan,
                phase,
            )?);
        }
    }
    Ok(out)
}

/// Satellite ECI position at time `t` (seconds since epoch).
///
/// `R_z(Ω) · R_x(i) · (a cos u, a sin u, 0)` with `u = u₀ + n t`.
pub fn sat_position<T: Scalar>(el: &OrbitalElements<T>, t: T) -> Vec3<T> {
    let a = el.semi_major_axis_m;
    let u = el.phase0_rad + el.mean_motion() * t;
    let (su, cu) = u.sin_cos();
    let (si, ci) = el.inclination_rad.sin_cos();
    let (so, co) = el.raan_rad.sin_cos();

    // Orbital plane → R_x(i).
    let px = a * cu;
    let py = a * su * ci;
    let pz = a * su * si;
    // R_z(Ω).
    Vec3::new(px * co - py * so, px * so + py * co, pz)
}

/// Ground-station ECI position at time `t`, rotating with the Earth.
pub fn gs_position<T: Scalar>(gs: &GroundStation<T>, t: T) -> Vec3<T> {
    let r = T::lit(R_EARTH) + gs.altitude_m;
    let lon = gs.longitude_rad + T::lit(OMEGA_EARTH) * t;
    let (sl, cl) = gs.latitude_rad.sin_cos();
    let (so, co) = lon.sin_cos();
    Vec3::new(r * cl * co, r * cl * so, r * sl)
}

/// Visibility predicate: the angle between the station's local vertical and the
/// line of sight must not exceed `π/2 − α_min`.
pub fn is_visible<T: Scalar>(r_g: Vec3<T>, r_n: Vec3<T>, min_elevation_rad: T) -> Result<bool> {
    let los = r_n - r_g;
    let ng = r_g.norm();
    let nl = los.norm();
    if ng == T::zero() {
        return Err(Error::DegenerateGeometry("ground station at the origin"));
    }
    if nl == T::zero() {
        return Err(Error::DegenerateGeometry("satellite coincides with ground station"));
    }
    let cos_angle = (r_g.dot(los) / (ng * nl)).max(-T::one()).min(T::one());
    let zenith_angle = cos_angle.acos();
    Ok(zenith_angle <= T::lit(std::f64::consts::FRAC_PI_2) - min_elevation_rad)
}
