//! Great-circle geometry: distances, travel times, and the route-alignment
//! bearing used by clustering.
//!
//! Everything here is generic over the floating scalar; the pipeline uses the
//! `f64` aliases from the crate root.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Terminal;

pub const EARTH_RADIUS_MILES: f64 = 3958.8;
pub const DEFAULT_SPEED_MPH: f64 = 50.0;

/// Reference direction from which bearings are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceDirection {
    #[default]
    West,
    North,
}

/// A route-alignment angle, normalized into [0, 2pi).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BearingAngle<F: Float>(F);

impl<F: Float> BearingAngle<F> {
    pub fn new(radians: F) -> Self {
        let tau = F::from(std::f64::consts::TAU).unwrap();
        let mut r = radians % tau;
        if r < F::zero() {
            r = r + tau;
        }
        // -0.0 % tau can yield tau itself after the add; fold it back.
        if r >= tau {
            r = r - tau;
        }
        Self(r)
    }

    pub fn radians(self) -> F {
        self.0
    }
}

/// Great-circle distance in the units of `radius`.
pub fn haversine<F: Float>(a_lat: F, a_lon: F, b_lat: F, b_lon: F, radius: F) -> F {
    let two = F::from(2.0).unwrap();
    let lat1 = a_lat.to_radians();
    let lat2 = b_lat.to_radians();
    let dlat = (b_lat - a_lat).to_radians();
    let dlon = (b_lon - a_lon).to_radians();
    let s = (dlat / two).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / two).sin().powi(2);
    let c = two * s.sqrt().min(F::one()).asin();
    radius * c
}

/// Great-circle distance in statute miles with the standard Earth radius.
pub fn haversine_miles(a: (f64, f64), b: (f64, f64)) -> f64 {
    haversine(a.0, a.1, b.0, b.1, EARTH_RADIUS_MILES)
}

pub fn terminal_miles(a: &Terminal, b: &Terminal) -> f64 {
    haversine_miles((a.lat, a.lon), (b.lat, b.lon))
}

/// Travel time in minutes at a constant speed.
pub fn travel_minutes(a: &Terminal, b: &Terminal, speed_mph: f64) -> Result<f64> {
    if speed_mph <= 0.0 {
        return Err(Error::Config(format!("nonpositive speed {speed_mph}")));
    }
    Ok(terminal_miles(a, b) / speed_mph * 60.0)
}

/// Initial great-circle bearing of the route `origin -> dest`, measured from
/// the reference direction, normalized to [0, 2pi).
///
/// Under the default West reference a route pointing due West has bearing 0
/// and a route pointing due North has bearing 3pi/2. Only differences between
/// bearings matter downstream, so the reference is a global rotation.
pub fn route_bearing<F: Float>(
    o_lat: F,
    o_lon: F,
    d_lat: F,
    d_lon: F,
    reference: ReferenceDirection,
) -> Result<BearingAngle<F>> {
    if o_lat == d_lat && o_lon == d_lon {
        return Err(Error::DegenerateBearing);
    }
    let lat1 = o_lat.to_radians();
    let lat2 = d_lat.to_radians();
    let dlon = (d_lon - o_lon).to_radians();
    // Compass bearing: clockwise from North.
    let y = dlon.sin() * lat2.cos();
    let x = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
    let compass = y.atan2(x);
    let offset = match reference {
        ReferenceDirection::West => F::from(1.5 * std::f64::consts::PI).unwrap(),
        ReferenceDirection::North => F::zero(),
    };
    Ok(BearingAngle::new(offset - compass))
}

pub fn terminal_bearing(
    origin: &Terminal,
    dest: &Terminal,
    reference: ReferenceDirection,
) -> Result<BearingAngle<f64>> {
    route_bearing(origin.lat, origin.lon, dest.lat, dest.lon, reference)
}

/// Wrapped circular distance between two bearings, in [0, pi].
pub fn angle_distance<F: Float>(a: BearingAngle<F>, b: BearingAngle<F>) -> F {
    let tau = F::from(std::f64::consts::TAU).unwrap();
    let d = (a.0 - b.0).abs();
    d.min(tau - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn term(id: &str, lat: f64, lon: f64) -> Terminal {
        Terminal {
            id: id.into(),
            lat,
            lon,
        }
    }

    /// Independent haversine route for the oracle checks: spherical law of
    /// cosines with the same radius.
    fn law_of_cosines_miles(a: (f64, f64), b: (f64, f64)) -> f64 {
        let (la, lb) = (a.0.to_radians(), b.0.to_radians());
        let dl = (b.1 - a.1).to_radians();
        let c = (la.sin() * lb.sin() + la.cos() * lb.cos() * dl.cos()).clamp(-1.0, 1.0);
        EARTH_RADIUS_MILES * c.acos()
    }

    #[test]
    fn identity_distance_is_zero() {
        assert_eq!(haversine_miles((33.0, -84.0), (33.0, -84.0)), 0.0);
    }

    #[test]
    fn antipodal_equator_distance() {
        let d = haversine_miles((0.0, 0.0), (0.0, 180.0));
        assert!((d - PI * EARTH_RADIUS_MILES).abs() < 0.1);
    }

    #[test]
    fn atlanta_chicago_matches_independent_oracle() {
        let atl = (33.749, -84.388);
        let chi = (41.881, -87.623);
        let expected = law_of_cosines_miles(atl, chi);
        assert!((haversine_miles(atl, chi) - expected).abs() < 0.01);
        // Frozen value from an independent haversine computation.
        assert!((haversine_miles(atl, chi) - 588.839).abs() < 0.01);
    }

    #[test]
    fn travel_minutes_arithmetic() {
        let a = term("a", 0.0, 0.0);
        assert_eq!(travel_minutes(&a, &a, 50.0).unwrap(), 0.0);

        let atl = term("atl", 33.749, -84.388);
        let chi = term("chi", 41.881, -87.623);
        let miles = terminal_miles(&atl, &chi);
        let minutes = travel_minutes(&atl, &chi, 50.0).unwrap();
        assert!((minutes - miles / 50.0 * 60.0).abs() < 1e-9);
        assert!(travel_minutes(&atl, &chi, 0.0).is_err());
    }

    #[test]
    fn bearing_reference_direction_cases() {
        // Route pointing due West.
        let west = route_bearing(0.0, 10.0, 0.0, 0.0, ReferenceDirection::West).unwrap();
        assert!(west.radians().abs() < 1e-9 || (west.radians() - 2.0 * PI).abs() < 1e-9);

        // Route pointing due North: 3pi/2 under the clockwise-from-West convention.
        let north = route_bearing(-10.0, 0.0, 0.0, 0.0, ReferenceDirection::West).unwrap();
        assert!((north.radians() - 1.5 * PI).abs() < 1e-9);
    }

    #[test]
    fn swapping_endpoints_flips_short_equatorial_bearing() {
        let fwd = route_bearing(0.0, 0.0, 0.0, 1.0, ReferenceDirection::West).unwrap();
        let rev = route_bearing(0.0, 1.0, 0.0, 0.0, ReferenceDirection::West).unwrap();
        assert!((angle_distance(fwd, rev) - PI).abs() < 1e-6);
    }

    #[test]
    fn coincident_points_are_degenerate() {
        assert!(route_bearing(1.0, 1.0, 1.0, 1.0, ReferenceDirection::West).is_err());
    }

    #[test]
    fn angle_distance_cases() {
        let a = BearingAngle::new(0.1);
        assert_eq!(angle_distance(a, a), 0.0);
        let b = BearingAngle::new(2.0 * PI - 0.1);
        assert!((angle_distance(a, b) - 0.2).abs() < 1e-12);
        let c = BearingAngle::new(0.0);
        let d = BearingAngle::new(PI);
        assert!((angle_distance(c, d) - PI).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn angle_distance_is_a_metric(a in 0.0..std::f64::consts::TAU,
                                      b in 0.0..std::f64::consts::TAU,
                                      c in 0.0..std::f64::consts::TAU) {
            let (a, b, c) = (BearingAngle::new(a), BearingAngle::new(b), BearingAngle::new(c));
            prop_assert!((angle_distance(a, b) - angle_distance(b, a)).abs() < 1e-12);
            prop_assert!(angle_distance(a, a) < 1e-12);
            prop_assert!(angle_distance(a, c) <= angle_distance(a, b) + angle_distance(b, c) + 1e-9);
        }

        #[test]
        fn haversine_symmetric_and_triangular(
            a in (-80.0..80.0, -179.0..179.0),
            b in (-80.0..80.0, -179.0..179.0),
            c in (-80.0..80.0, -179.0..179.0),
        ) {
            let ab = haversine_miles(a, b);
            let ba = haversine_miles(b, a);
            prop_assert!((ab - ba).abs() <= 1e-6 * ab.max(1.0));
            let ac = haversine_miles(a, c);
            let cb = haversine_miles(c, b);
            prop_assert!(ab <= ac + cb + 1e-6 * (ab.max(1.0)));
        }

        #[test]
        fn bearing_invariant_to_reference_rotation(
            o1 in (-80.0..80.0, -179.0..179.0),
            d1 in (-80.0..80.0, -179.0..179.0),
            o2 in (-80.0..80.0, -179.0..179.0),
            d2 in (-80.0..80.0, -179.0..179.0),
        ) {
            prop_assume!(o1 != d1 && o2 != d2);
            let w1 = route_bearing(o1.0, o1.1, d1.0, d1.1, ReferenceDirection::West).unwrap();
            let w2 = route_bearing(o2.0, o2.1, d2.0, d2.1, ReferenceDirection::West).unwrap();
            let n1 = route_bearing(o1.0, o1.1, d1.0, d1.1, ReferenceDirection::North).unwrap();
            let n2 = route_bearing(o2.0, o2.1, d2.0, d2.1, ReferenceDirection::North).unwrap();
            let diff: f64 = angle_distance(w1, w2) - angle_distance(n1, n2);
            prop_assert!(diff.abs() < 1e-9);
        }
    }
}
