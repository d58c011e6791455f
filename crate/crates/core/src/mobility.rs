//! VR-user trajectories in a planar room and the AoA they present to the
//! access point's array.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::array::USpaceAngle;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// 4 km/h in m/s, rounded up at the third decimal.
pub const MAX_USER_SPEED_MPS: f64 = 1.112;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomScenario {
    pub ap_position: Vec2,
    /// Direction of the array line; normalized on use.
    pub ula_axis: Vec2,
    pub user_start: Vec2,
    /// User speed in m/s.
    pub speed: f64,
    /// Tracking update (handshake) period in seconds.
    #[serde(default = "default_update_interval")]
    pub update_interval: f64,
    /// Permit speeds above the 4 km/h bound.
    #[serde(default)]
    pub allow_overspeed: bool,
}

fn default_update_interval() -> f64 {
    0.01
}

impl RoomScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed.is_finite() && self.speed >= 0.0) {
            return Err(Error::Config(format!("speed must be non-negative, got {}", self.speed)));
        }
        if self.speed > MAX_USER_SPEED_MPS && !self.allow_overspeed {
            return Err(Error::Config(format!(
                "speed {} m/s exceeds the {MAX_USER_SPEED_MPS} m/s (4 km/h) bound; set allow_overspeed to override",
                self.speed
            )));
        }
        if !(self.update_interval.is_finite() && self.update_interval > 0.0) {
            return Err(Error::Config(format!(
                "update_interval must be positive, got {}",
                self.update_interval
            )));
        }
        if !self.ula_axis.norm().is_normal() {
            return Err(Error::Config("ula_axis must be non-zero".into()));
        }
        Ok(())
    }

    fn axis_unit(&self) -> Vec2 {
        self.ula_axis.scale(1.0 / self.ula_axis.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub position: Vec2,
    pub aoa_u: USpaceAngle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum TrajectoryKind {
    /// Straight line from `user_start` along `heading`.
    Linear { heading: Vec2 },
    /// Polyline from `user_start` through each waypoint; the user stops at
    /// the last one.
    Waypoints { points: Vec<Vec2> },
    /// Heading perturbed by a Gaussian turn of `turn_std_rad` every update.
    RandomWalk { seed: u64, turn_std_rad: f64 },
}

/// `u` seen from the AP: the AP→user unit vector projected on the array axis.
pub fn aoa_of_position(sc: &RoomScenario, p: Vec2) -> Result<USpaceAngle> {
    let d = p - sc.ap_position;
    let r = d.norm();
    if !r.is_normal() {
        return Err(Error::Domain("user position coincides with the access point".into()));
    }
    let u = d.scale(1.0 / r).dot(sc.axis_unit()).clamp(-1.0, 1.0);
    USpaceAngle::new(u)
}

pub fn generate_trajectory(sc: &RoomScenario, kind: &TrajectoryKind, duration: f64) -> Result<Vec<TrajectorySample>> {
    sc.validate()?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::Config(format!("duration must be positive, got {duration}")));
    }
    let dt = sc.update_interval;
    let steps = (duration / dt + 1e-9).floor() as usize;
    let times = (0..=steps).map(|i| i as f64 * dt);

    let positions: Vec<Vec2> = match kind {
        TrajectoryKind::Linear { heading } => {
            if !heading.norm().is_normal() {
                return Err(Error::Config("linear heading must be non-zero".into()));
            }
            let v = heading.scale(sc.speed / heading.norm());
            times.clone().map(|t| sc.user_start + v.scale(t)).collect()
        }
        TrajectoryKind::Waypoints { points } => {
            if points.is_empty() {
                return Err(Error::Config("waypoint trajectory needs at least one point".into()));
            }
            let mut path = vec![sc.user_start];
            path.extend_from_slice(points);
            times.clone().map(|t| point_along(&path, sc.speed * t)).collect()
        }
        TrajectoryKind::RandomWalk { seed, turn_std_rad } => {
            if !(turn_std_rad.is_finite() && *turn_std_rad >= 0.0) {
                return Err(Error::Config("turn_std_rad must be non-negative".into()));
            }
            let mut rng = rng_from_seed(*seed);
            let mut heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let mut p = sc.user_start;
            let mut out = Vec::with_capacity(steps + 1);
            out.push(p);
            for _ in 0..steps {
                let turn: f64 = rng.sample(StandardNormal);
                heading += turn_std_rad * turn;
                p = p + Vec2::new(heading.cos(), heading.sin()).scale(sc.speed * dt);
                out.push(p);
            }
            out
        }
    };

    times
        .zip(positions)
        .map(|(t, position)| {
            Ok(TrajectorySample {
                t,
                position,
                aoa_u: aoa_of_position(sc, position)?,
            })
        })
        .collect()
}

/// Point at arc length `s` along a polyline, clamped to its end.
fn point_along(path: &[Vec2], mut s: f64) -> Vec2 {
    for seg in path.windows(2) {
        let d = seg[1] - seg[0];
        let len = d.norm();
        if s <= len {
            return if len > 0.0 { seg[0] + d.scale(s / len) } else { seg[0] };
        }
        s -= len;
    }
    *path.last().expect("non-empty path")
}

/// Tangential pass: the user walks parallel to the array at `range` metres
/// from an AP at the origin, centred on broadside, for `duration` seconds.
pub fn tangential_pass(range: f64, speed: f64, update_interval: f64, duration: f64) -> (RoomScenario, TrajectoryKind) {
    let sc = RoomScenario {
        ap_position: Vec2::default(),
        ula_axis: Vec2::new(1.0, 0.0),
        user_start: Vec2::new(-0.5 * speed * duration, range),
        speed,
        update_interval,
        allow_overspeed: false,
    };
    (sc, TrajectoryKind::Linear { heading: Vec2::new(1.0, 0.0) })
}
