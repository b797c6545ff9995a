//! Debris fields inside the inter-satellite ellipsoid and the path geometry
//! they induce.
//!
//! Frame: transmitter at the origin, receiver at `(d, 0, 0)` km. The debris
//! volume is a prolate spheroid centred on the link midpoint with its major
//! semi-axis `d / 2` along the link.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::constants::{KM, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::material::MaterialProperties;
use crate::rng::rng_from_seed;

/// Relative tolerance applied to triangle-inequality checks.
pub const GEOMETRY_EPS: f64 = 1e-9;

/// Smallest debris the model considers, m.
pub const MIN_DEBRIS_SIZE_M: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DebrisClass {
    None,
    SmoothGlass,
    RoughMetal,
}

impl DebrisClass {
    pub const ALL: [DebrisClass; 3] = [DebrisClass::None, DebrisClass::SmoothGlass, DebrisClass::RoughMetal];

    pub fn as_str(self) -> &'static str {
        match self {
            DebrisClass::None => "None",
            DebrisClass::SmoothGlass => "SmoothGlass",
            DebrisClass::RoughMetal => "RoughMetal",
        }
    }

    pub fn index(self) -> u64 {
        self as u64
    }

    pub fn is_debris(self) -> bool {
        self != DebrisClass::None
    }
}

impl fmt::Display for DebrisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DebrisClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "None" | "none" => Ok(DebrisClass::None),
            "SmoothGlass" | "smooth_glass" => Ok(DebrisClass::SmoothGlass),
            "RoughMetal" | "rough_metal" => Ok(DebrisClass::RoughMetal),
            other => Err(Error::Parse(format!("unknown debris class `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub distance_km: f64,
    pub relative_velocity_kms: f64,
    #[serde(default)]
    pub time_s: f64,
}

impl LinkGeometry {
    pub fn new(distance_km: f64, relative_velocity_kms: f64) -> Result<Self> {
        let g = LinkGeometry {
            distance_km,
            relative_velocity_kms,
            time_s: 0.0,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance_km > 0.0 && self.distance_km.is_finite()) {
            return Err(Error::InvalidConfig("link distance must be > 0".into()));
        }
        if !(self.relative_velocity_kms >= 0.0 && self.relative_velocity_kms.is_finite()) {
            return Err(Error::InvalidConfig("relative velocity must be >= 0".into()));
        }
        Ok(())
    }

    pub fn distance_m(&self) -> f64 {
        self.distance_km * KM
    }

    pub fn velocity_ms(&self) -> f64 {
        self.relative_velocity_kms * KM
    }

    pub fn tx_position(&self) -> [f64; 3] {
        [0.0; 3]
    }

    pub fn rx_position(&self) -> [f64; 3] {
        [self.distance_km, 0.0, 0.0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebrisObject {
    pub position_km: [f64; 3],
    pub class: DebrisClass,
    pub material: MaterialProperties,
    pub characteristic_size_m: f64,
}

/// Inputs to [`generate_scene`].
#[derive(Clone, Debug, PartialEq)]
pub struct SceneConfig {
    pub geometry: LinkGeometry,
    /// Ellipsoid semi-axes (along-link, y, z), km.
    pub semi_axes_km: [f64; 3],
    pub density_per_km3: f64,
    pub class: DebrisClass,
    pub material: MaterialProperties,
    pub characteristic_size_m: f64,
}

impl SceneConfig {
    /// Prolate spheroid with major semi-axis `d / 2` and the given minor axes.
    pub fn spheroid(
        geometry: LinkGeometry,
        minor_semi_axes_km: [f64; 2],
        density_per_km3: f64,
        class: DebrisClass,
        material: MaterialProperties,
        characteristic_size_m: f64,
    ) -> Self {
        SceneConfig {
            semi_axes_km: [geometry.distance_km / 2.0, minor_semi_axes_km[0], minor_semi_axes_km[1]],
            geometry,
            density_per_km3,
            class,
            material,
            characteristic_size_m,
        }
    }

    pub fn volume_km3(&self) -> f64 {
        ellipsoid_volume(self.semi_axes_km)
    }

    pub fn expected_count(&self) -> f64 {
        if self.class.is_debris() {
            self.density_per_km3 * self.volume_km3()
        } else {
            0.0
        }
    }
}

pub fn ellipsoid_volume(semi_axes: [f64; 3]) -> f64 {
    4.0 / 3.0 * std::f64::consts::PI * semi_axes[0] * semi_axes[1] * semi_axes[2]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DebrisScene {
    pub geometry: LinkGeometry,
    pub semi_axes_km: [f64; 3],
    pub density_per_km3: f64,
    pub objects: Vec<DebrisObject>,
    pub seed: u64,
}

impl DebrisScene {
    pub fn center_km(&self) -> [f64; 3] {
        [self.geometry.distance_km / 2.0, 0.0, 0.0]
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        let c = self.center_km();
        let a = self.semi_axes_km;
        let q: f64 = (0..3).map(|i| ((p[i] - c[i]) / a[i]).powi(2)).sum();
        q <= 1.0 + GEOMETRY_EPS
    }
}

/// Draws a Poisson number of debris objects uniformly inside the ellipsoid.
pub fn generate_scene(config: &SceneConfig, seed: u64) -> Result<DebrisScene> {
    config.geometry.validate()?;
    let density = config.density_per_km3;
    if !density.is_finite() || density < 0.0 {
        return Err(Error::InvalidConfig(format!("debris density {density} must be finite and >= 0")));
    }
    if config.semi_axes_km.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidConfig("ellipsoid semi-axes must be > 0".into()));
    }
    if config.class.is_debris() && config.characteristic_size_m < MIN_DEBRIS_SIZE_M {
        return Err(Error::InvalidConfig(format!(
            "debris size {} m below the 1 cm floor",
            config.characteristic_size_m
        )));
    }

    let mut rng = rng_from_seed(seed);
    let lambda = config.expected_count();
    let count = if lambda > 0.0 {
        let poisson = Poisson::new(lambda)
            .map_err(|e| Error::InvalidConfig(format!("poisson rate {lambda}: {e}")))?;
        poisson.sample(&mut rng) as usize
    } else {
        0
    };

    let [a, b, c] = config.semi_axes_km;
    let center = [config.geometry.distance_km / 2.0, 0.0, 0.0];
    let mut objects = Vec::with_capacity(count);
    while objects.len() < count {
        let u = [
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0f64),
        ];
        if u.iter().map(|x| x * x).sum::<f64>() > 1.0 {
            continue;
        }
        objects.push(DebrisObject {
            position_km: [center[0] + a * u[0], center[1] + b * u[1], center[2] + c * u[2]],
            class: config.class,
            material: config.material.clone(),
            characteristic_size_m: config.characteristic_size_m,
        });
    }

    Ok(DebrisScene {
        geometry: config.geometry,
        semi_axes_km: config.semi_axes_km,
        density_per_km3: density,
        objects,
        seed,
    })
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Returns `(s1, s2, d)` in the units of the inputs.
pub fn path_lengths(tx: [f64; 3], rx: [f64; 3], debris: [f64; 3]) -> Result<(f64, f64, f64)> {
    if tx.iter().chain(&rx).chain(&debris).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite position".into()));
    }
    let d = norm(sub(rx, tx));
    if d == 0.0 {
        return Err(Error::DegenerateGeometry("transmitter and receiver coincide".into()));
    }
    let s1 = norm(sub(debris, tx));
    let s2 = norm(sub(rx, debris));
    if s1 == 0.0 || s2 == 0.0 {
        return Err(Error::DegenerateGeometry("debris coincides with a terminal".into()));
    }
    Ok((s1, s2, d))
}

/// Half the bistatic angle at the debris: `0.5 * acos((s1² + s2² − d²) / (2 s1 s2))`.
pub fn incidence_angle(s1: f64, s2: f64, d: f64) -> Result<f64> {
    if !(s1 > 0.0 && s2 > 0.0) {
        return Err(Error::InvalidGeometry(format!("s1={s1}, s2={s2} must be > 0")));
    }
    let arg = (s1 * s1 + (s2 - d) * (s2 + d)) / (2.0 * s1 * s2);
    if !arg.is_finite() || arg.abs() > 1.0 + GEOMETRY_EPS {
        return Err(Error::InvalidGeometry(format!(
            "triangle inequality violated: cos argument {arg}"
        )));
    }
    Ok(0.5 * arg.clamp(-1.0, 1.0).acos())
}

/// Extra delay of a bounce path over the direct path, seconds. Lengths in km.
pub fn excess_delay(s1_km: f64, s2_km: f64, d_km: f64) -> Result<f64> {
    let excess = s1_km + s2_km - d_km;
    if excess < -GEOMETRY_EPS * d_km.abs().max(1.0) {
        return Err(Error::InvalidGeometry(format!("negative excess path {excess} km")));
    }
    Ok(excess.max(0.0) * KM / SPEED_OF_LIGHT)
}

/// Knife-edge excess path `h² (s1 + s2) / (2 s1 s2)`, m. `h_d` in m, `s1`/`s2` in km.
pub fn diffraction_excess_path(h_d_m: f64, s1_km: f64, s2_km: f64) -> Result<f64> {
    if !(s1_km > 0.0 && s2_km > 0.0) {
        return Err(Error::InvalidGeometry("s1, s2 must be > 0".into()));
    }
    if !(h_d_m >= 0.0) {
        return Err(Error::InvalidGeometry(format!("clearance {h_d_m} must be >= 0")));
    }
    let (s1, s2) = (s1_km * KM, s2_km * KM);
    Ok(h_d_m * h_d_m * (s1 + s2) / (2.0 * s1 * s2))
}

/// Distance from `p` to the segment `a`–`b`.
pub fn distance_to_segment(p: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = ab.iter().map(|x| x * x).sum::<f64>();
    let t = if len2 > 0.0 {
        (ap.iter().zip(&ab).map(|(x, y)| x * y).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mechanism {
    LoS,
    Reflection,
    Scattering,
    Diffraction,
}

impl Mechanism {
    pub const NLOS: [Mechanism; 3] = [Mechanism::Reflection, Mechanism::Scattering, Mechanism::Diffraction];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathGeometry {
    pub s1_km: f64,
    pub s2_km: f64,
    pub d_km: f64,
    pub incidence_angle_rad: f64,
    /// Perpendicular clearance from the debris to the LoS segment, m.
    pub clearance_m: f64,
    pub mechanism: Mechanism,
}

impl PathGeometry {
    pub fn for_object(geometry: &LinkGeometry, position_km: [f64; 3], mechanism: Mechanism) -> Result<Self> {
        let (tx, rx) = (geometry.tx_position(), geometry.rx_position());
        let (s1, s2, d) = path_lengths(tx, rx, position_km)?;
        Ok(PathGeometry {
            s1_km: s1,
            s2_km: s2,
            d_km: d,
            incidence_angle_rad: incidence_angle(s1, s2, d)?,
            clearance_m: distance_to_segment(position_km, tx, rx) * KM,
            mechanism,
        })
    }

    pub fn los(geometry: &LinkGeometry) -> Self {
        PathGeometry {
            s1_km: geometry.distance_km / 2.0,
            s2_km: geometry.distance_km / 2.0,
            d_km: geometry.distance_km,
            incidence_angle_rad: std::f64::consts::FRAC_PI_2,
            clearance_m: 0.0,
            mechanism: Mechanism::LoS,
        }
    }
}

/// Line-oriented text export: a header `d_km,v_kms,density,a;b;c,seed`
/// followed by `x_km,y_km,z_km,class,size_m` per object.
pub fn scene_to_text(scene: &DebrisScene) -> String {
    let [a, b, c] = scene.semi_axes_km;
    let mut out = format!(
        "{},{},{:e},{};{};{},{}\n",
        scene.geometry.distance_km, scene.geometry.relative_velocity_kms, scene.density_per_km3, a, b, c, scene.seed
    );
    for o in &scene.objects {
        let [x, y, z] = o.position_km;
        out.push_str(&format!("{x},{y},{z},{},{}\n", o.class, o.characteristic_size_m));
    }
    out
}

/// Parsed form of [`scene_to_text`]; materials are not part of the format.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneText {
    pub geometry: LinkGeometry,
    pub density_per_km3: f64,
    pub semi_axes_km: [f64; 3],
    pub seed: u64,
    pub objects: Vec<([f64; 3], DebrisClass, f64)>,
}

pub fn scene_from_text(text: &str) -> Result<SceneText> {
    let bad = |m: &str| Error::Parse(format!("scene text: {m}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("bad number `{s}`")));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("missing header"))?.split(',').collect();
    if header.len() != 5 {
        return Err(bad("header needs 5 fields"));
    }
    let axes: Vec<f64> = header[3].split(';').map(num).collect::<Result<_>>()?;
    if axes.len() != 3 {
        return Err(bad("semi_axes needs 3 values"));
    }
    let mut objects = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad(&format!("object line `{line}`")));
        }
        objects.push(([num(f[0])?, num(f[1])?, num(f[2])?], f[3].parse()?, num(f[4])?));
    }
    Ok(SceneText {
        geometry: LinkGeometry {
            distance_km: num(header[0])?,
            relative_velocity_kms: num(header[1])?,
            time_s: 0.0,
        },
        density_per_km3: num(header[2])?,
        semi_axes_km: [axes[0], axes[1], axes[2]],
        seed: header[4].trim().parse().map_err(|_| bad("bad seed"))?,
        objects,
    })
}
