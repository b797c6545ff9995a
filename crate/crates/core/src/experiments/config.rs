use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::link::{CsiMethod, LinkOptions};
use crate::material::{Breakpoints, MaterialProperties};
use crate::mimo::ArrayConfig;
use crate::propagation::{DiffractionMu, Polarization, SeriesOptions};
use crate::scene::{DebrisClass, LinkGeometry, Mechanism};
use crate::sensing::{FeatureMode, KernelChoice, SvmParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub distance_km: f64,
    pub relative_velocity_kms: f64,
    pub csi_method: CsiMethod,
    /// Pilot block length; `2·Nt` when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pilot_length: Option<usize>,
    pub symbols_per_antenna: usize,
    pub feature_mode: FeatureMode,
}

impl Default for LinkSection {
    fn default() -> Self {
        LinkSection {
            distance_km: 500.0,
            relative_velocity_kms: 7.0,
            csi_method: CsiMethod::LeastSquares,
            pilot_length: None,
            symbols_per_antenna: 500,
            feature_mode: FeatureMode::Pooled,
        }
    }
}

impl LinkSection {
    pub fn geometry(&self) -> Result<LinkGeometry> {
        LinkGeometry::new(self.distance_km, self.relative_velocity_kms)
    }

    pub fn options(&self) -> LinkOptions {
        LinkOptions {
            csi_method: self.csi_method,
            pilot_length: self.pilot_length,
            symbols_per_antenna: self.symbols_per_antenna,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSection {
    /// Minor semi-axes of the debris spheroid, km; the major one is `d / 2`.
    pub minor_semi_axes_km: [f64; 2],
    pub characteristic_size_m: f64,
}

impl Default for SceneSection {
    fn default() -> Self {
        SceneSection { minor_semi_axes_km: [50.0, 50.0], characteristic_size_m: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialsSection {
    pub smooth_glass: MaterialProperties,
    pub rough_metal: MaterialProperties,
}

impl Default for MaterialsSection {
    fn default() -> Self {
        MaterialsSection {
            smooth_glass: MaterialProperties::default_smooth_glass(),
            rough_metal: MaterialProperties::default_rough_metal(),
        }
    }
}

impl MaterialsSection {
    pub fn for_class(&self, class: DebrisClass) -> Option<&MaterialProperties> {
        match class {
            DebrisClass::None => None,
            DebrisClass::SmoothGlass => Some(&self.smooth_glass),
            DebrisClass::RoughMetal => Some(&self.rough_metal),
        }
    }
}

/// Activation probability per mechanism, tabulated against frequency and
/// interpolated linearly in `log10 f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionTable {
    pub reflection: Breakpoints,
    pub scattering: Breakpoints,
    pub diffraction: Breakpoints,
}

fn log_interp(table: &Breakpoints, f: f64) -> Option<f64> {
    let log_table = Breakpoints(table.0.iter().map(|&(x, v)| (x.log10(), v)).collect());
    if f > 0.0 {
        log_table.at(f.log10())
    } else {
        None
    }
}

impl InteractionTable {
    fn table(&self, mechanism: Mechanism) -> Option<&Breakpoints> {
        match mechanism {
            Mechanism::LoS => None,
            Mechanism::Reflection => Some(&self.reflection),
            Mechanism::Scattering => Some(&self.scattering),
            Mechanism::Diffraction => Some(&self.diffraction),
        }
    }

    pub fn probability(&self, mechanism: Mechanism, f: f64) -> Result<f64> {
        let table = self
            .table(mechanism)
            .ok_or_else(|| Error::InvalidArgument("line of sight has no activation probability".into()))?;
        log_interp(table, f).ok_or_else(|| {
            Error::InvalidConfig(format!("interaction table for {mechanism:?} does not cover {f:e} Hz"))
        })
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        for (name, t) in [("reflection", &self.reflection), ("scattering", &self.scattering), ("diffraction", &self.diffraction)] {
            t.validate(&format!("{what}.{name}"))?;
            if t.0.iter().any(|p| !(0.0..=1.0).contains(&p.1)) {
                return Err(Error::InvalidConfig(format!("{what}.{name}: probabilities must lie in [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn constant(p: f64) -> Self {
        let b = Breakpoints::constant(1e9, 1e14, p);
        InteractionTable { reflection: b.clone(), scattering: b.clone(), diffraction: b }
    }
}

fn four_band(p: [f64; 4]) -> Breakpoints {
    Breakpoints(vec![(1e10, p[0]), (3e10, p[0]), (3e11, p[1]), (3e12, p[2]), (5e12, p[3]), (1e13, p[3])])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteractionsSection {
    pub smooth_glass: InteractionTable,
    pub rough_metal: InteractionTable,
    /// Standard deviation of the per-object facet tilt that offsets the
    /// scattered direction from the specular one, rad.
    pub scatter_tilt_std_rad: f64,
}

impl Default for InteractionsSection {
    fn default() -> Self {
        InteractionsSection {
            smooth_glass: InteractionTable {
                reflection: four_band([0.25, 0.45, 0.85, 0.92]),
                scattering: four_band([0.05, 0.10, 0.20, 0.25]),
                diffraction: four_band([0.15, 0.25, 0.40, 0.50]),
            },
            rough_metal: InteractionTable {
                reflection: four_band([0.20, 0.35, 0.70, 0.80]),
                scattering: four_band([0.15, 0.30, 0.75, 0.85]),
                diffraction: four_band([0.15, 0.25, 0.40, 0.50]),
            },
            scatter_tilt_std_rad: 2e-3,
        }
    }
}

impl InteractionsSection {
    pub fn for_class(&self, class: DebrisClass) -> Option<&InteractionTable> {
        match class {
            DebrisClass::None => None,
            DebrisClass::SmoothGlass => Some(&self.smooth_glass),
            DebrisClass::RoughMetal => Some(&self.rough_metal),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub n_subbands: usize,
    pub bandwidth_hz: f64,
    /// Rician K-factor applied when at least one debris path is active, dB.
    pub k_factor_db: f64,
    pub spacing_tx: f64,
    pub spacing_rx: f64,
    pub polarization: Polarization,
    pub series: SeriesOptions,
    pub diffraction: DiffractionMu,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            n_subbands: 8,
            bandwidth_hz: 10e9,
            k_factor_db: 10.0,
            spacing_tx: 0.5,
            spacing_rx: 0.5,
            polarization: Polarization::TE,
            series: SeriesOptions::default(),
            diffraction: DiffractionMu::default(),
        }
    }
}

impl ChannelSection {
    pub fn array(&self, n: usize) -> ArrayConfig {
        ArrayConfig { n_tx: n, n_rx: n, spacing_tx: self.spacing_tx, spacing_rx: self.spacing_rx }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmSection {
    pub kernel: KernelChoice,
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub train_fraction: f64,
}

impl Default for SvmSection {
    fn default() -> Self {
        let p = SvmParams::default();
        SvmSection { kernel: p.kernel, c: p.c, tol: p.tol, max_iter: p.max_iter, train_fraction: 0.7 }
    }
}

impl SvmSection {
    pub fn params(&self, seed: u64) -> SvmParams {
        SvmParams { kernel: self.kernel, c: self.c, tol: self.tol, max_iter: self.max_iter, seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignSection {
    pub name: String,
    pub frequencies_hz: Vec<f64>,
    pub snr_db: Vec<f64>,
    pub mimo_sizes: Vec<usize>,
    pub classes: Vec<DebrisClass>,
    pub densities_per_km3: Vec<f64>,
    /// Samples per evaluation group, split across the classes.
    pub samples_per_condition: usize,
}

impl Default for CampaignSection {
    fn default() -> Self {
        CampaignSection {
            name: "custom".into(),
            frequencies_hz: vec![30e9, 3e12, 5e12],
            snr_db: vec![15.0],
            mimo_sizes: vec![16],
            classes: DebrisClass::ALL.to_vec(),
            densities_per_km3: vec![1e-6],
            samples_per_condition: 200,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub link: LinkSection,
    pub scene: SceneSection,
    pub materials: MaterialsSection,
    pub interactions: InteractionsSection,
    pub channel: ChannelSection,
    pub svm: SvmSection,
    pub campaign: CampaignSection,
}

impl ExperimentConfig {
    /// Preset campaign grids for the three reference studies.
    pub fn table(which: u32) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let c = &mut cfg.campaign;
        match which {
            1 => {
                c.name = "table1".into();
                c.frequencies_hz = vec![30e9, 300e9, 3e12, 5e12];
                c.snr_db = vec![15.0];
                c.mimo_sizes = vec![16];
                c.densities_per_km3 = vec![1e-7, 5e-7, 1e-6];
            }
            2 => {
                c.name = "table2".into();
                c.frequencies_hz = vec![30e9, 3e12, 5e12];
                c.snr_db = vec![5.0, 10.0, 15.0, 20.0];
                c.mimo_sizes = vec![16];
                c.densities_per_km3 = vec![1e-6];
            }
            3 => {
                c.name = "table3".into();
                c.frequencies_hz = vec![30e9, 300e9, 3e12, 5e12];
                c.snr_db = vec![20.0];
                c.mimo_sizes = vec![4, 16, 64];
                c.densities_per_km3 = vec![1e-6];
            }
            _ => return Err(Error::InvalidConfig(format!("unknown table {which}; expected 1, 2 or 3"))),
        }
        Ok(cfg)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        self.link.geometry()?;
        self.link.options().validate()?;
        if self.scene.minor_semi_axes_km.iter().any(|a| !(*a > 0.0)) {
            return bad("scene.minor_semi_axes_km must be > 0".into());
        }
        self.materials.smooth_glass.validate()?;
        self.materials.rough_metal.validate()?;
        self.interactions.smooth_glass.validate("interactions.smooth_glass")?;
        self.interactions.rough_metal.validate("interactions.rough_metal")?;
        if !(self.interactions.scatter_tilt_std_rad >= 0.0) {
            return bad("interactions.scatter_tilt_std_rad must be >= 0".into());
        }
        let ch = &self.channel;
        if ch.n_subbands == 0 || !(ch.bandwidth_hz >= 0.0) || !ch.k_factor_db.is_finite() {
            return bad("channel: n_subbands >= 1, bandwidth >= 0 and finite k_factor_db required".into());
        }
        self.svm.params(0).validate()?;
        if !(self.svm.train_fraction > 0.0 && self.svm.train_fraction < 1.0) {
            return bad("svm.train_fraction must lie in (0, 1)".into());
        }
        let c = &self.campaign;
        if c.frequencies_hz.is_empty() || c.snr_db.is_empty() || c.mimo_sizes.is_empty() || c.classes.is_empty() {
            return bad("campaign lists must be non-empty".into());
        }
        if c.frequencies_hz.iter().any(|f| !(*f > ch.bandwidth_hz / 2.0)) {
            return bad("campaign frequencies must exceed half the bandwidth".into());
        }
        if c.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("campaign SNRs must be finite".into());
        }
        if c.mimo_sizes.contains(&0) {
            return bad("campaign MIMO sizes must be >= 1".into());
        }
        let mut seen = Vec::new();
        for class in &c.classes {
            if seen.contains(class) {
                return bad(format!("campaign class {class} listed twice"));
            }
            seen.push(*class);
        }
        if c.classes.iter().any(|k| k.is_debris()) && c.densities_per_km3.is_empty() {
            return bad("campaign densities must be non-empty when debris classes are configured".into());
        }
        if c.densities_per_km3.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return bad("campaign densities must be finite and >= 0".into());
        }
        if c.samples_per_condition < 2 * c.classes.len() {
            return bad(format!(
                "samples_per_condition {} leaves fewer than 2 samples per class",
                c.samples_per_condition
            ));
        }
        for &f in &c.frequencies_hz {
            for class in &c.classes {
                if let Some(t) = self.interactions.for_class(*class) {
                    for m in Mechanism::NLOS {
                        t.probability(m, f)?;
                    }
                }
            }
        }
        Ok(())
    }
}
