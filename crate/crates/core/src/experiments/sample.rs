use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::interactions::draw_interactions;
use crate::error::{Error, Result};
use crate::link::run_link;
use crate::mimo::{apply_rician_smallscale, assemble_subband, path_directions, subband_grid, Direction, PathContribution, SubbandChannel};
use crate::propagation::{
    diffracted_response, los_response, path_delay, reflected_response, scattered_response, ScatterGeometry,
};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::scene::{generate_scene, DebrisClass, Mechanism, PathGeometry, SceneConfig};
use crate::sensing::FeatureVector;

/// One simulated condition cell: the unit of the sample CSV files and of
/// the metrics table. The no-debris class carries no density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub frequency_hz: f64,
    pub snr_db: f64,
    pub mimo: usize,
    pub class: DebrisClass,
    pub density_per_km3: Option<f64>,
}

impl Cell {
    pub fn id(&self) -> String {
        let mut s = format!("f{:e}_snr{}_m{}_{}", self.frequency_hz, self.snr_db, self.mimo, self.class);
        if let Some(d) = self.density_per_km3 {
            s.push_str(&format!("_d{d:e}"));
        }
        s
    }

    /// Ground-truth label: the cell class, except that an empty debris field
    /// (density zero) is labelled as no debris.
    pub fn label(&self) -> DebrisClass {
        match self.density_per_km3 {
            Some(0.0) => DebrisClass::None,
            _ => self.class,
        }
    }
}

pub const FLAG_TRAIN: &str = "train";
pub const FLAG_TEST: &str = "test";
pub const FLAG_RANK_DEFICIENT: &str = "zf_rank_deficient";
pub const FLAG_PATH_SKIPPED: &str = "path_skipped";
pub const FLAG_BK_NONCONVERGED: &str = "bk_nonconverged";
pub const FLAG_SAMPLE_ERROR: &str = "sample_error";

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub condition_id: String,
    pub sample_idx: usize,
    pub label: DebrisClass,
    pub ber: f64,
    pub features: Option<FeatureVector>,
    pub det_value: Option<f64>,
    pub pred_label: Option<DebrisClass>,
    pub flags: Vec<String>,
}

impl SampleRecord {
    pub fn add_flag(&mut self, flag: &str) {
        if !self.flags.iter().any(|f| f == flag) {
            self.flags.push(flag.to_string());
        }
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

/// Full per-sample output, including the channel snapshots.
#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub record: SampleRecord,
    pub channels: Vec<SubbandChannel>,
    pub active_paths: usize,
}

/// Seed of the debris field and interaction draws; shared by cells that
/// differ only in frequency, SNR or array size.
fn scene_seed(master: u64, cell: &Cell, sample_idx: usize) -> u64 {
    let density_bits = cell.density_per_km3.map_or(0, f64::to_bits);
    derive_seed(master, &[stream::SCENE, cell.class.index(), density_bits, sample_idx as u64])
}

/// Seed of bits and noise; independent of the SNR.
fn noise_seed(master: u64, cell: &Cell, sample_idx: usize) -> u64 {
    derive_seed(
        master,
        &[
            stream::DATA_NOISE,
            cell.class.index(),
            cell.density_per_km3.map_or(0, f64::to_bits),
            sample_idx as u64,
            cell.frequency_hz.to_bits(),
            cell.mimo as u64,
        ],
    )
}

/// scene → interactions → per-sub-band channel → Rician → link → features.
pub fn simulate_sample(cfg: &ExperimentConfig, cell: &Cell, sample_idx: usize, master_seed: u64) -> Result<SampleOutcome> {
    let geometry = cfg.link.geometry()?;
    let sseed = scene_seed(master_seed, cell, sample_idx);
    let material = cfg.materials.for_class(cell.class).cloned().unwrap_or_else(|| cfg.materials.smooth_glass.clone());
    let scene_cfg = SceneConfig::spheroid(
        geometry,
        cfg.scene.minor_semi_axes_km,
        cell.density_per_km3.unwrap_or(0.0),
        cell.class,
        material,
        cfg.scene.characteristic_size_m,
    );
    let scene = generate_scene(&scene_cfg, sseed)?;
    let mut irng = rng_from_seed(derive_seed(sseed, &[stream::INTERACTIONS]));
    let active = draw_interactions(
        &scene,
        cell.frequency_hz,
        cfg.interactions.for_class(cell.class),
        cfg.interactions.scatter_tilt_std_rad,
        &mut irng,
    )?;

    let mut record = SampleRecord {
        condition_id: cell.id(),
        sample_idx,
        label: cell.label(),
        ber: f64::NAN,
        features: None,
        det_value: None,
        pred_label: None,
        flags: Vec::new(),
    };

    let array = cfg.channel.array(cell.mimo);
    let freqs = subband_grid(cell.frequency_hz, cfg.channel.n_subbands, cfg.channel.bandwidth_hz)?;
    let mut channels = Vec::with_capacity(freqs.len());
    let mut active_paths = 0;
    for (i, &f) in freqs.iter().enumerate() {
        let mut paths = vec![PathContribution {
            mechanism: Mechanism::LoS,
            gain: los_response(f, &geometry)?,
            delay_s: path_delay(&PathGeometry::los(&geometry))?,
            aod: Direction::default(),
            aoa: Direction::default(),
        }];
        for act in &active {
            let obj = &scene.objects[act.object_index];
            match debris_path(cfg, &geometry, obj.position_km, &obj.material, act, f) {
                Ok((p, converged)) => {
                    if !converged {
                        record.add_flag(FLAG_BK_NONCONVERGED);
                    }
                    paths.push(p);
                }
                Err(e) => {
                    log::debug!("{} sample {sample_idx}: skipping {:?} path: {e}", record.condition_id, act.mechanism);
                    record.add_flag(FLAG_PATH_SKIPPED);
                }
            }
        }
        let nlos = paths.len() - 1;
        active_paths = active_paths.max(nlos);
        let mut ch = assemble_subband(&paths, &array, f, geometry.velocity_ms(), true)?;
        if nlos > 0 {
            let mut rrng = rng_from_seed(derive_seed(sseed, &[stream::RICIAN, i as u64, cell.mimo as u64]));
            ch.matrix = apply_rician_smallscale(&ch.matrix, cfg.channel.k_factor_db, &mut rrng)?;
        }
        channels.push(ch);
    }

    let outcome = run_link(&channels, cell.snr_db, &cfg.link.options(), noise_seed(master_seed, cell, sample_idx))?;
    if outcome.rank_deficient {
        record.add_flag(FLAG_RANK_DEFICIENT);
    }
    record.ber = outcome.ber;
    record.features = Some(crate::sensing::features_from_csi(&outcome.csi, cfg.link.feature_mode)?);
    Ok(SampleOutcome { record, channels, active_paths })
}

fn debris_path(
    cfg: &ExperimentConfig,
    geometry: &crate::scene::LinkGeometry,
    position_km: [f64; 3],
    material: &crate::material::MaterialProperties,
    act: &super::interactions::ActiveInteraction,
    f: f64,
) -> Result<(PathContribution, bool)> {
    let path = PathGeometry::for_object(geometry, position_km, act.mechanism)?;
    let (aod, aoa) = path_directions(geometry, position_km)?;
    let pol = cfg.channel.polarization;
    let mut converged = true;
    let gain = match act.mechanism {
        Mechanism::Reflection => reflected_response(f, &path, material, pol)?,
        Mechanism::Scattering => {
            let t1 = path.incidence_angle_rad;
            let geom = ScatterGeometry { theta1: t1, theta2: t1 - act.tilt_rad.0.abs(), theta3: act.tilt_rad.1.abs() };
            let (g, s) = scattered_response(f, &path, &geom, material, pol, &cfg.channel.series)?;
            converged = s.converged;
            g
        }
        Mechanism::Diffraction => diffracted_response(f, &path, &cfg.channel.diffraction)?,
        Mechanism::LoS => return Err(Error::InvalidArgument("line of sight is not a debris path".into())),
    };
    Ok((PathContribution { mechanism: act.mechanism, gain, delay_s: path_delay(&path)?, aod, aoa }, converged))
}
