use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::config::InteractionTable;
use crate::error::{Error, Result};
use crate::scene::{DebrisScene, Mechanism};

/// One activated (object, mechanism) pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActiveInteraction {
    pub object_index: usize,
    pub mechanism: Mechanism,
    /// Facet tilt (elevation, azimuth) of the object, rad.
    pub tilt_rad: (f64, f64),
}

/// Activates each mechanism of each object independently with the table
/// probability at `f`. Every object consumes the same draws whatever the
/// frequency, so a path active at one frequency stays active wherever its
/// probability is higher.
pub fn draw_interactions<R: Rng + ?Sized>(
    scene: &DebrisScene,
    f: f64,
    table: Option<&InteractionTable>,
    tilt_std_rad: f64,
    rng: &mut R,
) -> Result<Vec<ActiveInteraction>> {
    let tilt = Normal::new(0.0, tilt_std_rad).map_err(|e| Error::InvalidConfig(format!("tilt std: {e}")))?;
    let mut out = Vec::new();
    if scene.objects.is_empty() {
        return Ok(out);
    }
    let table = table.ok_or_else(|| Error::InvalidConfig("no interaction table for a debris class".into()))?;
    let probs = Mechanism::NLOS.iter().map(|m| table.probability(*m, f)).collect::<Result<Vec<f64>>>()?;
    for (i, _) in scene.objects.iter().enumerate() {
        let u: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        let t = (tilt.sample(rng), tilt.sample(rng));
        for (k, m) in Mechanism::NLOS.iter().enumerate() {
            if u[k] < probs[k] {
                out.push(ActiveInteraction { object_index: i, mechanism: *m, tilt_rad: t });
            }
        }
    }
    Ok(out)
}
