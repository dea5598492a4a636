//! Random valid populations around a reference tube.
//!
//! Noise is added in the convex coordinates: Gaussian jitter on `ς·u`
//! (radially clamped below 1) and on `ψ` (clamped to `[−π, π]`), then a
//! log-normal global scale. Every member is therefore valid by
//! construction and the population size is exact.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{scale, ETRep};
use crate::rng::task_rng;
use crate::shape_space::{map_from_convex, map_to_convex, ConvexPoint, SampleSet, FEATURES_PER_SECTION};

/// Upper clamp for the perturbed `ς`.
pub const SIGMA_CLAMP: f64 = 1.0 - 1e-6;

/// Noise parameters; the reference tube is supplied separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub m: usize,
    #[serde(default)]
    pub sigma_v: f64,
    #[serde(default)]
    pub sigma_psi: f64,
    #[serde(default)]
    pub sigma_scale: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub reference: ETRep,
    pub noise: NoiseConfig,
}

fn normal(sd: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sd).map_err(|e| Error::Domain(format!("standard deviation {sd}: {e}")))
}

fn perturb(base: &ConvexPoint, noise: &NoiseConfig, rng: &mut impl Rng) -> Result<ETRep> {
    let dv = normal(noise.sigma_v)?;
    let dpsi = normal(noise.sigma_psi)?;
    let dscale = normal(noise.sigma_scale)?;
    let mut coords = base.coords().to_vec();
    for section in coords.chunks_exact_mut(FEATURES_PER_SECTION).skip(1) {
        let mut c1 = section[0] + dv.sample(rng);
        let mut c2 = section[1] + dv.sample(rng);
        let sigma = c1.hypot(c2);
        if sigma > SIGMA_CLAMP {
            c1 *= SIGMA_CLAMP / sigma;
            c2 *= SIGMA_CLAMP / sigma;
        }
        section[0] = c1;
        section[1] = c2;
        section[2] = (section[2] + dpsi.sample(rng)).clamp(-PI, PI);
    }
    let member = map_from_convex(&ConvexPoint::from_coords(coords)?)?;
    scale(&member, dscale.sample(rng).exp())
}

/// Draws `m` valid ETReps around the reference; member `j` uses its own
/// random stream, so output does not depend on the thread count.
pub fn simulate_population(cfg: &SimulationConfig) -> Result<SampleSet> {
    let noise = &cfg.noise;
    if noise.m == 0 {
        return Err(Error::Domain("population size must be at least 1".into()));
    }
    for (name, sd) in [
        ("sigma_v", noise.sigma_v),
        ("sigma_psi", noise.sigma_psi),
        ("sigma_scale", noise.sigma_scale),
    ] {
        if !(sd >= 0.0 && sd.is_finite()) {
            return Err(Error::Domain(format!(
                "{name} = {sd} must be a finite nonnegative number"
            )));
        }
    }
    let base = map_to_convex(&cfg.reference)?;
    let members = (0..noise.m)
        .into_par_iter()
        .map(|j| {
            let mut rng = task_rng(noise.seed, j as u64);
            let mut member = perturb(&base, noise, &mut rng)?;
            member.metadata = cfg.reference.metadata.clone();
            Ok(member)
        })
        .collect::<Result<Vec<_>>>()?;
    SampleSet::new(members)
}
