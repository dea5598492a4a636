//! Boundary meshes in Wavefront OBJ.
//!
//! Ring `i`, vertex `j` sits at `p_i + a_i cos φ_j · F_i e₂ + b_i sin φ_j · F_i e₃`
//! with `φ_j = 2πj / M`. Consecutive rings are joined by two triangles per
//! quad. With caps, the first and last spine points are added as fan
//! centers.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::model::{reconstruct_global, validate, ETRep, GlobalTube};
use crate::shape_space::{morph_sequence, Method};

pub const DEFAULT_RING_SAMPLES: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub vertices: Vec<Vec3>,
    /// Zero-based vertex indices.
    pub faces: Vec<[usize; 3]>,
}

impl BoundaryMesh {
    pub fn from_tube(g: &GlobalTube, ring_samples: usize, caps: bool) -> Result<Self> {
        if ring_samples < 3 {
            return Err(Error::Domain(format!("ring samples {ring_samples} < 3")));
        }
        let rings = g.points.len();
        let m = ring_samples;
        let mut vertices = Vec::with_capacity(rings * m + 2);
        for i in 0..rings {
            let (a, b) = g.radii[i];
            let (e2, e3) = (g.frames[i].column(1), g.frames[i].column(2));
            for j in 0..m {
                let phi = 2.0 * PI * j as f64 / m as f64;
                vertices.push(g.points[i] + e2 * (a * phi.cos()) + e3 * (b * phi.sin()));
            }
        }
        let idx = |i: usize, j: usize| i * m + j % m;
        let mut faces = Vec::with_capacity(2 * rings * m);
        for i in 0..rings.saturating_sub(1) {
            for j in 0..m {
                faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        if caps {
            let start = vertices.len();
            vertices.push(g.points[0]);
            vertices.push(g.points[rings - 1]);
            for j in 0..m {
                faces.push([start, idx(0, j + 1), idx(0, j)]);
                faces.push([start + 1, idx(rings - 1, j), idx(rings - 1, j + 1)]);
            }
        }
        Ok(BoundaryMesh { vertices, faces })
    }

    pub fn to_obj_string(&self) -> String {
        let mut out = String::with_capacity(self.vertices.len() * 48 + self.faces.len() * 24);
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes the boundary mesh of `s`. Invalid ETReps are refused unless
/// `allow_invalid` is set.
pub fn export_obj(
    s: &ETRep,
    ring_samples: usize,
    caps: bool,
    allow_invalid: bool,
    path: impl AsRef<Path>,
) -> Result<()> {
    let tube = reconstruct_global(s, allow_invalid)?;
    write_text(
        path.as_ref(),
        &BoundaryMesh::from_tube(&tube, ring_samples, caps)?.to_obj_string(),
    )
}

/// Writes `step_000.obj … step_{steps}.obj` along the chosen path, plus
/// `validity.csv` with one row per step.
pub fn export_morph(
    s1: &ETRep,
    s2: &ETRep,
    steps: usize,
    method: Method,
    ring_samples: usize,
    dir: impl AsRef<Path>,
) -> Result<()> {
    for (i, s) in [s1, s2].into_iter().enumerate() {
        let report = validate(s);
        if !report.valid {
            return Err(Error::Validation(format!("morph endpoint {} is invalid", i + 1)));
        }
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let sequence = morph_sequence(s1, s2, steps, method)?;
    let mut validity = String::from("step,gamma,valid,min_margin,failing\n");
    for (k, step) in sequence.iter().enumerate() {
        let mesh = BoundaryMesh::from_tube(&step.tube, ring_samples, false)?;
        write_text(&dir.join(format!("step_{k:03}.obj")), &mesh.to_obj_string())?;
        let margin = step.report.min_margin().map(|m| m.to_string()).unwrap_or_default();
        let failing: Vec<String> = step.report.failing.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(
            validity,
            "{k},{},{},{margin},{}",
            step.gamma,
            step.report.valid,
            failing.join(" ")
        );
    }
    write_text(&dir.join("validity.csv"), &validity)
}
