//! The ETRep data model.
//!
//! Each cross-section is stored relative to its parent frame as
//! `(v, ψ, x, a, b)`: `v` is the projection of the section's tangent onto
//! the parent slicing plane, `ψ` the roll about that tangent, `x` the
//! length of the spinal connection to the parent, and `a ≥ b` the
//! principal radii. The parent-relative frame is the minimal rotation
//! `e₁ → t*` followed by a roll of `ψ` about `t*`.
//!
//! Section 0 is the gauge: `v = 0`, `ψ = 0`, `x = 0`, placed at the
//! origin with the identity frame.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{minimal_rotation, rotate_about_axis, Rotation, Vec2, Vec3};

/// Slack required strictly inside the RCC bound.
pub const RCC_EPSILON: f64 = 1e-9;

/// One elliptical cross-section in parent-frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSection {
    pub v: Vec2,
    pub psi: f64,
    pub x: f64,
    pub a: f64,
    pub b: f64,
}

impl CrossSection {
    pub fn new(v: [f64; 2], psi: f64, x: f64, a: f64, b: f64) -> Self {
        CrossSection {
            v: Vec2::new(v[0], v[1]),
            psi,
            x,
            a,
            b,
        }
    }

    /// The gauge section placed at index 0.
    pub fn gauge(a: f64, b: f64) -> Self {
        CrossSection::new([0.0, 0.0], 0.0, 0.0, a, b)
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().all(|c| c.is_finite()) && [self.psi, self.x, self.a, self.b].iter().all(|c| c.is_finite())
    }
}

/// Quantities derived from a cross-section for the RCC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedCrossSection {
    /// Bending direction `v/‖v‖`; carried from an earlier section when `v = 0`.
    pub u: [f64; 2],
    /// False when `u` was carried forward rather than measured.
    pub u_defined: bool,
    /// Bending angle `arcsin ‖v‖`.
    pub phi: f64,
    /// Twisting angle of the major axis relative to the spine normal.
    pub theta: f64,
    /// Extent of the ellipse along the spine normal.
    pub r: f64,
    /// Discrete curvature `sin φ / x`.
    pub kappa: f64,
    /// `min{1, x/r}`, the largest admissible ‖v‖.
    pub bound: f64,
}

/// Outcome of [`rcc_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RccCheck {
    pub rcc_ok: bool,
    /// `min{1, x/r} − ‖v‖`.
    pub margin: f64,
    pub derived: DerivedCrossSection,
}

/// An elliptical tube as `n + 1` parent-relative cross-sections.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ETRep {
    pub sections: Vec<CrossSection>,
    pub metadata: BTreeMap<String, String>,
}

impl ETRep {
    pub fn new(sections: Vec<CrossSection>) -> Result<Self> {
        if sections.is_empty() {
            return Err(Error::Empty("an ETRep needs at least one cross-section".into()));
        }
        Ok(ETRep {
            sections,
            metadata: BTreeMap::new(),
        })
    }

    /// A straight tube of `n + 1` identical sections with spacing `x`.
    pub fn straight(n: usize, x: f64, a: f64, b: f64) -> Self {
        let mut sections = vec![CrossSection::gauge(a, b)];
        sections.extend((0..n).map(|_| CrossSection::new([0.0, 0.0], 0.0, x, a, b)));
        ETRep {
            sections,
            metadata: BTreeMap::new(),
        }
    }

    /// Index of the last section.
    pub fn n(&self) -> usize {
        self.sections.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    /// Largest component-wise difference over all `(v, ψ, x, a, b)`.
    pub fn max_abs_diff(&self, other: &ETRep) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.sections
            .iter()
            .zip(&other.sections)
            .flat_map(|(p, q)| {
                [
                    p.v[0] - q.v[0],
                    p.v[1] - q.v[1],
                    p.psi - q.psi,
                    p.x - q.x,
                    p.a - q.a,
                    p.b - q.b,
                ]
            })
            .fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// Wraps an angle into `[−π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let w = angle - two_pi * (angle / two_pi).round();
    w.clamp(-PI, PI)
}

fn tangent_from_v(v: &Vec2) -> Result<Vec3> {
    let n2 = v.norm_squared();
    if !(n2 < 1.0) {
        return Err(Error::Domain(format!("‖v‖ = {} must be below 1", n2.sqrt())));
    }
    Ok(Vec3::new((1.0 - n2).sqrt(), v[0], v[1]))
}

/// Parent-relative frame for bending `v` and roll `ψ`.
pub fn frame_from_local(v: &Vec2, psi: f64) -> Result<Rotation> {
    let t = tangent_from_v(v)?;
    let base = minimal_rotation(&Vec3::x(), &t)?;
    Ok(rotate_about_axis(&t, psi)? * base)
}

/// Inverse of [`frame_from_local`]. The tangent must satisfy `t₁ > 0`.
pub fn local_from_frame(frame: &Rotation) -> Result<(Vec2, f64)> {
    let t = frame.tangent();
    if !(t[0] > 0.0) {
        return Err(Error::Hemisphere { index: 0, t1: t[0] });
    }
    let t = t.normalize();
    let base = minimal_rotation(&Vec3::x(), &t)?;
    let reference = base.apply(&Vec3::y());
    let axis = frame.column(1);
    let psi = reference.cross(&axis).dot(&t).atan2(reference.dot(&axis));
    Ok((Vec2::new(t[1], t[2]), psi))
}

fn azimuth(u: &Vec2) -> f64 {
    u[1].atan2(u[0])
}

/// Twisting angle θ of the major axis from the spine normal, given the
/// bending direction `u` and roll `ψ`.
pub fn twist_from_roll(u: &Vec2, psi: f64) -> f64 {
    wrap_angle(azimuth(u) - psi)
}

pub fn roll_from_twist(u: &Vec2, theta: f64) -> f64 {
    wrap_angle(azimuth(u) - theta)
}

/// Extent `r = √(a²cos²θ + b²sin²θ)` of an ellipse with radii `a`, `b`
/// along a direction at angle θ from its major axis: the maximum over η of
/// `a cosη cosθ − b sinη sinθ`.
pub fn projection_magnitude(a: f64, b: f64, theta: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("radii must be positive (a = {a}, b = {b})")));
    }
    let (s, c) = theta.sin_cos();
    Ok((a * c).hypot(b * s))
}

/// RCC check using `u = (1, 0)` when `v = 0`.
pub fn rcc_check(cs: &CrossSection) -> Result<RccCheck> {
    rcc_check_with_direction(cs, &Vec2::x())
}

/// RCC check; `fallback_u` stands in for the bending direction when `v = 0`.
pub fn rcc_check_with_direction(cs: &CrossSection, fallback_u: &Vec2) -> Result<RccCheck> {
    let vn = cs.v.norm();
    if !(vn < 1.0) {
        return Err(Error::Domain(format!("‖v‖ = {vn} must be below 1")));
    }
    let (u, u_defined) = if vn > 0.0 {
        (cs.v / vn, true)
    } else {
        (*fallback_u, false)
    };
    let theta = twist_from_roll(&u, cs.psi);
    let r = projection_magnitude(cs.a, cs.b, theta)?;
    let bound = (cs.x / r).min(1.0);
    let kappa = if vn > 0.0 { vn / cs.x } else { 0.0 };
    let rcc_ok = vn == 0.0 || vn < bound - RCC_EPSILON;
    Ok(RccCheck {
        rcc_ok,
        margin: bound - vn,
        derived: DerivedCrossSection {
            u: [u[0], u[1]],
            u_defined,
            phi: vn.asin(),
            theta,
            r,
            kappa,
            bound,
        },
    })
}

/// Per-section entry of a [`ValidityReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionReport {
    pub index: usize,
    pub rcc_ok: bool,
    pub margin: Option<f64>,
    pub derived: Option<DerivedCrossSection>,
    /// Violated invariants; nonempty means the section is invalid.
    pub messages: Vec<String>,
    pub warnings: Vec<String>,
}

impl SectionReport {
    pub fn ok(&self) -> bool {
        self.rcc_ok && self.messages.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub valid: bool,
    pub failing: Vec<usize>,
    pub sections: Vec<SectionReport>,
    pub messages: Vec<String>,
}

impl ValidityReport {
    /// Smallest RCC margin over all sections that have one.
    pub fn min_margin(&self) -> Option<f64> {
        self.sections
            .iter()
            .filter(|s| s.index > 0)
            .filter_map(|s| s.margin)
            .min_by(f64::total_cmp)
    }

    pub(crate) fn invalid(message: String) -> Self {
        ValidityReport {
            valid: false,
            failing: Vec::new(),
            sections: Vec::new(),
            messages: vec![message],
        }
    }
}

fn type_violations(index: usize, cs: &CrossSection) -> Vec<String> {
    let mut out = Vec::new();
    if !cs.is_finite() {
        out.push("non-finite value".to_string());
        return out;
    }
    if cs.v.norm() >= 1.0 {
        out.push(format!("‖v‖ = {} must be below 1", cs.v.norm()));
    }
    if !(cs.b > 0.0) {
        out.push(format!("b = {} must be positive", cs.b));
    }
    if cs.a < cs.b {
        out.push(format!("a = {} must be at least b = {}", cs.a, cs.b));
    }
    if !(-PI..=PI).contains(&cs.psi) {
        out.push(format!("ψ = {} outside [−π, π]", cs.psi));
    }
    if index == 0 {
        if cs.v != Vec2::zeros() || cs.psi != 0.0 || cs.x != 0.0 {
            out.push("section 0 must have v = 0, ψ = 0, x = 0".to_string());
        }
    } else if !(cs.x > 0.0) {
        out.push(format!("x = {} must be positive", cs.x));
    }
    out
}

/// Checks type invariants and the RCC for every section.
pub fn validate(s: &ETRep) -> ValidityReport {
    if s.is_empty() {
        return ValidityReport::invalid("ETRep has no cross-sections".into());
    }
    let mut carried = Vec2::x();
    let mut sections = Vec::with_capacity(s.len());
    for (index, cs) in s.sections.iter().enumerate() {
        let messages = type_violations(index, cs);
        let mut warnings = Vec::new();
        if cs.a == cs.b {
            warnings.push("circular section (a = b)".to_string());
        }
        let (rcc_ok, margin, derived) = match rcc_check_with_direction(cs, &carried) {
            Ok(check) => {
                if check.derived.u_defined {
                    carried = Vec2::new(check.derived.u[0], check.derived.u[1]);
                }
                (check.rcc_ok, Some(check.margin), Some(check.derived))
            }
            Err(_) => (false, None, None),
        };
        sections.push(SectionReport {
            index,
            rcc_ok,
            margin,
            derived,
            messages,
            warnings,
        });
    }
    let failing: Vec<usize> = sections.iter().filter(|r| !r.ok()).map(|r| r.index).collect();
    ValidityReport {
        valid: failing.is_empty(),
        failing,
        sections,
        messages: Vec::new(),
    }
}

/// World-coordinate spine points, material frames and radii.
///
/// Point `i ≥ 1` is reached from point `i − 1` along the tangent of frame
/// `i`, so `t_i = (p_i − p_{i−1}) / ‖p_i − p_{i−1}‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalTube {
    pub points: Vec<Vec3>,
    pub frames: Vec<Rotation>,
    pub radii: Vec<(f64, f64)>,
}

impl GlobalTube {
    /// Checks lengths, positive spinal connections and tangent alignment.
    pub fn check(&self) -> Result<()> {
        let n = self.points.len();
        if n == 0 || self.frames.len() != n || self.radii.len() != n {
            return Err(Error::Validation(
                "points, frames and radii must have equal nonzero length".into(),
            ));
        }
        for i in 1..n {
            let d = self.points[i] - self.points[i - 1];
            let len = d.norm();
            if !(len > 0.0) {
                return Err(Error::Validation(format!("points {} and {i} coincide", i - 1)));
            }
            if (d / len - self.frames[i].tangent()).amax() > 1e-8 {
                return Err(Error::Validation(format!(
                    "frame {i} tangent is not aligned with its spinal connection"
                )));
            }
        }
        Ok(())
    }

    /// Applies `p ↦ R p + shift` and `F ↦ R F`.
    pub fn transformed(&self, rotation: &Rotation, shift: &Vec3) -> GlobalTube {
        GlobalTube {
            points: self.points.iter().map(|p| rotation.apply(p) + shift).collect(),
            frames: self.frames.iter().map(|f| *rotation * *f).collect(),
            radii: self.radii.clone(),
        }
    }
}

/// Chains parent-relative frames and spinal lengths from the gauge.
pub(crate) fn chain_frames(local: &[Rotation], xs: &[f64], radii: Vec<(f64, f64)>) -> GlobalTube {
    let mut points = Vec::with_capacity(local.len());
    let mut frames = Vec::with_capacity(local.len());
    points.push(Vec3::zeros());
    frames.push(Rotation::identity());
    for i in 1..local.len() {
        let frame = frames[i - 1] * local[i];
        points.push(points[i - 1] + frame.tangent() * xs[i]);
        frames.push(frame);
    }
    GlobalTube { points, frames, radii }
}

/// Forward kinematics: rebuilds world points and frames.
///
/// Fails on an invalid ETRep unless `allow_invalid` is set; even then
/// sections with ‖v‖ ≥ 1 cannot be placed.
pub fn reconstruct_global(s: &ETRep, allow_invalid: bool) -> Result<GlobalTube> {
    if !allow_invalid {
        let report = validate(s);
        if !report.valid {
            return Err(Error::InvalidRep {
                failing: report.failing,
            });
        }
    }
    if s.is_empty() {
        return Err(Error::Empty("ETRep has no cross-sections".into()));
    }
    let mut local = vec![Rotation::identity()];
    for cs in &s.sections[1..] {
        local.push(frame_from_local(&cs.v, cs.psi)?);
    }
    let xs: Vec<f64> = s.sections.iter().map(|c| c.x).collect();
    let radii = s.sections.iter().map(|c| (c.a, c.b)).collect();
    Ok(chain_frames(&local, &xs, radii))
}

/// Recovers the parent-relative representation of a world-coordinate tube.
pub fn etrep_from_global(g: &GlobalTube) -> Result<ETRep> {
    g.check()?;
    let mut sections = vec![CrossSection::gauge(g.radii[0].0, g.radii[0].1)];
    for i in 1..g.points.len() {
        let local = g.frames[i - 1].transpose() * g.frames[i];
        let (v, psi) = local_from_frame(&local).map_err(|e| match e {
            Error::Hemisphere { t1, .. } => Error::Hemisphere { index: i, t1 },
            other => other,
        })?;
        let (a, b) = g.radii[i];
        sections.push(CrossSection {
            v,
            psi,
            x: (g.points[i] - g.points[i - 1]).norm(),
            a,
            b,
        });
    }
    ETRep::new(sections)
}

/// Discrete spine normals `((t_{i−1} × t_i)/‖·‖) × t_i`; when consecutive
/// tangents coincide the previous normal is carried forward.
pub fn compute_normals(g: &GlobalTube) -> Vec<Vec3> {
    let mut normals: Vec<Vec3> = Vec::with_capacity(g.frames.len());
    if let Some(f0) = g.frames.first() {
        normals.push(f0.column(1));
    }
    for i in 1..g.frames.len() {
        let prev = g.frames[i - 1].tangent();
        let t = g.frames[i].tangent();
        let c = prev.cross(&t);
        let n = if (t - prev).norm() <= 1e-9 || c.norm() <= 1e-12 {
            let carried = normals[i - 1];
            (carried - t * carried.dot(&t)).normalize()
        } else {
            c.normalize().cross(&t).normalize()
        };
        normals.push(n);
    }
    normals
}

/// ℓ1 size `Σ (|x_i| + |a_i| + |b_i|)`.
pub fn size(s: &ETRep) -> f64 {
    s.sections.iter().map(|c| c.x.abs() + c.a.abs() + c.b.abs()).sum()
}

/// Multiplies every length (x, a, b) by `c > 0`.
pub fn scale(s: &ETRep, c: f64) -> Result<ETRep> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("scale factor {c} must be positive")));
    }
    let mut out = s.clone();
    for cs in &mut out.sections {
        cs.x *= c;
        cs.a *= c;
        cs.b *= c;
    }
    Ok(out)
}

/// Divides every length by the ℓ1 size.
pub fn normalize(s: &ETRep) -> Result<ETRep> {
    let l = size(s);
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Domain(format!("cannot normalize an ETRep of size {l}")));
    }
    let mut out = s.clone();
    for cs in &mut out.sections {
        cs.x /= l;
        cs.a /= l;
        cs.b /= l;
    }
    Ok(out)
}
