//! Intrinsic and non-intrinsic shape spaces.
//!
//! The skeletal map rescales the bending magnitude of every section by its
//! RCC bound, `ς = ‖v‖ / min{1, x/r}`, and keeps the direction `u`. Each
//! section becomes the 6-vector `(ς·u₁, ς·u₂, ψ, x, a, b)`; the image of
//! all valid sections is convex, so straight lines and arithmetic means
//! taken there map back to valid tubes.
//!
//! The non-intrinsic counterparts work directly on parent-relative frame
//! quaternions and lengths, and may leave the valid set.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{
    frechet_mean_rotations, geodesic_distance, quat_from_rotation, rotation_from_quat, slerp, Rotation, UnitQuaternion,
    Vec2,
};
use crate::model::{
    self, chain_frames, local_from_frame, projection_magnitude, twist_from_roll, validate, CrossSection, ETRep,
    GlobalTube, SectionReport, ValidityReport,
};

/// Coordinates per section in the convex space.
pub const FEATURES_PER_SECTION: usize = 6;
/// Column suffixes, in storage order.
pub const FEATURE_NAMES: [&str; FEATURES_PER_SECTION] = ["cu1", "cu2", "psi", "x", "a", "b"];

const GAUGE_TOL: f64 = 1e-12;

/// Sum by recursive halving; fixed association order for a given length.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// An ETRep mapped into the convex space: `6(n+1)` coordinates,
/// section by section, in the order of [`FEATURE_NAMES`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPoint {
    coords: Vec<f64>,
}

impl ConvexPoint {
    /// Wraps raw coordinates after checking the convex-space invariants.
    pub fn from_coords(coords: Vec<f64>) -> Result<Self> {
        let p = ConvexPoint { coords };
        p.check()?;
        Ok(p)
    }

    pub(crate) fn from_coords_unchecked(coords: Vec<f64>) -> Self {
        ConvexPoint { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn num_sections(&self) -> usize {
        self.coords.len() / FEATURES_PER_SECTION
    }

    pub fn n(&self) -> usize {
        self.num_sections().saturating_sub(1)
    }

    pub fn section(&self, i: usize) -> [f64; FEATURES_PER_SECTION] {
        let s = &self.coords[i * FEATURES_PER_SECTION..(i + 1) * FEATURES_PER_SECTION];
        [s[0], s[1], s[2], s[3], s[4], s[5]]
    }

    pub fn distance(&self, other: &ConvexPoint) -> Result<f64> {
        if self.coords.len() != other.coords.len() {
            return Err(Error::LengthMismatch(self.num_sections(), other.num_sections()));
        }
        let sq: Vec<f64> = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(p, q)| (p - q) * (p - q))
            .collect();
        Ok(pairwise_sum(&sq).sqrt())
    }

    fn check(&self) -> Result<()> {
        if self.coords.is_empty() || !self.coords.len().is_multiple_of(FEATURES_PER_SECTION) {
            return Err(Error::Validation(format!(
                "convex point length {} is not a positive multiple of {FEATURES_PER_SECTION}",
                self.coords.len()
            )));
        }
        for i in 0..self.num_sections() {
            let [c1, c2, psi, x, a, b] = self.section(i);
            let bad = |msg: String| Err(Error::Validation(format!("section {i}: {msg}")));
            if !self.section(i).iter().all(|c| c.is_finite()) {
                return bad("non-finite coordinate".into());
            }
            let sigma = c1.hypot(c2);
            if sigma >= 1.0 {
                return bad(format!("ς = {sigma} must be below 1"));
            }
            if !(-PI..=PI).contains(&psi) {
                return bad(format!("ψ = {psi} outside [−π, π]"));
            }
            if !(b > 0.0 && a >= b) {
                return bad(format!("radii must satisfy a ≥ b > 0 (a = {a}, b = {b})"));
            }
            if i == 0 {
                if [c1, c2, psi, x].iter().any(|c| c.abs() > GAUGE_TOL) {
                    return bad("gauge section must have ς·u = 0, ψ = 0, x = 0".into());
                }
            } else if !(x > 0.0) {
                return bad(format!("x = {x} must be positive"));
            }
        }
        Ok(())
    }
}

/// Members sharing one section count; `normalized` marks unit ℓ1 size.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    members: Vec<ETRep>,
    normalized: bool,
}

impl SampleSet {
    pub fn new(members: Vec<ETRep>) -> Result<Self> {
        if let Some(first) = members.first() {
            if let Some(bad) = members.iter().find(|m| m.len() != first.len()) {
                return Err(Error::LengthMismatch(first.len(), bad.len()));
            }
        }
        Ok(SampleSet {
            members,
            normalized: false,
        })
    }

    pub fn members(&self) -> &[ETRep] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

fn require_valid(s: &ETRep) -> Result<()> {
    let report = validate(s);
    if report.valid {
        Ok(())
    } else {
        Err(Error::InvalidRep {
            failing: report.failing,
        })
    }
}

/// Skeletal map of a valid ETRep into the convex space.
pub fn map_to_convex(s: &ETRep) -> Result<ConvexPoint> {
    let report = validate(s);
    if !report.valid {
        return Err(Error::InvalidRep {
            failing: report.failing,
        });
    }
    let mut coords = Vec::with_capacity(s.len() * FEATURES_PER_SECTION);
    for (i, (cs, sec)) in s.sections.iter().zip(&report.sections).enumerate() {
        if i == 0 {
            coords.extend_from_slice(&[0.0, 0.0, 0.0, 0.0, cs.a, cs.b]);
            continue;
        }
        let bound = sec
            .derived
            .map(|d| d.bound)
            .ok_or(Error::InvalidRep { failing: vec![i] })?;
        let scaled = cs.v / bound;
        coords.extend_from_slice(&[scaled[0], scaled[1], cs.psi, cs.x, cs.a, cs.b]);
    }
    Ok(ConvexPoint::from_coords_unchecked(coords))
}

/// Inverse skeletal map; the result always satisfies the RCC.
pub fn map_from_convex(c: &ConvexPoint) -> Result<ETRep> {
    c.check()?;
    let [_, _, _, _, a0, b0] = c.section(0);
    let mut sections = vec![CrossSection::gauge(a0, b0)];
    let mut carried = Vec2::x();
    for i in 1..c.num_sections() {
        let [c1, c2, psi, x, a, b] = c.section(i);
        let scaled = Vec2::new(c1, c2);
        let sigma = scaled.norm();
        let u = if sigma > 0.0 { scaled / sigma } else { carried };
        carried = u;
        let r = projection_magnitude(a, b, twist_from_roll(&u, psi))?;
        let bound = (x / r).min(1.0);
        sections.push(CrossSection {
            v: u * (sigma * bound),
            psi,
            x,
            a,
            b,
        });
    }
    ETRep::new(sections)
}

fn same_length(s1: &ETRep, s2: &ETRep) -> Result<()> {
    if s1.len() != s2.len() {
        return Err(Error::LengthMismatch(s1.len(), s2.len()));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("path parameter {gamma} outside [0, 1]")));
    }
    Ok(())
}

/// Point at `gamma` on the straight line between `s1` and `s2` in the
/// convex space.
pub fn intrinsic_path(s1: &ETRep, s2: &ETRep, gamma: f64) -> Result<ETRep> {
    same_length(s1, s2)?;
    check_gamma(gamma)?;
    if gamma == 0.0 {
        require_valid(s1)?;
        return Ok(s1.clone());
    }
    if gamma == 1.0 {
        require_valid(s2)?;
        return Ok(s2.clone());
    }
    let p = map_to_convex(s1)?;
    let q = map_to_convex(s2)?;
    let coords = p
        .coords()
        .iter()
        .zip(q.coords())
        .map(|(a, b)| (1.0 - gamma) * a + gamma * b)
        .collect();
    map_from_convex(&ConvexPoint::from_coords_unchecked(coords))
}

/// Euclidean distance between the convex images.
pub fn intrinsic_distance(s1: &ETRep, s2: &ETRep) -> Result<f64> {
    same_length(s1, s2)?;
    map_to_convex(s1)?.distance(&map_to_convex(s2)?)
}

fn convex_mean(points: &[ConvexPoint]) -> ConvexPoint {
    let dim = points[0].coords().len();
    let m = points.len() as f64;
    let mut column = Vec::with_capacity(points.len());
    let coords = (0..dim)
        .map(|k| {
            column.clear();
            column.extend(points.iter().map(|p| p.coords()[k]));
            pairwise_sum(&column) / m
        })
        .collect();
    ConvexPoint::from_coords_unchecked(coords)
}

/// Inverse skeletal map of the Euclidean mean of the mapped members.
pub fn intrinsic_mean(sample: &SampleSet) -> Result<ETRep> {
    if sample.is_empty() {
        return Err(Error::Empty("intrinsic mean of an empty sample".into()));
    }
    let points = sample.members().iter().map(map_to_convex).collect::<Result<Vec<_>>>()?;
    map_from_convex(&convex_mean(&points))
}

/// Sections whose roll angles straddle ±π (spread above π), where a
/// linear average of ψ is not meaningful.
pub fn roll_wraparound_sections(sample: &SampleSet) -> Vec<usize> {
    let Some(first) = sample.members().first() else {
        return Vec::new();
    };
    (0..first.len())
        .filter(|&i| {
            let (lo, hi) = sample
                .members()
                .iter()
                .map(|m| m.sections[i].psi)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p), hi.max(p)));
            hi - lo > PI
        })
        .collect()
}

/// One section of a frame-based representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSection {
    pub frame: UnitQuaternion,
    pub x: f64,
    pub a: f64,
    pub b: f64,
}

/// An ETRep written as parent-relative frame quaternions and lengths.
/// Unlike [`ETRep`] it can express configurations that violate the RCC
/// or bend by 90° or more.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRep {
    pub sections: Vec<FrameSection>,
}

impl FrameRep {
    pub fn from_etrep(s: &ETRep) -> Result<Self> {
        let sections = s
            .sections
            .iter()
            .map(|cs| {
                let frame = model::frame_from_local(&cs.v, cs.psi)?;
                Ok(FrameSection {
                    frame: quat_from_rotation(&frame)?,
                    x: cs.x,
                    a: cs.a,
                    b: cs.b,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FrameRep { sections })
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    /// Converts back to `(v, ψ, x, a, b)`; section 0 is reset to the gauge.
    pub fn to_etrep(&self) -> Result<ETRep> {
        let first = self
            .sections
            .first()
            .ok_or_else(|| Error::Empty("no sections".into()))?;
        let mut sections = vec![CrossSection::gauge(first.a, first.b)];
        for (i, fs) in self.sections.iter().enumerate().skip(1) {
            let (v, psi) = local_from_frame(&rotation_from_quat(&fs.frame)).map_err(|e| match e {
                Error::Hemisphere { t1, .. } => Error::Hemisphere { index: i, t1 },
                other => other,
            })?;
            sections.push(CrossSection {
                v,
                psi,
                x: fs.x,
                a: fs.a,
                b: fs.b,
            });
        }
        ETRep::new(sections)
    }

    /// Validity of the represented tube; sections bending by 90° or more
    /// are reported as failing.
    pub fn validate(&self) -> ValidityReport {
        let mut hemisphere_failures = Vec::new();
        for (i, fs) in self.sections.iter().enumerate().skip(1) {
            let t1 = rotation_from_quat(&fs.frame).tangent()[0];
            if !(t1 > 0.0) {
                hemisphere_failures.push(SectionReport {
                    index: i,
                    rcc_ok: false,
                    margin: None,
                    derived: None,
                    messages: vec![format!("tangent leaves the forward hemisphere (t1 = {t1})")],
                    warnings: Vec::new(),
                });
            }
        }
        if hemisphere_failures.is_empty() {
            match self.to_etrep() {
                Ok(s) => validate(&s),
                Err(e) => ValidityReport::invalid(e.to_string()),
            }
        } else {
            ValidityReport {
                valid: false,
                failing: hemisphere_failures.iter().map(|r| r.index).collect(),
                sections: hemisphere_failures,
                messages: Vec::new(),
            }
        }
    }

    /// World-coordinate tube; works for invalid configurations too.
    pub fn reconstruct(&self) -> GlobalTube {
        let mut local: Vec<Rotation> = self.sections.iter().map(|s| rotation_from_quat(&s.frame)).collect();
        if let Some(first) = local.first_mut() {
            *first = Rotation::identity();
        }
        let xs: Vec<f64> = self.sections.iter().map(|s| s.x).collect();
        let radii = self.sections.iter().map(|s| (s.a, s.b)).collect();
        chain_frames(&local, &xs, radii)
    }
}

/// A frame-based result together with its validity.
#[derive(Debug, Clone)]
pub struct Checked {
    pub rep: FrameRep,
    pub report: ValidityReport,
}

impl Checked {
    fn new(rep: FrameRep) -> Self {
        let report = rep.validate();
        Checked { rep, report }
    }
}

/// Section-wise slerp of frames and linear interpolation of x, a, b.
pub fn nonintrinsic_path(s1: &ETRep, s2: &ETRep, gamma: f64) -> Result<Checked> {
    same_length(s1, s2)?;
    check_gamma(gamma)?;
    let f1 = FrameRep::from_etrep(s1)?;
    let f2 = FrameRep::from_etrep(s2)?;
    let lerp = |p: f64, q: f64| (1.0 - gamma) * p + gamma * q;
    let sections = f1
        .sections
        .iter()
        .zip(&f2.sections)
        .map(|(p, q)| {
            Ok(FrameSection {
                frame: slerp(&p.frame, &q.frame, gamma)?,
                x: lerp(p.x, q.x),
                a: lerp(p.a, q.a),
                b: lerp(p.b, q.b),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Checked::new(FrameRep { sections }))
}

/// `√(Σ d_g² + Δx² + Δa² + Δb²)` over all sections, unweighted.
pub fn nonintrinsic_distance(s1: &ETRep, s2: &ETRep) -> Result<f64> {
    same_length(s1, s2)?;
    let f1 = FrameRep::from_etrep(s1)?;
    let f2 = FrameRep::from_etrep(s2)?;
    let terms: Vec<f64> = f1
        .sections
        .iter()
        .zip(&f2.sections)
        .map(|(p, q)| {
            geodesic_distance(&p.frame, &q.frame).powi(2)
                + (p.x - q.x).powi(2)
                + (p.a - q.a).powi(2)
                + (p.b - q.b).powi(2)
        })
        .collect();
    Ok(pairwise_sum(&terms).sqrt())
}

/// Fréchet mean frame and arithmetic mean lengths per section.
pub fn nonintrinsic_mean(sample: &SampleSet) -> Result<Checked> {
    if sample.is_empty() {
        return Err(Error::Empty("non-intrinsic mean of an empty sample".into()));
    }
    let reps = sample
        .members()
        .iter()
        .map(FrameRep::from_etrep)
        .collect::<Result<Vec<_>>>()?;
    let m = reps.len() as f64;
    let mean_of = |i: usize, f: fn(&FrameSection) -> f64| {
        let vals: Vec<f64> = reps.iter().map(|r| f(&r.sections[i])).collect();
        pairwise_sum(&vals) / m
    };
    let sections = (0..reps[0].len())
        .map(|i| {
            let frames: Vec<UnitQuaternion> = reps.iter().map(|r| r.sections[i].frame).collect();
            Ok(FrameSection {
                frame: frechet_mean_rotations(&frames)?,
                x: mean_of(i, |s| s.x),
                a: mean_of(i, |s| s.a),
                b: mean_of(i, |s| s.b),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Checked::new(FrameRep { sections }))
}

/// ℓ1-normalizes every member.
pub fn normalize_sample(sample: &SampleSet) -> Result<SampleSet> {
    let members = sample
        .members()
        .iter()
        .map(model::normalize)
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleSet {
        members,
        normalized: true,
    })
}

/// Intrinsic mean of the normalized members; has unit size.
pub fn intrinsic_shape_mean(sample: &SampleSet) -> Result<ETRep> {
    intrinsic_mean(&normalize_sample(sample)?)
}

pub fn nonintrinsic_shape_mean(sample: &SampleSet) -> Result<Checked> {
    nonintrinsic_mean(&normalize_sample(sample)?)
}

/// Which space paths and means are computed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Intrinsic,
    Nonintrinsic,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Intrinsic => "intrinsic",
            Method::Nonintrinsic => "nonintrinsic",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intrinsic" => Ok(Method::Intrinsic),
            "nonintrinsic" | "non-intrinsic" => Ok(Method::Nonintrinsic),
            other => Err(Error::Domain(format!("unknown method {other:?}"))),
        }
    }
}

/// One sample along a path.
#[derive(Debug, Clone)]
pub struct MorphStep {
    pub gamma: f64,
    pub tube: GlobalTube,
    pub report: ValidityReport,
}

/// `steps + 1` equally spaced samples of the path from `s1` to `s2`.
pub fn morph_sequence(s1: &ETRep, s2: &ETRep, steps: usize, method: Method) -> Result<Vec<MorphStep>> {
    if steps == 0 {
        return Err(Error::Domain("a morph needs at least one step".into()));
    }
    (0..=steps)
        .map(|k| {
            let gamma = k as f64 / steps as f64;
            match method {
                Method::Intrinsic => {
                    let s = intrinsic_path(s1, s2, gamma)?;
                    Ok(MorphStep {
                        gamma,
                        tube: model::reconstruct_global(&s, true)?,
                        report: validate(&s),
                    })
                }
                Method::Nonintrinsic => {
                    let c = nonintrinsic_path(s1, s2, gamma)?;
                    Ok(MorphStep {
                        gamma,
                        tube: c.rep.reconstruct(),
                        report: c.report,
                    })
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::size;
    use approx::assert_relative_eq;

    fn bent() -> ETRep {
        ETRep::new(vec![
            CrossSection::gauge(2.0, 1.0),
            CrossSection::new([0.3, 0.1], 0.4, 1.0, 1.5, 0.8),
            CrossSection::new([-0.2, 0.2], -0.7, 0.8, 1.2, 0.6),
            CrossSection::new([0.0, 0.0], 0.1, 0.9, 1.0, 0.5),
        ])
        .unwrap()
    }

    fn bent2() -> ETRep {
        ETRep::new(vec![
            CrossSection::gauge(1.6, 1.2),
            CrossSection::new([-0.1, 0.3], -0.2, 1.2, 1.3, 0.9),
            CrossSection::new([0.25, 0.05], 0.9, 0.7, 1.1, 0.7),
            CrossSection::new([0.1, -0.2], -1.1, 1.0, 0.9, 0.5),
        ])
        .unwrap()
    }

    #[test]
    fn map_to_convex_examples() {
        let s = ETRep::new(vec![
            CrossSection::gauge(1.0, 1.0),
            CrossSection::new([0.3, 0.0], 0.0, 1.0, 1.0, 1.0),
            CrossSection::new([0.0, 0.3], 0.0, 1.0, 2.0, 2.0),
            CrossSection::new([0.0, 0.0], 0.0, 0.1, 5.0, 2.0),
        ])
        .unwrap();
        let c = map_to_convex(&s).unwrap();
        assert_eq!(c.section(0), [0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        assert_relative_eq!(c.section(1)[0], 0.3);
        assert_relative_eq!(c.section(2)[1], 0.6);
        assert_eq!(&c.section(3)[..2], &[0.0, 0.0]);
        assert_eq!(c.coords().len(), 24);
    }

    #[test]
    fn convex_round_trip() {
        for s in [bent(), bent2()] {
            let back = map_from_convex(&map_to_convex(&s).unwrap()).unwrap();
            assert!(back.max_abs_diff(&s) < 1e-12);
        }
    }

    #[test]
    fn map_to_convex_rejects_invalid() {
        let mut s = bent();
        s.sections[2].v = Vec2::new(0.95, 0.0);
        assert!(matches!(map_to_convex(&s), Err(Error::InvalidRep { failing }) if failing == vec![2]));
    }

    #[test]
    fn near_boundary_sigma_margin() {
        let eps = 1e-4;
        let coords = vec![0.0, 0.0, 0.0, 0.0, 2.0, 1.0, 1.0 - eps, 0.0, 0.0, 1.0, 3.0, 1.0];
        let s = map_from_convex(&ConvexPoint::from_coords(coords).unwrap()).unwrap();
        let report = validate(&s);
        assert!(report.valid);
        // θ = 0 so r = a = 3 and the bound is 1/3
        assert_relative_eq!(report.sections[1].margin.unwrap(), eps / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn convex_point_invariants() {
        assert!(ConvexPoint::from_coords(vec![0.0; 5]).is_err());
        let gauge = [0.0, 0.0, 0.0, 0.0, 1.0, 0.5];
        let with = |sec: [f64; 6]| ConvexPoint::from_coords([gauge, sec].concat());
        assert!(with([0.8, 0.6, 0.0, 1.0, 1.0, 0.5]).is_err());
        assert!(with([0.1, 0.1, 4.0, 1.0, 1.0, 0.5]).is_err());
        assert!(with([0.1, 0.1, 0.0, 0.0, 1.0, 0.5]).is_err());
        assert!(with([0.1, 0.1, 0.0, 1.0, 0.5, 1.0]).is_err());
        assert!(with([0.1, 0.1, 0.0, 1.0, 1.0, 0.5]).is_ok());
    }

    #[test]
    fn all_zero_sigma_is_straight() {
        let mut coords = vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.5];
        coords.extend([0.0, 0.0, 0.3, 1.0, 1.0, 0.5]);
        let s = map_from_convex(&ConvexPoint::from_coords(coords).unwrap()).unwrap();
        assert_eq!(s.sections[1].v, Vec2::zeros());
    }

    #[test]
    fn intrinsic_path_endpoints_and_constant() {
        let (s1, s2) = (bent(), bent2());
        assert_eq!(intrinsic_path(&s1, &s2, 0.0).unwrap(), s1);
        assert_eq!(intrinsic_path(&s1, &s2, 1.0).unwrap(), s2);
        let mid = intrinsic_path(&s1, &s1, 0.5).unwrap();
        assert!(mid.max_abs_diff(&s1) < 1e-12);
        assert!(validate(&intrinsic_path(&s1, &s2, 0.37).unwrap()).valid);
        assert!(intrinsic_path(&s1, &ETRep::straight(2, 1.0, 1.0, 1.0), 0.5).is_err());
    }

    #[test]
    fn intrinsic_distance_single_coordinate() {
        let s1 = ETRep::straight(3, 1.0, 2.0, 1.0);
        let mut s2 = s1.clone();
        s2.sections[2].a = 2.25;
        assert_relative_eq!(intrinsic_distance(&s1, &s2).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(intrinsic_distance(&s1, &s1).unwrap(), 0.0);
    }

    #[test]
    fn intrinsic_mean_basics() {
        let s = bent();
        let copies = SampleSet::new(vec![s.clone(); 4]).unwrap();
        assert!(intrinsic_mean(&copies).unwrap().max_abs_diff(&s) < 1e-12);
        let pair = SampleSet::new(vec![bent(), bent2()]).unwrap();
        let mid = intrinsic_path(&bent(), &bent2(), 0.5).unwrap();
        assert!(intrinsic_mean(&pair).unwrap().max_abs_diff(&mid) < 1e-12);
        assert!(matches!(
            intrinsic_mean(&SampleSet::new(vec![]).unwrap()),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn sample_set_rejects_mixed_lengths() {
        assert!(SampleSet::new(vec![bent(), ETRep::straight(1, 1.0, 1.0, 1.0)]).is_err());
    }

    #[test]
    fn nonintrinsic_path_endpoints() {
        let (s1, s2) = (bent(), bent2());
        let p0 = nonintrinsic_path(&s1, &s2, 0.0).unwrap();
        assert!(p0.rep.to_etrep().unwrap().max_abs_diff(&s1) < 1e-10);
        let p1 = nonintrinsic_path(&s1, &s2, 1.0).unwrap();
        assert!(p1.rep.to_etrep().unwrap().max_abs_diff(&s2) < 1e-10);
    }

    #[test]
    fn nonintrinsic_path_linear_when_frames_match() {
        let s1 = ETRep::straight(2, 1.0, 2.0, 1.0);
        let s2 = ETRep::straight(2, 3.0, 4.0, 2.0);
        let mid = nonintrinsic_path(&s1, &s2, 0.25).unwrap();
        assert!(mid.report.valid);
        let s = mid.rep.to_etrep().unwrap();
        assert_relative_eq!(s.sections[1].x, 1.5);
        assert_relative_eq!(s.sections[2].a, 2.5);
        assert_relative_eq!(s.sections[2].b, 1.25);
    }

    #[test]
    fn nonintrinsic_distance_cases() {
        let s = bent();
        assert_eq!(nonintrinsic_distance(&s, &s).unwrap(), 0.0);
        let mut t = s.clone();
        t.sections[1].x += 0.3;
        assert_relative_eq!(nonintrinsic_distance(&s, &t).unwrap(), 0.3, epsilon = 1e-12);
        // extra roll α about the shared tangent is a geodesic of α/2 on S³
        let alpha = 0.6;
        let mut r = s.clone();
        r.sections[2].psi += alpha;
        assert_relative_eq!(nonintrinsic_distance(&s, &r).unwrap(), alpha / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn nonintrinsic_mean_straight_tubes() {
        let sample = SampleSet::new(vec![
            ETRep::straight(2, 1.0, 2.0, 1.0),
            ETRep::straight(2, 2.0, 3.0, 2.0),
        ])
        .unwrap();
        let mean = nonintrinsic_mean(&sample).unwrap();
        assert!(mean.report.valid);
        let s = mean.rep.to_etrep().unwrap();
        assert!(s.sections.iter().all(|c| c.v.norm() < 1e-12));
        assert_relative_eq!(s.sections[1].x, 1.5);
        assert_relative_eq!(s.sections[2].a, 2.5);

        let copies = SampleSet::new(vec![bent(); 3]).unwrap();
        let mean = nonintrinsic_mean(&copies).unwrap();
        assert!(mean.report.valid);
        assert!(mean.rep.to_etrep().unwrap().max_abs_diff(&bent()) < 1e-10);
    }

    #[test]
    fn shape_means() {
        let s = bent();
        let copies = SampleSet::new(vec![s.clone(), model::scale(&s, 3.0).unwrap()]).unwrap();
        let mean = intrinsic_shape_mean(&copies).unwrap();
        assert!(mean.max_abs_diff(&model::normalize(&s).unwrap()) < 1e-12);
        assert_relative_eq!(size(&mean), 1.0, epsilon = 1e-12);
        let sample = SampleSet::new(vec![bent(), bent2()]).unwrap();
        assert_relative_eq!(size(&intrinsic_shape_mean(&sample).unwrap()), 1.0, epsilon = 1e-12);
        let nm = nonintrinsic_shape_mean(&sample).unwrap();
        assert_relative_eq!(size(&nm.rep.to_etrep().unwrap()), 1.0, epsilon = 1e-12);
        assert!(normalize_sample(&sample).unwrap().is_normalized());
    }

    #[test]
    fn wraparound_detection() {
        let mut a = bent();
        let mut b = bent();
        a.sections[2].psi = 3.0;
        b.sections[2].psi = -3.0;
        let sample = SampleSet::new(vec![a, b]).unwrap();
        assert_eq!(roll_wraparound_sections(&sample), vec![2]);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..37).map(|i| i as f64 * 0.5).collect();
        assert_relative_eq!(pairwise_sum(&v), v.iter().sum::<f64>());
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
