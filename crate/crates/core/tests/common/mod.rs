#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;

use etrep::model::CrossSection;
use etrep::shape_space::{map_from_convex, ConvexPoint};
use etrep::ETRep;

fn radii(rng: &mut impl Rng) -> (f64, f64) {
    let a = rng.gen_range(0.3..3.0);
    (a, a * rng.gen_range(0.2..1.0))
}

/// Valid ETRep with `n + 1` sections, drawn in convex coordinates.
/// Bending magnitudes cover the whole allowed range up to `max_sigma`.
pub fn random_valid_with(rng: &mut impl Rng, n: usize, max_sigma: f64) -> ETRep {
    let (a0, b0) = radii(rng);
    let mut coords = vec![0.0, 0.0, 0.0, 0.0, a0, b0];
    for _ in 0..n {
        let sigma = rng.gen_range(0.0..max_sigma);
        let dir: f64 = rng.gen_range(-PI..PI);
        let (a, b) = radii(rng);
        coords.extend([
            sigma * dir.cos(),
            sigma * dir.sin(),
            rng.gen_range(-PI..PI),
            rng.gen_range(0.05..1.5),
            a,
            b,
        ]);
    }
    map_from_convex(&ConvexPoint::from_coords(coords).unwrap()).unwrap()
}

pub fn random_valid(rng: &mut impl Rng, n: usize) -> ETRep {
    random_valid_with(rng, n, 0.99)
}

/// Well-formed ETRep whose sections may or may not satisfy the RCC.
pub fn random_raw(rng: &mut impl Rng, n: usize) -> ETRep {
    let (a0, b0) = radii(rng);
    let mut sections = vec![CrossSection::gauge(a0, b0)];
    for _ in 0..n {
        let norm = rng.gen_range(0.0..0.95);
        let dir: f64 = rng.gen_range(-PI..PI);
        let (a, b) = radii(rng);
        sections.push(CrossSection::new(
            [norm * dir.cos(), norm * dir.sin()],
            rng.gen_range(-PI..PI),
            rng.gen_range(0.05..3.0),
            a,
            b,
        ));
    }
    ETRep::new(sections).unwrap()
}

/// Difference of two angles, wrapped to [−π, π].
pub fn angle_diff(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}
