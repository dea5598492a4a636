//! Browser bindings for a small interactive demo.
//!
//! Every export returns a JSON string: either the requested drawing data
//! or `{"error": "..."}`. Tubes are drawn as an orthographic view of the
//! spine and the cross-section rings, rotated by `yaw` about the vertical
//! axis.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use etrep::io::etrep_from_str;
use etrep::model::{rcc_check, reconstruct_global, validate, CrossSection};
use etrep::shape_space::{intrinsic_mean, intrinsic_path, nonintrinsic_mean, nonintrinsic_path, SampleSet};
use etrep::{ETRep, GlobalTube, ValidityReport};

const RING_SAMPLES: usize = 48;

const PAIR_A: &str = include_str!("../../core/tests/fixtures/counterexample_a.json");
const PAIR_B: &str = include_str!("../../core/tests/fixtures/counterexample_b.json");

fn error(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

fn project(p: &etrep::geometry::Vec3, yaw: f64) -> [f64; 2] {
    let (s, c) = yaw.sin_cos();
    [c * p[0] + s * p[2], p[1]]
}

fn drawing(g: &GlobalTube, yaw: f64) -> Value {
    let spine: Vec<[f64; 2]> = g.points.iter().map(|p| project(p, yaw)).collect();
    let rings: Vec<Vec<[f64; 2]>> = (0..g.points.len())
        .map(|i| {
            let (a, b) = g.radii[i];
            let (e2, e3) = (g.frames[i].column(1), g.frames[i].column(2));
            (0..=RING_SAMPLES)
                .map(|j| {
                    let phi = std::f64::consts::TAU * j as f64 / RING_SAMPLES as f64;
                    project(&(g.points[i] + e2 * (a * phi.cos()) + e3 * (b * phi.sin())), yaw)
                })
                .collect()
        })
        .collect();
    json!({ "spine": spine, "rings": rings })
}

fn with_report(mut view: Value, report: &ValidityReport) -> Value {
    view["valid"] = json!(report.valid);
    view["failing"] = json!(report.failing);
    view["min_margin"] = json!(report.min_margin());
    view
}

fn demo_pair() -> Result<(ETRep, ETRep), etrep::Error> {
    Ok((etrep_from_str(PAIR_A)?, etrep_from_str(PAIR_B)?))
}

/// One bent section after a short straight lead-in, with its RCC check.
#[wasm_bindgen]
pub fn rcc_explorer(v1: f64, v2: f64, psi: f64, x: f64, a: f64, b: f64, yaw: f64) -> String {
    let run = || -> Result<String, etrep::Error> {
        let section = CrossSection::new([v1, v2], psi, x, a, b);
        let s = ETRep::new(vec![
            CrossSection::gauge(a, b),
            CrossSection::new([0.0, 0.0], 0.0, x, a, b),
            section,
        ])?;
        let report = validate(&s);
        let check = rcc_check(&section)?;
        let g = reconstruct_global(&s, true)?;
        let mut view = with_report(drawing(&g, yaw), &report);
        view["theta"] = json!(check.derived.theta);
        view["r"] = json!(check.derived.r);
        view["bound"] = json!(check.derived.bound);
        view["margin"] = json!(check.margin);
        view["norm_v"] = json!(section.v.norm());
        Ok(view.to_string())
    };
    run().unwrap_or_else(error)
}

/// Point `gamma` on the path between the two built-in tubes.
#[wasm_bindgen]
pub fn morph(gamma: f64, intrinsic: bool, yaw: f64) -> String {
    let run = || -> Result<String, etrep::Error> {
        let (a, b) = demo_pair()?;
        let view = if intrinsic {
            let s = intrinsic_path(&a, &b, gamma)?;
            with_report(drawing(&reconstruct_global(&s, true)?, yaw), &validate(&s))
        } else {
            let c = nonintrinsic_path(&a, &b, gamma)?;
            with_report(drawing(&c.rep.reconstruct(), yaw), &c.report)
        };
        Ok(view.to_string())
    };
    run().unwrap_or_else(error)
}

/// Both means of the built-in pair, side by side.
#[wasm_bindgen]
pub fn means(yaw: f64) -> String {
    let run = || -> Result<String, etrep::Error> {
        let (a, b) = demo_pair()?;
        let pair = SampleSet::new(vec![a.clone(), b.clone()])?;
        let intr = intrinsic_mean(&pair)?;
        let non = nonintrinsic_mean(&pair)?;
        Ok(json!({
            "inputs": [
                with_report(drawing(&reconstruct_global(&a, false)?, yaw), &validate(&a)),
                with_report(drawing(&reconstruct_global(&b, false)?, yaw), &validate(&b)),
            ],
            "intrinsic": with_report(drawing(&reconstruct_global(&intr, true)?, yaw), &validate(&intr)),
            "nonintrinsic": with_report(drawing(&non.rep.reconstruct(), yaw), &non.report),
        })
        .to_string())
    };
    run().unwrap_or_else(error)
}
