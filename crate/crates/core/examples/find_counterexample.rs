//! Seeded search for a pair of valid tubes whose non-intrinsic mean breaks
//! the RCC while the intrinsic mean does not.
//!
//! Candidates are drawn in the convex space, so both tubes are valid. Each
//! has thick, short sections bent close to the RCC limit. The pair with the
//! most negative non-intrinsic margin is written to
//! `tests/fixtures/counterexample_{a,b}.json`.
//!
//! ```text
//! cargo run -p etrep --example find_counterexample
//! ```

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use etrep::io::write_etrep;
use etrep::model::validate;
use etrep::shape_space::{intrinsic_mean, map_from_convex, nonintrinsic_mean, ConvexPoint, SampleSet};
use etrep::ETRep;

const SEED: u64 = 20240611;
const TRIALS: usize = 2000;
const SECTIONS: usize = 3;

fn random_tube(rng: &mut ChaCha8Rng) -> ETRep {
    let a = rng.gen_range(2.0..5.0);
    let b = rng.gen_range(0.5..1.0);
    let mut coords = vec![0.0, 0.0, 0.0, 0.0, a, b];
    for _ in 1..SECTIONS {
        let sigma = rng.gen_range(0.6..0.95);
        let dir = rng.gen_range(-PI..PI);
        coords.extend([
            sigma * dir.cos(),
            sigma * dir.sin(),
            rng.gen_range(-PI..PI),
            rng.gen_range(0.3..1.0),
            a,
            b,
        ]);
    }
    map_from_convex(&ConvexPoint::from_coords(coords).expect("coordinates in range")).expect("valid by construction")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut best: Option<(f64, ETRep, ETRep)> = None;
    for _ in 0..TRIALS {
        let pair = SampleSet::new(vec![random_tube(&mut rng), random_tube(&mut rng)])?;
        let intrinsic = intrinsic_mean(&pair)?;
        let Ok(nonintrinsic) = nonintrinsic_mean(&pair) else {
            continue;
        };
        if !validate(&intrinsic).valid || nonintrinsic.report.valid {
            continue;
        }
        let Some(margin) = nonintrinsic.report.min_margin() else {
            continue;
        };
        if best.as_ref().is_none_or(|(m, _, _)| margin < *m) {
            let [a, b]: [ETRep; 2] = pair.members().to_vec().try_into().expect("two members");
            best = Some((margin, a, b));
        }
    }
    let (margin, mut a, mut b) = best.ok_or("no counterexample found")?;
    a.metadata.insert("label".into(), "counterexample A".into());
    b.metadata.insert("label".into(), "counterexample B".into());
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    std::fs::create_dir_all(&dir)?;
    write_etrep(&a, dir.join("counterexample_a.json"))?;
    write_etrep(&b, dir.join("counterexample_b.json"))?;
    println!(
        "non-intrinsic mean margin {margin}; fixtures written to {}",
        dir.display()
    );
    Ok(())
}
