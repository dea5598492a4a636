//! Two-group permutation tests in the convex feature space.
//!
//! The global test is DiProPerm with the mean-difference direction: the
//! statistic is the difference of projected group means, which equals
//! `‖x̄ − ȳ‖²`, and the direction is recomputed for every relabelling.
//! Per-feature tests use the pooled two-sample t statistic on the same
//! relabellings, followed by Benjamini–Hochberg adjustment.
//!
//! Every relabelling draws from its own stream (see [`crate::rng`]) and
//! exceedances are counted with integers, so results are identical for
//! any thread count.

use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::task_rng;
use crate::shape_space::{map_to_convex, SampleSet, FEATURES_PER_SECTION, FEATURE_NAMES};

pub const DEFAULT_PERMUTATIONS: usize = 10_000;
pub const MIN_PERMUTATIONS: usize = 99;
pub const DEFAULT_ALPHA: f64 = 0.1;

/// Convex-space features, one row per ETRep.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Column names `s{i}_{field}` for `num_sections` sections.
pub fn feature_names(num_sections: usize) -> Vec<String> {
    (0..num_sections)
        .flat_map(|i| FEATURE_NAMES.iter().map(move |f| format!("s{i}_{f}")))
        .collect()
}

impl FeatureMatrix {
    /// Maps every member into the convex space.
    pub fn from_sample(sample: &SampleSet) -> Result<Self> {
        let num_sections = sample.members().first().map_or(0, |m| m.len());
        let rows = sample
            .members()
            .iter()
            .map(|s| map_to_convex(s).map(|c| c.into_coords()))
            .collect::<Result<Vec<_>>>()?;
        Ok(FeatureMatrix {
            columns: feature_names(num_sections),
            rows,
        })
    }

    pub fn num_features(&self) -> usize {
        self.columns.len()
    }

    /// Number of sections implied by the column count.
    pub fn num_sections(&self) -> usize {
        self.columns.len() / FEATURES_PER_SECTION
    }
}

/// `(1 + #{|t_h| ≥ |t_obs|}) / (N + 1)`.
pub fn permutation_pvalue(t_obs: f64, t_perm: &[f64]) -> Result<f64> {
    if t_perm.is_empty() {
        return Err(Error::Empty("no permutation statistics".into()));
    }
    let exceed = t_perm.iter().filter(|t| t.abs() >= t_obs.abs()).count();
    Ok(pvalue_from_count(exceed, t_perm.len()))
}

fn pvalue_from_count(exceed: usize, n_perm: usize) -> f64 {
    (1 + exceed) as f64 / (n_perm + 1) as f64
}

/// Benjamini–Hochberg step-up adjustment, returned in input order.
pub fn bh_adjust(p: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("p-value {bad} outside [0, 1]")));
    }
    let k = p.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| p[i].total_cmp(&p[j]));
    let mut adjusted = vec![0.0; k];
    let mut running = f64::INFINITY;
    for (pos, &i) in order.iter().enumerate().rev() {
        let rank = pos + 1;
        running = running.min(p[i] * k as f64 / rank as f64);
        adjusted[i] = running.min(1.0);
    }
    Ok(adjusted)
}

/// Result of the global DiProPerm test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalTest {
    pub statistic: f64,
    pub p_value: f64,
    pub n_permutations: usize,
}

/// Raw per-feature result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialTest {
    pub t: f64,
    pub p_raw: f64,
    /// The feature is constant over both groups; `p_raw` is 1.
    pub degenerate: bool,
}

/// Pooled two-sample t statistic. Zero pooled variance with a nonzero
/// mean difference yields ±∞.
pub fn pooled_t(x: &[f64], y: &[f64]) -> f64 {
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let ss: f64 = v.iter().map(|a| (a - m) * (a - m)).sum();
        (m, ss)
    };
    let (mx, ssx) = stats(x);
    let (my, ssy) = stats(y);
    t_from_moments(mx, ssx, x.len(), my, ssy, y.len(), scale_of(x.iter().chain(y)))
}

fn scale_of<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    values.fold(0.0f64, |m, v| m.max(v.abs()))
}

fn t_from_moments(mx: f64, ssx: f64, nx: usize, my: f64, ssy: f64, ny: usize, scale: f64) -> f64 {
    let pooled_var = (ssx + ssy) / (nx + ny - 2) as f64;
    let sd = pooled_var.sqrt();
    let diff = mx - my;
    let floor = 1e-14 * scale.max(f64::MIN_POSITIVE);
    if sd <= floor {
        if diff.abs() <= floor {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    } else {
        diff / (sd * (1.0 / nx as f64 + 1.0 / ny as f64).sqrt())
    }
}

/// Pooled data with column-major access.
struct Pooled {
    columns: Vec<Vec<f64>>,
    scales: Vec<f64>,
    m1: usize,
    m: usize,
}

/// Statistics for one labelling.
struct LabelStats {
    diproperm: f64,
    t: Vec<f64>,
}

impl Pooled {
    fn new(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self> {
        if a.len() < 2 || b.len() < 2 {
            return Err(Error::Domain(format!(
                "both groups need at least 2 members (got {} and {})",
                a.len(),
                b.len()
            )));
        }
        let dim = a[0].len();
        if let Some(bad) = a.iter().chain(b).find(|r| r.len() != dim) {
            return Err(Error::LengthMismatch(dim, bad.len()));
        }
        let rows: Vec<&Vec<f64>> = a.iter().chain(b).collect();
        let columns: Vec<Vec<f64>> = (0..dim).map(|k| rows.iter().map(|r| r[k]).collect()).collect();
        let scales = columns.iter().map(|c| scale_of(c.iter())).collect();
        Ok(Pooled {
            columns,
            scales,
            m1: a.len(),
            m: rows.len(),
        })
    }

    fn observed_labels(&self) -> Vec<bool> {
        (0..self.m).map(|i| i < self.m1).collect()
    }

    fn permuted_labels(&self, seed: u64, h: usize) -> Vec<bool> {
        let mut rng = task_rng(seed, h as u64);
        let mut in_a = vec![false; self.m];
        for i in sample_indices(&mut rng, self.m, self.m1) {
            in_a[i] = true;
        }
        in_a
    }

    fn stats(&self, in_a: &[bool]) -> LabelStats {
        let n1 = self.m1;
        let n2 = self.m - self.m1;
        let mut diproperm = 0.0;
        let mut t = Vec::with_capacity(self.columns.len());
        for (col, &scale) in self.columns.iter().zip(&self.scales) {
            let (mut s1, mut s2) = (0.0, 0.0);
            for (v, &a) in col.iter().zip(in_a) {
                if a {
                    s1 += v;
                } else {
                    s2 += v;
                }
            }
            let (mean1, mean2) = (s1 / n1 as f64, s2 / n2 as f64);
            let (mut ss1, mut ss2) = (0.0, 0.0);
            for (v, &a) in col.iter().zip(in_a) {
                if a {
                    ss1 += (v - mean1) * (v - mean1);
                } else {
                    ss2 += (v - mean2) * (v - mean2);
                }
            }
            diproperm += (mean1 - mean2) * (mean1 - mean2);
            t.push(t_from_moments(mean1, ss1, n1, mean2, ss2, n2, scale));
        }
        LabelStats { diproperm, t }
    }

    fn is_constant(&self, k: usize) -> bool {
        let c = &self.columns[k];
        c.iter().all(|v| *v == c[0])
    }
}

fn check_permutations(n_perm: usize) -> Result<()> {
    if n_perm < MIN_PERMUTATIONS {
        return Err(Error::Domain(format!(
            "at least {MIN_PERMUTATIONS} permutations are required (got {n_perm})"
        )));
    }
    Ok(())
}

/// Joint global and per-feature run over one shared permutation stream.
fn run(a: &[Vec<f64>], b: &[Vec<f64>], n_perm: usize, seed: u64) -> Result<(GlobalTest, Vec<PartialTest>)> {
    check_permutations(n_perm)?;
    let pooled = Pooled::new(a, b)?;
    let observed = pooled.stats(&pooled.observed_labels());
    let dim = observed.t.len();

    let zero = || (0usize, vec![0usize; dim]);
    let (global_count, feature_counts) = (0..n_perm)
        .into_par_iter()
        .map(|h| {
            let perm = pooled.stats(&pooled.permuted_labels(seed, h));
            let g = usize::from(perm.diproperm.abs() >= observed.diproperm.abs());
            let f: Vec<usize> = perm
                .t
                .iter()
                .zip(&observed.t)
                .map(|(th, to)| usize::from(th.abs() >= to.abs()))
                .collect();
            (g, f)
        })
        .fold(zero, |(g, mut f), (dg, df)| {
            f.iter_mut().zip(df).for_each(|(acc, d)| *acc += d);
            (g + dg, f)
        })
        .reduce(zero, |(g1, mut f1), (g2, f2)| {
            f1.iter_mut().zip(f2).for_each(|(acc, d)| *acc += d);
            (g1 + g2, f1)
        });

    let global = GlobalTest {
        statistic: observed.diproperm,
        p_value: pvalue_from_count(global_count, n_perm),
        n_permutations: n_perm,
    };
    let partial = (0..dim)
        .map(|k| {
            if pooled.is_constant(k) {
                PartialTest {
                    t: 0.0,
                    p_raw: 1.0,
                    degenerate: true,
                }
            } else {
                PartialTest {
                    t: observed.t[k],
                    p_raw: pvalue_from_count(feature_counts[k], n_perm),
                    degenerate: false,
                }
            }
        })
        .collect();
    Ok((global, partial))
}

/// Global DiProPerm test of equal means.
pub fn diproperm(a: &[Vec<f64>], b: &[Vec<f64>], n_perm: usize, seed: u64) -> Result<GlobalTest> {
    run(a, b, n_perm, seed).map(|(g, _)| g)
}

/// Per-feature pooled-t permutation tests (unadjusted).
pub fn partial_tests(a: &[Vec<f64>], b: &[Vec<f64>], n_perm: usize, seed: u64) -> Result<Vec<PartialTest>> {
    run(a, b, n_perm, seed).map(|(_, p)| p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureResult {
    pub feature: String,
    pub t: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub degenerate: bool,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestMethods {
    pub global: String,
    pub partial: String,
    pub adjustment: String,
}

impl Default for TestMethods {
    fn default() -> Self {
        TestMethods {
            global: "DiProPerm (mean-difference direction, statistic = difference of projected means)".into(),
            partial: "pooled two-sample t, permutation".into(),
            adjustment: "Benjamini-Hochberg".into(),
        }
    }
}

/// Full report of a two-group comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub methods: TestMethods,
    pub seed: u64,
    pub n_permutations: usize,
    pub alpha: f64,
    pub group_sizes: [usize; 2],
    pub global: GlobalTest,
    pub global_significant: bool,
    pub partial: Vec<FeatureResult>,
}

/// Global, per-feature and BH-adjusted results for two feature matrices.
pub fn two_sample_test(
    a: &FeatureMatrix,
    b: &FeatureMatrix,
    n_perm: usize,
    seed: u64,
    alpha: f64,
) -> Result<TestReport> {
    if a.columns != b.columns {
        return Err(Error::LengthMismatch(a.num_sections(), b.num_sections()));
    }
    let (global, partial) = run(&a.rows, &b.rows, n_perm, seed)?;
    let raw: Vec<f64> = partial.iter().map(|p| p.p_raw).collect();
    let adjusted = bh_adjust(&raw)?;
    let partial = partial
        .iter()
        .zip(adjusted)
        .zip(&a.columns)
        .map(|((p, adj), name)| FeatureResult {
            feature: name.clone(),
            t: p.t,
            p_raw: p.p_raw,
            p_adjusted: adj,
            degenerate: p.degenerate,
            significant: adj <= alpha,
        })
        .collect();
    Ok(TestReport {
        methods: TestMethods::default(),
        seed,
        n_permutations: n_perm,
        alpha,
        group_sizes: [a.rows.len(), b.rows.len()],
        global,
        global_significant: global.p_value <= alpha,
        partial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn cloud(rng: &mut impl Rng, m: usize, dim: usize, shift: &[f64]) -> Vec<Vec<f64>> {
        (0..m)
            .map(|_| {
                (0..dim)
                    .map(|k| rng.sample::<f64, _>(StandardNormal) + shift[k])
                    .collect()
            })
            .collect()
    }

    /// Textbook BH: adj_i = min(1, min over p_j ≥ p_i of p_j·K / rank_j),
    /// with rank_j the number of p-values ≤ p_j.
    fn bh_oracle(p: &[f64]) -> Vec<f64> {
        let k = p.len();
        p.iter()
            .map(|pi| {
                p.iter()
                    .filter(|pj| *pj >= pi)
                    .map(|pj| {
                        let rank = p.iter().filter(|q| *q <= pj).count();
                        pj * k as f64 / rank as f64
                    })
                    .fold(f64::INFINITY, f64::min)
                    .min(1.0)
            })
            .collect()
    }

    #[test]
    fn pvalue_formula() {
        let perms = vec![1.0; 999];
        assert_relative_eq!(permutation_pvalue(2.0, &perms).unwrap(), 0.001);
        assert_relative_eq!(permutation_pvalue(1.0, &perms).unwrap(), 1.0);
        let half: Vec<f64> = (0..10).map(|i| if i < 5 { 3.0 } else { -0.5 }).collect();
        assert_relative_eq!(permutation_pvalue(-2.0, &half).unwrap(), 6.0 / 11.0);
        assert!(permutation_pvalue(1.0, &[]).is_err());
    }

    #[test]
    fn bh_examples() {
        let adj = bh_adjust(&[0.01, 0.02, 0.03]).unwrap();
        for a in adj {
            assert_relative_eq!(a, 0.03, epsilon = 1e-15);
        }
        assert_eq!(bh_adjust(&[0.2]).unwrap(), vec![0.2]);
        let adj = bh_adjust(&[0.01, 0.04, 0.03]).unwrap();
        assert_relative_eq!(adj[0], 0.03, epsilon = 1e-15);
        assert_relative_eq!(adj[1], 0.04, epsilon = 1e-15);
        assert_relative_eq!(adj[2], 0.04, epsilon = 1e-15);
        assert!(bh_adjust(&[0.5, 1.2]).is_err());
        assert!(bh_adjust(&[]).unwrap().is_empty());
    }

    #[test]
    fn bh_matches_oracle_with_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..200 {
            let k = rng.gen_range(1..60);
            let p: Vec<f64> = (0..k).map(|_| (rng.gen_range(0..20) as f64) / 20.0).collect();
            assert_eq!(bh_adjust(&p).unwrap(), bh_oracle(&p));
        }
    }

    #[test]
    fn pooled_t_hand_computation() {
        // means 2 and 5, pooled variance 1 → t = −3 / √(2/3)
        let t = pooled_t(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        assert_relative_eq!(t, -3.0 / (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(t, -3.674234614174767, epsilon = 1e-12);
        assert_eq!(pooled_t(&[1.0, 1.0], &[2.0, 2.0]), f64::NEG_INFINITY);
        assert_eq!(pooled_t(&[1.0, 1.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn constant_feature_is_degenerate() {
        let a = vec![vec![1.0, 0.5], vec![2.0, 0.5], vec![3.0, 0.5]];
        let b = vec![vec![4.0, 0.5], vec![5.0, 0.5], vec![6.0, 0.5]];
        let partial = partial_tests(&a, &b, 199, 3).unwrap();
        assert!(partial[1].degenerate);
        assert_eq!(partial[1].p_raw, 1.0);
        assert!(!partial[0].degenerate);
        assert_relative_eq!(partial[0].t, -3.674234614174767, epsilon = 1e-12);
    }

    #[test]
    fn diproperm_statistic_is_squared_mean_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = cloud(&mut rng, 8, 5, &[0.0; 5]);
        let b = cloud(&mut rng, 6, 5, &[0.3; 5]);
        let g = diproperm(&a, &b, 99, 1).unwrap();
        let mean = |rows: &[Vec<f64>], k: usize| rows.iter().map(|r| r[k]).sum::<f64>() / rows.len() as f64;
        let d: Vec<f64> = (0..5).map(|k| mean(&a, k) - mean(&b, k)).collect();
        // projected group means onto d
        let z = |rows: &[Vec<f64>]| {
            rows.iter()
                .map(|r| r.iter().zip(&d).map(|(x, y)| x * y).sum::<f64>())
                .sum::<f64>()
                / rows.len() as f64
        };
        let projected = z(&a) - z(&b);
        let squared: f64 = d.iter().map(|x| x * x).sum();
        assert_relative_eq!(g.statistic, squared, epsilon = 1e-10);
        assert_relative_eq!(g.statistic, projected, epsilon = 1e-10);
    }

    #[test]
    fn diproperm_detects_separation() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let dir: Vec<f64> = (0..10).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let shift: Vec<f64> = dir.iter().map(|x| 5.0 * x / norm).collect();
        let a = cloud(&mut rng, 20, 10, &[0.0; 10]);
        let b = cloud(&mut rng, 20, 10, &shift);
        let g = diproperm(&a, &b, 999, 5).unwrap();
        assert_relative_eq!(g.p_value, 0.001);
    }

    #[test]
    fn deterministic_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = cloud(&mut rng, 6, 4, &[0.0; 4]);
        let b = cloud(&mut rng, 7, 4, &[0.0; 4]);
        let r1 = run(&a, &b, 199, 11).unwrap();
        let r2 = run(&a, &b, 199, 11).unwrap();
        assert_eq!(r1, r2);
        let lo = 1.0 / 200.0;
        assert!(r1.0.p_value >= lo && r1.0.p_value <= 1.0);
        assert!(r1.1.iter().all(|p| p.p_raw >= lo && p.p_raw <= 1.0));
    }

    #[test]
    fn rejects_small_inputs() {
        let a = vec![vec![1.0]];
        let b = vec![vec![2.0], vec![3.0]];
        assert!(diproperm(&a, &b, 999, 0).is_err());
        let a = vec![vec![1.0], vec![1.5]];
        assert!(diproperm(&a, &b, 10, 0).is_err());
    }
}
