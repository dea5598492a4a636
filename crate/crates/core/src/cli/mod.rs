//! Command dispatch and exit codes.
//!
//! | code | meaning |
//! |------|---------|
//! | 0  | success |
//! | 1  | computation failed (degenerate input) |
//! | 2  | invalid ETRep geometry; a report is printed |
//! | 3  | the non-intrinsic mean is invalid |
//! | 64 | usage error |
//! | 65 | inputs are inconsistent (different section counts, empty population) |
//! | 66 | an input could not be read or parsed |
//! | 73 | an output could not be written |

mod args;

use std::fmt::Display;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use etrep::io::{self, read_etrep, read_population, write_etrep, DEFAULT_RING_SAMPLES};
use etrep::model::{reconstruct_global, validate};
use etrep::shape_space::{
    intrinsic_mean, nonintrinsic_mean, normalize_sample, roll_wraparound_sections, Method, SampleSet,
};
use etrep::simulation::{simulate_population, NoiseConfig, SimulationConfig};
use etrep::stats::{two_sample_test, FeatureMatrix, MIN_PERMUTATIONS};
use etrep::{ETRep, Error, ValidityReport};

use args::{Cli, Command, MeanArgs, MorphArgs, TestArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_MEAN_INVALID: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_INPUT: i32 = 66;
pub const EXIT_OUTPUT: i32 = 73;

#[derive(Debug)]
struct Failure {
    code: i32,
    error: anyhow::Error,
}

type Outcome = std::result::Result<i32, Failure>;

fn fail(code: i32, error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code,
        error: error.into(),
    }
}

fn usage(msg: impl Display) -> Failure {
    fail(EXIT_USAGE, anyhow::anyhow!("{msg}"))
}

/// Exit code for a library error raised while computing.
fn compute_code(e: &Error) -> i32 {
    match e {
        Error::InvalidRep { .. } | Error::Hemisphere { .. } => EXIT_INVALID,
        Error::LengthMismatch(..) | Error::Empty(_) => EXIT_DATA,
        Error::Schema { .. } => EXIT_INPUT,
        Error::Io(_) => EXIT_OUTPUT,
        _ => EXIT_FAILURE,
    }
}

fn compute(e: Error) -> Failure {
    fail(compute_code(&e), e)
}

fn input(e: Error) -> Failure {
    fail(EXIT_INPUT, e)
}

fn output(e: impl Into<anyhow::Error>) -> Failure {
    fail(EXIT_OUTPUT, e)
}

/// Writes a line to stdout; a closed pipe is not an error.
fn say(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print_json(value: &impl Serialize) {
    match serde_json::to_string_pretty(value) {
        Ok(text) => say(&text),
        Err(e) => eprintln!("etrep: cannot render report: {e}"),
    }
}

fn write_json(value: &impl Serialize, path: &Path) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(output)?;
    text.push('\n');
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(output)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(output)
}

/// Reads one ETRep and refuses it, with a printed report, if invalid.
fn read_valid(path: &Path) -> Result<ETRep, Failure> {
    let s = read_etrep(path).map_err(input)?;
    require_valid(&s, path)?;
    Ok(s)
}

fn require_valid(s: &ETRep, path: &Path) -> Result<(), Failure> {
    let report = validate(s);
    if report.valid {
        return Ok(());
    }
    print_json(&report);
    Err(fail(
        EXIT_INVALID,
        anyhow::anyhow!("{} is invalid; failing sections {:?}", path.display(), report.failing),
    ))
}

/// Loads a population from one directory or a list of files, in order.
fn read_inputs(inputs: &[PathBuf]) -> Result<SampleSet, Failure> {
    let files = match inputs {
        [dir] if dir.is_dir() => io::list_json_files(dir).map_err(input)?,
        _ => inputs.to_vec(),
    };
    if files.is_empty() {
        return Err(fail(EXIT_DATA, anyhow::anyhow!("no ETRep files found")));
    }
    let members = files.iter().map(|f| read_valid(f)).collect::<Result<Vec<_>, _>>()?;
    SampleSet::new(members).map_err(compute)
}

fn read_group(dir: &Path) -> Result<SampleSet, Failure> {
    let members = read_population(dir).map_err(input)?;
    if members.is_empty() {
        return Err(fail(EXIT_DATA, anyhow::anyhow!("no ETRep files in {}", dir.display())));
    }
    for (s, path) in members.iter().zip(io::list_json_files(dir).map_err(input)?) {
        require_valid(s, &path)?;
    }
    SampleSet::new(members).map_err(compute)
}

fn attach_report(s: &mut ETRep, method: Method, scaled: bool, report: &ValidityReport) {
    let failing: Vec<String> = report.failing.iter().map(|i| i.to_string()).collect();
    let meta = &mut s.metadata;
    meta.insert("method".into(), method.as_str().into());
    meta.insert("scaled".into(), scaled.to_string());
    meta.insert("valid".into(), report.valid.to_string());
    meta.insert("failing".into(), failing.join(" "));
    if let Some(m) = report.min_margin() {
        meta.insert("min_margin".into(), m.to_string());
    }
}

fn cmd_validate(path: &Path) -> Outcome {
    let s = read_etrep(path).map_err(input)?;
    let report = validate(&s);
    print_json(&report);
    Ok(if report.valid { EXIT_OK } else { EXIT_INVALID })
}

fn cmd_mean(a: &MeanArgs) -> Outcome {
    let mut sample = read_inputs(&a.inputs)?;
    if a.scaled {
        sample = normalize_sample(&sample).map_err(compute)?;
    }
    for i in roll_wraparound_sections(&sample) {
        eprintln!("etrep: warning: roll angles of section {i} straddle ±π; the linear mean may be misleading");
    }
    let method = Method::from(a.method);
    let (mut mean, report) = match method {
        Method::Intrinsic => {
            let mean = intrinsic_mean(&sample).map_err(compute)?;
            let report = validate(&mean);
            (mean, report)
        }
        Method::Nonintrinsic => {
            let checked = nonintrinsic_mean(&sample).map_err(compute)?;
            match checked.rep.to_etrep() {
                Ok(mean) => (mean, checked.report),
                Err(e) => {
                    print_json(&checked.report);
                    return Err(fail(
                        EXIT_MEAN_INVALID,
                        anyhow::anyhow!("mean cannot be written as an ETRep: {e}"),
                    ));
                }
            }
        }
    };
    attach_report(&mut mean, method, a.scaled, &report);
    write_etrep(&mean, &a.output).map_err(output)?;
    print_json(&report);
    Ok(if report.valid { EXIT_OK } else { EXIT_MEAN_INVALID })
}

fn cmd_morph(a: &MorphArgs) -> Outcome {
    if a.steps == 0 {
        return Err(usage("--steps must be at least 1"));
    }
    let s1 = read_valid(&a.first)?;
    let s2 = read_valid(&a.second)?;
    if s1.len() != s2.len() {
        return Err(compute(Error::LengthMismatch(s1.len(), s2.len())));
    }
    create_dir(&a.output)?;
    io::export_morph(&s1, &s2, a.steps, a.method.into(), DEFAULT_RING_SAMPLES, &a.output).map_err(compute)?;
    Ok(EXIT_OK)
}

/// Config file: noise parameters plus `reference`, either an inline ETRep
/// document or a path relative to the config file.
fn read_sim_config(path: &Path) -> Result<SimulationConfig, Failure> {
    let read_err = |e: anyhow::Error| fail(EXIT_INPUT, e);
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(read_err)?;
    let doc: Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(read_err)?;
    let noise: NoiseConfig = serde_json::from_value(doc.clone())
        .with_context(|| format!("noise parameters in {}", path.display()))
        .map_err(read_err)?;
    let reference = match doc.get("reference") {
        Some(Value::String(rel)) => {
            let base = path.parent().unwrap_or(Path::new("."));
            read_valid(&base.join(rel))?
        }
        Some(inline @ Value::Object(_)) => {
            let s = io::etrep_from_value(inline).map_err(input)?;
            require_valid(&s, path)?;
            s
        }
        _ => return Err(read_err(anyhow::anyhow!("{}: missing \"reference\"", path.display()))),
    };
    Ok(SimulationConfig { reference, noise })
}

fn cmd_simulate(config: &Path, dir: &Path) -> Outcome {
    let cfg = read_sim_config(config)?;
    if cfg.noise.m == 0 {
        return Err(usage("m must be at least 1"));
    }
    let population = simulate_population(&cfg).map_err(compute)?;
    create_dir(dir)?;
    let width = (population.len() - 1).to_string().len().max(3);
    for (j, member) in population.members().iter().enumerate() {
        write_etrep(member, dir.join(format!("member_{j:0width$}.json"))).map_err(output)?;
    }
    let features = FeatureMatrix::from_sample(&population).map_err(compute)?;
    io::write_feature_csv(&features, dir.join("features.csv")).map_err(output)?;
    Ok(EXIT_OK)
}

fn cmd_test(a: &TestArgs) -> Outcome {
    if a.permutations < MIN_PERMUTATIONS {
        return Err(usage(format!("-N must be at least {MIN_PERMUTATIONS}")));
    }
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(usage("--alpha must lie in (0, 1)"));
    }
    let mut groups = Vec::with_capacity(2);
    for dir in &a.groups {
        let mut sample = read_group(dir)?;
        if a.scaled {
            sample = normalize_sample(&sample).map_err(compute)?;
        }
        groups.push(FeatureMatrix::from_sample(&sample).map_err(compute)?);
    }
    let report = two_sample_test(&groups[0], &groups[1], a.permutations, a.seed, a.alpha).map_err(compute)?;
    write_json(&report, &a.output)?;
    say(&format!(
        "global p = {} ({} of {} features significant at alpha = {})",
        report.global.p_value,
        report.partial.iter().filter(|f| f.significant).count(),
        report.partial.len(),
        report.alpha
    ));
    Ok(EXIT_OK)
}

fn cmd_export_obj(input_path: &Path, out: &Path, ring_samples: usize, caps: bool) -> Outcome {
    if ring_samples < 3 {
        return Err(usage("-M must be at least 3"));
    }
    let s = read_valid(input_path)?;
    let tube = reconstruct_global(&s, false).map_err(compute)?;
    let mesh = io::BoundaryMesh::from_tube(&tube, ring_samples, caps).map_err(compute)?;
    fs::write(out, mesh.to_obj_string())
        .with_context(|| format!("writing {}", out.display()))
        .map_err(output)?;
    Ok(EXIT_OK)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("ETREP_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("ETREP_THREADS={value:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| fail(EXIT_FAILURE, e))
}

fn dispatch(cli: Cli) -> Outcome {
    configure_threads()?;
    match cli.command {
        Command::Validate { input } => cmd_validate(&input),
        Command::Mean(a) => cmd_mean(&a),
        Command::Morph(a) => cmd_morph(&a),
        Command::Simulate { config, output } => cmd_simulate(&config, &output),
        Command::Test(a) => cmd_test(&a),
        Command::ExportObj {
            input,
            output,
            ring_samples,
            caps,
        } => cmd_export_obj(&input, &output, ring_samples, caps),
    }
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(Failure { code, error }) => {
            eprintln!("etrep: {error:#}");
            code
        }
    }
}
