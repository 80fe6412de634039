//! Experiment configuration: one TOML file with named measures, sequences
//! and systems, plus one section per subcommand. All randomness is fixed
//! by seeds recorded in the file, so outputs are byte-identical across
//! runs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use meseq::groups::{DualPair, GroupElement};
use meseq::koopman::BoundedFn;
use meseq::measures::{AcDensity, ComplexMeasure};
use meseq::operators::{ContractionSystem, PlantedSpec};
use meseq::sequences::{MeasureSequence, Schedule, SetIndicator};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

pub type CliError = Box<dyn std::error::Error>;
pub type CliResult<T> = Result<T, CliError>;

fn err(msg: impl Into<String>) -> CliError {
    msg.into().into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawConfig {
    pub experiment: RawExperiment,
    pub pair: Option<RawPair>,
    #[serde(default)]
    pub measures: Vec<RawMeasure>,
    #[serde(default)]
    pub sequences: Vec<RawSequence>,
    #[serde(default)]
    pub systems: Vec<RawSystem>,
    pub wiener: Option<RawWienerJob>,
    pub kvn: Option<RawKvnJob>,
    pub cvalue: Option<RawCvalueJob>,
    pub density: Option<RawDensityJob>,
    pub decompose: Option<RawDecomposeJob>,
    pub goldstein: Option<RawGoldsteinJob>,
    pub extremal: Option<RawExtremalJob>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawExperiment {
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub schedule: RawSchedule,
    /// Cauchy tolerance for convergence detection.
    pub tol: Option<f64>,
    /// Tolerance for the mean-limit pass criterion.
    pub tol_goldstein: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RawSchedule {
    /// [lo, hi] exponents: N ∈ {2^lo, …, 2^hi}.
    #[serde(rename = "dyadic")]
    Dyadic([u32; 2]),
    #[serde(rename = "explicit")]
    Explicit(Vec<u64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPair {
    pub kind: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawMeasure {
    pub name: String,
    #[serde(default)]
    pub atoms: Vec<RawAtom>,
    pub density: Option<RawDensity>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAtom {
    pub point: String,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawDensity {
    pub shape: String,
    #[serde(default = "one")]
    pub mass: f64,
    /// raised-cosine frequency
    pub k: Option<i64>,
    /// [lo, hi] for real-line box densities
    pub support: Option<[f64; 2]>,
    pub band_limit: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSequence {
    pub name: String,
    pub kind: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawSystem {
    pub name: String,
    /// "power" | "sampled-flow" | "finite-action"
    #[serde(default = "power")]
    pub model: String,
    pub modulus: Option<u64>,
    pub planted: Option<RawPlanted>,
    /// dense matrix as rows of [re, im] pairs
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

fn power() -> String {
    "power".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawPlanted {
    pub dim: usize,
    pub unimodular: usize,
    #[serde(default = "default_gap")]
    pub min_gap: f64,
    #[serde(default = "default_contraction")]
    pub contraction: f64,
    pub seed: Option<u64>,
}

fn default_gap() -> f64 {
    0.1
}

fn default_contraction() -> f64 {
    0.8
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RawWienerJob {
    pub measure: String,
    pub sequence: String,
    /// element list; μ̂ is sampled and written out for these
    #[serde(default)]
    pub fourier_samples: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawKvnJob {
    pub sequence: String,
    pub function: String,
    pub eps: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCvalueJob {
    pub sequence: String,
    pub points: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDensityJob {
    pub sequence: String,
    pub sets: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDecomposeJob {
    pub system: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGoldsteinJob {
    pub system: String,
    pub sequence: String,
    /// "random" (seeded) or explicit vectors
    #[serde(default = "random")]
    pub vectors: String,
    pub x: Option<Vec<[f64; 2]>>,
    pub y: Option<Vec<[f64; 2]>>,
}

fn random() -> String {
    "random".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawExtremalJob {
    pub sequence: String,
    pub grid: String,
}

// ---------------------------------------------------------------------------
// resolved configuration

pub struct Experiment {
    pub seed: u64,
    pub out: PathBuf,
    pub schedule: Schedule,
    pub tol_goldstein: f64,
    pub measures: Vec<(String, ComplexMeasure)>,
    pub sequences: Vec<(String, MeasureSequence)>,
    pub systems: Vec<(String, ContractionSystem)>,
    pub raw: RawConfig,
}

impl Experiment {
    pub fn measure(&self, name: &str) -> CliResult<&ComplexMeasure> {
        self.measures
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| err(format!("validation error: unknown measure `{name}`")))
    }

    pub fn sequence(&self, name: &str) -> CliResult<&MeasureSequence> {
        self.sequences
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| err(format!("validation error: unknown sequence `{name}`")))
    }

    pub fn system(&self, name: &str) -> CliResult<&ContractionSystem> {
        self.systems
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
            .ok_or_else(|| err(format!("validation error: unknown system `{name}`")))
    }
}

/// Parse a grid spec: `circle-rationals:<q>`, `real-range:<lo>:<hi>:<step>`,
/// `cyclic-all:<m>`, or `list:<e1>;<e2>;…`.
pub fn parse_grid(s: &str) -> CliResult<Vec<GroupElement>> {
    if let Some(q) = s.strip_prefix("circle-rationals:") {
        let q: u32 = q
            .parse()
            .map_err(|e| err(format!("grid denominator: {e}")))?;
        if q == 0 {
            return Err(err("grid denominator must be ≥ 1"));
        }
        return Ok((0..q)
            .map(|k| GroupElement::circle(k as f64 / q as f64))
            .collect());
    }
    if let Some(rest) = s.strip_prefix("real-range:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(err("real-range grid needs lo:hi:step"));
        }
        let lo: f64 = parts[0].parse().map_err(|e| err(format!("grid lo: {e}")))?;
        let hi: f64 = parts[1].parse().map_err(|e| err(format!("grid hi: {e}")))?;
        let step: f64 = parts[2]
            .parse()
            .map_err(|e| err(format!("grid step: {e}")))?;
        if !(step > 0.0 && hi >= lo) {
            return Err(err("real-range grid needs step > 0 and hi ≥ lo"));
        }
        let mut out = Vec::new();
        let mut t = lo;
        while t <= hi + 1e-12 {
            out.push(GroupElement::Real(t));
            t += step;
        }
        return Ok(out);
    }
    if let Some(m) = s.strip_prefix("cyclic-all:") {
        let m: u64 = m.parse().map_err(|e| err(format!("grid modulus: {e}")))?;
        return Ok((0..m).map(|j| GroupElement::residue(j as i64, m)).collect());
    }
    if let Some(rest) = s.strip_prefix("list:") {
        return rest
            .split(';')
            .map(|e| GroupElement::parse(e).map_err(|e| -> CliError { Box::new(e) }))
            .collect();
    }
    Err(err(format!("unknown grid spec `{s}`")))
}

fn resolve_density(raw: &RawDensity, pair: &DualPair) -> CliResult<AcDensity> {
    let mut density = match raw.shape.as_str() {
        "uniform" => match pair {
            DualPair::CircleInteger => AcDensity::uniform_circle(raw.mass),
            DualPair::RealReal => {
                let [lo, hi] = raw
                    .support
                    .ok_or_else(|| err("real-line density needs `support = [lo, hi]`"))?;
                AcDensity::uniform_real(lo, hi, raw.mass)?
            }
            _ => return Err(err("densities exist only on the circle and the real line")),
        },
        "raised-cosine" => {
            let k = raw
                .k
                .ok_or_else(|| err("raised-cosine density needs `k`"))?;
            AcDensity::raised_cosine(k, raw.mass)
        }
        other => return Err(err(format!("unknown density shape `{other}`"))),
    };
    if let Some(b) = raw.band_limit {
        density.band_limit = b;
    }
    Ok(density)
}

fn resolve_system(raw: &RawSystem, default_seed: u64) -> CliResult<ContractionSystem> {
    let matrix = match (&raw.planted, &raw.matrix) {
        (Some(p), None) => {
            let spec = PlantedSpec {
                dim: p.dim,
                unimodular: p.unimodular,
                min_gap: p.min_gap,
                contraction_norm: p.contraction,
                seed: p.seed.unwrap_or(default_seed),
            };
            let planted = meseq::operators::plant_power_system(&spec)?;
            match planted.system {
                ContractionSystem::Power { t } => t,
                _ => unreachable!(),
            }
        }
        (None, Some(rows)) => {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(err(format!("system `{}`: matrix must be square", raw.name)));
            }
            DMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]))
        }
        _ => {
            return Err(err(format!(
                "system `{}` needs exactly one of `planted` or `matrix`",
                raw.name
            )))
        }
    };
    let sys = match raw.model.as_str() {
        "power" => ContractionSystem::power(matrix)?,
        "sampled-flow" => ContractionSystem::sampled_flow(matrix)?,
        "finite-action" => {
            let m = raw
                .modulus
                .ok_or_else(|| err(format!("system `{}` needs `modulus`", raw.name)))?;
            ContractionSystem::finite_action(m, matrix)?
        }
        other => return Err(err(format!("unknown system model `{other}`"))),
    };
    Ok(sys)
}

/// Load, parse and cross-validate a config file.
pub fn load(path: &Path) -> CliResult<Experiment> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read config {}: {e}", path.display())))?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| err(format!("config parse error: {e}")))?;

    let schedule = match &raw.experiment.schedule {
        RawSchedule::Dyadic([lo, hi]) => {
            if lo > hi || *hi > 40 {
                return Err(err(format!(
                    "validation error: dyadic schedule [{lo}, {hi}] is not increasing"
                )));
            }
            Schedule::dyadic(*lo, *hi)
        }
        RawSchedule::Explicit(points) => Schedule::new(points.clone(), 1e-3)
            .map_err(|e| err(format!("validation error: {e}")))?,
    };
    let schedule = match raw.experiment.tol {
        Some(t) if t > 0.0 => schedule.with_tol(t),
        Some(t) => return Err(err(format!("validation error: tol {t} must be positive"))),
        None => schedule,
    };

    let pair = raw
        .pair
        .as_ref()
        .map(|p| DualPair::parse(&p.kind))
        .transpose()?;

    let mut names = BTreeSet::new();
    let mut measures = Vec::new();
    for m in &raw.measures {
        if !names.insert(m.name.clone()) {
            return Err(err(format!(
                "validation error: duplicate name `{}`",
                m.name
            )));
        }
        let pair = pair
            .clone()
            .ok_or_else(|| err("validation error: measures need a [pair] section"))?;
        let atoms: Vec<(GroupElement, Complex64)> = m
            .atoms
            .iter()
            .map(|a| Ok((GroupElement::parse(&a.point)?, Complex64::new(a.re, a.im))))
            .collect::<Result<_, meseq::Error>>()?;
        let measure = match &m.density {
            Some(d) => {
                let density = resolve_density(d, &pair)?;
                ComplexMeasure::with_density(pair, atoms, density)?
            }
            None => ComplexMeasure::discrete(pair, atoms)?,
        };
        measures.push((m.name.clone(), measure));
    }

    let mut sequences = Vec::new();
    for s in &raw.sequences {
        if !names.insert(s.name.clone()) {
            return Err(err(format!(
                "validation error: duplicate name `{}`",
                s.name
            )));
        }
        sequences.push((s.name.clone(), MeasureSequence::parse(&s.kind)?));
    }

    let mut systems = Vec::new();
    for s in &raw.systems {
        if !names.insert(s.name.clone()) {
            return Err(err(format!(
                "validation error: duplicate name `{}`",
                s.name
            )));
        }
        systems.push((s.name.clone(), resolve_system(s, raw.experiment.seed)?));
    }

    let out = raw
        .experiment
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));

    Ok(Experiment {
        seed: raw.experiment.seed,
        out,
        schedule,
        tol_goldstein: raw
            .experiment
            .tol_goldstein
            .unwrap_or(meseq::operators::TOL_GOLDSTEIN),
        measures,
        sequences,
        systems,
        raw,
    })
}

/// Resolve a bounded function spec against the pair of a sequence.
pub fn resolve_function(spec: &str, seq: &MeasureSequence) -> CliResult<BoundedFn> {
    Ok(BoundedFn::parse(spec, seq.dual_pair())?)
}

/// Resolve set specs.
pub fn resolve_sets(specs: &[String]) -> CliResult<Vec<SetIndicator>> {
    specs
        .iter()
        .map(|s| SetIndicator::parse(s).map_err(|e| -> CliError { Box::new(e) }))
        .collect()
}
