//! Job configuration: `[lattice]`, `[kernel]`, `[task]` and `[params]`
//! sections of a TOML file. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use blochlat::norms::NormWeight;
use blochlat::opfunc::{Contour, NamedFunction};
use blochlat::scaling::ScaleFactors;
use blochlat::{Error, LatticeSpec};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub lattice: LatticeSection,
    pub kernel: Option<KernelSection>,
    pub task: TaskSection,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub eps_t: f64,
    pub eps_x: f64,
    pub l_t: usize,
    pub l_x: usize,
    pub big_l_t: usize,
    pub big_l_x: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSection {
    NaiveQstarq,
    SmoothQstarq { exponent: u32 },
    Explicit { path: PathBuf },
    Random { seed: Option<u64>, support_radius: usize },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub name: TaskName,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TaskName {
    Fibers,
    Norms,
    Decay,
    Funcalc,
    Verify,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    pub m: f64,
    pub m_prime: f64,
    pub m_dblprime: f64,
    pub seed: Option<u64>,
    pub kernels: usize,
    pub fields: usize,
    pub strip_samples: usize,
    pub fiber_points: usize,
    pub random_directions: usize,
    pub sigma_t: f64,
    pub sigma_x: f64,
    pub function: Option<FunctionName>,
    pub coefficients: Option<Vec<Coefficient>>,
    pub contour: Option<ContourSection>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            m: 1.0,
            m_prime: 0.5,
            m_dblprime: 0.25,
            seed: None,
            kernels: 10,
            fields: 5,
            strip_samples: 100,
            fiber_points: 20,
            random_directions: 4,
            sigma_t: 4.0,
            sigma_x: 2.0,
            function: None,
            coefficients: None,
            contour: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FunctionName {
    Identity,
    Square,
    Inverse,
    Polynomial,
}

/// A polynomial coefficient, either real or `[re, im]`.
#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

impl Coefficient {
    fn value(self) -> Complex64 {
        match self {
            Coefficient::Real(x) => Complex64::new(x, 0.0),
            Coefficient::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// Either a circle (`center`, `radius`) or a closed polygon (`vertices`).
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSection {
    pub center: Option<[f64; 2]>,
    pub radius: Option<f64>,
    pub vertices: Option<Vec<[f64; 2]>>,
}

/// A validated job.
#[derive(Debug)]
pub struct Job {
    pub spec: LatticeSpec,
    pub kernel: Option<KernelSection>,
    pub task: TaskName,
    pub seed: u64,
    pub weight: NormWeight,
    pub kernels: usize,
    pub fields: usize,
    pub strip_samples: usize,
    pub fiber_points: usize,
    pub random_directions: usize,
    pub scale: ScaleFactors,
    pub function: NamedFunction,
    pub contour: Option<Contour>,
}

pub fn load(path: &Path, seed_override: Option<u64>) -> CliResult<Job> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io("read config", path, e))?;
    let job = parse(&text, seed_override)?;
    Ok(resolve_paths(job, path.parent().unwrap_or(Path::new(""))))
}

/// Explicit kernel files are resolved relative to the config file.
fn resolve_paths(mut job: Job, base: &Path) -> Job {
    if let Some(KernelSection::Explicit { path }) = &mut job.kernel {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
    job
}

pub fn parse(text: &str, seed_override: Option<u64>) -> CliResult<Job> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::config("<document>", e.to_string().trim_end()))?;
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().to_string();
        CliError::config(path, message.trim_end())
    })?;
    validate(raw, seed_override)
}

fn validate(raw: RawConfig, seed_override: Option<u64>) -> CliResult<Job> {
    let l = &raw.lattice;
    let spec = LatticeSpec::new(l.eps_t, l.eps_x, l.l_t, l.l_x, l.big_l_t, l.big_l_x, l.dim).map_err(spec_error)?;
    let p = &raw.params;

    let weight = NormWeight::new(p.m, p.m_prime, p.m_dblprime).map_err(|e| CliError::config("params.m", e))?;
    for (name, v) in [
        ("kernels", p.kernels),
        ("fields", p.fields),
        ("strip_samples", p.strip_samples),
        ("fiber_points", p.fiber_points),
    ] {
        if v == 0 {
            return Err(CliError::config(format!("params.{name}"), "must be at least 1"));
        }
    }
    let scale = ScaleFactors::new(p.sigma_t, p.sigma_x).map_err(|e| CliError::config("params.sigma_t", e))?;

    let function = match (p.function, &p.coefficients) {
        (Some(FunctionName::Polynomial), Some(cs)) if !cs.is_empty() => {
            NamedFunction::Polynomial(cs.iter().map(|c| c.value()).collect())
        }
        (Some(FunctionName::Polynomial), _) => {
            return Err(CliError::config("params.coefficients", "polynomial needs a non-empty coefficient list"))
        }
        (_, Some(_)) => {
            return Err(CliError::config("params.coefficients", "only used with function = \"polynomial\""))
        }
        (Some(FunctionName::Identity), None) => NamedFunction::Identity,
        (Some(FunctionName::Square), None) | (None, None) => NamedFunction::Square,
        (Some(FunctionName::Inverse), None) => NamedFunction::Inverse,
    };

    let contour = p.contour.as_ref().map(contour_from).transpose()?;

    let kernel = raw.kernel.clone();
    if let Some(k) = &kernel {
        validate_kernel(&spec, k)?;
    }
    if kernel.is_none() && raw.task.name != TaskName::Verify {
        return Err(CliError::config("kernel", "the task needs a [kernel] section"));
    }

    Ok(Job {
        spec,
        kernel,
        task: raw.task.name,
        seed: seed_override.or(p.seed).unwrap_or(0),
        weight,
        kernels: p.kernels,
        fields: p.fields,
        strip_samples: p.strip_samples,
        fiber_points: p.fiber_points,
        random_directions: p.random_directions,
        scale,
        function,
        contour,
    })
}

fn spec_error(e: Error) -> CliError {
    match &e {
        Error::Divisibility { period_name, .. } => {
            let field = if *period_name == "L_T" { "big_l_t" } else { "big_l_x" };
            CliError::config(format!("lattice.{field}"), &e)
        }
        Error::InvalidSpec(msg) => {
            let field = ["eps_t", "eps_x", "big_l_t", "big_l_x", "l_t", "l_x", "dim"]
                .into_iter()
                .find(|f| msg.contains(f));
            CliError::config(field.map_or("lattice".to_string(), |f| format!("lattice.{f}")), &e)
        }
        _ => CliError::config("lattice", &e),
    }
}

fn contour_from(c: &ContourSection) -> CliResult<Contour> {
    let point = |v: [f64; 2]| Complex64::new(v[0], v[1]);
    match (c.center, c.radius, &c.vertices) {
        (Some(center), Some(radius), None) => {
            Contour::circle(point(center), radius).map_err(|e| CliError::config("params.contour.radius", e))
        }
        (None, None, Some(vs)) => Contour::polyline(vs.iter().copied().map(point).collect())
            .map_err(|e| CliError::config("params.contour.vertices", e)),
        _ => Err(CliError::config(
            "params.contour",
            "give either center and radius, or vertices",
        )),
    }
}

/// Largest radius whose window fits once on every axis of the fine torus.
pub fn max_fine_radius(spec: &LatticeSpec) -> usize {
    (0..spec.axes()).map(|a| (spec.extent(a) - 1) / 2).min().unwrap_or(0)
}

/// Cheap checks only; profile kernels are checked against the torus once built.
fn validate_kernel(spec: &LatticeSpec, k: &KernelSection) -> CliResult<()> {
    match k {
        KernelSection::NaiveQstarq => match (0..spec.axes()).find(|&a| spec.period(a).is_multiple_of(2)) {
            Some(a) => Err(CliError::config(
                "kernel.kind",
                format!("naive_qstarq needs odd period ratios, axis {a} has {}", spec.period(a)),
            )),
            None => Ok(()),
        },
        KernelSection::SmoothQstarq { exponent } if *exponent == 0 || exponent % 2 == 1 => {
            Err(CliError::config("kernel.exponent", "must be a positive even integer"))
        }
        KernelSection::Random { support_radius, .. } if *support_radius > max_fine_radius(spec) => Err(CliError::config(
            "kernel.support_radius",
            format!(
                "radius {support_radius} does not fit the torus (at most {})",
                max_fine_radius(spec)
            ),
        )),
        _ => Ok(()),
    }
}
