//! Experiment configuration: parsing, defaults and validation.

use std::path::{Path, PathBuf};

use hawking_core::ambient::{curvature_tensor_from_schouten, normal_coordinate_quadratic};
use hawking_core::expansion::FieldGrid;
use hawking_core::optimizer::OptimizerOptions;
use hawking_core::tensor::Mat3;
use hawking_core::variation::NormalSpeed;
use hawking_core::{AffineK, LagrangianSpec, ManifoldModel};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Eval,
    Minimize,
    Scan,
    Expand,
    Moments,
    Concentrate,
    CheckVariation,
}

impl CommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::Eval => "eval",
            CommandName::Minimize => "minimize",
            CommandName::Scan => "scan",
            CommandName::Expand => "expand",
            CommandName::Moments => "moments",
            CommandName::Concentrate => "concentrate",
            CommandName::CheckVariation => "check-variation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub lagrangian: LagrangianConfig,
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub command: CommandConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricConfig {
    Flat,
    RoundSphere {
        curvature: f64,
    },
    Schwarzschild {
        mass: f64,
    },
    /// Schouten tensor at the origin, components 11, 12, 13, 22, 23, 33.
    PerturbedFlat {
        schouten: [f64; 6],
    },
    ConformallyFlat {
        a2: f64,
        a4: f64,
    },
}

fn zeros18() -> [f64; 18] {
    [0.0; 18]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(flatten)]
    pub metric: MetricConfig,
    pub chart_radius: f64,
    /// `K⁰` components 11, 12, 13, 22, 23, 33.
    #[serde(default)]
    pub k0: [f64; 6],
    /// `∂_k K_ij` for each pair above, `k = 1, 2, 3`.
    #[serde(default = "zeros18")]
    pub k1: [f64; 18],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LagrangianConfig {
    #[default]
    Hawking,
    Zero,
    Family {
        alpha: f64,
        beta: f64,
        c0: f64,
        ct: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceConfig {
    pub l_max: usize,
    /// Quadrature rings; defaults to `2 l_max + 6`.
    pub n_theta: Option<usize>,
    pub center: [f64; 3],
    /// Coordinate radius of the initial sphere; defaults to the radius of the
    /// first target area, or 1.
    pub radius: Option<f64>,
    pub shape_file: Option<PathBuf>,
    pub noise: f64,
    pub noise_band: Option<usize>,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            l_max: 6,
            n_theta: None,
            center: [0.0; 3],
            radius: None,
            shape_file: None,
            noise: 0.0,
            noise_band: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub center: [f64; 3],
    pub half_width: f64,
    pub n: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandConfig {
    pub name: Option<CommandName>,
    pub seed: Option<u64>,
    pub target_area: Option<f64>,
    pub areas: Option<Vec<f64>>,
    pub radii: Option<Vec<f64>>,
    pub point: Option<[f64; 3]>,
    pub use_minimizers: Option<bool>,
    pub draws: Option<usize>,
    pub step: Option<f64>,
    /// Normal speeds such as `"constant 1"`, `"translation 1 0 0"`,
    /// `"translation-over-h 0 0 1"` or `"harmonic 2 1"`.
    pub speeds: Option<Vec<String>>,
    pub tolerance: Option<f64>,
    pub field: Option<FieldConfig>,
    pub optimizer: Option<OptimizerOptions>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Shape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Json, Format::Csv, Format::Shape],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse(&text)
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

fn strictly_decreasing(name: &str, v: &[f64]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(invalid(format!("{name} must not be empty")));
    }
    for x in v {
        positive(name, *x)?;
    }
    if v.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid(format!("{name} must be strictly decreasing")));
    }
    Ok(())
}

/// Fills defaults, applies overrides and checks the blocks the command needs.
/// `base` anchors relative shape-file paths.
pub fn resolve(
    mut cfg: ExperimentConfig,
    command: CommandName,
    overrides: &Overrides,
    base: &Path,
) -> Result<ExperimentConfig, CliError> {
    if let Some(name) = cfg.command.name {
        if name != command {
            return Err(invalid(format!(
                "config is for `{}` but `{}` was requested",
                name.as_str(),
                command.as_str()
            )));
        }
    }
    cfg.command.name = Some(command);
    if let Some(seed) = overrides.seed {
        cfg.command.seed = Some(seed);
    }
    cfg.command.seed.get_or_insert(0);
    if let Some(out) = &overrides.out {
        cfg.output.directory = out.clone();
    }
    if cfg.output.formats.is_empty() {
        return Err(invalid("output.formats must not be empty"));
    }

    let s = &mut cfg.surface;
    if s.l_max > 40 {
        return Err(invalid(format!("surface.l_max = {} exceeds 40", s.l_max)));
    }
    let n_theta = *s.n_theta.get_or_insert(2 * s.l_max + 6);
    if n_theta < s.l_max + 1 {
        return Err(invalid(format!(
            "surface.n_theta = {n_theta} cannot resolve l_max = {}",
            s.l_max
        )));
    }
    if !(s.noise >= 0.0 && s.noise.is_finite()) {
        return Err(invalid("surface.noise must be non-negative"));
    }
    s.noise_band.get_or_insert(s.l_max);
    if let Some(r) = s.radius {
        positive("surface.radius", r)?;
    }
    if let Some(p) = &s.shape_file {
        if p.is_relative() {
            s.shape_file = Some(base.join(p));
        }
    }

    let c = &mut cfg.command;
    if let Some(opt) = &mut c.optimizer {
        opt.n_theta.get_or_insert(n_theta);
    }
    if let Some(t) = c.tolerance {
        positive("command.tolerance", t)?;
    }
    match command {
        CommandName::Eval => {}
        CommandName::Minimize => {
            let a = c
                .target_area
                .ok_or_else(|| invalid("minimize needs command.target_area"))?;
            positive("command.target_area", a)?;
        }
        CommandName::Scan => {
            strictly_decreasing(
                "command.areas",
                c.areas
                    .as_deref()
                    .ok_or_else(|| invalid("scan needs command.areas"))?,
            )?;
        }
        CommandName::Expand => {
            let radii = c
                .radii
                .get_or_insert_with(|| hawking_core::expansion::DEFAULT_RADII.to_vec());
            strictly_decreasing("command.radii", radii)?;
            c.point.get_or_insert([0.0; 3]);
            c.use_minimizers.get_or_insert(false);
        }
        CommandName::Moments => {
            c.point.get_or_insert([0.0; 3]);
            if *c.draws.get_or_insert(20) == 0 {
                return Err(invalid("command.draws must be positive"));
            }
        }
        CommandName::Concentrate => {
            strictly_decreasing(
                "command.areas",
                c.areas
                    .as_deref()
                    .ok_or_else(|| invalid("concentrate needs command.areas"))?,
            )?;
            let f = c
                .field
                .as_ref()
                .ok_or_else(|| invalid("concentrate needs a command.field block"))?;
            positive("command.field.half_width", f.half_width)?;
            if f.n < 3 {
                return Err(invalid("command.field.n must be at least 3"));
            }
        }
        CommandName::CheckVariation => {
            positive("command.step", *c.step.get_or_insert(1e-4))?;
            c.tolerance.get_or_insert(1e-6);
            let speeds = c.speeds.get_or_insert_with(|| {
                vec![
                    "constant 1".into(),
                    "translation 1 0 0".into(),
                    "harmonic 2 1".into(),
                    "harmonic 3 -2".into(),
                ]
            });
            for s in speeds.iter() {
                parse_speed(s)?;
            }
        }
    }
    if matches!(
        command,
        CommandName::Minimize | CommandName::Scan | CommandName::Concentrate | CommandName::Expand
    ) {
        let opt = c.optimizer.get_or_insert_with(|| OptimizerOptions {
            n_theta: Some(n_theta),
            ..Default::default()
        });
        let check = OptimizerOptions {
            target_area: 1.0,
            ..opt.clone()
        };
        check.validate().map_err(|e| invalid(e.to_string()))?;
    }
    build_model(&cfg.model)?;
    Ok(cfg)
}

pub fn build_model(m: &ModelConfig) -> Result<ManifoldModel, CliError> {
    let k = AffineK::from_components(m.k0, m.k1);
    let r = m.chart_radius;
    let model = match &m.metric {
        MetricConfig::Flat => ManifoldModel::flat(r, k),
        MetricConfig::RoundSphere { curvature } => ManifoldModel::round_sphere(*curvature, r, k),
        MetricConfig::Schwarzschild { mass } => ManifoldModel::schwarzschild(*mass, r, k),
        MetricConfig::PerturbedFlat { schouten: s } => {
            let p = Mat3::new(s[0], s[1], s[2], s[1], s[3], s[4], s[2], s[4], s[5]);
            ManifoldModel::perturbed_flat(
                normal_coordinate_quadratic(&curvature_tensor_from_schouten(&p)),
                r,
                k,
            )
        }
        MetricConfig::ConformallyFlat { a2, a4 } => ManifoldModel::conformally_flat(*a2, *a4, r, k),
    };
    model.map_err(|e| invalid(e.to_string()))
}

pub fn lagrangian(l: &LagrangianConfig) -> LagrangianSpec {
    match l {
        LagrangianConfig::Hawking => LagrangianSpec::hawking(),
        LagrangianConfig::Zero => LagrangianSpec::zero(),
        LagrangianConfig::Family {
            alpha,
            beta,
            c0,
            ct,
        } => LagrangianSpec::new(*alpha, *beta, *c0, *ct),
    }
}

pub fn field_grid(f: &FieldConfig) -> FieldGrid {
    FieldGrid {
        center: f.center,
        half_width: f.half_width,
        n: f.n,
    }
}

pub fn parse_speed(s: &str) -> Result<NormalSpeed, CliError> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let bad = || invalid(format!("cannot parse normal speed {s:?}"));
    let nums = |xs: &[&str]| -> Result<Vec<f64>, CliError> {
        xs.iter()
            .map(|x| x.parse::<f64>().map_err(|_| bad()))
            .collect()
    };
    let vec3 = |xs: &[&str]| -> Result<[f64; 3], CliError> {
        let v = nums(xs)?;
        if v.len() != 3 {
            return Err(bad());
        }
        Ok([v[0], v[1], v[2]])
    };
    match parts.split_first() {
        Some((&"constant", rest)) if rest.len() == 1 => Ok(NormalSpeed::Constant(nums(rest)?[0])),
        Some((&"translation", rest)) => Ok(NormalSpeed::Translation(vec3(rest)?)),
        Some((&"translation-over-h", rest)) => {
            Ok(NormalSpeed::TranslationOverMeanCurvature(vec3(rest)?))
        }
        Some((&"harmonic", [l, m])) => {
            let l: usize = l.parse().map_err(|_| bad())?;
            let m: i64 = m.parse().map_err(|_| bad())?;
            if m.unsigned_abs() as usize > l {
                return Err(bad());
            }
            Ok(NormalSpeed::Harmonic(l, m))
        }
        _ => Err(bad()),
    }
}

pub fn to_toml(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}
