//! Experiment configuration files and CSV artifacts.
//!
//! Configs are TOML. Any string of the form `0x1.8p-1` (optionally signed)
//! is read as a hexadecimal float wherever a number is expected.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::Value;

use crate::closure::{ClosureRow, PerturbationReport};
use crate::error::{Error, Result};
use crate::geometry::BoxDomain;
use crate::landscape::{lp_loss, LossMeta, LossSpec, Target, TrainConfig, Trajectory};
use crate::quadrature::{Density, Measure};
use crate::response::{EffectiveTuple, GeneralizedResponse, NetworkConfig};

/// Default output directory when neither flag nor config name one.
pub const OUT_DIR_ENV: &str = "RELU_LAB_OUT_DIR";
const FALLBACK_OUT_DIR: &str = "relu-lab-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default = "uniform")]
    pub density: Density,
}

fn uniform() -> Density {
    Density::Uniform
}

impl MeasureConfig {
    pub fn cube(d_in: usize) -> Self {
        Self { lower: vec![-1.0; d_in], upper: vec![1.0; d_in], density: Density::Uniform }
    }

    pub fn build(&self) -> Result<Measure> {
        Measure::new(BoxDomain::new(self.lower.clone(), self.upper.clone())?, self.density.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    /// `|y − f(x)|^p`, `p > 1`.
    #[default]
    Lp,
    /// `|y − f(x)|`: convex but not strictly.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    #[serde(default)]
    pub kind: LossKind,
    #[serde(default)]
    pub p: Option<f64>,
}

/// A response given as raw weights, an effective tuple, or a generalized
/// response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ResponseSpec {
    Network(NetworkConfig),
    Tuple(EffectiveTuple),
    Generalized(GeneralizedResponse),
}

impl ResponseSpec {
    pub fn d_in(&self) -> usize {
        match self {
            ResponseSpec::Network(n) => n.d_in,
            ResponseSpec::Tuple(t) => t.d_in,
            ResponseSpec::Generalized(g) => g.d_in(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            ResponseSpec::Network(n) => n.eval(x),
            ResponseSpec::Tuple(t) => t.eval(x),
            ResponseSpec::Generalized(g) => g.eval(x),
        }
    }

    /// The response as a generalized response, merging shared breaklines.
    pub fn to_generalized(&self) -> Result<GeneralizedResponse> {
        match self {
            ResponseSpec::Network(n) => n.to_effective().to_generalized_merged(),
            ResponseSpec::Tuple(t) => t.to_generalized_merged(),
            ResponseSpec::Generalized(g) => Ok(g.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub d: usize,
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub kappa_grid: Vec<f64>,
    #[serde(default = "default_surface_points")]
    pub surface_points: usize,
}

fn default_surface_points() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureConfig {
    /// Normal of the jump hyperplane; `e₁` when omitted.
    #[serde(default)]
    pub normal: Option<Vec<f64>>,
    #[serde(default)]
    pub offset: f64,
    #[serde(default = "default_jump")]
    pub jump: f64,
    #[serde(default = "default_ts")]
    pub ts: Vec<f64>,
}

fn default_jump() -> f64 {
    1.0
}

fn default_ts() -> Vec<f64> {
    vec![10.0, 30.0, 100.0, 300.0, 1000.0]
}

impl Default for ClosureConfig {
    fn default() -> Self {
        Self { normal: None, offset: 0.0, jump: default_jump(), ts: default_ts() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// One experiment. Each command reads the sections it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub measure: Option<MeasureConfig>,
    pub target: Option<Target>,
    pub loss: Option<LossConfig>,
    pub train: Option<TrainConfig>,
    pub oracle: Option<OracleConfig>,
    pub perturbation: Option<PerturbationConfig>,
    pub closure: Option<ClosureConfig>,
    pub eval: Option<EvalConfig>,
    pub response: Option<ResponseSpec>,
    /// Separate file holding a `[network]`, `[tuple]` or `[generalized]`
    /// table, relative to the config file.
    pub response_file: Option<PathBuf>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn missing(section: &str) -> Error {
    Error::Config(format!("missing [{section}] section"))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        if let Some(rel) = cfg.response_file.take() {
            let full = path.parent().unwrap_or(Path::new(".")).join(rel);
            if cfg.response.is_some() {
                return Err(Error::Config("give either [response] or response_file, not both".into()));
            }
            cfg.response = Some(parse_toml(&fs::read_to_string(&full)?)?);
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_toml(text)
    }

    pub fn measure(&self) -> Result<Measure> {
        self.measure.as_ref().ok_or_else(|| missing("measure"))?.build()
    }

    pub fn target(&self) -> Result<&Target> {
        self.target.as_ref().ok_or_else(|| missing("target"))
    }

    pub fn loss(&self) -> Result<LossSpec> {
        let lc = self.loss.ok_or_else(|| missing("loss"))?;
        let target = self.target()?.clone();
        match lc.kind {
            LossKind::Lp => {
                let p = lc.p.ok_or_else(|| Error::Config("[loss] needs p".into()))?;
                lp_loss(target, p)
            }
            LossKind::Absolute => {
                let f = target.clone();
                let meta = LossMeta { convex_in_y: true, strictly_convex: false, attains_min: true, p: None };
                Ok(LossSpec::custom("absolute", move |x, y| (y - f.eval(x)).abs())
                    .with_meta(meta)
                    .with_target(target))
            }
        }
    }

    pub fn train(&self) -> Result<&TrainConfig> {
        self.train.as_ref().ok_or_else(|| missing("train"))
    }

    pub fn oracle(&self) -> Result<&OracleConfig> {
        self.oracle.as_ref().ok_or_else(|| missing("oracle"))
    }

    pub fn perturbation(&self) -> Result<&PerturbationConfig> {
        self.perturbation.as_ref().ok_or_else(|| missing("perturbation"))
    }

    pub fn response(&self) -> Result<&ResponseSpec> {
        self.response.as_ref().ok_or_else(|| missing("response"))
    }

    pub fn eval_points(&self) -> Result<&[Vec<f64>]> {
        Ok(&self.eval.as_ref().ok_or_else(|| missing("eval"))?.points)
    }

    /// `flag`, then the config, then the environment, then a fixed default.
    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output.dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUT_DIR))
    }
}

fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let mut value: Value = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    decode_hex_floats(&mut value);
    value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

fn decode_hex_floats(v: &mut Value) {
    match v {
        Value::String(s) => {
            if let Some(x) = parse_hex_float(s) {
                *v = Value::Float(x);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(decode_hex_floats),
        Value::Table(t) => t.iter_mut().for_each(|(_, v)| decode_hex_floats(v)),
        _ => {}
    }
}

fn parse_hex_float(s: &str) -> Option<f64> {
    let t = s.trim();
    let body = t.strip_prefix(['-', '+']).unwrap_or(t);
    if !(body.starts_with("0x") || body.starts_with("0X")) || !body.contains(['p', 'P']) {
        return None;
    }
    hexf_parse::parse_hexf64(t, false).ok()
}

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["step", "err", "param_norm", "grad_norm"])?;
    for r in &traj.records {
        w.write_record([r.step.to_string(), fmt_f64(r.err), fmt_f64(r.param_norm), fmt_f64(r.grad_norm)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_perturbation_csv(path: &Path, rep: &PerturbationReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["kappa", "err_R", "err_plus", "err_minus", "scaled_sum"])?;
    for i in 0..rep.kappa_grid.len() {
        w.write_record([
            fmt_f64(rep.kappa_grid[i]),
            fmt_f64(rep.err_r),
            fmt_f64(rep.err_plus[i]),
            fmt_f64(rep.err_minus[i]),
            fmt_f64(rep.scaled_sum[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_perturbation_summary(path: &Path, rep: &PerturbationReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["decrement", "improving_kappa", "kappa_min"])?;
    w.write_record([
        fmt_f64(rep.decrement),
        rep.improving_kappa.map(fmt_f64).unwrap_or_default(),
        fmt_f64(rep.kappa_min),
    ])?;
    w.flush()?;
    Ok(())
}

pub fn write_closure_csv(path: &Path, rows: &[ClosureRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "err", "param_norm"])?;
    for r in rows {
        w.write_record([fmt_f64(r.t), fmt_f64(r.err), fmt_f64(r.param_norm)])?;
    }
    w.flush()?;
    Ok(())
}

/// `[tuple]` table readable back through `response_file`.
pub fn write_tuple(path: &Path, t: &EffectiveTuple) -> Result<()> {
    let spec = ResponseSpec::Tuple(t.clone());
    let text = toml::to_string(&spec).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::File::create(path)?.write_all(text.as_bytes())?;
    Ok(())
}
