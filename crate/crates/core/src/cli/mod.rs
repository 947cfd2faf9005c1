//! The `relu-lab` command line: one subcommand per experiment, driven by a
//! TOML config. Exit codes are 0 on success, 1 when the experiment reports
//! a violation or fails, and 2 for usage or config errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::closure::{closure_sweep, fit_rate_constant, verify_improvement_with};
use crate::config::{
    fmt_f64, write_closure_csv, write_perturbation_csv, write_perturbation_summary, write_trajectory_csv,
    write_tuple, ClosureConfig, ExperimentConfig, MeasureConfig, ResponseSpec,
};
use crate::error::{Error, Result};
use crate::geometry::{HalfSpace, UnitVector};
use crate::landscape::{
    divergence_report, golden_section, loss_audit, lp_loss, oracle_search, target_mean, train, LossSpec,
    Target, MIN_TRAJECTORY,
};
use crate::quadrature::{density_positive_on, error_functional, Measure, SurfaceRule, VolumeRule};
use crate::response::{EffectiveTuple, GeneralizedResponse, Summand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const AUDIT_SAMPLES: usize = 32;
const DENSITY_SAMPLES: usize = 256;

#[derive(Debug, Parser)]
#[command(name = "relu-lab", version, about = "Shallow ReLU response experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a config, its response and its loss.
    Validate(Overrides),
    /// Gradient descent on a network.
    Train(Overrides),
    /// Reference minimum by coordinate search.
    Oracle(Overrides),
    /// Strict-improvement check for a discontinuous response.
    Perturb(Overrides),
    /// Hinge pairs converging to a jump.
    ClosureDemo(Overrides),
    /// Evaluate a response at listed points.
    Eval(Overrides),
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub config: PathBuf,
    /// Replaces the seed of the train and oracle sections.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn new(config: impl Into<PathBuf>) -> Self {
        Self { config: config.into(), ..Self::default() }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Validate(o) => cmd_validate(&o),
        Command::Train(o) => cmd_train(&o),
        Command::Oracle(o) => cmd_oracle(&o),
        Command::Perturb(o) => cmd_perturb(&o),
        Command::ClosureDemo(o) => cmd_closure_demo(&o),
        Command::Eval(o) => cmd_eval(&o),
    }
}

/// Config problems are usage errors; anything later is an experiment failure.
fn exit_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::BadExponent(_) => EXIT_USAGE,
        _ => EXIT_VIOLATION,
    }
}

fn report(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_for(e)
}

fn load(o: &Overrides) -> Result<ExperimentConfig> {
    ExperimentConfig::load(&o.config)
}

/// Runs a command body; config-stage errors map to exit 2.
fn guarded(o: &Overrides, body: impl FnOnce(&ExperimentConfig, &Path) -> Result<i32>) -> i32 {
    let cfg = match load(o) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let out = cfg.out_dir(o.out_dir.as_deref());
    match body(&cfg, &out) {
        Ok(code) => code,
        Err(e) => report(&e),
    }
}

fn print_audit(loss: &LossSpec, m: &Measure) -> bool {
    let audit = loss_audit(loss, m, AUDIT_SAMPLES);
    for v in &audit.violations {
        println!("loss audit: {v}");
    }
    if audit.is_clean() {
        println!("loss audit: clean ({} points)", audit.points_checked);
    }
    audit.is_clean()
}

pub fn cmd_validate(o: &Overrides) -> i32 {
    guarded(o, |cfg, _| {
        let mut clean = true;
        if let Some(spec) = &cfg.response {
            let problems: Vec<String> = match spec {
                ResponseSpec::Generalized(g) => g.validate().iter().map(ToString::to_string).collect(),
                ResponseSpec::Network(n) => n.check().err().map(|e| e.to_string()).into_iter().collect(),
                ResponseSpec::Tuple(t) => t.check().err().map(|e| e.to_string()).into_iter().collect(),
            };
            for p in &problems {
                println!("response violation: {p}");
            }
            if problems.is_empty() {
                println!("response: ok (d_in = {})", spec.d_in());
            }
            clean &= problems.is_empty();
        }
        if cfg.measure.is_some() {
            let m = cfg.measure()?;
            if let Some(spec) = &cfg.response {
                if spec.d_in() != m.dim() {
                    println!("response violation: d_in {} does not match the measure dimension {}", spec.d_in(), m.dim());
                    clean = false;
                }
            }
            if let Some(spec) = cfg.response.as_ref().filter(|s| s.d_in() == m.dim()) {
                print_density_check(spec, &m)?;
            }
            if cfg.target.is_some() && cfg.loss.is_some() {
                clean &= print_audit(&cfg.loss()?, &m);
            }
        }
        if let Some(t) = &cfg.train {
            if let Err(e) = t.check() {
                println!("train violation: {e}");
                clean = false;
            }
        }
        Ok(if clean { EXIT_OK } else { EXIT_VIOLATION })
    })
}

/// Partial nice-measure check: the density should be positive somewhere on
/// each breakline. Informational only.
fn print_density_check(spec: &ResponseSpec, m: &Measure) -> Result<()> {
    for (k, h) in spec.to_generalized()?.halfspaces().iter().enumerate() {
        match density_positive_on(h, m, DENSITY_SAMPLES, k as u64) {
            Ok(true) => {}
            Ok(false) => println!("measure: density vanishes on sampled points of boundary {k}"),
            Err(Error::NoIntersection) => println!("measure: boundary {k} misses the box"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// `(c*, err(c*))` for the best constant predictor.
fn best_constant(loss: &LossSpec, m: &Measure) -> Result<(f64, f64)> {
    let rule = VolumeRule::for_piecewise(m.dim());
    let err = |c: f64| error_functional(&EffectiveTuple::constant(m.dim(), c), loss, m, rule);
    let mean = target_mean(loss, m)?;
    let c = if loss.meta.p == Some(2.0) {
        mean
    } else {
        let half = 10.0 * (1.0 + mean.abs());
        golden_section(|c| err(c).unwrap_or(f64::INFINITY), mean - half, mean + half, 200)
    };
    Ok((c, err(c)?))
}

pub fn cmd_train(o: &Overrides) -> i32 {
    guarded(o, |cfg, out| {
        let mut tc = cfg.train()?.clone();
        if let Some(seed) = o.seed {
            tc.init.seed = seed;
        }
        let m = cfg.measure()?;
        let loss = cfg.loss()?;
        tc.check()?;
        if !print_audit(&loss, &m) {
            return Ok(EXIT_VIOLATION);
        }
        let (best, traj) = match train(&tc, &loss, &m) {
            Ok(r) => r,
            Err(Error::NonFiniteLoss { step, trajectory }) => {
                write_trajectory_csv(&out.join("trajectory.csv"), &trajectory)?;
                eprintln!("error: training loss became non-finite at step {step}");
                return Ok(EXIT_VIOLATION);
            }
            Err(e) => return Err(e),
        };
        write_trajectory_csv(&out.join("trajectory.csv"), &traj)?;
        write_tuple(&out.join("best_tuple.toml"), &best)?;
        let last = traj.last().expect("at least one step");
        println!("best err: {} (step {})", fmt_f64(traj.best_err), traj.best_step);
        println!("final err: {}", fmt_f64(last.err));
        println!("final param norm: {}", fmt_f64(last.param_norm));
        println!("final grad norm: {}", fmt_f64(last.grad_norm));
        if tc.d == 0 {
            let (c, e) = best_constant(&loss, &m)?;
            println!(
                "closed-form best constant: c = {}, err = {}; optimizer err = {}, |diff| = {:.3e}",
                fmt_f64(c),
                fmt_f64(e),
                fmt_f64(traj.best_err),
                (traj.best_err - e).abs()
            );
        }
        match divergence_report(&traj) {
            Ok(v) => println!("verdict: {v}"),
            Err(_) => println!("verdict: none (needs at least {MIN_TRAJECTORY} steps)"),
        }
        println!("wrote {}", out.display());
        Ok(EXIT_OK)
    })
}

pub fn cmd_oracle(o: &Overrides) -> i32 {
    guarded(o, |cfg, out| {
        let oc = cfg.oracle()?;
        let m = cfg.measure()?;
        let loss = cfg.loss()?;
        let seed = o.seed.unwrap_or(oc.seed);
        let r = oracle_search(oc.d, &loss, &m, oc.budget, seed)?;
        let path = out.join("oracle.csv");
        fs::create_dir_all(out)?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["d", "err"])?;
        for (d, e) in r.level_errs.iter().enumerate() {
            w.write_record([d.to_string(), fmt_f64(*e)])?;
            println!("d = {d}: err = {}", fmt_f64(*e));
        }
        w.flush()?;
        write_tuple(&out.join("oracle_tuple.toml"), &r.tuple)?;
        println!("evaluations: {}", r.evaluations);
        Ok(EXIT_OK)
    })
}

pub fn cmd_perturb(o: &Overrides) -> i32 {
    guarded(o, |cfg, out| {
        let pc = cfg.perturbation()?;
        let m = cfg.measure()?;
        let loss = cfg.loss()?;
        let r = cfg.response()?.to_generalized()?;
        let audit = loss_audit(&loss, &m, AUDIT_SAMPLES);
        if !audit.strictly_convex() {
            for v in &audit.violations {
                println!("loss audit: {v}");
            }
            println!("perturbation needs a strictly convex loss");
            return Ok(EXIT_VIOLATION);
        }
        let rep = verify_improvement_with(&r, &loss, &m, &pc.kappa_grid, SurfaceRule { points: pc.surface_points })?;
        write_perturbation_csv(&out.join("perturbation.csv"), &rep)?;
        write_perturbation_summary(&out.join("perturbation_summary.csv"), &rep)?;
        println!("err(R): {}", fmt_f64(rep.err_r));
        println!("limit decrement: {}", fmt_f64(rep.decrement));
        for (k, s) in rep.kappa_grid.iter().zip(&rep.scaled_sum) {
            println!("kappa = {k}: scaled sum = {}", fmt_f64(*s));
        }
        match rep.improving_kappa {
            Some(k) => println!("improving kappa: {k}"),
            None => println!("improving kappa: none"),
        }
        let ok = !(rep.decrement < 0.0) || rep.improving_kappa.is_some();
        Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
    })
}

/// The jump `jump·1_A` as a generalized response.
fn step_response(h: &HalfSpace, jump: f64) -> GeneralizedResponse {
    GeneralizedResponse::constant(h.dim(), 0.0).with_summands(vec![Summand {
        halfspace: h.clone(),
        delta: vec![0.0; h.dim()],
        jump,
        multiplicity: 2,
    }])
}

pub fn cmd_closure_demo(o: &Overrides) -> i32 {
    guarded(o, |cfg, out| {
        let cc = cfg.closure.clone().unwrap_or_default();
        let ClosureConfig { normal, offset, jump, ts } = cc;
        let d_in = normal
            .as_ref()
            .map(Vec::len)
            .or(cfg.measure.as_ref().map(|m| m.lower.len()))
            .unwrap_or(1);
        let normal = normal.unwrap_or_else(|| UnitVector::axis(d_in, 0).to_vec());
        let normal = UnitVector::normalize(normal)
            .ok_or_else(|| Error::Config("closure normal must be nonzero".into()))?;
        let h = HalfSpace::new(normal, offset);
        let m = cfg.measure.clone().unwrap_or_else(|| MeasureConfig::cube(d_in)).build()?;
        let limit = step_response(&h, jump);
        let target = cfg.target.clone().unwrap_or(Target::Response { response: limit.clone() });
        let loss = lp_loss(target, cfg.loss.and_then(|l| l.p).unwrap_or(2.0))?;
        let rows = closure_sweep(&h, jump, &ts, &loss, &m)?;
        let err_limit = error_functional(&limit, &loss, &m, VolumeRule::for_piecewise(m.dim()))?;
        write_closure_csv(&out.join("closure.csv"), &rows)?;
        for r in &rows {
            println!("t = {}: err = {}, param norm = {}", r.t, fmt_f64(r.err), fmt_f64(r.param_norm));
        }
        println!("limit err: {}", fmt_f64(err_limit));
        println!("fitted C in |err - limit| <= C/t: {}", fmt_f64(fit_rate_constant(&rows, err_limit)));
        Ok(EXIT_OK)
    })
}

pub fn cmd_eval(o: &Overrides) -> i32 {
    guarded(o, |cfg, out| {
        let spec = cfg.response()?;
        let points = cfg.eval_points()?;
        let d = spec.d_in();
        fs::create_dir_all(out)?;
        let mut w = csv::Writer::from_path(out.join("eval.csv"))?;
        let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        println!("{}", header.join(","));
        for x in points {
            let v = spec.eval(x)?;
            let mut row: Vec<String> = x.iter().map(|c| fmt_f64(*c)).collect();
            row.push(fmt_f64(v));
            println!("{}", row.join(","));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(EXIT_OK)
    })
}
