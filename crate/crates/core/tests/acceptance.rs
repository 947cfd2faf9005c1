//! Exit criteria, one line each. Run with `cargo test --test acceptance`.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relu_lab::closure::{
    closure_sweep, find_dependence, make_splits, segment_average_loss, verify_improvement,
};
use relu_lab::config::ExperimentConfig;
use relu_lab::geometry::{hyperplane_patch, BoxDomain, HalfSpace, UnitVector};
use relu_lab::landscape::{
    divergence_report, error_and_gradient, fd_gradient, lp_loss, oracle_min, train, LossSpec, Target,
    Verdict,
};
use relu_lab::quadrature::{
    error_functional, hyperplane_mass, integrate_surface, Density, Measure, SurfaceRule, VolumeRule,
};
use relu_lab::response::{GeneralizedResponse, NetworkConfig, Summand};

type Outcome = Result<String, String>;

fn fixture(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

fn random_network<R: Rng>(rng: &mut R, d_in: usize, d: usize) -> NetworkConfig {
    let mut w1: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d_in).map(|_| rng.random_range(-5.0..=5.0)).collect())
        .collect();
    // Some degenerate neurons.
    for row in w1.iter_mut() {
        if rng.random_bool(0.05) {
            row.iter_mut().for_each(|w| *w = 0.0);
        }
    }
    let b1 = (0..d).map(|_| rng.random_range(-5.0..=5.0)).collect();
    let w2 = (0..d).map(|_| rng.random_range(-5.0..=5.0)).collect();
    NetworkConfig::new(d_in, w1, b1, w2, rng.random_range(-5.0..=5.0)).unwrap()
}

fn representation_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d_in = rng.random_range(1..=3);
        let d = rng.random_range(0..=5);
        let net = random_network(&mut rng, d_in, d);
        let tuple = net.to_effective();
        for _ in 0..100 {
            let x: Vec<f64> = (0..d_in).map(|_| rng.random_range(-3.0..=3.0)).collect();
            let diff = (net.eval(&x).unwrap() - tuple.eval(&x).unwrap()).abs();
            worst = worst.max(diff);
        }
    }
    let elapsed = start.elapsed();
    check(
        worst < 1e-10 && within(elapsed, Duration::from_secs(10)),
        format!("max |network - tuple| = {worst:.3e} over 1000 configs x 100 points in {elapsed:.2?}"),
    )
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn gradient_consistency() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-5;
    let mut worst_x = 0.0f64;
    let mut pairs = 0;
    while pairs < 1000 {
        let d_in = rng.random_range(1..=3);
        let d = rng.random_range(1..=5);
        let tuple = random_network(&mut rng, d_in, d).to_effective();
        let x: Vec<f64> = (0..d_in).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let clear = tuple
            .breaklines()
            .iter()
            .all(|b| b.signed_distance(&x).abs() > 1e-3);
        if !clear {
            continue;
        }
        let g = tuple.gradient(&x).unwrap();
        let fd: Vec<f64> = (0..d_in)
            .map(|i| {
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[i] += h;
                xm[i] -= h;
                (tuple.eval(&xp).unwrap() - tuple.eval(&xm).unwrap()) / (2.0 * h)
            })
            .collect();
        worst_x = worst_x.max(rel_err(&fd, &g));
        pairs += 1;
    }

    let abs_1d = lp_loss(Target::Abs, 2.0).unwrap();
    let ramp_2d = lp_loss(Target::Ramp { a: 0.25 }, 2.0).unwrap();
    let m1 = Measure::uniform(BoxDomain::cube(1, 1.0));
    let m2 = Measure::uniform(BoxDomain::cube(2, 1.0));
    let mut worst_theta = 0.0f64;
    for k in 0..50 {
        let (loss, m, d) = if k % 2 == 0 { (&abs_1d, &m1, 1 + k % 3) } else { (&ramp_2d, &m2, 1 + k % 2) };
        let rule = VolumeRule::for_piecewise(m.dim());
        let n = NetworkConfig::param_count_for(d, m.dim());
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let (_, g) = error_and_gradient(&theta, d, loss, m, rule).unwrap();
        let fd = fd_gradient(&theta, d, loss, m, rule).unwrap();
        worst_theta = worst_theta.max(rel_err(&g, &fd));
    }
    let elapsed = start.elapsed();
    check(
        worst_x < 1e-5 && worst_theta < 1e-4 && within(elapsed, Duration::from_secs(60)),
        format!(
            "response gradient rel err {worst_x:.3e} (1000 pairs), error gradient rel err {worst_theta:.3e} (50 θ) in {elapsed:.2?}"
        ),
    )
}

fn best_constant_baseline() -> Outcome {
    let cfg = fixture("f1_constant.toml");
    let loss = cfg.loss().unwrap();
    let m = cfg.measure().unwrap();
    let exact = 1.0 / 12.0;
    let by_quadrature = error_functional(&|_: &[f64]| 0.5, &loss, &m, VolumeRule::for_piecewise(1)).unwrap();
    // Start from zero so the optimizer has to find the constant.
    let mut tc = cfg.train().unwrap().clone();
    tc.init.zero = true;
    let (_, traj) = train(&tc, &loss, &m).unwrap();
    let by_optimizer = traj.last().unwrap().err;
    let (by_oracle, _) = oracle_min(0, &loss, &m, cfg.oracle().unwrap().budget).unwrap();
    check(
        (by_quadrature - exact).abs() <= 1e-6 && (by_optimizer - exact).abs() <= 1e-4 && (by_oracle - exact).abs() <= 1e-5,
        format!(
            "quadrature {:.3e}, optimizer {:.3e}, oracle {:.3e} off 1/12",
            (by_quadrature - exact).abs(),
            (by_optimizer - exact).abs(),
            (by_oracle - exact).abs()
        ),
    )
}

fn attainment() -> Outcome {
    let cfg = fixture("f1_abs.toml");
    let loss = cfg.loss().unwrap();
    let m = cfg.measure().unwrap();
    let start = Instant::now();
    let (_, traj) = train(cfg.train().unwrap(), &loss, &m).unwrap();
    let elapsed = start.elapsed();
    let last = *traj.last().unwrap();
    let verdict = divergence_report(&traj).unwrap();
    let oc = cfg.oracle().unwrap();
    let (oracle_err, _) = oracle_min(oc.d, &loss, &m, oc.budget).unwrap();
    check(
        last.err <= 1e-3 && verdict == Verdict::Converged && oracle_err <= 1e-5 && within(elapsed, Duration::from_secs(120)),
        format!(
            "train err {:.3e}, grad norm {:.3e}, param norm {:.3}, verdict {verdict}, oracle {:.3e}, train time {elapsed:.2?}",
            last.err, last.grad_norm, last.param_norm, oracle_err
        ),
    )
}

fn closure_phenomenon() -> Outcome {
    let cfg = fixture("closure_step.toml");
    let cc = cfg.closure.clone().unwrap();
    let m = cfg.measure().unwrap();
    let h = HalfSpace::new(UnitVector::axis(1, 0), cc.offset);
    let limit = GeneralizedResponse::constant(1, 0.0).with_summands(vec![Summand {
        halfspace: h.clone(),
        delta: vec![0.0],
        jump: cc.jump,
        multiplicity: 2,
    }]);
    let loss = lp_loss(Target::Response { response: limit.clone() }, 2.0).unwrap();
    let rows = closure_sweep(&h, cc.jump, &cc.ts, &loss, &m).unwrap();
    let err_limit = error_functional(&limit, &loss, &m, VolumeRule::for_piecewise(1)).unwrap();
    let at = |t: f64| rows.iter().find(|r| r.t == t).unwrap();
    let (r10, r1000) = (at(10.0), at(1000.0));
    let growth = r1000.param_norm / r10.param_norm;
    check(
        (r1000.err - err_limit).abs() <= 1e-2 && growth >= 100.0,
        format!(
            "|err(t=1e3) - limit| = {:.3e}, param norm x{growth:.1} from t=10 to t=1e3",
            (r1000.err - err_limit).abs()
        ),
    )
}

fn f4_report() -> (relu_lab::closure::PerturbationReport, Duration) {
    let cfg = fixture("f4_jumps.toml");
    let r = cfg.response().unwrap().to_generalized().unwrap();
    let start = Instant::now();
    let rep = verify_improvement(
        &r,
        &cfg.loss().unwrap(),
        &cfg.measure().unwrap(),
        &cfg.perturbation().unwrap().kappa_grid,
    )
    .unwrap();
    (rep, start.elapsed())
}

fn strict_improvement(rep: &relu_lab::closure::PerturbationReport, elapsed: Duration) -> Outcome {
    check(
        rep.decrement < 0.0 && rep.improving_kappa.is_some() && within(elapsed, Duration::from_secs(120)),
        format!(
            "decrement {:.6e}, first improving κ {:?}, err(R) {:.6e}, in {elapsed:.2?}",
            rep.decrement, rep.improving_kappa, rep.err_r
        ),
    )
}

fn asymptotic_rate(rep: &relu_lab::closure::PerturbationReport) -> Outcome {
    let gap = |kappa: f64| {
        let i = rep.kappa_grid.iter().position(|&k| k == kappa).unwrap();
        (rep.scaled_sum[i] - rep.decrement).abs()
    };
    let (g50, g400) = (gap(50.0), gap(400.0));
    check(
        g400 <= 0.1 * rep.decrement.abs() && g400 < g50,
        format!(
            "gap at κ=400 {g400:.3e} ({:.2}% of |decrement|), at κ=50 {g50:.3e}",
            100.0 * g400 / rep.decrement.abs()
        ),
    )
}

fn convexity_inequality() -> Outcome {
    let mut cases: Vec<(GeneralizedResponse, LossSpec, Measure)> = Vec::new();
    for name in ["f4_jumps.toml", "f4_constant_target.toml", "f5_triangle.toml"] {
        let cfg = fixture(name);
        cases.push((
            cfg.response().unwrap().to_generalized().unwrap(),
            cfg.loss().unwrap(),
            cfg.measure().unwrap(),
        ));
    }
    let f4 = fixture("f4_jumps.toml");
    cases.push((
        f4.response().unwrap().to_generalized().unwrap(),
        lp_loss(f4.target().unwrap().clone(), 4.0).unwrap(),
        f4.measure().unwrap(),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let per_case = 10_000 / cases.len();
    let (mut checked, mut strict_checked, mut failures) = (0, 0, 0);
    let mut tightest = f64::INFINITY;
    for (r, loss, m) in &cases {
        let dep = find_dependence(r).unwrap();
        let rs = &dep.response;
        let splits = make_splits(rs, &dep.vector).unwrap();
        for _ in 0..per_case {
            let j = dep.vector.support[rng.random_range(0..dep.vector.support.len())];
            let plane = &rs.summands[j].halfspace;
            let chart = hyperplane_patch(plane, &m.domain).unwrap();
            let s: Vec<f64> = (0..chart.param_dim())
                .map(|k| rng.random_range(chart.lower[k]..=chart.upper[k]))
                .collect();
            let x = plane.project(&chart.point(&s));
            let (lbar, lp, lm) = segment_average_loss(loss, rs, &x, j, &splits, 16).unwrap();
            let gap = lp + lm - 2.0 * lbar;
            checked += 1;
            let p = &splits.parts[j];
            if (p.plus(&x) - p.minus(&x)).abs() > 1e-6 {
                strict_checked += 1;
                let need = 1e-10 * (lp + lm);
                tightest = tightest.min(gap / (lp + lm));
                if gap < need {
                    failures += 1;
                }
            } else if gap < 0.0 {
                failures += 1;
            }
        }
    }
    check(
        failures == 0 && checked == 10_000,
        format!(
            "{checked} breakline points ({strict_checked} with distinct endpoints), {failures} failures, min relative gap {tightest:.3e}"
        ),
    )
}

fn measure_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let eps = 1e-3;
    let mut worst = 0.0f64;
    for k in 0..20 {
        let d_in = if k % 2 == 0 { 2 } else { 3 };
        let domain = BoxDomain::cube(d_in, 1.0);
        let density = if k % 4 < 2 {
            Density::Uniform
        } else {
            Density::TruncatedGaussian { center: vec![0.2; d_in], sigma: 0.7 }
        };
        let m = Measure::new(domain.clone(), density).unwrap();
        let normal = loop {
            let v: Vec<f64> = (0..d_in).map(|_| rng.random_range(-1.0..=1.0)).collect();
            if let Some(u) = UnitVector::normalize(v) {
                break u;
            }
        };
        // Through a point well inside the box.
        let p: Vec<f64> = (0..d_in).map(|_| rng.random_range(-0.5..=0.5)).collect();
        let offset = normal.iter().zip(&p).map(|(a, b)| a * b).sum();
        let plane = HalfSpace::new(normal, offset);
        let slab = hyperplane_mass(&plane, &m, &[eps]).unwrap()[0];
        let surface = integrate_surface(&|_: &[f64]| 1.0, &plane, &m, SurfaceRule { points: 32 }).unwrap();
        worst = worst.max((slab / eps / (2.0 * surface) - 1.0).abs());
    }
    check(
        worst <= 0.05,
        format!("max |mass(ε)/ε / (2·surface mass) - 1| = {worst:.3e} over 20 hyperplanes at ε = 1e-3"),
    )
}

fn monotonicity() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for name in ["f1_abs.toml", "quadratic_1d.toml", "ramp_2d.toml"] {
        let cfg = fixture(name);
        let loss = cfg.loss().unwrap();
        let m = cfg.measure().unwrap();
        let budget = cfg.oracle().unwrap().budget;
        let errs: Vec<f64> = (0..=2).map(|d| oracle_min(d, &loss, &m, budget).unwrap().0).collect();
        ok &= errs.windows(2).all(|w| w[1] <= w[0] + 1e-6);
        lines.push(format!("{name} [{:.3e}, {:.3e}, {:.3e}]", errs[0], errs[1], errs[2]));
    }
    check(ok, lines.join("; "))
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |label: &'static str, f: &dyn Fn() -> Outcome| {
        let outcome = f();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} {label}: {detail}");
        results.push((label, outcome));
    };
    run("1 representation equivalence", &representation_equivalence);
    run("2 gradient consistency", &gradient_consistency);
    run("3 best-constant baseline", &best_constant_baseline);
    run("4 attainment on |x| with two neurons", &attainment);
    run("5 closure of a jump", &closure_phenomenon);
    let (rep, elapsed) = f4_report();
    run("6 strict improvement of opposing jumps", &|| strict_improvement(&rep, elapsed));
    run("7 asymptotic rate of the decrement", &|| asymptotic_rate(&rep));
    run("8 convexity inequality on breaklines", &convexity_inequality);
    run("9 slab mass against surface mass", &measure_sanity);
    run("10 oracle monotone in width", &monotonicity);

    let failed: Vec<&str> = results.iter().filter(|(_, o)| o.is_err()).map(|(l, _)| *l).collect();
    println!(
        "\nacceptance: {} passed, {} failed",
        results.len() - failed.len(),
        failed.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
