use proptest::prelude::*;

use relu_lab::closure::{find_dependence, make_splits};
use relu_lab::config::{write_tuple, ExperimentConfig, ResponseSpec};
use relu_lab::geometry::{BoxDomain, HalfSpace, UnitVector};
use relu_lab::landscape::{loss_audit, lp_loss, Target};
use relu_lab::quadrature::Measure;
use relu_lab::response::{CaseTag, EffectiveTuple, GeneralizedResponse, NetworkConfig, Summand};

fn weight() -> impl Strategy<Value = f64> {
    -5.0..5.0f64
}

fn network(d_in: usize, d: usize) -> impl Strategy<Value = NetworkConfig> {
    (
        prop::collection::vec(prop::collection::vec(weight(), d_in), d),
        prop::collection::vec(weight(), d),
        prop::collection::vec(weight(), d),
        weight(),
    )
        .prop_map(move |(w1, b1, w2, b2)| NetworkConfig::new(d_in, w1, b1, w2, b2).unwrap())
}

fn any_network() -> impl Strategy<Value = NetworkConfig> {
    (1usize..=3, 0usize..=5).prop_flat_map(|(d_in, d)| network(d_in, d))
}

fn point(d_in: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, d_in)
}

/// Two jumps with opposing normals along `e₁` plus one free summand.
fn opposing_jumps() -> impl Strategy<Value = GeneralizedResponse> {
    (
        -0.8..0.8f64,
        -0.8..0.8f64,
        prop::collection::vec(-1.0..1.0f64, 2),
        prop::collection::vec(-1.0..1.0f64, 2),
        0.2..2.0f64,
        -2.0..-0.2f64,
        -1.0..1.0f64,
    )
        .prop_map(|(o1, o2, d1, d2, j1, j2, c)| {
            // Jumps stay away from zero along the breaklines inside the box.
            let d1 = vec![0.0, d1[1] * 0.05];
            let d2 = vec![0.0, d2[1] * 0.05];
            GeneralizedResponse {
                affine_linear: vec![0.0, 0.0],
                affine_const: c,
                summands: vec![
                    Summand {
                        halfspace: HalfSpace::new(UnitVector::axis(2, 0), o1),
                        delta: d1,
                        jump: j1,
                        multiplicity: 2,
                    },
                    Summand {
                        halfspace: HalfSpace::new(UnitVector::axis(2, 0).neg(), o2),
                        delta: d2,
                        jump: j2,
                        multiplicity: 2,
                    },
                ],
                m0: 0,
                case_tag: CaseTag::B,
            }
        })
}

fn off_boundaries(r: &GeneralizedResponse, x: &[f64]) -> bool {
    r.summands.iter().all(|s| s.halfspace.signed_distance(x).abs() > 1e-6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn positive_rescaling_leaves_the_tuple_unchanged(net in any_network(), c in 0.1..10.0f64) {
        let mut scaled = net.clone();
        for j in 0..scaled.neurons() {
            scaled.w1[j].iter_mut().for_each(|w| *w *= c);
            scaled.b1[j] *= c;
            scaled.w2[j] /= c;
        }
        let (a, b) = (net.to_effective(), scaled.to_effective());
        prop_assert!((a.bias - b.bias).abs() < 1e-9);
        for j in 0..a.neurons() {
            prop_assert!((a.kinks[j] - b.kinks[j]).abs() < 1e-9 * (1.0 + a.kinks[j].abs()));
            prop_assert!((a.offsets[j] - b.offsets[j]).abs() < 1e-9 * (1.0 + a.offsets[j].abs()));
        }
    }

    #[test]
    fn tuple_to_network_round_trip(net in any_network(), xs in prop::collection::vec(point(3), 8)) {
        let back = net.to_effective().to_network();
        for x in &xs {
            let x = &x[..net.d_in];
            prop_assert!((net.eval(x).unwrap() - back.eval(x).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn flat_parameters_round_trip(net in any_network()) {
        let theta = net.to_flat();
        prop_assert_eq!(theta.len(), NetworkConfig::param_count_for(net.neurons(), net.d_in));
        prop_assert_eq!(NetworkConfig::from_flat(&theta, net.neurons(), net.d_in).unwrap(), net);
    }

    #[test]
    fn switching_sides_twice_is_identity(r in opposing_jumps(), j in 0usize..2, x in point(2)) {
        let once = r.switch_sides(j).unwrap();
        let twice = once.switch_sides(j).unwrap();
        prop_assume!(off_boundaries(&r, &x));
        prop_assert!((once.eval(&x).unwrap() - r.eval(&x).unwrap()).abs() < 1e-12);
        prop_assert!((twice.eval(&x).unwrap() - r.eval(&x).unwrap()).abs() < 1e-12);
        prop_assert_eq!(&twice.summands[j], &r.summands[j]);
    }

    #[test]
    fn splits_reconstruct_the_response(r in opposing_jumps(), xs in prop::collection::vec(point(2), 16)) {
        let dep = find_dependence(&r).expect("opposing normals are dependent");
        let rs = &dep.response;
        let splits = make_splits(rs, &dep.vector).unwrap();
        for x in xs.iter().filter(|x| off_boundaries(rs, x)) {
            prop_assert!((splits.reconstruct(rs, x) - rs.eval(x).unwrap()).abs() < 1e-10);
            prop_assert!((rs.eval(x).unwrap() - r.eval(x).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn dependence_vector_annihilates_normals(r in opposing_jumps()) {
        let dep = find_dependence(&r).unwrap();
        let v = &dep.vector;
        prop_assert!(v.alphas.iter().all(|a| *a > 0.0));
        let mut sum = [0.0f64; 2];
        for (&j, &a) in v.support.iter().zip(&v.alphas) {
            let n = &dep.response.summands[j].halfspace.normal;
            sum[0] += a * n[0];
            sum[1] += a * n[1];
        }
        prop_assert!(sum[0].abs() < 1e-10 && sum[1].abs() < 1e-10);
    }

    #[test]
    fn opposite_halfspace_is_complement(
        n in prop::collection::vec(-1.0..1.0f64, 2),
        o in -1.0..1.0f64,
        x in point(2),
    ) {
        let Some(u) = UnitVector::normalize(n) else { return Ok(()) };
        let h = HalfSpace::new(u, o);
        prop_assume!(h.signed_distance(&x).abs() > 1e-12);
        prop_assert_ne!(h.contains(&x), h.opposite().contains(&x));
        prop_assert_eq!(h.opposite().opposite(), h);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lp_losses_pass_the_audit(p in 1.2..6.0f64) {
        let m = Measure::uniform(BoxDomain::cube(1, 1.0));
        let report = loss_audit(&lp_loss(Target::Abs, p).unwrap(), &m, 8);
        prop_assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn written_tuples_read_back_exactly(
        kinks in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 1..4),
        offset in prop::num::f64::NORMAL,
        bias in prop::num::f64::NORMAL,
    ) {
        let d = kinks.len();
        let t = EffectiveTuple::new(
            2,
            (0..d).map(|j| UnitVector::normalize(vec![1.0, j as f64 / 3.0]).unwrap()).collect(),
            vec![offset; d],
            kinks,
            bias,
        )
        .unwrap();
        let dir = tempfile::TempDir::new().unwrap();
        write_tuple(&dir.path().join("tuple.toml"), &t).unwrap();
        std::fs::write(dir.path().join("run.toml"), "response_file = \"tuple.toml\"\n").unwrap();
        let cfg = ExperimentConfig::load(&dir.path().join("run.toml")).unwrap();
        prop_assert_eq!(cfg.response().unwrap(), &ResponseSpec::Tuple(t));
    }
}
