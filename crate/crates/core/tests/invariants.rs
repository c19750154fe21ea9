use invmetric::certificates::{lemkob_bounds, Regime, TANGENTIAL_THRESHOLD, TWO_SIDED_THRESHOLD, UPPER_THRESHOLD};
use invmetric::disks::{certify_containment, make_linear_disk};
use invmetric::domains::{Margin, ModelDomain};
use invmetric::geometry::ComplexVector;
use invmetric::harness::{fit_power_law, rows_from_csv, rows_to_csv, ScanRow};
use invmetric::ktilde::{khat_gauge, IndicatrixSample, SampleConfig};
use invmetric::metrics::{default_family, kob_upper, KobConfig, MetricKind};
use invmetric::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn complex() -> impl Strategy<Value = Complex64> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

fn vector(n: usize) -> impl Strategy<Value = ComplexVector> {
    prop::collection::vec(complex(), n).prop_map(ComplexVector::new)
}

fn small_vector(n: usize, bound: f64) -> impl Strategy<Value = ComplexVector> {
    prop::collection::vec((-bound..bound, -bound..bound), n)
        .prop_map(|v| ComplexVector::new(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()))
}

#[test]
fn parses_complex_literals() {
    let v: ComplexVector = "-1e-3, 0.5+0.2i, 3i".parse().unwrap();
    assert_eq!(v.dim(), 3);
    assert_eq!(v[0], Complex64::new(-1e-3, 0.0));
    assert_eq!(v[1], Complex64::new(0.5, 0.2));
    assert_eq!(v[2], Complex64::new(0.0, 3.0));
    assert!("1, banana".parse::<ComplexVector>().is_err());
}

proptest! {
    #[test]
    fn display_parse_round_trip(v in vector(3)) {
        let back: ComplexVector = v.to_string().parse().unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn norm_is_nonnegative_and_zero_only_at_zero(v in vector(4)) {
        prop_assert!(v.norm() >= 0.0);
        prop_assert_eq!(v.norm() == 0.0, v.is_zero());
    }

    #[test]
    fn chain_order_is_a_partial_order(a in 0..6usize, b in 0..6usize, c in 0..6usize) {
        let (a, b, c) = (MetricKind::ALL[a], MetricKind::ALL[b], MetricKind::ALL[c]);
        prop_assert!(a.below_or_equal(a));
        if a.below_or_equal(b) && b.below_or_equal(a) {
            prop_assert_eq!(a, b);
        }
        if a.below_or_equal(b) && b.below_or_equal(c) {
            prop_assert!(a.below_or_equal(c));
        }
    }

    #[test]
    fn regime_depends_only_on_c(delta in 1e-6..1e-1f64, c in 0.0..20.0f64, scale in 0.1..10.0f64, phase in 0.0..6.3f64) {
        let beta = Complex64::from_polar(scale, phase);
        let alpha = Complex64::from_polar(c * delta.sqrt() * scale, -phase);
        let r = lemkob_bounds(delta, alpha, beta).unwrap();
        let expected = if r.c < UPPER_THRESHOLD {
            Regime::Tangential
        } else if r.c < TANGENTIAL_THRESHOLD {
            Regime::UpperOnly
        } else if r.c <= TWO_SIDED_THRESHOLD {
            Regime::Intermediate
        } else {
            Regime::TwoSided
        };
        prop_assert!((r.c - c).abs() <= 1e-9 * (1.0 + c));
        prop_assert_eq!(r.regime, expected);
        prop_assert!(0.0 <= r.lower && r.lower <= r.upper * (1.0 + 1e-12) || r.asymptotic_only);
    }

    #[test]
    fn csv_round_trip(delta in 1e-6..1.0f64, x in vector(2), lower in 0.0..1e3f64, width in 0.0..1e3f64, kind in 0..6usize) {
        let row = ScanRow {
            delta,
            x,
            kind: MetricKind::ALL[kind],
            lower,
            upper: lower + width,
            method: "a/b".into(),
            margin: (width > 10.0).then_some(width),
            wallclock_ms: 0,
        };
        let rows = vec![row];
        prop_assert_eq!(rows_from_csv(&rows_to_csv(&rows).unwrap()).unwrap(), rows);
    }

    #[test]
    fn fit_quality_is_a_fraction(ys in prop::collection::vec(1e-3..1e3f64, 4..12)) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, y)| (10f64.powi(-(i as i32) - 1), *y)).collect();
        let f = fit_power_law(&pts).unwrap();
        prop_assert!((0.0..=1.0).contains(&f.r_squared));
        prop_assert!(f.slope.is_finite());
    }

    #[test]
    fn reparametrisation_keeps_the_image(x in small_vector(2, 1.0), mu in complex(), t in small_vector(1, 0.7)) {
        prop_assume!(mu.norm() > 0.1);
        let p = ComplexVector::from_re(&[0.1, -0.2]);
        let d = make_linear_disk(&p, &x).unwrap();
        prop_assert_eq!(d.eval(Complex64::new(0.0, 0.0)).unwrap(), p);
        let e = d.reparametrize(mu).unwrap();
        let a = d.eval(t[0]).unwrap();
        let b = e.eval(t[0] * mu).unwrap();
        prop_assert!(a.distance(&b) < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn gauge_is_homogeneous(x in small_vector(2, 2.0), s in 1e-2..1e2f64, j in 0..8u32) {
        prop_assume!(x.norm() > 1e-3);
        // the sample is closed under the eighth roots of unity, not the whole circle
        let c = Complex64::from_polar(s, std::f64::consts::TAU * j as f64 / 8.0);
        let mut sample = IndicatrixSample {
            base: ComplexVector::zeros(2),
            domain: ModelDomain::ball(2, 1.0).unwrap(),
            entries: Vec::new(),
            config: SampleConfig::default(),
            uncertified: 0,
        };
        for u in invmetric::ktilde::sample_directions(2, 16) {
            sample.push_orbit(&u, 1.0 + u[0].norm()).unwrap();
        }
        for e in &sample.entries {
            prop_assert!((e.direction.norm() - 1.0).abs() < 1e-10);
        }
        let g = khat_gauge(&sample, &x).unwrap();
        let h = khat_gauge(&sample, &x.scale(c)).unwrap();
        prop_assert!((h - c.norm() * g).abs() <= 1e-8 * (1.0 + h));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificate_validity_matches_slack(p in small_vector(2, 0.4), x in small_vector(2, 1.0)) {
        let domain = ModelDomain::ball(2, 1.0).unwrap();
        let d = make_linear_disk(&p, &x).unwrap();
        let cert = certify_containment(&d, &domain, 16, 64, Margin::default()).unwrap();
        prop_assert_eq!(cert.valid, cert.slack > 0.0);
        // a valid certificate means every sampled point is inside
        if cert.valid {
            for k in 0..64 {
                let t = Complex64::from_polar(1.0, k as f64 * 0.1);
                prop_assert!(domain.value(&d.eval(t).unwrap()) < 0.0);
            }
        }
    }

    #[test]
    fn functionals_are_bounded_by_one(seed in 0..1000u64, which in 0..4usize) {
        let domain = match which {
            0 => ModelDomain::ball(2, 1.5).unwrap(),
            1 => ModelDomain::polydisk(vec![1.0, 0.5]).unwrap(),
            2 => ModelDomain::HalfParab,
            _ => ModelDomain::geps(2.0, 2.0, 2.0, 3).unwrap(),
        };
        let x = ComplexVector::basis(domain.dim(), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for f in default_family(&domain, &x, 4, seed).unwrap() {
            prop_assert!(f.sampled_sup(&domain, 2000, &mut rng).unwrap() <= 1.0 + 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn kob_witness_matches_query(p in small_vector(2, 0.3), x in small_vector(2, 1.0)) {
        prop_assume!(x.norm() > 0.05);
        let domain = ModelDomain::polydisk(vec![1.0, 1.0]).unwrap();
        let cfg = KobConfig { iterations: 100, ..KobConfig::light() };
        let est = kob_upper(&domain, &p, &x, &cfg).unwrap();
        prop_assert!(0.0 <= est.lower && est.lower <= est.upper);
        let w = est.upper_witness.expect("finite upper has a witness");
        prop_assert!(w.certificate.valid);
        let (center, jet) = w.disk.jet_at_zero();
        prop_assert!(center.distance(&p) < 1e-12);
        prop_assert!(jet.distance(&x) < 1e-9 * (1.0 + x.norm()));
        prop_assert!((est.upper * w.disk.radius - 1.0).abs() < 1e-9);
    }
}
