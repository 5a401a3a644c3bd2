use std::sync::Arc;

use afreeqc::fields::*;
use afreeqc::integrand::*;
use afreeqc::profiles::poly_bump;
use afreeqc::sequences::dilation_sequence;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(n: usize) -> GridSpec {
    GridSpec::unit_cube(2, n).unwrap()
}

/// `|s|^2 + |s|`, growth 2 with recession `|s|^2`.
#[derive(Debug)]
struct SquarePlusNorm;

impl Integrand for SquarePlusNorm {
    fn name(&self) -> String {
        "square_plus_norm".into()
    }
    fn p(&self) -> f64 {
        2.0
    }
    fn m(&self) -> Option<usize> {
        None
    }
    fn eval(&self, _x: &[f64], s: &[f64]) -> f64 {
        let r = s.iter().map(|v| v * v).sum::<f64>();
        r + r.sqrt()
    }
    fn recession(&self, _x: &[f64], s: &[f64]) -> Option<f64> {
        Some(s.iter().map(|v| v * v).sum())
    }
}

const SCALES: [f64; 5] = [1.0, 10.0, 100.0, 1e3, 1e4];

#[test]
fn recession_examples() {
    let s = [0.6, 0.8];
    let r = recession_estimate(&SquarePlusNorm, &[0.0, 0.0], &s, &SCALES).unwrap();
    assert!(r.converged && (r.estimate - 1.0).abs() < 1e-3);
    assert!(r.differences.windows(2).all(|w| w[1] < w[0]));
    let d = Det2 { layout: MatrixLayout::Full };
    let f = [0.5, -0.5, 0.1, 0.7];
    let r = recession_estimate(&d, &[0.0, 0.0], &f, &SCALES).unwrap();
    assert!(r.values.iter().all(|v| (v - (0.35 + 0.05)).abs() < 1e-12));
    let neg = IntegrandSpec::named("neg_norm_pow").build().unwrap();
    assert!((recession_estimate(neg.as_ref(), &[0.0, 0.0], &s, &SCALES).unwrap().estimate + 1.0).abs() < 1e-14);
}

#[test]
fn recession_matches_analytic_entries() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let entries: Vec<(Arc<dyn Integrand>, usize)> = vec![
        (IntegrandSpec::named("norm_pow").build().unwrap(), 3),
        (IntegrandSpec::named("det2").build().unwrap(), 4),
        (IntegrandSpec::named("det2_sym").build().unwrap(), 3),
        (IntegrandSpec::named("cofactor_normal").build().unwrap(), 9),
    ];
    for (h, m) in entries {
        for _ in 0..10 {
            let s: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            let s: Vec<f64> = s.iter().map(|v| v / r).collect();
            let x = [0.2, -0.3, 0.1];
            let x = &x[..if m == 9 { 3 } else { 2 }];
            let est = recession_estimate(h.as_ref(), x, &s, &SCALES).unwrap();
            let exact = h.recession(x, &s).unwrap();
            assert!((est.estimate - exact).abs() <= 1e-6, "{}", h.name());
        }
    }
}

#[test]
fn catalog_entries_are_homogeneous() {
    for (name, m, n) in [("norm_pow", 2, 2), ("neg_norm_pow", 5, 3), ("det2", 4, 2), ("det2_sym", 3, 2), ("cofactor_normal", 9, 3)] {
        assert!(HomogeneousIntegrand::from_spec(&IntegrandSpec::named(name), m, n).is_ok(), "{name}");
    }
    assert!(HomogeneousIntegrand::new(Arc::new(SquarePlusNorm), 2, 2).is_err());
    let mut e = IntegrandSpec::named("expr");
    e.expr = Some("det2(s0, s1, s2, s3) - 0.5 * (s0 * s0 + s3 * s3)".into());
    assert!(HomogeneousIntegrand::from_spec(&e, 4, 2).is_ok());
    e.expr = Some("s0 * s0 + 1".into());
    assert!(HomogeneousIntegrand::from_spec(&e, 1, 2).is_err());
}

#[test]
fn functional_examples() {
    let dom = DomainSpec::Rect { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] };
    let g = dom.grid(32, 0.0).unwrap();
    let u = DomainField::from_fn(dom, g, 2, |_, o| o[0] = 1.0).unwrap();
    let h = IntegrandSpec::named("norm_pow").build().unwrap();
    assert!((functional_eval(h.as_ref(), &u, None).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn dilations_leave_homogeneous_functionals_unchanged() {
    let dom = DomainSpec::Ball { center: vec![0.0, 0.0], radius: 1.0 };
    let g = dom.grid(64, 0.0).unwrap();
    let base = DomainField::from_fn(dom.clone(), g, 2, |x, o| {
        let b = poly_bump(x, &[0.0, 0.0], 0.9, 3);
        o[0] = b * (1.0 + x[0]);
        o[1] = b * x[1] * x[0];
    })
    .unwrap();
    let v = IntegrandSpec::named("neg_norm_pow").build().unwrap();
    let i0 = functional_eval(v.as_ref(), &base, None).unwrap();
    for k in [2, 8, 32] {
        let uk = dilation_sequence(&base, &[0.1, 0.3], k, 2.0, &dom).unwrap();
        assert!((functional_eval(v.as_ref(), &uk, None).unwrap() - i0).abs() <= 1e-12 * i0.abs());
    }
}

/// `(d1 psi1, d2 psi1, d1 psi2, d2 psi2)` of a random periodic `psi`.
fn random_gradient(g: &GridSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let psi = PeriodicField::random_smooth(g.clone(), 2, 8, true, rng).unwrap();
    let sp = g.spectral();
    let comp = |c: usize| psi.values().iter().skip(c).step_by(2).copied().collect::<Vec<f64>>();
    let d: Vec<Vec<f64>> = (0..2).flat_map(|c| (0..2).map(move |a| (c, a))).map(|(c, a)| sp.derivative(&comp(c), a)).collect();
    (0..g.len()).flat_map(|i| d.iter().map(move |col| col[i])).collect()
}

#[test]
fn det_is_a_null_lagrangian_on_gradients() {
    let g = unit(64);
    let det = Det2 { layout: MatrixLayout::Full };
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..50 {
        let f: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let grad = random_gradient(&g, &mut rng);
        let vals: Vec<f64> = grad.chunks_exact(4).flat_map(|c| c.iter().zip(&f).map(|(a, b)| a + b).collect::<Vec<_>>()).collect();
        let u = PeriodicField::new(g.clone(), 4, vals).unwrap();
        let i = functional_eval(&det, &u, None).unwrap();
        let want = f[0] * f[3] - f[1] * f[2];
        let scale = want.abs().max(1e-3);
        assert!((i - want).abs() <= 1e-8 * scale, "{i} vs {want}");
    }
}

#[test]
fn nemytskii_examples() {
    let g = unit(32);
    let v = HomogeneousIntegrand::from_spec(&IntegrandSpec::named("neg_norm_pow"), 2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let us: Vec<PeriodicField> = (0..4).map(|_| PeriodicField::random_smooth(g.clone(), 2, 4, false, &mut rng).unwrap()).collect();
    let bump = PeriodicField::from_fn(g.clone(), 2, |x, o| o[0] = poly_bump(x, &[0.0, 0.0], 0.3, 2)).unwrap();
    let vs: Vec<PeriodicField> = us.iter().enumerate().map(|(k, u)| u.lin_comb(1.0, &bump, 1.0 / (k + 1) as f64).unwrap()).collect();
    let ur: Vec<&dyn SampledField> = us.iter().map(|u| u as &dyn SampledField).collect();
    let vr: Vec<&dyn SampledField> = vs.iter().map(|u| u as &dyn SampledField).collect();
    let same = nemytskii_continuity_probe(&v, &ur, &ur, 100.0).unwrap();
    assert!(same.iter().all(|r| r.l1_gap == 0.0 && r.lp_gap == 0.0));
    let rows = nemytskii_continuity_probe(&v, &ur, &vr, 100.0).unwrap();
    assert!(rows.windows(2).all(|w| w[1].lp_gap < w[0].lp_gap));
    assert!(nemytskii_continuity_probe(&v, &ur, &vr, 1e-3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity_and_zero(s in prop::collection::vec(-3.0f64..3.0, 4), t in 0.01f64..20.0, x in prop::collection::vec(-1.0f64..1.0, 2)) {
        for name in ["norm_pow", "neg_norm_pow", "det2"] {
            let h = HomogeneousIntegrand::from_spec(&IntegrandSpec::named(name), 4, 2).unwrap();
            let ts: Vec<f64> = s.iter().map(|v| t * v).collect();
            let lhs = h.eval(&x, &ts);
            let rhs = t * t * h.eval(&x, &s);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(t * t));
            prop_assert_eq!(h.eval(&x, &[0.0; 4]), 0.0);
        }
    }

    #[test]
    fn functional_is_additive_over_regions(seed in any::<u64>(), cut in -0.4f64..0.4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = PeriodicField::random_smooth(unit(16), 4, 3, false, &mut rng).unwrap();
        let h = IntegrandSpec::named("det2").build().unwrap();
        let left = |x: &[f64]| x[0] < cut;
        let right = |x: &[f64]| x[0] >= cut;
        let a = functional_eval(h.as_ref(), &u, Some(&left)).unwrap();
        let b = functional_eval(h.as_ref(), &u, Some(&right)).unwrap();
        let all = functional_eval(h.as_ref(), &u, None).unwrap();
        let scale = functional_eval(IntegrandSpec::named("norm_pow").build().unwrap().as_ref(), &u, None).unwrap();
        prop_assert!((a + b - all).abs() <= 1e-12 * scale);
    }
}
