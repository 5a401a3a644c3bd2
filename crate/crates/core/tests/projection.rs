use afreeqc::fields::*;
use afreeqc::projection::*;
use afreeqc::symbol::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn verified(name: &str) -> ConstantRankOperator {
    ConstantRankOperator::verify(catalog(name, None).unwrap()).unwrap()
}

fn field(m: usize, n: usize, seed: u64) -> PeriodicField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PeriodicField::random_smooth(GridSpec::unit_cube(2, n).unwrap(), m, 6, true, &mut rng).unwrap()
}

/// Leray part computed directly from the coefficients.
fn leray(u: &PeriodicField) -> Vec<f64> {
    let g = u.grid();
    let sp = g.spectral();
    let c = u.coefficients();
    let mut out = vec![Complex64::default(); c.len()];
    sp.for_each_wavevector(|flat, k| {
        let k2 = k[0] * k[0] + k[1] * k[1];
        if k2 == 0.0 {
            return;
        }
        let (a, b) = (c[2 * flat], c[2 * flat + 1]);
        let dot = (a * k[0] + b * k[1]) / k2;
        out[2 * flat] = a - dot * k[0];
        out[2 * flat + 1] = b - dot * k[1];
    });
    sp.inverse_components(&out, 2)
}

#[test]
fn div_projection_is_leray() {
    for seed in 0..10 {
        let u = field(2, 32, seed);
        let tu = project_afree(&verified("div"), &u).unwrap();
        let l = leray(&u);
        let scale = lp_norm(&u, 2.0).unwrap();
        let err = tu.values().iter().zip(&l).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * scale, "{err}");
    }
}

#[test]
fn curl_recovers_gradient_of_mixture() {
    let g = GridSpec::unit_cube(2, 64).unwrap();
    let tau = 2.0 * std::f64::consts::PI;
    // grad psi with psi = sin(2 pi x) cos(4 pi y), sigma = rot of sin(2 pi (x + y))
    let grad = |x: &[f64], o: &mut [f64]| {
        o[0] = tau * (tau * x[0]).cos() * (2.0 * tau * x[1]).cos();
        o[1] = -2.0 * tau * (tau * x[0]).sin() * (2.0 * tau * x[1]).sin();
    };
    let u = PeriodicField::from_fn(g.clone(), 2, |x, o| {
        grad(x, o);
        let c = tau * (tau * (x[0] + x[1])).cos();
        o[0] += -c;
        o[1] += c;
    })
    .unwrap();
    let tu = project_afree(&verified("curl2d"), &u).unwrap();
    let want = PeriodicField::from_fn(g, 2, grad).unwrap();
    let err = lp_norm(&tu.lin_comb(1.0, &want, -1.0).unwrap(), 2.0).unwrap();
    assert!(err <= 1e-10 * lp_norm(&want, 2.0).unwrap());
}

#[test]
fn cauchy_riemann_projection_vanishes_and_ratio_is_norm_quotient() {
    let op = verified("cauchy_riemann");
    let u = field(2, 32, 3);
    let tu = project_afree(&op, &u).unwrap();
    assert!(tu.values().iter().all(|&v| v == 0.0));
    let r = projection_report(&op, &u).unwrap();
    let want = r.norm_u / r.norm_au;
    assert!((r.poincare_ratio.unwrap() - want).abs() <= 1e-12 * want);
}

#[test]
fn afree_input_is_fixed_and_ratio_undefined() {
    let op = verified("div");
    let u = field(2, 32, 5);
    let free = project_afree(&op, &u).unwrap();
    let r = projection_report(&op, &free).unwrap();
    assert!(r.poincare_ratio.is_none());
    assert!((r.norm_tu - r.norm_u).abs() <= 1e-12 * r.norm_u);
}

#[test]
fn poincare_ratio_is_stable_across_grids() {
    let op = verified("div");
    let max_at = |n: usize| {
        (0..100u64)
            .map(|s| projection_report(&op, &field(2, n, s)).unwrap().poincare_ratio.unwrap())
            .fold(0.0, f64::max)
    };
    let (a, b, c) = (max_at(32), max_at(64), max_at(128));
    assert!(a.is_finite() && a > 0.0);
    assert!((b - a).abs() <= 0.2 * a && (c - a).abs() <= 0.2 * a);
}

#[test]
fn complement_bound_holds_on_fresh_seeds() {
    let op = verified("hessian_curl");
    let ratio_max = (0..20u64)
        .map(|s| projection_report(&op, &field(3, 32, s)).unwrap().poincare_ratio.unwrap())
        .fold(0.0, f64::max);
    for s in 1000..1020u64 {
        let r = projection_report(&op, &field(3, 32, s)).unwrap();
        let complement = r.poincare_ratio.unwrap() * r.norm_au;
        assert!(complement <= ratio_max * r.norm_au * 1.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_invariants(seed in any::<u64>(), which in 0usize..5) {
        let name = ["div", "curl2d", "cauchy_riemann", "hessian_curl", "curl2d_rows"][which];
        let op = verified(name);
        let u = field(op.op().m(), 16, seed);
        let r = projection_report(&op, &u).unwrap();
        prop_assert!(r.residual_afree <= 1e-10 * r.norm_tu + 1e-14);
        prop_assert!(r.idempotence_gap <= 1e-12 * r.norm_u);
        prop_assert!(r.norm_tu <= r.norm_u * (1.0 + 1e-12));
        prop_assert!(r.mean_of_tu.iter().all(|v| v.abs() < 1e-14));
        prop_assert!(r.poincare_ratio.is_none_or(|v| v.is_finite() && v >= 0.0));
    }

    #[test]
    fn projection_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let op = verified("hessian_curl");
        let (u, v) = (field(3, 16, s1), field(3, 16, s2));
        let lhs = project_afree(&op, &u.lin_comb(a, &v, b).unwrap()).unwrap();
        let rhs = project_afree(&op, &u).unwrap().lin_comb(a, &project_afree(&op, &v).unwrap(), b).unwrap();
        let scale = lp_norm(&u, 2.0).unwrap() + lp_norm(&v, 2.0).unwrap();
        prop_assert!(lp_norm(&lhs.lin_comb(1.0, &rhs, -1.0).unwrap(), 2.0).unwrap() <= 1e-12 * scale * 4.0);
    }
}
