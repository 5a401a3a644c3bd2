use std::sync::Arc;

use afreeqc::fields::*;
use afreeqc::integrand::{HomogeneousIntegrand, NormPower};
use afreeqc::sequences::*;
use afreeqc::symbol::catalog;

const KS: [u32; 7] = [1, 2, 4, 8, 16, 32, 64];

fn neg_square() -> HomogeneousIntegrand {
    HomogeneousIntegrand::new(Arc::new(NormPower { p: 2.0, sign: -1.0 }), 2, 2).unwrap()
}

#[test]
fn cr_sequence_is_normalized_and_pole_approaches() {
    let disk = DomainSpec::unit_disk();
    let v = neg_square();
    let mut prev = f64::INFINITY;
    for k in KS {
        let f = cr_singular_sequence(&disk, k, 1e-10).unwrap();
        assert!((f.l2_norm_sq() - 1.0).abs() < 1e-10);
        assert!((f.integral(&v).unwrap() + 1.0).abs() < 1e-10);
        // the distance itself underflows for large k
        assert!(f.ln_dist < prev);
        prev = f.ln_dist;
        let z = f.pole();
        assert!(!disk.contains(&z) && z[1] == 0.0);
    }
}

#[test]
fn cr_field_is_holomorphic_away_from_pole() {
    let op = catalog("cauchy_riemann", None).unwrap();
    let sub = DomainSpec::Ball { center: vec![0.0, 0.0], radius: 0.7 };
    for k in [1, 8] {
        let f = cr_singular_sequence(&DomainSpec::unit_disk(), k, 1e-10).unwrap();
        let res: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let g = f.default_grid(n).unwrap();
                let r = DomainField::from_fn(sub.clone(), g, 2, |x, o| o.copy_from_slice(&f.value_at(x))).unwrap();
                hminus1_norm_domain(&op, &r).unwrap() / lp_norm(&r, 2.0).unwrap()
            })
            .collect();
        // the staircase edge of the sub-disk limits the rate to about h^(1/2)
        assert!(res.windows(2).all(|w| w[1] < 0.75 * w[0]), "k = {k}: {res:?}");
    }
}

#[test]
fn cr_pairings_are_weakly_null() {
    let (_, report) = cr_demo(&KS, 64, 1e-10, None).unwrap();
    let p: Vec<Vec<f64>> = report.rows.iter().map(|r| r.pairings.clone()).collect();
    assert_eq!(p[0].len(), 10);
    // the first step is pre-asymptotic for some fields
    assert!(weakly_null(&p[1..], 0.1, 10.0).iter().all(|&b| b), "{p:?}");
    for j in 0..10 {
        assert!(p[6][j].abs() * 10.0 <= p[0][j].abs(), "field {j}");
    }
}

#[test]
fn cr_mass_moves_to_the_boundary() {
    let (fields, report) = cr_demo(&KS, 256, 1e-10, None).unwrap();
    let fr: Vec<f64> = report.rows.iter().map(|r| r.boundary_fraction.unwrap()).collect();
    assert!(fr.windows(2).all(|w| w[1] > w[0]), "{fr:?}");
    assert!(fr[6] > 0.95, "{fr:?}");
    let cells = CellPartition { lo: vec![-1.125, -1.125], hi: vec![1.125, 1.125], per_axis: 4 };
    for f in &fields {
        let g = f.default_grid(128).unwrap();
        let bm = cr_boundary_mass(f, &g, 2.0, &cells).unwrap();
        let sum: f64 = bm.histogram.iter().sum();
        assert!((sum - bm.total).abs() <= 1e-10 * bm.total);
        assert!((0.0..=1.0).contains(&bm.band_fraction));
        let sampled = boundary_mass(&f.sample(&g).unwrap(), 2.0, 2.0, &cells).unwrap();
        let sum: f64 = sampled.histogram.iter().sum();
        assert!((sum - sampled.total).abs() <= 1e-10 * sampled.total);
    }
}

#[test]
fn truncated_cr_sequence_is_asymptotically_free() {
    let op = catalog("cauchy_riemann", None).unwrap();
    let eta = Cutoff { center: vec![1.0, 0.0], r_in: 0.5, r_out: 1.0 };
    let ks = [1, 2, 4, 8, 16, 32, 64];
    let run = |size: usize| {
        let seq = move |k: u32| {
            let f = cr_singular_sequence(&DomainSpec::unit_disk(), k, 1e-10)?;
            f.sample(&f.default_grid(size)?)
        };
        commutator_decay(&op, &seq, &eta, &ks).unwrap()
    };
    let (a, b) = (run(64), run(128));
    assert!(!a.precondition_violated && a.decreasing && a.rate < -0.8, "{a:?}");
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!((x.negative_norm - y.negative_norm).abs() < 0.02 * y.negative_norm);
    }
    // k ||A(eta u_k)|| settles once the pole is close to the boundary
    let scaled: Vec<f64> = b.rows[3..].iter().map(|r| r.k as f64 * r.negative_norm).collect();
    assert!(scaled.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-2 * w[0]), "{scaled:?}");
    // the sampled-then-cut norm agrees where the grid resolves the pole
    let seq = |k: u32| {
        let f = cr_singular_sequence(&DomainSpec::unit_disk(), k, 1e-10)?;
        f.sample(&f.default_grid(128)?)
    };
    let direct = truncation_decay(&op, &seq, &eta, &[1, 2]).unwrap();
    for (x, y) in direct.rows.iter().zip(&b.rows) {
        assert!((x.negative_norm - y.negative_norm).abs() < 0.1 * y.negative_norm, "{} vs {}", x.negative_norm, y.negative_norm);
    }
}

#[test]
fn shrinking_free_fields_truncate_to_zero() {
    // divergence-free bumps concentrating at an interior point
    let op = catalog("div", None).unwrap();
    let x0 = [0.2, -0.1];
    let eta = Cutoff { center: x0.to_vec(), r_in: 0.3, r_out: 0.6 };
    let dom = DomainSpec::unit_disk();
    let g = dom.grid(128, 0.125).unwrap();
    let seq = |k: u32| {
        let kf = k as f64;
        DomainField::from_fn(dom.clone(), g.clone(), 2, |x, o| {
            let y = [kf * (x[0] - x0[0]) + 0.2, kf * (x[1] - x0[1])];
            let mut gr = [0.0; 2];
            afreeqc::profiles::poly_bump_grad(&y, &[0.2, 0.0], 0.25, 4, &mut gr);
            o[0] = -kf * gr[1];
            o[1] = kf * gr[0];
        })
    };
    let r = commutator_decay(&op, &seq, &eta, &[1, 2, 4]).unwrap();
    assert!(r.rows.iter().all(|row| row.negative_norm < 1e-12), "{r:?}");
    let bad = truncation_decay(&op, &|_k| seq(1), &eta, &[1, 2, 4]).unwrap();
    assert!(bad.precondition_violated);
}

#[test]
fn dilations_preserve_norm_and_functional() {
    // k = 1 would carry the support out of the disk
    let report = dilation_demo(&KS[1..], 128, &[0.5, -0.2], 0.05).unwrap();
    let base = &report.rows[0];
    for r in &report.rows {
        assert!((r.lp_norm - base.lp_norm).abs() < 1e-12 * base.lp_norm);
        assert!((r.integrals[0] + r.lp_norm * r.lp_norm).abs() < 1e-12);
    }
    let fr: Vec<f64> = report.rows.iter().map(|r| r.boundary_fraction.unwrap()).collect();
    assert!(fr[0] > 0.0 && fr[1..].iter().all(|&f| f == 0.0), "{fr:?}");
    let p: Vec<Vec<f64>> = report.rows.iter().map(|r| r.pairings.clone()).collect();
    assert!(weakly_null(&p, 0.1, 10.0).iter().all(|&b| b), "{p:?}");
}

#[test]
fn dilations_at_boundary_point_keep_boundary_mass() {
    let report = dilation_demo(&KS, 128, &[1.0, 0.0], 0.05).unwrap();
    let fr: Vec<f64> = report.rows.iter().map(|r| r.boundary_fraction.unwrap()).collect();
    // once the support radius 1/k is inside the band
    assert!(fr.windows(2).all(|w| w[1] >= w[0]) && fr[4..].iter().all(|&f| f > 0.999), "{fr:?}");
    // the disk looks more and more like a half plane at the scale 1/k
    let full = lp_norm(&dilation_base(128).unwrap(), 2.0).unwrap();
    let norms: Vec<f64> = report.rows.iter().map(|r| r.lp_norm).collect();
    assert!(norms.windows(2).all(|w| w[1] >= w[0]) && norms[6] < full, "{norms:?} {full}");
    assert!((norms[6] - norms[5]).abs() < 0.01 * norms[6]);
}

#[test]
fn hessian_identity_and_negative_bump() {
    let (u, value) = bump_search(7, 200, -0.01).expect("search finds a bump");
    assert!(value < -0.01);
    let (rep, seq) = hessian_demo(&u, &[1, 2, 4, 8], 256).unwrap();
    assert!(rep.negative && rep.spread < 1e-6, "{rep:?}");
    assert_eq!(seq.rows.len(), 4);
    for i in &rep.integrals {
        assert!((i - value).abs() < 1e-6 * value.abs(), "{i} vs {value}");
    }
    let mirror = u.reflected().half_integral();
    assert!((mirror + value).abs() < 1e-8 * value.abs());
}

#[test]
fn cofactor_functional_along_sequences() {
    let ks = [1, 4, 16, 64];
    let run = |sequence| {
        let c = CofactorDemo { sequence, ..CofactorDemo::default() };
        let r = cofactor_demo(&c, &ks).unwrap();
        r.rows.iter().map(|r| r.integrals[1]).collect::<Vec<f64>>()
    };
    assert!(run(CofactorSequence::Constant).iter().all(|&d| d == 0.0));
    let bump = run(CofactorSequence::Bump);
    for (k, d) in ks.iter().zip(&bump) {
        assert!(d * (*k as f64) < 1.0, "k = {k}: {d}");
    }
    let osc = run(CofactorSequence::Oscillating { direction: [1.0, 1.0, 1.0] });
    assert!(osc[3] < 1e-4 && osc[3] < 1e-2 * osc[0], "{osc:?}");
}

#[test]
fn report_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cr.csv");
    let (_, report) = cr_demo(&[1, 2, 4], 64, 1e-10, None).unwrap();
    report.write(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("k,lp_norm,"));
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cr.csv.json")).unwrap()).unwrap();
    assert_eq!(meta["meta"]["generator"], "cr");
    assert_eq!(meta["rows"], 3);
}
