//! Acceptance criteria 1 to 7. Runs without the libtest harness and prints
//! one line per criterion; exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use afreeqc::experiment::{table5, TesterParams};
use afreeqc::fields::*;
use afreeqc::integrand::*;
use afreeqc::profiles::poly_bump;
use afreeqc::projection::{poincare_ratio_coeffs, report_with, AfreeProjector};
use afreeqc::qctest::*;
use afreeqc::sequences::*;
use afreeqc::symbol::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn verified(name: &str) -> ConstantRankOperator {
    ConstantRankOperator::verify(catalog(name, None).unwrap()).unwrap()
}

fn c1_cauchy_riemann() -> Check {
    let ks = [1, 2, 4, 8, 16, 32, 64];
    let (_, rep) = cr_demo(&ks, 512, 1e-10, None).map_err(|e| e.to_string())?;
    let mut worst_norm: f64 = 0.0;
    let mut worst_i: f64 = 0.0;
    for r in &rep.rows {
        worst_norm = worst_norm.max((r.lp_norm * r.lp_norm - 1.0).abs());
        worst_i = worst_i.max((r.integrals[0] + 1.0).abs());
    }
    ensure(worst_norm <= 1e-3, || format!("norm error {worst_norm}"))?;
    ensure(worst_i <= 2e-3, || format!("functional error {worst_i}"))?;
    let first = &rep.rows[0].pairings;
    let last = &rep.rows[rep.rows.len() - 1].pairings;
    let min_decay = first.iter().zip(last).map(|(a, b)| a.abs() / b.abs()).fold(f64::INFINITY, f64::min);
    ensure(first.len() == 10 && min_decay >= 10.0, || format!("pairing decay {min_decay}"))?;
    Ok(format!("max |norm^2 - 1| = {worst_norm:.1e}, max |I + 1| = {worst_i:.1e}, min pairing decay {min_decay:.0}x"))
}

fn c2_table5() -> Check {
    let params = TesterParams::default();
    let mut runs = 0;
    for grid in [32, 64] {
        for seed in 0..5 {
            let search = SearchConfig { grid, seed, ..SearchConfig::default() };
            let t = table5(&params, &search).map_err(|e| e.to_string())?;
            ensure(t.matches_expected, || format!("grid {grid} seed {seed}:\n{}", t.to_markdown()))?;
            runs += 1;
        }
    }
    Ok(format!("pattern reproduced in {runs} runs (seeds 0-4, N = 32, 64)"))
}

fn field(dim: usize, m: usize, n: usize, seed: u64) -> PeriodicField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PeriodicField::random_smooth(GridSpec::unit_cube(dim, n).unwrap(), m, 6, true, &mut rng).unwrap()
}

fn leray(u: &PeriodicField) -> Vec<f64> {
    let sp = u.grid().spectral();
    let c = u.coefficients();
    let mut out = vec![Complex64::default(); c.len()];
    sp.for_each_wavevector(|flat, k| {
        let k2 = k[0] * k[0] + k[1] * k[1];
        if k2 > 0.0 {
            let (a, b) = (c[2 * flat], c[2 * flat + 1]);
            let dot = (a * k[0] + b * k[1]) / k2;
            out[2 * flat] = a - dot * k[0];
            out[2 * flat + 1] = b - dot * k[1];
        }
    });
    sp.inverse_components(&out, 2)
}

fn c3_projection() -> Check {
    let mut worst_res: f64 = 0.0;
    let mut worst_idem: f64 = 0.0;
    let mut worst_leray: f64 = 0.0;
    let mut worst_poincare: f64 = 0.0;
    for name in CATALOG {
        let op = verified(name);
        let (dim, m) = (op.op().n(), op.op().m());
        let proj = AfreeProjector::new(&op, &GridSpec::unit_cube(dim, 64).unwrap()).map_err(|e| e.to_string())?;
        let fine = AfreeProjector::new(&op, &GridSpec::unit_cube(dim, 128).unwrap()).map_err(|e| e.to_string())?;
        let (mut p64, mut p128) = (0.0f64, 0.0f64);
        for seed in 0..100u64 {
            let u = field(dim, m, 64, seed);
            let r = report_with(&proj, &u).map_err(|e| e.to_string())?;
            worst_res = worst_res.max(r.residual_afree / r.norm_u);
            worst_idem = worst_idem.max(r.idempotence_gap / r.norm_u);
            if *name == "div" {
                let tu = proj.project(&u).map_err(|e| e.to_string())?;
                let err = tu.values().iter().zip(leray(&u)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst_leray = worst_leray.max(err / r.norm_u);
            }
            if *name == "cauchy_riemann" {
                let tu = proj.project(&u).map_err(|e| e.to_string())?;
                ensure(tu.values().iter().all(|&v| v == 0.0), || format!("T u != 0 for seed {seed}"))?;
            }
            p64 = p64.max(r.poincare_ratio.unwrap_or(0.0));
            // same seed on the finer grid; the ratio only needs coefficients
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = PeriodicField::random_smooth_coefficients(fine.grid(), m, 6, true, &mut rng).map_err(|e| e.to_string())?;
            p128 = p128.max(poincare_ratio_coeffs(&fine, &c).map_err(|e| e.to_string())?.unwrap_or(0.0));
        }
        let var = (p128 - p64).abs() / p64;
        ensure(var <= 0.2, || format!("{name}: Poincare max {p64} vs {p128}"))?;
        worst_poincare = worst_poincare.max(var);
    }
    ensure(worst_res <= 1e-10, || format!("residual {worst_res}"))?;
    ensure(worst_idem <= 1e-12, || format!("idempotence {worst_idem}"))?;
    ensure(worst_leray <= 1e-10, || format!("Leray {worst_leray}"))?;
    Ok(format!(
        "residual {worst_res:.1e}, idempotence {worst_idem:.1e}, Leray {worst_leray:.1e}, Poincare variation {:.1}%",
        100.0 * worst_poincare
    ))
}

fn random_gradient(g: &GridSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let psi = PeriodicField::random_smooth(g.clone(), 2, 8, true, rng).unwrap();
    let sp = g.spectral();
    let comp = |c: usize| psi.values().iter().skip(c).step_by(2).copied().collect::<Vec<f64>>();
    let d: Vec<Vec<f64>> = (0..2).flat_map(|c| (0..2).map(move |a| (c, a))).map(|(c, a)| sp.derivative(&comp(c), a)).collect();
    (0..g.len()).flat_map(|i| d.iter().map(move |col| col[i])).collect()
}

fn c4_null_lagrangian() -> Check {
    let g = GridSpec::unit_cube(2, 64).unwrap();
    let det = Det2 { layout: MatrixLayout::Full };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let f: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let grad = random_gradient(&g, &mut rng);
        let vals: Vec<f64> = grad.chunks_exact(4).flat_map(|c| c.iter().zip(&f).map(|(a, b)| a + b).collect::<Vec<_>>()).collect();
        let u = PeriodicField::new(g.clone(), 4, vals).map_err(|e| e.to_string())?;
        let i = functional_eval(&det, &u, None).map_err(|e| e.to_string())?;
        let want = f[0] * f[3] - f[1] * f[2];
        worst = worst.max((i - want).abs() / want.abs().max(1e-3));
    }
    ensure(worst <= 1e-8, || format!("relative error {worst}"))?;
    Ok(format!("max relative error {worst:.1e} over 50 cases"))
}

fn c5_hessian() -> Check {
    let (u, value) = bump_search(7, 200, -0.01).ok_or("bump search found nothing")?;
    let (rep, _) = hessian_demo(&u, &[1, 2, 4, 8], 256).map_err(|e| e.to_string())?;
    ensure(rep.spread <= 1e-6, || format!("spread {}", rep.spread))?;
    ensure(rep.reference < -0.01 && value < -0.01, || format!("integral {}", rep.reference))?;
    Ok(format!("integral {:.4}, spread across k {:.1e}", rep.reference, rep.spread))
}

fn c6_norms() -> Check {
    let g = GridSpec::unit_cube(2, 32).unwrap();
    let h = g.h(0);
    let inner: Vec<bool> = (0..g.len()).map(|i| g.node(i).iter().all(|v| v.abs() < 0.5 - h)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..100 {
        let r = PeriodicField::random_smooth(g.clone(), 1, 5, false, &mut rng).unwrap();
        let c: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.1..0.1)).collect();
        let vals: Vec<f64> = (0..g.len()).map(|i| r.values()[i] * poly_bump(&g.node(i), &c, 0.14, 3)).collect();
        let dir = hminus1_dual_norm_masked(&vals, 1, &g, &inner).map_err(|e| e.to_string())?;
        let per = hminus1_norm_periodic(&Spectrum { grid: g.clone(), d: 1, coeffs: g.spectral().forward_components(&vals, 1) });
        ensure(dir <= per + 1e-8, || format!("case {case}: Dirichlet {dir} > periodic {per}"))?;
    }
    let op = catalog("div", None).unwrap();
    let mut pairs = 0;
    while pairs < 100 {
        let c: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.2..0.2)).collect();
        let rad = rng.gen_range(0.3..0.45);
        let big: Vec<bool> = (0..g.len())
            .map(|i| {
                let x = g.node(i);
                (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) < rad * rad
            })
            .collect();
        let (a, b) = (rng.gen_range(-1.0..1.0f64), rng.gen_range(-0.1..0.1));
        let small: Vec<bool> = (0..g.len()).map(|i| big[i] && g.node(i)[0] * a.cos() + g.node(i)[1] * a.sin() < b).collect();
        if small.iter().filter(|&&s| s).count() < 20 {
            continue;
        }
        let r = PeriodicField::random_smooth(g.clone(), 2, 4, false, &mut rng).unwrap();
        let vals: Vec<f64> = r.values().iter().enumerate().map(|(j, v)| if small[j / 2] { *v } else { 0.0 }).collect();
        let ns = DomainNorm::new(&op, &g, &small).and_then(|d| d.norm_of(&vals)).map_err(|e| e.to_string())?;
        let nb = DomainNorm::new(&op, &g, &big).and_then(|d| d.norm_of(&vals)).map_err(|e| e.to_string())?;
        ensure(ns <= nb + 10.0 * CG_TOL * nb.max(1.0), || format!("pair {pairs}: {ns} > {nb}"))?;
        pairs += 1;
    }
    // refinement on a fixed analytic field over the unit disk
    let dom = DomainSpec::unit_disk();
    let analytic = |x: &[f64], o: &mut [f64]| {
        o[0] = (x[0] + 2.0 * x[1]).cos();
        o[1] = (x[0] * x[1]).sin() + x[0];
    };
    let exact = {
        let (gx, gw) = afreeqc::profiles::gauss_legendre(40);
        let nt = 256;
        let mut s = 0.0;
        for (r, wr) in gx.iter().zip(&gw) {
            let r = 0.5 * (r + 1.0);
            for j in 0..nt {
                let t = 2.0 * std::f64::consts::PI * j as f64 / nt as f64;
                let mut o = [0.0; 2];
                analytic(&[r * t.cos(), r * t.sin()], &mut o);
                s += 0.5 * wr * r * (2.0 * std::f64::consts::PI / nt as f64) * (o[0] * o[0] + o[1] * o[1]);
            }
        }
        s.sqrt()
    };
    let sizes = [32, 64, 128, 256];
    let mut l2 = Vec::new();
    let mut dn = Vec::new();
    let mut pn = Vec::new();
    for n in sizes {
        let gd = dom.grid(n, 0.125).map_err(|e| e.to_string())?;
        let u = DomainField::from_fn(dom.clone(), gd, 2, analytic).map_err(|e| e.to_string())?;
        l2.push((lp_norm(&u, 2.0).map_err(|e| e.to_string())? - exact).abs());
        dn.push(hminus1_norm_domain(&op, &u).map_err(|e| e.to_string())?);
        let pu = PeriodicField::from_fn(GridSpec::unit_cube(2, n).unwrap(), 2, |x, o| {
            o[0] = (2.0 * std::f64::consts::PI * x[0]).sin();
            o[1] = (2.0 * std::f64::consts::PI * (x[0] + x[1])).cos();
        })
        .map_err(|e| e.to_string())?;
        pn.push(hminus1_norm_periodic(&apply_a_periodic(&op, &pu).map_err(|e| e.to_string())?));
    }
    for (e, n) in l2.iter().zip(sizes) {
        ensure(e * n as f64 <= 0.6, || format!("L2 error {e} at N = {n}"))?;
    }
    let diffs: Vec<f64> = dn.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let orders: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    ensure(orders.iter().all(|&o| o >= 1.0), || format!("domain norm orders {orders:?}"))?;
    ensure(pn.windows(2).all(|w| (w[1] - w[0]).abs() <= 1e-10 * w[1]), || format!("periodic {pn:?}"))?;
    Ok(format!(
        "100 Dirichlet/periodic cases, 100 mask pairs, L2 err*N <= {:.2}, domain-norm orders {:?}",
        l2.iter().zip(sizes).map(|(e, n)| e * n as f64).fold(0.0, f64::max),
        orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>()
    ))
}

fn c7_properties() -> Check {
    // analytic ranks
    for (name, r) in [("div", 1), ("curl2d", 1), ("curl3d", 2), ("cauchy_riemann", 2), ("hessian_curl", 2)] {
        let rep = check_constant_rank(&catalog(name, None).unwrap(), DEFAULT_RANK_SAMPLES, RANK_TOL).map_err(|e| e.to_string())?;
        ensure(rep.constant_rank && rep.rank == r, || format!("{name}: rank {}", rep.rank))?;
    }
    // homogeneity: catalog entries pass, a mixed-degree expression is rejected
    for (name, m) in [("norm_pow", 2), ("neg_norm_pow", 2), ("det2", 4), ("det2_sym", 3), ("cofactor_normal", 9)] {
        let n = if name == "cofactor_normal" { 3 } else { 2 };
        HomogeneousIntegrand::from_spec(&IntegrandSpec::named(name), m, n).map_err(|e| format!("{name}: {e}"))?;
    }
    let mixed = IntegrandSpec { expr: Some("s0*s0 + s1".into()), ..IntegrandSpec::named("expr") };
    ensure(HomogeneousIntegrand::from_spec(&mixed, 2, 2).is_err(), || "mixed degree accepted".into())?;
    // every emitted violation revalidates; repeated runs are bit-identical
    let cfg = SearchConfig::default();
    let mut revalidated = 0;
    for name in ["div", "cauchy_riemann", "curl2d"] {
        let op = verified(name);
        let v = HomogeneousIntegrand::from_spec(&IntegrandSpec::named("neg_norm_pow"), 2, 2).unwrap();
        let a = qcb_gap_probe(&op, &v, &[1.0, 0.0], 0.5, 0.5, 0.1, &cfg).map_err(|e| e.to_string())?;
        let b = qcb_gap_probe(&op, &v, &[1.0, 0.0], 0.5, 0.5, 0.1, &cfg).map_err(|e| e.to_string())?;
        for (x, y) in [(&a.strong, &b.strong), (&a.periodic, &b.periodic)] {
            let sx = serde_json::to_string(&x.certificate).unwrap();
            ensure(sx == serde_json::to_string(&y.certificate).unwrap(), || format!("{name}: nondeterministic"))?;
            if x.is_violation() {
                let rv = revalidate(&x.certificate, x.witness.as_ref().unwrap(), &op, &v).map_err(|e| e.to_string())?;
                ensure(rv.matches && rv.feasible, || format!("{name}: {rv:?}"))?;
                revalidated += 1;
            }
        }
    }
    // exit-code contract
    let bin = env!("CARGO_BIN_EXE_afreeqc");
    let code = |args: &[&str]| Command::new(bin).args(args).output().map(|o| o.status.code()).unwrap_or(None);
    ensure(code(&["rank-check", "--op", "div"]) == Some(0), || "exit 0".into())?;
    ensure(code(&["test-aqc", "--op", "div", "--s0", "0,0"]) == Some(2), || "exit 2".into())?;
    ensure(code(&["rank-check", "--op", "nope"]) == Some(1), || "exit 1".into())?;
    ensure(code(&["run", "/nonexistent.json"]) == Some(1), || "exit 1 on missing config".into())?;
    Ok(format!("ranks, homogeneity, {revalidated} revalidated violations, determinism, exit codes"))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, fn() -> Check); 7] = [
        (1, "Cauchy-Riemann counterexample", Duration::from_secs(60), c1_cauchy_riemann),
        (2, "boundary tester verdict table", Duration::from_secs(600), c2_table5),
        (3, "projection suite", Duration::from_secs(120), c3_projection),
        (4, "null Lagrangian", Duration::from_secs(60), c4_null_lagrangian),
        (5, "Hessian example", Duration::from_secs(120), c5_hessian),
        (6, "norm infrastructure", Duration::from_secs(180), c6_norms),
        (7, "property suites", Duration::from_secs(600), c7_properties),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, budget, f) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let dt = t.elapsed();
        let out = match out {
            Ok(s) if dt > budget => Err(format!("{s}; over the {}s budget", budget.as_secs())),
            other => other,
        };
        match out {
            Ok(s) => println!("criterion {id} ({name}): PASS in {:.2}s: {s}", dt.as_secs_f64()),
            Err(s) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL in {:.2}s: {s}", dt.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
