//! Initial iterates for the boundary testers.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::profiles::{poly_bump_grad, radial_cutoff};
use crate::sequences::truncated_singular_field;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum SeedKind {
    Random,
    /// Rotated gradient of a bump (divergence-free, n = 2).
    Stream,
    /// Gradient of a bump (curl-free).
    Gradient,
    /// Truncated `(z - z*)^{-power}` with `z*` at distance `dist` outside.
    Singular { dist: f64, power: i32 },
    Constant,
}

/// Operator-specific seeds followed by `restarts` random ones.
pub(crate) fn seed_plan(op_name: &str, n: usize, h: f64, restarts: usize, periodic: bool) -> Vec<SeedKind> {
    let mut out = Vec::new();
    match (op_name, n) {
        ("div", 2) => out.push(SeedKind::Stream),
        ("curl2d", 2) => out.push(SeedKind::Gradient),
        ("cauchy_riemann", 2) if !periodic => {
            for mult in [1.0, 2.0, 4.0] {
                for power in [1, 2] {
                    out.push(SeedKind::Singular { dist: mult * h, power });
                }
            }
        }
        _ => {}
    }
    if periodic {
        out.push(SeedKind::Constant);
    }
    out.extend(std::iter::repeat_n(SeedKind::Random, restarts));
    out
}

/// Seed values at the given points (`n` coordinates each, `m` components out).
///
/// `normal` is the outward normal at the boundary point `0`; `frame` maps
/// local components to field components (identity for the strong tester).
#[allow(clippy::too_many_arguments)]
pub(crate) fn seed_values<R: Rng>(
    kind: SeedKind,
    points: &[f64],
    n: usize,
    m: usize,
    normal: &[f64],
    frame: Option<&nalgebra::DMatrix<f64>>,
    periodic: bool,
    rng: &mut R,
) -> Vec<f64> {
    let count = points.len() / n;
    let mut out = vec![0.0; count * m];
    let mut g = vec![0.0; n];
    let (center, radius): (Vec<f64>, f64) = if periodic {
        let mut c = vec![0.0; n];
        c[0] = -0.1;
        (c, 0.14)
    } else {
        (normal.iter().map(|v| -0.2 * v).collect(), 0.18)
    };
    match kind {
        SeedKind::Stream | SeedKind::Gradient => {
            for (x, o) in points.chunks_exact(n).zip(out.chunks_exact_mut(m)) {
                poly_bump_grad(x, &center, radius, 4, &mut g);
                let local = if kind == SeedKind::Stream { [-g[1], g[0]] } else { [g[0], g[1]] };
                match frame {
                    Some(r) => {
                        for i in 0..2 {
                            o[i] = r[(i, 0)] * local[0] + r[(i, 1)] * local[1];
                        }
                    }
                    None => o[..2].copy_from_slice(&local),
                }
            }
        }
        SeedKind::Singular { dist, power } => {
            for (x, o) in points.chunks_exact(n).zip(out.chunks_exact_mut(m)) {
                let u = truncated_singular_field(x, normal, dist, power);
                o[..2].copy_from_slice(&u);
            }
        }
        SeedKind::Constant => {
            let c: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            for o in out.chunks_exact_mut(m) {
                o.copy_from_slice(&c);
            }
        }
        SeedKind::Random => {
            let bumps = rng.gen_range(1..=3);
            for _ in 0..bumps {
                let c = loop {
                    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.4..0.4)).collect();
                    let ok = if periodic {
                        c.iter().all(|v| v.abs() < 0.2)
                    } else {
                        c.iter().map(|v| v * v).sum::<f64>() < 0.16
                            && c.iter().zip(normal).map(|(a, b)| a * b).sum::<f64>() < -0.05
                    };
                    if ok {
                        break c;
                    }
                };
                let sigma = rng.gen_range(0.04..0.12);
                let amp: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
                for (x, o) in points.chunks_exact(n).zip(out.chunks_exact_mut(m)) {
                    let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                    let e = (-r2 / (2.0 * sigma * sigma)).exp() * radial_cutoff(x, &c, 2.5 * sigma, 3.5 * sigma);
                    for (oi, a) in o.iter_mut().zip(&amp) {
                        *oi += a * e;
                    }
                }
            }
        }
    }
    out
}
