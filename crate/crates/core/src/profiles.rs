//! Smooth cutoffs and compactly supported bumps.

/// `C^infinity` step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let s = smooth_step(t);
    s * (1.0 - s) * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)))
}

/// Equal to 1 on `B(c, r_in)`, 0 outside `B(c, r_out)`.
pub fn radial_cutoff(x: &[f64], c: &[f64], r_in: f64, r_out: f64) -> f64 {
    let r = dist(x, c);
    smooth_step((r_out - r) / (r_out - r_in))
}

/// Gradient of [`radial_cutoff`].
pub fn radial_cutoff_grad(x: &[f64], c: &[f64], r_in: f64, r_out: f64, out: &mut [f64]) {
    let r = dist(x, c);
    let w = r_out - r_in;
    let ds = if r > 0.0 { -smooth_step_deriv((r_out - r) / w) / (w * r) } else { 0.0 };
    for (o, (a, b)) in out.iter_mut().zip(x.iter().zip(c)) {
        *o = ds * (a - b);
    }
}

pub fn dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `(1 - |x - c|^2 / r^2)^q` inside the ball, zero outside.
pub fn poly_bump(x: &[f64], c: &[f64], r: f64, q: i32) -> f64 {
    let rho2 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (r * r);
    if rho2 >= 1.0 {
        0.0
    } else {
        (1.0 - rho2).powi(q)
    }
}

/// Gradient of [`poly_bump`].
pub fn poly_bump_grad(x: &[f64], c: &[f64], r: f64, q: i32, out: &mut [f64]) {
    let rho2 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (r * r);
    if rho2 >= 1.0 {
        out.fill(0.0);
        return;
    }
    let f = -2.0 * q as f64 * (1.0 - rho2).powi(q - 1) / (r * r);
    for ((o, a), b) in out.iter_mut().zip(x).zip(c) {
        *o = f * (a - b);
    }
}

/// Row-major Hessian of [`poly_bump`].
pub fn poly_bump_hessian(x: &[f64], c: &[f64], r: f64, q: i32, out: &mut [f64]) {
    let n = x.len();
    let r2 = r * r;
    let rho2 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / r2;
    out.fill(0.0);
    if rho2 >= 1.0 {
        return;
    }
    let t = 1.0 - rho2;
    let qf = q as f64;
    let diag = -2.0 * qf * t.powi(q - 1) / r2;
    let outer = if q >= 2 { 4.0 * qf * (qf - 1.0) * t.powi(q - 2) / (r2 * r2) } else { 0.0 };
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = outer * (x[i] - c[i]) * (x[j] - c[j]);
        }
        out[i * n + i] += diag;
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}
