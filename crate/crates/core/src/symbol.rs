//! First-order constant-coefficient operators `A u = sum_i A^(i) d_i u`,
//! their symbols, the constant-rank check, and per-direction kernel projectors.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative singular-value cutoff used for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Default number of sphere samples for [`check_constant_rank`].
pub const DEFAULT_RANK_SAMPLES: usize = 4096;

/// A constant-coefficient first-order operator given by `n` matrices of size `d x m`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorA {
    name: String,
    n: usize,
    m: usize,
    d: usize,
    coeffs: Vec<DMatrix<f64>>,
}

/// JSON representation: coefficient matrices listed row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub coeffs: Vec<Vec<f64>>,
}

impl OperatorA {
    pub fn new(name: impl Into<String>, coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 {
            return Err(Error::InvalidArgument("operator needs at least one coefficient matrix".into()));
        }
        let (d, m) = coeffs[0].shape();
        if d == 0 || m == 0 {
            return Err(Error::InvalidArgument("coefficient matrices must be non-empty".into()));
        }
        if let Some(bad) = coeffs.iter().position(|a| a.shape() != (d, m)) {
            return Err(Error::DimensionMismatch(format!(
                "coefficient {bad} has shape {:?}, expected ({d}, {m})",
                coeffs[bad].shape()
            )));
        }
        if coeffs.iter().any(|a| a.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("operator coefficients".into()));
        }
        Ok(Self { name: name.into(), n, m, d, coeffs })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    /// Space dimension.
    pub fn n(&self) -> usize {
        self.n
    }
    /// Field dimension.
    pub fn m(&self) -> usize {
        self.m
    }
    /// Constraint dimension.
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    /// `sum_i w_i A^(i)` without any normalization or checks.
    pub fn symbol_linear(&self, w: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.d, self.m);
        for (a, &wi) in self.coeffs.iter().zip(w) {
            if wi != 0.0 {
                out += a * wi;
            }
        }
        out
    }

    /// Operator acting independently on `rows` stacked copies of the field,
    /// e.g. the row-wise curl of matrix-valued fields.
    pub fn row_wise(&self, rows: usize) -> Result<Self> {
        if rows == 0 {
            return Err(Error::InvalidArgument("rows must be positive".into()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| {
                let mut big = DMatrix::zeros(self.d * rows, self.m * rows);
                for r in 0..rows {
                    big.view_mut((r * self.d, r * self.m), (self.d, self.m)).copy_from(a);
                }
                big
            })
            .collect();
        Self::new(format!("{}_rows{}", self.name, rows), coeffs)
    }

    /// The same operator written in rotated coordinates `x = R y`.
    ///
    /// `R` must be orthogonal; column `j` of `R` is the image of `e_j`.
    pub fn rotated(&self, rot: &DMatrix<f64>) -> Result<Self> {
        if rot.shape() != (self.n, self.n) {
            return Err(Error::DimensionMismatch("rotation must be n x n".into()));
        }
        let coeffs = (0..self.n)
            .map(|i| {
                let mut a = DMatrix::zeros(self.d, self.m);
                for j in 0..self.n {
                    a += &self.coeffs[j] * rot[(j, i)];
                }
                a
            })
            .collect();
        Self::new(self.name.clone(), coeffs)
    }

    pub fn to_doc(&self) -> OperatorDoc {
        OperatorDoc {
            name: self.name.clone(),
            n: self.n,
            m: self.m,
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .map(|a| {
                    let mut v = Vec::with_capacity(self.d * self.m);
                    for r in 0..self.d {
                        for c in 0..self.m {
                            v.push(a[(r, c)]);
                        }
                    }
                    v
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &OperatorDoc) -> Result<Self> {
        if doc.coeffs.len() != doc.n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficient matrices, found {}",
                doc.n,
                doc.coeffs.len()
            )));
        }
        let coeffs = doc
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if v.len() != doc.d * doc.m {
                    return Err(Error::DimensionMismatch(format!(
                        "coefficient {i} has {} entries, expected {}",
                        v.len(),
                        doc.d * doc.m
                    )));
                }
                Ok(DMatrix::from_row_slice(doc.d, doc.m, v))
            })
            .collect::<Result<Vec<_>>>()?;
        let op = Self::new(doc.name.clone(), coeffs)?;
        if op.m != doc.m || op.d != doc.d {
            return Err(Error::DimensionMismatch("declared m/d disagree with coefficients".into()));
        }
        Ok(op)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: OperatorDoc = serde_json::from_str(text)?;
        Self::from_doc(&doc)
    }
}

/// Names accepted by [`catalog`].
pub const CATALOG: &[&str] = &["div", "curl2d", "curl3d", "cauchy_riemann", "hessian_curl", "curl2d_rows"];

/// Built-in operators. `dim` selects the space dimension for `div` (default 2).
pub fn catalog(name: &str, dim: Option<usize>) -> Result<OperatorA> {
    let m = |r: usize, c: usize, v: &[f64]| DMatrix::from_row_slice(r, c, v);
    match name {
        "div" => {
            let n = dim.unwrap_or(2);
            if n == 0 {
                return Err(Error::InvalidArgument("div needs n >= 1".into()));
            }
            let coeffs = (0..n)
                .map(|i| {
                    let mut a = DMatrix::zeros(1, n);
                    a[(0, i)] = 1.0;
                    a
                })
                .collect();
            OperatorA::new("div", coeffs)
        }
        // d1 u2 - d2 u1
        "curl2d" => OperatorA::new("curl2d", vec![m(1, 2, &[0.0, 1.0]), m(1, 2, &[-1.0, 0.0])]),
        // (curl u)_i = eps_ijk d_j u_k, so A^(j)_{ik} = eps_ijk
        "curl3d" => {
            let eps = |i: usize, j: usize, k: usize| -> f64 {
                match (i, j, k) {
                    (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
                    (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
                    _ => 0.0,
                }
            };
            let coeffs = (0..3)
                .map(|j| DMatrix::from_fn(3, 3, |i, k| eps(i, j, k)))
                .collect();
            OperatorA::new("curl3d", coeffs)
        }
        // (d1 u1 - d2 u2, d2 u1 + d1 u2)
        "cauchy_riemann" => OperatorA::new(
            "cauchy_riemann",
            vec![m(2, 2, &[1.0, 0.0, 0.0, 1.0]), m(2, 2, &[0.0, -1.0, 1.0, 0.0])],
        ),
        // components (w11, w12, w22): (d2 w11 - d1 w12, d2 w12 - d1 w22)
        "hessian_curl" => OperatorA::new(
            "hessian_curl",
            vec![
                m(2, 3, &[0.0, -1.0, 0.0, 0.0, 0.0, -1.0]),
                m(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
            ],
        ),
        "curl2d_rows" => catalog("curl2d", None)?.row_wise(2),
        other => Err(Error::InvalidArgument(format!("unknown operator '{other}'"))),
    }
}

/// `A(w) = sum_i w_i A^(i)` at a direction `w`, normalized to unit length.
pub fn symbol_at(op: &OperatorA, w: &[f64]) -> Result<DMatrix<f64>> {
    let w = unit(w, op.n)?;
    Ok(op.symbol_linear(&w))
}

fn unit(w: &[f64], n: usize) -> Result<Vec<f64>> {
    if w.len() != n {
        return Err(Error::DimensionMismatch(format!("direction has length {}, expected {n}", w.len())));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("direction is not finite".into()));
    }
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero direction".into()));
    }
    Ok(w.iter().map(|v| v / norm).collect())
}

/// Numerical rank: number of singular values with `sigma_j / sigma_1 > tol`.
pub fn numerical_rank(a: &DMatrix<f64>, tol: f64) -> usize {
    let sv = a.singular_values();
    let top = sv.iter().cloned().fold(0.0_f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s / top > tol).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub operator: String,
    pub rank: usize,
    pub min_rank: usize,
    pub max_rank: usize,
    pub num_samples: usize,
    pub tolerance: f64,
    pub witness_direction: Vec<f64>,
    pub constant_rank: bool,
}

/// Deterministic sample of unit directions: coordinate directions, a
/// Fibonacci lattice (n = 2, 3), and seeded random points.
pub fn sphere_samples(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count + 2 * n);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            out.push(e);
        }
    }
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let lattice = match n {
        2 | 3 => count / 2,
        _ => 0,
    };
    for j in 0..lattice {
        let t = j as f64 + 0.5;
        match n {
            2 => {
                let th = 2.0 * std::f64::consts::PI * (t / golden).fract();
                out.push(vec![th.cos(), th.sin()]);
            }
            _ => {
                let z = 1.0 - 2.0 * t / lattice as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let th = 2.0 * std::f64::consts::PI * (t / golden).fract();
                out.push(vec![r * th.cos(), r * th.sin(), z]);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count + 2 * n {
        out.push(sample_unit_sphere(&mut rng, n));
    }
    out
}

/// Sample the symbol over the unit sphere and aggregate its rank.
pub fn check_constant_rank(op: &OperatorA, num_samples: usize, tol: f64) -> Result<RankReport> {
    if num_samples < 2 * op.n {
        return Err(Error::InvalidArgument(format!("need at least {} samples", 2 * op.n)));
    }
    let dirs = sphere_samples(op.n, num_samples - 2 * op.n, 0x5eed_0f5a_u64);
    let mut min_rank = usize::MAX;
    let mut max_rank = 0;
    let mut witness = dirs[0].clone();
    let mut first = None;
    for w in &dirs {
        let r = numerical_rank(&op.symbol_linear(w), tol);
        first.get_or_insert(r);
        if r < min_rank {
            min_rank = r;
            witness = w.clone();
        }
        max_rank = max_rank.max(r);
    }
    Ok(RankReport {
        operator: op.name.clone(),
        rank: max_rank,
        min_rank,
        max_rank,
        num_samples: dirs.len(),
        tolerance: tol,
        witness_direction: witness,
        constant_rank: min_rank == max_rank,
    })
}

/// An operator whose constant-rank property has been checked numerically.
#[derive(Debug, Clone)]
pub struct ConstantRankOperator {
    op: OperatorA,
    rank: usize,
}

impl ConstantRankOperator {
    pub fn verify(op: OperatorA) -> Result<Self> {
        let report = check_constant_rank(&op, DEFAULT_RANK_SAMPLES + 2 * op.n(), RANK_TOL)?;
        if !report.constant_rank {
            return Err(Error::ConstantRankViolation {
                expected: report.max_rank,
                found: report.min_rank,
                direction: report.witness_direction,
            });
        }
        Ok(Self { op, rank: report.rank })
    }

    pub fn op(&self) -> &OperatorA {
        &self.op
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
}

/// Orthogonal projector onto `ker A(w)`, i.e. `I - A(w)^+ A(w)` with the
/// pseudoinverse truncated at the verified rank.
pub fn kernel_projector(op: &ConstantRankOperator, w: &[f64]) -> Result<DMatrix<f64>> {
    let w = unit(w, op.op.n)?;
    let a = op.op.symbol_linear(&w);
    let m = op.op.m;
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let top = sv.iter().cloned().fold(0.0_f64, f64::max);
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let found = if top == 0.0 { 0 } else { sv.iter().filter(|&&s| s / top > RANK_TOL).count() };
    if found != op.rank {
        return Err(Error::ConstantRankViolation { expected: op.rank, found, direction: w });
    }
    let mut p = DMatrix::identity(m, m);
    for &j in idx.iter().take(op.rank) {
        let row = v_t.row(j);
        p -= row.transpose() * row;
    }
    // symmetrize
    let pt = p.transpose();
    Ok((p + pt) * 0.5)
}

/// Uniform point on the unit sphere from normalized Gaussian samples.
pub(crate) fn sample_unit_sphere<R: rand::Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-12 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}
