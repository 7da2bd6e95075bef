//! Linear solvers for the reduced SPD systems.

use std::fmt;
use std::str::FromStr;
use web_time::Instant;

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::assemble::SparseSystem;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    /// Sparse Cholesky factorization.
    Direct,
    /// Jacobi-preconditioned conjugate gradients to relative residual `tol`.
    Cg { tol: f64 },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Direct => "direct",
            Strategy::Cg { .. } => "cg",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `direct` or `cg`; CG gets the default tolerance `1e-12`.
impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Strategy::Direct),
            "cg" => Ok(Strategy::Cg { tol: 1e-12 }),
            other => Err(Error::Config(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SolveStats {
    pub n: usize,
    pub nnz: usize,
    /// CG iterations; zero for the direct solver.
    pub iterations: usize,
    /// `‖b − Ax‖ / ‖b‖`.
    pub relative_residual: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// Values of all global unknowns, prescribed ones included.
    pub field: Vec<f64>,
    pub stats: SolveStats,
}

fn to_faer(a: &CsrMatrix) -> Result<SparseColMat<usize, f64>> {
    let mut trip = Vec::with_capacity(a.nnz());
    for i in 0..a.n {
        for (j, v) in a.row(i) {
            trip.push(Triplet::new(i, j, v));
        }
    }
    SparseColMat::try_new_from_triplets(a.n, a.n, &trip)
        .map_err(|e| Error::Structure(format!("sparse matrix construction failed: {e:?}")))
}

fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (q - p) * (q - p)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

/// Returns whether `a` admits a sparse Cholesky factorization.
pub fn cholesky_succeeds(a: &CsrMatrix) -> Result<bool> {
    Ok(to_faer(a)?.sp_cholesky(Side::Lower).is_ok())
}

/// Solves `A x = b` with a sparse Cholesky factorization.
pub fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.n {
        return Err(Error::Dimension(format!("rhs of length {} for n = {}", b.len(), a.n)));
    }
    if a.n == 0 {
        return Ok(Vec::new());
    }
    let llt = to_faer(a)?
        .sp_cholesky(Side::Lower)
        .map_err(|e| Error::NotSpd(format!("Cholesky factorization failed: {e:?}")))?;
    let rhs = Mat::from_fn(a.n, 1, |i, _| b[i]);
    let x = llt.solve(&rhs);
    let out: Vec<f64> = (0..a.n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotSpd("Cholesky solve produced non-finite values".into()));
    }
    Ok(out)
}

/// Jacobi-preconditioned CG. Fails with a convergence error after
/// `max_iter` iterations.
pub fn solve_cg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    if b.len() != a.n {
        return Err(Error::Dimension(format!("rhs of length {} for n = {}", b.len(), a.n)));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("CG tolerance must be positive, got {tol}")));
    }
    let n = a.n;
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::NotSpd(format!("non-positive diagonal entry {} at row {i}", diag[i])));
    }
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let nb = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotSpd(format!("CG met non-positive curvature {pap:e}")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= tol * nb {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Convergence(format!(
        "CG did not reach relative residual {tol:e} in {max_iter} iterations (n = {n})"
    )))
}

/// Default CG iteration cap for a system of size `n`.
pub fn cg_max_iter(n: usize) -> usize {
    (20.0 * (n as f64).sqrt()).ceil() as usize + 100
}

/// Solves a reduced system and expands the result to all global unknowns.
pub fn solve_system(sys: &SparseSystem, strategy: Strategy) -> Result<Solution> {
    let start = Instant::now();
    let (x, iterations) = match strategy {
        Strategy::Direct => (solve_direct(&sys.matrix, &sys.rhs)?, 0),
        Strategy::Cg { tol } => solve_cg(&sys.matrix, &sys.rhs, tol, cg_max_iter(sys.n()))?,
    };
    let seconds = start.elapsed().as_secs_f64();
    let stats = SolveStats {
        n: sys.n(),
        nnz: sys.matrix.nnz(),
        iterations,
        relative_residual: relative_residual(&sys.matrix, &x, &sys.rhs),
        seconds,
    };
    Ok(Solution {
        field: sys.expand(&x),
        stats,
    })
}
