//! Preconditioned conjugate gradients with optional Jacobi scaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Stop when ||r|| / ||b|| drops below this.
    pub rel_tol: f64,
    /// Iteration cap; `None` means 10 * n.
    pub max_iters: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_tol: 1e-10,
            max_iters: None,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
    /// True when the search direction lost positive curvature (p' A p <= 0),
    /// which for an SPD system only happens through roundoff.
    pub breakdown: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` from a zero initial guess. The matrix must be symmetric
/// positive definite; the diagonal must be strictly positive.
pub fn pcg(a: &CsrMatrix, b: &[f64], config: &SolverConfig) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n;
    if b.len() != n {
        return Err(Error::InvalidInput(format!(
            "rhs length {} does not match matrix size {n}",
            b.len()
        )));
    }
    let max_iters = config.max_iters.unwrap_or(10 * n.max(1));
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                relative_residual: 0.0,
                breakdown: false,
            },
        ));
    }

    let inv_diag: Vec<f64> = match config.preconditioner {
        Preconditioner::Jacobi => {
            let diag = a.diagonal();
            if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry {i} is {} (Jacobi preconditioner needs it positive)",
                    diag[i]
                )));
            }
            diag.iter().map(|d| 1.0 / d).collect()
        }
        Preconditioner::None => vec![1.0; n],
    };

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    let mut best_x = x.clone();
    let mut best_rel = 1.0f64;

    for iter in 1..=max_iters {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Ok((
                x,
                SolveStats {
                    iterations: iter - 1,
                    relative_residual: best_rel,
                    breakdown: true,
                },
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm(&r) / b_norm;
        if rel < best_rel {
            best_rel = rel;
            best_x.copy_from_slice(&x);
        }
        if rel <= config.rel_tol {
            return Ok((
                x,
                SolveStats {
                    iterations: iter,
                    relative_residual: rel,
                    breakdown: false,
                },
            ));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    Err(Error::SolverMaxIters {
        iterations: max_iters,
        relative_residual: best_rel,
        best_iterate: best_x,
    })
}
