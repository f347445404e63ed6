//! Thomas algorithm for tridiagonal systems.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TridiagError {
    #[error("band lengths inconsistent: n = {n}, sub = {sub}, sup = {sup}, rhs = {rhs}")]
    Shape {
        n: usize,
        sub: usize,
        sup: usize,
        rhs: usize,
    },
    #[error("zero pivot at row {0}")]
    ZeroPivot(usize),
    #[error("non-finite value in solution")]
    NonFinite,
}

/// Solve `A x = d` where `A` has sub-diagonal `sub` (length n-1), diagonal
/// `diag` (length n) and super-diagonal `sup` (length n-1).
///
/// `scratch` must hold n values; it is overwritten. No pivoting, so the
/// system must be diagonally dominant (row or column) for stability.
pub fn solve_into(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
    scratch: &mut [f64],
    x: &mut [f64],
) -> Result<(), TridiagError> {
    let n = diag.len();
    if n == 0
        || sub.len() + 1 != n
        || sup.len() + 1 != n
        || rhs.len() != n
        || scratch.len() != n
        || x.len() != n
    {
        return Err(TridiagError::Shape {
            n,
            sub: sub.len(),
            sup: sup.len(),
            rhs: rhs.len(),
        });
    }
    // scratch holds the modified super-diagonal, x the modified rhs
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(TridiagError::ZeroPivot(0));
    }
    if n > 1 {
        scratch[0] = sup[0] / pivot;
    }
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - sub[i - 1] * scratch[i - 1];
        if pivot == 0.0 {
            return Err(TridiagError::ZeroPivot(i));
        }
        if i < n - 1 {
            scratch[i] = sup[i] / pivot;
        }
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= scratch[i] * x[i + 1];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(TridiagError::NonFinite);
    }
    Ok(())
}

/// Allocating convenience wrapper around [`solve_into`].
pub fn solve(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, TridiagError> {
    let n = diag.len();
    let mut scratch = vec![0.0; n];
    let mut x = vec![0.0; n];
    solve_into(sub, diag, sup, rhs, &mut scratch, &mut x)?;
    Ok(x)
}
