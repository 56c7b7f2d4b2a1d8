//! Dense Newton iteration for small nonlinear systems: forward-difference
//! Jacobians, LU with partial pivoting, and a residual-halving line search.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Small dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks_exact(self.cols.max(1))
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `A x = b` by LU factorisation with partial pivoting.
///
/// A pivot smaller than `1e-14 * |A|_inf` is reported as
/// [`Error::SingularMatrix`].
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.cols(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let threshold = 1e-14 * a.norm_inf();
    let mut lu = a.clone();
    let mut x = b.to_vec();

    for col in 0..n {
        let (piv_row, piv) =
            (col..n)
                .map(|r| (r, lu[(r, col)].abs()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if !(piv > threshold) {
            return Err(Error::SingularMatrix {
                column: col,
                pivot: piv,
                threshold,
            });
        }
        if piv_row != col {
            for j in 0..n {
                lu.data.swap(col * n + j, piv_row * n + j);
            }
            x.swap(col, piv_row);
        }
        let p = lu[(col, col)];
        for r in col + 1..n {
            let factor = lu[(r, col)] / p;
            if factor == 0.0 {
                continue;
            }
            lu[(r, col)] = factor;
            for j in col + 1..n {
                lu[(r, j)] -= factor * lu[(col, j)];
            }
            x[r] -= factor * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= lu[(i, j)] * x[j];
        }
        x[i] = s / lu[(i, i)];
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Target for the residual max-norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative forward-difference perturbation.
    pub fd_step_relative: f64,
    /// Step halvings allowed per iteration while the residual grows; 0
    /// disables damping.
    pub max_damping_halvings: usize,
    /// Corrections taken even when the starting residual already meets `tol`.
    pub min_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            fd_step_relative: f64::EPSILON.sqrt(),
            max_damping_halvings: 30,
            min_iter: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonResult {
    pub solution: Vec<f64>,
    /// Number of Jacobian-and-solve cycles performed.
    pub iterations: usize,
    pub final_residual_norm: f64,
    pub converged: bool,
}

/// A square nonlinear system `F(x) = 0`.
pub trait NonlinearSystem {
    fn residual(&mut self, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// Fills `jac` with `dF/dx` at `x`, given `fx = F(x)`. Defaults to
    /// forward differences.
    fn jacobian(&mut self, x: &[f64], fx: &[f64], jac: &mut Matrix, fd_step: f64) -> Result<()> {
        fd_jacobian_into(self, x, fx, fd_step, jac)
    }
}

struct FnSystem<F>(F);

impl<F> NonlinearSystem for FnSystem<F>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    fn residual(&mut self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (self.0)(x, out)
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(component) => Err(Error::NonFiniteEvaluation { component }),
        None => Ok(()),
    }
}

pub(crate) fn fd_jacobian_into<S: NonlinearSystem + ?Sized>(
    sys: &mut S,
    x: &[f64],
    fx: &[f64],
    fd_step: f64,
    jac: &mut Matrix,
) -> Result<()> {
    let mut xp = x.to_vec();
    let mut fp = vec![0.0; fx.len()];
    for i in 0..x.len() {
        let h = fd_step * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        // exact representable perturbation
        let h = xp[i] - x[i];
        sys.residual(&xp, &mut fp)?;
        check_finite(&fp)?;
        for (r, (a, b)) in fp.iter().zip(fx).enumerate() {
            jac[(r, i)] = (a - b) / h;
        }
        xp[i] = x[i];
    }
    Ok(())
}

/// Forward-difference Jacobian of `f` at `x`, with per-column step
/// `fd_step_relative * max(1, |x_i|)`.
pub fn fd_jacobian<F>(f: F, x: &[f64], fd_step_relative: f64) -> Result<Matrix>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let mut sys = FnSystem(f);
    let mut fx = vec![0.0; x.len()];
    sys.residual(x, &mut fx)?;
    check_finite(&fx)?;
    let mut jac = Matrix::zeros(fx.len(), x.len());
    fd_jacobian_into(&mut sys, x, &fx, fd_step_relative, &mut jac)?;
    Ok(jac)
}

/// Newton's method on a closure `F(x, out)`, using forward-difference
/// Jacobians.
pub fn newton_solve<F>(f: F, x0: &[f64], opts: &NewtonOptions) -> Result<NewtonResult>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    newton_solve_system(&mut FnSystem(f), x0, opts)
}

/// Newton's method on any [`NonlinearSystem`].
///
/// Stops when `|F(x)|_inf <= tol` or after `max_iter` linearisations. A
/// singular Jacobian is an error; running out of iterations is not, and is
/// reported through `converged = false`.
pub fn newton_solve_system<S: NonlinearSystem + ?Sized>(
    sys: &mut S,
    x0: &[f64],
    opts: &NewtonOptions,
) -> Result<NewtonResult> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = vec![0.0; n];
    sys.residual(&x, &mut fx)?;
    check_finite(&fx)?;
    let mut norm = norm_inf(&fx);
    let mut jac = Matrix::zeros(n, n);
    let mut trial = vec![0.0; n];
    let mut f_trial = vec![0.0; n];
    let mut iterations = 0;

    while (norm > opts.tol || iterations < opts.min_iter) && iterations < opts.max_iter {
        let polishing = norm <= opts.tol;
        let step = match sys
            .jacobian(&x, &fx, &mut jac, opts.fd_step_relative)
            .and_then(|_| lu_solve(&jac, &fx))
        {
            Ok(step) => step,
            Err(_) if polishing => break,
            Err(e) => return Err(e),
        };
        iterations += 1;

        let mut lambda = 1.0;
        let mut halvings = 0;
        let trial_norm = loop {
            for i in 0..n {
                trial[i] = x[i] - lambda * step[i];
            }
            let eval = sys
                .residual(&trial, &mut f_trial)
                .and_then(|_| check_finite(&f_trial));
            match eval {
                Ok(()) => {
                    let tn = norm_inf(&f_trial);
                    if tn <= norm || halvings >= opts.max_damping_halvings {
                        break tn;
                    }
                }
                Err(e) if halvings >= opts.max_damping_halvings => return Err(e),
                Err(_) => {}
            }
            lambda *= 0.5;
            halvings += 1;
        };
        x.copy_from_slice(&trial);
        fx.copy_from_slice(&f_trial);
        norm = trial_norm;
    }

    Ok(NewtonResult {
        solution: x,
        iterations,
        final_residual_norm: norm,
        converged: norm <= opts.tol,
    })
}
