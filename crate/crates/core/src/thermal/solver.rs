// SPDX-License-Identifier: Apache-2.0

//! Matrix-free conjugate gradient on the layered conductance network,
//! preconditioned with exact solves of each vertical cell column.

use crate::error::{Error, Result};

use super::ThermalStack;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once `‖b − Gx‖ ≤ rel_tol · ‖b‖`.
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            rel_tol: 1e-8,
            max_iterations: 20_000,
        }
    }
}

/// Thermal conductances (W/K) of a uniform layered grid. Layers are
/// homogeneous, so lateral and vertical conductances are per-layer scalars.
#[derive(Debug, Clone)]
pub struct ConductanceGrid {
    nx: usize,
    ny: usize,
    nl: usize,
    /// Between x-neighbours in layer l.
    gx: Vec<f64>,
    /// Between y-neighbours in layer l.
    gy: Vec<f64>,
    /// Between layer l and l + 1 (len nl - 1).
    gz: Vec<f64>,
    /// Top-layer cell to ambient.
    g_conv: f64,
}

pub(crate) struct Solution {
    pub rise: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

impl ConductanceGrid {
    /// `dx`, `dy` are cell pitches in m.
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, stack: &ThermalStack) -> Result<Self> {
        stack.validate()?;
        if nx == 0 || ny == 0 || !(dx > 0.0) || !(dy > 0.0) {
            return Err(Error::InvalidInput("empty thermal grid".into()));
        }
        let area = dx * dy;
        let gx = stack
            .layers
            .iter()
            .map(|l| l.conductivity * l.thickness * dy / dx)
            .collect();
        let gy = stack
            .layers
            .iter()
            .map(|l| l.conductivity * l.thickness * dx / dy)
            .collect();
        let gz = stack
            .layers
            .windows(2)
            .map(|w| {
                let r = 0.5 * w[0].thickness / (w[0].conductivity * area)
                    + 0.5 * w[1].thickness / (w[1].conductivity * area);
                1.0 / r
            })
            .collect();
        Ok(ConductanceGrid {
            nx,
            ny,
            nl: stack.layers.len(),
            gx,
            gy,
            gz,
            g_conv: stack.convection_h * area,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nl
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nl)
    }

    #[inline]
    fn idx(&self, l: usize, j: usize, i: usize) -> usize {
        (l * self.ny + j) * self.nx + i
    }

    /// Diagonal entry of the conductance matrix at a cell.
    #[inline]
    fn diag(&self, l: usize, j: usize, i: usize) -> f64 {
        let mut d = 0.0;
        let nbx = (i > 0) as u8 + (i + 1 < self.nx) as u8;
        let nby = (j > 0) as u8 + (j + 1 < self.ny) as u8;
        d += self.gx[l] * nbx as f64 + self.gy[l] * nby as f64;
        if l > 0 {
            d += self.gz[l - 1];
        }
        if l + 1 < self.nl {
            d += self.gz[l];
        } else {
            d += self.g_conv;
        }
        d
    }

    /// `y = G x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (nx, ny, nl) = (self.nx, self.ny, self.nl);
        let plane = nx * ny;
        for l in 0..nl {
            let (gx, gy) = (self.gx[l], self.gy[l]);
            for j in 0..ny {
                for i in 0..nx {
                    let k = self.idx(l, j, i);
                    let xk = x[k];
                    let mut acc = self.diag(l, j, i) * xk;
                    if i > 0 {
                        acc -= gx * x[k - 1];
                    }
                    if i + 1 < nx {
                        acc -= gx * x[k + 1];
                    }
                    if j > 0 {
                        acc -= gy * x[k - nx];
                    }
                    if j + 1 < ny {
                        acc -= gy * x[k + nx];
                    }
                    if l > 0 {
                        acc -= self.gz[l - 1] * x[k - plane];
                    }
                    if l + 1 < nl {
                        acc -= self.gz[l] * x[k + plane];
                    }
                    y[k] = acc;
                }
            }
        }
    }

    /// Dense copy of the matrix, for small grids.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut cols = vec![vec![0.0; n]; n];
        let mut e = vec![0.0; n];
        for (c, col) in cols.iter_mut().enumerate() {
            e[c] = 1.0;
            self.apply(&e, col);
            e[c] = 0.0;
        }
        // symmetric, so columns are rows
        cols
    }

    pub(crate) fn solve(
        &self,
        rhs: &[f64],
        guess: Option<&[f64]>,
        opts: &SolverOptions,
    ) -> Result<Solution> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        let b_norm = norm(rhs);
        if b_norm == 0.0 {
            return Ok(Solution {
                rise: vec![0.0; n],
                iterations: 0,
                residual: 0.0,
            });
        }
        let pc = ColumnPreconditioner::new(self);
        let mut x = match guess {
            Some(g) if g.len() == n => g.to_vec(),
            _ => vec![0.0; n],
        };
        let mut r = vec![0.0; n];
        self.apply(&x, &mut r);
        for (rk, bk) in r.iter_mut().zip(rhs) {
            *rk = bk - *rk;
        }
        let mut z = vec![0.0; n];
        pc.apply(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        let mut rel = norm(&r) / b_norm;
        let mut it = 0;
        while rel > opts.rel_tol {
            if it >= opts.max_iterations {
                return Err(Error::NonConvergence {
                    iterations: it,
                    residual: rel,
                });
            }
            self.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::NonConvergence {
                    iterations: it,
                    residual: rel,
                });
            }
            let alpha = rz / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            rel = norm(&r) / b_norm;
            it += 1;
            if rel <= opts.rel_tol {
                break;
            }
            pc.apply(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        Ok(Solution {
            rise: x,
            iterations: it,
            residual: rel,
        })
    }
}

/// Block-Jacobi preconditioner whose blocks are the tridiagonal systems of
/// each vertical column, factored once (Thomas algorithm).
struct ColumnPreconditioner<'a> {
    grid: &'a ConductanceGrid,
    /// Modified super-diagonal `c'` per cell.
    c_prime: Vec<f64>,
    /// `1 / (b_l − a_l c'_{l−1})` per cell.
    inv_denom: Vec<f64>,
}

impl<'a> ColumnPreconditioner<'a> {
    fn new(grid: &'a ConductanceGrid) -> Self {
        let n = grid.len();
        let mut c_prime = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let mut prev_c = 0.0;
                for l in 0..grid.nl {
                    let k = grid.idx(l, j, i);
                    let a = if l > 0 { -grid.gz[l - 1] } else { 0.0 };
                    let c = if l + 1 < grid.nl { -grid.gz[l] } else { 0.0 };
                    let denom = grid.diag(l, j, i) - a * prev_c;
                    inv_denom[k] = 1.0 / denom;
                    c_prime[k] = c / denom;
                    prev_c = c_prime[k];
                }
            }
        }
        ColumnPreconditioner {
            grid,
            c_prime,
            inv_denom,
        }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let g = self.grid;
        let plane = g.nx * g.ny;
        for col in 0..plane {
            let mut prev = 0.0;
            for l in 0..g.nl {
                let k = l * plane + col;
                let a = if l > 0 { -g.gz[l - 1] } else { 0.0 };
                prev = (r[k] - a * prev) * self.inv_denom[k];
                z[k] = prev;
            }
            for l in (0..g.nl - 1).rev() {
                let k = l * plane + col;
                z[k] -= self.c_prime[k] * z[k + plane];
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
