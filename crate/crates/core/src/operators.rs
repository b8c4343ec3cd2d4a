//! MHD stencils on the staggered grid: spatio-temporal averages, the
//! nonlinear terms ψ and φ, the staggered divergence and the pressure
//! gradient.
//!
//! Velocity and magnetic field are primal one-forms (`x` on horizontal edges,
//! `y` on vertical edges), averages and curls live at cell centres, and the
//! pressure and the divergence live at primal vertices. All stencils are
//! output-centred gathers with periodic wrap.

use crate::dec::{Form1, Kind};
use crate::error::Result;
use crate::grid::Grid;

/// One field at two consecutive time levels.
#[derive(Debug, Clone, Copy)]
pub struct EdgePair<'a> {
    pub old: &'a Form1,
    pub new: &'a Form1,
}

impl<'a> EdgePair<'a> {
    pub fn new(old: &'a Form1, new: &'a Form1) -> Result<Self> {
        old.grid.check_same(&new.grid)?;
        Kind::Primal.expect(old.kind)?;
        Kind::Primal.expect(new.kind)?;
        Ok(EdgePair { old, new })
    }

    pub fn grid(&self) -> &Grid {
        &self.old.grid
    }

    /// Time-midpoint values `½(f^n + f^{n+1})` on the edges.
    pub fn midpoint(&self) -> (Vec<f64>, Vec<f64>) {
        let mid = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect();
        (mid(&self.old.x, &self.new.x), mid(&self.old.y, &self.new.y))
    }
}

/// Four-point space-time averages of an edge field at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct BarField {
    pub grid: Grid,
    pub xbar: Vec<f64>,
    pub ybar: Vec<f64>,
}

pub fn bar_average(f: &EdgePair) -> BarField {
    let g = *f.grid();
    let (xbar, ybar) = bar_raw(&g, &f.old.x, &f.old.y, &f.new.x, &f.new.y);
    BarField { grid: g, xbar, ybar }
}

pub(crate) fn bar_raw(
    g: &Grid,
    x0: &[f64],
    y0: &[f64],
    x1: &[f64],
    y1: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let mut xb = vec![0.0; g.len()];
    let mut yb = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            let s = g.at(i, j, 0, -1);
            let w = g.at(i, j, -1, 0);
            xb[k] = 0.25 * (x0[s] + x0[k] + x1[s] + x1[k]);
            yb[k] = 0.25 * (y0[w] + y0[k] + y1[w] + y1[k]);
        }
    }
    (xb, yb)
}

/// Cell-centred `Δ_y w^x - Δ_x w^y` of an edge field.
pub(crate) fn curl_raw(g: &Grid, wx: &[f64], wy: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            c[k] = (wx[k] - wx[g.at(i, j, 0, -1)]) / g.hy - (wy[k] - wy[g.at(i, j, -1, 0)]) / g.hx;
        }
    }
    c
}

pub(crate) fn psi_raw(g: &Grid, xbar: &[f64], ybar: &[f64], curl: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut px = vec![0.0; g.len()];
    let mut py = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            let n = g.at(i, j, 0, 1);
            let e = g.at(i, j, 1, 0);
            px[k] = 0.5 * (ybar[k] * curl[k] + ybar[n] * curl[n]);
            py[k] = -0.5 * (xbar[k] * curl[k] + xbar[e] * curl[e]);
        }
    }
    (px, py)
}

/// Discrete `ψ(V̄, W)`: the averaged field `vbar` times the curl of the
/// time-midpoint of `w`, averaged back onto the edges.
pub fn psi_discrete(vbar: &BarField, w: &EdgePair) -> Result<(Vec<f64>, Vec<f64>)> {
    vbar.grid.check_same(w.grid())?;
    let g = &vbar.grid;
    let (mx, my) = w.midpoint();
    let c = curl_raw(g, &mx, &my);
    Ok(psi_raw(g, &vbar.xbar, &vbar.ybar, &c))
}

pub(crate) fn phi_raw(
    g: &Grid,
    vx: &[f64],
    vy: &[f64],
    bx: &[f64],
    by: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let q: Vec<f64> = (0..g.len()).map(|k| vy[k] * bx[k] - vx[k] * by[k]).collect();
    let r: Vec<f64> = (0..g.len()).map(|k| vx[k] * by[k] - vy[k] * bx[k]).collect();
    let mut fx = vec![0.0; g.len()];
    let mut fy = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            fx[k] = (q[g.at(i, j, 0, 1)] - q[k]) / g.hy;
            fy[k] = (r[g.at(i, j, 1, 0)] - r[k]) / g.hx;
        }
    }
    (fx, fy)
}

/// Discrete `φ(V̄, B̄)`, the induction term in flux form: the difference
/// quotient of the cell-centred cross product `V̄ × B̄` across each edge.
pub fn phi_discrete(vbar: &BarField, bbar: &BarField) -> Result<(Vec<f64>, Vec<f64>)> {
    vbar.grid.check_same(&bbar.grid)?;
    Ok(phi_raw(&vbar.grid, &vbar.xbar, &vbar.ybar, &bbar.xbar, &bbar.ybar))
}

pub(crate) fn div_raw(g: &Grid, vx: &[f64], vy: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            d[k] = (vx[g.at(i, j, 1, 0)] - vx[k]) / g.hx + (vy[g.at(i, j, 0, 1)] - vy[k]) / g.hy;
        }
    }
    d
}

/// Divergence of a primal one-form, located at the primal vertices.
pub fn div_staggered(v: &Form1) -> Result<Vec<f64>> {
    Kind::Primal.expect(v.kind)?;
    Ok(div_raw(&v.grid, &v.x, &v.y))
}

/// Gradient of a vertex-located pressure onto the primal edges.
pub fn grad_pressure(g: &Grid, p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    g.check_len(p.len())?;
    let mut gx = vec![0.0; g.len()];
    let mut gy = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            gx[k] = (p[k] - p[g.at(i, j, -1, 0)]) / g.hx;
            gy[k] = (p[k] - p[g.at(i, j, 0, -1)]) / g.hy;
        }
    }
    Ok((gx, gy))
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
