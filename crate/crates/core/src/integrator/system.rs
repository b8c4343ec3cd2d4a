//! Residual and analytic Jacobian of the implicit step.
//!
//! Unknowns are stacked as `[V^x, V^y, B^x, B^y, P]` (each `nx * ny` long,
//! storage order of the grid); residual rows are stacked as x-momentum,
//! y-momentum, x-induction, y-induction and divergence, with row `k` of each
//! block located at storage slot `k` of its unknown.

use super::State;
use crate::error::Result;
use crate::grid::Grid;
use crate::operators::{bar_raw, curl_raw, div_raw, phi_raw, psi_raw};

pub(crate) const BLOCKS: usize = 5;

/// Fields of one time level as raw slices.
pub(crate) struct Level<'a> {
    pub vx: &'a [f64],
    pub vy: &'a [f64],
    pub bx: &'a [f64],
    pub by: &'a [f64],
    pub p: &'a [f64],
}

impl<'a> Level<'a> {
    pub fn of(s: &'a State) -> Self {
        Level {
            vx: &s.v.x,
            vy: &s.v.y,
            bx: &s.b.x,
            by: &s.b.y,
            p: &s.p,
        }
    }

    pub fn from_packed(u: &'a [f64], n: usize) -> Self {
        Level {
            vx: &u[..n],
            vy: &u[n..2 * n],
            bx: &u[2 * n..3 * n],
            by: &u[3 * n..4 * n],
            p: &u[4 * n..5 * n],
        }
    }
}

fn mid(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| 0.5 * (p + q)).collect()
}

pub(crate) fn residual_raw(g: &Grid, old: &Level, new: &Level, ht: f64, out: &mut [f64]) {
    let n = g.len();
    let (vbx, vby) = bar_raw(g, old.vx, old.vy, new.vx, new.vy);
    let (bbx, bby) = bar_raw(g, old.bx, old.by, new.bx, new.by);
    let cv = curl_raw(g, &mid(old.vx, new.vx), &mid(old.vy, new.vy));
    let cb = curl_raw(g, &mid(old.bx, new.bx), &mid(old.by, new.by));
    let (pvx, pvy) = psi_raw(g, &vbx, &vby, &cv);
    let (pbx, pby) = psi_raw(g, &bbx, &bby, &cb);
    let (fx, fy) = phi_raw(g, &vbx, &vby, &bbx, &bby);
    let div = div_raw(g, new.vx, new.vy);
    let p = new.p;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            let gx = (p[k] - p[g.at(i, j, -1, 0)]) / g.hx;
            let gy = (p[k] - p[g.at(i, j, 0, -1)]) / g.hy;
            out[k] = (new.vx[k] - old.vx[k]) / ht + pvx[k] - pbx[k] + gx;
            out[n + k] = (new.vy[k] - old.vy[k]) / ht + pvy[k] - pby[k] + gy;
            out[2 * n + k] = (new.bx[k] - old.bx[k]) / ht + fx[k];
            out[3 * n + k] = (new.by[k] - old.by[k]) / ht + fy[k];
            out[4 * n + k] = div[k];
        }
    }
}

/// Emits every Jacobian entry as `(row, col, value)`. The sequence of
/// `(row, col)` pairs depends only on the grid, so a symbolic structure built
/// from one call can be refilled from any other. Duplicates are summed.
pub(crate) fn jacobian_entries(
    g: &Grid,
    old: &Level,
    new: &Level,
    ht: f64,
    mut emit: impl FnMut(usize, usize, f64),
) {
    let n = g.len();
    let (vx_, vy_, bx_, by_, p_) = (0, n, 2 * n, 3 * n, 4 * n);
    let (vbx, vby) = bar_raw(g, old.vx, old.vy, new.vx, new.vy);
    let (bbx, bby) = bar_raw(g, old.bx, old.by, new.bx, new.by);
    let cv = curl_raw(g, &mid(old.vx, new.vx), &mid(old.vy, new.vy));
    let cb = curl_raw(g, &mid(old.bx, new.bx), &mid(old.by, new.by));
    let (ihx, ihy) = (1.0 / g.hx, 1.0 / g.hy);

    // d(bar^x[m]) and d(bar^y[m]) with respect to the new-level edges
    let s = |m: usize| {
        let (i, j) = g.ij(m);
        g.at(i, j, 0, -1)
    };
    let w = |m: usize| {
        let (i, j) = g.ij(m);
        g.at(i, j, -1, 0)
    };
    // d(curl[m]) for a field whose components start at columns ox, oy
    let curl_cols = |m: usize, ox: usize, oy: usize| {
        [
            (ox + m, 0.5 * ihy),
            (ox + s(m), -0.5 * ihy),
            (oy + m, -0.5 * ihx),
            (oy + w(m), 0.5 * ihx),
        ]
    };

    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            let nn = g.at(i, j, 0, 1);
            let e = g.at(i, j, 1, 0);

            // x-momentum
            let r = k;
            emit(r, vx_ + k, 1.0 / ht);
            emit(r, p_ + k, ihx);
            emit(r, p_ + w(k), -ihx);
            for (sign, ox, oy, bar_y, curl) in [(1.0, vx_, vy_, &vby, &cv), (-1.0, bx_, by_, &bby, &cb)] {
                for m in [k, nn] {
                    let a = sign * 0.5 * curl[m] * 0.25;
                    emit(r, oy + m, a);
                    emit(r, oy + w(m), a);
                    for (c, d) in curl_cols(m, ox, oy) {
                        emit(r, c, sign * 0.5 * bar_y[m] * d);
                    }
                }
            }

            // y-momentum
            let r = n + k;
            emit(r, vy_ + k, 1.0 / ht);
            emit(r, p_ + k, ihy);
            emit(r, p_ + s(k), -ihy);
            for (sign, ox, oy, bar_x, curl) in [(1.0, vx_, vy_, &vbx, &cv), (-1.0, bx_, by_, &bbx, &cb)] {
                for m in [k, e] {
                    let a = -sign * 0.5 * curl[m] * 0.25;
                    emit(r, ox + m, a);
                    emit(r, ox + s(m), a);
                    for (c, d) in curl_cols(m, ox, oy) {
                        emit(r, c, -sign * 0.5 * bar_x[m] * d);
                    }
                }
            }

            // induction: phi^x = (Q[n] - Q[k]) / hy, phi^y = -(Q[e] - Q[k]) / hx
            // with Q = Vbar^y Bbar^x - Vbar^x Bbar^y
            let dq = |r: usize, m: usize, f: f64, emit: &mut dyn FnMut(usize, usize, f64)| {
                let q = 0.25 * f;
                for (col, v) in [
                    (vy_, bbx[m]),
                    (bx_, vby[m]),
                    (vx_, -bby[m]),
                    (by_, -vbx[m]),
                ] {
                    let other = if col == vy_ || col == by_ { w(m) } else { s(m) };
                    emit(r, col + m, q * v);
                    emit(r, col + other, q * v);
                }
            };
            let r = 2 * n + k;
            emit(r, bx_ + k, 1.0 / ht);
            dq(r, nn, ihy, &mut emit);
            dq(r, k, -ihy, &mut emit);
            let r = 3 * n + k;
            emit(r, by_ + k, 1.0 / ht);
            dq(r, e, -ihx, &mut emit);
            dq(r, k, ihx, &mut emit);

            // divergence of V^{n+1}
            let r = 4 * n + k;
            emit(r, vx_ + e, ihx);
            emit(r, vx_ + k, -ihx);
            emit(r, vy_ + nn, ihy);
            emit(r, vy_ + k, -ihy);
        }
    }
}

/// Residual of the implicit step from `old` to the candidate `guess`.
///
/// Rows are stacked as x-momentum, y-momentum, x-induction, y-induction and
/// `div V^{n+1}`; see the module documentation for the ordering.
pub fn residual(old: &State, guess: &State, ht: f64) -> Result<Vec<f64>> {
    old.check_compatible(guess)?;
    let g = old.grid();
    let mut out = vec![0.0; BLOCKS * g.len()];
    residual_raw(g, &Level::of(old), &Level::of(guess), ht, &mut out);
    Ok(out)
}

/// Dense-free representation of the Jacobian: coordinate lists with
/// duplicate entries still present.
#[derive(Debug, Clone)]
pub struct Jacobian {
    pub size: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl Jacobian {
    /// `J x` with duplicates summed on the fly.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.size];
        for ((r, c), v) in self.rows.iter().zip(&self.cols).zip(&self.values) {
            y[*r] += v * x[*c];
        }
        y
    }

    /// Column `c` as a dense vector.
    pub fn column(&self, c: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.size];
        e[c] = 1.0;
        self.apply(&e)
    }
}

/// Exact Jacobian of [`residual`] with respect to the stacked unknowns
/// `[V^x, V^y, B^x, B^y, P]` of `guess`.
pub fn jacobian(old: &State, guess: &State, ht: f64) -> Result<Jacobian> {
    old.check_compatible(guess)?;
    let g = old.grid();
    let mut jac = Jacobian {
        size: BLOCKS * g.len(),
        rows: Vec::new(),
        cols: Vec::new(),
        values: Vec::new(),
    };
    jacobian_entries(g, &Level::of(old), &Level::of(guess), ht, |r, c, v| {
        jac.rows.push(r);
        jac.cols.push(c);
        jac.values.push(v);
    });
    Ok(jac)
}
