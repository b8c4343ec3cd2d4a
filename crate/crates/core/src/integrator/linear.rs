//! Linear solvers for the Newton correction: sparse LU with a reusable
//! symbolic factorisation, and restarted GMRES with point-block
//! preconditioners.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::MatMut;
use nalgebra::SMatrix;

use super::{LinearSolverKind, NewtonConfig, Preconditioner};
use crate::error::{Error, Result};

type Block = SMatrix<f64, 5, 5>;

/// Coordinate pattern of the system matrix, shared by every assembly.
pub(crate) struct Pattern {
    pub size: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

pub(crate) enum Solver {
    Direct(Direct),
    Gmres(Gmres),
}

impl Solver {
    pub fn new(pattern: &Pattern, cfg: &NewtonConfig, npoints: usize) -> Result<Self> {
        Ok(match cfg.linear_solver {
            LinearSolverKind::Direct => Solver::Direct(Direct::new(pattern)?),
            LinearSolverKind::Gmres => Solver::Gmres(Gmres::new(pattern, cfg, npoints)),
        })
    }

    /// Solves `A x = b` in place, returning the number of inner iterations.
    pub fn solve(&mut self, values: &[f64], b: &mut [f64]) -> Result<usize> {
        match self {
            Solver::Direct(d) => d.solve(values, b).map(|_| 1),
            Solver::Gmres(g) => g.solve(values, b),
        }
    }
}

pub(crate) struct Direct {
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu: SymbolicLu<usize>,
}

impl Direct {
    fn new(p: &Pattern) -> Result<Self> {
        let idx: Vec<_> = p.rows.iter().zip(&p.cols).map(|(r, c)| Pair::new(*r, *c)).collect();
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(p.size, p.size, &idx)
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        let lu = SymbolicLu::try_new(symbolic.as_ref())
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        Ok(Direct {
            symbolic,
            argsort,
            lu,
        })
    }

    fn solve(&mut self, values: &[f64], b: &mut [f64]) -> Result<()> {
        let mat = SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, values)
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        let lu = Lu::try_new_with_symbolic(self.lu.clone(), mat.as_ref())
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
        let n = b.len();
        lu.solve_in_place(MatMut::from_column_major_slice_mut(b, n, 1));
        Ok(())
    }
}

/// Compressed-row matrix with duplicates merged, refillable in place.
struct Csr {
    ptr: Vec<usize>,
    col: Vec<usize>,
    /// position in `col`/`val` of every pattern entry
    slot: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    fn new(p: &Pattern) -> Self {
        let mut order: Vec<usize> = (0..p.rows.len()).collect();
        order.sort_by_key(|&e| (p.rows[e], p.cols[e]));
        let mut ptr = vec![0; p.size + 1];
        let mut col = Vec::new();
        let mut slot = vec![0; p.rows.len()];
        let mut last = None;
        for e in order {
            let key = (p.rows[e], p.cols[e]);
            if last != Some(key) {
                col.push(key.1);
                ptr[key.0 + 1] += 1;
                last = Some(key);
            }
            slot[e] = col.len() - 1;
        }
        for r in 0..p.size {
            ptr[r + 1] += ptr[r];
        }
        let val = vec![0.0; col.len()];
        Csr {
            ptr,
            col,
            slot,
            val,
        }
    }

    fn fill(&mut self, values: &[f64]) {
        self.val.iter_mut().for_each(|v| *v = 0.0);
        for (e, v) in values.iter().enumerate() {
            self.val[self.slot[e]] += v;
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for e in self.ptr[r]..self.ptr[r + 1] {
                s += self.val[e] * x[self.col[e]];
            }
            *yr = s;
        }
    }
}

/// Point-block view: unknown `b * npoints + k` belongs to point `k`,
/// component `b`.
struct BlockCsr {
    npoints: usize,
    ptr: Vec<usize>,
    col: Vec<usize>,
    diag: Vec<usize>,
    blocks: Vec<Block>,
}

impl BlockCsr {
    fn pattern(csr: &Csr, npoints: usize) -> Self {
        let mut sets = vec![Vec::new(); npoints];
        for r in 0..csr.ptr.len() - 1 {
            for e in csr.ptr[r]..csr.ptr[r + 1] {
                sets[r % npoints].push(csr.col[e] % npoints);
            }
        }
        let mut ptr = vec![0];
        let mut col = Vec::new();
        let mut diag = Vec::with_capacity(npoints);
        for (k, s) in sets.iter_mut().enumerate() {
            s.push(k);
            s.sort_unstable();
            s.dedup();
            diag.push(col.len() + s.binary_search(&k).unwrap());
            col.extend_from_slice(s);
            ptr.push(col.len());
        }
        let blocks = vec![Block::zeros(); col.len()];
        BlockCsr {
            npoints,
            ptr,
            col,
            diag,
            blocks,
        }
    }

    fn find(&self, row: usize, col: usize) -> Option<usize> {
        let s = &self.col[self.ptr[row]..self.ptr[row + 1]];
        s.binary_search(&col).ok().map(|p| self.ptr[row] + p)
    }

    fn fill(&mut self, csr: &Csr) {
        let np = self.npoints;
        self.blocks.iter_mut().for_each(|b| *b = Block::zeros());
        for r in 0..csr.ptr.len() - 1 {
            for e in csr.ptr[r]..csr.ptr[r + 1] {
                let c = csr.col[e];
                let pos = self.find(r % np, c % np).unwrap();
                self.blocks[pos][(r / np, c / np)] += csr.val[e];
            }
        }
    }
}

fn gather(x: &[f64], np: usize, k: usize) -> nalgebra::SVector<f64, 5> {
    nalgebra::SVector::<f64, 5>::from_fn(|b, _| x[b * np + k])
}

fn scatter(y: &mut [f64], np: usize, k: usize, v: &nalgebra::SVector<f64, 5>) {
    for b in 0..5 {
        y[b * np + k] = v[b];
    }
}

enum Precond {
    Identity,
    Jacobi(Vec<Block>),
    Ilu(BlockCsr),
}

impl Precond {
    fn setup(kind: Preconditioner, csr: &Csr, blocks: &mut Option<BlockCsr>, np: usize) -> Result<Self> {
        if kind == Preconditioner::None {
            return Ok(Precond::Identity);
        }
        let bc = blocks.get_or_insert_with(|| BlockCsr::pattern(csr, np));
        bc.fill(csr);
        let singular = || Error::LinearSolver("singular diagonal block in preconditioner".into());
        match kind {
            Preconditioner::BlockJacobi => {
                let inv = bc
                    .diag
                    .iter()
                    .map(|&d| bc.blocks[d].try_inverse().ok_or_else(singular))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Precond::Jacobi(inv))
            }
            _ => {
                let mut f = BlockCsr {
                    npoints: bc.npoints,
                    ptr: bc.ptr.clone(),
                    col: bc.col.clone(),
                    diag: bc.diag.clone(),
                    blocks: bc.blocks.clone(),
                };
                // block ILU(0): L is unit lower, U keeps inverted diagonal blocks
                for i in 0..np {
                    for e in f.ptr[i]..f.diag[i] {
                        let k = f.col[e];
                        let lik = f.blocks[e] * f.blocks[f.diag[k]];
                        f.blocks[e] = lik;
                        for ek in f.diag[k] + 1..f.ptr[k + 1] {
                            let j = f.col[ek];
                            if let Some(pos) = f.find(i, j) {
                                let ukj = f.blocks[ek];
                                f.blocks[pos] -= lik * ukj;
                            }
                        }
                    }
                    let d = f.diag[i];
                    f.blocks[d] = f.blocks[d].try_inverse().ok_or_else(singular)?;
                }
                Ok(Precond::Ilu(f))
            }
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Precond::Identity => y.copy_from_slice(x),
            Precond::Jacobi(inv) => {
                let np = inv.len();
                for (k, m) in inv.iter().enumerate() {
                    scatter(y, np, k, &(m * gather(x, np, k)));
                }
            }
            Precond::Ilu(f) => {
                let np = f.npoints;
                let mut z: Vec<_> = (0..np).map(|k| gather(x, np, k)).collect();
                for i in 0..np {
                    let mut s = z[i];
                    for e in f.ptr[i]..f.diag[i] {
                        s -= f.blocks[e] * z[f.col[e]];
                    }
                    z[i] = s;
                }
                for i in (0..np).rev() {
                    let mut s = z[i];
                    for e in f.diag[i] + 1..f.ptr[i + 1] {
                        s -= f.blocks[e] * z[f.col[e]];
                    }
                    z[i] = f.blocks[f.diag[i]] * s;
                }
                for (k, v) in z.iter().enumerate() {
                    scatter(y, np, k, v);
                }
            }
        }
    }
}

pub(crate) struct Gmres {
    csr: Csr,
    blocks: Option<BlockCsr>,
    npoints: usize,
    restart: usize,
    tol: f64,
    max_iter: usize,
    precond: Preconditioner,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl Gmres {
    fn new(p: &Pattern, cfg: &NewtonConfig, npoints: usize) -> Self {
        Gmres {
            csr: Csr::new(p),
            blocks: None,
            npoints,
            restart: cfg.gmres_restart,
            tol: cfg.gmres_tol,
            max_iter: cfg.gmres_max_iter,
            precond: cfg.preconditioner,
        }
    }

    /// Right-preconditioned restarted GMRES from a zero initial guess; the
    /// relative tolerance applies to the unpreconditioned residual.
    fn solve(&mut self, values: &[f64], b: &mut [f64]) -> Result<usize> {
        self.csr.fill(values);
        let m = Precond::setup(self.precond, &self.csr, &mut self.blocks, self.npoints)?;
        let n = b.len();
        let bnorm = norm(b);
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok(0);
        }
        let target = self.tol * bnorm;
        let mut r = b.to_vec();
        let mut total = 0;
        let mut tmp = vec![0.0; n];
        let mut w = vec![0.0; n];
        while total < self.max_iter {
            let beta = norm(&r);
            if beta <= target {
                break;
            }
            let mm = self.restart;
            let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
            let mut z: Vec<Vec<f64>> = Vec::with_capacity(mm);
            let mut h = vec![vec![0.0; mm]; mm + 1];
            let (mut cs, mut sn) = (vec![0.0; mm], vec![0.0; mm]);
            let mut gvec = vec![0.0; mm + 1];
            gvec[0] = beta;
            let mut used = 0;
            for jj in 0..mm {
                let mut zj = vec![0.0; n];
                m.apply(&v[jj], &mut zj);
                self.csr.apply(&zj, &mut w);
                z.push(zj);
                for ii in 0..=jj {
                    h[ii][jj] = dot(&w, &v[ii]);
                    for (wk, vk) in w.iter_mut().zip(&v[ii]) {
                        *wk -= h[ii][jj] * vk;
                    }
                }
                h[jj + 1][jj] = norm(&w);
                for ii in 0..jj {
                    let t = cs[ii] * h[ii][jj] + sn[ii] * h[ii + 1][jj];
                    h[ii + 1][jj] = -sn[ii] * h[ii][jj] + cs[ii] * h[ii + 1][jj];
                    h[ii][jj] = t;
                }
                let rho = h[jj][jj].hypot(h[jj + 1][jj]);
                cs[jj] = h[jj][jj] / rho;
                sn[jj] = h[jj + 1][jj] / rho;
                h[jj][jj] = rho;
                let hn = h[jj + 1][jj];
                h[jj + 1][jj] = 0.0;
                gvec[jj + 1] = -sn[jj] * gvec[jj];
                gvec[jj] *= cs[jj];
                used = jj + 1;
                total += 1;
                if gvec[jj + 1].abs() <= target || total >= self.max_iter || hn == 0.0 {
                    break;
                }
                v.push(w.iter().map(|x| x / hn).collect());
            }
            let mut y = vec![0.0; used];
            for ii in (0..used).rev() {
                let mut s = gvec[ii];
                for kk in ii + 1..used {
                    s -= h[ii][kk] * y[kk];
                }
                y[ii] = s / h[ii][ii];
            }
            for (ii, yi) in y.iter().enumerate() {
                for (xk, zk) in x.iter_mut().zip(&z[ii]) {
                    *xk += yi * zk;
                }
            }
            self.csr.apply(&x, &mut tmp);
            for k in 0..n {
                r[k] = b[k] - tmp[k];
            }
        }
        if !(norm(&r) <= target) {
            return Err(Error::LinearSolver(format!(
                "gmres stalled after {total} iterations at relative residual {:e}",
                norm(&r) / bnorm
            )));
        }
        b.copy_from_slice(&x);
        Ok(total)
    }
}
