//! Implicit variational time stepping.
//!
//! One step solves the midpoint-type nonlinear system for `(V^{n+1},
//! B^{n+1}, P^{n+1/2})` given `(V^n, B^n)` with Newton's method. The
//! pressure is determined up to a constant; each Newton correction has its
//! mean pressure removed, so the mean of `P` is inherited from the initial
//! state.

mod linear;
mod system;

pub use system::{jacobian, residual, Jacobian};

use crate::dec::{Form1, Kind};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operators::{div_raw, max_abs};
use linear::{Pattern, Solver};
use system::{jacobian_entries, residual_raw, Level, BLOCKS};

/// Physical unknowns at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    /// Velocity, primal one-form.
    pub v: Form1,
    /// Magnetic field in Alfvén units, primal one-form.
    pub b: Form1,
    /// Total pressure at the primal vertices.
    pub p: Vec<f64>,
    pub t: f64,
}

impl State {
    pub fn new(v: Form1, b: Form1, p: Vec<f64>, t: f64) -> Result<Self> {
        v.grid.check_same(&b.grid)?;
        Kind::Primal.expect(v.kind)?;
        Kind::Primal.expect(b.kind)?;
        v.grid.check_len(p.len())?;
        Ok(State { v, b, p, t })
    }

    pub fn grid(&self) -> &Grid {
        &self.v.grid
    }

    pub(crate) fn check_compatible(&self, other: &State) -> Result<()> {
        self.grid().check_same(other.grid())
    }

    /// Unknown vector `[V^x, V^y, B^x, B^y, P]`.
    pub fn pack(&self) -> Vec<f64> {
        [&self.v.x, &self.v.y, &self.b.x, &self.b.y, &self.p]
            .iter()
            .flat_map(|a| a.iter().copied())
            .collect()
    }

    pub fn unpack(grid: Grid, u: &[f64], t: f64) -> Result<Self> {
        let n = grid.len();
        grid.check_len(u.len() / BLOCKS)?;
        if u.len() != BLOCKS * n {
            return Err(Error::ShapeMismatch {
                expected: BLOCKS * n,
                found: u.len(),
            });
        }
        let part = |b: usize| u[b * n..(b + 1) * n].to_vec();
        State::new(
            Form1::new(grid, Kind::Primal, part(0), part(1))?,
            Form1::new(grid, Kind::Primal, part(2), part(3))?,
            part(4),
            t,
        )
    }

    /// The state under `t -> -t`: velocity and magnetic field change sign,
    /// the pressure does not.
    pub fn reversed(&self) -> State {
        let mut s = self.clone();
        s.v.scale(-1.0);
        s.b.scale(-1.0);
        s
    }

    pub fn div_v_max(&self) -> f64 {
        max_abs(&div_raw(self.grid(), &self.v.x, &self.v.y))
    }

    pub fn div_b_max(&self) -> f64 {
        max_abs(&div_raw(self.grid(), &self.b.x, &self.b.y))
    }

    pub fn is_finite(&self) -> bool {
        self.pack().iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearSolverKind {
    Direct,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preconditioner {
    None,
    BlockJacobi,
    Ilu,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NewtonConfig {
    /// Absolute tolerance on the max-norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
    pub linear_solver: LinearSolverKind,
    pub gmres_restart: usize,
    pub gmres_tol: f64,
    pub gmres_max_iter: usize,
    pub preconditioner: Preconditioner,
    /// Start Newton from `2 s^n - s^{n-1}` instead of `s^n`.
    pub extrapolate: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-10,
            max_iter: 20,
            linear_solver: LinearSolverKind::Direct,
            gmres_restart: 50,
            gmres_tol: 1e-10,
            gmres_max_iter: 2000,
            preconditioner: Preconditioner::Ilu,
            extrapolate: false,
        }
    }
}

impl NewtonConfig {
    /// Defaults with the linear solver picked by grid size: direct up to
    /// 64x64 points, preconditioned GMRES above.
    pub fn for_grid(grid: &Grid) -> Self {
        let mut cfg = NewtonConfig::default();
        if grid.len() > 64 * 64 {
            cfg.linear_solver = LinearSolverKind::Gmres;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: &str| {
            Err(Error::ConfigValue {
                field: field.into(),
                message: message.into(),
            })
        };
        if !(self.tol > 0.0) {
            return bad("tol", "tol must be positive");
        }
        if self.max_iter < 1 {
            return bad("max_iter", "max_iter must be at least 1");
        }
        if self.gmres_restart < 1 {
            return bad("gmres_restart", "gmres_restart must be at least 1");
        }
        if !(self.gmres_tol > 0.0 && self.gmres_tol < 1.0) {
            return bad("gmres_tol", "gmres_tol must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StepReport {
    pub newton_iterations: usize,
    pub final_residual_norm: f64,
    pub linear_iterations_total: usize,
}

/// Reusable Newton solver for a fixed grid and time step: the sparsity
/// pattern and the symbolic factorisation are computed once.
pub struct Stepper {
    grid: Grid,
    ht: f64,
    cfg: NewtonConfig,
    solver: Solver,
    values: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: Grid, ht: f64, cfg: NewtonConfig) -> Result<Self> {
        if !(ht > 0.0 && ht.is_finite()) {
            return Err(Error::InvalidTimeStep(format!("ht must be positive, got {ht}")));
        }
        cfg.validate()?;
        faer::set_global_parallelism(faer::Par::Seq);
        let n = grid.len();
        let zeros = vec![0.0; BLOCKS * n];
        let lvl = Level::from_packed(&zeros, n);
        let mut pattern = Pattern {
            size: BLOCKS * n,
            rows: Vec::new(),
            cols: Vec::new(),
        };
        jacobian_entries(&grid, &lvl, &lvl, ht, |r, c, _| {
            pattern.rows.push(r);
            pattern.cols.push(c);
        });
        // gauge entry: ties the first divergence row to the first pressure
        pattern.rows.push(4 * n);
        pattern.cols.push(4 * n);
        let solver = Solver::new(&pattern, &cfg, n)?;
        let values = Vec::with_capacity(pattern.rows.len());
        Ok(Stepper {
            grid,
            ht,
            cfg,
            solver,
            values,
        })
    }

    pub fn ht(&self) -> f64 {
        self.ht
    }

    pub fn config(&self) -> &NewtonConfig {
        &self.cfg
    }

    /// Advances `s` by one step, starting Newton from `guess` (or `s`).
    pub fn step(&mut self, s: &State, guess: Option<&State>) -> Result<(State, StepReport)> {
        s.grid().check_same(&self.grid)?;
        let g = self.grid;
        let n = g.len();
        let old = s.pack();
        let mut u = match guess {
            Some(x) => {
                x.grid().check_same(&g)?;
                x.pack()
            }
            None => old.clone(),
        };
        let ht = self.ht;
        let mut r = vec![0.0; BLOCKS * n];
        residual_raw(&g, &Level::from_packed(&old, n), &Level::from_packed(&u, n), ht, &mut r);
        let mut history = vec![max_abs(&r)];
        let mut linear_total = 0;
        for it in 1..=self.cfg.max_iter {
            self.values.clear();
            let values = &mut self.values;
            jacobian_entries(&g, &Level::from_packed(&old, n), &Level::from_packed(&u, n), ht, |_, _, v| {
                values.push(v)
            });
            values.push(1.0);
            let mut delta: Vec<f64> = r.iter().map(|x| -x).collect();
            linear_total += self.solver.solve(&self.values, &mut delta)?;
            let mean = delta[4 * n..].iter().sum::<f64>() / n as f64;
            delta[4 * n..].iter_mut().for_each(|x| *x -= mean);
            for (uk, dk) in u.iter_mut().zip(&delta) {
                *uk += dk;
            }
            residual_raw(&g, &Level::from_packed(&old, n), &Level::from_packed(&u, n), ht, &mut r);
            let norm = r.iter().fold(0.0_f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) });
            if !norm.is_finite() {
                return Err(Error::Diverged { iteration: it });
            }
            history.push(norm);
            if norm <= self.cfg.tol {
                let next = State::unpack(g, &u, s.t + ht)?;
                return Ok((
                    next,
                    StepReport {
                        newton_iterations: it,
                        final_residual_norm: norm,
                        linear_iterations_total: linear_total,
                    },
                ));
            }
        }
        Err(Error::NoConvergence {
            iterations: self.cfg.max_iter,
            history,
        })
    }
}

/// One implicit step from `s` with Newton started at `s`.
pub fn newton_solve(s: &State, ht: f64, cfg: &NewtonConfig) -> Result<(State, StepReport)> {
    Stepper::new(*s.grid(), ht, cfg.clone())?.step(s, None)
}

/// Information handed to the observer after each completed step.
pub struct StepInfo<'a> {
    /// 1-based index of the step just taken.
    pub step: usize,
    pub previous: &'a State,
    pub state: &'a State,
    pub report: &'a StepReport,
}

/// Takes `n_steps` steps of size `ht`, calling `observer` after each.
/// Failures are wrapped with the index of the failing step.
pub fn advance(
    s: &State,
    ht: f64,
    n_steps: usize,
    cfg: &NewtonConfig,
    mut observer: impl FnMut(&StepInfo) -> Result<()>,
) -> Result<State> {
    if n_steps < 1 {
        return Err(Error::InvalidTimeStep("n_steps must be at least 1".into()));
    }
    let mut stepper = Stepper::new(*s.grid(), ht, cfg.clone())?;
    let mut prev: Option<State> = None;
    let mut cur = s.clone();
    for step in 1..=n_steps {
        let guess = match (&prev, cfg.extrapolate) {
            (Some(p), true) => {
                let u: Vec<f64> = cur.pack().iter().zip(p.pack()).map(|(a, b)| 2.0 * a - b).collect();
                Some(State::unpack(*s.grid(), &u, cur.t)?)
            }
            _ => None,
        };
        let (next, report) = stepper
            .step(&cur, guess.as_ref())
            .map_err(|e| Error::StepFailed {
                step,
                source: Box::new(e),
            })?;
        observer(&StepInfo {
            step,
            previous: &cur,
            state: &next,
            report: &report,
        })?;
        prev = Some(std::mem::replace(&mut cur, next));
    }
    Ok(cur)
}
