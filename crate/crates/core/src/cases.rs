//! Benchmark initial conditions.
//!
//! Edge components are point samples at edge midpoints. Cases that define a
//! magnetic potential build `B` from it with [`b_from_potential`], which is
//! solenoidal to roundoff; the others sample `B` directly. A velocity whose
//! discrete divergence exceeds `1e-12` is projected onto the solenoidal
//! fields.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::MatMut;

use crate::dec::{Form1, Kind};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::integrator::State;
use crate::operators::{div_raw, max_abs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    Alfven,
    OrszagTang,
    LoopCone,
    LoopSmooth,
    SheetSharp,
    SheetTanh,
}

impl CaseId {
    pub const ALL: [CaseId; 6] = [
        CaseId::Alfven,
        CaseId::OrszagTang,
        CaseId::LoopCone,
        CaseId::LoopSmooth,
        CaseId::SheetSharp,
        CaseId::SheetTanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Alfven => "alfven",
            CaseId::OrszagTang => "orszag_tang",
            CaseId::LoopCone => "loop_cone",
            CaseId::LoopSmooth => "loop_smooth",
            CaseId::SheetSharp => "sheet_sharp",
            CaseId::SheetTanh => "sheet_tanh",
        }
    }

    /// Grid of the benchmark: `(nx, ny, lx, ly, x0, y0)`.
    pub fn default_grid(self) -> (usize, usize, f64, f64, f64, f64) {
        match self {
            CaseId::Alfven | CaseId::SheetSharp | CaseId::SheetTanh => (32, 32, 2.0, 2.0, 0.0, 0.0),
            CaseId::OrszagTang => (64, 64, 2.0 * PI, 2.0 * PI, 0.0, 0.0),
            CaseId::LoopCone => (128, 64, 2.0, 1.0, -1.0, -0.5),
            CaseId::LoopSmooth => (64, 64, 2.0, 2.0, -1.0, -1.0),
        }
    }

    pub fn default_ht(self) -> f64 {
        match self {
            CaseId::Alfven | CaseId::SheetSharp | CaseId::SheetTanh => 0.1,
            _ => 0.01,
        }
    }

    fn default_pressure(self) -> f64 {
        match self {
            CaseId::LoopCone | CaseId::LoopSmooth => 1.0,
            _ => 0.1,
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::ConfigValue {
                field: "case.name".into(),
                message: format!(
                    "unknown case `{s}`, expected one of {}",
                    CaseId::ALL.map(|c| c.name()).join(", ")
                ),
            })
    }
}

/// Case selection and its physical parameters. `None` means the case
/// default.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CaseSpec {
    pub id: CaseId,
    /// Velocity amplitude. Loop cases default to `sqrt(lx² + ly²)`, current
    /// sheets to 0.1, the Alfvén wave to 1.
    pub v0: Option<f64>,
    /// Alfvén-wave field amplitude.
    pub b0: f64,
    /// Loop potential amplitude.
    pub a0: f64,
    /// Cone radius.
    pub radius: f64,
    pub pressure: Option<f64>,
}

impl CaseSpec {
    pub fn new(id: CaseId) -> Self {
        CaseSpec {
            id,
            v0: None,
            b0: 1.0,
            a0: 1e-3,
            radius: 0.3,
            pressure: None,
        }
    }

    pub fn default_grid(&self) -> Result<Grid> {
        let (nx, ny, lx, ly, x0, y0) = self.id.default_grid();
        Grid::new(nx, ny, lx, ly, x0, y0)
    }

    pub fn pressure(&self) -> f64 {
        self.pressure.unwrap_or(self.id.default_pressure())
    }

    pub fn v0(&self, grid: &Grid) -> f64 {
        self.v0.unwrap_or(match self.id {
            CaseId::Alfven => 1.0,
            CaseId::LoopCone | CaseId::LoopSmooth => grid.lx.hypot(grid.ly),
            CaseId::SheetSharp | CaseId::SheetTanh => 0.1,
            CaseId::OrszagTang => 2.0,
        })
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCase(m));
        for (name, v) in [("b0", self.b0), ("a0", self.a0), ("radius", self.radius)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if let Some(v) = self.v0.filter(|v| !v.is_finite()) {
            return bad(format!("v0 must be finite, got {v}"));
        }
        if let Some(p) = self.pressure.filter(|p| !p.is_finite()) {
            return bad(format!("pressure must be finite, got {p}"));
        }
        if self.id == CaseId::LoopCone {
            let max_r = 0.5 * grid.lx.min(grid.ly);
            if !(self.radius > 0.0 && self.radius <= max_r) {
                return bad(format!(
                    "loop radius {} must lie in (0, {max_r}] for this domain",
                    self.radius
                ));
            }
        }
        Ok(())
    }
}

/// `B^x = Δ_y A`, `B^y = -Δ_x A` for a potential sampled at cell centres.
pub fn b_from_potential(grid: &Grid, a: &[f64]) -> Result<Form1> {
    grid.check_len(a.len())?;
    let g = grid;
    let mut x = vec![0.0; g.len()];
    let mut y = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            x[k] = (a[g.at(i, j, 0, 1)] - a[k]) / g.hy;
            y[k] = -(a[g.at(i, j, 1, 0)] - a[k]) / g.hx;
        }
    }
    Form1::new(*g, Kind::Primal, x, y)
}

/// Removes the gradient part of `v`: solves `div grad φ = div v` for a
/// mean-free `φ` at the vertices and subtracts `grad φ`.
pub fn project_solenoidal(v: &Form1) -> Result<Form1> {
    Kind::Primal.expect(v.kind)?;
    let g = &v.grid;
    let n = g.len();
    let rhs = div_raw(g, &v.x, &v.y);
    let (cx, cy) = (1.0 / (g.hx * g.hx), 1.0 / (g.hy * g.hy));
    let mut trip = Vec::with_capacity(5 * n);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            if k == 0 {
                // the periodic Laplacian is singular; pin one value
                trip.push(Triplet::new(0, 0, 1.0));
                continue;
            }
            trip.push(Triplet::new(k, k, -2.0 * (cx + cy)));
            for (di, dj, c) in [(1, 0, cx), (-1, 0, cx), (0, 1, cy), (0, -1, cy)] {
                trip.push(Triplet::new(k, g.at(i, j, di, dj), c));
            }
        }
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
    let lu = Lu::try_new_with_symbolic(
        faer::sparse::linalg::solvers::SymbolicLu::try_new(mat.symbolic())
            .map_err(|e| Error::LinearSolver(format!("{e:?}")))?,
        mat.as_ref(),
    )
    .map_err(|e| Error::LinearSolver(format!("{e:?}")))?;
    let mut phi = rhs;
    phi[0] = 0.0;
    lu.solve_in_place(MatMut::from_column_major_slice_mut(&mut phi, n, 1));
    let mean = phi.iter().sum::<f64>() / n as f64;
    phi.iter_mut().for_each(|p| *p -= mean);
    let mut out = v.clone();
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            out.x[k] -= (phi[k] - phi[g.at(i, j, -1, 0)]) / g.hx;
            out.y[k] -= (phi[k] - phi[g.at(i, j, 0, -1)]) / g.hy;
        }
    }
    Ok(out)
}

fn sampled(grid: &Grid, fx: impl Fn(f64, f64) -> f64, fy: impl Fn(f64, f64) -> f64) -> Result<Form1> {
    Form1::new(*grid, Kind::Primal, grid.sample_x_edges(fx), grid.sample_y_edges(fy))
}

/// Builds the initial state of `spec` on `grid`.
pub fn build_initial_state(spec: &CaseSpec, grid: &Grid) -> Result<State> {
    spec.validate(grid)?;
    let g = grid;
    let v0 = spec.v0(g);
    let b0 = spec.b0;
    let a0 = spec.a0;
    let (v, b) = match spec.id {
        CaseId::Alfven => (
            sampled(g, |_, _| 0.0, |x, _| v0 * (PI * x).sin())?,
            sampled(g, |_, _| b0, |x, _| b0 * (PI * x).sin())?,
        ),
        CaseId::OrszagTang => {
            let s = v0 / 2.0;
            let a = g.sample_cells(|x, y| (2.0 * y).cos() - 2.0 * x.cos());
            (
                sampled(g, |_, y| s * 2.0 * y.cos(), |x, _| -s * 2.0 * x.sin())?,
                b_from_potential(g, &a)?,
            )
        }
        CaseId::LoopCone | CaseId::LoopSmooth => {
            let theta = g.ly.atan2(g.lx);
            let (vx, vy) = (v0 * theta.cos(), v0 * theta.sin());
            let (cx, cy) = (g.x0 + 0.5 * g.lx, g.y0 + 0.5 * g.ly);
            let r0 = spec.radius;
            let a = if spec.id == CaseId::LoopCone {
                g.sample_cells(|x, y| {
                    let r = (x - cx).hypot(y - cy);
                    if r <= r0 {
                        a0 * (r0 - r)
                    } else {
                        0.0
                    }
                })
            } else {
                g.sample_cells(|x, y| a0 * ((PI * x).cos() + (PI * y).cos()).exp())
            };
            (sampled(g, |_, _| vx, |_, _| vy)?, b_from_potential(g, &a)?)
        }
        CaseId::SheetSharp | CaseId::SheetTanh => {
            let (x1, x2) = (0.5, 1.5);
            let sharp = spec.id == CaseId::SheetSharp;
            let by = move |x: f64, _: f64| {
                let x = g.x0 + (x - g.x0).rem_euclid(g.lx);
                if sharp {
                    if x < x1 || x > x2 {
                        1.0
                    } else {
                        -1.0
                    }
                } else if x < 1.0 {
                    (10.0 * (x - x1)).tanh()
                } else {
                    -(10.0 * (x - x2)).tanh()
                }
            };
            (
                sampled(g, |_, y| v0 * (PI * y).sin(), |_, _| 0.0)?,
                sampled(g, |_, _| 0.0, by)?,
            )
        }
    };
    let v = if max_abs(&div_raw(g, &v.x, &v.y)) > 1e-12 {
        project_solenoidal(&v)?
    } else {
        v
    };
    State::new(v, b, vec![spec.pressure(); g.len()], 0.0)
}
