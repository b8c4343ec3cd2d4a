use super::{Form, Kind};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Formal weighted sum of vertices, edges or cells.
///
/// Coefficients use the same storage slots as the forms of the same degree
/// and kind; edge chains carry separate x-edge and y-edge arrays (`y` is
/// empty for vertex and cell chains).
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub grid: Grid,
    pub kind: Kind,
    pub degree: usize,
    pub coeffs: Vec<f64>,
    pub coeffs_y: Vec<f64>,
}

impl Chain {
    /// Vertex (`degree = 0`) or cell (`degree = 2`) chain.
    pub fn new(grid: Grid, kind: Kind, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if degree == 1 || degree > 2 {
            return Err(Error::Unsupported(format!(
                "Chain::new builds vertex or cell chains, got degree {degree}"
            )));
        }
        grid.check_len(coeffs.len())?;
        Ok(Chain {
            grid,
            kind,
            degree,
            coeffs,
            coeffs_y: Vec::new(),
        })
    }

    pub fn edges(grid: Grid, kind: Kind, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        grid.check_len(x.len())?;
        grid.check_len(y.len())?;
        Ok(Chain {
            grid,
            kind,
            degree: 1,
            coeffs: x,
            coeffs_y: y,
        })
    }

    /// The whole domain as a chain of unit-weight cells.
    pub fn domain(grid: Grid, kind: Kind) -> Self {
        Chain {
            grid,
            kind,
            degree: 2,
            coeffs: vec![1.0; grid.len()],
            coeffs_y: Vec::new(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .chain(&self.coeffs_y)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Boundary operator on chains of degree 1 or 2, with periodic wrap.
pub fn boundary(c: &Chain) -> Result<Chain> {
    let g = &c.grid;
    let a = &c.coeffs;
    match c.degree {
        0 => Err(Error::Unsupported("boundary of a vertex chain".into())),
        1 => {
            let ay = &c.coeffs_y;
            let mut out = vec![0.0; g.len()];
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let k = g.idx(i, j);
                    out[k] = match c.kind {
                        // de^x_{i,j+1/2} = v_{i+1/2,j+1/2} - v_{i-1/2,j+1/2}
                        Kind::Primal => {
                            a[k] - a[g.at(i, j, 1, 0)] + ay[k] - ay[g.at(i, j, 0, 1)]
                        }
                        // de*^x_{i+1/2,j} = v*_{i+1,j} - v*_{i,j}
                        Kind::Dual => {
                            a[g.at(i, j, -1, 0)] - a[k] + ay[g.at(i, j, 0, -1)] - ay[k]
                        }
                    };
                }
            }
            Chain::new(*g, c.kind, 0, out)
        }
        2 => {
            let mut ex = vec![0.0; g.len()];
            let mut ey = vec![0.0; g.len()];
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let k = g.idx(i, j);
                    match c.kind {
                        // counterclockwise: bottom +x, right +y, top -x, left -y
                        Kind::Primal => {
                            ex[k] = a[g.at(i, j, 0, 1)] - a[k];
                            ey[k] = a[k] - a[g.at(i, j, 1, 0)];
                        }
                        Kind::Dual => {
                            ex[k] = a[k] - a[g.at(i, j, 0, -1)];
                            ey[k] = a[g.at(i, j, -1, 0)] - a[k];
                        }
                    }
                }
            }
            Chain::edges(*g, c.kind, ex, ey)
        }
        d => Err(Error::Unsupported(format!("chain of degree {d}"))),
    }
}

/// Evaluates a form on a chain of the same degree and kind.
pub fn integrate(f: &Form, c: &Chain) -> Result<f64> {
    f.grid().check_same(&c.grid)?;
    if f.degree() != c.degree {
        return Err(Error::DegreeMismatch {
            expected: f.degree(),
            found: c.degree,
        });
    }
    c.kind.expect(f.kind())?;
    let g = &c.grid;
    let mut sum = 0.0;
    match f {
        Form::Zero(f) => {
            for k in 0..g.len() {
                sum += c.coeffs[k] * f.values[k];
            }
        }
        Form::One(f) => {
            for k in 0..g.len() {
                sum += g.hx * c.coeffs[k] * f.x[k] + g.hy * c.coeffs_y[k] * f.y[k];
            }
        }
        Form::Two(f) => {
            let area = g.cell_area();
            for k in 0..g.len() {
                sum += area * c.coeffs[k] * f.values[k];
            }
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{Form0, Form1, Form2};
    use super::*;

    fn grid() -> Grid {
        Grid::new(6, 5, 1.2, 2.0, 0.3, -0.4).unwrap()
    }

    #[test]
    fn boundary_of_single_cell() {
        let g = grid();
        let mut a = vec![0.0; g.len()];
        a[g.idx(0, 0)] = 1.0;
        let c = Chain::new(g, Kind::Primal, 2, a).unwrap();
        let e = boundary(&c).unwrap();
        let nonzero: Vec<_> = (0..g.len())
            .flat_map(|k| {
                [(k, 'x', e.coeffs[k]), (k, 'y', e.coeffs_y[k])]
            })
            .filter(|t| t.2 != 0.0)
            .map(|(k, c, v)| (g.ij(k), c, v))
            .collect();
        // top edge (0, 1/2) and bottom edge (0, -1/2) which wraps to j = ny-1
        assert!(nonzero.contains(&((0, 0), 'x', -1.0)));
        assert!(nonzero.contains(&((0, g.ny - 1), 'x', 1.0)));
        // right edge (1/2, 0) and left edge (-1/2, 0)
        assert!(nonzero.contains(&((0, 0), 'y', 1.0)));
        assert!(nonzero.contains(&((g.nx - 1, 0), 'y', -1.0)));
        assert_eq!(nonzero.len(), 4);
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        let mut r = rng(11);
        for kind in [Kind::Primal, Kind::Dual] {
            for _ in 0..10 {
                let c = random_chain(&mut r, grid(), kind, 2);
                let dd = boundary(&boundary(&c).unwrap()).unwrap();
                assert!(dd.max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn closed_domain_has_empty_boundary() {
        for kind in [Kind::Primal, Kind::Dual] {
            let e = boundary(&Chain::domain(grid(), kind)).unwrap();
            assert_eq!(e.max_abs(), 0.0);
        }
    }

    #[test]
    fn vertex_chain_boundary_rejected() {
        let c = Chain::new(grid(), Kind::Primal, 0, vec![0.0; 30]).unwrap();
        assert!(boundary(&c).is_err());
    }

    #[test]
    fn integral_of_unit_two_form_is_area() {
        let g = grid();
        let w = Form::Two(Form2::new(g, Kind::Primal, vec![1.0; g.len()]).unwrap());
        let v = integrate(&w, &Chain::domain(g, Kind::Primal)).unwrap();
        assert!((v - g.area()).abs() < 1e-14);
    }

    #[test]
    fn basis_pairing_on_edges() {
        let g = grid();
        for (k, l) in [(0, 0), (3, 2), (5, 4)] {
            let mut fx = vec![0.0; g.len()];
            fx[g.idx(k, l)] = 1.0;
            let f = Form::One(Form1::new(g, Kind::Primal, fx, vec![0.0; g.len()]).unwrap());
            for (i, j) in [(0, 0), (3, 2), (5, 4)] {
                let mut cx = vec![0.0; g.len()];
                cx[g.idx(i, j)] = 1.0;
                let c = Chain::edges(g, Kind::Primal, cx, vec![0.0; g.len()]).unwrap();
                let expected = if (i, j) == (k, l) { g.hx } else { 0.0 };
                assert_eq!(integrate(&f, &c).unwrap(), expected);
            }
        }
    }

    #[test]
    fn integral_matches_double_loop() {
        let g = grid();
        let mut r = rng(12);
        let f = random_form(&mut r, g, Kind::Primal, 1);
        let c = random_chain(&mut r, g, Kind::Primal, 1);
        let Form::One(ff) = &f else { unreachable!() };
        let mut oracle = 0.0;
        for i in 0..g.nx {
            for j in 0..g.ny {
                let k = j * g.nx + i;
                oracle += g.hx * c.coeffs[k] * ff.x[k];
                oracle += g.hy * c.coeffs_y[k] * ff.y[k];
            }
        }
        let v = integrate(&f, &c).unwrap();
        assert!((v - oracle).abs() <= 1e-14 * oracle.abs().max(1.0));
    }

    #[test]
    fn stokes_theorem() {
        let g = grid();
        let mut r = rng(13);
        for kind in [Kind::Primal, Kind::Dual] {
            for deg in 0..2 {
                let f = random_form(&mut r, g, kind, deg);
                let c = random_chain(&mut r, g, kind, deg + 1);
                let lhs = integrate(&f.d().unwrap(), &c).unwrap();
                let rhs = integrate(&f, &boundary(&c).unwrap()).unwrap();
                assert!(
                    (lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0),
                    "{kind:?} deg {deg}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn mismatched_kinds_rejected() {
        let g = grid();
        let f = Form::Zero(Form0::zeros(g, Kind::Primal));
        let c = Chain::new(g, Kind::Dual, 0, vec![0.0; g.len()]).unwrap();
        assert!(matches!(integrate(&f, &c), Err(Error::KindMismatch { .. })));
        let c = Chain::domain(g, Kind::Primal);
        assert!(matches!(integrate(&f, &c), Err(Error::DegreeMismatch { .. })));
    }
}
