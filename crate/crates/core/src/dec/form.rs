use super::Kind;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Discrete zero-form: one coefficient per primal vertex (primal kind) or per
/// dual vertex, i.e. primal cell centre (dual kind).
#[derive(Debug, Clone, PartialEq)]
pub struct Form0 {
    pub grid: Grid,
    pub kind: Kind,
    pub values: Vec<f64>,
}

/// Discrete one-form.
///
/// Primal: `x` holds `a^x` on horizontal edges `(i, j+1/2)`, `y` holds `a^y`
/// on vertical edges `(i+1/2, j)`. Dual: `x` holds `a^{*x}` on dual edges
/// `(i+1/2, j)`, `y` holds `a^{*y}` on dual edges `(i, j+1/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Form1 {
    pub grid: Grid,
    pub kind: Kind,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Discrete two-form: one coefficient per primal cell or per dual cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Form2 {
    pub grid: Grid,
    pub kind: Kind,
    pub values: Vec<f64>,
}

/// A discrete form of any degree.
#[derive(Debug, Clone, PartialEq)]
pub enum Form {
    Zero(Form0),
    One(Form1),
    Two(Form2),
}

impl Form0 {
    pub fn new(grid: Grid, kind: Kind, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Form0 { grid, kind, values })
    }

    pub fn zeros(grid: Grid, kind: Kind) -> Self {
        Form0 {
            grid,
            kind,
            values: vec![0.0; grid.len()],
        }
    }

    /// Exterior derivative, one-sided differences with periodic wrap.
    pub fn d(&self) -> Form1 {
        let g = &self.grid;
        let v = &self.values;
        let mut x = vec![0.0; g.len()];
        let mut y = vec![0.0; g.len()];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.idx(i, j);
                match self.kind {
                    Kind::Primal => {
                        x[k] = (v[k] - v[g.at(i, j, -1, 0)]) / g.hx;
                        y[k] = (v[k] - v[g.at(i, j, 0, -1)]) / g.hy;
                    }
                    Kind::Dual => {
                        x[k] = (v[g.at(i, j, 1, 0)] - v[k]) / g.hx;
                        y[k] = (v[g.at(i, j, 0, 1)] - v[k]) / g.hy;
                    }
                }
            }
        }
        Form1 {
            grid: *g,
            kind: self.kind,
            x,
            y,
        }
    }

    pub fn hodge(&self) -> Form2 {
        Form2 {
            grid: self.grid,
            kind: self.kind.opposite(),
            values: self.values.clone(),
        }
    }
}

impl Form1 {
    pub fn new(grid: Grid, kind: Kind, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        grid.check_len(x.len())?;
        grid.check_len(y.len())?;
        Ok(Form1 { grid, kind, x, y })
    }

    pub fn zeros(grid: Grid, kind: Kind) -> Self {
        Form1 {
            grid,
            kind,
            x: vec![0.0; grid.len()],
            y: vec![0.0; grid.len()],
        }
    }

    /// Exterior derivative `Δ_x a^y - Δ_y a^x` on cells.
    pub fn d(&self) -> Form2 {
        let g = &self.grid;
        let (ax, ay) = (&self.x, &self.y);
        let mut w = vec![0.0; g.len()];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.idx(i, j);
                w[k] = match self.kind {
                    Kind::Primal => {
                        (ay[k] - ay[g.at(i, j, -1, 0)]) / g.hx
                            - (ax[k] - ax[g.at(i, j, 0, -1)]) / g.hy
                    }
                    Kind::Dual => {
                        (ay[g.at(i, j, 1, 0)] - ay[k]) / g.hx
                            - (ax[g.at(i, j, 0, 1)] - ax[k]) / g.hy
                    }
                };
            }
        }
        Form2 {
            grid: *g,
            kind: self.kind,
            values: w,
        }
    }

    /// `*(a^x, a^y) = (-a^y, a^x)`; the primal x-edge and the dual y-edge
    /// share a storage slot, as do the primal y-edge and the dual x-edge.
    pub fn hodge(&self) -> Form1 {
        Form1 {
            grid: self.grid,
            kind: self.kind.opposite(),
            x: self.y.iter().map(|v| -v).collect(),
            y: self.x.clone(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.x.iter_mut().chain(self.y.iter_mut()).for_each(|v| *v *= s);
    }
}

impl Form2 {
    pub fn new(grid: Grid, kind: Kind, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(Form2 { grid, kind, values })
    }

    pub fn zeros(grid: Grid, kind: Kind) -> Self {
        Form2 {
            grid,
            kind,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn hodge(&self) -> Form0 {
        Form0 {
            grid: self.grid,
            kind: self.kind.opposite(),
            values: self.values.clone(),
        }
    }
}

impl Form {
    pub fn degree(&self) -> usize {
        match self {
            Form::Zero(_) => 0,
            Form::One(_) => 1,
            Form::Two(_) => 2,
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            Form::Zero(f) => f.kind,
            Form::One(f) => f.kind,
            Form::Two(f) => f.kind,
        }
    }

    pub fn grid(&self) -> &Grid {
        match self {
            Form::Zero(f) => &f.grid,
            Form::One(f) => &f.grid,
            Form::Two(f) => &f.grid,
        }
    }

    /// Exterior derivative. Two-forms are rejected: there are no three-forms
    /// in two dimensions.
    pub fn d(&self) -> Result<Form> {
        match self {
            Form::Zero(f) => Ok(Form::One(f.d())),
            Form::One(f) => Ok(Form::Two(f.d())),
            Form::Two(_) => Err(Error::Unsupported(
                "exterior derivative of a two-form".into(),
            )),
        }
    }

    pub fn hodge(&self) -> Form {
        match self {
            Form::Zero(f) => Form::Two(f.hodge()),
            Form::One(f) => Form::One(f.hodge()),
            Form::Two(f) => Form::Zero(f.hodge()),
        }
    }

    /// Coefficient arrays in a fixed order (`x` before `y` for one-forms).
    pub fn components(&self) -> Vec<&[f64]> {
        match self {
            Form::Zero(f) => vec![&f.values],
            Form::One(f) => vec![&f.x, &f.y],
            Form::Two(f) => vec![&f.values],
        }
    }

    /// `a * self + b * other`, for linearity checks and the like.
    pub fn lincomb(&self, a: f64, other: &Form, b: f64) -> Result<Form> {
        self.grid().check_same(other.grid())?;
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                expected: self.degree(),
                found: other.degree(),
            });
        }
        other.kind().expect(self.kind())?;
        let mix = |u: &[f64], v: &[f64]| -> Vec<f64> {
            u.iter().zip(v).map(|(p, q)| a * p + b * q).collect()
        };
        Ok(match (self, other) {
            (Form::Zero(f), Form::Zero(g)) => Form::Zero(Form0 {
                values: mix(&f.values, &g.values),
                ..f.clone()
            }),
            (Form::One(f), Form::One(g)) => Form::One(Form1 {
                grid: f.grid,
                kind: f.kind,
                x: mix(&f.x, &g.x),
                y: mix(&f.y, &g.y),
            }),
            (Form::Two(f), Form::Two(g)) => Form::Two(Form2 {
                values: mix(&f.values, &g.values),
                ..f.clone()
            }),
            _ => unreachable!("degrees checked above"),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.components()
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    fn grid() -> Grid {
        Grid::new(8, 6, 2.0, 1.5, 0.0, 0.0).unwrap()
    }

    #[test]
    fn constant_zero_form_is_closed() {
        for kind in [Kind::Primal, Kind::Dual] {
            let f = Form0::new(grid(), kind, vec![3.5; 48]).unwrap();
            let df = f.d();
            assert!(df.x.iter().chain(&df.y).all(|v| *v == 0.0));
        }
    }

    #[test]
    fn d_of_two_form_is_rejected() {
        let f = Form::Two(Form2::zeros(grid(), Kind::Primal));
        assert!(matches!(f.d(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn dd_vanishes() {
        let mut r = rng(1);
        for kind in [Kind::Primal, Kind::Dual] {
            for _ in 0..10 {
                let f = random_form(&mut r, grid(), kind, 0);
                let ddf = f.d().unwrap().d().unwrap();
                let g = grid();
                let bound = 1e-14 * f.max_abs() / g.hx.min(g.hy).powi(2);
                assert!(ddf.max_abs() <= bound, "{} > {}", ddf.max_abs(), bound);
            }
        }
    }

    #[test]
    fn hodge_twice_sign() {
        let mut r = rng(2);
        for kind in [Kind::Primal, Kind::Dual] {
            for deg in 0..3 {
                let f = random_form(&mut r, grid(), kind, deg);
                let ff = f.hodge().hodge();
                let sign = if deg == 1 { -1.0 } else { 1.0 };
                assert_eq!(ff, f.lincomb(sign, &f, 0.0).unwrap());
                assert_eq!(f.hodge().kind(), kind.opposite());
                assert_eq!(f.hodge().degree(), 2 - deg);
            }
        }
    }

    #[test]
    fn hodge_of_primal_x_edges_is_dual_y_edges() {
        let g = grid();
        let a = Form1::new(g, Kind::Primal, vec![1.0; g.len()], vec![0.0; g.len()]).unwrap();
        let h = a.hodge();
        assert_eq!(h.kind, Kind::Dual);
        assert!(h.y.iter().all(|v| *v == 1.0));
        assert!(h.x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn d_and_hodge_are_linear() {
        let mut r = rng(3);
        for kind in [Kind::Primal, Kind::Dual] {
            for deg in 0..2 {
                let a = random_form(&mut r, grid(), kind, deg);
                let b = random_form(&mut r, grid(), kind, deg);
                let c = a.lincomb(0.7, &b, -1.3).unwrap();
                let lhs = c.d().unwrap();
                let rhs = a.d().unwrap().lincomb(0.7, &b.d().unwrap(), -1.3).unwrap();
                let diff = lhs.lincomb(1.0, &rhs, -1.0).unwrap();
                assert!(diff.max_abs() < 1e-12);
                let diff = c
                    .hodge()
                    .lincomb(1.0, &a.hodge().lincomb(0.7, &b.hodge(), -1.3).unwrap(), -1.0)
                    .unwrap();
                assert!(diff.max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn shape_is_checked() {
        assert!(matches!(
            Form0::new(grid(), Kind::Primal, vec![0.0; 3]),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
