//! Exterior products and the pairings built from them.
//!
//! Products between forms of the same kind average the factors onto the
//! location of the result. Mixed products are only defined when they yield a
//! volume form; primal-dual products land on the primal grid and dual-primal
//! products on the dual grid.

use super::{Chain, Form, Form0, Form1, Form2, Kind};
use crate::error::{Error, Result};
use crate::grid::Grid;

fn unsupported(a: &Form, b: &Form) -> Error {
    Error::Unsupported(format!(
        "wedge of {} {}-form with {} {}-form",
        a.kind().name(),
        a.degree(),
        b.kind().name(),
        b.degree()
    ))
}

/// Gathers `f(i, j, k)` over the grid into a fresh array.
fn gather(g: &Grid, f: impl Fn(usize, usize, usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            out[k] = f(i, j, k);
        }
    }
    out
}

pub fn wedge(a: &Form, b: &Form) -> Result<Form> {
    a.grid().check_same(b.grid())?;
    let g = *a.grid();
    if a.degree() + b.degree() > 2 {
        return Err(unsupported(a, b));
    }
    if a.kind() == b.kind() {
        same_kind(&g, a.kind(), a, b)
    } else {
        mixed(&g, a, b)
    }
}

fn same_kind(g: &Grid, kind: Kind, a: &Form, b: &Form) -> Result<Form> {
    use Form::*;
    Ok(match (a, b) {
        (Zero(p), Zero(q)) => Zero(Form0 {
            grid: *g,
            kind,
            values: p.values.iter().zip(&q.values).map(|(u, v)| u * v).collect(),
        }),
        (Zero(p), One(al)) | (One(al), Zero(p)) => {
            let v = &p.values;
            // average the vertex values onto the two ends of each edge
            let (x, y) = match kind {
                Kind::Primal => (
                    gather(g, |i, j, k| 0.5 * (v[g.at(i, j, -1, 0)] + v[k]) * al.x[k]),
                    gather(g, |i, j, k| 0.5 * (v[g.at(i, j, 0, -1)] + v[k]) * al.y[k]),
                ),
                Kind::Dual => (
                    gather(g, |i, j, k| 0.5 * (v[k] + v[g.at(i, j, 1, 0)]) * al.x[k]),
                    gather(g, |i, j, k| 0.5 * (v[k] + v[g.at(i, j, 0, 1)]) * al.y[k]),
                ),
            };
            One(Form1 {
                grid: *g,
                kind,
                x,
                y,
            })
        }
        (Zero(p), Two(w)) | (Two(w), Zero(p)) => {
            let v = &p.values;
            let values = match kind {
                Kind::Primal => gather(g, |i, j, k| {
                    0.25 * (v[g.at(i, j, -1, -1)]
                        + v[g.at(i, j, 0, -1)]
                        + v[g.at(i, j, -1, 0)]
                        + v[k])
                        * w.values[k]
                }),
                Kind::Dual => gather(g, |i, j, k| {
                    0.25 * (v[k]
                        + v[g.at(i, j, 1, 0)]
                        + v[g.at(i, j, 0, 1)]
                        + v[g.at(i, j, 1, 1)])
                        * w.values[k]
                }),
            };
            Two(Form2 {
                grid: *g,
                kind,
                values,
            })
        }
        (One(al), One(be)) => {
            let values = match kind {
                Kind::Primal => gather(g, |i, j, k| {
                    let (s, w) = (g.at(i, j, 0, -1), g.at(i, j, -1, 0));
                    0.25 * ((al.x[s] + al.x[k]) * (be.y[w] + be.y[k])
                        - (al.y[w] + al.y[k]) * (be.x[s] + be.x[k]))
                }),
                Kind::Dual => gather(g, |i, j, k| {
                    let (n, e) = (g.at(i, j, 0, 1), g.at(i, j, 1, 0));
                    0.25 * ((al.x[k] + al.x[n]) * (be.y[k] + be.y[e])
                        - (al.y[k] + al.y[e]) * (be.x[k] + be.x[n]))
                }),
            };
            Two(Form2 {
                grid: *g,
                kind,
                values,
            })
        }
        _ => return Err(unsupported(a, b)),
    })
}

fn mixed(g: &Grid, a: &Form, b: &Form) -> Result<Form> {
    use Form::*;
    if a.degree() + b.degree() != 2 {
        return Err(unsupported(a, b));
    }
    let kind = a.kind();
    let values = match (kind, a, b) {
        (Kind::Primal, Zero(p), Two(w)) => gather(g, |i, j, k| {
            let (sw, s, w_) = (g.at(i, j, -1, -1), g.at(i, j, 0, -1), g.at(i, j, -1, 0));
            let (v, o) = (&p.values, &w.values);
            0.25 * (v[sw] * o[sw] + v[w_] * o[w_] + v[s] * o[s] + v[k] * o[k])
        }),
        (Kind::Primal, One(al), One(be)) => gather(g, |i, j, k| {
            let (s, w) = (g.at(i, j, 0, -1), g.at(i, j, -1, 0));
            0.5 * (al.x[s] * be.y[s] + al.x[k] * be.y[k] - al.y[w] * be.x[w] - al.y[k] * be.x[k])
        }),
        (Kind::Primal, Two(w), Zero(p)) => gather(g, |_, _, k| w.values[k] * p.values[k]),
        (Kind::Dual, Zero(p), Two(w)) => gather(g, |i, j, k| {
            let (e, n, ne) = (g.at(i, j, 1, 0), g.at(i, j, 0, 1), g.at(i, j, 1, 1));
            let (v, o) = (&p.values, &w.values);
            0.25 * (v[k] * o[k] + v[n] * o[n] + v[e] * o[e] + v[ne] * o[ne])
        }),
        (Kind::Dual, One(al), One(be)) => gather(g, |i, j, k| {
            let (n, e) = (g.at(i, j, 0, 1), g.at(i, j, 1, 0));
            0.5 * (al.x[k] * be.y[k] + al.x[n] * be.y[n] - al.y[k] * be.x[k] - al.y[e] * be.x[e])
        }),
        (Kind::Dual, Two(w), Zero(p)) => gather(g, |_, _, k| w.values[k] * p.values[k]),
        _ => return Err(unsupported(a, b)),
    };
    Ok(Two(Form2 {
        grid: *g,
        kind,
        values,
    }))
}

/// Discrete inner product `∫ a ∧ *b` of two forms of equal degree and kind.
///
/// On the periodic grid every pairing collapses to `hx hy Σ a·b` over all
/// coefficient arrays; this is what is evaluated here (row-major order, one
/// accumulator). [`pairing_via_wedge`] evaluates the defining expression.
pub fn pairing(a: &Form, b: &Form) -> Result<f64> {
    a.grid().check_same(b.grid())?;
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch {
            expected: a.degree(),
            found: b.degree(),
        });
    }
    b.kind().expect(a.kind())?;
    let g = a.grid();
    let mut sum = 0.0;
    match (a, b) {
        (Form::One(p), Form::One(q)) => {
            for k in 0..g.len() {
                sum += p.x[k] * q.x[k] + p.y[k] * q.y[k];
            }
        }
        _ => {
            let (u, v) = (a.components()[0], b.components()[0]);
            for k in 0..g.len() {
                sum += u[k] * v[k];
            }
        }
    }
    Ok(g.cell_area() * sum)
}

/// `∫_Ω a ∧ *b` computed literally through [`wedge`], [`Form::hodge`] and
/// [`super::integrate`] over the unit-weight domain chain.
pub fn pairing_via_wedge(a: &Form, b: &Form) -> Result<f64> {
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch {
            expected: a.degree(),
            found: b.degree(),
        });
    }
    b.kind().expect(a.kind())?;
    let w = wedge(a, &b.hodge())?;
    super::integrate(&w, &Chain::domain(*a.grid(), a.kind()))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    fn grid() -> Grid {
        Grid::new(7, 5, 1.4, 2.5, -0.2, 0.1).unwrap()
    }

    #[test]
    fn pointwise_product_of_zero_forms() {
        let g = grid();
        let p = Form::Zero(Form0::new(g, Kind::Primal, vec![2.0; g.len()]).unwrap());
        let Form::Zero(w) = wedge(&p, &p).unwrap() else { panic!() };
        assert!(w.values.iter().all(|v| *v == 4.0));
    }

    #[test]
    fn one_form_wedge_itself_vanishes() {
        let mut r = rng(21);
        for kind in [Kind::Primal, Kind::Dual] {
            let a = random_form(&mut r, grid(), kind, 1);
            assert!(wedge(&a, &a).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn primal_dual_one_forms_match_stencil() {
        let g = grid();
        let mut r = rng(22);
        let a = random_form(&mut r, g, Kind::Primal, 1);
        let b = random_form(&mut r, g, Kind::Dual, 1);
        let (Form::One(al), Form::One(be)) = (&a, &b) else { unreachable!() };
        let Form::Two(w) = wedge(&a, &b).unwrap() else { panic!() };
        assert_eq!(w.kind, Kind::Primal);
        let nx = g.nx as isize;
        let ny = g.ny as isize;
        let id = |i: isize, j: isize| (j.rem_euclid(ny) * nx + i.rem_euclid(nx)) as usize;
        for j in 0..ny {
            for i in 0..nx {
                // alpha^x_{i,j-1/2} beta*^y_{i,j-1/2} + alpha^x_{i,j+1/2} beta*^y_{i,j+1/2}
                // - alpha^y_{i-1/2,j} beta*^x_{i-1/2,j} - alpha^y_{i+1/2,j} beta*^x_{i+1/2,j}
                let expect = 0.5
                    * (al.x[id(i, j - 1)] * be.y[id(i, j - 1)] + al.x[id(i, j)] * be.y[id(i, j)]
                        - al.y[id(i - 1, j)] * be.x[id(i - 1, j)]
                        - al.y[id(i, j)] * be.x[id(i, j)]);
                assert_eq!(w.values[id(i, j)], expect);
            }
        }
    }

    #[test]
    fn unsupported_combinations_rejected() {
        let g = grid();
        let mut r = rng(23);
        let p0 = random_form(&mut r, g, Kind::Primal, 0);
        let d1 = random_form(&mut r, g, Kind::Dual, 1);
        let p2 = random_form(&mut r, g, Kind::Primal, 2);
        let p1 = random_form(&mut r, g, Kind::Primal, 1);
        assert!(wedge(&p0, &d1).is_err());
        assert!(wedge(&p1, &p2).is_err());
        assert!(wedge(&p2, &p2).is_err());
    }

    #[test]
    fn unit_two_forms_pair_to_area() {
        let g = Grid::new(32, 32, 2.0, 2.0, 0.0, 0.0).unwrap();
        let s = Form::Two(Form2::new(g, Kind::Primal, vec![1.0; g.len()]).unwrap());
        assert_eq!(pairing(&s, &s).unwrap(), 4.0);
    }

    #[test]
    fn pairing_equals_literal_wedge_expression() {
        let g = grid();
        let mut r = rng(24);
        for kind in [Kind::Primal, Kind::Dual] {
            for deg in 0..3 {
                let a = random_form(&mut r, g, kind, deg);
                let b = random_form(&mut r, g, kind, deg);
                let p = pairing(&a, &b).unwrap();
                let q = pairing_via_wedge(&a, &b).unwrap();
                assert!((p - q).abs() <= 1e-13 * p.abs().max(1.0), "{kind:?} {deg}: {p} {q}");
            }
        }
    }

    #[test]
    fn primal_one_form_pairing_matches_half_weighted_sum() {
        // the four-term half-weighted stencil summed cell by cell
        let g = grid();
        let mut r = rng(25);
        let a = random_form(&mut r, g, Kind::Primal, 1);
        let b = random_form(&mut r, g, Kind::Primal, 1);
        let (Form::One(p), Form::One(q)) = (&a, &b) else { unreachable!() };
        let mut sum = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.idx(i, j);
                let s = g.at(i, j, 0, -1);
                let w = g.at(i, j, -1, 0);
                sum += p.x[s] * q.x[s] + p.x[k] * q.x[k] + p.y[w] * q.y[w] + p.y[k] * q.y[k];
            }
        }
        let literal = 0.5 * g.cell_area() * sum;
        let reduced = pairing(&a, &b).unwrap();
        assert!((literal - reduced).abs() <= 1e-13 * reduced.abs());
    }

    #[test]
    fn hodge_is_an_isometry_and_pairing_symmetric() {
        let g = grid();
        let mut r = rng(26);
        for kind in [Kind::Primal, Kind::Dual] {
            for deg in 0..3 {
                let a = random_form(&mut r, g, kind, deg);
                let b = random_form(&mut r, g, kind, deg);
                let p = pairing(&a, &b).unwrap();
                let q = pairing(&a.hodge(), &b.hodge()).unwrap();
                assert!((p - q).abs() <= 1e-13 * p.abs().max(1.0));
                assert_eq!(p, pairing(&b, &a).unwrap());
            }
        }
    }

    #[test]
    fn wedge_is_bilinear() {
        let g = grid();
        let mut r = rng(27);
        let combos = [
            (Kind::Primal, 0, Kind::Primal, 1),
            (Kind::Dual, 1, Kind::Dual, 1),
            (Kind::Primal, 1, Kind::Dual, 1),
            (Kind::Dual, 0, Kind::Primal, 2),
            (Kind::Dual, 2, Kind::Dual, 0),
        ];
        for (ka, da, kb, db) in combos {
            let a1 = random_form(&mut r, g, ka, da);
            let a2 = random_form(&mut r, g, ka, da);
            let b = random_form(&mut r, g, kb, db);
            let lhs = wedge(&a1.lincomb(2.0, &a2, -0.5).unwrap(), &b).unwrap();
            let rhs = wedge(&a1, &b)
                .unwrap()
                .lincomb(2.0, &wedge(&a2, &b).unwrap(), -0.5)
                .unwrap();
            assert!(lhs.lincomb(1.0, &rhs, -1.0).unwrap().max_abs() < 1e-14);
        }
    }
}
