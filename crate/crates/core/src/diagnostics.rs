//! Conserved quantities, the magnetic potential, the current density and
//! the phase-velocity analysis of probe time series.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::dec::{pairing, Form, Form1, Form2, Kind};
use crate::error::{Error, Result};
use crate::integrator::{State, StepReport};
use crate::operators::{bar_raw, max_abs};

/// One sample of the conserved quantities.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub t: f64,
    pub e_kin: f64,
    pub e_mag: f64,
    pub e_total: f64,
    pub cross_helicity: f64,
    pub magnetic_helicity: f64,
    pub div_v_max: f64,
    pub div_b_max: f64,
    pub newton_iterations: usize,
    pub residual_norm: f64,
}

impl DiagnosticsRecord {
    /// Samples `s`; `anchor` is the potential value at storage slot `(0, 0)`
    /// (see [`MagneticGauge`]).
    pub fn sample(step: usize, s: &State, anchor: f64, report: Option<&StepReport>) -> Result<Self> {
        let (e_kin, e_mag) = energy(s);
        Ok(DiagnosticsRecord {
            step,
            t: s.t,
            e_kin,
            e_mag,
            e_total: e_kin + e_mag,
            cross_helicity: cross_helicity(s),
            magnetic_helicity: helicity_of(&s.b, anchor)?,
            div_v_max: s.div_v_max(),
            div_b_max: s.div_b_max(),
            newton_iterations: report.map_or(0, |r| r.newton_iterations),
            residual_norm: report.map_or(0.0, |r| r.final_residual_norm),
        })
    }
}

fn one(f: &Form1) -> Form {
    Form::One(f.clone())
}

/// Kinetic and magnetic energy `(½⟨V,V⟩, ½⟨B,B⟩)`.
pub fn energy(s: &State) -> (f64, f64) {
    let v = one(&s.v);
    let b = one(&s.b);
    (
        0.5 * pairing(&v, &v).expect("state fields share a grid"),
        0.5 * pairing(&b, &b).expect("state fields share a grid"),
    )
}

/// `⟨V,B⟩`.
pub fn cross_helicity(s: &State) -> f64 {
    pairing(&one(&s.v), &one(&s.b)).expect("state fields share a grid")
}

/// Recovers the potential `A` at cell centres from `B^x = Δ_y A`,
/// `B^y = -Δ_x A`, with `A = anchor` at storage slot `(0, 0)`.
///
/// Column `i = 0` is filled first, then every row from left to right. A
/// uniform mean flux is allowed: `A` is then the non-periodic potential on
/// the fundamental index range and the loop closures pick up a constant
/// defect, which must be the same for every row and every column.
pub fn reconstruct_potential(b: &Form1, anchor: f64) -> Result<Vec<f64>> {
    Kind::Primal.expect(b.kind)?;
    let g = &b.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut a = vec![0.0; g.len()];
    a[0] = anchor;
    for j in 0..ny - 1 {
        a[g.idx(0, j + 1)] = a[g.idx(0, j)] + g.hy * b.x[g.idx(0, j)];
    }
    for j in 0..ny {
        for i in 0..nx - 1 {
            a[g.idx(i + 1, j)] = a[g.idx(i, j)] - g.hx * b.y[g.idx(i, j)];
        }
    }

    let bmax = max_abs(&b.x).max(max_abs(&b.y));
    let tol = 1e-8 * bmax * g.lx.max(g.ly);
    let mut defect = 0.0_f64;
    // interior x-edges, then the wrap defect of every column
    let mut col_wrap = Vec::with_capacity(nx);
    for i in 0..nx {
        for j in 0..ny - 1 {
            let d = a[g.idx(i, j + 1)] - a[g.idx(i, j)] - g.hy * b.x[g.idx(i, j)];
            defect = defect.max(d.abs());
        }
        col_wrap.push(a[g.idx(i, ny - 1)] + g.hy * b.x[g.idx(i, ny - 1)] - a[g.idx(i, 0)]);
    }
    let row_wrap: Vec<f64> = (0..ny)
        .map(|j| a[g.idx(nx - 1, j)] - g.hx * b.y[g.idx(nx - 1, j)] - a[g.idx(0, j)])
        .collect();
    for w in [&col_wrap, &row_wrap] {
        let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
        defect = defect.max(hi - lo);
    }
    if !(defect <= tol) {
        return Err(Error::InconsistentPotential {
            defect,
            tolerance: tol,
        });
    }
    Ok(a)
}

fn helicity_of(b: &Form1, anchor: f64) -> Result<f64> {
    let a = reconstruct_potential(b, anchor)?;
    Ok(b.grid.cell_area() * a.iter().sum::<f64>())
}

/// `hx hy Σ A` with the potential anchored to 0 at storage slot `(0, 0)`.
/// Only differences of this value between states in a common gauge are
/// meaningful; [`MagneticGauge`] supplies the anchor that follows the flow.
pub fn magnetic_helicity(s: &State) -> Result<f64> {
    helicity_of(&s.b, 0.0)
}

pub fn magnetic_helicity_with_anchor(s: &State, anchor: f64) -> Result<f64> {
    helicity_of(&s.b, anchor)
}

/// Tracks the anchor value of the potential along a run.
///
/// The flux-form induction update is `A^{n+1} = A^n - h_t Q` with
/// `Q = V̄^y B̄^x - V̄^x B̄^y` at cell centres, so the potential that is
/// advected with the discrete flow changes by `-h_t Q` at the anchor as well.
/// Helicity is conserved in this gauge only.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct MagneticGauge {
    pub anchor: f64,
}

impl MagneticGauge {
    pub fn update(&mut self, previous: &State, next: &State, ht: f64) -> Result<()> {
        previous.grid().check_same(next.grid())?;
        let g = previous.grid();
        let (vbx, vby) = bar_raw(g, &previous.v.x, &previous.v.y, &next.v.x, &next.v.y);
        let (bbx, bby) = bar_raw(g, &previous.b.x, &previous.b.y, &next.b.x, &next.b.y);
        self.anchor -= ht * (vby[0] * bbx[0] - vbx[0] * bby[0]);
        Ok(())
    }
}

/// Current density `J = d B` on primal cells.
pub fn current_density(b: &Form1) -> Result<Form2> {
    Kind::Primal.expect(b.kind)?;
    Ok(b.d())
}

/// Phase velocity of the dominant spatial Fourier mode of a probe series.
///
/// `series[n]` holds one row of samples along x at time `n * ht`, over a
/// periodic domain of length `lx`. The result is signed: positive for waves
/// travelling towards `+x`. Standing waves, whose dominant mode has no
/// preferred direction, are reported as [`Error::NoDominantDirection`].
pub fn phase_velocity(series: &[Vec<f64>], lx: f64, ht: f64) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::ShortSeries(format!("need at least 3 samples, got {}", series.len())));
    }
    let nx = series[0].len();
    if nx < 4 || series.iter().any(|r| r.len() != nx) {
        return Err(Error::ShortSeries("rows must share a length of at least 4".into()));
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nx);
    let spectra: Vec<Vec<Complex<f64>>> = series
        .iter()
        .map(|row| {
            let mut buf: Vec<Complex<f64>> = row.iter().map(|x| Complex::new(*x, 0.0)).collect();
            fft.process(&mut buf);
            buf
        })
        .collect();
    let half = nx / 2;
    let power: Vec<f64> = (1..=half)
        .map(|m| spectra.iter().map(|s| s[m].norm_sqr()).sum::<f64>() / spectra.len() as f64)
        .collect();
    let (peak_idx, peak) = power
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, p)| if *p > best.1 { (i, *p) } else { best });
    let mut sorted = power.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let ratio = if median > 0.0 { peak / median } else { f64::INFINITY };
    if !(ratio >= 10.0) || peak <= 0.0 {
        return Err(Error::NoDominantMode { ratio });
    }
    let m = peak_idx + 1;

    let z: Vec<Complex<f64>> = spectra.iter().map(|s| s[m]).collect();
    let (lo, hi) = z.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), c| (l.min(c.norm()), h.max(c.norm())));
    let modulation = lo / hi;
    if modulation < 0.5 {
        return Err(Error::NoDominantDirection { modulation });
    }

    let mut phase = Vec::with_capacity(z.len());
    let mut acc = z[0].arg();
    phase.push(acc);
    for w in z.windows(2) {
        let d = (w[1] * w[0].conj()).arg();
        acc += d;
        phase.push(acc);
    }
    let n = phase.len() as f64;
    let tm = (n - 1.0) * ht / 2.0;
    let pm = phase.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, p) in phase.iter().enumerate() {
        let dt = i as f64 * ht - tm;
        sxy += dt * (p - pm);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    let k = 2.0 * std::f64::consts::PI * m as f64 / lx;
    Ok(-slope / k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::b_from_potential;
    use crate::dec::testutil::{random_vec, rng};
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(12, 10, 2.0, 1.5, -1.0, 0.25).unwrap()
    }

    fn state(v: Form1, b: Form1) -> State {
        let n = v.grid.len();
        State::new(v, b, vec![0.0; n], 0.0).unwrap()
    }

    #[test]
    fn zero_fields_have_zero_invariants() {
        let g = grid();
        let s = state(Form1::zeros(g, Kind::Primal), Form1::zeros(g, Kind::Primal));
        assert_eq!(energy(&s), (0.0, 0.0));
        assert_eq!(cross_helicity(&s), 0.0);
        assert_eq!(magnetic_helicity(&s).unwrap(), 0.0);
        let a = reconstruct_potential(&s.b, 2.5).unwrap();
        assert!(a.iter().all(|x| *x == 2.5));
    }

    #[test]
    fn energy_scales_quadratically_and_cross_helicity_is_symmetric() {
        let g = grid();
        let mut r = rng(61);
        let n = g.len();
        let v = Form1::new(g, Kind::Primal, random_vec(&mut r, n), random_vec(&mut r, n)).unwrap();
        let b = Form1::new(g, Kind::Primal, random_vec(&mut r, n), random_vec(&mut r, n)).unwrap();
        let s = state(v.clone(), b.clone());
        let (ek, em) = energy(&s);
        let mut v3 = v.clone();
        v3.scale(3.0);
        let mut b3 = b.clone();
        b3.scale(3.0);
        let (ek3, em3) = energy(&state(v3, b3));
        assert!((ek3 - 9.0 * ek).abs() <= 1e-13 * ek3);
        assert!((em3 - 9.0 * em).abs() <= 1e-13 * em3);
        assert_eq!(cross_helicity(&s), cross_helicity(&state(b, v)));
    }

    #[test]
    fn potential_round_trip_and_gauge_shift() {
        let g = grid();
        let mut r = rng(62);
        let a0 = random_vec(&mut r, g.len());
        let b = b_from_potential(&g, &a0).unwrap();
        let a = reconstruct_potential(&b, 0.7).unwrap();
        for k in 0..g.len() {
            assert!((a[k] - (a0[k] - a0[0] + 0.7)).abs() < 1e-12);
        }
        let s = state(Form1::zeros(g, Kind::Primal), b);
        let c = 1.25;
        let h0 = magnetic_helicity(&s).unwrap();
        let h1 = magnetic_helicity_with_anchor(&s, c).unwrap();
        assert!((h1 - h0 - c * g.area()).abs() < 1e-12);
    }

    #[test]
    fn uniform_flux_is_accepted() {
        let g = grid();
        let n = g.len();
        let b = Form1::new(g, Kind::Primal, vec![1.0; n], vec![0.0; n]).unwrap();
        let a = reconstruct_potential(&b, 0.0).unwrap();
        let (i, j) = (3, 4);
        assert!((a[g.idx(i, j)] - j as f64 * g.hy).abs() < 1e-14);
    }

    #[test]
    fn non_solenoidal_field_is_rejected() {
        let g = grid();
        let mut b = Form1::zeros(g, Kind::Primal);
        b.x[g.idx(2, 3)] = 1.0;
        assert!(matches!(
            reconstruct_potential(&b, 0.0),
            Err(Error::InconsistentPotential { .. })
        ));
    }

    #[test]
    fn current_of_potential_field_is_negative_laplacian() {
        let g = grid();
        let mut r = rng(63);
        let a = random_vec(&mut r, g.len());
        let j = current_density(&b_from_potential(&g, &a).unwrap()).unwrap();
        for jj in 0..g.ny {
            for i in 0..g.nx {
                let k = g.idx(i, jj);
                let lap = (a[g.at(i, jj, 1, 0)] - 2.0 * a[k] + a[g.at(i, jj, -1, 0)]) / (g.hx * g.hx)
                    + (a[g.at(i, jj, 0, 1)] - 2.0 * a[k] + a[g.at(i, jj, 0, -1)]) / (g.hy * g.hy);
                assert!((j.values[k] + lap).abs() <= 1e-12 * lap.abs().max(1.0) / g.hx.min(g.hy));
            }
        }
        let n = g.len();
        let u = Form1::new(g, Kind::Primal, vec![0.3; n], vec![2.0; n]).unwrap();
        assert!(current_density(&u).unwrap().values.iter().all(|x| *x == 0.0));
    }

    fn travelling(nx: usize, nt: usize, c: f64, m: f64) -> Vec<Vec<f64>> {
        let ht = 0.1;
        (0..nt)
            .map(|n| {
                (0..nx)
                    .map(|i| (PI * m * (i as f64 * 2.0 / nx as f64 - c * n as f64 * ht)).sin())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn phase_velocity_of_manufactured_waves() {
        let c = phase_velocity(&travelling(32, 400, 1.0, 1.0), 2.0, 0.1).unwrap();
        assert!((c - 1.0).abs() < 1e-3, "{c}");
        let c = phase_velocity(&travelling(32, 400, -0.75, 2.0), 2.0, 0.1).unwrap();
        assert!((c + 0.75).abs() < 1e-3, "{c}");
    }

    #[test]
    fn standing_wave_has_no_direction() {
        let a = travelling(32, 400, 1.0, 1.0);
        let b = travelling(32, 400, -1.0, 1.0);
        let s: Vec<Vec<f64>> = a.iter().zip(&b).map(|(p, q)| p.iter().zip(q).map(|(x, y)| x + y).collect()).collect();
        assert!(matches!(phase_velocity(&s, 2.0, 0.1), Err(Error::NoDominantDirection { .. })));
    }

    #[test]
    fn noise_has_no_dominant_mode() {
        let mut r = rng(64);
        let s: Vec<Vec<f64>> = (0..50).map(|_| random_vec(&mut r, 32)).collect();
        assert!(matches!(phase_velocity(&s, 2.0, 0.1), Err(Error::NoDominantMode { .. })));
        assert!(matches!(phase_velocity(&s[..2], 2.0, 0.1), Err(Error::ShortSeries(_))));
    }

    #[test]
    fn gauge_anchor_follows_induction_update() {
        let g = Grid::new(16, 16, 2.0, 2.0, 0.0, 0.0).unwrap();
        let mut r = rng(65);
        let a0 = g.sample_cells(|x, y| (PI * x).sin() * (PI * y).cos() + 0.3 * (PI * y).sin());
        let psi = random_vec(&mut r, g.len());
        let s = State::new(
            b_from_potential(&g, &psi).unwrap(),
            b_from_potential(&g, &a0).unwrap(),
            vec![0.0; g.len()],
            0.0,
        )
        .unwrap();
        let cfg = crate::integrator::NewtonConfig { tol: 1e-12, ..Default::default() };
        let (next, _) = crate::integrator::newton_solve(&s, 0.01, &cfg).unwrap();
        let mut gauge = MagneticGauge { anchor: a0[0] };
        gauge.update(&s, &next, 0.01).unwrap();
        let a1 = reconstruct_potential(&next.b, gauge.anchor).unwrap();
        // the advected potential differs from a0 by -ht Q, not by a constant
        let (vbx, vby) = bar_raw(&g, &s.v.x, &s.v.y, &next.v.x, &next.v.y);
        let (bbx, bby) = bar_raw(&g, &s.b.x, &s.b.y, &next.b.x, &next.b.y);
        for k in 0..g.len() {
            let q = vby[k] * bbx[k] - vbx[k] * bby[k];
            assert!((a1[k] - (a0[k] - 0.01 * q)).abs() < 1e-10, "{k}");
        }
    }
}
