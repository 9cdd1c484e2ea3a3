//! Two constructions of the solution.
//!
//! * Duhamel iteration on the renormalized per-corner system
//!   `(d_t + |grad|) g_j = F_j`, with the time integral done by product
//!   quadrature (exact semigroup weights per mode, `F` piecewise linear).
//! * A predictor-corrector exponential integrator on the physical equation.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::corner::{pull_back, renormalize_compose_with, CorrectionTable};
use crate::diagnostics::z2_distance;
use crate::error::{Error, Result};
use crate::initial_data::{center_component, shift_by, CornerSpec};
use crate::rhs::{full_nonlinearity, nonlinearity_per_corner, taylor_sum, AlphaQuadrature};
use crate::spectral::{
    abs_gradient, derivative, from_spectrum, irfft, poisson_semigroup, rfft, Grid, GridFunction,
};

/// Which nonlinearity the stepper integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    /// All orders, closed form.
    Full,
    /// `sum_{n <= n_max} N_n`.
    Taylor(usize),
}

impl Nonlinearity {
    pub fn eval(&self, h: &GridFunction, q: &AlphaQuadrature) -> Result<GridFunction> {
        match *self {
            Nonlinearity::Full => full_nonlinearity(h, q),
            Nonlinearity::Taylor(n) => {
                let orders: Vec<usize> = (1..=n).collect();
                let hc = h.map(|v| v - h.mean());
                taylor_sum(&hc, &hc, &orders, q)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub times: Vec<f64>,
}

impl TimeGrid {
    /// Geometric steps (ratio sqrt 2) from `dt_max / 4096` up to `dt_max`,
    /// then uniform steps of at most `dt_max`; `extra` times are inserted.
    pub fn graded(t_end: f64, dt_max: f64, extra: &[f64]) -> Result<TimeGrid> {
        if !(t_end >= 0.0) || !(dt_max > 0.0) {
            return Err(Error::TimeGridTooCoarse(format!(
                "t_end = {t_end}, dt_max = {dt_max}"
            )));
        }
        let mut times = vec![0.0];
        if t_end > 0.0 {
            let mut dt = dt_max / 4096.0;
            let mut t = 0.0;
            while dt < dt_max && t + dt < t_end {
                t += dt;
                times.push(t);
                dt *= std::f64::consts::SQRT_2;
            }
            let rest = t_end - t;
            let steps = (rest / dt_max - 1e-9).ceil().max(1.0) as usize;
            for i in 1..=steps {
                times.push(t + rest * i as f64 / steps as f64);
            }
            *times.last_mut().unwrap() = t_end;
        }
        for &e in extra {
            if e > 0.0 && e < t_end && !times.iter().any(|&t| (t - e).abs() <= 1e-12 * t_end) {
                times.push(e);
            }
        }
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(TimeGrid { times })
    }

    /// Uniform grid with `n` steps.
    pub fn uniform(t_end: f64, n: usize) -> TimeGrid {
        TimeGrid {
            times: (0..=n).map(|i| t_end * i as f64 / n as f64).collect(),
        }
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * self.times.last().copied().unwrap_or(1.0).max(1.0);
        self.times.iter().position(|&s| (s - t).abs() <= tol)
    }
}

/// Exact semigroup weights on a step `dt`: `e^{-z}`, `w_a`, `w_b` per mode,
/// `z = |xi| dt`, for `F` linear across the step.
#[derive(Debug, Clone)]
struct StepWeights {
    decay: Vec<f64>,
    wa: Vec<f64>,
    wb: Vec<f64>,
}

fn step_weights(grid: Grid, dt: f64) -> StepWeights {
    let n = grid.n_points() / 2 + 1;
    let mut decay = Vec::with_capacity(n);
    let mut wa = Vec::with_capacity(n);
    let mut wb = Vec::with_capacity(n);
    for m in 0..n {
        let z = grid.frequency(m) * dt;
        let (total, b) = if z < 0.1 {
            // series of (1-e^{-z})/z and (z-1+e^{-z})/z^2
            let mut t = 0.0;
            let mut bb = 0.0;
            let mut term = 1.0;
            for k in 0..12 {
                t += term / fact(k + 1);
                bb += term / fact(k + 2);
                term *= -z;
            }
            (t, bb)
        } else {
            (-(-z).exp_m1() / z, (z + (-z).exp_m1()) / (z * z))
        };
        decay.push((-z).exp());
        wb.push(dt * b);
        wa.push(dt * (total - b));
    }
    StepWeights { decay, wa, wb }
}

fn fact(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

struct WeightCache {
    grid: Grid,
    map: HashMap<u64, StepWeights>,
}

impl WeightCache {
    fn new(grid: Grid) -> WeightCache {
        WeightCache {
            grid,
            map: HashMap::new(),
        }
    }

    fn get(&mut self, dt: f64) -> &StepWeights {
        let grid = self.grid;
        self.map
            .entry(dt.to_bits())
            .or_insert_with(|| step_weights(grid, dt))
    }
}

/// One Duhamel sub-step in spectral form:
/// `I(t+dt) = e^{-dt|grad|} I(t) + w_a F(t) + w_b F(t+dt)`.
fn duhamel_substep(
    acc: &mut [Complex64],
    f0: &[Complex64],
    f1: &[Complex64],
    w: &StepWeights,
) {
    for m in 0..acc.len() {
        acc[m] = acc[m] * w.decay[m] + f0[m] * w.wa[m] + f1[m] * w.wb[m];
    }
}

/// `int_0^{t_i} e^{-(t_i - s)|grad|} F(s) ds` at every node of `times`.
pub fn duhamel_integral(times: &[f64], forcing: &[GridFunction]) -> Vec<GridFunction> {
    let grid = forcing[0].grid();
    let mut cache = WeightCache::new(grid);
    let spectra: Vec<Vec<Complex64>> = forcing.iter().map(|f| rfft(f.values())).collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.n_points() / 2 + 1];
    let mut out = vec![GridFunction::zeros(grid)];
    for i in 1..times.len() {
        let w = cache.get(times[i] - times[i - 1]);
        duhamel_substep(&mut acc, &spectra[i - 1], &spectra[i], w);
        out.push(from_spectrum(grid, acc.clone()));
    }
    out
}

/// Renormalized problem: corners, centered initial components, time grid,
/// correction table and quadrature.
#[derive(Debug, Clone)]
pub struct RenormalizedProblem {
    pub corners: Vec<CornerSpec>,
    pub initial: Vec<GridFunction>,
    pub time_grid: TimeGrid,
    pub qtab: CorrectionTable,
    pub quad: AlphaQuadrature,
    pub n_max: usize,
}

impl RenormalizedProblem {
    /// `components` are the uncentered `h_{j,0}`; `qtab` must be tabulated on
    /// the time grid.
    pub fn new(
        corners: &[CornerSpec],
        components: &[GridFunction],
        time_grid: TimeGrid,
        qtab: CorrectionTable,
        quad: AlphaQuadrature,
        n_max: usize,
    ) -> Result<RenormalizedProblem> {
        if qtab.times.len() != time_grid.times.len()
            || qtab
                .times
                .iter()
                .zip(&time_grid.times)
                .any(|(a, b)| (a - b).abs() > 1e-14 * b.max(1.0))
        {
            return Err(Error::GridMismatch("correction table not on the solver time grid".into()));
        }
        if !(1..=3).contains(&n_max) {
            return Err(Error::TaylorOrder(n_max));
        }
        Ok(RenormalizedProblem {
            corners: corners.to_vec(),
            initial: components
                .iter()
                .zip(corners)
                .map(|(h, c)| center_component(h, c.location))
                .collect(),
            time_grid,
            qtab,
            quad,
            n_max,
        })
    }

    pub fn grid(&self) -> Grid {
        self.quad.grid()
    }
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub g_components: Vec<GridFunction>,
    pub h_components: Vec<GridFunction>,
    pub h_total: GridFunction,
    pub iterate_index: usize,
}

/// Assembles `h_j = g_j(x - a_j + q)` and `h = sum_j h_j` at node `i`.
pub fn assemble(p: &RenormalizedProblem, i: usize, gs: &[GridFunction], m: usize) -> SolverState {
    let t = p.time_grid.times[i];
    let q = &p.qtab.q_values[i];
    let h_components: Vec<GridFunction> = gs
        .iter()
        .zip(&p.corners)
        .map(|(g, c)| renormalize_compose_with(g, c.location, q))
        .collect();
    let mut h_total = GridFunction::zeros(p.grid());
    for h in &h_components {
        h_total.axpy(1.0, h);
    }
    SolverState {
        t,
        g_components: gs.to_vec(),
        h_components,
        h_total,
        iterate_index: m,
    }
}

/// `g_j^0(t) = e^{-t|grad|} g_{0,j}` at every node, indexed `[node][corner]`.
pub fn free_evolution_init(p: &RenormalizedProblem) -> Result<Vec<Vec<GridFunction>>> {
    p.time_grid
        .times
        .iter()
        .map(|&t| p.initial.iter().map(|g| poisson_semigroup(g, t)).collect())
        .collect()
}

/// The four-term forcing in the centered frame of corner `j` at node `i`:
/// `dh_j(Q~) d_t q~ + N_{h_j}(Q~) - |grad| g_j dq(Q~) - E_j(Q~)`, with
/// `E_j = |grad| h_j - (|grad| g_j)(x - a_j + q)(1 + q')`.
pub fn forcing_f_j(p: &RenormalizedProblem, i: usize, state: &SolverState, j: usize) -> Result<GridFunction> {
    let a = p.corners[j].location;
    let h = state.h_total.map(|v| v - state.h_total.mean());
    let n_hj = nonlinearity_per_corner(&state.h_components[j], &h, &p.quad, p.n_max)?;
    if p.qtab.is_zero() {
        return Ok(shift_by(&n_hj, -a));
    }
    let qt = &p.qtab.qtilde_values[i];
    let q = &p.qtab.q_values[i];
    let dqt = &p.qtab.dq_dt[i];
    let g = &state.g_components[j];
    let hj = &state.h_components[j];
    let grad_g = abs_gradient(g);
    let dq = derivative(q);
    let e_j = abs_gradient(hj).sub(&renormalize_compose_with(&grad_g, a, q).mul(&dq.map(|v| 1.0 + v)));
    let t1 = pull_back(&derivative(hj), a, qt).mul(&shift_by(dqt, -a));
    let t2 = pull_back(&n_hj, a, qt);
    let t3 = grad_g.mul(&pull_back(&dq, a, qt));
    let t4 = pull_back(&e_j, a, qt);
    Ok(t1.add(&t2).sub(&t3).sub(&t4))
}

/// One Duhamel sweep: `g^{m+1}(t) = e^{-t|grad|} g_0 + int_0^t e^{-(t-s)|grad|} F^m(s) ds`.
pub fn duhamel_iterate(
    p: &RenormalizedProblem,
    iterate: &[Vec<GridFunction>],
    m: usize,
) -> Result<Vec<Vec<GridFunction>>> {
    let times = &p.time_grid.times;
    let nc = p.corners.len();
    let mut forcing: Vec<Vec<GridFunction>> = vec![Vec::with_capacity(times.len()); nc];
    for (i, gs) in iterate.iter().enumerate() {
        let state = assemble(p, i, gs, m);
        for (j, fj) in forcing.iter_mut().enumerate() {
            let f = forcing_f_j(p, i, &state, j)?;
            if !f.is_finite() {
                return Err(Error::BlowUp(times[i]));
            }
            fj.push(f);
        }
    }
    let integrals: Vec<Vec<GridFunction>> = forcing.iter().map(|f| duhamel_integral(times, f)).collect();
    let free = free_evolution_init(p)?;
    Ok((0..times.len())
        .map(|i| {
            (0..nc)
                .map(|j| free[i][j].add(&integrals[j][i]))
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    /// `d_m = ||g^{m+1} - g^m||_{Z2}` (summed over corners).
    pub distances: Vec<f64>,
}

impl IterationTrace {
    pub fn ratios(&self) -> Vec<f64> {
        self.distances
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationControl {
    pub max_iterations: usize,
    /// Stop once `d_m <= stop_tolerance`.
    pub stop_tolerance: f64,
    /// Ignore the tolerance and run exactly this many sweeps.
    pub fixed_iterations: Option<usize>,
}

impl IterationControl {
    pub fn for_epsilon(epsilon: f64) -> IterationControl {
        IterationControl {
            max_iterations: 8,
            stop_tolerance: 1e-4 * epsilon,
            fixed_iterations: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DuhamelSolution {
    /// `[node][corner]` centered components of the last iterate.
    pub components: Vec<Vec<GridFunction>>,
    pub trace: IterationTrace,
}

impl DuhamelSolution {
    pub fn state(&self, p: &RenormalizedProblem, i: usize) -> SolverState {
        assemble(p, i, &self.components[i], self.trace.distances.len())
    }
}

fn iterate_distance(p: &RenormalizedProblem, a: &[Vec<GridFunction>], b: &[Vec<GridFunction>]) -> f64 {
    let times = &p.time_grid.times;
    (0..p.corners.len())
        .map(|j| {
            let diff: Vec<(f64, GridFunction)> = times
                .iter()
                .enumerate()
                .map(|(i, &t)| (t, a[i][j].sub(&b[i][j])))
                .collect();
            z2_distance(&diff)
        })
        .sum()
}

pub fn duhamel_run(p: &RenormalizedProblem, control: IterationControl) -> Result<DuhamelSolution> {
    let mut current = free_evolution_init(p)?;
    let mut trace = IterationTrace::default();
    let sweeps = control.fixed_iterations.unwrap_or(control.max_iterations);
    for m in 0..sweeps {
        let next = duhamel_iterate(p, &current, m)?;
        let d = iterate_distance(p, &next, &current);
        if !d.is_finite() {
            return Err(Error::BlowUp(*p.time_grid.times.last().unwrap()));
        }
        trace.distances.push(d);
        current = next;
        if control.fixed_iterations.is_none() && d <= control.stop_tolerance {
            break;
        }
    }
    Ok(DuhamelSolution {
        components: current,
        trace,
    })
}

/// One predictor-corrector exponential-integrator step:
/// predictor `e^{-dt|grad|}[h + dt N(h)]`, corrector
/// `e^{-dt|grad|} h + w_a N(h) + w_b N(h_pred)`.
pub fn imex_step(
    h: &GridFunction,
    dt: f64,
    model: Nonlinearity,
    q: &AlphaQuadrature,
) -> Result<GridFunction> {
    let w = step_weights(h.grid(), dt);
    imex_step_with(h, &w, dt, model, q)
}

fn imex_step_with(
    h: &GridFunction,
    w: &StepWeights,
    dt: f64,
    model: Nonlinearity,
    q: &AlphaQuadrature,
) -> Result<GridFunction> {
    let grid = h.grid();
    let n0 = model.eval(h, q)?;
    let hs = rfft(h.values());
    let ns = rfft(n0.values());
    let pred: Vec<Complex64> = (0..hs.len())
        .map(|m| (hs[m] + ns[m] * dt) * w.decay[m])
        .collect();
    let hp = GridFunction::from_vec(grid, irfft(pred, grid.n_points()));
    let n1 = model.eval(&hp, q)?;
    let n1s = rfft(n1.values());
    let mut out = hs;
    for m in 0..out.len() {
        out[m] = out[m] * w.decay[m] + ns[m] * w.wa[m] + n1s[m] * w.wb[m];
    }
    let next = from_spectrum(grid, out);
    if let Some(i) = next.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(next)
}

/// IMEX trajectory on every node of `times`.
pub fn imex_run(
    h0: &GridFunction,
    times: &TimeGrid,
    model: Nonlinearity,
    q: &AlphaQuadrature,
) -> Result<Vec<GridFunction>> {
    let mut cache = WeightCache::new(h0.grid());
    let mut out = vec![h0.clone()];
    let scale = h0.max_abs().max(1e-300);
    for i in 1..times.times.len() {
        let dt = times.times[i] - times.times[i - 1];
        let w = cache.get(dt).clone();
        let next = imex_step_with(&out[i - 1], &w, dt, model, q)
            .map_err(|e| match e {
                Error::NonFinite(_) => Error::BlowUp(times.times[i]),
                e => e,
            })?;
        if next.max_abs() > 1e3 * scale {
            return Err(Error::BlowUp(times.times[i]));
        }
        out.push(next);
    }
    Ok(out)
}
