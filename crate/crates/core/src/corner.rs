//! Renormalization near corners: core profiles, the velocity fields `V` and
//! `V1`, the correction `q~` built from free evolutions, and the change of
//! variables `Q(x) = x + q(x)`, `Q~(y) = y + q~(y)`, `Q o Q~ = id`.
//!
//! Component functions `g` are stored centered: the corner sits at the
//! origin and `h_j(x) = g_j(x - a_j + q(x))`.

use std::f64::consts::PI;

use crate::cutoff::{chi, phi_leq_k, smooth_step};
use crate::error::{Error, Result};
use crate::initial_data::{center_component, corner_layout, shift_by, CornerSpec};
use crate::kernels::KernelTable;
use crate::spectral::{antiderivative, derivative, poisson_semigroup, rfft, FineInterpolant, Grid, GridFunction};

/// Off-grid access to a centered component: point values and window averages.
#[derive(Debug, Clone)]
pub struct CoreSampler {
    grid: Grid,
    values: FineInterpolant,
    anti: FineInterpolant,
    mean: f64,
}

impl CoreSampler {
    pub fn new(g: &GridFunction) -> CoreSampler {
        CoreSampler {
            grid: g.grid(),
            values: FineInterpolant::new(g, FineInterpolant::DEFAULT_FACTOR),
            anti: FineInterpolant::new(&antiderivative(g), FineInterpolant::DEFAULT_FACTOR),
            mean: g.mean(),
        }
    }

    pub fn value(&self, y: f64) -> f64 {
        self.values.eval(self.grid.wrap(y))
    }

    fn big_g(&self, x: f64) -> f64 {
        self.anti.eval(x) + self.mean * x
    }

    /// `g*(0, alpha) = (1/alpha) int_0^alpha g(-y) dy`.
    pub fn star(&self, alpha: f64) -> f64 {
        (self.big_g(0.0) - self.big_g(-alpha)) / alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    AnnulusZero,
    OuterPlus,
    OuterMinus,
    Inner,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreProfile {
    pub regime: Regime,
    pub value: f64,
}

fn classify(y0: f64, alpha: f64) -> Regime {
    let (a, r) = (alpha.abs(), y0.abs());
    if a < r / 4.0 {
        Regime::Inner
    } else if a > 4.0 * r {
        if alpha > 0.0 {
            Regime::OuterPlus
        } else {
            Regime::OuterMinus
        }
    } else {
        Regime::AnnulusZero
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], 8 points.
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Composite 8-point Gauss-Legendre on `[a, b]` with `pieces` panels.
fn gauss(a: f64, b: f64, pieces: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / pieces as f64;
    let mut acc = 0.0;
    for p in 0..pieces {
        let c = a + (p as f64 + 0.5) * h;
        for &(x, w) in &GL8 {
            acc += w * f(c + 0.5 * h * x);
        }
    }
    0.5 * h * acc
}

/// `g+-(x, alpha)`: window average of `g(-y + q(x-y) - q(x))` over `[0, alpha]`.
fn shifted_average(s: &CoreSampler, q: Option<&FineInterpolant>, x: f64, alpha: f64) -> f64 {
    match q {
        None => s.star(alpha),
        Some(qi) => {
            let qx = qi.eval(x);
            let pieces = ((alpha.abs() / s.grid.spacing()) * 2.0).ceil().max(4.0) as usize;
            gauss(0.0, alpha, pieces, |y| s.value(-y + qi.eval(x - y) - qx)) / alpha
        }
    }
}

fn q_interp(q: &GridFunction) -> Option<FineInterpolant> {
    if q.max_abs() == 0.0 {
        None
    } else {
        Some(FineInterpolant::new(q, FineInterpolant::DEFAULT_FACTOR))
    }
}

/// `p(x, alpha)` for the centered component `g` with base point `a` and shift slice `q`.
pub fn core_profile_p(g: &GridFunction, a: f64, q: &GridFunction, x: f64, alpha: f64) -> Result<CoreProfile> {
    if alpha == 0.0 {
        return Err(Error::ZeroAlpha);
    }
    let s = CoreSampler::new(g);
    let qi = q_interp(q);
    Ok(profile_with(&s, qi.as_ref(), a, x, alpha))
}

fn profile_with(s: &CoreSampler, qi: Option<&FineInterpolant>, a: f64, x: f64, alpha: f64) -> CoreProfile {
    let qx = qi.map_or(0.0, |q| q.eval(x));
    let y0 = s.grid.wrap(x - a + qx);
    let regime = classify(y0, alpha);
    let value = match regime {
        Regime::AnnulusZero => 0.0,
        Regime::Inner => s.value(y0),
        Regime::OuterPlus | Regime::OuterMinus => shifted_average(s, qi, x, alpha),
    };
    CoreProfile { regime, value }
}

/// `P_{<=k} g` evaluated at the origin.
fn low_pass_at_origin(g: &GridFunction, k: i32) -> f64 {
    let grid = g.grid();
    let spec = rfft(g.values());
    let n = grid.n_points();
    let mut acc = 0.0;
    for (m, c) in spec.iter().enumerate() {
        let w = if m == 0 || m == n / 2 { 1.0 } else { 2.0 };
        acc += w * c.re * phi_leq_k(k, grid.frequency(m));
    }
    acc / n as f64
}

/// `p*`: outer regimes replaced by `P_{<=k} g(0)` with `2^k >= (|alpha| t)^{-1/2}` minimal.
pub fn core_profile_pstar(g: &GridFunction, a: f64, t: f64, x: f64, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::ZeroAlpha);
    }
    if t <= 0.0 {
        return Err(Error::ZeroTime);
    }
    if alpha.abs() > 2.0 * t {
        return Err(Error::Regime(format!("|alpha| = {} exceeds 2t = {}", alpha.abs(), 2.0 * t)));
    }
    let grid = g.grid();
    let y0 = grid.wrap(x - a);
    Ok(match classify(y0, alpha) {
        Regime::AnnulusZero => 0.0,
        Regime::Inner => CoreSampler::new(g).value(y0),
        Regime::OuterPlus | Regime::OuterMinus => {
            let k = (-0.5 * (alpha.abs() * t).log2()).ceil() as i32;
            low_pass_at_origin(g, k)
        }
    })
}

/// `T(g)(x, alpha, k)`: average of `g(x - a - y + q(x - y))` against the
/// smoothed window `[psi_{<=0}(2^k y) - psi_{<=0}(2^k (y - alpha))] / alpha`.
pub fn smoothed_average_t(
    g: &GridFunction,
    a: f64,
    q: &GridFunction,
    x: f64,
    alpha: f64,
    k: i32,
    table: &KernelTable,
) -> Result<f64> {
    let s = 2f64.powi(k);
    if s * alpha.abs() < 1.0 {
        return Err(Error::Regime(format!("2^k |alpha| = {} < 1", s * alpha.abs())));
    }
    let sampler = CoreSampler::new(g);
    let qi = q_interp(q);
    let tail = 48.0 / s;
    let lo = alpha.min(0.0) - tail;
    let hi = alpha.max(0.0) + tail;
    let h = (g.grid().spacing() / 2.0).min(0.25 / s);
    let pieces = ((hi - lo) / h).ceil() as usize;
    let qx = |z: f64| qi.as_ref().map_or(0.0, |q| q.eval(z));
    let integral = gauss(lo, hi, pieces, |y| {
        let w = table.psi_leq0.eval(s * y) - table.psi_leq0.eval(s * (y - alpha));
        sampler.value(x - a - y + qx(x - y)) * w
    });
    Ok(integral / alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityParams {
    /// Outer limit of the `|alpha|` integral in `V1`.
    pub cutoff: f64,
    /// Log-alpha nodes per octave.
    pub nodes_per_octave: usize,
}

impl VelocityParams {
    pub fn for_grid(grid: Grid) -> VelocityParams {
        VelocityParams {
            cutoff: grid.period() / 8.0,
            nodes_per_octave: 16,
        }
    }
}

fn sign_factor(slots: usize) -> Result<f64> {
    match slots {
        2 => Ok(-1.0 / PI),
        4 => Ok(1.0 / PI),
        n => Err(Error::InvalidCorner(format!("velocity needs 2 or 4 slots, got {n}"))),
    }
}

/// `int_{t <= |alpha| <= c} F(alpha) / alpha d alpha` in log-alpha, split at
/// the given breakpoints, 8-point Gauss per octave-sized panel.
fn log_alpha_integral(t: f64, c: f64, breaks: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    if c <= t {
        return 0.0;
    }
    let mut pts: Vec<f64> = vec![t.ln(), c.ln()];
    for &b in breaks {
        if b > t && b < c {
            pts.push(b.ln());
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let pieces = ((w[1] - w[0]) / std::f64::consts::LN_2).ceil().max(1.0) as usize;
        acc += gauss(w[0], w[1], pieces, |u| {
            let al = u.exp();
            f(al) - f(-al)
        });
    }
    acc
}

/// Velocity field `V = ((-1)^n / pi) int_{|alpha| >= t} prod p_l / alpha`,
/// with `|alpha|` capped at `params.cutoff`.
pub fn velocity_v(
    gs: &[&GridFunction],
    a_list: &[f64],
    q: &GridFunction,
    t: f64,
    x: f64,
    params: VelocityParams,
) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::ZeroTime);
    }
    let sign = sign_factor(gs.len())?;
    if a_list.len() != gs.len() {
        return Err(Error::InvalidCorner("one base point per slot".into()));
    }
    let samplers: Vec<CoreSampler> = gs.iter().map(|g| CoreSampler::new(g)).collect();
    let qi = q_interp(q);
    let grid = gs[0].grid();
    let qx = qi.as_ref().map_or(0.0, |qq| qq.eval(x));
    let mut breaks = Vec::new();
    for &a in a_list {
        let r = grid.wrap(x - a + qx).abs();
        breaks.push(r / 4.0);
        breaks.push(4.0 * r);
    }
    let integral = log_alpha_integral(t, params.cutoff, &breaks, |al| {
        samplers
            .iter()
            .zip(a_list)
            .map(|(s, &a)| profile_with(s, qi.as_ref(), a, x, al).value)
            .product()
    });
    Ok(sign * integral)
}

/// `r(y, alpha) = g*(alpha) phi_{<=-4}(y/alpha) + g(y) phi_{<=-4}(alpha/y)`.
fn r_value(star: f64, gy: f64, y: f64, alpha: f64) -> f64 {
    let outer = if y == 0.0 { 1.0 } else { chi(16.0 * y / alpha) };
    let inner = if y == 0.0 { 0.0 } else { chi(16.0 * alpha / y) };
    star * outer + gy * inner
}

/// Core velocity `V1 = ((-1)^n/pi) int_{t <= |alpha| <= c} prod r_l / alpha`.
pub fn velocity_v1_core(
    gs: &[&GridFunction],
    a_list: &[f64],
    t: f64,
    y: f64,
    params: VelocityParams,
) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::ZeroTime);
    }
    let sign = sign_factor(gs.len())?;
    let samplers: Vec<CoreSampler> = gs.iter().map(|g| CoreSampler::new(g)).collect();
    let grid = gs[0].grid();
    let rel: Vec<f64> = a_list.iter().map(|&a| grid.wrap(y - a)).collect();
    let gy: Vec<f64> = samplers.iter().zip(&rel).map(|(s, &r)| s.value(r)).collect();
    let mut breaks = Vec::new();
    for &r in &rel {
        for f in [8.0, 16.0] {
            breaks.push(r.abs() / f);
            breaks.push(r.abs() * f);
        }
    }
    let integral = log_alpha_integral(t, params.cutoff, &breaks, |al| {
        samplers
            .iter()
            .zip(rel.iter().zip(&gy))
            .map(|(s, (&r, &g))| r_value(s.star(al), g, r, al))
            .product()
    });
    Ok(sign * integral)
}

/// `V1[g, g](s, .)` on the whole grid for a component with corner at `a`,
/// times the spatial cutoff `phi`. Midpoint rule in log-alpha.
fn v1_diagonal_profile(
    s_time: f64,
    g: &GridFunction,
    a: f64,
    phi: &[f64],
    params: VelocityParams,
) -> Vec<f64> {
    let grid = g.grid();
    let sampler = CoreSampler::new(g);
    let c = params.cutoff;
    let mut out = vec![0.0; grid.n_points()];
    if s_time >= c {
        return out;
    }
    let octaves = (c / s_time).log2();
    let n_nodes = ((octaves * params.nodes_per_octave as f64).ceil() as usize).max(8);
    let du = (c / s_time).ln() / n_nodes as f64;
    let alphas: Vec<f64> = (0..n_nodes)
        .map(|i| s_time * ((i as f64 + 0.5) * du).exp())
        .collect();
    let star_p: Vec<f64> = alphas.iter().map(|&al| sampler.star(al)).collect();
    let star_m: Vec<f64> = alphas.iter().map(|&al| sampler.star(-al)).collect();
    let gv = g.values();
    for i in 0..grid.n_points() {
        if phi[i] == 0.0 {
            continue;
        }
        let y = grid.wrap(grid.x(i) - a);
        // beyond c/8 only the inner term survives, and it is even in alpha
        if y.abs() >= c / 8.0 {
            continue;
        }
        let gy = if a == 0.0 { gv[i] } else { sampler.value(y) };
        let mut acc = 0.0;
        for (j, &al) in alphas.iter().enumerate() {
            let rp = r_value(star_p[j], gy, y, al);
            let rm = r_value(star_m[j], gy, y, -al);
            acc += rp * rp - rm * rm;
        }
        out[i] = -(1.0 / PI) * du * acc * phi[i];
    }
    out
}

/// `q~`, `q` and `d q~/dt` on a list of times.
#[derive(Debug, Clone)]
pub struct CorrectionTable {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub qtilde_values: Vec<GridFunction>,
    pub q_values: Vec<GridFunction>,
    pub dq_dt: Vec<GridFunction>,
}

impl CorrectionTable {
    /// Identically zero correction.
    pub fn zero(grid: Grid, times: &[f64]) -> CorrectionTable {
        let z = GridFunction::zeros(grid);
        CorrectionTable {
            grid,
            times: times.to_vec(),
            qtilde_values: vec![z.clone(); times.len()],
            q_values: vec![z.clone(); times.len()],
            dq_dt: vec![z; times.len()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.qtilde_values.iter().all(|q| q.max_abs() == 0.0)
    }

    fn locate(&self, t: f64) -> (usize, usize, f64) {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return (0, 0, 0.0);
        }
        if t >= self.times[n - 1] {
            return (n - 1, n - 1, 0.0);
        }
        let j = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        if (t - t0).abs() <= 1e-14 * t1.max(1.0) {
            return (j - 1, j - 1, 0.0);
        }
        (j - 1, j, (t - t0) / (t1 - t0))
    }

    fn slice(values: &[GridFunction], loc: (usize, usize, f64)) -> GridFunction {
        let (i, j, w) = loc;
        if i == j || w == 0.0 {
            return values[i].clone();
        }
        values[i].scale(1.0 - w).add(&values[j].scale(w))
    }

    /// Linear interpolation in time between stored slices.
    pub fn qtilde_at(&self, t: f64) -> GridFunction {
        Self::slice(&self.qtilde_values, self.locate(t))
    }

    pub fn q_at(&self, t: f64) -> GridFunction {
        Self::slice(&self.q_values, self.locate(t))
    }

    pub fn dq_dt_at(&self, t: f64) -> GridFunction {
        if t >= 1.0 {
            return GridFunction::zeros(self.grid);
        }
        Self::slice(&self.dq_dt, self.locate(t))
    }

    /// Predicted corner position `Q~(t, a) = a + q~(t, a)`.
    pub fn predicted_position(&self, t: f64, a: f64) -> f64 {
        let q = self.qtilde_at(t);
        a + FineInterpolant::new(&q, FineInterpolant::DEFAULT_FACTOR).eval(a)
    }
}

/// Spatial cutoff equal to 1 on the corner plateau, 0 beyond twice its radius.
fn corner_cutoff(grid: Grid, a: f64, rho: f64) -> Vec<f64> {
    (0..grid.n_points())
        .map(|i| {
            let y = grid.wrap(grid.x(i) - a);
            1.0 - smooth_step((y.abs() - rho) / rho)
        })
        .collect()
}

/// Log-graded integration nodes on `(0, t_end]` merged with `extra`.
fn s_grid(t_end: f64, per_decade: usize, extra: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = Vec::new();
    let lo = -6.0f64;
    let mut i = 0;
    loop {
        let v = 10f64.powf(lo + i as f64 / per_decade as f64);
        if v >= t_end {
            break;
        }
        s.push(v);
        i += 1;
    }
    s.extend(extra.iter().copied().filter(|&t| t > 0.0 && t <= t_end));
    s.push(t_end);
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    s
}

/// Cumulative `int_0^{s_i} v ds` per grid point, first panel modelled as
/// `A + B log(1/s)` (the integrand's small-`s` behaviour).
fn cumulative(s: &[f64], v: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = v[0].len();
    let mut out = Vec::with_capacity(s.len());
    let mut acc = vec![0.0; n];
    for i in 0..n {
        let (s1, s2) = (s[0], s[1.min(s.len() - 1)]);
        let (l1, l2) = ((1.0 / s1).ln(), (1.0 / s2).ln());
        let (v1, v2) = (v[0][i], v[1.min(s.len() - 1)][i]);
        let b = if (l1 - l2).abs() > 0.0 { (v1 - v2) / (l1 - l2) } else { 0.0 };
        let a = v1 - b * l1;
        acc[i] = s1 * (a + b * (l1 + 1.0));
    }
    out.push(acc.clone());
    for k in 1..s.len() {
        let h = s[k] - s[k - 1];
        for i in 0..n {
            acc[i] += 0.5 * h * (v[k - 1][i] + v[k][i]);
        }
        out.push(acc.clone());
    }
    out
}

/// Builds `q~(t, x) = -sum_j phi_j(x) int_0^{min(t,1)} V1[g_j^0, g_j^0](s, x) ds`
/// from the free evolutions of the (uncentered) components, then fills `q`.
pub fn qtilde_from_free_evolution(
    components: &[GridFunction],
    corners: &[CornerSpec],
    times: &[f64],
    params: VelocityParams,
) -> Result<CorrectionTable> {
    if times.is_empty() || times[0] != 0.0 {
        return Err(Error::TimeGridTooCoarse("time list must start at 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::TimeGridTooCoarse("times must increase".into()));
    }
    let grid = components
        .first()
        .map(|c| c.grid())
        .ok_or_else(|| Error::InvalidCorner("no components".into()))?;
    if components.len() != corners.len() {
        return Err(Error::InvalidCorner("one component per corner".into()));
    }
    let t_last = *times.last().unwrap();
    if t_last == 0.0 {
        return Ok(CorrectionTable::zero(grid, times));
    }
    let t_end = t_last.min(1.0);
    let layout = corner_layout(corners, grid)?;
    let centered: Vec<GridFunction> = components
        .iter()
        .zip(corners)
        .map(|(h, c)| center_component(h, c.location))
        .collect();
    // cutoffs in the centered frame
    let cut: Vec<Vec<f64>> = layout
        .plateau
        .iter()
        .map(|&rho| corner_cutoff(grid, 0.0, rho))
        .collect();

    let s = s_grid(t_end, 8, times);
    let velocity_at = |si: f64| -> Result<Vec<f64>> {
        let mut v = vec![0.0; grid.n_points()];
        for ((g0, c), phi) in centered.iter().zip(corners).zip(&cut) {
            let g = poisson_semigroup(g0, si)?;
            // profile computed centered, then rolled back to the corner
            let prof = v1_diagonal_profile(si, &g, 0.0, phi, params);
            let prof = shift_by(&GridFunction::from_vec(grid, prof), c.location);
            for (a, b) in v.iter_mut().zip(prof.values()) {
                *a += b;
            }
        }
        Ok(v)
    };
    let v: Vec<Vec<f64>> = s.iter().map(|&si| velocity_at(si)).collect::<Result<_>>()?;
    let cum = cumulative(&s, &v);

    // log-integral self-consistency: every other node must agree within 5%
    if s.len() >= 5 {
        let idx: Vec<usize> = (0..s.len()).filter(|i| i % 2 == 0 || *i == s.len() - 1).collect();
        let sc: Vec<f64> = idx.iter().map(|&i| s[i]).collect();
        let vc: Vec<Vec<f64>> = idx.iter().map(|&i| v[i].clone()).collect();
        let coarse = cumulative(&sc, &vc);
        let fine_end = cum.last().unwrap();
        let coarse_end = coarse.last().unwrap();
        let scale = fine_end.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = fine_end
            .iter()
            .zip(coarse_end)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if diff > 0.05 * scale + 1e-15 {
            return Err(Error::TimeGridTooCoarse(format!(
                "time integral of V1 changes by {:.2e} (scale {:.2e}) when halving nodes",
                diff, scale
            )));
        }
    }

    let mut qtilde_values = Vec::with_capacity(times.len());
    let mut dq_dt = Vec::with_capacity(times.len());
    for &t in times {
        if t == 0.0 {
            qtilde_values.push(GridFunction::zeros(grid));
            dq_dt.push(GridFunction::from_vec(grid, v[0].iter().map(|x| -x).collect()));
            continue;
        }
        let te = t.min(1.0);
        let k = s
            .iter()
            .position(|&si| (si - te).abs() <= 1e-14 * te.max(1e-300))
            .expect("time merged into the s-grid");
        qtilde_values.push(GridFunction::from_vec(grid, cum[k].iter().map(|x| -x).collect()));
        if t >= 1.0 {
            dq_dt.push(GridFunction::zeros(grid));
        } else {
            dq_dt.push(GridFunction::from_vec(grid, v[k].iter().map(|x| -x).collect()));
        }
    }
    let mut table = CorrectionTable {
        grid,
        times: times.to_vec(),
        q_values: vec![GridFunction::zeros(grid); times.len()],
        qtilde_values,
        dq_dt,
    };
    invert_change_of_variables(&mut table)?;
    Ok(table)
}

/// Given `sigma`, returns `tau` with `(id + sigma) o (id + tau) = id`.
pub fn invert_shift(sigma: &GridFunction) -> Result<GridFunction> {
    let grid = sigma.grid();
    if sigma.max_abs() == 0.0 {
        return Ok(GridFunction::zeros(grid));
    }
    let ds = derivative(sigma);
    let dmin = ds.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if ds.max_abs() >= 0.5 {
        return Err(Error::NotMonotone(1.0 + dmin));
    }
    let si = FineInterpolant::new(sigma, FineInterpolant::DEFAULT_FACTOR);
    let dsi = FineInterpolant::new(&ds, FineInterpolant::DEFAULT_FACTOR);
    let mut out = Vec::with_capacity(grid.n_points());
    for i in 0..grid.n_points() {
        let x = grid.x(i);
        let mut y = x - si.eval(x);
        let mut res = f64::INFINITY;
        for _ in 0..50 {
            res = y + si.eval(y) - x;
            if res.abs() < 1e-14 * (1.0 + x.abs()) {
                break;
            }
            y -= res / (1.0 + dsi.eval(y));
        }
        if res.abs() > 1e-10 {
            return Err(Error::NotMonotone(1.0 + dmin));
        }
        out.push(y - x);
    }
    Ok(GridFunction::from_vec(grid, out))
}

/// Fills `q` from `q~` slice by slice.
pub fn invert_change_of_variables(table: &mut CorrectionTable) -> Result<()> {
    for (i, qt) in table.qtilde_values.iter().enumerate() {
        table.q_values[i] = invert_shift(qt)?;
    }
    Ok(())
}

/// `h(x) = f(x - a + q(x))` for a centered component `f`.
pub fn renormalize_compose_with(f: &GridFunction, a: f64, q: &GridFunction) -> GridFunction {
    if q.max_abs() == 0.0 {
        return shift_by(f, a);
    }
    let grid = f.grid();
    let fi = FineInterpolant::new(f, FineInterpolant::DEFAULT_FACTOR);
    let qv = q.values();
    GridFunction::from_vec(
        grid,
        (0..grid.n_points())
            .map(|i| fi.eval(grid.wrap(grid.x(i) - a + qv[i])))
            .collect(),
    )
}

pub fn renormalize_compose(f: &GridFunction, a: f64, table: &CorrectionTable, t: f64) -> GridFunction {
    renormalize_compose_with(f, a, &table.q_at(t))
}

/// Inverse of [`renormalize_compose_with`]: `f(z) = h(Q~(z + a))`.
pub fn pull_back(h: &GridFunction, a: f64, qtilde: &GridFunction) -> GridFunction {
    if qtilde.max_abs() == 0.0 {
        return shift_by(h, -a);
    }
    let grid = h.grid();
    let hi = FineInterpolant::new(h, FineInterpolant::DEFAULT_FACTOR);
    let qi = FineInterpolant::new(qtilde, FineInterpolant::DEFAULT_FACTOR);
    GridFunction::from_vec(
        grid,
        (0..grid.n_points())
            .map(|i| {
                let y = grid.x(i) + a;
                hi.eval(y + qi.eval(y))
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_boundaries() {
        assert_eq!(classify(1.0, 1.0), Regime::AnnulusZero);
        assert_eq!(classify(1.0, 0.2), Regime::Inner);
        assert_eq!(classify(1.0, -5.0), Regime::OuterMinus);
        assert_eq!(classify(0.0, 1e-3), Regime::OuterPlus);
    }

    #[test]
    fn gauss_integrates_polynomials() {
        let v = gauss(0.0, 2.0, 3, |x| x.powi(7));
        assert!((v - 2f64.powi(8) / 8.0).abs() < 1e-11);
    }
}
