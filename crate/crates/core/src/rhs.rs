//! The Muskat nonlinearity and its Taylor terms.
//!
//! `N(h)` here is the nonlinear part of the right-hand side, i.e.
//! `d_t h + |grad| h = N(h)` with
//!
//! ```text
//! N(h) = -(1/pi) d/dx int d_x h*(x,a) h*(x,a)^2 / (1 + h*(x,a)^2) da,
//! N_n[h1, h, .., h] = ((-1)^n/pi) d/dx int d_x h1*(x,a) h*(x,a)^{2n} da.
//! ```
//!
//! On the torus the alpha-integral over the real line is folded onto one
//! period: `a = b + mL` with `b` on the fine grid in `[-L/2, L/2]`, and the
//! sum over images `m` is done in closed form (cot kernels). With
//! `dh = h(x) - h(x-b)` and `D = H(x) - H(x-b)` both periodic in `b`, the
//! folded integrand is smooth and periodic, so the trapezoid rule on the
//! fine grid converges spectrally. The node `b = 0` carries the limit value.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{
    antiderivative, derivative, lp_project, resample, band_range, DyadicBand, FineInterpolant,
    GridFunction,
};
use crate::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterTail {
    /// Exact sum over all periodic images (`cutoff_outer = inf`).
    Periodized,
    /// Images `|m| <= periods` only: `cutoff_outer = (periods + 1/2) L`.
    Images(usize),
}

/// Symmetric trapezoid rule in `b`, aligned with a fine grid of
/// `refine * n_points` points.
#[derive(Debug, Clone)]
pub struct AlphaQuadrature {
    grid: Grid,
    refine: usize,
    tail: OuterTail,
}

impl AlphaQuadrature {
    pub fn new(grid: Grid, refine: usize, tail: OuterTail) -> AlphaQuadrature {
        assert!(refine >= 1 && refine.is_power_of_two(), "refine must be a power of two");
        AlphaQuadrature { grid, refine, tail }
    }

    /// Default: 2x dealiasing, all images.
    pub fn standard(grid: Grid) -> AlphaQuadrature {
        AlphaQuadrature::new(grid, 2, OuterTail::Periodized)
    }

    /// Same layout with twice the node count.
    pub fn doubled(&self) -> AlphaQuadrature {
        AlphaQuadrature::new(self.grid, self.refine * 2, self.tail)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn refine(&self) -> usize {
        self.refine
    }

    pub fn tail(&self) -> OuterTail {
        self.tail
    }

    pub fn fine_grid(&self) -> Grid {
        self.grid.refined(self.refine)
    }

    pub fn node_spacing(&self) -> f64 {
        self.fine_grid().spacing()
    }

    pub fn cutoff_inner(&self) -> f64 {
        0.5 * self.node_spacing()
    }

    pub fn cutoff_outer(&self) -> f64 {
        match self.tail {
            OuterTail::Periodized => f64::INFINITY,
            OuterTail::Images(p) => (p as f64 + 0.5) * self.grid.period(),
        }
    }

    /// Positive folded nodes `b_j = j * db`, `j = 1..=M/2`; each is paired with `-b_j`.
    pub fn nodes(&self) -> Vec<f64> {
        let m = self.fine_grid().n_points();
        let db = self.node_spacing();
        (1..=m / 2).map(|j| j as f64 * db).collect()
    }

    /// Weight of each `+-b_j` (the antipodal node is shared by both signs).
    pub fn weights(&self) -> Vec<f64> {
        let m = self.fine_grid().n_points();
        let db = self.node_spacing();
        (1..=m / 2)
            .map(|j| if j == m / 2 { 0.5 * db } else { db })
            .collect()
    }

    fn image_range(&self) -> Option<i64> {
        match self.tail {
            OuterTail::Periodized => None,
            OuterTail::Images(p) => Some(p as i64),
        }
    }
}

/// `h*(x, a)` on grid points times a list of `a` values.
#[derive(Debug, Clone)]
pub struct SlopeAverages {
    pub alphas: Vec<f64>,
    /// `values[i][j] = h*(x_i, alphas[j])`
    pub values: Vec<Vec<f64>>,
}

impl SlopeAverages {
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `h*` at the quadrature nodes `+-b_j`.
pub fn slope_average(h: &GridFunction, q: &AlphaQuadrature) -> Result<SlopeAverages> {
    let nodes = q.nodes();
    let alphas: Vec<f64> = nodes.iter().flat_map(|&b| [b, -b]).collect();
    slope_average_at(h, &alphas)
}

/// `h*(x, a) = (H(x) - H(x - a)) / a` for arbitrary nonzero `a`, with the
/// antiderivative unwrapped across periods (`H(x + L) = H(x) + L mean(h)`).
pub fn slope_average_at(h: &GridFunction, alphas: &[f64]) -> Result<SlopeAverages> {
    let grid = h.grid();
    let limit = 0.5 * grid.spacing();
    if let Some(&a) = alphas.iter().find(|a| a.abs() < limit) {
        return Err(Error::AlphaTooSmall { alpha: a, limit });
    }
    let mean = h.mean();
    let hp = antiderivative(h);
    let interp = FineInterpolant::new(&hp, FineInterpolant::DEFAULT_FACTOR);
    let values = (0..grid.n_points())
        .map(|i| {
            let x = grid.x(i);
            let hx = hp.values()[i];
            alphas
                .iter()
                .map(|&a| (hx - interp.eval(x - a) + mean * a) / a)
                .collect()
        })
        .collect();
    Ok(SlopeAverages {
        alphas: alphas.to_vec(),
        values,
    })
}

/// Samples on the fine grid: values, periodic antiderivative, derivative.
pub(crate) struct FineSamples {
    pub vals: Vec<f64>,
    pub anti: Vec<f64>,
    pub deriv: Vec<f64>,
    pub mean: f64,
}

pub(crate) fn fine_samples(f: &GridFunction, fine_n: usize) -> FineSamples {
    let up = resample(f, fine_n);
    FineSamples {
        mean: f.mean(),
        anti: antiderivative(&up).into_values(),
        deriv: derivative(&up).into_values(),
        vals: up.into_values(),
    }
}

/// Finishes a folded integral computed on the fine grid: truncation to the
/// coarse modes and the outer spectral derivative.
pub(crate) fn outer_derivative(fine: Vec<f64>, q: &AlphaQuadrature) -> GridFunction {
    let fg = q.fine_grid();
    let coarse = resample(&GridFunction::from_vec(fg, fine), q.grid.n_points());
    derivative(&coarse)
}

/// Coefficients of `P_j` with `cot^{(j)}(u) = P_j(cot u)`.
fn cot_derivative_polys(jmax: usize) -> Vec<Vec<f64>> {
    let mut polys = vec![vec![0.0, 1.0]];
    for j in 0..jmax {
        let p = &polys[j];
        // derivative
        let dp: Vec<f64> = (1..p.len()).map(|i| i as f64 * p[i]).collect();
        // -(1 + c^2) dp
        let mut next = vec![0.0; dp.len() + 2];
        for (i, &c) in dp.iter().enumerate() {
            next[i] -= c;
            next[i + 2] -= c;
        }
        polys.push(next);
    }
    polys
}

fn horner(p: &[f64], c: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &a| acc * c + a)
}

/// `S_{2n+1}(b) = sum_m (b + mL)^{-(2n+1)}` at the folded nodes, for each
/// requested `n`; `images = None` sums all images in closed form.
pub(crate) fn odd_power_sums(q: &AlphaQuadrature, orders: &[usize]) -> Vec<Vec<f64>> {
    let nodes = q.nodes();
    let l = q.grid.period();
    let jmax = orders.iter().map(|n| 2 * n).max().unwrap_or(0);
    let polys = cot_derivative_polys(jmax);
    orders
        .iter()
        .map(|&n| {
            let j = 2 * n;
            nodes
                .iter()
                .map(|&b| match q.image_range() {
                    None => {
                        let u = PI * b / l;
                        let c = u.cos() / u.sin();
                        let fact: f64 = (1..=j).map(|i| i as f64).product();
                        (PI / l).powi(j as i32 + 1) * horner(&polys[j], c) / fact
                    }
                    Some(p) => (-p..=p)
                        .map(|m| (b + m as f64 * l).powi(-(j as i32 + 1)))
                        .sum(),
                })
                .collect()
        })
        .collect()
}

fn check_order(n: usize) -> Result<()> {
    if !(1..=3).contains(&n) {
        return Err(Error::TaylorOrder(n));
    }
    Ok(())
}

fn check_grids(a: &GridFunction, b: &GridFunction, q: &AlphaQuadrature) -> Result<()> {
    if a.grid() != q.grid || b.grid() != q.grid {
        return Err(Error::GridMismatch("inputs and quadrature must share a grid".into()));
    }
    Ok(())
}

/// Fraction of non-mean spectral energy in the top admissible band.
pub fn top_band_fraction(h: &GridFunction) -> f64 {
    let total = {
        let m = h.mean();
        let c = h.map(|v| v - m);
        c.l2_norm().powi(2)
    };
    if total == 0.0 {
        return 0.0;
    }
    let (_, kmax) = band_range(h.grid());
    let top = lp_project(h, DyadicBand::new(kmax)).expect("top band admissible");
    top.l2_norm().powi(2) / total
}

/// Nonlinear part of the right-hand side (all orders).
pub fn full_nonlinearity(h: &GridFunction, q: &AlphaQuadrature) -> Result<GridFunction> {
    check_grids(h, h, q)?;
    if let Some(i) = h.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let frac = top_band_fraction(h);
    if frac > 0.1 {
        return Err(Error::UnderResolved(frac));
    }
    let fg = q.fine_grid();
    let m = fg.n_points();
    let db = fg.spacing();
    let l = q.grid.period();
    let s = fine_samples(h, m);
    let mut out = vec![0.0; m];
    for i in 0..m {
        let hv = s.vals[i];
        out[i] = -(1.0 / PI) * s.deriv[i] * hv * hv / (1.0 + hv * hv) * db;
    }
    let weights = q.weights();
    match q.image_range() {
        None => {
            for j in 1..=m / 2 {
                let u = PI * j as f64 * db / l;
                let (su, cu) = u.sin_cos();
                let s2 = su * su;
                let pre = -(1.0 / l) * cu / su * weights[j - 1];
                for i in 0..m {
                    let ip = (i + m - j) % m;
                    let im = (i + j) % m;
                    let vp = (s.anti[i] - s.anti[ip]) * PI / l;
                    let vm = (s.anti[i] - s.anti[im]) * PI / l;
                    let shp = vp.sinh().powi(2);
                    let shm = vm.sinh().powi(2);
                    let dp = s.vals[i] - s.vals[ip];
                    let dm = s.vals[i] - s.vals[im];
                    out[i] += pre * (dp * shp / (shp + s2) - dm * shm / (shm + s2));
                }
            }
        }
        Some(p) => {
            for j in 1..=m / 2 {
                let b = j as f64 * db;
                let w = weights[j - 1];
                for i in 0..m {
                    let ip = (i + m - j) % m;
                    let im = (i + j) % m;
                    let dp = s.vals[i] - s.vals[ip];
                    let dm = s.vals[i] - s.vals[im];
                    let hp = s.anti[i] - s.anti[ip];
                    let hm = s.anti[i] - s.anti[im];
                    let mut acc = 0.0;
                    for mm in -p..=p {
                        let shift = mm as f64 * l;
                        let ap = b + shift;
                        let dap = hp + s.mean * ap;
                        acc += dp * dap * dap / (ap * (ap * ap + dap * dap));
                        let am = -b + shift;
                        let dam = hm + s.mean * am;
                        acc += dm * dam * dam / (am * (am * am + dam * dam));
                    }
                    out[i] -= (1.0 / PI) * w * acc;
                }
            }
        }
    }
    Ok(outer_derivative(out, q))
}

/// `sum_{n in orders} N_n[h1, h, .., h]` in a single sweep.
pub fn taylor_sum(
    h1: &GridFunction,
    h: &GridFunction,
    orders: &[usize],
    q: &AlphaQuadrature,
) -> Result<GridFunction> {
    check_grids(h1, h, q)?;
    for &n in orders {
        check_order(n)?;
    }
    let fg = q.fine_grid();
    let m = fg.n_points();
    let db = fg.spacing();
    let s1 = fine_samples(h1, m);
    let s = fine_samples(h, m);
    let sums = odd_power_sums(q, orders);
    let weights = q.weights();
    let mut out = vec![0.0; m];
    for i in 0..m {
        let hv = s.vals[i];
        let mut acc = 0.0;
        for &n in orders {
            acc += sign_pow(n) * hv.powi(2 * n as i32);
        }
        out[i] = (1.0 / PI) * s1.deriv[i] * acc * db;
    }
    // with a nonzero mean, D(b + mL) is not periodic in b; images are summed directly
    let mean_free = s.mean.abs() <= 1e-13 * (1.0 + h.max_abs()) || q.image_range().is_some();
    if !mean_free {
        return Err(Error::GridMismatch(
            "periodized Taylor sum needs a mean-zero trailing slot".into(),
        ));
    }
    let l = q.grid.period();
    let images = q.image_range();
    let mut coef = vec![0.0; orders.len()];
    for j in 1..=m / 2 {
        let w = weights[j - 1];
        match images {
            None => {
                for (c, (sn, &n)) in coef.iter_mut().zip(sums.iter().zip(orders)) {
                    *c = sign_pow(n) / PI * w * sn[j - 1];
                }
                for i in 0..m {
                    let ip = (i + m - j) % m;
                    let im = (i + j) % m;
                    let dp = s1.vals[i] - s1.vals[ip];
                    let dm = s1.vals[i] - s1.vals[im];
                    let d2p = (s.anti[i] - s.anti[ip]).powi(2);
                    let d2m = (s.anti[i] - s.anti[im]).powi(2);
                    let mut acc = 0.0;
                    let (mut pp, mut pm) = (1.0, 1.0);
                    let mut next = 1;
                    for (k, &n) in orders.iter().enumerate() {
                        while next <= n {
                            pp *= d2p;
                            pm *= d2m;
                            next += 1;
                        }
                        // S is odd in b
                        acc += coef[k] * (dp * pp - dm * pm);
                    }
                    out[i] += acc;
                }
            }
            Some(p) => {
                let b = j as f64 * db;
                for i in 0..m {
                    let ip = (i + m - j) % m;
                    let im = (i + j) % m;
                    let dp = s1.vals[i] - s1.vals[ip];
                    let dm = s1.vals[i] - s1.vals[im];
                    let hp = s.anti[i] - s.anti[ip];
                    let hm = s.anti[i] - s.anti[im];
                    let mut acc = 0.0;
                    for mm in -p..=p {
                        let shift = mm as f64 * l;
                        let ap = b + shift;
                        let am = -b + shift;
                        let rp = (hp + s.mean * ap) / ap;
                        let rm = (hm + s.mean * am) / am;
                        for &n in orders {
                            let e = 2 * n as i32;
                            acc += sign_pow(n) * (dp / ap * rp.powi(e) + dm / am * rm.powi(e));
                        }
                    }
                    out[i] += w / PI * acc;
                }
            }
        }
    }
    Ok(outer_derivative(out, q))
}

fn sign_pow(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `N_n[h1, h, .., h]`.
pub fn taylor_term(
    h1: &GridFunction,
    h: &GridFunction,
    n: usize,
    q: &AlphaQuadrature,
) -> Result<GridFunction> {
    taylor_sum(h1, h, &[n], q)
}

/// `N_{h_j} = sum_{n <= n_max} N_n[h_j, h, .., h]`.
pub fn nonlinearity_per_corner(
    h_j: &GridFunction,
    h: &GridFunction,
    q: &AlphaQuadrature,
    n_max: usize,
) -> Result<GridFunction> {
    check_order(n_max)?;
    let orders: Vec<usize> = (1..=n_max).collect();
    taylor_sum(h_j, h, &orders, q)
}
