//! Uniform periodic grids and Fourier-side operators.
//!
//! Conventions: `f^(xi) = int f(x) e^{-i x xi} dx`, discrete frequencies
//! `xi_m = 2 pi m / L`. All transforms go through the real FFT; the
//! general (possibly non-Hermitian) multiplier path uses a complex FFT and
//! checks that the output is real.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use realfft::RealFftPlanner;
use rustfft::FftPlanner;

use crate::cutoff;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_points: usize,
    period: f64,
}

impl Grid {
    pub fn new(n_points: usize, period: f64) -> Result<Grid> {
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points = {n_points} must be a power of two >= 16"
            )));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidGrid(format!("period = {period} must be positive")));
        }
        Ok(Grid { n_points, period })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n_points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Nonnegative frequency of rfft index `m` (0..=n/2).
    pub fn frequency(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.period
    }

    pub fn min_frequency(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn nyquist(&self) -> f64 {
        PI * self.n_points as f64 / self.period
    }

    /// Same period, `factor` times as many points.
    pub fn refined(&self, factor: usize) -> Grid {
        Grid {
            n_points: self.n_points * factor,
            period: self.period,
        }
    }

    /// Periodic displacement `x - a` reduced to `[-L/2, L/2)`.
    pub fn wrap(&self, d: f64) -> f64 {
        let l = self.period;
        d - l * ((d + 0.5 * l) / l).floor()
    }
}

/// Real samples of a periodic function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != grid.n_points {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.n_points
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(GridFunction { grid, values })
    }

    pub(crate) fn from_vec(grid: Grid, values: Vec<f64>) -> GridFunction {
        debug_assert_eq!(values.len(), grid.n_points);
        GridFunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> GridFunction {
        GridFunction {
            grid,
            values: vec![0.0; grid.n_points],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> GridFunction {
        GridFunction {
            grid,
            values: vec![c; grid.n_points],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> GridFunction {
        let values = (0..grid.n_points).map(|i| f(grid.x(i))).collect();
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Continuum-normalized `(int |f|^2)^{1/2}` by the rectangle rule.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.max_abs();
        }
        (self.grid.spacing() * self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>())
            .powf(1.0 / p)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFunction) -> GridFunction {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: f64, other: &GridFunction) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Discrete Parseval right-hand side: `(L/N^2) sum |F_m|^2` over all modes.
    pub fn l2_norm_spectral(&self) -> f64 {
        let spec = rfft(&self.values);
        let n = self.grid.n_points;
        let mut s = 0.0;
        for (m, c) in spec.iter().enumerate() {
            let w = if m == 0 || m == n / 2 { 1.0 } else { 2.0 };
            s += w * c.norm_sqr();
        }
        (s * self.grid.period / (n as f64 * n as f64)).sqrt()
    }
}

fn real_planner() -> &'static Mutex<RealFftPlanner<f64>> {
    static P: OnceLock<Mutex<RealFftPlanner<f64>>> = OnceLock::new();
    P.get_or_init(|| Mutex::new(RealFftPlanner::new()))
}

fn complex_planner() -> &'static Mutex<FftPlanner<f64>> {
    static P: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    P.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// Unnormalized forward real FFT, `n/2 + 1` coefficients.
pub(crate) fn rfft(x: &[f64]) -> Vec<Complex64> {
    let plan = real_planner().lock().unwrap().plan_fft_forward(x.len());
    let mut input = x.to_vec();
    let mut out = plan.make_output_vec();
    plan.process(&mut input, &mut out).expect("rfft length");
    out
}

/// Inverse of [`rfft`], including the `1/n` normalization.
pub(crate) fn irfft(mut spec: Vec<Complex64>, n: usize) -> Vec<f64> {
    let plan = real_planner().lock().unwrap().plan_fft_inverse(n);
    spec[0].im = 0.0;
    spec[n / 2].im = 0.0;
    let mut out = plan.make_output_vec();
    plan.process(&mut spec, &mut out).expect("irfft length");
    let s = 1.0 / n as f64;
    out.iter_mut().for_each(|v| *v *= s);
    out
}

pub(crate) fn fft_complex(data: &mut [Complex64], inverse: bool) {
    let plan = {
        let mut p = complex_planner().lock().unwrap();
        if inverse {
            p.plan_fft_inverse(data.len())
        } else {
            p.plan_fft_forward(data.len())
        }
    };
    plan.process(data);
}

pub(crate) fn spectrum(f: &GridFunction) -> Vec<Complex64> {
    rfft(&f.values)
}

pub(crate) fn from_spectrum(grid: Grid, spec: Vec<Complex64>) -> GridFunction {
    GridFunction::from_vec(grid, irfft(spec, grid.n_points))
}

/// Multiplies rfft coefficients by `symbol(xi_m)` (real part at Nyquist).
pub(crate) fn apply_hermitian(f: &GridFunction, symbol: impl Fn(f64) -> Complex64) -> GridFunction {
    let grid = f.grid;
    let n = grid.n_points;
    let mut spec = spectrum(f);
    for (m, c) in spec.iter_mut().enumerate() {
        let s = symbol(grid.frequency(m));
        *c *= if m == n / 2 { Complex64::new(s.re, 0.0) } else { s };
    }
    from_spectrum(grid, spec)
}

pub(crate) fn apply_real_symbol(f: &GridFunction, symbol: impl Fn(f64) -> f64) -> GridFunction {
    apply_hermitian(f, |xi| Complex64::new(symbol(xi), 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// Real symbol, even in xi.
    RealEven,
    /// `i * s(xi)` with `s` real and odd.
    ImagOdd,
    /// Arbitrary complex symbol; realness of the output is checked.
    General,
}

#[derive(Clone)]
pub struct MultiplierSpec {
    symbol: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    symmetry: Symmetry,
}

impl std::fmt::Debug for MultiplierSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultiplierSpec")
            .field("symmetry", &self.symmetry)
            .finish_non_exhaustive()
    }
}

impl MultiplierSpec {
    pub fn new(
        symmetry: Symmetry,
        symbol: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> MultiplierSpec {
        MultiplierSpec {
            symbol: Arc::new(symbol),
            symmetry,
        }
    }

    pub fn real_even(s: impl Fn(f64) -> f64 + Send + Sync + 'static) -> MultiplierSpec {
        MultiplierSpec::new(Symmetry::RealEven, move |xi| Complex64::new(s(xi), 0.0))
    }

    /// Symbol `i * s(xi)`.
    pub fn imag_odd(s: impl Fn(f64) -> f64 + Send + Sync + 'static) -> MultiplierSpec {
        MultiplierSpec::new(Symmetry::ImagOdd, move |xi| Complex64::new(0.0, s(xi)))
    }

    pub fn identity() -> MultiplierSpec {
        MultiplierSpec::real_even(|_| 1.0)
    }

    pub fn derivative() -> MultiplierSpec {
        MultiplierSpec::imag_odd(|xi| xi)
    }

    pub fn abs_gradient() -> MultiplierSpec {
        MultiplierSpec::real_even(f64::abs)
    }

    pub fn poisson(t: f64) -> MultiplierSpec {
        MultiplierSpec::real_even(move |xi| (-t * xi.abs()).exp())
    }

    pub fn band(k: i32) -> MultiplierSpec {
        MultiplierSpec::real_even(move |xi| cutoff::phi_k(k, xi))
    }

    pub fn symbol(&self, xi: f64) -> Complex64 {
        (self.symbol)(xi)
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }
}

pub fn apply_multiplier(f: &GridFunction, m: &MultiplierSpec) -> Result<GridFunction> {
    if let Some(i) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    match m.symmetry {
        Symmetry::RealEven => Ok(apply_hermitian(f, |xi| Complex64::new(m.symbol(xi).re, 0.0))),
        Symmetry::ImagOdd => Ok(apply_hermitian(f, |xi| Complex64::new(0.0, m.symbol(xi).im))),
        Symmetry::General => apply_general(f, m),
    }
}

fn apply_general(f: &GridFunction, m: &MultiplierSpec) -> Result<GridFunction> {
    let grid = f.grid;
    let n = grid.n_points;
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_complex(&mut data, false);
    for (j, c) in data.iter_mut().enumerate() {
        let s = if j < n / 2 {
            m.symbol(grid.frequency(j))
        } else if j == n / 2 {
            let xi = grid.nyquist();
            0.5 * (m.symbol(xi) + m.symbol(-xi))
        } else {
            m.symbol(-grid.frequency(n - j))
        };
        *c *= s;
    }
    fft_complex(&mut data, true);
    let scale = 1.0 / n as f64;
    let imag = data.iter().fold(0.0f64, |acc, c| acc.max((c.im * scale).abs()));
    let limit = 1e-10 * f.max_abs();
    if imag > limit {
        return Err(Error::SymmetryViolation { imag, limit });
    }
    Ok(GridFunction::from_vec(
        grid,
        data.iter().map(|c| c.re * scale).collect(),
    ))
}

/// Dyadic frequency band `|xi| in [2^{k-1}, 2^{k+1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicBand {
    pub k: i32,
}

impl DyadicBand {
    pub fn new(k: i32) -> DyadicBand {
        DyadicBand { k }
    }

    pub fn support(&self) -> (f64, f64) {
        (2f64.powi(self.k - 1), 2f64.powi(self.k + 1))
    }

    pub fn center(&self) -> f64 {
        2f64.powi(self.k)
    }
}

/// Bands whose (open) support meets the resolved range `[2 pi/L, pi N/L]`.
pub fn admissible_bands(grid: Grid) -> Vec<DyadicBand> {
    let lo = grid.min_frequency();
    let hi = grid.nyquist();
    let mut k = lo.log2().floor() as i32 - 2;
    let mut out = Vec::new();
    while 2f64.powi(k - 1) < hi {
        if 2f64.powi(k + 1) > lo {
            out.push(DyadicBand::new(k));
        }
        k += 1;
    }
    out
}

pub fn band_range(grid: Grid) -> (i32, i32) {
    let b = admissible_bands(grid);
    (b[0].k, b[b.len() - 1].k)
}

fn check_band(grid: Grid, k: i32) -> Result<()> {
    let (min, max) = band_range(grid);
    if k < min || k > max {
        return Err(Error::BandOutOfRange { k, min, max });
    }
    Ok(())
}

/// `P_k f`.
pub fn lp_project(f: &GridFunction, band: DyadicBand) -> Result<GridFunction> {
    check_band(f.grid, band.k)?;
    Ok(apply_real_symbol(f, |xi| cutoff::phi_k(band.k, xi)))
}

/// `P_{<=k} f`, symbol `chi(2^{-k} xi)`; keeps the mean.
pub fn lp_low(f: &GridFunction, k: i32) -> GridFunction {
    apply_real_symbol(f, |xi| cutoff::phi_leq_k(k, xi))
}

/// `P~_k f`, symbol `sum_{|a|<=2} phi_{k+a}`.
pub fn lp_tilde(f: &GridFunction, k: i32) -> GridFunction {
    apply_real_symbol(f, |xi| cutoff::phi_tilde_k(k, xi))
}

/// All band projections at once (one forward transform).
pub fn lp_decompose(f: &GridFunction) -> Vec<(DyadicBand, GridFunction)> {
    let grid = f.grid;
    let spec = spectrum(f);
    admissible_bands(grid)
        .into_iter()
        .map(|b| {
            let s: Vec<Complex64> = spec
                .iter()
                .enumerate()
                .map(|(m, c)| c * cutoff::phi_k(b.k, grid.frequency(m)))
                .collect();
            (b, from_spectrum(grid, s))
        })
        .collect()
}

/// `e^{-t|grad|} f`.
pub fn poisson_semigroup(f: &GridFunction, t: f64) -> Result<GridFunction> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(apply_real_symbol(f, |xi| (-t * xi).exp()))
}

pub fn derivative(f: &GridFunction) -> GridFunction {
    apply_hermitian(f, |xi| Complex64::new(0.0, xi))
}

pub fn second_derivative(f: &GridFunction) -> GridFunction {
    apply_real_symbol(f, |xi| -xi * xi)
}

/// `|grad| f`, symbol `|xi|`.
pub fn abs_gradient(f: &GridFunction) -> GridFunction {
    apply_real_symbol(f, |xi| xi)
}

/// Periodic antiderivative of `f - mean(f)` with zero mean.
pub fn antiderivative(f: &GridFunction) -> GridFunction {
    apply_hermitian(f, |xi| {
        if xi == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -1.0 / xi)
        }
    })
}

/// Band-limited resampling onto `n_new` points (zero padding or truncation).
pub fn resample(f: &GridFunction, n_new: usize) -> GridFunction {
    let n = f.grid.n_points;
    let grid = Grid {
        n_points: n_new,
        period: f.grid.period,
    };
    if n_new == n {
        return f.clone();
    }
    let spec = spectrum(f);
    let scale = n_new as f64 / n as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n_new / 2 + 1];
    if n_new > n {
        for m in 0..=n / 2 {
            let w = if m == n / 2 { 0.5 } else { 1.0 };
            out[m] = spec[m] * (w * scale);
        }
    } else {
        for m in 0..n_new / 2 {
            out[m] = spec[m] * scale;
        }
        out[n_new / 2] = Complex64::new(2.0 * spec[n_new / 2].re * scale, 0.0);
    }
    from_spectrum(grid, out)
}

/// `f(x - shift)` for the band-limited interpolant.
pub fn translate(f: &GridFunction, shift: f64) -> GridFunction {
    apply_hermitian(f, |xi| Complex64::from_polar(1.0, -xi * shift))
}

/// Exact evaluation of the trigonometric interpolant at arbitrary points, O(N) per point.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    grid: Grid,
    // weighted, normalized coefficients: f(x) = Re sum_m c_m e^{i xi_m x}
    coeffs: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(f: &GridFunction) -> TrigInterpolant {
        let n = f.grid.n_points;
        let spec = spectrum(f);
        let coeffs = spec
            .iter()
            .enumerate()
            .map(|(m, c)| {
                let w = if m == 0 || m == n / 2 { 1.0 } else { 2.0 };
                c * (w / n as f64)
            })
            .collect();
        TrigInterpolant {
            grid: f.grid,
            coeffs,
        }
    }

    /// `d^order f / dx^order` at `x`.
    pub fn eval_derivative(&self, x: f64, order: u32) -> f64 {
        let step = Complex64::from_polar(1.0, self.grid.frequency(1) * x);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut acc = 0.0;
        let iu = Complex64::new(0.0, 1.0);
        for (m, c) in self.coeffs.iter().enumerate() {
            if m % 64 == 0 {
                rot = Complex64::from_polar(1.0, self.grid.frequency(m) * x);
            }
            let xi = self.grid.frequency(m);
            let factor = (iu * xi).powu(order);
            acc += (c * factor * rot).re;
            rot *= step;
        }
        acc
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_derivative(x, 0)
    }
}

/// Fast off-grid evaluation: band-limited upsampling by `factor`, then
/// local degree-5 Lagrange interpolation on the fine grid.
#[derive(Debug, Clone)]
pub struct FineInterpolant {
    fine: Vec<f64>,
    h: f64,
    period: f64,
}

impl FineInterpolant {
    pub const DEFAULT_FACTOR: usize = 8;

    pub fn new(f: &GridFunction, factor: usize) -> FineInterpolant {
        let fine = resample(f, f.grid.n_points * factor);
        FineInterpolant {
            h: fine.grid.spacing(),
            period: f.grid.period,
            fine: fine.values,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.fine.len() as i64;
        let s = x / self.h;
        let i0 = s.floor() as i64;
        let u = s - i0 as f64;
        // nodes i0-2 .. i0+3, offsets -2..3
        let mut acc = 0.0;
        for j in -2i64..=3 {
            let mut w = 1.0;
            for l in -2i64..=3 {
                if l != j {
                    w *= (u - l as f64) / (j - l) as f64;
                }
            }
            let idx = (i0 + j).rem_euclid(n) as usize;
            acc += w * self.fine[idx];
        }
        acc
    }

    pub fn period(&self) -> f64 {
        self.period
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_centered() {
        let g = Grid::new(16, 4.0).unwrap();
        assert!((g.wrap(3.0) + 1.0).abs() < 1e-15);
        assert!((g.wrap(-2.5) - 1.5).abs() < 1e-15);
        assert!((g.wrap(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn resample_round_trip() {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        let f = GridFunction::from_fn(g, |x| (3.0 * x).sin() + 0.2 * (7.0 * x).cos());
        let up = resample(&f, 256);
        let back = resample(&up, 64);
        assert!(back.sup_distance(&f) < 1e-13);
        assert!((up.values()[4 * 5] - f.values()[5]).abs() < 1e-13);
    }

    #[test]
    fn interpolants_agree_with_closed_form() {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        let f = GridFunction::from_fn(g, |x| (3.0 * x).sin() + 0.2 * (7.0 * x).cos());
        let ti = TrigInterpolant::new(&f);
        let fi = FineInterpolant::new(&f, 8);
        for &x in &[0.1234f64, 2.5, 5.9] {
            let exact = (3.0 * x).sin() + 0.2 * (7.0 * x).cos();
            assert!((ti.eval(x) - exact).abs() < 1e-12);
            assert!((fi.eval(x) - exact).abs() < 1e-8);
            let d = 3.0 * (3.0 * x).cos() - 1.4 * (7.0 * x).sin();
            assert!((ti.eval_derivative(x, 1) - d).abs() < 1e-11);
        }
    }
}
