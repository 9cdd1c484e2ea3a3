//! Physical-space Littlewood-Paley kernels.
//!
//! `psi0` is the inverse transform of `phi~_0(xi)/(i xi)` and `psi_leq0` that
//! of `phi_{<=2}(xi)/(i xi)`; both are odd, `psi_leq0 -> +-1/2`. With them
//!
//! ```text
//! L_k(x,a)    = [psi0(2^k x) - psi0(2^k (x - a))] / a
//! L~_k(x,a)   = L_k(x,a) - min(2^k, 1/|a|) psi0'(2^k x)
//! ```
//!
//! and the `<= k` analogues with `psi_leq0`. The tables are sampled once by a
//! large FFT of the defining integrals and interpolated with cubic Hermite
//! polynomials.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cutoff::{chi, phi_tilde_k};
use crate::error::{Error, Result};
use crate::spectral::fft_complex;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    /// Sample step of the tables.
    pub step: f64,
    /// Tables cover `|x| <= range`; tails are analytic beyond.
    pub range: f64,
    /// Period of the discretized transform (`d xi = 2 pi / xi_period`).
    pub xi_period: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            step: 1.0 / 128.0,
            range: 2048.0,
            xi_period: 16384.0,
        }
    }
}

impl KernelParams {
    pub fn refined(&self) -> KernelParams {
        KernelParams {
            step: self.step / 2.0,
            ..*self
        }
    }
}

/// Samples on `[0, range]` with parity extension and a constant tail.
#[derive(Debug, Clone)]
pub struct Table1D {
    step: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
    odd: bool,
    tail: f64,
}

impl Table1D {
    pub fn eval(&self, x: f64) -> f64 {
        let (ax, sgn) = if x < 0.0 {
            (-x, if self.odd { -1.0 } else { 1.0 })
        } else {
            (x, 1.0)
        };
        let s = ax / self.step;
        let i = s as usize;
        if i + 1 >= self.values.len() {
            return sgn * self.tail;
        }
        let t = s - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        let h = self.step;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
            + (t3 - 2.0 * t2 + t) * h * self.derivs[i]
            + (-2.0 * t3 + 3.0 * t2) * self.values[i + 1]
            + (t3 - t2) * h * self.derivs[i + 1];
        sgn * v
    }

    pub fn range(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Value at the last sample.
    pub fn edge_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Raw samples at `j * step`, `j = 0..`.
    pub fn samples(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone)]
pub struct KernelTable {
    pub params: KernelParams,
    pub psi0: Table1D,
    pub psi0_prime: Table1D,
    pub psi_leq0: Table1D,
    pub psi_leq0_prime: Table1D,
    /// Max change between the transform at `d xi` and `2 d xi`.
    pub refinement_change: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Integrand {
    /// `(1/pi) int w(xi) sin(x xi)/xi`
    Sine,
    /// `(1/pi) int w(xi) cos(x xi)`
    Cosine,
    /// `-(1/pi) int w(xi) xi sin(x xi)`
    SineTimesXi,
}

/// One-sided trapezoid transform of a weight on `xi >= 0` at `x_j = j * step`.
fn half_line_transform(
    weight: &dyn Fn(f64) -> f64,
    kind: Integrand,
    step: f64,
    xi_period: f64,
    n_out: usize,
) -> Vec<f64> {
    let m = (xi_period / step).round() as usize;
    assert!(m.is_power_of_two(), "xi_period / step must be a power of two");
    let dxi = 2.0 * PI / xi_period;
    let mut data: Vec<Complex64> = (0..m)
        .map(|j| {
            let xi = j as f64 * dxi;
            // only xi < half the transform length is physical; weights vanish beyond 8
            if j >= m / 2 {
                return Complex64::new(0.0, 0.0);
            }
            let w = weight(xi) * if j == 0 { 0.5 } else { 1.0 };
            let v = match kind {
                Integrand::Sine => {
                    if j == 0 {
                        0.0
                    } else {
                        w / xi
                    }
                }
                Integrand::Cosine => w,
                Integrand::SineTimesXi => w * xi,
            };
            Complex64::new(v, 0.0)
        })
        .collect();
    // inverse (unnormalized): sum_j c_j e^{+2 pi i j n / m}, and x_n xi_j = 2 pi j n / m
    fft_complex(&mut data, true);
    let scale = dxi / PI;
    (0..n_out)
        .map(|n| {
            let z = data[n];
            match kind {
                Integrand::Sine => scale * z.im,
                Integrand::Cosine => scale * z.re,
                Integrand::SineTimesXi => -scale * z.im,
            }
        })
        .collect()
}

fn phi_leq2(xi: f64) -> f64 {
    chi(xi / 4.0)
}

fn phi_tilde0(xi: f64) -> f64 {
    phi_tilde_k(0, xi)
}

struct Sampled {
    psi0: Vec<f64>,
    dpsi0: Vec<f64>,
    ddpsi0: Vec<f64>,
    leq: Vec<f64>,
    dleq: Vec<f64>,
    ddleq: Vec<f64>,
}

fn sample_all(step: f64, xi_period: f64, n_out: usize) -> Sampled {
    let t = |w: &dyn Fn(f64) -> f64, k| half_line_transform(w, k, step, xi_period, n_out);
    let dxi = 2.0 * PI / xi_period;
    // sin(x xi)/xi -> x at xi = 0: the half-weighted m = 0 term of the trapezoid
    let mut leq = t(&phi_leq2, Integrand::Sine);
    for (n, v) in leq.iter_mut().enumerate() {
        *v += dxi / PI * 0.5 * (n as f64 * step);
    }
    Sampled {
        psi0: t(&phi_tilde0, Integrand::Sine),
        dpsi0: t(&phi_tilde0, Integrand::Cosine),
        ddpsi0: t(&phi_tilde0, Integrand::SineTimesXi),
        leq,
        dleq: t(&phi_leq2, Integrand::Cosine),
        ddleq: t(&phi_leq2, Integrand::SineTimesXi),
    }
}

impl KernelTable {
    pub fn build(params: KernelParams) -> Result<KernelTable> {
        let n_out = (params.range / params.step).round() as usize + 1;
        let fine = sample_all(params.step, params.xi_period, n_out);
        let coarse = sample_all(params.step, params.xi_period / 2.0, n_out);
        let pairs = [
            (&fine.psi0, &coarse.psi0),
            (&fine.dpsi0, &coarse.dpsi0),
            (&fine.leq, &coarse.leq),
            (&fine.dleq, &coarse.dleq),
        ];
        let change = pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        if change > 1e-8 {
            return Err(Error::KernelNonConvergence(change));
        }
        let step = params.step;
        let table = |values: Vec<f64>, derivs: Vec<f64>, odd: bool, tail: f64| Table1D {
            step,
            values,
            derivs,
            odd,
            tail,
        };
        Ok(KernelTable {
            params,
            psi0: table(fine.psi0, fine.dpsi0.clone(), true, 0.0),
            psi0_prime: table(fine.dpsi0, fine.ddpsi0, false, 0.0),
            psi_leq0: table(fine.leq, fine.dleq.clone(), true, 0.5),
            psi_leq0_prime: table(fine.dleq, fine.ddleq, false, 0.0),
            refinement_change: change,
        })
    }

    /// Process-wide table with default parameters.
    pub fn global() -> &'static KernelTable {
        static T: OnceLock<KernelTable> = OnceLock::new();
        T.get_or_init(|| KernelTable::build(KernelParams::default()).expect("kernel table"))
    }

    pub fn range(&self) -> f64 {
        self.psi0.range()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `L_k`
    Band,
    /// `L~_k`
    BandModified,
    /// `L_{<=k}`
    Low,
    /// `L~_{<=k}`
    LowModified,
}

impl KernelKind {
    pub fn id(&self) -> &'static str {
        match self {
            KernelKind::Band => "L_k",
            KernelKind::BandModified => "L_tilde_k",
            KernelKind::Low => "L_leq_k",
            KernelKind::LowModified => "L_tilde_leq_k",
        }
    }

    fn tables<'a>(&self, t: &'a KernelTable) -> (&'a Table1D, &'a Table1D) {
        match self {
            KernelKind::Band | KernelKind::BandModified => (&t.psi0, &t.psi0_prime),
            KernelKind::Low | KernelKind::LowModified => (&t.psi_leq0, &t.psi_leq0_prime),
        }
    }

    fn modified(&self) -> bool {
        matches!(self, KernelKind::BandModified | KernelKind::LowModified)
    }

    /// Right-hand side of the lemma bound as a function of `s = 2^k |a|`.
    pub fn bound(&self, s: f64) -> f64 {
        match self {
            KernelKind::Band => 1.0f64.min(1.0 / s),
            KernelKind::BandModified => s.min(1.0 / s),
            KernelKind::Low => 1.0,
            KernelKind::LowModified => s.min(1.0),
        }
    }
}

/// Modification weight `min(2^k, 1/|a|)`.
fn modification(k: i32, alpha: f64) -> f64 {
    2f64.powi(k).min(1.0 / alpha.abs())
}

fn eval_kernel(t: &KernelTable, kind: KernelKind, k: i32, x: f64, alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::ZeroAlpha);
    }
    let s = 2f64.powi(k);
    let (psi, dpsi) = kind.tables(t);
    let mut v = (psi.eval(s * x) - psi.eval(s * (x - alpha))) / alpha;
    if kind.modified() {
        v -= modification(k, alpha) * dpsi.eval(s * x);
    }
    Ok(v)
}

pub fn kernel_l(t: &KernelTable, k: i32, x: f64, alpha: f64) -> Result<f64> {
    eval_kernel(t, KernelKind::Band, k, x, alpha)
}

pub fn kernel_l_modified(t: &KernelTable, k: i32, x: f64, alpha: f64) -> Result<f64> {
    eval_kernel(t, KernelKind::BandModified, k, x, alpha)
}

pub fn kernel_l_leq(t: &KernelTable, k: i32, x: f64, alpha: f64) -> Result<f64> {
    eval_kernel(t, KernelKind::Low, k, x, alpha)
}

pub fn kernel_l_leq_modified(t: &KernelTable, k: i32, x: f64, alpha: f64) -> Result<f64> {
    eval_kernel(t, KernelKind::LowModified, k, x, alpha)
}

pub fn kernel(t: &KernelTable, kind: KernelKind, k: i32, x: f64, alpha: f64) -> Result<f64> {
    eval_kernel(t, kind, k, x, alpha)
}

/// `int |K(x, a)| dx` by the trapezoid rule on `2^{-k}/samples_per_unit` steps.
///
/// The integrand vanishes (or, for the low kernels, equals `1/|a|`) outside
/// the windows `|x| <= R 2^{-k}` and `|x - a| <= R 2^{-k}`, so only those are
/// sampled.
pub fn kernel_l1_norm(
    t: &KernelTable,
    kind: KernelKind,
    k: i32,
    alpha: f64,
    samples_per_unit: f64,
) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::ZeroAlpha);
    }
    let s = 2f64.powi(k);
    let r = t.range() / s;
    let h0 = 1.0 / (s * samples_per_unit);
    let segment = |lo: f64, hi: f64| -> Result<f64> {
        let n = ((hi - lo) / h0).ceil().max(1.0) as usize;
        let h = (hi - lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let x = lo + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * eval_kernel(t, kind, k, x, alpha)?.abs();
        }
        Ok(acc * h)
    };
    let (a_lo, a_hi) = (alpha.min(0.0), alpha.max(0.0));
    if a_hi - a_lo <= 2.0 * r {
        return segment(a_lo - r, a_hi + r);
    }
    let (w1, w2) = if alpha > 0.0 {
        ((-r, r), (alpha - r, alpha + r))
    } else {
        ((alpha - r, alpha + r), (-r, r))
    };
    let mut total = segment(w1.0, w1.1)? + segment(w2.0, w2.1)?;
    if matches!(kind, KernelKind::Low | KernelKind::LowModified) {
        // psi_leq0 tails differ by exactly 1 between the windows
        total += (w2.0 - w1.1) / alpha.abs();
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaRow {
    pub lemma_id: String,
    pub k1: i32,
    pub k2: Option<i32>,
    pub k3: Option<i32>,
    /// `2^k |a|` for single kernels; 0 for composites.
    pub alpha_scale: f64,
    pub measured: f64,
    pub bound_rhs: f64,
    pub ratio: f64,
    /// Standard error of `measured` when it is a Monte Carlo estimate.
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSummary {
    pub lemma_id: String,
    /// Largest ratio: the fitted constant.
    pub max_ratio: f64,
    /// max/min over k of the per-k constants.
    pub spread_of_constants: f64,
    /// Worst max/min over k at a fixed alpha scale.
    pub spread_at_fixed_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub rows: Vec<LemmaRow>,
    pub summaries: Vec<LemmaSummary>,
}

impl LemmaReport {
    pub fn summary(&self, id: &str) -> Option<&LemmaSummary> {
        self.summaries.iter().find(|s| s.lemma_id == id)
    }
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let min = v.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

/// Single-kernel lemma ratios on the grid `k_list x alpha_scales`, with
/// `a = alpha_scale * 2^{-k}`.
pub fn verify_kernel_lemma(
    t: &KernelTable,
    k_list: &[i32],
    alpha_scales: &[f64],
) -> Result<LemmaReport> {
    let kinds = [
        KernelKind::Band,
        KernelKind::BandModified,
        KernelKind::Low,
        KernelKind::LowModified,
    ];
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for kind in kinds {
        let mut ratios = vec![vec![0.0; alpha_scales.len()]; k_list.len()];
        for (ik, &k) in k_list.iter().enumerate() {
            for (ia, &s) in alpha_scales.iter().enumerate() {
                let alpha = s * 2f64.powi(-k);
                let measured = kernel_l1_norm(t, kind, k, alpha, 32.0)?;
                let bound = kind.bound(s);
                let ratio = measured / bound;
                ratios[ik][ia] = ratio;
                rows.push(LemmaRow {
                    lemma_id: kind.id().to_string(),
                    k1: k,
                    k2: None,
                    k3: None,
                    alpha_scale: s,
                    measured,
                    bound_rhs: bound,
                    ratio,
                    std_error: None,
                });
            }
        }
        let per_k: Vec<f64> = ratios
            .iter()
            .map(|r| r.iter().cloned().fold(0.0, f64::max))
            .collect();
        let fixed = (0..alpha_scales.len())
            .map(|ia| spread(&ratios.iter().map(|r| r[ia]).collect::<Vec<_>>()))
            .fold(1.0, f64::max);
        summaries.push(LemmaSummary {
            lemma_id: kind.id().to_string(),
            max_ratio: per_k.iter().cloned().fold(0.0, f64::max),
            spread_of_constants: spread(&per_k),
            spread_at_fixed_scale: fixed,
        });
    }
    Ok(LemmaReport { rows, summaries })
}

/// Scale profile `nu(s) = int |K_0(y, s)| dy` sampled on a log grid, used for
/// composite kernels (exact dilation: `int |K_k(., a)| = nu(2^k a)`).
struct ScaleProfile {
    log_s: Vec<f64>,
    values: Vec<f64>,
}

impl ScaleProfile {
    fn new(t: &KernelTable, kind: KernelKind, log2_min: f64, log2_max: f64, per_octave: usize) -> Result<Self> {
        let n = ((log2_max - log2_min) * per_octave as f64).ceil() as usize;
        let mut log_s = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let l2 = log2_min + i as f64 / per_octave as f64;
            let s = 2f64.powf(l2);
            log_s.push(s.ln());
            values.push(kernel_l1_norm(t, kind, 0, s, 16.0)?);
        }
        Ok(ScaleProfile { log_s, values })
    }

    fn eval(&self, s: f64) -> f64 {
        let ls = s.abs().ln();
        let n = self.log_s.len();
        if ls <= self.log_s[0] {
            return self.values[0];
        }
        if ls >= self.log_s[n - 1] {
            // both Band and Low profiles flatten or decay like 1/s beyond the table
            return self.values[n - 1];
        }
        let d = self.log_s[1] - self.log_s[0];
        let u = (ls - self.log_s[0]) / d;
        let i = (u as usize).min(n - 2);
        let f = u - i as f64;
        (1.0 - f) * self.values[i] + f * self.values[i + 1]
    }
}

/// Log-spaced alpha nodes (both signs share the positive nodes) and
/// trapezoid weights in `ln a`.
fn log_alpha_nodes(log2_min: f64, log2_max: f64, per_octave: usize) -> Vec<(f64, f64)> {
    let n = ((log2_max - log2_min) * per_octave as f64).ceil() as usize;
    let du = (log2_max - log2_min) * std::f64::consts::LN_2 / n as f64;
    (0..=n)
        .map(|i| {
            let a = 2f64.powf(log2_min + (log2_max - log2_min) * i as f64 / n as f64);
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            (a, w * du * a)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeEstimate {
    pub k1: i32,
    pub k2: i32,
    pub k3: i32,
    /// `int da prod_l int |L_l(., a)| dx`, deterministic.
    pub factorized: f64,
    /// Monte Carlo estimate of the same integral over `(x1, x2, x3)`.
    pub monte_carlo: f64,
    pub std_error: f64,
    pub bound_rhs: f64,
}

/// `|| K_{k1,k2,<=k3} ||` with the absolute value inside the alpha-integral,
/// computed by factorization and by Monte Carlo over `(x1,x2,x3)`.
pub fn composite_kernel_norm(
    t: &KernelTable,
    k1: i32,
    k2: i32,
    k3: i32,
    mc_samples: usize,
    seed: u64,
) -> Result<CompositeEstimate> {
    let kmax = k1.max(k2).max(k3);
    let kmin = k1.min(k2).min(k3);
    let lo = -(kmax as f64) - 14.0;
    let hi = -(kmin as f64) + 14.0;
    let nodes = log_alpha_nodes(lo, hi, 8);
    let band = ScaleProfile::new(t, KernelKind::Band, lo + kmin as f64 - 1.0, hi + kmax as f64 + 1.0, 8)?;
    let low = ScaleProfile::new(t, KernelKind::Low, lo + kmin as f64 - 1.0, hi + kmax as f64 + 1.0, 8)?;
    let (s1, s2, s3) = (2f64.powi(k1), 2f64.powi(k2), 2f64.powi(k3));
    let factorized: f64 = 2.0
        * nodes
            .iter()
            .map(|&(a, w)| w * band.eval(s1 * a) * band.eval(s2 * a) * low.eval(s3 * a))
            .sum::<f64>();

    // importance sampling: Cauchy in each x_l with scale 2^{-k_l}
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scales = [1.0 / s1, 1.0 / s2, 1.0 / s3];
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..mc_samples {
        let mut x = [0.0; 3];
        let mut density = 1.0;
        for l in 0..3 {
            let u: f64 = rng.gen_range(1e-12..1.0 - 1e-12);
            let c = scales[l];
            x[l] = c * (PI * (u - 0.5)).tan();
            density *= 1.0 / (PI * c * (1.0 + (x[l] / c).powi(2)));
        }
        let mut inner = 0.0;
        for &(a, w) in &nodes {
            for sgn in [1.0, -1.0] {
                let al = sgn * a;
                let v = eval_kernel(t, KernelKind::Band, k1, x[0], al)?
                    * eval_kernel(t, KernelKind::Band, k2, x[1], al)?
                    * eval_kernel(t, KernelKind::Low, k3, x[2], al)?;
                inner += w * v.abs();
            }
        }
        let est = inner / density;
        sum += est;
        sum2 += est * est;
    }
    let n = mc_samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    Ok(CompositeEstimate {
        k1,
        k2,
        k3,
        factorized,
        monte_carlo: mean,
        std_error: (var / n).sqrt(),
        bound_rhs: 2f64.powi(-k1.max(k2)) * (1.0 + (k1 - k2).abs() as f64),
    })
}

/// Composite rows for `k1 - k2` in `gaps` at base `k2`, `k3 = k2`.
pub fn verify_composite_lemma(
    t: &KernelTable,
    k2: i32,
    gaps: &[i32],
    mc_samples: usize,
    seed: u64,
) -> Result<(Vec<LemmaRow>, LemmaSummary, Vec<CompositeEstimate>)> {
    let mut rows = Vec::new();
    let mut ests = Vec::new();
    for (i, &g) in gaps.iter().enumerate() {
        let k1 = k2 + g;
        let e = composite_kernel_norm(t, k1, k2, k2, mc_samples, seed.wrapping_add(i as u64))?;
        rows.push(LemmaRow {
            lemma_id: "K_composite".into(),
            k1,
            k2: Some(k2),
            k3: Some(k2),
            alpha_scale: 0.0,
            measured: e.factorized,
            bound_rhs: e.bound_rhs,
            ratio: e.factorized / e.bound_rhs,
            std_error: None,
        });
        rows.push(LemmaRow {
            lemma_id: "K_composite_mc".into(),
            k1,
            k2: Some(k2),
            k3: Some(k2),
            alpha_scale: 0.0,
            measured: e.monte_carlo,
            bound_rhs: e.bound_rhs,
            ratio: e.monte_carlo / e.bound_rhs,
            std_error: Some(e.std_error),
        });
        ests.push(e);
    }
    let ratios: Vec<f64> = ests.iter().map(|e| e.factorized / e.bound_rhs).collect();
    let summary = LemmaSummary {
        lemma_id: "K_composite".into(),
        max_ratio: ratios.iter().cloned().fold(0.0, f64::max),
        spread_of_constants: spread(&ratios),
        spread_at_fixed_scale: spread(&ratios),
    };
    Ok((rows, summary, ests))
}
