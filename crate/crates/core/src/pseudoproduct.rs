//! Frequency-localized trilinear pseudoproduct
//!
//! ```text
//! T3(f1, f2, f3) = -(1/pi) d/dx int (L_k1 * f1')(x,a) (L_k2 * f2)(x,a) (L_k3 * f3)(x,a) da
//! ```
//!
//! Each slot is a convolution in `x` for fixed `a`. Writing
//! `(L_k * g)(x,a) = (A(x) - A(x-a))/a` with `A = psi_k * g`
//! (`psi_k(x) = psi0(2^k x)`), the alpha-integral becomes the same folded
//! sweep used for the Taylor terms, with the cubic image sum `S_3`.
//!
//! Two routes produce the slot functions `A`: convolution with the sampled
//! kernel tables ([`SlotRoute::Kernel`]) and the Fourier multipliers
//! `phi~_k` ([`SlotRoute::Multiplier`]).

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::cutoff::{phi_k, phi_tilde_k};
use crate::error::{Error, Result};
use crate::kernels::{KernelTable, Table1D};
use crate::rhs::{odd_power_sums, outer_derivative, AlphaQuadrature};
use crate::spectral::{
    admissible_bands, antiderivative, apply_real_symbol, derivative, irfft, lp_project, resample,
    rfft, DyadicBand, Grid, GridFunction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRoute {
    Kernel,
    Multiplier,
}

/// Slot function on the sweep grid together with its derivative.
#[derive(Debug, Clone)]
pub(crate) struct Slot {
    vals: Vec<f64>,
    deriv: Vec<f64>,
}

/// `sum_m kernel(2^k (x + m L))` sampled on `grid`.
fn periodized_samples(table: &Table1D, k: i32, grid: Grid) -> Vec<f64> {
    let s = 2f64.powi(k);
    let l = grid.period();
    let reach = (table.range() / (s * l)).ceil() as i64 + 1;
    (0..grid.n_points())
        .map(|i| {
            let x = grid.x(i);
            (-reach..=reach)
                .map(|m| table.eval(s * (x + m as f64 * l)))
                .sum()
        })
        .collect()
}

/// Convolution of `g` with the periodized `scale * kernel(2^k .)` on a grid
/// fine enough to hold the kernel's spectrum, returned on `out_n` points.
fn kernel_convolution(g: &GridFunction, table: &Table1D, k: i32, scale: f64, out_n: usize) -> GridFunction {
    let grid = g.grid();
    // kernel spectrum reaches 2^{k+3}; conv grid Nyquist must cover it plus g's band
    let need = 2f64.powi(k + 3) + grid.nyquist();
    let mut n = out_n.max(grid.n_points());
    while grid.nyquist() * (n as f64 / grid.n_points() as f64) < need {
        n *= 2;
    }
    let cgrid = grid.refined(n / grid.n_points());
    let kern = periodized_samples(table, k, cgrid);
    let gf = resample(g, n);
    let kh = rfft(&kern);
    let mut gh = rfft(gf.values());
    let dx = cgrid.spacing() * scale;
    for (a, b) in gh.iter_mut().zip(&kh) {
        *a *= b * dx;
    }
    let conv = GridFunction::from_vec(cgrid, irfft(gh, n));
    resample(&conv, out_n)
}

/// Slot function for band `k`. The first slot carries `P~_k f` (kernel
/// `psi_k'`), the others the antiderivative of `P~_k f` (kernel `psi_k`).
pub(crate) fn slot(
    f: &GridFunction,
    k: i32,
    first: bool,
    route: SlotRoute,
    table: &KernelTable,
    fine_n: usize,
) -> Slot {
    let a = match route {
        SlotRoute::Kernel => {
            if first {
                kernel_convolution(f, &table.psi0_prime, k, 2f64.powi(k), fine_n)
            } else {
                kernel_convolution(f, &table.psi0, k, 1.0, fine_n)
            }
        }
        SlotRoute::Multiplier => {
            let p = apply_real_symbol(f, |xi| phi_tilde_k(k, xi));
            let p = if first { p } else { antiderivative(&p) };
            resample(&p, fine_n)
        }
    };
    Slot {
        deriv: derivative(&a).into_values(),
        vals: a.into_values(),
    }
}

/// Unprojected slot (`A = f` or its antiderivative).
pub(crate) fn plain_slot(f: &GridFunction, first: bool, fine_n: usize) -> Slot {
    let centered = f.map(|v| v - f.mean());
    let p = if first { centered } else { antiderivative(&centered) };
    let a = resample(&p, fine_n);
    Slot {
        deriv: derivative(&a).into_values(),
        vals: a.into_values(),
    }
}

/// Folded alpha sweep for many triples of slot indices at once; returns the
/// coarse-grid outputs `-(1/pi) d/dx int prod (dA/a) da` per triple.
pub(crate) fn trilinear_sweep(
    slots: &[Slot],
    triples: &[(usize, usize, usize)],
    q: &AlphaQuadrature,
) -> Vec<GridFunction> {
    let fg = q.fine_grid();
    let m = fg.n_points();
    let db = fg.spacing();
    let s3 = &odd_power_sums(q, &[1])[0];
    let weights = q.weights();
    let mut acc: Vec<Vec<f64>> = triples
        .iter()
        .map(|&(a, b, c)| {
            (0..m)
                .map(|i| slots[a].deriv[i] * slots[b].deriv[i] * slots[c].deriv[i] * db)
                .collect()
        })
        .collect();
    let mut used = vec![false; slots.len()];
    for &(a, b, c) in triples {
        used[a] = true;
        used[b] = true;
        used[c] = true;
    }
    let mut dp = vec![vec![0.0; m]; slots.len()];
    let mut dm = vec![vec![0.0; m]; slots.len()];
    for j in 1..=m / 2 {
        let c = weights[j - 1] * s3[j - 1];
        for (s, slot) in slots.iter().enumerate() {
            if !used[s] {
                continue;
            }
            let v = &slot.vals;
            let (p, n) = (&mut dp[s], &mut dm[s]);
            for i in 0..m {
                p[i] = v[i] - v[(i + m - j) % m];
                n[i] = v[i] - v[(i + j) % m];
            }
        }
        for (t, &(a, b, cc)) in triples.iter().enumerate() {
            let out = &mut acc[t];
            let (pa, pb, pc) = (&dp[a], &dp[b], &dp[cc]);
            let (na, nb, nc) = (&dm[a], &dm[b], &dm[cc]);
            for i in 0..m {
                out[i] += c * (pa[i] * pb[i] * pc[i] - na[i] * nb[i] * nc[i]);
            }
        }
    }
    acc.into_iter()
        .map(|v| outer_derivative(v, q).scale(-1.0 / PI))
        .collect()
}

fn check_band_limited(f: &GridFunction, k: i32, slot: usize) -> Result<()> {
    let spec = rfft(f.values());
    let grid = f.grid();
    let (lo, hi) = DyadicBand::new(k).support();
    let mut inside = 0.0;
    let mut outside = 0.0;
    for (m, c) in spec.iter().enumerate() {
        let xi = grid.frequency(m);
        if xi > lo && xi < hi {
            inside += c.norm_sqr();
        } else {
            outside += c.norm_sqr();
        }
    }
    if outside > 1e-20 * (inside + outside) && outside > 0.0 {
        return Err(Error::BandMismatch(format!(
            "slot {slot} has spectral energy outside band {k} (fraction {:.2e})",
            outside / (inside + outside)
        )));
    }
    Ok(())
}

/// `T3(P_k1 f1, P_k2 f2, P_k3 f3)` for inputs already localized to their bands.
pub fn trilinear_pseudoproduct(
    f1: &GridFunction,
    f2: &GridFunction,
    f3: &GridFunction,
    bands: (i32, i32, i32),
    table: &KernelTable,
    q: &AlphaQuadrature,
) -> Result<GridFunction> {
    trilinear_pseudoproduct_route(f1, f2, f3, bands, table, q, SlotRoute::Kernel)
}

pub fn trilinear_pseudoproduct_route(
    f1: &GridFunction,
    f2: &GridFunction,
    f3: &GridFunction,
    bands: (i32, i32, i32),
    table: &KernelTable,
    q: &AlphaQuadrature,
    route: SlotRoute,
) -> Result<GridFunction> {
    let (k1, k2, k3) = bands;
    for (i, (f, k)) in [(f1, k1), (f2, k2), (f3, k3)].into_iter().enumerate() {
        if f.grid() != q.grid() {
            return Err(Error::GridMismatch("slot grid differs from quadrature grid".into()));
        }
        check_band_limited(f, k, i + 1)?;
    }
    let n = q.fine_grid().n_points();
    let slots = vec![
        slot(f1, k1, true, route, table, n),
        slot(f2, k2, false, route, table, n),
        slot(f3, k3, false, route, table, n),
    ];
    Ok(trilinear_sweep(&slots, &[(0, 1, 2)], q).remove(0))
}

/// `T3(f1, f2, f3)` without band localization (mean removed from each slot).
pub fn trilinear_direct(
    f1: &GridFunction,
    f2: &GridFunction,
    f3: &GridFunction,
    q: &AlphaQuadrature,
) -> GridFunction {
    let n = q.fine_grid().n_points();
    let slots = vec![
        plain_slot(f1, true, n),
        plain_slot(f2, false, n),
        plain_slot(f3, false, n),
    ];
    trilinear_sweep(&slots, &[(0, 1, 2)], q).remove(0)
}

/// Per-triple pseudoproducts of `(P_k1 f1, P_k2 f2, P_k3 f3)` over the given
/// band triples (kernel route), all in one sweep.
pub struct BandTriples {
    pub triples: Vec<(i32, i32, i32)>,
    pub outputs: Vec<GridFunction>,
}

impl BandTriples {
    pub fn total(&self, grid: Grid) -> GridFunction {
        let mut t = GridFunction::zeros(grid);
        for o in &self.outputs {
            t.axpy(1.0, o);
        }
        t
    }

    pub fn sum_where(&self, grid: Grid, pred: impl Fn(&(i32, i32, i32)) -> bool) -> GridFunction {
        let mut t = GridFunction::zeros(grid);
        for (tr, o) in self.triples.iter().zip(&self.outputs) {
            if pred(tr) {
                t.axpy(1.0, o);
            }
        }
        t
    }
}

pub fn band_triples(
    f1: &GridFunction,
    f2: &GridFunction,
    f3: &GridFunction,
    triples: &[(i32, i32, i32)],
    table: &KernelTable,
    q: &AlphaQuadrature,
    route: SlotRoute,
) -> Result<BandTriples> {
    let grid = q.grid();
    let n = q.fine_grid().n_points();
    let mut slots = Vec::new();
    let mut index: HashMap<(usize, i32), usize> = HashMap::new();
    let inputs = [f1, f2, f3];
    // slots 2 and 3 coincide when f2 == f3
    let same23 = f2 == f3;
    let mut get = |which: usize, k: i32, slots: &mut Vec<Slot>| -> Result<usize> {
        let key_which = if which == 2 && same23 { 1 } else { which };
        if let Some(&i) = index.get(&(key_which, k)) {
            return Ok(i);
        }
        let projected = lp_project(inputs[which], DyadicBand::new(k))?;
        slots.push(slot(&projected, k, which == 0, route, table, n));
        index.insert((key_which, k), slots.len() - 1);
        Ok(slots.len() - 1)
    };
    let mut idx = Vec::with_capacity(triples.len());
    for &(a, b, c) in triples {
        let i = get(0, a, &mut slots)?;
        let j = get(1, b, &mut slots)?;
        let l = get(2, c, &mut slots)?;
        idx.push((i, j, l));
    }
    // identical index triples (k2 <-> k3 with f2 == f3) are computed once
    let mut unique: Vec<(usize, usize, usize)> = Vec::new();
    let mut map = Vec::with_capacity(idx.len());
    let mut seen: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for &(a, b, c) in &idx {
        let key = (a, b.min(c), b.max(c));
        let u = *seen.entry(key).or_insert_with(|| {
            unique.push(key);
            unique.len() - 1
        });
        map.push(u);
    }
    let outs = trilinear_sweep(&slots, &unique, q);
    let outputs = map.iter().map(|&u| outs[u].clone()).collect::<Vec<_>>();
    debug_assert!(outputs.iter().all(|o| o.grid() == grid));
    Ok(BandTriples {
        triples: triples.to_vec(),
        outputs,
    })
}

/// All admissible band triples.
pub fn all_triples(grid: Grid) -> Vec<(i32, i32, i32)> {
    let ks: Vec<i32> = admissible_bands(grid).iter().map(|b| b.k).collect();
    let mut out = Vec::new();
    for &a in &ks {
        for &b in &ks {
            for &c in &ks {
                out.push((a, b, c));
            }
        }
    }
    out
}

fn sorted_desc(t: &(i32, i32, i32)) -> (i32, i32, i32) {
    let mut v = [t.0, t.1, t.2];
    v.sort_unstable_by(|a, b| b.cmp(a));
    (v[0], v[1], v[2])
}

/// Low-high set: top index within 3 of `k`, the other two at most `k - 6`.
pub fn in_low_high(k: i32, t: &(i32, i32, i32)) -> bool {
    let (a, b, _) = sorted_desc(t);
    (k - 3..=k + 3).contains(&a) && b <= k - 6
}

/// High-high set: top two indices within 10 of each other, `>= k-3` and `>= k-5`.
pub fn in_high_high(k: i32, t: &(i32, i32, i32)) -> bool {
    let (a, b, _) = sorted_desc(t);
    (a - b).abs() <= 10 && a >= k - 3 && b >= k - 5
}

#[derive(Debug, Clone)]
pub struct InteractionSplit {
    pub low_high: GridFunction,
    pub high_high: GridFunction,
    /// `P_k` of the sum over all admissible triples (same route).
    pub full: GridFunction,
}

/// `P_k T3 = G_{k,1} + G_{k,2}` over the low-high and high-high triple sets.
pub fn interaction_split(
    f1: &GridFunction,
    f2: &GridFunction,
    f3: &GridFunction,
    k: DyadicBand,
    table: &KernelTable,
    q: &AlphaQuadrature,
) -> Result<InteractionSplit> {
    let grid = q.grid();
    let triples = all_triples(grid);
    let bt = band_triples(f1, f2, f3, &triples, table, q, SlotRoute::Kernel)?;
    let kk = k.k;
    let pk = |g: GridFunction| apply_real_symbol(&g, |xi| phi_k(kk, xi));
    Ok(InteractionSplit {
        low_high: pk(bt.sum_where(grid, |t| in_low_high(kk, t))),
        high_high: pk(bt.sum_where(grid, |t| in_high_high(kk, t))),
        full: pk(bt.total(grid)),
    })
}
