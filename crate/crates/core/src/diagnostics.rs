//! Discrete norms on stored snapshots and the physical observables:
//! corner location, displacement law, self-similar collapse, decay rates.

use crate::error::{Error, Result};
use crate::spectral::{admissible_bands, derivative, lp_decompose, GridFunction, TrigInterpolant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    Z1,
    Z2,
    N,
}

impl NormKind {
    /// Band weight at `s = 2^k t`.
    pub fn weight(&self, s: f64) -> f64 {
        match self {
            NormKind::Z1 => s.powf(0.1),
            NormKind::Z2 => s.max(1.0 / s).powf(0.1),
            NormKind::N => s.powf(-0.1),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            NormKind::Z1 => "Z1",
            NormKind::Z2 => "Z2",
            NormKind::N => "N",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEntry {
    pub t: f64,
    pub k: i32,
    /// `||P_k F||_{L^2}` and `||P_k F||_inf`, unweighted.
    pub l2: f64,
    pub linf: f64,
    /// `2^{k/2} w ||P_k F||_{L^2}` and `w ||P_k F||_inf`.
    pub l2_weighted: f64,
    pub linf_weighted: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotTerms {
    pub t: f64,
    pub sup: f64,
    /// `||(x - a) dF||_inf` (Z1 only).
    pub x_deriv: f64,
    /// `sup_k w ||P_k((x - a) dF)||_inf` (Z1 only).
    pub x_deriv_bands: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub kind: NormKind,
    pub entries: Vec<BandEntry>,
    pub snapshots: Vec<SnapshotTerms>,
    pub sup_l2_weighted: f64,
    pub sup_linf_weighted: f64,
}

impl NormReport {
    /// The discrete norm: for Z1 the sup over snapshots of the four-term sum,
    /// for Z2 and N the sup of the weighted L^2 band entries.
    pub fn value(&self) -> f64 {
        match self.kind {
            NormKind::Z1 => self
                .snapshots
                .iter()
                .map(|s| {
                    let bands = self
                        .entries
                        .iter()
                        .filter(|e| e.t == s.t)
                        .map(|e| e.linf_weighted)
                        .fold(0.0, f64::max);
                    s.sup + bands + s.x_deriv + s.x_deriv_bands
                })
                .fold(0.0, f64::max),
            _ => self.sup_l2_weighted,
        }
    }

    /// `sup_k w ||P_k F(t)||_inf` per snapshot.
    pub fn band_sup_at(&self, t: f64) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.t == t)
            .map(|e| e.linf_weighted)
            .fold(0.0, f64::max)
    }

    /// Weighted L^2 sup per snapshot.
    pub fn l2_sup_at(&self, t: f64) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.t == t)
            .map(|e| e.l2_weighted)
            .fold(0.0, f64::max)
    }

    /// Report restricted to bands with `k <= kmax`.
    pub fn truncated(&self, kmax: i32) -> NormReport {
        let entries: Vec<BandEntry> = self.entries.iter().copied().filter(|e| e.k <= kmax).collect();
        finish(self.kind, entries, self.snapshots.clone())
    }
}

fn finish(kind: NormKind, entries: Vec<BandEntry>, snapshots: Vec<SnapshotTerms>) -> NormReport {
    let sup_l2_weighted = entries.iter().map(|e| e.l2_weighted).fold(0.0, f64::max);
    let sup_linf_weighted = entries.iter().map(|e| e.linf_weighted).fold(0.0, f64::max);
    NormReport {
        kind,
        entries,
        snapshots,
        sup_l2_weighted,
        sup_linf_weighted,
    }
}

fn band_entries(kind: NormKind, t: f64, f: &GridFunction) -> Vec<BandEntry> {
    lp_decompose(f)
        .into_iter()
        .map(|(b, p)| {
            let s = 2f64.powi(b.k) * t;
            let w = kind.weight(s);
            let l2 = p.l2_norm();
            let linf = p.max_abs();
            BandEntry {
                t,
                k: b.k,
                l2,
                linf,
                l2_weighted: 2f64.powf(b.k as f64 / 2.0) * w * l2,
                linf_weighted: w * linf,
            }
        })
        .collect()
}

/// `(x - a) dF`: spectral derivative for `t > 0`; at `t = 0` forward
/// differences, skipping the cells that touch `a`.
fn x_derivative(f: &GridFunction, a: f64, t: f64) -> GridFunction {
    let grid = f.grid();
    if t > 0.0 {
        let d = derivative(f);
        return GridFunction::from_fn(grid, |x| grid.wrap(x - a)).mul(&d);
    }
    let n = grid.n_points();
    let dx = grid.spacing();
    let v = f.values();
    let out = (0..n)
        .map(|i| {
            let y = grid.wrap(grid.x(i) - a);
            let y1 = y + dx;
            if y <= 1e-12 * dx && y1 >= -1e-12 * dx {
                0.0
            } else {
                (y + 0.5 * dx) * (v[(i + 1) % n] - v[i]) / dx
            }
        })
        .collect();
    GridFunction::new(grid, out).expect("finite differences of finite data")
}

/// Discrete `Z1` report of `F` with corner origin `a` per snapshot.
pub fn z1_norm(trajectory: &[(f64, GridFunction)], corner: impl Fn(f64) -> f64) -> NormReport {
    let mut entries = Vec::new();
    let mut snaps = Vec::new();
    for (t, f) in trajectory {
        let a = corner(*t);
        let xd = x_derivative(f, a, *t);
        let xd_bands = if *t > 0.0 {
            band_entries(NormKind::Z1, *t, &xd)
                .iter()
                .map(|e| e.linf_weighted)
                .fold(0.0, f64::max)
        } else {
            0.0
        };
        if *t > 0.0 {
            entries.extend(band_entries(NormKind::Z1, *t, f));
        }
        snaps.push(SnapshotTerms {
            t: *t,
            sup: f.max_abs(),
            x_deriv: xd.max_abs(),
            x_deriv_bands: xd_bands,
        });
    }
    finish(NormKind::Z1, entries, snaps)
}

fn weighted_report(kind: NormKind, trajectory: &[(f64, GridFunction)]) -> NormReport {
    let mut entries = Vec::new();
    let mut snaps = Vec::new();
    for (t, f) in trajectory.iter().filter(|(t, _)| *t > 0.0) {
        entries.extend(band_entries(kind, *t, f));
        snaps.push(SnapshotTerms {
            t: *t,
            sup: f.max_abs(),
            x_deriv: 0.0,
            x_deriv_bands: 0.0,
        });
    }
    finish(kind, entries, snaps)
}

/// Discrete `Z2` report over snapshots with `t > 0`.
pub fn z2_norm(trajectory: &[(f64, GridFunction)]) -> NormReport {
    weighted_report(NormKind::Z2, trajectory)
}

/// Discrete `N` report over snapshots with `t > 0`.
pub fn n_norm(trajectory: &[(f64, GridFunction)]) -> NormReport {
    weighted_report(NormKind::N, trajectory)
}

/// Discrete `Z2` norm (weighted L^2 sup).
pub fn z2_distance(trajectory: &[(f64, GridFunction)]) -> f64 {
    let mut sup = 0.0f64;
    for (t, f) in trajectory.iter().filter(|(t, _)| *t > 0.0) {
        for e in band_entries(NormKind::Z2, *t, f) {
            sup = sup.max(e.l2_weighted);
        }
    }
    sup
}

/// Position of the extremum of `dh` within `|x - a| <= window`, refined by a
/// quadratic fit and Newton on the trigonometric interpolant.
pub fn corner_location(h: &GridFunction, a: f64, window: f64) -> Result<f64> {
    let grid = h.grid();
    let d = derivative(h);
    let dv = d.values();
    let n = grid.n_points();
    let mut best: Option<(usize, f64)> = None;
    let mut edge = 0.0f64;
    for i in 0..n {
        let y = grid.wrap(grid.x(i) - a);
        if y.abs() > window {
            continue;
        }
        if y.abs() > 0.75 * window {
            edge = edge.max(dv[i].abs());
        }
        if best.map_or(true, |(_, v)| dv[i].abs() > v) {
            best = Some((i, dv[i].abs()));
        }
    }
    let (i, peak) = best.ok_or(Error::NoExtremum(a))?;
    let yi = grid.wrap(grid.x(i) - a);
    if peak == 0.0 || peak < 2.0 * edge || yi.abs() > 0.75 * window {
        return Err(Error::NoExtremum(a));
    }
    let (fm, f0, fp) = (dv[(i + n - 1) % n], dv[i], dv[(i + 1) % n]);
    let denom = fm - 2.0 * f0 + fp;
    let mut x = grid.x(i);
    if denom != 0.0 {
        let off = 0.5 * (fm - fp) / denom;
        if off.abs() <= 1.0 {
            x += off * grid.spacing();
        }
    }
    // polish: zero of h'' next to the peak of h'
    let ti = TrigInterpolant::new(h);
    for _ in 0..20 {
        let h2 = ti.eval_derivative(x, 2);
        let h3 = ti.eval_derivative(x, 3);
        if h3 == 0.0 {
            break;
        }
        let step = h2 / h3;
        if step.abs() > grid.spacing() {
            break;
        }
        x -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    Ok(a + grid.wrap(x - a))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CornerTrack {
    pub times: Vec<f64>,
    /// `[corner][time]`.
    pub positions: Vec<Vec<f64>>,
    pub displacement: Vec<Vec<f64>>,
    /// `c` in `delta(t) = c t log(2/t)` per corner (least squares).
    pub fit: Vec<f64>,
}

pub fn track_corners(snapshots: &[(f64, GridFunction)], corners: &[f64], window: f64) -> Result<CornerTrack> {
    let times: Vec<f64> = snapshots.iter().map(|(t, _)| *t).filter(|t| *t > 0.0).collect();
    let mut positions = Vec::new();
    let mut displacement = Vec::new();
    let mut fit = Vec::new();
    for &a in corners {
        let pos: Vec<f64> = snapshots
            .iter()
            .filter(|(t, _)| *t > 0.0)
            .map(|(_, h)| corner_location(h, a, window))
            .collect::<Result<_>>()?;
        let del: Vec<f64> = pos.iter().map(|p| p - a).collect();
        let basis: Vec<f64> = times.iter().map(|&t| t * (2.0 / t).ln()).collect();
        let num: f64 = basis.iter().zip(&del).map(|(b, d)| b * d).sum();
        let den: f64 = basis.iter().map(|b| b * b).sum();
        fit.push(if den > 0.0 { num / den } else { 0.0 });
        positions.push(pos);
        displacement.push(del);
    }
    Ok(CornerTrack {
        times,
        positions,
        displacement,
        fit,
    })
}

/// Least-squares line `|delta|/t = intercept + slope * log(2/t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn log_law_fit(times: &[f64], displacement: &[f64]) -> Result<LogLawFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(displacement)
        .filter(|(t, _)| **t > 0.0)
        .map(|(&t, &d)| ((2.0 / t).ln(), d.abs() / t))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientSamples(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientSamples(1));
    }
    let slope = sxy / sxx;
    Ok(LogLawFit {
        slope,
        intercept: my - slope * mx,
        r_squared: if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 0.0 },
    })
}

/// Profile `y -> h(a + t y)` on `[-y_max, y_max]`.
pub fn rescaled_profile(h: &GridFunction, a: f64, t: f64, y_max: f64, samples: usize) -> Vec<f64> {
    let ti = TrigInterpolant::new(h);
    (0..samples)
        .map(|i| {
            let y = -y_max + 2.0 * y_max * i as f64 / (samples - 1) as f64;
            ti.eval(a + t * y)
        })
        .collect()
}

/// `sup_y |h1(a + t1 y) - h2(a + t2 y)| / eps` over `|y| <= y_max`.
pub fn pair_mismatch(
    h1: (f64, &GridFunction),
    h2: (f64, &GridFunction),
    a: f64,
    epsilon: f64,
    y_max: f64,
) -> f64 {
    let p1 = rescaled_profile(h1.1, a, h1.0, y_max, 201);
    let p2 = rescaled_profile(h2.1, a, h2.0, y_max, 201);
    let d = p1.iter().zip(&p2).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    if epsilon > 0.0 {
        d / epsilon
    } else {
        d
    }
}

/// Largest pairwise rescaled-profile mismatch over the snapshots.
pub fn self_similar_collapse(snapshots: &[(f64, GridFunction)], a: f64, epsilon: f64, y_max: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..snapshots.len() {
        for j in i + 1..snapshots.len() {
            let (ti, hi) = &snapshots[i];
            let (tj, hj) = &snapshots[j];
            worst = worst.max(pair_mismatch((*ti, hi), (*tj, hj), a, epsilon, y_max));
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Per band: `(k, slope, samples)`.
    pub per_band: Vec<(i32, f64, usize)>,
    /// Pooled slope over every band with enough samples.
    pub pooled: f64,
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares slope of `log ||P_k F(t)||_inf` against `log(2^k t)` on the
/// smoothing side `2^k t >= 1`, per band and pooled (band offsets removed).
pub fn decay_fit(report: &NormReport) -> Result<DecayFit> {
    let mut ks: Vec<i32> = report.entries.iter().map(|e| e.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut per_band = Vec::new();
    let mut pooled = Vec::new();
    for k in ks {
        let pts: Vec<(f64, f64)> = report
            .entries
            .iter()
            .filter(|e| e.k == k && 2f64.powi(k) * e.t >= 1.0 && e.linf > 1e-300)
            .map(|e| ((2f64.powi(k) * e.t).ln(), e.linf.ln()))
            .collect();
        if pts.len() >= 4 {
            let sx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
            let sy = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
            per_band.push((k, slope(&pts), pts.len()));
            pooled.extend(pts.iter().map(|p| (p.0 - sx, p.1 - sy)));
        }
    }
    if pooled.len() < 4 {
        return Err(Error::InsufficientSamples(pooled.len()));
    }
    Ok(DecayFit {
        per_band,
        pooled: slope(&pooled),
    })
}

/// Bands present on the grid of `f` (for report headers).
pub fn band_list(f: &GridFunction) -> Vec<i32> {
    admissible_bands(f.grid()).iter().map(|b| b.k).collect()
}
