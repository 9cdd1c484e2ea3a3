//! Corner-type slope initial data and the hypothesis quantities.
//!
//! Each corner contributes `u_j(x - a_j) Phi_j(x - a_j) + c_j B(x)`, where
//! `u_j` is the local profile (jump at 0), `Phi_j` a smooth plateau of radius
//! `rho_j` that returns the slope to zero before the next corner, and `B` one
//! bump at the point of the torus farthest from every corner. The constants
//! `c_j` make every component exactly mean-zero on the grid.

use std::f64::consts::PI;

use crate::cutoff::{bump, smooth_sign, smooth_step};
use crate::error::{Error, Result};
use crate::spectral::{translate, Grid, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    SharpSign,
    /// Smooth odd transition over `[-width, width]`.
    MollifiedSign { width: f64 },
    /// `sign(y) sin(2 pi ln|y| / ln(scale))`: invariant under `y -> scale * y`.
    /// `scale = e^{2 pi}` gives `sign(y) sin(ln|y|)`.
    LogOscillating { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerSpec {
    pub location: f64,
    pub amplitude_left: f64,
    pub amplitude_right: f64,
    pub profile: Profile,
    pub evenness_exponent: f64,
}

impl CornerSpec {
    pub fn symmetric(location: f64, amplitude: f64) -> CornerSpec {
        CornerSpec {
            location,
            amplitude_left: amplitude,
            amplitude_right: amplitude,
            profile: Profile::SharpSign,
            evenness_exponent: 2.0,
        }
    }

    pub fn asymmetric(location: f64, amplitude_left: f64, amplitude_right: f64) -> CornerSpec {
        CornerSpec {
            location,
            amplitude_left,
            amplitude_right,
            profile: Profile::SharpSign,
            evenness_exponent: 2.0,
        }
    }

    pub fn with_profile(mut self, profile: Profile) -> CornerSpec {
        self.profile = profile;
        self
    }

    pub fn scaled(mut self, s: f64) -> CornerSpec {
        self.amplitude_left *= s;
        self.amplitude_right *= s;
        self
    }

    pub fn max_amplitude(&self) -> f64 {
        self.amplitude_left.abs().max(self.amplitude_right.abs())
    }

    fn validate(&self, grid: Grid, index: usize) -> Result<()> {
        let l = grid.period();
        if !(self.location >= 0.0 && self.location < l) {
            return Err(Error::InvalidCorner(format!(
                "corner {index}: location {} outside [0, {l})",
                self.location
            )));
        }
        if !(self.amplitude_left.is_finite() && self.amplitude_right.is_finite()) {
            return Err(Error::InvalidCorner(format!("corner {index}: non-finite amplitude")));
        }
        if !(self.evenness_exponent >= 1.0 && self.evenness_exponent.is_finite()) {
            return Err(Error::InvalidCorner(format!(
                "corner {index}: evenness exponent {} not in [1, inf)",
                self.evenness_exponent
            )));
        }
        match self.profile {
            Profile::SharpSign => {}
            Profile::MollifiedSign { width } => {
                if !(width >= 2.0 * grid.spacing()) {
                    return Err(Error::InvalidCorner(format!(
                        "corner {index}: width {width} under-resolved (< 2 spacings = {})",
                        2.0 * grid.spacing()
                    )));
                }
            }
            Profile::LogOscillating { scale } => {
                if !(scale > 1.0 && scale.is_finite()) {
                    return Err(Error::InvalidCorner(format!(
                        "corner {index}: log-oscillation scale {scale} must exceed 1"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Local profile at periodic displacement `y`, before the envelope.
    fn local(&self, y: f64, tol: f64) -> f64 {
        let (al, ar) = (self.amplitude_left, self.amplitude_right);
        match self.profile {
            Profile::SharpSign => {
                if y.abs() <= tol {
                    0.5 * (ar - al)
                } else if y > 0.0 {
                    ar
                } else {
                    -al
                }
            }
            Profile::MollifiedSign { width } => {
                0.5 * (ar + al) * smooth_sign(y, width) + 0.5 * (ar - al)
            }
            Profile::LogOscillating { scale } => {
                if y.abs() <= tol {
                    return 0.0;
                }
                let s = (2.0 * PI * y.abs().ln() / scale.ln()).sin();
                if y > 0.0 {
                    ar * s
                } else {
                    -al * s
                }
            }
        }
    }
}

/// Geometry shared by construction and measurement.
#[derive(Debug, Clone)]
pub struct CornerLayout {
    /// Plateau radius per corner (window for the hypothesis measurement).
    pub plateau: Vec<f64>,
    pub far_point: f64,
    pub bump_radius: f64,
}

pub fn corner_layout(corners: &[CornerSpec], grid: Grid) -> Result<CornerLayout> {
    let l = grid.period();
    let min_sep = l / 64.0;
    for (i, c) in corners.iter().enumerate() {
        c.validate(grid, i)?;
    }
    for i in 0..corners.len() {
        for j in i + 1..corners.len() {
            let d = grid.wrap(corners[i].location - corners[j].location).abs();
            if d < min_sep {
                return Err(Error::CornersTooClose {
                    first: i,
                    second: j,
                    min_separation: min_sep,
                });
            }
        }
    }
    let plateau: Vec<f64> = corners
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let d = corners
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, o)| grid.wrap(c.location - o.location).abs())
                .fold(f64::INFINITY, f64::min);
            if d.is_finite() {
                d / 4.0
            } else {
                l / 5.0
            }
        })
        .collect();
    let (mut far_point, mut far_dist) = (0.0, 0.0);
    for i in 0..grid.n_points() {
        let x = grid.x(i);
        let d = corners
            .iter()
            .map(|c| grid.wrap(x - c.location).abs())
            .fold(f64::INFINITY, f64::min);
        if d > far_dist {
            far_dist = d;
            far_point = x;
        }
    }
    let rho_max = plateau.iter().cloned().fold(0.0, f64::max);
    let bump_radius = (far_dist - rho_max).max(far_dist / 2.0).min(l / 2.0);
    Ok(CornerLayout {
        plateau,
        far_point,
        bump_radius,
    })
}

fn envelope(y: f64, rho: f64) -> f64 {
    1.0 - smooth_step((y.abs() - rho) / rho)
}

/// Per-corner components `h_{j,0}`, each mean-zero.
pub fn build_components(corners: &[CornerSpec], grid: Grid) -> Result<Vec<GridFunction>> {
    if corners.is_empty() {
        return Ok(Vec::new());
    }
    let layout = corner_layout(corners, grid)?;
    let tol = 1e-9 * grid.spacing();
    let b = GridFunction::from_fn(grid, |x| {
        bump(grid.wrap(x - layout.far_point) / layout.bump_radius)
    });
    let b_sum: f64 = b.values().iter().sum();
    Ok(corners
        .iter()
        .zip(&layout.plateau)
        .map(|(c, &rho)| {
            let mut h = GridFunction::from_fn(grid, |x| {
                let y = grid.wrap(x - c.location);
                c.local(y, tol) * envelope(y, rho)
            });
            let s: f64 = h.values().iter().sum();
            h.axpy(-s / b_sum, &b);
            h
        })
        .collect())
}

pub fn build_corner(spec: &CornerSpec, grid: Grid) -> Result<GridFunction> {
    Ok(build_components(std::slice::from_ref(spec), grid)?.remove(0))
}

pub fn superpose(corners: &[CornerSpec], grid: Grid) -> Result<GridFunction> {
    let mut total = GridFunction::zeros(grid);
    for h in build_components(corners, grid)? {
        total.axpy(1.0, &h);
    }
    Ok(total)
}

/// `f(y + a)`: component recentred so the corner sits at the origin.
pub fn center_component(h: &GridFunction, a: f64) -> GridFunction {
    shift_by(h, -a)
}

/// `f(x - s)`: exact index roll when `s` is a multiple of the spacing.
pub fn shift_by(f: &GridFunction, s: f64) -> GridFunction {
    let grid = f.grid();
    let n = grid.n_points();
    let r = s / grid.spacing();
    if (r - r.round()).abs() < 1e-9 {
        let r = (r.round() as i64).rem_euclid(n as i64) as usize;
        let v = f.values();
        let out = (0..n).map(|i| v[(i + n - r) % n]).collect();
        GridFunction::from_vec(grid, out)
    } else {
        translate(f, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataReport {
    pub epsilon: f64,
    pub evenness_lp: f64,
}

/// Value of `h` at `x` from samples on the side of `a` that `x` lies on.
fn sample_same_side(h: &GridFunction, x: f64, a: f64) -> f64 {
    let grid = h.grid();
    let n = grid.n_points() as i64;
    let dx = grid.spacing();
    let s = x / dx;
    let i0 = s.floor() as i64;
    let u = s - i0 as f64;
    let v = h.values();
    let at = |i: i64| v[i.rem_euclid(n) as usize];
    if u < 1e-12 {
        return at(i0);
    }
    let y0 = grid.wrap(i0 as f64 * dx - a);
    let y1 = y0 + dx;
    if y0 < 0.0 && y1 > 0.0 {
        return if grid.wrap(x - a) > 0.0 { at(i0 + 1) } else { at(i0) };
    }
    (1.0 - u) * at(i0) + u * at(i0 + 1)
}

pub fn measure_hypotheses(h0: &GridFunction, corners: &[CornerSpec]) -> Result<DataReport> {
    if corners.is_empty() {
        return Ok(DataReport {
            epsilon: h0.max_abs(),
            evenness_lp: 0.0,
        });
    }
    let grid = h0.grid();
    let layout = corner_layout(corners, grid)?;
    let dx = grid.spacing();
    let n = grid.n_points();
    let v = h0.values();
    let mut epsilon = 0.0;
    let mut evenness = 0.0;
    for (c, &rho) in corners.iter().zip(&layout.plateau) {
        let a = c.location;
        let mut sup = 0.0f64;
        let mut sup_deriv = 0.0f64;
        for i in 0..n {
            let y = grid.wrap(grid.x(i) - a);
            if y.abs() <= rho {
                sup = sup.max(v[i].abs());
                let y1 = y + dx;
                let straddles = y <= 1e-12 * dx && y1 >= -1e-12 * dx;
                if !straddles && y1.abs() <= rho {
                    let d = (v[(i + 1) % n] - v[i]) / dx;
                    sup_deriv = sup_deriv.max(((y + 0.5 * dx) * d).abs());
                }
            }
        }
        epsilon += sup + sup_deriv;
        let p = c.evenness_exponent;
        let m = (rho / dx).floor() as i64;
        let mut acc = 0.0;
        for j in -m..=m {
            let y = j as f64 * dx;
            let s = sample_same_side(h0, a + y, a) + sample_same_side(h0, a - y, a);
            acc += s.abs().powf(p);
        }
        evenness += (dx * acc).powf(1.0 / p);
    }
    Ok(DataReport {
        epsilon,
        evenness_lp: evenness,
    })
}
