//! Experiment configuration: flat `key = value` lines with dotted sections.
//!
//! ```text
//! # comment
//! grid.n_points = 1024
//! grid.period = 16
//! corner.left.location = 4.0
//! corner.left.amplitude_left = 0.025
//! corner.left.amplitude_right = 0.05
//! corner.left.profile = sharp          # sharp | mollified | log
//! times.snapshots = 0.05, 0.1, 0.2
//! solver.t_end = 0.25
//! ```
//!
//! Unknown keys are rejected. Corners keep their label and file order.

use std::path::Path;

use crate::corner::VelocityParams;
use crate::error::{Error, Result};
use crate::initial_data::{corner_layout, CornerSpec, Profile};
use crate::rhs::{AlphaQuadrature, OuterTail};
use crate::spectral::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Duhamel,
    Imex,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub n_max: usize,
    pub t_end: f64,
    pub max_iterations: usize,
    /// Stop tolerance relative to the data size `epsilon`.
    pub tolerance: f64,
    pub fixed_iterations: Option<usize>,
    /// Largest step as a multiple of the grid spacing.
    pub dt_factor: f64,
    pub method: Method,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            n_max: 2,
            t_end: 0.25,
            max_iterations: 8,
            tolerance: 1e-4,
            fixed_iterations: None,
            dt_factor: 0.5,
            method: Method::Both,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSettings {
    pub refine: usize,
    /// `0` sums all periodic images in closed form.
    pub images: usize,
    /// `V1` outer cutoff; `None` means `L/8`.
    pub velocity_cutoff: Option<f64>,
    pub nodes_per_octave: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            refine: 2,
            images: 0,
            velocity_cutoff: None,
            nodes_per_octave: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub dir: String,
    pub snapshots: bool,
    pub norms: bool,
    pub corners: bool,
    pub trace: bool,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings {
            dir: "out".into(),
            snapshots: true,
            norms: true,
            corners: true,
            trace: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_points: usize,
    pub period: f64,
    pub labels: Vec<String>,
    pub corners: Vec<CornerSpec>,
    /// Rescale the data so the measured size equals this value.
    pub epsilon: Option<f64>,
    pub snapshots: Vec<f64>,
    pub solver: SolverSettings,
    pub quadrature: QuadratureSettings,
    pub output: OutputSettings,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_points: 1024,
            period: 16.0,
            labels: Vec::new(),
            corners: Vec::new(),
            epsilon: None,
            snapshots: vec![0.05, 0.1, 0.2],
            solver: SolverSettings::default(),
            quadrature: QuadratureSettings::default(),
            output: OutputSettings::default(),
            seed: 20240611,
        }
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n_points, self.period).map_err(|e| invalid("grid.n_points", &e.to_string()))
    }

    pub fn quadrature(&self) -> Result<AlphaQuadrature> {
        let tail = if self.quadrature.images == 0 {
            OuterTail::Periodized
        } else {
            OuterTail::Images(self.quadrature.images)
        };
        Ok(AlphaQuadrature::new(self.grid()?, self.quadrature.refine, tail))
    }

    pub fn velocity(&self) -> Result<VelocityParams> {
        let mut v = VelocityParams::for_grid(self.grid()?);
        if let Some(c) = self.quadrature.velocity_cutoff {
            v.cutoff = c;
        }
        v.nodes_per_octave = self.quadrature.nodes_per_octave;
        Ok(v)
    }

    pub fn add_corner(&mut self, label: &str, spec: CornerSpec) {
        self.labels.push(label.to_string());
        self.corners.push(spec);
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if let Err(e) = corner_layout(&self.corners, grid) {
            return Err(match e {
                Error::CornersTooClose {
                    first,
                    second,
                    min_separation,
                } => invalid(
                    "corner",
                    &format!(
                        "corners `{}` and `{}` are closer than {min_separation:.4}",
                        self.labels[first], self.labels[second]
                    ),
                ),
                Error::InvalidCorner(msg) => invalid("corner", &msg),
                e => e,
            });
        }
        if let Some(e) = self.epsilon {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(invalid("epsilon", "must be finite and nonnegative"));
            }
        }
        if self.snapshots.iter().any(|&t| !(t > 0.0) || t > self.solver.t_end) {
            return Err(invalid("times.snapshots", "snapshot times must lie in (0, solver.t_end]"));
        }
        if !(1..=3).contains(&self.solver.n_max) {
            return Err(invalid("solver.n_max", "must be 1, 2 or 3"));
        }
        if !(self.solver.t_end > 0.0) {
            return Err(invalid("solver.t_end", "must be positive"));
        }
        if !(self.solver.dt_factor > 0.0) {
            return Err(invalid("solver.dt_factor", "must be positive"));
        }
        if self.quadrature.refine == 0 || !self.quadrature.refine.is_power_of_two() {
            return Err(invalid("quadrature.refine", "must be a power of two"));
        }
        if self.quadrature.nodes_per_octave < 4 {
            return Err(invalid("quadrature.nodes_per_octave", "must be at least 4"));
        }
        if let Some(c) = self.quadrature.velocity_cutoff {
            if !(c > 0.0 && c <= self.period / 2.0) {
                return Err(invalid("quadrature.velocity_cutoff", "must lie in (0, L/2]"));
            }
        }
        Ok(())
    }

    /// Canonical text form; parses back to the same config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        put("grid.n_points", self.n_points.to_string());
        put("grid.period", self.period.to_string());
        if let Some(e) = self.epsilon {
            put("epsilon", e.to_string());
        }
        put("seed", self.seed.to_string());
        for (label, c) in self.labels.iter().zip(&self.corners) {
            let p = format!("corner.{label}");
            put(&format!("{p}.location"), c.location.to_string());
            put(&format!("{p}.amplitude_left"), c.amplitude_left.to_string());
            put(&format!("{p}.amplitude_right"), c.amplitude_right.to_string());
            put(&format!("{p}.evenness_exponent"), c.evenness_exponent.to_string());
            match c.profile {
                Profile::SharpSign => put(&format!("{p}.profile"), "sharp".into()),
                Profile::MollifiedSign { width } => {
                    put(&format!("{p}.profile"), "mollified".into());
                    put(&format!("{p}.width"), width.to_string());
                }
                Profile::LogOscillating { scale } => {
                    put(&format!("{p}.profile"), "log".into());
                    put(&format!("{p}.scale"), scale.to_string());
                }
            }
        }
        put(
            "times.snapshots",
            self.snapshots.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", "),
        );
        let sv = &self.solver;
        put("solver.n_max", sv.n_max.to_string());
        put("solver.t_end", sv.t_end.to_string());
        put("solver.max_iterations", sv.max_iterations.to_string());
        put("solver.tolerance", sv.tolerance.to_string());
        if let Some(f) = sv.fixed_iterations {
            put("solver.fixed_iterations", f.to_string());
        }
        put("solver.dt_factor", sv.dt_factor.to_string());
        put(
            "solver.method",
            match sv.method {
                Method::Duhamel => "duhamel",
                Method::Imex => "imex",
                Method::Both => "both",
            }
            .into(),
        );
        let q = &self.quadrature;
        put("quadrature.refine", q.refine.to_string());
        put("quadrature.images", q.images.to_string());
        if let Some(c) = q.velocity_cutoff {
            put("quadrature.velocity_cutoff", c.to_string());
        }
        put("quadrature.nodes_per_octave", q.nodes_per_octave.to_string());
        let o = &self.output;
        put("output.dir", o.dir.clone());
        put("output.snapshots", o.snapshots.to_string());
        put("output.norms", o.norms.to_string());
        put("output.corners", o.corners.to_string());
        put("output.trace", o.trace.to_string());
        s
    }
}

fn invalid(field: &str, msg: &str) -> Error {
    Error::ConfigInvalid {
        field: field.to_string(),
        msg: msg.to_string(),
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::ConfigParse {
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| parse_err(line, format!("`{key}`: cannot parse `{v}`")))
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(parse_err(line, format!("`{key}`: expected true/false, got `{v}`"))),
    }
}

#[derive(Default)]
struct CornerDraft {
    location: Option<f64>,
    left: Option<f64>,
    right: Option<f64>,
    profile: Option<String>,
    width: Option<f64>,
    scale: Option<f64>,
    evenness: Option<f64>,
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut drafts: Vec<(String, CornerDraft)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(parse_err(line, format!("duplicate key `{key}`")));
        }
        match key {
            "grid.n_points" => cfg.n_points = num(line, key, value)?,
            "grid.period" => cfg.period = num(line, key, value)?,
            "epsilon" => cfg.epsilon = Some(num(line, key, value)?),
            "seed" => cfg.seed = num(line, key, value)?,
            "times.snapshots" => {
                cfg.snapshots = value
                    .split(',')
                    .map(|s| num(line, key, s.trim()))
                    .collect::<Result<_>>()?;
            }
            "solver.n_max" => cfg.solver.n_max = num(line, key, value)?,
            "solver.t_end" => cfg.solver.t_end = num(line, key, value)?,
            "solver.max_iterations" => cfg.solver.max_iterations = num(line, key, value)?,
            "solver.tolerance" => cfg.solver.tolerance = num(line, key, value)?,
            "solver.fixed_iterations" => cfg.solver.fixed_iterations = Some(num(line, key, value)?),
            "solver.dt_factor" => cfg.solver.dt_factor = num(line, key, value)?,
            "solver.method" => {
                cfg.solver.method = match value {
                    "duhamel" => Method::Duhamel,
                    "imex" => Method::Imex,
                    "both" => Method::Both,
                    _ => return Err(parse_err(line, format!("unknown solver.method `{value}`"))),
                }
            }
            "quadrature.refine" => cfg.quadrature.refine = num(line, key, value)?,
            "quadrature.images" => cfg.quadrature.images = num(line, key, value)?,
            "quadrature.velocity_cutoff" => cfg.quadrature.velocity_cutoff = Some(num(line, key, value)?),
            "quadrature.nodes_per_octave" => cfg.quadrature.nodes_per_octave = num(line, key, value)?,
            "output.dir" => cfg.output.dir = value.to_string(),
            "output.snapshots" => cfg.output.snapshots = boolean(line, key, value)?,
            "output.norms" => cfg.output.norms = boolean(line, key, value)?,
            "output.corners" => cfg.output.corners = boolean(line, key, value)?,
            "output.trace" => cfg.output.trace = boolean(line, key, value)?,
            _ => {
                let rest = key
                    .strip_prefix("corner.")
                    .ok_or_else(|| parse_err(line, format!("unknown key `{key}`")))?;
                let (label, field) = rest
                    .rsplit_once('.')
                    .ok_or_else(|| parse_err(line, format!("unknown key `{key}`")))?;
                if label.is_empty() || label.contains('.') {
                    return Err(parse_err(line, format!("bad corner label in `{key}`")));
                }
                let pos = match drafts.iter().position(|(l, _)| l == label) {
                    Some(p) => p,
                    None => {
                        drafts.push((label.to_string(), CornerDraft::default()));
                        drafts.len() - 1
                    }
                };
                let d = &mut drafts[pos].1;
                match field {
                    "location" => d.location = Some(num(line, key, value)?),
                    "amplitude" => {
                        let a = num(line, key, value)?;
                        d.left = Some(a);
                        d.right = Some(a);
                    }
                    "amplitude_left" => d.left = Some(num(line, key, value)?),
                    "amplitude_right" => d.right = Some(num(line, key, value)?),
                    "profile" => d.profile = Some(value.to_string()),
                    "width" => d.width = Some(num(line, key, value)?),
                    "scale" => d.scale = Some(num(line, key, value)?),
                    "evenness_exponent" => d.evenness = Some(num(line, key, value)?),
                    _ => return Err(parse_err(line, format!("unknown key `{key}`"))),
                }
            }
        }
    }
    for (label, d) in drafts {
        let field = |f: &str| format!("corner.{label}.{f}");
        let location = d.location.ok_or_else(|| invalid(&field("location"), "missing"))?;
        let left = d.left.ok_or_else(|| invalid(&field("amplitude"), "missing"))?;
        let right = d.right.ok_or_else(|| invalid(&field("amplitude"), "missing"))?;
        let profile = match d.profile.as_deref().unwrap_or("sharp") {
            "sharp" => Profile::SharpSign,
            "mollified" => Profile::MollifiedSign {
                width: d.width.ok_or_else(|| invalid(&field("width"), "required for mollified profile"))?,
            },
            "log" => Profile::LogOscillating {
                scale: d.scale.unwrap_or(2.0),
            },
            other => return Err(invalid(&field("profile"), &format!("unknown profile `{other}`"))),
        };
        let mut spec = CornerSpec::asymmetric(location, left, right).with_profile(profile);
        if let Some(p) = d.evenness {
            spec.evenness_exponent = p;
        }
        cfg.add_corner(&label, spec);
    }
    cfg.validate()?;
    Ok(cfg)
}
