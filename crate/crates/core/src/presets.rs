//! Named experiment presets and the config-driven runner behind `muskat`.
//!
//! Every run writes CSV tables (see [`crate::output`]) and a `summary.txt`
//! with one PASS/FAIL line per check.

use std::f64::consts::SQRT_2;
use std::path::{Path, PathBuf};

use crate::config::{ExperimentConfig, Method};
use crate::corner::{qtilde_from_free_evolution, velocity_v, velocity_v1_core, CorrectionTable, VelocityParams};
use crate::diagnostics::{
    decay_fit, log_law_fit, n_norm, pair_mismatch, self_similar_collapse, track_corners, z1_norm, z2_norm,
    CornerTrack, NormReport,
};
use crate::error::{Error, Result, ResultExt};
use crate::initial_data::{build_components, corner_layout, measure_hypotheses, CornerSpec, Profile};
use crate::kernels::{verify_composite_lemma, verify_kernel_lemma, KernelTable};
use crate::output::{Cell, Summary, Table};
use crate::solver::{
    assemble, duhamel_run, free_evolution_init, imex_run, IterationControl, IterationTrace, Nonlinearity,
    RenormalizedProblem, TimeGrid,
};
use crate::spectral::{poisson_semigroup, Grid, GridFunction};

pub const PRESET_NAMES: [&str; 8] = [
    "single-symmetric",
    "single-asymmetric",
    "asymmetric-pair",
    "log-self-similar",
    "verify-kernels",
    "verify-velocity",
    "verify-norms",
    "contraction-study",
];

/// Command-line overrides applied on top of a preset or config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n_points: Option<usize>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(n) = self.n_points {
            cfg.n_points = n;
        }
        if let Some(e) = self.epsilon {
            cfg.epsilon = Some(e);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

/// Config for the scenario presets; the `verify-*` and `contraction-study`
/// presets are procedures and have none.
pub fn preset_config(name: &str) -> Result<ExperimentConfig> {
    let eps = 0.05;
    let mut cfg = ExperimentConfig::default();
    match name {
        "single-symmetric" => {
            cfg.add_corner("a", CornerSpec::symmetric(8.0, eps));
            cfg.snapshots = vec![0.0125, 0.025, 0.05, 0.1, 0.2];
        }
        "single-asymmetric" => {
            cfg.add_corner("a", CornerSpec::asymmetric(8.0, eps / 2.0, eps));
            cfg.snapshots = vec![0.01, 0.015, 0.02, 0.03, 0.04, 0.05, 0.07, 0.1, 0.14, 0.2];
        }
        "asymmetric-pair" => {
            cfg.add_corner("left", CornerSpec::asymmetric(5.0, eps / 2.0, eps));
            cfg.add_corner("right", CornerSpec::asymmetric(11.0, eps, eps / 2.0));
            cfg.snapshots = vec![0.0125, 0.025, 0.05, 0.1, 0.2];
        }
        "log-self-similar" => {
            let spec = CornerSpec::symmetric(8.0, eps).with_profile(Profile::LogOscillating { scale: 2.0 });
            cfg.add_corner("a", spec);
            cfg.n_points = 2048;
            cfg.snapshots = vec![0.025, 0.025 * SQRT_2, 0.05, 0.05 * SQRT_2, 0.1, 0.1 * SQRT_2, 0.2];
            cfg.solver.t_end = 0.2;
            cfg.solver.method = Method::Imex;
        }
        _ => return Err(unknown(name)),
    }
    Ok(cfg)
}

fn unknown(name: &str) -> Error {
    Error::UnknownPreset {
        name: name.to_string(),
        available: PRESET_NAMES.join(", "),
    }
}

pub fn run_preset(name: &str, out: &Path, ov: &Overrides) -> Result<Summary> {
    match name {
        "verify-kernels" => verify_kernels(out, ov),
        "verify-velocity" => verify_velocity(out, ov),
        "verify-norms" => verify_norms(out, ov),
        "contraction-study" => contraction_study(out, ov),
        _ => {
            let mut cfg = preset_config(name)?;
            ov.apply(&mut cfg);
            let mut outcome = run_experiment(&cfg, out)?;
            outcome.summary.header.insert(0, format!("preset {name}"));
            outcome.summary.write(out)?;
            Ok(outcome.summary)
        }
    }
}

/// Everything a run measured, besides the files it wrote.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: Summary,
    /// Measured size of the (rescaled) data.
    pub epsilon: f64,
    /// Largest corner amplitude; the scale the tolerances refer to.
    pub amplitude: f64,
    pub trace: Option<IterationTrace>,
    /// `sup |h_duhamel - h_imex|` at the final time.
    pub solver_gap: Option<f64>,
    /// Per corner, on the centered components.
    pub z1: Vec<NormReport>,
    pub z2_perturbation: Option<NormReport>,
    pub track: Option<CornerTrack>,
    /// `[tracked corner][snapshot]` displacement predicted by `q~`.
    pub predicted: Vec<Vec<f64>>,
    pub files: Vec<PathBuf>,
}

/// Corners rescaled so the measured data size equals `cfg.epsilon`.
fn scaled_corners(cfg: &ExperimentConfig, grid: Grid) -> Result<(Vec<CornerSpec>, f64)> {
    let comps = build_components(&cfg.corners, grid)?;
    let h0 = sum(grid, &comps);
    let measured = measure_hypotheses(&h0, &cfg.corners)?.epsilon;
    match cfg.epsilon {
        Some(e) if measured > 0.0 => Ok((cfg.corners.iter().map(|c| c.scaled(e / measured)).collect(), e)),
        Some(e) => Ok((cfg.corners.clone(), e.min(measured))),
        None => Ok((cfg.corners.clone(), measured)),
    }
}

fn sum(grid: Grid, parts: &[GridFunction]) -> GridFunction {
    let mut total = GridFunction::zeros(grid);
    for p in parts {
        total.axpy(1.0, p);
    }
    total
}

fn fmt(v: f64) -> String {
    format!("{v:.4e}")
}

pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let quad = cfg.quadrature()?;
    let vparams = cfg.velocity()?;
    let (corners, epsilon) = scaled_corners(cfg, grid).context("initial data")?;
    let amplitude = corners.iter().map(|c| c.max_amplitude()).fold(0.0, f64::max);
    let comps = build_components(&corners, grid)?;
    let h0 = sum(grid, &comps);
    let layout = corner_layout(&corners, grid)?;

    let dt_max = cfg.solver.dt_factor * grid.spacing();
    let tg = TimeGrid::graded(cfg.solver.t_end, dt_max, &cfg.snapshots)?;
    let snap_idx: Vec<usize> = cfg
        .snapshots
        .iter()
        .map(|&t| tg.index_of(t).ok_or_else(|| Error::GridMismatch(format!("snapshot {t} not on the time grid"))))
        .collect::<Result<_>>()?;
    let qtab = qtilde_from_free_evolution(&comps, &corners, &tg.times, vparams).context("correction q~")?;

    let mut summary = Summary::default();
    summary.note(format!("n_points = {}, period = {}, seed = {}", grid.n_points(), grid.period(), cfg.seed));
    summary.note(format!("measured epsilon = {}, amplitude = {}", fmt(epsilon), fmt(amplitude)));
    summary.note(format!("time nodes = {}, dt_max = {}", tg.times.len(), fmt(dt_max)));
    let mut files = Vec::new();
    std::fs::create_dir_all(out)?;
    let cfg_path = out.join("config.txt");
    std::fs::write(&cfg_path, cfg.to_text())?;
    files.push(cfg_path);

    let want_duhamel = matches!(cfg.solver.method, Method::Duhamel | Method::Both);
    let want_imex = matches!(cfg.solver.method, Method::Imex | Method::Both);

    let mut duhamel = None;
    if want_duhamel {
        let p = RenormalizedProblem::new(&corners, &comps, tg.clone(), qtab.clone(), quad.clone(), cfg.solver.n_max)?;
        let control = IterationControl {
            max_iterations: cfg.solver.max_iterations,
            stop_tolerance: cfg.solver.tolerance * amplitude,
            fixed_iterations: cfg.solver.fixed_iterations,
        };
        let sol = duhamel_run(&p, control).context("duhamel iteration")?;
        duhamel = Some((p, sol));
    }
    let imex = if want_imex {
        Some(imex_run(&h0, &tg, Nonlinearity::Full, &quad).context("imex integration")?)
    } else {
        None
    };

    // physical snapshots, preferring the Duhamel solution
    let h_snap: Vec<(f64, GridFunction)> = snap_idx
        .iter()
        .map(|&i| {
            let h = match (&duhamel, &imex) {
                (Some((p, sol)), _) => sol.state(p, i).h_total,
                (None, Some(tr)) => tr[i].clone(),
                _ => unreachable!("method selects at least one solver"),
            };
            (tg.times[i], h)
        })
        .collect();
    summary.check(
        "finite",
        h_snap.iter().all(|(_, h)| h.is_finite()),
        format!("max |h| over snapshots = {}", fmt(h_snap.iter().map(|(_, h)| h.max_abs()).fold(0.0, f64::max))),
    );

    let mut trace = None;
    let mut solver_gap = None;
    let mut z1 = Vec::new();
    let mut z2_perturbation = None;
    if let Some((p, sol)) = &duhamel {
        let ratios = sol.trace.ratios();
        let worst = ratios.iter().cloned().fold(0.0, f64::max);
        summary.check(
            "contraction",
            worst <= 0.5,
            format!("iterations = {}, max d_(m+1)/d_m = {}", sol.trace.distances.len(), fmt(worst)),
        );
        if cfg.output.trace {
            let mut t = Table::new("Duhamel iterate distances", &[("m", "iteration"), ("d_m", "Z2 norm"), ("ratio", "d_m/d_(m-1)")]);
            for (m, d) in sol.trace.distances.iter().enumerate() {
                let r = if m == 0 { f64::NAN } else { ratios[m - 1] };
                t.push(vec![m.into(), (*d).into(), r.into()]);
            }
            let path = out.join("trace.csv");
            t.write(&path)?;
            files.push(path);
        }
        let last = tg.times.len() - 1;
        if let Some(tr) = &imex {
            let gap = sol.state(p, last).h_total.sup_distance(&tr[last]);
            summary.check(
                "two-solver",
                gap <= 1e-3 * amplitude,
                format!("sup |duhamel - imex| at T = {} (limit {})", fmt(gap), fmt(1e-3 * amplitude)),
            );
            solver_gap = Some(gap);
        }
        // Z1 per centered component, including t = 0
        for j in 0..corners.len() {
            let mut traj = vec![(0.0, p.initial[j].clone())];
            traj.extend(snap_idx.iter().map(|&i| (tg.times[i], sol.components[i][j].clone())));
            z1.push(z1_norm(&traj, |_| 0.0));
        }
        let free = free_evolution_init(p)?;
        let pert: Vec<(f64, GridFunction)> = snap_idx
            .iter()
            .map(|&i| {
                let h = sol.state(p, i).h_total;
                let f = assemble(p, i, &free[i], 0).h_total;
                (tg.times[i], h.sub(&f))
            })
            .collect();
        let z2p = z2_norm(&pert);
        summary.check(
            "perturbation-z2",
            z2p.value() <= amplitude * amplitude,
            format!("Z2(h - free) / eps^2 = {}", fmt(z2p.value() / (amplitude * amplitude).max(1e-300))),
        );
        if cfg.output.snapshots {
            for (s, &i) in snap_idx.iter().enumerate() {
                let state = sol.state(p, i);
                let mut cols: Vec<(String, String)> = vec![("x".into(), "length".into()), ("h".into(), "slope".into())];
                if imex.is_some() {
                    cols.push(("h_imex".into(), "slope".into()));
                }
                for l in &cfg.labels {
                    cols.push((format!("g_{l}"), "slope (centered frame)".into()));
                }
                cols.push(("q".into(), "length".into()));
                let col_refs: Vec<(&str, &str)> = cols.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                let mut t = Table::new(format!("snapshot t = {:.9}", tg.times[i]), &col_refs);
                for k in 0..grid.n_points() {
                    let mut row: Vec<Cell> = vec![grid.x(k).into(), state.h_total.values()[k].into()];
                    if let Some(tr) = &imex {
                        row.push(tr[i].values()[k].into());
                    }
                    for g in &state.g_components {
                        row.push(g.values()[k].into());
                    }
                    row.push(p.qtab.q_values[i].values()[k].into());
                    t.push(row);
                }
                let path = out.join(format!("snapshot_{s:02}.csv"));
                t.write(&path)?;
                files.push(path);
            }
        }
        trace = Some(sol.trace.clone());
        z2_perturbation = Some(z2p);
    } else if let (Some(tr), true) = (&imex, cfg.output.snapshots) {
        for (s, &i) in snap_idx.iter().enumerate() {
            let mut t = Table::new(
                format!("snapshot t = {:.9}", tg.times[i]),
                &[("x", "length"), ("h", "slope"), ("q", "length")],
            );
            for k in 0..grid.n_points() {
                t.push(vec![grid.x(k).into(), tr[i].values()[k].into(), qtab.q_values[i].values()[k].into()]);
            }
            let path = out.join(format!("snapshot_{s:02}.csv"));
            t.write(&path)?;
            files.push(path);
        }
    }

    if cfg.output.norms {
        let mut t = Table::new(
            "discrete norm reports by snapshot and band",
            &[
                ("norm", "Z1_<corner> | Z2_perturbation | N_forcing"),
                ("t", "time"),
                ("k", "dyadic band index"),
                ("l2", "slope * length^(1/2)"),
                ("linf", "slope"),
                ("l2_weighted", "2^(k/2) w(2^k t) l2"),
                ("linf_weighted", "w(2^k t) linf"),
            ],
        );
        let mut push = |name: &str, r: &NormReport| {
            for e in &r.entries {
                t.push(vec![name.into(), e.t.into(), (e.k as i32).into(), e.l2.into(), e.linf.into(), e.l2_weighted.into(), e.linf_weighted.into()]);
            }
        };
        for (l, r) in cfg.labels.iter().zip(&z1) {
            push(&format!("Z1_{l}"), r);
        }
        if let Some(r) = &z2_perturbation {
            push("Z2_perturbation", r);
        }
        let forcing: Vec<(f64, GridFunction)> = h_snap
            .iter()
            .map(|(t, h)| Ok((*t, Nonlinearity::Taylor(cfg.solver.n_max).eval(h, &quad)?)))
            .collect::<Result<_>>()?;
        push("N_forcing", &n_norm(&forcing));
        let path = out.join("norms.csv");
        t.write(&path)?;
        files.push(path);
    }
    for (l, r) in cfg.labels.iter().zip(&z1) {
        summary.note(format!(
            "Z1 corner {l}: sup_k (2^k t)^(1/10) |P_k g|_inf / eps = {}, full discrete norm / eps = {}",
            fmt(r.sup_linf_weighted / amplitude.max(1e-300)),
            fmt(r.value() / amplitude.max(1e-300))
        ));
    }

    // corner tracking against the free evolution; needs a visible corner
    let mut track = None;
    let mut predicted = Vec::new();
    if amplitude > 0.0 && cfg.output.corners {
        let free_snap: Vec<(f64, GridFunction)> = h_snap
            .iter()
            .map(|(t, _)| Ok((*t, poisson_semigroup(&h0, *t)?)))
            .collect::<Result<_>>()?;
        let window = layout.plateau.iter().cloned().fold(f64::INFINITY, f64::min).min(2.0) / 2.0;
        // log-oscillating corners have no single slope extremum to follow
        let tracked: Vec<usize> = (0..corners.len())
            .filter(|&j| !matches!(corners[j].profile, Profile::LogOscillating { .. }))
            .collect();
        let locs: Vec<f64> = tracked.iter().map(|&j| corners[j].location).collect();
        let nl = track_corners(&h_snap, &locs, window).context("tracking nonlinear corners")?;
        let fr = track_corners(&free_snap, &locs, window).context("tracking free corners")?;
        let mut t = Table::new(
            "corner positions; displacement is nonlinear minus free track",
            &[
                ("corner", "label"),
                ("t", "time"),
                ("position", "length"),
                ("displacement", "length"),
                ("predicted", "length, q~(t, a)"),
            ],
        );
        let mut track_out = nl.clone();
        for (r, &j) in tracked.iter().enumerate() {
            let c = &corners[j];
            let delta: Vec<f64> = nl.displacement[r].iter().zip(&fr.displacement[r]).map(|(a, b)| a - b).collect();
            let pred: Vec<f64> = nl.times.iter().map(|&s| qtab.predicted_position(s, c.location) - c.location).collect();
            for (s, &ts) in nl.times.iter().enumerate() {
                t.push(vec![cfg.labels[j].as_str().into(), ts.into(), nl.positions[r][s].into(), delta[s].into(), pred[s].into()]);
            }
            if c.amplitude_left != c.amplitude_right {
                // q~ keeps only the diagonal terms, so the prediction is
                // checked for isolated corners and reported otherwise
                check_motion(&mut summary, &cfg.labels[j], &nl.times, &delta, &pred, corners.len() == 1);
            }
            track_out.displacement[r] = delta;
            predicted.push(pred);
        }
        let path = out.join("corners.csv");
        t.write(&path)?;
        files.push(path);
        track = Some(track_out);
    }

    self_similarity_checks(&mut summary, &corners, &cfg.labels, &h_snap, grid, amplitude);
    if let Some(r) = z1.first() {
        if amplitude > 0.0 {
            if let Ok(fit) = decay_fit(r) {
                summary.note(format!("pooled smoothing-side decay exponent = {}", fmt(fit.pooled)));
            }
        }
    }
    summary.write(out)?;
    files.push(out.join("summary.txt"));
    Ok(ExperimentOutcome {
        summary,
        epsilon,
        amplitude,
        trace,
        solver_gap,
        z1,
        z2_perturbation,
        track,
        predicted,
        files,
    })
}

/// Agreement of tracked and predicted displacement over `t in [0.01, 0.2]`
/// and the sign of the log law.
fn check_motion(summary: &mut Summary, label: &str, times: &[f64], delta: &[f64], pred: &[f64], enforce: bool) {
    let sel: Vec<usize> = (0..times.len()).filter(|&s| times[s] >= 0.01 - 1e-12 && times[s] <= 0.2 + 1e-12).collect();
    if sel.len() < 3 {
        summary.note(format!("corner {label}: fewer than 3 snapshots in [0.01, 0.2], motion not checked"));
        return;
    }
    let worst = sel
        .iter()
        .map(|&s| ((delta[s] - pred[s]) / pred[s]).abs())
        .fold(0.0, f64::max);
    let detail = format!("max |delta - predicted| / |predicted| = {}", fmt(worst));
    if enforce {
        summary.check(format!("corner-motion {label}"), worst <= 0.2, detail);
    } else {
        summary.note(format!("corner-motion {label} (diagonal q~ only, not checked): {detail}"));
    }
    let ts: Vec<f64> = sel.iter().map(|&s| times[s]).collect();
    let ds: Vec<f64> = sel.iter().map(|&s| delta[s]).collect();
    match log_law_fit(&ts, &ds) {
        Ok(fit) => summary.check(
            format!("log-law {label}"),
            fit.slope > 0.0 && fit.r_squared >= 0.9,
            format!("|delta|/t vs log(2/t): slope = {}, R^2 = {:.4}", fmt(fit.slope), fit.r_squared),
        ),
        Err(e) => summary.check(format!("log-law {label}"), false, e.to_string()),
    }
}

/// Rescaled-profile collapse for sharp symmetric corners and the discrete
/// self-similarity signature for log-oscillating ones.
fn self_similarity_checks(
    summary: &mut Summary,
    corners: &[CornerSpec],
    labels: &[String],
    h_snap: &[(f64, GridFunction)],
    grid: Grid,
    amplitude: f64,
) {
    if amplitude == 0.0 {
        return;
    }
    let y_max = 4.0;
    for (c, label) in corners.iter().zip(labels) {
        let eps = c.max_amplitude();
        match c.profile {
            Profile::SharpSign if c.amplitude_left == c.amplitude_right => {
                // profiles narrower than three cells are not resolved
                let resolved: Vec<(f64, GridFunction)> =
                    h_snap.iter().filter(|(t, _)| *t >= 3.0 * grid.spacing()).cloned().collect();
                if resolved.len() >= 3 {
                    let m = self_similar_collapse(&resolved, c.location, eps, y_max);
                    summary.check(
                        format!("collapse {label}"),
                        m <= 0.05,
                        format!("rescaled mismatch / eps = {} over {} snapshots", fmt(m), resolved.len()),
                    );
                }
            }
            Profile::LogOscillating { scale } => {
                let mut related = Vec::new();
                let mut generic = Vec::new();
                for (i, (t1, h1)) in h_snap.iter().enumerate() {
                    for (t2, h2) in &h_snap[i + 1..] {
                        let r = t2 / t1;
                        let m = pair_mismatch((*t1, h1), (*t2, h2), c.location, eps, y_max);
                        if (r - scale).abs() < 1e-9 * scale {
                            related.push(m);
                        } else if (r - scale.sqrt()).abs() < 1e-9 * scale {
                            generic.push(m);
                        }
                    }
                }
                if !related.is_empty() && !generic.is_empty() {
                    let worst_related = related.iter().cloned().fold(0.0, f64::max);
                    let best_generic = generic.iter().cloned().fold(f64::INFINITY, f64::min);
                    summary.check(
                        format!("discrete-self-similar {label}"),
                        best_generic >= 3.0 * worst_related,
                        format!(
                            "related pairs max {} vs generic pairs min {}",
                            fmt(worst_related),
                            fmt(best_generic)
                        ),
                    );
                }
            }
            _ => {}
        }
    }
}

pub fn verify_kernels(out: &Path, ov: &Overrides) -> Result<Summary> {
    let seed = ov.seed.unwrap_or(ExperimentConfig::default().seed);
    let table = KernelTable::global();
    let k_list: Vec<i32> = (0..6).collect();
    let scales: Vec<f64> = (-4..4).map(|e| 2f64.powi(e)).collect();
    let report = verify_kernel_lemma(table, &k_list, &scales).context("kernel lemmas")?;
    let (comp_rows, comp, ests) = verify_composite_lemma(table, 0, &[0, 2, 4, 6], 2000, seed).context("composite kernel")?;

    let mut t = Table::new(
        "kernel L1 norms against the lemma bounds",
        &[
            ("lemma_id", "kernel"),
            ("k1", "dyadic index"),
            ("k2", "dyadic index (composite)"),
            ("k3", "dyadic index (composite)"),
            ("alpha_scale", "2^k |alpha|"),
            ("measured", "L1 norm"),
            ("bound_rhs", "bound without constant"),
            ("ratio", "measured / bound_rhs"),
        ],
    );
    let opt = |v: Option<i32>| -> Cell { v.map_or(Cell::S(String::new()), |k| k.into()) };
    for r in report.rows.iter().chain(&comp_rows) {
        t.push(vec![r.lemma_id.as_str().into(), r.k1.into(), opt(r.k2), opt(r.k3), r.alpha_scale.into(), r.measured.into(), r.bound_rhs.into(), r.ratio.into()]);
    }
    t.write(&out.join("kernels.csv"))?;

    let mut summary = Summary::default();
    summary.note("preset verify-kernels");
    summary.note(format!("monte carlo seed = {seed}, samples = 2000"));
    summary.note(format!("kernel table refinement change = {}", fmt(table.refinement_change)));
    for s in &report.summaries {
        summary.check(
            format!("kernel-lemma {}", s.lemma_id),
            s.spread_of_constants <= 2.0 && s.max_ratio.is_finite(),
            format!("max ratio = {}, spread over k = {:.4}", fmt(s.max_ratio), s.spread_of_constants),
        );
    }
    summary.check(
        "kernel-lemma composite",
        comp.spread_of_constants <= 3.0,
        format!("ratios spread over k1 - k2 in {{0,2,4,6}} = {:.4}", comp.spread_of_constants),
    );
    let worst_sigma = ests
        .iter()
        .map(|e| (e.monte_carlo - e.factorized).abs() / e.std_error.max(1e-300))
        .fold(0.0, f64::max);
    summary.check(
        "composite monte-carlo agreement",
        worst_sigma <= 3.0,
        format!("max |mc - factorized| / std_error = {worst_sigma:.3}"),
    );
    summary.write(out)?;
    Ok(summary)
}

pub fn verify_velocity(out: &Path, ov: &Overrides) -> Result<Summary> {
    let n = ov.n_points.unwrap_or(1024);
    let eps = ov.epsilon.unwrap_or(0.05);
    let grid = Grid::new(n, 16.0)?;
    let params = VelocityParams::for_grid(grid);
    let zero = GridFunction::zeros(grid);
    let times: Vec<f64> = (3..=12).map(|j| 2f64.powi(-j)).collect();
    let ys = [-0.5, -0.125, 0.0, 0.125, 0.5];
    let mut summary = Summary::default();
    summary.note("preset verify-velocity");
    summary.note(format!("n_points = {n}, epsilon = {eps}, V1 cutoff = {}", params.cutoff));

    let mut t = Table::new(
        "velocity fields at an asymmetric corner (eps/2 left, eps right), corner at 0",
        &[("t", "time"), ("y", "length"), ("V", "length/time"), ("V1", "length/time"), ("V2", "length/time"), ("bound_rhs", "eps^2 log(2/t)")],
    );
    let asym = CornerSpec::asymmetric(8.0, eps / 2.0, eps);
    let g0 = crate::initial_data::center_component(&build_components(&[asym], grid)?[0], 8.0);
    for &s in &times {
        let g = poisson_semigroup(&g0, s)?;
        for &y in &ys {
            let v = velocity_v(&[&g, &g], &[0.0, 0.0], &zero, s, y, params)?;
            let v1 = velocity_v1_core(&[&g, &g], &[0.0, 0.0], s, y, params)?;
            t.push(vec![s.into(), y.into(), v.into(), v1.into(), (v - v1).into(), (eps * eps * (2.0 / s).ln()).into()]);
        }
    }
    t.write(&out.join("velocity.csv"))?;

    let sym = CornerSpec::symmetric(8.0, eps);
    let gs0 = crate::initial_data::center_component(&build_components(&[sym], grid)?[0], 8.0);
    let mut worst = 0.0f64;
    for &s in &times {
        let g = poisson_semigroup(&gs0, s)?;
        for &y in &ys {
            worst = worst.max(velocity_v1_core(&[&g, &g], &[0.0, 0.0], s, y, params)?.abs());
        }
    }
    summary.check(
        "symmetric-cancellation",
        worst <= 1e-8 * eps * eps,
        format!("max |V1| = {} (limit {})", fmt(worst), fmt(1e-8 * eps * eps)),
    );

    let qt_times: Vec<f64> = (0..=20).map(|i| 0.0125 * i as f64).collect();
    let mut qt = Table::new(
        "max |q~(t)| for the asymmetric corner",
        &[("epsilon", "slope"), ("t", "time"), ("max_qtilde", "length"), ("C", "max_qtilde / (eps^2 t log(2/t))")],
    );
    let eps_list = [eps / 4.0, eps / 2.0, eps];
    let mut maxima = Vec::new();
    let mut constants = Vec::new();
    for &e in &eps_list {
        let c = CornerSpec::asymmetric(8.0, e / 2.0, e);
        let comps = build_components(&[c], grid)?;
        let tab = qtilde_from_free_evolution(&comps, &[c], &qt_times, params)?;
        let mut cmax = 0.0f64;
        for (i, &s) in qt_times.iter().enumerate().skip(1) {
            let m = tab.qtilde_values[i].max_abs();
            let cc = m / (e * e * s * (2.0 / s).ln());
            cmax = cmax.max(cc);
            qt.push(vec![e.into(), s.into(), m.into(), cc.into()]);
        }
        maxima.push(tab.qtilde_values.last().map_or(0.0, |q| q.max_abs()));
        constants.push(cmax);
    }
    qt.write(&out.join("qtilde.csv"))?;
    let halving: Vec<f64> = maxima.windows(2).map(|w| w[1] / w[0]).collect();
    summary.check(
        "qtilde-scaling",
        halving.iter().all(|r| (r / 4.0 - 1.0).abs() <= 0.25),
        format!("max |q~| ratio per eps doubling = {:?}", halving.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()),
    );
    let cmin = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let cmax = constants.iter().cloned().fold(0.0, f64::max);
    summary.check(
        "qtilde-constant",
        cmax <= 1.2 * cmin,
        format!("C = {:?}", constants.iter().map(|c| fmt(*c)).collect::<Vec<_>>()),
    );
    summary.write(out)?;
    Ok(summary)
}

/// Duhamel run at `n` and `2n`: Z1 band constant, perturbation Z2 constant
/// and the divergence of the free evolution in Z2.
pub fn verify_norms(out: &Path, ov: &Overrides) -> Result<Summary> {
    let n = ov.n_points.unwrap_or(1024);
    let eps = ov.epsilon.unwrap_or(0.05);
    let mut summary = Summary::default();
    summary.note("preset verify-norms");
    summary.note(format!("asymmetric corner (eps/2, eps), eps = {eps}, n_points = {n} and {}", 2 * n));
    let mut z1c = Vec::new();
    let mut z2c = Vec::new();
    let mut free_slope = 0.0;
    let mut pooled = f64::NAN;
    for (r, &np) in [n, 2 * n].iter().enumerate() {
        let mut cfg = ExperimentConfig::default();
        cfg.n_points = np;
        cfg.add_corner("a", CornerSpec::asymmetric(8.0, eps / 2.0, eps));
        cfg.snapshots = vec![0.0125, 0.025, 0.05, 0.1, 0.2];
        cfg.solver.t_end = 0.2;
        cfg.solver.method = Method::Duhamel;
        cfg.output.snapshots = false;
        cfg.output.corners = false;
        let sub = out.join(format!("n{np}"));
        let o = run_experiment(&cfg, &sub).with_context(|| format!("run at n_points = {np}"))?;
        z1c.push(o.z1[0].sup_linf_weighted / eps);
        z2c.push(o.z2_perturbation.as_ref().map_or(0.0, |z| z.value()) / (eps * eps));
        if r == 0 {
            let grid = cfg.grid()?;
            let h0 = build_components(&cfg.corners, grid)?.remove(0);
            let free: Vec<(f64, GridFunction)> = cfg
                .snapshots
                .iter()
                .map(|&t| Ok((t, poisson_semigroup(&h0, t)?)))
                .collect::<Result<_>>()?;
            let rep = z2_norm(&free);
            let pts: Vec<(f64, f64)> = cfg.snapshots.iter().map(|&t| (t.ln(), rep.l2_sup_at(t).ln())).collect();
            free_slope = slope(&pts);
            if let Ok(fit) = decay_fit(&o.z1[0]) {
                pooled = fit.pooled;
            }
        }
    }
    let stable = |v: &[f64]| (v[1] / v[0] - 1.0).abs() <= 0.1;
    summary.check(
        "z1-desingularization",
        stable(&z1c),
        format!("C = sup (2^k t)^(1/10) |P_k h|_inf / eps: {} -> {}", fmt(z1c[0]), fmt(z1c[1])),
    );
    summary.check(
        "z2-perturbation",
        stable(&z2c),
        format!("C = Z2(h - free) / eps^2: {} -> {}", fmt(z2c[0]), fmt(z2c[1])),
    );
    summary.check(
        "z2-free-diverges",
        free_slope < -0.05,
        format!("log-log slope of Z2(free)(t) as t -> 0 = {free_slope:.4}"),
    );
    summary.check(
        "decay-exponent",
        pooled <= -0.1,
        format!("pooled smoothing-side exponent = {pooled:.4}"),
    );
    summary.write(out)?;
    Ok(summary)
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Four fixed Duhamel sweeps (three ratios) at `eps` and `eps/2`. Later
/// sweeps reach the round-off floor of the iterate distance.
pub fn contraction_study(out: &Path, ov: &Overrides) -> Result<Summary> {
    let eps = ov.epsilon.unwrap_or(0.05);
    let mut summary = Summary::default();
    summary.note("preset contraction-study");
    let mut t = Table::new(
        "Duhamel iterate distances per epsilon",
        &[("epsilon", "slope"), ("m", "iteration"), ("d_m", "Z2 norm"), ("ratio", "d_m/d_(m-1)")],
    );
    let mut worst = Vec::new();
    for (e, limit) in [(eps, 0.5), (eps / 2.0, 0.25)] {
        let mut cfg = ExperimentConfig::default();
        if let Some(n) = ov.n_points {
            cfg.n_points = n;
        }
        cfg.add_corner("a", CornerSpec::asymmetric(8.0, e / 2.0, e));
        cfg.solver.method = Method::Duhamel;
        cfg.solver.fixed_iterations = Some(4);
        cfg.output = crate::config::OutputSettings {
            snapshots: false,
            norms: false,
            corners: false,
            ..Default::default()
        };
        let o = run_experiment(&cfg, &out.join(format!("eps{e}"))).with_context(|| format!("eps = {e}"))?;
        let trace = o.trace.unwrap_or_default();
        let ratios = trace.ratios();
        for (m, d) in trace.distances.iter().enumerate() {
            let r = if m == 0 { f64::NAN } else { ratios[m - 1] };
            t.push(vec![e.into(), m.into(), (*d).into(), r.into()]);
        }
        let w = ratios.iter().cloned().fold(0.0, f64::max);
        summary.check(
            format!("contraction eps={e}"),
            ratios.len() >= 3 && w <= limit,
            format!("{} ratios, max = {} (limit {limit})", ratios.len(), fmt(w)),
        );
        worst.push(w);
    }
    summary.check(
        "contraction improves with eps",
        worst[1] < worst[0],
        format!("max ratio {} at eps, {} at eps/2", fmt(worst[0]), fmt(worst[1])),
    );
    t.write(&out.join("trace.csv"))?;
    summary.write(out)?;
    Ok(summary)
}

/// Loads a config file, applies overrides and runs it.
pub fn run_config_file(path: &Path, out: Option<&Path>, ov: &Overrides) -> Result<ExperimentOutcome> {
    let mut cfg = crate::config::parse_config(path)?;
    ov.apply(&mut cfg);
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    run_experiment(&cfg, &dir)
}

/// Correction table for the given corners on `times`, with default velocity
/// parameters; convenience for examples.
pub fn correction_for(corners: &[CornerSpec], grid: Grid, times: &[f64]) -> Result<CorrectionTable> {
    let comps = build_components(corners, grid)?;
    qtilde_from_free_evolution(&comps, corners, times, VelocityParams::for_grid(grid))
}
