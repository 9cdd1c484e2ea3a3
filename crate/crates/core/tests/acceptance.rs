//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary
//! (`harness = false`) and exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use muskat::config::{ExperimentConfig, Method, OutputSettings};
use muskat::corner::{velocity_v1_core, VelocityParams};
use muskat::diagnostics::{pair_mismatch, self_similar_collapse, z2_norm};
use muskat::initial_data::{build_components, center_component, superpose, CornerSpec, Profile};
use muskat::kernels::{verify_composite_lemma, verify_kernel_lemma, KernelTable};
use muskat::output::read_csv;
use muskat::presets::{correction_for, preset_config, run_experiment, ExperimentOutcome};
use muskat::pseudoproduct::{all_triples, band_triples, interaction_split, SlotRoute};
use muskat::rhs::{full_nonlinearity, taylor_sum, taylor_term, AlphaQuadrature};
use muskat::spectral::{
    abs_gradient, derivative, lp_decompose, poisson_semigroup, DyadicBand, Grid, GridFunction,
};
use muskat::Result;

type Outcome = Result<(bool, String)>;

fn ratio_spread(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(0.0, f64::max);
    hi / lo
}

fn trig_data(grid: Grid) -> GridFunction {
    GridFunction::from_fn(grid, |x| {
        (1..200)
            .map(|m| {
                let xi = grid.frequency(m * 7 % 2000 + 1);
                ((m as f64).sin() * (xi * x).cos() + (m as f64 * 0.3).cos() * (xi * x).sin()) / m as f64
            })
            .sum()
    })
}

fn c01_spectral() -> Outcome {
    let grid = Grid::new(4096, 16.0)?;
    let n = grid.n_points();
    let xi_max = grid.frequency(n / 2);
    // residuals are scaled by the largest symbol on the grid: FFT round-off in
    // the empty modes is multiplied by up to |xi_max| before it lands on the output
    let mut worst_mode = 0.0f64;
    let mut worst_raw = 0.0f64;
    for m in [1usize, 3, 64, 1000, 2047] {
        let xi = grid.frequency(m);
        let phase = |i: usize| 2.0 * PI * ((m * i) % n) as f64 / n as f64;
        let c = GridFunction::new(grid, (0..n).map(|i| phase(i).cos()).collect())?;
        let s = GridFunction::new(grid, (0..n).map(|i| phase(i).sin()).collect())?;
        let want = c.scale(xi);
        for got in [derivative(&s), abs_gradient(&c)] {
            let d = got.sup_distance(&want);
            worst_mode = worst_mode.max(d / xi_max);
            worst_raw = worst_raw.max(d / want.max_abs());
        }
        for t in [0.001, 0.01] {
            let d = poisson_semigroup(&c, t)?.sup_distance(&c.scale((-xi * t).exp()));
            worst_mode = worst_mode.max(d);
            worst_raw = worst_raw.max(d / (-xi * t).exp());
        }
    }
    let f = trig_data(grid).add(&GridFunction::constant(grid, 0.4));
    let mut sum = GridFunction::constant(grid, f.mean());
    for (_, p) in lp_decompose(&f) {
        sum.axpy(1.0, &p);
    }
    let part = sum.sup_distance(&f) / f.max_abs();
    Ok((
        worst_mode <= 1e-12 && part <= 1e-10,
        format!(
            "eigenmode err / (max symbol |f|) {worst_mode:.2e} (limit 1e-12; per-mode relative {worst_raw:.2e}), partition rel err {part:.2e} (limit 1e-10)"
        ),
    ))
}

/// Dense convolution with `P_t(x) = (1/L) sinh(c) / (cosh(c) - cos(2 pi x / L))`, `c = 2 pi t / L`.
fn c02_free_evolution() -> Outcome {
    let grid = Grid::new(4096, 16.0)?;
    let n = grid.n_points();
    let l = grid.period();
    let h0 = superpose(&[CornerSpec::asymmetric(8.0, 0.025, 0.05)], grid)?;
    let mut worst = 0.0f64;
    for t in [0.05, 0.1, 0.5] {
        let c = 2.0 * PI * t / l;
        let kernel: Vec<f64> = (0..n)
            .map(|j| c.sinh() / (l * (c.cosh() - (2.0 * PI * j as f64 / n as f64).cos())))
            .collect();
        let v = h0.values();
        let dense: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| kernel[(i + n - j) % n] * v[j]).sum::<f64>() * grid.spacing())
            .collect();
        let dense = GridFunction::new(grid, dense)?;
        let spec = poisson_semigroup(&h0, t)?;
        worst = worst.max(spec.sup_distance(&dense) / dense.max_abs());
    }
    Ok((worst < 1e-6, format!("sup rel err vs dense periodized kernel = {worst:.2e} (limit 1e-6)")))
}

fn c03_steady() -> Outcome {
    let grid = Grid::new(1024, 16.0)?;
    let q = AlphaQuadrature::standard(grid);
    let worst = [0.0, 0.3, -1.7]
        .iter()
        .map(|&c| full_nonlinearity(&GridFunction::constant(grid, c), &q).map(|n| n.max_abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok((worst < 1e-10, format!("max |N(const)| = {worst:.2e} (limit 1e-10)")))
}

fn c04_kernels() -> Outcome {
    let table = KernelTable::global();
    let ks: Vec<i32> = (0..6).collect();
    let scales: Vec<f64> = (-4..4).map(|e| 2f64.powi(e)).collect();
    let report = verify_kernel_lemma(table, &ks, &scales)?;
    let mut pass = true;
    let mut detail = Vec::new();
    for id in ["L_k", "L_tilde_k"] {
        // max ratio over the alpha scales, per k
        let per_k: Vec<f64> = ks
            .iter()
            .map(|&k| {
                report
                    .rows
                    .iter()
                    .filter(|r| r.lemma_id == id && r.k1 == k)
                    .map(|r| r.ratio)
                    .fold(0.0, f64::max)
            })
            .collect();
        let s = ratio_spread(&per_k);
        pass &= s <= 2.0;
        detail.push(format!("{id} spread {s:.3}"));
    }
    let (_, comp, _) = verify_composite_lemma(table, 0, &[0, 2, 4, 6], 2000, 20240611)?;
    pass &= comp.spread_of_constants <= 3.0;
    detail.push(format!("composite spread {:.3} (limits 2, 2, 3)", comp.spread_of_constants));
    Ok((pass, detail.join(", ")))
}

fn c05_pseudoproduct() -> Outcome {
    let grid = Grid::new(1024, 16.0)?;
    let q = AlphaQuadrature::standard(grid);
    let h0 = superpose(&[CornerSpec::asymmetric(8.0, 0.025, 0.05)], grid)?;
    let h = poisson_semigroup(&h0, 0.05)?;
    let h = h.map(|v| v - h.mean());
    let table = KernelTable::global();
    let n1 = taylor_term(&h, &h, 1, &q)?;
    let bt = band_triples(&h, &h, &h, &all_triples(grid), table, &q, SlotRoute::Kernel)?;
    let err = bt.total(grid).sup_distance(&n1) / n1.max_abs();
    let s = interaction_split(&h, &h, &h, DyadicBand::new(5), table, &q)?;
    let split = s.low_high.add(&s.high_high).sup_distance(&s.full) / s.full.max_abs();
    Ok((
        err < 1e-3 && split <= 1e-10,
        format!("band-triple sum vs N1 rel err {err:.2e} (limit 1e-3), split identity {split:.2e} (limit 1e-10)"),
    ))
}

fn c06_symmetric_cancellation() -> Outcome {
    let grid = Grid::new(1024, 16.0)?;
    let eps = 0.05;
    let params = VelocityParams::for_grid(grid);
    let g0 = center_component(&build_components(&[CornerSpec::symmetric(8.0, eps)], grid)?[0], 8.0);
    let mut worst = 0.0f64;
    for j in 3..=12 {
        let t = 2f64.powi(-j);
        let g = poisson_semigroup(&g0, t)?;
        for y in [-0.5, -0.125, 0.0, 0.125, 0.5] {
            worst = worst.max(velocity_v1_core(&[&g, &g], &[0.0, 0.0], t, y, params)?.abs());
        }
    }
    let limit = 1e-8 * eps * eps;
    Ok((worst <= limit, format!("max |V1| = {worst:.2e} (limit {limit:.2e})")))
}

fn c07_correction_bounds() -> Outcome {
    let grid = Grid::new(1024, 16.0)?;
    let times: Vec<f64> = (0..=20).map(|i| 0.0125 * i as f64).collect();
    let mut maxima = Vec::new();
    let mut constants = Vec::new();
    for eps in [0.0125, 0.025, 0.05] {
        let tab = correction_for(&[CornerSpec::asymmetric(8.0, eps / 2.0, eps)], grid, &times)?;
        let mut c = 0.0f64;
        for (i, &t) in times.iter().enumerate().skip(1) {
            c = c.max(tab.qtilde_values[i].max_abs() / (eps * eps * t * (2.0 / t).ln()));
        }
        constants.push(c);
        maxima.push(tab.qtilde_values.iter().map(|q| q.max_abs()).fold(0.0, f64::max));
    }
    let mean = constants.iter().sum::<f64>() / 3.0;
    let c_ok = constants.iter().all(|c| (c / mean - 1.0).abs() <= 0.2);
    let halving: Vec<f64> = maxima.windows(2).map(|w| w[1] / w[0]).collect();
    let h_ok = halving.iter().all(|r| (r / 4.0 - 1.0).abs() <= 0.25);
    Ok((
        c_ok && h_ok,
        format!(
            "C = [{}] (within 20% of mean), max|q~| ratio per eps doubling = [{}] (4 within 25%)",
            constants.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>().join(", "),
            halving.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn c08_corner_motion(out: &Path) -> Outcome {
    let mut cfg = preset_config("single-asymmetric")?;
    cfg.n_points = 4096;
    cfg.epsilon = Some(0.05);
    cfg.solver.method = Method::Imex;
    cfg.solver.t_end = 0.2;
    cfg.solver.dt_factor = 0.005 / cfg.grid()?.spacing();
    let o = run_experiment(&cfg, &out.join("c08"))?;
    let track = o.track.as_ref().expect("corner track");
    let (times, delta, pred) = (&track.times, &track.displacement[0], &o.predicted[0]);
    let sel: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= 0.01 - 1e-12 && times[i] <= 0.2 + 1e-12).collect();
    let worst = sel.iter().map(|&i| ((delta[i] - pred[i]) / pred[i]).abs()).fold(0.0, f64::max);
    // |delta|/t against log(2/t)
    let pts: Vec<(f64, f64)> = sel.iter().map(|&i| ((2.0 / times[i]).ln(), delta[i].abs() / times[i])).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    Ok((
        worst <= 0.2 && slope > 0.0 && r2 >= 0.9 && sel.len() >= 3,
        format!(
            "{} snapshots, max |delta - pred|/|pred| = {worst:.3} (limit 0.2), log-law slope {slope:.3e}, R^2 = {r2:.4} (>= 0.9)",
            sel.len()
        ),
    ))
}

fn duhamel_only(n: usize, eps: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.n_points = n;
    cfg.add_corner("a", CornerSpec::asymmetric(8.0, eps / 2.0, eps));
    cfg.snapshots = vec![0.0125, 0.025, 0.05, 0.1, 0.2];
    cfg.solver.t_end = 0.2;
    cfg.solver.method = Method::Duhamel;
    cfg.output = OutputSettings {
        snapshots: false,
        corners: false,
        ..Default::default()
    };
    cfg
}

fn c09_contraction(out: &Path) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (eps, limit) in [(0.05, 0.5), (0.025, 0.25)] {
        let mut cfg = duhamel_only(1024, eps);
        cfg.solver.fixed_iterations = Some(4);
        cfg.output.norms = false;
        let o = run_experiment(&cfg, &out.join(format!("c09_{eps}")))?;
        let ratios = o.trace.unwrap_or_default().ratios();
        let w = ratios.iter().cloned().fold(0.0, f64::max);
        pass &= ratios.len() >= 3 && w <= limit;
        parts.push(format!("eps {eps}: {} ratios, max {w:.2e} (limit {limit})", ratios.len()));
    }
    Ok((pass, parts.join("; ")))
}

fn load_snapshots(dir: &Path, times: &[f64], grid: Grid, column: &str) -> Result<Vec<(f64, GridFunction)>> {
    times
        .iter()
        .enumerate()
        .map(|(s, &t)| {
            let (header, rows) = read_csv(&dir.join(format!("snapshot_{s:02}.csv")))?;
            let c = header.iter().position(|h| h == column).expect("column");
            let v: Vec<f64> = rows.iter().map(|r| r[c].parse().expect("number")).collect();
            Ok((t, GridFunction::new(grid, v)?))
        })
        .collect()
}

fn c10_two_solver(sym: &ExperimentOutcome) -> Outcome {
    let gap = sym.solver_gap.expect("both solvers ran");
    let limit = 1e-3 * sym.amplitude;
    Ok((gap <= limit, format!("sup |duhamel - imex| at T = 0.25: {gap:.2e} (limit {limit:.2e})")))
}

fn c11_c12_norms(out: &Path) -> Result<((bool, String), (bool, String))> {
    let eps = 0.05;
    let mut z1 = Vec::new();
    let mut z2 = Vec::new();
    for n in [1024, 2048] {
        let o = run_experiment(&duhamel_only(n, eps), &out.join(format!("c11_{n}")))?;
        z1.push(o.z1[0].sup_linf_weighted / eps);
        z2.push(o.z2_perturbation.expect("duhamel ran").value() / (eps * eps));
    }
    let grid = Grid::new(1024, 16.0)?;
    let h0 = superpose(&[CornerSpec::asymmetric(8.0, eps / 2.0, eps)], grid)?;
    let ts = [0.0015625, 0.003125, 0.00625, 0.0125, 0.025, 0.05];
    let free: Vec<(f64, GridFunction)> = ts.iter().map(|&t| Ok((t, poisson_semigroup(&h0, t)?))).collect::<Result<_>>()?;
    let rep = z2_norm(&free);
    let (a, b) = (rep.l2_sup_at(ts[0]), rep.l2_sup_at(ts[5]));
    let growth = a / b;
    let d1 = (z1[1] / z1[0] - 1.0).abs();
    let d2 = (z2[1] / z2[0] - 1.0).abs();
    Ok((
        (d1 <= 0.1, format!("C = {:.4} -> {:.4} under grid doubling ({:.1}%, limit 10%)", z1[0], z1[1], 100.0 * d1)),
        (
            d2 <= 0.1 && z2[1] <= 1.0 && growth > 1.0,
            format!(
                "Z2(h - free)/eps^2 = {:.4e} -> {:.4e} ({:.1}%), free Z2 grows {growth:.2}x as t: 0.05 -> 0.0016",
                z2[0],
                z2[1],
                100.0 * d2
            ),
        ),
    ))
}

fn c13_self_similar(sym_dir: &Path, out: &Path) -> Outcome {
    let grid = Grid::new(1024, 16.0)?;
    let cfg = preset_config("single-symmetric")?;
    let snaps = load_snapshots(sym_dir, &cfg.snapshots, grid, "h")?;
    let chosen: Vec<(f64, GridFunction)> = snaps
        .into_iter()
        .filter(|(t, _)| [0.05, 0.1, 0.2].iter().any(|s| (s - t).abs() < 1e-12))
        .collect();
    let eps = 0.05;
    let collapse = self_similar_collapse(&chosen, 8.0, eps, 4.0);

    let mut lcfg = preset_config("log-self-similar")?;
    lcfg.epsilon = Some(eps);
    let dir = out.join("c13_log");
    let o = run_experiment(&lcfg, &dir)?;
    let lgrid = lcfg.grid()?;
    let lsnaps = load_snapshots(&dir, &lcfg.snapshots, lgrid, "h")?;
    let scale = match lcfg.corners[0].profile {
        Profile::LogOscillating { scale } => scale,
        _ => unreachable!(),
    };
    let amp = o.amplitude;
    let (mut related, mut generic) = (0.0f64, f64::INFINITY);
    for i in 0..lsnaps.len() {
        for j in i + 1..lsnaps.len() {
            let r = lsnaps[j].0 / lsnaps[i].0;
            let m = pair_mismatch((lsnaps[i].0, &lsnaps[i].1), (lsnaps[j].0, &lsnaps[j].1), 8.0, amp, 4.0);
            if (r - scale).abs() < 1e-9 {
                related = related.max(m);
            } else if (r - scale.sqrt()).abs() < 1e-9 {
                generic = generic.min(m);
            }
        }
    }
    Ok((
        collapse <= 0.05 && generic >= 3.0 * related,
        format!(
            "symmetric collapse {collapse:.2e} (limit 0.05); log data: related pairs max {related:.3e}, generic min {generic:.3e} ({:.1}x, need 3x)",
            generic / related
        ),
    ))
}

fn c14_taylor() -> Outcome {
    let grid = Grid::new(1024, 16.0)?;
    let q = AlphaQuadrature::standard(grid);
    let mut ratios = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let h0 = superpose(&[CornerSpec::asymmetric(8.0, eps / 2.0, eps)], grid)?;
        let h = poisson_semigroup(&h0, 0.05)?;
        let h = h.map(|v| v - h.mean());
        let n = full_nonlinearity(&h, &q)?;
        let n12 = taylor_sum(&h, &h, &[1, 2], &q)?;
        let n1 = taylor_term(&h, &h, 1, &q)?;
        ratios.push(n.sub(&n12).max_abs() / n1.max_abs());
    }
    let drops: Vec<f64> = ratios.windows(2).map(|w| w[0] / w[1]).collect();
    Ok((
        drops.iter().all(|d| (8.0..=32.0).contains(d)),
        format!(
            "ratio at eps 0.1/0.05/0.025 = {:.2e}/{:.2e}/{:.2e}, drop per halving = {:.2}, {:.2} (16 within 2x)",
            ratios[0], ratios[1], ratios[2], drops[0], drops[1]
        ),
    ))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let out = tmp.path();
    let mut failed = 0;
    let mut report = |id: u32, name: &str, started: Instant, r: Outcome| {
        let (pass, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            failed += 1;
        }
        println!(
            "{} {id:02} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    };
    let t = Instant::now();
    report(1, "spectral-exactness", t, c01_spectral());
    let t = Instant::now();
    report(2, "free-evolution-oracle", t, c02_free_evolution());
    let t = Instant::now();
    report(3, "steady-state", t, c03_steady());
    let t = Instant::now();
    report(4, "kernel-lemmas", t, c04_kernels());
    let t = Instant::now();
    report(5, "pseudoproduct-equivalence", t, c05_pseudoproduct());
    let t = Instant::now();
    report(6, "symmetry-cancellation", t, c06_symmetric_cancellation());
    let t = Instant::now();
    report(7, "correction-bounds", t, c07_correction_bounds());
    let t = Instant::now();
    report(8, "corner-motion", t, c08_corner_motion(out));
    let t = Instant::now();
    report(9, "fixed-point-contraction", t, c09_contraction(out));

    let t = Instant::now();
    let sym_dir = out.join("sym");
    let sym = preset_config("single-symmetric").and_then(|cfg| run_experiment(&cfg, &sym_dir));
    match &sym {
        Ok(o) => report(10, "two-solver-agreement", t, c10_two_solver(o)),
        Err(e) => report(10, "two-solver-agreement", t, Ok((false, format!("error: {e}")))),
    }
    let t = Instant::now();
    match c11_c12_norms(out) {
        Ok((a, b)) => {
            report(11, "desingularization", t, Ok(a));
            report(12, "perturbation-structure", t, Ok(b));
        }
        Err(e) => {
            let msg = format!("error: {e}");
            report(11, "desingularization", t, Ok((false, msg.clone())));
            report(12, "perturbation-structure", t, Ok((false, msg)));
        }
    }
    let t = Instant::now();
    report(13, "self-similar-collapse", t, c13_self_similar(&sym_dir, out));
    let t = Instant::now();
    report(14, "taylor-truncation", t, c14_taylor());

    println!("{} of 14 criteria passed", 14 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
