use biphoton::schmidt::decompose_with;
use biphoton::sweep::{
    fit_scaling, maximize_entropy, run_sweep, saturation, separation_threshold, Optimum, OptimizeSpec, SaturationReport,
    ScalingPoint,
};
use biphoton::timedomain::{dominant_period, time_modes, TimeWindow};
use biphoton::verify::run_verification;
use biphoton::{build_joint_spectrum, Error, Family, ScalingFit, SweepRow, SweepSpec, VerifyReport};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::export::{self, DecomposeReport, Output};
use crate::svg::{self, Series};

fn decomposition(cfg: &RunConfig) -> Result<(usize, biphoton::SchmidtResult), CliError> {
    let params = cfg.params()?;
    let mp = cfg.multiplex()?;
    let grid = cfg.grid.build()?;
    let js = build_joint_spectrum(&params, &mp, &grid, &grid, true)?;
    Ok((mp.n_mp(), decompose_with(&js, cfg.rank, cfg.pair_tol)?))
}

pub fn spectrum(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let params = cfg.params()?;
    let mp = cfg.multiplex()?;
    let grid = cfg.grid.build()?;
    let js = build_joint_spectrum(&params, &mp, &grid, &grid, true)?;
    out.write_with("spectrum.csv", |w| export::write_spectrum(w, &js))?;
    if cfg.plot {
        let doc = svg::heatmap(
            &js.intensity(),
            (grid.lo(), grid.hi()),
            (grid.lo(), grid.hi()),
            "|f|^2",
            "signal detuning",
            "idler detuning",
        );
        out.write_with("spectrum.svg", |w| w.write_all(doc.as_bytes()))?;
    }
    Ok(())
}

pub fn decompose(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let (n_mp, r) = decomposition(cfg)?;
    log::info!("S = {} bits, K = {}, {} pairs", r.entropy_bits, r.schmidt_number, r.pairs.len());
    out.write_json("decompose.json", &DecomposeReport::new(n_mp, &r))?;
    out.write_with("signal_modes.csv", |w| export::write_signal_modes(w, &r))?;
    out.write_with("idler_modes.csv", |w| export::write_idler_modes(w, &r))?;
    if cfg.plot {
        let shown = r.rank().min(4);
        for (name, grid, modes) in [
            ("signal_modes.svg", &r.signal_grid, &r.signal_modes),
            ("idler_modes.svg", &r.idler_grid, &r.idler_modes),
        ] {
            let dens: Vec<Vec<f64>> = (0..shown).map(|n| modes.column(n).iter().map(|z| z.norm_sqr()).collect()).collect();
            let series: Vec<Series<'_>> = dens
                .iter()
                .enumerate()
                .map(|(n, y)| Series { label: format!("mode {}", n + 1), x: grid.nodes(), y })
                .collect();
            let doc = svg::line_plot(&series, "mode densities", "detuning", "|psi|^2");
            out.write_with(name, |w| w.write_all(doc.as_bytes()))?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct PeriodReport {
    window: TimeWindow,
    /// Dominant period of each mode's density; `null` when none is found.
    signal_periods: Vec<Option<f64>>,
    idler_periods: Vec<Option<f64>>,
}

fn period_or_none(density: &[f64], dt: f64) -> Result<Option<f64>, CliError> {
    match dominant_period(density, dt) {
        Ok(p) => Ok(Some(p)),
        Err(Error::NoOscillationFound) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn timedomain(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let (_, r) = decomposition(cfg)?;
    let window = TimeWindow::alias_free(&r.signal_grid, &r.idler_grid, cfg.time.oversample, cfg.time.start)?;
    let tm = time_modes(&r, &window)?;
    out.write_with("timedomain_signal.csv", |w| export::write_time_modes(w, &tm, false))?;
    out.write_with("timedomain_idler.csv", |w| export::write_time_modes(w, &tm, true))?;
    let mut report = PeriodReport { window, signal_periods: Vec::new(), idler_periods: Vec::new() };
    for n in 0..r.rank() {
        report.signal_periods.push(period_or_none(&tm.signal_density(n), window.dt)?);
        report.idler_periods.push(period_or_none(&tm.idler_density(n), window.dt)?);
    }
    out.write_json("timedomain.json", &report)?;
    if cfg.plot {
        let times = tm.times();
        let shown = r.rank().min(4);
        for (name, idler) in [("timedomain_signal.svg", false), ("timedomain_idler.svg", true)] {
            let dens: Vec<Vec<f64>> = (0..shown)
                .map(|n| if idler { tm.idler_density(n) } else { tm.signal_density(n) })
                .collect();
            let series: Vec<Series<'_>> = dens
                .iter()
                .enumerate()
                .map(|(n, y)| Series { label: format!("mode {}", n + 1), x: &times, y })
                .collect();
            let doc = svg::line_plot(&series, "time-domain mode densities", "t", "|psi(t)|^2");
            out.write_with(name, |w| w.write_all(doc.as_bytes()))?;
        }
    }
    Ok(())
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Symmetric => "symmetric",
        Family::Nonsymmetric => "nonsymmetric",
    }
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    family: Family,
    n_mp: usize,
    separation_threshold: f64,
    saturation: Option<SaturationReport>,
}

#[derive(Debug, Serialize)]
struct ScalingReport {
    family: Family,
    bounds: [f64; 2],
    optima: Vec<Optimum>,
    fit: ScalingFit,
}

pub fn sweep(cfg: &RunConfig, out: &Output) -> Result<(), CliError> {
    let params = cfg.params()?;
    let s = &cfg.sweep;
    if s.steps == 0 {
        return Err(CliError::Config("sweep.steps must be at least 1".into()));
    }
    let threshold = separation_threshold(&params);
    let mut summaries = Vec::new();
    let mut curves: Vec<(String, Vec<SweepRow>)> = Vec::new();
    for &family in &s.families {
        for &n_mp in &s.n_mp {
            let spec = SweepSpec {
                params,
                grid: cfg.grid,
                family,
                n_mp,
                dp1_start: s.dp1_start,
                dp1_step: s.dp1_step,
                steps: s.steps,
                window_margin: s.window_margin,
            };
            let rows = run_sweep(&spec)?;
            let name = format!("sweep_{}_n{n_mp}", family_name(family));
            out.write_with(&format!("{name}.csv"), |w| export::write_sweep(w, &rows))?;
            summaries.push(SweepSummary { family, n_mp, separation_threshold: threshold, saturation: saturation(&rows, threshold) });
            curves.push((name, rows));
        }
    }
    if !summaries.is_empty() {
        out.write_json("sweep_summary.json", &summaries)?;
    }
    if cfg.plot && !curves.is_empty() {
        let xs: Vec<Vec<f64>> = curves.iter().map(|(_, rows)| rows.iter().map(|r| r.dp1).collect()).collect();
        let ys: Vec<Vec<f64>> = curves.iter().map(|(_, rows)| rows.iter().map(|r| r.entropy_bits).collect()).collect();
        let series: Vec<Series<'_>> = curves
            .iter()
            .zip(xs.iter().zip(&ys))
            .map(|((name, _), (x, y))| Series { label: name.trim_start_matches("sweep_").into(), x, y })
            .collect();
        let doc = svg::line_plot(&series, "entropy against shift", "dp1", "S (bits)");
        out.write_with("sweep.svg", |w| w.write_all(doc.as_bytes()))?;
    }

    if let Some(sc) = &s.scaling {
        let mut optima = Vec::new();
        for n_mp in 1..=sc.n_max {
            let spec = OptimizeSpec {
                params,
                grid: cfg.grid,
                family: sc.family,
                n_mp,
                bounds: (sc.bounds[0], sc.bounds[1]),
                window_margin: s.window_margin,
            };
            let opt = maximize_entropy(&spec)?;
            log::info!("N = {n_mp}: S_M = {} bits after {} evaluations", opt.entropy_bits, opt.evaluations);
            optima.push(opt);
        }
        let points: Vec<ScalingPoint> = optima
            .iter()
            .map(|o| ScalingPoint { n_mp: o.n_mp, s_max: o.entropy_bits, k_max: o.schmidt_number })
            .collect();
        let fit = fit_scaling(&points)?;
        if cfg.plot {
            let n: Vec<f64> = fit.n_mp.iter().map(|&v| v as f64).collect();
            let base = fit.s_max.first().copied().unwrap_or(0.0);
            let law: Vec<f64> = n.iter().map(|v| base + v.log2()).collect();
            let doc = svg::line_plot(
                &[
                    Series { label: "S_M".into(), x: &n, y: &fit.s_max },
                    Series { label: "S_1 + log2 N".into(), x: &n, y: &law },
                    Series { label: "K_M".into(), x: &n, y: &fit.k_max },
                ],
                "maximum entanglement",
                "N",
                "bits / modes",
            );
            out.write_with("scaling.svg", |w| w.write_all(doc.as_bytes()))?;
        }
        out.write_json("scaling.json", &ScalingReport { family: sc.family, bounds: sc.bounds, optima, fit })?;
    }
    Ok(())
}

pub fn verify(cfg: &RunConfig, out: &Output) -> Result<VerifyReport, CliError> {
    let params = cfg.params()?;
    let drive = cfg.drive()?;
    let report = run_verification(&params, &drive, (cfg.grid.lo, cfg.grid.hi))?;
    out.write_json("verify.json", &report)?;
    Ok(report)
}
