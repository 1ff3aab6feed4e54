use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use tcladder::eigenanalysis::{boundary_rung, eps, rabi_splitting, sc_criterion};
use tcladder::liouvillian::expectation;
use tcladder::spectrum::{
    peak_table, physical_spectrum, two_time_correlation, PeakRow, SpectrumOptions,
};
use tcladder::verify::{self, VerifyOptions, VerifyReport, MUTATION_SCALE};
use tcladder::{System, SystemParams};

use crate::config::{ScenarioConfig, Units};
use crate::error::{CliError, CliResult};
use crate::output::{to_json, write_dataset, write_text, Cell, Table};

pub const TOOL: &str = "tcladder";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub units: Units,
    pub columns: &'a [&'static str],
    pub config: &'a ScenarioConfig,
}

fn metadata<'a>(command: &'a str, table: &'a Table, config: &'a ScenarioConfig) -> Metadata<'a> {
    Metadata {
        tool: TOOL,
        version: VERSION,
        command,
        units: config.units,
        columns: &table.columns,
        config,
    }
}

/// Rows of complex eigenenergies for every sweep point and manifold.
pub fn eigen_table(config: &ScenarioConfig) -> CliResult<Table> {
    let sweep = config.sweep();
    let points = sweep.grid().points();
    let chunks: Vec<CliResult<Vec<Vec<Cell>>>> = points
        .par_iter()
        .map(|&x| {
            let p = sweep.parameter.apply(&config.params, x);
            p.validate()?;
            let mut rows = Vec::new();
            for &n in &config.manifolds {
                for e in eps(n, &p)? {
                    rows.push(vec![x.into(), n.into(), e.branch.into(), e.value.re.into(), e.value.im.into()]);
                }
            }
            Ok(rows)
        })
        .collect();
    let mut table = Table::new(vec!["sweep_value", "n", "branch", "re_eps", "im_eps"]);
    for chunk in chunks {
        for row in chunk? {
            table.push(row);
        }
    }
    Ok(table)
}

pub fn cmd_eigen(config: &ScenarioConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let resolved = config.resolved("eigen")?;
    let table = eigen_table(config)?;
    Ok(vec![write_dataset(out, "eigen", &table, &metadata("eigen", &table, &resolved))?])
}

/// Contour `n(γ₋/g)` of `|Im Q_n| = 1` and per-rung splittings, both on
/// the `γ₋/g` axis at `Δ = 0`, `γ_σ = 0`.
pub fn criterion_tables(config: &ScenarioConfig) -> CliResult<(Table, Table)> {
    let s = config.criterion;
    let ys: Vec<f64> = (0..s.count)
        .map(|k| s.y_max * k as f64 / (s.count - 1) as f64)
        .collect();
    let mut contour = Table::new(vec!["gamma_minus_over_g", "n_boundary"]);
    for &y in &ys {
        contour.push(vec![y.into(), boundary_rung(y).into()]);
    }
    let rows: Vec<CliResult<Vec<Vec<Cell>>>> = ys
        .par_iter()
        .map(|&y| {
            let p = SystemParams::resonant(0.0, 1.0, 4.0 * y, 0.0)?;
            (1..=s.n_max)
                .map(|n| {
                    let verdict = sc_criterion(n, &p)?;
                    Ok(vec![
                        y.into(),
                        n.into(),
                        rabi_splitting(n, &p)?.into(),
                        verdict.strong.into(),
                        verdict.im_q.into(),
                    ])
                })
                .collect()
        })
        .collect();
    let mut splitting = Table::new(vec!["gamma_minus_over_g", "n", "splitting_over_g", "strong_coupling", "im_q"]);
    for chunk in rows {
        for row in chunk? {
            splitting.push(row);
        }
    }
    Ok((contour, splitting))
}

pub fn cmd_criterion(config: &ScenarioConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let resolved = config.resolved("criterion")?;
    let (contour, splitting) = criterion_tables(config)?;
    Ok(vec![
        write_dataset(out, "criterion_contour", &contour, &metadata("criterion", &contour, &resolved))?,
        write_dataset(out, "criterion_splitting", &splitting, &metadata("criterion", &splitting, &resolved))?,
    ])
}

fn system_and_state(config: &ScenarioConfig) -> CliResult<(System, tcladder::DensityMatrix)> {
    let system = System::new(config.params, config.photon_cutoff()?)?;
    let rho0 = config.initial_state.density_matrix(system.basis())?;
    Ok((system, rho0))
}

pub fn evolve_table(config: &ScenarioConfig) -> CliResult<Table> {
    let (system, rho0) = system_and_state(config)?;
    let grid = config.t_grid().points();
    let traj = system.evolve(&rho0, &grid)?;
    let ops = system.operators();
    let photons = ops.photon_number();
    let pop1 = ops.sigma1.adjoint() * &ops.sigma1;
    let pop2 = ops.sigma2.adjoint() * &ops.sigma2;
    let mut table = Table::new(vec![
        "t",
        "tr_rho",
        "expect_N",
        "expect_photons",
        "expect_sigma1",
        "expect_sigma2",
        "singlet_population",
        "min_eig_rho",
    ]);
    for (t, rho) in grid.iter().zip(&traj) {
        let m = &rho.matrix;
        table.push(vec![
            (*t).into(),
            rho.trace().re.into(),
            expectation(m, &ops.number)?.re.into(),
            expectation(m, &photons)?.re.into(),
            expectation(m, &pop1)?.re.into(),
            expectation(m, &pop2)?.re.into(),
            system.singlet_population(m).into(),
            rho.min_eigenvalue().into(),
        ]);
    }
    Ok(table)
}

pub fn correlation_table(config: &ScenarioConfig) -> CliResult<Option<Table>> {
    let Some(tau) = config.tau_grid else {
        return Ok(None);
    };
    let (system, rho0) = system_and_state(config)?;
    let ts = config.t_grid().points();
    let taus = tau.points();
    let g = two_time_correlation(&system, config.operator, &rho0, &ts, &taus)?;
    let mut table = Table::new(vec!["t", "tau", "g_re", "g_im"]);
    for (i, t) in ts.iter().enumerate() {
        for (j, tau) in taus.iter().enumerate() {
            let z = g.values[(i, j)];
            table.push(vec![(*t).into(), (*tau).into(), z.re.into(), z.im.into()]);
        }
    }
    Ok(Some(table))
}

pub fn cmd_evolve(config: &ScenarioConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let resolved = config.resolved("evolve")?;
    let table = evolve_table(config)?;
    let mut files = vec![write_dataset(out, "evolve", &table, &metadata("evolve", &table, &resolved))?];
    if let Some(corr) = correlation_table(config)? {
        files.push(write_dataset(out, "correlation", &corr, &metadata("evolve", &corr, &resolved))?);
    }
    Ok(files)
}

#[derive(Debug, Serialize)]
pub struct SpectrumSidecar<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub units: Units,
    pub columns: &'a [&'static str],
    pub config: &'a ScenarioConfig,
    pub quadrature_step: f64,
    pub convergence_delta: f64,
    pub converged: bool,
    pub detected_peaks: Vec<f64>,
    pub peak_table: Vec<PeakRow>,
}

pub struct SpectrumRun {
    pub table: Table,
    pub resolved: ScenarioConfig,
    pub series: tcladder::spectrum::SpectrumSeries,
    pub peak_rows: Vec<PeakRow>,
}

pub fn spectrum_run(config: &ScenarioConfig) -> CliResult<SpectrumRun> {
    let resolved = config.resolved("spectrum")?;
    let (_, rho0) = system_and_state(config)?;
    let grid = config.omega_grid()?.points();
    let opts = SpectrumOptions {
        kernel: config.kernel,
        allow_unconverged: true,
        ..SpectrumOptions::default()
    };
    let series = physical_spectrum(
        &config.params,
        config.photon_cutoff()?,
        config.operator,
        &rho0,
        config.kappa(),
        config.total_time()?,
        &grid,
        &opts,
    )?;
    let m_max = config.initial_state.max_excitation()?.max(1);
    let peak_rows = peak_table(&config.params, m_max)?.rows;
    let mut table = Table::new(vec!["omega", "s"]);
    for (w, s) in grid.iter().zip(&series.values) {
        table.push(vec![(*w).into(), (*s).into()]);
    }
    Ok(SpectrumRun {
        table,
        resolved,
        series,
        peak_rows,
    })
}

pub fn cmd_spectrum(config: &ScenarioConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let run = spectrum_run(config)?;
    if !run.series.converged {
        eprintln!(
            "warning: spectrum quadrature did not reach the 0.5% tolerance (relative change {:.3e})",
            run.series.convergence_delta
        );
    }
    let sidecar = SpectrumSidecar {
        tool: TOOL,
        version: VERSION,
        command: "spectrum",
        units: config.units,
        columns: &run.table.columns,
        config: &run.resolved,
        quadrature_step: run.series.step,
        convergence_delta: run.series.convergence_delta,
        converged: run.series.converged,
        detected_peaks: run.series.peaks(config.peak_threshold),
        peak_table: run.peak_rows.clone(),
    };
    let csv = write_text(out, "spectrum.csv", &run.table.to_csv())?;
    let json = write_text(out, "spectrum.json", &to_json(&sidecar))?;
    Ok(vec![csv, json])
}

pub fn cmd_verify(seed: Option<u64>, mutate: bool, out: Option<&Path>) -> CliResult<VerifyReport> {
    let mut opts = VerifyOptions::default();
    if let Some(s) = seed {
        opts.seed = s;
    }
    if mutate {
        opts.rabi_scale = MUTATION_SCALE;
    }
    let report = verify::run(&opts);
    let text = to_json(&report);
    print!("{text}");
    if let Some(dir) = out {
        write_text(dir, "verify.json", &text)?;
    }
    if report.all_pass {
        Ok(report)
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id.as_str())
            .collect();
        Err(CliError::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}
