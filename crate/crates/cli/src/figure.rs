//! Figure data: annealer classical-realm curve and the variational MAXCUT comparison.

use nisqbound_core::annealer::{classical_realm_time, realm_threshold, ContinuousNoise};
use nisqbound_core::baselines::{burer_monteiro_round, simulated_annealing, AnnealSchedule};
use nisqbound_core::instances::{generate_regular, Family, IsingInstance};
use nisqbound_core::partition::{BetaGrid, Enumerator, Spectrum};

use crate::commands::{load_instance, realm_rows, report_fixed_point, report_realm_time};
use crate::error::{CliError, CliResult};
use crate::report::{csv_text, digest, emit, BoundReport, CsvCell};
use crate::{FigureAnnealerArgs, FigureArgs, FigureKind, FigureVariationalArgs, Global};

pub fn run(g: &Global, a: &FigureArgs, echo: Vec<String>) -> CliResult<u8> {
    let (report, csv) = match &a.kind {
        FigureKind::Annealer(f) => annealer(f, echo)?,
        FigureKind::Variational(f) => variational(g, f, echo)?,
    };
    // CSV goes to --csv or stdout; the report then takes --out, or stdout if free.
    match &g.csv {
        Some(path) => {
            emit(Some(path), &csv)?;
            emit(g.out.as_deref(), &report.to_json()?)?;
        }
        None => {
            emit(None, &csv)?;
            if let Some(out) = &g.out {
                emit(Some(out), &report.to_json()?)?;
            }
        }
    }
    Ok(0)
}

fn annealer(f: &FigureAnnealerArgs, echo: Vec<String>) -> CliResult<(BoundReport, String)> {
    let noise = ContinuousNoise::new(f.ratio * f.r3, 0.0, f.r3)?;
    let mut r = BoundReport::new(echo);
    r.number("r1", noise.r1, "J", "ratio * r3")?;
    r.number("r3", noise.r3, "J", "given")?;
    report_fixed_point(&mut r, &noise)?;
    let threshold = realm_threshold(f.norm_ratio, 1, 1.0, f.eps)?;
    r.number("poly_threshold", threshold, "nats per qubit", "4 eps ||A|| n / ||H_I||")?;
    report_realm_time(&mut r, classical_realm_time(&noise, f.gbar, threshold)?)?;
    let csv = realm_rows(&noise, f.gbar, threshold, &f.times)?;
    Ok((r, csv))
}

/// Largest inverse temperature with a rapid-mixing certificate.
pub fn certified_beta(inst: &IsingInstance) -> f64 {
    let spectral = 1.0 / inst.spectral_norm();
    if inst.family() == Family::Sk {
        spectral.max(0.25)
    } else {
        spectral
    }
}

/// Relative-entropy density at which the variational bound meets `energy`.
fn crossing_density(spectrum: &Spectrum, energy: f64, grid: &BetaGrid) -> CliResult<Option<f64>> {
    let n = spectrum.n() as f64;
    Ok(spectrum.crossing_budget(energy, grid, 1e-6)?.map(|b| b / n))
}

fn variational(g: &Global, f: &FigureVariationalArgs, echo: Vec<String>) -> CliResult<(BoundReport, String)> {
    if f.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let mut r = BoundReport::new(echo);
    let inst = match &f.instance {
        Some(path) => {
            let (inst, d) = load_instance(path)?;
            r.input_digest = Some(d);
            inst
        }
        None => {
            let inst = generate_regular(f.n, f.degree, -1.0, f.seed)?;
            r.input_digest = Some(digest(&inst.to_json()));
            inst
        }
    };
    let n = inst.n() as f64;
    let beta_c = certified_beta(&inst);
    let grid = BetaGrid { min: beta_c * 1e-4, max: beta_c, points: 400, rel_tol: 1e-6 };
    let spectrum = Enumerator::default().with_threads(g.threads).spectrum(&inst, grid.max, false)?;
    r.number("beta_c", beta_c, "1/energy", "rapid-mixing threshold; the bound is taken over (0, beta_c]")?;
    r.number("ground_energy", spectrum.ground_energy(), "energy", "exhaustive enumeration")?;

    let sched = AnnealSchedule { beta_start: 0.01 * beta_c, beta_end: beta_c * (1.0 - 1e-9), sweeps: f.sweeps };
    let sa = simulated_annealing(&inst, &sched, f.restarts, f.seed, true)?;
    r.number("sa_energy", sa.mean_energy, "energy", "mean final energy of certified simulated annealing")?;
    let sdp = burer_monteiro_round(&inst, None, 100_000, f.draws, f.seed)?;
    r.number("sdp_energy", sdp.mean_energy, "energy", "mean energy of random-hyperplane rounding")?;

    let prov = "relative-entropy density where the variational bound meets the classical energy";
    for (name, energy) in [("sa_crossing_density", sa.mean_energy), ("sdp_crossing_density", sdp.mean_energy)] {
        match crossing_density(&spectrum, energy, &grid)? {
            Some(d) => r.number(name, d, "bits per qubit", prov)?,
            None => r.text(name, "none", "bits per qubit", prov),
        }
    }

    let mut rows = Vec::with_capacity(f.points);
    for i in 0..f.points {
        let s = i as f64 / (f.points - 1) as f64;
        let budget = n * (1.0 - s);
        let bound = spectrum.variational_bound(budget, 0.0, &grid)?.bound;
        rows.push(vec![CsvCell::Num(s), CsvCell::Num(bound), CsvCell::Num(bound / n)]);
    }
    let csv = csv_text(&["entropy_density", "lower_bound", "lower_bound_density"], &rows)?;
    Ok((r, csv))
}
