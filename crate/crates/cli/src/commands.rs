use std::fs;
use std::path::Path;

use nisqbound_core::annealer::{
    classical_realm_time, fixed_point, linear_path_bound, realm_curve, realm_threshold, schedule_bound,
    ContinuousNoise, RealmTime, Schedule,
};
use nisqbound_core::baselines::{burer_monteiro_round, simulated_annealing, AnnealSchedule};
use nisqbound_core::bounds::{
    beta_equivalent, correlation_thresholds, dmax_ising, dmax_lattice, entropy_budget, ising_log_term,
    qaoa_thresholds, trace_mixing_depth, Ceiling, DepthForm, DiscreteNoise, LatticeSpec,
};
use nisqbound_core::instances::{generate_random, generate_regular, generate_sk, IsingInstance};
use nisqbound_core::partition::{BetaGrid, Crossing, Enumerator, GibbsSpec};
use nisqbound_core::sampler::{estimate_energy, glauber_chains, rapid_mixing_check};
use nisqbound_oracle::suites::{run_suite, Suite, SuiteConfig};

use crate::error::{CliError, CliResult};
use crate::report::{csv_text, digest, emit, BoundReport, CsvCell};
use crate::{
    AnnealArgs, BaselineArgs, Cli, Command, DepthBoundArgs, Form, GenArgs, GibbsArgs, Global, GridArgs, InstanceType,
    LowerBoundArgs, Method, NoiseArgs, TimeGrid, VerifyArgs,
};

pub const PROV_ENUMERATION: &str = "exhaustive enumeration";
pub const PROV_VARIATIONAL: &str = "Gibbs variational bound: sup over beta of (n ln2 - ln Z - budget ln2) / beta";
const PROV_BUDGET: &str = "depolarizing contraction: n (1-p1)^(2 f1 D) (1-p2)^(2 f2 D)";

/// Runs the parsed command; returns the process exit code.
pub fn run(cli: &Cli, echo: Vec<String>) -> CliResult<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen(a) => gen(g, a),
        Command::DepthBound(a) => finish(g, depth_bound(g, a, echo)?),
        Command::LowerBound(a) => finish(g, lower_bound(g, a, echo)?),
        Command::GibbsSample(a) => finish(g, gibbs_sample(g, a, echo)?),
        Command::Baseline(a) => finish(g, baseline(g, a, echo)?),
        Command::AnnealBound(a) => finish(g, anneal_bound(g, a, echo)?),
        Command::Verify(a) => verify(g, a, echo),
        Command::Figure(a) => crate::figure::run(g, a, echo),
    }
}

fn finish(g: &Global, report: BoundReport) -> CliResult<u8> {
    emit(g.out.as_deref(), &report.to_json()?)?;
    Ok(0)
}

/// Reads an instance and returns it with the digest of its canonical JSON.
pub fn load_instance(path: &Path) -> CliResult<(IsingInstance, String)> {
    let text = fs::read_to_string(path)?;
    let inst = IsingInstance::from_json(&text)?;
    let d = digest(&inst.to_json());
    Ok((inst, d))
}

fn discrete_noise(a: &NoiseArgs) -> CliResult<DiscreteNoise> {
    Ok(DiscreteNoise::new(a.p1, a.p2, a.pm, a.f1, a.f2)?)
}

pub fn log_grid(min: f64, max: f64, points: usize) -> CliResult<Vec<f64>> {
    if !(min > 0.0 && max > min && max.is_finite()) || points < 2 {
        return Err(CliError::Usage("grids need 0 < min < max and at least 2 points".into()));
    }
    let ratio = (max / min).ln();
    Ok((0..points).map(|i| min * (ratio * i as f64 / (points - 1) as f64).exp()).collect())
}

fn beta_grid(a: &GridArgs) -> BetaGrid {
    BetaGrid { min: a.beta_min, max: a.beta_max, points: a.beta_points, rel_tol: 1e-6 }
}

fn gen(g: &Global, a: &GenArgs) -> CliResult<u8> {
    let inst = match a.kind {
        InstanceType::Regular => generate_regular(a.n, a.degree, a.sign, a.seed)?,
        InstanceType::Sk => generate_sk(a.n, a.seed)?,
        InstanceType::Random => generate_random(a.n, a.density, a.coupling_std, a.field_std, a.seed)?,
    };
    let mut text = inst.to_json();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    emit(g.out.as_deref(), &text)?;
    Ok(0)
}

fn depth_bound(g: &Global, a: &DepthBoundArgs, echo: Vec<String>) -> CliResult<BoundReport> {
    let noise = discrete_noise(&a.noise)?;
    let mut r = BoundReport::new(echo);
    let log_term = match (a.log_term, &a.instance) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give --log-term or --instance, not both".into())),
        (Some(x), None) => x,
        (None, Some(path)) => {
            let (inst, d) = load_instance(path)?;
            r.input_digest = Some(d);
            let summary = Enumerator::default()
                .with_threads(g.threads)
                .enumerate(&GibbsSpec::new(&inst, 0.0, 0.0)?)?;
            let a_norm = inst.spectral_norm();
            r.number("h_norm", summary.h_norm, "energy", PROV_ENUMERATION)?;
            r.number("a_norm", a_norm, "energy", "power iteration on the coupling matrix")?;
            ising_log_term(summary.h_norm, a_norm, inst.n())?
        }
        (None, None) => 0.0,
    };
    r.number("log_term", log_term, "nats", "ln(||A|| n / ||H_I||)")?;
    let (form, prov) = match a.form {
        Form::Approx => (DepthForm::Approximate, "Ising depth ceiling with linearized rates f1 p1 + f2 p2"),
        Form::Exact => (DepthForm::Exact, "Ising depth ceiling with rates -f1 ln(1-p1) - f2 ln(1-p2)"),
    };
    match dmax_ising(&noise, log_term, a.eps, form)? {
        Ceiling::Finite(d) => r.number("dmax", d, "layers", prov)?,
        Ceiling::Unbounded => r.text("dmax", "unbounded", "layers", prov),
    }

    if let Some(depth) = a.depth {
        let n = a.n.ok_or_else(|| CliError::Usage("--depth needs --n".into()))?;
        let budget = entropy_budget(&noise, depth, n, a.include_measurement);
        r.number("entropy_budget", budget.bits, "bits", PROV_BUDGET)?;
        if let Some(h) = a.h_norm {
            let prov = "Gibbs inverse temperature matching the noisy energy: lambda / (||H|| eps)";
            r.number("beta_equivalent", beta_equivalent(&budget, h, a.eps, false)?, "1/energy", prov)?;
            let prov = "as beta_equivalent for a general fixed point: 4 lambda / (||H|| eps)";
            r.number("beta_equivalent_generalized", beta_equivalent(&budget, h, a.eps, true)?, "1/energy", prov)?;
        }
    }
    match (a.alpha, a.initial_bits) {
        (Some(alpha), Some(bits)) => {
            let depth = trace_mixing_depth(alpha, a.eps, bits)?;
            let prov = "Pinsker with geometric contraction: (1-alpha)^N D0 ln2 <= 2 eps^2";
            r.number("mixing_depth", depth as f64, "layers", prov)?;
        }
        (None, None) => {}
        _ => return Err(CliError::Usage("--alpha and --initial-bits go together".into())),
    }
    if let Some(dim) = a.lattice_dim {
        let spec = LatticeSpec::new(dim, a.locality, a.strength)?;
        let p = a.p.ok_or_else(|| CliError::Usage("--lattice-dim needs --p".into()))?;
        let lat = dmax_lattice(&spec, a.eps, p)?;
        let prov = "local lattice ceiling ln(20 e / (d^kappa eps)) / (2p)";
        match lat.dmax {
            Ceiling::Finite(d) => r.number("dmax_lattice", d, "layers", prov)?,
            Ceiling::Unbounded => r.text("dmax_lattice", "unbounded", "layers", prov),
        }
        r.number("beta_c_lattice", lat.beta_c, "1/energy", "(5 e kappa d^kappa J)^-1")?;
        if let Some(xi) = a.xi {
            let c = correlation_thresholds(xi, &spec, a.eps)?;
            r.number("correlation_min_depth", c.min_depth, "layers", "light cone: xi / 2")?;
            r.number("correlation_noise_threshold", c.noise_threshold, "probability", "2 ln(20 e d^kappa / eps) / xi")?;
        }
    } else if a.xi.is_some() {
        return Err(CliError::Usage("--xi needs --lattice-dim".into()));
    }
    if let Some(degree) = a.qaoa_degree {
        let n = a.n.ok_or_else(|| CliError::Usage("--qaoa-degree needs --n".into()))?;
        let q = qaoa_thresholds(n, degree, a.eps)?;
        r.number("qaoa_min_rounds", q.min_rounds, "rounds", "ln n / ln(degree - 1)")?;
        r.number("qaoa_noise_threshold", q.noise_threshold, "probability", "ln(1/eps) ln(degree - 1) / (2 ln n)")?;
    }
    Ok(r)
}

fn lower_bound(g: &Global, a: &LowerBoundArgs, echo: Vec<String>) -> CliResult<BoundReport> {
    let (inst, d) = load_instance(&a.instance)?;
    let mut r = BoundReport::new(echo);
    r.input_digest = Some(d);
    let noise = discrete_noise(&a.noise)?;
    let grid = beta_grid(&a.grid);
    let spectrum = Enumerator::default()
        .with_threads(g.threads)
        .spectrum(&inst, grid.max, a.gamma != 0.0)?;
    r.number("ground_energy", spectrum.ground_energy(), "energy", PROV_ENUMERATION)?;
    r.number("reference_energy", spectrum.mixed_energy(a.gamma), "energy", "energy of the product reference state")?;

    let budget = match (a.budget, a.depth) {
        (Some(b), _) => Some((b, "given")),
        (None, Some(depth)) => Some((entropy_budget(&noise, depth, inst.n(), a.include_measurement).bits, PROV_BUDGET)),
        (None, None) => None,
    };
    if let Some((bits, prov)) = budget {
        r.number("entropy_budget", bits, "bits", prov)?;
        let vb = spectrum.variational_bound(bits, a.gamma, &grid)?;
        r.number("lower_bound", vb.bound, "energy", PROV_VARIATIONAL)?;
        r.number("beta_star", vb.beta_star, "1/energy", "maximizer over the beta grid with golden-section refinement")?;
    }
    if let Some(ec) = a.ec {
        if a.gamma != 0.0 {
            return Err(CliError::Usage("--ec uses the maximally mixed reference; drop --gamma".into()));
        }
        let prov = "smallest depth whose depolarizing budget certifies energy >= E_c";
        match spectrum.crossing_depth(&noise, ec, a.include_measurement, &grid)? {
            Crossing::Depth(dc) => r.number("crossing_depth", dc as f64, "layers", prov)?,
            Crossing::Never => r.text("crossing_depth", "never", "layers", prov),
        }
        let prov = "largest budget whose variational bound reaches E_c";
        match spectrum.crossing_budget(ec, &grid, 1e-6)? {
            Some(b) => r.number("crossing_budget", b, "bits", prov)?,
            None => r.text("crossing_budget", "none", "bits", prov),
        }
    }
    if let Some(path) = &g.csv {
        let rows: Vec<Vec<CsvCell>> = spectrum
            .curve(&grid.betas(), a.gamma)?
            .into_iter()
            .map(|p| vec![CsvCell::Num(p.beta), CsvCell::Num(p.log_z), CsvCell::Num(p.mean_energy)])
            .collect();
        emit(Some(path), &csv_text(&["beta", "logZ_nats", "mean_energy"], &rows)?)?;
    }
    Ok(r)
}

fn gibbs_sample(g: &Global, a: &GibbsArgs, echo: Vec<String>) -> CliResult<BoundReport> {
    let (inst, d) = load_instance(&a.instance)?;
    let mut r = BoundReport::new(echo);
    r.input_digest = Some(d);
    let spec = GibbsSpec::new(&inst, a.beta, a.gamma)?;
    let cert = rapid_mixing_check(&inst, a.beta)?;
    let set = glauber_chains(&spec, a.chains, a.sweeps, a.burn_in, a.thin, a.seed, g.threads)?;
    let est = estimate_energy(&set.samples, &inst)?;
    let prov_cert = "rapid-mixing certificate: beta ||A|| < 1 (and beta < 1/4 for SK couplings)";
    r.text("certified", if cert.ok { "yes" } else { "no" }, "flag", prov_cert);
    r.number("certificate_margin", cert.margin, "dimensionless", prov_cert)?;
    r.number("burn_in", set.burn_in as f64, "sweeps", "given, or 100 ceil(1/margin) when certified")?;
    r.number("samples", set.samples.len() as f64, "count", "heat-bath Glauber chains")?;
    r.number("mean_energy", est.mean, "energy", "sample mean")?;
    r.number("mean_energy_stderr", est.stderr, "energy", "batch means")?;
    if let Some(m) = set.min_energy() {
        r.number("min_energy", m, "energy", "lowest sampled energy")?;
    }
    r.data = Some(serde_json::to_value(&cert)?);
    if let Some(path) = &g.csv {
        let flag = i64::from(set.certified);
        let rows: Vec<Vec<CsvCell>> = set
            .samples
            .iter()
            .map(|s| vec![CsvCell::Str(s.config.bitstring()), CsvCell::Num(s.energy), CsvCell::Int(flag)])
            .collect();
        emit(Some(path), &csv_text(&["config", "energy", "certified"], &rows)?)?;
    }
    Ok(r)
}

fn baseline(_g: &Global, a: &BaselineArgs, echo: Vec<String>) -> CliResult<BoundReport> {
    let (inst, d) = load_instance(&a.instance)?;
    let mut r = BoundReport::new(echo);
    r.input_digest = Some(d);
    let result = match a.method {
        Method::Sa => {
            let sched = AnnealSchedule { beta_start: a.beta_start, beta_end: a.beta_end, sweeps: a.sweeps };
            let res = simulated_annealing(&inst, &sched, a.restarts, a.seed, a.certified_only)?;
            let prov = "heat-bath simulated annealing, geometric beta ladder";
            r.number("best_energy", res.best_energy, "energy", prov)?;
            r.number("mean_final_energy", res.mean_energy, "energy", "mean over restarts of the final state")?;
            r.number("sweeps", res.iterations as f64, "sweeps", prov)?;
            res
        }
        Method::Sdp => {
            let sdp = burer_monteiro_round(&inst, a.rank, a.max_iterations, a.draws, a.seed)?;
            let prov = "rank-k Burer-Monteiro cut relaxation";
            r.number("relaxation_value", sdp.relaxation_value, "cut weight", prov)?;
            r.number("rank", sdp.rank as f64, "dimensionless", prov)?;
            let prov = "random-hyperplane rounding";
            r.number("best_cut", sdp.best_cut, "cut weight", prov)?;
            r.number("mean_cut", sdp.mean_cut, "cut weight", prov)?;
            r.number("best_energy", sdp.result.best_energy, "energy", prov)?;
            r.number("mean_energy", sdp.mean_energy, "energy", "W - 2 mean_cut")?;
            r.number("iterations", sdp.result.iterations as f64, "iterations", "projected gradient steps")?;
            sdp.result
        }
    };
    r.data = Some(serde_json::json!({ "best_config": result.best_config.bitstring() }));
    Ok(r)
}

pub fn realm_rows(noise: &ContinuousNoise, gbar: f64, threshold: f64, times: &TimeGrid) -> CliResult<String> {
    let ts = log_grid(times.t_min, times.t_max, times.t_points)?;
    let rows: Vec<Vec<CsvCell>> = realm_curve(noise, gbar, threshold, &ts)?
        .into_iter()
        .map(|row| {
            vec![
                CsvCell::Num(row.t),
                CsvCell::Num(row.budget_bits_per_qubit),
                CsvCell::Num(row.poly_threshold),
                CsvCell::Int(i64::from(row.classical)),
            ]
        })
        .collect();
    csv_text(&["T", "budget_bits_per_qubit", "poly_threshold", "classical"], &rows)
}

pub fn report_realm_time(r: &mut BoundReport, t: RealmTime) -> CliResult<()> {
    let prov = "smallest linear-path anneal time with per-qubit density at most the threshold";
    match t {
        RealmTime::Immediate => r.number("classical_realm_time", 0.0, "1/J", prov),
        RealmTime::At(t) => r.number("classical_realm_time", t, "1/J", prov),
        RealmTime::Never => {
            r.text("classical_realm_time", "never", "1/J", prov);
            Ok(())
        }
    }
}

pub fn report_fixed_point(r: &mut BoundReport, noise: &ContinuousNoise) -> CliResult<()> {
    let fp = fixed_point(noise)?;
    let prov = "fixed point of the single-qubit noise: gamma = ln(1 + r1/r3) / 2";
    if fp.is_pure() {
        r.text("gamma", "infinite", "dimensionless", prov);
    } else {
        r.number("gamma", fp.gamma, "dimensionless", prov)?;
    }
    r.number("alpha", fp.alpha, "J", "log-Sobolev rate r1 + 2 r3")
}

fn anneal_bound(g: &Global, a: &AnnealArgs, echo: Vec<String>) -> CliResult<BoundReport> {
    let noise = ContinuousNoise::new(a.rates.r1, a.rates.r2, a.rates.r3)?;
    let mut r = BoundReport::new(echo);
    report_fixed_point(&mut r, &noise)?;
    if let Some(t) = a.time {
        let b = linear_path_bound(&noise, a.gbar, t, a.n)?;
        r.number("linear_path_budget", b.bits, "bits", "closed form for the linear path")?;
    }
    if let Some(path) = &a.schedule {
        let raw: Schedule = serde_json::from_str(&fs::read_to_string(path)?)?;
        let sched = Schedule::new(raw.total_time, raw.modulation, raw.transverse, false)?;
        if sched.n() != a.n {
            return Err(CliError::Usage(format!("schedule has {} qubits, --n is {}", sched.n(), a.n)));
        }
        let step = a.step.unwrap_or(sched.total_time / 2000.0).max(f64::MIN_POSITIVE);
        let b = schedule_bound(&sched, &noise, step)?;
        r.number("schedule_budget", b.bits, "bits", "Simpson quadrature of the schedule integral")?;
    }
    if let Some(eps) = a.eps {
        let (Some(a_norm), Some(h_norm)) = (a.a_norm, a.h_norm) else {
            return Err(CliError::Usage("--eps needs --a-norm and --h-norm".into()));
        };
        let threshold = realm_threshold(a_norm, a.n, h_norm, eps)?;
        r.number("poly_threshold", threshold, "nats per qubit", "4 ||A|| n eps / ||H_I||")?;
        report_realm_time(&mut r, classical_realm_time(&noise, a.gbar, threshold)?)?;
        if let Some(path) = &g.csv {
            emit(Some(path), &realm_rows(&noise, a.gbar, threshold, &a.times)?)?;
        }
    } else if g.csv.is_some() {
        return Err(CliError::Usage("--csv needs --eps, --a-norm and --h-norm".into()));
    }
    Ok(r)
}

pub fn margin_unit(suite: Suite) -> &'static str {
    match suite {
        Suite::Mirror => "nats",
        Suite::Variational => "energy",
        _ => "bits",
    }
}

fn verify(g: &Global, a: &VerifyArgs, echo: Vec<String>) -> CliResult<u8> {
    let mut cfg = SuiteConfig::new(a.suite, a.seeds);
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.base_seed = a.seed;
    cfg.threads = g.threads;
    let rep = run_suite(&cfg)?;
    let mut r = BoundReport::new(echo);
    let prov = format!("exact dense simulation, suite {}", a.suite);
    r.number("cases", rep.cases.len() as f64, "count", &prov)?;
    r.number("min_margin", rep.min_margin, margin_unit(a.suite), &prov)?;
    r.number("tolerance", rep.tolerance, margin_unit(a.suite), "accepted margin")?;
    r.text("passed", if rep.passed { "yes" } else { "no" }, "flag", &prov);
    r.data = Some(serde_json::to_value(&rep)?);
    emit(g.out.as_deref(), &r.to_json()?)?;
    Ok(if rep.passed { 0 } else { 1 })
}
