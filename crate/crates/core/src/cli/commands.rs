use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::problem::{matrix_to_json, vector_to_json, Kind, MatrixJson, Problem, ProblemFile, VectorJson};
use super::{Cli, CliError, Command, FamilyCommand, SingleAtomArgs, TwoQubitArgs};
use crate::certify::{dfs_check, dfs_steady_state, enumerate_certificates, PureSteadyCertificate};
use crate::families::{self, Branch};
use crate::feedback::{certify_inefficient, FeedbackSetup};
use crate::lindblad::{integrate_sampled, steady_state, LindbladSystem, Selection};
use crate::qcore::{concurrence, fidelity_to_pure, purity, trace_distance, DensityMatrix, StateVector};
use crate::sme::{ensemble_average, simulate, Scheme, TrajectoryConfig};
use crate::Tolerances;

pub(super) fn dispatch(cli: &Cli) -> Result<(), CliError> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(CliError::Parse(format!("--tol must be positive, got {}", cli.tol)));
    }
    let ctx = Context { tol: Tolerances::default().with_certification(cli.tol), out: &cli.output_dir, quiet: cli.quiet };
    match &cli.command {
        Command::Steady { problem } => cmd_steady(&ctx, &Problem::load(problem)?),
        Command::Certify { problem } => cmd_certify(&ctx, &Problem::load(problem)?),
        Command::Family(FamilyCommand::SingleAtom(args)) => cmd_family_single_atom(&ctx, args),
        Command::Family(FamilyCommand::TwoQubit(args)) => cmd_family_two_qubit(&ctx, args),
        Command::Simulate { problem } => cmd_simulate(&ctx, &Problem::load(problem)?),
        Command::Dfs { problem, d, strict } => cmd_dfs(&ctx, &Problem::load(problem)?, *d, *strict),
    }
}

struct Context<'a> {
    tol: Tolerances,
    out: &'a Path,
    quiet: bool,
}

impl Context<'_> {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        std::fs::create_dir_all(self.out).map_err(|e| CliError::Io(format!("{}: {e}", self.out.display())))?;
        let path = self.out.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.say(format!("wrote {}", path.display()));
        Ok(())
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("reports always serialize");
        text.push('\n');
        self.write(name, &text)
    }
}

/// 17 significant digits, independent of locale.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Serialize)]
struct CertificateJson {
    state: VectorJson,
    lindblad_eigenvalues: Vec<[f64; 2]>,
    drift_eigenvalue: [f64; 2],
    residuals: Vec<f64>,
    generator_residual: f64,
}

impl From<&PureSteadyCertificate> for CertificateJson {
    fn from(c: &PureSteadyCertificate) -> Self {
        Self {
            state: vector_to_json(c.state.amplitudes()),
            lindblad_eigenvalues: c.lindblad_eigenvalues.iter().copied().map(pair).collect(),
            drift_eigenvalue: pair(c.drift_eigenvalue),
            residuals: c.residuals.clone(),
            generator_residual: c.generator_residual,
        }
    }
}

#[derive(Debug, Serialize)]
struct SteadyReport {
    rho: MatrixJson,
    purity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    concurrence: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fidelity_to_target: Option<f64>,
    unique: bool,
    degeneracy: usize,
    selection: &'static str,
    spectral_abscissa: f64,
    residual: f64,
    condition_number: Option<f64>,
}

fn concurrence_if_two_qubit(rho: &DensityMatrix) -> Result<Option<f64>, CliError> {
    if rho.dim() == 4 {
        Ok(Some(concurrence(rho)?))
    } else {
        Ok(None)
    }
}

fn cmd_steady(ctx: &Context, problem: &Problem) -> Result<(), CliError> {
    let ss = steady_state(&problem.system)?;
    let report = SteadyReport {
        rho: matrix_to_json(ss.rho.matrix()),
        purity: purity(&ss.rho),
        concurrence: concurrence_if_two_qubit(&ss.rho)?,
        fidelity_to_target: problem.target.as_ref().map(|t| fidelity_to_pure(&ss.rho, t)),
        unique: ss.unique,
        degeneracy: ss.degeneracy,
        selection: match ss.selection {
            Selection::Unique => "unique",
            Selection::Pure => "pure",
            Selection::NearestMaximallyMixed => "nearest-maximally-mixed",
        },
        spectral_abscissa: ss.spectral_abscissa,
        residual: ss.residual,
        condition_number: ss.condition_number.is_finite().then_some(ss.condition_number),
    };
    ctx.say(format!("unique             {}", report.unique));
    if !report.unique {
        ctx.say(format!("fixed-point set    dimension {} ({})", report.degeneracy, report.selection));
    }
    ctx.say(format!("purity             {}", num(report.purity)));
    if let Some(c) = report.concurrence {
        ctx.say(format!("concurrence        {}", num(c)));
    }
    if let Some(f) = report.fidelity_to_target {
        ctx.say(format!("fidelity to target {}", num(f)));
    }
    ctx.say(format!("spectral abscissa  {}", num(report.spectral_abscissa)));
    ctx.say(format!("residual           {}", num(report.residual)));
    ctx.write_json("steady.json", &report)
}

#[derive(Debug, Serialize)]
struct Diagnosis {
    /// Common eigenvector of `c` and `iH + ½c†c`, if any.
    measurement_eigenvector: Option<VectorJson>,
    feedback_can_help: bool,
}

#[derive(Debug, Serialize)]
struct CertifyReport {
    found: bool,
    certificates: Vec<CertificateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnosis: Option<Diagnosis>,
}

fn certificates(ctx: &Context, system: &LindbladSystem) -> Result<Vec<CertificateJson>, CliError> {
    Ok(enumerate_certificates(system, &ctx.tol)?.iter().map(CertificateJson::from).collect())
}

fn say_certificates(ctx: &Context, certs: &[CertificateJson]) {
    for (k, c) in certs.iter().enumerate() {
        let amps: Vec<String> = c.state.iter().map(|[re, im]| format!("{re:+.6}{im:+.6}i")).collect();
        ctx.say(format!("pure steady state {k}: [{}] (generator residual {:.2e})", amps.join(", "), c.generator_residual));
    }
}

fn cmd_certify(ctx: &Context, problem: &Problem) -> Result<(), CliError> {
    let certs = certificates(ctx, &problem.system)?;
    let diagnosis = match &problem.setup {
        Some(setup) if setup.eta() < 1.0 => {
            let d = certify_inefficient(setup, &ctx.tol)?;
            Some(Diagnosis {
                feedback_can_help: d.feedback_can_help(),
                measurement_eigenvector: d.measurement_eigenvector.as_ref().map(|v| vector_to_json(v.amplitudes())),
            })
        }
        _ => None,
    };
    let found = !certs.is_empty();
    if found {
        say_certificates(ctx, &certs);
    } else {
        ctx.say("no pure steady state");
    }
    if let Some(d) = &diagnosis {
        if d.feedback_can_help {
            ctx.say("diagnosis: c and iH + ½c†c share an eigenvector; a feedback Hamiltonian may exist");
        } else {
            ctx.say("diagnosis: c and iH + ½c†c share no eigenvector; no feedback Hamiltonian gives a pure steady state at η < 1");
        }
    }
    ctx.write_json("certificate.json", &CertifyReport { found, certificates: certs, diagnosis })?;
    if found {
        Ok(())
    } else {
        Err(CliError::NoCertificate)
    }
}

fn family_file(setup: &FeedbackSetup, gamma: f64, target: Option<&StateVector>) -> ProblemFile {
    let mut file = ProblemFile::new(Kind::Custom);
    file.gamma = Some(gamma);
    file.h = Some(matrix_to_json(setup.hamiltonian()));
    file.c = Some(matrix_to_json(setup.measurement()));
    file.f = Some(matrix_to_json(setup.feedback()));
    file.target = target.map(|t| vector_to_json(t.amplitudes()));
    file
}

fn write_family(ctx: &Context, file: ProblemFile) -> Result<(), CliError> {
    let problem = Problem::from_file(file)?;
    let certs = certificates(ctx, &problem.system)?;
    say_certificates(ctx, &certs);
    ctx.write("family.json", &(problem.file.to_json() + "\n"))?;
    ctx.write_json("certificate.json", &CertifyReport { found: !certs.is_empty(), certificates: certs, diagnosis: None })
}

fn cmd_family_single_atom(ctx: &Context, args: &SingleAtomArgs) -> Result<(), CliError> {
    let branch: Branch = args.sign.parse().map_err(|e| CliError::Parse(format!("--sign: {e}")))?;
    if !(args.gamma > 0.0) {
        return Err(CliError::Parse(format!("--gamma must be positive, got {}", args.gamma)));
    }
    let p = families::single_atom_point(args.theta, branch, args.gamma)?;
    ctx.say(format!("alpha  {}", num(p.alpha)));
    ctx.say(format!("lambda {}", num(p.lambda)));
    let mut file = family_file(&p.setup(), args.gamma, Some(&p.phi));
    file.theta = Some(p.theta);
    file.sign = Some(branch.to_string());
    file.alpha = Some(p.alpha);
    file.lambda = Some(p.lambda);
    write_family(ctx, file)
}

fn cmd_family_two_qubit(ctx: &Context, args: &TwoQubitArgs) -> Result<(), CliError> {
    if !(args.gamma > 0.0) {
        return Err(CliError::Parse(format!("--gamma must be positive, got {}", args.gamma)));
    }
    let bell = families::bell_state();
    let file = if args.original {
        let o = families::two_qubit_original(args.alpha, args.lambda, args.gamma)?;
        let mut file = family_file(&o.setup(), args.gamma, Some(&bell));
        file.alpha = Some(args.alpha);
        file.lambda = Some(args.lambda);
        file
    } else {
        let p = families::two_qubit_family([args.x1, args.x2, args.x3, args.x4], args.mu, args.gamma)?;
        let mut file = family_file(&p.setup(), args.gamma, Some(&bell));
        (file.x1, file.x2, file.x3, file.x4, file.mu) =
            (Some(args.x1), Some(args.x2), Some(args.x3), Some(args.x4), Some(args.mu));
        file
    };
    write_family(ctx, file)
}

fn cmd_simulate(ctx: &Context, problem: &Problem) -> Result<(), CliError> {
    let sim = problem
        .file
        .simulation
        .as_ref()
        .ok_or_else(|| CliError::Parse("simulate needs a `simulation` block".into()))?;
    let every = sim.sample_every.unwrap_or(1);
    let target = problem.target.as_ref();
    let two_qubit = problem.system.dim() == 4;

    if sim.n_traj == 0 {
        let det = integrate_sampled(&problem.system, &problem.initial, sim.t_final, sim.dt, every)?;
        let mut csv = String::from("time,purity");
        csv += if two_qubit { ",concurrence" } else { "" };
        csv += if target.is_some() { ",fidelity_to_target\n" } else { "\n" };
        for (t, rho) in det.times.iter().zip(&det.states) {
            write!(csv, "{},{}", num(*t), num(purity(rho))).unwrap();
            if two_qubit {
                write!(csv, ",{}", num(concurrence(rho)?)).unwrap();
            }
            if let Some(tg) = target {
                write!(csv, ",{}", num(fidelity_to_pure(rho, tg))).unwrap();
            }
            csv.push('\n');
        }
        let last = det.last();
        ctx.say(format!("final purity {}", num(purity(last))));
        if !det.warnings.is_empty() {
            ctx.say(format!("{} positivity warnings during integration", det.warnings.len()));
        }
        return ctx.write("deterministic.csv", &csv);
    }

    let setup = problem
        .setup
        .as_ref()
        .ok_or_else(|| CliError::Parse("trajectories need a measurement channel `c`".into()))?;
    if !problem.extra.is_empty() {
        return Err(CliError::Parse("trajectories do not support uncontrolled channels `b`".into()));
    }
    if setup.eta() != 1.0 {
        return Err(CliError::Parse("trajectories need perfect detection (eta = 1)".into()));
    }
    let scheme = sim.scheme.unwrap_or(if setup.feedback().norm() > 0.0 { Scheme::Feedback } else { Scheme::Plain });
    let mut config = TrajectoryConfig::new(sim.dt, sim.t_final, sim.seed, sim.n_traj, scheme).with_sample_every(every);
    if let Some(integrator) = sim.integrator {
        config = config.with_integrator(integrator);
    }
    let averaged = match scheme {
        Scheme::Feedback => problem.system.clone(),
        Scheme::Plain => LindbladSystem::new(setup.hamiltonian().clone(), vec![setup.measurement().clone()])?,
    };
    let records = simulate(&problem.initial, setup, &config)?;
    let det = integrate_sampled(&averaged, &problem.initial, sim.t_final, sim.dt, every)?;
    let mean = ensemble_average(&records)?;

    let mut csv = String::from("time,traj_id,purity");
    csv += if two_qubit { ",concurrence" } else { "" };
    csv += if target.is_some() { ",fidelity_to_target,dy\n" } else { ",dy\n" };
    let step_of = |t: f64| (t / sim.dt).round() as usize;
    for r in &records {
        let mut prev = 0;
        for (t, rho) in r.times.iter().zip(&r.states) {
            let k = step_of(*t);
            let dy: f64 = r.record[prev..k].iter().sum();
            prev = k;
            write!(csv, "{},{},{}", num(*t), r.index, num(purity(rho))).unwrap();
            if two_qubit {
                write!(csv, ",{}", num(concurrence(rho)?)).unwrap();
            }
            if let Some(tg) = target {
                write!(csv, ",{}", num(fidelity_to_pure(rho, tg))).unwrap();
            }
            writeln!(csv, ",{}", num(dy)).unwrap();
        }
    }

    let weight = 1.0 / records.len() as f64;
    let mut summary = String::from("time,mean_purity");
    summary += if target.is_some() { ",mean_fidelity" } else { "" };
    summary += ",trace_distance_to_deterministic\n";
    let mut final_line = String::new();
    for (k, t) in records[0].times.iter().enumerate() {
        let mean_purity = records.iter().map(|r| purity(&r.states[k])).sum::<f64>() * weight;
        let distance = trace_distance(mean[k].matrix(), det.states[k].matrix());
        write!(summary, "{},{}", num(*t), num(mean_purity)).unwrap();
        final_line = format!("T = {t}: mean purity {mean_purity:.6}");
        if let Some(tg) = target {
            let f = records.iter().map(|r| fidelity_to_pure(&r.states[k], tg)).sum::<f64>() * weight;
            write!(summary, ",{}", num(f)).unwrap();
            write!(final_line, ", mean fidelity {f:.6}").unwrap();
        }
        writeln!(summary, ",{}", num(distance)).unwrap();
        write!(final_line, ", distance to averaged equation {distance:.3e}").unwrap();
    }
    ctx.say(format!("{} trajectories ({:?} scheme)", records.len(), scheme));
    ctx.say(final_line);
    ctx.write("trajectories.csv", &csv)?;
    ctx.write("summary.csv", &summary)
}

#[derive(Debug, Serialize)]
struct DfsReport {
    decoherence_free: bool,
    d: usize,
    strict: bool,
    alpha: Vec<[f64; 2]>,
    steady_states: Vec<CertificateJson>,
}

fn cmd_dfs(ctx: &Context, problem: &Problem, d: usize, strict: bool) -> Result<(), CliError> {
    let n = problem.system.dim();
    if d == 0 || d >= n {
        return Err(CliError::Parse(format!("--d must satisfy 1 ≤ d < {n}, got {d}")));
    }
    let report = match dfs_check(&problem.system, d, strict, &ctx.tol)? {
        None => {
            ctx.say(format!("the first {d} basis states do not span a decoherence-free subspace"));
            DfsReport { decoherence_free: false, d, strict, alpha: Vec::new(), steady_states: Vec::new() }
        }
        Some(spec) => {
            let states = (0..d)
                .map(|i| dfs_steady_state(&spec, i, &ctx.tol).map(|c| CertificateJson::from(&c)))
                .collect::<Result<Vec<_>, _>>()?;
            ctx.say(format!("decoherence-free subspace of dimension {d}"));
            for (k, a) in spec.alpha.iter().enumerate() {
                ctx.say(format!("alpha_{k} = {:+.9}{:+.9}i", a.re, a.im));
            }
            say_certificates(ctx, &states);
            DfsReport { decoherence_free: true, d, strict, alpha: spec.alpha.iter().copied().map(pair).collect(), steady_states: states }
        }
    };
    ctx.write_json("dfs.json", &report)
}
