//! `hobs`: analyze, synthesize, certify and simulate distributed hybrid
//! observers described by a JSON scenario file.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hybrid_observer::certification::{
    assemble_error_system, check_iss_bound, compute_certificate, monodromy, DEFAULT_GRID_POINTS,
};
use hybrid_observer::decomposition::{build_decomposition, find_hop_depths, HopDepthSearch};
use hybrid_observer::scenario::{certificate_to_json, GainsFile, Problem, ScenarioFile, RING4};
use hybrid_observer::simulator::{measure_decay_rate, simulate, DisturbanceSpec, Variant};
use hybrid_observer::synthesis::{synthesize, verify_property1, BlockKind};
use hybrid_observer::{Complex64, Error, IssCertificate, MultiHopDecomposition, ObserverGains, Tolerance};

#[derive(Parser)]
#[command(name = "hobs", version, about = "Distributed hybrid observer toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multi-hop decomposition and collective detectability test.
    Analyze(AnalyzeArgs),
    /// Design local and consensus gains and check their closed-loop blocks.
    Synthesize(SynthesizeArgs),
    /// Compute the ISS certificate of the error system.
    Certify(CertifyArgs),
    /// Simulate plant and observers and write the trajectory as CSV.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct Input {
    /// Scenario file, or `@ring4` for the bundled four-agent ring.
    scenario: String,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: Input,
    /// Write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[command(flatten)]
    input: Input,
    /// Write the gains document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    input: Input,
    /// Write the certificate here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use this gains document instead of synthesizing.
    #[arg(long)]
    gains: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Nominal,
    Jitter,
    Delay,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: Input,
    /// Write the trajectory CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use this gains document instead of synthesizing.
    #[arg(long)]
    gains: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Timer jitter bound for the jitter variant.
    #[arg(long)]
    eps_tau: Option<f64>,
    /// Transmission delay for the delay variant.
    #[arg(long)]
    delta: Option<f64>,
    /// Disturbances; on by default for nominal runs, off for jitter and delay.
    #[arg(long, value_enum)]
    noise: Option<Switch>,
    #[arg(long)]
    t_final: Option<f64>,
    /// Integration step.
    #[arg(long)]
    step: Option<f64>,
}

/// Exit status and message of a failed command.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl std::fmt::Display) -> Self {
        Failure {
            code: 1,
            message: message.to_string(),
        }
    }

    fn math(message: impl std::fmt::Display) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Synthesize(args) => synthesize_cmd(args),
        Command::Certify(args) => certify(args),
        Command::Simulate(args) => simulate_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(input: &Input) -> Result<Problem, Failure> {
    let text = if input.scenario == "@ring4" {
        RING4.to_string()
    } else {
        fs::read_to_string(&input.scenario).map_err(|e| Failure::input(format!("{}: {e}", input.scenario)))?
    };
    let file = ScenarioFile::parse(&text).map_err(|e| Failure::input(format!("{}: {e}", input.scenario)))?;
    file.to_problem()
        .map_err(|e| Failure::input(format!("{}: {e}", input.scenario)))
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn search(problem: &Problem, tol: &Tolerance) -> Result<HopDepthSearch, Failure> {
    find_hop_depths(&problem.plant, &problem.graph, problem.targets.alpha, None, tol).map_err(Failure::math)
}

fn decompose(problem: &Problem, tol: &Tolerance) -> Result<MultiHopDecomposition, Failure> {
    let found = search(problem, tol)?;
    let depths = found.into_depths().map_err(Failure::math)?;
    build_decomposition(&problem.plant, &problem.graph, &depths, tol).map_err(Failure::math)
}

fn gains_for(
    problem: &Problem,
    decomp: &MultiHopDecomposition,
    path: Option<&Path>,
    tol: &Tolerance,
) -> Result<ObserverGains, Failure> {
    match path {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            GainsFile::parse(&text)
                .and_then(|doc| doc.to_gains(decomp, &problem.graph, &problem.plant))
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
        }
        None => {
            synthesize(decomp, &problem.plant, &problem.graph, &problem.targets, tol).map_err(Failure::math)
        }
    }
}

fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

#[derive(Serialize)]
struct AgentReport {
    agent: usize,
    hop_depth: Option<usize>,
    observable_dims: Vec<usize>,
    hop_dims: Vec<usize>,
    witness: Option<[f64; 2]>,
}

#[derive(Serialize)]
struct AnalyzeReport {
    alpha: f64,
    max_hop: usize,
    detectable: bool,
    agents: Vec<AgentReport>,
}

fn analyze(args: AnalyzeArgs) -> CmdResult {
    let problem = load(&args.input)?;
    let tol = Tolerance::default();
    let found = search(&problem, &tol)?;
    let decomp = match found.depths() {
        Some(depths) => {
            Some(build_decomposition(&problem.plant, &problem.graph, &depths, &tol).map_err(Failure::math)?)
        }
        None => None,
    };
    let agents: Vec<AgentReport> = found
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| AgentReport {
            agent: i + 1,
            hop_depth: a.hop_depth,
            observable_dims: a.observable_dims.clone(),
            hop_dims: decomp
                .as_ref()
                .map(|d| (0..=d.hop_depth(i) + 1).map(|rho| d.hop_dim(i, rho)).collect())
                .unwrap_or_default(),
            witness: a.witness.map(complex_pair),
        })
        .collect();
    let detectable = found.is_collectively_detectable();

    println!(
        "n = {}, p = {}, alpha = {}, hop cap = {}",
        problem.plant.n(),
        problem.plant.p(),
        found.alpha,
        found.max_hop
    );
    println!("agent  hop depth  dim O per hop     dim W per hop");
    for (a, s) in agents.iter().zip(&found.agents) {
        let depth = a.hop_depth.map_or("-".to_string(), |l| l.to_string());
        println!(
            "{:>5}  {:>9}  {:<16}  {}",
            a.agent,
            depth,
            format!("{:?}", a.observable_dims),
            if a.hop_dims.is_empty() {
                "-".to_string()
            } else {
                format!("{:?}", a.hop_dims)
            }
        );
        if let Some(z) = s.witness {
            println!("       undetectable mode {}", format_complex(z));
        }
    }
    println!(
        "collective {}-detectability: {}",
        found.alpha,
        if detectable { "pass" } else { "FAIL" }
    );
    if let Some(path) = &args.out {
        let report = AnalyzeReport {
            alpha: found.alpha,
            max_hop: found.max_hop,
            detectable,
            agents,
        };
        write_file(
            path,
            &serde_json::to_string_pretty(&report).expect("report serialises"),
        )?;
    }
    if detectable {
        Ok(())
    } else {
        Err(Failure::math(format!(
            "agents {:?} are not {}-detectable",
            found.failing_agents().iter().map(|i| i + 1).collect::<Vec<_>>(),
            found.alpha
        )))
    }
}

fn synthesize_cmd(args: SynthesizeArgs) -> CmdResult {
    let problem = load(&args.input)?;
    let tol = Tolerance::default();
    let decomp = decompose(&problem, &tol)?;
    let gains = gains_for(&problem, &decomp, None, &tol)?;
    let report = verify_property1(
        &decomp,
        &problem.plant,
        &problem.graph,
        &gains,
        &problem.targets,
        &tol,
    )
    .map_err(Failure::math)?;
    println!("agent  hop  block          dim  value         bound         ok");
    for b in &report.blocks {
        let kind = match b.kind {
            BlockKind::Flow => "abscissa",
            BlockKind::Jump => "radius",
            BlockKind::Unobservable => "radius (open)",
        };
        println!(
            "{:>5}  {:>3}  {:<13}  {:>3}  {:>12.6e}  {:>12.6e}  {}",
            b.agent + 1,
            b.hop,
            kind,
            b.dim,
            b.value,
            b.bound,
            if b.pass { "yes" } else { "NO" }
        );
    }
    if let Some(path) = &args.out {
        write_file(path, &GainsFile::from_gains(&gains).to_json())?;
    }
    if report.pass() {
        Ok(())
    } else {
        Err(Failure::math(format!(
            "{} block(s) miss their target",
            report.failures().count()
        )))
    }
}

fn certificate(
    problem: &Problem,
    decomp: &MultiHopDecomposition,
    gains: &ObserverGains,
) -> Result<(IssCertificate, f64), Failure> {
    let es = assemble_error_system(
        decomp,
        &problem.plant,
        gains,
        &problem.graph,
        problem.targets.t_period,
    )
    .map_err(Failure::math)?;
    let mono = monodromy(&es).map_err(Failure::math)?;
    match compute_certificate(&es, problem.targets.alpha, DEFAULT_GRID_POINTS) {
        Ok(cert) => Ok((cert, mono.eta_raw)),
        Err(Error::NotCertified(r)) => Err(Failure::math(format!("not certified: eta_raw = {r}"))),
        Err(e) => Err(Failure::math(e)),
    }
}

fn certify(args: CertifyArgs) -> CmdResult {
    let problem = load(&args.input)?;
    let tol = Tolerance::default();
    let decomp = decompose(&problem, &tol)?;
    let gains = gains_for(&problem, &decomp, args.gains.as_deref(), &tol)?;
    let (cert, eta_raw) = certificate(&problem, &decomp, &gains)?;
    println!("eta_raw        {eta_raw:.12}");
    println!("eta            {:.12}", cert.eta);
    println!("alpha_achieved {:.12}", cert.alpha_achieved);
    println!("kappa          {:.6e}", cert.kappa);
    println!("gamma_c        {:.6e}", cert.gamma_c);
    println!("gamma_d        {:.6e}", cert.gamma_d);
    if let Some(path) = &args.out {
        write_file(path, &certificate_to_json(&cert))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct IssSummary {
    pass: bool,
    samples: usize,
    violations: usize,
    worst_margin: f64,
    steady_state_bound: f64,
}

#[derive(Serialize)]
struct SimulationSummary {
    variant: &'static str,
    t_final: f64,
    step: f64,
    samples: usize,
    jumps: usize,
    noise: bool,
    final_error_norms: Vec<f64>,
    final_total_error: f64,
    peak_error_after_2s: f64,
    decay_rate: Option<f64>,
    iss: Option<IssSummary>,
}

fn simulate_cmd(args: SimulateArgs) -> CmdResult {
    let mut problem = load(&args.input)?;
    let sim = &mut problem.sim;
    if let Some(t) = args.t_final {
        sim.t_final = t;
    }
    if let Some(h) = args.step {
        sim.h = h;
    }
    if let Some(seed) = args.seed {
        sim.disturbance.seed = seed;
    }
    let (file_eps, file_delta) = match sim.variant {
        Variant::Jitter { eps_tau } => (Some(eps_tau), None),
        Variant::Delay { delta } => (None, Some(delta)),
        Variant::Nominal => (None, None),
    };
    let variant = match args.variant {
        Some(VariantArg::Nominal) => Variant::Nominal,
        Some(VariantArg::Jitter) => Variant::Jitter {
            eps_tau: args.eps_tau.or(file_eps).unwrap_or(0.0),
        },
        Some(VariantArg::Delay) => Variant::Delay {
            delta: args.delta.or(file_delta).unwrap_or(0.0),
        },
        None => match sim.variant {
            Variant::Jitter { eps_tau } => Variant::Jitter {
                eps_tau: args.eps_tau.unwrap_or(eps_tau),
            },
            Variant::Delay { delta } => Variant::Delay {
                delta: args.delta.unwrap_or(delta),
            },
            Variant::Nominal => Variant::Nominal,
        },
    };
    sim.variant = variant;
    let noise = match args.noise {
        Some(s) => s == Switch::On,
        None => variant == Variant::Nominal,
    };
    if !noise {
        sim.disturbance = DisturbanceSpec {
            seed: sim.disturbance.seed,
            ..DisturbanceSpec::zero()
        };
    }

    let tol = Tolerance::default();
    let decomp = decompose(&problem, &tol)?;
    let gains = gains_for(&problem, &decomp, args.gains.as_deref(), &tol)?;
    let cert = certificate(&problem, &decomp, &gains).ok().map(|(c, _)| c);
    let scenario = problem.scenario(decomp, gains);
    scenario.validate().map_err(Failure::input)?;
    let traj = simulate(&scenario).map_err(Failure::math)?;

    if let Some(path) = &args.out {
        let file = fs::File::create(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let mut out = BufWriter::new(file);
        traj.write_csv(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }

    let dist = scenario.disturbance;
    let noisy = dist.d_inf > 0.0 || dist.w_inf > 0.0;
    let last = traj.last();
    let summary = SimulationSummary {
        variant: match variant {
            Variant::Nominal => "nominal",
            Variant::Jitter { .. } => "jitter",
            Variant::Delay { .. } => "delay",
        },
        t_final: scenario.t_final,
        step: scenario.h,
        samples: traj.samples().len(),
        jumps: traj.jump_times().len(),
        noise: noisy,
        final_error_norms: last.agent_errors(),
        final_total_error: last.error_norm(),
        peak_error_after_2s: traj.peak_error_after(2.0),
        decay_rate: if noisy {
            None
        } else {
            measure_decay_rate(&traj).ok()
        },
        iss: match (&cert, noisy, variant) {
            (Some(c), true, Variant::Nominal) => {
                let r = check_iss_bound(&traj, c, dist.d_inf, dist.w_inf);
                Some(IssSummary {
                    pass: r.pass(),
                    samples: r.samples,
                    violations: r.violations,
                    worst_margin: r.worst_margin,
                    steady_state_bound: c.gamma_c * dist.d_inf + c.gamma_d * dist.w_inf,
                })
            }
            _ => None,
        },
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    writeln!(
        lock,
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serialises")
    )
    .map_err(Failure::input)?;
    match &summary.iss {
        Some(iss) if !iss.pass => Err(Failure::math(format!(
            "ISS bound violated at {} samples",
            iss.violations
        ))),
        _ => Ok(()),
    }
}
