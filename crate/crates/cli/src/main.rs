use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use telecalc::diagram::{parse_document, render_ascii, serialize, Diagram};
use telecalc::gate::{GateExpr, TwoQubitGate};
use telecalc::linalg::{fmt_complex, DEFAULT_TOL};
use telecalc::pauli::{classify_hierarchy, correction_table, CuKind, Outcome};
use telecalc::protocols::{run, OutcomePolicy, ProtocolSpec, RunConfig};
use telecalc::rewrite::{normalize, verify, verify_equation, ScalarReport, Stuck};
use telecalc::statevec::{fidelity, parse_state, sample_bell, QuantumState};

#[derive(Parser)]
#[command(name = "telecalc", version, about = "Cup/cap diagrams, rewriting and teleportation protocols")]
struct Cli {
    /// Numerical tolerance for every comparison.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tolerance: f64,
    /// Seed for random inputs and sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    machine: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a diagram and check it against direct evaluation. A second
    /// diagram in the file is taken as the claimed right-hand side.
    Verify { file: PathBuf },
    /// Print (or write) the normal form with its rewrite trace.
    Normalize {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw diagrams as text.
    Render { file: PathBuf },
    /// Run a protocol on the simulator.
    Simulate {
        #[command(subcommand)]
        protocol: SimulateCommand,
    },
    /// Check a protocol over its Bell outcomes.
    Protocol {
        /// teleport, chained, gate-single, gate-cu, ghz, ghz-hadamard or chi
        name: String,
        #[arg(long)]
        gate: Option<String>,
        /// `all`, `sample`, or outcome bits such as `10` or `10,01`
        #[arg(long, default_value = "all")]
        outcomes: String,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        /// Hops for `chained`.
        #[arg(long, default_value_t = 2)]
        hops: usize,
        /// Random input states per outcome.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Print the correction table for a controlled gate.
    CorrectionTable {
        #[arg(long, value_parser = ["cnot", "cz"])]
        gate: String,
    },
    /// Clifford hierarchy level of a one- or two-qubit gate.
    Classify {
        #[arg(long)]
        gate: String,
    },
}

#[derive(Subcommand)]
enum SimulateCommand {
    Teleport {
        /// Comma-separated amplitudes, e.g. `0.6,0.8j`.
        #[arg(long)]
        state: String,
        #[arg(long, conflicts_with = "shots", required_unless_present = "shots")]
        outcome: Option<String>,
        #[arg(long)]
        shots: Option<u64>,
    },
}

/// Usage, parse and I/O failures.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type Outcome2 = Result<bool, UsageError>;

fn read_diagrams(path: &Path) -> Result<Vec<Diagram>, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(value: &T) -> Result<(), UsageError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_verify(cli: &Cli, file: &Path) -> Outcome2 {
    let ds = read_diagrams(file)?;
    let report = match ds.as_slice() {
        [d] => verify(d, cli.tolerance)?,
        [lhs, rhs] => verify_equation(lhs, rhs, cli.tolerance)?,
        _ => return Err(UsageError(format!("{}: expected one or two diagrams, found {}", file.display(), ds.len()))),
    };
    if cli.machine {
        emit(&report)?;
    } else {
        print!("{}", report.human());
    }
    Ok(report.passed())
}

#[derive(Serialize)]
struct NormalizeReport {
    name: String,
    scalar: ScalarReport,
    trace: Vec<String>,
    stuck: Vec<Stuck>,
    budget_exhausted: bool,
    normal_form: String,
}

fn cmd_normalize(cli: &Cli, file: &Path, output: Option<&Path>) -> Outcome2 {
    let ds = read_diagrams(file)?;
    let mut ok = true;
    for d in &ds {
        let n = normalize(d)?;
        ok &= !n.budget_exhausted;
        let text = serialize(&n.diagram);
        let report = NormalizeReport {
            name: d.name.clone(),
            scalar: n.diagram.scalar.into(),
            trace: n.trace.lines(),
            stuck: n.stuck,
            budget_exhausted: n.budget_exhausted,
            normal_form: text.clone(),
        };
        if let Some(path) = output {
            fs::write(path, &text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        }
        if cli.machine {
            emit(&report)?;
            continue;
        }
        if output.is_none() {
            print!("{text}");
        }
        for line in &report.trace {
            println!("# {line}");
        }
        for s in &report.stuck {
            println!("# stuck at {}: {}", s.locus.join(","), s.reason);
        }
        if report.budget_exhausted {
            println!("# step budget exhausted");
        }
    }
    Ok(ok)
}

fn cmd_render(cli: &Cli, file: &Path) -> Outcome2 {
    let ds = read_diagrams(file)?;
    if cli.machine {
        let pics: BTreeMap<String, String> = ds.iter().map(|d| (d.name.clone(), render_ascii(d))).collect();
        emit(&pics)?;
    } else {
        for d in &ds {
            println!("{}", d.name);
            println!("{}", render_ascii(d));
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct TeleportRecord {
    outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<u64>,
    probability: f64,
    pre_correction: Vec<String>,
    correction: String,
    fidelity: f64,
    pass: bool,
}

#[derive(Serialize)]
struct TeleportReport {
    input: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_norm: Option<f64>,
    seed: u64,
    pass: bool,
    records: Vec<TeleportRecord>,
}

fn parse_outcome(text: &str) -> Result<Outcome, UsageError> {
    match OutcomePolicy::parse(text, 0)? {
        OutcomePolicy::Fixed(v) if v.len() == 1 && v[0].len() == 1 => Ok(v[0][0]),
        _ => Err(UsageError(format!("expected a single outcome like 10, got `{text}`"))),
    }
}

fn amps(s: &QuantumState) -> Vec<String> {
    s.amplitudes().iter().map(|&a| fmt_complex(a)).collect()
}

fn cmd_simulate_teleport(cli: &Cli, state: &str, outcome: Option<&str>, shots: Option<u64>) -> Outcome2 {
    let (alpha, off_norm) = parse_state(state)?;
    if alpha.n_qubits() != 1 {
        return Err(UsageError(format!("teleport takes a 1-qubit state, got {} amplitudes", alpha.amplitudes().len())));
    }
    if let Some(n) = off_norm {
        eprintln!("warning: input norm {n} renormalized to 1");
    }
    let spec = ProtocolSpec::Teleport;
    let counts: Vec<(Outcome, Option<u64>)> = match (outcome, shots) {
        (Some(o), _) => vec![(parse_outcome(o)?, None)],
        (None, Some(n)) => {
            let s = alpha.tensor(&QuantumState::bell(Outcome::new(false, false)));
            let draws = sample_bell(&s, 0, 1, cli.seed, n)?;
            Outcome::ALL
                .iter()
                .map(|&o| (o, Some(draws.iter().filter(|&&d| d == o).count() as u64)))
                .filter(|(_, c)| c.is_some_and(|c| c > 0))
                .collect()
        }
        (None, None) => return Err(UsageError("give --outcome or --shots".into())),
    };
    let mut records = Vec::new();
    for (o, count) in counts {
        let sim = spec.simulate(&alpha, &[o])?;
        let corr = spec.correction(&[o])?;
        let fixed = sim.post_state.apply_gate(&corr.matrix, &[0])?;
        let f = fidelity(&fixed, &alpha)?;
        records.push(TeleportRecord {
            outcome: o.to_string(),
            count,
            probability: sim.probability,
            pre_correction: amps(&sim.post_state),
            correction: corr.label,
            fidelity: f,
            pass: f >= 1.0 - cli.tolerance,
        });
    }
    let report = TeleportReport {
        input: amps(&alpha),
        input_norm: off_norm,
        seed: cli.seed,
        pass: records.iter().all(|r| r.pass),
        records,
    };
    if cli.machine {
        emit(&report)?;
    } else {
        println!("input {}", report.input.join(", "));
        for r in &report.records {
            let count = r.count.map(|c| format!(" x{c}")).unwrap_or_default();
            println!(
                "outcome {}{count}  p={:.6}  pre-correction [{}]  correction {}  fidelity {:.12}",
                r.outcome,
                r.probability,
                r.pre_correction.join(", "),
                r.correction,
                r.fidelity
            );
        }
        println!("result: {}", if report.pass { "pass" } else { "fail" });
    }
    Ok(report.pass)
}

fn cmd_protocol(cli: &Cli, name: &str, gate: Option<&str>, outcomes: &str, shots: u64, hops: usize, trials: usize) -> Outcome2 {
    let spec = ProtocolSpec::from_name(name, gate, hops)?;
    let policy = OutcomePolicy::parse(outcomes, shots)?;
    let cfg = RunConfig { trials, seed: cli.seed, tol: cli.tolerance };
    let report = run(&spec, &policy, &cfg)?;
    if cli.machine {
        emit(&report)?;
    } else {
        print!("{}", report.human());
    }
    Ok(report.pass)
}

#[derive(Serialize)]
struct TableRow {
    m: String,
    n: String,
    q: String,
    p: String,
    correction: String,
}

fn cmd_correction_table(cli: &Cli, gate: &str) -> Outcome2 {
    let kind = if gate == "cz" { CuKind::Cz } else { CuKind::Cnot };
    let rows: Vec<TableRow> = correction_table(kind)
        .into_values()
        .map(|e| TableRow {
            m: e.first.to_string(),
            n: e.second.to_string(),
            q: e.q.to_string(),
            p: e.p.to_string(),
            correction: format!("{}⊗{}", e.q.dagger(), e.p.dagger()),
        })
        .collect();
    if cli.machine {
        emit(&rows)?;
    } else {
        println!("{gate}: M = X^i1 Z^j1, N = X^i2 Z^j2");
        println!("i1j1 i2j2  Q P");
        for r in &rows {
            println!("{}   {}    Q={} P={}", r.m, r.n, r.q, r.p);
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct ClassifyReport {
    gate: String,
    qubits: usize,
    level: String,
}

fn cmd_classify(cli: &Cli, gate: &str) -> Outcome2 {
    let (m, qubits) = match gate.parse::<GateExpr>() {
        Ok(g) => (g.matrix(), 1),
        Err(e1) => match gate.parse::<TwoQubitGate>() {
            Ok(g) => (g.matrix(), 2),
            Err(_) => return Err(UsageError(format!("cannot parse gate `{gate}`: {e1}"))),
        },
    };
    let level = classify_hierarchy(&m, qubits, cli.tolerance)?;
    let report = ClassifyReport { gate: gate.to_string(), qubits, level: level.to_string() };
    if cli.machine {
        emit(&report)?;
    } else {
        println!("{}", report.level);
    }
    Ok(true)
}

fn dispatch(cli: &Cli) -> Outcome2 {
    match &cli.command {
        Command::Verify { file } => cmd_verify(cli, file),
        Command::Normalize { file, output } => cmd_normalize(cli, file, output.as_deref()),
        Command::Render { file } => cmd_render(cli, file),
        Command::Simulate { protocol: SimulateCommand::Teleport { state, outcome, shots } } => {
            cmd_simulate_teleport(cli, state, outcome.as_deref(), *shots)
        }
        Command::Protocol { name, gate, outcomes, shots, hops, trials } => {
            cmd_protocol(cli, name, gate.as_deref(), outcomes, *shots, *hops, *trials)
        }
        Command::CorrectionTable { gate } => cmd_correction_table(cli, gate),
        Command::Classify { gate } => cmd_classify(cli, gate),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
