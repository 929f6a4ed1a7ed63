//! `dqcrcx`: compile monolithic circuits into distributed ones and estimate
//! their fidelity under noise.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use dqcrcx_core::circuit::{Circuit, GateLabel};
use dqcrcx_core::distribute::{distribute, parse_bundle, write_bundle, Bundle};
use dqcrcx_core::harness::{self, depth_analysis, load_suite, run_suite, SuiteOptions};
use dqcrcx_core::library::{CircuitSpec, Family};
use dqcrcx_core::partition::{
    cut_weight, gp_assignment, naive_assignment, parse_network, Assignment, InteractionGraph,
    NetworkConfig,
};
use dqcrcx_core::sim::{density, estimate_fidelity, simulate_ideal, FidelityEstimate, NoiseParams};
use dqcrcx_core::text;
use dqcrcx_core::transpile::{transpile, transpile_with_report};

#[derive(Parser)]
#[command(
    name = "dqcrcx",
    version,
    about = "Distributed quantum circuit compiler and noise simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark circuit as circuit text.
    Gen(GenArgs),
    /// Print shape statistics for a circuit or bundle file.
    Inspect { file: PathBuf },
    /// Rewrite a circuit into the {X, H, RZ, CX} basis.
    Transpile {
        file: PathBuf,
        /// Write the transpiled circuit here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Print gate histograms and the equivalence check as key=value
        /// lines (to stderr, keeping stdout pipeable).
        #[arg(long)]
        report: bool,
    },
    /// Assign logical qubits to QPUs; prints qubit,qpu,slot rows.
    Partition {
        file: PathBuf,
        /// Network spec, e.g. "2x4+2" or "4+2,3+1".
        #[arg(long)]
        network: String,
        /// "naive" or "gp".
        #[arg(long, default_value = "gp")]
        schedule: String,
        /// Restart seed for the gp schedule.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Expand a circuit into a distributed bundle for a network.
    Build {
        file: PathBuf,
        #[arg(long)]
        network: String,
        #[arg(long, default_value = "gp")]
        schedule: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the bundle here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Estimate the fidelity of a noisy circuit against its ideal output.
    /// Prints one CSV line: mean,std_err,n_traj,convention.
    Simulate {
        /// Circuit text or a bundle produced by `build`.
        file: PathBuf,
        /// Monolithic reference circuit (required for bundles, and for
        /// plain circuits containing measurements or resets).
        #[arg(long)]
        source: Option<PathBuf>,
        /// Noise rates as "p1,p2,p_ro" (default 0.001,0.005,0.005).
        #[arg(long)]
        noise: Option<String>,
        #[arg(long, default_value_t = 20_000)]
        trajectories: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Use the exact density-matrix oracle (max 10 qubits) instead of
        /// Monte Carlo trajectories.
        #[arg(long)]
        oracle: bool,
    },
    /// Run every experiment in one config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write results.csv / aggregates.csv / depth.csv here instead of
        /// printing the records to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trajectories: Option<usize>,
        /// Replace each experiment's seed list with 1..=N.
        #[arg(long)]
        seeds: Option<usize>,
        /// Record wall_time_s as 0 for byte-stable output.
        #[arg(long)]
        zero_wall: bool,
    },
    /// Run an experiment suite (default: the shipped 19-row grid) and write
    /// results.csv, aggregates.csv, and depth.csv.
    Suite {
        /// Suite config; defaults to the built-in grid.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        trajectories: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Skip experiments needing more wires than this (default 24).
        #[arg(long)]
        max_width: Option<usize>,
        /// CI profile: 2000 trajectories, width cap 16, zeroed wall times.
        #[arg(long)]
        ci: bool,
    },
    /// Print the structural depth comparison table (no simulation).
    Depth {
        /// Suite config; defaults to the built-in grid.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    /// ghz, grover, vqc, or random.
    #[arg(long)]
    family: String,
    #[arg(long)]
    qubits: usize,
    /// Generator seed (vqc/random).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Grover: marked bitstring (default all ones).
    #[arg(long)]
    marked: Option<String>,
    /// Grover: iteration count (default floor(pi/4 * sqrt(2^n))).
    #[arg(long)]
    iterations: Option<usize>,
    /// VQC: layer count (default 2).
    #[arg(long)]
    layers: Option<usize>,
    /// Random: CX count (default 3n).
    #[arg(long)]
    two_qubit_gates: Option<usize>,
    /// Random: single-qubit gate count (default 3n).
    #[arg(long)]
    one_qubit_gates: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    if let Ok(v) = std::env::var("DQCRCX_THREADS") {
        let n: usize = v
            .parse()
            .context("DQCRCX_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("failed to size the thread pool")?;
    }
    match Cli::parse().command {
        Command::Gen(args) => gen(args),
        Command::Inspect { file } => inspect(&file),
        Command::Transpile { file, out, report } => transpile_cmd(&file, out.as_deref(), report),
        Command::Partition {
            file,
            network,
            schedule,
            seed,
        } => partition_cmd(&file, &network, &schedule, seed),
        Command::Build {
            file,
            network,
            schedule,
            seed,
            out,
        } => build_cmd(&file, &network, &schedule, seed, out.as_deref()),
        Command::Simulate {
            file,
            source,
            noise,
            trajectories,
            seed,
            oracle,
        } => simulate_cmd(
            &file,
            source.as_deref(),
            noise.as_deref(),
            trajectories,
            seed,
            oracle,
        ),
        Command::Run {
            config,
            out,
            trajectories,
            seeds,
            zero_wall,
        } => {
            let configs = load_suite(&fs::read_to_string(&config)?)?;
            let opts = SuiteOptions {
                max_width: usize::MAX,
                trajectories,
                seed_count: seeds,
                zero_wall_time: zero_wall,
            };
            finish_suite(&configs, &opts, out.as_deref())
        }
        Command::Suite {
            config,
            seeds,
            trajectories,
            out,
            max_width,
            ci,
        } => {
            let configs = load_configs(config.as_deref())?;
            let opts = SuiteOptions {
                max_width: max_width.unwrap_or(if ci { 16 } else { 24 }),
                trajectories: trajectories.or(if ci { Some(2000) } else { None }),
                seed_count: seeds,
                zero_wall_time: ci,
            };
            finish_suite(&configs, &opts, Some(&out))
        }
        Command::Depth { config } => {
            let configs = load_configs(config.as_deref())?;
            print!("{}", harness::write_depth(&depth_analysis(&configs)?));
            Ok(())
        }
    }
}

fn load_configs(path: Option<&Path>) -> Result<Vec<harness::ExperimentConfig>> {
    match path {
        Some(p) => Ok(load_suite(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?),
        None => Ok(harness::builtin_grid()?),
    }
}

fn finish_suite(
    configs: &[harness::ExperimentConfig],
    opts: &SuiteOptions,
    out: Option<&Path>,
) -> Result<()> {
    let outcome = run_suite(configs, opts)?;
    for (id, width) in &outcome.skipped {
        eprintln!(
            "skipped experiment {id}: needs {width} wires, cap is {}",
            opts.max_width
        );
    }
    let records = harness::write_csv(&outcome.records);
    let aggregates = harness::write_aggregates(&outcome.aggregates);
    let depth = harness::write_depth(&outcome.depth_rows);
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (name, content) in [
                ("results.csv", &records),
                ("aggregates.csv", &aggregates),
                ("depth.csv", &depth),
            ] {
                let path = dir.join(name);
                fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
                eprintln!("wrote {}", path.display());
            }
        }
        None => print!("{records}"),
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let family = match args.family.as_str() {
        "ghz" => Family::Ghz,
        "grover" => Family::Grover,
        "vqc" => Family::Vqc,
        "random" => Family::Random,
        other => bail!("unknown family {other:?} (ghz, grover, vqc, random)"),
    };
    let spec = CircuitSpec {
        family,
        num_qubits: args.qubits,
        seed: args.seed,
        marked: args.marked,
        iterations: args.iterations,
        layers: args.layers,
        two_qubit_gates: args.two_qubit_gates,
        one_qubit_gates: args.one_qubit_gates,
    };
    emit(args.out.as_deref(), &text::serialize(&spec.build()?))
}

/// A file is a bundle if any line carries `@` metadata.
fn load_any(path: &Path) -> Result<(Option<Bundle>, Circuit)> {
    let input = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if input.lines().any(|l| l.trim_start().starts_with('@')) {
        let b = parse_bundle(&input)?;
        Ok((Some(b.clone()), b.circuit))
    } else {
        Ok((None, text::parse(&input)?))
    }
}

fn inspect(file: &Path) -> Result<()> {
    let (bundle, circuit) = load_any(file)?;
    println!(
        "qubits={} clbits={}",
        circuit.num_qubits(),
        circuit.num_clbits()
    );
    println!("instructions={}", circuit.len());
    println!("depth={}", circuit.depth());
    if let Some(b) = bundle {
        println!("network={}", b.net);
        let qpus: Vec<String> = b.assignment.qpu_of.iter().map(|p| p.to_string()).collect();
        println!("assignment={}", qpus.join(" "));
        println!("source_clbits={}", b.source_clbits);
        println!("remote_cx_count={}", b.remote_cx_count());
    }
    for &label in GateLabel::all() {
        let count = circuit.count_gates(&[label]);
        if count > 0 {
            println!("{}={count}", label.name());
        }
    }
    Ok(())
}

fn transpile_cmd(file: &Path, out: Option<&Path>, report: bool) -> Result<()> {
    let (_, circuit) = load_any(file)?;
    if report {
        let (transpiled, rep) = transpile_with_report(&circuit)?;
        for (label, count) in &rep.input_histogram {
            eprintln!("input.{}={count}", label.name());
        }
        for (label, count) in &rep.output_histogram {
            eprintln!("output.{}={count}", label.name());
        }
        match rep.verified {
            Some(dev) => eprintln!("verified={dev:e}"),
            None => eprintln!("verified=skipped"),
        }
        emit(out, &text::serialize(&transpiled))
    } else {
        emit(out, &text::serialize(&transpile(&circuit)?))
    }
}

fn assignment_for(
    circuit: &Circuit,
    net: &NetworkConfig,
    schedule: &str,
    seed: u64,
) -> Result<(Assignment, InteractionGraph, Circuit)> {
    let transpiled = transpile(circuit)?;
    let graph = InteractionGraph::from_circuit(&transpiled)?;
    let a = match schedule {
        "naive" => naive_assignment(circuit.num_qubits(), net)?,
        "gp" => gp_assignment(&graph, net, seed)?,
        other => bail!("unknown schedule {other:?} (naive or gp)"),
    };
    Ok((a, graph, transpiled))
}

fn partition_cmd(file: &Path, network: &str, schedule: &str, seed: u64) -> Result<()> {
    let (_, circuit) = load_any(file)?;
    let net = parse_network(network)?;
    let (a, graph, _) = assignment_for(&circuit, &net, schedule, seed)?;
    println!("qubit,qpu,slot");
    for q in 0..a.num_qubits() {
        println!("{q},{},{}", a.qpu_of[q], a.slot_of(q));
    }
    println!("cut_weight={}", cut_weight(&graph, &a));
    Ok(())
}

fn build_cmd(
    file: &Path,
    network: &str,
    schedule: &str,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let (_, circuit) = load_any(file)?;
    let net = parse_network(network)?;
    let (a, _, transpiled) = assignment_for(&circuit, &net, schedule, seed)?;
    let d = distribute(&transpiled, &a, &net)?;
    eprintln!(
        "total_qubits={} remote_cx_count={} depth={}",
        d.circuit.num_qubits(),
        d.remote_cx_count,
        d.depth()
    );
    emit(out, &write_bundle(&d))
}

fn parse_noise(spec: Option<&str>) -> Result<NoiseParams> {
    match spec {
        None => Ok(NoiseParams::default()),
        Some(s) => {
            let parts: Vec<&str> = s.split(',').collect();
            if parts.len() != 3 {
                bail!("--noise wants three comma-separated rates: p1,p2,p_ro");
            }
            let rate = |i: usize| -> Result<f64> {
                parts[i]
                    .trim()
                    .parse()
                    .with_context(|| format!("bad noise rate {:?}", parts[i]))
            };
            let noise = NoiseParams {
                p1: rate(0)?,
                p2: rate(1)?,
                p_ro: rate(2)?,
            };
            noise.validate()?;
            Ok(noise)
        }
    }
}

fn simulate_cmd(
    file: &Path,
    source: Option<&Path>,
    noise: Option<&str>,
    trajectories: usize,
    seed: u64,
    oracle: bool,
) -> Result<()> {
    let noise = parse_noise(noise)?;
    let (bundle, circuit) = load_any(file)?;
    let reference = match source {
        Some(p) => {
            let mono = text::parse(
                &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
            )?;
            Some(mono)
        }
        None => None,
    };
    let (qubit_map, ideal) = match (&bundle, &reference) {
        (Some(b), Some(mono)) => {
            let layout = b.layout()?;
            if mono.num_qubits() != layout.qubit_map().len() {
                bail!(
                    "--source has {} qubits but the bundle assigns {}",
                    mono.num_qubits(),
                    layout.qubit_map().len()
                );
            }
            (layout.qubit_map().to_vec(), simulate_ideal(mono)?.dense())
        }
        (Some(_), None) => {
            bail!("a bundle needs --source <monolithic circuit> for the reference state")
        }
        (None, Some(mono)) => (
            (0..mono.num_qubits()).collect(),
            simulate_ideal(mono)?.dense(),
        ),
        (None, None) => {
            let ideal = simulate_ideal(&circuit).context(
                "cannot derive the reference state from a circuit with measurements or resets; pass --source",
            )?;
            ((0..circuit.num_qubits()).collect(), ideal.dense())
        }
    };
    if oracle {
        let f = density::exact_fidelity(&circuit, &qubit_map, &ideal, &noise)?;
        println!("{f},0,0,{}", FidelityEstimate::CONVENTION);
    } else {
        let est = estimate_fidelity(&circuit, &qubit_map, &ideal, &noise, trajectories, seed)?;
        println!(
            "{},{},{},{}",
            est.fidelity,
            est.std_err,
            est.n_trajectories,
            FidelityEstimate::CONVENTION
        );
    }
    Ok(())
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{content}"),
    }
    Ok(())
}
