//! Experiment harness: TOML experiment configs in, result records out.
//!
//! Every experiment compares a monolithic baseline against one or more
//! distribution schedules (`naive` in-order packing, `gp` graph
//! partitioning) over a list of noise seeds, estimating fidelity by Monte
//! Carlo trajectories. Results serialize to CSV with stable ordering and
//! formatting so repeated runs are byte-identical.

use std::fmt;
use std::time::Instant;

use serde::Deserialize;

use crate::distribute::distribute;
use crate::error::{Error, Result};
use crate::library::CircuitSpec;
use crate::partition::{
    gp_assignment, naive_assignment, parse_network, InteractionGraph, NetworkConfig,
};
use crate::sim::{estimate_fidelity, simulate_ideal, NoiseParams};
use crate::transpile::transpile;

/// How logical qubits reach hardware. Ordering is the CSV row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Schedule {
    /// Single-QPU baseline, no distribution.
    Mono,
    /// Logical qubit order, packed QPU by QPU.
    Naive,
    /// Graph-partitioned placement minimizing the cut.
    Gp,
}

impl Schedule {
    pub fn name(self) -> &'static str {
        match self {
            Schedule::Mono => "mono",
            Schedule::Naive => "naive",
            Schedule::Gp => "gp",
        }
    }

    pub fn parse(s: &str) -> Result<Schedule> {
        match s {
            "mono" => Ok(Schedule::Mono),
            "naive" => Ok(Schedule::Naive),
            "gp" => Ok(Schedule::Gp),
            other => Err(Error::Config(format!("unknown schedule {other:?}"))),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One fully resolved experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub id: String,
    pub circuit: CircuitSpec,
    pub network: NetworkConfig,
    /// Distribution schedules to run; the monolithic baseline always runs.
    pub schedules: Vec<Schedule>,
    pub seeds: Vec<u64>,
    pub n_trajectories: usize,
    pub noise: NoiseParams,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSuite {
    #[serde(default)]
    defaults: RawDefaults,
    #[serde(default, rename = "experiment")]
    experiments: Vec<RawExperiment>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDefaults {
    seeds: Option<Vec<u64>>,
    trajectories: Option<usize>,
    noise: Option<NoiseParams>,
    schedules: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum IdValue {
    Int(i64),
    Str(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    id: Option<IdValue>,
    circuit: CircuitSpec,
    network: String,
    schedules: Option<Vec<String>>,
    seeds: Option<Vec<u64>>,
    trajectories: Option<usize>,
    noise: Option<NoiseParams>,
}

fn parse_schedules(names: &[String]) -> Result<Vec<Schedule>> {
    let mut out = Vec::new();
    for name in names {
        let s = Schedule::parse(name)?;
        if s == Schedule::Mono {
            return Err(Error::Config(
                "the mono baseline always runs; list only naive/gp".into(),
            ));
        }
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out.sort();
    Ok(out)
}

/// Parse a TOML experiment suite. Each `[[experiment]]` inherits anything it
/// does not set from `[defaults]`; built-in defaults are seeds 1..=5,
/// 20000 trajectories, both schedules, and the standard noise rates.
pub fn load_suite(toml_text: &str) -> Result<Vec<ExperimentConfig>> {
    let raw: RawSuite = toml::from_str(toml_text).map_err(|e| Error::Config(e.to_string()))?;
    if raw.experiments.is_empty() {
        return Err(Error::Config("no [[experiment]] tables".into()));
    }
    let default_seeds = raw.defaults.seeds.unwrap_or_else(|| vec![1, 2, 3, 4, 5]);
    let default_traj = raw.defaults.trajectories.unwrap_or(20_000);
    let default_noise = raw.defaults.noise.unwrap_or_default();
    let default_schedules = match &raw.defaults.schedules {
        Some(names) => parse_schedules(names)?,
        None => vec![Schedule::Naive, Schedule::Gp],
    };

    let mut configs = Vec::with_capacity(raw.experiments.len());
    for (i, raw_exp) in raw.experiments.into_iter().enumerate() {
        let id = match raw_exp.id {
            Some(IdValue::Int(n)) => n.to_string(),
            Some(IdValue::Str(s)) => s,
            None => (i + 1).to_string(),
        };
        if id.is_empty() || id.contains(',') || id.contains('\n') {
            return Err(Error::Config(format!("unusable experiment id {id:?}")));
        }
        let network = parse_network(&raw_exp.network)?;
        let schedules = match &raw_exp.schedules {
            Some(names) => parse_schedules(names)?,
            None => default_schedules.clone(),
        };
        let seeds = raw_exp.seeds.unwrap_or_else(|| default_seeds.clone());
        if seeds.is_empty() {
            return Err(Error::Config(format!("experiment {id}: empty seed list")));
        }
        let noise = raw_exp.noise.unwrap_or(default_noise);
        noise.validate()?;
        let cfg = ExperimentConfig {
            id,
            circuit: raw_exp.circuit,
            network,
            schedules,
            seeds,
            n_trajectories: raw_exp.trajectories.unwrap_or(default_traj),
            noise,
        };
        // Catch bad circuit parameters at load time, not mid-suite.
        cfg.circuit.build()?;
        configs.push(cfg);
    }
    Ok(configs)
}

/// The 19-row experiment grid shipped with the repository.
pub fn builtin_grid() -> Result<Vec<ExperimentConfig>> {
    load_suite(include_str!("../../../configs/grid.cfg"))
}

/// One (config, schedule, seed) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub config_id: String,
    pub schedule: Schedule,
    pub seed: u64,
    pub fidelity: f64,
    pub std_err: f64,
    pub remote_cx: usize,
    pub depth: usize,
    pub total_qubits: usize,
    pub wall_time_s: f64,
}

/// Run one experiment: a monolithic baseline plus each configured schedule,
/// once per seed. With `zero_wall` the wall-time column records 0 so output
/// files are byte-stable.
pub fn run_experiment(cfg: &ExperimentConfig, zero_wall: bool) -> Result<Vec<ResultRecord>> {
    let mono = cfg.circuit.build()?;
    let n = mono.num_qubits();
    let ideal = simulate_ideal(&mono)?.dense();
    let transpiled = transpile(&mono)?;
    let graph = InteractionGraph::from_circuit(&transpiled)?;
    let identity_map: Vec<usize> = (0..n).collect();

    let mut records = Vec::new();
    let mut push = |schedule: Schedule,
                    seed: u64,
                    est: crate::sim::FidelityEstimate,
                    remote_cx: usize,
                    depth: usize,
                    total_qubits: usize,
                    started: Instant| {
        records.push(ResultRecord {
            config_id: cfg.id.clone(),
            schedule,
            seed,
            fidelity: est.fidelity,
            std_err: est.std_err,
            remote_cx,
            depth,
            total_qubits,
            wall_time_s: if zero_wall {
                0.0
            } else {
                started.elapsed().as_secs_f64()
            },
        });
    };

    for &seed in &cfg.seeds {
        let started = Instant::now();
        let est = estimate_fidelity(
            &transpiled,
            &identity_map,
            &ideal,
            &cfg.noise,
            cfg.n_trajectories,
            seed,
        )?;
        push(Schedule::Mono, seed, est, 0, transpiled.depth(), n, started);
    }

    for &schedule in &cfg.schedules {
        // The naive placement is seed-independent; build its circuit once.
        let naive_dist = if schedule == Schedule::Naive {
            let a = naive_assignment(n, &cfg.network)?;
            Some(distribute(&transpiled, &a, &cfg.network)?)
        } else {
            None
        };
        for &seed in &cfg.seeds {
            let started = Instant::now();
            let dist = match &naive_dist {
                Some(d) => d.clone(),
                None => {
                    let a = gp_assignment(&graph, &cfg.network, seed)?;
                    distribute(&transpiled, &a, &cfg.network)?
                }
            };
            let est = estimate_fidelity(
                &dist.circuit,
                dist.qubit_map(),
                &ideal,
                &cfg.noise,
                cfg.n_trajectories,
                seed,
            )?;
            push(
                schedule,
                seed,
                est,
                dist.remote_cx_count,
                dist.depth(),
                dist.circuit.num_qubits(),
                started,
            );
        }
    }
    Ok(records)
}

/// Per-(config, schedule) fidelity summary over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub config_id: String,
    pub schedule: Schedule,
    pub n_seeds: usize,
    pub fidelity_mean: f64,
    /// Sample standard deviation of the seed-level fidelities.
    pub fidelity_std: f64,
}

/// Group records by (config, schedule) in encounter order and summarize.
pub fn aggregate(records: &[ResultRecord]) -> Vec<AggregateRow> {
    let mut rows: Vec<AggregateRow> = Vec::new();
    let mut groups: Vec<(String, Schedule, Vec<f64>)> = Vec::new();
    for r in records {
        match groups
            .iter_mut()
            .find(|(id, s, _)| *id == r.config_id && *s == r.schedule)
        {
            Some((_, _, fids)) => fids.push(r.fidelity),
            None => groups.push((r.config_id.clone(), r.schedule, vec![r.fidelity])),
        }
    }
    for (config_id, schedule, fids) in groups {
        let n = fids.len() as f64;
        let mean = fids.iter().sum::<f64>() / n;
        let std = if fids.len() > 1 {
            (fids.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        rows.push(AggregateRow {
            config_id,
            schedule,
            n_seeds: fids.len(),
            fidelity_mean: mean,
            fidelity_std: std,
        });
    }
    rows
}

/// Structural comparison row: circuit shape per (config, schedule), no
/// simulation involved.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthRow {
    pub config_id: String,
    pub schedule: Schedule,
    pub remote_cx: usize,
    pub depth: usize,
    pub total_qubits: usize,
}

/// Build every (config, schedule) circuit — GP placements use each config's
/// first seed — and report shape only. Much faster than a fidelity suite.
pub fn depth_analysis(configs: &[ExperimentConfig]) -> Result<Vec<DepthRow>> {
    let mut rows = Vec::new();
    for cfg in configs {
        let mono = cfg.circuit.build()?;
        let transpiled = transpile(&mono)?;
        rows.push(DepthRow {
            config_id: cfg.id.clone(),
            schedule: Schedule::Mono,
            remote_cx: 0,
            depth: transpiled.depth(),
            total_qubits: mono.num_qubits(),
        });
        let graph = InteractionGraph::from_circuit(&transpiled)?;
        for &schedule in &cfg.schedules {
            let a = match schedule {
                Schedule::Mono => unreachable!("mono is never listed"),
                Schedule::Naive => naive_assignment(mono.num_qubits(), &cfg.network)?,
                Schedule::Gp => gp_assignment(&graph, &cfg.network, cfg.seeds[0])?,
            };
            let d = distribute(&transpiled, &a, &cfg.network)?;
            rows.push(DepthRow {
                config_id: cfg.id.clone(),
                schedule,
                remote_cx: d.remote_cx_count,
                depth: d.depth(),
                total_qubits: d.circuit.num_qubits(),
            });
        }
    }
    Ok(rows)
}

/// Suite-level knobs, typically set from CLI flags.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    /// Skip configs whose distributed circuit would exceed this many wires.
    pub max_width: usize,
    /// Override every config's trajectory count.
    pub trajectories: Option<usize>,
    /// Override every config's seed list with 1..=n.
    pub seed_count: Option<usize>,
    /// Record wall_time_s as 0 for byte-stable output.
    pub zero_wall_time: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            max_width: 24,
            trajectories: None,
            seed_count: None,
            zero_wall_time: false,
        }
    }
}

#[derive(Debug)]
pub struct SuiteOutcome {
    pub records: Vec<ResultRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub depth_rows: Vec<DepthRow>,
    /// (config id, total wires) of configs skipped by the width cap.
    pub skipped: Vec<(String, usize)>,
}

/// Run a whole suite. Configs wider than the cap are skipped and reported,
/// not errored, so narrow machines can still run the rest of the grid.
pub fn run_suite(configs: &[ExperimentConfig], opts: &SuiteOptions) -> Result<SuiteOutcome> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut kept = Vec::new();
    for cfg in configs {
        let width = cfg.network.total_qubits();
        if width > opts.max_width {
            skipped.push((cfg.id.clone(), width));
            continue;
        }
        let mut cfg = cfg.clone();
        if let Some(t) = opts.trajectories {
            cfg.n_trajectories = t;
        }
        if let Some(count) = opts.seed_count {
            cfg.seeds = (1..=count as u64).collect();
        }
        records.extend(run_experiment(&cfg, opts.zero_wall_time)?);
        kept.push(cfg);
    }
    let aggregates = aggregate(&records);
    let depth_rows = depth_analysis(&kept)?;
    Ok(SuiteOutcome {
        records,
        aggregates,
        depth_rows,
        skipped,
    })
}

pub const CSV_HEADER: &str =
    "config_id,schedule,seed,fidelity,std_err,remote_cx,depth,total_qubits,wall_time_s";

/// Records to CSV, in input order, shortest round-trip float formatting.
pub fn write_csv(records: &[ResultRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.config_id,
            r.schedule,
            r.seed,
            r.fidelity,
            r.std_err,
            r.remote_cx,
            r.depth,
            r.total_qubits,
            r.wall_time_s
        ));
    }
    out
}

/// Inverse of [`write_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ResultRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header {CSV_HEADER:?}"),
            })
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("expected 9 columns, got {}", cols.len()),
            });
        }
        let field = |j: usize, what: &str| -> Error {
            Error::Parse {
                line: i + 1,
                msg: format!("bad {what}: {:?}", cols[j]),
            }
        };
        records.push(ResultRecord {
            config_id: cols[0].to_string(),
            schedule: Schedule::parse(cols[1])?,
            seed: cols[2].parse().map_err(|_| field(2, "seed"))?,
            fidelity: cols[3].parse().map_err(|_| field(3, "fidelity"))?,
            std_err: cols[4].parse().map_err(|_| field(4, "std_err"))?,
            remote_cx: cols[5].parse().map_err(|_| field(5, "remote_cx"))?,
            depth: cols[6].parse().map_err(|_| field(6, "depth"))?,
            total_qubits: cols[7].parse().map_err(|_| field(7, "total_qubits"))?,
            wall_time_s: cols[8].parse().map_err(|_| field(8, "wall_time_s"))?,
        });
    }
    Ok(records)
}

/// Aggregates to CSV.
pub fn write_aggregates(rows: &[AggregateRow]) -> String {
    let mut out = String::from("config_id,schedule,n_seeds,fidelity_mean,fidelity_std\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.config_id, r.schedule, r.n_seeds, r.fidelity_mean, r.fidelity_std
        ));
    }
    out
}

/// Depth rows to CSV.
pub fn write_depth(rows: &[DepthRow]) -> String {
    let mut out = String::from("config_id,schedule,remote_cx,depth,total_qubits\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.config_id, r.schedule, r.remote_cx, r.depth, r.total_qubits
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::Family;

    const TINY: &str = r#"
[defaults]
seeds = [1, 2]
trajectories = 200

[[experiment]]
id = 1
network = "2x2+1"
[experiment.circuit]
family = "ghz"
num_qubits = 4
"#;

    #[test]
    fn load_resolves_defaults_and_overrides() {
        let text = r#"
[defaults]
seeds = [7]
trajectories = 50
schedules = ["naive"]
[defaults.noise]
p2 = 0.25

[[experiment]]
id = "warmup"
network = "2+1,2+1"
seeds = [3, 4, 5]
[experiment.circuit]
family = "ghz"
num_qubits = 4

[[experiment]]
network = "4+0"
schedules = ["gp", "naive", "gp"]
trajectories = 9
[experiment.circuit]
family = "vqc"
num_qubits = 4
seed = 11
layers = 3
"#;
        let configs = load_suite(text).unwrap();
        assert_eq!(configs.len(), 2);
        let a = &configs[0];
        assert_eq!(a.id, "warmup");
        assert_eq!(a.seeds, vec![3, 4, 5]);
        assert_eq!(a.n_trajectories, 50);
        assert_eq!(a.schedules, vec![Schedule::Naive]);
        assert_eq!(a.noise.p2, 0.25);
        assert_eq!(a.noise.p1, 0.001); // untouched default
        let b = &configs[1];
        assert_eq!(b.id, "2"); // positional fallback
        assert_eq!(b.circuit.family, Family::Vqc);
        assert_eq!(b.circuit.layers, Some(3));
        assert_eq!(b.seeds, vec![7]);
        assert_eq!(b.n_trajectories, 9);
        // Deduplicated and ordered.
        assert_eq!(b.schedules, vec![Schedule::Naive, Schedule::Gp]);
    }

    #[test]
    fn load_rejects_bad_input() {
        assert!(load_suite("").is_err());
        assert!(load_suite("[[experiment]]\nnetwork = \"oops\"\n[experiment.circuit]\nfamily = \"ghz\"\nnum_qubits = 4\n").is_err());
        assert!(load_suite(&TINY.replace("network", "netwurk")).is_err());
        assert!(
            load_suite(&TINY.replace("[defaults]", "[defaults]\nschedules = [\"mono\"]")).is_err()
        );
        assert!(load_suite(&TINY.replace("[1, 2]", "[]")).is_err());
        // Bad circuit parameters surface at load.
        assert!(load_suite(&TINY.replace("num_qubits = 4", "num_qubits = 1")).is_err());
    }

    #[test]
    fn run_experiment_produces_the_grid_of_records() {
        let cfg = &load_suite(TINY).unwrap()[0];
        let records = run_experiment(cfg, true).unwrap();
        let expect: Vec<(Schedule, u64)> = vec![
            (Schedule::Mono, 1),
            (Schedule::Mono, 2),
            (Schedule::Naive, 1),
            (Schedule::Naive, 2),
            (Schedule::Gp, 1),
            (Schedule::Gp, 2),
        ];
        let got: Vec<(Schedule, u64)> = records.iter().map(|r| (r.schedule, r.seed)).collect();
        assert_eq!(got, expect);
        for r in &records {
            assert_eq!(r.config_id, "1");
            assert!(r.fidelity > 0.8 && r.fidelity <= 1.0, "{}", r.fidelity);
            assert!(r.std_err > 0.0);
            assert!(r.depth > 0);
            assert_eq!(r.wall_time_s, 0.0);
            match r.schedule {
                Schedule::Mono => {
                    assert_eq!(r.remote_cx, 0);
                    assert_eq!(r.total_qubits, 4);
                }
                _ => {
                    assert_eq!(r.remote_cx, 1); // GHZ chain cut once
                    assert_eq!(r.total_qubits, 6);
                }
            }
        }
    }

    #[test]
    fn csv_round_trips_and_repeats_byte_identically() {
        let cfg = &load_suite(TINY).unwrap()[0];
        let first = write_csv(&run_experiment(cfg, true).unwrap());
        let second = write_csv(&run_experiment(cfg, true).unwrap());
        assert_eq!(first, second);
        let parsed = parse_csv(&first).unwrap();
        assert_eq!(write_csv(&parsed), first);
    }

    #[test]
    fn csv_parse_rejects_malformed_text() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("nonsense\n").is_err());
        let good = format!("{CSV_HEADER}\n1,mono,1,0.5,0.1,0,3,4,0\n");
        assert_eq!(parse_csv(&good).unwrap().len(), 1);
        assert!(parse_csv(&good.replace("mono", "monolithic")).is_err());
        assert!(parse_csv(&good.replace(",0\n", "\n")).is_err());
        assert!(parse_csv(&good.replace("0.5", "half")).is_err());
    }

    #[test]
    fn aggregate_summarizes_per_schedule() {
        let mk = |schedule, seed, fidelity| ResultRecord {
            config_id: "9".into(),
            schedule,
            seed,
            fidelity,
            std_err: 0.0,
            remote_cx: 0,
            depth: 1,
            total_qubits: 2,
            wall_time_s: 0.0,
        };
        let rows = aggregate(&[
            mk(Schedule::Mono, 1, 0.9),
            mk(Schedule::Mono, 2, 0.8),
            mk(Schedule::Naive, 1, 0.7),
        ]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].n_seeds, 2);
        assert!((rows[0].fidelity_mean - 0.85).abs() < 1e-12);
        // Sample std of {0.9, 0.8}.
        assert!((rows[0].fidelity_std - std::f64::consts::SQRT_2 / 20.0).abs() < 1e-12);
        assert_eq!(rows[1].n_seeds, 1);
        assert_eq!(rows[1].fidelity_std, 0.0);
    }

    #[test]
    fn depth_analysis_matches_experiment_records() {
        let cfg = &load_suite(TINY).unwrap()[0];
        let records = run_experiment(cfg, true).unwrap();
        let rows = depth_analysis(std::slice::from_ref(cfg)).unwrap();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            let rec = records
                .iter()
                .find(|r| r.schedule == row.schedule && r.seed == cfg.seeds[0])
                .unwrap();
            assert_eq!(row.depth, rec.depth, "{}", row.schedule);
            assert_eq!(row.remote_cx, rec.remote_cx);
            assert_eq!(row.total_qubits, rec.total_qubits);
        }
    }

    #[test]
    fn suite_skips_wide_configs_instead_of_failing() {
        let text = r#"
[defaults]
seeds = [1]
trajectories = 40

[[experiment]]
id = "narrow"
network = "2x2+1"
[experiment.circuit]
family = "ghz"
num_qubits = 4

[[experiment]]
id = "wide"
network = "8x1+2"
[experiment.circuit]
family = "ghz"
num_qubits = 8
"#;
        let configs = load_suite(text).unwrap();
        let outcome = run_suite(
            &configs,
            &SuiteOptions {
                max_width: 12,
                zero_wall_time: true,
                ..SuiteOptions::default()
            },
        )
        .unwrap();
        assert_eq!(outcome.skipped, vec![("wide".to_string(), 24)]);
        assert!(outcome.records.iter().all(|r| r.config_id == "narrow"));
        assert_eq!(outcome.aggregates.len(), 3);
        assert_eq!(outcome.depth_rows.len(), 3);
    }

    #[test]
    fn suite_overrides_apply() {
        let configs = load_suite(TINY).unwrap();
        let outcome = run_suite(
            &configs,
            &SuiteOptions {
                trajectories: Some(25),
                seed_count: Some(3),
                zero_wall_time: true,
                ..SuiteOptions::default()
            },
        )
        .unwrap();
        let seeds: Vec<u64> = outcome
            .records
            .iter()
            .filter(|r| r.schedule == Schedule::Mono)
            .map(|r| r.seed)
            .collect();
        assert_eq!(seeds, vec![1, 2, 3]);
    }

    #[test]
    fn shipped_grid_loads_and_matches_its_shape() {
        let grid = builtin_grid().unwrap();
        assert_eq!(grid.len(), 19);
        let ids: Vec<String> = grid.iter().map(|c| c.id.clone()).collect();
        let want: Vec<String> = (1..=19).map(|i| i.to_string()).collect();
        assert_eq!(ids, want);
        let by_id = |id: &str| grid.iter().find(|c| c.id == id).unwrap();
        let row1 = by_id("1");
        assert_eq!(row1.circuit.family, Family::Grover);
        assert_eq!(row1.circuit.num_qubits, 4);
        assert_eq!(row1.network, parse_network("2x2+2").unwrap());
        assert_eq!(by_id("4").network, parse_network("8x1+2").unwrap());
        let row7 = by_id("7");
        assert_eq!(row7.circuit.family, Family::Random);
        assert_eq!(row7.network, parse_network("4x3+3").unwrap());
        let row19 = by_id("19");
        assert_eq!(row19.circuit.family, Family::Vqc);
        assert_eq!(row19.circuit.num_qubits, 12);
        assert_eq!(row19.network, parse_network("4x3+2").unwrap());
        // Rows sharing a circuit share its generator seed.
        let seed_of = |id: &str| by_id(id).circuit.seed;
        for id in ["6", "7", "11", "12", "13"] {
            assert_eq!(seed_of(id), seed_of("5"), "row {id}");
        }
        for id in ["9", "10"] {
            assert_eq!(seed_of(id), seed_of("8"), "row {id}");
        }
        for id in ["15", "16"] {
            assert_eq!(seed_of(id), seed_of("14"), "row {id}");
        }
        for id in ["18", "19"] {
            assert_eq!(seed_of(id), seed_of("17"), "row {id}");
        }
        for cfg in &grid {
            assert_eq!(cfg.seeds, vec![1, 2, 3, 4, 5]);
            assert_eq!(cfg.n_trajectories, 20_000);
            assert_eq!(cfg.schedules, vec![Schedule::Naive, Schedule::Gp]);
        }
    }
}
