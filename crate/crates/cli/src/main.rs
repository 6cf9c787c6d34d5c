use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use faultcover::benchmark::{bench_csv, parse_specs, run_benchmark, BenchOptions};
use faultcover::cover::{greedy_msc, lazy_greedy_msc, max_coverage, CoverTrace};
use faultcover::influence::{build_influence_matrix, load_influence_matrix};
use faultcover::metrics::{score_curve, score_report_with, ScoreReport, Undetected};
use faultcover::network::parse_network;
use faultcover::oracle::{exact_msc, exact_mtc};
use faultcover::placement::ratio;
use faultcover::testcover::{
    augmented_greedy_with, identification_value, pair_count, tlg_solve_with, AgOptions, TlgOptions,
    DEFAULT_MAX_PAIRWISE_CELLS,
};
use faultcover::transient::{parse_scenario, simulate, trace_csv};
use faultcover::{detection_sets, InfluenceMatrix, PlacementResult};

#[derive(Parser)]
#[command(
    name = "faultcover",
    version,
    about = "Sensor placement for link-failure detection and localization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Problem {
    /// Detection: minimum set cover.
    Msc,
    /// Localization: minimum test cover.
    Mtc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Greedy,
    Lazy,
    Tlg,
    Ag,
    Exact,
}

#[derive(Subcommand)]
enum Command {
    /// Build an influence matrix from a network by distance thresholding.
    BuildInfluence {
        network: PathBuf,
        /// Detection radius in meters.
        #[arg(long)]
        epsilon: f64,
        /// Comma-separated candidate sensor node ids; defaults to every node.
        #[arg(long)]
        sensors: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Choose sensors for detection or localization.
    Solve {
        matrix: PathBuf,
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long, value_enum)]
        algo: Algo,
        /// Stop after this many sensors.
        #[arg(long)]
        budget: Option<usize>,
        /// Size guard for the pairwise transformation, in cells.
        #[arg(long, default_value_t = DEFAULT_MAX_PAIRWISE_CELLS)]
        max_pairwise_cells: u128,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score a sensor set.
    Metrics {
        matrix: PathBuf,
        /// Comma-separated sensor ids, or a placement CSV written by `solve`.
        #[arg(long, allow_hyphen_values = true)]
        sensors: String,
        /// Leave undetected events out of the localization scores.
        #[arg(long)]
        drop_undetected: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Scores after each sensor added by a solver.
    Curve {
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "ag")]
        algo: Algo,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        drop_undetected: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_PAIRWISE_CELLS)]
        max_pairwise_cells: u128,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare augmented greedy with transformed lazy greedy on generated instances.
    Benchmark {
        #[arg(long)]
        spec: PathBuf,
        /// Added to every instance seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include wall times; the report is then no longer reproducible.
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        max_pairwise_cells: Option<u128>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a transient burst scenario.
    Simulate {
        scenario: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_matrix(path: &Path) -> Result<InfluenceMatrix> {
    load_influence_matrix(&read(path)?)
        .with_context(|| format!("invalid influence matrix {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn split_ids(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Placement in the given order, scored incrementally.
fn placement_from_order(
    order: Vec<usize>,
    universe: u64,
    value: impl Fn(&[usize]) -> u64,
) -> PlacementResult {
    let mut p = PlacementResult {
        universe,
        ..PlacementResult::default()
    };
    for k in 1..=order.len() {
        let v = value(&order[..k]);
        p.gains.push(v - p.value());
        p.cumulative.push(v);
        p.normalized.push(ratio(v, universe));
    }
    p.selected = order;
    p
}

fn truncate(trace: &mut CoverTrace, budget: Option<usize>) {
    if let Some(b) = budget {
        trace.selected.truncate(b);
        trace.gains.truncate(b);
        trace.cumulative.truncate(b);
    }
}

fn solve(
    matrix: &InfluenceMatrix,
    problem: Problem,
    algo: Algo,
    budget: Option<usize>,
    max_cells: u128,
) -> Result<PlacementResult> {
    let sets = detection_sets(matrix);
    let n = matrix.n();
    Ok(match (problem, algo) {
        (Problem::Msc, Algo::Greedy) => {
            let trace = match budget {
                Some(b) => max_coverage(&sets, b),
                None => greedy_msc(&sets),
            };
            PlacementResult::from_cover(&trace, n as u64)
        }
        (Problem::Msc, Algo::Lazy) => {
            let mut trace = lazy_greedy_msc(&sets);
            truncate(&mut trace, budget);
            PlacementResult::from_cover(&trace, n as u64)
        }
        (Problem::Msc, Algo::Exact) => {
            if budget.is_some() {
                bail!("--budget is not supported with --algo exact");
            }
            let order = exact_msc(&sets)?;
            placement_from_order(order, n as u64, |s| {
                faultcover::cover::detection_value(&sets, s).expect("indices from the solver")
            })
        }
        (Problem::Mtc, Algo::Ag) => {
            augmented_greedy_with(
                matrix,
                AgOptions {
                    record_trace: false,
                    max_sensors: budget,
                },
            )
            .placement
        }
        (Problem::Mtc, Algo::Tlg) => tlg_solve_with(
            matrix,
            TlgOptions {
                max_cells,
                max_sensors: budget,
            },
        )
        .context("transformed lazy greedy failed; try --algo ag")?,
        (Problem::Mtc, Algo::Exact) => {
            if budget.is_some() {
                bail!("--budget is not supported with --algo exact");
            }
            let order = exact_mtc(matrix)?;
            placement_from_order(order, pair_count(n), |s| {
                identification_value(matrix, s).expect("indices from the solver")
            })
        }
        (Problem::Msc, a @ (Algo::Tlg | Algo::Ag))
        | (Problem::Mtc, a @ (Algo::Greedy | Algo::Lazy)) => {
            let name = a.to_possible_value().unwrap().get_name().to_string();
            let fits = if problem == Problem::Msc {
                "greedy, lazy, exact"
            } else {
                "tlg, ag, exact"
            };
            bail!("--algo {name} does not apply to this problem; choose one of {fits}");
        }
    })
}

fn placement_csv(matrix: &InfluenceMatrix, p: &PlacementResult) -> Result<String> {
    let rows = p.selected.iter().enumerate().map(|(k, &i)| {
        vec![
            (k + 1).to_string(),
            matrix.sensors()[i].clone(),
            i.to_string(),
            p.gains[k].to_string(),
            p.cumulative[k].to_string(),
            p.normalized[k].to_string(),
        ]
    });
    csv_text(
        &[
            "step",
            "sensor",
            "index",
            "gain",
            "cumulative",
            "normalized",
        ],
        rows,
    )
}

/// Sensor ids from a placement CSV (`sensor` column) or a comma-separated list.
fn resolve_sensors(matrix: &InfluenceMatrix, arg: &str) -> Result<Vec<usize>> {
    let path = Path::new(arg);
    let ids = if path.is_file() {
        let mut reader =
            csv::Reader::from_path(path).with_context(|| format!("cannot read {arg}"))?;
        let col = reader
            .headers()?
            .iter()
            .position(|h| h == "sensor")
            .ok_or_else(|| anyhow!("{arg} has no `sensor` column"))?;
        reader
            .records()
            .map(|r| Ok(r?.get(col).unwrap_or("").to_string()))
            .collect::<Result<Vec<_>>>()?
    } else {
        split_ids(arg)
    };
    Ok(matrix.sensor_indices(&ids)?)
}

const SCORE_HEADER: [&str; 10] = [
    "sensor_count",
    "I_D",
    "I_I",
    "I_L",
    "I_W",
    "I_W_norm",
    "detected",
    "separated",
    "pairs",
    "groups",
];

fn score_cells(r: &ScoreReport) -> Vec<String> {
    vec![
        r.sensor_count.to_string(),
        r.i_d.to_string(),
        r.i_i.to_string(),
        r.i_l.to_string(),
        r.i_w.to_string(),
        r.i_w_normalized.to_string(),
        r.detected.to_string(),
        r.separated.to_string(),
        r.pairs.to_string(),
        r.groups.to_string(),
    ]
}

fn undetected(drop: bool) -> Undetected {
    if drop {
        Undetected::Excluded
    } else {
        Undetected::Grouped
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildInfluence {
            network,
            epsilon,
            sensors,
            output,
        } => {
            let net = parse_network(&read(&network)?)
                .with_context(|| format!("invalid network {}", network.display()))?;
            let ids = match sensors {
                Some(s) => split_ids(&s),
                None => net.nodes().iter().map(|n| n.id.clone()).collect(),
            };
            let m = build_influence_matrix(&net, &ids, epsilon)?;
            emit(output.as_deref(), &m.to_csv())
        }
        Command::Solve {
            matrix,
            problem,
            algo,
            budget,
            max_pairwise_cells,
            output,
        } => {
            let m = read_matrix(&matrix)?;
            let p = solve(&m, problem, algo, budget, max_pairwise_cells)?;
            emit(output.as_deref(), &placement_csv(&m, &p)?)
        }
        Command::Metrics {
            matrix,
            sensors,
            drop_undetected,
            output,
        } => {
            let m = read_matrix(&matrix)?;
            let sel = resolve_sensors(&m, &sensors)?;
            let r = score_report_with(&m, &sel, undetected(drop_undetected))?;
            emit(
                output.as_deref(),
                &csv_text(&SCORE_HEADER, [score_cells(&r)])?,
            )
        }
        Command::Curve {
            matrix,
            algo,
            budget,
            drop_undetected,
            max_pairwise_cells,
            output,
        } => {
            let m = read_matrix(&matrix)?;
            let problem = match algo {
                Algo::Greedy | Algo::Lazy => Problem::Msc,
                _ => Problem::Mtc,
            };
            let p = solve(&m, problem, algo, budget, max_pairwise_cells)?;
            let curve = score_curve(&m, &p.selected, undetected(drop_undetected))?;
            let mut header = vec!["sensor"];
            header.extend(SCORE_HEADER);
            let rows = curve.iter().enumerate().map(|(k, r)| {
                let id = if k == 0 {
                    String::new()
                } else {
                    m.sensors()[p.selected[k - 1]].clone()
                };
                std::iter::once(id).chain(score_cells(r)).collect()
            });
            emit(output.as_deref(), &csv_text(&header, rows)?)
        }
        Command::Benchmark {
            spec,
            seed,
            timings,
            max_pairwise_cells,
            output,
        } => {
            let specs = parse_specs(&read(&spec)?)
                .with_context(|| format!("invalid benchmark spec {}", spec.display()))?;
            let options = BenchOptions {
                seed_offset: seed,
                timings,
                tlg_max_cells: max_pairwise_cells,
            };
            let records = run_benchmark(&specs, &options);
            for r in records.iter().filter(|r| !r.message.is_empty()) {
                eprintln!("{}: {} ({})", r.id, r.status.as_str(), r.message);
            }
            emit(output.as_deref(), &bench_csv(&records))
        }
        Command::Simulate { scenario, output } => {
            let sc = parse_scenario(&read(&scenario)?)
                .with_context(|| format!("invalid scenario {}", scenario.display()))?;
            let result = simulate(&sc)?;
            emit(output.as_deref(), &trace_csv(&result))
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FAULTCOVER_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("FAULTCOVER_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
