//! Seeded instance generation and AG-versus-TLG work comparison.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::influence::{build_influence_matrix, InfluenceMatrix};
use crate::network::{Link, Network, Node};
use crate::testcover::{augmented_greedy_with, pair_count, tlg_solve_with, AgOptions, TlgOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceKind {
    /// Independent Bernoulli cells.
    RandomMatrix { n: usize, m: usize, density: f64 },
    /// `rows × cols` lattice, optionally with one diagonal per cell; every
    /// node hosts a candidate sensor.
    GridNetwork {
        rows: usize,
        cols: usize,
        #[serde(default = "default_spacing")]
        spacing_m: f64,
        #[serde(default)]
        diagonals: bool,
        /// Node displacement as a fraction of the spacing, below 0.5.
        #[serde(default)]
        jitter: f64,
        epsilon_m: f64,
    },
    /// Points uniform in a square of side `side_m`, joined when closer than
    /// `radius_m`.
    RandomGeometric {
        nodes: usize,
        radius_m: f64,
        #[serde(default = "default_side")]
        side_m: f64,
        epsilon_m: f64,
    },
}

fn default_spacing() -> f64 {
    100.0
}

fn default_side() -> f64 {
    1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub kind: InstanceKind,
}

impl InstanceSpec {
    fn label(&self, position: usize) -> String {
        self.id
            .clone()
            .unwrap_or_else(|| format!("instance-{position}"))
    }
}

pub fn parse_specs(text: &str) -> Result<Vec<InstanceSpec>> {
    Ok(serde_json::from_str(text)?)
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

/// Lattice network with node ids `r{row}c{col}`.
pub fn grid_network(
    rows: usize,
    cols: usize,
    spacing_m: f64,
    diagonals: bool,
    jitter: f64,
    seed: u64,
) -> Result<Network> {
    if rows == 0 || cols == 0 {
        return Err(invalid("grid needs at least one row and column"));
    }
    if !(spacing_m > 0.0) {
        return Err(invalid(format!(
            "spacing must be positive, got {spacing_m}"
        )));
    }
    if !(0.0..0.5).contains(&jitter) {
        return Err(invalid(format!(
            "jitter must lie in [0, 0.5), got {jitter}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let mut off = || {
                if jitter > 0.0 {
                    rng.gen_range(-jitter..jitter) * spacing_m
                } else {
                    0.0
                }
            };
            let (dx, dy) = (off(), off());
            nodes.push(Node {
                id: format!("r{r}c{c}"),
                elevation_m: 0.0,
                x: Some(c as f64 * spacing_m + dx),
                y: Some(r as f64 * spacing_m + dy),
            });
        }
    }
    let mut links = Vec::new();
    let mut join = |a: usize, b: usize| {
        let (na, nb): (&Node, &Node) = (&nodes[a], &nodes[b]);
        let length = (na.x.unwrap() - nb.x.unwrap()).hypot(na.y.unwrap() - nb.y.unwrap());
        links.push(Link {
            id: format!("p{}", links.len()),
            from: na.id.clone(),
            to: nb.id.clone(),
            length_m: length,
            diameter_m: None,
            wave_speed_m_s: None,
            friction: None,
        });
    };
    let at = |r: usize, c: usize| r * cols + c;
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                join(at(r, c), at(r, c + 1));
            }
            if r + 1 < rows {
                join(at(r, c), at(r + 1, c));
            }
            if diagonals && r + 1 < rows && c + 1 < cols {
                join(at(r, c), at(r + 1, c + 1));
            }
        }
    }
    Network::new(nodes, links)
}

/// Random geometric graph with node ids `v{i}`.
pub fn random_geometric_network(
    nodes: usize,
    radius_m: f64,
    side_m: f64,
    seed: u64,
) -> Result<Network> {
    if !(radius_m > 0.0) || !(side_m > 0.0) {
        return Err(invalid("radius and side must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..nodes)
        .map(|_| (rng.gen::<f64>() * side_m, rng.gen::<f64>() * side_m))
        .collect();
    let node_list = pts
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| Node {
            id: format!("v{i}"),
            elevation_m: 0.0,
            x: Some(x),
            y: Some(y),
        })
        .collect();
    let mut links = Vec::new();
    for a in 0..nodes {
        for b in a + 1..nodes {
            let d = (pts[a].0 - pts[b].0).hypot(pts[a].1 - pts[b].1);
            if d > 0.0 && d <= radius_m {
                links.push(Link {
                    id: format!("p{}", links.len()),
                    from: format!("v{a}"),
                    to: format!("v{b}"),
                    length_m: d,
                    diameter_m: None,
                    wave_speed_m_s: None,
                    friction: None,
                });
            }
        }
    }
    Network::new(node_list, links)
}

/// The network behind a network-backed spec, or `None` for random matrices.
pub fn generate_network(spec: &InstanceSpec) -> Result<Option<Network>> {
    match spec.kind {
        InstanceKind::RandomMatrix { .. } => Ok(None),
        InstanceKind::GridNetwork {
            rows,
            cols,
            spacing_m,
            diagonals,
            jitter,
            ..
        } => grid_network(rows, cols, spacing_m, diagonals, jitter, spec.seed).map(Some),
        InstanceKind::RandomGeometric {
            nodes,
            radius_m,
            side_m,
            ..
        } => random_geometric_network(nodes, radius_m, side_m, spec.seed).map(Some),
    }
}

pub fn generate_instance(spec: &InstanceSpec) -> Result<InfluenceMatrix> {
    match spec.kind {
        InstanceKind::RandomMatrix { n, m, density } => {
            if !(0.0..=1.0).contains(&density) {
                return Err(invalid(format!(
                    "density must lie in [0, 1], got {density}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let rows: Vec<Vec<bool>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_bool(density)).collect())
                .collect();
            Ok(InfluenceMatrix::from_bool_rows(&rows, m))
        }
        InstanceKind::GridNetwork { epsilon_m, .. }
        | InstanceKind::RandomGeometric { epsilon_m, .. } => {
            let net = generate_network(spec)?.expect("network-backed kind");
            let sensors: Vec<&str> = net.nodes().iter().map(|n| n.id.as_str()).collect();
            build_influence_matrix(&net, &sensors, epsilon_m)
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BenchOptions {
    /// Added to every spec's seed.
    pub seed_offset: u64,
    /// Record wall times; off by default so reports are reproducible.
    pub timings: bool,
    /// TLG size guard; `None` uses the default.
    pub tlg_max_cells: Option<u128>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchStatus {
    Ok,
    AgOnly,
    Mismatch,
    Error,
}

impl BenchStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchStatus::Ok => "ok",
            BenchStatus::AgOnly => "ag-only",
            BenchStatus::Mismatch => "mismatch",
            BenchStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub id: String,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    /// `max |C_i|`.
    pub k: usize,
    pub n_over_k: f64,
    pub ag_cover: usize,
    pub tlg_cover: Option<usize>,
    pub cover_match: Option<bool>,
    pub ag_evaluations: u64,
    pub ag_comparisons: u64,
    pub ag_max_eval_comparisons: u64,
    pub tlg_evaluations: Option<u64>,
    /// TLG evaluations times the pairwise universe size.
    pub tlg_pair_evaluations: Option<u64>,
    /// `ag_comparisons / tlg_pair_evaluations`.
    pub work_ratio: Option<f64>,
    /// `(k / n) C(n, 2)`.
    pub prop3_bound: f64,
    /// Every AG evaluation stayed within `prop3_bound + 1` comparisons.
    pub prop3_ok: bool,
    pub ag_ms: Option<f64>,
    pub tlg_ms: Option<f64>,
    pub status: BenchStatus,
    pub message: String,
}

impl BenchRecord {
    fn failed(id: String, seed: u64, message: String) -> Self {
        BenchRecord {
            id,
            seed,
            n: 0,
            m: 0,
            k: 0,
            n_over_k: 0.0,
            ag_cover: 0,
            tlg_cover: None,
            cover_match: None,
            ag_evaluations: 0,
            ag_comparisons: 0,
            ag_max_eval_comparisons: 0,
            tlg_evaluations: None,
            tlg_pair_evaluations: None,
            work_ratio: None,
            prop3_bound: 0.0,
            prop3_ok: false,
            ag_ms: None,
            tlg_ms: None,
            status: BenchStatus::Error,
            message,
        }
    }
}

fn elapsed_ms(start: Option<Instant>) -> Option<f64> {
    start.map(|s| s.elapsed().as_secs_f64() * 1e3)
}

/// Solves one matrix with both MTC solvers and compares them.
pub fn bench_matrix(
    id: String,
    seed: u64,
    matrix: &InfluenceMatrix,
    options: &BenchOptions,
) -> BenchRecord {
    let n = matrix.n();
    let k = matrix
        .columns()
        .iter()
        .map(|c| c.count_ones(..))
        .max()
        .unwrap_or(0);
    let pairs = pair_count(n);
    let prop3_bound = if n == 0 {
        0.0
    } else {
        k as f64 / n as f64 * pairs as f64
    };

    let clock = || options.timings.then(Instant::now);
    let t = clock();
    let ag = augmented_greedy_with(matrix, AgOptions::default()).placement;
    let ag_ms = elapsed_ms(t);

    let tlg_options = TlgOptions {
        max_cells: options
            .tlg_max_cells
            .unwrap_or(TlgOptions::default().max_cells),
        max_sensors: None,
    };
    let t = clock();
    let tlg = tlg_solve_with(matrix, tlg_options);
    let tlg_ms = elapsed_ms(t);

    let mut record = BenchRecord {
        id,
        seed,
        n,
        m: matrix.m(),
        k,
        n_over_k: if k == 0 { 0.0 } else { n as f64 / k as f64 },
        ag_cover: ag.len(),
        tlg_cover: None,
        cover_match: None,
        ag_evaluations: ag.evaluations,
        ag_comparisons: ag.comparisons,
        ag_max_eval_comparisons: ag.max_eval_comparisons,
        tlg_evaluations: None,
        tlg_pair_evaluations: None,
        work_ratio: None,
        prop3_bound,
        prop3_ok: ag.max_eval_comparisons as f64 <= prop3_bound + 1.0,
        ag_ms,
        tlg_ms: None,
        status: BenchStatus::AgOnly,
        message: String::new(),
    };
    match tlg {
        Ok(tlg) => {
            let matched = tlg.selected == ag.selected && tlg.gains == ag.gains;
            record.tlg_cover = Some(tlg.len());
            record.cover_match = Some(matched);
            record.tlg_evaluations = Some(tlg.evaluations);
            record.tlg_pair_evaluations = Some(tlg.comparisons);
            record.work_ratio =
                (tlg.comparisons > 0).then(|| ag.comparisons as f64 / tlg.comparisons as f64);
            record.tlg_ms = tlg_ms;
            record.status = if matched {
                BenchStatus::Ok
            } else {
                BenchStatus::Mismatch
            };
        }
        Err(e @ Error::SizeGuard { .. }) => record.message = e.to_string(),
        Err(e) => {
            record.status = BenchStatus::Error;
            record.message = e.to_string();
        }
    }
    record
}

fn run_one(position: usize, spec: &InstanceSpec, options: &BenchOptions) -> BenchRecord {
    let mut spec = spec.clone();
    spec.seed = spec.seed.wrapping_add(options.seed_offset);
    let id = spec.label(position);
    match generate_instance(&spec) {
        Ok(matrix) => bench_matrix(id, spec.seed, &matrix, options),
        Err(e) => BenchRecord::failed(id, spec.seed, e.to_string()),
    }
}

/// Runs every spec; failures are recorded per instance and the run continues.
/// Records come back in spec order.
pub fn run_benchmark(specs: &[InstanceSpec], options: &BenchOptions) -> Vec<BenchRecord> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        specs
            .par_iter()
            .enumerate()
            .map(|(i, s)| run_one(i, s, options))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        specs
            .iter()
            .enumerate()
            .map(|(i, s)| run_one(i, s, options))
            .collect()
    }
}

pub const BENCH_CSV_HEADER: [&str; 22] = [
    "id",
    "seed",
    "n",
    "m",
    "k",
    "n_over_k",
    "ag_cover",
    "tlg_cover",
    "cover_match",
    "ag_evaluations",
    "ag_comparisons",
    "ag_max_eval_comparisons",
    "tlg_evaluations",
    "tlg_pair_evaluations",
    "work_ratio",
    "prop3_bound",
    "prop3_ok",
    "ag_ms",
    "tlg_ms",
    "status",
    "message",
    "pairs",
];

pub fn bench_csv(records: &[BenchRecord]) -> String {
    fn opt<T: ToString>(v: Option<T>) -> String {
        v.map(|v| v.to_string()).unwrap_or_default()
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BENCH_CSV_HEADER).expect("write to memory");
    for r in records {
        w.write_record([
            r.id.clone(),
            r.seed.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.k.to_string(),
            r.n_over_k.to_string(),
            r.ag_cover.to_string(),
            opt(r.tlg_cover),
            opt(r.cover_match),
            r.ag_evaluations.to_string(),
            r.ag_comparisons.to_string(),
            r.ag_max_eval_comparisons.to_string(),
            opt(r.tlg_evaluations),
            opt(r.tlg_pair_evaluations),
            opt(r.work_ratio),
            r.prop3_bound.to_string(),
            r.prop3_ok.to_string(),
            opt(r.ag_ms),
            opt(r.tlg_ms),
            r.status.as_str().to_string(),
            r.message.clone(),
            pair_count(r.n).to_string(),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::example_matrix;

    fn random(n: usize, m: usize, density: f64, seed: u64) -> InstanceSpec {
        InstanceSpec {
            id: None,
            seed,
            kind: InstanceKind::RandomMatrix { n, m, density },
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let s = random(20, 10, 0.3, 7);
        assert_eq!(
            generate_instance(&s).unwrap(),
            generate_instance(&s).unwrap()
        );
        let other = random(20, 10, 0.3, 8);
        assert_ne!(
            generate_instance(&s).unwrap(),
            generate_instance(&other).unwrap()
        );
    }

    #[test]
    fn zero_density_is_all_zero() {
        let m = generate_instance(&random(15, 6, 0.0, 1)).unwrap();
        assert!(m.columns().iter().all(|c| c.count_ones(..) == 0));
    }

    #[test]
    fn large_epsilon_grid_is_all_ones() {
        let spec = InstanceSpec {
            id: None,
            seed: 0,
            kind: InstanceKind::GridNetwork {
                rows: 5,
                cols: 5,
                spacing_m: 100.0,
                diagonals: false,
                jitter: 0.0,
                epsilon_m: 1e6,
            },
        };
        let m = generate_instance(&spec).unwrap();
        assert_eq!((m.n(), m.m()), (40, 25));
        assert!(m.columns().iter().all(|c| c.count_ones(..) == 40));
    }

    #[test]
    fn grid_link_count() {
        let net = grid_network(14, 14, 100.0, true, 0.2, 3).unwrap();
        assert_eq!(net.nodes().len(), 196);
        assert_eq!(net.links().len(), 2 * 14 * 13 + 13 * 13);
        assert!(grid_network(3, 3, 100.0, false, 0.5, 0).is_err());
    }

    #[test]
    fn specs_parse_from_json() {
        let specs = parse_specs(
            r#"[
                {"id": "a", "kind": "random-matrix", "n": 10, "m": 5, "density": 0.2, "seed": 4},
                {"kind": "grid-network", "rows": 3, "cols": 4, "epsilon_m": 120},
                {"kind": "random-geometric", "nodes": 30, "radius_m": 300, "epsilon_m": 200}
            ]"#,
        )
        .unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[1].label(1), "instance-1");
        assert!(parse_specs(r#"[{"kind": "hexagon"}]"#).is_err());
    }

    #[test]
    fn fixture_covers_agree() {
        let r = bench_matrix(
            "fixture".into(),
            0,
            &example_matrix(),
            &BenchOptions::default(),
        );
        assert_eq!(r.status, BenchStatus::Ok);
        assert_eq!((r.ag_cover, r.tlg_cover), (4, Some(4)));
        assert_eq!(r.k, 9);
        assert!(r.prop3_ok);
    }

    #[test]
    fn guard_marks_ag_only() {
        let options = BenchOptions {
            tlg_max_cells: Some(100),
            ..BenchOptions::default()
        };
        let r = bench_matrix("fixture".into(), 0, &example_matrix(), &options);
        assert_eq!(r.status, BenchStatus::AgOnly);
        assert_eq!(r.tlg_cover, None);
        assert_eq!(r.ag_cover, 4);
    }

    #[test]
    fn failures_do_not_stop_the_run() {
        let specs = vec![random(5, 3, 2.0, 0), random(6, 3, 0.5, 0)];
        let records = run_benchmark(&specs, &BenchOptions::default());
        assert_eq!(records[0].status, BenchStatus::Error);
        assert_eq!(records[1].status, BenchStatus::Ok);
    }

    #[test]
    fn seeded_batch_has_no_mismatches() {
        let specs: Vec<_> = (0..50).map(|s| random(25, 12, 0.25, s)).collect();
        let records = run_benchmark(&specs, &BenchOptions::default());
        assert!(records.iter().all(|r| r.status == BenchStatus::Ok));
        let csv = bench_csv(&records);
        assert_eq!(csv.lines().count(), 51);
        assert_eq!(
            csv,
            bench_csv(&run_benchmark(&specs, &BenchOptions::default()))
        );
    }
}
