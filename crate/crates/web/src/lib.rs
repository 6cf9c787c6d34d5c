//! Browser bindings for the demo page in `www/`.
//!
//! Each export returns a JSON string. The `*_json` functions hold the logic
//! and run natively as well, which is how they are tested.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use faultcover::benchmark::grid_network;
use faultcover::cover::greedy_msc;
use faultcover::fixture::example_matrix;
use faultcover::influence::build_influence_matrix;
use faultcover::metrics::{score_curve, Undetected};
use faultcover::testcover::{augmented_greedy, augmented_greedy_with, AgOptions};
use faultcover::transient::{simulate, Boundary, BurstSpec, PipeSpec, Scenario, SensorSpec};
use faultcover::{detection_sets, Error};

#[derive(Serialize)]
struct GridNode {
    id: String,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct CurvePoint {
    sensors: usize,
    i_d: f64,
    i_i: f64,
    i_l: f64,
    i_w: usize,
}

#[derive(Serialize)]
struct GridPlacement {
    nodes: Vec<GridNode>,
    /// Endpoint node indices per link.
    links: Vec<(usize, usize)>,
    /// Selected node indices, in selection order.
    sensors: Vec<usize>,
    curve: Vec<CurvePoint>,
    /// Localization group per link under the full selection.
    link_group: Vec<usize>,
}

/// Places sensors on a `rows × cols` grid. `algo` is `"ag"` for
/// localization or `"greedy"` for detection.
pub fn grid_placement_json(
    rows: usize,
    cols: usize,
    epsilon_m: f64,
    jitter: f64,
    seed: u64,
    algo: &str,
) -> Result<String, Error> {
    if rows * cols > 900 {
        return Err(Error::InvalidSpec(
            "demo grids are capped at 900 nodes".into(),
        ));
    }
    let net = grid_network(rows, cols, 100.0, true, jitter, seed)?;
    let ids: Vec<&str> = net.nodes().iter().map(|n| n.id.as_str()).collect();
    let matrix = build_influence_matrix(&net, &ids, epsilon_m)?;
    let order = match algo {
        "ag" => {
            augmented_greedy_with(&matrix, AgOptions::default())
                .placement
                .selected
        }
        "greedy" => greedy_msc(&detection_sets(&matrix)).selected,
        other => return Err(Error::InvalidSpec(format!("unknown algorithm {other:?}"))),
    };
    let curve = score_curve(&matrix, &order, Undetected::Grouped)?
        .into_iter()
        .map(|r| CurvePoint {
            sensors: r.sensor_count,
            i_d: r.i_d,
            i_i: r.i_i,
            i_l: r.i_l,
            i_w: r.i_w,
        })
        .collect();
    let mut link_group = vec![0; matrix.n()];
    let partition = faultcover::metrics::localization_partition(&matrix, &order)?;
    for (g, group) in partition.by_first_event().iter().enumerate() {
        for &e in &group.events {
            link_group[e] = g;
        }
    }
    let placement = GridPlacement {
        nodes: net
            .nodes()
            .iter()
            .map(|n| GridNode {
                id: n.id.clone(),
                x: n.x.unwrap_or(0.0),
                y: n.y.unwrap_or(0.0),
            })
            .collect(),
        links: (0..net.links().len()).map(|l| net.endpoints(l)).collect(),
        sensors: order,
        curve,
        link_group,
    };
    Ok(serde_json::to_string(&placement)?)
}

#[derive(Serialize)]
struct Series {
    grid_index: usize,
    pressure_pa: Vec<f64>,
    expected_pa: Vec<f64>,
    first_detection: Option<usize>,
}

#[derive(Serialize)]
struct Transient {
    dt: f64,
    points: usize,
    series: Vec<Series>,
}

/// Burst in a 2 km pipe between two reservoirs, observed at `sensors`
/// (grid indices 0..=40).
pub fn burst_transient_json(
    burst_index: usize,
    area_m2: f64,
    epsilon_pa: f64,
    sensors: &[usize],
) -> Result<String, Error> {
    let scenario = Scenario {
        pipes: vec![PipeSpec {
            length_m: 2000.0,
            diameter_m: 0.4,
            wave_speed_m_s: 1000.0,
            friction: 0.018,
            segments: 40,
        }],
        upstream: Boundary::Reservoir { head_m: 80.0 },
        downstream: Boundary::Reservoir { head_m: 70.0 },
        initial_head_m: None,
        burst: Some(BurstSpec {
            grid_index: burst_index,
            discharge_coefficient: 0.6,
            area_m2,
            onset_step: 10,
            ramp_steps: 0,
        }),
        horizon_steps: 240,
        sensors: sensors
            .iter()
            .map(|&i| SensorSpec {
                grid_index: i,
                elevation_m: 0.0,
            })
            .collect(),
        epsilon_pa,
    };
    let result = simulate(&scenario)?;
    let out = Transient {
        dt: result.dt,
        points: 41,
        series: result
            .readings
            .into_iter()
            .map(|r| Series {
                grid_index: r.grid_index,
                pressure_pa: r.pressure_pa,
                expected_pa: r.expected_pa,
                first_detection: r.first_detection,
            })
            .collect(),
    };
    Ok(serde_json::to_string(&out)?)
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    /// `(x, y)` per sensor; `None` once the sensor is selected.
    utilities: Vec<Option<(u64, u64)>>,
    chosen: Option<usize>,
    buckets: Vec<Vec<(usize, usize)>>,
}

/// Augmented-greedy iterations on the bundled 10 × 8 example matrix.
pub fn fixture_trace_json() -> Result<String, Error> {
    let m = example_matrix();
    let rows: Vec<TraceRow> = augmented_greedy(&m)
        .iterations
        .into_iter()
        .map(|r| TraceRow {
            iteration: r.iteration,
            utilities: r
                .utilities
                .iter()
                .map(|u| u.as_ref().map(|u| (u.x, u.y)))
                .collect(),
            chosen: r.chosen,
            buckets: r.buckets,
        })
        .collect();
    Ok(serde_json::to_string(&rows)?)
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn grid_placement(
    rows: usize,
    cols: usize,
    epsilon_m: f64,
    jitter: f64,
    seed: u32,
    algo: &str,
) -> Result<String, JsError> {
    grid_placement_json(rows, cols, epsilon_m, jitter, seed.into(), algo).map_err(js)
}

#[wasm_bindgen]
pub fn burst_transient(
    burst_index: usize,
    area_m2: f64,
    epsilon_pa: f64,
    sensors: &[u32],
) -> Result<String, JsError> {
    let sensors: Vec<usize> = sensors.iter().map(|&s| s as usize).collect();
    burst_transient_json(burst_index, area_m2, epsilon_pa, &sensors).map_err(js)
}

#[wasm_bindgen]
pub fn fixture_trace() -> Result<String, JsError> {
    fixture_trace_json().map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn grid_payload() {
        let v: Value =
            serde_json::from_str(&grid_placement_json(4, 5, 140.0, 0.2, 1, "ag").unwrap()).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 20);
        assert_eq!(v["links"].as_array().unwrap().len(), 4 * 4 + 3 * 5 + 3 * 4);
        let curve = v["curve"].as_array().unwrap();
        assert_eq!(curve.len(), v["sensors"].as_array().unwrap().len() + 1);
        assert!(grid_placement_json(3, 3, 100.0, 0.0, 0, "simplex").is_err());
        assert!(grid_placement_json(40, 40, 100.0, 0.0, 0, "ag").is_err());
    }

    #[test]
    fn transient_payload() {
        let v: Value =
            serde_json::from_str(&burst_transient_json(20, 0.01, 5000.0, &[21, 35]).unwrap())
                .unwrap();
        let s = v["series"].as_array().unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0]["pressure_pa"].as_array().unwrap().len(), 241);
        assert!(
            s[0]["first_detection"].as_u64().unwrap() < s[1]["first_detection"].as_u64().unwrap()
        );
        assert!(burst_transient_json(0, 0.01, 5000.0, &[3]).is_err());
    }

    #[test]
    fn trace_payload() {
        let v: Value = serde_json::from_str(&fixture_trace_json().unwrap()).unwrap();
        let rows = v.as_array().unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0]["utilities"][3], serde_json::json!([9, 0]));
        let chosen: Vec<_> = rows.iter().filter_map(|r| r["chosen"].as_u64()).collect();
        assert_eq!(chosen, [0, 1, 2, 4]);
    }
}
