use faultcover::transient::{
    apply_burst_boundary, parse_scenario, simulate, step_interior, trace_csv, Boundary, BurstSpec,
    GridState, PipeParams, PipeSpec, Pipeline, Scenario, SensorSpec,
};

fn perturbed(points: usize) -> GridState {
    let mut s = GridState::uniform(points, 50.0, 0.02);
    for i in 0..points {
        s.h[i] += (i as f64 * 0.7).sin();
        s.q[i] += 0.003 * (i as f64 * 1.3).cos();
    }
    s
}

fn burst(index: usize, area: f64) -> BurstSpec {
    BurstSpec {
        grid_index: index,
        discharge_coefficient: 0.6,
        area_m2: area,
        onset_step: 0,
        ramp_steps: 0,
    }
}

fn scenario() -> Scenario {
    Scenario {
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
            grid_index: 20,
            discharge_coefficient: 0.6,
            area_m2: 0.01,
            onset_step: 10,
            ramp_steps: 0,
        }),
        horizon_steps: 200,
        sensors: vec![
            SensorSpec {
                grid_index: 21,
                elevation_m: 5.0,
            },
            SensorSpec {
                grid_index: 35,
                elevation_m: 0.0,
            },
        ],
        epsilon_pa: 5000.0,
    }
}

#[test]
fn rest_state_fixed_for_a_thousand_steps() {
    let p = PipeParams::new(1000.0, 0.3, 1200.0, 0.02, 25).unwrap();
    let pipeline = Pipeline::new(vec![p]).unwrap();
    let start = pipeline
        .steady_state(Boundary::Closed, Boundary::Closed, Some(42.0))
        .unwrap();
    let mut s = start.clone();
    for _ in 0..1000 {
        s = pipeline
            .step(&s, Boundary::Closed, Boundary::Closed, None)
            .unwrap();
    }
    assert_eq!(s.h, start.h);
    assert_eq!(s.q, start.q);
}

#[test]
fn frictionless_impedance_keeps_steady_profile() {
    let r = 0.37;
    let q_bar: f64 = 0.8;
    for drop in [2.0 * r * q_bar * q_bar.abs(), r * q_bar * q_bar.abs()] {
        let p = PipeParams::with_coefficients(0.0, r, 30);
        let mut s = GridState::uniform(31, 0.0, q_bar);
        for i in 0..31 {
            s.h[i] = 100.0 - drop * i as f64;
        }
        let start = s.clone();
        for _ in 0..1000 {
            s = step_interior(&s, &p).unwrap();
        }
        for i in 0..31 {
            assert!((s.h[i] - start.h[i]).abs() < 1e-12, "point {i}");
            assert!((s.q[i] - start.q[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn closed_orifice_matches_interior_update() {
    let p = PipeParams::new(600.0, 0.25, 1100.0, 0.02, 12).unwrap();
    let s = perturbed(13);
    let interior = step_interior(&s, &p).unwrap();
    for i in 1..12 {
        let u = apply_burst_boundary(&s, &p, &burst(i, 0.0)).unwrap();
        assert!((u.head - interior.h[i]).abs() < 1e-12);
        assert!((u.upstream_flow - interior.q[i]).abs() < 1e-9);
        assert!((u.upstream_flow - u.downstream_flow).abs() < 1e-9);
    }
}

#[test]
fn burst_head_non_increasing_in_area() {
    let p = PipeParams::new(600.0, 0.25, 1100.0, 0.02, 12).unwrap();
    let s = perturbed(13);
    let heads: Vec<f64> = (0..10)
        .map(|k| {
            apply_burst_boundary(&s, &p, &burst(6, 0.002 * k as f64))
                .unwrap()
                .head
        })
        .collect();
    assert!(heads.windows(2).all(|w| w[1] <= w[0]));
    assert!(heads[9] < heads[0]);
}

#[test]
fn reservoir_steady_state_is_kept() {
    let mut sc = scenario();
    sc.burst = None;
    let r = simulate(&sc).unwrap();
    for reading in &r.readings {
        assert!(!reading.output);
        let p0 = reading.pressure_pa[0];
        assert!(reading.pressure_pa.iter().all(|p| (p - p0).abs() < 1e-6));
    }
}

#[test]
fn adjacent_sensor_sees_burst_within_half_pipe_transit() {
    let sc = scenario();
    let r = simulate(&sc).unwrap();
    let near = &r.readings[0];
    let onset = sc.burst.as_ref().unwrap().onset_step;
    let first = near.first_detection.expect("detected");
    let half_transit = 2000.0 / (2.0 * 1000.0);
    assert!(first >= onset);
    assert!((first - onset) as f64 * r.dt <= half_transit);
    assert!(near.output);
    // nothing moves before the orifice opens
    assert!(near.outputs[..onset].iter().all(|&o| !o));
    // the far sensor hears it later
    let far = r.readings[1].first_detection.unwrap();
    assert!(far > first);
}

#[test]
fn huge_threshold_never_fires() {
    let mut sc = scenario();
    sc.epsilon_pa = 1e12;
    let r = simulate(&sc).unwrap();
    assert!(r
        .readings
        .iter()
        .all(|s| !s.output && s.outputs.iter().all(|&o| !o)));
}

#[test]
fn latched_output_matches_any_instant() {
    let r = simulate(&scenario()).unwrap();
    for s in &r.readings {
        assert_eq!(s.output, s.outputs.iter().any(|&o| o));
    }
    let csv = trace_csv(&r);
    let summary: Vec<&str> = csv.lines().filter(|l| l.starts_with("summary")).collect();
    assert_eq!(summary, vec!["summary,21,,,,1", "summary,35,,,,1"]);
    assert_eq!(csv.lines().count(), 1 + 201 * 2 + 2);
}

#[test]
fn split_pipe_matches_single_pipe() {
    let whole =
        Pipeline::new(vec![PipeParams::new(1000.0, 0.3, 1000.0, 0.02, 20).unwrap()]).unwrap();
    let half = PipeParams::new(500.0, 0.3, 1000.0, 0.02, 10).unwrap();
    let parts = Pipeline::new(vec![half.clone(), half]).unwrap();
    let up = Boundary::Reservoir { head_m: 60.0 };
    let down = Boundary::Reservoir { head_m: 50.0 };
    let b = burst(5, 0.004);
    let mut a = whole.steady_state(up, down, None).unwrap();
    let mut c = parts.steady_state(up, down, None).unwrap();
    for _ in 0..300 {
        a = whole.step(&a, up, down, Some(&b)).unwrap();
        c = parts.step(&c, up, down, Some(&b)).unwrap();
    }
    for i in 0..21 {
        assert!((a.h[i] - c.h[i]).abs() < 1e-8);
        assert!((a.q[i] - c.q[i]).abs() < 1e-8);
    }
}

#[test]
fn head_step_splits_at_area_change() {
    // impedance drops fourfold across the junction: transmission 0.4, reflection -0.6
    let narrow = PipeParams::new(500.0, 0.2, 1000.0, 0.0, 10).unwrap();
    let wide = PipeParams::new(500.0, 0.4, 1000.0, 0.0, 10).unwrap();
    assert!((narrow.b / wide.b - 4.0).abs() < 1e-12);
    let pipeline = Pipeline::new(vec![narrow, wide]).unwrap();
    let up = Boundary::Reservoir { head_m: 41.0 };
    let down = Boundary::Reservoir { head_m: 40.0 };
    let mut s = GridState::uniform(21, 40.0, 0.0);
    for _ in 0..15 {
        s = pipeline.step(&s, up, down, None).unwrap();
    }
    for i in (6..10).chain(11..15) {
        assert!((s.h[i] - 40.4).abs() < 1e-12, "point {i}: {}", s.h[i]);
    }
    assert!((s.h[2] - 41.0).abs() < 1e-12);
    assert_eq!(s.h[17], 40.0);
}

#[test]
fn scenario_errors() {
    let mut sc = scenario();
    sc.burst.as_mut().unwrap().grid_index = 0;
    assert!(simulate(&sc).is_err());
    let mut sc = scenario();
    sc.sensors[0].grid_index = 99;
    assert!(simulate(&sc).is_err());
    let mut sc = scenario();
    sc.pipes.push(PipeSpec {
        length_m: 100.0,
        diameter_m: 0.3,
        wave_speed_m_s: 1000.0,
        friction: 0.0,
        segments: 3,
    });
    assert!(simulate(&sc).is_err());
    assert!(parse_scenario("{}").is_err());
}
