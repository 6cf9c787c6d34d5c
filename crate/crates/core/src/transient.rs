//! Method-of-characteristics water-hammer simulation for a pipe or a series
//! of pipes, with a burst orifice boundary and thresholded pressure sensors.
//!
//! The grid is built so that `a Δt = Δx` holds exactly in every pipe. At an
//! interior point the new state follows from the `C+` characteristic through
//! the left neighbour and the `C-` characteristic through the right one:
//!
//! ```text
//! C_P = h_{i-1} + q_{i-1} (b - r |q_{i-1}|)      h = C_P - b q
//! C_M = h_{i+1} - q_{i+1} (b - r |q_{i+1}|)      h = C_M + b q
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.81;
pub const WATER_DENSITY: f64 = 1000.0;

/// Pipe geometry plus the derived grid and characteristic coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PipeParams {
    pub length_m: f64,
    pub diameter_m: f64,
    pub area_m2: f64,
    pub wave_speed_m_s: f64,
    pub friction: f64,
    pub segments: usize,
    pub dx: f64,
    pub dt: f64,
    /// Characteristic impedance `a / (g A)`.
    pub b: f64,
    /// Resistance `c Δx / (2 g D A²)`.
    pub r: f64,
}

impl PipeParams {
    pub fn new(
        length_m: f64,
        diameter_m: f64,
        wave_speed_m_s: f64,
        friction: f64,
        segments: usize,
    ) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(length_m) || !positive(diameter_m) || !positive(wave_speed_m_s) {
            return Err(Error::InvalidScenario(format!(
                "pipe length, diameter and wave speed must be positive (got {length_m}, {diameter_m}, {wave_speed_m_s})"
            )));
        }
        if !(friction.is_finite() && friction >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "friction must be non-negative, got {friction}"
            )));
        }
        if segments < 2 {
            return Err(Error::InvalidScenario(format!(
                "a pipe needs at least 2 segments, got {segments}"
            )));
        }
        let area = std::f64::consts::PI * diameter_m * diameter_m / 4.0;
        let dx = length_m / segments as f64;
        Ok(PipeParams {
            length_m,
            diameter_m,
            area_m2: area,
            wave_speed_m_s,
            friction,
            segments,
            dx,
            dt: dx / wave_speed_m_s,
            b: wave_speed_m_s / (GRAVITY * area),
            r: friction * dx / (2.0 * GRAVITY * diameter_m * area * area),
        })
    }

    /// Unit grid with the characteristic coefficients given directly. Used to
    /// study the scheme itself, including the `b = 0` steady-state reduction;
    /// the geometric fields are placeholders.
    pub fn with_coefficients(b: f64, r: f64, segments: usize) -> Self {
        PipeParams {
            length_m: segments as f64,
            diameter_m: 1.0,
            area_m2: std::f64::consts::PI / 4.0,
            wave_speed_m_s: 1.0,
            friction: 0.0,
            segments,
            dx: 1.0,
            dt: 1.0,
            b,
            r,
        }
    }
}

/// Burst node whose two adjacent segments carry different flows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFlow {
    pub index: usize,
    /// Flow leaving the node downstream; `q[index]` holds the upstream side.
    pub downstream: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub h: Vec<f64>,
    pub q: Vec<f64>,
    pub step: usize,
    pub split: Option<SplitFlow>,
}

impl GridState {
    pub fn uniform(points: usize, head: f64, flow: f64) -> Self {
        GridState {
            h: vec![head; points],
            q: vec![flow; points],
            step: 0,
            split: None,
        }
    }

    /// Flow leaving point `i` towards `i + 1`.
    fn q_right(&self, i: usize) -> f64 {
        match self.split {
            Some(s) if s.index == i => s.downstream,
            _ => self.q[i],
        }
    }

    fn check_finite(&self) -> Result<()> {
        match self
            .h
            .iter()
            .zip(&self.q)
            .position(|(h, q)| !h.is_finite() || !q.is_finite())
        {
            Some(index) => Err(Error::NonFinite {
                step: self.step,
                index,
            }),
            None => match self.split {
                Some(s) if !s.downstream.is_finite() => Err(Error::NonFinite {
                    step: self.step,
                    index: s.index,
                }),
                _ => Ok(()),
            },
        }
    }
}

fn c_plus(h: f64, q: f64, b: f64, r: f64) -> f64 {
    h + q * (b - r * q.abs())
}

fn c_minus(h: f64, q: f64, b: f64, r: f64) -> f64 {
    h - q * (b - r * q.abs())
}

/// Head and flow at an interior point of a uniform pipe from its neighbours'
/// previous values. With `b = 0` flow is not constrained by the
/// characteristics and is carried over unchanged.
fn interior_point(
    h_prev: f64,
    q_prev: f64,
    left: (f64, f64),
    right: (f64, f64),
    b: f64,
    r: f64,
) -> (f64, f64) {
    let _ = h_prev;
    let (h_l, q_l) = left;
    let (h_r, q_r) = right;
    let h = 0.5 * (h_l + h_r + b * (q_l - q_r) + r * (q_r * q_r.abs() - q_l * q_l.abs()));
    let q = if b == 0.0 {
        q_prev
    } else {
        (h - h_r + b * q_r - r * q_r * q_r.abs()) / b
    };
    (h, q)
}

/// Advances interior points `1..segments` of a single pipe by one step.
/// Boundary values are copied from `prev`; callers overwrite them.
pub fn step_interior(prev: &GridState, params: &PipeParams) -> Result<GridState> {
    let points = params.segments + 1;
    if prev.h.len() != points || prev.q.len() != points {
        return Err(Error::InvalidScenario(format!(
            "grid has {} points, pipe expects {points}",
            prev.h.len()
        )));
    }
    let mut next = prev.clone();
    next.step = prev.step + 1;
    next.split = None;
    for i in 1..params.segments {
        let (h, q) = interior_point(
            prev.h[i],
            prev.q[i],
            (prev.h[i - 1], prev.q_right(i - 1)),
            (prev.h[i + 1], prev.q[i + 1]),
            params.b,
            params.r,
        );
        next.h[i] = h;
        next.q[i] = q;
    }
    next.check_finite()?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstSpec {
    pub grid_index: usize,
    pub discharge_coefficient: f64,
    /// Fully open orifice area.
    pub area_m2: f64,
    /// First step with a non-zero orifice.
    #[serde(default)]
    pub onset_step: usize,
    /// Steps taken to open linearly to `area_m2`; 0 opens instantly.
    #[serde(default)]
    pub ramp_steps: usize,
}

impl BurstSpec {
    /// `A_d` at time step `step`.
    pub fn area_at(&self, step: usize) -> f64 {
        if step < self.onset_step {
            0.0
        } else if self.ramp_steps == 0 {
            self.area_m2
        } else {
            let frac = (step - self.onset_step + 1) as f64 / self.ramp_steps as f64;
            self.area_m2 * frac.min(1.0)
        }
    }
}

/// Result of the orifice boundary at the burst node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstUpdate {
    pub head: f64,
    pub upstream_flow: f64,
    pub downstream_flow: f64,
}

/// Solves the orifice boundary
/// `h + (b/2) C_d A_d sqrt(2 g h) = (C_M + C_P) / 2` for the head at the
/// burst node at step `prev.step + 1`, via `u = sqrt(h)`. Segment flows are
/// read back off the two characteristics.
pub fn apply_burst_boundary(
    prev: &GridState,
    params: &PipeParams,
    burst: &BurstSpec,
) -> Result<BurstUpdate> {
    let i = burst.grid_index;
    if i == 0 || i >= params.segments {
        return Err(Error::InvalidScenario(format!(
            "burst grid index {i} must be interior to the pipe (1..{})",
            params.segments
        )));
    }
    let area = burst.area_at(prev.step + 1);
    orifice_update(
        c_plus(prev.h[i - 1], prev.q_right(i - 1), params.b, params.r),
        c_minus(prev.h[i + 1], prev.q[i + 1], params.b, params.r),
        params.b,
        burst.discharge_coefficient * area,
        prev.step + 1,
        i,
    )
}

fn orifice_update(
    cp: f64,
    cm: f64,
    b: f64,
    cd_area: f64,
    step: usize,
    index: usize,
) -> Result<BurstUpdate> {
    if !(b > 0.0) {
        return Err(Error::InvalidScenario(
            "burst boundary needs a positive impedance b".into(),
        ));
    }
    if !(cd_area >= 0.0) {
        return Err(Error::InvalidScenario(format!(
            "orifice C_d A_d must be non-negative, got {cd_area}"
        )));
    }
    let gamma = 0.5 * (cm + cp);
    if gamma < 0.0 || !gamma.is_finite() {
        return Err(Error::UnphysicalHead {
            step,
            index,
            value: gamma,
        });
    }
    let beta = 0.5 * b * cd_area * (2.0 * GRAVITY).sqrt();
    // positive root of u² + βu − γ = 0, written to avoid cancellation
    let u = if gamma == 0.0 {
        0.0
    } else {
        2.0 * gamma / (beta + (beta * beta + 4.0 * gamma).sqrt())
    };
    let head = u * u;
    Ok(BurstUpdate {
        head,
        upstream_flow: (cp - head) / b,
        downstream_flow: (head - cm) / b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    Reservoir { head_m: f64 },
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipeSpec {
    pub length_m: f64,
    pub diameter_m: f64,
    pub wave_speed_m_s: f64,
    #[serde(default)]
    pub friction: f64,
    pub segments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub grid_index: usize,
    #[serde(default)]
    pub elevation_m: f64,
}

/// Scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub pipes: Vec<PipeSpec>,
    pub upstream: Boundary,
    pub downstream: Boundary,
    /// Initial head when neither end fixes one.
    #[serde(default)]
    pub initial_head_m: Option<f64>,
    #[serde(default)]
    pub burst: Option<BurstSpec>,
    pub horizon_steps: usize,
    pub sensors: Vec<SensorSpec>,
    /// Detection threshold on `|p - p̂|`, in pascals.
    pub epsilon_pa: f64,
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    Ok(serde_json::from_str(text)?)
}

/// Pipes joined end to end on one characteristic grid.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pipes: Vec<PipeParams>,
    /// Per segment `(b, r)`.
    segments: Vec<(f64, f64)>,
    /// Grid indices of pipe-to-pipe junctions.
    junctions: Vec<usize>,
    dt: f64,
}

impl Pipeline {
    pub fn new(pipes: Vec<PipeParams>) -> Result<Self> {
        let Some(first) = pipes.first() else {
            return Err(Error::InvalidScenario("no pipes".into()));
        };
        let dt = first.dt;
        for p in &pipes[1..] {
            if ((p.dt - dt) / dt).abs() > 1e-9 {
                return Err(Error::IncompatibleTimeStep {
                    first: dt,
                    other: p.dt,
                });
            }
        }
        let mut segments = Vec::new();
        let mut junctions = Vec::new();
        for (k, p) in pipes.iter().enumerate() {
            if k > 0 {
                junctions.push(segments.len());
            }
            segments.extend(std::iter::repeat_n((p.b, p.r), p.segments));
        }
        Ok(Pipeline {
            pipes,
            segments,
            junctions,
            dt,
        })
    }

    pub fn points(&self) -> usize {
        self.segments.len() + 1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn pipes(&self) -> &[PipeParams] {
        &self.pipes
    }

    pub fn total_length(&self) -> f64 {
        self.pipes.iter().map(|p| p.length_m).sum()
    }

    fn is_junction(&self, i: usize) -> bool {
        self.junctions.contains(&i)
    }

    /// Steady friction profile between the two boundaries.
    pub fn steady_state(
        &self,
        upstream: Boundary,
        downstream: Boundary,
        initial_head: Option<f64>,
    ) -> Result<GridState> {
        let points = self.points();
        let total_r: f64 = self.segments.iter().map(|&(_, r)| r).sum();
        let (h0, flow) = match (upstream, downstream) {
            (Boundary::Reservoir { head_m: hu }, Boundary::Reservoir { head_m: hd }) => {
                let dh = hu - hd;
                let flow = if dh == 0.0 {
                    0.0
                } else if total_r == 0.0 {
                    return Err(Error::InvalidScenario(
                        "frictionless pipeline between unequal reservoirs has no steady state"
                            .into(),
                    ));
                } else {
                    dh.signum() * (dh.abs() / total_r).sqrt()
                };
                (hu, flow)
            }
            (Boundary::Reservoir { head_m }, Boundary::Closed)
            | (Boundary::Closed, Boundary::Reservoir { head_m }) => (head_m, 0.0),
            (Boundary::Closed, Boundary::Closed) => match initial_head {
                Some(h) => (h, 0.0),
                None => {
                    return Err(Error::InvalidScenario(
                        "closed at both ends: initial_head_m is required".into(),
                    ))
                }
            },
        };
        let mut state = GridState::uniform(points, h0, flow);
        for (s, &(_, r)) in self.segments.iter().enumerate() {
            state.h[s + 1] = state.h[s] - r * flow * flow.abs();
        }
        Ok(state)
    }

    /// One time step of the whole pipeline.
    pub fn step(
        &self,
        prev: &GridState,
        upstream: Boundary,
        downstream: Boundary,
        burst: Option<&BurstSpec>,
    ) -> Result<GridState> {
        let n = self.segments.len();
        let mut next = prev.clone();
        next.step = prev.step + 1;
        next.split = None;

        for i in 1..n {
            let (b_l, r_l) = self.segments[i - 1];
            let (b_r, r_r) = self.segments[i];
            let left = (prev.h[i - 1], prev.q_right(i - 1));
            let right = (prev.h[i + 1], prev.q[i + 1]);
            if let Some(burst) = burst.filter(|b| b.grid_index == i) {
                let cd_area = burst.discharge_coefficient * burst.area_at(next.step);
                let u = orifice_update(
                    c_plus(left.0, left.1, b_l, r_l),
                    c_minus(right.0, right.1, b_r, r_r),
                    b_l,
                    cd_area,
                    next.step,
                    i,
                )?;
                next.h[i] = u.head;
                next.q[i] = u.upstream_flow;
                next.split = Some(SplitFlow {
                    index: i,
                    downstream: u.downstream_flow,
                });
            } else if self.is_junction(i) {
                let cp = c_plus(left.0, left.1, b_l, r_l);
                let cm = c_minus(right.0, right.1, b_r, r_r);
                let q = (cp - cm) / (b_l + b_r);
                next.h[i] = cp - b_l * q;
                next.q[i] = q;
            } else {
                let (h, q) = interior_point(prev.h[i], prev.q[i], left, right, b_l, r_l);
                next.h[i] = h;
                next.q[i] = q;
            }
        }

        let (b0, r0) = self.segments[0];
        let cm = c_minus(prev.h[1], prev.q[1], b0, r0);
        match upstream {
            Boundary::Reservoir { head_m } => {
                next.h[0] = head_m;
                next.q[0] = (head_m - cm) / b0;
            }
            Boundary::Closed => {
                next.h[0] = cm;
                next.q[0] = 0.0;
            }
        }
        let (bn, rn) = self.segments[n - 1];
        let cp = c_plus(prev.h[n - 1], prev.q_right(n - 1), bn, rn);
        match downstream {
            Boundary::Reservoir { head_m } => {
                next.h[n] = head_m;
                next.q[n] = (cp - head_m) / bn;
            }
            Boundary::Closed => {
                next.h[n] = cp;
                next.q[n] = 0.0;
            }
        }
        next.check_finite()?;
        Ok(next)
    }
}

/// Pressure series at one sensor and its thresholded outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorReading {
    pub grid_index: usize,
    pub elevation_m: f64,
    pub head_m: Vec<f64>,
    pub flow_m3s: Vec<f64>,
    /// `p_t = (h_t - z) ρ g`.
    pub pressure_pa: Vec<f64>,
    /// Pressure of the burst-free run, `p̂_t`.
    pub expected_pa: Vec<f64>,
    /// Instantaneous output `|p_t - p̂_t| >= ε`.
    pub outputs: Vec<bool>,
    /// Latched output: set if any instantaneous output is set.
    pub output: bool,
    pub first_detection: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub dt: f64,
    pub steps: usize,
    pub readings: Vec<SensorReading>,
}

pub fn pressure(head: f64, elevation: f64) -> f64 {
    (head - elevation) * WATER_DENSITY * GRAVITY
}

fn march(
    pipeline: &Pipeline,
    scenario: &Scenario,
    burst: Option<&BurstSpec>,
) -> Result<Vec<GridState>> {
    let mut state = pipeline.steady_state(
        scenario.upstream,
        scenario.downstream,
        scenario.initial_head_m,
    )?;
    let mut states = Vec::with_capacity(scenario.horizon_steps + 1);
    states.push(state.clone());
    for _ in 0..scenario.horizon_steps {
        state = pipeline.step(&state, scenario.upstream, scenario.downstream, burst)?;
        states.push(state.clone());
    }
    Ok(states)
}

/// Runs the scenario twice, with and without the burst, and thresholds the
/// pressure difference at each sensor.
pub fn simulate(scenario: &Scenario) -> Result<SimulationResult> {
    let pipes = scenario
        .pipes
        .iter()
        .map(|p| {
            PipeParams::new(
                p.length_m,
                p.diameter_m,
                p.wave_speed_m_s,
                p.friction,
                p.segments,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let pipeline = Pipeline::new(pipes)?;
    let points = pipeline.points();
    if !(scenario.epsilon_pa > 0.0) {
        return Err(Error::InvalidScenario(format!(
            "epsilon_pa must be positive, got {}",
            scenario.epsilon_pa
        )));
    }
    if let Some(s) = scenario.sensors.iter().find(|s| s.grid_index >= points) {
        return Err(Error::InvalidScenario(format!(
            "sensor grid index {} outside 0..{points}",
            s.grid_index
        )));
    }
    if let Some(b) = &scenario.burst {
        if b.grid_index == 0 || b.grid_index >= points - 1 || pipeline.is_junction(b.grid_index) {
            return Err(Error::InvalidScenario(format!(
                "burst grid index {} must be interior to a pipe",
                b.grid_index
            )));
        }
    }

    let baseline = march(&pipeline, scenario, None)?;
    let burst_run = match &scenario.burst {
        Some(b) => march(&pipeline, scenario, Some(b))?,
        None => baseline.clone(),
    };

    let readings = scenario
        .sensors
        .iter()
        .map(|s| {
            let i = s.grid_index;
            let head_m: Vec<f64> = burst_run.iter().map(|st| st.h[i]).collect();
            let flow_m3s = burst_run.iter().map(|st| st.q[i]).collect();
            let pressure_pa: Vec<f64> =
                head_m.iter().map(|&h| pressure(h, s.elevation_m)).collect();
            let expected_pa: Vec<f64> = baseline
                .iter()
                .map(|st| pressure(st.h[i], s.elevation_m))
                .collect();
            let outputs: Vec<bool> = pressure_pa
                .iter()
                .zip(&expected_pa)
                .map(|(p, e)| (p - e).abs() >= scenario.epsilon_pa)
                .collect();
            let first_detection = outputs.iter().position(|&o| o);
            SensorReading {
                grid_index: i,
                elevation_m: s.elevation_m,
                head_m,
                flow_m3s,
                pressure_pa,
                expected_pa,
                output: first_detection.is_some(),
                outputs,
                first_detection,
            }
        })
        .collect();

    Ok(SimulationResult {
        dt: pipeline.dt(),
        steps: scenario.horizon_steps,
        readings,
    })
}

/// Trace CSV: `step,grid_index,head_m,flow_m3s,pressure_pa,output` for every
/// step and sensor, followed by one `summary` row per sensor carrying the
/// latched output.
pub fn trace_csv(result: &SimulationResult) -> String {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    w.write_record([
        "step",
        "grid_index",
        "head_m",
        "flow_m3s",
        "pressure_pa",
        "output",
    ])
    .expect("write to memory");
    for t in 0..=result.steps {
        for r in &result.readings {
            w.write_record([
                t.to_string(),
                r.grid_index.to_string(),
                r.head_m[t].to_string(),
                r.flow_m3s[t].to_string(),
                r.pressure_pa[t].to_string(),
                u8::from(r.outputs[t]).to_string(),
            ])
            .expect("write to memory");
        }
    }
    for r in &result.readings {
        w.write_record([
            "summary".to_string(),
            r.grid_index.to_string(),
            String::new(),
            String::new(),
            String::new(),
            u8::from(r.output).to_string(),
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
}
