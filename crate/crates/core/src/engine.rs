//! Fixed-step simulation loop.
//!
//! Within each step the order is: compute `e`, `σ`, `ė` from the current
//! state and held controls; let every follower whose trigger value is
//! nonnegative sample and update its held control; log the step; then
//! advance leader and followers together by one RK4 step with the held
//! controls. Trigger instants are therefore quantized to the step grid.

use thiserror::Error;

use crate::controller::{
    self, forcing_bound, gain_adequacy, reaching_check, ControllerError, ControllerParams,
    ControllerState, FormationSpec, GainReport, GainTrace, ReachingReport,
};
use crate::dynamics::{self, lipschitz_probe, AgentModel, DisturbanceKind, DisturbanceSpec, Dynamics, DynamicsError};
use crate::graph::{build_topology, GraphError, TopologyMatrices};
use crate::numeric::{rk4_step, NumericError};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_REACHING_BAND: f64 = 0.25;
const LIPSCHITZ_SAMPLES: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("non-finite state at step {step} (t = {t}, agent {agent})")]
    NonFinite { step: usize, t: f64, agent: usize },
}

impl SimError {
    /// Failures that happen while integrating, as opposed to bad input.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(self, SimError::NonFinite { .. })
    }
}

fn invalid(key: &'static str, reason: impl Into<String>) -> SimError {
    SimError::Invalid {
        key,
        reason: reason.into(),
    }
}

/// Adjacency rows and pinning vector as given by the user.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologySpec {
    pub adjacency: Vec<Vec<f64>>,
    pub pinning: Vec<f64>,
}

impl TopologySpec {
    pub fn build(&self) -> Result<TopologyMatrices, GraphError> {
        build_topology(&self.adjacency, &self.pinning)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorRateMode {
    /// `ė` from the true instantaneous plant rates.
    #[default]
    Exact,
    /// `ė ≈ (e_k - e_{k-1}) / dt`, zero on the first step.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TriggerPolicy {
    /// Fire when the trigger value is nonnegative.
    #[default]
    Rule,
    /// Fire on every step (periodic sampling at `dt`).
    EveryStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub topology: TopologySpec,
    pub leader_model: String,
    pub follower_models: Vec<String>,
    pub params: ControllerParams,
    pub formation: FormationSpec,
    pub disturbance_kind: DisturbanceKind,
    pub leader_disturbance: f64,
    pub follower_disturbance: Vec<f64>,
    pub leader_initial: f64,
    pub initial_states: Vec<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub error_rate: ErrorRateMode,
    pub trigger: TriggerPolicy,
    /// Use the true `ς_j(t^k) - ς_0(t^k)` inside the control law instead
    /// of `params.assumed_disturbance`.
    pub oracle_disturbance: bool,
    pub reaching_band: f64,
}

impl SimConfig {
    pub fn n_followers(&self) -> usize {
        self.initial_states.len()
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive and finite, got {}", self.dt)));
        }
        if !(self.t_end > self.dt && self.t_end.is_finite()) {
            return Err(invalid("t_end", format!("must be finite and exceed dt, got {}", self.t_end)));
        }
        let n = self.n_followers();
        if n == 0 {
            return Err(invalid("initial", "at least one follower is required"));
        }
        if !self.leader_initial.is_finite() {
            return Err(invalid("leader_initial", "must be finite"));
        }
        if self.initial_states.iter().any(|x| !x.is_finite()) {
            return Err(invalid("initial", "initial states must be finite"));
        }
        let lengths = [
            ("followers", self.follower_models.len()),
            ("formation", self.formation.offsets.len()),
            ("amplitudes", self.follower_disturbance.len()),
            ("assumed_disturbance", self.params.assumed_disturbance.len()),
            ("pinning", self.topology.pinning.len()),
            ("adjacency", self.topology.adjacency.len()),
        ];
        for (key, len) in lengths {
            if len != n {
                return Err(invalid(key, format!("expected {n} entries (one per follower), got {len}")));
            }
        }
        if self.formation.offsets.iter().any(|a| !a.is_finite()) {
            return Err(invalid("formation", "offsets must be finite"));
        }
        if self
            .follower_disturbance
            .iter()
            .chain(std::iter::once(&self.leader_disturbance))
            .any(|a| !(a.is_finite() && *a >= 0.0))
        {
            return Err(invalid("amplitudes", "disturbance amplitudes must be finite and >= 0"));
        }
        if !(self.reaching_band >= 0.0 && self.reaching_band.is_finite()) {
            return Err(invalid("reaching_band", "must be finite and >= 0"));
        }
        self.params.validate()?;
        Ok(())
    }

    /// Resolves model names into agent models with their disturbances.
    pub fn models(&self) -> Result<(AgentModel, Vec<AgentModel>), SimError> {
        let leader = AgentModel::new(
            0,
            self.leader_model.parse::<Dynamics>()?,
            DisturbanceSpec::new(self.leader_disturbance, self.disturbance_kind),
        );
        let followers = self
            .follower_models
            .iter()
            .zip(&self.follower_disturbance)
            .enumerate()
            .map(|(i, (name, amp))| {
                Ok(AgentModel::new(
                    i + 1,
                    name.parse::<Dynamics>()?,
                    DisturbanceSpec::new(*amp, self.disturbance_kind),
                ))
            })
            .collect::<Result<Vec<_>, DynamicsError>>()?;
        Ok((leader, followers))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub x0: f64,
    pub x: Vec<f64>,
    /// Held controls applied over `[t, t + dt)`.
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub e: Vec<f64>,
    /// `½ σᵀσ`.
    pub v: f64,
    /// Active disturbance values, leader first.
    pub disturbance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub dt: f64,
    pub n_followers: usize,
    pub records: Vec<StepRecord>,
}

impl TrajectoryLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn sigma_trace(&self, i: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.sigma[i]).collect()
    }

    /// Per-agent Lyapunov trace `½ σ_i²`.
    pub fn agent_v_trace(&self, i: usize) -> Vec<f64> {
        self.records.iter().map(|r| 0.5 * r.sigma[i] * r.sigma[i]).collect()
    }

    pub fn state_trace(&self, i: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.x[i]).collect()
    }

    pub fn leader_trace(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.x0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub step: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub dt: f64,
    /// Number of grid points in the run.
    pub total_steps: usize,
    pub per_agent: Vec<Vec<Event>>,
}

impl EventLog {
    pub fn new(dt: f64, n: usize, total_steps: usize) -> Self {
        Self {
            dt,
            total_steps,
            per_agent: vec![Vec::new(); n],
        }
    }

    /// Builds a log from instants already on the `dt` grid.
    pub fn from_instants(dt: f64, total_steps: usize, instants: &[Vec<f64>]) -> Self {
        Self {
            dt,
            total_steps,
            per_agent: instants
                .iter()
                .map(|ts| {
                    ts.iter()
                        .map(|&t| Event {
                            step: (t / dt).round() as usize,
                            t,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn push(&mut self, agent: usize, step: usize) {
        self.per_agent[agent].push(Event {
            step,
            t: step as f64 * self.dt,
        });
    }

    /// `T_i^k = t_i^{k+1} - t_i^k`, computed from grid indices.
    pub fn inter_event_times(&self, agent: usize) -> Vec<f64> {
        self.per_agent[agent]
            .windows(2)
            .map(|w| (w[1].step - w[0].step) as f64 * self.dt)
            .collect()
    }

    pub fn count(&self, agent: usize) -> usize {
        self.per_agent[agent].len()
    }

    pub fn count_in(&self, agent: usize, from_step: usize, to_step: usize) -> usize {
        self.per_agent[agent]
            .iter()
            .filter(|e| e.step >= from_step && e.step < to_step)
            .count()
    }

    pub fn total(&self) -> usize {
        self.per_agent.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentEventStats {
    /// 1-based follower index.
    pub agent: usize,
    pub count: usize,
    pub min: Option<f64>,
    pub mean: Option<f64>,
    pub max: Option<f64>,
    pub events_to_steps: f64,
}

impl AgentEventStats {
    /// Discrete Zeno exclusion: every inter-event time is at least `dt`.
    pub fn certifies_min_dt(&self, dt: f64) -> bool {
        self.min.map_or(true, |m| m >= dt)
    }
}

pub fn inter_event_stats(events: &EventLog) -> Vec<AgentEventStats> {
    (0..events.per_agent.len())
        .map(|i| {
            let times = events.inter_event_times(i);
            let count = events.count(i);
            let (min, mean, max) = if times.is_empty() {
                (None, None, None)
            } else {
                let min = times.iter().copied().fold(f64::INFINITY, f64::min);
                let max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mean = times.iter().sum::<f64>() / times.len() as f64;
                (Some(min), Some(mean), Some(max))
            };
            let events_to_steps = if events.total_steps == 0 {
                0.0
            } else {
                count as f64 / events.total_steps as f64
            };
            AgentEventStats {
                agent: i + 1,
                count,
                min,
                mean,
                max,
                events_to_steps,
            }
        })
        .collect()
}

/// `|x_i - x_0 - α_i|` for every step and follower.
pub fn formation_error_trace(log: &TrajectoryLog, offsets: &FormationSpec) -> Vec<Vec<f64>> {
    log.records
        .iter()
        .map(|r| {
            r.x.iter()
                .zip(&offsets.offsets)
                .map(|(xi, ai)| (xi - r.x0 - ai).abs())
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub lambda2: Option<f64>,
    pub warnings: Vec<String>,
    pub reaching_band: f64,
    /// Per follower; `None` when the trace was too short.
    pub reaching: Vec<Option<ReachingReport>>,
    pub lipschitz: f64,
    pub forcing_bound: f64,
    pub gain: GainReport,
    /// Upper bound on how late a trigger instant can be reported.
    pub trigger_quantization: f64,
    /// Per follower, the peak `|x_i(t^k) - x_i(t)|` inside each
    /// inter-event interval.
    pub interval_peak_drift: Vec<Vec<f64>>,
    /// Per follower, the largest event count in any 1 s window over the
    /// second half of the horizon.
    pub late_window_max_events: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trajectory: TrajectoryLog,
    pub events: EventLog,
    pub diagnostics: Diagnostics,
}

pub fn run(config: &SimConfig) -> Result<RunOutput, SimError> {
    config.validate()?;
    let (leader, followers) = config.models()?;
    run_with_models(config, leader, followers)
}

/// Same as [`run`] with explicit agent models (model names in `config`
/// are ignored).
pub fn run_with_models(
    config: &SimConfig,
    leader: AgentModel,
    followers: Vec<AgentModel>,
) -> Result<RunOutput, SimError> {
    config.validate()?;
    let topology = config.topology.build()?;
    let ctl = controller::Controller::new(
        &topology,
        leader,
        followers,
        config.params.clone(),
        config.formation.clone(),
    )?;
    let lambda2 = topology.lambda2().ok().flatten();
    let warnings = config.params.warnings(lambda2);

    let n = ctl.n();
    let dt = config.dt;
    let n_steps = config.n_steps();
    let mut state = ControllerState::new(n);
    let mut events = EventLog::new(dt, n, n_steps + 1);
    let mut records = Vec::with_capacity(n_steps + 1);
    let mut gain_traces = vec![GainTrace::default(); n];
    let mut error_at_event = vec![0.0; n];
    let mut interval_peak = vec![Vec::<f64>::new(); n];
    let mut current_peak = vec![0.0f64; n];

    let mut x0 = config.leader_initial;
    let mut x = config.initial_states.clone();
    let mut prev_e: Option<Vec<f64>> = None;
    let (mut lo, mut hi) = (x0, x0);

    for step in 0..=n_steps {
        let t = step as f64 * dt;
        for v in std::iter::once(x0).chain(x.iter().copied()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let dist0 = ctl.leader.disturbance.signal(t);
        let dist: Vec<f64> = ctl.followers.iter().map(|m| m.disturbance.signal(t)).collect();

        let e = ctl.errors(&x, x0);
        let sigma = ctl.surface(&e);
        let edot: Vec<f64> = match config.error_rate {
            ErrorRateMode::Exact => {
                let r0 = dynamics::eval_dynamics(&ctl.leader, t, x0, 0.0, true)
                    .map_err(|_| SimError::NonFinite { step, t, agent: 0 })?;
                (0..n)
                    .map(|i| {
                        dynamics::eval_dynamics(&ctl.followers[i], t, x[i], state.held_control[i], true)
                            .map(|ri| ri - r0)
                            .map_err(|_| SimError::NonFinite { step, t, agent: i + 1 })
                    })
                    .collect::<Result<_, _>>()?
            }
            ErrorRateMode::Backward => match &prev_e {
                Some(p) => e.iter().zip(p).map(|(a, b)| (a - b) / dt).collect(),
                None => vec![0.0; n],
            },
        };

        let mut snapshot = None;
        for i in 0..n {
            let fire = match config.trigger {
                TriggerPolicy::EveryStep => true,
                TriggerPolicy::Rule => {
                    controller::should_trigger(controller::trigger_value(e[i], edot[i], t, &ctl.params))
                }
            };
            if !fire {
                continue;
            }
            let snap = snapshot.get_or_insert_with(|| {
                let assumed = if config.oracle_disturbance {
                    dist.iter().map(|d| d - dist0).collect()
                } else {
                    ctl.params.assumed_disturbance.clone()
                };
                ctl.snapshot(t, &x, x0, assumed)
            });
            let u = ctl.update(i, snap);
            if state.event_count[i] > 0 {
                interval_peak[i].push(current_peak[i]);
            }
            current_peak[i] = 0.0;
            error_at_event[i] = e[i].abs();
            state.record_event(i, snap.clone(), u);
            events.push(i, step);
        }

        for i in 0..n {
            let fd = state.follower_drift(i, x[i]).abs();
            current_peak[i] = current_peak[i].max(fd);
            gain_traces[i].error_at_event.push(error_at_event[i]);
            gain_traces[i].follower_drift.push(fd);
            gain_traces[i].leader_drift.push(state.leader_drift(i, x0).abs());
        }

        let v = 0.5 * sigma.iter().map(|s| s * s).sum::<f64>();
        let mut disturbance = Vec::with_capacity(n + 1);
        disturbance.push(dist0);
        disturbance.extend_from_slice(&dist);
        records.push(StepRecord {
            t,
            x0,
            x: x.clone(),
            u: state.held_control.clone(),
            sigma,
            e: e.clone(),
            v,
            disturbance,
        });
        prev_e = Some(e);

        if step == n_steps {
            break;
        }

        let mut full = Vec::with_capacity(n + 1);
        full.push(x0);
        full.extend_from_slice(&x);
        let held = &state.held_control;
        let next = rk4_step(
            |tt, s| {
                let mut d = Vec::with_capacity(n + 1);
                d.push(dynamics::eval_dynamics(&ctl.leader, tt, s[0], 0.0, true).unwrap_or(f64::NAN));
                for i in 0..n {
                    d.push(
                        dynamics::eval_dynamics(&ctl.followers[i], tt, s[i + 1], held[i], true)
                            .unwrap_or(f64::NAN),
                    );
                }
                d
            },
            t,
            &full,
            dt,
        )
        .map_err(|err| match err {
            NumericError::NonFiniteDerivative { t, index } => SimError::NonFinite {
                step,
                t,
                agent: index,
            },
            _ => SimError::NonFinite { step, t, agent: 0 },
        })?;
        if let Some(agent) = next.iter().position(|v| !v.is_finite()) {
            return Err(SimError::NonFinite {
                step: step + 1,
                t: t + dt,
                agent,
            });
        }
        x0 = next[0];
        x.copy_from_slice(&next[1..]);
    }

    for i in 0..n {
        if state.event_count[i] > 0 {
            interval_peak[i].push(current_peak[i]);
        }
    }

    let trajectory = TrajectoryLog {
        dt,
        n_followers: n,
        records,
    };

    let reaching = (0..n)
        .map(|i| {
            reaching_check(
                &trajectory.sigma_trace(i),
                &trajectory.agent_v_trace(i),
                dt,
                config.reaching_band,
            )
            .ok()
        })
        .collect();

    let margin = 1.0;
    let domain = (lo - margin, hi + margin);
    let lipschitz = std::iter::once(&ctl.leader)
        .chain(&ctl.followers)
        .map(|m| lipschitz_probe(m, domain, (0.0, config.t_end), LIPSCHITZ_SAMPLES, config.seed))
        .fold(0.0, f64::max);
    let follower_amp = config.follower_disturbance.iter().copied().fold(0.0, f64::max);
    let forcing = forcing_bound(&ctl.grounded, follower_amp, config.leader_disturbance);
    let gain = gain_adequacy(ctl.params.k, &gain_traces, lipschitz, &ctl.grounded, forcing);

    let half_step = n_steps / 2;
    let window = ((1.0 / dt).round() as usize).max(1);
    let late_window_max_events = (0..n)
        .map(|i| {
            let mut best = 0;
            let mut start = half_step;
            while start <= n_steps {
                best = best.max(events.count_in(i, start, start + window));
                start += window;
            }
            best
        })
        .collect();

    Ok(RunOutput {
        trajectory,
        events,
        diagnostics: Diagnostics {
            lambda2,
            warnings,
            reaching_band: config.reaching_band,
            reaching,
            lipschitz,
            forcing_bound: forcing,
            gain,
            trigger_quantization: dt,
            interval_peak_drift: interval_peak,
            late_window_max_events,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_of_small_log() {
        let log = EventLog::from_instants(1e-3, 11, &[vec![0.0, 0.003, 0.010], vec![], vec![0.004]]);
        let s = inter_event_stats(&log);
        assert_eq!(s[0].count, 3);
        assert!((s[0].min.unwrap() - 0.003).abs() < 1e-12);
        assert!((s[0].mean.unwrap() - 0.005).abs() < 1e-12);
        assert!((s[0].max.unwrap() - 0.007).abs() < 1e-12);
        assert_eq!(s[1].count, 0);
        assert_eq!(s[1].min, None);
        assert_eq!(s[2].count, 1);
        assert_eq!(s[2].mean, None);
        assert!(s.iter().all(|a| a.certifies_min_dt(1e-3)));
    }

    #[test]
    fn empty_log_has_zero_counts() {
        let log = EventLog::new(1e-3, 3, 0);
        let s = inter_event_stats(&log);
        assert!(s.iter().all(|a| a.count == 0 && a.events_to_steps == 0.0));
    }

    #[test]
    fn formation_trace_zero_when_in_formation() {
        let log = TrajectoryLog {
            dt: 0.1,
            n_followers: 2,
            records: vec![StepRecord {
                t: 0.0,
                x0: 1.0,
                x: vec![2.0, 4.0],
                u: vec![0.0; 2],
                sigma: vec![0.0; 2],
                e: vec![0.0; 2],
                v: 0.0,
                disturbance: vec![0.0; 3],
            }],
        };
        let f = FormationSpec::new(vec![1.0, 3.0]);
        assert_eq!(formation_error_trace(&log, &f), vec![vec![0.0, 0.0]]);
        let z = formation_error_trace(&log, &FormationSpec::consensus(2));
        assert_eq!(z, vec![vec![1.0, 3.0]]);
    }
}
