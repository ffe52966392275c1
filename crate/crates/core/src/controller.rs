//! Event-triggered sliding-mode consensus law.
//!
//! Each follower `i` holds its control constant between its own trigger
//! instants. At an instant `t_i^k` the controller samples every agent,
//! forms the stacked vector
//!
//! ```text
//! w_j = K |σ_j|^τ sign(σ_j) + f_j(t, x_j) - f_0(t, x_0) - u_0(t) + d_j
//! ```
//!
//! (all at `t_i^k`) and applies `u_i = -(H⁻¹ w)_i`, where `H = L + B` and
//! `σ = H·e`. Follower `i` triggers when
//! `|γ₁ e_i + γ₂ ė_i²| - (c₀ + c₁ e^{-βt}) >= 0`.

use thiserror::Error;

use crate::dynamics::{leader_u0, AgentModel, LEADER_INPUT_BOUND};
use crate::graph::TopologyMatrices;
use crate::numeric::{DenseMatrix, NumericError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("invalid parameter `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error(
        "grounded Laplacian L+B is not invertible ({0}); the leader must reach every follower (Lemma 2)"
    )]
    NotInvertible(NumericError),
    #[error("expected {expected} values for `{what}`, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("trace has {len} samples, need at least 3")]
    InsufficientData { len: usize },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ControllerError {
    ControllerError::Invalid {
        key,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerParams {
    /// Switching gain `K > 0`.
    pub k: f64,
    /// Exponent `τ ∈ (0, 1)`.
    pub tau: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub c0: f64,
    pub c1: f64,
    /// Threshold decay rate `β > 0`.
    pub beta: f64,
    /// Per-follower values standing in for `ς_i - ς_0` inside the law.
    pub assumed_disturbance: Vec<f64>,
}

impl ControllerParams {
    /// Values of the reference experiments.
    pub fn paper(n_followers: usize) -> Self {
        Self {
            k: 15.0,
            tau: 0.5,
            gamma1: 0.8,
            gamma2: 0.8,
            c0: 1e-4,
            c1: 0.2499,
            beta: 1.0,
            assumed_disturbance: vec![0.0; n_followers],
        }
    }

    pub fn validate(&self) -> Result<(), ControllerError> {
        let finite = [
            ("k", self.k),
            ("tau", self.tau),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("c0", self.c0),
            ("c1", self.c1),
            ("beta", self.beta),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(invalid(key, format!("must be finite, got {v}")));
            }
        }
        if !(self.k > 0.0) {
            return Err(invalid("k", format!("must be > 0, got {}", self.k)));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(invalid("tau", format!("must lie in (0,1), got {}", self.tau)));
        }
        if !(self.gamma1 > 0.0) {
            return Err(invalid("gamma1", format!("must be > 0, got {}", self.gamma1)));
        }
        if !(self.gamma2 > 0.0) {
            return Err(invalid("gamma2", format!("must be > 0, got {}", self.gamma2)));
        }
        if self.c0 < 0.0 {
            return Err(invalid("c0", format!("must be >= 0, got {}", self.c0)));
        }
        if self.c1 < 0.0 {
            return Err(invalid("c1", format!("must be >= 0, got {}", self.c1)));
        }
        if !(self.c0 + self.c1 > 0.0) {
            return Err(invalid("c0", "c0 + c1 must be > 0"));
        }
        if !(self.beta > 0.0) {
            return Err(invalid("beta", format!("must be > 0, got {}", self.beta)));
        }
        if let Some(v) = self.assumed_disturbance.iter().find(|v| !v.is_finite()) {
            return Err(invalid("assumed_disturbance", format!("must be finite, got {v}")));
        }
        Ok(())
    }

    /// Soft constraint: `β ∈ (0, λ₂(L))`.
    pub fn warnings(&self, lambda2: Option<f64>) -> Vec<String> {
        match lambda2 {
            Some(l2) if self.beta >= l2 => vec![format!(
                "beta = {} is not below lambda2(L) = {l2:.6}; the decay-rate condition beta in (0, lambda2) is violated",
                self.beta
            )],
            _ => Vec::new(),
        }
    }

    /// Decaying part of the trigger threshold, `c₀ + c₁ e^{-βt}`.
    pub fn threshold(&self, t: f64) -> f64 {
        self.c0 + self.c1 * (-self.beta * t).exp()
    }
}

/// Formation offsets `α_i`; all zeros is plain consensus.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationSpec {
    pub offsets: Vec<f64>,
}

impl FormationSpec {
    pub fn consensus(n: usize) -> Self {
        Self {
            offsets: vec![0.0; n],
        }
    }

    pub fn new(offsets: Vec<f64>) -> Self {
        Self { offsets }
    }

    pub fn is_consensus(&self) -> bool {
        self.offsets.iter().all(|a| *a == 0.0)
    }
}

/// Quantities sampled at one trigger instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub sigma: Vec<f64>,
    pub x: Vec<f64>,
    pub x0: f64,
    pub u0: f64,
    /// Stand-in for `ς_j - ς_0` for every follower `j`.
    pub disturbance: Vec<f64>,
}

/// Zero-order-hold bookkeeping, one slot per follower.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub last_event_time: Vec<Option<f64>>,
    pub held_control: Vec<f64>,
    pub snapshot: Vec<Option<Snapshot>>,
    pub event_count: Vec<usize>,
}

impl ControllerState {
    /// Before the first event every follower holds zero control.
    pub fn new(n: usize) -> Self {
        Self {
            last_event_time: vec![None; n],
            held_control: vec![0.0; n],
            snapshot: vec![None; n],
            event_count: vec![0; n],
        }
    }

    pub fn record_event(&mut self, i: usize, snapshot: Snapshot, control: f64) {
        self.last_event_time[i] = Some(snapshot.t);
        self.snapshot[i] = Some(snapshot);
        self.held_control[i] = control;
        self.event_count[i] += 1;
    }

    /// `x(t^k) - x(t)` for follower `i`; zero before its first event.
    pub fn follower_drift(&self, i: usize, x_now: f64) -> f64 {
        self.snapshot[i].as_ref().map_or(0.0, |s| s.x[i] - x_now)
    }

    /// `x_0(t_i^k) - x_0(t)` seen from follower `i`.
    pub fn leader_drift(&self, i: usize, x0_now: f64) -> f64 {
        self.snapshot[i].as_ref().map_or(0.0, |s| s.x0 - x0_now)
    }
}

/// `e_i = x_i - x_0 - α_i`.
pub fn tracking_error(x: &[f64], x0: f64, offsets: &FormationSpec) -> Vec<f64> {
    debug_assert_eq!(x.len(), offsets.offsets.len());
    x.iter()
        .zip(&offsets.offsets)
        .map(|(xi, ai)| xi - x0 - ai)
        .collect()
}

/// `σ = H·e`.
pub fn sliding_surface(h: &DenseMatrix, e: &[f64]) -> Vec<f64> {
    h.mul_vec(e).expect("sliding_surface: dimension mismatch")
}

/// `sign(s)·|s|^τ` with `sign(0) = 0`.
pub fn sig_pow(s: f64, tau: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.signum() * s.abs().powf(tau)
    }
}

/// Discontinuous forcing term `K |σ_j|^τ sign(σ_j)` for every component.
pub fn switching_term(sigma: &[f64], k: f64, tau: f64) -> Vec<f64> {
    sigma.iter().map(|s| k * sig_pow(*s, tau)).collect()
}

pub fn trigger_value(e_i: f64, edot_i: f64, t: f64, p: &ControllerParams) -> f64 {
    (p.gamma1 * e_i + p.gamma2 * edot_i * edot_i).abs() - p.threshold(t)
}

pub fn should_trigger(g: f64) -> bool {
    g >= 0.0
}

/// Control held by follower `i` from its trigger instant `snapshot.t` on.
///
/// `leader` supplies `f_0`, `followers[j]` supplies `f_j`.
pub fn control_update(
    i: usize,
    snapshot: &Snapshot,
    h_inv: &DenseMatrix,
    leader: &AgentModel,
    followers: &[AgentModel],
    p: &ControllerParams,
) -> f64 {
    let n = followers.len();
    let t = snapshot.t;
    let f0 = leader.drift(t, snapshot.x0);
    let switching = switching_term(&snapshot.sigma, p.k, p.tau);
    let w: Vec<f64> = (0..n)
        .map(|j| {
            switching[j] + followers[j].drift(t, snapshot.x[j]) - f0 - snapshot.u0 + snapshot.disturbance[j]
        })
        .collect();
    -(0..n).map(|j| h_inv[(i, j)] * w[j]).sum::<f64>()
}

/// Control that keeps `σ̇ = 0` for the current sample; analysis only.
pub fn equivalent_control(
    t: f64,
    x: &[f64],
    x0: f64,
    leader: &AgentModel,
    followers: &[AgentModel],
    disturbance: &[f64],
) -> Vec<f64> {
    let leader_rate = leader.drift(t, x0);
    followers
        .iter()
        .zip(x)
        .zip(disturbance)
        .map(|((m, xi), d)| leader_rate - m.drift(t, *xi) - d)
        .collect()
}

/// Controller bound to a topology and a model set.
#[derive(Debug, Clone)]
pub struct Controller {
    pub grounded: DenseMatrix,
    pub grounded_inv: DenseMatrix,
    pub leader: AgentModel,
    pub followers: Vec<AgentModel>,
    pub params: ControllerParams,
    pub formation: FormationSpec,
}

impl Controller {
    pub fn new(
        topology: &TopologyMatrices,
        leader: AgentModel,
        followers: Vec<AgentModel>,
        params: ControllerParams,
        formation: FormationSpec,
    ) -> Result<Self, ControllerError> {
        params.validate()?;
        let n = topology.n_followers;
        let check = |what, got: usize| {
            if got == n {
                Ok(())
            } else {
                Err(ControllerError::Dimension {
                    what,
                    expected: n,
                    got,
                })
            }
        };
        check("followers", followers.len())?;
        check("assumed_disturbance", params.assumed_disturbance.len())?;
        check("formation", formation.offsets.len())?;
        let grounded_inv = topology
            .grounded_inverse()
            .map_err(ControllerError::NotInvertible)?;
        Ok(Self {
            grounded: topology.grounded.clone(),
            grounded_inv,
            leader,
            followers,
            params,
            formation,
        })
    }

    pub fn n(&self) -> usize {
        self.followers.len()
    }

    pub fn errors(&self, x: &[f64], x0: f64) -> Vec<f64> {
        tracking_error(x, x0, &self.formation)
    }

    pub fn surface(&self, e: &[f64]) -> Vec<f64> {
        sliding_surface(&self.grounded, e)
    }

    pub fn update(&self, i: usize, snapshot: &Snapshot) -> f64 {
        control_update(
            i,
            snapshot,
            &self.grounded_inv,
            &self.leader,
            &self.followers,
            &self.params,
        )
    }

    /// Builds the snapshot for a trigger at time `t`.
    pub fn snapshot(&self, t: f64, x: &[f64], x0: f64, disturbance: Vec<f64>) -> Snapshot {
        let e = self.errors(x, x0);
        Snapshot {
            t,
            sigma: self.surface(&e),
            x: x.to_vec(),
            x0,
            u0: leader_u0(t),
            disturbance,
        }
    }
}

/// Bound `F̃` on the lumped term
/// `u₀(t^k) - H u₀(t)·1 + (H - I)(ς_i - ς_0)·1`.
pub fn forcing_bound(h: &DenseMatrix, follower_amplitude: f64, leader_amplitude: f64) -> f64 {
    let n = h.rows();
    let h_minus_i = h.sub(&DenseMatrix::identity(n)).expect("square");
    LEADER_INPUT_BOUND
        + h.norm_inf() * LEADER_INPUT_BOUND
        + h_minus_i.norm_inf() * (follower_amplitude + leader_amplitude)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachingReport {
    /// Largest `η` with `V̇ <= -η|σ|` on every sample outside the band
    /// (clamped at zero).
    pub eta_measured: f64,
    /// Samples with `|σ| > band` that were examined.
    pub samples: usize,
    /// Sample indices where `V̇ >= 0` outside the band.
    pub violations: Vec<usize>,
}

impl ReachingReport {
    pub fn passes(&self) -> bool {
        self.samples > 0 && self.violations.is_empty() && self.eta_measured > 0.0
    }
}

/// Checks `V̇ <= -η |σ|` on a uniformly sampled trace using central
/// differences of `V`.
pub fn reaching_check(
    sigma: &[f64],
    v: &[f64],
    dt: f64,
    band: f64,
) -> Result<ReachingReport, ControllerError> {
    let len = sigma.len().min(v.len());
    if len < 3 {
        return Err(ControllerError::InsufficientData { len });
    }
    let mut eta = f64::INFINITY;
    let mut samples = 0;
    let mut violations = Vec::new();
    for k in 1..len - 1 {
        let s = sigma[k].abs();
        if s <= band {
            continue;
        }
        samples += 1;
        let v_dot = (v[k + 1] - v[k - 1]) / (2.0 * dt);
        if v_dot >= 0.0 {
            violations.push(k);
        }
        eta = eta.min(-v_dot / s);
    }
    let eta_measured = if samples == 0 { 0.0 } else { eta.max(0.0) };
    Ok(ReachingReport {
        eta_measured,
        samples,
        violations,
    })
}

/// Per-step traces for one follower, used by [`gain_adequacy`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GainTrace {
    /// `|e_i(t_i^k)|` for the latest event at or before each step.
    pub error_at_event: Vec<f64>,
    /// `|x_i(t_i^k) - x_i(t)|`.
    pub follower_drift: Vec<f64>,
    /// `|x_0(t_i^k) - x_0(t)|`.
    pub leader_drift: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub k: f64,
    pub supremum: f64,
    pub per_agent: Vec<f64>,
    pub adequate: bool,
}

/// Empirical right-hand side of the gain condition
/// `K > sup{F̃ - L̄|e(t^k)| + ‖H‖L̄|ε̄_i| - ‖H‖L̄|ε̄_0| + ‖H‖L̄|e(t^k)|}`.
pub fn gain_adequacy(
    k: f64,
    traces: &[GainTrace],
    lipschitz: f64,
    h: &DenseMatrix,
    forcing: f64,
) -> GainReport {
    let h_norm = h.norm_inf();
    let per_agent: Vec<f64> = traces
        .iter()
        .map(|tr| {
            let steps = tr
                .error_at_event
                .len()
                .min(tr.follower_drift.len())
                .min(tr.leader_drift.len());
            (0..steps)
                .map(|s| {
                    let ek = tr.error_at_event[s];
                    forcing - lipschitz * ek + h_norm * lipschitz * tr.follower_drift[s]
                        - h_norm * lipschitz * tr.leader_drift[s]
                        + h_norm * lipschitz * ek
                })
                .fold(forcing, f64::max)
        })
        .collect();
    let supremum = per_agent.iter().copied().fold(forcing, f64::max);
    GainReport {
        k,
        supremum,
        per_agent,
        adequate: k > supremum,
    }
}
