//! Scalar agent models, the leader's exogenous input and the disturbance
//! waveform.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on `|leader_u0(t)|`.
pub const LEADER_INPUT_BOUND: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("unknown model name {0:?} (expected leader, f1, f2, f3 or f4)")]
    UnknownModel(String),
    #[error("agent {agent}: non-finite state rate at t = {t} (x = {x})")]
    NonFinite { agent: usize, t: f64, x: f64 },
}

pub type DriftFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Drift term `f(t, x)` of a scalar agent.
#[derive(Clone)]
pub enum Dynamics {
    /// `u0(t)·cos(t) + 0.2·sin(x)`.
    Leader,
    /// `0.1·cbrt(sin x) + cos²(2πt) + e^{-t}`.
    F1,
    /// `0.1·sin(x) + cos(2πt)`.
    F2,
    /// `-x·cos(t) - sin(x) - cos(x)`.
    F3,
    /// `sin(x) + cos(e^{-x·t})`.
    F4,
    Custom { name: String, f: DriftFn },
}

impl Dynamics {
    pub fn custom(name: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Leader => "leader",
            Self::F1 => "f1",
            Self::F2 => "f2",
            Self::F3 => "f3",
            Self::F4 => "f4",
            Self::Custom { name, .. } => name,
        }
    }

    pub fn drift(&self, t: f64, x: f64) -> f64 {
        match self {
            Self::Leader => leader_u0(t) * t.cos() + 0.2 * x.sin(),
            // Real (sign-preserving) cube root.
            Self::F1 => 0.1 * x.sin().cbrt() + (2.0 * PI * t).cos().powi(2) + (-t).exp(),
            Self::F2 => 0.1 * x.sin() + (2.0 * PI * t).cos(),
            Self::F3 => -x * t.cos() - x.sin() - x.cos(),
            Self::F4 => x.sin() + (-x * t).exp().cos(),
            Self::Custom { f, .. } => f(t, x),
        }
    }
}

impl fmt::Debug for Dynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dynamics({})", self.name())
    }
}

impl PartialEq for Dynamics {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Custom { f: a, .. }, Self::Custom { f: b, .. }) => Arc::ptr_eq(a, b),
            _ => std::mem::discriminant(self) == std::mem::discriminant(other),
        }
    }
}

impl FromStr for Dynamics {
    type Err = DynamicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leader" => Ok(Self::Leader),
            "f1" => Ok(Self::F1),
            "f2" => Ok(Self::F2),
            "f3" => Ok(Self::F3),
            "f4" => Ok(Self::F4),
            other => Err(DynamicsError::UnknownModel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisturbanceKind {
    #[default]
    None,
    Matched,
    Mismatched,
}

impl fmt::Display for DisturbanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Matched => "matched",
            Self::Mismatched => "mismatched",
        })
    }
}

/// `amplitude · sin(π² t²)`. The kind is a label only.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisturbanceSpec {
    pub amplitude: f64,
    pub kind: DisturbanceKind,
}

impl DisturbanceSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(amplitude: f64, kind: DisturbanceKind) -> Self {
        Self { amplitude, kind }
    }

    pub fn signal(&self, t: f64) -> f64 {
        disturbance_signal(self, t)
    }
}

pub fn disturbance_signal(spec: &DisturbanceSpec, t: f64) -> f64 {
    if spec.amplitude == 0.0 {
        return 0.0;
    }
    spec.amplitude * (PI * PI * t * t).sin()
}

/// Leader's exogenous input `2·cos(0.1πt) / (1 + e^{-t})`.
pub fn leader_u0(t: f64) -> f64 {
    2.0 * (0.1 * PI * t).cos() / (1.0 + (-t).exp())
}

/// One agent: index (0 = leader), drift and plant disturbance.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentModel {
    pub id: usize,
    pub dynamics: Dynamics,
    pub disturbance: DisturbanceSpec,
}

impl AgentModel {
    pub fn new(id: usize, dynamics: Dynamics, disturbance: DisturbanceSpec) -> Self {
        Self {
            id,
            dynamics,
            disturbance,
        }
    }

    pub fn drift(&self, t: f64, x: f64) -> f64 {
        self.dynamics.drift(t, x)
    }
}

/// State rate `f(t, x) + u + ς(t)`; the disturbance only when `disturb_on`.
pub fn eval_dynamics(
    model: &AgentModel,
    t: f64,
    x: f64,
    u: f64,
    disturb_on: bool,
) -> Result<f64, DynamicsError> {
    let mut rate = model.drift(t, x) + u;
    if disturb_on {
        rate += model.disturbance.signal(t);
    }
    if rate.is_finite() {
        Ok(rate)
    } else {
        Err(DynamicsError::NonFinite {
            agent: model.id,
            t,
            x,
        })
    }
}

/// Sampled lower estimate of the Lipschitz constant of `x ↦ f(t, x)` over
/// `domain × t_range`.
///
/// Pair `k` is drawn from a stream seeded by `seed` alone, so a larger
/// `samples` only ever adds pairs and the estimate never decreases. Offsets
/// between the two points span six decades of the domain width so that
/// local slopes are resolved.
pub fn lipschitz_probe(
    model: &AgentModel,
    domain: (f64, f64),
    t_range: (f64, f64),
    samples: usize,
    seed: u64,
) -> f64 {
    let (lo, hi) = (domain.0.min(domain.1), domain.0.max(domain.1));
    let (t0, t1) = (t_range.0.min(t_range.1), t_range.0.max(t_range.1));
    let width = hi - lo;
    if samples < 2 || !(width > 0.0) {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..samples {
        let t = if t1 > t0 { rng.gen_range(t0..=t1) } else { t0 };
        let x1 = rng.gen_range(lo..=hi);
        let scale = 10f64.powf(-rng.gen_range(0.0..6.0));
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let x2 = (x1 + sign * scale * width).clamp(lo, hi);
        if x1 == x2 {
            continue;
        }
        let ratio = (model.drift(t, x1) - model.drift(t, x2)).abs() / (x1 - x2).abs();
        if ratio.is_finite() {
            best = best.max(ratio);
        }
    }
    best
}
