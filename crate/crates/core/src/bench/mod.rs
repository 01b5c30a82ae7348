//! Handshakes-per-second measurement for KEM/SIG pairs against a classical
//! control pair: live over loopback TCP, or a deterministic closed-form model.

mod live;
mod model;
mod report;

pub use live::{identity_seed, run_live, LiveTarget};
pub use model::{
    handshake_bytes, model_times, modeled_cps, run_modeled, ModelInputs, ModelTimes, KDF_UNITS,
};
pub use report::{emit_report, BenchReport, Format, PairRow};

use crate::suite::codes::{KEM_MOCK_X25519, SIG_MOCK_RSA2048};
use crate::suite::{AlgorithmKind, CryptoError, Registry};
use crate::transport::TransportError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Live,
    Modeled,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Live => "live",
            Mode::Modeled => "modeled",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "live" => Ok(Mode::Live),
            "modeled" => Ok(Mode::Modeled),
            other => Err(format!("unknown mode {other:?}, expected live or modeled")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NetworkModel {
    pub rtt_s: f64,
    /// Bytes per second.
    pub bandwidth_bps: f64,
}

impl Default for NetworkModel {
    fn default() -> Self {
        Self {
            rtt_s: 0.001,
            bandwidth_bps: 12.5e6,
        }
    }
}

pub type Pair = (u16, u16);

pub const CONTROL_PAIR: Pair = (KEM_MOCK_X25519, SIG_MOCK_RSA2048);

#[derive(Clone, Debug, PartialEq)]
pub struct BenchPlan {
    pub pairs: Vec<Pair>,
    pub control: Pair,
    pub clients: usize,
    pub duration_s: f64,
    pub warmup_s: f64,
    pub mode: Mode,
    pub network: NetworkModel,
    pub repetitions: usize,
    /// Server worker parallelism W.
    pub workers: usize,
    /// Seconds per cost unit in modeled mode.
    pub unit_time_s: f64,
    pub seed: u64,
}

impl Default for BenchPlan {
    fn default() -> Self {
        use crate::suite::codes::*;
        Self {
            pairs: vec![
                (KEM_MOCK_KYBER768, SIG_MOCK_FALCON512),
                (KEM_MOCK_KYBER768, SIG_MOCK_DILITHIUM2),
                (KEM_MOCK_KYBER768, SIG_MOCK_SPHINCS128S),
            ],
            control: CONTROL_PAIR,
            clients: 8,
            duration_s: 5.0,
            warmup_s: 1.0,
            mode: Mode::Modeled,
            network: NetworkModel::default(),
            repetitions: 1,
            workers: 8,
            unit_time_s: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("at least one client is required")]
    NoClients,
    #[error("duration must be positive, got {0}")]
    Duration(f64),
    #[error("warmup must be non-negative, got {0}")]
    Warmup(f64),
    #[error("at least one repetition is required")]
    NoRepetitions,
    #[error("at least one worker is required")]
    NoWorkers,
    #[error("network model needs rtt >= 0 and bandwidth > 0")]
    Network,
    #[error("per-unit time must be positive")]
    UnitTime,
    #[error("pair 0x{0:04x}:0x{1:04x}: {2}")]
    Pair(u16, u16, CryptoError),
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid plan: {0}")]
    Plan(#[from] PlanError),
    #[error("transport: {0}")]
    Transport(#[from] TransportError),
}

fn check_pair(registry: &Registry, (kem, sig): Pair) -> Result<(), PlanError> {
    let check = |code, kind| -> Result<(), CryptoError> {
        let meta = registry.metadata(code)?;
        if meta.id.kind != kind {
            return Err(CryptoError::WrongKind {
                code,
                expected: kind,
            });
        }
        Ok(())
    };
    check(kem, AlgorithmKind::Kem)
        .and_then(|_| check(sig, AlgorithmKind::Sig))
        .map_err(|e| PlanError::Pair(kem, sig, e))
}

impl BenchPlan {
    pub fn validate(&self, registry: &Registry) -> Result<(), PlanError> {
        if self.clients == 0 {
            return Err(PlanError::NoClients);
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(PlanError::Duration(self.duration_s));
        }
        if !(self.warmup_s.is_finite() && self.warmup_s >= 0.0) {
            return Err(PlanError::Warmup(self.warmup_s));
        }
        if self.repetitions == 0 {
            return Err(PlanError::NoRepetitions);
        }
        if self.workers == 0 {
            return Err(PlanError::NoWorkers);
        }
        let NetworkModel {
            rtt_s,
            bandwidth_bps,
        } = self.network;
        if rtt_s.is_nan() || rtt_s < 0.0 || bandwidth_bps.is_nan() || bandwidth_bps <= 0.0 {
            return Err(PlanError::Network);
        }
        if self.unit_time_s.is_nan() || self.unit_time_s <= 0.0 {
            return Err(PlanError::UnitTime);
        }
        check_pair(registry, self.control)?;
        for &p in &self.pairs {
            check_pair(registry, p)?;
        }
        Ok(())
    }

    /// Rows in report order: the control first unless the plan already
    /// lists it.
    pub fn report_pairs(&self) -> Vec<Pair> {
        let mut pairs = self.pairs.clone();
        if !pairs.contains(&self.control) {
            pairs.insert(0, self.control);
        }
        pairs
    }
}

/// `kyber768+falcon512` from the registry names.
pub fn pair_label(registry: &Registry, (kem, sig): Pair) -> String {
    let short = |code| {
        registry
            .metadata(code)
            .map(|m| m.id.name.rsplit('.').next().unwrap_or_default().to_string())
            .unwrap_or_else(|_| format!("0x{code:04x}"))
    };
    format!("{}+{}", short(kem), short(sig))
}
