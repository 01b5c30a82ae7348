use super::report::{BenchReport, PairRow};
use super::{pair_label, BenchPlan, NetworkModel, Pair, PlanError};
use crate::handshake::{
    encode_message, Certificate, ClientHello, Finished, HandshakeMessage, ServerHello,
    DEFAULT_SUBJECT, PROTOCOL_VERSION,
};
use crate::suite::{Registry, SchemeMetadata};

/// Cost of the key schedule plus Finished MAC on each side, in units.
pub const KDF_UNITS: u64 = 2;

/// Bytes on the wire for one handshake with a single offered signature
/// algorithm: three framed messages, headers included.
pub fn handshake_bytes(kem: &SchemeMetadata, sig: &SchemeMetadata) -> u64 {
    let ch = ClientHello {
        version: PROTOCOL_VERSION,
        client_random: [0; 32],
        kem_alg: kem.code(),
        sig_algs: vec![sig.code()],
        kem_public_key: vec![0; kem.pk_len],
    };
    let cert = Certificate {
        subject: DEFAULT_SUBJECT.to_string(),
        sig_alg: sig.code(),
        subject_pk: vec![0; sig.pk_len],
        issuer_sig: vec![0; sig.out_len],
    };
    let sh = ServerHello {
        version: PROTOCOL_VERSION,
        server_random: [0; 32],
        chosen_kem: kem.code(),
        chosen_sig: sig.code(),
        certificate: cert.encode(),
        kem_ciphertext: vec![0; kem.out_len],
        signature: vec![0; sig.out_len],
    };
    [
        HandshakeMessage::ClientHello(ch),
        HandshakeMessage::ServerHello(sh),
        HandshakeMessage::Finished(Finished { mac: [0; 32] }),
    ]
    .iter()
    .map(|m| encode_message(m).len() as u64)
    .sum()
}

/// Inputs of the closed-form throughput model for one pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelInputs {
    pub bytes: u64,
    /// Client keygen + verify + decapsulation + kdf.
    pub client_units: u64,
    /// Server encapsulation + sign + kdf.
    pub server_units: u64,
    pub clients: usize,
    pub workers: usize,
    pub network: NetworkModel,
    pub unit_time_s: f64,
}

impl ModelInputs {
    pub fn for_pair(
        registry: &Registry,
        (kem, sig): Pair,
        plan: &BenchPlan,
    ) -> Result<Self, PlanError> {
        let err = |e| PlanError::Pair(kem, sig, e);
        let k = registry.metadata(kem).map_err(err)?;
        let s = registry.metadata(sig).map_err(err)?;
        Ok(Self {
            bytes: handshake_bytes(k, s),
            client_units: k.cost.keygen + s.cost.verify + k.cost.verify + KDF_UNITS,
            server_units: k.cost.op + s.cost.op + KDF_UNITS,
            clients: plan.clients,
            workers: plan.workers,
            network: plan.network,
            unit_time_s: plan.unit_time_s,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelTimes {
    pub client_s: f64,
    pub server_s: f64,
    pub network_s: f64,
    /// One handshake end to end.
    pub total_s: f64,
}

pub fn model_times(m: &ModelInputs) -> ModelTimes {
    let client_s = m.client_units as f64 * m.unit_time_s;
    let server_s = m.server_units as f64 * m.unit_time_s;
    let network_s = m.network.rtt_s + m.bytes as f64 / m.network.bandwidth_bps;
    ModelTimes {
        client_s,
        server_s,
        network_s,
        total_s: network_s + client_s + server_s,
    }
}

/// min(C / T, W / T_server).
pub fn modeled_cps(m: &ModelInputs) -> f64 {
    let t = model_times(m);
    let client_limited = m.clients as f64 / t.total_s;
    let capacity = m.workers as f64 / t.server_s;
    client_limited.min(capacity)
}

/// Pure function of the plan and registry; no clocks, no randomness.
pub fn run_modeled(plan: &BenchPlan, registry: &Registry) -> Result<BenchReport, PlanError> {
    plan.validate(registry)?;
    let rows = plan
        .report_pairs()
        .into_iter()
        .map(|pair| {
            let inputs = ModelInputs::for_pair(registry, pair, plan)?;
            let cps = modeled_cps(&inputs);
            let total_ns = (model_times(&inputs).total_s * 1e9).round() as u64;
            Ok(PairRow {
                kem: pair.0,
                sig: pair.1,
                label: pair_label(registry, pair),
                completed: (cps * plan.duration_s * plan.repetitions as f64).floor() as u64,
                failed: 0,
                cps,
                ratio_to_control: 0.0,
                p50_ns: total_ns,
                p95_ns: total_ns,
                bytes_per_handshake: inputs.bytes,
                degraded: false,
                per_client: Vec::new(),
            })
        })
        .collect::<Result<Vec<_>, PlanError>>()?;
    Ok(BenchReport::new(plan.clone(), registry, rows, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::codes::*;

    #[test]
    fn worked_example() {
        // 1 ms rtt, 12500 B at 1.25 MB/s, 4 ms server, 5 ms client: T = 20 ms.
        let m = ModelInputs {
            bytes: 12_500,
            client_units: 5_000,
            server_units: 4_000,
            clients: 10,
            workers: 4,
            network: NetworkModel {
                rtt_s: 0.001,
                bandwidth_bps: 1.25e6,
            },
            unit_time_s: 1e-6,
        };
        assert!((model_times(&m).total_s - 0.020).abs() < 1e-12);
        assert!((modeled_cps(&m) - 500.0).abs() < 1e-9);
        let saturated = ModelInputs { clients: 1000, ..m };
        assert!((modeled_cps(&saturated) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn bytes_follow_sizes() {
        let r = Registry::with_defaults();
        let k = r.metadata(KEM_MOCK_X25519).unwrap();
        let s = r.metadata(SIG_MOCK_RSA2048).unwrap();
        let subject = DEFAULT_SUBJECT.len() as u64;
        // CH 43 + pk, SH 50 + cert + ct + sig, cert 12 + subject + pk + sig, Finished 32, three headers.
        let expected = (43 + 32) + (50 + (12 + subject + 270 + 256) + 32 + 256) + 32 + 15;
        assert_eq!(handshake_bytes(k, s), expected);
    }
}
