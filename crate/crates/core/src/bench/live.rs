use std::sync::Arc;
use std::time::{Duration, Instant};

use super::report::{BenchReport, PairRow};
use super::{pair_label, BenchError, BenchPlan, Pair};
use crate::handshake::{ClientConfig, ServerIdentity};
use crate::hash::derive_seed;
use crate::suite::{Registry, Seed};
use crate::transport::{connect_and_handshake, serve, ClientOptions, ServerConfig, TransportError};

/// Where live-mode clients connect.
#[derive(Clone, Debug)]
pub enum LiveTarget {
    /// Start a local server per pair on an ephemeral port with W workers.
    SelfHosted,
    /// An already running `pqtls serve`; its identity seed rebuilds the trust store.
    Remote { addr: String, identity_seed: Seed },
}

/// Seed for server identities, shared by `serve` and `bench` so both sides
/// agree on the trust anchors.
pub fn identity_seed(n: u64) -> Seed {
    derive_seed(
        &[0; 32],
        &[b"identity ".as_slice(), &n.to_be_bytes()].concat(),
    )
}

#[derive(Default)]
struct Window {
    per_client: Vec<u64>,
    failed: u64,
    latencies: Vec<u64>,
    bytes: Option<u64>,
}

fn run_window(
    config: &ClientConfig,
    addr: &str,
    clients: usize,
    warmup: Duration,
    duration: Duration,
) -> Window {
    let start = Instant::now();
    let measure_from = start + warmup;
    let end = measure_from + duration;
    let results: Vec<Window> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..clients)
            .map(|_| {
                s.spawn(move || {
                    let mut w = Window {
                        per_client: vec![0],
                        ..Window::default()
                    };
                    let opts = ClientOptions::default();
                    while Instant::now() < end {
                        let result = connect_and_handshake(config, addr, &opts);
                        let done = Instant::now();
                        let in_window = done >= measure_from && done <= end;
                        match result {
                            Ok(session) => {
                                if in_window {
                                    w.per_client[0] += 1;
                                    w.latencies.push(session.stats.latency_ns);
                                    w.bytes.get_or_insert(
                                        session.stats.bytes_sent + session.stats.bytes_received,
                                    );
                                }
                            }
                            Err(e) => {
                                if in_window {
                                    w.failed += 1;
                                }
                                if matches!(e, TransportError::Io(_) | TransportError::Timeout) {
                                    std::thread::sleep(Duration::from_millis(1));
                                }
                            }
                        }
                    }
                    w
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("client thread panicked"))
            .collect()
    });
    let mut total = Window::default();
    for w in results {
        total.per_client.extend(w.per_client);
        total.failed += w.failed;
        total.latencies.extend(w.latencies);
        total.bytes = total.bytes.or(w.bytes);
    }
    total
}

/// Nearest-rank percentile of a sorted slice.
fn percentile(sorted: &[u64], p: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn measure_pair(
    plan: &BenchPlan,
    registry: &Arc<Registry>,
    target: &LiveTarget,
    pair: Pair,
) -> Result<PairRow, BenchError> {
    let (kem, sig) = pair;
    let crypto = |e| BenchError::Plan(super::PlanError::Pair(kem, sig, e));
    let (addr, trust, server) = match target {
        LiveTarget::SelfHosted => {
            let (identity, trust) = ServerIdentity::generate(
                registry.clone(),
                &[kem],
                &[sig],
                &identity_seed(plan.seed),
            )
            .map_err(crypto)?;
            let mut config = ServerConfig::new("127.0.0.1:0", Arc::new(identity));
            config.workers = plan.workers;
            config.max_connections = plan.clients * 2 + 16;
            let server = serve(config)?;
            (server.local_addr().to_string(), trust, Some(server))
        }
        LiveTarget::Remote {
            addr,
            identity_seed,
        } => {
            let trust =
                ServerIdentity::trust_store_for(registry, &[sig], identity_seed).map_err(crypto)?;
            (addr.clone(), trust, None)
        }
    };
    let config = ClientConfig {
        registry: registry.clone(),
        kem_alg: kem,
        sig_algs: vec![sig],
        trust,
    };
    // An unreachable server is a transport failure; an alert only degrades the row.
    if let Err(e @ (TransportError::Io(_) | TransportError::Timeout | TransportError::Address(_))) =
        connect_and_handshake(&config, &addr, &ClientOptions::default())
    {
        if let Some(s) = server {
            s.stop();
        }
        return Err(e.into());
    }

    let warmup = Duration::from_secs_f64(plan.warmup_s);
    let duration = Duration::from_secs_f64(plan.duration_s);
    let mut per_client = vec![0u64; plan.clients];
    let mut failed = 0;
    let mut latencies = Vec::new();
    let mut bytes = None;
    for _ in 0..plan.repetitions {
        let w = run_window(&config, &addr, plan.clients, warmup, duration);
        for (acc, c) in per_client.iter_mut().zip(&w.per_client) {
            *acc += c;
        }
        failed += w.failed;
        latencies.extend(w.latencies);
        bytes = bytes.or(w.bytes);
    }
    if let Some(s) = server {
        s.stop();
    }

    latencies.sort_unstable();
    let completed: u64 = per_client.iter().sum();
    let attempts = completed + failed;
    Ok(PairRow {
        kem,
        sig,
        label: pair_label(registry, pair),
        completed,
        failed,
        cps: completed as f64 / (plan.repetitions as f64 * plan.duration_s),
        ratio_to_control: 0.0,
        p50_ns: percentile(&latencies, 0.50),
        p95_ns: percentile(&latencies, 0.95),
        bytes_per_handshake: bytes.unwrap_or(0),
        degraded: attempts > 0 && failed * 100 > attempts,
        per_client,
    })
}

/// Drives `plan.clients` concurrent clients at each pair in turn. Pairs are
/// measured sequentially so they never compete for the CPU.
pub fn run_live(
    plan: &BenchPlan,
    registry: Arc<Registry>,
    target: LiveTarget,
) -> Result<BenchReport, BenchError> {
    plan.validate(&registry)?;
    let started = Instant::now();
    let rows = plan
        .report_pairs()
        .into_iter()
        .map(|pair| measure_pair(plan, &registry, &target, pair))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BenchReport::new(
        plan.clone(),
        &registry,
        rows,
        started.elapsed().as_secs_f64(),
    ))
}
