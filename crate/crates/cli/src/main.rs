//! `pqtls`: run a handshake server, benchmark KEM/SIG pairs, inspect the
//! algorithm registry.

use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use pqtls::bench::{
    emit_report, identity_seed, run_live, run_modeled, BenchError, BenchPlan, Format, LiveTarget,
    Mode, NetworkModel,
};
use pqtls::handshake::ServerIdentity;
use pqtls::hash::derive_seed;
use pqtls::suite::{AlgorithmKind, Registry, Seed};
use pqtls::transport::{serve, ServerConfig};

const EXIT_PLAN: u8 = 2;
const EXIT_TRANSPORT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pqtls",
    version,
    about = "Post-quantum TLS-style handshake server and benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Accept handshakes until stopped
    Serve {
        #[arg(long, default_value = "127.0.0.1:4433")]
        listen: String,
        /// KEM names or wire codes, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        kem: Vec<String>,
        /// Signature names or wire codes, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        sig: Vec<String>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Clients need the same value to trust this server
        #[arg(long, default_value_t = 0)]
        identity_seed: u64,
        #[arg(long, default_value_t = 1024)]
        max_connections: usize,
        /// Stop after this many seconds instead of running forever
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Measure handshakes per second for KEM:SIG pairs
    Bench {
        /// host:port of a running `pqtls serve`, or `self`
        #[arg(long, default_value = "self")]
        host: String,
        /// kem:sig pairs, comma separated
        #[arg(long, value_delimiter = ',')]
        pairs: Vec<String>,
        #[arg(long, default_value = "kem.mock.ecdhe_x25519:sig.mock.rsa2048")]
        control: String,
        #[arg(long, default_value_t = 8)]
        clients: usize,
        /// Measurement window in seconds
        #[arg(long, default_value_t = 5.0)]
        duration: f64,
        #[arg(long, default_value_t = 1.0)]
        warmup: f64,
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
        #[arg(long, default_value = "modeled")]
        mode: Mode,
        /// Round-trip time in milliseconds (modeled mode)
        #[arg(long, default_value_t = 1.0)]
        rtt: f64,
        /// Bytes per second (modeled mode)
        #[arg(long, default_value_t = 12.5e6)]
        bandwidth: f64,
        /// Server workers: self-hosted server size and modeled capacity
        #[arg(long, default_value_t = 8)]
        workers: usize,
        /// Microseconds per cost unit (modeled mode)
        #[arg(long, default_value_t = 1.0)]
        unit_us: f64,
        /// Identity seed of the remote server
        #[arg(long, default_value_t = 0)]
        identity_seed: u64,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        #[arg(long, default_value = "csv")]
        format: Format,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Registry operations
    Registry {
        #[command(subcommand)]
        action: RegistryAction,
    },
    /// Derive a keypair from a 32-byte hex seed; KEMs also encapsulate once
    Keygen {
        #[arg(long)]
        alg: String,
        #[arg(long)]
        seed: String,
    },
}

#[derive(Subcommand)]
enum RegistryAction {
    /// Print every registered algorithm as CSV
    Dump,
}

enum Failure {
    Plan(anyhow::Error),
    Transport(anyhow::Error),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn resolve_all(
    registry: &Registry,
    names: &[String],
    kind: AlgorithmKind,
) -> anyhow::Result<Vec<u16>> {
    names
        .iter()
        .map(|n| {
            let code = registry.resolve(n.trim())?;
            let meta = registry.metadata(code)?;
            if meta.id.kind != kind {
                bail!("{} is a {}, expected a {kind}", meta.id.name, meta.id.kind);
            }
            Ok(code)
        })
        .collect()
}

fn parse_pair(registry: &Registry, text: &str) -> anyhow::Result<(u16, u16)> {
    let (kem, sig) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("pair {text:?} is not kem:sig"))?;
    Ok((registry.resolve(kem.trim())?, registry.resolve(sig.trim())?))
}

fn parse_seed(text: &str) -> anyhow::Result<Seed> {
    let bytes = hex::decode(text.trim_start_matches("0x")).context("seed is not hex")?;
    bytes
        .try_into()
        .map_err(|b: Vec<u8>| anyhow!("seed must be 32 bytes, got {}", b.len()))
}

fn cmd_serve(
    listen: String,
    kem: Vec<String>,
    sig: Vec<String>,
    workers: usize,
    seed: u64,
    max_connections: usize,
    duration: Option<f64>,
) -> Result<(), Failure> {
    let registry = Arc::new(Registry::with_defaults());
    let kems = resolve_all(&registry, &kem, AlgorithmKind::Kem).map_err(Failure::Plan)?;
    let sigs = resolve_all(&registry, &sig, AlgorithmKind::Sig).map_err(Failure::Plan)?;
    if workers == 0 {
        return Err(Failure::Plan(anyhow!("--workers must be at least 1")));
    }
    let (identity, _) = ServerIdentity::generate(registry, &kems, &sigs, &identity_seed(seed))
        .map_err(anyhow::Error::from)?;
    let mut config = ServerConfig::new(listen, Arc::new(identity));
    config.workers = workers;
    config.max_connections = max_connections;
    let server = serve(config).map_err(|e| Failure::Transport(e.into()))?;
    eprintln!(
        "listening on {} with {workers} worker(s)",
        server.local_addr()
    );
    match duration {
        Some(secs) => std::thread::sleep(Duration::from_secs_f64(secs.max(0.0))),
        None => loop {
            std::thread::park();
        },
    }
    let stats = server.stats().clone();
    let drained = server.stop();
    eprintln!(
        "handshakes ok {} failed {} rejected {}{}",
        stats.successes(),
        stats.failures(),
        stats.rejected(),
        if drained { "" } else { " (drain deadline hit)" }
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    host: String,
    pairs: Vec<String>,
    control: String,
    mut plan: BenchPlan,
    identity: u64,
    out: Option<std::path::PathBuf>,
    format: Format,
) -> Result<(), Failure> {
    let registry = Arc::new(Registry::with_defaults());
    if !pairs.is_empty() {
        plan.pairs = pairs
            .iter()
            .map(|p| parse_pair(&registry, p))
            .collect::<anyhow::Result<_>>()
            .map_err(Failure::Plan)?;
    }
    plan.control = parse_pair(&registry, &control).map_err(Failure::Plan)?;
    let report = match plan.mode {
        Mode::Modeled => run_modeled(&plan, &registry).map_err(|e| Failure::Plan(e.into()))?,
        Mode::Live => {
            let target = if host == "self" {
                LiveTarget::SelfHosted
            } else {
                LiveTarget::Remote {
                    addr: host,
                    identity_seed: identity_seed(identity),
                }
            };
            run_live(&plan, registry, target).map_err(|e| match e {
                BenchError::Plan(p) => Failure::Plan(p.into()),
                BenchError::Transport(t) => Failure::Transport(t.into()),
            })?
        }
    };
    let degraded = report.rows.iter().filter(|r| r.degraded).count();
    if degraded > 0 {
        eprintln!("warning: {degraded} pair(s) had more than 1% failed handshakes");
    }
    let bytes = emit_report(&report, format);
    match out {
        Some(path) => {
            std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout()
            .write_all(&bytes)
            .context("writing report")?,
    }
    Ok(())
}

fn cmd_keygen(alg: String, seed: String) -> Result<(), Failure> {
    let registry = Registry::with_defaults();
    let code = registry
        .resolve(&alg)
        .map_err(|e| Failure::Plan(e.into()))?;
    let seed = parse_seed(&seed).map_err(Failure::Plan)?;
    let meta = registry.metadata(code).map_err(anyhow::Error::from)?;
    println!("alg: {} (0x{code:04x})", meta.id.name);
    match meta.id.kind {
        AlgorithmKind::Kem => {
            let kp = registry
                .kem_keygen(code, &seed)
                .map_err(anyhow::Error::from)?;
            let (ct, ss) = registry
                .kem_encap(code, &kp.public_key, &derive_seed(&seed, b"encap"))
                .map_err(anyhow::Error::from)?;
            println!("pk: {}", hex::encode(&kp.public_key));
            println!("sk: {}", hex::encode(&kp.secret_key));
            println!("ct: {}", hex::encode(ct));
            println!("ss: {}", hex::encode(ss));
        }
        AlgorithmKind::Sig => {
            let kp = registry
                .sig_keygen(code, &seed)
                .map_err(anyhow::Error::from)?;
            println!("pk: {}", hex::encode(&kp.public_key));
            println!("sk: {}", hex::encode(kp.secret_key.bytes()));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Serve {
            listen,
            kem,
            sig,
            workers,
            identity_seed,
            max_connections,
            duration,
        } => cmd_serve(
            listen,
            kem,
            sig,
            workers,
            identity_seed,
            max_connections,
            duration,
        ),
        Command::Bench {
            host,
            pairs,
            control,
            clients,
            duration,
            warmup,
            repetitions,
            mode,
            rtt,
            bandwidth,
            workers,
            unit_us,
            identity_seed,
            out,
            format,
            seed,
        } => {
            let plan = BenchPlan {
                clients,
                duration_s: duration,
                warmup_s: warmup,
                repetitions,
                mode,
                network: NetworkModel {
                    rtt_s: rtt / 1000.0,
                    bandwidth_bps: bandwidth,
                },
                workers,
                unit_time_s: unit_us * 1e-6,
                seed,
                ..BenchPlan::default()
            };
            cmd_bench(host, pairs, control, plan, identity_seed, out, format)
        }
        Command::Registry {
            action: RegistryAction::Dump,
        } => {
            print!("{}", Registry::with_defaults().dump_csv());
            Ok(())
        }
        Command::Keygen { alg, seed } => cmd_keygen(alg, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        // These error types already include their source in the message.
        Err(Failure::Plan(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_PLAN)
        }
        Err(Failure::Transport(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_TRANSPORT)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
