//! `aqw`: key generation, message encryption/decryption, entanglement
//! sweeps, security reports, attack simulation, circuit emission, and the
//! two-party session harness for the 2D alternate-quantum-walk protocol.

mod angle;
mod circuit;
mod record;

use std::io::Write as _;
use std::net::TcpListener;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use angle::Angle;
use aqw_core::entangle::{nonlocal_negativity, pi_tangle};
use aqw_core::protocol::{self, MessagePair, ProtocolError};
use aqw_core::security::{
    self, intercept_resend, mitm_key_guess, security_report, AttackMethod, AttackStats,
    EveBehavior, KeyGuessGrid, KeySpace,
};
use aqw_core::walker::{CoinParams, CoinState, EvolutionSpec, Preset, WalkerState};
use aqw_core::wire::{self, AliceOutcome, ProxyMode, SessionOutcome, StateFormat};
use aqw_core::{PrivateKey, PublicKey};
use circuit::{circuit_description, Direction};
use record::PrivateKeyRecord;

const EXIT_OK: i32 = 0;
const EXIT_TAMPER: i32 = 2;
const EXIT_CONFIG: i32 = 3;

#[derive(Parser)]
#[command(
    name = "aqw",
    version,
    about = "2D alternate-quantum-walk dual-message protocol tool"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair: a private record and the evolved public state
    Keygen(KeygenArgs),
    /// Translate a public-key state by a message pair
    Encrypt(EncryptArgs),
    /// Invert the walk on a ciphertext and read the message pair
    Decrypt(DecryptArgs),
    /// Tabulate entanglement against step count
    Sweep(SweepArgs),
    /// Entropy accounting for a finite key space
    SecurityReport(SecurityReportArgs),
    /// Simulate an eavesdropping strategy
    Attack(AttackArgs),
    /// Emit the photonic device list for a walk or its inverse
    Circuit(CircuitArgs),
    /// Listen for sessions, publish the key, decrypt what arrives
    ServeBob(ServeBobArgs),
    /// Connect to a receiver and send an encrypted message pair
    SendAlice(SendAliceArgs),
    /// Relay sessions, optionally measuring the ciphertext in transit
    EveProxy(EveProxyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    M1,
    G1,
}

#[derive(Args)]
struct CoinArgs {
    /// Named coin preset
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Custom coin angle (radians or rational pi, e.g. 5pi/16)
    #[arg(long, requires = "beta", requires = "gamma", conflicts_with = "preset")]
    alpha: Option<Angle>,
    #[arg(long)]
    beta: Option<Angle>,
    #[arg(long)]
    gamma: Option<Angle>,
}

impl CoinArgs {
    fn to_spec(&self, steps: u32) -> Result<EvolutionSpec> {
        match (self.preset, self.alpha, self.beta, self.gamma) {
            (Some(PresetArg::M1), None, None, None) => Ok(EvolutionSpec::m1(steps)),
            (Some(PresetArg::G1), None, None, None) => Ok(EvolutionSpec::g1(steps)),
            (None, Some(a), Some(b), Some(g)) => Ok(EvolutionSpec::custom(
                CoinParams::new(a.radians(), b.radians(), g.radians()),
                steps,
            )),
            _ => bail!("specify either --preset or all of --alpha, --beta, --gamma"),
        }
    }
}

#[derive(Args)]
struct KeyParams {
    #[command(flatten)]
    coin: CoinArgs,
    /// Number of evolution steps
    #[arg(long)]
    t: u32,
    /// Initial x position
    #[arg(long, default_value_t = 0)]
    l: i32,
    /// Initial y position
    #[arg(long, default_value_t = 0)]
    k: i32,
    /// Coin polar angle
    #[arg(long, default_value = "pi/2")]
    theta: Angle,
    /// Coin phase
    #[arg(long, default_value = "pi")]
    phi: Angle,
}

impl KeyParams {
    fn to_private_key(&self) -> Result<PrivateKey> {
        Ok(PrivateKey {
            spec: self.coin.to_spec(self.t)?,
            l: self.l,
            k: self.k,
            q: CoinState::new(self.theta.radians(), self.phi.radians()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Binary,
}

impl From<FormatArg> for StateFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => StateFormat::Text,
            FormatArg::Binary => StateFormat::Binary,
        }
    }
}

#[derive(Args)]
struct KeygenArgs {
    #[command(flatten)]
    key: KeyParams,
    /// Messages are drawn from [-msg-bound, msg-bound]
    #[arg(long)]
    msg_bound: i32,
    /// Private-key record output path
    #[arg(long)]
    private_out: PathBuf,
    /// Public-key state output path
    #[arg(long)]
    public_out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Args)]
struct EncryptArgs {
    /// Public-key state file
    #[arg(long)]
    public: PathBuf,
    #[arg(long)]
    m: i32,
    #[arg(long)]
    n: i32,
    /// Bound the key was generated for
    #[arg(long)]
    msg_bound: i32,
    /// Ciphertext output path
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
}

#[derive(Args)]
struct DecryptArgs {
    /// Ciphertext state file
    #[arg(long)]
    cipher: PathBuf,
    /// Private-key record
    #[arg(long)]
    private: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    preset: PresetArg,
    #[arg(long, default_value_t = 1)]
    t_min: u32,
    #[arg(long, default_value_t = 10)]
    t_max: u32,
    /// Comma-separated list of coin polar angles
    #[arg(long, default_value = "pi/2", value_delimiter = ',')]
    theta: Vec<Angle>,
    #[arg(long, default_value = "pi")]
    phi: Angle,
    /// Allow step counts past 20 despite the eigensolve cost
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SecurityReportArgs {
    /// Number of admissible coins (accepts 2^k syntax)
    #[arg(long, value_parser = parse_count)]
    coins: u128,
    /// Number of admissible step counts (accepts 2^k syntax)
    #[arg(long, value_parser = parse_count)]
    step_choices: u128,
    /// Initial positions range over [-position-bound, position-bound]
    #[arg(long)]
    position_bound: u32,
    /// Minimum entropy gap (bits) that counts as secure
    #[arg(long, default_value_t = 64.0)]
    floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Intercept,
    Mitm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Enumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BehaviorArg {
    /// Measure the ciphertext in the computational basis and forward the
    /// collapsed ket
    Measure,
    /// Forward untouched (null attack)
    Forward,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    #[command(flatten)]
    key: KeyParams,
    #[arg(long)]
    m: i32,
    #[arg(long)]
    n: i32,
    #[arg(long, default_value_t = 3)]
    msg_bound: i32,
    /// Intercept-and-resend statistics mode
    #[arg(long, value_enum, default_value_t = ModeArg::Enumeration)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = BehaviorArg::Measure)]
    behavior: BehaviorArg,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Root seed (defaults to AQW_SEED or 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Key-guess grid: number of sampled coins
    #[arg(long, default_value_t = 10_000)]
    grid_coins: usize,
    /// Key-guess grid: candidate step counts (comma separated; defaults to --t)
    #[arg(long, value_delimiter = ',')]
    grid_steps: Option<Vec<u32>>,
    /// Key-guess grid: position bound for guessed initial positions
    #[arg(long, default_value_t = 0)]
    grid_position_bound: i32,
    #[arg(long, default_value_t = 4242)]
    grid_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Generate,
    Decrypt,
}

#[derive(Args)]
struct CircuitArgs {
    #[command(flatten)]
    coin: CoinArgs,
    #[arg(long)]
    t: u32,
    #[arg(long, value_enum)]
    direction: DirectionArg,
    /// Emit the structured record instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeBobArgs {
    #[arg(long, default_value = "127.0.0.1:0")]
    listen: String,
    /// Private-key record
    #[arg(long)]
    private: PathBuf,
    #[arg(long, default_value_t = 1)]
    sessions: u64,
    /// Print the frame transcript of each session
    #[arg(long)]
    transcript: bool,
}

#[derive(Args)]
struct SendAliceArgs {
    #[arg(long)]
    connect: String,
    #[arg(long)]
    m: i32,
    #[arg(long)]
    n: i32,
    #[arg(long)]
    transcript: bool,
}

#[derive(Args)]
struct EveProxyArgs {
    #[arg(long, default_value = "127.0.0.1:0")]
    listen: String,
    /// Receiver endpoint to relay to
    #[arg(long)]
    forward: String,
    #[arg(long, value_enum, default_value_t = BehaviorArg::Measure)]
    mode: BehaviorArg,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    sessions: u64,
}

fn parse_count(s: &str) -> Result<u128, String> {
    if let Some((base, exp)) = s.split_once('^') {
        let base: u128 = base
            .parse()
            .map_err(|_| format!("bad count base {base:?}"))?;
        let exp: u32 = exp
            .parse()
            .map_err(|_| format!("bad count exponent {exp:?}"))?;
        base.checked_pow(exp)
            .ok_or_else(|| format!("count {s} overflows"))
    } else {
        s.parse().map_err(|_| format!("bad count {s:?}"))
    }
}

fn default_seed(explicit: Option<u64>) -> u64 {
    explicit.unwrap_or_else(|| {
        std::env::var("AQW_SEED")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(0)
    })
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            EXIT_CONFIG
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Keygen(args) => cmd_keygen(args),
        Command::Encrypt(args) => cmd_encrypt(args),
        Command::Decrypt(args) => cmd_decrypt(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::SecurityReport(args) => cmd_security_report(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Circuit(args) => cmd_circuit(args),
        Command::ServeBob(args) => cmd_serve_bob(args),
        Command::SendAlice(args) => cmd_send_alice(args),
        Command::EveProxy(args) => cmd_eve_proxy(args),
    }
}

fn cmd_keygen(args: KeygenArgs) -> Result<i32> {
    let key = args.key.to_private_key()?;
    let public = protocol::keygen(&key, args.msg_bound)?;

    PrivateKeyRecord::new(&key, args.msg_bound).save(&args.private_out)?;
    let bytes = wire::save_state(public.state(), args.format.into());
    std::fs::write(&args.public_out, bytes)
        .with_context(|| format!("writing public key {}", args.public_out.display()))?;

    println!("wrote private key {}", args.private_out.display());
    println!(
        "wrote public key {} ({} amplitudes, half-width {})",
        args.public_out.display(),
        public.state().support_len(),
        public.state().half_width()
    );
    print_entanglement(key.spec.preset(), public.state())?;
    Ok(EXIT_OK)
}

fn print_entanglement(preset: Preset, state: &WalkerState) -> Result<()> {
    match preset {
        Preset::G1 => {
            println!("negativity N_xy = {:.4}", nonlocal_negativity(state)?);
        }
        _ => {
            println!("pi-tangle pi_xyc = {:.4}", pi_tangle(state)?.pi_tangle);
        }
    }
    Ok(())
}

fn cmd_encrypt(args: EncryptArgs) -> Result<i32> {
    let bytes = std::fs::read(&args.public)
        .with_context(|| format!("reading public key {}", args.public.display()))?;
    let state = wire::load_state(&bytes)?;
    let declared_t = state.origin_step();
    let public = PublicKey::from_parts(state, declared_t, args.msg_bound);
    let cipher = protocol::encrypt(&public, MessagePair::new(args.m, args.n))?;
    std::fs::write(&args.out, wire::save_state(&cipher, args.format.into()))
        .with_context(|| format!("writing ciphertext {}", args.out.display()))?;
    println!("wrote ciphertext {}", args.out.display());
    Ok(EXIT_OK)
}

fn cmd_decrypt(args: DecryptArgs) -> Result<i32> {
    let record = PrivateKeyRecord::load(&args.private)?;
    let key = record.to_private_key()?;
    let bytes = std::fs::read(&args.cipher)
        .with_context(|| format!("reading ciphertext {}", args.cipher.display()))?;
    let cipher = wire::load_state(&bytes)?;
    match protocol::decrypt(&cipher, &key, record.msg_bound) {
        Ok(out) => {
            println!("({}, {})", out.message.m, out.message.n);
            println!("coin fidelity {:.9}", out.coin_fidelity);
            Ok(EXIT_OK)
        }
        Err(ProtocolError::TamperDetected { check, fidelity }) => {
            eprintln!("TAMPER-DETECTED: {check} check failed (fidelity {fidelity:.9})");
            Ok(EXIT_TAMPER)
        }
        Err(other) => Err(other.into()),
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    if args.t_min < 1 || args.t_min > args.t_max {
        bail!("step range must satisfy 1 <= t-min <= t-max");
    }
    if args.t_max > 20 && !args.force {
        bail!(
            "step counts past 20 require --force (eigendecompositions at dimension {})",
            (args.t_max + 1).pow(2) * 2
        );
    }
    if args.t_max > 20 {
        eprintln!(
            "warning: t-max {} implies large eigensolves; this may take a while",
            args.t_max
        );
    }
    let (spec, metric) = match args.preset {
        PresetArg::M1 => (EvolutionSpec::m1(1), "pi_tangle"),
        PresetArg::G1 => (EvolutionSpec::g1(1), "negativity_xy"),
    };
    let coin = spec.coin();
    let preset_name = spec.preset().name();
    let half_width = args.t_max as i32 + 1;

    println!("preset,t,theta,phi,metric,value");
    for theta in &args.theta {
        let mut state = WalkerState::initial(
            0,
            0,
            CoinState::new(theta.radians(), args.phi.radians()),
            half_width,
        )?;
        for t in 1..=args.t_max {
            state = state.evolve_step(&coin)?;
            if t < args.t_min {
                continue;
            }
            let value = match args.preset {
                PresetArg::M1 => pi_tangle(&state)?.pi_tangle,
                PresetArg::G1 => nonlocal_negativity(&state)?,
            };
            println!("{preset_name},{t},{theta},{},{metric},{value:.6}", args.phi);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_security_report(args: SecurityReportArgs) -> Result<i32> {
    let ks = KeySpace::new(args.coins, args.step_choices, args.position_bound)?;
    let report = security_report(&ks, args.floor);
    println!("von Neumann entropy {:>14.6} bits", report.von_neumann_bits);
    println!("Shannon entropy     {:>14.6} bits", report.shannon_bits);
    println!(
        "Holevo bound        {:>14.6} bits",
        report.holevo_bound_bits
    );
    println!("entropy gap         {:>14.6} bits", report.gap_bits);
    if report.secure {
        println!("status SECURE (gap >= floor {})", report.floor_bits);
    } else {
        println!(
            "status INSECURE-CONFIG (gap below floor {})",
            report.floor_bits
        );
    }
    Ok(EXIT_OK)
}

fn cmd_attack(args: AttackArgs) -> Result<i32> {
    let key = args.key.to_private_key()?;
    let msg = MessagePair::new(args.m, args.n);
    let seed = default_seed(args.seed);
    let stats = match args.strategy {
        StrategyArg::Intercept => {
            let behavior = match args.behavior {
                BehaviorArg::Measure => EveBehavior::Measure,
                BehaviorArg::Forward => EveBehavior::Forward,
            };
            let method = match args.mode {
                ModeArg::Enumeration => AttackMethod::Enumeration,
                ModeArg::MonteCarlo => AttackMethod::MonteCarlo,
            };
            let stats = intercept_resend(
                &key,
                msg,
                args.msg_bound,
                behavior,
                method,
                args.trials,
                seed,
            )?;
            println!(
                "strategy intercept-resend ({})",
                match method {
                    AttackMethod::Enumeration =>
                        format!("enumeration over {} outcomes", stats.trials),
                    AttackMethod::MonteCarlo => format!("monte carlo, {} trials", stats.trials),
                }
            );
            stats
        }
        StrategyArg::Mitm => {
            let grid = KeyGuessGrid::sampled(
                args.grid_coins,
                args.grid_steps.clone().unwrap_or_else(|| vec![args.key.t]),
                args.grid_position_bound,
                args.grid_seed,
            );
            let stats = mitm_key_guess(&key, msg, args.msg_bound, &grid, args.trials, seed)?;
            println!(
                "strategy mitm-key-guess ({} candidate coins, {} trials)",
                args.grid_coins, stats.trials
            );
            stats
        }
    };
    print_attack_stats(&stats);
    Ok(EXIT_OK)
}

fn print_attack_stats(stats: &AttackStats) {
    println!("eve correct probability      {:.6}", stats.eve_correct_both);
    println!("receiver detection probability {:.6}", stats.bob_detects);
    if let Some(seed) = stats.seed {
        println!("seed {seed}");
    }
}

fn cmd_circuit(args: CircuitArgs) -> Result<i32> {
    let spec = args.coin.to_spec(args.t)?;
    let direction = match args.direction {
        DirectionArg::Generate => Direction::Generate,
        DirectionArg::Decrypt => Direction::Decrypt,
    };
    let desc =
        circuit_description(&spec.coin(), args.t, direction).map_err(|e| anyhow::anyhow!(e))?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&desc)?);
    } else {
        print!("{desc}");
    }
    Ok(EXIT_OK)
}

fn cmd_serve_bob(args: ServeBobArgs) -> Result<i32> {
    let record = PrivateKeyRecord::load(&args.private)?;
    let key = record.to_private_key()?;
    let listener =
        TcpListener::bind(&args.listen).with_context(|| format!("binding {}", args.listen))?;
    println!("listening on {}", listener.local_addr()?);
    std::io::stdout().flush()?;

    let mut any_tamper = false;
    for session in 0..args.sessions {
        let (outcome, transcript) = wire::run_bob(&listener, &key, record.msg_bound)?;
        match outcome {
            SessionOutcome::Decoded(out) => println!(
                "session {session}: ({}, {}) coin fidelity {:.9}",
                out.message.m, out.message.n, out.coin_fidelity
            ),
            SessionOutcome::TamperDetected { check, fidelity } => {
                any_tamper = true;
                println!(
                    "session {session}: TAMPER-DETECTED ({check} check, fidelity {fidelity:.9})"
                );
            }
        }
        if args.transcript {
            print!("{transcript}");
        }
        std::io::stdout().flush()?;
    }
    Ok(if any_tamper { EXIT_TAMPER } else { EXIT_OK })
}

fn cmd_send_alice(args: SendAliceArgs) -> Result<i32> {
    let (outcome, transcript) = wire::run_alice(&args.connect, MessagePair::new(args.m, args.n))?;
    let code = match outcome {
        AliceOutcome::Accepted(out) => {
            println!(
                "receiver decoded ({}, {}) with coin fidelity {:.9}",
                out.message.m, out.message.n, out.coin_fidelity
            );
            EXIT_OK
        }
        AliceOutcome::TamperReported(reason) => {
            eprintln!("TAMPER-REPORTED: {reason}");
            EXIT_TAMPER
        }
    };
    if args.transcript {
        print!("{transcript}");
    }
    Ok(code)
}

fn cmd_eve_proxy(args: EveProxyArgs) -> Result<i32> {
    let listener =
        TcpListener::bind(&args.listen).with_context(|| format!("binding {}", args.listen))?;
    println!("listening on {}", listener.local_addr()?);
    std::io::stdout().flush()?;

    let seed = default_seed(args.seed);
    let mode = match args.mode {
        BehaviorArg::Measure => ProxyMode::MeasureCipher,
        BehaviorArg::Forward => ProxyMode::Forward,
    };
    for session in 0..args.sessions {
        let mut rng = security::trial_rng(seed, session);
        wire::run_eve_proxy(&listener, &args.forward, mode, &mut rng)?;
        println!("relayed session {session}");
        std::io::stdout().flush()?;
    }
    Ok(EXIT_OK)
}
