//! State serialization and the framed two-party channel.
//!
//! States round-trip bit-exactly: both the line-oriented text document and
//! the compact binary form store each amplitude as the raw bits of the two
//! binary64 components, rendered as hex in the text form. Decimal output is
//! display-only elsewhere.
//!
//! The channel carries length-prefixed frames (`u32` big-endian byte count,
//! one kind byte, payload) over any `Read + Write` stream. A session is the
//! fixed sequence receiver→sender PUBKEY, sender→receiver CIPHER, then an
//! ACK or ERROR back; anything else is a protocol violation. This simulates
//! the quantum channel classically, so a full state description crosses the
//! wire — the no-cloning caveat is documentation, not enforcement.

use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::protocol::{self, DecryptOutcome, MessagePair, PrivateKey, ProtocolError, PublicKey};
use crate::walker::{Site, WalkerError, WalkerState};

pub const FORMAT_VERSION: u32 = 1;
pub const MAX_FRAME_BYTES: u32 = 64 * 1024 * 1024;

const TEXT_MAGIC: &str = "AQWT";
const BINARY_MAGIC: [u8; 4] = *b"AQWB";

#[derive(Debug, Error)]
pub enum WireError {
    #[error("malformed state document: {0}")]
    Parse(String),
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("loaded state is off unit norm: sum |amp|^2 = {norm_sqr}")]
    Norm { norm_sqr: f64 },
    #[error("frame length {len} exceeds the {MAX_FRAME_BYTES}-byte cap")]
    FrameTooLarge { len: u32 },
    #[error("unknown frame kind byte {0:#04x}")]
    UnknownFrameKind(u8),
    #[error("unexpected {got:?} frame (expected {expected})")]
    UnexpectedFrame {
        got: FrameKind,
        expected: &'static str,
    },
    #[error("peer reported an error: {0}")]
    PeerError(String),
    #[error(transparent)]
    Channel(#[from] io::Error),
    #[error(transparent)]
    Walker(#[from] WalkerError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// On-disk / on-wire encodings of a walker state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateFormat {
    Text,
    Binary,
}

/// Serialize a state in the chosen format.
pub fn save_state(s: &WalkerState, format: StateFormat) -> Vec<u8> {
    match format {
        StateFormat::Text => save_text(s),
        StateFormat::Binary => save_binary(s),
    }
}

/// Parse either format, dispatching on the leading magic.
pub fn load_state(bytes: &[u8]) -> Result<WalkerState, WireError> {
    if bytes.starts_with(&BINARY_MAGIC) {
        load_binary(bytes)
    } else if bytes.starts_with(TEXT_MAGIC.as_bytes()) {
        load_text(bytes)
    } else {
        Err(WireError::Parse("unrecognized magic".into()))
    }
}

fn save_text(s: &WalkerState) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(&format!("{TEXT_MAGIC} {FORMAT_VERSION}\n"));
    out.push_str(&format!("halfWidth {}\n", s.half_width()));
    out.push_str(&format!("originStep {}\n", s.origin_step()));
    out.push_str(&format!("entries {}\n", s.support_len()));
    for (site, amp) in s.iter() {
        out.push_str(&format!(
            "{} {} {} {:016x} {:016x}\n",
            site.x,
            site.y,
            site.c,
            amp.re.to_bits(),
            amp.im.to_bits()
        ));
    }
    out.into_bytes()
}

fn parse_field<'a>(line: Option<&'a str>, name: &str) -> Result<&'a str, WireError> {
    let line = line.ok_or_else(|| WireError::Parse(format!("missing {name} line")))?;
    line.strip_prefix(name)
        .map(str::trim)
        .ok_or_else(|| WireError::Parse(format!("expected {name} line, got {line:?}")))
}

fn load_text(bytes: &[u8]) -> Result<WalkerState, WireError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| WireError::Parse("text document is not valid UTF-8".into()))?;
    let mut lines = text.lines();

    let header = lines
        .next()
        .ok_or_else(|| WireError::Parse("empty document".into()))?;
    let version_str = header
        .strip_prefix(TEXT_MAGIC)
        .ok_or_else(|| WireError::Parse("missing magic".into()))?
        .trim();
    let version: u32 = version_str
        .parse()
        .map_err(|_| WireError::Parse("bad version field".into()))?;
    if version != FORMAT_VERSION {
        return Err(WireError::Version(version));
    }

    let half_width: i32 = parse_field(lines.next(), "halfWidth")?
        .parse()
        .map_err(|_| WireError::Parse("bad halfWidth".into()))?;
    let origin_step: u32 = parse_field(lines.next(), "originStep")?
        .parse()
        .map_err(|_| WireError::Parse("bad originStep".into()))?;
    let count: usize = parse_field(lines.next(), "entries")?
        .parse()
        .map_err(|_| WireError::Parse("bad entry count".into()))?;

    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| WireError::Parse("truncated entry list".into()))?;
        let mut tok = line.split_whitespace();
        let x: i32 = next_int(&mut tok)?;
        let y: i32 = next_int(&mut tok)?;
        let c: u8 = next_int(&mut tok)?;
        let re = next_bits(&mut tok)?;
        let im = next_bits(&mut tok)?;
        if tok.next().is_some() {
            return Err(WireError::Parse(format!(
                "trailing tokens in entry {line:?}"
            )));
        }
        entries.push((Site { x, y, c }, Complex64::new(re, im)));
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(WireError::Parse("trailing content after entries".into()));
    }
    build_state(half_width, origin_step, entries)
}

fn next_int<T: std::str::FromStr>(tok: &mut std::str::SplitWhitespace) -> Result<T, WireError> {
    tok.next()
        .ok_or_else(|| WireError::Parse("truncated entry".into()))?
        .parse()
        .map_err(|_| WireError::Parse("bad integer token".into()))
}

fn next_bits(tok: &mut std::str::SplitWhitespace) -> Result<f64, WireError> {
    let hex = tok
        .next()
        .ok_or_else(|| WireError::Parse("truncated entry".into()))?;
    if hex.len() != 16 {
        return Err(WireError::Parse(format!(
            "amplitude bits {hex:?} must be 16 hex digits"
        )));
    }
    let bits = u64::from_str_radix(hex, 16)
        .map_err(|_| WireError::Parse(format!("bad amplitude bits {hex:?}")))?;
    Ok(f64::from_bits(bits))
}

fn save_binary(s: &WalkerState) -> Vec<u8> {
    let mut out = Vec::with_capacity(17 + 25 * s.support_len());
    out.extend_from_slice(&BINARY_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_be_bytes());
    out.extend_from_slice(&s.half_width().to_be_bytes());
    out.extend_from_slice(&s.origin_step().to_be_bytes());
    out.extend_from_slice(&(s.support_len() as u32).to_be_bytes());
    for (site, amp) in s.iter() {
        out.extend_from_slice(&site.x.to_be_bytes());
        out.extend_from_slice(&site.y.to_be_bytes());
        out.push(site.c);
        out.extend_from_slice(&amp.re.to_bits().to_be_bytes());
        out.extend_from_slice(&amp.im.to_bits().to_be_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.pos + n > self.bytes.len() {
            return Err(WireError::Parse("truncated binary document".into()));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i32(&mut self) -> Result<i32, WireError> {
        Ok(i32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }
}

fn load_binary(bytes: &[u8]) -> Result<WalkerState, WireError> {
    let mut cur = Cursor { bytes, pos: 4 };
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(WireError::Version(version));
    }
    let half_width = cur.i32()?;
    let origin_step = cur.u32()?;
    let count = cur.u32()? as usize;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let x = cur.i32()?;
        let y = cur.i32()?;
        let c = cur.u8()?;
        let re = f64::from_bits(cur.u64()?);
        let im = f64::from_bits(cur.u64()?);
        entries.push((Site { x, y, c }, Complex64::new(re, im)));
    }
    if cur.pos != bytes.len() {
        return Err(WireError::Parse("trailing bytes after entries".into()));
    }
    build_state(half_width, origin_step, entries)
}

fn build_state(
    half_width: i32,
    origin_step: u32,
    entries: Vec<(Site, Complex64)>,
) -> Result<WalkerState, WireError> {
    let mut seen = std::collections::BTreeSet::new();
    for (site, _) in &entries {
        if site.c > 1 {
            return Err(WireError::Parse(format!(
                "coin value {} out of range",
                site.c
            )));
        }
        if !seen.insert(*site) {
            return Err(WireError::Parse(format!(
                "duplicate entry for ({}, {}, {})",
                site.x, site.y, site.c
            )));
        }
    }
    WalkerState::from_amplitudes(half_width, origin_step, entries).map_err(|e| match e {
        WalkerError::NotNormalized { norm_sqr } => WireError::Norm { norm_sqr },
        other => WireError::Walker(other),
    })
}

/// Frame kinds of the session protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FrameKind {
    PublicKey = 0x01,
    Cipher = 0x02,
    Ack = 0x03,
    Error = 0x04,
}

impl TryFrom<u8> for FrameKind {
    type Error = WireError;

    fn try_from(byte: u8) -> Result<Self, WireError> {
        match byte {
            0x01 => Ok(FrameKind::PublicKey),
            0x02 => Ok(FrameKind::Cipher),
            0x03 => Ok(FrameKind::Ack),
            0x04 => Ok(FrameKind::Error),
            other => Err(WireError::UnknownFrameKind(other)),
        }
    }
}

/// Write one frame: `u32` big-endian length (payload + kind byte), the kind
/// byte, then the payload.
pub fn write_frame<W: Write>(w: &mut W, kind: FrameKind, payload: &[u8]) -> Result<(), WireError> {
    let len = payload.len() as u64 + 1;
    if len > MAX_FRAME_BYTES as u64 {
        return Err(WireError::FrameTooLarge {
            len: len.min(u32::MAX as u64) as u32,
        });
    }
    w.write_all(&(len as u32).to_be_bytes())?;
    w.write_all(&[kind as u8])?;
    w.write_all(payload)?;
    w.flush()?;
    Ok(())
}

/// Read one frame, enforcing the length cap.
pub fn read_frame<R: Read>(r: &mut R) -> Result<(FrameKind, Vec<u8>), WireError> {
    let mut len_bytes = [0u8; 4];
    r.read_exact(&mut len_bytes)?;
    let len = u32::from_be_bytes(len_bytes);
    if len == 0 {
        return Err(WireError::Parse("zero-length frame".into()));
    }
    if len > MAX_FRAME_BYTES {
        return Err(WireError::FrameTooLarge { len });
    }
    let mut body = vec![0u8; len as usize];
    r.read_exact(&mut body)?;
    let kind = FrameKind::try_from(body[0])?;
    Ok((kind, body.split_off(1)))
}

fn encode_public_key(public: &PublicKey) -> Vec<u8> {
    let mut payload = Vec::new();
    payload.extend_from_slice(&public.msg_bound().to_be_bytes());
    payload.extend_from_slice(&public.declared_t().to_be_bytes());
    payload.extend_from_slice(&save_state(public.state(), StateFormat::Binary));
    payload
}

fn decode_public_key(payload: &[u8]) -> Result<PublicKey, WireError> {
    if payload.len() < 8 {
        return Err(WireError::Parse("public key payload too short".into()));
    }
    let msg_bound = i32::from_be_bytes(payload[0..4].try_into().unwrap());
    let declared_t = u32::from_be_bytes(payload[4..8].try_into().unwrap());
    let state = load_state(&payload[8..])?;
    Ok(PublicKey::from_parts(state, declared_t, msg_bound))
}

fn encode_ack(out: &DecryptOutcome) -> Vec<u8> {
    let mut payload = Vec::new();
    payload.extend_from_slice(&out.message.m.to_be_bytes());
    payload.extend_from_slice(&out.message.n.to_be_bytes());
    payload.extend_from_slice(&out.position_mass.to_bits().to_be_bytes());
    payload.extend_from_slice(&out.coin_fidelity.to_bits().to_be_bytes());
    payload
}

fn decode_ack(payload: &[u8]) -> Result<DecryptOutcome, WireError> {
    if payload.len() != 24 {
        return Err(WireError::Parse("ack payload must be 24 bytes".into()));
    }
    Ok(DecryptOutcome {
        message: MessagePair::new(
            i32::from_be_bytes(payload[0..4].try_into().unwrap()),
            i32::from_be_bytes(payload[4..8].try_into().unwrap()),
        ),
        position_mass: f64::from_bits(u64::from_be_bytes(payload[8..16].try_into().unwrap())),
        coin_fidelity: f64::from_bits(u64::from_be_bytes(payload[16..24].try_into().unwrap())),
    })
}

const ERROR_CODE_TAMPER: u8 = 0x01;
const ERROR_CODE_PROTOCOL: u8 = 0x02;

fn encode_error(code: u8, message: &str) -> Vec<u8> {
    let mut payload = vec![code];
    payload.extend_from_slice(message.as_bytes());
    payload
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Sent,
    Received,
}

/// One frame observed by a party, for session logging.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub kind: FrameKind,
    pub payload_len: usize,
}

#[derive(Debug, Default, Clone)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    fn log(&mut self, direction: Direction, kind: FrameKind, payload_len: usize) {
        self.entries.push(TranscriptEntry {
            direction,
            kind,
            payload_len,
        });
    }
}

impl std::fmt::Display for Transcript {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for e in &self.entries {
            let arrow = match e.direction {
                Direction::Sent => "->",
                Direction::Received => "<-",
            };
            writeln!(f, "{arrow} {:?} ({} bytes)", e.kind, e.payload_len)?;
        }
        Ok(())
    }
}

/// The receiver's view of a finished session. Tampering is a session
/// outcome, not a transport failure.
#[derive(Debug, Clone, PartialEq)]
pub enum SessionOutcome {
    Decoded(DecryptOutcome),
    TamperDetected { check: String, fidelity: f64 },
}

/// Receiver side of one session over an established channel: send the public
/// key, await the ciphertext, decrypt, report back.
pub fn bob_session<S: Read + Write>(
    chan: &mut S,
    key: &PrivateKey,
    msg_bound: i32,
    transcript: &mut Transcript,
) -> Result<SessionOutcome, WireError> {
    let public = protocol::keygen(key, msg_bound)?;
    let payload = encode_public_key(&public);
    write_frame(chan, FrameKind::PublicKey, &payload)?;
    transcript.log(Direction::Sent, FrameKind::PublicKey, payload.len());

    let (kind, payload) = read_frame(chan)?;
    transcript.log(Direction::Received, kind, payload.len());
    if kind != FrameKind::Cipher {
        let err = encode_error(ERROR_CODE_PROTOCOL, "expected CIPHER frame");
        let _ = write_frame(chan, FrameKind::Error, &err);
        transcript.log(Direction::Sent, FrameKind::Error, err.len());
        return Err(WireError::UnexpectedFrame {
            got: kind,
            expected: "CIPHER",
        });
    }
    let cipher = load_state(&payload)?;

    match protocol::decrypt(&cipher, key, msg_bound) {
        Ok(outcome) => {
            let ack = encode_ack(&outcome);
            write_frame(chan, FrameKind::Ack, &ack)?;
            transcript.log(Direction::Sent, FrameKind::Ack, ack.len());
            Ok(SessionOutcome::Decoded(outcome))
        }
        Err(ProtocolError::TamperDetected { check, fidelity }) => {
            let msg = format!("tamper detected on the {check} check (fidelity {fidelity:.9})");
            let err = encode_error(ERROR_CODE_TAMPER, &msg);
            write_frame(chan, FrameKind::Error, &err)?;
            transcript.log(Direction::Sent, FrameKind::Error, err.len());
            Ok(SessionOutcome::TamperDetected {
                check: check.to_string(),
                fidelity,
            })
        }
        Err(other) => {
            let err = encode_error(ERROR_CODE_PROTOCOL, &other.to_string());
            let _ = write_frame(chan, FrameKind::Error, &err);
            transcript.log(Direction::Sent, FrameKind::Error, err.len());
            Err(other.into())
        }
    }
}

/// Sender's view of a finished session.
#[derive(Debug, Clone, PartialEq)]
pub enum AliceOutcome {
    /// Receiver acknowledged this decode.
    Accepted(DecryptOutcome),
    /// Receiver reported tampering.
    TamperReported(String),
}

/// Sender side of one session: await the public key, encrypt the message
/// pair, send the ciphertext, await the receiver's report.
pub fn alice_session<S: Read + Write>(
    chan: &mut S,
    msg: MessagePair,
    transcript: &mut Transcript,
) -> Result<AliceOutcome, WireError> {
    let (kind, payload) = read_frame(chan)?;
    transcript.log(Direction::Received, kind, payload.len());
    let public = match kind {
        FrameKind::PublicKey => decode_public_key(&payload)?,
        FrameKind::Error => return Err(peer_error(&payload)),
        other => {
            return Err(WireError::UnexpectedFrame {
                got: other,
                expected: "PUBKEY",
            })
        }
    };

    let cipher = protocol::encrypt(&public, msg)?;
    let payload = save_state(&cipher, StateFormat::Binary);
    write_frame(chan, FrameKind::Cipher, &payload)?;
    transcript.log(Direction::Sent, FrameKind::Cipher, payload.len());

    let (kind, payload) = read_frame(chan)?;
    transcript.log(Direction::Received, kind, payload.len());
    match kind {
        FrameKind::Ack => Ok(AliceOutcome::Accepted(decode_ack(&payload)?)),
        FrameKind::Error => {
            if payload.first() == Some(&ERROR_CODE_TAMPER) {
                Ok(AliceOutcome::TamperReported(
                    String::from_utf8_lossy(&payload[1..]).into_owned(),
                ))
            } else {
                Err(peer_error(&payload))
            }
        }
        other => Err(WireError::UnexpectedFrame {
            got: other,
            expected: "ACK or ERROR",
        }),
    }
}

fn peer_error(payload: &[u8]) -> WireError {
    let text = if payload.len() > 1 {
        String::from_utf8_lossy(&payload[1..]).into_owned()
    } else {
        "unspecified".into()
    };
    WireError::PeerError(text)
}

/// What the in-path interceptor does to the ciphertext it relays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxyMode {
    /// Measure in the computational basis and forward the collapsed ket.
    MeasureCipher,
    /// Relay every frame untouched.
    Forward,
}

/// Relay one session between the sender and receiver channels, optionally
/// attacking the ciphertext. Reuses the measurement semantics of
/// [`crate::security::measure_collapse`].
pub fn eve_proxy_session<A, B, R>(
    alice_chan: &mut A,
    bob_chan: &mut B,
    mode: ProxyMode,
    rng: &mut R,
) -> Result<(), WireError>
where
    A: Read + Write,
    B: Read + Write,
    R: Rng,
{
    // receiver -> sender: public key
    let (kind, payload) = read_frame(bob_chan)?;
    write_frame(alice_chan, kind, &payload)?;
    if kind == FrameKind::Error {
        return Ok(());
    }

    // sender -> receiver: ciphertext (the attack point)
    let (kind, payload) = read_frame(alice_chan)?;
    let payload = if kind == FrameKind::Cipher && mode == ProxyMode::MeasureCipher {
        let state = load_state(&payload)?;
        let collapsed = crate::security::measure_collapse(&state, rng);
        save_state(&collapsed, StateFormat::Binary)
    } else {
        payload
    };
    write_frame(bob_chan, kind, &payload)?;
    if kind == FrameKind::Error {
        return Ok(());
    }

    // receiver -> sender: ack or tamper report
    let (kind, payload) = read_frame(bob_chan)?;
    write_frame(alice_chan, kind, &payload)?;
    Ok(())
}

/// Accept one connection and run the receiver side of a session.
pub fn run_bob(
    listener: &TcpListener,
    key: &PrivateKey,
    msg_bound: i32,
) -> Result<(SessionOutcome, Transcript), WireError> {
    let (mut stream, _) = listener.accept()?;
    let mut transcript = Transcript::default();
    let outcome = bob_session(&mut stream, key, msg_bound, &mut transcript)?;
    Ok((outcome, transcript))
}

/// Connect to the receiver (or an interposed proxy) and run the sender side.
pub fn run_alice<A: ToSocketAddrs>(
    addr: A,
    msg: MessagePair,
) -> Result<(AliceOutcome, Transcript), WireError> {
    let mut stream = TcpStream::connect(addr)?;
    let mut transcript = Transcript::default();
    let outcome = alice_session(&mut stream, msg, &mut transcript)?;
    Ok((outcome, transcript))
}

/// Accept one sender connection, dial the receiver, and relay the session
/// through the interceptor.
pub fn run_eve_proxy<A: ToSocketAddrs, R: Rng>(
    listener: &TcpListener,
    upstream: A,
    mode: ProxyMode,
    rng: &mut R,
) -> Result<(), WireError> {
    let (mut alice_side, _) = listener.accept()?;
    let mut bob_side = TcpStream::connect(upstream)?;
    eve_proxy_session(&mut alice_side, &mut bob_side, mode, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walker::{CoinState, EvolutionSpec};
    use std::f64::consts::PI;

    fn golden_key() -> PrivateKey {
        PrivateKey {
            spec: EvolutionSpec::m1(2),
            l: 0,
            k: 0,
            q: CoinState::new(PI / 2.0, PI),
        }
    }

    fn golden_state() -> WalkerState {
        protocol::keygen(&golden_key(), 3).unwrap().state().clone()
    }

    /// In-memory duplex: reads scripted input, captures writes.
    struct MockChan {
        input: io::Cursor<Vec<u8>>,
        output: Vec<u8>,
    }

    impl MockChan {
        fn scripted(frames: &[(FrameKind, Vec<u8>)]) -> Self {
            let mut input = Vec::new();
            for (kind, payload) in frames {
                write_frame(&mut input, *kind, payload).unwrap();
            }
            Self {
                input: io::Cursor::new(input),
                output: Vec::new(),
            }
        }
    }

    impl Read for MockChan {
        fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
            self.input.read(buf)
        }
    }

    impl Write for MockChan {
        fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
            self.output.write(buf)
        }

        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn state_round_trips_bit_exactly_in_both_formats() {
        let state = golden_state();
        for format in [StateFormat::Text, StateFormat::Binary] {
            let bytes = save_state(&state, format);
            let loaded = load_state(&bytes).unwrap();
            assert_eq!(loaded, state, "{format:?} round trip");
        }
    }

    #[test]
    fn truncated_documents_are_parse_errors() {
        let state = golden_state();
        for format in [StateFormat::Text, StateFormat::Binary] {
            let bytes = save_state(&state, format);
            let cut = &bytes[..bytes.len() - 3];
            assert!(matches!(load_state(cut), Err(WireError::Parse(_))));
        }
        assert!(matches!(load_state(b"bogus"), Err(WireError::Parse(_))));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let state = golden_state();
        let mut text = String::from_utf8(save_state(&state, StateFormat::Text)).unwrap();
        text = text.replacen("AQWT 1", "AQWT 9", 1);
        assert!(matches!(
            load_state(text.as_bytes()),
            Err(WireError::Version(9))
        ));

        let mut bin = save_state(&state, StateFormat::Binary);
        bin[7] = 9;
        assert!(matches!(load_state(&bin), Err(WireError::Version(9))));
    }

    #[test]
    fn off_norm_document_is_a_norm_error() {
        let half = WalkerState::initial(0, 0, CoinState::new(PI / 2.0, 0.0), 1).unwrap();
        let mut bytes = save_state(&half, StateFormat::Text);
        // drop the second entry and fix the count: norm becomes 0.5
        let text = String::from_utf8(bytes.clone()).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.pop();
        let patched = lines.join("\n").replacen("entries 2", "entries 1", 1);
        bytes = patched.into_bytes();
        assert!(matches!(load_state(&bytes), Err(WireError::Norm { .. })));
    }

    #[test]
    fn duplicate_entries_are_rejected() {
        let state = golden_state();
        let text = String::from_utf8(save_state(&state, StateFormat::Text)).unwrap();
        let entry_line = text.lines().nth(4).unwrap().to_string();
        let patched = text.replacen(
            &format!("entries {}", state.support_len()),
            &format!("entries {}", state.support_len() + 1),
            1,
        ) + &entry_line
            + "\n";
        assert!(matches!(
            load_state(patched.as_bytes()),
            Err(WireError::Parse(_))
        ));
    }

    #[test]
    fn frame_codec_round_trips() {
        let mut buf = Vec::new();
        write_frame(&mut buf, FrameKind::Cipher, b"payload").unwrap();
        let (kind, payload) = read_frame(&mut io::Cursor::new(buf)).unwrap();
        assert_eq!(kind, FrameKind::Cipher);
        assert_eq!(payload, b"payload");
    }

    #[test]
    fn oversized_frame_is_rejected_on_read() {
        let mut buf = Vec::new();
        buf.extend_from_slice(&(MAX_FRAME_BYTES + 1).to_be_bytes());
        buf.push(FrameKind::Ack as u8);
        assert!(matches!(
            read_frame(&mut io::Cursor::new(buf)),
            Err(WireError::FrameTooLarge { .. })
        ));
    }

    #[test]
    fn honest_session_over_mock_channel() {
        let key = golden_key();
        let msg = MessagePair::new(1, 2);
        let public = protocol::keygen(&key, 3).unwrap();

        // Bob against a scripted sender
        let cipher = protocol::encrypt(&public, msg).unwrap();
        let mut bob =
            MockChan::scripted(&[(FrameKind::Cipher, save_state(&cipher, StateFormat::Binary))]);
        let mut transcript = Transcript::default();
        let outcome = bob_session(&mut bob, &key, 3, &mut transcript).unwrap();
        match outcome {
            SessionOutcome::Decoded(out) => {
                assert_eq!(out.message, msg);
                assert!(out.position_mass >= 1.0 - 1e-9);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
        assert_eq!(transcript.entries.len(), 3);

        // Alice against a scripted receiver
        let out = DecryptOutcome {
            message: msg,
            position_mass: 1.0,
            coin_fidelity: 1.0,
        };
        let mut alice = MockChan::scripted(&[
            (FrameKind::PublicKey, encode_public_key(&public)),
            (FrameKind::Ack, encode_ack(&out)),
        ]);
        let mut transcript = Transcript::default();
        let result = alice_session(&mut alice, msg, &mut transcript).unwrap();
        assert_eq!(result, AliceOutcome::Accepted(out));
        // her CIPHER frame carries the encrypted state
        let mut cur = io::Cursor::new(&alice.output[..]);
        let (kind, payload) = read_frame(&mut cur).unwrap();
        assert_eq!(kind, FrameKind::Cipher);
        assert_eq!(load_state(&payload).unwrap(), cipher);
    }

    #[test]
    fn bob_rejects_out_of_order_frames() {
        let key = golden_key();
        for kind in [FrameKind::Ack, FrameKind::PublicKey, FrameKind::Error] {
            let mut chan = MockChan::scripted(&[(kind, vec![0u8; 4])]);
            let mut transcript = Transcript::default();
            let err = bob_session(&mut chan, &key, 3, &mut transcript).unwrap_err();
            assert!(
                matches!(err, WireError::UnexpectedFrame { .. }),
                "kind {kind:?} gave {err:?}"
            );
            // he sent PUBKEY, then an ERROR frame back to the peer
            let mut cur = io::Cursor::new(&chan.output[..]);
            let (first, _) = read_frame(&mut cur).unwrap();
            assert_eq!(first, FrameKind::PublicKey);
            let (second, _) = read_frame(&mut cur).unwrap();
            assert_eq!(second, FrameKind::Error);
        }
    }

    #[test]
    fn alice_rejects_wrong_first_frame() {
        let mut chan = MockChan::scripted(&[(FrameKind::Cipher, vec![1, 2, 3])]);
        let mut transcript = Transcript::default();
        let err = alice_session(&mut chan, MessagePair::new(0, 0), &mut transcript).unwrap_err();
        assert!(matches!(err, WireError::UnexpectedFrame { .. }));
    }
}
