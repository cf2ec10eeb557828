//! The squeezed-state QKD protocol as a seeded two-party state machine, with
//! its analytic correctness, completeness and secrecy parameters.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::binary_entropy;
use crate::coding::{
    gray_decode, hamming_distance, pack_bits, signed_bin_bits, unpack_bits, BinConfig, CodeSpec,
    LinearCode, SyndromeDecoder, ToeplitzHash,
};
use crate::config::Config;
use crate::cv_gaussian::{
    expected_mismatch_momentum, expected_mismatch_position, homodyne_measure, rescale_momentum,
    sample_coset_params, AgwnParams, Damping, Quadrature, RegisterSubspace,
};
use crate::error::{ensure, Error, Result};
use crate::seed;

const STREAM_ALICE: u64 = 0xa11ce;
const STREAM_BOB: u64 = 0xb0b;
const STREAM_STATE: u64 = 0x57a7e;
const STREAM_TRIAL: u64 = 0x7e1a1;

/// Two-sided normal quantile for 99% intervals.
pub const Z99: f64 = 2.575_829_303_548_901;

fn as_count(x: f64, what: &str) -> Result<usize> {
    let r = x.round();
    ensure!(
        (x - r).abs() < 1e-9 && r >= 0.0,
        Validation,
        "{what} = {x} must be a nonnegative integer"
    );
    Ok(r as usize)
}

/// Every parameter of one protocol instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    pub n: usize,
    pub damping: Damping,
    /// Position binning `(δ, M, n_M)`.
    pub pos_bins: BinConfig,
    /// Momentum binning `(ε, N, n_N)`.
    pub mom_bins: BinConfig,
    pub theta: f64,
    pub gamma_tol: f64,
    pub eta: f64,
    pub key_len: usize,
    pub code: LinearCode,
    pub tau: f64,
}

pub const PARAM_KEYS: &[&str] = &[
    "n",
    "a",
    "b",
    "squeeze",
    "delta",
    "n_m",
    "epsilon",
    "n_n",
    "theta",
    "gamma",
    "eta",
    "key_len",
    "code",
    "code_seed",
    "tau",
];

impl ProtocolParams {
    /// Checks every structural invariant; `run_session` calls this first.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        ensure!(
            n >= 2 && n % 2 == 0,
            Validation,
            "n must be even and positive, got {n}"
        );
        ensure!(
            (0.0..=1.0).contains(&self.theta),
            Validation,
            "theta must lie in [0, 1]"
        );
        ensure!(
            (0.0..1.0).contains(&self.gamma_tol),
            Validation,
            "gamma must lie in [0, 1)"
        );
        ensure!(
            self.eta > 0.0 && self.eta <= 1.0,
            Validation,
            "eta must lie in (0, 1]"
        );
        self.pe_count()?;
        self.pe_threshold()?;
        self.reconcile_count()?;
        ensure!(
            self.code.n() == self.raw_key_len(),
            Validation,
            "code length {} must equal n·n_N/2 = {}",
            self.code.n(),
            self.raw_key_len()
        );
        ensure!(
            self.key_len >= 1 && self.key_len <= self.code.k(),
            Validation,
            "key length {} must lie in [1, k = {}]",
            self.key_len,
            self.code.k()
        );
        Ok(())
    }

    /// `θn/2`, the number of parameter-estimation modes.
    pub fn pe_count(&self) -> Result<usize> {
        as_count(self.theta * self.n as f64 / 2.0, "theta·n/2")
    }

    /// `γθn/2`, the largest tolerated number of estimation mismatches.
    pub fn pe_threshold(&self) -> Result<usize> {
        as_count(
            self.gamma_tol * self.theta * self.n as f64 / 2.0,
            "gamma·theta·n/2",
        )
    }

    /// `ηn_Nn/2`, the number of revealed reconciliation bits.
    pub fn reconcile_count(&self) -> Result<usize> {
        as_count(self.eta * self.raw_key_len() as f64, "eta·n_N·n/2")
    }

    /// `n·n_N/2`, the length of the momentum bit string.
    pub fn raw_key_len(&self) -> usize {
        self.n * self.mom_bins.n_bits / 2
    }

    /// Reads the keys in `PARAM_KEYS`. The code length is fixed by `n` and
    /// `n_n`, so the block code named by `code` is repeated to fill it.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        cfg.check_known(PARAM_KEYS)?;
        let n: usize = cfg.require("n")?;
        let damping = match (
            cfg.get::<f64>("a")?,
            cfg.get::<f64>("b")?,
            cfg.get::<f64>("squeeze")?,
        ) {
            (Some(a), Some(b), None) => Damping::new(a, b)?,
            (None, None, Some(d)) => Damping::from_squeeze(d)?,
            _ => return Err(Error::Validation("give either a and b, or squeeze".into())),
        };
        let pos_bins = BinConfig::new(cfg.require("delta")?, cfg.require("n_m")?)?;
        let mom_bins = BinConfig::new(cfg.require("epsilon")?, cfg.require("n_n")?)?;
        let spec: CodeSpec = cfg.get_or("code", "hamming".to_string())?.parse()?;
        if matches!(spec, CodeSpec::Random { .. }) {
            ensure!(
                cfg.contains("code_seed"),
                Validation,
                "random codes need code_seed"
            );
        }
        let block = LinearCode::make(spec, cfg.get_or("code_seed", 0u64)?)?;
        let total = n * mom_bins.n_bits / 2;
        ensure!(
            total % block.n() == 0,
            Validation,
            "block length {} does not divide n·n_N/2 = {total}",
            block.n()
        );
        let code = block.direct_sum(total / block.n())?;
        let p = ProtocolParams {
            n,
            damping,
            pos_bins,
            mom_bins,
            theta: cfg.require("theta")?,
            gamma_tol: cfg.require("gamma")?,
            eta: cfg.require("eta")?,
            key_len: cfg.require("key_len")?,
            code,
            tau: cfg.get_or("tau", (n as f64).powf(-0.25))?,
        };
        p.validate()?;
        Ok(p)
    }
}

/// The quantum channel between Alice and Bob.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    Identity,
    Agwn(AgwnParams),
    PerMode(Vec<AgwnParams>),
}

impl ChannelModel {
    pub fn noise(&self, mode: usize) -> AgwnParams {
        match self {
            ChannelModel::Identity => AgwnParams::identity(),
            ChannelModel::Agwn(p) => *p,
            ChannelModel::PerMode(v) => v[mode],
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if let ChannelModel::PerMode(v) = self {
            ensure!(
                v.len() == n,
                Validation,
                "per-mode channel lists {} modes, n = {n}",
                v.len()
            );
        }
        Ok(())
    }
}

impl FromStr for ChannelModel {
    type Err = Error;

    /// `identity` or `agwn:x=..,y=..`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "identity" || s == "id" {
            return Ok(ChannelModel::Identity);
        }
        let rest = s
            .strip_prefix("agwn:")
            .ok_or_else(|| Error::Parse(format!("unknown channel '{s}'")))?;
        let (mut x, mut y) = (0.0, 0.0);
        for part in rest.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad channel field '{part}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad channel value '{v}'")))?;
            match k.trim() {
                "x" => x = v,
                "y" => y = v,
                other => return Err(Error::Parse(format!("unknown channel field '{other}'"))),
            }
        }
        Ok(ChannelModel::Agwn(AgwnParams::new(x, y)?))
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelModel::Identity => write!(f, "identity"),
            ChannelModel::Agwn(p) => write!(f, "agwn:x={},y={}", p.x, p.y),
            ChannelModel::PerMode(v) => write!(f, "per-mode[{}]", v.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ack,
    BasisAndPe,
    Syndrome,
    Reconcile,
    HashSeed,
    Abort,
}

impl Stage {
    fn tag(self) -> u8 {
        self as u8
    }

    fn from_tag(t: u8) -> Result<Self> {
        Ok(match t {
            0 => Stage::Ack,
            1 => Stage::BasisAndPe,
            2 => Stage::Syndrome,
            3 => Stage::Reconcile,
            4 => Stage::HashSeed,
            5 => Stage::Abort,
            _ => return Err(Error::Parse(format!("unknown message tag {t}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sender {
    Alice,
    Bob,
}

/// One classical message of the protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Ack,
    BasisAndPe {
        subspace: Vec<bool>,
        pe_subset: Vec<u32>,
        pe_bits: Vec<bool>,
    },
    Syndrome(Vec<bool>),
    Reconcile {
        subset: Vec<u32>,
        bits: Vec<bool>,
    },
    HashSeed(Vec<bool>),
    /// Sent by Bob; carries the stage whose check failed.
    Abort(Stage),
}

impl Message {
    pub fn stage(&self) -> Stage {
        match self {
            Message::Ack => Stage::Ack,
            Message::BasisAndPe { .. } => Stage::BasisAndPe,
            Message::Syndrome(_) => Stage::Syndrome,
            Message::Reconcile { .. } => Stage::Reconcile,
            Message::HashSeed(_) => Stage::HashSeed,
            Message::Abort(_) => Stage::Abort,
        }
    }

    pub fn sender(&self) -> Sender {
        match self {
            Message::Ack | Message::Abort(_) => Sender::Bob,
            _ => Sender::Alice,
        }
    }

    /// Tag byte, then big-endian `u32` lengths followed by packed bits or indices.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.stage().tag()];
        match self {
            Message::Ack => {}
            Message::BasisAndPe {
                subspace,
                pe_subset,
                pe_bits,
            } => {
                put_bits(&mut out, subspace);
                put_indices(&mut out, pe_subset);
                put_bits(&mut out, pe_bits);
            }
            Message::Syndrome(b) | Message::HashSeed(b) => put_bits(&mut out, b),
            Message::Reconcile { subset, bits } => {
                put_indices(&mut out, subset);
                put_bits(&mut out, bits);
            }
            Message::Abort(stage) => out.push(stage.tag()),
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let msg = match Stage::from_tag(r.byte()?)? {
            Stage::Ack => Message::Ack,
            Stage::BasisAndPe => Message::BasisAndPe {
                subspace: r.bits()?,
                pe_subset: r.indices()?,
                pe_bits: r.bits()?,
            },
            Stage::Syndrome => Message::Syndrome(r.bits()?),
            Stage::Reconcile => Message::Reconcile {
                subset: r.indices()?,
                bits: r.bits()?,
            },
            Stage::HashSeed => Message::HashSeed(r.bits()?),
            Stage::Abort => Message::Abort(Stage::from_tag(r.byte()?)?),
        };
        ensure!(
            r.pos == bytes.len(),
            Parse,
            "{} trailing bytes after message",
            bytes.len() - r.pos
        );
        Ok(msg)
    }
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_be_bytes());
}

fn put_bits(out: &mut Vec<u8>, bits: &[bool]) {
    put_u32(out, bits.len());
    out.extend(pack_bits(bits));
}

fn put_indices(out: &mut Vec<u8>, idx: &[u32]) {
    put_u32(out, idx.len());
    for &i in idx {
        out.extend_from_slice(&i.to_be_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, len: usize) -> Result<&[u8]> {
        ensure!(
            self.pos + len <= self.bytes.len(),
            Parse,
            "message truncated"
        );
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn byte(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn bits(&mut self) -> Result<Vec<bool>> {
        let len = self.u32()? as usize;
        let bytes = self.take(len.div_ceil(8))?;
        unpack_bits(bytes, len)
    }

    fn indices(&mut self) -> Result<Vec<u32>> {
        let len = self.u32()? as usize;
        ensure!(
            len * 4 <= self.bytes.len() - self.pos,
            Parse,
            "message truncated"
        );
        (0..len).map(|_| self.u32()).collect()
    }
}

/// One line of a JSONL transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub stage: Stage,
    pub sender: Sender,
    pub payload_hex: String,
}

pub fn transcript_to_jsonl(messages: &[Message]) -> String {
    let mut out = String::new();
    for m in messages {
        let rec = TranscriptRecord {
            stage: m.stage(),
            sender: m.sender(),
            payload_hex: hex::encode(m.encode()),
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parses a transcript and checks stage order: a prefix of
/// ack, basis_and_pe, syndrome, reconcile, hash_seed, possibly ended by an
/// abort after basis_and_pe or reconcile.
pub fn transcript_from_jsonl(text: &str) -> Result<Vec<Message>> {
    const ORDER: [Stage; 5] = [
        Stage::Ack,
        Stage::BasisAndPe,
        Stage::Syndrome,
        Stage::Reconcile,
        Stage::HashSeed,
    ];
    let mut msgs = Vec::new();
    for (i, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let rec: TranscriptRecord = serde_json::from_str(line)?;
        let bytes = hex::decode(&rec.payload_hex)
            .map_err(|e| Error::Parse(format!("record {}: bad hex: {e}", i + 1)))?;
        let msg = Message::decode(&bytes)?;
        ensure!(
            msg.stage() == rec.stage && msg.sender() == rec.sender,
            Validation,
            "record {}: header says {:?} from {:?}, payload is {:?} from {:?}",
            i + 1,
            rec.stage,
            rec.sender,
            msg.stage(),
            msg.sender()
        );
        ensure!(
            !matches!(msgs.last(), Some(Message::Abort(_))),
            Validation,
            "record {}: message after abort",
            i + 1
        );
        match &msg {
            Message::Abort(at) => ensure!(
                matches!(at, Stage::BasisAndPe | Stage::Reconcile)
                    && msgs.last().map(Message::stage) == Some(*at),
                Validation,
                "record {}: abort at {at:?} out of place",
                i + 1
            ),
            m => ensure!(
                ORDER.get(msgs.len()) == Some(&m.stage()),
                Validation,
                "record {}: {:?} out of order",
                i + 1,
                m.stage()
            ),
        }
        msgs.push(msg);
    }
    ensure!(!msgs.is_empty(), Validation, "empty transcript");
    Ok(msgs)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub pe_mismatches: usize,
    /// Bits Bob flipped while decoding.
    pub corrected_bits: usize,
    /// Hamming distance between Alice's and Bob's corrected strings. Only the
    /// simulation can see this.
    pub residual_errors: usize,
    pub resamples: u64,
    /// Homodyne outcomes replaced by 0 for falling outside the bin range.
    pub out_of_range: usize,
    pub abort_stage: Option<Stage>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    pub accepted: bool,
    pub alice_key: Option<Vec<bool>>,
    pub bob_key: Option<Vec<bool>>,
    pub transcript: Vec<Message>,
    pub diagnostics: Diagnostics,
}

impl SessionResult {
    pub fn key_mismatch(&self) -> bool {
        self.accepted && self.alice_key != self.bob_key
    }

    pub fn transcript_jsonl(&self) -> String {
        transcript_to_jsonl(&self.transcript)
    }
}

/// Validated parameters together with the syndrome decoder, which is
/// expensive to build and shared by every session.
#[derive(Debug, Clone)]
pub struct Protocol {
    params: ProtocolParams,
    decoder: SyndromeDecoder,
}

impl Protocol {
    pub fn new(params: ProtocolParams) -> Result<Self> {
        params.validate()?;
        let decoder = params.code.decoder()?;
        Ok(Protocol { params, decoder })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn run(&self, channel: &ChannelModel, seed: u64) -> Result<SessionResult> {
        let p = &self.params;
        channel.check(p.n)?;
        let mut alice = seed::rng(seed, STREAM_ALICE, 0);
        let mut bob = seed::rng(seed, STREAM_BOB, 0);
        let mut diag = Diagnostics::default();
        let mut transcript = Vec::with_capacity(5);

        // state preparation
        let subspace = RegisterSubspace::random(p.n, &mut alice)?;
        let sample = sample_coset_params(
            &subspace,
            p.damping,
            p.pos_bins.cutoff(),
            p.mom_bins.cutoff(),
            seed::derive(seed, STREAM_STATE, 0),
        )?;
        diag.resamples = sample.resamples;
        let pos_modes = subspace.complement();
        let mom_modes = subspace.indices().to_vec();

        // parameter estimation
        transcript.push(Message::Ack);
        let pe_count = p.pe_count()?;
        let mut pe_slots: Vec<usize> =
            index::sample(&mut alice, pos_modes.len(), pe_count).into_vec();
        pe_slots.sort_unstable();
        let pe_bits: Vec<bool> = pe_slots
            .iter()
            .flat_map(|&s| {
                signed_bin_bits(sample.q[s], &p.pos_bins).expect("truncated sample in range")
            })
            .collect();
        transcript.push(Message::BasisAndPe {
            subspace: subspace.mask(),
            pe_subset: pe_slots.iter().map(|&s| pos_modes[s] as u32).collect(),
            pe_bits: pe_bits.clone(),
        });

        let q_hat: Vec<f64> = pos_modes
            .iter()
            .zip(&sample.q)
            .map(|(&mode, &q)| {
                let v = homodyne_measure(
                    Quadrature::Position,
                    q,
                    p.damping,
                    channel.noise(mode),
                    &mut bob,
                );
                self.clip(v, &p.pos_bins, &mut diag)
            })
            .collect();
        let p_hat: Vec<f64> = mom_modes
            .iter()
            .zip(&sample.p)
            .map(|(&mode, &pv)| {
                let v = homodyne_measure(
                    Quadrature::Momentum,
                    pv,
                    p.damping,
                    channel.noise(mode),
                    &mut bob,
                );
                self.clip(rescale_momentum(v, p.damping), &p.mom_bins, &mut diag)
            })
            .collect();

        let n_m = p.pos_bins.n_bits;
        for (j, &s) in pe_slots.iter().enumerate() {
            let alice_idx = gray_decode(&pe_bits[j * n_m..(j + 1) * n_m])?;
            let bob_idx = p
                .pos_bins
                .offset_index(q_hat[s])
                .expect("clipped into range");
            if alice_idx != bob_idx {
                diag.pe_mismatches += 1;
            }
        }
        if diag.pe_mismatches > p.pe_threshold()? {
            return Ok(self.abort(Stage::BasisAndPe, transcript, diag));
        }

        // error correction
        let alice_bits = momentum_bits(&sample.p, &p.mom_bins);
        let bob_raw = momentum_bits(&p_hat, &p.mom_bins);
        let syndrome = p.code.syndrome(&alice_bits)?;
        transcript.push(Message::Syndrome(syndrome.clone()));
        let bob_bits = self.decoder.decode_with_syndrome(&bob_raw, &syndrome)?;
        diag.corrected_bits = hamming_distance(&bob_raw, &bob_bits);
        diag.residual_errors = hamming_distance(&alice_bits, &bob_bits);

        // information reconciliation
        let mut subset: Vec<usize> =
            index::sample(&mut alice, p.raw_key_len(), p.reconcile_count()?).into_vec();
        subset.sort_unstable();
        let revealed: Vec<bool> = subset.iter().map(|&j| alice_bits[j]).collect();
        transcript.push(Message::Reconcile {
            subset: subset.iter().map(|&j| j as u32).collect(),
            bits: revealed.clone(),
        });
        if subset
            .iter()
            .zip(&revealed)
            .any(|(&j, &b)| bob_bits[j] != b)
        {
            return Ok(self.abort(Stage::Reconcile, transcript, diag));
        }

        // privacy amplification
        let hash = ToeplitzHash::random(p.raw_key_len(), p.key_len, &mut alice)?;
        transcript.push(Message::HashSeed(hash.diag().to_vec()));
        Ok(SessionResult {
            accepted: true,
            alice_key: Some(hash.apply(&alice_bits)?),
            bob_key: Some(hash.apply(&bob_bits)?),
            transcript,
            diagnostics: diag,
        })
    }

    fn clip(&self, v: f64, bins: &BinConfig, diag: &mut Diagnostics) -> f64 {
        if bins.in_range(v) {
            v
        } else {
            diag.out_of_range += 1;
            0.0
        }
    }

    fn abort(
        &self,
        stage: Stage,
        mut transcript: Vec<Message>,
        mut diag: Diagnostics,
    ) -> SessionResult {
        transcript.push(Message::Abort(stage));
        diag.abort_stage = Some(stage);
        SessionResult {
            accepted: false,
            alice_key: None,
            bob_key: None,
            transcript,
            diagnostics: diag,
        }
    }
}

fn momentum_bits(values: &[f64], bins: &BinConfig) -> Vec<bool> {
    values
        .iter()
        .flat_map(|&v| signed_bin_bits(v, bins).expect("value in range"))
        .collect()
}

/// One protocol run; deterministic in `(params, channel, seed)`.
pub fn run_session(
    params: &ProtocolParams,
    channel: &ChannelModel,
    seed: u64,
) -> Result<SessionResult> {
    Protocol::new(params.clone())?.run(channel, seed)
}

fn distance_of(params: &ProtocolParams) -> Result<f64> {
    params
        .code
        .distance()
        .map(|d| d as f64)
        .ok_or_else(|| Error::Precondition("the code's minimum distance is unknown".into()))
}

/// `(1 - 2d/(n_N n))^{η n_N n/2}`.
pub fn correctness_bound(params: &ProtocolParams) -> Result<f64> {
    let d = distance_of(params)?;
    let bits = params.raw_key_len() as f64;
    let base = (1.0 - d / bits).max(0.0);
    Ok(base.powf(params.eta * bits))
}

/// The two completeness terms and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Completeness {
    pub estimation_term: f64,
    pub correction_term: f64,
    pub value: f64,
}

/// The inputs of the completeness bounds. Only the code's distance enters,
/// so large `n` can be evaluated without building a code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletenessParams {
    pub n: u64,
    pub damping: Damping,
    pub delta: f64,
    pub epsilon: f64,
    pub n_n: usize,
    pub theta: f64,
    pub gamma_tol: f64,
    pub distance: u64,
}

impl ProtocolParams {
    pub fn completeness_params(&self) -> Result<CompletenessParams> {
        Ok(CompletenessParams {
            n: self.n as u64,
            damping: self.damping,
            delta: self.pos_bins.width,
            epsilon: self.mom_bins.width,
            n_n: self.mom_bins.n_bits,
            theta: self.theta,
            gamma_tol: self.gamma_tol,
            distance: distance_of(self)? as u64,
        })
    }
}

fn completeness(
    p: &CompletenessParams,
    noise: AgwnParams,
    square_second: bool,
) -> Result<Completeness> {
    let d = p.distance as f64;
    let n = p.n as f64;
    let n_n = p.n_n as f64;
    let floor = expected_mismatch_position(p.damping, p.delta, noise.x)?;
    let gamma_gap = p.gamma_tol - floor;
    ensure!(
        gamma_gap > 0.0,
        Precondition,
        "gamma = {} does not exceed the position mismatch bound {floor}",
        p.gamma_tol
    );
    let mom = expected_mismatch_momentum(p.damping, p.epsilon, noise.y)?;
    ensure!(
        d > n / 2.0 * mom,
        Precondition,
        "code distance {d} does not exceed (n/2)·{mom} = {}",
        n / 2.0 * mom
    );
    let gap = 2.0 * d / (n * n_n) - mom / n_n;
    let inner = if square_second { gap * gap } else { gap };
    let estimation_term = (-gamma_gap * gamma_gap).exp().powf(p.theta * n);
    let correction_term = (-inner).exp().powf(n);
    Ok(Completeness {
        estimation_term,
        correction_term,
        value: estimation_term + correction_term,
    })
}

/// Identity-channel completeness, with the second exponent unsquared as in
/// its theorem statement.
pub fn completeness_bound(params: &ProtocolParams) -> Result<Completeness> {
    completeness(
        &params.completeness_params()?,
        AgwnParams::identity(),
        false,
    )
}

/// Completeness under Gaussian noise `(x, y)`; this form squares the second exponent.
pub fn completeness_bound_agwn(params: &ProtocolParams, noise: AgwnParams) -> Result<Completeness> {
    completeness(&params.completeness_params()?, noise, true)
}

pub fn completeness_bound_for(p: &CompletenessParams) -> Result<Completeness> {
    completeness(p, AgwnParams::identity(), false)
}

pub fn completeness_bound_agwn_for(
    p: &CompletenessParams,
    noise: AgwnParams,
) -> Result<Completeness> {
    completeness(p, noise, true)
}

/// `lg(1 - e^{-2aM²δ²}/sqrt(2πaM²δ²))` and
/// `lg(1 - sqrt((a+b)/(π³N²ε²)) e^{-2π²N²ε²/(a+b)})`, the cost of truncating
/// the sampled quadratures to the bin range.
pub fn truncation_terms(damping: Damping, pos: &BinConfig, mom: &BinConfig) -> Result<(f64, f64)> {
    let (a, b) = (damping.a(), damping.b());
    let qc2 = pos.cutoff() * pos.cutoff();
    let pc2 = mom.cutoff() * mom.cutoff();
    let tq = (-2.0 * a * qc2).exp() / (2.0 * PI * a * qc2).sqrt();
    let tp = ((a + b) / (PI.powi(3) * pc2)).sqrt() * (-2.0 * PI * PI * pc2 / (a + b)).exp();
    ensure!(
        tq < 1.0 && tp < 1.0,
        Domain,
        "bin range too narrow: truncation terms {tq:e}, {tp:e} reach 1"
    );
    Ok(((-tq).ln_1p() / LN_2, (-tp).ln_1p() / LN_2))
}

/// The secrecy parameter, split into its two summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Secrecy {
    /// `log2` of the first summand.
    pub log2_first: f64,
    pub first: f64,
    pub second: f64,
    pub epsilon: f64,
}

/// The inputs of the secrecy parameter. Only the syndrome length of the
/// code enters, so asymptotically large `n` can be evaluated without a code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecrecyParams {
    pub n: u64,
    pub damping: Damping,
    pub pos_bins: BinConfig,
    pub mom_bins: BinConfig,
    pub theta: f64,
    pub gamma_tol: f64,
    pub eta: f64,
    pub key_len: u64,
    pub syndrome_len: u64,
    pub tau: f64,
}

impl ProtocolParams {
    pub fn secrecy_params(&self) -> SecrecyParams {
        SecrecyParams {
            n: self.n as u64,
            damping: self.damping,
            pos_bins: self.pos_bins,
            mom_bins: self.mom_bins,
            theta: self.theta,
            gamma_tol: self.gamma_tol,
            eta: self.eta,
            key_len: self.key_len as u64,
            syndrome_len: self.code.s() as u64,
            tau: self.tau,
        }
    }
}

/// `2^{(n/4)[...]} + 4e^{-τ²θn}`.
pub fn secrecy_epsilon(p: &SecrecyParams) -> Result<Secrecy> {
    ensure!(
        p.n >= 2 && p.n % 2 == 0,
        Validation,
        "n must be even and positive"
    );
    ensure!(p.tau > 0.0, Domain, "tau must be positive");
    ensure!(p.gamma_tol >= 0.0, Domain, "gamma must be nonnegative");
    let gt = p.gamma_tol + p.tau;
    ensure!(gt <= 1.0, Domain, "gamma + tau = {gt} exceeds 1");
    let n = p.n as f64;
    let (tq, tp) = truncation_terms(p.damping, &p.pos_bins, &p.mom_bins)?;
    let de = (p.pos_bins.width * p.mom_bins.width).sqrt();
    let bracket = (1.0 - gt) * (0.5 + de).log2()
        + binary_entropy(gt)?
        + p.theta * p.pos_bins.n_bits as f64
        + 2.0 * p.syndrome_len as f64 / n
        + p.eta * p.mom_bins.n_bits as f64
        - tq
        - tp
        + 2.0 * (p.key_len as f64 - 2.0) / n
        + 1.0 / (LN_2 * n);
    let log2_first = n / 4.0 * bracket;
    let first = log2_first.exp2();
    let second = 4.0 * (-p.tau * p.tau * p.theta * n).exp();
    Ok(Secrecy {
        log2_first,
        first,
        second,
        epsilon: first + second,
    })
}

/// Wilson score interval for `k` successes in `t` trials.
pub fn wilson_interval(k: u64, t: u64, z: f64) -> (f64, f64) {
    let (k, t) = (k as f64, t as f64);
    let p = k / t;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * t)) / (1.0 + z2 / t);
    let half = z / (1.0 + z2 / t) * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub trials: u64,
    pub aborts: u64,
    /// Sessions that accepted with `K ≠ K̂`.
    pub key_mismatches: u64,
    pub abort_rate: f64,
    pub abort_ci: (f64, f64),
    pub key_mismatch_rate: f64,
    pub key_mismatch_ci: (f64, f64),
    pub mean_pe_mismatches: f64,
    pub mean_corrected_bits: f64,
    pub mean_resamples: f64,
}

impl MonteCarloSummary {
    pub const CSV_HEADER: &'static str = "trials,aborts,key_mismatches,abort_rate,abort_lo,abort_hi,\
key_mismatch_rate,key_mismatch_lo,key_mismatch_hi,mean_pe_mismatches,mean_corrected_bits,mean_resamples";

    /// Standard error of a rate estimated from these trials.
    pub fn std_error(&self, rate: f64) -> f64 {
        (rate * (1.0 - rate) / self.trials as f64).sqrt()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.trials,
            self.aborts,
            self.key_mismatches,
            self.abort_rate,
            self.abort_ci.0,
            self.abort_ci.1,
            self.key_mismatch_rate,
            self.key_mismatch_ci.0,
            self.key_mismatch_ci.1,
            self.mean_pe_mismatches,
            self.mean_corrected_bits,
            self.mean_resamples
        )
    }
}

/// Seed of trial `i` in a Monte Carlo batch.
pub fn trial_seed(seed: u64, i: u64) -> u64 {
    seed::derive(seed, STREAM_TRIAL, i)
}

pub fn monte_carlo(
    protocol: &Protocol,
    channel: &ChannelModel,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloSummary> {
    ensure!(trials >= 1, Domain, "need at least one trial");
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            protocol
                .run(channel, trial_seed(seed, i))
                .map(|r| (r.accepted, r.key_mismatch(), r.diagnostics))
        })
        .collect::<Result<Vec<_>>>()?;
    let aborts = results.iter().filter(|r| !r.0).count() as u64;
    let key_mismatches = results.iter().filter(|r| r.1).count() as u64;
    let t = trials as f64;
    let mean = |f: &dyn Fn(&Diagnostics) -> f64| results.iter().map(|r| f(&r.2)).sum::<f64>() / t;
    Ok(MonteCarloSummary {
        trials,
        aborts,
        key_mismatches,
        abort_rate: aborts as f64 / t,
        abort_ci: wilson_interval(aborts, trials, Z99),
        key_mismatch_rate: key_mismatches as f64 / t,
        key_mismatch_ci: wilson_interval(key_mismatches, trials, Z99),
        mean_pe_mismatches: mean(&|d| d.pe_mismatches as f64),
        mean_corrected_bits: mean(&|d| d.corrected_bits as f64),
        mean_resamples: mean(&|d| d.resamples as f64),
    })
}
