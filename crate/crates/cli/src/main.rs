//! `monoqkd` command-line front end.
//!
//! Every command reads an optional `key = value` config file and applies
//! `--set key=value` overrides on top; flags win. Randomized commands take a
//! mandatory `--seed`. Output is CSV on stdout unless `--out` is given.
//!
//! Exit codes: 0 success, 2 invalid input, 3 theorem precondition violated,
//! 4 resource limit or I/O failure.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use monoqkd::analysis::{
    completeness_constrained_rate, emit, emit_to_path, fmt_num, noise_thresholds, tolerance_curve,
    AsymptoticParams, Dataset, Format, ASYMPTOTIC_KEYS,
};
use monoqkd::bounds::{
    bound_complex, bound_gkp_sweep, bound_rn, bound_rn_mode_failure, bound_u1, Bound, BoundReport,
    GameSpecGkp, GameSpecRn, GameSpecSo3, GameSpecU1,
};
use monoqkd::coding::{bits_from_str, bits_to_string, universality_check, CodeSpec, LinearCode};
use monoqkd::config::Config;
use monoqkd::cv_gaussian::AgwnParams;
use monoqkd::finite_coset::{
    all_subgroups, construct_group, finite_bound, overlap_check, register_subspace,
    seesaw_lower_bound, CosetBasis, CosetGame, GroupSpec, GroupTable, SeesawOptions, Subgroup,
};
use monoqkd::qkd::{
    completeness_bound_agwn_for, completeness_bound_for, correctness_bound, monte_carlo,
    secrecy_epsilon, transcript_from_jsonl, transcript_to_jsonl, trial_seed, ChannelModel,
    MonteCarloSummary, Protocol, ProtocolParams, PARAM_KEYS,
};
use monoqkd::{Error, Result};

#[derive(Parser)]
#[command(
    name = "monoqkd",
    version,
    about = "Monogamy-game bounds and CV QKD simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form game bound: u1, complex, rn, gkp or so3.
    ///
    /// Keys: u1 {primes, epsilon}; complex {n, delta, epsilon};
    /// rn {n, delta, epsilon, [gamma]}; gkp {alphas, epsilon, m, a} where
    /// `m` may be a comma list that is swept; so3 {n, epsilon}.
    /// Lists are comma- or space-separated. Output: game,params,bound,flags.
    Bounds {
        game: String,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Finite coset games over explicit groups.
    #[command(subcommand)]
    Game(GameCmd),
    /// Protocol simulation and key-rate analysis.
    #[command(subcommand)]
    Qkd(QkdCmd),
    /// Linear codes and the Toeplitz hash family.
    #[command(subcommand)]
    Codes(CodesCmd),
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Parameter file with `key = value` lines.
    #[arg(long, visible_alias = "params", value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        for s in &self.set {
            cfg.set_pair(s)?;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct GameArgs {
    /// Group spec, e.g. `dihedral:15`, `z2^4`, `product:cyclic:2*cyclic:4`.
    #[arg(long)]
    group: String,
    /// A subgroup: space-separated generators (element labels or indices),
    /// or `reg:i,j,..` for a register subspace of `z2^n`. Repeatable; all
    /// subgroups when omitted.
    #[arg(long = "subgroup", value_name = "GENS")]
    subgroups: Vec<String>,
}

#[derive(Subcommand)]
enum GameCmd {
    /// List the group's subgroups: index,order,abelian,elements.
    Build(GameArgs),
    /// Check the overlap lemma and basis orthonormality for every subgroup pair.
    Check(GameArgs),
    /// Evaluate the finite-group game bound: instance,bound,raw.
    Bound(GameArgs),
    /// Run the see-saw lower bound: instance,bound,seesaw,gap.
    Seesaw {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        iterations: usize,
        /// Ancilla dimension for Bob and Charlie (default |G|).
        #[arg(long)]
        ancilla: Option<usize>,
    },
}

#[derive(Subcommand)]
enum QkdCmd {
    /// Monte Carlo over sessions; prints one CSV summary row.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// `identity` or `agwn:x=..,y=..`.
        #[arg(long, default_value = "identity")]
        channel: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Also write the transcript of trial 0 as JSON lines.
        #[arg(long, value_name = "FILE")]
        transcript: Option<PathBuf>,
    },
    /// Validate a transcript; with `--params` and `--seed`, re-run the
    /// session and require a byte-identical transcript.
    Replay {
        file: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "identity")]
        channel: String,
        /// Seed that was given to `simulate`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Asymptotic tolerance curve (rate,gamma) plus a summary on stderr.
    Keyrate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Position noise of an AGWN channel for the constrained rate.
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        /// Momentum noise of an AGWN channel for the constrained rate.
        #[arg(long, default_value_t = 0.0)]
        y: f64,
    },
    /// Finite-n secrecy, correctness and completeness next to the asymptotic rate.
    Secrecy {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "identity")]
        channel: String,
    },
}

#[derive(Subcommand)]
enum CodesCmd {
    /// Build a code (`hamming`, `repetition:N`, `random:N,K`) as a hex file.
    Make {
        #[arg(long)]
        code: String,
        #[arg(long)]
        seed: u64,
        /// Repeat the block this many times as a direct sum.
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print n,k,s,blocks,distance of a code file.
    Distance { file: PathBuf },
    /// Decode a word against a target syndrome (bit strings of 0/1).
    Decode {
        file: PathBuf,
        #[arg(long)]
        word: String,
        /// Target syndrome; all zeros when omitted.
        #[arg(long)]
        syndrome: Option<String>,
    },
    /// Exhaustive collision probability of the Toeplitz family.
    Hashcheck {
        #[arg(long = "in-len")]
        in_len: usize,
        #[arg(long = "out-len")]
        out_len: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    match run(cli.command, &mut out) {
        Ok(()) => {
            let mut stdout = io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Precondition(_) => 3,
        Error::Resource(_) | Error::Io(_) => 4,
        Error::Domain(_)
        | Error::Validation(_)
        | Error::Parse(_)
        | Error::Unsupported(_)
        | Error::Json(_) => 2,
    }
}

fn run(cmd: Command, out: &mut String) -> Result<()> {
    match cmd {
        Command::Bounds { game, cfg } => bounds(&game, &cfg.load()?, out),
        Command::Game(g) => game(g, out),
        Command::Qkd(q) => qkd(q, out),
        Command::Codes(c) => codes(c, out),
    }
}

fn parse_list<T: std::str::FromStr>(cfg: &Config, key: &str) -> Result<Vec<T>> {
    let raw = cfg
        .raw(key)
        .ok_or_else(|| Error::Validation(format!("missing required key '{key}'")))?;
    raw.split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Validation(format!("'{key}' has invalid entry '{t}'")))
        })
        .collect()
}

fn bounds(game: &str, cfg: &Config, out: &mut String) -> Result<()> {
    let mut rows = Vec::new();
    match game {
        "u1" => {
            cfg.check_known(&["primes", "epsilon"])?;
            let spec = GameSpecU1::new(parse_list(cfg, "primes")?, cfg.require("epsilon")?)?;
            rows.push(BoundReport::new("u1", spec.to_string(), bound_u1(&spec)));
        }
        "complex" => {
            cfg.check_known(&["n", "delta", "epsilon"])?;
            let (n, d, e) = (
                cfg.require("n")?,
                cfg.require("delta")?,
                cfg.require("epsilon")?,
            );
            let params = format!("n={n};delta={d};epsilon={e}");
            rows.push(BoundReport::new("complex", params, bound_complex(n, d, e)?));
        }
        "rn" => {
            cfg.check_known(&["n", "delta", "epsilon", "gamma"])?;
            let spec = GameSpecRn::new(
                cfg.require("n")?,
                cfg.require("delta")?,
                cfg.require("epsilon")?,
                cfg.get("gamma")?,
            )?;
            if spec.gamma.is_some() {
                rows.push(BoundReport::new(
                    "rn-mode-failure",
                    spec.to_string(),
                    bound_rn_mode_failure(&spec)?,
                ));
            } else {
                let b = bound_rn(&spec)?;
                rows.push(BoundReport::new(
                    "rn",
                    spec.to_string(),
                    Bound::new(b.closed_form),
                ));
                rows.push(BoundReport::new(
                    "rn-sum",
                    spec.to_string(),
                    Bound::new(b.exact_sum),
                ));
            }
        }
        "gkp" => {
            cfg.check_known(&["alphas", "epsilon", "m", "a"])?;
            let alphas: Vec<u64> = parse_list(cfg, "alphas")?;
            let cutoffs: Vec<f64> = parse_list(cfg, "m")?;
            let (eps, a) = (cfg.require("epsilon")?, cfg.require("a")?);
            let (m, b) = bound_gkp_sweep(alphas.clone(), eps, &cutoffs, a)?;
            let spec = GameSpecGkp::new(alphas, eps, m, a)?;
            let mut rep = BoundReport::new("gkp", spec.to_string(), b);
            if cutoffs.len() > 1 {
                rep.flags.push(format!("swept-{}", cutoffs.len()));
            }
            rows.push(rep);
        }
        "so3" => {
            cfg.check_known(&["n", "epsilon"])?;
            let spec = GameSpecSo3::new(cfg.require("n")?, cfg.require("epsilon")?)?;
            let params = format!("n={};epsilon={}", spec.n, spec.epsilon);
            rows.push(BoundReport::new("so3", params, spec.bound()));
        }
        other => {
            return Err(Error::Validation(format!(
                "unknown game '{other}' (expected u1, complex, rn, gkp or so3)"
            )))
        }
    }
    writeln!(out, "{}", BoundReport::CSV_HEADER).unwrap();
    for r in rows {
        writeln!(out, "{}", r.csv_row()).unwrap();
    }
    Ok(())
}

fn element(g: &GroupTable, tok: &str) -> Result<usize> {
    if let Some(i) = g.labels().iter().position(|l| l == tok) {
        return Ok(i);
    }
    match tok.parse::<usize>() {
        Ok(i) if i < g.order() => Ok(i),
        _ => Err(Error::Validation(format!(
            "no element '{tok}' in a group of order {}",
            g.order()
        ))),
    }
}

fn subgroup(g: &GroupTable, spec: &GroupSpec, text: &str) -> Result<Subgroup> {
    if let Some(coords) = text.strip_prefix("reg:") {
        let n = match spec {
            GroupSpec::Product(parts) if parts.iter().all(|p| *p == GroupSpec::Cyclic(2)) => {
                parts.len()
            }
            _ => {
                return Err(Error::Validation(format!(
                    "'reg:' needs a z2^n group, got {spec}"
                )))
            }
        };
        let coords = coords
            .split(',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Error::Validation(format!("bad coordinate '{t}'")))
            })
            .collect::<Result<Vec<usize>>>()?;
        return register_subspace(g, n, &coords);
    }
    let gens = text
        .split_whitespace()
        .map(|t| element(g, t))
        .collect::<Result<Vec<_>>>()?;
    Subgroup::generate(g, &gens)
}

fn resolve(args: &GameArgs) -> Result<(GroupTable, Vec<Subgroup>)> {
    let spec: GroupSpec = args.group.parse()?;
    let g = construct_group(&spec)?;
    let subs = if args.subgroups.is_empty() {
        all_subgroups(&g)?
    } else {
        args.subgroups
            .iter()
            .map(|s| subgroup(&g, &spec, s))
            .collect::<Result<Vec<_>>>()?
    };
    Ok((g, subs))
}

fn instance_name(g: &GroupTable, subs: &[Subgroup]) -> String {
    let parts: Vec<String> = subs.iter().map(|h| h.describe(g)).collect();
    parts.join(" ")
}

fn game(cmd: GameCmd, out: &mut String) -> Result<()> {
    match cmd {
        GameCmd::Build(args) => {
            let (g, subs) = resolve(&args)?;
            g.verify()?;
            writeln!(out, "index,order,abelian,elements").unwrap();
            for (i, h) in subs.iter().enumerate() {
                writeln!(
                    out,
                    "{i},{},{},\"{}\"",
                    h.order(),
                    h.is_abelian(&g),
                    h.describe(&g)
                )
                .unwrap();
            }
        }
        GameCmd::Check(args) => {
            let (g, subs) = resolve(&args)?;
            writeln!(
                out,
                "subgroup,order,gram_deviation,checks,violations,max_norm,min_slack"
            )
            .unwrap();
            let mut violations = 0;
            for h in &subs {
                let basis = CosetBasis::new(&g, h)?;
                let (mut checks, mut bad, mut max_norm, mut slack) =
                    (0usize, 0usize, 0.0f64, f64::INFINITY);
                for k in &subs {
                    for q in k.coset_representatives(&g) {
                        for l in 0..basis.labels().len() {
                            let r = overlap_check(&g, h, &basis, k, l, q)?;
                            checks += 1;
                            bad += usize::from(!r.holds());
                            max_norm = max_norm.max(r.norm);
                            slack = slack.min(r.bound - r.norm);
                        }
                    }
                }
                violations += bad;
                writeln!(
                    out,
                    "\"{}\",{},{},{checks},{bad},{},{}",
                    h.describe(&g),
                    h.order(),
                    fmt_num(basis.gram_deviation()),
                    fmt_num(max_norm),
                    fmt_num(slack)
                )
                .unwrap();
            }
            if violations > 0 {
                return Err(Error::Validation(format!(
                    "{violations} overlap checks exceeded their bound"
                )));
            }
        }
        GameCmd::Bound(args) => {
            let (g, subs) = resolve(&args)?;
            let b = finite_bound(&g, &subs)?;
            writeln!(out, "instance,bound,raw").unwrap();
            writeln!(
                out,
                "\"{}\",{},{}",
                instance_name(&g, &subs),
                fmt_num(b.value),
                fmt_num(b.raw)
            )
            .unwrap();
        }
        GameCmd::Seesaw {
            game,
            seed,
            iterations,
            ancilla,
        } => {
            let (g, subs) = resolve(&game)?;
            let name = instance_name(&g, &subs);
            let bound = finite_bound(&g, &subs)?.value;
            let game = CosetGame::new(g, subs)?;
            let opts = SeesawOptions {
                dim_b: ancilla,
                dim_c: ancilla,
                iterations,
            };
            let r = seesaw_lower_bound(&game, seed, &opts)?;
            writeln!(out, "instance,bound,seesaw,gap").unwrap();
            writeln!(
                out,
                "\"{name}\",{},{},{}",
                fmt_num(bound),
                fmt_num(r.value),
                fmt_num(bound - r.value)
            )
            .unwrap();
        }
    }
    Ok(())
}

fn protocol_params(cfg: &ConfigArgs) -> Result<ProtocolParams> {
    let cfg = cfg.load()?;
    cfg.check_known(PARAM_KEYS)?;
    ProtocolParams::from_config(&cfg)
}

fn qkd(cmd: QkdCmd, out: &mut String) -> Result<()> {
    match cmd {
        QkdCmd::Simulate {
            cfg,
            channel,
            trials,
            seed,
            transcript,
        } => {
            let channel: ChannelModel = channel.parse()?;
            let proto = Protocol::new(protocol_params(&cfg)?)?;
            let summary = monte_carlo(&proto, &channel, trials, seed)?;
            if let Some(path) = transcript {
                let first = proto.run(&channel, trial_seed(seed, 0))?;
                fs::write(path, first.transcript_jsonl())?;
            }
            writeln!(out, "{}", MonteCarloSummary::CSV_HEADER).unwrap();
            writeln!(out, "{}", summary.csv_row()).unwrap();
        }
        QkdCmd::Replay {
            file,
            cfg,
            channel,
            seed,
        } => {
            let text = fs::read_to_string(&file)?;
            let msgs = transcript_from_jsonl(&text)?;
            if let Some(seed) = seed {
                let channel: ChannelModel = channel.parse()?;
                let proto = Protocol::new(protocol_params(&cfg)?)?;
                let rerun = proto.run(&channel, trial_seed(seed, 0))?;
                if rerun.transcript_jsonl() != transcript_to_jsonl(&msgs) {
                    return Err(Error::Validation(format!(
                        "{} does not match the session re-run with seed {seed}",
                        file.display()
                    )));
                }
            } else if cfg.config.is_some() || !cfg.set.is_empty() {
                return Err(Error::Validation(
                    "re-running a session needs --seed".into(),
                ));
            }
            writeln!(out, "index,stage,sender,bytes").unwrap();
            for (i, m) in msgs.iter().enumerate() {
                let stage = serde_name(&m.stage())?;
                let sender = serde_name(&m.sender())?;
                writeln!(out, "{i},{stage},{sender},{}", m.encode().len()).unwrap();
            }
            let accepted = msgs.len() == 5;
            eprintln!(
                "{} messages, outcome: {}",
                msgs.len(),
                if accepted { "accepted" } else { "aborted" }
            );
        }
        QkdCmd::Keyrate {
            cfg,
            grid,
            format,
            out: path,
            x,
            y,
        } => {
            let cfg = cfg.load()?;
            cfg.check_known(ASYMPTOTIC_KEYS)?;
            let p = AsymptoticParams::from_config(&cfg)?;
            let format: Format = format.parse()?;
            let curve = tolerance_curve(&p, grid)?;
            let constrained = completeness_constrained_rate(&p, AgwnParams::new(x, y)?)?;
            let (xs, ys) = noise_thresholds(&p)?;
            eprintln!(
                "gamma_max={} r_max={} constrained_rate={} feasible={} binding={} x_threshold={} y_threshold={}",
                fmt_num(curve.gamma_max),
                fmt_num(curve.r_max),
                fmt_num(constrained.rate),
                constrained.feasible,
                constrained.binding,
                fmt_num(xs),
                fmt_num(ys)
            );
            write_dataset(&curve.dataset(), format, path.as_deref(), out)?;
        }
        QkdCmd::Secrecy { cfg, channel } => {
            let params = protocol_params(&cfg)?;
            let channel: ChannelModel = channel.parse()?;
            let sec = secrecy_epsilon(&params.secrecy_params())?;
            let cp = params.completeness_params()?;
            let comp = match channel {
                ChannelModel::Identity => completeness_bound_for(&cp),
                ChannelModel::Agwn(noise) => completeness_bound_agwn_for(&cp, noise),
                ChannelModel::PerMode(_) => Err(Error::Validation(
                    "completeness needs an identity or uniform AGWN channel".into(),
                )),
            };
            let comp = comp
                .map(|c| fmt_num(c.value))
                .unwrap_or_else(|e| format!("n/a ({e})"));
            // The asymptotic relation assumes a = Δ²/2 and b = 1/(2Δ²).
            let (a, b) = (params.damping.a(), params.damping.b());
            let asym = (if (4.0 * a * b - 1.0).abs() < 1e-9 {
                Ok((2.0 * a).sqrt())
            } else {
                Err(Error::Validation("damping is not of squeezed form".into()))
            })
            .and_then(|squeeze| {
                AsymptoticParams::new(
                    squeeze,
                    params.pos_bins.width,
                    params.mom_bins.width,
                    params.pos_bins.n_bits,
                    params.mom_bins.n_bits,
                )
            })
            .and_then(|p| tolerance_curve(&p, 2))
            .map(|c| fmt_num(c.r_max))
            .unwrap_or_else(|e| format!("n/a ({e})"));
            let rate = params.key_len as f64 / params.n as f64;
            writeln!(
                out,
                "n,key_rate,log2_first,secrecy_first,secrecy_second,secrecy,correctness,completeness,asymptotic_r_max"
            )
            .unwrap();
            writeln!(
                out,
                "{},{},{},{},{},{},{},\"{comp}\",\"{asym}\"",
                params.n,
                fmt_num(rate),
                fmt_num(sec.log2_first),
                fmt_num(sec.first),
                fmt_num(sec.second),
                fmt_num(sec.epsilon),
                fmt_num(correctness_bound(&params)?)
            )
            .unwrap();
        }
    }
    Ok(())
}

fn serde_name<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string(v)?.trim_matches('"').to_string())
}

fn write_dataset(
    data: &Dataset,
    format: Format,
    path: Option<&Path>,
    out: &mut String,
) -> Result<()> {
    match path {
        Some(p) => emit_to_path(data, format, p),
        None => {
            let mut buf = Vec::new();
            emit(data, format, &mut buf)?;
            out.push_str(&String::from_utf8_lossy(&buf));
            Ok(())
        }
    }
}

fn read_code(path: &Path) -> Result<LinearCode> {
    LinearCode::from_hex_file(&fs::read_to_string(path)?)
}

fn codes(cmd: CodesCmd, out: &mut String) -> Result<()> {
    match cmd {
        CodesCmd::Make {
            code,
            seed,
            blocks,
            out: path,
        } => {
            let spec: CodeSpec = code.parse()?;
            let mut c = LinearCode::make(spec, seed)?;
            if blocks > 1 {
                c = c.direct_sum(blocks)?;
            }
            match path {
                Some(p) => fs::write(p, c.to_hex_file())?,
                None => out.push_str(&c.to_hex_file()),
            }
        }
        CodesCmd::Distance { file } => {
            let c = read_code(&file)?;
            let d = c.distance().map_or("?".to_string(), |d| d.to_string());
            writeln!(out, "n,k,s,blocks,distance").unwrap();
            writeln!(out, "{},{},{},{},{d}", c.n(), c.k(), c.s(), c.blocks()).unwrap();
        }
        CodesCmd::Decode {
            file,
            word,
            syndrome,
        } => {
            let c = read_code(&file)?;
            let word = bits_from_str(&word)?;
            let target = match syndrome {
                Some(s) => bits_from_str(&s)?,
                None => vec![false; c.s()],
            };
            let decoded = c.decoder()?.decode_with_syndrome(&word, &target)?;
            let flips = word.iter().zip(&decoded).filter(|(a, b)| a != b).count();
            writeln!(out, "decoded,flips").unwrap();
            writeln!(out, "{},{flips}", bits_to_string(&decoded)).unwrap();
        }
        CodesCmd::Hashcheck { in_len, out_len } => {
            let p = universality_check(in_len, out_len)?;
            let ideal = 0.5f64.powi(out_len as i32);
            writeln!(out, "in_len,out_len,max_collision,ideal,universal").unwrap();
            writeln!(
                out,
                "{in_len},{out_len},{},{},{}",
                fmt_num(p),
                fmt_num(ideal),
                p <= ideal
            )
            .unwrap();
        }
    }
    Ok(())
}
