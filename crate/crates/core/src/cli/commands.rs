use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use super::manifest::CSV_MANIFEST_PREFIX;
use super::*;
use crate::epr::{
    count_slicings, fluctuation_likelihood, prediction_attempt, read_records, run_experiment, slice, write_records,
    ChoicePolicy, EprError, ExperimentConfig, PairRecord, PredictionReport, RecordHeader, SearchMode, SliceSpec,
    SliceSummary, Slicing, SlicingCount,
};
use crate::fisher::{self, FisherError, Method, ScaleParam};
use crate::loops::{self, Agent, BitMachine, FluctuationModel, LoopError, LoopSystem, PolicyPreset, StochasticMachine};
use crate::prophecy::{self, Eavesdropper, GuessStrategy, ProphecyError};
use crate::quantum::{Outcome, PointerModel, Side};
use crate::rng::RandomStream;

const PREDICT_STREAM: u64 = 0x9E7D;
const BB84_STREAM: u64 = 0xBB84;
const PROPHECY_STREAM: u64 = 0x7A0F;
const TRIALS_STREAM: u64 = 0x7A1A;
const FISHER_STREAM: u64 = 0xF15E;

enum Body {
    Json(Value),
    Records(RecordHeader, Vec<PairRecord>),
    Csv(Vec<&'static str>, Vec<Vec<String>>),
}

struct Artifact {
    name: &'static str,
    body: Body,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime(msg: impl ToString) -> CliError {
    CliError::Runtime(msg.to_string())
}

impl From<EprError> for CliError {
    fn from(e: EprError) -> Self {
        match e {
            EprError::Io(_) | EprError::Format(_) | EprError::Quantum(_) | EprError::EmptySample => runtime(e),
            _ => usage(e.to_string()),
        }
    }
}

impl From<FisherError> for CliError {
    fn from(e: FisherError) -> Self {
        match e {
            FisherError::NonFinite(_) | FisherError::Divergent { .. } => runtime(e),
            _ => usage(e.to_string()),
        }
    }
}

impl From<LoopError> for CliError {
    fn from(e: LoopError) -> Self {
        match e {
            LoopError::NoConsistentHistory => runtime(e),
            _ => usage(e.to_string()),
        }
    }
}

impl From<ProphecyError> for CliError {
    fn from(e: ProphecyError) -> Self {
        match e {
            ProphecyError::RetryExhausted(_) | ProphecyError::ShortKey { .. } => runtime(e),
            _ => usage(e.to_string()),
        }
    }
}

fn params<T: DeserializeOwned>(m: &RunManifest) -> Result<T, CliError> {
    serde_json::from_value(m.params.clone()).map_err(|e| usage(format!("bad parameters for {}: {e}", m.subcommand)))
}

fn value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(runtime)
}

pub(super) fn run_manifest(manifest: &RunManifest, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let artifacts = match manifest.subcommand.as_str() {
        "epr" => epr(&params(manifest)?, manifest)?,
        "slice" => slice_cmd(&params(manifest)?, manifest)?,
        "predict" => predict(&params(manifest)?, manifest)?,
        "loops" => loops_cmd(&params(manifest)?, manifest)?,
        "fisher" => fisher_cmd(&params(manifest)?, manifest)?,
        "bb84" => bb84(&params(manifest)?, manifest)?,
        "prophecy" => prophecy_cmd(&params(manifest)?, manifest)?,
        other => return Err(usage(format!("unknown subcommand {other:?}"))),
    };
    let mut manifest = manifest.clone();
    manifest.version = RunManifest::version_string();
    manifest.outputs = artifacts.iter().map(|a| a.name.to_string()).collect();
    fs::create_dir_all(out).map_err(|e| runtime(format!("{}: {e}", out.display())))?;
    let mut written = Vec::new();
    for a in artifacts {
        let path = out.join(a.name);
        let text = render(a.body, &manifest)?;
        fs::write(&path, text).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

fn render(body: Body, manifest: &RunManifest) -> Result<Vec<u8>, CliError> {
    match body {
        Body::Json(report) => {
            let mut s =
                serde_json::to_string_pretty(&json!({ "manifest": manifest, "report": report })).map_err(runtime)?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Body::Records(mut header, records) => {
            header.manifest = Some(value(manifest)?);
            let mut buf = Vec::new();
            write_records(&mut buf, &header, &records).map_err(runtime)?;
            Ok(buf)
        }
        Body::Csv(columns, rows) => {
            let mut s = format!(
                "{CSV_MANIFEST_PREFIX}{}\n",
                serde_json::to_string(manifest).map_err(runtime)?
            );
            s.push_str(&columns.join(","));
            s.push('\n');
            for row in rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            Ok(s.into_bytes())
        }
    }
}

fn side(s: SideArg) -> Side {
    match s {
        SideArg::A => Side::A,
        SideArg::B => Side::B,
    }
}

fn outcome(v: i8) -> Result<Outcome, CliError> {
    Outcome::from_value(v).ok_or_else(|| usage(format!("outcome must be 1 or -1, got {v}")))
}

fn opt(x: Option<impl ToString>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn json_only(m: &RunManifest) -> Result<(), CliError> {
    if m.format == Format::Csv {
        return Err(usage(format!("{} has no csv output", m.subcommand)));
    }
    Ok(())
}

/// A slice together with its undisturbed prediction and noise likelihood.
#[derive(Serialize)]
struct SliceRow {
    #[serde(flatten)]
    summary: SliceSummary,
    /// `−v·λ·(n_j·n_k)`, ignoring the disturbance of the other weak
    /// measurements; absent for co-conditioned slices.
    retrodicted_mean: Option<f64>,
    /// Likelihood ratio of pure pointer noise against the retrodicted signal.
    noise_likelihood: Option<f64>,
}

impl SliceRow {
    fn new(summary: SliceSummary, cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let n = |j: usize| cfg.orientations[j].axis;
        let (a, b) = (n(summary.orientation), n(summary.reading_orientation));
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let v = f64::from(summary.conditioned_on.1.value());
        let retrodicted_mean = summary
            .co_condition
            .is_none()
            .then(|| -v * cfg.pointer.coupling() * dot);
        let noise_likelihood = match summary.mean_reading {
            Some(m) => Some(fluctuation_likelihood(m, summary.count, &cfg.pointer)?),
            None => None,
        };
        Ok(Self {
            summary,
            retrodicted_mean,
            noise_likelihood,
        })
    }

    const COLUMNS: [&'static str; 10] = [
        "orientation",
        "reading_orientation",
        "side",
        "outcome",
        "co_condition",
        "count",
        "mean_reading",
        "sem",
        "retrodicted_mean",
        "noise_likelihood",
    ];

    fn csv(&self) -> Vec<String> {
        let s = &self.summary;
        vec![
            s.orientation.to_string(),
            s.reading_orientation.to_string(),
            format!("{:?}", s.conditioned_on.0),
            s.conditioned_on.1.value().to_string(),
            opt(s.co_condition.map(|(c, o)| format!("{c}:{}", o.value()))),
            s.count.to_string(),
            opt(s.mean_reading),
            opt(s.sem),
            opt(self.retrodicted_mean),
            opt(self.noise_likelihood),
        ]
    }
}

fn count_json(c: &SlicingCount) -> Value {
    json!({ "n": c.n, "exact": c.exact.to_string(), "stirling": c.stirling, "log2_stirling": c.log2_stirling, "ratio": c.ratio })
}

fn parse_pattern(s: &str) -> Result<Vec<(usize, usize)>, CliError> {
    s.split(',')
        .map(|item| {
            let (a, b) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| usage(format!("bad choice pair {item:?}")))?;
            let p = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| usage(format!("bad choice pair {item:?}")))
            };
            Ok((p(a)?, p(b)?))
        })
        .collect()
}

fn epr(args: &EprArgs, m: &RunManifest) -> Result<Vec<Artifact>, CliError> {
    let pairs = args.pairs;
    let pointer = PointerModel::new(args.coupling, args.noise).map_err(|e| usage(e.to_string()))?;
    let mut cfg = ExperimentConfig::new(pairs, pointer, m.seed);
    if let Some(p) = &args.pattern {
        cfg = cfg.with_policy(ChoicePolicy::FixedSequence {
            pattern: parse_pattern(p)?,
        });
    }
    cfg.validate()?;
    if m.format == Format::Csv && args.predict != PredictArg::None {
        return Err(usage("--predict needs json output"));
    }
    let records = run_experiment(&cfg)?;
    let conditioning = side(args.slice_side);
    let mut rows = Vec::new();
    for j in 0..3 {
        for v in [Outcome::Plus, Outcome::Minus] {
            let s = slice(&records, &SliceSpec::new(j, conditioning, v), &cfg.pointer);
            rows.push(SliceRow::new(s, &cfg)?);
        }
    }
    let mut out = vec![Artifact {
        name: "records.jsonl",
        body: Body::Records(RecordHeader::new(cfg.clone()), records.clone()),
    }];
    if m.format == Format::Csv {
        out.push(Artifact {
            name: "epr_slices.csv",
            body: Body::Csv(SliceRow::COLUMNS.to_vec(), rows.iter().map(SliceRow::csv).collect()),
        });
        return Ok(out);
    }
    let prediction = match args.predict {
        PredictArg::None => None,
        mode => {
            let search = if mode == PredictArg::Exhaustive {
                SearchMode::Exhaustive
            } else {
                SearchMode::Sampled { samples: args.samples }
            };
            Some(run_prediction(&records, conditioning, search, &cfg.pointer, m.seed)?)
        }
    };
    let count = count_slicings(pairs).ok();
    out.push(Artifact {
        name: "epr_report.json",
        body: Body::Json(json!({
            "config": value(&cfg)?,
            "slices": value(&rows)?,
            "slicing_count": count.as_ref().map(count_json),
            "prediction": value(&prediction)?,
        })),
    });
    Ok(out)
}

fn run_prediction(
    records: &[PairRecord],
    conditioning: Side,
    search: SearchMode,
    pointer: &PointerModel,
    seed: u64,
) -> Result<PredictionReport, CliError> {
    let truth = Slicing::from_outcomes(records, conditioning);
    let mut rng = RandomStream::new(seed).split(PREDICT_STREAM);
    Ok(prediction_attempt(records, &truth, search, pointer, &mut rng)?)
}

fn load(path: &Path) -> Result<(RecordHeader, Vec<PairRecord>), CliError> {
    let f = File::open(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    read_records(BufReader::new(f)).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn slice_cmd(args: &SliceArgs, m: &RunManifest) -> Result<Vec<Artifact>, CliError> {
    let (header, records) = load(&args.records)?;
    let cfg = header.config;
    let check = |j: usize| {
        if j > 2 {
            Err(usage(format!("orientation must be 0, 1 or 2, got {j}")))
        } else {
            Ok(j)
        }
    };
    let mut spec = SliceSpec::new(check(args.orientation)?, side(args.side), outcome(args.outcome)?);
    if let Some(k) = args.reading {
        spec = spec.reading(check(k)?);
    }
    if let Some(cc) = &args.co_condition {
        let (c, o) = cc
            .split_once(':')
            .ok_or_else(|| usage(format!("bad co-condition {cc:?}")))?;
        let c = c.parse().map_err(|_| usage(format!("bad co-condition {cc:?}")))?;
        let o = o.parse().map_err(|_| usage(format!("bad co-condition {cc:?}")))?;
        spec = spec.co_conditioned(check(c)?, outcome(o)?);
    }
    let row = SliceRow::new(slice(&records, &spec, &cfg.pointer), &cfg)?;
    let body = match m.format {
        Format::Csv => Body::Csv(SliceRow::COLUMNS.to_vec(), vec![row.csv()]),
        Format::Json => Body::Json(json!({ "records": args.records, "pairs": records.len(), "slice": value(&row)? })),
    };
    Ok(vec![Artifact {
        name: if m.format == Format::Csv {
            "slice.csv"
        } else {
            "slice.json"
        },
        body,
    }])
}

fn predict(args: &PredictArgs, m: &RunManifest) -> Result<Vec<Artifact>, CliError> {
    json_only(m)?;
    let (header, records) = load(&args.records)?;
    let search = match args.search {
        SearchArg::Exhaustive => SearchMode::Exhaustive,
        SearchArg::Sampled => SearchMode::Sampled { samples: args.samples },
    };
    let report = run_prediction(&records, side(args.side), search, &header.config.pointer, m.seed)?;
    let count = count_slicings(records.len()).ok();
    Ok(vec![Artifact {
        name: "predict.json",
        body: Body::Json(json!({
            "records": args.records,
            "slicing_count": count.as_ref().map(count_json),
            "prediction": value(&report)?,
        })),
    }])
}

fn loops_cmd(args: &LoopsArgs, m: &RunManifest) -> Result<Vec<Artifact>, CliError> {
    let a: BitMachine = args.a.parse()?;
    let b: BitMachine = args.b.parse()?;
    let det = LoopSystem::new(a, b);
    let noisy = LoopSystem::new(
        StochasticMachine::noisy(a, args.noise)?,
        StochasticMachine::noisy(b, args.noise)?,
    );
    let preset = match args.policy {
        PresetArg::Paradox => PolicyPreset::Paradox,
        PresetArg::Cooperative => PolicyPreset::Cooperative,
    };
    let reference = match args.reference {
        AgentArg::Alice => Agent::Alice,
        AgentArg::Bob => Agent::Bob,
    };
    let fm = FluctuationModel::new(args.epsilon)?.with_reference(reference);
    let (alice, bob) = preset.policies();
    let histories = loops::consistent_histories(alice, bob, &fm)?;
    if m.format == Format::Csv {
        let rows = histories
            .iter()
            .map(|h| {
                let e = &h.events;
                let bit = |x: bool| u8::from(x).to_string();
                let fl: Vec<String> = h
                    .fluctuations
                    .iter()
                    .map(|f| value(f).map(|v| v.as_str().unwrap_or_default().to_string()))
                    .collect::<Result<_, _>>()?;
                Ok(vec![
                    bit(e.alice_posts),
                    bit(e.bob_sees),
                    bit(e.bob_posts),
                    bit(e.alice_sees),
                    bit(e.alice_final_action),
                    fl.join(";"),
                    h.raw_weight.to_string(),
                    h.weight.to_string(),
                ])
            })
            .collect::<Result<_, CliError>>()?;
        let cols = vec![
            "alice_posts",
            "bob_sees",
            "bob_posts",
            "alice_sees",
            "alice_final_action",
            "fluctuations",
            "raw_weight",
            "weight",
        ];
        return Ok(vec![Artifact {
            name: "loops_histories.csv",
            body: Body::Csv(cols, rows),
        }]);
    }
    let fixed = loops::deterministic_fixed_points(&det)?;
    let swapped = loops::deterministic_fixed_points(&det.swapped())?;
    let stationary = loops::stationary_distribution(&noisy, args.initial)?;
    Ok(vec![Artifact {
        name: "loops.json",
        body: Body::Json(json!({
            "machine_a": a,
            "machine_b": b,
            "fixed_points": fixed,
            "swapped_fixed_points": swapped,
            "paradox": fixed.is_empty(),
            "flip_noise": args.noise,
            "stationary": value(&stationary)?,
            "policies": { "preset": args.policy, "alice": alice, "bob": bob },
            "fluctuation_model": value(&fm)?,
            "histories": value(&histories)?,
        })),
    }])
}

fn fisher_cmd(args: &FisherArgs, m: &RunManifest) -> Result<Vec<Artifact>, CliError> {
    let fam = fisher::family_by_name(&args.family)?;
    let rows = fisher::fisher_scaling(fam.as_ref(), args.theta, &args.deltas)?;
    let mc = match args.mc_samples {
        None => None,
        Some(n) => Some(
            args.deltas
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    let seed = RandomStream::new(m.seed).split(FISHER_STREAM).split(i as u64).key();
                    fisher::fisher_numeric(
                        fam.as_ref(),
                        args.theta,
                        ScaleParam::new(d)?,
                        Method::MonteCarlo { samples: n, seed },
                    )
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
    };
    if m.format == Format::Csv {
        let mut cols = vec!["delta", "fisher", "fisher_times_delta"];
        if mc.is_some() {
            cols.extend(["mc_fisher", "mc_stderr"]);
        }
        let table = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = vec![
                    r.delta.to_string(),
                    r.fisher.to_string(),
                    r.fisher_times_delta.to_string(),
                ];
                if let Some(mc) = &mc {
                    row.push(mc[i].value.to_string());
                    row.push(opt(mc[i].stderr));
                }
                row
            })
            .collect();
        return Ok(vec![Artifact {
            name: "fisher.csv",
            body: Body::Csv(cols, table),
        }]);
    }
    let constants = (fam.name() == "gaussian").then(|| {
        args.deltas
            .iter()
            .map(|&d| {
                let c = fisher::gaussian_constants(args.theta, d);
                json!({ "delta": d, "derived": c.derived, "quoted": c.quoted })
            })
            .collect::<Vec<_>>()
    });
    Ok(vec![Artifact {
        name: "fisher.json",
        body: Body::Json(json!({
            "family": fam.name(),
            "theta": args.theta,
            "rows": value(&rows)?,
            "monte_carlo": value(&mc)?,
            "gaussian_closed_forms": constants,
        })),
    }])
}

fn eavesdropper(eve: bool) -> Eavesdropper {
    if eve {
        Eavesdropper::InterceptResend
    } else {
        Eavesdropper::None
    }
}

fn bb84(args: &Bb84Args, m: &RunManifest) -> Result<Vec<Artifact>, CliError> {
    let mut rng = RandomStream::new(m.seed).split(BB84_STREAM);
    let eve = eavesdropper(args.eve);
    let key = prophecy::bb84_exchange(args.qubits, eve, args.sacrifice, &mut rng)?;
    let body = match m.format {
        Format::Csv => Body::Csv(
            vec![
                "qubits",
                "eavesdropper",
                "sifted",
                "sacrificed",
                "key_length",
                "qber_estimate",
            ],
            vec![vec![
                args.qubits.to_string(),
                value(&eve)?.as_str().unwrap_or_default().to_string(),
                key.sifted.to_string(),
                key.sacrificed.to_string(),
                key.bits.len().to_string(),
                key.qber_estimate.to_string(),
            ]],
        ),
        Format::Json => Body::Json(json!({
            "qubits": args.qubits,
            "eavesdropper": eve,
            "sifted": key.sifted,
            "sacrificed": key.sacrificed,
            "key_length": key.bits.len(),
            "qber_estimate": key.qber_estimate,
            "key": key.bits,
        })),
    };
    Ok(vec![Artifact {
        name: if m.format == Format::Csv {
            "bb84.csv"
        } else {
            "bb84.json"
        },
        body,
    }])
}

fn prophecy_cmd(args: &ProphecyArgs, m: &RunManifest) -> Result<Vec<Artifact>, CliError> {
    json_only(m)?;
    if args.trials < prophecy::MIN_TRANSCRIPTS {
        return Err(ProphecyError::TooFewTranscripts(args.trials).into());
    }
    let eve = eavesdropper(args.eve);
    let root = RandomStream::new(m.seed);
    let transcript =
        prophecy::run_prophecy_protocol_with(args.bits, args.qubits, eve, &mut root.split(PROPHECY_STREAM))?;
    let mut rng = root.split(TRIALS_STREAM);
    let trials = (0..args.trials)
        .map(|_| prophecy::run_prophecy_protocol_with(args.bits, args.qubits, eve, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let strategies = GuessStrategy::ALL
        .iter()
        .map(|s| Ok(json!({ "strategy": s, "advantage": prophecy::guess_advantage(&trials, |c| s.guess(c))? })))
        .collect::<Result<Vec<_>, ProphecyError>>()?;
    let mut report = value(&transcript)?;
    report["advantage_stats"] = json!({
        "trials": args.trials,
        "bits_per_trial": args.bits,
        "sigma": 0.5 / ((args.trials * args.bits) as f64).sqrt(),
        "ciphertext_only": strategies,
        "post_reveal": prophecy::post_reveal_advantage(&trials)?,
    });
    Ok(vec![Artifact {
        name: "prophecy.json",
        body: Body::Json(report),
    }])
}
