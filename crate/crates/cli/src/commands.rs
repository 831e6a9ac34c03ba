use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use akasim::crypto::{fingerprint, RootKey, ServingNetworkId, Sqn};
use akasim::engine::{
    sharing_boundary, Link, MobileIdentity, ProtocolTranscript, Role, SessionKeys,
};
use akasim::harness::{
    check_network, issue_vector, run_matrix_with, run_session, scenario, Execution, MatrixReport,
    RunRecord, ScenarioConfig, SessionConfig,
};
use akasim::subscriber::{Imsi, SqnPolicy, SubscriberRecord, SubscriberStore};
use akasim::vectors::AuthVector;
use akasim::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::{
    AttackArgs, Cli, Command, Format, InspectArgs, NetworkArgs, ProvisionArgs, RunArgs, VectorsArgs,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::MalformedInput(_)
            | Error::Domain(_)
            | Error::Configuration(_)
            | Error::Conflict(_)
            | Error::NotFound(_)
            | Error::UnsupportedScheme(_) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

fn io(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_RUNTIME,
        message: format!("{}: {e}", path.display()),
    }
}

type Outcome = Result<u8, Failure>;

pub fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Provision(a) => provision(cli, a),
        Command::Vectors(a) => vectors(cli, a),
        Command::Run(a) => run(cli, a),
        Command::Attack(a) => attack(cli, a),
        Command::Inspect(a) => inspect(cli, a),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io(path, e))
}

fn load_db(path: &Path) -> Result<SubscriberStore, Failure> {
    if !path.exists() {
        return Err(usage(format!(
            "no subscriber database at {}; run `akasim provision` first",
            path.display()
        )));
    }
    SubscriberStore::load(path).map_err(|e| Failure {
        code: EXIT_RUNTIME,
        message: format!("{}: {e}", path.display()),
    })
}

fn pick_imsi(store: &SubscriberStore, imsi: Option<&str>) -> Result<Imsi, Failure> {
    match imsi {
        Some(s) => {
            let imsi = Imsi::new(s)?;
            store.get(&imsi)?;
            Ok(imsi)
        }
        None => store
            .records()
            .next()
            .map(|r| r.imsi.clone())
            .ok_or_else(|| usage("the subscriber database is empty")),
    }
}

/// Parses whichever of --snid/--ani/--snn was given.
pub fn parse_network(n: &NetworkArgs) -> Result<Option<ServingNetworkId>, Error> {
    if let Some(s) = &n.snid {
        return Ok(Some(match s.split_once('-') {
            Some((mcc, mnc)) => ServingNetworkId::snid_from_plmn(mcc, mnc)?,
            None => {
                let b =
                    hex::decode(s).map_err(|e| Error::MalformedInput(format!("--snid: {e}")))?;
                ServingNetworkId::snid_from_slice(&b)?
            }
        }));
    }
    if let Some(s) = &n.ani {
        return Ok(Some(ServingNetworkId::ani(s.as_bytes())?));
    }
    if let Some(s) = &n.snn {
        return Ok(Some(ServingNetworkId::snn(s.as_bytes())?));
    }
    Ok(None)
}

fn hex_arg<const N: usize>(flag: &str, s: &str) -> Result<[u8; N], Failure> {
    let b = hex::decode(s).map_err(|e| usage(format!("--{flag}: {e}")))?;
    b.try_into()
        .map_err(|_| usage(format!("--{flag} must be {N} octets")))
}

fn provision(cli: &Cli, a: &ProvisionArgs) -> Outcome {
    let mut store = if cli.db.exists() {
        if a.window.is_some() || a.step.is_some() {
            return Err(usage(
                "--window/--step only apply when creating a new database",
            ));
        }
        load_db(&cli.db)?
    } else {
        let d = SqnPolicy::default();
        SubscriberStore::new(SqnPolicy::new(
            a.window.unwrap_or(d.window_size()),
            a.step.unwrap_or(d.step()),
        )?)
    };
    let imsi = Imsi::new(a.imsi.as_str())?;
    let root = match (&a.k, &a.opc) {
        (Some(k), Some(opc)) => RootKey::new(hex_arg("k", k)?, hex_arg("opc", opc)?),
        _ => {
            let mut rng = ChaCha20Rng::seed_from_u64(cli.seed);
            RootKey::new(rng.gen(), rng.gen())
        }
    };
    let mut rec = SubscriberRecord::new(imsi.clone(), root).with_amf(hex_arg("amf", &a.amf)?);
    if let Some(supi) = &a.supi {
        rec = rec.with_supi(supi.as_str());
    }
    if let Some(sqn) = a.sqn {
        rec = rec.with_sqn(Sqn::new(sqn)?);
    }
    if !a.generations.is_empty() {
        rec = rec.with_generations(a.generations.iter().copied());
    }
    store.provision(rec)?;
    store.save(&cli.db)?;
    let rec = store.get(&imsi)?;
    let gens: Vec<&str> = rec.generations.iter().map(|v| v.name()).collect();
    println!(
        "provisioned {} supi {} sqn {} generations {}",
        rec.imsi,
        rec.supi,
        rec.sqn_hn.value(),
        gens.join(",")
    );
    println!(
        "database {} ({} subscribers)",
        cli.db.display(),
        store.len()
    );
    Ok(EXIT_OK)
}

const KEY_FIELDS: [&str; 8] = ["kc", "ck", "ik", "kasme", "kausf", "kseaf", "msk", "emsk"];

/// Vector text with key fields fingerprinted unless `reveal`.
pub fn render_vector(av: &AuthVector, reveal: bool) -> String {
    let mut out = format!("[{}]\n", av.kind());
    for (name, value) in av.fields() {
        if reveal || !KEY_FIELDS.contains(&name) {
            let _ = writeln!(out, "{name} {value}");
        } else {
            let bytes = hex::decode(&value).unwrap_or_default();
            let _ = writeln!(out, "{name} fp:{}", fingerprint(&bytes));
        }
    }
    out
}

fn vectors(cli: &Cli, a: &VectorsArgs) -> Outcome {
    let net = parse_network(&a.network)?;
    check_network(a.variant, net.as_ref())?;
    let mut store = load_db(&cli.db)?;
    let imsi = pick_imsi(&store, a.imsi.as_deref())?;
    let mut out = String::new();
    for i in 0..a.count {
        for av in issue_vector(
            &mut store,
            &imsi,
            a.variant,
            net.as_ref(),
            cli.seed.wrapping_add(i as u64),
        )? {
            match cli.format {
                Format::Text => out.push_str(&render_vector(&av, cli.reveal_keys)),
                Format::Table => {
                    let text = render_vector(&av, cli.reveal_keys);
                    let cols: Vec<&str> = text
                        .lines()
                        .skip(1)
                        .map(|l| l.split_once(' ').map_or(l, |(_, v)| v))
                        .collect();
                    let _ = writeln!(out, "{} {}", av.kind(), cols.join(" "));
                }
            }
        }
    }
    store.save(&cli.db)?;
    print!("{out}");
    if let Some(path) = &a.out {
        write_file(path, &out)?;
    }
    Ok(EXIT_OK)
}

fn key_lines(role: Role, keys: Option<&SessionKeys>, reveal: bool, format: Format) -> Vec<String> {
    let Some(keys) = keys else {
        return vec![format!("{role} keys none")];
    };
    keys.describe(reveal)
        .into_iter()
        .map(|l| match format {
            Format::Text => format!("{role} key {l}"),
            Format::Table => format!("{role} {l}"),
        })
        .collect()
}

/// What `run` prints, and the agreement failures behind a non-zero exit.
pub fn render_run(r: &RunRecord, reveal: bool, format: Format) -> (String, Vec<String>) {
    let t = &r.transcript;
    let mut out = String::new();
    let mut problems = Vec::new();
    if format == Format::Text {
        let _ = writeln!(out, "variant {}", t.variant);
        let _ = writeln!(out, "status {}", t.status.name());
        let _ = writeln!(out, "messages {}", t.entries.len());
        for o in &t.outcomes {
            let checks: Vec<&str> = o.checks.iter().map(|c| c.name()).collect();
            let v = o.verdict.map_or("pending", |v| v.name());
            let _ = writeln!(
                out,
                "{} {} checks {}",
                o.role,
                v,
                if checks.is_empty() {
                    "-".into()
                } else {
                    checks.join(",")
                }
            );
        }
    }
    for (role, keys) in [
        (Role::Ue, &r.ue_keys),
        (Role::Serving, &r.serving_keys),
        (Role::Home, &r.home_keys),
    ] {
        for l in key_lines(role, keys.as_ref(), reveal, format) {
            out.push_str(&l);
            out.push('\n');
        }
    }
    for role in Role::ALL {
        match t.verdict(role) {
            Some(akasim::engine::Verdict::Success) => {}
            v => problems.push(format!(
                "{role}: expected success, got {}",
                v.map_or("pending", |v| v.name())
            )),
        }
    }
    for role in [Role::Serving, Role::Home] {
        let names = sharing_boundary(t.variant, role);
        let net = if role == Role::Serving {
            &r.serving_keys
        } else {
            &r.home_keys
        };
        let agreed = match (&r.ue_keys, net) {
            (Some(u), Some(n)) => u.agrees_with(n, names),
            _ => names.is_empty(),
        };
        if format == Format::Text && !names.is_empty() {
            let _ = writeln!(
                out,
                "agree ue={role} {} {}",
                names.join(","),
                if agreed { "equal" } else { "DIFFER" }
            );
        }
        if !agreed {
            problems.push(format!("ue and {role} disagree on {}", names.join(",")));
        }
    }
    (out, problems)
}

fn run(cli: &Cli, a: &RunArgs) -> Outcome {
    let net = parse_network(&a.network)?;
    check_network(a.variant, net.as_ref())?;
    let abba = hex::decode(&a.abba).map_err(|e| usage(format!("--abba: {e}")))?;
    let store = load_db(&cli.db)?;
    let imsi = pick_imsi(&store, a.imsi.as_deref())?;
    let mut cfg = SessionConfig::new(a.variant, cli.seed, net);
    cfg.abba = abba;
    let (record, store) = run_session(store, &imsi, &cfg)?;
    store.save(&cli.db)?;
    if let Some(path) = &a.out {
        write_file(path, &record.transcript.to_text())?;
    }
    let (text, problems) = render_run(&record, cli.reveal_keys, cli.format);
    print!("{text}");
    if problems.is_empty() {
        Ok(EXIT_OK)
    } else {
        for p in &problems {
            eprintln!("- {p}");
        }
        Ok(EXIT_VIOLATION)
    }
}

fn attack(cli: &Cli, a: &AttackArgs) -> Outcome {
    let seeds: Vec<u64> = (0..a.seeds).map(|i| cli.seed.wrapping_add(i)).collect();
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    if a.matrix {
        let report = run_matrix_with(&seeds, exec);
        let text = render_matrix(&report, cli.format);
        print!("{text}");
        if let Some(dir) = &a.out {
            write_evidence(dir, &report, &text, cli.format)?;
        }
        let diff = report.diff();
        if diff.is_empty() {
            return Ok(EXIT_OK);
        }
        eprint!("{diff}");
        return Ok(EXIT_VIOLATION);
    }
    let (Some(sc), Some(v)) = (a.scenario, a.variant) else {
        return Err(usage(
            "--scenario and --variant are required without --matrix",
        ));
    };
    let cfg = ScenarioConfig::default();
    let mut mismatches = Vec::new();
    for seed in seeds {
        let o = scenario::run(sc, v, seed, &cfg)?;
        match cli.format {
            Format::Table => println!(
                "{} {} {} {}",
                o.scenario,
                o.variant,
                o.attack_succeeded,
                o.evidence_file()
            ),
            Format::Text => {
                println!(
                    "scenario {} variant {} seed {}",
                    o.scenario, o.variant, o.seed
                );
                for s in &o.sessions {
                    let vs: Vec<String> = s
                        .verdicts
                        .iter()
                        .map(|(r, v)| format!("{r}={}", v.map_or("pending", |v| v.name())))
                        .collect();
                    println!("  session {} {}", s.session, vs.join(" "));
                }
                println!("  {}", o.detail);
                println!(
                    "  attack {} (expected {})",
                    if o.attack_succeeded {
                        "SUCCEEDS"
                    } else {
                        "BLOCKED"
                    },
                    if o.expected() { "SUCCEEDS" } else { "BLOCKED" }
                );
            }
        }
        if let Some(dir) = &a.out {
            write_file(&dir.join(o.evidence_file()), &o.evidence_text())?;
        }
        if o.attack_succeeded != o.expected() {
            mismatches.push(format!(
                "- {} {} seed {}: {}",
                o.scenario, o.variant, o.seed, o.detail
            ));
        }
    }
    if mismatches.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("{}", mismatches.join("\n"));
        Ok(EXIT_VIOLATION)
    }
}

pub fn render_matrix(report: &MatrixReport, format: Format) -> String {
    match format {
        Format::Text => report.to_text(),
        Format::Table => report.to_table(),
    }
}

fn write_evidence(
    dir: &Path,
    report: &MatrixReport,
    text: &str,
    format: Format,
) -> Result<(), Failure> {
    let name = match format {
        Format::Text => "matrix.txt",
        Format::Table => "matrix.tsv",
    };
    write_file(&dir.join(name), text)?;
    for o in report.outcomes() {
        write_file(&dir.join(o.evidence_file()), &o.evidence_text())?;
    }
    Ok(())
}

/// Splits an evidence file into its sessions; a bare transcript is one session.
pub fn split_sessions(text: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    for line in text.lines() {
        if let Some(label) = line.strip_prefix("## session ") {
            out.push((label.trim().to_string(), String::new()));
        } else if let Some((_, body)) = out.last_mut() {
            body.push_str(line);
            body.push('\n');
        }
    }
    if out.is_empty() {
        out.push(("transcript".into(), text.to_string()));
    }
    out
}

pub fn render_inspect(t: &ProtocolTranscript, label: &str, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Table => {
            for e in &t.entries {
                let link = match Link::between(e.from, e.to) {
                    Link::Radio => "radio",
                    Link::Core => "core",
                };
                let _ = writeln!(
                    out,
                    "{label} {} {link} {} {} {} {}",
                    e.t,
                    e.from,
                    e.to,
                    e.msg.kind(),
                    e.msg.payload().len()
                );
            }
        }
        Format::Text => {
            let _ = writeln!(out, "session {label}");
            let _ = writeln!(
                out,
                "  variant {} status {} messages {}",
                t.variant,
                t.status.name(),
                t.entries.len()
            );
            for o in &t.outcomes {
                let checks: Vec<&str> = o.checks.iter().map(|c| c.name()).collect();
                let _ = writeln!(
                    out,
                    "  {} {} checks {}",
                    o.role,
                    o.verdict.map_or("pending", |v| v.name()),
                    if checks.is_empty() {
                        "-".to_string()
                    } else {
                        checks.join(",")
                    }
                );
            }
            let radio = t
                .entries
                .iter()
                .filter(|e| Link::between(e.from, e.to) == Link::Radio)
                .count();
            let _ = writeln!(out, "  radio {} core {}", radio, t.entries.len() - radio);
            let identity = t.entries.iter().find_map(|e| match &e.msg {
                akasim::engine::AkaMessage::Identity(MobileIdentity::Imsi(i)) => {
                    Some(format!("imsi {i} (cleartext)"))
                }
                akasim::engine::AkaMessage::Identity(MobileIdentity::Suci(s)) => Some(format!(
                    "suci scheme {} ({} octets)",
                    s.scheme.id(),
                    s.to_bytes().len()
                )),
                _ => None,
            });
            let _ = writeln!(
                out,
                "  identity {}",
                identity.unwrap_or_else(|| "none".into())
            );
        }
    }
    out
}

fn inspect(cli: &Cli, a: &InspectArgs) -> Outcome {
    let text = fs::read_to_string(&a.path).map_err(|e| io(&a.path, e))?;
    let mut out = String::new();
    for (label, body) in split_sessions(&text) {
        let t = ProtocolTranscript::parse(&body).map_err(|e| Failure {
            code: EXIT_RUNTIME,
            message: format!("{}: {e}", a.path.display()),
        })?;
        out.push_str(&render_inspect(&t, &label, cli.format));
    }
    print!("{out}");
    Ok(EXIT_OK)
}
