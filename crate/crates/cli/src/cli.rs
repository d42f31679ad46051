//! `nameguard` command line.
//!
//! Exit codes: `verify` and `register` answer 0 accept, 1 correction,
//! 2 reject. Usage errors exit 64, malformed data files 65, I/O failures 74.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use nameguard_core::{
    AccountId, AccountStatus, ContactEntry, ContactKind, Decision, Engine, LowAdequacy,
    ReasonCode, Registration, RegistrationRequest, RenameOutcome, SanctionCode, TermSeverity,
    Timestamp, Verdict,
};

use crate::exit;
use crate::webhook::{event_for, Notifier};
use crate::DataConfig;

#[derive(Debug, Parser)]
#[command(name = "nameguard", version, about = "Username verification for online communities")]
pub struct Cli {
    /// Directory holding the TSV stores.
    #[arg(long, global = true, env = "NAMEGUARD_DATA", default_value = "nameguard-data")]
    pub data: PathBuf,
    /// Leet fold table replacing the built-in one.
    #[arg(long, global = true, value_name = "FILE")]
    pub leet: Option<PathBuf>,
    /// Confusables fold table replacing the built-in one.
    #[arg(long, global = true, value_name = "FILE")]
    pub confusables: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify one name against the stores.
    Verify {
        name: String,
        #[arg(long)]
        email: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Verify one name per line; prints `name, decision, codes, details` as TSV.
    Batch {
        /// Input file, `-` for stdin.
        file: PathBuf,
    },
    /// Register a name, creating an account under moderation.
    Register {
        name: String,
        #[arg(long)]
        email: Option<String>,
        /// Extra contact as `kind=value`, e.g. `other=@handle`.
        #[arg(long = "contact", value_name = "KIND=VALUE")]
        contacts: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Rescan registered accounts and print the moderator report.
    Scan {
        #[arg(long)]
        json: bool,
    },
    /// Account classification and the efficiency indicator.
    Report {
        /// `auto` counts accounts under moderation or flagged by a rescan.
        #[arg(long, default_value = "auto")]
        low_adequacy: LowAdequacy,
        #[arg(long)]
        json: bool,
    },
    /// List accounts, optionally by status.
    Accounts {
        #[arg(long)]
        status: Option<AccountStatus>,
    },
    /// Record a deviation and apply a sanction (1 warning .. 4 permanent block).
    Sanction {
        account: AccountId,
        code: SanctionCode,
        /// Rule the account broke.
        #[arg(long, default_value = "prohibited_content")]
        rule: ReasonCode,
        #[arg(long, default_value = "")]
        note: String,
        /// Receives a JSON event for warnings.
        #[arg(long, env = "NAMEGUARD_WEBHOOK")]
        webhook: Option<String>,
    },
    /// Set an account's status (approve, keep name, lift block).
    Status { account: AccountId, status: AccountStatus },
    /// Give an account a new name.
    Rename { account: AccountId, name: String },
    /// Edit or list the prohibited terms and the blacklist.
    #[command(subcommand)]
    Db(DbCommand),
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
        /// Required in the `x-admin-token` header of mutating requests.
        #[arg(long, env = "NAMEGUARD_ADMIN_TOKEN")]
        admin_token: Option<String>,
        #[arg(long, env = "NAMEGUARD_WEBHOOK")]
        webhook: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DbCommand {
    AddProhibited {
        term: String,
        #[arg(long, default_value = "general")]
        category: String,
        #[arg(long, default_value = "reject")]
        severity: TermSeverity,
    },
    RmProhibited { term: String },
    AddBlacklist {
        name: String,
        #[arg(long, default_value = "4")]
        code: SanctionCode,
        #[arg(long, default_value = "")]
        reason: String,
    },
    RmBlacklist { name: String },
    List {
        #[arg(value_enum, default_value = "all")]
        what: ListWhat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ListWhat {
    All,
    Prohibited,
    Blacklist,
    Names,
    Deviations,
}

/// Output streams, injectable for tests.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

pub fn main_with_args<I, T>(args: I, io: &mut Io<'_>) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let rendered = e.render().to_string();
            let sink = if e.use_stderr() { &mut *io.err } else { &mut *io.out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match run(cli, io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "nameguard: {}", e.message);
            e.code
        }
    }
}

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(exit::IO_ERR, e)
    }
}

impl From<crate::LoadError> for Failure {
    fn from(e: crate::LoadError) -> Self {
        Failure::new(e.exit_code(), e)
    }
}

impl From<nameguard_core::PersistError> for Failure {
    fn from(e: nameguard_core::PersistError) -> Self {
        let code = match e {
            nameguard_core::PersistError::Io { .. } => exit::IO_ERR,
            _ => exit::DATA_ERR,
        };
        Failure::new(code, e)
    }
}

fn fail(e: impl ToString) -> Failure {
    Failure::new(exit::FAILURE, e)
}

fn decision_exit(d: Decision) -> u8 {
    match d {
        Decision::Accept => 0,
        Decision::RequireCorrection => 1,
        Decision::Reject => 2,
    }
}

/// `decision code code ...`, each code once, in check order.
pub fn verdict_line(v: &Verdict) -> String {
    let mut line = v.decision().to_string();
    let mut seen = Vec::new();
    for r in v.reasons() {
        if !seen.contains(&r.code) {
            seen.push(r.code);
            line.push(' ');
            line.push_str(r.code.as_str());
        }
    }
    line
}

fn verdict_details(v: &Verdict) -> String {
    let mut out = String::new();
    for r in v.reasons() {
        let _ = writeln!(out, "  {}: {}", r.code, r.detail);
    }
    out
}

fn tsv_field(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('\t', "\\t")
        .replace('\n', "\\n")
        .replace('\r', "\\r")
}

/// One batch output line (without newline).
pub fn batch_line(name: &str, v: &Verdict) -> String {
    let codes: Vec<&str> = v.reasons().iter().map(|r| r.code.as_str()).collect();
    let details: Vec<String> = v.reasons().iter().map(|r| r.detail.clone()).collect();
    format!(
        "{}\t{}\t{}\t{}",
        tsv_field(name),
        v.decision(),
        codes.join(","),
        tsv_field(&details.join("; "))
    )
}

fn parse_contact(raw: &str) -> Result<ContactEntry, Failure> {
    let (kind, value) = raw
        .split_once('=')
        .ok_or_else(|| Failure::new(exit::USAGE, format!("contact `{raw}` is not KIND=VALUE")))?;
    let kind: ContactKind = kind.parse().map_err(|e| Failure::new(exit::USAGE, e))?;
    Ok(ContactEntry {
        kind,
        value: value.to_owned(),
        verified: false,
    })
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(Failure::from)
}

fn run(cli: Cli, io: &mut Io<'_>) -> Result<u8, Failure> {
    let data = DataConfig {
        data_dir: cli.data.clone(),
        leet: cli.leet.clone(),
        confusables: cli.confusables.clone(),
    };
    let engine = data.load_engine()?;
    let out = &mut *io.out;
    match cli.command {
        Command::Verify { name, email, json } => {
            let req = RegistrationRequest { username: name, email, extra_contacts: vec![] };
            let v = engine.verify(&req);
            if json {
                writeln!(out, "{}", serde_json::to_string(&v).map_err(fail)?)?;
            } else {
                writeln!(out, "{}", verdict_line(&v))?;
                write!(out, "{}", verdict_details(&v))?;
            }
            Ok(decision_exit(v.decision()))
        }
        Command::Batch { file } => {
            let reader: Box<dyn BufRead> = if file.as_os_str() == "-" {
                Box::new(io::BufReader::new(io::stdin()))
            } else {
                let f = std::fs::File::open(&file)
                    .map_err(|e| Failure::new(exit::IO_ERR, format!("{}: {e}", file.display())))?;
                Box::new(io::BufReader::new(f))
            };
            let snapshot = engine.snapshot();
            for line in reader.lines() {
                let line = line?;
                let name = line.strip_suffix('\r').unwrap_or(&line);
                if name.trim().is_empty() {
                    continue;
                }
                let v = nameguard_core::pipeline::verify_with(
                    &RegistrationRequest::new(name),
                    &snapshot,
                    engine.config(),
                );
                writeln!(out, "{}", batch_line(name, &v))?;
            }
            Ok(exit::OK)
        }
        Command::Register { name, email, contacts, json } => {
            let extra_contacts = contacts.iter().map(|c| parse_contact(c)).collect::<Result<_, _>>()?;
            let req = RegistrationRequest { username: name, email, extra_contacts };
            let outcome = engine.register(&req, Timestamp::now()).map_err(fail)?;
            if json {
                writeln!(out, "{}", serde_json::to_string(&outcome).map_err(fail)?)?;
            }
            match outcome {
                Registration::Registered { account, record } => {
                    data.save(&engine)?;
                    if !json {
                        writeln!(out, "registered account {} as {} ({})", account.id, record.raw, account.status)?;
                    }
                    Ok(exit::OK)
                }
                Registration::Refused { verdict } => {
                    if !json {
                        writeln!(out, "{}", verdict_line(&verdict))?;
                        write!(out, "{}", verdict_details(&verdict))?;
                    }
                    Ok(decision_exit(verdict.decision()))
                }
            }
        }
        Command::Scan { json } => {
            let now = Timestamp::now();
            engine.scan(now);
            let report = engine.report(now);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).map_err(fail)?)?;
            } else {
                write!(out, "{}", report.to_text())?;
            }
            Ok(exit::OK)
        }
        Command::Report { low_adequacy, json } => {
            if low_adequacy == LowAdequacy::Auto {
                // Flags live in memory; recompute them for this process.
                engine.scan(Timestamp::now());
            }
            let report = engine.metrics_report(low_adequacy).map_err(fail)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report).map_err(fail)?)?;
            } else {
                write!(out, "{}", report.to_text())?;
            }
            Ok(exit::OK)
        }
        Command::Accounts { status } => {
            let s = engine.snapshot();
            for a in s.accounts().filter(|a| status.is_none_or(|st| a.status == st)) {
                let name = s.record(a.username_id).map(|r| r.raw.as_str()).unwrap_or("");
                writeln!(out, "{}\t{}\t{}\t{}", a.id, tsv_field(name), a.status, a.anonymity_level)?;
            }
            Ok(exit::OK)
        }
        Command::Sanction { account, code, rule, note, webhook } => {
            let d = engine.sanction(account, code, rule, &note, Timestamp::now()).map_err(fail)?;
            data.save(&engine)?;
            writeln!(out, "deviation {} account {} sanction {} ({})", d.id, d.account_id, d.sanction_code, d.rule_code)?;
            if let Some(url) = webhook {
                let username = engine
                    .snapshot()
                    .account_record(account)
                    .map(|r| r.raw.clone())
                    .unwrap_or_default();
                if let Some(event) = event_for(&d, &username) {
                    let notifier = Notifier::new(url);
                    if let Err(e) = runtime()?.block_on(notifier.send(&event)) {
                        writeln!(io.err, "nameguard: warning not delivered: {e}")?;
                    }
                }
            }
            Ok(exit::OK)
        }
        Command::Status { account, status } => {
            let rev = engine.set_status(account, status).map_err(fail)?;
            data.save(&engine)?;
            writeln!(out, "account {account} {status} (revision {rev})")?;
            Ok(exit::OK)
        }
        Command::Rename { account, name } => match engine.rename(account, &name, Timestamp::now()).map_err(fail)? {
            RenameOutcome::Renamed { record } => {
                data.save(&engine)?;
                writeln!(out, "account {account} renamed to {}", record.raw)?;
                Ok(exit::OK)
            }
            RenameOutcome::Refused { verdict } => {
                writeln!(out, "{}", verdict_line(&verdict))?;
                write!(out, "{}", verdict_details(&verdict))?;
                Ok(decision_exit(verdict.decision()))
            }
        },
        Command::Db(cmd) => run_db(cmd, &engine, &data, out),
        Command::Serve { port, bind, admin_token, webhook } => {
            let _ = tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
                )
                .with_writer(io::stderr)
                .try_init();
            let state = crate::api::AppState {
                engine: std::sync::Arc::new(engine),
                admin_token,
                notifier: webhook.map(Notifier::new),
                data_dir: Some(data.data_dir.clone()),
            };
            runtime()?.block_on(async move {
                let listener = tokio::net::TcpListener::bind((bind.as_str(), port)).await?;
                tracing::info!(addr = %listener.local_addr()?, data = %data.data_dir.display(), "listening");
                crate::api::serve(state, listener, crate::api::shutdown_signal()).await
            })?;
            Ok(exit::OK)
        }
    }
}

fn run_db(cmd: DbCommand, engine: &Engine, data: &DataConfig, out: &mut dyn Write) -> Result<u8, Failure> {
    let stores = engine.stores();
    let rev = match cmd {
        DbCommand::AddProhibited { term, category, severity } => {
            stores.write(|s| s.add_prohibited(&term, &category, severity)).map_err(fail)?
        }
        DbCommand::RmProhibited { term } => stores.write(|s| s.remove_prohibited(&term)).map_err(fail)?,
        DbCommand::AddBlacklist { name, code, reason } => stores
            .write(|s| s.add_blacklist(&name, code, &reason, Timestamp::now()))
            .map_err(fail)?,
        DbCommand::RmBlacklist { name } => stores.write(|s| s.remove_blacklist(&name)).map_err(fail)?,
        DbCommand::List { what } => {
            let s = engine.snapshot();
            let all = what == ListWhat::All;
            if all || what == ListWhat::Prohibited {
                for t in s.prohibited() {
                    writeln!(out, "prohibited\t{}\t{}\t{}", tsv_field(&t.term), tsv_field(&t.category), t.severity)?;
                }
            }
            if all || what == ListWhat::Blacklist {
                for b in s.blacklist() {
                    writeln!(out, "blacklist\t{}\t{}\t{}", tsv_field(&b.normalized_name), b.sanction_code, tsv_field(&b.reason))?;
                }
            }
            if all || what == ListWhat::Names {
                for r in s.records() {
                    writeln!(out, "name\t{}\t{}\t{}", r.id, tsv_field(&r.raw), tsv_field(&r.skeleton))?;
                }
            }
            if all || what == ListWhat::Deviations {
                for d in s.deviations() {
                    writeln!(
                        out,
                        "deviation\t{}\t{}\t{}\t{}\t{}",
                        d.id, d.account_id, d.rule_code, d.sanction_code, tsv_field(&d.note)
                    )?;
                }
            }
            return Ok(exit::OK);
        }
    };
    data.save(engine)?;
    writeln!(out, "revision {rev}")?;
    Ok(exit::OK)
}
