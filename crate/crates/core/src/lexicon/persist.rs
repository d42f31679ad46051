//! Plain-text table persistence.
//!
//! One UTF-8 file per table, LF line endings, TAB-separated fields, `#`
//! comment lines ignored. Field text escapes `\\`, `\t`, `\n` and `\r` with
//! a backslash. The store revision lives in `meta.tsv`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::PersistError;
use crate::model::{
    Account, AccountId, AccountStatus, BlacklistEntry, ContactEntry, ContactKind, Deviation,
    DeviationId, ProhibitedTerm, ReasonCode, SanctionCode, TermSeverity, Timestamp, UsernameId,
    UsernameRecord,
};
use crate::text::{normalize, FoldTables};

use super::{LexiconStores, Revision};

const PROHIBITED: &str = "prohibited.tsv";
const BLACKLIST: &str = "blacklist.tsv";
const REGISTRY: &str = "registry.tsv";
const ACCOUNTS: &str = "accounts.tsv";
const DEVIATIONS: &str = "deviations.tsv";
const META: &str = "meta.tsv";

pub const FILE_NAMES: [&str; 6] = [PROHIBITED, BLACKLIST, REGISTRY, ACCOUNTS, DEVIATIONS, META];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(';') => out.push(';'),
            Some('#') => out.push('#'),
            other => return Err(format!("bad escape sequence `\\{}`", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

/// Leading-column escape so a value starting with `#` is not read back as a
/// comment line.
fn escape_first(s: &str) -> String {
    let e = escape(s);
    if e.starts_with('#') {
        format!("\\{e}")
    } else {
        e
    }
}

/// `kind[*]=value` joined with `;`; `*` marks a verified contact.
fn encode_contacts(contacts: &[ContactEntry]) -> String {
    contacts
        .iter()
        .map(|c| {
            let value = escape(&c.value).replace(';', "\\;");
            format!("{}{}={}", c.kind, if c.verified { "*" } else { "" }, value)
        })
        .collect::<Vec<_>>()
        .join(";")
}

fn decode_contacts(field: &str) -> Result<Vec<ContactEntry>, String> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    let mut items = Vec::new();
    let mut current = String::new();
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                current.push('\\');
                if let Some(n) = chars.next() {
                    current.push(n);
                }
            }
            ';' => items.push(std::mem::take(&mut current)),
            c => current.push(c),
        }
    }
    items.push(current);
    items
        .into_iter()
        .map(|item| {
            let (kind, value) = item
                .split_once('=')
                .ok_or_else(|| format!("contact `{item}` is not `kind=value`"))?;
            let (kind, verified) = match kind.strip_suffix('*') {
                Some(k) => (k, true),
                None => (kind, false),
            };
            let kind = ContactKind::from_str(kind).map_err(|e| e.to_string())?;
            let value = unescape(value)?;
            if value.is_empty() {
                return Err("contact value is empty".into());
            }
            Ok(ContactEntry { kind, value, verified })
        })
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PersistError + '_ {
    move |source| PersistError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_table(dir: &Path, name: &str, header: &str, body: String) -> Result<(), PersistError> {
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut text = String::with_capacity(body.len() + header.len() + 3);
    let _ = writeln!(text, "# {header}");
    text.push_str(&body);
    fs::write(&tmp, text).map_err(io_err(&tmp))?;
    fs::rename(&tmp, &path).map_err(io_err(&path))
}

/// Writes every table into `dir`, creating it if needed. Output is
/// deterministic for a given store state.
pub fn save(stores: &LexiconStores, dir: &Path) -> Result<(), PersistError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut body = String::new();
    for t in stores.prohibited() {
        let _ = writeln!(body, "{}\t{}\t{}", escape_first(&t.term), escape(&t.category), t.severity);
    }
    write_table(dir, PROHIBITED, "term\tcategory\tseverity", body)?;

    let mut body = String::new();
    for e in stores.blacklist() {
        let _ = writeln!(
            body,
            "{}\t{}\t{}\t{}",
            escape_first(&e.normalized_name),
            e.sanction_code,
            e.created_at,
            escape(&e.reason)
        );
    }
    write_table(dir, BLACKLIST, "normalized_name\tsanction_code\tcreated_at\treason", body)?;

    let mut body = String::new();
    for r in stores.records() {
        let _ = writeln!(
            body,
            "{}\t{}\t{}\t{}\t{}",
            r.id,
            escape(&r.raw),
            escape(&r.normalized),
            escape(&r.skeleton),
            r.created_at
        );
    }
    write_table(dir, REGISTRY, "id\traw\tnormalized\tskeleton\tcreated_at", body)?;

    let mut body = String::new();
    for a in stores.accounts() {
        let _ = writeln!(
            body,
            "{}\t{}\t{}\t{}\t{}\t{}",
            a.id,
            a.username_id,
            a.anonymity_level,
            a.status,
            a.registered_at,
            escape(&encode_contacts(&a.contacts))
        );
    }
    write_table(
        dir,
        ACCOUNTS,
        "id\tusername_id\tanonymity_level\tstatus\tregistered_at\tcontacts",
        body,
    )?;

    let mut body = String::new();
    for d in stores.deviations() {
        let _ = writeln!(
            body,
            "{}\t{}\t{}\t{}\t{}\t{}",
            d.id,
            d.account_id,
            d.rule_code,
            d.sanction_code,
            d.created_at,
            escape(&d.note)
        );
    }
    write_table(
        dir,
        DEVIATIONS,
        "id\taccount_id\trule_code\tsanction_code\tcreated_at\tnote",
        body,
    )?;

    write_table(dir, META, "key\tvalue", format!("revision\t{}\n", stores.revision()))
}

/// Data rows of one table file: `(1-based line number, unescaped fields)`.
struct Rows {
    file: &'static str,
    rows: Vec<(usize, Vec<String>)>,
}

impl Rows {
    fn read(dir: &Path, file: &'static str, arity: usize) -> Result<Self, PersistError> {
        let path = dir.join(file);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(io_err(&path)(e)),
        };
        let mut rows = Vec::new();
        for (idx, line) in text.split('\n').enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let raw: Vec<&str> = line.split('\t').collect();
            if raw.len() != arity {
                return Err(malformed(
                    file,
                    lineno,
                    format!("expected {arity} fields, found {}", raw.len()),
                ));
            }
            let fields = raw
                .into_iter()
                .map(unescape)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|m| malformed(file, lineno, m))?;
            rows.push((lineno, fields));
        }
        Ok(Rows { file, rows })
    }
}

fn malformed(file: &str, line: usize, message: String) -> PersistError {
    PersistError::Malformed {
        file: file.to_owned(),
        line,
        message,
    }
}

fn parse_field<T: FromStr>(file: &str, line: usize, what: &str, value: &str) -> Result<T, PersistError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| malformed(file, line, format!("bad {what} `{value}`: {e}")))
}

fn parse_time(file: &str, line: usize, value: &str) -> Result<Timestamp, PersistError> {
    Timestamp::parse_iso8601(value)
        .ok_or_else(|| malformed(file, line, format!("bad timestamp `{value}`")))
}

/// Loads every table from `dir`. Missing files (or a missing directory) load
/// as empty tables.
pub fn load(dir: &Path, tables: Arc<FoldTables>) -> Result<LexiconStores, PersistError> {
    let mut stores = LexiconStores::new(tables);

    let t = Rows::read(dir, PROHIBITED, 3)?;
    let mut prohibited = Vec::new();
    for (line, f) in &t.rows {
        let term = stores.canonical_term(&f[0]);
        if term.is_empty() {
            return Err(malformed(t.file, *line, "empty term".into()));
        }
        let severity: TermSeverity = parse_field(t.file, *line, "severity", &f[2])?;
        prohibited.push(ProhibitedTerm {
            term,
            category: f[1].clone(),
            severity,
        });
    }

    let t = Rows::read(dir, BLACKLIST, 4)?;
    let mut blacklist = Vec::new();
    for (line, f) in &t.rows {
        if f[0].is_empty() || normalize(&f[0]) != f[0] {
            return Err(malformed(t.file, *line, format!("name `{}` is not normalized", f[0])));
        }
        blacklist.push(BlacklistEntry {
            normalized_name: f[0].clone(),
            sanction_code: parse_field(t.file, *line, "sanction code", &f[1])?,
            created_at: parse_time(t.file, *line, &f[2])?,
            reason: f[3].clone(),
        });
    }

    let t = Rows::read(dir, REGISTRY, 5)?;
    let mut records = Vec::new();
    for (line, f) in &t.rows {
        let id: UsernameId = parse_field(t.file, *line, "id", &f[0])?;
        let created_at = parse_time(t.file, *line, &f[4])?;
        // Derived columns are informational; they are recomputed so edited
        // fold tables take effect on load.
        if records.iter().any(|r: &UsernameRecord| r.id == id) {
            return Err(malformed(t.file, *line, format!("duplicate id {id}")));
        }
        records.push(UsernameRecord::new(id, &f[1], stores.tables(), created_at));
    }

    let t = Rows::read(dir, ACCOUNTS, 6)?;
    let mut accounts: Vec<Account> = Vec::new();
    for (line, f) in &t.rows {
        let id: AccountId = parse_field(t.file, *line, "id", &f[0])?;
        let username_id: UsernameId = parse_field(t.file, *line, "username id", &f[1])?;
        let level: u8 = parse_field(t.file, *line, "anonymity level", &f[2])?;
        let status: AccountStatus = parse_field(t.file, *line, "status", &f[3])?;
        let registered_at = parse_time(t.file, *line, &f[4])?;
        let contacts = decode_contacts(&f[5]).map_err(|m| malformed(t.file, *line, m))?;
        if !records.iter().any(|r| r.id == username_id) {
            return Err(malformed(t.file, *line, format!("unknown username id {username_id}")));
        }
        if accounts.iter().any(|a| a.id == id) {
            return Err(malformed(t.file, *line, format!("duplicate id {id}")));
        }
        let account = Account::new(id, username_id, contacts, registered_at, status);
        if account.anonymity_level != level {
            return Err(malformed(
                t.file,
                *line,
                format!(
                    "anonymity level {level} does not match {} verified contacts",
                    account.anonymity_level
                ),
            ));
        }
        accounts.push(account);
    }

    let t = Rows::read(dir, DEVIATIONS, 6)?;
    let mut deviations = Vec::new();
    for (line, f) in &t.rows {
        let account_id: AccountId = parse_field(t.file, *line, "account id", &f[1])?;
        if !accounts.iter().any(|a| a.id == account_id) {
            return Err(malformed(t.file, *line, format!("unknown account id {account_id}")));
        }
        let rule_code: ReasonCode = parse_field(t.file, *line, "rule code", &f[2])?;
        let sanction_code: SanctionCode = parse_field(t.file, *line, "sanction code", &f[3])?;
        deviations.push(Deviation {
            id: parse_field::<DeviationId>(t.file, *line, "id", &f[0])?,
            account_id,
            rule_code,
            sanction_code,
            created_at: parse_time(t.file, *line, &f[4])?,
            note: f[5].clone(),
        });
    }

    let t = Rows::read(dir, META, 2)?;
    let mut revision: Revision = 0;
    for (line, f) in &t.rows {
        match f[0].as_str() {
            "revision" => revision = parse_field(t.file, *line, "revision", &f[1])?,
            other => return Err(malformed(t.file, *line, format!("unknown key `{other}`"))),
        }
    }

    stores.restore(prohibited, blacklist, records, accounts, deviations, revision);
    stores
        .check_invariants()
        .map_err(|message| PersistError::Inconsistent {
            file: dir.display().to_string(),
            message,
        })?;
    Ok(stores)
}
