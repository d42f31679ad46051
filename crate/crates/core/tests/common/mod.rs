//! Independent reference implementations used to cross-check the library.
//!
//! Nothing here calls the matcher, the pipeline or the normalizer; each rule
//! is re-derived from its definition with plain loops over a small alphabet.

#![allow(dead_code)]

use std::collections::BTreeMap;

use nameguard_core::{
    Decision, LexiconStores, ReasonCode, SanctionCode, TermSeverity, Timestamp, UsernameId,
};
use rand::rngs::StdRng;
use rand::Rng;

/// Universe alphabet: Latin letters, a leet digit, a Cyrillic look-alike
/// and an uppercase letter.
pub const ALPHABET: [char; 6] = ['a', 'b', 'o', '0', '\u{0456}', 'B'];

/// The entries of the shipped fold tables that touch [`ALPHABET`].
pub fn oracle_fold_char(c: char) -> Option<&'static str> {
    match c {
        '0' => Some("o"),
        '\u{0456}' => Some("i"),
        _ => None,
    }
}

pub fn oracle_fold(s: &str) -> String {
    s.chars()
        .map(|c| oracle_fold_char(c).map(str::to_owned).unwrap_or_else(|| c.to_string()))
        .collect()
}

/// Normalization restricted to the alphabet (no whitespace, no
/// compatibility characters): lowercase only.
pub fn oracle_normalize(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}

/// Double-loop substring scan. Offsets in characters; sorted by offset,
/// then longer terms first, then term text.
pub fn naive_matches(haystack: &str, terms: &[String]) -> Vec<(String, usize)> {
    let hay: Vec<char> = haystack.chars().collect();
    let mut out = Vec::new();
    for term in terms {
        let t: Vec<char> = term.chars().collect();
        if t.is_empty() || t.len() > hay.len() {
            continue;
        }
        for start in 0..=hay.len() - t.len() {
            let mut all = true;
            for k in 0..t.len() {
                if hay[start + k] != t[k] {
                    all = false;
                    break;
                }
            }
            if all {
                out.push((term.clone(), start));
            }
        }
    }
    out.sort_by(|a, b| {
        a.1.cmp(&b.1)
            .then(b.0.chars().count().cmp(&a.0.chars().count()))
            .then(a.0.cmp(&b.0))
    });
    out
}

fn oracle_format_ok(raw: &str) -> bool {
    let dots = raw.chars().filter(|c| *c == '.').count();
    if dots != 1 || raw.chars().any(char::is_whitespace) {
        return false;
    }
    let (a, b) = raw.split_once('.').unwrap();
    [a, b].iter().all(|tok| {
        let chars: Vec<char> = tok.chars().collect();
        chars.len() >= 2
            && chars.len() <= 32
            && chars[0].is_alphabetic()
            && chars[1..]
                .iter()
                .all(|c| c.is_alphabetic() || *c == '-' || *c == '\'')
    })
}

fn oracle_email_ok(e: &str) -> bool {
    if e.is_empty() || e.len() > 254 || e.chars().any(char::is_whitespace) {
        return false;
    }
    let ats: Vec<usize> = e.match_indices('@').map(|(i, _)| i).collect();
    if ats.len() != 1 {
        return false;
    }
    let (local, domain) = (&e[..ats[0]], &e[ats[0] + 1..]);
    !local.is_empty() && domain.contains('.') && domain.split('.').all(|l| !l.is_empty())
}

/// Random small universe for pipeline cross-checks.
#[derive(Debug, Clone)]
pub struct Universe {
    pub candidate: String,
    pub email: Option<String>,
    /// Insertion order matters: a later duplicate term replaces an earlier one.
    pub prohibited: Vec<(String, TermSeverity)>,
    pub blacklist: Vec<String>,
    pub registered: Vec<String>,
}

fn random_word(rng: &mut StdRng, min: usize, max: usize, dot: bool) -> String {
    let len = rng.gen_range(min..=max);
    (0..len)
        .map(|_| {
            if dot && rng.gen_bool(0.12) {
                '.'
            } else {
                ALPHABET[rng.gen_range(0..ALPHABET.len())]
            }
        })
        .collect()
}

/// A name biased towards the `First.Last` shape so every rule fires often.
fn random_name(rng: &mut StdRng) -> String {
    if rng.gen_bool(0.5) {
        let a = random_word(rng, 1, 5, false);
        let b = random_word(rng, 1, 6, false);
        format!("{a}.{b}")
    } else {
        random_word(rng, 0, 12, true)
    }
}

impl Universe {
    pub fn random(rng: &mut StdRng) -> Self {
        let registered: Vec<String> = (0..rng.gen_range(0..=4)).map(|_| random_name(rng)).collect();
        let mut candidate = random_name(rng);
        // Make duplicates and blacklist hits likely.
        if !registered.is_empty() && rng.gen_bool(0.3) {
            candidate = registered[rng.gen_range(0..registered.len())].clone();
        }
        let mut blacklist: Vec<String> = (0..rng.gen_range(0..=3))
            .map(|_| oracle_normalize(&random_name(rng)))
            .filter(|n| !n.is_empty())
            .collect();
        if rng.gen_bool(0.2) {
            let n = oracle_normalize(&candidate);
            if !n.is_empty() {
                blacklist.push(oracle_fold(&n));
                blacklist.truncate(3);
            }
        }
        let prohibited = (0..rng.gen_range(0..=4))
            .map(|_| {
                let t = oracle_normalize(&random_word(rng, 1, 4, false));
                let sev = if rng.gen_bool(0.7) {
                    TermSeverity::Reject
                } else {
                    TermSeverity::Flag
                };
                (t, sev)
            })
            .collect();
        let email = match rng.gen_range(0..5) {
            0 => Some("a@b.co".to_owned()),
            1 => Some("a@b".to_owned()),
            2 => Some("x y@z.w".to_owned()),
            _ => None,
        };
        Universe {
            candidate,
            email,
            prohibited,
            blacklist,
            registered,
        }
    }

    /// Builds stores through the public mutators.
    pub fn stores(&self) -> LexiconStores {
        let mut s = LexiconStores::default();
        for (t, sev) in &self.prohibited {
            s.add_prohibited(t, "test", *sev).unwrap();
        }
        for b in &self.blacklist {
            s.add_blacklist(b, SanctionCode::HIGHEST, "test", Timestamp(0)).unwrap();
        }
        for (i, r) in self.registered.iter().enumerate() {
            s.upsert_record(UsernameId(i as u64 + 1), r, Timestamp(i as i64)).unwrap();
        }
        s
    }
}

/// Expected verdict: decision plus `(code, detail)` pairs. Format-violation
/// details are free text and reported as empty.
pub fn oracle_verdict(u: &Universe) -> (Decision, Vec<(ReasonCode, String)>) {
    let mut reasons: Vec<(ReasonCode, String)> = Vec::new();
    let normalized = oracle_normalize(u.candidate.trim());
    if normalized.is_empty() {
        reasons.push((ReasonCode::MissingField, "username".into()));
    } else {
        if !oracle_format_ok(&u.candidate) {
            reasons.push((ReasonCode::FormatViolation, String::new()));
        }

        let latin = u.candidate.chars().filter(|c| c.is_ascii_alphabetic()).count();
        let cyr = u
            .candidate
            .chars()
            .filter(|c| ('\u{0400}'..='\u{04FF}').contains(c))
            .count();
        if latin > 0 && cyr > 0 {
            reasons.push((ReasonCode::MixedScript, format!("latin:{latin},cyrillic:{cyr}")));
        }

        let mut terms: BTreeMap<String, TermSeverity> = BTreeMap::new();
        for (t, sev) in &u.prohibited {
            let canon = oracle_fold(&oracle_normalize(t));
            if !canon.is_empty() {
                terms.insert(canon, *sev);
            }
        }
        let reject_terms: Vec<String> = terms
            .iter()
            .filter(|(_, s)| **s == TermSeverity::Reject)
            .map(|(t, _)| t.clone())
            .collect();
        let folded = oracle_fold(&normalized);
        for (t, off) in naive_matches(&folded, &reject_terms) {
            reasons.push((ReasonCode::ProhibitedContent, format!("{t}@{off}")));
        }

        let keys: Vec<String> = u.blacklist.iter().map(|b| oracle_normalize(b)).collect();
        if keys.contains(&normalized) {
            reasons.push((ReasonCode::Blacklisted, normalized.clone()));
        } else if keys.contains(&folded) {
            reasons.push((ReasonCode::Blacklisted, folded.clone()));
        }

        for (i, r) in u.registered.iter().enumerate() {
            if oracle_fold(&oracle_normalize(r.trim())) == folded {
                reasons.push((ReasonCode::Duplicate, (i + 1).to_string()));
            }
        }
    }
    if let Some(e) = &u.email {
        if !oracle_email_ok(e) {
            reasons.push((ReasonCode::InvalidContact, String::new()));
        }
    }

    let decision = if reasons.is_empty() {
        Decision::Accept
    } else if reasons
        .iter()
        .any(|(c, _)| matches!(c, ReasonCode::ProhibitedContent | ReasonCode::Blacklisted))
    {
        Decision::Reject
    } else {
        Decision::RequireCorrection
    };
    (decision, reasons)
}

/// Projects a library verdict onto the oracle's comparison shape.
pub fn comparable(v: &nameguard_core::Verdict) -> (Decision, Vec<(ReasonCode, String)>) {
    let reasons = v
        .reasons()
        .iter()
        .map(|r| match r.code {
            ReasonCode::FormatViolation | ReasonCode::InvalidContact => (r.code, String::new()),
            _ => (r.code, r.detail.clone()),
        })
        .collect();
    (v.decision(), reasons)
}

/// Fuzz corpus string mixing ASCII, Cyrillic, fullwidth, leet, whitespace
/// and a few compatibility characters.
pub fn corpus_string(rng: &mut StdRng) -> String {
    const POOLS: &[&[char]] = &[
        &['a', 'B', 'z', 'Q', '.', '-', '\''],
        &['\u{0406}', '\u{0456}', '\u{0430}', '\u{0410}', '\u{041F}', '\u{0451}', '\u{0401}', '\u{0457}'],
        &['\u{FF21}', '\u{FF2A}', '\u{FF41}', '\u{FF10}', '\u{FF0E}', '\u{3000}'],
        &['0', '1', '3', '4', '5', '7', '@', '$', '!', '|'],
        &[' ', '\t', '\u{00A0}', '\u{2003}', '\n'],
        &['\u{00A8}', '\u{00B4}', '\u{FB01}', '\u{2024}', '\u{2026}', '\u{00C5}', '\u{212B}', '\u{0130}', '\u{03A3}', '\u{1E9E}', '\u{0345}'],
    ];
    let len = rng.gen_range(0..=24);
    (0..len)
        .map(|_| {
            let pool = POOLS[rng.gen_range(0..POOLS.len())];
            pool[rng.gen_range(0..pool.len())]
        })
        .collect()
}
