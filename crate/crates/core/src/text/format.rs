use serde::{Deserialize, Serialize};

/// Token grammar knobs for the `First.Last` username format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatPolicy {
    pub min_token_len: usize,
    pub max_token_len: usize,
    /// Non-letter characters allowed after a token's first letter.
    pub extra_chars: Vec<char>,
}

impl Default for FormatPolicy {
    fn default() -> Self {
        FormatPolicy {
            min_token_len: 2,
            max_token_len: 32,
            extra_chars: vec!['-', '\''],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatParse {
    pub valid: bool,
    pub first: String,
    pub last: String,
    pub violation: Option<String>,
}

impl FormatParse {
    fn ok(first: &str, last: &str) -> Self {
        FormatParse {
            valid: true,
            first: first.to_owned(),
            last: last.to_owned(),
            violation: None,
        }
    }

    fn violation(message: impl Into<String>) -> Self {
        FormatParse {
            valid: false,
            first: String::new(),
            last: String::new(),
            violation: Some(message.into()),
        }
    }
}

/// Parses `raw` against `NameToken "." NameToken` with the default policy.
pub fn parse_format(raw: &str) -> FormatParse {
    parse_format_with(raw, &FormatPolicy::default())
}

pub fn parse_format_with(raw: &str, policy: &FormatPolicy) -> FormatParse {
    if raw.chars().any(char::is_whitespace) {
        return FormatParse::violation(
            "whitespace is not allowed; use \".\" as the separator between first and last name",
        );
    }
    let parts: Vec<&str> = raw.split('.').collect();
    if parts.len() == 1 {
        return FormatParse::violation("missing \".\" separator between first and last name");
    }
    if let Some(idx) = parts.iter().position(|p| p.is_empty()) {
        let which = match idx {
            0 => "first name",
            i if i == parts.len() - 1 => "last name",
            _ => "name",
        };
        return FormatParse::violation(format!("empty {which} token around \".\" separator"));
    }
    if parts.len() > 2 {
        return FormatParse::violation(format!(
            "expected exactly one \".\" separator, found {}",
            parts.len() - 1
        ));
    }
    for (label, token) in [("first name", parts[0]), ("last name", parts[1])] {
        if let Some(problem) = check_token(token, policy) {
            return FormatParse::violation(format!("{label} `{token}`: {problem}"));
        }
    }
    FormatParse::ok(parts[0], parts[1])
}

fn check_token(token: &str, policy: &FormatPolicy) -> Option<String> {
    let len = token.chars().count();
    if len < policy.min_token_len || len > policy.max_token_len {
        return Some(format!(
            "length {len} outside {}..{}",
            policy.min_token_len, policy.max_token_len
        ));
    }
    let mut chars = token.chars();
    if !chars.next().is_some_and(char::is_alphabetic) {
        return Some("must start with a letter".into());
    }
    if let Some(bad) = chars.find(|c| !c.is_alphabetic() && !policy.extra_chars.contains(c)) {
        return Some(format!("character {bad:?} is not allowed"));
    }
    None
}
