use serde::{Deserialize, Serialize};

/// Maximum e-mail address length in bytes.
pub const MAX_EMAIL_LEN: usize = 254;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactCheck {
    pub valid: bool,
    pub violation: Option<String>,
}

impl ContactCheck {
    fn invalid(message: impl Into<String>) -> Self {
        ContactCheck {
            valid: false,
            violation: Some(message.into()),
        }
    }
}

/// Syntactic e-mail check: one `@`, nonempty local part, dotted domain with
/// nonempty labels, no whitespace, at most 254 bytes.
pub fn validate_contact(email: &str) -> ContactCheck {
    if email.is_empty() {
        return ContactCheck::invalid("empty address");
    }
    if email.len() > MAX_EMAIL_LEN {
        return ContactCheck::invalid(format!(
            "address is {} bytes, limit is {MAX_EMAIL_LEN}",
            email.len()
        ));
    }
    if email.chars().any(char::is_whitespace) {
        return ContactCheck::invalid("whitespace in address");
    }
    let mut parts = email.split('@');
    let (Some(local), Some(domain), None) = (parts.next(), parts.next(), parts.next()) else {
        return ContactCheck::invalid("address must contain exactly one \"@\"");
    };
    if local.is_empty() {
        return ContactCheck::invalid("empty local part");
    }
    if !domain.contains('.') {
        return ContactCheck::invalid("domain has no \".\"");
    }
    if domain.split('.').any(str::is_empty) {
        return ContactCheck::invalid("domain has an empty label");
    }
    ContactCheck {
        valid: true,
        violation: None,
    }
}
