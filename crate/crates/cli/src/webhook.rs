//! Outbound notification for warnings (sanction level 1).
//!
//! Delivery is one JSON POST per warning. Failures are logged and otherwise
//! ignored: a lost notification must not undo a recorded sanction.

use std::time::Duration;

use nameguard_core::{Deviation, SanctionCode};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WarningEvent {
    pub event: &'static str,
    pub deviation_id: u64,
    pub account_id: u64,
    pub username: String,
    pub rule_code: String,
    pub note: String,
    pub created_at: String,
}

impl WarningEvent {
    pub const KIND: &'static str = "sanction.warning";

    pub fn new(deviation: &Deviation, username: &str) -> Self {
        WarningEvent {
            event: Self::KIND,
            deviation_id: deviation.id.0,
            account_id: deviation.account_id.0,
            username: username.to_owned(),
            rule_code: deviation.rule_code.to_string(),
            note: deviation.note.clone(),
            created_at: deviation.created_at.to_iso8601(),
        }
    }
}

/// Returns the event to send for a deviation, if its sanction warrants one.
pub fn event_for(deviation: &Deviation, username: &str) -> Option<WarningEvent> {
    (deviation.sanction_code == SanctionCode::Warning).then(|| WarningEvent::new(deviation, username))
}

#[derive(Debug, Clone)]
pub struct Notifier {
    url: String,
    client: reqwest::Client,
}

impl Notifier {
    pub fn new(url: impl Into<String>) -> Self {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(10))
            .build()
            .unwrap_or_default();
        Notifier {
            url: url.into(),
            client,
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub async fn send(&self, event: &WarningEvent) -> Result<(), reqwest::Error> {
        self.client
            .post(&self.url)
            .json(event)
            .send()
            .await?
            .error_for_status()?;
        Ok(())
    }

    /// Sends and logs the outcome.
    pub async fn deliver(&self, event: WarningEvent) {
        match self.send(&event).await {
            Ok(()) => tracing::info!(account = event.account_id, url = %self.url, "warning delivered"),
            Err(e) => tracing::warn!(account = event.account_id, url = %self.url, error = %e, "warning not delivered"),
        }
    }
}
