//! External entity recognizer spoken to over JSON lines.

use std::time::Duration;

use log::warn;
use serde::{Deserialize, Serialize};

use super::extract::Entity;
use crate::jsonl::JsonLineChannel;

pub const NER_TIMEOUT: Duration = Duration::from_secs(2);

#[derive(Serialize)]
struct NerRequest<'a> {
    question: &'a str,
}

#[derive(Deserialize)]
struct NerResponse {
    entities: Vec<Entity>,
}

pub struct NerClient {
    channel: JsonLineChannel,
}

impl NerClient {
    pub fn new(command: impl Into<String>) -> Self {
        Self::with_timeout(command, NER_TIMEOUT)
    }

    pub fn with_timeout(command: impl Into<String>, timeout: Duration) -> Self {
        NerClient {
            channel: JsonLineChannel::new(command, timeout),
        }
    }

    /// Entities of `question`; any protocol failure yields none, so the
    /// caller falls back to the heuristics alone.
    pub fn entities(&mut self, question: &str) -> Vec<Entity> {
        match self
            .channel
            .request::<_, NerResponse>(&NerRequest { question })
        {
            Ok(r) => r.entities,
            Err(e) => {
                warn!(
                    "entity recognizer `{}` failed, using heuristics only: {e}",
                    self.channel.command()
                );
                Vec::new()
            }
        }
    }
}
