//! Line-delimited JSON over a child process's stdin/stdout, with a per-request
//! timeout. Used by the entity recognizer and external policy protocols.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ChannelError {
    #[error("could not start `{command}`: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("write to child failed: {0}")]
    Write(std::io::Error),
    #[error("no response within {0:?}")]
    Timeout(Duration),
    #[error("child closed its output")]
    Closed,
    #[error("malformed response: {0}")]
    Malformed(String),
}

struct Running {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Drop for Running {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A child process spoken to one JSON line at a time. The process is started
/// lazily and restarted after a timeout or failure, since a late reply would
/// otherwise be read as the answer to the next request.
pub struct JsonLineChannel {
    command: String,
    timeout: Duration,
    running: Option<Running>,
}

impl JsonLineChannel {
    /// `command` is run through `sh -c`.
    pub fn new(command: impl Into<String>, timeout: Duration) -> Self {
        JsonLineChannel {
            command: command.into(),
            timeout,
            running: None,
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn start(&mut self) -> Result<&mut Running, ChannelError> {
        if self.running.is_none() {
            let mut child = Command::new("sh")
                .arg("-c")
                .arg(&self.command)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::inherit())
                .spawn()
                .map_err(|source| ChannelError::Spawn {
                    command: self.command.clone(),
                    source,
                })?;
            let stdin = child.stdin.take().ok_or(ChannelError::Closed)?;
            let stdout = child.stdout.take().ok_or(ChannelError::Closed)?;
            let (tx, rx) = mpsc::channel();
            thread::spawn(move || {
                for line in BufReader::new(stdout).lines() {
                    if tx.send(line).is_err() {
                        break;
                    }
                }
            });
            self.running = Some(Running {
                child,
                stdin,
                lines: rx,
            });
        }
        Ok(self.running.as_mut().expect("just started"))
    }

    pub fn request<Q: Serialize, R: DeserializeOwned>(
        &mut self,
        request: &Q,
    ) -> Result<R, ChannelError> {
        let result = self.exchange(request);
        if result.is_err() {
            self.running = None;
        }
        result
    }

    fn exchange<Q: Serialize, R: DeserializeOwned>(
        &mut self,
        request: &Q,
    ) -> Result<R, ChannelError> {
        let timeout = self.timeout;
        let mut line =
            serde_json::to_string(request).map_err(|e| ChannelError::Malformed(e.to_string()))?;
        line.push('\n');
        let running = self.start()?;
        running
            .stdin
            .write_all(line.as_bytes())
            .and_then(|_| running.stdin.flush())
            .map_err(ChannelError::Write)?;
        let reply = loop {
            match running.lines.recv_timeout(timeout) {
                Ok(Ok(l)) if l.trim().is_empty() => continue,
                Ok(Ok(l)) => break l,
                Ok(Err(_)) | Err(RecvTimeoutError::Disconnected) => {
                    return Err(ChannelError::Closed)
                }
                Err(RecvTimeoutError::Timeout) => return Err(ChannelError::Timeout(timeout)),
            }
        };
        serde_json::from_str(&reply).map_err(|e| ChannelError::Malformed(format!("{e}: {reply}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::{json, Value};

    #[test]
    fn echo_round_trip() {
        let mut ch = JsonLineChannel::new("cat", Duration::from_secs(2));
        let v: Value = ch.request(&json!({"question": "hi"})).unwrap();
        assert_eq!(v, json!({"question": "hi"}));
        let v: Value = ch.request(&json!([1, 2])).unwrap();
        assert_eq!(v, json!([1, 2]));
    }

    #[test]
    fn timeout_and_garbage_are_errors() {
        let mut slow = JsonLineChannel::new("sleep 5", Duration::from_millis(100));
        assert!(matches!(
            slow.request::<_, Value>(&json!({})),
            Err(ChannelError::Timeout(_))
        ));
        let mut junk = JsonLineChannel::new(
            "while read l; do echo 'not json'; done",
            Duration::from_secs(2),
        );
        assert!(matches!(
            junk.request::<_, Value>(&json!({})),
            Err(ChannelError::Malformed(_))
        ));
        let mut gone = JsonLineChannel::new("true", Duration::from_secs(2));
        assert!(gone.request::<_, Value>(&json!({})).is_err());
    }
}
