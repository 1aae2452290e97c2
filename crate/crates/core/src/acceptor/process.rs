use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::Duration;

use super::AcceptorError;
use crate::alphabet::{Alphabet, Word};

pub const DEFAULT_REPLY_TIMEOUT: Duration = Duration::from_secs(10);

/// External classifier speaking the line protocol: one request line of
/// space-separated symbols (`<eps>` for the empty word), one reply `0` or `1`.
pub struct Subprocess {
    command: String,
    timeout: Duration,
    inner: Mutex<Option<Running>>,
}

struct Running {
    child: Child,
    stdin: ChildStdin,
    replies: Receiver<std::io::Result<String>>,
}

impl std::fmt::Debug for Subprocess {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Subprocess").field("command", &self.command).finish()
    }
}

impl Subprocess {
    /// Starts `command` under `sh -c`.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, AcceptorError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| AcceptorError::Io(command.to_string(), e))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Subprocess {
            command: command.to_string(),
            timeout,
            inner: Mutex::new(Some(Running { child, stdin, replies: rx })),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn query(&self, alphabet: &Alphabet, word: &Word) -> Result<bool, AcceptorError> {
        let request = alphabet.render_word(word);
        let mut guard = self.inner.lock().unwrap_or_else(|p| p.into_inner());
        let fail = |kind: &str| AcceptorError::Subprocess { word: request.clone(), reason: kind.to_string() };
        let Some(running) = guard.as_mut() else {
            return Err(fail("process already failed"));
        };
        let outcome = (|| {
            writeln!(running.stdin, "{request}").map_err(|e| fail(&format!("broken pipe: {e}")))?;
            running.stdin.flush().map_err(|e| fail(&format!("broken pipe: {e}")))?;
            match running.replies.recv_timeout(self.timeout) {
                Ok(Ok(line)) => match line.trim() {
                    "1" => Ok(true),
                    "0" => Ok(false),
                    other => Err(fail(&format!("malformed reply `{other}`"))),
                },
                Ok(Err(e)) => Err(fail(&format!("read error: {e}"))),
                Err(RecvTimeoutError::Timeout) => Err(fail(&format!("no reply within {:?}", self.timeout))),
                Err(RecvTimeoutError::Disconnected) => Err(fail("process closed its output")),
            }
        })();
        if outcome.is_err() {
            // The stream is out of sync now; refuse further queries.
            if let Some(mut dead) = guard.take() {
                let _ = dead.child.kill();
                let _ = dead.child.wait();
            }
        }
        outcome
    }
}

impl Drop for Subprocess {
    fn drop(&mut self) {
        let slot = self.inner.get_mut().unwrap_or_else(|p| p.into_inner());
        if let Some(mut running) = slot.take() {
            drop(running.stdin);
            let _ = running.child.kill();
            let _ = running.child.wait();
        }
    }
}
