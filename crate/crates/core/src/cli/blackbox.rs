//! External rules: a shell command reads a ballot file on stdin and prints
//! the outcome on stdout.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use super::ballots::format_peaks;
use crate::axioms::Rule;
use crate::error::{Error, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Clone)]
pub struct BlackBoxRule {
    command: String,
    timeout: Duration,
}

impl BlackBoxRule {
    pub fn new(command: impl Into<String>, timeout: Duration) -> Self {
        Self {
            command: command.into(),
            timeout,
        }
    }

    fn failure(&self, what: impl std::fmt::Display) -> Error {
        Error::RuleFailure(format!("`{}`: {what}", self.command))
    }
}

impl Rule for BlackBoxRule {
    fn outcome(&self, peaks: &[f64]) -> Result<f64> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| self.failure(e))?;
        let input = format_peaks(peaks);
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = std::thread::spawn(move || {
            let mut s = String::new();
            stdout.read_to_string(&mut s).map(|_| s)
        });
        let status = match child.wait_timeout(self.timeout).map_err(|e| self.failure(e))? {
            Some(status) => status,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(self.failure(format!("timed out after {:?}", self.timeout)));
            }
        };
        // a command may exit without reading its input
        let _ = writer.join();
        let text = reader
            .join()
            .map_err(|_| self.failure("stdout reader panicked"))?
            .map_err(|e| self.failure(e))?;
        if !status.success() {
            return Err(self.failure(format!("exited with {status}")));
        }
        let s = text.trim();
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| self.failure(format!("printed `{s}` instead of a decimal")))
    }

    fn describe(&self) -> String {
        format!("black box `{}`", self.command)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MEAN: &str = "awk -F, 'NR > 1 { s += $2; n += 1 } END { printf \"%.17g\\n\", s / n }'";

    #[test]
    fn mean_via_awk() {
        let rule = BlackBoxRule::new(MEAN, DEFAULT_TIMEOUT);
        assert_eq!(rule.outcome(&[0.5, 1.0]).unwrap(), 0.75);
    }

    #[test]
    fn failures_are_reported() {
        let rule = BlackBoxRule::new("echo nope", DEFAULT_TIMEOUT);
        assert!(matches!(rule.outcome(&[0.5]), Err(Error::RuleFailure(_))));
        let rule = BlackBoxRule::new("exit 3", DEFAULT_TIMEOUT);
        assert!(rule.outcome(&[0.5]).is_err());
        let rule = BlackBoxRule::new("sleep 5", Duration::from_millis(100));
        let err = rule.outcome(&[0.5]).unwrap_err();
        assert!(err.to_string().contains("timed out"), "{err}");
    }
}
