//! The `verify/1` protocol for external classifiers.
//!
//! A stdio endpoint is a subprocess that first prints the handshake line
//! `{"protocol": "verify/1"}`, then answers each request line
//! `{"sample_id", "text1", "text2"}` with a response line
//! `{"sample_id", "label", "confidence"}`. Responses may arrive in any order.
//! The harness closes the endpoint's stdin once every request is written.
//!
//! An HTTP endpoint accepts the same request body at `POST <url>` and
//! returns the response body.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairgen::PairDataset;
use crate::results::VerificationResult;

pub const PROTOCOL_VERSION: &str = "verify/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyRequest {
    pub sample_id: String,
    pub text1: String,
    pub text2: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResponse {
    pub sample_id: String,
    pub label: u8,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Handshake {
    pub protocol: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// A subprocess speaking the line protocol on its standard streams.
    Command { program: String, args: Vec<String> },
    /// A server accepting `POST` of request bodies at this URL.
    Http { url: String },
}

impl Endpoint {
    /// `http://` and `https://` strings are URLs; anything else is a command
    /// line split on whitespace.
    pub fn parse(spec: &str) -> Result<Endpoint> {
        if spec.starts_with("http://") || spec.starts_with("https://") {
            return Ok(Endpoint::Http { url: spec.to_string() });
        }
        let mut parts = spec.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| Error::Config("empty endpoint command".into()))?;
        Ok(Endpoint::Command {
            program,
            args: parts.collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExternalOptions {
    /// Longest wait for any single response while requests are in flight.
    pub timeout: Duration,
    /// Maximum number of unanswered requests.
    pub window: usize,
}

impl Default for ExternalOptions {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(300),
            window: 64,
        }
    }
}

pub fn requests(dataset: &PairDataset) -> Vec<VerifyRequest> {
    dataset
        .samples
        .iter()
        .map(|s| VerifyRequest {
            sample_id: s.sample_id.clone(),
            text1: s.para1.clone(),
            text2: s.para2.clone(),
        })
        .collect()
}

/// Checks one response against the outstanding requests.
fn accept(resp: VerifyResponse, pending: &mut HashSet<String>, known: &HashSet<&str>) -> Result<VerifyResponse> {
    if !pending.remove(&resp.sample_id) {
        return Err(Error::Protocol(if known.contains(resp.sample_id.as_str()) {
            format!("duplicate or unsolicited response for `{}`", resp.sample_id)
        } else {
            format!("unknown sample_id `{}`", resp.sample_id)
        }));
    }
    if resp.label > 1 {
        return Err(Error::Protocol(format!(
            "label {} for `{}` is not 0 or 1",
            resp.label, resp.sample_id
        )));
    }
    if !(0.0..=1.0).contains(&resp.confidence) {
        return Err(Error::Protocol(format!(
            "confidence {} for `{}` outside [0, 1]",
            resp.confidence, resp.sample_id
        )));
    }
    Ok(resp)
}

/// Sends every sample to `endpoint` and returns one result per sample, in
/// dataset order regardless of the order responses arrive in.
pub fn run_external(dataset: &PairDataset, endpoint: &Endpoint, opts: &ExternalOptions) -> Result<Vec<VerificationResult>> {
    let reqs = requests(dataset);
    let mut ids = HashSet::new();
    for r in &reqs {
        if !ids.insert(r.sample_id.as_str()) {
            return Err(Error::Protocol(format!("sample_id `{}` is not unique", r.sample_id)));
        }
    }
    let responses = match endpoint {
        Endpoint::Command { program, args } => run_stdio(program, args, &reqs, opts)?,
        Endpoint::Http { url } => run_http(url, &reqs, opts)?,
    };
    let mut by_id: HashMap<String, VerifyResponse> =
        responses.into_iter().map(|r| (r.sample_id.clone(), r)).collect();
    dataset
        .samples
        .iter()
        .map(|s| {
            let r = by_id
                .remove(&s.sample_id)
                .ok_or_else(|| Error::MissingResponse(s.sample_id.clone()))?;
            Ok(VerificationResult {
                sample_id: s.sample_id.clone(),
                truth: s.label,
                label: r.label,
                score: None,
                confidence: r.confidence,
            })
        })
        .collect()
}

enum Line {
    Text(String),
    Failed(std::io::Error),
}

struct ChildGuard(Child);

impl Drop for ChildGuard {
    fn drop(&mut self) {
        if let Ok(None) = self.0.try_wait() {
            let _ = self.0.kill();
        }
        let _ = self.0.wait();
    }
}

fn recv_line(rx: &Receiver<Line>, timeout: Duration) -> Result<Option<String>> {
    match rx.recv_timeout(timeout) {
        Ok(Line::Text(t)) => Ok(Some(t)),
        Ok(Line::Failed(e)) => Err(Error::Protocol(format!("reading endpoint output: {e}"))),
        Err(RecvTimeoutError::Timeout) => Err(Error::Timeout(timeout)),
        Err(RecvTimeoutError::Disconnected) => Ok(None),
    }
}

fn write_request(stdin: &mut BufWriter<ChildStdin>, req: &VerifyRequest) -> Result<()> {
    let line = serde_json::to_string(req)?;
    stdin
        .write_all(line.as_bytes())
        .and_then(|_| stdin.write_all(b"\n"))
        .and_then(|_| stdin.flush())
        .map_err(|e| Error::Protocol(format!("writing to endpoint: {e}")))
}

fn run_stdio(program: &str, args: &[String], reqs: &[VerifyRequest], opts: &ExternalOptions) -> Result<Vec<VerifyResponse>> {
    let child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(|e| Error::io(program, e))?;
    let mut child = ChildGuard(child);
    let stdout = child.0.stdout.take().expect("stdout is piped");
    let mut stdin = Some(BufWriter::new(child.0.stdin.take().expect("stdin is piped")));

    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            let msg = match line {
                Ok(t) => Line::Text(t),
                Err(e) => Line::Failed(e),
            };
            if tx.send(msg).is_err() {
                break;
            }
        }
    });

    let hello = recv_line(&rx, opts.timeout)?.ok_or_else(|| Error::Protocol("endpoint exited before handshake".into()))?;
    match serde_json::from_str::<Handshake>(&hello) {
        Ok(h) if h.protocol == PROTOCOL_VERSION => {}
        _ => return Err(Error::Protocol(format!("bad handshake line: {hello}"))),
    }

    let known: HashSet<&str> = reqs.iter().map(|r| r.sample_id.as_str()).collect();
    let mut pending: HashSet<String> = HashSet::new();
    let mut out = Vec::with_capacity(reqs.len());
    let mut next = 0;
    let window = opts.window.max(1);
    let mut write_failed = None;
    while out.len() < reqs.len() {
        while write_failed.is_none() && next < reqs.len() && pending.len() < window {
            let w = stdin.as_mut().expect("stdin open while requests remain");
            match write_request(w, &reqs[next]) {
                Ok(()) => {
                    pending.insert(reqs[next].sample_id.clone());
                    next += 1;
                }
                // a dead endpoint is reported below as its first unanswered sample
                Err(e) => write_failed = Some(e),
            }
        }
        if next == reqs.len() || write_failed.is_some() {
            // end of input lets buffering endpoints flush
            stdin.take();
        }
        let line = match recv_line(&rx, opts.timeout)? {
            Some(l) => l,
            None => {
                let missing = reqs
                    .iter()
                    .find(|r| pending.contains(&r.sample_id))
                    .or(reqs.get(next))
                    .map(|r| r.sample_id.clone())
                    .unwrap_or_default();
                return Err(Error::MissingResponse(missing));
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let resp: VerifyResponse = serde_json::from_str(&line)
            .map_err(|e| Error::Protocol(format!("malformed response line `{line}`: {e}")))?;
        out.push(accept(resp, &mut pending, &known)?);
    }
    drop(stdin);
    Ok(out)
}

fn run_http(url: &str, reqs: &[VerifyRequest], opts: &ExternalOptions) -> Result<Vec<VerifyResponse>> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(opts.timeout))
        .build()
        .into();
    let known: HashSet<&str> = reqs.iter().map(|r| r.sample_id.as_str()).collect();
    let mut pending = HashSet::new();
    let mut out = Vec::with_capacity(reqs.len());
    for req in reqs {
        pending.insert(req.sample_id.clone());
        let body = serde_json::to_string(req)?;
        let mut resp = agent
            .post(url)
            .header("content-type", "application/json")
            .send(body.as_str())
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => Error::Timeout(opts.timeout),
                e => Error::Protocol(format!("POST {url} for `{}`: {e}", req.sample_id)),
            })?;
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Protocol(format!("reading response for `{}`: {e}", req.sample_id)))?;
        let parsed: VerifyResponse = serde_json::from_str(&text)
            .map_err(|e| Error::Protocol(format!("malformed response body `{text}`: {e}")))?;
        out.push(accept(parsed, &mut pending, &known)?);
    }
    Ok(out)
}

/// Serves the line protocol: writes the handshake, then one response per
/// request line. Malformed request lines are reported through `on_error`
/// and skipped.
pub fn serve_lines<R: BufRead, W: Write>(
    input: R,
    mut output: W,
    mut handler: impl FnMut(&VerifyRequest) -> Option<VerifyResponse>,
    mut on_error: impl FnMut(usize, &str),
) -> std::io::Result<()> {
    let hello = serde_json::to_string(&Handshake {
        protocol: PROTOCOL_VERSION.to_string(),
    })?;
    writeln!(output, "{hello}")?;
    output.flush()?;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<VerifyRequest>(&line) {
            Ok(req) => {
                if let Some(resp) = handler(&req) {
                    writeln!(output, "{}", serde_json::to_string(&resp)?)?;
                    output.flush()?;
                }
            }
            Err(e) => on_error(i + 1, &e.to_string()),
        }
    }
    Ok(())
}
