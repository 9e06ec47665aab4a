//! Minimal `verify/1` endpoint for exercising the harness.
//!
//! ```text
//! verify-stub [--label N] [--confidence F] [--buffer K] [--drop ID]
//!             [--exit-after N] [--rename ID] [--no-handshake] [--sleep-ms MS]
//! ```
//!
//! `--label same-text` answers 1 exactly when both texts are equal.
//! `--buffer K` holds K requests and answers them in reverse order.

use std::io::{self, BufRead, Write};
use std::process::ExitCode;
use std::time::Duration;

use avkit::protocol::{serve_lines, VerifyRequest, VerifyResponse};

#[derive(Default)]
struct Opts {
    label: Option<u8>,
    confidence: f64,
    buffer: usize,
    drop: Option<String>,
    exit_after: Option<usize>,
    rename: Option<String>,
    no_handshake: bool,
    sleep: Option<Duration>,
}

fn parse() -> Result<Opts, String> {
    let mut o = Opts {
        label: Some(1),
        confidence: 0.5,
        buffer: 1,
        ..Default::default()
    };
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        let mut val = || args.next().ok_or_else(|| format!("{a} needs a value"));
        match a.as_str() {
            "--label" => {
                let v = val()?;
                o.label = if v == "same-text" {
                    None
                } else {
                    Some(v.parse().map_err(|e| format!("--label: {e}"))?)
                };
            }
            "--confidence" => o.confidence = val()?.parse().map_err(|e| format!("--confidence: {e}"))?,
            "--buffer" => o.buffer = val()?.parse().map_err(|e| format!("--buffer: {e}"))?,
            "--drop" => o.drop = Some(val()?),
            "--exit-after" => o.exit_after = Some(val()?.parse().map_err(|e| format!("--exit-after: {e}"))?),
            "--rename" => o.rename = Some(val()?),
            "--no-handshake" => o.no_handshake = true,
            "--sleep-ms" => {
                o.sleep = Some(Duration::from_millis(val()?.parse().map_err(|e| format!("--sleep-ms: {e}"))?))
            }
            other => return Err(format!("unknown argument `{other}`")),
        }
    }
    Ok(o)
}

fn respond(o: &Opts, r: &VerifyRequest) -> Option<VerifyResponse> {
    if o.drop.as_deref() == Some(r.sample_id.as_str()) {
        return None;
    }
    let sample_id = match &o.rename {
        Some(id) if id == &r.sample_id => format!("{id}-renamed"),
        _ => r.sample_id.clone(),
    };
    Some(VerifyResponse {
        sample_id,
        label: o.label.unwrap_or(u8::from(r.text1 == r.text2)),
        confidence: o.confidence,
    })
}

fn main() -> ExitCode {
    let opts = match parse() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("verify-stub: {e}");
            return ExitCode::from(2);
        }
    };
    let stdin = io::stdin().lock();
    let mut stdout = io::stdout().lock();

    if opts.no_handshake {
        let _ = writeln!(stdout, "{{\"protocol\":\"other/0\"}}");
        return ExitCode::SUCCESS;
    }

    if opts.buffer <= 1 && opts.exit_after.is_none() {
        let res = serve_lines(
            stdin,
            stdout,
            |r| {
                if let Some(d) = opts.sleep {
                    std::thread::sleep(d);
                }
                respond(&opts, r)
            },
            |line, e| eprintln!("verify-stub: line {line}: {e}"),
        );
        return if res.is_ok() { ExitCode::SUCCESS } else { ExitCode::FAILURE };
    }

    // buffered / crashing modes
    let _ = writeln!(stdout, "{{\"protocol\":\"verify/1\"}}");
    let _ = stdout.flush();
    let mut held: Vec<VerifyResponse> = Vec::new();
    let mut answered = 0usize;
    let mut flush = |held: &mut Vec<VerifyResponse>, out: &mut io::StdoutLock<'_>| -> bool {
        while let Some(r) = held.pop() {
            if opts.exit_after.is_some_and(|n| answered >= n) {
                return false;
            }
            let _ = writeln!(out, "{}", serde_json::to_string(&r).unwrap());
            answered += 1;
        }
        let _ = out.flush();
        true
    };
    for line in stdin.lines() {
        let Ok(line) = line else { break };
        let Ok(req) = serde_json::from_str::<VerifyRequest>(&line) else { continue };
        if let Some(r) = respond(&opts, &req) {
            held.push(r);
        }
        if held.len() >= opts.buffer.max(1) && !flush(&mut held, &mut stdout) {
            return ExitCode::FAILURE;
        }
    }
    flush(&mut held, &mut stdout);
    ExitCode::SUCCESS
}
