mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use avkit::protocol::{run_external, Endpoint, ExternalOptions, VerifyRequest, VerifyResponse};
use avkit::Error;

fn stub(args: &[&str]) -> Endpoint {
    Endpoint::Command {
        program: env!("CARGO_BIN_EXE_verify-stub").to_string(),
        args: args.iter().map(|s| s.to_string()).collect(),
    }
}

fn opts() -> ExternalOptions {
    ExternalOptions {
        timeout: Duration::from_secs(20),
        window: 64,
    }
}

#[test]
fn thousand_request_session_is_bijective() {
    let ds = common::dataset(1000);
    let results = run_external(&ds, &stub(&["--label", "1", "--confidence", "0.5"]), &opts()).unwrap();
    assert_eq!(results.len(), 1000);
    for (s, r) in ds.samples.iter().zip(&results) {
        assert_eq!(s.sample_id, r.sample_id);
        assert_eq!(r.label, 1);
        assert_eq!(r.confidence, 0.5);
        assert_eq!(r.truth, s.label);
        assert!(r.score.is_none());
    }
}

#[test]
fn out_of_order_responses_are_realigned() {
    let ds = common::dataset(150);
    let results = run_external(&ds, &stub(&["--buffer", "10", "--label", "same-text"]), &opts()).unwrap();
    let ids: Vec<_> = results.iter().map(|r| r.sample_id.as_str()).collect();
    let expected: Vec<_> = ds.samples.iter().map(|s| s.sample_id.as_str()).collect();
    assert_eq!(ids, expected);
}

#[test]
fn window_of_one_still_completes() {
    let ds = common::dataset(20);
    let o = ExternalOptions { window: 1, ..opts() };
    assert_eq!(run_external(&ds, &stub(&[]), &o).unwrap().len(), 20);
}

#[test]
fn dropped_response_names_sample() {
    let ds = common::dataset(30);
    let err = run_external(&ds, &stub(&["--drop", "s00007"]), &opts()).unwrap_err();
    assert!(matches!(&err, Error::MissingResponse(id) if id == "s00007"), "{err}");
}

#[test]
fn crashed_endpoint_reports_missing() {
    let ds = common::dataset(30);
    let err = run_external(&ds, &stub(&["--exit-after", "5"]), &opts()).unwrap_err();
    assert!(matches!(err, Error::MissingResponse(_)), "{err}");
}

#[test]
fn unknown_id_is_rejected() {
    let ds = common::dataset(10);
    let err = run_external(&ds, &stub(&["--rename", "s00003"]), &opts()).unwrap_err();
    assert!(err.to_string().contains("s00003-renamed"), "{err}");
}

#[test]
fn confidence_out_of_range_is_rejected() {
    let ds = common::dataset(5);
    let err = run_external(&ds, &stub(&["--confidence", "1.5"]), &opts()).unwrap_err();
    assert!(err.to_string().contains("confidence 1.5"), "{err}");
}

#[test]
fn label_out_of_range_is_rejected() {
    let ds = common::dataset(5);
    let err = run_external(&ds, &stub(&["--label", "2"]), &opts()).unwrap_err();
    assert!(err.to_string().contains("label 2"), "{err}");
}

#[test]
fn wrong_handshake_is_rejected() {
    let ds = common::dataset(5);
    let err = run_external(&ds, &stub(&["--no-handshake"]), &opts()).unwrap_err();
    assert!(err.to_string().contains("handshake"), "{err}");
}

#[test]
fn slow_endpoint_times_out() {
    let ds = common::dataset(3);
    let o = ExternalOptions {
        timeout: Duration::from_millis(200),
        window: 1,
    };
    let err = run_external(&ds, &stub(&["--sleep-ms", "2000"]), &o).unwrap_err();
    assert!(matches!(err, Error::Timeout(_)), "{err}");
}

#[test]
fn missing_program_is_named() {
    let ds = common::dataset(1);
    let ep = Endpoint::parse("/nonexistent/endpoint --flag").unwrap();
    let err = run_external(&ds, &ep, &opts()).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/endpoint"), "{err}");
}

/// Serves `requests` POSTs, answering label 1 iff both texts are equal.
fn http_server(requests: usize, confidence: f64) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/verify", listener.local_addr().unwrap());
    thread::spawn(move || {
        for stream in listener.incoming().take(requests) {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            let req: VerifyRequest = serde_json::from_slice(&body).unwrap();
            let resp = serde_json::to_string(&VerifyResponse {
                sample_id: req.sample_id,
                label: u8::from(req.text1 == req.text2),
                confidence,
            })
            .unwrap();
            write!(
                stream,
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{resp}",
                resp.len()
            )
            .unwrap();
        }
    });
    url
}

#[test]
fn http_endpoint() {
    let ds = common::dataset(25);
    let url = http_server(25, 0.8);
    let results = run_external(&ds, &Endpoint::parse(&url).unwrap(), &opts()).unwrap();
    assert_eq!(results.len(), 25);
    assert!(results.iter().all(|r| r.confidence == 0.8 && r.label == 0));
}

#[test]
fn http_bad_confidence_is_rejected() {
    let ds = common::dataset(2);
    let url = http_server(2, -0.1);
    let err = run_external(&ds, &Endpoint::parse(&url).unwrap(), &opts()).unwrap_err();
    assert!(err.to_string().contains("confidence"), "{err}");
}
