use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Stdio};

use serde_json::{json, Value};

struct Server {
    child: Child,
    base: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn start(store: &Path) -> Server {
    let mut child = Command::new(env!("CARGO_BIN_EXE_sensograph"))
        .args(["serve", "--addr", "127.0.0.1:0"])
        .env("SENSOGRAPH_STORE", store)
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let base = line.split_whitespace().find(|w| w.starts_with("http://")).unwrap().to_string();
    Server { child, base }
}

struct Reply {
    status: u16,
    headers: Vec<(String, String)>,
    body: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.body))
    }

    fn header(&self, name: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

fn reply(mut r: ureq::http::Response<ureq::Body>) -> Reply {
    let headers = r
        .headers()
        .iter()
        .map(|(k, v)| (k.as_str().to_string(), v.to_str().unwrap_or_default().to_string()))
        .collect();
    Reply {
        status: r.status().as_u16(),
        headers,
        body: r.body_mut().read_to_string().unwrap(),
    }
}

fn get(url: &str) -> Reply {
    reply(agent().get(url).call().unwrap())
}

fn post(url: &str, body: Value) -> Reply {
    reply(
        agent()
            .post(url)
            .header("content-type", "application/json")
            .send(body.to_string())
            .unwrap(),
    )
}

fn wines(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("W{i}")).collect()
}

fn placements(names: &[String], shift: f64) -> Vec<Value> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let t = i as f64 / names.len() as f64;
            json!({ "sample": n, "x": (0.1 + 0.8 * t + shift).min(1.0), "y": 0.5 + 0.4 * (t * 6.0 + shift).sin() })
        })
        .collect()
}

fn create(base: &str, names: &[String]) -> String {
    let r = post(&format!("{base}/sessions"), json!({ "sample_names": names }));
    assert_eq!(r.status, 201, "{}", r.body);
    r.json()["id"].as_str().unwrap().to_string()
}

#[test]
fn session_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path());
    let base = &server.base;
    let names = wines(8);

    let a = create(base, &names);
    let b = create(base, &names);
    assert_ne!(a, b);
    let mut ids = vec![a.clone(), b.clone()];
    ids.sort();
    assert_eq!(get(&format!("{base}/sessions")).json(), json!(ids));
    let s = get(&format!("{base}/sessions/{a}")).json();
    assert_eq!(s["tablecloths"].as_array().unwrap().len(), 0);
    assert_eq!(s["sheet"], json!({ "width": 60.0, "height": 40.0 }));

    let url = format!("{base}/sessions/{a}/tablecloths");
    let r = post(&url, json!({ "assessor_id": "p1", "placements": placements(&names, 0.0) }));
    assert_eq!(r.status, 200, "{}", r.body);
    assert_eq!(r.json(), json!({ "outcome": "accepted", "tablecloths": 1 }));

    let r = post(&url, json!({ "assessor_id": "p1", "placements": placements(&names, 0.05) }));
    assert_eq!(r.json(), json!({ "outcome": "updated", "tablecloths": 1 }));
    let s = get(&format!("{base}/sessions/{a}")).json();
    let x0 = s["tablecloths"][0]["placements"][0]["position"]["x"].as_f64().unwrap();
    assert!((x0 - 0.15 * 60.0).abs() < 1e-9, "{x0}");

    let mut short = placements(&names, 0.0);
    short.pop();
    let r = post(&url, json!({ "assessor_id": "p2", "placements": short }));
    assert_eq!(r.status, 422);
    assert!(r.json()["error"].as_str().unwrap().contains("W8"), "{}", r.body);

    let mut outside = placements(&names, 0.0);
    outside[0]["x"] = json!(1.5);
    assert_eq!(post(&url, json!({ "assessor_id": "p2", "placements": outside })).status, 422);
    assert_eq!(get(&format!("{base}/sessions/{a}")).json()["tablecloths"].as_array().unwrap().len(), 1);
}

#[test]
fn rejected_requests() {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path());
    let base = &server.base;
    assert_eq!(post(&format!("{base}/sessions"), json!({ "sample_names": ["solo"] })).status, 422);
    assert_eq!(post(&format!("{base}/sessions"), json!({ "sample_names": ["a", "a"] })).status, 422);
    let bad_sheet = json!({ "sample_names": ["a", "b"], "sheet": { "width": -1.0, "height": 4.0 } });
    assert_eq!(post(&format!("{base}/sessions"), bad_sheet).status, 422);
    assert_eq!(get(&format!("{base}/sessions/nope")).status, 404);
    assert_eq!(get(&format!("{base}/sessions/nope/consensus")).status, 404);
    let p = json!({ "assessor_id": "x", "placements": [] });
    assert_eq!(post(&format!("{base}/sessions/nope/tablecloths"), p).status, 404);

    let id = create(base, &wines(3));
    let r = get(&format!("{base}/sessions/{id}/consensus?format=json"));
    assert_eq!(r.status, 409);
    assert!(r.json()["error"].is_string());
    assert_eq!(get(&format!("{base}/sessions/{id}/consensus?format=png")).status, 400);
}

#[test]
fn consensus_formats_agree() {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path());
    let base = &server.base;
    let names = wines(6);
    let id = create(base, &names);
    let url = format!("{base}/sessions/{id}");
    for (k, shift) in [0.0, 0.03, 0.07].into_iter().enumerate() {
        let p = json!({ "assessor_id": format!("a{k}"), "placements": placements(&names, shift) });
        assert_eq!(post(&format!("{url}/tablecloths"), p).status, 200);
    }
    let json_reply = get(&format!("{url}/consensus?format=json&seed=4"));
    let csv_reply = get(&format!("{url}/consensus?format=csv&seed=4"));
    let svg_reply = get(&format!("{url}/consensus?seed=4"));
    assert_eq!(svg_reply.header("content-type"), Some("image/svg+xml"));
    for r in [&json_reply, &csv_reply, &svg_reply] {
        assert_eq!(r.status, 200);
        assert_eq!(r.header("x-sensograph-samples"), Some("6"));
        assert_eq!(r.header("x-sensograph-assessors"), Some("3"));
        assert!(r.header("x-sensograph-final-energy").unwrap().parse::<f64>().is_ok());
        assert!(matches!(r.header("x-sensograph-converged"), Some("true" | "false")));
    }
    let report = json_reply.json();
    let csv_rows: Vec<Vec<u64>> = csv_reply
        .body
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|c| c.parse().unwrap()).collect())
        .collect();
    let json_rows: Vec<Vec<u64>> = serde_json::from_value(report["matrix"].clone()).unwrap();
    assert_eq!(csv_rows, json_rows);
    let drawn = (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j))).filter(|&(i, j)| json_rows[i][j] > 0);
    assert_eq!(svg_reply.body.matches("<line ").count(), drawn.count());
    for (i, row) in json_rows.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let pct = report["percentages"][i][j].as_u64().unwrap();
            assert_eq!(pct, (200 * c + 3) / 6);
        }
    }
    assert_eq!(report["final_energy"].as_f64().unwrap().to_string(), svg_reply.header("x-sensograph-final-energy").unwrap());
}

#[test]
fn single_assessor_draws_uniform_edges() {
    let dir = tempfile::tempdir().unwrap();
    let server = start(dir.path());
    let names = wines(5);
    let id = create(&server.base, &names);
    let p = json!({ "assessor_id": "only", "placements": placements(&names, 0.0) });
    assert_eq!(post(&format!("{}/sessions/{id}/tablecloths", server.base), p).status, 200);
    let svg = get(&format!("{}/sessions/{id}/consensus?format=svg", server.base)).body;
    let widths: Vec<&str> = svg
        .lines()
        .filter(|l| l.starts_with("<line "))
        .map(|l| l.split("stroke-width=\"").nth(1).unwrap().split('"').next().unwrap())
        .collect();
    assert!(!widths.is_empty());
    assert!(widths.iter().all(|w| *w == "6.000"), "{widths:?}");
}

#[test]
fn submissions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let names = wines(4);
    let (id, before) = {
        let server = start(dir.path());
        let id = create(&server.base, &names);
        let p = json!({ "assessor_id": "r", "placements": placements(&names, 0.0) });
        assert_eq!(post(&format!("{}/sessions/{id}/tablecloths", server.base), p).status, 200);
        let export = get(&format!("{}/sessions/{id}/export.csv", server.base));
        (id, export.body)
    };
    let server = start(dir.path());
    let after = get(&format!("{}/sessions/{id}/export.csv", server.base));
    assert_eq!(after.status, 200);
    assert_eq!(after.body, before);
    assert!(after.body.starts_with("# sheet: 60x40 cm\nsample,r_x,r_y\n"), "{}", after.body);
}
