mod common;

use common::*;
use gcr::ops::{Project, ServiceError};
use gcr::server;
use serde_json::json;

fn hello(http: &Http) {
    let (s, body) = http.post(
        "/interactions",
        json!({ "component": "print-text-console", "values": { "Page1_Text1": "\"Hello World\"" } }),
    );
    assert_eq!(s, 201, "{body}");
    assert_eq!(body["interaction"], 1);
    assert_eq!(
        body["steps"][0]["label"],
        "Print Text – New Line – (\"Hello World\")"
    );
    let (s, _) = http.post(
        "/interactions",
        json!({ "component": "wait-key-seconds", "values": { "Page1_WaitSeconds": "1", "Page1_Seconds": "3" } }),
    );
    assert_eq!(s, 201);
}

#[test]
fn hello_world_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let path = new_project(dir.path(), "hello.gcr");
    let http = Http::serve(&path);
    hello(&http);
    let (s, code) = http.get("/code?goal=main");
    assert_eq!(s, 200);
    let golden =
        std::fs::read_to_string(repo_root().join("samples/hello-world.golden.cpp")).unwrap();
    assert_eq!(code["files"][0]["text"], golden);
    let (_, step) = http.get("/code/step/4");
    assert_eq!(
        step["code"],
        "std::this_thread::sleep_for(std::chrono::seconds(3)) ;"
    );
    let (_, movie) = http.get("/movie");
    assert_eq!(movie.as_array().unwrap().len(), 3);
    http.stop();
    // Every write was saved.
    let out = ok(&path, &["emit"]);
    assert_eq!(out, golden);
}

#[test]
fn seek_to_zero_empties_the_tree() {
    let dir = tempfile::tempdir().unwrap();
    let path = new_project(dir.path(), "p.gcr");
    let http = Http::serve(&path);
    hello(&http);
    let (s, body) = http.post("/timeline/seek", json!({ "t": 0 }));
    assert_eq!((s, body["head"].as_u64()), (200, Some(0)));
    let (_, tree) = http.get("/tree");
    assert_eq!(tree["goals"][0]["root"].get("children"), None);
    assert_eq!(tree["head"], 0);
    let (_, tl) = http.get("/timeline");
    assert_eq!(tl["length"], 3);
    let (s, body) = http.post("/timeline/seek", json!({ "t": 9 }));
    assert_eq!(s, 422, "{body}");
    assert_eq!(body["error"], "OutOfRange");
}

#[test]
fn errors_map_to_status_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = new_project(dir.path(), "p.gcr");
    let http = Http::serve(&path);
    let (s, body) = http.post("/interactions", json!({ "component": "nope" }));
    assert_eq!((s, body["error"].as_str()), (404, Some("UnknownComponent")));
    let (s, body) = http.post(
        "/interactions",
        json!({ "component": "wait-key-seconds", "values": { "Page1_Seconds": "soon" } }),
    );
    assert_eq!((s, body["error"].as_str()), (422, Some("ValidationError")));
    let (s, body) = http.post("/tree/ops", json!({ "op": "delete", "steps": [1] }));
    assert_eq!((s, body["error"].as_str()), (422, Some("RootImmutable")));
    let (s, _) = http.send(reqwest::Method::DELETE, "/interactions/7", None);
    assert_eq!(s, 404);
    let (s, _) = http.post("/tree/ops", json!({ "op": "explode" }));
    assert!((400..500).contains(&s));
    let (s, _) = http.get("/components/nope");
    assert_eq!(s, 404);
}

#[test]
fn modify_and_delete_interaction() {
    let dir = tempfile::tempdir().unwrap();
    let path = new_project(dir.path(), "p.gcr");
    let http = Http::serve(&path);
    hello(&http);
    let (s, body) = http.send(
        reqwest::Method::PUT,
        "/interactions/1",
        Some(json!({ "values": { "Page1_Text1": "\"Hi\"" } })),
    );
    assert_eq!(s, 200, "{body}");
    assert_eq!(
        body["steps"][0]["label"],
        "Print Text – New Line – (\"Hi\")"
    );
    let (s, _) = http.send(reqwest::Method::DELETE, "/interactions/2", None);
    assert_eq!(s, 204);
    let (s, body) = http.send(reqwest::Method::DELETE, "/interactions/2", None);
    assert_eq!(
        (s, body["error"].as_str()),
        (404, Some("UnknownInteraction"))
    );
}

#[test]
fn components_search() {
    let dir = tempfile::tempdir().unwrap();
    let path = new_project(dir.path(), "p.gcr");
    let http = Http::serve(&path);
    let (s, list) = http.get("/components?query=wa");
    assert_eq!(s, 200);
    let names: Vec<&str> = list
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["Wait Key/Seconds"]);
    let (_, c) = http.get("/components/print-text-console");
    assert_eq!(c["defaults"]["Page1_Text1"], "");
}

#[test]
fn busy_port_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = new_project(dir.path(), "p.gcr");
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let err = server::start(Project::open(&path).unwrap(), &addr)
        .err()
        .unwrap();
    assert!(matches!(err, ServiceError::PortInUse(p) if p == taken.local_addr().unwrap().port()));
}

#[test]
fn event_stream_replays_backlog() {
    use std::io::{BufRead, BufReader};
    let dir = tempfile::tempdir().unwrap();
    let path = new_project(dir.path(), "p.gcr");
    let http = Http::serve(&path);
    hello(&http);
    let resp = http
        .client
        .get(format!("{}/events?since=1", http.base))
        .send()
        .unwrap();
    assert_eq!(resp.status().as_u16(), 200);
    let mut lines = BufReader::new(resp).lines();
    let mut ids = Vec::new();
    while ids.len() < 2 {
        let line = lines.next().unwrap().unwrap();
        if let Some(id) = line.strip_prefix("id: ") {
            ids.push(id.to_owned());
        }
    }
    assert_eq!(ids, ["2", "3"]);
}

#[test]
fn http_script_matches_cli_script() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cli = run_script_cli(a.path(), "parity.gcr");
    let http = run_script_http(b.path(), "parity.gcr");
    assert_eq!(
        String::from_utf8(cli).unwrap(),
        String::from_utf8(http).unwrap()
    );
}
