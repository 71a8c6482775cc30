#![allow(dead_code)]

use std::path::{Path, PathBuf};

use gcr::ops::{InteractRequest, ModifyRequest, Project, TreeOp};
use gcr::server::{self, RunningServer};
use gcr_core::tree::{Direction, SearchScope};
use gcr_core::{InteractionId, StepId};
use serde_json::{json, Value};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn library_dir() -> PathBuf {
    std::fs::canonicalize(repo_root().join("library/cpp-console")).unwrap()
}

/// Runs the CLI in-process. Returns (status, stdout, stderr).
pub fn cli(project: &Path, args: &[&str]) -> (i32, String, String) {
    let mut argv = vec![
        "gcr".to_owned(),
        "--project".to_owned(),
        project.display().to_string(),
    ];
    argv.extend(args.iter().map(|a| a.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = gcr::cli::run_with_io(&argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

/// Runs the CLI and expects success.
pub fn ok(project: &Path, args: &[&str]) -> String {
    let (code, out, err) = cli(project, args);
    assert_eq!(code, 0, "gcr {args:?} failed: {err}");
    out
}

pub fn new_project(dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(name);
    let lib = library_dir();
    ok(
        &path,
        &[
            "new",
            path.to_str().unwrap(),
            "--library",
            lib.to_str().unwrap(),
        ],
    );
    path
}

pub struct Http {
    pub base: String,
    pub client: reqwest::blocking::Client,
    server: Option<RunningServer>,
}

impl Http {
    pub fn serve(project: &Path) -> Http {
        let server = server::start(Project::open(project).unwrap(), "127.0.0.1:0").unwrap();
        Http {
            base: format!("http://{}", server.addr),
            client: reqwest::blocking::Client::new(),
            server: Some(server),
        }
    }

    pub fn get(&self, path: &str) -> (u16, Value) {
        let r = self
            .client
            .get(format!("{}{path}", self.base))
            .send()
            .unwrap();
        (r.status().as_u16(), r.json().unwrap_or(Value::Null))
    }

    pub fn send(&self, method: reqwest::Method, path: &str, body: Option<Value>) -> (u16, Value) {
        let mut req = self.client.request(method, format!("{}{path}", self.base));
        if let Some(b) = body {
            req = req.json(&b);
        }
        let r = req.send().unwrap();
        (r.status().as_u16(), r.json().unwrap_or(Value::Null))
    }

    pub fn post(&self, path: &str, body: Value) -> (u16, Value) {
        self.send(reqwest::Method::POST, path, Some(body))
    }

    pub fn stop(mut self) {
        if let Some(s) = self.server.take() {
            s.stop();
        }
    }
}

impl Drop for Http {
    fn drop(&mut self) {
        if let Some(s) = self.server.take() {
            s.stop();
        }
    }
}

/// One operation of the parity script.
#[derive(Debug, Clone)]
pub enum Op {
    Interact(InteractRequest),
    Modify(InteractionId, ModifyRequest),
    DeleteInteraction(InteractionId),
    Tree(TreeOp),
    Replay(usize),
}

fn vals(pairs: &[(&str, &str)]) -> std::collections::BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn interact(component: &str, anchor: Option<u64>, pairs: &[(&str, &str)]) -> Op {
    Op::Interact(InteractRequest {
        component: component.into(),
        anchor: anchor.map(StepId),
        values: vals(pairs),
    })
}

/// Twenty operations touching every kind of edit. Step ids follow from
/// the order: 1 root, 2 first step, then one id per new step.
pub fn parity_script() -> Vec<Op> {
    use TreeOp::*;
    vec![
        interact(
            "print-text-console",
            None,
            &[("Page1_Text1", "\"Hello World\"")],
        ),
        interact(
            "wait-key-seconds",
            None,
            &[("Page1_WaitSeconds", "1"), ("Page1_Seconds", "3")],
        ),
        Op::Tree(AddComment {
            parent: StepId(2),
            label: "a note".into(),
        }),
        Op::Tree(Edit {
            step: StepId(5),
            label: "renamed note".into(),
        }),
        Op::Tree(Move {
            step: StepId(5),
            direction: Direction::Up,
        }),
        Op::Tree(Disable {
            steps: vec![StepId(3)],
        }),
        Op::Tree(Enable {
            steps: vec![StepId(3)],
        }),
        interact(
            "for-loop",
            Some(2),
            &[
                ("Page1_Variable", "i"),
                ("Page1_From", "1"),
                ("Page1_To", "3"),
            ],
        ),
        interact("print-number", Some(7), &[("Page1_Value", "i")]),
        Op::Modify(
            InteractionId(1),
            ModifyRequest {
                values: vals(&[("Page1_Text1", "\"Hi\"")]),
            },
        ),
        Op::Tree(Copy {
            steps: vec![StepId(3)],
        }),
        Op::Tree(Paste { target: StepId(2) }),
        Op::Tree(Cut {
            steps: vec![StepId(4)],
        }),
        Op::Tree(Paste { target: StepId(2) }),
        Op::Tree(AddGoal {
            name: "second".into(),
        }),
        Op::Tree(Delete {
            steps: vec![StepId(5), StepId(10)],
        }),
        Op::Tree(Search {
            query: "print".into(),
            scope: SearchScope::Name,
        }),
        Op::DeleteInteraction(InteractionId(2)),
        Op::Replay(10),
        Op::Tree(AddComment {
            parent: StepId(2),
            label: "after rewind".into(),
        }),
    ]
}

fn ids(steps: &[StepId]) -> Vec<String> {
    steps
        .iter()
        .flat_map(|s| ["--step".to_owned(), s.to_string()])
        .collect()
}

fn sets(values: &std::collections::BTreeMap<String, String>) -> Vec<String> {
    values
        .iter()
        .flat_map(|(k, v)| ["--set".to_owned(), format!("{k}={v}")])
        .collect()
}

/// The command line for one operation.
pub fn cli_args(op: &Op) -> Vec<String> {
    let s = |x: &str| x.to_owned();
    match op {
        Op::Interact(r) => {
            let mut a = vec![s("interact"), s("--component"), r.component.clone()];
            if let Some(anchor) = r.anchor {
                a.extend([s("--anchor"), anchor.to_string()]);
            }
            a.extend(sets(&r.values));
            a
        }
        Op::Modify(id, r) => {
            let mut a = vec![s("modify"), s("--interaction"), id.to_string()];
            a.extend(sets(&r.values));
            a
        }
        Op::DeleteInteraction(id) => {
            vec![s("delete-interaction"), s("--interaction"), id.to_string()]
        }
        Op::Replay(t) => vec![s("replay"), s("--to"), t.to_string()],
        Op::Tree(t) => {
            let mut a = vec![s("tree"), s("op")];
            match t {
                TreeOp::AddComment { parent, label } => a.extend([
                    s("add-comment"),
                    s("--parent"),
                    parent.to_string(),
                    s("--label"),
                    label.clone(),
                ]),
                TreeOp::Edit { step, label } => a.extend([
                    s("edit"),
                    s("--step"),
                    step.to_string(),
                    s("--label"),
                    label.clone(),
                ]),
                TreeOp::Move { step, direction } => a.extend([
                    s("move"),
                    s("--step"),
                    step.to_string(),
                    s("--direction"),
                    s(match direction {
                        Direction::Up => "up",
                        Direction::Down => "down",
                    }),
                ]),
                TreeOp::Delete { steps } => {
                    a.extend(std::iter::once(s("delete")).chain(ids(steps)))
                }
                TreeOp::Enable { steps } => {
                    a.extend(std::iter::once(s("enable")).chain(ids(steps)))
                }
                TreeOp::Disable { steps } => {
                    a.extend(std::iter::once(s("disable")).chain(ids(steps)))
                }
                TreeOp::Cut { steps } => a.extend(std::iter::once(s("cut")).chain(ids(steps))),
                TreeOp::Copy { steps } => a.extend(std::iter::once(s("copy")).chain(ids(steps))),
                TreeOp::Paste { target } => {
                    a.extend([s("paste"), s("--target"), target.to_string()])
                }
                TreeOp::Search { query, scope } => a.extend([
                    s("search"),
                    s("--query"),
                    query.clone(),
                    s("--scope"),
                    s(match scope {
                        SearchScope::Name => "name",
                        SearchScope::Data => "data",
                    }),
                ]),
                TreeOp::AddGoal { name } => return vec![s("goal"), s("add"), name.clone()],
            }
            a
        }
    }
}

/// Sends one operation over HTTP; returns the status code.
pub fn http_send(http: &Http, op: &Op) -> (u16, Value) {
    use reqwest::Method;
    match op {
        Op::Interact(r) => http.post("/interactions", serde_json::to_value(r).unwrap()),
        Op::Modify(id, r) => http.send(
            Method::PUT,
            &format!("/interactions/{id}"),
            Some(serde_json::to_value(r).unwrap()),
        ),
        Op::DeleteInteraction(id) => {
            http.send(Method::DELETE, &format!("/interactions/{id}"), None)
        }
        Op::Replay(t) => http.post("/timeline/seek", json!({ "t": t })),
        Op::Tree(t) => http.post("/tree/ops", serde_json::to_value(t).unwrap()),
    }
}

/// Runs the script through the CLI against a fresh project `name` in `dir`.
pub fn run_script_cli(dir: &Path, name: &str) -> Vec<u8> {
    let path = new_project(dir, name);
    for op in parity_script() {
        let args = cli_args(&op);
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        ok(&path, &refs);
    }
    std::fs::read(&path).unwrap()
}

/// Runs the script over HTTP against a fresh project `name` in `dir`.
pub fn run_script_http(dir: &Path, name: &str) -> Vec<u8> {
    let path = dir.join(name);
    Project::create(&path, &library_dir()).unwrap();
    let http = Http::serve(&path);
    for op in parity_script() {
        let (status, body) = http_send(&http, &op);
        assert!((200..300).contains(&status), "{op:?} -> {status} {body}");
    }
    http.stop();
    std::fs::read(&path).unwrap()
}
