#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use gcr_core::library::{load_library, ComponentLibrary};
use gcr_core::timeline::Command;
use gcr_core::tree::{StepId, MAIN_GOAL};
use gcr_core::Workspace;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn cpp_library() -> ComponentLibrary {
    load_library(&repo_root().join("library/cpp-console")).expect("cpp library loads")
}

pub fn python_library() -> ComponentLibrary {
    load_library(&repo_root().join("library/python-script")).expect("python library loads")
}

pub fn values(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn first_step(ws: &Workspace) -> StepId {
    let root = ws.state().goal(MAIN_GOAL).unwrap().root;
    ws.state().step(root).unwrap().children[0]
}

pub fn print_values(text: &str) -> BTreeMap<String, String> {
    values(&[("Page1_Text1", text)])
}

pub fn wait_values(seconds: &str) -> BTreeMap<String, String> {
    values(&[
        ("Page1_Message", ""),
        ("Page1_ClearBuffer", "0"),
        ("Page1_WaitSeconds", "1"),
        ("Page1_Seconds", seconds),
    ])
}

/// The Hello World session: print, then wait three seconds, both anchored
/// at the first step.
pub fn hello_world(library: ComponentLibrary) -> Workspace {
    let mut ws = Workspace::new("hello", library);
    let anchor = first_step(&ws);
    ws.execute(Command::Interaction {
        anchor,
        component: "print-text-console".into(),
        values: print_values("\"Hello World\""),
    })
    .unwrap();
    ws.execute(Command::Interaction {
        anchor,
        component: "wait-key-seconds".into(),
        values: wait_values("3"),
    })
    .unwrap();
    ws
}

pub fn labels(ws: &Workspace) -> Vec<String> {
    let s = ws.state();
    s.document_order()
        .into_iter()
        .map(|id| s.step(id).unwrap().label.clone())
        .collect()
}

#[allow(unused_imports)]
pub use gcr_core::testkit::{c_tokens, random_session};
