//! Source emission from the steps tree.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::EngineError;
use crate::tree::{ProjectState, StepId, StepKind};

pub const SPANS_FILE: &str = "stepspans.tsv";

#[derive(Debug, Error)]
pub enum EmitError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("unknown target profile {0:?}")]
    UnknownProfile(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("profile {0:?} has no run command")]
    NotRunnable(String),
    #[error("required tool {0:?} not found on PATH")]
    ToolchainMissing(String),
    #[error("program exited with {status}: {stderr}")]
    NonZeroExit { status: i32, stderr: String },
}

impl EmitError {
    pub fn name(&self) -> &'static str {
        match self {
            EmitError::Engine(e) => e.name(),
            EmitError::UnknownProfile(_) => "UnknownProfile",
            EmitError::Io { .. } => "IoError",
            EmitError::NotRunnable(_) => "NotRunnable",
            EmitError::ToolchainMissing(_) => "ToolchainMissing",
            EmitError::NonZeroExit { .. } => "NonZeroExit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSpec {
    /// Command line; `{file}` is replaced by the main file name.
    pub argv: Vec<String>,
    pub requires: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetProfile {
    pub name: String,
    pub extension: String,
    pub comment_prefix: String,
    pub header: Vec<String>,
    pub footer: Vec<String>,
    pub run: Option<RunSpec>,
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

impl TargetProfile {
    pub fn cpp_console() -> Self {
        TargetProfile {
            name: "cpp-console".into(),
            extension: "cpp".into(),
            comment_prefix: "// ".into(),
            header: strings(&[
                "#include \"iostream\"",
                "#include \"cstdio\"",
                "#include \"string\"",
                "#include \"thread\"",
                "#include \"chrono\"",
                "using namespace std ;",
                "",
                "int main()",
                "{",
            ]),
            footer: strings(&["return 0 ;", "}"]),
            run: Some(RunSpec {
                argv: strings(&["sh", "-c", "g++ -std=c++17 -o prog {file} && ./prog"]),
                requires: strings(&["sh", "g++"]),
            }),
        }
    }

    pub fn python_script() -> Self {
        TargetProfile {
            name: "python-script".into(),
            extension: "py".into(),
            comment_prefix: "# ".into(),
            header: strings(&["import time", ""]),
            footer: Vec::new(),
            run: Some(RunSpec {
                argv: strings(&["python3", "{file}"]),
                requires: strings(&["python3"]),
            }),
        }
    }

    pub fn builtin(name: &str) -> Result<Self, EmitError> {
        match name {
            "cpp-console" => Ok(Self::cpp_console()),
            "python-script" => Ok(Self::python_script()),
            other => Err(EmitError::UnknownProfile(other.to_owned())),
        }
    }

    pub fn builtin_names() -> [&'static str; 2] {
        ["cpp-console", "python-script"]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmittedFile {
    pub path: String,
    pub text: String,
}

/// Lines `start_line..=end_line` (1-based) of `file` come from `step`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSpan {
    pub step: StepId,
    pub file: String,
    pub start_line: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmittedProgram {
    pub files: Vec<EmittedFile>,
    pub step_spans: Vec<StepSpan>,
}

impl EmittedProgram {
    pub fn file(&self, path: &str) -> Option<&EmittedFile> {
        self.files.iter().find(|f| f.path == path)
    }

    /// The sidecar map, one `step\tfile\tstart\tend` line per span.
    pub fn spans_tsv(&self) -> String {
        self.step_spans
            .iter()
            .map(|s| format!("{}\t{}\t{}\t{}\n", s.step, s.file, s.start_line, s.end_line))
            .collect()
    }
}

/// Lines a single step contributes itself (children excluded).
fn own_lines(state: &ProjectState, id: StepId, profile: &TargetProfile) -> Vec<String> {
    let step = state.step(id).expect("walked step exists");
    match step.kind {
        StepKind::Root => Vec::new(),
        StepKind::Comment => vec![format!("{}{}", profile.comment_prefix, step.label)],
        StepKind::Generated => step.code.clone(),
    }
}

/// Emits one goal as one file.
pub fn emit_program(
    state: &ProjectState,
    goal: &str,
    profile: &TargetProfile,
) -> Result<EmittedProgram, EngineError> {
    let root = state.goal(goal)?.root;
    let path = format!("{goal}.{}", profile.extension);
    let mut lines: Vec<String> = profile.header.clone();
    let mut spans = Vec::new();
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        let step = state.step(id)?;
        if !step.enabled {
            continue;
        }
        let own = own_lines(state, id, profile);
        if !own.is_empty() {
            spans.push(StepSpan {
                step: id,
                file: path.clone(),
                start_line: lines.len() + 1,
                end_line: lines.len() + own.len(),
            });
            lines.extend(own);
        }
        stack.extend(step.children.iter().rev());
    }
    lines.extend(profile.footer.iter().cloned());
    let mut text = lines.join("\n");
    text.push('\n');
    Ok(EmittedProgram {
        files: vec![EmittedFile { path, text }],
        step_spans: spans,
    })
}

/// Emits every goal, one file each, in goal order.
pub fn emit_all(
    state: &ProjectState,
    profile: &TargetProfile,
) -> Result<EmittedProgram, EngineError> {
    let mut all = EmittedProgram::default();
    for goal in state.goals() {
        let p = emit_program(state, &goal.name, profile)?;
        all.files.extend(p.files);
        all.step_spans.extend(p.step_spans);
    }
    Ok(all)
}

/// The step's own code lines joined with newlines; empty for comments.
pub fn code_behind_step(state: &ProjectState, id: StepId) -> Result<String, EngineError> {
    Ok(state.step(id)?.code.join("\n"))
}

fn write_file(path: &Path, text: &str) -> Result<(), EmitError> {
    fs::write(path, text).map_err(|source| EmitError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes every goal's file plus the span sidecar into `dest`.
pub fn extract_all(
    state: &ProjectState,
    profile: &TargetProfile,
    dest: &Path,
) -> Result<EmittedProgram, EmitError> {
    let program = emit_all(state, profile)?;
    fs::create_dir_all(dest).map_err(|source| EmitError::Io {
        path: dest.to_owned(),
        source,
    })?;
    for f in &program.files {
        write_file(&dest.join(&f.path), &f.text)?;
    }
    write_file(&dest.join(SPANS_FILE), &program.spans_tsv())?;
    Ok(program)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
}

fn on_path(tool: &str) -> bool {
    std::env::var_os("PATH")
        .is_some_and(|paths| std::env::split_paths(&paths).any(|dir| dir.join(tool).is_file()))
}

/// Writes the program to a scratch directory and runs the profile's command
/// on its first file.
pub fn run_program(
    program: &EmittedProgram,
    profile: &TargetProfile,
) -> Result<RunOutput, EmitError> {
    let spec = profile
        .run
        .as_ref()
        .ok_or_else(|| EmitError::NotRunnable(profile.name.clone()))?;
    if let Some(missing) = spec.requires.iter().find(|t| !on_path(t)) {
        return Err(EmitError::ToolchainMissing(missing.clone()));
    }
    let main = program
        .files
        .first()
        .ok_or_else(|| EmitError::NotRunnable(profile.name.clone()))?;
    let dir = tempfile::tempdir().map_err(|source| EmitError::Io {
        path: std::env::temp_dir(),
        source,
    })?;
    for f in &program.files {
        write_file(&dir.path().join(&f.path), &f.text)?;
    }
    let argv: Vec<String> = spec
        .argv
        .iter()
        .map(|a| a.replace("{file}", &main.path))
        .collect();
    let output = Command::new(&argv[0])
        .args(&argv[1..])
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .output()
        .map_err(|source| EmitError::Io {
            path: PathBuf::from(&argv[0]),
            source,
        })?;
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
    if !output.status.success() {
        return Err(EmitError::NonZeroExit {
            status: output.status.code().unwrap_or(-1),
            stderr,
        });
    }
    Ok(RunOutput { stdout, stderr })
}
