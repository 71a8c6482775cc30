//! Project files: the event log as JSON with a checksum of the final state
//! and an optional cache of snapshots.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::EngineError;
use crate::library::{load_library, ComponentLibrary, LibraryError};
use crate::timeline::{Event, Timeline};
use crate::tree::{Clipboard, ProjectState};
use crate::workspace::Workspace;

pub const FORMAT: &str = "gcr-project";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ProjectFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed project file: {0}")]
    Malformed(String),
    #[error("unsupported project format version {0}")]
    VersionUnsupported(u32),
    #[error("checksum mismatch: file says {expected}, replay gives {actual}")]
    ChecksumMismatch { expected: String, actual: String },
    #[error("project uses library {expected:?} but {found:?} was loaded")]
    LibraryMismatch { expected: String, found: String },
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl ProjectFileError {
    pub fn name(&self) -> &'static str {
        match self {
            ProjectFileError::Io { .. } => "IoError",
            ProjectFileError::Malformed(_) => "Malformed",
            ProjectFileError::VersionUnsupported(_) => "VersionUnsupported",
            ProjectFileError::ChecksumMismatch { .. } => "ChecksumMismatch",
            ProjectFileError::LibraryMismatch { .. } => "LibraryMismatch",
            ProjectFileError::Library(e) => e.name(),
            ProjectFileError::Engine(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryRef {
    pub id: String,
    /// Library directory, relative to the project file's directory when possible.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectFile {
    pub format: String,
    pub version: u32,
    pub project_id: String,
    pub library: LibraryRef,
    pub head: usize,
    pub events: Vec<Event>,
    pub checksum: String,
    #[serde(default)]
    pub snapshots: BTreeMap<usize, ProjectState>,
    #[serde(default)]
    pub clipboard: Option<Clipboard>,
}

/// `sha256:<hex>` of the state's JSON serialization.
pub fn state_checksum(state: &ProjectState) -> String {
    let json = serde_json::to_vec(state).expect("state serializes");
    let digest = Sha256::digest(&json);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ProjectFileError + '_ {
    move |source| ProjectFileError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Builds the file contents for a workspace.
pub fn to_project_file(
    ws: &Workspace,
    library_path: &str,
) -> Result<ProjectFile, ProjectFileError> {
    let timeline = ws.timeline();
    let final_state = timeline.state_at(timeline.len(), ws.library())?;
    Ok(ProjectFile {
        format: FORMAT.into(),
        version: VERSION,
        project_id: timeline.base().project_id.clone(),
        library: LibraryRef {
            id: ws.library().id.clone(),
            path: library_path.to_owned(),
        },
        head: timeline.head(),
        events: timeline.events().to_vec(),
        checksum: state_checksum(&final_state),
        snapshots: timeline.snapshots().clone(),
        clipboard: ws.clipboard().cloned(),
    })
}

pub fn to_json(file: &ProjectFile) -> String {
    let mut text = serde_json::to_string_pretty(file).expect("project file serializes");
    text.push('\n');
    text
}

/// Rebuilds a workspace from file contents against an already loaded
/// library. The log is replayed from scratch; cached snapshots that differ
/// from the replay are discarded.
pub fn from_project_file(
    file: ProjectFile,
    library: ComponentLibrary,
) -> Result<Workspace, ProjectFileError> {
    if file.format != FORMAT {
        return Err(ProjectFileError::Malformed(format!(
            "format {:?}",
            file.format
        )));
    }
    if file.version != VERSION {
        return Err(ProjectFileError::VersionUnsupported(file.version));
    }
    if file.library.id != library.id {
        return Err(ProjectFileError::LibraryMismatch {
            expected: file.library.id,
            found: library.id,
        });
    }
    let base = ProjectState::empty(file.project_id, library.id.clone());
    let mut timeline = Timeline::from_parts(base, file.events, file.head)?;
    let states = timeline.replay_all(&library)?;
    let actual = state_checksum(states.last().expect("base state present"));
    if actual != file.checksum {
        return Err(ProjectFileError::ChecksumMismatch {
            expected: file.checksum,
            actual,
        });
    }
    for (t, state) in states.into_iter().enumerate() {
        timeline.offer_snapshot(t, state);
    }
    Ok(Workspace::from_parts(library, timeline, file.clipboard)?)
}

pub fn parse_project_file(text: &str) -> Result<ProjectFile, ProjectFileError> {
    serde_json::from_str(text).map_err(|e| ProjectFileError::Malformed(e.to_string()))
}

/// The library directory recorded in a project file, resolved against the
/// project file's location.
pub fn resolve_library_dir(project_path: &Path, file: &ProjectFile) -> PathBuf {
    let lib = Path::new(&file.library.path);
    if lib.is_absolute() {
        lib.to_owned()
    } else {
        project_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(lib)
    }
}

/// How the library directory is written into a project file at `project_path`.
pub fn library_ref_path(project_path: &Path, library_dir: &Path) -> String {
    let dir = project_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let canon = |p: &Path| fs::canonicalize(p).unwrap_or_else(|_| p.to_owned());
    let (dir, lib) = (canon(dir), canon(library_dir));
    let rel = match lib.strip_prefix(&dir) {
        Ok(rest) => rest.to_owned(),
        Err(_) => {
            // Walk up from the project dir until the library is below.
            let mut up = PathBuf::new();
            let mut cur = dir.as_path();
            loop {
                if let Ok(rest) = lib.strip_prefix(cur) {
                    break up.join(rest);
                }
                match cur.parent() {
                    // Only a shared filesystem root: keep it absolute.
                    Some(p) if p.parent().is_some() => {
                        up.push("..");
                        cur = p;
                    }
                    _ => break lib.clone(),
                }
            }
        }
    };
    let s = rel.to_string_lossy().into_owned();
    if s.is_empty() {
        ".".into()
    } else {
        s
    }
}

pub fn save_project(
    ws: &Workspace,
    path: &Path,
    library_dir: &Path,
) -> Result<(), ProjectFileError> {
    let file = to_project_file(ws, &library_ref_path(path, library_dir))?;
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, to_json(&file)).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Loads a project file and the library it references. Returns the
/// workspace and the resolved library directory.
pub fn load_project(path: &Path) -> Result<(Workspace, PathBuf), ProjectFileError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let file = parse_project_file(&text)?;
    let dir = resolve_library_dir(path, &file);
    let library = load_library(&dir)?;
    Ok((from_project_file(file, library)?, dir))
}
