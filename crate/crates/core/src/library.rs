//! Component libraries: a directory of `*.gcrc` component files plus an
//! optional `library.gcrl` manifest (`id = ...`, `profile = ...`).

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::component::{
    parse_component_file, validate_component, Component, ComponentError, ValidationReport,
};

pub const MANIFEST_FILE: &str = "library.gcrl";
pub const COMPONENT_EXT: &str = "gcrc";
pub const DEFAULT_PROFILE: &str = "cpp-console";

#[derive(Debug, Error)]
pub enum LibraryError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{file}: {source}")]
    Component {
        file: PathBuf,
        #[source]
        source: ComponentError,
    },
    #[error("{file}: invalid component ({} finding(s))", report.findings.len())]
    Invalid {
        file: PathBuf,
        report: ValidationReport,
    },
    #[error("{file}: duplicate component id {id}")]
    DuplicateId { file: PathBuf, id: String },
    #[error("{file}: bad manifest line {line}")]
    Manifest { file: PathBuf, line: usize },
    #[error("unknown domain {0:?}")]
    UnknownDomain(String),
}

impl LibraryError {
    pub fn name(&self) -> &'static str {
        match self {
            LibraryError::Io { .. } => "IoError",
            LibraryError::Component { .. } => "ComponentError",
            LibraryError::Invalid { .. } => "ValidationError",
            LibraryError::DuplicateId { .. } => "DuplicateId",
            LibraryError::Manifest { .. } => "ManifestError",
            LibraryError::UnknownDomain(_) => "UnknownDomain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentLibrary {
    pub id: String,
    pub target_profile: String,
    components: Vec<Component>,
}

impl ComponentLibrary {
    /// Builds a library from already-parsed components. Later duplicates of an
    /// id are rejected.
    pub fn new(
        id: impl Into<String>,
        target_profile: impl Into<String>,
        components: Vec<Component>,
    ) -> Result<Self, String> {
        let mut seen = BTreeSet::new();
        for c in &components {
            if !seen.insert(c.id.as_str()) {
                return Err(c.id.clone());
            }
        }
        Ok(ComponentLibrary {
            id: id.into(),
            target_profile: target_profile.into(),
            components,
        })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn get(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn domains(&self) -> BTreeSet<&str> {
        self.components.iter().map(|c| c.domain.as_str()).collect()
    }

    /// Components whose name starts with `query` (case-insensitively),
    /// optionally restricted to one domain, sorted by name then id.
    pub fn find_components(
        &self,
        domain: Option<&str>,
        query: &str,
    ) -> Result<Vec<&Component>, LibraryError> {
        if let Some(d) = domain {
            if !self.domains().contains(d) {
                return Err(LibraryError::UnknownDomain(d.to_owned()));
            }
        }
        let needle = query.to_lowercase();
        let mut hits: Vec<&Component> = self
            .components
            .iter()
            .filter(|c| domain.is_none_or(|d| c.domain == d))
            .filter(|c| c.name.to_lowercase().starts_with(&needle))
            .collect();
        hits.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.id.cmp(&b.id)));
        Ok(hits)
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> LibraryError + '_ {
    move |source| LibraryError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Loads every component file in `dir`. Any file that fails to parse or
/// validate aborts the load.
pub fn load_library(dir: &Path) -> Result<ComponentLibrary, LibraryError> {
    let manifest = dir.join(MANIFEST_FILE);
    let mut id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "library".into());
    let mut profile = DEFAULT_PROFILE.to_owned();
    if manifest.exists() {
        let text = fs::read_to_string(&manifest).map_err(io_err(&manifest))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || LibraryError::Manifest {
                file: manifest.clone(),
                line: i + 1,
            };
            let (k, v) = line.split_once('=').ok_or_else(bad)?;
            match k.trim() {
                "id" => id = v.trim().to_owned(),
                "profile" => profile = v.trim().to_owned(),
                _ => return Err(bad()),
            }
        }
    }

    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .map(|e| e.map(|e| e.path()).map_err(io_err(dir)))
        .collect::<Result<_, _>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == COMPONENT_EXT));
    files.sort();

    let mut components: Vec<Component> = Vec::with_capacity(files.len());
    for file in files {
        let text = fs::read_to_string(&file).map_err(io_err(&file))?;
        let component = parse_component_file(&text).map_err(|source| LibraryError::Component {
            file: file.clone(),
            source,
        })?;
        let report = validate_component(&component);
        if !report.is_clean() {
            return Err(LibraryError::Invalid { file, report });
        }
        if components.iter().any(|c| c.id == component.id) {
            return Err(LibraryError::DuplicateId {
                file,
                id: component.id,
            });
        }
        components.push(component);
    }
    Ok(ComponentLibrary {
        id,
        target_profile: profile,
        components,
    })
}
