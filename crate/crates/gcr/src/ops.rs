//! Operations shared by the command line and the HTTP service, so both
//! surfaces drive the engine the same way.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gcr_core::component::Component;
use gcr_core::emit::{EmitError, TargetProfile};
use gcr_core::interaction::default_values;
use gcr_core::library::{load_library, LibraryError};
use gcr_core::project_file::{load_project, save_project, ProjectFileError};
use gcr_core::timeline::{Command, ResultIds};
use gcr_core::tree::{BatchOp, Direction, ProjectState, SearchScope, StepKind};
use gcr_core::{EngineError, InteractionId, StepId, Workspace};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Project(#[from] ProjectFileError),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("port {0} is already in use")]
    PortInUse(u16),
}

impl ServiceError {
    pub fn name(&self) -> &'static str {
        match self {
            ServiceError::Engine(e) => e.name(),
            ServiceError::Project(e) => e.name(),
            ServiceError::Library(e) => e.name(),
            ServiceError::Emit(e) => e.name(),
            ServiceError::BadRequest(_) => "BadRequest",
            ServiceError::PortInUse(_) => "PortInUse",
        }
    }
}

pub type ServiceResult<T> = Result<T, ServiceError>;

/// A workspace bound to its project file.
#[derive(Debug)]
pub struct Project {
    pub ws: Workspace,
    pub path: PathBuf,
    pub library_dir: PathBuf,
}

impl Project {
    pub fn create(path: &Path, library_dir: &Path) -> ServiceResult<Self> {
        let library = load_library(library_dir)?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "project".into());
        let project = Project {
            ws: Workspace::new(id, library),
            path: path.to_owned(),
            library_dir: library_dir.to_owned(),
        };
        project.save()?;
        Ok(project)
    }

    pub fn open(path: &Path) -> ServiceResult<Self> {
        let (ws, library_dir) = load_project(path)?;
        Ok(Project {
            ws,
            path: path.to_owned(),
            library_dir,
        })
    }

    pub fn save(&self) -> ServiceResult<()> {
        save_project(&self.ws, &self.path, &self.library_dir)?;
        Ok(())
    }

    pub fn profile(&self, name: Option<&str>) -> ServiceResult<TargetProfile> {
        Ok(TargetProfile::builtin(
            name.unwrap_or(&self.ws.library().target_profile),
        )?)
    }
}

/// Edits of the steps tree, as accepted by `POST /tree/ops`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum TreeOp {
    AddComment { parent: StepId, label: String },
    Edit { step: StepId, label: String },
    Delete { steps: Vec<StepId> },
    Move { step: StepId, direction: Direction },
    Enable { steps: Vec<StepId> },
    Disable { steps: Vec<StepId> },
    Cut { steps: Vec<StepId> },
    Copy { steps: Vec<StepId> },
    Paste { target: StepId },
    Search { query: String, scope: SearchScope },
    AddGoal { name: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpOutcome {
    pub steps: Vec<StepId>,
    pub interactions: Vec<InteractionId>,
    /// Search hits, for `search`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hits: Option<Vec<StepId>>,
}

impl From<ResultIds> for OpOutcome {
    fn from(ids: ResultIds) -> Self {
        OpOutcome {
            steps: ids.steps,
            interactions: ids.interactions,
            hits: None,
        }
    }
}

impl TreeOp {
    /// Whether the op changes the project file.
    pub fn mutates(&self) -> bool {
        !matches!(self, TreeOp::Search { .. })
    }
}

fn many(steps: &[StepId], single: impl FnOnce(StepId) -> Command, op: BatchOp) -> Command {
    match steps {
        [one] => single(*one),
        _ => Command::Batch {
            steps: steps.to_vec(),
            op,
        },
    }
}

pub fn apply_tree_op(project: &mut Project, op: &TreeOp) -> ServiceResult<OpOutcome> {
    let ws = &mut project.ws;
    let ids = match op {
        TreeOp::AddComment { parent, label } => ws.execute(Command::AddComment {
            parent: *parent,
            label: label.clone(),
        })?,
        TreeOp::Edit { step, label } => ws.execute(Command::EditLabel {
            step: *step,
            label: label.clone(),
        })?,
        TreeOp::Delete { steps } => ws.execute(many(
            steps,
            |step| Command::DeleteStep { step },
            BatchOp::Delete,
        ))?,
        TreeOp::Move { step, direction } => ws.execute(Command::MoveStep {
            step: *step,
            direction: *direction,
        })?,
        TreeOp::Enable { steps } => ws.execute(many(
            steps,
            |step| Command::SetEnabled {
                step,
                enabled: true,
            },
            BatchOp::Enable,
        ))?,
        TreeOp::Disable { steps } => ws.execute(many(
            steps,
            |step| Command::SetEnabled {
                step,
                enabled: false,
            },
            BatchOp::Disable,
        ))?,
        TreeOp::Cut { steps } => ws.execute(Command::ClipboardCut {
            steps: steps.clone(),
        })?,
        TreeOp::Copy { steps } => {
            ws.copy(steps)?;
            ResultIds::default()
        }
        TreeOp::Paste { target } => ws.paste(*target)?,
        TreeOp::Search { query, scope } => {
            return Ok(OpOutcome {
                hits: Some(ws.state().search_steps(query, *scope)),
                ..OpOutcome::default()
            })
        }
        TreeOp::AddGoal { name } => ws.execute(Command::AddGoal { name: name.clone() })?,
    };
    project.save()?;
    Ok(ids.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractRequest {
    pub component: String,
    #[serde(default)]
    pub anchor: Option<StepId>,
    /// Control values; controls left out take their defaults.
    #[serde(default)]
    pub values: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifyRequest {
    /// Changed control values; the rest keep their current values.
    #[serde(default)]
    pub values: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionOutcome {
    pub interaction: InteractionId,
    pub steps: Vec<StepView>,
}

fn interaction_outcome(ws: &Workspace, iid: InteractionId) -> InteractionOutcome {
    let state = ws.state();
    let steps = state
        .interaction(iid)
        .map(|r| {
            r.generated
                .iter()
                .flatten()
                .filter_map(|id| state.step(*id).ok())
                .map(|s| StepView::flat(state, s.id))
                .collect()
        })
        .unwrap_or_default();
    InteractionOutcome {
        interaction: iid,
        steps,
    }
}

pub fn interact(project: &mut Project, req: &InteractRequest) -> ServiceResult<InteractionOutcome> {
    let ws = &mut project.ws;
    let component = ws
        .library()
        .get(&req.component)
        .ok_or_else(|| EngineError::UnknownComponent(req.component.clone()))?;
    let mut values = default_values(component);
    values.extend(req.values.clone());
    let anchor = req.anchor.unwrap_or_else(|| ws.default_anchor());
    let ids = ws.execute(Command::Interaction {
        anchor,
        component: req.component.clone(),
        values,
    })?;
    project.save()?;
    let iid = ids.interactions[0];
    Ok(interaction_outcome(&project.ws, iid))
}

pub fn modify(
    project: &mut Project,
    interaction: InteractionId,
    req: &ModifyRequest,
) -> ServiceResult<InteractionOutcome> {
    let ws = &mut project.ws;
    let rec = ws
        .state()
        .interaction(interaction)
        .filter(|r| !r.tombstoned)
        .ok_or(EngineError::UnknownInteraction(interaction))?;
    let mut values = rec.page_values.clone();
    values.extend(req.values.clone());
    ws.execute(Command::ModifyInteraction {
        interaction,
        values,
    })?;
    project.save()?;
    Ok(interaction_outcome(&project.ws, interaction))
}

pub fn delete_interaction(project: &mut Project, interaction: InteractionId) -> ServiceResult<()> {
    project
        .ws
        .execute(Command::DeleteInteraction { interaction })?;
    project.save()
}

pub fn seek(project: &mut Project, t: usize) -> ServiceResult<usize> {
    project.ws.seek(t)?;
    project.save()?;
    Ok(project.ws.head())
}

/// Parses `NAME=VALUE`.
pub fn parse_assignment(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub id: String,
    pub name: String,
    pub domain: String,
}

impl From<&Component> for ComponentSummary {
    fn from(c: &Component) -> Self {
        ComponentSummary {
            id: c.id.clone(),
            name: c.name.clone(),
            domain: c.domain.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepView {
    pub id: StepId,
    pub label: String,
    pub kind: StepKind,
    pub enabled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction: Option<InteractionId>,
    pub code: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<StepView>,
}

impl StepView {
    fn flat(state: &ProjectState, id: StepId) -> Self {
        let s = state.step(id).expect("step exists");
        StepView {
            id,
            label: s.label.clone(),
            kind: s.kind,
            enabled: s.enabled,
            interaction: s.interaction,
            code: s.code.clone(),
            children: Vec::new(),
        }
    }

    fn nested(state: &ProjectState, id: StepId) -> Self {
        let mut view = Self::flat(state, id);
        view.children = state
            .step(id)
            .expect("step exists")
            .children
            .iter()
            .map(|c| Self::nested(state, *c))
            .collect();
        view
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalView {
    pub name: String,
    pub root: StepView,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeView {
    pub head: usize,
    pub length: usize,
    pub goals: Vec<GoalView>,
}

pub fn tree_view(ws: &Workspace) -> TreeView {
    let state = ws.state();
    TreeView {
        head: ws.head(),
        length: ws.timeline().len(),
        goals: state
            .goals()
            .iter()
            .map(|g| GoalView {
                name: g.name.clone(),
                root: StepView::nested(state, g.root),
            })
            .collect(),
    }
}

/// Indented text rendering: `id label`, with disabled steps marked.
pub fn tree_text(ws: &Workspace) -> String {
    fn walk(out: &mut String, v: &StepView, depth: usize) {
        let off = if v.enabled { "" } else { " [disabled]" };
        let _ = writeln!(out, "{}{} {}{off}", "  ".repeat(depth), v.id, v.label);
        for c in &v.children {
            walk(out, c, depth + 1);
        }
    }
    let mut out = String::new();
    for g in tree_view(ws).goals {
        let _ = writeln!(out, "goal {}", g.name);
        walk(&mut out, &g.root, 1);
    }
    out
}
