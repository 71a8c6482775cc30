//! A project: library, timeline, the state at the head and the clipboard.

use crate::emit::{emit_all, emit_program, EmittedProgram, TargetProfile};
use crate::error::{EngineError, Result};
use crate::fault::FaultPlan;
use crate::interaction::PendingInteraction;
use crate::library::ComponentLibrary;
use crate::timeline::{
    apply_command, clipboard_after, play_movie, Command, MovieFrame, ResultIds, Timeline,
};
use crate::tree::{BatchOp, Clipboard, ProjectState, StepId, FIRST_STEP_LABEL, MAIN_GOAL};

#[derive(Debug, Clone)]
pub struct Workspace {
    library: ComponentLibrary,
    timeline: Timeline,
    state: ProjectState,
    clipboard: Option<Clipboard>,
}

impl Workspace {
    /// A new project whose first event adds "The First Step" under the root.
    pub fn new(project_id: impl Into<String>, library: ComponentLibrary) -> Self {
        let base = ProjectState::empty(project_id, library.id.clone());
        let root = base.goal(MAIN_GOAL).expect("fresh project has main").root;
        let mut ws = Workspace {
            library,
            timeline: Timeline::new(base.clone()),
            state: base,
            clipboard: None,
        };
        ws.execute(Command::AddComment {
            parent: root,
            label: FIRST_STEP_LABEL.into(),
        })
        .expect("first step always applies");
        ws
    }

    /// Reassembles a workspace; the live state is replayed up to the head.
    pub fn from_parts(
        library: ComponentLibrary,
        timeline: Timeline,
        clipboard: Option<Clipboard>,
    ) -> Result<Self> {
        let state = timeline.state_at(timeline.head(), &library)?;
        Ok(Workspace {
            library,
            timeline,
            state,
            clipboard,
        })
    }

    pub fn library(&self) -> &ComponentLibrary {
        &self.library
    }

    pub fn timeline(&self) -> &Timeline {
        &self.timeline
    }

    pub fn state(&self) -> &ProjectState {
        &self.state
    }

    pub fn clipboard(&self) -> Option<&Clipboard> {
        self.clipboard.as_ref()
    }

    pub fn head(&self) -> usize {
        self.timeline.head()
    }

    /// The step new interactions attach to when none is given: the first
    /// child of the main goal's root, or the root itself.
    pub fn default_anchor(&self) -> StepId {
        let goal = &self.state.goals()[0];
        let root = self.state.step(goal.root).expect("root exists");
        root.children.first().copied().unwrap_or(goal.root)
    }

    pub fn execute(&mut self, command: Command) -> Result<ResultIds> {
        self.execute_with(command, &mut FaultPlan::none())
    }

    /// Applies and records a command. Nothing changes on error. A copy batch
    /// only fills the clipboard and is not recorded.
    pub fn execute_with(&mut self, command: Command, faults: &mut FaultPlan) -> Result<ResultIds> {
        if let Command::Batch {
            steps,
            op: BatchOp::Copy,
        } = &command
        {
            self.copy(steps)?;
            return Ok(ResultIds::default());
        }
        let applied = apply_command(&self.state, &command, &self.library, faults)?;
        self.clipboard = clipboard_after(self.clipboard.take(), &command, &applied);
        self.timeline
            .record(command, applied.result_ids.clone(), &applied.state);
        self.state = applied.state;
        Ok(applied.result_ids)
    }

    pub fn copy(&mut self, steps: &[StepId]) -> Result<()> {
        self.clipboard = Some(self.state.clipboard_copy(steps)?);
        Ok(())
    }

    /// Pastes the clipboard as the last children of `target`.
    pub fn paste(&mut self, target: StepId) -> Result<ResultIds> {
        let clipboard = self.clipboard.clone().ok_or(EngineError::EmptyClipboard)?;
        self.execute(Command::Paste { target, clipboard })
    }

    pub fn begin_interaction(&self, anchor: StepId, component: &str) -> Result<PendingInteraction> {
        self.state
            .begin_interaction(&self.library, anchor, component)
    }

    /// Moves the head; the live state becomes the replayed state at `t`.
    pub fn seek(&mut self, t: usize) -> Result<()> {
        let state = self.timeline.state_at(t, &self.library)?;
        self.timeline.set_head(t)?;
        self.state = state;
        Ok(())
    }

    pub fn state_at(&self, t: usize) -> Result<ProjectState> {
        self.timeline.state_at(t, &self.library)
    }

    pub fn movie(&self, from: usize) -> Result<Vec<MovieFrame>> {
        play_movie(&self.timeline, from, &self.library)
    }

    pub fn emit(&self, goal: &str, profile: &TargetProfile) -> Result<EmittedProgram> {
        emit_program(&self.state, goal, profile)
    }

    pub fn emit_all(&self, profile: &TargetProfile) -> Result<EmittedProgram> {
        emit_all(&self.state, profile)
    }
}
