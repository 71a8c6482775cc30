//! Commands, events and the replayable timeline.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::fault::FaultPlan;
use crate::library::ComponentLibrary;
use crate::tree::{BatchOp, ClipMode, Clipboard, Direction, InteractionId, ProjectState, StepId};

/// Snapshot interval for replay.
pub const SNAPSHOT_EVERY: usize = 25;

/// A mutating operation with everything needed to replay it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Command {
    AddGoal {
        name: String,
    },
    AddComment {
        parent: StepId,
        label: String,
    },
    EditLabel {
        step: StepId,
        label: String,
    },
    DeleteStep {
        step: StepId,
    },
    MoveStep {
        step: StepId,
        direction: Direction,
    },
    SetEnabled {
        step: StepId,
        enabled: bool,
    },
    Interaction {
        anchor: StepId,
        component: String,
        values: BTreeMap<String, String>,
    },
    ModifyInteraction {
        interaction: InteractionId,
        values: BTreeMap<String, String>,
    },
    DeleteInteraction {
        interaction: InteractionId,
    },
    ClipboardCut {
        steps: Vec<StepId>,
    },
    Paste {
        target: StepId,
        clipboard: Clipboard,
    },
    Batch {
        steps: Vec<StepId>,
        op: BatchOp,
    },
}

impl Command {
    pub fn kind(&self) -> &'static str {
        match self {
            Command::AddGoal { .. } => "addGoal",
            Command::AddComment { .. } => "addComment",
            Command::EditLabel { .. } => "editLabel",
            Command::DeleteStep { .. } => "deleteStep",
            Command::MoveStep { .. } => "moveStep",
            Command::SetEnabled { .. } => "setEnabled",
            Command::Interaction { .. } => "interaction",
            Command::ModifyInteraction { .. } => "modifyInteraction",
            Command::DeleteInteraction { .. } => "deleteInteraction",
            Command::ClipboardCut { .. } => "clipboardCut",
            Command::Paste { .. } => "paste",
            Command::Batch { .. } => "batch",
        }
    }

    /// The step the editor has selected when the command is issued.
    pub fn focus(&self) -> Option<StepId> {
        match self {
            Command::AddComment { parent, .. } => Some(*parent),
            Command::EditLabel { step, .. }
            | Command::DeleteStep { step }
            | Command::MoveStep { step, .. }
            | Command::SetEnabled { step, .. } => Some(*step),
            Command::Interaction { anchor, .. } => Some(*anchor),
            Command::Paste { target, .. } => Some(*target),
            Command::ClipboardCut { steps } | Command::Batch { steps, .. } => {
                steps.first().copied()
            }
            Command::AddGoal { .. }
            | Command::ModifyInteraction { .. }
            | Command::DeleteInteraction { .. } => None,
        }
    }
}

/// Ids minted by one event.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultIds {
    pub steps: Vec<StepId>,
    pub interactions: Vec<InteractionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub index: usize,
    pub command: Command,
    pub result_ids: ResultIds,
}

/// Outcome of applying a command to a state.
#[derive(Debug, Clone)]
pub struct Applied {
    pub state: ProjectState,
    pub result_ids: ResultIds,
    /// Set by cut commands.
    pub clipboard: Option<Clipboard>,
}

/// Applies `command` to a copy of `state`. On error the input is untouched.
pub fn apply_command(
    state: &ProjectState,
    command: &Command,
    library: &ComponentLibrary,
    faults: &mut FaultPlan,
) -> Result<Applied> {
    let mut next = state.clone();
    let before = next.counters();
    let mut clipboard = None;
    match command {
        Command::AddGoal { name } => {
            next.add_goal(name)?;
        }
        Command::AddComment { parent, label } => {
            next.add_comment_step(*parent, label)?;
        }
        Command::EditLabel { step, label } => next.edit_step_label(*step, label)?,
        Command::DeleteStep { step } => next.delete_step(*step)?,
        Command::MoveStep { step, direction } => next.move_step(*step, *direction)?,
        Command::SetEnabled { step, enabled } => next.set_step_enabled(*step, *enabled)?,
        Command::Interaction {
            anchor,
            component,
            values,
        } => {
            next.submit_interaction(library, *anchor, component, values, faults)?;
        }
        Command::ModifyInteraction {
            interaction,
            values,
        } => next.modify_interaction(library, *interaction, values, faults)?,
        Command::DeleteInteraction { interaction } => next.delete_interaction(*interaction)?,
        Command::ClipboardCut { steps } => {
            faults.checkpoint()?;
            clipboard = Some(next.clipboard_cut(steps)?);
        }
        Command::Paste { target, clipboard } => {
            next.paste_steps(clipboard, *target, faults)?;
        }
        Command::Batch { steps, op } => {
            clipboard = next.batch_apply(steps, *op, faults)?;
        }
    }
    let after = next.counters();
    debug_assert_eq!(next.check_invariants(), Ok(()), "after {}", command.kind());
    Ok(Applied {
        state: next,
        result_ids: ResultIds {
            steps: (before.0..after.0).map(StepId).collect(),
            interactions: (before.1..after.1).map(InteractionId).collect(),
        },
        clipboard,
    })
}

/// Appends to an event log, keeping the paste clipboard in step: after a cut
/// is pasted once, later pastes behave as copies.
pub fn clipboard_after(
    current: Option<Clipboard>,
    command: &Command,
    applied: &Applied,
) -> Option<Clipboard> {
    match command {
        Command::Paste { clipboard, .. } if clipboard.mode == ClipMode::Cut => Some(Clipboard {
            mode: ClipMode::Copy,
            ..clipboard.clone()
        }),
        _ => applied.clipboard.clone().or(current),
    }
}

/// The event log with a movable head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timeline {
    base: ProjectState,
    events: Vec<Event>,
    head: usize,
    snapshots: BTreeMap<usize, ProjectState>,
}

impl Timeline {
    pub fn new(base: ProjectState) -> Self {
        Timeline {
            base,
            events: Vec::new(),
            head: 0,
            snapshots: BTreeMap::new(),
        }
    }

    pub fn base(&self) -> &ProjectState {
        &self.base
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn snapshots(&self) -> &BTreeMap<usize, ProjectState> {
        &self.snapshots
    }

    /// Offers a cached state for index `t`; kept only if `t` is a snapshot
    /// point within the log.
    pub fn offer_snapshot(&mut self, t: usize, state: ProjectState) {
        if t > 0 && t <= self.events.len() && t.is_multiple_of(SNAPSHOT_EVERY) {
            self.snapshots.insert(t, state);
        }
    }

    /// Appends an event at the head, discarding any events after it.
    pub fn record(&mut self, command: Command, result_ids: ResultIds, state: &ProjectState) {
        self.events.truncate(self.head);
        self.snapshots.retain(|t, _| *t <= self.head);
        let index = self.events.len() + 1;
        self.events.push(Event {
            index,
            command,
            result_ids,
        });
        self.head = index;
        self.offer_snapshot(index, state.clone());
    }

    /// Replays events 1..=t, starting from the nearest snapshot.
    pub fn state_at(&self, t: usize, library: &ComponentLibrary) -> Result<ProjectState> {
        if t > self.events.len() {
            return Err(EngineError::OutOfRange {
                t,
                length: self.events.len(),
            });
        }
        let (start, mut state) = match self.snapshots.range(..=t).next_back() {
            Some((k, s)) => (*k, s.clone()),
            None => (0, self.base.clone()),
        };
        for event in &self.events[start..t] {
            state = replay_event(&state, event, library)?;
        }
        Ok(state)
    }

    /// Replays from the base ignoring snapshots, and checks every event.
    pub fn replay_all(&self, library: &ComponentLibrary) -> Result<Vec<ProjectState>> {
        let mut states = Vec::with_capacity(self.events.len() + 1);
        let mut state = self.base.clone();
        states.push(state.clone());
        for event in &self.events {
            state = replay_event(&state, event, library)?;
            states.push(state.clone());
        }
        Ok(states)
    }

    pub fn set_head(&mut self, t: usize) -> Result<()> {
        if t > self.events.len() {
            return Err(EngineError::OutOfRange {
                t,
                length: self.events.len(),
            });
        }
        self.head = t;
        Ok(())
    }

    /// Rebuilds a timeline from stored parts; snapshots are dropped.
    pub fn from_parts(base: ProjectState, events: Vec<Event>, head: usize) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            if e.index != i + 1 {
                return Err(EngineError::ReplayDivergence { index: i + 1 });
            }
        }
        let mut timeline = Timeline::new(base);
        timeline.events = events;
        timeline.set_head(head)?;
        Ok(timeline)
    }
}

pub fn replay_event(
    state: &ProjectState,
    event: &Event,
    library: &ComponentLibrary,
) -> Result<ProjectState> {
    let diverged = || EngineError::ReplayDivergence { index: event.index };
    let applied = apply_command(state, &event.command, library, &mut FaultPlan::none())
        .map_err(|_| diverged())?;
    if applied.result_ids != event.result_ids {
        return Err(diverged());
    }
    Ok(applied.state)
}

/// One frame of a replay movie.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovieFrame {
    pub event: Event,
    pub caption: String,
    pub focus_before: Option<StepId>,
    pub focus_after: Option<StepId>,
}

/// A readable description of an event.
pub fn caption(event: &Event, before: &ProjectState, library: &ComponentLibrary) -> String {
    let label = |id: &StepId| {
        before
            .step(*id)
            .map(|s| format!("\"{}\"", s.label))
            .unwrap_or_else(|_| format!("step {id}"))
    };
    let component_name = |id: &str| {
        library
            .get(id)
            .map(|c| c.name.clone())
            .unwrap_or_else(|| id.to_owned())
    };
    match &event.command {
        Command::AddGoal { name } => format!("Add goal {name}"),
        Command::AddComment {
            parent,
            label: text,
        } => {
            format!("Add comment \"{text}\" under {}", label(parent))
        }
        Command::EditLabel { step, label: text } => format!("Rename {} to \"{text}\"", label(step)),
        Command::DeleteStep { step } => format!("Delete {}", label(step)),
        Command::MoveStep { step, direction } => {
            let d = match direction {
                Direction::Up => "up",
                Direction::Down => "down",
            };
            format!("Move {} {d}", label(step))
        }
        Command::SetEnabled { step, enabled } => {
            let verb = if *enabled { "Enable" } else { "Disable" };
            format!("{verb} {}", label(step))
        }
        Command::Interaction {
            anchor,
            component,
            values,
        } => {
            let shown: Vec<String> = values.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!(
                "Select {} at {} and enter {}",
                component_name(component),
                label(anchor),
                if shown.is_empty() {
                    "no data".to_owned()
                } else {
                    shown.join(", ")
                }
            )
        }
        Command::ModifyInteraction { interaction, .. } => {
            let name = before
                .interaction(*interaction)
                .map(|r| component_name(&r.component))
                .unwrap_or_else(|| format!("interaction {interaction}"));
            format!("Change the data of {name}")
        }
        Command::DeleteInteraction { interaction } => {
            let name = before
                .interaction(*interaction)
                .map(|r| component_name(&r.component))
                .unwrap_or_else(|| format!("interaction {interaction}"));
            format!("Remove {name}")
        }
        Command::ClipboardCut { steps } => format!("Cut {} step(s)", steps.len()),
        Command::Paste { target, clipboard } => {
            format!(
                "Paste {} step(s) under {}",
                clipboard.step_count(),
                label(target)
            )
        }
        Command::Batch { steps, op } => format!("{op:?} {} step(s)", steps.len()),
    }
}

/// Frames for events `from+1..=len`.
pub fn play_movie(
    timeline: &Timeline,
    from: usize,
    library: &ComponentLibrary,
) -> Result<Vec<MovieFrame>> {
    let mut state = timeline.state_at(from, library)?;
    let mut frames = Vec::with_capacity(timeline.len() - from);
    for event in &timeline.events()[from..] {
        let caption = caption(event, &state, library);
        let next = replay_event(&state, event, library)?;
        let focus_before = event.command.focus();
        let focus_after = event
            .result_ids
            .steps
            .first()
            .copied()
            .or(focus_before.filter(|id| next.contains_step(*id)));
        frames.push(MovieFrame {
            event: event.clone(),
            caption,
            focus_before,
            focus_after,
        });
        state = next;
    }
    Ok(frames)
}
