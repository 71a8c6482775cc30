use thiserror::Error;

use crate::mask::MaskError;
use crate::tree::{InteractionId, StepId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("unknown step {0}")]
    UnknownStep(StepId),
    #[error("unknown goal {0:?}")]
    UnknownGoal(String),
    #[error("goal {0:?} already exists")]
    DuplicateGoal(String),
    #[error("invalid goal name {0:?}")]
    InvalidGoalName(String),
    #[error("step label must not be empty")]
    EmptyLabel,
    #[error("step label must be a single line")]
    InvalidLabel,
    #[error("the root step cannot be edited, moved or deleted")]
    RootImmutable,
    #[error("step {0} has no sibling in that direction")]
    AtBoundary(StepId),
    #[error("selection contains step {0} and one of its ancestors")]
    OverlappingSelection(StepId),
    #[error("selection is empty")]
    EmptySelection,
    #[error("clipboard is empty")]
    EmptyClipboard,
    #[error("unknown component {0:?}")]
    UnknownComponent(String),
    #[error("unknown interaction {0}")]
    UnknownInteraction(InteractionId),
    #[error("interaction {0} has no surviving steps")]
    InteractionOrphaned(InteractionId),
    #[error("control {control}: {reason}")]
    ValidationError { control: String, reason: String },
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error("mask emitted code outside any generated step")]
    CodeOutsideStep,
    #[error("regeneration dropped slot {slot}, which holds other steps")]
    SlotVanished { slot: usize },
    #[error("time index {t} out of range 0..={length}")]
    OutOfRange { t: usize, length: usize },
    #[error("replay of event {index} diverged from the recorded result")]
    ReplayDivergence { index: usize },
    #[error("injected fault at checkpoint {0}")]
    InjectedFault(usize),
}

impl EngineError {
    /// Stable name used on the CLI and in HTTP error bodies.
    pub fn name(&self) -> &'static str {
        match self {
            EngineError::UnknownStep(_) => "UnknownStep",
            EngineError::UnknownGoal(_) => "UnknownGoal",
            EngineError::DuplicateGoal(_) => "DuplicateGoal",
            EngineError::InvalidGoalName(_) => "InvalidGoalName",
            EngineError::EmptyLabel => "EmptyLabel",
            EngineError::InvalidLabel => "InvalidLabel",
            EngineError::RootImmutable => "RootImmutable",
            EngineError::AtBoundary(_) => "AtBoundary",
            EngineError::OverlappingSelection(_) => "OverlappingSelection",
            EngineError::EmptySelection => "EmptySelection",
            EngineError::EmptyClipboard => "EmptyClipboard",
            EngineError::UnknownComponent(_) => "UnknownComponent",
            EngineError::UnknownInteraction(_) => "UnknownInteraction",
            EngineError::InteractionOrphaned(_) => "InteractionOrphaned",
            EngineError::ValidationError { .. } => "ValidationError",
            EngineError::Mask(e) => e.name(),
            EngineError::CodeOutsideStep => "CodeOutsideStep",
            EngineError::SlotVanished { .. } => "SlotVanished",
            EngineError::OutOfRange { .. } => "OutOfRange",
            EngineError::ReplayDivergence { .. } => "ReplayDivergence",
            EngineError::InjectedFault(_) => "InjectedFault",
        }
    }
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;
