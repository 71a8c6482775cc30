//! Program construction by interaction: components carry a code mask and
//! interaction pages; filling the pages runs the mask and grows a steps tree
//! whose enabled steps emit source code. Every edit is an event on a
//! replayable timeline.

pub mod component;
pub mod emit;
pub mod error;
pub mod fault;
pub mod interaction;
pub mod library;
pub mod mask;
pub mod project_file;
#[cfg(feature = "testkit")]
pub mod testkit;
pub mod timeline;
pub mod tree;
pub mod workspace;

pub use error::{EngineError, Result};
pub use tree::{InteractionId, StepId};
pub use workspace::Workspace;
