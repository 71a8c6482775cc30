use crate::error::{EngineError, Result};

/// Failure injection for atomicity testing. Multi-part operations (submit,
/// modify, paste, batch) call [`FaultPlan::checkpoint`] between their parts;
/// a plan armed with `fail_at(n)` makes the n-th checkpoint fail.
#[derive(Debug, Clone, Default)]
pub struct FaultPlan {
    fail_at: Option<usize>,
    seen: usize,
}

impl FaultPlan {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn fail_at(n: usize) -> Self {
        FaultPlan {
            fail_at: Some(n),
            seen: 0,
        }
    }

    pub fn checkpoint(&mut self) -> Result<()> {
        self.seen += 1;
        if self.fail_at == Some(self.seen) {
            Err(EngineError::InjectedFault(self.seen))
        } else {
            Ok(())
        }
    }

    pub fn checkpoints_seen(&self) -> usize {
        self.seen
    }
}
