//! The code-mask language.
//!
//! A mask is a line-oriented script embedded in every component. Lines that
//! start with `<RPWI:NAME>` are directives; `<*>` lines are notes; every other
//! line is literal code. Literal text may reference mask variables as
//! `<NAME>`, which are replaced by the values collected from the interaction
//! pages.
//!
//! Evaluation drives a small machine with two cursors: the *current* step
//! (which receives code and information lines) and the *parent* step (under
//! which `NEWSTEP` opens new steps). Both start at the anchor, the step that
//! was selected when the interaction began. Thirty mark registers save and
//! restore step references, and `SETMARK` is the only way to nest.

mod eval;
mod parse;
mod reference;
mod subst;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::evaluate_mask;
pub use parse::{is_identifier, parse_mask};
pub use reference::reference_evaluate;
pub use subst::{find_tokens, substitute_variables, Substitution};

/// Number of mark registers available to `PUTMARK`/`SETMARK`.
pub const MARK_REGISTERS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DirectiveKind {
    NewStep,
    Test,
    EndTest,
    Value,
    Positive,
    Negative,
    Information,
    Note,
    PutMark,
    SetMark,
    IgnoreLast,
    NewVar,
    SetVarValue,
    SelectVar,
    ReplaceVarsWithValues,
}

impl DirectiveKind {
    pub const ALL: [DirectiveKind; 15] = [
        DirectiveKind::NewStep,
        DirectiveKind::Test,
        DirectiveKind::EndTest,
        DirectiveKind::Value,
        DirectiveKind::Positive,
        DirectiveKind::Negative,
        DirectiveKind::Information,
        DirectiveKind::Note,
        DirectiveKind::PutMark,
        DirectiveKind::SetMark,
        DirectiveKind::IgnoreLast,
        DirectiveKind::NewVar,
        DirectiveKind::SetVarValue,
        DirectiveKind::SelectVar,
        DirectiveKind::ReplaceVarsWithValues,
    ];

    /// The keyword written after `<RPWI:`.
    pub fn keyword(self) -> &'static str {
        match self {
            DirectiveKind::NewStep => "NEWSTEP",
            DirectiveKind::Test => "TEST",
            DirectiveKind::EndTest => "ENDTEST",
            DirectiveKind::Value => "VALUE",
            DirectiveKind::Positive => "POSITIVE",
            DirectiveKind::Negative => "NEGATIVE",
            DirectiveKind::Information => "INFORMATION",
            DirectiveKind::Note => "NOTE",
            DirectiveKind::PutMark => "PUTMARK",
            DirectiveKind::SetMark => "SETMARK",
            DirectiveKind::IgnoreLast => "IGNORELAST",
            DirectiveKind::NewVar => "NEWVAR",
            DirectiveKind::SetVarValue => "SETVARVALUE",
            DirectiveKind::SelectVar => "SELECTVAR",
            DirectiveKind::ReplaceVarsWithValues => "REPLACEVARSWITHVALUES",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }
}

/// A parsed directive with its argument already validated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Directive {
    NewStep(String),
    /// Names the variable under test.
    Test(String),
    EndTest,
    Value(String),
    Positive,
    Negative,
    Information(String),
    Note(String),
    PutMark(u8),
    SetMark(u8),
    IgnoreLast(char),
    NewVar(String),
    SetVarValue(String),
    SelectVar(String),
    ReplaceVarsWithValues,
}

impl Directive {
    pub fn kind(&self) -> DirectiveKind {
        match self {
            Directive::NewStep(_) => DirectiveKind::NewStep,
            Directive::Test(_) => DirectiveKind::Test,
            Directive::EndTest => DirectiveKind::EndTest,
            Directive::Value(_) => DirectiveKind::Value,
            Directive::Positive => DirectiveKind::Positive,
            Directive::Negative => DirectiveKind::Negative,
            Directive::Information(_) => DirectiveKind::Information,
            Directive::Note(_) => DirectiveKind::Note,
            Directive::PutMark(_) => DirectiveKind::PutMark,
            Directive::SetMark(_) => DirectiveKind::SetMark,
            Directive::IgnoreLast(_) => DirectiveKind::IgnoreLast,
            Directive::NewVar(_) => DirectiveKind::NewVar,
            Directive::SetVarValue(_) => DirectiveKind::SetVarValue,
            Directive::SelectVar(_) => DirectiveKind::SelectVar,
            Directive::ReplaceVarsWithValues => DirectiveKind::ReplaceVarsWithValues,
        }
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<RPWI:{}>", self.kind().keyword())?;
        match self {
            Directive::NewStep(s)
            | Directive::Test(s)
            | Directive::Value(s)
            | Directive::Information(s)
            | Directive::Note(s)
            | Directive::NewVar(s)
            | Directive::SetVarValue(s)
            | Directive::SelectVar(s) => {
                if !s.is_empty() {
                    write!(f, " {s}")?;
                }
            }
            Directive::PutMark(n) | Directive::SetMark(n) => write!(f, " {n}")?,
            Directive::IgnoreLast(c) => write!(f, " {c}")?,
            Directive::EndTest
            | Directive::Positive
            | Directive::Negative
            | Directive::ReplaceVarsWithValues => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskLine {
    Directive(Directive),
    Literal(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskScript {
    pub lines: Vec<MaskLine>,
}

impl MaskScript {
    /// Every variable name referenced by a `<NAME>` token in literal or
    /// directive text, in first-use order.
    pub fn referenced_variables(&self) -> Vec<String> {
        let mut seen = Vec::new();
        let mut push = |name: &str| {
            if !seen.iter().any(|s: &String| s == name) {
                seen.push(name.to_owned());
            }
        };
        for line in &self.lines {
            match line {
                MaskLine::Literal(text) => find_tokens(text).iter().for_each(|t| push(t)),
                MaskLine::Directive(d) => match d {
                    Directive::NewStep(t)
                    | Directive::Information(t)
                    | Directive::SetVarValue(t) => find_tokens(t).iter().for_each(|t| push(t)),
                    Directive::Test(v) | Directive::SelectVar(v) => push(v),
                    _ => {}
                },
            }
        }
        seen
    }
}

/// Variable values visible to a mask, plus the variable `SETVARVALUE` writes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bindings {
    values: BTreeMap<String, String>,
    active: Option<String>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.values.insert(name.into(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn active(&self) -> Option<&str> {
        self.active.as_deref()
    }

    /// Selects `name` as the active variable. Returns false when unbound.
    pub fn select(&mut self, name: &str) -> bool {
        if self.values.contains_key(name) {
            self.active = Some(name.to_owned());
            true
        } else {
            false
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Bindings {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        let mut b = Bindings::new();
        for (k, v) in iter {
            b.set(k, v);
        }
        b
    }
}

/// A step reference inside one generation: the anchor or the n-th generated step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlotRef {
    Anchor,
    Step(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedStep {
    pub label: String,
    pub code: Vec<String>,
    pub info: Vec<String>,
    pub parent: SlotRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub steps: Vec<GeneratedStep>,
    /// Code emitted before any `NEWSTEP`, or after a `SETMARK` back to the anchor.
    pub anchor_code: Vec<String>,
    pub anchor_info: Vec<String>,
    pub marks: Vec<Option<SlotRef>>,
}

impl GenerationResult {
    pub(crate) fn empty() -> Self {
        GenerationResult {
            steps: Vec::new(),
            anchor_code: Vec::new(),
            anchor_info: Vec::new(),
            marks: vec![None; MARK_REGISTERS],
        }
    }

    /// Children of `slot` in generation order.
    pub fn children_of(&self, slot: SlotRef) -> impl Iterator<Item = usize> + '_ {
        self.steps
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.parent == slot)
            .map(|(i, _)| i)
    }

    /// All code lines (anchor first, then steps in order), for inspection.
    pub fn all_code(&self) -> Vec<&str> {
        self.anchor_code
            .iter()
            .chain(self.steps.iter().flat_map(|s| s.code.iter()))
            .map(String::as_str)
            .collect()
    }

    /// First `<NAME>` token (in canonical output order) whose name is unbound.
    pub(crate) fn first_unbound(&self, bindings: &Bindings) -> Option<String> {
        let texts = self
            .anchor_code
            .iter()
            .chain(self.anchor_info.iter())
            .chain(self.steps.iter().flat_map(|s| {
                std::iter::once(&s.label)
                    .chain(s.code.iter())
                    .chain(s.info.iter())
            }));
        for text in texts {
            if let Some(name) = find_tokens(text)
                .into_iter()
                .find(|n| !bindings.contains(n))
            {
                return Some(name);
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum MaskError {
    #[error("line {line}: unbalanced TEST/ENDTEST")]
    UnbalancedTest { line: usize },
    #[error("line {line}: mark {value} out of range 1..30")]
    MarkOutOfRange { line: usize, value: i64 },
    #[error("line {line}: unknown directive <RPWI:{name}>")]
    UnknownDirective { line: usize, name: String },
    #[error("line {line}: <RPWI:{name}> is only allowed inside a TEST block")]
    MisplacedDirective { line: usize, name: String },
    #[error("line {line}: bad argument for <RPWI:{name}>: {reason}")]
    BadArgument {
        line: usize,
        name: String,
        reason: String,
    },
    #[error("line {line}: malformed directive")]
    MalformedDirective { line: usize },
    #[error("unbound variable <{0}>")]
    UnboundVariable(String),
    #[error("mark register {0} is empty")]
    EmptyMark(u8),
    #[error("SETVARVALUE without an active variable")]
    NoActiveVariable,
}

impl MaskError {
    pub fn name(&self) -> &'static str {
        match self {
            MaskError::UnbalancedTest { .. } => "UnbalancedTest",
            MaskError::MarkOutOfRange { .. } => "MarkOutOfRange",
            MaskError::UnknownDirective { .. } => "UnknownDirective",
            MaskError::MisplacedDirective { .. } => "MisplacedDirective",
            MaskError::BadArgument { .. } => "BadArgument",
            MaskError::MalformedDirective { .. } => "MalformedDirective",
            MaskError::UnboundVariable(_) => "UnboundVariable",
            MaskError::EmptyMark(_) => "EmptyMark",
            MaskError::NoActiveVariable => "NoActiveVariable",
        }
    }
}
