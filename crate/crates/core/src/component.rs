//! Component files: metadata, interaction pages, matching table and code mask.
//!
//! ```text
//! [meta]
//! id = print-text-console
//! name = Print Text to Console
//! domain = Print Text
//! [page default Page1]
//! control Page1_Text1 text "Text to print" ""
//! [match]
//! Page1_Text1 -> T_V1
//! [mask]
//! <RPWI:NEWSTEP> Print Text – New Line – (<T_V1>)
//! cout << <T_V1> << "\n" ;
//! [endmask]
//! ```
//!
//! Outside the mask, blank lines and lines starting with `#` are ignored.
//! Choice controls list their options after the default:
//! `control Page1_Type choice "Type" "int" "int" "double"`.

use std::collections::{BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::{self, is_identifier, Directive, MaskError, MaskLine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PageRole {
    Default,
    SetAttributes,
    GetAttributes,
    InvokeMethod,
}

impl PageRole {
    pub fn as_str(self) -> &'static str {
        match self {
            PageRole::Default => "default",
            PageRole::SetAttributes => "set-attributes",
            PageRole::GetAttributes => "get-attributes",
            PageRole::InvokeMethod => "invoke-method",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            PageRole::Default,
            PageRole::SetAttributes,
            PageRole::GetAttributes,
            PageRole::InvokeMethod,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlKind {
    Text,
    Number,
    Checkbox,
    Choice,
}

impl ControlKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControlKind::Text => "text",
            ControlKind::Number => "number",
            ControlKind::Checkbox => "checkbox",
            ControlKind::Choice => "choice",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "text" => Some(ControlKind::Text),
            "number" => Some(ControlKind::Number),
            "checkbox" => Some(ControlKind::Checkbox),
            "choice" => Some(ControlKind::Choice),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlSpec {
    pub name: String,
    pub kind: ControlKind,
    pub label: String,
    pub default: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub options: Vec<String>,
}

impl ControlSpec {
    /// Checks a value against this control's kind. Returns the reason on failure.
    pub fn check_value(&self, value: &str) -> Result<(), String> {
        if value.contains(['\n', '\r']) {
            return Err("value must be a single line".into());
        }
        match self.kind {
            ControlKind::Text => Ok(()),
            ControlKind::Number => match value.trim().parse::<f64>() {
                Ok(n) if n.is_finite() && value.trim() == value && !value.is_empty() => Ok(()),
                _ => Err(format!("{value:?} is not a number")),
            },
            ControlKind::Checkbox => match value {
                "0" | "1" => Ok(()),
                _ => Err(format!(
                    "checkbox value must be \"0\" or \"1\", got {value:?}"
                )),
            },
            ControlKind::Choice => {
                if self.options.iter().any(|o| o == value) {
                    Ok(())
                } else {
                    Err(format!("{value:?} is not one of the options"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionPageSpec {
    pub page_id: String,
    pub role: PageRole,
    pub controls: Vec<ControlSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPair {
    pub page_variable: String,
    pub mask_variable: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub name: String,
    pub domain: String,
    pub pages: Vec<InteractionPageSpec>,
    pub matching: Vec<MatchPair>,
    /// Mask source, lines joined with `\n`, no trailing newline.
    pub mask: String,
}

impl Component {
    pub fn controls(&self) -> impl Iterator<Item = &ControlSpec> {
        self.pages.iter().flat_map(|p| p.controls.iter())
    }

    pub fn control(&self, name: &str) -> Option<&ControlSpec> {
        self.controls().find(|c| c.name == name)
    }

    /// Serializes back to the component file format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[meta]");
        let _ = writeln!(out, "id = {}", self.id);
        let _ = writeln!(out, "name = {}", self.name);
        let _ = writeln!(out, "domain = {}", self.domain);
        for page in &self.pages {
            let _ = writeln!(out, "[page {} {}]", page.role.as_str(), page.page_id);
            for c in &page.controls {
                let _ = write!(
                    out,
                    "control {} {} {} {}",
                    c.name,
                    c.kind.as_str(),
                    quote(&c.label),
                    quote(&c.default)
                );
                for o in &c.options {
                    let _ = write!(out, " {}", quote(o));
                }
                out.push('\n');
            }
        }
        let _ = writeln!(out, "[match]");
        for m in &self.matching {
            let _ = writeln!(out, "{} -> {}", m.page_variable, m.mask_variable);
        }
        let _ = writeln!(out, "[mask]");
        if !self.mask.is_empty() {
            let _ = writeln!(out, "{}", self.mask);
        }
        let _ = writeln!(out, "[endmask]");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComponentError {
    #[error("line {line}: {reason}")]
    SyntaxError { line: usize, reason: String },
    #[error("duplicate control {0}")]
    DuplicateControl(String),
    #[error("line {line}: unknown control kind {kind:?}")]
    UnknownControlKind { line: usize, kind: String },
    #[error("matching table references undeclared control {0}")]
    UnknownPageVariable(String),
}

impl ComponentError {
    pub fn name(&self) -> &'static str {
        match self {
            ComponentError::SyntaxError { .. } => "SyntaxError",
            ComponentError::DuplicateControl(_) => "DuplicateControl",
            ComponentError::UnknownControlKind { .. } => "UnknownControlKind",
            ComponentError::UnknownPageVariable(_) => "UnknownPageVariable",
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Splits a control line into bare words and quoted strings.
fn lex_words(line: &str, line_no: usize) -> Result<Vec<String>, ComponentError> {
    let mut words = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        let Some(&first) = chars.peek() else { break };
        let mut word = String::new();
        if first == '"' {
            chars.next();
            let mut closed = false;
            while let Some(c) = chars.next() {
                match c {
                    '\\' => match chars.next() {
                        Some(e @ ('"' | '\\')) => word.push(e),
                        _ => {
                            return Err(ComponentError::SyntaxError {
                                line: line_no,
                                reason: "bad escape in quoted string".into(),
                            })
                        }
                    },
                    '"' => {
                        closed = true;
                        break;
                    }
                    c => word.push(c),
                }
            }
            if !closed {
                return Err(ComponentError::SyntaxError {
                    line: line_no,
                    reason: "unterminated quoted string".into(),
                });
            }
        } else {
            while let Some(c) = chars.next_if(|c| !c.is_whitespace()) {
                word.push(c);
            }
        }
        words.push(word);
    }
    Ok(words)
}

enum Section {
    None,
    Meta,
    Page,
    Match,
}

/// Parses one component file. Checks structure and the invariants that do not
/// need the mask to be interpreted; see [`validate_component`] for the rest.
pub fn parse_component_file(text: &str) -> Result<Component, ComponentError> {
    let syntax = |line: usize, reason: &str| ComponentError::SyntaxError {
        line,
        reason: reason.to_owned(),
    };
    let mut id = None;
    let mut name = None;
    let mut domain = None;
    let mut pages: Vec<InteractionPageSpec> = Vec::new();
    let mut matching = Vec::new();
    let mut mask: Option<String> = None;
    let mut section = Section::None;
    let mut seen_match = false;

    let mut lines = text.split('\n').enumerate();
    while let Some((idx, line)) = lines.next() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if mask.is_some() {
            return Err(syntax(line_no, "content after [endmask]"));
        }
        if trimmed.starts_with('[') {
            let header = trimmed
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| syntax(line_no, "malformed section header"))?;
            let words: Vec<&str> = header.split_whitespace().collect();
            match words.as_slice() {
                ["meta"] => section = Section::Meta,
                ["page", role, page_id] => {
                    let role = PageRole::parse(role)
                        .ok_or_else(|| syntax(line_no, "unknown page role"))?;
                    if pages.iter().any(|p| p.page_id == *page_id) {
                        return Err(syntax(line_no, "duplicate page id"));
                    }
                    pages.push(InteractionPageSpec {
                        page_id: (*page_id).to_owned(),
                        role,
                        controls: Vec::new(),
                    });
                    section = Section::Page;
                }
                ["match"] => {
                    seen_match = true;
                    section = Section::Match;
                }
                ["mask"] => {
                    let mut body = Vec::new();
                    let mut closed = false;
                    for (_, l) in lines.by_ref() {
                        if l == "[endmask]" {
                            closed = true;
                            break;
                        }
                        body.push(l);
                    }
                    if !closed {
                        return Err(syntax(line_no, "[mask] without [endmask]"));
                    }
                    mask = Some(body.join("\n"));
                    section = Section::None;
                }
                _ => return Err(syntax(line_no, "unknown section")),
            }
            continue;
        }
        match section {
            Section::None => return Err(syntax(line_no, "content outside any section")),
            Section::Meta => {
                let (key, value) = trimmed
                    .split_once('=')
                    .ok_or_else(|| syntax(line_no, "expected key = value"))?;
                let value = value.trim().to_owned();
                match key.trim() {
                    "id" => id = Some(value),
                    "name" => name = Some(value),
                    "domain" => domain = Some(value),
                    _ => return Err(syntax(line_no, "unknown meta key")),
                }
            }
            Section::Page => {
                let words = lex_words(trimmed, line_no)?;
                if words.len() < 5 || words[0] != "control" {
                    return Err(syntax(
                        line_no,
                        "expected: control NAME KIND \"label\" \"default\" [options...]",
                    ));
                }
                let kind = ControlKind::parse(&words[2]).ok_or_else(|| {
                    ComponentError::UnknownControlKind {
                        line: line_no,
                        kind: words[2].clone(),
                    }
                })?;
                if !is_identifier(&words[1]) {
                    return Err(syntax(line_no, "control name must be an identifier"));
                }
                let options = words[5..].to_vec();
                if kind != ControlKind::Choice && !options.is_empty() {
                    return Err(syntax(line_no, "only choice controls take options"));
                }
                let page = pages.last_mut().expect("page section implies a page");
                page.controls.push(ControlSpec {
                    name: words[1].clone(),
                    kind,
                    label: words[3].clone(),
                    default: words[4].clone(),
                    options,
                });
            }
            Section::Match => {
                let (page_var, mask_var) = trimmed
                    .split_once("->")
                    .ok_or_else(|| syntax(line_no, "expected PageVar -> MaskVar"))?;
                let mask_var = mask_var.trim();
                if !is_identifier(mask_var) {
                    return Err(syntax(line_no, "mask variable must be an identifier"));
                }
                matching.push(MatchPair {
                    page_variable: page_var.trim().to_owned(),
                    mask_variable: mask_var.to_owned(),
                });
            }
        }
    }

    let id = id.ok_or_else(|| syntax(1, "missing id"))?;
    let name = name.ok_or_else(|| syntax(1, "missing name"))?;
    let domain = domain.ok_or_else(|| syntax(1, "missing domain"))?;
    if id.is_empty()
        || !id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        return Err(syntax(1, "id must be non-empty [A-Za-z0-9_-]"));
    }
    if name.is_empty() {
        return Err(syntax(1, "name must be non-empty"));
    }
    if !seen_match {
        return Err(syntax(1, "missing [match] section"));
    }
    let mask = mask.ok_or_else(|| syntax(1, "missing [mask] section"))?;

    let mut names = HashSet::new();
    for c in pages.iter().flat_map(|p| &p.controls) {
        if !names.insert(c.name.as_str()) {
            return Err(ComponentError::DuplicateControl(c.name.clone()));
        }
    }
    for m in &matching {
        if !names.contains(m.page_variable.as_str()) {
            return Err(ComponentError::UnknownPageVariable(m.page_variable.clone()));
        }
    }

    Ok(Component {
        id,
        name,
        domain,
        pages,
        matching,
        mask,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Finding {
    EmptyName,
    DuplicatePage(String),
    DuplicateControl(String),
    UnknownPageVariable(String),
    BadMaskVariable(String),
    DuplicateMaskVariable(String),
    BadDefault { control: String, reason: String },
    MaskParse(MaskError),
    UnboundMaskVariable(String),
    MaskUsesVariablesWithoutPages,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::EmptyName => write!(f, "component name is empty"),
            Finding::DuplicatePage(p) => write!(f, "duplicate page id {p}"),
            Finding::DuplicateControl(c) => write!(f, "duplicate control {c}"),
            Finding::UnknownPageVariable(v) => write!(f, "matching references unknown control {v}"),
            Finding::BadMaskVariable(v) => write!(f, "illegal mask variable name {v:?}"),
            Finding::DuplicateMaskVariable(v) => write!(f, "mask variable {v} matched twice"),
            Finding::BadDefault { control, reason } => {
                write!(f, "bad default for {control}: {reason}")
            }
            Finding::MaskParse(e) => write!(f, "mask: {e}"),
            Finding::UnboundMaskVariable(v) => write!(f, "mask uses <{v}> which is never bound"),
            Finding::MaskUsesVariablesWithoutPages => {
                write!(f, "mask uses variables but the component has no pages")
            }
        }
    }
}

/// Non-fatal observations, e.g. controls that feed no mask variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Warning {
    UnmatchedControl(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

pub fn validate_component(c: &Component) -> ValidationReport {
    let mut report = ValidationReport::default();
    let findings = &mut report.findings;
    if c.name.trim().is_empty() {
        findings.push(Finding::EmptyName);
    }

    let mut page_ids = HashSet::new();
    let mut control_names = HashSet::new();
    for page in &c.pages {
        if !page_ids.insert(page.page_id.as_str()) {
            findings.push(Finding::DuplicatePage(page.page_id.clone()));
        }
        for ctl in &page.controls {
            if !control_names.insert(ctl.name.as_str()) {
                findings.push(Finding::DuplicateControl(ctl.name.clone()));
            }
            if ctl.kind == ControlKind::Choice && ctl.options.is_empty() {
                findings.push(Finding::BadDefault {
                    control: ctl.name.clone(),
                    reason: "choice control has no options".into(),
                });
            } else if let Err(reason) = ctl.check_value(&ctl.default) {
                findings.push(Finding::BadDefault {
                    control: ctl.name.clone(),
                    reason,
                });
            }
        }
    }

    let mut matched = BTreeSet::new();
    for m in &c.matching {
        if !control_names.contains(m.page_variable.as_str()) {
            findings.push(Finding::UnknownPageVariable(m.page_variable.clone()));
        }
        if !is_identifier(&m.mask_variable) {
            findings.push(Finding::BadMaskVariable(m.mask_variable.clone()));
        }
        if !matched.insert(m.mask_variable.clone()) {
            findings.push(Finding::DuplicateMaskVariable(m.mask_variable.clone()));
        }
    }
    for ctl in c.controls() {
        if !c.matching.iter().any(|m| m.page_variable == ctl.name) {
            report
                .warnings
                .push(Warning::UnmatchedControl(ctl.name.clone()));
        }
    }

    match mask::parse_mask(&c.mask) {
        Err(e) => findings.push(Finding::MaskParse(e)),
        Ok(script) => {
            let mut declared = matched;
            let mut reported = BTreeSet::new();
            let mut uses_vars = false;
            for line in &script.lines {
                let used: Vec<String> = match line {
                    MaskLine::Literal(t) => mask::find_tokens(t),
                    MaskLine::Directive(d) => match d {
                        Directive::NewStep(t)
                        | Directive::Information(t)
                        | Directive::SetVarValue(t) => mask::find_tokens(t),
                        Directive::Test(v) | Directive::SelectVar(v) => vec![v.clone()],
                        Directive::NewVar(v) => {
                            declared.insert(v.clone());
                            Vec::new()
                        }
                        _ => Vec::new(),
                    },
                };
                for name in used {
                    uses_vars = true;
                    if !declared.contains(&name) && reported.insert(name.clone()) {
                        findings.push(Finding::UnboundMaskVariable(name));
                    }
                }
            }
            if c.pages.is_empty() && uses_vars {
                findings.push(Finding::MaskUsesVariablesWithoutPages);
            }
        }
    }
    report
}
