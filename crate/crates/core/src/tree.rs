//! The steps tree: goals, steps, the edit surface, search and the clipboard.
//!
//! Steps live in an arena keyed by [`StepId`]; each goal owns a root step
//! that cannot be edited, moved or deleted. Ids come from a per-project
//! counter and are never reused.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};
use crate::fault::FaultPlan;
use crate::interaction::InteractionRecord;

pub const ROOT_LABEL: &str = "Start Point (NOT STEP)";
pub const FIRST_STEP_LABEL: &str = "The First Step";
pub const MAIN_GOAL: &str = "main";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InteractionId(pub u64);

impl fmt::Display for StepId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for InteractionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Root,
    Comment,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub id: StepId,
    pub label: String,
    pub kind: StepKind,
    pub enabled: bool,
    pub interaction: Option<InteractionId>,
    pub parent: Option<StepId>,
    pub children: Vec<StepId>,
    pub code: Vec<String>,
    pub info: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub name: String,
    pub root: StepId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchScope {
    Name,
    Data,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchOp {
    Cut,
    Copy,
    Delete,
    MoveUp,
    MoveDown,
    Enable,
    Disable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClipMode {
    Cut,
    Copy,
}

/// A detached step subtree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipNode {
    pub label: String,
    pub kind: StepKind,
    pub enabled: bool,
    /// Owning interaction and the step's slot index in it.
    pub link: Option<(InteractionId, usize)>,
    pub code: Vec<String>,
    pub info: Vec<String>,
    pub children: Vec<ClipNode>,
}

/// What a copied or cut step needs from its interaction record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipRecord {
    pub component: String,
    pub page_values: BTreeMap<String, String>,
    pub slots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clipboard {
    pub mode: ClipMode,
    pub trees: Vec<ClipNode>,
    // Stored as pairs: clipboards travel inside tagged commands, where
    // integer map keys do not survive a round trip.
    #[serde(with = "pairs")]
    pub records: BTreeMap<InteractionId, ClipRecord>,
}

mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    use super::{ClipRecord, InteractionId};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<InteractionId, ClipRecord>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        s.collect_seq(map.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<InteractionId, ClipRecord>, D::Error> {
        Ok(Vec::<(InteractionId, ClipRecord)>::deserialize(d)?
            .into_iter()
            .collect())
    }
}

impl Clipboard {
    pub fn step_count(&self) -> usize {
        fn count(n: &ClipNode) -> usize {
            1 + n.children.iter().map(count).sum::<usize>()
        }
        self.trees.iter().map(count).sum()
    }
}

/// Everything a paste mints: new step ids in pre-order, then new interaction ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PasteResult {
    pub steps: Vec<StepId>,
    pub interactions: Vec<InteractionId>,
}

/// The full visual source of a project.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectState {
    pub project_id: String,
    pub library_id: String,
    goals: Vec<Goal>,
    steps: BTreeMap<StepId, Step>,
    interactions: BTreeMap<InteractionId, InteractionRecord>,
    next_step: u64,
    next_interaction: u64,
}

pub(crate) fn check_label(label: &str) -> Result<()> {
    if label.trim().is_empty() {
        Err(EngineError::EmptyLabel)
    } else if label.contains(['\n', '\r']) {
        Err(EngineError::InvalidLabel)
    } else {
        Ok(())
    }
}

fn valid_goal_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl ProjectState {
    /// A project with one goal, `main`, holding only its root.
    pub fn empty(project_id: impl Into<String>, library_id: impl Into<String>) -> Self {
        let mut state = ProjectState {
            project_id: project_id.into(),
            library_id: library_id.into(),
            goals: Vec::new(),
            steps: BTreeMap::new(),
            interactions: BTreeMap::new(),
            next_step: 1,
            next_interaction: 1,
        };
        state.insert_goal(MAIN_GOAL);
        state
    }

    fn insert_goal(&mut self, name: &str) -> StepId {
        let root = self.mint_step();
        self.steps.insert(
            root,
            Step {
                id: root,
                label: ROOT_LABEL.into(),
                kind: StepKind::Root,
                enabled: true,
                interaction: None,
                parent: None,
                children: Vec::new(),
                code: Vec::new(),
                info: Vec::new(),
            },
        );
        self.goals.push(Goal {
            name: name.to_owned(),
            root,
        });
        root
    }

    pub(crate) fn mint_step(&mut self) -> StepId {
        let id = StepId(self.next_step);
        self.next_step += 1;
        id
    }

    pub(crate) fn mint_interaction(&mut self) -> InteractionId {
        let id = InteractionId(self.next_interaction);
        self.next_interaction += 1;
        id
    }

    /// Next step id and next interaction id.
    pub fn counters(&self) -> (u64, u64) {
        (self.next_step, self.next_interaction)
    }

    pub fn goals(&self) -> &[Goal] {
        &self.goals
    }

    pub fn goal(&self, name: &str) -> Result<&Goal> {
        self.goals
            .iter()
            .find(|g| g.name == name)
            .ok_or_else(|| EngineError::UnknownGoal(name.to_owned()))
    }

    pub fn step(&self, id: StepId) -> Result<&Step> {
        self.steps.get(&id).ok_or(EngineError::UnknownStep(id))
    }

    pub(crate) fn step_mut(&mut self, id: StepId) -> Result<&mut Step> {
        self.steps.get_mut(&id).ok_or(EngineError::UnknownStep(id))
    }

    pub fn contains_step(&self, id: StepId) -> bool {
        self.steps.contains_key(&id)
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn interactions(&self) -> &BTreeMap<InteractionId, InteractionRecord> {
        &self.interactions
    }

    pub fn interaction(&self, id: InteractionId) -> Option<&InteractionRecord> {
        self.interactions.get(&id)
    }

    pub(crate) fn interactions_mut(&mut self) -> &mut BTreeMap<InteractionId, InteractionRecord> {
        &mut self.interactions
    }

    pub(crate) fn insert_step(&mut self, step: Step) {
        self.steps.insert(step.id, step);
    }

    pub(crate) fn remove_step_entry(&mut self, id: StepId) -> Option<Step> {
        self.steps.remove(&id)
    }

    /// Goal whose tree contains `id`.
    pub fn goal_of(&self, id: StepId) -> Result<&Goal> {
        let mut cur = id;
        loop {
            let step = self.step(cur)?;
            match step.parent {
                Some(p) => cur = p,
                None => {
                    return self
                        .goals
                        .iter()
                        .find(|g| g.root == cur)
                        .ok_or(EngineError::UnknownStep(id))
                }
            }
        }
    }

    /// `id` and its descendants in pre-order.
    pub fn preorder(&self, id: StepId) -> Vec<StepId> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            if let Some(step) = self.steps.get(&cur) {
                out.push(cur);
                stack.extend(step.children.iter().rev());
            }
        }
        out
    }

    /// All non-root steps of all goals, goal by goal, in pre-order.
    pub fn document_order(&self) -> Vec<StepId> {
        self.goals
            .iter()
            .flat_map(|g| self.preorder(g.root).into_iter().skip(1))
            .collect()
    }

    pub fn is_ancestor(&self, ancestor: StepId, id: StepId) -> bool {
        let mut cur = self.steps.get(&id).and_then(|s| s.parent);
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.steps.get(&p).and_then(|s| s.parent);
        }
        false
    }

    fn editable(&self, id: StepId) -> Result<&Step> {
        let step = self.step(id)?;
        if step.kind == StepKind::Root {
            return Err(EngineError::RootImmutable);
        }
        Ok(step)
    }

    /// Adds a goal with its root and a "The First Step" comment.
    pub fn add_goal(&mut self, name: &str) -> Result<(StepId, StepId)> {
        if !valid_goal_name(name) {
            return Err(EngineError::InvalidGoalName(name.to_owned()));
        }
        if self.goals.iter().any(|g| g.name == name) {
            return Err(EngineError::DuplicateGoal(name.to_owned()));
        }
        let root = self.insert_goal(name);
        let first = self.add_comment_step(root, FIRST_STEP_LABEL)?;
        Ok((root, first))
    }

    pub fn add_comment_step(&mut self, parent: StepId, label: &str) -> Result<StepId> {
        self.step(parent)?;
        check_label(label)?;
        let id = self.mint_step();
        self.steps.insert(
            id,
            Step {
                id,
                label: label.to_owned(),
                kind: StepKind::Comment,
                enabled: true,
                interaction: None,
                parent: Some(parent),
                children: Vec::new(),
                code: Vec::new(),
                info: Vec::new(),
            },
        );
        self.step_mut(parent)?.children.push(id);
        Ok(id)
    }

    /// Replaces the label only; code and interaction data are untouched.
    pub fn edit_step_label(&mut self, id: StepId, label: &str) -> Result<()> {
        self.editable(id)?;
        check_label(label)?;
        self.step_mut(id)?.label = label.to_owned();
        Ok(())
    }

    /// Removes the step and its subtree. Interaction records stay; those left
    /// without any step are flagged orphaned.
    pub fn delete_step(&mut self, id: StepId) -> Result<()> {
        self.editable(id)?;
        self.detach(id)?;
        for gone in self.preorder(id) {
            self.steps.remove(&gone);
        }
        self.refresh_orphans();
        Ok(())
    }

    /// Unlinks `id` from its parent's children without removing it.
    pub(crate) fn detach(&mut self, id: StepId) -> Result<()> {
        if let Some(parent) = self.step(id)?.parent {
            self.step_mut(parent)?.children.retain(|c| *c != id);
        }
        Ok(())
    }

    pub fn move_step(&mut self, id: StepId, direction: Direction) -> Result<()> {
        let parent = self.editable(id)?.parent.expect("non-root has parent");
        let siblings = &mut self.step_mut(parent)?.children;
        let pos = siblings
            .iter()
            .position(|c| *c == id)
            .expect("child of parent");
        let other = match direction {
            Direction::Up if pos > 0 => pos - 1,
            Direction::Down if pos + 1 < siblings.len() => pos + 1,
            _ => return Err(EngineError::AtBoundary(id)),
        };
        siblings.swap(pos, other);
        Ok(())
    }

    pub fn set_step_enabled(&mut self, id: StepId, enabled: bool) -> Result<()> {
        self.editable(id)?;
        self.step_mut(id)?.enabled = enabled;
        Ok(())
    }

    /// True when the step and all its ancestors are enabled.
    pub fn is_effectively_enabled(&self, id: StepId) -> bool {
        let mut cur = Some(id);
        while let Some(c) = cur {
            match self.steps.get(&c) {
                Some(s) if s.enabled => cur = s.parent,
                _ => return false,
            }
        }
        true
    }

    /// Orders a selection by document position, rejecting roots, unknown ids,
    /// and (when `disjoint`) any id that is an ancestor of another.
    fn ordered_selection(&self, ids: &[StepId], disjoint: bool) -> Result<Vec<StepId>> {
        if ids.is_empty() {
            return Err(EngineError::EmptySelection);
        }
        let wanted: BTreeSet<StepId> = ids.iter().copied().collect();
        for id in &wanted {
            self.editable(*id)?;
        }
        if disjoint {
            for a in &wanted {
                for b in &wanted {
                    if a != b && self.is_ancestor(*a, *b) {
                        return Err(EngineError::OverlappingSelection(*b));
                    }
                }
            }
        }
        let order: Vec<StepId> = self
            .document_order()
            .into_iter()
            .filter(|id| wanted.contains(id))
            .collect();
        Ok(order)
    }

    fn clip_subtree(
        &self,
        id: StepId,
        records: &mut BTreeMap<InteractionId, ClipRecord>,
    ) -> ClipNode {
        let step = &self.steps[&id];
        let link = step.interaction.and_then(|iid| {
            let rec = self.interactions.get(&iid)?;
            let slot = rec.slot_of(id)?;
            records.entry(iid).or_insert_with(|| ClipRecord {
                component: rec.component.clone(),
                page_values: rec.page_values.clone(),
                slots: rec.generated.len(),
            });
            Some((iid, slot))
        });
        ClipNode {
            label: step.label.clone(),
            kind: step.kind,
            enabled: step.enabled,
            link,
            code: step.code.clone(),
            info: step.info.clone(),
            children: step
                .children
                .iter()
                .map(|c| self.clip_subtree(*c, records))
                .collect(),
        }
    }

    pub fn clipboard_copy(&self, ids: &[StepId]) -> Result<Clipboard> {
        let order = self.ordered_selection(ids, true)?;
        let mut records = BTreeMap::new();
        let trees = order
            .iter()
            .map(|id| self.clip_subtree(*id, &mut records))
            .collect();
        Ok(Clipboard {
            mode: ClipMode::Copy,
            trees,
            records,
        })
    }

    /// Removes the selected subtrees and returns them. Generated steps keep
    /// their interaction links so a later paste can relink the records.
    pub fn clipboard_cut(&mut self, ids: &[StepId]) -> Result<Clipboard> {
        let mut clip = self.clipboard_copy(ids)?;
        clip.mode = ClipMode::Cut;
        for id in self.ordered_selection(ids, true)?.into_iter().rev() {
            self.delete_step(id)?;
        }
        Ok(clip)
    }

    /// Inserts the clipboard trees as the last children of `target` with fresh
    /// ids. In copy mode every referenced interaction record is cloned; in cut
    /// mode the original records are relinked to the new steps.
    pub fn paste_steps(
        &mut self,
        clip: &Clipboard,
        target: StepId,
        faults: &mut FaultPlan,
    ) -> Result<PasteResult> {
        self.step(target)?;
        if clip.trees.is_empty() {
            return Err(EngineError::EmptyClipboard);
        }
        let mut result = PasteResult::default();
        let mut relink: BTreeMap<InteractionId, InteractionId> = BTreeMap::new();

        // Decide the record each clipboard interaction maps to, minting in
        // first-appearance order.
        fn first_seen(nodes: &[ClipNode], out: &mut Vec<InteractionId>) {
            for n in nodes {
                if let Some((iid, _)) = n.link {
                    if !out.contains(&iid) {
                        out.push(iid);
                    }
                }
                first_seen(&n.children, out);
            }
        }
        let mut seen = Vec::new();
        first_seen(&clip.trees, &mut seen);
        for iid in seen {
            let keep_original = clip.mode == ClipMode::Cut
                && self.interactions.get(&iid).is_some_and(|r| !r.tombstoned);
            if keep_original {
                relink.insert(iid, iid);
            } else {
                let Some(src) = clip.records.get(&iid) else {
                    continue;
                };
                let new_id = self.mint_interaction();
                self.interactions.insert(
                    new_id,
                    InteractionRecord {
                        id: new_id,
                        component: src.component.clone(),
                        page_values: src.page_values.clone(),
                        anchor: target,
                        generated: vec![None; src.slots],
                        tombstoned: false,
                        orphaned: false,
                    },
                );
                relink.insert(iid, new_id);
                result.interactions.push(new_id);
            }
        }

        for tree in &clip.trees {
            let id = self.paste_node(tree, target, &relink, &mut result.steps, faults)?;
            self.step_mut(target)?.children.push(id);
        }
        self.refresh_orphans();
        Ok(result)
    }

    fn paste_node(
        &mut self,
        node: &ClipNode,
        parent: StepId,
        relink: &BTreeMap<InteractionId, InteractionId>,
        minted: &mut Vec<StepId>,
        faults: &mut FaultPlan,
    ) -> Result<StepId> {
        faults.checkpoint()?;
        let id = self.mint_step();
        minted.push(id);
        let mut interaction = None;
        let mut kind = node.kind;
        if let Some((old, slot)) = node.link {
            // The slot may be gone or refilled since the cut.
            let steps = &self.steps;
            let free = |rec: &InteractionRecord| {
                rec.generated
                    .get(slot)
                    .is_some_and(|g| g.is_none_or(|s| !steps.contains_key(&s)))
            };
            match relink
                .get(&old)
                .and_then(|new| self.interactions.get_mut(new))
            {
                Some(rec) if free(rec) => {
                    rec.generated[slot] = Some(id);
                    interaction = Some(rec.id);
                }
                _ => kind = StepKind::Comment,
            }
        }
        let (code, info) = if kind == StepKind::Comment {
            (Vec::new(), Vec::new())
        } else {
            (node.code.clone(), node.info.clone())
        };
        self.steps.insert(
            id,
            Step {
                id,
                label: node.label.clone(),
                kind,
                enabled: node.enabled,
                interaction,
                parent: Some(parent),
                children: Vec::new(),
                code,
                info,
            },
        );
        for child in &node.children {
            let cid = self.paste_node(child, id, relink, minted, faults)?;
            self.step_mut(id)?.children.push(cid);
        }
        Ok(id)
    }

    /// Applies one edit to several steps, all or nothing (callers work on a
    /// copy). Returns the clipboard for cut and copy.
    pub fn batch_apply(
        &mut self,
        ids: &[StepId],
        op: BatchOp,
        faults: &mut FaultPlan,
    ) -> Result<Option<Clipboard>> {
        match op {
            BatchOp::Cut => {
                faults.checkpoint()?;
                return self.clipboard_cut(ids).map(Some);
            }
            BatchOp::Copy => return self.clipboard_copy(ids).map(Some),
            _ => {}
        }
        let mut order = self.ordered_selection(ids, false)?;
        if matches!(op, BatchOp::Delete | BatchOp::MoveDown) {
            order.reverse();
        }
        for id in order {
            faults.checkpoint()?;
            match op {
                BatchOp::Delete => {
                    // An ancestor may already have taken it.
                    if self.contains_step(id) {
                        self.delete_step(id)?;
                    }
                }
                BatchOp::MoveUp => self.move_step(id, Direction::Up)?,
                BatchOp::MoveDown => self.move_step(id, Direction::Down)?,
                BatchOp::Enable => self.set_step_enabled(id, true)?,
                BatchOp::Disable => self.set_step_enabled(id, false)?,
                BatchOp::Cut | BatchOp::Copy => unreachable!(),
            }
        }
        Ok(None)
    }

    /// Case-insensitive substring search over labels or interaction data,
    /// in document order.
    pub fn search_steps(&self, query: &str, scope: SearchScope) -> Vec<StepId> {
        let needle = query.to_lowercase();
        self.document_order()
            .into_iter()
            .filter(|id| {
                let step = &self.steps[id];
                match scope {
                    SearchScope::Name => step.label.to_lowercase().contains(&needle),
                    SearchScope::Data => {
                        needle.is_empty()
                            || step
                                .interaction
                                .and_then(|i| self.interactions.get(&i))
                                .is_some_and(|r| {
                                    r.page_values
                                        .values()
                                        .any(|v| v.to_lowercase().contains(&needle))
                                })
                    }
                }
            })
            .collect()
    }

    /// Recomputes each live record's orphaned flag.
    pub(crate) fn refresh_orphans(&mut self) {
        let steps = &self.steps;
        for rec in self.interactions.values_mut() {
            rec.orphaned = !rec.tombstoned
                && !rec
                    .generated
                    .iter()
                    .flatten()
                    .any(|id| steps.get(id).is_some_and(|s| s.interaction == Some(rec.id)));
        }
    }

    /// Structural checks: a forest of one tree per goal, consistent parent
    /// links, kind rules, and interaction linkage.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut names = BTreeSet::new();
        let mut visited = BTreeSet::new();
        for goal in &self.goals {
            if !names.insert(goal.name.as_str()) {
                return Err(format!("duplicate goal {}", goal.name));
            }
            let root = self
                .steps
                .get(&goal.root)
                .ok_or_else(|| format!("goal {} has no root", goal.name))?;
            if root.kind != StepKind::Root || root.parent.is_some() || root.label != ROOT_LABEL {
                return Err(format!("goal {} root is malformed", goal.name));
            }
            let mut stack = vec![goal.root];
            while let Some(id) = stack.pop() {
                if !visited.insert(id) {
                    return Err(format!("step {id} reached twice"));
                }
                let step = self
                    .steps
                    .get(&id)
                    .ok_or_else(|| format!("dangling child {id}"))?;
                if step.id != id {
                    return Err(format!("step {id} stored under wrong key"));
                }
                for c in &step.children {
                    let child = self
                        .steps
                        .get(c)
                        .ok_or_else(|| format!("dangling child {c}"))?;
                    if child.parent != Some(id) {
                        return Err(format!("step {c} parent link mismatch"));
                    }
                    if child.kind == StepKind::Root {
                        return Err(format!("root {c} used as a child"));
                    }
                    stack.push(*c);
                }
            }
        }
        if visited.len() != self.steps.len() {
            return Err("unreachable steps in arena".into());
        }
        for step in self.steps.values() {
            if step.id.0 >= self.next_step {
                return Err(format!("step id {} beyond counter", step.id));
            }
            match step.kind {
                StepKind::Root | StepKind::Comment => {
                    if step.interaction.is_some() || !step.code.is_empty() || !step.info.is_empty()
                    {
                        return Err(format!("non-generated step {} carries code", step.id));
                    }
                }
                StepKind::Generated => {
                    let iid = step
                        .interaction
                        .ok_or_else(|| format!("generated step {} unlinked", step.id))?;
                    let rec = self
                        .interactions
                        .get(&iid)
                        .ok_or_else(|| format!("step {} links missing record {iid}", step.id))?;
                    if rec.slot_of(step.id).is_none() {
                        return Err(format!("record {iid} does not list step {}", step.id));
                    }
                }
            }
        }
        for rec in self.interactions.values() {
            if rec.id.0 >= self.next_interaction {
                return Err(format!("interaction id {} beyond counter", rec.id));
            }
            for id in rec.generated.iter().flatten() {
                if let Some(s) = self.steps.get(id) {
                    if s.interaction != Some(rec.id) && !rec.tombstoned {
                        // The id was reused by nobody; a live step with this id
                        // must belong to the record.
                        return Err(format!("record {} lists foreign step {id}", rec.id));
                    }
                }
            }
        }
        Ok(())
    }
}
