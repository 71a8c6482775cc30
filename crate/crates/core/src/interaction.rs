//! Interactions: running a component's mask with page values and splicing
//! the generated steps into the tree, then modifying or deleting them later.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::component::{Component, InteractionPageSpec};
use crate::error::{EngineError, Result};
use crate::fault::FaultPlan;
use crate::library::ComponentLibrary;
use crate::mask::{evaluate_mask, parse_mask, Bindings, GenerationResult, SlotRef};
use crate::tree::{check_label, InteractionId, ProjectState, Step, StepId, StepKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub id: InteractionId,
    pub component: String,
    pub page_values: BTreeMap<String, String>,
    pub anchor: StepId,
    /// Step per mask slot. `None` marks a slot whose step was never
    /// materialised (a paste of a partial copy).
    pub generated: Vec<Option<StepId>>,
    pub tombstoned: bool,
    pub orphaned: bool,
}

impl InteractionRecord {
    pub fn slot_of(&self, step: StepId) -> Option<usize> {
        self.generated.iter().position(|s| *s == Some(step))
    }
}

/// The pages to show for a fresh interaction, with default values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingInteraction {
    pub component: String,
    pub anchor: StepId,
    pub pages: Vec<InteractionPageSpec>,
    pub values: BTreeMap<String, String>,
}

pub fn default_values(component: &Component) -> BTreeMap<String, String> {
    component
        .controls()
        .map(|c| (c.name.clone(), c.default.clone()))
        .collect()
}

/// Checks that `values` covers exactly the component's controls with
/// type-valid entries.
pub fn validate_values(component: &Component, values: &BTreeMap<String, String>) -> Result<()> {
    for control in component.controls() {
        let value = values
            .get(&control.name)
            .ok_or_else(|| EngineError::ValidationError {
                control: control.name.clone(),
                reason: "missing value".into(),
            })?;
        control
            .check_value(value)
            .map_err(|reason| EngineError::ValidationError {
                control: control.name.clone(),
                reason,
            })?;
    }
    if let Some(extra) = values.keys().find(|k| component.control(k).is_none()) {
        return Err(EngineError::ValidationError {
            control: extra.clone(),
            reason: "no such control".into(),
        });
    }
    Ok(())
}

/// Routes page values to mask variables through the matching table.
pub fn bindings_for(component: &Component, values: &BTreeMap<String, String>) -> Bindings {
    component
        .matching
        .iter()
        .filter_map(|m| {
            values
                .get(&m.page_variable)
                .map(|v| (m.mask_variable.clone(), v.clone()))
        })
        .collect()
}

/// Validates values and evaluates the component's mask.
pub fn generate(
    component: &Component,
    values: &BTreeMap<String, String>,
) -> Result<GenerationResult> {
    validate_values(component, values)?;
    let script = parse_mask(&component.mask)?;
    let result = evaluate_mask(&script, &bindings_for(component, values))?;
    if !result.anchor_code.is_empty() {
        return Err(EngineError::CodeOutsideStep);
    }
    for step in &result.steps {
        check_label(&step.label)?;
    }
    Ok(result)
}

fn lookup<'a>(library: &'a ComponentLibrary, id: &str) -> Result<&'a Component> {
    library
        .get(id)
        .ok_or_else(|| EngineError::UnknownComponent(id.to_owned()))
}

impl ProjectState {
    pub fn begin_interaction(
        &self,
        library: &ComponentLibrary,
        anchor: StepId,
        component: &str,
    ) -> Result<PendingInteraction> {
        self.step(anchor)?;
        let c = lookup(library, component)?;
        Ok(PendingInteraction {
            component: c.id.clone(),
            anchor,
            pages: c.pages.clone(),
            values: default_values(c),
        })
    }

    /// Runs the component and inserts its steps: anchor-level steps become
    /// the last children of `anchor`, nested ones go under their slot.
    /// Mints the interaction id first, then one step id per slot.
    pub fn submit_interaction(
        &mut self,
        library: &ComponentLibrary,
        anchor: StepId,
        component: &str,
        values: &BTreeMap<String, String>,
        faults: &mut FaultPlan,
    ) -> Result<InteractionId> {
        self.step(anchor)?;
        let c = lookup(library, component)?;
        let generation = generate(c, values)?;
        let iid = self.mint_interaction();
        let ids = self.build_steps(iid, &generation, anchor, &BTreeMap::new(), faults)?;
        for (slot, g) in generation.steps.iter().enumerate() {
            if g.parent == SlotRef::Anchor {
                self.step_mut(anchor)?.children.push(ids[slot]);
            }
        }
        self.interactions_mut().insert(
            iid,
            InteractionRecord {
                id: iid,
                component: c.id.clone(),
                page_values: values.clone(),
                anchor,
                generated: ids.into_iter().map(Some).collect(),
                tombstoned: false,
                orphaned: false,
            },
        );
        Ok(iid)
    }

    /// Creates the steps of a generation. `reuse` maps slot index to an id
    /// (and enabled flag) to keep; other slots get fresh ids. Nested steps
    /// are linked to their parents; anchor-level ones are left for the caller.
    fn build_steps(
        &mut self,
        iid: InteractionId,
        generation: &GenerationResult,
        anchor_parent: StepId,
        reuse: &BTreeMap<usize, (StepId, bool)>,
        faults: &mut FaultPlan,
    ) -> Result<Vec<StepId>> {
        let mut ids = Vec::with_capacity(generation.steps.len());
        for (slot, g) in generation.steps.iter().enumerate() {
            faults.checkpoint()?;
            let (id, enabled) = match reuse.get(&slot) {
                Some(&(id, enabled)) => (id, enabled),
                None => (self.mint_step(), true),
            };
            let parent = match g.parent {
                SlotRef::Anchor => anchor_parent,
                SlotRef::Step(j) => ids[j],
            };
            self.insert_step(Step {
                id,
                label: g.label.clone(),
                kind: StepKind::Generated,
                enabled,
                interaction: Some(iid),
                parent: Some(parent),
                children: Vec::new(),
                code: g.code.clone(),
                info: g.info.clone(),
            });
            if let SlotRef::Step(_) = g.parent {
                self.step_mut(parent)?.children.push(id);
            }
            ids.push(id);
        }
        Ok(ids)
    }

    fn live_record(&self, iid: InteractionId) -> Result<&InteractionRecord> {
        match self.interaction(iid) {
            Some(r) if !r.tombstoned => Ok(r),
            _ => Err(EngineError::UnknownInteraction(iid)),
        }
    }

    /// Steps of the record still present in the tree, by slot.
    fn surviving(&self, rec: &InteractionRecord) -> BTreeMap<usize, StepId> {
        rec.generated
            .iter()
            .enumerate()
            .filter_map(|(slot, id)| {
                let id = (*id)?;
                let step = self.step(id).ok()?;
                (step.interaction == Some(rec.id)).then_some((slot, id))
            })
            .collect()
    }

    /// Re-runs the mask with new values. Surviving steps keep their ids,
    /// positions and enabled flags; labels and code are regenerated. Steps
    /// from other sources under a generated step stay under the step with
    /// the same slot index.
    pub fn modify_interaction(
        &mut self,
        library: &ComponentLibrary,
        iid: InteractionId,
        values: &BTreeMap<String, String>,
        faults: &mut FaultPlan,
    ) -> Result<()> {
        let rec = self.live_record(iid)?.clone();
        let c = lookup(library, &rec.component)?;
        let generation = generate(c, values)?;
        let survivors = self.surviving(&rec);
        if survivors.is_empty() {
            return Err(EngineError::InteractionOrphaned(iid));
        }
        let own: BTreeSet<StepId> = survivors.values().copied().collect();
        for (&slot, &id) in survivors.range(generation.steps.len()..) {
            if self.step(id)?.children.iter().any(|c| !own.contains(c)) {
                return Err(EngineError::SlotVanished { slot });
            }
        }
        // Same parent slot for every slot both generations have: update in
        // place. Otherwise rebuild the new shape where the old one stood.
        let compatible = generate(c, &rec.page_values).is_ok_and(|old| {
            old.steps.len() == rec.generated.len()
                && old
                    .steps
                    .iter()
                    .zip(&generation.steps)
                    .all(|(a, b)| a.parent == b.parent)
        });
        let ids = if compatible {
            self.update_in_place(&rec, &generation, &survivors, faults)?
        } else {
            self.rebuild(iid, &generation, &survivors, faults)?
                .into_iter()
                .map(Some)
                .collect()
        };
        let rec = self
            .interactions_mut()
            .get_mut(&iid)
            .expect("record exists");
        rec.page_values = values.clone();
        rec.generated = ids;
        self.refresh_orphans();
        Ok(())
    }

    /// Rewrites surviving slots where they are. Slots the user deleted stay
    /// deleted, new slots go after their nearest earlier sibling slot, and
    /// dropped slots are removed with their children lifted into place.
    fn update_in_place(
        &mut self,
        rec: &InteractionRecord,
        generation: &GenerationResult,
        survivors: &BTreeMap<usize, StepId>,
        faults: &mut FaultPlan,
    ) -> Result<Vec<Option<StepId>>> {
        let own: BTreeSet<StepId> = survivors.values().copied().collect();
        let first_top = survivors
            .values()
            .find(|id| !self.steps_parent(**id).is_some_and(|p| own.contains(&p)))
            .expect("a forest of survivors has a top-level step");
        let host = self
            .steps_parent(*first_top)
            .expect("generated steps have parents");
        let old_len = rec.generated.len();
        let mut ids: Vec<Option<StepId>> = vec![None; generation.steps.len()];
        for (slot, g) in generation.steps.iter().enumerate() {
            faults.checkpoint()?;
            if let Some(&id) = survivors.get(&slot) {
                let step = self.step_mut(id)?;
                step.label = g.label.clone();
                step.code = g.code.clone();
                step.info = g.info.clone();
                ids[slot] = Some(id);
                continue;
            }
            if slot < old_len {
                continue;
            }
            let parent = match g.parent {
                SlotRef::Anchor => host,
                SlotRef::Step(p) => match ids[p] {
                    Some(id) => id,
                    None => continue,
                },
            };
            let id = self.mint_step();
            self.insert_step(Step {
                id,
                label: g.label.clone(),
                kind: StepKind::Generated,
                enabled: true,
                interaction: Some(rec.id),
                parent: Some(parent),
                children: Vec::new(),
                code: g.code.clone(),
                info: g.info.clone(),
            });
            let before = (0..slot)
                .rev()
                .filter(|t| generation.steps[*t].parent == g.parent)
                .filter_map(|t| ids[t])
                .find(|t| self.steps_parent(*t) == Some(parent));
            let children = &mut self.step_mut(parent)?.children;
            match before.and_then(|b| children.iter().position(|c| *c == b)) {
                Some(i) => children.insert(i + 1, id),
                None if g.parent == SlotRef::Anchor => children.push(id),
                None => children.insert(0, id),
            }
            ids[slot] = Some(id);
        }
        for (_, &id) in survivors.range(generation.steps.len()..) {
            faults.checkpoint()?;
            let step = self.remove_step_entry(id).expect("survivor exists");
            let parent = step.parent.expect("generated steps have parents");
            for c in &step.children {
                self.step_mut(*c)?.parent = Some(parent);
            }
            let siblings = &mut self.step_mut(parent)?.children;
            let i = siblings
                .iter()
                .position(|c| *c == id)
                .expect("linked child");
            siblings.splice(i..=i, step.children);
        }
        Ok(ids)
    }

    /// Rebuilds the generation's shape at the first top-level survivor's
    /// position, reusing survivor ids by slot.
    fn rebuild(
        &mut self,
        iid: InteractionId,
        generation: &GenerationResult,
        survivors: &BTreeMap<usize, StepId>,
        faults: &mut FaultPlan,
    ) -> Result<Vec<StepId>> {
        let survivors = survivors.clone();
        let own: BTreeSet<StepId> = survivors.values().copied().collect();
        let slot_of: BTreeMap<StepId, usize> = survivors.iter().map(|(s, id)| (*id, *s)).collect();

        // Foreign children of each surviving slot, bucketed by the slot of
        // the own sibling that precedes them (None = before any own sibling).
        type Buckets = Vec<(Option<usize>, StepId)>;
        let mut foreign: BTreeMap<usize, Buckets> = BTreeMap::new();
        for (&slot, &id) in &survivors {
            let mut prev = None;
            for child in &self.step(id)?.children {
                match slot_of.get(child) {
                    Some(&s) => prev = Some(s),
                    None => foreign.entry(slot).or_default().push((prev, *child)),
                }
            }
        }
        // Insertion point: where the first top-level survivor sits.
        let first = *survivors
            .values()
            .find(|id| !self.steps_parent(**id).is_some_and(|p| own.contains(&p)))
            .expect("a forest of survivors has a top-level step");
        let host = self
            .steps_parent(first)
            .expect("generated steps have parents");
        let host_children = &self.step(host)?.children;
        let pos = host_children
            .iter()
            .take_while(|c| **c != first)
            .filter(|c| !own.contains(c))
            .count();

        // Unhook survivors from foreign parents, then drop them.
        for &id in &own {
            if let Some(p) = self.steps_parent(id) {
                if !own.contains(&p) {
                    self.step_mut(p)?.children.retain(|c| *c != id);
                }
            }
        }
        let mut reuse = BTreeMap::new();
        for (&slot, &id) in &survivors {
            let old = self.remove_step_entry(id).expect("survivor exists");
            if slot < generation.steps.len() {
                reuse.insert(slot, (id, old.enabled));
            }
        }

        let ids = self.build_steps(iid, generation, host, &reuse, faults)?;

        // Reattach foreign children per slot.
        for (slot, buckets) in foreign {
            let new_id = ids[slot];
            let own_children = std::mem::take(&mut self.step_mut(new_id)?.children);
            let mut merged: Vec<StepId> = buckets
                .iter()
                .filter(|(prev, _)| prev.is_none())
                .map(|(_, c)| *c)
                .collect();
            let mut placed: BTreeSet<StepId> = merged.iter().copied().collect();
            for child in &own_children {
                merged.push(*child);
                let child_slot = ids.iter().position(|x| x == child);
                for (prev, c) in &buckets {
                    if prev.is_some() && *prev == child_slot {
                        merged.push(*c);
                        placed.insert(*c);
                    }
                }
            }
            for (_, c) in &buckets {
                if !placed.contains(c) {
                    merged.push(*c);
                }
            }
            for c in &merged {
                self.step_mut(*c)?.parent = Some(new_id);
            }
            self.step_mut(new_id)?.children = merged;
        }

        let top: Vec<StepId> = generation
            .steps
            .iter()
            .enumerate()
            .filter(|(_, g)| g.parent == SlotRef::Anchor)
            .map(|(slot, _)| ids[slot])
            .collect();
        let host_children = &mut self.step_mut(host)?.children;
        host_children.splice(pos..pos, top);
        Ok(ids)
    }

    fn steps_parent(&self, id: StepId) -> Option<StepId> {
        self.step(id).ok().and_then(|s| s.parent)
    }

    /// Removes every surviving step of the interaction (with its subtree)
    /// and tombstones the record.
    pub fn delete_interaction(&mut self, iid: InteractionId) -> Result<()> {
        let rec = self.live_record(iid)?.clone();
        for id in self.surviving(&rec).into_values() {
            if self.contains_step(id) {
                self.detach(id)?;
                for gone in self.preorder(id) {
                    self.remove_step_entry(gone);
                }
            }
        }
        let rec = self
            .interactions_mut()
            .get_mut(&iid)
            .expect("record exists");
        rec.tombstoned = true;
        self.refresh_orphans();
        Ok(())
    }
}
