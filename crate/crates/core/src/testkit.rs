//! Seeded generators for randomized tests (code masks with bindings,
//! editing sessions) and the property checks run over them. Checks panic
//! with a description on failure.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::component::ControlKind;
use crate::emit::TargetProfile;
use crate::error::EngineError;
use crate::fault::FaultPlan;
use crate::library::ComponentLibrary;
use crate::mask::Bindings;
use crate::timeline::{replay_event, Command};
use crate::tree::{BatchOp, Direction, ProjectState, StepId, StepKind};
use crate::workspace::Workspace;

const VARS: [&str; 6] = ["A", "B", "C", "Flag", "X_2", "T_V1"];
const VALUES: [&str; 8] = ["0", "1", "", "hi", "\"Hello World\"", "a, b", "<A>", "x;y"];
const WORDS: [&str; 8] = ["print", "x", "loop", "end", "(", ")", ";", ","];

fn pick<'a, R: Rng>(rng: &mut R, items: &'a [&'a str]) -> &'a str {
    items.choose(rng).copied().expect("non-empty")
}

/// A line of text mixing words, tokens and the odd stray bracket.
fn text_line<R: Rng>(rng: &mut R) -> String {
    let n = rng.random_range(0..5);
    let mut parts = Vec::with_capacity(n);
    for _ in 0..n {
        match rng.random_range(0..10) {
            0..=3 => parts.push(format!("<{}>", pick(rng, &VARS))),
            4 => parts.push("<".into()),
            5 => parts.push("<not a token>".into()),
            _ => parts.push(pick(rng, &WORDS).to_owned()),
        }
    }
    parts.join(" ")
}

struct MaskGen<'r, R> {
    rng: &'r mut R,
    lines: Vec<String>,
    budget: usize,
}

impl<R: Rng> MaskGen<'_, R> {
    fn push(&mut self, line: String) {
        self.lines.push(line);
        self.budget = self.budget.saturating_sub(1);
    }

    fn block(&mut self, depth: usize) {
        let n = self.rng.random_range(1..8);
        for _ in 0..n {
            if self.budget < 3 {
                return;
            }
            let roll = self.rng.random_range(0..100);
            match roll {
                0..=14 => {
                    let l = text_line(self.rng);
                    self.push(format!("<RPWI:NEWSTEP> step {l}"));
                }
                15..=34 => {
                    let l = text_line(self.rng);
                    self.push(l);
                }
                35..=37 => self.push("<*> a note".into()),
                38..=39 => self.push("<RPWI:NOTE> another note".into()),
                40..=44 => {
                    let l = text_line(self.rng);
                    self.push(format!("<RPWI:INFORMATION> {l}"));
                }
                45..=49 => {
                    let m = self.rng.random_range(1..=3);
                    self.push(format!("<RPWI:PUTMARK> {m}"));
                }
                50..=53 => {
                    let m = self.rng.random_range(1..=3);
                    self.push(format!("<RPWI:SETMARK> {m}"));
                }
                54..=58 => {
                    let c = *[',', ';', 'x', ')'].choose(self.rng).expect("non-empty");
                    self.push(format!("<RPWI:IGNORELAST> {c}"));
                }
                59..=61 => {
                    let v = pick(self.rng, &VARS);
                    self.push(format!("<RPWI:NEWVAR> {v}"));
                }
                62..=64 => {
                    let l = text_line(self.rng);
                    self.push(format!("<RPWI:SETVARVALUE> {l}"));
                }
                65..=67 => {
                    let v = pick(self.rng, &VARS);
                    self.push(format!("<RPWI:SELECTVAR> {v}"));
                }
                68..=70 => self.push("<RPWI:REPLACEVARSWITHVALUES>".into()),
                _ if depth < 4 => self.test_block(depth + 1),
                _ => {
                    let l = text_line(self.rng);
                    self.push(l);
                }
            }
        }
    }

    fn test_block(&mut self, depth: usize) {
        let var = pick(self.rng, &VARS);
        self.push(format!("<RPWI:TEST> {var}"));
        let config = |g: &mut Self| match g.rng.random_range(0..4) {
            0 => {
                let v = pick(g.rng, &VALUES[..4]);
                g.push(format!("<RPWI:VALUE> {v}"));
            }
            1 => g.push("<RPWI:POSITIVE>".into()),
            2 => g.push("<RPWI:NEGATIVE>".into()),
            _ => {}
        };
        config(self);
        self.block(depth);
        if self.rng.random_bool(0.3) {
            config(self);
        }
        self.push("<RPWI:ENDTEST>".into());
    }
}

/// A random well-formed mask of at most 40 lines with TEST nesting up to
/// depth 4, plus a random set of bindings.
pub fn random_mask<R: Rng>(rng: &mut R) -> (String, Bindings) {
    let mut gen = MaskGen {
        rng,
        lines: Vec::new(),
        budget: 40,
    };
    if gen.rng.random_bool(0.8) {
        gen.push("<RPWI:NEWSTEP> first".into());
    }
    gen.block(0);
    let text = gen.lines.join("\n");
    let mut bindings = Bindings::new();
    for v in VARS {
        if gen.rng.random_bool(0.8) {
            let value = pick(gen.rng, &VALUES);
            bindings.set(v, value);
        }
    }
    (text, bindings)
}

/// Fills every control of a component with a random valid value.
pub fn random_values<R: Rng>(
    library: &ComponentLibrary,
    component: &str,
    rng: &mut R,
) -> BTreeMap<String, String> {
    let c = library.get(component).expect("component exists");
    c.controls()
        .map(|ctl| {
            let v = match ctl.kind {
                ControlKind::Text => {
                    let texts = ["\"hi\"", "x", "\"Hello World\"", "n + 1", "true"];
                    pick(rng, &texts).to_owned()
                }
                ControlKind::Number => rng.random_range(0..20).to_string(),
                ControlKind::Checkbox => if rng.random_bool(0.5) { "1" } else { "0" }.to_owned(),
                ControlKind::Choice => ctl.options.choose(rng).cloned().unwrap_or_default(),
            };
            (ctl.name.clone(), v)
        })
        .collect()
}

/// One step of a random editing session.
#[derive(Debug, Clone)]
pub enum Action {
    Run(Command),
    Copy(Vec<StepId>),
    Paste(StepId),
}

/// Picks a plausible next action for the workspace. Most actions are valid;
/// some are deliberately not (root edits, boundary moves) to exercise
/// rejection. Steps are only added while the tree is below `max_steps`, and
/// pastes never take it past `max_steps`.
pub fn random_action<R: Rng>(ws: &Workspace, rng: &mut R, max_steps: usize) -> Action {
    let state = ws.state();
    let all: Vec<StepId> = state.document_order();
    let roots: Vec<StepId> = state.goals().iter().map(|g| g.root).collect();
    let any_step = |rng: &mut R| -> StepId {
        if all.is_empty() || rng.random_bool(0.05) {
            *roots.choose(rng).expect("a goal exists")
        } else {
            *all.choose(rng).expect("non-empty")
        }
    };
    let live: Vec<_> = state
        .interactions()
        .values()
        .filter(|r| !r.tombstoned && !r.orphaned)
        .map(|r| r.id)
        .collect();
    let crowded = state.step_count() >= max_steps;
    loop {
        let roll = rng.random_range(0..100);
        let action = match roll {
            0..=14 if !crowded => {
                let parent = any_step(rng);
                Action::Run(Command::AddComment {
                    parent,
                    label: format!("note {}", rng.random_range(0..100)),
                })
            }
            15..=34 if !crowded => {
                let components: Vec<&str> = ws
                    .library()
                    .components()
                    .iter()
                    .map(|c| c.id.as_str())
                    .collect();
                let component = pick(rng, &components).to_owned();
                let values = random_values(ws.library(), &component, rng);
                Action::Run(Command::Interaction {
                    anchor: any_step(rng),
                    component,
                    values,
                })
            }
            35..=42 if !live.is_empty() => {
                let interaction = *live.choose(rng).expect("non-empty");
                let rec = state.interaction(interaction).expect("live record");
                let values = if rng.random_bool(0.3) {
                    rec.page_values.clone()
                } else {
                    random_values(ws.library(), &rec.component, rng)
                };
                Action::Run(Command::ModifyInteraction {
                    interaction,
                    values,
                })
            }
            43..=46 if !live.is_empty() => Action::Run(Command::DeleteInteraction {
                interaction: *live.choose(rng).expect("non-empty"),
            }),
            47..=51 => Action::Run(Command::EditLabel {
                step: any_step(rng),
                label: format!("renamed {}", rng.random_range(0..100)),
            }),
            52..=59 => Action::Run(Command::DeleteStep {
                step: any_step(rng),
            }),
            60..=67 => Action::Run(Command::MoveStep {
                step: any_step(rng),
                direction: if rng.random_bool(0.5) {
                    Direction::Up
                } else {
                    Direction::Down
                },
            }),
            68..=73 => Action::Run(Command::SetEnabled {
                step: any_step(rng),
                enabled: rng.random_bool(0.5),
            }),
            74..=78 => Action::Run(Command::ClipboardCut {
                steps: vec![any_step(rng)],
            }),
            79..=82 => Action::Copy(vec![any_step(rng)]),
            83..=88
                if ws
                    .clipboard()
                    .is_some_and(|c| state.step_count() + c.step_count() <= max_steps) =>
            {
                Action::Paste(any_step(rng))
            }
            89..=95 => {
                let n = rng.random_range(1..4);
                let steps = (0..n).map(|_| any_step(rng)).collect();
                let ops = [
                    BatchOp::Cut,
                    BatchOp::Copy,
                    BatchOp::Delete,
                    BatchOp::MoveUp,
                    BatchOp::MoveDown,
                    BatchOp::Enable,
                    BatchOp::Disable,
                ];
                Action::Run(Command::Batch {
                    steps,
                    op: *ops.choose(rng).expect("non-empty"),
                })
            }
            96..=97 => Action::Run(Command::AddGoal {
                name: format!("goal{}", rng.random_range(0..5)),
            }),
            _ => continue,
        };
        return action;
    }
}

/// Applies an action; errors are returned and leave the workspace unchanged.
pub fn perform(ws: &mut Workspace, action: &Action) -> crate::Result<()> {
    match action {
        Action::Run(c) => ws.execute(c.clone()).map(|_| ()),
        Action::Copy(steps) => ws.copy(steps),
        Action::Paste(target) => ws.paste(*target).map(|_| ()),
    }
}

/// Non-root steps that carry code, for properties over generated steps.
pub fn generated_steps(ws: &Workspace) -> Vec<StepId> {
    let state = ws.state();
    state
        .document_order()
        .into_iter()
        .filter(|id| state.step(*id).is_ok_and(|s| s.kind == StepKind::Generated))
        .collect()
}

/// A seeded session of `actions` random attempts on a tree kept near
/// `max_steps`. Rejected actions are skipped.
pub fn random_session(
    library: ComponentLibrary,
    seed: u64,
    actions: usize,
    max_steps: usize,
) -> Workspace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ws = Workspace::new(format!("s{seed}"), library);
    for _ in 0..actions {
        let action = random_action(&ws, &mut rng, max_steps);
        let _ = perform(&mut ws, &action);
    }
    ws
}

/// C-family tokens: identifiers, numbers, whole string and char literals,
/// and single punctuation characters. Comments are dropped.
pub fn c_tokens(src: &str) -> Vec<String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i + 1 < chars.len() && !(chars[i] == '*' && chars[i + 1] == '/') {
                i += 1;
            }
            i += 2;
        } else if c == '"' || c == '\'' {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i] != c {
                if chars[i] == '\\' {
                    i += 1;
                }
                i += 1;
            }
            i += 1;
            out.push(chars[start..i.min(chars.len())].iter().collect());
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(chars[start..i].iter().collect());
        } else {
            out.push(c.to_string());
            i += 1;
        }
    }
    out
}

/// All goals emitted with the library's profile, concatenated.
pub fn emitted_text(ws: &Workspace) -> String {
    let profile =
        TargetProfile::builtin(&ws.library().target_profile).expect("library profile is built in");
    ws.emit_all(&profile)
        .expect("emits")
        .files
        .into_iter()
        .map(|f| f.text)
        .collect()
}

/// Every prefix of the log equals the fold of its events from the base,
/// and the live state is the fold up to the head.
pub fn check_fold(ws: &Workspace) {
    let tl = ws.timeline();
    let mut folded = tl.base().clone();
    assert_eq!(ws.state_at(0).expect("t = 0"), folded);
    for (i, event) in tl.events().iter().enumerate() {
        folded = replay_event(&folded, event, ws.library()).expect("event replays");
        assert_eq!(
            ws.state_at(i + 1).expect("t in range"),
            folded,
            "prefix {}",
            i + 1
        );
        if i + 1 == ws.head() {
            assert_eq!(ws.state(), &folded, "live state at head {}", ws.head());
        }
    }
    if ws.head() == 0 {
        assert_eq!(ws.state(), tl.base());
    }
}

type Shape = Vec<(StepId, Option<StepId>, bool, Vec<String>)>;

fn shape(state: &ProjectState) -> Shape {
    state
        .document_order()
        .into_iter()
        .map(|id| {
            let s = state.step(id).expect("listed step");
            (id, s.parent, s.enabled, s.code.clone())
        })
        .collect()
}

/// The edit-surface properties around one randomly picked step: move up
/// then down, disable then re-enable, cut and paste back at the end of the
/// parent, copy and paste, modify with recorded values, label edits and
/// deletion.
pub fn check_edit_properties<R: Rng>(ws: &Workspace, rng: &mut R) {
    let state = ws.state();
    let steps: Vec<StepId> = state
        .document_order()
        .into_iter()
        .filter(|id| state.step(*id).is_ok_and(|s| s.kind != StepKind::Root))
        .collect();
    let Some(&s) = steps.choose(rng) else { return };
    let text = emitted_text(ws);

    let mut w = ws.clone();
    if w.execute(Command::MoveStep {
        step: s,
        direction: Direction::Up,
    })
    .is_ok()
    {
        w.execute(Command::MoveStep {
            step: s,
            direction: Direction::Down,
        })
        .expect("moving back down");
        assert_eq!(w.state(), state, "move up then down of {s}");
    }

    let mut w = ws.clone();
    let enabled = state.step(s).expect("picked").enabled;
    w.execute(Command::SetEnabled {
        step: s,
        enabled: !enabled,
    })
    .expect("toggle");
    w.execute(Command::SetEnabled { step: s, enabled })
        .expect("toggle back");
    assert_eq!(w.state(), state, "disable/enable of {s}");
    assert_eq!(emitted_text(&w), text);

    if let Some(&g) = generated_steps(ws).choose(rng) {
        let mut w = ws.clone();
        w.execute(Command::EditLabel {
            step: g,
            label: "relabelled".into(),
        })
        .expect("relabel");
        assert_eq!(emitted_text(&w), text, "relabelling {g}");
    }

    // Cut the last child and paste it back under its parent: same program,
    // same shape up to fresh ids.
    let parent = state.step(s).expect("picked").parent.expect("non-root");
    if state.step(parent).expect("parent").children.last() == Some(&s) {
        let mut w = ws.clone();
        w.execute(Command::ClipboardCut { steps: vec![s] })
            .expect("cut");
        w.paste(parent).expect("paste");
        assert_eq!(emitted_text(&w), text, "cut and paste of {s}");
        assert_eq!(w.state().step_count(), state.step_count());
        w.state()
            .check_invariants()
            .expect("invariants after paste");
    }

    let mut w = ws.clone();
    w.copy(&[s]).expect("copy");
    let size = w.clipboard().expect("filled").step_count();
    w.paste(parent).expect("paste copy");
    assert_eq!(w.state().step_count(), state.step_count() + size);
    w.state().check_invariants().expect("invariants after copy");

    for rec in state.interactions().values() {
        if rec.tombstoned || rec.orphaned {
            continue;
        }
        let mut w = ws.clone();
        w.execute(Command::ModifyInteraction {
            interaction: rec.id,
            values: rec.page_values.clone(),
        })
        .expect("modify with recorded values");
        assert_eq!(emitted_text(&w), text, "modify of interaction {}", rec.id);
        assert_eq!(
            shape(w.state()),
            shape(state),
            "modify of interaction {}",
            rec.id
        );
    }

    let mut w = ws.clone();
    let subtree = state.preorder(s);
    w.execute(Command::DeleteStep { step: s }).expect("delete");
    assert_eq!(w.state().step_count(), state.step_count() - subtree.len());
    for id in subtree {
        assert_eq!(w.state().step(id).err(), Some(EngineError::UnknownStep(id)));
    }
}

/// Arms a fault at each checkpoint `command` passes and checks every failed
/// attempt leaves the serialized state and the log as they were. Returns
/// the number of injected faults.
pub fn check_atomic(ws: &Workspace, command: &Command) -> usize {
    let mut probe = ws.clone();
    let mut counting = FaultPlan::none();
    probe
        .execute_with(command.clone(), &mut counting)
        .unwrap_or_else(|e| panic!("{} fails without faults: {e}", command.kind()));
    let checkpoints = counting.checkpoints_seen();
    let before = serde_json::to_string(ws.state()).expect("serializes");
    for n in 1..=checkpoints {
        let mut attempt = ws.clone();
        let err = attempt
            .execute_with(command.clone(), &mut FaultPlan::fail_at(n))
            .expect_err("armed fault fires");
        assert_eq!(err, EngineError::InjectedFault(n));
        assert_eq!(
            serde_json::to_string(attempt.state()).expect("serializes"),
            before
        );
        assert_eq!(attempt.timeline(), ws.timeline());
        assert_eq!(attempt.clipboard(), ws.clipboard());
    }
    checkpoints
}

/// Commands with checkpoints that succeed on the workspace: a submit, a
/// modify per live interaction, disable and delete batches and a paste.
pub fn fault_targets<R: Rng>(ws: &Workspace, rng: &mut R) -> Vec<Command> {
    let state = ws.state();
    let all: Vec<StepId> = state
        .document_order()
        .into_iter()
        .filter(|id| state.step(*id).is_ok_and(|s| s.kind != StepKind::Root))
        .collect();
    let mut out = Vec::new();
    let components: Vec<&str> = ws
        .library()
        .components()
        .iter()
        .map(|c| c.id.as_str())
        .collect();
    let component = pick(rng, &components).to_owned();
    out.push(Command::Interaction {
        anchor: ws.default_anchor(),
        values: random_values(ws.library(), &component, rng),
        component,
    });
    for rec in state.interactions().values() {
        if !rec.tombstoned && !rec.orphaned {
            out.push(Command::ModifyInteraction {
                interaction: rec.id,
                values: random_values(ws.library(), &rec.component, rng),
            });
        }
    }
    if all.len() >= 2 {
        let picked: Vec<StepId> = all.choose_multiple(rng, 2).copied().collect();
        out.push(Command::Batch {
            steps: picked.clone(),
            op: BatchOp::Disable,
        });
        if !state.is_ancestor(picked[0], picked[1]) && !state.is_ancestor(picked[1], picked[0]) {
            out.push(Command::Batch {
                steps: picked.clone(),
                op: BatchOp::Delete,
            });
        }
        if let Ok(clipboard) = state.clipboard_copy(&picked[..1]) {
            out.push(Command::Paste {
                target: ws.default_anchor(),
                clipboard,
            });
        }
    }
    out.retain(|c| ws.clone().execute(c.clone()).is_ok());
    out
}
