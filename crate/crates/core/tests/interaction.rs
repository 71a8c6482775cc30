mod common;

use common::*;
use gcr_core::component::{ControlKind, PageRole};
use gcr_core::emit::{emit_program, TargetProfile};
use gcr_core::fault::FaultPlan;
use gcr_core::testkit::check_atomic;
use gcr_core::timeline::Command;
use gcr_core::tree::{BatchOp, StepKind};
use gcr_core::{EngineError, InteractionId, StepId, Workspace};

fn emitted(ws: &Workspace) -> String {
    emit_program(ws.state(), "main", &TargetProfile::cpp_console())
        .unwrap()
        .files[0]
        .text
        .clone()
}

fn if_values(elseif: &str, else_: &str) -> std::collections::BTreeMap<String, String> {
    values(&[
        ("Page1_Condition", "x > 1"),
        ("Page1_UseElseIf", elseif),
        ("Page1_ElseIfCondition", "x > 0"),
        ("Page1_UseElse", else_),
    ])
}

#[test]
fn begin_print_shows_one_empty_text_control() {
    let ws = Workspace::new("p", cpp_library());
    let pending = ws
        .begin_interaction(first_step(&ws), "print-text-console")
        .unwrap();
    assert_eq!(pending.pages.len(), 1);
    assert_eq!(pending.pages[0].role, PageRole::Default);
    let controls = &pending.pages[0].controls;
    assert_eq!(controls.len(), 1);
    assert_eq!(controls[0].kind, ControlKind::Text);
    assert_eq!(pending.values["Page1_Text1"], "");
}

#[test]
fn begin_wait_has_checkbox_third() {
    let ws = Workspace::new("p", cpp_library());
    let pending = ws
        .begin_interaction(first_step(&ws), "wait-key-seconds")
        .unwrap();
    let controls = &pending.pages[0].controls;
    assert_eq!(controls[2].label, "Wait nSeconds");
    assert_eq!(controls[2].kind, ControlKind::Checkbox);
    assert!(controls.iter().any(|c| c.kind == ControlKind::Number));
}

#[test]
fn begin_errors() {
    let ws = Workspace::new("p", cpp_library());
    assert_eq!(
        ws.begin_interaction(first_step(&ws), "nope"),
        Err(EngineError::UnknownComponent("nope".into()))
    );
    assert_eq!(
        ws.begin_interaction(StepId(77), "print-text-console"),
        Err(EngineError::UnknownStep(StepId(77)))
    );
}

#[test]
fn submit_links_steps_to_record() {
    let ws = hello_world(cpp_library());
    let state = ws.state();
    let rec = state.interaction(InteractionId(1)).unwrap();
    assert_eq!(rec.component, "print-text-console");
    assert_eq!(rec.page_values, print_values("\"Hello World\""));
    let step = state.step(rec.generated[0].unwrap()).unwrap();
    assert_eq!(step.kind, StepKind::Generated);
    assert_eq!(step.interaction, Some(rec.id));
    assert_eq!(step.code, ["cout << \"Hello World\" << \"\\n\" ;"]);
}

#[test]
fn invalid_values_leave_state_untouched() {
    let mut ws = Workspace::new("p", cpp_library());
    let before = ws.state().clone();
    let anchor = first_step(&ws);
    let mut missing = wait_values("3");
    missing.remove("Page1_Seconds");
    let cases = [
        (missing, "Page1_Seconds"),
        (
            values(&[
                ("Page1_Message", ""),
                ("Page1_ClearBuffer", "yes"),
                ("Page1_WaitSeconds", "1"),
                ("Page1_Seconds", "3"),
            ]),
            "Page1_ClearBuffer",
        ),
        (wait_values("three"), "Page1_Seconds"),
    ];
    for (vals, control) in cases {
        let err = ws
            .execute(Command::Interaction {
                anchor,
                component: "wait-key-seconds".into(),
                values: vals,
            })
            .unwrap_err();
        assert!(
            matches!(&err, EngineError::ValidationError { control: c, .. } if c == control),
            "{err:?}"
        );
        assert_eq!(ws.state(), &before);
        assert_eq!(ws.timeline().len(), 1);
    }
}

#[test]
fn wait_key_branch_when_unchecked() {
    let mut ws = Workspace::new("p", cpp_library());
    let anchor = first_step(&ws);
    let mut v = wait_values("3");
    v.insert("Page1_WaitSeconds".into(), "0".into());
    v.insert("Page1_Message".into(), "\"Press Enter\"".into());
    ws.execute(Command::Interaction {
        anchor,
        component: "wait-key-seconds".into(),
        values: v,
    })
    .unwrap();
    assert_eq!(labels(&ws), ["The First Step", "Wait Key"]);
    let text = emitted(&ws);
    assert!(
        text.contains("cout << \"Press Enter\" ;\ncin.get() ;\n"),
        "{text}"
    );
}

#[test]
fn modify_changes_label_and_code_in_place() {
    let mut ws = hello_world(cpp_library());
    let count = ws.state().step_count();
    ws.execute(Command::ModifyInteraction {
        interaction: InteractionId(1),
        values: print_values("\"Hi\""),
    })
    .unwrap();
    assert_eq!(ws.state().step_count(), count);
    assert_eq!(
        labels(&ws),
        [
            "The First Step",
            "Print Text – New Line – (\"Hi\")",
            "Wait (3 Seconds)"
        ]
    );
    let step = ws.state().step(StepId(3)).unwrap();
    assert_eq!(step.code, ["cout << \"Hi\" << \"\\n\" ;"]);
}

#[test]
fn modify_with_same_values_is_identity() {
    let mut ws = hello_world(cpp_library());
    let state = ws.state().clone();
    let text = emitted(&ws);
    for iid in [1, 2] {
        let values = ws
            .state()
            .interaction(InteractionId(iid))
            .unwrap()
            .page_values
            .clone();
        ws.execute(Command::ModifyInteraction {
            interaction: InteractionId(iid),
            values,
        })
        .unwrap();
    }
    assert_eq!(emitted(&ws), text);
    assert_eq!(ws.state(), &state);
}

#[test]
fn modify_discards_label_edits_keeps_enabled() {
    let mut ws = hello_world(cpp_library());
    ws.execute(Command::EditLabel {
        step: StepId(3),
        label: "mine".into(),
    })
    .unwrap();
    ws.execute(Command::SetEnabled {
        step: StepId(3),
        enabled: false,
    })
    .unwrap();
    ws.execute(Command::ModifyInteraction {
        interaction: InteractionId(1),
        values: print_values("\"Hi\""),
    })
    .unwrap();
    let step = ws.state().step(StepId(3)).unwrap();
    assert_eq!(step.label, "Print Text – New Line – (\"Hi\")");
    assert!(!step.enabled);
}

#[test]
fn modify_reattaches_foreign_children() {
    let mut ws = Workspace::new("p", cpp_library());
    let anchor = first_step(&ws);
    ws.execute(Command::Interaction {
        anchor,
        component: "for-loop".into(),
        values: values(&[
            ("Page1_Variable", "i"),
            ("Page1_From", "1"),
            ("Page1_To", "3"),
        ]),
    })
    .unwrap();
    // Steps: 3 For Loop, 4 Start Here, 5 End of For Loop.
    ws.execute(Command::Interaction {
        anchor: StepId(4),
        component: "print-number".into(),
        values: values(&[("Page1_Value", "i")]),
    })
    .unwrap();
    ws.execute(Command::AddComment {
        parent: StepId(4),
        label: "after".into(),
    })
    .unwrap();
    ws.execute(Command::ModifyInteraction {
        interaction: InteractionId(1),
        values: values(&[
            ("Page1_Variable", "i"),
            ("Page1_From", "2"),
            ("Page1_To", "5"),
        ]),
    })
    .unwrap();
    let start = ws.state().step(StepId(4)).unwrap();
    assert_eq!(start.children, [StepId(6), StepId(7)]);
    assert_eq!(
        labels(&ws),
        [
            "The First Step",
            "For Loop (i = 2 To 5)",
            "Start Here",
            "Print Number (i)",
            "after",
            "End of For Loop"
        ]
    );
    assert!(emitted(&ws)
        .contains("for ( int i = 2 ; i <= 5 ; i++ ) {\nprintf(\" %d \\n\" , i) ;\n// after\n}\n"));
}

#[test]
fn modify_keeps_position_among_siblings() {
    let mut ws = hello_world(cpp_library());
    ws.execute(Command::MoveStep {
        step: StepId(4),
        direction: gcr_core::tree::Direction::Up,
    })
    .unwrap();
    ws.execute(Command::ModifyInteraction {
        interaction: InteractionId(1),
        values: print_values("\"Hi\""),
    })
    .unwrap();
    assert_eq!(
        labels(&ws),
        [
            "The First Step",
            "Wait (3 Seconds)",
            "Print Text – New Line – (\"Hi\")"
        ]
    );
}

#[test]
fn dropping_an_occupied_branch_is_refused() {
    let mut ws = Workspace::new("p", cpp_library());
    let anchor = first_step(&ws);
    ws.execute(Command::Interaction {
        anchor,
        component: "if-statement".into(),
        values: if_values("0", "1"),
    })
    .unwrap();
    // Slots: 0 If, 1 Start Here, 2 Else, 3 Start Here, 4 End If.
    let rec = ws.state().interaction(InteractionId(1)).unwrap().clone();
    let else_start = rec.generated[3].unwrap();
    assert_eq!(
        ws.state().step(rec.generated[2].unwrap()).unwrap().label,
        "Else"
    );
    ws.execute(Command::AddComment {
        parent: else_start,
        label: "in else".into(),
    })
    .unwrap();
    let before = serde_json::to_string(ws.state()).unwrap();
    let err = ws
        .execute(Command::ModifyInteraction {
            interaction: InteractionId(1),
            values: if_values("0", "0"),
        })
        .unwrap_err();
    assert_eq!(err, EngineError::SlotVanished { slot: 3 });
    assert_eq!(serde_json::to_string(ws.state()).unwrap(), before);

    // Without the foreign step the same change goes through.
    let comment = ws.state().step(else_start).unwrap().children[0];
    ws.execute(Command::DeleteStep { step: comment }).unwrap();
    ws.execute(Command::ModifyInteraction {
        interaction: InteractionId(1),
        values: if_values("0", "0"),
    })
    .unwrap();
    assert_eq!(
        labels(&ws),
        ["The First Step", "If (x > 1)", "Start Here", "End If"]
    );
}

#[test]
fn turning_a_branch_on_inserts_its_slots() {
    let mut ws = Workspace::new("p", cpp_library());
    let anchor = first_step(&ws);
    ws.execute(Command::Interaction {
        anchor,
        component: "if-statement".into(),
        values: if_values("0", "0"),
    })
    .unwrap();
    ws.execute(Command::AddComment {
        parent: anchor,
        label: "after".into(),
    })
    .unwrap();
    ws.execute(Command::ModifyInteraction {
        interaction: InteractionId(1),
        values: if_values("0", "1"),
    })
    .unwrap();
    assert_eq!(
        labels(&ws),
        [
            "The First Step",
            "If (x > 1)",
            "Start Here",
            "Else",
            "Start Here",
            "End If",
            "after"
        ]
    );
    ws.state().check_invariants().unwrap();
}

#[test]
fn if_statement_all_branches_emit_in_order() {
    let mut ws = Workspace::new("p", cpp_library());
    let anchor = first_step(&ws);
    ws.execute(Command::Interaction {
        anchor,
        component: "if-statement".into(),
        values: if_values("1", "1"),
    })
    .unwrap();
    let text = emitted(&ws);
    assert!(
        text.contains("if ( x > 1 ) {\n} else if ( x > 0 ) {\n} else {\n}\n"),
        "{text}"
    );
}

#[test]
fn delete_interaction_removes_its_steps() {
    let mut ws = hello_world(cpp_library());
    ws.execute(Command::DeleteInteraction {
        interaction: InteractionId(2),
    })
    .unwrap();
    assert_eq!(
        labels(&ws),
        [
            "The First Step",
            "Print Text – New Line – (\"Hello World\")"
        ]
    );
    assert!(ws.state().interaction(InteractionId(2)).unwrap().tombstoned);
    let text = emitted(&ws);
    assert!(!text.contains("sleep_for"));
    assert_eq!(
        ws.execute(Command::DeleteInteraction {
            interaction: InteractionId(2)
        }),
        Err(EngineError::UnknownInteraction(InteractionId(2)))
    );
}

#[test]
fn delete_interaction_after_user_deleted_steps() {
    let mut ws = hello_world(cpp_library());
    ws.execute(Command::DeleteStep { step: StepId(4) }).unwrap();
    assert!(ws.state().interaction(InteractionId(2)).unwrap().orphaned);
    assert_eq!(
        ws.execute(Command::ModifyInteraction {
            interaction: InteractionId(2),
            values: wait_values("5"),
        }),
        Err(EngineError::InteractionOrphaned(InteractionId(2)))
    );
    let steps = ws.state().step_count();
    ws.execute(Command::DeleteInteraction {
        interaction: InteractionId(2),
    })
    .unwrap();
    assert_eq!(ws.state().step_count(), steps);
    assert!(ws.state().interaction(InteractionId(2)).unwrap().tombstoned);
}

#[test]
fn replaying_submit_reproduces_post_state() {
    let ws = hello_world(cpp_library());
    let pre = ws.state_at(2).unwrap();
    let rec = ws.state().interaction(InteractionId(2)).unwrap();
    let mut copy = pre.clone();
    copy.submit_interaction(
        ws.library(),
        rec.anchor,
        &rec.component,
        &rec.page_values,
        &mut FaultPlan::none(),
    )
    .unwrap();
    assert_eq!(&copy, ws.state());
}

#[test]
fn injected_faults_are_atomic() {
    let mut ws = Workspace::new("p", cpp_library());
    let anchor = first_step(&ws);
    let submit = Command::Interaction {
        anchor,
        component: "if-statement".into(),
        values: if_values("1", "1"),
    };
    assert_eq!(check_atomic(&ws, &submit), 7);
    ws.execute(submit).unwrap();
    ws.execute(Command::AddComment {
        parent: anchor,
        label: "x".into(),
    })
    .unwrap();
    assert!(
        check_atomic(
            &ws,
            &Command::ModifyInteraction {
                interaction: InteractionId(1),
                values: if_values("0", "1")
            }
        ) >= 5
    );
    let all = ws.state().document_order();
    check_atomic(
        &ws,
        &Command::Batch {
            steps: all[1..].to_vec(),
            op: BatchOp::Disable,
        },
    );
    check_atomic(
        &ws,
        &Command::Batch {
            steps: vec![all[1], all[all.len() - 1]],
            op: BatchOp::Delete,
        },
    );
    let clipboard = ws.state().clipboard_copy(&[all[1]]).unwrap();
    check_atomic(
        &ws,
        &Command::Paste {
            target: anchor,
            clipboard,
        },
    );
}

#[test]
fn injected_faults_on_random_trees() {
    use gcr_core::testkit::{fault_targets, random_session};
    use rand::SeedableRng;
    let mut injected = 0;
    for seed in 0..30 {
        let ws = random_session(cpp_library(), seed, 30, 40);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for command in fault_targets(&ws, &mut rng) {
            injected += check_atomic(&ws, &command);
        }
    }
    assert!(injected > 100, "{injected}");
}
