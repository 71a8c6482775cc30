mod common;

use common::*;
use gcr_core::testkit::check_edit_properties;
use gcr_core::timeline::Command;
use gcr_core::tree::{BatchOp, Direction, SearchScope};
use gcr_core::{EngineError, StepId};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn edit_properties(seed: u64) {
    let ws = random_session(cpp_library(), seed, 40, 43);
    assert!(ws.state().step_count() <= 50);
    check_edit_properties(&ws, &mut ChaCha8Rng::seed_from_u64(seed));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn edits_behave_on_random_trees(seed in any::<u64>()) {
        edit_properties(seed);
    }
}

#[test]
fn roots_refuse_edits() {
    let mut ws = hello_world(cpp_library());
    let root = StepId(1);
    for c in [
        Command::DeleteStep { step: root },
        Command::EditLabel {
            step: root,
            label: "x".into(),
        },
        Command::MoveStep {
            step: root,
            direction: Direction::Down,
        },
        Command::SetEnabled {
            step: root,
            enabled: false,
        },
        Command::ClipboardCut { steps: vec![root] },
    ] {
        assert_eq!(ws.execute(c), Err(EngineError::RootImmutable));
    }
}

#[test]
fn moves_at_the_edges_fail() {
    let mut ws = hello_world(cpp_library());
    assert_eq!(
        ws.execute(Command::MoveStep {
            step: StepId(2),
            direction: Direction::Up
        }),
        Err(EngineError::AtBoundary(StepId(2)))
    );
    assert_eq!(
        ws.execute(Command::MoveStep {
            step: StepId(4),
            direction: Direction::Down
        }),
        Err(EngineError::AtBoundary(StepId(4)))
    );
}

#[test]
fn batch_moves_keep_relative_order() {
    let mut ws = hello_world(cpp_library());
    ws.execute(Command::AddComment {
        parent: StepId(2),
        label: "last".into(),
    })
    .unwrap();
    ws.execute(Command::Batch {
        steps: vec![StepId(3), StepId(4)],
        op: BatchOp::MoveDown,
    })
    .unwrap();
    assert_eq!(
        labels(&ws),
        [
            "The First Step",
            "last",
            "Print Text – New Line – (\"Hello World\")",
            "Wait (3 Seconds)"
        ]
    );
    ws.execute(Command::Batch {
        steps: vec![StepId(3), StepId(4)],
        op: BatchOp::MoveUp,
    })
    .unwrap();
    assert_eq!(labels(&ws)[1], "Print Text – New Line – (\"Hello World\")");
    // A batch with one failing member changes nothing.
    let before = ws.state().clone();
    assert_eq!(
        ws.execute(Command::Batch {
            steps: vec![StepId(4), StepId(2)],
            op: BatchOp::MoveUp
        }),
        Err(EngineError::AtBoundary(StepId(2)))
    );
    assert_eq!(ws.state(), &before);
}

#[test]
fn overlapping_cut_is_refused() {
    let mut ws = hello_world(cpp_library());
    assert_eq!(
        ws.execute(Command::ClipboardCut {
            steps: vec![StepId(1), StepId(3)]
        }),
        Err(EngineError::RootImmutable)
    );
    ws.execute(Command::AddComment {
        parent: StepId(3),
        label: "inner".into(),
    })
    .unwrap();
    assert_eq!(
        ws.execute(Command::ClipboardCut {
            steps: vec![StepId(3), StepId(5)]
        }),
        Err(EngineError::OverlappingSelection(StepId(5)))
    );
}

#[test]
fn paste_needs_a_clipboard() {
    let mut ws = hello_world(cpp_library());
    assert_eq!(ws.paste(StepId(2)), Err(EngineError::EmptyClipboard));
}

#[test]
fn pasted_copy_is_independent() {
    let mut ws = hello_world(cpp_library());
    ws.copy(&[StepId(3)]).unwrap();
    let ids = ws.paste(StepId(2)).unwrap();
    let (copy, iid) = (ids.steps[0], ids.interactions[0]);
    assert_eq!(ws.state().step(copy).unwrap().interaction, Some(iid));
    ws.execute(Command::ModifyInteraction {
        interaction: iid,
        values: print_values("\"Copy\""),
    })
    .unwrap();
    assert_eq!(
        ws.state().step(StepId(3)).unwrap().label,
        "Print Text – New Line – (\"Hello World\")"
    );
    assert_eq!(
        ws.state().step(copy).unwrap().label,
        "Print Text – New Line – (\"Copy\")"
    );
}

#[test]
fn cut_and_paste_keeps_the_interaction() {
    let mut ws = hello_world(cpp_library());
    ws.execute(Command::ClipboardCut {
        steps: vec![StepId(3)],
    })
    .unwrap();
    assert!(
        ws.state()
            .interaction(gcr_core::InteractionId(1))
            .unwrap()
            .orphaned
    );
    let ids = ws.paste(StepId(2)).unwrap();
    assert!(ids.interactions.is_empty());
    let rec = ws.state().interaction(gcr_core::InteractionId(1)).unwrap();
    assert!(!rec.orphaned);
    assert_eq!(rec.generated, [Some(ids.steps[0])]);
    // The second paste of the same clipboard is a copy.
    let again = ws.paste(StepId(2)).unwrap();
    assert_eq!(again.interactions.len(), 1);
}

#[test]
fn search_by_name_and_data() {
    let mut ws = hello_world(cpp_library());
    assert_eq!(
        ws.state().search_steps("wait", SearchScope::Name),
        [StepId(4)]
    );
    ws.execute(Command::EditLabel {
        step: StepId(3),
        label: "greeting".into(),
    })
    .unwrap();
    assert!(ws
        .state()
        .search_steps("Hello", SearchScope::Name)
        .is_empty());
    assert_eq!(
        ws.state().search_steps("Hello World", SearchScope::Data),
        [StepId(3)]
    );
}

#[test]
fn goals_are_separate_trees() {
    let mut ws = hello_world(cpp_library());
    ws.execute(Command::AddGoal {
        name: "second".into(),
    })
    .unwrap();
    assert_eq!(
        ws.execute(Command::AddGoal {
            name: "second".into()
        }),
        Err(EngineError::DuplicateGoal("second".into()))
    );
    assert!(matches!(
        ws.execute(Command::AddGoal {
            name: "bad name".into()
        }),
        Err(EngineError::InvalidGoalName(_))
    ));
    let root = ws.state().goal("second").unwrap().root;
    assert_eq!(ws.state().goal_of(root).unwrap().name, "second");
}
