mod common;

use common::*;
use gcr_core::emit::TargetProfile;
use gcr_core::project_file::{
    from_project_file, load_project, parse_project_file, save_project, state_checksum, to_json,
    to_project_file, ProjectFileError,
};
use gcr_core::testkit::{check_fold, perform, random_action};
use gcr_core::timeline::Command;
use gcr_core::tree::ProjectState;
use gcr_core::{EngineError, StepId, Workspace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn text(ws: &Workspace) -> String {
    ws.emit("main", &TargetProfile::cpp_console())
        .unwrap()
        .files[0]
        .text
        .clone()
}

#[test]
fn hello_world_log_has_three_events() {
    let ws = hello_world(cpp_library());
    let kinds: Vec<_> = ws
        .timeline()
        .events()
        .iter()
        .map(|e| e.command.kind())
        .collect();
    assert_eq!(kinds, ["addComment", "interaction", "interaction"]);
    assert_eq!(ws.timeline().events()[1].result_ids.steps, [StepId(3)]);
    check_fold(&ws);
}

#[test]
fn seek_back_and_forward() {
    let mut ws = hello_world(cpp_library());
    let full = text(&ws);
    ws.seek(2).unwrap();
    assert_eq!(ws.head(), 2);
    let at2 = text(&ws);
    assert!(at2.contains("Hello World") && !at2.contains("sleep_for"));
    ws.seek(0).unwrap();
    assert_eq!(labels(&ws), Vec::<String>::new());
    ws.seek(3).unwrap();
    assert_eq!(text(&ws), full);
    assert_eq!(ws.seek(4), Err(EngineError::OutOfRange { t: 4, length: 3 }));
    assert_eq!(ws.head(), 3);
}

#[test]
fn edit_while_rewound_truncates_future() {
    let mut ws = hello_world(cpp_library());
    ws.seek(2).unwrap();
    ws.execute(Command::AddComment {
        parent: StepId(2),
        label: "later".into(),
    })
    .unwrap();
    assert_eq!(ws.timeline().len(), 3);
    assert_eq!(ws.head(), 3);
    assert!(!text(&ws).contains("sleep_for"));
    // The new event's ids continue from the rewound state.
    assert_eq!(ws.timeline().events()[2].result_ids.steps, [StepId(4)]);
    check_fold(&ws);
}

#[test]
fn movie_frames_follow_events() {
    let ws = hello_world(cpp_library());
    let frames = ws.movie(0).unwrap();
    assert_eq!(frames.len(), 3);
    assert_eq!(frames[1].focus_after, Some(StepId(3)));
    assert!(
        frames[1].caption.contains("Print Text"),
        "{}",
        frames[1].caption
    );
    assert!(frames[2].caption.contains("Wait"), "{}", frames[2].caption);
    assert_eq!(ws.movie(2).unwrap().len(), 1);
    assert!(ws.movie(4).is_err());
}

#[test]
fn snapshots_do_not_change_results() {
    let ws = random_session(cpp_library(), 7, 80, 40);
    assert!(ws.timeline().len() >= 25);
    assert!(!ws.timeline().snapshots().is_empty());
    check_fold(&ws);
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hello.gcr");
    let lib = repo_root().join("library/cpp-console");
    let mut ws = hello_world(cpp_library());
    ws.copy(&[StepId(3)]).unwrap();
    ws.seek(2).unwrap();
    save_project(&ws, &path, &lib).unwrap();
    let (loaded, libdir) = load_project(&path).unwrap();
    assert_eq!(loaded.head(), 2);
    assert_eq!(loaded.state(), ws.state());
    assert_eq!(loaded.timeline().events(), ws.timeline().events());
    assert_eq!(loaded.clipboard(), ws.clipboard());
    assert_eq!(
        std::fs::canonicalize(libdir).unwrap(),
        std::fs::canonicalize(&lib).unwrap()
    );
    // Saving again is byte-identical.
    let again = dir.path().join("again.gcr");
    save_project(&loaded, &again, &lib).unwrap();
    let a = std::fs::read_to_string(&path).unwrap();
    let b = std::fs::read_to_string(&again).unwrap();
    assert_eq!(a, b);
}

#[test]
fn checksum_covers_the_whole_log() {
    let mut ws = hello_world(cpp_library());
    ws.seek(1).unwrap();
    let file = to_project_file(&ws, "lib").unwrap();
    assert_eq!(file.checksum, state_checksum(&ws.state_at(3).unwrap()));
}

#[test]
fn tampered_files_are_rejected() {
    let ws = hello_world(cpp_library());
    let good = to_project_file(&ws, "lib").unwrap();

    let mut bad = good.clone();
    bad.checksum = "sha256:00".into();
    let err = from_project_file(bad, cpp_library()).err().unwrap();
    assert!(
        matches!(err, ProjectFileError::ChecksumMismatch { .. }),
        "{err}"
    );

    let mut bad = good.clone();
    bad.events[1].result_ids.steps = vec![StepId(9)];
    let err = from_project_file(bad, cpp_library()).err().unwrap();
    assert!(
        matches!(
            err,
            ProjectFileError::Engine(EngineError::ReplayDivergence { index: 2 })
        ),
        "{err}"
    );

    let mut bad = good.clone();
    bad.version = 9;
    assert!(matches!(
        from_project_file(bad, cpp_library()),
        Err(ProjectFileError::VersionUnsupported(9))
    ));

    let mut bad = good.clone();
    bad.library.id = "other".into();
    assert!(matches!(
        from_project_file(bad, cpp_library()),
        Err(ProjectFileError::LibraryMismatch { .. })
    ));

    let json = to_json(&good);
    let cut = &json[..json.len() / 2];
    assert!(matches!(
        parse_project_file(cut),
        Err(ProjectFileError::Malformed(_))
    ));
}

#[test]
fn stale_snapshots_are_ignored() {
    let ws = random_session(cpp_library(), 11, 80, 40);
    let mut file = to_project_file(&ws, "lib").unwrap();
    assert!(!file.snapshots.is_empty());
    for s in file.snapshots.values_mut() {
        *s = ProjectState::empty("junk", "junk");
    }
    let loaded = from_project_file(file, cpp_library()).unwrap();
    assert_eq!(loaded.state(), ws.state());
    check_fold(&loaded);
}

#[test]
fn rejected_commands_are_not_recorded() {
    let mut ws = hello_world(cpp_library());
    let before = ws.timeline().clone();
    assert!(ws.execute(Command::DeleteStep { step: StepId(1) }).is_err());
    assert!(ws
        .execute(Command::EditLabel {
            step: StepId(99),
            label: "x".into()
        })
        .is_err());
    assert_eq!(ws.timeline(), &before);
}

fn session_round_trip(seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ws = Workspace::new("p", cpp_library());
    let actions = 10 + (seed % 40) as usize;
    for _ in 0..actions {
        let action = random_action(&ws, &mut rng, 50);
        let before = ws.state().clone();
        if perform(&mut ws, &action).is_err() {
            assert_eq!(ws.state(), &before, "{action:?}");
        }
        ws.state().check_invariants().unwrap();
        assert!(ws.state().step_count() <= 70);
    }
    check_fold(&ws);
    let file = to_project_file(&ws, "lib").unwrap();
    let text = to_json(&file);
    let loaded = from_project_file(parse_project_file(&text).unwrap(), cpp_library()).unwrap();
    assert_eq!(loaded.state(), ws.state());
    assert_eq!(to_json(&to_project_file(&loaded, "lib").unwrap()), text);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn random_sessions_fold_and_round_trip(seed in any::<u64>()) {
        session_round_trip(seed);
    }
}
