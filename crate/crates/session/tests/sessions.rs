use serde_json::json;

use qhorn_core::{learn_qhorn1, learn_rp, simulated_oracle, Phase, QhornQuery, Question, RpOptions};
use qhorn_session::{Mode, OracleKind, Session, SessionError, SessionManager, SessionRequest, SessionResult, Status};

const RP_TARGET: &str = "∀x1x4→x5 ∀x3x4→x5 ∀x1x2→x6 ∃x1x2x3 ∃x2x3x4 ∃x1x2x5 ∃x2x3x5x6";

fn rp_target() -> QhornQuery {
    QhornQuery::parse_shorthand(RP_TARGET, 6).unwrap()
}

fn qhorn1_target() -> QhornQuery {
    QhornQuery::parse_shorthand("∀x1→x2 ∀x1→x3 ∃x4x5 ∃x6", 6).unwrap()
}

fn label_for(target: &QhornQuery, s: &Session) -> bool {
    let tuples = &s.pending.as_ref().expect("pending question").tuples;
    target.evaluate(&Question::parse(tuples).unwrap()).unwrap().is_answer()
}

/// Answers as `target` would until the session stops asking.
fn drive(m: &SessionManager, mut s: Session, target: &QhornQuery) -> Session {
    while s.status == Status::AwaitingAnswer {
        let answer = label_for(target, &s);
        s = m.answer(&s.id, answer, None).unwrap();
    }
    s
}

fn learned(s: &Session) -> QhornQuery {
    match &s.result {
        Some(SessionResult::Learned { query, consistency, .. }) => {
            assert!(consistency.is_consistent());
            query.clone()
        }
        other => panic!("expected a learned query, got {other:?}"),
    }
}

#[test]
fn first_rp_question_classifies_x1() {
    let m = SessionManager::in_memory();
    let s = m.create(SessionRequest::learn(Mode::LearnRp, 6, OracleKind::Interactive)).unwrap();
    assert_eq!(s.status, Status::AwaitingAnswer);
    assert_eq!(s.questions_answered, 0);
    let p = s.pending.unwrap();
    assert_eq!(p.index, 0);
    assert_eq!(p.phase, Phase::HeadClassification);
    let mut tuples = p.tuples.clone();
    tuples.sort();
    assert_eq!(tuples, ["011111", "111111"]);
}

#[test]
fn scripted_rp_answers_match_the_library() {
    let m = SessionManager::in_memory();
    let s = m.create(SessionRequest::learn(Mode::LearnRp, 6, OracleKind::Interactive)).unwrap();
    let s = drive(&m, s, &rp_target());
    assert_eq!(s.status, Status::Done);
    let direct = learn_rp(&mut simulated_oracle(rp_target()), 6, RpOptions::default()).unwrap();
    assert_eq!(learned(&s), direct);
    assert!(qhorn_core::equivalent(&direct, &rp_target()).unwrap());
    assert_eq!(s.transcript.len(), s.stats.questions);
    assert_eq!(s.questions_answered, s.stats.questions);
    assert!(s.pending.is_none());
    match m.answer(&s.id, true, None) {
        Err(SessionError::NoPendingQuestion) => {}
        other => panic!("expected no pending question, got {other:?}"),
    }
}

#[test]
fn scripted_qhorn1_answers_match_the_library() {
    let m = SessionManager::in_memory();
    let s = m.create(SessionRequest::learn(Mode::LearnQhorn1, 6, OracleKind::Interactive)).unwrap();
    let s = drive(&m, s, &qhorn1_target());
    let direct = learn_qhorn1(&mut simulated_oracle(qhorn1_target()), 6).unwrap();
    assert_eq!(learned(&s), direct);
    assert!(qhorn_core::equivalent(&direct, &qhorn1_target()).unwrap());
}

#[test]
fn simulated_sessions_equal_direct_calls() {
    let m = SessionManager::in_memory();
    let req = SessionRequest::learn(Mode::LearnRp, 6, OracleKind::Simulated).with_target(rp_target());
    let s = m.create(req).unwrap();
    assert_eq!(s.status, Status::Done);
    let direct = learn_rp(&mut simulated_oracle(rp_target()), 6, RpOptions::default()).unwrap();
    assert_eq!(learned(&s), direct);
    assert_eq!(s.transcript.len(), s.stats.questions);
    assert!(matches!(m.rollback(&s.id, 0), Err(SessionError::NotInteractive)));

    let req = SessionRequest::learn(Mode::LearnQhorn1, 6, OracleKind::Simulated).with_target(qhorn1_target());
    let s = m.create(req).unwrap();
    assert_eq!(learned(&s), learn_qhorn1(&mut simulated_oracle(qhorn1_target()), 6).unwrap());
}

#[test]
fn self_verification_needs_no_human() {
    let m = SessionManager::in_memory();
    let req = SessionRequest::verify(rp_target(), OracleKind::Simulated).with_intended(rp_target());
    let s = m.create(req).unwrap();
    assert_eq!(s.status, Status::Done);
    assert!(s.pending.is_none());
    assert_eq!(s.verification_items, Some(13));
    match m.result(&s.id).unwrap() {
        SessionResult::Verification { report } => {
            assert!(report.is_verified());
            assert_eq!(report.items.len(), 13);
        }
        other => panic!("expected a report, got {other:?}"),
    }
}

#[test]
fn interactive_verification_reports_first_disagreement() {
    let m = SessionManager::in_memory();
    let s = m.create(SessionRequest::verify(rp_target(), OracleKind::Interactive)).unwrap();
    assert_eq!(s.pending.as_ref().unwrap().phase, Phase::Verification);
    // the user actually meant a query with one conjunction fewer
    let intended = QhornQuery::parse_shorthand("∀x1x4→x5 ∀x3x4→x5 ∀x1x2→x6 ∃x1x2x3 ∃x2x3x4 ∃x1x2x5", 6).unwrap();
    let s = drive(&m, s, &intended);
    assert_eq!(s.questions_answered, 13);
    let Some(SessionResult::Verification { report }) = s.result else { panic!("no report") };
    assert!(!report.is_verified());
    assert!(report.disagreements().count() >= 1);
}

#[test]
fn rollback_then_same_answers_gives_same_result() {
    let m = SessionManager::in_memory();
    let s = m.create(SessionRequest::learn(Mode::LearnRp, 6, OracleKind::Interactive)).unwrap();
    let done = drive(&m, s, &rp_target());
    let total = done.questions_answered;
    for to in [0, 1, total / 2, total] {
        let s = m.rollback(&done.id, to).unwrap();
        assert_eq!(s.questions_answered, to);
        assert_eq!(s.transcript[..], done.transcript[..to]);
        if to < total {
            assert_eq!(s.status, Status::AwaitingAnswer);
            assert_eq!(s.pending.as_ref().unwrap().index, to);
            assert!(s.result.is_none());
        }
        let again = drive(&m, s, &rp_target());
        assert_eq!(again.result, done.result);
        assert_eq!(again.transcript, done.transcript);
    }
    let s = m.get(&done.id).unwrap();
    assert!(!s.discarded.is_empty());
    assert!(matches!(m.rollback(&done.id, total + 1), Err(SessionError::RollbackOutOfRange { .. })));
}

#[test]
fn rollback_lets_a_wrong_answer_be_fixed() {
    let m = SessionManager::in_memory();
    let target = rp_target();
    let mut s = m.create(SessionRequest::learn(Mode::LearnRp, 6, OracleKind::Interactive)).unwrap();
    for _ in 0..3 {
        let a = label_for(&target, &s);
        s = m.answer(&s.id, a, None).unwrap();
    }
    let wrong = !label_for(&target, &s);
    m.answer(&s.id, wrong, Some(3)).unwrap();
    let s = m.rollback(&s.id, 3).unwrap();
    assert_eq!(s.discarded.last().unwrap().label.is_answer(), wrong);
    let s = drive(&m, s, &target);
    assert!(qhorn_core::equivalent(&learned(&s), &target).unwrap());
}

#[test]
fn stale_answers_are_refused() {
    let m = SessionManager::in_memory();
    let s = m.create(SessionRequest::learn(Mode::LearnRp, 6, OracleKind::Interactive)).unwrap();
    let s = m.answer(&s.id, true, Some(0)).unwrap();
    assert!(matches!(m.answer(&s.id, true, Some(0)), Err(SessionError::StaleAnswer { given: 0, pending: 1 })));
    assert_eq!(m.get(&s.id).unwrap().questions_answered, 1);
}

#[test]
fn bad_requests_are_rejected() {
    let m = SessionManager::in_memory();
    let err = m.create(SessionRequest::learn(Mode::LearnQhorn1, 25, OracleKind::Interactive)).unwrap_err();
    assert!(err.to_string().contains("arity 25"), "{err}");
    assert!(m.create(SessionRequest::learn(Mode::LearnQhorn1, 0, OracleKind::Interactive)).is_err());
    // simulated learning needs a target
    assert!(m.create(SessionRequest::learn(Mode::LearnRp, 6, OracleKind::Simulated)).is_err());
    // a role-preserving target that is not qhorn-1
    let req = SessionRequest::learn(Mode::LearnQhorn1, 6, OracleKind::Simulated).with_target(rp_target());
    assert!(matches!(m.create(req), Err(SessionError::Query(_))));
    // verification needs a role-preserving query
    let not_rp = QhornQuery::parse_shorthand("∀x1→x2 ∀x2→x3", 3).unwrap();
    assert!(m.create(SessionRequest::verify(not_rp, OracleKind::Interactive)).is_err());
    let req = SessionRequest::learn(Mode::LearnRp, 3, OracleKind::Interactive).with_propositions(vec!["a".into()]);
    assert!(m.create(req).is_err());
    assert!(matches!(m.get("nope"), Err(SessionError::UnknownSession(_))));
    assert!(m.ids().is_empty());
}

#[test]
fn propositions_label_the_rows() {
    let m = SessionManager::in_memory();
    let vocab: Vec<String> = ["isDark", "hasFilling", "origin=Madagascar"].map(String::from).to_vec();
    let req = SessionRequest::learn(Mode::LearnRp, 3, OracleKind::Interactive).with_propositions(vocab.clone());
    let s = m.create(req).unwrap();
    assert_eq!(s.propositions, vocab);
    let p = s.pending.unwrap();
    let row_of = |t: &str| {
        let i = p.tuples.iter().position(|x| x == t).unwrap();
        serde_json::Value::Object(p.rows[i].clone())
    };
    assert_eq!(row_of("011"), json!({"isDark": false, "hasFilling": true, "origin=Madagascar": true}));
    assert_eq!(p.rows[0].keys().collect::<Vec<_>>(), ["isDark", "hasFilling", "origin=Madagascar"]);

    let plain = m.create(SessionRequest::learn(Mode::LearnRp, 3, OracleKind::Interactive)).unwrap();
    assert_eq!(plain.propositions, ["x1", "x2", "x3"]);
}

#[test]
fn rendered_rows_follow_tuple_bits() {
    let vocab: Vec<String> = ["isDark", "hasFilling", "origin=Madagascar"].map(String::from).to_vec();
    let q = Question::parse(&["101"]).unwrap();
    let p = qhorn_session::PendingQuestion::render(0, Phase::BodySearch, &q, &vocab);
    assert_eq!(
        serde_json::Value::Object(p.rows[0].clone()),
        json!({"isDark": true, "hasFilling": false, "origin=Madagascar": true})
    );
}

#[test]
fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let target = rp_target();
    let (id, before, finished_id, finished) = {
        let m = SessionManager::open(dir.path()).unwrap();
        let mut s = m.create(SessionRequest::learn(Mode::LearnRp, 6, OracleKind::Interactive)).unwrap();
        for _ in 0..6 {
            let a = label_for(&target, &s);
            s = m.answer(&s.id, a, None).unwrap();
        }
        let s = m.rollback(&s.id, 4).unwrap();
        let a = label_for(&target, &s);
        let s = m.answer(&s.id, a, None).unwrap();
        let done = m.create(SessionRequest::verify(target.clone(), OracleKind::Simulated)).unwrap();
        (s.id.clone(), s, done.id.clone(), done)
    };
    let m = SessionManager::open(dir.path()).unwrap();
    assert_eq!(m.ids().len(), 2);
    assert_eq!(m.get(&id).unwrap(), before);
    assert_eq!(m.get(&finished_id).unwrap(), finished);

    // the restored run keeps asking what the original would have asked
    let fresh = SessionManager::in_memory();
    let mut reference = fresh.create(SessionRequest::learn(Mode::LearnRp, 6, OracleKind::Interactive)).unwrap();
    for _ in 0..5 {
        let a = label_for(&target, &reference);
        reference = fresh.answer(&reference.id, a, None).unwrap();
    }
    let mut restored = m.get(&id).unwrap();
    assert_eq!(restored.pending.as_ref().unwrap().tuples, reference.pending.as_ref().unwrap().tuples);
    while restored.status == Status::AwaitingAnswer {
        assert_eq!(restored.pending.as_ref().unwrap().tuples, reference.pending.as_ref().unwrap().tuples);
        let a = label_for(&target, &restored);
        restored = m.answer(&id, a, None).unwrap();
        reference = fresh.answer(&reference.id, a, None).unwrap();
    }
    assert_eq!(restored.result, reference.result);

    // and the log kept growing after the restart
    drop(m);
    let m = SessionManager::open(dir.path()).unwrap();
    assert_eq!(m.get(&id).unwrap(), restored);
}

#[test]
fn corrupt_logs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.jsonl"), "{\"event\":\"answer\",\"i\":0,\"answer\":true}\n").unwrap();
    assert!(matches!(SessionManager::open(dir.path()), Err(SessionError::CorruptLog { .. })));
}

#[test]
fn concurrent_sessions_do_not_interfere() {
    let m = std::sync::Arc::new(SessionManager::in_memory());
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let m = m.clone();
            std::thread::spawn(move || {
                let (mode, target) = if i % 2 == 0 {
                    (Mode::LearnRp, rp_target())
                } else {
                    (Mode::LearnQhorn1, qhorn1_target())
                };
                let s = m.create(SessionRequest::learn(mode, 6, OracleKind::Interactive)).unwrap();
                let s = drive(&m, s, &target);
                qhorn_core::equivalent(&learned(&s), &target).unwrap()
            })
        })
        .collect();
    assert!(handles.into_iter().all(|h| h.join().unwrap()));
    assert_eq!(m.ids().len(), 8);
}
