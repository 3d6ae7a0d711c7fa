use expertfind_core::feedback::NextCandidate;
use expertfind_core::{
    Decision, Engine, Error, FeedbackLog, FusionMethod, QueryRepresentation, RankingConfig, Regime,
    ReviewSession, Tokenizer,
};
use expertfind_testkit::fixtures::{toy_articles, toy_embeddings, toy_query};
use expertfind_testkit::synthetic::{planted_corpus, rng, PlantedConfig};
use rand::Rng;

fn toy_engine() -> Engine {
    Engine::build(
        toy_articles(),
        Tokenizer::default(),
        &[Regime::TfidfCosine, Regime::Wmd],
        Some(toy_embeddings()),
    )
    .unwrap()
}

fn open(engine: &Engine, regime: Regime, top_k: usize) -> ReviewSession {
    let mut config = RankingConfig::new(regime, FusionMethod::ReciprocalRank);
    config.top_k = top_k;
    let (title, abs) = toy_query();
    let (text, repr, scored) = engine.query(title, abs, &config).unwrap();
    ReviewSession::open("s", text, repr, scored, config).unwrap()
}

fn ids(engine: &Engine, authors: impl Iterator<Item = usize>) -> Vec<String> {
    authors
        .map(|a| engine.index().author(a).author_id.clone())
        .collect()
}

#[test]
fn toy_query_orders_documents_under_both_regimes() {
    let engine = toy_engine();
    for regime in [Regime::TfidfCosine, Regime::Wmd] {
        let session = open(&engine, regime, 9);
        let order = expertfind_core::expertrank::rank_documents(session.table());
        assert_eq!(order.order(), &[1, 2, 0], "{regime}");
        assert_eq!(
            ids(&engine, session.ranking().authors()),
            ["6", "3", "1", "2", "4", "5"]
        );
    }
}

#[test]
fn sequential_presentation() {
    let engine = toy_engine();
    let mut session = open(&engine, Regime::TfidfCosine, 9);
    assert_eq!(session.cursor(), 0);
    assert_eq!(session.candidates().len(), 6);

    let first = session.next_candidate().unwrap();
    assert_eq!(session.next_candidate().unwrap(), first);
    let NextCandidate::Candidate { position, author } = first else {
        panic!("expected a candidate")
    };
    assert_eq!(position, 1);
    assert_eq!(engine.index().author(author).author_id, "6");

    let profile = session.candidate_profile(engine.index()).unwrap().unwrap();
    assert_eq!(profile.author_id, "6");
    assert_eq!(profile.articles.len(), 2);
    assert_eq!(profile.articles[0].doc_id, "doc2");
    assert_eq!(profile.articles[0].rank, 1);
    assert_eq!(profile.articles[0].authors.len(), 4);
    assert_eq!(profile.articles[0].date.as_deref(), Some("2016-11-20"));
    assert_eq!(profile.articles[1].doc_id, "doc3");

    // Candidate 3 ("1") while "6" is pending.
    let one = engine.index().author_index("1").unwrap();
    assert!(matches!(
        session.record_verdict(engine.index(), one, Decision::Accept, None),
        Err(Error::OutOfOrder { .. })
    ));

    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("log.jsonl");
    let log = FeedbackLog::open(&log_path).unwrap();
    session
        .record_verdict(engine.index(), author, Decision::Accept, Some(&log))
        .unwrap();
    assert_eq!(session.cursor(), 1);
    assert_eq!(FeedbackLog::replay(&log_path).unwrap().len(), 1);
    assert!(matches!(
        session.record_verdict(engine.index(), author, Decision::Accept, Some(&log)),
        Err(Error::DuplicateVerdict(_))
    ));

    while let NextCandidate::Candidate { author, .. } = session.next_candidate().unwrap() {
        session
            .record_verdict(engine.index(), author, Decision::Reject, Some(&log))
            .unwrap();
        assert_eq!(session.judged().len(), session.cursor());
    }
    assert!(session.is_complete());
    assert!(session.candidate_profile(engine.index()).unwrap().is_none());
    assert!(matches!(
        session.record_verdict(engine.index(), 0, Decision::Accept, None),
        Err(Error::DuplicateVerdict(_))
    ));
    let records = FeedbackLog::replay(&log_path).unwrap();
    assert_eq!(records.len(), 6);
    assert_eq!(
        records
            .iter()
            .map(|r| r.author_id.as_str())
            .collect::<Vec<_>>(),
        ["6", "3", "1", "2", "4", "5"]
    );
    assert!(records.iter().all(|r| r.query_hash == session.query_hash()));
}

#[test]
fn top_k_limits_the_sequence() {
    let engine = toy_engine();
    let mut session = open(&engine, Regime::TfidfCosine, 2);
    for _ in 0..2 {
        let NextCandidate::Candidate { author, .. } = session.next_candidate().unwrap() else {
            panic!()
        };
        session
            .record_verdict(engine.index(), author, Decision::Reject, None)
            .unwrap();
    }
    assert_eq!(session.next_candidate().unwrap(), NextCandidate::Complete);
}

#[test]
fn empty_ranking_cannot_open() {
    let engine = toy_engine();
    let config = RankingConfig::new(Regime::TfidfCosine, FusionMethod::ReciprocalRank);
    let (title, abs) = toy_query();
    let (text, repr, mut scored) = engine.query(title, abs, &config).unwrap();
    scored.ranking.scores.clear();
    assert!(matches!(
        ReviewSession::open("s", text, repr, scored, config),
        Err(Error::NoCandidates)
    ));
}

#[test]
fn recompute_without_accepts_is_identity_minus_judged() {
    let engine = toy_engine();
    for regime in [Regime::TfidfCosine, Regime::Wmd] {
        let mut session = open(&engine, regime, 9);
        let before: Vec<usize> = session.ranking().authors().collect();
        let repr_before = session.representation().clone();
        for _ in 0..2 {
            let NextCandidate::Candidate { author, .. } = session.next_candidate().unwrap() else {
                panic!()
            };
            session
                .record_verdict(engine.index(), author, Decision::Reject, None)
                .unwrap();
        }
        session.recompute(&engine).unwrap();
        assert_eq!(session.representation(), &repr_before);
        let expected: Vec<usize> = before.iter().copied().skip(2).collect();
        assert_eq!(session.ranking().authors().collect::<Vec<_>>(), expected);
        assert_eq!(session.cursor(), 0);
        assert_eq!(session.recompute_count(), 1);
    }
}

#[test]
fn recompute_moves_query_toward_accepted_topic() {
    // Two topics share a query that leans to topic 0; accepting topic 1's
    // expert and recomputing brings topic 1 authors to the head.
    let config = PlantedConfig {
        topics: 2,
        queries: 0,
        ..PlantedConfig::default()
    };
    let corpus = planted_corpus(17, &config);
    let engine = Engine::build(
        corpus.articles,
        Tokenizer::default(),
        &[Regime::TfidfCosine, Regime::Wmd],
        Some(corpus.embeddings),
    )
    .unwrap();
    for regime in [Regime::TfidfCosine, Regime::Wmd] {
        let mut rc = RankingConfig::new(regime, FusionMethod::ReciprocalRank);
        rc.top_k = 12;
        let title = "topic0term1 topic0term2 topic0term3 topic0term4";
        let abs = "topic1term5 common3";
        let (text, repr, scored) = engine.query(title, abs, &rc).unwrap();
        let mut session = ReviewSession::open("s", text, repr, scored, rc).unwrap();
        let head = engine
            .index()
            .author(session.candidates()[0])
            .author_id
            .clone();
        assert_eq!(head, "author-0-0", "{regime}");

        while let NextCandidate::Candidate { author, .. } = session.next_candidate().unwrap() {
            let id = engine.index().author(author).author_id.clone();
            let decision = if id == "author-1-0" {
                Decision::Accept
            } else if id.starts_with("author-0-") {
                Decision::Reject
            } else {
                break;
            };
            session
                .record_verdict(engine.index(), author, decision, None)
                .unwrap();
            if decision == Decision::Accept {
                break;
            }
        }
        assert!(
            session.accepted().count() == 1,
            "{regime}: topic-1 expert was not reached"
        );
        session.recompute(&engine).unwrap();
        let new_head = engine
            .index()
            .author(session.candidates()[0])
            .author_id
            .clone();
        assert!(
            new_head.starts_with("author-1-"),
            "{regime}: new head {new_head}"
        );
        for judged in session.judged() {
            assert!(session.ranking().position(*judged).is_none());
        }
        if let QueryRepresentation::Sparse(v) = session.representation() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn randomized_replays_never_represent_judged_authors() {
    let corpus = planted_corpus(
        5,
        &PlantedConfig {
            topics: 4,
            queries: 0,
            ..PlantedConfig::default()
        },
    );
    let engine = Engine::build(
        corpus.articles,
        Tokenizer::default(),
        &[Regime::TfidfCosine],
        None,
    )
    .unwrap();
    let mut r = rng(99);
    for _ in 0..20 {
        let rc = RankingConfig::new(Regime::TfidfCosine, FusionMethod::ReciprocalRank);
        let t = r.gen_range(0..4);
        let title = format!(
            "topic{t}term{} topic{t}term{}",
            r.gen_range(0..15),
            r.gen_range(0..15)
        );
        let (text, repr, scored) = engine.query(&title, "common1", &rc).unwrap();
        let mut session = ReviewSession::open("s", text, repr, scored, rc).unwrap();
        for _ in 0..3 {
            let before: Vec<usize> = session.ranking().authors().collect();
            let steps = r.gen_range(0..=session.candidates().len());
            for _ in 0..steps {
                let NextCandidate::Candidate { author, .. } = session.next_candidate().unwrap()
                else {
                    break;
                };
                let d = if r.gen_bool(0.4) {
                    Decision::Accept
                } else {
                    Decision::Reject
                };
                session
                    .record_verdict(engine.index(), author, d, None)
                    .unwrap();
            }
            session.recompute(&engine).unwrap();
            let after: Vec<usize> = session.ranking().authors().collect();
            let mut expected: Vec<usize> = before
                .iter()
                .copied()
                .filter(|a| !session.judged().contains(a))
                .collect();
            expected.sort_unstable();
            let mut got = after.clone();
            got.sort_unstable();
            assert_eq!(got, expected);
            assert!(after.iter().all(|a| !session.judged().contains(a)));
        }
    }
}
