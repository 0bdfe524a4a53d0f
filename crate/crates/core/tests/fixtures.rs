use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use confsched_core::affinity::{
    blend_affinity, build_affinity, compare_sources, extract_preferences, popularity, BlendWeights, PaperPair,
    PreferenceSource, Thresholds,
};
use confsched_core::corpus::{load_dataset_dir, Dataset, PaperId, PersonId};
use confsched_core::recommend::{recommend, Basis, RatingsMatrix};
use confsched_core::scheduler::{optimize_schedule, session_popularity, ConflictBasis, ScheduleConfig};
use confsched_core::sessionizer::{sessionize, sessionize_exact, SessionConfig};
use confsched_core::textsim::build_tfidf;

fn fixture(name: &str) -> Dataset {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    load_dataset_dir(&dir).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn ids(xs: &[&str]) -> Vec<PaperId> {
    xs.iter().map(|&x| x.into()).collect()
}

#[test]
fn tiny_fixture_loads_three_papers_two_persons() {
    let d = fixture("tiny");
    assert_eq!(d.papers.len(), 3);
    assert_eq!(d.persons.len(), 2);
}

#[test]
fn tfidf_fixture_matches_hand_computation() {
    // d1 "gesture keyboard", d2 "gesture input", d3 "network routing".
    // idf(gesture) = ln(4/3) + 1, every other term ln(4/2) + 1.
    let d = fixture("tiny");
    let model = build_tfidf(&d.papers).unwrap();
    let shared = (4.0f64 / 3.0).ln() + 1.0;
    let single = 2.0f64.ln() + 1.0;
    assert!((shared - 1.2876820724517808).abs() < 1e-15);
    assert!((single - 1.6931471805599454).abs() < 1e-15);
    let expected = shared * shared / (shared * shared + single * single);
    assert!((expected - 0.366446816266513).abs() < 1e-12);

    let c12 = model.cosine(&"p1".into(), &"p2".into()).unwrap();
    let c13 = model.cosine(&"p1".into(), &"p3".into()).unwrap();
    assert!((c12 - expected).abs() < 1e-12, "{c12}");
    assert_eq!(c13, 0.0);
    assert!(c12 > c13);
}

/// Direct transcription of the scoring rule over raw bookmark sets.
fn brute_force_recommend(d: &Dataset, user: &str, k: usize) -> Vec<(PaperId, f64, Basis)> {
    let user = PersonId::from(user);
    let mut columns: BTreeMap<PaperId, BTreeSet<PersonId>> = d.paper_ids().into_iter().map(|p| (p, BTreeSet::new())).collect();
    for b in &d.bookmarks {
        for p in &b.paper_ids {
            columns.get_mut(p).unwrap().insert(b.attendee_id.clone());
        }
    }
    let mine: BTreeSet<PaperId> = d
        .bookmarks
        .iter()
        .filter(|b| b.attendee_id == user)
        .flat_map(|b| b.paper_ids.iter().cloned())
        .collect();
    let sim = |a: &PaperId, b: &PaperId| {
        let (ca, cb) = (&columns[a], &columns[b]);
        if ca.is_empty() || cb.is_empty() {
            0.0
        } else {
            ca.intersection(cb).count() as f64 / ((ca.len() * cb.len()) as f64).sqrt()
        }
    };
    let sort = |v: &mut Vec<(PaperId, f64)>| v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    if mine.is_empty() {
        let mut pop: Vec<(PaperId, f64)> = columns.iter().map(|(p, c)| (p.clone(), c.len() as f64)).collect();
        sort(&mut pop);
        return pop.into_iter().take(k).map(|(p, s)| (p, s, Basis::Content)).collect();
    }
    let mut collab: Vec<(PaperId, f64)> = columns
        .keys()
        .filter(|i| !mine.contains(*i))
        .map(|i| (i.clone(), mine.iter().map(|j| sim(i, j)).sum::<f64>()))
        .filter(|(_, s)| *s > 0.0)
        .collect();
    sort(&mut collab);
    let mut out: Vec<(PaperId, f64, Basis)> = collab.into_iter().take(k).map(|(p, s)| (p, s, Basis::Collaborative)).collect();
    if out.len() < k {
        let model = build_tfidf(&d.papers).unwrap();
        let taken: BTreeSet<PaperId> = out.iter().map(|r| r.0.clone()).collect();
        let mut content: Vec<(PaperId, f64)> = columns
            .keys()
            .filter(|i| !mine.contains(*i) && !taken.contains(*i))
            .map(|i| (i.clone(), mine.iter().map(|j| model.cosine(i, j).unwrap()).fold(0.0, f64::max)))
            .collect();
        sort(&mut content);
        let room = k - out.len();
        out.extend(content.into_iter().take(room).map(|(p, s)| (p, s, Basis::Content)));
    }
    out
}

#[test]
fn recommender_fixture_equals_brute_force() {
    let d = fixture("recommend");
    let ratings = RatingsMatrix::from_dataset(&d);
    let model = build_tfidf(&d.papers).unwrap();
    for user in ["u1", "u2", "u3", "u4", "nobody"] {
        for k in 1..=5 {
            let got: Vec<(PaperId, f64, Basis)> = recommend(&ratings, &model, &user.into(), k)
                .unwrap()
                .into_iter()
                .map(|r| (r.paper_id, r.score, r.basis))
                .collect();
            let want = brute_force_recommend(&d, user, k);
            assert_eq!(got.len(), want.len(), "{user} k={k}");
            for (g, w) in got.iter().zip(&want) {
                assert_eq!((&g.0, g.2), (&w.0, w.2), "{user} k={k}");
                assert!((g.1 - w.1).abs() < 1e-12);
            }
        }
    }
    // u4 has only p3; p3's column {u2,u4}; p1,p2 share u2 with p3.
    let top = recommend(&ratings, &model, &"u4".into(), 2).unwrap();
    assert_eq!(top[0].paper_id.as_str(), "p1");
    assert!((top[0].score - 1.0 / 2.0f64.sqrt() / 2.0f64.sqrt()).abs() < 1e-12);
}

#[test]
fn identical_sources_compare_empty() {
    let d = fixture("identical");
    let author = build_affinity(&extract_preferences(&d, PreferenceSource::AuthorInterest));
    let attendee = build_affinity(&extract_preferences(&d, PreferenceSource::AttendeeBookmark));
    assert_eq!(author.to_records(), attendee.to_records());
    assert!(compare_sources(&attendee, &author, Thresholds::default()).is_empty());
}

#[test]
fn superset_fixture_yields_planted_pair() {
    let d = fixture("superset");
    let author = build_affinity(&extract_preferences(&d, PreferenceSource::AuthorInterest));
    let attendee = build_affinity(&extract_preferences(&d, PreferenceSource::AttendeeBookmark));
    let cmp = compare_sources(&attendee, &author, Thresholds::default());
    let planted = PaperPair::new(&"p1".into(), &"p2".into()).unwrap();
    assert_eq!(cmp.superset_violations.len(), 1);
    assert_eq!(cmp.superset_violations[0].pair, planted);
    assert_eq!(cmp.superset_violations[0].author, 6.0);
    assert!(cmp.zero_vs_strong.is_empty() && cmp.big_difference.is_empty());
}

#[test]
fn clique_fixture_sessions_and_zero_conflict_schedule() {
    let d = fixture("clique8");
    let att_prefs = extract_preferences(&d, PreferenceSource::AttendeeBookmark);
    let attendee = build_affinity(&att_prefs);
    let author = build_affinity(&extract_preferences(&d, PreferenceSource::AuthorInterest));
    let blended = blend_affinity(&attendee, &author, &d.author_responses, BlendWeights::default()).unwrap();
    let pop = popularity(&att_prefs);
    let config = SessionConfig {
        min_size: 4,
        max_size: 4,
        ..Default::default()
    };
    let sz = sessionize(&d, &blended, &pop, &config).unwrap();
    let want = vec![ids(&["p1", "p2", "p3", "p4"]), ids(&["p5", "p6", "p7", "p8"])];
    assert_eq!(sz.canonical(), want);
    assert_eq!(sessionize_exact(&d, &blended, &pop, &config).unwrap().canonical(), want);

    let spop = session_popularity(&sz, &att_prefs);
    let schedule = optimize_schedule(&sz, &d, ConflictBasis::Affinity(&blended), &spop, &ScheduleConfig::default()).unwrap();
    assert_eq!(schedule.metrics.conflict_count, 0.0);
    assert_eq!(schedule.metrics.author_clashes, 0);
    schedule.check(&sz, &d.venue).unwrap();
}
