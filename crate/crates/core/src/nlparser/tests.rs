use alloc::vec;
use alloc::vec::Vec;

use super::*;

fn sketches(text: &str) -> Vec<String> {
    derive(&Utterance::new(text))
        .iter()
        .map(|d| print_sketch(&d.sketch))
        .collect()
}

#[test]
fn motivating_utterance_derives_its_sketch() {
    let all = sketches("Find the number of papers in VLDB 2010");
    assert!(
        all.iter()
            .any(|s| s == r#"SELECT count(?[papers]) FROM ??[papers] WHERE ? = "VLDB 2010""#),
        "{:#?}",
        all
    );
}

#[test]
fn superlative_becomes_nested_maximum() {
    let all = sketches("Find all students with the highest score");
    assert!(
        all.iter()
            .any(|s| s == "SELECT ?[students] FROM ??[students] WHERE ? = (SELECT max(?[score]) FROM ??[students])"),
        "{:#?}",
        all
    );
}

#[test]
fn group_by_phrase() {
    let all = sketches("Show the average salary for each department");
    assert!(
        all.iter()
            .any(|s| s == "SELECT avg(?[salary]) BY ?[department] FROM ??[salary]"),
        "{:#?}",
        all
    );
}

#[test]
fn bare_noun_has_no_derivation() {
    assert!(derive(&Utterance::new("papers")).is_empty());
    assert_eq!(print_sketch(&fallback_sketch("papers")), "SELECT ? FROM ??[papers]");
}

#[test]
fn hints_are_utterance_substrings() {
    let text = "List the names and salaries of employees with age over 30 or in \"R&D\"";
    let lower = text.to_lowercase();
    let ds = derive(&Utterance::new(text));
    assert!(!ds.is_empty());
    for d in &ds {
        for path in d.sketch.paths() {
            let hint = match d.sketch.get(&path).unwrap() {
                crate::sketch::SketchTerm::Rel(SketchRel::Table(h)) => h,
                crate::sketch::SketchTerm::Spec(SketchSpec::Col(h)) => h,
                _ => continue,
            };
            if let Some(k) = hint.key() {
                assert!(lower.contains(&k), "{} not in utterance", k);
            }
        }
        assert_eq!(d.consumed.len(), Utterance::new(text).len());
    }
    assert!(ds.len() <= MAX_DERIVATIONS);
}

#[test]
fn zero_model_scores_zero() {
    let u = Utterance::new("Find the number of papers in VLDB 2010");
    let model = ParserModel::new();
    for d in derive(&u) {
        assert_eq!(score_sketch(&d, &model), 0.0);
    }
}

#[test]
fn skip_weight_counts_skips() {
    let u = Utterance::new("Find papers please now");
    let model = ParserModel::from_weights(vec![("skipped".into(), 1.0)]);
    for d in derive(&u) {
        let skipped = d.consumed.iter().filter(|c| c.is_none()).count() as f64;
        assert_eq!(score_sketch(&d, &model), skipped);
    }
}

#[test]
fn parse_is_sorted_deduplicated_and_bounded() {
    let u = Utterance::new("Find the number of papers in VLDB 2010");
    let out = parse(&u, &ParserModel::new(), 5);
    assert!(out.len() <= 5);
    for w in out.windows(2) {
        assert!(w[0].1 >= w[1].1);
        assert_ne!(w[0].0, w[1].0);
    }
    for (s, _) in &out {
        assert_eq!(&parse_sketch(&print_sketch(s)).unwrap(), s);
    }
}

#[test]
fn training_ranks_gold_first() {
    let pairs = vec![(
        "Find the number of papers in VLDB 2010".to_string(),
        r#"SELECT count(?[papers]) FROM ??[papers] WHERE ? = "VLDB 2010""#.to_string(),
    )];
    let (model, report) = train(&pairs, 10, 0.1, 7).unwrap();
    assert!(report.underivable.is_empty());
    let top = parse(&Utterance::new(&pairs[0].0), &model, 1);
    assert_eq!(print_sketch(&top[0].0), pairs[0].1);
    let (zero, _) = train(&pairs, 0, 0.1, 7).unwrap();
    assert_eq!(zero, ParserModel::new());
}

#[test]
fn no_update_when_gold_already_first() {
    let pairs = vec![(
        "Find the number of papers in VLDB 2010".to_string(),
        r#"SELECT count(?[papers]) FROM ??[papers] WHERE ? = "VLDB 2010""#.to_string(),
    )];
    let (_, report) = train(&pairs, 10, 0.1, 7).unwrap();
    let first_clean = report.updates.iter().position(|&u| u == 0).unwrap();
    assert!(report.updates[first_clean..].iter().all(|&u| u == 0));
}

#[test]
fn unparseable_gold_is_an_error() {
    let pairs = vec![("find x".to_string(), "SELECT ? FROM".to_string())];
    assert!(train(&pairs, 1, 0.1, 0).is_err());
}
