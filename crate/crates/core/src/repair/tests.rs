use alloc::vec;

use super::*;
use crate::catalog::test_support::mas_catalog;
use crate::sketch::{parse_sketch, print_sketch};

fn motivating() -> SketchRel {
    parse_sketch(r#"SELECT count(?[papers]) FROM ??[papers] WHERE ? = "VLDB 2010""#).unwrap()
}

#[test]
fn split_at_first_delimiter() {
    assert_eq!(split("VLDB 2010"), ("VLDB".into(), "2010".into()));
    assert_eq!(split("O'Neil"), ("O".into(), "Neil".into()));
    assert_eq!(split("state-of-the-art"), ("state".into(), "of-the-art".into()));
    assert_eq!(split("plain"), ("plain".into(), String::new()));
}

#[test]
fn add_pred_splits_literal_and_types_numbers() {
    let sim = SimilarityProvider::lexical();
    let cfg = Config::default();
    let mut lineage = Lineage::new();
    let path = SketchPath(vec![1, 0]);
    let r = apply_repair(&motivating(), &path, &mut lineage, &sim, &cfg).unwrap();
    assert_eq!(r.tactic, Tactic::AddPred);
    assert_eq!(
        print_sketch(&r.sketch),
        r#"SELECT count(?[papers]) FROM ??[papers] WHERE ? = "VLDB" AND ? = 2010"#
    );
    assert!(lineage.contains(&path, Tactic::AddPred));
    // The next unused tactic at the same atom is AddCol.
    let again = apply_repair(&motivating(), &path, &mut lineage, &sim, &cfg).unwrap();
    assert_eq!(again.tactic, Tactic::AddCol);
    assert_eq!(
        print_sketch(&again.sketch),
        r#"SELECT count(?[papers]) FROM ??[papers] WHERE ? = ?[VLDB 2010]"#
    );
    assert!(apply_repair(&motivating(), &path, &mut lineage, &sim, &cfg).is_err());
}

#[test]
fn add_func_only_in_projection_items() {
    let sim = SimilarityProvider::lexical();
    let cfg = Config::default();
    let sketch =
        parse_sketch("SELECT ?[number of papers], ?[title] FROM ??[papers] WHERE ?[number of papers] > 3").unwrap();
    let item = SketchPath(vec![0, 0]);
    assert_eq!(applicable_tactics(&sketch, &item, &sim, &cfg), vec![Tactic::AddFunc]);
    let r = apply_repair(&sketch, &item, &mut Lineage::new(), &sim, &cfg).unwrap();
    assert!(print_sketch(&r.sketch).starts_with("SELECT count(?[papers]), ?[title]"));
    let in_predicate = SketchPath(vec![1, 0, 0]);
    assert!(applicable_tactics(&sketch, &in_predicate, &sim, &cfg).is_empty());
}

#[test]
fn function_keywords() {
    let sim = SimilarityProvider::lexical();
    let f = |h: &str| function_from_hint(&Hint::new(h), &sim, 0.6);
    assert_eq!(f("how many papers"), Some((AggFunc::Count, Hint::new("papers"))));
    assert_eq!(f("average of the score"), Some((AggFunc::Avg, Hint::new("score"))));
    assert_eq!(f("highest salary"), Some((AggFunc::Max, Hint::new("salary"))));
    assert_eq!(f("total"), Some((AggFunc::Sum, Hint::none())));
    assert_eq!(f("title"), None);
}

#[test]
fn join_tactics_wrap_inputs() {
    let sim = SimilarityProvider::lexical();
    let cfg = Config::default();
    let sketch = parse_sketch("SELECT ?[a] FROM ??[x] JOIN ??[y] ON ?[k] = ?[l]").unwrap();
    let join = SketchPath(vec![1]);
    let r = apply_repair(&sketch, &join, &mut Lineage::new(), &sim, &cfg).unwrap();
    assert_eq!(r.tactic, Tactic::AddJoin3);
    assert_eq!(
        print_sketch(&r.sketch),
        "SELECT ?[a] FROM ??[x] JOIN ?? ON ? = ? JOIN ??[y] ON ? = ?"
    );
    let root = SketchPath::root();
    let r = apply_repair(&sketch, &root, &mut Lineage::new(), &sim, &cfg).unwrap();
    assert_eq!(r.tactic, Tactic::AddJoin2);
    assert_eq!(
        print_sketch(&r.sketch),
        "SELECT ?[a] FROM ??[x] JOIN ??[y] ON ?[k] = ?[l] JOIN ?? ON ? = ?"
    );
}

#[test]
fn table_holes_are_not_repairable() {
    let sim = SimilarityProvider::lexical();
    let cfg = Config::default();
    let path = SketchPath(vec![1, 1]);
    assert!(!can_repair(&motivating(), &path, &Lineage::new(), &sim, &cfg));
}

#[test]
fn localizes_unsatisfiable_literal_then_missing_join() {
    let catalog = mas_catalog();
    let sim = SimilarityProvider::lexical();
    let cfg = Config::default();
    let cx = Completer::new(&catalog, &sim, &cfg);
    let mut lineage = Lineage::new();
    let fault = fault_localize(&motivating(), &cx, &lineage).unwrap();
    assert_eq!(fault.path, SketchPath(vec![1, 0]));
    assert!(fault.best_score < cfg.fault_threshold);
    let first = apply_repair(&motivating(), &fault.path, &mut lineage, &sim, &cfg).unwrap();

    let cx = Completer::new(&catalog, &sim, &cfg);
    let fault = fault_localize(&first.sketch, &cx, &lineage).unwrap();
    assert_eq!(fault.path, SketchPath(vec![1]));
    let second = apply_repair(&first.sketch, &fault.path, &mut lineage, &sim, &cfg).unwrap();
    assert_eq!(second.tactic, Tactic::AddJoin1);
    assert_eq!(
        print_sketch(&second.sketch),
        r#"SELECT count(?[papers]) FROM ??[papers] JOIN ?? ON ? = ? WHERE ? = "VLDB" AND ? = 2010"#
    );
}

#[test]
fn no_fault_in_plausible_sketch() {
    let catalog = mas_catalog();
    let sim = SimilarityProvider::lexical();
    let cfg = Config::default();
    let cx = Completer::new(&catalog, &sim, &cfg);
    let sketch = parse_sketch(r#"SELECT ?[title] FROM ??[Publication] WHERE ?[year] = 2010"#).unwrap();
    assert_eq!(fault_localize(&sketch, &cx, &Lineage::new()), None);
}
