mod support;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use sketchql_core::algebra::{Attr, CmpOp, Expr, Predicate, SpecItem, Value};
use sketchql_core::completion::Completer;
use sketchql_core::similarity::SimilarityProvider;
use sketchql_core::{evaluate, type_of, Config, QueryTerm};
use support::{random_catalog, random_sketch, rng};

fn all_columns(catalog: &sketchql_core::Catalog) -> Vec<(Attr, sketchql_core::algebra::BaseType)> {
    catalog
        .tables()
        .iter()
        .flat_map(|t| t.record_type().fields().iter().map(|f| (f.attr.clone(), f.ty)))
        .collect()
}

proptest! {
    #![proptest_config(support::cases(128))]

    #[test]
    fn probing_agrees_with_evaluating_the_selection(seed in any::<u64>()) {
        let mut r = rng(seed);
        let catalog = random_catalog(&mut r);
        let cols = all_columns(&catalog);
        for _ in 0..8 {
            let (attr, _) = cols.choose(&mut r).unwrap().clone();
            let table = catalog.table(attr.base().0).unwrap();
            let idx = table.column_names().position(|c| c == attr.base().1).unwrap();
            let probe = match table.rows().choose(&mut r) {
                Some(row) if r.gen_bool(0.7) => row[idx].clone(),
                _ => match &catalog.table_type(attr.base().0).unwrap().type_of(&attr).unwrap() {
                    sketchql_core::algebra::BaseType::Number => Value::number(r.gen_range(-5..60) as f64),
                    sketchql_core::algebra::BaseType::String => Value::string("zz"),
                    sketchql_core::algebra::BaseType::Bool => Value::Bool(r.gen_bool(0.5)),
                },
            };
            let op = *CmpOp::ALL.choose(&mut r).unwrap();
            let q = QueryTerm::select(
                Predicate::compare(attr.clone(), op, Expr::Value(probe.clone())),
                QueryTerm::table(attr.base().0),
            );
            let rows = evaluate(&q, &catalog).unwrap().rows.len();
            prop_assert_eq!(catalog.column_satisfies(&attr, op, &probe), rows > 0, "{} {} {}", attr, op, probe);
        }
    }

    #[test]
    fn column_pairs_agree_with_evaluating_the_join(seed in any::<u64>()) {
        let mut r = rng(seed);
        let catalog = random_catalog(&mut r);
        let cols = all_columns(&catalog);
        for _ in 0..8 {
            let (a, aty) = cols.choose(&mut r).unwrap().clone();
            let (b, bty) = cols.choose(&mut r).unwrap().clone();
            if aty != bty || a.base().0 == b.base().0 {
                continue;
            }
            let q = QueryTerm::join(QueryTerm::table(a.base().0), a.clone(), b.clone(), QueryTerm::table(b.base().0));
            let rows = evaluate(&q, &catalog).unwrap().rows.len();
            prop_assert_eq!(catalog.columns_satisfy(&a, CmpOp::Eq, &b), rows > 0);
            prop_assert_eq!(catalog.is_fk_pair(&a, &b), catalog.is_fk_pair(&b, &a));
            let overlap = catalog.content_overlap(&a, &b);
            prop_assert!((0.0..=1.0).contains(&overlap));
            prop_assert_eq!(overlap.to_bits(), catalog.content_overlap(&b, &a).to_bits());
            prop_assert_eq!(overlap > 0.0, rows > 0);
        }
    }

    #[test]
    fn typing_is_deterministic_and_matches_evaluation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let catalog = random_catalog(&mut r);
        let sketch = random_sketch(&mut r, &catalog);
        let sim = SimilarityProvider::lexical();
        let cfg = Config::default();
        for c in Completer::new(&catalog, &sim, &cfg).instantiate_rel(&sketch).iter().take(10) {
            let q = c.query().unwrap();
            let ty = type_of(q, &catalog).unwrap();
            prop_assert_eq!(type_of(q, &catalog).unwrap(), ty.clone());
            let table = evaluate(q, &catalog).unwrap();
            prop_assert_eq!(table.header, ty.clone());
            prop_assert!(table.rows.iter().all(|row| row.len() == ty.len()));
            if let QueryTerm::Project { spec, .. } = q {
                if spec.items().iter().all(|i| matches!(i, SpecItem::Aggregate(..))) {
                    prop_assert_eq!(table.rows.len(), 1);
                }
            }
        }
    }

    #[test]
    fn join_types_are_unions(seed in any::<u64>()) {
        let mut r = rng(seed);
        let catalog = random_catalog(&mut r);
        let cols = all_columns(&catalog);
        let (a, aty) = cols.choose(&mut r).unwrap().clone();
        let (b, bty) = cols.choose(&mut r).unwrap().clone();
        let (ta, tb) = (a.base().0.to_string(), b.base().0.to_string());
        let q = QueryTerm::join(QueryTerm::table(&ta), a, b, QueryTerm::table(&tb));
        match type_of(&q, &catalog) {
            Ok(ty) => {
                prop_assert!(ta != tb && aty == bty);
                let expected = catalog.table_type(&ta).unwrap().union(catalog.table_type(&tb).unwrap()).unwrap();
                prop_assert_eq!(ty, expected);
            }
            Err(_) => prop_assert!(ta == tb || aty != bty),
        }
    }
}
