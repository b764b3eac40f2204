use std::collections::BTreeSet;

use drinfeld_core::registry::{example_params, lookup, run_check, CHECKS};
use drinfeld_core::{Budget, Error, Status};

#[test]
fn ids_are_unique() {
    let ids: BTreeSet<_> = CHECKS.iter().map(|c| c.id).collect();
    assert_eq!(ids.len(), CHECKS.len());
}

#[test]
fn every_check_runs_on_its_example() {
    for spec in CHECKS {
        let r = run_check(spec.id, &example_params(spec), &Budget::default()).unwrap();
        println!("{} {:?} {}", spec.id, r.status, serde_json::to_string(&r.witness).unwrap());
        assert_eq!(r.check_id, spec.id);
        assert!(matches!(r.status, Status::Pass | Status::Vacuous), "{} gave {:?}", spec.id, r.status);
    }
}

#[test]
fn unknown_id_names_valid_ids() {
    let Err(Error::Usage(msg)) = lookup("moore.nope") else { panic!("expected a usage error") };
    assert!(msg.contains("moore.identity") && msg.contains("counting.b2"));
}

#[test]
fn missing_and_extra_params_are_usage_errors() {
    let b = Budget::default();
    let mut p = serde_json::Map::new();
    p.insert("q".into(), 2.into());
    assert!(matches!(run_check("moore.identity", &p, &b), Err(Error::Usage(_))));
    p.insert("n".into(), 2.into());
    p.insert("bogus".into(), 1.into());
    assert!(matches!(run_check("moore.identity", &p, &b), Err(Error::Usage(_))));
}

#[test]
fn out_of_budget_is_an_error_report() {
    let p = serde_json::json!({"q": 7, "n": 4}).as_object().unwrap().clone();
    let r = run_check("moore.identity", &p, &Budget::default()).unwrap();
    assert_eq!(r.status, Status::Error);
    assert!(r.reason.unwrap().starts_with("resource"));
}
