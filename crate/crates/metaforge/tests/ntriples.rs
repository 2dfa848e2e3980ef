#[path = "../../core/tests/common/mod.rs"]
mod common;
mod support;

use common::shapes::{generate, shapes};
use metaforge_core::compiler::export_ntriples;
use metaforge_core::model::{parse_instance, parse_template};
use proptest::prelude::*;
use serde_json::Value;
use support::{corpus_files, expected_triples, fixture, ntriples_statements, Env};

fn sorted_and_unique(text: &str) -> bool {
    let lines: Vec<&str> = text.lines().collect();
    lines.windows(2).all(|w| w[0] < w[1])
}

#[test]
fn fixtures_match_closed_form_and_parse() {
    let env = Env::new();
    let mut cases = vec![("templates/five-types.json", fixture("instances/five-types-valid.json"))];
    for path in corpus_files() {
        cases.push(("templates/tissue-sample.json", std::fs::read_to_string(path).unwrap()));
    }
    for (template, text) in cases {
        let rt = env
            .service
            .resolve(&parse_template(&fixture(template)).unwrap())
            .unwrap();
        let m = parse_instance(&text).unwrap();
        let out = export_ntriples(&rt, &m).unwrap();
        let doc: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(out.lines().count(), expected_triples(&doc), "{text}");
        assert_eq!(ntriples_statements(&out), Ok(expected_triples(&doc)));
        assert!(sorted_and_unique(&out));
        assert!(out.ends_with('\n'));
        assert_eq!(export_ntriples(&rt, &m).unwrap(), out);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_exports_parse_with_expected_count(s in shapes(2)) {
        let (rt, m, e) = generate(&s);
        let out = export_ntriples(&rt, &m).unwrap();
        prop_assert_eq!(ntriples_statements(&out), Ok(e.triples()));
        prop_assert!(sorted_and_unique(&out));
    }
}
