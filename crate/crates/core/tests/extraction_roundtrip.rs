use proptest::prelude::*;
use seq2rdd::frontend::{
    extract_fragments, from_extraction_json, to_extraction_json, Datasets, DatasetField, ExtractionRecord, OperationEntry,
    SourceProgram,
};

fn names() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[a-z_][a-z0-9_]{0,8}", 0..4)
}

fn record() -> impl Strategy<Value = ExtractionRecord> {
    (
        1usize..50,
        1usize..500,
        0usize..20,
        any::<bool>(),
        names(),
        names(),
        prop::collection::vec(
            (
                prop::sample::select(vec!["Conditional", "Method Call", "Augmented Assignment", "Assignment", "Function Call"]),
                "[ -~]{0,30}",
            ),
            0..5,
        ),
    )
        .prop_map(|(id, start, len, nested, input, output, ops)| ExtractionRecord {
            loop_id: id,
            start_line: start,
            end_line: start + len,
            is_nested: nested,
            datasets: Datasets {
                input: DatasetField::from_names(&input),
                output: DatasetField::from_names(&output),
            },
            operations: ops
                .into_iter()
                .map(|(k, e)| OperationEntry {
                    kind: k.to_string(),
                    expression: e,
                })
                .collect(),
        })
}

proptest! {
    #[test]
    fn json_round_trip(r in record()) {
        let text = serde_json::to_string_pretty(&r).unwrap();
        prop_assert_eq!(from_extraction_json(&text).unwrap(), r);
    }

    #[test]
    fn extracted_records_round_trip(threshold in -50i64..50, var in "[a-z]{1,6}") {
        prop_assume!(!["if", "in", "for", "def", "is", "or", "and", "not", "as", "del", "try"].contains(&var.as_str()));
        let src = format!(
            "def f(items):\n    out = []\n    for {var} in items:\n        if {var} > {threshold}:\n            out.append({var})\n    return out\n"
        );
        let program = SourceProgram::from_source("p.py", src).unwrap();
        let fragments = extract_fragments(&program);
        prop_assert_eq!(fragments.len(), 1);
        let text = to_extraction_json(&fragments[0]);
        let back = from_extraction_json(&text).unwrap();
        prop_assert_eq!(&back, &ExtractionRecord::from(&fragments[0]));
        prop_assert_eq!(back.operations[0].expression.clone(), format!("{var} > {threshold}"));
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let text = r#"{"Loop ID": 1, "Start Line": 1, "End Line": 2, "Is Nested": "No",
        "Datasets": {"Input": "a", "Output": "b"}, "Operations": [], "Extra": 1}"#;
    assert!(from_extraction_json(text).is_err());
    let bad_flag = text.replace(", \"Extra\": 1", "").replace("\"No\"", "\"maybe\"");
    assert!(from_extraction_json(&bad_flag).is_err());
}
