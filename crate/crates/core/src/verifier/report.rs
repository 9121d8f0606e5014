//! JUnit XML as written by `pytest --junitxml`.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TestFailure {
    pub name: String,
    pub message: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed test report: {0}")]
pub struct MalformedReport(pub String);

/// Total test count and the failures and errors, in document order.
pub fn parse_test_report(xml_text: &str) -> Result<(usize, Vec<TestFailure>), MalformedReport> {
    let doc = roxmltree::Document::parse(xml_text).map_err(|e| MalformedReport(e.to_string()))?;
    let root = doc.root_element();
    let suites: Vec<roxmltree::Node> = match root.tag_name().name() {
        "testsuite" => vec![root],
        "testsuites" => root.children().filter(|n| n.has_tag_name("testsuite")).collect(),
        other => return Err(MalformedReport(format!("unexpected root element <{other}>"))),
    };
    let mut tests = 0;
    let mut failures = Vec::new();
    for suite in suites {
        let count = suite
            .attribute("tests")
            .ok_or_else(|| MalformedReport("<testsuite> without a tests attribute".into()))?;
        tests += count
            .parse::<usize>()
            .map_err(|_| MalformedReport(format!("tests=\"{count}\" is not a count")))?;
        for case in suite.descendants().filter(|n| n.has_tag_name("testcase")) {
            for problem in case.children().filter(|n| n.has_tag_name("failure") || n.has_tag_name("error")) {
                let name = match case.attribute("classname") {
                    Some(class) if !class.is_empty() => format!("{class}.{}", case.attribute("name").unwrap_or("")),
                    _ => case.attribute("name").unwrap_or("").to_string(),
                };
                let message = problem
                    .attribute("message")
                    .map(str::to_string)
                    .or_else(|| problem.text().map(|t| t.trim().to_string()))
                    .unwrap_or_default();
                failures.push(TestFailure { name, message });
            }
        }
    }
    Ok((tests, failures))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_report() {
        let xml = r#"<?xml version="1.0" encoding="utf-8"?><testsuites><testsuite name="pytest" errors="0" failures="0" skipped="0" tests="3" time="0.01"><testcase classname="test_x" name="test_a"/><testcase classname="test_x" name="test_b"/><testcase classname="test_x" name="test_c"/></testsuite></testsuites>"#;
        assert_eq!(parse_test_report(xml).unwrap(), (3, vec![]));
    }

    #[test]
    fn single_failure() {
        let xml = r#"<testsuite tests="2" failures="1"><testcase classname="test_x" name="test_a"><failure message="assert [1, 2] == [2]">long text</failure></testcase><testcase classname="test_x" name="test_b"/></testsuite>"#;
        let (n, f) = parse_test_report(xml).unwrap();
        assert_eq!(n, 2);
        assert_eq!(
            f,
            vec![TestFailure {
                name: "test_x.test_a".into(),
                message: "assert [1, 2] == [2]".into()
            }]
        );
    }

    #[test]
    fn collection_error_counts() {
        let xml = r#"<testsuites><testsuite tests="1" errors="1"><testcase classname="" name="test_x"><error message="collection failure">ImportError</error></testcase></testsuite></testsuites>"#;
        let (_, f) = parse_test_report(xml).unwrap();
        assert_eq!(f[0].name, "test_x");
    }

    #[test]
    fn truncated() {
        assert!(parse_test_report(r#"<testsuites><testsuite tests="3""#).is_err());
        assert!(parse_test_report("<html/>").is_err());
    }
}
