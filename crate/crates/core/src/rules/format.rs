//! The line-oriented rule file format.
//!
//! ```text
//! CATEGORIES Computers Religion Hobbies
//! ORDERED true
//! Computers IF mac # correct=90 incorrect=10
//! Computers IF graphics windows # correct=288 incorrect=12
//! Religion IF god christian NOT atheism # correct=30 incorrect=2
//! Hobbies IF baseball
//! RECALL Computers 0.67
//! RECALL Religion undefined
//! RECALL Hobbies 0.8
//! ```
//!
//! The `CATEGORIES` header fixes the category order. `ORDERED` defaults to
//! true when absent. A rule line is `<category> IF <term>... [NOT <term>...]`
//! with an optional `#`-prefixed stats suffix (missing counts default to 0).
//! `RECALL` footer lines are optional; a category without one has undefined
//! recall. Category labels and terms must be whitespace-free; blank lines are
//! ignored.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::CategorySet;

use super::{Rule, RuleError, RuleSet};

/// A rule file parse failure, with the 1-based line it happened on.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleParseError {
    pub line: usize,
    pub kind: RuleParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleParseErrorKind {
    /// The file must start with a `CATEGORIES` header line.
    MissingCategoriesHeader,
    InvalidCategories(String),
    InvalidOrderedFlag(String),
    UnknownCategory(String),
    /// A rule line without `IF`, or with nothing after it.
    MalformedRule,
    MalformedStats(String),
    MalformedRecall(String),
    InvalidRule(RuleError),
}

impl fmt::Display for RuleParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            RuleParseErrorKind::MissingCategoriesHeader => {
                write!(f, "expected a CATEGORIES header")
            }
            RuleParseErrorKind::InvalidCategories(msg) => {
                write!(f, "invalid CATEGORIES header: {msg}")
            }
            RuleParseErrorKind::InvalidOrderedFlag(v) => {
                write!(f, "ORDERED must be true or false, got {v:?}")
            }
            RuleParseErrorKind::UnknownCategory(name) => {
                write!(f, "unknown category label: {name}")
            }
            RuleParseErrorKind::MalformedRule => {
                write!(f, "expected `<category> IF <term>... [NOT <term>...]`")
            }
            RuleParseErrorKind::MalformedStats(s) => write!(f, "malformed stats suffix: {s}"),
            RuleParseErrorKind::MalformedRecall(s) => write!(f, "malformed RECALL line: {s}"),
            RuleParseErrorKind::InvalidRule(err) => write!(f, "{err}"),
        }
    }
}

impl core::error::Error for RuleParseError {}

pub(super) fn serialize(rule_set: &RuleSet) -> String {
    let mut out = String::new();
    out.push_str("CATEGORIES");
    for name in rule_set.category_set().names() {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    out.push_str(if rule_set.is_ordered() {
        "ORDERED true\n"
    } else {
        "ORDERED false\n"
    });
    for rule in rule_set.rules() {
        let category = rule_set
            .category_set()
            .name(rule.category)
            .expect("rule categories validated at construction");
        out.push_str(category);
        out.push_str(" IF");
        for term in &rule.positive_terms {
            out.push(' ');
            out.push_str(term);
        }
        if !rule.negative_terms.is_empty() {
            out.push_str(" NOT");
            for term in &rule.negative_terms {
                out.push(' ');
                out.push_str(term);
            }
        }
        out.push_str(&alloc::format!(
            " # correct={} incorrect={}\n",
            rule.covered_correct,
            rule.covered_incorrect
        ));
    }
    for (index, recall) in rule_set.category_recall().iter().enumerate() {
        let name = rule_set.category_set().name(index).expect("in range");
        match recall {
            Some(value) => out.push_str(&alloc::format!("RECALL {name} {value}\n")),
            None => out.push_str(&alloc::format!("RECALL {name} undefined\n")),
        }
    }
    out
}

fn parse_stats(suffix: &str, line: usize) -> Result<(u64, u64), RuleParseError> {
    let err = |s: &str| RuleParseError {
        line,
        kind: RuleParseErrorKind::MalformedStats(s.to_string()),
    };
    let mut correct = None;
    let mut incorrect = None;
    for field in suffix.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| err(suffix))?;
        let parsed: u64 = value.parse().map_err(|_| err(suffix))?;
        match key {
            "correct" => correct = Some(parsed),
            "incorrect" => incorrect = Some(parsed),
            _ => return Err(err(suffix)),
        }
    }
    match (correct, incorrect) {
        (Some(c), Some(i)) => Ok((c, i)),
        _ => Err(err(suffix)),
    }
}

pub(super) fn parse(text: &str) -> Result<RuleSet, RuleParseError> {
    let mut category_set: Option<CategorySet> = None;
    let mut ordered = true;
    let mut rules: Vec<Rule> = Vec::new();
    let mut recalls: Vec<Option<f64>> = Vec::new();

    for (index, raw_line) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        let error = |kind| RuleParseError { line: line_no, kind };
        let keyword = line.split_whitespace().next().unwrap_or("");

        if keyword == "CATEGORIES" {
            let rest = &line["CATEGORIES".len()..];
            if category_set.is_some() {
                return Err(error(RuleParseErrorKind::InvalidCategories(
                    "duplicate header".to_string(),
                )));
            }
            let names: Vec<String> = rest.split_whitespace().map(String::from).collect();
            let set = CategorySet::new(names).map_err(|e| {
                error(RuleParseErrorKind::InvalidCategories(alloc::format!("{e}")))
            })?;
            recalls = alloc::vec![None; set.len()];
            category_set = Some(set);
            continue;
        }

        let categories = category_set
            .as_ref()
            .ok_or_else(|| error(RuleParseErrorKind::MissingCategoriesHeader))?;

        if let Some(rest) = line.strip_prefix("ORDERED") {
            match rest.trim() {
                "true" => ordered = true,
                "false" => ordered = false,
                other => {
                    return Err(error(RuleParseErrorKind::InvalidOrderedFlag(
                        other.to_string(),
                    )))
                }
            }
            continue;
        }

        if let Some(rest) = line.strip_prefix("RECALL") {
            let fields: Vec<&str> = rest.split_whitespace().collect();
            let [name, value] = fields[..] else {
                return Err(error(RuleParseErrorKind::MalformedRecall(rest.to_string())));
            };
            let category = categories
                .index_of(name)
                .ok_or_else(|| error(RuleParseErrorKind::UnknownCategory(name.to_string())))?;
            recalls[category] = if value == "undefined" {
                None
            } else {
                let parsed: f64 = value.parse().map_err(|_| {
                    error(RuleParseErrorKind::MalformedRecall(rest.to_string()))
                })?;
                Some(parsed)
            };
            continue;
        }

        // rule line, optionally followed by a # stats suffix
        let (body, stats) = match line.split_once('#') {
            Some((body, suffix)) => (body.trim(), Some(suffix.trim())),
            None => (line, None),
        };
        let mut words = body.split_whitespace();
        let category_name = words.next().ok_or_else(|| error(RuleParseErrorKind::MalformedRule))?;
        if words.next() != Some("IF") {
            return Err(error(RuleParseErrorKind::MalformedRule));
        }
        let category = categories.index_of(category_name).ok_or_else(|| {
            error(RuleParseErrorKind::UnknownCategory(category_name.to_string()))
        })?;
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        let mut negating = false;
        for word in words {
            if word == "NOT" {
                negating = true;
                continue;
            }
            if negating {
                negative.push(word.to_string());
            } else {
                positive.push(word.to_string());
            }
        }
        let mut rule = Rule::new(category, positive, negative)
            .map_err(|e| error(RuleParseErrorKind::InvalidRule(e)))?;
        if let Some(suffix) = stats {
            let (correct, incorrect) = parse_stats(suffix, line_no)?;
            rule = rule.with_counts(correct, incorrect);
        }
        rules.push(rule);
    }

    let categories = category_set.ok_or(RuleParseError {
        line: text.lines().count().max(1),
        kind: RuleParseErrorKind::MissingCategoriesHeader,
    })?;
    let mut rule_set = RuleSet::new(categories, rules, ordered).map_err(|e| RuleParseError {
        line: 1,
        kind: RuleParseErrorKind::InvalidRule(e),
    })?;
    rule_set
        .set_category_recall(recalls)
        .map_err(|e| RuleParseError {
            line: 1,
            kind: RuleParseErrorKind::InvalidRule(e),
        })?;
    Ok(rule_set)
}

#[cfg(test)]
mod tests {
    use super::super::{Rule, RuleSet};
    use super::*;
    use proptest::prelude::*;

    const EXAMPLE: &str = "\
CATEGORIES Computers Religion Hobbies
ORDERED true
Computers IF mac # correct=90 incorrect=10
Computers IF graphics windows # correct=288 incorrect=12
Religion IF god christian
Hobbies IF baseball
RECALL Computers 0.67
RECALL Religion undefined
";

    #[test]
    fn parses_the_example_file() {
        let rule_set = RuleSet::parse(EXAMPLE).unwrap();
        assert_eq!(rule_set.len(), 4);
        assert!(rule_set.is_ordered());
        assert_eq!(rule_set.category_set().names(), ["Computers", "Religion", "Hobbies"]);
        let graphics = &rule_set.rules()[1];
        assert_eq!(graphics.positive_terms, ["graphics", "windows"]);
        assert_eq!(graphics.positive_terms.len(), 2);
        assert_eq!((graphics.covered_correct, graphics.covered_incorrect), (288, 12));
        assert_eq!(rule_set.category_recall()[0], Some(0.67));
        assert_eq!(rule_set.category_recall()[1], None);
        assert_eq!(rule_set.category_recall()[2], None);
    }

    #[test]
    fn empty_antecedent_is_an_error() {
        let text = "CATEGORIES a b\na IF\n";
        let err = RuleSet::parse(text).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(matches!(
            err.kind,
            RuleParseErrorKind::InvalidRule(RuleError::EmptyAntecedent)
        ));
    }

    #[test]
    fn unknown_category_is_an_error_with_line_number() {
        let text = "CATEGORIES a b\nc IF x\n";
        let err = RuleSet::parse(text).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(matches!(err.kind, RuleParseErrorKind::UnknownCategory(_)));
    }

    #[test]
    fn missing_header_is_an_error() {
        let err = RuleSet::parse("a IF x\n").unwrap_err();
        assert!(matches!(
            err.kind,
            RuleParseErrorKind::MissingCategoriesHeader
        ));
    }

    #[test]
    fn malformed_stats_are_rejected() {
        let text = "CATEGORIES a b\na IF x # correct=1\n";
        let err = RuleSet::parse(text).unwrap_err();
        assert!(matches!(err.kind, RuleParseErrorKind::MalformedStats(_)));
    }

    #[test]
    fn negated_terms_round_trip() {
        let text = "CATEGORIES a b\na IF x y NOT z w\n";
        let rule_set = RuleSet::parse(text).unwrap();
        assert_eq!(rule_set.rules()[0].positive_terms, ["x", "y"]);
        assert_eq!(rule_set.rules()[0].negative_terms, ["z", "w"]);
        let again = RuleSet::parse(&rule_set.serialize()).unwrap();
        assert_eq!(again, rule_set);
    }

    fn arbitrary_rule_set() -> impl Strategy<Value = RuleSet> {
        let name = "[a-z]{1,8}";
        let names = proptest::collection::btree_set(name, 2..5);
        names.prop_flat_map(|names| {
            let names: Vec<String> = names.into_iter().collect();
            let k = names.len();
            let rule = (
                0..k,
                proptest::collection::btree_set("[a-z]{1,6}", 1..4),
                proptest::collection::btree_set("[A-Z]{1,6}", 0..3),
                0u64..1000,
                0u64..1000,
            )
                .prop_map(|(category, pos, neg, correct, incorrect)| {
                    Rule::new(
                        category,
                        pos.into_iter().collect(),
                        neg.into_iter().collect(),
                    )
                    .unwrap()
                    .with_counts(correct, incorrect)
                });
            (
                proptest::collection::vec(rule, 0..6),
                proptest::bool::ANY,
                proptest::collection::vec(
                    proptest::option::of(0.0f64..=1.0),
                    k..=k,
                ),
            )
                .prop_map(move |(rules, ordered, recalls)| {
                    let cats = CategorySet::new(names.clone()).unwrap();
                    let mut rule_set = RuleSet::new(cats, rules, ordered).unwrap();
                    rule_set.set_category_recall(recalls).unwrap();
                    rule_set
                })
        })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trips(rule_set in arbitrary_rule_set()) {
            let text = rule_set.serialize();
            let parsed = RuleSet::parse(&text).unwrap();
            prop_assert_eq!(parsed, rule_set);
        }
    }
}
