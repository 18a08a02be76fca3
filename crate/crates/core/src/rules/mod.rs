//! Ordered conjunctive classification rules: the document classifier whose
//! rules the prober compiles into counting queries.
//!
//! A rule fires on a document when all of its positive terms are present and
//! none of its negative terms are. An ordered rule set classifies a document
//! by the first rule that fires; an unordered set lets every firing rule
//! vote, majority wins, ties going to the category of the earliest firing
//! rule.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{CategorySet, Corpus, Document};

mod format;
mod learn;

pub use format::RuleParseError;
pub use learn::{train, TrainError, TrainOptions};

/// Errors raised while assembling rules or rule sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleError {
    EmptyAntecedent,
    /// A term appears in both the positive and negative lists.
    ContradictoryTerm(String),
    /// Terms must be non-empty and free of whitespace and `#`.
    InvalidTerm(String),
    CategoryOutOfRange { category: usize, categories: usize },
    RecallLengthMismatch { expected: usize, got: usize },
    RecallOutOfRange(f64),
}

impl fmt::Display for RuleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleError::EmptyAntecedent => write!(f, "a rule needs at least one positive term"),
            RuleError::ContradictoryTerm(t) => {
                write!(f, "term {t:?} is both required and negated")
            }
            RuleError::InvalidTerm(t) => write!(f, "invalid rule term: {t:?}"),
            RuleError::CategoryOutOfRange {
                category,
                categories,
            } => write!(
                f,
                "rule category index {category} out of range for {categories} categories"
            ),
            RuleError::RecallLengthMismatch { expected, got } => {
                write!(f, "expected {expected} recall entries, got {got}")
            }
            RuleError::RecallOutOfRange(v) => write!(f, "recall {v} outside [0, 1]"),
        }
    }
}

impl core::error::Error for RuleError {}

fn valid_rule_term(term: &str) -> bool {
    !term.is_empty() && !term.chars().any(|c| c.is_whitespace() || c == '#')
}

/// One conjunctive rule plus its training coverage counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub category: usize,
    pub positive_terms: Vec<String>,
    pub negative_terms: Vec<String>,
    /// Documents this rule fired on during training that carried its
    /// category.
    pub covered_correct: u64,
    /// Documents it fired on that carried some other category.
    pub covered_incorrect: u64,
}

impl Rule {
    pub fn new(
        category: usize,
        positive_terms: Vec<String>,
        negative_terms: Vec<String>,
    ) -> Result<Self, RuleError> {
        if positive_terms.is_empty() {
            return Err(RuleError::EmptyAntecedent);
        }
        for term in positive_terms.iter().chain(&negative_terms) {
            if !valid_rule_term(term) {
                return Err(RuleError::InvalidTerm(term.clone()));
            }
        }
        for term in &negative_terms {
            if positive_terms.contains(term) {
                return Err(RuleError::ContradictoryTerm(term.clone()));
            }
        }
        Ok(Self {
            category,
            positive_terms,
            negative_terms,
            covered_correct: 0,
            covered_incorrect: 0,
        })
    }

    pub fn with_counts(mut self, correct: u64, incorrect: u64) -> Self {
        self.covered_correct = correct;
        self.covered_incorrect = incorrect;
        self
    }

    /// Fraction of covered training documents the rule classified correctly;
    /// undefined before any coverage has been recorded.
    pub fn accuracy(&self) -> Option<f64> {
        let total = self.covered_correct + self.covered_incorrect;
        if total == 0 {
            None
        } else {
            Some(self.covered_correct as f64 / total as f64)
        }
    }

    pub fn coverage(&self) -> u64 {
        self.covered_correct + self.covered_incorrect
    }

    /// True when every positive term is present and no negative term is.
    pub fn matches(&self, terms: &BTreeSet<&str>) -> bool {
        self.positive_terms.iter().all(|t| terms.contains(t.as_str()))
            && !self
                .negative_terms
                .iter()
                .any(|t| terms.contains(t.as_str()))
    }
}

/// An ordered (or unordered) list of rules over a fixed category set, with
/// per-category recall from the training phase.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    rules: Vec<Rule>,
    ordered: bool,
    category_recall: Vec<Option<f64>>,
    category_set: CategorySet,
}

impl RuleSet {
    pub fn new(
        category_set: CategorySet,
        rules: Vec<Rule>,
        ordered: bool,
    ) -> Result<Self, RuleError> {
        for rule in &rules {
            if rule.category >= category_set.len() {
                return Err(RuleError::CategoryOutOfRange {
                    category: rule.category,
                    categories: category_set.len(),
                });
            }
        }
        let recall = alloc::vec![None; category_set.len()];
        Ok(Self {
            rules,
            ordered,
            category_recall: recall,
            category_set,
        })
    }

    /// Per-category recall; `None` marks a category whose recall is
    /// undefined (no training documents).
    pub fn set_category_recall(&mut self, recall: Vec<Option<f64>>) -> Result<(), RuleError> {
        if recall.len() != self.category_set.len() {
            return Err(RuleError::RecallLengthMismatch {
                expected: self.category_set.len(),
                got: recall.len(),
            });
        }
        for value in recall.iter().flatten() {
            if !(0.0..=1.0).contains(value) {
                return Err(RuleError::RecallOutOfRange(*value));
            }
        }
        self.category_recall = recall;
        Ok(())
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    pub fn category_set(&self) -> &CategorySet {
        &self.category_set
    }

    pub fn category_recall(&self) -> &[Option<f64>] {
        &self.category_recall
    }

    /// Index of the first rule that fires, in rule order.
    pub fn first_firing_rule(&self, terms: &BTreeSet<&str>) -> Option<usize> {
        self.rules.iter().position(|rule| rule.matches(terms))
    }

    /// Classifies one document. Ordered mode: the first firing rule decides.
    /// Unordered mode: firing rules vote; the majority category wins, ties
    /// broken by the earliest firing rule. `None` when no rule fires.
    pub fn classify(&self, terms: &BTreeSet<&str>) -> Option<usize> {
        if self.ordered {
            return self
                .first_firing_rule(terms)
                .map(|index| self.rules[index].category);
        }
        let k = self.category_set.len();
        let mut votes = alloc::vec![0usize; k];
        let mut first_fire = alloc::vec![usize::MAX; k];
        for (index, rule) in self.rules.iter().enumerate() {
            if rule.matches(terms) {
                votes[rule.category] += 1;
                if first_fire[rule.category] == usize::MAX {
                    first_fire[rule.category] = index;
                }
            }
        }
        let best = votes.iter().max().copied().unwrap_or(0);
        if best == 0 {
            return None;
        }
        (0..k)
            .filter(|&c| votes[c] == best)
            .min_by_key(|&c| first_fire[c])
    }

    /// Exact per-category counts of documents classified into each category;
    /// the oracle against which probing is validated.
    pub fn apply_to_corpus<'a, I>(&self, documents: I) -> Vec<u64>
    where
        I: IntoIterator<Item = &'a Document>,
    {
        let mut counts = alloc::vec![0u64; self.category_set.len()];
        for doc in documents {
            if let Some(category) = self.classify(&doc.token_set()) {
                counts[category] += 1;
            }
        }
        counts
    }

    /// Per-rule document counts. Ordered mode attributes each document to
    /// its first firing rule; unordered mode counts every document a rule
    /// fires on. This is exactly what a correct probe run must reproduce.
    pub fn per_rule_match_counts<'a, I>(&self, documents: I) -> Vec<u64>
    where
        I: IntoIterator<Item = &'a Document>,
    {
        let mut counts = alloc::vec![0u64; self.rules.len()];
        for doc in documents {
            let terms = doc.token_set();
            if self.ordered {
                if let Some(index) = self.first_firing_rule(&terms) {
                    counts[index] += 1;
                }
            } else {
                for (index, rule) in self.rules.iter().enumerate() {
                    if rule.matches(&terms) {
                        counts[index] += 1;
                    }
                }
            }
        }
        counts
    }

    /// Rule-file rendering; see the module docs of [`format`] for the layout.
    pub fn serialize(&self) -> String {
        format::serialize(self)
    }

    /// Parses a rule file produced by [`RuleSet::serialize`] or written by
    /// hand.
    pub fn parse(text: &str) -> Result<Self, RuleParseError> {
        format::parse(text)
    }
}

/// Training-set bookkeeping for a rule set: per-rule coverage, per-category
/// recall inputs, and the confusion matrix.
///
/// The confusion matrix has one row per true category and `k + 1` columns:
/// the first `k` count predicted categories, the last counts documents no
/// rule fired on, so each row sums to that category's training documents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingStats {
    pub per_rule: Vec<(u64, u64)>,
    pub training_docs: Vec<u64>,
    pub recalled_docs: Vec<u64>,
    pub confusion: Vec<Vec<u64>>,
}

impl TrainingStats {
    /// Recall of one category; `None` when it had no training documents.
    pub fn recall(&self, category: usize) -> Option<f64> {
        let total = *self.training_docs.get(category)?;
        if total == 0 {
            None
        } else {
            Some(self.recalled_docs[category] as f64 / total as f64)
        }
    }

    pub fn recall_vector(&self) -> Vec<Option<f64>> {
        (0..self.training_docs.len())
            .map(|c| self.recall(c))
            .collect()
    }
}

/// Measures a rule set against a labeled corpus: first-match attribution in
/// ordered mode, vote classification in unordered mode (where per-rule
/// coverage then counts every firing rule independently).
///
/// Works on held-out data as well as the training set.
pub fn evaluate(rule_set: &RuleSet, corpus: &Corpus) -> TrainingStats {
    let k = rule_set.category_set().len();
    let mut per_rule = alloc::vec![(0u64, 0u64); rule_set.len()];
    let mut training_docs = alloc::vec![0u64; k];
    let mut recalled_docs = alloc::vec![0u64; k];
    let mut confusion = alloc::vec![alloc::vec![0u64; k + 1]; k];

    for doc in corpus.documents() {
        let Some(label) = doc.label else { continue };
        let terms = doc.token_set();
        training_docs[label] += 1;

        if rule_set.is_ordered() {
            if let Some(index) = rule_set.first_firing_rule(&terms) {
                let rule = &rule_set.rules()[index];
                if rule.category == label {
                    per_rule[index].0 += 1;
                } else {
                    per_rule[index].1 += 1;
                }
            }
        } else {
            for (index, rule) in rule_set.rules().iter().enumerate() {
                if rule.matches(&terms) {
                    if rule.category == label {
                        per_rule[index].0 += 1;
                    } else {
                        per_rule[index].1 += 1;
                    }
                }
            }
        }

        match rule_set.classify(&terms) {
            Some(predicted) => {
                confusion[label][predicted] += 1;
                if predicted == label {
                    recalled_docs[label] += 1;
                }
            }
            None => confusion[label][k] += 1,
        }
    }

    TrainingStats {
        per_rule,
        training_docs,
        recalled_docs,
        confusion,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn cats(names: &[&str]) -> CategorySet {
        CategorySet::new(names.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn rule(category: usize, pos: &[&str], neg: &[&str]) -> Rule {
        Rule::new(
            category,
            pos.iter().map(|s| s.to_string()).collect(),
            neg.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    fn doc(id: &str, tokens: &[&str], label: Option<usize>) -> Document {
        Document::new(id, tokens.iter().map(|s| s.to_string()).collect(), label)
    }

    fn terms<'a>(tokens: &[&'a str]) -> BTreeSet<&'a str> {
        tokens.iter().copied().collect()
    }

    /// The four-rule classifier used as the running example: Computers IF
    /// mac; Computers IF graphics windows; Religion IF god christian;
    /// Hobbies IF baseball.
    pub(crate) fn example_rule_set() -> RuleSet {
        RuleSet::new(
            cats(&["Computers", "Religion", "Hobbies"]),
            vec![
                rule(0, &["mac"], &[]),
                rule(0, &["graphics", "windows"], &[]),
                rule(1, &["god", "christian"], &[]),
                rule(2, &["baseball"], &[]),
            ],
            true,
        )
        .unwrap()
    }

    #[test]
    fn rule_rejects_empty_antecedent() {
        assert_eq!(
            Rule::new(0, alloc::vec![], alloc::vec![]),
            Err(RuleError::EmptyAntecedent)
        );
    }

    #[test]
    fn rule_rejects_contradictory_terms() {
        assert!(matches!(
            Rule::new(0, alloc::vec!["a".into()], alloc::vec!["a".into()]),
            Err(RuleError::ContradictoryTerm(_))
        ));
    }

    #[test]
    fn accuracy_of_90_correct_10_incorrect_is_0_9() {
        let rule = rule(0, &["mac"], &[]).with_counts(90, 10);
        assert_eq!(rule.accuracy(), Some(0.9));
    }

    #[test]
    fn accuracy_undefined_without_coverage() {
        assert_eq!(rule(0, &["mac"], &[]).accuracy(), None);
    }

    #[test]
    fn first_rule_wins_in_ordered_mode() {
        let rules = example_rule_set();
        assert_eq!(rules.classify(&terms(&["mac", "graphics", "windows"])), Some(0));
        assert_eq!(rules.classify(&terms(&["baseball"])), Some(2));
        assert_eq!(rules.classify(&terms(&[])), None);
        assert_eq!(rules.classify(&terms(&["god"])), None);
    }

    #[test]
    fn negative_terms_block_a_match() {
        let r = rule(0, &["graphics"], &["mac"]);
        assert!(r.matches(&terms(&["graphics", "windows"])));
        assert!(!r.matches(&terms(&["graphics", "mac"])));
    }

    #[test]
    fn prepending_a_matching_rule_takes_over() {
        let base = example_rule_set();
        let doc_terms = terms(&["baseball", "score"]);
        assert_eq!(base.classify(&doc_terms), Some(2));

        let mut rules = alloc::vec![rule(1, &["score"], &[])];
        rules.extend(base.rules().iter().cloned());
        let prepended = RuleSet::new(base.category_set().clone(), rules, true).unwrap();
        assert_eq!(prepended.classify(&doc_terms), Some(1));
    }

    #[test]
    fn unordered_mode_votes_with_earliest_rule_tiebreak() {
        let rules = RuleSet::new(
            cats(&["a", "b"]),
            vec![
                rule(1, &["x"], &[]),
                rule(0, &["y"], &[]),
                rule(0, &["z"], &[]),
            ],
            false,
        )
        .unwrap();
        // two votes for category 0 beat one for category 1
        assert_eq!(rules.classify(&terms(&["x", "y", "z"])), Some(0));
        // one vote each: earliest firing rule (index 0) wins
        assert_eq!(rules.classify(&terms(&["x", "y"])), Some(1));
    }

    #[test]
    fn apply_counts_an_all_computers_database() {
        let rules = example_rule_set();
        let docs: Vec<Document> = (0..500)
            .map(|i| doc(&alloc::format!("d{i}"), &["mac"], None))
            .collect();
        assert_eq!(rules.apply_to_corpus(&docs), alloc::vec![500, 0, 0]);
    }

    #[test]
    fn apply_on_empty_corpus_is_zero() {
        let rules = example_rule_set();
        assert_eq!(rules.apply_to_corpus([]), alloc::vec![0, 0, 0]);
    }

    #[test]
    fn apply_agrees_with_per_document_classification() {
        // brute-force oracle over a small synthetic corpus
        let rules = example_rule_set();
        let pool = ["mac", "graphics", "windows", "god", "christian", "baseball", "misc"];
        let docs: Vec<Document> = (0..50u32)
            .map(|i| {
                let tokens: Vec<&str> = pool
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| (i.wrapping_mul(2654435761) >> j) & 1 == 1)
                    .map(|(_, t)| *t)
                    .collect();
                doc(&alloc::format!("d{i}"), &tokens, None)
            })
            .collect();
        let mut expected = alloc::vec![0u64; 3];
        for d in &docs {
            if let Some(c) = rules.classify(&d.token_set()) {
                expected[c] += 1;
            }
        }
        assert_eq!(rules.apply_to_corpus(&docs), expected);
    }

    #[test]
    fn evaluate_fills_recall_and_confusion() {
        let rules = example_rule_set();
        let corpus = Corpus::new(
            cats(&["Computers", "Religion", "Hobbies"]),
            vec![
                doc("d1", &["mac"], Some(0)),
                doc("d2", &["graphics", "windows"], Some(0)),
                doc("d3", &["mac"], Some(1)), // miscovered
                doc("d4", &["baseball"], Some(2)),
                doc("d5", &["nothing"], Some(2)), // unclassified
            ],
        )
        .unwrap();
        let stats = evaluate(&rules, &corpus);
        assert_eq!(stats.per_rule[0], (2, 1));
        assert_eq!(stats.training_docs, alloc::vec![2, 1, 2]);
        assert_eq!(stats.recalled_docs, alloc::vec![2, 0, 1]);
        // row sums equal training_docs, unclassified documents in the last column
        for (c, row) in stats.confusion.iter().enumerate() {
            assert_eq!(row.iter().sum::<u64>(), stats.training_docs[c]);
        }
        assert_eq!(stats.confusion[2][3], 1);
        assert_eq!(stats.recall(0), Some(1.0));
        assert_eq!(stats.recall(1), Some(0.0));
    }

    #[test]
    fn recall_of_unseen_category_is_undefined() {
        let stats = TrainingStats {
            per_rule: alloc::vec![],
            training_docs: alloc::vec![0, 150],
            recalled_docs: alloc::vec![0, 100],
            confusion: alloc::vec![alloc::vec![0, 0, 0], alloc::vec![100, 0, 50]],
        };
        assert_eq!(stats.recall(0), None);
        let recall = stats.recall(1).unwrap();
        assert!((recall - 100.0 / 150.0).abs() < 1e-12);
    }
}
