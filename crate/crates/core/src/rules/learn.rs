//! Sequential-covering rule induction with information-gain literal
//! selection and a coverage-threshold acceptance test.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::Corpus;

use super::{evaluate, Rule, RuleSet, TrainingStats};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrainError {
    EmptyTrainingCorpus,
    /// Training requires every document to carry a label.
    UnlabeledDocument(String),
    EmptyVocabulary,
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyTrainingCorpus => write!(f, "training corpus is empty"),
            TrainError::UnlabeledDocument(id) => {
                write!(f, "training document {id} has no label")
            }
            TrainError::EmptyVocabulary => write!(f, "training corpus has no active vocabulary"),
        }
    }
}

impl core::error::Error for TrainError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainOptions {
    /// Minimum training documents an accepted rule must cover. Unset scales
    /// with the corpus: max(1, round(0.5% of the training size)).
    pub min_rule_coverage: Option<usize>,
    /// Allow negated literals (NOT term) in grown rules.
    pub allow_negation: bool,
    /// Cap on literals per rule, positive and negative together.
    pub max_rule_terms: usize,
    /// Produce an ordered (first-match) rule set.
    pub ordered: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            min_rule_coverage: None,
            allow_negation: false,
            max_rule_terms: 4,
            ordered: true,
        }
    }
}

impl TrainOptions {
    pub fn resolved_min_coverage(&self, training_size: usize) -> usize {
        self.min_rule_coverage.unwrap_or_else(|| {
            let scaled = libm::round(training_size as f64 * 0.005) as usize;
            scaled.max(1)
        })
    }
}

/// A literal under consideration while growing a rule.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Literal {
    Present(String),
    Absent(String),
}

struct GrowDoc<'a> {
    terms: BTreeSet<&'a str>,
    positive: bool,
}

/// FOIL-style information gain of moving from `p`/`n` coverage to
/// `p_new`/`n_new`.
fn information_gain(p: f64, n: f64, p_new: f64, n_new: f64) -> f64 {
    if p_new <= 0.0 {
        return 0.0;
    }
    p_new * (libm::log2(p_new / (p_new + n_new)) - libm::log2(p / (p + n)))
}

/// Greedily grows one conjunctive rule over the still-covered documents,
/// adding the literal with the highest information gain until the rule is
/// pure, no literal helps, or the length cap is hit. Returns the literals and
/// the indices of the documents the rule covers.
///
/// The first literal is always a presence literal: probe queries need a
/// positive anchor. When no presence literal has positive gain but the rule
/// is still worth growing (a negated literal carries the signal, or only
/// positive documents remain), the anchor falls back to the presence literal
/// covering the most positives.
fn grow_rule(
    docs: &[GrowDoc<'_>],
    vocabulary: &BTreeSet<String>,
    allow_negation: bool,
    max_terms: usize,
) -> (Vec<Literal>, Vec<usize>) {
    let mut literals: Vec<Literal> = Vec::new();
    let mut covered: Vec<usize> = (0..docs.len()).collect();
    loop {
        let p = covered.iter().filter(|&&i| docs[i].positive).count();
        let n = covered.len() - p;
        if p == 0 || literals.len() >= max_terms {
            break;
        }
        if n == 0 && !literals.is_empty() {
            break;
        }

        // Presence counts for every vocabulary term over the covered set.
        let mut present: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for &i in &covered {
            for term in &docs[i].terms {
                if let Some(owned) = vocabulary.get(*term) {
                    let entry = present.entry(owned.as_str()).or_insert((0, 0));
                    if docs[i].positive {
                        entry.0 += 1;
                    } else {
                        entry.1 += 1;
                    }
                }
            }
        }

        let used: BTreeSet<&str> = literals
            .iter()
            .map(|l| match l {
                Literal::Present(t) | Literal::Absent(t) => t.as_str(),
            })
            .collect();

        // best positive-gain literal; ties keep the first candidate, and
        // candidates arrive in vocabulary order, presence before absence
        let mut best: Option<(f64, Literal)> = None;
        // widest-covering presence literal, the anchor of last resort
        let mut widest: Option<(usize, &str)> = None;
        for term in vocabulary {
            if used.contains(term.as_str()) {
                continue;
            }
            let (tp, tn) = present.get(term.as_str()).copied().unwrap_or((0, 0));
            if tp > 0 && widest.is_none_or(|(w, _)| tp > w) {
                widest = Some((tp, term.as_str()));
            }
            let presence_gain = information_gain(p as f64, n as f64, tp as f64, tn as f64);
            if presence_gain > 0.0 && best.as_ref().is_none_or(|(g, _)| presence_gain > *g) {
                best = Some((presence_gain, Literal::Present(term.clone())));
            }
            if allow_negation {
                let absence_gain =
                    information_gain(p as f64, n as f64, (p - tp) as f64, (n - tn) as f64);
                if absence_gain > 0.0 && best.as_ref().is_none_or(|(g, _)| absence_gain > *g) {
                    best = Some((absence_gain, Literal::Absent(term.clone())));
                }
            }
        }

        let literal = match best {
            Some((_, Literal::Absent(term))) if literals.is_empty() => {
                // the signal is a negation; anchor on coverage first
                match widest {
                    Some((_, anchor)) if anchor != term => Literal::Present(anchor.to_string()),
                    _ => break,
                }
            }
            Some((_, literal)) => literal,
            None if literals.is_empty() && n == 0 => {
                // only positives left: cover as many as one term can
                match widest {
                    Some((_, anchor)) => Literal::Present(anchor.to_string()),
                    None => break,
                }
            }
            None => break,
        };
        covered.retain(|&i| match &literal {
            Literal::Present(t) => docs[i].terms.contains(t.as_str()),
            Literal::Absent(t) => !docs[i].terms.contains(t.as_str()),
        });
        literals.push(literal);
    }
    (literals, covered)
}

/// Learns an ordered rule set by sequential covering: per category, grow a
/// rule over the not-yet-covered documents, accept it only when it covers at
/// least `min_rule_coverage` of them, remove what it covers, and repeat until
/// no acceptable rule remains. Rule statistics and per-category recall are
/// measured over the full training corpus afterwards.
pub fn train(
    corpus: &Corpus,
    options: &TrainOptions,
) -> Result<(RuleSet, TrainingStats), TrainError> {
    if corpus.is_empty() {
        return Err(TrainError::EmptyTrainingCorpus);
    }
    for doc in corpus.documents() {
        if doc.label.is_none() {
            return Err(TrainError::UnlabeledDocument(doc.id.clone()));
        }
    }
    if corpus.vocabulary().is_empty() {
        return Err(TrainError::EmptyVocabulary);
    }

    let min_coverage = options.resolved_min_coverage(corpus.len());
    let vocabulary = corpus.vocabulary();

    struct TrainDoc<'a> {
        terms: BTreeSet<&'a str>,
        label: usize,
    }
    let mut remaining: Vec<TrainDoc<'_>> = corpus
        .documents()
        .iter()
        .map(|doc| TrainDoc {
            terms: doc.token_set(),
            label: doc.label.expect("checked above"),
        })
        .collect();

    let mut rules: Vec<Rule> = Vec::new();
    for category in 0..corpus.category_set().len() {
        loop {
            if !remaining.iter().any(|d| d.label == category) {
                break;
            }
            let grow_docs: Vec<GrowDoc<'_>> = remaining
                .iter()
                .map(|d| GrowDoc {
                    terms: d.terms.clone(),
                    positive: d.label == category,
                })
                .collect();
            let (literals, covered) = grow_rule(
                &grow_docs,
                vocabulary,
                options.allow_negation,
                options.max_rule_terms,
            );
            if literals.is_empty() || covered.len() < min_coverage {
                break;
            }
            let mut positive = Vec::new();
            let mut negative = Vec::new();
            for literal in literals {
                match literal {
                    Literal::Present(t) => positive.push(t),
                    Literal::Absent(t) => negative.push(t),
                }
            }
            rules.push(
                Rule::new(category, positive, negative)
                    .expect("grown literals form a valid rule"),
            );
            let covered_set: BTreeSet<usize> = covered.into_iter().collect();
            let mut index = 0usize;
            remaining.retain(|_| {
                let keep = !covered_set.contains(&index);
                index += 1;
                keep
            });
        }
    }

    let mut rule_set = RuleSet::new(corpus.category_set().clone(), rules, options.ordered)
        .expect("categories validated against the training corpus");
    let stats = evaluate(&rule_set, corpus);
    for (rule, &(correct, incorrect)) in rule_set.rules.iter_mut().zip(&stats.per_rule) {
        rule.covered_correct = correct;
        rule.covered_incorrect = incorrect;
    }
    rule_set.category_recall = stats.recall_vector();
    Ok((rule_set, stats))
}
