//! Labeled document collections: tokenization, vocabulary pruning,
//! information-theoretic feature selection, and reproducible splits.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Errors raised while building or reshaping a corpus.
#[derive(Debug, Clone, PartialEq)]
pub enum CorpusError {
    /// A category set needs at least two categories.
    TooFewCategories(usize),
    EmptyCategoryLabel,
    DuplicateCategoryLabel(String),
    EmptyCorpus,
    DuplicateDocumentId(String),
    LabelOutOfRange {
        id: String,
        label: usize,
        categories: usize,
    },
    /// A token was empty or contained whitespace or punctuation.
    InvalidToken { id: String, token: String },
    /// `min_document_frequency` must be at least 1.
    InvalidMinDocumentFrequency,
    /// Pruning or selection would leave no active terms.
    EmptyVocabulary,
    TargetExceedsVocabulary { target: usize, available: usize },
    /// Feature selection needs at least one labeled document.
    NoLabeledDocuments,
    InvalidTrainFraction(f64),
    /// A split would leave one half without documents.
    EmptySplitHalf,
    /// A label matched no group pattern of a category mapping.
    UnknownLabel(String),
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::TooFewCategories(n) => {
                write!(f, "need at least 2 categories, got {n}")
            }
            CorpusError::EmptyCategoryLabel => write!(f, "category labels must be non-empty"),
            CorpusError::DuplicateCategoryLabel(name) => {
                write!(f, "duplicate category label: {name}")
            }
            CorpusError::EmptyCorpus => write!(f, "corpus contains no documents"),
            CorpusError::DuplicateDocumentId(id) => write!(f, "duplicate document id: {id}"),
            CorpusError::LabelOutOfRange {
                id,
                label,
                categories,
            } => write!(
                f,
                "document {id} has label index {label}, but there are only {categories} categories"
            ),
            CorpusError::InvalidToken { id, token } => {
                write!(f, "document {id} has an invalid token: {token:?}")
            }
            CorpusError::InvalidMinDocumentFrequency => {
                write!(f, "min_document_frequency must be at least 1")
            }
            CorpusError::EmptyVocabulary => write!(f, "operation would empty the vocabulary"),
            CorpusError::TargetExceedsVocabulary { target, available } => write!(
                f,
                "target vocabulary size {target} exceeds the {available} active terms"
            ),
            CorpusError::NoLabeledDocuments => {
                write!(f, "feature selection needs labeled documents")
            }
            CorpusError::InvalidTrainFraction(v) => {
                write!(f, "train fraction must be in (0, 1), got {v}")
            }
            CorpusError::EmptySplitHalf => {
                write!(f, "split would leave one half without documents")
            }
            CorpusError::UnknownLabel(label) => {
                write!(f, "label {label:?} matches no category group")
            }
        }
    }
}

impl core::error::Error for CorpusError {}

/// A fixed, ordered set of category labels. Vector indices throughout the
/// crate refer to positions in this set.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CategorySet {
    names: Vec<String>,
}

impl CategorySet {
    /// Labels must be unique and non-empty, and there must be at least two.
    pub fn new(names: Vec<String>) -> Result<Self, CorpusError> {
        if names.len() < 2 {
            return Err(CorpusError::TooFewCategories(names.len()));
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(CorpusError::EmptyCategoryLabel);
            }
            if !seen.insert(name.as_str()) {
                return Err(CorpusError::DuplicateCategoryLabel(name.clone()));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// One tokenized document. The token list is a multiset: repeated terms stay
/// repeated. `label`, when present, indexes into the owning [`CategorySet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<String>,
    pub label: Option<usize>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        tokens: Vec<String>,
        label: Option<usize>,
    ) -> Self {
        Self {
            id: id.into(),
            tokens,
            label,
        }
    }

    /// Presence view of the token multiset.
    pub fn token_set(&self) -> BTreeSet<&str> {
        self.tokens.iter().map(String::as_str).collect()
    }
}

fn valid_token(token: &str) -> bool {
    !token.is_empty()
        && !token
            .chars()
            .any(|c| c.is_whitespace() || c.is_ascii_punctuation())
}

/// A labeled document collection plus the vocabulary currently active for
/// rule learning. Pruning and selection shrink the active vocabulary; the
/// documents themselves are never rewritten.
#[derive(Debug, Clone)]
pub struct Corpus {
    category_set: CategorySet,
    documents: Vec<Document>,
    vocabulary: BTreeSet<String>,
}

impl Corpus {
    /// Validates ids, labels, and tokens; the initial vocabulary is the set
    /// of all document terms.
    pub fn new(category_set: CategorySet, documents: Vec<Document>) -> Result<Self, CorpusError> {
        if documents.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let mut ids = BTreeSet::new();
        let mut vocabulary = BTreeSet::new();
        for doc in &documents {
            if !ids.insert(doc.id.as_str()) {
                return Err(CorpusError::DuplicateDocumentId(doc.id.clone()));
            }
            if let Some(label) = doc.label {
                if label >= category_set.len() {
                    return Err(CorpusError::LabelOutOfRange {
                        id: doc.id.clone(),
                        label,
                        categories: category_set.len(),
                    });
                }
            }
            for token in &doc.tokens {
                if !valid_token(token) {
                    return Err(CorpusError::InvalidToken {
                        id: doc.id.clone(),
                        token: token.clone(),
                    });
                }
            }
        }
        // drop ids borrow before moving documents
        drop(ids);
        for doc in &documents {
            for token in &doc.tokens {
                vocabulary.insert(token.clone());
            }
        }
        Ok(Self {
            category_set,
            documents,
            vocabulary,
        })
    }

    pub fn category_set(&self) -> &CategorySet {
        &self.category_set
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Documents per category, counting labeled documents only.
    pub fn label_histogram(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0usize; self.category_set.len()];
        for doc in &self.documents {
            if let Some(label) = doc.label {
                counts[label] += 1;
            }
        }
        counts
    }

    /// Document frequency of every active vocabulary term.
    pub fn document_frequencies(&self) -> BTreeMap<String, usize> {
        let mut df: BTreeMap<String, usize> = self
            .vocabulary
            .iter()
            .map(|t| (t.clone(), 0usize))
            .collect();
        for doc in &self.documents {
            for term in doc.token_set() {
                if let Some(count) = df.get_mut(term) {
                    *count += 1;
                }
            }
        }
        df
    }

    /// Drops terms appearing in fewer than `min_document_frequency`
    /// documents, then the `top_frequent_to_drop` terms with the highest
    /// document frequency. Frequency ties are broken lexicographically, the
    /// lexicographically smaller term going first.
    pub fn prune_vocabulary(
        &mut self,
        min_document_frequency: usize,
        top_frequent_to_drop: usize,
    ) -> Result<(), CorpusError> {
        if min_document_frequency < 1 {
            return Err(CorpusError::InvalidMinDocumentFrequency);
        }
        let df = self.document_frequencies();
        let mut kept: Vec<(String, usize)> = df
            .into_iter()
            .filter(|(_, n)| *n >= min_document_frequency)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if kept.len() <= top_frequent_to_drop {
            return Err(CorpusError::EmptyVocabulary);
        }
        self.vocabulary = kept
            .into_iter()
            .skip(top_frequent_to_drop)
            .map(|(term, _)| term)
            .collect();
        Ok(())
    }

    /// Keeps the `target_vocabulary_size` terms whose appearance shifts the
    /// class-label distribution the most. The score of a term is the
    /// Kullback–Leibler divergence between P(class | term appears) and
    /// P(class), weighted by P(term appears); both distributions are add-one
    /// smoothed. Score ties break lexicographically. Returns the kept terms,
    /// best first.
    pub fn select_features(
        &mut self,
        target_vocabulary_size: usize,
    ) -> Result<Vec<(String, f64)>, CorpusError> {
        if target_vocabulary_size > self.vocabulary.len() {
            return Err(CorpusError::TargetExceedsVocabulary {
                target: target_vocabulary_size,
                available: self.vocabulary.len(),
            });
        }
        if target_vocabulary_size == 0 {
            return Err(CorpusError::EmptyVocabulary);
        }
        let k = self.category_set.len();
        let mut class_counts = alloc::vec![0usize; k];
        let mut term_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for doc in &self.documents {
            let Some(label) = doc.label else { continue };
            class_counts[label] += 1;
            for term in doc.token_set() {
                if self.vocabulary.contains(term) {
                    term_class
                        .entry(term)
                        .or_insert_with(|| alloc::vec![0usize; k])[label] += 1;
                }
            }
        }
        let n: usize = class_counts.iter().sum();
        if n == 0 {
            return Err(CorpusError::NoLabeledDocuments);
        }
        let prior: Vec<f64> = class_counts
            .iter()
            .map(|&c| (c as f64 + 1.0) / (n as f64 + k as f64))
            .collect();

        let zeros = alloc::vec![0usize; k];
        let mut scored: Vec<(String, f64)> = self
            .vocabulary
            .iter()
            .map(|term| {
                let counts = term_class.get(term.as_str()).unwrap_or(&zeros);
                let df: usize = counts.iter().sum();
                let p_term = df as f64 / n as f64;
                let mut kl = 0.0;
                for (count, prior_c) in counts.iter().zip(&prior) {
                    let posterior = (*count as f64 + 1.0) / (df as f64 + k as f64);
                    kl += posterior * libm::log2(posterior / prior_c);
                }
                (term.clone(), p_term * kl)
            })
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(&b.0))
        });
        scored.truncate(target_vocabulary_size);
        self.vocabulary = scored.iter().map(|(t, _)| t.clone()).collect();
        Ok(scored)
    }

    /// Disjoint train/test partition, reproducible for a fixed seed. Both
    /// halves share this corpus's category set and active vocabulary.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Result<(Corpus, Corpus), CorpusError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(CorpusError::InvalidTrainFraction(train_fraction));
        }
        let n = self.documents.len();
        let n_train = libm::round(n as f64 * train_fraction) as usize;
        if n_train == 0 || n_train >= n {
            return Err(CorpusError::EmptySplitHalf);
        }
        let mut indices: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        indices.shuffle(&mut rng);
        let mut train_idx: Vec<usize> = indices[..n_train].to_vec();
        let mut test_idx: Vec<usize> = indices[n_train..].to_vec();
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        let pick = |idx: &[usize]| Corpus {
            category_set: self.category_set.clone(),
            documents: idx.iter().map(|&i| self.documents[i].clone()).collect(),
            vocabulary: self.vocabulary.clone(),
        };
        Ok((pick(&train_idx), pick(&test_idx)))
    }
}

/// Maps raw source labels (directory names, record labels) onto category
/// groups. Patterns are exact labels or `prefix*` globs; the first matching
/// group wins. Groups are ordered by name so category indices are stable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryMapping {
    groups: Vec<(String, Vec<String>)>,
}

impl CategoryMapping {
    pub fn new(mut groups: Vec<(String, Vec<String>)>) -> Result<Self, CorpusError> {
        groups.sort_by(|a, b| a.0.cmp(&b.0));
        CategorySet::new(groups.iter().map(|(name, _)| name.clone()).collect())?;
        Ok(Self { groups })
    }

    pub fn category_set(&self) -> CategorySet {
        CategorySet::new(self.groups.iter().map(|(name, _)| name.clone()).collect())
            .expect("validated at construction")
    }

    /// Group index for a raw label, or an error when nothing matches.
    pub fn group_of(&self, label: &str) -> Result<usize, CorpusError> {
        for (index, (_, patterns)) in self.groups.iter().enumerate() {
            for pattern in patterns {
                let matched = match pattern.strip_suffix('*') {
                    Some(prefix) => label.starts_with(prefix),
                    None => label == pattern,
                };
                if matched {
                    return Ok(index);
                }
            }
        }
        Err(CorpusError::UnknownLabel(label.to_string()))
    }
}

/// Which removals [`preprocess`] applies before whitespace tokenization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PreprocessOptions {
    /// Drop a leading header block (lines up to the first blank line when the
    /// text starts with a `Name:` line), keeping only the Subject: content.
    pub strip_headers: bool,
    /// Drop whitespace-delimited words containing `@`.
    pub strip_addresses: bool,
    /// Remove ASCII punctuation characters from each token.
    pub strip_punctuation: bool,
    pub lowercase: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self {
            strip_headers: true,
            strip_addresses: true,
            strip_punctuation: true,
            lowercase: true,
        }
    }
}

fn looks_like_header_line(line: &str) -> bool {
    match line.split_once(':') {
        Some((name, _)) => {
            !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-')
        }
        None => false,
    }
}

/// Splits off a leading header block, keeping Subject: content ahead of the
/// body. Texts that do not start with a header-shaped line pass through, so
/// already-preprocessed text is left alone.
fn strip_header_block(text: &str) -> String {
    let first_line = text.lines().next().unwrap_or("");
    if !looks_like_header_line(first_line) {
        return text.to_string();
    }
    let mut kept: Vec<&str> = Vec::new();
    let mut in_headers = true;
    for line in text.lines() {
        if in_headers {
            if line.trim().is_empty() {
                in_headers = false;
                continue;
            }
            if let Some((name, rest)) = line.split_once(':') {
                if name.eq_ignore_ascii_case("subject") {
                    kept.push(rest.trim());
                }
            }
        } else {
            kept.push(line);
        }
    }
    kept.join("\n")
}

/// Tokenizes raw text: optional header stripping, then whitespace splitting
/// with optional address removal, punctuation removal, and lowercasing.
/// Deterministic for a fixed input and options; empty input yields an empty
/// list.
pub fn preprocess(text: &str, options: &PreprocessOptions) -> Vec<String> {
    let body;
    let source = if options.strip_headers {
        body = strip_header_block(text);
        body.as_str()
    } else {
        text
    };
    source
        .split_whitespace()
        .filter(|word| !(options.strip_addresses && word.contains('@')))
        .filter_map(|word| {
            let mut token = String::with_capacity(word.len());
            for c in word.chars() {
                if options.strip_punctuation && c.is_ascii_punctuation() {
                    continue;
                }
                if options.lowercase {
                    token.extend(c.to_lowercase());
                } else {
                    token.push(c);
                }
            }
            if token.is_empty() {
                None
            } else {
                Some(token)
            }
        })
        .collect()
}
