//! Phase-1 categorization: eleven clickbait-category detectors and the
//! initial clickbait / non-clickbait label derived from them.
//!
//! Every detector is a predicate over the headline (and, for the last two,
//! the landing-page body or URL). The trigger lexicons and thresholds come
//! from a TOML rules file; `data/rules.toml` is the shipped default.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, HeadlineRecord, Label};
use crate::error::{Error, Result};
use crate::textkit::{pos_tag, tokenize, Lexicon, PosClass, Token, TokenKind};

const DEFAULT_RULES: &str = include_str!("../data/rules.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryId {
    Ambiguous,
    Exaggeration,
    Inflammatory,
    BaitAndSwitch,
    Teasing,
    Formatting,
    Wrong,
    Graphic,
    Incomplete,
    HeadlineCloning,
    UrlRedirection,
}

impl CategoryId {
    pub const COUNT: usize = 11;

    pub const ALL: [CategoryId; CategoryId::COUNT] = [
        CategoryId::Ambiguous,
        CategoryId::Exaggeration,
        CategoryId::Inflammatory,
        CategoryId::BaitAndSwitch,
        CategoryId::Teasing,
        CategoryId::Formatting,
        CategoryId::Wrong,
        CategoryId::Graphic,
        CategoryId::Incomplete,
        CategoryId::HeadlineCloning,
        CategoryId::UrlRedirection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CategoryId::Ambiguous => "Ambiguous",
            CategoryId::Exaggeration => "Exaggeration",
            CategoryId::Inflammatory => "Inflammatory",
            CategoryId::BaitAndSwitch => "Bait-and-switch",
            CategoryId::Teasing => "Teasing",
            CategoryId::Formatting => "Formatting",
            CategoryId::Wrong => "Wrong",
            CategoryId::Graphic => "Graphic",
            CategoryId::Incomplete => "Incomplete",
            CategoryId::HeadlineCloning => "Headline Cloning",
            CategoryId::UrlRedirection => "URL Redirection",
        }
    }

    /// Published flagged count and precision (%) for this category on the
    /// original corpus, for side-by-side reporting.
    pub fn published(self) -> (usize, f64) {
        match self {
            CategoryId::Ambiguous => (645, 47.81),
            CategoryId::Exaggeration => (4954, 45.86),
            CategoryId::Inflammatory => (1023, 52.34),
            CategoryId::BaitAndSwitch => (536, 65.82),
            CategoryId::Teasing => (5278, 59.81),
            CategoryId::Formatting => (789, 49.63),
            CategoryId::Wrong => (152, 41.23),
            CategoryId::Graphic => (365, 40.78),
            CategoryId::Incomplete => (678, 48.64),
            CategoryId::HeadlineCloning => (831, 51.56),
            CategoryId::UrlRedirection => (1345, 53.96),
        }
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------------------
// Rules file
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMeasure {
    Containment,
    Jaccard,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub cloning_min_overlap: f64,
    pub cloning_measure: OverlapMeasure,
    pub caps_min_letters: usize,
    pub exclaim_question_run: usize,
    pub repeated_punctuation_run: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Lexicons {
    stopwords: Vec<String>,
    conjunctions: Vec<String>,
    acronyms: Vec<String>,
    number_words: Vec<String>,
    url_shorteners: Vec<String>,
    suspicious_tlds: Vec<String>,
    generic_url_words: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhraseRule {
    phrases: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmbiguousRule {
    referents: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExaggerationRule {
    phrases: Vec<String>,
    superlatives: Vec<String>,
    superlative_exceptions: Vec<String>,
    intensifiers: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WrongRule {
    phrases: Vec<String>,
    claim_verbs: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RulesFile {
    thresholds: Thresholds,
    lexicons: Lexicons,
    ambiguous: AmbiguousRule,
    exaggeration: ExaggerationRule,
    inflammatory: PhraseRule,
    bait_and_switch: PhraseRule,
    teasing: PhraseRule,
    wrong: WrongRule,
    graphic: PhraseRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum PatternToken {
    Word(String),
    AnyWord,
    Number,
}

/// A contiguous phrase pattern over word/number tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern(Vec<PatternToken>);

impl Pattern {
    pub fn parse(source: &str) -> Result<Pattern> {
        let tokens: Vec<PatternToken> = source
            .split_whitespace()
            .map(|t| match t {
                "*" => PatternToken::AnyWord,
                "#" => PatternToken::Number,
                w => PatternToken::Word(w.replace('’', "'").to_lowercase()),
            })
            .collect();
        if tokens.is_empty() {
            return Err(Error::Rules(format!("empty pattern `{source}`")));
        }
        Ok(Pattern(tokens))
    }

    fn matches_at(&self, seq: &[SeqToken<'_>], start: usize, number_words: &HashSet<String>) -> bool {
        self.0.iter().enumerate().all(|(k, pt)| {
            seq.get(start + k).is_some_and(|tok| match pt {
                PatternToken::Word(w) => tok.text == w,
                PatternToken::AnyWord => tok.kind == TokenKind::Word,
                PatternToken::Number => {
                    tok.kind == TokenKind::Number || number_words.contains(tok.text)
                }
            })
        })
    }

    fn find(&self, seq: &[SeqToken<'_>], number_words: &HashSet<String>) -> bool {
        (0..seq.len()).any(|i| self.matches_at(seq, i, number_words))
    }
}

fn compile(phrases: &[String]) -> Result<Vec<Pattern>> {
    phrases.iter().map(|p| Pattern::parse(p)).collect()
}

fn word_set(words: &[String]) -> HashSet<String> {
    words.iter().map(|w| w.to_lowercase()).collect()
}

/// Compiled detector configuration.
#[derive(Debug, Clone)]
pub struct RuleSet {
    pub thresholds: Thresholds,
    stopwords: HashSet<String>,
    conjunctions: HashSet<String>,
    acronyms: HashSet<String>,
    number_words: HashSet<String>,
    url_shorteners: HashSet<String>,
    suspicious_tlds: HashSet<String>,
    generic_url_words: HashSet<String>,
    referents: HashSet<String>,
    exaggeration: Vec<Pattern>,
    superlatives: HashSet<String>,
    superlative_exceptions: HashSet<String>,
    intensifiers: HashSet<String>,
    inflammatory: Vec<Pattern>,
    bait_and_switch: Vec<Pattern>,
    teasing: Vec<Pattern>,
    wrong: Vec<Pattern>,
    claim_verbs: HashSet<String>,
    graphic: Vec<Pattern>,
}

impl RuleSet {
    pub fn from_toml(source: &str) -> Result<RuleSet> {
        let file: RulesFile = toml::from_str(source).map_err(|e| Error::Rules(e.to_string()))?;
        let t = &file.thresholds;
        if !(0.0..=1.0).contains(&t.cloning_min_overlap) {
            return Err(Error::Rules(format!(
                "cloning_min_overlap must lie in [0, 1], got {}",
                t.cloning_min_overlap
            )));
        }
        if t.exclaim_question_run < 1 || t.repeated_punctuation_run < 1 {
            return Err(Error::Rules("punctuation run thresholds must be ≥ 1".into()));
        }
        Ok(RuleSet {
            thresholds: file.thresholds.clone(),
            stopwords: word_set(&file.lexicons.stopwords),
            conjunctions: word_set(&file.lexicons.conjunctions),
            acronyms: word_set(&file.lexicons.acronyms),
            number_words: word_set(&file.lexicons.number_words),
            url_shorteners: word_set(&file.lexicons.url_shorteners),
            suspicious_tlds: word_set(&file.lexicons.suspicious_tlds),
            generic_url_words: word_set(&file.lexicons.generic_url_words),
            referents: word_set(&file.ambiguous.referents),
            exaggeration: compile(&file.exaggeration.phrases)?,
            superlatives: word_set(&file.exaggeration.superlatives),
            superlative_exceptions: word_set(&file.exaggeration.superlative_exceptions),
            intensifiers: word_set(&file.exaggeration.intensifiers),
            inflammatory: compile(&file.inflammatory.phrases)?,
            bait_and_switch: compile(&file.bait_and_switch.phrases)?,
            teasing: compile(&file.teasing.phrases)?,
            wrong: compile(&file.wrong.phrases)?,
            claim_verbs: word_set(&file.wrong.claim_verbs),
            graphic: compile(&file.graphic.phrases)?,
        })
    }

    pub fn from_path(path: &Path) -> Result<RuleSet> {
        let source = std::fs::read_to_string(path).map_err(|source| Error::Ingest {
            path: path.to_path_buf(),
            source,
        })?;
        RuleSet::from_toml(&source)
    }

    /// The shipped default rules.
    pub fn default_rules() -> RuleSet {
        RuleSet::from_toml(DEFAULT_RULES).expect("bundled rules file is valid")
    }

    pub fn default_source() -> &'static str {
        DEFAULT_RULES
    }

    fn any_phrase(&self, patterns: &[Pattern], seq: &[SeqToken<'_>]) -> bool {
        patterns.iter().any(|p| p.find(seq, &self.number_words))
    }

    /// Lowercased content words: not stopwords, possessive `'s` removed.
    pub fn content_words(&self, text: &str) -> HashSet<String> {
        tokenize(text)
            .into_iter()
            .filter(Token::is_word)
            .map(|t| {
                t.normalized
                    .strip_suffix("'s")
                    .map(str::to_string)
                    .unwrap_or(t.normalized)
            })
            .filter(|w| w.chars().count() >= 2 && !self.stopwords.contains(w))
            .collect()
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet::default_rules()
    }
}

// ---------------------------------------------------------------------------
// Detection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct SeqToken<'a> {
    text: &'a str,
    kind: TokenKind,
    pos: Option<PosClass>,
}

/// Per-category flags for one headline plus the derived phase-1 label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryVerdict {
    pub flags: [bool; CategoryId::COUNT],
    pub label: Label,
    /// Headline cloning was not evaluated because the record has no body.
    pub cloning_skipped: bool,
    /// URL redirection was not evaluated because the record has no URL.
    pub redirection_skipped: bool,
}

impl CategoryVerdict {
    pub fn flag(&self, category: CategoryId) -> bool {
        self.flags[category as usize]
    }

    pub fn flagged(&self) -> impl Iterator<Item = CategoryId> + '_ {
        CategoryId::ALL.into_iter().filter(|&c| self.flag(c))
    }
}

struct Analysis<'a> {
    tokens: &'a [Token],
    seq: Vec<SeqToken<'a>>,
}

impl<'a> Analysis<'a> {
    fn new(tokens: &'a [Token], lexicon: &Lexicon) -> Analysis<'a> {
        let tags = pos_tag(tokens, lexicon);
        let seq = tokens
            .iter()
            .zip(tags)
            .filter(|(t, _)| matches!(t.kind, TokenKind::Word | TokenKind::Number))
            .map(|(t, pos)| SeqToken {
                text: &t.normalized,
                kind: t.kind,
                pos,
            })
            .collect();
        Analysis { tokens, seq }
    }

    fn words(&self) -> impl Iterator<Item = &SeqToken<'a>> {
        self.seq.iter().filter(|t| t.kind == TokenKind::Word)
    }
}

fn ambiguous(rules: &RuleSet, a: &Analysis<'_>) -> bool {
    let mut words = a.words().peekable();
    if words.peek().is_some_and(|w| rules.referents.contains(w.text)) {
        return true;
    }
    for w in a.words() {
        if w.pos == Some(PosClass::Noun) {
            return false;
        }
        if rules.referents.contains(w.text) {
            return true;
        }
    }
    false
}

fn exaggeration(rules: &RuleSet, a: &Analysis<'_>) -> bool {
    if rules.any_phrase(&rules.exaggeration, &a.seq) {
        return true;
    }
    let superlative = a.words().any(|w| {
        rules.superlatives.contains(w.text)
            || (w.text.ends_with("est")
                && w.text.chars().count() >= 5
                && !rules.superlative_exceptions.contains(w.text))
    });
    superlative && a.words().any(|w| rules.intensifiers.contains(w.text))
}

fn formatting(rules: &RuleSet, text: &str, a: &Analysis<'_>) -> bool {
    let t = &rules.thresholds;
    let shouting = a.tokens.iter().any(|tok| {
        let letters: Vec<char> = tok.surface.chars().filter(|c| c.is_alphabetic()).collect();
        tok.kind == TokenKind::Word
            && letters.len() >= t.caps_min_letters
            && letters.iter().all(|c| c.is_uppercase())
            && !rules.acronyms.contains(&tok.normalized)
    });
    if shouting {
        return true;
    }
    let mut eq_run = 0;
    let mut same_run = 0;
    let mut previous: Option<char> = None;
    for c in text.chars() {
        eq_run = if matches!(c, '!' | '?') { eq_run + 1 } else { 0 };
        let is_punct = !c.is_alphanumeric() && !c.is_whitespace();
        same_run = if is_punct && previous == Some(c) {
            same_run + 1
        } else if is_punct {
            1
        } else {
            0
        };
        if eq_run >= t.exclaim_question_run || same_run >= t.repeated_punctuation_run {
            return true;
        }
        previous = Some(c);
    }
    false
}

fn wrong(rules: &RuleSet, a: &Analysis<'_>) -> bool {
    rules.any_phrase(&rules.wrong, &a.seq) && a.words().any(|w| rules.claim_verbs.contains(w.text))
}

fn incomplete(rules: &RuleSet, a: &Analysis<'_>) -> bool {
    const CLOSERS: [&str; 6] = ["\"", "'", "”", "’", ")", "]"];
    let Some(last) = a
        .tokens
        .iter()
        .rev()
        .find(|t| !CLOSERS.contains(&t.surface.as_str()))
    else {
        return false;
    };
    match last.kind {
        TokenKind::Punctuation => {
            let s = last.surface.as_str();
            s.starts_with("..") || s.contains('…') || s.chars().all(|c| matches!(c, '-' | '–' | '—'))
        }
        TokenKind::Word => {
            let pos = a.seq.last().and_then(|t| t.pos);
            matches!(pos, Some(PosClass::Preposition | PosClass::Article))
                || rules.conjunctions.contains(&last.normalized)
        }
        _ => false,
    }
}

/// Keyword overlap between headline and body under the configured measure;
/// `None` when the record has no body or the headline has no content words.
pub fn cloning_overlap(record: &HeadlineRecord, rules: &RuleSet) -> Option<f64> {
    let body = record.body.as_deref()?;
    let headline = rules.content_words(&record.text);
    if headline.is_empty() {
        return None;
    }
    let body = rules.content_words(body);
    let shared = headline.intersection(&body).count() as f64;
    Some(match rules.thresholds.cloning_measure {
        OverlapMeasure::Containment => shared / headline.len() as f64,
        OverlapMeasure::Jaccard => shared / headline.union(&body).count() as f64,
    })
}

/// Headline promises content the landing body does not carry. False when
/// the record has no body.
pub fn detect_headline_cloning(record: &HeadlineRecord, rules: &RuleSet) -> bool {
    cloning_overlap(record, rules).is_some_and(|o| o < rules.thresholds.cloning_min_overlap)
}

fn url_words(s: &str) -> impl Iterator<Item = String> + '_ {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

/// Landing URL looks like a redirect or does not belong to the headline.
/// False when the record has no URL.
pub fn detect_url_redirection(record: &HeadlineRecord, rules: &RuleSet) -> bool {
    let Some(raw) = record.url.as_deref() else {
        return false;
    };
    let with_scheme = if raw.contains("://") {
        raw.to_string()
    } else {
        format!("http://{raw}")
    };
    let Ok(parsed) = url::Url::parse(&with_scheme) else {
        return true;
    };
    let Some(host) = parsed.host_str().map(str::to_lowercase) else {
        return true;
    };
    let bare_host = host.strip_prefix("www.").unwrap_or(&host);
    let tld = bare_host.rsplit('.').next().unwrap_or("");
    if rules.url_shorteners.contains(bare_host) || rules.suspicious_tlds.contains(tld) {
        return true;
    }
    let keep = |w: &String| {
        w.chars().count() >= 3
            && !w.chars().all(|c| c.is_ascii_digit())
            && !rules.generic_url_words.contains(w)
            && !rules.stopwords.contains(w)
    };
    let path_words: HashSet<String> = url_words(parsed.path()).filter(keep).collect();
    if path_words.is_empty() {
        return false;
    }
    let headline = rules.content_words(&record.text);
    let host_words: HashSet<String> = url_words(bare_host).filter(keep).collect();
    !path_words
        .iter()
        .chain(host_words.iter())
        .any(|w| headline.contains(w))
}

/// Evaluate all eleven detectors on `record`.
pub fn detect(record: &HeadlineRecord, rules: &RuleSet, lexicon: &Lexicon) -> CategoryVerdict {
    let tokens = tokenize(&record.text);
    let a = Analysis::new(&tokens, lexicon);
    let mut flags = [false; CategoryId::COUNT];
    for category in CategoryId::ALL {
        flags[category as usize] = match category {
            CategoryId::Ambiguous => ambiguous(rules, &a),
            CategoryId::Exaggeration => exaggeration(rules, &a),
            CategoryId::Inflammatory => rules.any_phrase(&rules.inflammatory, &a.seq),
            CategoryId::BaitAndSwitch => rules.any_phrase(&rules.bait_and_switch, &a.seq),
            CategoryId::Teasing => rules.any_phrase(&rules.teasing, &a.seq),
            CategoryId::Formatting => formatting(rules, &record.text, &a),
            CategoryId::Wrong => wrong(rules, &a),
            CategoryId::Graphic => rules.any_phrase(&rules.graphic, &a.seq),
            CategoryId::Incomplete => incomplete(rules, &a),
            CategoryId::HeadlineCloning => detect_headline_cloning(record, rules),
            CategoryId::UrlRedirection => detect_url_redirection(record, rules),
        };
    }
    let label = if flags.iter().any(|&f| f) {
        Label::Clickbait
    } else {
        Label::NonClickbait
    };
    CategoryVerdict {
        flags,
        label,
        cloning_skipped: record.body.is_none(),
        redirection_skipped: record.url.is_none(),
    }
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub category: CategoryId,
    pub flagged_count: usize,
    pub gold_clickbait: usize,
    /// Fraction of flagged records whose gold label is clickbait; `None` when
    /// nothing was flagged.
    pub precision: Option<f64>,
    pub published_count: usize,
    pub published_precision_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub rows: Vec<CategoryRow>,
    pub records: usize,
    pub labeled_clickbait: usize,
    pub cloning_skipped: usize,
    pub redirection_skipped: usize,
}

/// Flagged counts and gold-label precision per category, folded in record
/// order.
pub fn category_stats(corpus: &Corpus, verdicts: &[CategoryVerdict]) -> Result<CategoryStats> {
    if corpus.len() != verdicts.len() {
        return Err(Error::LengthMismatch(corpus.len(), verdicts.len()));
    }
    let rows = CategoryId::ALL
        .into_iter()
        .map(|category| {
            let (flagged, gold) = corpus
                .records()
                .iter()
                .zip(verdicts)
                .filter(|(_, v)| v.flag(category))
                .fold((0, 0), |(f, g), (r, _)| {
                    (f + 1, g + usize::from(r.gold_label.is_clickbait()))
                });
            let (published_count, published_precision_pct) = category.published();
            CategoryRow {
                category,
                flagged_count: flagged,
                gold_clickbait: gold,
                precision: (flagged > 0).then(|| gold as f64 / flagged as f64),
                published_count,
                published_precision_pct,
            }
        })
        .collect();
    Ok(CategoryStats {
        rows,
        records: verdicts.len(),
        labeled_clickbait: verdicts.iter().filter(|v| v.label.is_clickbait()).count(),
        cloning_skipped: verdicts.iter().filter(|v| v.cloning_skipped).count(),
        redirection_skipped: verdicts.iter().filter(|v| v.redirection_skipped).count(),
    })
}

impl CategoryStats {
    pub fn row(&self, category: CategoryId) -> &CategoryRow {
        &self.rows[category as usize]
    }

    /// Plain-text table with the published figures alongside.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<3} {:<18} {:>8} {:>10} {:>10} {:>10}\n",
            "#", "Category", "Flagged", "Precision", "Published", "Pub.prec"
        );
        for (i, row) in self.rows.iter().enumerate() {
            let precision = row
                .precision
                .map_or_else(|| "n/a".to_string(), |p| format!("{:.2}%", 100.0 * p));
            out.push_str(&format!(
                "{:<3} {:<18} {:>8} {:>10} {:>10} {:>9.2}%\n",
                i + 1,
                row.category.name(),
                row.flagged_count,
                precision,
                row.published_count,
                row.published_precision_pct
            ));
        }
        out
    }
}
