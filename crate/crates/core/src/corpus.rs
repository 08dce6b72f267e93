//! Headline records, corpus ingestion, stratified splitting and the
//! per-record label history kept across the three categorization phases.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Clickbait,
    NonClickbait,
}

impl Label {
    pub fn is_clickbait(self) -> bool {
        self == Label::Clickbait
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Clickbait => "clickbait",
            Label::NonClickbait => "non_clickbait",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "clickbait" => Some(Label::Clickbait),
            "non_clickbait" => Some(Label::NonClickbait),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Reported as the next step once every phase has run.
pub const ALL_PHASES_RECORDED: &str = "none (all phases recorded)";

/// Pipeline phases in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Rules,
    Formality,
    Cluster,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Rules, Phase::Formality, Phase::Cluster];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Rules => "rules",
            Phase::Formality => "formality",
            Phase::Cluster => "cluster",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn parse(s: &str) -> Option<Phase> {
        Phase::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadlineRecord {
    pub id: u32,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    pub gold_label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub phase: Phase,
    pub label: Label,
    /// True iff `label` differs from the previous phase's label. Always false
    /// for the rules phase.
    pub changed: bool,
}

/// Counts produced whenever a phase is appended to a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub phase: Phase,
    pub clickbait: usize,
    pub non_clickbait: usize,
    pub changed: usize,
    pub changed_fraction: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Corpus {
    records: Vec<HeadlineRecord>,
    /// `history[p][i]` is record `i`'s label in phase `p`.
    history: Vec<Vec<PhaseLabel>>,
    #[serde(default)]
    skipped_lines: usize,
}

/// A headline is usable when, after trimming, it contains at least one
/// alphabetic character.
fn usable_headline(text: &str) -> Option<&str> {
    let trimmed = text.trim();
    trimmed.chars().any(char::is_alphabetic).then_some(trimmed)
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Ingest {
        path: path.to_path_buf(),
        source,
    })
}

fn non_empty(value: Option<String>) -> Option<String> {
    value.filter(|v| !v.trim().is_empty())
}

#[derive(Deserialize)]
struct JsonHeadline {
    text: String,
    label: String,
    #[serde(default)]
    body: Option<String>,
    #[serde(default)]
    url: Option<String>,
}

#[derive(Serialize)]
struct JsonHeadlineOut<'a> {
    text: &'a str,
    label: Label,
    #[serde(skip_serializing_if = "Option::is_none")]
    body: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    url: Option<&'a str>,
}

/// Load the two-file plain-text format: one headline per line, one file per
/// class. Ids are assigned sequentially, clickbait file first.
pub fn load_corpus(clickbait_path: &Path, nonclickbait_path: &Path) -> Result<Corpus> {
    let mut corpus = Corpus::default();
    for (path, label) in [
        (clickbait_path, Label::Clickbait),
        (nonclickbait_path, Label::NonClickbait),
    ] {
        let content = read_to_string(path)?;
        let before = corpus.records.len();
        for line in content.lines() {
            match usable_headline(line) {
                Some(text) => corpus.push_record(text.to_string(), None, None, label),
                None => {
                    if !line.trim().is_empty() {
                        corpus.skipped_lines += 1;
                    }
                }
            }
        }
        if corpus.records.len() == before {
            return Err(Error::EmptySource {
                path: path.to_path_buf(),
            });
        }
    }
    if corpus.skipped_lines > 0 {
        log::warn!(
            "skipped {} line(s) without alphabetic characters",
            corpus.skipped_lines
        );
    }
    Ok(corpus)
}

/// Load the JSON-lines format carrying optional `body` and `url` fields.
pub fn load_corpus_jsonl(path: &Path) -> Result<Corpus> {
    let content = read_to_string(path)?;
    let mut corpus = Corpus::default();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::MalformedLine {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let parsed: JsonHeadline =
            serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let label = Label::parse(&parsed.label)
            .ok_or_else(|| malformed(format!("unknown label `{}`", parsed.label)))?;
        match usable_headline(&parsed.text) {
            Some(text) => corpus.push_record(
                text.to_string(),
                non_empty(parsed.body),
                non_empty(parsed.url),
                label,
            ),
            None => corpus.skipped_lines += 1,
        }
    }
    if corpus.records.is_empty() {
        return Err(Error::EmptySource {
            path: path.to_path_buf(),
        });
    }
    if corpus.skipped_lines > 0 {
        log::warn!(
            "skipped {} record(s) without alphabetic characters",
            corpus.skipped_lines
        );
    }
    Ok(corpus)
}

impl Corpus {
    /// Build a corpus directly from records; ids must be unique and texts
    /// usable.
    pub fn from_records(records: Vec<HeadlineRecord>) -> Result<Corpus> {
        let mut seen = std::collections::HashSet::new();
        for r in &records {
            if !seen.insert(r.id) {
                return Err(Error::Parameter(format!("duplicate record id {}", r.id)));
            }
            if usable_headline(&r.text).is_none() {
                return Err(Error::Parameter(format!(
                    "record {} has no alphabetic characters",
                    r.id
                )));
            }
        }
        Ok(Corpus {
            records,
            history: Vec::new(),
            skipped_lines: 0,
        })
    }

    fn push_record(
        &mut self,
        text: String,
        body: Option<String>,
        url: Option<String>,
        gold_label: Label,
    ) {
        let id = self.records.len() as u32;
        self.records.push(HeadlineRecord {
            id,
            text,
            body,
            url,
            gold_label,
        });
    }

    pub fn records(&self) -> &[HeadlineRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn skipped_lines(&self) -> usize {
        self.skipped_lines
    }

    pub fn gold_labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.gold_label).collect()
    }

    pub fn count_label(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.gold_label == label).count()
    }

    /// The most recent phase recorded, if any.
    pub fn latest_phase(&self) -> Option<Phase> {
        self.history.len().checked_sub(1).map(|i| Phase::ALL[i])
    }

    pub fn phase_history(&self, phase: Phase) -> Option<&[PhaseLabel]> {
        self.history.get(phase.index()).map(Vec::as_slice)
    }

    pub fn phase_labels(&self, phase: Phase) -> Option<Vec<Label>> {
        self.phase_history(phase)
            .map(|h| h.iter().map(|p| p.label).collect())
    }

    /// Append the labels for `phase`. Phases must arrive in order
    /// rules → formality → cluster, each exactly once.
    pub fn push_phase(&mut self, phase: Phase, labels: &[Label]) -> Result<PhaseSummary> {
        let expected = Phase::ALL.get(self.history.len()).copied();
        if expected != Some(phase) {
            return Err(Error::PhaseOrder {
                requested: phase.as_str(),
                next: expected.map_or(ALL_PHASES_RECORDED, Phase::as_str),
            });
        }
        if labels.len() != self.records.len() {
            return Err(Error::LengthMismatch(self.records.len(), labels.len()));
        }
        let previous = self.history.last();
        let row: Vec<PhaseLabel> = labels
            .iter()
            .enumerate()
            .map(|(i, &label)| PhaseLabel {
                phase,
                label,
                changed: previous.is_some_and(|prev| prev[i].label != label),
            })
            .collect();
        let changed = row.iter().filter(|p| p.changed).count();
        let clickbait = row.iter().filter(|p| p.label.is_clickbait()).count();
        self.history.push(row);
        Ok(PhaseSummary {
            phase,
            clickbait,
            non_clickbait: labels.len() - clickbait,
            changed,
            changed_fraction: changed as f64 / labels.len().max(1) as f64,
        })
    }

    /// Sub-corpus of the given record positions, keeping their phase history.
    pub fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            history: self
                .history
                .iter()
                .map(|row| indices.iter().map(|&i| row[i]).collect())
                .collect(),
            skipped_lines: 0,
        }
    }

    /// SHA-256 over labels and texts in id order, hex-encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for r in &self.records {
            hasher.update(r.gold_label.as_str().as_bytes());
            hasher.update(b"\t");
            hasher.update(r.text.as_bytes());
            hasher.update(b"\n");
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(fs::File::create(path)?);
        for r in &self.records {
            let row = JsonHeadlineOut {
                text: &r.text,
                label: r.gold_label,
                body: r.body.as_deref(),
                url: r.url.as_deref(),
            };
            serde_json::to_writer(&mut out, &row)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Stratified train/test partition as record positions, each side sorted.
pub fn split_indices(
    corpus: &Corpus,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [Label::Clickbait, Label::NonClickbait] {
        let mut members: Vec<usize> = corpus
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.gold_label == label)
            .map(|(i, _)| i)
            .collect();
        if members.len() < 2 {
            return Err(Error::Parameter(format!(
                "splitting needs at least 2 `{label}` records, found {}",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let n_test = (members.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified, seeded split into (train, test) corpora.
pub fn split(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    let (train, test) = split_indices(corpus, test_fraction, seed)?;
    Ok((corpus.subset(&train), corpus.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, content).unwrap();
        p
    }

    fn balanced(n_per_class: usize) -> Corpus {
        let records = (0..2 * n_per_class)
            .map(|i| HeadlineRecord {
                id: i as u32,
                text: format!("headline number {i}"),
                body: None,
                url: None,
                gold_label: if i < n_per_class {
                    Label::Clickbait
                } else {
                    Label::NonClickbait
                },
            })
            .collect();
        Corpus::from_records(records).unwrap()
    }

    #[test]
    fn two_file_counts() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.txt", "one\ntwo\nthree\n");
        let b = write(dir.path(), "b.txt", "four\r\nfive\r\n");
        let c = load_corpus(&a, &b).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.count_label(Label::Clickbait), 3);
        assert_eq!(c.records()[4].text, "five");
        let ids: Vec<u32> = c.records().iter().map(|r| r.id).collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn blank_and_symbol_lines_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.txt", "first\n\nthird\n");
        let b = write(dir.path(), "b.txt", "ok\n12345\n!!!\n");
        let c = load_corpus(&a, &b).unwrap();
        assert_eq!(c.count_label(Label::Clickbait), 2);
        assert_eq!(c.count_label(Label::NonClickbait), 1);
        assert_eq!(c.skipped_lines(), 2);
    }

    #[test]
    fn missing_and_empty_sources() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.txt", "x\n");
        let empty = write(dir.path(), "e.txt", "\n\n");
        let missing = dir.path().join("nope.txt");
        match load_corpus(&a, &missing) {
            Err(Error::Ingest { path, .. }) => assert_eq!(path, missing),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            load_corpus(&a, &empty),
            Err(Error::EmptySource { .. })
        ));
    }

    #[test]
    fn jsonl_fields() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "c.jsonl",
            "{\"text\":\"X\",\"label\":\"clickbait\"}\n{\"text\":\"Y\",\"label\":\"non_clickbait\",\"url\":\"http://xyz.by\",\"body\":\"\"}\n",
        );
        let c = load_corpus_jsonl(&p).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.records()[0].body, None);
        assert_eq!(c.records()[1].url.as_deref(), Some("http://xyz.by"));
        assert_eq!(c.records()[1].body, None);
    }

    #[test]
    fn jsonl_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.jsonl", "{not json\n");
        match load_corpus_jsonl(&p) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        let p = write(
            dir.path(),
            "label.jsonl",
            "{\"text\":\"a\",\"label\":\"clickbait\"}\n{\"text\":\"b\",\"label\":\"spam\"}\n",
        );
        match load_corpus_jsonl(&p) {
            Err(Error::MalformedLine { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("spam"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "c.jsonl",
            "{\"text\":\"A b\",\"label\":\"clickbait\",\"body\":\"body text\"}\n{\"text\":\"C d\",\"label\":\"non_clickbait\",\"url\":\"http://a.com/x\"}\n",
        );
        let c = load_corpus_jsonl(&p).unwrap();
        let out = dir.path().join("out.jsonl");
        c.write_jsonl(&out).unwrap();
        let again = load_corpus_jsonl(&out).unwrap();
        assert_eq!(c.records(), again.records());
    }

    #[test]
    fn stratified_split_arithmetic() {
        let c = balanced(50);
        let (train, test) = split(&c, 0.2, 7).unwrap();
        assert_eq!(train.len(), 80);
        assert_eq!(test.len(), 20);
        assert_eq!(test.count_label(Label::Clickbait), 10);
    }

    #[test]
    fn split_is_deterministic_and_seed_sensitive() {
        let c = balanced(50);
        let ids = |c: &Corpus| c.records().iter().map(|r| r.id).collect::<BTreeSet<_>>();
        let (_, t1) = split(&c, 0.2, 1).unwrap();
        let (_, t1b) = split(&c, 0.2, 1).unwrap();
        let (_, t2) = split(&c, 0.2, 2).unwrap();
        assert_eq!(ids(&t1), ids(&t1b));
        assert_ne!(ids(&t1), ids(&t2));
        assert_eq!(
            t1.count_label(Label::Clickbait),
            t2.count_label(Label::Clickbait)
        );
    }

    #[test]
    fn split_parameter_errors() {
        let c = balanced(5);
        for f in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(split(&c, f, 0), Err(Error::Parameter(_))));
        }
        let tiny = balanced(1);
        assert!(matches!(split(&tiny, 0.5, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn phase_history_is_ordered_and_tracks_changes() {
        let mut c = balanced(2);
        let l1 = [
            Label::Clickbait,
            Label::Clickbait,
            Label::NonClickbait,
            Label::NonClickbait,
        ];
        assert!(matches!(
            c.push_phase(Phase::Formality, &l1),
            Err(Error::PhaseOrder { .. })
        ));
        let s = c.push_phase(Phase::Rules, &l1).unwrap();
        assert_eq!(s.changed, 0);
        let mut l2 = l1;
        l2[0] = Label::NonClickbait;
        let s = c.push_phase(Phase::Formality, &l2).unwrap();
        assert_eq!(s.changed, 1);
        assert!((s.changed_fraction - 0.25).abs() < 1e-12);
        assert!(c.phase_history(Phase::Formality).unwrap()[0].changed);
        assert!(c.push_phase(Phase::Formality, &l2).is_err());
        assert_eq!(c.latest_phase(), Some(Phase::Formality));
    }

    proptest::proptest! {
        #[test]
        fn split_is_a_stratified_partition(
            n_click in 2usize..40,
            n_non in 2usize..40,
            fraction in 0.05f64..0.95,
            seed in 0u64..1000,
        ) {
            let records = (0..n_click + n_non)
                .map(|i| HeadlineRecord {
                    id: i as u32,
                    text: format!("h{i}"),
                    body: None,
                    url: None,
                    gold_label: if i < n_click { Label::Clickbait } else { Label::NonClickbait },
                })
                .collect();
            let c = Corpus::from_records(records).unwrap();
            let (train, test) = split_indices(&c, fraction, seed).unwrap();
            let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
            all.sort_unstable();
            proptest::prop_assert_eq!(all, (0..c.len()).collect::<Vec<_>>());
            let test_click = test.iter().filter(|&&i| c.records()[i].gold_label.is_clickbait()).count();
            let expected = n_click as f64 * fraction;
            proptest::prop_assert!((test_click as f64 - expected).abs() <= 1.0);
        }
    }
}
