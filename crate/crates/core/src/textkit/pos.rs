//! Lexicon and suffix-rule part-of-speech tagging over the nine classes the
//! formality score needs.
//!
//! Closed classes (articles, prepositions, pronouns, interjections and the
//! `other` function words) are resolved by exhaustive word lists. Open
//! classes use word lists first, then suffix rules, then default to noun.
//! A word listed as both noun and verb is tagged noun after an article,
//! possessive, adjective, preposition or number, and verb otherwise.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{Token, TokenKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PosClass {
    Noun,
    Adjective,
    Preposition,
    Article,
    Pronoun,
    Verb,
    Adverb,
    Interjection,
    Other,
}

impl PosClass {
    pub const ALL: [PosClass; 9] = [
        PosClass::Noun,
        PosClass::Adjective,
        PosClass::Preposition,
        PosClass::Article,
        PosClass::Pronoun,
        PosClass::Verb,
        PosClass::Adverb,
        PosClass::Interjection,
        PosClass::Other,
    ];

    /// Lexicon file stem for this class.
    pub fn file_stem(self) -> &'static str {
        match self {
            PosClass::Noun => "noun",
            PosClass::Adjective => "adjective",
            PosClass::Preposition => "preposition",
            PosClass::Article => "article",
            PosClass::Pronoun => "pronoun",
            PosClass::Verb => "verb",
            PosClass::Adverb => "adverb",
            PosClass::Interjection => "interjection",
            PosClass::Other => "other",
        }
    }
}

const EMBEDDED: [(PosClass, &str); 9] = [
    (PosClass::Noun, include_str!("../../data/lexicon/noun.txt")),
    (PosClass::Adjective, include_str!("../../data/lexicon/adjective.txt")),
    (PosClass::Preposition, include_str!("../../data/lexicon/preposition.txt")),
    (PosClass::Article, include_str!("../../data/lexicon/article.txt")),
    (PosClass::Pronoun, include_str!("../../data/lexicon/pronoun.txt")),
    (PosClass::Verb, include_str!("../../data/lexicon/verb.txt")),
    (PosClass::Adverb, include_str!("../../data/lexicon/adverb.txt")),
    (PosClass::Interjection, include_str!("../../data/lexicon/interjection.txt")),
    (PosClass::Other, include_str!("../../data/lexicon/other.txt")),
];

/// Lookup precedence; closed classes win over open ones.
const CLOSED_ORDER: [PosClass; 5] = [
    PosClass::Article,
    PosClass::Pronoun,
    PosClass::Preposition,
    PosClass::Interjection,
    PosClass::Other,
];
const OPEN_ORDER: [PosClass; 3] = [PosClass::Adverb, PosClass::Adjective, PosClass::Verb];

const POSSESSIVES: [&str; 7] = ["my", "your", "his", "her", "its", "our", "their"];

const NOUN_SUFFIXES: [&str; 10] = [
    "tion", "sion", "ness", "ment", "ity", "ism", "ship", "hood", "ance", "ence",
];
const ADJECTIVE_SUFFIXES: [&str; 9] = [
    "ous", "ful", "ive", "able", "ible", "less", "ical", "ish", "est",
];
const VERB_SUFFIXES: [&str; 5] = ["ize", "ise", "ify", "ing", "ed"];

/// Word lists per class, one lowercase word per line.
#[derive(Debug, Clone)]
pub struct Lexicon {
    classes: Vec<(PosClass, HashSet<String>)>,
}

fn parse_list(content: &str) -> HashSet<String> {
    content
        .lines()
        .map(|l| l.trim().replace('’', "'").to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

impl Lexicon {
    /// The lexicon shipped with the crate, parsed once per process.
    pub fn embedded() -> &'static Lexicon {
        static LEXICON: OnceLock<Lexicon> = OnceLock::new();
        LEXICON.get_or_init(|| Lexicon {
            classes: EMBEDDED
                .iter()
                .map(|&(class, content)| (class, parse_list(content)))
                .collect(),
        })
    }

    /// Load `<stem>.txt` files from `dir`; classes without a file keep the
    /// embedded list.
    pub fn from_dir(dir: &Path) -> Result<Lexicon> {
        let mut classes = Vec::with_capacity(EMBEDDED.len());
        for &(class, embedded) in &EMBEDDED {
            let path = dir.join(format!("{}.txt", class.file_stem()));
            let content = match fs::read_to_string(&path) {
                Ok(c) => c,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => embedded.to_string(),
                Err(source) => return Err(Error::Ingest { path, source }),
            };
            classes.push((class, parse_list(&content)));
        }
        Ok(Lexicon { classes })
    }

    pub fn contains(&self, class: PosClass, word: &str) -> bool {
        self.classes
            .iter()
            .any(|(c, words)| *c == class && words.contains(word))
    }

    fn lookup(&self, word: &str, previous: Option<PosClass>, previous_word: &str) -> Option<PosClass> {
        if let Some(c) = CLOSED_ORDER.into_iter().find(|&c| self.contains(c, word)) {
            return Some(c);
        }
        let noun = self.contains(PosClass::Noun, word);
        if noun && self.contains(PosClass::Verb, word) {
            // "to" before a noun/verb word is far more often the infinitive marker.
            let nominal_context = POSSESSIVES.contains(&previous_word)
                || previous_word != "to"
                    && matches!(
                    previous,
                    Some(
                        PosClass::Article
                            | PosClass::Adjective
                            | PosClass::Preposition
                            | PosClass::Other
                    )
                );
            return Some(if nominal_context {
                PosClass::Noun
            } else {
                PosClass::Verb
            });
        }
        if noun {
            return Some(PosClass::Noun);
        }
        OPEN_ORDER.into_iter().find(|&c| self.contains(c, word))
    }

    fn by_suffix(word: &str) -> PosClass {
        let len = word.chars().count();
        let has = |suffixes: &[&str]| {
            suffixes
                .iter()
                .any(|s| word.ends_with(s) && len >= s.len() + 2)
        };
        if word.ends_with("ly") && len >= 4 {
            PosClass::Adverb
        } else if has(&NOUN_SUFFIXES) {
            PosClass::Noun
        } else if has(&ADJECTIVE_SUFFIXES) {
            PosClass::Adjective
        } else if has(&VERB_SUFFIXES) {
            PosClass::Verb
        } else {
            PosClass::Noun
        }
    }

    /// Tag a single lowercase word given the previous word's tag and text.
    pub fn tag_word(&self, word: &str, previous: Option<PosClass>, previous_word: &str) -> PosClass {
        if let Some(c) = self.lookup(word, previous, previous_word) {
            return c;
        }
        // Possessive or contracted `'s` falls back to the stem.
        if let Some(stem) = word.strip_suffix("'s").or_else(|| word.strip_suffix("s'")) {
            if !stem.is_empty() {
                return self
                    .lookup(stem, previous, previous_word)
                    .unwrap_or_else(|| Self::by_suffix(stem));
            }
        }
        Self::by_suffix(word)
    }
}

/// Tag every token: word tokens get a class, all other tokens `None`.
pub fn pos_tag(tokens: &[Token], lexicon: &Lexicon) -> Vec<Option<PosClass>> {
    let mut previous: Option<PosClass> = None;
    let mut previous_word = String::new();
    tokens
        .iter()
        .map(|t| match t.kind {
            TokenKind::Word => {
                let class = lexicon.tag_word(&t.normalized, previous, &previous_word);
                previous = Some(class);
                previous_word.clone_from(&t.normalized);
                Some(class)
            }
            TokenKind::Number => {
                previous = Some(PosClass::Other);
                previous_word = "#".into();
                None
            }
            _ => None,
        })
        .collect()
}

/// Percentage of word tokens per class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosProfile {
    pub noun: f64,
    pub adjective: f64,
    pub preposition: f64,
    pub article: f64,
    pub pronoun: f64,
    pub verb: f64,
    pub adverb: f64,
    pub interjection: f64,
    pub other: f64,
    pub word_count: usize,
}

impl PosProfile {
    /// True when computed from zero word tokens; all percentages are zero.
    pub fn is_degenerate(&self) -> bool {
        self.word_count == 0
    }

    pub fn get(&self, class: PosClass) -> f64 {
        match class {
            PosClass::Noun => self.noun,
            PosClass::Adjective => self.adjective,
            PosClass::Preposition => self.preposition,
            PosClass::Article => self.article,
            PosClass::Pronoun => self.pronoun,
            PosClass::Verb => self.verb,
            PosClass::Adverb => self.adverb,
            PosClass::Interjection => self.interjection,
            PosClass::Other => self.other,
        }
    }

    fn slot(&mut self, class: PosClass) -> &mut f64 {
        match class {
            PosClass::Noun => &mut self.noun,
            PosClass::Adjective => &mut self.adjective,
            PosClass::Preposition => &mut self.preposition,
            PosClass::Article => &mut self.article,
            PosClass::Pronoun => &mut self.pronoun,
            PosClass::Verb => &mut self.verb,
            PosClass::Adverb => &mut self.adverb,
            PosClass::Interjection => &mut self.interjection,
            PosClass::Other => &mut self.other,
        }
    }

    pub fn total(&self) -> f64 {
        PosClass::ALL.iter().map(|&c| self.get(c)).sum()
    }

    /// Build a profile from per-class counts.
    pub fn from_counts(counts: &[(PosClass, usize)]) -> PosProfile {
        let mut profile = PosProfile {
            noun: 0.0,
            adjective: 0.0,
            preposition: 0.0,
            article: 0.0,
            pronoun: 0.0,
            verb: 0.0,
            adverb: 0.0,
            interjection: 0.0,
            other: 0.0,
            word_count: counts.iter().map(|&(_, n)| n).sum(),
        };
        if profile.word_count > 0 {
            let total = profile.word_count as f64;
            for &(class, n) in counts {
                *profile.slot(class) += 100.0 * n as f64 / total;
            }
        }
        profile
    }
}

/// Class percentages over the word tokens of `tokens`.
pub fn pos_profile(tokens: &[Token], lexicon: &Lexicon) -> PosProfile {
    let mut counts = [0usize; 9];
    for class in pos_tag(tokens, lexicon).into_iter().flatten() {
        counts[class as usize] += 1;
    }
    let pairs: Vec<(PosClass, usize)> = PosClass::ALL.iter().copied().zip(counts).collect();
    PosProfile::from_counts(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textkit::tokenize;

    fn tag(text: &str) -> Vec<PosClass> {
        let toks = tokenize(text);
        pos_tag(&toks, Lexicon::embedded()).into_iter().flatten().collect()
    }

    #[test]
    fn closed_classes_from_lexicon() {
        assert_eq!(tag("the"), vec![PosClass::Article]);
        assert_eq!(tag("of"), vec![PosClass::Preposition]);
        assert_eq!(tag("she"), vec![PosClass::Pronoun]);
        assert_eq!(tag("wow"), vec![PosClass::Interjection]);
        assert_eq!(tag("and"), vec![PosClass::Other]);
    }

    #[test]
    fn suffix_rules() {
        assert_eq!(tag("quickly"), vec![PosClass::Adverb]);
        assert_eq!(tag("lion"), vec![PosClass::Noun]);
        assert_eq!(tag("celebration"), vec![PosClass::Noun]);
        assert_eq!(tag("marvelous"), vec![PosClass::Adjective]);
        assert_eq!(tag("modernize"), vec![PosClass::Verb]);
        assert_eq!(tag("zorblax"), vec![PosClass::Noun]);
        // Listed words override suffix rules.
        assert_eq!(tag("family"), vec![PosClass::Noun]);
        assert_eq!(tag("interest"), vec![PosClass::Noun]);
    }

    #[test]
    fn quickly_follows_ly_rule_not_noun_lexicon() {
        let lex = Lexicon::embedded();
        assert!(!lex.contains(PosClass::Noun, "quickly"));
        assert!("quickly".ends_with("ly"));
        assert_eq!(lex.tag_word("quickly", None, ""), PosClass::Adverb);
    }

    #[test]
    fn noun_verb_ambiguity_uses_left_context() {
        assert_eq!(
            tag("the vote"),
            vec![PosClass::Article, PosClass::Noun]
        );
        assert_eq!(
            tag("they vote"),
            vec![PosClass::Pronoun, PosClass::Verb]
        );
        assert_eq!(
            tag("her face"),
            vec![PosClass::Pronoun, PosClass::Noun]
        );
    }

    #[test]
    fn contractions_and_possessives() {
        assert_eq!(tag("won't"), vec![PosClass::Verb]);
        assert_eq!(tag("it's"), vec![PosClass::Pronoun]);
        assert_eq!(tag("Obama's"), vec![PosClass::Noun]);
    }

    #[test]
    fn profile_examples() {
        let toks = tokenize("lion cat");
        let p = pos_profile(&toks, Lexicon::embedded());
        assert_eq!(p.noun, 100.0);
        assert_eq!(p.total(), 100.0);
        let p = pos_profile(&tokenize("run"), Lexicon::embedded());
        assert_eq!(p.verb, 100.0);
        let p = pos_profile(&[], Lexicon::embedded());
        assert!(p.is_degenerate());
        assert_eq!(p.total(), 0.0);
    }

    #[test]
    fn directory_override_falls_back_per_class() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("interjection.txt"), "zorblax\n").unwrap();
        let lex = Lexicon::from_dir(dir.path()).unwrap();
        assert_eq!(lex.tag_word("zorblax", None, ""), PosClass::Interjection);
        assert_eq!(lex.tag_word("wow", None, ""), PosClass::Noun);
        assert_eq!(lex.tag_word("the", None, ""), PosClass::Article);
    }

    proptest::proptest! {
        #[test]
        fn profile_sums_to_100(text in "[a-zA-Z ,.!?']{1,120}") {
            let toks = tokenize(&text);
            let p = pos_profile(&toks, Lexicon::embedded());
            if p.word_count > 0 {
                proptest::prop_assert!((p.total() - 100.0).abs() < 1e-9);
            }
            for c in PosClass::ALL {
                proptest::prop_assert!(p.get(c) >= 0.0);
            }
        }

        #[test]
        fn tagging_is_deterministic(text in "[a-zA-Z ,.!?']{1,80}", other in "[a-z ]{1,40}") {
            let lex = Lexicon::embedded();
            let toks = tokenize(&text);
            let first = pos_tag(&toks, lex);
            let _ = pos_tag(&tokenize(&other), lex);
            proptest::prop_assert_eq!(first, pos_tag(&toks, lex));
        }
    }
}
