//! Text analysis primitives: tokenization, sentence segmentation,
//! part-of-speech tagging and syllable counting.

mod pos;
mod syllables;

pub use pos::{pos_profile, pos_tag, Lexicon, PosClass, PosProfile};
pub use syllables::count_syllables;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
    Url,
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// Lowercased surface with typographic apostrophes folded to `'`.
    pub normalized: String,
    pub kind: TokenKind,
    /// Byte offset of `surface` in the tokenized text. Everything between two
    /// consecutive tokens is whitespace.
    pub offset: usize,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }

    pub fn end(&self) -> usize {
        self.offset + self.surface.len()
    }
}

const URL_PREFIXES: [&str; 3] = ["http://", "https://", "www."];
const URL_TRAILING: &[char] = &['.', ',', ';', ':', '!', '?', ')', ']', '"', '\'', '’', '”'];

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '’'
}

fn is_punctuation(c: char) -> bool {
    matches!(
        c,
        '.' | ','
            | '!'
            | '?'
            | ';'
            | ':'
            | '\''
            | '"'
            | '('
            | ')'
            | '['
            | ']'
            | '{'
            | '}'
            | '-'
            | '–'
            | '—'
            | '…'
            | '‘'
            | '’'
            | '“'
            | '”'
            | '/'
    )
}

fn normalize(surface: &str) -> String {
    surface
        .chars()
        .map(|c| if c == '’' { '\'' } else { c })
        .flat_map(char::to_lowercase)
        .collect()
}

/// Split text into word, number, URL, punctuation and symbol tokens.
///
/// Words may carry internal apostrophes or hyphens (`won't`, `well-known`).
/// A run of one repeated punctuation character (`!!!`, `...`) is one token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let rest = &text[start..];
        let lower_prefix: String = rest.chars().take(8).flat_map(char::to_lowercase).collect();
        let (kind, next) = if URL_PREFIXES.iter().any(|p| lower_prefix.starts_with(p)) {
            let mut j = i;
            while j < chars.len() && !chars[j].1.is_whitespace() {
                j += 1;
            }
            while j > i + 1 && URL_TRAILING.contains(&chars[j - 1].1) {
                j -= 1;
            }
            (TokenKind::Url, j)
        } else if c.is_alphabetic() {
            let mut j = i + 1;
            while j < chars.len() {
                let cj = chars[j].1;
                let joiner = is_apostrophe(cj) || cj == '-';
                if cj.is_alphanumeric() {
                    j += 1;
                } else if joiner && chars.get(j + 1).is_some_and(|&(_, n)| n.is_alphabetic()) {
                    j += 2;
                } else {
                    break;
                }
            }
            (TokenKind::Word, j)
        } else if c.is_ascii_digit() {
            let mut j = i + 1;
            while j < chars.len() {
                let cj = chars[j].1;
                if cj.is_alphanumeric() {
                    j += 1;
                } else if (cj == '.' || cj == ',')
                    && chars.get(j + 1).is_some_and(|&(_, n)| n.is_ascii_digit())
                {
                    j += 2;
                } else {
                    break;
                }
            }
            (TokenKind::Number, j)
        } else if is_punctuation(c) {
            let mut j = i + 1;
            while j < chars.len() && chars[j].1 == c {
                j += 1;
            }
            (TokenKind::Punctuation, j)
        } else {
            (TokenKind::Symbol, i + 1)
        };
        let surface = &text[start..byte_at(next)];
        tokens.push(Token {
            surface: surface.to_string(),
            normalized: normalize(surface),
            kind,
            offset: start,
        });
        i = next;
    }
    tokens
}

/// Lowercased word tokens of `text`.
pub fn words(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(Token::is_word)
        .map(|t| t.normalized)
        .collect()
}

fn is_abbreviation(before: &str) -> bool {
    const ABBREVIATIONS: [&str; 8] = ["mr", "mrs", "ms", "dr", "st", "vs", "jr", "sr"];
    let word: String = before
        .chars()
        .rev()
        .take_while(|c| c.is_alphabetic() || *c == '.')
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    let bare = word.trim_matches('.');
    let lower = bare.to_lowercase();
    // Dotted initials such as "U.S." end in a single letter.
    let last_segment = bare.rsplit('.').next().unwrap_or("");
    ABBREVIATIONS.contains(&lower.as_str())
        || (bare.contains('.')
            && last_segment.chars().count() == 1
            && last_segment.chars().all(char::is_uppercase))
}

/// Split on runs of `.`, `!` or `?` that are followed by whitespace or the
/// end of text. Periods after titles and dotted initials do not end a
/// sentence. Text without terminal punctuation is a single sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((idx, c)) = iter.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let mut end = idx + c.len_utf8();
        let mut only_periods = c == '.';
        while let Some(&(j, n)) = iter.peek() {
            if matches!(n, '.' | '!' | '?') {
                only_periods &= n == '.';
                end = j + n.len_utf8();
                iter.next();
            } else {
                break;
            }
        }
        let at_boundary = iter.peek().is_none_or(|&(_, n)| n.is_whitespace());
        if !at_boundary {
            continue;
        }
        if only_periods && end - idx == 1 && is_abbreviation(&text[start..idx]) {
            continue;
        }
        let sentence = text[start..end].trim();
        if !sentence.is_empty() {
            sentences.push(sentence.to_string());
        }
        start = end;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail.to_string());
    }
    sentences
}

/// Word, sentence and syllable totals feeding the reading-ease formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadabilityCounts {
    pub total_words: usize,
    pub total_sentences: usize,
    pub total_syllables: usize,
}

impl ReadabilityCounts {
    /// Counts over word tokens only; numbers, URLs and punctuation are not
    /// words.
    pub fn from_text(text: &str) -> ReadabilityCounts {
        let tokens = tokenize(text);
        let word_tokens: Vec<&Token> = tokens.iter().filter(|t| t.is_word()).collect();
        let total_sentences = if tokens.is_empty() {
            0
        } else {
            split_sentences(text).len().max(1)
        };
        ReadabilityCounts {
            total_words: word_tokens.len(),
            total_sentences,
            total_syllables: word_tokens
                .iter()
                .map(|t| count_syllables(&t.normalized))
                .sum(),
        }
    }
}
