//! Phase-2 recategorization from the formality score over part-of-speech
//! percentages and the Flesch reading-ease score.
//!
//! A headline is relabelled only when both gates agree: both scores at or
//! above their thresholds → non-clickbait, both below → clickbait.
//! Disagreement keeps the phase-1 label.

use serde::{Deserialize, Serialize};

use crate::corpus::{Label, Phase, PhaseLabel};
use crate::error::{Error, Result};
use crate::textkit::{pos_profile, tokenize, Lexicon, PosProfile, ReadabilityCounts};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormalityConfig {
    pub fscore_threshold: f64,
    pub fres_threshold: f64,
}

impl Default for FormalityConfig {
    fn default() -> Self {
        FormalityConfig {
            fscore_threshold: 60.0,
            fres_threshold: 60.0,
        }
    }
}

impl FormalityConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("fscore_threshold", self.fscore_threshold),
            ("fres_threshold", self.fres_threshold),
        ] {
            if !(0.0..=100.0).contains(&v) {
                return Err(Error::Parameter(format!("{name} must lie in [0, 100], got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormalityScores {
    pub f_score: f64,
    /// Reading ease clamped to [0, 100].
    pub fres: f64,
    pub raw_fres: f64,
}

/// Formality score: half of (noun + adjective + preposition + article −
/// pronoun − verb − adverb − interjection + 100), over class percentages.
pub fn f_score(profile: &PosProfile) -> Result<f64> {
    if profile.is_degenerate() {
        return Err(Error::UndefinedScore("formality of a text without words"));
    }
    let p = profile;
    Ok((p.noun + p.adjective + p.preposition + p.article
        - p.pronoun
        - p.verb
        - p.adverb
        - p.interjection
        + 100.0)
        / 2.0)
}

/// Unclamped Flesch reading ease.
pub fn raw_fres(counts: &ReadabilityCounts) -> Result<f64> {
    if counts.total_words == 0 {
        return Err(Error::UndefinedScore("reading ease of a text without words"));
    }
    let words = counts.total_words as f64;
    let sentences = counts.total_sentences.max(1) as f64;
    let syllables = counts.total_syllables as f64;
    Ok(206.835 - 1.015 * (words / sentences) - 84.6 * (syllables / words))
}

/// Flesch reading ease clamped to [0, 100].
pub fn fres(counts: &ReadabilityCounts) -> Result<f64> {
    raw_fres(counts).map(|r| r.clamp(0.0, 100.0))
}

pub fn scores(profile: &PosProfile, counts: &ReadabilityCounts) -> Result<FormalityScores> {
    let raw = raw_fres(counts)?;
    Ok(FormalityScores {
        f_score: f_score(profile)?,
        fres: raw.clamp(0.0, 100.0),
        raw_fres: raw,
    })
}

/// Both scores for a headline.
pub fn score_text(text: &str, lexicon: &Lexicon) -> Result<FormalityScores> {
    let tokens = tokenize(text);
    scores(&pos_profile(&tokens, lexicon), &ReadabilityCounts::from_text(text))
}

/// Phase-2 label. Scores equal to a threshold count as meeting it.
pub fn formality_gate(
    scores: &FormalityScores,
    config: &FormalityConfig,
    phase1_label: Label,
) -> PhaseLabel {
    let formal = scores.f_score >= config.fscore_threshold;
    let readable = scores.fres >= config.fres_threshold;
    let label = match (formal, readable) {
        (true, true) => Label::NonClickbait,
        (false, false) => Label::Clickbait,
        _ => phase1_label,
    };
    PhaseLabel {
        phase: Phase::Formality,
        label,
        changed: label != phase1_label,
    }
}
