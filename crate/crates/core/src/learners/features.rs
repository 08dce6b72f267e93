//! The integrated feature vector and per-group selection masks.

use serde::{Deserialize, Serialize};

use crate::category_rules::{CategoryId, CategoryVerdict};
use crate::error::{Error, Result};
use crate::formality::FormalityScores;
use crate::textkit::{tokenize, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    CategoryFlags,
    Formality,
    MarksLength,
    Embedding,
    Cluster,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::CategoryFlags,
        FeatureGroup::Formality,
        FeatureGroup::MarksLength,
        FeatureGroup::Embedding,
        FeatureGroup::Cluster,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureGroup::CategoryFlags => "category_flags",
            FeatureGroup::Formality => "formality",
            FeatureGroup::MarksLength => "marks_length",
            FeatureGroup::Embedding => "embedding",
            FeatureGroup::Cluster => "cluster",
        }
    }

    pub fn parse(s: &str) -> Option<FeatureGroup> {
        FeatureGroup::ALL.into_iter().find(|g| g.as_str() == s)
    }

    /// Binary groups are left unscaled by standardization.
    pub fn is_continuous(self) -> bool {
        matches!(
            self,
            FeatureGroup::Formality | FeatureGroup::MarksLength | FeatureGroup::Embedding
        )
    }
}

/// Column order and grouping for a given embedding dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub names: Vec<String>,
    pub groups: Vec<FeatureGroup>,
}

impl FeatureLayout {
    pub fn new(embedding_dim: usize) -> FeatureLayout {
        let mut names = Vec::new();
        let mut groups = Vec::new();
        let mut push = |name: String, group| {
            names.push(name);
            groups.push(group);
        };
        for c in CategoryId::ALL {
            let slug = c.name().to_lowercase().replace([' ', '-'], "_");
            push(format!("flag_{slug}"), FeatureGroup::CategoryFlags);
        }
        push("f_score".into(), FeatureGroup::Formality);
        push("fres".into(), FeatureGroup::Formality);
        for name in ["exclamations", "questions", "other_punctuation", "length_words"] {
            push(name.into(), FeatureGroup::MarksLength);
        }
        for k in 0..embedding_dim {
            push(format!("embedding_{k}"), FeatureGroup::Embedding);
        }
        push("cluster".into(), FeatureGroup::Cluster);
        FeatureLayout { names, groups }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Column indices belonging to any of `groups`, ascending.
    pub fn columns(&self, groups: &[FeatureGroup]) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| groups.contains(&self.groups[i]))
            .collect()
    }

    pub fn select(&self, groups: &[FeatureGroup]) -> FeatureLayout {
        let cols = self.columns(groups);
        FeatureLayout {
            names: cols.iter().map(|&i| self.names[i].clone()).collect(),
            groups: cols.iter().map(|&i| self.groups[i]).collect(),
        }
    }
}

/// Counts of `!`, `?` and other punctuation characters, and the length in
/// words.
pub fn marks_and_length(text: &str) -> [f64; 4] {
    let mut out = [0.0; 4];
    for t in tokenize(text) {
        match t.kind {
            TokenKind::Punctuation => {
                for c in t.surface.chars() {
                    let slot = match c {
                        '!' => 0,
                        '?' => 1,
                        _ => 2,
                    };
                    out[slot] += 1.0;
                }
            }
            TokenKind::Word => out[3] += 1.0,
            _ => {}
        }
    }
    out
}

/// Everything known about one headline that feeds its feature vector.
pub struct FeatureInputs<'a> {
    pub text: &'a str,
    pub verdict: &'a CategoryVerdict,
    pub formality: FormalityScores,
    pub embedding: &'a [f64],
    pub cluster: usize,
}

pub fn feature_vector(layout: &FeatureLayout, inputs: &FeatureInputs<'_>) -> Result<Vec<f64>> {
    let mut row = Vec::with_capacity(layout.len());
    row.extend(inputs.verdict.flags.iter().map(|&f| f64::from(u8::from(f))));
    row.push(inputs.formality.f_score);
    row.push(inputs.formality.fres);
    row.extend(marks_and_length(inputs.text));
    row.extend_from_slice(inputs.embedding);
    row.push(inputs.cluster as f64);
    if row.len() != layout.len() {
        return Err(Error::DimensionMismatch {
            expected: layout.len(),
            actual: row.len(),
        });
    }
    if row.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parameter(format!("non-finite feature for headline {:?}", inputs.text)));
    }
    Ok(row)
}

/// Keep only the given columns of each row.
pub fn project(rows: &[Vec<f64>], columns: &[usize]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| columns.iter().map(|&c| r[c]).collect())
        .collect()
}

// ----------------------------------------------------------------------------
// Standardization
// ----------------------------------------------------------------------------

/// Per-column mean and standard deviation fitted on training rows. Columns
/// flagged as binary pass through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub scaled: Vec<bool>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>], groups: &[FeatureGroup]) -> Result<Standardizer> {
        let d = groups.len();
        if rows.is_empty() {
            return Err(Error::Parameter("cannot standardize zero rows".into()));
        }
        let n = rows.len() as f64;
        let mut means = vec![0.0; d];
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, actual: r.len() });
            }
            for (m, x) in means.iter_mut().zip(r) {
                *m += x;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut sds = vec![0.0; d];
        for r in rows {
            for ((s, x), m) in sds.iter_mut().zip(r).zip(&means) {
                *s += (x - m) * (x - m);
            }
        }
        let scaled: Vec<bool> = groups.iter().map(|g| g.is_continuous()).collect();
        for (j, s) in sds.iter_mut().enumerate() {
            *s = (*s / n).sqrt();
            if !scaled[j] || *s == 0.0 {
                *s = 1.0;
            }
        }
        for (j, m) in means.iter_mut().enumerate() {
            if !scaled[j] {
                *m = 0.0;
            }
        }
        Ok(Standardizer { means, sds, scaled })
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    #[test]
    fn layout_shape() {
        let l = FeatureLayout::new(3);
        assert_eq!(l.len(), 11 + 2 + 4 + 3 + 1);
        assert_eq!(l.names[0], "flag_ambiguous");
        assert_eq!(l.names[3], "flag_bait_and_switch");
        assert_eq!(l.names[20], "cluster");
        assert_eq!(l.columns(&[FeatureGroup::Formality]), vec![11, 12]);
        assert_eq!(l.select(&[FeatureGroup::Embedding, FeatureGroup::Cluster]).len(), 4);
        for g in FeatureGroup::ALL {
            assert_eq!(FeatureGroup::parse(g.as_str()), Some(g));
        }
    }

    #[test]
    fn marks() {
        assert_eq!(marks_and_length("Wow!!! Really?! (no), ok..."), [4.0, 1.0, 6.0, 4.0]);
        assert_eq!(marks_and_length(""), [0.0; 4]);
    }

    #[test]
    fn vector_assembly() {
        let layout = FeatureLayout::new(2);
        let mut flags = [false; CategoryId::COUNT];
        flags[4] = true;
        let verdict = CategoryVerdict {
            flags,
            label: Label::Clickbait,
            cloning_skipped: true,
            redirection_skipped: true,
        };
        let inputs = FeatureInputs {
            text: "Why?",
            verdict: &verdict,
            formality: FormalityScores { f_score: 40.0, fres: 70.0, raw_fres: 70.0 },
            embedding: &[0.5, -0.5],
            cluster: 1,
        };
        let row = feature_vector(&layout, &inputs).unwrap();
        assert_eq!(row[4], 1.0);
        assert_eq!(&row[11..], &[40.0, 70.0, 0.0, 1.0, 0.0, 1.0, 0.5, -0.5, 1.0]);
        let wrong = FeatureInputs { embedding: &[0.0], ..inputs };
        assert!(feature_vector(&layout, &wrong).is_err());
    }

    #[test]
    fn standardization_round_trip() {
        let groups = [FeatureGroup::CategoryFlags, FeatureGroup::Formality, FeatureGroup::Embedding];
        let rows = vec![vec![1.0, 10.0, 3.0], vec![0.0, 20.0, 3.0], vec![1.0, 30.0, 3.0]];
        let s = Standardizer::fit(&rows, &groups).unwrap();
        let t: Vec<Vec<f64>> = rows.iter().map(|r| s.transform(r)).collect();
        assert_eq!(t[1][0], 0.0);
        assert_eq!(t[0][0], 1.0);
        assert!((t[0][1] + 1.224744871391589).abs() < 1e-12);
        assert_eq!(t[2][2], 0.0);
        let json = serde_json::to_string(&s).unwrap();
        let back: Standardizer = serde_json::from_str(&json).unwrap();
        let again: Vec<Vec<f64>> = rows.iter().map(|r| back.transform(r)).collect();
        assert_eq!(t, again);
    }
}
