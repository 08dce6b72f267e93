use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use super::{PipelineConfig, PipelineState};
use crate::corpus::Phase;
use crate::embedding::headline_vector;
use crate::error::{Error, Result};
use crate::formality::FormalityScores;
use crate::learners::{feature_vector, project, FeatureGroup, FeatureInputs, FeatureLayout};

/// One row per headline, in corpus order, with gold labels alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub layout: FeatureLayout,
    pub ids: Vec<u32>,
    /// Gold label per row (`true` = clickbait).
    pub labels: Vec<bool>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Layout and rows restricted to `groups`.
    pub fn select(&self, groups: &[FeatureGroup]) -> (FeatureLayout, Vec<Vec<f64>>) {
        let columns = self.layout.columns(groups);
        (self.layout.select(groups), project(&self.rows, &columns))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        write!(out, "id,gold_label")?;
        for name in &self.layout.names {
            write!(out, ",{name}")?;
        }
        writeln!(out)?;
        for ((id, &label), row) in self.ids.iter().zip(&self.labels).zip(&self.rows) {
            write!(out, "{id},{}", u8::from(label))?;
            for v in row {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<FeatureMatrix> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Ingest {
            path: path.to_path_buf(),
            source,
        })?;
        let malformed = |line: usize, message: String| Error::MalformedLine {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| malformed(1, "missing header".into()))?
            .split(',')
            .collect();
        if header.len() < 2 || header[0] != "id" || header[1] != "gold_label" {
            return Err(malformed(1, "header must start with id,gold_label".into()));
        }
        let names = &header[2..];
        let dim = names.iter().filter(|n| n.starts_with("embedding_")).count();
        let layout = FeatureLayout::new(dim);
        if layout.names != names {
            return Err(malformed(1, "feature columns do not match the expected layout".into()));
        }
        let mut matrix = FeatureMatrix {
            layout,
            ids: Vec::new(),
            labels: Vec::new(),
            rows: Vec::new(),
        };
        for (k, line) in lines.enumerate() {
            let n = k + 2;
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(malformed(n, format!("expected {} cells, found {}", header.len(), cells.len())));
            }
            let id = cells[0].parse().map_err(|_| malformed(n, "bad id".into()))?;
            let label = match cells[1] {
                "1" => true,
                "0" => false,
                other => return Err(malformed(n, format!("bad label {other:?}"))),
            };
            let row = cells[2..]
                .iter()
                .map(|c| c.parse::<f64>().map_err(|_| malformed(n, format!("bad number {c:?}"))))
                .collect::<Result<Vec<f64>>>()?;
            matrix.ids.push(id);
            matrix.labels.push(label);
            matrix.rows.push(row);
        }
        Ok(matrix)
    }
}

/// Assemble the full feature matrix once all three phases have run.
/// Headlines with undefined formality get the configured thresholds as
/// neutral scores.
pub fn build_features(state: &PipelineState, config: &PipelineConfig) -> Result<FeatureMatrix> {
    if state.corpus.latest_phase() != Some(Phase::Cluster) {
        return Err(Error::PhaseOrder {
            requested: "features",
            next: "cluster",
        });
    }
    let model = state
        .embedding
        .as_ref()
        .ok_or_else(|| Error::Parameter("embedding model missing from pipeline state".into()))?;
    let manifold = state.manifold.as_ref().expect("cluster phase recorded");
    let neutral = FormalityScores {
        f_score: config.formality.fscore_threshold,
        fres: config.formality.fres_threshold,
        raw_fres: config.formality.fres_threshold,
    };
    let layout = FeatureLayout::new(model.dimension);
    let records = state.corpus.records();
    let rows = (0..records.len())
        .into_par_iter()
        .map(|i| {
            let text = &records[i].text;
            let embedding = headline_vector(model, text).values;
            feature_vector(
                &layout,
                &FeatureInputs {
                    text,
                    verdict: &state.verdicts[i],
                    formality: state.formality[i].unwrap_or(neutral),
                    embedding: &embedding,
                    cluster: manifold.clusters[i],
                },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix {
        layout,
        ids: records.iter().map(|r| r.id).collect(),
        labels: records.iter().map(|r| r.gold_label.is_clickbait()).collect(),
        rows,
    })
}
