//! Hand-written SVG figures and their companion TSV tables.
//!
//! Every figure is rendered in memory from report data before anything is
//! written, so a failing report leaves the output directory untouched.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::ClassifierEvaluation;
use crate::error::{Error, Result};
use crate::learners::ModelKind;

const WIDTH: f64 = 420.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PLOT: f64 = WIDTH - 2.0 * MARGIN;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotFile {
    pub path: PathBuf,
    /// "svg" or "tsv".
    pub format: &'static str,
}

// ============================================================================
// SVG builder
// ============================================================================

struct Svg {
    body: String,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Svg {
    fn new(title: &str) -> Svg {
        let mut svg = Svg { body: String::new() };
        svg.rect(0.0, 0.0, WIDTH, HEIGHT, "#ffffff", None);
        svg.text(WIDTH / 2.0, 28.0, title, 15.0, "middle");
        svg
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: Option<&str>) {
        let stroke = stroke.map(|s| format!(" stroke=\"{s}\"")).unwrap_or_default();
        let _ = writeln!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"{stroke}/>"
        );
    }

    fn line(&mut self, from: (f64, f64), to: (f64, f64), stroke: &str, dashed: bool) {
        let dash = if dashed { " stroke-dasharray=\"5,4\"" } else { "" };
        let _ = writeln!(
            self.body,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{stroke}\"{dash}/>",
            from.0, from.1, to.0, to.1
        );
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            self.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"2\"/>",
            coords.join(" ")
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(self.body, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"{fill}\"/>");
    }

    fn text(&mut self, x: f64, y: f64, text: &str, size: f64, anchor: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"{size}\" text-anchor=\"{anchor}\">{}</text>",
            escape(text)
        );
    }

    /// Unit-square axes with ticks at 0, 0.5 and 1.
    fn unit_axes(&mut self, x_label: &str, y_label: &str) {
        let (left, bottom) = (MARGIN, MARGIN + PLOT);
        self.rect(left, MARGIN, PLOT, PLOT, "none", Some("#333333"));
        for tick in [0.0, 0.5, 1.0] {
            let (x, y) = to_canvas(tick, tick);
            self.text(x, bottom + 16.0, &format!("{tick}"), 11.0, "middle");
            self.text(left - 8.0, y + 4.0, &format!("{tick}"), 11.0, "end");
        }
        self.text(left + PLOT / 2.0, HEIGHT - 14.0, x_label, 12.0, "middle");
        let _ = writeln!(
            self.body,
            "<text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
            MARGIN + PLOT / 2.0,
            MARGIN + PLOT / 2.0,
            escape(y_label)
        );
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n{}</svg>\n",
            self.body
        )
    }
}

/// Map unit-square coordinates onto the plotting area (y grows upward).
fn to_canvas(x: f64, y: f64) -> (f64, f64) {
    (MARGIN + x * PLOT, MARGIN + (1.0 - y) * PLOT)
}

/// White-to-blue ramp for heatmap cells.
fn heat(fraction: f64) -> String {
    let f = fraction.clamp(0.0, 1.0);
    let channel = |hi: f64, lo: f64| (hi + (lo - hi) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", channel(247.0, 8.0), channel(251.0, 69.0), channel(255.0, 148.0))
}

// ============================================================================
// Figures
// ============================================================================

fn confusion_figure(e: &ClassifierEvaluation) -> (String, String) {
    let m = &e.confusion;
    // Rows are actual classes, columns predicted; clickbait first.
    let cells = [[m.tp, m.fn_], [m.fp, m.tn]];
    let names = ["clickbait", "non-clickbait"];
    let max = cells.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    let mut svg = Svg::new(&format!("{} confusion matrix", e.kind.display_name()));
    let cell = PLOT / 2.0;
    for (r, row) in cells.iter().enumerate() {
        for (c, &count) in row.iter().enumerate() {
            let (x, y) = (MARGIN + c as f64 * cell, MARGIN + r as f64 * cell);
            svg.rect(x, y, cell, cell, &heat(count as f64 / max), Some("#333333"));
            svg.text(x + cell / 2.0, y + cell / 2.0 + 6.0, &count.to_string(), 18.0, "middle");
        }
        svg.text(MARGIN - 6.0, MARGIN + (r as f64 + 0.5) * cell, names[r], 10.0, "end");
        svg.text(MARGIN + (r as f64 + 0.5) * cell, MARGIN + PLOT + 16.0, names[r], 11.0, "middle");
    }
    svg.text(WIDTH / 2.0, HEIGHT - 14.0, "predicted", 12.0, "middle");
    svg.text(MARGIN, 48.0, "actual (rows)", 11.0, "start");

    let mut tsv = String::from("actual\tpredicted\tcount\n");
    for (r, row) in cells.iter().enumerate() {
        for (c, count) in row.iter().enumerate() {
            let _ = writeln!(tsv, "{}\t{}\t{count}", names[r], names[c]);
        }
    }
    (svg.finish(), tsv)
}

fn roc_figure(e: &ClassifierEvaluation) -> (String, String) {
    let mut svg = Svg::new(&format!("{} ROC (AUC {:.3})", e.kind.display_name(), e.roc.auc));
    svg.unit_axes("false positive rate", "true positive rate");
    svg.line(to_canvas(0.0, 0.0), to_canvas(1.0, 1.0), "#999999", true);
    let points: Vec<(f64, f64)> = e.roc.points.iter().map(|p| to_canvas(p.fpr, p.tpr)).collect();
    svg.polyline(&points, "#1f77b4");

    let mut tsv = String::from("fpr\ttpr\tthreshold\n");
    for p in &e.roc.points {
        let threshold = p.threshold.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(tsv, "{}\t{}\t{threshold}", p.fpr, p.tpr);
    }
    (svg.finish(), tsv)
}

fn auc_figure(e: &ClassifierEvaluation) -> (String, String) {
    let bars = [("measured", e.roc.auc, "#1f77b4"), ("published", e.published_auc, "#bbbbbb")];
    let mut svg = Svg::new(&format!("{} AUC", e.kind.display_name()));
    svg.unit_axes("", "AUC");
    let slot = PLOT / bars.len() as f64;
    for (i, (label, value, fill)) in bars.iter().enumerate() {
        let x = MARGIN + i as f64 * slot + slot * 0.2;
        let (_, top) = to_canvas(0.0, *value);
        svg.rect(x, top, slot * 0.6, MARGIN + PLOT - top, fill, Some("#333333"));
        svg.text(x + slot * 0.3, top - 6.0, &format!("{value:.3}"), 12.0, "middle");
        svg.text(x + slot * 0.3, MARGIN + PLOT + 32.0, label, 12.0, "middle");
    }

    let mut tsv = String::from("source\tauc\n");
    for (label, value, _) in bars {
        let _ = writeln!(tsv, "{label}\t{value}");
    }
    (svg.finish(), tsv)
}

fn reliability_figure(e: &ClassifierEvaluation) -> (String, String) {
    let title = match e.kind {
        ModelKind::Svm => format!("{} reliability (uncalibrated logistic)", e.kind.display_name()),
        _ => format!("{} reliability", e.kind.display_name()),
    };
    let mut svg = Svg::new(&title);
    svg.unit_axes("mean predicted probability", "fraction clickbait");
    svg.line(to_canvas(0.0, 0.0), to_canvas(1.0, 1.0), "#999999", true);
    let points: Vec<(f64, f64)> = e
        .reliability
        .bins
        .iter()
        .filter_map(|b| Some(to_canvas(b.mean_predicted?, b.fraction_positive?)))
        .collect();
    svg.polyline(&points, "#d62728");
    for &(x, y) in &points {
        svg.circle(x, y, 3.5, "#d62728");
    }

    let mut tsv = String::from("lower\tupper\tcount\tmean_predicted\tfraction_positive\n");
    for b in &e.reliability.bins {
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            tsv,
            "{}\t{}\t{}\t{}\t{}",
            b.lower,
            b.upper,
            b.count,
            opt(b.mean_predicted),
            opt(b.fraction_positive)
        );
    }
    (svg.finish(), tsv)
}

/// Render the four figures and tables for every classifier into `dir`.
/// Files are named `<classifier>_<figure>.svg` and `.tsv`.
pub fn render_plots(evaluations: &[ClassifierEvaluation], dir: &Path) -> Result<Vec<PlotFile>> {
    if evaluations.is_empty() {
        return Err(Error::Parameter("cannot plot an empty report".into()));
    }
    let mut rendered = Vec::with_capacity(evaluations.len() * 8);
    for e in evaluations {
        let figures = [
            ("confusion", confusion_figure(e)),
            ("roc", roc_figure(e)),
            ("auc", auc_figure(e)),
            ("reliability", reliability_figure(e)),
        ];
        for (name, (svg, tsv)) in figures {
            let stem = format!("{}_{name}", e.kind.as_str());
            rendered.push((dir.join(format!("{stem}.svg")), "svg", svg));
            rendered.push((dir.join(format!("{stem}.tsv")), "tsv", tsv));
        }
    }
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(rendered.len());
    for (path, format, content) in rendered {
        std::fs::write(&path, content)?;
        files.push(PlotFile { path, format });
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{evaluate, trapezoid_area};

    fn report() -> Vec<ClassifierEvaluation> {
        let truth: Vec<bool> = (0..20).map(|i| i % 3 == 0).collect();
        ModelKind::ALL
            .into_iter()
            .map(|kind| {
                let scores: Vec<f64> = (0..20)
                    .map(|i| match kind {
                        ModelKind::Svm => (i % 5) as f64 - 2.0 + if i % 3 == 0 { 1.0 } else { 0.0 },
                        _ => ((i * 7) % 11) as f64 / 10.0,
                    })
                    .collect();
                evaluate(kind, vec!["all".into()], &truth, &scores, 10).unwrap()
            })
            .collect()
    }

    #[test]
    fn three_classifiers_give_twelve_plots_and_tables() {
        let dir = tempfile::tempdir().unwrap();
        let files = render_plots(&report(), dir.path()).unwrap();
        assert_eq!(files.iter().filter(|f| f.format == "svg").count(), 12);
        assert_eq!(files.iter().filter(|f| f.format == "tsv").count(), 12);
        for f in &files {
            let text = std::fs::read_to_string(&f.path).unwrap();
            if f.format == "svg" {
                assert!(text.contains("<svg") && text.trim_end().ends_with("</svg>"));
            }
        }
    }

    #[test]
    fn empty_report_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("plots");
        assert!(render_plots(&[], &target).is_err());
        assert!(!target.exists());
    }

    #[test]
    fn roc_table_reintegrates_to_reported_auc() {
        let dir = tempfile::tempdir().unwrap();
        let evals = report();
        render_plots(&evals, dir.path()).unwrap();
        for e in &evals {
            let table = std::fs::read_to_string(dir.path().join(format!("{}_roc.tsv", e.kind))).unwrap();
            let points: Vec<(f64, f64)> = table
                .lines()
                .skip(1)
                .map(|l| {
                    let mut cols = l.split('\t').map(|c| c.parse::<f64>().unwrap_or(f64::NAN));
                    (cols.next().unwrap(), cols.next().unwrap())
                })
                .collect();
            assert!((trapezoid_area(&points) - e.roc.auc).abs() < 1e-9);
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let evals = report();
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        render_plots(&evals, a.path()).unwrap();
        let files = render_plots(&evals, b.path()).unwrap();
        for f in files {
            let name = f.path.file_name().unwrap();
            assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(&f.path).unwrap());
        }
    }

    #[test]
    fn titles_are_escaped() {
        assert_eq!(escape("a<b & c>"), "a&lt;b &amp; c&gt;");
    }
}
