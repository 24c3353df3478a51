//! Deterministic SVG charts on a fixed 800x600 canvas: confusion heatmap,
//! ROC curves and training curves. Every data point carries `data-x` and
//! `data-y` attributes with its original values.

use std::fmt::Write as _;

use crate::domain::{ClassLabel, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::metrics::{ConfusionMatrix, RocCurve};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const PALETTE: [&str; NUM_CLASSES] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{}" y="28" text-anchor="middle" font-size="18">{}</text>
"#,
        WIDTH / 2.0,
        escape(title)
    );
}

/// Linear map from data space into the plot area.
struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Axes { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn draw(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            out,
            r#"<g stroke="black" fill="none"><line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#
        );
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let xv = self.x.0 + t * (self.x.1 - self.x.0);
            let yv = self.y.0 + t * (self.y.1 - self.y.0);
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
                self.px(xv),
                y1 + 18.0,
                tick(xv)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{}</text>"#,
                x0 - 6.0,
                self.py(yv) + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 20.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="20" y="{:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub struct Series<'a> {
    pub name: &'a str,
    pub points: &'a [(f64, f64)],
}

fn bounds(series: &[Series<'_>], pick: impl Fn(&(f64, f64)) -> f64) -> (f64, f64) {
    series
        .iter()
        .flat_map(|s| s.points.iter().map(&pick))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Line chart with a circle marker per point.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> Result<String> {
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::Validation(format!("chart `{title}` has no data")));
    }
    if series.iter().flat_map(|s| s.points).any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonFinite(format!("chart `{title}` has non-finite data")));
    }
    let axes = Axes::new(bounds(series, |p| p.0), bounds(series, |p| p.1));
    let mut out = String::new();
    open(&mut out, title);
    axes.draw(&mut out, x_label, y_label);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = s.points.iter().map(|(x, y)| format!("{:.2},{:.2}", axes.px(*x), axes.py(*y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-name="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            escape(s.name),
            path.join(" ")
        );
        for (x, y) in s.points {
            let _ = writeln!(
                out,
                r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="4" fill="{color}" data-x="{x}" data-y="{y}"/>"#,
                axes.px(*x),
                axes.py(*y)
            );
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{ly:.2}" font-size="12" fill="{color}">{}</text>"#,
            WIDTH - RIGHT - 150.0,
            escape(s.name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Count heatmap with rows as the true class. Empty cells stay blank.
pub fn confusion_heatmap(cm: &ConfusionMatrix) -> String {
    let mut out = String::new();
    open(&mut out, "Confusion matrix");
    let size = 400.0 / NUM_CLASSES as f64;
    let (x0, y0) = (250.0, 80.0);
    let max = cm.counts().iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    for (i, row) in cm.counts().iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{}</text>"#,
            x0 - 8.0,
            y0 + size * (i as f64 + 0.5) + 4.0,
            ClassLabel::ALL[i]
        );
        for (j, v) in row.iter().enumerate() {
            let (x, y) = (x0 + size * j as f64, y0 + size * i as f64);
            let shade = 255.0 - 200.0 * (*v as f64 / max);
            let fill = if *v == 0 { "#ffffff".to_string() } else { format!("rgb({0:.0},{0:.0},255)", shade) };
            let _ = writeln!(
                out,
                r##"<rect class="cell" x="{x:.2}" y="{y:.2}" width="{size:.2}" height="{size:.2}" fill="{fill}" stroke="#999" data-x="{j}" data-y="{i}" data-count="{v}"/>"##
            );
            if *v > 0 {
                let _ = writeln!(
                    out,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{v}</text>"#,
                    x + size / 2.0,
                    y + size / 2.0 + 5.0
                );
            }
        }
    }
    for (j, c) in ClassLabel::ALL.iter().enumerate() {
        let (x, y) = (x0 + size * (j as f64 + 0.5), y0 + 400.0 + 14.0);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="end" font-size="12" transform="rotate(-35 {x:.2} {y:.2})">{c}</text>"#
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">predicted class</text>"#,
        x0 + 200.0,
        HEIGHT - 12.0
    );
    out.push_str("</svg>\n");
    out
}

/// One-vs-rest ROC curves with the chance diagonal.
pub fn roc_plot(curves: &[RocCurve]) -> Result<String> {
    let names: Vec<String> = curves.iter().map(|c| format!("{} (AUC {:.3})", c.class, c.auc)).collect();
    let points: Vec<Vec<(f64, f64)>> = curves.iter().map(|c| c.points.iter().map(|p| (p.fpr, p.tpr)).collect()).collect();
    let series: Vec<Series<'_>> = names
        .iter()
        .zip(&points)
        .map(|(name, pts)| Series { name, points: pts })
        .collect();
    let mut svg = line_chart("ROC curves (one-vs-rest)", "false positive rate", "true positive rate", &series)?;
    let axes = Axes::new((0.0, 1.0), (0.0, 1.0));
    let diagonal = format!(
        r##"<line class="chance" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#aaa" stroke-dasharray="6 4"/>"##,
        axes.px(0.0),
        axes.py(0.0),
        axes.px(1.0),
        axes.py(1.0)
    );
    svg.insert_str(svg.len() - "</svg>\n".len(), &(diagonal + "\n"));
    Ok(svg)
}

/// Parsed training history: epochs plus whichever of accuracy and loss are
/// present.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingHistory {
    pub epoch: Vec<f64>,
    pub acc: Option<Vec<f64>>,
    pub loss: Option<Vec<f64>>,
}

/// Read a CSV with an `epoch` column and at least one of `acc`/`accuracy`
/// and `loss`/`val_loss`. Errors name the offending line.
pub fn parse_training_history(text: &str) -> Result<TrainingHistory> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Validation(format!("line 1: {e}")))?
        .clone();
    let col = |names: &[&str]| names.iter().find_map(|n| headers.iter().position(|h| h == *n));
    let epoch_col = col(&["epoch"]).ok_or_else(|| Error::Validation("line 1: missing `epoch` column".into()))?;
    let acc_col = col(&["acc", "accuracy"]);
    let loss_col = col(&["loss", "val_loss"]);
    if acc_col.is_none() && loss_col.is_none() {
        return Err(Error::Validation("line 1: need an `acc` or `loss` column".into()));
    }
    let mut h = TrainingHistory {
        acc: acc_col.map(|_| Vec::new()),
        loss: loss_col.map(|_| Vec::new()),
        ..TrainingHistory::default()
    };
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Validation(format!("line {line}: {e}")))?;
        let num = |c: usize, name: &str| -> Result<f64> {
            let cell = row.get(c).unwrap_or("");
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Validation(format!("line {line}: `{cell}` in column {name} is not a number")))
        };
        h.epoch.push(num(epoch_col, "epoch")?);
        if let (Some(c), Some(v)) = (acc_col, h.acc.as_mut()) {
            v.push(num(c, &headers[c])?);
        }
        if let (Some(c), Some(v)) = (loss_col, h.loss.as_mut()) {
            v.push(num(c, &headers[c])?);
        }
    }
    if h.epoch.is_empty() {
        return Err(Error::Validation("training history has no rows".into()));
    }
    Ok(h)
}

/// Accuracy and loss charts, whichever the history contains.
pub fn training_charts(h: &TrainingHistory) -> Result<Vec<(&'static str, String)>> {
    let mut charts = Vec::new();
    let pts = |v: &[f64]| -> Vec<(f64, f64)> { h.epoch.iter().copied().zip(v.iter().copied()).collect() };
    if let Some(acc) = &h.acc {
        let p = pts(acc);
        let svg = line_chart("Training accuracy", "epoch", "accuracy", &[Series { name: "accuracy", points: &p }])?;
        charts.push(("training_accuracy.svg", svg));
    }
    if let Some(loss) = &h.loss {
        let p = pts(loss);
        let svg = line_chart("Training loss", "epoch", "loss", &[Series { name: "loss", points: &p }])?;
        charts.push(("training_loss.svg", svg));
    }
    Ok(charts)
}
