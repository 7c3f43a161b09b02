//! Minimal self-contained SVG figures.

use std::fmt::Write as _;

use sanlab_core::Tensor;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];
const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 160.0;
const MARGIN: f64 = 28.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
}

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (-1.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// All series overlaid in one panel sharing the y axis.
fn line_panel(out: &mut String, y0: f64, title: &str, series: &[Series]) {
    let (lo, hi) = range(series.iter().flat_map(|s| s.values.iter().copied()));
    let n = series
        .iter()
        .map(|s| s.values.len())
        .max()
        .unwrap_or(1)
        .max(2);
    let (x_span, y_span) = (PANEL_W - 2.0 * MARGIN, PANEL_H - 2.0 * MARGIN);
    let px = |i: usize| MARGIN + x_span * i as f64 / (n - 1) as f64;
    let py = |v: f64| y0 + MARGIN + y_span * (hi - v) / (hi - lo);
    writeln!(
        out,
        "<text x=\"{MARGIN}\" y=\"{:.1}\">{}</text>",
        y0 + MARGIN - 8.0,
        escape(title)
    )
    .unwrap();
    writeln!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{:.1}\" width=\"{x_span}\" height=\"{y_span}\" fill=\"none\" stroke=\"#999\"/>",
        y0 + MARGIN
    )
    .unwrap();
    if lo < 0.0 && hi > 0.0 {
        writeln!(
            out,
            "<line x1=\"{MARGIN}\" x2=\"{:.1}\" y1=\"{1:.1}\" y2=\"{1:.1}\" stroke=\"#ddd\"/>",
            MARGIN + x_span,
            py(0.0)
        )
        .unwrap();
    }
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, &v)| format!("{:.2},{:.2}", px(i), py(v)))
            .collect();
        writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>",
            points.join(" ")
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\">{}</text>",
            PANEL_W - MARGIN - 60.0 * (series.len() - k) as f64,
            y0 + MARGIN - 8.0,
            escape(s.label)
        )
        .unwrap();
    }
}

/// Stacked line panels, one per group of series.
pub fn line_panels(panels: &[(&str, Vec<Series>)]) -> String {
    let mut body = String::new();
    for (i, (title, series)) in panels.iter().enumerate() {
        line_panel(&mut body, i as f64 * PANEL_H, title, series);
    }
    document(PANEL_W, PANEL_H * panels.len().max(1) as f64, &body)
}

/// Gray heatmap of a 2D tensor with its own min-max scaling.
fn heatmap(out: &mut String, x0: f64, y0: f64, size: f64, title: &str, t: &Tensor) {
    let (rows, cols) = match t.extents() {
        [r, c] => (*r, *c),
        [n] => (1, *n),
        _ => return,
    };
    let (lo, hi) = range(t.values().iter().copied());
    let cell = size / rows.max(cols) as f64;
    writeln!(
        out,
        "<text x=\"{x0:.1}\" y=\"{:.1}\">{}</text>",
        y0 - 4.0,
        escape(title)
    )
    .unwrap();
    for r in 0..rows {
        for c in 0..cols {
            let v = t.values()[r * cols + c];
            let g = if v.is_finite() {
                (255.0 * (v - lo) / (hi - lo)).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{cell:.2}\" height=\"{cell:.2}\" fill=\"rgb({g},{g},{g})\"/>",
                x0 + c as f64 * cell,
                y0 + r as f64 * cell
            )
            .unwrap();
        }
    }
}

/// A row of titled heatmaps.
pub fn heatmap_row(panels: &[(&str, &Tensor)]) -> String {
    let size = 160.0;
    let mut body = String::new();
    for (i, (title, t)) in panels.iter().enumerate() {
        heatmap(
            &mut body,
            MARGIN + i as f64 * (size + MARGIN),
            MARGIN,
            size,
            title,
            t,
        );
    }
    let width = MARGIN + panels.len().max(1) as f64 * (size + MARGIN);
    document(width, size + 2.0 * MARGIN, &body)
}

/// Grid of kernels: line plots for rank 1, heatmaps for rank 2.
pub fn kernel_grid(kernels: &[Tensor]) -> String {
    if kernels.first().is_some_and(|k| k.rank() == 2) {
        let titles: Vec<String> = (0..kernels.len()).map(|i| format!("kernel {i}")).collect();
        let panels: Vec<(&str, &Tensor)> = titles
            .iter()
            .map(String::as_str)
            .zip(kernels.iter())
            .collect();
        return heatmap_row(&panels);
    }
    let titles: Vec<String> = kernels
        .iter()
        .enumerate()
        .map(|(i, k)| format!("kernel {i} (m = {})", k.len()))
        .collect();
    let panels: Vec<(&str, Vec<Series>)> = titles
        .iter()
        .zip(kernels)
        .map(|(t, k)| {
            (
                t.as_str(),
                vec![Series {
                    label: "w",
                    values: k.values(),
                }],
            )
        })
        .collect();
    line_panels(&panels)
}
