//! Standalone SVG plots: deterministic bytes, fixed 800x600 viewBox, no
//! external assets.

use crate::error::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;

fn fmt(x: f64) -> String {
    format!("{x:.3}")
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN_B
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn document_open() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    )
}

fn axes(frame: &Frame, x_ticks: &[f64], y_ticks: &[f64], x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    let x0 = frame.px(frame.x_min);
    let x1 = frame.px(frame.x_max);
    let y0 = frame.py(frame.y_min);
    let y1 = frame.py(frame.y_max);
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(x0),
        fmt(y0),
        fmt(x1),
        fmt(y0)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(x0),
        fmt(y0),
        fmt(x0),
        fmt(y1)
    ));
    for &t in x_ticks {
        let px = frame.px(t);
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
            fmt(px),
            fmt(y0),
            fmt(y0 + 6.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\" \
             text-anchor=\"middle\">{}</text>\n",
            fmt(px),
            fmt(y0 + 22.0),
            trim_tick(t)
        ));
    }
    for &t in y_ticks {
        let py = frame.py(t);
        out.push_str(&format!(
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"black\"/>\n",
            fmt(py),
            fmt(x0 - 6.0),
            fmt(x0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\" \
             text-anchor=\"end\">{}</text>\n",
            fmt(x0 - 10.0),
            fmt(py + 5.0),
            trim_tick(t)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>\n",
        fmt((x0 + x1) / 2.0),
        fmt(HEIGHT - 10.0),
        x_label
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"16\" \
         text-anchor=\"middle\" transform=\"rotate(-90 {} {})\">{}</text>\n",
        fmt(18.0),
        fmt((y0 + y1) / 2.0),
        fmt(18.0),
        fmt((y0 + y1) / 2.0),
        y_label
    ));
    out
}

fn trim_tick(t: f64) -> String {
    if (t - t.round()).abs() < 1e-9 {
        format!("{}", t.round() as i64)
    } else {
        format!("{t}")
    }
}

/// Step plot of a nondecreasing or nonincreasing function sampled on a grid
/// (CDFs and survival curves), drawn over [0, x_max] x [0, 1] with integer
/// x ticks.
pub fn step_plot(points: &[(f64, f64)], x_label: &str, y_label: &str) -> Result<String, CliError> {
    if points.is_empty() {
        return Err(CliError::Config(
            "refusing to render an empty distribution".into(),
        ));
    }
    let x_max = points.last().unwrap().0.max(1e-9);
    let frame = Frame {
        x_min: 0.0,
        x_max,
        y_min: 0.0,
        y_max: 1.0,
    };
    let x_ticks: Vec<f64> = (0..=x_max.floor() as i64).map(|k| k as f64).collect();
    let y_ticks: Vec<f64> = (0..=5).map(|k| k as f64 / 5.0).collect();
    let mut doc = document_open();
    doc.push_str(&axes(&frame, &x_ticks, &y_ticks, x_label, y_label));
    let mut path = String::new();
    let mut prev_y = points[0].1;
    path.push_str(&format!(
        "M {} {}",
        fmt(frame.px(points[0].0)),
        fmt(frame.py(prev_y))
    ));
    for &(x, y) in &points[1..] {
        // Horizontal to the new x, then vertical to the new value.
        path.push_str(&format!(" H {}", fmt(frame.px(x))));
        if y != prev_y {
            path.push_str(&format!(" V {}", fmt(frame.py(y))));
            prev_y = y;
        }
    }
    doc.push_str(&format!(
        "<path d=\"{path}\" fill=\"none\" stroke=\"#1f4e8c\" stroke-width=\"1.5\"/>\n"
    ));
    doc.push_str("</svg>\n");
    Ok(doc)
}

/// Bar plot of an integer-count law.
pub fn bar_plot(probs: &[(u64, f64)], x_label: &str, y_label: &str) -> Result<String, CliError> {
    if probs.is_empty() {
        return Err(CliError::Config(
            "refusing to render an empty distribution".into(),
        ));
    }
    let x_max = probs.last().unwrap().0 as f64 + 1.0;
    let y_max = probs.iter().map(|p| p.1).fold(0.0f64, f64::max).max(1e-9);
    let frame = Frame {
        x_min: -0.5,
        x_max,
        y_min: 0.0,
        y_max: y_max * 1.05,
    };
    let x_ticks: Vec<f64> = (0..=probs.last().unwrap().0).map(|k| k as f64).collect();
    let y_ticks: Vec<f64> = (0..=4).map(|k| k as f64 * y_max / 4.0).collect();
    let mut doc = document_open();
    doc.push_str(&axes(&frame, &x_ticks, &y_ticks, x_label, y_label));
    for &(r, p) in probs {
        let x0 = frame.px(r as f64 - 0.4);
        let x1 = frame.px(r as f64 + 0.4);
        let y0 = frame.py(0.0);
        let y1 = frame.py(p);
        doc.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#1f4e8c\"/>\n",
            fmt(x0),
            fmt(y1),
            fmt(x1 - x0),
            fmt((y0 - y1).max(0.0))
        ));
    }
    doc.push_str("</svg>\n");
    Ok(doc)
}
