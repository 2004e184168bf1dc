//! Minimal standalone SVG 1.1 line charts.

use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStyle {
    Solid,
    Dashed,
    DashDot,
}

impl LineStyle {
    fn dasharray(self) -> Option<&'static str> {
        match self {
            LineStyle::Solid => None,
            LineStyle::Dashed => Some("8,4"),
            LineStyle::DashDot => Some("8,3,2,3"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub color: &'static str,
    pub style: LineStyle,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub curves: Vec<Curve>,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

/// Tick spacing from {1, 2, 5} x 10^k giving at most about `target` ticks.
fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10().floor()) as usize };
    let v = if v.abs() < step * 1e-9 { 0.0 } else { v };
    format!("{v:.decimals$}")
}

pub fn render_svg(chart: &Chart) -> String {
    let pts = chart.curves.iter().flat_map(|c| c.points.iter());
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut y0 = 0.0f64;
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() || x1 <= x0 {
        x0 = 0.0;
        x1 = 1.0;
    }
    if !y1.is_finite() || y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let y_step = nice_step(y1 - y0, 6);
    let y0 = (y0 / y_step).floor() * y_step;
    let y1 = (y1 / y_step).ceil() * y_step;
    let x_step = nice_step(x1 - x0, 10);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    s.push_str("<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
        LEFT + plot_w / 2.0,
        escape(&chart.title)
    );

    // Axes and ticks.
    s.push_str("<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n");
    let _ = writeln!(
        s,
        "<rect x=\"{LEFT:.1}\" y=\"{TOP:.1}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\"/>"
    );
    let nx = ((x1 - x0) / x_step + 1e-9).floor() as usize;
    for k in 0..=nx {
        let x = sx(x0 + k as f64 * x_step);
        let _ = writeln!(s, "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\"/>", TOP + plot_h, TOP + plot_h + 5.0);
    }
    let ny = ((y1 - y0) / y_step + 0.5).floor() as usize;
    for k in 0..=ny {
        let y = sy(y0 + k as f64 * y_step);
        let _ = writeln!(s, "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{LEFT:.2}\" y2=\"{y:.2}\"/>", LEFT - 5.0);
    }
    s.push_str("</g>\n");

    s.push_str("<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n");
    for k in 0..=nx {
        let v = x0 + k as f64 * x_step;
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            sx(v),
            TOP + plot_h + 19.0,
            tick_label(v, x_step)
        );
    }
    for k in 0..=ny {
        let v = y0 + k as f64 * y_step;
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            LEFT - 8.0,
            sy(v) + 4.0,
            tick_label(v, y_step)
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{}</text>",
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&chart.y_label)
    );
    s.push_str("</g>\n");

    for curve in &chart.curves {
        let _ = write!(
            s,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"",
            curve.color
        );
        if let Some(d) = curve.style.dasharray() {
            let _ = write!(s, " stroke-dasharray=\"{d}\"");
        }
        s.push_str(" points=\"");
        for (i, &(x, y)) in curve.points.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.2},{:.2}", sx(x), sy(y));
        }
        s.push_str("\"/>\n");
    }

    // Legend, top right.
    let row = 18.0;
    let legend_w = 12.0 + 40.0 + 8.0 + 7.0 * chart.curves.iter().map(|c| c.label.len()).max().unwrap_or(0) as f64;
    let lx = LEFT + plot_w - legend_w - 10.0;
    let ly = TOP + 10.0;
    let _ = writeln!(
        s,
        "<rect x=\"{lx:.1}\" y=\"{ly:.1}\" width=\"{legend_w:.1}\" height=\"{:.1}\" fill=\"white\" stroke=\"#888888\"/>",
        row * chart.curves.len() as f64 + 8.0
    );
    for (i, curve) in chart.curves.iter().enumerate() {
        let y = ly + 4.0 + row * (i as f64 + 0.5);
        let _ = write!(
            s,
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{}\" stroke-width=\"1.5\"",
            lx + 8.0,
            lx + 48.0,
            curve.color
        );
        if let Some(d) = curve.style.dasharray() {
            let _ = write!(s, " stroke-dasharray=\"{d}\"");
        }
        s.push_str("/>\n");
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            lx + 56.0,
            y + 4.0,
            escape(&curve.label)
        );
    }
    s.push_str("</svg>\n");
    s
}
