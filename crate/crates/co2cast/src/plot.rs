//! Self-contained SVG charts: history line, forecast line, shaded interval
//! band and a vertical rule at the history/forecast boundary.
//!
//! Geometry is fixed (900x500 canvas, linear axes, 5 ticks per axis) and
//! every coordinate is formatted with two decimals, so identical inputs
//! produce identical bytes.

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::pipeline::CountryOutcome;

pub const WIDTH: f64 = 900.0;
pub const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

struct Axis {
    min: f64,
    max: f64,
    offset: f64,
    span: f64,
    inverted: bool,
}

impl Axis {
    fn new(min: f64, max: f64, offset: f64, span: f64, inverted: bool) -> Axis {
        // degenerate ranges get +-1 padding so single points still render
        let (min, max) = if (max - min).abs() < 1e-12 {
            (min - 1.0, max + 1.0)
        } else {
            (min, max)
        };
        Axis {
            min,
            max,
            offset,
            span,
            inverted,
        }
    }

    fn project(&self, value: f64) -> f64 {
        let t = (value - self.min) / (self.max - self.min);
        if self.inverted {
            self.offset + self.span * (1.0 - t)
        } else {
            self.offset + self.span * t
        }
    }

    fn ticks(&self) -> Vec<f64> {
        (0..TICKS)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (TICKS - 1) as f64)
            .collect()
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn polyline(points: &[(f64, f64)]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{},{}", fmt(*x), fmt(*y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders one country's chart into an SVG string.
pub fn render_chart(outcome: &CountryOutcome) -> String {
    let history = &outcome.history;
    let forecast = &outcome.report.forecast;

    let first_year = history.start_year;
    let last_year = forecast
        .last()
        .map(|f| f.year)
        .unwrap_or_else(|| history.last_year());
    let boundary_year = history.last_year();

    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for &v in &history.values {
        y_min = y_min.min(v);
        y_max = y_max.max(v);
    }
    for f in forecast {
        y_min = y_min.min(f.lower);
        y_max = y_max.max(f.upper);
    }
    let pad = 0.05 * (y_max - y_min);
    let x = Axis::new(
        first_year as f64,
        last_year as f64,
        MARGIN_LEFT,
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        false,
    );
    let y = Axis::new(
        (y_min - pad).min(y_min),
        y_max + pad,
        MARGIN_TOP,
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM,
        true,
    );

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = WIDTH,
        h = HEIGHT
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        WIDTH, HEIGHT
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\" text-anchor=\"middle\">{} CO2 emissions (Mt): history and projection</text>\n",
        fmt(WIDTH / 2.0),
        outcome.report.country
    ));

    // axes and ticks
    let plot_bottom = HEIGHT - MARGIN_BOTTOM;
    svg.push_str(&format!(
        "  <line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = fmt(MARGIN_LEFT),
        r = fmt(WIDTH - MARGIN_RIGHT),
        b = fmt(plot_bottom)
    ));
    svg.push_str(&format!(
        "  <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = fmt(MARGIN_LEFT),
        t = fmt(MARGIN_TOP),
        b = fmt(plot_bottom)
    ));
    for tick in x.ticks() {
        let px = x.project(tick);
        svg.push_str(&format!(
            "  <line x1=\"{x}\" y1=\"{b}\" x2=\"{x}\" y2=\"{b2}\" stroke=\"black\"/>\n",
            x = fmt(px),
            b = fmt(plot_bottom),
            b2 = fmt(plot_bottom + 6.0)
        ));
        svg.push_str(&format!(
            "  <text x=\"{x}\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{label}</text>\n",
            x = fmt(px),
            ty = fmt(plot_bottom + 22.0),
            label = tick.round() as i64
        ));
    }
    for tick in y.ticks() {
        let py = y.project(tick);
        svg.push_str(&format!(
            "  <line x1=\"{l2}\" y1=\"{y}\" x2=\"{l}\" y2=\"{y}\" stroke=\"black\"/>\n",
            l2 = fmt(MARGIN_LEFT - 6.0),
            l = fmt(MARGIN_LEFT),
            y = fmt(py)
        ));
        svg.push_str(&format!(
            "  <text x=\"{tx}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\" dominant-baseline=\"middle\">{label}</text>\n",
            tx = fmt(MARGIN_LEFT - 10.0),
            y = fmt(py),
            label = fmt(tick)
        ));
    }

    // interval band
    if !forecast.is_empty() {
        let mut band: Vec<(f64, f64)> = forecast
            .iter()
            .map(|f| (x.project(f.year as f64), y.project(f.upper)))
            .collect();
        band.extend(
            forecast
                .iter()
                .rev()
                .map(|f| (x.project(f.year as f64), y.project(f.lower))),
        );
        svg.push_str(&format!(
            "  <polygon points=\"{}\" fill=\"#f4a261\" fill-opacity=\"0.35\" stroke=\"none\"/>\n",
            polyline(&band)
        ));
    }

    // history line
    let history_points: Vec<(f64, f64)> = history
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| (x.project(history.year_at(i) as f64), y.project(v)))
        .collect();
    svg.push_str(&format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"#2a6f97\" stroke-width=\"2\"/>\n",
        polyline(&history_points)
    ));

    // forecast line, connected to the last observation
    if !forecast.is_empty() {
        let mut forecast_points = vec![(
            x.project(boundary_year as f64),
            y.project(*history.values.last().expect("non-empty history")),
        )];
        forecast_points.extend(
            forecast
                .iter()
                .map(|f| (x.project(f.year as f64), y.project(f.point))),
        );
        svg.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"#d1495b\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n",
            polyline(&forecast_points)
        ));
    }

    // boundary rule between history and forecast
    let bx = x.project(boundary_year as f64);
    svg.push_str(&format!(
        "  <line x1=\"{x}\" y1=\"{t}\" x2=\"{x}\" y2=\"{b}\" stroke=\"#6c757d\" stroke-dasharray=\"3,3\"/>\n",
        x = fmt(bx),
        t = fmt(MARGIN_TOP),
        b = fmt(plot_bottom)
    ));

    svg.push_str("</svg>\n");
    svg
}

/// Writes one `plot_<ISO3>.svg` per country.
pub fn emit_plots(outcomes: &[CountryOutcome], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for outcome in outcomes {
        let path = out_dir.join(format!("plot_{}.svg", outcome.report.country));
        std::fs::write(&path, render_chart(outcome))?;
        written.push(path);
    }
    Ok(written)
}
