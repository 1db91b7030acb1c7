//! Hand-rolled SVG 1.1 line plots: axes, ticks, legend, fixed palette.
//! Figures are a viewing convenience; the CSVs remain the ground truth,
//! so coordinates are rounded to 0.01 px and nothing here feeds back
//! into the numbers.

use crate::error::{invalid, Result};
use std::fmt::Write as _;

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 540.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 42.0;
const MARGIN_B: f64 = 56.0;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Debug, Clone)]
struct Series {
    label: String,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

/// A single-panel line figure. Log axes take logs of the data; callers
/// must keep such data positive.
#[derive(Debug, Clone)]
pub struct Figure {
    title: String,
    x_label: String,
    y_label: String,
    log_x: bool,
    log_y: bool,
    series: Vec<Series>,
}

impl Figure {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Figure {
        Figure {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn log_log(mut self) -> Figure {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn add(&mut self, label: &str, xs: &[f64], ys: &[f64]) -> Result<()> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(invalid("series needs matching nonempty x and y"));
        }
        let bad = |v: &f64| !v.is_finite();
        if xs.iter().any(bad) || ys.iter().any(bad) {
            return Err(invalid(format!("series {label:?} has nonfinite samples")));
        }
        if (self.log_x && xs.iter().any(|&x| x <= 0.0))
            || (self.log_y && ys.iter().any(|&y| y <= 0.0))
        {
            return Err(invalid(format!(
                "series {label:?} not positive on a log axis"
            )));
        }
        self.series.push(Series {
            label: label.to_string(),
            xs: xs.to_vec(),
            ys: ys.to_vec(),
        });
        Ok(())
    }

    pub fn render(&self) -> Result<String> {
        if self.series.is_empty() {
            return Err(invalid("figure has no series"));
        }
        let tx = |v: f64| if self.log_x { v.ln() } else { v };
        let ty = |v: f64| if self.log_y { v.ln() } else { v };
        let mut xr = RangeAcc::new();
        let mut yr = RangeAcc::new();
        for s in &self.series {
            for &x in &s.xs {
                xr.add(tx(x));
            }
            for &y in &s.ys {
                yr.add(ty(y));
            }
        }
        let (x0, x1) = xr.padded();
        let (y0, y1) = yr.padded();
        let px = |v: f64| MARGIN_L + (v - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = |v: f64| HEIGHT - MARGIN_B - (v - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B);

        let mut out = String::new();
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
             width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(
            out,
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
             text-anchor=\"middle\">{}</text>",
            (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            escape(&self.title)
        );

        // frame
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>",
            MARGIN_L,
            MARGIN_T,
            WIDTH - MARGIN_L - MARGIN_R,
            HEIGHT - MARGIN_T - MARGIN_B
        );

        for (v, label) in ticks(x0, x1, self.log_x) {
            let x = px(v);
            let _ = writeln!(
                out,
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
                 stroke=\"#bbb\" stroke-width=\"0.5\"/>",
                MARGIN_T,
                HEIGHT - MARGIN_B
            );
            let _ = writeln!(
                out,
                "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
                 text-anchor=\"middle\">{}</text>",
                HEIGHT - MARGIN_B + 16.0,
                escape(&label)
            );
        }
        for (v, label) in ticks(y0, y1, self.log_y) {
            let y = py(v);
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                 stroke=\"#bbb\" stroke-width=\"0.5\"/>",
                MARGIN_L,
                WIDTH - MARGIN_R
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
                 text-anchor=\"end\">{}</text>",
                MARGIN_L - 6.0,
                y + 4.0,
                escape(&label)
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" \
             text-anchor=\"middle\">{}</text>",
            (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            "<text x=\"18\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" \
             text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{}</text>",
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let mut points = String::new();
            for (&x, &y) in s.xs.iter().zip(&s.ys) {
                let _ = write!(points, "{:.2},{:.2} ", px(tx(x)), py(ty(y)));
            }
            let _ = writeln!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                points.trim_end()
            );
        }

        // legend, top right inside the frame
        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let y = MARGIN_T + 18.0 + 18.0 * k as f64;
            let x = WIDTH - MARGIN_R - 170.0;
            let _ = writeln!(
                out,
                "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                 stroke=\"{color}\" stroke-width=\"2\"/>",
                x + 22.0
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
                x + 28.0,
                y + 4.0,
                escape(&s.label)
            );
        }
        out.push_str("</svg>\n");
        Ok(out)
    }
}

struct RangeAcc {
    lo: f64,
    hi: f64,
}

impl RangeAcc {
    fn new() -> RangeAcc {
        RangeAcc {
            lo: f64::INFINITY,
            hi: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, v: f64) {
        self.lo = self.lo.min(v);
        self.hi = self.hi.max(v);
    }

    fn padded(&self) -> (f64, f64) {
        let span = (self.hi - self.lo).max(1e-12 * self.hi.abs().max(1.0));
        (self.lo - 0.03 * span, self.hi + 0.03 * span)
    }
}

/// Five-ish round tick positions over [lo, hi] in axis units, each with
/// its label in data units. Log axes tick at whole decades.
fn ticks(lo: f64, hi: f64, log: bool) -> Vec<(f64, String)> {
    let span = hi - lo;
    let step = if log {
        let ln10 = std::f64::consts::LN_10;
        ln10 * (span / (5.0 * ln10)).round().max(1.0)
    } else {
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|&s| span / s <= 6.0)
            .unwrap_or(mag * 10.0)
    };
    let mut v = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while v <= hi + 1e-9 * step {
        let data = if log { v.exp() } else { v };
        out.push((v, fmt_tick(data)));
        v += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if !(1e-3..1e4).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_a_wellformed_document() {
        let mut fig = Figure::new("demo", "x", "y");
        let xs: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x * 6.0).sin()).collect();
        fig.add("sin", &xs, &ys).unwrap();
        fig.add("lin", &xs, &xs).unwrap();
        let svg = fig.render().unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(PALETTE[0]) && svg.contains(PALETTE[1]));
        assert!(svg.contains("demo"));
    }

    #[test]
    fn log_axes_reject_nonpositive_data() {
        let mut fig = Figure::new("r", "t", "norm").log_log();
        assert!(fig.add("bad", &[1.0, 0.5], &[0.0, 1.0]).is_err());
        fig.add("ok", &[1e-6, 1e-5, 1e-4], &[1e-3, 1e-2, 1e-1])
            .unwrap();
        let svg = fig.render().unwrap();
        assert!(svg.contains("1.0e-5") || svg.contains("1e-5") || svg.contains("1.0e-4"));
    }

    #[test]
    fn rejects_broken_series() {
        let mut fig = Figure::new("r", "x", "y");
        assert!(fig.add("mismatch", &[1.0], &[1.0, 2.0]).is_err());
        assert!(fig.add("nan", &[f64::NAN], &[1.0]).is_err());
        assert!(Figure::new("empty", "x", "y").render().is_err());
    }

    #[test]
    fn escapes_markup_in_labels() {
        let mut fig = Figure::new("a<b&c", "x", "y");
        fig.add("s<1>", &[0.0, 1.0], &[0.0, 1.0]).unwrap();
        let svg = fig.render().unwrap();
        assert!(svg.contains("a&lt;b&amp;c"));
        assert!(svg.contains("s&lt;1&gt;"));
        assert!(!svg.contains("a<b"));
    }

    #[test]
    fn ticks_are_round_numbers() {
        let t = ticks(0.0, 1.0, false);
        assert!(t.len() >= 4 && t.len() <= 7);
        assert!(t.iter().any(|(_, l)| l == "0.4" || l == "0.5"));
        let lt = ticks((1e-6f64).ln(), (1e-3f64).ln(), true);
        assert!(!lt.is_empty());
    }

    #[test]
    fn output_is_deterministic() {
        let build = || {
            let mut fig = Figure::new("d", "x", "y");
            let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
            let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
            fig.add("sq", &xs, &ys).unwrap();
            fig.render().unwrap()
        };
        assert_eq!(build(), build());
    }
}
