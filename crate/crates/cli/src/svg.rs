//! Hand-emitted SVG charts: fixed 960x540 viewBox, two named series
//! colors, ticks at round numbers, and no timestamps or machine-dependent
//! content, so outputs are stable golden files.

use mlab_core::simlab::{DensityCurve, Histogram};

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 540.0;
pub const P1_COLOR: &str = "#1f77b4";
pub const P2_COLOR: &str = "#d62728";
const AXIS_COLOR: &str = "#444444";
const GRID_COLOR: &str = "#dddddd";
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 52.0;
const MARGIN_BOTTOM: f64 = 58.0;

pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub values: &'a [f64],
}

struct Frame {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Frame {
        let (xmin, xmax) = pad_if_flat(xmin, xmax);
        let (ymin, ymax) = pad_if_flat(ymin, ymax);
        Frame {
            xmin,
            xmax,
            ymin,
            ymax,
        }
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.xmin) / (self.xmax - self.xmin) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (y - self.ymin) / (self.ymax - self.ymin) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn pad_if_flat(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Round tick positions covering [min, max] with a 1/2/5 step.
fn nice_ticks(min: f64, max: f64, target: usize) -> Vec<f64> {
    let range = (max - min).max(f64::MIN_POSITIVE);
    let raw_step = range / target.max(1) as f64;
    let magnitude = 10f64.powf(raw_step.log10().floor());
    let norm = raw_step / magnitude;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    } * magnitude;
    let mut ticks = Vec::new();
    let mut t = (min / step).ceil() * step;
    while t <= max + step * 1e-9 {
        // Snap float dust to zero so labels print "0" rather than "-0.00".
        ticks.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    ticks
}

fn tick_label(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e7 {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}

struct SvgDoc {
    body: String,
}

impl SvgDoc {
    fn new(title: &str) -> SvgDoc {
        let mut body = String::new();
        body.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        body.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             font-family=\"sans-serif\">\n"
        ));
        body.push_str(&format!(
            "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n"
        ));
        body.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"30\" font-size=\"18\" text-anchor=\"middle\" fill=\"#222222\">{}</text>\n",
            WIDTH / 2.0,
            escape(title)
        ));
        SvgDoc { body }
    }

    fn axes(&mut self, frame: &Frame, x_label: &str, y_label: &str) {
        let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        for tick in nice_ticks(frame.ymin, frame.ymax, 6) {
            let y = frame.sy(tick);
            self.body.push_str(&format!(
                "  <line x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{x1:.2}\" y2=\"{y:.2}\" stroke=\"{GRID_COLOR}\" stroke-width=\"1\"/>\n"
            ));
            self.body.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\" fill=\"{AXIS_COLOR}\">{}</text>\n",
                x0 - 8.0,
                y + 4.0,
                tick_label(tick)
            ));
        }
        for tick in nice_ticks(frame.xmin, frame.xmax, 8) {
            let x = frame.sx(tick);
            self.body.push_str(&format!(
                "  <line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"{GRID_COLOR}\" stroke-width=\"1\"/>\n",
                y0 + 5.0
            ));
            self.body.push_str(&format!(
                "  <text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" fill=\"{AXIS_COLOR}\">{}</text>\n",
                y0 + 20.0,
                tick_label(tick)
            ));
        }
        self.body.push_str(&format!(
            "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\" stroke=\"{AXIS_COLOR}\" stroke-width=\"1.5\"/>\n"
        ));
        self.body.push_str(&format!(
            "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"{AXIS_COLOR}\" stroke-width=\"1.5\"/>\n"
        ));
        self.body.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" fill=\"#222222\">{}</text>\n",
            (x0 + x1) / 2.0,
            HEIGHT - 14.0,
            escape(x_label)
        ));
        self.body.push_str(&format!(
            "  <text x=\"20\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" fill=\"#222222\" transform=\"rotate(-90 20 {:.2})\">{}</text>\n",
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        ));
    }

    fn polyline(&mut self, frame: &Frame, xs: &[f64], ys: &[f64], color: &str, width: f64) {
        let points: Vec<String> = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| format!("{:.2},{:.2}", frame.sx(*x), frame.sy(*y)))
            .collect();
        self.body.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\" points=\"{}\"/>\n",
            points.join(" ")
        ));
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        let mut x = MARGIN_LEFT + 12.0;
        let y = MARGIN_TOP - 10.0;
        for (name, color) in entries {
            self.body.push_str(&format!(
                "  <rect x=\"{x:.2}\" y=\"{:.2}\" width=\"14\" height=\"14\" fill=\"{color}\"/>\n",
                y - 11.0
            ));
            self.body.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{y:.2}\" font-size=\"13\" fill=\"#222222\">{}</text>\n",
                x + 20.0,
                escape(name)
            ));
            x += 24.0 + 8.0 * name.len() as f64 + 24.0;
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

/// Line chart of one or more series indexed by point number.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let (ymin, ymax) = bounds(series.iter().flat_map(|s| s.values.iter().copied()));
    let frame = Frame::new(1.0, n.max(2) as f64, ymin.min(0.0), ymax);
    let mut doc = SvgDoc::new(title);
    doc.axes(&frame, x_label, y_label);
    for s in series {
        let xs: Vec<f64> = (1..=s.values.len()).map(|i| i as f64).collect();
        doc.polyline(&frame, &xs, s.values, s.color, 2.0);
    }
    doc.legend(
        &series
            .iter()
            .map(|s| (s.name, s.color))
            .collect::<Vec<_>>(),
    );
    doc.finish()
}

/// Stacked area chart: the second band sits on top of the first.
pub fn stacked_area_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    lower: Series,
    upper: Series,
) -> String {
    let n = lower.values.len();
    let totals: Vec<f64> = lower
        .values
        .iter()
        .zip(upper.values)
        .map(|(a, b)| a + b)
        .collect();
    let (_, ymax) = bounds(totals.iter().copied());
    let frame = Frame::new(1.0, n.max(2) as f64, 0.0, ymax);
    let mut doc = SvgDoc::new(title);
    doc.axes(&frame, x_label, y_label);

    let area = |doc: &mut SvgDoc, tops: &[f64], bottoms: &[f64], color: &str| {
        let mut d = String::new();
        for (i, t) in tops.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            d.push_str(&format!(
                "{cmd}{:.2},{:.2} ",
                frame.sx((i + 1) as f64),
                frame.sy(*t)
            ));
        }
        for (i, b) in bottoms.iter().enumerate().rev() {
            d.push_str(&format!(
                "L{:.2},{:.2} ",
                frame.sx((i + 1) as f64),
                frame.sy(*b)
            ));
        }
        d.push('Z');
        doc.body.push_str(&format!(
            "  <path d=\"{}\" fill=\"{color}\" fill-opacity=\"0.75\" stroke=\"none\"/>\n",
            d.trim_end()
        ));
    };
    let zeros = vec![0.0; n];
    area(&mut doc, lower.values, &zeros, lower.color);
    area(&mut doc, &totals, lower.values, upper.color);
    doc.legend(&[(lower.name, lower.color), (upper.name, upper.color)]);
    doc.finish()
}

/// Cumulative-sum curves with turning points circled.
pub fn cusum_chart(
    title: &str,
    traces: &[(&str, &str, &[f64], &[usize])],
) -> String {
    let (ymin, ymax) = bounds(traces.iter().flat_map(|(_, _, s, _)| s.iter().copied()));
    let n = traces.iter().map(|(_, _, s, _)| s.len()).max().unwrap_or(0);
    let frame = Frame::new(1.0, n.max(2) as f64, ymin.min(0.0), ymax.max(0.0));
    let mut doc = SvgDoc::new(title);
    doc.axes(&frame, "point", "cumulative sum");

    // Zero reference line.
    let y0 = frame.sy(0.0);
    doc.body.push_str(&format!(
        "  <line x1=\"{:.2}\" y1=\"{y0:.2}\" x2=\"{:.2}\" y2=\"{y0:.2}\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n",
        MARGIN_LEFT,
        WIDTH - MARGIN_RIGHT
    ));

    for (_, color, s, turning) in traces {
        let xs: Vec<f64> = (1..=s.len()).map(|i| i as f64).collect();
        doc.polyline(&frame, &xs, s, color, 2.0);
        for &t in *turning {
            let cx = frame.sx(t as f64);
            let cy = frame.sy(s[t - 1]);
            doc.body.push_str(&format!(
                "  <circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"5\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>\n"
            ));
        }
    }
    doc.legend(
        &traces
            .iter()
            .map(|(name, color, _, _)| (*name, *color))
            .collect::<Vec<_>>(),
    );
    doc.finish()
}

/// Histogram bars (as density) with an optional smoothed curve.
pub fn density_chart(title: &str, x_label: &str, histogram: &Histogram, curve: Option<&DensityCurve>) -> String {
    let n: usize = histogram.counts.iter().sum();
    let densities: Vec<f64> = histogram
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let width = histogram.edges[i + 1] - histogram.edges[i];
            if width > 0.0 {
                c as f64 / (n as f64 * width)
            } else {
                0.0
            }
        })
        .collect();
    let mut ymax = densities.iter().cloned().fold(0.0, f64::max);
    let (mut xmin, mut xmax) = (histogram.edges[0], *histogram.edges.last().unwrap());
    if let Some(c) = curve {
        ymax = ymax.max(c.values.iter().cloned().fold(0.0, f64::max));
        xmin = xmin.min(c.grid[0]);
        xmax = xmax.max(*c.grid.last().unwrap());
    }
    let frame = Frame::new(xmin, xmax, 0.0, ymax);
    let mut doc = SvgDoc::new(title);
    doc.axes(&frame, x_label, "density");

    let y_base = frame.sy(0.0);
    for (i, d) in densities.iter().enumerate() {
        let x_left = frame.sx(histogram.edges[i]);
        let x_right = frame.sx(histogram.edges[i + 1]);
        let y_top = frame.sy(*d);
        doc.body.push_str(&format!(
            "  <rect x=\"{x_left:.2}\" y=\"{y_top:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#9ecae1\" stroke=\"#6baed6\" stroke-width=\"1\"/>\n",
            (x_right - x_left).max(0.0),
            (y_base - y_top).max(0.0)
        ));
    }
    if let Some(c) = curve {
        doc.polyline(&frame, &c.grid, &c.values, P2_COLOR, 2.0);
    }
    doc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        let ticks = nice_ticks(0.0, 10.0, 6);
        assert_eq!(ticks, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        let ticks = nice_ticks(-1.3, 1.3, 6);
        assert!(ticks.contains(&0.0));
    }

    #[test]
    fn line_chart_is_deterministic_and_tagged() {
        let s = [Series {
            name: "P1",
            color: P1_COLOR,
            values: &[0.0, 1.0, 0.5],
        }];
        let a = line_chart("t", "point", "momentum", &s);
        let b = line_chart("t", "point", "momentum", &s);
        assert_eq!(a, b);
        assert!(a.starts_with("<?xml"));
        assert!(a.contains("viewBox=\"0 0 960 540\""));
        assert!(a.ends_with("</svg>\n"));
    }

    #[test]
    fn escapes_titles() {
        let s = [Series {
            name: "a&b",
            color: P1_COLOR,
            values: &[1.0],
        }];
        let svg = line_chart("x < y", "point", "v", &s);
        assert!(svg.contains("x &lt; y"));
        assert!(svg.contains("a&amp;b"));
        assert!(!svg.contains("x < y"));
    }

    #[test]
    fn constant_series_does_not_collapse() {
        let s = [Series {
            name: "flat",
            color: P1_COLOR,
            values: &[2.0, 2.0, 2.0],
        }];
        let svg = line_chart("flat", "point", "v", &s);
        assert!(!svg.contains("NaN"));
        assert!(!svg.contains("inf"));
    }
}
