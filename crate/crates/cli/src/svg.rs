//! Minimal SVG histogram renderer for the evaluation report. Fixed canvas,
//! shared bins, overlaid translucent series. Plots are a convenience, not
//! an acceptance artifact.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 50.0;
const MARGIN_RIGHT: f64 = 15.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 45.0;
pub const BINS: usize = 30;

pub struct HistSeries<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub values: &'a [f64],
}

pub fn histogram_svg(title: &str, series: &[HistSeries<'_>]) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series {
        for &v in s.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let counts: Vec<Vec<usize>> = series
        .iter()
        .map(|s| {
            let mut bins = vec![0usize; BINS];
            for &v in s.values {
                let mut b = ((v - lo) / (hi - lo) * BINS as f64) as usize;
                if b >= BINS {
                    b = BINS - 1;
                }
                bins[b] += 1;
            }
            bins
        })
        .collect();
    // Normalize by each series' own size so differently sized sets compare.
    let fracs: Vec<Vec<f64>> = counts
        .iter()
        .zip(series)
        .map(|(bins, s)| {
            let n = s.values.len().max(1) as f64;
            bins.iter().map(|&c| c as f64 / n).collect()
        })
        .collect();
    let peak = fracs
        .iter()
        .flat_map(|b| b.iter().copied())
        .fold(0.0f64, f64::max)
        .max(1e-9);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let bin_w = plot_w / BINS as f64;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        title
    ));
    for (si, (s, f)) in series.iter().zip(&fracs).enumerate() {
        for (b, &frac) in f.iter().enumerate() {
            if frac == 0.0 {
                continue;
            }
            let h = frac / peak * plot_h;
            let x = MARGIN_LEFT + b as f64 * bin_w;
            let y = MARGIN_TOP + (plot_h - h);
            out.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bin_w:.2}\" height=\"{h:.2}\" fill=\"{}\" fill-opacity=\"0.45\"/>\n",
                s.color
            ));
        }
        let legend_y = MARGIN_TOP + 14.0 * si as f64;
        out.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{}\" fill-opacity=\"0.45\"/>\n",
            MARGIN_LEFT + 8.0,
            legend_y,
            s.color
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{} (n={})</text>\n",
            MARGIN_LEFT + 22.0,
            legend_y + 9.0,
            s.label,
            s.values.len()
        ));
    }
    // Axes and range labels.
    out.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_BOTTOM,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM
    ));
    out.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_BOTTOM
    ));
    out.push_str(&format!(
        "<text x=\"{MARGIN_LEFT}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{lo:.4}</text>\n",
        HEIGHT - MARGIN_BOTTOM + 16.0
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{hi:.4}</text>\n",
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM + 16.0
    ));
    out.push_str("</svg>\n");
    out
}
