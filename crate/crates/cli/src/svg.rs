//! Minimal SVG emission: data series become `<polyline>` elements, star
//! markers become `<path>` elements, axes use `<line>`. Well-formed XML by
//! construction.

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Plot {
    pub title: String,
    pub series: Vec<Series>,
    /// Plotted as star markers (one `<path>` each), not as a polyline.
    pub markers: Vec<(f64, f64)>,
    pub log_x: bool,
    pub log_y: bool,
}

const W: f64 = 720.0;
const H: f64 = 540.0;
const MARGIN: f64 = 56.0;

fn transform(v: f64, log: bool) -> f64 {
    if log {
        v.max(1e-300).log10()
    } else {
        v
    }
}

impl Plot {
    pub fn render(&self) -> String {
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        let all = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .chain(self.markers.iter());
        for &(x, y) in all {
            let (x, y) = (transform(x, self.log_x), transform(y, self.log_y));
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
        if !min_x.is_finite() {
            (min_x, max_x, min_y, max_y) = (0.0, 1.0, 0.0, 1.0);
        }
        if max_x - min_x < 1e-12 {
            max_x = min_x + 1.0;
        }
        if max_y - min_y < 1e-12 {
            max_y = min_y + 1.0;
        }
        let px = |x: f64| MARGIN + (transform(x, self.log_x) - min_x) / (max_x - min_x) * (W - 2.0 * MARGIN);
        let py = |y: f64| H - MARGIN - (transform(y, self.log_y) - min_y) / (max_y - min_y) * (H - 2.0 * MARGIN);

        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
        ));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "<text x=\"{}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
            W / 2.0,
            escape(&self.title)
        ));

        // frame and ticks
        out.push_str(&format!(
            "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
            m = MARGIN,
            b = H - MARGIN,
            r = W - MARGIN
        ));
        out.push_str(&format!(
            "<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
            m = MARGIN,
            t = MARGIN,
            b = H - MARGIN
        ));
        for i in 0..=4 {
            let fx = min_x + (max_x - min_x) * i as f64 / 4.0;
            let fy = min_y + (max_y - min_y) * i as f64 / 4.0;
            let sx = MARGIN + (W - 2.0 * MARGIN) * i as f64 / 4.0;
            let sy = H - MARGIN - (H - 2.0 * MARGIN) * i as f64 / 4.0;
            let label_x = if self.log_x { format!("1e{fx:.1}") } else { format!("{fx:.3}") };
            let label_y = if self.log_y { format!("1e{fy:.1}") } else { format!("{fy:.3}") };
            out.push_str(&format!(
                "<line x1=\"{sx}\" y1=\"{b}\" x2=\"{sx}\" y2=\"{b2}\" stroke=\"black\"/>\n",
                b = H - MARGIN,
                b2 = H - MARGIN + 5.0
            ));
            out.push_str(&format!(
                "<text x=\"{sx}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{label_x}</text>\n",
                H - MARGIN + 18.0
            ));
            out.push_str(&format!(
                "<line x1=\"{m}\" y1=\"{sy}\" x2=\"{m2}\" y2=\"{sy}\" stroke=\"black\"/>\n",
                m = MARGIN,
                m2 = MARGIN - 5.0
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{label_y}</text>\n",
                MARGIN - 8.0,
                sy + 4.0
            ));
        }

        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = series
                .points
                .iter()
                .map(|&(x, y)| format!("{:.3},{:.3}", px(x), py(y)))
                .collect();
            out.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                pts.join(" ")
            ));
            if !series.label.is_empty() {
                let lx = W - MARGIN - 110.0;
                let ly = MARGIN + 16.0 * (i as f64 + 1.0);
                out.push_str(&format!(
                    "<text x=\"{lx}\" y=\"{ly}\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
                    escape(&series.label)
                ));
            }
        }

        for &(x, y) in &self.markers {
            out.push_str(&star_path(px(x), py(y), 6.0));
        }

        out.push_str("</svg>\n");
        out
    }
}

/// Five-pointed star centered at `(cx, cy)`.
fn star_path(cx: f64, cy: f64, r: f64) -> String {
    let mut d = String::new();
    for i in 0..10 {
        let radius = if i % 2 == 0 { r } else { 0.4 * r };
        let angle = std::f64::consts::PI * (i as f64 / 5.0 - 0.5);
        let x = cx + radius * angle.cos();
        let y = cy + radius * angle.sin();
        d.push_str(&format!("{}{x:.3} {y:.3} ", if i == 0 { "M" } else { "L" }));
    }
    format!("<path d=\"{}Z\" fill=\"#d62728\" stroke=\"none\"/>\n", d.trim_end())
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
