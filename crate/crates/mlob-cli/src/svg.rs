//! Minimal native SVG line/scatter plots for the diagnostic figures.
//! CSVs are the contract; these are for eyeballs.

use std::fmt::Write;

const COLORS: [&str; 8] = [
    "#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#f39c12", "#16a085", "#7f8c8d", "#d35400",
];

const PANEL_W: f64 = 800.0;
const PANEL_H: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub scatter: bool,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    /// Draw the y = x reference line.
    pub diagonal: bool,
    pub series: Vec<Series>,
}

impl Panel {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Panel {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            diagonal: false,
            series: Vec::new(),
        }
    }

    pub fn line(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            label: label.into(),
            points,
            scatter: false,
        });
        self
    }

    pub fn scatter(mut self, label: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            label: label.into(),
            points,
            scatter: true,
        });
        self
    }

    pub fn log_log(mut self) -> Self {
        self.log_x = true;
        self.log_y = true;
        self
    }

    pub fn with_diagonal(mut self) -> Self {
        self.diagonal = true;
        self
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                let (x, y) = (tx(x, self.log_x), tx(y, self.log_y));
                if x.is_finite() && y.is_finite() {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        let span = |v: &[f64]| -> (f64, f64) {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() || !hi.is_finite() {
                (0.0, 1.0)
            } else if lo == hi {
                (lo - 0.5, hi + 0.5)
            } else {
                let pad = 0.04 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        (span(&xs), span(&ys))
    }

    fn render_into(&self, out: &mut String, y_off: f64) {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let px = |x: f64| MARGIN_L + (tx(x, self.log_x) - x0) / (x1 - x0) * (PANEL_W - MARGIN_L - MARGIN_R);
        let py = |y: f64| {
            y_off + PANEL_H - MARGIN_B
                - (tx(y, self.log_y) - y0) / (y1 - y0) * (PANEL_H - MARGIN_T - MARGIN_B)
        };
        let plot_r = PANEL_W - MARGIN_R;
        let plot_b = y_off + PANEL_H - MARGIN_B;

        let _ = writeln!(
            out,
            r#"<text x="{:.0}" y="{:.0}" font-size="15" font-weight="bold">{}</text>"#,
            MARGIN_L,
            y_off + 20.0,
            esc(&self.title)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{MARGIN_L:.0}" y="{:.0}" width="{:.0}" height="{:.0}" fill="none" stroke="#555"/>"##,
            y_off + MARGIN_T,
            plot_r - MARGIN_L,
            PANEL_H - MARGIN_T - MARGIN_B
        );

        // axis ticks: 5 per axis (decade-aligned values look fine in log too)
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            let x_val = untx(fx, self.log_x);
            let y_val = untx(fy, self.log_y);
            let xp = MARGIN_L + (plot_r - MARGIN_L) * i as f64 / 4.0;
            let yp = plot_b - (PANEL_H - MARGIN_T - MARGIN_B) * i as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{xp:.0}" y="{:.0}" font-size="11" text-anchor="middle">{}</text>"#,
                plot_b + 16.0,
                fmt_tick(x_val)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.0}" y="{yp:.0}" font-size="11" text-anchor="end">{}</text>"#,
                MARGIN_L - 6.0,
                fmt_tick(y_val)
            );
            let _ = writeln!(
                out,
                r##"<line x1="{MARGIN_L:.0}" y1="{yp:.1}" x2="{plot_r:.0}" y2="{yp:.1}" stroke="#ddd"/>"##
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.0}" y="{:.0}" font-size="12" text-anchor="middle">{}</text>"#,
            (MARGIN_L + plot_r) / 2.0,
            plot_b + 34.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.0}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.0})">{}</text>"#,
            y_off + PANEL_H / 2.0,
            y_off + PANEL_H / 2.0,
            esc(&self.y_label)
        );

        if self.diagonal {
            let lo = untx(x0.max(y0), self.log_x);
            let hi = untx(x1.min(y1), self.log_x);
            let _ = writeln!(
                out,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#999" stroke-dasharray="5,4"/>"##,
                px(lo),
                py(lo),
                px(hi),
                py(hi)
            );
        }

        for (si, series) in self.series.iter().enumerate() {
            let color = COLORS[si % COLORS.len()];
            if series.scatter {
                for &(x, y) in &series.points {
                    if tx(x, self.log_x).is_finite() && tx(y, self.log_y).is_finite() {
                        let _ = writeln!(
                            out,
                            r#"<circle cx="{:.1}" cy="{:.1}" r="3.2" fill="{color}" fill-opacity="0.75"/>"#,
                            px(x),
                            py(y)
                        );
                    }
                }
            } else {
                let mut d = String::new();
                let mut pen_down = false;
                for &(x, y) in &series.points {
                    if tx(x, self.log_x).is_finite() && tx(y, self.log_y).is_finite() {
                        let cmd = if pen_down { 'L' } else { 'M' };
                        let _ = write!(d, "{cmd}{:.1} {:.1} ", px(x), py(y));
                        pen_down = true;
                    } else {
                        pen_down = false;
                    }
                }
                let _ = writeln!(
                    out,
                    r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.6"/>"#
                );
            }
            let ly = y_off + MARGIN_T + 16.0 + 18.0 * si as f64;
            let _ = writeln!(
                out,
                r#"<line x1="{:.0}" y1="{ly:.0}" x2="{:.0}" y2="{ly:.0}" stroke="{color}" stroke-width="3"/>"#,
                plot_r + 10.0,
                plot_r + 30.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.0}" y="{:.0}" font-size="11">{}</text>"#,
                plot_r + 36.0,
                ly + 4.0,
                esc(&series.label)
            );
        }
    }
}

/// Renders stacked panels into one SVG document, stamped with the manifest
/// hash and a generation timestamp (the only line that varies between
/// identical runs).
pub fn render(panels: &[Panel], manifest_hash: &str) -> String {
    let height = PANEL_H * panels.len() as f64;
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W:.0}" height="{height:.0}" font-family="Helvetica,Arial,sans-serif">"#
    );
    let _ = writeln!(out, "<!-- manifest {manifest_hash} -->");
    let _ = writeln!(out, "<!-- generated unix:{now} -->");
    let _ = writeln!(
        out,
        r#"<rect width="100%" height="100%" fill="white"/>"#
    );
    for (i, p) in panels.iter().enumerate() {
        p.render_into(&mut out, PANEL_H * i as f64);
    }
    out.push_str("</svg>\n");
    out
}

pub fn write(path: &std::path::Path, panels: &[Panel], manifest_hash: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, render(panels, manifest_hash))?;
    Ok(())
}

fn tx(v: f64, log: bool) -> f64 {
    if log {
        if v > 0.0 {
            v.log10()
        } else {
            f64::NAN
        }
    } else {
        v
    }
}

fn untx(v: f64, log: bool) -> f64 {
    if log {
        10f64.powf(v)
    } else {
        v
    }
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && (a >= 1e5 || a < 1e-3) {
        format!("{v:.2e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
