use std::fmt::Write as _;

use super::{BenchRecord, ScalingFit};
use crate::blocks::Method;
use crate::error::Result;

const HEADER: [&str; 8] = [
    "method",
    "n",
    "c",
    "d",
    "trials",
    "median_ns",
    "flops",
    "peak_elems",
];

/// CSV with the header `method,n,c,d,trials,median_ns,flops,peak_elems`,
/// written even when there are no records.
pub fn emit_csv(records: &[BenchRecord]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<BenchRecord>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(crate::error::Error::Parse {
            line: 1,
            detail: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    Ok(r.deserialize()
        .collect::<std::result::Result<Vec<BenchRecord>, _>>()?)
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

fn colour(m: Method) -> &'static str {
    match m {
        Method::Nl => "#d62728",
        Method::Enl => "#ff7f0e",
        Method::PolyNl => "#2ca02c",
        Method::LatentGnn => "#1f77b4",
        Method::Conv1x1 => "#7f7f7f",
    }
}

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn px(&self, n: f64) -> f64 {
        let (lo, hi) = self.x;
        LEFT + (n.log10() - lo) / (hi - lo) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, t: f64) -> f64 {
        let (lo, hi) = self.y;
        HEIGHT - BOTTOM - (t.log10() - lo) / (hi - lo) * (HEIGHT - TOP - BOTTOM)
    }
}

fn decade_range(values: impl Iterator<Item = f64>, default: (f64, f64)) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| *v > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return default;
    }
    let (lo, hi) = (lo.log10().floor(), hi.log10().ceil());
    if hi > lo {
        (lo, hi)
    } else {
        (lo, lo + 1.0)
    }
}

/// Log-log scatter of median time against N, one colour per method, with the
/// fitted power laws drawn as lines. Self-contained SVG.
pub fn emit_svg(records: &[BenchRecord], fits: &[ScalingFit]) -> String {
    let axes = Axes {
        x: decade_range(records.iter().map(|r| r.n as f64), (2.0, 5.0)),
        y: decade_range(records.iter().map(|r| r.median_ns as f64), (3.0, 9.0)),
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" stroke="black" fill="none"/>"#
    );
    for e in axes.x.0 as i32..=axes.x.1 as i32 {
        let x = axes.px(10f64.powi(e));
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{e}</text>"#,
            y0 + 5.0,
            y0 + 20.0
        );
    }
    for e in axes.y.0 as i32..=axes.y.1 as i32 {
        let y = axes.py(10f64.powi(e));
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">spatial positions N</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">median time (ns)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for r in records {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"><title>{} N={} C={} d={}: {} ns</title></circle>"#,
            axes.px(r.n as f64),
            axes.py(r.median_ns as f64),
            colour(r.method),
            r.method,
            r.n,
            r.c,
            r.d,
            r.median_ns
        );
    }

    for f in fits {
        let ns = records
            .iter()
            .filter(|r| r.method == f.method && r.c == f.c)
            .map(|r| r.n as f64);
        let (lo, hi) = ns.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), n| {
            (a.min(n), b.max(n))
        });
        if !lo.is_finite() {
            continue;
        }
        let at = |n: f64| (f.intercept + f.exponent * n.ln()).exp();
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-dasharray="5,3"/>"#,
            axes.px(lo),
            axes.py(at(lo)),
            axes.px(hi),
            axes.py(at(hi)),
            colour(f.method)
        );
    }

    let mut legend_y = TOP + 10.0;
    let lx = WIDTH - RIGHT + 15.0;
    for m in Method::ALL {
        if !records.iter().any(|r| r.method == m) {
            continue;
        }
        let label = fits
            .iter()
            .filter(|f| f.method == m)
            .map(|f| format!(" C={}: {:.2}", f.c, f.exponent))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{legend_y:.2}">{m}{}</text>"#,
            legend_y - 9.0,
            colour(m),
            lx + 15.0,
            if label.is_empty() {
                String::new()
            } else {
                format!(" (slope{label})")
            }
        );
        legend_y += 18.0;
    }
    s.push_str("</svg>\n");
    s
}
