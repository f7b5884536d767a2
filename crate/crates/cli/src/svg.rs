//! Dependency-free SVG plots.
//!
//! Every renderer has a companion `*_csv` function that writes exactly the
//! vertices the plot draws. Coordinates are printed with two decimals, so a
//! fixed input always produces the same bytes.

use std::fmt::Write as _;

use circlaw_core::hermitization::{EmpiricalMeasure, ReferenceLaw};
use circlaw_core::Complex64;
use serde::Serialize;

const PALETTE: [&str; 4] = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

struct Frame {
    width: f64,
    height: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(width: f64, height: f64, x: (f64, f64), y: (f64, f64)) -> Self {
        Self {
            width,
            height,
            left: 64.0,
            right: 24.0,
            top: 40.0,
            bottom: 48.0,
            x,
            y,
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x.0) / (self.x.1 - self.x.0) * (self.width - self.left - self.right)
    }

    fn py(&self, y: f64) -> f64 {
        self.height - self.bottom - (y - self.y.0) / (self.y.1 - self.y.0) * (self.height - self.top - self.bottom)
    }

    fn open(&self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut s = String::new();
        let (w, h) = (self.width, self.height);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            w / 2.0,
            escape(title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (self.left + w - self.right) / 2.0,
            h - 10.0,
            escape(xlabel)
        );
        let cy = (self.top + h - self.bottom) / 2.0;
        let _ = writeln!(
            s,
            r#"<text x="16" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 16 {cy:.2})">{}</text>"#,
            escape(ylabel)
        );
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            self.left,
            self.top,
            w - self.left - self.right,
            h - self.top - self.bottom
        );
        s
    }

    fn x_ticks(&self, s: &mut String, ticks: &[(f64, String)]) {
        let y0 = self.height - self.bottom;
        for (v, label) in ticks {
            let x = self.px(*v);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/>"##,
                y0 + 4.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                y0 + 16.0,
                escape(label)
            );
        }
    }

    fn y_ticks(&self, s: &mut String, ticks: &[(f64, String)]) {
        for (v, label) in ticks {
            let y = self.py(*v);
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#444"/>"##,
                self.left - 4.0,
                self.left
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                self.left - 6.0,
                y + 4.0,
                escape(label)
            );
        }
    }

    fn polyline(&self, s: &mut String, pts: &[(f64, f64)], color: &str) {
        if pts.is_empty() {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
    }

    fn legend(&self, s: &mut String, entries: &[(&str, &str)]) {
        let x = self.width - self.right - 150.0;
        for (k, (name, color)) in entries.iter().enumerate() {
            let y = self.top + 14.0 + 14.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                y - 4.0,
                x + 18.0,
                y - 4.0
            );
            let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}">{}</text>"#, x + 24.0, escape(name));
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn linear_ticks(lo: f64, hi: f64, count: usize) -> Vec<(f64, String)> {
    (0..=count)
        .map(|k| {
            let v = lo + (hi - lo) * k as f64 / count as f64;
            (v, format!("{v:.2}"))
        })
        .collect()
}

/// Reference circle drawn over an eigenvalue scatter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Overlay {
    pub center: Complex64,
    pub radius: f64,
    pub label: String,
}

impl Overlay {
    pub fn unit_circle() -> Self {
        Self {
            center: Complex64::new(0.0, 0.0),
            radius: 1.0,
            label: "unit circle".into(),
        }
    }
}

pub fn scatter_csv(esd: &EmpiricalMeasure<Complex64>) -> String {
    let mut s = String::from("index,re,im\n");
    for (k, z) in esd.atoms().iter().enumerate() {
        let _ = writeln!(s, "{k},{:?},{:?}", z.re, z.im);
    }
    s
}

/// Eigenvalue scatter with a circle overlay.
pub fn render_scatter(esd: &EmpiricalMeasure<Complex64>, overlay: &Overlay) -> String {
    let reach = esd
        .atoms()
        .iter()
        .map(|z| z.norm())
        .filter(|r| r.is_finite())
        .fold(overlay.center.norm() + overlay.radius, f64::max);
    let r = if reach > 0.0 { 1.1 * reach } else { 1.0 };
    let f = Frame::new(480.0, 480.0, (-r, r), (-r, r));
    let mut s = f.open(&format!("eigenvalues ({} atoms)", esd.len()), "Re", "Im");
    let ticks = linear_ticks(-r, r, 4);
    f.x_ticks(&mut s, &ticks);
    f.y_ticks(&mut s, &ticks);
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbb" stroke-dasharray="4 3"/>"##,
        f.px(-r),
        f.py(0.0),
        f.px(r),
        f.py(0.0)
    );
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#bbb" stroke-dasharray="4 3"/>"##,
        f.px(0.0),
        f.py(-r),
        f.px(0.0),
        f.py(r)
    );
    let scale = (f.px(r) - f.px(-r)) / (2.0 * r);
    let _ = writeln!(
        s,
        r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
        f.px(overlay.center.re),
        f.py(overlay.center.im),
        overlay.radius * scale,
        PALETTE[0]
    );
    let _ = writeln!(s, r##"<g fill="#1f77b4" fill-opacity="0.6">"##);
    for z in esd.atoms().iter().filter(|z| z.re.is_finite() && z.im.is_finite()) {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.5"/>"#, f.px(z.re), f.py(z.im));
    }
    s.push_str("</g>\n");
    f.legend(&mut s, &[(overlay.label.as_str(), PALETTE[0])]);
    s.push_str("</svg>\n");
    s
}

/// Named lower-bound curve, as `(k, value)` points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCurve {
    pub name: String,
    pub points: Vec<(usize, f64)>,
}

/// Columns `k,s` followed by one column per bound, empty where the bound
/// does not apply.
pub fn sv_profile_csv(svals: &[f64], bounds: &[BoundCurve]) -> String {
    let mut s = String::from("k,s");
    for b in bounds {
        s.push(',');
        s.push_str(&b.name);
    }
    s.push('\n');
    for (i, v) in svals.iter().enumerate() {
        let k = i + 1;
        let _ = write!(s, "{k},{v:?}");
        for b in bounds {
            s.push(',');
            if let Some(&(_, y)) = b.points.iter().find(|p| p.0 == k) {
                let _ = write!(s, "{y:?}");
            }
        }
        s.push('\n');
    }
    s
}

/// Singular values against their index on a log scale, with bound curves.
/// Nonpositive values are drawn on the bottom edge.
pub fn render_sv_profile(svals: &[f64], bounds: &[BoundCurve]) -> String {
    let n = svals.len().max(1);
    let positive = svals
        .iter()
        .copied()
        .chain(bounds.iter().flat_map(|b| b.points.iter().map(|p| p.1)))
        .filter(|v| *v > 0.0 && v.is_finite());
    let (lo, hi) = positive.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v.log10()), b.max(v.log10()))
    });
    let (lo, hi) = if lo.is_finite() {
        (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
    } else {
        (-1.0, 1.0)
    };
    let x_hi = if n > 1 { n as f64 } else { 2.0 };
    let f = Frame::new(640.0, 400.0, (1.0, x_hi), (lo, hi));
    let mut s = f.open("singular value profile", "k", "log10 s_k");
    let xt: Vec<(f64, String)> = (0..=4)
        .map(|j| {
            let k = (1.0 + (x_hi - 1.0) * j as f64 / 4.0).round();
            (k, format!("{k}"))
        })
        .collect();
    f.x_ticks(&mut s, &xt);
    let step = ((hi - lo) / 8.0).ceil().max(1.0);
    let mut yt = Vec::new();
    let mut v = lo;
    while v <= hi {
        yt.push((v, format!("{v}")));
        v += step;
    }
    f.y_ticks(&mut s, &yt);
    let log = |v: f64| {
        if v > 0.0 && v.is_finite() {
            v.log10().max(lo)
        } else {
            lo
        }
    };
    let pts: Vec<(f64, f64)> = svals
        .iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64, log(v)))
        .collect();
    f.polyline(&mut s, &pts, "#1f77b4");
    let mut legend = vec![("s_k", "#1f77b4")];
    for (b, color) in bounds.iter().zip(PALETTE.iter().cycle()) {
        let pts: Vec<(f64, f64)> = b.points.iter().map(|&(k, v)| (k as f64, log(v))).collect();
        if pts.len() == 1 {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                f.px(pts[0].0),
                f.py(pts[0].1)
            );
        } else {
            f.polyline(&mut s, &pts, color);
        }
        legend.push((b.name.as_str(), color));
    }
    f.legend(&mut s, &legend);
    s.push_str("</svg>\n");
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialCdfRow {
    pub r: f64,
    pub r2: f64,
    pub empirical: f64,
    pub reference: f64,
}

/// Vertices of the radial CDF plot: the origin, one row per atom in order
/// of modulus, and a closing row at the right edge.
pub fn radial_cdf_rows(esd: &EmpiricalMeasure<Complex64>, law: &ReferenceLaw) -> Vec<RadialCdfRow> {
    let mut radii: Vec<f64> = esd.atoms().iter().map(|z| z.norm()).collect();
    radii.sort_by(f64::total_cmp);
    let n = radii.len().max(1) as f64;
    let mut rows = vec![RadialCdfRow {
        r: 0.0,
        r2: 0.0,
        empirical: 0.0,
        reference: 0.0,
    }];
    for (i, &r) in radii.iter().enumerate() {
        rows.push(RadialCdfRow {
            r,
            r2: r * r,
            empirical: (i + 1) as f64 / n,
            reference: law.radial_cdf(r),
        });
    }
    let edge = law.support_radius().max(radii.last().copied().unwrap_or(0.0));
    if edge > 0.0 {
        rows.push(RadialCdfRow {
            r: edge,
            r2: edge * edge,
            empirical: if radii.is_empty() { 0.0 } else { 1.0 },
            reference: law.radial_cdf(edge),
        });
    }
    rows
}

pub fn radial_cdf_csv(esd: &EmpiricalMeasure<Complex64>, law: &ReferenceLaw) -> String {
    let mut s = String::from("r,r2,empirical,reference\n");
    for row in radial_cdf_rows(esd, law) {
        let _ = writeln!(s, "{:?},{:?},{:?},{:?}", row.r, row.r2, row.empirical, row.reference);
    }
    s
}

/// Empirical radial CDF (a staircase in `r^2`) against the reference law.
pub fn render_radial_cdf(esd: &EmpiricalMeasure<Complex64>, law: &ReferenceLaw) -> String {
    let rows = radial_cdf_rows(esd, law);
    let x_hi = rows.last().map(|r| r.r2).filter(|&v| v > 0.0).unwrap_or(1.0);
    let f = Frame::new(640.0, 400.0, (0.0, x_hi), (0.0, 1.0));
    let mut s = f.open("radial CDF", "r^2", "P(|lambda| <= r)");
    f.x_ticks(&mut s, &linear_ticks(0.0, x_hi, 4));
    f.y_ticks(&mut s, &linear_ticks(0.0, 1.0, 4));
    let mut stair = Vec::with_capacity(2 * rows.len());
    let mut prev = 0.0;
    for row in &rows {
        stair.push((row.r2, prev));
        stair.push((row.r2, row.empirical));
        prev = row.empirical;
    }
    let reference: Vec<(f64, f64)> = rows.iter().map(|row| (row.r2, row.reference)).collect();
    f.polyline(&mut s, &reference, PALETTE[0]);
    f.polyline(&mut s, &stair, "#1f77b4");
    let name = match law {
        ReferenceLaw::Circular => "circular law".to_string(),
        ReferenceLaw::KestenMcKay { d } => format!("Kesten-McKay, d = {d}"),
    };
    f.legend(&mut s, &[("empirical", "#1f77b4"), (name.as_str(), PALETTE[0])]);
    s.push_str("</svg>\n");
    s
}
