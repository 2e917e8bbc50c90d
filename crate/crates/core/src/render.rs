//! Deterministic SVG output for medal plots.
//!
//! Layers are emitted strictly in order: base map, all outer (red/blue)
//! disks, all annulus disks, all joint (gold) disks. Coordinates are printed
//! with three decimals so identical inputs give identical bytes.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::diagnostics::{build_medals, Medal, RimColor, UpdateDiagnostics, DEFAULT_MIN_RIM};
use crate::{Error, Result};

pub const RED: &str = "#c0392b";
pub const BLUE: &str = "#2e6da4";
pub const GOLD: &str = "#d4a017";
pub const LIGHT_BLUE: &str = "#add8e6";
pub const WHITE: &str = "#ffffff";
pub const DEFAULT_ALPHA: f64 = 0.6;

/// World-to-canvas map `x' = a x + b y + e`, `y' = c x + d y + f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine { a: 1.0, b: 0.0, c: 0.0, d: 1.0, e: 0.0, f: 0.0 };

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [self.a * p[0] + self.b * p[1] + self.e, self.c * p[0] + self.d * p[1] + self.f]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Length scale applied to radii: `√|det|`.
    pub fn length_scale(&self) -> f64 {
        libm::sqrt(self.det().abs())
    }

    pub fn is_invertible(&self) -> bool {
        let det = self.det();
        det.is_finite() && det != 0.0 && [self.e, self.f].iter().all(|v| v.is_finite())
    }

    /// Uniform scale with the y axis pointing up, fitting the world box
    /// `[min, max]` into a `width × height` canvas with `margin` pixels.
    pub fn fit(min: [f64; 2], max: [f64; 2], width: f64, height: f64, margin: f64) -> Affine {
        let span_x = (max[0] - min[0]).max(1e-12);
        let span_y = (max[1] - min[1]).max(1e-12);
        let s = ((width - 2.0 * margin) / span_x).min((height - 2.0 * margin) / span_y);
        let ox = margin + 0.5 * (width - 2.0 * margin - s * span_x);
        let oy = margin + 0.5 * (height - 2.0 * margin - s * span_y);
        Affine { a: s, b: 0.0, c: 0.0, d: -s, e: ox - s * min[0], f: height - oy + s * min[1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnnulusStyle {
    White,
    /// Semi-transparent light blue, letting the base map show through.
    Translucent { alpha: f64 },
}

impl Default for AnnulusStyle {
    fn default() -> Self {
        AnnulusStyle::Translucent { alpha: DEFAULT_ALPHA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineStyle {
    #[default]
    Solid,
    Dashed,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub style: LineStyle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    pub transform: Affine,
    pub annulus: AnnulusStyle,
    pub base_map: Vec<Polyline>,
    /// World units per standard deviation.
    pub medal_scale: f64,
    pub min_rim: f64,
}

impl PlotSpec {
    pub fn new(width: u32, height: u32, transform: Affine) -> Self {
        PlotSpec {
            width,
            height,
            transform,
            annulus: AnnulusStyle::default(),
            base_map: Vec::new(),
            medal_scale: 1.0,
            min_rim: DEFAULT_MIN_RIM,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.transform.is_invertible() {
            return Err(Error::InvalidTransform);
        }
        if let AnnulusStyle::Translucent { alpha } = self.annulus {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::InvalidSpec("annulus alpha must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        String::from("0.000")
    } else {
        s
    }
}

fn circle(out: &mut String, center: [f64; 2], r: f64, fill: Option<&str>) {
    let _ = write!(out, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"", num(center[0]), num(center[1]), num(r));
    if let Some(fill) = fill {
        let _ = write!(out, " fill=\"{fill}\"");
    }
    out.push_str("/>\n");
}

pub fn render_medals(medals: &[Medal], spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    if medals.iter().any(|m| !(m.center.iter().chain(&[m.r_bound, m.r_local, m.r_joint]).all(|v| v.is_finite()))) {
        return Err(Error::NonFinite { what: "medal geometry" });
    }
    let t = &spec.transform;
    let k = t.length_scale();
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = spec.width,
        h = spec.height
    );
    out.push_str("<g id=\"base-map\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\">\n");
    for line in &spec.base_map {
        out.push_str("<polyline points=\"");
        for (i, &p) in line.points.iter().enumerate() {
            let q = t.apply(p);
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{},{}", num(q[0]), num(q[1]));
        }
        out.push('"');
        if line.style == LineStyle::Dashed {
            out.push_str(" stroke-dasharray=\"6,4\"");
        }
        out.push_str("/>\n");
    }
    out.push_str("</g>\n");

    out.push_str("<g id=\"bound-disks\" stroke=\"none\">\n");
    for m in medals {
        let fill = match m.rim_color {
            RimColor::Red => RED,
            RimColor::Blue => BLUE,
        };
        circle(&mut out, t.apply(m.center), k * m.r_bound, Some(fill));
    }
    out.push_str("</g>\n");

    match spec.annulus {
        AnnulusStyle::White => {
            let _ = writeln!(out, "<g id=\"annulus-disks\" stroke=\"none\" fill=\"{WHITE}\">");
        }
        AnnulusStyle::Translucent { alpha } => {
            let _ = writeln!(
                out,
                "<g id=\"annulus-disks\" stroke=\"none\" fill=\"{LIGHT_BLUE}\" fill-opacity=\"{}\">",
                num(alpha)
            );
        }
    }
    for m in medals {
        circle(&mut out, t.apply(m.center), k * m.r_local, None);
    }
    out.push_str("</g>\n");

    let _ = writeln!(out, "<g id=\"joint-disks\" stroke=\"none\" fill=\"{GOLD}\">");
    for m in medals {
        circle(&mut out, t.apply(m.center), k * m.r_joint, None);
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// Builds medals from diagnostics with the spec's scale and rim floor, then
/// renders them.
pub fn render_report_figure(d: &UpdateDiagnostics, locations: &[[f64; 2]], spec: &PlotSpec) -> Result<String> {
    let medals = build_medals(d, locations, spec.medal_scale, spec.min_rim)?;
    render_medals(&medals, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn empty_plot_has_only_base_map() {
        let mut spec = PlotSpec::new(100, 100, Affine::IDENTITY);
        spec.base_map.push(Polyline { points: vec![[0.0, 0.0], [10.0, 10.0]], style: LineStyle::Dashed });
        let svg = render_medals(&[], &spec).unwrap();
        assert_eq!(svg.matches("<circle").count(), 0);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn degenerate_transform_rejected() {
        let t = Affine { a: 1.0, b: 2.0, c: 2.0, d: 4.0, e: 0.0, f: 0.0 };
        assert_eq!(render_medals(&[], &PlotSpec::new(10, 10, t)).unwrap_err(), Error::InvalidTransform);
    }

    #[test]
    fn fit_maps_box_corners_inside_canvas() {
        let t = Affine::fit([-10.0, -5.0], [10.0, 5.0], 200.0, 100.0, 10.0);
        let lo = t.apply([-10.0, -5.0]);
        let hi = t.apply([10.0, 5.0]);
        assert!(lo[1] > hi[1], "y axis points up");
        for p in [lo, hi] {
            assert!((0.0..=200.0).contains(&p[0]) && (0.0..=100.0).contains(&p[1]));
        }
    }
}
