//! SVG rendering of region diagrams and assignment chains.
//!
//! All coordinates are printed with three decimals so output is byte-stable.

use std::fmt::Write;

use crate::equilibrium::{CooperationOutcome, Point, RegionGeometry};
use crate::reactive_design::{AssignmentChain, Task};
use crate::scalar::Scalar;

const WIDTH: f64 = 520.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;

fn fill(outcome: CooperationOutcome) -> &'static str {
    match outcome {
        CooperationOutcome::Total => "#9ecae1",
        CooperationOutcome::OnlyGood => "#a1d99b",
        CooperationOutcome::OnlyBad => "#fdae6b",
        CooperationOutcome::None => "#eeeeee",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn map(&self, p: Point) -> (f64, f64) {
        let w = WIDTH - 2.0 * MARGIN;
        let h = HEIGHT - 2.0 * MARGIN;
        (MARGIN + p.x / self.x_max * w, HEIGHT - MARGIN - p.y / self.y_max * h)
    }

    fn polygon(&self, out: &mut String, pts: &[Point], color: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"  <polygon points="{}" fill="{color}" stroke="none"/>"#,
            coords.join(" ")
        );
    }

    fn label(&self, out: &mut String, p: Point, text: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(
            out,
            r#"  <text x="{x:.3}" y="{y:.3}" font-size="13" text-anchor="middle">{}</text>"#,
            escape(text)
        );
    }

    fn line(&self, out: &mut String, a: Point, b: Point, style: &str) {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        let _ = writeln!(
            out,
            r#"  <line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" {style}/>"#
        );
    }
}

fn pt(x: f64, y: f64) -> Point {
    Point { x, y }
}

fn centroid(pts: &[Point]) -> Point {
    let n = pts.len() as f64;
    pt(pts.iter().map(|p| p.x).sum::<f64>() / n, pts.iter().map(|p| p.y).sum::<f64>() / n)
}

/// Cooperation regions in the `(δ/(1−δ)·p_B, δ/(1−δ)·p_G)` plane, with an
/// optional environment marker.
pub fn regions_svg(geometry: &RegionGeometry, marker: Option<Point>) -> String {
    let x0 = geometry.total_line.to.x;
    let y0 = geometry.total_line.from.y;
    let (mx, my) = marker.map_or((0.0, 0.0), |p| (p.x, p.y));
    let frame = Frame {
        x_max: 1.3 * x0.max(mx),
        y_max: 1.3 * y0.max(my),
    };
    let outcome = |id: u8| geometry.outcome_of(id).unwrap_or(CooperationOutcome::None);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}">"#
    );
    let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#);

    let total = [pt(0.0, y0), pt(x0, 0.0), pt(frame.x_max, 0.0), pt(frame.x_max, frame.y_max), pt(0.0, frame.y_max)];
    frame.polygon(&mut out, &total, fill(outcome(2)));
    let below = [pt(0.0, 0.0), pt(x0, 0.0), pt(0.0, y0)];
    frame.polygon(&mut out, &below, fill(outcome(1)));

    let mut labels = vec![(centroid(&[pt(x0, y0), pt(frame.x_max, frame.y_max)]), 2u8)];
    let mut none_at = centroid(&below);
    if let Some(seg) = geometry.partial_segment {
        let (id, tri) = if seg.from.y == 0.0 {
            (3, [seg.from, pt(x0, 0.0), seg.to])
        } else {
            (4, [seg.from, seg.to, pt(0.0, y0)])
        };
        frame.polygon(&mut out, &tri, fill(outcome(id)));
        frame.line(&mut out, seg.from, seg.to, r#"stroke="black" stroke-width="1.5""#);
        labels.push((centroid(&tri), id));
        none_at = if id == 3 {
            centroid(&[pt(0.0, 0.0), seg.from, seg.to, pt(0.0, y0)])
        } else {
            centroid(&[pt(0.0, 0.0), pt(x0, 0.0), seg.to, seg.from])
        };
    }
    labels.push((none_at, 1));
    frame.line(&mut out, geometry.total_line.from, geometry.total_line.to, r#"stroke="black" stroke-width="1.5""#);

    for (p, id) in labels {
        frame.label(&mut out, p, &format!("{id}: {}", outcome(id)));
    }

    frame.line(&mut out, pt(0.0, 0.0), pt(frame.x_max, 0.0), r#"stroke="black""#);
    frame.line(&mut out, pt(0.0, 0.0), pt(0.0, frame.y_max), r#"stroke="black""#);
    let (ax, ay) = frame.map(pt(frame.x_max, 0.0));
    let _ = writeln!(
        out,
        r#"  <text x="{:.3}" y="{:.3}" font-size="13" text-anchor="end">δ/(1−δ)·p_B</text>"#,
        ax,
        ay + 30.0
    );
    let (bx, by) = frame.map(pt(0.0, frame.y_max));
    let _ = writeln!(
        out,
        r#"  <text x="{:.3}" y="{:.3}" font-size="13" text-anchor="start">δ/(1−δ)·p_G</text>"#,
        bx - 40.0,
        by - 12.0
    );
    for (p, text, anchor, dx, dy) in [
        (pt(x0, 0.0), format!("{x0:.3}"), "middle", 0.0, 16.0),
        (pt(0.0, y0), format!("{y0:.3}"), "end", -6.0, 4.0),
    ] {
        let (x, y) = frame.map(p);
        let _ = writeln!(
            out,
            r#"  <text x="{:.3}" y="{:.3}" font-size="11" text-anchor="{anchor}">{text}</text>"#,
            x + dx,
            y + dy
        );
    }

    if let Some(p) = marker {
        let (x, y) = frame.map(p);
        let _ = writeln!(out, r#"  <circle cx="{x:.3}" cy="{y:.3}" r="5" fill="black"/>"#);
        let _ = writeln!(
            out,
            r#"  <text x="{:.3}" y="{:.3}" font-size="11">environment</text>"#,
            x + 8.0,
            y - 8.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Assignment chain drawn as a row of states: circles work on `t_G`,
/// squares on `t_B`.
pub fn chain_svg<S: Scalar>(chain: &AssignmentChain<S>) -> String {
    let step = 120.0;
    let radius = 24.0;
    let cy = 160.0;
    let width = 80.0 + step * chain.len().saturating_sub(1) as f64 + 80.0;
    let height = 300.0;
    let cx = |i: usize| 80.0 + step * i as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    out.push_str(concat!(
        "  <defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"7\" markerHeight=\"7\" orient=\"auto\">",
        "<path d=\"M0,0 L10,5 L0,10 z\"/></marker></defs>\n"
    ));
    let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#);

    let edge = |out: &mut String, i: usize, j: usize, text: String, lane: f64| {
        let (x1, x2) = (cx(i), cx(j));
        let path;
        let (lx, ly);
        if i == j {
            let top = cy - radius;
            let h = 40.0 + 20.0 * lane;
            path = format!(
                "M{:.3},{:.3} C{:.3},{:.3} {:.3},{:.3} {:.3},{:.3}",
                x1 - 10.0,
                top,
                x1 - 30.0,
                top - h,
                x1 + 30.0,
                top - h,
                x1 + 10.0,
                top
            );
            lx = x1;
            ly = top - h * 0.75 - 4.0;
        } else {
            let forward = j > i;
            let span = (x2 - x1).abs() / step;
            let sign = if forward { -1.0 } else { 1.0 };
            let bend = if span <= 1.0 && forward { 0.0 } else { sign * (30.0 + 25.0 * span + 18.0 * lane) };
            let y = cy + sign * radius * if bend == 0.0 { 0.0 } else { 1.0 };
            let (sx, ex) = if bend == 0.0 {
                (x1 + radius, x2 - radius)
            } else {
                (x1, x2)
            };
            let mx = (sx + ex) / 2.0;
            path = format!("M{sx:.3},{y:.3} Q{mx:.3},{:.3} {ex:.3},{y:.3}", y + 2.0 * bend);
            lx = mx;
            ly = y + bend + if bend > 0.0 { 14.0 } else { -6.0 };
        }
        let _ = writeln!(
            out,
            r#"  <path d="{path}" fill="none" stroke="black" marker-end="url(#arrow)"/>"#
        );
        let _ = writeln!(
            out,
            r#"  <text x="{lx:.3}" y="{ly:.3}" font-size="11" text-anchor="middle">{}</text>"#,
            escape(&text)
        );
    };

    for (i, s) in chain.states.iter().enumerate() {
        let mut lane = 0.0;
        if let Some(row) = &s.on_good {
            for (j, p) in row {
                edge(&mut out, i, *j, format!("G: {:.3}", p.to_f64()), lane);
                lane += 1.0;
            }
        }
        let tag = if s.on_good.is_some() { "else: " } else { "" };
        for (j, p) in &s.otherwise {
            edge(&mut out, i, *j, format!("{tag}{:.3}", p.to_f64()), lane);
            lane += 1.0;
        }
    }

    for (i, s) in chain.states.iter().enumerate() {
        let x = cx(i);
        match s.task {
            Task::Good => {
                let _ = writeln!(
                    out,
                    r##"  <circle cx="{x:.3}" cy="{cy:.3}" r="{radius:.3}" fill="#a1d99b" stroke="black"/>"##
                );
            }
            Task::Bad => {
                let _ = writeln!(
                    out,
                    r##"  <rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#fdae6b" stroke="black"/>"##,
                    x - radius,
                    cy - radius,
                    2.0 * radius,
                    2.0 * radius
                );
            }
        }
        let _ = writeln!(
            out,
            r#"  <text x="{x:.3}" y="{:.3}" font-size="13" text-anchor="middle">{}</text>"#,
            cy + 4.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}
