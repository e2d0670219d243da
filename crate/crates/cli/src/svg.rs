//! Hand-written SVG for the two walk figures, on a fixed 1200×800 viewBox.

use std::fmt::Write as _;

use rmwalk_core::analysis::sign_changes_of_values;

use crate::error::{usage, CliError};

pub const WIDTH: f64 = 1200.0;
pub const HEIGHT: f64 = 800.0;
pub const MAX_VERTICES: usize = 100_000;

const LEFT: f64 = 90.0;
const RIGHT: f64 = 1160.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 740.0;
const ENVELOPE_SAMPLES: usize = 600;

/// Indices (0-based) of the walk vertices kept for drawing.
///
/// Walks with at most `max_vertices` points are kept whole. Longer walks keep
/// the first and last point, every sign-change vertex, and the first, lowest,
/// highest and last point of each of equally wide buckets sized to fit the
/// budget.
pub fn downsample(values: &[i64], max_vertices: usize) -> Result<Vec<usize>, CliError> {
    let n = values.len();
    if n <= max_vertices {
        return Ok((0..n).collect());
    }
    let as_f64: Vec<f64> = values.iter().map(|&m| m as f64).collect();
    let changes: Vec<usize> = sign_changes_of_values(&as_f64)
        .into_iter()
        .map(|pos| pos as usize - 1)
        .collect();
    let budget = max_vertices
        .checked_sub(changes.len() + 2)
        .filter(|&b| b >= 4)
        .ok_or_else(|| {
            usage(format!(
                "{} sign changes do not fit in {max_vertices} vertices",
                changes.len()
            ))
        })?;
    let buckets = budget / 4;
    let width = n.div_ceil(buckets);

    let mut keep = changes;
    keep.push(0);
    keep.push(n - 1);
    for lo in (0..n).step_by(width) {
        let hi = (lo + width).min(n);
        let slice = &values[lo..hi];
        let (mut imin, mut imax) = (0, 0);
        for (i, &v) in slice.iter().enumerate() {
            if v < slice[imin] {
                imin = i;
            }
            if v > slice[imax] {
                imax = i;
            }
        }
        keep.extend([lo, lo + imin, lo + imax, hi - 1]);
    }
    keep.sort_unstable();
    keep.dedup();
    debug_assert!(keep.len() <= max_vertices);
    Ok(keep)
}

fn header(out: &mut String, title: &str, stamp: Option<&str>) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    if let Some(s) = stamp {
        let _ = writeln!(out, "<!-- generated {s} -->");
    }
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{}" y="30" font-family="sans-serif" font-size="18" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Short tick label: integers as is, large values in scientific form.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_owned()
    } else if v.abs() >= 1e5 {
        format!("{v:.1e}")
    } else {
        format!("{}", v.round() as i64)
    }
}

/// Walk `M(x)` for `x = 1..=N` with the dashed curves `±√x`.
pub fn figure1(values: &[i64], seed: u64, stamp: Option<&str>) -> Result<(String, usize), CliError> {
    if values.is_empty() {
        return Err(usage("figure1 needs a nonempty walk"));
    }
    let n = values.len() as f64;
    let keep = downsample(values, MAX_VERTICES)?;
    let max_abs = values.iter().map(|m| m.unsigned_abs()).max().unwrap_or(0) as f64;
    let y_max = max_abs.max(n.sqrt()).max(1.0) * 1.05;
    let x_span = (n - 1.0).max(1.0);
    let px = |x: f64| LEFT + (x - 1.0) / x_span * (RIGHT - LEFT);
    let py = |y: f64| TOP + (y_max - y) / (2.0 * y_max) * (BOTTOM - TOP);

    let mut out = String::with_capacity(keep.len() * 20 + 4096);
    header(
        &mut out,
        &format!("M(x), 1 <= x <= {}, seed {seed}", values.len()),
        stamp,
    );
    axes(&mut out, (1.0, n), (-y_max, y_max), &px, &py);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="16" text-anchor="middle">x</text>
<text x="24" y="{}" font-family="sans-serif" font-size="16" text-anchor="middle" transform="rotate(-90 24 {})">M(x)</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 48.0,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );

    for sign in [1.0, -1.0] {
        out.push_str(r##"<polyline class="envelope" fill="none" stroke="#777" stroke-width="1.5" stroke-dasharray="8 6" points=""##);
        for j in 0..=ENVELOPE_SAMPLES {
            let x = 1.0 + (n - 1.0) * (j as f64 / ENVELOPE_SAMPLES as f64).powi(2);
            let _ = write!(out, "{:.2},{:.2} ", px(x), py(sign * x.sqrt()));
        }
        out.push_str("\"/>\n");
    }

    out.push_str(r##"<polyline class="walk" fill="none" stroke="#1f4e99" stroke-width="1" points=""##);
    for &i in &keep {
        let _ = write!(out, "{:.2},{:.2} ", px(i as f64 + 1.0), py(values[i] as f64));
    }
    out.push_str("\"/>\n</svg>\n");
    Ok((out, keep.len()))
}

fn axes(
    out: &mut String,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    px: &dyn Fn(f64) -> f64,
    py: &dyn Fn(f64) -> f64,
) {
    let _ = writeln!(
        out,
        r##"<g class="axes" stroke="#000" stroke-width="1">
<line x1="{LEFT}" y1="{BOTTOM}" x2="{RIGHT}" y2="{BOTTOM}"/>
<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{BOTTOM}"/>
<line x1="{LEFT}" y1="{z:.2}" x2="{RIGHT}" y2="{z:.2}" stroke="#bbb"/>
</g>"##,
        z = py(0.0).clamp(TOP, BOTTOM)
    );
    out.push_str(r#"<g class="ticks" font-family="sans-serif" font-size="13">"#);
    out.push('\n');
    for k in 0..=4 {
        let x = x0 + (x1 - x0) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            px(x),
            BOTTOM + 20.0,
            tick_label(x)
        );
        let y = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            py(y) + 4.0,
            tick_label(y)
        );
    }
    out.push_str("</g>\n");
}

/// Scatter of the distinct lattice points `(re, im)` visited by a 2D walk,
/// with the origin marked.
pub fn figure2(points: &[(i64, i64)], n: u64, seed: u64, stamp: Option<&str>) -> String {
    let bounds = points.iter().fold((0i64, 0i64, 0i64, 0i64), |(a, b, c, d), &(x, y)| {
        (a.min(x), b.max(x), c.min(y), d.max(y))
    });
    let (xmin, xmax, ymin, ymax) = (
        bounds.0 as f64 - 1.0,
        bounds.1 as f64 + 1.0,
        bounds.2 as f64 - 1.0,
        bounds.3 as f64 + 1.0,
    );
    // Equal scale on both axes, centred in the plot area.
    let scale = ((RIGHT - LEFT) / (xmax - xmin)).min((BOTTOM - TOP) / (ymax - ymin));
    let cx = (LEFT + RIGHT) / 2.0 - scale * (xmin + xmax) / 2.0;
    let cy = (TOP + BOTTOM) / 2.0 + scale * (ymin + ymax) / 2.0;
    let px = move |x: f64| cx + scale * x;
    let py = move |y: f64| cy - scale * y;
    let dot = (scale * 0.8).clamp(1.0, 8.0);

    let mut out = String::with_capacity(points.len() * 24 + 4096);
    header(
        &mut out,
        &format!("{{M(x) : 1 <= x <= {n}}}, seed {seed}, {} distinct points", points.len()),
        stamp,
    );
    axes(
        &mut out,
        (xmin, xmax),
        (ymin, ymax),
        &px,
        &py,
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="16" text-anchor="middle">Re M(x)</text>
<text x="24" y="{}" font-family="sans-serif" font-size="16" text-anchor="middle" transform="rotate(-90 24 {})">Im M(x)</text>"#,
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 48.0,
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    );
    out.push_str(r##"<path class="visited" fill="#1f4e99" d=""##);
    for &(x, y) in points {
        let _ = write!(
            out,
            "M{:.2} {:.2}h{dot:.2}v{dot:.2}h-{dot:.2}z",
            px(x as f64) - dot / 2.0,
            py(y as f64) - dot / 2.0
        );
    }
    out.push_str("\"/>\n");
    let (ox, oy) = (px(0.0), py(0.0));
    let _ = writeln!(
        out,
        r##"<g class="origin" stroke="#c0392b" stroke-width="2" fill="none">
<circle cx="{ox:.2}" cy="{oy:.2}" r="7"/>
<line x1="{:.2}" y1="{oy:.2}" x2="{:.2}" y2="{oy:.2}"/>
<line x1="{ox:.2}" y1="{:.2}" x2="{ox:.2}" y2="{:.2}"/>
</g>
</svg>"##,
        ox - 11.0,
        ox + 11.0,
        oy - 11.0,
        oy + 11.0
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_walks_are_kept_whole() {
        let values = vec![1i64; 10];
        assert_eq!(downsample(&values, MAX_VERTICES).unwrap(), (0..10).collect::<Vec<_>>());
        let (svg, vertices) = figure1(&values, 0, None).unwrap();
        assert_eq!(vertices, 10);
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn downsampling_keeps_sign_changes_and_budget() {
        let values: Vec<i64> = (0..200_000)
            .map(|i| ((i as f64 / 97.0).sin() * 50.0) as i64)
            .collect();
        let keep = downsample(&values, 50_000).unwrap();
        assert!(keep.len() <= 50_000);
        let as_f64: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let changes = sign_changes_of_values(&as_f64);
        assert!(changes.len() > 500);
        for pos in changes {
            assert!(keep.binary_search(&(pos as usize - 1)).is_ok());
        }
        assert_eq!(keep[0], 0);
        assert_eq!(*keep.last().unwrap(), values.len() - 1);
    }

    #[test]
    fn downsampling_refuses_impossible_budget() {
        let values: Vec<i64> = (0..1000).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        assert!(downsample(&values, 100).is_err());
    }

    #[test]
    fn figure2_marks_origin() {
        let svg = figure2(&[(1, 0)], 1, 7, None);
        assert!(svg.contains(r#"class="origin""#));
        assert!(svg.contains(r#"class="visited""#));
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
