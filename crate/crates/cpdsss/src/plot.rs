//! Minimal SVG line plots of sweep aggregates. Rendering only — all numbers
//! come straight from the aggregated results.

use crate::harness::{CellSpec, SweepResult};
use crate::Result;
use std::io::Write;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 190.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn series_key(spec: &CellSpec) -> String {
    format!(
        "K={} M={} {} {}",
        spec.k, spec.m, spec.direction, spec.csi_mode
    )
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>, // (snr_db, mean capacity)
    ideal: Vec<(f64, f64)>,
}

fn collect_series(result: &SweepResult) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for cell in &result.cells {
        let label = series_key(&cell.spec);
        let series = match out.iter_mut().find(|s| s.label == label) {
            Some(s) => s,
            None => {
                out.push(Series {
                    label,
                    points: Vec::new(),
                    ideal: Vec::new(),
                });
                out.last_mut().unwrap()
            }
        };
        series
            .points
            .push((cell.spec.snr_db, cell.mean_capacity_bpcu));
        series
            .ideal
            .push((cell.spec.snr_db, cell.ideal_capacity_bpcu));
    }
    for s in out.iter_mut() {
        s.points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        s.ideal.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }
    out
}

/// Writes an SVG plot of mean per-user capacity (log10 y-axis) vs SNR, one
/// line per (K, M, direction, CSI) combination, with the ideal single-user
/// reference dashed.
pub fn write_svg<W: Write>(result: &SweepResult, title: &str, w: &mut W) -> Result<()> {
    let series = collect_series(result);
    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .collect();
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| {
            s.points
                .iter()
                .chain(s.ideal.iter())
                .map(|p| p.1)
                .filter(|v| *v > 0.0 && v.is_finite())
        })
        .collect();
    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_min_log = ys
        .iter()
        .map(|v| v.log10())
        .fold(f64::INFINITY, f64::min)
        .floor();
    let y_max_log = ys
        .iter()
        .map(|v| v.log10())
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil();
    let (x_min, x_max) = if x_min < x_max {
        (x_min, x_max)
    } else {
        (x_min - 1.0, x_max + 1.0)
    };
    let (y_min_log, y_max_log) = if y_min_log < y_max_log {
        (y_min_log, y_max_log)
    } else {
        (y_min_log - 1.0, y_max_log + 1.0)
    };

    let px = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |y: f64| {
        let t = (y.log10() - y_min_log) / (y_max_log - y_min_log);
        HEIGHT - MARGIN_B - t * (HEIGHT - MARGIN_T - MARGIN_B)
    };

    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(
        w,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )?;
    writeln!(
        w,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0
    )?;

    // Axes and grid.
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    writeln!(
        w,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    )?;
    writeln!(
        w,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    )?;
    let mut dec = y_min_log as i64;
    while dec <= y_max_log as i64 {
        let y = py(10f64.powi(dec as i32));
        writeln!(
            w,
            r##"<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="#dddddd"/>"##
        )?;
        writeln!(
            w,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">1e{dec}</text>"#,
            x0 - 6.0,
            y + 4.0
        )?;
        dec += 1;
    }
    let mut x_tick = x_min;
    while x_tick <= x_max + 1e-9 {
        let x = px(x_tick);
        writeln!(
            w,
            r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{}" stroke="black"/>"#,
            y0 + 4.0
        )?;
        writeln!(
            w,
            r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{x_tick}</text>"#,
            y0 + 18.0
        )?;
        x_tick += 5.0;
    }
    writeln!(
        w,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">SNR (dB)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    )?;
    writeln!(
        w,
        r#"<text x="18" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">capacity (bits/channel use)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )?;

    let polyline = |pts: &[(f64, f64)]| -> String {
        pts.iter()
            .filter(|p| p.1 > 0.0 && p.1.is_finite())
            .map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1)))
            .collect::<Vec<_>>()
            .join(" ")
    };

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        writeln!(
            w,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            polyline(&s.points)
        )?;
        writeln!(
            w,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.0" stroke-dasharray="5,4" opacity="0.6"/>"#,
            polyline(&s.ideal)
        )?;
        let ly = MARGIN_T + 16.0 * i as f64 + 10.0;
        writeln!(
            w,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.8"/>"#,
            x1 + 10.0,
            x1 + 34.0
        )?;
        writeln!(
            w,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            x1 + 40.0,
            ly + 4.0,
            s.label
        )?;
    }
    writeln!(
        w,
        r##"<text x="{}" y="{}" font-family="sans-serif" font-size="10" fill="#666666">dashed: ideal single-user reference</text>"##,
        x1 + 10.0,
        MARGIN_T + 16.0 * series.len() as f64 + 22.0
    )?;
    writeln!(w, "</svg>")?;
    Ok(())
}
