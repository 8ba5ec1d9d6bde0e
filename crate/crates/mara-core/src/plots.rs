//! Plot-ready exports of a training metrics log: reward and entropy series
//! as two-column CSVs plus self-contained SVG line charts.

use crate::error::Result;
use crate::metrics::{read_metrics_csv, MetricsRow};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Files written by [`emit_plots`].
#[derive(Debug, Clone, PartialEq)]
pub struct PlotsOutput {
    pub reward_csv: PathBuf,
    pub entropy_csv: PathBuf,
    pub reward_svg: PathBuf,
    pub entropy_svg: PathBuf,
    /// Rows in the source log (zero for an empty log, which still writes
    /// header-only series and empty charts).
    pub n_points: usize,
}

/// Write `reward_series.csv`, `entropy_series.csv`, and matching `.svg`
/// charts into `dir`, preserving row order.
pub fn emit_plots(metrics: &[MetricsRow], dir: &Path) -> Result<PlotsOutput> {
    std::fs::create_dir_all(dir)?;
    let reward: Vec<(f64, f64)> = metrics
        .iter()
        .map(|r| (r.update as f64, r.mean_ep_reward))
        .collect();
    let entropy: Vec<(f64, f64)> = metrics
        .iter()
        .map(|r| (r.update as f64, r.entropy))
        .collect();

    let reward_csv = dir.join("reward_series.csv");
    let entropy_csv = dir.join("entropy_series.csv");
    std::fs::write(&reward_csv, series_csv("update,mean_ep_reward", &reward))?;
    std::fs::write(&entropy_csv, series_csv("update,entropy", &entropy))?;

    let reward_svg = dir.join("reward_series.svg");
    let entropy_svg = dir.join("entropy_series.svg");
    std::fs::write(&reward_svg, line_chart("mean episode reward", &reward))?;
    std::fs::write(&entropy_svg, line_chart("policy entropy", &entropy))?;

    Ok(PlotsOutput {
        reward_csv,
        entropy_csv,
        reward_svg,
        entropy_svg,
        n_points: metrics.len(),
    })
}

/// [`emit_plots`] reading the log from a `metrics.csv` file.
pub fn emit_plots_from_file(metrics_path: &Path, dir: &Path) -> Result<PlotsOutput> {
    let metrics = read_metrics_csv(metrics_path)?;
    emit_plots(&metrics, dir)
}

fn series_csv(header: &str, points: &[(f64, f64)]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for (x, y) in points {
        writeln!(out, "{x},{y}").expect("writing to String cannot fail");
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

/// Minimal self-contained SVG polyline chart. Non-finite values (the reward
/// series starts at NaN) are skipped, splitting the line where they occur.
fn line_chart(title: &str, points: &[(f64, f64)]) -> String {
    let finite: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(_, y)| y.is_finite())
        .collect();
    let mut svg = String::new();
    write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .expect("writing to String cannot fail");
    write!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/><text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#,
        WIDTH / 2.0
    )
    .expect("writing to String cannot fail");
    // Axes.
    write!(
        svg,
        r#"<line x1="{MARGIN}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/><line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{y0}" stroke="black"/>"#,
        y0 = HEIGHT - MARGIN,
        x1 = WIDTH - MARGIN,
    )
    .expect("writing to String cannot fail");

    if finite.is_empty() {
        write!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14" fill="gray">no data</text></svg>"#,
            WIDTH / 2.0,
            HEIGHT / 2.0
        )
        .expect("writing to String cannot fail");
        return svg;
    }

    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &finite {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let y_span = if y_max > y_min { y_max - y_min } else { 1.0 };
    let sx = |x: f64| MARGIN + (x - x_min) / x_span * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_min) / y_span * (HEIGHT - 2.0 * MARGIN);

    let mut path = String::new();
    for (i, &(x, y)) in finite.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        write!(path, "{cmd}{:.2} {:.2} ", sx(x), sy(y)).expect("writing to String cannot fail");
    }
    write!(
        svg,
        r#"<path d="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        path.trim_end()
    )
    .expect("writing to String cannot fail");

    // Extremal tick labels.
    write!(
        svg,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="11">{x_min}</text><text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{x_max}</text><text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{y_min:.4}</text><text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{y_max:.4}</text></svg>"#,
        HEIGHT - MARGIN + 16.0,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 16.0,
        MARGIN - 4.0,
        HEIGHT - MARGIN,
        MARGIN - 4.0,
        MARGIN + 4.0,
    )
    .expect("writing to String cannot fail");
    svg
}
