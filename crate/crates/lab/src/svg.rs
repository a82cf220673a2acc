//! Minimal SVG charts: mean ± std band plots and archive heatmaps.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

fn fmt(x: f64) -> String {
    format!("{x:.2}")
}

/// Line of `mean` over `x` with a shaded `mean ± std` band.
pub fn band_plot(title: &str, y_label: &str, x: &[f64], mean: &[f64], std: &[f64]) -> String {
    let lo: Vec<f64> = mean.iter().zip(std).map(|(m, s)| m - s).collect();
    let hi: Vec<f64> = mean.iter().zip(std).map(|(m, s)| m + s).collect();
    let (x0, x1) = bounds(x);
    let (mut y0, mut y1) = bounds(&lo.iter().chain(&hi).copied().collect::<Vec<_>>());
    if y0 == y1 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let x_span = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |v: f64| MARGIN + (v - x0) / x_span * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut band: Vec<String> = x.iter().zip(&hi).map(|(&a, &b)| format!("{},{}", fmt(px(a)), fmt(py(b)))).collect();
    band.extend(x.iter().zip(&lo).rev().map(|(&a, &b)| format!("{},{}", fmt(px(a)), fmt(py(b)))));
    let line: Vec<String> = x.iter().zip(mean).map(|(&a, &b)| format!("{},{}", fmt(px(a)), fmt(py(b)))).collect();

    let mut s = header();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
    axes(&mut s, "generation", y_label);
    writeln!(s, r##"<polygon points="{}" fill="#4c72b0" fill-opacity="0.25" stroke="none"/>"##, band.join(" ")).unwrap();
    writeln!(s, r##"<polyline points="{}" fill="none" stroke="#4c72b0" stroke-width="2"/>"##, line.join(" ")).unwrap();
    for (v, anchor_y) in [(y0, HEIGHT - MARGIN), (y1, MARGIN)] {
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="end" font-size="11">{}</text>"#, MARGIN - 6.0, fmt(anchor_y + 4.0), short(v)).unwrap();
    }
    for (v, anchor_x) in [(x0, MARGIN), (x1, WIDTH - MARGIN)] {
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#, fmt(anchor_x), HEIGHT - MARGIN + 16.0, short(v)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Grid of cells coloured by value; row index runs along x, column along y.
pub fn heatmap(grid: &[Vec<Option<f64>>], x_label: &str, y_label: &str) -> String {
    let values: Vec<f64> = grid.iter().flatten().flatten().copied().collect();
    let (lo, hi) = if values.is_empty() { (0.0, 1.0) } else { bounds(&values) };
    let rows = grid.len().max(1) as f64;
    let cols = grid.first().map_or(1, Vec::len).max(1) as f64;
    let cw = (WIDTH - 2.0 * MARGIN) / rows;
    let ch = (HEIGHT - 2.0 * MARGIN) / cols;

    let mut s = header();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">archive fitness ({} to {})</text>"#, WIDTH / 2.0, short(lo), short(hi)).unwrap();
    axes(&mut s, x_label, y_label);
    for (i, row) in grid.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let Some(v) = cell else { continue };
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 1.0 };
            let x = MARGIN + i as f64 * cw;
            let y = HEIGHT - MARGIN - (j as f64 + 1.0) * ch;
            writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"><title>{i},{j}: {v}</title></rect>"#,
                fmt(x),
                fmt(y),
                fmt(cw),
                fmt(ch),
                colour(t)
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn axes(s: &mut String, x_label: &str, y_label: &str) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    writeln!(s, r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(x_label)).unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn bounds(xs: &[f64]) -> (f64, f64) {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() && hi.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

fn short(v: f64) -> String {
    format!("{v:.3}")
}

/// Dark blue to yellow.
fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(40.0, 250.0), lerp(30.0, 220.0), lerp(110.0, 40.0))
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_has_a_flat_line_and_no_band() {
        let x = [0.0, 1.0, 2.0];
        let svg = band_plot("t", "y", &x, &[5.0; 3], &[0.0; 3]);
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let ys: Vec<&str> = line
            .split('"')
            .nth(1)
            .unwrap()
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert!(ys.windows(2).all(|w| w[0] == w[1]));
        let band = svg.lines().find(|l| l.starts_with("<polygon")).unwrap();
        let pts: Vec<&str> = band.split('"').nth(1).unwrap().split(' ').collect();
        assert!(pts.iter().all(|p| p.ends_with(ys[0])));
    }

    #[test]
    fn heatmap_draws_occupied_cells_only() {
        let mut grid = vec![vec![None; 4]; 4];
        grid[1][2] = Some(3.0);
        grid[3][0] = Some(-1.0);
        let svg = heatmap(&grid, "Q", "D");
        assert_eq!(svg.matches("<rect x=").count(), 2);
        assert!(svg.contains("1,2: 3"));
    }
}
