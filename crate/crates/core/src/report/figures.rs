//! Self-contained SVG figures and their CSV twins.
//!
//! Every figure function has a CSV counterpart emitting exactly the
//! numbers the SVG draws, so plotted values can be diffed and reused
//! without parsing markup. All output is deterministic: inputs arrive
//! in ordered containers and floats are printed with fixed precision.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{ConsistencyReport, OutperformanceHeatmap, SimilarityMatrix};

const CURVE_COLORS: [&str; 6] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn csv_num(v: f64) -> String {
    format!("{v:.6}")
}

fn coord(v: f64) -> String {
    format!("{v:.2}")
}

fn svg_open(width: f64, height: f64, title: &str) -> String {
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">\n",
        coord(width),
        coord(height),
        coord(width),
        coord(height)
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
        coord(width),
        coord(height)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"16\" text-anchor=\"middle\" font-size=\"13\">{}</text>",
        coord(width / 2.0),
        escape(title)
    );
    svg
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Interpolates a diverging blue to white to red scale over [lo, hi].
fn diverging_color(value: f64, lo: f64, hi: f64) -> String {
    let t = ((value - lo) / (hi - lo)).clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let (r, g, b) = if t < 0.5 {
        let u = t / 0.5;
        (lerp(33.0, 247.0, u), lerp(102.0, 247.0, u), lerp(172.0, 247.0, u))
    } else {
        let u = (t - 0.5) / 0.5;
        (lerp(247.0, 178.0, u), lerp(247.0, 24.0, u), lerp(247.0, 43.0, u))
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

/// Per-resample bootstrap ratings, one row per (agent, resample).
pub fn violin_csv(samples: &BTreeMap<String, Vec<f64>>) -> String {
    let mut csv = String::from("agent,resample,rating\n");
    for (agent, values) in samples {
        for (resample, value) in values.iter().enumerate() {
            let _ = writeln!(csv, "{agent},{resample},{}", csv_num(*value));
        }
    }
    csv
}

/// Mirrored-histogram violin per agent over its bootstrap ratings.
pub fn violin_svg(title: &str, samples: &BTreeMap<String, Vec<f64>>) -> String {
    let column = 90.0;
    let width = 70.0 + column * samples.len() as f64;
    let height = 360.0;
    let (top, bottom) = (36.0, height - 40.0);
    let mut svg = svg_open(width, height, title);

    let all: Vec<f64> = samples.values().flatten().copied().collect();
    if all.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = ((hi - lo) * 0.05).max(1.0);
    let (lo, hi) = (lo - pad, hi + pad);
    let y_of = |v: f64| bottom - (v - lo) / (hi - lo) * (bottom - top);

    for tick in 0..=4 {
        let value = lo + (hi - lo) * tick as f64 / 4.0;
        let y = y_of(value);
        let _ = writeln!(
            svg,
            "<line x1=\"56\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#dddddd\"/>\
             <text x=\"52\" y=\"{2}\" text-anchor=\"end\">{3:.0}</text>",
            coord(y),
            coord(width - 10.0),
            coord(y + 4.0),
            value
        );
    }

    const BINS: usize = 20;
    for (index, (agent, values)) in samples.iter().enumerate() {
        let center = 70.0 + column * index as f64 + column / 2.0;
        let mut counts = [0usize; BINS];
        for value in values {
            let bin = (((value - lo) / (hi - lo)) * BINS as f64) as usize;
            counts[bin.min(BINS - 1)] += 1;
        }
        let peak = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
        let half_width = |count: usize| count as f64 / peak * (column * 0.42);

        let mut right = Vec::new();
        let mut left = Vec::new();
        for (bin, count) in counts.iter().enumerate() {
            let value = lo + (hi - lo) * (bin as f64 + 0.5) / BINS as f64;
            let y = y_of(value);
            right.push(format!("{},{}", coord(center + half_width(*count)), coord(y)));
            left.push(format!("{},{}", coord(center - half_width(*count)), coord(y)));
        }
        left.reverse();
        let _ = writeln!(
            svg,
            "<polygon points=\"{} {}\" fill=\"#9ecae1\" stroke=\"#3182bd\"/>",
            right.join(" "),
            left.join(" ")
        );

        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(median) = sorted.get(sorted.len() / 2) {
            let y = y_of(*median);
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#08306b\" \
                 stroke-width=\"2\"/>",
                coord(center - column * 0.3),
                coord(y),
                coord(center + column * 0.3)
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            coord(center),
            coord(height - 18.0),
            escape(agent)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn grid_svg(
    title: &str,
    labels: &[String],
    cells: &[Vec<Option<(f64, bool)>>],
    lo: f64,
    hi: f64,
) -> String {
    let cell = 34.0;
    let margin_left = 150.0;
    let margin_top = 140.0;
    let width = margin_left + cell * labels.len() as f64 + 20.0;
    let height = margin_top + cell * labels.len() as f64 + 20.0;
    let mut svg = svg_open(width, height, title);

    for (index, label) in labels.iter().enumerate() {
        let y = margin_top + cell * index as f64 + cell / 2.0;
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            coord(margin_left - 6.0),
            coord(y + 4.0),
            escape(label)
        );
        let x = margin_left + cell * index as f64 + cell / 2.0;
        let _ = writeln!(
            svg,
            "<text x=\"{0}\" y=\"{1}\" text-anchor=\"start\" \
             transform=\"rotate(-60 {0} {1})\">{2}</text>",
            coord(x),
            coord(margin_top - 8.0),
            escape(label)
        );
    }

    for (r, row) in cells.iter().enumerate() {
        for (c, entry) in row.iter().enumerate() {
            let x = margin_left + cell * c as f64;
            let y = margin_top + cell * r as f64;
            match entry {
                Some((value, marked)) => {
                    let _ = writeln!(
                        svg,
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" \
                         stroke=\"#ffffff\"/>",
                        coord(x),
                        coord(y),
                        coord(cell),
                        coord(cell),
                        diverging_color(*value, lo, hi)
                    );
                    let _ = writeln!(
                        svg,
                        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"9\">\
                         {:.2}{}</text>",
                        coord(x + cell / 2.0),
                        coord(y + cell / 2.0 + 3.0),
                        value,
                        if *marked { "*" } else { "" }
                    );
                }
                None => {
                    let _ = writeln!(
                        svg,
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#e0e0e0\" \
                         stroke=\"#ffffff\"/>",
                        coord(x),
                        coord(y),
                        coord(cell),
                        coord(cell)
                    );
                }
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Profile-correlation heatmap; undefined cells are gray.
pub fn similarity_svg(title: &str, matrix: &SimilarityMatrix) -> String {
    let labels: Vec<String> = matrix
        .labels
        .iter()
        .map(|l| format!("{} {}-{}", l.agent, l.game, l.size))
        .collect();
    let cells: Vec<Vec<Option<(f64, bool)>>> = matrix
        .entries
        .iter()
        .map(|row| row.iter().map(|v| v.map(|v| (v, false))).collect())
        .collect();
    grid_svg(title, &labels, &cells, -1.0, 1.0)
}

/// CSV twin of the similarity heatmap; undefined entries are empty.
pub fn similarity_csv(matrix: &SimilarityMatrix) -> String {
    let mut csv =
        String::from("row_agent,row_game,row_size,col_agent,col_game,col_size,correlation\n");
    for (r, row_label) in matrix.labels.iter().enumerate() {
        for (c, col_label) in matrix.labels.iter().enumerate() {
            let value = matrix.entries[r][c].map(csv_num).unwrap_or_default();
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                row_label.agent,
                row_label.game,
                row_label.size,
                col_label.agent,
                col_label.game,
                col_label.size,
                value
            );
        }
    }
    csv
}

/// Win-probability heatmap; sparse cells are starred, empty cells gray.
pub fn outperformance_svg(title: &str, heatmap: &OutperformanceHeatmap) -> String {
    let cells: Vec<Vec<Option<(f64, bool)>>> = heatmap
        .cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| cell.as_ref().map(|c| (c.probability, c.sparse)))
                .collect()
        })
        .collect();
    grid_svg(title, &heatmap.agents, &cells, 0.0, 1.0)
}

/// CSV twin of the outperformance heatmap, populated cells only.
pub fn outperformance_csv(heatmap: &OutperformanceHeatmap) -> String {
    let mut csv = String::from("row,col,probability,samples,sparse\n");
    for (r, row_agent) in heatmap.agents.iter().enumerate() {
        for (c, col_agent) in heatmap.agents.iter().enumerate() {
            if let Some(cell) = &heatmap.cells[r][c] {
                let _ = writeln!(
                    csv,
                    "{row_agent},{col_agent},{},{},{}",
                    csv_num(cell.probability),
                    cell.samples,
                    cell.sparse
                );
            }
        }
    }
    csv
}

/// Labeled values with standard errors, one bar each.
pub fn bar_chart_csv(bars: &[(String, f64, f64)]) -> String {
    let mut csv = String::from("label,value,sem\n");
    for (label, value, sem) in bars {
        let _ = writeln!(csv, "{label},{},{}", csv_num(*value), csv_num(*sem));
    }
    csv
}

/// Bar chart with error whiskers; the baseline sits at zero.
pub fn bar_chart_svg(title: &str, bars: &[(String, f64, f64)]) -> String {
    let column = 92.0;
    let width = 70.0 + column * bars.len() as f64;
    let height = 320.0;
    let (top, bottom) = (36.0, height - 60.0);
    let mut svg = svg_open(width, height, title);
    if bars.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }

    let lo = bars.iter().map(|(_, v, s)| v - s).fold(0.0f64, f64::min);
    let hi = bars.iter().map(|(_, v, s)| v + s).fold(0.0f64, f64::max);
    let pad = ((hi - lo) * 0.1).max(0.05);
    let (lo, hi) = (lo - pad, hi + pad);
    let y_of = |v: f64| bottom - (v - lo) / (hi - lo) * (bottom - top);

    for tick in 0..=4 {
        let value = lo + (hi - lo) * tick as f64 / 4.0;
        let _ = writeln!(
            svg,
            "<line x1=\"56\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#dddddd\"/>\
             <text x=\"52\" y=\"{2}\" text-anchor=\"end\">{3:.2}</text>",
            coord(y_of(value)),
            coord(width - 10.0),
            coord(y_of(value) + 4.0),
            value
        );
    }
    let baseline = y_of(0.0);
    let _ = writeln!(
        svg,
        "<line x1=\"56\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"#555555\"/>",
        coord(baseline),
        coord(width - 10.0)
    );

    for (index, (label, value, sem)) in bars.iter().enumerate() {
        let center = 70.0 + column * index as f64 + column / 2.0;
        let y = y_of(*value);
        let (bar_top, bar_height) =
            if *value >= 0.0 { (y, baseline - y) } else { (baseline, y - baseline) };
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#74a9cf\" \
             stroke=\"#2b8cbe\"/>",
            coord(center - column * 0.3),
            coord(bar_top),
            coord(column * 0.6),
            coord(bar_height.max(0.5))
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#333333\"/>",
            coord(center),
            coord(y_of(value - sem)),
            coord(y_of(value + sem))
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            coord(center),
            coord(height - 36.0),
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// The consistency statistics as bar-chart input.
pub fn consistency_bars(report: &ConsistencyReport) -> Vec<(String, f64, f64)> {
    report
        .rows()
        .into_iter()
        .map(|(name, stat)| (name.to_string(), stat.mean, stat.sem))
        .collect()
}

/// Named ROC curves as (false positive rate, true positive rate) rows.
pub fn roc_csv(curves: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut csv = String::from("curve,fpr,tpr\n");
    for (name, points) in curves {
        for (fpr, tpr) in points {
            let _ = writeln!(csv, "{name},{},{}", csv_num(*fpr), csv_num(*tpr));
        }
    }
    csv
}

/// ROC curves over the unit square with a chance diagonal.
pub fn roc_svg(title: &str, curves: &[(String, Vec<(f64, f64)>)]) -> String {
    let size = 340.0;
    let plot = 260.0;
    let origin = (56.0, size - 44.0);
    let mut svg = svg_open(size + 130.0, size, title);
    let x_of = |fpr: f64| origin.0 + fpr * plot;
    let y_of = |tpr: f64| origin.1 - tpr * plot;

    let _ = writeln!(
        svg,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999999\"/>",
        coord(origin.0),
        coord(origin.1 - plot),
        coord(plot),
        coord(plot)
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#aaaaaa\" \
         stroke-dasharray=\"4 3\"/>",
        coord(x_of(0.0)),
        coord(y_of(0.0)),
        coord(x_of(1.0)),
        coord(y_of(1.0))
    );
    for tick in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{tick:.1}</text>",
            coord(x_of(tick)),
            coord(origin.1 + 16.0)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{tick:.1}</text>",
            coord(origin.0 - 8.0),
            coord(y_of(tick) + 4.0)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">false positive rate</text>",
        coord(x_of(0.5)),
        coord(origin.1 + 32.0)
    );

    for (index, (name, points)) in curves.iter().enumerate() {
        let color = CURVE_COLORS[index % CURVE_COLORS.len()];
        let path: Vec<String> = points
            .iter()
            .map(|(fpr, tpr)| format!("{},{}", coord(x_of(*fpr)), coord(y_of(*tpr))))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            path.join(" ")
        );
        let legend_y = origin.1 - plot + 14.0 * index as f64 + 8.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{color}\" \
             stroke-width=\"1.5\"/><text x=\"{3}\" y=\"{4}\">{5}</text>",
            coord(origin.0 + plot + 12.0),
            coord(legend_y),
            coord(origin.0 + plot + 30.0),
            coord(origin.0 + plot + 36.0),
            coord(legend_y + 4.0),
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{heatmap_from_comparisons, similarity_matrix};
    use crate::ratings::{Comparison, ComparisonKind};
    use crate::types::{Framing, GameKind};

    #[test]
    fn violin_outputs_agree_and_are_stable() {
        let samples: BTreeMap<String, Vec<f64>> = [
            ("alpha".to_string(), vec![1480.0, 1500.0, 1520.0]),
            ("beta".to_string(), vec![1400.0, 1410.0, 1390.0]),
        ]
        .into_iter()
        .collect();
        let csv = violin_csv(&samples);
        assert_eq!(csv.lines().count(), 7, "header plus one row per sample");
        assert!(csv.contains("alpha,0,1480.000000"));

        let svg = violin_svg("ratings", &samples);
        assert_eq!(svg.matches("<polygon").count(), 2, "one violin per agent");
        assert_eq!(svg, violin_svg("ratings", &samples), "rendering is deterministic");
        assert!(svg.starts_with("<svg xmlns"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    fn sample_matrix() -> crate::report::SimilarityMatrix {
        let vector = |agent: &str, game, values: &[(&str, f64)]| crate::metrics::MetricVector {
            model_key: agent.into(),
            match_id: format!("m-{agent}-{game}"),
            game,
            size: 2,
            framing: Framing::A,
            communication: true,
            values: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        };
        similarity_matrix(&[
            vector("x", GameKind::Hupi, &[("tom", 0.9), ("transparency", 0.3)]),
            vector("x", GameKind::Tragedy, &[("tom", 0.2), ("transparency", 0.2)]),
            vector("y", GameKind::Hupi, &[("tom", 0.5), ("transparency", 0.1)]),
        ])
    }

    #[test]
    fn similarity_csv_marks_undefined_cells_empty() {
        let matrix = sample_matrix();
        let csv = similarity_csv(&matrix);
        assert_eq!(csv.lines().count(), 1 + 9, "header plus full 3x3 grid");
        assert!(csv.contains("x,hupi,2,x,hupi,2,1.000000"));
        assert!(
            csv.lines().any(|l| l.starts_with("x,tragedy,2,x,tragedy,2,") && l.ends_with(',')),
            "constant profile's diagonal is empty, not zero"
        );

        let svg = similarity_svg("similarity", &matrix);
        assert_eq!(svg.matches("<rect").count(), 1 + 9, "background plus one rect per cell");
        assert!(svg.contains("#e0e0e0"), "undefined cells drawn gray");
    }

    #[test]
    fn outperformance_outputs_flag_sparse_cells() {
        let comparison = |first: &str, second: &str| Comparison {
            first: first.into(),
            second: second.into(),
            score: 1.0,
            game: GameKind::Hupi,
            kind: ComparisonKind::CoPlay,
            first_event: 0,
            second_event: 0,
        };
        let heatmap = heatmap_from_comparisons(&[
            comparison("a", "b"),
            comparison("a", "b"),
            comparison("a", "b"),
        ]);
        let csv = outperformance_csv(&heatmap);
        assert!(csv.contains("a,b,1.000000,3,true"));
        assert!(csv.contains("b,a,0.000000,3,true"));

        let svg = outperformance_svg("wins", &heatmap);
        assert!(svg.contains("1.00*"), "sparse cells are starred");
    }

    #[test]
    fn bar_chart_handles_negative_values() {
        let bars = vec![
            ("up".to_string(), 0.4, 0.05),
            ("down".to_string(), -0.2, 0.1),
        ];
        let csv = bar_chart_csv(&bars);
        assert!(csv.contains("down,-0.200000,0.100000"));
        let svg = bar_chart_svg("stats", &bars);
        assert_eq!(svg.matches("<rect").count(), 1 + 2, "background plus one rect per bar");
        assert!(svg.matches("<line").count() >= 8, "axes, gridlines, and whiskers");
    }

    #[test]
    fn roc_outputs_render_each_curve() {
        let curves = vec![
            ("fixed".to_string(), vec![(0.0, 0.0), (0.25, 0.75), (1.0, 1.0)]),
            ("per-game".to_string(), vec![(0.0, 0.0), (0.1, 0.9), (1.0, 1.0)]),
        ];
        let csv = roc_csv(&curves);
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(csv.contains("fixed,0.250000,0.750000"));
        let svg = roc_svg("roc", &curves);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("per-game"));
    }
}
