//! SVG charts for experiment reports.

use std::path::Path;

use hcbm::experiments::{ExperimentConfig, ExperimentReport, IsoquantReport};
use hcbm::Coefficient;
use plotters::element::DashedPathElement;
use plotters::prelude::*;
use plotters::style::text_anchor::{HPos, Pos, VPos};

use crate::failure::{CliResult, Failure};

const GAUSSIAN: RGBColor = RGBColor(200, 0, 200);
const HEAVY: RGBColor = RGBColor(30, 60, 220);

/// One panel per algorithm; magenta for Gaussian, blue for other models,
/// dashed for Pearson, solid for Spearman.
pub fn convergence(path: &Path, config: &ExperimentConfig, report: &ExperimentReport) -> CliResult {
    draw_convergence(path, config, report).map_err(|e| Failure::write(path, e))
}

fn draw_convergence(
    path: &Path,
    config: &ExperimentConfig,
    report: &ExperimentReport,
) -> Result<(), Box<dyn std::error::Error>> {
    let panels = config.algorithms.len();
    let root = SVGBackend::new(path, (420 * panels as u32, 380)).into_drawing_area();
    root.fill(&WHITE)?;
    let t_max = *config.t_grid.last().expect("validated grid") as f64;
    for (area, &algorithm) in root
        .split_evenly((1, panels))
        .iter()
        .zip(&config.algorithms)
    {
        let mut chart = ChartBuilder::on(area)
            .caption(algorithm.name(), ("sans-serif", 18))
            .margin(10)
            .x_label_area_size(35)
            .y_label_area_size(45)
            .build_cartesian_2d(0.0..t_max, 0.0..1.02)?;
        chart
            .configure_mesh()
            .x_desc("T")
            .y_desc("recovery ratio")
            .draw()?;
        for (m, model) in config.models.iter().enumerate() {
            let color = if m == 0 { GAUSSIAN } else { HEAVY };
            for &coefficient in &config.coefficients {
                let points: Vec<(f64, f64)> = config
                    .t_grid
                    .iter()
                    .filter_map(|&t| {
                        report
                            .get(t, model, algorithm, coefficient)
                            .map(|r| (t as f64, r.ratio))
                    })
                    .collect();
                let label = format!("{} / {}", model.name(), coefficient.name());
                let style = color.stroke_width(2);
                match coefficient {
                    Coefficient::Pearson => chart
                        .draw_series(DashedLineSeries::new(points, 6, 4, style))?
                        .label(label)
                        .legend(move |(x, y)| {
                            DashedPathElement::new(vec![(x, y), (x + 18, y)], 5, 3, style)
                        }),
                    Coefficient::Spearman => chart
                        .draw_series(LineSeries::new(points, style))?
                        .label(label)
                        .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], style)),
                };
            }
        }
        chart
            .configure_series_labels()
            .position(SeriesLabelPosition::LowerRight)
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()?;
    }
    root.present()?;
    Ok(())
}

/// Recovery ratio on a blue (0) to red (1) scale, `rho` up, `T` across.
pub fn isoquant(path: &Path, report: &IsoquantReport) -> CliResult {
    draw_isoquant(path, report).map_err(|e| Failure::write(path, e))
}

fn heat(v: f64) -> RGBColor {
    let v = v.clamp(0.0, 1.0);
    RGBColor(
        (255.0 * v) as u8,
        (60.0 * (1.0 - (2.0 * v - 1.0).abs())) as u8,
        (255.0 * (1.0 - v)) as u8,
    )
}

fn draw_isoquant(path: &Path, report: &IsoquantReport) -> Result<(), Box<dyn std::error::Error>> {
    let (nr, nt) = (report.rho_grid.len(), report.t_grid.len());
    let root =
        SVGBackend::new(path, (120 + 70 * nt as u32, 100 + 45 * nr as u32)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("recovery ratio", ("sans-serif", 18))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(50)
        // an integer range a..b has b - a + 1 segments
        .build_cartesian_2d(
            (0..nt.max(2) - 1).into_segmented(),
            (0..nr.max(2) - 1).into_segmented(),
        )?;
    let label = |grid: &[String], v: &SegmentValue<usize>| match v {
        SegmentValue::CenterOf(i) => grid.get(*i).cloned().unwrap_or_default(),
        _ => String::new(),
    };
    let t_labels: Vec<String> = report.t_grid.iter().map(|t| t.to_string()).collect();
    let rho_labels: Vec<String> = report.rho_grid.iter().map(|r| format!("{r:.2}")).collect();
    chart
        .configure_mesh()
        .disable_mesh()
        .x_labels(nt)
        .y_labels(nr)
        .x_desc("T")
        .y_desc("rho")
        .x_label_formatter(&|v| label(&t_labels, v))
        .y_label_formatter(&|v| label(&rho_labels, v))
        .draw()?;
    chart.draw_series((0..nr).flat_map(|r| {
        (0..nt).map(move |t| {
            let v = report.cell(r, t).ratio;
            let corners = [
                (SegmentValue::Exact(t), SegmentValue::Exact(r)),
                (SegmentValue::Exact(t + 1), SegmentValue::Exact(r + 1)),
            ];
            Rectangle::new(corners, heat(v).filled())
        })
    }))?;
    chart.draw_series((0..nr).flat_map(|r| {
        (0..nt).map(move |t| {
            Text::new(
                format!("{:.2}", report.cell(r, t).ratio),
                (SegmentValue::CenterOf(t), SegmentValue::CenterOf(r)),
                ("sans-serif", 13)
                    .into_font()
                    .color(&WHITE)
                    .pos(Pos::new(HPos::Center, VPos::Center)),
            )
        })
    }))?;
    root.present()?;
    Ok(())
}
