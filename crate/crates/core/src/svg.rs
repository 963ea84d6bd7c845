//! Self-contained SVG sweep chart: mean interference (dBm) against the
//! exclusion-zone radius, one polyline per (model, density) pair.

use crate::analytic::InterferenceModel;
use crate::results::ResultRow;
use std::fmt::Write;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 220.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;

const COLORS: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn dash_for(model: InterferenceModel) -> &'static str {
    match model {
        InterferenceModel::Cbc => "",
        InterferenceModel::CbcApprox => "8 4",
        InterferenceModel::Aaecc => "2 3",
        InterferenceModel::AaeccApprox => "8 4 2 4",
        InterferenceModel::MonteCarlo => "1 2",
    }
}

/// Renders the sweep rows as a static chart. Rows with non-finite dBm values
/// are skipped. Returns a complete SVG document.
pub fn sweep_chart(rows: &[ResultRow]) -> String {
    let finite: Vec<&ResultRow> = rows.iter().filter(|r| r.mean_dbm.is_finite()).collect();

    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in &finite {
        x_lo = x_lo.min(r.r_exc_km);
        x_hi = x_hi.max(r.r_exc_km);
        y_lo = y_lo.min(r.mean_dbm);
        y_hi = y_hi.max(r.mean_dbm);
    }
    if !x_lo.is_finite() || x_hi <= x_lo {
        x_lo = 0.0;
        x_hi = 1.0;
    }
    if !y_lo.is_finite() || y_hi <= y_lo {
        y_lo = -1.0;
        y_hi = 0.0;
    }
    let pad = 0.05 * (y_hi - y_lo).max(1.0);
    y_lo -= pad;
    y_hi += pad;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_px = |x: f64| MARGIN_LEFT + plot_w * (x - x_lo) / (x_hi - x_lo);
    let y_px = |y: f64| MARGIN_TOP + plot_h * (1.0 - (y - y_lo) / (y_hi - y_lo));

    let mut svg = String::with_capacity(8192);
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = write!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // axes
    let _ = write!(
        svg,
        r#"<rect x="{}" y="{}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#,
        MARGIN_LEFT, MARGIN_TOP
    );
    for i in 0..=6 {
        let fx = x_lo + (x_hi - x_lo) * i as f64 / 6.0;
        let px = x_px(fx);
        let _ = write!(
            svg,
            r##"<line x1="{px:.1}" y1="{}" x2="{px:.1}" y2="{}" stroke="#ccc"/>"##,
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        );
        let _ = write!(
            svg,
            r#"<text x="{px:.1}" y="{}" font-size="12" text-anchor="middle">{fx:.0}</text>"#,
            MARGIN_TOP + plot_h + 18.0
        );
        let fy = y_lo + (y_hi - y_lo) * i as f64 / 6.0;
        let py = y_px(fy);
        let _ = write!(
            svg,
            r##"<line x1="{}" y1="{py:.1}" x2="{}" y2="{py:.1}" stroke="#eee"/>"##,
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        );
        let _ = write!(
            svg,
            r#"<text x="{}" y="{py:.1}" font-size="12" text-anchor="end" dominant-baseline="middle">{fy:.0}</text>"#,
            MARGIN_LEFT - 6.0
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">exclusion zone radius (km)</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    );
    let _ = write!(
        svg,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">mean interference (dBm)</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    // one series per (model, lambda), ordered deterministically
    let mut keys: Vec<(InterferenceModel, u64)> =
        finite.iter().map(|r| (r.model, r.lambda_bs_per_km2.to_bits())).collect();
    keys.sort_by(|a, b| a.0.name().cmp(b.0.name()).then(a.1.cmp(&b.1)));
    keys.dedup();

    for (si, (model, lambda_bits)) in keys.iter().enumerate() {
        let lambda = f64::from_bits(*lambda_bits);
        let mut pts: Vec<(f64, f64)> = finite
            .iter()
            .filter(|r| r.model == *model && r.lambda_bs_per_km2.to_bits() == *lambda_bits)
            .map(|r| (r.r_exc_km, r.mean_dbm))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = COLORS[si % COLORS.len()];
        let coords: String = pts
            .iter()
            .map(|(x, y)| format!("{:.1},{:.1}", x_px(*x), y_px(*y)))
            .collect::<Vec<_>>()
            .join(" ");
        let dash = dash_for(*model);
        let dash_attr = if dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let _ = write!(
            svg,
            r#"<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"{dash_attr}/>"#
        );
        // legend
        let ly = MARGIN_TOP + 16.0 + 20.0 * si as f64;
        let lx = WIDTH - MARGIN_RIGHT + 14.0;
        let _ = write!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash_attr}/>"#,
            lx + 26.0
        );
        let _ = write!(
            svg,
            r#"<text x="{}" y="{}" font-size="12">{} λ={lambda}/km²</text>"#,
            lx + 32.0,
            ly + 4.0,
            model.name()
        );
    }

    svg.push_str("</svg>");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_contains_series_and_legend() {
        let rows: Vec<ResultRow> = [5.0, 10.0, 20.0]
            .iter()
            .enumerate()
            .map(|(i, &r)| ResultRow {
                model: InterferenceModel::Cbc,
                lambda_bs_per_km2: 0.1,
                r_exc_km: r,
                mean_dbm: -80.0 - 3.0 * i as f64,
                error_db: 0.1,
                elevation_parameter: 0.028,
                eta: None,
                wall_time_s: 0.0,
            })
            .collect();
        let svg = sweep_chart(&rows);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("cbc"));
        assert!(svg.contains("exclusion zone radius"));
    }

    #[test]
    fn empty_rows_still_render_frame() {
        let svg = sweep_chart(&[]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>"));
    }
}
