use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::geometry::{Ring, WorldGeometry};
use crate::ids::Iso3;
use crate::map::DatasetMap;
use crate::stats::SpeakerComparison;

const MAP_WIDTH: f64 = 1000.0;
const MAP_HEIGHT: f64 = 500.0;
const LEGEND_HEIGHT: f64 = 90.0;
const ABSENT_FILL: &str = "#e6e6e6";
const LOW: (u8, u8, u8) = (0xfe, 0xe5, 0xd9);
const HIGH: (u8, u8, u8) = (0xa5, 0x0f, 0x15);
const DATASET_FILL: &str = "#d62728";
const SPEAKER_FILL: &str = "#2ca02c";
const LEGEND_STEPS: usize = 5;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorScale {
    /// Intensity `ln(1 + w) / ln(1 + max)`.
    #[default]
    Log,
    /// Intensity `w / max`.
    Linear,
}

impl std::str::FromStr for ColorScale {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "log" => Ok(ColorScale::Log),
            "linear" => Ok(ColorScale::Linear),
            other => Err(crate::Error::InvalidInput(format!("unknown color scale {other:?} (expected log or linear)"))),
        }
    }
}

impl ColorScale {
    fn intensity(self, weight: f64, max: f64) -> f64 {
        if weight <= 0.0 || max <= 0.0 {
            return 0.0;
        }
        let v = match self {
            ColorScale::Log => weight.ln_1p() / max.ln_1p(),
            ColorScale::Linear => weight / max,
        };
        v.clamp(0.0, 1.0)
    }

    fn weight_at(self, intensity: f64, max: f64) -> f64 {
        match self {
            ColorScale::Log => (intensity * max.ln_1p()).exp_m1(),
            ColorScale::Linear => intensity * max,
        }
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn fill(intensity: f64) -> String {
    let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * intensity).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(LOW.0, HIGH.0), mix(LOW.1, HIGH.1), mix(LOW.2, HIGH.2))
}

fn project((lon, lat): (f64, f64)) -> (f64, f64) {
    ((lon + 180.0) / 360.0 * MAP_WIDTH, (90.0 - lat) / 180.0 * MAP_HEIGHT)
}

fn path_data(polygons: &[Vec<Ring>]) -> String {
    let mut d = String::new();
    for ring in polygons.iter().flatten() {
        for (i, point) in ring.iter().enumerate() {
            let (x, y) = project(*point);
            let _ = write!(d, "{}{x:.1} {y:.1}", if i == 0 { "M" } else { "L" });
        }
        d.push('Z');
    }
    d
}

fn format_weight(w: f64) -> String {
    if w >= 100.0 {
        format!("{w:.0}")
    } else {
        format!("{w:.2}")
    }
}

/// Renders the map's country weights as an equirectangular choropleth.
///
/// Each country with an outline becomes a `<g>` carrying `data-iso3`,
/// `data-weight` and `data-intensity`; zero-weight countries use the absent
/// color. Weighted countries without an outline are listed in the legend
/// under "ungeolocated".
pub fn emit_choropleth(map: &DatasetMap, geometry: &WorldGeometry, scale: ColorScale) -> String {
    let max = map.weights.values().copied().fold(0.0, f64::max);
    let ungeolocated: Vec<(&Iso3, f64)> =
        map.weights.iter().filter(|(iso, w)| **w > 0.0 && geometry.get(iso).is_none()).map(|(i, w)| (i, *w)).collect();
    let height = MAP_HEIGHT + LEGEND_HEIGHT + if ungeolocated.is_empty() { 0.0 } else { 20.0 };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{MAP_WIDTH}" height="{height}" viewBox="0 0 {MAP_WIDTH} {height}">"#
    );
    let title = format!("{} {} entity map", map.corpus_id, map.language);
    let _ = writeln!(svg, "<title>{}</title>", escape(title.trim()));
    let _ = writeln!(
        svg,
        r##"<rect class="ocean" x="0" y="0" width="{MAP_WIDTH}" height="{MAP_HEIGHT}" fill="#f5f9fc"/>"##
    );
    let _ = writeln!(svg, r##"<g class="countries" stroke="#ffffff" stroke-width="0.3" fill-rule="evenodd">"##);
    for iso in geometry.countries() {
        let weight = map.weight(iso);
        let intensity = scale.intensity(weight, max);
        let (class, color) =
            if weight > 0.0 { ("present", fill(intensity)) } else { ("absent", ABSENT_FILL.to_string()) };
        let _ = writeln!(
            svg,
            r#"<g class="{class}" data-iso3="{iso}" data-weight="{weight}" data-intensity="{intensity:.6}" fill="{color}"><path d="{}"/></g>"#,
            path_data(geometry.get(iso).unwrap_or(&[]))
        );
    }
    svg.push_str("</g>\n");

    let top = MAP_HEIGHT + 15.0;
    let _ = writeln!(svg, r#"<g class="legend" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(
        svg,
        r#"<text x="10" y="{}">{} scale</text>"#,
        top + 10.0,
        match scale {
            ColorScale::Log => "log",
            ColorScale::Linear => "linear",
        }
    );
    let _ = writeln!(
        svg,
        r#"<rect class="legend-absent" x="10" y="{}" width="30" height="12" fill="{ABSENT_FILL}"/><text x="10" y="{}">0</text>"#,
        top + 18.0,
        top + 44.0
    );
    for step in 1..=LEGEND_STEPS {
        let intensity = step as f64 / LEGEND_STEPS as f64;
        let x = 10.0 + 50.0 * step as f64;
        let _ = writeln!(
            svg,
            r#"<rect class="legend-step" x="{x}" y="{}" width="30" height="12" fill="{}" data-intensity="{intensity:.6}"/><text x="{x}" y="{}">{}</text>"#,
            top + 18.0,
            fill(intensity),
            top + 44.0,
            format_weight(scale.weight_at(intensity, max))
        );
    }
    if !ungeolocated.is_empty() {
        let listed: Vec<String> =
            ungeolocated.iter().map(|(iso, w)| format!("{iso} ({})", format_weight(*w))).collect();
        let _ = writeln!(
            svg,
            r#"<text class="ungeolocated" x="10" y="{}">ungeolocated: {}</text>"#,
            top + 66.0,
            escape(&listed.join(", "))
        );
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}

/// Grouped bar chart of dataset share (red) against speaker share (green)
/// for the `top_k` profile countries with the largest dataset share.
///
/// Bars carry their share in `data-value`; heights are relative to the
/// largest share shown.
pub fn emit_bars(comparison: &SpeakerComparison, top_k: usize) -> String {
    const WIDTH: f64 = 640.0;
    const PLOT_TOP: f64 = 40.0;
    const PLOT_HEIGHT: f64 = 240.0;
    const HEIGHT: f64 = 320.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, "<title>dataset share vs speaker share</title>");

    let mut rows: Vec<(&Iso3, f64, f64)> = comparison
        .countries
        .iter()
        .zip(comparison.entity_share.iter().zip(&comparison.speaker_share))
        .map(|(iso, (e, s))| (iso, *e, *s))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.2.total_cmp(&a.2)).then_with(|| a.0.cmp(b.0)));
    rows.truncate(top_k);

    if rows.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text class="empty" x="{}" y="{}" text-anchor="middle">no data to plot</text>"#,
            WIDTH / 2.0,
            HEIGHT / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }

    let _ = writeln!(
        svg,
        r#"<g class="legend"><rect x="20" y="12" width="12" height="12" fill="{DATASET_FILL}"/><text x="38" y="22">dataset share</text><rect x="140" y="12" width="12" height="12" fill="{SPEAKER_FILL}"/><text x="158" y="22">speaker share</text></g>"#
    );
    let max = rows.iter().flat_map(|r| [r.1, r.2]).fold(0.0, f64::max);
    let group_width = (WIDTH - 40.0) / rows.len() as f64;
    let bar_width = group_width * 0.35;
    let baseline = PLOT_TOP + PLOT_HEIGHT;
    let bar = |svg: &mut String, series: &str, color: &str, x: f64, value: f64| {
        let h = if max > 0.0 { value / max * PLOT_HEIGHT } else { 0.0 };
        let _ = writeln!(
            svg,
            r#"<rect class="bar {series}" x="{x:.2}" y="{:.2}" width="{bar_width:.2}" height="{h:.2}" fill="{color}" data-series="{series}" data-value="{value}"/>"#,
            baseline - h
        );
    };
    for (i, (iso, entity, speaker)) in rows.iter().enumerate() {
        let x0 = 20.0 + group_width * i as f64 + group_width * 0.15;
        let _ = writeln!(svg, r#"<g class="group" data-iso3="{iso}">"#);
        bar(&mut svg, "dataset-share", DATASET_FILL, x0, *entity);
        bar(&mut svg, "speaker-share", SPEAKER_FILL, x0 + bar_width, *speaker);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{iso}</text>"#,
            x0 + bar_width,
            baseline + 16.0
        );
        svg.push_str("</g>\n");
    }
    let _ =
        writeln!(svg, r##"<line x1="20" y1="{baseline}" x2="{}" y2="{baseline}" stroke="#333333"/>"##, WIDTH - 20.0);
    svg.push_str("</svg>\n");
    svg
}

/// Country intensities as emitted, keyed by code. Used by tests.
#[cfg(test)]
pub(crate) fn intensities(svg: &str) -> std::collections::BTreeMap<String, f64> {
    let doc = roxmltree::Document::parse(svg).unwrap();
    doc.descendants()
        .filter(|n| n.has_attribute("data-iso3") && n.has_attribute("data-intensity"))
        .map(|n| {
            (n.attribute("data-iso3").unwrap().to_string(), n.attribute("data-intensity").unwrap().parse().unwrap())
        })
        .collect()
}
