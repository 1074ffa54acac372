// SPDX-License-Identifier: Apache-2.0

//! CSV tables and SVG floorplans. Numbers are written with six significant
//! digits so outputs are stable across runs and platforms.

use std::fmt::Write as _;

use crate::costyield::CostBreakdown;
use crate::perf::ConfigResult;
use crate::phy::CurvePoint;
use crate::place::{CalibrationRow, Floorplan, HistoryRow, SweepRow};
use crate::power::SystemPower;
use crate::thermal::TemperatureField;

/// `printf("%g")` with six significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        strip_zeros(format!("{:.*}", (5 - exp) as usize, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{}{:02}",
            strip_zeros(mantissa.to_string()),
            sign,
            exp.abs()
        )
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A CSV table with a header row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = row.iter().map(|c| escape(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// One row per die plus a `package` summary row.
pub fn cost_table(names: &[String], breakdown: &CostBreakdown) -> Table {
    let mut t = Table::new(&[
        "item",
        "area_mm2",
        "count",
        "gross_dies_per_wafer",
        "die_yield",
        "cost_per_die",
        "assembly_yield",
        "package_cost",
    ]);
    for (name, d) in names.iter().zip(&breakdown.dies) {
        t.push(vec![
            name.clone(),
            fmt_num(d.area),
            d.count.to_string(),
            d.gross_dies_per_wafer.to_string(),
            fmt_num(d.die_yield),
            fmt_num(d.cost_per_die),
            String::new(),
            String::new(),
        ]);
    }
    t.push(vec![
        "package".into(),
        String::new(),
        breakdown
            .dies
            .iter()
            .map(|d| d.count)
            .sum::<u64>()
            .to_string(),
        String::new(),
        String::new(),
        fmt_num(breakdown.die_cost_sum),
        fmt_num(breakdown.assembly_yield),
        fmt_num(breakdown.package_cost),
    ]);
    t
}

pub fn power_table(sp: &SystemPower) -> Table {
    let mut t = Table::new(&[
        "tile",
        "switching_w",
        "short_circuit_w",
        "leakage_w",
        "total_w",
    ]);
    for (name, b) in &sp.tiles {
        t.push(vec![
            name.clone(),
            fmt_num(b.switching),
            fmt_num(b.short_circuit),
            fmt_num(b.leakage),
            fmt_num(b.total),
        ]);
    }
    t.push(vec![
        "total".into(),
        String::new(),
        String::new(),
        String::new(),
        fmt_num(sp.total),
    ]);
    t
}

pub fn perf_table(ranked: &[ConfigResult]) -> Table {
    let mut t = Table::new(&[
        "config",
        "cost",
        "throughput",
        "latency",
        "golden_ratio",
        "relative",
    ]);
    for r in ranked {
        t.push(vec![
            r.name.clone(),
            fmt_num(r.cost),
            fmt_num(r.throughput),
            fmt_num(r.latency),
            fmt_num(r.golden_ratio),
            fmt_num(r.relative),
        ]);
    }
    t
}

pub fn phy_table(curve: &[CurvePoint]) -> Table {
    let mut t = Table::new(&["length_mm", "log10_bw_hz", "log10_target_hz"]);
    for p in curve {
        t.push(vec![
            fmt_num(p.length * 1e3),
            fmt_num(p.log10_bandwidth),
            fmt_num(p.log10_target),
        ]);
    }
    t
}

/// Cell-center coordinates in mm.
pub fn temperature_table(tf: &TemperatureField) -> Table {
    let mut t = Table::new(&["layer", "x_mm", "y_mm", "t_c"]);
    for (l, name) in tf.layer_names.iter().enumerate() {
        for j in 0..tf.ny {
            for i in 0..tf.nx {
                t.push(vec![
                    name.clone(),
                    fmt_num((i as f64 + 0.5) * tf.dx * 1e3),
                    fmt_num((j as f64 + 0.5) * tf.dy * 1e3),
                    fmt_num(tf.at(l, i, j)),
                ]);
            }
        }
    }
    t
}

pub fn layer_peaks_table(tf: &TemperatureField) -> Table {
    let mut t = Table::new(&["layer", "peak_c"]);
    for (l, name) in tf.layer_names.iter().enumerate() {
        t.push(vec![name.clone(), fmt_num(tf.hottest_cell(l).2)]);
    }
    t
}

pub fn history_table(history: &[HistoryRow]) -> Table {
    let mut t = Table::new(&[
        "iteration",
        "peak_t_c",
        "wirelength_mm",
        "cost",
        "k",
        "best_cost",
        "accepted",
    ]);
    for h in history {
        t.push(vec![
            h.iteration.to_string(),
            fmt_num(h.peak_temperature),
            fmt_num(h.wirelength),
            fmt_num(h.cost),
            fmt_num(h.k),
            fmt_num(h.best_cost),
            h.accepted.to_string(),
        ]);
    }
    t
}

pub fn calibration_table(rows: &[CalibrationRow]) -> Table {
    let mut t = Table::new(&["k0", "iterations", "converged", "final_peak_t_c"]);
    for r in rows {
        t.push(vec![
            fmt_num(r.k0),
            r.iterations.to_string(),
            r.converged.to_string(),
            fmt_num(r.final_peak),
        ]);
    }
    t
}

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&[
        "side_mm",
        "area_mm2",
        "feasible",
        "initial_peak_t_c",
        "peak_t_c",
        "iterations",
    ]);
    for r in rows {
        t.push(vec![
            fmt_num(r.side),
            fmt_num(r.area),
            r.feasible().to_string(),
            opt(r.initial_peak),
            opt(r.peak),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
        ]);
    }
    t
}

const PX_PER_MM: f64 = 10.0;
const MARGIN: f64 = 20.0;

/// SVG 1.1 drawing of the interposer and its chiplets. Each die carries a
/// tick from its center toward its own unrotated top edge, so the rotation
/// is visible; the label also states it in degrees.
pub fn floorplan_svg(fp: &Floorplan) -> String {
    let w = fp.interposer_width * PX_PER_MM;
    let h = fp.interposer_height * PX_PER_MM;
    let sx = |x: f64| MARGIN + x * PX_PER_MM;
    let sy = |y: f64| MARGIN + h - y * PX_PER_MM;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        fmt_num(w + 2.0 * MARGIN),
        fmt_num(h + 2.0 * MARGIN),
        fmt_num(w + 2.0 * MARGIN),
        fmt_num(h + 2.0 * MARGIN)
    );
    let _ = writeln!(
        s,
        r##"  <rect class="interposer" x="{}" y="{}" width="{}" height="{}" fill="#f4f1e8" stroke="#333" stroke-width="2"/>"##,
        fmt_num(MARGIN),
        fmt_num(MARGIN),
        fmt_num(w),
        fmt_num(h)
    );
    for p in &fp.placements {
        let r = p.rect();
        let (cx, cy) = p.center();
        let (dx, dy) = match p.rotation.degrees() {
            0 => (0.0, 1.0),
            90 => (-1.0, 0.0),
            180 => (0.0, -1.0),
            _ => (1.0, 0.0),
        };
        let (ew, eh) = p.extent();
        let reach = 0.4 * if dx != 0.0 { ew } else { eh };
        let _ = writeln!(s, r#"  <g class="chiplet" id="{}">"#, xml_escape(&p.name));
        let _ = writeln!(
            s,
            r##"    <rect x="{}" y="{}" width="{}" height="{}" fill="#8fb3d9" stroke="#1f3b5a" stroke-width="1"/>"##,
            fmt_num(sx(r.x0)),
            fmt_num(sy(r.y1)),
            fmt_num(r.width() * PX_PER_MM),
            fmt_num(r.height() * PX_PER_MM)
        );
        let _ = writeln!(
            s,
            r##"    <line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#c0392b" stroke-width="2"/>"##,
            fmt_num(sx(cx)),
            fmt_num(sy(cy)),
            fmt_num(sx(cx + dx * reach)),
            fmt_num(sy(cy + dy * reach))
        );
        let _ = writeln!(
            s,
            r#"    <text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{} ({}°)</text>"#,
            fmt_num(sx(cx)),
            fmt_num(sy(cy) + 12.0),
            xml_escape(&p.name),
            p.rotation.degrees()
        );
        let _ = writeln!(s, "  </g>");
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(36.5234567), "36.5235");
        assert_eq!(fmt_num(-0.25), "-0.25");
        assert_eq!(fmt_num(496123.0), "496123");
        assert_eq!(fmt_num(4961234.0), "4.96123e+06");
        assert_eq!(fmt_num(3.89e-10), "3.89e-10");
        assert_eq!(fmt_num(0.0001234), "0.0001234");
        assert_eq!(fmt_num(999999.7), "1e+06");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), "1".into()]);
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",1\n");
    }
}
