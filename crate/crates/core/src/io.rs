//! File formats: measure JSON, grid-function and report CSV, 17-digit JSON
//! and a fixed-viewport SVG line plot.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::boundary::{GridFunction, ScaleValue};
use crate::error::{Error, Result};
use crate::geometry::DiscPoint;
use crate::measure::{Atom, CarlesonProfile, PointMassMeasure};

/// Shortest fixed-width form that round-trips every `f64`: 17 significant
/// digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    atoms: Vec<FileAtom>,
}

// Validation happens while the atom object is still being read, so
// serde_json reports the atom's own line.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileAtom {
    r: Radius,
    theta: Angle,
    w: Weight,
}

#[derive(Deserialize)]
#[serde(try_from = "f64")]
struct Radius(f64);

#[derive(Deserialize)]
#[serde(try_from = "f64")]
struct Angle(f64);

#[derive(Deserialize)]
#[serde(try_from = "f64")]
struct Weight(f64);

impl TryFrom<f64> for Radius {
    type Error = String;

    fn try_from(r: f64) -> std::result::Result<Self, String> {
        if r >= 0.0 && r < 1.0 {
            Ok(Radius(r))
        } else {
            Err(format!("atom radius r = {r} must lie in [0, 1)"))
        }
    }
}

impl TryFrom<f64> for Angle {
    type Error = String;

    fn try_from(t: f64) -> std::result::Result<Self, String> {
        if t.is_finite() {
            Ok(Angle(t))
        } else {
            Err(format!("atom angle theta = {t} is not finite"))
        }
    }
}

impl TryFrom<f64> for Weight {
    type Error = String;

    fn try_from(w: f64) -> std::result::Result<Self, String> {
        if w > 0.0 && w.is_finite() {
            Ok(Weight(w))
        } else {
            Err(format!("atom weight w = {w} must be positive and finite"))
        }
    }
}

/// Parses `{"atoms": [{"r": .., "theta": .., "w": ..}, ..]}`; errors carry
/// the line of the offending atom.
pub fn parse_measure(text: &str, path: &str) -> Result<PointMassMeasure> {
    let file: MeasureFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_string(),
        line: e.line(),
        message: strip_position(&e.to_string()),
    })?;
    PointMassMeasure::new(
        file.atoms
            .into_iter()
            .map(|a| Atom {
                point: DiscPoint::from_polar(a.r.0, a.theta.0),
                weight: a.w.0,
            })
            .collect(),
    )
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(k) => message[..k].to_string(),
        None => message.to_string(),
    }
}

pub fn read_measure(path: &Path) -> Result<PointMassMeasure> {
    parse_measure(&std::fs::read_to_string(path)?, &path.display().to_string())
}

pub fn measure_json(mu: &PointMassMeasure) -> String {
    let mut out = String::from("{\n  \"atoms\": [");
    for (k, a) in mu.atoms().iter().enumerate() {
        let sep = if k == 0 { "\n" } else { ",\n" };
        write!(
            out,
            "{sep}    {{\"r\": {}, \"theta\": {}, \"w\": {}}}",
            fmt_f64(a.point.radius()),
            fmt_f64(a.point.angle()),
            fmt_f64(a.weight)
        )
        .unwrap();
    }
    out.push_str(if mu.is_empty() {
        "]\n}\n"
    } else {
        "\n  ]\n}\n"
    });
    out
}

/// `depth,D` followed by `2^D` values, one per line.
pub fn grid_csv(f: &GridFunction) -> String {
    let mut out = format!("depth,{}\n", f.depth());
    for v in f.values() {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    out
}

pub fn parse_grid_csv(text: &str, path: &str) -> Result<GridFunction> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let depth: u32 = header
        .trim()
        .strip_prefix("depth,")
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(|| err(1, format!("expected header `depth,D`, found `{header}`")))?;
    if depth > 26 {
        return Err(err(1, format!("depth {depth} exceeds 26")));
    }
    let mut values = Vec::with_capacity(1 << depth);
    for (k, line) in lines {
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| err(k + 1, format!("not a number: `{}`", line.trim())))?;
        if !v.is_finite() {
            return Err(err(k + 1, format!("non-finite value `{}`", line.trim())));
        }
        values.push(v);
    }
    if values.len() != 1 << depth {
        return Err(err(
            text.lines().count(),
            format!(
                "expected {} values for depth {depth}, found {}",
                1u64 << depth,
                values.len()
            ),
        ));
    }
    GridFunction::new(depth, values)
}

pub fn read_grid_csv(path: &Path) -> Result<GridFunction> {
    parse_grid_csv(&std::fs::read_to_string(path)?, &path.display().to_string())
}

pub fn profile_csv(profile: &CarlesonProfile) -> String {
    let mut out = String::from("level,scale,max_ratio\n");
    for e in &profile.entries {
        writeln!(
            out,
            "{},{},{}",
            e.level,
            fmt_f64(e.scale),
            fmt_f64(e.max_ratio)
        )
        .unwrap();
    }
    out
}

/// `level,scale,value` rows.
pub fn level_csv(rows: &[ScaleValue]) -> String {
    let mut out = String::from("level,scale,value\n");
    for r in rows {
        writeln!(out, "{},{},{}", r.level, fmt_f64(r.scale), fmt_f64(r.value)).unwrap();
    }
    out
}

/// A CSV with the given header and rows of numbers; integral columns are
/// written without a fractional part.
pub fn table_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| {
                if v.fract() == 0.0 && v.abs() < 1e15 {
                    format!("{}", *v as i64)
                } else {
                    fmt_f64(*v)
                }
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Pretty JSON whose floats carry 17 significant digits.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17::default());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Invalid(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Default)]
struct Digits17 {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.pretty.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.pretty.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(writer)
    }
}

/// Line plot of `value` against `log2(1/scale)` on a fixed 640x400
/// viewport. Non-positive values are drawn on the axis.
pub fn svg_plot(title: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let xs: Vec<f64> = points.iter().map(|p| -p.0.log2()).collect();
    let (x0, x1) = bounds(&xs);
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (_, y1) = bounds(&ys);
    let y0 = 0.0f64.min(ys.iter().copied().fold(0.0, f64::min));
    let sx = |x: f64| M + (W - 2.0 * M) * if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.5 };
    let sy = |y: f64| H - M - (H - 2.0 * M) * if y1 > y0 { (y - y0) / (y1 - y0) } else { 0.0 };
    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    )
    .unwrap();
    writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>"
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        W / 2.0,
        escape(title)
    )
    .unwrap();
    writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"black\" points=\"{M},{M} {M},{b} {r},{b}\"/>",
        b = H - M,
        r = W - M
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">log2(1/scale)</text>",
        W / 2.0,
        H - 12.0
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"14\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">{}</text>",
        H / 2.0,
        H / 2.0,
        escape(y_label)
    )
    .unwrap();
    for (label, y) in [(y0, sy(y0)), (y1, sy(y1))] {
        writeln!(
            out,
            "<text x=\"{}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.3e}</text>",
            M - 4.0,
            y + 4.0,
            label
        )
        .unwrap();
    }
    let path: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| format!("{:.3},{:.3}", sx(*x), sy(*y)))
        .collect();
    writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" points=\"{}\"/>",
        path.join(" ")
    )
    .unwrap();
    for p in &path {
        let (x, y) = p.split_once(',').unwrap();
        writeln!(
            out,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"3\" fill=\"#1f4e9c\"/>"
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .fold(f64::INFINITY, f64::min);
    let hi = v
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_round_trip() {
        let mu = PointMassMeasure::from_polar([(0.5, 0.25, 1.0), (0.999, 0.1, 1e-3)]).unwrap();
        let back = parse_measure(&measure_json(&mu), "m.json").unwrap();
        assert_eq!(back, mu);
        assert!(
            parse_measure(&measure_json(&PointMassMeasure::empty()), "e")
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn bad_atom_reports_line() {
        let text = "{\"atoms\": [\n {\"r\": 0.5, \"theta\": 0.1, \"w\": 1},\n {\"r\": 1.0, \"theta\": 0.2, \"w\": 1}\n]}";
        match parse_measure(text, "m.json") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("radius"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let text = "{\"atoms\": [\n {\"r\": 0.5, \"theta\": 0.1, \"w\": 0}\n]}";
        assert!(matches!(
            parse_measure(text, "m"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn grid_round_trip() {
        let f = GridFunction::from_fn(5, |t| (t * 7.0).sin() / 3.0).unwrap();
        let back = parse_grid_csv(&grid_csv(&f), "f.csv").unwrap();
        assert_eq!(back, f);
        assert!(parse_grid_csv("depth,2\n1\n2\n3\n", "f").is_err());
        assert!(matches!(
            parse_grid_csv("depth,1\n1\nx\n", "f"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn json_digits() {
        let s = to_json(&vec![0.1f64, 1.0]).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let v: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(v, vec![0.1, 1.0]);
    }

    #[test]
    fn svg_is_deterministic() {
        let pts = [(0.5, 1.0), (0.25, 0.5), (0.125, 0.0)];
        assert_eq!(svg_plot("t", "v", &pts), svg_plot("t", "v", &pts));
        assert!(svg_plot("a<b", "v", &[]).contains("a&lt;b"));
    }
}
