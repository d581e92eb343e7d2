//! JSON and CSV output. Floats are written with 17 significant digits so
//! reports round-trip exactly and compare byte for byte across runs.

use std::io::{self, Write};
use std::path::Path;

use calabi_core::cutoff::ScalingRow;
use calabi_core::theorem::{TrajectoryPoint, CONVENTION_LEDGER};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{ForgeError, Result};

/// Pretty-printing formatter with fixed-width scientific floats.
pub struct FixedFormatter<'a>(PrettyFormatter<'a>);

impl Default for FixedFormatter<'_> {
    fn default() -> Self {
        Self(PrettyFormatter::with_indent(b"  "))
    }
}

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Formatter for FixedFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFormatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// SHA-256 of the convention ledger, hex encoded.
pub fn convention_fingerprint() -> String {
    format!("{:x}", Sha256::digest(CONVENTION_LEDGER.as_bytes()))
}

#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub ledger: &'static str,
    pub sha256: String,
}

impl Conventions {
    pub fn current() -> Self {
        Self {
            ledger: CONVENTION_LEDGER,
            sha256: convention_fingerprint(),
        }
    }
}

/// What every subcommand writes to `report.json`.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub conventions: Conventions,
    pub result: &'a T,
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| ForgeError::io(path, e))
}

pub fn write_json<T: Serialize>(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    result: &T,
) -> Result<()> {
    let env = Envelope {
        command,
        config,
        conventions: Conventions::current(),
        result,
    };
    write_file(&dir.join("report.json"), &to_json(&env)?)
}

pub fn scaling_csv(rows: &[ScalingRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rho3", "cal", "cal_abs", "err_bound", "certified_bound"])?;
    for r in rows {
        w.write_record([r.outer, r.cal, r.cal_abs, r.error, r.certified_bound].map(format_f64))?;
    }
    finish(w)
}

pub fn trajectories_csv(points: &[TrajectoryPoint]) -> Result<String> {
    let dim = points.first().map_or(0, |p| p.x.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["tracer".to_string(), "t".to_string()];
    let n = dim / 2;
    header.extend((1..=n).map(|k| format!("q{k}")));
    header.extend((1..=n).map(|k| format!("p{k}")));
    w.write_record(&header)?;
    for p in points {
        let mut rec = vec![p.tracer.to_string(), format_f64(p.t)];
        rec.extend(p.x.iter().map(|v| format_f64(*v)));
        w.write_record(&rec)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| ForgeError::Tolerance(format!("csv flush: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = to_json(&[0.1f64, -2.0, 1e-300]).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("-2.0000000000000000e0"), "{s}");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, -2.0, 1e-300]);
    }

    #[test]
    fn fingerprint_is_stable_hex() {
        let f = convention_fingerprint();
        assert_eq!(f.len(), 64);
        assert_eq!(f, convention_fingerprint());
    }

    #[test]
    fn scaling_csv_has_header_and_rows() {
        let rows = [ScalingRow {
            outer: 0.5,
            cal: -1e-15,
            cal_abs: 1e-15,
            error: 1e-14,
            certified_bound: 2.0,
        }];
        let csv = scaling_csv(&rows).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("rho3,cal,cal_abs,err_bound,certified_bound")
        );
        assert!(lines.next().unwrap().starts_with("5.0000000000000000e-1,"));
    }
}
