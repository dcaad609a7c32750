//! Report formats: JSON and CSV with 17 significant digits, atomic file writes.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};
use westervelt_core::{NormRecord, SweepRow, SweepStatus};

use crate::error::CliError;

pub const TRAJECTORY_HEADER: &str = "t,norm_u_W2,norm_ut_trace,max_abs_u,min_coeff_a";
pub const SWEEP_HEADER: &str = "amplitude,status,omega_hat,residual_rms,violation_time";

/// `d.dddddddddddddddde±x`: 17 significant digits, exact round trip.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // keep the sign of negative zero
        return if x.is_sign_negative() {
            "-0.0".into()
        } else {
            "0.0".into()
        };
    }
    format!("{x:.16e}")
}

/// Pretty JSON formatter that prints every float with 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident),* $(,)?) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.$name(w)
            }
        )*
    };
}

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    forward!(
        begin_array,
        end_array,
        end_array_value,
        begin_object,
        end_object,
        begin_object_value,
        end_object_value
    );
}

/// Serializes `value` as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Config(format!("field `{}`: {}", e.path(), e.inner())))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn trajectory_csv(records: &[NormRecord]) -> String {
    let mut s = String::with_capacity(96 * (records.len() + 1));
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.norm_u_w2),
            fmt_f64(r.norm_ut_trace),
            fmt_f64(r.max_abs_u),
            fmt_f64(r.min_coeff_a)
        );
    }
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let status = match r.status {
            SweepStatus::Completed => "completed",
            SweepStatus::ParabolicityViolation => "parabolicity_violation",
        };
        let _ = writeln!(
            s,
            "{},{status},{},{},{}",
            fmt_f64(r.amplitude),
            opt(r.omega_hat),
            opt(r.residual_rms),
            opt(r.violation_time)
        );
    }
    s
}

fn read_csv<T: DeserializeOwned>(text: &str, header: &str) -> Result<Vec<T>, CliError> {
    let bad = |m: String| CliError::Config(format!("csv: {m}"));
    if text.lines().next() != Some(header) {
        return Err(bad(format!("expected header `{header}`")));
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize()
        .map(|r| r.map_err(|e| bad(e.to_string())))
        .collect()
}

pub fn read_trajectory_csv(text: &str) -> Result<Vec<NormRecord>, CliError> {
    read_csv(text, TRAJECTORY_HEADER)
}

pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRow>, CliError> {
    read_csv(text, SWEEP_HEADER)
}

/// Hex SHA-256 of the raw config text.
pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Writes `contents` to a temporary file in the same directory, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

#[derive(Serialize)]
struct Meta<'a> {
    output: &'a str,
    command: &'a str,
    tool_version: &'a str,
    config_sha256: &'a str,
    written_unix_seconds: u64,
}

/// Writes the report and a `<name>.meta.json` sidecar holding the timestamp,
/// so that the report itself depends only on the configuration.
pub fn write_report(
    path: &Path,
    contents: &str,
    command: &str,
    config_sha256: &str,
) -> Result<(), CliError> {
    write_atomic(path, contents)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = Meta {
        output: &name,
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        config_sha256,
        written_unix_seconds: secs,
    };
    write_atomic(
        &path.with_file_name(format!("{name}.meta.json")),
        &to_json(&meta),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_17_digits() {
        for x in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            0.5,
            -0.0,
        ] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn json_numbers_use_fixed_digits() {
        let s = to_json(&serde_json::json!({"a": 0.1, "n": 3, "v": [1.5]}));
        assert!(s.contains("\"a\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("1.5000000000000000e0"));
        assert!(s.ends_with("}\n"));
    }

    #[test]
    fn sweep_csv_leaves_missing_values_empty() {
        let rows = [SweepRow {
            amplitude: 0.6,
            status: SweepStatus::ParabolicityViolation,
            omega_hat: None,
            residual_rms: None,
            violation_time: Some(0.0),
        }];
        let s = sweep_csv(&rows);
        assert_eq!(
            s.lines().nth(1).unwrap(),
            "5.9999999999999998e-1,parabolicity_violation,,,0.0"
        );
        assert!(!s.contains('\r'));
        assert_eq!(read_sweep_csv(&s).unwrap(), rows);
    }
}
