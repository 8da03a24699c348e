use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::stats::Accumulator;

pub const CSV_HEADER: &str = "scheme,P_dbm,sum_rate,total_power,ee,stderr,trials";

/// One row of an EE curve.
///
/// `ee` is always `sum_rate / total_power` of the same row. For Monte Carlo
/// rows the rate and power are trial means and `stderr` is the standard error
/// of the per-trial EE; closed-form rows carry `stderr = 0` and `trials = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EePoint {
    pub scheme: String,
    pub p_dbm: f64,
    pub sum_rate: f64,
    pub total_power: f64,
    pub ee: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl EePoint {
    pub fn exact(scheme: &str, p_dbm: f64, sum_rate: f64, total_power: f64) -> Self {
        Self {
            scheme: scheme.to_string(),
            p_dbm,
            sum_rate,
            total_power,
            ee: sum_rate / total_power,
            stderr: 0.0,
            trials: 0,
        }
    }

    pub fn from_samples(scheme: &str, p_dbm: f64, acc: &Accumulator) -> Self {
        let sum_rate = acc.mean_rate();
        let total_power = acc.mean_power();
        Self {
            scheme: scheme.to_string(),
            p_dbm,
            sum_rate,
            total_power,
            ee: sum_rate / total_power,
            stderr: acc.ee_stderr(),
            trials: acc.count(),
        }
    }

    /// Rescales the rate unit (e.g. nats to bits).
    pub fn scale_rate(&mut self, s: f64) {
        self.sum_rate *= s;
        self.stderr *= s;
        self.ee = self.sum_rate / self.total_power;
    }
}

/// Writes the header and one line per row. Floats use the shortest
/// representation that round-trips.
pub fn write_csv<W: Write>(rows: &[EePoint], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{:e},{:e},{:e},{:e},{}",
            r.scheme, r.p_dbm, r.sum_rate, r.total_power, r.ee, r.stderr, r.trials
        )?;
    }
    w.flush()
}

pub fn write_csv_file(rows: &[EePoint], path: &Path) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io {
        context: format!("writing {}", path.display()),
        message: e.to_string(),
    };
    let file = File::create(path).map_err(io_err)?;
    write_csv(rows, BufWriter::new(file)).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip_and_stay_consistent() {
        let mut row = EePoint::exact("lb", -3.5, 0.1 + 0.2, 6.5e-7);
        row.scale_rate(std::f64::consts::LOG2_E);
        let mut buf = Vec::new();
        write_csv(&[row.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let f: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(f[0], "lb");
        let rate: f64 = f[2].parse().unwrap();
        let power: f64 = f[3].parse().unwrap();
        let ee: f64 = f[4].parse().unwrap();
        assert_eq!(rate, row.sum_rate);
        assert_eq!(ee, rate / power);
        assert_eq!(f[6], "0");
    }

    #[test]
    fn unwritable_path_reports_context() {
        let err = write_csv_file(&[], Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
