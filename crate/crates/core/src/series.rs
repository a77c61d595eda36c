//! Column-oriented records of sampled observables.

use std::io::Write;

use crate::error::{DickeError, Result};

/// Sampled observables on a time grid. Column 0 is always `t` (or the
/// sweep parameter for non-temporal tables).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    /// Set when an integration stopped early (e.g. near a coordinate
    /// singularity); the recorded samples are still valid.
    pub truncated: bool,
}

impl TimeSeries {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Self {
        TimeSeries {
            names: names.iter().map(|s| s.as_ref().to_string()).collect(),
            columns: vec![Vec::new(); names.len()],
            truncated: false,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.names.len(), "row width does not match the header");
        for (col, &v) in self.columns.iter_mut().zip(row) {
            col.push(v);
        }
    }

    /// The first column (time or sweep parameter).
    pub fn t(&self) -> &[f64] {
        &self.columns[0]
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| DickeError::UnknownColumn(name.to_string()))
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn last_row(&self) -> Option<Vec<f64>> {
        (!self.is_empty()).then(|| self.row(self.len() - 1))
    }

    /// Value of `name` at the sample whose time is closest to `t`.
    pub fn value_at(&self, name: &str, t: f64) -> Result<f64> {
        let col = self.column(name)?;
        let i = self
            .t()
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .ok_or(DickeError::WindowNotCovered { requested: t, available: f64::NAN })?;
        Ok(col[i])
    }

    /// Writes a CSV table with the column names as header. Values use the
    /// shortest round-trip representation, so identical data gives
    /// identical bytes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.names.join(","))?;
        let mut line = String::new();
        for i in 0..self.len() {
            line.clear();
            for (c, col) in self.columns.iter().enumerate() {
                if c > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{:?}", col[i]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// Time average (1/T)∫₀ᵀ x dt of one column, trapezoid rule on the sample
/// grid. A window ending between samples is closed by linear
/// interpolation.
pub fn time_average(series: &TimeSeries, name: &str, window: f64) -> Result<f64> {
    let t = series.t();
    let x = series.column(name)?;
    let available = t.last().copied().unwrap_or(f64::NAN);
    let slack = 1e-9 * window.abs().max(1.0);
    if t.len() < 2 || t[0].abs() > slack || !(available >= window - slack) || window <= 0.0 {
        return Err(DickeError::WindowNotCovered { requested: window, available });
    }
    let mut integral = 0.0;
    for i in 1..t.len() {
        let (t0, t1) = (t[i - 1], t[i]);
        if t0 >= window {
            break;
        }
        if t1 <= window + slack {
            integral += 0.5 * (x[i - 1] + x[i]) * (t1 - t0);
        } else {
            let f = (window - t0) / (t1 - t0);
            let xe = x[i - 1] + f * (x[i] - x[i - 1]);
            integral += 0.5 * (x[i - 1] + xe) * (window - t0);
        }
    }
    Ok(integral / window)
}
