//! Paths sampled on a uniform time grid.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::csv::{fmt_f64, parse_f64};

/// Relative tolerance used when snapping a time onto the grid.
const ALIGN_TOL: f64 = 1e-9;

/// Values of a path at `t0 + k·dt`, `k = 0..=n_steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl GridPath {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidPath(format!("grid spacing must be positive and finite, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidPath(format!("start time must be finite, got {t0}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidPath(format!("need at least 2 grid values, got {}", values.len())));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { step: k, value: *v });
        }
        Ok(Self { t0, dt, values })
    }

    /// Path on `[0, n·dt]` built from its increments, starting at zero.
    pub fn from_increments(dt: f64, increments: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut acc = 0.0;
        values.push(acc);
        for &x in increments {
            acc += x;
            values.push(acc);
        }
        Self::new(0.0, dt, values)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn duration(&self) -> f64 {
        self.n_steps() as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_steps())
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Grid index of `t`, which must lie on the grid (within a relative tolerance).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = (t - self.t0) / self.dt;
        let k = x.round();
        if !(x.is_finite() && (x - k).abs() <= ALIGN_TOL * x.abs().max(1.0)) || k < 0.0 || k > self.n_steps() as f64 {
            return Err(Error::Alignment(t));
        }
        Ok(k as usize)
    }

    /// Value at time `t` with piecewise-constant (càdlàg) semantics between grid points.
    pub fn value_at(&self, t: f64) -> f64 {
        let x = ((t - self.t0) / self.dt).floor();
        let k = if x <= 0.0 { 0 } else { (x as usize).min(self.n_steps()) };
        self.values[k]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "time,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", fmt_f64(self.time(k)), fmt_f64(*v))?;
        }
        Ok(())
    }

    /// Reads the `time,value` format written by [`GridPath::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 {
                if line != "time,value" {
                    return Err(Error::Parse(format!("expected header 'time,value', got '{line}'")));
                }
                continue;
            }
            let mut parts = line.split(',');
            let (Some(t), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
            };
            times.push(parse_f64(t, lineno + 1)?);
            values.push(parse_f64(v, lineno + 1)?);
        }
        if times.len() < 2 {
            return Err(Error::InvalidPath("CSV path needs at least two rows".into()));
        }
        let t0 = times[0];
        let n = times.len() - 1;
        let dt = (times[n] - t0) / n as f64;
        for (k, &t) in times.iter().enumerate() {
            let expected = t0 + k as f64 * dt;
            if (t - expected).abs() > 1e-9 * expected.abs().max(dt) {
                return Err(Error::InvalidPath(format!("row {} breaks the uniform grid: time {t}, expected {expected}", k + 2)));
            }
        }
        Self::new(t0, dt, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_non_finite() {
        assert!(GridPath::new(0.0, 1.0, vec![0.0]).is_err());
        assert!(GridPath::new(0.0, 0.0, vec![0.0, 1.0]).is_err());
        assert!(matches!(
            GridPath::new(0.0, 1.0, vec![0.0, f64::NAN]),
            Err(Error::NonFinite { step: 1, .. })
        ));
    }

    #[test]
    fn index_and_alignment() {
        let p = GridPath::new(0.0, 0.25, vec![0.0; 5]).unwrap();
        assert_eq!(p.index_of(0.5).unwrap(), 2);
        assert_eq!(p.index_of(1.0).unwrap(), 4);
        assert!(matches!(p.index_of(0.3), Err(Error::Alignment(_))));
        assert!(p.index_of(1.25).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let p = GridPath::new(0.0, 1.0 / 3.0, vec![0.0, -0.1, 1e-300, 12345.678901234567]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let q = GridPath::read_csv(buf.as_slice()).unwrap();
        assert_eq!(p.values(), q.values());
        assert!((p.dt() - q.dt()).abs() < 1e-15);
    }

    #[test]
    fn piecewise_constant_lookup() {
        let p = GridPath::new(0.0, 0.5, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.value_at(0.49), 0.0);
        assert_eq!(p.value_at(0.5), 1.0);
        assert_eq!(p.value_at(7.0), 2.0);
    }
}
