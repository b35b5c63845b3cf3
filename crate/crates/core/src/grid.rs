//! Rectangular `(t, h₁, h₂)` grids and fields sampled on them.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Uniform grid on `[0, t_max] × [0, h_max]²` with `n_t` and `n_h` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec3 {
    pub t_max: f64,
    pub h_max: f64,
    pub n_t: usize,
    pub n_h: usize,
}

impl GridSpec3 {
    pub fn new(t_max: f64, h_max: f64, n_t: usize, n_h: usize) -> Result<Self> {
        let grid = GridSpec3 {
            t_max,
            h_max,
            n_t,
            n_h,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Cube `[0, m]³` with `points` per axis.
    pub fn cube(m: f64, points: usize) -> Result<Self> {
        Self::new(m, m, points, points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_degenerate() {
            return Err(Error::GridMismatch(format!(
                "degenerate grid: t_max {}, h_max {}, n_t {}, n_h {}",
                self.t_max, self.h_max, self.n_t, self.n_h
            )));
        }
        Ok(())
    }

    /// True when an axis has zero length or fewer than two points.
    pub fn is_degenerate(&self) -> bool {
        !(self.t_max > 0.0 && self.h_max > 0.0)
            || !self.t_max.is_finite()
            || !self.h_max.is_finite()
            || self.n_t < 2
            || self.n_h < 2
    }

    pub fn dt(&self) -> f64 {
        self.t_max / (self.n_t - 1) as f64
    }

    pub fn dh(&self) -> f64 {
        self.h_max / (self.n_h - 1) as f64
    }

    pub fn t(&self, it: usize) -> f64 {
        if it + 1 == self.n_t {
            self.t_max
        } else {
            it as f64 * self.dt()
        }
    }

    pub fn h(&self, ih: usize) -> f64 {
        if ih + 1 == self.n_h {
            self.h_max
        } else {
            ih as f64 * self.dh()
        }
    }

    pub fn t_axis(&self) -> Vec<f64> {
        (0..self.n_t).map(|i| self.t(i)).collect()
    }

    pub fn h_axis(&self) -> Vec<f64> {
        (0..self.n_h).map(|i| self.h(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_t * self.n_h * self.n_h
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice_len(&self) -> usize {
        self.n_h * self.n_h
    }

    #[inline]
    pub fn index(&self, it: usize, i1: usize, i2: usize) -> usize {
        (it * self.n_h + i1) * self.n_h + i2
    }

    pub fn unindex(&self, k: usize) -> (usize, usize, usize) {
        let i2 = k % self.n_h;
        let rest = k / self.n_h;
        (rest / self.n_h, rest % self.n_h, i2)
    }

    /// `(t, h₁, h₂)` coordinates of flat index `k`.
    pub fn point(&self, k: usize) -> (f64, [f64; 2]) {
        let (it, i1, i2) = self.unindex(k);
        (self.t(it), [self.h(i1), self.h(i2)])
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, [f64; 2])> + '_ {
        (0..self.len()).map(move |k| self.point(k))
    }
}

/// How a field was produced.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub config_hash: String,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Provenance {
    pub fn new(method: impl Into<String>) -> Self {
        Provenance {
            method: method.into(),
            ..Default::default()
        }
    }
}

/// Values of a function of `(t, h₁, h₂)` with per-point standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField3 {
    pub grid: GridSpec3,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub provenance: Provenance,
}

impl ScalarField3 {
    pub fn new(
        grid: GridSpec3,
        values: Vec<f64>,
        std_errors: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if values.len() != grid.len() || std_errors.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                what: "field values",
                expected: grid.len(),
                got: values.len().min(std_errors.len()),
            });
        }
        if let Some(bad) = values.iter().chain(&std_errors).find(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite field entry {bad}")));
        }
        Ok(ScalarField3 {
            grid,
            values,
            std_errors,
            provenance,
        })
    }

    /// Exact field (zero standard errors) from a pointwise function.
    pub fn from_fn(
        grid: GridSpec3,
        provenance: Provenance,
        f: impl Fn(f64, [f64; 2]) -> f64,
    ) -> Result<Self> {
        let values = grid.points().map(|(t, h)| f(t, h)).collect();
        Self::new(grid, values, vec![0.0; grid.len()], provenance)
    }

    #[inline]
    pub fn at(&self, it: usize, i1: usize, i2: usize) -> f64 {
        self.values[self.grid.index(it, i1, i2)]
    }

    pub fn se_at(&self, it: usize, i1: usize, i2: usize) -> f64 {
        self.std_errors[self.grid.index(it, i1, i2)]
    }

    /// The `n_h × n_h` slice at time index `it`, row-major in `(h₁, h₂)`.
    pub fn slice(&self, it: usize) -> &[f64] {
        let len = self.grid.slice_len();
        &self.values[it * len..(it + 1) * len]
    }

    pub fn same_grid(&self, other: &ScalarField3) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(["t", "h1", "h2", "value", "std_error"])?;
        for k in 0..self.grid.len() {
            let (t, h) = self.grid.point(k);
            csv.write_record(&[
                fmt_f64(t),
                fmt_f64(h[0]),
                fmt_f64(h[1]),
                fmt_f64(self.values[k]),
                fmt_f64(self.std_errors[k]),
            ])?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`ScalarField3::write_csv`]; the grid is inferred
    /// from the distinct axis values.
    pub fn read_csv<R: Read>(reader: R, provenance: Provenance) -> Result<Self> {
        let mut csv = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidConfig(format!("bad CSV field {i}")))
            };
            rows.push([parse(0)?, parse(1)?, parse(2)?, parse(3)?, parse(4)?]);
        }
        let distinct = |col: usize| {
            let mut v: Vec<f64> = rows.iter().map(|r| r[col]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let ts = distinct(0);
        let hs = distinct(1);
        let grid = GridSpec3::new(
            *ts.last().unwrap_or(&0.0),
            *hs.last().unwrap_or(&0.0),
            ts.len(),
            hs.len(),
        )?;
        let values = rows.iter().map(|r| r[3]).collect();
        let errors = rows.iter().map(|r| r[4]).collect();
        Self::new(grid, values, errors, provenance)
    }

    /// Writes `<stem>.csv` and the `<stem>.json` sidecar.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let csv_path = stem.with_extension("csv");
        let json_path = stem.with_extension("json");
        self.write_csv(std::fs::File::create(&csv_path)?)?;
        let sidecar = Sidecar {
            grid: self.grid,
            provenance: self.provenance.clone(),
        };
        std::fs::write(json_path, serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let sidecar: Sidecar =
            serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
        let field = Self::read_csv(
            std::fs::File::open(stem.with_extension("csv"))?,
            sidecar.provenance,
        )?;
        if field.grid.n_t != sidecar.grid.n_t || field.grid.n_h != sidecar.grid.n_h {
            return Err(Error::GridMismatch("sidecar disagrees with CSV".into()));
        }
        Ok(ScalarField3 {
            grid: sidecar.grid,
            ..field
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    grid: GridSpec3,
    provenance: Provenance,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

/// Hex SHA-256 of a serializable value's JSON form.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).unwrap_or_default();
    hex::encode(Sha256::digest(json))
}
