use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Fixed-design readings `Y_ij` at strictly increasing times `t_i`.
///
/// `t_origin` plays the role of `t_0` in the spacings `t_i - t_{i-1}` used by
/// the Priestley-Chao weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    times: Vec<f64>,
    y: DMatrix<f64>,
    t_origin: f64,
}

impl ObservationSet {
    pub fn new(times: Vec<f64>, y: DMatrix<f64>, t_origin: f64) -> Result<Self> {
        let n = times.len();
        if n < 2 {
            return Err(Error::param(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if y.nrows() != n || y.ncols() == 0 {
            return Err(Error::param(format!(
                "readings are {}x{}, expected {n} rows and at least one column",
                y.nrows(),
                y.ncols()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param(
                "sample times must be finite and strictly increasing",
            ));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("readings must be finite"));
        }
        if !(t_origin <= times[0]) {
            return Err(Error::param(format!(
                "t_origin {t_origin} must not exceed the first sample time {}",
                times[0]
            )));
        }
        Ok(Self { times, y, t_origin })
    }

    /// Builds from row-major readings (`n` rows of `d` values).
    pub fn from_rows(times: Vec<f64>, rows: &[Vec<f64>], t_origin: f64) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::param("ragged readings"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(
            times,
            DMatrix::from_row_slice(rows.len(), d, &flat),
            t_origin,
        )
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn t_origin(&self) -> f64 {
        self.t_origin
    }

    pub fn with_origin(&self, t_origin: f64) -> Result<Self> {
        Self::new(self.times.clone(), self.y.clone(), t_origin)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.y.ncols()
    }

    /// Spacings `t_i - t_{i-1}` with `t_0 = t_origin`.
    pub fn spacings(&self) -> Vec<f64> {
        std::iter::once(self.t_origin)
            .chain(self.times.iter().copied())
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect()
    }

    /// Readings with `f` applied elementwise (used for linearity checks).
    pub fn map_readings(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.times.clone(), self.y.map(f), self.t_origin)
    }

    /// Writes the `t,y1,...,yd` CSV. Values use the shortest representation
    /// that parses back to the identical `f64`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.dim()).map(|j| format!("y{j}")));
        w.write_record(&header).map_err(csv_io)?;
        for (i, t) in self.times.iter().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(self.y.row(i).iter().map(f64::to_string));
            w.write_record(&rec).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Parses the `t,y1,...,yd` CSV; malformed input reports line and column.
    pub fn read_csv<R: Read>(reader: R, t_origin: f64) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let header = r.headers().map_err(|e| csv_parse(e, 1))?.clone();
        if header.is_empty() || &header[0] != "t" {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "header must start with `t`".into(),
            });
        }
        for (k, name) in header.iter().enumerate().skip(1) {
            if name != format!("y{k}") {
                return Err(Error::Parse {
                    line: 1,
                    column: k + 1,
                    message: format!("expected header `y{k}`, found `{name}`"),
                });
            }
        }
        let d = header.len() - 1;
        if d == 0 {
            return Err(Error::Parse {
                line: 1,
                column: 2,
                message: "no reading columns".into(),
            });
        }
        let mut times = Vec::new();
        let mut flat = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| csv_parse(e, 0))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != d + 1 {
                return Err(Error::Parse {
                    line,
                    column: record.len().min(d + 1) + 1,
                    message: format!("expected {} fields, found {}", d + 1, record.len()),
                });
            }
            for (col, field) in record.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    line,
                    column: col + 1,
                    message: format!("`{field}` is not a number"),
                })?;
                if col == 0 {
                    times.push(v);
                } else {
                    flat.push(v);
                }
            }
        }
        let n = times.len();
        Self::new(times, DMatrix::from_row_slice(n, d, &flat), t_origin)
    }

    pub fn read_csv_path(path: impl AsRef<Path>, t_origin: f64) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, t_origin)
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn csv_parse(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        column: 0,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ObservationSet {
        ObservationSet::from_rows(
            vec![0.5, 1.0, 1.5],
            &[
                vec![1.0, 0.1],
                vec![0.1 + 0.2, -2.5e-17],
                vec![1.0 / 3.0, 7.0],
            ],
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn validates_inputs() {
        let rows = [vec![1.0], vec![2.0]];
        assert!(ObservationSet::from_rows(vec![1.0, 1.0], &rows, 0.0).is_err());
        assert!(ObservationSet::from_rows(vec![1.0], &rows[..1], 0.0).is_err());
        assert!(ObservationSet::from_rows(vec![1.0, 2.0], &rows, 1.5).is_err());
        assert!(
            ObservationSet::from_rows(vec![1.0, 2.0], &[vec![1.0], vec![f64::NAN]], 0.0).is_err()
        );
    }

    #[test]
    fn spacings_use_origin() {
        let obs = sample();
        assert_eq!(obs.spacings(), vec![0.5, 0.5, 0.5]);
        assert_eq!(
            obs.with_origin(0.25).unwrap().spacings(),
            vec![0.25, 0.5, 0.5]
        );
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let obs = sample();
        let mut buf = Vec::new();
        obs.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,y1,y2\n"));
        let back = ObservationSet::read_csv(&buf[..], 0.0).unwrap();
        assert_eq!(back, obs);
    }

    #[test]
    fn malformed_csv_reports_position() {
        let bad = "t,y1\n0.5,1.0\n1.0,abc\n";
        match ObservationSet::read_csv(bad.as_bytes(), 0.0) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let ragged = "t,y1\n0.5,1.0\n1.0\n";
        assert!(matches!(
            ObservationSet::read_csv(ragged.as_bytes(), 0.0),
            Err(Error::Parse { line: 3, .. })
        ));
        let header = "time,y1\n0.5,1.0\n";
        assert!(matches!(
            ObservationSet::read_csv(header.as_bytes(), 0.0),
            Err(Error::Parse {
                line: 1,
                column: 1,
                ..
            })
        ));
    }
}
