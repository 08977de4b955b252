//! i.i.d. records `(y, a, z, x)` with CSV IO.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Column-oriented binary fields with a row-major covariate block.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Dataset {
    pub y: Vec<u8>,
    pub a: Vec<u8>,
    pub z: Vec<u8>,
    /// Row-major, `len() * k` values.
    pub x: Vec<f64>,
    pub k: usize,
}

impl Dataset {
    pub fn new(k: usize) -> Self {
        Dataset { k, ..Default::default() }
    }

    pub fn with_capacity(n: usize, k: usize) -> Self {
        Dataset { y: Vec::with_capacity(n), a: Vec::with_capacity(n), z: Vec::with_capacity(n), x: Vec::with_capacity(n * k), k }
    }

    pub fn push(&mut self, y: u8, a: u8, z: u8, x: &[f64]) {
        assert_eq!(x.len(), self.k, "covariate dimension");
        debug_assert!(y <= 1 && a <= 1 && z <= 1);
        self.y.push(y);
        self.a.push(a);
        self.z.push(z);
        self.x.extend_from_slice(x);
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.k..(i + 1) * self.k]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.x[i * self.k + j]).collect()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let mut d = Dataset::with_capacity(idx.len(), self.k);
        for &i in idx {
            d.push(self.y[i], self.a[i], self.z[i], self.row(i));
        }
        d
    }

    pub fn mean_y(&self) -> f64 {
        self.y.iter().map(|&v| v as f64).sum::<f64>() / self.len() as f64
    }

    pub fn count_z(&self, z: u8) -> usize {
        self.z.iter().filter(|&&v| v == z).count()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["y".to_string(), "a".into(), "z".into()];
        h.extend((1..=self.k).map(|j| format!("x{j}")));
        h
    }

    pub fn from_reader<R: Read>(r: R) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
        let header = rdr.headers().map_err(|e| Error::schema(Some(1), e.to_string()))?.clone();
        let names: Vec<&str> = header.iter().collect();
        if names.len() < 3 || names[..3] != ["y", "a", "z"] {
            return Err(Error::schema(Some(1), format!("header must start with y,a,z; got {}", names.join(","))));
        }
        let k = names.len() - 3;
        for (j, name) in names[3..].iter().enumerate() {
            if *name != format!("x{}", j + 1) {
                return Err(Error::schema(Some(1), format!("expected column x{}, found {name}", j + 1)));
            }
        }
        let mut d = Dataset::new(k);
        let mut x = vec![0.0; k];
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line());
                Error::schema(line, e.to_string())
            })?;
            let line = rec.position().map(|p| p.line());
            if rec.len() != k + 3 {
                return Err(Error::schema(line, format!("expected {} fields, found {}", k + 3, rec.len())));
            }
            let bit = |j: usize| -> Result<u8> {
                match &rec[j] {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    v => Err(Error::schema(line, format!("{} must be 0 or 1, found {v:?}", names[j]))),
                }
            };
            let (y, a, z) = (bit(0)?, bit(1)?, bit(2)?);
            for j in 0..k {
                x[j] = rec[j + 3]
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::schema(line, format!("x{} is not a finite number: {:?}", j + 1, &rec[j + 3])))?;
            }
            d.push(y, a, z, &x);
        }
        if d.is_empty() {
            return Err(Error::schema(None, "dataset has no rows"));
        }
        Ok(d)
    }

    pub fn read_csv(path: &Path) -> Result<Dataset> {
        Dataset::from_reader(std::fs::File::open(path)?)
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
        wtr.write_record(self.header()).map_err(io)?;
        let mut rec = Vec::with_capacity(self.k + 3);
        for i in 0..self.len() {
            rec.clear();
            rec.push(self.y[i].to_string());
            rec.push(self.a[i].to_string());
            rec.push(self.z[i].to_string());
            rec.extend(self.row(i).iter().map(|v| format!("{v}")));
            wtr.write_record(&rec).map_err(io)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf8")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut d = Dataset::new(2);
        d.push(1, 0, 1, &[0.5, -2.0]);
        d.push(0, 1, 0, &[1.25, 3.0]);
        let s = d.to_csv_string();
        assert!(s.starts_with("y,a,z,x1,x2\n"));
        assert_eq!(Dataset::from_reader(s.as_bytes()).unwrap(), d);
    }

    #[test]
    fn bad_value_reports_line() {
        let s = "y,a,z\n1,0,1\n0,2,1\n";
        match Dataset::from_reader(s.as_bytes()) {
            Err(Error::Schema { line: Some(3), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(Dataset::from_reader("y,z,a\n1,0,1\n".as_bytes()), Err(Error::Schema { line: Some(1), .. })));
        assert!(matches!(Dataset::from_reader("y,a,z,w\n1,0,1,2\n".as_bytes()), Err(Error::Schema { .. })));
    }

    #[test]
    fn ragged_row_rejected() {
        assert!(matches!(Dataset::from_reader("y,a,z,x1\n1,0,1\n".as_bytes()), Err(Error::Schema { .. })));
    }

    #[test]
    fn subset_and_column() {
        let mut d = Dataset::new(1);
        for i in 0..5 {
            d.push((i % 2) as u8, 0, 0, &[i as f64]);
        }
        let s = d.subset(&[4, 1]);
        assert_eq!(s.column(0), vec![4.0, 1.0]);
        assert_eq!(s.y, vec![0, 1]);
    }
}
