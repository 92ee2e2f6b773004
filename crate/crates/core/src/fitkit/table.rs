//! Sample tables exchanged as CSV: abscissa (`t` or `phi`), `value`, optional `sigma`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTable {
    /// Header of the first column.
    pub abscissa: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

impl SampleTable {
    pub fn new(abscissa: &str, x: Vec<f64>, y: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        if x.len() != y.len() || sigma.as_ref().is_some_and(|s| s.len() != x.len()) {
            return Err(Error::Table("columns differ in length".into()));
        }
        Ok(SampleTable { abscissa: abscissa.to_string(), x, y, sigma })
    }

    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Table(e.to_string()))?.clone();
        let names: Vec<&str> = headers.iter().collect();
        let abscissa = match names.first() {
            Some(&h) if h == "t" || h == "phi" => h.to_string(),
            other => return Err(Error::Table(format!("first column must be `t` or `phi`, found {other:?}"))),
        };
        if names.get(1) != Some(&"value") {
            return Err(Error::Table("second column must be `value`".into()));
        }
        let has_sigma = match names.get(2) {
            None => false,
            Some(&"sigma") => true,
            Some(h) => return Err(Error::Table(format!("unexpected column `{h}`"))),
        };
        let (mut x, mut y, mut s) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Table(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Table(format!("record {}: missing field {i}", line + 1)))?
                    .parse()
                    .map_err(|e| Error::Table(format!("record {}: {e}", line + 1)))
            };
            x.push(num(0)?);
            y.push(num(1)?);
            if has_sigma {
                s.push(num(2)?);
            }
        }
        SampleTable::new(&abscissa, x, y, has_sigma.then_some(s))
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Table(e.to_string());
        if self.sigma.is_some() {
            w.write_record([self.abscissa.as_str(), "value", "sigma"]).map_err(err)?;
        } else {
            w.write_record([self.abscissa.as_str(), "value"]).map_err(err)?;
        }
        for i in 0..self.x.len() {
            let mut row = vec![format!("{:.8e}", self.x[i]), format!("{:.8e}", self.y[i])];
            if let Some(s) = &self.sigma {
                row.push(format!("{:.8e}", s[i]));
            }
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(|e| Error::Table(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = SampleTable::new("t", vec![0.0, 1e-6], vec![0.5, 0.25], Some(vec![0.01, 0.02])).unwrap();
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(SampleTable::read(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn optional_sigma_and_comments() {
        let src = "# phase sweep\nphi,value\n0.0,1.0\n3.5,0.5\n";
        let t = SampleTable::read(src.as_bytes()).unwrap();
        assert_eq!(t.abscissa, "phi");
        assert!(t.sigma.is_none() && t.y == vec![1.0, 0.5]);
    }

    #[test]
    fn bad_tables() {
        assert!(SampleTable::read("x,value\n1,2\n".as_bytes()).is_err());
        assert!(SampleTable::read("t,value\n1,abc\n".as_bytes()).is_err());
        assert!(SampleTable::read("t,value,weight\n1,2,3\n".as_bytes()).is_err());
    }
}
