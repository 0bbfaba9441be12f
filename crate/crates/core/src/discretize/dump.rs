//! Plain CSV matrix dumps: a `rows,cols` header line, then one line per row.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub fn write_matrix_csv<T: Scalar, W: Write>(matrix: &Matrix<T>, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    let io = |e: csv::Error| Error::Dump(e.to_string());
    w.write_record([matrix.rows().to_string(), matrix.cols().to_string()])
        .map_err(io)?;
    for i in 0..matrix.rows() {
        w.write_record(matrix.row(i).iter().map(|v| format!("{:.17e}", v.as_f64())))
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Dump(e.to_string()))
}

pub fn read_matrix_csv<T: Scalar, R: Read>(reader: R) -> Result<Matrix<T>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = r.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Dump("empty matrix dump".into()))?
        .map_err(|e| Error::Dump(e.to_string()))?;
    let dim = |i: usize| -> Result<usize> {
        header.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| {
            Error::Dump(format!(
                "bad dimension header `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ))
        })
    };
    if header.len() != 2 {
        return Err(Error::Dump("dimension header must be `rows,cols`".into()));
    }
    let (rows, cols) = (dim(0)?, dim(1)?);
    let mut data = Vec::with_capacity(rows * cols);
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::Dump(e.to_string()))?;
        if i >= rows {
            return Err(Error::Dump(format!("more than {rows} rows")));
        }
        if rec.len() != cols {
            return Err(Error::Dump(format!(
                "row {i} has {} entries, expected {cols}",
                rec.len()
            )));
        }
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Dump(format!("row {i}: cannot parse `{field}`")))?;
            if !v.is_finite() {
                return Err(Error::Dump(format!("row {i}: non-finite entry `{field}`")));
            }
            data.push(T::lit(v));
        }
    }
    if data.len() != rows * cols {
        return Err(Error::Dump(format!(
            "expected {rows} rows, found {}",
            data.len() / cols.max(1)
        )));
    }
    Matrix::from_row_major(rows, cols, data).map_err(|e| Error::Dump(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let m = Matrix::from_fn(3, 2, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0) * 1e-7);
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3,2\n"));
        let back: Matrix<f64> = read_matrix_csv(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn corrupted_dumps_fail() {
        for text in [
            "",
            "2,2\n1,2\n3\n",
            "2,2\n1,2\n3,x\n",
            "2\n1,2\n",
            "1,1\nNaN\n",
            "1,1\n1\n2\n",
            "2,1\n1\n",
        ] {
            assert!(
                matches!(read_matrix_csv::<f64, _>(text.as_bytes()), Err(Error::Dump(_))),
                "{text:?}"
            );
        }
    }
}
