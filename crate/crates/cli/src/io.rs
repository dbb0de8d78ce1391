//! Measurement and kernel-curve CSV files.

use std::io::{Read, Write};

use gop_core::sampling::{KernelExpr, Measurements};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    measurement_id: String,
    real: f64,
    imag: f64,
}

/// Writes `measurement_id,real,imag` rows in the given order.
pub fn write_measurements<W: Write>(out: W, rows: &[(String, Complex64)]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for (id, v) in rows {
        w.serialize(Row {
            measurement_id: id.clone(),
            real: v.re,
            imag: v.im,
        })
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn read_measurements<R: Read>(input: R) -> Result<Measurements, CliError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Measurements::new();
    for (i, row) in r.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| CliError::Config(format!("measurements row {}: {e}", i + 1)))?;
        if !(row.real.is_finite() && row.imag.is_finite()) {
            return Err(CliError::Config(format!("measurements row {}: non-finite value", i + 1)));
        }
        if out.get(&row.measurement_id).is_some() {
            return Err(CliError::Config(format!(
                "measurements row {}: duplicate id `{}`",
                i + 1,
                row.measurement_id
            )));
        }
        out.insert(row.measurement_id, Complex64::new(row.real, row.imag));
    }
    Ok(out)
}

/// Samples the kernels on `samples` equispaced points of their common
/// support: columns `x,k0,k1,...`.
pub fn write_kernel_curves<W: Write>(out: W, kernels: &[KernelExpr], samples: usize) -> Result<(), CliError> {
    let Some(first) = kernels.first() else {
        return Ok(());
    };
    let (a, b) = first.support();
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut header = vec!["x".to_string()];
    header.extend((0..kernels.len()).map(|k| format!("k{k}")));
    w.write_record(&header).map_err(io)?;
    for i in 0..samples {
        let x = a + (b - a) * i as f64 / (samples - 1) as f64;
        let mut rec = vec![x.to_string()];
        rec.extend(kernels.iter().map(|k| k.eval(x).to_string()));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measurement_round_trip() {
        let rows = vec![
            ("pt:0".to_string(), Complex64::new(1.5, -0.25)),
            ("pt:1".to_string(), Complex64::new(-3.0, 1e-17)),
        ];
        let mut buf = Vec::new();
        write_measurements(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("measurement_id,real,imag\n"));
        let back = read_measurements(buf.as_slice()).unwrap();
        for (id, v) in &rows {
            assert_eq!(back.get(id), Some(*v));
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let text = "measurement_id,real,imag\na,1,0\na,2,0\n";
        assert!(matches!(read_measurements(text.as_bytes()), Err(CliError::Config(_))));
    }
}
