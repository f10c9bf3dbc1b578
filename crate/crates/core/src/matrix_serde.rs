//! Matrices as JSON arrays of rows.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Matrix, Result};

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Builds a matrix from rows. An empty list, or rows that are all empty, give
/// a matrix with zero rows or columns; `shape_hint` resolves the other size.
pub fn from_rows(rows: &[Vec<f64>], shape_hint: Option<(usize, usize)>) -> Result<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if let Some(k) = rows.iter().position(|row| row.len() != c) {
        return Err(Error::dim(format!(
            "row {k} has {} entries, row 0 has {c}",
            rows[k].len()
        )));
    }
    if r * c == 0 {
        if let Some((hr, hc)) = shape_hint {
            if hr * hc == 0 && (r == 0 || r == hr) {
                return Ok(Matrix::zeros(hr, hc));
            }
        }
        return Ok(Matrix::zeros(r, c));
    }
    let m = Matrix::from_fn(r, c, |i, j| rows[i][j]);
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("matrix entry"));
    }
    Ok(m)
}

pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    to_rows(m).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Matrix, D::Error> {
    let rows = Vec::<Vec<f64>>::deserialize(d)?;
    from_rows(&rows, None).map_err(serde::de::Error::custom)
}
