//! JSON schemas shared by the library and the command line.
//!
//! Matrices are `{"rows", "cols", "re", "im"}` with row-major real and
//! imaginary parts; bipartite operators add `"n"` and `"k"`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::blocksvd::{BlockSVD, BlockTerm};
use crate::channels::DensityMatrix;
use crate::error::{Error, Result};
use crate::matcore::{c64, BipartiteOperator, BipartiteShape, CMatrix, Tolerances};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        MatrixJson { rows, cols, re, im }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let len = self.rows * self.cols;
        if self.re.len() != len || self.im.len() != len {
            return Err(Error::Parse(format!(
                "expected {len} entries for a {}×{} matrix, got re: {}, im: {}",
                self.rows,
                self.cols,
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |i, j| {
            let p = i * self.cols + j;
            c64(self.re[p], self.im[p])
        }))
    }
}

/// `#[serde(with = "serde_cmatrix")]` for `CMatrix` fields.
pub mod serde_cmatrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMatrix, D::Error> {
        MatrixJson::deserialize(d)?
            .to_matrix()
            .map_err(D::Error::custom)
    }
}

/// `#[serde(with = "serde_cmatrix_vec")]` for `Vec<CMatrix>` fields.
pub mod serde_cmatrix_vec {
    use super::*;

    pub fn serialize<S: Serializer>(m: &[CMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
        m.iter()
            .map(MatrixJson::from)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<CMatrix>, D::Error> {
        Vec::<MatrixJson>::deserialize(d)?
            .iter()
            .map(|m| m.to_matrix().map_err(D::Error::custom))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    n: usize,
    k: usize,
    #[serde(flatten)]
    mat: MatrixJson,
}

impl Serialize for BipartiteOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorJson {
            n: self.n(),
            k: self.k(),
            mat: self.mat().into(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BipartiteOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = OperatorJson::deserialize(d)?;
        let m = j.mat.to_matrix().map_err(D::Error::custom)?;
        BipartiteOperator::from_dims(j.n, j.k, m).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: MatrixJson,
    isom: MatrixJson,
}

#[derive(Serialize, Deserialize)]
struct BlockSvdJson {
    n: usize,
    k: usize,
    terms: Vec<TermJson>,
}

impl Serialize for BlockSVD {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BlockSvdJson {
            n: self.shape.n,
            k: self.shape.k,
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    coeff: (&t.coeff).into(),
                    isom: (&t.isom).into(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlockSVD {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = BlockSvdJson::deserialize(d)?;
        let shape = BipartiteShape::new(j.n, j.k).map_err(D::Error::custom)?;
        let terms = j
            .terms
            .iter()
            .map(|t| {
                let coeff = t.coeff.to_matrix().map_err(D::Error::custom)?;
                let isom = t.isom.to_matrix().map_err(D::Error::custom)?;
                if coeff.shape() != (j.n, j.n) || isom.shape() != (j.k, j.k) {
                    return Err(D::Error::custom("term has the wrong dimensions"));
                }
                Ok(BlockTerm { coeff, isom })
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(BlockSVD { shape, terms })
    }
}

/// Channel file: `{"u": operator, "beta": matrix}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelJson {
    pub u: BipartiteOperator,
    #[serde(with = "serde_cmatrix")]
    pub beta: CMatrix,
}

impl ChannelJson {
    pub fn density(&self, tol: &Tolerances) -> Result<DensityMatrix> {
        DensityMatrix::new(self.beta.clone(), tol)
    }
}

pub fn operator_to_json(u: &BipartiteOperator) -> String {
    serde_json::to_string(u).expect("operators always serialize")
}

pub fn operator_from_json(s: &str) -> Result<BipartiteOperator> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes")
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{block_diag_a, haar_unitary};

    #[test]
    fn operator_round_trip() {
        let u = block_diag_a(2, 3, 2, 4).unwrap();
        let s = operator_to_json(&u);
        assert_eq!(operator_from_json(&s).unwrap(), u);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["k"], 3);
        assert_eq!(v["rows"], 6);
        assert_eq!(v["re"].as_array().unwrap().len(), 36);
    }

    #[test]
    fn row_major_layout() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c64(1.0, 0.0), c64(2.0, 0.5), c64(3.0, 0.0), c64(4.0, -1.0)],
        );
        let j = MatrixJson::from(&m);
        assert_eq!(j.re, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(j.im, vec![0.0, 0.5, 0.0, -1.0]);
    }

    #[test]
    fn malformed_inputs_are_parse_errors() {
        assert!(matches!(operator_from_json("{"), Err(Error::Parse(_))));
        let short = r#"{"n":1,"k":2,"rows":2,"cols":2,"re":[1,0,0],"im":[0,0,0,0]}"#;
        assert!(matches!(operator_from_json(short), Err(Error::Parse(_))));
        let wrong = r#"{"n":2,"k":2,"rows":2,"cols":2,"re":[1,0,0,1],"im":[0,0,0,0]}"#;
        assert!(matches!(operator_from_json(wrong), Err(Error::Parse(_))));
    }

    #[test]
    fn channel_round_trip() {
        let u = BipartiteOperator::from_dims(2, 2, haar_unitary(4, 1)).unwrap();
        let ch = ChannelJson {
            u,
            beta: CMatrix::identity(2, 2) * c64(0.5, 0.0),
        };
        let back: ChannelJson = from_json(&to_json(&ch)).unwrap();
        assert_eq!(back.u, ch.u);
        assert!(back.density(&Tolerances::default()).is_ok());
    }
}
