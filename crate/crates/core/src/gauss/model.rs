use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{domain, Error, Result};

/// State-space source `Z_{t+1} = A Z_t + B W_t`, `X_t = C Z_t + N V_t`.
///
/// Dimensions: `A` is m×m, `B` m×k, `C` p×m and `N` p×d. The noises are
/// independent with identity covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub n: DMatrix<f64>,
}

impl GaussModel {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, n: DMatrix<f64>) -> Result<Self> {
        let m = a.nrows();
        if m == 0 || !a.is_square() {
            return domain("A must be square and non-empty");
        }
        if b.nrows() != m {
            return domain(format!("B must have {m} rows, has {}", b.nrows()));
        }
        if c.ncols() != m || c.nrows() == 0 {
            return domain(format!("C must have {m} columns, has {}", c.ncols()));
        }
        if n.nrows() != c.nrows() {
            return domain(format!("N must have {} rows, has {}", c.nrows(), n.nrows()));
        }
        if [&a, &b, &c, &n].iter().any(|x| x.iter().any(|v| !v.is_finite())) {
            return domain("model matrices must be finite");
        }
        Ok(Self { a, b, c, n })
    }

    /// Scalar model `Z' = αZ + σ_W W`, `X = cZ + σ_V V`.
    pub fn scalar(alpha: f64, sigma_w: f64, c: f64, sigma_v: f64) -> Result<Self> {
        let one = |v| DMatrix::from_element(1, 1, v);
        Self::new(one(alpha), one(sigma_w), one(c), one(sigma_v))
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn process_noise_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn obs_dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn obs_noise_dim(&self) -> usize {
        self.n.ncols()
    }

    /// Serializes to the text format accepted by [`FromStr`].
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "dims = {} {} {} {}\n",
            self.state_dim(),
            self.process_noise_dim(),
            self.obs_dim(),
            self.obs_noise_dim()
        );
        for (key, mat) in [("A", &self.a), ("B", &self.b), ("C", &self.c), ("N", &self.n)] {
            out.push_str(key);
            out.push_str(" =\n");
            for row in mat.row_iter() {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                let _ = writeln!(out, "  {}", cells.join(" "));
            }
        }
        out
    }
}

/// Text model format:
///
/// ```text
/// # comment
/// dims = m k p d
/// A = 0.9 0.1
///     0.0 0.5
/// B = 1 0
///     0 1
/// C = 1 0.5
/// N = 0.3
/// ```
///
/// Matrices are row-major, whitespace separated, and may continue on
/// following lines that contain no `=`. Keys other than `dims`, `A`, `B`,
/// `C`, `N` are rejected.
impl FromStr for GaussModel {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut fields: Vec<(String, Vec<f64>)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let rest = if let Some((key, rest)) = line.split_once('=') {
                let key = key.trim();
                if !matches!(key, "dims" | "A" | "B" | "C" | "N") {
                    return domain(format!("line {}: unknown key `{key}`", lineno + 1));
                }
                if fields.iter().any(|(k, _)| k == key) {
                    return domain(format!("line {}: duplicate key `{key}`", lineno + 1));
                }
                fields.push((key.to_string(), Vec::new()));
                rest
            } else if fields.is_empty() {
                return domain(format!("line {}: expected `key = values`", lineno + 1));
            } else {
                line
            };
            let values = &mut fields.last_mut().expect("non-empty").1;
            for tok in rest.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::Domain(format!("line {}: bad number `{tok}`", lineno + 1)))?;
                values.push(v);
            }
        }
        let get = |key: &str| {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::Domain(format!("missing key `{key}`")))
        };
        let dims = get("dims")?;
        if dims.len() != 4 || dims.iter().any(|d| *d < 1.0 || d.fract() != 0.0) {
            return domain("dims needs four positive integers: m k p d");
        }
        let [m, k, p, d] = [dims[0], dims[1], dims[2], dims[3]].map(|v| v as usize);
        let mat = |key: &str, rows: usize, cols: usize| -> Result<DMatrix<f64>> {
            let v = get(key)?;
            if v.len() != rows * cols {
                return domain(format!("{key} needs {rows}x{cols} = {} values, got {}", rows * cols, v.len()));
            }
            Ok(DMatrix::from_row_slice(rows, cols, &v))
        };
        GaussModel::new(mat("A", m, m)?, mat("B", m, k)?, mat("C", p, m)?, mat("N", p, d)?)
    }
}
