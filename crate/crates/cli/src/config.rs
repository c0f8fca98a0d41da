use std::str::FromStr;

use rdna_core::Error as CoreError;
use thiserror::Error;

/// Seed used when neither `--seed` nor the environment provides one.
pub const DEFAULT_SEED: u64 = 20_190_901;
pub const SEED_ENV: &str = "RDNA_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                CoreError::NonConvergence { .. }
                | CoreError::Numeric(_)
                | CoreError::Bracket { .. }
                | CoreError::Consistency(_)
                | CoreError::Estimation(_) => 3,
                CoreError::Domain(_)
                | CoreError::DegenerateDesign(_)
                | CoreError::Validity(_)
                | CoreError::OutOfRegion(_)
                | CoreError::Detectability(_) => 4,
            },
        }
    }
}

pub fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

/// `lo:hi:step`, inclusive of `hi` up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

const MAX_GRID: usize = 1_000_000;

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, step] = parts.as_slice() else {
            return Err(format!("grid must look like lo:hi:step, got {s:?}"));
        };
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?} in grid {s:?}"));
        let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
            return Err(format!("grid {s:?} has non-finite entries"));
        }
        if !(step > 0.0) {
            return Err(format!("grid step must be positive, got {step}"));
        }
        if hi < lo {
            return Err(format!("grid {s:?} is empty (hi < lo)"));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        if count > MAX_GRID {
            return Err(format!("grid {s:?} has more than {MAX_GRID} points"));
        }
        Ok(Grid((0..count).map(|k| lo + k as f64 * step).collect()))
    }
}

/// Comma-separated list of positive integers.
#[derive(Debug, Clone, PartialEq)]
pub struct UsizeList(pub Vec<usize>);

impl FromStr for UsizeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad integer {t:?} in list {s:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() || v.contains(&0) {
            return Err(format!("list {s:?} must hold positive integers"));
        }
        Ok(UsizeList(v))
    }
}

/// `--seed` wins, then the environment variable, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env.map(str::trim) {
        None | Some("") => Ok(DEFAULT_SEED),
        Some(v) => v.parse().map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
    }
}

/// Either one `--d` value or a `--d-grid`; exactly one must be present.
pub fn distortions(d: Option<f64>, grid: Option<&Grid>) -> Result<Vec<f64>, CliError> {
    match (d, grid) {
        (Some(_), Some(_)) => usage("give either --d or --d-grid, not both"),
        (Some(d), None) => Ok(vec![d]),
        (None, Some(g)) => Ok(g.0.clone()),
        (None, None) => usage("one of --d or --d-grid is required"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!("0:0.5:0.25".parse::<Grid>().unwrap().0, vec![0.0, 0.25, 0.5]);
        assert_eq!("0.1:0.3:0.1".parse::<Grid>().unwrap().0.len(), 3);
        assert_eq!("1:1:0.5".parse::<Grid>().unwrap().0, vec![1.0]);
        for bad in ["", "0:1", "0:1:0", "1:0:0.1", "a:1:0.1", "0:1:-1", "0:inf:1", "0:1:1e-9"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn lists() {
        assert_eq!("500, 1000".parse::<UsizeList>().unwrap().0, vec![500, 1000]);
        assert!("0".parse::<UsizeList>().is_err());
        assert!("1,,2".parse::<UsizeList>().is_err());
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(3), Some("9")).unwrap(), 3);
        assert_eq!(resolve_seed(None, Some("9")).unwrap(), 9);
        assert_eq!(resolve_seed(None, None).unwrap(), DEFAULT_SEED);
        assert_eq!(resolve_seed(None, Some("")).unwrap(), DEFAULT_SEED);
        assert_eq!(resolve_seed(None, Some("x")).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn exit_codes() {
        let nc = CliError::Core(CoreError::NonConvergence { iterations: 2, residual: 0.1 });
        assert_eq!(nc.exit_code(), 3);
        assert_eq!(CliError::Core(CoreError::Detectability("x".into())).exit_code(), 4);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
    }

    #[test]
    fn distortion_choice() {
        let g: Grid = "0.1:0.2:0.1".parse().unwrap();
        assert_eq!(distortions(Some(0.3), None).unwrap(), vec![0.3]);
        assert_eq!(distortions(None, Some(&g)).unwrap().len(), 2);
        assert!(distortions(Some(0.3), Some(&g)).is_err());
        assert!(distortions(None, None).is_err());
    }
}
