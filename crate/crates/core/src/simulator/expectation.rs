use serde::Serialize;

use super::Counts;
use crate::circuit::parse_bits;
use crate::error::{Result, ZneError};

/// What a shot histogram is reduced to.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// Fraction of shots whose bits at `positions` equal `target`.
    Success {
        target: Vec<bool>,
        positions: Vec<usize>,
    },
    /// Fraction of shots with even parity over `positions`. The Pauli
    /// expectation `<Z...Z>` is `2 * mean - 1`.
    ZParity { positions: Vec<usize> },
}

impl Observable {
    /// Success on the leading `target.len()` bits.
    pub fn success(target: &str) -> Result<Self> {
        let target = parse_bits(target)?;
        let positions = (0..target.len()).collect();
        Ok(Observable::Success { target, positions })
    }

    pub fn success_on(target: &str, positions: Vec<usize>) -> Result<Self> {
        let target = parse_bits(target)?;
        if target.len() != positions.len() {
            return Err(ZneError::WidthMismatch {
                expected: positions.len(),
                got: target.len(),
            });
        }
        Ok(Observable::Success { target, positions })
    }

    fn positions(&self) -> &[usize] {
        match self {
            Observable::Success { positions, .. } | Observable::ZParity { positions } => positions,
        }
    }

    fn hit(&self, bits: &[u8]) -> bool {
        match self {
            Observable::Success { target, positions } => positions
                .iter()
                .zip(target)
                .all(|(&p, &t)| (bits[p] == b'1') == t),
            Observable::ZParity { positions } => {
                positions.iter().filter(|&&p| bits[p] == b'1').count() % 2 == 0
            }
        }
    }
}

/// A success-probability estimate from `shots` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectationEstimate {
    pub mean: f64,
    /// `sqrt(mean (1 - mean) / shots)`.
    pub std_err: f64,
    pub shots: u64,
    pub lambda: f64,
    /// No shot succeeded; extrapolations through this point are unreliable.
    pub degenerate: bool,
}

impl ExpectationEstimate {
    pub fn from_successes(successes: u64, shots: u64, lambda: f64) -> Self {
        let mean = successes as f64 / shots as f64;
        Self {
            mean,
            std_err: (mean * (1.0 - mean) / shots as f64).sqrt(),
            shots,
            lambda,
            degenerate: successes == 0,
        }
    }
}

pub fn expectation(counts: &Counts, obs: &Observable, lambda: f64) -> Result<ExpectationEstimate> {
    let shots = counts.shots();
    if shots == 0 {
        return Err(ZneError::InvalidArgument("empty histogram".into()));
    }
    let need = obs.positions().iter().max().map_or(0, |m| m + 1);
    let mut successes = 0;
    for (bits, &c) in &counts.0 {
        if bits.len() < need {
            return Err(ZneError::WidthMismatch {
                expected: need,
                got: bits.len(),
            });
        }
        if obs.hit(bits.as_bytes()) {
            successes += c;
        }
    }
    Ok(ExpectationEstimate::from_successes(successes, shots, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn counts(entries: &[(&str, u64)]) -> Counts {
        Counts(entries.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>())
    }

    #[test]
    fn success_fraction_and_std_err() {
        let c = counts(&[("111", 900), ("011", 100)]);
        let e = expectation(&c, &Observable::success("111").unwrap(), 1.0).unwrap();
        assert_eq!(e.mean, 0.9);
        assert!((e.std_err - 0.009486832980505138).abs() < 1e-12);
        assert_eq!(e.shots, 1000);
        assert!(!e.degenerate);
    }

    #[test]
    fn zero_successes_is_flagged() {
        let c = counts(&[("000", 10)]);
        let e = expectation(&c, &Observable::success("111").unwrap(), 2.0).unwrap();
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.std_err, 0.0);
        assert!(e.degenerate);
    }

    #[test]
    fn masked_success_ignores_other_bits() {
        let c = counts(&[("1010", 5), ("1011", 5)]);
        let obs = Observable::success_on("101", vec![0, 1, 2]).unwrap();
        assert_eq!(expectation(&c, &obs, 1.0).unwrap().mean, 1.0);
    }

    #[test]
    fn parity_observable() {
        let c = counts(&[("11", 3), ("10", 1)]);
        let obs = Observable::ZParity { positions: vec![0, 1] };
        assert_eq!(expectation(&c, &obs, 1.0).unwrap().mean, 0.75);
    }

    #[test]
    fn width_mismatch_and_empty() {
        let c = counts(&[("11", 3)]);
        assert!(matches!(
            expectation(&c, &Observable::success("111").unwrap(), 1.0),
            Err(ZneError::WidthMismatch { .. })
        ));
        assert!(expectation(&Counts::default(), &Observable::success("1").unwrap(), 1.0).is_err());
        assert!(Observable::success_on("11", vec![0]).is_err());
    }
}
