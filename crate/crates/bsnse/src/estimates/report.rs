use std::collections::BTreeMap;

use serde::Serialize;

/// Outcome of one inequality audit: per-sample sides, margin statistics,
/// violation count and every constant the inequality was assembled from.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    pub margin_min: f64,
    pub margin_mean: f64,
    /// Named constants used to assemble the right-hand side.
    pub constants: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            samples: 0,
            violations: 0,
            margin_min: f64::INFINITY,
            margin_mean: 0.0,
            constants: BTreeMap::new(),
            seed: None,
            lhs: Vec::new(),
            rhs: Vec::new(),
        }
    }

    /// Record one sample; a violation is `lhs > rhs + tol`.
    pub fn push(&mut self, lhs: f64, rhs: f64, tol: f64) {
        let margin = rhs - lhs;
        if !(margin >= -tol) {
            self.violations += 1;
        }
        self.margin_min = self.margin_min.min(margin);
        self.margin_mean =
            (self.margin_mean * self.samples as f64 + margin) / (self.samples + 1) as f64;
        self.samples += 1;
        self.lhs.push(lhs);
        self.rhs.push(rhs);
    }

    pub fn constant(&mut self, key: &str, value: f64) -> &mut Self {
        self.constants.insert(key.into(), value);
        self
    }

    pub fn get_constant(&self, key: &str) -> Option<f64> {
        self.constants.get(key).copied()
    }

    pub fn passes(&self) -> bool {
        self.violations == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_violations_are_tracked() {
        let mut r = EstimateReport::new("demo");
        r.push(1.0, 2.0, 0.0);
        r.push(3.0, 2.5, 0.0);
        r.push(2.0, 2.0, 0.0);
        assert_eq!(r.samples, 3);
        assert_eq!(r.violations, 1);
        assert!((r.margin_min + 0.5).abs() < 1e-15);
        assert!((r.margin_mean - (1.0 - 0.5 + 0.0) / 3.0).abs() < 1e-15);
        assert!(!r.passes());
    }

    #[test]
    fn nan_counts_as_violation() {
        let mut r = EstimateReport::new("demo");
        r.push(f64::NAN, 1.0, 0.0);
        assert_eq!(r.violations, 1);
    }
}
