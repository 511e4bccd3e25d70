//! Binomial acceptance intervals and a plug-in mutual-information estimate.

use serde::{Deserialize, Serialize};

/// `p ± 3·√(p(1−p)/n)` around a reference probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinomialGate {
    pub reference: f64,
    pub samples: u64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BinomialGate {
    pub fn three_sigma(reference: f64, samples: u64) -> Self {
        let sigma = if samples == 0 {
            f64::INFINITY
        } else {
            (reference * (1.0 - reference) / samples as f64).sqrt()
        };
        BinomialGate {
            reference,
            samples,
            sigma,
            lower: reference - 3.0 * sigma,
            upper: reference + 3.0 * sigma,
        }
    }

    /// An empty sample never passes.
    pub fn admits(&self, observed: f64) -> bool {
        self.samples > 0 && observed >= self.lower && observed <= self.upper
    }
}

/// Mutual information in bits of the empirical joint distribution given by
/// `counts[x][y]`.
pub fn mutual_information(counts: &[[u64; 2]; 2]) -> f64 {
    let total: u64 = counts.iter().flatten().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let px = [counts[0][0] + counts[0][1], counts[1][0] + counts[1][1]];
    let py = [counts[0][0] + counts[1][0], counts[0][1] + counts[1][1]];
    let mut mi = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let c = counts[x][y];
            if c == 0 {
                continue;
            }
            let pxy = c as f64 / n;
            mi += pxy * (pxy / (px[x] as f64 / n * py[y] as f64 / n)).log2();
        }
    }
    mi.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_width() {
        let g = BinomialGate::three_sigma(0.75, 20000);
        assert!((g.sigma - (0.75f64 * 0.25 / 20000.0).sqrt()).abs() < 1e-15);
        assert!(g.admits(0.75) && !g.admits(0.76));
        let exact = BinomialGate::three_sigma(0.0, 100);
        assert!(exact.admits(0.0) && !exact.admits(1e-9));
        assert!(!BinomialGate::three_sigma(0.5, 0).admits(0.5));
    }

    #[test]
    fn mi_extremes() {
        assert_eq!(mutual_information(&[[25, 25], [25, 25]]), 0.0);
        assert!((mutual_information(&[[50, 0], [0, 50]]) - 1.0).abs() < 1e-12);
    }
}
