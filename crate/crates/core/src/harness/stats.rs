use serde::{Deserialize, Serialize};

/// 0.99 quantile of the chi-square distribution with one degree of freedom.
pub const CHI_SQUARE_1DF_CRITICAL_001: f64 = 6.634_896_601_021_214;

/// A Bernoulli rate measured over `samples` trials, with its analytic reference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub count: u64,
    pub samples: u64,
    pub rate: Option<f64>,
    pub std_error: Option<f64>,
    pub analytic: Option<f64>,
}

impl RateEstimate {
    pub fn new(count: u64, samples: u64, analytic: Option<f64>) -> Self {
        let rate = (samples > 0).then(|| count as f64 / samples as f64);
        Self {
            count,
            samples,
            rate,
            std_error: rate.map(|p| binomial_std_error(p, samples)),
            analytic,
        }
    }

    /// Distance to the analytic value in units of the analytic standard error.
    pub fn sigmas_from_analytic(&self) -> Option<f64> {
        let (rate, p) = (self.rate?, self.analytic?);
        let sigma = binomial_std_error(p, self.samples);
        if sigma == 0.0 {
            return Some(if rate == p { 0.0 } else { f64::INFINITY });
        }
        Some((rate - p).abs() / sigma)
    }

    /// Empirical rate within `k` standard errors of the analytic value.
    pub fn agrees_within(&self, k: f64) -> bool {
        self.sigmas_from_analytic().is_some_and(|s| s <= k)
    }
}

pub fn binomial_std_error(p: f64, samples: u64) -> f64 {
    if samples == 0 {
        return f64::NAN;
    }
    // Exact oracle sums can overshoot 1 by an ulp.
    let p = p.clamp(0.0, 1.0);
    (p * (1.0 - p) / samples as f64).sqrt()
}

/// `|observed - p| <= k * sqrt(p(1-p)/n)`; a degenerate `p` demands an exact match.
pub fn within_binomial_band(observed: f64, p: f64, samples: u64, k: f64) -> bool {
    (observed - p).abs() <= k * binomial_std_error(p, samples) + 1e-12
}

/// Mutual information in bits of a 2x2 joint count table.
pub fn mutual_information_bits(joint: &[[u64; 2]; 2]) -> Option<f64> {
    let total: u64 = joint.iter().flatten().sum();
    if total == 0 {
        return None;
    }
    let p = joint.map(|row| row.map(|c| c as f64 / total as f64));
    Some(mutual_information_of(&p).max(0.0))
}

/// Mutual information in bits of a 2x2 joint probability table.
pub fn mutual_information_of(p: &[[f64; 2]; 2]) -> f64 {
    let rows = [p[0][0] + p[0][1], p[1][0] + p[1][1]];
    let cols = [p[0][0] + p[1][0], p[0][1] + p[1][1]];
    let mut mi = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            if p[r][c] > 0.0 {
                mi += p[r][c] * (p[r][c] / (rows[r] * cols[c])).log2();
            }
        }
    }
    mi
}

/// Pearson chi-square statistic for independence of a 2x2 table.
pub fn chi_square_2x2(table: &[[u64; 2]; 2]) -> f64 {
    let total: f64 = table.iter().flatten().sum::<u64>() as f64;
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let mut stat = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            let expected = rows[r] as f64 * cols[c] as f64 / total;
            if expected > 0.0 {
                let d = table[r][c] as f64 - expected;
                stat += d * d / expected;
            }
        }
    }
    stat
}
