//! Simple Good-Turing frequency estimation (Gale & Sampson).

use std::collections::BTreeMap;

/// Critical value for switching from Turing to smoothed estimates (p < 0.05).
const CONFIDENCE_FACTOR: f64 = 1.96;

#[derive(Clone, Debug, PartialEq)]
pub struct SimpleGoodTuring {
    /// Observed frequency r, paired with its normalized smoothed count.
    adjusted: BTreeMap<u64, f64>,
    p_zero: f64,
    slope: f64,
    intercept: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SgtError {
    /// Fewer than two distinct observed frequencies; the log-log fit is undefined.
    TooFewFrequencies(usize),
}

impl std::fmt::Display for SgtError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SgtError::TooFewFrequencies(n) => write!(
                f,
                "Simple Good-Turing needs at least 2 distinct frequencies, found {n}"
            ),
        }
    }
}

impl std::error::Error for SgtError {}

impl SimpleGoodTuring {
    /// Fits the estimator to frequency-of-frequency data `r -> n_r`.
    /// Entries with `r == 0` or `n_r == 0` are ignored.
    pub fn fit(freq_of_freq: &BTreeMap<u64, u64>) -> Result<Self, SgtError> {
        let rows: Vec<(u64, u64)> = freq_of_freq
            .iter()
            .filter(|&(&r, &n)| r > 0 && n > 0)
            .map(|(&r, &n)| (r, n))
            .collect();
        if rows.len() < 2 {
            return Err(SgtError::TooFewFrequencies(rows.len()));
        }
        let total: f64 = rows.iter().map(|&(r, n)| (r * n) as f64).sum();
        let n1 = freq_of_freq.get(&1).copied().unwrap_or(0) as f64;
        let p_zero = n1 / total;

        // Averaging transform: Z_r = 2 n_r / (t - q) over neighbouring observed r.
        let mut log_r = Vec::with_capacity(rows.len());
        let mut log_z = Vec::with_capacity(rows.len());
        for (j, &(r, n)) in rows.iter().enumerate() {
            let q = if j == 0 { 0.0 } else { rows[j - 1].0 as f64 };
            let t = if j + 1 == rows.len() {
                2.0 * r as f64 - q
            } else {
                rows[j + 1].0 as f64
            };
            log_r.push((r as f64).ln());
            log_z.push((2.0 * n as f64 / (t - q)).ln());
        }
        let (slope, intercept) = least_squares(&log_r, &log_z);
        if slope > -1.0 {
            log::warn!("Simple Good-Turing fit has slope {slope:.3} > -1; estimates may be poor");
        }
        let smoothed = |r: f64| (intercept + slope * r.ln()).exp();

        let mut r_star = Vec::with_capacity(rows.len());
        let mut use_fitted = false;
        for (j, &(r, n)) in rows.iter().enumerate() {
            let rf = r as f64;
            let y = (rf + 1.0) * smoothed(rf + 1.0) / smoothed(rf);
            let next = rows.get(j + 1).filter(|&&(r2, _)| r2 == r + 1).map(|&(_, n2)| n2);
            let estimate = match next {
                Some(n_next) if !use_fitted => {
                    let (n_r, n_next) = (n as f64, n_next as f64);
                    let x = (rf + 1.0) * n_next / n_r;
                    let spread = CONFIDENCE_FACTOR
                        * ((rf + 1.0).powi(2) * (n_next / (n_r * n_r)) * (1.0 + n_next / n_r))
                            .sqrt();
                    if (x - y).abs() > spread {
                        x
                    } else {
                        use_fitted = true;
                        y
                    }
                }
                _ => {
                    use_fitted = true;
                    y
                }
            };
            r_star.push(estimate);
        }

        let n_prime: f64 = rows
            .iter()
            .zip(&r_star)
            .map(|(&(_, n), &rs)| n as f64 * rs)
            .sum();
        let adjusted = rows
            .iter()
            .zip(&r_star)
            .map(|(&(r, _), &rs)| (r, total * (1.0 - p_zero) * rs / n_prime))
            .collect();
        Ok(SimpleGoodTuring {
            adjusted,
            p_zero,
            slope,
            intercept,
        })
    }

    /// Smoothed expected count for an item observed `r` times.
    pub fn adjusted_count(&self, r: u64) -> Option<f64> {
        self.adjusted.get(&r).copied()
    }

    /// Probability mass reserved for unseen items.
    pub fn p_zero(&self) -> f64 {
        self.p_zero
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
