#![allow(dead_code)]

use wordlink::Bitext;

pub fn bitext(segs: &[(Vec<String>, Vec<String>)]) -> Bitext {
    Bitext::from_segments(
        segs.iter()
            .enumerate()
            .map(|(i, (s, t))| ((i + 1).to_string(), s.clone(), t.clone())),
    )
    .unwrap()
}

pub fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

/// `x ln x` with `0 ln 0 = 0`.
pub fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `ln C(n, k)` by summing logarithms.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Binomial log-likelihood with its coefficient.
pub fn ln_binomial(k: u64, n: u64, p: f64) -> f64 {
    let lp = |c: u64, q: f64| if c == 0 { 0.0 } else { c as f64 * q.ln() };
    ln_choose(n, k) + lp(k, p) + lp(n - k, 1.0 - p)
}

/// G² written as the ratio of two products of binomials, coefficients and
/// all.
pub fn g2_binomial_oracle(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let (n1, n2) = (a + b, c + d);
    let p1 = a as f64 / n1 as f64;
    let p2 = c as f64 / n2 as f64;
    let p = (a + c) as f64 / (n1 + n2) as f64;
    2.0 * (ln_binomial(a, n1, p1) + ln_binomial(c, n2, p2)
        - ln_binomial(a, n1, p)
        - ln_binomial(c, n2, p))
}

/// G² as `2 N I(X;Y)`, mutual information in nats of the joint table.
pub fn g2_mutual_information(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let n = a + b + c + d;
    let cells = [a, b, c, d];
    let rows = [a + b, c + d];
    let cols = [a + c, b + d];
    let h_joint: f64 = cells.iter().map(|&x| xlnx(x)).sum();
    let h_rows: f64 = rows.iter().map(|&x| xlnx(x)).sum();
    let h_cols: f64 = cols.iter().map(|&x| xlnx(x)).sum();
    2.0 * (h_joint - h_rows - h_cols + xlnx(n))
}
