//! Error measures shared by calibration, glare removal and the test suites.

/// Root-mean-square of `log(a + eps) - log(b + eps)` over the selected pixels.
///
/// `mask`, when given, selects entries by index; returns 0 for an empty
/// selection.
pub fn log_rmse(a: &[f64], b: &[f64], mask: Option<&[bool]>, eps: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    let mut n = 0usize;
    for i in 0..a.len() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        let d = (a[i] + eps).ln() - (b[i] + eps).ln();
        acc += d * d;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (acc / n as f64).sqrt()
    }
}

/// `RMSE(a, b) / RMS(b)`.
pub fn relative_rmse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Median of a non-empty slice (mean of the two central values for even
/// lengths). NaNs are not expected.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
