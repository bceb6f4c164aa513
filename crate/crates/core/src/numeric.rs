//! Small numerical helpers: robust summaries, least squares, bisection.

use crate::error::{Error, Result};

/// Median of a slice (NaN-free input assumed); `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Order statistic at level `q ∈ [0, 1]`: the `⌈q·n⌉`-th smallest value.
pub fn upper_quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let rank = ((q.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n);
    Some(v[rank - 1])
}

/// Least-squares slope of the model `y = κ·x` (no intercept).
pub fn slope_through_origin(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += x * y;
        sxx += x * x;
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Least-squares polynomial fit of the given degree; returns coefficients
/// `c[0] + c[1]·x + …`.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    let columns: Vec<Vec<f64>> = (0..=degree)
        .map(|j| xs.iter().map(|x| x.powi(j as i32)).collect())
        .collect();
    lstsq(&columns, ys)
}

/// Least squares `min ‖A c − y‖` for a design matrix given by columns.
/// Columns are scaled to unit max-norm and the system is solved by
/// Householder QR.
pub fn lstsq(columns: &[Vec<f64>], ys: &[f64]) -> Result<Vec<f64>> {
    let m = ys.len();
    let n = columns.len();
    if n == 0 || m < n || columns.iter().any(|c| c.len() != m) {
        return Err(Error::InsufficientData(format!(
            "least squares with {n} unknowns needs at least {n} rows, got {m}"
        )));
    }
    let scales: Vec<f64> = columns
        .iter()
        .map(|c| {
            let s = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if s > 0.0 { s } else { 1.0 }
        })
        .collect();
    let mut a: Vec<Vec<f64>> = columns
        .iter()
        .zip(&scales)
        .map(|(c, s)| c.iter().map(|x| x / s).collect())
        .collect();
    let mut b = ys.to_vec();
    for k in 0..n {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Degenerate("rank-deficient least-squares design".into()));
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(k) {
            let dot: f64 = v.iter().zip(&col[k..]).map(|(p, q)| p * q).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&b[k..]).map(|(p, q)| p * q).sum();
        let f = 2.0 * dot / vnorm2;
        for (c, vi) in b[k..].iter_mut().zip(&v) {
            *c -= f * vi;
        }
    }
    let mut coef = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in k + 1..n {
            acc -= a[j][k] * coef[j];
        }
        coef[k] = acc / a[k][k];
    }
    for (c, s) in coef.iter_mut().zip(&scales) {
        *c /= s;
    }
    Ok(coef)
}

/// Bisection on a sign change of `f` over `[lo, hi]`, run until the bracket
/// stops shrinking in floating point.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::InvalidInput(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    let lo_negative = flo < 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians_and_quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(upper_quantile(&v, 0.98), Some(98.0));
        assert_eq!(upper_quantile(&v, 1.0), Some(100.0));
        assert_eq!(upper_quantile(&v, 0.0), Some(1.0));
    }

    #[test]
    fn polyfit_recovers_quadratic_and_extrapolates() {
        let xs: Vec<f64> = (0..8).map(|j| 1.0 / (13.8 - 0.69 * j as f64)).collect();
        let ys: Vec<f64> = xs.iter().map(|u| 3.2 * (1.0 + 0.4 * u).powi(2)).collect();
        let c = polyfit(&xs, &ys, 2).unwrap();
        assert!((c[0] - 3.2).abs() < 1e-10, "{c:?}");
        assert!((c[1] - 3.2 * 0.8).abs() < 1e-7);
    }

    #[test]
    fn lstsq_with_mixed_basis() {
        let xs: Vec<f64> = (0..8).map(|j| 1e6 / 2f64.powi(j)).collect();
        let cols = vec![
            vec![1.0; 8],
            xs.iter().map(|x| 1.0 / x.ln()).collect(),
            xs.iter().map(|x| 1.0 / x).collect(),
        ];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 / x.ln() + 40.0 / x).collect();
        let c = lstsq(&cols, &ys).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-10 && (c[2] - 40.0).abs() < 1e-5, "{c:?}");
    }

    #[test]
    fn polyfit_needs_enough_points() {
        assert!(polyfit(&[1.0, 2.0], &[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(bisect(|x| x * x + 1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn slope() {
        assert_eq!(slope_through_origin(&[1.0, 2.0], &[2.0, 4.0]), Some(2.0));
        assert_eq!(slope_through_origin(&[0.0], &[1.0]), None);
    }
}
