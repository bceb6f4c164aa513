//! Normalising-constant profile `r_n = a_n x_n^κ ℓ(x_n)`.

use serde::Serialize;

use super::limits::checkpoints;
use super::KendallInput;
use crate::error::{Error, Result};
use crate::function::FunctionSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryReport {
    /// `(n, r_n)` at `N, N/2, …`, largest `n` first.
    pub profile: Vec<(usize, f64)>,
    pub c_hat: f64,
    /// `r_N / r_{N/2}`.
    pub ratio: f64,
    /// `ln(r_N / r_{N/2}) / ln(x_N / x_{N/2})`.
    pub trend_exponent: f64,
    pub stabilizes: bool,
}

/// With `ell = None` the slowly varying part is taken as `f(x)/x^κ`.
pub fn verify_corollary(
    input: &KendallInput,
    kappa_hat: f64,
    ell: Option<&FunctionSpec>,
    n: usize,
    tol: f64,
) -> Result<CorollaryReport> {
    input.check_horizon(n)?;
    let r = |k: usize| -> Result<f64> {
        let x = input.x_n(k)?;
        let a = input.a_n(k, x)?;
        let v = match ell {
            Some(l) => a * x.powf(kappa_hat) * l.try_eval(x)?,
            None => a * input.f.try_eval(x)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { what: "corollary ratio".into(), x })
        }
    };
    let profile: Vec<(usize, f64)> = checkpoints(n, 8).into_iter().map(|k| Ok((k, r(k)?))).collect::<Result<_>>()?;
    let c_hat = profile[0].1;
    let half = n / 2;
    let r_half = r(half)?;
    let ratio = c_hat / r_half;
    let trend_exponent = (ratio.abs().ln()) / (input.x_n(n)? / input.x_n(half)?).ln();
    Ok(CorollaryReport { profile, c_hat, ratio, trend_exponent, stabilizes: (ratio - 1.0).abs() < tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kendall::{AnPolicy, Mode, TestSet};
    use crate::sequences::{AdmissibilityKind, Generator, SequenceSpec};

    fn input(a: AnPolicy) -> KendallInput {
        KendallInput {
            f: "pow_slowvar(1.7, log2)".parse().unwrap(),
            seq: SequenceSpec::new(AdmissibilityKind::Multiplicative, Generator::Identity, 0),
            test_set: TestSet::interval(1.0, 2.0).unwrap(),
            a_policy: a,
            mode: Mode::Karamata,
        }
    }

    #[test]
    fn reciprocal_policy_gives_one() {
        let ell: FunctionSpec = "pow_slowvar(0, log2)".parse().unwrap();
        let rep = verify_corollary(&input(AnPolicy::Reciprocal), 1.7, Some(&ell), 100_000, 1e-2).unwrap();
        assert!((rep.c_hat - 1.0).abs() < 1e-12 && rep.stabilizes);
    }

    #[test]
    fn mismatched_index_trends() {
        let a: Vec<f64> = (1..=100_000).map(|n| (n as f64).powf(-1.5)).collect();
        let one: FunctionSpec = "pow_slowvar(0, one)".parse().unwrap();
        let rep = verify_corollary(&input(AnPolicy::Given(a)), 1.7, Some(&one), 100_000, 1e-2).unwrap();
        assert!(!rep.stabilizes);
        assert!((rep.trend_exponent - 0.2).abs() < 1e-9, "{}", rep.trend_exponent);
    }
}
