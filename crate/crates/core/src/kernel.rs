//! Continuous solutions of the Beurling–Goldie equation
//! `K(u ∘_r v) = K(u) ∘_s K(v)` and residual checks for the whole family
//! (Cauchy, Goldie, Chudziak–Jabłońska, Gołąb–Schinzel).
//!
//! Rows of the solution table are indexed by the argument-side parameter `r`,
//! columns by the value-side parameter `s`, each with an index `κ`:
//!
//! ```text
//!            s = 0            s ∈ (0,∞)               s = ∞
//! r = 0      κt               (e^{κt} − 1)/s          e^{κt}
//! r ∈ (0,∞)  κ log(1+rt)      [(1+rt)^κ − 1]/s        (1+rt)^κ
//! r = ∞      κ log t          (t^κ − 1)/s             t^κ
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::popa::PopaParam;

/// Step used to recover the multiplier `r(u)` by difference quotients.
pub const SIGMA_STEP: f64 = 1e-6;

/// Which functional equation a `(r, s)` cell of the table solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationClass {
    CfeAdditive,
    CfeMultiplicative,
    Goldie,
    Cj,
    BgGeneral,
    Gs,
}

impl EquationClass {
    /// Classification of a table cell by its parameters.
    pub fn classify(r: PopaParam, s: PopaParam) -> Self {
        match (r, s) {
            (r, s) if r.is_zero() && s.is_zero() => EquationClass::CfeAdditive,
            (r, s) if r.is_infinite() && s.is_infinite() => EquationClass::CfeMultiplicative,
            (r, _) if r.is_zero() => EquationClass::Goldie,
            (_, s) if s.is_infinite() => EquationClass::Cj,
            _ => EquationClass::BgGeneral,
        }
    }
}

/// Coarse position of a parameter in the table: row/column 0, 1 or 2.
fn band(p: PopaParam) -> usize {
    if p.is_zero() {
        0
    } else if p.is_infinite() {
        2
    } else {
        1
    }
}

/// One cell `(r, s)` of the solution table together with its index `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub r: PopaParam,
    pub s: PopaParam,
    pub kappa: f64,
}

impl KernelSpec {
    pub fn new(r: PopaParam, s: PopaParam, kappa: f64) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::InvalidInput(format!("kappa must be finite, got {kappa}")));
        }
        Ok(Self { r, s, kappa })
    }

    pub fn class(&self) -> EquationClass {
        EquationClass::classify(self.r, self.s)
    }

    /// Human-readable formula of the cell.
    pub fn formula(&self) -> &'static str {
        const FORMULAS: [[&str; 3]; 3] = [
            ["kappa*t", "(exp(kappa*t)-1)/s", "exp(kappa*t)"],
            ["kappa*log(1+r*t)", "((1+r*t)^kappa-1)/s", "(1+r*t)^kappa"],
            ["kappa*log(t)", "(t^kappa-1)/s", "t^kappa"],
        ];
        FORMULAS[band(self.r)][band(self.s)]
    }

    fn check(&self, t: f64) -> Result<()> {
        if self.r.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain { what: "kernel", value: t })
        }
    }

    /// `K(t)` from the explicit table formulas.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let k = self.kappa;
        // log of the multiplicative "power" part: κt, κ log(1+rt), κ log t
        let log_power = match self.r.rho() {
            Some(0.0) => k * t,
            Some(r) => k * (r * t).ln_1p(),
            None => k * t.ln(),
        };
        match self.s.rho() {
            Some(0.0) => log_power,
            Some(s) => log_power.exp_m1() / s,
            None => log_power.exp(),
        }
    }

    /// `K(t)` through the isomorphism form `η_s^{-1}(η_r(t)^κ)` (logarithm
    /// for `s = 0`). Independent of [`KernelSpec::eval`].
    pub fn eval_isomorphism(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let k = self.kappa;
        let power = match self.r.rho() {
            Some(0.0) => (k * t).exp(),
            Some(_) => self.r.eta(t)?.powf(k),
            None => t.powf(k),
        };
        match self.s.rho() {
            Some(0.0) => {
                if self.r.is_zero() {
                    Ok(k * t)
                } else {
                    Ok(power.ln())
                }
            }
            Some(_) => self.s.eta_inverse(power),
            None => Ok(power),
        }
    }

    /// `|K(u ∘_r v) − K(u) ∘_s K(v)|`.
    pub fn bg_residual(&self, u: f64, v: f64) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        bg_residual_with(self.r, self.s, |t| self.eval_unchecked(t), u, v)
    }

    /// `|K(u ∘_r v) − K(u)·K(v)|`; only defined for the `s = ∞` column.
    pub fn cj_residual(&self, u: f64, v: f64) -> Result<f64> {
        if !self.s.is_infinite() {
            return Err(Error::InvalidInput(
                "the Chudziak-Jablonska residual needs s = inf".into(),
            ));
        }
        let w = self.r.circle(u, v)?;
        Ok((self.eval(w)? - self.eval(u)? * self.eval(v)?).abs())
    }

    /// `|σ(K(u)) − r(u)|` with `σ(w) = 1 + s·w`, where the multiplier
    /// `r(u) = lim (K(u ∘ w) − K(u))/K(w)` is recovered by central
    /// difference quotients around the identity.
    pub fn sigma_relation_check(&self, u: f64) -> Result<f64> {
        if self.kappa == 0.0 {
            return Err(Error::Degenerate("kappa = 0: K is constant".into()));
        }
        let s = match self.s.rho() {
            Some(s) => s,
            None => {
                return Err(Error::InvalidInput(
                    "sigma relation is checked for finite s only".into(),
                ))
            }
        };
        let ku = self.eval(u)?;
        let e = self.r.identity();
        let mut quotients = [0.0; 2];
        for (q, step) in quotients.iter_mut().zip([SIGMA_STEP, -SIGMA_STEP]) {
            let w = e + step;
            let kw = self.eval(w)?;
            *q = (self.eval(self.r.circle(u, w)?)? - ku) / kw;
        }
        let r_u = 0.5 * (quotients[0] + quotients[1]);
        Ok(((1.0 + s * ku) - r_u).abs())
    }
}

/// Beurling–Goldie residual for an arbitrary candidate kernel.
pub fn bg_residual_with<K: Fn(f64) -> f64>(
    r: PopaParam,
    s: PopaParam,
    kernel: K,
    u: f64,
    v: f64,
) -> Result<f64> {
    let w = r.circle(u, v)?;
    let rhs = s.circle(kernel(u), kernel(v))?;
    Ok((kernel(w) - rhs).abs())
}

/// True iff every value is within `tol` of 0 or of 1. Empty input is not trivial.
pub fn is_trivial(values: &[f64], tol: f64) -> bool {
    !values.is_empty()
        && values.iter().all(|v| (v - 0.0).abs() <= tol || (v - 1.0).abs() <= tol)
}

/// Random group element with group-log coordinate uniform in `[−spread, spread]`.
pub fn sample_element<R: Rng + ?Sized>(param: PopaParam, spread: f64, rng: &mut R) -> f64 {
    param.group_exp(rng.gen_range(-spread..=spread))
}

/// Worst residuals of one cell over random pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellSweep {
    pub spec: KernelSpec,
    pub trials: usize,
    /// `max |K(u∘v) − K(u)∘K(v)| / (1 + |K(u∘v)|)`
    pub max_bg_residual: f64,
    /// `max |explicit − isomorphism form| / max(1, |K|)`
    pub max_form_mismatch: f64,
}

/// Sweeps `trials` random pairs `(u, v)` through the residual and form checks.
pub fn sweep_cell<R: Rng + ?Sized>(spec: KernelSpec, trials: usize, rng: &mut R) -> Result<CellSweep> {
    let mut worst_bg: f64 = 0.0;
    let mut worst_form: f64 = 0.0;
    for _ in 0..trials {
        let u = sample_element(spec.r, 2.0, rng);
        let v = sample_element(spec.r, 2.0, rng);
        let w = spec.r.circle(u, v)?;
        let kw = spec.eval(w)?;
        worst_bg = worst_bg.max(spec.bg_residual(u, v)? / (1.0 + kw.abs()));
        for t in [u, v, w] {
            let a = spec.eval(t)?;
            let b = spec.eval_isomorphism(t)?;
            worst_form = worst_form.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    Ok(CellSweep { spec, trials, max_bg_residual: worst_bg, max_form_mismatch: worst_form })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(r: f64) -> PopaParam {
        PopaParam::new(r).unwrap()
    }

    fn ks(r: PopaParam, s: PopaParam, kappa: f64) -> KernelSpec {
        KernelSpec::new(r, s, kappa).unwrap()
    }

    const INF: PopaParam = PopaParam::INFINITY;

    #[test]
    fn eval_examples() {
        let k = ks(INF, INF, 1.7).eval(2.0).unwrap();
        assert!((k - 2f64.powf(1.7)).abs() < 1e-12);
        assert!((k - 3.2490).abs() < 1e-4);
        assert_eq!(ks(p(0.0), INF, 0.5).eval(0.0).unwrap(), 1.0);
        assert!((ks(p(1.0), p(1.0), 1.0).eval(3.0).unwrap() - 3.0).abs() < 1e-15);
        assert!(ks(INF, p(1.0), 1.0).eval(0.0).is_err());
        assert!(ks(p(1.0), p(0.0), 1.0).eval(-1.0).is_err());
    }

    #[test]
    fn bg_residual_examples() {
        // log(1+t) turns ∘_1 into addition
        assert!(ks(p(1.0), p(0.0), 1.0).bg_residual(0.7, 2.2).unwrap() < 1e-15);
        assert!(ks(p(0.0), INF, 2.0).bg_residual(0.3, -1.1).unwrap() < 1e-15);
        let broken = bg_residual_with(p(0.0), INF, |t| t, 1.0, 1.0).unwrap();
        assert_eq!(broken, 1.0);
    }

    #[test]
    fn cj_residual_examples() {
        let k = ks(p(1.0), INF, 2.5);
        assert_eq!(p(1.0).circle(1.0, 1.0).unwrap(), 3.0);
        assert!(k.cj_residual(1.0, 1.0).unwrap() < 1e-12);
        assert_eq!(ks(p(0.0), INF, 0.0).cj_residual(0.4, 9.0).unwrap(), 0.0);
        assert!(ks(INF, INF, 3.0).cj_residual(2.0, 5.0).unwrap() < 1e-12 * 1000.0);
        assert!(ks(p(1.0), p(1.0), 1.0).cj_residual(1.0, 1.0).is_err());
    }

    #[test]
    fn sigma_relation_examples() {
        let k = ks(p(1.0), p(1.0), 2.0);
        assert_eq!(k.eval(1.0).unwrap(), 3.0);
        assert!(k.sigma_relation_check(1.0).unwrap() < 1e-6);
        assert!(ks(p(0.0), p(0.0), 1.3).sigma_relation_check(0.8).unwrap() < 1e-6);
        assert!(ks(INF, p(1.0), 1.0).sigma_relation_check(2.0).unwrap() < 1e-6);
        assert!(matches!(
            ks(p(1.0), p(1.0), 0.0).sigma_relation_check(1.0),
            Err(Error::Degenerate(_))
        ));
        assert!(ks(p(1.0), INF, 1.0).sigma_relation_check(1.0).is_err());
    }

    #[test]
    fn triviality() {
        assert!(is_trivial(&[1.0, 1.0, 1.0, 1.0], 1e-9));
        assert!(is_trivial(&[0.0, 1.0, 0.0, 1.0], 1e-9));
        assert!(!is_trivial(&[1.0, 2.3, 4.0], 1e-9));
        assert!(!is_trivial(&[], 1e-9));
    }

    #[test]
    fn classification_of_corners() {
        assert_eq!(EquationClass::classify(p(0.0), p(0.0)), EquationClass::CfeAdditive);
        assert_eq!(EquationClass::classify(INF, INF), EquationClass::CfeMultiplicative);
        assert_eq!(EquationClass::classify(p(0.0), p(2.0)), EquationClass::Goldie);
        assert_eq!(EquationClass::classify(p(0.0), INF), EquationClass::Goldie);
        assert_eq!(EquationClass::classify(p(1.0), INF), EquationClass::Cj);
        assert_eq!(EquationClass::classify(p(1.0), p(0.5)), EquationClass::BgGeneral);
        assert_eq!(ks(INF, INF, 1.0).formula(), "t^kappa");
        assert_eq!(ks(p(0.0), p(0.0), 1.0).formula(), "kappa*t");
    }

    #[test]
    fn identity_maps_to_identity() {
        for r in [p(0.0), p(0.5), INF] {
            for s in [p(0.0), p(2.0), INF] {
                let k = ks(r, s, 1.3);
                assert_eq!(k.eval(r.identity()).unwrap(), s.identity());
            }
        }
    }

    #[test]
    fn monotone_for_positive_kappa_constant_for_zero() {
        for r in [p(0.0), p(1.0), INF] {
            for s in [p(0.0), p(1.0), INF] {
                let inc = ks(r, s, 1.5);
                let flat = ks(r, s, 0.0);
                let ts: Vec<f64> = (0..50).map(|i| r.group_exp(-2.0 + 0.08 * i as f64)).collect();
                for w in ts.windows(2) {
                    assert!(inc.eval(w[1]).unwrap() > inc.eval(w[0]).unwrap());
                    assert_eq!(flat.eval(w[1]).unwrap(), flat.eval(w[0]).unwrap());
                }
            }
        }
    }

    #[test]
    fn random_sweep_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sweep = sweep_cell(ks(p(0.5), p(2.0), -0.5), 200, &mut rng).unwrap();
        assert!(sweep.max_bg_residual < 1e-9);
        assert!(sweep.max_form_mismatch < 1e-12);
    }
}
