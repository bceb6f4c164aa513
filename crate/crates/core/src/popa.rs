//! Popa circle groups `G*_η` for the Gołąb–Schinzel solutions `η_ρ(t) = 1 + ρt`.
//!
//! For finite `ρ ≥ 0` the operation is `s ∘_ρ t = s + t·η_ρ(s)` on the
//! half-line `(−1/ρ, ∞)` (all of ℝ when `ρ = 0`). The value `ρ = ∞` is a
//! separate state: the group is `(0, ∞)` under multiplication and `η_∞(t) = t`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rho {
    Finite(f64),
    Infinite,
}

/// Extended parameter `ρ ∈ [0, ∞]` selecting `η_ρ` and the operation `∘_ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopaParam(Rho);

impl PopaParam {
    /// `ρ = 0`: the additive group `(ℝ, +)`.
    pub const ZERO: PopaParam = PopaParam(Rho::Finite(0.0));
    /// `ρ = ∞`: the multiplicative group `((0, ∞), ·)`.
    pub const INFINITY: PopaParam = PopaParam(Rho::Infinite);

    /// Finite parameter; `f64::INFINITY` is mapped to [`PopaParam::INFINITY`].
    pub fn new(rho: f64) -> Result<Self> {
        if rho == f64::INFINITY {
            return Ok(Self::INFINITY);
        }
        if !rho.is_finite() || rho < 0.0 {
            return Err(Error::InvalidInput(format!(
                "Popa parameter must lie in [0, inf], got {rho}"
            )));
        }
        // normalise -0.0
        Ok(PopaParam(Rho::Finite(rho.abs())))
    }

    /// The finite value of `ρ`, or `None` for `ρ = ∞`.
    pub fn rho(&self) -> Option<f64> {
        match self.0 {
            Rho::Finite(r) => Some(r),
            Rho::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.0, Rho::Infinite)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Rho::Finite(r) if r == 0.0)
    }

    /// Left end of the group domain: `−1/ρ`, `−∞` for `ρ = 0`, `0` for `ρ = ∞`.
    pub fn boundary(&self) -> f64 {
        match self.0 {
            Rho::Finite(0.0) => f64::NEG_INFINITY,
            Rho::Finite(r) => -1.0 / r,
            Rho::Infinite => 0.0,
        }
    }

    /// Neutral element: 0 for finite `ρ`, 1 for `ρ = ∞`.
    pub fn identity(&self) -> f64 {
        match self.0 {
            Rho::Finite(_) => 0.0,
            Rho::Infinite => 1.0,
        }
    }

    /// Membership in the positive branch `{x : η_ρ(x) > 0}`.
    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && x > self.boundary()
    }

    fn check(&self, what: &'static str, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain { what, value: x })
        }
    }

    /// `η_ρ(t) = 1 + ρt`; `η_∞(t) = t` for `t > 0`.
    pub fn eta(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::Domain { what: "eta", value: t });
        }
        match self.0 {
            Rho::Finite(r) => Ok(1.0 + r * t),
            Rho::Infinite if t > 0.0 => Ok(t),
            Rho::Infinite => Err(Error::Domain { what: "eta", value: t }),
        }
    }

    /// Inverse of `η_ρ` as a map onto the group domain.
    pub fn eta_inverse(&self, y: f64) -> Result<f64> {
        match self.0 {
            Rho::Finite(0.0) => Err(Error::Degenerate(
                "eta_0 is constant and has no inverse".into(),
            )),
            Rho::Finite(r) => Ok((y - 1.0) / r),
            Rho::Infinite => Ok(y),
        }
    }

    /// The circle operation `s ∘_ρ t`.
    pub fn circle(&self, s: f64, t: f64) -> Result<f64> {
        self.check("circle", s)?;
        self.check("circle", t)?;
        Ok(self.circle_unchecked(s, t))
    }

    #[inline]
    pub(crate) fn circle_unchecked(&self, s: f64, t: f64) -> f64 {
        match self.0 {
            Rho::Finite(r) => s + t * (1.0 + r * s),
            Rho::Infinite => s * t,
        }
    }

    /// Group inverse: `−x/(1+ρx)`, or `1/x` for `ρ = ∞`.
    pub fn inverse(&self, x: f64) -> Result<f64> {
        if x == self.boundary() {
            return Err(Error::Singular { what: "inverse", value: x });
        }
        self.check("inverse", x)?;
        match self.0 {
            Rho::Finite(r) => Ok(-x / (1.0 + r * x)),
            Rho::Infinite => Ok(1.0 / x),
        }
    }

    /// `|η(s ∘ t) − η(s)·η(t)|`.
    pub fn gs_residual(&self, s: f64, t: f64) -> Result<f64> {
        let lhs = self.eta(self.circle(s, t)?)?;
        let rhs = self.eta(s)? * self.eta(t)?;
        Ok((lhs - rhs).abs())
    }

    /// Isomorphism of the group onto `(ℝ, +)` in the normalisation of the
    /// kernel table: `t`, `ln(1+ρt)`, `ln t` for `ρ = 0`, finite, `∞`.
    pub fn group_log(&self, t: f64) -> Result<f64> {
        self.check("group_log", t)?;
        Ok(match self.0 {
            Rho::Finite(0.0) => t,
            Rho::Finite(r) => (r * t).ln_1p(),
            Rho::Infinite => t.ln(),
        })
    }

    /// Inverse of [`PopaParam::group_log`].
    pub fn group_exp(&self, z: f64) -> f64 {
        match self.0 {
            Rho::Finite(0.0) => z,
            Rho::Finite(r) => z.exp_m1() / r,
            Rho::Infinite => z.exp(),
        }
    }
}

impl fmt::Display for PopaParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Rho::Finite(r) => write!(f, "{r}"),
            Rho::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for PopaParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" | "Inf" => Ok(Self::INFINITY),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad Popa parameter {other:?}")))
                .and_then(Self::new),
        }
    }
}

impl Serialize for PopaParam {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Rho::Finite(r) => serializer.serialize_f64(r),
            Rho::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PopaParam {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Num(x) => PopaParam::new(x),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// An element of the positive branch of `G*_η` for a fixed parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    value: f64,
    param: PopaParam,
}

impl GroupElement {
    pub fn new(param: PopaParam, value: f64) -> Result<Self> {
        param.check("group element", value)?;
        Ok(Self { value, param })
    }

    pub fn identity(param: PopaParam) -> Self {
        Self { value: param.identity(), param }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn param(&self) -> PopaParam {
        self.param
    }

    pub fn compose(&self, other: &GroupElement) -> Result<Self> {
        if self.param != other.param {
            return Err(Error::InvalidInput(format!(
                "cannot compose elements of groups {} and {}",
                self.param, other.param
            )));
        }
        Ok(Self { value: self.param.circle(self.value, other.value)?, param: self.param })
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self { value: self.param.inverse(self.value)?, param: self.param })
    }
}

/// Worst relative residuals of the group laws over random triples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LawSweep {
    pub param: PopaParam,
    pub trials: usize,
    pub associativity: f64,
    pub commutativity: f64,
    pub identity: f64,
    pub inverse: f64,
    pub golab_schinzel: f64,
}

impl LawSweep {
    pub fn worst(&self) -> f64 {
        [self.associativity, self.commutativity, self.identity, self.inverse, self.golab_schinzel]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Samples triples with group-log coordinates uniform in `[−spread, spread]`.
pub fn law_sweep<R: Rng + ?Sized>(param: PopaParam, trials: usize, spread: f64, rng: &mut R) -> Result<LawSweep> {
    let mut out = LawSweep {
        param,
        trials,
        associativity: 0.0,
        commutativity: 0.0,
        identity: 0.0,
        inverse: 0.0,
        golab_schinzel: 0.0,
    };
    let e = param.identity();
    for _ in 0..trials {
        let [a, b, c] = [(); 3].map(|_| param.group_exp(rng.gen_range(-spread..=spread)));
        let ab = param.circle(a, b)?;
        out.associativity = out.associativity.max(rel(param.circle(ab, c)?, param.circle(a, param.circle(b, c)?)?));
        out.commutativity = out.commutativity.max(rel(ab, param.circle(b, a)?));
        out.identity = out.identity.max(rel(param.circle(a, e)?, a).max(rel(param.circle(e, a)?, a)));
        out.inverse = out.inverse.max(rel(param.circle(a, param.inverse(a)?)?, e));
        let lhs = param.eta(ab)?;
        out.golab_schinzel = out.golab_schinzel.max(param.gs_residual(a, b)? / lhs.abs().max(1.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: f64) -> PopaParam {
        PopaParam::new(r).unwrap()
    }

    #[test]
    fn law_sweep_is_clean() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for param in [PopaParam::ZERO, p(0.5), PopaParam::INFINITY] {
            let sweep = law_sweep(param, 500, 3.0, &mut rng).unwrap();
            assert!(sweep.worst() < 1e-12, "{sweep:?}");
        }
    }

    #[test]
    fn eta_examples() {
        assert_eq!(p(0.0).eta(7.3).unwrap(), 1.0);
        assert_eq!(p(1.0).eta(2.0).unwrap(), 3.0);
        assert_eq!(p(0.5).eta(-2.0).unwrap(), 0.0);
        assert_eq!(PopaParam::INFINITY.eta(4.0).unwrap(), 4.0);
        assert!(matches!(PopaParam::INFINITY.eta(0.0), Err(Error::Domain { .. })));
        assert!(matches!(PopaParam::INFINITY.eta(-1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn circle_examples() {
        assert_eq!(p(0.0).circle(2.0, 5.0).unwrap(), 7.0);
        assert_eq!(p(1.0).circle(2.0, 3.0).unwrap(), 11.0);
        assert_eq!(p(1.0).circle(2.0, 3.0).unwrap(), (1.0 + 2.0) * (1.0 + 3.0) - 1.0);
        assert_eq!(PopaParam::INFINITY.circle(2.0, 3.0).unwrap(), 6.0);
        assert!(p(1.0).circle(-1.5, 0.0).is_err());
        assert!(PopaParam::INFINITY.circle(-2.0, 3.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(p(0.0).inverse(4.0).unwrap(), -4.0);
        let inv = p(1.0).inverse(1.0).unwrap();
        assert_eq!(inv, -0.5);
        assert_eq!(p(1.0).circle(1.0, inv).unwrap(), 0.0);
        assert_eq!(PopaParam::INFINITY.inverse(4.0).unwrap(), 0.25);
        assert!(matches!(p(0.5).inverse(-2.0), Err(Error::Singular { .. })));
        assert!(matches!(PopaParam::INFINITY.inverse(0.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn gs_residual_examples() {
        assert_eq!(p(1.0).gs_residual(2.0, 3.0).unwrap(), 0.0);
        assert_eq!(p(0.0).gs_residual(-3.1, 8.2).unwrap(), 0.0);
        assert_eq!(p(0.5).gs_residual(1.0, 4.0).unwrap(), 0.0);
        assert_eq!(p(0.5).circle(1.0, 4.0).unwrap(), 7.0);
    }

    #[test]
    fn boundary_conventions() {
        assert_eq!(p(0.0).boundary(), f64::NEG_INFINITY);
        assert_eq!(p(2.0).boundary(), -0.5);
        assert_eq!(PopaParam::INFINITY.boundary(), 0.0);
        assert!(PopaParam::new(-1.0).is_err());
        assert!(PopaParam::new(f64::NAN).is_err());
        assert_eq!(PopaParam::new(f64::INFINITY).unwrap(), PopaParam::INFINITY);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("inf".parse::<PopaParam>().unwrap(), PopaParam::INFINITY);
        assert_eq!("0.5".parse::<PopaParam>().unwrap(), p(0.5));
        assert!("-2".parse::<PopaParam>().is_err());
        assert_eq!(PopaParam::INFINITY.to_string(), "inf");
    }

    #[test]
    fn group_log_is_a_homomorphism() {
        for param in [p(0.0), p(0.5), p(2.0), PopaParam::INFINITY] {
            let (a, b) = (param.group_exp(0.3), param.group_exp(-0.7));
            let lhs = param.group_log(param.circle(a, b).unwrap()).unwrap();
            assert!((lhs - (-0.4)).abs() < 1e-14, "{param}: {lhs}");
        }
    }

    #[test]
    fn group_elements() {
        let a = GroupElement::new(p(1.0), 2.0).unwrap();
        let b = GroupElement::new(p(1.0), 3.0).unwrap();
        assert_eq!(a.compose(&b).unwrap().value(), 11.0);
        assert_eq!(a.compose(&a.inverse().unwrap()).unwrap().value(), 0.0);
        assert!(GroupElement::new(p(1.0), -1.0).is_err());
        let c = GroupElement::new(PopaParam::INFINITY, 3.0).unwrap();
        assert!(a.compose(&c).is_err());
        assert_eq!(GroupElement::identity(PopaParam::INFINITY).value(), 1.0);
    }
}
