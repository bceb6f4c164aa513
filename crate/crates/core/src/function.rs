//! Real functions of one variable: a built-in analytic corpus and tabulated data.
//!
//! Built-ins are addressed by a small call syntax, e.g.
//! `pow_slowvar(1.7, log2)` or `spiked(decay(2, 1), 0.001, 100)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Slowly varying factors available to `pow_slowvar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlowVarying {
    One,
    Log,
    Log2,
    LogLog,
    ExpSqrtLog,
}

impl SlowVarying {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SlowVarying::One => 1.0,
            SlowVarying::Log => x.ln(),
            SlowVarying::Log2 => x.ln().powi(2),
            SlowVarying::LogLog => x.ln().ln(),
            SlowVarying::ExpSqrtLog => x.ln().sqrt().exp(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SlowVarying::One => "one",
            SlowVarying::Log => "log",
            SlowVarying::Log2 => "log2",
            SlowVarying::LogLog => "loglog",
            SlowVarying::ExpSqrtLog => "exp_sqrt_log",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "one" => SlowVarying::One,
            "log" => SlowVarying::Log,
            "log2" => SlowVarying::Log2,
            "loglog" => SlowVarying::LogLog,
            "exp_sqrt_log" => SlowVarying::ExpSqrtLog,
            _ => return None,
        })
    }
}

/// Piecewise-linear interpolant through sorted samples; undefined outside
/// the sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    xs: Vec<f64>,
    ys: Vec<f64>,
    source: String,
}

impl Tabulated {
    pub fn new(points: Vec<(f64, f64)>, source: impl Into<String>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InsufficientData("a tabulated function needs two points".into()));
        }
        for (i, w) in points.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidInput(format!(
                    "tabulated x values must be strictly increasing (row {})",
                    i + 2
                )));
            }
        }
        if let Some((x, y)) = points.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample ({x}, {y})")));
        }
        let (xs, ys) = points.into_iter().unzip();
        Ok(Self { xs, ys, source: source.into() })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if !(x >= self.xs[0] && x <= self.xs[n - 1]) {
            return f64::NAN;
        }
        let i = self.xs.partition_point(|&v| v <= x);
        if i == n {
            return self.ys[n - 1];
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        if x == x0 {
            return y0;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// A real function `f`, `φ`, `h` or `ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// `c`
    Const(f64),
    /// `x^κ ℓ(x)`
    PowSlowVar { kappa: f64, ell: SlowVarying },
    /// `(shift + x)^κ`
    ShiftedPow { shift: f64, kappa: f64 },
    /// `a + ρx`
    Affine { a: f64, rho: f64 },
    /// `√x`
    Sqrt,
    /// `log x`
    Log,
    /// `2 + sin x`
    SinOsc,
    /// `sin(log x)`
    SinLog,
    /// `x(2 + sin x)`
    XOsc,
    /// `limit + scale/x`
    Decay { limit: f64, scale: f64 },
    /// `g(x)(1 + sin(x)/log x)`
    OscPerturbed(Box<FunctionSpec>),
    /// `g` with a pseudo-random fraction of abscissae overwritten by `height`.
    Spiked { base: Box<FunctionSpec>, fraction: f64, height: f64, seed: u64 },
    Tabulated(Tabulated),
}

// splitmix64 finaliser
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic uniform in `[0, 1)` attached to the abscissa `x`.
pub fn spike_uniform(x: f64, seed: u64) -> f64 {
    (mix(x.to_bits() ^ mix(seed)) >> 11) as f64 / (1u64 << 53) as f64
}

impl FunctionSpec {
    /// Point evaluation; `NaN` where the function is undefined.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FunctionSpec::Const(c) => *c,
            FunctionSpec::PowSlowVar { kappa, ell } => x.powf(*kappa) * ell.eval(x),
            FunctionSpec::ShiftedPow { shift, kappa } => (shift + x).powf(*kappa),
            FunctionSpec::Affine { a, rho } => a + rho * x,
            FunctionSpec::Sqrt => x.sqrt(),
            FunctionSpec::Log => x.ln(),
            FunctionSpec::SinOsc => 2.0 + x.sin(),
            FunctionSpec::SinLog => x.ln().sin(),
            FunctionSpec::XOsc => x * (2.0 + x.sin()),
            FunctionSpec::Decay { limit, scale } => limit + scale / x,
            FunctionSpec::OscPerturbed(g) => g.eval(x) * (1.0 + x.sin() / x.ln()),
            FunctionSpec::Spiked { base, fraction, height, seed } => {
                if spike_uniform(x, *seed) < *fraction {
                    *height
                } else {
                    base.eval(x)
                }
            }
            FunctionSpec::Tabulated(t) => t.eval(x),
        }
    }

    /// Evaluation that rejects undefined or non-finite values.
    pub fn try_eval(&self, x: f64) -> Result<f64> {
        let y = self.eval(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Evaluation { what: self.to_string(), x })
        }
    }

    /// Sets the placement seed of every spike injection in the expression.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            FunctionSpec::Spiked { base, fraction, height, .. } => FunctionSpec::Spiked {
                base: Box::new(base.with_seed(seed)),
                fraction,
                height,
                seed,
            },
            FunctionSpec::OscPerturbed(g) => FunctionSpec::OscPerturbed(Box::new(g.with_seed(seed))),
            other => other,
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Const(c) => write!(f, "const({c})"),
            FunctionSpec::PowSlowVar { kappa, ell } => {
                write!(f, "pow_slowvar({kappa}, {})", ell.name())
            }
            FunctionSpec::ShiftedPow { shift, kappa } => write!(f, "shifted_pow({shift}, {kappa})"),
            FunctionSpec::Affine { a, rho } => write!(f, "affine_phi({a}, {rho})"),
            FunctionSpec::Sqrt => f.write_str("sqrt_phi"),
            FunctionSpec::Log => f.write_str("log"),
            FunctionSpec::SinOsc => f.write_str("sin_osc"),
            FunctionSpec::SinLog => f.write_str("sin_log"),
            FunctionSpec::XOsc => f.write_str("x_osc"),
            FunctionSpec::Decay { limit, scale } => write!(f, "decay({limit}, {scale})"),
            FunctionSpec::OscPerturbed(g) => write!(f, "osc_perturbed({g})"),
            FunctionSpec::Spiked { base, fraction, height, .. } => {
                write!(f, "spiked({base}, {fraction}, {height})")
            }
            FunctionSpec::Tabulated(t) => write!(f, "csv:{}", t.source),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Arg {
    Num(f64),
    Call(String, Vec<Arg>),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::InvalidInput(format!("{msg} at offset {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(&format!("expected {c:?}")))
        }
    }

    fn arg(&mut self) -> Result<Arg> {
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || "_.+-".contains(c)))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected a name or a number"));
        }
        let word = &rest[..len];
        self.pos += len;
        if let Ok(x) = word.parse::<f64>() {
            return Ok(Arg::Num(x));
        }
        let mut args = Vec::new();
        if self.peek() == Some('(') {
            self.expect('(')?;
            loop {
                self.skip_ws();
                args.push(self.arg()?);
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.err("expected ',' or ')'")),
                }
            }
        }
        Ok(Arg::Call(word.to_string(), args))
    }
}

fn num(args: &[Arg], i: usize, name: &str) -> Result<f64> {
    match args.get(i) {
        Some(Arg::Num(x)) => Ok(*x),
        _ => Err(Error::InvalidInput(format!("{name}: argument {} must be a number", i + 1))),
    }
}

fn arity(args: &[Arg], n: usize, name: &str) -> Result<()> {
    if args.len() == n {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} takes {n} argument(s), got {}", args.len())))
    }
}

fn build(arg: Arg) -> Result<FunctionSpec> {
    let (name, args) = match arg {
        Arg::Num(c) => return Ok(FunctionSpec::Const(c)),
        Arg::Call(name, args) => (name, args),
    };
    let n = name.as_str();
    let spec = match n {
        "const" => {
            arity(&args, 1, n)?;
            FunctionSpec::Const(num(&args, 0, n)?)
        }
        "pow_slowvar" => {
            arity(&args, 2, n)?;
            let ell = match &args[1] {
                Arg::Call(l, a) if a.is_empty() => SlowVarying::from_name(l),
                _ => None,
            }
            .ok_or_else(|| Error::InvalidInput(format!("{n}: unknown slowly varying factor")))?;
            FunctionSpec::PowSlowVar { kappa: num(&args, 0, n)?, ell }
        }
        "shifted_pow" => {
            arity(&args, 2, n)?;
            FunctionSpec::ShiftedPow { shift: num(&args, 0, n)?, kappa: num(&args, 1, n)? }
        }
        "affine_phi" | "affine" => {
            arity(&args, 2, n)?;
            FunctionSpec::Affine { a: num(&args, 0, n)?, rho: num(&args, 1, n)? }
        }
        "decay" => {
            arity(&args, 2, n)?;
            FunctionSpec::Decay { limit: num(&args, 0, n)?, scale: num(&args, 1, n)? }
        }
        "identity" => {
            arity(&args, 0, n)?;
            FunctionSpec::PowSlowVar { kappa: 1.0, ell: SlowVarying::One }
        }
        "sqrt_phi" | "sqrt" => {
            arity(&args, 0, n)?;
            FunctionSpec::Sqrt
        }
        "log" => {
            arity(&args, 0, n)?;
            FunctionSpec::Log
        }
        "sin_osc" => {
            arity(&args, 0, n)?;
            FunctionSpec::SinOsc
        }
        "sin_log" => {
            arity(&args, 0, n)?;
            FunctionSpec::SinLog
        }
        "x_osc" => {
            arity(&args, 0, n)?;
            FunctionSpec::XOsc
        }
        "osc_perturbed" => {
            arity(&args, 1, n)?;
            let inner = args.into_iter().next().expect("arity checked");
            FunctionSpec::OscPerturbed(Box::new(build(inner)?))
        }
        "spiked" => {
            arity(&args, 3, n)?;
            let fraction = num(&args, 1, n)?;
            let height = num(&args, 2, n)?;
            if !(0.0..=1.0).contains(&fraction) {
                return Err(Error::InvalidInput(format!("spiked: fraction {fraction} not in [0, 1]")));
            }
            let base = build(args.into_iter().next().expect("arity checked"))?;
            FunctionSpec::Spiked { base: Box::new(base), fraction, height, seed: 0 }
        }
        other => return Err(Error::InvalidInput(format!("unknown function {other:?}"))),
    };
    Ok(spec)
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        p.skip_ws();
        let arg = p.arg()?;
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        build(arg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_builtins() {
        let f: FunctionSpec = "pow_slowvar(1.7, log2)".parse().unwrap();
        assert_eq!(f, FunctionSpec::PowSlowVar { kappa: 1.7, ell: SlowVarying::Log2 });
        let x = 1e3f64;
        assert!((f.eval(x) - x.powf(1.7) * x.ln().powi(2)).abs() < 1e-9 * f.eval(x));
        assert_eq!("const(2.5)".parse::<FunctionSpec>().unwrap().eval(9.0), 2.5);
        assert_eq!("affine_phi(3, 0.5)".parse::<FunctionSpec>().unwrap().eval(4.0), 5.0);
        assert_eq!("sqrt_phi".parse::<FunctionSpec>().unwrap().eval(16.0), 4.0);
        assert_eq!("shifted_pow(1, 2)".parse::<FunctionSpec>().unwrap().eval(2.0), 9.0);
        assert_eq!("decay(2, 1)".parse::<FunctionSpec>().unwrap().eval(4.0), 2.25);
        assert_eq!(" sin_osc ".parse::<FunctionSpec>().unwrap().eval(0.0), 2.0);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "nope", "pow_slowvar(1.7)", "pow_slowvar(1.7, cubic)", "const(1", "log(2)", "spiked(log, 2, 1)", "const(1) x"] {
            assert!(bad.parse::<FunctionSpec>().is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn display_round_trips() {
        for src in ["pow_slowvar(1.7, log2)", "spiked(decay(2, 1), 0.001, 100)", "osc_perturbed(shifted_pow(1, 2.5))", "sqrt_phi", "affine_phi(3, 0.5)"] {
            let f: FunctionSpec = src.parse().unwrap();
            assert_eq!(f.to_string(), src);
            assert_eq!(f.to_string().parse::<FunctionSpec>().unwrap(), f);
        }
    }

    #[test]
    fn spikes_hit_about_the_requested_fraction() {
        let f: FunctionSpec = "spiked(const(2), 0.01, 100)".parse::<FunctionSpec>().unwrap().with_seed(42);
        let hits = (1..=100_000).filter(|&i| f.eval(i as f64) == 100.0).count();
        assert!((800..1200).contains(&hits), "{hits}");
        // same seed, same placement
        let g = f.clone().with_seed(42);
        assert!((1..1000).all(|i| f.eval(i as f64) == g.eval(i as f64)));
    }

    #[test]
    fn tabulated_interpolation() {
        let t = Tabulated::new(vec![(1.0, 2.0), (2.0, 4.0), (4.0, 0.0)], "mem").unwrap();
        assert_eq!(t.eval(1.5), 3.0);
        assert_eq!(t.eval(3.0), 2.0);
        assert_eq!(t.eval(4.0), 0.0);
        assert_eq!(t.eval(1.0), 2.0);
        assert!(t.eval(0.5).is_nan());
        assert!(Tabulated::new(vec![(1.0, 2.0), (1.0, 3.0)], "dup").is_err());
        let f = FunctionSpec::Tabulated(t);
        assert!(f.try_eval(10.0).is_err());
    }
}
