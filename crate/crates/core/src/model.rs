//! Problem definitions: the Kirchhoff coefficient `b`, the potential `V`, the
//! nonlinearity `f` with its primitive `F`, and the shift `V₀` that makes
//! `Ṽ = V + V₀ ≥ 1`.
//!
//! Shifting replaces `(V, f, F)` by `(V + V₀, f + V₀u, F + V₀u²/2)`. The
//! energy is unchanged because the two `V₀u²/2` contributions cancel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of R³.
pub type Point = [f64; 3];

pub fn norm(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Piecewise-linear radial table with constant extension past both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl Table {
    pub fn validate(&self, what: &str) -> Result<()> {
        if self.radii.is_empty() || self.radii.len() != self.values.len() {
            return Err(Error::Config(format!(
                "{what}: table needs matching, non-empty radii and values"
            )));
        }
        if !self.radii.windows(2).all(|w| w[0] < w[1]) || self.radii[0] < 0.0 {
            return Err(Error::Config(format!(
                "{what}: table radii must be nonnegative and strictly increasing"
            )));
        }
        if !self.values.iter().all(|v| v.is_finite()) {
            return Err(Error::Config(format!("{what}: table values must be finite")));
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        let idx = self.radii.partition_point(|&x| x <= r);
        if idx == 0 {
            return self.values[0];
        }
        if idx == self.radii.len() {
            return *self.values.last().unwrap();
        }
        let (r0, r1) = (self.radii[idx - 1], self.radii[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        v0 + (v1 - v0) * (r - r0) / (r1 - r0)
    }

    fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Potential {
    /// Oscillating radial potential with minima `a0` at the integer radii.
    Zigzag { a0: f64 },
    Constant { value: f64 },
    Tabulated(Table),
}

impl Potential {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Potential::Zigzag { a0 } => eval_zigzag(r, *a0),
            Potential::Constant { value } => *value,
            Potential::Tabulated(t) => t.eval(r),
        }
    }

    pub fn eval_at(&self, x: &Point) -> f64 {
        self.eval(norm(x))
    }

    /// `inf_r V(r)`; exact for every variant.
    pub fn infimum(&self) -> f64 {
        match self {
            // attained at r = 0 and at every integer radius
            Potential::Zigzag { a0 } => *a0,
            Potential::Constant { value } => *value,
            Potential::Tabulated(t) => t.min_value(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Potential::Zigzag { a0 } if !a0.is_finite() => {
                Err(Error::Config("zigzag offset a0 must be finite".into()))
            }
            Potential::Constant { value } if !value.is_finite() => {
                Err(Error::Config("constant potential must be finite".into()))
            }
            Potential::Tabulated(t) => t.validate("potential"),
            _ => Ok(()),
        }
    }
}

/// Zigzag potential in `|x|`: on the `n`-th tooth `n-1 ≤ r ≤ n` it rises with
/// slope `2n` from `a0` to `n + a0` at `r = (2n-1)/2`, then falls back to `a0`.
pub fn eval_zigzag(r: f64, a0: f64) -> f64 {
    let n = r.max(1.0).ceil();
    if r <= (2.0 * n - 1.0) / 2.0 {
        2.0 * n * r - 2.0 * n * (n - 1.0) + a0
    } else {
        -2.0 * n * r + 2.0 * n * n + a0
    }
}

/// Radial amplitude `a(|x|)` of the Kirchhoff example nonlinearity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum Amplitude {
    Constant(f64),
    Tabulated(Table),
}

impl Default for Amplitude {
    fn default() -> Self {
        Amplitude::Constant(1.0)
    }
}

impl Amplitude {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Amplitude::Constant(a) => *a,
            Amplitude::Tabulated(t) => t.eval(r),
        }
    }

    /// Requires `0 < inf a ≤ sup a < ∞`.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = match self {
            Amplitude::Constant(a) => (*a, *a),
            Amplitude::Tabulated(t) => {
                t.validate("amplitude")?;
                (t.min_value(), t.max_value())
            }
        };
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(Error::Config(format!(
                "amplitude must satisfy 0 < inf a <= sup a < inf, got [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// `a (4u⁴ + 2u² sin u − 4u cos u)`.
pub fn eval_example_f(a: f64, u: f64) -> f64 {
    a * (4.0 * u.powi(4) + 2.0 * u * u * u.sin() - 4.0 * u * u.cos())
}

/// `a ((4/5)u⁵ − 2u² cos u)`, the primitive of [`eval_example_f`] vanishing at 0.
pub fn eval_example_primitive(a: f64, u: f64) -> f64 {
    a * (0.8 * u.powi(5) - 2.0 * u * u * u.cos())
}

/// `sin(x₁) ln(1 + |u|) u²`.
pub fn eval_ar_violator(u: f64, x1: f64) -> f64 {
    x1.sin() * u.abs().ln_1p() * u * u
}

/// `∫₀^u ln(1+|s|) s² ds`, an odd function of `u`.
fn log_square_primitive(u: f64) -> f64 {
    let s = u.abs();
    let l = s.ln_1p();
    let g = s.powi(3) / 3.0 * l - (s.powi(3) / 3.0 - s * s / 2.0 + s - l) / 3.0;
    g.copysign(u)
}

/// Smooth cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`, C^∞ in between.
pub fn cutoff(s: f64) -> f64 {
    cutoff_with_derivative(s).0
}

fn cutoff_with_derivative(s: f64) -> (f64, f64) {
    if s <= 1.0 {
        return (1.0, 0.0);
    }
    if s >= 2.0 {
        return (0.0, 0.0);
    }
    let bump = |t: f64| (-1.0 / t).exp();
    let (ta, tb) = (2.0 - s, s - 1.0);
    let (a, b) = (bump(ta), bump(tb));
    let (da, db) = (-a / (ta * ta), b / (tb * tb));
    let sum = a + b;
    (a / sum, (da * b - a * db) / (sum * sum))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Nonlinearity {
    /// `f ≡ 0`.
    Zero,
    /// `a(|x|) (4u⁴ + 2u² sin u − 4u cos u)`.
    KirchhoffExample {
        #[serde(default)]
        amplitude: Amplitude,
    },
    /// `sin(x₁) ln(1+|u|) u²`; not radial, checkers only.
    ArViolator,
    /// Primitive `c3 χ(|x|) |u|^tau φ(|u|) + u⁴` with `φ` the smooth cutoff and
    /// `χ` the cutoff rescaled to `support` (identically 1 when unset).
    SublinearOrigin {
        c3: f64,
        tau: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        support: Option<f64>,
    },
    /// `coefficient |u|^(exponent-2) u`, primitive `coefficient |u|^exponent / exponent`.
    Power { coefficient: f64, exponent: f64 },
    Sum { terms: Vec<Nonlinearity> },
}

impl Nonlinearity {
    pub fn f(&self, x: &Point, u: f64) -> f64 {
        match self {
            Nonlinearity::ArViolator => eval_ar_violator(u, x[0]),
            Nonlinearity::Sum { terms } => terms.iter().map(|t| t.f(x, u)).sum(),
            _ => self.f_radial(norm(x), u),
        }
    }

    pub fn primitive(&self, x: &Point, u: f64) -> f64 {
        match self {
            Nonlinearity::ArViolator => x[0].sin() * log_square_primitive(u),
            Nonlinearity::Sum { terms } => terms.iter().map(|t| t.primitive(x, u)).sum(),
            _ => self.primitive_radial(norm(x), u),
        }
    }

    /// `f` for radial nonlinearities. Panics on [`Nonlinearity::ArViolator`].
    pub fn f_radial(&self, r: f64, u: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::KirchhoffExample { amplitude } => eval_example_f(amplitude.eval(r), u),
            Nonlinearity::ArViolator => panic!("ar-violator is not radial"),
            Nonlinearity::SublinearOrigin { c3, tau, support } => {
                let s = u.abs();
                let weight = c3 * spatial_weight(*support, r);
                let sub = if s == 0.0 || weight == 0.0 {
                    0.0
                } else {
                    let (phi, dphi) = cutoff_with_derivative(s);
                    weight * (tau * s.powf(tau - 1.0) * phi + s.powf(*tau) * dphi)
                };
                sub * u.signum() + 4.0 * u * u * u
            }
            Nonlinearity::Power {
                coefficient,
                exponent,
            } => coefficient * u.abs().powf(exponent - 2.0) * u,
            Nonlinearity::Sum { terms } => terms.iter().map(|t| t.f_radial(r, u)).sum(),
        }
    }

    pub fn primitive_radial(&self, r: f64, u: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::KirchhoffExample { amplitude } => {
                eval_example_primitive(amplitude.eval(r), u)
            }
            Nonlinearity::ArViolator => panic!("ar-violator is not radial"),
            Nonlinearity::SublinearOrigin { c3, tau, support } => {
                let s = u.abs();
                c3 * spatial_weight(*support, r) * s.powf(*tau) * cutoff(s) + u.powi(4)
            }
            Nonlinearity::Power {
                coefficient,
                exponent,
            } => coefficient * u.abs().powf(*exponent) / exponent,
            Nonlinearity::Sum { terms } => terms.iter().map(|t| t.primitive_radial(r, u)).sum(),
        }
    }

    pub fn is_radial(&self) -> bool {
        match self {
            Nonlinearity::ArViolator => false,
            Nonlinearity::Sum { terms } => terms.iter().all(Nonlinearity::is_radial),
            _ => true,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Nonlinearity::Zero => "zero".into(),
            Nonlinearity::KirchhoffExample { .. } => "kirchhoff-example".into(),
            Nonlinearity::ArViolator => "ar-violator".into(),
            Nonlinearity::SublinearOrigin { .. } => "sublinear-origin".into(),
            Nonlinearity::Power { exponent, .. } => format!("power({exponent})"),
            Nonlinearity::Sum { terms } => terms
                .iter()
                .map(Nonlinearity::label)
                .collect::<Vec<_>>()
                .join("+"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Nonlinearity::KirchhoffExample { amplitude } => amplitude.validate(),
            Nonlinearity::SublinearOrigin { c3, tau, support } => {
                if !(*c3 >= 0.0) || !c3.is_finite() {
                    return Err(Error::Config(format!("sublinear-origin: c3 must be >= 0, got {c3}")));
                }
                if !(*tau > 0.0 && *tau < 2.0) {
                    return Err(Error::Config(format!(
                        "sublinear-origin: tau must lie in (0, 2), got {tau}"
                    )));
                }
                if let Some(s) = support {
                    if !(*s > 0.0) || !s.is_finite() {
                        return Err(Error::Config(format!(
                            "sublinear-origin: support must be positive, got {s}"
                        )));
                    }
                }
                Ok(())
            }
            Nonlinearity::Power {
                coefficient,
                exponent,
            } => {
                if !coefficient.is_finite() || !(*exponent >= 2.0) || !exponent.is_finite() {
                    return Err(Error::Config(format!(
                        "power: need finite coefficient and exponent >= 2, got ({coefficient}, {exponent})"
                    )));
                }
                Ok(())
            }
            Nonlinearity::Sum { terms } => terms.iter().try_for_each(Nonlinearity::validate),
            _ => Ok(()),
        }
    }
}

/// `χ(r)`: 1 everywhere without a support radius, else the cutoff scaled so
/// that it equals 1 on `[0, support]` and vanishes beyond `2 support`.
fn spatial_weight(support: Option<f64>, r: f64) -> f64 {
    match support {
        None => 1.0,
        Some(s) => cutoff(r / s),
    }
}

/// Pointwise access to `f(x, u)` and `F(x, u)`; what the checkers consume.
pub trait Pointwise: Sync {
    fn f(&self, x: &Point, u: f64) -> f64;
    fn primitive(&self, x: &Point, u: f64) -> f64;
    fn label(&self) -> String;
}

impl Pointwise for Nonlinearity {
    fn f(&self, x: &Point, u: f64) -> f64 {
        Nonlinearity::f(self, x, u)
    }

    fn primitive(&self, x: &Point, u: f64) -> f64 {
        Nonlinearity::primitive(self, x, u)
    }

    fn label(&self) -> String {
        Nonlinearity::label(self)
    }
}

/// `f̃ = f + V₀u`, `F̃ = F + V₀u²/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shifted {
    pub base: Nonlinearity,
    pub shift: f64,
}

impl Pointwise for Shifted {
    fn f(&self, x: &Point, u: f64) -> f64 {
        self.base.f(x, u) + self.shift * u
    }

    fn primitive(&self, x: &Point, u: f64) -> f64 {
        self.base.primitive(x, u) + 0.5 * self.shift * u * u
    }

    fn label(&self) -> String {
        if self.shift == 0.0 {
            self.base.label()
        } else {
            format!("{}+{}u", self.base.label(), self.shift)
        }
    }
}

/// A pair of closures; handy for ad-hoc nonlinearities in checks and tests.
pub struct FnPointwise<F, P> {
    pub name: String,
    pub f: F,
    pub primitive: P,
}

impl<F, P> FnPointwise<F, P> {
    pub fn new(name: &str, f: F, primitive: P) -> Self {
        Self {
            name: name.to_string(),
            f,
            primitive,
        }
    }
}

impl<F, P> Pointwise for FnPointwise<F, P>
where
    F: Fn(&Point, f64) -> f64 + Sync,
    P: Fn(&Point, f64) -> f64 + Sync,
{
    fn f(&self, x: &Point, u: f64) -> f64 {
        (self.f)(x, u)
    }

    fn primitive(&self, x: &Point, u: f64) -> f64 {
        (self.primitive)(x, u)
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub b: f64,
    pub potential: Potential,
    pub nonlinearity: Nonlinearity,
    /// Requested shift; auto-selected by [`ProblemSpec::shifted`] when `None`.
    pub v0: Option<f64>,
    /// Shift currently folded into the evaluators (0 for an unshifted spec).
    #[serde(default)]
    pub applied_shift: f64,
}

impl ProblemSpec {
    pub fn new(b: f64, potential: Potential, nonlinearity: Nonlinearity) -> Self {
        Self {
            b,
            potential,
            nonlinearity,
            v0: None,
            applied_shift: 0.0,
        }
    }

    pub fn with_v0(mut self, v0: f64) -> Self {
        self.v0 = Some(v0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        // b = 0 is the local (semilinear) limit, kept for benchmarking
        if !(self.b >= 0.0) || !self.b.is_finite() {
            return Err(Error::Config(format!("Kirchhoff coefficient b must be nonnegative, got {}", self.b)));
        }
        self.potential.validate()?;
        self.nonlinearity.validate()?;
        if let Some(v0) = self.v0 {
            if !(v0 >= 0.0) || !v0.is_finite() {
                return Err(Error::Config(format!("shift V0 must be nonnegative, got {v0}")));
            }
        }
        Ok(())
    }

    /// The shift that would be applied: the requested `V₀`, or
    /// `max(0, 1 − inf V)`.
    pub fn shift_constant(&self) -> f64 {
        self.v0
            .unwrap_or_else(|| (1.0 - self.potential.infimum()).max(0.0))
    }

    /// Returns the equivalent problem with `Ṽ = V + V₀`, `f̃ = f + V₀u`.
    /// Idempotent: an already shifted spec is returned unchanged.
    pub fn shifted(&self) -> ProblemSpec {
        let mut out = self.clone();
        out.applied_shift = self.shift_constant();
        out.v0 = Some(out.applied_shift);
        out
    }

    pub fn vtilde(&self, r: f64) -> f64 {
        self.potential.eval(r) + self.applied_shift
    }

    pub fn ftilde(&self, r: f64, u: f64) -> f64 {
        self.nonlinearity.f_radial(r, u) + self.applied_shift * u
    }

    pub fn primitive_tilde(&self, r: f64, u: f64) -> f64 {
        self.nonlinearity.primitive_radial(r, u) + 0.5 * self.applied_shift * u * u
    }

    pub fn shifted_nonlinearity(&self) -> Shifted {
        Shifted {
            base: self.nonlinearity.clone(),
            shift: self.applied_shift,
        }
    }
}
