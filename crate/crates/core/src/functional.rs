//! The energy
//!
//! ```text
//! I(u) = ½∫(|∇u|² + Ṽu²) + (b/4)(∫|∇u|²)² − ∫F̃(x, u)
//! ```
//!
//! its derivative, the Riesz representative in the H inner product
//! `(u, v)_H = ∫ ∇u·∇v + Ṽuv`, and the dual norm / Cerami diagnostics.
//!
//! The discrete derivative is the exact gradient of the discrete energy, so
//! finite differences of [`Functional::energy`] agree with
//! [`Functional::derivative`] up to truncation and rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{check_shifted, Field, RadialGrid};
use crate::linalg::{BandCholesky, SymBand};
use crate::model::{Point, Pointwise, ProblemSpec};

/// A functional on a finite-dimensional Hilbert space; what the solvers see.
pub trait Landscape {
    fn dim(&self) -> usize;
    fn value(&self, u: &[f64]) -> f64;
    /// Coefficients `⟨I'(u), e_j⟩` of the derivative on the basis directions.
    fn derivative(&self, u: &[f64]) -> Vec<f64>;
    /// The vector `g` with `(g, v)_H = derivativeᵀ v` for all `v`.
    fn riesz(&self, derivative: &[f64]) -> Vec<f64>;
    fn inner(&self, u: &[f64], v: &[f64]) -> f64;

    fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }

    /// `value(v) − value(u)`; implementors may avoid the cancellation of the
    /// naive difference when `v` is close to `u`.
    fn value_difference(&self, u: &[f64], v: &[f64]) -> f64 {
        self.value(v) - self.value(u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// `½∫|∇u|²`
    pub dirichlet: f64,
    /// `½∫Ṽu²`
    pub potential: f64,
    /// `(b/4)(∫|∇u|²)²`
    pub kirchhoff: f64,
    /// `∫F̃(x, u)`
    pub nonlinear: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(dirichlet: f64, potential: f64, kirchhoff: f64, nonlinear: f64) -> Self {
        Self {
            dirichlet,
            potential,
            kirchhoff,
            nonlinear,
            total: dirichlet + potential + kirchhoff - nonlinear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    #[serde(skip)]
    pub riesz: Vec<f64>,
    /// `‖I'(u)‖_{H*} = ‖riesz‖_H`
    pub dual_norm: f64,
    /// `(1 + ‖u‖_H) ‖I'(u)‖_{H*}`
    pub cerami: f64,
    pub h_norm: f64,
}

/// Energy assembled directly from a (possibly unshifted) spec; no `Ṽ ≥ 1`
/// requirement.
pub fn assemble_energy(spec: &ProblemSpec, grid: &RadialGrid, u: &[f64]) -> Result<EnergyBreakdown> {
    check_radial(spec)?;
    if u.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: u.len(),
        });
    }
    let vtilde = sample_vtilde(spec, grid);
    Ok(energy_terms(spec, grid, &vtilde, u))
}

/// Derivative coefficients assembled directly from a (possibly unshifted) spec.
pub fn assemble_derivative(spec: &ProblemSpec, grid: &RadialGrid, u: &[f64]) -> Result<Vec<f64>> {
    check_radial(spec)?;
    if u.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: u.len(),
        });
    }
    let vtilde = sample_vtilde(spec, grid);
    Ok(derivative_terms(spec, grid, &grid.stiffness(), &vtilde, u))
}

fn check_radial(spec: &ProblemSpec) -> Result<()> {
    if !spec.nonlinearity.is_radial() {
        return Err(Error::NonRadial(spec.nonlinearity.label()));
    }
    Ok(())
}

fn sample_vtilde(spec: &ProblemSpec, grid: &RadialGrid) -> Vec<f64> {
    grid.nodes().iter().map(|&r| spec.vtilde(r)).collect()
}

fn energy_terms(spec: &ProblemSpec, grid: &RadialGrid, vtilde: &[f64], u: &[f64]) -> EnergyBreakdown {
    let grad = grid.gradient_energy_unchecked(u);
    let mut potential = 0.0;
    let mut nonlinear = 0.0;
    for (((&w, &v), &x), &r) in grid.weights().iter().zip(vtilde).zip(u).zip(grid.nodes()) {
        potential += w * v * x * x;
        nonlinear += w * spec.primitive_tilde(r, x);
    }
    EnergyBreakdown::new(0.5 * grad, 0.5 * potential, 0.25 * spec.b * grad * grad, nonlinear)
}

fn derivative_terms(
    spec: &ProblemSpec,
    grid: &RadialGrid,
    stiffness: &SymBand,
    vtilde: &[f64],
    u: &[f64],
) -> Vec<f64> {
    let ku = stiffness.mul_vec(u);
    let grad: f64 = ku.iter().zip(u).map(|(a, b)| a * b).sum();
    let coeff = 1.0 + spec.b * grad;
    ku.iter()
        .zip(grid.weights())
        .zip(vtilde)
        .zip(u)
        .zip(grid.nodes())
        .map(|((((&k, &w), &v), &x), &r)| coeff * k + w * (v * x - spec.ftilde(r, x)))
        .collect()
}

/// Energy functional of a shifted problem on a fixed grid, with the
/// H-inner-product matrix assembled and factored once.
#[derive(Debug, Clone)]
pub struct Functional {
    spec: ProblemSpec,
    grid: RadialGrid,
    vtilde: Vec<f64>,
    stiffness: SymBand,
    h_matrix: SymBand,
    h_factor: BandCholesky,
}

impl Functional {
    /// Fails if `Ṽ < 1` at some node (the spec was not shifted, or `V₀` is
    /// too small) or the nonlinearity is not radial.
    pub fn new(spec: &ProblemSpec, grid: &RadialGrid) -> Result<Self> {
        check_radial(spec)?;
        let vtilde = sample_vtilde(spec, grid);
        check_shifted(grid.nodes(), &vtilde)?;
        let stiffness = grid.stiffness();
        let mut h_matrix = stiffness.clone();
        let mass: Vec<f64> = grid.weights().iter().zip(&vtilde).map(|(w, v)| w * v).collect();
        h_matrix.add_diagonal(&mass);
        let h_factor = h_matrix.cholesky()?;
        Ok(Self {
            spec: spec.clone(),
            grid: grid.clone(),
            vtilde,
            stiffness,
            h_matrix,
            h_factor,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn vtilde(&self) -> &[f64] {
        &self.vtilde
    }

    pub fn energy(&self, u: &Field) -> Result<EnergyBreakdown> {
        self.grid.check_field(u)?;
        Ok(self.energy_of(&u.values))
    }

    pub fn energy_of(&self, u: &[f64]) -> EnergyBreakdown {
        energy_terms(&self.spec, &self.grid, &self.vtilde, u)
    }

    /// Directional derivative `⟨I'(u), v⟩` assembled term by term.
    pub fn directional(&self, u: &[f64], v: &[f64]) -> f64 {
        let ku = self.stiffness.mul_vec(u);
        let grad: f64 = ku.iter().zip(u).map(|(a, b)| a * b).sum();
        let coupling: f64 = ku.iter().zip(v).map(|(a, b)| a * b).sum();
        let mut rest = 0.0;
        for ((((&w, &vt), &x), &y), &r) in self
            .grid
            .weights()
            .iter()
            .zip(&self.vtilde)
            .zip(u)
            .zip(v)
            .zip(self.grid.nodes())
        {
            rest += w * (vt * x - self.spec.ftilde(r, x)) * y;
        }
        (1.0 + self.spec.b * grad) * coupling + rest
    }

    pub fn gradient(&self, u: &Field) -> Result<GradientReport> {
        self.grid.check_field(u)?;
        Ok(self.gradient_of(&u.values))
    }

    pub fn gradient_of(&self, u: &[f64]) -> GradientReport {
        let d = Landscape::derivative(self, u);
        let riesz = self.h_factor.solve(&d);
        let dual_sq: f64 = d.iter().zip(&riesz).map(|(a, b)| a * b).sum();
        let dual_norm = dual_sq.max(0.0).sqrt();
        let h_norm = Landscape::norm(self, u);
        GradientReport {
            riesz,
            dual_norm,
            cerami: (1.0 + h_norm) * dual_norm,
            h_norm,
        }
    }

    pub fn h_norm(&self, u: &Field) -> Result<f64> {
        self.grid.check_field(u)?;
        Ok(Landscape::norm(self, &u.values))
    }

    pub fn h_distance(&self, u: &[f64], v: &[f64]) -> f64 {
        let diff: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - b).collect();
        Landscape::norm(self, &diff)
    }

    /// `∫|∇u|²` for raw node values.
    pub fn gradient_energy_of(&self, u: &[f64]) -> f64 {
        self.stiffness.bilinear(u, u)
    }
}

impl Landscape for Functional {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn value(&self, u: &[f64]) -> f64 {
        self.energy_of(u).total
    }

    fn derivative(&self, u: &[f64]) -> Vec<f64> {
        derivative_terms(&self.spec, &self.grid, &self.stiffness, &self.vtilde, u)
    }

    fn riesz(&self, derivative: &[f64]) -> Vec<f64> {
        self.h_factor.solve(derivative)
    }

    fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.h_matrix.bilinear(u, v)
    }

    /// Quadratic and quartic parts as products of differences and sums;
    /// `F(v) − F(u)` per node by Gauss quadrature of `f̃` when the two values
    /// are close and of one sign.
    fn value_difference(&self, u: &[f64], v: &[f64]) -> f64 {
        let diff: Vec<f64> = v.iter().zip(u).map(|(a, b)| a - b).collect();
        let sum: Vec<f64> = v.iter().zip(u).map(|(a, b)| a + b).collect();
        let d_grad = self.stiffness.bilinear(&diff, &sum);
        let s_grad = self.stiffness.bilinear(u, u) + self.stiffness.bilinear(v, v);
        let mut d_pot = 0.0;
        let mut d_nl = 0.0;
        for i in 0..u.len() {
            let w = self.grid.weights()[i];
            let r = self.grid.nodes()[i];
            d_pot += w * self.vtilde[i] * diff[i] * sum[i];
            d_nl += w * primitive_difference(&self.spec, r, u[i], v[i]);
        }
        0.5 * d_grad + 0.25 * self.spec.b * d_grad * s_grad + 0.5 * d_pot - d_nl
    }
}

/// `F̃(r, b) − F̃(r, a)`.
fn primitive_difference(spec: &ProblemSpec, r: f64, a: f64, b: f64) -> f64 {
    const X: [f64; 4] = [
        -0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
    ];
    const W: [f64; 4] = [
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    let d = b - a;
    if d.abs() <= 1e-2 * a.abs().min(b.abs()) {
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in X.iter().zip(W) {
            acc += w * spec.ftilde(r, mid + 0.5 * d * x);
        }
        0.5 * d * acc
    } else {
        spec.primitive_tilde(r, b) - spec.primitive_tilde(r, a)
    }
}

/// `min over samples of (c₁/4)|u|⁴ + (c₂/q)|u|^q − |F̃(x, u)|`; nonnegative
/// when the growth bound implied by (S1) holds on the sample.
pub fn growth_bound_margin(
    nonlinearity: &dyn Pointwise,
    c1: f64,
    c2: f64,
    q: f64,
    us: &[f64],
    xs: &[Point],
) -> f64 {
    let mut margin = f64::INFINITY;
    for x in xs {
        for &u in us {
            let s = u.abs();
            let bound = 0.25 * c1 * s.powi(4) + c2 / q * s.powf(q);
            margin = margin.min(bound - nonlinearity.primitive(x, u).abs());
        }
    }
    margin
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DiffScheme;
    use crate::model::{Nonlinearity, Potential};
    use std::f64::consts::PI;

    fn setup(nl: Nonlinearity, b: f64) -> (RadialGrid, Functional) {
        let grid = RadialGrid::new(4.0, 64, DiffScheme::Staggered4).unwrap();
        let spec = ProblemSpec::new(b, Potential::Zigzag { a0: 0.0 }, nl).shifted();
        let f = Functional::new(&spec, &grid).unwrap();
        (grid, f)
    }

    #[test]
    fn zero_field_has_zero_energy_and_is_critical() {
        let (grid, f) = setup(Nonlinearity::KirchhoffExample { amplitude: Default::default() }, 1.0);
        let e = f.energy(&grid.zeros()).unwrap();
        assert_eq!(e.total, 0.0);
        assert_eq!((e.dirichlet, e.potential, e.kirchhoff, e.nonlinear), (0.0, 0.0, 0.0, 0.0));
        let g = f.gradient(&grid.zeros()).unwrap();
        assert_eq!(g.dual_norm, 0.0);
    }

    #[test]
    fn quadratic_case_is_half_the_h_norm() {
        let grid = RadialGrid::new(3.0, 48, DiffScheme::Staggered4).unwrap();
        let spec = ProblemSpec::new(1e-300, Potential::Constant { value: 1.0 }, Nonlinearity::Zero).shifted();
        let f = Functional::new(&spec, &grid).unwrap();
        let u = grid.sample(|r| (3.0 - r) * (1.0 + r));
        let e = f.energy(&u).unwrap();
        let ones = vec![1.0; grid.len()];
        let h2 = grid.h_norm_sq(&u, &ones).unwrap();
        assert!((e.total - 0.5 * h2).abs() <= 1e-12 * h2);
    }

    #[test]
    fn kirchhoff_term_is_quarter_b_a_squared() {
        let grid = RadialGrid::new(3.0, 48, DiffScheme::Staggered4).unwrap();
        let spec = ProblemSpec::new(2.5, Potential::Constant { value: 1.0 }, Nonlinearity::Zero).shifted();
        let f = Functional::new(&spec, &grid).unwrap();
        let u = grid.sample(|r| (-r * r).exp() * (3.0 - r));
        let a = grid.gradient_energy(&u).unwrap();
        let e = f.energy(&u).unwrap();
        assert!((e.kirchhoff - 2.5 * a * a / 4.0).abs() <= 1e-14 * e.kirchhoff);
        assert_eq!(e.total, e.dirichlet + e.potential + e.kirchhoff - e.nonlinear);
    }

    #[test]
    fn riesz_representative_matches_directional_derivative() {
        let (grid, f) = setup(
            Nonlinearity::Sum {
                terms: vec![
                    Nonlinearity::KirchhoffExample { amplitude: Default::default() },
                    Nonlinearity::SublinearOrigin { c3: 1.0, tau: 1.0, support: None },
                ],
            },
            1.0,
        );
        let u = grid.sample(|r| 0.8 * (-r).exp() * (4.0 - r) + 0.1 * (3.0 * r).sin());
        let g = f.gradient(&u).unwrap();
        for k in 0..10 {
            let v: Vec<f64> = grid.nodes().iter().map(|r| ((k + 1) as f64 * r).cos() * (4.0 - r)).collect();
            let direct = f.directional(&u.values, &v);
            let via_riesz = f.inner(&g.riesz, &v);
            assert!((direct - via_riesz).abs() <= 1e-8 * direct.abs().max(1e-12), "{direct} vs {via_riesz}");
        }
        assert!(g.cerami >= g.dual_norm);
    }

    #[test]
    fn nonlocal_term_identity() {
        // ⟨I'(u),u⟩ − ‖u‖²_H + ∫f̃u = b (∫|∇u|²)²
        let (grid, f) = setup(Nonlinearity::KirchhoffExample { amplitude: Default::default() }, 1.7);
        let u = grid.sample(|r| (1.0 - r / 4.0) * (0.5 + (2.0 * r).sin()));
        let pairing = f.directional(&u.values, &u.values);
        let h2 = f.inner(&u.values, &u.values);
        let fu: f64 = grid
            .nodes()
            .iter()
            .zip(&u.values)
            .zip(grid.weights())
            .map(|((&r, &x), &w)| w * f.spec().ftilde(r, x) * x)
            .sum();
        let a = grid.gradient_energy(&u).unwrap();
        let expected = 1.7 * a * a;
        assert!(((pairing - h2 + fu) - expected).abs() <= 1e-10 * expected);
    }

    #[test]
    fn unshifted_spec_is_rejected() {
        let grid = RadialGrid::new(4.0, 64, DiffScheme::Staggered4).unwrap();
        let spec = ProblemSpec::new(1.0, Potential::Zigzag { a0: 0.0 }, Nonlinearity::Zero);
        assert!(matches!(Functional::new(&spec, &grid), Err(Error::ShiftViolation { .. })));
        let spec = ProblemSpec::new(1.0, Potential::Constant { value: 2.0 }, Nonlinearity::ArViolator);
        assert!(matches!(Functional::new(&spec, &grid), Err(Error::NonRadial(_))));
    }

    #[test]
    fn derivative_scales_with_energy() {
        // ⟨(2I)'(u), v⟩ = 2⟨I'(u), v⟩: compare I against a doubled problem
        let grid = RadialGrid::new(4.0, 64, DiffScheme::Staggered4).unwrap();
        let spec = ProblemSpec::new(1.0, Potential::Constant { value: 1.0 }, Nonlinearity::Power { coefficient: 1.0, exponent: 4.0 });
        let f = Functional::new(&spec, &grid).unwrap();
        let u = grid.sample(|r| (4.0 - r) * 0.3);
        let v: Vec<f64> = grid.nodes().iter().map(|r| r.sin()).collect();
        let h = 1e-5;
        let plus: Vec<f64> = u.values.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = u.values.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        let fd_double = (2.0 * f.value(&plus) - 2.0 * f.value(&minus)) / (2.0 * h);
        let d = f.directional(&u.values, &v);
        assert!((fd_double - 2.0 * d).abs() <= 1e-6 * d.abs());
    }

    #[test]
    fn value_difference_matches_naive_difference() {
        let (grid, f) = setup(
            Nonlinearity::Sum {
                terms: vec![
                    Nonlinearity::KirchhoffExample { amplitude: Default::default() },
                    Nonlinearity::SublinearOrigin { c3: 1.0, tau: 1.0, support: Some(1.0) },
                ],
            },
            1.0,
        );
        let u = grid.sample(|r| 0.9 * (-r * r).exp() - 0.05 * (4.0 - r));
        for scale in [1e-1, 1e-3, 1e-6] {
            let v: Vec<f64> = u.values.iter().zip(grid.nodes()).map(|(x, r)| x + scale * r.cos()).collect();
            let naive = f.value(&v) - f.value(&u.values);
            let careful = f.value_difference(&u.values, &v);
            assert!((naive - careful).abs() <= 1e-12 * (1.0 + f.value(&v).abs()), "{scale}: {naive} vs {careful}");
        }
    }

    #[test]
    fn growth_bound_examples() {
        let xs = [[0.5, 0.0, 0.0], [2.0, 1.0, 0.0]];
        let us: Vec<f64> = (0..=400).map(|i| -10.0 + 0.05 * i as f64).collect();
        assert!(growth_bound_margin(&Nonlinearity::Zero, 1.0, 1.0, 5.0, &us, &xs) >= 0.0);
        let ex = Nonlinearity::KirchhoffExample { amplitude: Default::default() };
        assert!(growth_bound_margin(&ex, 0.0, 0.0, 5.0, &us, &xs) < 0.0);
        // |F| ≤ 0.8|u|⁵ + 2u² and 2u² ≤ 2u⁴ for |u| ≥ 1; near 0, 2u² needs a
        // c1 large enough for (c1/4)u⁴ on the sampled |u| ≥ 0.05.
        let m = growth_bound_margin(&ex, 8.0 / 0.05f64.powi(2), 4.0, 5.0, &us, &xs);
        assert!(m >= 0.0, "{m}");
        let _ = PI;
    }
}
