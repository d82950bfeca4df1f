//! Radial discretization of radially symmetric functions on the ball B_R ⊂ R³.
//!
//! Unknowns live at cell centres `r_i = (i + ½) h`, `h = R / n`, so there is
//! no node on the axis. Derivatives are taken on the cell faces `r = k h`,
//! `k = 1..=n`, which keeps the discrete Dirichlet form free of checkerboard
//! null modes. Ghost values close the stencils: an even reflection across
//! `r = 0` (regularity, `u'(0) = 0`) and an odd reflection across `r = R`
//! (Dirichlet truncation, `u(R) = 0`).
//!
//! Both quadratures fold the `4πr²` Jacobian into their weights: a midpoint
//! rule on the nodes and a trapezoid rule on the faces, each with Gregory-type
//! end corrections at `r = R`. No correction is needed at the axis because
//! smooth radial integrands `r² g(r)` have vanishing odd derivatives there.

use std::f64::consts::PI;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymBand;

/// End corrections (in units of `h`) for the last five cell centres,
/// ordered from the outermost node inwards; exact through degree 5.
const MIDPOINT_END: [f64; 5] = [
    101.0 / 640.0,
    -2213.0 / 5760.0,
    143.0 / 384.0,
    -349.0 / 1920.0,
    103.0 / 2880.0,
];

/// End corrections for the last four faces, `r = R` first.
const TRAPEZOID_END: [f64; 4] = [-469.0 / 720.0, 59.0 / 240.0, -29.0 / 240.0, 19.0 / 720.0];

pub const MIN_NODES: usize = 8;

/// First-derivative stencil used on the cell faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DiffScheme {
    /// Compact two-point difference, second order.
    #[serde(rename = "staggered-2")]
    Staggered2,
    /// Four-point staggered difference, fourth order.
    #[default]
    #[serde(rename = "staggered-4")]
    Staggered4,
}

impl DiffScheme {
    pub fn name(self) -> &'static str {
        match self {
            DiffScheme::Staggered2 => "staggered-2",
            DiffScheme::Staggered4 => "staggered-4",
        }
    }

    fn half_bandwidth(self) -> usize {
        match self {
            DiffScheme::Staggered2 => 1,
            DiffScheme::Staggered4 => 3,
        }
    }
}

/// Identifier tying a [`Field`] to the grid it was sampled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridId(pub u64);

#[derive(Debug, Clone)]
pub struct RadialGrid {
    radius: f64,
    scheme: DiffScheme,
    spacing: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    faces: Vec<f64>,
    face_weights: Vec<f64>,
    /// Face derivative rows: `(node index, coefficient)` with ghosts folded in.
    stencils: Vec<Vec<(usize, f64)>>,
    id: GridId,
}

impl RadialGrid {
    pub fn new(radius: f64, n: usize, scheme: DiffScheme) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!("grid radius must be positive, got {radius}")));
        }
        if n < MIN_NODES {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let h = radius / n as f64;
        let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let faces: Vec<f64> = (1..=n).map(|k| k as f64 * h).collect();

        let weights = nodes
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let from_end = n - 1 - i;
                let corr = MIDPOINT_END.get(from_end).copied().unwrap_or(0.0);
                4.0 * PI * r * r * h * (1.0 + corr)
            })
            .collect();
        let face_weights = faces
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                let from_end = n - 1 - k;
                let corr = TRAPEZOID_END.get(from_end).copied().unwrap_or(0.0);
                4.0 * PI * r * r * h * (1.0 + corr)
            })
            .collect();

        let stencils = (1..=n).map(|k| face_stencil(scheme, k, n, h)).collect();

        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        radius.to_bits().hash(&mut hasher);
        n.hash(&mut hasher);
        scheme.hash(&mut hasher);
        let id = GridId(hasher.finish());

        Ok(Self {
            radius,
            scheme,
            spacing: h,
            nodes,
            weights,
            faces,
            face_weights,
            stencils,
            id,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn scheme(&self) -> DiffScheme {
        self.scheme
    }

    pub fn id(&self) -> GridId {
        self.id
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Node quadrature weights, `4πr²` included.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn face_weights(&self) -> &[f64] {
        &self.face_weights
    }

    /// `Σ wᵢ sᵢ`, the integral over B_R of a radial function sampled at the nodes.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples.len())?;
        Ok(self.weights.iter().zip(samples).map(|(w, s)| w * s).sum())
    }

    /// Derivative `u'` at every face `r = k h`, `k = 1..=n`.
    pub fn face_derivative(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values.len())?;
        Ok(self.face_derivative_unchecked(values))
    }

    pub(crate) fn face_derivative_unchecked(&self, values: &[f64]) -> Vec<f64> {
        self.stencils
            .iter()
            .map(|row| row.iter().map(|&(j, c)| c * values[j]).sum())
            .collect()
    }

    /// `∫_{R³} |∇u|² dx = 4π ∫₀^R u'(r)² r² dr`.
    pub fn gradient_energy(&self, u: &Field) -> Result<f64> {
        self.check_field(u)?;
        Ok(self.gradient_energy_unchecked(&u.values))
    }

    pub(crate) fn gradient_energy_unchecked(&self, values: &[f64]) -> f64 {
        self.face_derivative_unchecked(values)
            .iter()
            .zip(&self.face_weights)
            .map(|(s, w)| w * s * s)
            .sum()
    }

    /// `‖u‖²_H = ∫ |∇u|² + Ṽ u²` with `Ṽ` sampled at the nodes.
    pub fn h_norm_sq(&self, u: &Field, vtilde: &[f64]) -> Result<f64> {
        self.check_field(u)?;
        self.check_len(vtilde.len())?;
        check_shifted(&self.nodes, vtilde)?;
        let mass: f64 = self
            .weights
            .iter()
            .zip(vtilde)
            .zip(&u.values)
            .map(|((w, v), x)| w * v * x * x)
            .sum();
        Ok(self.gradient_energy_unchecked(&u.values) + mass)
    }

    /// Stiffness matrix `K` with `uᵀ K v = ∫ ∇u·∇v`.
    pub fn stiffness(&self) -> SymBand {
        let mut k = SymBand::zeros(self.len(), self.scheme.half_bandwidth());
        for (row, &w) in self.stencils.iter().zip(&self.face_weights) {
            for &(i, ci) in row {
                for &(j, cj) in row {
                    if j <= i {
                        k.add(i, j, w * ci * cj);
                    }
                }
            }
        }
        k
    }

    /// Samples a radial profile at the nodes.
    pub fn sample<F: Fn(f64) -> f64>(&self, profile: F) -> Field {
        Field {
            values: self.nodes.iter().map(|&r| profile(r)).collect(),
            grid: self.id,
        }
    }

    pub fn zeros(&self) -> Field {
        Field {
            values: vec![0.0; self.len()],
            grid: self.id,
        }
    }

    pub fn field(&self, values: Vec<f64>) -> Result<Field> {
        self.check_len(values.len())?;
        Ok(Field {
            values,
            grid: self.id,
        })
    }

    pub fn check_field(&self, u: &Field) -> Result<()> {
        if u.grid != self.id {
            return Err(Error::GridMismatch {
                field: u.grid.0,
                grid: self.id.0,
            });
        }
        self.check_len(u.values.len())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }
}

pub(crate) fn check_shifted(nodes: &[f64], vtilde: &[f64]) -> Result<()> {
    if let Some((r, v)) = nodes
        .iter()
        .zip(vtilde)
        .find(|(_, &v)| !(v >= 1.0))
    {
        return Err(Error::ShiftViolation {
            radius: *r,
            value: *v,
        });
    }
    Ok(())
}

/// Face `k` sits between nodes `k - 1` and `k`.
fn face_stencil(scheme: DiffScheme, k: usize, n: usize, h: f64) -> Vec<(usize, f64)> {
    let k = k as isize;
    let raw: Vec<(isize, f64)> = match scheme {
        DiffScheme::Staggered2 => vec![(k - 1, -1.0 / h), (k, 1.0 / h)],
        DiffScheme::Staggered4 => {
            let c = 1.0 / (24.0 * h);
            vec![(k - 2, c), (k - 1, -27.0 * c), (k, 27.0 * c), (k + 1, -c)]
        }
    };
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(4);
    for (j, c) in raw {
        let (idx, sign) = reflect(j, n as isize);
        match row.iter_mut().find(|(i, _)| *i == idx) {
            Some(entry) => entry.1 += sign * c,
            None => row.push((idx, sign * c)),
        }
    }
    row.retain(|&(_, c)| c != 0.0);
    row
}

/// Maps a possibly-ghost node index onto a real node and the reflection sign.
fn reflect(j: isize, n: isize) -> (usize, f64) {
    if j < 0 {
        ((-j - 1) as usize, 1.0)
    } else if j >= n {
        ((2 * n - 1 - j) as usize, -1.0)
    } else {
        (j as usize, 1.0)
    }
}

/// Node values of a radial function `u(r)` on a specific grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub values: Vec<f64>,
    pub grid: GridId,
}

impl Field {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, t: f64) -> Field {
        Field {
            values: self.values.iter().map(|x| t * x).collect(),
            grid: self.grid,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(r: f64, n: usize) -> RadialGrid {
        RadialGrid::new(r, n, DiffScheme::Staggered4).unwrap()
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(matches!(RadialGrid::new(1.0, 4, DiffScheme::Staggered4), Err(Error::Config(_))));
        assert!(matches!(RadialGrid::new(0.0, 64, DiffScheme::Staggered4), Err(Error::Config(_))));
        assert!(matches!(RadialGrid::new(-1.0, 64, DiffScheme::Staggered2), Err(Error::Config(_))));
        assert!(RadialGrid::new(1.0, MIN_NODES, DiffScheme::Staggered4).is_ok());
    }

    #[test]
    fn nodes_and_weights_are_valid() {
        for &n in &[8, 16, 33, 128] {
            for scheme in [DiffScheme::Staggered2, DiffScheme::Staggered4] {
                let g = RadialGrid::new(2.5, n, scheme).unwrap();
                assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
                assert!(g.nodes()[0] > 0.0 && *g.nodes().last().unwrap() < 2.5);
                assert!(g.weights().iter().all(|&w| w > 0.0));
                assert!(g.face_weights().iter().all(|&w| w > 0.0));
            }
        }
    }

    #[test]
    fn weights_sum_to_ball_volume() {
        for &(r, n) in &[(1.0, 16), (1.0, 64), (2.0, 128), (8.0, 257)] {
            let g = grid(r, n);
            let vol = 4.0 * PI * r * r * r / 3.0;
            let sum: f64 = g.weights().iter().sum();
            assert!(((sum - vol) / vol).abs() <= 1e-10, "R={r} n={n}: {sum} vs {vol}");
            let face_sum: f64 = g.face_weights().iter().sum();
            assert!(((face_sum - vol) / vol).abs() <= 1e-10);
        }
    }

    #[test]
    fn integrate_examples() {
        let g = grid(1.0, 64);
        let one = vec![1.0; 64];
        assert!((g.integrate(&one).unwrap() - 4.0 * PI / 3.0).abs() <= 1e-10);
        let r2: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        assert!((g.integrate(&r2).unwrap() - 4.0 * PI / 5.0).abs() <= 1e-8);

        let g = grid(8.0, 256);
        let gauss: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        assert!((g.integrate(&gauss).unwrap() - PI.powf(1.5)).abs() <= 1e-6);

        assert!(matches!(g.integrate(&one), Err(Error::LengthMismatch { expected: 256, got: 64 })));
    }

    #[test]
    fn derivative_reproduces_linear_functions() {
        for scheme in [DiffScheme::Staggered2, DiffScheme::Staggered4] {
            let g = RadialGrid::new(3.0, 40, scheme).unwrap();
            let alpha = -1.75;
            let u: Vec<f64> = g.nodes().iter().map(|r| alpha * r).collect();
            let du = g.face_derivative(&u).unwrap();
            // interior faces: away from both reflection closures
            for s in &du[2..du.len() - 2] {
                assert!(((s - alpha) / alpha).abs() <= 1e-10, "{scheme:?}: {s}");
            }
        }
    }

    #[test]
    fn gradient_energy_examples() {
        let g = grid(1.0, 128);
        let cone = g.sample(|r| 1.0 - r);
        let a = g.gradient_energy(&cone).unwrap();
        assert!((a - 4.0 * PI / 3.0).abs() <= 1e-6, "{a}");
        assert_eq!(g.gradient_energy(&g.zeros()).unwrap(), 0.0);

        let g = grid(8.0, 512);
        let gauss = g.sample(|r| (-r * r / 2.0).exp());
        let a = g.gradient_energy(&gauss).unwrap();
        assert!((a - 1.5 * PI.powf(1.5)).abs() <= 1e-5, "{a}");
    }

    #[test]
    fn field_grid_mismatch() {
        let g1 = grid(1.0, 64);
        let g2 = grid(2.0, 64);
        let u = g2.sample(|r| r);
        assert!(matches!(g1.gradient_energy(&u), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn h_norm_examples() {
        let g = grid(1.0, 128);
        let ones = vec![1.0; 128];
        assert_eq!(g.h_norm_sq(&g.zeros(), &ones).unwrap(), 0.0);
        let cone = g.sample(|r| 1.0 - r);
        let expected = 4.0 * PI / 3.0 + 4.0 * PI / 30.0;
        assert!((g.h_norm_sq(&cone, &ones).unwrap() - expected).abs() <= 1e-6);
        let mut bad = ones.clone();
        bad[17] = 0.5;
        assert!(matches!(g.h_norm_sq(&cone, &bad), Err(Error::ShiftViolation { .. })));
    }

    #[test]
    fn stiffness_matches_gradient_energy() {
        for scheme in [DiffScheme::Staggered2, DiffScheme::Staggered4] {
            let g = RadialGrid::new(4.0, 50, scheme).unwrap();
            let u = g.sample(|r| (1.0 + r).recip() * (4.0 - r));
            let k = g.stiffness();
            let quad = k.bilinear(&u.values, &u.values);
            let direct = g.gradient_energy(&u).unwrap();
            assert!(((quad - direct) / direct).abs() < 1e-13);
        }
    }
}
