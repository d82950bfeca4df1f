//! Sampled certification of the mountain-pass geometry.
//!
//! - a lower estimate `η` of `I` on the H-sphere of radius `ρ`,
//! - a point `e` with `I(e) < 0` and `‖e‖_H > ρ`,
//! - a small `t` with `I(t u) < 0` (the negative dip near the origin).
//!
//! Sphere estimates are the minimum over seeded random directions, lowered
//! further by sphere-constrained descent started from the worst samples.
//! A positive `η` is a certificate on the sampled set only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{Functional, Landscape};
use crate::grid::{Field, RadialGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// Sphere radius; selected from `rho_grid` when unset.
    pub rho: Option<f64>,
    pub sphere_samples: usize,
    /// Worst samples refined by sphere-constrained descent.
    pub refine_starts: usize,
    pub refine_iters: usize,
    /// `[min, max]` of the log-spaced candidate radii, two per octave.
    pub rho_grid: [f64; 2],
    pub t_max: f64,
    pub t_factor: f64,
    pub t_min: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            rho: None,
            sphere_samples: 256,
            refine_starts: 4,
            refine_iters: 200,
            rho_grid: [0.1, 10.0],
            t_max: 1e6,
            t_factor: 2.0,
            t_min: 1e-6,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if let Some(rho) = self.rho {
            if !(rho > 0.0) || !rho.is_finite() {
                return bad(format!("geometry.rho must be positive, got {rho}"));
            }
        }
        if self.sphere_samples < 32 {
            return bad(format!("geometry.sphere_samples must be >= 32, got {}", self.sphere_samples));
        }
        let [lo, hi] = self.rho_grid;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return bad(format!("geometry.rho_grid must satisfy 0 < min <= max, got [{lo}, {hi}]"));
        }
        if !(self.t_factor > 1.0) || !(self.t_max >= 1.0) || !(self.t_min > 0.0 && self.t_min < 1.0) {
            return bad("geometry: need t_factor > 1, t_max >= 1, 0 < t_min < 1".into());
        }
        Ok(())
    }

    pub fn rho_candidates(&self) -> Vec<f64> {
        let [lo, hi] = self.rho_grid;
        let mut out = Vec::new();
        let mut k = 0;
        loop {
            let rho = lo * 2f64.powf(0.5 * k as f64);
            if rho > hi * (1.0 + 1e-12) {
                break;
            }
            out.push(rho);
            k += 1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereEstimate {
    pub rho: f64,
    /// `min(eta_sampled, eta_refined)`.
    pub eta: f64,
    pub eta_sampled: f64,
    pub eta_refined: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub t: f64,
    pub energy: f64,
    /// `I(t u) / t⁴`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativePoint {
    #[serde(skip)]
    pub e: Vec<f64>,
    pub t: f64,
    pub energy: f64,
    pub h_norm: f64,
    pub scan: Vec<ScanPoint>,
    /// `I(tu)/t⁴` strictly decreasing over the last three scan points.
    pub trend_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub rho: f64,
    pub rho_auto: bool,
    pub eta: f64,
    pub sphere: SphereEstimate,
    /// `(rho, eta)` for every candidate radius tried.
    pub candidates: Vec<(f64, f64)>,
    pub negative_point: Option<NegativePoint>,
    pub t_star: Option<f64>,
    pub holds: bool,
    pub warnings: Vec<String>,
}

/// `max(0, 1 − r)²`, scaled to unit H-norm.
pub fn default_direction(f: &Functional) -> Vec<f64> {
    let u: Vec<f64> = f.grid().nodes().iter().map(|r| (1.0 - r).max(0.0).powi(2)).collect();
    normalized(f, u)
}

fn normalized<L: Landscape + ?Sized>(f: &L, mut u: Vec<f64>) -> Vec<f64> {
    let n = f.norm(&u);
    u.iter_mut().for_each(|x| *x /= n);
    u
}

fn index_seed(seed: u64, index: u64) -> u64 {
    seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Gaussian white noise on the nodes smoothed with a Gaussian kernel of
/// random width in `[0.2, 3]`; unit H-norm.
pub fn random_direction(f: &Functional, seed: u64, index: u64) -> Vec<f64> {
    let grid: &RadialGrid = f.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(index_seed(seed, index));
    let width = (0.2f64.ln() + rng.random::<f64>() * (3.0f64 / 0.2).ln()).exp();
    let noise: Vec<f64> = (0..grid.len()).map(|_| rng.sample(StandardNormal)).collect();
    let h = grid.spacing();
    let reach = ((4.0 * width / h).ceil() as usize).max(1);
    let n = grid.len();
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(reach);
            let hi = (i + reach).min(n - 1);
            (lo..=hi)
                .map(|j| {
                    let d = (i as f64 - j as f64) * h / width;
                    noise[j] * (-0.5 * d * d).exp()
                })
                .sum()
        })
        .collect();
    normalized(f, smooth)
}

/// Minimizes `I` on `‖u‖_H = rho` by tangent gradient steps with rescaling.
/// Returns the last accepted point and its level.
fn sphere_descent<L: Landscape + ?Sized>(f: &L, rho: f64, start: &[f64], iters: usize) -> (Vec<f64>, f64) {
    let rescale = |mut u: Vec<f64>| {
        let n = f.norm(&u);
        u.iter_mut().for_each(|x| *x *= rho / n);
        u
    };
    let mut u = rescale(start.to_vec());
    let mut level = f.value(&u);
    let mut step = 0.1;
    for _ in 0..iters {
        let g = f.riesz(&f.derivative(&u));
        let radial = f.inner(&g, &u) / (rho * rho);
        let tangent: Vec<f64> = g.iter().zip(&u).map(|(a, b)| a - radial * b).collect();
        let tn2 = f.inner(&tangent, &tangent);
        if !(tn2 > 1e-24 * (1.0 + level * level)) {
            break;
        }
        let mut accepted = false;
        while step > 1e-12 {
            let trial = rescale(u.iter().zip(&tangent).map(|(a, b)| a - step * b).collect());
            let delta = f.value_difference(&u, &trial);
            if delta <= -1e-4 * step * tn2 {
                u = trial;
                level += delta;
                step *= 2.0;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let level = f.value(&u);
    (u, level)
}

/// `m` seeded random unit directions, index `i` drawn from its own stream.
pub fn sample_directions(f: &Functional, m: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..m)
        .into_par_iter()
        .map(|i| random_direction(f, seed, i as u64))
        .collect()
}

/// Minimum of `I(rho d)` over `m` seeded random unit directions, lowered by
/// sphere-constrained descent from the `refine` worst of them.
pub fn estimate_sphere_min(
    f: &Functional,
    rho: f64,
    m: usize,
    seed: u64,
    refine: usize,
    refine_iters: usize,
) -> SphereEstimate {
    let dirs = sample_directions(f, m, seed);
    sphere_min_over(f, rho, &dirs, seed, refine, refine_iters)
}

fn sphere_min_over(
    f: &Functional,
    rho: f64,
    dirs: &[Vec<f64>],
    seed: u64,
    refine: usize,
    refine_iters: usize,
) -> SphereEstimate {
    let levels: Vec<(f64, usize)> = dirs
        .par_iter()
        .enumerate()
        .map(|(i, d)| (f.value(&scale(d, rho)), i))
        .collect();
    let eta_sampled = levels.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut order = levels;
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let eta_refined = order[..refine.min(order.len())]
        .par_iter()
        .map(|&(_, i)| sphere_descent(f, rho, &dirs[i], refine_iters).1)
        .collect::<Vec<f64>>()
        .into_iter()
        .reduce(f64::min);
    SphereEstimate {
        rho,
        eta: eta_refined.map_or(eta_sampled, |r| r.min(eta_sampled)),
        eta_sampled,
        eta_refined,
        samples: dirs.len(),
        seed,
    }
}

fn scale(u: &[f64], s: f64) -> Vec<f64> {
    u.iter().map(|x| s * x).collect()
}

/// Scans `t = 1, factor, factor², … ≤ t_max` along `u_dir` for the first `t`
/// with `I(t u_dir) < 0` and `‖t u_dir‖_H > rho`.
pub fn find_negative_energy_point(
    f: &Functional,
    u_dir: &[f64],
    rho: f64,
    t_max: f64,
    factor: f64,
) -> Result<NegativePoint> {
    let dir_norm = f.norm(u_dir);
    let mut scan = Vec::new();
    let mut t = 1.0;
    while t <= t_max {
        let u = scale(u_dir, t);
        let energy = f.value(&u);
        scan.push(ScanPoint {
            t,
            energy,
            ratio: energy / t.powi(4),
        });
        if energy < 0.0 && t * dir_norm > rho {
            let tail = &scan[scan.len().saturating_sub(3)..];
            let trend_decreasing = tail.len() == 3 && tail.windows(2).all(|w| w[1].ratio < w[0].ratio);
            // re-checked from scratch rather than trusted from the scan
            let h_norm = f.norm(&u);
            let energy = f.value(&u);
            if energy < 0.0 && h_norm > rho {
                return Ok(NegativePoint {
                    e: u,
                    t,
                    energy,
                    h_norm,
                    scan,
                    trend_decreasing,
                });
            }
        }
        t *= factor;
    }
    Err(Error::NegativeEnergyNotFound { t_max })
}

/// Largest `t` in `1, ½, ¼, … ≥ t_min` with `I(t u_dir) < 0`.
pub fn small_t_scan(f: &Functional, u_dir: &[f64], t_min: f64) -> Option<f64> {
    let mut t = 1.0;
    while t >= t_min {
        let u = scale(u_dir, t);
        if f.value(&u) < 0.0 {
            return Some(t);
        }
        t *= 0.5;
    }
    None
}

/// Radius, sphere estimate, negative-energy point and small-t dip together.
pub fn certify(f: &Functional, config: &GeometryConfig, seed: u64) -> Result<GeometryReport> {
    config.validate()?;
    let dirs = sample_directions(f, config.sphere_samples, seed);
    let estimate = |rho| sphere_min_over(f, rho, &dirs, seed, config.refine_starts, config.refine_iters);
    let (sphere, candidates, rho_auto) = match config.rho {
        Some(rho) => {
            let s = estimate(rho);
            let c = vec![(rho, s.eta)];
            (s, c, false)
        }
        None => {
            let mut best: Option<SphereEstimate> = None;
            let mut candidates = Vec::new();
            for rho in config.rho_candidates() {
                let s = estimate(rho);
                candidates.push((rho, s.eta));
                if best.as_ref().is_none_or(|b| s.eta > b.eta) {
                    best = Some(s);
                }
            }
            (best.expect("rho grid is never empty"), candidates, true)
        }
    };
    let rho = sphere.rho;
    let dir = default_direction(f);
    let mut warnings = Vec::new();
    let negative_point = match find_negative_energy_point(f, &dir, rho, config.t_max, config.t_factor) {
        Ok(p) => {
            if !p.trend_decreasing {
                warnings.push("I(tu)/t^4 not decreasing over the last three scan points".into());
            }
            Some(p)
        }
        Err(Error::NegativeEnergyNotFound { .. }) => None,
        Err(e) => return Err(e),
    };
    let t_star = small_t_scan(f, &dir, config.t_min);
    let holds = sphere.eta > 0.0 && negative_point.is_some();
    Ok(GeometryReport {
        rho,
        rho_auto,
        eta: sphere.eta,
        sphere,
        candidates,
        negative_point,
        t_star,
        holds,
        warnings,
    })
}

impl GeometryReport {
    pub fn e_field(&self, grid: &RadialGrid) -> Option<Field> {
        self.negative_point
            .as_ref()
            .map(|p| grid.field(p.e.clone()).expect("e was built on this grid"))
    }
}
