//! Critical-point solvers.
//!
//! [`minimize_in_ball`] is projected steepest descent in the H metric on the
//! closed ball `‖u‖_H ≤ ρ`, with Armijo backtracking; every accepted step
//! strictly lowers the energy.
//!
//! [`mountain_pass`] runs in two stages. Stage one deforms the segment from
//! `0` to `e` by descending its highest point. Once the path maximum stops
//! decreasing, stage two takes over from the path-max point: it keeps the
//! iterate at the maximum of `I` along its ray from the origin and descends
//! orthogonally to the ray. Stage two converges to a critical point whose
//! level is the maximum along a ray through the origin, so it is at least the
//! infimum of `I` over any H-sphere around the origin.
//!
//! Both solvers work on any [`Landscape`], so one-dimensional surrogates
//! exercise the same code as the discretized functional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::Landscape;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol_residual: f64,
    pub tol_cerami: f64,
    pub max_iters: usize,
    pub armijo_slope: f64,
    pub armijo_shrink: f64,
    /// Odd, at least 5.
    pub path_points: usize,
    pub deform_step: f64,
    pub distinct_delta: f64,
    /// Stage-one iterations without a lower path maximum before stage two.
    pub path_stall: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_residual: 1e-6,
            tol_cerami: 1e-5,
            max_iters: 10_000,
            armijo_slope: 1e-4,
            armijo_shrink: 0.5,
            path_points: 41,
            deform_step: 0.1,
            distinct_delta: 0.1,
            path_stall: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_residual", self.tol_residual),
            ("tol_cerami", self.tol_cerami),
            ("armijo_slope", self.armijo_slope),
            ("deform_step", self.deform_step),
            ("distinct_delta", self.distinct_delta),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("solver.{name} must be positive, got {v}")));
            }
        }
        if !(self.armijo_slope < 1.0) || !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return Err(Error::Config("solver: need armijo_slope < 1 and 0 < armijo_shrink < 1".into()));
        }
        if self.path_points < 5 || self.path_points.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "solver.path_points must be odd and >= 5, got {}",
                self.path_points
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("solver.max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    LocalMin,
    MountainPass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub level: f64,
    pub residual: f64,
    pub cerami: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    #[serde(skip)]
    pub u: Vec<f64>,
    pub kind: Kind,
    /// Recomputed from scratch at the returned point.
    pub level: f64,
    pub residual: f64,
    pub cerami: f64,
    pub h_norm: f64,
    pub iters: usize,
    pub converged: bool,
    /// Local minimization found no negative level and returned `u ≡ 0`.
    pub degenerate: bool,
    pub on_boundary: bool,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MPPath {
    #[serde(skip)]
    pub points: Vec<Vec<f64>>,
    pub max_index: usize,
    pub level_profile: Vec<f64>,
    /// Iterations spent deforming the path before the ray stage.
    pub deform_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MountainPass {
    pub point: CriticalPoint,
    pub path: MPPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distinctness {
    pub pass: bool,
    pub level_min: f64,
    pub level_mp: f64,
    pub distance: f64,
    pub reasons: Vec<String>,
}

struct Status {
    level: f64,
    residual: f64,
    cerami: f64,
    h_norm: f64,
    riesz: Vec<f64>,
}

fn status<L: Landscape + ?Sized>(f: &L, u: &[f64]) -> Status {
    let d = f.derivative(u);
    let riesz = f.riesz(&d);
    let residual = d.iter().zip(&riesz).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt();
    let h_norm = f.norm(u);
    Status {
        level: f.value(u),
        residual,
        cerami: (1.0 + h_norm) * residual,
        h_norm,
        riesz,
    }
}

fn axpy(u: &[f64], s: f64, g: &[f64]) -> Vec<f64> {
    u.iter().zip(g).map(|(a, b)| a + s * b).collect()
}

fn sub(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(a, b)| a - b).collect()
}

fn scale(u: &[f64], s: f64) -> Vec<f64> {
    u.iter().map(|x| s * x).collect()
}

fn project<L: Landscape + ?Sized>(f: &L, u: Vec<f64>, rho: f64) -> Vec<f64> {
    let n = f.norm(&u);
    if n > rho {
        scale(&u, rho / n)
    } else {
        u
    }
}

fn converged(cfg: &SolverConfig, residual: f64, cerami: f64) -> bool {
    residual <= cfg.tol_residual && cerami <= cfg.tol_cerami
}

/// Projected descent on `‖u‖_H ≤ rho` from `start` (projected first).
///
/// Interior points stop on `residual ≤ tol_residual` and
/// `cerami ≤ tol_cerami`; points on the sphere whose gradient pushes outward
/// stop when the tangential gradient is below `tol_residual`. If the best
/// level is not negative, `u ≡ 0` is returned with `degenerate` set.
pub fn minimize_in_ball<L: Landscape + ?Sized>(
    f: &L,
    rho: f64,
    start: &[f64],
    cfg: &SolverConfig,
) -> CriticalPoint {
    let mut u = project(f, start.to_vec(), rho);
    let mut level = f.value(&u);
    let mut trace = Vec::new();
    let mut step = 1.0;
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut done = false;
    let mut on_boundary = false;
    let mut iters = 0;
    while iters < cfg.max_iters {
        let st = status(f, &u);
        on_boundary = st.h_norm >= rho * (1.0 - 1e-12);
        let outward = f.inner(&st.riesz, &u) < 0.0;
        let measure = if on_boundary && outward {
            let radial = f.inner(&st.riesz, &u) / (st.h_norm * st.h_norm);
            f.norm(&axpy(&st.riesz, -radial, &u))
        } else {
            st.residual
        };
        trace.push(TraceRow {
            iter: iters,
            level,
            residual: st.residual,
            cerami: st.cerami,
        });
        if (on_boundary && outward && measure <= cfg.tol_residual) || converged(cfg, st.residual, st.cerami) {
            done = true;
            break;
        }
        // Barzilai-Borwein trial step, then backtracking
        if let Some((pu, pg)) = &previous {
            let du = sub(&u, pu);
            let dg = sub(&st.riesz, pg);
            let curv = f.inner(&du, &dg);
            if curv > 0.0 {
                step = (f.inner(&du, &du) / curv).clamp(1e-8, 1e8);
            }
        }
        let mut accepted = None;
        let mut s = step;
        while s > 1e-16 {
            let trial = project(f, axpy(&u, -s, &st.riesz), rho);
            let slope = f.inner(&st.riesz, &sub(&trial, &u));
            let delta = f.value_difference(&u, &trial);
            if slope < 0.0 && delta <= cfg.armijo_slope * slope {
                accepted = Some((trial, delta));
                break;
            }
            s *= cfg.armijo_shrink;
        }
        iters += 1;
        match accepted {
            Some((trial, delta)) => {
                previous = Some((std::mem::replace(&mut u, trial), st.riesz));
                level += delta;
                step = s;
            }
            None => break,
        }
    }
    let st = status(f, &u);
    if !(st.level < 0.0) {
        let zero = vec![0.0; f.dim()];
        let z = status(f, &zero);
        return CriticalPoint {
            u: zero,
            kind: Kind::LocalMin,
            level: z.level,
            residual: z.residual,
            cerami: z.cerami,
            h_norm: 0.0,
            iters,
            converged: done,
            degenerate: true,
            on_boundary: false,
            trace,
        };
    }
    CriticalPoint {
        kind: Kind::LocalMin,
        level: st.level,
        residual: st.residual,
        cerami: st.cerami,
        h_norm: st.h_norm,
        iters,
        converged: done,
        degenerate: false,
        on_boundary,
        trace,
        u,
    }
}

fn ray_slope<L: Landscape + ?Sized>(f: &L, v: &[f64], t: f64) -> f64 {
    let d = f.derivative(&scale(v, t));
    d.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Local maximizer of `t ↦ I(t v)` near `t0`: a sign change of the slope
/// from positive to negative, bracketed by geometric search and refined by
/// safeguarded false position.
pub fn ray_peak<L: Landscape + ?Sized>(f: &L, v: &[f64], t0: f64) -> Option<f64> {
    let (mut lo, mut hi);
    let s0 = ray_slope(f, v, t0);
    if s0 == 0.0 {
        return Some(t0);
    }
    if s0 > 0.0 {
        lo = (t0, s0);
        let mut t = t0;
        loop {
            t *= 1.25;
            let s = ray_slope(f, v, t);
            if !s.is_finite() || t > t0 * 1e6 {
                return None;
            }
            if s <= 0.0 {
                hi = (t, s);
                break;
            }
            lo = (t, s);
        }
    } else {
        hi = (t0, s0);
        let mut t = t0;
        loop {
            t *= 0.8;
            if t < t0 * 1e-8 {
                return None;
            }
            let s = ray_slope(f, v, t);
            if s > 0.0 {
                lo = (t, s);
                break;
            }
            hi = (t, s);
        }
    }
    // Illinois variant of regula falsi, bisecting when it stalls
    let mut side = 0i8;
    for _ in 0..200 {
        if hi.1 == 0.0 {
            return Some(hi.0);
        }
        if (hi.0 - lo.0).abs() <= 4.0 * f64::EPSILON * hi.0.abs().max(lo.0.abs()) {
            break;
        }
        let mut t = (lo.0 * hi.1 - hi.0 * lo.1) / (hi.1 - lo.1);
        if !(t > lo.0.min(hi.0) && t < lo.0.max(hi.0)) {
            t = 0.5 * (lo.0 + hi.0);
        }
        let s = ray_slope(f, v, t);
        if s > 0.0 {
            lo = (t, s);
            if side == 1 {
                hi.1 *= 0.5;
            }
            side = 1;
        } else {
            hi = (t, s);
            if side == -1 {
                lo.1 *= 0.5;
            }
            side = -1;
        }
    }
    Some(if lo.1.abs() < hi.1.abs() { lo.0 } else { hi.0 })
}

fn path_max(levels: &[f64]) -> usize {
    let mut m = 0;
    for (i, &l) in levels.iter().enumerate() {
        if l > levels[m] {
            m = i;
        }
    }
    m
}

/// Mountain-pass point between `0` and `e` (which must satisfy `I(e) < 0`).
///
/// `eta` is the certified sphere level; the path maximum falling below
/// `eta / 2` aborts with [`Error::PathCollapse`].
pub fn mountain_pass<L: Landscape + ?Sized>(
    f: &L,
    e: &[f64],
    eta: Option<f64>,
    cfg: &SolverConfig,
) -> Result<MountainPass> {
    let n = cfg.path_points;
    let mut points: Vec<Vec<f64>> = (0..n).map(|k| scale(e, k as f64 / (n - 1) as f64)).collect();
    points[0] = vec![0.0; e.len()];
    let mut levels: Vec<f64> = points.iter().map(|p| f.value(p)).collect();
    let mut trace = Vec::new();
    let mut iters = 0;
    let mut step = cfg.deform_step;
    let mut best_max = f64::INFINITY;
    let mut since_best = 0;
    let collapse = |max_level: f64| -> Result<()> {
        match eta {
            Some(eta) if max_level < 0.5 * eta => Err(Error::PathCollapse {
                max_level,
                threshold: 0.5 * eta,
            }),
            _ => Ok(()),
        }
    };

    // stage one: descend the path maximum
    let mut result: Option<Vec<f64>> = None;
    while iters < cfg.max_iters {
        let m = path_max(&levels);
        if m == 0 || m == n - 1 {
            return Err(Error::PathCollapse {
                max_level: levels[m],
                threshold: eta.map_or(0.0, |e| 0.5 * e),
            });
        }
        collapse(levels[m])?;
        let st = status(f, &points[m]);
        trace.push(TraceRow {
            iter: iters,
            level: levels[m],
            residual: st.residual,
            cerami: st.cerami,
        });
        if converged(cfg, st.residual, st.cerami) {
            result = Some(points[m].clone());
            break;
        }
        if levels[m] < best_max - 1e-12 * (1.0 + best_max.abs().min(1e300)) {
            best_max = levels[m];
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.path_stall {
                break;
            }
        }
        let g2 = st.residual * st.residual;
        let mean = points.windows(2).map(|w| f.norm(&sub(&w[1], &w[0]))).sum::<f64>() / (n - 1) as f64;
        let mut s = step;
        let mut moved = false;
        while s > 1e-16 {
            let trial = axpy(&points[m], -s, &st.riesz);
            // a step that tears the path apart is not a deformation
            let connected = [m - 1, m + 1].iter().all(|&k| f.norm(&sub(&trial, &points[k])) <= 2.0 * mean);
            let delta = f.value_difference(&points[m], &trial);
            if connected && delta <= -cfg.armijo_slope * s * g2 {
                points[m] = trial;
                levels[m] = f.value(&points[m]);
                moved = true;
                break;
            }
            s *= cfg.armijo_shrink;
        }
        iters += 1;
        if !moved {
            break;
        }
        step = (2.0 * s).min(1e3 * cfg.deform_step);
        respace(f, &mut points, &mut levels, m);
    }

    let path = |points: &Vec<Vec<f64>>, levels: &Vec<f64>, deform_iters| MPPath {
        max_index: path_max(levels),
        level_profile: levels.clone(),
        points: points.clone(),
        deform_iters,
    };
    let deform_iters = iters;
    if let Some(u) = result {
        let point = finish(f, u, Kind::MountainPass, iters, true, trace);
        return Ok(MountainPass {
            point,
            path: path(&points, &levels, deform_iters),
        });
    }

    // stage two: maximum along rays, descent across them
    let start = &points[path_max(&levels)];
    let mut t = f.norm(start);
    let mut v = scale(start, 1.0 / t);
    t = ray_peak(f, &v, t).ok_or(Error::PathCollapse {
        max_level: levels[path_max(&levels)],
        threshold: eta.map_or(0.0, |e| 0.5 * e),
    })?;
    let mut p = scale(&v, t);
    let mut level = f.value(&p);
    let mut done = false;
    let mut s = cfg.deform_step;
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    while iters < cfg.max_iters {
        collapse(level)?;
        let st = status(f, &p);
        trace.push(TraceRow {
            iter: iters,
            level,
            residual: st.residual,
            cerami: st.cerami,
        });
        if converged(cfg, st.residual, st.cerami) {
            done = true;
            break;
        }
        let along = f.inner(&st.riesz, &v);
        let tangent = axpy(&st.riesz, -along, &v);
        let tn2 = f.inner(&tangent, &tangent);
        if let Some((pp, pg)) = &previous {
            let dp = sub(&p, pp);
            let dg = sub(&tangent, pg);
            let curv = f.inner(&dp, &dg);
            if curv > 0.0 {
                s = (f.inner(&dp, &dp) / curv).clamp(1e-8, 1e8);
            }
        }
        let mut accepted = None;
        while s > 1e-16 {
            let q = axpy(&p, -s, &tangent);
            let qn = f.norm(&q);
            let w = scale(&q, 1.0 / qn);
            if let Some(tw) = ray_peak(f, &w, t) {
                let trial = scale(&w, tw);
                let delta = f.value_difference(&p, &trial);
                if delta <= -cfg.armijo_slope * s * tn2 {
                    accepted = Some((w, tw, trial, delta));
                    break;
                }
            }
            s *= cfg.armijo_shrink;
        }
        iters += 1;
        match accepted {
            Some((w, tw, trial, delta)) => {
                previous = Some((std::mem::replace(&mut p, trial), tangent));
                v = w;
                t = tw;
                level += delta;
            }
            None => break,
        }
    }
    let point = finish(f, p, Kind::MountainPass, iters, done, trace);
    collapse(point.level)?;
    Ok(MountainPass {
        point,
        path: path(&points, &levels, deform_iters),
    })
}

/// Re-spaces the neighbours of `m` by linear interpolation when an adjacent
/// segment leaves `[½, 2]` times the mean H-length; reverted if it would
/// raise the path maximum.
fn respace<L: Landscape + ?Sized>(f: &L, points: &mut [Vec<f64>], levels: &mut [f64], m: usize) {
    let n = points.len();
    let lengths: Vec<f64> = points.windows(2).map(|w| f.norm(&sub(&w[1], &w[0]))).collect();
    let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
    let off = |l: f64| l > 2.0 * mean || l < 0.5 * mean;
    if !off(lengths[m - 1]) && !off(lengths[m]) {
        return;
    }
    let old_max = levels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut changed = Vec::new();
    for k in [m - 1, m + 1] {
        if k == 0 || k == n - 1 {
            continue;
        }
        let mid: Vec<f64> = points[k - 1].iter().zip(&points[k + 1]).map(|(a, b)| 0.5 * (a + b)).collect();
        let level = f.value(&mid);
        changed.push((k, std::mem::replace(&mut points[k], mid), levels[k]));
        levels[k] = level;
    }
    let new_max = levels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if new_max > old_max + 1e-12 * (1.0 + old_max.abs()) {
        for (k, p, l) in changed {
            points[k] = p;
            levels[k] = l;
        }
    }
}

fn finish<L: Landscape + ?Sized>(
    f: &L,
    u: Vec<f64>,
    kind: Kind,
    iters: usize,
    converged: bool,
    trace: Vec<TraceRow>,
) -> CriticalPoint {
    let st = status(f, &u);
    CriticalPoint {
        kind,
        level: st.level,
        residual: st.residual,
        cerami: st.cerami,
        h_norm: st.h_norm,
        iters,
        converged,
        degenerate: false,
        on_boundary: false,
        trace,
        u,
    }
}

/// Passes iff `level_min < 0 < level_mp` and `‖u_min − u_mp‖_H ≥ distinct_delta`.
pub fn verify_distinct<L: Landscape + ?Sized>(
    f: &L,
    local_min: &CriticalPoint,
    mountain: &CriticalPoint,
    cfg: &SolverConfig,
) -> Distinctness {
    let distance = f.norm(&sub(&local_min.u, &mountain.u));
    let mut reasons = Vec::new();
    if !(local_min.level < 0.0) {
        reasons.push("step-1 level not negative".to_string());
    }
    if !(mountain.level > 0.0) {
        reasons.push("step-2 level not positive".to_string());
    }
    if !(distance >= cfg.distinct_delta) {
        reasons.push(format!("H-distance {distance:e} below {:e}", cfg.distinct_delta));
    }
    Distinctness {
        pass: reasons.is_empty(),
        level_min: local_min.level,
        level_mp: mountain.level,
        distance,
        reasons,
    }
}

/// A functional on the real line with the Euclidean inner product.
#[derive(Debug, Clone, Copy)]
pub struct ScalarLandscape {
    pub value: fn(f64) -> f64,
    pub slope: fn(f64) -> f64,
}

impl ScalarLandscape {
    /// `t²/2 − |t|`.
    pub fn abs_dip() -> Self {
        Self {
            value: |t| 0.5 * t * t - t.abs(),
            slope: |t| t - if t == 0.0 { 0.0 } else { t.signum() },
        }
    }

    /// `t²/2 − t⁴/4`.
    pub fn quartic_saddle() -> Self {
        Self {
            value: |t| 0.5 * t * t - 0.25 * t.powi(4),
            slope: |t| t - t.powi(3),
        }
    }
}

impl Landscape for ScalarLandscape {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, u: &[f64]) -> f64 {
        (self.value)(u[0])
    }

    fn derivative(&self, u: &[f64]) -> Vec<f64> {
        vec![(self.slope)(u[0])]
    }

    fn riesz(&self, derivative: &[f64]) -> Vec<f64> {
        derivative.to_vec()
    }

    fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u[0] * v[0]
    }
}
