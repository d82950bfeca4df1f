//! Sampled verification of the structural hypotheses on `V` and `f̃`.
//!
//! Every verdict is relative to a finite, nested sample set: doubling
//! `u_points` yields a superset of magnitudes, and the `x` lattice is fixed.
//! Exponents are fitted by extrapolation: constants are fitted on the inner
//! half of the magnitude range `(1, U/2]` and validated on the outer half, so
//! a growth rate that the exponent cannot absorb shows up as a negative
//! margin instead of an inflated constant.
//!
//! Margins are relative slacks `(rhs − lhs) / (1 + |rhs|)`; a counterexample
//! violates its inequality by at least the magnitude of its slack.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Point, Pointwise, Potential};

const MAX_COUNTEREXAMPLES: usize = 10;
const ROUNDING_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    V1,
    S1,
    S2,
    S3,
    AR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Point>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    pub slack: f64,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub verdict: Verdict,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub verdict: Verdict,
    pub margin: f64,
    pub fitted: BTreeMap<String, f64>,
    pub samples: String,
    pub sub_checks: Vec<SubCheck>,
    pub counterexamples: Vec<Counterexample>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SignRange {
    #[default]
    Both,
    Positive,
    Negative,
}

/// Sample lattice for the `(x, u)` conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleSpec {
    /// Largest sampled `|u|`.
    pub u_max: f64,
    /// Half linear, half logarithmic magnitudes.
    pub u_points: usize,
    /// Decades below `u_max` covered by the logarithmic half.
    pub u_decades: f64,
    pub sign: SignRange,
    /// `x` on 7 fixed directions at radii `k * x_radius / (x_points - 1)`.
    pub x_radius: f64,
    pub x_points: usize,
    pub r0: f64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            u_max: 50.0,
            u_points: 10_000,
            u_decades: 6.0,
            sign: SignRange::Both,
            x_radius: 8.0,
            x_points: 33,
            r0: 1.0,
        }
    }
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.u_max > 2.0) || !self.u_max.is_finite() {
            return Err(Error::Config(format!("checks.samples.u_max must exceed 2, got {}", self.u_max)));
        }
        if self.u_points < 8 || !(self.u_decades > 0.0) || self.x_points < 1 || !(self.x_radius >= 0.0) {
            return Err(Error::Config("checks.samples: need u_points >= 8, u_decades > 0, x_points >= 1".into()));
        }
        if !(self.r0 >= 0.0) || !self.r0.is_finite() {
            return Err(Error::Config(format!("checks.samples.r0 must be nonnegative, got {}", self.r0)));
        }
        Ok(())
    }

    /// Sorted, positive sampled magnitudes.
    pub fn magnitudes(&self) -> Vec<f64> {
        let half = self.u_points / 2;
        let mut out: Vec<f64> = (1..=half).map(|k| self.u_max * (k as f64 / half as f64)).collect();
        out.extend((0..half).map(|k| self.u_max * 10f64.powf(-self.u_decades * (1.0 - k as f64 / half as f64))));
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Signed `u` samples (zero excluded).
    pub fn u_values(&self) -> Vec<f64> {
        signed(&self.magnitudes(), self.sign)
    }

    pub fn x_values(&self) -> Vec<Point> {
        let s = 1.0 / 3f64.sqrt();
        let dirs: [Point; 7] = [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
            [s, s, s],
        ];
        let mut out = vec![[0.0; 3]];
        for k in 1..self.x_points {
            let r = self.x_radius * k as f64 / (self.x_points - 1) as f64;
            for d in &dirs {
                out.push([r * d[0], r * d[1], r * d[2]]);
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        format!(
            "{} magnitudes in [{:e}, {}] ({:?} sign), {} x points to radius {}",
            self.magnitudes().len(),
            self.u_max * 10f64.powf(-self.u_decades),
            self.u_max,
            self.sign,
            self.x_values().len(),
            self.x_radius
        )
    }
}

fn signed(magnitudes: &[f64], sign: SignRange) -> Vec<f64> {
    let neg = magnitudes.iter().rev().map(|m| -m);
    match sign {
        SignRange::Positive => magnitudes.to_vec(),
        SignRange::Negative => neg.collect(),
        SignRange::Both => neg.chain(magnitudes.iter().copied()).collect(),
    }
}

fn slack(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / (1.0 + rhs.abs())
}

/// `4 + k/20`, `k = 1..=39`.
fn q_grid() -> Vec<f64> {
    (1..40).map(|k| 4.0 + k as f64 / 20.0).collect()
}

/// `1 + k/20`, `k = 1..=40`.
fn kappa_grid() -> Vec<f64> {
    (1..=40).map(|k| 1.0 + k as f64 / 20.0).collect()
}

/// `4 + k/20` up to 10.
pub fn default_mu_grid() -> Vec<f64> {
    (1..=120).map(|k| 4.0 + k as f64 / 20.0).collect()
}

/// Worst `MAX_COUNTEREXAMPLES` entries by slack, ties by sample order.
fn worst(mut cands: Vec<(usize, Counterexample)>) -> Vec<Counterexample> {
    cands.sort_by(|a, b| a.1.slack.total_cmp(&b.1.slack).then(a.0.cmp(&b.0)));
    cands.into_iter().take(MAX_COUNTEREXAMPLES).map(|c| c.1).collect()
}

fn values(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Per-`u` extremum over the `x` lattice, with the maximizing/minimizing `x`.
fn over_x<F>(xs: &[Point], us: &[f64], g: F, take_max: bool) -> Vec<(f64, Point)>
where
    F: Fn(&Point, f64) -> f64 + Sync,
{
    us.par_iter()
        .map(|&u| {
            let mut best = (g(&xs[0], u), xs[0]);
            for x in &xs[1..] {
                let v = g(x, u);
                if (take_max && v > best.0) || (!take_max && v < best.0) {
                    best = (v, *x);
                }
            }
            best
        })
        .collect()
}

/// `|f̃(x,u)| ≤ c₁|u|³ + c₂|u|^{q−1}` with `q ∈ (4, 6)`.
///
/// `c₁` covers `|u| ≤ 1`; `c₂(q)` is fitted on `1 < |u| ≤ U/2`. The reported
/// `q` is the smallest grid value for which `|f̃|/|u|^{q−1}` on `U/2 < |u| ≤ U`
/// stays below both `c₂` and its maximum on `U/4 < |u| ≤ U/2`; the verdict is
/// the full bound on every sample.
pub fn check_s1(nl: &dyn Pointwise, samples: &SampleSpec) -> ConditionReport {
    let us = samples.u_values();
    let xs = samples.x_values();
    let sup = over_x(&xs, &us, |x, u| nl.f(x, u).abs(), true);
    let half = 0.5 * samples.u_max;
    let c1 = us
        .iter()
        .zip(&sup)
        .filter(|(u, _)| u.abs() <= 1.0)
        .map(|(u, s)| s.0 / u.abs().powi(3))
        .fold(0.0, f64::max);
    let fit_c2 = |q: f64| {
        us.iter()
            .zip(&sup)
            .filter(|(u, _)| u.abs() > 1.0 && u.abs() <= half)
            .map(|(u, s)| s.0 / u.abs().powf(q - 1.0))
            .fold(0.0, f64::max)
    };
    let grid = q_grid();
    // the tail ratio must not exceed its maximum over the preceding quarter
    let window = |q: f64, lo: f64, hi: f64| {
        us.iter()
            .zip(&sup)
            .filter(|(u, _)| u.abs() > lo && u.abs() <= hi)
            .map(|(u, s)| s.0 / u.abs().powf(q - 1.0))
            .fold(0.0, f64::max)
    };
    let outer_ok = |q: f64, c2: f64| {
        let tail = window(q, half, samples.u_max);
        tail <= window(q, 0.5 * half, half) && tail <= c2
    };
    let chosen = grid.iter().map(|&q| (q, fit_c2(q))).find(|&(q, c2)| outer_ok(q, c2));
    let (q, c2, extrapolates) = match chosen {
        Some((q, c2)) => (q, c2, true),
        None => {
            let q = *grid.last().expect("q grid is not empty");
            (q, fit_c2(q), false)
        }
    };
    let mut cands = Vec::new();
    let mut margin = f64::INFINITY;
    for (i, (u, s)) in us.iter().zip(&sup).enumerate() {
        let a = u.abs();
        let bound = c1 * a.powi(3) + c2 * a.powf(q - 1.0);
        let sl = slack(s.0, bound);
        margin = margin.min(sl);
        if sl < 0.0 {
            cands.push((
                i,
                Counterexample {
                    x: Some(s.1),
                    u: Some(*u),
                    slack: sl,
                    values: values(&[("abs_f", s.0), ("bound", bound)]),
                },
            ));
        }
    }
    let mut notes = Vec::new();
    let smallest = us.iter().map(|u| u.abs()).fold(f64::INFINITY, f64::min);
    let at_smallest = us
        .iter()
        .zip(&sup)
        .filter(|(u, _)| u.abs() == smallest)
        .map(|(u, s)| s.0 / u.abs().powi(3))
        .fold(0.0, f64::max);
    if c1 > 0.0 && at_smallest >= 0.999 * c1 && c1 > 1e3 {
        notes.push(format!(
            "c1 = {c1:e} is set by the smallest sampled |u| = {smallest:e}: |f|/|u|^3 grows towards u = 0, so the cubic bound near the origin holds on the sample only"
        ));
    }
    if !extrapolates {
        notes.push("no q in (4, 6) extrapolates from the inner to the outer half; growth saturates at q -> 6".into());
    }
    let verdict = if extrapolates && margin >= 0.0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    if !extrapolates {
        for (i, (u, s)) in us.iter().zip(&sup).enumerate().filter(|(_, (u, _))| u.abs() > half) {
            let bound = c2 * u.abs().powf(q - 1.0);
            let sl = slack(s.0, bound);
            if sl < 0.0 {
                cands.push((
                    i,
                    Counterexample {
                        x: Some(s.1),
                        u: Some(*u),
                        slack: sl,
                        values: values(&[("abs_f", s.0), ("c2_term", bound)]),
                    },
                ));
                margin = margin.min(sl);
            }
        }
    }
    ConditionReport {
        condition: Condition::S1,
        verdict,
        margin,
        fitted: values(&[("c1", c1), ("c2", c2), ("q", q)]),
        samples: samples.describe(),
        sub_checks: vec![],
        counterexamples: worst(cands),
        notes,
    }
}

/// (a) `|F̃|/u⁴` at `|u| = 10, 10², 10³` increasing with growth at least
/// `divergence_factor`; (b) `inf_x F̃(x,u) ≥ c₃|u|^τ ≥ 0` for `|u| ≥ r₀`.
///
/// (a) is inconclusive when the ratio increases but by less than the factor.
/// In (b), `r₀` starts at the configured value and is raised past the last
/// sampled magnitude where `inf_x F̃ < 0`; it fails if no sampled `r₀ < U`
/// works.
pub fn check_s2(nl: &dyn Pointwise, samples: &SampleSpec, divergence_factor: f64) -> ConditionReport {
    let xs = samples.x_values();
    let mut sub_checks = Vec::new();
    let mut cands = Vec::new();
    let mut notes = Vec::new();
    let mut fitted = BTreeMap::new();

    // (a)
    let probes = signed(&[10.0, 100.0, 1000.0], samples.sign);
    let mut verdict_a = Verdict::Pass;
    let mut margin_a = f64::INFINITY;
    for sign_probes in probes.chunks(3) {
        let mut ordered = sign_probes.to_vec();
        ordered.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        let inf = over_x(&xs, &ordered, |x, u| nl.primitive(x, u).abs() / u.powi(4), false);
        let ratios: Vec<f64> = inf.iter().map(|p| p.0).collect();
        let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
        let growth = ratios[2] / ratios[0];
        let v = if !increasing {
            Verdict::Fail
        } else if growth >= divergence_factor {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        };
        let m = slack(divergence_factor * ratios[0], ratios[2]);
        margin_a = margin_a.min(m);
        if v == Verdict::Fail {
            for (i, (u, p)) in ordered.iter().zip(&inf).enumerate() {
                cands.push((
                    i,
                    Counterexample {
                        x: Some(p.1),
                        u: Some(*u),
                        slack: m.min(0.0),
                        values: values(&[("abs_F_over_u4", p.0)]),
                    },
                ));
            }
        }
        let key = if ordered[0] < 0.0 { "growth_negative" } else { "growth_positive" };
        fitted.insert(key.to_string(), growth);
        verdict_a = verdict_a.and(v);
    }
    sub_checks.push(SubCheck {
        name: "superquartic".into(),
        verdict: verdict_a,
        margin: margin_a,
    });

    // (b)
    let us: Vec<f64> = samples.u_values();
    let inf = over_x(&xs, &us, |x, u| nl.primitive(x, u), false);
    let mut r0 = samples.r0;
    for (u, p) in us.iter().zip(&inf) {
        if u.abs() >= r0 && p.0 < 0.0 {
            r0 = r0.max(u.abs());
        }
    }
    // first sampled magnitude strictly beyond the last violation
    let raised = r0 > samples.r0;
    if raised {
        r0 = samples
            .magnitudes()
            .into_iter()
            .find(|&m| m > r0)
            .unwrap_or(f64::INFINITY);
    }
    let tail: Vec<(f64, (f64, Point))> = us
        .iter()
        .zip(&inf)
        .filter(|(u, _)| u.abs() >= r0)
        .map(|(u, p)| (*u, *p))
        .collect();
    let (verdict_b, margin_b) = if tail.len() < 2 {
        // every magnitude is a violation at the configured r0
        let mut m = f64::INFINITY;
        for (i, (u, p)) in us.iter().zip(&inf).enumerate().filter(|(_, (u, _))| u.abs() >= samples.r0) {
            let sl = slack(0.0, p.0);
            m = m.min(sl);
            if sl < 0.0 {
                cands.push((
                    i,
                    Counterexample {
                        x: Some(p.1),
                        u: Some(*u),
                        slack: sl,
                        values: values(&[("F", p.0)]),
                    },
                ));
            }
        }
        notes.push(format!(
            "inf_x F < 0 at magnitudes up to |u| = {}; no r0 on the sample works",
            samples.u_max
        ));
        (Verdict::Fail, m)
    } else {
        // largest c3 over tau in (0, 2)
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in 1..40 {
            let tau = k as f64 / 20.0;
            let c3 = tail
                .iter()
                .map(|(u, p)| p.0 / u.abs().powf(tau))
                .fold(f64::INFINITY, f64::min);
            if c3 > best.0 {
                best = (c3, tau);
            }
        }
        let (c3, tau) = best;
        fitted.insert("c3".into(), c3.max(0.0));
        fitted.insert("tau".into(), tau);
        if raised {
            notes.push(format!("r0 raised from {} to {r0} to clear F < 0 at small |u|", samples.r0));
        }
        if c3 <= 0.0 {
            notes.push("c3 = 0: only the non-strict bound F >= 0 holds".into());
        }
        let m = tail.iter().map(|(_, p)| slack(0.0, p.0)).fold(f64::INFINITY, f64::min);
        (if c3 >= 0.0 { Verdict::Pass } else { Verdict::Fail }, m)
    };
    fitted.insert("r0".into(), if r0.is_finite() { r0 } else { samples.u_max });
    sub_checks.push(SubCheck {
        name: "lower-bound".into(),
        verdict: verdict_b,
        margin: margin_b,
    });

    ConditionReport {
        condition: Condition::S2,
        verdict: verdict_a.and(verdict_b),
        margin: margin_a.min(margin_b),
        fitted,
        samples: samples.describe(),
        sub_checks,
        counterexamples: worst(cands),
        notes,
    }
}

/// (a) `𝓕 = ¼uf̃ − F̃ ≥ 0` on every sample; (b) `|F̃|^κ ≤ c₄|u|^{2κ}𝓕` for
/// `|u| ≥ r₀`, reporting the largest `κ > 1` on the grid whose `c₄` fitted on
/// the inner half holds on the outer half.
pub fn check_s3(nl: &dyn Pointwise, samples: &SampleSpec) -> ConditionReport {
    let us = samples.u_values();
    let xs = samples.x_values();
    // differences within the rounding floor of the two terms count as zero
    let script = |x: &Point, u: f64| {
        let (a, b) = (0.25 * u * nl.f(x, u), nl.primitive(x, u));
        let d = a - b;
        if d.abs() <= ROUNDING_FLOOR * (a.abs() + b.abs()) {
            0.0
        } else {
            d
        }
    };
    let mut cands = Vec::new();
    let mut notes = Vec::new();
    let mut fitted = BTreeMap::new();

    // (a)
    let inf = over_x(&xs, &us, script, false);
    let mut margin_a = f64::INFINITY;
    for (i, (u, p)) in us.iter().zip(&inf).enumerate() {
        let sl = slack(0.0, p.0);
        margin_a = margin_a.min(sl);
        if sl < 0.0 {
            cands.push((
                i,
                Counterexample {
                    x: Some(p.1),
                    u: Some(*u),
                    slack: sl,
                    values: values(&[("script_F", p.0)]),
                },
            ));
        }
    }
    let verdict_a = if margin_a >= 0.0 { Verdict::Pass } else { Verdict::Fail };

    // (b): log of |F|^κ / (|u|^{2κ} 𝓕) is κ (ln|F| − 2 ln|u|) − ln 𝓕
    let half = 0.5 * samples.u_max;
    let mut terms: Vec<(f64, f64, f64)> = Vec::new(); // (|u|, a, b)
    let mut degenerate = Vec::new();
    for (i, &u) in us.iter().enumerate().filter(|(_, u)| u.abs() >= samples.r0) {
        for x in &xs {
            let big_f = nl.primitive(x, u).abs();
            let s = script(x, u);
            if big_f == 0.0 {
                continue;
            }
            if s <= 0.0 {
                degenerate.push((
                    i,
                    Counterexample {
                        x: Some(*x),
                        u: Some(u),
                        slack: slack(big_f, 0.0),
                        values: values(&[("abs_F", big_f), ("script_F", s)]),
                    },
                ));
                continue;
            }
            terms.push((u.abs(), big_f.ln() - 2.0 * u.abs().ln(), -s.ln()));
        }
    }
    let (verdict_b, margin_b) = if !degenerate.is_empty() {
        let m = degenerate.iter().map(|c| c.1.slack).fold(f64::INFINITY, f64::min);
        notes.push("script_F <= 0 where F != 0: no (c4, kappa) can hold".into());
        cands.extend(degenerate);
        let v = if verdict_a == Verdict::Pass && margin_a == 0.0 {
            Verdict::Inconclusive
        } else {
            Verdict::Fail
        };
        (v, m)
    } else if terms.is_empty() {
        notes.push("F = 0 on every sample beyond r0; (b) holds trivially".into());
        (Verdict::Pass, 0.0)
    } else {
        let log_ratio = |k: f64, t: &(f64, f64, f64)| k * t.1 + t.2;
        let fit = |k: f64| {
            terms
                .iter()
                .filter(|t| t.0 <= half)
                .map(|t| log_ratio(k, t))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let holds = |k: f64, log_c4: f64| terms.iter().filter(|t| t.0 > half).all(|t| log_ratio(k, t) <= log_c4);
        let best = kappa_grid().into_iter().rev().find(|&k| holds(k, fit(k)));
        match best {
            Some(k) => {
                let log_c4 = terms.iter().map(|t| log_ratio(k, t)).fold(f64::NEG_INFINITY, f64::max);
                fitted.insert("kappa".into(), k);
                fitted.insert("c4".into(), log_c4.exp());
                (Verdict::Pass, 0.0)
            }
            None => {
                notes.push("no kappa > 1 on the grid extrapolates from the inner to the outer half".into());
                let k = kappa_grid()[0];
                let log_c4 = fit(k);
                let m = terms
                    .iter()
                    .filter(|t| t.0 > half)
                    .map(|t| (log_c4 - log_ratio(k, t)).min(0.0))
                    .fold(0.0, f64::min);
                (Verdict::Fail, m.exp() - 1.0)
            }
        }
    };
    fitted.insert("r0".into(), samples.r0);

    ConditionReport {
        condition: Condition::S3,
        verdict: verdict_a.and(verdict_b),
        margin: margin_a.min(margin_b),
        fitted,
        samples: samples.describe(),
        sub_checks: vec![
            SubCheck {
                name: "nonnegative".into(),
                verdict: verdict_a,
                margin: margin_a,
            },
            SubCheck {
                name: "power-bound".into(),
                verdict: verdict_b,
                margin: margin_b,
            },
        ],
        counterexamples: worst(cands),
        notes,
    }
}

/// `0 < μF(x,u) ≤ u f(x,u)` for `u ≠ 0`; passes iff some `μ > 4` on the grid
/// satisfies both on every sample. The reported `μ` is the largest passing one.
pub fn check_ar(nl: &dyn Pointwise, mu_grid: &[f64], samples: &SampleSpec) -> Result<ConditionReport> {
    if mu_grid.is_empty() || mu_grid.iter().any(|m| !(*m > 4.0)) {
        return Err(Error::Config("mu grid must be nonempty with every mu > 4".into()));
    }
    let us = samples.u_values();
    let xs = samples.x_values();
    let pairs: Vec<(Point, f64, f64, f64)> = us
        .par_iter()
        .flat_map_iter(|&u| xs.iter().map(move |x| (*x, u, nl.primitive(x, u), u * nl.f(x, u))))
        .collect();
    // slack(mu) = min(mu a, c - mu a) with a = F / (1 + |uf|), c = uf / (1 + |uf|)
    let (a, c): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .map(|p| {
            let scale = 1.0 + p.3.abs();
            (p.2 / scale, p.3 / scale)
        })
        .unzip();
    let margin_at = |mu: f64| {
        a.iter()
            .zip(&c)
            .map(|(a, c)| (mu * a).min(c - mu * a))
            .fold(f64::INFINITY, f64::min)
    };
    let margins: Vec<f64> = mu_grid.par_iter().map(|&mu| margin_at(mu)).collect();
    // largest passing mu, else the best margin
    let best = match margins.iter().rposition(|m| *m > 0.0) {
        Some(i) => i,
        None => (0..margins.len()).fold(0, |b, i| if margins[i] > margins[b] { i } else { b }),
    };
    let mu = mu_grid[best];
    let margin = margins[best];
    let mut violations: Vec<(f64, usize)> = a
        .iter()
        .zip(&c)
        .enumerate()
        .map(|(i, (a, c))| ((mu * a).min(c - mu * a), i))
        .filter(|v| v.0 <= 0.0)
        .collect();
    violations.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let cands = violations
        .into_iter()
        .take(MAX_COUNTEREXAMPLES)
        .map(|(sl, i)| {
            let p = &pairs[i];
            (
                i,
                Counterexample {
                    x: Some(p.0),
                    u: Some(p.1),
                    slack: sl,
                    values: values(&[("mu_F", mu * p.2), ("u_f", p.3)]),
                },
            )
        })
        .collect();
    Ok(ConditionReport {
        condition: Condition::AR,
        verdict: if margin > 0.0 { Verdict::Pass } else { Verdict::Fail },
        margin,
        fitted: values(&[("mu", mu)]),
        samples: samples.describe(),
        sub_checks: vec![],
        counterexamples: worst(cands),
        notes: vec![],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct V1Spec {
    pub d0: f64,
    pub m_list: Vec<f64>,
    pub y_radii: Vec<f64>,
    pub mc_samples: usize,
}

impl Default for V1Spec {
    fn default() -> Self {
        Self {
            d0: 1.0,
            m_list: vec![2.0],
            y_radii: vec![5.0, 10.0, 20.0],
            mc_samples: 1_000_000,
        }
    }
}

impl V1Spec {
    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > 0.0) || self.m_list.is_empty() || self.y_radii.len() < 3 || self.mc_samples == 0 {
            return Err(Error::Config(
                "checks.v1: need d0 > 0, nonempty m_list, at least 3 y_radii, mc_samples > 0".into(),
            ));
        }
        Ok(())
    }
}

const MC_CHUNK: usize = 1 << 16;

/// Fraction of uniform points of `B(y, d0)` with `V ≤ m`; chunks draw from
/// their own seeded streams and are summed in order.
fn sublevel_fraction(potential: &Potential, y: &Point, d0: f64, m: f64, n: usize, seed: u64) -> f64 {
    let chunks = n.div_ceil(MC_CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (c as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03));
            let count = MC_CHUNK.min(n - c * MC_CHUNK);
            let mut hits = 0;
            let mut drawn = 0;
            while drawn < count {
                let p: Point = [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ];
                if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] > 1.0 {
                    continue;
                }
                drawn += 1;
                let x = [y[0] + d0 * p[0], y[1] + d0 * p[1], y[2] + d0 * p[2]];
                if potential.eval_at(&x) <= m {
                    hits += 1;
                }
            }
            hits
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    hits as f64 / n as f64
}

/// Monte Carlo estimates of `meas{x : |x − y| ≤ d0, V(x) ≤ M}` along
/// `y = |y| e₁`. For each `M`, over the three largest radii: pass if the
/// estimates are all zero or strictly decrease by more than the confidence
/// bands `3 vol √(p(1−p)/n)`; inconclusive if they decrease within the
/// bands; fail otherwise.
pub fn check_v1(potential: &Potential, spec: &V1Spec, seed: u64) -> Result<ConditionReport> {
    spec.validate()?;
    let vol = 4.0 / 3.0 * PI * spec.d0.powi(3);
    let mut radii = spec.y_radii.clone();
    radii.sort_by(f64::total_cmp);
    let last3 = &radii[radii.len() - 3..];
    let mut verdict = Verdict::Pass;
    let mut margin = f64::INFINITY;
    let mut fitted = BTreeMap::new();
    let mut cands = Vec::new();
    let mut notes = Vec::new();
    for (mi, &m) in spec.m_list.iter().enumerate() {
        let mut est = Vec::new();
        for (yi, &r) in radii.iter().enumerate() {
            let s = seed ^ ((mi as u64) << 32 | yi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let p = sublevel_fraction(potential, &[r, 0.0, 0.0], spec.d0, m, spec.mc_samples, s);
            let band = 3.0 * vol * (p * (1.0 - p) / spec.mc_samples as f64).sqrt();
            fitted.insert(format!("measure[M={m}][|y|={r}]"), p * vol);
            if last3.contains(&r) {
                est.push((r, p * vol, band));
            }
        }
        let all_zero = est.iter().all(|e| e.1 == 0.0);
        let mut v = Verdict::Pass;
        if !all_zero {
            for w in est.windows(2) {
                let drop = w[0].1 - w[1].1;
                let band = w[0].2 + w[1].2;
                let sl = drop - band;
                margin = margin.min(sl / (1.0 + w[0].1));
                if drop <= 0.0 {
                    v = Verdict::Fail;
                    cands.push((
                        mi,
                        Counterexample {
                            x: Some([w[1].0, 0.0, 0.0]),
                            u: None,
                            slack: sl / (1.0 + w[0].1),
                            values: values(&[("M", m), ("measure_inner", w[0].1), ("measure_outer", w[1].1)]),
                        },
                    ));
                } else if sl <= 0.0 && v == Verdict::Pass {
                    v = Verdict::Inconclusive;
                }
            }
        } else {
            margin = margin.min(0.0);
            notes.push(format!("M = {m}: sublevel set empty on every sampled ball"));
        }
        verdict = verdict.and(v);
    }
    Ok(ConditionReport {
        condition: Condition::V1,
        verdict,
        margin,
        fitted,
        samples: format!(
            "{} Monte Carlo points per ball, d0 = {}, |y| in {:?}, M in {:?}",
            spec.mc_samples, spec.d0, radii, spec.m_list
        ),
        sub_checks: vec![],
        counterexamples: worst(cands),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FnPointwise, Nonlinearity};

    fn small() -> SampleSpec {
        SampleSpec {
            u_points: 2000,
            x_points: 9,
            ..Default::default()
        }
    }

    #[test]
    fn magnitudes_are_nested() {
        let a = small().magnitudes();
        let b = SampleSpec { u_points: 4000, ..small() }.magnitudes();
        assert!(a.iter().all(|m| b.contains(m)));
        assert_eq!(*a.last().unwrap(), 50.0);
    }

    #[test]
    fn s1_cubic_passes() {
        let cubic = FnPointwise::new("u^3", |_: &Point, u: f64| u * u * u, |_: &Point, u: f64| 0.25 * u.powi(4));
        let r = check_s1(&cubic, &small());
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.margin >= 0.0);
    }

    #[test]
    fn s1_quintic_fails_at_q_six() {
        let p = Nonlinearity::Power { coefficient: 1.0, exponent: 6.0 };
        let r = check_s1(&p, &small());
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.margin < 0.0);
        assert!(!r.counterexamples.is_empty());
        assert_eq!(r.fitted["q"], 5.95);
    }

    #[test]
    fn s2_log_growth_is_slow() {
        let f = FnPointwise::new(
            "u^4 ln(1+|u|)",
            |_: &Point, u: f64| 4.0 * u.powi(3) * u.abs().ln_1p() + u.powi(4) * u.signum() / (1.0 + u.abs()),
            |_: &Point, u: f64| u.powi(4) * u.abs().ln_1p(),
        );
        let r = check_s2(&f, &small(), 10.0);
        let a = &r.sub_checks[0];
        assert_eq!(a.verdict, Verdict::Inconclusive);
        assert!(r.fitted["growth_positive"] > 1.0);
        assert_eq!(check_s2(&f, &small(), 2.5).sub_checks[0].verdict, Verdict::Pass);
    }

    #[test]
    fn s3_pure_quartic_is_degenerate() {
        let p = Nonlinearity::Power { coefficient: 1.0, exponent: 4.0 };
        let r = check_s3(&p, &small());
        assert_eq!(r.sub_checks[0].verdict, Verdict::Pass);
        assert_ne!(r.sub_checks[1].verdict, Verdict::Pass);
        assert!(!r.counterexamples.is_empty());
    }

    #[test]
    fn ar_examples() {
        let p = Nonlinearity::Power { coefficient: 1.0, exponent: 5.0 };
        let r = check_ar(&p, &default_mu_grid(), &small()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.fitted["mu"], 4.95);
        let r = check_ar(&Nonlinearity::Zero, &default_mu_grid(), &small()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(check_ar(&Nonlinearity::Zero, &[3.0], &small()).is_err());
    }

    #[test]
    fn v1_constant_potentials() {
        let spec = V1Spec {
            mc_samples: 20_000,
            ..Default::default()
        };
        let high = check_v1(&Potential::Constant { value: 5.0 }, &V1Spec { m_list: vec![1.0], ..spec.clone() }, 3).unwrap();
        assert_eq!(high.verdict, Verdict::Pass);
        let low = check_v1(&Potential::Constant { value: 0.0 }, &V1Spec { m_list: vec![1.0], ..spec }, 3).unwrap();
        assert_eq!(low.verdict, Verdict::Fail);
        assert!(!low.counterexamples.is_empty());
    }
}
