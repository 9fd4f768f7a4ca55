//! Fractional perimeters and related constants.
//!
//! The perimeter kernel here is |x − y|^{−n−s}. Interactions
//! `I_s(A,B) = ∫_A∫_B |x−y|^{−n−s}` are integrated over lines: writing
//! x = z + uθ, y = z + vθ gives dx dy = |u − v|^{n−1} du dv dz dθ, and on a
//! single line the pair integral between two intervals is elementary. Only
//! the bounded outer integral over lines (θ, z) is sampled, with jittered
//! strata, so the estimator has finite variance for every s ∈ (0,1).

use crate::error::{domain, Error, Result};
use crate::geometry::{complement_intervals, intersect_intervals, ShapeDescriptor};
use crate::quadrature::{stream_rng, tanh_sinh_ext, IntegralResult, QuadSpec};
use crate::specfun::{a_tilde_ext, phi_halfspace, sphere_area, unit_ball_volume, FracParams};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

type Intervals = Vec<(f64, f64)>;

/// ∫_a^b ∫_c^d (v − u)^{−1−s} dv du for b ≤ c; a may be −∞ and d may be +∞.
fn interval_pair(a: f64, b: f64, c: f64, d: f64, s: f64) -> f64 {
    let h = |t: f64| t.powf(1.0 - s);
    let v = match (a.is_finite(), d.is_finite()) {
        (false, false) => f64::INFINITY,
        (false, true) => h(d - b) - h(c - b),
        (true, false) => h(c - a) - h(c - b),
        (true, true) => (h(c - a) - h(c - b)) - (h(d - a) - h(d - b)),
    };
    v / (s * (1.0 - s))
}

/// Sum of pair integrals between two disjoint interval families on one line.
fn line_pairs(a: &[(f64, f64)], b: &[(f64, f64)], s: f64) -> f64 {
    let mut acc = 0.0;
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            if b0 >= a1 {
                acc += interval_pair(a0, a1, b0, b1, s);
            } else if a0 >= b1 {
                acc += interval_pair(b0, b1, a0, a1, s);
            } else {
                return f64::NAN;
            }
        }
    }
    acc
}

/// Disjoint shapes A, B and the order s of the kernel |x − y|^{−n−s}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetPair {
    pub a: ShapeDescriptor,
    pub b: ShapeDescriptor,
    pub s: f64,
}

impl SetPair {
    pub fn new(a: ShapeDescriptor, b: ShapeDescriptor, s: f64, samples: usize, seed: u64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return domain("s must lie in (0,1)");
        }
        if a.dim() != b.dim() {
            return domain("dimension mismatch");
        }
        let pair = SetPair { a, b, s };
        let (c, r) = pair.window()?;
        let mut rng = stream_rng(seed, 0);
        let n = c.len();
        for _ in 0..samples {
            let x: Vec<f64> = (0..n).map(|i| c[i] + r * (2.0 * rng.gen::<f64>() - 1.0)).collect();
            if pair.a.contains(&x) && pair.b.contains(&x) {
                return Err(Error::Validation(format!("sets overlap at {x:?}")));
            }
        }
        Ok(pair)
    }

    /// A ball containing one of the two sets; every interacting pair lies on a line meeting it.
    fn window(&self) -> Result<(Vec<f64>, f64)> {
        let bb = self.a.bounding_box().or_else(|| self.b.bounding_box()).ok_or_else(|| Error::Validation("one of the two sets must be bounded".into()))?;
        Ok(window_of(&bb))
    }
}

fn window_of(bb: &[(f64, f64)]) -> (Vec<f64>, f64) {
    let c = bb.iter().map(|(l, h)| 0.5 * (l + h)).collect();
    let r = bb.iter().map(|(l, h)| 0.25 * (h - l) * (h - l)).sum::<f64>().sqrt();
    (c, r.max(1e-300))
}

/// Integral over unoriented lines meeting the ball B_r(c) of `f(origin, direction)`.
fn over_lines<F>(c: &[f64], r: f64, f: F, samples: usize, seed: u64) -> Result<IntegralResult>
where
    F: Fn(&[f64], &[f64]) -> Result<f64> + Sync,
{
    let n = c.len();
    match n {
        1 => Ok(IntegralResult::exact(f(c, &[1.0])?)),
        2 | 3 => {
            let m = ((samples / 2) as f64).sqrt().floor().max(2.0) as usize;
            let rows: Vec<Result<(f64, f64)>> = (0..m)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(seed, i as u64 + 1);
                    let (mut sum, mut var) = (0.0, 0.0);
                    for j in 0..m {
                        let mut vals = [0.0; 2];
                        for v in vals.iter_mut() {
                            let (xi, eta) = ((i as f64 + rng.gen::<f64>()) / m as f64, (j as f64 + rng.gen::<f64>()) / m as f64);
                            let (o, d) = if n == 2 {
                                let th = PI * xi;
                                let d = [th.cos(), th.sin()];
                                let w = r * (2.0 * eta - 1.0);
                                ([c[0] - w * d[1], c[1] + w * d[0], 0.0], [d[0], d[1], 0.0])
                            } else {
                                // direction on the upper hemisphere (uniform in cos), offset uniform in the disk
                                let (u, psi) = (xi, 2.0 * PI * eta);
                                let st = (1.0 - u * u).sqrt();
                                let d = [st * psi.cos(), st * psi.sin(), u];
                                let (e1, e2) = perp_basis(d);
                                let (rho, phi) = (r * rng.gen::<f64>().sqrt(), 2.0 * PI * rng.gen::<f64>());
                                let (a, b) = (rho * phi.cos(), rho * phi.sin());
                                ([c[0] + a * e1[0] + b * e2[0], c[1] + a * e1[1] + b * e2[1], c[2] + a * e1[2] + b * e2[2]], d)
                            };
                            *v = f(&o[..n], &d[..n])?;
                        }
                        sum += 0.5 * (vals[0] + vals[1]);
                        var += 0.25 * (vals[0] - vals[1]).powi(2);
                    }
                    Ok((sum, var))
                })
                .collect();
            let (mut sum, mut var) = (0.0, 0.0);
            for row in rows {
                let (s, v) = row?;
                sum += s;
                var += v;
            }
            let cells = (m * m) as f64;
            let measure = if n == 2 { PI * 2.0 * r } else { 2.0 * PI * PI * r * r };
            Ok(IntegralResult { value: measure * sum / cells, err_estimate: measure * var.sqrt() / cells, evaluations: 2 * m as u64 * m as u64, converged: true })
        }
        _ => domain("line integrals implemented for n ≤ 3"),
    }
}

fn perp_basis(d: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if d[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = a[0] * d[0] + a[1] * d[1] + a[2] * d[2];
    let mut e1 = [a[0] - dot * d[0], a[1] - dot * d[1], a[2] - dot * d[2]];
    let l = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|v| *v /= l);
    let e2 = [d[1] * e1[2] - d[2] * e1[1], d[2] * e1[0] - d[0] * e1[2], d[0] * e1[1] - d[1] * e1[0]];
    (e1, e2)
}

fn mc_converged(mut r: IntegralResult, q: &QuadSpec) -> IntegralResult {
    r.converged = r.value.is_finite() && r.err_estimate <= q.abs_tol.max(q.rel_tol * r.value.abs());
    r
}

/// `I_s(A,B) = ∫_A∫_B |x − y|^{−n−s} dy dx`.
pub fn interaction(pair: &SetPair, q: &QuadSpec) -> Result<IntegralResult> {
    let (c, r) = pair.window()?;
    let s = pair.s;
    let f = |o: &[f64], d: &[f64]| -> Result<f64> { Ok(line_pairs(&pair.a.ray_intervals(o, d)?, &pair.b.ray_intervals(o, d)?, s)) };
    Ok(mc_converged(over_lines(&c, r, f, q.mc_samples, q.rng_seed)?, q))
}

/// `Per_s(E; Ω) = I(E∩Ω, Eᶜ∩Ω) + I(E∩Ω, Eᶜ\Ω) + I(E\Ω, Eᶜ∩Ω)`.
pub fn frac_perimeter(e: &ShapeDescriptor, omega: &ShapeDescriptor, p: FracParams, q: &QuadSpec) -> Result<IntegralResult> {
    if e.dim() != p.n || omega.dim() != p.n {
        return domain("dimension mismatch");
    }
    let bb = omega.bounding_box().ok_or_else(|| Error::Validation("Ω must be bounded".into()))?;
    let (c, r) = window_of(&bb);
    let s = p.s;
    let f = |o: &[f64], d: &[f64]| -> Result<f64> {
        let ie = e.ray_intervals(o, d)?;
        let io = omega.ray_intervals(o, d)?;
        let (iec, ioc) = (complement_intervals(&ie), complement_intervals(&io));
        let in_in: Intervals = intersect_intervals(&ie, &io);
        let out_in = intersect_intervals(&iec, &io);
        let out_out = intersect_intervals(&iec, &ioc);
        let in_out = intersect_intervals(&ie, &ioc);
        Ok(line_pairs(&in_in, &out_in, s) + line_pairs(&in_in, &out_out, s) + line_pairs(&in_out, &out_in, s))
    };
    Ok(mc_converged(over_lines(&c, r, f, q.mc_samples, q.rng_seed)?, q))
}

/// Per_s of the unit ball in the plane by the line formula, in closed form:
/// 2π 2^{1−s} B(1/2, (3−s)/2)/(s(1−s)).
pub fn disk_perimeter_closed(s: f64) -> Result<f64> {
    Ok(2.0 * PI * 2f64.powf(1.0 - s) * crate::specfun::beta(0.5, (3.0 - s) / 2.0)? / (s * (1.0 - s)))
}

/// H^{n−1}(∂E ∩ B_ρ) for balls and half-spaces (complements allowed).
pub fn classical_perimeter_in_ball(e: &ShapeDescriptor, rho: f64) -> Result<f64> {
    let n = e.dim();
    match e {
        ShapeDescriptor::Complement { of } => classical_perimeter_in_ball(of, rho),
        ShapeDescriptor::Halfspace { normal, offset } => {
            let h = offset.abs() / normal.iter().map(|v| v * v).sum::<f64>().sqrt();
            Ok(if h >= rho { 0.0 } else { unit_ball_volume(n - 1) * (rho * rho - h * h).powf((n as f64 - 1.0) / 2.0) })
        }
        ShapeDescriptor::Ball { center, radius } => {
            let dc = center.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = *radius;
            if dc + r <= rho {
                Ok(sphere_area(n) * r.powi(n as i32 - 1))
            } else if dc >= rho + r {
                Ok(0.0)
            } else if n == 2 {
                let k = ((rho * rho - dc * dc - r * r) / (2.0 * r * dc)).clamp(-1.0, 1.0);
                Ok(2.0 * r * (PI - k.acos()))
            } else {
                domain("partial sphere caps implemented for n = 2 only")
            }
        }
        _ => domain("classical perimeter available for balls and half-spaces"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interpolation {
    pub lhs: IntegralResult,
    pub rhs: f64,
    pub ratio: f64,
}

/// Per_s(E; B_R) against ε^{−(1−s)/s} R^{1−s}/(1−s) Per(E; B_{(1+ε^{−1/s})R}) + ε R^{n−s}/s.
pub fn interpolation_check(e: &ShapeDescriptor, big_r: f64, eps: f64, p: FracParams, q: &QuadSpec) -> Result<Interpolation> {
    let s = p.s;
    let top = 3f64.powf(-1.0 / s);
    if !(eps > 0.0 && eps < top) {
        return domain(format!("ε must lie in (0, 3^(−1/s)) = (0, {top:.6})"));
    }
    let ball = ShapeDescriptor::ball(vec![0.0; p.n], big_r);
    let lhs = frac_perimeter(e, &ball, p, q)?;
    let per = classical_perimeter_in_ball(e, (1.0 + eps.powf(-1.0 / s)) * big_r)?;
    let rhs = eps.powf(-(1.0 - s) / s) * big_r.powf(1.0 - s) / (1.0 - s) * per + eps * big_r.powf(p.nf() - s) / s;
    Ok(Interpolation { lhs, rhs, ratio: lhs.value / rhs })
}

/// Extension energy constant of the half-space datum, closed form.
pub fn halfspace_energy(p: FracParams) -> f64 {
    phi_halfspace(p)
}

/// The same constant as ã(s)² ω_{n−1} ∫₀¹ r^{−s}(1−r²)^{(n−1)/2} dr ∫₀^π sin^{s−1}θ dθ.
pub fn halfspace_energy_product(p: FracParams, q: &QuadSpec) -> IntegralResult {
    let (n, s) = (p.nf(), p.s);
    let radial = tanh_sinh_ext(|r, _, db| r.powf(-s) * (db * (2.0 - db)).powf((n - 1.0) / 2.0), 0.0, 1.0, q.abs_tol, q.rel_tol, 12);
    // symmetric about π/2: twice the half interval, using the distance to 0
    let angular = tanh_sinh_ext(|_, da, _| da.sin().powf(s - 1.0), 0.0, PI / 2.0, q.abs_tol, q.rel_tol, 12).scale(2.0);
    let c = a_tilde_ext(s).powi(2) * unit_ball_volume(p.n - 1);
    IntegralResult {
        value: c * radial.value * angular.value,
        err_estimate: c * (radial.value.abs() * angular.err_estimate + angular.value.abs() * radial.err_estimate),
        evaluations: radial.evaluations + angular.evaluations,
        converged: radial.converged && angular.converged,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n: usize,
    /// ∫_{B₁} x₁⁴ dx.
    pub ball_quadrature: IntegralResult,
    /// ∫_{S^{n−1}} θ₁⁴ dH^{n−1}.
    pub sphere_quadrature: IntegralResult,
    pub ball_closed: f64,
    pub sphere_closed: f64,
    pub ball_mc: McEstimate,
    pub sphere_mc: McEstimate,
}

/// Fourth moments of the ball and sphere: 3|S^{n−1}|/(n(n+2)(n+4)) and 3|S^{n−1}|/(n(n+2)).
pub fn moment_integrals(n: usize, q: &QuadSpec) -> Result<Moments> {
    if !(2..=8).contains(&n) {
        return domain("moments implemented for 2 ≤ n ≤ 8");
    }
    let nf = n as f64;
    let area = sphere_area(n);
    let sphere_closed = 3.0 * area / (nf * (nf + 2.0));
    let ball_closed = sphere_closed / (nf + 4.0);
    // slices x₁ = t of the ball are (n−1)-balls of radius √(1−t²)
    let ball_q = tanh_sinh_ext(|t, da, db| t.powi(4) * (da * db).powf((nf - 1.0) / 2.0), -1.0, 1.0, q.abs_tol, q.rel_tol, 12).scale(unit_ball_volume(n - 1));
    // θ₁ = cos φ, with the (n−2)-sphere of radius sin φ
    let sphere_q = tanh_sinh_ext(|phi, da, db| phi.cos().powi(4) * da.min(db).sin().powf(nf - 2.0), 0.0, PI, q.abs_tol, q.rel_tol, 12).scale(sphere_area(n - 1));

    let samples = q.mc_samples.max(1000);
    let chunks = 64usize;
    let per = samples.div_ceil(chunks);
    let parts: Vec<(f64, f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(q.rng_seed, 1000 + k as u64);
            let (mut b1, mut b2, mut s1, mut s2) = (0.0, 0.0, 0.0, 0.0);
            let mut x = vec![0.0; n];
            for _ in 0..per {
                x.iter_mut().for_each(|v| *v = 2.0 * rng.gen::<f64>() - 1.0);
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let fb = if r2 < 1.0 { 2f64.powi(n as i32) * x[0].powi(4) } else { 0.0 };
                b1 += fb;
                b2 += fb * fb;
                x.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                let g2: f64 = x.iter().map(|v| v * v).sum();
                let fs = area * x[0].powi(4) / (g2 * g2);
                s1 += fs;
                s2 += fs * fs;
            }
            (b1, b2, s1, s2)
        })
        .collect();
    let m = (per * chunks) as f64;
    let est = |a: f64, b: f64| {
        let mean = a / m;
        McEstimate { mean, std_err: ((b / m - mean * mean).max(0.0) / (m - 1.0)).sqrt() }
    };
    let (b1, b2, s1, s2) = parts.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1, acc.2 + v.2, acc.3 + v.3));
    Ok(Moments { n, ball_quadrature: ball_q, sphere_quadrature: sphere_q, ball_closed, sphere_closed, ball_mc: est(b1, b2), sphere_mc: est(s1, s2) })
}
