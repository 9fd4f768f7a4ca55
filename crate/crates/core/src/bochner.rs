//! Dimension lifting.
//!
//! For f even in x₁, the fractional Laplacian of x₁f in ℝⁿ equals x₁ times
//! the fractional Laplacian in ℝ^{n+2} of the lift f̃(x̃) = f(|(x̃₁,x̃₂,x̃₃)|, x̃₄, …).
//! The lifted side is never integrated in n+2 variables: integrating f̃ over
//! the 2-sphere of the first three coordinates gives, at X = ((x₁,0,0), x′),
//!
//! `(−Δ)^s f̃(X) = c_{n+2,s} 2π/((n+2s)x₁) · PV∫_{ℝⁿ₊} (f(x) − f(y)) y₁ (K(x−y) − K(x*−y)) dy`
//!
//! with K(z) = |z|^{−n−2s}, an n-dimensional half-space integral.
//!
//! The second half of the module covers radial Lévy kernels: the lift
//! j_{n+2} = −j_n′/(2πr) and the symbol written as a Hankel transform.

use crate::error::{domain, Error, Result};
use crate::fraclap::{
    along, angular_breaks, cutoff_sequence, frac_lap_pv, half_sphere, inner_tol, local_cutoffs, norm, pieces, surface_breaks, FnField,
    Surface,
};
use crate::quadrature::{pv_limit, semi_infinite, tanh_sinh, IntegralResult, QuadSpec};
use crate::specfun::{bessel_j, c_frac, gamma, FracParams};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

type Profile = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Function on ℝⁿ even in its first variable.
#[derive(Clone)]
pub struct SymmetricProfile {
    pub n: usize,
    f: Profile,
    /// f vanishes (or is below double precision) outside this ball.
    pub radius: f64,
    pub surfaces: Vec<Surface>,
    pub label: String,
}

impl std::fmt::Debug for SymmetricProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SymmetricProfile({}, n={})", self.label, self.n)
    }
}

impl SymmetricProfile {
    pub fn new(n: usize, radius: f64, label: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return domain("profiles are supported for n ∈ {1, 2, 3}");
        }
        let p = SymmetricProfile { n, f: Arc::new(f), radius, surfaces: Vec::new(), label: label.to_string() };
        p.check_symmetry()?;
        Ok(p)
    }

    pub fn surface(mut self, s: Surface) -> Self {
        self.surfaces.push(s);
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn check_symmetry(&self) -> Result<()> {
        for k in 0..64 {
            let t = k as f64 * 0.618_033_988_75;
            let x: Vec<f64> = (0..self.n).map(|i| self.radius * (0.9 * ((t + i as f64 * 1.3).sin()))).collect();
            let mut xs = x.clone();
            xs[0] = -xs[0];
            let (a, b) = (self.eval(&x), self.eval(&xs));
            if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                return Err(Error::Validation(format!("profile {} is not even in x₁ at {x:?}", self.label)));
            }
        }
        Ok(())
    }

    /// x₁ f(x) as a field on ℝⁿ.
    pub fn odd_extension(&self) -> FnField {
        let f = self.f.clone();
        let mut u = FnField::new(self.n, move |y| y[0] * f(y)).antisymmetric().support(self.radius);
        for s in &self.surfaces {
            u = u.surface(s.clone());
        }
        u
    }
}

/// The 3-isotropic lift to ℝ^{n+2}.
#[derive(Debug, Clone)]
pub struct IsotropicLift {
    pub base: SymmetricProfile,
}

pub fn lift_3isotropic(f: &SymmetricProfile) -> IsotropicLift {
    IsotropicLift { base: f.clone() }
}

impl IsotropicLift {
    pub fn dim(&self) -> usize {
        self.base.n + 2
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut y = Vec::with_capacity(self.base.n);
        y.push((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt());
        y.extend_from_slice(&x[3..]);
        self.base.eval(&y)
    }
}

/// `PV∫_{ℝⁿ₊} (f(x) − f(y)) y₁ (K(x−y) − K(x*−y)) dy` for x₁ > 0.
fn reduced_integral(f: &SymmetricProfile, x: &[f64], p: FracParams, q: &QuadSpec) -> IntegralResult {
    let (n, s) = (p.n, p.s);
    let x1 = x[0];
    let f0 = f.eval(x);
    let m = 0.5 * (n as f64 + 2.0 * s);
    let mut cut = local_cutoffs(q, &f.surfaces, x);
    let shrink = (0.25 * x1 / cut[0]).min(1.0);
    cut.iter_mut().for_each(|c| *c *= shrink);
    let (tol, rel) = inner_tol(q);
    let far = norm(x) + f.radius;

    // 1 − (r/|x* − y|)^{n+2s}, using |x* − y|² = r² + 4x₁y₁
    let damp = |r: f64, y1: f64| -(-m * (4.0 * x1 * y1 / (r * r)).ln_1p()).exp_m1();
    let pair = |d: &[f64], r: f64, h: &dyn Fn(f64, &[f64]) -> f64| {
        let mut v = 0.0;
        for sg in [1.0, -1.0] {
            let y = along(x, d, sg * r);
            if y[0] > 0.0 {
                v += h(r, &y[..n]);
            }
        }
        v
    };
    let full = |r: f64, y: &[f64]| (f0 - f.eval(y)) * y[0] * r.powf(-1.0 - 2.0 * s) * damp(r, y[0]);
    let singular = |r: f64, y: &[f64]| (f0 - f.eval(y)) * y[0] * r.powf(-1.0 - 2.0 * s);
    let regular = |r: f64, y: &[f64]| -(f0 - f.eval(y)) * y[0] * r.powi(n as i32 - 1) * (r * r + 4.0 * x1 * y[0]).powf(-m);
    let outside = |r: f64, y: &[f64]| f0 * y[0] * r.powf(-1.0 - 2.0 * s) * damp(r, y[0]);

    let exits = |d: &[f64]| -> Vec<f64> { if d[0] != 0.0 { vec![x1 / d[0].abs()] } else { vec![] } };
    let main = |d: &[f64]| {
        let mut br = exits(d);
        surface_breaks(&f.surfaces, x, d, &mut br);
        let body = pieces(|r| pair(d, r, &full), cut[0], far, &mut br, tol, rel);
        let near = pieces(|r| pair(d, r, &regular), 0.0, cut[0], &mut vec![], tol, rel);
        // beyond the support only the f(x) terms remain
        let e = exits(d).into_iter().fold(far, f64::max);
        // the exit can be astronomically far for near-tangent rays: integrate in log r
        let mid = tanh_sinh(
            |u| {
                let r = far * u.exp();
                pair(d, r, &outside) * r
            },
            0.0,
            (e / far).ln(),
            tol,
            rel,
            10,
        );
        let tail = semi_infinite(|r| pair(d, r, &outside), e, tol, rel, 8);
        body.plus(near).plus(mid).plus(tail)
    };
    let ab = angular_breaks(n, &f.surfaces, x);
    let total = half_sphere(n, &ab, tol, rel, main);
    let seq = cutoff_sequence(n, &ab, &cut, total, tol, rel, |d, a, b| {
        let mut br = vec![];
        surface_breaks(&f.surfaces, x, d, &mut br);
        pieces(|r| pair(d, r, &singular), a, b, &mut br, tol, rel)
    });
    pv_limit(&cut, 2.0 - 2.0 * s, 2.0, q.abs_tol, q.rel_tol, |_| seq.next())
}

/// `(−Δ)^s f̃` at ((x₁,0,0), x′) in ℝ^{n+2}, through the half-space reduction.
pub fn lifted_frac_lap(f: &SymmetricProfile, x: &[f64], p: FracParams, q: &QuadSpec) -> Result<IntegralResult> {
    if x.len() != f.n || p.n != f.n {
        return domain("dimension mismatch");
    }
    if x[0] == 0.0 {
        return domain("the reduction needs x₁ ≠ 0");
    }
    q.validate()?;
    // f̃ only sees |x₁|
    let mut xa = x.to_vec();
    xa[0] = x[0].abs();
    let l = reduced_integral(f, &xa, p, q);
    let c = c_frac(p.lifted(2)) * 2.0 * PI / ((p.nf() + 2.0 * p.s) * xa[0]);
    Ok(l.scale(c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BochnerResidual {
    /// (−Δ)^s[x₁f](x) in ℝⁿ.
    pub direct: f64,
    /// x₁ (−Δ)^s f̃ in ℝ^{n+2}.
    pub lifted: f64,
    pub residual: f64,
    pub err_sum: f64,
    pub converged: bool,
}

impl BochnerResidual {
    pub fn within(&self, factor: f64) -> bool {
        self.converged && self.residual.abs() <= factor * self.err_sum
    }
}

pub fn bochner_residual(f: &SymmetricProfile, x: &[f64], p: FracParams, q: &QuadSpec) -> Result<BochnerResidual> {
    let direct = frac_lap_pv(&f.odd_extension(), x, p, q)?;
    let lifted = lifted_frac_lap(f, x, p, q)?.scale(x[0]);
    Ok(BochnerResidual {
        direct: direct.value,
        lifted: lifted.value,
        residual: direct.value - lifted.value,
        err_sum: direct.err_estimate + lifted.err_estimate,
        converged: direct.converged && lifted.converged,
    })
}

/// Profiles used by the residual suite.
pub fn standard_profiles(n: usize) -> Result<Vec<SymmetricProfile>> {
    let sq = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let last = move |x: &[f64]| x[x.len() - 1];
    Ok(vec![
        SymmetricProfile::new(n, 7.0, "exp(-|x|^2)", move |x| (-sq(x)).exp())?,
        SymmetricProfile::new(n, 1.0, "(1-|x|^2)^2 on B1", move |x| (1.0 - sq(x)).max(0.0).powi(2))?
            .surface(Surface::Sphere { center: vec![0.0; n], radius: 1.0 }),
        SymmetricProfile::new(n, 7.0, "exp(-|x|^2)(1+x1^2)", move |x| (-sq(x)).exp() * (1.0 + x[0] * x[0]))?,
        SymmetricProfile::new(n, 7.0, "exp(-|x|^2)cos(x_n)", move |x| (-sq(x)).exp() * (if n > 1 { last(x) } else { 0.5 * x[0] }).cos())?,
        SymmetricProfile::new(n, 7.0, "exp(-x1^4-|x'|^2)", move |x| (-(x[0].powi(4)) - (sq(x) - x[0] * x[0])).exp())?,
    ])
}

/// Ten evaluation points with x₁ > 0.
pub fn standard_points(n: usize) -> Vec<Vec<f64>> {
    (0..10)
        .map(|k| {
            let t = k as f64;
            let mut x = vec![0.15 + 0.11 * t];
            if n > 1 {
                x.push(0.4 * (1.7 * t).sin());
            }
            if n > 2 {
                x.push(0.3 * (0.9 * t).cos());
            }
            x
        })
        .collect()
}

type Radial = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Radial Lévy kernel j_n(|x|) on ℝⁿ.
#[derive(Clone)]
pub struct LevyKernel {
    pub n: usize,
    j: Radial,
    dj: Option<Radial>,
    /// j is negligible beyond this radius.
    pub decay_radius: Option<f64>,
    pub label: String,
}

impl std::fmt::Debug for LevyKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LevyKernel({}, n={})", self.label, self.n)
    }
}

impl LevyKernel {
    pub fn new(n: usize, label: &str, j: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        LevyKernel { n, j: Arc::new(j), dj: None, decay_radius: None, label: label.to_string() }
    }

    pub fn derivative(mut self, dj: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.dj = Some(Arc::new(dj));
        self
    }

    pub fn decay(mut self, r: f64) -> Self {
        self.decay_radius = Some(r);
        self
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.j)(r)
    }

    /// j′(r), analytic when supplied, otherwise Richardson-extrapolated central differences.
    pub fn deriv(&self, r: f64) -> f64 {
        if let Some(dj) = &self.dj {
            return dj(r);
        }
        let h = 0.05 * r;
        let d = |h: f64| (self.eval(r + h) - self.eval(r - h)) / (2.0 * h);
        let (d1, d2, d3) = (d(h), d(0.5 * h), d(0.25 * h));
        let e1 = (4.0 * d2 - d1) / 3.0;
        let e2 = (4.0 * d3 - d2) / 3.0;
        (16.0 * e2 - e1) / 15.0
    }

    /// Monotonicity on a log grid and finiteness of ∫ min(1,|x|²) j(|x|) dx.
    pub fn validate(&self, q: &QuadSpec) -> Result<()> {
        let mut prev = f64::INFINITY;
        for k in 0..=120 {
            let r = 10f64.powf(-3.0 + 6.0 * k as f64 / 120.0);
            if self.decay_radius.is_some_and(|rd| r > rd) {
                break;
            }
            let v = self.eval(r);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Validation(format!("kernel {} is not finite and non-negative at r = {r}", self.label)));
            }
            if v > prev * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::Validation(format!("kernel {} increases near r = {r}", self.label)));
            }
            prev = v;
        }
        let n = self.n as i32;
        let inner = tanh_sinh(|r| r.powi(n + 1) * self.eval(r), 0.0, 1.0, q.abs_tol, q.rel_tol, 10);
        let outer = self.radial_tail(1.0, |r| r.powi(n - 1) * self.eval(r), q);
        if !(inner.converged && outer.converged && inner.value.is_finite() && outer.value.is_finite()) {
            return Err(Error::Validation(format!("kernel {} is not a Lévy kernel (∫ min(1,r²) j diverges)", self.label)));
        }
        Ok(())
    }

    fn radial_tail<F: Fn(f64) -> f64>(&self, a: f64, g: F, q: &QuadSpec) -> IntegralResult {
        match self.decay_radius {
            Some(rd) if rd > a => tanh_sinh(g, a, rd, q.abs_tol, q.rel_tol, 10),
            Some(_) => IntegralResult::exact(0.0),
            None => semi_infinite(g, a, q.abs_tol, q.rel_tol, 10),
        }
    }
}

/// j_{n+2}(r) = −j_n′(r)/(2πr).
pub fn kernel_lift(k: &LevyKernel) -> Result<LevyKernel> {
    k.validate(&QuadSpec { abs_tol: 1e-8, rel_tol: 1e-8, ..QuadSpec::default() })?;
    let base = k.clone();
    let lifted = LevyKernel::new(k.n + 2, &format!("lift of {}", k.label), move |r| -base.deriv(r) / (2.0 * PI * r));
    Ok(match k.decay_radius {
        Some(r) => lifted.decay(r),
        None => lifted,
    })
}

/// 2π ∫_r^∞ t j_{n+2}(t) dt, which recovers j_n(r) for a lifted kernel.
pub fn reconstruct(lifted: &LevyKernel, r: f64, q: &QuadSpec) -> IntegralResult {
    lifted.radial_tail(r, |t| t * lifted.eval(t), q).scale(2.0 * PI)
}

/// `c₀ − z^{−ν} J_ν(z)` with c₀ = 1/(2^ν Γ(ν+1)).
fn bessel_gap(nu: f64, z: f64) -> Result<f64> {
    if z < 2.0 {
        let mut term = 1.0 / gamma(nu + 1.0)?;
        let mut sum = 0.0;
        let w = 0.25 * z * z;
        for k in 1..60 {
            term *= -w / (k as f64 * (nu + k as f64));
            sum -= term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        Ok(sum * 2f64.powf(-nu))
    } else {
        Ok(2f64.powf(-nu) / gamma(nu + 1.0)? - z.powf(-nu) * bessel_j(nu, z)?)
    }
}

/// ψ(τ) = (2π)^{n/2} ∫₀^∞ (c₀ − (rτ)^{1−n/2} J_{n/2−1}(rτ)) r^{n−1} j_n(r) dr.
pub fn levy_symbol(k: &LevyKernel, tau: f64, q: &QuadSpec) -> Result<IntegralResult> {
    if !(tau > 0.0) {
        return domain("τ must be positive");
    }
    let n = k.n;
    let nu = 0.5 * n as f64 - 1.0;
    let nf = n as f64;
    let bad = std::cell::Cell::new(None);
    let g = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        let z = r * tau;
        let gap = if n == 1 {
            // ν = −1/2: z^{1/2}J_{−1/2}(z) = √(2/π) cos z
            (2.0 / PI).sqrt() * 2.0 * (0.5 * z).sin().powi(2)
        } else {
            match bessel_gap(nu, z) {
                Ok(v) => v,
                Err(e) => {
                    bad.set(Some(e));
                    0.0
                }
            }
        };
        gap * r.powi(n as i32 - 1) * k.eval(r)
    };
    // split at a few oscillation lengths so the pieces stay smooth
    let period = 2.0 * PI / tau;
    let mut parts = vec![];
    let mut a = 0.0;
    let end = k.decay_radius.unwrap_or(f64::INFINITY);
    while a < end && a < 64.0 * period {
        let b = (a + period).min(end);
        parts.push(tanh_sinh(g, a, b, 0.1 * q.abs_tol, q.rel_tol, 10));
        a = b;
    }
    if a < end {
        parts.push(semi_infinite(g, a, 0.1 * q.abs_tol, q.rel_tol, 10));
    }
    if let Some(e) = bad.take() {
        return Err(e);
    }
    let out: IntegralResult = parts.into_iter().sum();
    if !out.value.is_finite() {
        return Err(Error::Validation("symbol integral diverges".into()));
    }
    Ok(out.scale((2.0 * PI).powf(nf / 2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fp(n: usize, s: f64) -> FracParams {
        FracParams::new(n, s).unwrap()
    }

    fn q() -> QuadSpec {
        QuadSpec { abs_tol: 1e-9, rel_tol: 1e-9, ..QuadSpec::default() }
    }

    #[test]
    fn lift_restricts_to_profile() {
        let f = &standard_profiles(2).unwrap()[2];
        let l = lift_3isotropic(f);
        assert_eq!(l.dim(), 4);
        for (t, y) in [(0.3, 0.2), (1.1, -0.5)] {
            assert!((l.eval(&[t, 0.0, 0.0, y]) - f.eval(&[t, y])).abs() < 1e-15);
            let a = l.eval(&[t * 0.6, t * 0.8, 0.0, y]);
            let b = l.eval(&[0.0, t * 0.6, t * 0.8, y]);
            assert!((a - b).abs() < 1e-14);
        }
        let g = &standard_profiles(1).unwrap()[0];
        let lg = lift_3isotropic(g);
        let x = [0.3, -0.4, 0.5];
        assert!((lg.eval(&x) - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_profile_rejected() {
        assert!(SymmetricProfile::new(2, 3.0, "bad", |x| (x[0] - 0.2).powi(2)).is_err());
    }

    #[test]
    fn gaussian_residual_2d() {
        let f = &standard_profiles(2).unwrap()[0];
        let r = bochner_residual(f, &[0.5, 0.0], fp(2, 0.5), &q()).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.within(2.0) || r.residual.abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn compact_profile_residual() {
        let f = &standard_profiles(2).unwrap()[1];
        let r = bochner_residual(f, &[0.3, 0.1], fp(2, 0.3), &q()).unwrap();
        assert!(r.residual.abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn residual_vanishes_near_hyperplane() {
        let f = &standard_profiles(1).unwrap()[0];
        let r = bochner_residual(f, &[1e-3], fp(1, 0.4), &q()).unwrap();
        assert!(r.direct.abs() < 1e-2 && r.lifted.abs() < 1e-2);
        assert!(r.residual.abs() < 1e-8);
    }

    #[test]
    fn lifted_side_is_even() {
        let f = &standard_profiles(2).unwrap()[3];
        let a = lifted_frac_lap(f, &[0.4, 0.2], fp(2, 0.6), &q()).unwrap().value;
        let b = lifted_frac_lap(f, &[-0.4, 0.2], fp(2, 0.6), &q()).unwrap().value;
        assert_eq!(a, b);
        assert!(lifted_frac_lap(f, &[0.0, 0.2], fp(2, 0.6), &q()).is_err());
    }

    #[test]
    fn gaussian_kernel_lift() {
        let k = LevyKernel::new(1, "gauss", |r| (-r * r).exp()).derivative(|r| -2.0 * r * (-r * r).exp());
        let l = kernel_lift(&k).unwrap();
        assert_eq!(l.n, 3);
        for r in [0.2, 1.0, 2.5] {
            assert!((l.eval(r) - (-r * r).exp() / PI).abs() < 1e-15);
        }
    }

    #[test]
    fn fractional_kernel_lift() {
        let (n, s) = (2usize, 0.35f64);
        let e = -(n as f64) - 2.0 * s;
        let k = LevyKernel::new(n, "frac", move |r| r.powf(e));
        let l = kernel_lift(&k).unwrap();
        for r in [0.5f64, 1.0, 3.0] {
            let want = (n as f64 + 2.0 * s) / (2.0 * PI) * r.powf(e - 2.0);
            assert!(((l.eval(r) - want) / want).abs() < 1e-8, "{} vs {want}", l.eval(r));
        }
    }

    #[test]
    fn reconstruction_of_tempered_kernel() {
        let (n, s) = (1usize, 0.5f64);
        let k = LevyKernel::new(n, "tempered", move |r| r.powf(-(n as f64) - s) * (-r).exp());
        let l = kernel_lift(&k).unwrap();
        for r in [0.5, 1.0, 2.0] {
            let v = reconstruct(&l, r, &QuadSpec { abs_tol: 1e-12, rel_tol: 1e-10, ..QuadSpec::default() });
            assert!(((v.value - k.eval(r)) / k.eval(r)).abs() < 1e-6, "r={r}: {v:?} vs {}", k.eval(r));
        }
    }

    #[test]
    fn increasing_kernel_rejected() {
        let k = LevyKernel::new(1, "bad", |r| r.min(1.0));
        assert!(kernel_lift(&k).is_err());
        let heavy = LevyKernel::new(1, "heavy", |r| 1.0 / (1.0 + r));
        assert!(heavy.validate(&q()).is_err());
    }

    #[test]
    fn symbol_small_tau() {
        let k = LevyKernel::new(1, "gauss", |r| (-r * r).exp()).decay(7.0);
        let v = levy_symbol(&k, 1e-3, &q()).unwrap().value;
        // ψ(τ) ≈ τ² ∫₀^∞ r² e^{−r²} dr = τ² √π/4
        assert!((v - 1e-6 * PI.sqrt() / 4.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn symbol_closed_form_1d() {
        // 2∫₀^∞ (1 − cos rτ) e^{−r²} dr = √π (1 − e^{−τ²/4})
        let k = LevyKernel::new(1, "gauss", |r| (-r * r).exp()).decay(7.0);
        for tau in [0.5, 1.0, 2.0] {
            let v = levy_symbol(&k, tau, &q()).unwrap().value;
            let want = PI.sqrt() * (1.0 - (-tau * tau / 4.0).exp());
            assert!((v - want).abs() < 1e-9, "{v} vs {want}");
        }
    }

    #[test]
    fn symbol_lift_invariance() {
        for n in [1usize, 2] {
            let k = LevyKernel::new(n, "gauss", |r| (-r * r).exp()).derivative(|r| -2.0 * r * (-r * r).exp()).decay(7.0);
            let l = kernel_lift(&k).unwrap();
            for tau in [0.5, 1.0, 2.0] {
                let a = levy_symbol(&k, tau, &q()).unwrap().value;
                let b = levy_symbol(&l, tau, &q()).unwrap().value;
                assert!((a - b).abs() <= 1e-5 * (1.0 + a), "n={n} τ={tau}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn bessel_gap_branches_agree() {
        for nu in [0.0, 0.5, 1.0] {
            for z in [0.5, 1.0, 1.9] {
                let series = bessel_gap(nu, z).unwrap();
                let direct = 2f64.powf(-nu) / gamma(nu + 1.0).unwrap() - z.powf(-nu) * bessel_j(nu, z).unwrap();
                assert!((series - direct).abs() < 1e-13, "ν={nu} z={z}: {series} vs {direct}");
            }
        }
    }

    proptest! {
        #[test]
        fn symbol_monotone(a in 0.1f64..2.9) {
            let k = LevyKernel::new(2, "gauss", |r| (-r * r).exp()).decay(7.0);
            let qq = QuadSpec { abs_tol: 1e-10, rel_tol: 1e-10, ..QuadSpec::default() };
            let v1 = levy_symbol(&k, a, &qq).unwrap().value;
            let v2 = levy_symbol(&k, a + 0.1, &qq).unwrap().value;
            prop_assert!(v2 > v1);
        }
    }
}
