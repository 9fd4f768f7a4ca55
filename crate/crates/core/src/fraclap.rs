//! Pointwise fractional Laplacians.
//!
//! Principal values are evaluated in polar form around the evaluation point,
//! `∫_{S^{n-1}/±} ∫_δ^∞ (2u(x) − u(x+ρθ) − u(x−ρθ)) ρ^{−1−2s} dρ dθ`, for a
//! decreasing family of cutoffs δ, then extrapolated in δ. Rays are split at
//! their crossings with the field's declared singular surfaces so every
//! one-dimensional piece only has endpoint singularities.

use crate::error::{domain, Error, Result};
use crate::quadrature::{pv_limit, semi_infinite, tanh_sinh, IntegralResult, QuadSpec};
use crate::specfun::{a_hyp, c_frac, gamma_torsion, hyp2f1, FracParams};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};

pub(crate) const MAX_DIM: usize = 4;

/// Surface across which a field fails to be smooth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Surface {
    Sphere { center: Vec<f64>, radius: f64 },
    /// Axis-aligned ellipsoid centred at the origin.
    Ellipsoid { axes: Vec<f64> },
}

impl Surface {
    pub fn sphere(center: &[f64], radius: f64) -> Self {
        Surface::Sphere { center: center.to_vec(), radius }
    }

    /// Real roots t of `o + t d ∈ surface` (either sign).
    fn ray_roots(&self, o: &[f64], d: &[f64]) -> Vec<f64> {
        let (a, b, c) = match self {
            Surface::Sphere { center, radius } => {
                let mut b = 0.0;
                let mut c = -radius * radius;
                let mut a = 0.0;
                for i in 0..o.len() {
                    let oc = o[i] - center[i];
                    a += d[i] * d[i];
                    b += d[i] * oc;
                    c += oc * oc;
                }
                (a, b, c)
            }
            Surface::Ellipsoid { axes } => {
                let (mut a, mut b, mut c) = (0.0, 0.0, -1.0);
                for i in 0..o.len() {
                    let w = 1.0 / (axes[i] * axes[i]);
                    a += d[i] * d[i] * w;
                    b += o[i] * d[i] * w;
                    c += o[i] * o[i] * w;
                }
                (a, b, c)
            }
        };
        let disc = b * b - a * c;
        if disc < 0.0 || a == 0.0 {
            return vec![];
        }
        let sq = disc.sqrt();
        // stable quadratic roots
        let qv = -(b + b.signum() * sq);
        if qv == 0.0 {
            return vec![0.0];
        }
        vec![qv / a, c / qv]
    }

    /// Lower bound for the distance from `x` to the surface.
    pub fn distance_lower_bound(&self, x: &[f64]) -> f64 {
        match self {
            Surface::Sphere { center, radius } => (dist(x, center) - radius).abs(),
            Surface::Ellipsoid { axes } => {
                let l: f64 = x.iter().zip(axes).map(|(xi, a)| (xi / a).powi(2)).sum::<f64>().sqrt();
                let amin = axes.iter().cloned().fold(f64::INFINITY, f64::min);
                (l - 1.0).abs() * amin
            }
        }
    }

    /// Planar directions (angles) from `o` tangent to the surface.
    fn tangent_angles_2d(&self, o: &[f64]) -> Vec<f64> {
        let (c, r, scale) = match self {
            Surface::Sphere { center, radius } => ([center[0], center[1]], *radius, [1.0, 1.0]),
            Surface::Ellipsoid { axes } => ([0.0, 0.0], 1.0, [axes[0], axes[1]]),
        };
        let p = [(o[0] - c[0]) / scale[0], (o[1] - c[1]) / scale[1]];
        let d = (p[0] * p[0] + p[1] * p[1]).sqrt();
        if d <= r {
            return vec![];
        }
        let phi = (-p[1]).atan2(-p[0]);
        let delta = (r / d).asin();
        [phi - delta, phi + delta]
            .iter()
            .map(|a| {
                // direction in the mapped plane, pulled back
                let v = [a.cos() * scale[0], a.sin() * scale[1]];
                v[1].atan2(v[0])
            })
            .collect()
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Evaluable function on ℝⁿ with symmetry and support metadata.
pub trait ScalarField: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    /// `u(x − 2x₁e₁) = −u(x)`.
    fn antisymmetric(&self) -> bool {
        false
    }
    /// Radius of an origin-centred ball outside which the field vanishes
    /// (or is below double precision). `None` means unbounded support.
    fn support_radius(&self) -> Option<f64> {
        None
    }
    fn singular_surfaces(&self) -> Vec<Surface> {
        Vec::new()
    }
    fn smoothness_note(&self) -> String {
        String::new()
    }
}

type BoxedFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Closure-backed field.
pub struct FnField {
    pub n: usize,
    f: BoxedFn,
    pub antisymmetric: bool,
    pub support_radius: Option<f64>,
    pub surfaces: Vec<Surface>,
    pub note: String,
}

impl FnField {
    pub fn new(n: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnField { n, f: Box::new(f), antisymmetric: false, support_radius: None, surfaces: Vec::new(), note: String::new() }
    }

    pub fn antisymmetric(mut self) -> Self {
        self.antisymmetric = true;
        self
    }

    pub fn support(mut self, r: f64) -> Self {
        self.support_radius = Some(r);
        self
    }

    pub fn surface(mut self, s: Surface) -> Self {
        self.surfaces.push(s);
        self
    }

    pub fn note(mut self, s: &str) -> Self {
        self.note = s.to_string();
        self
    }
}

impl ScalarField for FnField {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn antisymmetric(&self) -> bool {
        self.antisymmetric
    }
    fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }
    fn singular_surfaces(&self) -> Vec<Surface> {
        self.surfaces.clone()
    }
    fn smoothness_note(&self) -> String {
        self.note.clone()
    }
}

/// Checks `u(x*) = −u(x)` at random points.
pub fn check_antisymmetry(u: &dyn ScalarField, samples: usize, seed: u64) -> Result<()> {
    let mut rng = crate::quadrature::stream_rng(seed, 0);
    let r = u.support_radius().unwrap_or(3.0);
    let mut x = vec![0.0; u.dim()];
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = rng.gen_range(-r..r);
        }
        let a = u.eval(&x);
        let mut xs = x.clone();
        xs[0] = -xs[0];
        let b = u.eval(&xs);
        if (a + b).abs() > 1e-12 * (1.0 + a.abs()) {
            return Err(Error::Validation(format!("field is not antisymmetric at {x:?}")));
        }
    }
    Ok(())
}

/// Torsion profile γ_{n,s}(ρ² − |x − c|²)^s_+.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionProfile {
    pub center: Vec<f64>,
    pub radius: f64,
    pub params: FracParams,
    gamma: f64,
}

impl TorsionProfile {
    pub fn new(center: Vec<f64>, radius: f64, params: FracParams) -> Self {
        let gamma = gamma_torsion(params);
        TorsionProfile { center, radius, params, gamma }
    }

    pub fn unit(params: FracParams) -> Self {
        Self::new(vec![0.0; params.n], 1.0, params)
    }
}

impl ScalarField for TorsionProfile {
    fn dim(&self) -> usize {
        self.params.n
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        let w = self.radius * self.radius - d2;
        if w > 0.0 {
            self.gamma * w.powf(self.params.s)
        } else {
            0.0
        }
    }
    fn support_radius(&self) -> Option<f64> {
        Some(norm(&self.center) + self.radius)
    }
    fn singular_surfaces(&self) -> Vec<Surface> {
        vec![Surface::sphere(&self.center, self.radius)]
    }
    fn smoothness_note(&self) -> String {
        "C^s across the sphere, smooth elsewhere".into()
    }
}

fn direction(n: usize, ang: &[f64]) -> [f64; MAX_DIM] {
    let mut d = [0.0; MAX_DIM];
    match n {
        1 => d[0] = 1.0,
        2 => {
            d[0] = ang[0].cos();
            d[1] = ang[0].sin();
        }
        _ => {
            d[0] = ang[0].cos();
            d[1] = ang[0].sin() * ang[1].cos();
            d[2] = ang[0].sin() * ang[1].sin();
        }
    }
    d
}

pub(crate) fn along(o: &[f64], d: &[f64], t: f64) -> [f64; MAX_DIM] {
    let mut p = [0.0; MAX_DIM];
    for i in 0..o.len() {
        p[i] = o[i] + t * d[i];
    }
    p
}

/// Integral of `f(θ)` over the half sphere {θ₁ > 0} (a single direction in 1-D).
pub(crate) fn half_sphere<F: Fn(&[f64]) -> IntegralResult>(n: usize, breaks: &[f64], tol: f64, rel: f64, f: F) -> IntegralResult {
    let inner_err = Cell::new(0.0f64);
    let inner_ok = Cell::new(true);
    let evals = Cell::new(0u64);
    let call = |ang: &[f64]| {
        let d = direction(n, ang);
        let r = f(&d[..n]);
        inner_err.set(inner_err.get().max(r.err_estimate));
        inner_ok.set(inner_ok.get() && r.converged);
        evals.set(evals.get() + r.evaluations);
        r.value
    };
    let mut out = match n {
        1 => {
            let v = call(&[]);
            return IntegralResult { value: v, err_estimate: inner_err.get(), evaluations: evals.get(), converged: inner_ok.get() };
        }
        2 => {
            let mut pts: Vec<f64> = breaks
                .iter()
                .map(|&a| {
                    let mut a = a;
                    while a > FRAC_PI_2 {
                        a -= PI;
                    }
                    while a <= -FRAC_PI_2 {
                        a += PI;
                    }
                    a
                })
                .filter(|a| a.abs() < FRAC_PI_2 - 1e-14)
                .collect();
            pts.push(-FRAC_PI_2);
            pts.push(FRAC_PI_2);
            pts.sort_by(f64::total_cmp);
            pts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
            let mut parts = Vec::new();
            for w in pts.windows(2) {
                parts.push(tanh_sinh(|a| call(&[a]), w[0], w[1], tol / pts.len() as f64, rel, 8));
            }
            parts.into_iter().sum::<IntegralResult>()
        }
        _ => {
            let outer = |alpha: f64| {
                let r = tanh_sinh(|beta| call(&[alpha, beta]), 0.0, 2.0 * PI, tol, rel, 7);
                inner_ok.set(inner_ok.get() && r.converged);
                r.value * alpha.sin()
            };
            tanh_sinh(outer, 0.0, FRAC_PI_2, tol, rel, 7)
        }
    };
    let measure = match n {
        2 => PI,
        _ => 2.0 * PI,
    };
    out.err_estimate += inner_err.get() * measure;
    out.converged &= inner_ok.get();
    out.evaluations = evals.get();
    out
}

/// Integrates `g` over [a, b] split at `breaks`, tanh-sinh on each piece.
pub(crate) fn pieces<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, breaks: &mut Vec<f64>, tol: f64, rel: f64) -> IntegralResult {
    if b <= a {
        return IntegralResult::exact(0.0);
    }
    breaks.retain(|&t| t > a && t < b);
    breaks.push(a);
    breaks.push(b);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + x.abs()));
    let k = breaks.len() - 1;
    breaks.windows(2).map(|w| tanh_sinh(&g, w[0], w[1], tol / k as f64, rel, 8)).sum()
}

pub(crate) fn surface_breaks(surfaces: &[Surface], o: &[f64], d: &[f64], out: &mut Vec<f64>) {
    for s in surfaces {
        for t in s.ray_roots(o, d) {
            out.push(t.abs());
        }
    }
}

pub(crate) fn angular_breaks(n: usize, surfaces: &[Surface], o: &[f64]) -> Vec<f64> {
    if n != 2 {
        return vec![];
    }
    surfaces.iter().flat_map(|s| s.tangent_angles_2d(o)).collect()
}

/// Requested cutoffs, shrunk so the largest stays well inside the
/// region where the field is smooth around `x`.
pub(crate) fn local_cutoffs(q: &QuadSpec, surfaces: &[Surface], x: &[f64]) -> Vec<f64> {
    let d = surfaces.iter().map(|s| s.distance_lower_bound(x)).fold(f64::INFINITY, f64::min);
    let scale = (0.25 * d / q.pv_cutoffs[0]).min(1.0);
    q.pv_cutoffs.iter().map(|c| c * scale).collect()
}

fn check_point(u: &dyn ScalarField, x: &[f64], p: FracParams) -> Result<()> {
    if x.len() != p.n || u.dim() != p.n {
        return domain("dimension mismatch between field, point and parameters");
    }
    if p.n > 3 {
        return domain("pointwise evaluation implemented for n ≤ 3");
    }
    Ok(())
}

pub(crate) fn inner_tol(q: &QuadSpec) -> (f64, f64) {
    (0.01 * q.abs_tol, 0.01 * q.rel_tol)
}

/// `c_{n,s} PV∫ (u(x) − u(y))/|x − y|^{n+2s} dy`.
pub fn frac_lap_pv(u: &dyn ScalarField, x: &[f64], p: FracParams, q: &QuadSpec) -> Result<IntegralResult> {
    check_point(u, x, p)?;
    q.validate()?;
    let (n, s) = (p.n, p.s);
    let u0 = u.eval(x);
    let surfaces = u.singular_surfaces();
    let cut = local_cutoffs(q, &surfaces, x);
    let (tol, rel) = inner_tol(q);
    let far = u.support_radius().map(|r| norm(x) + r);
    let kernel = move |r: f64| r.powf(-1.0 - 2.0 * s);
    let seg = |d: &[f64], a: f64, b: f64| {
        let g = |r: f64| {
            let yp = along(x, d, r);
            let ym = along(x, d, -r);
            (2.0 * u0 - u.eval(&yp[..n]) - u.eval(&ym[..n])) * kernel(r)
        };
        let mut br = Vec::new();
        surface_breaks(&surfaces, x, d, &mut br);
        pieces(g, a, b, &mut br, tol, rel)
    };
    let ab = angular_breaks(n, &surfaces, x);
    let main = half_sphere(n, &ab, tol, rel, |d| match far {
        Some(b) => seg(d, cut[0], b).plus(IntegralResult::exact(2.0 * u0 * b.powf(-2.0 * s) / (2.0 * s))),
        None => {
            let b = norm(x) + 1.0;
            let g = |r: f64| {
                let yp = along(x, d, r);
                let ym = along(x, d, -r);
                (2.0 * u0 - u.eval(&yp[..n]) - u.eval(&ym[..n])) * kernel(r)
            };
            seg(d, cut[0], b).plus(semi_infinite(g, b, tol, rel, 8))
        }
    });
    let total = cutoff_sequence(n, &ab, &cut, main, tol, rel, |d, a, b| seg(d, a, b));
    let r = pv_limit(&cut, 2.0 - 2.0 * s, 2.0, q.abs_tol, q.rel_tol, |_| total.next());
    Ok(r.scale(c_frac(p)))
}

/// Values `I(δ_k)` built from the outer integral plus thin shells.
pub(crate) struct CutoffSeq {
    vals: Vec<IntegralResult>,
    pos: Cell<usize>,
}

impl CutoffSeq {
    pub(crate) fn next(&self) -> IntegralResult {
        let i = self.pos.get();
        self.pos.set(i + 1);
        self.vals[i]
    }
}

pub(crate) fn cutoff_sequence<S: Fn(&[f64], f64, f64) -> IntegralResult>(n: usize, ab: &[f64], cut: &[f64], main: IntegralResult, tol: f64, rel: f64, seg: S) -> CutoffSeq {
    let mut vals = vec![main];
    let mut acc = main;
    for w in cut.windows(2) {
        let shell = half_sphere(n, ab, tol, rel, |d| seg(d, w[1], w[0]));
        acc = acc.plus(shell);
        vals.push(acc);
    }
    CutoffSeq { vals, pos: Cell::new(0) }
}

/// c̃_s x₁^{−2s} coefficient: `c_{n,s} ∫_{y₁>0} |x* − y|^{−n−2s} dy = (c_{1,s}/(2s)) x₁^{−2s}`.
fn reflected_mass(p: FracParams, x1: f64) -> f64 {
    crate::specfun::c_tilde(p.s) * x1.powf(-2.0 * p.s)
}

/// Antisymmetric form on the half-space:
/// `c_{n,s} PV∫_{ℝⁿ₊} (K(x−y) − K(x*−y))(u(x) − u(y)) dy + (c_{1,s}/s) u(x) x₁^{−2s}`.
pub fn frac_lap_antisym(u: &dyn ScalarField, x: &[f64], p: FracParams, q: &QuadSpec) -> Result<IntegralResult> {
    check_point(u, x, p)?;
    q.validate()?;
    if !(x[0] > 0.0) {
        return domain("antisymmetric form needs x₁ > 0");
    }
    if !u.antisymmetric() {
        return Err(Error::Validation("field is not flagged antisymmetric".into()));
    }
    let (n, s) = (p.n, p.s);
    let u0 = u.eval(x);
    let x1 = x[0];
    let surfaces = u.singular_surfaces();
    let mut cut = local_cutoffs(q, &surfaces, x);
    let shrink = (0.25 * x1 / cut[0]).min(1.0);
    cut.iter_mut().for_each(|c| *c *= shrink);
    let (tol, rel) = inner_tol(q);
    let rs = u.support_radius().ok_or_else(|| Error::Validation("antisymmetric form needs a support radius".into()))?;
    let far = norm(x) + rs;
    let kernel = move |r: f64| r.powf(-1.0 - 2.0 * s);

    // PV part: rays from x, truncated at the hyperplane.
    let seg = |d: &[f64], a: f64, b: f64| {
        let g = |r: f64| {
            let mut v = 0.0;
            let yp = along(x, d, r);
            if yp[0] > 0.0 {
                v += u0 - u.eval(&yp[..n]);
            }
            let ym = along(x, d, -r);
            if ym[0] > 0.0 {
                v += u0 - u.eval(&ym[..n]);
            }
            v * kernel(r)
        };
        let mut br = Vec::new();
        surface_breaks(&surfaces, x, d, &mut br);
        if d[0].abs() > 0.0 {
            br.push(x1 / d[0].abs());
        }
        pieces(g, a, b, &mut br, tol, rel)
    };
    let ab = angular_breaks(n, &surfaces, x);
    let main = half_sphere(n, &ab, tol, rel, |d| {
        let exit = if d[0].abs() > 0.0 { x1 / d[0].abs() } else { f64::INFINITY };
        let b = far.max(if exit.is_finite() { exit } else { far });
        let body = seg(d, cut[0], b);
        // beyond b only the u(x) terms survive
        let tail = if exit <= b {
            u0 * b.powf(-2.0 * s) / (2.0 * s)
        } else {
            u0 * (2.0 * b.powf(-2.0 * s) - exit.powf(-2.0 * s)) / (2.0 * s)
        };
        body.plus(IntegralResult::exact(tail))
    });
    let total = cutoff_sequence(n, &ab, &cut, main, tol, rel, |d, a, b| seg(d, a, b));
    let pv = pv_limit(&cut, 2.0 - 2.0 * s, 2.0, q.abs_tol, q.rel_tol, |_| total.next());

    // Reflected part ∫_{ℝⁿ₊} K(x*−y) u(y) dy: rays from x* entering the half-space.
    let mut xs = x.to_vec();
    xs[0] = -x1;
    let abs_ = angular_breaks(n, &surfaces, &xs);
    let refl = half_sphere(n, &abs_, tol, rel, |d| {
        let a = x1 / d[0];
        let b = norm(&xs) + rs;
        if !(a < b) {
            return IntegralResult::exact(0.0);
        }
        let g = |r: f64| {
            let y = along(&xs, d, r);
            u.eval(&y[..n]) * kernel(r)
        };
        let mut br = Vec::new();
        surface_breaks(&surfaces, &xs, d, &mut br);
        pieces(g, a, b, &mut br, tol, rel)
    });
    let c = c_frac(p);
    let zero_order = 2.0 * reflected_mass(p, x1) * u0;
    // c(A − B) with B = u(x)∫K(x*−y) − ∫K(x*−y)u(y)
    let b_part = IntegralResult::exact(reflected_mass(p, x1) * u0).minus(refl.scale(c));
    Ok(pv.scale(c).minus(b_part).plus(IntegralResult::exact(zero_order)))
}

/// Value that may be −∞ on a singular locus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtendedReal {
    Finite(f64),
    NegInfinity,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::NegInfinity => None,
        }
    }
}

/// Homogeneous polynomial given as monomials `(coefficient, exponents)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolidHarmonic {
    pub n: usize,
    pub degree: u32,
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl SolidHarmonic {
    pub fn constant(n: usize) -> Self {
        SolidHarmonic { n, degree: 0, terms: vec![(1.0, vec![0; n])] }
    }

    /// The coordinate function x_i.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        SolidHarmonic { n, degree: 1, terms: vec![(1.0, e)] }
    }

    pub fn new(n: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        let degree = terms.first().map(|t| t.1.iter().sum()).unwrap_or(0);
        for (_, e) in &terms {
            if e.len() != n || e.iter().sum::<u32>() != degree {
                return Err(Error::Validation("monomials must be homogeneous of one degree".into()));
            }
        }
        let p = SolidHarmonic { n, degree, terms };
        p.validate()?;
        Ok(p)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, e)| c * e.iter().zip(x).map(|(&k, xi)| xi.powi(k as i32)).product::<f64>()).sum()
    }

    /// ΔP ≈ 0 by the 5-point stencil at 20 random points.
    pub fn validate(&self) -> Result<()> {
        let mut rng = crate::quadrature::stream_rng(7, 0);
        let h = 1e-3;
        let scale: f64 = self.terms.iter().map(|t| t.0.abs()).sum::<f64>().max(1e-300);
        let mut x = vec![0.0; self.n];
        for _ in 0..20 {
            for xi in x.iter_mut() {
                *xi = rng.gen_range(-1.0..1.0);
            }
            let c = self.eval(&x);
            let mut lap = 0.0;
            for i in 0..self.n {
                let mut y = x.clone();
                y[i] += h;
                let a = self.eval(&y);
                y[i] -= 2.0 * h;
                let b = self.eval(&y);
                lap += (a + b - 2.0 * c) / (h * h);
            }
            if lap.abs() > 1e-8 * scale.max(1.0) * 1e3 {
                return Err(Error::Validation(format!("polynomial is not harmonic (ΔP ≈ {lap:e})")));
            }
        }
        Ok(())
    }
}

/// `(−Δ)^s [P ψ_{B_ρ}]` in closed form, with ψ_{B_ρ} = γ_{n,s}(ρ² − |x|²)^s_+.
pub fn torsion_closed_form(ph: &SolidHarmonic, rho: f64, x: &[f64], p: FracParams) -> Result<ExtendedReal> {
    if ph.n != p.n || x.len() != p.n {
        return domain("dimension mismatch");
    }
    ph.validate()?;
    let l = ph.degree as usize;
    let ratio = gamma_torsion(p) / gamma_torsion(p.lifted(2 * l));
    let px = ph.eval(x);
    let r = norm(x);
    if r < rho {
        return Ok(ExtendedReal::Finite(ratio * px));
    }
    if r == rho {
        return Ok(ExtendedReal::NegInfinity);
    }
    let (n, s, lf) = (p.nf(), p.s, l as f64);
    let z = (rho / r).powi(2);
    let a = a_hyp(p.lifted(2 * l));
    let h = hyp2f1((n + 2.0 * s) / 2.0 + lf, s + 1.0, (n + 2.0 * s) / 2.0 + 1.0 + lf, z)?;
    Ok(ExtendedReal::Finite(-ratio * px * a * (r / rho).powf(-n - 2.0 * s - 2.0 * lf) * h))
}

/// K, F, f, g at one τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityValues {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "F")]
    pub big_f: f64,
    pub f: f64,
    pub g: f64,
}

pub fn stability_functions(tau: f64, p: FracParams) -> Result<StabilityValues> {
    if !(tau > 0.0 && tau < 1.0) {
        return domain("τ must lie in (0,1)");
    }
    let (n, s) = (p.nf(), p.s);
    let big_f = hyp2f1(1.0, n / 2.0, (n + 2.0 * s) / 2.0 + 1.0, tau)?;
    Ok(assemble_stability(tau, big_f, p))
}

fn assemble_stability(tau: f64, big_f: f64, p: FracParams) -> StabilityValues {
    let (n, s) = (p.nf(), p.s);
    let k = a_hyp(p) * (1.0 - tau).powf(-s) * tau.powf((n + 2.0 * s) / 2.0);
    StabilityValues { k, big_f, f: 1.0 - k * (big_f - 1.0), g: k * ((n + 2.0 * s) / (2.0 * s) - big_f) - 1.0 }
}

/// Tabulated F on [0, 0.9] with cubic interpolation; exact evaluation above.
#[derive(Debug, Clone)]
pub struct StabilityCache {
    p: FracParams,
    h: f64,
    table: Vec<f64>,
}

const CACHE_TOP: f64 = 0.9;

impl StabilityCache {
    pub fn new(p: FracParams, nodes: usize) -> Result<Self> {
        let h = CACHE_TOP / (nodes - 1) as f64;
        let (n, s) = (p.nf(), p.s);
        let mut table = Vec::with_capacity(nodes + 2);
        for i in 0..nodes + 2 {
            let t = (i as f64 * h).min(0.999);
            table.push(hyp2f1(1.0, n / 2.0, (n + 2.0 * s) / 2.0 + 1.0, t)?);
        }
        Ok(StabilityCache { p, h, table })
    }

    pub fn eval(&self, tau: f64) -> Result<StabilityValues> {
        if !(tau > 0.0 && tau < 1.0) {
            return domain("τ must lie in (0,1)");
        }
        if tau > CACHE_TOP - self.h {
            return stability_functions(tau, self.p);
        }
        let i = ((tau / self.h) as usize).max(1);
        let t = tau / self.h - i as f64;
        let (p0, p1, p2, p3) = (self.table[i - 1], self.table[i], self.table[i + 1], self.table[i + 2]);
        // cubic Lagrange through nodes i-1..i+2
        let f = p0 * (-t * (t - 1.0) * (t - 2.0) / 6.0) + p1 * ((t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0)
            + p2 * (-(t + 1.0) * t * (t - 2.0) / 2.0)
            + p3 * ((t + 1.0) * t * (t - 1.0) / 6.0);
        Ok(assemble_stability(tau, f, self.p))
    }
}

/// Antisymmetric barrier `φ(x) = x₁(ψ_{B_ρ(a)} + ψ_{B_ρ(a*)})`, a* = a − 2a₁e₁.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub a: Vec<f64>,
    pub rho: f64,
    pub params: FracParams,
}

impl BarrierSpec {
    pub fn new(a: Vec<f64>, rho: f64, params: FracParams) -> Result<Self> {
        if !(rho > 0.0) {
            return domain("radius must be positive");
        }
        if a.len() != params.n || a[0] < 0.0 {
            return domain("centre must lie in the closed upper half-space");
        }
        Ok(BarrierSpec { a, rho, params })
    }

    pub fn reflected_center(&self) -> Vec<f64> {
        let mut c = self.a.clone();
        c[0] = -c[0];
        c
    }

    fn profiles(&self) -> (TorsionProfile, TorsionProfile) {
        (
            TorsionProfile::new(self.a.clone(), self.rho, self.params),
            TorsionProfile::new(self.reflected_center(), self.rho, self.params),
        )
    }
}

pub fn barrier_eval(b: &BarrierSpec, x: &[f64]) -> f64 {
    let (p1, p2) = b.profiles();
    x[0] * (p1.eval(x) + p2.eval(x))
}

impl ScalarField for BarrierSpec {
    fn dim(&self) -> usize {
        self.params.n
    }
    fn eval(&self, x: &[f64]) -> f64 {
        barrier_eval(self, x)
    }
    fn antisymmetric(&self) -> bool {
        true
    }
    fn support_radius(&self) -> Option<f64> {
        Some(norm(&self.a) + self.rho)
    }
    fn singular_surfaces(&self) -> Vec<Surface> {
        vec![Surface::sphere(&self.a, self.rho), Surface::sphere(&self.reflected_center(), self.rho)]
    }
}

/// Closed form of `(−Δ)^s φ` on the upper half of B_ρ(a), off ∂B_ρ(a*).
pub fn barrier_frac_lap(b: &BarrierSpec, x: &[f64]) -> Result<f64> {
    let p = b.params;
    let (n, s) = (p.nf(), p.s);
    if x.len() != p.n {
        return domain("dimension mismatch");
    }
    if !(x[0] > 0.0) || dist(x, &b.a) >= b.rho {
        return domain("point must lie in the upper half of B_ρ(a)");
    }
    let astar = b.reflected_center();
    let y: Vec<f64> = x.iter().zip(&astar).map(|(xi, ci)| (xi - ci) / b.rho).collect();
    let r = norm(&y);
    if (r - 1.0).abs() < 1e-14 {
        return Err(Error::SingularLocus("point on the reflected sphere".into()));
    }
    let a1 = b.a[0] / b.rho;
    let x1 = x[0] / b.rho;
    // scale: (−Δ)^s φ is homogeneous of degree 1 under x ↦ ρx
    let v = if r < 1.0 {
        2.0 * (n + 2.0 * s) * x1 / n
    } else {
        let st = stability_functions(1.0 / (r * r), p)?;
        (n + 2.0 * s) / n * st.f * x1 + 2.0 * s / n * st.g * a1
    };
    Ok(v * b.rho)
}

/// The same quantity assembled directly from the torsion closed forms of the two balls.
pub fn barrier_frac_lap_direct(b: &BarrierSpec, x: &[f64]) -> Result<ExtendedReal> {
    let p = b.params;
    let mut total = 0.0;
    for c in [b.a.clone(), b.reflected_center()] {
        let y: Vec<f64> = x.iter().zip(&c).map(|(xi, ci)| xi - ci).collect();
        // x₁ = (x − c)₁ + c₁
        let lin = torsion_closed_form(&SolidHarmonic::coordinate(p.n, 0), b.rho, &y, p)?;
        let cst = torsion_closed_form(&SolidHarmonic::constant(p.n), b.rho, &y, p)?;
        match (lin, cst) {
            (ExtendedReal::Finite(l), ExtendedReal::Finite(k)) => total += l + c[0] * k,
            _ => return Ok(ExtendedReal::NegInfinity),
        }
    }
    Ok(ExtendedReal::Finite(total))
}
