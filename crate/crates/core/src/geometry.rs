//! Shapes and the moving-planes experiments built on them.

use crate::error::{domain, Error, Result};
use crate::fraclap::{dist, norm, ScalarField, Surface};
use crate::quadrature::{stream_rng, QuadSpec};
use crate::specfun::{gamma_torsion, hyp2f1, FracParams};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SHAPE_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeDescriptor {
    Ball { center: Vec<f64>, radius: f64 },
    /// `{x : x·normal < offset}`.
    Halfspace { normal: Vec<f64>, offset: f64 },
    /// `x₁²/(1+ε)² + |x′|² < 1`.
    Ellipsoid { n: usize, eps: f64 },
    /// Points of `base` farther than `rho` from its boundary.
    InnerParallel { base: Box<ShapeDescriptor>, rho: f64 },
    /// Unit disk with a bump of height ε and width ε^{1/α} on its lower arc.
    PerturbedDisk { eps: f64, alpha: f64 },
    Complement { of: Box<ShapeDescriptor> },
    Intersection { parts: Vec<ShapeDescriptor> },
    Empty { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeFile {
    pub schema_version: String,
    pub shape: ShapeDescriptor,
}

impl ShapeDescriptor {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        ShapeDescriptor::Ball { center, radius }
    }

    pub fn unit_ball(n: usize) -> Self {
        Self::ball(vec![0.0; n], 1.0)
    }

    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Self {
        ShapeDescriptor::Halfspace { normal, offset }
    }

    pub fn complement(self) -> Self {
        match self {
            ShapeDescriptor::Complement { of } => *of,
            s => ShapeDescriptor::Complement { of: Box::new(s) },
        }
    }

    pub fn intersect(self, other: ShapeDescriptor) -> Self {
        ShapeDescriptor::Intersection { parts: vec![self, other] }
    }

    pub fn minus(self, other: ShapeDescriptor) -> Self {
        self.intersect(other.complement())
    }

    pub fn dim(&self) -> usize {
        match self {
            ShapeDescriptor::Ball { center, .. } => center.len(),
            ShapeDescriptor::Halfspace { normal, .. } => normal.len(),
            ShapeDescriptor::Ellipsoid { n, .. } | ShapeDescriptor::Empty { n } => *n,
            ShapeDescriptor::InnerParallel { base, .. } => base.dim(),
            ShapeDescriptor::PerturbedDisk { .. } => 2,
            ShapeDescriptor::Complement { of } => of.dim(),
            ShapeDescriptor::Intersection { parts } => parts.first().map_or(0, |p| p.dim()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Validation(m.to_string()));
        match self {
            ShapeDescriptor::Ball { center, radius } => {
                if center.is_empty() || !(*radius > 0.0) {
                    return bad("ball needs a centre and a positive radius");
                }
            }
            ShapeDescriptor::Halfspace { normal, .. } => {
                if (norm(normal) - 1.0).abs() > 1e-12 {
                    return bad("half-space normal must be a unit vector");
                }
            }
            ShapeDescriptor::Ellipsoid { n, eps } => {
                if *n < 2 || !(*eps >= 0.0 && *eps < 0.25) {
                    return bad("ellipsoid family needs n ≥ 2 and 0 ≤ ε < 1/4");
                }
            }
            ShapeDescriptor::InnerParallel { base, rho } => {
                base.validate()?;
                let r = base.interior_ball_radius()?;
                if !(*rho > 0.0 && *rho < r) {
                    return bad("parallel distance must lie in (0, interior-ball radius)");
                }
            }
            ShapeDescriptor::PerturbedDisk { eps, alpha } => {
                if !(*alpha > 1.0) || !(*eps > 0.0) {
                    return bad("perturbed disk needs ε > 0 and α > 1");
                }
                let (c, w) = bump_center_width(*eps, *alpha);
                if c - w / 2.0 <= 0.0 || c + w / 2.0 >= 0.5 || *eps >= 0.01 {
                    return bad("bump does not fit in its window; take ε smaller");
                }
            }
            ShapeDescriptor::Complement { of } => of.validate()?,
            ShapeDescriptor::Intersection { parts } => {
                if parts.is_empty() {
                    return bad("empty intersection list");
                }
                let n = parts[0].dim();
                for p in parts {
                    p.validate()?;
                    if p.dim() != n {
                        return bad("intersection of shapes of different dimensions");
                    }
                }
            }
            ShapeDescriptor::Empty { .. } => {}
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ShapeDescriptor::Ball { center, radius } => dist(x, center) < *radius,
            ShapeDescriptor::Halfspace { normal, offset } => dot(x, normal) < *offset,
            ShapeDescriptor::Ellipsoid { .. } | ShapeDescriptor::PerturbedDisk { .. } => self.level(x) < 0.0,
            ShapeDescriptor::InnerParallel { base, rho } => base.contains(x) && base.boundary_distance(x).is_some_and(|d| d > *rho),
            ShapeDescriptor::Complement { of } => !of.contains(x),
            ShapeDescriptor::Intersection { parts } => parts.iter().all(|p| p.contains(x)),
            ShapeDescriptor::Empty { .. } => false,
        }
    }

    /// Negative inside, positive outside, zero on the boundary. Not a
    /// distance in general, but Lipschitz with constant of order one.
    pub fn level(&self, x: &[f64]) -> f64 {
        match self {
            ShapeDescriptor::Ball { center, radius } => dist(x, center) - radius,
            ShapeDescriptor::Halfspace { normal, offset } => dot(x, normal) - offset,
            ShapeDescriptor::Ellipsoid { eps, .. } => {
                let a = 1.0 + eps;
                let r2: f64 = x[1..].iter().map(|v| v * v).sum();
                ((x[0] / a).powi(2) + r2).sqrt() - 1.0
            }
            ShapeDescriptor::PerturbedDisk { eps, alpha } => {
                if in_bump_window(x) {
                    perturbed_lower_arc(*eps, *alpha, x[0]) - x[1]
                } else {
                    norm(x) - 1.0
                }
            }
            ShapeDescriptor::InnerParallel { base, rho } => match base.boundary_distance(x) {
                Some(d) if base.contains(x) => rho - d,
                Some(d) => d + rho,
                None => base.level(x) + rho,
            },
            ShapeDescriptor::Complement { of } => -of.level(x),
            ShapeDescriptor::Intersection { parts } => parts.iter().map(|p| p.level(x)).fold(f64::NEG_INFINITY, f64::max),
            ShapeDescriptor::Empty { .. } => 1.0,
        }
    }

    /// Exact unsigned distance to the boundary where available.
    pub fn boundary_distance(&self, x: &[f64]) -> Option<f64> {
        match self {
            ShapeDescriptor::Ball { .. } | ShapeDescriptor::Halfspace { .. } => Some(self.level(x).abs()),
            ShapeDescriptor::Ellipsoid { eps, .. } => {
                let r: f64 = x[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                Some(ellipse_distance(1.0 + eps, 1.0, x[0], r).0)
            }
            _ => None,
        }
    }

    /// Radius of the uniform interior ball condition.
    pub fn interior_ball_radius(&self) -> Result<f64> {
        match self {
            ShapeDescriptor::Ball { radius, .. } => Ok(*radius),
            ShapeDescriptor::Ellipsoid { eps, .. } => Ok(1.0 / (1.0 + eps)),
            _ => domain("interior-ball radius only known for balls and the ellipsoid family"),
        }
    }

    pub fn bounding_box(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            ShapeDescriptor::Ball { center, radius } => Some(center.iter().map(|c| (c - radius, c + radius)).collect()),
            ShapeDescriptor::Halfspace { .. } | ShapeDescriptor::Complement { .. } => None,
            ShapeDescriptor::Ellipsoid { n, eps } => {
                let mut b = vec![(-1.0, 1.0); *n];
                b[0] = (-1.0 - eps, 1.0 + eps);
                Some(b)
            }
            ShapeDescriptor::InnerParallel { base, .. } => base.bounding_box(),
            ShapeDescriptor::PerturbedDisk { eps, .. } => Some(vec![(-1.0, 1.0), (-1.0 - 2.0 * eps, 1.0)]),
            ShapeDescriptor::Intersection { parts } => {
                let mut acc: Option<Vec<(f64, f64)>> = None;
                for p in parts {
                    if let Some(b) = p.bounding_box() {
                        acc = Some(match acc {
                            None => b,
                            Some(a) => a.iter().zip(&b).map(|(u, v)| (u.0.max(v.0), u.1.min(v.1).max(u.0.max(v.0)))).collect(),
                        });
                    }
                }
                acc
            }
            ShapeDescriptor::Empty { n } => Some(vec![(0.0, 0.0); *n]),
        }
    }

    /// Sorted disjoint parameter intervals `{t : o + t d ∈ shape}` (t ∈ ℝ).
    pub fn ray_intervals(&self, o: &[f64], d: &[f64]) -> Result<Vec<(f64, f64)>> {
        let all = vec![(f64::NEG_INFINITY, f64::INFINITY)];
        Ok(match self {
            ShapeDescriptor::Ball { center, radius } => {
                let mut b = 0.0;
                let mut c = -radius * radius;
                let a = dot(d, d);
                for i in 0..o.len() {
                    let oc = o[i] - center[i];
                    b += d[i] * oc;
                    c += oc * oc;
                }
                let disc = b * b - a * c;
                if disc <= 0.0 {
                    vec![]
                } else {
                    let sq = disc.sqrt();
                    vec![((-b - sq) / a, (-b + sq) / a)]
                }
            }
            ShapeDescriptor::Ellipsoid { eps, .. } => {
                let ax = 1.0 + eps;
                let w = |i: usize| if i == 0 { 1.0 / (ax * ax) } else { 1.0 };
                let (mut a, mut b, mut c) = (0.0, 0.0, -1.0);
                for i in 0..o.len() {
                    a += d[i] * d[i] * w(i);
                    b += o[i] * d[i] * w(i);
                    c += o[i] * o[i] * w(i);
                }
                let disc = b * b - a * c;
                if disc <= 0.0 {
                    vec![]
                } else {
                    let sq = disc.sqrt();
                    vec![((-b - sq) / a, (-b + sq) / a)]
                }
            }
            ShapeDescriptor::Halfspace { normal, offset } => {
                let dn = dot(d, normal);
                let on = dot(o, normal);
                if dn == 0.0 {
                    if on < *offset {
                        all
                    } else {
                        vec![]
                    }
                } else if dn > 0.0 {
                    vec![(f64::NEG_INFINITY, (offset - on) / dn)]
                } else {
                    vec![((offset - on) / dn, f64::INFINITY)]
                }
            }
            ShapeDescriptor::Complement { of } => complement_intervals(&of.ray_intervals(o, d)?),
            ShapeDescriptor::Intersection { parts } => {
                let mut acc = all;
                for p in parts {
                    acc = intersect_intervals(&acc, &p.ray_intervals(o, d)?);
                }
                acc
            }
            ShapeDescriptor::Empty { .. } => vec![],
            _ => return domain("exact ray intervals unavailable for this shape"),
        })
    }

    /// Scale by `t` about the origin.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        Ok(match self {
            ShapeDescriptor::Ball { center, radius } => Self::ball(center.iter().map(|c| c * t).collect(), radius * t),
            ShapeDescriptor::Halfspace { normal, offset } => Self::halfspace(normal.clone(), offset * t),
            ShapeDescriptor::Complement { of } => ShapeDescriptor::Complement { of: Box::new(of.scaled(t)?) },
            ShapeDescriptor::Intersection { parts } => ShapeDescriptor::Intersection { parts: parts.iter().map(|p| p.scaled(t)).collect::<Result<_>>()? },
            ShapeDescriptor::Empty { n } => ShapeDescriptor::Empty { n: *n },
            _ => return domain("scaling not supported for this shape"),
        })
    }

    /// Boundary samples of a planar shape: `m` along the main curve and, for
    /// shapes with a small-scale feature, `m` more concentrated there.
    pub fn boundary_points(&self, m: usize) -> Result<Vec<[f64; 2]>> {
        if self.dim() != 2 {
            return domain("boundary sampling implemented for planar shapes");
        }
        let angles = |k: usize| (0..k).map(move |i| 2.0 * PI * (i as f64 + 0.5) / k as f64);
        Ok(match self {
            ShapeDescriptor::Ball { center, radius } => angles(m).map(|t| [center[0] + radius * t.cos(), center[1] + radius * t.sin()]).collect(),
            ShapeDescriptor::Ellipsoid { eps, .. } => angles(m).map(|t| [(1.0 + eps) * t.cos(), t.sin()]).collect(),
            ShapeDescriptor::InnerParallel { base, rho } => match base.as_ref() {
                ShapeDescriptor::Ellipsoid { eps, .. } => angles(m).map(|t| ellipse_parallel_point(1.0 + eps, 1.0, *rho, t)).collect(),
                ShapeDescriptor::Ball { center, radius } => angles(m).map(|t| [center[0] + (radius - rho) * t.cos(), center[1] + (radius - rho) * t.sin()]).collect(),
                _ => return domain("boundary sampling unavailable for this parallel set"),
            },
            ShapeDescriptor::PerturbedDisk { eps, alpha } => {
                let mut pts: Vec<[f64; 2]> = angles(m).map(|t| [t.cos(), t.sin()]).filter(|p| !in_bump_window(p)).collect();
                // the replaced arc: graph over x ∈ (0, 1/2), dense around the bump
                let (c, w) = bump_center_width(*eps, *alpha);
                let coarse = m / 4;
                for i in 0..coarse {
                    let x = 0.5 * (i as f64 + 0.5) / coarse as f64;
                    if (x - c).abs() > w / 2.0 {
                        pts.push([x, perturbed_lower_arc(*eps, *alpha, x)]);
                    }
                }
                for i in 0..m {
                    let x = c - w / 2.0 + w * (i as f64 + 0.5) / m as f64;
                    pts.push([x, perturbed_lower_arc(*eps, *alpha, x)]);
                }
                pts
            }
            _ => return domain("boundary sampling unavailable for this shape"),
        })
    }

    /// Smallest geometric length scale of the shape.
    pub fn feature_scale(&self) -> f64 {
        match self {
            ShapeDescriptor::PerturbedDisk { eps, alpha } => bump_center_width(*eps, *alpha).1,
            _ => 1.0,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let f = ShapeFile { schema_version: SHAPE_SCHEMA_VERSION.into(), shape: self.clone() };
        serde_json::to_string_pretty(&f).map_err(|e| Error::Validation(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ShapeFile = serde_json::from_str(s).map_err(|e| Error::Validation(format!("shape JSON: {e}")))?;
        if f.schema_version != SHAPE_SCHEMA_VERSION {
            return Err(Error::Validation(format!("unsupported shape schema version {}", f.schema_version)));
        }
        f.shape.validate()?;
        Ok(f.shape)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn complement_intervals(iv: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start = f64::NEG_INFINITY;
    for &(a, b) in iv {
        if a > start {
            out.push((start, a));
        }
        start = b;
    }
    if start < f64::INFINITY {
        out.push((start, f64::INFINITY));
    }
    out
}

pub(crate) fn intersect_intervals(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo < hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Closest point on the ellipse `(x/a)² + (y/b)² = 1`, a ≥ b > 0, to `(p, q)`.
/// Returns the distance and the closest point (in the quadrant of (p, q)).
pub fn ellipse_distance(a: f64, b: f64, p: f64, q: f64) -> (f64, [f64; 2]) {
    let (sp, sq) = (p.signum(), q.signum());
    let (p, q) = (p.abs(), q.abs());
    let (x0, x1) = if q > 0.0 {
        if p > 0.0 {
            // (x0, x1) = (a²p/(t+a²), b²q/(t+b²)) with G(t) = (x0/a)² + (x1/b)² − 1 = 0
            let g = |t: f64| (a * p / (t + a * a)).powi(2) + (b * q / (t + b * b)).powi(2) - 1.0;
            let mut lo = -b * b + b * q;
            let mut hi = -b * b + (a * a * p * p + b * b * q * q).sqrt();
            if g(lo) < 0.0 {
                lo = -b * b + 1e-300_f64.max(b * q * 1e-3);
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if g(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            (a * a * p / (t + a * a), b * b * q / (t + b * b))
        } else {
            (0.0, b)
        }
    } else if a > b && p < (a * a - b * b) / a {
        let x0 = a * a * p / (a * a - b * b);
        (x0, b * (1.0 - (x0 / a).powi(2)).max(0.0).sqrt())
    } else {
        (a, 0.0)
    };
    let d = ((x0 - p).powi(2) + (x1 - q).powi(2)).sqrt();
    (d, [x0 * if sp < 0.0 { -1.0 } else { 1.0 }, x1 * if sq < 0.0 { -1.0 } else { 1.0 }])
}

/// Point at distance `rho` inside the ellipse along the normal at parameter t.
fn ellipse_parallel_point(a: f64, b: f64, rho: f64, t: f64) -> [f64; 2] {
    let (x, y) = (a * t.cos(), b * t.sin());
    let (nx, ny) = (t.cos() / a, t.sin() / b);
    let l = (nx * nx + ny * ny).sqrt();
    [x - rho * nx / l, y - rho * ny / l]
}

fn bump_center_width(eps: f64, alpha: f64) -> (f64, f64) {
    (eps.powf(1.0 - 1.0 / alpha), eps.powf(1.0 / alpha))
}

fn in_bump_window(x: &[f64]) -> bool {
    x[0] > 0.0 && x[0] < 0.5 && x[1] < -0.5
}

/// C^∞ cut-off: 1 on [0, 1/4], 0 on [1/2, ∞).
fn smooth_step(t: f64) -> f64 {
    let z = (0.5 - t) * 4.0;
    if z <= 0.0 {
        return 0.0;
    }
    if z >= 1.0 {
        return 1.0;
    }
    let e0 = (-1.0 / z).exp();
    let e1 = (-1.0 / (1.0 - z)).exp();
    e0 / (e0 + e1)
}

/// Odd bump profile: η(τ) = 2τ on [−1/4, 1/4], |η| ≤ 1, supported in (−1/2, 1/2).
pub fn bump_profile(tau: f64) -> f64 {
    2.0 * tau * smooth_step(tau.abs())
}

/// Lower boundary of the perturbed disk over x ∈ (0, 1/2).
pub fn perturbed_lower_arc(eps: f64, alpha: f64, x: f64) -> f64 {
    let (c, w) = bump_center_width(eps, alpha);
    -(1.0 - x * x).sqrt() - eps * bump_profile((x - c) / w)
}

/// Parameters of the ellipsoid / perturbed-disk families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub eps: f64,
    pub alpha: Option<f64>,
    pub params: FracParams,
}

impl FamilyParams {
    pub fn ellipsoid(eps: f64, params: FracParams) -> Result<Self> {
        if !(eps >= 0.0 && eps < 0.25) {
            return domain("ε must lie in [0, 1/4)");
        }
        if params.n < 2 {
            return domain("the ellipsoid family needs n ≥ 2");
        }
        Ok(FamilyParams { eps, alpha: None, params })
    }

    pub fn shape(&self) -> ShapeDescriptor {
        match self.alpha {
            Some(alpha) => ShapeDescriptor::PerturbedDisk { eps: self.eps, alpha },
            None => ShapeDescriptor::Ellipsoid { n: self.params.n, eps: self.eps },
        }
    }
}

/// Normalising constant of the ellipsoid torsion function.
pub fn ellipsoid_gamma(fp: &FamilyParams) -> Result<f64> {
    let (n, s, e) = (fp.params.nf(), fp.params.s, fp.eps);
    let h = hyp2f1((n + 2.0 * s) / 2.0, 0.5, n / 2.0, 1.0 - (1.0 + e).powi(2))?;
    Ok(gamma_torsion(fp.params) / ((1.0 + e) * h))
}

/// Torsion function of the ellipsoid Ω_ε as a field.
#[derive(Debug, Clone)]
pub struct EllipsoidTorsion {
    pub fp: FamilyParams,
    gamma: f64,
}

impl EllipsoidTorsion {
    pub fn new(fp: FamilyParams) -> Result<Self> {
        Ok(EllipsoidTorsion { gamma: ellipsoid_gamma(&fp)?, fp })
    }
}

impl ScalarField for EllipsoidTorsion {
    fn dim(&self) -> usize {
        self.fp.params.n
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let a = 1.0 + self.fp.eps;
        let w = 1.0 - (x[0] / a).powi(2) - x[1..].iter().map(|v| v * v).sum::<f64>();
        if w > 0.0 {
            self.gamma * w.powf(self.fp.params.s)
        } else {
            0.0
        }
    }
    fn support_radius(&self) -> Option<f64> {
        Some(1.0 + self.fp.eps)
    }
    fn singular_surfaces(&self) -> Vec<Surface> {
        let mut axes = vec![1.0; self.fp.params.n];
        axes[0] = 1.0 + self.fp.eps;
        vec![Surface::Ellipsoid { axes }]
    }
}

pub fn ellipsoid_torsion(fp: &FamilyParams, x: &[f64]) -> Result<f64> {
    Ok(EllipsoidTorsion::new(*fp)?.eval(x))
}

/// Chart of the upper half of the inner parallel boundary at distance 1/2.
pub fn parallel_param(fp: &FamilyParams, r: &[f64]) -> Result<Vec<f64>> {
    let t = norm(r);
    if t >= 1.0 || r.len() + 1 != fp.params.n {
        return domain("chart parameter must lie in the open unit ball of ℝ^{n−1}");
    }
    let e = fp.eps;
    let root = (1.0 + ((1.0 + e).powi(2) - 1.0) * t * t).sqrt();
    let a = 1.0 + e - 1.0 / (2.0 * root);
    let b = 1.0 - (1.0 + e) / (2.0 * root);
    let mut out = Vec::with_capacity(fp.params.n);
    out.push(a * (1.0 - t * t).sqrt());
    out.extend(r.iter().map(|v| b * v));
    Ok(out)
}

/// Inradius/circumradius deficit of a centred shape.
pub fn rho_deficit(shape: &ShapeDescriptor) -> Result<f64> {
    match shape {
        ShapeDescriptor::Ball { .. } => Ok(0.0),
        ShapeDescriptor::Ellipsoid { eps, .. } => Ok(*eps),
        ShapeDescriptor::PerturbedDisk { .. } => {
            let pts = shape.boundary_points(4000)?;
            let (lo, hi) = pts.iter().map(|p| norm(p)).fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r), b.max(r)));
            Ok(hi - lo)
        }
        _ => domain("deficit unavailable for this shape"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormResult {
    /// Maximum over grid pairs.
    pub coarse: f64,
    /// After local refinement; never below `coarse`.
    pub refined: f64,
    pub pair: (Vec<f64>, Vec<f64>),
}

/// Lower bound of `sup |u(x) − u(y)|/|x − y|` over the image of `chart`,
/// whose parameter domain is the open unit ball of dimension `pdim`.
pub fn boundary_seminorm(
    u: &dyn Fn(&[f64]) -> f64,
    chart: &(dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync),
    pdim: usize,
    grid: usize,
) -> Result<SeminormResult> {
    if grid < 64 {
        return domain("grid must have at least 64 points per dimension");
    }
    if !(1..=2).contains(&pdim) {
        return domain("chart dimension must be 1 or 2");
    }
    let h = 2.0 / (grid + 1) as f64;
    let coords: Vec<f64> = (1..=grid).map(|i| -1.0 + i as f64 * h).collect();
    let params: Vec<Vec<f64>> = if pdim == 1 {
        coords.iter().map(|&c| vec![c]).collect()
    } else {
        coords.iter().flat_map(|&a| coords.iter().map(move |&b| vec![a, b])).filter(|p| norm(p) < 1.0).collect()
    };
    let pts: Vec<Vec<f64>> = params.iter().map(|r| chart(r)).collect::<Result<_>>()?;
    let vals: Vec<f64> = pts.iter().map(|p| u(p)).collect();
    let best = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut b = (0.0f64, i, i);
            for j in i + 1..pts.len() {
                let d = dist(&pts[i], &pts[j]);
                if d < 1e-14 {
                    return Err(Error::Validation("chart maps distinct parameters to the same point".into()));
                }
                let qv = (vals[i] - vals[j]).abs() / d;
                if qv > b.0 {
                    b = (qv, i, j);
                }
            }
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0, 0, 0), |a, b| if b.0 > a.0 { b } else { a });
    let coarse = best.0;
    let (mut r1, mut r2) = (params[best.1].clone(), params[best.2].clone());
    if coarse == 0.0 {
        return Ok(SeminormResult { coarse, refined: 0.0, pair: (r1, r2) });
    }
    let min_sep = 1e-7;
    let quotient = |a: &[f64], b: &[f64]| -> Option<f64> {
        if norm(a) >= 1.0 || norm(b) >= 1.0 || dist(a, b) < min_sep {
            return None;
        }
        let (x, y) = (chart(a).ok()?, chart(b).ok()?);
        Some((u(&x) - u(&y)).abs() / dist(&x, &y))
    };
    // compass search in the joint parameter space; moving both points
    // together is included so the search can follow the diagonal ridge
    let mut val = coarse;
    let mut step = h;
    let dirs = compass_dirs(pdim);
    while step > 1e-10 {
        let mut improved = false;
        for d in &dirs {
            let a: Vec<f64> = r1.iter().zip(&d.0).map(|(x, v)| x + step * v).collect();
            let b: Vec<f64> = r2.iter().zip(&d.1).map(|(x, v)| x + step * v).collect();
            if let Some(qv) = quotient(&a, &b) {
                if qv > val {
                    val = qv;
                    r1 = a;
                    r2 = b;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(SeminormResult { coarse, refined: val, pair: (r1, r2) })
}

fn compass_dirs(pdim: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    for k in 0..pdim {
        for sgn in [1.0, -1.0] {
            let mut e = vec![0.0; pdim];
            e[k] = sgn;
            let z = vec![0.0; pdim];
            out.push((e.clone(), z.clone()));
            out.push((z, e.clone()));
            out.push((e.clone(), e.clone()));
            out.push((e.clone(), e.iter().map(|v| -v).collect()));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRatio {
    pub eps: Vec<f64>,
    pub ratios: Vec<f64>,
    pub extrapolated: f64,
    /// |ratio(ε) − limit| decreases along the list.
    pub monotone: bool,
}

/// `[u_ε]_{∂G_ε⁺}/ρ(Ω_ε)` over a decreasing ε list, extrapolated to ε = 0.
pub fn limit_ratio_experiment(eps: &[f64], p: FracParams, grid: usize) -> Result<LimitRatio> {
    if eps.len() < 3 || eps.windows(2).any(|w| w[1] >= w[0]) || eps.iter().any(|&e| !(e > 0.0 && e < 0.25)) {
        return domain("need at least three decreasing ε values in (0, 1/4)");
    }
    if p.n != 2 {
        return domain("the ratio experiment is implemented for n = 2");
    }
    let ratios: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let fp = FamilyParams::ellipsoid(e, p)?;
            let u = EllipsoidTorsion::new(fp)?;
            let chart = move |r: &[f64]| parallel_param(&fp, r);
            let sn = boundary_seminorm(&|x| u.eval(x), &chart, 1, grid)?;
            Ok(sn.refined / rho_deficit(&fp.shape())?)
        })
        .collect::<Result<_>>()?;
    let extrapolated = neville_at_zero(eps, &ratios);
    let gaps: Vec<f64> = ratios.iter().map(|r| (r - extrapolated).abs()).collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    Ok(LimitRatio { eps: eps.to_vec(), ratios, extrapolated, monotone })
}

/// Value at 0 of the interpolating polynomial through `(x_i, y_i)`.
pub fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = x.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    p[0]
}

/// Asymptotic constant `s γ_{n,s} (3/4)^{s−1}`.
pub fn limit_ratio_prediction(p: FracParams) -> f64 {
    p.s * gamma_torsion(p) * 0.75f64.powf(p.s - 1.0)
}

fn reflect(x: [f64; 2], e: [f64; 2], mu: f64) -> [f64; 2] {
    let t = x[0] * e[0] + x[1] * e[1] - mu;
    [x[0] - 2.0 * t * e[0], x[1] - 2.0 * t * e[1]]
}

const PLANE_MARGIN: f64 = 1e-9;

/// Critical position of the moving plane `{x·e = μ}` for a planar shape.
pub fn critical_plane(shape: &ShapeDescriptor, e: [f64; 2], tol: f64) -> Result<f64> {
    if ((e[0] * e[0] + e[1] * e[1]).sqrt() - 1.0).abs() > 1e-12 {
        return domain("direction must be a unit vector");
    }
    let pts = shape.boundary_points(1000)?;
    let proj = |p: &[f64; 2]| p[0] * e[0] + p[1] * e[1];
    let big = pts.iter().map(proj).fold(f64::NEG_INFINITY, f64::max);
    let small = pts.iter().map(proj).fold(f64::INFINITY, f64::min);
    let ok = |mu: f64| pts.iter().filter(|p| proj(p) > mu).all(|p| shape.level(&reflect(*p, e, mu)) <= PLANE_MARGIN);
    let step = (shape.feature_scale() / 16.0).min((big - small) / 64.0);
    let mut pass = big;
    let mut fail = None;
    let mut mu = big - step;
    while mu > small {
        if ok(mu) {
            pass = mu;
            mu -= step;
        } else {
            fail = Some(mu);
            break;
        }
    }
    let Some(mut lo) = fail else {
        return Ok(small);
    };
    if pass == big && !ok(big - 0.5 * step) {
        return Err(Error::Validation("reflected cap never fits inside the shape".into()));
    }
    let mut hi = pass;
    for _ in 0..48 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Measure of `{x ∈ Ω △ Ω′ : |x·e − λ| ≤ γ}` with Ω′ the reflection across
/// `{x·e = λ}`, by jittered stratified sampling (two samples per cell).
pub fn slab_measure(shape: &ShapeDescriptor, lambda: f64, gamma: f64, e: [f64; 2], q: &QuadSpec) -> Result<crate::quadrature::IntegralResult> {
    if !(gamma > 0.0 && gamma <= 0.25) {
        return domain("half-width must lie in (0, 1/4]");
    }
    if shape.dim() != 2 {
        return domain("slab measures are implemented for planar shapes");
    }
    q.validate()?;
    let bb = shape.bounding_box().ok_or_else(|| Error::Validation("slab measure needs a bounded shape".into()))?;
    let rb = bb.iter().flat_map(|(a, b)| [a.abs(), b.abs()]).fold(0.0, f64::max) * std::f64::consts::SQRT_2;
    let perp = [-e[1], e[0]];
    // the set is symmetric under the reflection, so sample the half slab t ∈ [λ−γ, λ]
    let area = gamma * 2.0 * rb;
    let cells = (q.mc_samples / 2).max(1) as f64;
    let hy = (area / cells / 8.0).sqrt();
    let nx = (gamma / (8.0 * hy)).ceil().max(1.0) as usize;
    let ny = (2.0 * rb / hy).ceil().max(1.0) as usize;
    let (hx, hy) = (gamma / nx as f64, 2.0 * rb / ny as f64);
    let cell_area = hx * hy;
    let rows: Vec<(f64, f64)> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(q.rng_seed, j as u64);
            let (mut tot, mut var) = (0.0, 0.0);
            for i in 0..nx {
                let mut v = [0.0f64; 2];
                for vk in v.iter_mut() {
                    let t = lambda - gamma + (i as f64 + rng.gen::<f64>()) * hx;
                    let w = -rb + (j as f64 + rng.gen::<f64>()) * hy;
                    let x = [t * e[0] + w * perp[0], t * e[1] + w * perp[1]];
                    let xr = reflect(x, e, lambda);
                    *vk = if shape.contains(&x) != shape.contains(&xr) { 1.0 } else { 0.0 };
                }
                tot += 0.5 * (v[0] + v[1]);
                var += (v[0] - v[1]).powi(2) / 4.0;
            }
            (tot, var)
        })
        .collect();
    let (tot, var) = rows.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(crate::quadrature::IntegralResult {
        value: 2.0 * tot * cell_area,
        err_estimate: 2.0 * var.sqrt() * cell_area,
        evaluations: (2 * nx * ny) as u64,
        converged: true,
    })
}

/// `2ω_{n−1}∫_{λ−γ}^{λ} [(R²−t²)_+^{(n−1)/2} − (r²−(2λ−t)²)_+^{(n−1)/2}] dt`, the
/// slab measure of the annular region `(B_R ∪ B_R′) \ (B_r ∩ B_r′)`.
pub fn annulus_slab_bound(n: usize, big_r: f64, r: f64, lambda: f64, gamma: f64) -> f64 {
    let w = crate::specfun::unit_ball_volume(n - 1);
    let k = (n as f64 - 1.0) / 2.0;
    let f = |t: f64| (big_r * big_r - t * t).max(0.0).powf(k) - (r * r - (2.0 * lambda - t).powi(2)).max(0.0).powf(k);
    2.0 * w * crate::quadrature::adaptive_gk(f, lambda - gamma, lambda, 1e-13, 1e-11, 2000).value
}

/// Inner parallel set `{x ∈ Ω : dist(x, ∂Ω) > ρ}`.
pub fn inner_parallel(base: &ShapeDescriptor, rho: f64) -> Result<ShapeDescriptor> {
    let r = base.interior_ball_radius()?;
    if !(rho > 0.0 && rho < r) {
        return domain(format!("ρ must lie in (0, {r})"));
    }
    Ok(match base {
        ShapeDescriptor::Ball { center, radius } => ShapeDescriptor::ball(center.clone(), radius - rho),
        _ => ShapeDescriptor::InnerParallel { base: Box::new(base.clone()), rho },
    })
}

/// Fractions of sampled points confirming `Ω^ρ + B_ρ = Ω` in both directions.
pub fn minkowski_check(base: &ShapeDescriptor, rho: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let inner = inner_parallel(base, rho)?;
    let bb = base.bounding_box().ok_or_else(|| Error::Validation("unbounded base".into()))?;
    let chart = inner.boundary_points(20000)?;
    let dist_to_inner = |x: &[f64; 2]| -> f64 {
        if inner.contains(x) {
            return 0.0;
        }
        chart.iter().map(|c| dist(x, c)).fold(f64::INFINITY, f64::min)
    };
    let mut rng = stream_rng(seed, 0);
    let (mut fwd_ok, mut fwd_n) = (0usize, 0usize);
    while fwd_n < samples {
        let x = [rng.gen_range(bb[0].0..bb[0].1), rng.gen_range(bb[1].0..bb[1].1)];
        if !base.contains(&x) {
            continue;
        }
        fwd_n += 1;
        if dist_to_inner(&x) < rho {
            fwd_ok += 1;
        }
    }
    let ibb = [inner.bounding_box().unwrap()[0], inner.bounding_box().unwrap()[1]];
    let (mut back_ok, mut back_n) = (0usize, 0usize);
    while back_n < samples {
        let y = [rng.gen_range(ibb[0].0..ibb[0].1), rng.gen_range(ibb[1].0..ibb[1].1)];
        if !inner.contains(&y) {
            continue;
        }
        let (r, t) = (rho * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
        let z = [y[0] + r * t.cos(), y[1] + r * t.sin()];
        back_n += 1;
        if base.contains(&z) {
            back_ok += 1;
        }
    }
    Ok((fwd_ok as f64 / fwd_n as f64, back_ok as f64 / back_n as f64))
}

/// `C` with `B_{1−Cε} ⊂ Ω ⊂ B_{1+Cε}` for the perturbed disk, from boundary samples.
pub fn perturbed_disk_radius_constant(eps: f64, alpha: f64) -> Result<f64> {
    let s = ShapeDescriptor::PerturbedDisk { eps, alpha };
    s.validate()?;
    let pts = s.boundary_points(4000)?;
    Ok(pts.iter().map(|p| (norm(p) - 1.0).abs()).fold(0.0, f64::max) / eps)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
