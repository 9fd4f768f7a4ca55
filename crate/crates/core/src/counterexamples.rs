//! Explicit odd polynomials that break the classical Harnack inequality and
//! the strong maximum principle for antisymmetric s-harmonic approximations.

use crate::error::{domain, Error, Result};
use num_rational::Ratio;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub type Q = Ratio<i128>;

fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

/// Horner evaluation of an odd polynomial Σ c_k x^{2k+1}.
fn odd_horner<T>(coef: &[T], x: T) -> T
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Add<Output = T>,
{
    let x2 = x * x;
    let mut acc = coef[coef.len() - 1];
    for &c in coef[..coef.len() - 1].iter().rev() {
        acc = acc * x2 + c;
    }
    acc * x
}

/// f^(ε)(x) = ax + bx³ + cx⁵ + dx⁷.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarnackFamily {
    pub eps: f64,
}

impl HarnackFamily {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return domain("ε must lie in (0,1)");
        }
        Ok(HarnackFamily { eps })
    }

    /// Coefficients as (constant, slope in ε) pairs.
    fn parts() -> [(Q, Q); 4] {
        [
            (q(5 * 64, 54), q(25, 54)),
            (q(-128, 72), q(-73, 72)),
            (q(-8, 36), q(23, 36)),
            (q(16, 216), q(-19, 216)),
        ]
    }

    /// Exact coefficients [a, b, c, d] for rational ε.
    pub fn coefficients_exact(eps: Q) -> [Q; 4] {
        Self::parts().map(|(c0, c1)| c0 + c1 * eps)
    }

    pub fn coefficients(&self) -> [f64; 4] {
        let f = |r: Q| *r.numer() as f64 / *r.denom() as f64;
        Self::parts().map(|(c0, c1)| f(c0) + f(c1) * self.eps)
    }

    pub fn eval(&self, x: f64) -> f64 {
        odd_horner(&self.coefficients(), x)
    }

    pub fn eval_exact(eps: Q, x: Q) -> Q {
        odd_horner(&Self::coefficients_exact(eps), x)
    }

    /// The ratio (4 − ε)/(3ε) that blows up as ε → 0⁺.
    pub fn indicative_ratio(&self) -> f64 {
        (4.0 - self.eps) / (3.0 * self.eps)
    }
}

const SMP: [(i128, i128); 5] = [(301, 50), (-4193, 2160), (-2681, 14400), (167, 1440), (-371, 43200)];

pub fn smp_coefficients() -> [Q; 5] {
    SMP.map(|(n, d)| q(n, d))
}

/// −371/43200 x⁹ + 167/1440 x⁷ − 2681/14400 x⁵ − 4193/2160 x³ + 301/50 x.
pub fn smp_counterexample_eval(x: f64) -> f64 {
    odd_horner(&SMP.map(|(n, d)| n as f64 / d as f64), x)
}

pub fn smp_counterexample_exact(x: Q) -> Q {
    odd_horner(&smp_coefficients(), x)
}

pub fn harnack_family_eval(eps: f64, x: f64) -> Result<f64> {
    Ok(HarnackFamily::new(eps)?.eval(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
}

/// Supremum over the closed interval: uniform grid, then golden-section
/// refinement in the bracket around the best node.
pub fn refine_sup<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, grid: usize) -> Extremum {
    let grid = grid.max(2);
    let h = (b - a) / grid as f64;
    let (mut k, mut best) = (0usize, f64::NEG_INFINITY);
    for i in 0..=grid {
        let v = f(a + i as f64 * h);
        if v > best {
            best = v;
            k = i;
        }
    }
    let (mut lo, mut hi) = ((a + (k as f64 - 1.0) * h).max(a), (a + (k as f64 + 1.0) * h).min(b));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-14 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut out = Extremum { x: a + k as f64 * h, value: best };
    for x in [x1, x2, lo, hi] {
        let v = f(x);
        if v > out.value {
            out = Extremum { x, value: v };
        }
    }
    out
}

pub fn refine_inf<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, grid: usize) -> Extremum {
    let e = refine_sup(|x| -f(x), a, b, grid);
    Extremum { x: e.x, value: -e.value }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Harnack,
    Smp,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Harnack => "harnack",
            Family::Smp => "smp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "harnack" => Ok(Family::Harnack),
            "smp" => Ok(Family::Smp),
            _ => domain(format!("unknown family {s:?}")),
        }
    }
}

/// Uniform grid a, a+h, …, b (the count is rounded so b is hit).
pub fn uniform_grid(a: f64, b: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(b >= a) {
        return domain("grid needs a ≤ b and step > 0");
    }
    let m = ((b - a) / step).round() as usize;
    Ok((0..=m).map(|i| a + i as f64 * step).collect())
}

pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `family,eps,x,f` rows. The smp family ignores ε and is written once with eps empty.
pub fn write_family_csv<W: Write>(w: W, family: Family, eps: &[f64], grid: &[f64]) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    wr.write_record(["family", "eps", "x", "f"]).map_err(io)?;
    match family {
        Family::Harnack => {
            for &e in eps {
                let h = HarnackFamily::new(e)?;
                for &x in grid {
                    wr.write_record([family.name(), &fmt17(e), &fmt17(x), &fmt17(h.eval(x))]).map_err(io)?;
                }
            }
        }
        Family::Smp => {
            for &x in grid {
                wr.write_record([family.name(), "", &fmt17(x), &fmt17(smp_counterexample_eval(x))]).map_err(io)?;
            }
        }
    }
    wr.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn emit_family_csv(family: Family, eps: &[f64], grid: &[f64], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_family_csv(std::io::BufWriter::new(f), family, eps, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn smp_pinned_values() {
        assert_eq!(smp_counterexample_exact(q(2, 1)), q(1, 1));
        assert_eq!(smp_counterexample_exact(q(3, 1)), q(5, 1));
        assert!((smp_counterexample_eval(2.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn smp_lower_bounds() {
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            assert!(smp_counterexample_eval(x) >= 3.0 * x - 1e-12, "x={x}");
            let y = 1.0 + 2.0 * x;
            assert!(smp_counterexample_eval(y) >= 1.0 - 1e-12, "y={y}");
        }
    }

    #[test]
    fn harnack_extremes() {
        for eps in [0.2, 0.5] {
            let h = HarnackFamily::new(eps).unwrap();
            let sup = refine_sup(|x| h.eval(x), 1.0, 2.0, 2000);
            let inf = refine_inf(|x| h.eval(x), 0.5, 2.5, 2000);
            assert!((sup.value - 4.0).abs() < 1e-6, "{sup:?}");
            assert!((inf.value - 2.0 * eps).abs() < 1e-6, "{inf:?}");
        }
        // the extremes sit at x = 1 and x = 2 exactly
        let e = q(1, 5);
        assert_eq!(HarnackFamily::eval_exact(e, q(1, 1)), q(4, 1));
        assert_eq!(HarnackFamily::eval_exact(e, q(2, 1)), q(2, 5));
    }

    #[test]
    fn ratio_diverges() {
        for eps in [0.12, 0.05, 0.01] {
            assert!(HarnackFamily::new(eps).unwrap().indicative_ratio() > 10.0);
        }
        assert!(HarnackFamily::new(0.0).is_err());
    }

    #[test]
    fn csv_shape_and_roundtrip() {
        let grid = uniform_grid(-3.0, 3.0, 0.01).unwrap();
        assert_eq!(grid.len(), 601);
        let eps = [0.2, 0.4, 0.6, 0.8];
        let mut a = Vec::new();
        write_family_csv(&mut a, Family::Harnack, &eps, &grid).unwrap();
        let mut b = Vec::new();
        write_family_csv(&mut b, Family::Harnack, &eps, &grid).unwrap();
        assert_eq!(a, b);
        assert!(!a.contains(&b'\r'));
        let mut rd = csv::Reader::from_reader(a.as_slice());
        let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 4 * 601);
        for r in rows.iter().step_by(97) {
            let e: f64 = r[1].parse().unwrap();
            let x: f64 = r[2].parse().unwrap();
            let f: f64 = r[3].parse().unwrap();
            assert_eq!(f, HarnackFamily::new(e).unwrap().eval(x));
        }
    }

    proptest! {
        #[test]
        fn odd_exact(n in -500i128..500, d in 1i128..60, en in 1i128..99) {
            let x = q(n, d);
            let e = q(en, 100);
            prop_assert!(smp_counterexample_exact(x) + smp_counterexample_exact(-x) == q(0, 1));
            prop_assert!(HarnackFamily::eval_exact(e, x) + HarnackFamily::eval_exact(e, -x) == q(0, 1));
        }

        #[test]
        fn float_matches_exact(n in -300i128..300, en in 1i128..99) {
            let (x, e) = (q(n, 100), q(en, 100));
            let exact = HarnackFamily::eval_exact(e, x);
            let v = HarnackFamily::new(en as f64 / 100.0).unwrap().eval(n as f64 / 100.0);
            let ev = *exact.numer() as f64 / *exact.denom() as f64;
            prop_assert!((v - ev).abs() <= 1e-12 * (1.0 + ev.abs()));
        }
    }
}
