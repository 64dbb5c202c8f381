//! Real roots of the small univariate polynomials produced by elimination.
//!
//! Roots are isolated by recursion on the derivative: between consecutive
//! critical points a polynomial is monotone, so each such interval holds at
//! most one root, found by bisection. Critical points where the polynomial
//! itself vanishes (to tolerance) are reported as tangential roots.

use num_complex::Complex64;

use crate::error::{KinematicsError, Result};

/// Default relative residual tolerance for accepted roots.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Relative tolerance used to trim vanishing leading coefficients.
pub const TRIM_TOL: f64 = 1e-12;

const MAX_DEGREE: usize = 12;
const UNIT_EPS: f64 = 1e-9;

/// Dense real polynomial, coefficients in ascending order of degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial, trimming leading coefficients that are
    /// negligible relative to the largest one.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(KinematicsError::NonFiniteCoefficient(i));
        }
        let mut coeffs = coeffs;
        let max = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.abs() <= TRIM_TOL * max) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        debug_assert!(coeffs.len() <= MAX_DEGREE + 1, "degree above {MAX_DEGREE}");
        Ok(Polynomial { coeffs })
    }

    /// Monic-free product of linear factors `(x - r)`.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut coeffs = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= r * c;
            }
            coeffs = next;
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().expect("non-empty")
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial { coeffs: vec![0.0] };
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
        Polynomial { coeffs }
    }

    /// Largest absolute coefficient.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Residual scale at `x`: `max|coeff| * max(1, |x|)^degree`.
    pub fn scale_at(&self, x: f64) -> f64 {
        self.max_coeff() * x.abs().max(1.0).powi(self.degree() as i32)
    }

    /// Recovers the coefficients of a polynomial of degree at most
    /// `max_degree` from its values on `nodes` points of the unit circle.
    ///
    /// The nodes sit at angles `(2k + 1) pi / nodes`, which avoids the real
    /// axis and `t = +-i`. Coefficients past `max_degree` must vanish to
    /// `tail_tol` relative to the largest kept coefficient, otherwise the
    /// sampled function was not a polynomial of that degree.
    pub fn interpolate_on_circle<F>(
        f: F,
        max_degree: usize,
        nodes: usize,
        tail_tol: f64,
    ) -> Result<Polynomial>
    where
        F: Fn(Complex64) -> Complex64,
    {
        assert!(nodes > max_degree, "need more nodes than the degree bound");
        let n = nodes as f64;
        let samples: Vec<(Complex64, Complex64)> = (0..nodes)
            .map(|k| {
                let t =
                    Complex64::from_polar(1.0, (2.0 * k as f64 + 1.0) * std::f64::consts::PI / n);
                (t, f(t))
            })
            .collect();

        let coeff = |j: usize| -> Complex64 {
            samples
                .iter()
                .map(|(t, v)| v * t.powi(-(j as i32)))
                .sum::<Complex64>()
                / n
        };
        let all: Vec<Complex64> = (0..nodes).map(coeff).collect();
        let head = all[..=max_degree]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.norm()));
        let tail = all[max_degree + 1..]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.norm()));
        let imag = all[..=max_degree]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.im.abs()));
        let ratio = if head > 0.0 {
            tail.max(imag) / head
        } else {
            0.0
        };
        if !ratio.is_finite() || ratio > tail_tol {
            return Err(KinematicsError::InterpolationFailure {
                degree: max_degree,
                ratio,
            });
        }
        Polynomial::new(all[..=max_degree].iter().map(|c| c.re).collect())
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn bisect(p: &Polynomial, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = p.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if sign(fm) == sign(flo) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let (fl, fh) = (p.eval(lo).abs(), p.eval(hi).abs());
    if fl <= fh {
        lo
    } else {
        hi
    }
}

fn merge_sorted(mut roots: Vec<f64>) -> Vec<f64> {
    roots.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots {
        match out.last() {
            Some(&last) if (r - last).abs() <= 1e-9 * (1.0 + r.abs()) => {}
            _ => out.push(r),
        }
    }
    out
}

fn isolate(p: &Polynomial, bound: f64, tol: f64) -> Vec<f64> {
    if p.degree() == 0 {
        return Vec::new();
    }
    if p.degree() == 1 {
        return vec![-p.coeffs[0] / p.coeffs[1]];
    }
    let critical: Vec<f64> = isolate(&p.derivative(), bound, tol)
        .into_iter()
        .filter(|c| c.abs() < bound)
        .collect();

    let mut fences = Vec::with_capacity(critical.len() + 2);
    fences.push(-bound);
    fences.extend(critical.iter().copied());
    fences.push(bound);
    let values: Vec<f64> = fences.iter().map(|&x| p.eval(x)).collect();

    let mut roots = Vec::new();
    let mut crossing = vec![false; fences.len() - 1];
    for i in 0..fences.len() - 1 {
        let (a, b) = (fences[i], fences[i + 1]);
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            roots.push(a);
        }
        if fa != 0.0 && fb != 0.0 && sign(fa) != sign(fb) {
            roots.push(bisect(p, a, b, fa));
            crossing[i] = true;
        }
    }
    if values[values.len() - 1] == 0.0 {
        roots.push(bound);
    }
    // Tangential contact at a critical point: no sign change on either side.
    for (k, &c) in critical.iter().enumerate() {
        let i = k + 1;
        if crossing[i - 1] && crossing[i] {
            continue;
        }
        if values[i] != 0.0 && values[i].abs() <= tol * p.scale_at(c) {
            roots.push(c);
        }
    }
    merge_sorted(roots)
}

/// Every real root of `p`, ascending, with repeated roots reported once.
pub fn real_roots(p: &Polynomial, tol: f64) -> Result<Vec<f64>> {
    if let Some(i) = p.coeffs.iter().position(|c| !c.is_finite()) {
        return Err(KinematicsError::NonFiniteCoefficient(i));
    }
    if p.degree() == 0 {
        return Err(KinematicsError::ConstantPolynomial);
    }
    let lead = p.leading();
    let bound = 1.0
        + p.coeffs[..p.degree()]
            .iter()
            .fold(0.0_f64, |m, c| m.max((c / lead).abs()));
    let roots = isolate(p, bound * 1.01, tol)
        .into_iter()
        .filter(|&r| p.eval(r).abs() <= tol * p.scale_at(r))
        .collect();
    Ok(merge_sorted(roots))
}

/// Real roots that are admissible cosines, clamped into `[-1, 1]`.
pub fn real_roots_in_unit_interval(p: &Polynomial) -> Result<Vec<f64>> {
    let roots = real_roots(p, DEFAULT_TOL)?
        .into_iter()
        .filter(|r| r.abs() <= 1.0 + UNIT_EPS)
        .map(|r| r.clamp(-1.0, 1.0))
        .collect();
    Ok(merge_sorted(roots))
}
