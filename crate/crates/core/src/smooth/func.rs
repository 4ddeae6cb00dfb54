use std::fmt;
use std::sync::Arc;

use super::domain::{CompactInterval, Domain, Interval};
use crate::error::{Error, Result};
use crate::jet;

pub const DEFAULT_JET_CAP: usize = 8;

type JetFn = dyn Fn(f64, usize) -> Result<Vec<f64>> + Send + Sync;

/// A smooth function on a [`Domain`] that can report its derivatives
/// `[f(x), f'(x), ..., f^(m)(x)]` up to a fixed cap.
///
/// The closure is only consulted for points inside the domain and inside the
/// declared support; outside the support the jets are exactly zero.
#[derive(Clone)]
pub struct SmoothFn {
    domain: Domain,
    support: Option<CompactInterval>,
    cap: usize,
    constant: Option<f64>,
    unit_region: Option<Interval>,
    jets: Arc<JetFn>,
}

impl fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFn")
            .field("domain", &self.domain)
            .field("support", &self.support)
            .field("cap", &self.cap)
            .field("constant", &self.constant)
            .finish()
    }
}

impl SmoothFn {
    /// Wraps a jet closure. `jets(x, m)` must return `m + 1` derivatives.
    pub fn new<F>(domain: Domain, cap: usize, support: Option<CompactInterval>, jets: F) -> Self
    where
        F: Fn(f64, usize) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        Self { domain, support, cap, constant: None, unit_region: None, jets: Arc::new(jets) }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn support(&self) -> Option<CompactInterval> {
        self.support
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// `Some(c)` when the function is known to be the constant `c`.
    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }

    /// An open interval on which the function is known to be identically 1.
    pub fn unit_region(&self) -> Option<Interval> {
        self.unit_region
    }

    pub fn with_unit_region(mut self, region: Interval) -> Self {
        self.unit_region = Some(region);
        self
    }

    /// True when `[lo, hi]` sits inside the region where the function is 1.
    pub fn is_one_on(&self, lo: f64, hi: f64) -> bool {
        if self.constant == Some(1.0) {
            return true;
        }
        self.unit_region.map(|r| r.lo < lo && hi < r.hi).unwrap_or(false)
    }

    pub fn with_support(mut self, support: Option<CompactInterval>) -> Self {
        self.support = support;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// Derivatives `0..=m` at `x`.
    pub fn jets(&self, x: f64, m: usize) -> Result<Vec<f64>> {
        if m > self.cap {
            return Err(Error::JetCapExceeded { requested: m, cap: self.cap });
        }
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain { x });
        }
        if let Some(s) = self.support {
            if !s.contains(x) {
                return Ok(vec![0.0; m + 1]);
            }
        }
        if let Some(c) = self.constant {
            let mut v = vec![0.0; m + 1];
            v[0] = c;
            return Ok(v);
        }
        let v = (self.jets)(x, m)?;
        debug_assert_eq!(v.len(), m + 1);
        Ok(v)
    }

    /// The single derivative `f^(m)(x)`.
    pub fn jet_eval(&self, x: f64, m: usize) -> Result<f64> {
        Ok(self.jets(x, m)?[m])
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.jet_eval(x, 0)
    }

    // ---- constructors ----

    pub fn constant(c: f64, domain: Domain) -> Self {
        let mut f = Self::new(domain, DEFAULT_JET_CAP, None, move |_, m| {
            let mut v = vec![0.0; m + 1];
            v[0] = c;
            Ok(v)
        });
        f.constant = Some(c);
        if c == 0.0 {
            f.cap = usize::MAX;
        }
        f
    }

    pub fn zero(domain: Domain) -> Self {
        Self::constant(0.0, domain)
    }

    /// Polynomial with coefficients `c[0] + c[1] x + ...`.
    pub fn polynomial(coeffs: Vec<f64>, domain: Domain) -> Self {
        if coeffs.iter().skip(1).all(|c| *c == 0.0) {
            return Self::constant(coeffs.first().copied().unwrap_or(0.0), domain);
        }
        Self::new(domain, DEFAULT_JET_CAP, None, move |x, m| {
            let mut out = vec![0.0; m + 1];
            // Repeated synthetic differentiation.
            let mut c = coeffs.clone();
            for slot in out.iter_mut() {
                *slot = c.iter().rev().fold(0.0, |acc, a| acc * x + a);
                if c.len() <= 1 {
                    c = vec![0.0];
                } else {
                    c = c.iter().enumerate().skip(1).map(|(i, a)| a * i as f64).collect();
                }
            }
            Ok(out)
        })
    }

    pub fn monomial(d: usize, domain: Domain) -> Self {
        let mut c = vec![0.0; d + 1];
        c[d] = 1.0;
        Self::polynomial(c, domain)
    }

    pub fn identity(domain: Domain) -> Self {
        Self::polynomial(vec![0.0, 1.0], domain)
    }

    pub fn sin(domain: Domain) -> Self {
        Self::new(domain, DEFAULT_JET_CAP, None, |x, m| {
            let (s, c) = x.sin_cos();
            Ok((0..=m).map(|j| [s, c, -s, -c][j % 4]).collect())
        })
    }

    pub fn cos(domain: Domain) -> Self {
        Self::new(domain, DEFAULT_JET_CAP, None, |x, m| {
            let (s, c) = x.sin_cos();
            Ok((0..=m).map(|j| [c, -s, -c, s][j % 4]).collect())
        })
    }

    pub fn exp(domain: Domain) -> Self {
        Self::new(domain, DEFAULT_JET_CAP, None, |x, m| Ok(vec![x.exp(); m + 1]))
    }

    /// `exp(1 - 1/(1 - t^2))` with `t = (x - center)/radius`, zero for `|t| >= 1`.
    pub fn bump(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && center.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        let support = CompactInterval::new(center - radius, center + radius)?;
        Ok(Self::new(Domain::real_line(), DEFAULT_JET_CAP, Some(support), move |x, m| {
            Ok(bump_jets((x - center) / radius, radius, m))
        }))
    }

    /// Smooth step: 0 for `x <= a`, 1 for `x >= b`.
    pub fn step_up(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("step needs a < b, got {a}, {b}")));
        }
        let f = Self::new(Domain::real_line(), DEFAULT_JET_CAP, None, move |x, m| {
            Ok(step_jets(x, a, b, m))
        });
        Ok(f.with_unit_region(Interval { lo: b, hi: f64::INFINITY }))
    }

    /// Smooth step: 1 for `x <= a`, 0 for `x >= b`.
    pub fn step_down(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("step needs a < b, got {a}, {b}")));
        }
        let f = Self::new(Domain::real_line(), DEFAULT_JET_CAP, None, move |x, m| {
            // step_down(x) = step_up(-x) on mirrored endpoints
            let mut v = step_jets(-x, -b, -a, m);
            for (j, c) in v.iter_mut().enumerate() {
                if j % 2 == 1 {
                    *c = -*c;
                }
            }
            Ok(v)
        });
        Ok(f.with_unit_region(Interval { lo: f64::NEG_INFINITY, hi: a }))
    }

    /// Plateau: 0 outside `(a0, b0)`, 1 on `[a1, b1]`, smooth monotone ramps.
    /// An infinite `a0`/`b0` drops that ramp.
    pub fn plateau(a0: f64, a1: f64, b1: f64, b0: f64) -> Result<Self> {
        if !(a0 <= a1 && a1 <= b1 && b1 <= b0) || (a0 == a1 && a0.is_finite())
            || (b0 == b1 && b0.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "plateau needs a0 < a1 <= b1 < b0, got {a0}, {a1}, {b1}, {b0}"
            )));
        }
        let up = a0.is_finite().then(|| (a0, a1));
        let down = b0.is_finite().then(|| (b1, b0));
        let support = match (up, down) {
            (Some(_), Some(_)) => Some(CompactInterval::new(a0, b0)?),
            _ => None,
        };
        let f = Self::new(Domain::real_line(), DEFAULT_JET_CAP, support, move |x, m| {
            let u = match up {
                Some((a, b)) => step_jets(x, a, b, m),
                None => one_jet(m),
            };
            let d = match down {
                Some((a, b)) => {
                    let mut v = step_jets(-x, -b, -a, m);
                    for (j, c) in v.iter_mut().enumerate() {
                        if j % 2 == 1 {
                            *c = -*c;
                        }
                    }
                    v
                }
                None => one_jet(m),
            };
            Ok(jet::leibniz(&u, &d))
        });
        Ok(f.with_unit_region(Interval { lo: a1, hi: b1 }))
    }

    // ---- combinators ----

    pub fn add(&self, other: &SmoothFn) -> Result<SmoothFn> {
        self.linear_combination(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &SmoothFn) -> Result<SmoothFn> {
        self.linear_combination(1.0, other, -1.0)
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &SmoothFn, b: f64) -> Result<SmoothFn> {
        let domain = common_domain(&self.domain, &other.domain)?;
        if let (Some(c1), Some(c2)) = (self.constant, other.constant) {
            return Ok(SmoothFn::constant(a * c1 + b * c2, domain));
        }
        let support = match (self.support, other.support) {
            (Some(s), Some(t)) => Some(s.hull(&t)),
            _ => None,
        };
        let (f, g) = (self.clone(), other.clone());
        let cap = self.cap.min(other.cap);
        Ok(SmoothFn::new(domain, cap, support, move |x, m| {
            let u = f.jets(x, m)?;
            let v = g.jets(x, m)?;
            Ok(u.iter().zip(&v).map(|(p, q)| a * p + b * q).collect())
        }))
    }

    pub fn scale(&self, c: f64) -> SmoothFn {
        if c == 0.0 {
            return SmoothFn::zero(self.domain.clone());
        }
        if let Some(v) = self.constant {
            return SmoothFn::constant(c * v, self.domain.clone());
        }
        let f = self.clone();
        SmoothFn::new(self.domain.clone(), self.cap, self.support, move |x, m| {
            Ok(f.jets(x, m)?.into_iter().map(|v| c * v).collect())
        })
    }

    pub fn neg(&self) -> SmoothFn {
        self.scale(-1.0)
    }

    pub fn mul(&self, other: &SmoothFn) -> Result<SmoothFn> {
        let domain = common_domain(&self.domain, &other.domain)?;
        if let Some(c) = self.constant {
            return Ok(other.scale(c).restrict_domain_unchecked(domain));
        }
        if let Some(c) = other.constant {
            return Ok(self.scale(c).restrict_domain_unchecked(domain));
        }
        let support = match (self.support, other.support) {
            (Some(s), Some(t)) => match s.intersect(&t) {
                Some(i) => Some(i),
                None => return Ok(SmoothFn::zero(domain)),
            },
            (Some(s), None) | (None, Some(s)) => Some(s),
            (None, None) => None,
        };
        let (f, g) = (self.clone(), other.clone());
        let cap = self.cap.min(other.cap);
        let mut out = SmoothFn::new(domain, cap, support, move |x, m| {
            Ok(jet::leibniz(&f.jets(x, m)?, &g.jets(x, m)?))
        });
        if let (Some(r), Some(s)) = (self.unit_region, other.unit_region) {
            out.unit_region = r.intersect(&s);
        }
        Ok(out)
    }

    /// `self ∘ inner`. The caller certifies that `inner` maps into `self`'s domain.
    pub fn compose(&self, inner: &SmoothFn) -> Result<SmoothFn> {
        if let Some(c) = self.constant {
            return Ok(SmoothFn::constant(c, inner.domain.clone()));
        }
        let (f, g) = (self.clone(), inner.clone());
        let cap = self.cap.min(inner.cap);
        Ok(SmoothFn::new(inner.domain.clone(), cap, None, move |x, m| {
            let gi = g.jets(x, m)?;
            let fo = f.jets(gi[0], m)?;
            Ok(jet::compose(&fo, &gi))
        }))
    }

    /// The derivative as a new function with cap reduced by one.
    pub fn derivative(&self) -> Result<SmoothFn> {
        if self.constant.is_some() {
            return Ok(SmoothFn::zero(self.domain.clone()));
        }
        if self.cap == 0 {
            return Err(Error::JetCapExceeded { requested: 1, cap: 0 });
        }
        let f = self.clone();
        Ok(SmoothFn::new(self.domain.clone(), self.cap - 1, self.support, move |x, m| {
            Ok(f.jets(x, m + 1)?[1..].to_vec())
        }))
    }

    /// The same function viewed on a smaller domain.
    pub fn restrict_domain(&self, domain: &Domain) -> Result<SmoothFn> {
        if !domain.is_subset_of(&self.domain) {
            return Err(Error::NotContained(domain.to_string(), self.domain.to_string()));
        }
        Ok(self.clone().restrict_domain_unchecked(domain.clone()))
    }

    fn restrict_domain_unchecked(mut self, domain: Domain) -> SmoothFn {
        self.domain = domain;
        self
    }

    /// Same function with the domain widened; caller guarantees the jets make
    /// sense there (for example zero outside a compact support).
    pub fn with_domain(self, domain: Domain) -> SmoothFn {
        self.restrict_domain_unchecked(domain)
    }
}

fn common_domain(a: &Domain, b: &Domain) -> Result<Domain> {
    if a == b {
        return Ok(a.clone());
    }
    a.intersect(b)
        .ok_or_else(|| Error::DomainMismatch(format!("{a} and {b} are disjoint")))
}

fn one_jet(m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m + 1];
    v[0] = 1.0;
    v
}

/// Jets of `exp(1 - 1/(1 - t^2))` in `x`, where `t = (x - c)/r`.
pub(crate) fn bump_jets(t: f64, r: f64, m: usize) -> Vec<f64> {
    if t.abs() >= 1.0 {
        return vec![0.0; m + 1];
    }
    let n = m + 1;
    // 1 - (t + h)^2 as a series in h
    let mut q = vec![0.0; n];
    q[0] = 1.0 - t * t;
    if n > 1 {
        q[1] = -2.0 * t;
    }
    if n > 2 {
        q[2] = -1.0;
    }
    let mut h: Vec<f64> = jet::taylor_recip(&q).into_iter().map(|c| -c).collect();
    h[0] += 1.0;
    let e = jet::taylor_exp(&h);
    e.iter()
        .enumerate()
        .map(|(j, c)| c * jet::factorial(j) / r.powi(j as i32))
        .collect()
}

/// `exp(-1/s)` for `s > 0`, zero otherwise, as a Taylor series in `s`.
fn flat_taylor(s: f64, n: usize) -> Vec<f64> {
    if s <= 0.0 {
        return vec![0.0; n];
    }
    let mut lin = vec![0.0; n];
    lin[0] = s;
    if n > 1 {
        lin[1] = 1.0;
    }
    let a: Vec<f64> = jet::taylor_recip(&lin).into_iter().map(|c| -c).collect();
    jet::taylor_exp(&a)
}

/// Jets of the step `e(s)/(e(s) + e(1 - s))`, `s = (x - a)/(b - a)`.
pub(crate) fn step_jets(x: f64, a: f64, b: f64, m: usize) -> Vec<f64> {
    let n = m + 1;
    if x <= a {
        return vec![0.0; n];
    }
    if x >= b {
        return one_jet(m);
    }
    let w = b - a;
    let s = (x - a) / w;
    let num = flat_taylor(s, n);
    // e(1 - s - h): series in h of the mirrored flat function
    let mut mir = flat_taylor(1.0 - s, n);
    for (j, c) in mir.iter_mut().enumerate() {
        if j % 2 == 1 {
            *c = -*c;
        }
    }
    let den: Vec<f64> = num.iter().zip(&mir).map(|(p, q)| p + q).collect();
    if den[0] == 0.0 {
        // Both flat factors underflowed; only possible extremely close to an end.
        return if s < 0.5 { vec![0.0; n] } else { one_jet(m) };
    }
    let r = jet::taylor_div(&num, &den);
    r.iter()
        .enumerate()
        .map(|(j, c)| c * jet::factorial(j) / w.powi(j as i32))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: &SmoothFn, x: f64, m: usize) -> f64 {
        let h = 1e-5;
        (f.jet_eval(x + h, m - 1).unwrap() - f.jet_eval(x - h, m - 1).unwrap()) / (2.0 * h)
    }

    #[test]
    fn polynomial_second_derivative() {
        let f = SmoothFn::monomial(2, Domain::real_line());
        assert_eq!(f.jet_eval(3.0, 2).unwrap(), 2.0);
        assert_eq!(f.jet_eval(3.0, 0).unwrap(), 9.0);
        assert_eq!(f.jet_eval(3.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn bump_values() {
        let b = SmoothFn::bump(0.0, 1.0).unwrap();
        assert_eq!(b.value(0.0).unwrap(), 1.0);
        assert_eq!(b.jet_eval(0.0, 1).unwrap(), 0.0);
        assert_eq!(b.value(1.5).unwrap(), 0.0);
        let v = b.value(0.5).unwrap();
        assert!((v - (1.0f64 - 1.0 / 0.75).exp()).abs() < 1e-15);
        for x in [1.0 - 1e-9, -1.0 + 1e-9] {
            for m in 0..=4 {
                assert!(b.jet_eval(x, m).unwrap().abs() < 1e-12);
            }
        }
        assert!(SmoothFn::bump(0.0, 0.0).is_err());
    }

    #[test]
    fn jets_match_finite_differences() {
        let d = Domain::real_line();
        let fs = vec![
            SmoothFn::bump(0.1, 0.8).unwrap(),
            SmoothFn::plateau(-1.0, -0.3, 0.2, 0.9).unwrap(),
            SmoothFn::sin(d.clone()).compose(&SmoothFn::polynomial(vec![0.0, 2.0, 0.5], d.clone())).unwrap(),
            SmoothFn::exp(d.clone()).mul(&SmoothFn::cos(d.clone())).unwrap(),
        ];
        for f in &fs {
            for &x in &[-0.6, -0.25, 0.05, 0.4, 0.75] {
                for m in 1..=4 {
                    let exact = f.jet_eval(x, m).unwrap();
                    let approx = fd(f, x, m);
                    assert!(
                        (exact - approx).abs() <= 1e-6 * (1.0 + exact.abs()),
                        "{f:?} x={x} m={m}: {exact} vs {approx}"
                    );
                }
            }
        }
    }

    #[test]
    fn plateau_flat_regions_are_exact() {
        let p = SmoothFn::plateau(-1.0, -0.5, 0.5, 1.0).unwrap();
        assert_eq!(p.jets(0.2, 3).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.jets(1.2, 3).unwrap(), vec![0.0; 4]);
        assert!(p.is_one_on(-0.4, 0.4));
        assert!(!p.is_one_on(-0.6, 0.4));
    }

    #[test]
    fn compose_sin_double() {
        let d = Domain::real_line();
        let f = SmoothFn::sin(d.clone()).compose(&SmoothFn::polynomial(vec![0.0, 2.0], d)).unwrap();
        assert!((f.jet_eval(0.0, 3).unwrap() + 8.0).abs() < 1e-14);
    }

    #[test]
    fn cap_and_domain_errors() {
        let f = SmoothFn::sin(Domain::interval(0.0, 1.0).unwrap());
        assert!(matches!(f.jet_eval(2.0, 0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(f.jet_eval(0.5, 9), Err(Error::JetCapExceeded { .. })));
    }

    #[test]
    fn support_tracking() {
        let a = SmoothFn::bump(0.0, 1.0).unwrap();
        let b = SmoothFn::bump(1.5, 1.0).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.support(), Some(CompactInterval::new(-1.0, 2.5).unwrap()));
        let p = a.mul(&b).unwrap();
        assert_eq!(p.support(), Some(CompactInterval::new(0.5, 1.0).unwrap()));
        assert_eq!(p.jets(2.0, 2).unwrap(), vec![0.0; 3]);
    }
}
