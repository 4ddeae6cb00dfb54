//! Smooth functions on open subsets of the line, test functions, seminorms,
//! partitions of unity and quadrature.

mod diffeo;
mod domain;
mod func;
pub mod quad;

use rayon::prelude::*;

pub use diffeo::{cubic_diffeo, Diffeo1D};
pub use domain::{CompactInterval, Domain, Interval};
pub use func::{SmoothFn, DEFAULT_JET_CAP};
pub(crate) use func::bump_jets;
pub use quad::{integrate, integrate_with, QuadOptions, QuadResult};

use crate::error::{Error, Result};
use crate::jet;

/// A smooth function with compact support inside its domain. A missing
/// support means the function is identically zero.
#[derive(Debug, Clone)]
pub struct TestFn {
    f: SmoothFn,
}

impl TestFn {
    pub fn new(f: SmoothFn) -> Result<Self> {
        match f.support() {
            Some(s) if f.domain().contains_compact(&s) => Ok(Self { f }),
            Some(s) => Err(Error::NotContained(s.to_string(), f.domain().to_string())),
            None if f.constant_value() == Some(0.0) => Ok(Self { f }),
            None => Err(Error::InvalidArgument("test function needs a compact support".into())),
        }
    }

    /// Wraps without checking containment; used by kernel forms whose
    /// construction already guarantees it.
    pub(crate) fn trusted(f: SmoothFn) -> Self {
        Self { f }
    }

    pub fn zero(domain: Domain) -> Self {
        Self { f: SmoothFn::zero(domain) }
    }

    pub fn bump(center: f64, radius: f64, domain: &Domain) -> Result<Self> {
        Self::new(SmoothFn::bump(center, radius)?.with_domain(domain.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.f.constant_value() == Some(0.0)
    }

    pub fn base(&self) -> &SmoothFn {
        &self.f
    }

    pub fn into_base(self) -> SmoothFn {
        self.f
    }

    pub fn domain(&self) -> &Domain {
        self.f.domain()
    }

    /// `None` for the zero function.
    pub fn support(&self) -> Option<CompactInterval> {
        if self.is_zero() {
            None
        } else {
            self.f.support()
        }
    }

    pub fn jets(&self, y: f64, m: usize) -> Result<Vec<f64>> {
        if self.is_zero() {
            return Ok(vec![0.0; m + 1]);
        }
        // Outside the support everything vanishes, even off the domain.
        if let Some(s) = self.f.support() {
            if !s.contains(y) {
                return Ok(vec![0.0; m + 1]);
            }
        }
        self.f.jets(y, m)
    }

    pub fn jet_eval(&self, y: f64, m: usize) -> Result<f64> {
        Ok(self.jets(y, m)?[m])
    }

    pub fn value(&self, y: f64) -> Result<f64> {
        self.jet_eval(y, 0)
    }

    pub fn linear_combination(&self, a: f64, other: &TestFn, b: f64) -> Result<TestFn> {
        if self.is_zero() {
            return Ok(other.scale(b));
        }
        if other.is_zero() {
            return Ok(self.scale(a));
        }
        Ok(TestFn { f: self.f.linear_combination(a, &other.f, b)? })
    }

    pub fn add(&self, other: &TestFn) -> Result<TestFn> {
        self.linear_combination(1.0, other, 1.0)
    }

    pub fn scale(&self, c: f64) -> TestFn {
        TestFn { f: self.f.scale(c) }
    }

    /// Pointwise product with a smooth function of `y`.
    pub fn mul_smooth(&self, g: &SmoothFn) -> Result<TestFn> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        Ok(TestFn { f: self.f.mul(&g.clone().with_domain(self.domain().clone()))? })
    }

    /// Same function regarded on a larger domain (extension by zero).
    pub fn extend_to(&self, domain: &Domain) -> Result<TestFn> {
        if !self.domain().is_subset_of(domain) {
            return Err(Error::NotContained(self.domain().to_string(), domain.to_string()));
        }
        Ok(TestFn { f: self.f.clone().with_domain(domain.clone()) })
    }
}

/// A vector field `X = X¹ ∂_x` on a domain.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub coefficient: SmoothFn,
}

impl VectorField {
    pub fn new(coefficient: SmoothFn) -> Self {
        Self { coefficient }
    }

    pub fn constant(c: f64, domain: Domain) -> Self {
        Self { coefficient: SmoothFn::constant(c, domain) }
    }

    pub fn scaled(&self, f: &SmoothFn) -> Result<Self> {
        Ok(Self { coefficient: self.coefficient.mul(f)? })
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.constant_value() == Some(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LieMode {
    /// `X f'`
    Function,
    /// `X φ' + X' φ`
    NForm,
}

/// Lie derivative jets at `x` from jets of `X` and `f` of length `m + 2`.
pub(crate) fn lie_jets(xj: &[f64], fj: &[f64], m: usize, mode: LieMode) -> Vec<f64> {
    let df = &fj[1..m + 2];
    let mut out = jet::leibniz(&xj[..m + 1], df);
    if mode == LieMode::NForm {
        let dx = &xj[1..m + 2];
        for (o, v) in out.iter_mut().zip(jet::leibniz(dx, &fj[..m + 1])) {
            *o += v;
        }
    }
    out
}

/// `L_X f` in function mode or n-form mode.
pub fn lie_smooth(x: &VectorField, f: &SmoothFn, mode: LieMode) -> Result<SmoothFn> {
    let domain = f.domain().clone();
    if x.is_zero() || f.constant_value() == Some(0.0) {
        return Ok(SmoothFn::zero(domain));
    }
    if f.constant_value().is_some() && mode == LieMode::Function {
        return Ok(SmoothFn::zero(domain));
    }
    if f.cap() == 0 || (mode == LieMode::NForm && x.coefficient.cap() == 0) {
        return Err(Error::JetCapExceeded { requested: 1, cap: 0 });
    }
    let cap = match mode {
        LieMode::Function => (f.cap() - 1).min(x.coefficient.cap()),
        LieMode::NForm => (f.cap() - 1).min(x.coefficient.cap() - 1),
    };
    let support = match mode {
        LieMode::NForm => f.support(),
        LieMode::Function => f.support(),
    };
    let (xf, g) = (x.coefficient.clone(), f.clone());
    Ok(SmoothFn::new(domain, cap, support, move |y, m| {
        let xj = if mode == LieMode::NForm { xf.jets(y, m + 1)? } else {
            let mut v = xf.jets(y, m)?;
            v.push(0.0);
            v
        };
        let fj = g.jets(y, m + 1)?;
        Ok(lie_jets(&xj, &fj, m, mode))
    }))
}

/// `L_X φ` (n-form mode) for a test function.
pub fn lie_test(x: &VectorField, phi: &TestFn) -> Result<TestFn> {
    if phi.is_zero() {
        return Ok(phi.clone());
    }
    Ok(TestFn::trusted(lie_smooth(x, phi.base(), LieMode::NForm)?))
}

pub const SEMINORM_GRID: usize = 257;

/// Evaluation points of the seminorm grid: 257 uniform points plus midpoints.
pub fn seminorm_points(k: &CompactInterval) -> Vec<f64> {
    let n = SEMINORM_GRID;
    if k.width() == 0.0 {
        return vec![k.lo];
    }
    let h = k.width() / (n - 1) as f64;
    let mut pts: Vec<f64> = (0..n).map(|i| k.lo + h * i as f64).collect();
    pts[n - 1] = k.hi;
    pts.extend((0..n - 1).map(|i| k.lo + h * (i as f64 + 0.5)));
    pts
}

/// `[p_{K,0}(f), ..., p_{K,m}(f)]`, each the max over orders `α ≤` its index.
pub fn seminorms(f: &SmoothFn, k: &CompactInterval, m: usize) -> Result<Vec<f64>> {
    let inside = if k.width() == 0.0 { f.domain().contains(k.lo) } else { f.domain().contains_compact(k) };
    if !inside {
        let bad = if f.domain().contains(k.lo) { k.hi } else { k.lo };
        return Err(Error::OutOfDomain { x: bad });
    }
    if m > f.cap() {
        return Err(Error::JetCapExceeded { requested: m, cap: f.cap() });
    }
    let pts = seminorm_points(k);
    let rows: Vec<Vec<f64>> = pts.par_iter().map(|&x| f.jets(x, m)).collect::<Result<_>>()?;
    let mut per_order = vec![0.0f64; m + 1];
    for row in &rows {
        for (acc, v) in per_order.iter_mut().zip(row) {
            if v.is_nan() {
                *acc = f64::NAN;
            } else if v.abs() > *acc {
                *acc = v.abs();
            }
        }
    }
    let mut out = Vec::with_capacity(m + 1);
    let mut running = 0.0f64;
    for v in per_order {
        running = if v.is_nan() || running.is_nan() { f64::NAN } else { running.max(v) };
        out.push(running);
    }
    Ok(out)
}

/// `p_{K,m}(f) = max_{α ≤ m} sup_{x ∈ K} |f^(α)(x)|` on the fixed grid.
pub fn seminorm(f: &SmoothFn, k: &CompactInterval, m: usize) -> Result<f64> {
    Ok(seminorms(f, k, m)?[m])
}

/// A smooth partition of unity subordinate to a finite open cover.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub pieces: Vec<(SmoothFn, Interval)>,
    pub cover: Vec<Interval>,
    /// Open sets where each bump is positive.
    pub positivity: Vec<Interval>,
}

impl PartitionOfUnity {
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// The union of the cover as a domain.
    pub fn union(&self) -> Domain {
        union_domain(&self.cover)
    }
}

fn union_domain(cover: &[Interval]) -> Domain {
    let mut iv = cover.to_vec();
    iv.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut merged: Vec<Interval> = Vec::new();
    for i in iv {
        match merged.last_mut() {
            Some(last) if i.lo < last.hi => last.hi = last.hi.max(i.hi),
            _ => merged.push(i),
        }
    }
    Domain::new(merged).expect("merged intervals are disjoint")
}

/// Builds `χ_i = b_i / Σ_j b_j` where `b_i` ramps up just inside every
/// endpoint of `U_i` that lies inside another cover set, and is 1 towards
/// endpoints on the boundary of the union. The ramp starts a quarter of the
/// overlap width inside the endpoint and ends at half the overlap width.
pub fn partition_of_unity(cover: &[Interval]) -> Result<PartitionOfUnity> {
    if cover.is_empty() {
        return Err(Error::EmptyCover);
    }
    let union = union_domain(cover);
    let mut bumps = Vec::with_capacity(cover.len());
    let mut positivity = Vec::with_capacity(cover.len());
    for (i, u) in cover.iter().enumerate() {
        // overlap reaching past the left endpoint
        let left_ov = cover
            .iter()
            .enumerate()
            .filter(|(j, v)| *j != i && v.contains(u.lo))
            .map(|(_, v)| v.hi.min(u.hi) - u.lo)
            .fold(0.0f64, f64::max);
        let right_ov = cover
            .iter()
            .enumerate()
            .filter(|(j, v)| *j != i && v.contains(u.hi))
            .map(|(_, v)| u.hi - v.lo.max(u.lo))
            .fold(0.0f64, f64::max);
        let mut b = SmoothFn::constant(1.0, Domain::real_line());
        let (mut plo, mut phi) = (u.lo, u.hi);
        if left_ov > 0.0 {
            let ov = left_ov.min(u.length());
            b = b.mul(&SmoothFn::step_up(u.lo + ov / 4.0, u.lo + ov / 2.0)?)?;
            plo = u.lo + ov / 4.0;
        }
        if right_ov > 0.0 {
            let ov = right_ov.min(u.length());
            b = b.mul(&SmoothFn::step_down(u.hi - ov / 2.0, u.hi - ov / 4.0)?)?;
            phi = u.hi - ov / 4.0;
        }
        if plo >= phi {
            return Err(Error::InvalidCover(format!("{u} is swallowed by its overlaps")));
        }
        if left_ov > 0.0 && right_ov > 0.0 {
            b = b.with_support(Some(CompactInterval::new(plo, phi)?));
        }
        bumps.push(b);
        positivity.push(Interval { lo: plo, hi: phi });
    }
    check_coverage(&union, &positivity)?;
    let mut pieces = Vec::with_capacity(cover.len());
    for (i, u) in cover.iter().enumerate() {
        let all = bumps.clone();
        let chi = if cover.len() == 1 {
            SmoothFn::constant(1.0, union.clone())
        } else {
            let support = bumps[i].support();
            SmoothFn::new(union.clone(), DEFAULT_JET_CAP, support, move |x, m| {
                let mut sum = vec![0.0; m + 1];
                let mut own = vec![0.0; m + 1];
                for (j, b) in all.iter().enumerate() {
                    let v = b.jets(x, m)?;
                    for (s, c) in sum.iter_mut().zip(&v) {
                        *s += c;
                    }
                    if j == i {
                        own = v;
                    }
                }
                if own.iter().all(|c| *c == 0.0) {
                    return Ok(own);
                }
                if own == sum {
                    let mut one = vec![0.0; m + 1];
                    one[0] = 1.0;
                    return Ok(one);
                }
                let q = jet::taylor_div(&jet::to_taylor(&own), &jet::to_taylor(&sum));
                Ok(jet::from_taylor(&q))
            })
        };
        pieces.push((chi, *u));
    }
    Ok(PartitionOfUnity { pieces, cover: cover.to_vec(), positivity })
}

fn check_coverage(union: &Domain, positivity: &[Interval]) -> Result<()> {
    for comp in union.intervals() {
        let mut ps: Vec<&Interval> =
            positivity.iter().filter(|p| comp.lo <= p.lo && p.hi <= comp.hi).collect();
        ps.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut reach = comp.lo;
        for p in ps {
            if p.lo > reach || (p.lo == reach && reach != comp.lo) {
                return Err(Error::GapInCover { x: reach });
            }
            reach = reach.max(p.hi);
        }
        if reach < comp.hi {
            return Err(Error::GapInCover { x: reach });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn seminorm_examples() {
        let d = Domain::real_line();
        let x = SmoothFn::identity(d.clone());
        let k = CompactInterval::new(-1.0, 1.0).unwrap();
        assert_eq!(seminorm(&x, &k, 0).unwrap(), 1.0);
        assert_eq!(seminorm(&x, &k, 1).unwrap(), 1.0);
        let s = SmoothFn::sin(d);
        let kpi = CompactInterval::new(0.0, std::f64::consts::PI).unwrap();
        assert!((seminorm(&s, &kpi, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seminorm_out_of_domain() {
        let f = SmoothFn::sin(Domain::interval(0.0, 1.0).unwrap());
        let k = CompactInterval::new(0.5, 1.5).unwrap();
        assert!(matches!(seminorm(&f, &k, 0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn two_piece_partition_sums_to_one() {
        let p = partition_of_unity(&[iv(-2.0, 0.5), iv(-0.5, 2.0)]).unwrap();
        for i in 0..50 {
            let x = -1.99 + 3.98 * i as f64 / 49.0;
            let s: f64 = p.pieces.iter().map(|(c, _)| c.value(x).unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-12, "x={x} sum={s}");
        }
    }

    #[test]
    fn single_interval_partition_is_one() {
        let p = partition_of_unity(&[iv(-1.0, 1.0)]).unwrap();
        for x in [-0.99, 0.0, 0.7] {
            assert_eq!(p.pieces[0].0.jets(x, 2).unwrap(), vec![1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn three_piece_supports() {
        let cover = [iv(-2.0, -0.3), iv(-0.7, 0.7), iv(0.3, 2.0)];
        let p = partition_of_unity(&cover).unwrap();
        for (chi, u) in &p.pieces {
            for i in 0..1000 {
                let x = -1.999 + 3.998 * i as f64 / 999.0;
                let v = chi.value(x).unwrap();
                if !u.contains(x) {
                    assert_eq!(v, 0.0);
                }
            }
            // support is closed in the union and stays off the interior endpoints
            if let Some(s) = chi.support() {
                assert!(u.lo < s.lo && s.hi < u.hi);
            }
        }
    }

    #[test]
    fn gap_detected() {
        assert!(matches!(partition_of_unity(&[]), Err(Error::EmptyCover)));
        // touching endpoints leave the union disconnected, not a gap
        assert!(partition_of_unity(&[iv(-1.0, 0.0), iv(0.0, 1.0)]).is_ok());
    }

    #[test]
    fn lie_examples() {
        let d = Domain::real_line();
        let one = VectorField::constant(1.0, d.clone());
        let sq = SmoothFn::monomial(2, d.clone());
        let l = lie_smooth(&one, &sq, LieMode::Function).unwrap();
        assert_eq!(l.value(1.5).unwrap(), 3.0);
        let xf = VectorField::new(SmoothFn::identity(d.clone()));
        let phi = SmoothFn::bump(0.0, 1.0).unwrap();
        let l = lie_smooth(&xf, &phi, LieMode::NForm).unwrap();
        for y in [-0.7, -0.2, 0.0, 0.3, 0.8] {
            let want = y * phi.jet_eval(y, 1).unwrap() + phi.value(y).unwrap();
            assert!((l.value(y).unwrap() - want).abs() < 1e-14);
        }
        let z = VectorField::constant(0.0, d);
        assert_eq!(lie_smooth(&z, &phi, LieMode::NForm).unwrap().value(0.2).unwrap(), 0.0);
    }
}
