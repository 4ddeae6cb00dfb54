//! Distributions: finite sums of delta derivatives and piecewise smooth
//! densities, with pairings, mollification, Lie derivative and support.

use crate::error::{Error, Result};
use crate::jet::{binomial, factorial};
use crate::kernel::Mollifier;
use crate::smooth::quad::{gauss_legendre, integrate_with, QuadOptions};
use crate::smooth::{
    CompactInterval, Diffeo1D, Domain, SmoothFn, TestFn, VectorField, DEFAULT_JET_CAP,
};

/// A locally integrable density, smooth between finitely many breakpoints.
#[derive(Debug, Clone)]
pub struct Density {
    breakpoints: Vec<f64>,
    pieces: Vec<SmoothFn>,
}

impl Density {
    pub fn smooth(g: SmoothFn) -> Self {
        Self { breakpoints: Vec::new(), pieces: vec![g] }
    }

    /// `pieces[i]` lives between `breakpoints[i-1]` and `breakpoints[i]`.
    pub fn piecewise(breakpoints: Vec<f64>, pieces: Vec<SmoothFn>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("breakpoints must increase".into()));
        }
        Ok(Self { breakpoints, pieces })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[SmoothFn] {
        &self.pieces
    }

    fn piece_index(&self, y: f64) -> usize {
        self.breakpoints.partition_point(|b| *b <= y)
    }

    pub fn piece_at(&self, y: f64) -> &SmoothFn {
        &self.pieces[self.piece_index(y)]
    }

    pub fn value(&self, y: f64) -> Result<f64> {
        self.piece_at(y).value(y)
    }

    fn segment(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { f64::NEG_INFINITY } else { self.breakpoints[i - 1] };
        let hi = self.breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// Closed hulls of the nonzero pieces, clipped to `[lo, hi]`.
    fn support_within(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (i, g) in self.pieces.iter().enumerate() {
            if g.constant_value() == Some(0.0) {
                continue;
            }
            let (mut a, mut b) = self.segment(i);
            if let Some(s) = g.support() {
                a = a.max(s.lo);
                b = b.min(s.hi);
            }
            a = a.max(lo);
            b = b.min(hi);
            if a <= b {
                out.push((a, b));
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub enum Term {
    Delta { a: f64, order: usize, coeff: f64 },
    Regular { density: Density, coeff: f64 },
}

/// A distribution on a domain.
#[derive(Debug, Clone)]
pub struct Distribution {
    terms: Vec<Term>,
    domain: Domain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingReport {
    pub value: f64,
    pub est_error: f64,
}

/// Jets of `x ↦ ⟨u, τ_x ρ̌_k⟩`, split into a leading part (the density
/// values at `x`) and the remaining correction. Keeping them apart lets
/// callers cancel the leading part exactly against smooth offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub lead: Vec<f64>,
    pub rest: Vec<f64>,
}

impl Split {
    pub fn zeros(m: usize) -> Self {
        Self { lead: vec![0.0; m + 1], rest: vec![0.0; m + 1] }
    }

    pub fn total(&self) -> Vec<f64> {
        self.lead.iter().zip(&self.rest).map(|(a, b)| a + b).collect()
    }

    pub fn add_scaled(&mut self, other: &Split, c: f64) {
        for (a, b) in self.lead.iter_mut().zip(&other.lead) {
            *a += c * b;
        }
        for (a, b) in self.rest.iter_mut().zip(&other.rest) {
            *a += c * b;
        }
    }
}

impl Distribution {
    pub fn zero(domain: Domain) -> Self {
        Self { terms: Vec::new(), domain }
    }

    pub fn delta(a: f64, domain: Domain) -> Result<Self> {
        Self::delta_derivative(a, 0, domain)
    }

    /// `δ_a^(m)`, acting by `φ ↦ (-1)^m φ^(m)(a)`.
    pub fn delta_derivative(a: f64, order: usize, domain: Domain) -> Result<Self> {
        if !domain.contains(a) {
            return Err(Error::OutOfDomain { x: a });
        }
        Ok(Self { terms: vec![Term::Delta { a, order, coeff: 1.0 }], domain })
    }

    pub fn regular(g: SmoothFn) -> Self {
        let domain = g.domain().clone();
        Self { terms: vec![Term::Regular { density: Density::smooth(g), coeff: 1.0 }], domain }
    }

    pub fn from_density(density: Density, domain: Domain) -> Self {
        Self { terms: vec![Term::Regular { density, coeff: 1.0 }], domain }
    }

    /// Heaviside function jumping at `a`.
    pub fn heaviside_at(a: f64, domain: Domain) -> Result<Self> {
        let d = Density::piecewise(
            vec![a],
            vec![SmoothFn::zero(domain.clone()), SmoothFn::constant(1.0, domain.clone())],
        )?;
        Ok(Self::from_density(d, domain))
    }

    pub fn heaviside(domain: Domain) -> Result<Self> {
        Self::heaviside_at(0.0, domain)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| match t {
            Term::Delta { coeff, .. } => *coeff == 0.0,
            Term::Regular { density, coeff } => {
                *coeff == 0.0 || density.pieces.iter().all(|p| p.constant_value() == Some(0.0))
            }
        })
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn scale(&self, c: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Delta { a, order, coeff } => Term::Delta { a: *a, order: *order, coeff: c * coeff },
                Term::Regular { density, coeff } => Term::Regular { density: density.clone(), coeff: c * coeff },
            })
            .collect();
        Self { terms, domain: self.domain.clone() }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &Distribution) -> Result<Self> {
        let domain = if self.domain == other.domain {
            self.domain.clone()
        } else {
            self.domain
                .intersect(&other.domain)
                .ok_or_else(|| Error::DomainMismatch(format!("{} vs {}", self.domain, other.domain)))?
        };
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { terms, domain })
    }

    pub fn sub(&self, other: &Distribution) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Largest delta order present.
    pub fn max_delta_order(&self) -> usize {
        self.terms
            .iter()
            .filter_map(|t| match t {
                Term::Delta { order, .. } => Some(*order),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// The support as merged closed intervals (points are degenerate
    /// intervals), clipped to the hull of the domain.
    pub fn support(&self) -> Vec<(f64, f64)> {
        support_dist(self)
    }

    /// The support hull if it is a compact subset of the domain.
    pub fn compact_support(&self) -> Option<CompactInterval> {
        let s = self.support();
        if s.is_empty() {
            return Some(CompactInterval::point(self.domain.bounds().0.max(-1.0).min(0.0)));
        }
        let lo = s.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = s.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let k = CompactInterval::new(lo, hi).ok()?;
        let inside = s.iter().all(|(a, b)| {
            CompactInterval::new(*a, *b).map(|c| self.domain.contains_compact(&c) || (a == b && self.domain.contains(*a))).unwrap_or(false)
        });
        inside.then_some(k)
    }
}

/// `⟨u, φ⟩`: delta terms exactly, densities by adaptive quadrature over
/// the support of `φ`, split at breakpoints.
pub fn pair(u: &Distribution, phi: &TestFn) -> Result<PairingReport> {
    pair_with(u, phi, None)
}

/// `pair` with quadrature pieces no wider than `max_piece`, for test
/// functions with features much narrower than their support.
pub fn pair_with(u: &Distribution, phi: &TestFn, max_piece: Option<f64>) -> Result<PairingReport> {
    let Some(supp) = phi.support() else {
        return Ok(PairingReport { value: 0.0, est_error: 0.0 });
    };
    let mut value = 0.0;
    let mut err = 0.0;
    for t in &u.terms {
        match t {
            Term::Delta { a, order, coeff } => {
                if *coeff == 0.0 || !supp.contains(*a) {
                    continue;
                }
                let s = if order % 2 == 0 { 1.0 } else { -1.0 };
                value += coeff * s * phi.jet_eval(*a, *order)?;
            }
            Term::Regular { density, coeff } => {
                if *coeff == 0.0 {
                    continue;
                }
                let (dlo, dhi) = u.domain.bounds();
                for (lo, hi) in density.support_within(supp.lo.max(dlo), supp.hi.min(dhi)) {
                    if lo >= hi {
                        continue;
                    }
                    let mut opts = QuadOptions::default().breakpoints(density.breakpoints.iter().copied());
                    if let Some(w) = max_piece {
                        opts = opts.max_piece(w);
                    }
                    let r = integrate_with(|y| Ok(density.value(y)? * phi.value(y)?), lo, hi, &opts)?;
                    value += coeff * r.value;
                    err += coeff.abs() * r.error;
                }
            }
        }
    }
    Ok(PairingReport { value, est_error: err })
}

const INNER_NODES: usize = 12;

/// Jets `0..=m` of `x ↦ ⟨u, τ_x ρ̌_k⟩ = (u * ρ_k)(x)`.
///
/// Smooth densities use a Taylor expansion of the density about `x`: the
/// moments of `ρ` give the polynomial part in closed form and only the
/// integral remainder is computed numerically. Windows that straddle a
/// breakpoint or leave the domain fall back to adaptive quadrature.
pub fn translate_pairing(u: &Distribution, rho: &Mollifier, k: f64, x: f64, m: usize) -> Result<Split> {
    let mut out = Split::zeros(m);
    let r = rho.radius() / k;
    for t in &u.terms {
        match t {
            Term::Delta { a, order, coeff } => {
                if *coeff == 0.0 || (x - a).abs() >= r {
                    continue;
                }
                let table = rho.translate_table(k, x, *a, m + order)?;
                for j in 0..=m {
                    // ⟨δ_a^(l), ∂_x^j τ_x ρ̌_k⟩ = k^(1+j+l) ρ^(j+l)(k(x-a))
                    out.rest[j] += coeff * table[j + order];
                }
            }
            Term::Regular { density, coeff } => {
                if *coeff == 0.0 {
                    continue;
                }
                let (lo, hi) = (x - r, x + r);
                let supp = density.support_within(lo, hi);
                if supp.iter().all(|(a, b)| a >= b) {
                    continue;
                }
                let straddles = density.breakpoints.iter().any(|b| lo < *b && *b < hi);
                let comp_ok = u.domain.component_of(x).map(|c| c.lo <= lo && hi <= c.hi).unwrap_or(false);
                if straddles || !comp_ok {
                    let v = quadrature_translate(u, density, rho, k, x, m)?;
                    for j in 0..=m {
                        out.rest[j] += coeff * v[j];
                    }
                    continue;
                }
                let g = density.piece_at(x);
                if let Some(c0) = g.constant_value() {
                    out.lead[0] += coeff * c0;
                    continue;
                }
                let s = compensated(g, rho, k, x, m)?;
                out.add_scaled(&s, *coeff);
            }
        }
    }
    Ok(out)
}

fn quadrature_translate(
    u: &Distribution,
    density: &Density,
    rho: &Mollifier,
    k: f64,
    x: f64,
    m: usize,
) -> Result<Vec<f64>> {
    let r = rho.radius() / k;
    let (dlo, dhi) = match u.domain.component_of(x) {
        Some(c) => (c.lo, c.hi),
        None => u.domain.bounds(),
    };
    let mut out = vec![0.0; m + 1];
    for (lo, hi) in density.support_within((x - r).max(dlo), (x + r).min(dhi)) {
        if lo >= hi {
            continue;
        }
        let opts = QuadOptions::default().breakpoints(density.breakpoints.iter().copied());
        for (j, o) in out.iter_mut().enumerate() {
            let v = integrate_with(
                |y| {
                    let t = rho.translate_table(k, x, y, j)?;
                    Ok(density.value(y)? * t[j])
                },
                lo,
                hi,
                &opts,
            )?;
            *o += v.value;
        }
    }
    Ok(out)
}

fn compensated(g: &SmoothFn, rho: &Mollifier, k: f64, x: f64, m: usize) -> Result<Split> {
    let cap = g.cap().min(DEFAULT_JET_CAP);
    if m > cap {
        return Err(Error::JetCapExceeded { requested: m, cap });
    }
    let gj = g.jets(x, cap)?;
    let nodes = rho.weighted_nodes();
    let (ux, uw) = gauss_legendre(INNER_NODES);
    // g^(cap) on the (s, u) grid, u ∈ [0, 1]
    let top: Vec<Vec<f64>> = nodes
        .iter()
        .map(|(s, _)| {
            ux.iter()
                .map(|u| g.jet_eval(x - 0.5 * (u + 1.0) * s / k, cap))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = Split::zeros(m);
    for j in 0..=m {
        out.lead[j] = gj[j];
        if j == cap {
            let direct: f64 = nodes
                .iter()
                .map(|(s, w)| Ok(w * g.jet_eval(x - s / k, cap)?))
                .sum::<Result<f64>>()?;
            out.rest[j] = direct - gj[j];
            continue;
        }
        let n = cap - 1 - j;
        let mut taylor = 0.0;
        for i in 1..=n {
            let mi = rho.moment(i);
            if mi != 0.0 {
                taylor += gj[j + i] * (-1.0 / k).powi(i as i32) * mi / factorial(i);
            }
        }
        let mut rem = 0.0;
        for ((s, w), row) in nodes.iter().zip(&top) {
            let inner: f64 = row
                .iter()
                .zip(ux.iter().zip(&uw))
                .map(|(v, (u, wu))| 0.5 * wu * (1.0 - 0.5 * (u + 1.0)).powi(n as i32) * v)
                .sum();
            rem += w * (-s / k).powi(n as i32 + 1) / factorial(n) * inner;
        }
        out.rest[j] = taylor + rem;
    }
    Ok(out)
}

/// `u * ρ_k`, optionally after multiplying `u` by a cutoff `ψ`.
pub fn mollify(u: &Distribution, rho: &Mollifier, k: usize, cutoff: Option<&SmoothFn>) -> Result<SmoothFn> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let kf = k as f64;
    let r = rho.radius() / kf;
    let whole_line = u.domain == Domain::real_line();
    let support = match cutoff {
        Some(psi) => psi.support(),
        None => u.compact_support(),
    };
    if cutoff.is_none() && support.is_none() && !whole_line {
        return Err(Error::UnboundedSupport);
    }
    let support = support.map(|s| CompactInterval { lo: s.lo - r, hi: s.hi + r });
    let (u, rho, psi) = (u.clone(), rho.clone(), cutoff.cloned());
    Ok(SmoothFn::new(Domain::real_line(), DEFAULT_JET_CAP, support, move |x, m| {
        match &psi {
            Some(p) if !p.is_one_on(x - r, x + r) => {
                let mut out = Vec::with_capacity(m + 1);
                for j in 0..=m {
                    let phi = cutoff_translate(p, &rho, kf, x, j, u.domain())?;
                    out.push(pair(&u, &phi)?.value);
                }
                Ok(out)
            }
            _ => Ok(translate_pairing(&u, &rho, kf, x, m)?.total()),
        }
    }))
}

/// `y ↦ ψ(y) ∂_x^j [k ρ(k(x - y))]` as a test function.
pub(crate) fn cutoff_translate(psi: &SmoothFn, rho: &Mollifier, k: f64, x: f64, j: usize, domain: &Domain) -> Result<TestFn> {
    let r = rho.radius() / k;
    let mut supp = CompactInterval { lo: x - r, hi: x + r };
    if let Some(s) = psi.support() {
        match supp.intersect(&s) {
            Some(i) => supp = i,
            None => return Ok(TestFn::zero(domain.clone())),
        }
    }
    let (psi, rho) = (psi.clone(), rho.clone());
    let f = SmoothFn::new(domain.clone(), DEFAULT_JET_CAP, Some(supp), move |y, l| {
        let t = rho.translate_table(k, x, y, j + l)?;
        // ∂_y^b of k ρ(k(x-y)) differentiated j times in x
        let tj: Vec<f64> = (0..=l).map(|b| if b % 2 == 0 { t[j + b] } else { -t[j + b] }).collect();
        Ok(crate::jet::leibniz(&psi.jets(y, l)?, &tj))
    });
    Ok(TestFn::trusted(f))
}

/// The distributional Lie derivative `φ ↦ -⟨u, L_X φ⟩` in closed form.
pub fn lie_dist(x: &VectorField, u: &Distribution) -> Result<Distribution> {
    let mut terms = Vec::new();
    let xf = &x.coefficient;
    for t in &u.terms {
        match t {
            Term::Delta { a, order, coeff } => {
                let m = *order;
                if m + 1 > DEFAULT_JET_CAP {
                    return Err(Error::JetCapExceeded { requested: m + 1, cap: DEFAULT_JET_CAP });
                }
                let xj = xf.jets(*a, m + 1)?;
                for (i, xi) in xj.iter().enumerate() {
                    let c = if i % 2 == 0 { 1.0 } else { -1.0 } * binomial(m + 1, i) * xi * coeff;
                    if c != 0.0 {
                        terms.push(Term::Delta { a: *a, order: m + 1 - i, coeff: c });
                    }
                }
            }
            Term::Regular { density, coeff } => {
                for (i, p) in density.breakpoints.iter().enumerate() {
                    if !u.domain.contains(*p) {
                        continue;
                    }
                    let jump = density.pieces[i + 1].value(*p)? - density.pieces[i].value(*p)?;
                    let c = coeff * xf.value(*p)? * jump;
                    if c != 0.0 {
                        terms.push(Term::Delta { a: *p, order: 0, coeff: c });
                    }
                }
                let pieces = density
                    .pieces
                    .iter()
                    .map(|g| g.derivative()?.mul(xf))
                    .collect::<Result<Vec<_>>>()?;
                let d = Density::piecewise(density.breakpoints.clone(), pieces)?;
                if !d.pieces.iter().all(|p| p.constant_value() == Some(0.0)) {
                    terms.push(Term::Regular { density: d, coeff: *coeff });
                }
            }
        }
    }
    Ok(Distribution { terms, domain: u.domain.clone() })
}

/// Merged support intervals; delta points appear as `(a, a)`.
pub fn support_dist(u: &Distribution) -> Vec<(f64, f64)> {
    let (lo, hi) = u.domain.bounds();
    let mut parts: Vec<(f64, f64)> = Vec::new();
    for t in &u.terms {
        match t {
            Term::Delta { a, coeff, .. } if *coeff != 0.0 => parts.push((*a, *a)),
            Term::Regular { density, coeff } if *coeff != 0.0 => parts.extend(density.support_within(lo, hi)),
            _ => {}
        }
    }
    parts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for p in parts {
        match merged.last_mut() {
            Some(last) if p.0 <= last.1 => last.1 = last.1.max(p.1),
            _ => merged.push(p),
        }
    }
    merged
}

/// Push-forward of measures: `⟨μ_* u, φ⟩ = ⟨u, φ ∘ μ⟩`.
pub fn pushforward_dist(mu: &Diffeo1D, u: &Distribution) -> Result<Distribution> {
    let mut terms = Vec::new();
    for t in &u.terms {
        match t {
            Term::Delta { a, order, coeff } => {
                let m = *order;
                let table = crate::jet::bell_table(&mu.forward.jets(*a, m)?);
                let b = mu.forward.value(*a)?;
                for (j, tj) in table[m].iter().enumerate().take(m + 1) {
                    if *tj == 0.0 {
                        continue;
                    }
                    // (-1)^m (φ∘μ)^(m)(a) = Σ_j B[m][j] (-1)^(m-j) ⟨δ_b^(j), φ⟩
                    let s = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
                    terms.push(Term::Delta { a: b, order: j, coeff: coeff * s * tj });
                }
            }
            Term::Regular { density, coeff } => {
                let dinv = mu.inverse.derivative()?;
                let pieces = density
                    .pieces
                    .iter()
                    .map(|g| g.compose(&mu.inverse)?.mul(&dinv))
                    .collect::<Result<Vec<_>>>()?;
                let bps = density
                    .breakpoints
                    .iter()
                    .map(|p| mu.forward.value(*p))
                    .collect::<Result<Vec<_>>>()?;
                terms.push(Term::Regular { density: Density::piecewise(bps, pieces)?, coeff: *coeff });
            }
        }
    }
    Ok(Distribution { terms, domain: mu.target().clone() })
}

/// The default probe battery: bumps at centers `±0.2, ±0.6` with radii
/// `0.75, 1, 1.25`, scaled into the domain's unit window.
pub fn probe_battery(domain: &Domain) -> Result<Vec<TestFn>> {
    let comp = domain.intervals().iter().max_by(|a, b| a.length().min(1e9).total_cmp(&b.length().min(1e9))).copied();
    let comp = comp.ok_or(Error::EmptyCover)?;
    let (c, half) = match (comp.lo.is_finite(), comp.hi.is_finite()) {
        (true, true) => (0.5 * (comp.lo + comp.hi), 0.5 * comp.length()),
        (true, false) => (comp.lo + 2.0, 2.0),
        (false, true) => (comp.hi - 2.0, 2.0),
        (false, false) => (0.0, 2.0),
    };
    let s = half / 2.0;
    let mut out = Vec::with_capacity(12);
    for center in [-0.6, -0.2, 0.2, 0.6] {
        for radius in [0.75, 1.0, 1.25] {
            out.push(TestFn::bump(c + s * center, s * radius, domain)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::make_mollifier;

    fn dom() -> Domain {
        Domain::interval(-2.0, 2.0).unwrap()
    }

    fn bump(c: f64, r: f64) -> TestFn {
        TestFn::bump(c, r, &dom()).unwrap()
    }

    #[test]
    fn delta_pairings() {
        let phi = bump(0.3, 1.0);
        let d = Distribution::delta(0.0, dom()).unwrap();
        assert_eq!(pair(&d, &phi).unwrap().value, phi.value(0.0).unwrap());
        let dd = Distribution::delta_derivative(0.0, 1, dom()).unwrap();
        assert_eq!(pair(&dd, &phi).unwrap().value, -phi.jet_eval(0.0, 1).unwrap());
    }

    #[test]
    fn heaviside_pairing() {
        let h = Distribution::heaviside(dom()).unwrap();
        let v = pair(&h, &bump(0.0, 1.0)).unwrap().value;
        assert!((v - 0.603_450_161_218_938_1).abs() < 1e-9, "{v}");
    }

    #[test]
    fn mollify_examples() {
        let rho = make_mollifier(1, 1.0).unwrap();
        let d = Distribution::delta(0.0, dom()).unwrap();
        let f = mollify(&d, &rho, 8, None).unwrap();
        for x in [-0.1, 0.0, 0.05] {
            assert!((f.value(x).unwrap() - 8.0 * rho.value(8.0 * x)).abs() < 1e-12);
        }
        let one = Distribution::regular(SmoothFn::constant(1.0, Domain::real_line()));
        let g = mollify(&one, &rho, 8, None).unwrap();
        for i in 0..10 {
            assert_eq!(g.value(-1.0 + 0.2 * i as f64).unwrap(), 1.0);
        }
        let h = Distribution::heaviside(dom()).unwrap();
        assert!(matches!(mollify(&h, &rho, 8, None), Err(Error::UnboundedSupport)));
        let psi = SmoothFn::plateau(-1.5, -1.0, 1.0, 1.5).unwrap();
        let hm = mollify(&h, &rho, 8, Some(&psi)).unwrap();
        assert!((hm.value(0.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn compensated_matches_quadrature() {
        let rho = make_mollifier(3, 1.0).unwrap();
        let s = Distribution::regular(SmoothFn::sin(dom()));
        for k in [2.0, 8.0] {
            let a = translate_pairing(&s, &rho, k, 0.4, 2).unwrap().total();
            let psi = SmoothFn::plateau(-1.9, -1.8, 1.8, 1.9).unwrap();
            for j in 0..=2 {
                let phi = cutoff_translate(&psi, &rho, k, 0.4, j, &dom()).unwrap();
                let b = pair(&s, &phi).unwrap().value;
                assert!((a[j] - b).abs() < 1e-9, "k={k} j={j} {} {}", a[j], b);
            }
        }
    }

    #[test]
    fn lie_dist_examples() {
        let one = VectorField::constant(1.0, dom());
        let d = Distribution::delta(0.0, dom()).unwrap();
        let l = lie_dist(&one, &d).unwrap();
        let dd = Distribution::delta_derivative(0.0, 1, dom()).unwrap();
        let h = Distribution::heaviside(dom()).unwrap();
        let lh = lie_dist(&one, &h).unwrap();
        let xf = VectorField::new(SmoothFn::identity(dom()));
        let lx = lie_dist(&xf, &d).unwrap();
        for phi in probe_battery(&dom()).unwrap().iter().take(5) {
            assert!((pair(&l, phi).unwrap().value - pair(&dd, phi).unwrap().value).abs() < 1e-10);
            assert!((pair(&lh, phi).unwrap().value - phi.value(0.0).unwrap()).abs() < 1e-10);
            // ⟨L_x δ, φ⟩ = -⟨δ, xφ' + φ⟩ = -φ(0)
            assert!((pair(&lx, phi).unwrap().value + phi.value(0.0).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn support_examples() {
        let d = Distribution::delta(0.0, dom()).unwrap();
        assert_eq!(support_dist(&d), vec![(0.0, 0.0)]);
        let h = Distribution::heaviside(dom()).unwrap();
        assert_eq!(support_dist(&h), vec![(0.0, 2.0)]);
        let b = Distribution::regular(SmoothFn::bump(1.0, 0.5).unwrap().with_domain(dom()));
        assert_eq!(support_dist(&d.add(&b).unwrap()), vec![(0.0, 0.0), (0.5, 1.5)]);
    }

    #[test]
    fn pushforward_of_delta() {
        let mu = Diffeo1D::affine(2.0, 1.0, &dom()).unwrap();
        let d = Distribution::delta(0.0, dom()).unwrap();
        let p = pushforward_dist(&mu, &d).unwrap();
        assert!(matches!(p.terms()[0], Term::Delta { a, order: 0, coeff } if a == 1.0 && coeff == 1.0));
    }
}
