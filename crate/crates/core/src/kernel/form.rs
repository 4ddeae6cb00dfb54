use std::fmt;
use std::sync::Arc;

use super::{DyadicCover, Mollifier, MOLLIFIER_CAP};
use crate::dist::{pair_with, translate_pairing, Distribution, Split};
use crate::error::{Error, Result};
use crate::jet::{bell_table, binomial, leibniz};
use crate::smooth::{
    lie_test, CompactInterval, Diffeo1D, Domain, PartitionOfUnity, SmoothFn, TestFn, VectorField,
    DEFAULT_JET_CAP,
};

type KernelEval = dyn Fn(f64) -> Result<TestFn> + Send + Sync;
type RadiusEval = dyn Fn(f64) -> f64 + Send + Sync;

const FD_STEP: f64 = 1e-4;

/// A smooth map `x ↦ φ⃗(x)` from a domain into its test functions, kept as
/// a structural expression so x-jets are exact.
#[derive(Clone)]
pub struct SmoothingKernel {
    domain: Domain,
    form: Arc<Form>,
}

enum Form {
    Constant(TestFn),
    /// `x ↦ k ρ(k(x - ·))` on the whole line.
    Translate { rho: Mollifier, k: f64 },
    /// `x ↦ Σ_n χ_n(x) ψ_n · parent(x)` over a dyadic cover.
    Localized { cover: DyadicCover, parent: SmoothingKernel },
    Scaled { f: SmoothFn, parent: SmoothingKernel },
    Sum(Vec<(f64, SmoothingKernel)>),
    LieDerived { x: VectorField, parent: SmoothingKernel },
    /// `χ · parent`, extended by zero from the parent's domain.
    CutoffExtended { chi: SmoothFn, parent: SmoothingKernel },
    Glued { pieces: Vec<SmoothingKernel>, pou: PartitionOfUnity },
    /// `x ↦ μ^*(parent(μ(x)))`; `density` multiplies by `μ'`.
    Pulled { mu: Diffeo1D, parent: SmoothingKernel, density: bool },
    Generic { eval: Arc<KernelEval>, radius: Arc<RadiusEval> },
}

/// On a neighbourhood of the probed point the kernel equals
/// `scale(x) · τ_x ρ̌_k`; `scale = None` means 1.
#[derive(Clone)]
pub struct LocalTranslate {
    pub rho: Mollifier,
    pub k: f64,
    pub scale: Option<SmoothFn>,
}

impl fmt::Debug for SmoothingKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &*self.form {
            Form::Constant(_) => "Constant",
            Form::Translate { .. } => "Translate",
            Form::Localized { .. } => "Localized",
            Form::Scaled { .. } => "Scaled",
            Form::Sum(_) => "Sum",
            Form::LieDerived { .. } => "LieDerived",
            Form::CutoffExtended { .. } => "CutoffExtended",
            Form::Glued { .. } => "Glued",
            Form::Pulled { .. } => "Pulled",
            Form::Generic { .. } => "Generic",
        };
        write!(f, "SmoothingKernel::{name} on {}", self.domain)
    }
}

fn build_test(
    domain: &Domain,
    support: Option<CompactInterval>,
    cap: usize,
    jets: impl Fn(f64, usize) -> Result<Vec<f64>> + Send + Sync + 'static,
) -> TestFn {
    match support {
        None => TestFn::zero(domain.clone()),
        Some(s) => TestFn::trusted(SmoothFn::new(domain.clone(), cap, Some(s), jets)),
    }
}

/// `Σ c_i φ_i` as a test function on `domain`, skipping zero terms.
pub(crate) fn lincomb(domain: &Domain, terms: Vec<(f64, TestFn)>) -> TestFn {
    let terms: Vec<(f64, TestFn)> = terms.into_iter().filter(|(c, t)| *c != 0.0 && !t.is_zero()).collect();
    if terms.len() == 1 && terms[0].0 == 1.0 && terms[0].1.domain() == domain {
        return terms.into_iter().next().unwrap().1;
    }
    let support = terms.iter().filter_map(|(_, t)| t.support()).reduce(|a, b| a.hull(&b));
    let cap = terms.iter().map(|(_, t)| t.base().cap()).min().unwrap_or(DEFAULT_JET_CAP);
    build_test(domain, support, cap, move |y, m| {
        let mut out = vec![0.0; m + 1];
        for (c, t) in &terms {
            for (o, v) in out.iter_mut().zip(t.jets(y, m)?) {
                *o += c * v;
            }
        }
        Ok(out)
    })
}

fn zero_jet_fn(v: &[f64]) -> bool {
    v.iter().all(|c| *c == 0.0)
}

impl SmoothingKernel {
    fn wrap(domain: Domain, form: Form) -> Self {
        Self { domain, form: Arc::new(form) }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// The constant kernel `x ↦ φ`.
    pub fn constant(phi: TestFn) -> Self {
        Self::wrap(phi.domain().clone(), Form::Constant(phi))
    }

    /// `x ↦ k ρ(k(x - ·))` on the line. Not a kernel on a proper subset;
    /// use `standard` there.
    pub fn translate(rho: &Mollifier, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale {k} must be positive")));
        }
        Ok(Self::wrap(Domain::real_line(), Form::Translate { rho: rho.clone(), k }))
    }

    /// `ψ⃗_k(x) = Σ_n χ_n(x) ψ_n τ_x ρ̌_k`.
    pub fn standard(rho: &Mollifier, k: f64, cover: &DyadicCover) -> Result<Self> {
        Self::localized(cover, Self::translate(rho, k)?)
    }

    /// `x ↦ Σ_n χ_n(x) ψ_n · parent(x)` on the cover's domain.
    pub fn localized(cover: &DyadicCover, parent: SmoothingKernel) -> Result<Self> {
        if !cover.domain().is_subset_of(&parent.domain) {
            return Err(Error::NotContained(cover.domain().to_string(), parent.domain.to_string()));
        }
        Ok(Self::wrap(cover.domain().clone(), Form::Localized { cover: cover.clone(), parent }))
    }

    /// `f · φ⃗`.
    pub fn scaled(f: &SmoothFn, parent: &SmoothingKernel) -> Self {
        if f.constant_value() == Some(1.0) {
            return parent.clone();
        }
        Self::wrap(parent.domain.clone(), Form::Scaled { f: f.clone(), parent: parent.clone() })
    }

    pub fn linear_combination(terms: Vec<(f64, SmoothingKernel)>) -> Result<Self> {
        let domain = terms.first().map(|(_, t)| t.domain.clone()).ok_or(Error::EmptyCover)?;
        if let Some((_, t)) = terms.iter().find(|(_, t)| t.domain != domain) {
            return Err(Error::DomainMismatch(format!("{} vs {}", domain, t.domain)));
        }
        Ok(Self::wrap(domain, Form::Sum(terms)))
    }

    pub fn add(&self, other: &SmoothingKernel) -> Result<Self> {
        Self::linear_combination(vec![(1.0, self.clone()), (1.0, other.clone())])
    }

    pub fn sub(&self, other: &SmoothingKernel) -> Result<Self> {
        Self::linear_combination(vec![(1.0, self.clone()), (-1.0, other.clone())])
    }

    /// `L^SK_X φ⃗ = X ∂_x φ⃗ + L_X ∘ φ⃗`.
    pub fn lie(x: &VectorField, parent: &SmoothingKernel) -> Self {
        Self::wrap(parent.domain.clone(), Form::LieDerived { x: x.clone(), parent: parent.clone() })
    }

    /// `χ · φ⃗` regarded on `outer ⊇ domain(φ⃗)`; `supp χ` must be a compact
    /// subset of the kernel's domain.
    pub fn cutoff_extended(chi: &SmoothFn, parent: &SmoothingKernel, outer: &Domain) -> Result<Self> {
        let s = chi.support().ok_or_else(|| Error::InvalidArgument("cutoff needs compact support".into()))?;
        if !parent.domain.contains_compact(&s) {
            return Err(Error::NotContained(s.to_string(), parent.domain.to_string()));
        }
        if !parent.domain.is_subset_of(outer) {
            return Err(Error::NotContained(parent.domain.to_string(), outer.to_string()));
        }
        Ok(Self::wrap(outer.clone(), Form::CutoffExtended { chi: chi.clone(), parent: parent.clone() }))
    }

    /// `Σ_λ χ_λ φ⃗^λ`; `pieces[λ]` lives on the λ-th cover set.
    pub fn glued(pieces: Vec<SmoothingKernel>, pou: &PartitionOfUnity) -> Result<Self> {
        if pieces.len() != pou.len() {
            return Err(Error::InvalidArgument(format!("{} pieces for {} cover sets", pieces.len(), pou.len())));
        }
        for (p, u) in pieces.iter().zip(&pou.cover) {
            let d = Domain::interval(u.lo, u.hi)?;
            if !d.is_subset_of(&p.domain) {
                return Err(Error::NotContained(u.to_string(), p.domain.to_string()));
            }
        }
        Ok(Self::wrap(pou.union(), Form::Glued { pieces, pou: pou.clone() }))
    }

    /// `x ↦ μ^*(φ⃗(μ(x)))` with the scalar pullback, or the density pullback
    /// `(φ ∘ μ) μ'` when `density` is set.
    pub fn pulled(mu: &Diffeo1D, parent: &SmoothingKernel, density: bool) -> Result<Self> {
        if !mu.target().is_subset_of(&parent.domain) {
            return Err(Error::DomainMismatch(format!("{} vs {}", mu.target(), parent.domain)));
        }
        Ok(Self::wrap(mu.source().clone(), Form::Pulled { mu: mu.clone(), parent: parent.clone(), density }))
    }

    /// An arbitrary evaluator; x-jets by central differences.
    pub fn generic<F, R>(domain: Domain, eval: F, radius: R) -> Self
    where
        F: Fn(f64) -> Result<TestFn> + Send + Sync + 'static,
        R: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::wrap(domain, Form::Generic { eval: Arc::new(eval), radius: Arc::new(radius) })
    }

    pub fn is_generic(&self) -> bool {
        matches!(&*self.form, Form::Generic { .. })
    }

    /// `φ⃗(x)`.
    pub fn at(&self, x: f64) -> Result<TestFn> {
        self.jet(x, 0)
    }

    /// `∂_x^m φ⃗(x)` as a test function in `y`.
    pub fn jet(&self, x: f64, m: usize) -> Result<TestFn> {
        if m > DEFAULT_JET_CAP {
            return Err(Error::JetCapExceeded { requested: m, cap: DEFAULT_JET_CAP });
        }
        self.jet_raw(x, m)
    }

    pub(crate) fn jet_raw(&self, x: f64, m: usize) -> Result<TestFn> {
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain { x });
        }
        let d = &self.domain;
        match &*self.form {
            Form::Constant(phi) => Ok(if m == 0 { phi.clone() } else { TestFn::zero(d.clone()) }),
            Form::Translate { rho, k } => {
                if m > MOLLIFIER_CAP {
                    return Err(Error::JetCapExceeded { requested: m, cap: MOLLIFIER_CAP });
                }
                let (rho, k) = (rho.clone(), *k);
                let r = rho.radius() / k;
                let cap = DEFAULT_JET_CAP.min(MOLLIFIER_CAP - m);
                Ok(build_test(d, Some(CompactInterval { lo: x - r, hi: x + r }), cap, move |y, l| {
                    let t = rho.translate_table(k, x, y, m + l)?;
                    Ok((0..=l).map(|b| if b % 2 == 0 { t[m + b] } else { -t[m + b] }).collect())
                }))
            }
            Form::Localized { cover, parent } => {
                let mut terms: Vec<(SmoothFn, Vec<(f64, TestFn)>)> = Vec::new();
                for (piece, w) in cover.weights(x, m)? {
                    if zero_jet_fn(&w) {
                        continue;
                    }
                    let mut inner = Vec::new();
                    for (i, wi) in w.iter().enumerate() {
                        if *wi != 0.0 {
                            inner.push((binomial(m, i) * wi, parent.jet_raw(x, m - i)?));
                        }
                    }
                    terms.push((piece.cutoff(), inner));
                }
                let mut parts = Vec::new();
                for (psi, inner) in terms {
                    let t = lincomb(&parent.domain, inner);
                    let Some(ts) = t.support() else { continue };
                    let Some(s) = ts.intersect(&psi.support().expect("cutoffs are compact")) else { continue };
                    let cap = t.base().cap();
                    parts.push(build_test(d, Some(s), cap, move |y, l| Ok(leibniz(&psi.jets(y, l)?, &t.jets(y, l)?))));
                }
                Ok(lincomb(d, parts.into_iter().map(|p| (1.0, p)).collect()))
            }
            Form::Scaled { f, parent } => {
                let fj = f.jets(x, m)?;
                let mut terms = Vec::new();
                for (i, fi) in fj.iter().enumerate() {
                    if *fi != 0.0 {
                        terms.push((binomial(m, i) * fi, parent.jet_raw(x, m - i)?));
                    }
                }
                Ok(lincomb(d, terms))
            }
            Form::Sum(parts) => {
                let terms = parts.iter().map(|(c, p)| Ok((*c, p.jet_raw(x, m)?))).collect::<Result<Vec<_>>>()?;
                Ok(lincomb(d, terms))
            }
            Form::LieDerived { x: field, parent } => {
                let xj = field.coefficient.jets(x, m)?;
                let mut terms = Vec::new();
                for (i, xi) in xj.iter().enumerate() {
                    if *xi != 0.0 {
                        terms.push((binomial(m, i) * xi, parent.jet_raw(x, m - i + 1)?));
                    }
                }
                if !field.is_zero() {
                    terms.push((1.0, lie_test(field, &parent.jet_raw(x, m)?)?));
                }
                Ok(lincomb(d, terms))
            }
            Form::CutoffExtended { chi, parent } => {
                let s = chi.support().expect("checked at construction");
                if !s.contains(x) {
                    return Ok(TestFn::zero(d.clone()));
                }
                let cj = chi.jets(x, m)?;
                let mut terms = Vec::new();
                for (i, ci) in cj.iter().enumerate() {
                    if *ci != 0.0 {
                        terms.push((binomial(m, i) * ci, parent.jet_raw(x, m - i)?.extend_to(d)?));
                    }
                }
                Ok(lincomb(d, terms))
            }
            Form::Glued { pieces, pou } => {
                let mut terms = Vec::new();
                for (((chi, _), pos), piece) in pou.pieces.iter().zip(&pou.positivity).zip(pieces) {
                    if !(pos.lo <= x && x <= pos.hi) {
                        continue;
                    }
                    let cj = chi.jets(x, m)?;
                    for (i, ci) in cj.iter().enumerate() {
                        if *ci != 0.0 {
                            let t = piece.jet_raw(x, m - i)?;
                            let t = if t.domain() == d { t } else { TestFn::trusted(t.into_base().with_domain(d.clone())) };
                            terms.push((binomial(m, i) * ci, t));
                        }
                    }
                }
                Ok(lincomb(d, terms))
            }
            Form::Pulled { mu, parent, density } => {
                let xp = mu.forward.value(x)?;
                let table = bell_table(&mu.forward.jets(x, m)?);
                let mut terms = Vec::new();
                for (j, b) in table[m].iter().enumerate().take(m + 1) {
                    if *b != 0.0 {
                        terms.push((*b, pull_test(mu, &parent.jet_raw(xp, j)?, *density)?));
                    }
                }
                Ok(lincomb(d, terms))
            }
            Form::Generic { eval, .. } => {
                if m == 0 {
                    return eval(x);
                }
                let diff = |h: f64| -> Result<Vec<(f64, TestFn)>> {
                    let mut out = Vec::with_capacity(m + 1);
                    for i in 0..=m {
                        let c = if i % 2 == 0 { 1.0 } else { -1.0 } * binomial(m, i) / h.powi(m as i32);
                        out.push((c, eval(x + (m as f64 / 2.0 - i as f64) * h)?));
                    }
                    Ok(out)
                };
                // Richardson: (4 D(h/2) - D(h)) / 3
                let mut terms: Vec<(f64, TestFn)> =
                    diff(FD_STEP / 2.0)?.into_iter().map(|(c, t)| (4.0 * c / 3.0, t)).collect();
                terms.extend(diff(FD_STEP)?.into_iter().map(|(c, t)| (-c / 3.0, t)));
                Ok(lincomb(d, terms))
            }
        }
    }

    /// Upper bound on the radius of `supp φ⃗(x)` about `x`.
    pub fn support_radius(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::OutOfDomain { x });
        }
        Ok(match &*self.form {
            Form::Constant(phi) => match phi.support() {
                Some(s) => (x - s.lo).max(s.hi - x).max(0.0),
                None => 0.0,
            },
            Form::Translate { rho, k } => rho.radius() / k,
            Form::Localized { parent, .. } | Form::Scaled { parent, .. } | Form::LieDerived { parent, .. } => {
                parent.support_radius(x)?
            }
            Form::Sum(parts) => {
                let mut r = 0.0f64;
                for (c, p) in parts {
                    if *c != 0.0 {
                        r = r.max(p.support_radius(x)?);
                    }
                }
                r
            }
            Form::CutoffExtended { chi, parent } => {
                if chi.support().map(|s| s.contains(x)).unwrap_or(false) { parent.support_radius(x)? } else { 0.0 }
            }
            Form::Glued { pieces, pou } => {
                let mut r = 0.0f64;
                for (pos, piece) in pou.positivity.iter().zip(pieces) {
                    if pos.lo <= x && x <= pos.hi {
                        r = r.max(piece.support_radius(x)?);
                    }
                }
                r
            }
            Form::Pulled { mu, parent, .. } => {
                let xp = mu.forward.value(x)?;
                let r = parent.support_radius(xp)?;
                let (lo, hi) = clamp_to(mu.target(), xp - r, xp + r);
                let a = mu.inverse.value(lo)?;
                let b = mu.inverse.value(hi)?;
                (x - a).max(b - x)
            }
            Form::Generic { radius, .. } => radius(x),
        })
    }

    /// A length below which `φ⃗(x)` may have structure; used to size
    /// quadrature pieces.
    pub fn feature_scale(&self, x: f64) -> f64 {
        match &*self.form {
            Form::Constant(phi) => phi.support().map(|s| s.width() / 8.0).unwrap_or(f64::INFINITY),
            Form::Translate { rho, k } => rho.radius() / (4.0 * k),
            Form::Localized { parent, .. }
            | Form::Scaled { parent, .. }
            | Form::LieDerived { parent, .. }
            | Form::CutoffExtended { parent, .. } => {
                if parent.domain.contains(x) { parent.feature_scale(x) } else { f64::INFINITY }
            }
            Form::Sum(parts) => parts.iter().map(|(_, p)| p.feature_scale(x)).fold(f64::INFINITY, f64::min),
            Form::Glued { pieces, .. } => pieces
                .iter()
                .filter(|p| p.domain.contains(x))
                .map(|p| p.feature_scale(x))
                .fold(f64::INFINITY, f64::min),
            Form::Pulled { mu, parent, .. } => {
                let xp = mu.forward.value(x).unwrap_or(x);
                let d = mu.forward.jet_eval(x, 1).unwrap_or(1.0).max(1e-3);
                parent.feature_scale(xp) / d
            }
            Form::Generic { radius, .. } => radius(x) / 8.0,
        }
    }

    /// Detects the plateau regime: on a neighbourhood of `x` the kernel is
    /// a (scaled) translate of `ρ̌_k`.
    pub fn local_translate(&self, x: f64) -> Option<LocalTranslate> {
        if !self.domain.contains(x) {
            return None;
        }
        match &*self.form {
            Form::Translate { rho, k } => Some(LocalTranslate { rho: rho.clone(), k: *k, scale: None }),
            Form::Localized { cover, parent } => {
                let lt = parent.local_translate(x)?;
                let r = lt.rho.radius() / lt.k;
                for piece in cover.active(x).ok()? {
                    let pos = piece.positivity();
                    if pos.lo <= x && x <= pos.hi && !piece.cutoff().is_one_on(x - r, x + r) {
                        return None;
                    }
                }
                Some(lt)
            }
            Form::Scaled { f, parent } => {
                let lt = parent.local_translate(x)?;
                let scale = match lt.scale {
                    None => f.clone(),
                    Some(s) => f.mul(&s).ok()?,
                };
                Some(LocalTranslate { scale: Some(scale), ..lt })
            }
            Form::Sum(parts) => {
                let mut base: Option<LocalTranslate> = None;
                let mut unit_total = 0.0;
                let mut scales: Vec<(f64, SmoothFn)> = Vec::new();
                for (c, p) in parts {
                    if *c == 0.0 {
                        continue;
                    }
                    let lt = p.local_translate(x)?;
                    if let Some(b) = &base {
                        if !(b.rho == lt.rho && b.k == lt.k) {
                            return None;
                        }
                    }
                    match &lt.scale {
                        None => unit_total += c,
                        Some(s) => scales.push((*c, s.clone())),
                    }
                    base.get_or_insert(lt);
                }
                let b = base?;
                if scales.is_empty() && unit_total == 1.0 {
                    return Some(LocalTranslate { scale: None, ..b });
                }
                let mut s = SmoothFn::constant(unit_total, self.domain.clone());
                for (c, f) in scales {
                    s = s.linear_combination(1.0, &f, c).ok()?;
                }
                Some(LocalTranslate { scale: Some(s), ..b })
            }
            Form::CutoffExtended { chi, parent } => {
                if chi.is_one_on(x, x) { parent.local_translate(x) } else { None }
            }
            Form::Glued { pieces, pou } => {
                let mut base: Option<LocalTranslate> = None;
                for (pos, piece) in pou.positivity.iter().zip(pieces) {
                    if !(pos.lo <= x && x <= pos.hi) {
                        continue;
                    }
                    let lt = piece.local_translate(x)?;
                    if lt.scale.is_some() {
                        return None;
                    }
                    if let Some(b) = &base {
                        if !(b.rho == lt.rho && b.k == lt.k) {
                            return None;
                        }
                    }
                    base.get_or_insert(lt);
                }
                base
            }
            _ => None,
        }
    }

    /// Exact structural equality of the germs at `x`, when decidable.
    pub(crate) fn same_germ(&self, other: &SmoothingKernel, x: f64) -> bool {
        if Arc::ptr_eq(&self.form, &other.form) {
            return true;
        }
        match (self.local_translate(x), other.local_translate(x)) {
            (Some(a), Some(b)) => a.rho == b.rho && a.k == b.k && a.scale.is_none() && b.scale.is_none(),
            _ => false,
        }
    }
}

fn clamp_to(d: &Domain, lo: f64, hi: f64) -> (f64, f64) {
    let (a, b) = d.bounds();
    let eps = 1e-12 * (1.0 + a.abs().max(b.abs()).min(1e6));
    (lo.max(a + eps), hi.min(b - eps))
}

fn pull_test(mu: &Diffeo1D, phi: &TestFn, density: bool) -> Result<TestFn> {
    let src = mu.source().clone();
    let Some(s) = phi.support() else { return Ok(TestFn::zero(src)) };
    let support = mu.preimage(&s)?;
    let mut f = phi.base().clone().with_support(Some(s)).compose(&mu.forward)?;
    if density {
        f = f.mul(&mu.forward.derivative()?)?;
    }
    Ok(TestFn::trusted(f.with_domain(src).with_support(Some(support))))
}

/// `x ↦ ⟨u, φ⃗(x)⟩` with x-jets `⟨u, ∂_x^m φ⃗(x)⟩`.
pub fn smooth_apply(kernel: &SmoothingKernel, u: &Distribution) -> SmoothFn {
    let (k, u) = (kernel.clone(), u.clone());
    SmoothFn::new(kernel.domain.clone(), DEFAULT_JET_CAP, None, move |x, m| Ok(apply_split(&k, &u, x, m)?.total()))
}

/// Jets of `⟨u, φ⃗(x)⟩` split as in `translate_pairing`; outside the plateau
/// regime everything lands in `rest`.
pub(crate) fn apply_split(kernel: &SmoothingKernel, u: &Distribution, x: f64, m: usize) -> Result<Split> {
    if !kernel.domain.contains(x) {
        return Err(Error::OutOfDomain { x });
    }
    if let Some(lt) = kernel.local_translate(x) {
        let s = translate_pairing(u, &lt.rho, lt.k, x, m)?;
        return Ok(match lt.scale {
            None => s,
            Some(c) => {
                let cj = c.jets(x, m)?;
                Split { lead: leibniz(&cj, &s.lead), rest: leibniz(&cj, &s.rest) }
            }
        });
    }
    let hint = Some(kernel.feature_scale(x)).filter(|h| h.is_finite());
    let mut out = Split::zeros(m);
    for j in 0..=m {
        out.rest[j] = pair_with(u, &kernel.jet_raw(x, j)?, hint)?.value;
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

    fn std_kernel(k: f64) -> SmoothingKernel {
        let rho = make_mollifier(1, 1.0).unwrap();
        SmoothingKernel::standard(&rho, k, &DyadicCover::standard(dom())).unwrap()
    }

    #[test]
    fn plateau_regime_is_a_translate() {
        let rho = make_mollifier(1, 1.0).unwrap();
        let k = std_kernel(16.0);
        for x in [-0.7, 0.0, 0.33] {
            assert!(k.local_translate(x).is_some());
            let t = k.at(x).unwrap();
            for y in [x - 0.05, x, x + 0.02] {
                assert!((t.value(y).unwrap() - 16.0 * rho.value(16.0 * (x - y))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn x_derivative_matches_fd() {
        for k in [std_kernel(8.0), std_kernel(3.0)] {
            let x = 0.4;
            let d = k.jet(x, 1).unwrap();
            let h = 1e-5;
            for i in 0..5 {
                let y = x - 0.1 + 0.05 * i as f64;
                let fd = (k.at(x + h).unwrap().value(y).unwrap() - k.at(x - h).unwrap().value(y).unwrap()) / (2.0 * h);
                let v = d.value(y).unwrap();
                assert!((v - fd).abs() <= 1e-6 * (1.0 + v.abs()), "y={y} {v} {fd}");
            }
        }
    }

    #[test]
    fn constant_and_scaled_forms() {
        let phi = TestFn::bump(0.0, 1.0, &dom()).unwrap();
        let c = SmoothingKernel::constant(phi.clone());
        assert!(c.jet(0.3, 1).unwrap().is_zero());
        let f = SmoothFn::identity(dom());
        let s = SmoothingKernel::scaled(&f, &std_kernel(8.0));
        let a = s.at(0.5).unwrap().value(0.45).unwrap();
        let b = 0.5 * std_kernel(8.0).at(0.5).unwrap().value(0.45).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn smooth_apply_examples() {
        let k = std_kernel(16.0);
        let rho = make_mollifier(1, 1.0).unwrap();
        let d = Distribution::delta(0.0, dom()).unwrap();
        let f = smooth_apply(&k, &d);
        assert!((f.value(0.03).unwrap() - 16.0 * rho.value(16.0 * 0.03)).abs() < 1e-12);
        let one = Distribution::regular(SmoothFn::constant(1.0, dom()));
        assert_eq!(smooth_apply(&k, &one).value(0.2).unwrap(), 1.0);
        let dd = Distribution::delta_derivative(0.0, 1, dom()).unwrap();
        // ⟨δ', φ⃗(x)⟩ = -∂_y[kρ(k(x-y))]_{y=0} = k²ρ'(kx)
        let g = smooth_apply(&k, &dd);
        let x = 0.02;
        let want = 256.0 * rho.jets(16.0 * x, 1).unwrap()[1];
        assert!((g.value(x).unwrap() - want).abs() < 1e-9 * want.abs());
    }

    #[test]
    fn lie_of_standard_vanishes_in_plateau() {
        let k = std_kernel(16.0);
        let l = SmoothingKernel::lie(&VectorField::constant(1.0, dom()), &k);
        let t = l.at(0.1).unwrap();
        for i in 0..9 {
            let y = 0.04 + 0.015 * i as f64;
            assert!(t.value(y).unwrap().abs() < 1e-9);
        }
        let phi = TestFn::bump(0.0, 1.0, &dom()).unwrap();
        let c = SmoothingKernel::lie(&VectorField::constant(1.0, dom()), &SmoothingKernel::constant(phi.clone()));
        assert!((c.at(0.7).unwrap().value(0.3).unwrap() - phi.jet_eval(0.3, 1).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn support_radius_bound() {
        for kk in [4.0, 8.0, 32.0] {
            let k = std_kernel(kk);
            for x in [-1.9, -0.5, 0.0, 1.2, 1.99] {
                let r = k.support_radius(x).unwrap();
                assert!(r <= 1.0 / kk);
                if let Some(s) = k.at(x).unwrap().support() {
                    assert!(x - r <= s.lo && s.hi <= x + r);
                }
            }
        }
    }

    #[test]
    fn generic_fd_jets() {
        let base = std_kernel(8.0);
        let b2 = base.clone();
        let g = SmoothingKernel::generic(dom(), move |x| b2.at(x), |_| 0.125);
        let x = 0.3;
        for y in [0.25, 0.3, 0.36] {
            let a = g.jet(x, 1).unwrap().value(y).unwrap();
            let b = base.jet(x, 1).unwrap().value(y).unwrap();
            assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "{a} {b}");
        }
    }
}
