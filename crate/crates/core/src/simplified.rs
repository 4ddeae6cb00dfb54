//! The simplified algebra: sequences of smooth functions, its embeddings,
//! termwise derivative, classification, and the correspondence with the
//! basic space along the standard kernel sequence.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::basic::BasicElement;
use crate::dist::{mollify, Distribution};
use crate::error::{Error, Result};
use crate::jet::leibniz;
use crate::kernel::{DyadicCover, KernelSequence, Mollifier};
use crate::smooth::{bump_jets, seminorm_points, CompactInterval, Domain, SmoothFn, TestFn};
use crate::testing::{
    fit_order, is_moderate, is_negligible, sweep, AsymptoticFit, Seminorm, SweepOptions, N_MAX,
};
use crate::verdict::Verdict;

type TermGen = dyn Fn(usize) -> Result<SmoothFn> + Send + Sync;

/// A sequence `(u_k)_k` of smooth functions, generated lazily.
#[derive(Clone)]
pub struct SimplifiedRep {
    domain: Domain,
    gen: Arc<TermGen>,
    memo: Arc<Mutex<BTreeMap<usize, SmoothFn>>>,
}

impl fmt::Debug for SimplifiedRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimplifiedRep on {}", self.domain)
    }
}

impl SimplifiedRep {
    pub fn new<F>(domain: Domain, gen: F) -> Self
    where
        F: Fn(usize) -> Result<SmoothFn> + Send + Sync + 'static,
    {
        Self { domain, gen: Arc::new(gen), memo: Arc::default() }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn get(&self, k: usize) -> Result<SmoothFn> {
        if k == 0 {
            return Err(Error::InvalidArgument("sequences start at k = 1".into()));
        }
        if let Some(v) = self.memo.lock().expect("memo poisoned").get(&k) {
            return Ok(v.clone());
        }
        let v = (self.gen)(k)?;
        Ok(self.memo.lock().expect("memo poisoned").entry(k).or_insert(v).clone())
    }

    pub fn sub(&self, other: &SimplifiedRep) -> Result<SimplifiedRep> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(format!("{} vs {}", self.domain, other.domain)));
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(Self::new(self.domain.clone(), move |k| a.get(k)?.sub(&b.get(k)?)))
    }
}

/// `ι^s u = (Σ_j χ_j ((ψ_j u) * ρ_k))_k`.
pub fn iota_s(u: &Distribution, rho: &Mollifier, cover: &DyadicCover) -> Result<SimplifiedRep> {
    if cover.domain() != u.domain() {
        return Err(Error::CoverTooCoarse(format!("cover of {} for {}", cover.domain(), u.domain())));
    }
    let (u, rho, cover) = (u.clone(), rho.clone(), cover.clone());
    let domain = u.domain().clone();
    Ok(SimplifiedRep::new(domain.clone(), move |k| {
        let (u, rho, cover) = (u.clone(), rho.clone(), cover.clone());
        Ok(SmoothFn::new(domain.clone(), crate::smooth::DEFAULT_JET_CAP, None, move |x, m| {
            let mut out = vec![0.0; m + 1];
            for (piece, chi) in cover.weights(x, m)? {
                if chi.iter().all(|c| *c == 0.0) {
                    continue;
                }
                let conv = mollify(&u, &rho, k, Some(&piece.cutoff()))?;
                for (o, v) in out.iter_mut().zip(leibniz(&chi, &conv.jets(x, m)?)) {
                    *o += v;
                }
            }
            Ok(out)
        }))
    }))
}

/// `σ^s f = (f)_k`.
pub fn sigma_s(f: &SmoothFn) -> SimplifiedRep {
    let f = f.clone();
    SimplifiedRep::new(f.domain().clone(), move |_| Ok(f.clone()))
}

pub enum Embeddable<'a> {
    Distribution(&'a Distribution),
    Smooth(&'a SmoothFn),
}

/// `ι^s` for distributions, `σ^s` for smooth functions.
pub fn embed_s(x: Embeddable<'_>, rho: &Mollifier, cover: &DyadicCover) -> Result<SimplifiedRep> {
    match x {
        Embeddable::Distribution(u) => iota_s(u, rho, cover),
        Embeddable::Smooth(f) => Ok(sigma_s(f)),
    }
}

/// `D^s (u_k)_k = (u_k')_k`.
pub fn d_s(r: &SimplifiedRep) -> SimplifiedRep {
    let r2 = r.clone();
    SimplifiedRep::new(r.domain.clone(), move |k| {
        let f = r2.get(k)?;
        if f.cap() == 0 {
            return Err(Error::JetCapExceeded { requested: 1, cap: 0 });
        }
        f.derivative()
    })
}

/// `F^*R = (R(φ⃗_k))_k`.
pub fn pullback_f(r: &BasicElement, seq: &KernelSequence) -> Result<SimplifiedRep> {
    if r.domain() != seq.domain() {
        return Err(Error::DomainMismatch(format!("{} vs {}", r.domain(), seq.domain())));
    }
    let (r, seq) = (r.clone(), seq.clone());
    Ok(SimplifiedRep::new(r.domain().clone(), move |k| r.eval(&seq.get(k)?)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    Negligible,
    Moderate(f64),
    Neither,
    Inconclusive,
}

impl Classification {
    pub fn is_moderate(&self) -> bool {
        matches!(self, Classification::Negligible | Classification::Moderate(_))
    }

    pub fn is_negligible(&self) -> bool {
        matches!(self, Classification::Negligible)
    }

    /// Same class, ignoring the fitted `N`.
    pub fn same_class(&self, other: &Classification) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Negligible => f.write_str("negligible"),
            Classification::Moderate(n) => write!(f, "moderate (N = {n:.3})"),
            Classification::Neither => f.write_str("neither"),
            Classification::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

fn classify_fits(fits: &[AsymptoticFit], m_max: usize, tol: f64) -> Classification {
    let live: Vec<f64> = fits.iter().filter(|f| !f.exact_zero()).map(|f| f.slope).collect();
    let worst = live.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if live.is_empty() || worst <= -(m_max as f64) + tol {
        Classification::Negligible
    } else if worst.is_finite() && worst <= N_MAX {
        Classification::Moderate(worst)
    } else {
        Classification::Neither
    }
}

/// Seminorm fits of `(u_k)_k` over the grid.
pub fn sweep_s(r: &SimplifiedRep, opts: &SweepOptions) -> Result<Vec<(Seminorm, AsymptoticFit)>> {
    opts.seminorms
        .iter()
        .map(|p| Ok((*p, fit_order(&sweep(&opts.k_grid, |k| p.apply(&r.get(k)?))?)?)))
        .collect()
}

/// Negligible when every slope is at most `-m_max + tol`; moderate with the
/// largest slope as `N` otherwise, up to `N_MAX`.
pub fn classify_s(r: &SimplifiedRep, opts: &SweepOptions, m_max: usize) -> Result<Classification> {
    let fits: Vec<AsymptoticFit> = sweep_s(r, opts)?.into_iter().map(|(_, f)| f).collect();
    Ok(classify_fits(&fits, m_max, opts.tol))
}

/// The same classification computed in the basic space along one sequence.
pub fn classify_basic(r: &BasicElement, seq: &KernelSequence, opts: &SweepOptions, m_max: usize) -> Result<Classification> {
    let fam = std::slice::from_ref(seq);
    let moderate = is_moderate(r, fam, opts)?;
    let negligible = is_negligible(r, |_| Ok(fam.to_vec()), |_| 0, m_max, opts)?;
    Ok(match (negligible.verdict, moderate.verdict) {
        (Verdict::Pass, _) => Classification::Negligible,
        (_, Verdict::Pass) => Classification::Moderate(moderate.n),
        (_, Verdict::Fail) => Classification::Neither,
        _ => Classification::Inconclusive,
    })
}

/// Sup-distance between test functions on a fixed grid.
struct Profile {
    points: Vec<f64>,
}

impl Profile {
    fn new(domain: &Domain, x0: f64) -> Result<Self> {
        let c = domain.component_of(x0).ok_or(Error::OutOfDomain { x: x0 })?;
        let lo = if c.lo.is_finite() { c.lo } else { x0 - 4.0 };
        let hi = if c.hi.is_finite() { c.hi } else { x0 + 4.0 };
        let inner = CompactInterval::new(lo + 1e-9 * (hi - lo), hi - 1e-9 * (hi - lo))?;
        let mut points = seminorm_points(&inner);
        points.push(x0);
        Ok(Self { points })
    }

    fn sample(&self, phi: &TestFn) -> Result<Vec<f64>> {
        let s = phi.support();
        self.points
            .iter()
            .map(|&y| match s {
                Some(s) if s.contains(y) => phi.value(y),
                _ => Ok(0.0),
            })
            .collect()
    }
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// A basic element `R` with `R(φ⃗_k) = fs(k)` for every grid `k`:
/// `R(φ⃗) = Σ_k χ_k(φ⃗(x₀) - φ⃗_k(x₀)) f_k`, each `χ_k` a bump of the sup
/// distance with radius `0.4 ×` the gap to the neighbouring norms.
pub fn section_f(fs: &SimplifiedRep, seq: &KernelSequence, x0: f64, k_grid: &[usize]) -> Result<BasicElement> {
    let domain = seq.domain().clone();
    if fs.domain() != &domain {
        return Err(Error::DomainMismatch(format!("{} vs {}", fs.domain(), domain)));
    }
    let profile = Profile::new(&domain, x0)?;
    let mut centers = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let s = profile.sample(&seq.get(k)?.at(x0)?)?;
        let norm = s.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        centers.push((k, s, norm));
    }
    for w in centers.windows(2) {
        if !(w[1].2 > w[0].2) {
            return Err(Error::NoSeparation { k: w[1].0 });
        }
    }
    let gaps: Vec<f64> = centers.windows(2).map(|w| w[1].2 - w[0].2).collect();
    let radii: Vec<f64> = (0..centers.len())
        .map(|i| {
            let left = if i > 0 { gaps[i - 1] } else { f64::INFINITY };
            let right = gaps.get(i).copied().unwrap_or(f64::INFINITY);
            0.4 * left.min(right)
        })
        .collect();
    let terms: Vec<(Vec<f64>, f64, SmoothFn)> = centers
        .into_iter()
        .zip(radii)
        .map(|((k, s, _), r)| Ok((s, r, fs.get(k)?)))
        .collect::<Result<_>>()?;
    let d = domain.clone();
    Ok(BasicElement::generic(&domain, move |kernel| {
        let s = profile.sample(&kernel.at(x0)?)?;
        let mut fired = Vec::new();
        for (c, r, f) in &terms {
            let t = sup_dist(&s, c) / r;
            if t < 1.0 {
                fired.push((bump_jets(t, 1.0, 0)[0], f));
            }
        }
        Ok(match fired.as_slice() {
            [] => SmoothFn::zero(d.clone()),
            [(w, f)] if *w == 1.0 => (*f).clone(),
            [(w, f)] => f.scale(*w),
            _ => return Err(Error::InvalidArgument("overlapping section bumps".into())),
        })
    }))
}
