use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::{DyadicCover, Mollifier, SmoothingKernel};
use crate::error::{Error, Result};
use crate::smooth::{
    partition_of_unity, CompactInterval, Domain, Interval, PartitionOfUnity, SmoothFn, VectorField,
};
use crate::verdict::Verdict;

type Gen = dyn Fn(usize) -> Result<SmoothingKernel> + Send + Sync;

/// `(φ⃗_k)_k`, generated lazily and memoized per `k`.
#[derive(Clone)]
pub struct KernelSequence {
    domain: Domain,
    gen: Arc<Gen>,
    memo: Arc<Mutex<BTreeMap<usize, SmoothingKernel>>>,
    pub grade: Option<usize>,
    pub localizing: Option<bool>,
}

impl fmt::Debug for KernelSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSequence")
            .field("domain", &self.domain)
            .field("grade", &self.grade)
            .field("localizing", &self.localizing)
            .finish()
    }
}

impl KernelSequence {
    pub fn new<F>(domain: Domain, gen: F) -> Self
    where
        F: Fn(usize) -> Result<SmoothingKernel> + Send + Sync + 'static,
    {
        Self { domain, gen: Arc::new(gen), memo: Arc::default(), grade: None, localizing: None }
    }

    pub fn with_grade(mut self, q: Option<usize>) -> Self {
        self.grade = q;
        self
    }

    pub fn with_localizing(mut self, l: Option<bool>) -> Self {
        self.localizing = l;
        self
    }

    /// `k ↦ φ⃗` for every `k`.
    pub fn constant(kernel: SmoothingKernel) -> Self {
        Self::new(kernel.domain().clone(), move |_| Ok(kernel.clone()))
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn get(&self, k: usize) -> Result<SmoothingKernel> {
        if k == 0 {
            return Err(Error::InvalidArgument("sequences start at k = 1".into()));
        }
        if let Some(v) = self.memo.lock().expect("memo poisoned").get(&k) {
            return Ok(v.clone());
        }
        let v = (self.gen)(k)?;
        Ok(self.memo.lock().expect("memo poisoned").entry(k).or_insert(v).clone())
    }

    /// Termwise map, keeping the grade.
    pub fn map<F>(&self, domain: Domain, f: F) -> Self
    where
        F: Fn(SmoothingKernel) -> Result<SmoothingKernel> + Send + Sync + 'static,
    {
        let me = self.clone();
        Self::new(domain, move |k| f(me.get(k)?)).with_grade(self.grade)
    }
}

/// `(ψ⃗_k)_k` with `ψ⃗_k(x) = Σ_n χ_n(x) ψ_n τ_x ρ̌_k`.
pub fn standard_sequence(domain: &Domain, rho: &Mollifier, cover: &DyadicCover) -> Result<KernelSequence> {
    if cover.domain() != domain {
        return Err(Error::CoverTooCoarse(format!("cover of {} used on {}", cover.domain(), domain)));
    }
    let (rho, cover) = (rho.clone(), cover.clone());
    let q = rho.q();
    Ok(KernelSequence::new(domain.clone(), move |k| SmoothingKernel::standard(&rho, k as f64, &cover))
        .with_grade(Some(q))
        .with_localizing(Some(true)))
}

/// `L^SK_X` applied termwise.
pub fn lie_kernel(x: &VectorField, kernel: &SmoothingKernel) -> SmoothingKernel {
    SmoothingKernel::lie(x, kernel)
}

pub fn lie_kernel_seq(x: &VectorField, seq: &KernelSequence) -> KernelSequence {
    let x = x.clone();
    seq.map(seq.domain.clone(), move |k| Ok(SmoothingKernel::lie(&x, &k)))
}

/// `ρ^SK_{V,U}` termwise: `x ↦ Σ_W χ_W(x) θ_W φ⃗_k(x)` over the dyadic cover
/// of `V`.
pub fn restrict_kernel_seq(seq: &KernelSequence, v: &Domain) -> Result<KernelSequence> {
    if !v.is_subset_of(&seq.domain) {
        return Err(Error::NotContained(v.to_string(), seq.domain.to_string()));
    }
    let cover = DyadicCover::standard(v.clone());
    Ok(seq
        .map(v.clone(), move |k| SmoothingKernel::localized(&cover, k))
        .with_localizing(seq.localizing))
}

/// `x ↦ Σ_λ χ_λ(x) φ⃗^λ_k(x)`. Overlaps are probed for eventual agreement
/// first.
pub fn glue_kernel_seqs(pieces: &[KernelSequence], pou: &PartitionOfUnity, k_grid: &[usize]) -> Result<KernelSequence> {
    if pieces.len() != pou.len() {
        return Err(Error::InvalidArgument(format!("{} pieces for {} cover sets", pieces.len(), pou.len())));
    }
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            let Some(ov) = pou.cover[i].intersect(&pou.cover[j]) else { continue };
            let probes = interior_probes(&ov, 3);
            let v = eventually_equal(&pieces[i], &pieces[j], &probes, k_grid)?;
            if !v.verdict.is_pass() {
                let x = v.failures().first().copied().unwrap_or(probes[0]);
                return Err(Error::IncompatiblePieces { x });
            }
        }
    }
    let pieces = pieces.to_vec();
    let pou2 = pou.clone();
    let localizing = pieces.iter().all(|p| p.localizing == Some(true));
    let grade = pieces.iter().map(|p| p.grade).min().flatten();
    Ok(KernelSequence::new(pou.union(), move |k| {
        let ks = pieces.iter().map(|p| p.get(k)).collect::<Result<Vec<_>>>()?;
        SmoothingKernel::glued(ks, &pou2)
    })
    .with_grade(grade)
    .with_localizing(localizing.then_some(true)))
}

/// Evenly spaced interior points of an open interval.
pub fn interior_probes(i: &Interval, n: usize) -> Vec<f64> {
    let (lo, hi) = finite(i);
    (1..=n).map(|j| lo + (hi - lo) * j as f64 / (n + 1) as f64).collect()
}

fn finite(i: &Interval) -> (f64, f64) {
    match (i.lo.is_finite(), i.hi.is_finite()) {
        (true, true) => (i.lo, i.hi),
        (true, false) => (i.lo, i.lo + 4.0),
        (false, true) => (i.hi - 4.0, i.hi),
        (false, false) => (-2.0, 2.0),
    }
}

/// A sequence on `U` that eventually equals `seq` on `W`: `χ · seq + (1 - χ)
/// · default` with `χ ≡ 1` near `W̄` and `supp χ ⋐ V`.
pub fn extend_kernel_seq(
    seq: &KernelSequence,
    w: &Interval,
    u: &Domain,
    rho: &Mollifier,
) -> Result<KernelSequence> {
    let v = seq.domain.clone();
    if !v.is_subset_of(u) {
        return Err(Error::BadNesting(format!("{v} is not inside {u}")));
    }
    if v == *u && Domain::new(vec![*w]).map(|d| d == v).unwrap_or(false) {
        return Ok(seq.clone());
    }
    let wbar = CompactInterval::new(w.lo, w.hi).map_err(|_| Error::BadNesting(format!("{w} is not bounded")))?;
    if !(w.is_bounded() && v.contains_compact(&wbar)) {
        return Err(Error::BadNesting(format!("closure of {w} is not a compact subset of {v}")));
    }
    let gap = v.distance_to_boundary(w.lo).min(v.distance_to_boundary(w.hi)).min(w.length());
    let d = gap / 2.0;
    let chi = SmoothFn::plateau(w.lo - d, w.lo - d / 2.0, w.hi + d / 2.0, w.hi + d)?.with_domain(u.clone());
    let one_minus = SmoothFn::constant(1.0, u.clone()).sub(&chi)?;
    let default = standard_sequence(u, rho, &DyadicCover::standard(u.clone()))?;
    let (s, u2) = (seq.clone(), u.clone());
    let grade = seq.grade.min(Some(rho.q())).or(seq.grade);
    Ok(KernelSequence::new(u.clone(), move |k| {
        let inner = SmoothingKernel::cutoff_extended(&chi, &s.get(k)?, &u2)?;
        let outer = SmoothingKernel::scaled(&one_minus, &default.get(k)?);
        inner.add(&outer)
    })
    .with_grade(grade)
    .with_localizing(seq.localizing))
}

/// Per-probe outcome of an eventual-equality search.
#[derive(Debug, Clone, PartialEq)]
pub struct EventualReport {
    pub verdict: Verdict,
    /// `(x, k₀, exact)` per probe; `k₀ = None` when no grid `k` works.
    pub probes: Vec<(f64, Option<usize>, bool)>,
}

impl EventualReport {
    pub fn failures(&self) -> Vec<f64> {
        self.probes.iter().filter(|p| p.1.is_none()).map(|p| p.0).collect()
    }

    pub fn max_k0(&self) -> Option<usize> {
        self.probes.iter().map(|p| p.1).collect::<Option<Vec<_>>>()?.into_iter().max()
    }
}

pub const EVENTUAL_TOL: f64 = 1e-12;
const NEIGHBOUR_POINTS: usize = 5;
const Y_POINTS: usize = 33;

fn neighbourhood(d: &Domain, x: f64) -> Vec<f64> {
    let h = (0.25 * d.distance_to_boundary(x)).min(1e-3);
    let n = NEIGHBOUR_POINTS as i64 / 2;
    (-n..=n).map(|i| x + h * i as f64 / n as f64).collect()
}

/// Tier 1: the germs agree structurally. Tier 2: values and first
/// x-derivatives agree to `EVENTUAL_TOL`, relative to their size, on a
/// y-grid.
fn kernels_agree(a: &SmoothingKernel, b: &SmoothingKernel, xs: &[f64]) -> Result<Option<bool>> {
    if xs.iter().all(|&x| a.same_germ(b, x)) {
        return Ok(Some(true));
    }
    for &x in xs {
        let r = a.support_radius(x)?.max(b.support_radius(x)?);
        for m in 0..=1 {
            let (ta, tb) = (a.jet(x, m)?, b.jet(x, m)?);
            for i in 0..Y_POINTS {
                let y = x - r + 2.0 * r * i as f64 / (Y_POINTS - 1) as f64;
                let (va, vb) = (ta.value(y)?, tb.value(y)?);
                if (va - vb).abs() > EVENTUAL_TOL * (1.0 + va.abs().max(vb.abs())) {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(false))
}

/// For each probe, the least grid `k₀` after which the two sequences agree
/// on a neighbourhood. Probes without one make the verdict inconclusive.
pub fn eventually_equal(s1: &KernelSequence, s2: &KernelSequence, probes: &[f64], k_grid: &[usize]) -> Result<EventualReport> {
    let mut out = Vec::with_capacity(probes.len());
    for &x in probes {
        let d = s1.domain.intersect(&s2.domain).ok_or_else(|| Error::DomainMismatch("disjoint domains".into()))?;
        let xs = neighbourhood(&d, x);
        let mut k0 = None;
        let mut exact = true;
        for &k in k_grid.iter().rev() {
            match kernels_agree(&s1.get(k)?, &s2.get(k)?, &xs)? {
                Some(e) => {
                    k0 = Some(k);
                    exact &= e;
                }
                None => break,
            }
        }
        out.push((x, k0, exact && k0.is_some()));
    }
    let verdict = if out.iter().all(|p| p.1.is_some()) { Verdict::Pass } else { Verdict::Inconclusive };
    Ok(EventualReport { verdict, probes: out })
}

/// Eventual equality of two sequences of smooth functions near probes,
/// comparing jets up to `m`.
pub fn eventually_equal_fns<F, G>(f: F, g: G, probes: &[f64], k_grid: &[usize], m: usize) -> Result<EventualReport>
where
    F: Fn(usize) -> Result<SmoothFn>,
    G: Fn(usize) -> Result<SmoothFn>,
{
    let mut out = Vec::with_capacity(probes.len());
    for &x in probes {
        let mut k0 = None;
        let mut exact = true;
        'k: for &k in k_grid.iter().rev() {
            let (a, b) = (f(k)?, g(k)?);
            let xs = neighbourhood(&a.domain().intersect(b.domain()).unwrap_or_else(|| a.domain().clone()), x);
            let mut all_exact = true;
            for &y in &xs {
                let (ja, jb) = (a.jets(y, m)?, b.jets(y, m)?);
                for (p, q) in ja.iter().zip(&jb) {
                    if p != q {
                        all_exact = false;
                        if (p - q).abs() > EVENTUAL_TOL * (1.0 + p.abs().max(q.abs())) {
                            break 'k;
                        }
                    }
                }
            }
            k0 = Some(k);
            exact &= all_exact;
        }
        out.push((x, k0, exact && k0.is_some()));
    }
    let verdict = if out.iter().all(|p| p.1.is_some()) { Verdict::Pass } else { Verdict::Inconclusive };
    Ok(EventualReport { verdict, probes: out })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizingReport {
    pub verdict: Verdict,
    /// `(x, r, k₀)` per probe and radius.
    pub witnesses: Vec<(f64, f64, Option<usize>)>,
}

/// Scans `k = 1..=k_max` for the least `k₀` with `support_radius ≤ r` near
/// every probe for all `k ≥ k₀`. A radius that has stopped shrinking at
/// `k_max` is a failure; one that is still shrinking is inconclusive.
pub fn is_localizing(seq: &KernelSequence, probes: &[f64], r_grid: &[f64], k_max: usize) -> Result<LocalizingReport> {
    let mut witnesses = Vec::new();
    let mut verdict = Verdict::Pass;
    for &x in probes {
        let xs = neighbourhood(&seq.domain, x);
        let mut radii = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let kern = seq.get(k)?;
            let mut r = 0.0f64;
            for &y in &xs {
                r = r.max(kern.support_radius(y)?);
            }
            radii.push(r);
        }
        for &r in r_grid {
            let mut k0 = None;
            for k in (1..=k_max).rev() {
                if radii[k - 1] <= r {
                    k0 = Some(k);
                } else {
                    break;
                }
            }
            if k0.is_none() {
                let last = radii[k_max - 1];
                let half = radii[(k_max / 2).max(1) - 1];
                verdict = verdict.and(if last < half { Verdict::Inconclusive } else { Verdict::Fail });
            }
            witnesses.push((x, r, k0));
        }
    }
    Ok(LocalizingReport { verdict, witnesses })
}

/// Restriction followed by gluing over a finite cover, for sheaf checks.
pub fn restrict_and_glue(seq: &KernelSequence, cover: &[Interval], k_grid: &[usize]) -> Result<KernelSequence> {
    let pou = partition_of_unity(cover)?;
    let pieces = cover
        .iter()
        .map(|c| restrict_kernel_seq(seq, &Domain::new(vec![*c])?))
        .collect::<Result<Vec<_>>>()?;
    glue_kernel_seqs(&pieces, &pou, k_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::make_mollifier;
    use crate::smooth::TestFn;

    const GRID: [usize; 5] = [8, 16, 32, 64, 128];

    fn dom() -> Domain {
        Domain::interval(-2.0, 2.0).unwrap()
    }

    fn std_seq() -> KernelSequence {
        let rho = make_mollifier(1, 1.0).unwrap();
        standard_sequence(&dom(), &rho, &DyadicCover::standard(dom())).unwrap()
    }

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn standard_is_localizing() {
        let r = is_localizing(&std_seq(), &[-1.0, 0.0, 0.5], &[0.5, 0.1, 0.02], 64).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        for (_, rr, k0) in &r.witnesses {
            assert_eq!(k0.unwrap(), (1.0 / rr).ceil() as usize);
        }
        let fat = KernelSequence::constant(SmoothingKernel::constant(TestFn::bump(0.0, 1.5, &dom()).unwrap()));
        let r = is_localizing(&fat, &[0.0], &[0.1], 32).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn restriction_to_same_domain_eventually_equal() {
        let s = std_seq();
        let r = restrict_kernel_seq(&s, &dom()).unwrap();
        let rep = eventually_equal(&s, &r, &[-1.2, 0.0, 0.9], &GRID).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.probes.iter().all(|p| p.2));
    }

    #[test]
    fn self_equal_from_first_k() {
        let s = std_seq();
        let rep = eventually_equal(&s, &s, &[0.0], &GRID).unwrap();
        assert_eq!(rep.probes[0].1, Some(8));
    }

    #[test]
    fn escaping_difference_is_inconclusive() {
        let s = std_seq();
        let phi = TestFn::bump(0.0, 0.5, &dom()).unwrap();
        let bumped = s.map(dom(), move |k| k.add(&SmoothingKernel::constant(phi.clone())));
        let rep = eventually_equal(&s, &bumped, &[0.0], &GRID).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn three_piece_round_trip() {
        let s = std_seq();
        let g = restrict_and_glue(&s, &[iv(-2.0, -0.3), iv(-0.7, 0.7), iv(0.3, 2.0)], &GRID).unwrap();
        let probes: Vec<f64> = (0..10).map(|i| -1.5 + 3.0 * i as f64 / 9.0).collect();
        let rep = eventually_equal(&s, &g, &probes, &GRID).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.max_k0().unwrap() <= 64);
    }

    #[test]
    fn extension_agrees_on_w() {
        let rho = make_mollifier(1, 1.0).unwrap();
        let v = Domain::interval(-1.0, 1.0).unwrap();
        let sv = standard_sequence(&v, &rho, &DyadicCover::standard(v.clone())).unwrap();
        let e = extend_kernel_seq(&sv, &iv(-0.5, 0.5), &dom(), &rho).unwrap();
        let back = restrict_kernel_seq(&e, &v).unwrap();
        let rep = eventually_equal(&sv, &back, &[-0.4, 0.0, 0.3], &GRID).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(matches!(
            extend_kernel_seq(&sv, &iv(-1.0, 0.5), &dom(), &rho),
            Err(Error::BadNesting(_))
        ));
    }
}
