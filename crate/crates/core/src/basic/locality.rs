use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BasicElement, Chain, LocalityTag, Node};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::kernel::{make_mollifier, DyadicCover, SmoothingKernel};
use crate::smooth::{Domain, SmoothFn, TestFn};
use crate::verdict::Verdict;

const PROBE_TOL: f64 = 1e-9;
const SAMPLE_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalityKind {
    /// kernels agreeing on an open set give results agreeing there
    Local,
    /// `R(φ⃗)(x)` depends only on `φ⃗(x)` and `x`
    PointLocal,
    /// `R(φ⃗)(x)` depends only on `φ⃗(x)`
    PointIndependent,
}

impl LocalityKind {
    /// The chain position this kind certifies.
    pub fn chain(self) -> Chain {
        match self {
            LocalityKind::Local => Chain::Loc,
            LocalityKind::PointLocal => Chain::Ploc,
            LocalityKind::PointIndependent => Chain::Pi,
        }
    }
}

impl fmt::Display for LocalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LocalityKind::Local => "local",
            LocalityKind::PointLocal => "point-local",
            LocalityKind::PointIndependent => "point-independent",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome {
    /// `Pass` when no counterexample turned up, `Fail` otherwise.
    pub verdict: Verdict,
    pub trials: usize,
    pub counterexample: Option<String>,
}

/// Window of the first component where random data is placed.
fn window(domain: &Domain) -> (f64, f64) {
    let c = domain.intervals()[0];
    let lo = if c.lo.is_finite() { c.lo } else { c.hi.min(2.0) - 4.0 };
    let hi = if c.hi.is_finite() { c.hi } else { lo + 4.0 };
    (lo, hi)
}

struct Sampler {
    rng: ChaCha8Rng,
    domain: Domain,
    lo: f64,
    w: f64,
}

impl Sampler {
    fn new(domain: &Domain, seed: u64) -> Self {
        let (lo, hi) = window(domain);
        Self { rng: ChaCha8Rng::seed_from_u64(seed), domain: domain.clone(), lo, w: hi - lo }
    }

    fn point(&mut self) -> f64 {
        self.lo + self.w * self.rng.gen_range(0.3..0.7)
    }

    fn test_fn(&mut self) -> Result<TestFn> {
        let c = self.lo + self.w * self.rng.gen_range(0.3..0.7);
        let r = self.w * self.rng.gen_range(0.1..0.25);
        Ok(TestFn::bump(c, r, &self.domain)?.scale(self.rng.gen_range(0.5..2.0)))
    }

    fn poly(&mut self) -> SmoothFn {
        let c: Vec<f64> = (0..3).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
        SmoothFn::polynomial(c, self.domain.clone())
    }

    fn kernel(&mut self) -> Result<SmoothingKernel> {
        match self.rng.gen_range(0..4) {
            0 => Ok(SmoothingKernel::constant(self.test_fn()?)),
            1 => Ok(SmoothingKernel::scaled(&self.poly(), &SmoothingKernel::constant(self.test_fn()?))),
            2 => {
                let rho = make_mollifier(1, 1.0)?;
                let k = [4.0, 8.0, 16.0][self.rng.gen_range(0..3)];
                SmoothingKernel::standard(&rho, k, &DyadicCover::standard(self.domain.clone()))
            }
            _ => {
                let a = SmoothingKernel::constant(self.test_fn()?);
                let b = SmoothingKernel::scaled(&self.poly(), &SmoothingKernel::constant(self.test_fn()?));
                a.add(&b)
            }
        }
    }
}

fn differ(a: f64, b: f64) -> bool {
    !((a - b).abs() <= PROBE_TOL * (1.0 + a.abs() + b.abs()))
}

fn shifted(x0: f64, domain: &Domain) -> SmoothFn {
    SmoothFn::polynomial(vec![-x0, 1.0], domain.clone())
}

/// Searches for a counterexample to the given locality property with
/// random kernel pairs built to agree where the property demands.
pub fn probe_locality(r: &BasicElement, kind: LocalityKind, trials: usize, seed: u64) -> Result<ProbeOutcome> {
    let domain = r.domain().clone();
    let mut s = Sampler::new(&domain, seed);
    for t in 0..trials {
        let x0 = s.point();
        let found = match kind {
            LocalityKind::Local => {
                let w0 = 0.05 * s.w;
                let phi = s.kernel()?;
                let bump = SmoothFn::plateau(x0 - 2.0 * w0, x0 - w0, x0 + w0, x0 + 2.0 * w0)?;
                let eta = SmoothFn::constant(1.0, Domain::real_line()).sub(&bump)?.with_domain(domain.clone());
                let psi = phi.add(&SmoothingKernel::scaled(&eta, &s.kernel()?))?;
                let (a, b) = (r.eval(&phi)?, r.eval(&psi)?);
                let mut hit = None;
                for i in 0..5 {
                    let x = x0 + w0 * 0.8 * (i as f64 / 2.0 - 1.0);
                    let (va, vb) = (a.value(x)?, b.value(x)?);
                    if differ(va, vb) {
                        hit = Some(format!("kernels agree on ({}, {}) but values at {x} are {va:e} and {vb:e}", x0 - w0, x0 + w0));
                        break;
                    }
                }
                hit
            }
            LocalityKind::PointLocal => {
                let phi = s.kernel()?;
                let g = shifted(x0, &domain).scale(s.rng.gen_range(0.5..2.0));
                let psi = phi.add(&SmoothingKernel::scaled(&g, &s.kernel()?))?;
                let (va, vb) = (r.eval(&phi)?.value(x0)?, r.eval(&psi)?.value(x0)?);
                differ(va, vb).then(|| format!("kernels agree at {x0} but values are {va:e} and {vb:e}"))
            }
            LocalityKind::PointIndependent => {
                let y0 = s.point();
                let base = SmoothingKernel::constant(s.test_fn()?);
                let phi = base.add(&SmoothingKernel::scaled(&shifted(x0, &domain), &s.kernel()?))?;
                let psi = base.add(&SmoothingKernel::scaled(&shifted(y0, &domain), &s.kernel()?))?;
                let (va, vb) = (r.eval(&phi)?.value(x0)?, r.eval(&psi)?.value(y0)?);
                differ(va, vb).then(|| format!("φ⃗({x0}) = ψ⃗({y0}) but values are {va:e} and {vb:e}"))
            }
        };
        if let Some(msg) = found {
            return Ok(ProbeOutcome { verdict: Verdict::Fail, trials: t + 1, counterexample: Some(msg) });
        }
    }
    Ok(ProbeOutcome { verdict: Verdict::Pass, trials, counterexample: None })
}

type TestMap<T> = Arc<dyn Fn(&TestFn) -> Result<T> + Send + Sync>;
type FieldMap = Arc<dyn Fn(f64, &TestFn) -> Result<f64> + Send + Sync>;

/// The concrete object a point-local element corresponds to.
#[derive(Clone)]
pub enum Reified {
    /// `S: D → C∞` with `R(φ⃗)(x) = S(φ⃗(x))(x)`
    PointLocal(TestMap<SmoothFn>),
    /// `S: D → ℝ` with `R(φ⃗)(x) = S(φ⃗(x))`
    PointIndependent(TestMap<f64>),
    /// `x ↦ S_x ∈ D'` with `R(φ⃗)(x) = ⟨S_x, φ⃗(x)⟩`
    DistributionField(FieldMap),
    /// `S ∈ D'`; `exact` holds the distribution when it is known in closed form
    Distribution { functional: TestMap<f64>, exact: Option<Distribution> },
}

impl fmt::Debug for Reified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reified::PointLocal(_) => f.write_str("PointLocal"),
            Reified::PointIndependent(_) => f.write_str("PointIndependent"),
            Reified::DistributionField(_) => f.write_str("DistributionField"),
            Reified::Distribution { exact, .. } => write!(f, "Distribution(exact: {})", exact.is_some()),
        }
    }
}

fn reference_point(domain: &Domain) -> f64 {
    let (lo, hi) = window(domain);
    0.5 * (lo + hi)
}

fn exact_distribution(r: &BasicElement) -> Option<Distribution> {
    match r.node() {
        Node::Iota(u) => Some(u.clone()),
        Node::Sum(a, b) => exact_distribution(a)?.add(&exact_distribution(b)?).ok(),
        Node::SmoothScale(c, a) => Some(exact_distribution(a)?.scale(c.constant_value()?)),
        Node::Sigma(f) if f.constant_value() == Some(0.0) => Some(Distribution::zero(f.domain().clone())),
        _ => None,
    }
}

/// Passes from a point-local element to the map on test functions it is
/// built from, using the constant kernel `φ̃`.
pub fn reify(r: &BasicElement) -> Result<Reified> {
    let tag = r.tag();
    if tag.chain < Chain::Ploc {
        return Err(Error::WrongTag(format!("reify needs a point-local element, got {tag}")));
    }
    let domain = r.domain().clone();
    let check = move |phi: &TestFn| {
        if phi.domain() != &domain {
            return Err(Error::DomainMismatch(format!("test function on {}", phi.domain())));
        }
        Ok(SmoothingKernel::constant(phi.clone()))
    };
    let x0 = reference_point(r.domain());
    let e = r.clone();
    Ok(match (tag.chain, tag.linear) {
        (Chain::Pi, true) => Reified::Distribution {
            exact: exact_distribution(r),
            functional: Arc::new(move |phi| e.eval(&check(phi)?)?.value(x0)),
        },
        (Chain::Pi, false) => Reified::PointIndependent(Arc::new(move |phi| e.eval(&check(phi)?)?.value(x0))),
        (_, true) => Reified::DistributionField(Arc::new(move |x, phi| e.eval(&check(phi)?)?.value(x))),
        (_, false) => Reified::PointLocal(Arc::new(move |phi| e.eval(&check(phi)?))),
    })
}

/// `x ↦ v(x)` with first and second derivatives from central differences.
fn sampled<V>(domain: &Domain, v: V) -> SmoothFn
where
    V: Fn(f64) -> Result<f64> + Send + Sync + 'static,
{
    SmoothFn::new(domain.clone(), 2, None, move |x, m| {
        let v0 = v(x)?;
        let mut out = vec![v0];
        if m >= 1 {
            let h = SAMPLE_STEP;
            let d = |h: f64| -> Result<f64> { Ok((v(x + h)? - v(x - h)?) / (2.0 * h)) };
            out.push((4.0 * d(h / 2.0)? - d(h)?) / 3.0);
        }
        if m >= 2 {
            let h = 10.0 * SAMPLE_STEP;
            out.push((v(x + h)? - 2.0 * v0 + v(x - h)?) / (h * h));
        }
        Ok(out)
    })
}

/// Inverse of `reify`: the element `φ⃗ ↦ (x ↦ S(φ⃗(x))(x))` on `domain`.
pub fn unreify(s: &Reified, domain: &Domain) -> BasicElement {
    let d = domain.clone();
    match s.clone() {
        Reified::Distribution { exact: Some(u), .. } => BasicElement::iota(&u),
        Reified::Distribution { functional, .. } => {
            BasicElement::generic_with_tag(domain, LocalityTag::new(Chain::Pi, true), move |k| {
                let (k, f) = (k.clone(), functional.clone());
                Ok(sampled(&d, move |x| f(&k.at(x)?)))
            })
        }
        Reified::PointIndependent(f) => {
            BasicElement::generic_with_tag(domain, LocalityTag::new(Chain::Pi, false), move |k| {
                let (k, f) = (k.clone(), f.clone());
                Ok(sampled(&d, move |x| f(&k.at(x)?)))
            })
        }
        Reified::DistributionField(f) => {
            BasicElement::generic_with_tag(domain, LocalityTag::new(Chain::Ploc, true), move |k| {
                let (k, f) = (k.clone(), f.clone());
                Ok(sampled(&d, move |x| f(x, &k.at(x)?)))
            })
        }
        Reified::PointLocal(f) => {
            BasicElement::generic_with_tag(domain, LocalityTag::new(Chain::Ploc, false), move |k| {
                let (k, f) = (k.clone(), f.clone());
                Ok(sampled(&d, move |x| f(&k.at(x)?)?.value(x)))
            })
        }
    }
}
