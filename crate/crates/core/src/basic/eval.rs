use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{BasicElement, Node};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::kernel::{apply_split, smooth_apply, DyadicCover, SmoothingKernel};
use crate::smooth::{lie_smooth, Diffeo1D, Domain, LieMode, SmoothFn, DEFAULT_JET_CAP};

const FD_STEP: f64 = 1e-4;

/// A linear tree of `ι`, `σ`, sums and constant scalings, collapsed into
/// one distribution and one smooth offset.
struct Flat {
    u: Option<Distribution>,
    f: Option<SmoothFn>,
}

fn merge<T>(a: Option<T>, b: Option<T>, add: impl Fn(&T, &T) -> Result<T>) -> Result<Option<T>> {
    Ok(match (a, b) {
        (Some(x), Some(y)) => Some(add(&x, &y)?),
        (x, None) => x,
        (None, y) => y,
    })
}

fn flatten(e: &BasicElement) -> Result<Option<Flat>> {
    Ok(match e.node() {
        Node::Iota(u) => Some(Flat { u: Some(u.clone()), f: None }),
        Node::Sigma(f) => Some(Flat { u: None, f: Some(f.clone()) }),
        Node::Sum(a, b) => match (flatten(a)?, flatten(b)?) {
            (Some(x), Some(y)) => Some(Flat {
                u: merge(x.u, y.u, |p, q| p.add(q))?,
                f: merge(x.f, y.f, |p, q| p.add(q))?,
            }),
            _ => None,
        },
        Node::SmoothScale(c, a) => match (c.constant_value(), flatten(a)?) {
            (Some(c), Some(x)) => Some(Flat { u: x.u.map(|u| u.scale(c)), f: x.f.map(|f| f.scale(c)) }),
            _ => None,
        },
        _ => None,
    })
}

fn check_kernel(e: &BasicElement, kernel: &SmoothingKernel) -> Result<()> {
    if kernel.domain() != e.domain() {
        return Err(Error::DomainMismatch(format!("kernel on {} for element on {}", kernel.domain(), e.domain())));
    }
    Ok(())
}

/// `(⟨u, φ⃗⟩ lead + f) + ⟨u, φ⃗⟩ rest`, so that `ι f - σ f` cancels the
/// leading term exactly.
fn eval_flat(flat: Flat, kernel: &SmoothingKernel) -> SmoothFn {
    let k = kernel.clone();
    let domain = kernel.domain().clone();
    match (flat.u, flat.f) {
        (None, None) => SmoothFn::zero(domain),
        (None, Some(f)) => f,
        (Some(u), None) => smooth_apply(&k, &u),
        (Some(u), Some(f)) => SmoothFn::new(domain, DEFAULT_JET_CAP.min(f.cap()), None, move |x, m| {
            let s = apply_split(&k, &u, x, m)?;
            let fj = f.jets(x, m)?;
            Ok((0..=m).map(|j| (s.lead[j] + fj[j]) + s.rest[j]).collect())
        }),
    }
}

pub(super) fn eval(e: &BasicElement, kernel: &SmoothingKernel) -> Result<SmoothFn> {
    check_kernel(e, kernel)?;
    if let Some(flat) = flatten(e)? {
        return Ok(eval_flat(flat, kernel));
    }
    match e.node() {
        Node::Iota(u) => Ok(smooth_apply(kernel, u)),
        Node::Sigma(f) => Ok(f.clone()),
        Node::Sum(a, b) => eval(a, kernel)?.add(&eval(b, kernel)?),
        Node::Product(a, b) => eval(a, kernel)?.mul(&eval(b, kernel)?),
        Node::SmoothScale(f, a) => f.mul(&eval(a, kernel)?),
        Node::LieHat(x, a) => {
            let lk = SmoothingKernel::lie(x, kernel);
            let da = differential(a, kernel, &[lk])?;
            let la = lie_smooth(x, &eval(a, kernel)?, LieMode::Function)?;
            la.sub(&da)
        }
        Node::LieTilde(x, a) => lie_smooth(x, &eval(a, kernel)?, LieMode::Function),
        Node::Restrict { inner, cover } => {
            let (inner, kernel) = (inner.clone(), kernel.clone());
            windowed(e.domain(), cover, move |chi| {
                let ext = SmoothingKernel::cutoff_extended(chi, &kernel, inner.domain())?;
                eval(&inner, &ext)
            })
        }
        Node::Pushforward(mu, a) => {
            let pulled = SmoothingKernel::pulled(mu, kernel, false)?;
            push(mu, &eval(a, &pulled)?)
        }
        Node::Generic(g) => {
            let r = g(kernel)?;
            if r.domain() != e.domain() && !e.domain().is_subset_of(r.domain()) {
                return Err(Error::DomainMismatch(format!("generic result on {}", r.domain())));
            }
            Ok(r)
        }
    }
}

/// `g ∘ μ^{-1}` on the target of `μ`.
fn push(mu: &Diffeo1D, g: &SmoothFn) -> Result<SmoothFn> {
    if let Some(c) = g.constant_value() {
        return Ok(SmoothFn::constant(c, mu.target().clone()));
    }
    Ok(g.compose(&mu.inverse)?.with_domain(mu.target().clone()))
}

/// A function on `V` that at `x` uses the value computed for the cover
/// window containing `x`, one evaluation per window.
fn windowed<F>(v: &Domain, cover: &DyadicCover, per_window: F) -> Result<SmoothFn>
where
    F: Fn(&SmoothFn) -> Result<SmoothFn> + Send + Sync + 'static,
{
    let cover = cover.clone();
    let memo: Arc<Mutex<HashMap<(usize, i64), SmoothFn>>> = Arc::default();
    Ok(SmoothFn::new(v.clone(), DEFAULT_JET_CAP, None, move |x, m| {
        let piece = cover.window(x)?;
        let key = (piece.component, piece.n);
        let cached = memo.lock().expect("window memo").get(&key).cloned();
        let f = match cached {
            Some(f) => f,
            None => {
                let f = per_window(&piece.cutoff())?;
                memo.lock().expect("window memo").insert(key, f.clone());
                f
            }
        };
        f.jets(x, m)
    }))
}

fn vanishes(e: &BasicElement, n: usize) -> bool {
    match e.node() {
        Node::Sigma(_) => n >= 1,
        Node::Iota(_) => n >= 2,
        _ => false,
    }
}

fn kernel_sum(a: &SmoothingKernel, t: f64, b: &SmoothingKernel) -> Result<SmoothingKernel> {
    SmoothingKernel::linear_combination(vec![(1.0, a.clone()), (t, b.clone())])
}

fn combine(domain: &Domain, terms: Vec<(f64, SmoothFn)>) -> SmoothFn {
    let terms: Vec<(f64, SmoothFn)> =
        terms.into_iter().filter(|(c, f)| *c != 0.0 && f.constant_value() != Some(0.0)).collect();
    if terms.is_empty() {
        return SmoothFn::zero(domain.clone());
    }
    let cap = terms.iter().map(|(_, f)| f.cap()).min().unwrap_or(DEFAULT_JET_CAP);
    SmoothFn::new(domain.clone(), cap, None, move |x, m| {
        let mut out = vec![0.0; m + 1];
        for (c, f) in &terms {
            for (o, v) in out.iter_mut().zip(f.jets(x, m)?) {
                *o += c * v;
            }
        }
        Ok(out)
    })
}

pub(super) fn differential(e: &BasicElement, kernel: &SmoothingKernel, dirs: &[SmoothingKernel]) -> Result<SmoothFn> {
    check_kernel(e, kernel)?;
    for d in dirs {
        check_kernel(e, d)?;
    }
    let n = dirs.len();
    if n == 0 {
        return eval(e, kernel);
    }
    let zero = || SmoothFn::zero(e.domain().clone());
    if vanishes(e, n) {
        return Ok(zero());
    }
    match e.node() {
        Node::Iota(u) => Ok(smooth_apply(&dirs[0], u)),
        Node::Sigma(_) => Ok(zero()),
        Node::Sum(a, b) => differential(a, kernel, dirs)?.add(&differential(b, kernel, dirs)?),
        Node::SmoothScale(f, a) => f.mul(&differential(a, kernel, dirs)?),
        Node::Product(a, b) => {
            let mut terms = Vec::new();
            for mask in 0u32..(1 << n) {
                let (sa, sb): (Vec<_>, Vec<_>) = (0..n).partition(|i| mask & (1 << i) != 0);
                if vanishes(a, sa.len()) || vanishes(b, sb.len()) {
                    continue;
                }
                let pick = |s: &[usize]| s.iter().map(|&i| dirs[i].clone()).collect::<Vec<_>>();
                let fa = differential(a, kernel, &pick(&sa))?;
                let fb = differential(b, kernel, &pick(&sb))?;
                terms.push((1.0, fa.mul(&fb)?));
            }
            Ok(combine(e.domain(), terms))
        }
        Node::LieHat(x, a) => {
            // d^n of -dA(φ⃗)[Lφ⃗] + L(A(φ⃗)), using linearity of L^SK.
            let lk = SmoothingKernel::lie(x, kernel);
            let mut terms = Vec::new();
            let mut first = vec![lk];
            first.extend_from_slice(dirs);
            terms.push((-1.0, differential(a, kernel, &first)?));
            for i in 0..n {
                let mut d = dirs.to_vec();
                d[i] = SmoothingKernel::lie(x, &dirs[i]);
                terms.push((-1.0, differential(a, kernel, &d)?));
            }
            terms.push((1.0, lie_smooth(x, &differential(a, kernel, dirs)?, LieMode::Function)?));
            Ok(combine(e.domain(), terms))
        }
        Node::LieTilde(x, a) => lie_smooth(x, &differential(a, kernel, dirs)?, LieMode::Function),
        Node::Restrict { inner, cover } => {
            let (inner, kernel, dirs) = (inner.clone(), kernel.clone(), dirs.to_vec());
            windowed(e.domain(), cover, move |chi| {
                let ext = |k: &SmoothingKernel| SmoothingKernel::cutoff_extended(chi, k, inner.domain());
                let d: Vec<SmoothingKernel> = dirs.iter().map(ext).collect::<Result<_>>()?;
                differential(&inner, &ext(&kernel)?, &d)
            })
        }
        Node::Pushforward(mu, a) => {
            let pull = |k: &SmoothingKernel| SmoothingKernel::pulled(mu, k, false);
            let d: Vec<SmoothingKernel> = dirs.iter().map(pull).collect::<Result<_>>()?;
            push(mu, &differential(a, &pull(kernel)?, &d)?)
        }
        Node::Generic(_) => {
            // central differences along the last direction, Richardson-extrapolated
            let (last, rest) = dirs.split_last().expect("n >= 1");
            let at = |t: f64| differential(e, &kernel_sum(kernel, t, last)?, rest);
            let h = FD_STEP;
            let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(h / 2.0)?, at(-h / 2.0)?);
            let c1 = 1.0 / (2.0 * h);
            let c2 = 1.0 / h;
            Ok(combine(
                e.domain(),
                vec![(4.0 * c2 / 3.0, p2), (-4.0 * c2 / 3.0, m2), (-c1 / 3.0, p1), (c1 / 3.0, m1)],
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::make_mollifier;
    use crate::smooth::{TestFn, VectorField};

    fn dom() -> Domain {
        Domain::interval(-2.0, 2.0).unwrap()
    }

    fn std_kernel(k: f64) -> SmoothingKernel {
        let rho = make_mollifier(1, 1.0).unwrap();
        SmoothingKernel::standard(&rho, k, &DyadicCover::standard(dom())).unwrap()
    }

    fn delta() -> BasicElement {
        BasicElement::iota(&Distribution::delta(0.0, dom()).unwrap())
    }

    #[test]
    fn iota_minus_sigma_cancels_exactly_on_constants() {
        let f = SmoothFn::constant(2.5, dom());
        let r = BasicElement::iota(&Distribution::regular(f.clone())).sub(&BasicElement::sigma(&f)).unwrap();
        let v = r.eval(&std_kernel(32.0)).unwrap();
        for x in [-1.0, 0.0, 0.7] {
            assert_eq!(v.value(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn iota_minus_sigma_is_small_for_sin() {
        let f = SmoothFn::sin(dom());
        let r = BasicElement::iota(&Distribution::regular(f.clone())).sub(&BasicElement::sigma(&f)).unwrap();
        let v = r.eval(&std_kernel(32.0)).unwrap();
        // ρ of order 1: error O(k^-2)
        assert!(v.value(0.5).unwrap().abs() < 1e-3);
    }

    #[test]
    fn differential_of_square() {
        let d = delta();
        let sq = d.mul(&d).unwrap();
        let phi = std_kernel(8.0);
        let psi = SmoothingKernel::constant(TestFn::bump(0.1, 0.5, &dom()).unwrap());
        let ds = sq.differential(&phi, &[psi.clone()]).unwrap();
        for x in [-0.3, 0.0, 0.2] {
            let want = 2.0 * phi.at(x).unwrap().value(0.0).unwrap() * psi.at(x).unwrap().value(0.0).unwrap();
            assert!((ds.value(x).unwrap() - want).abs() < 1e-10);
        }
        let d2 = sq.differential(&phi, &[psi.clone(), psi.clone()]).unwrap();
        let p0 = psi.at(0.0).unwrap().value(0.0).unwrap();
        assert!((d2.value(0.0).unwrap() - 2.0 * p0 * p0).abs() < 1e-12);
        assert_eq!(sq.differential(&phi, &[psi.clone(), psi.clone(), psi]).unwrap().value(0.0).unwrap(), 0.0);
    }

    #[test]
    fn generic_differential_matches_structural() {
        let d = delta();
        let sq = d.mul(&d).unwrap();
        let dd = d.clone();
        let g = BasicElement::generic(&dom(), move |k| {
            let v = dd.eval(k)?;
            v.mul(&v)
        });
        let phi = std_kernel(4.0);
        let psi = SmoothingKernel::constant(TestFn::bump(0.0, 0.8, &dom()).unwrap());
        let a = sq.differential(&phi, &[psi.clone()]).unwrap().value(0.1).unwrap();
        let b = g.differential(&phi, &[psi]).unwrap().value(0.1).unwrap();
        assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{a} {b}");
    }

    #[test]
    fn lie_hat_of_delta_is_iota_of_derivative() {
        // L̂_∂ ιδ = ι(L_∂ δ), pointwise up to roundoff
        let x = VectorField::constant(1.0, dom());
        let lhs = delta().lie_hat(&x);
        let rhs = BasicElement::iota(&crate::dist::lie_dist(&x, &Distribution::delta(0.0, dom()).unwrap()).unwrap());
        let phi = std_kernel(16.0);
        let (a, b) = (lhs.eval(&phi).unwrap(), rhs.eval(&phi).unwrap());
        for p in [-0.05, -0.01, 0.0, 0.03] {
            let (va, vb) = (a.value(p).unwrap(), b.value(p).unwrap());
            assert!((va - vb).abs() < 1e-8 * (1.0 + vb.abs()), "x={p}: {va} {vb}");
        }
    }

    #[test]
    fn restriction_evaluates_through_windows() {
        let v = Domain::interval(-0.5, 1.0).unwrap();
        let d = delta();
        let r = d.mul(&d).unwrap().restrict(&v).unwrap();
        let rho = make_mollifier(1, 1.0).unwrap();
        let phi = SmoothingKernel::standard(&rho, 16.0, &DyadicCover::standard(v.clone())).unwrap();
        let val = r.eval(&phi).unwrap();
        for x in [-0.3, 0.0, 0.02, 0.8] {
            let p = phi.at(x).unwrap().value(0.0).unwrap();
            assert!((val.value(x).unwrap() - p * p).abs() < 1e-9 * (1.0 + p * p));
        }
    }

    #[test]
    fn pushforward_commutes_with_iota() {
        let mu = Diffeo1D::affine(1.0, 1.0, &dom()).unwrap();
        let u = Distribution::delta(0.0, dom()).unwrap();
        let lhs = BasicElement::iota(&u).pushforward(&mu).unwrap();
        let rhs = super::super::iota_pushforward(&mu, &u).unwrap();
        let t = mu.target().clone();
        let rho = make_mollifier(1, 1.0).unwrap();
        let phi = SmoothingKernel::standard(&rho, 8.0, &DyadicCover::standard(t)).unwrap();
        let (a, b) = (lhs.eval(&phi).unwrap(), rhs.eval(&phi).unwrap());
        for x in [0.5, 0.95, 1.0, 1.1] {
            assert!((a.value(x).unwrap() - b.value(x).unwrap()).abs() < 1e-9);
        }
    }
}
