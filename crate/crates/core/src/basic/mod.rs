//! The basic space `E(Ω)`: maps from smoothing kernels to smooth functions,
//! kept as expression trees with a statically joined locality tag.

mod eval;
mod locality;

use std::fmt;
use std::sync::Arc;

use crate::dist::{pushforward_dist, Distribution};
use crate::error::{Error, Result};
use crate::kernel::{DyadicCover, SmoothingKernel};
use crate::smooth::{lie_smooth, Diffeo1D, Domain, LieMode, SmoothFn, VectorField};

pub use locality::{probe_locality, reify, unreify, LocalityKind, ProbeOutcome, Reified};

/// Position in the chain `E ⊇ E_loc ⊇ E_ploc ⊇ E_pi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Chain {
    E,
    Loc,
    Ploc,
    Pi,
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chain::E => "E",
            Chain::Loc => "E_loc",
            Chain::Ploc => "E_ploc",
            Chain::Pi => "E_pi",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalityTag {
    pub chain: Chain,
    pub linear: bool,
    pub cinf_linear: bool,
}

impl LocalityTag {
    /// C∞-linearity is read off as linear and point-local.
    pub fn new(chain: Chain, linear: bool) -> Self {
        Self { chain, linear, cinf_linear: linear && chain >= Chain::Ploc }
    }
}

impl fmt::Display for LocalityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.chain)?;
        if self.linear {
            f.write_str(if self.cinf_linear { ", C∞-linear" } else { ", linear" })?;
        }
        Ok(())
    }
}

pub(crate) type GenericEval = dyn Fn(&SmoothingKernel) -> Result<SmoothFn> + Send + Sync;

pub(crate) enum Node {
    Iota(Distribution),
    Sigma(SmoothFn),
    Sum(BasicElement, BasicElement),
    Product(BasicElement, BasicElement),
    SmoothScale(SmoothFn, BasicElement),
    LieHat(VectorField, BasicElement),
    LieTilde(VectorField, BasicElement),
    Restrict { inner: BasicElement, cover: DyadicCover },
    Pushforward(Diffeo1D, BasicElement),
    Generic(Arc<GenericEval>),
}

/// An element of `E(Ω)`.
#[derive(Clone)]
pub struct BasicElement {
    pub(crate) node: Arc<Node>,
    tag: LocalityTag,
    domain: Domain,
}

impl fmt::Debug for BasicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &*self.node {
            Node::Iota(_) => "Iota",
            Node::Sigma(_) => "Sigma",
            Node::Sum(..) => "Sum",
            Node::Product(..) => "Product",
            Node::SmoothScale(..) => "SmoothScale",
            Node::LieHat(..) => "LieHat",
            Node::LieTilde(..) => "LieTilde",
            Node::Restrict { .. } => "Restrict",
            Node::Pushforward(..) => "Pushforward",
            Node::Generic(_) => "Generic",
        };
        write!(f, "{name}[{}] on {}", self.tag, self.domain)
    }
}

fn same_domain(a: &Domain, b: &Domain) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::DomainMismatch(format!("{a} vs {b}")))
    }
}

impl BasicElement {
    fn wrap(node: Node, tag: LocalityTag, domain: Domain) -> Self {
        Self { node: Arc::new(node), tag, domain }
    }

    pub fn tag(&self) -> LocalityTag {
        self.tag
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `ι u: φ⃗ ↦ ⟨u, φ⃗⟩`.
    pub fn iota(u: &Distribution) -> Self {
        Self::wrap(Node::Iota(u.clone()), LocalityTag::new(Chain::Pi, true), u.domain().clone())
    }

    /// `σ f: φ⃗ ↦ f`. Constants are point-independent, and only zero is
    /// linear.
    pub fn sigma(f: &SmoothFn) -> Self {
        let tag = match f.constant_value() {
            Some(c) => LocalityTag::new(Chain::Pi, c == 0.0),
            None => LocalityTag::new(Chain::Ploc, false),
        };
        Self::wrap(Node::Sigma(f.clone()), tag, f.domain().clone())
    }

    pub fn zero(domain: &Domain) -> Self {
        Self::sigma(&SmoothFn::zero(domain.clone()))
    }

    pub fn constant(c: f64, domain: &Domain) -> Self {
        Self::sigma(&SmoothFn::constant(c, domain.clone()))
    }

    /// Arbitrary evaluator, tagged `E` and non-linear.
    pub fn generic<F>(domain: &Domain, eval: F) -> Self
    where
        F: Fn(&SmoothingKernel) -> Result<SmoothFn> + Send + Sync + 'static,
    {
        Self::generic_with_tag(domain, LocalityTag::new(Chain::E, false), eval)
    }

    /// Arbitrary evaluator with an asserted tag; `probe_locality` audits it.
    pub fn generic_with_tag<F>(domain: &Domain, tag: LocalityTag, eval: F) -> Self
    where
        F: Fn(&SmoothingKernel) -> Result<SmoothFn> + Send + Sync + 'static,
    {
        Self::wrap(Node::Generic(Arc::new(eval)), tag, domain.clone())
    }

    fn constant_sigma(&self) -> Option<f64> {
        match &*self.node {
            Node::Sigma(f) => f.constant_value(),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant_sigma() == Some(0.0)
    }

    pub fn add(&self, other: &BasicElement) -> Result<Self> {
        same_domain(&self.domain, &other.domain)?;
        let tag = LocalityTag::new(self.tag.chain.min(other.tag.chain), self.tag.linear && other.tag.linear);
        Ok(Self::wrap(Node::Sum(self.clone(), other.clone()), tag, self.domain.clone()))
    }

    pub fn sub(&self, other: &BasicElement) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &BasicElement) -> Result<Self> {
        same_domain(&self.domain, &other.domain)?;
        let linear = (self.constant_sigma().is_some() && other.tag.linear)
            || (other.constant_sigma().is_some() && self.tag.linear);
        let tag = LocalityTag::new(self.tag.chain.min(other.tag.chain), linear);
        Ok(Self::wrap(Node::Product(self.clone(), other.clone()), tag, self.domain.clone()))
    }

    /// `f · R`. A non-constant `f` loses point-independence.
    pub fn smooth_scale(&self, f: &SmoothFn) -> Result<Self> {
        same_domain(&self.domain, f.domain()).or_else(|_| {
            if f.domain().is_subset_of(&self.domain) || self.domain.is_subset_of(f.domain()) {
                Ok(())
            } else {
                Err(Error::DomainMismatch(format!("{} vs {}", self.domain, f.domain())))
            }
        })?;
        let chain = if f.constant_value().is_some() { self.tag.chain } else { self.tag.chain.min(Chain::Ploc) };
        let tag = LocalityTag::new(chain, self.tag.linear);
        Ok(Self::wrap(Node::SmoothScale(f.clone(), self.clone()), tag, self.domain.clone()))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.smooth_scale(&SmoothFn::constant(c, self.domain.clone())).expect("same domain")
    }

    /// `L̂_X R (φ⃗) = -dR(φ⃗)(L^SK_X φ⃗) + L_X(R(φ⃗))`.
    pub fn lie_hat(&self, x: &VectorField) -> Self {
        Self::wrap(Node::LieHat(x.clone(), self.clone()), self.tag, self.domain.clone())
    }

    /// `L̃_X R = L_X ∘ R`.
    pub fn lie_tilde(&self, x: &VectorField) -> Self {
        let tag = LocalityTag::new(self.tag.chain.min(Chain::Loc), self.tag.linear);
        Self::wrap(Node::LieTilde(x.clone(), self.clone()), tag, self.domain.clone())
    }

    /// `R|_V` for local `R`.
    pub fn restrict(&self, v: &Domain) -> Result<Self> {
        if self.tag.chain < Chain::Loc {
            return Err(Error::NotLocal);
        }
        if !v.is_subset_of(&self.domain) {
            return Err(Error::NotContained(v.to_string(), self.domain.to_string()));
        }
        let node = Node::Restrict { inner: self.clone(), cover: DyadicCover::standard(v.clone()) };
        Ok(Self::wrap(node, self.tag, v.clone()))
    }

    /// `(μ_* R)(φ⃗) = μ_*(R(μ^* ∘ φ⃗ ∘ μ))`.
    pub fn pushforward(&self, mu: &Diffeo1D) -> Result<Self> {
        same_domain(&self.domain, mu.source())?;
        Ok(Self::wrap(Node::Pushforward(mu.clone(), self.clone()), self.tag, mu.target().clone()))
    }

    /// The same element with its tag replaced, for asserting properties
    /// the tag algebra cannot see.
    pub fn with_tag(&self, tag: LocalityTag) -> Self {
        Self { tag, ..self.clone() }
    }

    /// `R(φ⃗)`.
    pub fn eval(&self, kernel: &SmoothingKernel) -> Result<SmoothFn> {
        eval::eval(self, kernel)
    }

    /// `d^n R(φ⃗)[ψ⃗_1, …, ψ⃗_n]`.
    pub fn differential(&self, kernel: &SmoothingKernel, dirs: &[SmoothingKernel]) -> Result<SmoothFn> {
        eval::differential(self, kernel, dirs)
    }

    /// The distribution `u` if this is `ι u`.
    pub fn as_iota(&self) -> Option<&Distribution> {
        match &*self.node {
            Node::Iota(u) => Some(u),
            _ => None,
        }
    }

    /// The function `f` if this is `σ f`.
    pub fn as_sigma(&self) -> Option<&SmoothFn> {
        match &*self.node {
            Node::Sigma(f) => Some(f),
            _ => None,
        }
    }

    pub(crate) fn node(&self) -> &Node {
        &self.node
    }

    /// Children in evaluation order, for printers and walkers.
    pub fn children(&self) -> Vec<&BasicElement> {
        match &*self.node {
            Node::Sum(a, b) | Node::Product(a, b) => vec![a, b],
            Node::SmoothScale(_, a)
            | Node::LieHat(_, a)
            | Node::LieTilde(_, a)
            | Node::Pushforward(_, a)
            | Node::Restrict { inner: a, .. } => vec![a],
            _ => vec![],
        }
    }
}

/// `ι` commutes with `L̂`: convenience for `ι(L̂_X u)`.
pub fn iota_lie(x: &VectorField, u: &Distribution) -> Result<BasicElement> {
    Ok(BasicElement::iota(&crate::dist::lie_dist(x, u)?))
}

/// `σ(L_X f)`.
pub fn sigma_lie(x: &VectorField, f: &SmoothFn) -> Result<BasicElement> {
    Ok(BasicElement::sigma(&lie_smooth(x, f, LieMode::Function)?))
}

/// `ι(μ_* u)`.
pub fn iota_pushforward(mu: &Diffeo1D, u: &Distribution) -> Result<BasicElement> {
    Ok(BasicElement::iota(&pushforward_dist(mu, u)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom() -> Domain {
        Domain::interval(-2.0, 2.0).unwrap()
    }

    #[test]
    fn tag_rules() {
        let d = Distribution::delta(0.0, dom()).unwrap();
        let i = BasicElement::iota(&d);
        assert_eq!(i.tag().chain, Chain::Pi);
        assert!(i.tag().linear);
        let p = i.mul(&i).unwrap();
        assert_eq!(p.tag().chain, Chain::Pi);
        assert!(!p.tag().linear);
        let s = i.smooth_scale(&SmoothFn::identity(dom())).unwrap();
        assert_eq!(s.tag().chain, Chain::Ploc);
        assert!(s.tag().linear && s.tag().cinf_linear);
        let z = i.add(&BasicElement::zero(&dom())).unwrap();
        assert_eq!(z.tag(), i.tag());
        let sf = BasicElement::sigma(&SmoothFn::sin(dom()));
        assert_eq!(sf.tag(), LocalityTag::new(Chain::Ploc, false));
        let lt = i.lie_tilde(&VectorField::constant(1.0, dom()));
        assert_eq!(lt.tag().chain, Chain::Loc);
        assert_eq!(i.lie_hat(&VectorField::constant(1.0, dom())).tag(), i.tag());
        let g = BasicElement::generic(&dom(), |k| Ok(SmoothFn::zero(k.domain().clone())));
        assert_eq!(g.tag().chain, Chain::E);
        assert!(matches!(g.restrict(&dom()), Err(Error::NotLocal)));
    }
}
