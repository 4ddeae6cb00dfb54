use super::{CompactInterval, Domain, SmoothFn};
use crate::error::{Error, Result};
use crate::jet;

/// An increasing diffeomorphism `μ: source → target` with both directions
/// available as jet-carrying functions.
#[derive(Debug, Clone)]
pub struct Diffeo1D {
    pub forward: SmoothFn,
    pub inverse: SmoothFn,
}

impl Diffeo1D {
    pub fn source(&self) -> &Domain {
        self.forward.domain()
    }

    pub fn target(&self) -> &Domain {
        self.inverse.domain()
    }

    pub fn identity(domain: Domain) -> Self {
        Self {
            forward: SmoothFn::identity(domain.clone()),
            inverse: SmoothFn::identity(domain),
        }
    }

    /// `x ↦ a x + b` with `a > 0`.
    pub fn affine(a: f64, b: f64, source: &Domain) -> Result<Self> {
        if !(a > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidArgument(format!("affine map needs a > 0, got {a}")));
        }
        let target = map_domain(source, |x| a * x + b)?;
        let d = Self {
            forward: SmoothFn::polynomial(vec![b, a], source.clone()),
            inverse: SmoothFn::polynomial(vec![-b / a, 1.0 / a], target),
        };
        d.check()?;
        Ok(d)
    }

    /// Builds the inverse numerically (bracketed Newton plus series
    /// reversion for the jets). `forward` must be increasing.
    pub fn from_forward(forward: SmoothFn) -> Result<Self> {
        let source = forward.domain().clone();
        let f = forward.clone();
        // endpoints of an open source are not in the domain; take the value
        // there if the formula allows it, else just inside
        let ext = f.clone().with_domain(Domain::real_line());
        let src0 = source.clone();
        let target = map_domain(&source, |x| {
            ext.value(x).unwrap_or_else(|_| {
                let h = 1e-12 * (1.0 + x.abs());
                let inside = if src0.contains(x + h) { x + h } else { x - h };
                f.value(inside).unwrap_or(f64::NAN)
            })
        })?;
        let f = forward.clone();
        let src = source.clone();
        let cap = forward.cap();
        let inverse = SmoothFn::new(target, cap, None, move |y, m| {
            let x0 = solve(&f, &src, y)?;
            let fj = f.jets(x0, m)?;
            Ok(invert_series(&fj, y, x0))
        });
        let d = Self { forward, inverse };
        d.check()?;
        Ok(d)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Diffeo1D) -> Result<Self> {
        Ok(Self {
            forward: self.forward.compose(&other.forward)?,
            inverse: other.inverse.compose(&self.inverse)?,
        })
    }

    /// Probes monotonicity and `μ ∘ μ⁻¹ = id` on a grid of the target.
    pub fn check(&self) -> Result<()> {
        for comp in self.target().intervals() {
            let (lo, hi) = finite_window(comp.lo, comp.hi);
            for i in 1..40 {
                let y = lo + (hi - lo) * i as f64 / 40.0;
                let x = self.inverse.value(y)?;
                let back = self.forward.value(x)?;
                if (back - y).abs() > 1e-10 * (1.0 + y.abs()) {
                    return Err(Error::InvalidArgument(format!("inverse mismatch at {y}")));
                }
                if self.forward.jet_eval(x, 1)? <= 0.0 {
                    return Err(Error::InvalidArgument(format!("not increasing at {x}")));
                }
            }
        }
        Ok(())
    }

    /// Image of a compact interval.
    pub fn image(&self, k: &CompactInterval) -> Result<CompactInterval> {
        CompactInterval::new(self.forward.value(k.lo)?, self.forward.value(k.hi)?)
    }

    /// Preimage of a compact interval of the target.
    pub fn preimage(&self, k: &CompactInterval) -> Result<CompactInterval> {
        CompactInterval::new(self.inverse.value(k.lo)?, self.inverse.value(k.hi)?)
    }
}

fn finite_window(lo: f64, hi: f64) -> (f64, f64) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo + 10.0),
        (false, true) => (hi - 10.0, hi),
        (false, false) => (-5.0, 5.0),
    }
}

fn map_domain(source: &Domain, f: impl Fn(f64) -> f64) -> Result<Domain> {
    let mut out = Vec::new();
    for i in source.intervals() {
        let lo = if i.lo.is_finite() { f(i.lo) } else { f64::NEG_INFINITY };
        let hi = if i.hi.is_finite() { f(i.hi) } else { f64::INFINITY };
        out.push(super::Interval::new(lo, hi)?);
    }
    Domain::new(out)
}

fn solve(f: &SmoothFn, source: &Domain, y: f64) -> Result<f64> {
    for comp in source.intervals() {
        let (mut lo, mut hi) = (comp.lo, comp.hi);
        // bracket inside the component
        let mut a = if lo.is_finite() { lo } else { -1.0 };
        let mut b = if hi.is_finite() { hi } else { 1.0 };
        let eval = |x: f64| -> Result<f64> {
            if source.contains(x) { f.value(x) } else if x <= comp.lo { Ok(f64::NEG_INFINITY) } else { Ok(f64::INFINITY) }
        };
        let mut grow = 1.0;
        while !lo.is_finite() && eval(a)? > y {
            grow *= 2.0;
            a = -grow;
            if grow > 1e12 {
                break;
            }
        }
        grow = 1.0;
        while !hi.is_finite() && eval(b)? < y {
            grow *= 2.0;
            b = grow;
            if grow > 1e12 {
                break;
            }
        }
        if !(eval(a)? <= y && y <= eval(b)?) {
            continue;
        }
        lo = a;
        hi = b;
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let v = eval(x)? - y;
            if v == 0.0 {
                return Ok(x);
            }
            if v < 0.0 { lo = x } else { hi = x }
            let d = if source.contains(x) { f.jet_eval(x, 1)? } else { 0.0 };
            let newton = if d > 0.0 { x - v / d } else { f64::NAN };
            x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (hi - lo).abs() < 1e-15 * (1.0 + x.abs()) || (v.abs() < 1e-15 * (1.0 + y.abs()) && d > 0.0) {
                return Ok(x);
            }
        }
        return Ok(x);
    }
    Err(Error::OutOfDomain { x: y })
}

/// Jets of the inverse at `y0 = f(x0)` from the jets of `f` at `x0`.
fn invert_series(fj: &[f64], _y0: f64, x0: f64) -> Vec<f64> {
    let n = fj.len();
    let a = jet::to_taylor(fj);
    let mut h = vec![0.0; n];
    if n > 1 {
        h[1] = 1.0 / a[1];
    }
    for _ in 0..n {
        let mut p = vec![0.0; n];
        let mut pw = h.clone();
        for ai in a.iter().take(n).skip(2) {
            pw = jet::taylor_mul(&pw, &h, n);
            for (pk, wk) in p.iter_mut().zip(&pw) {
                *pk += ai * wk;
            }
        }
        let mut next = vec![0.0; n];
        for j in 1..n {
            let t = if j == 1 { 1.0 } else { 0.0 };
            next[j] = (t - p[j]) / a[1];
        }
        h = next;
    }
    let mut out = jet::from_taylor(&h);
    out[0] = x0;
    out
}

/// Convenience: `x ↦ x + c x³` on the real line.
pub fn cubic_diffeo(c: f64) -> Result<Diffeo1D> {
    if c < 0.0 {
        return Err(Error::InvalidArgument("cubic coefficient must be nonnegative".into()));
    }
    Diffeo1D::from_forward(SmoothFn::polynomial(vec![0.0, 1.0, 0.0, c], Domain::real_line()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_round_trip() {
        let d = Diffeo1D::affine(2.0, 1.0, &Domain::interval(-2.0, 2.0).unwrap()).unwrap();
        assert_eq!(d.target(), &Domain::interval(-3.0, 5.0).unwrap());
        assert_eq!(d.inverse.value(1.0).unwrap(), 0.0);
        assert!(Diffeo1D::affine(-1.0, 0.0, &Domain::real_line()).is_err());
    }

    #[test]
    fn cubic_inverse_jets() {
        let d = cubic_diffeo(0.05).unwrap();
        let y = 0.7;
        let inv = d.inverse.jets(y, 3).unwrap();
        let h = 1e-4;
        let fd1 = (d.inverse.value(y + h).unwrap() - d.inverse.value(y - h).unwrap()) / (2.0 * h);
        assert!((inv[1] - fd1).abs() < 1e-8);
        let fd2 = (d.inverse.jet_eval(y + h, 1).unwrap() - d.inverse.jet_eval(y - h, 1).unwrap()) / (2.0 * h);
        assert!((inv[2] - fd2).abs() < 1e-7);
        let x = d.forward.value(inv[0]).unwrap();
        assert!((x - y).abs() < 1e-14);
    }

    #[test]
    fn composition_of_affine_maps() {
        let d = Domain::real_line();
        let mu = Diffeo1D::affine(2.0, 1.0, &d).unwrap();
        let nu = Diffeo1D::affine(0.5, -3.0, &d).unwrap();
        let c = mu.compose(&nu).unwrap();
        assert_eq!(c.forward.value(2.0).unwrap(), 2.0 * (0.5 * 2.0 - 3.0) + 1.0);
        assert!((c.inverse.value(c.forward.value(0.3).unwrap()).unwrap() - 0.3).abs() < 1e-14);
    }
}
