use crate::error::{Error, Result};
use crate::jet;
use crate::smooth::{Domain, Interval, SmoothFn};

/// A locally finite cover of a domain by overlapping intervals that shrink
/// geometrically towards finite endpoints.
///
/// Each component gets centers `p_n`, `n ∈ ℤ`. Around `p_n`, measured in
/// units of the gap to the neighbouring center on each side, the bump
/// `b_n` is positive out to `0.5 + β`, the cover set reaches `γ` further,
/// the cutoff `ψ_n` is one up to another `γ` and vanishes at the
/// neighbouring centers; `γ = (0.5 - β) / 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicCover {
    domain: Domain,
    beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverPiece {
    pub component: usize,
    pub n: i64,
    pub p: f64,
    pub gl: f64,
    pub gr: f64,
    beta: f64,
}

pub const DEFAULT_OVERLAP: f64 = 0.125;

impl CoverPiece {
    fn gamma(&self) -> f64 {
        (0.5 - self.beta) / 3.0
    }

    fn at(&self, f: f64) -> Interval {
        Interval { lo: self.p - f * self.gl, hi: self.p + f * self.gr }
    }

    /// Where `b_n > 0`.
    pub fn positivity(&self) -> Interval {
        self.at(0.5 + self.beta)
    }

    /// The cover set `U_n`.
    pub fn set(&self) -> Interval {
        self.at(0.5 + self.beta + self.gamma())
    }

    /// Where `ψ_n ≡ 1`.
    pub fn plateau(&self) -> Interval {
        self.at(0.5 + self.beta + 2.0 * self.gamma())
    }

    /// Closure of `{ψ_n ≠ 0}`: the neighbouring centers.
    pub fn cutoff_support(&self) -> Interval {
        self.at(1.0)
    }

    pub fn bump(&self) -> SmoothFn {
        let (b, g) = (self.beta, self.p);
        SmoothFn::plateau(
            g - (0.5 + b) * self.gl,
            g - (0.5 - b) * self.gl,
            g + (0.5 - b) * self.gr,
            g + (0.5 + b) * self.gr,
        )
        .expect("ordered plateau")
    }

    pub fn cutoff(&self) -> SmoothFn {
        let (pl, s) = (self.plateau(), self.cutoff_support());
        SmoothFn::plateau(s.lo, pl.lo, pl.hi, s.hi).expect("ordered plateau")
    }
}

impl DyadicCover {
    pub fn new(domain: Domain, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 0.5) {
            return Err(Error::InvalidArgument(format!("overlap parameter {beta} not in (0, 0.5)")));
        }
        Ok(Self { domain, beta })
    }

    pub fn standard(domain: Domain) -> Self {
        Self { domain, beta: DEFAULT_OVERLAP }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn center(&self, comp: usize, n: i64) -> f64 {
        let c = self.domain.intervals()[comp];
        let p = |e: i64| 2f64.powi(e as i32);
        match (c.lo.is_finite(), c.hi.is_finite()) {
            (true, true) => {
                let (mid, l) = (0.5 * (c.lo + c.hi), 0.5 * (c.hi - c.lo));
                match n.cmp(&0) {
                    std::cmp::Ordering::Equal => mid,
                    std::cmp::Ordering::Greater => c.hi - l * p(-n),
                    std::cmp::Ordering::Less => c.lo + l * p(n),
                }
            }
            (true, false) => if n <= 0 { c.lo + p(n) } else { c.lo + 1.0 + n as f64 },
            (false, true) => if n >= 0 { c.hi - p(-n) } else { c.hi - 1.0 + n as f64 },
            (false, false) => n as f64,
        }
    }

    pub fn piece(&self, comp: usize, n: i64) -> CoverPiece {
        let p = self.center(comp, n);
        CoverPiece {
            component: comp,
            n,
            p,
            gl: p - self.center(comp, n - 1),
            gr: self.center(comp, n + 1) - p,
            beta: self.beta,
        }
    }

    /// Index `n` with `p_n ≤ x < p_(n+1)`.
    fn index(&self, comp: usize, x: f64) -> i64 {
        let c = self.domain.intervals()[comp];
        let guess = match (c.lo.is_finite(), c.hi.is_finite()) {
            (true, true) => {
                let (mid, l) = (0.5 * (c.lo + c.hi), 0.5 * (c.hi - c.lo));
                if x >= mid { (-((c.hi - x) / l).log2()).floor() } else { ((x - c.lo) / l).log2().floor() }
            }
            (true, false) => if x < c.lo + 1.0 { ((x - c.lo).log2()).floor() } else { (x - c.lo - 1.0).floor() },
            (false, true) => if x > c.hi - 1.0 { (-(c.hi - x).log2()).floor() } else { (x - c.hi + 1.0).floor() },
            (false, false) => x.floor(),
        };
        let mut n = if guess.is_finite() { guess.clamp(-2000.0, 2000.0) as i64 } else { 0 };
        while self.center(comp, n) > x {
            n -= 1;
        }
        while self.center(comp, n + 1) <= x {
            n += 1;
        }
        n
    }

    /// The pieces whose bump can be nonzero near `x`.
    pub fn active(&self, x: f64) -> Result<[CoverPiece; 2]> {
        let comp = self
            .domain
            .intervals()
            .iter()
            .position(|c| c.contains(x))
            .ok_or(Error::OutOfDomain { x })?;
        let n = self.index(comp, x);
        Ok([self.piece(comp, n), self.piece(comp, n + 1)])
    }

    /// Jets of `χ_n = b_n / Σ b` for the two active pieces at `x`.
    pub fn weights(&self, x: f64, m: usize) -> Result<[(CoverPiece, Vec<f64>); 2]> {
        let [a, b] = self.active(x)?;
        let ja = a.bump().jets(x, m)?;
        let jb = b.bump().jets(x, m)?;
        let zero = vec![0.0; m + 1];
        let mut one = zero.clone();
        one[0] = 1.0;
        if jb.iter().all(|v| *v == 0.0) {
            return Ok([(a, one), (b, zero)]);
        }
        if ja.iter().all(|v| *v == 0.0) {
            return Ok([(a, zero), (b, one)]);
        }
        let sum: Vec<f64> = ja.iter().zip(&jb).map(|(p, q)| p + q).collect();
        let s = jet::to_taylor(&sum);
        let wa = jet::from_taylor(&jet::taylor_div(&jet::to_taylor(&ja), &s));
        let wb = jet::from_taylor(&jet::taylor_div(&jet::to_taylor(&jb), &s));
        Ok([(a, wa), (b, wb)])
    }

    /// The piece whose cutoff plateau is widest around `x`.
    pub fn window(&self, x: f64) -> Result<CoverPiece> {
        let [a, b] = self.active(x)?;
        let margin = |p: &CoverPiece| {
            let pl = p.plateau();
            (x - pl.lo).min(pl.hi - x)
        };
        Ok(if margin(&a) >= margin(&b) { a } else { b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_and_nest() {
        let c = DyadicCover::standard(Domain::interval(-2.0, 2.0).unwrap());
        for i in 0..400 {
            let x = -1.999 + 3.998 * i as f64 / 399.0;
            let w = c.weights(x, 2).unwrap();
            let s: f64 = w.iter().map(|(_, v)| v[0]).sum();
            assert!((s - 1.0).abs() < 1e-13, "x={x}");
            for (p, v) in &w {
                if v[0] != 0.0 {
                    assert!(p.set().contains(x));
                    assert!(p.cutoff().is_one_on(x - 1e-9, x + 1e-9));
                }
                let cs = p.cutoff_support();
                assert!(-2.0 <= cs.lo && cs.hi <= 2.0);
            }
        }
    }

    #[test]
    fn geometry_of_centers() {
        let c = DyadicCover::standard(Domain::interval(-2.0, 2.0).unwrap());
        assert_eq!(c.piece(0, 0).p, 0.0);
        assert_eq!(c.piece(0, 1).p, 1.0);
        assert_eq!(c.piece(0, 2).p, 1.5);
        assert_eq!(c.piece(0, -1).p, -1.0);
        let r = DyadicCover::standard(Domain::real_line());
        assert_eq!(r.active(2.5).unwrap()[0].p, 2.0);
        let h = DyadicCover::standard(Domain::interval(0.0, f64::INFINITY).unwrap());
        let w = h.weights(0.3, 0).unwrap();
        assert!((w[0].1[0] + w[1].1[0] - 1.0).abs() < 1e-14);
    }
}
