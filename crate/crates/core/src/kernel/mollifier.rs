use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet;
use crate::smooth::quad::{gauss_legendre, integrate_with, QuadOptions};
use crate::smooth::{bump_jets, CompactInterval, Domain, SmoothFn, TestFn, DEFAULT_JET_CAP};

/// Highest derivative of `ρ` available; deltas of order `l` need `ρ^(l + j)`.
pub const MOLLIFIER_CAP: usize = 16;
const MAX_ORDER: usize = 8;
const OUTER_NODES: usize = 24;

/// `ρ = p · bump(0, R)` with `p` even, unit mass and vanishing moments
/// `1..=q`.
#[derive(Clone)]
pub struct Mollifier {
    inner: Arc<Inner>,
}

struct Inner {
    q: usize,
    radius: f64,
    coeffs: Vec<f64>,
    moments: Vec<f64>,
    base: TestFn,
    nodes: Vec<(f64, f64)>,
}

impl fmt::Debug for Mollifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mollifier")
            .field("q", &self.inner.q)
            .field("radius", &self.inner.radius)
            .field("coeffs", &self.inner.coeffs)
            .finish()
    }
}

impl PartialEq for Mollifier {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.q == other.inner.q && self.inner.radius == other.inner.radius)
    }
}

fn bump_moments(radius: f64, up_to: usize) -> Result<Vec<f64>> {
    let opts = QuadOptions { rel_tol: 1e-14, abs_tol: 0.0, ..Default::default() };
    (0..=up_to)
        .map(|n| {
            if n % 2 == 1 {
                return Ok(0.0);
            }
            let half = integrate_with(
                |s| Ok(s.powi(n as i32) * bump_jets(s / radius, radius, 0)[0]),
                0.0,
                radius,
                &opts,
            )?;
            Ok(2.0 * half.value)
        })
        .collect()
}

/// Gaussian elimination with partial pivoting; also returns a 1-norm
/// condition estimate from the explicit inverse.
fn solve_with_condition(a: &[Vec<f64>], b: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = b.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r.push(b[i]);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))?;
        if aug[piv][col] == 0.0 {
            return None;
        }
        aug.swap(col, piv);
        let p = aug[col][col];
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    let src = aug[col].clone();
                    for (v, s) in aug[r].iter_mut().zip(&src) {
                        *v -= f * s;
                    }
                }
            }
        }
    }
    let x: Vec<f64> = aug.iter().map(|r| r[2 * n]).collect();
    let norm1 = |m: &dyn Fn(usize, usize) -> f64| {
        (0..n).map(|j| (0..n).map(|i| m(i, j).abs()).sum::<f64>()).fold(0.0, f64::max)
    };
    let cond = norm1(&|i, j| a[i][j]) * norm1(&|i, j| aug[i][n + j]);
    Some((x, cond))
}

/// Builds the order-`q` mollifier of the given radius.
pub fn make_mollifier(q: usize, radius: f64) -> Result<Mollifier> {
    if q > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("mollifier order {q} exceeds {MAX_ORDER}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidRadius(radius));
    }
    let h = q / 2;
    let b = bump_moments(radius, 4 * h + MAX_ORDER + 2)?;
    let a: Vec<Vec<f64>> = (0..=h).map(|r| (0..=h).map(|i| b[2 * r + 2 * i]).collect()).collect();
    let mut rhs = vec![0.0; h + 1];
    rhs[0] = 1.0;
    let (coeffs, condition) =
        solve_with_condition(&a, &rhs).ok_or(Error::SingularMomentSystem { condition: f64::INFINITY })?;
    if !(condition < 1e13) {
        return Err(Error::SingularMomentSystem { condition });
    }
    let moments: Vec<f64> = (0..=DEFAULT_JET_CAP)
        .map(|j| {
            if j == 0 {
                1.0
            } else if j <= q || j % 2 == 1 {
                0.0
            } else {
                coeffs.iter().enumerate().map(|(i, c)| c * b[2 * i + j]).sum()
            }
        })
        .collect();
    let c2 = coeffs.clone();
    let support = CompactInterval::new(-radius, radius)?;
    let base_fn = SmoothFn::new(Domain::real_line(), MOLLIFIER_CAP, Some(support), move |s, m| {
        Ok(rho_jets_raw(&c2, radius, s, m))
    });
    let base = TestFn::new(base_fn)?;
    let (gx, gw) = gauss_legendre(OUTER_NODES);
    let mut nodes = Vec::with_capacity(2 * OUTER_NODES);
    for (lo, hi) in [(-radius, 0.0), (0.0, radius)] {
        let (c, w) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, wt) in gx.iter().zip(&gw) {
            let s = c + w * x;
            nodes.push((s, wt * w * rho_jets_raw(&coeffs, radius, s, 0)[0]));
        }
    }
    Ok(Mollifier { inner: Arc::new(Inner { q, radius, coeffs, moments, base, nodes }) })
}

fn rho_jets_raw(coeffs: &[f64], radius: f64, s: f64, m: usize) -> Vec<f64> {
    if s.abs() >= radius {
        return vec![0.0; m + 1];
    }
    // even polynomial p(s) = Σ c_i s^(2i)
    let mut full = vec![0.0; 2 * coeffs.len()];
    for (i, c) in coeffs.iter().enumerate() {
        full[2 * i] = *c;
    }
    let mut pj = Vec::with_capacity(m + 1);
    let mut poly = full;
    for _ in 0..=m {
        pj.push(poly.iter().rev().fold(0.0, |acc, a| acc * s + a));
        poly = poly.iter().enumerate().skip(1).map(|(i, a)| a * i as f64).collect();
        if poly.is_empty() {
            poly.push(0.0);
        }
    }
    jet::leibniz(&pj, &bump_jets(s / radius, radius, m))
}

impl Mollifier {
    pub fn q(&self) -> usize {
        self.inner.q
    }

    pub fn radius(&self) -> f64 {
        self.inner.radius
    }

    pub fn is_even(&self) -> bool {
        true
    }

    /// Coefficients of `p(s) = Σ c_i s^(2i)`.
    pub fn coefficients(&self) -> &[f64] {
        &self.inner.coeffs
    }

    pub fn base(&self) -> &TestFn {
        &self.inner.base
    }

    pub fn same_as(&self, other: &Mollifier) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    /// `[ρ(s), ..., ρ^(m)(s)]`.
    pub fn jets(&self, s: f64, m: usize) -> Result<Vec<f64>> {
        if m > MOLLIFIER_CAP {
            return Err(Error::JetCapExceeded { requested: m, cap: MOLLIFIER_CAP });
        }
        Ok(rho_jets_raw(&self.inner.coeffs, self.inner.radius, s, m))
    }

    pub fn value(&self, s: f64) -> f64 {
        rho_jets_raw(&self.inner.coeffs, self.inner.radius, s, 0)[0]
    }

    /// `∫ s^j ρ(s) ds` for `j ≤ 8`; exact zeros where the construction
    /// forces them.
    pub fn moment(&self, j: usize) -> f64 {
        self.inner.moments.get(j).copied().unwrap_or(f64::NAN)
    }

    /// Outer quadrature nodes `(s_i, w_i ρ(s_i))` over `[-R, R]`.
    pub(crate) fn weighted_nodes(&self) -> &[(f64, f64)] {
        &self.inner.nodes
    }

    /// `y ↦ k ρ(k y)` as a test function on the line.
    pub fn scaled(&self, k: f64) -> TestFn {
        let me = self.clone();
        let r = self.radius() / k;
        let f = SmoothFn::new(
            Domain::real_line(),
            MOLLIFIER_CAP,
            Some(CompactInterval { lo: -r, hi: r }),
            move |y, m| {
                let j = me.jets(k * y, m)?;
                Ok(j.iter().enumerate().map(|(i, v)| v * k.powi(i as i32 + 1)).collect())
            },
        );
        TestFn::trusted(f)
    }

    /// Derivatives `∂_x^a ∂_y^b` of `k ρ(k (x - y))`, for all `a + b ≤ n`,
    /// indexed by the total order: entry `t` is `k^(1+t) ρ^(t)(k(x-y))`;
    /// the caller applies the sign `(-1)^b`.
    pub fn translate_table(&self, k: f64, x: f64, y: f64, n: usize) -> Result<Vec<f64>> {
        let j = self.jets(k * (x - y), n)?;
        Ok(j.iter().enumerate().map(|(t, v)| v * k.powi(t as i32 + 1)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moment(m: &Mollifier, a: i32) -> f64 {
        let opts = QuadOptions { rel_tol: 1e-12, abs_tol: 1e-15, ..Default::default() };
        let r = m.radius();
        integrate_with(|s| Ok(s.powi(a) * m.value(s)), -r, r, &opts.breakpoints([0.0])).unwrap().value
    }

    #[test]
    fn moments_vanish() {
        for q in 0..=5 {
            let m = make_mollifier(q, 1.0).unwrap();
            assert!((moment(&m, 0) - 1.0).abs() < 1e-10, "q={q}");
            for a in 1..=q as i32 {
                assert!(moment(&m, a).abs() < 1e-8, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn moment_table_matches_quadrature() {
        let m = make_mollifier(3, 1.0).unwrap();
        for j in 4..=8 {
            assert!((m.moment(j) - moment(&m, j as i32)).abs() < 1e-12, "j={j}");
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(make_mollifier(1, 0.0), Err(Error::InvalidRadius(_))));
        assert!(make_mollifier(9, 1.0).is_err());
        assert!(make_mollifier(8, 1.0).is_ok());
    }

    #[test]
    fn scaled_has_unit_mass() {
        let m = make_mollifier(1, 1.0).unwrap();
        let s = m.scaled(16.0);
        let r = integrate_with(|y| s.value(y), -1.0 / 16.0, 1.0 / 16.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }
}
