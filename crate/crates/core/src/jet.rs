//! Truncated jet arithmetic.
//!
//! A jet of order `m` at a point is the vector `[f, f', ..., f^(m)]`. The
//! combinators here implement the Leibniz rule, Faà di Bruno's formula and a
//! few elementary series (reciprocal, exponential) exactly in floating point,
//! going through normalized Taylor coefficients `f^(j)/j!` internally.

/// `n!` as a float; exact for the small orders used here.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn to_taylor(derivs: &[f64]) -> Vec<f64> {
    derivs
        .iter()
        .enumerate()
        .map(|(j, d)| d / factorial(j))
        .collect()
}

pub fn from_taylor(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c * factorial(j))
        .collect()
}

/// Cauchy product of two Taylor series, truncated to `len` terms.
pub fn taylor_mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if *ai == 0.0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Reciprocal of a Taylor series with nonzero constant term.
pub fn taylor_recip(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut r = vec![0.0; n];
    if n == 0 {
        return r;
    }
    r[0] = 1.0 / a[0];
    for k in 1..n {
        let s: f64 = (1..=k).map(|j| a[j] * r[k - j]).sum();
        r[k] = -s * r[0];
    }
    r
}

/// Quotient `a / b` of Taylor series.
pub fn taylor_div(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    let mut q = vec![0.0; n];
    if n == 0 {
        return q;
    }
    for k in 0..n {
        let s: f64 = (1..=k).map(|j| b[j] * q[k - j]).sum();
        q[k] = (a[k] - s) / b[0];
    }
    q
}

/// `exp` of a Taylor series via `E' = a' E`.
pub fn taylor_exp(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut e = vec![0.0; n];
    if n == 0 {
        return e;
    }
    e[0] = a[0].exp();
    if e[0] == 0.0 {
        return e;
    }
    for k in 1..n {
        let s: f64 = (1..=k).map(|j| j as f64 * a[j] * e[k - j]).sum();
        e[k] = s / k as f64;
    }
    e
}

/// Leibniz rule on derivative vectors: derivatives of `f * g`.
pub fn leibniz(f: &[f64], g: &[f64]) -> Vec<f64> {
    let n = f.len().min(g.len());
    (0..n)
        .map(|k| (0..=k).map(|i| binomial(k, i) * f[i] * g[k - i]).sum())
        .collect()
}

/// Partial Bell coefficients: `table[m][j]` is the coefficient of
/// `F^(j)(g(x))` in `(F ∘ g)^(m)(x)`, given the derivatives of the inner map.
pub fn bell_table(inner: &[f64]) -> Vec<Vec<f64>> {
    let n = inner.len();
    // Δ(h) = g(x + h) - g(x) as a Taylor series without constant term.
    let mut delta = to_taylor(inner);
    if let Some(c) = delta.first_mut() {
        *c = 0.0;
    }
    let mut table = vec![vec![0.0; n]; n];
    let mut power = vec![0.0; n];
    if n > 0 {
        power[0] = 1.0;
    }
    for j in 0..n {
        // power = Δ^j; contributes Δ^j / j! to the composite series.
        for (m, row) in table.iter_mut().enumerate() {
            row[j] = power[m] / factorial(j) * factorial(m);
        }
        power = taylor_mul(&power, &delta, n);
    }
    table
}

/// Faà di Bruno: derivatives of `F ∘ g` from the derivatives of `F` at
/// `g(x)` and those of `g` at `x`.
pub fn compose(outer: &[f64], inner: &[f64]) -> Vec<f64> {
    let n = outer.len().min(inner.len());
    let table = bell_table(&inner[..n]);
    (0..n)
        .map(|m| (0..=m).map(|j| table[m][j] * outer[j]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_matches_square() {
        // f = x at x = 1: [1, 1, 0]
        let f = [1.0, 1.0, 0.0];
        assert_eq!(leibniz(&f, &f), vec![1.0, 2.0, 2.0]);
    }

    #[test]
    fn compose_sin_of_double() {
        // sin(2x) at 0, third derivative -8
        let inner = [0.0, 2.0, 0.0, 0.0];
        let outer = [0.0, 1.0, 0.0, -1.0];
        let d = compose(&outer, &inner);
        assert!((d[3] + 8.0).abs() < 1e-14);
        assert!((d[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exp_series_of_linear() {
        let e = taylor_exp(&[0.0, 1.0, 0.0, 0.0, 0.0]);
        for (k, c) in e.iter().enumerate() {
            assert!((c - 1.0 / factorial(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn recip_times_series_is_one() {
        let a = [2.0, 0.5, -1.0, 3.0];
        let r = taylor_recip(&a);
        let p = taylor_mul(&a, &r, 4);
        assert!((p[0] - 1.0).abs() < 1e-15);
        for c in &p[1..] {
            assert!(c.abs() < 1e-14);
        }
        let q = taylor_div(&a, &a);
        assert_eq!(q[0], 1.0);
        assert!(q[1..].iter().all(|c| c.abs() < 1e-15));
    }
}
