//! Asymptotic testing along kernel sequences: order fits, test-object
//! validation, moderateness, negligibility and association.

use std::fmt;

use rayon::prelude::*;

use crate::basic::BasicElement;
use crate::dist::{pair_with, probe_battery, Distribution};
use crate::error::{Error, Result};
use crate::kernel::{make_mollifier, standard_sequence, DyadicCover, KernelSequence, SmoothingKernel};
use crate::smooth::{seminorms, CompactInterval, Domain, SmoothFn, TestFn};
use crate::verdict::Verdict;

pub const DEFAULT_K_GRID: [usize; 5] = [8, 16, 32, 64, 128];
pub const SLOPE_TOL: f64 = 0.3;
/// For oracles with a slowly varying prefactor.
pub const SLOPE_TOL_LOOSE: f64 = 0.5;
/// Fitted growth beyond this is treated as runaway, not moderate.
pub const N_MAX: f64 = 40.0;
pub const CLAMP: f64 = 1e-300;
/// Values below this count as zero for convergence checks.
pub const ZERO_FLOOR: f64 = 1e-10;

/// Least-squares line through `(log₂ k, log₂ v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log₂ residuals.
    pub residual: f64,
    pub k_grid: Vec<usize>,
    pub values: Vec<f64>,
    /// How many values were at or below `CLAMP`.
    pub clamped: usize,
}

impl AsymptoticFit {
    /// Every value vanished.
    pub fn exact_zero(&self) -> bool {
        self.clamped == self.values.len()
    }

    pub fn below(&self, floor: f64) -> bool {
        self.values.iter().all(|v| *v < floor)
    }
}

impl fmt::Display for AsymptoticFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact_zero() {
            return f.write_str("exact zero");
        }
        write!(f, "slope {:.3} (rms {:.2e})", self.slope, self.residual)?;
        if self.clamped > 0 {
            write!(f, ", {} clamped", self.clamped)?;
        }
        Ok(())
    }
}

pub fn fit_order(values: &[(usize, f64)]) -> Result<AsymptoticFit> {
    if values.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: values.len() });
    }
    if values.windows(2).any(|w| w[0].0 >= w[1].0) || values[0].0 == 0 {
        return Err(Error::InvalidArgument("k must be positive and strictly increasing".into()));
    }
    if let Some((k, v)) = values.iter().find(|(_, v)| v.is_nan() || *v < 0.0) {
        return Err(Error::InvalidArgument(format!("value {v} at k = {k} is not a nonnegative number")));
    }
    let k_grid: Vec<usize> = values.iter().map(|p| p.0).collect();
    let raw: Vec<f64> = values.iter().map(|p| p.1).collect();
    let clamped = raw.iter().filter(|v| **v <= CLAMP).count();
    let done = |slope: f64, intercept: f64, residual: f64| AsymptoticFit {
        slope,
        intercept,
        residual,
        k_grid: k_grid.clone(),
        values: raw.clone(),
        clamped,
    };
    if clamped == raw.len() {
        return Ok(done(f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0));
    }
    if raw.iter().any(|v| v.is_infinite()) {
        return Ok(done(f64::INFINITY, f64::INFINITY, f64::INFINITY));
    }
    let xs: Vec<f64> = k_grid.iter().map(|k| (*k as f64).log2()).collect();
    let ys: Vec<f64> = raw.iter().map(|v| v.max(CLAMP).log2()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(done(slope, intercept, residual))
}

/// `p_{K,m}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seminorm {
    pub compact: CompactInterval,
    pub order: usize,
}

impl Seminorm {
    pub fn new(lo: f64, hi: f64, order: usize) -> Result<Self> {
        Ok(Self { compact: CompactInterval::new(lo, hi)?, order })
    }

    /// Identifier used in sweep tables; free of commas.
    pub fn id(&self) -> String {
        format!("K[{};{}]m{}", self.compact.lo, self.compact.hi, self.order)
    }

    pub fn apply(&self, f: &SmoothFn) -> Result<f64> {
        Ok(seminorms(f, &self.compact, self.order)?[self.order])
    }
}

impl fmt::Display for Seminorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// `f(k)` over the grid, computed in parallel and returned in grid order.
pub fn sweep<F>(k_grid: &[usize], f: F) -> Result<Vec<(usize, f64)>>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    k_grid.par_iter().map(|&k| Ok((k, f(k)?))).collect()
}

/// `k ↦ p(R(φ⃗_k))`.
pub fn seminorm_sweep(r: &BasicElement, seq: &KernelSequence, p: &Seminorm, k_grid: &[usize]) -> Result<AsymptoticFit> {
    fit_order(&sweep(k_grid, |k| p.apply(&r.eval(&seq.get(k)?)?))?)
}

/// `∫ g φ` with quadrature pieces no wider than `scale`.
pub fn weak_pairing(g: &SmoothFn, phi: &TestFn, scale: f64) -> Result<f64> {
    if let Some(c) = g.constant_value() {
        if c == 0.0 {
            return Ok(0.0);
        }
    }
    let hint = Some(scale).filter(|s| s.is_finite() && *s > 0.0);
    Ok(pair_with(&Distribution::regular(g.clone()), phi, hint)?.value)
}

/// `⟨R(φ⃗)·dx, φ⟩`.
pub fn pair_element(r: &BasicElement, kernel: &SmoothingKernel, phi: &TestFn) -> Result<f64> {
    let scale = phi.support().map(|s| kernel.feature_scale(s.midpoint())).unwrap_or(f64::INFINITY);
    weak_pairing(&r.eval(kernel)?, phi, scale)
}

/// `Ok(None)` for failures that make a single probe inconclusive.
fn soft<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NoConvergence { .. }) | Err(Error::Inconclusive(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// One fitted probe with its individual verdict.
#[derive(Debug, Clone)]
pub struct ProbeFit {
    pub label: String,
    pub fit: Option<AsymptoticFit>,
    pub verdict: Verdict,
}

impl ProbeFit {
    fn judged(label: String, fit: Option<AsymptoticFit>, ok: impl Fn(&AsymptoticFit) -> bool) -> Self {
        let verdict = match &fit {
            None => Verdict::Inconclusive,
            Some(f) => Verdict::from_bool(ok(f)),
        };
        Self { label, fit, verdict }
    }
}

fn combined(fits: &[ProbeFit]) -> Verdict {
    Verdict::all(fits.iter().map(|f| f.verdict))
}

/// The grade-`q` family: three mollifier radii times two covers.
pub fn standard_family(domain: &Domain, q: usize) -> Result<Vec<KernelSequence>> {
    let mut out = Vec::with_capacity(6);
    for radius in [0.75, 1.0, 1.25] {
        let rho = make_mollifier(q, radius)?;
        for beta in [0.125, 0.25] {
            let cover = DyadicCover::new(domain.clone(), beta)?;
            out.push(standard_sequence(domain, &rho, &cover)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TestObjectOptions {
    pub k_grid: Vec<usize>,
    pub compact: CompactInterval,
    pub m_max: usize,
    pub tol: f64,
}

impl TestObjectOptions {
    /// Default grid; `K` is the middle half of the first component.
    pub fn for_domain(domain: &Domain) -> Result<Self> {
        let c = domain.intervals()[0];
        let (lo, hi) = match (c.lo.is_finite(), c.hi.is_finite()) {
            (true, true) => (c.lo, c.hi),
            (true, false) => (c.lo, c.lo + 4.0),
            (false, true) => (c.hi - 4.0, c.hi),
            (false, false) => (-2.0, 2.0),
        };
        let (mid, q) = (0.5 * (lo + hi), 0.25 * (hi - lo));
        Ok(Self {
            k_grid: DEFAULT_K_GRID.to_vec(),
            compact: CompactInterval::new(mid - q, mid + q)?,
            m_max: 2,
            tol: SLOPE_TOL_LOOSE,
        })
    }
}

#[derive(Debug, Clone)]
pub struct TestObjectReport {
    pub q: usize,
    /// One fit per seminorm order, sup over the smooth battery.
    pub cond_i: Vec<ProbeFit>,
    /// Growth of `⟨u, φ⃗_k⟩` per distribution; the slope is the extracted `N`.
    pub cond_ii: Vec<ProbeFit>,
    /// Weak convergence `⟨⟨u, φ⃗_k⟩, φ⟩ → ⟨u, φ⟩` per `(u, φ)`.
    pub cond_iii: Vec<ProbeFit>,
    pub verdict: Verdict,
}

fn smooth_battery(domain: &Domain, q: usize) -> Vec<(String, SmoothFn)> {
    let mut out: Vec<(String, SmoothFn)> =
        (0..=q + 2).map(|d| (format!("x^{d}"), SmoothFn::monomial(d, domain.clone()))).collect();
    out.push(("sin".into(), SmoothFn::sin(domain.clone())));
    out.push(("exp".into(), SmoothFn::exp(domain.clone())));
    out
}

fn dist_battery(domain: &Domain, c: f64) -> Result<Vec<(String, Distribution)>> {
    Ok(vec![
        (format!("delta({c})"), Distribution::delta(c, domain.clone())?),
        (format!("ddelta({c};1)"), Distribution::delta_derivative(c, 1, domain.clone())?),
        (format!("H({c})"), Distribution::heaviside_at(c, domain.clone())?),
        ("sin".into(), Distribution::regular(SmoothFn::sin(domain.clone()))),
    ])
}

fn converged(f: &AsymptoticFit) -> bool {
    f.exact_zero() || f.below(ZERO_FLOOR) || f.slope <= -SLOPE_TOL
}

/// Checks the three test-object conditions of order `q` along `seq`.
pub fn validate_test_object(seq: &KernelSequence, q: usize, opts: &TestObjectOptions) -> Result<TestObjectReport> {
    let domain = seq.domain().clone();
    let k_grid = &opts.k_grid;
    let m_max = opts.m_max;

    // (i): sup_f p_{K,m}(⟨f dx, φ⃗_k⟩ - f), one row of orders per k
    let battery: Vec<BasicElement> = smooth_battery(&domain, q)
        .iter()
        .map(|(_, f)| BasicElement::iota(&Distribution::regular(f.clone())).sub(&BasicElement::sigma(f)))
        .collect::<Result<_>>()?;
    let rows: Vec<Option<Vec<f64>>> = k_grid
        .par_iter()
        .map(|&k| {
            let kernel = seq.get(k)?;
            let mut acc = vec![0.0f64; m_max + 1];
            for r in &battery {
                let Some(s) = soft(r.eval(&kernel).and_then(|g| seminorms(&g, &opts.compact, m_max)))? else {
                    return Ok(None);
                };
                for (a, v) in acc.iter_mut().zip(s) {
                    *a = a.max(v);
                }
            }
            Ok(Some(acc))
        })
        .collect::<Result<_>>()?;
    let target = -((q + 1) as f64) + opts.tol;
    let mut cond_i = Vec::new();
    for m in 0..=m_max {
        let vals: Option<Vec<(usize, f64)>> = k_grid.iter().zip(&rows).map(|(k, r)| r.as_ref().map(|r| (*k, r[m]))).collect();
        let fit = vals.map(|v| fit_order(&v)).transpose()?;
        cond_i.push(ProbeFit::judged(format!("smooth battery m={m}"), fit, |f| f.exact_zero() || f.slope <= target));
    }

    let c = opts.compact.midpoint();
    let dists = dist_battery(&domain, c)?;
    let p0 = Seminorm { compact: opts.compact, order: 0 };
    let mut cond_ii = Vec::new();
    for (name, u) in &dists {
        let r = BasicElement::iota(u);
        let fit = soft(seminorm_sweep(&r, seq, &p0, k_grid))?;
        cond_ii.push(ProbeFit::judged(format!("{name} {}", p0.id()), fit, |f| f.exact_zero() || f.slope <= N_MAX));
    }

    let phis: Vec<TestFn> = probe_battery(&domain)?.into_iter().skip(1).step_by(3).collect();
    let mut cond_iii = Vec::new();
    for (name, u) in &dists {
        let r = BasicElement::iota(u);
        for (j, phi) in phis.iter().enumerate() {
            let exact = pair_with(u, phi, None)?.value;
            let errs = soft(sweep(k_grid, |k| Ok((pair_element(&r, &seq.get(k)?, phi)? - exact).abs())))?;
            let fit = errs.map(|e| fit_order(&e)).transpose()?;
            cond_iii.push(ProbeFit::judged(format!("{name} vs phi{j}"), fit, converged));
        }
    }

    let verdict = Verdict::all([combined(&cond_i), combined(&cond_ii), combined(&cond_iii)]);
    Ok(TestObjectReport { q, cond_i, cond_ii, cond_iii, verdict })
}

/// Seminorms and grid for the classification sweeps.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub k_grid: Vec<usize>,
    pub seminorms: Vec<Seminorm>,
    pub tol: f64,
}

impl SweepOptions {
    pub fn new(seminorms: Vec<Seminorm>) -> Self {
        Self { k_grid: DEFAULT_K_GRID.to_vec(), seminorms, tol: SLOPE_TOL }
    }
}

/// Fits of every seminorm along one sequence, evaluating `R(φ⃗_k)` once per
/// `k` and each compact once up to the highest order asked for it.
pub fn seminorm_table(r: &BasicElement, seq: &KernelSequence, ps: &[Seminorm], k_grid: &[usize]) -> Result<Vec<Option<AsymptoticFit>>> {
    let mut compacts: Vec<(CompactInterval, usize)> = Vec::new();
    for p in ps {
        match compacts.iter_mut().find(|(c, _)| *c == p.compact) {
            Some((_, m)) => *m = (*m).max(p.order),
            None => compacts.push((p.compact, p.order)),
        }
    }
    let rows: Vec<Option<Vec<Vec<f64>>>> = k_grid
        .par_iter()
        .map(|&k| {
            let f = match soft(r.eval(&seq.get(k)?))? {
                Some(f) => f,
                None => return Ok(None),
            };
            let mut row = Vec::with_capacity(compacts.len());
            for (c, m) in &compacts {
                match soft(seminorms(&f, c, *m))? {
                    Some(v) => row.push(v),
                    None => return Ok(None),
                }
            }
            Ok(Some(row))
        })
        .collect::<Result<_>>()?;
    ps.iter()
        .map(|p| {
            let ci = compacts.iter().position(|(c, _)| *c == p.compact).expect("collected above");
            let vals: Option<Vec<(usize, f64)>> =
                k_grid.iter().zip(&rows).map(|(k, row)| row.as_ref().map(|row| (*k, row[ci][p.order]))).collect();
            vals.map(|v| fit_order(&v)).transpose()
        })
        .collect()
}

fn family_fits(r: &BasicElement, family: &[KernelSequence], opts: &SweepOptions) -> Result<Vec<(String, Option<AsymptoticFit>)>> {
    let mut out = Vec::new();
    for (i, seq) in family.iter().enumerate() {
        let fits = seminorm_table(r, seq, &opts.seminorms, &opts.k_grid)?;
        for (p, fit) in opts.seminorms.iter().zip(fits) {
            out.push((format!("seq{i} {}", p.id()), fit));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ModerateReport {
    pub verdict: Verdict,
    /// Largest fitted slope; zero when every fit vanished.
    pub n: f64,
    pub fits: Vec<ProbeFit>,
}

/// Moderate iff every fitted slope is finite and at most `N_MAX`.
pub fn is_moderate(r: &BasicElement, family: &[KernelSequence], opts: &SweepOptions) -> Result<ModerateReport> {
    let fits: Vec<ProbeFit> = family_fits(r, family, opts)?
        .into_iter()
        .map(|(l, f)| ProbeFit::judged(l, f, |f| f.exact_zero() || (f.slope.is_finite() && f.slope <= N_MAX)))
        .collect();
    let n = fits
        .iter()
        .filter_map(|f| f.fit.as_ref())
        .filter(|f| !f.exact_zero())
        .map(|f| f.slope)
        .fold(None, |a: Option<f64>, s| Some(a.map_or(s, |a| a.max(s))))
        .unwrap_or(0.0);
    Ok(ModerateReport { verdict: combined(&fits), n, fits })
}

#[derive(Debug, Clone)]
pub struct NegligibleReport {
    pub verdict: Verdict,
    /// Per requested decay `m`: the grade used and its fits.
    pub per_m: Vec<(usize, usize, Vec<ProbeFit>)>,
}

impl NegligibleReport {
    /// Largest slope seen for decay `m`.
    pub fn worst_slope(&self, m: usize) -> Option<f64> {
        let (_, _, fits) = self.per_m.iter().find(|(mm, _, _)| *mm == m)?;
        fits.iter().filter_map(|f| f.fit.as_ref()).map(|f| f.slope).reduce(f64::max)
    }
}

pub fn default_grade(m: usize) -> usize {
    m + 1
}

/// Negligible iff for every `m ≤ m_max` the grade-`q(m)` family shows
/// slopes `≤ -m + tol`. `family(q)` supplies the sequences of grade `q`.
pub fn is_negligible<F, G>(r: &BasicElement, family: F, grade: G, m_max: usize, opts: &SweepOptions) -> Result<NegligibleReport>
where
    F: Fn(usize) -> Result<Vec<KernelSequence>>,
    G: Fn(usize) -> usize,
{
    let mut per_m = Vec::new();
    let mut cache: Vec<(usize, Vec<(String, Option<AsymptoticFit>)>)> = Vec::new();
    for m in 0..=m_max {
        let q = grade(m);
        let raw = match cache.iter().find(|(qq, _)| *qq == q) {
            Some((_, f)) => f.clone(),
            None => {
                let f = family_fits(r, &family(q)?, opts)?;
                cache.push((q, f.clone()));
                f
            }
        };
        let target = -(m as f64) + opts.tol;
        let fits: Vec<ProbeFit> =
            raw.into_iter().map(|(l, f)| ProbeFit::judged(l, f, |f| f.exact_zero() || f.slope <= target)).collect();
        per_m.push((m, q, fits));
    }
    let verdict = Verdict::all(per_m.iter().map(|(_, _, f)| combined(f)));
    Ok(NegligibleReport { verdict, per_m })
}

#[derive(Debug, Clone)]
pub struct AssociationReport {
    pub verdict: Verdict,
    /// `k ↦ |⟨(R1 - R2)(φ⃗_k), φ⟩|` per battery function.
    pub rates: Vec<ProbeFit>,
}

/// `R1 ≈ R2` iff every pairing of the difference decays or vanishes.
pub fn associated(
    r1: &BasicElement,
    r2: &BasicElement,
    seq: &KernelSequence,
    probes: &[TestFn],
    k_grid: &[usize],
) -> Result<AssociationReport> {
    let diff = r1.sub(r2)?;
    let mut rates = Vec::new();
    for (j, phi) in probes.iter().enumerate() {
        let vals = soft(sweep(k_grid, |k| Ok(pair_element(&diff, &seq.get(k)?, phi)?.abs())))?;
        let fit = vals.map(|v| fit_order(&v)).transpose()?;
        rates.push(ProbeFit::judged(format!("phi{j}"), fit, converged));
    }
    Ok(AssociationReport { verdict: combined(&rates), rates })
}

#[derive(Debug, Clone)]
pub struct IotaSigmaReport {
    /// `Pass` iff `(ι u - σ f)(φ⃗_k) → 0` in every seminorm.
    pub verdict: Verdict,
    pub fits: Vec<ProbeFit>,
}

/// Tests `u = f` through decay of `(ι u - σ f)(φ⃗_k)`.
pub fn check_iota_sigma(u: &Distribution, f: &SmoothFn, seq: &KernelSequence, opts: &SweepOptions) -> Result<IotaSigmaReport> {
    let r = BasicElement::iota(u).sub(&BasicElement::sigma(f))?;
    let tol = opts.tol;
    let fits: Vec<ProbeFit> = family_fits(&r, std::slice::from_ref(seq), opts)?
        .into_iter()
        .map(|(l, fit)| ProbeFit::judged(l, fit, |f| f.exact_zero() || f.slope <= -tol))
        .collect();
    Ok(IotaSigmaReport { verdict: combined(&fits), fits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smooth::TestFn;

    fn dom() -> Domain {
        Domain::interval(-2.0, 2.0).unwrap()
    }

    fn std_seq(q: usize) -> KernelSequence {
        let rho = make_mollifier(q, 1.0).unwrap();
        standard_sequence(&dom(), &rho, &DyadicCover::standard(dom())).unwrap()
    }

    #[test]
    fn fit_examples() {
        let f = fit_order(&[(8, 64.0), (16, 256.0), (32, 1024.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && f.residual < 1e-12);
        assert_eq!(fit_order(&[(8, 3.0), (16, 3.0), (32, 3.0)]).unwrap().slope, 0.0);
        let v: Vec<(usize, f64)> = DEFAULT_K_GRID
            .iter()
            .map(|&k| (k, (k as f64).powi(-3) * (1.0 + 0.01 * (k as f64).sin())))
            .collect();
        assert!((fit_order(&v).unwrap().slope + 3.0).abs() < 0.05);
        assert!(matches!(fit_order(&[(8, 1.0), (16, 1.0)]), Err(Error::TooFewPoints { .. })));
        let z = fit_order(&[(8, 0.0), (16, 0.0), (32, 0.0)]).unwrap();
        assert!(z.exact_zero() && z.slope == f64::NEG_INFINITY);
    }

    #[test]
    fn delta_square_is_moderate_with_n_two() {
        let d = BasicElement::iota(&Distribution::delta(0.0, dom()).unwrap());
        let sq = d.mul(&d).unwrap();
        let opts = SweepOptions::new(vec![Seminorm::new(-0.5, 0.5, 0).unwrap()]);
        let rep = is_moderate(&sq, &[std_seq(1)], &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!((rep.n - 2.0).abs() < 0.2, "{}", rep.n);
        let s = BasicElement::sigma(&SmoothFn::sin(dom()));
        assert!(is_moderate(&s, &[std_seq(1)], &opts).unwrap().n.abs() < 1e-9);
    }

    #[test]
    fn runaway_growth_is_not_moderate() {
        let g = BasicElement::generic(&dom(), |k| {
            let c = k.support_radius(0.0)?;
            Ok(SmoothFn::constant((1.0 / c).exp(), k.domain().clone()))
        });
        let opts = SweepOptions::new(vec![Seminorm::new(-0.5, 0.5, 0).unwrap()]);
        assert_eq!(is_moderate(&g, &[std_seq(1)], &opts).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn negligibility_examples() {
        let opts = SweepOptions::new(vec![Seminorm::new(-0.5, 0.5, 0).unwrap()]);
        let fam = |q| Ok(vec![std_seq(q)]);
        let f = SmoothFn::sin(dom());
        let r = BasicElement::iota(&Distribution::regular(f.clone())).sub(&BasicElement::sigma(&f)).unwrap();
        let rep = is_negligible(&r, fam, default_grade, 3, &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{:?}", rep.per_m);
        let d = BasicElement::iota(&Distribution::delta(0.0, dom()).unwrap());
        assert_eq!(is_negligible(&d, fam, default_grade, 1, &opts).unwrap().verdict, Verdict::Fail);
        let z = BasicElement::zero(&dom());
        assert_eq!(is_negligible(&z, fam, default_grade, 3, &opts).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn association_examples() {
        let h = BasicElement::iota(&Distribution::heaviside(dom()).unwrap());
        let d = BasicElement::iota(&Distribution::delta(0.0, dom()).unwrap());
        let seq = std_seq(1);
        let probes: Vec<TestFn> = probe_battery(&dom()).unwrap().into_iter().step_by(4).collect();
        let grid = [8, 16, 32, 64];
        let sq = h.mul(&h).unwrap();
        assert_eq!(associated(&sq, &h, &seq, &probes, &grid).unwrap().verdict, Verdict::Pass);
        let hd = h.mul(&d).unwrap();
        assert_eq!(associated(&hd, &d.scale(0.5), &seq, &probes, &grid).unwrap().verdict, Verdict::Pass);
        let z = BasicElement::zero(&dom());
        assert_eq!(associated(&d, &z, &seq, &probes, &grid).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn iota_sigma_examples() {
        let opts = SweepOptions::new(vec![Seminorm::new(-0.5, 0.5, 0).unwrap(), Seminorm::new(-0.5, 0.5, 1).unwrap()]);
        let f = SmoothFn::sin(dom());
        let seq = std_seq(3);
        let yes = check_iota_sigma(&Distribution::regular(f.clone()), &f, &seq, &opts).unwrap();
        assert_eq!(yes.verdict, Verdict::Pass);
        let z = SmoothFn::zero(dom());
        let no = check_iota_sigma(&Distribution::delta(0.0, dom()).unwrap(), &z, &seq, &opts).unwrap();
        assert_eq!(no.verdict, Verdict::Fail);
        let zz = check_iota_sigma(&Distribution::zero(dom()), &z, &seq, &opts).unwrap();
        assert!(zz.fits.iter().all(|f| f.fit.as_ref().unwrap().exact_zero()));
    }

    #[test]
    fn validate_standard_and_constant() {
        let mut opts = TestObjectOptions::for_domain(&dom()).unwrap();
        opts.k_grid = vec![8, 16, 32, 64];
        let good = validate_test_object(&std_seq(3), 3, &opts).unwrap();
        assert_eq!(good.verdict, Verdict::Pass, "{:#?}", good.cond_i);
        let wrong = validate_test_object(&std_seq(1), 5, &opts).unwrap();
        assert_eq!(combined(&wrong.cond_i), Verdict::Fail);
        let phi = TestFn::bump(0.0, 1.0, &dom()).unwrap();
        let c = KernelSequence::constant(SmoothingKernel::constant(phi));
        let bad = validate_test_object(&c, 1, &opts).unwrap();
        assert_eq!(combined(&bad.cond_iii), Verdict::Fail);
    }
}
