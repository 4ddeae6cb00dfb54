//! Acceptance criteria 1-10 on the default configuration. Prints one line
//! per criterion and fails if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use gfkernel::basic::{iota_pushforward, BasicElement};
use gfkernel::dist::{probe_battery, Distribution};
use gfkernel::kernel::{
    eventually_equal, interior_probes, make_mollifier, restrict_and_glue, restrict_kernel_seq, standard_sequence,
    DyadicCover, KernelSequence, SmoothingKernel,
};
use gfkernel::simplified::{classify_basic, classify_s, iota_s, pullback_f, section_f, sigma_s, SimplifiedRep};
use gfkernel::smooth::quad::gauss_legendre;
use gfkernel::smooth::{Diffeo1D, Domain, Interval, SmoothFn, TestFn, VectorField};
use gfkernel::testing::{
    associated, default_grade, fit_order, is_moderate, is_negligible, pair_element, seminorm_table,
    standard_family, validate_test_object, Seminorm, SweepOptions, TestObjectOptions, DEFAULT_K_GRID,
};
use gfkernel::{Result, Verdict};

const GRID: [usize; 5] = DEFAULT_K_GRID;

fn dom() -> Domain {
    Domain::interval(-2.0, 2.0).unwrap()
}

fn seq(q: usize) -> Result<KernelSequence> {
    standard_sequence(&dom(), &make_mollifier(q, 1.0)?, &DyadicCover::standard(dom()))
}

fn delta(a: f64) -> Result<BasicElement> {
    Ok(BasicElement::iota(&Distribution::delta(a, dom())?))
}

fn sin_gap() -> Result<BasicElement> {
    let s = SmoothFn::sin(dom());
    BasicElement::iota(&Distribution::regular(s.clone())).sub(&BasicElement::sigma(&s))
}

fn p0() -> Seminorm {
    Seminorm::new(-0.5, 0.5, 0).unwrap()
}

fn slope(r: &BasicElement, s: &KernelSequence, p: &Seminorm) -> Result<f64> {
    let fit = seminorm_table(r, s, std::slice::from_ref(p), &GRID)?.pop().flatten();
    Ok(fit.map_or(f64::NAN, |f| f.slope))
}

/// Bumps of the battery nearest the origin.
fn near_origin(n: usize) -> Result<Vec<TestFn>> {
    let mut b = probe_battery(&dom())?;
    let mid = |t: &TestFn| t.support().map_or(f64::INFINITY, |s| s.midpoint().abs());
    b.sort_by(|x, y| mid(x).total_cmp(&mid(y)));
    b.truncate(n);
    Ok(b)
}

fn max_rel_err(a: &BasicElement, b: &BasicElement, kernels: &[SmoothingKernel], xs: &[f64]) -> Result<f64> {
    let mut e = 0.0f64;
    for k in kernels {
        let (fa, fb) = (a.eval(k)?, b.eval(k)?);
        for &x in xs {
            let (va, vb) = (fa.value(x)?, fb.value(x)?);
            e = e.max((va - vb).abs() / (1.0 + vb.abs()));
        }
    }
    Ok(e)
}

/// Composite Gauss-Legendre on the mollifier support.
fn moment(q: usize, j: usize) -> Result<f64> {
    let rho = make_mollifier(q, 1.0)?;
    let r = rho.radius();
    let (nodes, weights) = gauss_legendre(40);
    let pieces = 64;
    let h = 2.0 * r / pieces as f64;
    let mut s = 0.0;
    for p in 0..pieces {
        let (a, b) = (-r + p as f64 * h, -r + (p + 1) as f64 * h);
        for (t, w) in nodes.iter().zip(&weights) {
            let x = 0.5 * (a + b) + 0.5 * (b - a) * t;
            s += 0.5 * (b - a) * w * x.powi(j as i32) * rho.value(x);
        }
    }
    Ok(s)
}

fn c1() -> Result<(bool, String)> {
    let mut worst: (f64, f64) = (0.0, 0.0);
    for q in 0..=5 {
        worst.0 = worst.0.max((moment(q, 0)? - 1.0).abs());
        for j in 1..=q {
            worst.1 = worst.1.max(moment(q, j)?.abs());
        }
    }
    Ok((worst.0 < 1e-10 && worst.1 < 1e-8, format!("|mass - 1| <= {:e}, |moments| <= {:e}", worst.0, worst.1)))
}

fn c2() -> Result<(bool, String)> {
    let mut ok = true;
    let mut msg = Vec::new();
    for q in [1, 3] {
        let rep = validate_test_object(&seq(q)?, q, &TestObjectOptions::for_domain(&dom())?)?;
        let target = -((q + 1) as f64) + 0.5;
        let slopes: Vec<f64> = rep.cond_i.iter().map(|p| p.fit.as_ref().map_or(f64::NAN, |f| f.slope)).collect();
        let i_ok = rep.cond_i.iter().all(|p| p.fit.as_ref().is_some_and(|f| f.exact_zero() || f.slope <= target));
        let iii_ok = rep.cond_iii.iter().all(|p| p.verdict.is_pass());
        ok &= i_ok && iii_ok && rep.verdict.is_pass();
        msg.push(format!("q={q}: (i) slopes {slopes:.2?} target {target}, (iii) {}", if iii_ok { "all true" } else { "not all true" }));
    }
    Ok((ok, msg.join("; ")))
}

fn c3() -> Result<(bool, String)> {
    let s5 = seq(5)?;
    let r = sin_gap()?;
    let ps: Vec<Seminorm> = (0..=2).map(|m| Seminorm::new(-0.5, 0.5, m).unwrap()).collect();
    let fits = seminorm_table(&r, &s5, &ps, &GRID)?;
    let worst = fits.iter().map(|f| f.as_ref().map_or(f64::NAN, |f| f.slope)).fold(f64::NEG_INFINITY, f64::max);
    let conv = delta(0.0)?.sub(&BasicElement::zero(&dom()))?;
    let s = slope(&conv, &s5, &p0())?;
    Ok((worst <= -5.5 && s >= 0.8, format!("iota sin - sigma sin worst slope {worst:.3}; iota delta - sigma 0 slope {s:.3}")))
}

fn c4() -> Result<(bool, String)> {
    let s = seq(3)?;
    let d = delta(0.0)?;
    let r = d.mul(&d)?;
    let sl = slope(&r, &s, &p0())?;
    let opts = SweepOptions::new(vec![p0()]);
    let neg = is_negligible(&r, |q| standard_family(&dom(), q), default_grade, 3, &opts)?;
    let m = is_moderate(&r, &standard_family(&dom(), 3)?, &opts)?;
    let ok = (sl - 2.0).abs() <= 0.2 && neg.verdict == Verdict::Fail && m.verdict.is_pass();
    Ok((ok, format!("slope {sl:.3}, moderate {} (N = {:.3}), negligible {}", m.verdict, m.n, neg.verdict)))
}

fn c5() -> Result<(bool, String)> {
    let s = seq(3)?;
    let h = BasicElement::iota(&Distribution::heaviside(dom())?);
    let h2 = h.mul(&h)?;
    let diff = h2.sub(&h)?;
    let opts = SweepOptions::new(vec![p0()]);
    let neg = is_negligible(&diff, |q| standard_family(&dom(), q), default_grade, 3, &opts)?;
    let m0 = neg.worst_slope(0).unwrap_or(f64::NAN);
    let assoc = associated(&h2, &h, &s, &near_origin(5)?, &GRID)?;
    let rates: Vec<f64> = assoc.rates.iter().map(|p| p.fit.as_ref().map_or(f64::NAN, |f| f.slope)).collect();
    let decay = assoc.rates.iter().all(|p| p.fit.as_ref().is_some_and(|f| f.below(1e-10) || f.slope <= -0.8));
    let ok = neg.verdict == Verdict::Fail && m0 >= -0.2 && assoc.verdict.is_pass() && decay;
    Ok((ok, format!("negligible {}, m=0 slope {m0:.3}; association slopes {rates:.2?}", neg.verdict)))
}

fn c6() -> Result<(bool, String)> {
    let kern = seq(3)?.get(128)?;
    let r = BasicElement::iota(&Distribution::heaviside(dom())?).mul(&delta(0.0)?)?;
    let mut worst = 0.0f64;
    for phi in near_origin(5)? {
        worst = worst.max((pair_element(&r, &kern, &phi)? - 0.5 * phi.value(0.0)?).abs());
    }
    Ok((worst <= 1e-3, format!("worst |pairing - phi(0)/2| = {worst:e} at k = 128")))
}

fn c7() -> Result<(bool, String)> {
    let s = seq(3)?;
    let dx = VectorField::constant(1.0, dom());
    let u = Distribution::delta(0.0, dom())?;
    let r = BasicElement::iota(&u);
    let kernels: Vec<SmoothingKernel> = GRID.iter().map(|k| s.get(*k)).collect::<Result<_>>()?;
    let xs = [-0.3, -0.1, 0.0, 0.05, 0.2];

    let want = BasicElement::iota(&Distribution::delta_derivative(0.0, 1, dom())?);
    let ea = max_rel_err(&r.lie_hat(&dx), &want, &kernels, &xs)?;

    let f = SmoothFn::identity(dom());
    let eb = max_rel_err(&r.lie_tilde(&dx.scaled(&f)?), &r.lie_tilde(&dx).smooth_scale(&f)?, &kernels, &xs)?;

    let gap = r.lie_tilde(&dx).sub(&r.lie_hat(&dx))?;
    let mu = Diffeo1D::from_forward(SmoothFn::polynomial(vec![0.0, 1.0, 0.05], dom()))?;
    let t = mu.target().clone();
    let parent = standard_sequence(&t, &make_mollifier(3, 1.0)?, &DyadicCover::standard(t.clone()))?;
    let pulled = parent.map(dom(), move |k| SmoothingKernel::pulled(&mu, &k, true));
    let mut c_ok = true;
    let mut worst = f64::NEG_INFINITY;
    for sq in [&s, &pulled] {
        for phi in near_origin(5)? {
            let vals: Vec<(usize, f64)> =
                GRID.iter().map(|&k| Ok((k, pair_element(&gap, &sq.get(k)?, &phi)?.abs()))).collect::<Result<_>>()?;
            let small = vals.iter().all(|(_, v)| *v <= 1e-10);
            if !small {
                let sl = fit_order(&vals)?.slope;
                worst = worst.max(sl);
                c_ok &= sl <= -0.8;
            }
        }
    }
    let ok = ea <= 1e-8 && eb <= 1e-12 && c_ok;
    let w = if worst.is_finite() { format!("{worst:.3}") } else { "all below 1e-10".into() };
    Ok((ok, format!("(a) err {ea:e}; (b) err {eb:e}; (c) worst decay slope {w}")))
}

fn c8() -> Result<(bool, String)> {
    let s = seq(3)?;
    let iv = |a, b| Interval::new(a, b).unwrap();

    let cover = [iv(-2.0, -0.4), iv(-0.8, 0.8), iv(0.4, 2.0)];
    let glued = restrict_and_glue(&s, &cover, &GRID)?;
    let rep = eventually_equal(&s, &glued, &interior_probes(&iv(-2.0, 2.0), 10), &GRID)?;
    let k0 = rep.max_k0();
    let a = rep.verdict.is_pass() && k0.is_some_and(|k| k <= 64);

    let r = delta(-1.0)?.mul(&delta(1.0)?)?;
    let wide = s.get(32)?.add(&SmoothingKernel::constant(TestFn::bump(0.0, 1.8, &dom())?))?;
    let global = r.eval(&wide)?.value(0.0)?;
    let mut zero = true;
    for v in [Domain::interval(-2.0, 0.25)?, Domain::interval(-0.25, 2.0)?] {
        let local = standard_sequence(&v, &make_mollifier(3, 1.0)?, &DyadicCover::standard(v.clone()))?;
        let rv = r.restrict(&v)?;
        let (lo, hi) = v.bounds();
        for k in GRID {
            let f = rv.eval(&local.get(k)?)?;
            for x in interior_probes(&iv(lo, hi), 7) {
                zero &= f.value(x)? == 0.0;
            }
        }
        let f = rv.eval(&restrict_kernel_seq(&KernelSequence::constant(wide.clone()), &v)?.get(32)?)?;
        zero &= f.value(lo.max(-1.5) + 0.1)? == 0.0;
    }
    let b = zero && global != 0.0;

    let d = delta(0.0)?;
    let r2 = d.mul(&d)?;
    let (v, w) = (Domain::interval(-1.2, 1.6)?, Domain::interval(-0.6, 0.8)?);
    let ws = standard_sequence(&w, &make_mollifier(3, 1.0)?, &DyadicCover::standard(w.clone()))?;
    let kernels: Vec<SmoothingKernel> = GRID.iter().map(|k| ws.get(*k)).collect::<Result<_>>()?;
    let ec = max_rel_err(&r2.restrict(&v)?.restrict(&w)?, &r2.restrict(&w)?, &kernels, &interior_probes(&iv(-0.6, 0.8), 9))?;
    let c = ec <= 1e-10;

    let neg_on = |d: Domain| -> Result<Verdict> {
        let rr = delta(0.0)?.restrict(&d)?;
        let k = TestObjectOptions::for_domain(&d)?.compact;
        let opts = SweepOptions::new((0..=2).map(|m| Seminorm::new(k.lo, k.hi, m)).collect::<Result<_>>()?);
        Ok(is_negligible(&rr, |q| standard_family(&d, q), default_grade, 3, &opts)?.verdict)
    };
    let (away, near) = (neg_on(Domain::interval(0.5, 2.0)?)?, neg_on(Domain::interval(-0.5, 0.5)?)?);
    let dd = away == Verdict::Pass && near == Verdict::Fail;

    Ok((
        a && b && c && dd,
        format!(
            "(a) k0 = {k0:?}; (b) pieces zero {zero}, global {global:e}; (c) err {ec:e}; (d) away {away}, near {near}"
        ),
    ))
}

fn c9() -> Result<(bool, String)> {
    let rho = make_mollifier(1, 1.0)?;
    let cover = DyadicCover::standard(dom());
    let s = standard_sequence(&dom(), &rho, &cover)?;
    let xs = [-1.5, -0.3, 0.0, 0.01, 0.7];
    let mut exact = true;
    let fss: [SimplifiedRep; 2] = [iota_s(&Distribution::delta(0.0, dom())?, &rho, &cover)?, sigma_s(&SmoothFn::sin(dom()))];
    for fs in &fss {
        let back = pullback_f(&section_f(fs, &s, 0.0, &GRID)?, &s)?;
        for k in GRID {
            let (a, b) = (back.get(k)?, fs.get(k)?);
            for &x in &xs {
                exact &= a.value(x)? == b.value(x)?;
            }
        }
    }
    let d = delta(0.0)?;
    let battery = [d.clone(), d.mul(&d)?, sin_gap()?, BasicElement::zero(&dom())];
    let opts = SweepOptions::new((0..=2).map(|m| Seminorm::new(-0.5, 0.5, m)).collect::<Result<_>>()?);
    let mut agree = true;
    let mut classes = Vec::new();
    for r in &battery {
        let a = classify_s(&pullback_f(r, &s)?, &opts, 3)?;
        let b = classify_basic(r, &s, &opts, 3)?;
        agree &= a.same_class(&b);
        classes.push(format!("{a}/{b}"));
    }
    Ok((exact && agree, format!("round trip exact {exact}; classes {}", classes.join(", "))))
}

fn c10() -> Result<(bool, String)> {
    let mu = Diffeo1D::affine(2.0, 1.0, &dom())?;
    let u = Distribution::delta(0.0, dom())?;
    let lhs = BasicElement::iota(&u).pushforward(&mu)?;
    let t = mu.target().clone();
    let rhs = BasicElement::iota(&Distribution::delta(1.0, t.clone())?);
    let via = iota_pushforward(&mu, &u)?;
    let s = standard_sequence(&t, &make_mollifier(3, 1.0)?, &DyadicCover::standard(t.clone()))?;
    let kernels: Vec<SmoothingKernel> = GRID.iter().map(|k| s.get(*k)).collect::<Result<_>>()?;
    let xs = [-0.5, 0.9, 1.0, 1.02, 2.5];
    let e = max_rel_err(&lhs, &rhs, &kernels, &xs)?.max(max_rel_err(&via, &rhs, &kernels, &xs)?);
    let tag = lhs.tag() == BasicElement::iota(&u).tag();
    Ok((e <= 1e-8 && tag, format!("err {e:e}, tag {} preserved {tag}", lhs.tag())))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<(bool, String)>); 10] = [
        ("mollifier moments", c1),
        ("test-object grading", c2),
        ("iota vs sigma", c3),
        ("delta squared is moderate", c4),
        ("H^2 - H", c5),
        ("H times delta", c6),
        ("Lie derivatives", c7),
        ("sheaf suite", c8),
        ("simplified correspondence", c9),
        ("naturality", c10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {}: {name}: {detail} ({:.1}s)",
            i + 1,
            if ok { "pass" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
