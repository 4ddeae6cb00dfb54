use super::{Command, Config, DemoName, Group, Outcome};
use crate::basic::{iota_lie, probe_locality, BasicElement, Chain, LocalityKind};
use crate::dist::{probe_battery, Distribution};
use crate::error::{Error, Result};
use crate::kernel::{
    eventually_equal, interior_probes, make_mollifier, restrict_and_glue, restrict_kernel_seq, standard_sequence,
    DyadicCover, KernelSequence, SmoothingKernel,
};
use crate::smooth::{CompactInterval, Diffeo1D, Domain, Interval, SmoothFn, TestFn, VectorField};
use crate::testing::{
    associated, fit_order, is_moderate, is_negligible, pair_element, seminorm_table, standard_family,
    validate_test_object, AsymptoticFit, ProbeFit, Seminorm, SweepOptions, TestObjectOptions,
};
use crate::verdict::Verdict;

/// Everything derived from the configuration once.
pub(crate) struct Ctx {
    pub cfg: Config,
    pub seed: u64,
    pub seq: KernelSequence,
}

impl Ctx {
    pub fn new(cfg: &Config, seed: u64) -> Result<Self> {
        let rho = make_mollifier(cfg.q, cfg.radius)?;
        let cover = DyadicCover::new(cfg.domain.clone(), cfg.beta)?;
        let seq = standard_sequence(&cfg.domain, &rho, &cover)?;
        Ok(Self { cfg: cfg.clone(), seed, seq })
    }

    fn domain(&self) -> &Domain {
        &self.cfg.domain
    }

    /// Sweep options whose compacts lie in `d`; falls back to the middle
    /// half of its first component.
    fn opts_on(&self, d: &Domain) -> Result<SweepOptions> {
        let mut ps: Vec<Seminorm> = self.cfg.seminorms().into_iter().filter(|p| d.contains_compact(&p.compact)).collect();
        if ps.is_empty() {
            let k = TestObjectOptions::for_domain(d)?.compact;
            ps = self.cfg.orders.iter().map(|m| Seminorm::new(k.lo, k.hi, *m)).collect::<Result<_>>()?;
        }
        Ok(SweepOptions { k_grid: self.cfg.k_grid.clone(), seminorms: ps, tol: self.cfg.slope_tol })
    }

    fn grade(&self, m: usize) -> usize {
        (m + 1).max(self.cfg.q)
    }

    fn k_at(&self, target: usize) -> usize {
        *self.cfg.k_grid.iter().min_by_key(|k| k.abs_diff(target)).expect("validated grid")
    }

    fn delta(&self, a: f64) -> Result<BasicElement> {
        Ok(BasicElement::iota(&Distribution::delta(a, self.domain().clone())?))
    }

    fn sweep_fit(&self, r: &BasicElement, p: &Seminorm) -> Result<Option<AsymptoticFit>> {
        Ok(seminorm_table(r, &self.seq, std::slice::from_ref(p), &self.cfg.k_grid)?.pop().flatten())
    }
}

/// The `n` battery bumps closest to the origin (or to the domain center).
pub(crate) fn near_origin(domain: &Domain, n: usize) -> Result<Vec<TestFn>> {
    let (lo, hi) = domain.bounds();
    let c = if domain.contains(0.0) { 0.0 } else { 0.5 * (lo.max(-1e6) + hi.min(1e6)) };
    let mut b = probe_battery(domain)?;
    let mid = |t: &TestFn| t.support().map(|s| (s.midpoint() - c).abs()).unwrap_or(f64::INFINITY);
    b.sort_by(|x, y| mid(x).total_cmp(&mid(y)));
    b.truncate(n);
    Ok(b)
}

fn fit_group(experiment: &str, label: &str, fit: &Option<AsymptoticFit>, verdict: Verdict) -> Group {
    Group::from_fit(experiment, &ProbeFit { label: label.into(), fit: fit.clone(), verdict })
}

fn fmt_slope(f: &Option<AsymptoticFit>) -> String {
    f.as_ref().map_or("n/a".into(), |f| if f.exact_zero() { "exact zero".into() } else { format!("{:.3}", f.slope) })
}

pub(crate) fn execute(cmd: &Command, cfg: &Config, seed: u64) -> Result<Outcome> {
    let ctx = Ctx::new(cfg, seed)?;
    match cmd {
        Command::Demo { name } => demo(&ctx, *name),
        Command::ValidateTestobject => validate(&ctx),
        Command::Classify { expr } => classify(&ctx, expr),
        Command::Associate { e1, e2 } => associate(&ctx, e1, e2),
        Command::SheafDemo => sheaf(&ctx),
        Command::LieCheck => lie_check(&ctx),
        Command::Export => export(&ctx),
    }
}

fn demo(ctx: &Ctx, name: DemoName) -> Result<Outcome> {
    let mut out = Outcome::default();
    match name {
        DemoName::DeltaSquared => delta_squared(ctx, &mut out)?,
        DemoName::IotaSigma => iota_sigma(ctx, &mut out)?,
        DemoName::Heaviside => heaviside(ctx, &mut out)?,
        DemoName::Restriction => split_cover(ctx, &mut out)?,
        DemoName::Support => support(ctx, &mut out)?,
    }
    Ok(out)
}

fn moderate(ctx: &Ctx, id: &str, r: &BasicElement, out: &mut Outcome) -> Result<Verdict> {
    let opts = ctx.opts_on(r.domain())?;
    let rep = is_moderate(r, &standard_family(r.domain(), ctx.cfg.q)?, &opts)?;
    let n_max = ctx.cfg.n_max;
    let mut v = Verdict::Pass;
    for p in &rep.fits {
        let pv = match &p.fit {
            None => Verdict::Inconclusive,
            Some(f) => Verdict::from_bool(f.exact_zero() || (f.slope.is_finite() && f.slope <= n_max)),
        };
        v = v.and(pv);
        out.groups.push(fit_group(&format!("{id}/moderate"), &p.label, &p.fit, pv));
    }
    out.line(format!("{id}: moderate {v}, growth exponent N = {:.3}", rep.n));
    Ok(v)
}

fn negligible(ctx: &Ctx, id: &str, r: &BasicElement, out: &mut Outcome) -> Result<Verdict> {
    let opts = ctx.opts_on(r.domain())?;
    let d = r.domain().clone();
    let rep = is_negligible(r, |q| standard_family(&d, q), |m| ctx.grade(m), ctx.cfg.m_max, &opts)?;
    for (m, q, fits) in &rep.per_m {
        for p in fits {
            out.groups.push(fit_group(&format!("{id}/negligible-m{m}-q{q}"), &p.label, &p.fit, p.verdict));
        }
        let worst = rep.worst_slope(*m).map_or("n/a".into(), |s| format!("{s:.3}"));
        out.line(format!("{id}: decay m={m} with grade q={q}: worst slope {worst}"));
    }
    out.line(format!("{id}: negligible {}", rep.verdict));
    Ok(rep.verdict)
}

fn expect_not(v: Verdict) -> Verdict {
    match v {
        Verdict::Pass => Verdict::Fail,
        Verdict::Fail => Verdict::Pass,
        Verdict::Inconclusive => Verdict::Inconclusive,
    }
}

fn origin_compact(ctx: &Ctx, m: usize) -> Result<Seminorm> {
    let p = Seminorm::new(-0.5, 0.5, m)?;
    if !ctx.domain().contains_compact(&p.compact) {
        return Err(Error::Config { key: "domain".into(), msg: "this demo needs [-0.5, 0.5] inside the domain".into() });
    }
    Ok(p)
}

fn delta_squared(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let d = ctx.delta(0.0)?;
    let r = d.mul(&d)?;
    out.line(format!("R = iota(delta) * iota(delta), tag {}", r.tag()));
    let mv = moderate(ctx, "delta-squared", &r, out)?;
    out.check("moderate", mv);
    let p = origin_compact(ctx, 0)?;
    let fit = ctx.sweep_fit(&r, &p)?;
    let v = match &fit {
        Some(f) => Verdict::from_bool((f.slope - 2.0).abs() <= 0.2),
        None => Verdict::Inconclusive,
    };
    out.groups.push(fit_group("delta-squared/growth", &p.id(), &fit, v));
    out.check(&format!("growth on {} has slope {} (expected 2 +- 0.2)", p.id(), fmt_slope(&fit)), v);
    let nv = negligible(ctx, "delta-squared", &r, out)?;
    out.check("not negligible", expect_not(nv));
    Ok(())
}

fn iota_sigma(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let dom = ctx.domain().clone();
    let sin = SmoothFn::sin(dom.clone());
    let r = BasicElement::iota(&Distribution::regular(sin.clone())).sub(&BasicElement::sigma(&sin))?;
    out.line(format!("R = iota(sin) - sigma(sin), tag {}", r.tag()));
    let nv = negligible(ctx, "iota-sigma", &r, out)?;
    out.check(&format!("negligible up to m = {}", ctx.cfg.m_max), nv);

    // the same family, judged against the mollifier order
    let q = ctx.cfg.q;
    let target = -((q + 1) as f64) + ctx.cfg.slope_tol_loose;
    let opts = ctx.opts_on(&dom)?;
    let mut v = Verdict::Pass;
    for (i, seq) in standard_family(&dom, q)?.iter().enumerate() {
        for (p, fit) in opts.seminorms.iter().zip(seminorm_table(&r, seq, &opts.seminorms, &opts.k_grid)?) {
            let pv = match &fit {
                None => Verdict::Inconclusive,
                Some(f) => Verdict::from_bool(f.exact_zero() || f.below(1e-13) || f.slope <= target),
            };
            v = v.and(pv);
            out.groups.push(fit_group("iota-sigma/order", &format!("seq{i} {}", p.id()), &fit, pv));
        }
    }
    out.check(&format!("grade-{q} slopes <= {target}"), v);

    // the converse: iota(delta) - sigma(0) does not vanish
    let r2 = ctx.delta(0.0)?.sub(&BasicElement::zero(&dom))?;
    let p = origin_compact(ctx, 0)?;
    let fit = ctx.sweep_fit(&r2, &p)?;
    let cv = fit.as_ref().map_or(Verdict::Inconclusive, |f| Verdict::from_bool(f.slope >= 0.8));
    out.groups.push(fit_group("iota-sigma/converse", &p.id(), &fit, cv));
    out.check(&format!("iota(delta) - sigma(0) grows on {} with slope {}", p.id(), fmt_slope(&fit)), cv);
    Ok(())
}

fn heaviside(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let dom = ctx.domain().clone();
    let h = BasicElement::iota(&Distribution::heaviside(dom.clone())?);
    let h2 = h.mul(&h)?;
    let diff = h2.sub(&h)?;

    let p = origin_compact(ctx, 0)?;
    let fit = ctx.sweep_fit(&diff, &p)?;
    let nv = fit.as_ref().map_or(Verdict::Inconclusive, |f| Verdict::from_bool(!f.exact_zero() && f.slope >= -0.2));
    out.groups.push(fit_group("heaviside/H2-H", &p.id(), &fit, nv));
    out.check(&format!("H^2 - H does not decay on {} (slope {})", p.id(), fmt_slope(&fit)), nv);

    let probes = near_origin(&dom, 5)?;
    let rep = associated(&h2, &h, &ctx.seq, &probes, &ctx.cfg.k_grid)?;
    let mut av = Verdict::Pass;
    for pf in &rep.rates {
        let v = pf.fit.as_ref().map_or(Verdict::Inconclusive, |f| Verdict::from_bool(f.below(1e-10) || f.slope <= -0.8));
        av = av.and(v);
        out.groups.push(fit_group("heaviside/assoc-H2-H", &pf.label, &pf.fit, v));
    }
    out.check("iota(H)^2 associated to iota(H), pairings decay with slope <= -0.8", av);

    let d = ctx.delta(0.0)?;
    let hd = h.mul(&d)?;
    let k = ctx.k_at(128);
    let kernel = ctx.seq.get(k)?;
    let mut worst = 0.0f64;
    let mut vals = Vec::new();
    for phi in &probes {
        let got = pair_element(&hd, &kernel, phi)?;
        let err = (got - 0.5 * phi.value(0.0)?).abs();
        worst = worst.max(err);
        vals.push((k, err));
    }
    let hv = Verdict::from_bool(worst <= 1e-3);
    out.groups.push(Group::points("heaviside/H-delta", "|pairing - phi(0)/2|", vals, hv));
    out.check(&format!("H * delta pairs to phi(0)/2 at k = {k}, worst error {worst:e}"), hv);
    Ok(())
}

/// `δ_{-1} · δ_1` restricted to the two halves of a split cover, on a
/// kernel whose support never shrinks.
fn split_cover(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let dom = ctx.domain().clone();
    if !(dom.contains(-1.0) && dom.contains(1.0) && dom.component_of(-1.0) == dom.component_of(1.0)) {
        return Err(Error::Config { key: "domain".into(), msg: "this demo needs [-1, 1] inside one component".into() });
    }
    let r = ctx.delta(-1.0)?.mul(&ctx.delta(1.0)?)?;
    let k = ctx.k_at(32);
    let wide = SmoothingKernel::constant(TestFn::bump(0.0, 1.8, &dom)?);
    let kernel = ctx.seq.get(k)?.add(&wide)?;
    let global = r.eval(&kernel)?;
    let xs = [-0.6, -0.2, 0.0, 0.2, 0.6];
    let gvals: Vec<f64> = xs.iter().map(|x| global.value(*x)).collect::<Result<_>>()?;
    let gmax = gvals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for (x, v) in xs.iter().zip(&gvals) {
        out.groups.push(Group::points("restriction/global", &format!("|R(phi)(x)| x={x}"), vec![(k, v.abs())], Verdict::Pass));
    }
    let gv = Verdict::from_bool(gmax > 0.0);
    out.check(&format!("global element at k = {k} is nonzero (max {gmax:e})"), gv);

    let halves = [Domain::interval(-2.0f64.max(dom.bounds().0), 0.25)?, Domain::interval(-0.25, 2.0f64.min(dom.bounds().1))?];
    let mut zv = Verdict::Pass;
    for v in &halves {
        let rv = r.restrict(v)?;
        let (lo, hi) = v.bounds();
        let pts = interior_probes(&Interval::new(lo, hi)?, 7);
        let local = standard_sequence(v, &make_mollifier(ctx.cfg.q, ctx.cfg.radius)?, &DyadicCover::new(v.clone(), ctx.cfg.beta)?)?;
        // the restricted wide kernel at k, then the localizing kernels of V
        let mut kernels = vec![(k, restrict_kernel_seq(&KernelSequence::constant(kernel.clone()), v)?.get(k)?)];
        for &kk in &ctx.cfg.k_grid {
            kernels.push((kk, local.get(kk)?));
        }
        let mut vals = Vec::new();
        for (kk, kern) in &kernels {
            let f = rv.eval(kern)?;
            let worst = pts.iter().map(|x| f.value(*x).map(f64::abs)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
            vals.push((*kk, worst));
        }
        let ok = vals.iter().all(|(_, v)| *v == 0.0);
        zv = zv.and(Verdict::from_bool(ok));
        out.groups.push(Group::points("restriction/piece", &format!("max |R|_V(phi)(x)| on {v}"), vals, Verdict::from_bool(ok)));
    }
    out.check("restrictions to both pieces are exactly zero on restricted and localizing kernels", zv);
    Ok(())
}

fn support(ctx: &Ctx, out: &mut Outcome) -> Result<()> {
    let d = ctx.delta(0.0)?;
    let (lo, hi) = ctx.domain().bounds();
    let away = Domain::interval(0.5, hi.min(2.0))?;
    let near = Domain::interval(-0.5, 0.5)?;
    if !(away.is_subset_of(ctx.domain()) && near.is_subset_of(ctx.domain())) || lo > -0.5 {
        return Err(Error::Config { key: "domain".into(), msg: "this demo needs (-0.5, 2) inside the domain".into() });
    }
    let v1 = negligible(ctx, "support-away", &d.restrict(&away)?, out)?;
    out.check(&format!("iota(delta) restricted to {away} is negligible"), v1);
    let v2 = negligible(ctx, "support-near", &d.restrict(&near)?, out)?;
    out.check(&format!("iota(delta) restricted to {near} is not negligible"), expect_not(v2));
    Ok(())
}

fn validate(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut opts = TestObjectOptions::for_domain(ctx.domain())?;
    opts.k_grid = ctx.cfg.k_grid.clone();
    opts.m_max = ctx.cfg.orders.iter().copied().max().unwrap_or(2);
    opts.tol = ctx.cfg.slope_tol_loose;
    let (lo, hi) = ctx.cfg.compacts[0];
    opts.compact = CompactInterval::new(lo, hi)?;
    let rep = validate_test_object(&ctx.seq, ctx.cfg.q, &opts)?;
    for (cond, fits) in [("i", &rep.cond_i), ("ii", &rep.cond_ii), ("iii", &rep.cond_iii)] {
        for p in fits {
            out.groups.push(Group::from_fit(&format!("validate/cond-{cond}"), p));
        }
        let v = Verdict::all(fits.iter().map(|p| p.verdict));
        let slopes: Vec<String> = fits.iter().map(|p| format!("{} {}", p.label, fmt_slope(&p.fit))).collect();
        out.line(format!("cond ({cond}): {}", slopes.join("; ")));
        out.check(&format!("condition ({cond})"), v);
    }
    Ok(out)
}

fn parse(ctx: &Ctx, text: &str) -> Result<BasicElement> {
    super::parse_expr(text)?.build(ctx.domain())
}

fn classify(ctx: &Ctx, text: &str) -> Result<Outcome> {
    let mut out = Outcome::default();
    let r = parse(ctx, text)?;
    let tag = r.tag();
    out.line(format!("expression: {}", super::parse_expr(text)?));
    out.line(format!("domain: {}", r.domain()));
    out.line(format!("tag: {tag}"));

    let kind = match tag.chain {
        Chain::E => None,
        Chain::Loc => Some(LocalityKind::Local),
        Chain::Ploc => Some(LocalityKind::PointLocal),
        Chain::Pi => Some(LocalityKind::PointIndependent),
    };
    let probe_kinds = match kind {
        Some(k) => vec![(k, true)],
        None => vec![(LocalityKind::Local, false)],
    };
    for (k, claimed) in probe_kinds {
        let mut v = Verdict::Pass;
        let mut trials = 0;
        for seed in seeds(ctx) {
            let o = probe_locality(&r, k, ctx.cfg.trials, seed)?;
            trials += o.trials;
            if let Some(c) = &o.counterexample {
                out.line(format!("counterexample ({k}, seed {seed}): {c}"));
            }
            v = v.and(o.verdict);
        }
        if claimed {
            out.check(&format!("{k} probes, {trials} trials"), v);
        } else {
            out.line(format!("untagged; {k} probes over {trials} trials: {v}"));
        }
    }

    let mv = moderate(ctx, "classify", &r, &mut out)?;
    let nv = negligible(ctx, "classify", &r, &mut out)?;
    let class = match (mv, nv) {
        (_, Verdict::Pass) => "negligible",
        (Verdict::Pass, Verdict::Fail) => "moderate, not negligible",
        (Verdict::Fail, _) => "not moderate",
        _ => "inconclusive",
    };
    out.line(format!("class: {class}"));
    let conclusive = if mv == Verdict::Inconclusive || nv == Verdict::Inconclusive { Verdict::Inconclusive } else { Verdict::Pass };
    out.check("classification reached", conclusive);
    Ok(out)
}

fn seeds(ctx: &Ctx) -> Vec<u64> {
    if ctx.cfg.seeds.contains(&ctx.seed) { ctx.cfg.seeds.clone() } else { vec![ctx.seed] }
}

fn associate(ctx: &Ctx, e1: &str, e2: &str) -> Result<Outcome> {
    let mut out = Outcome::default();
    let (a, b) = (parse(ctx, e1)?, parse(ctx, e2)?);
    out.line(format!("R1 = {}, R2 = {}", super::parse_expr(e1)?, super::parse_expr(e2)?));
    let probes = probe_battery(a.domain())?;
    let rep = associated(&a, &b, &ctx.seq, &probes, &ctx.cfg.k_grid)?;
    for p in &rep.rates {
        out.groups.push(Group::from_fit("associate", p));
        out.line(format!("{}: {}", p.label, fmt_slope(&p.fit)));
    }
    out.check("associated", rep.verdict);
    Ok(out)
}

fn sheaf(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let dom = ctx.domain().clone();
    let (lo, hi) = dom.bounds();
    if dom.intervals().len() != 1 || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config { key: "domain".into(), msg: "sheaf-demo needs a single bounded interval".into() });
    }
    let w = hi - lo;

    // restrict to a three-piece cover, then glue
    let at = |t: f64| lo + t * w;
    let cover = [Interval::new(lo, at(0.4))?, Interval::new(at(0.3), at(0.7))?, Interval::new(at(0.6), hi)?];
    let glued = restrict_and_glue(&ctx.seq, &cover, &ctx.cfg.k_grid)?;
    let probes = interior_probes(&Interval::new(lo, hi)?, 10);
    let rep = eventually_equal(&ctx.seq, &glued, &probes, &ctx.cfg.k_grid)?;
    let k0 = rep.max_k0();
    let gv = rep.verdict.and(Verdict::from_bool(k0.is_some_and(|k| k <= 64)));
    out.groups.push(Group::points(
        "sheaf/glue",
        "k0 per probe",
        rep.probes.iter().map(|(_, k, _)| (k.unwrap_or(0), k.map_or(f64::INFINITY, |k| k as f64))).collect(),
        gv,
    ));
    out.check(&format!("restrict-then-glue agrees on {} probes from k0 = {}", probes.len(), k0.map_or("none".into(), |k| k.to_string())), gv);

    split_cover(ctx, &mut out)?;

    // transitivity of restriction
    let d = ctx.delta(at(0.5))?;
    let r = d.mul(&d)?;
    let v = Domain::interval(at(0.2), at(0.9))?;
    let wdom = Domain::interval(at(0.35), at(0.7))?;
    let twice = r.restrict(&v)?.restrict(&wdom)?;
    let once = r.restrict(&wdom)?;
    let rho = make_mollifier(ctx.cfg.q, ctx.cfg.radius)?;
    let wseq = standard_sequence(&wdom, &rho, &DyadicCover::new(wdom.clone(), ctx.cfg.beta)?)?;
    let pts = interior_probes(&Interval::new(at(0.35), at(0.7))?, 9);
    let mut tv = Verdict::Pass;
    let mut vals = Vec::new();
    for &k in &ctx.cfg.k_grid {
        let kern = wseq.get(k)?;
        let (a, b) = (twice.eval(&kern)?, once.eval(&kern)?);
        let mut e = 0.0f64;
        for &x in &pts {
            let (va, vb) = (a.value(x)?, b.value(x)?);
            e = e.max((va - vb).abs() / (1.0 + vb.abs()));
        }
        tv = tv.and(Verdict::from_bool(e <= 1e-10));
        vals.push((k, e));
    }
    out.groups.push(Group::points("sheaf/transitivity", "relative error", vals, tv));
    out.check("(R|V)|W = R|W within 1e-10", tv);

    support(ctx, &mut out)?;
    Ok(out)
}

fn lie_check(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let dom = ctx.domain().clone();
    if !dom.contains_compact(&CompactInterval::new(-1.0, 1.0)?) {
        return Err(Error::Config { key: "domain".into(), msg: "lie-check needs [-1, 1] inside the domain".into() });
    }
    let dx = VectorField::constant(1.0, dom.clone());
    let delta = Distribution::delta(0.0, dom.clone())?;
    let r = BasicElement::iota(&delta);
    let pts = [-0.3, -0.1, 0.0, 0.05, 0.2];
    let kernels: Vec<usize> = ctx.cfg.k_grid.iter().rev().take(5).rev().copied().collect();

    // hat derivative of iota(delta) against iota of the derivative
    let lhs = r.lie_hat(&dx);
    let rhs = iota_lie(&dx, &delta)?;
    let mut av = Verdict::Pass;
    let mut vals = Vec::new();
    for &k in &kernels {
        let kern = ctx.seq.get(k)?;
        let (a, b) = (lhs.eval(&kern)?, rhs.eval(&kern)?);
        let mut e = 0.0f64;
        for &x in &pts {
            let (va, vb) = (a.value(x)?, b.value(x)?);
            e = e.max((va - vb).abs() / (1.0 + vb.abs()));
        }
        av = av.and(Verdict::from_bool(e <= 1e-8));
        vals.push((k, e));
    }
    out.groups.push(Group::points("lie/hat-vs-iota", "relative error", vals, av));
    out.check("hat Lie derivative of iota(delta) = iota(delta') within 1e-8", av);

    // tilde derivative is C-infinity linear in the field
    let f = SmoothFn::identity(dom.clone());
    let fx = dx.scaled(&f)?;
    let lhs = r.lie_tilde(&fx);
    let rhs = r.lie_tilde(&dx).smooth_scale(&f)?;
    let mut bv = Verdict::Pass;
    let mut vals = Vec::new();
    for &k in &kernels {
        let kern = ctx.seq.get(k)?;
        let (a, b) = (lhs.eval(&kern)?, rhs.eval(&kern)?);
        let mut e = 0.0f64;
        for &x in &pts {
            let (va, vb) = (a.value(x)?, b.value(x)?);
            e = e.max((va - vb).abs() / (1.0 + vb.abs()));
        }
        bv = bv.and(Verdict::from_bool(e <= 1e-12));
        vals.push((k, e));
    }
    out.groups.push(Group::points("lie/tilde-linearity", "relative error", vals, bv));
    out.check("tilde Lie derivative along x d/dx = x times the one along d/dx, within 1e-12", bv);

    // the two derivatives differ by something that vanishes weakly
    let gap = r.lie_tilde(&dx).sub(&r.lie_hat(&dx))?;
    let probes = near_origin(&dom, 5)?;
    let mu = Diffeo1D::from_forward(SmoothFn::polynomial(vec![0.0, 1.0, 0.05], dom.clone()))?;
    let rho = make_mollifier(ctx.cfg.q, ctx.cfg.radius)?;
    let target = mu.target().clone();
    let parent = standard_sequence(&target, &rho, &DyadicCover::new(target.clone(), ctx.cfg.beta)?)?;
    let m2 = mu.clone();
    let pulled = parent.map(dom.clone(), move |k| SmoothingKernel::pulled(&m2, &k, true));
    let mut cv = Verdict::Pass;
    for (name, seq) in [("standard", &ctx.seq), ("pulled", &pulled)] {
        for (j, phi) in probes.iter().enumerate() {
            let vals: Vec<(usize, f64)> = ctx
                .cfg
                .k_grid
                .iter()
                .map(|&k| Ok((k, pair_element(&gap, &seq.get(k)?, phi)?.abs())))
                .collect::<Result<_>>()?;
            let fit = fit_order(&vals)?;
            let v = Verdict::from_bool(vals.iter().all(|(_, v)| *v <= 1e-10) || fit.slope <= -0.8);
            cv = cv.and(v);
            out.groups.push(fit_group("lie/difference-pairing", &format!("{name} phi{j}"), &Some(fit), v));
        }
    }
    out.check("pairings of the difference decay with slope <= -0.8", cv);
    Ok(out)
}

fn export(ctx: &Ctx) -> Result<Outcome> {
    let mut out = Outcome::default();
    let dom = ctx.domain().clone();
    let d = ctx.delta(0.0)?;
    let h = BasicElement::iota(&Distribution::heaviside(dom.clone())?);
    let sin = SmoothFn::sin(dom.clone());
    let battery = [
        ("iota-delta", d.clone()),
        ("delta-squared", d.mul(&d)?),
        ("iota-sigma-sin", BasicElement::iota(&Distribution::regular(sin.clone())).sub(&BasicElement::sigma(&sin))?),
        ("heaviside-squared-minus-heaviside", h.mul(&h)?.sub(&h)?),
        ("zero", BasicElement::zero(&dom)),
    ];
    let opts = ctx.opts_on(&dom)?;
    let mut v = Verdict::Pass;
    for (name, r) in &battery {
        let fits = seminorm_table(r, &ctx.seq, &opts.seminorms, &opts.k_grid)?;
        for (p, fit) in opts.seminorms.iter().zip(fits) {
            let pv = if fit.is_some() { Verdict::Pass } else { Verdict::Inconclusive };
            v = v.and(pv);
            out.line(format!("{name} {}: slope {}", p.id(), fmt_slope(&fit)));
            out.groups.push(fit_group(&format!("export/{name}"), &p.id(), &fit, pv));
        }
    }
    out.check("all sweeps computed", v);
    Ok(out)
}
