//! Adaptive Gauss–Kronrod (10/21) quadrature and fixed Gauss–Legendre rules.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::domain::CompactInterval;
use super::func::SmoothFn;
use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-9;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
const MAX_SEGMENTS: usize = 4000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Points where the integrand may be non-smooth; the range is split there.
    pub breakpoints: Vec<f64>,
    /// Initial pieces are no wider than this.
    pub max_piece: Option<f64>,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: DEFAULT_REL_TOL, abs_tol: DEFAULT_ABS_TOL, breakpoints: Vec::new(), max_piece: None }
    }
}

impl QuadOptions {
    pub fn with_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }

    pub fn breakpoints(mut self, pts: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(pts);
        self
    }

    pub fn max_piece(mut self, w: f64) -> Self {
        self.max_piece = Some(w);
        self
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk21<F>(f: &F, a: f64, b: f64) -> Result<Segment>
where
    F: Fn(f64) -> Result<f64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok(Segment { a, b, value: kron * h, error: ((kron - gauss) * h).abs() })
}

/// Integrates `f` over `[a, b]` adaptively.
pub fn integrate_with<F>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("cannot integrate over [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = vec![lo];
    let mut bps: Vec<f64> = opts.breakpoints.iter().copied().filter(|p| lo < *p && *p < hi).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    cuts.extend(bps);
    cuts.push(hi);
    if let Some(w) = opts.max_piece {
        let mut refined = vec![cuts[0]];
        for win in cuts.windows(2) {
            let n = ((win[1] - win[0]) / w).ceil().max(1.0) as usize;
            for i in 1..=n {
                refined.push(if i == n { win[1] } else { win[0] + (win[1] - win[0]) * i as f64 / n as f64 });
            }
        }
        cuts = refined;
    }
    let mut segs = Vec::with_capacity(cuts.len() - 1);
    for w in cuts.windows(2) {
        segs.push(gk21(&f, w[0], w[1])?);
    }
    loop {
        let total: f64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::NoConvergence { estimate: sign * total, error: f64::INFINITY });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(QuadResult { value: sign * total, error: err });
        }
        if segs.len() >= MAX_SEGMENTS {
            return Err(Error::NoConvergence { estimate: sign * total, error: err });
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty");
        let s = segs.swap_remove(idx);
        let mid = 0.5 * (s.a + s.b);
        if !(s.a < mid && mid < s.b) {
            return Err(Error::NoConvergence { estimate: sign * total, error: err });
        }
        segs.push(gk21(&f, s.a, mid)?);
        segs.push(gk21(&f, mid, s.b)?);
    }
}

/// `∫_K f` with the default tolerances, splitting at the support boundary.
pub fn integrate(f: &SmoothFn, k: CompactInterval, tol: f64) -> Result<QuadResult> {
    let mut opts = QuadOptions::with_tol(tol);
    let (mut lo, mut hi) = (k.lo, k.hi);
    if let Some(s) = f.support() {
        lo = lo.max(s.lo);
        hi = hi.min(s.hi);
        if lo >= hi {
            return Ok(QuadResult { value: 0.0, error: 0.0 });
        }
        opts.breakpoints.extend([s.lo, s.hi]);
    }
    integrate_with(|x| f.value(x), lo, hi, &opts)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, cached per order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("gl cache").get(&n) {
        return v.clone();
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    let out = (x, w);
    cache.lock().expect("gl cache").insert(n, out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smooth::Domain;

    #[test]
    fn trivial_integrals() {
        let d = Domain::real_line();
        let x = SmoothFn::identity(d.clone());
        let one = SmoothFn::constant(1.0, d);
        let k = CompactInterval::new(-1.0, 1.0).unwrap();
        assert!(integrate(&x, k, 1e-9).unwrap().value.abs() < 1e-15);
        let u = CompactInterval::new(0.0, 1.0).unwrap();
        assert!((integrate(&one, u, 1e-9).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bump_integral() {
        let b = SmoothFn::bump(0.0, 1.0).unwrap();
        let k = CompactInterval::new(-3.0, 3.0).unwrap();
        let v = integrate(&b, k, 1e-12).unwrap().value;
        // exp(1) times the unnormalized value 0.4439938...
        assert!((v - 1.206_900_322_437_876_2).abs() < 1e-10, "{v}");
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(12);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reports_no_convergence() {
        let opts = QuadOptions { rel_tol: 1e-15, abs_tol: 0.0, ..Default::default() };
        let r = integrate_with(|x: f64| Ok(1.0 / x.abs()), 0.0, 1.0, &opts);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }
}
