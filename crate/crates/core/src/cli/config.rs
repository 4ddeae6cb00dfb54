use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::smooth::{Domain, Interval};
use crate::testing::{Seminorm, DEFAULT_K_GRID, N_MAX, SLOPE_TOL, SLOPE_TOL_LOOSE};

/// Flat `key = value` configuration. Recognised keys:
///
/// | key | example | meaning |
/// |---|---|---|
/// | `domain` | `-2,2` or `-2,-1; 0,2` | intervals of Ω, `;`-separated |
/// | `mollifier_order` | `3` | `q ≤ 8` |
/// | `mollifier_radius` | `1.0` | support radius of `ρ` |
/// | `cover_overlap` | `0.125` | dyadic cover overlap `β ∈ (0, 0.5)` |
/// | `k_grid` | `8,16,32,64,128` | strictly increasing, at least 3 |
/// | `seminorm_orders` | `0,1,2` | derivative orders `m` |
/// | `compacts` | `-0.5:0.5, -1:1` | compact sets `K` inside Ω |
/// | `m_max` | `3` | highest decay order tested for negligibility |
/// | `seeds` | `1,2,3` | seeds for the locality probes |
/// | `trials` | `100` | locality probe trials per seed |
/// | `slope_tol`, `slope_tol_loose`, `n_max` | `0.3` | tolerance overrides |
/// | `out` | `out` | output directory |
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub domain: Domain,
    pub q: usize,
    pub radius: f64,
    pub beta: f64,
    pub k_grid: Vec<usize>,
    pub orders: Vec<usize>,
    pub compacts: Vec<(f64, f64)>,
    pub m_max: usize,
    pub seeds: Vec<u64>,
    pub trials: usize,
    pub slope_tol: f64,
    pub slope_tol_loose: f64,
    pub n_max: f64,
    pub out: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            domain: Domain::interval(-2.0, 2.0).expect("valid"),
            q: 3,
            radius: 1.0,
            beta: 0.125,
            k_grid: DEFAULT_K_GRID.to_vec(),
            orders: vec![0, 1, 2],
            compacts: vec![(-0.5, 0.5)],
            m_max: 3,
            seeds: vec![1],
            trials: 100,
            slope_tol: SLOPE_TOL,
            slope_tol_loose: SLOPE_TOL_LOOSE,
            n_max: N_MAX,
            out: PathBuf::from("out"),
        }
    }
}

fn bad(key: &str, msg: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), msg: msg.into() }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| bad(key, format!("cannot parse {:?}", v.trim())))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| num(key, s)).collect()
}

fn pair(key: &str, v: &str, sep: char) -> Result<(f64, f64)> {
    let mut it = v.splitn(2, sep);
    match (it.next(), it.next()) {
        (Some(a), Some(b)) => Ok((num(key, a)?, num(key, b)?)),
        _ => Err(bad(key, format!("expected lo{sep}hi, got {:?}", v.trim()))),
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(&format!("line {}", i + 1), "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "domain" => {
                    let parts: Vec<Interval> = value
                        .split(';')
                        .map(|p| {
                            let (lo, hi) = pair(key, p, ',')?;
                            Interval::new(lo, hi).map_err(|e| bad(key, e.to_string()))
                        })
                        .collect::<Result<_>>()?;
                    c.domain = Domain::new(parts).map_err(|e| bad(key, e.to_string()))?;
                }
                "mollifier_order" => c.q = num(key, value)?,
                "mollifier_radius" => c.radius = num(key, value)?,
                "cover_overlap" => c.beta = num(key, value)?,
                "k_grid" => c.k_grid = list(key, value)?,
                "seminorm_orders" => c.orders = list(key, value)?,
                "compacts" => {
                    c.compacts = value.split(',').filter(|s| !s.trim().is_empty()).map(|p| pair(key, p, ':')).collect::<Result<_>>()?
                }
                "m_max" => c.m_max = num(key, value)?,
                "seeds" => c.seeds = list(key, value)?,
                "trials" => c.trials = num(key, value)?,
                "slope_tol" => c.slope_tol = num(key, value)?,
                "slope_tol_loose" => c.slope_tol_loose = num(key, value)?,
                "n_max" => c.n_max = num(key, value)?,
                "out" => c.out = PathBuf::from(value),
                _ => return Err(bad(key, "unknown key")),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q > 8 {
            return Err(bad("mollifier_order", format!("{} exceeds 8", self.q)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(bad("mollifier_radius", "must be positive"));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(bad("cover_overlap", "must lie in (0, 0.5)"));
        }
        if self.k_grid.len() < 3 || self.k_grid[0] == 0 || self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("k_grid", "needs at least 3 positive, strictly increasing values"));
        }
        if self.orders.is_empty() || self.orders.iter().any(|m| *m > 6) {
            return Err(bad("seminorm_orders", "orders must be given and at most 6"));
        }
        if self.compacts.is_empty() {
            return Err(bad("compacts", "at least one compact set is needed"));
        }
        for (lo, hi) in &self.compacts {
            let inside = crate::smooth::CompactInterval::new(*lo, *hi)
                .map(|k| self.domain.contains_compact(&k))
                .unwrap_or(false);
            if !inside {
                return Err(bad("compacts", format!("[{lo}, {hi}] is not a compact subset of {}", self.domain)));
            }
        }
        if self.seeds.is_empty() {
            return Err(bad("seeds", "at least one seed is needed"));
        }
        for (k, v) in [("slope_tol", self.slope_tol), ("slope_tol_loose", self.slope_tol_loose), ("n_max", self.n_max)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(k, "must be positive"));
            }
        }
        Ok(())
    }

    pub fn seminorms(&self) -> Vec<Seminorm> {
        self.compacts
            .iter()
            .flat_map(|(lo, hi)| self.orders.iter().map(move |m| Seminorm::new(*lo, *hi, *m).expect("validated")))
            .collect()
    }

    /// Echo in the input format, for reports.
    pub fn render(&self) -> String {
        let join = |v: Vec<String>| v.join(",");
        let domain: Vec<String> = self.domain.intervals().iter().map(|i| format!("{},{}", i.lo, i.hi)).collect();
        [
            format!("domain = {}", domain.join("; ")),
            format!("mollifier_order = {}", self.q),
            format!("mollifier_radius = {}", self.radius),
            format!("cover_overlap = {}", self.beta),
            format!("k_grid = {}", join(self.k_grid.iter().map(|k| k.to_string()).collect())),
            format!("seminorm_orders = {}", join(self.orders.iter().map(|k| k.to_string()).collect())),
            format!("compacts = {}", join(self.compacts.iter().map(|(a, b)| format!("{a}:{b}")).collect())),
            format!("m_max = {}", self.m_max),
            format!("seeds = {}", join(self.seeds.iter().map(|k| k.to_string()).collect())),
            format!("trials = {}", self.trials),
            format!("slope_tol = {}", self.slope_tol),
            format!("slope_tol_loose = {}", self.slope_tol_loose),
            format!("n_max = {}", self.n_max),
        ]
        .join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let text = "# comment\ndomain = -3, 3\nmollifier_order = 5 # trailing\nk_grid = 4,8,16\ncompacts = -1:1, 0:2\n";
        let c = Config::parse(text).unwrap();
        assert_eq!(c.q, 5);
        assert_eq!(c.k_grid, vec![4, 8, 16]);
        assert_eq!(c.seminorms().len(), 6);
        let again = Config::parse(&c.render()).unwrap();
        assert_eq!(again, Config { out: again.out.clone(), ..c });
    }

    #[test]
    fn errors_name_the_key() {
        for (text, key) in [
            ("k_grid = 8,8,16", "k_grid"),
            ("mollifier_order = 9", "mollifier_order"),
            ("compacts = -3:0", "compacts"),
            ("colour = red", "colour"),
            ("mollifier_radius = abc", "mollifier_radius"),
        ] {
            match Config::parse(text) {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
