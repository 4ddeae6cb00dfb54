use std::fmt;

use crate::error::{Error, Result};

/// An open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidArgument(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn real_line() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn contains_compact(&self, k: &CompactInterval) -> bool {
        self.lo < k.lo && k.hi < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// A closed bounded interval `[lo, hi]` (possibly a single point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactInterval {
    pub lo: f64,
    pub hi: f64,
}

impl CompactInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidArgument(format!("bad compact interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn hull(&self, other: &CompactInterval) -> CompactInterval {
        CompactInterval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(&self, other: &CompactInterval) -> Option<CompactInterval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(CompactInterval { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

impl fmt::Display for CompactInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// An open subset of the line: finitely many disjoint open intervals sorted by
/// left endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    intervals: Vec<Interval>,
}

impl Domain {
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidArgument("domain needs at least one interval".into()));
        }
        intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in intervals.windows(2) {
            if w[0].hi > w[1].lo {
                return Err(Error::InvalidArgument(format!(
                    "intervals {} and {} overlap",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Ok(Self { intervals: vec![Interval::new(lo, hi)?] })
    }

    pub fn real_line() -> Self {
        Self { intervals: vec![Interval::real_line()] }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    pub fn component_of(&self, x: f64) -> Option<&Interval> {
        self.intervals.iter().find(|i| i.contains(x))
    }

    /// True when `k` lies in a single component (compactly contained).
    pub fn contains_compact(&self, k: &CompactInterval) -> bool {
        self.intervals.iter().any(|i| i.contains_compact(k))
    }

    pub fn is_subset_of(&self, other: &Domain) -> bool {
        self.intervals
            .iter()
            .all(|i| other.intervals.iter().any(|o| o.lo <= i.lo && i.hi <= o.hi))
    }

    pub fn intersect(&self, other: &Domain) -> Option<Domain> {
        let mut out = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                if let Some(c) = a.intersect(b) {
                    out.push(c);
                }
            }
        }
        if out.is_empty() {
            None
        } else {
            out.sort_by(|a, b| a.lo.total_cmp(&b.lo));
            Some(Domain { intervals: out })
        }
    }

    /// Smallest and largest endpoints.
    pub fn bounds(&self) -> (f64, f64) {
        (self.intervals[0].lo, self.intervals[self.intervals.len() - 1].hi)
    }

    /// Distance from `x` to the complement of its component.
    pub fn distance_to_boundary(&self, x: f64) -> f64 {
        self.component_of(x).map(|i| (x - i.lo).min(i.hi - x)).unwrap_or(0.0)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.intervals.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(" ∪ "))
    }
}
