//! Euclidean projection of a non-negative vector onto `{x ≥ 0 : 1ᵀx ≤ radius}`.
//!
//! Two strategies are provided. Both keep per-column state that can be
//! advanced to a larger radius without starting over, which is how the prox
//! solver reuses work between outer iterations: as the radius grows the
//! threshold shrinks and the support can only grow.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which ℓ₁-ball projection routine to run on each column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InnerProjection {
    /// Sort each column once, then scan the sorted prefix.
    Sort,
    /// Michelot's active-set iteration.
    #[default]
    Michelot,
}

impl InnerProjection {
    pub const ALL: [InnerProjection; 2] = [InnerProjection::Sort, InnerProjection::Michelot];

    pub fn as_str(&self) -> &'static str {
        match self {
            InnerProjection::Sort => "sort",
            InnerProjection::Michelot => "michelot",
        }
    }
}

impl fmt::Display for InnerProjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InnerProjection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sort" => Ok(InnerProjection::Sort),
            "michelot" | "active-set" | "active_set" => Ok(InnerProjection::Michelot),
            other => Err(Error::invalid(format!(
                "unknown projection strategy '{other}' (expected sort or michelot)"
            ))),
        }
    }
}

/// Result of projecting one non-negative vector onto an ℓ₁ ball.
#[derive(Debug, Clone, PartialEq)]
pub struct L1BallProjection {
    pub x: Vec<f64>,
    /// Shift applied to every entry, `x = max(u - threshold, 0)`. Zero when the
    /// input is already inside the ball. With a regularization weight `λ` the
    /// corresponding multiplier is `threshold / λ`.
    pub threshold: f64,
    /// Indices with `u[j] >= threshold` when the ball constraint is active
    /// (entries landing exactly on the threshold are kept), otherwise the
    /// indices with `x[j] > 0`. Sorted ascending.
    pub support: Vec<usize>,
}

impl L1BallProjection {
    pub fn multiplier(&self, lambda: f64) -> f64 {
        self.threshold / lambda
    }
}

pub fn project_l1_ball(u: &[f64], radius: f64, strategy: InnerProjection) -> Result<L1BallProjection> {
    if !radius.is_finite() || radius < 0.0 {
        return Err(Error::invalid(format!(
            "radius must be finite and non-negative, got {radius}"
        )));
    }
    if let Some(j) = u.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid(format!(
            "entry {j} is {}; input must be finite and non-negative",
            u[j]
        )));
    }
    let total: f64 = u.iter().sum();
    if total <= radius {
        return Ok(L1BallProjection {
            x: u.to_vec(),
            threshold: 0.0,
            support: (0..u.len()).filter(|&j| u[j] > 0.0).collect(),
        });
    }

    let mut state = ColumnState::new(strategy, u.iter().copied());
    state.advance(radius);
    let threshold = state.threshold(radius);
    Ok(L1BallProjection {
        x: u.iter().map(|&v| (v - threshold).max(0.0)).collect(),
        threshold,
        support: state.support(),
    })
}

/// Warm-startable projection state for one column.
///
/// Callers must only advance with non-decreasing radii that are strictly
/// below the column's ℓ₁ norm.
#[derive(Debug, Clone)]
pub(crate) enum ColumnState {
    Sort(SortedColumn),
    Michelot(ActiveSetColumn),
}

impl ColumnState {
    pub(crate) fn new(strategy: InnerProjection, values: impl Iterator<Item = f64>) -> Self {
        match strategy {
            InnerProjection::Sort => ColumnState::Sort(SortedColumn::new(values)),
            InnerProjection::Michelot => ColumnState::Michelot(ActiveSetColumn::new(values)),
        }
    }

    /// Refines the support for `radius`. Returns whether the support changed.
    #[inline]
    pub(crate) fn advance(&mut self, radius: f64) -> bool {
        match self {
            ColumnState::Sort(c) => c.advance(radius),
            ColumnState::Michelot(c) => c.advance(radius),
        }
    }

    #[inline]
    pub(crate) fn count(&self) -> usize {
        match self {
            ColumnState::Sort(c) => c.count,
            ColumnState::Michelot(c) => c.count,
        }
    }

    /// Sum of the entries currently in the support.
    #[inline]
    pub(crate) fn support_sum(&self) -> f64 {
        match self {
            ColumnState::Sort(c) => c.sum,
            ColumnState::Michelot(c) => c.sum,
        }
    }

    /// `(Σ_support u − radius) / |support|`, capped at the column maximum.
    #[inline]
    pub(crate) fn threshold(&self, radius: f64) -> f64 {
        let max = match self {
            ColumnState::Sort(c) => c.values[0],
            ColumnState::Michelot(c) => c.max,
        };
        ((self.support_sum() - radius) / self.count() as f64).min(max)
    }

    pub(crate) fn support(&self) -> Vec<usize> {
        let idx = match self {
            ColumnState::Sort(c) => &c.order[..c.count],
            ColumnState::Michelot(c) => &c.index[..c.count],
        };
        let mut out: Vec<usize> = idx.iter().map(|&j| j as usize).collect();
        out.sort_unstable();
        out
    }
}

/// Column sorted once in decreasing order; the support is always a prefix.
#[derive(Debug, Clone)]
pub(crate) struct SortedColumn {
    values: Vec<f64>,
    order: Vec<u32>,
    count: usize,
    sum: f64,
}

impl SortedColumn {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let mut pairs: Vec<(f64, u32)> = values.enumerate().map(|(j, v)| (v, j as u32)).collect();
        pairs.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let (values, order) = pairs.into_iter().unzip();
        Self {
            values,
            order,
            count: 0,
            sum: 0.0,
        }
    }

    fn advance(&mut self, radius: f64) -> bool {
        let before = self.count;
        if self.count == 0 {
            self.sum = self.values[0];
            self.count = 1;
        }
        // The next entry joins while it is at least the threshold of the current prefix.
        while self.count < self.values.len() {
            let next = self.values[self.count];
            if next * self.count as f64 >= self.sum - radius {
                self.sum += next;
                self.count += 1;
            } else {
                break;
            }
        }
        self.count != before
    }
}

/// Column partitioned in place into `[support | excluded]`.
#[derive(Debug, Clone)]
pub(crate) struct ActiveSetColumn {
    values: Vec<f64>,
    index: Vec<u32>,
    count: usize,
    sum: f64,
    /// Upper bound for any threshold; keeps round-off in `sum` from emptying
    /// the support when many entries tie at the maximum.
    max: f64,
}

impl ActiveSetColumn {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.collect();
        let index = (0..values.len() as u32).collect();
        let max = values.iter().copied().fold(0.0, f64::max);
        Self {
            values,
            index,
            count: 0,
            sum: 0.0,
            max,
        }
    }

    #[inline]
    fn swap(&mut self, a: usize, b: usize) {
        self.values.swap(a, b);
        self.index.swap(a, b);
    }

    fn advance(&mut self, radius: f64) -> bool {
        let before = self.count;
        if self.count == 0 {
            self.count = self.values.len();
            self.sum = self.values.iter().sum();
        } else {
            // The old support stays; excluded entries at or above the current
            // threshold are pulled in. This over-includes, the pruning below
            // removes the surplus.
            let theta = (self.sum - radius) / self.count as f64;
            for p in self.count..self.values.len() {
                if self.values[p] >= theta {
                    self.swap(p, self.count);
                    self.sum += self.values[self.count];
                    self.count += 1;
                }
            }
        }

        // Michelot passes over the newly admitted entries only.
        loop {
            let theta = ((self.sum - radius) / self.count as f64).min(self.max);
            let mut removed = false;
            let mut p = before;
            while p < self.count {
                if self.values[p] < theta {
                    self.count -= 1;
                    self.sum -= self.values[p];
                    self.swap(p, self.count);
                    removed = true;
                } else {
                    p += 1;
                }
            }
            if !removed {
                break;
            }
        }
        self.count != before
    }
}
