//! Grids on `[0, x_max]` and distance distribution functions.
//!
//! A distance distribution function (DDF) is a non-decreasing map from the
//! non-negative reals into `[0, 1]` that is 0 at every `x <= 0`. DDFs are
//! realized either by a closed-form evaluator or by samples over a [`Grid`];
//! sampled evaluation uses the left-continuous step rule, so grid-based
//! checks stay one-sided conservative.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::{clamp01, Error, Result};

pub const DEFAULT_GRID_N: usize = 256;
pub const DEFAULT_X_MAX: f64 = 10.0;

/// Strictly increasing knots `0 = x_0 < x_1 < ... < x_n = x_max`, `n >= 8`.
#[derive(Clone, Debug)]
pub struct Grid {
    knots: Arc<[f64]>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.knots, &other.knots) || self.knots == other.knots
    }
}

impl Grid {
    /// Uniform grid with `n` intervals on `[0, x_max]`.
    pub fn uniform(x_max: f64, n: usize) -> Result<Grid> {
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(Error::input(format!(
                "grid x_max must be positive, got {x_max}"
            )));
        }
        if n < 8 {
            return Err(Error::input(format!(
                "grid needs at least 8 intervals, got {n}"
            )));
        }
        let step = x_max / n as f64;
        let mut knots: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        knots[n] = x_max;
        Grid::from_knots(knots)
    }

    /// Build from explicit knots; validates the type invariants.
    pub fn from_knots(knots: Vec<f64>) -> Result<Grid> {
        if knots.len() < 9 {
            return Err(Error::input("grid needs at least 8 intervals".to_string()));
        }
        if knots[0] != 0.0 {
            return Err(Error::input("first knot must be exactly 0".to_string()));
        }
        if !knots.iter().all(|k| k.is_finite()) {
            return Err(Error::input("grid knots must be finite".to_string()));
        }
        if !knots.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::input(
                "grid knots must be strictly increasing".to_string(),
            ));
        }
        Ok(Grid {
            knots: knots.into(),
        })
    }

    pub fn default_grid() -> Grid {
        Grid::uniform(DEFAULT_X_MAX, DEFAULT_GRID_N).expect("default grid parameters are valid")
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of intervals (`knots` has `n + 1` entries).
    pub fn n(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn x_max(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    /// Midpoints of consecutive knots.
    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }
}

type ClosedFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Closed(ClosedFn),
    Sampled { grid: Grid, values: Arc<[f64]> },
}

/// A distance distribution function.
#[derive(Clone)]
pub struct Ddf {
    repr: Repr,
}

impl std::fmt::Debug for Ddf {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.repr {
            Repr::Closed(_) => write!(f, "Ddf::Closed"),
            Repr::Sampled { grid, .. } => write!(f, "Ddf::Sampled(n={})", grid.n()),
        }
    }
}

impl Ddf {
    /// Closed-form DDF from a raw formula, total on the positive reals.
    /// Evaluation forces 0 at `x <= 0` and clamps the output into `[0, 1]`.
    pub fn closed<F>(f: F) -> Ddf
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Ddf {
            repr: Repr::Closed(Arc::new(f)),
        }
    }

    /// The Dirac step: 1 strictly above `a`, 0 otherwise.
    pub fn dirac(a: f64) -> Result<Ddf> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::input(format!(
                "dirac jump must be a finite non-negative real, got {a}"
            )));
        }
        Ok(Ddf::closed(move |x| if x > a { 1.0 } else { 0.0 }))
    }

    /// Sampled DDF from raw knot values: the running maximum is applied and
    /// values are clamped into `[0, 1]`, so the invariants hold for any input.
    pub fn from_samples(grid: &Grid, raw: &[f64]) -> Result<Ddf> {
        if raw.len() != grid.knots().len() {
            return Err(Error::input(format!(
                "sample count {} does not match grid knot count {}",
                raw.len(),
                grid.knots().len()
            )));
        }
        let mut values = Vec::with_capacity(raw.len());
        let mut running = 0.0f64;
        for &v in raw {
            running = running.max(clamp01(v));
            values.push(running);
        }
        Ok(Ddf {
            repr: Repr::Sampled {
                grid: grid.clone(),
                values: values.into(),
            },
        })
    }

    /// Evaluate at `x`.
    ///
    /// Closed forms return the (guarded, clamped) formula value. Sampled DDFs
    /// use the left-continuous step rule: the value stored at the greatest
    /// knot strictly below `x` (0 when there is none); beyond `x_max` the
    /// last sampled value is reported.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return 0.0;
        }
        match &self.repr {
            Repr::Closed(f) => clamp01(f(x)),
            Repr::Sampled { grid, values } => {
                if x > grid.x_max() {
                    return *values.last().unwrap();
                }
                let below = grid.knots().partition_point(|&k| k < x);
                if below == 0 {
                    0.0
                } else {
                    values[below - 1]
                }
            }
        }
    }

    /// Resample onto `grid`. Sampling an already-sampled DDF over the same
    /// grid returns the stored values unchanged (idempotence); any other
    /// input is evaluated at the knots and monotonized.
    pub fn sample(&self, grid: &Grid) -> Ddf {
        match &self.repr {
            Repr::Sampled { grid: g, values } if g == grid => Ddf {
                repr: Repr::Sampled {
                    grid: grid.clone(),
                    values: values.clone(),
                },
            },
            Repr::Closed(f) => {
                let raw: Vec<f64> = grid
                    .knots()
                    .iter()
                    .map(|&k| if k <= 0.0 { 0.0 } else { clamp01(f(k)) })
                    .collect();
                Ddf::from_samples(grid, &raw).expect("length matches by construction")
            }
            Repr::Sampled { .. } => {
                let raw: Vec<f64> = grid.knots().iter().map(|&k| self.eval(k)).collect();
                Ddf::from_samples(grid, &raw).expect("length matches by construction")
            }
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.repr, Repr::Sampled { .. })
    }

    /// Stored knot values, when sampled.
    pub fn values(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Sampled { values, .. } => Some(values),
            Repr::Closed(_) => None,
        }
    }

    pub fn grid(&self) -> Option<&Grid> {
        match &self.repr {
            Repr::Sampled { grid, .. } => Some(grid),
            Repr::Closed(_) => None,
        }
    }

    /// CSV rendering of the sampled realization over `grid`: header `x,value`
    /// and one row per knot with 13 significant digits.
    pub fn to_csv(&self, grid: &Grid) -> String {
        let sampled = self.sample(grid);
        let values = sampled.values().unwrap();
        let mut out = String::from("x,value\n");
        for (k, v) in grid.knots().iter().zip(values.iter()) {
            let _ = writeln!(out, "{k:.12e},{v:.12e}");
        }
        out
    }
}

/// Pointwise `F <= G` at every knot and at midpoints of consecutive knots.
pub fn ddf_leq(f: &Ddf, g: &Ddf, grid: &Grid) -> bool {
    const TOL: f64 = 1e-12;
    grid.knots()
        .iter()
        .copied()
        .chain(grid.midpoints())
        .all(|x| f.eval(x) <= g.eval(x) + TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremaMode {
    Sup,
    Inf,
}

/// Pointwise supremum or infimum of a non-empty family at the knots,
/// monotonized into a valid sampled DDF.
pub fn ddf_extrema(family: &[Ddf], grid: &Grid, mode: ExtremaMode) -> Result<Ddf> {
    if family.is_empty() {
        return Err(Error::input("extrema of an empty DDF family".to_string()));
    }
    let sampled: Vec<Ddf> = family.iter().map(|f| f.sample(grid)).collect();
    let raw: Vec<f64> = (0..grid.knots().len())
        .map(|i| {
            let mut acc = sampled[0].values().unwrap()[i];
            for s in &sampled[1..] {
                let v = s.values().unwrap()[i];
                acc = match mode {
                    ExtremaMode::Sup => acc.max(v),
                    ExtremaMode::Inf => acc.min(v),
                };
            }
            acc
        })
        .collect();
    Ddf::from_samples(grid, &raw)
}
