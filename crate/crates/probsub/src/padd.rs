//! Pseudo-additions on the extended non-negative half-line.
//!
//! Supported forms: `K_alpha(x,y) = (x^a + y^a)^(1/a)`, `K_inf = max`,
//! operations generated by a strictly increasing bijection of the half-line,
//! and interval systems that act like a generated addition inside each
//! square and like `max` outside. Evaluators saturate at `+inf`; the partner
//! solver stays on finite values.

use serde::{Deserialize, Serialize};

use crate::report::{Flag, PointWitness};
use crate::{weyl_pairs, weyl_triples, Error, Result};

const SAMPLE_RANGE: f64 = 10.0;
const CHECK_TOL: f64 = 1e-9;
const PARTNER_TOL: f64 = 1e-10;

/// A named strictly increasing bijection of the extended half-line.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Bijection {
    Identity,
    Power {
        p: f64,
    },
    ExpM1,
    /// Piecewise-linear table through `(xs, ys)`, extended linearly beyond
    /// the last pair with the final slope. Must start at `(0, 0)`.
    Table {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
}

// Deserializes from either the tagged object form or a plain name string
// like "identity", "power(2)" or "expm1".
impl<'de> Deserialize<'de> for Bijection {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        #[serde(tag = "name", rename_all = "snake_case")]
        enum Tagged {
            Identity,
            Power { p: f64 },
            ExpM1,
            Table { xs: Vec<f64>, ys: Vec<f64> },
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Name(String),
            Tagged(Tagged),
        }
        match Wire::deserialize(deserializer)? {
            Wire::Name(s) => Bijection::parse(&s).map_err(serde::de::Error::custom),
            Wire::Tagged(t) => Ok(match t {
                Tagged::Identity => Bijection::Identity,
                Tagged::Power { p } => Bijection::Power { p },
                Tagged::ExpM1 => Bijection::ExpM1,
                Tagged::Table { xs, ys } => Bijection::Table { xs, ys },
            }),
        }
    }
}

impl Bijection {
    pub fn parse(name: &str) -> Result<Bijection> {
        match name {
            "identity" | "id" => return Ok(Bijection::Identity),
            "expm1" => return Ok(Bijection::ExpM1),
            _ => {}
        }
        if let Some(arg) = name
            .strip_prefix("power(")
            .and_then(|s| s.strip_suffix(')'))
        {
            let p: f64 = arg
                .parse()
                .map_err(|_| Error::input(format!("bad bijection {name:?}")))?;
            return Ok(Bijection::Power { p });
        }
        Err(Error::input(format!("unknown bijection {name:?}")))
    }

    fn validate(&self) -> Result<()> {
        match self {
            Bijection::Identity | Bijection::ExpM1 => Ok(()),
            Bijection::Power { p } => {
                if !(p.is_finite() && *p > 0.0) {
                    Err(Error::input(format!(
                        "power bijection needs p > 0, got {p}"
                    )))
                } else {
                    Ok(())
                }
            }
            Bijection::Table { xs, ys } => {
                if xs.len() != ys.len() || xs.len() < 2 {
                    return Err(Error::input(
                        "table bijection needs >= 2 (x, y) pairs".to_string(),
                    ));
                }
                if xs[0] != 0.0 || ys[0] != 0.0 {
                    return Err(Error::input(
                        "table bijection must start at (0, 0)".to_string(),
                    ));
                }
                let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1] && w[1].is_finite());
                if !increasing(xs) || !increasing(ys) {
                    return Err(Error::input(
                        "table bijection must be strictly increasing and finite".to_string(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Bijection::Identity => x,
            Bijection::Power { p } => x.powf(*p),
            Bijection::ExpM1 => x.exp_m1(),
            Bijection::Table { xs, ys } => table_eval(xs, ys, x),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            Bijection::Identity => y,
            Bijection::Power { p } => y.powf(1.0 / p),
            Bijection::ExpM1 => y.ln_1p(),
            Bijection::Table { xs, ys } => table_eval(ys, xs, y),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Bijection::Identity => "identity".to_string(),
            Bijection::Power { p } => format!("power({p})"),
            Bijection::ExpM1 => "expm1".to_string(),
            Bijection::Table { xs, .. } => format!("table[{}]", xs.len()),
        }
    }
}

fn table_eval(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        let slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        return ys[n - 1] + (x - xs[n - 1]) * slope;
    }
    let hi = xs.partition_point(|&k| k <= x);
    let (x0, x1) = (xs[hi - 1], xs[hi]);
    let (y0, y1) = (ys[hi - 1], ys[hi]);
    y0 + (x - x0) / (x1 - x0) * (y1 - y0)
}

/// One interval-system piece: inside the open square `(a, b)^2` the operation
/// is generated by the ramp `l(x) = ((x - a) / (b - x))^p`, an increasing
/// bijection of `[a, b]` onto the extended half-line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalPiece {
    pub a: f64,
    pub b: f64,
    #[serde(default = "one")]
    pub p: f64,
}

fn one() -> f64 {
    1.0
}

impl IntervalPiece {
    fn ell(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return f64::INFINITY;
        }
        ((x - self.a) / (self.b - x)).powf(self.p)
    }

    fn ell_inv(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.a;
        }
        if s.is_infinite() {
            return self.b;
        }
        let r = s.powf(1.0 / self.p);
        if r.is_infinite() {
            return self.b;
        }
        (self.a + self.b * r) / (1.0 + r)
    }

    fn contains(&self, x: f64) -> bool {
        self.a < x && x < self.b
    }
}

/// Declarative description of a pseudo-addition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PaddSpec {
    KAlpha { alpha: f64 },
    KInf,
    KEll { ell: Bijection },
    Intervals { pieces: Vec<IntervalPiece> },
}

/// A pseudo-addition: commutative, associative, jointly strictly increasing
/// operation with neutral 0 (continuity is assumed by construction, not
/// machine-checked).
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoAddition {
    spec: PaddSpec,
    label: String,
}

impl PseudoAddition {
    pub fn make(spec: PaddSpec) -> Result<PseudoAddition> {
        match &spec {
            PaddSpec::KAlpha { alpha } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::input(format!(
                        "k_alpha needs alpha > 0, got {alpha}"
                    )));
                }
            }
            PaddSpec::KInf => {}
            PaddSpec::KEll { ell } => ell.validate()?,
            PaddSpec::Intervals { pieces } => {
                for piece in pieces {
                    if !(piece.a >= 0.0
                        && piece.a < piece.b
                        && piece.b.is_finite()
                        && piece.p > 0.0)
                    {
                        return Err(Error::input(format!(
                            "interval piece ({}, {}) with p={} is malformed",
                            piece.a, piece.b, piece.p
                        )));
                    }
                }
                let mut sorted: Vec<&IntervalPiece> = pieces.iter().collect();
                sorted.sort_by(|l, r| l.a.total_cmp(&r.a));
                for w in sorted.windows(2) {
                    if w[1].a < w[0].b {
                        return Err(Error::input(format!(
                            "interval pieces ({}, {}) and ({}, {}) overlap",
                            w[0].a, w[0].b, w[1].a, w[1].b
                        )));
                    }
                }
            }
        }
        let label = match &spec {
            PaddSpec::KAlpha { alpha } => format!("K_{alpha}"),
            PaddSpec::KInf => "K_inf".to_string(),
            PaddSpec::KEll { ell } => format!("K_ell[{}]", ell.label()),
            PaddSpec::Intervals { pieces } => format!("intervals[{}]", pieces.len()),
        };
        Ok(PseudoAddition { spec, label })
    }

    pub fn k1() -> PseudoAddition {
        PseudoAddition::make(PaddSpec::KAlpha { alpha: 1.0 }).unwrap()
    }

    pub fn k_alpha(alpha: f64) -> Result<PseudoAddition> {
        PseudoAddition::make(PaddSpec::KAlpha { alpha })
    }

    pub fn k_inf() -> PseudoAddition {
        PseudoAddition::make(PaddSpec::KInf).unwrap()
    }

    pub fn spec(&self) -> &PaddSpec {
        &self.spec
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.max(0.0), v.max(0.0));
        match &self.spec {
            PaddSpec::KAlpha { alpha } => {
                if *alpha == 1.0 {
                    u + v
                } else if u == 0.0 {
                    v
                } else if v == 0.0 {
                    u
                } else if u.is_infinite() || v.is_infinite() {
                    f64::INFINITY
                } else {
                    (u.powf(*alpha) + v.powf(*alpha)).powf(1.0 / alpha)
                }
            }
            PaddSpec::KInf => u.max(v),
            PaddSpec::KEll { ell } => {
                if u == 0.0 {
                    v
                } else if v == 0.0 {
                    u
                } else {
                    ell.inverse(ell.eval(u) + ell.eval(v))
                }
            }
            PaddSpec::Intervals { pieces } => {
                match pieces.iter().find(|p| p.contains(u) && p.contains(v)) {
                    Some(p) => p.ell_inv(p.ell(u) + p.ell(v)),
                    None => u.max(v),
                }
            }
        }
    }

    /// Solve `L(u, v) = x` for `v >= 0` with `x > 0`. Returns the largest
    /// solution when the solution set is an interval (`max`-like regions);
    /// `None` exactly when `L(u, 0) = u > x`. Residual stays within 1e-10.
    pub fn partner(&self, x: f64, u: f64) -> Option<f64> {
        if !(x > 0.0) || u.is_nan() {
            return None;
        }
        let u = u.max(0.0);
        if u > x {
            return None;
        }
        let candidate = match &self.spec {
            PaddSpec::KAlpha { alpha } => {
                if *alpha == 1.0 {
                    x - u
                } else {
                    (x.powf(*alpha) - u.powf(*alpha)).max(0.0).powf(1.0 / alpha)
                }
            }
            PaddSpec::KInf => x,
            PaddSpec::KEll { ell } => {
                if u == 0.0 {
                    x
                } else {
                    ell.inverse((ell.eval(x) - ell.eval(u)).max(0.0))
                }
            }
            PaddSpec::Intervals { pieces } => {
                match pieces.iter().find(|p| p.contains(u) && p.contains(x)) {
                    Some(p) => p.ell_inv((p.ell(x) - p.ell(u)).max(0.0)),
                    None => x,
                }
            }
        };
        if (self.apply(u, candidate) - x).abs() <= PARTNER_TOL {
            return Some(candidate);
        }
        Some(self.bisect_partner(x, u))
    }

    fn bisect_partner(&self, x: f64, u: f64) -> f64 {
        // L(u, v) >= v, so v = x always overshoots or meets the target.
        let mut lo = 0.0f64;
        let mut hi = x;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.apply(u, mid) < x {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * x {
                break;
            }
        }
        hi
    }
}

/// Sampled verdicts for the pseudo-addition laws.
#[derive(Debug, Clone, Serialize)]
pub struct PaddReport {
    pub label: String,
    pub samples: usize,
    pub commutative: Flag,
    pub associative: Flag,
    pub jointly_strictly_increasing: Flag,
    pub neutral_zero: Flag,
    pub pass: bool,
}

/// Deterministic sample points in `[0, range]`, denser near 0 and covering
/// interval pieces when present.
fn sample_values(spec: Option<&PaddSpec>, count: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = vec![0.0, 0.5, 1.0, 2.0, SAMPLE_RANGE];
    if let Some(PaddSpec::Intervals { pieces }) = spec {
        for p in pieces {
            pts.push(p.a);
            pts.push(0.5 * (p.a + p.b));
            pts.push(p.b);
        }
    }
    let need = count.saturating_sub(pts.len());
    pts.extend(
        weyl_pairs(need.div_ceil(2)).flat_map(|(a, b)| [a * SAMPLE_RANGE, b * SAMPLE_RANGE]),
    );
    pts.truncate(count.max(8));
    pts
}

/// Sampled law check (`samples >= 100`): commutativity, associativity, joint
/// strict increase and neutrality of 0, with witnesses on failure.
pub fn check_padd(l: &PseudoAddition, samples: usize) -> Result<PaddReport> {
    check_padd_fn(l.label(), |u, v| l.apply(u, v), Some(l.spec()), samples)
}

/// Same check for a raw binary operation (useful for operations outside the
/// catalogue, e.g. to exhibit that `min` has no neutral 0).
pub fn check_padd_fn(
    label: &str,
    op: impl Fn(f64, f64) -> f64,
    spec: Option<&PaddSpec>,
    samples: usize,
) -> Result<PaddReport> {
    if samples < 100 {
        return Err(Error::input(format!(
            "check_padd needs samples >= 100, got {samples}"
        )));
    }
    let values = sample_values(spec, samples.min(64));

    let mut commutative = Flag::pass();
    'comm: for &u in &values {
        for &v in &values {
            if (op(u, v) - op(v, u)).abs() > CHECK_TOL {
                commutative = Flag::fail(PointWitness::pair(u, v, op(u, v), op(v, u)));
                break 'comm;
            }
        }
    }

    let mut neutral_zero = Flag::pass();
    for &u in &values {
        if (op(0.0, u) - u).abs() > CHECK_TOL || (op(u, 0.0) - u).abs() > CHECK_TOL {
            neutral_zero = Flag::fail(PointWitness::pair(0.0, u, op(0.0, u), u));
            break;
        }
    }

    let mut associative = Flag::pass();
    for (a, b, c) in weyl_triples(samples) {
        let (u, v, w) = (a * SAMPLE_RANGE, b * SAMPLE_RANGE, c * SAMPLE_RANGE);
        let lhs = op(op(u, v), w);
        let rhs = op(u, op(v, w));
        if (lhs - rhs).abs() > CHECK_TOL {
            associative = Flag::fail(PointWitness::triple(u, v, w, lhs, rhs));
            break;
        }
    }

    let mut jointly = Flag::pass();
    for (a, b) in weyl_pairs(samples) {
        let (u1, v1) = (a * SAMPLE_RANGE * 0.8, b * SAMPLE_RANGE * 0.8);
        let (du, dv) = (0.05 + a, 0.05 + b);
        let (lo, hi) = (op(u1, v1), op(u1 + du, v1 + dv));
        if !(lo < hi) {
            jointly = Flag::fail(PointWitness::rectangle(u1, v1, u1 + du, v1 + dv, hi, lo));
            break;
        }
    }

    let pass = commutative.pass && neutral_zero.pass && associative.pass && jointly.pass;
    Ok(PaddReport {
        label: label.to_string(),
        samples,
        commutative,
        associative,
        jointly_strictly_increasing: jointly,
        neutral_zero,
        pass,
    })
}

/// `L1 <= L2` on all sampled pairs (`samples >= 100`).
pub fn padd_leq(l1: &PseudoAddition, l2: &PseudoAddition, samples: usize) -> Result<bool> {
    if samples < 100 {
        return Err(Error::input(format!(
            "padd_leq needs samples >= 100, got {samples}"
        )));
    }
    let mut v1 = sample_values(Some(l1.spec()), 24);
    v1.extend(sample_values(Some(l2.spec()), 24));
    for &u in &v1 {
        for &v in &v1 {
            if l1.apply(u, v) > l2.apply(u, v) + CHECK_TOL {
                return Ok(false);
            }
        }
    }
    for (a, b) in weyl_pairs(samples) {
        let (u, v) = (a * SAMPLE_RANGE, b * SAMPLE_RANGE);
        if l1.apply(u, v) > l2.apply(u, v) + CHECK_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
