//! Binary aggregation functions on `[0,1]^2`.
//!
//! Landmark t-norms, the six parameterized families, automorphism
//! transforms, symmetrization, additive generators with pseudo-inverses,
//! sampled classification (semi-copula, quasi-copula, copula, t-norm
//! candidate) and the pointwise lattice operations. Classification verdicts
//! are necessary-condition checks on finite ladders, never proofs.

use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::report::{Flag, PointWitness};
use crate::{clamp01, Error, Result};

type BinaryFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type UnaryFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const FLAG_TOL: f64 = 1e-9;

/// Claimed classification of an aggregator, echoed in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AggClass {
    Aggregation,
    Tnorm,
    Semicopula,
    Quasicopula,
    Copula,
}

impl FromStr for AggClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aggregation" => Ok(AggClass::Aggregation),
            "tnorm" => Ok(AggClass::Tnorm),
            "semicopula" => Ok(AggClass::Semicopula),
            "quasicopula" => Ok(AggClass::Quasicopula),
            "copula" => Ok(AggClass::Copula),
            other => Err(Error::input(format!("unknown aggregator class {other:?}"))),
        }
    }
}

/// A total binary function on `[0,1]^2` with outputs clamped into `[0,1]`.
#[derive(Clone)]
pub struct Aggregator {
    raw: BinaryFn,
    label: String,
    claimed: AggClass,
}

impl std::fmt::Debug for Aggregator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Aggregator({})", self.label)
    }
}

impl Aggregator {
    pub fn new<F>(label: impl Into<String>, claimed: AggClass, f: F) -> Aggregator
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Aggregator {
            raw: Arc::new(f),
            label: label.into(),
            claimed,
        }
    }

    /// Clamped evaluation.
    pub fn apply(&self, x: f64, y: f64) -> f64 {
        clamp01((self.raw)(x, y))
    }

    /// How far the raw formula strayed outside `[0,1]` at `(x, y)`.
    pub fn clamp_excess(&self, x: f64, y: f64) -> f64 {
        let v = (self.raw)(x, y);
        if v.is_nan() {
            return 1.0;
        }
        (v - 1.0).max(-v).max(0.0)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn claimed_class(&self) -> AggClass {
        self.claimed
    }
}

/// The four landmark t-norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tnorm {
    M,
    Pi,
    W,
    D,
}

impl FromStr for Tnorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "m" | "min" => Ok(Tnorm::M),
            "Pi" | "pi" | "product" => Ok(Tnorm::Pi),
            "W" | "w" | "lukasiewicz" => Ok(Tnorm::W),
            "D" | "d" | "drastic" => Ok(Tnorm::D),
            other => Err(Error::input(format!("unknown t-norm {other:?}"))),
        }
    }
}

pub fn make_tnorm(name: Tnorm) -> Aggregator {
    match name {
        Tnorm::M => Aggregator::new("M", AggClass::Tnorm, |x, y| x.min(y)),
        Tnorm::Pi => Aggregator::new("Pi", AggClass::Tnorm, |x, y| x * y),
        Tnorm::W => Aggregator::new("W", AggClass::Tnorm, |x, y| (x + y - 1.0).max(0.0)),
        Tnorm::D => Aggregator::new("D", AggClass::Tnorm, |x, y| {
            if x.max(y) >= 1.0 {
                x.min(y)
            } else {
                0.0
            }
        }),
    }
}

/// The six parameterized t-norm families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TnormFamily {
    AczelAlsina,
    Dombi,
    Frank,
    Hamacher,
    Yager,
    SugenoWeber,
}

impl TnormFamily {
    pub const ALL: [TnormFamily; 6] = [
        TnormFamily::AczelAlsina,
        TnormFamily::Dombi,
        TnormFamily::Frank,
        TnormFamily::Hamacher,
        TnormFamily::Yager,
        TnormFamily::SugenoWeber,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TnormFamily::AczelAlsina => "aa",
            TnormFamily::Dombi => "dombi",
            TnormFamily::Frank => "frank",
            TnormFamily::Hamacher => "hamacher",
            TnormFamily::Yager => "yager",
            TnormFamily::SugenoWeber => "sw",
        }
    }
}

impl FromStr for TnormFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aa" | "aczel-alsina" | "aczelalsina" => Ok(TnormFamily::AczelAlsina),
            "dombi" => Ok(TnormFamily::Dombi),
            "frank" => Ok(TnormFamily::Frank),
            "hamacher" => Ok(TnormFamily::Hamacher),
            "yager" => Ok(TnormFamily::Yager),
            "sw" | "sugeno-weber" | "sugenoweber" => Ok(TnormFamily::SugenoWeber),
            other => Err(Error::input(format!("unknown t-norm family {other:?}"))),
        }
    }
}

fn family_label(family: TnormFamily, lambda: f64) -> String {
    if lambda.is_infinite() {
        format!("{}[inf]", family.name())
    } else {
        format!("{}[{lambda}]", family.name())
    }
}

/// Family member for an in-range parameter. Boundary parameters map to the
/// degenerate members: AA/Dombi/Yager 0, Hamacher +inf and SW -1 are the
/// drastic product; Frank 1 and SW +inf are the product; Frank +inf and SW 0
/// are the Lukasiewicz t-norm.
pub fn make_family(family: TnormFamily, lambda: f64) -> Result<Aggregator> {
    if lambda.is_nan() {
        return Err(Error::input("family parameter must not be NaN".to_string()));
    }
    let label = family_label(family, lambda);
    let out_of_range = |range: &str| {
        Err(Error::input(format!(
            "parameter {lambda} out of range {range} for family {}",
            family.name()
        )))
    };
    let drastic = make_tnorm(Tnorm::D);
    let product = make_tnorm(Tnorm::Pi);
    let lukasiewicz = make_tnorm(Tnorm::W);
    let relabel = |a: Aggregator| Aggregator {
        label: label.clone(),
        ..a
    };
    let agg = match family {
        TnormFamily::AczelAlsina => {
            if lambda < 0.0 || lambda.is_infinite() {
                return out_of_range("[0, +inf)");
            }
            if lambda == 0.0 {
                relabel(drastic)
            } else {
                Aggregator::new(label, AggClass::Tnorm, move |x: f64, y: f64| {
                    let s = (-x.ln()).powf(lambda) + (-y.ln()).powf(lambda);
                    (-s.powf(1.0 / lambda)).exp()
                })
            }
        }
        TnormFamily::Dombi => {
            if lambda < 0.0 || lambda.is_infinite() {
                return out_of_range("[0, +inf)");
            }
            if lambda == 0.0 {
                relabel(drastic)
            } else {
                Aggregator::new(label, AggClass::Tnorm, move |x: f64, y: f64| {
                    if x == 0.0 || y == 0.0 {
                        return 0.0;
                    }
                    let s = ((1.0 - x) / x).powf(lambda) + ((1.0 - y) / y).powf(lambda);
                    1.0 / (1.0 + s.powf(1.0 / lambda))
                })
            }
        }
        TnormFamily::Frank => {
            if lambda <= 0.0 {
                return out_of_range("(0, +inf]");
            }
            if lambda == 1.0 {
                relabel(product)
            } else if lambda.is_infinite() {
                relabel(lukasiewicz)
            } else {
                let ln_l = lambda.ln();
                Aggregator::new(label, AggClass::Tnorm, move |x: f64, y: f64| {
                    let px = (x * ln_l).exp_m1();
                    let py = (y * ln_l).exp_m1();
                    (1.0 + px * py / (lambda - 1.0)).ln() / ln_l
                })
            }
        }
        TnormFamily::Hamacher => {
            if lambda < 0.0 {
                return out_of_range("[0, +inf]");
            }
            if lambda.is_infinite() {
                relabel(drastic)
            } else if lambda == 0.0 {
                Aggregator::new(label, AggClass::Tnorm, |x: f64, y: f64| {
                    if x == 0.0 && y == 0.0 {
                        0.0
                    } else {
                        x * y / (x + y - x * y)
                    }
                })
            } else {
                Aggregator::new(label, AggClass::Tnorm, move |x: f64, y: f64| {
                    x * y / (lambda + (1.0 - lambda) * (x + y - x * y))
                })
            }
        }
        TnormFamily::Yager => {
            if lambda < 0.0 || lambda.is_infinite() {
                return out_of_range("[0, +inf)");
            }
            if lambda == 0.0 {
                relabel(drastic)
            } else {
                Aggregator::new(label, AggClass::Tnorm, move |x: f64, y: f64| {
                    let s = (1.0 - x).powf(lambda) + (1.0 - y).powf(lambda);
                    (1.0 - s.powf(1.0 / lambda)).max(0.0)
                })
            }
        }
        TnormFamily::SugenoWeber => {
            if lambda < -1.0 {
                return out_of_range("[-1, +inf]");
            }
            if lambda == -1.0 {
                relabel(drastic)
            } else if lambda == 0.0 {
                relabel(lukasiewicz)
            } else if lambda.is_infinite() {
                relabel(product)
            } else {
                Aggregator::new(label, AggClass::Tnorm, move |x: f64, y: f64| {
                    ((x + y - 1.0 + lambda * x * y) / (1.0 + lambda)).max(0.0)
                })
            }
        }
    };
    Ok(agg)
}

/// The one-parameter family of non-strict copulas
/// `max((p^2 uv - (1-u)(1-v)) / (p^2 - (p-1)^2 (1-u)(1-v)), 0)` for
/// `p >= 1`; the parameter 1 gives the Lukasiewicz t-norm.
pub fn make_clambda(p: f64) -> Result<Aggregator> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::input(format!(
            "non-strict copula family needs p in [1, +inf), got {p}"
        )));
    }
    if p == 1.0 {
        let w = make_tnorm(Tnorm::W);
        return Ok(Aggregator {
            label: "clambda[1]".to_string(),
            claimed: AggClass::Copula,
            ..w
        });
    }
    Ok(Aggregator::new(
        format!("clambda[{p}]"),
        AggClass::Copula,
        move |u: f64, v: f64| {
            let co = (1.0 - u) * (1.0 - v);
            let num = p * p * u * v - co;
            let den = p * p - (p - 1.0) * (p - 1.0) * co;
            (num / den).max(0.0)
        },
    ))
}

/// A strictly increasing bijection of `[0,1]` with its inverse.
#[derive(Clone)]
pub struct Automorphism {
    label: String,
    fwd: UnaryFn,
    inv: UnaryFn,
}

impl std::fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Automorphism({})", self.label)
    }
}

impl Automorphism {
    /// Validates on a sampled ladder: endpoints fixed, strictly increasing,
    /// and `inv(fwd(x))` within 1e-9 of the identity.
    pub fn new<F, G>(label: impl Into<String>, fwd: F, inv: G) -> Result<Automorphism>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let a = Automorphism {
            label: label.into(),
            fwd: Arc::new(fwd),
            inv: Arc::new(inv),
        };
        const M: usize = 64;
        if (a.forward(0.0)).abs() > 1e-12 || (a.forward(1.0) - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!(
                "automorphism {} must fix 0 and 1",
                a.label
            )));
        }
        let mut prev = a.forward(0.0);
        for i in 1..=M {
            let x = i as f64 / M as f64;
            let v = a.forward(x);
            if v <= prev {
                return Err(Error::input(format!(
                    "automorphism {} is not strictly increasing near x={x}",
                    a.label
                )));
            }
            if (a.inverse(v) - x).abs() > 1e-9 {
                return Err(Error::input(format!(
                    "automorphism {}: inverse round trip fails at x={x}",
                    a.label
                )));
            }
            prev = v;
        }
        Ok(a)
    }

    pub fn identity() -> Automorphism {
        Automorphism::new("id", |x| x, |x| x).unwrap()
    }

    /// `x^p` for `p > 0`.
    pub fn power(p: f64) -> Result<Automorphism> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::input(format!(
                "power automorphism needs p > 0, got {p}"
            )));
        }
        Automorphism::new(
            format!("pow[{p}]"),
            move |x: f64| x.powf(p),
            move |x: f64| x.powf(1.0 / p),
        )
    }

    /// `tan(pi x / 4)`, an automorphism of `[0,1]`.
    pub fn tan_quarter() -> Automorphism {
        use std::f64::consts::PI;
        Automorphism::new("tanq", |x| (PI * x / 4.0).tan(), |y| 4.0 / PI * y.atan()).unwrap()
    }

    pub fn by_name(name: &str) -> Result<Automorphism> {
        if name == "id" || name == "identity" {
            return Ok(Automorphism::identity());
        }
        if name == "tanq" || name == "tan_quarter" {
            return Ok(Automorphism::tan_quarter());
        }
        if let Some(arg) = name.strip_prefix("pow(").and_then(|s| s.strip_suffix(')')) {
            let p: f64 = arg
                .parse()
                .map_err(|_| Error::input(format!("bad power automorphism {name:?}")))?;
            return Automorphism::power(p);
        }
        Err(Error::input(format!("unknown automorphism {name:?}")))
    }

    pub fn forward(&self, x: f64) -> f64 {
        clamp01((self.fwd)(clamp01(x)))
    }

    pub fn inverse(&self, x: f64) -> f64 {
        clamp01((self.inv)(clamp01(x)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The inverse automorphism as a first-class value.
    pub fn inverted(&self) -> Automorphism {
        Automorphism {
            label: format!("inv({})", self.label),
            fwd: self.inv.clone(),
            inv: self.fwd.clone(),
        }
    }

    /// Sampled check of `h(xy) >= h(x) h(y)` on an `m x m` ladder.
    pub fn is_supermultiplicative(&self, m: usize) -> bool {
        let pts = ladder(m.max(16));
        pts.iter().all(|&x| {
            pts.iter()
                .all(|&y| self.forward(x * y) + FLAG_TOL >= self.forward(x) * self.forward(y))
        })
    }

    /// Sampled check that `g(x) = 1 - h(1 - x)` is subadditive on `[0,1]`.
    pub fn complement_is_subadditive(&self, m: usize) -> bool {
        let g = |x: f64| 1.0 - self.forward(1.0 - x);
        let pts = ladder(m.max(16));
        pts.iter().all(|&x| {
            pts.iter()
                .filter(|&&y| x + y <= 1.0)
                .all(|&y| g(x + y) <= g(x) + g(y) + FLAG_TOL)
        })
    }
}

/// Conjugation by an automorphism: `h^{-1}(A(h(x), h(y)))`.
pub fn psi(h: &Automorphism, a: &Aggregator) -> Aggregator {
    let hf = h.clone();
    let inner = a.clone();
    Aggregator::new(
        format!("psi[{}]({})", h.label(), a.label()),
        a.claimed_class(),
        move |x, y| hf.inverse(inner.apply(hf.forward(x), hf.forward(y))),
    )
}

/// Order-symmetric version: `max(A(u,v), A(v,u))`.
pub fn symmetrize(a: &Aggregator) -> Aggregator {
    let inner = a.clone();
    Aggregator::new(
        format!("sym({})", a.label()),
        a.claimed_class(),
        move |x, y| inner.apply(x, y).max(inner.apply(y, x)),
    )
}

/// Additive generator: continuous strictly decreasing `t` on `[0,1]` with
/// `t(1) = 0`; `t(0)` may be infinite. Convexity (required for copula
/// generators) is carried as a flag.
#[derive(Clone)]
pub struct AdditiveGenerator {
    label: String,
    t: UnaryFn,
    inv: UnaryFn,
    t0: f64,
    convex: bool,
}

impl std::fmt::Debug for AdditiveGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AdditiveGenerator({})", self.label)
    }
}

impl AdditiveGenerator {
    /// Validates `t(1) = 0` and strict decrease on a sampled ladder.
    pub fn new<F, G>(
        label: impl Into<String>,
        t: F,
        inv: G,
        convex: bool,
    ) -> Result<AdditiveGenerator>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let t0 = t(0.0);
        let gen = AdditiveGenerator {
            label: label.into(),
            t: Arc::new(t),
            inv: Arc::new(inv),
            t0,
            convex,
        };
        if gen.t(1.0).abs() > 1e-12 {
            return Err(Error::input(format!(
                "generator {}: t(1) must be 0",
                gen.label
            )));
        }
        const M: usize = 64;
        let mut prev = gen.t(1.0);
        for i in 1..=M {
            let x = 1.0 - i as f64 / M as f64;
            let v = gen.t(x);
            if v <= prev && v.is_finite() {
                return Err(Error::input(format!(
                    "generator {} is not strictly decreasing near x={x}",
                    gen.label
                )));
            }
            prev = v;
        }
        Ok(gen)
    }

    /// Generator from the forward map alone; the inverse is solved by
    /// bisection on `[0, 1]` to 1e-12.
    pub fn from_fn<F>(label: impl Into<String>, t: F, convex: bool) -> Result<AdditiveGenerator>
    where
        F: Fn(f64) -> f64 + Send + Sync + Clone + 'static,
    {
        let t_for_inv = t.clone();
        let inv = move |s: f64| -> f64 {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                if hi - lo <= 1e-13 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if t_for_inv(mid) > s {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        AdditiveGenerator::new(label, t, inv, convex)
    }

    /// `t(x) = 1 - x`, the generator of the Lukasiewicz t-norm.
    pub fn linear() -> AdditiveGenerator {
        AdditiveGenerator::new("linear", |x| 1.0 - x, |s| 1.0 - s, true).unwrap()
    }

    /// `t(x) = -ln x`, the generator of the product t-norm.
    pub fn neglog() -> AdditiveGenerator {
        AdditiveGenerator::new("neglog", |x: f64| -x.ln(), |s: f64| (-s).exp(), true).unwrap()
    }

    /// `t(x) = (-ln x)^p`; convex (a copula generator) for `p >= 1`.
    pub fn gumbel(p: f64) -> Result<AdditiveGenerator> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::input(format!(
                "gumbel generator needs p > 0, got {p}"
            )));
        }
        AdditiveGenerator::new(
            format!("gh[{p}]"),
            move |x: f64| (-x.ln()).powf(p),
            move |s: f64| (-s.powf(1.0 / p)).exp(),
            p >= 1.0,
        )
    }

    /// `t(x) = (1 - x)^p`; convex for `p >= 1`.
    pub fn yager(p: f64) -> Result<AdditiveGenerator> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::input(format!(
                "yager generator needs p > 0, got {p}"
            )));
        }
        AdditiveGenerator::new(
            format!("yager[{p}]"),
            move |x: f64| (1.0 - x).powf(p),
            move |s: f64| 1.0 - s.powf(1.0 / p),
            p >= 1.0,
        )
    }

    pub fn by_name(name: &str) -> Result<AdditiveGenerator> {
        match name {
            "linear" => return Ok(AdditiveGenerator::linear()),
            "neglog" => return Ok(AdditiveGenerator::neglog()),
            _ => {}
        }
        if let Some(arg) = name.strip_prefix("gh(").and_then(|s| s.strip_suffix(')')) {
            let p: f64 = arg
                .parse()
                .map_err(|_| Error::input(format!("bad generator {name:?}")))?;
            return AdditiveGenerator::gumbel(p);
        }
        if let Some(arg) = name
            .strip_prefix("yager(")
            .and_then(|s| s.strip_suffix(')'))
        {
            let p: f64 = arg
                .parse()
                .map_err(|_| Error::input(format!("bad generator {name:?}")))?;
            return AdditiveGenerator::yager(p);
        }
        Err(Error::input(format!("unknown generator {name:?}")))
    }

    pub fn t(&self, x: f64) -> f64 {
        (self.t)(clamp01(x))
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `t^{(-1)}(x) = t^{-1}(min(t(0), x))`, the pseudo-inverse on the
    /// extended half-line.
    pub fn pseudo_inverse(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x >= self.t0 {
            return 0.0;
        }
        clamp01((self.inv)(x))
    }

    /// Precompose with an automorphism: `(t . h)` with inverse `h^{-1} . t^{-1}`.
    /// Convexity of the composite is not implied, so the flag is dropped.
    pub fn compose_with(&self, h: &Automorphism) -> AdditiveGenerator {
        let t = self.t.clone();
        let inv = self.inv.clone();
        let hf = h.clone();
        let hg = h.clone();
        AdditiveGenerator {
            label: format!("{}.{}", self.label, h.label()),
            t: Arc::new(move |x| t(hf.forward(x))),
            inv: Arc::new(move |s| hg.inverse(inv(s))),
            t0: self.t0,
            convex: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorTarget {
    Tnorm,
    Copula,
}

/// `T(x,y) = t^{(-1)}(t(x) + t(y))`. Requesting a copula requires a convex
/// generator.
pub fn from_additive_generator(
    gen: &AdditiveGenerator,
    target: GeneratorTarget,
) -> Result<Aggregator> {
    if target == GeneratorTarget::Copula && !gen.is_convex() {
        return Err(Error::input(format!(
            "generator {} is not flagged convex; cannot build a copula",
            gen.label()
        )));
    }
    let class = match target {
        GeneratorTarget::Tnorm => AggClass::Tnorm,
        GeneratorTarget::Copula => AggClass::Copula,
    };
    let g = gen.clone();
    Ok(Aggregator::new(
        format!("gen({})", gen.label()),
        class,
        move |x, y| g.pseudo_inverse(g.t(x) + g.t(y)),
    ))
}

fn ladder(m: usize) -> Vec<f64> {
    (0..m).map(|i| i as f64 / (m - 1) as f64).collect()
}

/// Sampled classification flags for an aggregator over an `m x m` ladder.
#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub label: String,
    pub ladder: usize,
    pub monotone: Flag,
    pub boundary: Flag,
    pub neutral_one: Flag,
    pub one_lipschitz: Flag,
    pub two_increasing: Flag,
    pub commutative: Flag,
    pub associative_sampled: Flag,
    pub max_clamp_excess: f64,
    /// Set when the raw formula strayed outside `[0, 1]` by more than 1e-9
    /// somewhere on the ladder; outputs are clamped either way.
    pub formula_error: bool,
    pub is_aggregation: bool,
    pub is_semicopula: bool,
    pub is_quasicopula: bool,
    pub is_copula: bool,
    pub is_tnorm_candidate: bool,
}

/// Necessary-condition verdicts on an `m x m` sample (`m >= 16`), with a
/// witness for every failed flag. Never a proof.
pub fn classify(a: &Aggregator, m: usize) -> Result<ClassReport> {
    if m < 16 {
        return Err(Error::input(format!(
            "classification ladder must have m >= 16, got {m}"
        )));
    }
    let pts = ladder(m);
    let step = pts[1] - pts[0];
    let mut grid = vec![0.0f64; m * m];
    let mut max_excess = 0.0f64;
    for (i, &x) in pts.iter().enumerate() {
        for (j, &y) in pts.iter().enumerate() {
            grid[i * m + j] = a.apply(x, y);
            max_excess = max_excess.max(a.clamp_excess(x, y));
        }
    }
    let at = |i: usize, j: usize| grid[i * m + j];

    let mut monotone = Flag::pass();
    'mono: for i in 0..m {
        for j in 0..m {
            if i + 1 < m && at(i + 1, j) < at(i, j) - FLAG_TOL {
                monotone = Flag::fail(PointWitness::rectangle(
                    pts[i],
                    pts[j],
                    pts[i + 1],
                    pts[j],
                    at(i + 1, j),
                    at(i, j),
                ));
                break 'mono;
            }
            if j + 1 < m && at(i, j + 1) < at(i, j) - FLAG_TOL {
                monotone = Flag::fail(PointWitness::rectangle(
                    pts[i],
                    pts[j],
                    pts[i],
                    pts[j + 1],
                    at(i, j + 1),
                    at(i, j),
                ));
                break 'mono;
            }
        }
    }

    let boundary = if at(0, 0).abs() <= FLAG_TOL && (at(m - 1, m - 1) - 1.0).abs() <= FLAG_TOL {
        Flag::pass()
    } else if at(0, 0).abs() > FLAG_TOL {
        Flag::fail(PointWitness::pair(0.0, 0.0, at(0, 0), 0.0))
    } else {
        Flag::fail(PointWitness::pair(1.0, 1.0, at(m - 1, m - 1), 1.0))
    };

    let mut neutral_one = Flag::pass();
    for (i, &x) in pts.iter().enumerate() {
        if (at(i, m - 1) - x).abs() > FLAG_TOL {
            neutral_one = Flag::fail(PointWitness::pair(x, 1.0, at(i, m - 1), x));
            break;
        }
        if (at(m - 1, i) - x).abs() > FLAG_TOL {
            neutral_one = Flag::fail(PointWitness::pair(1.0, x, at(m - 1, i), x));
            break;
        }
    }

    // 1-Lipschitz on adjacent ladder steps; telescoping extends the bound to
    // every ladder pair, so adjacent checks are enough.
    let mut one_lipschitz = Flag::pass();
    'lip: for i in 0..m {
        for j in 0..m {
            if i + 1 < m && (at(i + 1, j) - at(i, j)).abs() > step + FLAG_TOL {
                one_lipschitz = Flag::fail(PointWitness::rectangle(
                    pts[i],
                    pts[j],
                    pts[i + 1],
                    pts[j],
                    (at(i + 1, j) - at(i, j)).abs(),
                    step,
                ));
                break 'lip;
            }
            if j + 1 < m && (at(i, j + 1) - at(i, j)).abs() > step + FLAG_TOL {
                one_lipschitz = Flag::fail(PointWitness::rectangle(
                    pts[i],
                    pts[j],
                    pts[i],
                    pts[j + 1],
                    (at(i, j + 1) - at(i, j)).abs(),
                    step,
                ));
                break 'lip;
            }
        }
    }

    // 2-increasing on elementary cells; rectangle sums telescope likewise.
    let mut two_increasing = Flag::pass();
    'incr: for i in 0..m - 1 {
        for j in 0..m - 1 {
            let vol = at(i + 1, j + 1) - at(i, j + 1) - at(i + 1, j) + at(i, j);
            if vol < -FLAG_TOL {
                two_increasing = Flag::fail(PointWitness::rectangle(
                    pts[i],
                    pts[j],
                    pts[i + 1],
                    pts[j + 1],
                    vol,
                    0.0,
                ));
                break 'incr;
            }
        }
    }

    let mut commutative = Flag::pass();
    'comm: for i in 0..m {
        for j in 0..i {
            if (at(i, j) - at(j, i)).abs() > FLAG_TOL {
                commutative = Flag::fail(PointWitness::pair(pts[i], pts[j], at(i, j), at(j, i)));
                break 'comm;
            }
        }
    }

    // associativity over the m^3 ladder sample
    let mut associative = Flag::pass();
    'assoc: for &x in &pts {
        for &y in &pts {
            for &z in &pts {
                let lhs = a.apply(a.apply(x, y), z);
                let rhs = a.apply(x, a.apply(y, z));
                if (lhs - rhs).abs() > FLAG_TOL {
                    associative = Flag::fail(PointWitness::triple(x, y, z, lhs, rhs));
                    break 'assoc;
                }
            }
        }
    }

    let is_aggregation = monotone.pass && boundary.pass;
    let is_semicopula = is_aggregation && neutral_one.pass;
    let is_quasicopula = is_semicopula && one_lipschitz.pass;
    let is_copula = is_semicopula && two_increasing.pass;
    let is_tnorm_candidate = is_semicopula && commutative.pass && associative.pass;

    Ok(ClassReport {
        label: a.label().to_string(),
        ladder: m,
        monotone,
        boundary,
        neutral_one,
        one_lipschitz,
        two_increasing,
        commutative,
        associative_sampled: associative,
        max_clamp_excess: max_excess,
        formula_error: max_excess > FLAG_TOL,
        is_aggregation,
        is_semicopula,
        is_quasicopula,
        is_copula,
        is_tnorm_candidate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeMode {
    Join,
    Meet,
}

/// Pointwise join (max) or meet (min) of two aggregators.
pub fn agg_extrema(a: &Aggregator, b: &Aggregator, mode: LatticeMode) -> Aggregator {
    let (fa, fb) = (a.clone(), b.clone());
    let label = match mode {
        LatticeMode::Join => format!("join({},{})", a.label(), b.label()),
        LatticeMode::Meet => format!("meet({},{})", a.label(), b.label()),
    };
    Aggregator::new(label, AggClass::Aggregation, move |x, y| {
        let (u, v) = (fa.apply(x, y), fb.apply(x, y));
        match mode {
            LatticeMode::Join => u.max(v),
            LatticeMode::Meet => u.min(v),
        }
    })
}

/// `A <= B` at all `m x m` ladder points (tolerance 1e-12).
pub fn agg_leq(a: &Aggregator, b: &Aggregator, m: usize) -> bool {
    let m = m.max(16);
    let pts = ladder(m);
    pts.iter()
        .all(|&x| pts.iter().all(|&y| a.apply(x, y) <= b.apply(x, y) + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn landmark_tnorm_values() {
        let w = make_tnorm(Tnorm::W);
        assert!((w.apply(0.5, 0.7) - 0.2).abs() < 1e-15);
        let d = make_tnorm(Tnorm::D);
        assert_eq!(d.apply(0.5, 0.7), 0.0);
        assert_eq!(d.apply(1.0, 0.7), 0.7);
        let m = make_tnorm(Tnorm::M);
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            assert_eq!(m.apply(x, 1.0), x);
        }
    }

    #[test]
    fn family_members_match_known_identities() {
        let yager1 = make_family(TnormFamily::Yager, 1.0).unwrap();
        let w = make_tnorm(Tnorm::W);
        assert!((yager1.apply(0.3, 0.9) - 0.2).abs() < 1e-12);
        assert!((yager1.apply(0.3, 0.9) - w.apply(0.3, 0.9)).abs() < 1e-12);

        let ham0 = make_family(TnormFamily::Hamacher, 0.0).unwrap();
        assert!((ham0.apply(0.5, 0.5) - 0.25 / 0.75).abs() < 1e-12);
        assert_eq!(ham0.apply(0.0, 0.0), 0.0);

        let aa1 = make_family(TnormFamily::AczelAlsina, 1.0).unwrap();
        assert!((aa1.apply(0.5, 0.5) - 0.25).abs() < 1e-12);

        // degenerate members
        let frank1 = make_family(TnormFamily::Frank, 1.0).unwrap();
        assert!((frank1.apply(0.4, 0.7) - 0.28).abs() < 1e-15);
        let frank_inf = make_family(TnormFamily::Frank, f64::INFINITY).unwrap();
        assert!((frank_inf.apply(0.5, 0.7) - 0.2).abs() < 1e-15);
        let sw0 = make_family(TnormFamily::SugenoWeber, 0.0).unwrap();
        assert!((sw0.apply(0.5, 0.7) - 0.2).abs() < 1e-15);
        let sw_m1 = make_family(TnormFamily::SugenoWeber, -1.0).unwrap();
        assert_eq!(sw_m1.apply(0.5, 0.7), 0.0);
    }

    #[test]
    fn family_parameter_ranges() {
        assert!(make_family(TnormFamily::AczelAlsina, -0.5).is_err());
        assert!(make_family(TnormFamily::AczelAlsina, f64::INFINITY).is_err());
        assert!(make_family(TnormFamily::Frank, 0.0).is_err());
        assert!(make_family(TnormFamily::Frank, f64::INFINITY).is_ok());
        assert!(make_family(TnormFamily::Hamacher, f64::INFINITY).is_ok());
        assert!(make_family(TnormFamily::SugenoWeber, -1.5).is_err());
        assert!(make_family(TnormFamily::Yager, f64::INFINITY).is_err());
        assert!(make_family(TnormFamily::Dombi, f64::NAN).is_err());
    }

    #[test]
    fn families_pass_tnorm_necessary_conditions() {
        let members = [
            (TnormFamily::AczelAlsina, 0.5),
            (TnormFamily::AczelAlsina, 2.0),
            (TnormFamily::Dombi, 1.0),
            (TnormFamily::Frank, 2.0),
            (TnormFamily::Hamacher, 2.0),
            (TnormFamily::Yager, 2.0),
            (TnormFamily::SugenoWeber, 1.0),
        ];
        for (fam, l) in members {
            let a = make_family(fam, l).unwrap();
            let report = classify(&a, 24).unwrap();
            assert!(report.monotone.pass, "{} monotone", a.label());
            assert!(report.commutative.pass, "{} commutative", a.label());
            assert!(report.neutral_one.pass, "{} neutral", a.label());
            assert!(report.associative_sampled.pass, "{} associative", a.label());
        }
    }

    #[test]
    fn psi_examples() {
        let pi = make_tnorm(Tnorm::Pi);
        let m = make_tnorm(Tnorm::M);
        let id = Automorphism::identity();
        let sq = Automorphism::power(2.0).unwrap();

        let same = psi(&id, &pi);
        let transformed_m = psi(&sq, &m);
        let transformed_pi = psi(&sq, &pi);
        for i in 0..=8 {
            for j in 0..=8 {
                let (x, y) = (i as f64 / 8.0, j as f64 / 8.0);
                assert!((same.apply(x, y) - pi.apply(x, y)).abs() < 1e-12);
                assert!((transformed_m.apply(x, y) - m.apply(x, y)).abs() < 1e-9);
            }
        }
        assert!((transformed_pi.apply(0.5, 0.5) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn psi_is_a_group_action() {
        let h = Automorphism::tan_quarter();
        let a = make_family(TnormFamily::Frank, 2.0).unwrap();
        let roundtrip = psi(&h, &psi(&h.inverted(), &a));
        for i in 0..=16 {
            for j in 0..=16 {
                let (x, y) = (i as f64 / 16.0, j as f64 / 16.0);
                assert!((roundtrip.apply(x, y) - a.apply(x, y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn psi_preserves_semicopula_flags() {
        let h = Automorphism::power(2.0).unwrap();
        for base in [
            make_tnorm(Tnorm::Pi),
            make_tnorm(Tnorm::M),
            make_tnorm(Tnorm::W),
        ] {
            let t = psi(&h, &base);
            let r = classify(&t, 24).unwrap();
            assert!(
                r.is_semicopula,
                "psi of {} stays a semi-copula",
                base.label()
            );
        }
    }

    #[test]
    fn symmetrize_examples() {
        let asym = Aggregator::new("uv2", AggClass::Aggregation, |u, v| u * v * v);
        let sym = symmetrize(&asym);
        assert!((sym.apply(0.5, 0.8) - 0.32).abs() < 1e-15);
        let twice = symmetrize(&sym);
        for (x, y) in [(0.1, 0.9), (0.7, 0.2), (0.5, 0.5)] {
            assert_eq!(sym.apply(x, y), twice.apply(x, y));
            assert_eq!(sym.apply(x, y), sym.apply(y, x));
        }
        let pi = make_tnorm(Tnorm::Pi);
        let sym_pi = symmetrize(&pi);
        assert_eq!(sym_pi.apply(0.3, 0.8), pi.apply(0.3, 0.8));
    }

    #[test]
    fn pseudo_inverse_examples() {
        let linear = AdditiveGenerator::linear();
        assert!((linear.pseudo_inverse(0.3) - 0.7).abs() < 1e-15);
        assert_eq!(linear.pseudo_inverse(2.5), 0.0);
        let neglog = AdditiveGenerator::neglog();
        assert!((neglog.pseudo_inverse(1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(neglog.pseudo_inverse(0.0), 1.0);
        assert_eq!(neglog.pseudo_inverse(f64::INFINITY), 0.0);
    }

    #[test]
    fn bisection_inverse_matches_exact_inverse() {
        let exact = AdditiveGenerator::linear();
        let solved = AdditiveGenerator::from_fn("linear-b", |x| 1.0 - x, true).unwrap();
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            assert!((exact.pseudo_inverse(s) - solved.pseudo_inverse(s)).abs() < 1e-10);
        }
    }

    #[test]
    fn generators_reproduce_w_and_pi() {
        let w_gen =
            from_additive_generator(&AdditiveGenerator::linear(), GeneratorTarget::Tnorm).unwrap();
        let pi_gen =
            from_additive_generator(&AdditiveGenerator::neglog(), GeneratorTarget::Tnorm).unwrap();
        let w = make_tnorm(Tnorm::W);
        let pi = make_tnorm(Tnorm::Pi);
        assert!((w_gen.apply(0.5, 0.7) - 0.2).abs() < 1e-12);
        for i in 0..=32 {
            for j in 0..=32 {
                let (x, y) = (i as f64 / 32.0, j as f64 / 32.0);
                assert!((w_gen.apply(x, y) - w.apply(x, y)).abs() < 1e-12);
                assert!((pi_gen.apply(x, y) - pi.apply(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gumbel_generator_squared_value() {
        let c = from_additive_generator(
            &AdditiveGenerator::gumbel(2.0).unwrap(),
            GeneratorTarget::Copula,
        )
        .unwrap();
        let expect = 2.0f64.powf(-2.0f64.sqrt());
        assert!((c.apply(0.5, 0.5) - expect).abs() < 1e-12);
        assert!((expect - 0.375214).abs() < 1e-6);
        // non-convex generator cannot claim a copula
        let bad = AdditiveGenerator::gumbel(0.5).unwrap();
        assert!(from_additive_generator(&bad, GeneratorTarget::Copula).is_err());
        assert!(from_additive_generator(&bad, GeneratorTarget::Tnorm).is_ok());
    }

    #[test]
    fn yager_generator_matches_family() {
        let via_gen = from_additive_generator(
            &AdditiveGenerator::yager(2.0).unwrap(),
            GeneratorTarget::Tnorm,
        )
        .unwrap();
        let family = make_family(TnormFamily::Yager, 2.0).unwrap();
        for i in 0..=24 {
            for j in 0..=24 {
                let (x, y) = (i as f64 / 24.0, j as f64 / 24.0);
                assert!((via_gen.apply(x, y) - family.apply(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn classify_product_sets_all_flags() {
        let r = classify(&make_tnorm(Tnorm::Pi), 32).unwrap();
        assert!(r.is_aggregation && r.is_semicopula && r.is_quasicopula && r.is_copula);
        assert!(r.is_tnorm_candidate);
        assert!(r.max_clamp_excess <= 1e-15);
    }

    #[test]
    fn classify_drastic_fails_lipschitz_near_the_corner() {
        let r = classify(&make_tnorm(Tnorm::D), 32).unwrap();
        assert!(r.is_semicopula);
        assert!(!r.one_lipschitz.pass);
        let w = r.one_lipschitz.witness.unwrap();
        // witness straddles the boundary max(x, y) = 1
        assert!(w.x2.unwrap().max(w.y2.unwrap()) >= 1.0 - 1e-12);
    }

    #[test]
    fn classify_arithmetic_mean_fails_neutrality() {
        let mean = Aggregator::new("pmean[1]", AggClass::Aggregation, |x, y| 0.5 * (x + y));
        let r = classify(&mean, 32).unwrap();
        assert!(!r.neutral_one.pass);
        let w = r.neutral_one.witness.unwrap();
        assert_eq!((w.x, w.y), (0.0, 1.0));
        assert!((w.got - 0.5).abs() < 1e-15);
    }

    #[test]
    fn classify_rejects_tiny_ladder() {
        assert!(classify(&make_tnorm(Tnorm::M), 8).is_err());
    }

    #[test]
    fn classify_flags_formulas_that_escape_the_unit_interval() {
        let noisy = Aggregator::new("overshoot", AggClass::Aggregation, |x, y| 1.1 * x * y);
        let r = classify(&noisy, 24).unwrap();
        assert!(r.formula_error);
        assert!(r.max_clamp_excess > 0.09);
        let clean = classify(&make_tnorm(Tnorm::W), 24).unwrap();
        assert!(!clean.formula_error);
    }

    #[test]
    fn extrema_and_order() {
        let (m, w, d, pi) = (
            make_tnorm(Tnorm::M),
            make_tnorm(Tnorm::W),
            make_tnorm(Tnorm::D),
            make_tnorm(Tnorm::Pi),
        );
        let join_ww = agg_extrema(&w, &w, LatticeMode::Join);
        let meet_mw = agg_extrema(&m, &w, LatticeMode::Meet);
        let join_wd = agg_extrema(&w, &d, LatticeMode::Join);
        for i in 0..=16 {
            for j in 0..=16 {
                let (x, y) = (i as f64 / 16.0, j as f64 / 16.0);
                assert_eq!(join_ww.apply(x, y), w.apply(x, y));
                assert_eq!(meet_mw.apply(x, y), w.apply(x, y));
            }
        }
        assert!((join_wd.apply(0.5, 0.7) - 0.2).abs() < 1e-15);

        for t in [&m, &w, &pi] {
            assert!(agg_leq(&d, t, 32), "D below {}", t.label());
            assert!(agg_leq(t, &m, 32), "{} below M", t.label());
        }
        assert!(!agg_leq(&pi, &w, 32));
        assert!(pi.apply(0.5, 0.7) > w.apply(0.5, 0.7)); // the witness pair
    }

    #[test]
    fn extrema_of_semicopulas_stays_semicopula() {
        let s1 = make_family(TnormFamily::Yager, 2.0).unwrap();
        let s2 = make_family(TnormFamily::Hamacher, 0.5).unwrap();
        for mode in [LatticeMode::Join, LatticeMode::Meet] {
            let s = agg_extrema(&s1, &s2, mode);
            assert!(classify(&s, 24).unwrap().is_semicopula);
        }
    }

    #[test]
    fn non_strict_copula_family() {
        // parameter 1 collapses to the Lukasiewicz t-norm
        let c1 = make_clambda(1.0).unwrap();
        let w = make_tnorm(Tnorm::W);
        for i in 0..=16 {
            for j in 0..=16 {
                let (x, y) = (i as f64 / 16.0, j as f64 / 16.0);
                assert_eq!(c1.apply(x, y), w.apply(x, y));
            }
        }
        let c2 = make_clambda(2.0).unwrap();
        let r = classify(&c2, 32).unwrap();
        assert!(r.is_copula, "{r:?}");
        assert!(!r.is_tnorm_candidate || r.associative_sampled.pass);
        // the family grows with the parameter, from W toward the Hamacher
        // limit, staying under the minimum like every copula
        let c5 = make_clambda(5.0).unwrap();
        assert!(agg_leq(&w, &c2, 32));
        assert!(agg_leq(&c2, &c5, 32));
        assert!(agg_leq(
            &c5,
            &make_family(TnormFamily::Hamacher, 0.0).unwrap(),
            32
        ));
        assert!(agg_leq(&c5, &make_tnorm(Tnorm::M), 32));
        assert!(make_clambda(0.5).is_err());
        assert!(make_clambda(f64::INFINITY).is_err());
    }

    #[test]
    fn automorphism_validation_and_predicates() {
        assert!(Automorphism::new("bad", |x| 1.0 - x, |x| 1.0 - x).is_err());
        assert!(Automorphism::new("shift", |x| 0.5 * x + 0.1, |x| (x - 0.1) / 0.5).is_err());
        assert!(Automorphism::power(0.0).is_err());

        // powers are supermultiplicative; 1 - (1-x)^p is subadditive only for p >= 1
        let sq = Automorphism::power(2.0).unwrap();
        let sqrt = Automorphism::power(0.5).unwrap();
        assert!(sq.is_supermultiplicative(32));
        assert!(sqrt.is_supermultiplicative(32));
        assert!(sq.complement_is_subadditive(32));
        assert!(!sqrt.complement_is_subadditive(32));
    }
}
