//! Scenario files: one JSON document describing the objects a subcommand
//! needs. Unknown constructors and malformed parameters surface as input
//! errors (exit code 2).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use probsub::agg::{
    from_additive_generator, make_family, make_tnorm, psi, symmetrize, AdditiveGenerator,
    Aggregator, Automorphism, GeneratorTarget, LatticeMode, Tnorm, TnormFamily,
};
use probsub::grid::Ddf;
use probsub::padd::{PaddSpec, PseudoAddition};
use probsub::psub::{self, PMean, ProbSubmeasure};
use probsub::sets::{NumericalSubmeasure, Ring, SetBits, Universe};

/// A parameter that may be the string `"inf"` (JSON numbers cannot carry
/// infinities).
#[derive(Clone, Copy, Debug)]
pub struct Lambda(pub f64);

impl<'de> Deserialize<'de> for Lambda {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Lambda;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a number or the string \"inf\"")
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<Lambda, E> {
                Ok(Lambda(v))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Lambda, E> {
                Ok(Lambda(v as f64))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Lambda, E> {
                Ok(Lambda(v as f64))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Lambda, E> {
                match v {
                    "inf" | "+inf" | "infinity" => Ok(Lambda(f64::INFINITY)),
                    other => other
                        .parse()
                        .map(Lambda)
                        .map_err(|_| E::custom(format!("bad parameter {other:?}"))),
                }
            }
        }
        deserializer.deserialize_any(V)
    }
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum RingSpec {
    Named(String),
    Generated { generators: Vec<Vec<String>> },
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum EtaSpec {
    Named(String),
    Table(BTreeMap<String, f64>),
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum PSpec {
    Geometric(String),
    Power(f64),
}

#[derive(Deserialize, Debug)]
pub struct LevelSpec {
    pub alpha: f64,
    pub eta: EtaSpec,
}

#[derive(Deserialize, Debug)]
#[serde(tag = "constructor", rename_all = "snake_case")]
pub enum GammaSpec {
    Universal,
    Weibull { lambda: f64, k: f64 },
    Table1 { family: String, lambda: Lambda },
    CopulaGen { phi: String, h: Option<String> },
    Pmean { p: PSpec },
    Ratio,
    AffineRatio,
    HalfStep,
    Arctan,
    TwoPointExp { a: f64, b: f64, c: f64 },
    CLambda { lambda: f64 },
    LevelFamily { levels: Vec<LevelSpec> },
}

#[derive(Deserialize, Debug)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AggSpec {
    Tnorm { name: String },
    Family { family: String, lambda: Lambda },
    Pmean { p: PSpec },
    Psi { h: String, base: Box<AggSpec> },
    Symmetrized { base: Box<AggSpec> },
    Join { a: Box<AggSpec>, b: Box<AggSpec> },
    Meet { a: Box<AggSpec>, b: Box<AggSpec> },
    Generator { t: String, target: String },
    CLambda { lambda: f64 },
}

#[derive(Deserialize, Debug)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DdfSpec {
    Dirac { a: f64 },
    Exp { rate: f64 },
    Weibull { lambda: f64, k: f64 },
    Ratio { c: f64 },
    Uniform { c: f64 },
}

#[derive(Deserialize, Debug)]
pub struct DescriptorSpec {
    #[serde(rename = "L")]
    pub l: PaddSpec,
    #[serde(rename = "A")]
    pub a: AggSpec,
}

#[derive(Deserialize, Debug)]
pub struct GridSpec {
    pub n: usize,
    pub x_max: f64,
}

/// The full scenario document; each subcommand reads the fields it needs.
#[derive(Deserialize, Debug, Default)]
#[serde(default)]
pub struct ScenarioFile {
    pub universe: Option<Vec<String>>,
    pub ring: Option<RingSpec>,
    pub eta: Option<EtaSpec>,
    pub gamma: Option<GammaSpec>,
    #[serde(rename = "L")]
    pub l: Option<PaddSpec>,
    #[serde(rename = "A")]
    pub a: Option<AggSpec>,
    pub d1: Option<DescriptorSpec>,
    pub d2: Option<DescriptorSpec>,
    pub grid: Option<GridSpec>,
    pub tol: Option<f64>,
    pub t: Option<String>,
    pub z_max: Option<f64>,
    #[serde(rename = "G")]
    pub g: Option<DdfSpec>,
    #[serde(rename = "H")]
    pub h: Option<DdfSpec>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub ladder: Option<usize>,
    pub samples: Option<usize>,
    pub mode: Option<String>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<ScenarioFile> {
        serde_json::from_str(text).context("malformed scenario JSON")
    }
}

pub fn build_universe(s: &ScenarioFile) -> Result<Universe> {
    let labels = s
        .universe
        .as_ref()
        .ok_or_else(|| anyhow!("scenario needs a \"universe\""))?;
    Ok(Universe::new(labels.clone())?)
}

pub fn build_ring(s: &ScenarioFile, universe: &Universe) -> Result<Ring> {
    match &s.ring {
        None => Ok(Ring::powerset(universe.clone())),
        Some(RingSpec::Named(name)) if name == "powerset" => Ok(Ring::powerset(universe.clone())),
        Some(RingSpec::Named(name)) => bail!("unknown ring spec {name:?}"),
        Some(RingSpec::Generated { generators }) => {
            let masks: Vec<SetBits> = generators
                .iter()
                .map(|labels| {
                    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                    universe.set_of(&refs)
                })
                .collect::<std::result::Result<_, _>>()?;
            Ok(Ring::generate(universe.clone(), &masks)?)
        }
    }
}

pub fn build_eta(spec: &EtaSpec, ring: &Ring) -> Result<NumericalSubmeasure> {
    match spec {
        EtaSpec::Named(name) => match name.as_str() {
            "cardinality" => Ok(NumericalSubmeasure::cardinality(ring)),
            "sqrt_cardinality" => Ok(NumericalSubmeasure::from_fn(ring, |m| {
                (m.card() as f64).sqrt()
            })?),
            "cardinality_squared" => Ok(NumericalSubmeasure::from_fn(ring, |m| {
                (m.card() as f64).powi(2)
            })?),
            other => bail!("unknown eta spec {other:?}"),
        },
        EtaSpec::Table(table) => {
            let pairs: Vec<(SetBits, f64)> = table
                .iter()
                .map(|(label, v)| Ok((ring.universe().set_from_label(label)?, *v)))
                .collect::<Result<_>>()?;
            Ok(NumericalSubmeasure::from_table(ring, &pairs)?)
        }
    }
}

pub fn scenario_eta(s: &ScenarioFile, ring: &Ring) -> Result<NumericalSubmeasure> {
    let spec = s
        .eta
        .as_ref()
        .ok_or_else(|| anyhow!("scenario needs an \"eta\" table"))?;
    build_eta(spec, ring)
}

pub fn build_gamma(s: &ScenarioFile, ring: &Ring) -> Result<ProbSubmeasure> {
    let spec = s
        .gamma
        .as_ref()
        .ok_or_else(|| anyhow!("scenario needs a \"gamma\" constructor"))?;
    Ok(match spec {
        GammaSpec::Universal => psub::universal(&scenario_eta(s, ring)?, ring)?,
        GammaSpec::Weibull { lambda, k } => {
            psub::weibull(&scenario_eta(s, ring)?, ring, *lambda, *k)?
        }
        GammaSpec::Table1 { family, lambda } => {
            let family = TnormFamily::from_str(family)?;
            psub::table1(family, lambda.0, &scenario_eta(s, ring)?, ring)?
        }
        GammaSpec::CopulaGen { phi, h } => {
            let phi = AdditiveGenerator::by_name(phi)?;
            let h = h.as_deref().map(Automorphism::by_name).transpose()?;
            psub::copula_gen_submeasure(&phi, &scenario_eta(s, ring)?, ring, h.as_ref())?
        }
        GammaSpec::Pmean { p } => {
            psub::pmean_submeasure(build_pmean(p)?, &scenario_eta(s, ring)?, ring)?
        }
        GammaSpec::Ratio => psub::ratio_submeasure(&scenario_eta(s, ring)?, ring)?,
        GammaSpec::AffineRatio => psub::affine_ratio_submeasure(&scenario_eta(s, ring)?, ring)?,
        GammaSpec::HalfStep => psub::half_step_submeasure(&scenario_eta(s, ring)?, ring)?,
        GammaSpec::Arctan => psub::arctan_submeasure(&scenario_eta(s, ring)?, ring)?,
        GammaSpec::TwoPointExp { a, b, c } => {
            psub::two_point_exponential(ring.universe(), *a, *b, *c)?
        }
        GammaSpec::CLambda { lambda } => {
            psub::c_lambda_submeasure(*lambda, &scenario_eta(s, ring)?, ring)?
        }
        GammaSpec::LevelFamily { levels } => {
            let built: Vec<(f64, NumericalSubmeasure)> = levels
                .iter()
                .map(|lv| Ok((lv.alpha, build_eta(&lv.eta, ring)?)))
                .collect::<Result<_>>()?;
            psub::level_family(&built, ring)?
        }
    })
}

fn build_pmean(p: &PSpec) -> Result<PMean> {
    match p {
        PSpec::Power(v) => Ok(PMean::Power(*v)),
        PSpec::Geometric(s) if s == "geometric" => Ok(PMean::Geometric),
        PSpec::Geometric(s) => bail!("unknown p-mean mode {s:?}"),
    }
}

pub fn build_padd(spec: &PaddSpec) -> Result<PseudoAddition> {
    Ok(PseudoAddition::make(spec.clone())?)
}

pub fn build_aggregator(spec: &AggSpec) -> Result<Aggregator> {
    Ok(match spec {
        AggSpec::Tnorm { name } => make_tnorm(Tnorm::from_str(name)?),
        AggSpec::Family { family, lambda } => {
            make_family(TnormFamily::from_str(family)?, lambda.0)?
        }
        AggSpec::Pmean { p } => match build_pmean(p)? {
            PMean::Geometric => probsub::agg::Aggregator::new(
                "geomean",
                probsub::agg::AggClass::Aggregation,
                |x: f64, y: f64| (x * y).sqrt(),
            ),
            PMean::Power(p) => probsub::agg::Aggregator::new(
                format!("pmean[{p}]"),
                probsub::agg::AggClass::Aggregation,
                move |x: f64, y: f64| (0.5 * (x.powf(p) + y.powf(p))).powf(1.0 / p),
            ),
        },
        AggSpec::Psi { h, base } => psi(&Automorphism::by_name(h)?, &build_aggregator(base)?),
        AggSpec::Symmetrized { base } => symmetrize(&build_aggregator(base)?),
        AggSpec::Join { a, b } => probsub::agg::agg_extrema(
            &build_aggregator(a)?,
            &build_aggregator(b)?,
            LatticeMode::Join,
        ),
        AggSpec::Meet { a, b } => probsub::agg::agg_extrema(
            &build_aggregator(a)?,
            &build_aggregator(b)?,
            LatticeMode::Meet,
        ),
        AggSpec::Generator { t, target } => {
            let gen = AdditiveGenerator::by_name(t)?;
            let target = match target.as_str() {
                "tnorm" => GeneratorTarget::Tnorm,
                "copula" => GeneratorTarget::Copula,
                other => bail!("unknown generator target {other:?}"),
            };
            from_additive_generator(&gen, target)?
        }
        AggSpec::CLambda { lambda } => probsub::agg::make_clambda(*lambda)?,
    })
}

pub fn build_ddf(spec: &DdfSpec) -> Result<Ddf> {
    Ok(match spec {
        DdfSpec::Dirac { a } => Ddf::dirac(*a)?,
        DdfSpec::Exp { rate } => {
            if !(*rate > 0.0) {
                bail!("exp DDF needs a positive rate");
            }
            let r = *rate;
            Ddf::closed(move |x| 1.0 - (-r * x).exp())
        }
        DdfSpec::Weibull { lambda, k } => {
            if !(*lambda > 0.0 && *k > 0.0) {
                bail!("weibull DDF needs positive parameters");
            }
            let (l, k) = (*lambda, *k);
            Ddf::closed(move |x| 1.0 - (-(x / l).powf(k)).exp())
        }
        DdfSpec::Ratio { c } => {
            if !(*c >= 0.0) {
                bail!("ratio DDF needs c >= 0");
            }
            let c = *c;
            Ddf::closed(move |x| x / (x + c))
        }
        DdfSpec::Uniform { c } => {
            if !(*c > 0.0) {
                bail!("uniform DDF needs c > 0");
            }
            let c = *c;
            Ddf::closed(move |x| (x / c).min(1.0))
        }
    })
}
