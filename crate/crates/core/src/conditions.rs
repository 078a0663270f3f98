//! Falsification of contractive conditions on coupled operators.
//!
//! Every checker here searches comparable quadruples `(x, y, u, v)` with
//! `x ≥ u`, `y ≤ v` (that is, `V = (u, v) ≤₂ Y = (x, y)`) for a violation.
//! On enumerable spaces the search is exhaustive and exact; otherwise it is
//! sampled, and a `holds_on_samples` verdict only means no refutation was
//! found. The regimes nest:
//!
//! ```text
//! banach_k:     d(F(x,y), F(u,v)) ≤ k · h                                   (h = d₂(Y, V))
//! samet_mk:     ε ≤ h < ε + δ(ε)  ⇒  d(F(x,y), F(u,v)) < ε
//! symmetric_mk: ε ≤ h < ε + δ(ε)  ⇒  ½[d(F(x,y), F(u,v)) + d(F(y,x), F(v,u))] < ε
//! ```
//!
//! with `δ(ε) = (1/k − 1)ε` carrying a Banach constant into both band
//! conditions.

use crate::error::{Error, Result};
use crate::operator::{product_t, CoupledOperator};
use crate::scalar::{ser, ser_opt, Scalar};
use crate::seeds;
use crate::space::{d2_unchecked, product_le, OrderedMetricSpace, PairPoint, ProductSpace, Slice};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

/// Sampled checks need at least this many comparable configurations before
/// a pass is reported.
pub const MIN_COMPARABLE: usize = 10;

/// Each degenerate slice (`x = u`, `y = v`) gets `samples / DEGENERATE_SHARE`
/// constructed quadruples ahead of the free random phase.
pub const DEGENERATE_SHARE: usize = 10;

/// `δ` search interval for [`estimate_delta_curve`] is `(0, DELTA_CAP_FACTOR · ε]`.
pub const DELTA_CAP_FACTOR: f64 = 10.0;

const BISECTION_STEPS: u32 = 40;

pub const FALSIFICATION_NOTE: &str =
    "holds_on_samples means no violation was found among the evaluated configurations; it is not a proof";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    BanachK,
    SametMk,
    SymmetricMk,
    StrictContraction,
    MixedMonotone,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsOnSamples,
    Fails,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct Measured<S: Scalar> {
    pub name: &'static str,
    #[serde(serialize_with = "ser")]
    pub value: S,
}

/// A refuting configuration. `Y = (x, y) ≥₂ V = (u, v)`.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "P: Serialize"))]
pub struct Witness<P, S: Scalar> {
    pub x: P,
    pub y: P,
    pub u: P,
    pub v: P,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub images: Vec<P>,
    #[serde(serialize_with = "ser_opt", skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<S>,
    #[serde(serialize_with = "ser_opt", skip_serializing_if = "Option::is_none")]
    pub delta: Option<S>,
    pub measured: Vec<Measured<S>>,
}

impl<P: Clone, S: Scalar> Witness<P, S> {
    pub fn upper(&self) -> PairPoint<P> {
        PairPoint::new(self.x.clone(), self.y.clone())
    }

    pub fn lower(&self) -> PairPoint<P> {
        PairPoint::new(self.u.clone(), self.v.clone())
    }

    pub fn measured(&self, name: &str) -> Option<&S> {
        self.measured.iter().find(|m| m.name == name).map(|m| &m.value)
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "P: Serialize"))]
pub struct EpsilonProbe<P, S: Scalar> {
    #[serde(serialize_with = "ser")]
    pub epsilon: S,
    #[serde(serialize_with = "ser")]
    pub delta: S,
    pub band_samples: usize,
    pub rejected: usize,
    pub violations: usize,
    pub witness: Option<Witness<P, S>>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "P: Serialize"))]
pub struct ConditionReport<P, S: Scalar> {
    pub condition_id: ConditionId,
    pub verdict: Verdict,
    pub exhaustive: bool,
    #[serde(serialize_with = "ser_opt", skip_serializing_if = "Option::is_none")]
    pub k: Option<S>,
    pub witness: Option<Witness<P, S>>,
    pub epsilon_grid: Vec<EpsilonProbe<P, S>>,
    pub samples_used: usize,
    pub comparable_pairs_used: usize,
    pub note: &'static str,
}

impl<P, S: Scalar> ConditionReport<P, S> {
    pub(crate) fn new(condition_id: ConditionId, exhaustive: bool) -> Self {
        ConditionReport {
            condition_id,
            verdict: Verdict::Inconclusive,
            exhaustive,
            k: None,
            witness: None,
            epsilon_grid: Vec::new(),
            samples_used: 0,
            comparable_pairs_used: 0,
            note: FALSIFICATION_NOTE,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::HoldsOnSamples
    }

    pub fn fails(&self) -> bool {
        self.verdict == Verdict::Fails
    }
}

/// The `δ(ε)` a Banach constant hands to the band conditions.
#[derive(Clone, Debug, PartialEq)]
pub enum DeltaBound<S> {
    /// `k = 0`: every `δ > 0` works.
    Unbounded,
    Finite(S),
}

impl<S: Scalar> DeltaBound<S> {
    /// Concrete `δ`, substituting `cap` for the unbounded case.
    pub fn or_cap(self, cap: S) -> S {
        match self {
            DeltaBound::Unbounded => cap,
            DeltaBound::Finite(d) => d,
        }
    }
}

/// `δ(ε) = (1/k − 1)·ε`.
pub fn delta_from_k<S: Scalar>(k: &S, epsilon: &S) -> Result<DeltaBound<S>> {
    if k.is_strictly_negative() || *k >= S::one() {
        return Err(Error::input(format!("Banach constant must lie in [0, 1), got {}", k.repr())));
    }
    if !epsilon.is_strictly_positive() {
        return Err(Error::input(format!("epsilon must be positive, got {}", epsilon.repr())));
    }
    if k.is_zero() {
        return Ok(DeltaBound::Unbounded);
    }
    Ok(DeltaBound::Finite((S::one() / k.clone() - S::one()) * epsilon.clone()))
}

/// A comparable configuration `V ≤₂ Y` with its half-sum `h = d₂(Y, V)`.
struct Config<P, S> {
    upper: PairPoint<P>,
    lower: PairPoint<P>,
    half_sum: S,
}

type ProbeCount<Sp> = (EpsilonProbe<<Sp as OrderedMetricSpace>::Point, <Sp as OrderedMetricSpace>::Scalar>, usize);
type Configs<Sp> = Vec<Config<<Sp as OrderedMetricSpace>::Point, <Sp as OrderedMetricSpace>::Scalar>>;

fn config<Sp: OrderedMetricSpace + ?Sized>(
    space: &Sp,
    upper: PairPoint<Sp::Point>,
    lower: PairPoint<Sp::Point>,
) -> Config<Sp::Point, Sp::Scalar> {
    let half_sum = d2_unchecked(space, &upper, &lower);
    Config { upper, lower, half_sum }
}

/// All comparable configurations of an enumerable space.
fn all_configs<Sp: OrderedMetricSpace + ?Sized>(space: &Sp) -> Option<Vec<Config<Sp::Point, Sp::Scalar>>> {
    let pairs = ProductSpace::new(space).enumerate()?;
    let mut out = Vec::new();
    for upper in &pairs {
        for lower in &pairs {
            if product_le(space, lower, upper) {
                out.push(config(space, upper.clone(), lower.clone()));
            }
        }
    }
    Some(out)
}

fn supports_construction<Sp: OrderedMetricSpace + ?Sized>(space: &Sp) -> Result<bool> {
    let probe = space.sample(2, 0)?;
    let [a, b] =
        <[_; 2]>::try_from(probe).map_err(|p| Error::Sampler(format!("asked for 2 points, got {}", p.len())))?;
    let base = PairPoint::new(a, b);
    let mut rng = seeds::rng(0, &[]);
    Ok(space.comparable_above(&base, &Sp::Scalar::one(), Slice::Free, &mut rng).is_some())
}

/// Sampled comparable configurations (not banded): degenerate slices first
/// when the space can build them, then random pairs oriented by `≤₂`.
fn sampled_configs<Sp: OrderedMetricSpace + ?Sized>(
    space: &Sp,
    samples: usize,
    seed: u64,
) -> Result<(Configs<Sp>, usize)> {
    let mut out = Vec::new();
    let mut drawn = 0;
    if supports_construction(space)? {
        let share = samples / DEGENERATE_SHARE;
        for (tag, slice) in [(1u64, Slice::FirstFixed), (2, Slice::SecondFixed)] {
            let bases = ProductSpace::new(space).sample(share, seeds::derive(seed, &[tag]))?;
            let scales = space.sample(2 * share, seeds::derive(seed, &[tag, 1]))?;
            let mut rng = seeds::rng(seed, &[tag, 2]);
            for (i, base) in bases.into_iter().enumerate() {
                drawn += 1;
                let h = space.distance(&scales[2 * i], &scales[2 * i + 1]);
                if !h.is_strictly_positive() {
                    continue;
                }
                if let Some(upper) = space.comparable_above(&base, &h, slice, &mut rng) {
                    out.push(config(space, upper, base));
                }
            }
        }
    }
    let firsts = ProductSpace::new(space).sample(samples, seeds::derive(seed, &[3]))?;
    let seconds = ProductSpace::new(space).sample(samples, seeds::derive(seed, &[4]))?;
    for (a, b) in firsts.into_iter().zip(seconds) {
        drawn += 1;
        if product_le(space, &b, &a) {
            out.push(config(space, a, b));
        } else if product_le(space, &a, &b) {
            out.push(config(space, b, a));
        }
    }
    Ok((out, drawn))
}

fn comparable_configs<Sp: OrderedMetricSpace + ?Sized>(
    space: &Sp,
    samples: usize,
    seed: u64,
) -> Result<(Configs<Sp>, usize, bool)> {
    match all_configs(space) {
        Some(all) => {
            let n = all.len();
            Ok((all, n, true))
        }
        None => {
            let (configs, drawn) = sampled_configs(space, samples, seed)?;
            Ok((configs, drawn, false))
        }
    }
}

fn in_band<S: Scalar>(h: &S, epsilon: &S, delta: &S) -> bool {
    h >= epsilon && *h < epsilon.clone() + delta.clone()
}

/// How band quadruples are produced for a given space.
enum BandSource<P, S> {
    Exhaustive(Vec<Config<P, S>>),
    Constructed,
    Rejection,
}

impl<P: Clone, S: Scalar> BandSource<P, S> {
    fn for_space<Sp>(space: &Sp) -> Result<Self>
    where
        Sp: OrderedMetricSpace<Point = P, Scalar = S> + ?Sized,
    {
        if let Some(all) = all_configs(space) {
            return Ok(BandSource::Exhaustive(all));
        }
        Ok(if supports_construction(space)? { BandSource::Constructed } else { BandSource::Rejection })
    }

    fn exhaustive(&self) -> bool {
        matches!(self, BandSource::Exhaustive(_))
    }

    /// Configurations with `ε ≤ h < ε + δ`, and the number rejected because
    /// rounding pushed the realised half-sum out of the band.
    fn band<Sp>(
        &self,
        space: &Sp,
        epsilon: &S,
        delta: &S,
        samples: usize,
        seed: u64,
    ) -> Result<(Vec<Config<P, S>>, usize)>
    where
        Sp: OrderedMetricSpace<Point = P, Scalar = S> + ?Sized,
    {
        match self {
            BandSource::Exhaustive(all) => Ok((
                all.iter()
                    .filter(|c| in_band(&c.half_sum, epsilon, delta))
                    .map(|c| Config { upper: c.upper.clone(), lower: c.lower.clone(), half_sum: c.half_sum.clone() })
                    .collect(),
                0,
            )),
            BandSource::Constructed => {
                let share = samples / DEGENERATE_SHARE;
                let phases =
                    [(1u64, Slice::FirstFixed, share), (2, Slice::SecondFixed, share), (3, Slice::Free, samples)];
                let mut out = Vec::new();
                let mut rejected = 0;
                for (tag, slice, count) in phases {
                    let bases = ProductSpace::new(space).sample(count, seeds::derive(seed, &[tag]))?;
                    let mut rng = seeds::rng(seed, &[tag, 1]);
                    for base in bases {
                        let u = S::from_f64(rand::Rng::gen::<f64>(&mut rng)).unwrap_or_else(S::zero);
                        let target = epsilon.clone() + delta.clone() * u;
                        match space.comparable_above(&base, &target, slice, &mut rng) {
                            Some(upper) => {
                                let c = config(space, upper, base);
                                if in_band(&c.half_sum, epsilon, delta) {
                                    out.push(c);
                                } else {
                                    rejected += 1;
                                }
                            }
                            None => rejected += 1,
                        }
                    }
                }
                Ok((out, rejected))
            }
            BandSource::Rejection => {
                let (configs, drawn) = sampled_configs(space, samples, seed)?;
                let kept: Vec<_> = configs.into_iter().filter(|c| in_band(&c.half_sum, epsilon, delta)).collect();
                let rejected = drawn - kept.len();
                Ok((kept, rejected))
            }
        }
    }
}

/// `d(F(x, y), F(u, v))`.
pub fn samet_value<Sp, O>(
    space: &Sp,
    op: &O,
    upper: &PairPoint<Sp::Point>,
    lower: &PairPoint<Sp::Point>,
) -> Result<Sp::Scalar>
where
    Sp: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<Sp::Point> + ?Sized,
{
    let a = op.apply(&upper.first, &upper.second)?;
    let b = op.apply(&lower.first, &lower.second)?;
    Ok(space.distance(&a, &b))
}

/// `½[d(F(x, y), F(u, v)) + d(F(y, x), F(v, u))]`, coordinate by coordinate.
pub fn symmetric_value_coordinates<Sp, O>(
    space: &Sp,
    op: &O,
    upper: &PairPoint<Sp::Point>,
    lower: &PairPoint<Sp::Point>,
) -> Result<Sp::Scalar>
where
    Sp: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<Sp::Point> + ?Sized,
{
    let (x, y, u, v) = (&upper.first, &upper.second, &lower.first, &lower.second);
    let direct = space.distance(&op.apply(x, y)?, &op.apply(u, v)?);
    let mirrored = space.distance(&op.apply(y, x)?, &op.apply(v, u)?);
    Ok((direct + mirrored).half())
}

/// `d₂(T(Y), T(V))`.
pub fn symmetric_value_product<Sp, O>(
    space: &Sp,
    op: &O,
    upper: &PairPoint<Sp::Point>,
    lower: &PairPoint<Sp::Point>,
) -> Result<Sp::Scalar>
where
    Sp: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<Sp::Point> + ?Sized,
{
    Ok(d2_unchecked(space, &product_t(op, upper)?, &product_t(op, lower)?))
}

fn witness_for<P: Clone, S: Scalar>(
    c: &Config<P, S>,
    images: Vec<P>,
    epsilon: Option<S>,
    delta: Option<S>,
    measured: Vec<Measured<S>>,
) -> Witness<P, S> {
    Witness {
        x: c.upper.first.clone(),
        y: c.upper.second.clone(),
        u: c.lower.first.clone(),
        v: c.lower.second.clone(),
        images,
        epsilon,
        delta,
        measured,
    }
}

fn m<S: Scalar>(name: &'static str, value: S) -> Measured<S> {
    Measured { name, value }
}

/// `d(F(x,y), F(u,v)) ≤ (k/2)[d(x,u) + d(y,v)]` on every comparable quadruple.
pub fn check_banach_k<Sp, O>(
    space: &Sp,
    op: &O,
    k: &Sp::Scalar,
    samples: usize,
    seed: u64,
) -> Result<ConditionReport<Sp::Point, Sp::Scalar>>
where
    Sp: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<Sp::Point> + ?Sized,
{
    if k.is_strictly_negative() || *k >= Sp::Scalar::one() {
        return Err(Error::input(format!("Banach constant must lie in [0, 1), got {}", k.repr())));
    }
    let (configs, drawn, exhaustive) = comparable_configs(space, samples, seed)?;
    let values: Vec<Sp::Scalar> =
        configs.par_iter().map(|c| samet_value(space, op, &c.upper, &c.lower)).collect::<Result<_>>()?;
    let mut report = ConditionReport::new(ConditionId::BanachK, exhaustive);
    report.k = Some(k.clone());
    report.samples_used = drawn;
    report.comparable_pairs_used = configs.len();
    for (c, lhs) in configs.iter().zip(values) {
        let rhs = k.clone() * c.half_sum.clone();
        if Sp::Scalar::exceeds(&lhs, &rhs) {
            report.verdict = Verdict::Fails;
            report.witness = Some(witness_for(
                c,
                Vec::new(),
                None,
                None,
                vec![m("half_sum", c.half_sum.clone()), m("lhs", lhs), m("rhs", rhs)],
            ));
            return Ok(report);
        }
    }
    report.verdict = pass_or_inconclusive(configs.len(), exhaustive);
    Ok(report)
}

fn pass_or_inconclusive(evaluated: usize, exhaustive: bool) -> Verdict {
    let needed = if exhaustive { 1 } else { MIN_COMPARABLE };
    if evaluated >= needed {
        Verdict::HoldsOnSamples
    } else {
        Verdict::Inconclusive
    }
}

type ValueFn<'a, Sp> = dyn Fn(
        &PairPoint<<Sp as OrderedMetricSpace>::Point>,
        &PairPoint<<Sp as OrderedMetricSpace>::Point>,
    ) -> Result<<Sp as OrderedMetricSpace>::Scalar>
    + Sync
    + 'a;

fn banded_check<Sp>(
    space: &Sp,
    id: ConditionId,
    value: &ValueFn<'_, Sp>,
    epsilon_grid: &[Sp::Scalar],
    delta: &(dyn Fn(&Sp::Scalar) -> Sp::Scalar + Sync),
    samples: usize,
    seed: u64,
) -> Result<ConditionReport<Sp::Point, Sp::Scalar>>
where
    Sp: OrderedMetricSpace + ?Sized,
{
    if epsilon_grid.is_empty() {
        return Err(Error::input("epsilon grid must not be empty"));
    }
    let mut deltas = Vec::with_capacity(epsilon_grid.len());
    for eps in epsilon_grid {
        if !eps.is_strictly_positive() {
            return Err(Error::input(format!("epsilon must be positive, got {}", eps.repr())));
        }
        let d = delta(eps);
        if !d.is_strictly_positive() {
            return Err(Error::input(format!("delta({}) must be positive, got {}", eps.repr(), d.repr())));
        }
        deltas.push(d);
    }
    let source = BandSource::for_space(space)?;
    let probes: Vec<ProbeCount<Sp>> = epsilon_grid
        .par_iter()
        .zip(deltas.par_iter())
        .enumerate()
        .map(|(i, (eps, delta))| {
            let (band, rejected) = source.band(space, eps, delta, samples, seeds::derive(seed, &[i as u64]))?;
            let mut probe = EpsilonProbe {
                epsilon: eps.clone(),
                delta: delta.clone(),
                band_samples: band.len(),
                rejected,
                violations: 0,
                witness: None,
            };
            for c in &band {
                let lhs = value(&c.upper, &c.lower)?;
                if lhs >= *eps {
                    probe.violations += 1;
                    if probe.witness.is_none() {
                        probe.witness = Some(witness_for(
                            c,
                            Vec::new(),
                            Some(eps.clone()),
                            Some(delta.clone()),
                            vec![m("half_sum", c.half_sum.clone()), m("conclusion", lhs)],
                        ));
                    }
                }
            }
            Ok((probe, band.len() + rejected))
        })
        .collect::<Result<_>>()?;

    let mut report = ConditionReport::new(id, source.exhaustive());
    for (probe, attempts) in probes {
        report.samples_used += attempts;
        report.comparable_pairs_used += probe.band_samples;
        if report.witness.is_none() {
            report.witness = probe.witness.clone();
        }
        report.epsilon_grid.push(probe);
    }
    report.verdict = if report.witness.is_some() {
        Verdict::Fails
    } else if report.comparable_pairs_used == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::HoldsOnSamples
    };
    Ok(report)
}

/// Meir–Keeler condition on the first image only:
/// `ε ≤ h < ε + δ(ε) ⇒ d(F(x,y), F(u,v)) < ε`.
pub fn check_samet<Sp, O>(
    space: &Sp,
    op: &O,
    epsilon_grid: &[Sp::Scalar],
    delta: &(dyn Fn(&Sp::Scalar) -> Sp::Scalar + Sync),
    samples: usize,
    seed: u64,
) -> Result<ConditionReport<Sp::Point, Sp::Scalar>>
where
    Sp: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<Sp::Point> + ?Sized,
{
    let value = |y: &PairPoint<Sp::Point>, v: &PairPoint<Sp::Point>| samet_value(space, op, y, v);
    banded_check(space, ConditionId::SametMk, &value, epsilon_grid, delta, samples, seed)
}

/// Meir–Keeler condition on the averaged images, i.e. for `T` under `d₂`.
pub fn check_symmetric_mk<Sp, O>(
    space: &Sp,
    op: &O,
    epsilon_grid: &[Sp::Scalar],
    delta: &(dyn Fn(&Sp::Scalar) -> Sp::Scalar + Sync),
    samples: usize,
    seed: u64,
) -> Result<ConditionReport<Sp::Point, Sp::Scalar>>
where
    Sp: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<Sp::Point> + ?Sized,
{
    let value = |y: &PairPoint<Sp::Point>, v: &PairPoint<Sp::Point>| symmetric_value_product(space, op, y, v);
    banded_check(space, ConditionId::SymmetricMk, &value, epsilon_grid, delta, samples, seed)
}

/// `d₂(T(Y), T(V)) < d₂(Y, V)` for every `Y >₂ V`.
pub fn check_strict_contraction<Sp, O>(
    space: &Sp,
    op: &O,
    samples: usize,
    seed: u64,
) -> Result<ConditionReport<Sp::Point, Sp::Scalar>>
where
    Sp: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<Sp::Point> + ?Sized,
{
    let (configs, drawn, exhaustive) = comparable_configs(space, samples, seed)?;
    let configs: Vec<_> = configs.into_iter().filter(|c| c.upper != c.lower).collect();
    let values: Vec<Sp::Scalar> =
        configs.par_iter().map(|c| symmetric_value_product(space, op, &c.upper, &c.lower)).collect::<Result<_>>()?;
    let mut report = ConditionReport::new(ConditionId::StrictContraction, exhaustive);
    report.samples_used = drawn;
    report.comparable_pairs_used = configs.len();
    for (c, lhs) in configs.iter().zip(values) {
        if lhs >= c.half_sum {
            report.verdict = Verdict::Fails;
            report.witness = Some(witness_for(
                c,
                Vec::new(),
                None,
                None,
                vec![m("d2_images", lhs), m("d2_pairs", c.half_sum.clone())],
            ));
            return Ok(report);
        }
    }
    report.verdict = pass_or_inconclusive(configs.len(), exhaustive);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = ""))]
pub struct DeltaEstimate<S: Scalar> {
    #[serde(serialize_with = "ser")]
    pub epsilon: S,
    #[serde(serialize_with = "ser")]
    pub delta_max: S,
    pub exhaustive: bool,
}

/// Largest `δ ∈ (0, 10ε]` for which no violation of the symmetric condition
/// is found in `[ε, ε + δ)`; `0` when the condition already fails at `δ → 0⁺`.
pub fn estimate_delta_curve<Sp, O>(
    space: &Sp,
    op: &O,
    epsilon_grid: &[Sp::Scalar],
    samples: usize,
    seed: u64,
) -> Result<Vec<DeltaEstimate<Sp::Scalar>>>
where
    Sp: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<Sp::Point> + ?Sized,
{
    let cap_factor = Sp::Scalar::from_f64(DELTA_CAP_FACTOR).expect("finite constant");
    for eps in epsilon_grid {
        if !eps.is_strictly_positive() {
            return Err(Error::input(format!("epsilon must be positive, got {}", eps.repr())));
        }
    }
    let source = BandSource::for_space(space)?;
    epsilon_grid
        .par_iter()
        .enumerate()
        .map(|(i, eps)| {
            let cap = cap_factor.clone() * eps.clone();
            let delta_max = match &source {
                BandSource::Exhaustive(all) => {
                    let mut best = cap.clone();
                    for c in all.iter().filter(|c| in_band(&c.half_sum, eps, &cap)) {
                        if symmetric_value_product(space, op, &c.upper, &c.lower)? >= *eps {
                            let room = c.half_sum.clone() - eps.clone();
                            if room < best {
                                best = room;
                            }
                        }
                    }
                    best
                }
                _ => bisect_delta(space, op, &source, eps, cap, samples, seeds::derive(seed, &[i as u64]))?,
            };
            Ok(DeltaEstimate { epsilon: eps.clone(), delta_max, exhaustive: source.exhaustive() })
        })
        .collect()
}

fn bisect_delta<Sp, O>(
    space: &Sp,
    op: &O,
    source: &BandSource<Sp::Point, Sp::Scalar>,
    eps: &Sp::Scalar,
    cap: Sp::Scalar,
    samples: usize,
    seed: u64,
) -> Result<Sp::Scalar>
where
    Sp: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<Sp::Point> + ?Sized,
{
    let mut step = 0u64;
    // Smallest half-sum of a sampled violation in [ε, ε + δ).
    let mut probe = |delta: &Sp::Scalar| -> Result<Option<Sp::Scalar>> {
        step += 1;
        let (band, _) = source.band(space, eps, delta, samples, seeds::derive(seed, &[step]))?;
        let mut lowest: Option<Sp::Scalar> = None;
        for c in band {
            if symmetric_value_product(space, op, &c.upper, &c.lower)? >= *eps
                && lowest.as_ref().is_none_or(|l| c.half_sum < *l)
            {
                lowest = Some(c.half_sum);
            }
        }
        Ok(lowest)
    };
    let resolution = cap.clone() / Sp::Scalar::from_f64(2f64.powi(BISECTION_STEPS as i32)).expect("finite constant");
    if probe(&resolution)?.is_some() {
        return Ok(Sp::Scalar::zero());
    }
    let mut hi = match probe(&cap)? {
        None => return Ok(cap),
        Some(h) => h - eps.clone(),
    };
    let mut lo = resolution.clone();
    for _ in 0..BISECTION_STEPS {
        if hi.clone() - lo.clone() <= resolution {
            break;
        }
        let mid = (lo.clone() + hi.clone()).half();
        match probe(&mid)? {
            None => lo = mid,
            Some(h) => {
                let room = h - eps.clone();
                if room < hi {
                    hi = room;
                }
            }
        }
    }
    Ok(hi)
}

/// Re-evaluates every stored witness of `report`; true when each still
/// violates its condition.
pub fn witness_reproduces<Sp, O>(report: &ConditionReport<Sp::Point, Sp::Scalar>, space: &Sp, op: &O) -> Result<bool>
where
    Sp: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<Sp::Point> + ?Sized,
{
    let witnesses = report.witness.iter().chain(report.epsilon_grid.iter().filter_map(|p| p.witness.as_ref()));
    for w in witnesses {
        let (upper, lower) = (w.upper(), w.lower());
        if !product_le(space, &lower, &upper) {
            return Ok(false);
        }
        let h = d2_unchecked(space, &upper, &lower);
        let violated = match report.condition_id {
            ConditionId::MixedMonotone => {
                let hi = op.apply(&upper.first, &upper.second)?;
                let lo = op.apply(&lower.first, &lower.second)?;
                let one_slice = upper.first == lower.first || upper.second == lower.second;
                one_slice && !space.relation(&lo, &hi).is_le()
            }
            ConditionId::BanachK => {
                let k = report.k.clone().unwrap_or_else(Sp::Scalar::zero);
                Sp::Scalar::exceeds(&samet_value(space, op, &upper, &lower)?, &(k * h))
            }
            ConditionId::StrictContraction => {
                upper != lower && symmetric_value_product(space, op, &upper, &lower)? >= h
            }
            ConditionId::SametMk | ConditionId::SymmetricMk => {
                let (Some(eps), Some(delta)) = (&w.epsilon, &w.delta) else {
                    return Ok(false);
                };
                let lhs = if report.condition_id == ConditionId::SametMk {
                    samet_value(space, op, &upper, &lower)?
                } else {
                    symmetric_value_product(space, op, &upper, &lower)?
                };
                in_band(&h, eps, delta) && lhs >= *eps
            }
        };
        if !violated {
            return Ok(false);
        }
    }
    Ok(true)
}
