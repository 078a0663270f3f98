//! Partially ordered metric spaces and the product space `(X², d₂, ≤₂)`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeds;
use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use std::fmt::Debug;

/// Three-valued answer to "is `a ≤ b`?".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `a ≤ b`.
    LessOrEqual,
    /// Comparable, and `b < a`.
    Greater,
    Incomparable,
}

impl Relation {
    pub fn is_le(self) -> bool {
        self == Relation::LessOrEqual
    }

    pub fn is_comparable(self) -> bool {
        self != Relation::Incomparable
    }

    /// Builds the verdict from the two directed order tests `a ≤ b`, `b ≤ a`.
    pub fn from_tests(le: bool, ge: bool) -> Self {
        match (le, ge) {
            (true, _) => Relation::LessOrEqual,
            (false, true) => Relation::Greater,
            (false, false) => Relation::Incomparable,
        }
    }
}

/// An element `(first, second)` of `X × X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairPoint<P> {
    pub first: P,
    pub second: P,
}

impl<P> PairPoint<P> {
    pub fn new(first: P, second: P) -> Self {
        PairPoint { first, second }
    }
}

impl<P: Clone> PairPoint<P> {
    /// `(second, first)`.
    pub fn swapped(&self) -> Self {
        PairPoint::new(self.second.clone(), self.first.clone())
    }
}

/// Which coordinate a constructed comparable pair keeps fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slice {
    /// `x = u`; only the second coordinates differ.
    FirstFixed,
    /// `y = v`; only the first coordinates differ.
    SecondFixed,
    Free,
}

/// A metric space with a partial order and a deterministic sampler.
///
/// All methods must be pure; checkers evaluate them concurrently.
pub trait OrderedMetricSpace: Send + Sync {
    type Point: Clone + PartialEq + Debug + Send + Sync + Serialize;
    type Scalar: Scalar;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Self::Scalar;

    /// Answers "is `a ≤ b`?".
    fn relation(&self, a: &Self::Point, b: &Self::Point) -> Relation;

    fn sample(&self, count: usize, seed: u64) -> Result<Vec<Self::Point>>;

    fn description(&self) -> String;

    fn contains(&self, _point: &Self::Point) -> bool {
        true
    }

    /// Every point, for finite spaces small enough to check exhaustively.
    fn enumerate(&self) -> Option<Vec<Self::Point>> {
        None
    }

    /// Builds `Y ≥₂ base` with `d₂(Y, base) = half_sum` when the space has
    /// enough structure to do so directly (used to aim samples at thin bands).
    fn comparable_above(
        &self,
        _base: &PairPoint<Self::Point>,
        _half_sum: &Self::Scalar,
        _slice: Slice,
        _rng: &mut dyn RngCore,
    ) -> Option<PairPoint<Self::Point>> {
        None
    }
}

pub(crate) fn ensure_pair<S: OrderedMetricSpace + ?Sized>(space: &S, pair: &PairPoint<S::Point>) -> Result<()> {
    for p in [&pair.first, &pair.second] {
        if !space.contains(p) {
            return Err(Error::Domain(format!("{p:?} is not an element of {}", space.description())));
        }
    }
    Ok(())
}

/// `d₂(Y, V) = ½[d(Y.first, V.first) + d(Y.second, V.second)]`.
pub fn d2<S: OrderedMetricSpace + ?Sized>(
    space: &S,
    y: &PairPoint<S::Point>,
    v: &PairPoint<S::Point>,
) -> Result<S::Scalar> {
    ensure_pair(space, y)?;
    ensure_pair(space, v)?;
    Ok(d2_unchecked(space, y, v))
}

pub(crate) fn d2_unchecked<S: OrderedMetricSpace + ?Sized>(
    space: &S,
    y: &PairPoint<S::Point>,
    v: &PairPoint<S::Point>,
) -> S::Scalar {
    (space.distance(&y.first, &v.first) + space.distance(&y.second, &v.second)).half()
}

/// Product order on `X²`: answers "is `lhs ≤₂ rhs`?", where
/// `(u, v) ≤₂ (x, y)` iff `u ≤ x` and `y ≤ v`.
pub fn product_leq<S: OrderedMetricSpace + ?Sized>(
    space: &S,
    lhs: &PairPoint<S::Point>,
    rhs: &PairPoint<S::Point>,
) -> Result<Relation> {
    ensure_pair(space, lhs)?;
    ensure_pair(space, rhs)?;
    Ok(product_relation(space, lhs, rhs))
}

pub(crate) fn product_le<S: OrderedMetricSpace + ?Sized>(
    space: &S,
    lhs: &PairPoint<S::Point>,
    rhs: &PairPoint<S::Point>,
) -> bool {
    space.relation(&lhs.first, &rhs.first).is_le() && space.relation(&rhs.second, &lhs.second).is_le()
}

pub(crate) fn product_relation<S: OrderedMetricSpace + ?Sized>(
    space: &S,
    lhs: &PairPoint<S::Point>,
    rhs: &PairPoint<S::Point>,
) -> Relation {
    Relation::from_tests(product_le(space, lhs, rhs), product_le(space, rhs, lhs))
}

/// The product space `(X², d₂, ≤₂)`, derived from its base on every call.
pub struct ProductSpace<'a, S: ?Sized> {
    pub base: &'a S,
}

impl<'a, S: OrderedMetricSpace + ?Sized> ProductSpace<'a, S> {
    pub fn new(base: &'a S) -> Self {
        ProductSpace { base }
    }
}

impl<S: OrderedMetricSpace + ?Sized> OrderedMetricSpace for ProductSpace<'_, S> {
    type Point = PairPoint<S::Point>;
    type Scalar = S::Scalar;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> S::Scalar {
        d2_unchecked(self.base, a, b)
    }

    fn relation(&self, a: &Self::Point, b: &Self::Point) -> Relation {
        product_relation(self.base, a, b)
    }

    fn sample(&self, count: usize, seed: u64) -> Result<Vec<Self::Point>> {
        let firsts = self.base.sample(count, seeds::derive(seed, &[0]))?;
        let seconds = self.base.sample(count, seeds::derive(seed, &[1]))?;
        Ok(firsts.into_iter().zip(seconds).map(|(a, b)| PairPoint::new(a, b)).collect())
    }

    fn description(&self) -> String {
        format!("product of {}", self.base.description())
    }

    fn contains(&self, point: &Self::Point) -> bool {
        self.base.contains(&point.first) && self.base.contains(&point.second)
    }

    fn enumerate(&self) -> Option<Vec<Self::Point>> {
        let points = self.base.enumerate()?;
        Some(points.iter().flat_map(|a| points.iter().map(move |b| PairPoint::new(a.clone(), b.clone()))).collect())
    }
}

/// `ℝ` with `|x − y|` and the usual order; samples uniformly from `[−R, R]`.
#[derive(Clone, Debug)]
pub struct RealLine {
    pub radius: f64,
}

impl RealLine {
    pub const DEFAULT_RADIUS: f64 = 10.0;

    pub fn new(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::input(format!("sampling radius must be positive, got {radius}")));
        }
        Ok(RealLine { radius })
    }
}

impl Default for RealLine {
    fn default() -> Self {
        RealLine { radius: Self::DEFAULT_RADIUS }
    }
}

impl OrderedMetricSpace for RealLine {
    type Point = f64;
    type Scalar = f64;

    fn distance(&self, a: &f64, b: &f64) -> f64 {
        (a - b).abs()
    }

    fn relation(&self, a: &f64, b: &f64) -> Relation {
        Relation::from_tests(a <= b, b <= a)
    }

    fn sample(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = seeds::rng(seed, &[]);
        Ok((0..count).map(|_| rng.gen_range(-self.radius..=self.radius)).collect())
    }

    fn description(&self) -> String {
        format!("real line, |x-y|, usual order, samples in [-{r}, {r}]", r = self.radius)
    }

    fn contains(&self, point: &f64) -> bool {
        point.is_finite()
    }

    fn comparable_above(
        &self,
        base: &PairPoint<f64>,
        half_sum: &f64,
        slice: Slice,
        rng: &mut dyn RngCore,
    ) -> Option<PairPoint<f64>> {
        let total = 2.0 * half_sum;
        let (up, down) = match slice {
            Slice::FirstFixed => (0.0, total),
            Slice::SecondFixed => (total, 0.0),
            Slice::Free => {
                let t: f64 = rng.gen();
                (total * t, total - total * t)
            }
        };
        Some(PairPoint::new(base.first + up, base.second - down))
    }
}

/// A finite space given by an explicit distance matrix and order matrix.
/// Points are element indices.
#[derive(Clone, Debug)]
pub struct FiniteSpace {
    names: Vec<String>,
    distance: Vec<Vec<BigRational>>,
    leq: Vec<Vec<bool>>,
}

impl FiniteSpace {
    /// `leq[i][j]` means element `i ≤` element `j`. Axioms are not checked
    /// here; run [`audit_space`] for that.
    pub fn new(names: Vec<String>, distance: Vec<Vec<BigRational>>, leq: Vec<Vec<bool>>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::input("finite space needs at least one element"));
        }
        let square = |rows: usize, lens: Vec<usize>| rows == n && lens.iter().all(|&l| l == n);
        if !square(distance.len(), distance.iter().map(Vec::len).collect()) {
            return Err(Error::input(format!("distance matrix must be {n}x{n}")));
        }
        if !square(leq.len(), leq.iter().map(Vec::len).collect()) {
            return Err(Error::input(format!("order matrix must be {n}x{n}")));
        }
        Ok(FiniteSpace { names, distance, leq })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl OrderedMetricSpace for FiniteSpace {
    type Point = usize;
    type Scalar = BigRational;

    fn distance(&self, a: &usize, b: &usize) -> BigRational {
        self.distance[*a][*b].clone()
    }

    fn relation(&self, a: &usize, b: &usize) -> Relation {
        Relation::from_tests(self.leq[*a][*b], self.leq[*b][*a])
    }

    fn sample(&self, count: usize, seed: u64) -> Result<Vec<usize>> {
        let mut rng = seeds::rng(seed, &[]);
        Ok((0..count).map(|_| rng.gen_range(0..self.len())).collect())
    }

    fn description(&self) -> String {
        format!("finite space {{{}}}", self.names.join(", "))
    }

    fn contains(&self, point: &usize) -> bool {
        *point < self.len()
    }

    fn enumerate(&self) -> Option<Vec<usize>> {
        Some((0..self.len()).collect())
    }
}

type DistanceFn<P> = dyn Fn(&P, &P) -> f64 + Send + Sync;
type RelationFn<P> = dyn Fn(&P, &P) -> Relation + Send + Sync;
type SamplerFn<P> = dyn Fn(usize, u64) -> Result<Vec<P>> + Send + Sync;

/// A space assembled from closures, for user-defined domains.
pub struct CustomSpace<P> {
    description: String,
    distance: Box<DistanceFn<P>>,
    relation: Box<RelationFn<P>>,
    sampler: Box<SamplerFn<P>>,
}

impl<P> CustomSpace<P> {
    pub fn new(
        description: impl Into<String>,
        distance: impl Fn(&P, &P) -> f64 + Send + Sync + 'static,
        relation: impl Fn(&P, &P) -> Relation + Send + Sync + 'static,
        sampler: impl Fn(usize, u64) -> Result<Vec<P>> + Send + Sync + 'static,
    ) -> Self {
        CustomSpace {
            description: description.into(),
            distance: Box::new(distance),
            relation: Box::new(relation),
            sampler: Box::new(sampler),
        }
    }
}

impl<P> OrderedMetricSpace for CustomSpace<P>
where
    P: Clone + PartialEq + Debug + Send + Sync + Serialize,
{
    type Point = P;
    type Scalar = f64;

    fn distance(&self, a: &P, b: &P) -> f64 {
        (self.distance)(a, b)
    }

    fn relation(&self, a: &P, b: &P) -> Relation {
        (self.relation)(a, b)
    }

    fn sample(&self, count: usize, seed: u64) -> Result<Vec<P>> {
        (self.sampler)(count, seed)
    }

    fn description(&self) -> String {
        self.description.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    NonNegativity,
    ZeroSelfDistance,
    Symmetry,
    TriangleInequality,
    Reflexivity,
    Antisymmetry,
    Transitivity,
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample<P> {
    pub points: Vec<P>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomCheck<P> {
    pub axiom: Axiom,
    pub passed: bool,
    pub checked: usize,
    pub counterexample: Option<Counterexample<P>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport<P> {
    pub schema_version: u32,
    pub space: String,
    pub exhaustive: bool,
    pub points: usize,
    pub tau_metric: f64,
    pub axioms: Vec<AxiomCheck<P>>,
}

impl<P> AuditReport<P> {
    pub fn all_passed(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }

    pub fn axiom(&self, axiom: Axiom) -> Option<&AxiomCheck<P>> {
        self.axioms.iter().find(|a| a.axiom == axiom)
    }
}

/// Default absolute slack for the sampled metric axioms.
pub const DEFAULT_TAU_METRIC: f64 = 1e-12;

const AUDIT_PAIR_POINTS: usize = 120;
const AUDIT_TRIPLE_POINTS: usize = 30;

struct AxiomTally<P> {
    axiom: Axiom,
    checked: usize,
    counterexample: Option<Counterexample<P>>,
}

impl<P> AxiomTally<P> {
    fn new(axiom: Axiom) -> Self {
        AxiomTally { axiom, checked: 0, counterexample: None }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Counterexample<P>) {
        self.checked += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(witness());
        }
    }

    fn finish(self) -> AxiomCheck<P> {
        AxiomCheck {
            axiom: self.axiom,
            passed: self.counterexample.is_none(),
            checked: self.checked,
            counterexample: self.counterexample,
        }
    }
}

/// Checks the metric and partial-order axioms on sampled points, pairs and
/// triples (all of them, for enumerable spaces).
pub fn audit_space<S: OrderedMetricSpace + ?Sized>(
    space: &S,
    samples: usize,
    seed: u64,
    tau_metric: f64,
) -> Result<AuditReport<S::Point>> {
    if samples < 3 {
        return Err(Error::input("audit needs at least 3 samples"));
    }
    let tau = S::Scalar::from_f64(tau_metric)
        .filter(|t| !t.is_strictly_negative())
        .ok_or_else(|| Error::input(format!("invalid metric tolerance {tau_metric}")))?;
    let (points, exhaustive) = match space.enumerate() {
        Some(all) => (all, true),
        None => (space.sample(samples, seed)?, false),
    };
    let n = points.len();
    let pair_span = if exhaustive { n } else { n.min(AUDIT_PAIR_POINTS) };
    let triple_span = if exhaustive { n } else { n.min(AUDIT_TRIPLE_POINTS) };

    let mut nonneg = AxiomTally::new(Axiom::NonNegativity);
    let mut zero_self = AxiomTally::new(Axiom::ZeroSelfDistance);
    let mut symmetry = AxiomTally::new(Axiom::Symmetry);
    let mut triangle = AxiomTally::new(Axiom::TriangleInequality);
    let mut reflexive = AxiomTally::new(Axiom::Reflexivity);
    let mut antisym = AxiomTally::new(Axiom::Antisymmetry);
    let mut transitive = AxiomTally::new(Axiom::Transitivity);

    let d = |a: &S::Point, b: &S::Point| space.distance(a, b);
    let show = |v: &S::Scalar| v.repr();

    for x in &points {
        let dxx = d(x, x);
        zero_self.record(dxx.abs() <= tau, || Counterexample {
            points: vec![x.clone()],
            detail: format!("d(x,x) = {}", show(&dxx)),
        });
        reflexive.record(space.relation(x, x).is_le(), || Counterexample {
            points: vec![x.clone()],
            detail: "x <= x does not hold".into(),
        });
    }

    let mut pairs: Vec<(usize, usize)> =
        (0..pair_span).flat_map(|i| (0..pair_span).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    if !exhaustive {
        pairs.extend((0..n).map(|i| (i, (i + 1) % n)));
    }
    for &(i, j) in &pairs {
        let (x, y) = (&points[i], &points[j]);
        let dxy = d(x, y);
        let dyx = d(y, x);
        nonneg.record(dxy >= -tau.clone(), || Counterexample {
            points: vec![x.clone(), y.clone()],
            detail: format!("d(x,y) = {}", show(&dxy)),
        });
        symmetry.record((dxy.clone() - dyx.clone()).abs() <= tau, || Counterexample {
            points: vec![x.clone(), y.clone()],
            detail: format!("d(x,y) = {} but d(y,x) = {}", show(&dxy), show(&dyx)),
        });
        let both = space.relation(x, y).is_le() && space.relation(y, x).is_le();
        antisym.record(!both || x == y, || Counterexample {
            points: vec![x.clone(), y.clone()],
            detail: "x <= y and y <= x for distinct x, y".into(),
        });
    }

    let mut triples: Vec<(usize, usize, usize)> = (0..triple_span)
        .flat_map(|i| (0..triple_span).flat_map(move |j| (0..triple_span).map(move |k| (i, j, k))))
        .collect();
    if !exhaustive {
        triples.extend((0..n).map(|i| (i, (i + 1) % n, (i + 2) % n)));
    }
    for &(i, j, k) in &triples {
        let (x, y, z) = (&points[i], &points[j], &points[k]);
        let direct = d(x, z);
        let via = d(x, y) + d(y, z);
        triangle.record(direct <= via.clone() + tau.clone(), || Counterexample {
            points: vec![x.clone(), y.clone(), z.clone()],
            detail: format!("d(x,z) = {} > d(x,y) + d(y,z) = {}", show(&direct), show(&via)),
        });
        let chain = space.relation(x, y).is_le() && space.relation(y, z).is_le();
        transitive.record(!chain || space.relation(x, z).is_le(), || Counterexample {
            points: vec![x.clone(), y.clone(), z.clone()],
            detail: "x <= y and y <= z but not x <= z".into(),
        });
    }

    Ok(AuditReport {
        schema_version: crate::SCHEMA_VERSION,
        space: space.description(),
        exhaustive,
        points: n,
        tau_metric,
        axioms: vec![
            nonneg.finish(),
            zero_self.finish(),
            symmetry.finish(),
            triangle.finish(),
            reflexive.finish(),
            antisym.finish(),
            transitive.finish(),
        ],
    })
}
