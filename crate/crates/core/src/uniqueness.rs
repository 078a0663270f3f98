//! Empirical uniqueness and diagonal probes.
//!
//! Uniqueness is only ever refuted (two converged endpoints further apart
//! than `2·tol`) or supported; nothing here proves it.

use crate::error::Result;
use crate::operator::CoupledOperator;
use crate::scalar::{ser, ser_vec, Scalar};
use crate::seeds;
use crate::solver::{solve, SolveOptions, Termination};
use crate::space::{d2_unchecked, ensure_pair, product_relation, OrderedMetricSpace, PairPoint};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

/// Proposes a pair comparable to both arguments, or `None`.
pub type BoundSearch<P> = dyn Fn(&PairPoint<P>, &PairPoint<P>) -> Option<PairPoint<P>> + Send + Sync;

/// Finite spaces with at most this many pairs of pairs are probed exhaustively.
pub const EXHAUSTIVE_PROBE_LIMIT: usize = 1 << 20;

/// Fraction of pairs `Y ≠ V` in `X²` for which `bound_search` finds a `Z`
/// comparable (in `≤₂`) to both. Without a search the rate is that of
/// directly comparable pairs. An empty sample counts as rate 1.
pub fn probe_comparability<S>(
    space: &S,
    samples: usize,
    seed: u64,
    bound_search: Option<&BoundSearch<S::Point>>,
) -> Result<f64>
where
    S: OrderedMetricSpace + ?Sized,
{
    let pairs = pair_of_pairs(space, samples, seed)?;
    let hits: Vec<bool> = pairs
        .par_iter()
        .map(|(y, v)| match bound_search {
            None => product_relation(space, y, v).is_comparable(),
            Some(search) => search(y, v).is_some_and(|z| {
                product_relation(space, &z, y).is_comparable() && product_relation(space, &z, v).is_comparable()
            }),
        })
        .collect();
    if hits.is_empty() {
        return Ok(1.0);
    }
    Ok(hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
}

#[allow(clippy::type_complexity)]
fn pair_of_pairs<S: OrderedMetricSpace + ?Sized>(
    space: &S,
    samples: usize,
    seed: u64,
) -> Result<Vec<(PairPoint<S::Point>, PairPoint<S::Point>)>> {
    if let Some(points) = space.enumerate() {
        let n = points.len();
        if n.checked_pow(4).is_some_and(|c| c <= EXHAUSTIVE_PROBE_LIMIT) {
            let mut pairs = Vec::new();
            for a in &points {
                for b in &points {
                    pairs.push(PairPoint::new(a.clone(), b.clone()));
                }
            }
            let mut out = Vec::new();
            for y in &pairs {
                for v in &pairs {
                    if y != v {
                        out.push((y.clone(), v.clone()));
                    }
                }
            }
            return Ok(out);
        }
    }
    let points = space.sample(4 * samples, seeds::derive(seed, &[0xC0]))?;
    Ok(points
        .chunks_exact(4)
        .map(|c| (PairPoint::new(c[0].clone(), c[1].clone()), PairPoint::new(c[2].clone(), c[3].clone())))
        .filter(|(y, v)| y != v)
        .collect())
}

/// Any pair of `X²` comparable to both arguments, by enumeration.
pub fn exhaustive_bound<S>(space: &S, y: &PairPoint<S::Point>, v: &PairPoint<S::Point>) -> Option<PairPoint<S::Point>>
where
    S: OrderedMetricSpace + ?Sized,
{
    let points = space.enumerate()?;
    points
        .iter()
        .flat_map(|a| points.iter().map(move |b| PairPoint::new(a.clone(), b.clone())))
        .find(|z| product_relation(space, z, y).is_comparable() && product_relation(space, z, v).is_comparable())
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagonalCheck<S: Scalar> {
    /// `d(x̄, ȳ)`.
    #[serde(serialize_with = "ser")]
    pub gap: S,
    /// `gap ≤ 2·tol`.
    pub within: bool,
    /// `d(F(x̄, x̄), x̄)`.
    #[serde(serialize_with = "ser")]
    pub fixed_point_defect: S,
}

/// Checks whether an endpoint sits on the diagonal and, if so, how well
/// `x̄` solves `F(x̄, x̄) = x̄`.
pub fn check_diagonal<S, O>(
    space: &S,
    op: &O,
    endpoint: &PairPoint<S::Point>,
    tol: &S::Scalar,
) -> Result<DiagonalCheck<S::Scalar>>
where
    S: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<S::Point> + ?Sized,
{
    ensure_pair(space, endpoint)?;
    let x = &endpoint.first;
    let gap = space.distance(x, &endpoint.second);
    let within = gap <= tol.clone() + tol.clone();
    let fixed_point_defect = space.distance(&op.apply(x, x)?, x);
    Ok(DiagonalCheck { gap, within, fixed_point_defect })
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "P: Serialize"))]
pub struct StartRun<P, S: Scalar> {
    pub start: PairPoint<P>,
    /// `None` when the solve could not start (for example, inadmissible).
    pub termination: Option<Termination>,
    pub iterations: usize,
    pub endpoint: Option<PairPoint<P>>,
    #[serde(serialize_with = "crate::scalar::ser_opt")]
    pub residual: Option<S>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "P: Serialize"))]
pub struct UniquenessReport<P, S: Scalar> {
    pub schema_version: u32,
    pub starts: Vec<PairPoint<P>>,
    /// Endpoints of the converged runs, in start order.
    pub endpoints: Vec<PairPoint<P>>,
    /// Indices into `starts` of runs excluded for not converging.
    pub excluded: Vec<usize>,
    pub runs: Vec<StartRun<P, S>>,
    #[serde(serialize_with = "ser")]
    pub max_pairwise_d2: S,
    /// `max_pairwise_d2 ≤ 2·tol`; a `false` refutes uniqueness.
    pub consistent_with_uniqueness: bool,
    pub comparability_rate: Option<f64>,
    #[serde(serialize_with = "ser_vec")]
    pub diagonal_gap: Vec<S>,
    pub diagonal: Vec<DiagonalCheck<S>>,
    #[serde(serialize_with = "ser")]
    pub tol: S,
}

/// Solves from every start (concurrently) and compares the converged
/// endpoints. Runs that fail or do not converge are listed in `excluded`.
pub fn multi_start_uniqueness<S, O>(
    space: &S,
    op: &O,
    starts: &[PairPoint<S::Point>],
    options: &SolveOptions<S::Scalar>,
) -> Result<UniquenessReport<S::Point, S::Scalar>>
where
    S: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<S::Point> + ?Sized,
{
    if !options.tol.is_strictly_positive() {
        return Err(crate::Error::input(format!("tolerance must be positive, got {}", options.tol.repr())));
    }
    let runs: Vec<StartRun<S::Point, S::Scalar>> = starts
        .par_iter()
        .map(|start| match solve(space, op, start, options) {
            Ok(trace) => StartRun {
                start: start.clone(),
                termination: Some(trace.termination),
                iterations: trace.iterations,
                endpoint: Some(trace.endpoint),
                residual: Some(trace.residual),
                error: None,
            },
            Err(err) => StartRun {
                start: start.clone(),
                termination: None,
                iterations: 0,
                endpoint: None,
                residual: None,
                error: Some(err.to_string()),
            },
        })
        .collect();

    let mut endpoints = Vec::new();
    let mut excluded = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        match (&run.termination, &run.endpoint) {
            (Some(Termination::Converged), Some(e)) => endpoints.push(e.clone()),
            _ => excluded.push(i),
        }
    }
    let mut max_pairwise_d2 = S::Scalar::zero();
    for (i, a) in endpoints.iter().enumerate() {
        for b in &endpoints[i + 1..] {
            let d = d2_unchecked(space, a, b);
            if d > max_pairwise_d2 {
                max_pairwise_d2 = d;
            }
        }
    }
    let diagonal = endpoints.iter().map(|e| check_diagonal(space, op, e, &options.tol)).collect::<Result<Vec<_>>>()?;
    let two_tol = options.tol.clone() + options.tol.clone();
    Ok(UniquenessReport {
        schema_version: crate::SCHEMA_VERSION,
        starts: starts.to_vec(),
        consistent_with_uniqueness: max_pairwise_d2 <= two_tol,
        max_pairwise_d2,
        endpoints,
        excluded,
        runs,
        comparability_rate: None,
        diagonal_gap: diagonal.iter().map(|d| d.gap.clone()).collect(),
        diagonal,
        tol: options.tol.clone(),
    })
}
