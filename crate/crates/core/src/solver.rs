//! Picard iteration `Z_{n+1} = T(Z_n)` on `X²`.
//!
//! The trace records `η_n = d₂(Z_n, Z_{n−1})` for every step. Under a
//! symmetric Meir–Keeler operator started from an admissible pair, `η_n` is
//! non-increasing and tends to zero; a rise in `η` is reported as a
//! monotonicity violation when the caller asked for an admissible start.
//!
//! A run is `converged` when `η_N ≤ tol`, the residual `d₂(T(Z_N), Z_N) ≤ tol`,
//! and the a-posteriori error bound `residual / (1 − q) ≤ tol`, where
//! `q = residual / η_N` is the observed contraction ratio of the last step.
//! An exact fixed point converges once the step that reached it is small; on
//! a discrete space that step is not, so the run takes one more (zero) step
//! and every converged trace ends with `η_N ≤ tol`. A start that is already
//! fixed converges with no steps.

use crate::error::{Error, Result};
use crate::operator::{product_t, CoupledOperator};
use crate::scalar::{ser, ser_vec, Scalar};
use crate::space::{d2_unchecked, ensure_pair, OrderedMetricSpace, PairPoint};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// `η` must drop by at least this relative factor over [`STALL_WINDOW`] steps.
pub const STALL_FACTOR: f64 = 1.0 - 1e-15;
pub const STALL_WINDOW: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    Stalled,
    MonotonicityViolation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `x₀ ≤ F(x₀, y₀)` and `F(y₀, x₀) ≤ y₀`: iterates increase in `≤₂`.
    Up,
    /// `x₀ ≥ F(x₀, y₀)` and `F(y₀, x₀) ≥ y₀`: iterates decrease in `≤₂`.
    Down,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartVerdict {
    pub admissible: bool,
    pub direction: Direction,
    pub details: String,
}

/// Classifies a starting pair by the order between `Z₀` and `T(Z₀)`.
pub fn check_start<S, O>(space: &S, op: &O, z0: &PairPoint<S::Point>) -> Result<StartVerdict>
where
    S: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<S::Point> + ?Sized,
{
    ensure_pair(space, z0)?;
    let (x0, y0) = (&z0.first, &z0.second);
    let fx = op.apply(x0, y0)?;
    let fy = op.apply(y0, x0)?;
    let up = space.relation(x0, &fx).is_le() && space.relation(&fy, y0).is_le();
    let down = space.relation(&fx, x0).is_le() && space.relation(y0, &fy).is_le();
    let (direction, details) = if up {
        (Direction::Up, format!("x0 <= F(x0,y0) = {fx:?} and F(y0,x0) = {fy:?} <= y0"))
    } else if down {
        (Direction::Down, format!("x0 >= F(x0,y0) = {fx:?} and F(y0,x0) = {fy:?} >= y0"))
    } else {
        let first = space.relation(x0, &fx);
        let second = space.relation(&fy, y0);
        let detail = if !first.is_comparable() || !second.is_comparable() {
            format!(
                "start is not comparable with its image: x0 vs F(x0,y0) = {fx:?} is {first:?}, \
                 F(y0,x0) = {fy:?} vs y0 is {second:?}"
            )
        } else {
            format!(
                "mixed directions: x0 vs F(x0,y0) = {fx:?} is {first:?}, \
                 F(y0,x0) = {fy:?} vs y0 is {second:?}"
            )
        };
        (Direction::None, detail)
    };
    Ok(StartVerdict { admissible: direction != Direction::None, direction, details })
}

/// `d₂(T(Z), Z)`.
pub fn residual<S, O>(space: &S, op: &O, z: &PairPoint<S::Point>) -> Result<S::Scalar>
where
    S: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<S::Point> + ?Sized,
{
    ensure_pair(space, z)?;
    Ok(d2_unchecked(space, &product_t(op, z)?, z))
}

#[derive(Clone, Debug)]
pub struct SolveOptions<S> {
    pub tol: S,
    pub max_iter: usize,
    pub require_admissible: bool,
    /// Keep every `keep_every`-th iterate (the start and the endpoint are
    /// always kept). `η` is never thinned.
    pub keep_every: usize,
}

impl<S: Scalar> SolveOptions<S> {
    pub fn new(tol: S, max_iter: usize) -> Self {
        SolveOptions { tol, max_iter, require_admissible: true, keep_every: 1 }
    }

    pub fn require_admissible(mut self, yes: bool) -> Self {
        self.require_admissible = yes;
        self
    }

    pub fn keep_every(mut self, m: usize) -> Self {
        self.keep_every = m.max(1);
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Iterate<P> {
    pub n: usize,
    pub point: PairPoint<P>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "P: Serialize"))]
pub struct IterationTrace<P, S: Scalar> {
    pub iterates: Vec<Iterate<P>>,
    /// `eta[n - 1] = η_n = d₂(Z_n, Z_{n−1})`.
    #[serde(serialize_with = "ser_vec")]
    pub eta: Vec<S>,
    pub termination: Termination,
    #[serde(serialize_with = "ser")]
    pub residual: S,
    pub iterations: usize,
    pub start: PairPoint<P>,
    pub endpoint: PairPoint<P>,
    pub start_verdict: StartVerdict,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "P: Serialize"))]
pub struct TraceSummary<'a, P, S: Scalar> {
    pub schema_version: u32,
    pub termination: Termination,
    #[serde(serialize_with = "ser")]
    pub residual: S,
    pub iterations: usize,
    pub start: &'a PairPoint<P>,
    pub endpoint: &'a PairPoint<P>,
    pub direction: Direction,
}

impl<P: Clone + Serialize, S: Scalar> IterationTrace<P, S> {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn summary(&self) -> TraceSummary<'_, P, S> {
        TraceSummary {
            schema_version: crate::SCHEMA_VERSION,
            termination: self.termination,
            residual: self.residual.clone(),
            iterations: self.iterations,
            start: &self.start,
            endpoint: &self.endpoint,
            direction: self.start_verdict.direction,
        }
    }

    /// CSV with columns `n, x_n, y_n, eta_n`: one row per step, iterate
    /// columns empty where thinned, `eta_0` empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["n", "x_n", "y_n", "eta_n"])?;
        let mut kept = self.iterates.iter().peekable();
        for n in 0..=self.iterations {
            let (x, y) = match kept.peek() {
                Some(it) if it.n == n => {
                    let it = kept.next().expect("peeked");
                    (json_text(&it.point.first)?, json_text(&it.point.second)?)
                }
                _ => (String::new(), String::new()),
            };
            let eta = if n == 0 { String::new() } else { self.eta[n - 1].repr() };
            out.write_record([n.to_string(), x, y, eta])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn json_text<P: Serialize>(p: &P) -> Result<String> {
    let text = serde_json::to_string(p)?;
    Ok(text.trim_matches('"').to_string())
}

fn converged<S: Scalar>(eta: &[S], residual: &S, tol: &S) -> bool {
    let Some(last) = eta.last() else {
        return residual.is_zero();
    };
    if last > tol || residual > tol {
        return false;
    }
    if residual.is_zero() {
        return true;
    }
    if last.is_zero() {
        return false;
    }
    let ratio = residual.clone() / last.clone();
    if ratio >= S::one() {
        return false;
    }
    residual.clone() / (S::one() - ratio) <= *tol
}

fn stalled<S: Scalar>(eta: &[S]) -> bool {
    let n = eta.len();
    if n <= STALL_WINDOW {
        return false;
    }
    let factor = S::from_f64(STALL_FACTOR).expect("finite constant");
    eta[n - 1] > eta[n - 1 - STALL_WINDOW].clone() * factor
}

/// Runs the Picard iteration from `z0`.
///
/// With `require_admissible`, an inadmissible start is an error carrying the
/// [`StartVerdict`], and a rise of `η` beyond rounding slack stops the run.
pub fn solve<S, O>(
    space: &S,
    op: &O,
    z0: &PairPoint<S::Point>,
    options: &SolveOptions<S::Scalar>,
) -> Result<IterationTrace<S::Point, S::Scalar>>
where
    S: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<S::Point> + ?Sized,
{
    if !options.tol.is_strictly_positive() {
        return Err(Error::input(format!("tolerance must be positive, got {}", options.tol.repr())));
    }
    let verdict = check_start(space, op, z0)?;
    if options.require_admissible && !verdict.admissible {
        return Err(Error::InadmissibleStart(verdict));
    }
    let keep = options.keep_every.max(1);
    let mut iterates = vec![Iterate { n: 0, point: z0.clone() }];
    let mut eta: Vec<S::Scalar> = Vec::new();
    let mut z = z0.clone();
    loop {
        let n = eta.len();
        let next = product_t(op, &z)?;
        let res = d2_unchecked(space, &next, &z);
        let rising = options.require_admissible && n >= 2 && S::Scalar::exceeds(&eta[n - 1], &eta[n - 2]);
        let termination = if converged(&eta, &res, &options.tol) {
            Some(Termination::Converged)
        } else if rising {
            Some(Termination::MonotonicityViolation)
        } else if stalled(&eta) {
            Some(Termination::Stalled)
        } else if n >= options.max_iter {
            Some(Termination::MaxIterations)
        } else {
            None
        };
        if let Some(termination) = termination {
            if iterates.last().is_none_or(|it| it.n != n) {
                iterates.push(Iterate { n, point: z.clone() });
            }
            return Ok(IterationTrace {
                iterates,
                eta,
                termination,
                residual: res,
                iterations: n,
                start: z0.clone(),
                endpoint: z,
                start_verdict: verdict,
            });
        }
        eta.push(res);
        if (n + 1) % keep == 0 {
            iterates.push(Iterate { n: n + 1, point: next.clone() });
        }
        z = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{FnOperator, LinearOperator};
    use crate::space::RealLine;

    fn example() -> LinearOperator {
        LinearOperator::new(1.0, 3.0, 5.0).unwrap()
    }

    #[test]
    fn start_classification() {
        let line = RealLine::default();
        let up = check_start(&line, &example(), &PairPoint::new(-3.0, 3.0)).unwrap();
        assert_eq!(up.direction, Direction::Up);
        assert!(up.admissible);
        let down = check_start(&line, &example(), &PairPoint::new(3.0, -3.0)).unwrap();
        assert_eq!(down.direction, Direction::Down);
        let fixed = check_start(&line, &example(), &PairPoint::new(0.0, 0.0)).unwrap();
        assert_eq!(fixed.direction, Direction::Up);
        // x0 <= F(x0, y0) needs 4x0 <= -3y0; y0 >= F(y0, x0) needs 4y0 >= -3x0.
        let none = check_start(&line, &example(), &PairPoint::new(1.0, 1.0)).unwrap();
        assert_eq!(none.direction, Direction::None);
        assert!(!none.admissible);
    }

    #[test]
    fn residual_examples() {
        let line = RealLine::default();
        assert_eq!(residual(&line, &example(), &PairPoint::new(0.0, 0.0)).unwrap(), 0.0);
        let r = residual(&line, &example(), &PairPoint::new(-3.0, 3.0)).unwrap();
        assert!((r - 0.6).abs() < 1e-15);
    }

    #[test]
    fn example_run_follows_closed_form() {
        let line = RealLine::default();
        let trace = solve(&line, &example(), &PairPoint::new(-3.0, 3.0), &SolveOptions::new(1e-10, 10_000)).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        // 3 (4/5)^N <= 1e-10 first holds at N = 109.
        assert_eq!(trace.iterations, 109);
        assert!(trace.endpoint.first.abs() <= 1e-10 && trace.endpoint.second.abs() <= 1e-10);
        assert!((trace.eta[0] - 0.6).abs() < 1e-15);
        for (i, e) in trace.eta.iter().enumerate() {
            let expected = 0.6 * 0.8f64.powi(i as i32);
            assert!((e - expected).abs() <= 1e-12 * expected, "eta_{}", i + 1);
        }
        assert_eq!(trace.eta.len(), trace.iterations);
        assert_eq!(trace.iterates.len(), trace.iterations + 1);
    }

    #[test]
    fn fixed_start_converges_immediately() {
        let line = RealLine::default();
        let proj = FnOperator::new("x", |x: &f64, _: &f64| Ok(*x));
        let trace = solve(&line, &proj, &PairPoint::new(2.5, 2.5), &SolveOptions::new(1e-10, 10)).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert_eq!(trace.iterations, 0);
        assert_eq!(trace.residual, 0.0);
        assert!(trace.eta.is_empty());
    }

    #[test]
    fn landing_on_a_fixed_point_records_the_zero_step() {
        let line = RealLine::default();
        let zero = FnOperator::new("0", |_: &f64, _: &f64| Ok(0.0));
        let trace = solve(&line, &zero, &PairPoint::new(-5.0, 5.0), &SolveOptions::new(1e-10, 10)).unwrap();
        assert_eq!(trace.termination, Termination::Converged);
        assert_eq!(trace.eta, vec![5.0, 0.0]);
        assert_eq!(trace.iterations, 2);
    }

    #[test]
    fn inadmissible_start_is_rejected() {
        let line = RealLine::default();
        let err = solve(&line, &example(), &PairPoint::new(1.0, 1.0), &SolveOptions::new(1e-10, 10)).unwrap_err();
        match err {
            Error::InadmissibleStart(v) => assert_eq!(v.direction, Direction::None),
            other => panic!("unexpected {other:?}"),
        }
        let opts = SolveOptions::new(1e-10, 10_000).require_admissible(false);
        assert!(solve(&line, &example(), &PairPoint::new(1.0, 1.0), &opts).unwrap().converged());
    }

    #[test]
    fn expanding_map_hits_iteration_cap_or_violation() {
        let line = RealLine::default();
        let grow = FnOperator::new("2x - y", |x: &f64, y: &f64| Ok(2.0 * x - y));
        let opts = SolveOptions::new(1e-10, 20).require_admissible(false);
        let trace = solve(&line, &grow, &PairPoint::new(1.0, -1.0), &opts).unwrap();
        assert_eq!(trace.termination, Termination::MaxIterations);
        let trace = solve(&line, &grow, &PairPoint::new(1.0, -1.0), &SolveOptions::new(1e-10, 20)).unwrap();
        assert_eq!(trace.termination, Termination::MonotonicityViolation);
    }

    #[test]
    fn oscillation_stalls() {
        let line = RealLine::default();
        let swap = FnOperator::new("y", |_: &f64, y: &f64| Ok(*y));
        let opts = SolveOptions::new(1e-10, 10_000).require_admissible(false);
        let trace = solve(&line, &swap, &PairPoint::new(1.0, -1.0), &opts).unwrap();
        assert_eq!(trace.termination, Termination::Stalled);
        assert_eq!(trace.iterations, STALL_WINDOW + 1);
    }

    #[test]
    fn thinning_keeps_endpoints_and_all_eta() {
        let line = RealLine::default();
        let opts = SolveOptions::new(1e-10, 10_000).keep_every(10);
        let trace = solve(&line, &example(), &PairPoint::new(-3.0, 3.0), &opts).unwrap();
        assert_eq!(trace.eta.len(), 109);
        assert_eq!(trace.iterates.first().unwrap().n, 0);
        assert_eq!(trace.iterates.last().unwrap().n, 109);
        assert_eq!(trace.iterates.len(), 12);
    }

    #[test]
    fn csv_rows_cover_every_step() {
        let line = RealLine::default();
        let trace = solve(&line, &example(), &PairPoint::new(-3.0, 3.0), &SolveOptions::new(1e-3, 100)).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "n,x_n,y_n,eta_n");
        assert_eq!(lines[1], "0,-3.0,3.0,");
        assert_eq!(lines.len(), trace.iterations + 2);
    }
}
