//! Coupled operators `F: X × X → X` and the induced map `T` on `X²`.

use crate::conditions::{ConditionId, ConditionReport, Verdict, Witness, MIN_COMPARABLE};
use crate::error::{Error, Result};
use crate::space::{OrderedMetricSpace, PairPoint, Relation};

pub trait CoupledOperator<P>: Send + Sync {
    fn apply(&self, x: &P, y: &P) -> Result<P>;

    /// Constants `(a, b)` with `d(F(x,y), F(u,v)) ≤ a·d(x,u) + b·d(y,v)` on
    /// comparable arguments, when known.
    fn lipschitz(&self) -> Option<(f64, f64)> {
        None
    }

    fn description(&self) -> String;
}

/// `F(x, y) = (a·x − b·y) / c` on the real line.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LinearOperator {
    /// Mixed monotone for `a, b ≥ 0`, `c > 0`.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let finite = [a, b, c].iter().all(|v| v.is_finite());
        if !finite || a < 0.0 || b < 0.0 || c <= 0.0 {
            return Err(Error::input(format!("linear(a,b,c) needs a, b >= 0 and c > 0, got ({a}, {b}, {c})")));
        }
        Ok(LinearOperator { a, b, c })
    }
}

impl CoupledOperator<f64> for LinearOperator {
    fn apply(&self, x: &f64, y: &f64) -> Result<f64> {
        Ok((self.a * x - self.b * y) / self.c)
    }

    fn lipschitz(&self) -> Option<(f64, f64)> {
        Some((self.a / self.c, self.b / self.c))
    }

    fn description(&self) -> String {
        format!("F(x,y) = ({}x - {}y)/{}", self.a, self.b, self.c)
    }
}

type ApplyFn<P> = dyn Fn(&P, &P) -> Result<P> + Send + Sync;

/// Operator backed by a closure.
pub struct FnOperator<P> {
    description: String,
    apply: Box<ApplyFn<P>>,
    lipschitz: Option<(f64, f64)>,
}

impl<P> FnOperator<P> {
    pub fn new(description: impl Into<String>, apply: impl Fn(&P, &P) -> Result<P> + Send + Sync + 'static) -> Self {
        FnOperator { description: description.into(), apply: Box::new(apply), lipschitz: None }
    }

    pub fn with_lipschitz(mut self, a: f64, b: f64) -> Self {
        self.lipschitz = Some((a, b));
        self
    }
}

impl<P> CoupledOperator<P> for FnOperator<P> {
    fn apply(&self, x: &P, y: &P) -> Result<P> {
        (self.apply)(x, y)
    }

    fn lipschitz(&self) -> Option<(f64, f64)> {
        self.lipschitz
    }

    fn description(&self) -> String {
        self.description.clone()
    }
}

/// `F` tabulated on a finite space: `table[i][j]` is the index of `F(e_i, e_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedOperator {
    table: Vec<Vec<usize>>,
}

impl TabulatedOperator {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::input(format!("F[{i}] has {} entries, expected {n}", row.len())));
            }
            if let Some((j, v)) = row.iter().enumerate().find(|(_, &v)| v >= n) {
                return Err(Error::input(format!("F[{i}][{j}] = {v} is out of range 0..{n}")));
            }
        }
        Ok(TabulatedOperator { table })
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }
}

impl CoupledOperator<usize> for TabulatedOperator {
    fn apply(&self, x: &usize, y: &usize) -> Result<usize> {
        self.table
            .get(*x)
            .and_then(|row| row.get(*y))
            .copied()
            .ok_or_else(|| Error::Domain(format!("({x}, {y}) outside the tabulated operator")))
    }

    fn description(&self) -> String {
        format!("tabulated operator on {} elements", self.table.len())
    }
}

/// `T(x, y) = (F(x, y), F(y, x))`.
pub fn product_t<P, O>(op: &O, z: &PairPoint<P>) -> Result<PairPoint<P>>
where
    O: CoupledOperator<P> + ?Sized,
{
    Ok(PairPoint::new(op.apply(&z.first, &z.second)?, op.apply(&z.second, &z.first)?))
}

/// Checks `x₁ ≤ x₂ ⇒ F(x₁, y) ≤ F(x₂, y)` and `y₁ ≤ y₂ ⇒ F(x, y₁) ≥ F(x, y₂)`.
///
/// Both clauses are the statement `F(V) ≤ F(Y)` for `V ≤₂ Y` differing in
/// one coordinate, which is how witnesses are stored. Finite spaces are
/// checked on every triple; otherwise sampled triples whose pair is
/// incomparable are discarded, and fewer than [`MIN_COMPARABLE`] survivors
/// give an inconclusive verdict.
pub fn check_mixed_monotone<S, O>(
    space: &S,
    op: &O,
    samples: usize,
    seed: u64,
) -> Result<ConditionReport<S::Point, S::Scalar>>
where
    S: OrderedMetricSpace + ?Sized,
    O: CoupledOperator<S::Point> + ?Sized,
{
    if samples < 2 {
        return Err(Error::input("mixed monotone check needs at least 2 samples"));
    }
    let (triples, exhaustive) = match space.enumerate() {
        Some(points) => {
            let mut t = Vec::new();
            for a in &points {
                for b in &points {
                    for c in &points {
                        t.push((a.clone(), b.clone(), c.clone()));
                    }
                }
            }
            (t, true)
        }
        None => {
            let p = space.sample(3 * samples, seed)?;
            let t = p.chunks_exact(3).map(|w| (w[0].clone(), w[1].clone(), w[2].clone())).collect();
            (t, false)
        }
    };
    let mut report = ConditionReport::new(ConditionId::MixedMonotone, exhaustive);
    report.samples_used = triples.len();
    for (a, b, c) in triples {
        let (lo, hi) = match space.relation(&a, &b) {
            Relation::LessOrEqual => (a, b),
            Relation::Greater => (b, a),
            Relation::Incomparable => continue,
        };
        report.comparable_pairs_used += 1;
        // First argument: (lo, c) ≤₂ (hi, c). Second argument: (c, hi) ≤₂ (c, lo).
        let clauses = [
            (PairPoint::new(hi.clone(), c.clone()), PairPoint::new(lo.clone(), c.clone())),
            (PairPoint::new(c.clone(), lo.clone()), PairPoint::new(c.clone(), hi.clone())),
        ];
        for (upper, lower) in clauses {
            let f_upper = op.apply(&upper.first, &upper.second)?;
            let f_lower = op.apply(&lower.first, &lower.second)?;
            if !space.relation(&f_lower, &f_upper).is_le() {
                report.verdict = Verdict::Fails;
                report.witness = Some(Witness {
                    x: upper.first,
                    y: upper.second,
                    u: lower.first,
                    v: lower.second,
                    images: vec![f_upper, f_lower],
                    epsilon: None,
                    delta: None,
                    measured: Vec::new(),
                });
                return Ok(report);
            }
        }
    }
    let needed = if exhaustive { 1 } else { MIN_COMPARABLE };
    report.verdict =
        if report.comparable_pairs_used >= needed { Verdict::HoldsOnSamples } else { Verdict::Inconclusive };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::witness_reproduces;
    use crate::space::{CustomSpace, RealLine};

    fn example() -> LinearOperator {
        LinearOperator::new(1.0, 3.0, 5.0).unwrap()
    }

    #[test]
    fn product_t_examples() {
        let t = product_t(&example(), &PairPoint::new(-3.0, 3.0)).unwrap();
        assert!((t.first + 2.4).abs() < 1e-15 && (t.second - 2.4).abs() < 1e-15);
        assert_eq!(product_t(&example(), &PairPoint::new(0.0, 0.0)).unwrap(), PairPoint::new(0.0, 0.0));
        let diag = FnOperator::new("(x+y)/2", |x: &f64, y: &f64| Ok((x + y) / 2.0));
        assert_eq!(product_t(&diag, &PairPoint::new(1.5, 1.5)).unwrap(), PairPoint::new(1.5, 1.5));
    }

    #[test]
    fn product_t_matches_closed_form() {
        let line = RealLine::default();
        for p in line.sample(200, 1).unwrap().chunks(2) {
            let (x, y) = (p[0], p[1]);
            let t = product_t(&example(), &PairPoint::new(x, y)).unwrap();
            assert_eq!(t.first, (x - 3.0 * y) / 5.0);
            assert_eq!(t.second, (y - 3.0 * x) / 5.0);
        }
    }

    #[test]
    fn mixed_monotone_examples() {
        let line = RealLine::default();
        assert!(check_mixed_monotone(&line, &example(), 500, 1).unwrap().holds());
        let constant = FnOperator::new("7", |_: &f64, _: &f64| Ok(7.0));
        assert!(check_mixed_monotone(&line, &constant, 500, 1).unwrap().holds());

        let product = FnOperator::new("xy", |x: &f64, y: &f64| Ok(x * y));
        let r = check_mixed_monotone(&line, &product, 500, 1).unwrap();
        assert!(r.fails());
        assert!(witness_reproduces(&r, &line, &product).unwrap());
        // The hand-picked witness: x1 = -1 <= x2 = 1 at y = -1.
        assert!(product.apply(&-1.0, &-1.0).unwrap() > product.apply(&1.0, &-1.0).unwrap());
    }

    #[test]
    fn sparse_orders_are_inconclusive() {
        let line = RealLine::default();
        let sparse = CustomSpace::new(
            "discrete order",
            |a: &f64, b: &f64| (a - b).abs(),
            |a: &f64, b: &f64| if a == b { Relation::LessOrEqual } else { Relation::Incomparable },
            move |n, seed| line.sample(n, seed),
        );
        let r = check_mixed_monotone(&sparse, &example(), 100, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.comparable_pairs_used, 0);
    }

    #[test]
    fn tabulated_operator_validation() {
        assert!(TabulatedOperator::new(vec![vec![0, 1], vec![1]]).is_err());
        assert!(TabulatedOperator::new(vec![vec![0, 2], vec![1, 1]]).is_err());
        let op = TabulatedOperator::new(vec![vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(op.apply(&0, &1).unwrap(), 0);
        assert!(op.apply(&2, &0).is_err());
    }

    #[test]
    fn linear_operator_validation() {
        assert!(LinearOperator::new(-1.0, 1.0, 1.0).is_err());
        assert!(LinearOperator::new(1.0, 1.0, 0.0).is_err());
        assert_eq!(example().lipschitz(), Some((0.2, 0.6)));
    }
}
