//! Brute-force ground truth for finite instances.
//!
//! Works directly on the matrices, without any of the library's
//! configuration machinery: every ordered quadruple `(x, y, u, v)` is
//! enumerated and each condition is evaluated from its definition.

#![allow(dead_code, clippy::needless_range_loop)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Raw {
    pub names: Vec<String>,
    pub d: Vec<Vec<BigRational>>,
    pub leq: Vec<Vec<bool>>,
    pub f: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Truth {
    Holds,
    Fails,
    /// No configuration falls under the condition's hypothesis.
    Vacuous,
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Raw {
    pub fn n(&self) -> usize {
        self.names.len()
    }

    fn le(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    /// Every `(x, y, u, v)` with `u ≤ x` and `y ≤ v`.
    fn quadruples(&self) -> Vec<[usize; 4]> {
        let n = self.n();
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                for u in 0..n {
                    for v in 0..n {
                        if self.le(u, x) && self.le(y, v) {
                            out.push([x, y, u, v]);
                        }
                    }
                }
            }
        }
        out
    }

    fn h(&self, [x, y, u, v]: [usize; 4]) -> BigRational {
        (&self.d[x][u] + &self.d[y][v]) / q(2, 1)
    }

    fn samet_lhs(&self, [x, y, u, v]: [usize; 4]) -> BigRational {
        self.d[self.f[x][y]][self.f[u][v]].clone()
    }

    fn symmetric_lhs(&self, [x, y, u, v]: [usize; 4]) -> BigRational {
        (&self.d[self.f[x][y]][self.f[u][v]] + &self.d[self.f[y][x]][self.f[v][u]]) / q(2, 1)
    }

    pub fn mixed_monotone(&self) -> Truth {
        let n = self.n();
        for a in 0..n {
            for b in 0..n {
                if !self.le(a, b) {
                    continue;
                }
                for c in 0..n {
                    if !self.le(self.f[a][c], self.f[b][c]) || !self.le(self.f[c][b], self.f[c][a]) {
                        return Truth::Fails;
                    }
                }
            }
        }
        Truth::Holds
    }

    pub fn strict_contraction(&self) -> Truth {
        let mut any = false;
        for c in self.quadruples() {
            let [x, y, u, v] = c;
            if x == u && y == v {
                continue;
            }
            any = true;
            if self.symmetric_lhs(c) >= self.h(c) {
                return Truth::Fails;
            }
        }
        if any {
            Truth::Holds
        } else {
            Truth::Vacuous
        }
    }

    fn banded(
        &self,
        lhs: impl Fn(&Self, [usize; 4]) -> BigRational,
        grid: &[BigRational],
        delta: &dyn Fn(&BigRational) -> BigRational,
    ) -> Truth {
        let mut any = false;
        for eps in grid {
            let top = eps + delta(eps);
            for c in self.quadruples() {
                let h = self.h(c);
                if h >= *eps && h < top {
                    any = true;
                    if lhs(self, c) >= *eps {
                        return Truth::Fails;
                    }
                }
            }
        }
        if any {
            Truth::Holds
        } else {
            Truth::Vacuous
        }
    }

    pub fn samet(&self, grid: &[BigRational], delta: &dyn Fn(&BigRational) -> BigRational) -> Truth {
        self.banded(Self::samet_lhs, grid, delta)
    }

    pub fn symmetric(&self, grid: &[BigRational], delta: &dyn Fn(&BigRational) -> BigRational) -> Truth {
        self.banded(Self::symmetric_lhs, grid, delta)
    }

    /// Largest `δ ∈ (0, cap]` with no symmetric violation in `[ε, ε + δ)`:
    /// the smallest violating `h − ε`, else the cap.
    pub fn delta_max(&self, eps: &BigRational, cap: &BigRational) -> BigRational {
        self.quadruples()
            .into_iter()
            .filter(|&c| self.h(c) >= *eps && self.symmetric_lhs(c) >= *eps)
            .map(|c| self.h(c) - eps)
            .filter(|gap| gap <= cap)
            .min()
            .unwrap_or_else(|| cap.clone())
    }

    /// Whether some pair of `X²` is comparable (in `≤₂`) to both arguments.
    pub fn has_common_comparable(&self, y: (usize, usize), v: (usize, usize)) -> bool {
        let n = self.n();
        let le2 = |a: (usize, usize), b: (usize, usize)| self.le(a.0, b.0) && self.le(b.1, a.1);
        let comparable = |a, b| le2(a, b) || le2(b, a);
        (0..n).any(|z1| (0..n).any(|z2| comparable((z1, z2), y) && comparable((z1, z2), v)))
    }

    pub fn json(&self) -> String {
        let d: Vec<Vec<String>> =
            self.d.iter().map(|r| r.iter().map(|x| format!("\"{}/{}\"", x.numer(), x.denom())).collect()).collect();
        let leq: Vec<Vec<u8>> = self.leq.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect();
        format!(
            r#"{{"schema_version": 1, "elements": {:?}, "distance": [{}], "leq": {:?}, "F": {:?}}}"#,
            self.names,
            d.iter().map(|r| format!("[{}]", r.join(", "))).collect::<Vec<_>>().join(", "),
            leq,
            self.f
        )
    }
}

/// The distinct positive half-sums, plus two off-lattice values.
pub fn epsilon_grid(raw: &Raw) -> Vec<BigRational> {
    let mut grid = vec![q(1, 3), q(5, 4)];
    for row in &raw.d {
        for a in row {
            for row2 in &raw.d {
                for b in row2 {
                    let h = (a + b) / q(2, 1);
                    if h > q(0, 1) {
                        grid.push(h);
                    }
                }
            }
        }
    }
    grid.sort();
    grid.dedup();
    grid
}

pub type DeltaRule = Box<dyn Fn(&BigRational) -> BigRational + Sync>;

pub fn delta_rules() -> Vec<(&'static str, DeltaRule)> {
    vec![
        ("eps/8", Box::new(|e: &BigRational| e / q(8, 1))),
        ("eps/2", Box::new(|e: &BigRational| e / q(2, 1))),
        ("eps", Box::new(|e: &BigRational| e.clone())),
        ("3eps", Box::new(|e: &BigRational| e * q(3, 1))),
        ("1/4", Box::new(|_: &BigRational| q(1, 4))),
    ]
}

/// A random finite instance with `n ≤ 5` elements: distances drawn from
/// `{1, 3/2, 2}` or positions on a line (both metrics), a random partial
/// order (transitive closure of a random DAG), and a random, constant,
/// projection, or chain-monotone operator table.
pub fn random_instance(seed: u64) -> Raw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=5);
    let names = (0..n).map(|i| format!("e{i}")).collect();

    let d = if rng.gen_bool(0.5) {
        let mut d = vec![vec![q(0, 1); n]; n];
        let choices = [q(1, 1), q(3, 2), q(2, 1)];
        for i in 0..n {
            for j in i + 1..n {
                let v = choices[rng.gen_range(0..3)].clone();
                d[i][j] = v.clone();
                d[j][i] = v;
            }
        }
        d
    } else {
        let mut pos: Vec<i64> = (0..8).collect();
        pos.shuffle(&mut rng);
        (0..n).map(|i| (0..n).map(|j| q((pos[i] - pos[j]).abs(), 2)).collect()).collect()
    };

    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(&mut rng);
    let density = [0.0, 0.3, 0.6, 1.0][rng.gen_range(0..4)];
    let mut leq = vec![vec![false; n]; n];
    for i in 0..n {
        leq[i][i] = true;
        for j in 0..n {
            if rank[i] < rank[j] && rng.gen_bool(density) {
                leq[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if leq[i][k] && leq[k][j] {
                    leq[i][j] = true;
                }
            }
        }
    }

    let by_rank = {
        let mut v: Vec<usize> = (0..n).collect();
        v.sort_by_key(|&i| rank[i]);
        v
    };
    let f: Vec<Vec<usize>> = match rng.gen_range(0..4) {
        0 => (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..n)).collect()).collect(),
        1 => {
            let c = rng.gen_range(0..n);
            vec![vec![c; n]; n]
        }
        2 => (0..n).map(|i| vec![i; n]).collect(),
        _ => {
            // Monotone along the rank order: r(F(x, y)) = clamp(a·r(x) − b·r(y) + c).
            let (a, b, c) = (rng.gen_range(0..2), rng.gen_range(0..2), rng.gen_range(0..n as i64));
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let r = (a * rank[i] as i64 - b * rank[j] as i64 + c).clamp(0, n as i64 - 1);
                            by_rank[r as usize]
                        })
                        .collect()
                })
                .collect()
        }
    };
    Raw { names, d, leq, f }
}

/// The hand-built instances shipped with the library, as raw matrices.
pub fn chain3() -> Raw {
    let i = |v: i64| q(v, 1);
    Raw {
        names: vec!["a".into(), "b".into(), "c".into()],
        d: vec![vec![i(0), i(1), i(3)], vec![i(1), i(0), i(2)], vec![i(3), i(2), i(0)]],
        leq: vec![vec![true, true, true], vec![false, true, true], vec![false, false, true]],
        f: vec![vec![1, 1, 0], vec![1, 1, 0], vec![1, 1, 0]],
    }
}
