//! Built-in problem instances and the finite-problem file format.
//!
//! A finite problem file is JSON:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "elements": ["a", "b", "c"],
//!   "distance": [[0, 1, 3], [1, 0, 2], [3, 2, 0]],
//!   "leq": [[1, 1, 1], [0, 1, 1], [0, 0, 1]],
//!   "F": [[1, 1, 0], [1, 1, 0], [1, 1, 0]],
//!   "start": [0, 2],
//!   "expected_fixed_point": [1, 1]
//! }
//! ```
//!
//! `leq[i][j] = 1` means element `i ≤` element `j`, `F[i][j]` is the index of
//! `F(e_i, e_j)`, and distances are numbers or `"p/q"` strings, read exactly.
//! `start` and `expected_fixed_point` are optional.

use crate::error::{Error, Result};
use crate::operator::{CoupledOperator, LinearOperator, TabulatedOperator};
use crate::scalar::parse_rational;
use crate::seeds;
use crate::solver::check_start;
use crate::space::{FiniteSpace, OrderedMetricSpace, PairPoint, RealLine};
use crate::uniqueness::{exhaustive_bound, BoundSearch};
use num_rational::BigRational;
use rand::seq::SliceRandom;
use serde_json::Value;
use std::path::Path;
use std::sync::Arc;

pub const SAMET_EXAMPLE: &str = "samet_example";

const FINITE_BUILTINS: [&str; 5] = ["chain3", "diamond", "two_component", "singleton", "chain2_constant"];

/// Names accepted by [`builtin`], as shown in error messages.
pub fn registry() -> Vec<String> {
    let mut names = vec![SAMET_EXAMPLE.to_string(), "linear(a,b,c)".into(), "finite_poset(<file>)".into()];
    names.extend(FINITE_BUILTINS.iter().map(|s| s.to_string()));
    names.push("<path>.json".into());
    names
}

pub struct Instance<S: OrderedMetricSpace> {
    pub name: String,
    pub space: S,
    pub operator: Arc<dyn CoupledOperator<S::Point>>,
    pub default_start: PairPoint<S::Point>,
    pub expected_fixed_point: Option<PairPoint<S::Point>>,
    pub bound_search: Option<Arc<BoundSearch<S::Point>>>,
    pub default_epsilon_grid: Vec<S::Scalar>,
}

impl<S: OrderedMetricSpace> Instance<S> {
    /// Up to `count` admissible starting pairs. Enumerable spaces return
    /// distinct admissible pairs in seeded order (fewer if fewer exist);
    /// otherwise pairs are drawn from the sampler until `count` are found.
    pub fn admissible_starts(&self, count: usize, seed: u64) -> Result<Vec<PairPoint<S::Point>>> {
        let admissible = |z: &PairPoint<S::Point>| -> Result<bool> {
            Ok(check_start(&self.space, self.operator.as_ref(), z)?.admissible)
        };
        if let Some(points) = self.space.enumerate() {
            let mut all = Vec::new();
            for a in &points {
                for b in &points {
                    let z = PairPoint::new(a.clone(), b.clone());
                    if admissible(&z)? {
                        all.push(z);
                    }
                }
            }
            all.shuffle(&mut seeds::rng(seed, &[0x57]));
            all.truncate(count);
            return Ok(all);
        }
        let mut found = Vec::with_capacity(count);
        for round in 0..1000u64 {
            let draws = self.space.sample(2 * count.max(8), seeds::derive(seed, &[0x57, round]))?;
            for c in draws.chunks_exact(2) {
                let z = PairPoint::new(c[0].clone(), c[1].clone());
                if admissible(&z)? {
                    found.push(z);
                    if found.len() == count {
                        return Ok(found);
                    }
                }
            }
        }
        Err(Error::Sampler(format!("found only {} admissible starts for {} after 1000 rounds", found.len(), self.name)))
    }
}

pub enum Problem {
    Real(Instance<RealLine>),
    Finite(Instance<FiniteSpace>),
}

impl Problem {
    pub fn name(&self) -> &str {
        match self {
            Problem::Real(i) => &i.name,
            Problem::Finite(i) => &i.name,
        }
    }
}

/// Resolves a problem by name: a registered instance, `linear(a,b,c)`,
/// `finite_poset(<file>)`, or a path to a `.json` problem file.
pub fn builtin(name: &str) -> Result<Problem> {
    let name = name.trim();
    if name == SAMET_EXAMPLE {
        return Ok(Problem::Real(real_instance(SAMET_EXAMPLE, LinearOperator::new(1.0, 3.0, 5.0)?)));
    }
    if let Some(args) = call_args(name, "linear") {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let values: Option<Vec<f64>> = parts.iter().map(|p| p.parse::<f64>().ok()).collect();
        return match values.as_deref() {
            Some(&[a, b, c]) => Ok(Problem::Real(real_instance(name, LinearOperator::new(a, b, c)?))),
            _ => Err(Error::input(format!("linear(a,b,c) needs three numbers, got `{args}`"))),
        };
    }
    if let Some(path) = call_args(name, "finite_poset") {
        return load_finite(path.trim()).map(Problem::Finite);
    }
    if let Some(json) = finite_builtin(name) {
        let mut inst = parse_finite(json, name)?;
        inst.name = name.to_string();
        return Ok(Problem::Finite(inst));
    }
    if name.ends_with(".json") {
        return load_finite(name).map(Problem::Finite);
    }
    Err(Error::UnknownProblem { name: name.to_string(), registry: registry() })
}

fn call_args<'a>(name: &'a str, func: &str) -> Option<&'a str> {
    name.strip_prefix(func)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}

fn real_instance(name: &str, op: LinearOperator) -> Instance<RealLine> {
    let coordinatewise =
        |y: &PairPoint<f64>, v: &PairPoint<f64>| Some(PairPoint::new(y.first.max(v.first), y.second.min(v.second)));
    Instance {
        name: name.to_string(),
        space: RealLine::default(),
        operator: Arc::new(op),
        default_start: PairPoint::new(-3.0, 3.0),
        expected_fixed_point: Some(PairPoint::new(0.0, 0.0)),
        bound_search: Some(Arc::new(coordinatewise)),
        default_epsilon_grid: vec![0.1, 1.0, 10.0],
    }
}

fn finite_builtin(name: &str) -> Option<&'static str> {
    Some(match name {
        // Positions 0, 1, 3 on a line. T halves nothing on the `x = u` slice,
        // so the plain Meir–Keeler condition fails while the symmetric one holds.
        "chain3" => {
            r#"{
            "schema_version": 1,
            "elements": ["a", "b", "c"],
            "distance": [[0, 1, 3], [1, 0, 2], [3, 2, 0]],
            "leq": [[1, 1, 1], [0, 1, 1], [0, 0, 1]],
            "F": [[1, 1, 0], [1, 1, 0], [1, 1, 0]],
            "start": [0, 2],
            "expected_fixed_point": [1, 1]
        }"#
        }
        // A four-element lattice with the path metric of its Hasse diagram.
        "diamond" => {
            r#"{
            "schema_version": 1,
            "elements": ["bot", "a", "b", "top"],
            "distance": [[0, 1, 1, 2], [1, 0, 2, 1], [1, 2, 0, 1], [2, 1, 1, 0]],
            "leq": [[1, 1, 1, 1], [0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1]],
            "F": [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 0]],
            "start": [3, 0],
            "expected_fixed_point": [0, 0]
        }"#
        }
        // Two incomparable points; every pair is a coupled fixed point.
        "two_component" => {
            r#"{
            "schema_version": 1,
            "elements": ["p", "q"],
            "distance": [[0, 1], [1, 0]],
            "leq": [[1, 0], [0, 1]],
            "F": [[0, 0], [1, 1]],
            "start": [0, 0]
        }"#
        }
        "singleton" => {
            r#"{
            "schema_version": 1,
            "elements": ["e"],
            "distance": [[0]],
            "leq": [[1]],
            "F": [[0]],
            "start": [0, 0],
            "expected_fixed_point": [0, 0]
        }"#
        }
        "chain2_constant" => {
            r#"{
            "schema_version": 1,
            "elements": ["lo", "hi"],
            "distance": [[0, 1], [1, 0]],
            "leq": [[1, 1], [0, 1]],
            "F": [[1, 1], [1, 1]],
            "start": [0, 1],
            "expected_fixed_point": [1, 1]
        }"#
        }
        _ => return None,
    })
}

pub fn load_finite(path: impl AsRef<Path>) -> Result<Instance<FiniteSpace>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::ProblemFile {
        source_name: path.display().to_string(),
        location: "file".into(),
        message: e.to_string(),
    })?;
    parse_finite(&text, &path.display().to_string())
}

/// Parses the finite-problem JSON format; `source_name` labels errors.
pub fn parse_finite(text: &str, source_name: &str) -> Result<Instance<FiniteSpace>> {
    let fail = |location: &str, message: String| Error::ProblemFile {
        source_name: source_name.to_string(),
        location: location.to_string(),
        message,
    };
    let root: Value = serde_json::from_str(text)
        .map_err(|e| fail(&format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| fail("$", "expected a JSON object".into()))?;

    match obj.get("schema_version") {
        Some(v) if v.as_u64() == Some(crate::SCHEMA_VERSION as u64) => {}
        Some(v) => {
            return Err(fail(
                "$.schema_version",
                format!("unsupported version {v}, expected {}", crate::SCHEMA_VERSION),
            ))
        }
        None => return Err(fail("$.schema_version", "missing (required)".into())),
    }

    let elements = obj
        .get("elements")
        .and_then(Value::as_array)
        .ok_or_else(|| fail("$.elements", "expected an array of element names".into()))?;
    let names = elements
        .iter()
        .enumerate()
        .map(|(i, e)| match e {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(fail(&format!("$.elements[{i}]"), "expected a string".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let n = names.len();
    if n == 0 {
        return Err(fail("$.elements", "at least one element is required".into()));
    }

    let matrix = |key: &str| -> Result<&Vec<Value>> {
        let rows = obj
            .get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| fail(&format!("$.{key}"), format!("expected a {n}x{n} matrix")))?;
        if rows.len() != n {
            return Err(fail(&format!("$.{key}"), format!("has {} rows, expected {n}", rows.len())));
        }
        for (i, row) in rows.iter().enumerate() {
            let len = row.as_array().map(Vec::len);
            if len != Some(n) {
                return Err(fail(
                    &format!("$.{key}[{i}]"),
                    format!("expected a row of {n} entries, got {}", describe(row)),
                ));
            }
        }
        Ok(rows)
    };
    let cells = |key: &str| -> Result<Vec<(usize, usize, &Value)>> {
        Ok(matrix(key)?
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.as_array().expect("checked").iter().enumerate().map(move |(j, v)| (i, j, v)))
            .collect())
    };

    let mut distance = vec![Vec::with_capacity(n); n];
    for (i, j, v) in cells("distance")? {
        let text = match v {
            Value::Number(num) => num.to_string(),
            Value::String(s) => s.clone(),
            other => String::from(describe(other)),
        };
        let d = parse_rational(&text)
            .ok_or_else(|| fail(&format!("$.distance[{i}][{j}]"), format!("`{text}` is not a number")))?;
        distance[i].push(d);
    }

    let mut leq = vec![Vec::with_capacity(n); n];
    for (i, j, v) in cells("leq")? {
        let bit = match v.as_u64() {
            Some(0) => false,
            Some(1) => true,
            _ => return Err(fail(&format!("$.leq[{i}][{j}]"), format!("expected 0 or 1, got {v}"))),
        };
        leq[i].push(bit);
    }

    let mut table = vec![Vec::with_capacity(n); n];
    for (i, j, v) in cells("F")? {
        let idx = index(v, n)
            .ok_or_else(|| fail(&format!("$.F[{i}][{j}]"), format!("expected an element index in 0..{n}, got {v}")))?;
        table[i].push(idx);
    }

    let pair = |key: &str| -> Result<Option<PairPoint<usize>>> {
        let Some(v) = obj.get(key) else {
            return Ok(None);
        };
        let parsed = v.as_array().filter(|a| a.len() == 2).and_then(|a| Some((index(&a[0], n)?, index(&a[1], n)?)));
        parsed
            .map(|(a, b)| Some(PairPoint::new(a, b)))
            .ok_or_else(|| fail(&format!("$.{key}"), format!("expected [i, j] with indices in 0..{n}, got {v}")))
    };
    let start = pair("start")?;
    let expected_fixed_point = pair("expected_fixed_point")?;

    let space = FiniteSpace::new(names, distance, leq)?;
    let operator = TabulatedOperator::new(table)?;
    let default_start = match start {
        Some(s) => s,
        None => first_admissible(&space, &operator)?.unwrap_or(PairPoint::new(0, 0)),
    };
    let default_epsilon_grid = finite_epsilon_grid(&space);
    let name = obj.get("name").and_then(Value::as_str).map(str::to_string).unwrap_or_else(|| source_name.to_string());
    let space = Arc::new(space);
    let search_space = Arc::clone(&space);
    let bound_search: Arc<BoundSearch<usize>> =
        Arc::new(move |y: &PairPoint<usize>, v: &PairPoint<usize>| exhaustive_bound(search_space.as_ref(), y, v));
    Ok(Instance {
        name,
        space: Arc::try_unwrap(space).unwrap_or_else(|s| (*s).clone()),
        operator: Arc::new(operator),
        default_start,
        expected_fixed_point,
        bound_search: Some(bound_search),
        default_epsilon_grid,
    })
}

fn index(v: &Value, n: usize) -> Option<usize> {
    v.as_u64().and_then(|i| usize::try_from(i).ok()).filter(|&i| i < n)
}

fn describe(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array of the wrong length",
        Value::Object(_) => "an object",
    }
}

fn first_admissible(space: &FiniteSpace, op: &TabulatedOperator) -> Result<Option<PairPoint<usize>>> {
    for a in 0..space.len() {
        for b in 0..space.len() {
            let z = PairPoint::new(a, b);
            if check_start(space, op, &z)?.admissible {
                return Ok(Some(z));
            }
        }
    }
    Ok(None)
}

/// The distinct positive values of `d₂` on the space: every band that can
/// contain a configuration starts at one of them.
fn finite_epsilon_grid(space: &FiniteSpace) -> Vec<BigRational> {
    let n = space.len();
    let mut singles: Vec<BigRational> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            singles.push(space.distance(&a, &b));
        }
    }
    singles.sort();
    singles.dedup();
    let mut grid = Vec::new();
    for p in &singles {
        for q in &singles {
            let h = (p + q) / BigRational::from_integer(2.into());
            if h > BigRational::from_integer(0.into()) {
                grid.push(h);
            }
        }
    }
    grid.sort();
    grid.dedup();
    grid
}
