//! Fixtures shared by the benchmarks.

use coupled_fp::{builtin, FiniteSpace, Instance, Problem, RealLine};

pub fn real(name: &str) -> Instance<RealLine> {
    match builtin(name) {
        Ok(Problem::Real(inst)) => inst,
        _ => panic!("{name} is not a real-line problem"),
    }
}

pub fn finite(name: &str) -> Instance<FiniteSpace> {
    match builtin(name) {
        Ok(Problem::Finite(inst)) => inst,
        _ => panic!("{name} is not a finite problem"),
    }
}
