//! Builds bundled problems from a name and a parameter map.
//!
//! | name               | keys                                   |
//! |--------------------|----------------------------------------|
//! | `quadratic`        | `dim`, `a`, `x0`                       |
//! | `cosine-quadratic` | `dim`, `a`, `b`, `c`, `x0`             |
//! | `logistic`         | `dim`, `samples`, `mu`, `data_seed`, `x0` |
//!
//! `a` and `x0` accept a scalar (broadcast to `dim`) or a list. Unknown keys
//! are rejected.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{CosineQuadratic, Logistic, ProblemInstance, Quadratic};
use crate::vector::Vector;

pub const PROBLEM_NAMES: [&str; 3] = ["quadratic", "cosine-quadratic", "logistic"];

const DEFAULT_DIM: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    List(Vec<f64>),
    Text(String),
}

pub type ParamMap = BTreeMap<String, ParamValue>;

struct Params<'a> {
    problem: &'a str,
    map: &'a ParamMap,
}

impl Params<'_> {
    fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for key in self.map.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "unknown parameter `{key}` for problem `{}` (allowed: {})",
                    self.problem,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn float(&self, key: &str, default: f64) -> Result<f64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(ParamValue::Float(v)) => Ok(*v),
            Some(ParamValue::Int(v)) => Ok(*v as f64),
            Some(other) => Err(self.type_error(key, "a number", other)),
        }
    }

    fn uint(&self, key: &str, default: u64) -> Result<u64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(ParamValue::Int(v)) if *v >= 0 => Ok(*v as u64),
            Some(other) => Err(self.type_error(key, "a nonnegative integer", other)),
        }
    }

    /// Scalar or list; returns `None` when absent.
    fn vector(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(ParamValue::List(v)) => Ok(Some(v.clone())),
            Some(ParamValue::Float(v)) => Ok(Some(alloc::vec![*v])),
            Some(ParamValue::Int(v)) => Ok(Some(alloc::vec![*v as f64])),
            Some(other) => Err(self.type_error(key, "a number or list", other)),
        }
    }

    fn is_list(&self, key: &str) -> bool {
        matches!(self.map.get(key), Some(ParamValue::List(_)))
    }

    fn type_error(&self, key: &str, expected: &str, got: &ParamValue) -> Error {
        Error::InvalidConfig(format!(
            "parameter `{key}` of `{}` must be {expected}, got {got:?}",
            self.problem
        ))
    }

    /// Resolves `dim` from the explicit key or from list-valued parameters.
    fn dim(&self, list_keys: &[&str]) -> Result<usize> {
        let explicit = match self.map.get("dim") {
            None => None,
            Some(_) => Some(self.uint("dim", 0)? as usize),
        };
        let mut implied = None;
        for key in list_keys {
            if self.is_list(key) {
                let len = self.vector(key)?.map(|v| v.len()).unwrap_or(0);
                match implied {
                    None => implied = Some(len),
                    Some(d) if d != len => {
                        return Err(Error::InvalidConfig(format!(
                            "list parameters of `{}` disagree on dimension",
                            self.problem
                        )))
                    }
                    _ => {}
                }
            }
        }
        let dim = match (explicit, implied) {
            (Some(e), Some(i)) if e != i => {
                return Err(Error::InvalidConfig(format!(
                    "`dim = {e}` conflicts with list parameters of length {i}"
                )))
            }
            (Some(e), _) => e,
            (None, Some(i)) => i,
            (None, None) => DEFAULT_DIM,
        };
        if dim == 0 {
            return Err(Error::InvalidConfig("`dim` must be >= 1".to_string()));
        }
        Ok(dim)
    }

    fn broadcast(&self, key: &str, dim: usize, default: f64) -> Result<Vec<f64>> {
        Ok(match self.vector(key)? {
            None => alloc::vec![default; dim],
            Some(v) if v.len() == 1 && !self.is_list(key) => alloc::vec![v[0]; dim],
            Some(v) => v,
        })
    }
}

/// Builds a bundled problem by name.
pub fn build_problem(name: &str, params: &ParamMap) -> Result<ProblemInstance> {
    let p = Params { problem: name, map: params };
    match name {
        "quadratic" => {
            p.reject_unknown(&["dim", "a", "x0"])?;
            let dim = p.dim(&["a", "x0"])?;
            let a = p.broadcast("a", dim, 1.0)?;
            let x0 = p.broadcast("x0", dim, 1.0)?;
            Quadratic::new(a)?.instance(Vector::from(x0))
        }
        "cosine-quadratic" => {
            p.reject_unknown(&["dim", "a", "b", "c", "x0"])?;
            let dim = p.dim(&["a", "x0"])?;
            let a = p.broadcast("a", dim, 1.0)?;
            let b = p.float("b", 1.0)?;
            let c = p.float("c", 1.0)?;
            let x0 = p.broadcast("x0", dim, 3.0)?;
            CosineQuadratic::new(a, b, c)?.instance(Vector::from(x0))
        }
        "logistic" => {
            p.reject_unknown(&["dim", "samples", "mu", "data_seed", "x0"])?;
            let dim = p.dim(&["x0"])?;
            let samples = p.uint("samples", 200)? as usize;
            let mu = p.float("mu", 0.01)?;
            let seed = p.uint("data_seed", 0)?;
            let x0 = p.broadcast("x0", dim, 0.0)?;
            Logistic::synthetic(dim, samples, mu, seed)?.instance(Vector::from(x0))
        }
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(entries: &[(&str, ParamValue)]) -> ParamMap {
        entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn builds_each_problem() {
        for name in PROBLEM_NAMES {
            let p = build_problem(name, &ParamMap::new()).unwrap();
            assert_eq!(p.dim(), DEFAULT_DIM);
            assert!(p.l1 > 0.0);
            assert!(p.initial_gap() > 0.0, "{name}");
        }
    }

    #[test]
    fn list_parameters_set_dimension() {
        let p = build_problem(
            "quadratic",
            &params(&[("a", ParamValue::List(alloc::vec![1.0, 3.0, 2.0]))]),
        )
        .unwrap();
        assert_eq!(p.dim(), 3);
        assert_eq!(p.l1, 3.0);
    }

    #[test]
    fn rejects_unknown_keys_and_names() {
        let err = build_problem("quadratic", &params(&[("mu", ParamValue::Float(1.0))]));
        assert!(matches!(err, Err(Error::InvalidConfig(_))));
        assert!(matches!(
            build_problem("rosenbrock", &ParamMap::new()),
            Err(Error::UnknownProblem(_))
        ));
    }

    #[test]
    fn rejects_conflicting_dimensions() {
        let err = build_problem(
            "cosine-quadratic",
            &params(&[
                ("dim", ParamValue::Int(4)),
                ("a", ParamValue::List(alloc::vec![1.0, 1.0])),
            ]),
        );
        assert!(err.is_err());
    }
}
