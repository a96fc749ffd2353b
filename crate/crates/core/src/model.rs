//! Generic linear model: a variable catalog, a maximization objective with a
//! constant term, and linear constraints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
            Relation::Ge => lhs >= rhs - tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    /// May be `f64::NEG_INFINITY`.
    pub lower: f64,
    /// May be `f64::INFINITY`.
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Maximize `objective . x + constant` subject to constraints and bounds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub variables: Vec<Variable>,
    pub objective: Vec<f64>,
    pub constant: f64,
    pub constraints: Vec<Constraint>,
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64, integer: bool) -> usize {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
        });
        self.objective.push(0.0);
        self.variables.len() - 1
    }

    pub fn set_objective(&mut self, var: usize, coefficient: f64) {
        self.objective[var] = coefficient;
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> Result<usize> {
        let name = name.into();
        if let Some(&(v, _)) = terms.iter().find(|(v, _)| *v >= self.variables.len()) {
            return Err(Error::Validation(format!(
                "constraint `{name}` references unknown variable {v}"
            )));
        }
        self.constraints.push(Constraint {
            name,
            terms,
            relation,
            rhs,
        });
        Ok(self.constraints.len() - 1)
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn integer_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.integer)
            .map(|(i, _)| i)
    }

    pub fn evaluate_objective(&self, x: &[f64]) -> f64 {
        self.constant + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Checks the well-formedness invariants of the catalog.
    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.variables.len() {
            return Err(Error::Shape("objective length differs from variable count".into()));
        }
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper || v.lower == f64::INFINITY {
                return Err(Error::Validation(format!(
                    "variable `{}` has invalid bounds [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
        }
        for c in &self.constraints {
            if c.terms.iter().any(|(v, _)| *v >= self.variables.len()) {
                return Err(Error::Validation(format!(
                    "constraint `{}` references an unknown variable",
                    c.name
                )));
            }
            if !c.rhs.is_finite() {
                return Err(Error::Validation(format!("constraint `{}` has a non-finite rhs", c.name)));
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &val) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - val).max(val - v.upper);
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|(v, a)| a * x[*v]).sum();
            let gap = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(gap);
        }
        worst
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.variables
            .iter()
            .zip(x)
            .all(|(v, &val)| val >= v.lower - tol && val <= v.upper + tol)
            && self.constraints.iter().all(|c| {
                let lhs: f64 = c.terms.iter().map(|(v, a)| a * x[*v]).sum();
                c.relation.holds(lhs, c.rhs, tol)
            })
    }
}
