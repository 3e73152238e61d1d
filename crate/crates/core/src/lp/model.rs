use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cmp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, Rational)>,
    pub cmp: Cmp,
    pub rhs: Rational,
}

impl Constraint {
    pub fn lhs(&self, values: &[Rational]) -> Rational {
        self.terms.iter().map(|(j, a)| a * &values[*j]).sum()
    }

    pub fn is_satisfied(&self, values: &[Rational]) -> bool {
        let lhs = self.lhs(values);
        match self.cmp {
            Cmp::Le => lhs <= self.rhs,
            Cmp::Ge => lhs >= self.rhs,
            Cmp::Eq => lhs == self.rhs,
        }
    }
}

/// A minimization LP over nonnegative variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpModel {
    names: Vec<String>,
    constraints: Vec<Constraint>,
    objective: Vec<(usize, Rational)>,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable `>= 0` and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn var_name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn find_var(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Adds a constraint. Repeated variables in `terms` are merged and zero
    /// coefficients dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, Rational)>,
        cmp: Cmp,
        rhs: Rational,
    ) -> Result<usize> {
        let terms = self.normalize(terms)?;
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            cmp,
            rhs,
        });
        Ok(self.constraints.len() - 1)
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, Rational)>) -> Result<()> {
        self.objective = self.normalize(terms)?;
        Ok(())
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(usize, Rational)] {
        &self.objective
    }

    pub fn objective_value(&self, values: &[Rational]) -> Rational {
        self.objective.iter().map(|(j, c)| c * &values[*j]).sum()
    }

    /// First constraint violated by `values`, if any.
    pub fn first_violation(&self, values: &[Rational]) -> Option<&Constraint> {
        self.constraints.iter().find(|c| !c.is_satisfied(values))
    }

    fn normalize(&self, terms: Vec<(usize, Rational)>) -> Result<Vec<(usize, Rational)>> {
        let mut merged: std::collections::BTreeMap<usize, Rational> = Default::default();
        for (j, a) in terms {
            if j >= self.names.len() {
                return Err(Error::Structural(format!(
                    "constraint references undeclared variable {j}"
                )));
            }
            *merged.entry(j).or_default() += a;
        }
        Ok(merged
            .into_iter()
            .filter(|(_, a)| !num_traits::Zero::is_zero(a))
            .collect())
    }
}

impl Serialize for LpModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row<'a> {
            name: &'a str,
            terms: Vec<(&'a str, String)>,
            cmp: Cmp,
            rhs: String,
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            variables: &'a [String],
            objective: Vec<(&'a str, String)>,
            constraints: Vec<Row<'a>>,
        }
        fn named<'a>(names: &'a [String], terms: &[(usize, Rational)]) -> Vec<(&'a str, String)> {
            terms
                .iter()
                .map(|(j, a)| (names[*j].as_str(), rational::format(a)))
                .collect()
        }
        Dump {
            variables: &self.names,
            objective: named(&self.names, &self.objective),
            constraints: self
                .constraints
                .iter()
                .map(|c| Row {
                    name: &c.name,
                    terms: named(&self.names, &c.terms),
                    cmp: c.cmp,
                    rhs: rational::format(&c.rhs),
                })
                .collect(),
        }
        .serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values; meaningful only when optimal.
    pub values: Vec<Rational>,
    pub objective: Rational,
}

impl LpSolution {
    /// JSON form: status, objective and a name to `"p/q"` map of the
    /// nonzero variables.
    pub fn to_json(&self, model: &LpModel) -> serde_json::Value {
        struct Values<'a>(&'a LpModel, &'a [Rational]);
        impl Serialize for Values<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(None)?;
                for (j, v) in self.1.iter().enumerate() {
                    if !num_traits::Zero::is_zero(v) {
                        map.serialize_entry(self.0.var_name(j), &rational::format(v))?;
                    }
                }
                map.end()
            }
        }
        serde_json::json!({
            "status": self.status,
            "objective": rational::format(&self.objective),
            "values": serde_json::to_value(Values(model, &self.values)).expect("values serialize"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn undeclared_variable_rejected() {
        let mut m = LpModel::new();
        let x = m.add_var("x");
        assert!(m
            .add_constraint("c", vec![(x + 1, int(1))], Cmp::Ge, int(0))
            .is_err());
    }

    #[test]
    fn terms_are_merged() {
        let mut m = LpModel::new();
        let x = m.add_var("x");
        let y = m.add_var("y");
        m.add_constraint(
            "c",
            vec![(x, int(1)), (y, int(2)), (x, int(-1))],
            Cmp::Le,
            int(3),
        )
        .unwrap();
        assert_eq!(m.constraints()[0].terms, vec![(y, int(2))]);
    }

    #[test]
    fn model_dump_names_variables() {
        let mut m = LpModel::new();
        let x = m.add_var("x");
        m.add_constraint(
            "lower",
            vec![(x, int(1))],
            Cmp::Ge,
            crate::rational::ratio(1, 2),
        )
        .unwrap();
        m.set_objective(vec![(x, int(1))]).unwrap();
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["constraints"][0]["terms"][0][0], "x");
        assert_eq!(v["constraints"][0]["rhs"], "1/2");
        assert_eq!(v["constraints"][0]["cmp"], ">=");
    }
}
