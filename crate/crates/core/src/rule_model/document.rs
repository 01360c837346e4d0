//! Human-readable, versioned rule serialization.
//!
//! ```json
//! { "format": "boolrule.rule", "version": 1, "form": "DNF", "R": 2, "num_columns": 37,
//!   "clauses": [ { "disabled": false, "text": "glucose > 127.5 AND age > 28",
//!                  "literals": [ { "column": 12, "feature": "glucose", "op": ">", "threshold": 127.5 }, ... ] } ] }
//! ```
//!
//! Literals carry enough structure to be evaluated directly against raw CSV
//! values, so a saved rule does not depend on re-running binarization.

use serde::{Deserialize, Serialize};

use super::{Clause, Form, TwoLevelRule};
use crate::data::{Direction, FeatureMeta, RawDataset, RawValue};
use crate::error::{Error, Result};

pub const RULE_FORMAT: &str = "boolrule.rule";
pub const RULE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiteralOp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "is_true")]
    IsTrue,
    #[serde(rename = "is_false")]
    IsFalse,
    /// The disable column: the enclosing clause no longer constrains the rule.
    #[serde(rename = "disable")]
    Disable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Literal {
    /// Binary column index in the training feature space.
    pub column: usize,
    pub feature: String,
    pub op: LiteralOp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

impl Literal {
    pub fn from_meta(column: usize, meta: &FeatureMeta, origin_names: &[String]) -> Self {
        let feature = if meta.is_disable {
            "TRUE".to_string()
        } else {
            origin_names
                .get(meta.origin)
                .cloned()
                .unwrap_or_else(|| format!("x{}", meta.origin))
        };
        let op = match (meta.is_disable, &meta.category, meta.threshold, meta.direction) {
            (true, ..) => LiteralOp::Disable,
            (false, Some(_), _, Direction::Gt) => LiteralOp::Eq,
            (false, Some(_), _, Direction::Leq) => LiteralOp::Ne,
            (false, None, Some(_), Direction::Leq) => LiteralOp::Le,
            (false, None, Some(_), Direction::Gt) => LiteralOp::Gt,
            (false, None, None, Direction::Gt) => LiteralOp::IsTrue,
            (false, None, None, Direction::Leq) => LiteralOp::IsFalse,
        };
        Self {
            column,
            feature,
            op,
            threshold: meta.threshold,
            category: meta.category.clone(),
        }
    }

    pub fn text(&self) -> String {
        let t = || self.threshold.map_or_else(|| "?".into(), |t| t.to_string());
        let c = || self.category.clone().unwrap_or_default();
        match self.op {
            LiteralOp::Le => format!("{} <= {}", self.feature, t()),
            LiteralOp::Gt => format!("{} > {}", self.feature, t()),
            LiteralOp::Eq => format!("{} == {}", self.feature, c()),
            LiteralOp::Ne => format!("{} != {}", self.feature, c()),
            LiteralOp::IsTrue => self.feature.clone(),
            LiteralOp::IsFalse => format!("NOT {}", self.feature),
            LiteralOp::Disable => "TRUE".into(),
        }
    }

    /// Truth value on one raw cell of this literal's feature.
    fn eval(&self, value: &RawValue<'_>) -> Result<bool> {
        let mismatch = || {
            Error::Schema(format!(
                "literal '{}' does not apply to the type of column '{}'",
                self.text(),
                self.feature
            ))
        };
        let threshold = || self.threshold.ok_or_else(mismatch);
        let category = || self.category.as_deref().ok_or_else(mismatch);
        match (self.op, value) {
            (LiteralOp::Le, RawValue::Number(v)) => Ok(*v <= threshold()?),
            (LiteralOp::Gt, RawValue::Number(v)) => Ok(*v > threshold()?),
            (LiteralOp::Eq, RawValue::Category(v)) => Ok(*v == category()?),
            (LiteralOp::Ne, RawValue::Category(v)) => Ok(*v != category()?),
            (LiteralOp::IsTrue, RawValue::Flag(b)) => Ok(*b),
            (LiteralOp::IsFalse, RawValue::Flag(b)) => Ok(!*b),
            _ => Err(mismatch()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseDocument {
    pub disabled: bool,
    pub text: String,
    pub literals: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleDocument {
    pub format: String,
    pub version: u32,
    pub form: Form,
    #[serde(rename = "R")]
    pub r: usize,
    pub num_columns: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub clauses: Vec<ClauseDocument>,
}

impl RuleDocument {
    pub fn new(rule: &TwoLevelRule, columns: &[FeatureMeta], origin_names: &[String]) -> Result<Self> {
        if columns.len() != rule.arity() {
            return Err(Error::ArityMismatch {
                expected: rule.arity(),
                actual: columns.len(),
            });
        }
        let joiner = match rule.form() {
            Form::Cnf => " OR ",
            Form::Dnf => " AND ",
        };
        let clauses = rule
            .clauses()
            .iter()
            .map(|c| {
                let literals: Vec<Literal> = c
                    .selected()
                    .map(|j| Literal::from_meta(j, &columns[j], origin_names))
                    .collect();
                let disabled = literals.iter().any(|l| l.op == LiteralOp::Disable);
                let text = if disabled {
                    "(disabled)".to_string()
                } else if literals.is_empty() {
                    match rule.form() {
                        Form::Cnf => "FALSE".to_string(),
                        Form::Dnf => "TRUE".to_string(),
                    }
                } else {
                    literals.iter().map(Literal::text).collect::<Vec<_>>().join(joiner)
                };
                ClauseDocument {
                    disabled,
                    text,
                    literals,
                }
            })
            .collect();
        Ok(Self {
            format: RULE_FORMAT.into(),
            version: RULE_VERSION,
            form: rule.form(),
            r: rule.num_clauses(),
            num_columns: rule.arity(),
            label: None,
            clauses,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.format != RULE_FORMAT {
            return Err(Error::Schema(format!("not a rule document: format '{}'", doc.format)));
        }
        if doc.version != RULE_VERSION {
            return Err(Error::Version {
                what: "rule",
                found: doc.version,
                expected: RULE_VERSION,
            });
        }
        if doc.clauses.len() != doc.r {
            return Err(Error::Schema(format!(
                "R = {} but {} clauses listed",
                doc.r,
                doc.clauses.len()
            )));
        }
        Ok(doc)
    }

    /// The binary-weight rule in the training feature space.
    pub fn to_rule(&self) -> Result<TwoLevelRule> {
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                let mut clause = Clause::empty(self.num_columns);
                for l in &c.literals {
                    if l.column >= self.num_columns {
                        return Err(Error::ArityMismatch {
                            expected: self.num_columns,
                            actual: l.column + 1,
                        });
                    }
                    clause.set(l.column, true);
                }
                Ok(clause)
            })
            .collect::<Result<Vec<_>>>()?;
        TwoLevelRule::new(clauses, self.form)
    }

    /// Predictions on raw rows, evaluating literals on the original values.
    pub fn predict_raw(&self, raw: &RawDataset) -> Result<Vec<bool>> {
        let resolved: Vec<Vec<(usize, &Literal)>> = self
            .clauses
            .iter()
            .filter(|c| !c.disabled)
            .map(|c| {
                c.literals
                    .iter()
                    .map(|l| {
                        raw.feature_index(&l.feature)
                            .map(|f| (f, l))
                            .ok_or_else(|| Error::Schema(format!("rule feature '{}' missing from data", l.feature)))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(raw.len());
        for i in 0..raw.len() {
            let mut clause_values = Vec::with_capacity(resolved.len());
            for lits in &resolved {
                let mut vals = Vec::with_capacity(lits.len());
                for &(f, l) in lits {
                    vals.push(l.eval(&raw.value(i, f))?);
                }
                clause_values.push(match self.form {
                    Form::Cnf => vals.iter().any(|&b| b),
                    Form::Dnf => vals.iter().all(|&b| b),
                });
            }
            // Disabled clauses are skipped: a disabled CNF clause is constant 1,
            // a disabled DNF clause constant 0, the identity of each combiner.
            out.push(match self.form {
                Form::Cnf => clause_values.iter().all(|&b| b),
                Form::Dnf => clause_values.iter().any(|&b| b),
            });
        }
        Ok(out)
    }

    /// IF/THEN rendering, one clause per line.
    pub fn explain(&self) -> String {
        let label = self.label.as_deref().unwrap_or("label");
        let active: Vec<&ClauseDocument> = self.clauses.iter().filter(|c| !c.disabled).collect();
        let (outer, empty) = match self.form {
            Form::Cnf => ("AND", "TRUE"),
            Form::Dnf => ("OR", "FALSE"),
        };
        let mut s = String::new();
        if active.is_empty() {
            s.push_str(&format!("IF {empty}\n"));
        }
        for (k, c) in active.iter().enumerate() {
            let lead = if k == 0 { "IF  " } else { outer };
            let pad = if k == 0 { "" } else { " " };
            s.push_str(&format!("{lead}{pad}({})\n", c.text));
        }
        s.push_str(&format!("THEN {label} = 1\nELSE {label} = 0\n"));
        s
    }
}
