//! `when` rules of scenario files: conjunctions of field comparisons.
//!
//! ```text
//! button == primary && x >= 0 && target != canvas
//! ```
//!
//! Fields: `button`, `key`, `target`, `x`, `y` (current position),
//! `src_x`, `src_y`, `tgt_x`, `tgt_y`, `keys` (number typed), `taps`,
//! `touches`. Button names: `primary` (0), `middle` (1), `secondary` (2).
//! A comparison on a field the data does not carry is false.

use std::fmt;

use thiserror::Error;

use crate::event::Point;
use crate::interaction::InteractionData;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad rule `{rule}`: {reason}")]
pub struct RuleError {
    pub rule: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Button,
    Key,
    Target,
    X,
    Y,
    SrcX,
    SrcY,
    TgtX,
    TgtY,
    Keys,
    Taps,
    Touches,
}

impl Field {
    fn parse(s: &str) -> Option<Field> {
        Some(match s {
            "button" => Field::Button,
            "key" => Field::Key,
            "target" => Field::Target,
            "x" => Field::X,
            "y" => Field::Y,
            "src_x" => Field::SrcX,
            "src_y" => Field::SrcY,
            "tgt_x" => Field::TgtX,
            "tgt_y" => Field::TgtY,
            "keys" => Field::Keys,
            "taps" => Field::Taps,
            "touches" => Field::Touches,
            _ => return None,
        })
    }

    fn is_text(self) -> bool {
        matches!(self, Field::Key | Field::Target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
struct Cond {
    field: Field,
    op: Op,
    value: Value,
}

/// A parsed rule. The empty rule always holds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rule {
    source: String,
    conds: Vec<Cond>,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

const OPS: [(&str, Op); 6] = [("==", Op::Eq), ("!=", Op::Ne), ("<=", Op::Le), (">=", Op::Ge), ("<", Op::Lt), (">", Op::Gt)];

impl Rule {
    pub fn parse(src: &str) -> Result<Rule, RuleError> {
        let err = |reason: String| RuleError { rule: src.to_owned(), reason };
        let mut conds = Vec::new();
        if src.trim().is_empty() {
            return Ok(Rule::default());
        }
        for part in src.split("&&") {
            let part = part.trim();
            let (pos, sym, op) = OPS
                .iter()
                .filter_map(|&(sym, op)| part.find(sym).map(|p| (p, sym, op)))
                .min_by_key(|&(p, sym, _)| (p, std::cmp::Reverse(sym.len())))
                .ok_or_else(|| err(format!("no comparison in `{part}`")))?;
            let (lhs, rhs) = (part[..pos].trim(), part[pos + sym.len()..].trim());
            let field = Field::parse(lhs).ok_or_else(|| err(format!("unknown field `{lhs}`")))?;
            if rhs.is_empty() {
                return Err(err(format!("missing value after `{sym}`")));
            }
            let value = if field.is_text() {
                if !matches!(op, Op::Eq | Op::Ne) {
                    return Err(err(format!("`{lhs}` only supports == and !=")));
                }
                Value::Text(rhs.trim_matches('"').to_owned())
            } else if field == Field::Button {
                let n = match rhs {
                    "primary" => 0.0,
                    "middle" => 1.0,
                    "secondary" => 2.0,
                    _ => rhs.parse().map_err(|_| err(format!("bad button `{rhs}`")))?,
                };
                Value::Num(n)
            } else {
                Value::Num(rhs.parse().map_err(|_| err(format!("bad number `{rhs}`")))?)
            };
            conds.push(Cond { field, op, value });
        }
        Ok(Rule { source: src.to_owned(), conds })
    }

    pub fn eval(&self, d: &InteractionData) -> bool {
        self.conds.iter().all(|c| c.eval(d))
    }
}

fn current(d: &InteractionData) -> Option<Point> {
    match d {
        InteractionData::Point(p) => p.position,
        InteractionData::FromTo(f) => f.tgt_position.or(f.src_position),
        InteractionData::Tap(t) => t.taps.last()?.position,
        InteractionData::MultiTouch(m) => {
            let f = &m.touches.first()?.data;
            f.tgt_position.or(f.src_position)
        }
        _ => None,
    }
}

fn from_to(d: &InteractionData) -> Option<&crate::interaction::FromToData> {
    match d {
        InteractionData::FromTo(f) => Some(f),
        InteractionData::MultiTouch(m) => m.touches.first().map(|t| &t.data),
        _ => None,
    }
}

impl Cond {
    fn num(&self, d: &InteractionData) -> Option<f64> {
        Some(match self.field {
            Field::Button => f64::from(match d {
                InteractionData::Point(p) => p.button?,
                InteractionData::FromTo(f) => f.button?,
                InteractionData::Tap(t) => t.taps.last()?.button?,
                _ => return None,
            }),
            Field::X => current(d)?.x,
            Field::Y => current(d)?.y,
            Field::SrcX => from_to(d)?.src_position?.x,
            Field::SrcY => from_to(d)?.src_position?.y,
            Field::TgtX => from_to(d)?.tgt_position?.x,
            Field::TgtY => from_to(d)?.tgt_position?.y,
            Field::Keys => match d {
                InteractionData::Keys(k) => k.keys.len() as f64,
                _ => return None,
            },
            Field::Taps => match d {
                InteractionData::Tap(t) => t.taps.len() as f64,
                _ => return None,
            },
            Field::Touches => match d {
                InteractionData::MultiTouch(m) => m.touches.len() as f64,
                _ => return None,
            },
            Field::Key | Field::Target => return None,
        })
    }

    fn text<'d>(&self, d: &'d InteractionData) -> Option<&'d str> {
        match self.field {
            Field::Key => match d {
                InteractionData::Keys(k) => k.keys.last().map(String::as_str),
                _ => None,
            },
            Field::Target => crate::demo::data_target(d).map(|n| n.as_str()),
            _ => None,
        }
    }

    fn eval(&self, d: &InteractionData) -> bool {
        match &self.value {
            Value::Num(v) => self.num(d).is_some_and(|x| match self.op {
                Op::Eq => x == *v,
                Op::Ne => x != *v,
                Op::Lt => x < *v,
                Op::Le => x <= *v,
                Op::Gt => x > *v,
                Op::Ge => x >= *v,
            }),
            Value::Text(v) => self.text(d).is_some_and(|x| (x == v) == (self.op == Op::Eq)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::{FromToData, KeysData};

    fn drag(button: u8) -> InteractionData {
        InteractionData::FromTo(FromToData {
            src_object: Some("n1".into()),
            tgt_object: Some("n1".into()),
            src_position: Some(Point::new(1.0, 1.0)),
            tgt_position: Some(Point::new(4.0, 5.0)),
            button: Some(button),
        })
    }

    #[test]
    fn evaluates_conjunctions() {
        let r = Rule::parse("button == primary && tgt_x >= 4 && target != canvas").unwrap();
        assert!(r.eval(&drag(0)));
        assert!(!r.eval(&drag(2)));
        assert!(Rule::parse("x<=4&&y>4.5").unwrap().eval(&drag(0)));
        assert!(Rule::parse("").unwrap().eval(&drag(0)));
    }

    #[test]
    fn missing_fields_are_false() {
        let keys = InteractionData::Keys(KeysData { keys: vec!["a".into()], target: None });
        assert!(!Rule::parse("button == 0").unwrap().eval(&keys));
        assert!(Rule::parse("key == a && keys == 1").unwrap().eval(&keys));
        assert!(!Rule::parse("target == n1").unwrap().eval(&keys));
    }

    #[test]
    fn rejects_bad_rules() {
        for bad in ["colour == red", "button", "key < a", "x == ", "button == left"] {
            assert!(Rule::parse(bad).is_err(), "{bad}");
        }
    }
}
