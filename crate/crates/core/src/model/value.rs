use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Primitive type of an attribute value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Boolean,
    Integer,
    Float,
    String,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Boolean => "boolean",
            ValueType::Integer => "integer",
            ValueType::Float => "float",
            ValueType::String => "string",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            ValueType::Boolean => 0,
            ValueType::Integer => 1,
            ValueType::Float => 2,
            ValueType::String => 3,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => ValueType::Boolean,
            1 => ValueType::Integer,
            2 => ValueType::Float,
            3 => ValueType::String,
            _ => return None,
        })
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ValueType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "boolean" | "bool" => Ok(ValueType::Boolean),
            "integer" | "int" => Ok(ValueType::Integer),
            "float" => Ok(ValueType::Float),
            "string" | "str" => Ok(ValueType::String),
            other => Err(ModelError::Parse(format!("unknown value type `{other}`"))),
        }
    }
}

/// A single attribute value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Bool(_) => ValueType::Boolean,
            Value::Int(_) => ValueType::Integer,
            Value::Float(_) => ValueType::Float,
            Value::Str(_) => ValueType::String,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Numeric view of integer and float values.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Parses the textual form of a value of the given type.
    pub fn parse(ty: ValueType, text: &str) -> Result<Value, ModelError> {
        let bad = || ModelError::Parse(format!("`{text}` is not a valid {ty}"));
        Ok(match ty {
            ValueType::Boolean => match text {
                "true" | "1" => Value::Bool(true),
                "false" | "0" => Value::Bool(false),
                _ => return Err(bad()),
            },
            ValueType::Integer => Value::Int(text.parse().map_err(|_| bad())?),
            ValueType::Float => Value::Float(text.parse().map_err(|_| bad())?),
            ValueType::String => Value::Str(text.to_string()),
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Str(s) => f.write_str(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trips() {
        for x in [0.1, 1.0, -2.5e-300, 123456.789, f64::MAX] {
            let v = Value::Float(x);
            assert_eq!(Value::parse(ValueType::Float, &v.to_string()).unwrap(), v);
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(Value::parse(ValueType::Integer, "1.5").is_err());
        assert!(Value::parse(ValueType::Boolean, "yes").is_err());
    }
}
