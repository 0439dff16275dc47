//! Resolved call arguments and typed accessors.

use std::collections::BTreeMap;

use crate::error::{OpError, OpResult};
use crate::series::{Frame, Matrix, TimeSeries};
use crate::value::{FittedModel, Value};

/// Integral arguments may deviate from a whole number by this much.
const INT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ArgValue {
    Value(Value),
    List(Vec<ArgValue>),
}

impl ArgValue {
    fn describe(&self) -> String {
        match self {
            ArgValue::Value(v) => v.kind().to_string(),
            ArgValue::List(_) => "list".into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Args {
    values: BTreeMap<String, ArgValue>,
}

fn wrong(name: &str, want: &str, got: &ArgValue) -> OpError {
    OpError::InvalidArgument(format!(
        "argument `{name}` expects {want}, got {}",
        got.describe()
    ))
}

impl Args {
    pub fn new(values: BTreeMap<String, ArgValue>) -> Self {
        Self { values }
    }

    pub fn insert(&mut self, name: impl Into<String>, v: ArgValue) {
        self.values.insert(name.into(), v);
    }

    pub fn get(&self, name: &str) -> Option<&ArgValue> {
        self.values.get(name)
    }

    fn required(&self, name: &str) -> OpResult<&ArgValue> {
        self.values
            .get(name)
            .ok_or_else(|| OpError::InvalidArgument(format!("missing argument `{name}`")))
    }

    pub fn series(&self, name: &str) -> OpResult<&TimeSeries> {
        match self.required(name)? {
            ArgValue::Value(Value::Series(s)) => Ok(s),
            ArgValue::Value(Value::Frame(f)) if f.width() == 1 => Ok(&f.columns()[0]),
            other => Err(wrong(name, "a series", other)),
        }
    }

    pub fn opt_series(&self, name: &str) -> OpResult<Option<&TimeSeries>> {
        match self.values.get(name) {
            None => Ok(None),
            Some(_) => self.series(name).map(Some),
        }
    }

    /// A frame, promoting a series to a one-column frame.
    pub fn frame(&self, name: &str) -> OpResult<Frame> {
        match self.required(name)? {
            ArgValue::Value(Value::Frame(f)) => Ok(f.clone()),
            ArgValue::Value(Value::Series(s)) => Ok(Frame::from(s.clone())),
            other => Err(wrong(name, "a frame", other)),
        }
    }

    pub fn opt_frame(&self, name: &str) -> OpResult<Option<Frame>> {
        match self.values.get(name) {
            None => Ok(None),
            Some(_) => self.frame(name).map(Some),
        }
    }

    pub fn scalar(&self, name: &str) -> OpResult<f64> {
        match self.required(name)? {
            ArgValue::Value(Value::Scalar(x)) => Ok(*x),
            other => Err(wrong(name, "a number", other)),
        }
    }

    pub fn opt_scalar(&self, name: &str) -> OpResult<Option<f64>> {
        match self.values.get(name) {
            None => Ok(None),
            Some(_) => self.scalar(name).map(Some),
        }
    }

    pub fn int(&self, name: &str) -> OpResult<usize> {
        let x = self.scalar(name)?;
        let r = x.round();
        if !(r >= 0.0 && (x - r).abs() <= INT_SLACK && r <= u32::MAX as f64) {
            return Err(OpError::InvalidArgument(format!(
                "argument `{name}` must be a non-negative integer, got {x}"
            )));
        }
        Ok(r as usize)
    }

    pub fn opt_int(&self, name: &str) -> OpResult<Option<usize>> {
        match self.values.get(name) {
            None => Ok(None),
            Some(_) => self.int(name).map(Some),
        }
    }

    pub fn text(&self, name: &str) -> OpResult<&str> {
        match self.required(name)? {
            ArgValue::Value(Value::Text(s)) => Ok(s),
            other => Err(wrong(name, "a string", other)),
        }
    }

    pub fn opt_text(&self, name: &str) -> OpResult<Option<&str>> {
        match self.values.get(name) {
            None => Ok(None),
            Some(_) => self.text(name).map(Some),
        }
    }

    pub fn text_list(&self, name: &str) -> OpResult<Vec<String>> {
        match self.required(name)? {
            ArgValue::List(items) => items
                .iter()
                .map(|i| match i {
                    ArgValue::Value(Value::Text(s)) => Ok(s.clone()),
                    other => Err(wrong(name, "a list of strings", other)),
                })
                .collect(),
            ArgValue::Value(Value::Text(s)) => Ok(vec![s.clone()]),
            other => Err(wrong(name, "a list of strings", other)),
        }
    }

    pub fn matrix(&self, name: &str) -> OpResult<&Matrix> {
        match self.required(name)? {
            ArgValue::Value(Value::Matrix(m)) => Ok(m),
            other => Err(wrong(name, "a matrix", other)),
        }
    }

    pub fn opt_model(&self, name: &str) -> OpResult<Option<&FittedModel>> {
        match self.values.get(name) {
            None => Ok(None),
            Some(ArgValue::Value(Value::ModelHandle(m))) => Ok(Some(m)),
            Some(other) => Err(wrong(name, "a fitted model", other)),
        }
    }

    /// A number, or the last value of a series.
    pub fn opt_anchor(&self, name: &str) -> OpResult<Option<f64>> {
        match self.values.get(name) {
            None => Ok(None),
            Some(ArgValue::Value(Value::Scalar(x))) => Ok(Some(*x)),
            Some(ArgValue::Value(Value::Series(s))) => Ok(s.values().last().copied()),
            Some(other) => Err(wrong(name, "a number or series", other)),
        }
    }
}
