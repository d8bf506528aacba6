//! Command-line values: quantities with units and `start:stop:count` sweeps.

use std::fs;
use std::path::Path;

use coupler_core::io::{device_from_json, parse_quantity, Dimension, DeviceParams};
use serde_json::Value;

use crate::error::CliError;

pub fn quantity(text: &str, dim: Dimension) -> Result<f64, CliError> {
    parse_quantity(text, dim).map_err(CliError::from)
}

/// `start:stop:count` with both ends included, or a single value.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Sweep {
    pub fn parse(text: &str, dim: Dimension) -> Result<Self, CliError> {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            [v] => {
                let v = quantity(v, dim)?;
                Ok(Self { start: v, stop: v, count: 1 })
            }
            [a, b, n] => {
                let count: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| CliError::config(format!("`{text}`: point count `{n}` is not an integer")))?;
                if count == 0 {
                    return Err(CliError::config(format!("`{text}`: sweep is empty")));
                }
                Ok(Self {
                    start: quantity(a, dim)?,
                    stop: quantity(b, dim)?,
                    count,
                })
            }
            _ => Err(CliError::config(format!("`{text}`: expected start:stop:count"))),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.start + step * k as f64).collect()
    }
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn read_device(path: &Path) -> Result<DeviceParams, CliError> {
    device_from_json(read_json(path)?).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}
