use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataAxis {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl DataAxis {
    pub fn new(name: &str, unit: &str, values: Vec<f64>) -> DataAxis {
        DataAxis { name: name.to_string(), unit: unit.to_string(), values }
    }
}

/// Characters that may not appear in axis names or units.
pub const RESERVED: &[char] = &[',', '[', ']', '"', '#'];

/// Values on the product grid of `axes`, stored row-major with the first
/// axis outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    pub metadata: BTreeMap<String, String>,
    pub axes: Vec<DataAxis>,
    pub values: Vec<f64>,
}

impl Dataset {
    pub fn new(axes: Vec<DataAxis>, values: Vec<f64>, metadata: BTreeMap<String, String>) -> Result<Dataset> {
        let ds = Dataset { metadata, axes, values };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return domain("dataset needs at least one axis");
        }
        let expected: usize = self.shape().iter().product();
        if expected != self.values.len() {
            return domain(format!("{} values for a grid of {} points", self.values.len(), expected));
        }
        for a in &self.axes {
            let bad = |s: &str| s.chars().any(|c| RESERVED.contains(&c) || c.is_control());
            if a.name.is_empty() || a.name != a.name.trim() || bad(&a.name) || bad(&a.unit) || a.unit != a.unit.trim() {
                return domain(format!("axis name `{}` [{}] is empty or uses reserved characters", a.name, a.unit));
            }
            if a.name == "value" {
                return domain("`value` is reserved for the data column");
            }
            if a.values.windows(2).any(|w| w[1] <= w[0]) {
                return domain(format!("axis `{}` must be strictly ascending", a.name));
            }
        }
        if self.values.iter().chain(self.axes.iter().flat_map(|a| &a.values)).any(|v| !v.is_finite()) {
            return domain("dataset contains non-finite numbers");
        }
        Ok(())
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    pub fn flat_index(&self, index: &[usize]) -> Option<usize> {
        if index.len() != self.axes.len() {
            return None;
        }
        let mut flat = 0;
        for (i, a) in index.iter().zip(&self.axes) {
            if *i >= a.values.len() {
                return None;
            }
            flat = flat * a.values.len() + i;
        }
        Some(flat)
    }

    pub fn get(&self, index: &[usize]) -> Option<f64> {
        self.flat_index(index).map(|i| self.values[i])
    }

    /// Row `i` of a two-axis dataset (all second-axis values at first-axis index `i`).
    pub fn row(&self, i: usize) -> Option<&[f64]> {
        let shape = self.shape();
        if shape.len() != 2 || i >= shape[0] {
            return None;
        }
        Some(&self.values[i * shape[1]..(i + 1) * shape[1]])
    }

    /// Column `j` of a two-axis dataset.
    pub fn column(&self, j: usize) -> Option<Vec<f64>> {
        let shape = self.shape();
        if shape.len() != 2 || j >= shape[1] {
            return None;
        }
        Some((0..shape[0]).map(|i| self.values[i * shape[1] + j]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_indexing() {
        let ds = Dataset::new(
            vec![DataAxis::new("field", "T", vec![1.0, 2.0, 3.0]), DataAxis::new("tau", "s", vec![0.1, 0.2])],
            vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(ds.shape(), vec![3, 2]);
        assert_eq!(ds.get(&[2, 1]), Some(5.0));
        assert_eq!(ds.get(&[3, 0]), None);
        assert_eq!(ds.row(1).unwrap(), &[2.0, 3.0]);
        assert_eq!(ds.column(0).unwrap(), vec![0.0, 2.0, 4.0]);
    }

    #[test]
    fn rejects_bad_counts() {
        let axes = vec![DataAxis::new("x", "", vec![1.0, 2.0])];
        assert!(Dataset::new(axes.clone(), vec![1.0], BTreeMap::new()).is_err());
        assert!(Dataset::new(axes, vec![1.0, f64::NAN], BTreeMap::new()).is_err());
        let unsorted = vec![DataAxis::new("x", "", vec![2.0, 1.0])];
        assert!(Dataset::new(unsorted, vec![1.0, 2.0], BTreeMap::new()).is_err());
        let bad_name = vec![DataAxis::new("a,b", "", vec![1.0])];
        assert!(Dataset::new(bad_name, vec![1.0], BTreeMap::new()).is_err());
    }
}
