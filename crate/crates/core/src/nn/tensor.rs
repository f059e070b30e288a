use crate::{Error, Result};

/// Common access to the flat value buffer of a signal.
pub trait Tensor: Sized {
    fn values(&self) -> &[f64];
    fn values_mut(&mut self) -> &mut [f64];

    fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// A `channels × length` signal stored channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    length: usize,
    values: Vec<f64>,
}

impl FeatureMap {
    pub fn new(channels: usize, length: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 || length == 0 {
            return Err(Error::config(format!("feature map must be non-empty, got {channels}×{length}")));
        }
        if values.len() != channels * length {
            return Err(Error::config(format!(
                "feature map {channels}×{length} needs {} values, got {}",
                channels * length,
                values.len()
            )));
        }
        Ok(Self { channels, length, values })
    }

    pub fn zeros(channels: usize, length: usize) -> Self {
        Self { channels, length, values: vec![0.0; channels * length] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let length = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != length) {
            return Err(Error::config("ragged feature map rows"));
        }
        Self::new(rows.len(), length, rows.concat())
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.values[c * self.length..(c + 1) * self.length]
    }

    pub fn get(&self, c: usize, t: usize) -> f64 {
        self.values[c * self.length + t]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl Tensor for FeatureMap {
    fn values(&self) -> &[f64] {
        &self.values
    }

    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// A flat activation vector.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(size: usize) -> Self {
        Self(vec![0.0; size])
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

impl From<FeatureMap> for DenseVector {
    /// Flattens channel-major.
    fn from(map: FeatureMap) -> Self {
        Self(map.values)
    }
}

impl Tensor for DenseVector {
    fn values(&self) -> &[f64] {
        &self.0
    }

    fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}
