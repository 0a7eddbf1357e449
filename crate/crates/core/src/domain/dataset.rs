use serde::{Deserialize, Serialize};

use crate::domain::DupTolerance;
use crate::error::{check_dim, invalid, GmrsError, Result};

/// Outcome of a pairwise comparison: `-1` when the first sample is preferred,
/// `1` when the second is, `0` for indifference.
pub type Preference = i8;

/// Samples together with either their measures (black-box mode) or the
/// pairwise preferences expressed among them (preference mode).
///
/// Samples are append-only and pairwise distinct. In preference mode, entry
/// `h` of `preferences` is the outcome of comparing `samples[mapping[h].0]`
/// against `samples[mapping[h].1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDataset")]
pub struct Dataset {
    samples: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measures: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    preferences: Option<Vec<Preference>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mapping: Option<Vec<(usize, usize)>>,
}

#[derive(Deserialize)]
struct RawDataset {
    samples: Vec<Vec<f64>>,
    #[serde(default)]
    measures: Option<Vec<f64>>,
    #[serde(default)]
    preferences: Option<Vec<Preference>>,
    #[serde(default)]
    mapping: Option<Vec<(usize, usize)>>,
}

impl TryFrom<RawDataset> for Dataset {
    type Error = GmrsError;

    fn try_from(raw: RawDataset) -> Result<Self> {
        let ds = Dataset {
            samples: raw.samples,
            measures: raw.measures,
            preferences: raw.preferences,
            mapping: raw.mapping,
        };
        ds.validate()?;
        Ok(ds)
    }
}

impl Dataset {
    /// An empty dataset holding measures.
    pub fn blackbox() -> Self {
        Self {
            samples: Vec::new(),
            measures: Some(Vec::new()),
            preferences: None,
            mapping: None,
        }
    }

    /// An empty dataset holding preferences.
    pub fn preference() -> Self {
        Self {
            samples: Vec::new(),
            measures: None,
            preferences: Some(Vec::new()),
            mapping: Some(Vec::new()),
        }
    }

    /// Builds a black-box dataset from parallel lists, rejecting exact duplicates.
    pub fn from_measures(samples: Vec<Vec<f64>>, measures: Vec<f64>) -> Result<Self> {
        let ds = Self {
            samples,
            measures: Some(measures),
            preferences: None,
            mapping: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Builds a preference dataset from samples, outcomes and index pairs.
    pub fn from_preferences(
        samples: Vec<Vec<f64>>,
        preferences: Vec<Preference>,
        mapping: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let ds = Self {
            samples,
            measures: None,
            preferences: Some(preferences),
            mapping: Some(mapping),
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let n = self.samples.len();
        if let Some(first) = self.samples.first() {
            for s in &self.samples {
                check_dim(first.len(), s.len())?;
            }
        }
        for i in 0..n {
            for j in 0..i {
                if self.samples[i] == self.samples[j] {
                    return Err(GmrsError::DuplicateSample { index: j });
                }
            }
        }
        match (&self.measures, &self.preferences, &self.mapping) {
            (Some(y), None, None) => check_dim(n, y.len()),
            (None, Some(b), Some(map)) => {
                check_dim(b.len(), map.len())?;
                if b.iter().any(|v| !(-1..=1).contains(v)) {
                    return Err(invalid("preferences must be -1, 0 or 1"));
                }
                if map.iter().any(|&(l, k)| l >= n || k >= n || l == k) {
                    return Err(invalid("preference mapping refers to a missing or identical sample"));
                }
                Ok(())
            }
            _ => Err(invalid(
                "a dataset holds either measures or preferences with their mapping",
            )),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.samples.first().map(Vec::len)
    }

    pub fn is_preference(&self) -> bool {
        self.preferences.is_some()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.samples[i]
    }

    pub fn measures(&self) -> Option<&[f64]> {
        self.measures.as_deref()
    }

    pub fn preferences(&self) -> Option<&[Preference]> {
        self.preferences.as_deref()
    }

    pub fn mapping(&self) -> Option<&[(usize, usize)]> {
        self.mapping.as_deref()
    }

    /// Number of preferences (zero in black-box mode).
    pub fn num_preferences(&self) -> usize {
        self.preferences.as_ref().map_or(0, Vec::len)
    }

    /// Index of a stored sample within `tol` of `x`, if any.
    pub fn find(&self, x: &[f64], tol: &DupTolerance) -> Option<usize> {
        self.samples.iter().position(|s| tol.same(s, x))
    }

    fn push_sample_unchecked(&mut self, x: Vec<f64>, tol: &DupTolerance) -> Result<usize> {
        if let Some(d) = self.dim() {
            check_dim(d, x.len())?;
        }
        if let Some(index) = self.find(&x, tol) {
            return Err(GmrsError::DuplicateSample { index });
        }
        self.samples.push(x);
        Ok(self.samples.len() - 1)
    }

    /// Appends a measured sample (black-box mode) and returns its index.
    pub fn push_measure(&mut self, x: Vec<f64>, y: f64, tol: &DupTolerance) -> Result<usize> {
        if self.measures.is_none() {
            return Err(invalid("cannot add a measure to a preference dataset"));
        }
        let i = self.push_sample_unchecked(x, tol)?;
        self.measures.as_mut().expect("black-box dataset").push(y);
        Ok(i)
    }

    /// Appends a sample that has not been compared yet (preference mode).
    pub fn push_sample(&mut self, x: Vec<f64>, tol: &DupTolerance) -> Result<usize> {
        if self.preferences.is_none() {
            return Err(invalid("black-box samples must come with a measure"));
        }
        self.push_sample_unchecked(x, tol)
    }

    /// Records `b = π(samples[first], samples[second])`.
    pub fn push_preference(&mut self, first: usize, second: usize, b: Preference) -> Result<()> {
        let n = self.samples.len();
        if first >= n || second >= n || first == second {
            return Err(invalid(format!(
                "preference between samples {first} and {second} is not valid for {n} samples"
            )));
        }
        if !(-1..=1).contains(&b) {
            return Err(invalid("preferences must be -1, 0 or 1"));
        }
        let (Some(prefs), Some(map)) = (self.preferences.as_mut(), self.mapping.as_mut()) else {
            return Err(invalid("cannot add a preference to a black-box dataset"));
        };
        prefs.push(b);
        map.push((first, second));
        Ok(())
    }

    /// Index of the smallest measure, ties resolved to the earliest sample.
    pub fn argmin_measure(&self) -> Option<usize> {
        let y = self.measures.as_ref()?;
        let mut best: Option<usize> = None;
        for (i, v) in y.iter().enumerate() {
            if best.is_none_or(|b| *v < y[b]) {
                best = Some(i);
            }
        }
        best
    }

    /// Returns a copy of this dataset with every sample passed through `f`.
    pub fn map_samples(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Dataset {
        Dataset {
            samples: self.samples.iter().map(|s| f(s)).collect(),
            measures: self.measures.clone(),
            preferences: self.preferences.clone(),
            mapping: self.mapping.clone(),
        }
    }

    /// Drops the preference at position `h` (used for leave-one-out checks).
    pub fn without_preference(&self, h: usize) -> Dataset {
        let mut out = self.clone();
        if let (Some(p), Some(m)) = (out.preferences.as_mut(), out.mapping.as_mut()) {
            p.remove(h);
            m.remove(h);
        }
        out
    }

    /// Keeps only the listed samples (black-box mode), in the given order.
    pub fn subset(&self, keep: &[usize]) -> Dataset {
        Dataset {
            samples: keep.iter().map(|&i| self.samples[i].clone()).collect(),
            measures: self.measures.as_ref().map(|y| keep.iter().map(|&i| y[i]).collect()),
            preferences: None,
            mapping: None,
        }
    }
}
