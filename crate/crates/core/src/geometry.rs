//! Tablecloth geometry: points, sheets, placements and undirected edge sets.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A position on a sheet in centimetres, measured from the left-bottom corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub(crate) fn coords(&self) -> robust::Coord<f64> {
        robust::Coord { x: self.x, y: self.y }
    }
}

impl fmt::Display for Point2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Physical sheet the samples are placed on. Defaults to an A2 sheet (60 x 40 cm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sheet {
    pub width: f64,
    pub height: f64,
}

impl Default for Sheet {
    fn default() -> Self {
        Self {
            width: 60.0,
            height: 40.0,
        }
    }
}

impl Sheet {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width.is_finite() && height.is_finite() && width > 0.0 && height > 0.0) {
            return Err(Error::Validation(format!(
                "sheet dimensions must be positive and finite, got {width} x {height}"
            )));
        }
        Ok(Self { width, height })
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }

    pub fn contains(&self, p: &Point2D) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width && p.y <= self.height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub sample: usize,
    pub position: Point2D,
}

/// One assessor's arrangement of the samples on a sheet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tablecloth {
    pub assessor_id: String,
    pub sheet: Sheet,
    pub placements: Vec<Placement>,
}

impl Tablecloth {
    /// Builds a tablecloth from positions listed in sample order.
    pub fn from_positions(
        assessor_id: impl Into<String>,
        sheet: Sheet,
        positions: impl IntoIterator<Item = Point2D>,
    ) -> Self {
        Self {
            assessor_id: assessor_id.into(),
            sheet,
            placements: positions
                .into_iter()
                .enumerate()
                .map(|(sample, position)| Placement { sample, position })
                .collect(),
        }
    }

    pub fn sample_count(&self) -> usize {
        self.placements.len()
    }

    /// Positions indexed by sample. Fails unless every index `0..S` appears
    /// exactly once and every coordinate is finite.
    pub fn positions(&self) -> Result<Vec<Point2D>> {
        let n = self.placements.len();
        let mut slots: Vec<Option<Point2D>> = vec![None; n];
        for p in &self.placements {
            if !p.position.is_finite() {
                return Err(Error::Validation(format!(
                    "tablecloth {}: sample {} has a non-finite position",
                    self.assessor_id, p.sample
                )));
            }
            match slots.get_mut(p.sample) {
                Some(slot @ None) => *slot = Some(p.position),
                Some(Some(_)) => {
                    return Err(Error::Validation(format!(
                        "tablecloth {}: sample {} placed twice",
                        self.assessor_id, p.sample
                    )))
                }
                None => {
                    return Err(Error::Validation(format!(
                        "tablecloth {}: sample index {} out of range for {} samples",
                        self.assessor_id, p.sample, n
                    )))
                }
            }
        }
        Ok(slots.into_iter().map(|p| p.expect("all slots filled")).collect())
    }

    /// Human-readable warnings: out-of-sheet placements and coincident samples.
    /// Samples are named from `names`, or numbered from 1 when it is short.
    pub fn warnings(&self, names: &[String]) -> Vec<String> {
        let name = |i: usize| names.get(i).cloned().unwrap_or_else(|| (i + 1).to_string());
        let mut out = Vec::new();
        for p in &self.placements {
            if !self.sheet.contains(&p.position) {
                out.push(format!(
                    "tablecloth {}: sample {} at {} lies outside the {} x {} sheet",
                    self.assessor_id,
                    name(p.sample),
                    p.position,
                    self.sheet.width,
                    self.sheet.height
                ));
            }
        }
        for (k, a) in self.placements.iter().enumerate() {
            for b in &self.placements[k + 1..] {
                if a.position == b.position {
                    out.push(format!(
                        "tablecloth {}: samples {} and {} share position {}",
                        self.assessor_id,
                        name(a.sample),
                        name(b.sample),
                        a.position
                    ));
                }
            }
        }
        out
    }
}

/// Undirected simple graph over `0..sample_count`, edges stored as `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeSet {
    sample_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    pub fn new(sample_count: usize) -> Self {
        Self {
            sample_count,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges(
        sample_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut set = Self::new(sample_count);
        for (i, j) in edges {
            set.insert(i, j)?;
        }
        Ok(set)
    }

    /// Inserts the unordered pair `{i, j}`. Returns whether it was new.
    pub fn insert(&mut self, i: usize, j: usize) -> Result<bool> {
        if i == j {
            return Err(Error::Validation(format!("self-loop on sample {i}")));
        }
        if i >= self.sample_count || j >= self.sample_count {
            return Err(Error::Validation(format!(
                "edge ({i}, {j}) out of range for {} samples",
                self.sample_count
            )));
        }
        Ok(self.edges.insert((i.min(j), i.max(j))))
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges in ascending `(i, j)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.edges.is_subset(&other.edges)
    }

    /// Relabels every sample `i` as `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<EdgeSet> {
        if perm.len() != self.sample_count {
            return Err(Error::Validation(format!(
                "permutation of length {} applied to {} samples",
                perm.len(),
                self.sample_count
            )));
        }
        EdgeSet::from_edges(self.sample_count, self.iter().map(|(i, j)| (perm[i], perm[j])))
    }

    /// True when every sample is reachable from sample 0.
    pub fn is_connected(&self) -> bool {
        if self.sample_count <= 1 {
            return true;
        }
        let mut adjacency = vec![Vec::new(); self.sample_count];
        for (i, j) in self.iter() {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        let mut seen = vec![false; self.sample_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}
