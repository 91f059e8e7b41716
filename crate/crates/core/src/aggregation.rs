//! Global similarity matrix: how many tablecloths connect each pair of samples.

use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::EdgeSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    assessors: usize,
    counts: Vec<Vec<u32>>,
}

impl SimilarityMatrix {
    /// Validates a symmetric, zero-diagonal count matrix with entries `<= assessors`.
    pub fn from_counts(counts: Vec<Vec<u32>>, assessors: usize) -> Result<Self> {
        if assessors == 0 {
            return Err(Error::Validation("at least one assessor is required".into()));
        }
        let n = counts.len();
        for (i, row) in counts.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row[i] != 0 {
                return Err(Error::Validation(format!("diagonal entry {i} is nonzero")));
            }
            for (j, &c) in row.iter().enumerate() {
                if c != counts[j][i] {
                    return Err(Error::Validation(format!("entries ({i}, {j}) and ({j}, {i}) differ")));
                }
                if c as usize > assessors {
                    return Err(Error::Validation(format!(
                        "entry ({i}, {j}) = {c} exceeds the assessor count {assessors}"
                    )));
                }
            }
        }
        Ok(Self { assessors, counts })
    }

    pub fn zeros(samples: usize, assessors: usize) -> Self {
        Self {
            assessors,
            counts: vec![vec![0; samples]; samples],
        }
    }

    pub fn sample_count(&self) -> usize {
        self.counts.len()
    }

    pub fn assessor_count(&self) -> usize {
        self.assessors
    }

    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i][j]
    }

    pub fn counts(&self) -> &[Vec<u32>] {
        &self.counts
    }

    /// Rounded percentage `round_half_up(100 * count / A)`, in exact integers.
    pub fn percentage(&self, i: usize, j: usize) -> u32 {
        percent_round_half_up(self.counts[i][j], self.assessors)
    }

    /// Conjugates the matrix by `perm`: entry `(perm[i], perm[j])` of the
    /// result equals entry `(i, j)` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.sample_count();
        let mut counts = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                counts[perm[i]][perm[j]] = self.counts[i][j];
            }
        }
        Self {
            assessors: self.assessors,
            counts,
        }
    }

    /// CSV with a header row of sample names and each row led by its name.
    pub fn to_csv(&self, names: &[String]) -> String {
        matrix_csv(names, |i, j| self.counts[i][j].to_string())
    }

    /// Same layout as [`to_csv`](Self::to_csv) with integer percentages.
    pub fn percentages_csv(&self, names: &[String]) -> String {
        matrix_csv(names, |i, j| self.percentage(i, j).to_string())
    }
}

fn matrix_csv(names: &[String], cell: impl Fn(usize, usize) -> String) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let n = names.len();
    let header = std::iter::once("sample".to_string()).chain(names.iter().cloned());
    w.write_record(header).expect("in-memory write");
    for i in 0..n {
        let row = std::iter::once(names[i].clone()).chain((0..n).map(|j| cell(i, j)));
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

impl Add for &SimilarityMatrix {
    type Output = SimilarityMatrix;

    fn add(self, rhs: &SimilarityMatrix) -> SimilarityMatrix {
        assert_eq!(self.sample_count(), rhs.sample_count(), "sample counts differ");
        let counts = self
            .counts
            .iter()
            .zip(&rhs.counts)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        SimilarityMatrix {
            assessors: self.assessors + rhs.assessors,
            counts,
        }
    }
}

pub fn percent_round_half_up(count: u32, assessors: usize) -> u32 {
    let (c, a) = (u64::from(count), assessors as u64);
    ((200 * c + a) / (2 * a)) as u32
}

/// Counts, over all graphs, how many contain each pair. `A` is `graphs.len()`.
pub fn aggregate(graphs: &[EdgeSet]) -> Result<SimilarityMatrix> {
    let first = graphs
        .first()
        .ok_or_else(|| Error::Validation("at least one tablecloth is required".into()))?;
    let n = first.sample_count();
    let mut m = SimilarityMatrix::zeros(n, graphs.len());
    for (index, g) in graphs.iter().enumerate() {
        if g.sample_count() != n {
            return Err(Error::SampleCountMismatch {
                index,
                expected: n,
                found: g.sample_count(),
            });
        }
        for (i, j) in g.iter() {
            m.counts[i][j] += 1;
            m.counts[j][i] += 1;
        }
    }
    Ok(m)
}

/// Per-pair spring forces `count / A` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceMatrix {
    pub forces: Vec<Vec<f64>>,
}

impl ForceMatrix {
    pub fn sample_count(&self) -> usize {
        self.forces.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.forces[i][j]
    }
}

/// Forces together with their rounded percentage labels.
pub fn force_percentages(m: &SimilarityMatrix) -> (ForceMatrix, Vec<Vec<u32>>) {
    let n = m.sample_count();
    let a = m.assessor_count() as f64;
    let forces = (0..n)
        .map(|i| (0..n).map(|j| f64::from(m.count(i, j)) / a).collect())
        .collect();
    let percentages = (0..n).map(|i| (0..n).map(|j| m.percentage(i, j)).collect()).collect();
    (ForceMatrix { forces }, percentages)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixStats {
    pub zero_entries: usize,
    pub max_count: u32,
    pub max_percentage: u32,
}

/// Statistics over the strict upper triangle.
pub fn matrix_stats(m: &SimilarityMatrix) -> MatrixStats {
    let n = m.sample_count();
    let mut zero_entries = 0;
    let mut max_count = 0;
    for i in 0..n {
        for j in i + 1..n {
            let c = m.count(i, j);
            zero_entries += usize::from(c == 0);
            max_count = max_count.max(c);
        }
    }
    MatrixStats {
        zero_entries,
        max_count,
        max_percentage: percent_round_half_up(max_count, m.assessor_count()),
    }
}
