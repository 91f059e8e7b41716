//! Tablecloths to consensus: Gabriel graphs, aggregation, layout, outputs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{aggregate, matrix_stats, MatrixStats, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::gabriel::gabriel_graph;
use crate::geometry::{EdgeSet, Point2D, Tablecloth};
use crate::layout::{consensus_layout_traced, ConsensusLayout, LayoutParams, TraceRecord};
use crate::render::{render_consensus, RenderStyle};

/// Gabriel graph of every tablecloth, in input order. Runs in parallel.
pub fn gabriel_graphs(tablecloths: &[Tablecloth]) -> Result<Vec<EdgeSet>> {
    tablecloths.par_iter().map(gabriel_graph).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub sample_names: Vec<String>,
    pub graphs: Vec<EdgeSet>,
    pub matrix: SimilarityMatrix,
    pub stats: MatrixStats,
    pub layout: ConsensusLayout,
}

pub fn analyze(sample_names: &[String], tablecloths: &[Tablecloth], params: &LayoutParams) -> Result<Analysis> {
    analyze_traced(sample_names, tablecloths, params, |_| {})
}

/// [`analyze`] reporting every layout update to `trace`.
pub fn analyze_traced(
    sample_names: &[String],
    tablecloths: &[Tablecloth],
    params: &LayoutParams,
    trace: impl FnMut(TraceRecord),
) -> Result<Analysis> {
    if tablecloths.is_empty() {
        return Err(Error::NoData);
    }
    for (index, t) in tablecloths.iter().enumerate() {
        if t.sample_count() != sample_names.len() {
            return Err(Error::SampleCountMismatch {
                index,
                expected: sample_names.len(),
                found: t.sample_count(),
            });
        }
    }
    let graphs = gabriel_graphs(tablecloths)?;
    let matrix = aggregate(&graphs)?;
    let stats = matrix_stats(&matrix);
    let layout = consensus_layout_traced(&matrix, params, trace)?;
    Ok(Analysis {
        sample_names: sample_names.to_vec(),
        graphs,
        matrix,
        stats,
        layout,
    })
}

/// Machine-readable consensus output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusReport {
    pub samples: usize,
    pub assessors: usize,
    pub sample_names: Vec<String>,
    pub positions: Vec<Point2D>,
    pub matrix: Vec<Vec<u32>>,
    pub percentages: Vec<Vec<u32>>,
    pub zero_entries: usize,
    pub max_count: u32,
    pub max_percentage: u32,
    pub final_energy: f64,
    pub iterations_used: usize,
    pub converged: bool,
    pub informative: bool,
}

impl Analysis {
    pub fn sample_count(&self) -> usize {
        self.sample_names.len()
    }

    pub fn assessor_count(&self) -> usize {
        self.matrix.assessor_count()
    }

    pub fn svg(&self, style: &RenderStyle) -> Result<String> {
        render_consensus(&self.layout, &self.sample_names, style)
    }

    pub fn matrix_csv(&self) -> String {
        self.matrix.to_csv(&self.sample_names)
    }

    pub fn percentages_csv(&self) -> String {
        self.matrix.percentages_csv(&self.sample_names)
    }

    pub fn report(&self) -> ConsensusReport {
        ConsensusReport {
            samples: self.sample_count(),
            assessors: self.assessor_count(),
            sample_names: self.sample_names.clone(),
            positions: self.layout.positions.clone(),
            matrix: self.matrix.counts().to_vec(),
            percentages: self.layout.percentages.clone(),
            zero_entries: self.stats.zero_entries,
            max_count: self.stats.max_count,
            max_percentage: self.stats.max_percentage,
            final_energy: self.layout.final_energy,
            iterations_used: self.layout.iterations_used,
            converged: self.layout.converged,
            informative: self.layout.informative,
        }
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report()).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable summary lines.
    pub fn summary(&self) -> String {
        format!(
            "samples: {}\nassessors: {}\nzero entries: {}\nmax percentage: {}%\nfinal energy: {}\niterations: {}\nconverged: {}\n",
            self.sample_count(),
            self.assessor_count(),
            self.stats.zero_entries,
            self.stats.max_percentage,
            self.layout.final_energy,
            self.layout.iterations_used,
            self.layout.converged,
        )
    }
}
