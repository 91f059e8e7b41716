//! Consensus analysis of projective-mapping (napping) sessions.
//!
//! Each assessor's tablecloth is reduced to its Gabriel graph, the graphs are
//! counted into a global similarity matrix, and a Kamada-Kawai spring layout
//! of that matrix gives the consensus graphic, drawn as SVG with edge
//! thickness and opacity proportional to how often a connection appears.

pub mod aggregation;
pub mod delaunay;
pub mod error;
pub mod gabriel;
pub mod geometry;
pub mod ingest;
pub mod layout;
pub mod pipeline;
pub mod predicates;
pub mod render;
pub mod session;

pub use aggregation::{aggregate, force_percentages, matrix_stats, ForceMatrix, MatrixStats, SimilarityMatrix};
pub use delaunay::{delaunay, Triangulation};
pub use error::{Error, Result};
pub use gabriel::{gabriel_bruteforce, gabriel_graph};
pub use geometry::{EdgeSet, Placement, Point2D, Sheet, Tablecloth};
pub use ingest::{parse_table, serialize_table, table_to_tablecloths, CoordinateTable, Dialect};
pub use layout::{
    consensus_layout, kamada_kawai, layout_energy, similarity_to_distances, ConsensusLayout, DistanceMatrix,
    Embedding, LayoutParams, TraceRecord,
};
pub use pipeline::{analyze, analyze_traced, Analysis, ConsensusReport};
pub use render::{render_consensus, render_tablecloth, RenderStyle};
pub use session::{Session, SessionStore, SubmissionPayload, SubmitOutcome};
