//! Python bindings: `import pysensograph`.

use pyo3::exceptions::{PyKeyError, PyOSError, PyValueError};
use pyo3::prelude::*;

use sensograph::{
    aggregation, consensus_layout, gabriel_bruteforce as brute, gabriel_graph, parse_table, table_to_tablecloths,
    Dialect, EdgeSet, Error, LayoutParams, Point2D, RenderStyle, Sheet, SimilarityMatrix, Tablecloth,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::UnknownSession(id) => PyKeyError::new_err(id),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn cloth(points: Vec<(f64, f64)>) -> Tablecloth {
    Tablecloth::from_positions("py", Sheet::default(), points.into_iter().map(|(x, y)| Point2D::new(x, y)))
}

fn pairs(g: &EdgeSet) -> Vec<(usize, usize)> {
    g.iter().collect()
}

fn sheet(dims: Option<(f64, f64)>) -> PyResult<Sheet> {
    match dims {
        Some((w, h)) => Sheet::new(w, h).map_err(py_err),
        None => Ok(Sheet::default()),
    }
}

fn params(sheet: &Sheet, seed: Option<u64>) -> LayoutParams {
    LayoutParams {
        seed,
        ..LayoutParams::for_sheet(sheet)
    }
}

/// Gabriel edges `(i, j)`, `i < j`, of points given as `(x, y)` tuples.
#[pyfunction]
fn gabriel(points: Vec<(f64, f64)>) -> PyResult<Vec<(usize, usize)>> {
    gabriel_graph(&cloth(points)).map(|g| pairs(&g)).map_err(py_err)
}

/// Same contract as `gabriel`, by direct O(S^3) disk tests.
#[pyfunction]
fn gabriel_bruteforce(points: Vec<(f64, f64)>) -> PyResult<Vec<(usize, usize)>> {
    brute(&cloth(points)).map(|g| pairs(&g)).map_err(py_err)
}

/// Counts matrix from one edge list per tablecloth.
#[pyfunction]
fn aggregate(samples: usize, graphs: Vec<Vec<(usize, usize)>>) -> PyResult<Vec<Vec<u32>>> {
    let sets = graphs
        .into_iter()
        .map(|g| EdgeSet::from_edges(samples, g))
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    sensograph::aggregate(&sets).map(|m| m.counts().to_vec()).map_err(py_err)
}

fn matrix(counts: Vec<Vec<u32>>, assessors: usize) -> PyResult<SimilarityMatrix> {
    SimilarityMatrix::from_counts(counts, assessors).map_err(py_err)
}

/// Whole percentages of a counts matrix, rounded half up.
#[pyfunction]
fn percentages(counts: Vec<Vec<u32>>, assessors: usize) -> PyResult<Vec<Vec<u32>>> {
    Ok(aggregation::force_percentages(&matrix(counts, assessors)?).1)
}

#[pyclass(frozen, get_all)]
struct Layout {
    positions: Vec<(f64, f64)>,
    final_energy: f64,
    iterations_used: usize,
    converged: bool,
    informative: bool,
}

/// Consensus layout of a counts matrix.
#[pyfunction]
#[pyo3(signature = (counts, assessors, seed=None, sheet_size=None))]
fn layout(counts: Vec<Vec<u32>>, assessors: usize, seed: Option<u64>, sheet_size: Option<(f64, f64)>) -> PyResult<Layout> {
    let m = matrix(counts, assessors)?;
    let l = consensus_layout(&m, &params(&sheet(sheet_size)?, seed)).map_err(py_err)?;
    Ok(Layout {
        positions: l.positions.iter().map(|p| (p.x, p.y)).collect(),
        final_energy: l.final_energy,
        iterations_used: l.iterations_used,
        converged: l.converged,
        informative: l.informative,
    })
}

/// Result of the whole pipeline.
#[pyclass(frozen)]
struct Analysis {
    inner: sensograph::Analysis,
}

#[pymethods]
impl Analysis {
    #[getter]
    fn sample_names(&self) -> Vec<String> {
        self.inner.sample_names.clone()
    }
    #[getter]
    fn assessors(&self) -> usize {
        self.inner.assessor_count()
    }
    #[getter]
    fn matrix(&self) -> Vec<Vec<u32>> {
        self.inner.matrix.counts().to_vec()
    }
    #[getter]
    fn percentages(&self) -> Vec<Vec<u32>> {
        self.inner.layout.percentages.clone()
    }
    #[getter]
    fn edges(&self) -> Vec<Vec<(usize, usize)>> {
        self.inner.graphs.iter().map(pairs).collect()
    }
    #[getter]
    fn positions(&self) -> Vec<(f64, f64)> {
        self.inner.layout.positions.iter().map(|p| (p.x, p.y)).collect()
    }
    #[getter]
    fn final_energy(&self) -> f64 {
        self.inner.layout.final_energy
    }
    #[getter]
    fn iterations_used(&self) -> usize {
        self.inner.layout.iterations_used
    }
    #[getter]
    fn converged(&self) -> bool {
        self.inner.layout.converged
    }
    #[getter]
    fn zero_entries(&self) -> usize {
        self.inner.stats.zero_entries
    }
    #[getter]
    fn max_percentage(&self) -> u32 {
        self.inner.stats.max_percentage
    }

    fn svg(&self) -> PyResult<String> {
        self.inner.svg(&RenderStyle::default()).map_err(py_err)
    }

    fn matrix_csv(&self) -> String {
        self.inner.matrix_csv()
    }

    fn percentages_csv(&self) -> String {
        self.inner.percentages_csv()
    }

    fn json(&self) -> String {
        self.inner.json()
    }

    fn summary(&self) -> String {
        self.inner.summary()
    }

    fn __repr__(&self) -> String {
        format!(
            "Analysis(samples={}, assessors={}, final_energy={}, converged={})",
            self.inner.sample_count(),
            self.inner.assessor_count(),
            self.inner.layout.final_energy,
            self.inner.layout.converged
        )
    }
}

/// Full pipeline over tablecloths given as lists of `(x, y)` in cm, one
/// list per assessor in sample order.
#[pyfunction]
#[pyo3(signature = (sample_names, tablecloths, seed=None, sheet_size=None))]
fn analyze(
    sample_names: Vec<String>,
    tablecloths: Vec<Vec<(f64, f64)>>,
    seed: Option<u64>,
    sheet_size: Option<(f64, f64)>,
) -> PyResult<Analysis> {
    let sheet = sheet(sheet_size)?;
    let cloths: Vec<Tablecloth> = tablecloths
        .into_iter()
        .enumerate()
        .map(|(a, pts)| {
            Tablecloth::from_positions(format!("A{}", a + 1), sheet, pts.into_iter().map(|(x, y)| Point2D::new(x, y)))
        })
        .collect();
    let inner = sensograph::analyze(&sample_names, &cloths, &params(&sheet, seed)).map_err(py_err)?;
    Ok(Analysis { inner })
}

/// Full pipeline over the text of a CSV coordinate table.
#[pyfunction]
#[pyo3(signature = (text, seed=None))]
fn analyze_csv(text: &str, seed: Option<u64>) -> PyResult<Analysis> {
    let table = parse_table(text.as_bytes(), Dialect::default()).map_err(py_err)?;
    let sheet = table.sheet.unwrap_or_default();
    let (cloths, _) = table_to_tablecloths(&table, sheet);
    let inner = sensograph::analyze(&table.sample_names, &cloths, &params(&sheet, seed)).map_err(py_err)?;
    Ok(Analysis { inner })
}

#[pymodule]
fn pysensograph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(gabriel, m)?)?;
    m.add_function(wrap_pyfunction!(gabriel_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(percentages, m)?)?;
    m.add_function(wrap_pyfunction!(layout, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_csv, m)?)?;
    m.add_class::<Layout>()?;
    m.add_class::<Analysis>()?;
    Ok(())
}
