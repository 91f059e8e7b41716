//! Kamada-Kawai consensus layout of the similarity graph.
//!
//! Counts become edge lengths `(A + 1 - c) / (A + 1)`, all-pairs shortest
//! paths give the target distances, and the spring energy
//!
//! ```text
//! E = sum_{i<j} 1/2 k_ij (|p_i - p_j| - l_ij)^2,   l_ij = L d_ij,   k_ij = K / d_ij^2
//! ```
//!
//! with `L = L0 / max d` is minimized one node at a time with 2x2 Newton steps.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregation::{force_percentages, ForceMatrix, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::geometry::{Point2D, Sheet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    /// Spring-strength constant `K`.
    pub spring_constant: f64,
    /// Budget `C` of single-node Newton updates.
    pub max_iterations: usize,
    /// Stop once every node's gradient norm is below this.
    pub epsilon: f64,
    /// Display diameter `L0` in cm.
    pub display_diameter: f64,
    /// Seeds a small jitter of the initial polygon. `None` means no jitter.
    pub seed: Option<u64>,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            spring_constant: 100.0,
            max_iterations: 1000,
            epsilon: 0.1,
            display_diameter: Sheet::default().diagonal(),
            seed: None,
        }
    }
}

impl LayoutParams {
    pub fn for_sheet(sheet: &Sheet) -> Self {
        Self {
            display_diameter: sheet.diagonal(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.spring_constant) {
            return Err(Error::Validation("spring constant K must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation("iteration budget C must be at least 1".into()));
        }
        if !positive(self.epsilon) {
            return Err(Error::Validation("epsilon must be positive".into()));
        }
        if !positive(self.display_diameter) {
            return Err(Error::Validation("display diameter L0 must be positive".into()));
        }
        Ok(())
    }
}

/// Target graph distances between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub distances: Vec<Vec<f64>>,
    /// False when no pair of samples was ever connected.
    pub informative: bool,
    /// Some pairs had no connecting path and got the pseudo-distance.
    pub disconnected: bool,
}

impl DistanceMatrix {
    pub fn from_distances(distances: Vec<Vec<f64>>) -> Result<Self> {
        let n = distances.len();
        for (i, row) in distances.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!("distance row {i} has {} entries", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                let ok = if i == j { v == 0.0 } else { v.is_finite() && v > 0.0 && v == distances[j][i] };
                if !ok {
                    return Err(Error::Validation(format!("invalid distance ({i}, {j}) = {v}")));
                }
            }
        }
        Ok(Self {
            distances,
            informative: true,
            disconnected: false,
        })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    fn max(&self) -> f64 {
        self.distances.iter().flatten().copied().fold(0.0, f64::max)
    }
}

/// Shortest-path distances over edge lengths `(A + 1 - c) / (A + 1)`.
///
/// Disconnected pairs get `1.5 x` the largest finite distance. An all-zero
/// matrix yields unit distances flagged as non-informative.
pub fn similarity_to_distances(m: &SimilarityMatrix) -> Result<DistanceMatrix> {
    let n = m.sample_count();
    if n < 2 {
        return Err(Error::Validation("at least two samples are needed for distances".into()));
    }
    let scale = (m.assessor_count() + 1) as f64;
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
        for (j, cell) in row.iter_mut().enumerate() {
            let c = m.count(i, j);
            if i != j && c > 0 {
                *cell = (scale - f64::from(c)) / scale;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }

    let max_finite = d.iter().flatten().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    if max_finite == 0.0 {
        log::warn!("similarity matrix has no connections; layout is not informative");
        let unit = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        return Ok(DistanceMatrix {
            distances: unit,
            informative: false,
            disconnected: true,
        });
    }
    let mut disconnected = false;
    for v in d.iter_mut().flatten() {
        if v.is_infinite() {
            *v = 1.5 * max_finite;
            disconnected = true;
        }
    }
    if disconnected {
        log::warn!("similarity graph is disconnected; using pseudo-distance {}", 1.5 * max_finite);
    }
    Ok(DistanceMatrix {
        distances: d,
        informative: true,
        disconnected,
    })
}

/// Spring lengths and strengths derived from a distance matrix.
#[derive(Debug, Clone)]
pub struct Springs {
    /// Unit edge length `L`.
    pub unit: f64,
    pub length: Vec<Vec<f64>>,
    pub strength: Vec<Vec<f64>>,
}

impl Springs {
    pub fn new(d: &DistanceMatrix, params: &LayoutParams) -> Self {
        let n = d.len();
        let max = d.max();
        let unit = if max > 0.0 { params.display_diameter / max } else { params.display_diameter };
        let mut length = vec![vec![0.0; n]; n];
        let mut strength = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let dij = d.distances[i][j];
                if i != j {
                    length[i][j] = unit * dij;
                    strength[i][j] = params.spring_constant / (dij * dij);
                }
            }
        }
        Self { unit, length, strength }
    }

    fn len(&self) -> usize {
        self.length.len()
    }

    fn energy(&self, positions: &[Point2D]) -> f64 {
        let mut e = 0.0;
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                let stretch = positions[i].distance(&positions[j]) - self.length[i][j];
                e += 0.5 * self.strength[i][j] * stretch * stretch;
            }
        }
        e
    }

    /// Gradient of `E` with respect to node `m`. Coincident pairs contribute
    /// nothing (zero subgradient).
    fn gradient(&self, positions: &[Point2D], m: usize) -> [f64; 2] {
        let pm = positions[m];
        let (mut gx, mut gy) = (0.0, 0.0);
        for (i, pi) in positions.iter().enumerate() {
            if i == m {
                continue;
            }
            let (dx, dy) = (pm.x - pi.x, pm.y - pi.y);
            let r = dx.hypot(dy);
            if r == 0.0 {
                continue;
            }
            let (k, l) = (self.strength[m][i], self.length[m][i]);
            gx += k * (dx - l * dx / r);
            gy += k * (dy - l * dy / r);
        }
        [gx, gy]
    }

    /// Hessian block `[[xx, xy], [xy, yy]]` for node `m`.
    fn hessian(&self, positions: &[Point2D], m: usize) -> [f64; 3] {
        let pm = positions[m];
        let (mut hxx, mut hxy, mut hyy) = (0.0, 0.0, 0.0);
        for (i, pi) in positions.iter().enumerate() {
            if i == m {
                continue;
            }
            let (dx, dy) = (pm.x - pi.x, pm.y - pi.y);
            let r = dx.hypot(dy);
            if r == 0.0 {
                continue;
            }
            let (k, l) = (self.strength[m][i], self.length[m][i]);
            let r3 = r * r * r;
            hxx += k * (1.0 - l * dy * dy / r3);
            hxy += k * l * dx * dy / r3;
            hyy += k * (1.0 - l * dx * dx / r3);
        }
        [hxx, hxy, hyy]
    }
}

/// Spring energy of `positions` against target distances `d`.
pub fn layout_energy(positions: &[Point2D], d: &DistanceMatrix, params: &LayoutParams) -> f64 {
    Springs::new(d, params).energy(positions)
}

/// Analytic gradient of [`layout_energy`] for every node.
pub fn energy_gradient(positions: &[Point2D], d: &DistanceMatrix, params: &LayoutParams) -> Vec<[f64; 2]> {
    let springs = Springs::new(d, params);
    (0..positions.len()).map(|m| springs.gradient(positions, m)).collect()
}

/// One single-node update of the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub node: usize,
    /// Gradient norm of `node` before the update.
    pub delta: f64,
    /// Total energy after the update.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub positions: Vec<Point2D>,
    pub final_energy: f64,
    pub iterations_used: usize,
    pub converged: bool,
    /// Largest node gradient norm at termination.
    pub max_gradient: f64,
}

/// Regular S-gon of radius `L0 / 2` in input order, optionally jittered by up
/// to `L0 / 1000` per coordinate.
pub fn initial_positions(n: usize, params: &LayoutParams) -> Vec<Point2D> {
    let radius = params.display_diameter / 2.0;
    let mut positions: Vec<Point2D> = (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            Point2D::new(radius * a.cos(), radius * a.sin())
        })
        .collect();
    if let Some(seed) = params.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jitter = params.display_diameter / 1000.0;
        for p in &mut positions {
            p.x += rng.gen_range(-jitter..=jitter);
            p.y += rng.gen_range(-jitter..=jitter);
        }
    }
    positions
}

pub fn kamada_kawai(d: &DistanceMatrix, params: &LayoutParams) -> Result<Embedding> {
    kamada_kawai_traced(d, params, |_| {})
}

/// [`kamada_kawai`] reporting every update to `trace`.
///
/// Each update is a Newton step on one node, falling back to a gradient step
/// of length `L / 100` when the 2x2 system is singular or the Newton direction
/// does not descend. Steps are halved until the total energy strictly
/// decreases; an update that cannot decrease it ends the run unconverged.
pub fn kamada_kawai_traced(
    d: &DistanceMatrix,
    params: &LayoutParams,
    mut trace: impl FnMut(TraceRecord),
) -> Result<Embedding> {
    params.validate()?;
    let n = d.len();
    let springs = Springs::new(d, params);
    let mut positions = initial_positions(n, params);
    if n < 2 {
        return Ok(finish(positions, &springs, 0, params.epsilon));
    }

    let mut energy = springs.energy(&positions);
    let mut iterations = 0;
    'outer: while iterations < params.max_iterations {
        let Some((m, mut delta)) = steepest_node(&springs, &positions) else {
            break;
        };
        if delta < params.epsilon {
            break;
        }
        while delta >= params.epsilon && iterations < params.max_iterations {
            iterations += 1;
            let Some((next, next_energy)) = descend(&springs, &positions, m, energy) else {
                log::debug!("node {m} cannot decrease the energy further; stopping");
                break 'outer;
            };
            assert!(next_energy < energy, "accepted update increased the energy");
            positions[m] = next;
            energy = next_energy;
            trace(TraceRecord {
                iteration: iterations,
                node: m,
                delta,
                energy,
            });
            delta = norm(springs.gradient(&positions, m));
        }
    }
    Ok(finish(positions, &springs, iterations, params.epsilon))
}

fn finish(mut positions: Vec<Point2D>, springs: &Springs, iterations: usize, epsilon: f64) -> Embedding {
    let max_gradient = steepest_node(springs, &positions).map_or(0.0, |(_, g)| g);
    canonicalize(&mut positions);
    Embedding {
        final_energy: springs.energy(&positions),
        positions,
        iterations_used: iterations,
        converged: max_gradient < epsilon,
        max_gradient,
    }
}

fn norm(g: [f64; 2]) -> f64 {
    g[0].hypot(g[1])
}

/// Node with the largest gradient norm, lowest index on ties.
fn steepest_node(springs: &Springs, positions: &[Point2D]) -> Option<(usize, f64)> {
    (0..springs.len())
        .map(|m| (m, norm(springs.gradient(positions, m))))
        .fold(None, |best, (m, g)| match best {
            Some((_, bg)) if bg >= g => best,
            _ => Some((m, g)),
        })
}

const MAX_HALVINGS: usize = 60;

fn descend(springs: &Springs, positions: &[Point2D], m: usize, energy: f64) -> Option<(Point2D, f64)> {
    let g = springs.gradient(positions, m);
    let [hxx, hxy, hyy] = springs.hessian(positions, m);
    let det = hxx * hyy - hxy * hxy;
    let trace = hxx + hyy;
    let newton = if det.abs() >= 1e-12 * trace * trace && det != 0.0 {
        let sx = -(hyy * g[0] - hxy * g[1]) / det;
        let sy = -(hxx * g[1] - hxy * g[0]) / det;
        (sx * g[0] + sy * g[1] < 0.0).then_some([sx, sy])
    } else {
        None
    };
    let step = newton.unwrap_or_else(|| {
        let gn = norm(g);
        let len = springs.unit / 100.0;
        [-len * g[0] / gn, -len * g[1] / gn]
    });

    let origin = positions[m];
    let mut trial = positions.to_vec();
    let mut t = 1.0;
    for _ in 0..MAX_HALVINGS {
        trial[m] = Point2D::new(origin.x + t * step[0], origin.y + t * step[1]);
        let e = springs.energy(&trial);
        if e < energy {
            return Some((trial[m], e));
        }
        t *= 0.5;
    }
    None
}

/// Centroid to the origin, principal axis along `x`, then sample 0 at
/// `x >= 0` (half turn) and `y >= 0` (reflection).
pub fn canonicalize(positions: &mut [Point2D]) {
    let n = positions.len();
    if n == 0 {
        return;
    }
    let (cx, cy) = positions
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    let (cx, cy) = (cx / n as f64, cy / n as f64);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in positions.iter_mut() {
        p.x -= cx;
        p.y -= cy;
        sxx += p.x * p.x;
        sxy += p.x * p.y;
        syy += p.y * p.y;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (s, c) = theta.sin_cos();
    for p in positions.iter_mut() {
        let (x, y) = (p.x, p.y);
        p.x = c * x + s * y;
        p.y = -s * x + c * y;
    }
    if positions[0].x < 0.0 {
        for p in positions.iter_mut() {
            p.x = -p.x;
            p.y = -p.y;
        }
    }
    if positions[0].y < 0.0 {
        for p in positions.iter_mut() {
            p.y = -p.y;
        }
    }
}

/// Equilibrium positions of the samples together with the forces drawn on them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusLayout {
    pub positions: Vec<Point2D>,
    pub forces: ForceMatrix,
    /// `round_half_up(100 * count / A)` per pair.
    pub percentages: Vec<Vec<u32>>,
    pub final_energy: f64,
    pub iterations_used: usize,
    pub converged: bool,
    /// False when the similarity matrix had no connections at all.
    pub informative: bool,
    pub disconnected: bool,
}

/// Runs the full layout step on a similarity matrix.
pub fn consensus_layout(m: &SimilarityMatrix, params: &LayoutParams) -> Result<ConsensusLayout> {
    consensus_layout_traced(m, params, |_| {})
}

pub fn consensus_layout_traced(
    m: &SimilarityMatrix,
    params: &LayoutParams,
    trace: impl FnMut(TraceRecord),
) -> Result<ConsensusLayout> {
    params.validate()?;
    let (forces, percentages) = force_percentages(m);
    if m.sample_count() < 2 {
        return Ok(ConsensusLayout {
            positions: vec![Point2D::new(0.0, 0.0); m.sample_count()],
            forces,
            percentages,
            final_energy: 0.0,
            iterations_used: 0,
            converged: true,
            informative: true,
            disconnected: false,
        });
    }
    let d = similarity_to_distances(m)?;
    let embedding = if d.informative {
        kamada_kawai_traced(&d, params, trace)?
    } else {
        let springs = Springs::new(&d, params);
        finish(initial_positions(d.len(), params), &springs, 0, params.epsilon)
    };
    Ok(ConsensusLayout {
        positions: embedding.positions,
        forces,
        percentages,
        final_energy: embedding.final_energy,
        iterations_used: embedding.iterations_used,
        converged: embedding.converged,
        informative: d.informative,
        disconnected: d.disconnected,
    })
}
