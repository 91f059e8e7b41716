//! Planar Delaunay triangulation by lexicographic sweep followed by Lawson
//! edge flips. All decisions go through exact predicates, so the flip loop
//! terminates and the output is a true Delaunay triangulation of the input.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::geometry::Point2D;
use crate::predicates::{incircle, orient2d};

/// A triangle as three input indices in counter-clockwise order.
pub type Triangle = [usize; 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    pub triangles: Vec<Triangle>,
    /// Some interior edge has its opposite vertex exactly on the neighbouring
    /// circumcircle, so the triangulation is not unique.
    pub cocircular: bool,
}

impl Triangulation {
    fn empty() -> Self {
        Self {
            triangles: Vec::new(),
            cocircular: false,
        }
    }

    /// Undirected edges `(i, j)`, `i < j`, in ascending order.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        let mut out = BTreeSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                out.insert((a.min(b), a.max(b)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DelaunayError {
    #[error("degenerate input: fewer than 3 points")]
    TooFewPoints,
    #[error("degenerate input: points {0} and {1} coincide")]
    Coincident(usize, usize),
}

/// Delaunay triangulation of `points`.
///
/// Fewer than three points and coincident points are reported as errors.
/// Fully collinear input yields an empty triangle set.
pub fn delaunay(points: &[Point2D]) -> Result<Triangulation, DelaunayError> {
    if points.len() < 3 {
        return Err(DelaunayError::TooFewPoints);
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| lex_cmp(&points[a], &points[b]).then(a.cmp(&b)));
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(DelaunayError::Coincident(w[0].min(w[1]), w[0].max(w[1])));
        }
    }

    let Some(mut mesh) = sweep(points, &order) else {
        return Ok(Triangulation::empty());
    };
    mesh.legalize(points);
    let cocircular = mesh.has_cocircular_edge(points);
    Ok(Triangulation {
        triangles: mesh.triangles,
        cocircular,
    })
}

fn lex_cmp(a: &Point2D, b: &Point2D) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

/// Triangles plus a directed-edge index: `(a, b)` maps to the triangle
/// containing `a -> b` in counter-clockwise order.
struct Mesh {
    triangles: Vec<Triangle>,
    edge_owner: HashMap<(usize, usize), usize>,
}

impl Mesh {
    fn new() -> Self {
        Self {
            triangles: Vec::new(),
            edge_owner: HashMap::new(),
        }
    }

    fn push(&mut self, t: Triangle) {
        let id = self.triangles.len();
        self.triangles.push(t);
        self.index(id);
    }

    fn index(&mut self, id: usize) {
        let t = self.triangles[id];
        for k in 0..3 {
            self.edge_owner.insert((t[k], t[(k + 1) % 3]), id);
        }
    }

    fn unindex(&mut self, id: usize) {
        let t = self.triangles[id];
        for k in 0..3 {
            self.edge_owner.remove(&(t[k], t[(k + 1) % 3]));
        }
    }

    /// Vertex of triangle `id` opposite the directed edge `a -> b`.
    fn apex(&self, id: usize, a: usize, b: usize) -> usize {
        let t = self.triangles[id];
        t.into_iter()
            .find(|&v| v != a && v != b)
            .expect("triangle has three distinct vertices")
    }

    /// Lawson flips until every interior edge is locally Delaunay.
    fn legalize(&mut self, points: &[Point2D]) {
        let mut stack: Vec<(usize, usize)> = self.edge_owner.keys().copied().collect();
        stack.sort_unstable();
        while let Some((a, b)) = stack.pop() {
            let (Some(&t1), Some(&t2)) = (self.edge_owner.get(&(a, b)), self.edge_owner.get(&(b, a)))
            else {
                continue;
            };
            let c = self.apex(t1, a, b);
            let d = self.apex(t2, b, a);
            if incircle(&points[a], &points[b], &points[c], &points[d]) != Ordering::Greater {
                continue;
            }
            // Quad a, d, b, c is convex; replace diagonal a-b with c-d.
            self.unindex(t1);
            self.unindex(t2);
            self.triangles[t1] = [a, d, c];
            self.triangles[t2] = [d, b, c];
            self.index(t1);
            self.index(t2);
            stack.extend([(a, d), (d, b), (b, c), (c, a)]);
        }
    }

    fn has_cocircular_edge(&self, points: &[Point2D]) -> bool {
        self.edge_owner.iter().any(|(&(a, b), &t1)| {
            a < b
                && self.edge_owner.get(&(b, a)).is_some_and(|&t2| {
                    let c = self.apex(t1, a, b);
                    let d = self.apex(t2, b, a);
                    incircle(&points[a], &points[b], &points[c], &points[d]) == Ordering::Equal
                })
        })
    }
}

/// Incremental hull sweep over lexicographically sorted, distinct points.
/// Returns `None` when every point is collinear.
fn sweep(points: &[Point2D], order: &[usize]) -> Option<Mesh> {
    let p = |k: usize| &points[order[k]];
    let first_off_line = (2..order.len()).find(|&k| orient2d(p(0), p(1), p(k)) != Ordering::Equal)?;

    let mut mesh = Mesh::new();
    let apex = order[first_off_line];
    let left = orient2d(p(0), p(1), p(first_off_line)) == Ordering::Greater;
    for k in 0..first_off_line - 1 {
        let (a, b) = (order[k], order[k + 1]);
        mesh.push(if left { [a, b, apex] } else { [b, a, apex] });
    }

    // Counter-clockwise hull.
    let mut hull: Vec<usize> = if left {
        order[..=first_off_line].to_vec()
    } else {
        let mut h = vec![order[0], apex];
        h.extend(order[1..first_off_line].iter().rev());
        h
    };

    for &q in &order[first_off_line + 1..] {
        let n = hull.len();
        let visible: Vec<bool> = (0..n)
            .map(|i| orient2d(&points[hull[i]], &points[hull[(i + 1) % n]], &points[q]) == Ordering::Less)
            .collect();
        let start = (0..n)
            .find(|&i| visible[i] && !visible[(i + n - 1) % n])
            .expect("a point outside the hull sees at least one hull edge");
        let mut end = start;
        while visible[(end + 1) % n] {
            end = (end + 1) % n;
        }
        let mut i = start;
        loop {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            mesh.push([b, a, q]);
            if i == end {
                break;
            }
            i = (i + 1) % n;
        }
        let mut next = Vec::with_capacity(n + 1);
        let mut k = (end + 1) % n;
        loop {
            next.push(hull[k]);
            if k == start {
                break;
            }
            k = (k + 1) % n;
        }
        next.push(q);
        hull = next;
    }
    Some(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicates::incircle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(c: &[(f64, f64)]) -> Vec<Point2D> {
        c.iter().map(|&(x, y)| Point2D::new(x, y)).collect()
    }

    fn assert_delaunay(points: &[Point2D], tri: &Triangulation) {
        for t in &tri.triangles {
            let [a, b, c] = *t;
            assert_eq!(
                orient2d(&points[a], &points[b], &points[c]),
                Ordering::Greater,
                "triangle {t:?} is not counter-clockwise"
            );
            for (k, d) in points.iter().enumerate() {
                if !t.contains(&k) {
                    assert_ne!(
                        incircle(&points[a], &points[b], &points[c], d),
                        Ordering::Greater,
                        "point {k} inside circumcircle of {t:?}"
                    );
                }
            }
        }
    }

    /// Twice the triangulated area must equal twice the hull area.
    fn assert_covers_hull(points: &[Point2D], tri: &Triangulation) {
        let area2 = |a: &Point2D, b: &Point2D, c: &Point2D| (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        let total: f64 = tri
            .triangles
            .iter()
            .map(|t| area2(&points[t[0]], &points[t[1]], &points[t[2]]))
            .sum();
        // Monotone chain hull for the reference area.
        let mut sorted = points.to_vec();
        sorted.sort_by(lex_cmp);
        let mut hull: Vec<Point2D> = Vec::new();
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &Point2D>> = if pass == 0 {
                Box::new(sorted.iter())
            } else {
                Box::new(sorted.iter().rev())
            };
            for p in iter {
                while hull.len() >= start + 2
                    && area2(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0
                {
                    hull.pop();
                }
                hull.push(*p);
            }
            hull.pop();
        }
        let hull_area: f64 = (1..hull.len() - 1)
            .map(|k| area2(&hull[0], &hull[k], &hull[k + 1]))
            .sum();
        assert!((total - hull_area).abs() <= 1e-9 * hull_area.abs().max(1.0));
    }

    #[test]
    fn single_triangle() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let t = delaunay(&p).unwrap();
        assert_eq!(t.triangles.len(), 1);
        assert!(!t.cocircular);
    }

    #[test]
    fn unit_square_has_two_triangles_and_a_tie() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let t = delaunay(&p).unwrap();
        assert_eq!(t.triangles.len(), 2);
        assert_eq!(t.edges().len(), 5);
        assert!(t.cocircular);
        assert_delaunay(&p, &t);
    }

    #[test]
    fn collinear_input_is_empty() {
        let p = pts(&[(0.0, 0.0), (1.0, 1.0), (3.0, 3.0), (2.0, 2.0)]);
        assert!(delaunay(&p).unwrap().triangles.is_empty());
    }

    #[test]
    fn degenerate_inputs_are_reported() {
        assert_eq!(delaunay(&pts(&[(0.0, 0.0), (1.0, 0.0)])), Err(DelaunayError::TooFewPoints));
        assert_eq!(
            delaunay(&pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)])),
            Err(DelaunayError::Coincident(0, 2))
        );
    }

    #[test]
    fn collinear_prefix_then_apex() {
        // Several collinear points before the first off-line point, on both sides.
        for apex_y in [5.0, -5.0] {
            let p = pts(&[(0.0, 0.0), (0.0, 1.0), (0.0, 2.0), (0.0, 3.0), (2.0, apex_y), (3.0, 1.0)]);
            let t = delaunay(&p).unwrap();
            assert_delaunay(&p, &t);
            assert_covers_hull(&p, &t);
        }
    }

    #[test]
    fn random_inputs_are_delaunay_and_cover_hull() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(3..40);
            let p: Vec<Point2D> = (0..n)
                .map(|_| Point2D::new(rng.gen_range(0.0..60.0), rng.gen_range(0.0..40.0)))
                .collect();
            let t = delaunay(&p).unwrap();
            assert_delaunay(&p, &t);
            assert_covers_hull(&p, &t);
            // Euler: 2n - 2 - h triangles, so never more than 2n - 5.
            assert!(t.triangles.len() <= 2 * n - 5 || n == 3);
        }
    }

    #[test]
    fn grid_inputs_are_delaunay() {
        let mut p = Vec::new();
        for i in 0..5 {
            for j in 0..4 {
                p.push(Point2D::new(i as f64 * 2.0, j as f64 * 2.0));
            }
        }
        let t = delaunay(&p).unwrap();
        assert!(t.cocircular);
        assert_delaunay(&p, &t);
        assert_covers_hull(&p, &t);
        assert_eq!(t.triangles.len(), 2 * 4 * 3);
    }
}
