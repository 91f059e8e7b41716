//! Gabriel graphs of tablecloths.
//!
//! Samples `P` and `Q` are connected iff no other sample lies in the closed
//! disk with segment `PQ` as diameter. A sample exactly on the boundary
//! circle blocks the edge.

use crate::delaunay::delaunay;
use crate::error::Result;
use crate::geometry::{EdgeSet, Point2D, Tablecloth};
use crate::predicates::in_closed_diametral_disk;

/// Gabriel graph of a tablecloth, computed by filtering Delaunay edges.
///
/// Falls back to [`gabriel_bruteforce`] for inputs where the Delaunay
/// triangulation is undefined or not unique (fewer than three samples,
/// coincident samples, all samples collinear, cocircular ties).
pub fn gabriel_graph(tablecloth: &Tablecloth) -> Result<EdgeSet> {
    let points = tablecloth.positions()?;
    Ok(gabriel_from_points(&points))
}

pub fn gabriel_bruteforce(tablecloth: &Tablecloth) -> Result<EdgeSet> {
    let points = tablecloth.positions()?;
    Ok(gabriel_bruteforce_points(&points))
}

/// [`gabriel_graph`] over positions indexed by sample.
pub fn gabriel_from_points(points: &[Point2D]) -> EdgeSet {
    let tri = match delaunay(points) {
        Ok(t) if !t.triangles.is_empty() && !t.cocircular => t,
        _ => return gabriel_bruteforce_points(points),
    };
    let mut out = EdgeSet::new(points.len());
    for (i, j) in tri.edges() {
        if is_gabriel_edge(points, i, j) {
            out.insert(i, j).expect("delaunay edges are in range");
        }
    }
    out
}

/// All-pairs O(S^3) evaluation of the closed-disk definition.
pub fn gabriel_bruteforce_points(points: &[Point2D]) -> EdgeSet {
    let mut out = EdgeSet::new(points.len());
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if is_gabriel_edge(points, i, j) {
                out.insert(i, j).expect("indices in range");
            }
        }
    }
    out
}

fn is_gabriel_edge(points: &[Point2D], i: usize, j: usize) -> bool {
    let (p, q) = (&points[i], &points[j]);
    points
        .iter()
        .enumerate()
        .all(|(k, r)| k == i || k == j || !in_closed_diametral_disk(p, q, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Sheet;

    fn cloth(c: &[(f64, f64)]) -> Tablecloth {
        Tablecloth::from_positions("t", Sheet::default(), c.iter().map(|&(x, y)| Point2D::new(x, y)))
    }

    fn edges(t: &Tablecloth) -> Vec<(usize, usize)> {
        let g = gabriel_graph(t).unwrap();
        assert_eq!(g, gabriel_bruteforce(t).unwrap());
        g.iter().collect()
    }

    #[test]
    fn trivial_sizes() {
        assert!(edges(&cloth(&[])).is_empty());
        assert!(edges(&cloth(&[(3.0, 4.0)])).is_empty());
        assert_eq!(edges(&cloth(&[(3.0, 4.0), (50.0, 1.0)])), vec![(0, 1)]);
    }

    #[test]
    fn right_triangle_hypotenuse_is_blocked() {
        assert_eq!(edges(&cloth(&[(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)])), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn collinear_middle_blocks() {
        assert_eq!(edges(&cloth(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn unit_square_drops_both_diagonals() {
        assert_eq!(
            edges(&cloth(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])),
            vec![(0, 1), (0, 3), (1, 2), (2, 3)]
        );
    }

    #[test]
    fn coincident_pair_is_connected_unless_a_third_coincides() {
        // The far sample's disks with either twin contain the other twin.
        assert_eq!(edges(&cloth(&[(1.0, 1.0), (1.0, 1.0), (9.0, 9.0)])), vec![(0, 1)]);
        assert!(edges(&cloth(&[(1.0, 1.0), (1.0, 1.0), (1.0, 1.0)])).is_empty());
    }
}
