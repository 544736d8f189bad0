//! Discrete Fréchet distance between two vertex sequences.

use crate::geometry::Point2;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("discrete Fréchet distance needs two nonempty polylines")]
pub struct EmptyPolyline;

/// `d[i][j] = max(|p_i - q_j|, min(d[i-1][j], d[i][j-1], d[i-1][j-1]))`,
/// evaluated row by row with O(|q|) memory.
pub fn discrete_frechet(p: &[Point2], q: &[Point2]) -> Result<f64, EmptyPolyline> {
    if p.is_empty() || q.is_empty() {
        return Err(EmptyPolyline);
    }
    let m = q.len();
    let mut prev = vec![0.0; m];
    let mut row = vec![0.0; m];

    prev[0] = p[0].distance(q[0]);
    for j in 1..m {
        prev[j] = prev[j - 1].max(p[0].distance(q[j]));
    }
    for pi in &p[1..] {
        row[0] = prev[0].max(pi.distance(q[0]));
        for j in 1..m {
            let reach = prev[j].min(row[j - 1]).min(prev[j - 1]);
            row[j] = pi.distance(q[j]).max(reach);
        }
        std::mem::swap(&mut prev, &mut row);
    }
    Ok(prev[m - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point2> {
        v.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    #[test]
    fn identical_curves() {
        let p = pts(&[(0.0, 0.0), (1.0, 2.0), (3.0, -1.0)]);
        assert_eq!(discrete_frechet(&p, &p), Ok(0.0));
    }

    #[test]
    fn parallel_offset_segments() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0)]);
        let q = pts(&[(0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(discrete_frechet(&p, &q), Ok(1.0));
    }

    #[test]
    fn single_points() {
        let p = pts(&[(0.0, 0.0)]);
        let q = pts(&[(3.0, 4.0), (0.0, 0.0)]);
        assert_eq!(discrete_frechet(&p, &q), Ok(5.0));
    }

    #[test]
    fn empty_is_an_error() {
        let p = pts(&[(0.0, 0.0)]);
        assert_eq!(discrete_frechet(&p, &[]), Err(EmptyPolyline));
        assert_eq!(discrete_frechet(&[], &p), Err(EmptyPolyline));
    }
}
