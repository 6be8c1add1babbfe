use crate::geometry::Point2;
use std::collections::HashMap;

/// Uniform bucket grid over points for range queries.
pub(crate) struct PointGrid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<Point2>,
}

impl PointGrid {
    pub fn new(points: Vec<Point2>, cell: f64) -> Self {
        let cell = if cell > 0.0 && cell.is_finite() { cell } else { 1.0 };
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(cell, *p)).or_default().push(i);
        }
        PointGrid {
            cell,
            buckets,
            points,
        }
    }

    fn key(cell: f64, p: Point2) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    /// Indices of points inside the axis-aligned box `[lo, hi]` grown by `pad`, ascending.
    pub fn query_box(&self, lo: Point2, hi: Point2, pad: f64) -> Vec<usize> {
        let lo = Point2::new(lo.x - pad, lo.y - pad);
        let hi = Point2::new(hi.x + pad, hi.y + pad);
        let (i0, j0) = Self::key(self.cell, lo);
        let (i1, j1) = Self::key(self.cell, hi);
        let mut out = Vec::new();
        let span = (i1 - i0 + 1) * (j1 - j0 + 1);
        if span > self.buckets.len() as i64 * 4 {
            // Sparse occupancy: scanning buckets is cheaper.
            for idx in self.buckets.values().flatten() {
                let p = self.points[*idx];
                if p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y {
                    out.push(*idx);
                }
            }
        } else {
            for i in i0..=i1 {
                for j in j0..=j1 {
                    if let Some(b) = self.buckets.get(&(i, j)) {
                        for &idx in b {
                            let p = self.points[idx];
                            if p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y {
                                out.push(idx);
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn query_near(&self, p: Point2, tol: f64) -> Vec<usize> {
        self.query_box(p, p, tol)
            .into_iter()
            .filter(|&i| self.points[i].dist(p) <= tol)
            .collect()
    }
}
