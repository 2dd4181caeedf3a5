//! Uniform bucket grid for fixed-radius neighbour queries.

use std::collections::HashMap;

use crate::geo::Vec3;

type Cell = (i64, i64, i64);

/// Buckets points into cubes of side `cell_km`. Any pair closer than
/// `cell_km` lies in the same or an adjacent cell.
pub struct SpatialGrid<'a> {
    cell_km: f64,
    points: &'a [Vec3],
    cells: HashMap<Cell, Vec<usize>>,
}

impl<'a> SpatialGrid<'a> {
    pub fn new(points: &'a [Vec3], cell_km: f64) -> Self {
        assert!(cell_km > 0.0 && cell_km.is_finite(), "grid cell must be positive");
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(cell_of(*p, cell_km)).or_default().push(i);
        }
        Self { cell_km, points, cells }
    }

    /// All index pairs `(i, j)`, `i < j`, with `|p_i - p_j| <= radius_km`,
    /// sorted ascending. `radius_km` must not exceed the cell size.
    pub fn pairs_within(&self, radius_km: f64) -> Vec<(usize, usize, f64)> {
        assert!(radius_km <= self.cell_km, "query radius exceeds grid cell");
        let mut pairs = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            let (cx, cy, cz) = cell_of(*p, self.cell_km);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(bucket) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) else {
                            continue;
                        };
                        for &j in bucket {
                            if j <= i {
                                continue;
                            }
                            let d = p.distance(self.points[j]);
                            if d <= radius_km {
                                pairs.push((i, j, d));
                            }
                        }
                    }
                }
            }
        }
        pairs.sort_by_key(|p| (p.0, p.1));
        pairs
    }
}

fn cell_of(p: Vec3, cell_km: f64) -> Cell {
    (
        (p.x / cell_km).floor() as i64,
        (p.y / cell_km).floor() as i64,
        (p.z / cell_km).floor() as i64,
    )
}
