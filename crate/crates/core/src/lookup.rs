//! Piecewise-linear lookup tables.

use alloc::vec::Vec;

/// Tabulated nonlinear relationship evaluated by linear interpolation.
/// Outside the x range the first/last y is returned (clamping), so
/// evaluation is total.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LookupError {
    TooFewPoints,
    NonIncreasingX { index: usize },
}

impl LookupTable {
    /// Requires at least two points with strictly increasing x.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, LookupError> {
        if points.len() < 2 {
            return Err(LookupError::TooFewPoints);
        }
        for i in 1..points.len() {
            if points[i].0 <= points[i - 1].0 {
                return Err(LookupError::NonIncreasingX { index: i });
            }
        }
        Ok(LookupTable { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// True if y values never decrease as x increases.
    pub fn is_non_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 >= w[0].1)
    }
}

/// Piecewise-linear interpolation with clamping outside the table range.
pub fn eval_lookup(table: &LookupTable, x: f64) -> f64 {
    let pts = &table.points;
    if x <= pts[0].0 {
        return pts[0].1;
    }
    let last = pts[pts.len() - 1];
    if x >= last.0 {
        return last.1;
    }
    // pts[i].0 < x <= pts[i+1].0 for some i
    let mut i = 0;
    while pts[i + 1].0 < x {
        i += 1;
    }
    let (x0, y0) = pts[i];
    let (x1, y1) = pts[i + 1];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn midpoint() {
        let t = LookupTable::new(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(eval_lookup(&t, 0.5), 0.5);
    }

    #[test]
    fn clamps() {
        let t = LookupTable::new(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(eval_lookup(&t, 2.0), 1.0);
        assert_eq!(eval_lookup(&t, -1.0), 0.0);
    }

    #[test]
    fn segment_interpolation() {
        let t = LookupTable::new(vec![(0.0, 0.5), (0.5, 0.9), (1.0, 1.0)]).unwrap();
        let y = eval_lookup(&t, 0.75);
        assert!((y - 0.95).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(
            LookupTable::new(vec![(0.0, 0.0)]),
            Err(LookupError::TooFewPoints)
        );
        assert_eq!(
            LookupTable::new(vec![(0.0, 0.0), (0.0, 1.0)]),
            Err(LookupError::NonIncreasingX { index: 1 })
        );
    }
}
