use crate::error::{GeomError, Result};

/// A rectangular sampling lattice in parameter space. Periodic axes cover
/// [a, b) with dims equally spaced nodes and wrap; bounded axes include both
/// endpoints. Flattening is row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dims: Vec<usize>,
    periodic: Vec<bool>,
    ranges: Vec<(f64, f64)>,
}

impl Grid {
    pub fn new(dims: Vec<usize>, periodic: Vec<bool>, ranges: Vec<(f64, f64)>) -> Result<Self> {
        if dims.is_empty() || dims.len() != periodic.len() || dims.len() != ranges.len() {
            return Err(GeomError::InvalidInput(
                "grid axes must agree in dims/periodic/ranges".into(),
            ));
        }
        for (k, &d) in dims.iter().enumerate() {
            if d < 2 {
                return Err(GeomError::InvalidInput(format!(
                    "axis {k} needs at least 2 samples"
                )));
            }
            let (a, b) = ranges[k];
            if !(b > a) || !a.is_finite() || !b.is_finite() {
                return Err(GeomError::InvalidInput(format!(
                    "axis {k} has empty or non-finite range [{a}, {b}]"
                )));
            }
        }
        Ok(Grid { dims, periodic, ranges })
    }

    /// Full circles at the default resolution; ranges are [0, 2pi).
    pub fn periodic_angles(dims: Vec<usize>) -> Self {
        let k = dims.len();
        Grid {
            dims,
            periodic: vec![true; k],
            ranges: vec![(0.0, std::f64::consts::TAU); k],
        }
    }

    pub fn d(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let (a, b) = self.ranges[axis];
        if self.periodic[axis] {
            (b - a) / self.dims[axis] as f64
        } else {
            (b - a) / (self.dims[axis] - 1) as f64
        }
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.d()).map(|k| self.spacing(k)).fold(f64::INFINITY, f64::min)
    }

    pub fn point(&self, multi: &[usize]) -> Vec<f64> {
        multi
            .iter()
            .enumerate()
            .map(|(k, &i)| self.ranges[k].0 + i as f64 * self.spacing(k))
            .collect()
    }

    pub fn flat(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for (k, &i) in multi.iter().enumerate() {
            debug_assert!(i < self.dims[k]);
            idx = idx * self.dims[k] + i;
        }
        idx
    }

    pub fn multi(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.d()];
        for k in (0..self.d()).rev() {
            out[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
        out
    }

    /// Step one node along `axis`; periodic axes wrap, bounded axes return
    /// None off the edge.
    pub fn neighbor(&self, multi: &[usize], axis: usize, step: isize) -> Option<Vec<usize>> {
        let mut out = multi.to_vec();
        let d = self.dims[axis] as isize;
        let j = multi[axis] as isize + step;
        if self.periodic[axis] {
            out[axis] = j.rem_euclid(d) as usize;
            Some(out)
        } else if (0..d).contains(&j) {
            out[axis] = j as usize;
            Some(out)
        } else {
            None
        }
    }

    /// Interior test: bounded axes must sit at least `margin` nodes from
    /// either end; periodic axes have no boundary.
    pub fn is_interior(&self, multi: &[usize], margin: usize) -> bool {
        multi.iter().enumerate().all(|(k, &i)| {
            self.periodic[k] || (i >= margin && i + margin < self.dims[k])
        })
    }

    pub fn interior_flats(&self, margin: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&f| self.is_interior(&self.multi(f), margin))
            .collect()
    }

    /// Wrap periodic coordinates into range; returns false when a bounded
    /// coordinate falls outside (with a small slack for roundoff).
    pub fn normalize_point(&self, u: &mut [f64]) -> bool {
        for k in 0..self.d() {
            let (a, b) = self.ranges[k];
            if self.periodic[k] {
                let w = b - a;
                u[k] = a + (u[k] - a).rem_euclid(w);
            } else {
                let slack = 1e-9 * (b - a);
                if u[k] < a - slack || u[k] > b + slack {
                    return false;
                }
                u[k] = u[k].clamp(a, b);
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattening_round_trip() {
        let g = Grid::new(
            vec![3, 4, 5],
            vec![true, false, true],
            vec![(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)],
        )
        .unwrap();
        assert_eq!(g.len(), 60);
        for f in 0..g.len() {
            assert_eq!(g.flat(&g.multi(f)), f);
        }
    }

    #[test]
    fn spacing_conventions() {
        let g = Grid::new(
            vec![4, 5],
            vec![true, false],
            vec![(0.0, 2.0), (0.0, 2.0)],
        )
        .unwrap();
        assert_eq!(g.spacing(0), 0.5);
        assert_eq!(g.spacing(1), 0.5);
        assert_eq!(g.point(&[3, 4]), vec![1.5, 2.0]);
    }

    #[test]
    fn neighbors_wrap_only_on_periodic_axes() {
        let g = Grid::new(
            vec![4, 4],
            vec![true, false],
            vec![(0.0, 1.0), (0.0, 1.0)],
        )
        .unwrap();
        assert_eq!(g.neighbor(&[3, 2], 0, 1), Some(vec![0, 2]));
        assert_eq!(g.neighbor(&[3, 3], 1, 1), None);
        assert_eq!(g.neighbor(&[0, 0], 1, -1), None);
    }

    #[test]
    fn interior_margins() {
        let g = Grid::new(
            vec![6, 6],
            vec![true, false],
            vec![(0.0, 1.0), (0.0, 1.0)],
        )
        .unwrap();
        assert!(g.is_interior(&[0, 1], 1));
        assert!(!g.is_interior(&[0, 0], 1));
        assert!(!g.is_interior(&[0, 5], 1));
        assert_eq!(g.interior_flats(1).len(), 24);
    }

    #[test]
    fn periodic_wrap() {
        let g = Grid::periodic_angles(vec![8]);
        let mut u = vec![-0.5];
        assert!(g.normalize_point(&mut u));
        assert!((u[0] - (std::f64::consts::TAU - 0.5)).abs() < 1e-12);
    }
}
