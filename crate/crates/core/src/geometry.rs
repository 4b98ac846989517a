//! Points, closed Euclidean balls and a grid index for ball queries.

use std::collections::HashMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// A point in `R^d`. Dimensions up to three are stored inline.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Point(SmallVec<[f64; 3]>);

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        Self(SmallVec::from_slice(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Self(SmallVec::from_vec(v))
    }
}

impl From<f64> for Point {
    fn from(v: f64) -> Self {
        Self::new(&[v])
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    fn from(v: [f64; N]) -> Self {
        Self::new(&v)
    }
}

impl FromIterator<f64> for Point {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Closed-ball membership `||a - b||_2 <= r`.
///
/// Compared on squared distances, which is symmetric in `a` and `b`.
#[inline]
pub fn within(a: &[f64], b: &[f64], r: f64) -> bool {
    squared_distance(a, b) <= r * r
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: Point,
    pub radius: f64,
}

impl Region {
    pub fn new(center: impl Into<Point>, radius: f64) -> Self {
        Self { center: center.into(), radius }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        within(&self.center, x, self.radius)
    }

    /// Smallest axis-aligned box around the ball.
    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox {
            lo: self.center.iter().map(|c| c - self.radius).collect(),
            hi: self.center.iter().map(|c| c + self.radius).collect(),
        }
    }
}

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Point,
    pub hi: Point,
}

impl BoundingBox {
    pub fn unit(d: usize) -> Self {
        Self { lo: Point::from(vec![0.0; d]), hi: Point::from(vec![1.0; d]) }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(self.hi.iter())).all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    /// Intersection, or `None` when empty or of zero volume.
    pub fn intersect(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let lo: Point = self.lo.iter().zip(other.lo.iter()).map(|(a, b)| a.max(*b)).collect();
        let hi: Point = self.hi.iter().zip(other.hi.iter()).map(|(a, b)| a.min(*b)).collect();
        if lo.iter().zip(hi.iter()).all(|(l, h)| l < h) {
            Some(BoundingBox { lo, hi })
        } else {
            None
        }
    }
}

type CellKey = SmallVec<[i64; 3]>;

/// Uniform-grid index answering "which stored points lie in the closed ball
/// of the fixed radius around `x`".
///
/// Cells have side equal to the radius, so a query inspects the `3^d`
/// neighbouring cells. A radius of zero falls back to a linear scan.
#[derive(Debug, Clone)]
pub struct BallIndex {
    dim: usize,
    radius: f64,
    cells: HashMap<CellKey, (u32, u32)>,
    order: Vec<u32>,
    points: Vec<f64>,
}

impl BallIndex {
    pub fn build<'a, I>(dim: usize, radius: f64, points: I) -> Self
    where
        I: IntoIterator<Item = Option<&'a [f64]>>,
    {
        assert!(radius >= 0.0 && radius.is_finite(), "ball radius must be finite and >= 0");
        let mut flat = Vec::new();
        let mut present = Vec::new();
        for (i, p) in points.into_iter().enumerate() {
            if let Some(p) = p {
                debug_assert_eq!(p.len(), dim);
                present.push(i as u32);
                flat.extend_from_slice(p);
            } else {
                flat.extend(std::iter::repeat_n(f64::NAN, dim));
            }
        }
        let mut index = Self { dim, radius, cells: HashMap::new(), order: Vec::new(), points: flat };
        if radius == 0.0 {
            index.order = present;
            return index;
        }
        let mut keyed: Vec<(CellKey, u32)> =
            present.into_iter().map(|i| (index.cell_of(index.point(i as usize)), i)).collect();
        keyed.sort_unstable();
        let mut start = 0usize;
        while start < keyed.len() {
            let mut end = start + 1;
            while end < keyed.len() && keyed[end].0 == keyed[start].0 {
                end += 1;
            }
            index.cells.insert(keyed[start].0.clone(), (start as u32, (end - start) as u32));
            start = end;
        }
        index.order = keyed.into_iter().map(|(_, i)| i).collect();
        index
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn cell_coord(&self, v: f64) -> i64 {
        // Saturating float->int cast keeps extreme coordinates in edge cells.
        (v / self.radius).floor() as i64
    }

    fn cell_of(&self, p: &[f64]) -> CellKey {
        p.iter().map(|&v| self.cell_coord(v)).collect()
    }

    /// Calls `f(i)` for every stored index `i` with `||p_i - x|| <= radius`.
    pub fn for_each_within(&self, x: &[f64], mut f: impl FnMut(usize)) {
        debug_assert_eq!(x.len(), self.dim);
        if self.radius == 0.0 {
            for &i in &self.order {
                if within(self.point(i as usize), x, 0.0) {
                    f(i as usize);
                }
            }
            return;
        }
        let base: CellKey = x.iter().map(|&v| self.cell_coord(v)).collect();
        let mut key = base.clone();
        let combos = 3usize.pow(self.dim as u32);
        for combo in 0..combos {
            let mut c = combo;
            for k in 0..self.dim {
                key[k] = base[k].saturating_add((c % 3) as i64 - 1);
                c /= 3;
            }
            if let Some(&(start, len)) = self.cells.get(&key[..]) {
                for &i in &self.order[start as usize..(start + len) as usize] {
                    if within(self.point(i as usize), x, self.radius) {
                        f(i as usize);
                    }
                }
            }
        }
    }

    pub fn within(&self, x: &[f64]) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(x, |i| out.push(i));
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_ball_boundaries() {
        assert!(within(&[0.6], &[0.5], 0.1));
        assert!(!within(&[0.6], &[0.5], 0.05));
        assert!(within(&[0.0, 0.0], &[0.3, 0.4], 0.5));
        assert!(Region::new(0.5, 0.1).contains(&[0.4]));
    }

    #[test]
    fn box_intersection() {
        let unit = BoundingBox::unit(2);
        let b = Region::new([0.95, 0.5], 0.1).bounding_box();
        let i = unit.intersect(&b).unwrap();
        assert_eq!(&*i.hi, &[1.0, 0.6]);
        let far = Region::new([3.0, 3.0], 0.5).bounding_box();
        assert!(unit.intersect(&far).is_none());
    }

    #[test]
    fn zero_radius_matches_only_coincident_points() {
        let pts = [[0.5], [0.25], [0.5]];
        let idx = BallIndex::build(1, 0.0, pts.iter().map(|p| Some(&p[..])));
        assert_eq!(idx.within(&[0.5]), vec![0, 2]);
    }

    #[test]
    fn missing_points_are_skipped() {
        let a = [0.1];
        let idx = BallIndex::build(1, 0.5, vec![None, Some(&a[..])]);
        assert_eq!(idx.within(&[0.0]), vec![1]);
    }

    proptest! {
        #[test]
        fn index_agrees_with_linear_scan(
            dim in 1usize..4,
            raw in proptest::collection::vec(-2.0f64..2.0, 3..300),
            q in proptest::collection::vec(-2.5f64..2.5, 3),
            r in 0.0f64..1.5,
        ) {
            let pts: Vec<Vec<f64>> = raw.chunks_exact(dim).map(|c| c.to_vec()).collect();
            let idx = BallIndex::build(dim, r, pts.iter().map(|p| Some(&p[..])));
            let x = &q[..dim];
            let brute: Vec<usize> = (0..pts.len()).filter(|&i| within(&pts[i], x, r)).collect();
            prop_assert_eq!(idx.within(x), brute);
        }
    }
}
