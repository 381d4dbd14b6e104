//! Compact convex subsets of R^d with Minkowski arithmetic, support
//! functions, and Hausdorff distances.
//!
//! Bodies carry a dual representation. The universal fast path is a vector
//! of support values `s_A(u_i) = sup{<u_i, a> : a in A}` over a fixed grid
//! of unit directions; Minkowski sums, scaling, inclusion and the Hausdorff
//! pseudo-metric are all coordinate-wise on that vector. For `d <= 2` a
//! body may additionally carry an exact vertex list, which backs the exact
//! polygon distance oracle used to quantify the grid error.
//!
//! The grid-level Hausdorff value is a *lower bound* of the true distance
//! (the sup over the whole sphere is restricted to the grid); refinement
//! tests in the verification suite quantify the gap rather than pretending
//! it is zero.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::task_rng;

/// Unit-norm tolerance for grid directions.
pub const DIRECTION_NORM_TOL: f64 = 1e-12;

/// Tolerance used when matching a floating-point time/level/direction to a
/// stored grid entry.
pub const GRID_MATCH_TOL: f64 = 1e-12;

pub type Point = Vec<f64>;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Content address of a direction grid: two grids with equal ids hold
/// identical direction lists by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridId {
    pub dim: u32,
    pub count: u32,
    pub seed: u64,
}

impl fmt::Display for GridId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}-m{}-s{}", self.dim, self.count, self.seed)
    }
}

/// A fixed grid of unit directions on the sphere S^{d-1}.
///
/// Invariants, enforced at construction:
/// - every direction has Euclidean norm 1 within [`DIRECTION_NORM_TOL`];
/// - the signed canonical axes `±e_1..±e_d` are members;
/// - directions are pairwise distinct and antipodally paired, so that
///   `s_{-A}(u) = s_A(-u)` is computable by an index lookup.
#[derive(Debug, Clone)]
pub struct DirectionGrid {
    id: GridId,
    dim: usize,
    directions: Vec<Point>,
    antipode: Vec<usize>,
}

/// Builds a deterministic direction grid with `count` directions.
///
/// The first `2*dim` entries are the signed axes; the remainder is a
/// quasi-uniform antipodally-paired family generated from `seed` (evenly
/// spaced angles in the plane, normalized Gaussian pairs in higher
/// dimension). `count` must be at least `2*dim` and leave an even number
/// of extras so antipodal closure is possible.
pub fn make_direction_grid(dim: usize, count: usize, seed: u64) -> Result<Arc<DirectionGrid>> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if count < 2 * dim {
        return Err(Error::invalid(format!(
            "direction count {count} < 2*dim = {}",
            2 * dim
        )));
    }
    let extras = count - 2 * dim;
    if extras % 2 != 0 {
        return Err(Error::invalid(
            "direction count must leave an even number of non-axis directions \
             (the grid is closed under negation)",
        ));
    }
    if dim == 1 && count != 2 {
        return Err(Error::invalid(
            "in dimension 1 the only unit directions are +1 and -1",
        ));
    }

    let mut directions: Vec<Point> = Vec::with_capacity(count);
    let mut antipode: Vec<usize> = Vec::with_capacity(count);
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        directions.push(e);
        antipode.push(dim + k);
    }
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = -1.0;
        directions.push(e);
        antipode.push(k);
    }

    let pairs = extras / 2;
    if pairs > 0 {
        if dim == 2 {
            // Van der Corput angles in (0, pi) with a seed-derived phase.
            // The acceptance rule is independent of the requested count, so
            // grids with the same seed are nested: a larger count extends a
            // smaller one (superset refinement).
            let mut rng = task_rng(seed ^ 0x9e37_79b9);
            let phase: f64 = rng.gen_range(0.0..1.0);
            let mut emitted = 0usize;
            let mut p = 0u64;
            let mut angles: Vec<f64> = Vec::with_capacity(pairs);
            while emitted < pairs {
                let theta = (phase + van_der_corput(p)).fract() * std::f64::consts::PI;
                p += 1;
                let near_axis = theta < 1e-9
                    || (theta - std::f64::consts::FRAC_PI_2).abs() < 1e-9
                    || theta > std::f64::consts::PI - 1e-9;
                if near_axis || angles.iter().any(|a| (a - theta).abs() < 1e-9) {
                    continue;
                }
                angles.push(theta);
                let u = vec![theta.cos(), theta.sin()];
                let v = vec![-theta.cos(), -theta.sin()];
                antipode.push(directions.len() + 1);
                antipode.push(directions.len());
                directions.push(u);
                directions.push(v);
                emitted += 1;
            }
        } else {
            // Normalized Gaussian pairs, rejecting near-duplicates.
            let mut rng = task_rng(seed ^ 0x9e37_79b9);
            let normal = rand_distr::StandardNormal;
            let mut emitted = 0usize;
            while emitted < pairs {
                let mut v: Point = (0..dim).map(|_| rng.sample::<f64, _>(normal)).collect();
                let n = norm2(&v);
                if n < 1e-6 {
                    continue;
                }
                v.iter_mut().for_each(|x| *x /= n);
                let duplicate = directions
                    .iter()
                    .any(|u| dot(u, &v).abs() > 1.0 - 1e-10);
                if duplicate {
                    continue;
                }
                let neg: Point = v.iter().map(|x| -x).collect();
                antipode.push(directions.len() + 1);
                antipode.push(directions.len());
                directions.push(v);
                directions.push(neg);
                emitted += 1;
            }
        }
    }

    let grid = DirectionGrid {
        id: GridId {
            dim: dim as u32,
            count: count as u32,
            seed,
        },
        dim,
        directions,
        antipode,
    };
    grid.validate()?;
    Ok(Arc::new(grid))
}

impl DirectionGrid {
    /// Regenerates the grid identified by `id`.
    pub fn from_id(id: GridId) -> Result<Arc<DirectionGrid>> {
        make_direction_grid(id.dim as usize, id.count as usize, id.seed)
    }

    pub fn id(&self) -> GridId {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.directions[i]
    }

    pub fn directions(&self) -> &[Point] {
        &self.directions
    }

    /// Index `j` with `u_j = -u_i`.
    pub fn antipode(&self, i: usize) -> usize {
        self.antipode[i]
    }

    /// Index of the axis direction `sign * e_k`.
    pub fn axis(&self, k: usize, negative: bool) -> usize {
        debug_assert!(k < self.dim);
        if negative {
            self.dim + k
        } else {
            k
        }
    }

    /// Finds the grid index of `u` within [`GRID_MATCH_TOL`], if present.
    pub fn index_of(&self, u: &[f64]) -> Option<usize> {
        self.directions.iter().position(|v| {
            v.iter()
                .zip(u)
                .all(|(a, b)| (a - b).abs() <= GRID_MATCH_TOL)
        })
    }

    fn validate(&self) -> Result<()> {
        if self.directions.len() < 2 * self.dim {
            return Err(Error::invalid("grid must contain the signed axes"));
        }
        for (i, u) in self.directions.iter().enumerate() {
            if u.len() != self.dim {
                return Err(Error::invalid("direction dimension mismatch"));
            }
            if (norm2(u) - 1.0).abs() > DIRECTION_NORM_TOL {
                return Err(Error::invalid(format!("direction {i} is not unit norm")));
            }
            let j = self.antipode[i];
            if self.antipode[j] != i {
                return Err(Error::invalid("antipode map is not an involution"));
            }
            if self.directions[j]
                .iter()
                .zip(u)
                .any(|(a, b)| (a + b).abs() > DIRECTION_NORM_TOL)
            {
                return Err(Error::invalid(format!("direction {i} lacks its antipode")));
            }
        }
        for i in 0..self.directions.len() {
            for j in (i + 1)..self.directions.len() {
                if self.directions[i]
                    .iter()
                    .zip(&self.directions[j])
                    .all(|(a, b)| (a - b).abs() <= 1e-12)
                {
                    return Err(Error::invalid("directions must be pairwise distinct"));
                }
            }
        }
        Ok(())
    }
}

/// Serialized form of a direction grid. Grids are content-addressed: the
/// id alone suffices to regenerate the direction list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridJson {
    pub id: GridId,
    pub directions: Vec<Point>,
}

impl DirectionGrid {
    pub fn to_json(&self) -> GridJson {
        GridJson {
            id: self.id,
            directions: self.directions.clone(),
        }
    }
}

/// A non-empty compact convex subset of R^d.
///
/// `support[i]` is the support value in grid direction `u_i`. When the body
/// is a polytope with `d <= 2`, `vertices` holds exact ground truth and the
/// support vector is derived from it (never stored independently).
#[derive(Debug, Clone)]
pub struct ConvexBody {
    grid: Arc<DirectionGrid>,
    support: Vec<f64>,
    vertices: Option<Vec<Point>>,
}

impl ConvexBody {
    /// Polytope from an explicit vertex list. The list must be non-empty;
    /// support values are the exact vertex maxima.
    pub fn from_vertices(grid: &Arc<DirectionGrid>, vertices: Vec<Point>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("a convex body must be non-empty"));
        }
        if vertices.iter().any(|v| v.len() != grid.dim()) {
            return Err(Error::invalid("vertex dimension mismatch"));
        }
        let support = (0..grid.len())
            .map(|i| {
                vertices
                    .iter()
                    .map(|v| dot(grid.direction(i), v))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        Ok(ConvexBody {
            grid: Arc::clone(grid),
            support,
            vertices: Some(vertices),
        })
    }

    /// Body from raw support values (no vertex ground truth). Values must
    /// be finite; no attempt is made to verify that they form a consistent
    /// support function.
    pub fn from_support(grid: &Arc<DirectionGrid>, support: Vec<f64>) -> Result<Self> {
        if support.len() != grid.len() {
            return Err(Error::invalid("support vector length must match grid size"));
        }
        if support.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("support values must be finite"));
        }
        Ok(ConvexBody {
            grid: Arc::clone(grid),
            support,
            vertices: None,
        })
    }

    /// The singleton `{a}`.
    pub fn singleton(grid: &Arc<DirectionGrid>, a: Point) -> Result<Self> {
        Self::from_vertices(grid, vec![a])
    }

    /// Euclidean ball of radius `r` centered at `c` (support-only).
    pub fn ball(grid: &Arc<DirectionGrid>, center: &[f64], radius: f64) -> Result<Self> {
        if radius < 0.0 {
            return Err(Error::invalid("ball radius must be nonnegative"));
        }
        if center.len() != grid.dim() {
            return Err(Error::invalid("center dimension mismatch"));
        }
        let support = (0..grid.len())
            .map(|i| dot(grid.direction(i), center) + radius)
            .collect();
        Ok(ConvexBody {
            grid: Arc::clone(grid),
            support,
            vertices: None,
        })
    }

    /// Axis-aligned box `prod_k [lo_k, hi_k]`, with corner vertices when the
    /// corner count is small enough to be useful.
    pub fn axis_box(grid: &Arc<DirectionGrid>, lo: &[f64], hi: &[f64]) -> Result<Self> {
        let d = grid.dim();
        if lo.len() != d || hi.len() != d {
            return Err(Error::invalid("box bounds dimension mismatch"));
        }
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Err(Error::invalid("box requires lo <= hi per axis"));
        }
        if d <= 8 {
            let mut vertices = Vec::with_capacity(1 << d);
            for mask in 0..(1usize << d) {
                let v: Point = (0..d)
                    .map(|k| if mask & (1 << k) != 0 { hi[k] } else { lo[k] })
                    .collect();
                vertices.push(v);
            }
            Self::from_vertices(grid, vertices)
        } else {
            let support = (0..grid.len())
                .map(|i| {
                    let u = grid.direction(i);
                    (0..d).map(|k| (u[k] * lo[k]).max(u[k] * hi[k])).sum()
                })
                .collect();
            Ok(ConvexBody {
                grid: Arc::clone(grid),
                support,
                vertices: None,
            })
        }
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn support_values(&self) -> &[f64] {
        &self.support
    }

    pub fn vertices(&self) -> Option<&[Point]> {
        self.vertices.as_deref()
    }

    /// Support value `s_A(u_i)`.
    pub fn support(&self, i: usize) -> Result<f64> {
        self.support
            .get(i)
            .copied()
            .ok_or_else(|| Error::invalid(format!("direction index {i} out of range")))
    }

    fn check_same_grid(&self, other: &ConvexBody) -> Result<()> {
        if self.grid.id() != other.grid.id() {
            return Err(Error::invalid(format!(
                "grid mismatch: {} vs {}",
                self.grid.id(),
                other.grid.id()
            )));
        }
        Ok(())
    }

    /// Minkowski sum `A + B`: support vectors add; vertex lists (when both
    /// present) combine into the pairwise-sum polytope, hull-reduced for
    /// `d <= 2`.
    pub fn minkowski_sum(&self, other: &ConvexBody) -> Result<ConvexBody> {
        self.check_same_grid(other)?;
        let support = self
            .support
            .iter()
            .zip(&other.support)
            .map(|(a, b)| a + b)
            .collect();
        let vertices = match (&self.vertices, &other.vertices) {
            (Some(va), Some(vb)) => {
                let mut sums = Vec::with_capacity(va.len() * vb.len());
                for a in va {
                    for b in vb {
                        sums.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
                    }
                }
                Some(hull_reduce(self.dim(), sums))
            }
            _ => None,
        };
        Ok(ConvexBody {
            grid: Arc::clone(&self.grid),
            support,
            vertices,
        })
    }

    /// Scalar multiple `lambda * A`. Negative factors use the antipodal
    /// index map: `s_{lambda A}(u) = |lambda| * s_A(-u)`.
    pub fn scale(&self, lambda: f64) -> ConvexBody {
        let support: Vec<f64> = if lambda >= 0.0 {
            self.support.iter().map(|s| lambda * s).collect()
        } else {
            (0..self.support.len())
                .map(|i| -lambda * self.support[self.grid.antipode(i)])
                .collect()
        };
        let vertices = self
            .vertices
            .as_ref()
            .map(|vs| vs.iter().map(|v| v.iter().map(|x| lambda * x).collect()).collect());
        ConvexBody {
            grid: Arc::clone(&self.grid),
            support,
            vertices,
        }
    }

    /// Grid Hausdorff distance: `max_i |s_A(u_i) - s_B(u_i)|`.
    ///
    /// Exact for convex bodies when the max runs over the whole sphere; on
    /// a finite grid this is a lower bound of the true distance.
    pub fn hausdorff(&self, other: &ConvexBody) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .support
            .iter()
            .zip(&other.support)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Grid-level inclusion certificate: `B ⊆ A` iff `s_B <= s_A` in every
    /// grid direction. Exact for polytopes whose face normals lie on the
    /// grid.
    pub fn contains(&self, other: &ConvexBody) -> Result<bool> {
        self.check_same_grid(other)?;
        Ok(other
            .support
            .iter()
            .zip(&self.support)
            .all(|(b, a)| b <= a))
    }

    /// `max_i |s_A(u_i)|`, i.e. the grid Hausdorff distance to `{0}`.
    pub fn norm(&self) -> f64 {
        self.support.iter().map(|s| s.abs()).fold(0.0, f64::max)
    }

    /// Width of the body along grid direction `i`: `s_A(u_i) + s_A(-u_i)`.
    pub fn width(&self, i: usize) -> f64 {
        self.support[i] + self.support[self.grid.antipode(i)]
    }

    /// Largest width over all grid directions; 0 exactly for singletons.
    pub fn grid_diameter(&self) -> f64 {
        (0..self.support.len())
            .map(|i| self.width(i))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> BodyJson {
        BodyJson {
            dim: self.dim(),
            grid_id: self.grid.id().to_string(),
            support: self.support.clone(),
            vertices: self.vertices.clone(),
        }
    }

    pub fn from_json(json: &BodyJson, grid: &Arc<DirectionGrid>) -> Result<ConvexBody> {
        if json.grid_id != grid.id().to_string() {
            return Err(Error::invalid(format!(
                "body references grid {} but {} was supplied",
                json.grid_id,
                grid.id()
            )));
        }
        if json.dim != grid.dim() {
            return Err(Error::invalid("body dimension mismatch"));
        }
        match &json.vertices {
            Some(vs) => ConvexBody::from_vertices(grid, vs.clone()),
            None => ConvexBody::from_support(grid, json.support.clone()),
        }
    }
}

/// Wire form of a convex body.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyJson {
    pub dim: usize,
    pub grid_id: String,
    pub support: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Point>>,
}

/// Exact Hausdorff distance between two polytopes in dimension <= 2.
///
/// Both directed distances are maximized over vertices (the distance to a
/// convex set is a convex function, so the max over a polytope is attained
/// at a vertex) and each vertex distance is a min over point-to-segment
/// projections of the other polygon.
pub fn hausdorff_exact_polygon(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    if a.dim() > 2 {
        return Err(Error::unsupported(
            "exact Hausdorff oracle is only available for dim <= 2",
        ));
    }
    a.check_same_grid(b)?;
    let va = a
        .vertices()
        .ok_or_else(|| Error::unsupported("exact oracle requires vertex data"))?;
    let vb = b
        .vertices()
        .ok_or_else(|| Error::unsupported("exact oracle requires vertex data"))?;
    if a.dim() == 1 {
        let (alo, ahi) = interval_of(va);
        let (blo, bhi) = interval_of(vb);
        return Ok((alo - blo).abs().max((ahi - bhi).abs()));
    }
    let ha = convex_hull_2d(va);
    let hb = convex_hull_2d(vb);
    let d_ab = ha
        .iter()
        .map(|p| distance_to_polygon(p, &hb))
        .fold(0.0, f64::max);
    let d_ba = hb
        .iter()
        .map(|p| distance_to_polygon(p, &ha))
        .fold(0.0, f64::max);
    Ok(d_ab.max(d_ba))
}

fn interval_of(vs: &[Point]) -> (f64, f64) {
    let lo = vs.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
    let hi = vs.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn hull_reduce(dim: usize, points: Vec<Point>) -> Vec<Point> {
    match dim {
        1 => {
            let (lo, hi) = interval_of(&points);
            if lo == hi {
                vec![vec![lo]]
            } else {
                vec![vec![lo], vec![hi]]
            }
        }
        2 => convex_hull_2d(&points),
        // Higher dimensions: keep the raw points; extra interior points do
        // not affect support maxima.
        _ => points,
    }
}

/// Base-2 radical inverse; low-discrepancy in [0, 1).
fn van_der_corput(mut n: u64) -> f64 {
    let mut inv = 0.0;
    let mut base = 0.5;
    while n > 0 {
        if n & 1 == 1 {
            inv += base;
        }
        base *= 0.5;
        n >>= 1;
    }
    inv
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; returns the hull in CCW order. Degenerate
/// inputs collapse to one or two points.
pub fn convex_hull_2d(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap()
            .then(a[1].partial_cmp(&b[1]).unwrap())
    });
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= 1e-14 && (a[1] - b[1]).abs() <= 1e-14);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for p in &pts {
        while lower.len() >= 2 && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.is_empty() {
        // All points collinear and deduped down to a segment's interior.
        return pts;
    }
    lower
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return (ap[0] * ap[0] + ap[1] * ap[1]).sqrt();
    }
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
    let dx = p[0] - (a[0] + t * ab[0]);
    let dy = p[1] - (a[1] + t * ab[1]);
    (dx * dx + dy * dy).sqrt()
}

/// Distance from a point to a convex polygon given as a CCW hull.
fn distance_to_polygon(p: &[f64], hull: &[Point]) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => {
            let dx = p[0] - hull[0][0];
            let dy = p[1] - hull[0][1];
            (dx * dx + dy * dy).sqrt()
        }
        2 => point_segment_distance(p, &hull[0], &hull[1]),
        n => {
            let inside = (0..n).all(|k| cross2(&hull[k], &hull[(k + 1) % n], p) >= -1e-12);
            if inside {
                return 0.0;
            }
            (0..n)
                .map(|k| point_segment_distance(p, &hull[k], &hull[(k + 1) % n]))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(count: usize) -> Arc<DirectionGrid> {
        make_direction_grid(2, count, 7).unwrap()
    }

    #[test]
    fn grid_in_dim_one_is_plus_minus_one() {
        let g = make_direction_grid(1, 2, 0).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.direction(0), &[1.0]);
        assert_eq!(g.direction(1), &[-1.0]);
        assert!(make_direction_grid(1, 4, 0).is_err());
    }

    #[test]
    fn grid_forced_axis_members() {
        let g = make_direction_grid(2, 4, 7).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.direction(0), &[1.0, 0.0]);
        assert_eq!(g.direction(1), &[0.0, 1.0]);
        assert_eq!(g.direction(2), &[-1.0, 0.0]);
        assert_eq!(g.direction(3), &[0.0, -1.0]);
    }

    #[test]
    fn grid_is_deterministic() {
        let a = make_direction_grid(2, 128, 7).unwrap();
        let b = make_direction_grid(2, 128, 7).unwrap();
        assert_eq!(a.directions(), b.directions());
        let c = make_direction_grid(2, 128, 8).unwrap();
        assert_ne!(a.directions(), c.directions());
    }

    #[test]
    fn grid_rejects_small_or_odd_counts() {
        assert!(make_direction_grid(2, 3, 0).is_err());
        assert!(make_direction_grid(2, 7, 0).is_err());
        assert!(make_direction_grid(3, 128, 0).is_ok());
    }

    #[test]
    fn antipode_map_is_consistent() {
        let g = grid2(128);
        for i in 0..g.len() {
            let j = g.antipode(i);
            for (a, b) in g.direction(i).iter().zip(g.direction(j)) {
                assert!((a + b).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn singleton_support_is_inner_product() {
        let g = grid2(16);
        let a = vec![0.3, -1.25];
        let body = ConvexBody::singleton(&g, a.clone()).unwrap();
        for i in 0..g.len() {
            assert_eq!(body.support(i).unwrap(), dot(g.direction(i), &a));
        }
    }

    #[test]
    fn unit_ball_support_is_one() {
        let g = grid2(64);
        let ball = ConvexBody::ball(&g, &[0.0, 0.0], 1.0).unwrap();
        for i in 0..g.len() {
            assert!((ball.support(i).unwrap() - 1.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn unit_square_support_along_axis() {
        let g = grid2(16);
        let sq = ConvexBody::axis_box(&g, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(sq.support(g.axis(0, false)).unwrap(), 1.0);
        assert_eq!(sq.support(g.axis(0, true)).unwrap(), 0.0);
    }

    #[test]
    fn support_index_out_of_range() {
        let g = grid2(8);
        let b = ConvexBody::singleton(&g, vec![0.0, 0.0]).unwrap();
        assert!(b.support(8).is_err());
    }

    #[test]
    fn minkowski_identity_and_boxes() {
        let g = grid2(32);
        let sq = ConvexBody::axis_box(&g, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let zero = ConvexBody::singleton(&g, vec![0.0, 0.0]).unwrap();
        let same = sq.minkowski_sum(&zero).unwrap();
        assert_eq!(same.support_values(), sq.support_values());

        let twice = sq.minkowski_sum(&sq).unwrap();
        let expect = ConvexBody::axis_box(&g, &[0.0, 0.0], &[2.0, 2.0]).unwrap();
        for (a, b) in twice.support_values().iter().zip(expect.support_values()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn minkowski_grid_mismatch_rejected() {
        let g1 = grid2(16);
        let g2 = grid2(32);
        let a = ConvexBody::singleton(&g1, vec![0.0, 0.0]).unwrap();
        let b = ConvexBody::singleton(&g2, vec![0.0, 0.0]).unwrap();
        assert!(a.minkowski_sum(&b).is_err());
    }

    /// Brute-force oracle: support of the pairwise vertex-sum set. The max
    /// over all sums equals the max over the hull, so no hull is needed on
    /// the oracle side.
    fn pairwise_sum_support_oracle(a: &ConvexBody, b: &ConvexBody, i: usize) -> f64 {
        let u = a.grid().direction(i);
        let mut best = f64::NEG_INFINITY;
        for va in a.vertices().unwrap() {
            for vb in b.vertices().unwrap() {
                let s: Vec<f64> = va.iter().zip(vb).map(|(x, y)| x + y).collect();
                best = best.max(dot(u, &s));
            }
        }
        best
    }

    #[test]
    fn minkowski_matches_pairwise_sum_hull_oracle() {
        let g = grid2(64);
        let mut rng = task_rng(11);
        for _ in 0..50 {
            let a = random_polygon(&g, &mut rng);
            let b = random_polygon(&g, &mut rng);
            let sum = a.minkowski_sum(&b).unwrap();
            for i in 0..g.len() {
                let oracle = pairwise_sum_support_oracle(&a, &b, i);
                assert!(
                    (sum.support(i).unwrap() - oracle).abs() <= 1e-12,
                    "support additivity vs hull oracle"
                );
            }
        }
    }

    fn random_polygon(g: &Arc<DirectionGrid>, rng: &mut impl Rng) -> ConvexBody {
        let n = rng.gen_range(1..=8);
        let pts: Vec<Point> = (0..n)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        ConvexBody::from_vertices(g, pts).unwrap()
    }

    #[test]
    fn scale_basics() {
        let g = make_direction_grid(1, 2, 0).unwrap();
        let seg = ConvexBody::axis_box(&g, &[0.0], &[1.0]).unwrap();
        let same = seg.scale(1.0);
        assert_eq!(same.support_values(), seg.support_values());

        let zero = seg.scale(0.0);
        assert_eq!(zero.support_values(), &[0.0, 0.0]);

        // scale(-1, [0,1]) = [-1,0]: s(+1) = 0, s(-1) = 1.
        let neg = seg.scale(-1.0);
        assert_eq!(neg.support(0).unwrap(), 0.0);
        assert_eq!(neg.support(1).unwrap(), 1.0);
    }

    #[test]
    fn hausdorff_of_identical_is_zero() {
        let g = grid2(32);
        let b = ConvexBody::axis_box(&g, &[-0.5, 0.0], &[0.25, 2.0]).unwrap();
        assert_eq!(b.hausdorff(&b).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_singleton_on_grid_direction() {
        let g = grid2(16);
        let zero = ConvexBody::singleton(&g, vec![0.0, 0.0]).unwrap();
        let x = ConvexBody::singleton(&g, vec![3.0, 0.0]).unwrap();
        assert_eq!(zero.hausdorff(&x).unwrap(), 3.0);
    }

    #[test]
    fn exact_polygon_oracle_cases() {
        let g = grid2(16);
        let sq = ConvexBody::axis_box(&g, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let zero = ConvexBody::singleton(&g, vec![0.0, 0.0]).unwrap();
        let d = hausdorff_exact_polygon(&sq, &zero).unwrap();
        assert!((d - 2.0f64.sqrt()).abs() <= 1e-12);

        let g1 = make_direction_grid(1, 2, 0).unwrap();
        let a = ConvexBody::axis_box(&g1, &[0.0], &[1.0]).unwrap();
        let b = ConvexBody::axis_box(&g1, &[0.0], &[2.0]).unwrap();
        assert_eq!(hausdorff_exact_polygon(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn exact_oracle_translation_identity() {
        let g = grid2(16);
        let tri =
            ConvexBody::from_vertices(&g, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])
                .unwrap();
        let shift = ConvexBody::singleton(&g, vec![0.6, -0.8]).unwrap();
        let moved = tri.minkowski_sum(&shift).unwrap();
        let d = hausdorff_exact_polygon(&tri, &moved).unwrap();
        assert!((d - 1.0).abs() <= 1e-12, "translate by unit vector: got {d}");
    }

    #[test]
    fn exact_oracle_requires_vertices() {
        let g = grid2(16);
        let ball = ConvexBody::ball(&g, &[0.0, 0.0], 1.0).unwrap();
        let sq = ConvexBody::axis_box(&g, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(
            hausdorff_exact_polygon(&ball, &sq),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn containment_certificates() {
        let g = grid2(16);
        let big = ConvexBody::axis_box(&g, &[0.0, 0.0], &[2.0, 2.0]).unwrap();
        let small = ConvexBody::axis_box(&g, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(big.contains(&small).unwrap());
        assert!(!small.contains(&big).unwrap());
        assert!(big.contains(&big).unwrap());

        let g1 = make_direction_grid(1, 2, 0).unwrap();
        let zero = ConvexBody::singleton(&g1, vec![0.0]).unwrap();
        let seg = ConvexBody::axis_box(&g1, &[0.0], &[1.0]).unwrap();
        assert!(!zero.contains(&seg).unwrap());
    }

    #[test]
    fn norm_cases() {
        let g = grid2(128);
        let zero = ConvexBody::singleton(&g, vec![0.0, 0.0]).unwrap();
        assert_eq!(zero.norm(), 0.0);

        let sq = ConvexBody::axis_box(&g, &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        assert!(sq.norm() >= 1.0);
        let exact = hausdorff_exact_polygon(&sq, &zero).unwrap();
        assert!((exact - 2.0f64.sqrt()).abs() <= 1e-12);
        assert!(sq.norm() <= exact + 1e-12);
    }

    #[test]
    fn same_seed_grids_are_nested() {
        let coarse = grid2(128);
        let fine = grid2(512);
        for u in coarse.directions() {
            assert!(
                fine.index_of(u).is_some(),
                "coarse direction missing from refined grid"
            );
        }
    }

    #[test]
    fn grid_refinement_is_monotone_toward_exact() {
        // Same seed => the fine grid is a superset, so the grid value is
        // nondecreasing under refinement and never exceeds the oracle.
        let coarse = grid2(128);
        let fine = grid2(512);
        let mut rng = task_rng(23);
        for _ in 0..25 {
            let a_pts: Vec<Point> = (0..6)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let b_pts: Vec<Point> = (0..6)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let a_c = ConvexBody::from_vertices(&coarse, a_pts.clone()).unwrap();
            let b_c = ConvexBody::from_vertices(&coarse, b_pts.clone()).unwrap();
            let a_f = ConvexBody::from_vertices(&fine, a_pts).unwrap();
            let b_f = ConvexBody::from_vertices(&fine, b_pts).unwrap();
            let d_coarse = a_c.hausdorff(&b_c).unwrap();
            let d_fine = a_f.hausdorff(&b_f).unwrap();
            let exact = hausdorff_exact_polygon(&a_f, &b_f).unwrap();
            assert!(d_coarse <= d_fine + 1e-12);
            assert!(d_fine <= exact + 1e-12);
        }
    }

    #[test]
    fn body_json_round_trip() {
        let g = grid2(16);
        let sq = ConvexBody::axis_box(&g, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let json = serde_json::to_string(&sq.to_json()).unwrap();
        let parsed: BodyJson = serde_json::from_str(&json).unwrap();
        let back = ConvexBody::from_json(&parsed, &g).unwrap();
        assert_eq!(back.support_values(), sq.support_values());

        let other = grid2(32);
        assert!(ConvexBody::from_json(&parsed, &other).is_err());
    }

    #[test]
    fn empty_vertex_list_rejected() {
        let g = grid2(16);
        assert!(ConvexBody::from_vertices(&g, vec![]).is_err());
    }
}
