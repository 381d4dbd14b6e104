//! Deterministic random instance generators.
//!
//! These back the exact self-test suites and the oracle-agreement checks:
//! random polytopes, nested fuzzy stacks built from shrink profiles, random
//! finite-space fuzzy maps with vertex ground truth, and selection pairs.
//! Everything is driven by a caller-supplied RNG so instance streams are
//! reproducible from a single seed.

use std::sync::Arc;

use rand::Rng;

use crate::fuzzy::{make_fuzzy, AlphaGrid, FuzzySet};
use crate::geometry::{ConvexBody, DirectionGrid, Point};
use crate::randomsets::{DiscreteRandomFuzzySet, FiniteSpace, Selection};

/// Random polytope with up to `max_vertices` vertices drawn uniformly from
/// `[-scale, scale]^d`.
pub fn random_polytope(
    grid: &Arc<DirectionGrid>,
    rng: &mut impl Rng,
    max_vertices: usize,
    scale: f64,
) -> ConvexBody {
    let n = rng.gen_range(1..=max_vertices.max(1));
    let dim = grid.dim();
    let pts: Vec<Point> = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-scale..scale)).collect())
        .collect();
    ConvexBody::from_vertices(grid, pts).expect("non-empty vertex list")
}

/// Random polytope recentered so that the origin lies in its convex hull
/// (the vertex mean is subtracted). Scaling such a body by factors in
/// [0, 1] then yields a nested family.
pub fn random_polytope_with_zero(
    grid: &Arc<DirectionGrid>,
    rng: &mut impl Rng,
    max_vertices: usize,
    scale: f64,
) -> ConvexBody {
    let body = random_polytope(grid, rng, max_vertices, scale);
    let vs = body.vertices().expect("constructed from vertices");
    let dim = grid.dim();
    let mean: Point = (0..dim)
        .map(|k| vs.iter().map(|v| v[k]).sum::<f64>() / vs.len() as f64)
        .collect();
    let recentered: Vec<Point> = vs
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(a, b)| a - b).collect())
        .collect();
    ConvexBody::from_vertices(grid, recentered).expect("non-empty vertex list")
}

/// Random nested fuzzy set: scaled copies of a zero-containing base body,
/// with shrink factors nonincreasing in α. Occasionally degenerates to a
/// crisp set or an indicator to keep edge cases in play.
pub fn random_fuzzy_set(
    grid: &Arc<DirectionGrid>,
    alpha: &Arc<AlphaGrid>,
    rng: &mut impl Rng,
) -> FuzzySet {
    random_fuzzy_set_with(grid, alpha, rng, 6, 1.0)
}

pub fn random_fuzzy_set_with(
    grid: &Arc<DirectionGrid>,
    alpha: &Arc<AlphaGrid>,
    rng: &mut impl Rng,
    max_vertices: usize,
    scale: f64,
) -> FuzzySet {
    let style: f64 = rng.gen();
    if style < 0.15 {
        let a: Point = (0..grid.dim())
            .map(|_| rng.gen_range(-scale..scale))
            .collect();
        return FuzzySet::indicator(grid, alpha, a).expect("valid indicator");
    }
    let base = random_polytope_with_zero(grid, rng, max_vertices, scale);
    if style < 0.3 {
        return FuzzySet::crisp(alpha, base);
    }
    // Shrink profile: factors in (0, 1], sorted so the level-1 cut is the
    // smallest and the 0+ support set gets factor 1.
    let k = alpha.len();
    let mut factors: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0f64)).collect();
    factors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut cuts: Vec<ConvexBody> = factors.iter().map(|&r| base.scale(r)).collect();
    cuts.push(base);
    make_fuzzy(alpha, cuts).expect("shrink stacks are nested")
}

/// Random probability space with `n` atoms and weights bounded away from
/// zero.
pub fn random_space(rng: &mut impl Rng, n: usize) -> FiniteSpace {
    let mut weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    let total: f64 = weights.iter().sum();
    FiniteSpace::with_total_mass((0..n).map(|i| format!("w{i}")).collect(), weights, total)
        .expect("normalized weights")
}

/// Random finite-space fuzzy map with vertex ground truth on every cut.
/// With probability `singleton_prob` all values are indicators, making the
/// instance singleton-valued at every level.
pub fn random_drfs(
    grid: &Arc<DirectionGrid>,
    alpha: &Arc<AlphaGrid>,
    rng: &mut impl Rng,
    max_atoms: usize,
    max_vertices: usize,
    singleton_prob: f64,
) -> DiscreteRandomFuzzySet {
    let n = rng.gen_range(1..=max_atoms.max(1));
    let space = random_space(rng, n);
    let singleton_instance = rng.gen_bool(singleton_prob);
    let values: Vec<FuzzySet> = (0..n)
        .map(|_| {
            if singleton_instance || rng.gen_bool(0.25) {
                let a: Point = (0..grid.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                FuzzySet::indicator(grid, alpha, a).expect("valid indicator")
            } else {
                let base = random_polytope_with_zero(grid, rng, max_vertices, 1.0);
                FuzzySet::crisp(alpha, base)
            }
        })
        .collect();
    DiscreteRandomFuzzySet::new(space, values).expect("shared grids")
}

/// A pair of selections over a fresh space, distinct on at least one atom.
pub fn random_distinct_selection_pair(
    rng: &mut impl Rng,
    dim: usize,
    max_atoms: usize,
) -> (FiniteSpace, Selection, Selection) {
    fn draw<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<Point> {
        (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }
    let n = rng.gen_range(1..=max_atoms.max(1));
    let space = random_space(rng, n);
    let a = draw(rng, n, dim);
    let mut b = draw(rng, n, dim);
    // Force a difference on one atom in one coordinate.
    let atom = rng.gen_range(0..n);
    let coord = rng.gen_range(0..dim);
    b[atom][coord] = a[atom][coord] + rng.gen_range(0.5..1.5);
    (space, Selection::new(a), Selection::new(b))
}
