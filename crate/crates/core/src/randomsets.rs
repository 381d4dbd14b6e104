//! Random fuzzy sets on finite probability spaces.
//!
//! Everything here is exactly computable: the Aumann expectation of a
//! convex-valued map on a finite space is the weighted Minkowski sum of its
//! values, selections are per-atom point choices certified by support
//! inequalities, and the "is the integral a singleton?" question reduces to
//! a per-atom diameter check. The extreme-selection enumerator is kept as a
//! brute-force oracle against which the fast paths are tested.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{FuzzySet, FuzzySetJson};
use crate::geometry::{dot, norm2, ConvexBody, Point};
use crate::rng::task_rng;

/// Tolerance for selection membership certificates `<u_i, p> <= s(u_i) + TOL`.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Grid-diameter threshold below which a cut counts as a singleton.
pub const SINGLETON_TOL: f64 = 1e-9;

/// Default cap on the number of extreme selections enumerated.
pub const DEFAULT_SELECTION_CAP: usize = 1_000_000;

/// A finite measure space: atom labels with strictly positive weights
/// summing to the declared total mass (1 for probability spaces).
///
/// Zero weights are only representable through [`FiniteSpace::with_null_atoms`],
/// which exists to exercise "almost everywhere" semantics explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    atoms: Vec<String>,
    weights: Vec<f64>,
    total_mass: f64,
    allows_null: bool,
}

impl FiniteSpace {
    /// Probability space (total mass 1).
    pub fn probability(atoms: Vec<String>, weights: Vec<f64>) -> Result<FiniteSpace> {
        Self::with_total_mass(atoms, weights, 1.0)
    }

    /// Uniform probability space over `n` atoms labelled `w0..`.
    pub fn uniform(n: usize) -> Result<FiniteSpace> {
        if n == 0 {
            return Err(Error::invalid("a finite space needs at least one atom"));
        }
        let w = 1.0 / n as f64;
        Self::with_total_mass(
            (0..n).map(|i| format!("w{i}")).collect(),
            vec![w; n],
            w * n as f64,
        )
    }

    /// Positive finite measure with explicit total mass.
    pub fn with_total_mass(
        atoms: Vec<String>,
        weights: Vec<f64>,
        total_mass: f64,
    ) -> Result<FiniteSpace> {
        if weights.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
            return Err(Error::invalid("weights must be strictly positive"));
        }
        Self::build(atoms, weights, total_mass, false)
    }

    /// Variant admitting zero-weight atoms, for exercising μ-a.e. edge
    /// cases. Negative weights remain invalid.
    pub fn with_null_atoms(
        atoms: Vec<String>,
        weights: Vec<f64>,
        total_mass: f64,
    ) -> Result<FiniteSpace> {
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::invalid("weights must be nonnegative"));
        }
        Self::build(atoms, weights, total_mass, true)
    }

    fn build(
        atoms: Vec<String>,
        weights: Vec<f64>,
        total_mass: f64,
        allows_null: bool,
    ) -> Result<FiniteSpace> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::invalid(
                "atoms and weights must be non-empty and of equal length",
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - total_mass).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "weights sum to {sum}, declared total mass is {total_mass}"
            )));
        }
        Ok(FiniteSpace {
            atoms,
            weights,
            total_mass,
            allows_null,
        })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, i: usize) -> &str {
        &self.atoms[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }
}

/// A fuzzy set-valued random variable on a finite space: one fuzzy set per
/// atom, all on shared grids. Integrable boundedness is automatic (finite
/// maximum of support-set norms).
#[derive(Debug, Clone)]
pub struct DiscreteRandomFuzzySet {
    space: FiniteSpace,
    values: Vec<FuzzySet>,
}

impl DiscreteRandomFuzzySet {
    pub fn new(space: FiniteSpace, values: Vec<FuzzySet>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::invalid("one fuzzy set per atom is required"));
        }
        let first = &values[0];
        for v in &values[1..] {
            if v.alpha_grid().as_ref() != first.alpha_grid().as_ref()
                || v.direction_grid().id() != first.direction_grid().id()
            {
                return Err(Error::invalid("all values must share grids"));
            }
        }
        Ok(DiscreteRandomFuzzySet { space, values })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn values(&self) -> &[FuzzySet] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> &FuzzySet {
        &self.values[atom]
    }

    /// `max_ω ||X(ω)_{0+}||_H`, the finite-space integrable bound.
    pub fn norm_bound(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.support_set().norm())
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> RandomFuzzySetJson {
        RandomFuzzySetJson {
            atoms: self
                .space
                .atoms
                .iter()
                .zip(&self.space.weights)
                .zip(&self.values)
                .map(|((id, &weight), v)| AtomJson {
                    id: id.clone(),
                    weight,
                    fuzzy_set: v.to_json(),
                })
                .collect(),
            total_mass: self.space.total_mass,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomJson {
    pub id: String,
    pub weight: f64,
    pub fuzzy_set: FuzzySetJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomFuzzySetJson {
    pub atoms: Vec<AtomJson>,
    pub total_mass: f64,
}

/// Aumann expectation: the levelwise weighted Minkowski sum
/// `Σ_ω μ(ω) · X(ω)_α`, exact for convex values on finite spaces. The
/// result satisfies `s_{E[X]}(x, α) = Σ_ω μ(ω) s_{X(ω)}(x, α)` and carries
/// vertex data whenever every input cut does (d <= 2).
pub fn aumann_expectation(x: &DiscreteRandomFuzzySet) -> Result<FuzzySet> {
    let alpha = Arc::clone(x.values[0].alpha_grid());
    let slots = alpha.slots();
    let mut cuts: Vec<ConvexBody> = Vec::with_capacity(slots);
    for j in 0..slots {
        let mut acc: Option<ConvexBody> = None;
        for (omega, value) in x.values.iter().enumerate() {
            let scaled = value.cut_slot(j)?.scale(x.space.weight(omega));
            acc = Some(match acc {
                None => scaled,
                Some(sum) => sum.minkowski_sum(&scaled)?,
            });
        }
        cuts.push(acc.expect("finite spaces are non-empty"));
    }
    crate::fuzzy::make_fuzzy(&alpha, cuts)
}

/// A family of unit-norm linear functionals on R^d that separates points:
/// the canonical duals `e_1*..e_d*` followed by `count - dim` quasi-uniform
/// extras. For every `x != 0` some member has `φ(x) != 0` (the axis duals
/// alone already guarantee this).
pub fn separating_family(dim: usize, count: usize) -> Result<Vec<Point>> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if count < dim {
        return Err(Error::invalid(format!("family size {count} < dim {dim}")));
    }
    let mut family: Vec<Point> = (0..dim)
        .map(|k| {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            e
        })
        .collect();
    // Deterministic extras: fixed stream keyed by (dim, count).
    let mut rng = task_rng(0x5eb_a7e ^ ((dim as u64) << 32) ^ count as u64);
    let normal = rand_distr::StandardNormal;
    while family.len() < count {
        let mut v: Point = (0..dim)
            .map(|_| rand::Rng::sample::<f64, _>(&mut rng, normal))
            .collect();
        let n = norm2(&v);
        if n < 1e-6 {
            continue;
        }
        v.iter_mut().for_each(|c| *c /= n);
        family.push(v);
    }
    Ok(family)
}

/// A point-valued map on the atoms of a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    points: Vec<Point>,
}

impl Selection {
    /// An uncertified selection (plain data).
    pub fn new(points: Vec<Point>) -> Selection {
        Selection { points }
    }

    /// A selection certified to lie in the α-cut of `x` at every atom,
    /// via the support inequalities `<u_i, p> <= s(u_i) + MEMBERSHIP_TOL`.
    pub fn in_cuts(x: &DiscreteRandomFuzzySet, alpha: f64, points: Vec<Point>) -> Result<Selection> {
        if points.len() != x.space().len() {
            return Err(Error::invalid("one point per atom is required"));
        }
        for (omega, p) in points.iter().enumerate() {
            let cut = x.value(omega).cut(alpha)?;
            certify_membership(cut, p, omega)?;
        }
        Ok(Selection { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, atom: usize) -> &[f64] {
        &self.points[atom]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ_ω μ(ω) f(ω)`, the integral of the selection.
    pub fn integral(&self, space: &FiniteSpace) -> Result<Point> {
        if space.len() != self.points.len() {
            return Err(Error::invalid("selection does not match the space"));
        }
        let dim = self.points[0].len();
        let mut acc = vec![0.0; dim];
        for (omega, p) in self.points.iter().enumerate() {
            let w = space.weight(omega);
            for (a, c) in acc.iter_mut().zip(p) {
                *a += w * c;
            }
        }
        Ok(acc)
    }
}

fn certify_membership(cut: &ConvexBody, p: &[f64], omega: usize) -> Result<()> {
    let grid = cut.grid();
    for i in 0..grid.len() {
        if dot(grid.direction(i), p) > cut.support_values()[i] + MEMBERSHIP_TOL {
            return Err(Error::invalid(format!(
                "selection point violates the support certificate at atom {omega}, direction {i}"
            )));
        }
    }
    Ok(())
}

/// A separating functional together with the atom set on which it strictly
/// separates two selections.
#[derive(Debug, Clone)]
pub struct Separator {
    /// The functional, as a vector (`φ(x) = <v, x>`); drawn from the axis
    /// duals or their negations.
    pub functional: Point,
    /// Atoms with `φ(x1(ω)) > φ(x2(ω))`; their total weight is positive.
    pub atoms: Vec<usize>,
    /// `μ(A_φ)`.
    pub measure: f64,
}

/// Scans the separating family and its negations for a functional with
/// `μ{ω : φ(x1(ω)) > φ(x2(ω))} > 0`. Returns `None` iff the selections
/// agree up to 1e-12 on every positive-weight atom.
pub fn find_separator(
    x1: &Selection,
    x2: &Selection,
    space: &FiniteSpace,
) -> Result<Option<Separator>> {
    if x1.len() != space.len() || x2.len() != space.len() {
        return Err(Error::invalid("selections do not match the space"));
    }
    let dim = x1.point(0).len();
    if x2.point(0).len() != dim {
        return Err(Error::invalid("selection dimensions differ"));
    }
    let family = separating_family(dim, dim)?;
    for base in &family {
        for sign in [1.0, -1.0] {
            let phi: Point = base.iter().map(|c| sign * c).collect();
            let mut atoms = Vec::new();
            let mut measure = 0.0;
            for omega in 0..space.len() {
                let w = space.weight(omega);
                if w <= 0.0 {
                    continue;
                }
                let gap = dot(&phi, x1.point(omega)) - dot(&phi, x2.point(omega));
                if gap > 1e-12 {
                    atoms.push(omega);
                    measure += w;
                }
            }
            if measure > 0.0 {
                return Ok(Some(Separator {
                    functional: phi,
                    atoms,
                    measure,
                }));
            }
        }
    }
    Ok(None)
}

/// Enumerates every selection that picks a vertex of the α-cut at each
/// atom. Requires vertex data everywhere; the product size is capped.
pub fn extreme_selections(
    x: &DiscreteRandomFuzzySet,
    alpha: f64,
) -> Result<ExtremeSelections<'_>> {
    extreme_selections_with_cap(x, alpha, DEFAULT_SELECTION_CAP)
}

pub fn extreme_selections_with_cap(
    x: &DiscreteRandomFuzzySet,
    alpha: f64,
    cap: usize,
) -> Result<ExtremeSelections<'_>> {
    let mut vertex_lists: Vec<&[Point]> = Vec::with_capacity(x.space().len());
    let mut total: usize = 1;
    for (omega, value) in x.values().iter().enumerate() {
        let cut = value.cut(alpha)?;
        let vs = cut.vertices().ok_or_else(|| {
            Error::unsupported(format!(
                "extreme selections need vertex data; atom {omega} has none"
            ))
        })?;
        total = total.saturating_mul(vs.len());
        if total > cap {
            return Err(Error::ResourceLimit(format!(
                "selection product exceeds the cap of {cap}"
            )));
        }
        vertex_lists.push(vs);
    }
    Ok(ExtremeSelections {
        vertex_lists,
        odometer: vec![0; x.space().len()],
        done: false,
    })
}

/// Odometer-style iterator over vertex choices, one per atom.
pub struct ExtremeSelections<'a> {
    vertex_lists: Vec<&'a [Point]>,
    odometer: Vec<usize>,
    done: bool,
}

impl Iterator for ExtremeSelections<'_> {
    type Item = Selection;

    fn next(&mut self) -> Option<Selection> {
        if self.done {
            return None;
        }
        let points: Vec<Point> = self
            .vertex_lists
            .iter()
            .zip(&self.odometer)
            .map(|(vs, &k)| vs[k].clone())
            .collect();
        // Advance the odometer.
        let mut carried = true;
        for (digit, vs) in self.odometer.iter_mut().zip(&self.vertex_lists) {
            *digit += 1;
            if *digit < vs.len() {
                carried = false;
                break;
            }
            *digit = 0;
        }
        if carried {
            self.done = true;
        }
        Some(Selection { points })
    }
}

/// Witness returned by [`is_singleton_ae`].
#[derive(Debug, Clone)]
pub enum SingletonWitness {
    /// The (essentially unique) selection; returned in the singleton case.
    Selection(Selection),
    /// Two certified selections separated on a positive-weight atom.
    Separated {
        atom: usize,
        separator: Separator,
        low: Selection,
        high: Selection,
    },
    /// A fat cut was found but no vertex data is available to build
    /// witness selections.
    FatCut {
        atom: usize,
        direction: usize,
        width: f64,
    },
}

/// Decides whether `X_α = {x}` μ-almost everywhere, i.e. whether every
/// positive-weight atom's α-cut has grid diameter at most
/// [`SINGLETON_TOL`]. On finite spaces this is equivalent to the Aumann
/// integral of the α-cuts being a singleton.
///
/// The witness is the singleton selection in the true case, or an atom
/// plus two separated selections (found through [`find_separator`]) in the
/// false case.
pub fn is_singleton_ae(
    x: &DiscreteRandomFuzzySet,
    alpha: f64,
) -> Result<(bool, SingletonWitness)> {
    let mut fat: Option<(usize, usize, f64)> = None;
    for (omega, value) in x.values().iter().enumerate() {
        if x.space().weight(omega) <= 0.0 {
            continue; // null atoms are invisible μ-a.e.
        }
        let cut = value.cut(alpha)?;
        let mut worst = (0usize, 0.0f64);
        for i in 0..cut.grid().len() {
            let w = cut.width(i);
            if w > worst.1 {
                worst = (i, w);
            }
        }
        if worst.1 > SINGLETON_TOL {
            fat = Some((omega, worst.0, worst.1));
            break;
        }
    }

    match fat {
        None => {
            let points: Vec<Point> = x
                .values()
                .iter()
                .map(|value| {
                    let cut = value.cut(alpha).expect("validated above");
                    representative_point(cut)
                })
                .collect();
            Ok((true, SingletonWitness::Selection(Selection { points })))
        }
        Some((atom, direction, width)) => {
            let witness = build_separated_witness(x, alpha, atom, direction)?;
            match witness {
                Some(w) => Ok((false, w)),
                None => Ok((
                    false,
                    SingletonWitness::FatCut {
                        atom,
                        direction,
                        width,
                    },
                )),
            }
        }
    }
}

/// A point of a (near-)singleton cut: the vertex when present, otherwise
/// the axis-midpoint reconstruction `c_k = (s(e_k) - s(-e_k)) / 2`.
fn representative_point(cut: &ConvexBody) -> Point {
    if let Some(vs) = cut.vertices() {
        return vs[0].clone();
    }
    let grid = cut.grid();
    (0..grid.dim())
        .map(|k| {
            let plus = cut.support_values()[grid.axis(k, false)];
            let minus = cut.support_values()[grid.axis(k, true)];
            0.5 * (plus - minus)
        })
        .collect()
}

/// Builds two certified selections differing on `atom` along the fat
/// direction, when vertex data permits. They agree on every other atom.
fn build_separated_witness(
    x: &DiscreteRandomFuzzySet,
    alpha: f64,
    atom: usize,
    direction: usize,
) -> Result<Option<SingletonWitness>> {
    let mut base: Vec<Point> = Vec::with_capacity(x.space().len());
    for value in x.values() {
        let cut = value.cut(alpha)?;
        match cut.vertices() {
            Some(vs) => base.push(vs[0].clone()),
            None => return Ok(None),
        }
    }
    let cut = x.value(atom).cut(alpha)?;
    let vs = cut.vertices().expect("checked above");
    let u = cut.grid().direction(direction);
    let hi = vs
        .iter()
        .max_by(|a, b| dot(u, a).partial_cmp(&dot(u, b)).unwrap())
        .unwrap()
        .clone();
    let lo = vs
        .iter()
        .min_by(|a, b| dot(u, a).partial_cmp(&dot(u, b)).unwrap())
        .unwrap()
        .clone();

    let mut high_points = base.clone();
    high_points[atom] = hi;
    let mut low_points = base;
    low_points[atom] = lo;
    let high = Selection::in_cuts(x, alpha, high_points)?;
    let low = Selection::in_cuts(x, alpha, low_points)?;
    let separator = find_separator(&high, &low, x.space())?.ok_or_else(|| {
        Error::invalid("internal: fat cut produced selections that do not separate")
    })?;
    Ok(Some(SingletonWitness::Separated {
        atom,
        separator,
        low,
        high,
    }))
}

/// Per-functional residuals of the Pettis identity
/// `Σ_ω μ(ω) φ(x(ω)) = φ(a)` for a singleton-valued map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PettisReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks the Pettis identity for a singleton-valued random set against
/// the candidate integral `a`, over the supplied functional family.
pub fn pettis_check(
    x: &DiscreteRandomFuzzySet,
    alpha: f64,
    a: &[f64],
    family: &[Point],
) -> Result<PettisReport> {
    let mut points: Vec<Point> = Vec::with_capacity(x.space().len());
    for (omega, value) in x.values().iter().enumerate() {
        let cut = value.cut(alpha)?;
        if cut.grid_diameter() > SINGLETON_TOL {
            return Err(Error::invalid(format!(
                "atom {omega} is not singleton-valued"
            )));
        }
        points.push(representative_point(cut));
    }
    let selection = Selection { points };
    let mut residuals = Vec::with_capacity(family.len());
    let mut max_residual = 0.0f64;
    for phi in family {
        // Σ μ(ω) φ(x(ω)), computed functional-first rather than through the
        // integral, so the identity being checked is not assumed.
        let mut lhs = 0.0;
        for omega in 0..x.space().len() {
            lhs += x.space().weight(omega) * dot(phi, selection.point(omega));
        }
        let r = (lhs - dot(phi, a)).abs();
        residuals.push(r);
        max_residual = max_residual.max(r);
    }
    Ok(PettisReport {
        residuals,
        max_residual,
        tolerance: MEMBERSHIP_TOL,
        pass: max_residual <= MEMBERSHIP_TOL,
    })
}
