//! Fuzzy sets as nested stacks of convex α-cuts, with levelwise arithmetic,
//! the d∞ metric, and the support-function embedding.
//!
//! A fuzzy set here is the computable stand-in for an upper-semicontinuous
//! convex fuzzy subset of R^d: one convex body per level of a finite,
//! strictly decreasing α-grid starting at 1, plus the distinguished `0+`
//! support set that contains every other cut. No interpolation between
//! levels is ever performed; left-continuity in α is represented by the
//! monotone step structure itself.
//!
//! The embedding maps a fuzzy set to the grid restriction of its support
//! surface `(x, α) ↦ s_ν(x, α)`. On the shared grids this map is an exact
//! isometry: `d∞` and the sup-norm of embedded differences are computed
//! from the same support values.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BodyJson, ConvexBody, DirectionGrid, Point, GRID_MATCH_TOL};

/// Strictly decreasing membership levels `1 = α_1 > α_2 > … > α_K > 0`.
///
/// The `0+` support-set slot is implicit: a fuzzy set stores `K + 1` cuts,
/// the last being the support set.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid {
    levels: Vec<f64>,
}

impl AlphaGrid {
    pub fn new(levels: Vec<f64>) -> Result<Arc<AlphaGrid>> {
        if levels.is_empty() {
            return Err(Error::invalid("alpha grid must contain at least level 1"));
        }
        if (levels[0] - 1.0).abs() > GRID_MATCH_TOL {
            return Err(Error::invalid("alpha grid must start at 1"));
        }
        for w in levels.windows(2) {
            if w[1] >= w[0] {
                return Err(Error::invalid("alpha levels must be strictly decreasing"));
            }
        }
        if *levels.last().unwrap() <= 0.0 {
            return Err(Error::invalid("alpha levels must lie in (0, 1]"));
        }
        Ok(Arc::new(AlphaGrid { levels }))
    }

    /// Evenly spaced grid `1, (K-1)/K, …, 1/K`.
    pub fn uniform(count: usize) -> Result<Arc<AlphaGrid>> {
        if count == 0 {
            return Err(Error::invalid("alpha grid must contain at least level 1"));
        }
        AlphaGrid::new(
            (0..count)
                .map(|j| (count - j) as f64 / count as f64)
                .collect(),
        )
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Number of positive levels K (the stored cut count is K + 1).
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Number of cut slots including the `0+` slot.
    pub fn slots(&self) -> usize {
        self.levels.len() + 1
    }

    /// Level value displayed for slot `j`: the α level for `j < K`, `0.0`
    /// for the `0+` slot.
    pub fn slot_alpha(&self, j: usize) -> f64 {
        if j < self.levels.len() {
            self.levels[j]
        } else {
            0.0
        }
    }

    /// Index of an exact grid level. No interpolation: off-grid values are
    /// an error.
    pub fn index_of(&self, alpha: f64) -> Result<usize> {
        self.levels
            .iter()
            .position(|l| (l - alpha).abs() <= GRID_MATCH_TOL)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "alpha {alpha} is not a grid level (no interpolation)"
                ))
            })
    }
}

/// A convex fuzzy set with compact support, stored as its α-cut stack.
#[derive(Debug, Clone)]
pub struct FuzzySet {
    alpha: Arc<AlphaGrid>,
    /// `cuts[j]` is the cut at `alpha.levels()[j]` for `j < K`; `cuts[K]`
    /// is the `0+` support set.
    cuts: Vec<ConvexBody>,
}

/// Validates and assembles a fuzzy set from one cut per level plus the
/// support set (last entry). Rejects non-nested stacks.
pub fn make_fuzzy(alpha: &Arc<AlphaGrid>, cuts: Vec<ConvexBody>) -> Result<FuzzySet> {
    if cuts.len() != alpha.slots() {
        return Err(Error::invalid(format!(
            "expected {} cuts (levels plus the 0+ support set), got {}",
            alpha.slots(),
            cuts.len()
        )));
    }
    let grid_id = cuts[0].grid().id();
    for c in &cuts {
        if c.grid().id() != grid_id {
            return Err(Error::invalid("all cuts must share one direction grid"));
        }
    }
    for j in 0..cuts.len() - 1 {
        if !cuts[j + 1].contains(&cuts[j])? {
            return Err(Error::invalid(format!(
                "cuts are not nested: cut at slot {} is not contained in slot {}",
                j,
                j + 1
            )));
        }
    }
    Ok(FuzzySet {
        alpha: Arc::clone(alpha),
        cuts,
    })
}

impl FuzzySet {
    /// The indicator fuzzy set `1_a`: every cut is the singleton `{a}`.
    pub fn indicator(
        grid: &Arc<DirectionGrid>,
        alpha: &Arc<AlphaGrid>,
        a: Point,
    ) -> Result<FuzzySet> {
        let body = ConvexBody::singleton(grid, a)?;
        Ok(FuzzySet {
            alpha: Arc::clone(alpha),
            cuts: vec![body; alpha.slots()],
        })
    }

    /// A crisp fuzzy set: the same body at every level.
    pub fn crisp(alpha: &Arc<AlphaGrid>, body: ConvexBody) -> FuzzySet {
        FuzzySet {
            alpha: Arc::clone(alpha),
            cuts: vec![body; alpha.slots()],
        }
    }

    pub fn alpha_grid(&self) -> &Arc<AlphaGrid> {
        &self.alpha
    }

    pub fn direction_grid(&self) -> &Arc<DirectionGrid> {
        self.cuts[0].grid()
    }

    pub fn cuts(&self) -> &[ConvexBody] {
        &self.cuts
    }

    /// Cut at an exact grid level (no interpolation).
    pub fn cut(&self, alpha: f64) -> Result<&ConvexBody> {
        Ok(&self.cuts[self.alpha.index_of(alpha)?])
    }

    /// The `0+` support set.
    pub fn support_set(&self) -> &ConvexBody {
        self.cuts.last().unwrap()
    }

    /// Cut by slot index (`0..=K`, slot K being the support set).
    pub fn cut_slot(&self, j: usize) -> Result<&ConvexBody> {
        self.cuts
            .get(j)
            .ok_or_else(|| Error::invalid(format!("cut slot {j} out of range")))
    }

    fn check_same_grids(&self, other: &FuzzySet) -> Result<()> {
        if self.alpha.as_ref() != other.alpha.as_ref() {
            return Err(Error::invalid("alpha grid mismatch"));
        }
        if self.direction_grid().id() != other.direction_grid().id() {
            return Err(Error::invalid("direction grid mismatch"));
        }
        Ok(())
    }

    /// Levelwise Minkowski sum. Nestedness is preserved automatically
    /// (support addition is monotone), so no revalidation is needed.
    pub fn fuzzy_sum(&self, other: &FuzzySet) -> Result<FuzzySet> {
        self.check_same_grids(other)?;
        let cuts = self
            .cuts
            .iter()
            .zip(&other.cuts)
            .map(|(a, b)| a.minkowski_sum(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(FuzzySet {
            alpha: Arc::clone(&self.alpha),
            cuts,
        })
    }

    /// Levelwise scalar multiple (negative factors reflect).
    pub fn fuzzy_scale(&self, lambda: f64) -> FuzzySet {
        FuzzySet {
            alpha: Arc::clone(&self.alpha),
            cuts: self.cuts.iter().map(|c| c.scale(lambda)).collect(),
        }
    }

    /// The d∞ metric: sup over levels (including `0+`) of the grid
    /// Hausdorff distance between cuts. Equals the sup-norm of the embedded
    /// difference exactly, by construction.
    pub fn d_infinity(&self, other: &FuzzySet) -> Result<f64> {
        self.check_same_grids(other)?;
        let mut best = 0.0f64;
        for (a, b) in self.cuts.iter().zip(&other.cuts) {
            best = best.max(a.hausdorff(b)?);
        }
        Ok(best)
    }

    /// Verifies the nestedness invariant on an already-built set (used by
    /// post-hoc checks on arithmetic results).
    pub fn is_nested(&self) -> bool {
        (0..self.cuts.len() - 1)
            .all(|j| self.cuts[j + 1].contains(&self.cuts[j]).unwrap_or(false))
    }

    /// Embeds the fuzzy set as its support surface on the grids.
    pub fn embed(&self) -> SupportSurface {
        let grid = Arc::clone(self.direction_grid());
        let slots = self.alpha.slots();
        let mut values = vec![0.0; grid.len() * slots];
        for (j, cut) in self.cuts.iter().enumerate() {
            for i in 0..grid.len() {
                values[i * slots + j] = cut.support_values()[i];
            }
        }
        SupportSurface {
            grid,
            alpha: Arc::clone(&self.alpha),
            values,
        }
    }

    pub fn to_json(&self) -> FuzzySetJson {
        FuzzySetJson {
            alpha_levels: self.alpha.levels().to_vec(),
            cuts: self.cuts.iter().map(|c| c.to_json()).collect(),
        }
    }

    pub fn from_json(json: &FuzzySetJson, grid: &Arc<DirectionGrid>) -> Result<FuzzySet> {
        let alpha = AlphaGrid::new(json.alpha_levels.clone())?;
        let cuts = json
            .cuts
            .iter()
            .map(|c| ConvexBody::from_json(c, grid))
            .collect::<Result<Vec<_>>>()?;
        make_fuzzy(&alpha, cuts)
    }
}

/// Wire form of a fuzzy set: alpha levels plus one body per slot, the last
/// being the `0+` support set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuzzySetJson {
    pub alpha_levels: Vec<f64>,
    pub cuts: Vec<BodyJson>,
}

/// The embedded image of a fuzzy set: an M×(K+1) table of support values
/// `s(x_i, α_j)`, the last column being the `0+` slot.
#[derive(Debug, Clone)]
pub struct SupportSurface {
    grid: Arc<DirectionGrid>,
    alpha: Arc<AlphaGrid>,
    /// Row-major by direction: `values[i * slots + j]`.
    values: Vec<f64>,
}

impl SupportSurface {
    pub fn zero(grid: &Arc<DirectionGrid>, alpha: &Arc<AlphaGrid>) -> SupportSurface {
        SupportSurface {
            grid: Arc::clone(grid),
            alpha: Arc::clone(alpha),
            values: vec![0.0; grid.len() * alpha.slots()],
        }
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn alpha_grid(&self) -> &Arc<AlphaGrid> {
        &self.alpha
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, direction: usize, slot: usize) -> Result<f64> {
        let slots = self.alpha.slots();
        if direction >= self.grid.len() || slot >= slots {
            return Err(Error::invalid(format!(
                "surface index ({direction}, {slot}) out of range"
            )));
        }
        Ok(self.values[direction * slots + slot])
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &SupportSurface) -> Result<()> {
        if self.grid.id() != other.grid.id() || self.alpha.as_ref() != other.alpha.as_ref() {
            return Err(Error::invalid("surface grid mismatch"));
        }
        Ok(())
    }

    pub fn sub(&self, other: &SupportSurface) -> Result<SupportSurface> {
        self.check_compatible(other)?;
        Ok(SupportSurface {
            grid: Arc::clone(&self.grid),
            alpha: Arc::clone(&self.alpha),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// `r * self + t * other`, entrywise.
    pub fn combine(&self, r: f64, other: &SupportSurface, t: f64) -> Result<SupportSurface> {
        self.check_compatible(other)?;
        Ok(SupportSurface {
            grid: Arc::clone(&self.grid),
            alpha: Arc::clone(&self.alpha),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| r * a + t * b)
                .collect(),
        })
    }

    /// Whether each direction's values are nonincreasing in α, i.e.
    /// nondecreasing along slots (slot order runs from α = 1 down to `0+`).
    /// Surfaces violating this are not embeddings of any fuzzy set.
    pub fn is_alpha_monotone(&self) -> bool {
        let slots = self.alpha.slots();
        (0..self.grid.len()).all(|i| {
            (0..slots - 1).all(|j| {
                self.values[i * slots + j] <= self.values[i * slots + j + 1] + 1e-12
            })
        })
    }

    /// CSV export with columns `direction_index,alpha,value`; the `0+`
    /// slot is written as alpha = 0.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "direction_index,alpha,value")?;
        let slots = self.alpha.slots();
        for i in 0..self.grid.len() {
            for j in 0..slots {
                writeln!(
                    out,
                    "{},{},{}",
                    i,
                    self.alpha.slot_alpha(j),
                    self.values[i * slots + j]
                )?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// One point-evaluation term of a grid functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalTerm {
    pub direction: usize,
    /// Cut slot index (`K` addresses the `0+` slot).
    pub slot: usize,
    pub weight: f64,
}

/// A continuous linear functional on embedded surfaces: a point evaluation
/// `s ↦ s(x_i, α_j)` or a finite weighted sum of such evaluations. This is
/// exactly the dual family the degeneracy argument needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunctional {
    terms: Vec<FunctionalTerm>,
}

impl GridFunctional {
    /// The point evaluation `φ_{x_i, α_j}`.
    pub fn point(direction: usize, slot: usize) -> GridFunctional {
        GridFunctional {
            terms: vec![FunctionalTerm {
                direction,
                slot,
                weight: 1.0,
            }],
        }
    }

    pub fn combination(terms: Vec<FunctionalTerm>) -> Result<GridFunctional> {
        if terms.is_empty() || terms.iter().all(|t| t.weight == 0.0) {
            return Err(Error::invalid(
                "a grid functional needs at least one nonzero weight",
            ));
        }
        Ok(GridFunctional { terms })
    }

    pub fn terms(&self) -> &[FunctionalTerm] {
        &self.terms
    }

    /// `Σ_k |w_k|`; the operator norm bound `|f(s)| <= ‖w‖₁ ‖s‖_sup`.
    pub fn weight_l1(&self) -> f64 {
        self.terms.iter().map(|t| t.weight.abs()).sum()
    }

    /// Applies the functional to an embedded surface.
    pub fn apply(&self, surface: &SupportSurface) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            acc += t.weight * surface.value(t.direction, t.slot)?;
        }
        Ok(acc)
    }

    /// Evaluates directly on a fuzzy set; identical to `apply(&nu.embed())`
    /// without materializing the surface. Used in sampling hot loops.
    pub fn eval_fuzzy(&self, nu: &FuzzySet) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            let cut = nu.cut_slot(t.slot)?;
            acc += t.weight * cut.support(t.direction)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for GridFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.len() == 1 && self.terms[0].weight == 1.0 {
            return write!(
                f,
                "phi(u{},a{})",
                self.terms[0].direction, self.terms[0].slot
            );
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| format!("{:+.3}*phi(u{},a{})", t.weight, t.direction, t.slot))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}
