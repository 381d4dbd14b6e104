//! Wiener paths, Gaussian fuzzy random variables, the degenerate fuzzy
//! set-valued Brownian motion, and its transformations.
//!
//! The fuzzy Brownian motion is represented through its driving Wiener
//! process: the value at time `t` is the indicator fuzzy set of the path
//! point. Transformations (shift, rescaling, time inversion) act on the
//! driver and translation acts levelwise on the fuzzy values; all of them
//! are deterministic reindexings of sampled grids, never stochastic
//! interpolation.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuzzy::{AlphaGrid, FuzzySet, FuzzySetJson};
use crate::geometry::{DirectionGrid, Point, GRID_MATCH_TOL};
use crate::rng::task_rng;

/// Default simulation horizon: `0, 0.25, …, 2`.
pub fn default_times() -> Vec<f64> {
    (0..=8).map(|k| k as f64 * 0.25).collect()
}

/// A sampled Wiener path: strictly ascending times starting at 0, one
/// point per time, starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    times: Vec<f64>,
    points: Vec<Point>,
}

fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("at least one time is required"));
    }
    if times[0] != 0.0 {
        return Err(Error::invalid("the first time must be 0"));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::invalid("times must be strictly ascending"));
        }
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("times must be finite"));
    }
    Ok(())
}

/// Samples a Wiener path with independent Gaussian increments,
/// `b(t) - b(s) ~ N(0, sigma2 (t-s) I)`, deterministically from the seed.
pub fn sample_wiener_path(
    times: &[f64],
    dim: usize,
    sigma2: f64,
    seed: u64,
) -> Result<WienerPath> {
    let mut rng = task_rng(seed);
    sample_wiener_path_with(times, dim, sigma2, &mut rng)
}

/// As [`sample_wiener_path`] but drawing from a caller-managed stream.
pub fn sample_wiener_path_with<R: Rng>(
    times: &[f64],
    dim: usize,
    sigma2: f64,
    rng: &mut R,
) -> Result<WienerPath> {
    validate_times(times)?;
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::invalid("covariance scale must be positive"));
    }
    let mut points: Vec<Point> = Vec::with_capacity(times.len());
    points.push(vec![0.0; dim]);
    for w in times.windows(2) {
        let sd = (sigma2 * (w[1] - w[0])).sqrt();
        let prev = points.last().unwrap();
        let next: Point = prev
            .iter()
            .map(|&x| x + sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        points.push(next);
    }
    Ok(WienerPath { times: times.to_vec(), points })
}

impl WienerPath {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Index of a sampled time, within [`GRID_MATCH_TOL`].
    pub fn index_of_time(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&u| (u - t).abs() <= GRID_MATCH_TOL)
            .ok_or_else(|| Error::invalid(format!("time {t} is not on the sampled grid")))
    }

    pub fn point_at(&self, t: f64) -> Result<&Point> {
        Ok(&self.points[self.index_of_time(t)?])
    }

    /// CSV export with columns `time,x0,…,x{d-1}`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.dim()).map(|k| format!("x{k}")).collect();
        writeln!(out, "time,{}", header.join(","))?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let coords: Vec<String> = p.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{},{}", t, coords.join(","))?;
        }
        Ok(())
    }
}

/// Lifts a Wiener path to the degenerate fuzzy process `t ↦ 1_{b_t}`.
pub fn fuzzy_brownian(
    path: &WienerPath,
    grid: &Arc<DirectionGrid>,
    alpha: &Arc<AlphaGrid>,
) -> Result<FuzzyProcessPath> {
    let values = path
        .points
        .iter()
        .map(|p| FuzzySet::indicator(grid, alpha, p.clone()))
        .collect::<Result<Vec<_>>>()?;
    FuzzyProcessPath::new(path.times.clone(), values)
}

/// A sampled fuzzy set-valued process path.
#[derive(Debug, Clone)]
pub struct FuzzyProcessPath {
    times: Vec<f64>,
    values: Vec<FuzzySet>,
}

impl FuzzyProcessPath {
    pub fn new(times: Vec<f64>, values: Vec<FuzzySet>) -> Result<FuzzyProcessPath> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::invalid("one fuzzy value per time is required"));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::invalid("times must be strictly ascending"));
            }
        }
        let first = &values[0];
        for v in values.iter().skip(1) {
            if v.alpha_grid().as_ref() != first.alpha_grid().as_ref()
                || v.direction_grid().id() != first.direction_grid().id()
            {
                return Err(Error::invalid("all values must share grids"));
            }
        }
        Ok(FuzzyProcessPath { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[FuzzySet] {
        &self.values
    }

    pub fn index_of_time(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|&u| (u - t).abs() <= GRID_MATCH_TOL)
            .ok_or_else(|| Error::invalid(format!("time {t} is not on the sampled grid")))
    }

    pub fn value_at(&self, t: f64) -> Result<&FuzzySet> {
        Ok(&self.values[self.index_of_time(t)?])
    }

    pub fn to_json(&self) -> FuzzyProcessPathJson {
        FuzzyProcessPathJson {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v.to_json()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuzzyProcessPathJson {
    pub times: Vec<f64>,
    pub values: Vec<FuzzySetJson>,
}

/// Which reciprocal the time-inversion transform uses for the inner time.
///
/// `Reciprocal` is the classical `t ↦ t · B_{1/t}`; `ReciprocalSqrt` is the
/// `t ↦ t · B_{1/√t}` variant, kept selectable so the verification suite
/// can measure which one preserves the Brownian covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionVariant {
    Reciprocal,
    ReciprocalSqrt,
}

impl InversionVariant {
    pub fn inner_time(self, t: f64) -> f64 {
        match self {
            InversionVariant::Reciprocal => 1.0 / t,
            InversionVariant::ReciprocalSqrt => 1.0 / t.sqrt(),
        }
    }
}

/// Path-level process transformations: deterministic reindexings of an
/// already-sampled fuzzy path.
#[derive(Debug, Clone)]
pub enum Transform {
    /// `value(t) := B_{t+t0}`; output keeps the times `t` with `t + t0` on
    /// the sampled grid. (The shift *sampler* uses the increment form
    /// `1_{b_{t+t0} - b_{t0}}` instead, which is the distribution-preserving
    /// version; see [`ProcessSampler`].)
    Shift(f64),
    /// `value(t) := (1/√λ) B_{λt}` for exact grid hits.
    Rescale(f64),
    /// `value(t) := ν ⊕ B_t`.
    Translate(FuzzySet),
    /// `value(t) := t · B_{g(t)}` with `g` per [`InversionVariant`];
    /// `value(0) := 1_0`.
    TimeInversion(InversionVariant),
}

/// Applies a transform to a sampled fuzzy path by reindexing. Times whose
/// reindexed counterpart is absent from the sampled grid are dropped; an
/// empty result is an error.
pub fn transform_process(path: &FuzzyProcessPath, transform: &Transform) -> Result<FuzzyProcessPath> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    match transform {
        Transform::Shift(t0) => {
            if *t0 < 0.0 {
                return Err(Error::invalid("shift offset must be nonnegative"));
            }
            for &t in &path.times {
                if let Ok(idx) = path.index_of_time(t + t0) {
                    times.push(t);
                    values.push(path.values[idx].clone());
                }
            }
        }
        Transform::Rescale(lambda) => {
            if !(*lambda > 0.0) {
                return Err(Error::invalid("rescale factor must be positive"));
            }
            let inv_sqrt = 1.0 / lambda.sqrt();
            for &t in &path.times {
                if let Ok(idx) = path.index_of_time(lambda * t) {
                    times.push(t);
                    values.push(path.values[idx].fuzzy_scale(inv_sqrt));
                }
            }
        }
        Transform::Translate(nu) => {
            for (&t, v) in path.times.iter().zip(&path.values) {
                times.push(t);
                values.push(nu.fuzzy_sum(v)?);
            }
        }
        Transform::TimeInversion(variant) => {
            for &t in &path.times {
                if t == 0.0 {
                    let grid = path.values[0].direction_grid();
                    let alpha = path.values[0].alpha_grid();
                    times.push(t);
                    values.push(FuzzySet::indicator(
                        grid,
                        alpha,
                        vec![0.0; grid.dim()],
                    )?);
                } else if let Ok(idx) = path.index_of_time(variant.inner_time(t)) {
                    times.push(t);
                    values.push(path.values[idx].fuzzy_scale(t));
                }
            }
        }
    }
    if times.is_empty() {
        return Err(Error::invalid(
            "no requested time lands on the sampled grid",
        ));
    }
    FuzzyProcessPath::new(times, values)
}

/// The law of a Gaussian fuzzy random variable: `X = mean ⊕ 1_ξ` with
/// `ξ ~ N(0, covariance)`.
#[derive(Debug, Clone)]
pub struct GaussianFuzzyLaw {
    mean: FuzzySet,
    covariance: DMatrix<f64>,
    /// Eigendecomposition factor `V diag(sqrt λ)`, precomputed for sampling.
    factor: DMatrix<f64>,
}

impl GaussianFuzzyLaw {
    pub fn new(mean: FuzzySet, covariance: DMatrix<f64>) -> Result<GaussianFuzzyLaw> {
        let d = mean.direction_grid().dim();
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::invalid("covariance must be d x d"));
        }
        for i in 0..d {
            for j in 0..d {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > 1e-12 {
                    return Err(Error::invalid("covariance must be symmetric"));
                }
            }
        }
        let eigen = covariance.clone().symmetric_eigen();
        if eigen.eigenvalues.iter().any(|&l| l < -1e-10) {
            return Err(Error::invalid(
                "covariance must be positive semidefinite",
            ));
        }
        let sqrt = DMatrix::from_diagonal(&DVector::from_iterator(
            d,
            eigen.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()),
        ));
        let factor = &eigen.eigenvectors * sqrt;
        Ok(GaussianFuzzyLaw {
            mean,
            covariance,
            factor,
        })
    }

    pub fn mean(&self) -> &FuzzySet {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    fn draw_offset<R: Rng>(&self, rng: &mut R) -> Point {
        let d = self.factor.nrows();
        let z = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        (&self.factor * z).iter().copied().collect()
    }
}

/// Draws one Gaussian fuzzy random variable: `mean ⊕ 1_ξ`. A zero
/// covariance returns the mean exactly.
pub fn sample_gaussian_frv(law: &GaussianFuzzyLaw, seed: u64) -> Result<FuzzySet> {
    let mut rng = task_rng(seed);
    sample_gaussian_frv_with(law, &mut rng)
}

pub fn sample_gaussian_frv_with<R: Rng>(law: &GaussianFuzzyLaw, rng: &mut R) -> Result<FuzzySet> {
    let xi = law.draw_offset(rng);
    let grid = law.mean.direction_grid();
    let alpha = law.mean.alpha_grid();
    let shift = FuzzySet::indicator(grid, alpha, xi)?;
    law.mean.fuzzy_sum(&shift)
}

/// What a process sampler generates.
#[derive(Debug, Clone)]
pub enum SamplerKind {
    /// The fuzzy set-valued Brownian motion `1_{b_t}`.
    Brownian,
    /// Increment-recentred shift: `1_{b_{t+t0} - b_{t0}}`, distributionally
    /// a fuzzy Brownian motion again.
    Shift { t0: f64 },
    /// `(1/√λ) B_{λt} = 1_{b_{λt}/√λ}`.
    Rescale { lambda: f64 },
    /// `ν ⊕ 1_{b_t}`; the degenerate case `ν = 1_0` recovers the Brownian
    /// motion, any other ν breaks the zero-mean property.
    Translate { nu: FuzzySet },
    /// `t · B_{g(t)}` with `g(0)` handled as the constant `1_0`.
    TimeInversion { variant: InversionVariant },
    /// The deterministic constant process `1_0` (consumes no randomness).
    DegenerateZero,
}

/// A factory of independent fuzzy process paths over a fixed time grid.
///
/// Each Monte Carlo replicate receives its own RNG stream derived from
/// `(base_seed, worker, replicate)`, so results are reproducible for a
/// fixed seed and worker layout and no state is shared across workers.
#[derive(Debug, Clone)]
pub struct ProcessSampler {
    times: Vec<f64>,
    driver_times: Vec<f64>,
    dim: usize,
    sigma2: f64,
    grid: Arc<DirectionGrid>,
    alpha: Arc<AlphaGrid>,
    kind: SamplerKind,
}

impl ProcessSampler {
    pub fn new(
        times: Vec<f64>,
        dim: usize,
        sigma2: f64,
        grid: &Arc<DirectionGrid>,
        alpha: &Arc<AlphaGrid>,
        kind: SamplerKind,
    ) -> Result<ProcessSampler> {
        if times.is_empty() {
            return Err(Error::invalid("at least one time is required"));
        }
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::invalid("times must be strictly ascending"));
            }
        }
        if times[0] < 0.0 {
            return Err(Error::invalid("times must be nonnegative"));
        }
        if grid.dim() != dim {
            return Err(Error::invalid("direction grid dimension mismatch"));
        }
        if !(sigma2 > 0.0) {
            return Err(Error::invalid("covariance scale must be positive"));
        }
        match &kind {
            SamplerKind::Shift { t0 } if *t0 < 0.0 => {
                return Err(Error::invalid("shift offset must be nonnegative"));
            }
            SamplerKind::Rescale { lambda } if !(*lambda > 0.0) => {
                return Err(Error::invalid("rescale factor must be positive"));
            }
            SamplerKind::Translate { nu } => {
                if nu.direction_grid().id() != grid.id()
                    || nu.alpha_grid().as_ref() != alpha.as_ref()
                {
                    return Err(Error::invalid("translate value must share grids"));
                }
            }
            _ => {}
        }

        let mut driver: Vec<f64> = vec![0.0];
        match &kind {
            SamplerKind::Brownian | SamplerKind::Translate { .. } => {
                driver.extend(times.iter().copied());
            }
            SamplerKind::Shift { t0 } => {
                driver.push(*t0);
                driver.extend(times.iter().map(|&t| t + t0));
            }
            SamplerKind::Rescale { lambda } => {
                driver.extend(times.iter().map(|&t| lambda * t));
            }
            SamplerKind::TimeInversion { variant } => {
                driver.extend(times.iter().filter(|&&t| t > 0.0).map(|&t| variant.inner_time(t)));
            }
            SamplerKind::DegenerateZero => {}
        }
        driver.sort_by(|a, b| a.partial_cmp(b).unwrap());
        driver.dedup_by(|a, b| (*a - *b).abs() <= GRID_MATCH_TOL);

        Ok(ProcessSampler {
            times,
            driver_times: driver,
            dim,
            sigma2,
            grid: Arc::clone(grid),
            alpha: Arc::clone(alpha),
            kind,
        })
    }

    /// Standard fuzzy Brownian sampler with the given grids.
    pub fn brownian(
        times: Vec<f64>,
        dim: usize,
        sigma2: f64,
        grid: &Arc<DirectionGrid>,
        alpha: &Arc<AlphaGrid>,
    ) -> Result<ProcessSampler> {
        Self::new(times, dim, sigma2, grid, alpha, SamplerKind::Brownian)
    }

    /// Sampler for `ν ⊕ B_t`. With `ν = 1_0` this is distributionally a
    /// fuzzy Brownian motion; with any other ν the mean functional at a
    /// direction/level where `s_ν` is nonzero stays away from zero, which
    /// is exactly the failure the verification suite detects.
    pub fn counterexample(
        times: Vec<f64>,
        sigma2: f64,
        nu: FuzzySet,
    ) -> Result<ProcessSampler> {
        let grid = Arc::clone(nu.direction_grid());
        let alpha = Arc::clone(nu.alpha_grid());
        let dim = grid.dim();
        Self::new(
            times,
            dim,
            sigma2,
            &grid,
            &alpha,
            SamplerKind::Translate { nu },
        )
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn alpha(&self) -> &Arc<AlphaGrid> {
        &self.alpha
    }

    pub fn kind(&self) -> &SamplerKind {
        &self.kind
    }

    /// Draws one independent path on the sampler's time grid.
    pub fn sample_path<R: Rng>(&self, rng: &mut R) -> Result<FuzzyProcessPath> {
        Ok(self.sample_path_with_driver(rng)?.1)
    }

    /// Draws one path and also returns the driving Wiener path it was
    /// built from (a single-point path for the constant sampler).
    pub fn sample_path_with_driver<R: Rng>(
        &self,
        rng: &mut R,
    ) -> Result<(WienerPath, FuzzyProcessPath)> {
        if matches!(self.kind, SamplerKind::DegenerateZero) {
            let zero = FuzzySet::indicator(&self.grid, &self.alpha, vec![0.0; self.dim])?;
            let path =
                FuzzyProcessPath::new(self.times.clone(), vec![zero; self.times.len()])?;
            let driver = WienerPath {
                times: vec![0.0],
                points: vec![vec![0.0; self.dim]],
            };
            return Ok((driver, path));
        }
        let driver = sample_wiener_path_with(&self.driver_times, self.dim, self.sigma2, rng)?;
        let mut values: Vec<FuzzySet> = Vec::with_capacity(self.times.len());
        for &t in &self.times {
            let value = match &self.kind {
                SamplerKind::Brownian => {
                    FuzzySet::indicator(&self.grid, &self.alpha, driver.point_at(t)?.clone())?
                }
                SamplerKind::Translate { nu } => {
                    let ind =
                        FuzzySet::indicator(&self.grid, &self.alpha, driver.point_at(t)?.clone())?;
                    nu.fuzzy_sum(&ind)?
                }
                SamplerKind::Shift { t0 } => {
                    let at = driver.point_at(t + t0)?;
                    let base = driver.point_at(*t0)?;
                    let p: Point = at.iter().zip(base).map(|(a, b)| a - b).collect();
                    FuzzySet::indicator(&self.grid, &self.alpha, p)?
                }
                SamplerKind::Rescale { lambda } => {
                    let inv_sqrt = 1.0 / lambda.sqrt();
                    let p: Point = driver
                        .point_at(lambda * t)?
                        .iter()
                        .map(|c| inv_sqrt * c)
                        .collect();
                    FuzzySet::indicator(&self.grid, &self.alpha, p)?
                }
                SamplerKind::TimeInversion { variant } => {
                    if t == 0.0 {
                        FuzzySet::indicator(&self.grid, &self.alpha, vec![0.0; self.dim])?
                    } else {
                        let p: Point = driver
                            .point_at(variant.inner_time(t))?
                            .iter()
                            .map(|c| t * c)
                            .collect();
                        FuzzySet::indicator(&self.grid, &self.alpha, p)?
                    }
                }
                SamplerKind::DegenerateZero => unreachable!("handled above"),
            };
            values.push(value);
        }
        let path = FuzzyProcessPath::new(self.times.clone(), values)?;
        Ok((driver, path))
    }

    /// Convenience wrapper drawing from a fresh stream for `seed`.
    pub fn sample_path_seeded(&self, seed: u64) -> Result<FuzzyProcessPath> {
        let mut rng = task_rng(seed);
        self.sample_path(&mut rng)
    }
}
