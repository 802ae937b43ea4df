//! Random small instances for property tests and acceptance runs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::measure::{Alphabet, MassFunction, ProcessSequenceSpec, ProductSpace, TailRule};
use crate::rational::{self, Rational};
use crate::skorohod::MetricSpaceModel;

/// Size limits for generated specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecBounds {
    pub max_alphabet: usize,
    pub max_coordinates: usize,
    pub max_horizon: usize,
    /// Point weights are drawn from `0..=max_weight` and normalized, so
    /// every denominator divides a sum of at most that many per point.
    pub max_weight: u32,
}

impl Default for SpecBounds {
    fn default() -> Self {
        Self {
            max_alphabet: 3,
            max_coordinates: 3,
            max_horizon: 4,
            max_weight: 4,
        }
    }
}

/// Normalized integer weights on `points`, redrawn while all are zero.
fn random_weights<R: Rng + ?Sized, T: Clone>(rng: &mut R, points: &[T], max_weight: u32) -> Vec<(T, Rational)> {
    loop {
        let weights: Vec<u32> = points.iter().map(|_| rng.gen_range(0..=max_weight)).collect();
        let total: u32 = weights.iter().sum();
        if total == 0 {
            continue;
        }
        return points
            .iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0)
            .map(|(p, w)| (p.clone(), rational::ratio(w as i64, total as i64)))
            .collect();
    }
}

/// Random probability on every point of `space`.
pub fn random_pmf<R: Rng + ?Sized>(
    rng: &mut R,
    space: &std::sync::Arc<ProductSpace>,
    max_weight: u32,
) -> Result<MassFunction> {
    let points: Vec<_> = space.points().collect();
    MassFunction::new(space.clone(), random_weights(rng, &points, max_weight))
}

/// `(1 - t) q + t r` for a random `r` and `t` in `{1/2, 1/4, 1/8}`; these
/// members sit close to the limit, so schedules get past window zero.
fn perturb<R: Rng + ?Sized>(rng: &mut R, q: &MassFunction, max_weight: u32) -> Result<MassFunction> {
    let t = rational::pow2_neg(rng.gen_range(1..=3));
    let r = random_pmf(rng, q.space(), max_weight)?;
    q.scale(&(rational::int(1) - &t))?.checked_add(&r.scale(&t)?)
}

fn random_members<R: Rng + ?Sized>(
    rng: &mut R,
    q: &MassFunction,
    horizon: usize,
    max_weight: u32,
) -> Result<Vec<MassFunction>> {
    (0..horizon)
        .map(|_| match rng.gen_range(0..3) {
            0 => random_pmf(rng, q.space(), max_weight),
            1 => perturb(rng, q, max_weight),
            _ => Ok(q.clone()),
        })
        .collect()
}

/// Random spec within `bounds`, mixing independent members, members near
/// the limit, and members equal to it.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, bounds: &SpecBounds) -> Result<ProcessSequenceSpec> {
    let coordinates = rng.gen_range(1..=bounds.max_coordinates);
    let alphabets = (0..coordinates)
        .map(|c| {
            let size = rng.gen_range(1..=bounds.max_alphabet);
            Alphabet::new((0..size).map(|s| format!("{}{s}", (b'a' + c as u8) as char)))
        })
        .collect::<Result<Vec<_>>>()?;
    let space = ProductSpace::new(alphabets);
    let q = random_pmf(rng, &space, bounds.max_weight)?;
    let horizon = rng.gen_range(1..=bounds.max_horizon);
    let members = random_members(rng, &q, horizon, bounds.max_weight)?;
    ProcessSequenceSpec::new(space, members, q, TailRule::EventuallyEqual(horizon))
}

/// Size limits for generated metric models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelBounds {
    pub max_points: usize,
    pub max_dimension: usize,
    /// Coordinates are `a / 4` with `0 <= a <= grid`.
    pub grid: u32,
    pub max_horizon: usize,
    pub max_weight: u32,
}

impl Default for ModelBounds {
    fn default() -> Self {
        Self {
            max_points: 6,
            max_dimension: 2,
            grid: 8,
            max_horizon: 4,
            max_weight: 4,
        }
    }
}

/// Random max-metric model with distinct quarter-grid points and atomic
/// laws on it. The separable support contains the limit's support and a
/// random selection of the other points.
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    bounds: &ModelBounds,
) -> Result<(MetricSpaceModel, ProcessSequenceSpec)> {
    let count = rng.gen_range(1..=bounds.max_points);
    let dim = rng.gen_range(1..=bounds.max_dimension);
    let mut grid: Vec<Vec<u32>> = Vec::new();
    while grid.len() < count {
        let candidate: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=bounds.grid)).collect();
        if !grid.contains(&candidate) {
            grid.push(candidate);
        }
    }
    let labels: Vec<String> = (0..count).map(|i| format!("x{i}")).collect();
    let coords = grid
        .iter()
        .map(|c| c.iter().map(|&a| rational::ratio(a as i64, 4)).collect())
        .collect();
    let indices: Vec<usize> = (0..count).collect();
    let space = ProductSpace::new(vec![Alphabet::new(labels.clone())?]);
    let atom = |i: usize| crate::measure::Point(vec![i as u32]);

    let limit_entries = random_weights(rng, &indices, bounds.max_weight);
    let mut support = vec![false; count];
    for (i, _) in &limit_entries {
        support[*i] = true;
    }
    let mut extras = indices.clone();
    extras.shuffle(rng);
    for &i in extras.iter().take(rng.gen_range(0..=count)) {
        support[i] = true;
    }
    let model = MetricSpaceModel::from_coords(labels, coords, Some(support))?;

    let q = MassFunction::new(space.clone(), limit_entries.into_iter().map(|(i, m)| (atom(i), m)))?;
    let horizon = rng.gen_range(1..=bounds.max_horizon);
    let members = random_members(rng, &q, horizon, bounds.max_weight)?;
    let laws = ProcessSequenceSpec::new(space, members, q, TailRule::EventuallyEqual(horizon))?;
    Ok((model, laws))
}
