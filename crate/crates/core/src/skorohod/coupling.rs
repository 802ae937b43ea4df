use rand::Rng;

use super::digitize::{decode, digitize};
use super::metric::MetricSpaceModel;
use super::partition::{build_partition_tree, PartitionTree};
use crate::coupling::{build_plan, CouplingPlan, CouplingSample, CouplingSampler};
use crate::error::{Error, Result};
use crate::measure::{MassFunction, ProcessSequenceSpec};
use crate::rational::Rational;

/// Digit-process coupling pulled back to the metric model.
#[derive(Debug, Clone)]
pub struct SkorohodCoupling {
    pub model: MetricSpaceModel,
    pub laws: ProcessSequenceSpec,
    pub tree: PartitionTree,
    pub plan: CouplingPlan,
}

/// One draw of `(N, X, X_1, ..., X_{M+1})` as model point indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkorohodSample {
    pub digits: CouplingSample,
    pub x_hat: usize,
    pub x_hat_n: Vec<usize>,
}

impl SkorohodSample {
    pub fn index(&self) -> usize {
        self.digits.index
    }
}

impl SkorohodCoupling {
    /// Bound `1/k_n` for `k_n >= 1`; `None` (no constraint) when `k_n = 0`.
    pub fn distance_bound(&self, n: usize) -> Option<Rational> {
        let k = self.plan.window(n);
        (k > 0).then(|| Rational::new(1.into(), (k as i64).into()))
    }

    /// Indices `n >= N` with `d(X_n, X) >= 1/k_n`.
    pub fn distance_violations(&self, sample: &SkorohodSample) -> Vec<usize> {
        (sample.index()..=sample.x_hat_n.len())
            .filter(|&n| match self.distance_bound(n) {
                Some(bound) => *self.model.dist(sample.x_hat_n[n - 1], sample.x_hat) >= bound,
                None => false,
            })
            .collect()
    }

    /// Pushes a digit-space law back to the model's points.
    pub fn decode_law(&self, digit_law: &MassFunction) -> Result<MassFunction> {
        let space = self.model.point_space().clone();
        digit_law.pushforward(space, |p| crate::measure::Point(vec![decode(p) as u32]))
    }

    pub fn sampler(&self) -> Result<SkorohodSampler<'_>> {
        Ok(SkorohodSampler {
            inner: CouplingSampler::new(&self.plan)?,
        })
    }
}

pub struct SkorohodSampler<'a> {
    inner: CouplingSampler<'a>,
}

impl SkorohodSampler<'_> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SkorohodSample> {
        let digits = self.inner.sample(rng)?;
        Ok(SkorohodSample {
            x_hat: decode(&digits.z_hat),
            x_hat_n: digits.z_hat_n.iter().map(decode).collect(),
            digits,
        })
    }
}

/// Partition tree for the limit, digitization, and the digit-process plan.
pub fn build_skorohod_coupling(
    model: &MetricSpaceModel,
    laws: &ProcessSequenceSpec,
    depth: usize,
) -> Result<SkorohodCoupling> {
    if laws.space() != model.point_space() {
        return Err(Error::SpaceMismatch("laws are not on the model's points".into()));
    }
    let tree = build_partition_tree(model, laws.limit(), depth)?;
    let digits = digitize(model, laws, &tree)?;
    let plan = build_plan(&digits)?;
    Ok(SkorohodCoupling {
        model: model.clone(),
        laws: laws.clone(),
        tree,
        plan,
    })
}

/// Portmanteau check on the tree's continuity cells: returns the first index
/// from which every member agrees with the limit on every cell. Under the
/// eventually-equal tail rule this always exists (at worst `M + 1`), so a
/// failing sequence cannot be expressed.
pub fn check_weak_convergence(laws: &ProcessSequenceSpec, tree: &PartitionTree) -> Option<usize> {
    let cell_mass = |law: &MassFunction, members: &[usize]| -> Rational {
        members
            .iter()
            .fold(Rational::from_integer(0.into()), |acc, &i| {
                acc + law.mass(&crate::measure::Point(vec![i as u32]))
            })
    };
    let agrees = |n: usize| {
        tree.levels.iter().flatten().all(|cell| {
            cell_mass(laws.law(n), &cell.members) == cell_mass(laws.limit(), &cell.members)
        })
    };
    let mut first = laws.horizon() + 1;
    while first > 1 && agrees(first - 1) {
        first -= 1;
    }
    Some(first)
}
