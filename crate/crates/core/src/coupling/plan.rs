use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::ladder::{build_ladder, MeasureLadder};
use super::schedule::{build_schedule, WindowSchedule};
use crate::error::{Error, Result};
use crate::measure::{Alphabet, MassFunction, Point, ProcessSequenceSpec, ProductSpace};
use crate::rational::Rational;

/// One row of an extension kernel: a law on the full space whose window
/// marginal is the point mass on the row's prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelRow {
    pub row: MassFunction,
    /// `false` for fallback rows on prefixes that `P_n` never produces.
    pub used: bool,
}

pub type ExtensionKernel = BTreeMap<Point, KernelRow>;

/// Fully materialized coupling.
///
/// Index `n` runs over `1..=M+1`; vector slot `n - 1` holds the component for
/// index `n`. The index `N` is capped at `M + 1` because `mu_{M+1} = P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingPlan {
    pub spec: ProcessSequenceSpec,
    pub schedule: WindowSchedule,
    pub ladder: MeasureLadder,
    /// Law of `N` on the index alphabet `"1"..="M+1"`.
    pub law_of_n: MassFunction,
    /// Law of `V_n` on the full space.
    pub v_laws: Vec<MassFunction>,
    /// Law of `W_n` on the `k_n`-window space.
    pub w_laws: Vec<MassFunction>,
    /// Conditional law of `Z_n` given its `k_n`-prefix.
    pub extension_kernels: Vec<ExtensionKernel>,
}

impl CouplingPlan {
    pub fn horizon(&self) -> usize {
        self.spec.horizon()
    }

    /// Number of coupled indices, `M + 1`.
    pub fn len(&self) -> usize {
        self.schedule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schedule.is_empty()
    }

    pub fn window(&self, n: usize) -> usize {
        self.schedule.window(n)
    }

    /// `P(N = n)`.
    pub fn prob_index_eq(&self, n: usize) -> Rational {
        self.law_of_n.mass(&Point(vec![(n - 1) as u32]))
    }

    /// `P(N > n)`.
    pub fn prob_index_gt(&self, n: usize) -> Rational {
        self.law_of_n
            .iter()
            .filter(|(p, _)| p.coords()[0] as usize >= n)
            .fold(Rational::zero(), |acc, (_, m)| acc + m)
    }
}

pub fn index_space(count: usize) -> Result<Arc<ProductSpace>> {
    Ok(ProductSpace::new(vec![Alphabet::numbered(count)?]))
}

/// Conditional laws of `law` given each of its `k`-prefixes with positive mass.
pub(crate) fn conditional_rows(law: &MassFunction, k: usize) -> Result<BTreeMap<Point, MassFunction>> {
    let marginal = law.window_marginal(k)?;
    let mut grouped: BTreeMap<Point, Vec<(Point, Rational)>> = BTreeMap::new();
    for (z, m) in law.iter() {
        let prefix = z.prefix(k);
        let denom = marginal.mass(&prefix);
        grouped.entry(prefix).or_default().push((z.clone(), m / denom));
    }
    grouped
        .into_iter()
        .map(|(prefix, entries)| Ok((prefix, MassFunction::new(law.space().clone(), entries)?)))
        .collect()
}

pub fn build_plan(spec: &ProcessSequenceSpec) -> Result<CouplingPlan> {
    let schedule = build_schedule(spec)?;
    let ladder = build_ladder(spec, &schedule)?;
    let last = schedule.len();
    let q = spec.limit();

    // P(N <= n) = |mu_n|; the last cumulative mass is exactly one.
    let cumulative: Vec<Rational> = ladder.mu.iter().map(MassFunction::total).collect();
    if !cumulative[last - 1].is_one() {
        return Err(Error::Internal("top of the mu ladder is not the limit law".into()));
    }
    let mut index_masses = Vec::with_capacity(last);
    let mut previous = Rational::zero();
    for (i, c) in cumulative.iter().enumerate() {
        index_masses.push((Point(vec![i as u32]), c - &previous));
        previous = c.clone();
    }
    let law_of_n = MassFunction::new(index_space(last)?, index_masses)?;

    let mut v_laws = Vec::with_capacity(last);
    let mut w_laws = Vec::with_capacity(last);
    let mut extension_kernels = Vec::with_capacity(last);
    for n in 1..=last {
        let k = schedule.window(n);
        let p_n = spec.law(n);

        let p_eq = law_of_n.mass(&Point(vec![(n - 1) as u32]));
        let v = if p_eq.is_zero() {
            q.clone()
        } else {
            ladder.mu_at(n).checked_sub(&ladder.mu_at(n - 1))?.scale(&(Rational::one() / &p_eq))?
        };
        v_laws.push(v);

        let p_gt = Rational::one() - &cumulative[n - 1];
        let p_window = p_n.window_marginal(k)?;
        let w = if p_gt.is_zero() {
            p_window.clone()
        } else {
            let mu_window = ladder.mu_at(n).window_marginal(k)?;
            p_window.checked_sub(&mu_window).map_err(|e| {
                Error::Internal(format!("mu_{n} window marginal is not dominated by P_{n}: {e}"))
            })?
            .scale(&(Rational::one() / &p_gt))?
        };
        w.require_probability(&format!("W_{n}"))
            .map_err(|e| Error::Internal(e.to_string()))?;
        w_laws.push(w);

        let mut kernel: ExtensionKernel = conditional_rows(p_n, k)?
            .into_iter()
            .map(|(prefix, row)| (prefix, KernelRow { row, used: true }))
            .collect();
        for (prefix, row) in conditional_rows(q, k)? {
            kernel.entry(prefix).or_insert(KernelRow { row, used: false });
        }
        extension_kernels.push(kernel);
    }

    Ok(CouplingPlan {
        spec: spec.clone(),
        schedule,
        ladder,
        law_of_n,
        v_laws,
        w_laws,
        extension_kernels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::TailRule;
    use crate::rational::ratio;

    fn worked_example() -> CouplingPlan {
        let line = ProductSpace::from_labels(&[&["a", "b"]]).unwrap();
        let p1 = MassFunction::from_labels(line.clone(), &[("a", ratio(1, 4)), ("b", ratio(3, 4))]).unwrap();
        let q = MassFunction::uniform(line.clone()).unwrap();
        let spec = ProcessSequenceSpec::new(line, vec![p1], q, TailRule::EventuallyEqual(1)).unwrap();
        build_plan(&spec).unwrap()
    }

    #[test]
    fn worked_example_components() {
        let plan = worked_example();
        let a = Point(vec![0]);
        let b = Point(vec![1]);
        assert_eq!(plan.prob_index_eq(1), ratio(3, 4));
        assert_eq!(plan.prob_index_eq(2), ratio(1, 4));
        assert_eq!(plan.prob_index_gt(1), ratio(1, 4));
        assert_eq!(plan.prob_index_gt(2), ratio(0, 1));
        assert_eq!(plan.v_laws[0].mass(&a), ratio(1, 3));
        assert_eq!(plan.v_laws[0].mass(&b), ratio(2, 3));
        assert_eq!(plan.v_laws[1].mass(&a), ratio(1, 1));
        // W_1 = (P_1 - mu_1) / (1/4) = point mass on b.
        assert_eq!(plan.w_laws[0].mass(&b), ratio(1, 1));
        assert_eq!(plan.w_laws[1], *plan.spec.limit());
    }

    #[test]
    fn mixture_reconstructs_limit() {
        let plan = worked_example();
        let mut acc = MassFunction::zero(plan.spec.space().clone());
        for n in 1..=plan.len() {
            acc = acc.checked_add(&plan.v_laws[n - 1].scale(&plan.prob_index_eq(n)).unwrap()).unwrap();
        }
        assert_eq!(acc, *plan.spec.limit());
    }

    #[test]
    fn constant_spec_plan() {
        let space = ProductSpace::from_labels(&[&["a", "b"], &["x", "y", "z"]]).unwrap();
        let q = MassFunction::uniform(space).unwrap();
        let plan = build_plan(&ProcessSequenceSpec::constant(q.clone(), 3).unwrap()).unwrap();
        assert_eq!(plan.prob_index_eq(1), ratio(1, 1));
        assert_eq!(plan.v_laws[0], q);
        assert!(plan.schedule.windows().iter().all(|&k| k == 2));
        // P(N > n) = 0 everywhere, so every W_n takes the convention P_n^{k_n}.
        for n in 1..=plan.len() {
            assert_eq!(plan.w_laws[n - 1], q);
        }
    }

    #[test]
    fn kernel_rows_fall_back_to_limit() {
        let space = ProductSpace::from_labels(&[&["a", "b"], &["x", "y"]]).unwrap();
        let p1 = MassFunction::from_labels(space.clone(), &[("a,x", ratio(1, 1))]).unwrap();
        let q = MassFunction::uniform(space.clone()).unwrap();
        let spec = ProcessSequenceSpec::new(space, vec![p1], q, TailRule::EventuallyEqual(1)).unwrap();
        let plan = build_plan(&spec).unwrap();
        // deficit 1/2 at k = 1 (feasible), 3/4 at k = 2 (not).
        assert_eq!(plan.window(1), 1);
        let kernel = &plan.extension_kernels[0];
        let used = &kernel[&Point(vec![0])];
        assert!(used.used);
        assert_eq!(used.row, *plan.spec.law(1));
        let fallback = &kernel[&Point(vec![1])];
        assert!(!fallback.used);
        assert_eq!(fallback.row.mass(&Point(vec![1, 0])), ratio(1, 2));
        assert_eq!(fallback.row.mass(&Point(vec![1, 1])), ratio(1, 2));
    }
}
