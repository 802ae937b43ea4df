use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::schedule::WindowSchedule;
use crate::error::{Error, Result};
use crate::measure::{MassFunction, Point, ProcessSequenceSpec};
use crate::rational::Rational;

/// Density of a measure with respect to the limit law, tabulated on the
/// limit's support.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DensityRatio {
    values: BTreeMap<Point, Rational>,
}

impl DensityRatio {
    pub fn new(values: BTreeMap<Point, Rational>) -> Self {
        Self { values }
    }

    /// Constant ratio `1` on the support of `q`.
    pub fn unit_on(q: &MassFunction) -> Self {
        Self {
            values: q.support().map(|p| (p.clone(), Rational::one())).collect(),
        }
    }

    pub fn get(&self, point: &Point) -> Rational {
        self.values.get(point).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, &Rational)> {
        self.values.iter()
    }
}

/// The nu and mu ladders over indices `1..=M+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureLadder {
    pub nu: Vec<MassFunction>,
    pub h: Vec<DensityRatio>,
    pub mu: Vec<MassFunction>,
}

impl MeasureLadder {
    /// `mu_n` for `0 <= n <= M + 1`, with `mu_0 = 0`.
    pub fn mu_at(&self, n: usize) -> MassFunction {
        if n == 0 {
            MassFunction::zero(self.mu[0].space().clone())
        } else {
            self.mu[n - 1].clone()
        }
    }
}

/// Extends a measure on the `k`-window of `q`'s space to the full space by
/// integrating the conditional law of `q` given the window:
/// `nu(z) = window(z^k) * q(z) / q^k(z^k)`.
pub fn extend_window_measure(
    q: &MassFunction,
    window: &MassFunction,
    k: usize,
) -> Result<MassFunction> {
    let qk = q.window_marginal(k)?;
    if **window.space() != **qk.space() {
        return Err(Error::SpaceMismatch("window measure is not on the k-window space".into()));
    }
    if let Some(p) = window.first_excess_over(&qk) {
        return Err(Error::Internal(format!(
            "window measure exceeds the limit marginal at {:?}",
            window.format_point(&p)
        )));
    }
    MassFunction::new(
        q.space().clone(),
        q.iter().filter_map(|(z, m)| {
            let prefix = z.prefix(k);
            let w = window.mass(&prefix);
            if w.is_zero() {
                None
            } else {
                Some((z.clone(), w * m / qk.mass(&prefix)))
            }
        }),
    )
}

/// `nu_n` on the full space: the infimum density in window `k_n`, extended
/// through the limit's conditional law.
pub fn extend_nu(
    spec: &ProcessSequenceSpec,
    schedule: &WindowSchedule,
    n: usize,
) -> Result<MassFunction> {
    let k = schedule.window(n);
    let window = spec.inf_window_density(n, k)?;
    extend_window_measure(spec.limit(), &window, k)
}

pub fn build_ladder(spec: &ProcessSequenceSpec, schedule: &WindowSchedule) -> Result<MeasureLadder> {
    let q = spec.limit();
    let last = schedule.len();
    let mut nu = Vec::with_capacity(last);
    let mut h = Vec::with_capacity(last);
    for n in 1..=last {
        let nu_n = extend_nu(spec, schedule, n)?;
        let ratio = if n > spec.horizon() {
            DensityRatio::unit_on(q)
        } else {
            DensityRatio::new(q.iter().map(|(z, m)| (z.clone(), nu_n.mass(z) / m)).collect())
        };
        nu.push(nu_n);
        h.push(ratio);
    }

    // Suffix minima: mu_n has density min_{n <= i <= M+1} h_i; indices past
    // M + 1 contribute h = 1 and never lower the minimum.
    let mut running = DensityRatio::unit_on(q);
    let mut mu_rev = Vec::with_capacity(last);
    for ratio in h.iter().rev() {
        running = DensityRatio::new(
            running
                .iter()
                .map(|(z, r)| (z.clone(), r.min(&ratio.get(z)).clone()))
                .collect(),
        );
        mu_rev.push(MassFunction::new(
            q.space().clone(),
            q.iter().map(|(z, m)| (z.clone(), running.get(z) * m)),
        )?);
    }
    mu_rev.reverse();
    Ok(MeasureLadder { nu, h, mu: mu_rev })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::build_schedule;
    use crate::measure::{ProductSpace, TailRule};
    use crate::rational::ratio;

    #[test]
    fn extension_by_hand() {
        let space = ProductSpace::from_labels(&[&["a", "b"], &["x", "y"]]).unwrap();
        let q = MassFunction::uniform(space.clone()).unwrap();
        let window = MassFunction::from_labels(
            space.prefix(1).unwrap(),
            &[("a", ratio(1, 4)), ("b", ratio(1, 2))],
        )
        .unwrap();
        let nu = extend_window_measure(&q, &window, 1).unwrap();
        let expected = MassFunction::from_labels(
            space.clone(),
            &[
                ("a,x", ratio(1, 8)),
                ("a,y", ratio(1, 8)),
                ("b,x", ratio(1, 4)),
                ("b,y", ratio(1, 4)),
            ],
        )
        .unwrap();
        assert_eq!(nu, expected);
        assert_eq!(nu.window_marginal(1).unwrap(), window);

        let full_window = q.window_marginal(1).unwrap();
        assert_eq!(extend_window_measure(&q, &full_window, 1).unwrap(), q);

        let empty = MassFunction::from_labels(space.prefix(0).unwrap(), &[("", ratio(2, 3))]).unwrap();
        assert_eq!(extend_window_measure(&q, &empty, 0).unwrap(), q.scale(&ratio(2, 3)).unwrap());
    }

    #[test]
    fn ladder_by_hand() {
        let line = ProductSpace::from_labels(&[&["a", "b"]]).unwrap();
        let p1 = MassFunction::from_labels(line.clone(), &[("a", ratio(1, 4)), ("b", ratio(3, 4))]).unwrap();
        let q = MassFunction::uniform(line.clone()).unwrap();
        let spec = ProcessSequenceSpec::new(line, vec![p1], q.clone(), TailRule::EventuallyEqual(1)).unwrap();
        let schedule = build_schedule(&spec).unwrap();
        assert_eq!(schedule.windows(), &[1, 1]);
        let ladder = build_ladder(&spec, &schedule).unwrap();
        assert_eq!(ladder.h[0].get(&Point(vec![0])), ratio(1, 2));
        assert_eq!(ladder.h[0].get(&Point(vec![1])), ratio(1, 1));
        assert_eq!(ladder.mu[0].mass(&Point(vec![0])), ratio(1, 4));
        assert_eq!(ladder.mu[0].mass(&Point(vec![1])), ratio(1, 2));
        assert_eq!(ladder.mu[1], q);
        assert_eq!(q.total() - ladder.mu[0].total(), ratio(1, 4));
    }

    #[test]
    fn constant_spec_ladder_is_flat() {
        let space = ProductSpace::from_labels(&[&["a", "b"], &["x", "y"]]).unwrap();
        let q = MassFunction::uniform(space).unwrap();
        let spec = ProcessSequenceSpec::constant(q.clone(), 2).unwrap();
        let schedule = build_schedule(&spec).unwrap();
        let ladder = build_ladder(&spec, &schedule).unwrap();
        assert!(ladder.mu.iter().all(|m| *m == q));
        assert!(ladder.h.iter().all(|h| h.iter().all(|(_, r)| r.is_one())));
    }
}
