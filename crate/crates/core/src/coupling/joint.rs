//! Brute-force joint law of one sampler draw, for small instances.

use std::sync::Arc;

use num_traits::Zero;

use super::plan::CouplingPlan;
use crate::error::{Error, Result};
use crate::measure::{MassFunction, Point, ProductSpace};
use crate::rational::Rational;

pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Exact law of `(N, Z, Z_1, ..., Z_{M+1})` as a mass function on
/// `index x E x E x ... x E`.
#[derive(Debug, Clone)]
pub struct JointLaw {
    law: MassFunction,
    copies: usize,
    width: usize,
    base: Arc<ProductSpace>,
}

impl JointLaw {
    pub fn law(&self) -> &MassFunction {
        &self.law
    }

    fn project(&self, offset: usize) -> Result<MassFunction> {
        let width = self.width;
        self.law.pushforward(self.base.clone(), |p| {
            Point(p.coords()[offset..offset + width].to_vec())
        })
    }

    pub fn index_law(&self) -> Result<MassFunction> {
        self.law.window_marginal(1)
    }

    /// Law of `Z`.
    pub fn limit_marginal(&self) -> Result<MassFunction> {
        self.project(1)
    }

    /// Law of `Z_n`, `1 <= n <= M + 1`.
    pub fn member_marginal(&self, n: usize) -> Result<MassFunction> {
        assert!(n >= 1 && n < self.copies);
        self.project(1 + n * self.width)
    }

    /// Mass of the event that `Z_n` and `Z` share their `k_n`-prefix for all
    /// `n >= N`.
    pub fn agreement_mass(&self, windows: &[usize]) -> Rational {
        let w = self.width;
        self.law
            .iter()
            .filter(|(p, _)| {
                let c = p.coords();
                let index = c[0] as usize + 1;
                let z = &c[1..1 + w];
                (index..self.copies).all(|n| {
                    let zn = &c[1 + n * w..1 + (n + 1) * w];
                    let k = windows[n - 1];
                    zn[..k] == z[..k]
                })
            })
            .fold(Rational::zero(), |acc, (_, m)| acc + m)
    }
}

/// Enumerates the joint law implied by the sampler's generative procedure.
///
/// Given `(N, Z)`, the copies `Z_n` are conditionally independent: for
/// `n >= N` the kernel row at `Z`'s `k_n`-prefix, otherwise the `W_n`-mixture
/// of kernel rows.
pub fn exact_joint_law(plan: &CouplingPlan, cap: u128) -> Result<JointLaw> {
    let base = plan.spec.space().clone();
    let width = base.len();
    let last = plan.len();

    let mixtures = (1..=last)
        .map(|n| {
            let kernel = &plan.extension_kernels[n - 1];
            let mut acc = MassFunction::zero(base.clone());
            for (prefix, m) in plan.w_laws[n - 1].iter() {
                let row = kernel.get(prefix).ok_or_else(|| {
                    Error::Internal(format!("no kernel row for W_{n} prefix {:?}", prefix.coords()))
                })?;
                acc = acc.checked_add(&row.row.scale(m)?)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;

    let conditional = |index: usize, z: &Point| -> Result<Vec<Vec<(Point, Rational)>>> {
        (1..=last)
            .map(|n| {
                let law = if n >= index {
                    let prefix = z.prefix(plan.window(n));
                    &plan.extension_kernels[n - 1]
                        .get(&prefix)
                        .ok_or_else(|| Error::Internal(format!("no kernel row at n={n}")))?
                        .row
                } else {
                    &mixtures[n - 1]
                };
                Ok(law.iter().map(|(p, m)| (p.clone(), m.clone())).collect())
            })
            .collect()
    };

    let mut size: u128 = 0;
    let mut roots = Vec::new();
    for (ip, p_index) in plan.law_of_n.iter() {
        let index = ip.coords()[0] as usize + 1;
        for (z, pz) in plan.v_laws[index - 1].iter() {
            let factors = conditional(index, z)?;
            let count = factors
                .iter()
                .fold(1u128, |acc, f| acc.saturating_mul(f.len() as u128));
            size = size.saturating_add(count);
            if size > cap {
                return Err(Error::TooLarge { size, cap });
            }
            roots.push((ip.concat(z), p_index * pz, factors));
        }
    }

    let mut atoms = Vec::with_capacity(size as usize);
    for (head, mass, factors) in roots {
        expand(&head, &mass, &factors, &mut atoms);
    }

    let mut coords = vec![plan.law_of_n.space().coordinates()[0].clone()];
    for _ in 0..=last {
        coords.extend(base.coordinates().iter().cloned());
    }
    let law = MassFunction::new(ProductSpace::new(coords), atoms)?;
    Ok(JointLaw {
        law,
        copies: last + 1,
        width,
        base,
    })
}

fn expand(
    head: &Point,
    mass: &Rational,
    factors: &[Vec<(Point, Rational)>],
    out: &mut Vec<(Point, Rational)>,
) {
    match factors.split_first() {
        None => out.push((head.clone(), mass.clone())),
        Some((first, rest)) => {
            for (p, m) in first {
                expand(&head.concat(p), &(mass * m), rest, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::build_plan;
    use crate::measure::{ProcessSequenceSpec, TailRule};
    use crate::rational::ratio;
    use num_traits::One;

    #[test]
    fn constant_binary_spec_is_diagonal() {
        let s = ProductSpace::from_labels(&[&["0", "1"]]).unwrap();
        let q = MassFunction::from_labels(s, &[("0", ratio(1, 3)), ("1", ratio(2, 3))]).unwrap();
        let plan = build_plan(&ProcessSequenceSpec::constant(q.clone(), 1).unwrap()).unwrap();
        let joint = exact_joint_law(&plan, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(joint.law().support_len(), 2);
        for (p, _) in joint.law().iter() {
            let c = p.coords();
            assert!(c[1] == c[2] && c[2] == c[3]);
        }
        assert_eq!(joint.limit_marginal().unwrap(), q);
    }

    #[test]
    fn worked_example_marginals() {
        let line = ProductSpace::from_labels(&[&["a", "b"]]).unwrap();
        let p1 = MassFunction::from_labels(line.clone(), &[("a", ratio(1, 4)), ("b", ratio(3, 4))]).unwrap();
        let q = MassFunction::uniform(line.clone()).unwrap();
        let spec = ProcessSequenceSpec::new(line, vec![p1.clone()], q.clone(), TailRule::EventuallyEqual(1)).unwrap();
        let plan = build_plan(&spec).unwrap();
        let joint = exact_joint_law(&plan, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(joint.member_marginal(1).unwrap(), p1);
        assert_eq!(joint.member_marginal(2).unwrap(), q);
        assert_eq!(joint.limit_marginal().unwrap(), q);
        assert_eq!(joint.index_law().unwrap(), plan.law_of_n);
        assert!(joint.agreement_mass(plan.schedule.windows()).is_one());
    }

    #[test]
    fn cap_is_enforced() {
        let space = ProductSpace::from_labels(&[&["a", "b"], &["x", "y"]]).unwrap();
        let q = MassFunction::uniform(space).unwrap();
        let plan = build_plan(&ProcessSequenceSpec::constant(q, 2).unwrap()).unwrap();
        assert!(matches!(exact_joint_law(&plan, 3), Err(Error::TooLarge { .. })));
        assert!(exact_joint_law(&plan, 4).is_ok());
    }
}
