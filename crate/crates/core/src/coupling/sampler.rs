use std::collections::BTreeMap;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed};
use rand::Rng;

use super::plan::CouplingPlan;
use crate::error::{Error, Result};
use crate::measure::{MassFunction, Point};

/// Exact inverse-CDF sampler: masses are put over a common denominator `D`
/// and a uniform integer in `[0, D)` selects the atom.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    atoms: Vec<Point>,
    cumulative: Vec<BigUint>,
    denominator: BigUint,
}

impl DiscreteSampler {
    pub fn new(law: &MassFunction) -> Result<Self> {
        law.require_probability("sampled law")?;
        let denominator = law
            .iter()
            .fold(num_bigint::BigInt::one(), |acc, (_, m)| acc.lcm(m.denom()));
        let mut atoms = Vec::with_capacity(law.support_len());
        let mut cumulative = Vec::with_capacity(law.support_len());
        let mut running = num_bigint::BigInt::from(0);
        for (p, m) in law.iter() {
            running += m.numer() * (&denominator / m.denom());
            atoms.push(p.clone());
            cumulative.push(running.abs().to_biguint().expect("non-negative"));
        }
        Ok(Self {
            atoms,
            cumulative,
            denominator: denominator.to_biguint().expect("positive"),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Point {
        let u = rng.gen_biguint_below(&self.denominator);
        let idx = self.cumulative.partition_point(|c| *c <= u);
        &self.atoms[idx]
    }
}

/// One draw of `(N, Z, Z_1, ..., Z_{M+1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingSample {
    /// Realized `N` in `1..=M+1`.
    pub index: usize,
    pub z_hat: Point,
    /// `Z_n` for `n = 1..=M+1`, at slot `n - 1`.
    pub z_hat_n: Vec<Point>,
}

impl CouplingSample {
    /// Indices `n >= N` whose `k_n`-prefix disagrees with the limit copy.
    /// Empty for every correctly built sample.
    pub fn agreement_violations(&self, windows: &[usize]) -> Vec<usize> {
        (self.index..=self.z_hat_n.len())
            .filter(|&n| {
                let k = windows[n - 1];
                self.z_hat_n[n - 1].coords()[..k] != self.z_hat.coords()[..k]
            })
            .collect()
    }
}

struct KernelSamplers {
    rows: BTreeMap<Point, DiscreteSampler>,
}

/// Samplers for every plan component, built once per plan.
pub struct CouplingSampler<'a> {
    plan: &'a CouplingPlan,
    index: DiscreteSampler,
    v: Vec<DiscreteSampler>,
    w: Vec<DiscreteSampler>,
    kernels: Vec<KernelSamplers>,
}

impl<'a> CouplingSampler<'a> {
    pub fn new(plan: &'a CouplingPlan) -> Result<Self> {
        let kernels = plan
            .extension_kernels
            .iter()
            .map(|k| {
                Ok(KernelSamplers {
                    rows: k
                        .iter()
                        .map(|(p, row)| Ok((p.clone(), DiscreteSampler::new(&row.row)?)))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            plan,
            index: DiscreteSampler::new(&plan.law_of_n)?,
            v: plan.v_laws.iter().map(DiscreteSampler::new).collect::<Result<_>>()?,
            w: plan.w_laws.iter().map(DiscreteSampler::new).collect::<Result<_>>()?,
            kernels,
        })
    }

    pub fn plan(&self) -> &CouplingPlan {
        self.plan
    }

    /// Draw order: `N`, then `Z = V_N`, then for `n = 1..=M+1` the prefix
    /// `W_n` (only when `n < N`) followed by the kernel suffix.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CouplingSample> {
        let index = self.index.sample(rng).coords()[0] as usize + 1;
        let z_hat = self.v[index - 1].sample(rng).clone();
        let mut z_hat_n = Vec::with_capacity(self.plan.len());
        for n in 1..=self.plan.len() {
            let k = self.plan.window(n);
            let prefix = if n >= index {
                z_hat.prefix(k)
            } else {
                self.w[n - 1].sample(rng).clone()
            };
            let row = self.kernels[n - 1].rows.get(&prefix).ok_or_else(|| {
                Error::Internal(format!("no kernel row for prefix {:?} at n={n}", prefix.coords()))
            })?;
            z_hat_n.push(row.sample(rng).clone());
        }
        Ok(CouplingSample {
            index,
            z_hat,
            z_hat_n,
        })
    }
}
