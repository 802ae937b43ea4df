//! Monte Carlo guards for the samplers.
//!
//! Agreement and distance guarantees hold surely, so any violation is a
//! fault. Distributional checks compare empirical laws to the exact ones
//! with explicit normal-approximation thresholds recorded in the report.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::report::{McCheck, VerificationReport};
use crate::coupling::{CouplingPlan, CouplingSample, CouplingSampler};
use crate::error::Result;
use crate::measure::{total_variation, MassFunction, Point};
use crate::rational;
use crate::rng;
use crate::serial::spec_hash;
use crate::skorohod::{SkorohodCoupling, SkorohodSample};

/// Empirical counts of the index and of every coordinate of the coupling.
#[derive(Debug, Clone, Default)]
struct Tally {
    samples: u64,
    index: BTreeMap<usize, u64>,
    limit: BTreeMap<Point, u64>,
    members: Vec<BTreeMap<Point, u64>>,
}

impl Tally {
    fn new(len: usize) -> Self {
        Self {
            members: vec![BTreeMap::new(); len],
            ..Self::default()
        }
    }

    fn record(&mut self, index: usize, limit: Point, members: impl IntoIterator<Item = Point>) {
        self.samples += 1;
        *self.index.entry(index).or_default() += 1;
        *self.limit.entry(limit).or_default() += 1;
        for (slot, p) in self.members.iter_mut().zip(members) {
            *slot.entry(p).or_default() += 1;
        }
    }
}

fn empirical(law: &MassFunction, counts: &BTreeMap<Point, u64>, samples: u64) -> Result<MassFunction> {
    MassFunction::new(
        law.space().clone(),
        counts
            .iter()
            .map(|(p, &c)| (p.clone(), rational::ratio(c as i64, samples as i64))),
    )
}

/// TV of the empirical law of `N` against its exact law. Passes when
/// `TV < 3 sqrt(m / S)` with `m = M + 1` categories; by Cauchy-Schwarz
/// `E TV <= sqrt(m / S) / 2`, and bounded differences push the tail past
/// `3 sqrt(m / S)` below `exp(-12.5 m)`. Compared exactly as `TV^2 < 9m/S`.
fn index_law_check(plan: &CouplingPlan, tally: &Tally) -> Result<McCheck> {
    let s = tally.samples;
    let counts = tally
        .index
        .iter()
        .map(|(&n, &c)| (Point(vec![n as u32 - 1]), c))
        .collect();
    let tv = total_variation(&empirical(&plan.law_of_n, &counts, s)?, &plan.law_of_n)?;
    let m = plan.len() as i64;
    let limit = rational::ratio(9 * m, s as i64);
    let passed = &tv * &tv < limit;
    Ok(McCheck {
        name: "law_of_n.total_variation".into(),
        samples: s,
        failures: u64::from(!passed),
        passed,
        statistic: Some(rational::format(&tv)),
        threshold: Some(format!("3*sqrt({m}/{s}) = {:.6}", 3.0 * (m as f64 / s as f64).sqrt())),
        note: format!(
            "TV approx {:.6} over {m} categories; exact law P(N=n) = [{}]",
            rational::to_f64(&tv),
            (1..=plan.len())
                .map(|n| rational::format(&plan.prob_index_eq(n)))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    })
}

/// Per-point binomial check: `|f - p| <= 3 sqrt(p (1 - p) / S)` at every
/// point of the union of the supports. Zero-variance points must match
/// exactly. `failures` counts offending points.
fn marginal_check(name: String, law: &MassFunction, counts: &BTreeMap<Point, u64>, samples: u64) -> McCheck {
    let s = samples as f64;
    let mut worst = 0.0f64;
    let mut offenders = Vec::new();
    let points: std::collections::BTreeSet<&Point> = law.support().chain(counts.keys()).collect();
    for p in points {
        let exact = rational::to_f64(&law.mass(p));
        let freq = counts.get(p).copied().unwrap_or(0) as f64 / s;
        let sigma = (exact * (1.0 - exact) / s).sqrt();
        let dev = (freq - exact).abs();
        if sigma > 0.0 {
            worst = worst.max(dev / sigma);
        }
        let exact_point = law.mass(p).is_zero() || law.mass(p) == rational::int(1);
        let bad = if exact_point { dev != 0.0 } else { dev > 3.0 * sigma };
        if bad {
            offenders.push(law.format_point(p));
        }
    }
    McCheck {
        name,
        samples,
        failures: offenders.len() as u64,
        passed: offenders.is_empty(),
        statistic: Some(format!("{worst:.3} sigma")),
        threshold: Some("3 sigma per point".into()),
        note: if offenders.is_empty() {
            format!("{} points within 3 sigma", law.support_len())
        } else {
            format!("outside 3 sigma at ({})", offenders.join("), ("))
        },
    }
}

fn draw_plan(plan: &CouplingPlan, samples: u64, seed: u64, mut visit: impl FnMut(CouplingSample)) -> Result<()> {
    let sampler = CouplingSampler::new(plan)?;
    for i in 0..samples {
        visit(sampler.sample(&mut rng::stream(seed, i))?);
    }
    Ok(())
}

fn draw_skorohod(
    coupling: &SkorohodCoupling,
    samples: u64,
    seed: u64,
    mut visit: impl FnMut(SkorohodSample),
) -> Result<()> {
    let sampler = coupling.sampler()?;
    for i in 0..samples {
        visit(sampler.sample(&mut rng::stream(seed, i))?);
    }
    Ok(())
}

/// Counts samples violating `Z_n^{k_n} = Z^{k_n}` for some `n >= N`, and
/// checks the empirical law of `N`.
pub fn mc_agreement(plan: &CouplingPlan, samples: u64, seed: u64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(spec_hash(&plan.spec), Some(seed));
    let mut tally = Tally::new(0);
    let mut failures = 0u64;
    draw_plan(plan, samples, seed, |s| {
        failures += u64::from(!s.agreement_violations(plan.schedule.windows()).is_empty());
        tally.record(s.index, s.z_hat, []);
    })?;
    report.mc_checks.push(McCheck {
        name: "agreement.prefix".into(),
        samples,
        failures,
        passed: failures == 0,
        statistic: None,
        threshold: Some("0 violations".into()),
        note: "sure event; any violation is a sampler fault".into(),
    });
    if samples > 0 {
        report.mc_checks.push(index_law_check(plan, &tally)?);
    }
    Ok(report)
}

/// Counts samples with `d(X_n, X) >= 1/k_n` for some `n >= N`, and checks
/// the empirical law of `N`.
pub fn mc_distance(coupling: &SkorohodCoupling, samples: u64, seed: u64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(spec_hash(&coupling.laws), Some(seed));
    let mut tally = Tally::new(0);
    let mut failures = 0u64;
    draw_skorohod(coupling, samples, seed, |s| {
        failures += u64::from(!coupling.distance_violations(&s).is_empty());
        tally.record(s.index(), s.digits.z_hat, []);
    })?;
    report.mc_checks.push(McCheck {
        name: "skorohod.distance".into(),
        samples,
        failures,
        passed: failures == 0,
        statistic: None,
        threshold: Some("0 violations".into()),
        note: "sure event d(X_n, X) < 1/k_n for n >= N; any violation is a fault".into(),
    });
    if samples > 0 {
        report.mc_checks.push(index_law_check(&coupling.plan, &tally)?);
    }
    Ok(report)
}

/// Empirical laws of `Z` and of each `Z_n` against `P` and `P_n`.
pub fn mc_marginals(plan: &CouplingPlan, samples: u64, seed: u64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(spec_hash(&plan.spec), Some(seed));
    let mut tally = Tally::new(plan.len());
    draw_plan(plan, samples, seed, |s| tally.record(s.index, s.z_hat, s.z_hat_n))?;
    if samples == 0 {
        return Ok(report);
    }
    report
        .mc_checks
        .push(marginal_check("marginal.limit".into(), plan.spec.limit(), &tally.limit, samples));
    for n in 1..=plan.len() {
        report.mc_checks.push(marginal_check(
            format!("marginal.member_{n}"),
            plan.spec.law(n),
            &tally.members[n - 1],
            samples,
        ));
    }
    Ok(report)
}

/// Empirical laws of the decoded `X` and `X_n` against the atomic laws.
pub fn mc_decoder_marginals(coupling: &SkorohodCoupling, samples: u64, seed: u64) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(spec_hash(&coupling.laws), Some(seed));
    let mut tally = Tally::new(coupling.plan.len());
    draw_skorohod(coupling, samples, seed, |s| {
        tally.record(
            s.index(),
            coupling.model.atom(s.x_hat),
            s.x_hat_n.iter().map(|&x| coupling.model.atom(x)).collect::<Vec<_>>(),
        )
    })?;
    if samples == 0 {
        return Ok(report);
    }
    report
        .mc_checks
        .push(marginal_check("decoder.limit".into(), coupling.laws.limit(), &tally.limit, samples));
    for n in 1..=coupling.plan.len() {
        report.mc_checks.push(marginal_check(
            format!("decoder.member_{n}"),
            coupling.laws.law(n),
            &tally.members[n - 1],
            samples,
        ));
    }
    Ok(report)
}
