//! Exact invariant audits. Every check recomputes its quantities from the
//! spec and the plan's stored components; nothing is taken on trust.

use num_traits::{One, Zero};

use super::report::{DeficitEntry, VerificationReport};
use crate::coupling::{exact_joint_law, CouplingPlan, WindowSchedule};
use crate::error::{Error, Result};
use crate::measure::{MassFunction, Point};
use crate::rational::{self, Rational};
use crate::serial::spec_hash;
use crate::skorohod::{Backend, MetricSpaceModel, PartitionTree, SkorohodCoupling};

type Outcome = std::result::Result<(), String>;

fn point_witness(n: usize, law: &MassFunction, p: &Point) -> String {
    format!("n={n} at ({})", law.format_point(p))
}

/// Runs `body` for each index `1..=M+1`, stopping at the first failure.
fn for_each_index(plan: &CouplingPlan, mut body: impl FnMut(usize) -> Result<Outcome>) -> Outcome {
    for n in 1..=plan.len() {
        match body(n) {
            Ok(Ok(())) => {}
            Ok(Err(w)) => return Err(w),
            Err(e) => return Err(format!("n={n}: {e}")),
        }
    }
    Ok(())
}

fn equal_or_witness(n: usize, got: &MassFunction, want: &MassFunction) -> Outcome {
    if got.space() != want.space() {
        return Err(format!("n={n}: space mismatch"));
    }
    match got.first_difference(want) {
        None => Ok(()),
        Some(p) => Err(format!(
            "{}: {} vs {}",
            point_witness(n, got, &p),
            rational::format(&got.mass(&p)),
            rational::format(&want.mass(&p))
        )),
    }
}

fn dominated_or_witness(n: usize, lower: &MassFunction, upper: &MassFunction) -> Outcome {
    match lower.first_excess_over(upper) {
        None => Ok(()),
        Some(p) => Err(format!(
            "{}: {} > {}",
            point_witness(n, lower, &p),
            rational::format(&lower.mass(&p)),
            rational::format(&upper.mass(&p))
        )),
    }
}

/// Every exact invariant of a coupling plan.
pub fn audit_plan(plan: &CouplingPlan) -> VerificationReport {
    let mut report = VerificationReport::new(spec_hash(&plan.spec), None);
    let spec = &plan.spec;
    let q = spec.limit();
    let last = plan.len();
    let full = spec.full_window();
    let windows = plan.schedule.windows();
    let mu = |n: usize| plan.ladder.mu_at(n);

    for n in 1..=last {
        let nu_mass = plan.ladder.nu.get(n - 1).map(MassFunction::total).unwrap_or_default();
        report.deficit_trace.push(DeficitEntry {
            n,
            window: windows[n - 1],
            deficit: rational::format(&(Rational::one() - nu_mass)),
            bound: rational::format(&WindowSchedule::bound(n)),
        });
    }

    report.check(
        "schedule.non_decreasing",
        match windows.windows(2).position(|w| w[0] > w[1]) {
            None => Ok(()),
            Some(i) => Err(format!("k_{} = {} > k_{} = {}", i + 1, windows[i], i + 2, windows[i + 1])),
        },
    );
    report.check(
        "schedule.reaches_full_window",
        if windows.last() == Some(&full) {
            Ok(())
        } else {
            Err(format!("k_{last} = {:?}, full window is {full}", windows.last()))
        },
    );
    report.check(
        "schedule.deficit_certificates",
        for_each_index(plan, |n| {
            let deficit = Rational::one() - plan.ladder.nu[n - 1].total();
            Ok(if deficit > WindowSchedule::bound(n) {
                Err(format!("n={n}: deficit {} > 2^-{n}", rational::format(&deficit)))
            } else if deficit != *plan.schedule.deficit(n) {
                Err(format!("n={n}: recorded deficit differs from 1 - |nu_n|"))
            } else {
                Ok(())
            })
        }),
    );
    report.check(
        "ladder.nu_is_extended_infimum",
        for_each_index(plan, |n| {
            let k = windows[n - 1];
            let inf = spec.inf_window_density(n, k)?;
            let nu = &plan.ladder.nu[n - 1];
            let window_ok = equal_or_witness(n, &nu.window_marginal(k)?, &inf);
            if window_ok.is_err() {
                return Ok(window_ok);
            }
            Ok(equal_or_witness(n, nu, &crate::coupling::extend_window_measure(q, &inf, k)?))
        }),
    );
    report.check(
        "ladder.h_is_density",
        for_each_index(plan, |n| {
            let h = &plan.ladder.h[n - 1];
            let from_h = MassFunction::new(q.space().clone(), q.iter().map(|(z, m)| (z.clone(), h.get(z) * m)))?;
            if n > spec.horizon() && q.support().any(|z| !h.get(z).is_one()) {
                return Ok(Err(format!("n={n}: h must be 1 past the tail index")));
            }
            Ok(equal_or_witness(n, &from_h, &plan.ladder.nu[n - 1]))
        }),
    );
    report.check(
        "ladder.mu_is_min_density",
        for_each_index(plan, |n| {
            let expected = MassFunction::new(
                q.space().clone(),
                q.iter().map(|(z, m)| {
                    let min = plan.ladder.h[n - 1..]
                        .iter()
                        .map(|h| h.get(z))
                        .fold(Rational::one(), |a, b| if b < a { b } else { a });
                    (z.clone(), min * m)
                }),
            )?;
            Ok(equal_or_witness(n, &mu(n), &expected))
        }),
    );
    report.check(
        "ladder.mu_monotone",
        for_each_index(plan, |n| Ok(dominated_or_witness(n, &mu(n - 1), &mu(n)))),
    );
    report.check(
        "ladder.mu_below_nu",
        for_each_index(plan, |n| Ok(dominated_or_witness(n, &mu(n), &plan.ladder.nu[n - 1]))),
    );
    report.check("ladder.mu_top_is_limit", equal_or_witness(last, &mu(last), q));
    report.check(
        "ladder.domination",
        for_each_index(plan, |n| {
            let k = windows[n - 1];
            Ok(dominated_or_witness(n, &mu(n).window_marginal(k)?, &spec.law(n).window_marginal(k)?))
        }),
    );
    report.check(
        "ladder.mass_bound",
        for_each_index(plan, |n| {
            let gap = q.total() - mu(n).total();
            let bound = rational::pow2_neg(n as u32) * rational::int(2);
            Ok(if gap > bound || gap < Rational::zero() {
                Err(format!("n={n}: |Q - mu_n| = {}", rational::format(&gap)))
            } else {
                Ok(())
            })
        }),
    );
    report.check(
        "law_of_n.cumulative",
        (|| -> Outcome {
            let mut cumulative = Rational::zero();
            for n in 1..=last {
                cumulative += plan.prob_index_eq(n);
                if cumulative != mu(n).total() {
                    return Err(format!("n={n}: P(N <= n) = {}", rational::format(&cumulative)));
                }
            }
            if plan.law_of_n.support().any(|p| p.coords()[0] as usize >= last) {
                return Err("N exceeds M + 1".into());
            }
            Ok(())
        })(),
    );
    report.check(
        "components.are_probability",
        for_each_index(plan, |n| {
            Ok(if !plan.v_laws[n - 1].is_probability() {
                Err(format!("V_{n} has total {}", rational::format(&plan.v_laws[n - 1].total())))
            } else if !plan.w_laws[n - 1].is_probability() {
                Err(format!("W_{n} has total {}", rational::format(&plan.w_laws[n - 1].total())))
            } else if plan.w_laws[n - 1].space().len() != windows[n - 1] {
                Err(format!("W_{n} is not on the k_{n}-window space"))
            } else if !plan.law_of_n.is_probability() {
                Err("law of N is not a probability".into())
            } else {
                Ok(())
            })
        }),
    );
    report.check(
        "v_laws.mixture_identity",
        for_each_index(plan, |n| {
            let p = plan.prob_index_eq(n);
            let v = &plan.v_laws[n - 1];
            if p.is_zero() {
                return Ok(equal_or_witness(n, v, q));
            }
            let diff = match mu(n).checked_sub(&mu(n - 1)) {
                Ok(d) => d,
                Err(e) => return Ok(Err(format!("n={n}: {e}"))),
            };
            Ok(equal_or_witness(n, &v.scale(&p)?, &diff))
        }),
    );
    report.check(
        "w_laws.mixture_identity",
        for_each_index(plan, |n| {
            let k = windows[n - 1];
            let p = plan.prob_index_gt(n);
            let w = &plan.w_laws[n - 1];
            let pk = spec.law(n).window_marginal(k)?;
            if p.is_zero() {
                return Ok(equal_or_witness(n, w, &pk));
            }
            let diff = match pk.checked_sub(&mu(n).window_marginal(k)?) {
                Ok(d) => d,
                Err(e) => return Ok(Err(format!("n={n}: {e}"))),
            };
            Ok(equal_or_witness(n, &w.scale(&p)?, &diff))
        }),
    );
    report.check(
        "reconstruction.limit",
        (|| -> Result<Outcome> {
            let mut acc = MassFunction::zero(q.space().clone());
            for n in 1..=last {
                acc = acc.checked_add(&plan.v_laws[n - 1].scale(&plan.prob_index_eq(n))?)?;
            }
            Ok(equal_or_witness(last, &acc, q))
        })()
        .unwrap_or_else(|e| Err(e.to_string())),
    );
    report.check(
        "reconstruction.window_marginals",
        for_each_index(plan, |n| {
            let k = windows[n - 1];
            let mut acc = plan.w_laws[n - 1].scale(&plan.prob_index_gt(n))?;
            for j in 1..=n {
                acc = acc.checked_add(&plan.v_laws[j - 1].window_marginal(k)?.scale(&plan.prob_index_eq(j))?)?;
            }
            Ok(equal_or_witness(n, &acc, &spec.law(n).window_marginal(k)?))
        }),
    );
    report.check(
        "kernels.rows",
        for_each_index(plan, |n| {
            let k = windows[n - 1];
            let kernel = &plan.extension_kernels[n - 1];
            let pk = spec.law(n).window_marginal(k)?;
            for prefix in pk.support() {
                match kernel.get(prefix) {
                    Some(row) if row.used => {}
                    _ => return Ok(Err(format!("n={n}: no used row for prefix ({})", pk.format_point(prefix)))),
                }
            }
            for (prefix, row) in kernel {
                if !row.row.is_probability() {
                    return Ok(Err(format!("n={n}: row ({}) is not a probability", pk.format_point(prefix))));
                }
                let marginal = row.row.window_marginal(k)?;
                if marginal != MassFunction::point_mass(marginal.space().clone(), prefix.clone())? {
                    return Ok(Err(format!("n={n}: row ({}) leaves its prefix", pk.format_point(prefix))));
                }
            }
            Ok(Ok(()))
        }),
    );
    report.check(
        "reconstruction.members",
        for_each_index(plan, |n| {
            let k = windows[n - 1];
            let pk = spec.law(n).window_marginal(k)?;
            let mut acc = MassFunction::zero(q.space().clone());
            for (prefix, m) in pk.iter() {
                let row = &plan.extension_kernels[n - 1]
                    .get(prefix)
                    .ok_or_else(|| Error::Internal("missing kernel row".into()))?
                    .row;
                acc = acc.checked_add(&row.scale(m)?)?;
            }
            Ok(equal_or_witness(n, &acc, spec.law(n)))
        }),
    );
    report
}

/// Exact marginals through the brute-force joint law, when it fits the cap.
pub fn audit_joint(plan: &CouplingPlan, cap: u128) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(spec_hash(&plan.spec), None);
    let joint = exact_joint_law(plan, cap)?;
    report.check(
        "joint.limit_marginal",
        equal_or_witness(plan.len(), &joint.limit_marginal()?, plan.spec.limit()),
    );
    report.check(
        "joint.member_marginals",
        for_each_index(plan, |n| Ok(equal_or_witness(n, &joint.member_marginal(n)?, plan.spec.law(n)))),
    );
    report.check(
        "joint.index_law",
        equal_or_witness(plan.len(), &joint.index_law()?, &plan.law_of_n),
    );
    let agreement = joint.agreement_mass(plan.schedule.windows());
    report.check(
        "joint.agreement_event",
        if agreement.is_one() {
            Ok(())
        } else {
            Err(format!("agreement mass {}", rational::format(&agreement)))
        },
    );
    Ok(report)
}

/// Validity of a partition tree for the law it was built for.
pub fn audit_tree(model: &MetricSpaceModel, law: &MassFunction, tree: &PartitionTree) -> VerificationReport {
    let mut report = VerificationReport::new(String::new(), None);
    let mass = |members: &[usize]| -> Rational {
        members
            .iter()
            .fold(Rational::zero(), |acc, &i| acc + law.mass(&model.atom(i)))
    };
    let levels = || tree.levels.iter().enumerate().map(|(i, cells)| (i + 1, cells));

    report.check(
        "tree.partition",
        levels().try_for_each(|(k, cells)| {
            let mut seen = vec![0usize; model.len()];
            for c in cells.iter() {
                for &x in &c.members {
                    seen[x] += 1;
                }
            }
            match seen.iter().position(|&s| s != 1) {
                None => Ok(()),
                Some(x) => Err(format!("level {k}: point {} lies in {} cells", model.label(x), seen[x])),
            }
        }),
    );
    report.check(
        "tree.nesting",
        levels().skip(1).try_for_each(|(k, cells)| {
            let parents = tree.level(k - 1);
            for (pi, parent) in parents.iter().enumerate() {
                let mut union: Vec<usize> = cells
                    .iter()
                    .filter(|c| c.parent == Some(pi))
                    .flat_map(|c| c.members.iter().copied())
                    .collect();
                union.sort_unstable();
                let mut own = parent.members.clone();
                own.sort_unstable();
                if union != own {
                    return Err(format!("level {k}: children of {:?} do not tile it", parent.index));
                }
                if cells
                    .iter()
                    .filter(|c| c.parent == Some(pi))
                    .any(|c| c.index[..k - 1] != parent.index[..])
                {
                    return Err(format!("level {k}: child index does not extend {:?}", parent.index));
                }
            }
            Ok(())
        }),
    );
    report.check(
        "tree.covers_separable_support",
        levels().try_for_each(|(k, cells)| {
            match cells
                .iter()
                .filter(|c| c.is_residual())
                .flat_map(|c| c.members.iter())
                .find(|&&x| model.in_separable_support(x))
            {
                None => Ok(()),
                Some(&x) => Err(format!("level {k}: {} in E_0 is left in a residual cell", model.label(x))),
            }
        }),
    );
    report.check(
        "tree.diameter_bound",
        levels().try_for_each(|(k, cells)| {
            let bound = rational::ratio(1, k as i64);
            match cells.iter().find(|c| !c.is_residual() && model.diameter(&c.members) >= bound) {
                None => Ok(()),
                Some(c) => Err(format!("level {k}: cell {:?} has diameter {}", c.index, rational::format(&model.diameter(&c.members)))),
            }
        }),
    );
    report.check(
        "tree.residual_null",
        levels().try_for_each(|(k, cells)| match cells.iter().find(|c| c.is_residual() && !mass(&c.members).is_zero()) {
            None => Ok(()),
            Some(c) => Err(format!("level {k}: residual {:?} has mass {}", c.index, rational::format(&mass(&c.members)))),
        }),
    );
    report.check(
        "tree.recorded_masses",
        levels().try_for_each(|(k, cells)| match cells.iter().find(|c| c.mass != mass(&c.members)) {
            None => Ok(()),
            Some(c) => Err(format!("level {k}: cell {:?} records the wrong mass", c.index)),
        }),
    );
    // Boundary of a carved cell lies in the spheres of its own ball, of the
    // balls carved before it from the same parent, and of the parent's boundary.
    report.check(
        "tree.continuity",
        match tree.backend {
            Backend::Table => Ok(()),
            Backend::Linf => levels().try_for_each(|(k, cells)| {
                for c in cells.iter() {
                    let mut balls: Vec<(usize, &crate::skorohod::Ball)> = Vec::new();
                    let mut level = k;
                    let mut cell = c;
                    loop {
                        let siblings = tree.level(level);
                        let pos = siblings.iter().position(|s| std::ptr::eq(s, cell)).expect("cell in level");
                        for s in &siblings[..=pos] {
                            if s.parent == cell.parent {
                                if let Some(b) = &s.ball {
                                    balls.push((level, b));
                                }
                            }
                        }
                        match cell.parent {
                            Some(p) if level > 1 => {
                                level -= 1;
                                cell = &tree.level(level)[p];
                            }
                            _ => break,
                        }
                    }
                    for (lvl, b) in balls {
                        let sphere = model.sphere_mass(b.center, &b.radius, law);
                        if !sphere.is_zero() {
                            return Err(format!(
                                "level {k}: cell {:?} borders a level-{lvl} sphere of mass {}",
                                c.index,
                                rational::format(&sphere)
                            ));
                        }
                    }
                    if !c.boundary_mass.is_zero() {
                        return Err(format!("level {k}: cell {:?} records boundary mass", c.index));
                    }
                }
                Ok(())
            }),
        },
    );
    report
}

/// Tree, plan, weak-convergence and decoder audits of a Skorohod coupling.
/// Decoder marginals are checked exactly when the joint law fits `cap`;
/// otherwise a note is recorded and the statistical guard takes over.
pub fn audit_skorohod(coupling: &SkorohodCoupling, cap: u128) -> Result<(VerificationReport, bool)> {
    let mut report = audit_plan(&coupling.plan);
    report.merge(audit_tree(&coupling.model, coupling.laws.limit(), &coupling.tree));
    report.check(
        "portmanteau.cells",
        match crate::skorohod::check_weak_convergence(&coupling.laws, &coupling.tree) {
            Some(_) => Ok(()),
            None => Err("cell masses never settle".into()),
        },
    );
    let digits = crate::skorohod::digitize(&coupling.model, &coupling.laws, &coupling.tree)?;
    report.check(
        "digitize.cell_masses",
        (1..=coupling.tree.depth).try_for_each(|k| {
            let marginal = digits.limit().window_marginal(k).map_err(|e| e.to_string())?;
            for cell in coupling.tree.level(k) {
                let prefix = Point(cell.index.iter().map(|i| i - 1).collect());
                if marginal.mass(&prefix) != cell.mass {
                    return Err(format!("level {k}: cell {:?}", cell.index));
                }
            }
            Ok(())
        }),
    );
    let enumerated = match exact_joint_law(&coupling.plan, cap) {
        Ok(joint) => {
            report.check(
                "decoder.marginals_exact",
                (1..=coupling.plan.len()).try_for_each(|n| {
                    let decoded = coupling
                        .decode_law(&joint.member_marginal(n).map_err(|e| e.to_string())?)
                        .map_err(|e| e.to_string())?;
                    equal_or_witness(n, &decoded, coupling.laws.law(n))
                }),
            );
            report.check(
                "decoder.limit_exact",
                coupling
                    .decode_law(&joint.limit_marginal()?)
                    .map_err(|e| e.to_string())
                    .and_then(|d| equal_or_witness(coupling.plan.len(), &d, coupling.laws.limit())),
            );
            true
        }
        Err(Error::TooLarge { .. }) => false,
        Err(e) => return Err(e),
    };
    Ok((report, enumerated))
}
