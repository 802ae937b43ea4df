//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Every instance comes from a fixed seed, so the run is replayable. The
//! process exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use coupling_core::coupling::{build_plan, exact_joint_law, CouplingPlan, CouplingSampler, DEFAULT_ENUMERATION_CAP};
use coupling_core::measure::{MassFunction, ProcessSequenceSpec, TailRule};
use coupling_core::rational::ratio;
use coupling_core::serial::{plan_to_json, SampleRecord};
use coupling_core::skorohod::{build_skorohod_coupling, MetricSpaceModel, SkorohodCoupling};
use coupling_core::verify::{
    audit_joint, audit_plan, audit_skorohod, mc_agreement, mc_decoder_marginals, mc_distance, random_model,
    random_spec, ModelBounds, SpecBounds, VerificationReport,
};
use coupling_core::{rng, Error};
use rand::Rng;

const SEED: u64 = 20_240_601;
const SPECS: usize = 200;
const MODELS: usize = 50;
const SAMPLES: u64 = 10_000;

struct Criterion {
    name: &'static str,
    instances: usize,
    failures: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            instances: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, label: &str, report: &VerificationReport, checks: &[&str]) {
        self.instances += 1;
        for name in checks {
            let found = report
                .exact(name)
                .map(|c| (c.passed, c.witness.clone()))
                .or_else(|| report.mc(name).map(|c| (c.passed, Some(format!("{} failures; {}", c.failures, c.note)))));
            match found {
                Some((true, _)) => {}
                Some((false, w)) => self.failures.push(format!("{label} {name}: {}", w.unwrap_or_default())),
                None => self.failures.push(format!("{label} {name}: not run")),
            }
        }
    }

    fn fail(&mut self, label: &str, why: String) {
        self.instances += 1;
        self.failures.push(format!("{label}: {why}"));
    }

    fn print(&self, detail: &str) -> bool {
        let ok = self.failures.is_empty() && self.instances > 0;
        println!(
            "{} {:<26} {} instances{}{}",
            if ok { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            if detail.is_empty() { String::new() } else { format!("; {detail}") },
            if ok { String::new() } else { format!("; {} failures", self.failures.len()) },
        );
        for f in self.failures.iter().take(5) {
            println!("     {f}");
        }
        ok
    }
}

const WINDOW_CHECKS: &[&str] = &["schedule.non_decreasing", "schedule.reaches_full_window", "schedule.deficit_certificates"];
const LADDER_CHECKS: &[&str] = &[
    "ladder.nu_is_extended_infimum",
    "ladder.h_is_density",
    "ladder.mu_is_min_density",
    "ladder.mu_monotone",
    "ladder.mu_below_nu",
    "ladder.mu_top_is_limit",
    "ladder.domination",
    "ladder.mass_bound",
];
const JOINT_CHECKS: &[&str] = &["joint.limit_marginal", "joint.member_marginals", "joint.index_law", "joint.agreement_event"];
const TREE_CHECKS: &[&str] = &[
    "tree.partition",
    "tree.nesting",
    "tree.covers_separable_support",
    "tree.diameter_bound",
    "tree.residual_null",
    "tree.recorded_masses",
    "tree.continuity",
];

/// Draws specs until `SPECS` of them have an enumerable joint law.
fn enumerable_specs() -> (Vec<(CouplingPlan, VerificationReport)>, usize) {
    let mut gen = rng::stream(SEED, u64::MAX);
    let bounds = SpecBounds::default();
    let mut accepted = Vec::new();
    let mut rejected = 0;
    while accepted.len() < SPECS {
        let spec = random_spec(&mut gen, &bounds).expect("generated specs are valid");
        let plan = build_plan(&spec).expect("generated specs converge");
        match audit_joint(&plan, DEFAULT_ENUMERATION_CAP) {
            Ok(report) => accepted.push((plan, report)),
            Err(Error::TooLarge { .. }) => rejected += 1,
            Err(e) => panic!("joint enumeration failed: {e}"),
        }
    }
    (accepted, rejected)
}

fn three_point_line() -> (MetricSpaceModel, ProcessSequenceSpec) {
    let labels = vec!["0".to_string(), "1".to_string(), "2".to_string()];
    let coords = (0..3).map(|i| vec![ratio(i, 1)]).collect();
    let model = MetricSpaceModel::from_coords(labels, coords, None).unwrap();
    let space = model.point_space().clone();
    let q = MassFunction::uniform(space.clone()).unwrap();
    let p1 = MassFunction::from_labels(space.clone(), &[("0", ratio(1, 2)), ("1", ratio(1, 4)), ("2", ratio(1, 4))]).unwrap();
    let laws = ProcessSequenceSpec::new(space, vec![p1], q, TailRule::EventuallyEqual(1)).unwrap();
    (model, laws)
}

fn sample_lines(plan: &CouplingPlan, seed: u64, count: u64) -> String {
    let sampler = CouplingSampler::new(plan).unwrap();
    (0..count)
        .map(|i| SampleRecord::new(plan, seed, i, &sampler.sample(&mut rng::stream(seed, i)).unwrap()).to_line())
        .collect::<Vec<_>>()
        .join("\n")
}

fn full_report(plan: &CouplingPlan, seed: u64) -> String {
    let mut report = audit_plan(plan);
    report.merge(mc_agreement(plan, 2_000, seed).unwrap());
    report.provenance.seed = Some(seed);
    report.to_json()
}

fn skorohod_run(
    model: &MetricSpaceModel,
    laws: &ProcessSequenceSpec,
    depth: usize,
    seed: u64,
) -> (SkorohodCoupling, VerificationReport, bool) {
    let coupling = build_skorohod_coupling(model, laws, depth).expect("separable instances build");
    let (mut report, enumerated) = audit_skorohod(&coupling, DEFAULT_ENUMERATION_CAP).unwrap();
    report.merge(mc_distance(&coupling, SAMPLES, seed).unwrap());
    if !enumerated {
        report.merge(mc_decoder_marginals(&coupling, SAMPLES, seed).unwrap());
    }
    (coupling, report, enumerated)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut ok = true;

    let (plans, rejected) = enumerable_specs();
    let mut marginals = Criterion::new("marginal_exactness");
    let mut agreement = Criterion::new("agreement_event");
    let mut windows = Criterion::new("window_certificates");
    let mut ladder = Criterion::new("ladder_properties");
    let mut exact_audit = Criterion::new("plan_audit_other");
    let mut atoms = 0usize;
    for (i, (plan, joint)) in plans.iter().enumerate() {
        let label = format!("spec#{i}");
        marginals.record(&label, joint, JOINT_CHECKS);
        atoms += exact_joint_law(plan, DEFAULT_ENUMERATION_CAP).map(|j| j.law().support_len()).unwrap_or(0);
        let audit = audit_plan(plan);
        windows.record(&label, &audit, WINDOW_CHECKS);
        ladder.record(&label, &audit, LADDER_CHECKS);
        let others: Vec<&str> = audit
            .exact_checks
            .iter()
            .map(|c| c.name.as_str())
            .filter(|n| !WINDOW_CHECKS.contains(n) && !LADDER_CHECKS.contains(n))
            .collect();
        exact_audit.record(&label, &audit, &others);
        let mc = mc_agreement(plan, SAMPLES, SEED + i as u64).unwrap();
        agreement.record(&label, &mc, &["agreement.prefix", "law_of_n.total_variation"]);
    }
    ok &= marginals.print(&format!("{rejected} over-cap specs redrawn; {atoms} joint atoms compared exactly"));
    ok &= agreement.print(&format!("{SAMPLES} samples each; N-law TV < 3*sqrt((M+1)/S)"));
    let partial = plans
        .iter()
        .filter(|(p, _)| p.schedule.windows()[..p.horizon()].iter().any(|&k| k > 0))
        .count();
    ok &= windows.print(&format!(
        "deficit <= 2^-n exactly, non-decreasing, full window at M+1; {partial} with k_n > 0 before the tail"
    ));
    ok &= ladder.print("monotone, mu <= nu, domination, |Q - mu_n| <= 2^(1-n)");
    ok &= exact_audit.print("mixture identities, reconstructions, kernel rows");

    let mut distance = Criterion::new("skorohod_distance");
    let mut decoder = Criterion::new("decoder_marginals");
    let mut partition = Criterion::new("partition_validity");
    let mut gen = rng::stream(SEED, u64::MAX - 1);
    let mut statistical = 0;
    let mut bounded = 0;
    let mut instances: Vec<(String, MetricSpaceModel, ProcessSequenceSpec, usize)> = Vec::new();
    let (line, line_laws) = three_point_line();
    instances.push(("line3".into(), line, line_laws, 2));
    for i in 0..MODELS {
        let (model, laws) = random_model(&mut gen, &ModelBounds::default()).unwrap();
        let depth = gen.gen_range(1..=3);
        instances.push((format!("model#{i}"), model, laws, depth));
    }
    for (i, (label, model, laws, depth)) in instances.iter().enumerate() {
        match std::panic::catch_unwind(|| skorohod_run(model, laws, *depth, SEED + i as u64)) {
            Ok((coupling, report, enumerated)) => {
                if (1..=coupling.plan.horizon()).any(|n| coupling.plan.window(n) > 0) {
                    bounded += 1;
                }
                distance.record(label, &report, &["skorohod.distance", "law_of_n.total_variation"]);
                partition.record(label, &report, TREE_CHECKS);
                if enumerated {
                    decoder.record(label, &report, &["decoder.marginals_exact", "decoder.limit_exact", "digitize.cell_masses"]);
                } else {
                    statistical += 1;
                    let names: Vec<&str> = report
                        .mc_checks
                        .iter()
                        .map(|c| c.name.as_str())
                        .filter(|n| n.starts_with("decoder."))
                        .collect();
                    decoder.record(label, &report, &names);
                }
                let plan_checks: Vec<&str> = report
                    .exact_checks
                    .iter()
                    .map(|c| c.name.as_str())
                    .filter(|n| !n.starts_with("tree.") && !n.starts_with("decoder."))
                    .collect();
                exact_audit.failures.extend(
                    plan_checks
                        .iter()
                        .filter(|n| !report.exact(n).unwrap().passed)
                        .map(|n| format!("{label} {n}")),
                );
            }
            Err(_) => distance.fail(label, "pipeline panicked".into()),
        }
    }
    ok &= distance.print(&format!(
        "{SAMPLES} samples each; d(X_n, X) < 1/k_n for n >= N; {bounded} with a finite bound before the tail"
    ));
    ok &= decoder.print(&format!("{statistical} checked at 3 sigma, the rest by exact enumeration"));
    ok &= partition.print("disjoint, nested, E_0 covered, diam < 1/k, null residuals, null spheres");
    if !exact_audit.failures.is_empty() {
        ok &= exact_audit.print("digit-process plans");
    }

    let mut determinism = Criterion::new("determinism");
    for (i, (plan, _)) in plans.iter().take(10).enumerate() {
        let label = format!("spec#{i}");
        let rebuilt = build_plan(&plan.spec).unwrap();
        determinism.instances += 1;
        if plan_to_json(plan) != plan_to_json(&rebuilt) {
            determinism.failures.push(format!("{label}: plan bytes differ"));
        }
        if sample_lines(plan, SEED, 200) != sample_lines(&rebuilt, SEED, 200) {
            determinism.failures.push(format!("{label}: sample bytes differ"));
        }
        if full_report(plan, SEED) != full_report(&rebuilt, SEED) {
            determinism.failures.push(format!("{label}: report bytes differ"));
        }
    }
    ok &= determinism.print("plans, 200-sample streams and reports rebuilt and compared byte for byte");

    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
