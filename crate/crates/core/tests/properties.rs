use proptest::prelude::*;

use coupling_core::coupling::build_plan;
use coupling_core::measure::MassFunction;
use coupling_core::rng;
use coupling_core::serial::{plan_from_json, plan_to_json};
use coupling_core::skorohod::build_skorohod_coupling;
use coupling_core::verify::{audit_plan, audit_tree, mc_agreement, random_model, random_spec, ModelBounds, SpecBounds};

fn spec_from_seed(seed: u64) -> coupling_core::measure::ProcessSequenceSpec {
    random_spec(&mut rng::stream(seed, 0), &SpecBounds::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_marginals_keep_mass(seed in any::<u64>()) {
        let spec = spec_from_seed(seed);
        for law in spec.members().iter().chain([spec.limit()]) {
            for k in 0..=spec.full_window() {
                prop_assert_eq!(law.window_marginal(k).unwrap().total(), law.total());
            }
        }
    }

    #[test]
    fn window_marginals_are_consistent(seed in any::<u64>()) {
        let spec = spec_from_seed(seed);
        let law = spec.law(1);
        let full = spec.full_window();
        for k in 0..=full {
            for j in 0..=k {
                let direct = law.window_marginal(j).unwrap();
                let nested = law.window_marginal(k).unwrap().window_marginal(j).unwrap();
                prop_assert_eq!(direct, nested);
            }
        }
    }

    #[test]
    fn infimum_grows_with_index(seed in any::<u64>()) {
        let spec = spec_from_seed(seed);
        for k in 0..=spec.full_window() {
            let mut previous: Option<MassFunction> = None;
            for n in 1..=spec.horizon() + 1 {
                let inf = spec.inf_window_density(n, k).unwrap();
                if let Some(p) = &previous {
                    prop_assert!(p.is_dominated_by(&inf));
                }
                previous = Some(inf);
            }
            prop_assert_eq!(previous.unwrap(), spec.limit().window_marginal(k).unwrap());
        }
    }

    #[test]
    fn generated_plans_pass_audit(seed in any::<u64>()) {
        let plan = build_plan(&spec_from_seed(seed)).unwrap();
        let report = audit_plan(&plan);
        prop_assert!(report.exact_passed(), "{:?}", report.failures());
        let reloaded = plan_from_json(&plan_to_json(&plan)).unwrap();
        prop_assert_eq!(audit_plan(&reloaded), report);
    }

    #[test]
    fn sampling_never_breaks_agreement(seed in any::<u64>()) {
        let plan = build_plan(&spec_from_seed(seed)).unwrap();
        let report = mc_agreement(&plan, 200, seed).unwrap();
        prop_assert_eq!(report.mc("agreement.prefix").unwrap().failures, 0);
    }

    #[test]
    fn generated_trees_are_valid(seed in any::<u64>(), depth in 1usize..=4) {
        let (model, laws) = random_model(&mut rng::stream(seed, 0), &ModelBounds::default()).unwrap();
        let coupling = build_skorohod_coupling(&model, &laws, depth).unwrap();
        let report = audit_tree(&model, laws.limit(), &coupling.tree);
        prop_assert!(report.exact_passed(), "{:?}", report.failures());
    }
}
