mod support;

use bindkit::fsm::Signal;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{audit_binding, catalog, random_trace, Driver};

fn check(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trace = random_trace(&mut rng, 50);
    for (name, params) in catalog() {
        let audit = audit_binding(name, &params, &trace);
        prop_assert!(audit.violations.is_empty(), "{} {}: {:?}", name, params, audit.violations);
        let log = Driver::catalog(name, &params, false).run(&trace);
        prop_assert_eq!(audit.created, Driver::count(&log, Signal::Started), "{} {} creations", name, params);
        prop_assert_eq!(audit.done, Driver::count(&log, Signal::Ended), "{} {} done", name, params);
        prop_assert_eq!(audit.discarded, Driver::count(&log, Signal::Cancelled), "{} {} discarded", name, params);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn one_command_per_execution(seed in any::<u64>()) {
        check(seed)?;
    }
}
