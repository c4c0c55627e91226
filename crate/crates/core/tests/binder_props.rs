mod support;

use std::cell::Cell;
use std::rc::Rc;

use bindkit::binder::{binder, BindError, RoutineKind, RoutineStage};
use bindkit::binding::BindingContext;
use bindkit::event::{Event, EventKind, NodeId, Point};
use bindkit::interaction::{self, PointData};
use proptest::prelude::*;
use support::{binder_exhaustive, binder_oracle, routine, Noop};

type Stage = RoutineStage<PointData, Noop>;

/// Applies `seq` from an empty stage, stopping at the first rejection.
fn apply_all(seq: &[RoutineKind]) -> (Result<Stage, (usize, BindError)>, Vec<Stage>) {
    let mut stages = vec![Stage::new()];
    for (i, &k) in seq.iter().enumerate() {
        match stages.last().unwrap().apply(routine(k, i as u32)) {
            Ok(s) => stages.push(s),
            Err(e) => return (Err((i, e)), stages),
        }
    }
    (Ok(stages.last().unwrap().clone()), stages)
}

fn kinds() -> impl Strategy<Value = RoutineKind> {
    proptest::sample::select(RoutineKind::ALL.to_vec())
}

#[test]
fn exhaustive_sequences_match_oracle() {
    let (checked, bindable) = binder_exhaustive(5).unwrap();
    assert!(checked > 100_000 && bindable > 0, "{checked} {bindable}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn apply_never_mutates(seq in proptest::collection::vec(kinds(), 0..=6), extra in kinds()) {
        let (_, stages) = apply_all(&seq);
        let before: Vec<_> = stages.iter().map(|s| s.summary()).collect();
        for s in &stages {
            let _ = s.apply(routine(extra, 99));
        }
        let after: Vec<_> = stages.iter().map(|s| s.summary()).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn rejection_point_matches_oracle(seq in proptest::collection::vec(kinds(), 0..=8)) {
        let (res, _) = apply_all(&seq);
        let (violation, complete) = binder_oracle(&seq);
        match res {
            Ok(stage) => {
                prop_assert_eq!(violation, None);
                prop_assert_eq!(stage.bind(&mut BindingContext::new()).is_ok(), complete);
            }
            Err((i, _)) => prop_assert_eq!(violation, Some(i)),
        }
    }

    #[test]
    fn branches_are_independent(seq in proptest::collection::vec(kinds(), 0..=4), a in kinds(), b in kinds()) {
        let (res, _) = apply_all(&seq);
        let Ok(base) = res else { return Ok(()) };
        let sa = base.apply(routine(a, 1)).ok().map(|s| s.summary());
        let sb = base.apply(routine(b, 2)).ok().map(|s| s.summary());
        let sa2 = base.apply(routine(a, 1)).ok().map(|s| s.summary());
        prop_assert_eq!(sa, sa2);
        if a == b {
            prop_assert_eq!(sb.is_some(), base.apply(routine(a, 1)).is_ok());
        }
    }
}

#[test]
fn partial_binders_bind_independently() {
    let (a, b) = (Rc::new(Cell::new(0)), Rc::new(Cell::new(0)));
    let base = binder().using(interaction::click).to_produce(|_| Noop);
    let (ca, cb) = (a.clone(), b.clone());
    let left = base.on(["n1"]).end(move |_, _| ca.set(ca.get() + 1));
    let right = base.on(["n2"]).end(move |_, _| cb.set(cb.get() + 1));
    assert!(base.stage().summary().nodes.is_empty());
    assert_eq!(base.stage().summary().hooks, [0; 6]);

    let mut ctx = BindingContext::new();
    left.bind(&mut ctx).unwrap();
    right.bind(&mut ctx).unwrap();
    assert!(matches!(base.bind(&mut ctx), Err(BindError::Incomplete(m)) if m == ["on"]));
    let click = |t, node: &str| {
        for kind in [EventKind::PointerPress, EventKind::PointerRelease] {
            ctx.dispatch(&Event::pointer(kind, t, NodeId::from(node), Point::new(1.0, 1.0), 0)).unwrap();
        }
    };
    let mut click = click;
    click(0, "n1");
    click(10, "n1");
    click(20, "n2");
    assert_eq!((a.get(), b.get()), (2, 1));
}
