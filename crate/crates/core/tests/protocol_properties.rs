use adversim_core::adversary::Pair;
use adversim_core::complex;
use adversim_core::engine::{self, FullInformation};
use adversim_core::protocols::gossip::{self, Gossip};
use adversim_core::protocols::register;
use adversim_core::{AdversarySpec, PairSchedule};
use proptest::prelude::*;

fn spec_name() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("tp"), Just("tp-complete"), Just("sc"), Just("kcc:2"), Just("tp-pairs:RR")]
}

/// A random fair sweep: every pair once, in shuffled order.
fn schedule() -> impl Strategy<Value = (usize, PairSchedule)> {
    (2usize..=4).prop_flat_map(|n| {
        Just(Pair::all(n))
            .prop_shuffle()
            .prop_map(move |pairs| (n, PairSchedule::explicit(n, pairs).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gossip_progress_on_tp_traces(n in 2usize..=8, seed: u64) {
        let spec = AdversarySpec::tp(n).unwrap();
        let inputs: Vec<u64> = (0..n as u64).collect();
        let trace = engine::run(&Gossip, &spec, gossip::emulation_rounds(n), &inputs, seed).unwrap();
        prop_assert_eq!(gossip::check_gossip_progress(&trace), Ok(()));
        for r in 1..trace.states.len() {
            for (before, after) in trace.states[r - 1].iter().zip(&trace.states[r]) {
                prop_assert!(before.s.is_subset(after.s));
                prop_assert!(after.s.contains(after.owner));
            }
        }
        prop_assert!(gossip::check_emulation(&trace).is_ok());
    }

    #[test]
    fn seeded_traces_are_reproducible(n in 1usize..=5, spec in spec_name(), rounds in 0usize..5, seed: u64) {
        prop_assume!(n >= 2 || spec != "kcc:2" && spec != "tp-pairs:RR");
        let spec = AdversarySpec::parse(n, spec).unwrap();
        let inputs: Vec<u64> = (0..n as u64).map(|x| x * 10).collect();
        let p = FullInformation { output_after: Some(rounds) };
        let json = || {
            let t = engine::run(&p, &spec, rounds, &inputs, seed).unwrap();
            serde_json::to_string(&t.to_record(Some("full-info"), true)).unwrap()
        };
        prop_assert_eq!(json(), json());
    }

    #[test]
    fn register_runs_are_legal(n in 2usize..=5, writes in 1u64..=3, seed: u64) {
        let budget = register::default_budget(n, writes);
        let (outcome, trace) = register::simulate_rwwf(n, writes, budget, seed).unwrap();
        prop_assert!(outcome.all_done);
        prop_assert!(register::validate_swsr_histories(&outcome));
        prop_assert!(register::certify_king_soundness(&trace).is_ok());
        for h in &outcome.processors {
            let seqs: Vec<u64> = h.writes.iter().map(|w| w.seq).collect();
            prop_assert!(seqs.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(h.reads.len() as u64, writes);
        }
    }

    #[test]
    fn splits_stay_chromatic((n, s) in schedule(), k in 0usize..=6) {
        let inputs: Vec<u64> = (0..n as u64).collect();
        let c = complex::build(n, &s, k, &inputs).unwrap();
        prop_assert_eq!(c.tops.len() as u64, 3u64.pow(k as u32));
        prop_assert!(complex::check_chromatic(&c));
        prop_assert!(complex::check_sperner(&c));
        prop_assert!(complex::check_carriers(&c));
        for v in &c.vertices {
            prop_assert!(v.carrier.contains(v.color));
        }
    }
}
