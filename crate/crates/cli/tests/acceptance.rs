//! Acceptance gate: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p adversim --test acceptance`.

use std::process::Command;
use std::time::{Duration, Instant};

use adversim_core::complex::{self, CrossValidation};
use adversim_core::engine::{self, run_exhaustive, ExhaustiveLimits, Verdict};
use adversim_core::oracle;
use adversim_core::protocols::boundary::find_boundary_witness;
use adversim_core::protocols::gossip::{self, Gossip, Snapshot};
use adversim_core::protocols::pairs::{self, PairFilter};
use adversim_core::protocols::register::{self, RegisterProtocol};
use adversim_core::{AdversarySpec, PairSchedule};

type CheckResult = Result<String, String>;

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> CheckResult,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_hold<P: engine::Protocol>(v: Verdict<P>, expected: u64) -> Result<(), String> {
    match v {
        Verdict::AllHold { executions } if executions == expected => Ok(()),
        Verdict::AllHold { executions } => Err(format!("explored {executions}, expected {expected}")),
        Verdict::Counterexample { trace } => Err(format!("counterexample {:?}", trace.origin)),
    }
}

fn limits() -> ExhaustiveLimits {
    ExhaustiveLimits::default()
}

fn ids(n: usize) -> Vec<u64> {
    (0..n as u64).collect()
}

const SEEDED_RUNS: u64 = 100_000;

fn tournament_facts() -> CheckResult {
    let mut counts = Vec::new();
    for n in 1..=5 {
        let r = oracle::tournament_facts_oracle(n).map_err(|e| e.to_string())?;
        ensure(r.all_pass(), || format!("n={n}: failing tournaments {:?}", r.failures))?;
        counts.push(r.tournaments);
    }
    ensure(counts == [1, 2, 8, 64, 1024], || format!("tournament counts {counts:?}"))?;
    Ok(format!("tournaments per n=1..5: {counts:?}, zero failures"))
}

fn tp_complete_emulation() -> CheckResult {
    let spec = AdversarySpec::tp(2).map_err(|e| e.to_string())?;
    let v = run_exhaustive(&Gossip, &spec, 3, &ids(2), &limits(), |t| gossip::check_emulation(t).is_ok())
        .map_err(|e| e.to_string())?;
    all_hold(v, 27)?;
    for n in 3..=6 {
        for seed in 0..SEEDED_RUNS {
            gossip::emulate_tp_complete_over_tp(n, seed).map_err(|e| format!("n={n} seed={seed}: {e}"))?;
        }
    }
    Ok(format!("n=2 exhaustive 27 executions; {SEEDED_RUNS} seeded runs each for n=3..6"))
}

fn snapshot() -> CheckResult {
    let spec = AdversarySpec::tp_complete(3).map_err(|e| e.to_string())?;
    let v = run_exhaustive(&Snapshot, &spec, 3, &ids(3), &limits(), |t| gossip::check_snapshot(t).is_ok())
        .map_err(|e| e.to_string())?;
    all_hold(v, 19_683)?;
    for n in 4..=6 {
        for seed in 0..SEEDED_RUNS {
            gossip::snapshot_over_tp_complete(n, seed).map_err(|e| format!("n={n} seed={seed}: {e}"))?;
        }
    }
    Ok(format!("n=3 exhaustive 19683 executions; {SEEDED_RUNS} seeded runs each for n=4..6"))
}

fn king_theorem() -> CheckResult {
    let spec = AdversarySpec::tp_complete(3).map_err(|e| e.to_string())?;
    for writes in 1..=3 {
        let v = run_exhaustive(&RegisterProtocol::new(3, writes), &spec, 3, &[0; 3], &limits(), |t| {
            register::certify_king_soundness(t).is_ok()
        })
        .map_err(|e| e.to_string())?;
        all_hold(v, 19_683).map_err(|e| format!("soundness, {writes} writes: {e}"))?;
    }

    let report = oracle::king_liveness_search(3, 8).map_err(|e| e.to_string())?;
    let l_star = report
        .l_star
        .ok_or_else(|| format!("no L* within depth 8: {:?}", report.kingless_executions))?;

    // The protocol must agree: a king round in every execution of length
    // L*, and some execution without one at L* - 1.
    let fired = |t: &engine::ExecutionTrace<RegisterProtocol>| {
        (1..t.states.len()).any(|r| t.states[r].iter().any(|s| s.completed_in(r).is_some()))
    };
    let p = RegisterProtocol::new(3, 1);
    let v = run_exhaustive(&p, &spec, l_star, &[0; 3], &limits(), fired).map_err(|e| e.to_string())?;
    all_hold(v, 27u64.pow(l_star as u32)).map_err(|e| format!("protocol liveness at {l_star}: {e}"))?;
    if l_star > 1 {
        let v = run_exhaustive(&p, &spec, l_star - 1, &[0; 3], &limits(), fired).map_err(|e| e.to_string())?;
        ensure(!v.holds(), || format!("protocol fires earlier than L* = {l_star}"))?;
    }
    Ok(format!(
        "soundness over 3 x 19683 executions; L* = {l_star} (king-free executions per depth {:?}, distinct states {:?})",
        report.kingless_executions, report.kingless_states
    ))
}

fn register_legality() -> CheckResult {
    let (n, writes) = (4, 3);
    let budget = register::default_budget(n, writes);
    let mut longest = 0;
    for seed in 0..10_000 {
        let (o, t) = register::simulate_rwwf(n, writes, budget, seed).map_err(|e| e.to_string())?;
        ensure(o.all_done, || format!("seed {seed}: not done within {budget} rounds"))?;
        ensure(register::validate_swsr_histories(&o), || {
            format!("seed {seed}: illegal history at {:?}", register::first_history_violation(&o))
        })?;
        register::certify_king_soundness(&t).map_err(|e| format!("seed {seed}: {e}"))?;
        longest = longest.max(o.rounds_run);
    }
    Ok(format!("10000 runs legal and done within B = {budget}; longest run {longest} rounds"))
}

fn subdivision() -> CheckResult {
    let fig = PairSchedule::parse(3, "1-2,0-1,0-2").map_err(|e| e.to_string())?;
    let c = complex::build(3, &fig, 3, &ids(3)).map_err(|e| e.to_string())?;
    ensure(c.tops.len() == 27, || format!("{} tops", c.tops.len()))?;
    let mut checked = 0;
    for n in 1..=4 {
        let schedule = (n >= 2).then(|| PairSchedule::round_robin(n).expect("n >= 2"));
        for k in 0..=6 {
            let c = match &schedule {
                Some(s) => complex::build(n, s, k, &ids(n)).map_err(|e| e.to_string())?,
                None if k == 0 => complex::initial_complex(n, &ids(n)),
                None => continue,
            };
            ensure(c.tops.len() as u64 == 3u64.pow(k as u32), || format!("n={n} k={k}: {} tops", c.tops.len()))?;
            ensure(
                complex::check_chromatic(&c) && complex::check_sperner(&c) && complex::check_carriers(&c),
                || format!("n={n} k={k}: structural check failed"),
            )?;
            checked += 1;
        }
    }
    // Each side of the triangle after two rounds of round-robin splits.
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let only = PairSchedule::round_robin(3).map_err(|e| e.to_string())?;
        let c = complex::build(3, &only, 6, &ids(3)).map_err(|e| e.to_string())?;
        let path = complex::boundary_path(&c, i, j).ok_or_else(|| format!("side {i}{j} is not alternating"))?;
        ensure(path.len() == 10, || format!("side {i}{j} has {} vertices", path.len()))?;
    }
    Ok(format!("27 tops for the 1-2,0-1,0-2 schedule; {checked} (n, k) complexes chromatic and Sperner; sides alternate"))
}

fn bijection() -> CheckResult {
    let mut cases = Vec::new();
    for (n, max_k) in [(2, 4), (3, 4), (4, 3)] {
        let mut schedules = vec![PairSchedule::round_robin(n).map_err(|e| e.to_string())?];
        if n == 3 {
            schedules.push(PairSchedule::parse(3, "1-2,0-1,0-2").map_err(|e| e.to_string())?);
        }
        for s in &schedules {
            for k in 0..=max_k {
                let c = complex::build(n, s, k, &ids(n)).map_err(|e| e.to_string())?;
                let cv = complex::cross_validate(&c, s, k, &ids(n)).map_err(|e| e.to_string())?;
                let expected = 3u64.pow(k as u32);
                ensure(cv == CrossValidation::Bijection { executions: expected }, || {
                    format!("n={n} k={k} schedule {s}: {cv:?}")
                })?;
                cases.push((n, k));
            }
        }
    }
    Ok(format!("{} (n, k, schedule) cases, each a bijection", cases.len()))
}

fn translations() -> CheckResult {
    let n = 3;
    let m = pairs::pair_rounds(n);
    ensure(m == 3, || format!("{m} rounds"))?;
    let schedule = PairSchedule::round_robin(n).map_err(|e| e.to_string())?;
    let filter = PairFilter {
        schedule: schedule.clone(),
    };
    let spec = AdversarySpec::tp_pairs(n, schedule.clone()).map_err(|e| e.to_string())?;
    let v = run_exhaustive(&filter, &spec, m, &ids(n), &limits(), |t| pairs::check_collection(t).is_ok())
        .map_err(|e| e.to_string())?;
    all_hold(v, 27)?;
    let spec = AdversarySpec::tp_complete(n).map_err(|e| e.to_string())?;
    let v = run_exhaustive(&filter, &spec, m, &ids(n), &limits(), |t| {
        pairs::check_projection(t, &schedule).is_ok()
    })
    .map_err(|e| e.to_string())?;
    all_hold(v, 19_683)?;
    Ok(format!("{m} rounds; collection over 27 TP-pairs executions, projection over 19683 TP-complete executions"))
}

fn boundary() -> CheckResult {
    let spec = AdversarySpec::parse(3, "tp-complete-except:0-1").map_err(|e| e.to_string())?;
    let (w, nodes) = find_boundary_witness(&spec, 8, 1_000_000).map_err(|e| e.to_string())?;
    let w = w.ok_or("no branch keeps both endpoints from firing")?;
    for (r, s) in w.trace.states.iter().enumerate().skip(1) {
        ensure(s[0].completed_in(r).is_none() && s[1].completed_in(r).is_none(), || {
            format!("endpoint fires in round {r}")
        })?;
    }
    let rcgs: Vec<String> = w
        .trace
        .rcgs
        .iter()
        .map(|g| format!("{:?}", g.edges().collect::<Vec<_>>()))
        .collect();
    let unique: std::collections::BTreeSet<&String> = rcgs.iter().collect();
    Ok(format!(
        "witness branch {:?} ({} nodes searched); RCGs {}",
        w.branch,
        nodes,
        unique.into_iter().cloned().collect::<Vec<_>>().join(" | ")
    ))
}

fn determinism() -> CheckResult {
    let bin = env!("CARGO_BIN_EXE_adversim");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs: &[&[&str]] = &[
        &["--n", "3", "--spec", "tp-complete", "--protocol", "snapshot", "--rounds", "3", "--seed", "7"],
        &["--n", "5", "--spec", "tp", "--protocol", "gossip", "--seed", "11", "--dump-states"],
        &["--n", "4", "--spec", "tp-complete", "--protocol", "register", "--writes", "2", "--seed", "3"],
        &["--n", "3", "--spec", "sc", "--protocol", "full-info", "--rounds", "4", "--seed", "0", "--dump-states"],
        &["--n", "4", "--spec", "tp-pairs", "--protocol", "pairs-collect", "--seed", "5"],
        &["--n", "4", "--spec", "kcc:3", "--protocol", "full-info", "--rounds", "3", "--seed", "9"],
    ];
    for (k, flags) in configs.iter().enumerate() {
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let path = dir.path().join(format!("trace-{k}-{attempt}.json"));
            let status = Command::new(bin)
                .arg("simulate")
                .args(*flags)
                .arg("--out")
                .arg(&path)
                .arg("--quiet")
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), || format!("{flags:?} exited with {status}"))?;
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(outputs[0] == outputs[1], || format!("{flags:?} produced different traces"))?;
    }
    Ok(format!("{} simulate configurations, byte-identical reruns", configs.len()))
}

fn main() {
    let minutes = Duration::from_secs(600);
    let criteria = [
        Criterion { id: 1, name: "tournament facts", limit: Duration::from_secs(5), run: tournament_facts },
        Criterion { id: 2, name: "TP-complete emulation over TP", limit: Duration::from_secs(60), run: tp_complete_emulation },
        Criterion { id: 3, name: "snapshot over TP-complete", limit: Duration::from_secs(60), run: snapshot },
        Criterion { id: 4, name: "king soundness and liveness", limit: minutes, run: king_theorem },
        Criterion { id: 5, name: "register simulation legality", limit: Duration::from_secs(120), run: register_legality },
        Criterion { id: 6, name: "subdivision structure", limit: Duration::from_secs(10), run: subdivision },
        Criterion { id: 7, name: "complex/execution bijection", limit: Duration::from_secs(60), run: bijection },
        Criterion { id: 8, name: "pair translation round counts", limit: Duration::from_secs(10), run: translations },
        Criterion { id: 9, name: "strongest-adversary boundary", limit: minutes, run: boundary },
        Criterion { id: 10, name: "trace determinism", limit: Duration::from_secs(120), run: determinism },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let took = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if took <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; took {took:.1?}, limit {:?}", c.limit)),
            Err(e) => (false, e),
        };
        failures += !ok as usize;
        println!(
            "[{}] criterion {:>2} {}: {detail} ({:.2} s)",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            took.as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
