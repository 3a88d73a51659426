//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hypercolor::cli::{self, SweepConfig};
use hypercolor::finisher::{local_lemma_palette, moser_tardos_color, FinisherConfig};
use hypercolor::gen::{fixture, gen_simple, gen_simple_triangle_free, GenSpec};
use hypercolor::nibble::{telemetry, ColoringState, EngineParams, PracticalOverrides, TelemetrySnapshot};
use hypercolor::partition::{
    check_partition, lemma1_partition, lemma2_partition, triangle_free_refine, Lemma1Config, Lemma2Config,
};
use hypercolor::pipeline::{PipelineConfig, PipelineMode};
use hypercolor::probe::{covered_pair_polysystem, exact_chromatic, kimvu_stats, Chromatic, PolySystem};
use hypercolor::{Error, Girth, Hypergraph};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("soundness", soundness),
        ("structure oracle", structure_oracle),
        ("survival probability", survival_probability),
        ("martingale update", martingale_update),
        ("concentration statistics", concentration_statistics),
        ("finisher", finisher),
        ("partition certification", partition_certification),
        ("telemetry oracle", telemetry_oracle),
        ("trend statistic", trend_statistic),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict} {name} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------
// shared instances

fn suite_spec(n: usize, delta: usize, seed: u64) -> GenSpec {
    GenSpec::new(3, n, delta, seed).triangle_free(true)
}

fn suite_instances() -> Vec<(String, Hypergraph)> {
    let mut out = Vec::new();
    for n in [200, 1000] {
        for delta in [8, 16, 32, 64] {
            for seed in 0..20 {
                let h = gen_simple_triangle_free(&suite_spec(n, delta, seed)).unwrap().graph;
                out.push((format!("n={n} Δ={delta} seed={seed}"), h));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// 1

fn soundness() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = 0;
    let mut bad = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut colors = 0usize;
    for n in [200, 1000] {
        for delta in [8, 16, 32, 64] {
            for seed in 0..20u64 {
                let cfg = cli::RunConfig {
                    instance: Some(cli::InstanceSource::Generate(suite_spec(n, delta, seed))),
                    pipeline: PipelineConfig {
                        mode: PipelineMode::Direct,
                        seed,
                        ..Default::default()
                    },
                    out_dir: Some(dir.path().join(format!("{n}-{delta}-{seed}"))),
                    ..Default::default()
                };
                let start = Instant::now();
                let result = cli::color_run(&cfg);
                let took = start.elapsed();
                slowest = slowest.max(took);
                runs += 1;
                let out = cfg.out_dir.unwrap();
                let verified = result.is_ok() && {
                    let h = hypercolor::format::read(out.join("instance.txt")).unwrap();
                    let text = fs::read_to_string(out.join("coloring.jsonl")).unwrap();
                    let c = cli::read_coloring_jsonl(&text, h.num_vertices()).unwrap();
                    colors = colors.max(c.colors_used());
                    let report = h.verify_coloring(&c).unwrap();
                    report.proper && report.monochromatic_edges.is_empty()
                };
                if !verified || took > Duration::from_secs(60) {
                    bad.push(format!("n={n} Δ={delta} seed={seed}: {:?} in {took:?}", result.err()));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{runs} direct runs, {} failures, slowest {:.2}s, at most {colors} colors{}",
            bad.len(),
            slowest.as_secs_f64(),
            bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------------------
// 2

fn random_small(rng: &mut ChaCha8Rng) -> Hypergraph {
    let n = rng.random_range(3..=9usize);
    let m = rng.random_range(0..=6usize);
    let mut edges = BTreeSet::new();
    for _ in 0..m * 4 {
        if edges.len() == m {
            break;
        }
        let mut e = BTreeSet::new();
        while e.len() < 3 {
            e.insert(rng.random_range(0..n as u32));
        }
        edges.insert(e.into_iter().collect::<Vec<u32>>());
    }
    Hypergraph::new(3, n, edges).unwrap()
}

/// All `i`-subsets of `0..m`, in lexicographic order.
fn subsets_of_size(m: usize, i: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..1 << m)
        .filter(|mask| mask.count_ones() as usize == i)
        .map(|mask| (0..m).filter(|&e| mask >> e & 1 == 1).collect())
        .collect();
    out.sort();
    out
}

fn brute_span(h: &Hypergraph, es: &[usize]) -> usize {
    es.iter()
        .flat_map(|&e| h.edge(e).iter().copied())
        .collect::<BTreeSet<u32>>()
        .len()
}

fn brute_cycles(h: &Hypergraph, i: usize) -> Vec<Vec<usize>> {
    subsets_of_size(h.num_edges(), i)
        .into_iter()
        .filter(|s| brute_span(h, s) <= i * (h.k() - 1))
        .collect()
}

fn brute_girth(h: &Hypergraph, cap: usize) -> Girth {
    (2..cap)
        .find(|&i| i <= h.num_edges() && !brute_cycles(h, i).is_empty())
        .map_or(Girth::AtLeast(cap), Girth::Exact)
}

fn brute_triangles(h: &Hypergraph) -> Vec<[usize; 3]> {
    let meet = |a: usize, b: usize| h.edge(a).iter().filter(|v| h.edge(b).contains(v)).count();
    subsets_of_size(h.num_edges(), 3)
        .into_iter()
        .filter(|s| {
            let common = h
                .edge(s[0])
                .iter()
                .any(|v| h.edge(s[1]).contains(v) && h.edge(s[2]).contains(v));
            meet(s[0], s[1]) == 1 && meet(s[0], s[2]) == 1 && meet(s[1], s[2]) == 1 && !common
        })
        .map(|s| [s[0], s[1], s[2]])
        .collect()
}

fn structure_mismatch(h: &Hypergraph) -> Option<String> {
    let cap = h.num_edges() + 2;
    for i in 2..=h.num_edges() {
        let got = h.find_i_cycles(i, usize::MAX);
        let want = brute_cycles(h, i);
        if got != want {
            return Some(format!("{i}-cycles {got:?} != {want:?}"));
        }
    }
    if h.girth(cap) != brute_girth(h, cap) {
        return Some(format!("girth {:?} != {:?}", h.girth(cap), brute_girth(h, cap)));
    }
    // a smaller cap must truncate the same way
    if h.girth(4) != brute_girth(h, 4) {
        return Some("capped girth differs".into());
    }
    match h.find_triangles(usize::MAX) {
        Ok(t) if t != brute_triangles(h) => Some(format!("triangles {t:?} != {:?}", brute_triangles(h))),
        Ok(_) => None,
        Err(Error::NotSimple(..)) if !h.is_simple() => None,
        Err(e) => Some(format!("find_triangles: {e}")),
    }
}

fn structure_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    let mut with_cycles = 0;
    let mut problems = Vec::new();
    let mut all: Vec<(String, Hypergraph)> = (0..1000)
        .map(|i| (format!("random #{i}"), random_small(&mut rng)))
        .collect();
    for name in [
        "fano",
        "single_edge(3)",
        "single_edge(4)",
        "loose_cycle(2,3)",
        "loose_cycle(3,3)",
        "loose_cycle(4,3)",
        "loose_cycle(5,3)",
        "loose_cycle(3,4)",
        "sunflower(3,3)",
        "sunflower(5,3)",
        "sunflower(4,4)",
    ] {
        all.push((name.to_string(), fixture(name).unwrap()));
    }
    for (name, h) in &all {
        checked += 1;
        if (2..=h.num_edges()).any(|i| !brute_cycles(h, i).is_empty()) {
            with_cycles += 1;
        }
        if let Some(p) = structure_mismatch(h) {
            problems.push(format!("{name}: {p}"));
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{checked} instances ({with_cycles} with cycles) matched exhaustive enumeration{}",
            problems
                .first()
                .map(|p| format!("; first mismatch {p}"))
                .unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------------------
// 3 and 4

fn hand_state(name: &str, q: usize, theta: f64, p_hat: f64) -> ColoringState {
    let h = fixture(name).unwrap();
    let o = PracticalOverrides {
        q: Some(q),
        theta: Some(theta),
        p_hat: Some(p_hat),
        rounds: Some(10),
        ..Default::default()
    };
    let params = EngineParams::practical(h.k(), 8, 1, &o).unwrap();
    ColoringState::new(&h, &params).unwrap()
}

/// Five hand-built states, each with a vertex `u` to observe.
fn survival_fixtures() -> Vec<(&'static str, ColoringState, u32)> {
    let mut out = Vec::new();

    let mut s = hand_state("single_edge(3)", 3, 1.2, 0.6);
    s.set_probabilities(0, &[0.5, 0.3, 0.2]).unwrap();
    s.set_probabilities(1, &[0.6, 0.25, 0.15]).unwrap();
    s.set_probabilities(2, &[0.55, 0.4, 0.05]).unwrap();
    out.push(("single edge, k=3", s, 0));

    let mut s = hand_state("sunflower(4,3)", 3, 1.0, 0.7);
    for v in 1..9u32 {
        let a = 0.2 + 0.05 * v as f64;
        s.set_probabilities(v, &[a, 0.6 - a / 2.0, 0.4 - a / 2.0]).unwrap();
    }
    out.push(("sunflower d=4, k=3", s, 0));

    let mut s = hand_state("sunflower(3,4)", 2, 1.5, 0.6);
    for v in 1..10u32 {
        s.set_probabilities(v, &[0.6, 0.4]).unwrap();
    }
    s.set_probabilities(0, &[0.5, 0.5]).unwrap();
    out.push(("sunflower d=3, k=4", s, 0));

    // colored petal vertices leave color-restricted pairs at the center
    let mut s = hand_state("sunflower(3,3)", 3, 1.0, 0.8);
    s.precolor(&[(1, 0), (3, 0), (5, 1)]).unwrap();
    for v in [0u32, 2, 4, 6] {
        s.set_probabilities(v, &[0.5, 0.3, 0.2]).unwrap();
    }
    out.push(("sunflower with restrictions", s, 0));

    let mut s = hand_state("loose_cycle(4,3)", 3, 1.0, 0.7);
    s.precolor(&[(4, 2)]).unwrap();
    for v in [0u32, 1, 2, 3, 5, 6, 7] {
        let a = 0.1 * (v % 4) as f64 + 0.2;
        s.set_probabilities(v, &[a, 0.65 - a, 0.35]).unwrap();
    }
    out.push(("loose 4-cycle, mixed", s, 2));
    out
}

const TRIALS: usize = 100_000;

fn survival_probability() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    let mut problems = Vec::new();
    for (name, state, u) in survival_fixtures() {
        let w = state.num_colors() as u32;
        let mut survived = vec![0usize; w as usize];
        for trial in 0..TRIALS {
            let scratch = state.draw_round(trial as u64, 0);
            for c in 0..w {
                if scratch.lost[u as usize].binary_search(&c).is_err() {
                    survived[c as usize] += 1;
                }
            }
        }
        for c in 0..w {
            if state.is_lost(u, c) {
                continue;
            }
            let q = state.q_u(u, c);
            let emp = survived[c as usize] as f64 / TRIALS as f64;
            let allowed = 4.0 * (q * (1.0 - q) / TRIALS as f64).sqrt();
            checks += 1;
            if allowed > 0.0 {
                worst = worst.max((emp - q).abs() / allowed);
            }
            if (emp - q).abs() > allowed {
                problems.push(format!(
                    "{name} c={c}: empirical {emp} vs q_u {q} (allowed {allowed:.2e})"
                ));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{checks} (fixture, color) pairs over {TRIALS} draws, worst deviation {:.2} of the 4σ allowance{}",
            worst,
            problems.first().map(|p| format!("; {p}")).unwrap_or_default()
        ),
    )
}

fn martingale_update() -> Outcome {
    // Case A: p / q_u(c) stays below p̂.
    let mut a = hand_state("single_edge(3)", 3, 1.0, 0.6);
    a.set_probabilities(0, &[0.3, 0.4, 0.3]).unwrap();
    a.set_probabilities(1, &[0.5, 0.3, 0.2]).unwrap();
    a.set_probabilities(2, &[0.5, 0.3, 0.2]).unwrap();
    // Case B: p / q_u(c) reaches p̂.
    let mut b = hand_state("single_edge(3)", 3, 1.2, 0.6);
    b.set_probabilities(0, &[0.55, 0.3, 0.15]).unwrap();
    b.set_probabilities(1, &[0.6, 0.3, 0.1]).unwrap();
    b.set_probabilities(2, &[0.6, 0.3, 0.1]).unwrap();

    let mut lines = Vec::new();
    let mut pass = true;
    for (case, state, u, c) in [("A", &a, 0u32, 0u32), ("B", &b, 0, 0)] {
        let p = state.prob(u, c);
        let q = state.q_u(u, c);
        let p_hat = state.params().p_hat;
        let in_case = if case == "A" { p / q < p_hat } else { p / q >= p_hat };
        let w = state.num_colors();
        let (mut sum, mut sq) = (0.0, 0.0);
        for trial in 0..TRIALS {
            let scratch = state.draw_round(trial as u64, 0);
            let next = state.next_probabilities(&scratch).unwrap();
            let x = next[u as usize * w + c as usize];
            sum += x;
            sq += x * x;
        }
        let mean = sum / TRIALS as f64;
        let var = (sq / TRIALS as f64 - mean * mean).max(0.0);
        let se = (var / TRIALS as f64).sqrt();
        let ok = in_case && (mean - p).abs() <= 4.0 * se;
        pass &= ok;
        lines.push(format!(
            "case {case}: p={p} p/q={:.4} mean p'={mean:.5} ({:.2} SE){}",
            p / q,
            (mean - p).abs() / se,
            if in_case { "" } else { " [fixture not in this case]" }
        ));
    }
    outcome(pass, lines.join("; "))
}

// ---------------------------------------------------------------------------
// 5

/// Expectations `E(Z)` and `M_A` for every `A` by summing over all
/// `2^|W|` outcomes. Probabilities must share the denominator `den`.
struct BruteStats {
    expectation: BigRational,
    by_set: HashMap<u32, BigRational>,
    m0: BigRational,
    m1: BigRational,
}

fn brute_force(sys: &PolySystem<BigRational>, den: u64) -> BruteStats {
    let w = sys.ground.len();
    assert!(w <= 16);
    let nums: Vec<u128> = sys
        .prob
        .iter()
        .map(|p| {
            let scaled = p * BigRational::from_integer(BigInt::from(den));
            assert!(scaled.is_integer(), "probability {p} not over {den}");
            u128::try_from(scaled.to_integer()).unwrap()
        })
        .collect();
    let idx = |x: u32| sys.ground.binary_search(&x).unwrap();
    let masks: Vec<u32> = sys
        .sets
        .iter()
        .map(|f| f.iter().fold(0, |m, &x| m | 1 << idx(x)))
        .collect();
    // integer weight of each outcome over den^w
    let mut acc: HashMap<u32, u128> = HashMap::new();
    let mut z_total: u128 = 0;
    for omega in 0u32..1 << w {
        let weight: u128 = (0..w)
            .map(|i| {
                if omega >> i & 1 == 1 {
                    nums[i]
                } else {
                    den as u128 - nums[i]
                }
            })
            .product();
        if weight == 0 {
            continue;
        }
        for &f in &masks {
            let missing = f & !omega;
            if missing == 0 {
                z_total += weight;
            }
            // A with missing ⊆ A ⊆ f and A nonempty
            let free = f & omega;
            let mut s = free;
            loop {
                let a = missing | s;
                if a != 0 {
                    *acc.entry(a).or_default() += weight;
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & free;
            }
        }
    }
    let scale = BigRational::from_integer(BigInt::from(den).pow(w as u32));
    let rat = |x: u128| BigRational::from_integer(BigInt::from(x)) / scale.clone();
    let by_set: HashMap<u32, BigRational> = acc.into_iter().map(|(a, x)| (a, rat(x))).collect();
    let expectation = rat(z_total);
    let zero = BigRational::from_integer(BigInt::from(0));
    let m1 = by_set.values().cloned().fold(zero, |a, b| if b > a { b } else { a });
    let m0 = if expectation > m1 {
        expectation.clone()
    } else {
        m1.clone()
    };
    BruteStats {
        expectation,
        by_set,
        m0,
        m1,
    }
}

fn ratio(a: u64, b: u64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn concentration_statistics() -> Outcome {
    let mut systems: Vec<(String, PolySystem<BigRational>, u64, Option<usize>)> = Vec::new();
    // covered-pair systems, with the covered-pair count for the E(Z) check
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut graphs: Vec<(String, Hypergraph)> = vec![("fano".into(), fixture("fano").unwrap())];
    for seed in 0..30 {
        let n = rng.random_range(9..=16);
        let h = gen_simple(&GenSpec::new(3, n, 3, seed)).unwrap().graph;
        graphs.push((format!("gen n={n} seed={seed}"), h));
    }
    let k4 = gen_simple(&GenSpec::new(4, 16, 2, 3)).unwrap().graph;
    graphs.push(("gen k=4".into(), k4));
    for (name, h) in &graphs {
        for v in 0..h.num_vertices() as u32 {
            let r = h.covered_pairs(v).unwrap().pairs.len();
            if r == 0 {
                continue;
            }
            for m in [2u64, 3, 5] {
                let sys = covered_pair_polysystem(h, v, ratio(1, m)).unwrap();
                if sys.ground.len() <= 16 {
                    systems.push((format!("{name} v={v} m={m}"), sys, m, Some(r)));
                }
            }
        }
    }
    // hand-built families with unequal probabilities
    let hand = [
        (
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
            vec![(1, 2), (1, 3), (2, 3)],
            6,
        ),
        (
            vec![vec![0, 1, 2], vec![2, 3], vec![4]],
            vec![(1, 4), (3, 4), (1, 2), (1, 4), (1, 4)],
            4,
        ),
        (
            vec![vec![0, 1, 2, 3], vec![0, 1, 4, 5], vec![6, 7, 8, 9, 10, 11]],
            vec![(1, 5); 12],
            5,
        ),
        (vec![(0..16).collect()], vec![(1, 2); 16], 2),
    ];
    for (i, (sets, probs, den)) in hand.into_iter().enumerate() {
        let ground: Vec<u32> = sets
            .iter()
            .flatten()
            .copied()
            .collect::<BTreeSet<u32>>()
            .into_iter()
            .collect();
        let prob = ground
            .iter()
            .map(|&x| ratio(probs[x as usize].0, probs[x as usize].1))
            .collect();
        systems.push((format!("hand #{i}"), PolySystem { ground, prob, sets }, den, None));
    }

    let mut problems = Vec::new();
    let mut largest = 0;
    for (name, sys, den, covered) in &systems {
        largest = largest.max(sys.ground.len());
        let brute = brute_force(sys, *den);
        // query every subset M_A is nonzero on, plus one it is zero on
        let mut queries: Vec<Vec<u32>> = brute
            .by_set
            .keys()
            .map(|&a| {
                (0..sys.ground.len())
                    .filter(|&i| a >> i & 1 == 1)
                    .map(|i| sys.ground[i])
                    .collect()
            })
            .collect();
        queries.push(vec![u32::MAX]);
        let stats = kimvu_stats(sys, &queries).unwrap();
        if stats.expectation != brute.expectation || stats.m0 != brute.m0 || stats.m1 != brute.m1 {
            problems.push(format!("{name}: E/M0/M1 differ from enumeration"));
            continue;
        }
        for (a, got) in &stats.queried {
            let mask = a
                .iter()
                .filter_map(|x| sys.ground.binary_search(x).ok())
                .fold(0u32, |m, i| m | 1 << i);
            let want = if a.iter().all(|x| sys.ground.binary_search(x).is_ok()) {
                brute.by_set.get(&mask).cloned().unwrap_or_else(|| ratio(0, 1))
            } else {
                ratio(0, 1)
            };
            if *got != want {
                problems.push(format!("{name}: M_{a:?} = {got} but enumeration gives {want}"));
            }
        }
        if let Some(r) = covered {
            let k = sys.rank() as u32; // 3k - 4 for a simple hypergraph
            let want = ratio(*r as u64, den.pow(k));
            if stats.expectation != want || sys.sets.len() != *r {
                problems.push(format!("{name}: E(Z) = {} but r/m^(3k-4) = {want}", stats.expectation));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{} systems (|W| up to {largest}) equal full-outcome enumeration in exact arithmetic{}",
            systems.len(),
            problems.first().map(|p| format!("; {p}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------------------
// 6

fn finisher() -> Outcome {
    let mut instances = suite_instances();
    for seed in 0..20 {
        let h = gen_simple_triangle_free(&suite_spec(1000, 128, seed)).unwrap().graph;
        instances.push((format!("n=1000 Δ=128 seed={seed}"), h));
    }
    let mut problems = Vec::new();
    let mut most = 0u64;
    for (i, (name, h)) in instances.iter().enumerate() {
        let cfg = FinisherConfig {
            palette: local_lemma_palette(h.k(), h.max_degree()),
            cap: None,
            seed: i as u64,
        };
        match moser_tardos_color(h, &cfg) {
            Ok(done) if h.verify_coloring(&done.coloring).unwrap().proper => most = most.max(done.resamples),
            Ok(_) => problems.push(format!("{name}: improper")),
            Err(e) => problems.push(format!("{name}: {e}")),
        }
    }
    let fano = fixture("fano").unwrap();
    let two = moser_tardos_color(
        &fano,
        &FinisherConfig {
            palette: 2,
            cap: None,
            seed: 0,
        },
    );
    let capped = matches!(
        two,
        Err(Error::ResampleCapExceeded {
            cap: 7000,
            resamples: 7000
        })
    );
    if !capped {
        problems.push(format!("fano with 2 colors: {two:?}"));
    }
    let chi = exact_chromatic(&fano, 5, 1_000_000);
    if chi != Chromatic::Exact(3) {
        problems.push(format!("chromatic number of fano: {chi:?}"));
    }
    outcome(
        problems.is_empty(),
        format!(
            "{} suite instances colored (at most {most} resamples); fano: 2 colors hit the 7000 cap, χ = {chi:?}{}",
            instances.len(),
            problems.first().map(|p| format!("; {p}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------------------
// 7

/// Triangles of a simple hypergraph by checking every triple of pairwise
/// intersecting edges.
fn scan_triangles(h: &Hypergraph) -> usize {
    let m = h.num_edges();
    let meet = |a: usize, b: usize| h.edge(a).iter().filter(|v| h.edge(b).contains(v)).count();
    let mut found = 0;
    for a in 0..m {
        let nb: BTreeSet<usize> = h
            .edge(a)
            .iter()
            .flat_map(|&v| h.incident(v).iter().map(|&e| e as usize))
            .filter(|&e| e > a)
            .collect();
        let nb: Vec<usize> = nb.into_iter().collect();
        for (i, &b) in nb.iter().enumerate() {
            for &c in &nb[i + 1..] {
                let common = h.edge(a).iter().any(|v| h.edge(b).contains(v) && h.edge(c).contains(v));
                if meet(a, b) == 1 && meet(a, c) == 1 && meet(b, c) == 1 && !common {
                    found += 1;
                }
            }
        }
    }
    found
}

fn partition_certification() -> Outcome {
    let mut runs = 0;
    let mut certified = [0usize; 2];
    let mut classes_checked = 0;
    let mut problems = Vec::new();
    for n in [200, 1000] {
        for delta in [16, 32, 64] {
            for seed in 0..5u64 {
                let h = gen_simple(&GenSpec::new(3, n, delta, seed)).unwrap().graph;
                runs += 1;
                let c1 = Lemma1Config {
                    seed,
                    ..Default::default()
                };
                let p1 = lemma1_partition(&h, &c1).unwrap();
                if p1.certified {
                    certified[0] += 1;
                    let check = check_partition(&h, &p1, &c1.bounds(3, h.max_degree()));
                    if !check.passed() {
                        problems.push(format!("lemma1 n={n} Δ={delta} seed={seed}: {:?}", check.problems));
                    }
                }
                let c2 = Lemma2Config {
                    seed,
                    ..Default::default()
                };
                let p2 = lemma2_partition(&h, &c2).unwrap();
                if p2.certified {
                    certified[1] += 1;
                    let check = check_partition(&h, &p2, &c2.bounds(3, h.max_degree()));
                    if !check.passed() {
                        problems.push(format!("lemma2 n={n} Δ={delta} seed={seed}: {:?}", check.problems));
                    }
                }
                match triangle_free_refine(&h) {
                    Ok(r) => {
                        if r.classes.len() > 2 * r.max_out_degree + 1 {
                            problems.push(format!("refine n={n} Δ={delta} seed={seed}: too many classes"));
                        }
                        let covered: usize = r.classes.iter().map(Vec::len).sum();
                        if covered != h.num_vertices() {
                            problems.push(format!(
                                "refine n={n} Δ={delta} seed={seed}: classes cover {covered} vertices"
                            ));
                        }
                        for class in &r.classes {
                            classes_checked += 1;
                            let t = scan_triangles(&h.induced(class).unwrap().graph);
                            if t > 0 {
                                problems.push(format!("refine n={n} Δ={delta} seed={seed}: class with {t} triangles"));
                            }
                        }
                    }
                    Err(e) => problems.push(format!("refine n={n} Δ={delta} seed={seed}: {e}")),
                }
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{runs} instances; certified lemma1 {}/{runs}, lemma2 {}/{runs}, all certified outputs within bounds; {classes_checked} refined classes triangle-free{}",
            certified[0],
            certified[1],
            problems.first().map(|p| format!("; {p}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------------------
// 8

fn snapshot_mismatch(a: &TelemetrySnapshot, b: &TelemetrySnapshot) -> Option<String> {
    let close = |x: f64, y: f64| x == y || (x - y).abs() <= 1e-9 * x.abs().max(y.abs());
    let ints = [
        ("t", a.t == b.t),
        ("uncolored", a.uncolored == b.uncolored),
        ("max_d_i_c", a.max_d_i_c == b.max_d_i_c),
        ("max_d_i", a.max_d_i == b.max_d_i),
        ("max_d_h", a.max_d_h == b.max_d_h),
        ("max_d", a.max_d == b.max_d),
    ];
    let floats = [
        ("max_xi_e", close(a.max_xi_e, b.max_xi_e)),
        ("max_xi_u", close(a.max_xi_u, b.max_xi_u)),
        ("max_xi_u_c", close(a.max_xi_u_c, b.max_xi_u_c)),
        (
            "max_phi",
            a.max_phi.len() == b.max_phi.len() && a.max_phi.iter().zip(&b.max_phi).all(|(&x, &y)| close(x, y)),
        ),
        (
            "max_phi_c",
            a.max_phi_c.len() == b.max_phi_c.len() && a.max_phi_c.iter().zip(&b.max_phi_c).all(|(&x, &y)| close(x, y)),
        ),
        ("min_entropy", close(a.min_entropy, b.min_entropy)),
        ("max_bad_mass", close(a.max_bad_mass, b.max_bad_mass)),
        ("max_mass_deviation", close(a.max_mass_deviation, b.max_mass_deviation)),
    ];
    ints.iter()
        .chain(floats.iter())
        .find(|(_, ok)| !ok)
        .map(|(field, _)| format!("{field}: engine {a:?} vs naive {b:?}"))
}

fn telemetry_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    let mut problems = Vec::new();
    for run in 0..10u64 {
        let k = if run % 3 == 2 { 4 } else { 3 };
        let n = rng.random_range(150..=400);
        let delta = rng.random_range(6..=20);
        let h = gen_simple_triangle_free(&GenSpec::new(k, n, delta, run).triangle_free(true))
            .unwrap()
            .graph;
        let o = PracticalOverrides {
            theta: Some(rng.random_range(0.3..0.9)),
            rounds: Some(40),
            handoff_exponent: Some(None),
            ..Default::default()
        };
        let params = EngineParams::practical(k, h.max_degree(), run, &o).unwrap();
        let mut state = ColoringState::new(&h, &params).unwrap();
        let mut pairs = vec![(telemetry::snapshot(&state), telemetry::recompute(&state))];
        while state.num_uncolored() > 0 && state.round() < 40 {
            state.run_round().unwrap();
            pairs.push((telemetry::snapshot(&state), telemetry::recompute(&state)));
        }
        // ten distinct rounds at random (all of them if the run is shorter)
        let mut rounds: Vec<usize> = (0..pairs.len()).collect();
        for i in 0..rounds.len().min(10) {
            let j = rng.random_range(i..rounds.len());
            rounds.swap(i, j);
        }
        for &t in rounds.iter().take(10) {
            checked += 1;
            if let Some(m) = snapshot_mismatch(&pairs[t].0, &pairs[t].1) {
                problems.push(format!("run {run} round {t}: {m}"));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{checked} snapshots (10 random rounds in each of 10 runs) equal naive recomputation{}",
            problems.first().map(|p| format!("; {p}")).unwrap_or_default()
        ),
    )
}

// ---------------------------------------------------------------------------
// 9

fn trend_statistic() -> Outcome {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("trend");
    fs::create_dir_all(&dir).unwrap();
    let sweep = SweepConfig {
        k: 3,
        n: 1000,
        degrees: vec![16, 32, 64, 128],
        seeds: 10,
        first_seed: 0,
        triangle_free: true,
        density: 1.0,
    };
    let (rows, medians) = cli::sweep(&sweep, &PipelineConfig::default());
    fs::write(dir.join("sweep.csv"), cli::sweep_csv(&rows)).unwrap();
    fs::write(dir.join("medians.csv"), cli::medians_csv(&medians)).unwrap();
    let all_proper = rows.iter().all(|r| r.proper);
    let at = |d: usize| medians.iter().find(|m| m.delta == d).and_then(|m| m.median_ratio);
    let (lo, hi) = (at(16), at(128));
    let pass = all_proper && matches!((lo, hi), (Some(lo), Some(hi)) if hi <= lo);
    let table: Vec<String> = medians
        .iter()
        .map(|m| {
            format!(
                "Δ={} ratio {:.3} (realized-Δ ratio {:.3}, colors {})",
                m.delta,
                m.median_ratio.unwrap_or(f64::NAN),
                m.median_ratio_realized.unwrap_or(f64::NAN),
                m.median_colors.unwrap_or(f64::NAN)
            )
        })
        .collect();
    outcome(
        pass,
        format!(
            "{}; all proper: {all_proper}; csv in {}",
            table.join(", "),
            dir.display()
        ),
    )
}

// ---------------------------------------------------------------------------
// 10

fn run_binary(args: &[&str], threads: &str) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_hypercolor"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap_or(-1)
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let instance = root.join("given.txt");
    hypercolor::format::write(&instance, &gen_simple(&GenSpec::new(3, 400, 24, 5)).unwrap().graph).unwrap();
    let configs = [
        serde_json::json!({
            "instance": {"generate": {"k": 3, "n": 1000, "max_degree": 32, "triangle_free": true, "seed": 3}},
            "pipeline": {"mode": "direct", "seed": 11},
            "write_state": true
        }),
        serde_json::json!({
            "instance": {"file": instance},
            "pipeline": {"mode": "full", "seed": 4}
        }),
        serde_json::json!({
            "instance": {"fixture": "fano"},
            "pipeline": {"mode": "auto", "seed": 0}
        }),
        serde_json::json!({
            "instance": {"generate": {"k": 4, "n": 500, "max_degree": 12, "triangle_free": true, "seed": 9}},
            "pipeline": {"seed": 2, "engine": {"resample_on_breach": true}}
        }),
    ];
    let mut problems = Vec::new();
    let mut files = 0;
    for (i, cfg) in configs.iter().enumerate() {
        let cfg_path = root.join(format!("cfg{i}.json"));
        fs::write(&cfg_path, cfg.to_string()).unwrap();
        // both runs write to the same path so that config.json matches too
        let out = root.join(format!("run{i}"));
        let mut snapshots = Vec::new();
        for threads in ["1", "4"] {
            let code = run_binary(
                &[
                    "color",
                    "--config",
                    cfg_path.to_str().unwrap(),
                    "-o",
                    out.to_str().unwrap(),
                ],
                threads,
            );
            if code != 0 {
                problems.push(format!("config {i}: exit code {code}"));
            }
            snapshots.push(dir_contents(&out));
            fs::remove_dir_all(&out).unwrap();
        }
        let names: Vec<&str> = snapshots[0].iter().map(|(n, _)| n.as_str()).collect();
        for needed in [
            "config.json",
            "instance.txt",
            "coloring.jsonl",
            "telemetry.csv",
            "summary.json",
        ] {
            if !names.contains(&needed) {
                problems.push(format!("config {i}: {needed} missing"));
            }
        }
        files += snapshots[0].len();
        if snapshots[0] != snapshots[1] {
            let differing: Vec<&str> = snapshots[0]
                .iter()
                .zip(&snapshots[1])
                .filter(|(a, b)| a != b)
                .map(|(a, _)| a.0.as_str())
                .collect();
            problems.push(format!("config {i}: {differing:?} differ between runs"));
        }
    }
    let sa = root.join("sweep-a");
    let sb = root.join("sweep-b");
    let sweep = |out: &Path, threads| {
        run_binary(
            &[
                "sweep",
                "--n",
                "300",
                "--degrees",
                "8,16",
                "--seeds",
                "3",
                "-o",
                out.to_str().unwrap(),
            ],
            threads,
        )
    };
    if sweep(&sa, "1") != 0 || sweep(&sb, "3") != 0 {
        problems.push("sweep failed".into());
    } else {
        for f in ["sweep.csv", "medians.csv"] {
            files += 1;
            if fs::read(sa.join(f)).unwrap() != fs::read(sb.join(f)).unwrap() {
                problems.push(format!("sweep {f} differs"));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{} configs and a sweep run twice in separate processes (1 vs several threads): {files} files byte-identical{}",
            configs.len(),
            problems.first().map(|p| format!("; {p}")).unwrap_or_default()
        ),
    )
}
