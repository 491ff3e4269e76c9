//! Acceptance suite. Runs every criterion, prints one line each and exits
//! nonzero if any of them fails.

mod support;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use freefold::decide::{bourdon_vfbc, decide_vfbc, Flags, Verdict};
use freefold::{
    can_complete, construct_malnormal, full_covers, is_malnormal, one_relator_betti, pullback,
    verify_certificate, AvoidanceProblem, Hierarchy, Index, StallingsGraph, Subgroup, Word,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{subgroup, DoubleCoset};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn free_betti() -> Outcome {
    for n in 1..=10u64 {
        let report = Hierarchy::parse(&format!("(free {n})"))
            .map_err(|e| e.to_string())?
            .betti()
            .map_err(|e| e.to_string())?;
        ensure(report.b(1) == q(n as i64 - 1), || format!("b1 of F_{n} is {}", report.b(1)))?;
        for (&i, b) in &report.betti {
            ensure(i == 1 || *b == q(0), || format!("b{i} of F_{n} is {b}"))?;
        }
    }
    Ok("n = 1..10".into())
}

fn surface_betti() -> Outcome {
    for g in 2..=5u64 {
        let text = format!("(amal (free {g}) (free {g}) over 1)");
        let report = Hierarchy::parse(&text)
            .map_err(|e| e.to_string())?
            .betti()
            .map_err(|e| e.to_string())?;
        let expected = q(2 * g as i64 - 2);
        ensure(report.b(1) == expected, || format!("{text}: b1 = {}", report.b(1)))?;
        let one_relator = one_relator_betti(2 * g).map_err(|e| e.to_string())?;
        ensure(one_relator.b(1) == expected, || format!("one-relator on {} gens", 2 * g))?;
    }
    Ok("g = 2..5".into())
}

fn bourdon_table() -> Outcome {
    let mut cases = 0;
    for p in 5..=12u64 {
        for qq in 2..=12u64 {
            let got = bourdon_vfbc(p, qq).map_err(|e| e.to_string())?;
            ensure(got == (qq + 1 < p), || format!("X_({p},{qq}) gave {got}"))?;
            cases += 1;
        }
    }
    ensure(cases == 88, || format!("{cases} cases"))?;
    Ok(format!("{cases} cases"))
}

fn decision_table() -> Outcome {
    for bits in 0u32..16 {
        let [h, v, c, b] = [0, 1, 2, 3].map(|i| bits >> i & 1 == 1);
        let expected = if !b {
            Verdict::No
        } else if h && v && c {
            Verdict::Yes
        } else {
            Verdict::Inconclusive
        };
        let got = decide_vfbc(Flags::new(h, v, c, b, false))
            .map_err(|e| e.to_string())?
            .verdict;
        ensure(got == expected, || format!("({h},{v},{c},{b}) gave {got}"))?;
    }
    let bs = decide_vfbc(Flags::new(false, false, true, true, false)).unwrap();
    ensure(bs.verdict == Verdict::Inconclusive, || "BS row".into())?;
    Ok("16 rows".into())
}

fn random_generators(rng: &mut ChaCha8Rng) -> (u8, Vec<Word>) {
    let rank = rng.gen_range(1..=3u8);
    let count = rng.gen_range(1..=5);
    let gens = (0..count)
        .map(|_| {
            let len = rng.gen_range(0..=10);
            let letters: Vec<freefold::Letter> = (0..len)
                .map(|_| freefold::Letter::from_direction(rng.gen_range(0..2 * rank as usize)))
                .collect();
            Word::from_letters(rank, letters).unwrap()
        })
        .collect();
    (rank, gens)
}

fn folding_confluence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..1000 {
        let (rank, gens) = random_generators(&mut rng);
        let wedge = StallingsGraph::wedge(&gens, rank);
        let reference = wedge.fold().core();
        for order in 0..20 {
            let other = wedge.fold_in_order(|n| rng.gen_range(0..n)).core();
            ensure(other == reference, || format!("case {case}, order {order}"))?;
        }
    }
    Ok("1000 sets x 20 orders".into())
}

fn intersection_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut classes = 0;
    for case in 0..200 {
        let h = support::random_subgroup(&mut rng, 2, 2, 4, 6);
        let k = support::random_subgroup(&mut rng, 2, 2, 4, 6);
        let brute = support::brute_conjugate_meetings(&h, &k, 6, 12, false);
        let found: Vec<Word> = pullback(&h, &k)
            .map_err(|e| e.to_string())?
            .iter()
            .filter(|c| c.non_contractible)
            .map(|c| c.conjugator())
            .collect();
        let describe = || format!("case {case}: H={:?} K={:?}", h.basis(), k.basis());
        ensure(found.len() == brute.len(), describe)?;
        for g in &found {
            let dc = DoubleCoset::new(&h, g, &k);
            ensure(brute.iter().filter(|b| dc.contains(b)).count() == 1, describe)?;
        }
        classes += found.len();
    }
    Ok(format!("200 pairs, {classes} classes"))
}

fn malnormal_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases: Vec<Subgroup> = (0..200)
        .map(|_| support::random_subgroup(&mut rng, 2, 2, 4, 6))
        .collect();
    cases.push(subgroup("ab", 2));
    cases.push(subgroup("a,baB", 2));
    let mut positives = 0;
    for h in &cases {
        let ours = is_malnormal(h);
        ensure(ours == support::brute_is_malnormal(h, 6, 12), || {
            format!("{:?}: is_malnormal = {ours}", h.basis())
        })?;
        positives += ours as usize;
    }
    ensure(is_malnormal(&subgroup("ab", 2)), || "<ab>".into())?;
    ensure(!is_malnormal(&subgroup("a,baB", 2)), || "<a,baB>".into())?;
    Ok(format!("{} subgroups, {positives} malnormal", cases.len()))
}

fn avoid_sets() -> Vec<(&'static str, Vec<Subgroup>)> {
    [
        ("{<a>}", vec!["a"]),
        ("{<b>}", vec!["b"]),
        ("{<a>,<b>}", vec!["a", "b"]),
        ("{<a,baB>}", vec!["a,baB"]),
        ("{<ab>,<aab>}", vec!["ab", "aab"]),
    ]
    .into_iter()
    .map(|(name, list)| (name, list.iter().map(|s| subgroup(s, 2)).collect()))
    .collect()
}

fn end_to_end() -> Outcome {
    let mut count = 0;
    for (name, avoid) in avoid_sets() {
        for n in 1..=3 {
            let problem = AvoidanceProblem::new(2, n, avoid.clone(), 0);
            let cert = construct_malnormal(&problem).map_err(|e| format!("{name}, n={n}: {e}"))?;
            let recheck = verify_certificate(&cert, &avoid);
            let expected = 2 + avoid.len();
            ensure(recheck.checks.len() == expected && recheck.all_checks_pass(), || {
                format!("{name}, n={n}: {:?}", recheck.checks)
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} certificates"))
}

fn nielsen_schreier() -> Outcome {
    let rose = Subgroup::full(2);
    let chi_rose = rose.graph().euler_characteristic();
    let mut total = 0;
    for i in 1..=5 {
        for cover in full_covers(2, i) {
            ensure(cover.index() == Index::Finite(i), || format!("index {i}"))?;
            ensure(cover.rank() == i + 1, || format!("rank {} at index {i}", cover.rank()))?;
            ensure(
                cover.graph().euler_characteristic() == i as i64 * chi_rose,
                || format!("chi at index {i}"),
            )?;
            total += 1;
        }
    }
    Ok(format!("{total} covers"))
}

fn incompletability() -> Outcome {
    for (name, avoid) in avoid_sets() {
        let cert = construct_malnormal(&AvoidanceProblem::new(2, 2, avoid.clone(), 0))
            .map_err(|e| e.to_string())?;
        let f = cert.f_word.ok_or("no f recorded")?;
        for power in 1..=3 {
            let w = f.pow(power);
            ensure(w.len() == power as usize * f.len(), || format!("{name}: f^{power} cancels"))?;
            for h in &avoid {
                let completable = can_complete(&w, h).map_err(|e| e.to_string())?;
                ensure(!completable, || format!("{name}: f^{power} completable"))?;
                ensure(!support::brute_completable(&w, h, 12), || {
                    format!("{name}: f^{power} lies on a short cycle")
                })?;
            }
        }
    }
    Ok("f, f^2, f^3 for 5 avoid sets".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("free-group Betti numbers", free_betti, Some(Duration::from_millis(1))),
        ("surface consistency", surface_betti, Some(Duration::from_millis(1))),
        ("Bourdon table", bourdon_table, None),
        ("decision truth table", decision_table, None),
        ("folding confluence", folding_confluence, Some(Duration::from_secs(10))),
        ("intersection oracle", intersection_oracle, Some(Duration::from_secs(60))),
        ("malnormality oracle", malnormal_oracle, Some(Duration::from_secs(60))),
        ("end-to-end construction", end_to_end, Some(Duration::from_secs(120))),
        ("Nielsen-Schreier and multiplicativity", nielsen_schreier, None),
        ("incompletability of f, f^2, f^3", incompletability, None),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(limit)) if elapsed > *limit => {
                Err(format!("took {elapsed:?}, limit {limit:?}"))
            }
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(reason) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {reason} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
