//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach standard output.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use quatgroups::classification::PrimePair;
use quatgroups::harness::{
    frequency_table_report, reproduce_table, sweep, t_constraint_violations, t_set_diffs, write_records,
    Computation, OutputFormat, PairRecord, ResidueFilter, SweepConfig, Verdict, FREQUENCY_BOUND,
};
use quatgroups::presentation::factor_product;
use quatgroups::primes::odd_primes;
use quatgroups::quaternion::count_commuting;
use quatgroups::subgroups::{subgroup_abelianization, SubgroupKind, DEFAULT_INDEX_CEILING};
use quatgroups::zmodule::{abelianize_presentation, smith_normal_form, AbelianGroup};
use quatgroups::{GroupPresentation, HalfSet, IntMatrix, NormSet};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn pairs(list: &[(u64, u64)]) -> Vec<PrimePair> {
    list.iter().map(|&(p, l)| PrimePair::new(p, l).unwrap()).collect()
}

fn verdicts_match(records: &[PairRecord], ids: &[u8]) -> (usize, Vec<String>) {
    let mut checked = 0;
    let mut bad = Vec::new();
    for r in records {
        for id in ids {
            if let Some(v) = r.verdicts.get(id) {
                checked += 1;
                if *v != Verdict::Match {
                    bad.push(format!("({}, {}) conjecture {id}: {v}", r.p, r.l));
                }
            }
        }
    }
    (checked, bad)
}

fn c1_cardinality() -> Outcome {
    for q in odd_primes(999) {
        let x = NormSet::enumerate(q).unwrap();
        let y = HalfSet::canonical(&x);
        if x.len() as u64 != 2 * (q + 1) || y.len() as u64 != q.div_ceil(2) {
            return outcome(false, format!("q = {q}: |X| = {}, |Y| = {}", x.len(), y.len()));
        }
    }
    outcome(true, format!("{} primes", odd_primes(999).len()))
}

fn table(which: u8) -> Outcome {
    let rep = reproduce_table(which, 1, None).unwrap();
    outcome(rep.matches(), if rep.matches() { "36/36 cells".into() } else { rep.diffs.join("; ") })
}

fn c3_frequencies(records: &[PairRecord]) -> Outcome {
    let rep = frequency_table_report(records);
    outcome(rep.matches(), if rep.matches() { format!("{} pairs", records.len()) } else { rep.diffs.join("; ") })
}

fn c4_congruences(records: &[PairRecord]) -> Outcome {
    let (checked, bad) = verdicts_match(records, &[3]);
    outcome(bad.is_empty() && checked == records.len(), format!("{checked} pairs, {} violations", bad.len()))
}

fn c5_t_sets(records: &[PairRecord]) -> Outcome {
    let mut diffs = t_set_diffs(records);
    for r in t_constraint_violations(records) {
        diffs.push(format!("({}, {}) {}: t = {:?}", r.p, r.l, r.case, r.t));
    }
    outcome(diffs.is_empty(), if diffs.is_empty() { format!("{} pairs", records.len()) } else { diffs.join("; ") })
}

fn c7_gamma(records: &[PairRecord]) -> Outcome {
    let expected = {
        let n = odd_primes(61).len();
        n * (n - 1) / 2
    };
    let (checked, bad) = verdicts_match(records, &[1, 2, 4, 6]);
    outcome(
        bad.is_empty() && records.len() == expected,
        format!("{} pairs, {checked} checks, mismatches: {bad:?}", records.len()),
    )
}

fn c8_lambda(records: &[PairRecord]) -> Outcome {
    let (checked, bad) = verdicts_match(records, &[11]);
    outcome(bad.is_empty() && checked == 7, format!("{checked} pairs, mismatches: {bad:?}"))
}

fn c9_commutator(records: &[PairRecord]) -> Outcome {
    let (checked, bad) = verdicts_match(records, &[8, 9, 10]);
    outcome(bad.is_empty() && checked == records.len(), format!("{checked} pairs, mismatches: {bad:?}"))
}

fn c10_generators(groups: &[&PairRecord]) -> Outcome {
    let all: Vec<&AbelianGroup> = groups.iter().flat_map(|r| r.computed_groups()).collect();
    let worst = all.iter().map(|g| g.min_generators()).min().unwrap_or(0);
    outcome(worst >= 3 && !all.is_empty(), format!("{} groups, fewest generators {worst}", all.len()))
}

fn c11a_factorization() -> Result<String, String> {
    let primes = odd_primes(37);
    let sets: Vec<NormSet> = primes.iter().map(|&q| NormSet::enumerate(q).unwrap()).collect();
    let mut products = 0;
    for (i, xp) in sets.iter().enumerate() {
        for (j, xl) in sets.iter().enumerate() {
            if i == j {
                continue;
            }
            for x in xp.elements() {
                for y in xl.elements() {
                    let n = common::count_factorizations(x, y, xp.elements(), xl.elements(), xl.q() as i64);
                    if n != 4 {
                        return Err(format!("{x} * {y}: {n} solutions"));
                    }
                    let f = factor_product(x, y, xp, xl.q()).map_err(|e| e.to_string())?;
                    if f.y * f.x * quatgroups::Quaternion::scalar(f.sign) != *x * *y {
                        return Err(format!("{x} * {y}: bad factorization {f:?}"));
                    }
                    products += 1;
                }
            }
        }
    }
    Ok(format!("{products} products"))
}

fn c11b_smith() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for trial in 0..1000 {
        let (rows, cols) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let m: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let im = IntMatrix::from_rows(&m, cols);
        let s = smith_normal_form(&im);
        if s.u.mul(&im).mul(&s.v) != s.d || !s.d.is_diagonal() {
            return Err(format!("trial {trial}: U·M·V != D for {m:?}"));
        }
        if s.u.determinant().magnitude() != &1u32.into() || s.v.determinant().magnitude() != &1u32.into() {
            return Err(format!("trial {trial}: transform not unimodular"));
        }
        let diag: Vec<BigInt> = s.diagonal();
        if diag != common::minor_gcd_diagonal(&m, cols) {
            return Err(format!("trial {trial}: {diag:?} disagrees with the minor gcds for {m:?}"));
        }
    }
    Ok("1000 matrices".into())
}

fn c11c_choice_invariance() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(7);
    for (p, l) in [(5, 13), (3, 7)] {
        let (xp, xl) = (NormSet::enumerate(p).unwrap(), NormSet::enumerate(l).unwrap());
        let invariants = |yp: &HalfSet, yl: &HalfSet| {
            let pres = GroupPresentation::build_with(&xp, &xl, yp, yl).unwrap();
            (
                count_commuting(yp, yl).unwrap(),
                abelianize_presentation(&pres).0,
                subgroup_abelianization(&pres, SubgroupKind::Lambda, DEFAULT_INDEX_CEILING).unwrap(),
                subgroup_abelianization(&pres, SubgroupKind::Commutator, DEFAULT_INDEX_CEILING).unwrap(),
            )
        };
        let reference = invariants(&HalfSet::canonical(&xp), &HalfSet::canonical(&xl));
        for k in 0..20 {
            let got = invariants(&HalfSet::random(&xp, &mut rng), &HalfSet::random(&xl, &mut rng));
            if got != reference {
                return Err(format!("({p}, {l}) selection {k}: {got:?} vs {reference:?}"));
            }
        }
    }
    Ok("20 selections each for (5, 13), (3, 7)".into())
}

fn c11d_determinism() -> Result<String, String> {
    let render = |jobs| {
        let cfg = SweepConfig::bound(37)
            .computations([Computation::T, Computation::GammaAb, Computation::LambdaAb])
            .jobs(jobs);
        let mut out = Vec::new();
        write_records(&sweep(&cfg).unwrap(), OutputFormat::Json, &mut out).unwrap();
        out
    };
    let one = render(1);
    for jobs in [2, 4, 8] {
        if render(jobs) != one {
            return Err(format!("output differs at {jobs} threads"));
        }
    }
    Ok(format!("{} bytes identical at 1, 2, 4, 8 threads", one.len()))
}

fn c11_properties() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, f) in [
        ("factorization", c11a_factorization as fn() -> Result<String, String>),
        ("smith", c11b_smith),
        ("choice", c11c_choice_invariance),
        ("determinism", c11d_determinism),
    ] {
        match f() {
            Ok(d) => parts.push(format!("{name}: {d}")),
            Err(e) => {
                pass = false;
                parts.push(format!("{name} FAILED: {e}"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let mut results: Vec<(u8, &str, Outcome, Duration, Duration)> = Vec::new();
    let mut run = |id, name, budget_secs: u64, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let budget = Duration::from_secs(budget_secs);
        let line = format!(
            "criterion {id:>2} ({name}): {} [{:.2}s] {}",
            if o.pass && took <= budget { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            o.detail
        );
        println!("{line}");
        results.push((id, name, o, took, budget));
    };

    run(1, "cardinality law", 10, &mut c1_cardinality);
    run(2, "r table mod 24", 10, &mut || table(1));

    let mut one_one = Vec::new();
    run(3, "t frequencies", 15 * 60, &mut || {
        let cfg = SweepConfig::bound(FREQUENCY_BOUND).filter(ResidueFilter::OneOne).jobs(1);
        one_one = sweep(&cfg).unwrap();
        c3_frequencies(&one_one)
    });
    run(4, "t mod 12", 10, &mut || c4_congruences(&one_one));
    run(5, "observed t sets", 15 * 60, &mut || c5_t_sets(&sweep(&SweepConfig::bound(FREQUENCY_BOUND)).unwrap()));
    run(6, "case tables mod 24", 10, &mut || {
        let (b, c) = (table(3), table(4));
        outcome(b.pass && c.pass, format!("B: {}; C: {}", b.detail, c.detail))
    });

    let mut gamma = Vec::new();
    run(7, "Γ^ab for p, l <= 61", 5 * 60, &mut || {
        gamma = sweep(&SweepConfig::bound(61).computations([Computation::GammaAb])).unwrap();
        c7_gamma(&gamma)
    });
    let mut lambda = Vec::new();
    run(8, "Λ^ab", 5 * 60, &mut || {
        let list = pairs(&[(3, 5), (3, 7), (3, 13), (5, 7), (5, 13), (7, 11), (11, 13)]);
        lambda = sweep(&SweepConfig::explicit(list).computations([Computation::LambdaAb])).unwrap();
        c8_lambda(&lambda)
    });
    let mut commutator = Vec::new();
    run(9, "[Γ,Γ]^ab", 30 * 60, &mut || {
        let list = pairs(&[(3, 5), (3, 7), (5, 7), (5, 13)]);
        commutator = sweep(&SweepConfig::explicit(list).computations([Computation::CommutatorAb])).unwrap();
        c9_commutator(&commutator)
    });
    run(10, "at least 3 generators", 10, &mut || {
        c10_generators(&gamma.iter().chain(&lambda).chain(&commutator).collect::<Vec<_>>())
    });
    run(11, "property suites", 10 * 60, &mut c11_properties);

    let failed: BTreeSet<u8> =
        results.iter().filter(|(_, _, o, took, budget)| !o.pass || took > budget).map(|r| r.0).collect();
    println!("acceptance: {}/{} criteria pass", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
