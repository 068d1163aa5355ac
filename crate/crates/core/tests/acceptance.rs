//! Acceptance criteria, one line each. Slow criteria run with
//! `cargo test --test acceptance -- --include-slow` (or `INCOMPAT_SLOW=1`).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use incompat::analytic::{degree2_bound, degree3_bound, dimension_witness, mub_degree4_bound, sr_bound};
use incompat::conic::{from_sdpa, parse_sdpa, solve, to_sdpa, write_sdpa};
use incompat::hierarchy::{build_hierarchy, solve_level, symmetrize};
use incompat::measurements::{anticommuting_dichotomic, mub_set, parse_set, pauli_qubit_bases, set_to_json, upper_bound_lambda_f};
use incompat::ncpoly::{eta_g_lower, expand_power_of_s, marginal, normalisation, Mode, NcPolynomial, Word};
use incompat::robustness::{build_robustness_sdp, check_measure_inequalities, solve_robustness, RobustnessMeasure as M};
use incompat::tables::{self, TableId};
use incompat::{analytic::beta, Rational};

const TOL: f64 = 1e-8;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 2..=9 {
        let v = degree2_bound::<f64>(k, 2).unwrap().value;
        worst = worst.max((v - 1.0 / (k as f64).sqrt()).abs());
    }
    let v = degree3_bound::<f64>(3, 2).unwrap().value;
    worst = worst.max((v - 0.5 * (1.0 + 1.0 / 3f64.sqrt())).abs());
    ensure(worst <= 1e-12, || format!("max |Δ| = {worst:e}"))?;
    Ok(format!("max |Δ| = {worst:.1e} ≤ 1e-12"))
}

fn c2_table_ia() -> Outcome {
    let mut worst: f64 = 0.0;
    let cells = tables::expected(TableId::Ia);
    for c in &cells {
        let v = 1.0 / degree3_bound::<f64>(c.k, c.d).unwrap().value - 1.0;
        let s: f64 = sr_bound(c.k, c.d).unwrap();
        ensure((v - s).abs() < 1e-12, || format!("steering bound disagrees at ({}, {})", c.k, c.d))?;
        worst = worst.max((v - c.value).abs());
    }
    ensure(worst <= 5e-5 && cells.len() == 25, || format!("max |Δ| = {worst:.2e}"))?;
    Ok(format!("25 cells, max |Δ| = {worst:.2e} ≤ 5e-5"))
}

fn c3_witness() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 2..=8 {
        for d in 2..=6 {
            let w: f64 = dimension_witness(sr_bound(k, d).unwrap(), k).unwrap();
            worst = worst.max((w - d as f64).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max |Δ| = {worst:e}"))?;
    Ok(format!("max |Δ| = {worst:.1e} ≤ 1e-9"))
}

fn q(v: i64) -> Rational {
    Rational::from_integer(v)
}

fn mpow(m: i64, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(q(m), e as usize)
    } else {
        q(1) / num_traits::pow(q(m), (-e) as usize)
    }
}

fn c4_engine() -> Outcome {
    let mut checks = 0;
    for k in 2..=6usize {
        for m in 2..=9u32 {
            let (kk, mm) = (k as i64, m as i64);
            let s: Vec<NcPolynomial<Rational>> = (1..=4).map(|p| expand_power_of_s(k, p)).collect();
            let tag = |what: &str| format!("{what} at k={k} m={m}");
            ensure(normalisation(&s[0], m, Mode::Generic).unwrap() == q(kk) * mpow(mm, kk - 1), || tag("Σ(S)"))?;
            ensure(
                normalisation(&s[1], m, Mode::Generic).unwrap() == q(kk * (mm + kk - 1)) * mpow(mm, kk - 2),
                || tag("Σ(S²)"),
            )?;
            ensure(
                normalisation(&s[2], m, Mode::Generic).unwrap()
                    == q(kk * (mm * mm + 3 * (kk - 1) * mm + (kk - 1) * (kk - 2))) * mpow(mm, kk - 3),
                || tag("Σ(S³)"),
            )?;
            let a = marginal(&s[0], 0, m, Mode::Generic).unwrap();
            ensure(a.exact() && a.c_p == mpow(mm, kk - 1) && a.c_id == q(kk - 1) * mpow(mm, kk - 2), || tag("Σ_x(S)"))?;
            let b = marginal(&s[1], 0, m, Mode::Generic).unwrap();
            ensure(
                b.exact()
                    && b.c_p == q(mm + 2 * (kk - 1)) * mpow(mm, kk - 2)
                    && b.c_id == q((kk - 1) * (mm + kk - 2)) * mpow(mm, kk - 3),
                || tag("Σ_x(S²)"),
            )?;
            let c = marginal(&s[2], 0, m, Mode::Generic).unwrap();
            ensure(
                c.c_p == q(mm * mm + 5 * (kk - 1) * mm + (kk - 1) * (3 * kk - 5)) * mpow(mm, kk - 3)
                    && c.c_id == q((kk - 1) * (mm * mm + 3 * (kk - 2) * mm + (kk - 2) * (kk - 3))) * mpow(mm, kk - 4),
                || tag("Σ_x(S³)"),
            )?;
            let mut flagged: Vec<Word> = c.pinched.iter().map(|(w, _)| w.clone()).collect();
            flagged.sort();
            let expected: Vec<Word> = (1..k as u8).map(|y| Word::new([y, 0, y])).collect();
            ensure(flagged == expected, || tag("pinch flags of S³"))?;
            // Exact MUB identities of degrees three and four.
            let d = mm;
            let m3 = marginal(&s[2], 0, m, Mode::Mub).unwrap();
            ensure(
                m3.exact()
                    && m3.c_p == q(d * d + 5 * (kk - 1) * d + 3 * (kk - 1) * (kk - 2)) * mpow(d, kk - 3)
                    && m3.c_id == q((kk - 1) * (d * d + (3 * kk - 5) * d + (kk - 2) * (kk - 3))) * mpow(d, kk - 4),
                || tag("MUB Σ_x(S³)"),
            )?;
            ensure(
                normalisation(&s[3], m, Mode::Mub).unwrap()
                    == q(kk
                        * (d * d * d + 6 * (kk - 1) * d * d + (kk - 1) * (6 * kk - 11) * d + (kk - 1) * (kk - 2) * (kk - 3)))
                        * mpow(d, kk - 4),
                || tag("MUB Σ(S⁴)"),
            )?;
            let m4 = marginal(&s[3], 0, m, Mode::Mub).unwrap();
            ensure(
                m4.exact()
                    && m4.c_p
                        == q(d * d * d
                            + 9 * (kk - 1) * d * d
                            + 2 * (kk - 1) * (7 * kk - 13) * d
                            + 4 * (kk - 1) * (kk - 2) * (kk - 3))
                            * mpow(d, kk - 4)
                    && m4.c_id
                        == q((kk - 1)
                            * (d * d * d
                                + 3 * (2 * kk - 3) * d * d
                                + (kk - 2) * (6 * kk - 13) * d
                                + (kk - 2) * (kk - 3) * (kk - 4)))
                            * mpow(d, kk - 5),
                || tag("MUB Σ_x(S⁴)"),
            )?;
            checks += 11;
        }
    }
    Ok(format!("{checks} rational identities and pinch-flag sets"))
}

fn c5_degree3_engine() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 2..=6u32 {
        for m in 2..=6u32 {
            let b: f64 = beta(k, m).unwrap();
            let s = NcPolynomial::<f64>::sum_of_projectors(k as usize);
            let sh = s.shifted(&b);
            let eta = eta_g_lower(&(&(&s * &sh) * &sh), m).map_err(|e| e.to_string())?;
            worst = worst.max((eta - degree3_bound::<f64>(k, m).unwrap().value).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max |Δ| = {worst:e}"))?;
    Ok(format!("max |Δ| = {worst:.1e} ≤ 1e-12"))
}

fn c6_table_ii() -> Outcome {
    let start = Instant::now();
    let rows = tables::generate(TableId::II, &Default::default(), &|_| {});
    let c = tables::check(TableId::II, &rows);
    ensure(c.passed() && c.compared == 20, || format!("{c:?}"))?;
    let g = mub_degree4_bound(5, 4).unwrap().bound.gammas.unwrap();
    let want = ((3.0 - 6f64.sqrt()) / 2.0, 1.25);
    let dg = (g.0 - want.0).abs().max((g.1 - want.1).abs());
    ensure(dg <= 1e-4, || format!("γ(5,4) = {g:?}"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("20 cells, max |Δ| = {:.2e} ≤ 1e-4; γ(5,4) off by {dg:.1e}; {secs:.1} s", c.max_deviation))
}

fn timed_eta(set: &incompat::measurements::MeasurementSet, m: M) -> Result<(f64, f64), String> {
    let t = Instant::now();
    let r = solve_robustness(set, m, TOL).map_err(|e| e.to_string())?;
    Ok((r.eta, t.elapsed().as_secs_f64()))
}

fn c7_exact_sdps() -> Outcome {
    let r3 = 1.0 / 3f64.sqrt();
    let mut cases = vec![
        ("Pauli d", pauli_qubit_bases(), M::D, r3),
        ("Pauli g", pauli_qubit_bases(), M::G, 0.5 * (1.0 + r3)),
        ("MUB pair g", mub_set(2, 2).unwrap(), M::G, (2.0 + 2f64.sqrt()) / 4.0),
    ];
    for k in 2..=4 {
        let rk = 1.0 / (k as f64).sqrt();
        cases.push(("anticommuting r", anticommuting_dichotomic(k).unwrap(), M::R, rk));
        cases.push(("anticommuting g", anticommuting_dichotomic(k).unwrap(), M::G, 0.5 * (1.0 + rk)));
    }
    let (mut worst, mut slowest): (f64, f64) = (0.0, 0.0);
    for (name, set, m, want) in &cases {
        let (eta, secs) = timed_eta(set, *m)?;
        ensure((eta - want).abs() <= 1e-4, || format!("{name} (k={}): {eta} vs {want}", set.len()))?;
        ensure(secs <= 10.0, || format!("{name} took {secs:.1} s"))?;
        worst = worst.max((eta - want).abs());
        slowest = slowest.max(secs);
    }
    Ok(format!("{} SDPs, max |Δ| = {worst:.1e} ≤ 1e-4, slowest {slowest:.2} s", cases.len()))
}

fn c7_slow_mub4() -> Outcome {
    let set = mub_set(4, 5).unwrap();
    let (d, _) = timed_eta(&set, M::D)?;
    let (g, _) = timed_eta(&set, M::G)?;
    let want = 0.5732;
    let note = format!("η^d = {d:.4}, η^g = {g:.4} (|η^g − {want}| = {:.1e})", (g - want).abs());
    ensure((d - want).abs() <= 1e-3, || format!("{note}; η^d off by {:.4}", (d - want).abs()))?;
    Ok(note)
}

fn c8_sandwich() -> Outcome {
    let families = vec![
        pauli_qubit_bases(),
        mub_set(2, 2).unwrap(),
        anticommuting_dichotomic(2).unwrap(),
        anticommuting_dichotomic(3).unwrap(),
        anticommuting_dichotomic(4).unwrap(),
    ];
    let mut gap: f64 = f64::INFINITY;
    for s in &families {
        let ub = upper_bound_lambda_f(s).map_err(|e| e.to_string())?;
        let solve = |m| solve_robustness(s, m, TOL).map_err(|e| e.to_string());
        let (rd, rr, rg) = (solve(M::D)?, solve(M::R)?, solve(M::G)?);
        ensure(rr.eta <= ub.ub_r + 1e-6 && rg.eta <= ub.ub_g + 1e-6, || {
            format!("k={} d={}: r {} vs {}, g {} vs {}", s.len(), s.dim(), rr.eta, ub.ub_r, rg.eta, ub.ub_g)
        })?;
        let n_max = *s.outcome_counts().iter().max().unwrap();
        ensure(check_measure_inequalities(&rd, &rr, &rg, s.dim(), n_max).unwrap(), || {
            format!("measure inequalities fail for k={} d={}", s.len(), s.dim())
        })?;
        gap = gap.min((ub.ub_r - rr.eta).min(ub.ub_g - rg.eta));
    }
    Ok(format!("{} families; smallest upper-bound slack {gap:.1e}", families.len()))
}

fn ib_rows(min_k: u32, max_k: u32) -> Outcome {
    let (mut worst, mut n): (f64, usize) = (0.0, 0);
    let mut bad = Vec::new();
    for c in tables::expected(TableId::Ib).into_iter().filter(|c| (min_k..=max_k).contains(&c.k)) {
        let eta = solve_level(c.k as usize, c.d, 3, TOL).map_err(|e| e.to_string())?.value;
        let dev = (1.0 / eta - 1.0 - c.value).abs();
        if dev > 1e-3 {
            bad.push(format!("(k={}, d={}) 1/η − 1 = {:.4} vs {} (|Δ| = {dev:.1e})", c.k, c.d, 1.0 / eta - 1.0, c.value));
        }
        worst = worst.max(dev);
        n += 1;
    }
    ensure(bad.is_empty(), || format!("{} of {n} Table Ib cells outside 1e-3: {}", bad.len(), bad.join(", ")))?;
    Ok(format!("{n} Table Ib cells, max |Δ| = {worst:.1e} ≤ 1e-3"))
}

fn c9_hierarchy() -> Outcome {
    let level = |k, m, t| solve_level(k, m, t, TOL).map(|b| b.value).map_err(|e| e.to_string());
    let t1 = level(5, 4, 1)?;
    ensure(t1 >= 0.5 - 1e-4, || format!("(5,4,1): {t1}"))?;
    let t2 = level(5, 4, 2)?;
    ensure((t2 - 0.5367).abs() <= 5e-4, || format!("(5,4,2): {t2}"))?;
    ensure(t2 >= t1 - 10.0 * TOL, || "level monotonicity at (5,4)".into())?;
    let rows = ib_rows(2, 3)?;
    for (k, m) in [(3u32, 3u32), (3, 4), (4, 3)] {
        let v: Vec<f64> = (1..=3).map(|t| level(k as usize, m, t)).collect::<Result<_, _>>()?;
        ensure(v.windows(2).all(|w| w[1] >= w[0] - 10.0 * TOL), || format!("monotonicity at ({k},{m}): {v:?}"))?;
    }
    for k in 2..=4u32 {
        for m in 2..=6u32 {
            let v = level(k as usize, m, 2)?;
            let d3 = degree3_bound::<f64>(k, m).unwrap().value;
            ensure(v >= d3 - 10.0 * TOL, || format!("({k},{m},2) = {v} below degree three {d3}"))?;
        }
    }
    Ok(format!("t=1 {t1:.4}, t=2 {t2:.4}; {rows}; monotone; dominates degree three"))
}

fn c9_slow() -> Outcome {
    let t = Instant::now();
    let t3 = solve_level(5, 4, 3, TOL).map_err(|e| e.to_string())?.value;
    let secs = t.elapsed().as_secs_f64();
    let head = format!("t=3 {t3:.4} in {secs:.0} s");
    ensure((t3 - 0.5391).abs() <= 5e-4, || format!("(5,4,3): {t3}"))?;
    ib_rows(4, 5).map(|r| format!("{head}; {r}")).map_err(|e| format!("{head}; {e}"))
}

fn c10_universality() -> Outcome {
    let g = solve_robustness(&pauli_qubit_bases(), M::G, TOL).map_err(|e| e.to_string())?.eta;
    let mut last = 0.0;
    for t in 1..=3 {
        last = solve_level(3, 2, t, TOL).map_err(|e| e.to_string())?.value;
        ensure(last <= g + 1e-4, || format!("level {t}: {last} > η^g = {g}"))?;
    }
    Ok(format!("levels 1–3 ≤ η^g(Pauli) = {g:.6}; gap at t=3 {:.1e}", g - last))
}

fn c11_round_trips() -> Outcome {
    let set = pauli_qubit_bases();
    let back = parse_set(&set_to_json(&set)).map_err(|e| e.to_string())?;
    ensure(back == set, || "measurement JSON not bit-exact".into())?;
    let a = solve_robustness(&set, M::D, TOL).unwrap().eta;
    let b = solve_robustness(&back, M::D, TOL).unwrap().eta;
    ensure((a - b).abs() <= 10.0 * TOL, || format!("JSON optimum {a} vs {b}"))?;

    let mut worst: f64 = (a - b).abs();
    let problems = [
        build_robustness_sdp(&set, M::D).unwrap(),
        build_robustness_sdp(&set, M::G).unwrap(),
        build_hierarchy(3, 3, 2).unwrap().problem,
        symmetrize(&build_hierarchy(5, 4, 2).unwrap()).problem,
    ];
    for p in &problems {
        let text = write_sdpa(&to_sdpa(p));
        ensure(text == write_sdpa(&to_sdpa(p)), || format!("{}: export not byte-stable", p.name))?;
        let parsed = parse_sdpa(&text).map_err(|e| e.to_string())?;
        ensure(parsed.entries == to_sdpa(p).entries, || format!("{}: entries changed on reparse", p.name))?;
        let orig = solve(p, TOL).map_err(|e| e.to_string())?.objective;
        let again = solve(&from_sdpa(&parsed), TOL).map_err(|e| e.to_string())?.objective;
        ensure((orig - again).abs() <= 10.0 * TOL, || format!("{}: {orig} vs {again}", p.name))?;
        worst = worst.max((orig - again).abs());
    }
    Ok(format!("JSON bit-exact; {} SDPA round trips, max |Δ| = {worst:.1e} ≤ 1e-7", problems.len()))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let slow = args.iter().any(|a| a == "--include-slow") || std::env::var_os("INCOMPAT_SLOW").is_some();
    // Respect libtest's listing probe so `cargo test -- --list` stays quiet.
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let criteria: Vec<(&str, &str, bool, fn() -> Outcome)> = vec![
        ("1", "closed-form degree-two and degree-three values", false, c1_closed_forms),
        ("2", "analytic steering table", false, c2_table_ia),
        ("3", "dimension witness inverts the steering bound", false, c3_witness),
        ("4", "rewriting-engine moment identities", false, c4_engine),
        ("5", "degree-three parent through the engine", false, c5_degree3_engine),
        ("6", "MUB degree-four table and optimal shifts", false, c6_table_ii),
        ("7", "exact robustness SDPs", false, c7_exact_sdps),
        ("7s", "five MUBs in dimension four, depolarising", true, c7_slow_mub4),
        ("8", "spectral sandwich and measure inequalities", false, c8_sandwich),
        ("9", "hierarchy levels, k ≤ 3 table rows, monotonicity, dominance", false, c9_hierarchy),
        ("9s", "hierarchy level three at (5,4) and k = 4, 5 table rows", true, c9_slow),
        ("10", "hierarchy never exceeds the Pauli trio", false, c10_universality),
        ("11", "measurement JSON and SDPA round trips", false, c11_round_trips),
    ];
    let mut failed = 0;
    for (id, name, is_slow, f) in criteria {
        if is_slow && !slow {
            println!("SKIP [{id}] {name} (pass --include-slow)");
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{id}] {name}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{id}] {name}: {detail} ({secs:.1} s)");
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
