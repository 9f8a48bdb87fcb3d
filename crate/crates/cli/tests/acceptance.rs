//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use bcinv_cli::mtx::{format_matrix, parse_matrix, read_matrix, write_matrix};
use bcinv_cli::{run, selftest};
use bcinv_core::analysis::{
    default_carrier, default_eps_schedule, derivative_along_curve, limit_representation,
    outer_inner_report, perturbation_experiment, rank_defect_identity, CurveSpec, INNER_BOUND,
};
use bcinv_core::inverse::{compute_with, onesided_family, onesided_residuals, problem_scale, Side};
use bcinv_core::linalg::{self, full_rank_factorization};
use bcinv_core::random::{Instance, Sampler};
use bcinv_core::reference::column_wise_inverse;
use bcinv_core::special::{
    core_inverse, defining_residual, drazin_inverse, dual_core_inverse, group_inverse, index,
    is_ep, moore_penrose_frf, weighted_mp, SpecialKind, WeightPair,
};
use bcinv_core::{CMatrix, Method, Tolerance};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn e11() -> CMatrix {
    CMatrix::diag_real(&[1.0, 0.0])
}

fn swap() -> CMatrix {
    CMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])
}

fn argv(parts: &[&str]) -> Vec<String> {
    std::iter::once("bcinv")
        .chain(parts.iter().copied())
        .map(String::from)
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

const SHAPES: [(usize, usize); 5] = [(3, 3), (4, 6), (6, 4), (8, 8), (12, 16)];

fn small_examples() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let (a, d, out) = (
        dir.path().join("a.mtx"),
        dir.path().join("d.mtx"),
        dir.path().join("rep.json"),
    );
    write_matrix(&a, &swap()).unwrap();
    write_matrix(&d, &e11()).unwrap();
    let code = run(argv(&[
        "exists",
        "--a",
        path_str(&a),
        "--d",
        path_str(&d),
        "--e",
        path_str(&d),
        "--out",
        path_str(&out),
    ]));
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let exists_ok = code == 3
        && rep["two_sided"] == false
        && rep["rk_EAD"] == 0
        && rep["rk_AD"] == 1
        && rep["rk_EA"] == 1;

    let mut worst = 0.0f64;
    for m in Method::ALL {
        match compute_with(m, &CMatrix::identity(2), &e11(), &e11(), &tol()) {
            Ok(res) => worst = worst.max(res.x.distance(&e11())),
            Err(_) => worst = f64::INFINITY,
        }
    }
    let elapsed = start.elapsed();
    let passed = exists_ok && worst <= 1e-14 && elapsed < Duration::from_secs(1);
    outcome(
        passed,
        format!("exists exit {code}, max method error {worst:.1e}, {elapsed:.2?}"),
    )
}

struct AgreementStats {
    disagreement: f64,
    disagreement_elim: f64,
    residual: f64,
    outer: f64,
    instances: usize,
    failures: usize,
}

fn method_agreement() -> (Outcome, AgreementStats) {
    let start = Instant::now();
    let mut st = AgreementStats {
        disagreement: 0.0,
        disagreement_elim: 0.0,
        residual: 0.0,
        outer: 0.0,
        instances: 0,
        failures: 0,
    };
    for (k, &(n, m)) in SHAPES.iter().enumerate() {
        let mut s = Sampler::seeded(1000 + k as u64);
        let ranks = n.min(m) - 1;
        for i in 0..200 {
            let r = 1 + i % ranks;
            let inst = s.existing_instance(n, m, r, 1e3);
            st.instances += 1;
            let results: Vec<_> = Method::ALL
                .iter()
                .filter_map(|&me| compute_with(me, &inst.a, &inst.d, &inst.e, &tol()).ok())
                .collect();
            if results.len() != Method::ALL.len() {
                st.failures += 1;
                continue;
            }
            let scale = results[0].scale;
            for (p, x) in results.iter().enumerate() {
                st.residual = st.residual.max(x.residuals.max() / scale);
                let xa = &x.x * &inst.a;
                st.outer = st.outer.max((&xa * &x.x).distance(&x.x) / scale);
                for y in &results[p + 1..] {
                    let gap = x.x.distance(&y.x) / scale;
                    if x.method == Method::Elimination || y.method == Method::Elimination {
                        st.disagreement_elim = st.disagreement_elim.max(gap);
                    } else {
                        st.disagreement = st.disagreement.max(gap);
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let passed = st.failures == 0
        && st.disagreement <= 1e-8
        && st.disagreement_elim <= 1e-7
        && elapsed < Duration::from_secs(30);
    let out = outcome(
        passed,
        format!(
            "{} instances, max disagreement {:.1e} (elimination {:.1e}) x scale, {} method failures, {elapsed:.2?}",
            st.instances, st.disagreement, st.disagreement_elim, st.failures
        ),
    );
    (out, st)
}

fn oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut missing = 0;
    let mut s = Sampler::seeded(2000);
    for n in 1..=4 {
        for m in 1..=4 {
            for r in 1..=n.min(m) {
                for _ in 0..10 {
                    let inst = s.existing_instance(n, m, r, 1e3);
                    let x = bcinv_core::bc_inverse(
                        &inst.a,
                        &inst.d,
                        &inst.e,
                        &tol(),
                        &Default::default(),
                    );
                    let oracle = column_wise_inverse(&inst.a, &inst.d, &inst.e, 1e-10);
                    cases += 1;
                    match (x, oracle) {
                        (Ok(x), Some(o)) => worst = worst.max(x.x.distance(&o)),
                        _ => missing += 1,
                    }
                }
            }
        }
    }
    outcome(
        worst <= 1e-10 && missing == 0,
        format!("{cases} cases, max gap {worst:.1e}, {missing} unresolved"),
    )
}

fn defining_equations(st: &AgreementStats) -> Outcome {
    let passed = st.failures == 0 && st.residual <= 1e-9 && st.outer <= 1e-9;
    outcome(
        passed,
        format!(
            "max defining residual {:.1e}, max outer residual {:.1e} x scale",
            st.residual, st.outer
        ),
    )
}

fn inner_biconditional() -> Outcome {
    let mut s = Sampler::seeded(3000);
    let shapes = [(3usize, 3usize), (4, 5), (5, 4), (6, 6)];
    let mut matches = 0;
    let mut identity_ok = 0;
    let mut total = 0;
    for i in 0..200 {
        let (n, m) = shapes[i % shapes.len()];
        let ranks = n.min(m) - 1;
        let r = 1 + (i / shapes.len()) % ranks;
        let equal_ranks = i < 100;
        let inst: Instance = if equal_ranks {
            s.inner_instance(n, m, r)
        } else {
            s.existing_instance(n, m, r, 1e3)
        };
        total += 1;
        let Ok(rep) = outer_inner_report(&inst.a, &inst.d, &inst.e, &tol()) else {
            continue;
        };
        let rank_a = linalg::rank_tol(&inst.a, &tol()).unwrap();
        let rank_d = linalg::rank_tol(&inst.d, &tol()).unwrap();
        let rank_test = rank_a == rank_d;
        let residual_test = rep.inner_residual <= INNER_BOUND * rep.scale;
        if rep.inner == rank_test && residual_test == rank_test && rank_test == equal_ranks {
            matches += 1;
        }
        if let Ok((ra, rd, defect)) = rank_defect_identity(&inst.a, &inst.d, &inst.e, &tol()) {
            if ra == rd + defect {
                identity_ok += 1;
            }
        }
    }
    outcome(
        matches == total && identity_ok == total,
        format!("flag matched {matches}/{total}, rank identity held {identity_ok}/{total}"),
    )
}

fn special_inverses() -> Outcome {
    let mut s = Sampler::seeded(4000);
    // Moore-Penrose: two independent routes on every rank profile.
    let mut mp_worst = 0.0f64;
    for &(n, m) in &[(5usize, 3usize), (3, 5), (4, 4)] {
        for r in 1..=n.min(m) {
            for _ in 0..100 {
                let a = s.matrix_of_rank(n, m, r);
                let star = a.adjoint();
                let scale = problem_scale(&a, &star, &star);
                let frf = moore_penrose_frf(&a, &tol()).unwrap();
                let svd = linalg::mp_inverse(&a, &tol()).unwrap();
                mp_worst = mp_worst.max(frf.distance(&svd) / scale);
            }
        }
    }

    let mut eq_worst = 0.0f64;
    let mut failures = 0;
    let mut triple_agree = 0;
    let mut triple_total = 0;
    for i in 0..100 {
        let n = 3 + i % 4;
        let r = 1 + i % (n - 1);
        let ep = i < 50;
        let a = if ep {
            s.ep_matrix(n, r)
        } else {
            s.index_one_non_ep(n, r)
        };
        let star = a.adjoint();
        let pairs = [
            (SpecialKind::Group, problem_scale(&a, &a, &a)),
            (SpecialKind::Core, problem_scale(&a, &a, &star)),
            (SpecialKind::DualCore, problem_scale(&a, &star, &a)),
        ];
        let group = group_inverse(&a, &tol());
        let core = core_inverse(&a, &tol());
        let dual = dual_core_inverse(&a, &tol());
        let (Ok(group), Ok(core), Ok(dual)) = (group, core, dual) else {
            failures += 1;
            continue;
        };
        for ((kind, scale), x) in pairs.iter().zip([&group, &core, &dual]) {
            eq_worst = eq_worst.max(defining_residual(*kind, &a, x, None, &tol()).unwrap() / scale);
        }
        let flags = [
            (&core * &a).hermitian_defect() <= 1e-9,
            (&a * &dual).hermitian_defect() <= 1e-9,
            is_ep(&a, &tol()).unwrap(),
        ];
        triple_total += 1;
        if flags.iter().all(|&f| f == ep) {
            triple_agree += 1;
        }
    }
    for i in 0..50 {
        let n = 4 + i % 3;
        let nil = 2 + i % 2;
        let a = s.similar_to_block(n, nil, i % 2 == 0);
        let k = index(&a, &tol()).unwrap();
        let ak = a.pow(k);
        let scale = problem_scale(&a, &ak, &ak);
        match drazin_inverse(&a, &tol()) {
            Ok(x) if k as usize == nil => {
                eq_worst = eq_worst.max(
                    defining_residual(SpecialKind::Drazin, &a, &x, None, &tol()).unwrap() / scale,
                )
            }
            _ => failures += 1,
        }
    }
    for i in 0..50 {
        let (n, m) = [(4usize, 3usize), (3, 4), (4, 4)][i % 3];
        let a = s.matrix_of_rank(n, m, 1 + i % n.min(m));
        let w = WeightPair::new(s.spd(n, 5.0), s.spd(m, 5.0), &tol()).unwrap();
        let carrier = w.carrier(&a).unwrap();
        let scale = problem_scale(&a, &carrier, &carrier);
        match weighted_mp(&a, &w, &tol()) {
            Ok(x) => {
                eq_worst = eq_worst.max(
                    defining_residual(SpecialKind::WeightedMp, &a, &x, Some(&w), &tol()).unwrap()
                        / scale,
                )
            }
            Err(_) => failures += 1,
        }
    }
    let passed =
        mp_worst <= 1e-9 && eq_worst <= 1e-8 && failures == 0 && triple_agree == triple_total;
    outcome(
        passed,
        format!(
            "MP routes {mp_worst:.1e}, defining sets {eq_worst:.1e} x scale, {failures} failures, EP equivalence {triple_agree}/{triple_total}"
        ),
    )
}

fn uniqueness() -> Outcome {
    let mut s = Sampler::seeded(5000);
    let mut worst_unique = 0.0f64;
    let mut min_spread = f64::INFINITY;
    let mut constraint = 0.0f64;
    let mut failures = 0;
    for i in 0..30 {
        let (n, m) = [(3usize, 3usize), (4, 6), (6, 4)][i % 3];
        let r = 1 + i % (n.min(m) - 1);
        let inst = s.existing_instance(n, m, r, 1e3);
        let scale = problem_scale(&inst.a, &inst.d, &inst.e);
        for side in [Side::Left, Side::Right] {
            let Ok(fam) = onesided_family(&inst.a, &inst.d, &inst.e, &tol(), side) else {
                failures += 1;
                continue;
            };
            let (k, _) = fam.parameter_shape();
            let members: Vec<CMatrix> = (0..10)
                .map(|_| fam.member(&s.matrix(k, k)).unwrap())
                .collect();
            for x in &members[1..] {
                worst_unique = worst_unique.max(x.distance(&members[0]) / scale);
            }
        }
    }
    for i in 0..40 {
        let n = 4 + i % 3;
        let m = 3 + i % 4;
        let hi = n.min(m);
        let lo = 1 + i % (hi - 1);
        let side = if i % 2 == 0 { Side::Right } else { Side::Left };
        // Right: rk(E) = rk(EAD) < rk(D); left: rk(D) = rk(EAD) < rk(E).
        let (rd, re) = if side == Side::Right {
            (hi, lo)
        } else {
            (lo, hi)
        };
        let a = s.matrix(n, m);
        let d = s.matrix_of_rank(m, n, rd);
        let e = s.matrix_of_rank(m, n, re);
        let scale = problem_scale(&a, &d, &e);
        let Ok(fam) = onesided_family(&a, &d, &e, &tol(), side) else {
            failures += 1;
            continue;
        };
        let (k, _) = fam.parameter_shape();
        let x1 = fam.member(&s.matrix(k, k)).unwrap();
        let x2 = fam.member(&s.matrix(k, k)).unwrap();
        for x in [&x1, &x2] {
            let (eq, incl) = onesided_residuals(side, &a, &d, &e, x, &tol()).unwrap();
            constraint = constraint.max(eq.max(incl) / scale);
        }
        min_spread = min_spread.min(x1.distance(&x2));
    }
    let passed = failures == 0 && worst_unique <= 1e-10 && min_spread > 1e-6 && constraint <= 1e-9;
    outcome(
        passed,
        format!(
            "unique spread {worst_unique:.1e} x scale, one-sided min spread {min_spread:.1e}, one-sided residual {constraint:.1e} x scale, {failures} failures"
        ),
    )
}

/// Instance whose compressed core `E₂AD₁` has smallest singular value at
/// least one half, so that the shifts in the schedule stay well clear of
/// the nonzero spectrum of `GA`.
fn well_conditioned_instance(s: &mut Sampler, n: usize, m: usize, r: usize) -> Instance {
    loop {
        let inst = s.existing_instance(n, m, r, 1e2);
        let df = full_rank_factorization(&inst.d, &tol()).unwrap();
        let ef = full_rank_factorization(&inst.e, &tol()).unwrap();
        let core = &(&ef.g * &inst.a) * &df.f;
        if linalg::singular_values(&core)[r - 1] >= 0.5 {
            return inst;
        }
    }
}

fn limit_representation_check() -> Outcome {
    let mut s = Sampler::seeded(6000);
    let mut monotone = 0;
    let mut windowed = 0;
    let total = 40;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..total {
        let (n, m) = [(3usize, 3usize), (4, 5), (5, 4), (6, 6)][i % 4];
        let r = 1 + i % (n.min(m) - 1);
        let inst = well_conditioned_instance(&mut s, n, m, r);
        let g = default_carrier(&inst.d, &inst.e, &tol()).unwrap();
        let rows = limit_representation(
            &inst.a,
            &inst.d,
            &inst.e,
            &g,
            &default_eps_schedule(),
            &tol(),
        )
        .unwrap();
        let errs: Vec<f64> = rows.iter().filter_map(|r| r.error).collect();
        if errs.len() == rows.len() && errs.windows(2).all(|w| w[1] < w[0]) {
            monotone += 1;
        }
        let ratio = errs[3] / errs[1];
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        if (1e-3..=1e-1).contains(&ratio) {
            windowed += 1;
        }
    }
    outcome(
        monotone == total && windowed == total,
        format!("monotone {monotone}/{total}, ratio in window {windowed}/{total} (range {lo:.2e}..{hi:.2e})"),
    )
}

fn perturbation_identity() -> Outcome {
    let mut s = Sampler::seeded(7000);
    let deltas = [1e-3, 1e-4, 1e-5, 1e-6];
    let mut identity_worst = 0.0f64;
    let mut ratio_ok = 0;
    let mut ratio_total = 0;
    let mut lost = 0;
    for i in 0..20 {
        let (n, m) = [(3usize, 3usize), (4, 5), (5, 4), (6, 6)][i % 4];
        let r = 1 + i % (n.min(m) - 1);
        let inst = well_conditioned_instance(&mut s, n, m, r);
        let table =
            perturbation_experiment(&inst.a, &inst.d, &inst.e, &deltas, i as u64, &tol()).unwrap();
        for row in &table.rows {
            match row.identity_residual {
                Some(res) => identity_worst = identity_worst.max(res / table.scale),
                None => lost += 1,
            }
        }
        for pair in table.rows.windows(2) {
            if let (Some(e0), Some(e1)) = (pair[0].error, pair[1].error) {
                ratio_total += 1;
                let expected = pair[0].delta / pair[1].delta;
                let ratio = e0 / e1;
                if ratio >= expected / 10.0 && ratio <= expected * 10.0 {
                    ratio_ok += 1;
                }
            }
        }
    }
    outcome(
        identity_worst <= 1e-8 && ratio_ok == ratio_total && lost == 0,
        format!("identity residual {identity_worst:.1e} x scale, first-order ratios {ratio_ok}/{ratio_total}, {lost} rows lost existence"),
    )
}

fn derivative_checks() -> Outcome {
    let mut s = Sampler::seeded(8000);
    let mut worst = [0.0f64; 3];
    let mut failures = 0;
    for i in 0..10 {
        let (n, m) = [(3usize, 3usize), (4, 5), (5, 4)][i % 3];
        let r = 1 + i % (n.min(m) - 1);
        let inst = well_conditioned_instance(&mut s, n, m, r);
        let b = s.matrix(n, m);
        let a1 = s.matrix(n, m);
        let a2 = s.matrix(n, m);
        let base = s.matrix_of_rank(n, m, n.min(m));
        let curves = [
            {
                let (a, d, e) = (inst.a.clone(), inst.d.clone(), inst.e.clone());
                CurveSpec {
                    a: Box::new(move |_| a.clone()),
                    d: Box::new(move |_| d.clone()),
                    e: Box::new(move |_| e.clone()),
                    t0: 0.0,
                    h: 1e-5,
                }
            },
            {
                let (a, d, e) = (inst.a.clone(), inst.d.clone(), inst.e.clone());
                CurveSpec {
                    a: Box::new(move |t| &a + &b.scale_real(t)),
                    d: Box::new(move |_| d.clone()),
                    e: Box::new(move |_| e.clone()),
                    t0: 0.0,
                    h: 1e-5,
                }
            },
            {
                let path =
                    move |t: f64| &(&base + &a1.scale_real(0.3 * t)) + &a2.scale_real(0.1 * t * t);
                let (p1, p2) = (path.clone(), path.clone());
                CurveSpec {
                    a: Box::new(path),
                    d: Box::new(move |t| p1(t).adjoint()),
                    e: Box::new(move |t| p2(t).adjoint()),
                    t0: 0.2,
                    h: 1e-5,
                }
            },
        ];
        for (k, curve) in curves.iter().enumerate() {
            match derivative_along_curve(curve, &tol()) {
                Ok(check) => {
                    worst[k] = worst[k].max(check.gap / check.scale);
                    if k == 0
                        && (check.analytic.frobenius_norm() > 1e-8
                            || check.numeric.frobenius_norm() > 1e-8)
                    {
                        failures += 1;
                    }
                }
                Err(_) => failures += 1,
            }
        }
    }
    let passed = failures == 0 && worst.iter().all(|&w| w <= 1e-6);
    outcome(
        passed,
        format!(
            "gap x scale: constant {:.1e}, linear {:.1e}, pseudoinverse curve {:.1e}; {failures} failures",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn cli_round_trips() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let [a, d, e, x, v] = ["a.mtx", "d.mtx", "e.mtx", "x.mtx", "v.json"].map(p);
    let mut s = Sampler::seeded(9000);
    let mut round_trips = 0;
    let total = 10;
    for i in 0..total {
        let (n, m) = [(3usize, 3usize), (4, 6), (6, 4)][i % 3];
        let inst = s.existing_instance(n, m, 1 + i % 2, 1e3);
        write_matrix(&a, &inst.a).unwrap();
        write_matrix(&d, &inst.d).unwrap();
        write_matrix(&e, &inst.e).unwrap();
        let common = [
            "--a",
            path_str(&a),
            "--d",
            path_str(&d),
            "--e",
            path_str(&e),
        ];
        let mut compute = vec!["compute"];
        compute.extend(common);
        compute.extend(["--out", path_str(&x)]);
        let mut verify = vec!["verify"];
        verify.extend(common);
        verify.extend(["--x", path_str(&x), "--out", path_str(&v)]);
        if run(argv(&compute)) == 0 && run(argv(&verify)) == 0 {
            round_trips += 1;
        }
    }

    let mut byte_identical = 0;
    for i in 0..20 {
        let m = s
            .matrix(1 + i % 5, 1 + (i * 7) % 6)
            .scale_real(10f64.powi(i as i32 - 10));
        write_matrix(&p("m.mtx"), &m).unwrap();
        let first = std::fs::read_to_string(p("m.mtx")).unwrap();
        let back = read_matrix(&p("m.mtx")).unwrap();
        if back == m && format_matrix(&back) == first && parse_matrix(&first).unwrap() == m {
            byte_identical += 1;
        }
    }

    let checks = selftest::run_all();
    let green = checks.iter().filter(|c| c.passed).count();
    outcome(
        round_trips == total && byte_identical == 20 && green == checks.len(),
        format!("compute/verify {round_trips}/{total}, byte-identical {byte_identical}/20, selftest {green}/{}", checks.len()),
    )
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |id: usize, name: &'static str, o: Outcome| {
        println!(
            "[{}] {id:>2}. {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o));
    };
    record(1, "worked examples", small_examples());
    let (agreement, stats) = method_agreement();
    record(2, "method agreement", agreement);
    record(3, "column-wise oracle", oracle_equivalence());
    record(
        4,
        "defining equations and outer property",
        defining_equations(&stats),
    );
    record(
        5,
        "inner biconditional and rank identity",
        inner_biconditional(),
    );
    record(6, "special inverses", special_inverses());
    record(7, "uniqueness of one-sided inverses", uniqueness());
    record(8, "shifted-resolvent limit", limit_representation_check());
    record(
        9,
        "three-term perturbation identity",
        perturbation_identity(),
    );
    record(10, "derivative along curves", derivative_checks());
    let mut cli = cli_round_trips();
    let total = start.elapsed();
    cli.passed &= total < Duration::from_secs(120);
    cli.detail = format!("{}, suite {total:.2?}", cli.detail);
    record(11, "command line", cli);
    let failed = results.iter().filter(|(_, _, o)| !o.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
