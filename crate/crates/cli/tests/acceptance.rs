//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use helmholtz_cli::{execute, Cli};
use helmholtz_core::expr::{parse, Evidence, Expr, Point, Var, ZeroTester, ZeroVerdict, Q};
use helmholtz_core::forms::{interior_vf, KForm};
use helmholtz_core::geodesic::{conservation_check, drift, el_residual, integrate, IntegratorConfig};
use helmholtz_core::helmholtz::{
    check, euler_lagrange_semispray, generic_two_forms, helmholtz_quantities, local_two_forms, poincare_cartan,
    Classification, Lagrangian, Route, SemiBasicOneForm,
};
use helmholtz_core::identities;
use helmholtz_core::random;
use helmholtz_core::semispray::{jacobi_endomorphism, Semispray, SprayGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(s: &str, n: usize) -> Expr {
    parse(s, n).unwrap()
}

fn vanishes(w: &KForm, tester: &ZeroTester) -> bool {
    tester.all_zero(&w.coefficients()).unwrap().is_zero()
}

fn cli(args: &[&str]) -> helmholtz_cli::Execution {
    let mut argv = vec!["helmholtz"];
    argv.extend_from_slice(args);
    execute(&Cli::try_parse_from(argv).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn identity_fuzz() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut count = 0;
    for k in 0..60u64 {
        let n = (k % 3) as usize + 1;
        let s = random::semispray(&mut rng, n);
        let tester = ZeroTester::new(n, 32, 1e-9, k);
        let checks = identities::run(&s, &tester, k).map_err(|e| format!("spray {k}: {e}"))?;
        for c in &checks {
            ensure(c.verdict.is_zero(), || format!("{} fails for G = {:?}", c.name, s.coeffs()))?;
            count += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 120.0, || format!("took {secs:.1}s"))?;
    Ok(format!("60 sprays, {count} identity verdicts, {secs:.1}s"))
}

fn round_trip() -> Outcome {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..24u64 {
        let n = (k % 3) as usize + 1;
        let l = random::regular_lagrangian(&mut rng, n);
        let file = dir.path().join(format!("l{k}.toml"));
        std::fs::write(&file, format!("n = {n}\nL = \"{}\"\nseed = {k}\n", l.expr)).unwrap();
        let run = cli(&["from-lagrangian", path(&file)]);
        ensure(run.exit_code == 0, || format!("L = {}: exit {}: {}", l.expr, run.exit_code, run.stdout))?;
        let report = &run.document.result["report"];
        ensure(report["route"] == "exact" && report["classification"]["class"] == "poincare_cartan", || {
            format!("L = {}: route {}", l.expr, report["route"])
        })?;
        let g: Vec<String> = serde_json::from_value(run.document.result["G"].clone()).unwrap();
        let s = Semispray::parse(n, &g.iter().map(String::as_str).collect::<Vec<_>>()).unwrap();
        let contracted = interior_vf(&s.vector_field(), &poincare_cartan(&l).to_coords()).unwrap().as_scalar();
        ensure(contracted == l.expr, || format!("i_S θ_L = {contracted} but L = {}", l.expr))?;
    }
    Ok("24 Lagrangians, n = 1..3".to_string())
}

fn damped_family() -> Outcome {
    for gamma in ["1/2", "1", "2"] {
        for w2 in ["1", "2"] {
            let s = Semispray::parse(1, &[&format!("{gamma}*y1 + {w2}*x1/2")]).unwrap();
            let closed = e(&format!("exp(2*{gamma}*t)*(y1^2 - {w2}*x1^2)/2"), 1);
            let theta = SemiBasicOneForm::new(closed.clone(), vec![e(&format!("exp(2*{gamma}*t)*y1"), 1)]);
            let report = check(&s, &theta, &ZeroTester::with_defaults(1, 3)).unwrap();
            ensure(report.classification == Classification::PoincareCartan, || format!("γ={gamma}, ω²={w2}: {:?}", report.classification))?;
            let l = report.lagrangian.and_then(|l| l.expr).ok_or("no Lagrangian")?;
            ensure(l == closed, || format!("L = {l}"))?;
            let r = jacobi_endomorphism(&s).r[0][0].clone();
            let expected = e(&format!("{w2} - ({gamma})^2"), 1);
            ensure(r == expected, || format!("R = {r}, expected {expected}"))?;
        }
    }
    Ok("6 parameter pairs".to_string())
}

fn proven(v: &ZeroVerdict) -> bool {
    matches!(v, ZeroVerdict::ProvenZero)
}

fn conservative_positive() -> Outcome {
    let tester = ZeroTester::with_defaults(1, 4);
    let r = check(&Semispray::free(1), &SemiBasicOneForm::new(e("y1^2/2 + y1", 1), vec![e("y1", 1)]), &tester).unwrap();
    ensure(r.classification == Classification::ConservativeWithSymmetry, || format!("{:?}", r.classification))?;
    let f = r.first_integral.ok_or("no first integral")?;
    ensure(f.expr.as_ref() == Some(&e("y1", 1)) && proven(&f.verdict), || format!("f = {:?}, {:?}", f.expr, f.verdict))?;
    let ds = r.dual_symmetry.ok_or("no dual symmetry")?;
    ensure(r.conditions.ds.evidence == Evidence::Proven, || "b_i + ∇a_i or ∇b_i - a_j R^j_i not proven".to_string())?;
    ensure(ds.jacobi.evidence == Evidence::Proven, || "∇∇a + aR not proven".to_string())?;
    ensure(ds.omega_y == vec![e("-1", 1)] && ds.omega_x[0].is_zero(), || "ω ≠ -δy".to_string())?;
    let h = check(&Semispray::parse(1, &["x1/2"]).unwrap(), &SemiBasicOneForm::new(e("y1^2", 1), vec![e("y1", 1)]), &tester).unwrap();
    ensure(h.classification == Classification::ConservativeWithSymmetry, || format!("{:?}", h.classification))?;
    let f = h.first_integral.and_then(|f| f.expr).ok_or("no harmonic first integral")?;
    ensure(f == e("(y1^2 + x1^2)/2", 1), || format!("f = {f}"))?;
    Ok("free particle f = y1, harmonic f = (y1^2 + x1^2)/2".to_string())
}

fn negative_controls() -> Outcome {
    let asym = SemiBasicOneForm::new(e("y1*y2", 2), vec![e("y2", 2), e("0", 2)]);
    let r = check(&Semispray::free(2), &asym, &ZeroTester::with_defaults(2, 1)).unwrap();
    match r.classification {
        Classification::Fail(f) if f.condition == "H1" && f.witness.is_some() => {}
        other => return Err(format!("asymmetric form: {other:?}")),
    }
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("l.toml");
    std::fs::write(&file, "n = 1\nL = \"y1\"\n").unwrap();
    let run = cli(&["from-lagrangian", path(&file)]);
    ensure(run.exit_code == 1 && run.stdout.contains("det g = 0"), || format!("L = y1: exit {}, {}", run.exit_code, run.stdout))?;
    let traj = integrate(&Semispray::parse(1, &["x1/2"]).unwrap(), &Point::new(0.0, vec![1.0], vec![0.0]), &IntegratorConfig::new(0.0, 1.0, 1e-3).unwrap()).unwrap();
    let res = el_residual(&Lagrangian::new(1, e("y1^2/2", 1)), &Semispray::parse(1, &["x1/2"]).unwrap(), &traj).unwrap();
    ensure(res > 0.1, || format!("mismatched residual {res}"))?;
    Ok(format!("H1 witness, det g = 0, mismatched residual {res:.3}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..24u64 {
        let n = (k % 3) as usize + 1;
        let s = random::semispray(&mut rng, n);
        let theta = random::semi_basic(&mut rng, n);
        let geom = SprayGeometry::new(&s);
        let tester = ZeroTester::new(n, 32, 1e-9, k);
        let local = local_two_forms(&geom, &helmholtz_quantities(&geom, &theta).unwrap());
        let generic = generic_two_forms(&geom, &theta).unwrap();
        let pairs = [
            ("dθ", &local.d_theta, &generic.d_theta),
            ("L_S dθ", &local.lie_s_d_theta, &generic.lie_s_d_theta),
            ("d_Jθ", &local.dj_theta, &generic.dj_theta),
            ("d_hθ", &local.dh_theta, &generic.dh_theta),
            ("d_Φθ", &local.dphi_theta, &generic.dphi_theta),
            ("∇dθ", &local.nabla_d_theta, &generic.nabla_d_theta),
        ];
        for (name, l, g) in pairs {
            ensure(vanishes(&l.sub(g), &tester), || format!("{name} differs for G = {:?}, θ = {theta:?}", s.coeffs()))?;
        }
    }
    Ok("24 random pairs, 6 forms each".to_string())
}

fn closed_biconditional(rng: &mut ChaCha8Rng) -> Result<(usize, usize), String> {
    let (mut pos, mut neg) = (0, 0);
    for k in 0..30u64 {
        let n = (k % 3) as usize + 1;
        let tester = ZeroTester::with_defaults(n, k);
        let l = random::regular_lagrangian(rng, n);
        let s = if rng.random_bool(0.75) { euler_lagrange_semispray(&l, &tester).unwrap() } else { random::semispray(rng, n) };
        let base: Vec<Var> = std::iter::once(Var::T).chain((1..=n).map(Var::X)).collect();
        let p = match rng.random_range(0..3) {
            0 => Expr::zero(),
            1 => random::polynomial(rng, &[Var::T], 2, 2),
            _ => random::polynomial(rng, &base, 2, 2),
        };
        let theta = poincare_cartan(&l).plus_dt(&p);
        let forms = generic_two_forms(&SprayGeometry::new(&s), &theta).unwrap();
        ensure(vanishes(&forms.dj_theta, &tester), || "perturbed θ_L is not d_J-closed".to_string())?;
        let left = vanishes(&forms.lie_s_d_theta, &tester);
        ensure(left == vanishes(&forms.dh_theta, &tester), || format!("L = {}, p = {p}", l.expr))?;
        if left {
            pos += 1
        } else {
            neg += 1
        }
    }
    Ok((pos, neg))
}

fn conservative_candidate(rng: &mut ChaCha8Rng, n: usize) -> (Semispray, SemiBasicOneForm) {
    let half = Q::new(1, 2);
    let sq = |v: fn(usize) -> Expr| Expr::add_all((1..=n).map(|i| v(i) * v(i)));
    let (s, l, energy) = if rng.random_bool(0.5) {
        let s = Semispray::new(n, (1..=n).map(|i| Expr::x(i).scale(&half)).collect()).unwrap();
        (s, (sq(Expr::y) - sq(Expr::x)).scale(&half), (sq(Expr::y) + sq(Expr::x)).scale(&half))
    } else {
        let ys: Vec<Var> = (1..=n).map(Var::Y).collect();
        (Semispray::free(n), sq(Expr::y).scale(&half), random::polynomial(rng, &ys, 2, 3) + Expr::y(1))
    };
    let c = Expr::rational(rng.random_range(1..=3), rng.random_range(1..=2));
    let f = match rng.random_range(0..4) {
        0 | 1 => &c * &energy,
        2 => &c * &energy + Expr::x(1) * Expr::y(1),
        _ => &c * &energy + Expr::t() * Expr::y(1),
    };
    (s, poincare_cartan(&Lagrangian::new(n, l)).plus_dt(&f))
}

fn conservative_biconditional(rng: &mut ChaCha8Rng) -> Result<(usize, usize), String> {
    let (mut pos, mut neg) = (0, 0);
    let mut k = 0u64;
    while pos + neg < 30 {
        let n = (k % 3) as usize + 1;
        let tester = ZeroTester::with_defaults(n, k);
        let (s, theta) =
            if k % 3 == 2 { (random::semispray(rng, n), random::semi_basic(rng, n)) } else { conservative_candidate(rng, n) };
        k += 1;
        let report = check(&s, &theta, &tester).map_err(|e| e.to_string())?;
        if report.route != Route::Conservative {
            continue;
        }
        let forms = generic_two_forms(&SprayGeometry::new(&s), &theta).unwrap();
        let left = vanishes(&forms.lie_s_d_theta, &tester);
        let c = &report.conditions;
        let right = [&c.h1, &c.h2, &c.h3, &c.h4, &c.ds].iter().all(|v| v.passed());
        ensure(left == right, || format!("L_S dθ = 0 is {left}, H1-H4 and DS {right}, θ = {theta:?}"))?;
        if left {
            pos += 1
        } else {
            neg += 1
        }
    }
    Ok((pos, neg))
}

fn biconditionals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (p1, n1) = closed_biconditional(&mut rng)?;
    let (p2, n2) = conservative_biconditional(&mut rng)?;
    ensure(p1 > 0 && n1 > 0 && p2 > 0 && n2 > 0, || format!("degenerate mix {p1}/{n1}, {p2}/{n2}"))?;
    Ok(format!("d_J-closed {p1} pass / {n1} fail; non-closed {p2} pass / {n2} fail"))
}

fn numerics() -> Outcome {
    let harmonic = Semispray::parse(1, &["x1/2"]).unwrap();
    let start = Point::new(0.0, vec![1.0], vec![0.0]);
    let run = |t1: f64, h: f64| integrate(&harmonic, &start, &IntegratorConfig::new(0.0, t1, h).unwrap()).unwrap();
    let end = run(PI, 1e-3);
    let x_err = (end.last().x[0] + 1.0).abs();
    ensure(x_err <= 1e-6, || format!("x(π) error {x_err:e}"))?;
    let energy = conservation_check(&e("(y1^2 + x1^2)/2", 1), &run(10.0, 1e-3)).unwrap();
    ensure(energy <= 1e-8, || format!("energy drift {energy:e}"))?;
    // State error, since x(π) alone sits at a turning point.
    let errs: Vec<f64> = [2e-3, 1e-3, 5e-4]
        .iter()
        .map(|&h| {
            let p = run(PI, h).last().clone();
            (p.x[0] - p.t.cos()).abs().max((p.y[0] + p.t.sin()).abs())
        })
        .collect();
    let factors = [errs[0] / errs[1], errs[1] / errs[2]];
    ensure(factors.iter().all(|f| (12.0..=20.0).contains(f)), || format!("order factors {factors:?}"))?;
    let tester = ZeroTester::with_defaults(1, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for (s, theta) in [
        (Semispray::free(1), SemiBasicOneForm::new(e("y1^2/2 + y1", 1), vec![e("y1", 1)])),
        (harmonic.clone(), SemiBasicOneForm::new(e("y1^2", 1), vec![e("y1", 1)])),
    ] {
        let f = check(&s, &theta, &tester).unwrap().first_integral.and_then(|f| f.expr).ok_or("no first integral")?;
        for _ in 0..10 {
            let init = Point::new(0.0, vec![rng.random_range(-1.0..1.0)], vec![rng.random_range(-1.0..1.0)]);
            let traj = integrate(&s, &init, &IntegratorConfig::new(0.0, 5.0, 1e-3).unwrap()).unwrap();
            worst = worst.max(drift(&|p| f.eval(p), &traj).unwrap());
        }
    }
    ensure(worst <= 1e-6, || format!("first-integral drift {worst:e}"))?;
    Ok(format!(
        "x(π) error {x_err:.1e}, energy drift {energy:.1e}, order factors {:.2}/{:.2}, first-integral drift {worst:.1e}",
        factors[0], factors[1]
    ))
}

fn determinism() -> Outcome {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("p.toml");
    std::fs::write(
        &file,
        "n = 2\nG = [\"x2/2 + y1*y2/3\", \"t*x1/2\"]\ntheta0 = \"y1*y2 + x1^2\"\ntheta = [\"y2\", \"y1\"]\n\
         L = \"(y1^2 + y2^2)/2 - x1*x2\"\n\n[integrator]\nt0 = 0.0\nt1 = 1.0\nh = 0.01\nx = [0.5, 0.0]\ny = [0.0, 1.0]\n",
    )
    .unwrap();
    let csv = dir.path().join("p.csv");
    let commands: [&[&str]; 5] = [
        &["check"],
        &["from-lagrangian"],
        &["identities"],
        &["geodesics"],
        &["check", "--numeric-only"],
    ];
    for cmd in commands {
        let mut docs = Vec::new();
        for i in 0..2 {
            let json = dir.path().join(format!("r{i}.json"));
            let mut args = cmd.to_vec();
            args.extend([path(&file), "--seed", "42", "--json", path(&json)]);
            if cmd[0] == "geodesics" {
                args.push(path(&csv));
            }
            cli(&args);
            docs.push(std::fs::read(&json).unwrap());
        }
        ensure(docs[0] == docs[1], || format!("{} reports differ", cmd.join(" ")))?;
    }
    Ok("5 command lines, byte-identical reports".to_string())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("identity fuzz", identity_fuzz),
        ("Lagrangian round-trip", round_trip),
        ("damped oscillator family", damped_family),
        ("conservative positive cases", conservative_positive),
        ("negative controls", negative_controls),
        ("local/generic two-form equivalence", oracle_equivalence),
        ("verdict-level biconditionals", biconditionals),
        ("numerics", numerics),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
