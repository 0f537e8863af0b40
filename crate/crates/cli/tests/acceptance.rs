//! Acceptance checks, one line per criterion:
//! `PASS <n> <name>: <measurement>` or `FAIL ...`. Exits nonzero if any fail.

use std::process::{Command, Stdio};
use std::time::Instant;

use lindstedt_core::cohomology::{
    gamma_radius, solve_parametric_formal, solve_parametric_numeric, solve_second_difference, solve_standard,
};
use lindstedt_core::diagnostics::{
    discrepancy, embedding_norms, fit_gevrey, gevrey_bound, log_space, residual_scan, theta_grid,
};
use lindstedt_core::newton::{invariance_error, Schedule};
use lindstedt_core::{
    direct_expansion, hull_to_embedding, run_doubling, EpsSeries, Frequency, MapSpec, Real, TrigPoly,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn reference_map() -> MapSpec {
    MapSpec::sine(3, Frequency::golden(1.0, 10_000).unwrap()).unwrap()
}

fn random_mean_free(rng: &mut ChaCha8Rng, deg: usize) -> TrigPoly {
    let terms: Vec<_> = (1..=deg)
        .map(|k| (k, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    TrigPoly::from_cos_sin(&terms)
}

fn oracle_equivalence() -> Outcome {
    let map = reference_map();
    let t = Instant::now();
    let run = run_doubling(&map, 4, 3, 0.05).unwrap();
    let direct = direct_expansion(&map, 32).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let d = discrepancy((&run.state.k, &run.state.mu), (&hull_to_embedding(&direct, &map), &direct.mu));
    let worst = d.iter().cloned().fold(0.0, Real::max);
    (
        d.len() == 33 && worst <= 1e-8 && secs < 10.0,
        format!("max per-order discrepancy {worst:.2e} over orders 0..=32 (limit 1e-8), {secs:.2} s"),
    )
}

fn residual_order() -> Outcome {
    let map = reference_map();
    let t = Instant::now();
    let direct = direct_expansion(&map, 8).unwrap();
    let newton = run_doubling(&map, 4, 1, 0.05).unwrap().state;
    let eps = log_space(1e-3, 1e-2, 11);
    let theta = theta_grid(64);
    let a = residual_scan(&map, &hull_to_embedding(&direct, &map), &direct.mu, &eps, &theta);
    let b = residual_scan(&map, &newton.k, &newton.mu, &eps, &theta);
    let secs = t.elapsed().as_secs_f64();
    let fitted = a.samples.iter().filter(|s| s.fitted).count();
    let (sa, sb) = (a.slope.unwrap_or(Real::NAN), b.slope.unwrap_or(Real::NAN));
    (
        (sa - 9.0).abs() <= 0.15 && (sb - 9.0).abs() <= 0.15 && secs < 5.0,
        format!(
            "slope {sa:.3} (direct), {sb:.3} (newton) over {fitted}/11 samples above the floor in [1e-3, 1e-2], {secs:.2} s"
        ),
    )
}

fn quadratic_doubling() -> Outcome {
    let map = reference_map();
    let mut ok = true;
    let mut parts = Vec::new();
    for h in 1..=3 {
        let run = run_doubling(&map, 4, h, 0.05).unwrap();
        let step = run.steps.last().unwrap();
        let n = step.n_from;
        let e = invariance_error(&map, &run.state.k, &run.state.mu, 2 * n + 1).unwrap();
        let rel = e.relative_through(2 * n);
        let lead = e.lead(1e-10);
        ok &= rel <= 1e-10 && lead.is_none_or(|l| l > 2 * n) && step.output_lead == lead;
        parts.push(format!(
            "h={h} N={n}: lead {} (need {}), orders <= {} at {rel:.1e}",
            lead.map_or("none".into(), |l| l.to_string()),
            2 * n + 1,
            2 * n
        ));
    }
    (ok, parts.join("; "))
}

fn degree_law() -> Outcome {
    let map = reference_map();
    let h = direct_expansion(&map, 64).unwrap();
    let bad: Vec<usize> = (0..=64)
        .filter(|&n| {
            let c = h.u.coeff(n);
            c.degree() > n || c.modes().iter().skip(n + 1).any(|m| m.norm() != 0.0)
        })
        .collect();
    (
        bad.is_empty() && map.a() == 1,
        format!("deg(u_n) <= n for n <= 64 with a = {}; violations at {bad:?}", map.a()),
    )
}

fn zero_mean() -> Outcome {
    let map = reference_map();
    let direct = direct_expansion(&map, 64).unwrap();
    let newton = run_doubling(&map, 4, 3, 0.05).unwrap().state;
    let worst = |x: &EpsSeries| {
        x.coeffs()
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| c.mean().abs() / c.norm_rho(0.0))
            .fold(0.0, Real::max)
    };
    let (a, b) = (worst(&direct.u), worst(&newton.k.x));
    (
        a <= 1e-12 && b <= 1e-12,
        format!("max |mean u_n| / majorant: {a:.1e} (direct, 64 orders), {b:.1e} (newton, 32 orders)"),
    )
}

fn cohomology_suite() -> Outcome {
    let f = Frequency::golden(1.0, 10_000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let gamma64 = gamma_radius(&f, 3, 64);
    let mut worst = [0.0 as Real; 3];
    for _ in 0..100 {
        let deg = rng.gen_range(1..=64);
        let eta = random_mean_free(&mut rng, deg);
        let scale = eta.norm_rho(0.0);
        let p = solve_standard(&eta, &f).unwrap();
        let r = &(&p - &p.rotate(&f, 1)) - &eta;
        worst[0] = worst[0].max(r.norm_rho(0.0) / scale);
        let p = solve_second_difference(&eta, &f).unwrap();
        let r = &(&(&p.rotate(&f, 1) - &p.scale(2.0)) + &p.rotate(&f, -1)) - &eta;
        worst[1] = worst[1].max(r.norm_rho(0.0) / scale);
        let eps = rng.gen_range(-1.0..1.0) * gamma64;
        let p = solve_parametric_numeric(&eta, eps, 3, &f, 64).unwrap();
        let r = &(&p.scale(1.0 - eps.powi(3)) - &p.rotate(&f, 1)) - &eta;
        worst[2] = worst[2].max(r.norm_rho(0.0) / scale);
    }
    // formal against numeric: orders above 6 of η vanish, so the formal
    // solution is carried far enough for its tail to drop below roundoff
    let mut agree: Real = 0.0;
    let gamma8 = gamma_radius(&f, 3, 8);
    for _ in 0..5 {
        let order = rng.gen_range(1..=6);
        let mut coeffs = Vec::new();
        for _ in 0..=order {
            let deg = rng.gen_range(1..=8);
            coeffs.push(random_mean_free(&mut rng, deg));
        }
        coeffs.resize(121, TrigPoly::zero());
        let eta = EpsSeries::from_coeffs(coeffs);
        let formal = solve_parametric_formal(&eta, 3, &f).unwrap();
        for frac in [0.1, 0.3, 0.5] {
            let eps = frac * gamma8;
            let eta_eps = eta.coeffs().iter().rev().fold(TrigPoly::zero(), |acc, c| &acc.scale(eps) + c);
            let numeric = solve_parametric_numeric(&eta_eps, eps, 3, &f, 8).unwrap();
            let summed = formal.coeffs().iter().rev().fold(TrigPoly::zero(), |acc, c| &acc.scale(eps) + c);
            agree = agree.max((&summed - &numeric).norm_rho(0.0) / numeric.norm_rho(0.0));
        }
    }
    (
        worst.iter().all(|&w| w <= 1e-12) && agree <= 1e-8,
        format!(
            "substitution residuals {:.1e} / {:.1e} / {:.1e} (standard / second difference / parametric); formal vs numeric {agree:.1e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn gevrey_exponent() -> Outcome {
    let map = reference_map();
    let t = Instant::now();
    let h = direct_expansion(&map, 256).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let k = hull_to_embedding(&h, &map);
    let fit = fit_gevrey(&embedding_norms(&k, 0.05), 32, 256, gevrey_bound(&map)).unwrap();
    let band = if (0.15..=0.67).contains(&fit.sigma) { "inside" } else { "outside" };
    (
        fit.sigma <= 2.0 / 3.0 + 0.05 && secs < 300.0,
        format!(
            "sigma {:.4} over orders 32..=256 (bound 2tau/alpha = {:.4}; cited sigma ~ 0.3, {band} [0.15, 0.67]), expansion {secs:.2} s",
            fit.sigma, fit.bound
        ),
    )
}

fn schedule_identities() -> Outcome {
    let map = reference_map();
    let target = (2.0 as Real).powf(-1.0 / 3.0);
    let mut s = Schedule::new(&map, 4, 0.05);
    let mut ratio_err: Real = 0.0;
    let mut rho_ok = true;
    for _ in 0..12 {
        let next = s.advance(&map);
        ratio_err = ratio_err.max((next.gamma / s.gamma - target).abs());
        let closed = 0.05 * (0.5 + (0.5 as Real).powi(next.h as i32 + 1));
        rho_ok &= next.rho >= 0.025 && (next.rho - closed).abs() <= 1e-16;
        s = next;
    }
    let run = run_doubling(&map, 4, 3, 0.05).unwrap();
    for w in run.steps.windows(2) {
        ratio_err = ratio_err.max((w[1].gamma / w[0].gamma - target).abs());
    }
    (
        ratio_err <= 1e-14 && rho_ok,
        format!("max |gamma ratio - 2^(-1/3)| = {ratio_err:.1e} over h <= 12; rho_h >= rho_0/2 holds: {rho_ok}"),
    )
}

fn central_jacobian(map: &MapSpec, x: Real, y: Real, eps: Real) -> [[Real; 2]; 2] {
    let d = 1e-6;
    let f = |x, y| {
        let (a, b) = map.apply(x, y, 0.1, eps);
        [a, b]
    };
    let (px, mx, py, my) = (f(x + d, y), f(x - d, y), f(x, y + d), f(x, y - d));
    let mut j = [[0.0; 2]; 2];
    for i in 0..2 {
        j[i][0] = (px[i] - mx[i]) / (2.0 * d);
        j[i][1] = (py[i] - my[i]) / (2.0 * d);
    }
    j
}

fn conformal_symplecticity() -> Outcome {
    let map = reference_map();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: Real = 0.0;
    let mut fd_gap: Real = 0.0;
    for _ in 0..100 {
        let (x, y, eps) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-0.9..0.9));
        let fd = central_jacobian(&map, x, y, eps);
        let j = map.jacobian(x, eps);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        worst = worst.max((det - map.lambda(eps)).abs());
        for i in 0..2 {
            for k in 0..2 {
                fd_gap = fd_gap.max((fd[i][k] - j[i][k]).abs());
            }
        }
    }
    (
        worst <= 1e-12 && fd_gap <= 1e-6,
        format!("max |det Df - lambda| = {worst:.1e} at 100 random (x, y, eps); Df vs central differences {fd_gap:.1e}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_lindstedt");
    let run = |args: &[&str], name: &str| {
        let path = dir.path().join(name);
        let status = Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(&path)
            .stdout(Stdio::null())
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let e1 = run(&["expand", "--N", "32"], "e1.json");
    let e2 = run(&["expand", "--N", "32"], "e2.json");
    let n1 = run(&["newton", "--N0", "4", "--h", "3"], "n1.json");
    let n2 = run(&["newton", "--N0", "4", "--h", "3"], "n2.json");
    (
        e1 == e2 && n1 == n2,
        format!("expand N=32 ({} bytes) and newton N0=4 h=3 ({} bytes) repeat byte for byte", e1.len(), n1.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("residual order", residual_order),
        ("quadratic defect doubling", quadratic_doubling),
        ("degree law", degree_law),
        ("zero mean", zero_mean),
        ("cohomology solvers", cohomology_suite),
        ("gevrey exponent", gevrey_exponent),
        ("schedule identities", schedule_identities),
        ("conformal symplecticity", conformal_symplecticity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = match std::panic::catch_unwind(check) {
            Ok(r) => r,
            Err(_) => (false, "panicked".into()),
        };
        failed += !ok as usize;
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
