//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p kantorovich --test acceptance`.

use std::time::{Duration, Instant};

use kantorovich::certify::{generator_drift_check, gibbs_minorization};
use kantorovich::contraction::{
    comparison_suite, continuous_time_rate, decay_curve, dobrushin, dobrushin_measure_check, fixed_point,
    fixed_point_certificate, gibbs_theorem_check, invariant_measure, random_measure_pairs, theorem1_bounds,
    theorem_check, wasserstein_curve, wasserstein_from_vnorm, FixedPointStatus, VType,
};
use kantorovich::kernels::{
    build_gibbs_pair, build_langevin_kernel, left_action, op_norm_v, BuiltModel, GibbsModel, ModelSpec, Potential,
};
use kantorovich::measures::{DomainTag, Grid};
use kantorovich::semidistance::{discrete_metric, power_metric, rho_family, weighted_discrete};
use kantorovich::transport::{dual_gap_check, kantorovich, kantorovich_bruteforce, kantorovich_lp};
use kantorovich::{CostFunction, DiscreteMeasure, KernelMatrix, WeightFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

// ---------- independent oracles ----------

/// Σ |a − b| V.
fn vnorm_oracle(a: &[f64], b: &[f64], v: &[f64]) -> f64 {
    a.iter().zip(b).zip(v).map(|((x, y), w)| (x - y).abs() * w).sum()
}

/// W1 on a sorted 1-D grid as ∫ |F_a − F_b|.
fn w1_oracle(a: &[f64], b: &[f64], xs: &[f64]) -> f64 {
    let (mut fa, mut fb, mut total) = (0.0, 0.0, 0.0);
    for k in 0..xs.len() - 1 {
        fa += a[k];
        fb += b[k];
        total += (fa - fb).abs() * (xs[k + 1] - xs[k]);
    }
    total
}

fn random_measure_on(n: usize, support: &[usize], rng: &mut ChaCha8Rng) -> DiscreteMeasure {
    let mut w = vec![0.0; n];
    for &i in support {
        w[i] = rng.random_range(0.05..1.0);
    }
    DiscreteMeasure::normalized(w).unwrap()
}

fn random_kernel(n: usize, rng: &mut ChaCha8Rng) -> KernelMatrix {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| DiscreteMeasure::random(n, rng).into_weights()).collect();
    KernelMatrix::from_rows(&rows, "random").unwrap()
}

/// Random semi-distance: positive off the diagonal, zero on it, symmetric
/// or not.
fn random_cost(n: usize, symmetric: bool, rng: &mut ChaCha8Rng) -> CostFunction {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j && (!symmetric || j > i) {
                m[i * n + j] = rng.random_range(0.1..3.0);
                if symmetric {
                    m[j * n + i] = m[i * n + j];
                }
            }
        }
    }
    CostFunction::from_matrix("random", n, m).unwrap()
}

fn shipped_model(tag: &str, n: Option<usize>) -> BuiltModel {
    let mut value = serde_json::json!({ "model": tag });
    if let Some(n) = n {
        value["n"] = n.into();
    }
    let spec: ModelSpec = serde_json::from_value(value).unwrap();
    spec.build().unwrap()
}

const SHIPPED: [&str; 6] = ["arcsine", "unit_interval_mixture", "half_line", "irf", "langevin", "gibbs"];

// ---------- criteria ----------

fn c1_transport_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(4..=10);
        let m1 = rng.random_range(1..=4usize);
        let m2 = rng.random_range(1..=(16 / m1).min(n));
        let s1 = rand::seq::index::sample(&mut rng, n, m1.min(n)).into_vec();
        let s2 = rand::seq::index::sample(&mut rng, n, m2).into_vec();
        let mu1 = random_measure_on(n, &s1, &mut rng);
        let mu2 = random_measure_on(n, &s2, &mut rng);
        let cost = random_cost(n, rng.random_bool(0.5), &mut rng);
        let lp = kantorovich(&mu1, &mu2, &cost).map_err(e)?.value;
        let bf = kantorovich_bruteforce(&mu1, &mu2, &cost).map_err(e)?.value;
        worst = worst.max((lp - bf).abs());
    }
    ensure(worst <= 1e-9, || format!("max |simplex - brute force| = {worst:.3e}"))?;
    Ok(format!("1000 instances, max deviation {worst:.2e}"))
}

fn c2_kr_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut dual_violations = 0;
    for _ in 0..500 {
        let n = rng.random_range(2..=25);
        let v = WeightFunction::new((0..n).map(|_| rng.random_range(0.5..10.0)).collect()).unwrap();
        let mu1 = DiscreteMeasure::random(n, &mut rng);
        let mu2 = DiscreteMeasure::random(n, &mut rng);
        let lp = kantorovich_lp(&mu1, &mu2, &weighted_discrete(&v)).map_err(e)?.value;
        let oracle = vnorm_oracle(mu1.weights(), mu2.weights(), v.values());
        worst = worst.max((lp - oracle).abs());
        let trials: Vec<Vec<f64>> = (0..10)
            .map(|k| match k {
                0 => v.values().to_vec(),
                1 => (0..n)
                    .map(|i| if mu1.weights()[i] >= mu2.weights()[i] { v.values()[i] } else { -v.values()[i] })
                    .collect(),
                _ => (0..n).map(|_| rng.random_range(-5.0..5.0)).collect(),
            })
            .collect();
        let rep = dual_gap_check(&mu1, &mu2, &v, &trials).map_err(e)?;
        if !rep.holds() {
            dual_violations += 1;
        }
    }
    ensure(worst <= 1e-9 && dual_violations == 0, || {
        format!("max |LP - closed form| = {worst:.3e}, dual violations {dual_violations}")
    })?;
    Ok(format!("500 triples, max deviation {worst:.2e}, no dual trial above the primal"))
}

fn c3_dirac_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut lines = Vec::new();
    for tag in SHIPPED {
        let model = shipped_model(tag, if tag == "gibbs" { None } else { Some(100) });
        let n = model.kernel.len();
        let phi0 = discrete_metric(n);
        let phi_v = weighted_discrete(&model.weight);
        let dist = power_metric(1.0, &model.grid).map_err(e)?.materialize();
        let pairs = random_measure_pairs(n, 200, &mut rng);
        let mut worst = f64::INFINITY;
        for (psi, phi) in [(&phi0, &phi0), (&phi_v, &phi_v), (&phi_v, &dist)] {
            let beta = dobrushin(&model.kernel, psi, phi).map_err(e)?;
            let rep = dobrushin_measure_check(&model.kernel, psi, phi, &beta, &pairs).map_err(e)?;
            ensure(rep.holds(), || format!("{tag}: ({}, {}) worst slack {:.3e}", psi.label(), phi.label(), rep.worst_slack))?;
            worst = worst.min(rep.worst_slack);
        }
        lines.push(format!("{tag}(n={n}) {worst:.1e}"));
    }
    Ok(format!("worst slacks: {}", lines.join(", ")))
}

fn c4_constants() -> Outcome {
    let b = theorem1_bounds(0.5, 0.5, 4.0, 0.5, 0.0, None).map_err(e)?;
    let expected = [
        ("r_eps", b.r_eps, 2.0),
        ("delta", b.delta, 0.1),
        ("rho", b.rho, 1.0 / 24.0),
        ("bound_re3", b.bound_re3, 0.975),
        ("bound_reupsilon", b.bound_reupsilon, 0.975f64.sqrt()),
        ("bound_pregibbs", b.bound_pregibbs, 0.950625),
    ];
    for (name, got, want) in expected {
        ensure((got - want).abs() <= 1e-12, || format!("{name} = {got}, expected {want}"))?;
    }
    ensure((b.bound_reupsilon - 0.9874209).abs() <= 5e-8, || format!("reupsilon {}", b.bound_reupsilon))?;
    Ok(format!("re3 {}, reupsilon {:.7}, pregibbs {}", b.bound_re3, b.bound_reupsilon, b.bound_pregibbs))
}

fn c5_theorem_validity() -> Outcome {
    let eps = kantorovich::certify::default_eps_grid();
    let mut lines = Vec::new();
    for spec in [
        ModelSpec::Arcsine { n: 200, iota: 0.25 },
        serde_json::from_value(serde_json::json!({"model": "half_line", "n": 200, "delta": 0.5, "iota": 0.3})).unwrap(),
    ] {
        let model = spec.build().map_err(e)?;
        let check = theorem_check(&model.kernel, &model.weight, &eps, 0.5, 25).map_err(e)?;
        let worst = check.rows.iter().map(|r| r.bounds.bound_re3 - r.beta_measured).fold(f64::INFINITY, f64::min);
        ensure(check.all_hold(), || {
            format!("{}: {} rows, worst margin {worst:.3e}", model.tag, check.rows.len())
        })?;
        lines.push(format!("{} eps={:.3} {} levels margin {worst:.2e}", model.tag, check.drift.epsilon, check.rows.len()));
    }
    let gibbs = shipped_model("gibbs", Some(50));
    let (_, pair) = gibbs.gibbs.as_ref().expect("gibbs model");
    let check = gibbs_theorem_check(pair, 25).map_err(e)?;
    let worst = check.rows.iter().map(|r| r.bounds.bound_pregibbs - r.beta_measured).fold(f64::INFINITY, f64::min);
    ensure(check.all_hold(), || format!("gibbs: {} rows, worst margin {worst:.3e}", check.rows.len()))?;
    lines.push(format!("gibbs eps0={:.3} {} levels margin {worst:.2e}", check.drift.epsilon0, check.rows.len()));
    Ok(lines.join("; "))
}

fn c6_decay() -> Outcome {
    let eps = kantorovich::certify::default_eps_grid();
    let mut lines = Vec::new();
    for tag in SHIPPED {
        let model = shipped_model(tag, None);
        let n = model.kernel.len();
        let (p, v) = (&model.kernel, &model.weight);
        // ρ from the best level of the theorem sweep, on the rescaled V.
        let beta_rho = if let Some((_, pair)) = &model.gibbs {
            let check = gibbs_theorem_check(pair, 25).map_err(e)?;
            let row = check.rows.iter().min_by(|a, b| a.bounds.bound_pregibbs.total_cmp(&b.bounds.bound_pregibbs)).ok_or("no gibbs rows")?;
            row.beta_measured
        } else {
            let check = theorem_check(p, v, &eps, 0.5, 25).map_err(e)?;
            let k = check.sweep.best_re3.ok_or_else(|| format!("{tag}: empty sweep"))?;
            let r = check.sweep.entries[k].r;
            check.rows.iter().find(|row| row.r == r).ok_or("best row missing")?.beta_measured
        };
        let mu1 = DiscreteMeasure::dirac(n, n / 5);
        let mu2 = DiscreteMeasure::dirac(n, 4 * n / 5);
        let curve = decay_curve(p, &mu1, &mu2, &weighted_discrete(v), v, 30, None).map_err(e)?;
        let fit = curve.fit_v.as_ref().ok_or_else(|| format!("{tag}: no fit"))?;
        ensure(fit.r_squared >= 0.99, || format!("{tag}: r^2 = {:.5}", fit.r_squared))?;
        ensure(fit.lambda_fit <= beta_rho + 1e-6, || {
            format!("{tag}: lambda_fit {:.6} > beta_phi_rho {:.6}", fit.lambda_fit, beta_rho)
        })?;

        // W1 with c_1 = 1 needs V(x) + V(y) ≥ |x − y| on the grid.
        let xs: Vec<f64> = model.grid.coords().collect();
        let vals = v.values();
        let dominated = (0..n).all(|i| (0..n).all(|j| vals[i] + vals[j] >= (xs[i] - xs[j]).abs()));
        ensure(dominated, || format!("{tag}: V(x)+V(y) < |x-y| somewhere on the grid"))?;
        let c1 = VType::Poly { p: 1.0 }.c_p(1.0);
        let w1 = wasserstein_curve(p, &model.grid, &mu1, &mu2, 1.0, 30).map_err(e)?;
        let (mut a, mut b) = (mu1.clone(), mu2.clone());
        for (k, (w, s)) in w1.iter().zip(&curve.samples).enumerate() {
            if k > 0 {
                a = left_action(&a, p).map_err(e)?;
                b = left_action(&b, p).map_err(e)?;
            }
            let oracle = w1_oracle(a.weights(), b.weights(), &xs);
            ensure((w - oracle).abs() <= 1e-9 * (1.0 + oracle), || format!("{tag}: W1 {w} vs CDF oracle {oracle} at n={k}"))?;
            ensure(*w <= s.d_v / c1 + 1e-12, || format!("{tag}: W1 {w} above V-norm {} at n={k}", s.d_v))?;
        }
        let fitted = wasserstein_from_vnorm(fit, VType::Poly { p: 1.0 }, 1.0, 30).map_err(e)?;
        lines.push(format!(
            "{tag} lambda={:.4} (beta={:.4}) r2={:.4} W1_30={:.1e}<={:.1e}",
            fit.lambda_fit, beta_rho, fit.r_squared, w1[30], fitted.fitted_bound[30].1
        ));
    }
    Ok(lines.join("; "))
}

fn c7_two_state() -> Outcome {
    let p = KernelMatrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]], "two_state").map_err(e)?;
    let phi0 = discrete_metric(2);
    let beta = dobrushin(&p, &phi0, &phi0).map_err(e)?.value;
    ensure((beta - 0.7).abs() <= 1e-12, || format!("beta = {beta}"))?;
    // Eigenvalues 1 and trace − 1 = 0.7; δ0Pⁿ − δ1Pⁿ = 0.7ⁿ (1, −1).
    let lambda2: f64 = 0.9 + 0.8 - 1.0;
    let one = WeightFunction::constant(2, 1.0).map_err(e)?;
    let curve = decay_curve(&p, &DiscreteMeasure::dirac(2, 0), &DiscreteMeasure::dirac(2, 1), &phi0, &one, 40, None)
        .map_err(e)?;
    for s in &curve.samples {
        let want = lambda2.powi(s.n as i32);
        ensure((s.d_phi - want).abs() <= 1e-12, || format!("d_{} = {}, expected {want}", s.n, s.d_phi))?;
    }
    let (a, b) = (0.1, 0.2);
    let pi_exact = [b / (a + b), a / (a + b)];
    let rep = invariant_measure(&p, 1e-14, 100_000, 7).map_err(e)?;
    let err = (rep.pi.weights()[0] - pi_exact[0]).abs().max((rep.pi.weights()[1] - pi_exact[1]).abs());
    ensure(rep.converged && err <= 1e-10, || format!("pi = {:?}, error {err:.3e}", rep.pi.weights()))?;
    Ok(format!("beta 0.7, d_n = 0.7^n for n <= 40, pi error {err:.1e}"))
}

fn c8_gibbs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (mut worst_tv, mut worst_slack, mut levels) = (0.0f64, f64::INFINITY, 0);
    for k in 0..20 {
        let n = 4 + k % 6;
        let model = GibbsModel::random(n, 0.1 + 0.02 * k as f64, k % 2 == 0, &mut rng).map_err(e)?;
        let pair = build_gibbs_pair(&model).map_err(e)?;
        let nu_h = DiscreteMeasure::normalized(model.nu_h()).map_err(e)?;
        let nu_g = DiscreteMeasure::normalized(model.nu_g()).map_err(e)?;
        let mk = left_action(&left_action(&nu_h, &pair.m_kernel).map_err(e)?, &pair.k).map_err(e)?;
        let kl = left_action(&left_action(&nu_g, &pair.k).map_err(e)?, &pair.l).map_err(e)?;
        let tv = |a: &DiscreteMeasure, b: &DiscreteMeasure| {
            0.5 * a.weights().iter().zip(b.weights()).map(|(x, y)| (x - y).abs()).sum::<f64>()
        };
        worst_tv = worst_tv.max(tv(&mk, &nu_h)).max(tv(&kl, &nu_g));
        worst_slack = worst_slack.min(pair.h2g_slack(&model).map_err(e)?).min(pair.g2h_slack(&model).map_err(e)?);

        let lo = pair.v.lower_bound().max(pair.w.lower_bound()).max(
            pair.v.values().iter().chain(pair.w.values()).copied().fold(f64::INFINITY, f64::min),
        );
        let hi = 1.5 * pair.v.max().max(pair.w.max());
        for t in 0..=10 {
            let r = lo + (hi - lo) * t as f64 / 10.0;
            let Ok(out) = gibbs_minorization(&model, &pair, r) else { continue };
            levels += 1;
            ensure(out.alpha_h <= out.alpha_direct_k * (1.0 + 1e-12) + 1e-15, || {
                format!("model {k}, r={r}: alpha_h {} > direct {}", out.alpha_h, out.alpha_direct_k)
            })?;
            ensure(out.alpha_g <= out.alpha_direct_l * (1.0 + 1e-12) + 1e-15, || {
                format!("model {k}, r={r}: alpha_g {} > direct {}", out.alpha_g, out.alpha_direct_l)
            })?;
        }
    }
    ensure(worst_tv <= 1e-9, || format!("duality TV error {worst_tv:.3e}"))?;
    ensure(worst_slack >= -1e-12, || format!("Lyapunov slack {worst_slack:.3e}"))?;
    Ok(format!("duality TV {worst_tv:.1e}, Lyapunov slack {worst_slack:.2e}, {levels} minorization levels"))
}

fn c9_comparison() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst = f64::INFINITY;
    for k in 0..100 {
        let n = rng.random_range(2..=20);
        let kk = random_kernel(n, &mut rng);
        let ll = random_kernel(n, &mut rng);
        let phi = random_cost(n, k % 3 != 0, &mut rng);
        let psi = random_cost(n, k % 3 != 1, &mut rng);
        let a = rng.random_range(0.1..10.0);
        let iota = rng.random_range(0.1..1.0);
        let rep = comparison_suite(&kk, &ll, &phi, &psi, a, iota).map_err(e)?;
        if let Some(bad) = rep.checks.iter().find(|c| !c.passes()) {
            return Err(format!("instance {k}: {} lhs {} rhs {} slack {:.3e}", bad.name, bad.lhs, bad.rhs, bad.slack));
        }
        worst = worst.min(rep.worst_slack());
    }
    Ok(format!("100 instances, worst slack {worst:.2e}"))
}

fn c10_continuous_time() -> Outcome {
    let model = shipped_model("langevin", None);
    let h = model.step.ok_or("langevin step missing")?;
    let (q, v) = (&model.kernel, &model.weight);
    let drift = generator_drift_check(q, v, 1.0, 1.5, h).map_err(e)?;
    ensure((drift.epsilon_h - 1.0 / (1.0 + h)).abs() < 1e-15 && drift.passes, || {
        format!("generator drift relative violation {:.3e}", drift.max_relative_violation)
    })?;

    let mut best: Option<(f64, f64)> = None;
    for k in 0..16 {
        let rho = 0.005 * 1.5f64.powi(k);
        let fam = rho_family(v, rho).map_err(e)?;
        let beta = dobrushin(q, &fam.phi_rho, &fam.phi_rho).map_err(e)?.value;
        if beta < 1.0 && best.is_none_or(|(_, b)| beta < b) {
            best = Some((rho, beta));
        }
    }
    let (rho, lambda_h) = best.ok_or("no rho with beta < 1")?;
    let mut iota = 1.0f64;
    for k in 1..=10 {
        let hk = h * k as f64 / 10.0;
        let qk = build_langevin_kernel(&Potential::Quadratic { a: 1.0 }, 1.0, 1.0, hk, &model.grid).map_err(e)?;
        iota = iota.max(op_norm_v(&qk, v).map_err(e)?);
    }
    let rate = continuous_time_rate(h, lambda_h, 1.0 + 1.0 / rho, iota).map_err(e)?;
    let n = q.len();
    let (mu1, mu2) = (DiscreteMeasure::dirac(n, n / 5), DiscreteMeasure::dirac(n, 4 * n / 5));
    let curve = decay_curve(q, &mu1, &mu2, &weighted_discrete(v), v, 100, None).map_err(e)?;
    let d0 = curve.samples[0].d_v;
    let mut min_margin = f64::INFINITY;
    for s in &curve.samples {
        let bound = rate.bound_at(s.n as f64 * h) * d0;
        ensure(s.d_v <= bound, || format!("t={:.1}: measured {} > bound {bound}", s.n as f64 * h, s.d_v))?;
        min_margin = min_margin.min(bound / s.d_v.max(f64::MIN_POSITIVE));
    }
    Ok(format!(
        "drift rel violation {:.1e}; rho={rho:.4} lambda_h={lambda_h:.4} varsigma={:.4} prefactor={:.2} iota={iota:.4}; min bound/measured {min_margin:.2}",
        drift.max_relative_violation, rate.varsigma, rate.prefactor
    ))
}

fn c11_fixed_point() -> Outcome {
    let f = |x: f64| 0.5 * x + 1.0;
    let rep = fixed_point(&f, 0.0, 1e-12, 1000).map_err(e)?;
    ensure(rep.status == FixedPointStatus::Converged && (rep.y_star - 2.0).abs() <= 1e-10, || {
        format!("status {:?}, y* = {}", rep.status, rep.y_star)
    })?;
    let rate = rep.rate_fit.as_ref().ok_or("no rate fit")?.lambda_fit;
    ensure((rate - 0.5).abs() <= 0.01, || format!("rate {rate}"))?;
    let cert = fixed_point_certificate(f, -10.0, 10.0, 101, 1.0).map_err(e)?;
    ensure(cert.succeeded, || format!("certificate failed: {cert:?}"))?;
    let drift = cert.drift.as_ref().expect("drift present");
    let bounds = cert.bounds.as_ref().expect("bounds present");
    Ok(format!(
        "y*={:.12} rate={rate:.6}; drift eps={:.3} c={:.3}, alpha={:.4}, reupsilon={:.6}",
        rep.y_star,
        drift.epsilon,
        drift.c,
        bounds.alpha,
        bounds.bound_reupsilon
    ))
}

fn main() {
    // Grid sanity used by several criteria.
    assert!(Grid::build(DomainTag::OpenInterval { a: 0.0, b: 1.0 }, 2).is_ok());

    let criteria: [(&str, fn() -> Outcome, Duration); 11] = [
        ("transport oracle equivalence", c1_transport_oracle, Duration::from_secs(10)),
        ("Kantorovich-Rubinstein identity", c2_kr_identity, Duration::from_secs(30)),
        ("Dirac-pair reduction", c3_dirac_reduction, Duration::from_secs(120)),
        ("explicit-constant exactness", c4_constants, Duration::from_secs(1)),
        ("theorem validity on models", c5_theorem_validity, Duration::from_secs(900)),
        ("exponential decay", c6_decay, Duration::from_secs(300)),
        ("two-state analytic chain", c7_two_state, Duration::from_secs(1)),
        ("Gibbs duality and minorization", c8_gibbs, Duration::from_secs(60)),
        ("comparison suite", c9_comparison, Duration::from_secs(120)),
        ("continuous-time rates", c10_continuous_time, Duration::from_secs(120)),
        ("fixed point", c11_fixed_point, Duration::from_secs(1)),
    ];
    let mut failures = 0;
    for (k, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > *limit => Err(format!("{msg}; runtime {elapsed:.2?} exceeds {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS [{:>2}] {name} ({elapsed:.2?}): {msg}", k + 1),
            Err(msg) => {
                failures += 1;
                println!("FAIL [{:>2}] {name} ({elapsed:.2?}): {msg}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
