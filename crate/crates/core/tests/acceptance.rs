//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use stable_exit::pvquad::{
    apply_k, apply_k_checked, apply_k_nu, apply_k_nu_checked, apply_kv, getoor_identity_check,
    pv_fractional_integral_1d,
};
use stable_exit::simulate::{
    c1, estimate_mean_exit, estimate_refinement_shift, ExitTimeConfig, ExitTimeEstimate, Sampler,
};
use stable_exit::{Direction, LinearMap, PvQuadSpec, SpectralMeasure, StabilityIndex};

const ALPHAS: [f64; 7] = [0.3, 0.5, 0.8, 1.0, 1.2, 1.5, 1.8];

fn a(alpha: f64) -> StabilityIndex {
    StabilityIndex::new(alpha).unwrap()
}

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

fn criterion_1() -> Outcome {
    let spec = PvQuadSpec::default();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for alpha in ALPHAS {
        for r in [0.5, 1.0, 2.0] {
            for u in [0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9] {
                let err = match getoor_identity_check(u * r, r, a(alpha), &spec) {
                    Ok(res) => (res.value + 1.0).abs(),
                    Err(_) => f64::INFINITY,
                };
                worst = worst.max(err);
                n += 1;
            }
        }
    }
    outcome(
        worst <= 1e-6,
        format!("{n} cases, max |value + 1| = {worst:.2e}"),
    )
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.iter().map(|c| c / n).collect();
        }
    }
}

fn criterion_2() -> Outcome {
    let spec = PvQuadSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e11a);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for d in [1, 2, 3, 5] {
        for i in 0..50 {
            let alpha = a(ALPHAS[i % ALPHAS.len()]);
            let r: f64 = rng.random_range(0.5..2.0);
            let len: f64 = rng.random_range(0.5..2.0);
            let v: Vec<f64> = random_unit(&mut rng, d).iter().map(|c| c * len).collect();
            let rad = 0.95 * r * rng.random::<f64>().powf(1.0 / d as f64);
            let x: Vec<f64> = random_unit(&mut rng, d).iter().map(|c| c * rad).collect();
            let expected = -len.powf(alpha.get());
            let err = match apply_kv(&v, &x, r, alpha, &spec) {
                Ok(res) => (res.value - expected).abs(),
                Err(_) => f64::INFINITY,
            };
            worst = worst.max(err);
            n += 1;
        }
    }
    outcome(worst <= 2e-6, format!("{n} cases, max error = {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let spec = PvQuadSpec::default();
    let skew = SpectralMeasure::from_pairs(
        3,
        &[
            (Direction::normalize(&[1.0, 2.0, 2.0]).unwrap(), 0.7),
            (Direction::normalize(&[0.0, 1.0, -1.0]).unwrap(), 1.3),
        ],
    )
    .unwrap();
    let discrete = [
        (SpectralMeasure::antipodal(1, 1.0).unwrap(), vec![0.4]),
        (
            SpectralMeasure::axis_cross(2, 1.0).unwrap(),
            vec![0.2, -0.5],
        ),
        (skew, vec![0.1, 0.2, 0.3]),
    ];
    let isotropic = [
        (SpectralMeasure::isotropic(2, 4.0).unwrap(), vec![0.3, 0.1]),
        (
            SpectralMeasure::isotropic(3, 2.0).unwrap(),
            vec![0.0, -0.2, 0.4],
        ),
    ];
    let mut exact = true;
    let mut worst_rel: f64 = 0.0;
    let mut n = 0;
    for alpha in ALPHAS {
        let alpha = a(alpha);
        for (mu, x) in &discrete {
            let mass = mu.total_mass();
            let id = LinearMap::identity(mu.dim());
            let k = apply_k(mu, &id, x, 1.0, alpha).unwrap();
            exact &= (k + mass).abs() <= 4.0 * f64::EPSILON * mass;
            let check = apply_k_checked(mu, &id, x, 1.0, alpha, &spec);
            worst_rel = worst_rel.max(check.map_or(f64::INFINITY, |c| {
                (c.quadrature - c.closed_form).abs() / mass
            }));
            n += 1;
        }
        for (mu, x) in discrete.iter().chain(&isotropic) {
            let mass = mu.total_mass();
            exact &= apply_k_nu(mu, x, 1.0, alpha).unwrap() == -0.5 * mass;
            let check = apply_k_nu_checked(mu, x, 1.0, alpha, &spec);
            worst_rel = worst_rel.max(check.map_or(f64::INFINITY, |c| {
                (c.quadrature - c.closed_form).abs() / mass
            }));
            n += 1;
        }
    }
    let axis = apply_k(
        &SpectralMeasure::axis_cross(2, 1.0).unwrap(),
        &LinearMap::identity(2),
        &[0.0, 0.0],
        1.0,
        a(1.3),
    )
    .unwrap();
    exact &= axis == -4.0;
    outcome(
        exact && worst_rel <= 1e-5,
        format!("closed forms exact: {exact}; {n} quadrature cross-checks, max error / |mu| = {worst_rel:.2e}"),
    )
}

fn line(label: &str, est: &ExitTimeEstimate, expected: f64) -> String {
    format!(
        "{label}: observed {:.6} ± {:.6} vs {:.6} ({:+.3}%)",
        est.mean,
        est.stderr,
        expected,
        100.0 * (est.mean / expected - 1.0)
    )
}

fn within(est: &ExitTimeEstimate, expected: f64, bias: f64) -> bool {
    !est.unreliable && (est.mean - expected).abs() <= 3.0 * est.stderr + bias * expected
}

fn desk_case(label: &str, mu: SpectralMeasure, seed: u64) -> (bool, String) {
    let d = mu.dim();
    let alpha = a(1.0);
    let probe = ExitTimeConfig::new(
        vec![0.0; d],
        1.0,
        alpha,
        mu.clone(),
        Sampler::ExactIncrement,
        1.0,
        1,
        0,
    )
    .unwrap();
    let expected = probe.closed_form_mean().unwrap();
    let h = 1e-4 * expected;
    let shift_run = ExitTimeConfig::new(
        vec![0.0; d],
        1.0,
        alpha,
        mu.clone(),
        Sampler::ExactIncrement,
        h,
        10_000,
        seed ^ 0xff,
    )
    .unwrap();
    let shift = estimate_refinement_shift(&shift_run).unwrap();
    let shift_bound = shift.shift.abs() + 3.0 * shift.shift_stderr;
    let run = ExitTimeConfig::new(
        vec![0.0; d],
        1.0,
        alpha,
        mu,
        Sampler::ExactIncrement,
        h,
        100_000,
        seed,
    )
    .unwrap();
    let est = estimate_mean_exit(&run).unwrap();
    let pass = shift_bound < 0.01 * expected && within(&est, expected, 0.01);
    (
        pass,
        format!(
            "{}; h->h/2 shift {:.2e} (bound {:.3}% of mean)",
            line(label, &est, expected),
            shift.shift,
            100.0 * shift_bound / expected
        ),
    )
}

fn criterion_4() -> Outcome {
    let (p1, l1) = desk_case(
        "d=1 antipodal",
        SpectralMeasure::antipodal(1, 1.0).unwrap(),
        401,
    );
    let (p2, l2) = desk_case(
        "d=2 axis cross",
        SpectralMeasure::axis_cross(2, 1.0).unwrap(),
        402,
    );
    outcome(p1 && p2, format!("{l1}\n      {l2}"))
}

fn cpg(delta: f64) -> Sampler {
    Sampler::CompoundPoissonGaussian { delta }
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (k, alpha) in [0.5, 1.0, 1.5].into_iter().enumerate() {
        let measures = [
            ("antipodal", SpectralMeasure::antipodal(2, 2.0).unwrap()),
            ("cross", SpectralMeasure::axis_cross(2, 1.0).unwrap()),
            ("isotropic", SpectralMeasure::isotropic(2, 4.0).unwrap()),
        ];
        let mean = stable_exit::mean_exit_closed_form(&[0.0, 0.0], 1.0, a(alpha), 4.0).unwrap();
        let ests: Vec<ExitTimeEstimate> = measures
            .iter()
            .enumerate()
            .map(|(i, (_, mu))| {
                let seed = 500 + 10 * k as u64 + i as u64;
                let run = ExitTimeConfig::new(
                    vec![0.0, 0.0],
                    1.0,
                    a(alpha),
                    mu.clone(),
                    cpg(0.02),
                    1e-3 * mean,
                    100_000,
                    seed,
                )
                .unwrap();
                estimate_mean_exit(&run).unwrap()
            })
            .collect();
        let mut worst: f64 = 0.0;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let z = (ests[i].mean - ests[j].mean).abs() / ests[i].stderr.hypot(ests[j].stderr);
            worst = worst.max(z);
            pass &= z <= 3.0 && !ests[i].unreliable && !ests[j].unreliable;
        }
        lines.push(format!(
            "alpha={alpha}: {:.5} / {:.5} / {:.5} (closed form {:.5}), max |diff| = {worst:.2} combined stderr",
            ests[0].mean, ests[1].mean, ests[2].mean, mean
        ));
    }
    outcome(pass, lines.join("\n      "))
}

fn criterion_6() -> Outcome {
    let alpha = a(1.5);
    let mu = SpectralMeasure::axis_cross(2, 1.0).unwrap();
    let base = ExitTimeConfig::new(
        vec![0.3, 0.0],
        1.0,
        alpha,
        mu.clone(),
        Sampler::ExactIncrement,
        1.0,
        100_000,
        601,
    )
    .unwrap();
    let h = 1e-3 * base.closed_form_mean().unwrap();
    let base = ExitTimeConfig { h, ..base };
    let factor = 2f64.powf(1.5);
    let scaled = ExitTimeConfig::new(
        vec![0.6, 0.0],
        2.0,
        alpha,
        mu,
        Sampler::ExactIncrement,
        factor * h,
        100_000,
        602,
    )
    .unwrap();
    let e1 = estimate_mean_exit(&base).unwrap();
    let e2 = estimate_mean_exit(&scaled).unwrap();
    let ratio = e2.mean / e1.mean;
    let rel = (e1.stderr / e1.mean).hypot(e2.stderr / e2.mean);
    let dev = (ratio / factor - 1.0).abs();
    outcome(
        dev <= 3.0 * rel,
        format!("ratio {ratio:.5} vs 2^1.5 = {factor:.5}, relative deviation {dev:.2e} (3 x CI = {:.2e})", 3.0 * rel),
    )
}

fn criterion_7() -> Outcome {
    let alpha = a(1.0);
    let mu = SpectralMeasure::axis_cross(2, 1.0).unwrap();
    let h = 1e-3 / (2.0 * PI);
    let mut pass = true;
    let mut lines = Vec::new();
    for (i, s) in [0.0, 0.25, 0.5, 0.75].into_iter().enumerate() {
        let run = ExitTimeConfig::new(
            vec![s, 0.0],
            1.0,
            alpha,
            mu.clone(),
            Sampler::ExactIncrement,
            h,
            100_000,
            700 + i as u64,
        )
        .unwrap();
        // κ_1 = 2/π, |μ| = 4
        let expected = 2.0 / PI / 4.0 * (1.0f64 - s * s).sqrt();
        let est = estimate_mean_exit(&run).unwrap();
        pass &= within(&est, expected, 0.01);
        lines.push(line(&format!("s={s}"), &est, expected));
    }
    outcome(pass, lines.join("\n      "))
}

/// Midpoint sum for `2 ∫_0^∞ (e^{-w²} - 1) w^{-3/2} dw` after `w = t²`.
fn riemann_gaussian_pv() -> f64 {
    let t_max = 10f64.sqrt();
    let n = 2_000_000;
    let dt = t_max / n as f64;
    let mut sum = 0.0;
    for k in 0..n {
        let t = (k as f64 + 0.5) * dt;
        sum += 4.0 * (-(t * t * t * t)).exp_m1() / (t * t);
    }
    // ∫_10^∞ -2 w^{-3/2} dw; the Gaussian part is below e^{-100}.
    sum * dt - 4.0 / 10f64.sqrt()
}

fn criterion_8() -> Outcome {
    const GAMMA_MINUS_QUARTER: f64 = -4.901_666_809_860_711;
    let spec = PvQuadSpec {
        tail_cutoff: Some(10.0),
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        ..PvQuadSpec::default()
    };
    let f = |w: f64| (-w * w).exp();
    let value =
        pv_fractional_integral_1d(&f, 0.0, a(0.5), &spec, &[]).map_or(f64::NAN, |r| r.value);
    let oracle = riemann_gaussian_pv();
    let err = if value.is_nan() {
        f64::INFINITY
    } else {
        (value - oracle).abs()
    };
    let oracle_sane = (oracle - GAMMA_MINUS_QUARTER).abs() < 1e-9;
    outcome(
        err <= 1e-8 && oracle_sane,
        format!(
            "quadrature {:.12}, Riemann oracle {oracle:.12}, |diff| = {err:.2e}",
            value
        ),
    )
}

/// `2 ∫_0^∞ (1 - cos w) w^{-1-α} dw`: power series on [0, 1], and on
/// [1, ∞) the cosine integral along the ray `1 + i t`.
fn c1_oracle(alpha: f64) -> f64 {
    let mut head = 0.0;
    let mut fact = 1.0;
    for k in 1..30 {
        fact *= ((2 * k - 1) * (2 * k)) as f64;
        let term = 1.0 / (fact * (2.0 * k as f64 - alpha));
        head += if k % 2 == 1 { term } else { -term };
    }
    let beta = 1.0 + alpha;
    let n = 400_000;
    let t_max = 60.0;
    let dt = t_max / n as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for k in 0..=n {
        let t = k as f64 * dt;
        let weight = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let g = (-t).exp() * (1.0 + t * t).powf(-0.5 * beta);
        let phase = beta * t.atan();
        re += weight * g * phase.cos();
        im += weight * g * phase.sin();
    }
    re *= dt / 3.0;
    im *= dt / 3.0;
    let cos_tail = im * 1f64.cos() - re * 1f64.sin();
    2.0 * (head + 1.0 / alpha - cos_tail)
}

fn criterion_9() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in ALPHAS {
        worst = worst.max((c1(a(alpha)) - c1_oracle(alpha)).abs());
    }
    let at_one = c1(a(1.0));
    outcome(
        worst <= 1e-8 && (at_one - PI).abs() <= 1e-15,
        format!(
            "{} indices, max |closed form - oracle| = {worst:.2e}, c1(1) = {at_one}",
            ALPHAS.len()
        ),
    )
}

fn criterion_10() -> Outcome {
    let alpha = a(1.0);
    let mu = SpectralMeasure::axis_cross(2, 1.0).unwrap();
    let h = 1e-3 / (2.0 * PI);
    let exact = ExitTimeConfig::new(
        vec![0.0, 0.0],
        1.0,
        alpha,
        mu.clone(),
        Sampler::ExactIncrement,
        h,
        100_000,
        1001,
    )
    .unwrap();
    let poisson =
        ExitTimeConfig::new(vec![0.0, 0.0], 1.0, alpha, mu, cpg(0.02), h, 100_000, 1002).unwrap();
    let e1 = estimate_mean_exit(&exact).unwrap();
    let e2 = estimate_mean_exit(&poisson).unwrap();
    let z = (e1.mean - e2.mean).abs() / e1.stderr.hypot(e2.stderr);
    outcome(
        z <= 3.0 && !e1.unreliable && !e2.unreliable,
        format!(
            "exact {:.6} ± {:.6}, compound Poisson {:.6} ± {:.6}, |diff| = {z:.2} combined stderr",
            e1.mean, e1.stderr, e2.mean, e2.stderr
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("one-dimensional profile identity", criterion_1),
        ("directional operator sweep", criterion_2),
        ("generator values", criterion_3),
        ("mean exit time at desk scale", criterion_4),
        ("mass equivalence", criterion_5),
        ("scaling law", criterion_6),
        ("spatial profile", criterion_7),
        ("quadrature vs Riemann oracle", criterion_8),
        ("c1 closed form vs quadrature", criterion_9),
        ("sampler cross-validation", criterion_10),
    ];
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|s| s.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let number = i + 1;
        if !filter.is_empty() && !filter.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {number:>2} {verdict} {name} [{:.1} s]\n      {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
