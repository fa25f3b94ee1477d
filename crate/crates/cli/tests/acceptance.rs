//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails. Expected values come from oracles
//! written here, independent of the library's transform pipeline.

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftspace::oracle::compare;
use shiftspace::shiftspace::{
    default_grid, plancherel_inner, plancherel_norm_sq, project, zeta_of_coeffs, ProjectionResult,
};
use shiftspace::spectral::periodize;
use shiftspace::zak::{verify_phi_properties, PhiCheck};
use shiftspace::{DecayBound, Generator, ShiftExpansion, Signal, SplineParams, C64};

// Tolerances pinned by the acceptance criteria.
const PLANCHEREL_REL: f64 = 1e-6;
const INNER_REL: f64 = 1e-6;
const PHI_SINC_ABS: f64 = 1e-8;
const PHI_SPLINE_ABS: f64 = 1e-6;
const PERIODIZATION_ABS: f64 = 1e-6;
const ORACLE_REL: f64 = 1e-4;
const GAP_FLOOR: f64 = -1e-9;
const MEMBER_ERR_REL: f64 = 1e-8;
const MEMBER_COEFF_ABS: f64 = 1e-8;
const COMPLEMENT_PROJ_REL: f64 = 1e-8;
const COMPLEMENT_ERR_REL: f64 = 1e-6;
const BESSEL_REL: f64 = 1e-9;
const MONOTONE_SLACK_REL: f64 = 1e-12;
const PYTHAGORAS_REL: f64 = 1e-6;
/// Errors below this fraction of `||f||^2` are compared absolutely.
const PYTHAGORAS_FLOOR_REL: f64 = 1e-9;

const TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn spline(m: usize, sigma: f64) -> Generator {
    Generator::bspline(SplineParams::new(sigma, m).unwrap())
}

fn random_coeffs(rng: &mut ChaCha8Rng, j: usize) -> Vec<C64> {
    (0..2 * j + 1)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> C64) -> C64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += f(a + i as f64 * h) * w;
    }
    s * (h / 3.0)
}

/// `integral s conj(t)` for spline expansions, by Simpson's rule on every
/// knot interval of the joint support. Panel endpoints are pulled just
/// inside the panel so that discontinuous splines take one-sided values.
fn spline_inner(gen: &Generator, m: usize, sigma: f64, s: &[C64], t: &[C64]) -> C64 {
    let h = PI / sigma;
    let j = (s.len() / 2) as i64;
    let eval = |c: &[C64], x: f64| -> C64 {
        // the spline is supported on [-(m+1) h, 0]
        let lo = (x / h).floor() as i64;
        (lo..=lo + m as i64 + 1)
            .filter(|k| (-j..=j).contains(k))
            .map(|k| c[(k + j) as usize] * gen.time_domain(x - k as f64 * h).unwrap())
            .sum()
    };
    let first = -j - m as i64 - 1;
    (first..j)
        .map(|k| {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            let eps = 1e-13 * h;
            simpson(a, b, 128, |x| {
                let x = x.clamp(a + eps, b - eps);
                eval(s, x) * eval(t, x).conj()
            })
        })
        .sum()
}

/// `integral s conj(t)` for expansions in the band-limited generator
/// `2 sin(sigma x)/x`, from samples offset from the shift lattice: for
/// functions band-limited to `[-sigma, sigma]`,
/// `integral s conj(t) = h sum_n s(n h + tau) conj(t(n h + tau))`, `h = pi/sigma`.
/// The sample sum is truncated at `|n| <= N` and its `1/n^2` tail added.
fn sinc_inner(sigma: f64, s: &[C64], t: &[C64]) -> C64 {
    let h = PI / sigma;
    let tau = 0.37 * h;
    let j = (s.len() / 2) as i64;
    let amp = 2.0 * (sigma * tau).sin();
    let sample = |c: &[C64], n: i64| -> C64 {
        (-j..=j)
            .map(|k| {
                let sign = if (n - k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                c[(k + j) as usize] * (sign * amp / ((n - k) as f64 * h + tau))
            })
            .sum()
    };
    const N: i64 = 200_000;
    let body: C64 = (-N..=N).map(|n| sample(s, n) * sample(t, n).conj()).sum();
    let alternating = |c: &[C64]| -> C64 {
        (-j..=j)
            .map(|k| c[(k + j) as usize] * if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 })
            .sum()
    };
    let n = N as f64;
    let inv_sq_tail = 1.0 / n - 0.5 / (n * n) + 1.0 / (6.0 * n * n * n);
    let tail = alternating(s) * alternating(t).conj() * (amp * amp * 2.0 * inv_sq_tail / (h * h));
    (body + tail) * h
}

fn time_inner(gen: &Generator, kind: Kind, sigma: f64, s: &[C64], t: &[C64]) -> C64 {
    match kind {
        Kind::Spline(m) => spline_inner(gen, m, sigma, s, t),
        Kind::Sinc => sinc_inner(sigma, s, t),
    }
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Spline(usize),
    Sinc,
}

fn plancherel_generators() -> Vec<(String, Generator, Kind)> {
    let mut v: Vec<_> = (0..=3)
        .map(|m| (format!("bspline m={m}"), spline(m, 1.0), Kind::Spline(m)))
        .collect();
    v.push(("sinc".into(), Generator::bandlimited(1.0).unwrap(), Kind::Sinc));
    v
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let sigma = 1.0;
    let grid = default_grid(sigma).unwrap();
    let mut worst: f64 = 0.0;
    let mut per = Vec::new();
    for (name, gen, kind) in plancherel_generators() {
        let d = periodize(&gen, sigma, &grid, TOL).unwrap();
        let before = worst;
        worst = 0.0;
        for _ in 0..20 {
            let c = random_coeffs(&mut rng, 32);
            let e = ShiftExpansion::centered(sigma, sigma, c.clone()).unwrap();
            let p = plancherel_norm_sq(&zeta_of_coeffs(&e, &grid).unwrap(), &d).unwrap();
            let oracle = time_inner(&gen, kind, sigma, &c, &c).re;
            worst = worst.max((p - oracle).abs() / oracle);
        }
        per.push(format!("{name} {worst:.1e}"));
        worst = worst.max(before);
    }
    let secs = t0.elapsed().as_secs_f64();
    Outcome {
        pass: worst <= PLANCHEREL_REL && secs <= 60.0,
        detail: format!("max relative error {worst:.3e} [{}], {secs:.1} s", per.join(", ")),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sigma = 1.0;
    let grid = default_grid(sigma).unwrap();
    let mut worst: f64 = 0.0;
    for (_, gen, kind) in plancherel_generators() {
        let d = periodize(&gen, sigma, &grid, TOL).unwrap();
        for _ in 0..20 {
            let a = random_coeffs(&mut rng, 32);
            let b = random_coeffs(&mut rng, 32);
            let za = zeta_of_coeffs(&ShiftExpansion::centered(sigma, sigma, a.clone()).unwrap(), &grid)
                .unwrap();
            let zb = zeta_of_coeffs(&ShiftExpansion::centered(sigma, sigma, b.clone()).unwrap(), &grid)
                .unwrap();
            let p = plancherel_inner(&za, &zb, &d).unwrap();
            let oracle = time_inner(&gen, kind, sigma, &a, &b);
            let scale = (time_inner(&gen, kind, sigma, &a, &a).re
                * time_inner(&gen, kind, sigma, &b, &b).re)
                .sqrt();
            worst = worst.max((p - oracle).norm() / oracle.norm().max(1e-3 * scale));
        }
    }
    Outcome {
        pass: worst <= INNER_REL,
        detail: format!("max relative error {worst:.3e}"),
    }
}

fn criterion_3() -> Outcome {
    let sinc = verify_phi_properties(&Generator::bandlimited(1.0).unwrap(), 1.0, 257, shiftspace::DEFAULT_TOL)
        .unwrap();
    let spl = verify_phi_properties(&spline(2, 1.0), 1.0, 129, shiftspace::DEFAULT_TOL).unwrap();
    let all_measured = |r: &shiftspace::zak::PropertyReport| {
        r.results.iter().all(|x| x.residual().is_some())
    };
    let phi3 = spl.get(PhiCheck::Representations).residual().unwrap_or(f64::INFINITY);
    let pass = all_measured(&sinc)
        && all_measured(&spl)
        && sinc.max_residual() <= PHI_SINC_ABS
        && spl.max_residual() <= PHI_SPLINE_ABS
        && phi3 <= PHI_SPLINE_ABS;
    Outcome {
        pass,
        detail: format!(
            "sinc max residual {:.3e}, bspline m=2 max residual {:.3e}, phi3 {:.3e}",
            sinc.max_residual(),
            spl.max_residual(),
            phi3
        ),
    }
}

fn criterion_4() -> Outcome {
    let sigma = 1.0;
    let grid = default_grid(sigma).unwrap();
    let d0 = periodize(&spline(0, sigma), sigma, &grid, TOL).unwrap();
    let dev0 = d0.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let ds = periodize(&Generator::bandlimited(sigma).unwrap(), sigma, &grid, TOL).unwrap();
    let n = ds.values().len();
    let sinc_exact = ds.values()[1..n - 1].iter().all(|v| *v == 1.0);
    let hat = spline(1, sigma);
    let d1 = periodize(&hat, sigma, &grid, TOL).unwrap();
    let at_sigma = d1.values()[n - 1];
    // independent summation at truncation 10^4
    let brute: f64 = (-10_000i64..=10_000)
        .map(|k| hat.spectrum(sigma + 2.0 * k as f64 * sigma).norm_sqr())
        .sum();
    let dev1 = (at_sigma - brute).abs().max((at_sigma - 1.0 / 3.0).abs());
    Outcome {
        pass: dev0 <= PERIODIZATION_ABS && sinc_exact && dev1 <= PERIODIZATION_ABS,
        detail: format!(
            "m=0 max |D-1| {dev0:.3e}; sinc D == 1 on open interval: {sinc_exact}; m=1 |D(sigma) - ref| {dev1:.3e}"
        ),
    }
}

fn pythagoras_error(r: &ProjectionResult) -> f64 {
    let other = r.norm_sq - r.projection_norm_sq;
    let scale = r.error_sq.max(PYTHAGORAS_FLOOR_REL * r.norm_sq);
    (r.error_sq - other).abs() / scale
}

fn criterion_5(pyth: &mut Vec<f64>) -> Outcome {
    let t0 = Instant::now();
    let f = Signal::Analytic(Generator::gaussian(1.0).unwrap());
    let mut worst_rel: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    let mut monotone = true;
    for m in 0..=2 {
        for sigma in [1.0, 2.0] {
            let gen = spline(m, sigma);
            let grid = default_grid(sigma).unwrap();
            let r = compare(&f, &gen, sigma, &[8, 16, 32, 64], &grid, TOL).unwrap();
            let last = r.rows.last().unwrap();
            worst_rel = worst_rel.max((last.oracle_residual - last.formula_error).abs() / last.formula_error);
            worst_gap = worst_gap.min(r.worst_negative_gap());
            monotone &= r.gaps_nonincreasing(0.0);
            let p = project(&f, &gen, sigma, sigma, &grid, 64, TOL).unwrap();
            pyth.push(pythagoras_error(&p));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    Outcome {
        pass: worst_rel <= ORACLE_REL && worst_gap >= GAP_FLOOR && monotone && secs <= 300.0,
        detail: format!(
            "max relative gap at j=64 {worst_rel:.3e}, most negative gap {worst_gap:.3e}, gaps nonincreasing: {monotone}, {secs:.1} s"
        ),
    }
}

fn criterion_6(pyth: &mut Vec<f64>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sigma = 1.0;
    let grid = default_grid(sigma).unwrap();
    let mut worst_err: f64 = 0.0;
    let mut worst_coeff: f64 = 0.0;
    for (_, gen, _) in plancherel_generators() {
        for _ in 0..3 {
            let c = random_coeffs(&mut rng, 8);
            let e = ShiftExpansion::centered(sigma, sigma, c.clone()).unwrap();
            let f = Signal::Analytic(e.to_signal(&gen).unwrap());
            let r = project(&f, &gen, sigma, sigma, &grid, 16, TOL).unwrap();
            worst_err = worst_err.max(r.error_sq / r.norm_sq);
            for (j, b) in r.coeffs.indexed() {
                worst_coeff = worst_coeff.max((b - e.coeff(j)).norm());
            }
            pyth.push(pythagoras_error(&r));
        }
    }
    Outcome {
        pass: worst_err <= MEMBER_ERR_REL && worst_coeff <= MEMBER_COEFF_ABS,
        detail: format!("max error_sq/||f||^2 {worst_err:.3e}, max coefficient error {worst_coeff:.3e}"),
    }
}

/// `f^(y) = sin^4(pi (y - sigma) / (2 sigma))` on `[sigma, 3 sigma]`, with its
/// inverse transform in closed form.
fn bump_outside_band(sigma: f64) -> Generator {
    let len = 2.0 * sigma;
    let spectrum = move |y: f64| {
        if (sigma..=3.0 * sigma).contains(&y) {
            C64::new((PI * (y - sigma) / len).sin().powi(4), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    };
    // integral_0^len exp(i w t) dt
    let e = move |w: f64| -> C64 {
        let z = 0.5 * w * len;
        let sinc = if z.abs() < 1e-8 { 1.0 - z * z / 6.0 } else { z.sin() / z };
        C64::from_polar(len * sinc, z)
    };
    let a = PI / sigma;
    let time = move |x: f64| -> C64 {
        // sin^4 u = (3 - 4 cos 2u + cos 4u) / 8, u = pi t / len
        let body = e(x) * 3.0 - (e(x + a) + e(x - a)) * 2.0 + (e(x + 2.0 * a) + e(x - 2.0 * a)) * 0.5;
        C64::from_polar(1.0, sigma * x) * body / 8.0
    };
    Generator::custom("sin^4 bump", spectrum, DecayBound::new(0.0, 1.0).unwrap())
        .with_spectral_support(sigma, 3.0 * sigma)
        .with_time_domain(time)
        .with_time_scale(1.0 / sigma)
}

fn criterion_7(pyth: &mut Vec<f64>) -> Outcome {
    let sigma = 1.0;
    let gen = Generator::bandlimited(sigma).unwrap();
    let f = Signal::Analytic(bump_outside_band(sigma));
    let r = project(&f, &gen, sigma, sigma, &default_grid(sigma).unwrap(), 64, TOL).unwrap();
    let proj = r.projection_norm_sq / r.norm_sq;
    let err = (r.error_sq - r.norm_sq).abs() / r.norm_sq;
    pyth.push(pythagoras_error(&r));
    Outcome {
        pass: proj <= COMPLEMENT_PROJ_REL && err <= COMPLEMENT_ERR_REL,
        detail: format!("projection/||f||^2 {proj:.3e}, |error_sq - ||f||^2|/||f||^2 {err:.3e}"),
    }
}

fn criterion_8(pyth: &mut Vec<f64>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_bessel = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut failures = Vec::new();
    for case in 0..50 {
        let sigma = rng.gen_range(0.5..2.0);
        let f = Generator::gaussian_packet(
            rng.gen_range(0.5..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )
        .unwrap();
        let gen = match rng.gen_range(0..6) {
            m @ 0..=3 => spline(m, sigma),
            4 => Generator::gaussian(rng.gen_range(0.5..2.0)).unwrap(),
            _ => Generator::bandlimited(sigma).unwrap(),
        };
        let f = Signal::Analytic(f);
        let grid = default_grid(sigma).unwrap();
        let mut errors = Vec::new();
        for rho in [sigma / 4.0, sigma / 2.0, sigma] {
            match project(&f, &gen, sigma, rho, &grid, 64, TOL) {
                Ok(r) => {
                    worst_bessel = worst_bessel.max(r.projection_norm_sq / r.norm_sq - 1.0);
                    errors.push((r.error_sq, r.norm_sq));
                    pyth.push(pythagoras_error(&r));
                }
                Err(e) => failures.push(format!("case {case}: {e}")),
            }
        }
        if errors
            .windows(2)
            .any(|w| w[1].0 > w[0].0 + MONOTONE_SLACK_REL * w[0].1)
        {
            violations += 1;
        }
    }
    Outcome {
        pass: failures.is_empty() && worst_bessel <= BESSEL_REL && violations == 0,
        detail: format!(
            "max projection/||f||^2 - 1 = {worst_bessel:.3e}, monotonicity violations {violations}, errors {}",
            if failures.is_empty() { "none".into() } else { failures.join("; ") }
        ),
    }
}

fn criterion_9(pyth: &[f64]) -> Outcome {
    let worst = pyth.iter().copied().fold(0.0, f64::max);
    Outcome {
        pass: !pyth.is_empty() && worst <= PYTHAGORAS_REL,
        detail: format!("{} projections, max relative discrepancy {worst:.3e}", pyth.len()),
    }
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_shiftspace"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_10() -> Outcome {
    let validate = ["validate", "--gen", "sinc:sigma=1"];
    let besterr = [
        "besterr",
        "--gen",
        "bspline:m=2,sigma=1",
        "--f",
        "gauss:width=1",
        "--sweep",
        "rho=0.25,0.5,1",
    ];
    let (v1, o1) = cli(&validate);
    let (v2, o2) = cli(&validate);
    let (b1, p1) = cli(&besterr);
    let (b2, p2) = cli(&besterr);
    let identical = o1 == o2 && p1 == p2 && !o1.is_empty() && !p1.is_empty();
    let codes = [
        (v1, 0),
        (v2, 0),
        (b1, 0),
        (b2, 0),
        (cli(&[]).0, 2),
        (
            cli(&["besterr", "--gen", "bspline:m=2,sigma=1", "--rho", "2", "--sigma", "1", "--f", "gauss:width=1"]).0,
            2,
        ),
        (cli(&["dfun", "--gen", "bspline:m=0,sigma=1", "--bogus"]).0, 2),
        (
            cli(&["project", "--gen", "bspline:m=2,sigma=1", "--f", "file:missing.csv"]).0,
            1,
        ),
        (cli(&["dfun", "--gen", "bspline:m=0,sigma=1"]).0, 0),
    ];
    let codes_ok = codes.iter().all(|(got, want)| got == want);
    Outcome {
        pass: identical && codes_ok,
        detail: format!(
            "byte-identical repeats: {identical}; exit codes {:?} (expected {:?})",
            codes.iter().map(|c| c.0).collect::<Vec<_>>(),
            codes.iter().map(|c| c.1).collect::<Vec<_>>()
        ),
    }
}

fn main() {
    let mut pyth = Vec::new();
    type Criterion = Box<dyn FnOnce(&mut Vec<f64>) -> Outcome>;
    let criteria: Vec<(&str, Criterion)> = vec![
        ("plancherel identity", Box::new(|_| criterion_1())),
        ("inner-product identity", Box::new(|_| criterion_2())),
        ("phi property suite", Box::new(|_| criterion_3())),
        ("periodization identities", Box::new(|_| criterion_4())),
        ("error formula vs least-squares oracle", Box::new(criterion_5)),
        ("membership gives zero error", Box::new(criterion_6)),
        ("orthogonal complement", Box::new(criterion_7)),
        ("bessel inequality and rho monotonicity", Box::new(criterion_8)),
        ("pythagoras consistency", Box::new(|p: &mut Vec<f64>| criterion_9(p))),
        ("cli determinism and exit codes", Box::new(|_| criterion_10())),
    ];
    let mut failed = 0;
    let stdout = std::io::stdout();
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let o = run(&mut pyth);
        failed += usize::from(!o.pass);
        let mut lock = stdout.lock();
        let _ = writeln!(
            lock,
            "criterion {:>2} {}: {name} ({})",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        let _ = lock.flush();
    }
    let _ = writeln!(stdout.lock(), "acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
