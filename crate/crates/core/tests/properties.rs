//! Invariants of the projection machinery, checked on random inputs.

use std::f64::consts::PI;

use proptest::prelude::*;
use shiftspace::numerics::{make_uniform_grid, read_table, write_csv, Axis, Tabulated};
use shiftspace::oracle::gram_matrix;
use shiftspace::shiftspace::{coeffs_from_zeta, default_grid, project, zeta_of_coeffs};
use shiftspace::{Generator, ShiftExpansion, Signal, SplineParams, C64};

const TOL: f64 = 1e-12;

fn generator(kind: u8, sigma: f64) -> Generator {
    match kind {
        m @ 0..=3 => Generator::bspline(SplineParams::new(sigma, m as usize).unwrap()),
        4 => Generator::gaussian(1.0).unwrap(),
        _ => Generator::bandlimited(sigma).unwrap(),
    }
}

fn coeffs(j: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2 * j + 1)
        .prop_map(|v| v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
}

fn packet() -> impl Strategy<Value = Generator> {
    (0.5..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
        .prop_map(|(w, c, f)| Generator::gaussian_packet(w, c, f).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coefficients_survive_the_symbol_round_trip(c in coeffs(12), sigma in 0.5..2.0f64) {
        let grid = default_grid(sigma).unwrap();
        let e = ShiftExpansion::centered(sigma, sigma, c).unwrap();
        let back = coeffs_from_zeta(&zeta_of_coeffs(&e, &grid).unwrap(), 16).unwrap();
        for j in -16..=16 {
            prop_assert!((back.coeff(j) - e.coeff(j)).norm() < 1e-10);
        }
    }

    #[test]
    fn projection_obeys_bessel(f in packet(), kind in 0u8..6, sigma in 0.5..2.0f64, frac in 0.1..1.0f64) {
        let gen = generator(kind, sigma);
        let grid = default_grid(sigma).unwrap();
        let r = project(&Signal::Analytic(f), &gen, sigma, frac * sigma, &grid, 32, TOL).unwrap();
        prop_assert!(r.projection_norm_sq <= r.norm_sq * (1.0 + 1e-9));
        prop_assert!(r.error_sq >= -1e-12 * r.norm_sq);
        prop_assert!((r.projection_norm_sq + r.error_sq - r.norm_sq).abs() <= 1e-6 * r.norm_sq);
    }

    #[test]
    fn projection_is_linear(f in packet(), g in packet(), a_re in -1.0..1.0f64, a_im in -1.0..1.0f64, kind in 0u8..6) {
        let sigma = 1.0;
        let gen = generator(kind, sigma);
        let grid = default_grid(sigma).unwrap();
        let a = C64::new(a_re, a_im);
        let sum = Generator::combine(vec![(a, f.clone()), (C64::new(1.0, 0.0), g.clone())]).unwrap();
        let p = |s: Generator| project(&Signal::Analytic(s), &gen, sigma, sigma, &grid, 24, TOL).unwrap().coeffs;
        let (pf, pg, ps) = (p(f), p(g), p(sum));
        for j in -24..=24 {
            let want = a * pf.coeff(j) + pg.coeff(j);
            prop_assert!((ps.coeff(j) - want).norm() < 1e-8, "j={} got {} want {}", j, ps.coeff(j), want);
        }
    }

    #[test]
    fn projection_is_idempotent(f in packet(), kind in 0u8..6) {
        // full band, where the projected symbol is smooth and periodic, so
        // truncating its coefficients leaves a member of the space
        let sigma = 1.0;
        let rho = sigma;
        let gen = generator(kind, sigma);
        let grid = default_grid(sigma).unwrap();
        let first = project(&Signal::Analytic(f), &gen, sigma, rho, &grid, 24, TOL).unwrap();
        let member = first.coeffs.to_signal(&gen).unwrap();
        let second = project(&Signal::Analytic(member), &gen, sigma, rho, &grid, 24, TOL).unwrap();
        let scale = first.coeffs.coeff_norm_sq().sqrt().max(1e-12);
        for j in -24..=24 {
            prop_assert!((second.coeffs.coeff(j) - first.coeffs.coeff(j)).norm() <= 1e-6 * scale);
        }
        prop_assert!(second.error_sq <= 1e-8 * second.norm_sq.max(1e-300));
    }

    #[test]
    fn gram_matrices_are_positive_semidefinite(kind in 0u8..6, sigma in 0.5..2.0f64) {
        let g = gram_matrix(&generator(kind, sigma), sigma, 12).unwrap();
        prop_assert!(g.min_eigenvalue >= -1e-10 * g.max_eigenvalue);
        for i in 0..g.gram.nrows() {
            for j in 0..g.gram.ncols() {
                prop_assert!((g.gram[(i, j)] - g.gram[(j, i)].conj()).norm() <= 1e-12 * g.max_eigenvalue);
            }
        }
    }

    #[test]
    fn tables_round_trip_through_csv(vals in prop::collection::vec((-1e6..1e6f64, -1e6..1e6f64), 2..40), start in -10.0..10.0f64, len in 0.1..10.0f64) {
        let grid = make_uniform_grid(start, start + len, vals.len()).unwrap();
        let values = vals.into_iter().map(|(a, b)| C64::new(a, b)).collect();
        let t = Tabulated::new(grid, values).unwrap();
        let dir = std::env::temp_dir().join(format!("shiftspace-prop-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("t{}.csv", start.to_bits()));
        let mut file = std::fs::File::create(&path).unwrap();
        write_csv(&mut file, "y", &t).unwrap();
        drop(file);
        let (axis, back) = read_table(&path).unwrap();
        std::fs::remove_file(&path).ok();
        prop_assert_eq!(axis, Axis::Frequency);
        prop_assert_eq!(back.values(), t.values());
    }
}

proptest! {
    // mixed sums carry loose decay bounds, so these cases are costly
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn residual_is_orthogonal_to_the_space(f in packet(), kind in 3u8..6, shift in -4i64..=4) {
        // <f - Pf, B(. - k h)> = <f, B_k> - <Pf, B_k> = 0, tested through the
        // projection of f + B_k: its error equals the error of f.
        let sigma = 1.0;
        let gen = generator(kind, sigma);
        let grid = default_grid(sigma).unwrap();
        let basis = gen.shifted(shift as f64 * PI / sigma);
        let moved = Generator::combine(vec![(C64::new(1.0, 0.0), f.clone()), (C64::new(0.5, 0.0), basis)]).unwrap();
        let e0 = project(&Signal::Analytic(f), &gen, sigma, sigma, &grid, 24, TOL).unwrap().error_sq;
        let e1 = project(&Signal::Analytic(moved), &gen, sigma, sigma, &grid, 24, TOL).unwrap().error_sq;
        prop_assert!((e0 - e1).abs() <= 1e-8 * e0.max(1e-6));
    }
}
