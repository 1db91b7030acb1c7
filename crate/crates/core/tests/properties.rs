//! Randomized invariants. Each block states a structural property that has
//! to hold for every input in the strategy's range, not just the fixtures
//! the unit tests pin down.

use proptest::prelude::*;

use landscape_lab::analysis::{agmon_distance, detect_peaks, ExtremumMode};
use landscape_lab::eigen::lowest_eigenpairs;
use landscape_lab::grid::Grid1D;
use landscape_lab::landscape::solve_landscape;
use landscape_lab::operator::assemble_hamiltonian;
use landscape_lab::potential::Potential;
use landscape_lab::regularize::{regularized_potential, BoundaryPolicy};
use landscape_lab::rng::Stream;

fn potential_values() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0..1e4f64, 16..200)
}

proptest! {
    /// Smoothing is an average with positive unit-mass weights, so it can
    /// never push the field past its own sup, and a constant field passes
    /// through untouched up to roundoff.
    #[test]
    fn smoothing_contracts_sup_and_fixes_constants(
        values in potential_values(),
        t in 1e-6..1e-2f64,
        c in 1e-3..1e3f64,
    ) {
        let n = values.len();
        let grid = Grid1D::new(n).unwrap();
        let sup = values.iter().fold(0.0f64, |a, &v| a.max(v));
        let v = Potential::new(grid.clone(), values, "random").unwrap();
        let vt = regularized_potential(&v, t, BoundaryPolicy::Reflect).unwrap();
        for (i, &w) in vt.values().iter().enumerate() {
            prop_assert!(
                w <= sup * (1.0 + 1e-12),
                "node {i}: smoothed value {w} exceeds sup {sup}"
            );
            prop_assert!(w >= 0.0, "node {i}: smoothing broke positivity: {w}");
        }

        let vc = Potential::new(grid, vec![c; n], "constant").unwrap();
        let vct = regularized_potential(&vc, t, BoundaryPolicy::Reflect).unwrap();
        for &w in vct.values() {
            prop_assert!((w - c).abs() <= 1e-12 * c, "constant {c} drifted to {w}");
        }
    }

    /// The landscape of a nonnegative potential is positive and no larger
    /// than the zero-potential solution x(1-x)/2 (plus its h^2/8 discrete
    /// sag), since adding potential only depresses it.
    #[test]
    fn landscape_is_positive_and_dominated_by_free_solution(
        values in potential_values(),
    ) {
        let n = values.len();
        let grid = Grid1D::new(n).unwrap();
        let v = Potential::new(grid.clone(), values, "random").unwrap();
        let op = assemble_hamiltonian(&grid, &v).unwrap();
        let u = solve_landscape(&op, &vec![1.0; n]).unwrap();
        let h = grid.h();
        for (i, &ui) in u.values().iter().enumerate() {
            prop_assert!(ui > 0.0, "node {i}: landscape value {ui} not positive");
            let x = grid.x(i);
            let free = 0.5 * x * (1.0 - x) + 0.125 * h * h;
            prop_assert!(
                ui <= free * (1.0 + 1e-10),
                "node {i}: {ui} exceeds the free landscape {free}"
            );
        }
    }

    /// Agmon distance is a pseudometric: zero at the base point, symmetric,
    /// and additive along the segment (which implies the triangle
    /// inequality in one dimension).
    #[test]
    fn agmon_distance_is_a_pseudometric(
        w in proptest::collection::vec(0.0..5e3f64, 32..128),
        lambda in 0.0..1e3f64,
        picks in proptest::collection::vec(0usize..1_000_000, 3),
    ) {
        let n = w.len();
        let grid = Grid1D::new(n).unwrap();
        let mut idx: Vec<usize> = picks.iter().map(|p| p % n).collect();
        idx.sort_unstable();
        let (a, b, c) = (idx[0], idx[1], idx[2]);
        let d = |r0, r1| agmon_distance(&grid, &w, lambda, r0, r1).unwrap();
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert!((d(a, c) - d(c, a)).abs() <= 1e-12 * d(a, c).abs());
        let through = d(a, b) + d(b, c);
        prop_assert!(
            (d(a, c) - through).abs() <= 1e-10 * (1.0 + through),
            "additivity broke: d(a,c) {} vs d(a,b)+d(b,c) {}",
            d(a, c),
            through
        );
    }

    /// Detected peaks are interior, sorted, and each clears the requested
    /// prominence; minima of a field are maxima of its negation.
    #[test]
    fn peaks_are_interior_sorted_and_prominent(
        field in proptest::collection::vec(-50.0..50.0f64, 8..120),
        prominence in 0.5..10.0f64,
    ) {
        let peaks = detect_peaks(&field, ExtremumMode::Maxima, prominence).unwrap();
        let idx = &peaks.indices;
        for w in idx.windows(2) {
            prop_assert!(w[0] < w[1], "indices not strictly increasing: {idx:?}");
        }
        for (&i, &p) in idx.iter().zip(&peaks.prominences) {
            prop_assert!(i > 0 && i + 1 < field.len(), "edge node {i} reported as a peak");
            prop_assert!(p >= prominence, "peak {i} prominence {p} below {prominence}");
        }

        let negated: Vec<f64> = field.iter().map(|x| -x).collect();
        let valleys = detect_peaks(&field, ExtremumMode::Minima, prominence).unwrap();
        let flipped = detect_peaks(&negated, ExtremumMode::Maxima, prominence).unwrap();
        prop_assert_eq!(&valleys.indices, &flipped.indices);
    }

    /// Counter streams: the same (seed, unit) always replays the same
    /// sequence, and uniforms stay in [0, 1).
    #[test]
    fn streams_replay_and_stay_in_range(seed in any::<u64>(), unit in any::<u64>()) {
        let mut a = Stream::for_unit(seed, unit);
        let mut b = Stream::for_unit(seed, unit);
        for _ in 0..32 {
            let x = a.uniform();
            prop_assert_eq!(x, b.uniform());
            prop_assert!((0.0..1.0).contains(&x), "uniform out of range: {x}");
        }
    }

    /// The lowest eigenvalue sits above min V (the kinetic part is
    /// positive) and below max V + 4/h^2 (the operator's sup bound).
    #[test]
    fn ground_state_energy_is_bracketed(
        values in proptest::collection::vec(0.0..1e3f64, 16..64),
    ) {
        let n = values.len();
        let grid = Grid1D::new(n).unwrap();
        let lo = values.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        let hi = values.iter().fold(0.0f64, |a, &v| a.max(v));
        let v = Potential::new(grid.clone(), values, "random").unwrap();
        let op = assemble_hamiltonian(&grid, &v).unwrap();
        let pair = &lowest_eigenpairs(&op, 1).unwrap()[0];
        let h = grid.h();
        prop_assert!(pair.lambda > lo, "lambda {} at or below min V {lo}", pair.lambda);
        prop_assert!(
            pair.lambda < hi + 4.0 / (h * h),
            "lambda {} above the Gershgorin bound",
            pair.lambda
        );
    }
}
