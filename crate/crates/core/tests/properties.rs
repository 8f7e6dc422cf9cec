//! Cross-module invariants exercised over seeded random instances.

use num_complex::Complex;
use proptest::prelude::*;

use renyi_dpi_core::channels::{pauli_twirl_b, KrausChannel};
use renyi_dpi_core::divergences::{
    alpha_z, classify_region, dpi_gap, renyi_alpha, sandwiched, AlphaZParams, RegionClass,
};
use renyi_dpi_core::linalg::{
    hs_inner, kron, partial_trace, schatten_norm, ComplexMatrix, HermitianOperator,
};
use renyi_dpi_core::rng::{derive_seed, SplitMix64};
use renyi_dpi_core::states::{ginibre, DensityOperator, PositiveOperator};

type M = ComplexMatrix<f64>;
type H = HermitianOperator<f64>;
type D = DensityOperator<f64>;
type P = PositiveOperator<f64>;

fn random_hermitian(dim: usize, seed: u64) -> H {
    let mut g = SplitMix64::new(seed);
    H::from_symmetric_parts(ginibre::<f64>(dim, dim, &mut g))
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> M {
    let mut g = SplitMix64::new(seed);
    ginibre::<f64>(rows, cols, &mut g)
}

fn full_rank_density(dim: usize, seed: u64) -> D {
    D::random(dim, dim, seed).unwrap().regularize(0.08).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eig_reconstructs_every_hermitian(seed in any::<u64>(), dim in 2usize..7) {
        let h = random_hermitian(dim, seed);
        let e = h.eig().unwrap();
        let rec = e.map_eigenvalues(|l| l);
        let rel = rec.sub(h.matrix()).frobenius_norm()
            / h.matrix().frobenius_norm().max(1e-300);
        prop_assert!(rel < 1e-9, "reconstruction residual {rel}");
    }

    #[test]
    fn power_composition(seed in any::<u64>(), p in -2.0f64..2.0, q in -2.0f64..2.0) {
        let wishart = P::random_strictly_positive(3, seed);
        let a = wishart.herm();
        let lhs = a.power(p).unwrap().power(q).unwrap();
        let rhs = a.power(p * q).unwrap();
        let scale = rhs.matrix().max_abs_entry().max(1.0);
        let diff = lhs.matrix().sub(rhs.matrix()).max_abs_entry() / scale;
        prop_assert!(diff < 1e-8, "composition residual {diff} at p={p}, q={q}");
    }

    #[test]
    fn holder_inequality_on_positive_pairs(seed in any::<u64>(), p in 1.05f64..8.0) {
        let q = p / (p - 1.0);
        let x = P::random_strictly_positive(3, seed);
        let y = P::random_strictly_positive(3, derive_seed(seed, &[1]));
        let lhs = schatten_norm(&x.matrix().matmul(y.matrix()), 1.0).unwrap();
        let rhs = schatten_norm(x.matrix(), p).unwrap() * schatten_norm(y.matrix(), q).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-10), "Tr|XY| = {lhs} > {rhs}");
    }

    #[test]
    fn partial_trace_duality(seed in any::<u64>()) {
        // <Tr_B(X), H_A> = <X, H_A (x) I_B>
        let x = random_matrix(6, 6, seed);
        let h_a = random_matrix(2, 2, derive_seed(seed, &[2]));
        let lhs = hs_inner(&partial_trace(&x, &[2, 3], &[0]).unwrap(), &h_a).unwrap();
        let rhs = hs_inner(&x, &kron(&h_a, &M::identity(3))).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn twirl_matches_marginal_tensor_mixed(seed in any::<u64>(), db in 2usize..4) {
        let da = 2usize;
        let rho = full_rank_density(da * db, seed);
        let twirled = pauli_twirl_b(&rho, (da, db)).unwrap();
        let marginal = rho.partial_trace(&[da, db], &[0]).unwrap();
        let expected = kron(
            marginal.matrix(),
            &M::identity(db).scale_re(1.0 / db as f64),
        );
        let diff = twirled.matrix().sub(&expected).max_abs_entry();
        prop_assert!(diff < 1e-9, "twirl mismatch {diff}");
    }

    #[test]
    fn adjoint_pairing_random_channels(seed in any::<u64>()) {
        let chan = KrausChannel::random(3, 2, 2, seed).unwrap();
        let x = random_matrix(3, 3, derive_seed(seed, &[3]));
        let y = random_matrix(2, 2, derive_seed(seed, &[4]));
        let lhs = hs_inner(&chan.apply(&x).unwrap(), &y).unwrap();
        let rhs = hs_inner(&x, &chan.adjoint_apply(&y).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn unitary_invariance_of_alpha_z(seed in any::<u64>()) {
        let rho = full_rank_density(3, seed);
        let sigma = P::from_density(&full_rank_density(3, derive_seed(seed, &[5])));
        let params = AlphaZParams::new(1.6, 1.1).unwrap();
        let base = alpha_z(&rho, &sigma, &params).unwrap().value();
        let u = renyi_dpi_core::states::haar_unitary::<f64>(3, derive_seed(seed, &[6]));
        let rho_u = D::from_matrix(u.matmul(rho.matrix()).matmul(&u.adjoint())).unwrap();
        let sigma_u = P::from_matrix(u.matmul(sigma.matrix()).matmul(&u.adjoint())).unwrap();
        let rotated = alpha_z(&rho_u, &sigma_u, &params).unwrap().value();
        prop_assert!((base - rotated).abs() < 1e-9);
    }
}

#[test]
fn reduction_identities_and_nonnegativity() {
    for seed in 0..25u64 {
        let rho = full_rank_density(3, seed);
        let sigma = P::from_density(&full_rank_density(3, derive_seed(seed, &[7])));
        for alpha in [0.5, 1.5, 2.0] {
            let via_renyi = renyi_alpha(&rho, &sigma, alpha).unwrap().value();
            let via_z1 = alpha_z(&rho, &sigma, &AlphaZParams::new(alpha, 1.0).unwrap())
                .unwrap()
                .value();
            assert!((via_renyi - via_z1).abs() <= 1e-10);

            let via_sandwich = sandwiched(&rho, &sigma, alpha).unwrap().value();
            let via_za = alpha_z(&rho, &sigma, &AlphaZParams::new(alpha, alpha).unwrap())
                .unwrap()
                .value();
            assert!((via_sandwich - via_za).abs() <= 1e-10);

            // sigma has trace one here, so the divergence is nonnegative in
            // the monotone regions.
            assert!(via_za >= -1e-9);
            assert!(via_z1 >= -1e-9);
        }
    }
}

#[test]
fn dpi_holds_across_monotone_regions_and_channel_kinds() {
    // A light version of the full acceptance campaign: one point per
    // monotone case, all three channel kinds, mixed dimensions.
    let points = [(0.5, 0.8), (1.5, 1.2), (2.5, 2.0)];
    let mut checked = 0usize;
    for (alpha, z) in points {
        let params = AlphaZParams::new(alpha, z).unwrap();
        assert!(classify_region(alpha, z).unwrap().is_monotone());
        for seed in 0..12u64 {
            let (da, db) = if seed % 2 == 0 { (2, 2) } else { (2, 3) };
            let dim = da * db;
            let rho = full_rank_density(dim, derive_seed(seed, &[8]));
            let sigma = P::from_density(&full_rank_density(dim, derive_seed(seed, &[9])));
            let channel = match seed % 3 {
                0 => KrausChannel::partial_trace_channel(&[da, db], &[0]).unwrap(),
                1 => KrausChannel::random(dim, dim, 2, derive_seed(seed, &[10])).unwrap(),
                _ => KrausChannel::unitary(renyi_dpi_core::states::haar_unitary::<f64>(
                    dim,
                    derive_seed(seed, &[11]),
                ))
                .unwrap(),
            };
            let gap = dpi_gap(&rho, &sigma, &channel, &params).unwrap();
            assert!(gap >= -1e-8, "DPI violated at ({alpha}, {z}): gap {gap}");
            checked += 1;
        }
    }
    assert_eq!(checked, 36);
}

#[test]
fn region_classifier_matches_monotonicity_summary() {
    // NotMonotone examples straddling each boundary.
    for (alpha, z) in [(3.0, 1.0), (0.5, 0.3), (1.5, 0.6), (1.5, 1.7), (2.5, 1.2)] {
        assert_eq!(classify_region(alpha, z).unwrap(), RegionClass::NotMonotone);
    }
}

#[test]
fn composed_channels_keep_the_dpi() {
    let params = AlphaZParams::new(1.5, 1.2).unwrap();
    let rho = full_rank_density(4, 1);
    let sigma = P::from_density(&full_rank_density(4, 2));
    let inner = KrausChannel::random(4, 3, 2, 3).unwrap();
    let outer = KrausChannel::random(3, 2, 2, 4).unwrap();
    let composed = inner.compose(&outer).unwrap();
    let report = composed.validate_cptp();
    assert!(report.tp_residual <= 1e-9);
    assert!(report.choi_min_eig >= -1e-9);
    let gap = dpi_gap(&rho, &sigma, &composed, &params).unwrap();
    assert!(gap >= -1e-8);
    // Data processing through the composition is at least as lossy as
    // through the inner channel alone.
    let inner_gap = dpi_gap(&rho, &sigma, &inner, &params).unwrap();
    assert!(gap >= inner_gap - 1e-9);
}

#[test]
fn schatten_norm_is_unitarily_invariant() {
    let x = random_matrix(3, 3, 77);
    let u = renyi_dpi_core::states::haar_unitary::<f64>(3, 78);
    for p in [1.0, 2.0, 3.5, f64::INFINITY] {
        let a = schatten_norm(&x, p).unwrap();
        let b = schatten_norm(&u.matmul(&x), p).unwrap();
        assert!((a - b).abs() < 1e-10, "p = {p}");
    }
}

#[test]
fn support_violation_matches_block_structure() {
    // sigma supported on the first basis vector; rho with mass epsilon on
    // the second must be flagged once epsilon crosses the tolerance.
    let sigma = P::from_matrix(M::diag(&[1.0, 0.0])).unwrap();
    for (eps, violated) in [(0.0, false), (1e-12, false), (1e-3, true)] {
        let rho = D::from_matrix(M::diag(&[1.0 - eps, eps])).unwrap();
        let v = renyi_dpi_core::divergences::support_violation(&rho, &sigma).unwrap();
        assert_eq!(v > 1e-9, violated, "eps = {eps}, violation = {v}");
        let d = alpha_z(&rho, &sigma, &AlphaZParams::new(1.5, 1.2).unwrap()).unwrap();
        assert_eq!(d.is_finite(), !violated);
    }
}

#[test]
fn alpha_z_matches_independent_eigensolver_values() {
    // Frozen values for a fixed non-commuting qubit pair, computed with an
    // independent LAPACK-based eigendecomposition (numpy.linalg.eigh) of
    // the same formulas. Covers alpha below 0, between 0 and 1, and above
    // 1, plus the Umegaki case.
    let rho = D::from_matrix(
        M::from_rows(vec![
            vec![Complex::new(0.6, 0.0), Complex::new(0.2, 0.1)],
            vec![Complex::new(0.2, -0.1), Complex::new(0.4, 0.0)],
        ])
        .unwrap(),
    )
    .unwrap();
    let sigma = P::from_matrix(
        M::from_rows(vec![
            vec![Complex::new(0.5, 0.0), Complex::new(-0.15, 0.05)],
            vec![Complex::new(-0.15, -0.05), Complex::new(0.5, 0.0)],
        ])
        .unwrap(),
    )
    .unwrap();

    let cases = [
        (1.5, 1.2, 0.388579890695118),
        (0.5, 0.8, 0.147640273750702),
        (2.0, 1.7, 0.465699792790774),
        (-0.5, 1.3, -0.143108798208028),
        (1.5, 1.5, 0.387963093751232),
        (1.5, 1.0, 0.389307652806016),
    ];
    for (alpha, z, expected) in cases {
        let got = alpha_z(&rho, &sigma, &AlphaZParams::new(alpha, z).unwrap())
            .unwrap()
            .value();
        assert!(
            (got - expected).abs() < 1e-11,
            "alpha_z({alpha}, {z}) = {got}, reference {expected}"
        );
    }
    let u = renyi_dpi_core::divergences::umegaki(&rho, &sigma).unwrap().value();
    assert!((u - 0.281559736727460).abs() < 1e-11, "umegaki = {u}");
}

#[test]
fn jacobi_handles_degenerate_and_clustered_spectra() {
    // Projectors, repeated eigenvalues, and tight clusters at dim 16.
    let proj = H::diag(&[1.0, 1.0, 0.0, 0.0]);
    let e = proj.eig().unwrap();
    assert!(e.eigenvalues[..2].iter().all(|&l| l.abs() < 1e-12));
    assert!(e.eigenvalues[2..].iter().all(|&l| (l - 1.0).abs() < 1e-12));

    let mut g = SplitMix64::new(404);
    let u = renyi_dpi_core::states::haar_unitary::<f64>(16, g.next_u64());
    let clustered: Vec<f64> = (0..16).map(|i| 1.0 + 1e-9 * i as f64).collect();
    let rotated = u
        .matmul(&M::diag(&clustered))
        .matmul(&u.adjoint());
    let h = H::from_symmetric_parts(rotated);
    let e = h.eig().unwrap();
    let rec = e.map_eigenvalues(|l| l);
    let rel = rec.sub(h.matrix()).frobenius_norm() / h.matrix().frobenius_norm();
    assert!(rel < 1e-9, "clustered reconstruction {rel}");
    for (got, want) in e.eigenvalues.iter().zip(&clustered) {
        assert!((got - want).abs() < 1e-8);
    }
}

#[test]
fn pure_state_support_edge_case() {
    // Orthogonal pure states: infinite divergence in every family member.
    let e0 = D::pure_from_vector(&[Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]).unwrap();
    let e1 = D::pure_from_vector(&[Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)]).unwrap();
    let sigma = P::from_density(&e1);
    assert!(!renyi_dpi_core::divergences::umegaki(&e0, &sigma).unwrap().is_finite());
    assert!(!renyi_alpha(&e0, &sigma, 0.5).unwrap().is_finite());
    assert!(!alpha_z(&e0, &sigma, &AlphaZParams::new(1.5, 1.2).unwrap())
        .unwrap()
        .is_finite());
}
