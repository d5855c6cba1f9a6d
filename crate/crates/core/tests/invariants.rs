//! Cross-module invariants: the series, the sampler and the exact
//! exponential must all describe the same operator.

use logicint::matrix::{c64, frobenius_distance, CMatrix};
use logicint::montecarlo::mc_estimate;
use logicint::spin::{build_hamiltonian, Bond, BondKind, BondSystem};
use logicint::{hermitian_evolve, series_expand};

fn mixed_system(n: usize) -> BondSystem {
    let bonds = (0..n - 1)
        .map(|i| Bond {
            sites: vec![i, i + 1],
            coupling: if i % 2 == 0 { 0.9 } else { -0.6 },
            kind: if i % 2 == 0 {
                BondKind::Exchange
            } else {
                BondKind::Antiferro
            },
        })
        .collect();
    BondSystem::new(n, bonds).unwrap()
}

#[test]
fn taylor_consistency_bound_holds() {
    // ‖render(series) − exact‖_F ≤ √dim · B^{n+1}/(n+1)! · e^B + 1e−12
    // with B = |β| Σ_b |J_b| ‖h_b‖₂; the reported truncation_bound is the
    // leading factor of that envelope with ‖h_b‖ dropped, so check both
    // the envelope and that the report scales it correctly.
    for n_sites in 2..=4usize {
        for sys in [
            BondSystem::chain(n_sites, 1.0, BondKind::Exchange).unwrap(),
            BondSystem::chain(n_sites, 0.8, BondKind::Antiferro).unwrap(),
            mixed_system(n_sites),
        ] {
            let h = build_hamiltonian(&sys).unwrap();
            let dim = 1usize << n_sites;
            for beta in [0.15_f64, 0.6] {
                let exact = hermitian_evolve(&h, beta).unwrap();
                let b: f64 = sys
                    .bonds()
                    .iter()
                    .map(|bond| {
                        let h_norm = match bond.kind {
                            BondKind::Exchange => 1.0,
                            BondKind::Antiferro => 2.0,
                            BondKind::Custom(_) => unreachable!(),
                        };
                        bond.coupling.abs() * h_norm * beta
                    })
                    .sum();
                for order in [2usize, 5, 9, 14] {
                    let series = series_expand(&sys, beta, order).unwrap();
                    let dist = frobenius_distance(&series.sum.render(), &exact);
                    let mut lead = 1.0;
                    for k in 1..=(order + 1) {
                        lead *= b / k as f64;
                    }
                    let envelope = (dim as f64).sqrt() * lead * b.exp() + 1e-12;
                    assert!(
                        dist <= envelope,
                        "{n_sites} sites, beta {beta}, order {order}: \
                         dist {dist:.3e} > envelope {envelope:.3e}"
                    );
                    // the reported bound is the rate-only leading term
                    let mut rate_lead = 1.0;
                    let rate: f64 =
                        sys.bonds().iter().map(|bond| bond.coupling.abs()).sum();
                    for k in 1..=(order + 1) {
                        rate_lead *= rate * beta / k as f64;
                    }
                    assert!((series.truncation_bound - rate_lead).abs() <= 1e-15);
                }
            }
        }
    }
}

#[test]
fn sampler_is_unbiased_across_seeds() {
    // pool 20 independent runs; the pooled mean must approach the exact
    // exponential within 3 pooled standard errors
    let sys = BondSystem::chain(3, 1.0, BondKind::Exchange).unwrap();
    let beta = 0.5;
    let exact = hermitian_evolve(&build_hamiltonian(&sys).unwrap(), beta).unwrap();

    let per_run = 20_000usize;
    let runs = 20usize;
    let mut pooled = CMatrix::zeros(8, 8);
    let mut pooled_var = 0.0;
    for seed in 0..runs as u64 {
        let est = mc_estimate(&sys, beta, per_run, 1000 + seed).unwrap();
        pooled += &est.mean;
        pooled_var += est.stderr * est.stderr;
    }
    pooled /= c64(runs as f64, 0.0);
    let pooled_stderr = pooled_var.sqrt() / runs as f64;
    let dist = frobenius_distance(&pooled, &exact);
    assert!(
        dist < 3.0 * pooled_stderr,
        "pooled distance {dist:.3e} vs 3·stderr {:.3e}",
        3.0 * pooled_stderr
    );
}

#[test]
fn stderr_scales_like_inverse_sqrt_samples() {
    let sys = BondSystem::chain(2, 1.0, BondKind::Exchange).unwrap();
    let small = mc_estimate(&sys, 0.3, 10_000, 3).unwrap();
    let large = mc_estimate(&sys, 0.3, 40_000, 3).unwrap();
    let ratio = large.stderr / small.stderr;
    assert!(
        (ratio - 0.5).abs() < 0.15,
        "stderr ratio {ratio:.3} far from 1/2"
    );
}

#[test]
fn antiferro_series_sees_the_loop_factor() {
    // a single antiferro bond: H = −J(I − E) has exp(iβH) =
    // e^{−iβJ·0}·P_triplet + e^{2iβJ}·(−... ) — concretely
    // exp(−iβJ(I−E)) = I + ((e^{−2iβJ} − 1)/2)(I − E). The series must
    // reproduce that closed form, loops and all.
    let sys = BondSystem::chain(2, 1.0, BondKind::Antiferro).unwrap();
    let beta = 0.7;
    let series = series_expand(&sys, beta, 20).unwrap();
    let e_mat = logicint::exchange_gate(2, 0, 1).unwrap().to_matrix();
    let proj = (CMatrix::identity(4, 4) - &e_mat) * c64(0.5, 0.0);
    let closed = CMatrix::identity(4, 4)
        + proj * (c64(0.0, -2.0 * beta).exp() - c64(1.0, 0.0));
    assert!(frobenius_distance(&series.sum.render(), &closed) < 1e-12);
}
