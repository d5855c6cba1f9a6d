//! The anisotropic Ising transfer matrix, its unitarity locus under
//! analytic continuation, and the partition-function identity
//! `Z ∝ tr T^τ`.
//!
//! Conventions, pinned by matching the explicitly known two-site matrix:
//! `⟨σ̃|T|σ⟩ = 2^{−N/2} exp(−β₁ Σ_i σ̃_i σ_i − β Σ_i σ_i σ_{i+1})` with
//! open spatial boundary, spins `σ_i ∈ {+1, −1}`, and `+` mapped to bit 0
//! in big-endian site order. With `β₁ = −iπ/4` and `β = iγ`, twice the
//! transfer matrix equals the unit-phase matrix times
//! `diag(Δ, Δ*, Δ*, Δ)`, `Δ = e^{−iγ}`; the display omits the `2^{−N/2}`
//! prefactor, which is kept here because unitarity requires it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{c64, unitary_defect, CMatrix, MAX_SITES};

/// Couplings of the anisotropic model: `coupling_time` multiplies the
/// between-slice bond, `coupling_space` the in-slice nearest-neighbour
/// bond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingCouplings {
    pub n_sites: usize,
    pub coupling_time: Complex64,
    pub coupling_space: Complex64,
}

impl IsingCouplings {
    pub fn new(n_sites: usize, coupling_time: Complex64, coupling_space: Complex64) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidArgument(format!(
                "transfer matrix needs at least 2 sites, got {n_sites}"
            )));
        }
        if n_sites > MAX_SITES {
            return Err(Error::SizeLimit(format!(
                "{n_sites}-site transfer matrix is above the {MAX_SITES}-site cap"
            )));
        }
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(coupling_time) || !finite(coupling_space) {
            return Err(Error::InvalidArgument("couplings must be finite".into()));
        }
        Ok(Self {
            n_sites,
            coupling_time,
            coupling_space,
        })
    }
}

/// A constructed transfer matrix together with the couplings it came from.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub couplings: IsingCouplings,
    pub matrix: CMatrix,
}

impl TransferMatrix {
    /// The matrix with the `2^{−N/2}` normalization stripped, every entry
    /// a bare Boltzmann weight. For two sites this is the form the span
    /// and unit-modulus analyses run on.
    pub fn without_prefactor(&self) -> CMatrix {
        let scale = c64(2.0_f64.powf(self.couplings.n_sites as f64 / 2.0), 0.0);
        &self.matrix * scale
    }
}

/// Spin value (+1 or −1) of site `site` in basis index `idx`.
#[inline]
fn spin(idx: usize, site: usize, n_sites: usize) -> f64 {
    if (idx >> (n_sites - 1 - site)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn time_overlap(row: usize, col: usize, n: usize) -> f64 {
    (0..n).map(|i| spin(row, i, n) * spin(col, i, n)).sum()
}

fn space_energy(col: usize, n: usize) -> f64 {
    (0..n - 1)
        .map(|i| spin(col, i, n) * spin(col, i + 1, n))
        .sum()
}

/// Build the transfer matrix for the given couplings.
pub fn transfer_matrix(c: &IsingCouplings) -> Result<TransferMatrix> {
    let c = IsingCouplings::new(c.n_sites, c.coupling_time, c.coupling_space)?;
    let n = c.n_sites;
    let dim = 1usize << n;
    let prefactor = c64(2.0_f64.powf(-(n as f64) / 2.0), 0.0);
    let matrix = CMatrix::from_fn(dim, dim, |row, col| {
        let exponent = -c.coupling_time * time_overlap(row, col, n)
            - c.coupling_space * space_energy(col, n);
        prefactor * exponent.exp()
    });
    Ok(TransferMatrix {
        couplings: c,
        matrix,
    })
}

/// `‖T T† − I‖_F` for the transfer matrix at the given couplings.
pub fn unitarity_defect(c: &IsingCouplings) -> Result<f64> {
    Ok(unitary_defect(&transfer_matrix(c)?.matrix))
}

/// Brute-force and transfer-matrix evaluations of the partition function,
/// with their ratio.
#[derive(Debug, Clone, Copy)]
pub struct PartitionCheck {
    pub z_brute: Complex64,
    pub z_transfer: Complex64,
    pub ratio: Complex64,
}

/// Compare `tr T^τ` against the direct sum over all spin assignments of a
/// lattice with `tau` time slices (periodic in time, open in space).
///
/// The brute-force sum requires real couplings and caps at 24 spins.
pub fn partition_check(c: &IsingCouplings, tau: usize) -> Result<PartitionCheck> {
    if tau < 1 {
        return Err(Error::InvalidArgument("tau must be >= 1".into()));
    }
    let spins = c.n_sites.checked_mul(tau).filter(|&s| s <= 24).ok_or_else(|| {
        Error::SizeLimit(format!(
            "{} x {tau} lattice is above the 24-spin brute-force cap",
            c.n_sites
        ))
    })?;
    if c.coupling_time.im.abs() > 1e-12 || c.coupling_space.im.abs() > 1e-12 {
        return Err(Error::ContractViolation(
            "brute-force partition sum requires real couplings".into(),
        ));
    }
    let t = transfer_matrix(c)?.matrix;
    let mut power = CMatrix::identity(t.nrows(), t.ncols());
    for _ in 0..tau {
        power = &power * &t;
    }
    let z_transfer = power.trace();

    let (bt, bs) = (c.coupling_time.re, c.coupling_space.re);
    let n = c.n_sites;
    let mut z_brute = 0.0_f64;
    let spin_of = |assignment: usize, site: usize, slice: usize| -> f64 {
        if (assignment >> (slice * n + site)) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    };
    for assignment in 0..(1usize << spins) {
        let mut energy = 0.0;
        for slice in 0..tau {
            let next = (slice + 1) % tau;
            for site in 0..n {
                energy += bt * spin_of(assignment, site, slice) * spin_of(assignment, site, next);
            }
            for site in 0..n - 1 {
                energy +=
                    bs * spin_of(assignment, site, slice) * spin_of(assignment, site + 1, slice);
            }
        }
        z_brute += (-energy).exp();
    }
    let z_brute = c64(z_brute, 0.0);
    Ok(PartitionCheck {
        z_brute,
        z_transfer,
        ratio: z_brute / z_transfer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::frobenius_distance;
    use crate::span::perm_span_membership;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    /// Couplings on the unitarity locus: `β₁ = ∓iπ/4`, `β = iγ`.
    fn locus(n_sites: usize, gamma: f64, minus_sign: bool) -> IsingCouplings {
        let sign = if minus_sign { -1.0 } else { 1.0 };
        IsingCouplings::new(n_sites, c64(0.0, sign * FRAC_PI_4), c64(0.0, gamma)).unwrap()
    }

    /// The printed two-site matrix: unit-phase factor times diag(Δ,Δ*,Δ*,Δ).
    pub(crate) fn printed_two_site_matrix(gamma: f64) -> CMatrix {
        let i = c64(0.0, 1.0);
        let o = c64(1.0, 0.0);
        let phase = CMatrix::from_row_slice(
            4,
            4,
            &[
                i, o, o, -i,
                o, i, -i, o,
                o, -i, i, o,
                -i, o, o, i,
            ],
        );
        let delta = Complex64::from_polar(1.0, -gamma);
        phase
            * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                delta,
                delta.conj(),
                delta.conj(),
                delta,
            ]))
    }

    #[test]
    fn printed_matrix_reproduction() {
        for gamma in [0.0, 0.3] {
            let t = transfer_matrix(&locus(2, gamma, true)).unwrap();
            let doubled = t.matrix * c64(2.0, 0.0);
            assert!(
                frobenius_distance(&doubled, &printed_two_site_matrix(gamma)) < 1e-12,
                "gamma = {gamma}"
            );
        }
    }

    #[test]
    fn zero_couplings_give_flat_matrix() {
        let c = IsingCouplings::new(3, c64(0.0, 0.0), c64(0.0, 0.0)).unwrap();
        let t = transfer_matrix(&c).unwrap();
        let want = c64(2.0_f64.powf(-1.5), 0.0);
        assert!(t.matrix.iter().all(|z| (z - want).norm() < 1e-15));
    }

    #[test]
    fn real_couplings_give_positive_entries() {
        let c = IsingCouplings::new(3, c64(0.4, 0.0), c64(-0.2, 0.0)).unwrap();
        let t = transfer_matrix(&c).unwrap();
        assert!(t.matrix.iter().all(|z| z.im == 0.0 && z.re > 0.0));
    }

    #[test]
    fn factorizes_into_symmetric_times_diagonal() {
        let c = IsingCouplings::new(3, c64(0.3, -0.7), c64(0.1, 0.9)).unwrap();
        let t = transfer_matrix(&c).unwrap().matrix;
        let dim = t.nrows();
        let pre = c64(2.0_f64.powf(-1.5), 0.0);
        let s = CMatrix::from_fn(dim, dim, |r, col| {
            pre * (-c.coupling_time * time_overlap(r, col, 3)).exp()
        });
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |col, _| {
            (-c.coupling_space * space_energy(col, 3)).exp()
        }));
        assert!(frobenius_distance(&s, &s.transpose()) < 1e-13);
        assert!(frobenius_distance(&(&s * &d), &t) < 1e-13);
    }

    #[test]
    fn unitary_on_locus_for_both_signs() {
        for n in 2..=5usize {
            for gamma in [0.0, 0.7, 2.1] {
                for minus in [true, false] {
                    let defect = unitarity_defect(&locus(n, gamma, minus)).unwrap();
                    assert!(
                        defect < 1e-12,
                        "n = {n}, gamma = {gamma}, minus = {minus}: defect {defect:.3e}"
                    );
                }
            }
        }
    }

    #[test]
    fn far_from_unitary_off_locus() {
        let c = IsingCouplings::new(3, c64(0.0, FRAC_PI_3), c64(0.0, 0.5)).unwrap();
        assert!(unitarity_defect(&c).unwrap() > 0.1);
    }

    #[test]
    fn locus_is_isolated_within_principal_window() {
        // β₁ = iy scanned over (−π/2, π/2); ±π/4 are the only unitary
        // points there (the locus repeats with period π/2 outside)
        let steps = 80;
        for k in 1..steps {
            let y = -PI / 2.0 + PI * k as f64 / steps as f64;
            if (y.abs() - FRAC_PI_4).abs() <= 0.05 {
                continue;
            }
            let c = IsingCouplings::new(2, c64(0.0, y), c64(0.0, 0.3)).unwrap();
            assert!(
                unitarity_defect(&c).unwrap() > 1e-3,
                "y = {y} unexpectedly near-unitary"
            );
        }
    }

    #[test]
    fn membership_tracks_delta_reality() {
        for (gamma, expect) in [
            (0.0, true),
            (PI, true),
            (2.0 * PI, true),
            (0.3, false),
            (1.0, false),
            (PI / 2.0, false),
        ] {
            let t = transfer_matrix(&locus(2, gamma, true)).unwrap();
            let doubled = t.matrix * c64(2.0, 0.0);
            let report = perm_span_membership(&doubled).unwrap();
            assert_eq!(report.member, expect, "gamma = {gamma}");
        }
    }

    #[test]
    fn partition_ratio_at_zero_couplings() {
        let c = IsingCouplings::new(3, c64(0.0, 0.0), c64(0.0, 0.0)).unwrap();
        let check = partition_check(&c, 2).unwrap();
        let want = 2.0_f64.powf(3.0 * 2.0 / 2.0);
        assert!((check.ratio - c64(want, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn partition_ratio_is_coupling_independent() {
        let pairs = [(0.4, 0.3), (0.7, 0.2), (-0.5, 0.9), (0.1, -0.8), (1.1, 0.6)];
        let mut ratios = Vec::new();
        for (bt, bs) in pairs {
            let c = IsingCouplings::new(3, c64(bt, 0.0), c64(bs, 0.0)).unwrap();
            ratios.push(partition_check(&c, 3).unwrap().ratio);
        }
        for r in &ratios[1..] {
            assert!(
                (r - ratios[0]).norm() / ratios[0].norm() < 1e-10,
                "ratios {ratios:?}"
            );
        }
    }

    #[test]
    fn partition_brute_force_hand_sum() {
        // n = 2, τ = 2: sixteen spin assignments summed by an independent
        // loop written directly against the displayed energy
        let (bt, bs) = (0.5, 0.5);
        let c = IsingCouplings::new(2, c64(bt, 0.0), c64(bs, 0.0)).unwrap();
        let check = partition_check(&c, 2).unwrap();

        let mut hand = 0.0_f64;
        let vals = [1.0_f64, -1.0];
        for s00 in vals {
            for s10 in vals {
                for s01 in vals {
                    for s11 in vals {
                        // time bonds appear twice (slice 0→1 and 1→0)
                        let time = 2.0 * (s00 * s01 + s10 * s11);
                        let space = s00 * s10 + s01 * s11;
                        hand += (-(bt * time + bs * space)).exp();
                    }
                }
            }
        }
        assert!((check.z_brute - c64(hand, 0.0)).norm() < 1e-10 * hand.abs());
    }

    #[test]
    fn partition_check_guards() {
        let c = IsingCouplings::new(5, c64(0.1, 0.0), c64(0.1, 0.0)).unwrap();
        assert!(matches!(partition_check(&c, 5), Err(Error::SizeLimit(_))));
        assert!(matches!(
            partition_check(&c, 0),
            Err(Error::InvalidArgument(_))
        ));
        let complex_c = IsingCouplings::new(2, c64(0.1, 0.2), c64(0.1, 0.0)).unwrap();
        assert!(matches!(
            partition_check(&complex_c, 2),
            Err(Error::ContractViolation(_))
        ));
    }
}
