//! Membership in the complex span of permutation matrices, explicit
//! least-squares decompositions over a gate set, and the search for
//! decompositions whose coefficients all have modulus 1.
//!
//! The span of all `n × n` permutation matrices is exactly the set of
//! matrices whose row sums and column sums all equal one common value, a
//! subspace of dimension `(n−1)² + 1`. Membership therefore reduces to a
//! row/column-sum check; the least-squares projection onto the span has a
//! closed form, used as an independent residual alongside the sum
//! criterion.

use itertools::Itertools;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{GateSum, PermutationGate};
use crate::matrix::{c64, CMatrix};

/// Relative tolerance for the membership criterion.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// Residual below which an on-support solve counts as exact.
pub const UNIT_SEARCH_RESIDUAL_TOL: f64 = 1e-10;

/// Allowed deviation of a coefficient modulus from 1.
pub const UNIT_MODULUS_TOL: f64 = 1e-9;

/// Cap on the support-enumeration work of [`unit_modulus_search`].
const SEARCH_BUDGET: u128 = 5_000_000;

/// Outcome of a permutation-span membership test.
#[derive(Debug, Clone)]
pub struct SpanReport {
    pub member: bool,
    /// The shared row/column sum, when `member`.
    pub common_sum: Option<Complex64>,
    /// Relative Frobenius distance to the least-squares projection onto
    /// the span.
    pub residual: f64,
    /// An explicit decomposition over all permutations, when `member` and
    /// the dimension is small enough to enumerate them.
    pub coefficients: Option<GateSum>,
}

/// All `dim!` permutation gates on `dim` indices, in lexicographic order.
pub fn all_permutations(dim: usize) -> Result<Vec<PermutationGate>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if dim > 8 {
        return Err(Error::SizeLimit(format!(
            "enumerating {dim}! permutations is out of range (dim cap 8)"
        )));
    }
    Ok((0..dim)
        .permutations(dim)
        .map(|p| PermutationGate::new(p).expect("itertools yields bijections"))
        .collect())
}

fn row_col_sums(m: &CMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    let mut sums = Vec::with_capacity(2 * n);
    for r in 0..n {
        sums.push(m.row(r).sum());
    }
    for c in 0..n {
        sums.push(m.column(c).sum());
    }
    sums
}

/// Least-squares projection of `m` onto the constant-row-and-column-sum
/// subspace: `(I − J/n) m (I − J/n) + mean(m) J` with `J` the all-ones
/// matrix.
fn project_onto_span(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let nf = c64(n as f64, 0.0);
    let j = CMatrix::from_element(n, n, c64(1.0, 0.0));
    let centering = CMatrix::identity(n, n) - &j / nf;
    let mean = m.sum() / (nf * nf);
    &centering * m * &centering + j * mean
}

/// Decide membership of `m` in the complex span of all permutation
/// matrices of its dimension.
pub fn perm_span_membership(m: &CMatrix) -> Result<SpanReport> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "membership needs a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    let scale = m.norm().max(1.0);
    let sums = row_col_sums(m);
    let common = sums.iter().sum::<Complex64>() / c64(sums.len() as f64, 0.0);
    let sums_agree = sums
        .iter()
        .all(|s| (s - common).norm() <= MEMBERSHIP_TOL * scale);

    let norm = m.norm();
    let residual = if norm == 0.0 {
        0.0
    } else {
        (m - project_onto_span(m)).norm() / norm
    };
    let member = sums_agree && residual <= MEMBERSHIP_TOL;

    let coefficients = if member && n <= 6 {
        let gates = all_permutations(n)?;
        Some(least_squares_decompose(m, &gates)?.0)
    } else {
        None
    };
    Ok(SpanReport {
        member,
        common_sum: member.then_some(common),
        residual,
        coefficients,
    })
}

fn vectorize(m: &CMatrix) -> Vec<Complex64> {
    m.iter().copied().collect()
}

/// Minimum-norm least squares `argmin_x ‖B x − y‖` via the Gram
/// pseudo-inverse `B⁺ = (BᴴB)⁺ Bᴴ`, with the rank cut done on the
/// (Hermitian, PSD) Gram spectrum.
fn gram_least_squares(basis: &CMatrix, target: &CMatrix) -> CMatrix {
    let gram = basis.adjoint() * basis;
    let rhs = basis.adjoint() * target;
    let eig = gram.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b));
    let tol = lambda_max * 1e-12;
    let inv = eig
        .eigenvalues
        .map(|l| if l > tol { c64(1.0 / l, 0.0) } else { c64(0.0, 0.0) });
    &eig.eigenvectors * CMatrix::from_diagonal(&inv) * eig.eigenvectors.adjoint() * rhs
}

/// Minimum-norm least-squares coefficients of `m` over the given gates,
/// plus the relative Frobenius residual of the reconstruction.
pub fn least_squares_decompose(
    m: &CMatrix,
    gates: &[PermutationGate],
) -> Result<(GateSum, f64)> {
    if gates.is_empty() {
        return Err(Error::InvalidArgument(
            "least-squares decomposition needs at least one gate".into(),
        ));
    }
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    if gates.iter().any(|g| g.dim() != n) {
        return Err(Error::InvalidArgument(
            "all gates must match the matrix dimension".into(),
        ));
    }
    let basis = CMatrix::from_fn(n * n, gates.len(), |r, c| {
        vectorize(&gates[c].to_matrix())[r]
    });
    let target = CMatrix::from_fn(n * n, 1, |r, _| m[(r % n, r / n)]);
    let coeffs = gram_least_squares(&basis, &target);
    let norm = m.norm();
    let abs_residual = (&basis * &coeffs - &target).norm();
    let residual = if norm == 0.0 { abs_residual } else { abs_residual / norm };
    let sum = GateSum::from_terms(
        n,
        gates
            .iter()
            .cloned()
            .zip(coeffs.iter().copied()),
    )?;
    Ok((sum, residual))
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Enumerate supports of up to `max_support` permutation matrices, solve on
/// each support, and keep the solutions whose coefficients all have modulus
/// 1 and whose residual is negligible.
///
/// Only dimensions 2, 4 and 8 (registers of up to 3 bits) are in range, and
/// the enumeration refuses to start when the total number of supports would
/// exceed an internal budget — large dimensions stay feasible only for tiny
/// `max_support`.
pub fn unit_modulus_search(m: &CMatrix, max_support: usize) -> Result<Vec<GateSum>> {
    let n = m.nrows();
    if m.ncols() != n || !matches!(n, 2 | 4 | 8) {
        return if n > 8 {
            Err(Error::SizeLimit(format!(
                "unit-modulus search caps at 8x8, got {n}x{}",
                m.ncols()
            )))
        } else {
            Err(Error::InvalidArgument(format!(
                "unit-modulus search needs a 2^N x 2^N matrix with N <= 3, got {n}x{}",
                m.ncols()
            )))
        };
    }
    if max_support == 0 || max_support > 6 {
        return Err(Error::InvalidArgument(format!(
            "max_support must be in 1..=6, got {max_support}"
        )));
    }
    let gates = all_permutations(n)?;
    let total: u128 = (1..=max_support).map(|k| binomial(gates.len(), k)).sum();
    if total > SEARCH_BUDGET {
        return Err(Error::SizeLimit(format!(
            "support enumeration would visit {total} subsets, above the {SEARCH_BUDGET} budget"
        )));
    }

    // cells that any admissible support must cover: residual below the
    // acceptance threshold forces every entry above it to be hit
    let norm = m.norm();
    let needed: u64 = m
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > UNIT_SEARCH_RESIDUAL_TOL * norm)
        .map(|(i, _)| 1u64 << i)
        .fold(0, |acc, b| acc | b);
    let covers: Vec<u64> = gates
        .iter()
        .map(|g| {
            g.image()
                .iter()
                .enumerate()
                // column-major cell bit, matching vectorize()
                .map(|(col, &row)| 1u64 << (col * n + row))
                .fold(0, |acc, b| acc | b)
        })
        .collect();

    let mut found = Vec::new();
    for k in 1..=max_support {
        for combo in (0..gates.len()).combinations(k) {
            let cover = combo.iter().fold(0u64, |acc, &i| acc | covers[i]);
            if needed & !cover != 0 {
                continue;
            }
            let support: Vec<PermutationGate> =
                combo.iter().map(|&i| gates[i].clone()).collect();
            let (sum, residual) = least_squares_decompose(m, &support)?;
            if residual >= UNIT_SEARCH_RESIDUAL_TOL {
                continue;
            }
            let unit = support
                .iter()
                .all(|g| (sum.coefficient(g).norm() - 1.0).abs() <= UNIT_MODULUS_TOL);
            if unit {
                found.push(sum);
            }
        }
    }
    Ok(found)
}

/// Rank of the set of vectorized permutation matrices on `dim` indices,
/// read off the Gram spectrum.
pub fn permutation_span_rank(dim: usize) -> Result<usize> {
    let gates = all_permutations(dim)?;
    let rows = CMatrix::from_fn(gates.len(), dim * dim, |r, c| {
        vectorize(&gates[r].to_matrix())[c]
    });
    let gram = &rows * rows.adjoint();
    let eig = gram.symmetric_eigen();
    let lambda_max = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b));
    Ok(eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > lambda_max * 1e-10)
        .count())
}
