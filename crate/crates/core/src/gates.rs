//! Permutation gates as group elements, and the expansion of `exp(iβH)`
//! inside the complex group algebra they span.
//!
//! A classical reversible gate on `N` bits is a bijection of the `2^N`
//! basis indices; rendered as a matrix it is the corresponding permutation
//! matrix. [`GateSum`] is a finitely supported map from such gates to
//! complex coefficients — the output type of the series expansion and of
//! the time-ordered kernels in [`crate::montecarlo`]. Keys are the raw
//! image arrays, so aggregation is exact and independent of the order in
//! which terms arrive.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{c64, CMatrix};
use crate::spin::BondSystem;

/// Coefficients below this magnitude are dropped from a finished [`GateSum`].
pub const COEFF_PRUNE_TOL: f64 = 1e-15;

/// Hard cap on the expansion order of [`series_expand`].
pub const MAX_SERIES_ORDER: usize = 30;

/// A classical reversible gate, stored as a bijection on basis indices.
///
/// The rendered matrix `P` has `P[map[j], j] = 1`: column `j` carries basis
/// vector `e_j` to `e_{map[j]}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PermutationGate {
    map: Vec<usize>,
}

impl PermutationGate {
    /// Build a gate from the image array, checking it is a bijection.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::InvalidArgument(
                "permutation gate needs dimension >= 1".into(),
            ));
        }
        let dim = map.len();
        let mut seen = vec![false; dim];
        for &img in &map {
            if img >= dim || seen[img] {
                return Err(Error::InvalidArgument(format!(
                    "image array {map:?} is not a bijection on 0..{dim}"
                )));
            }
            seen[img] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            map: (0..dim).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    /// Image of basis index `idx`.
    pub fn apply(&self, idx: usize) -> usize {
        self.map[idx]
    }

    pub fn image(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &img)| i == img)
    }

    /// Group product `self · other`: apply `other` first, then `self`
    /// (matrix product convention).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidArgument(format!(
                "cannot compose gates of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self {
            map: other.map.iter().map(|&j| self.map[j]).collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (j, &img) in self.map.iter().enumerate() {
            inv[img] = j;
        }
        Self { map: inv }
    }

    /// Render as a 0/1 permutation matrix.
    pub fn to_matrix(&self) -> CMatrix {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (col, &row) in self.map.iter().enumerate() {
            m[(row, col)] = c64(1.0, 0.0);
        }
        m
    }
}

/// The group generated by `generators`, found by breadth-first products.
///
/// Fails with a size-limit error as soon as the closure grows past
/// `max_order` elements. The identity is always included.
pub fn group_closure(
    generators: &[PermutationGate],
    max_order: usize,
) -> Result<BTreeSet<PermutationGate>> {
    let dim = match generators.first() {
        Some(g) => g.dim(),
        None => {
            return Err(Error::InvalidArgument(
                "group_closure needs at least one generator".into(),
            ))
        }
    };
    if generators.iter().any(|g| g.dim() != dim) {
        return Err(Error::InvalidArgument(
            "group_closure generators must share one dimension".into(),
        ));
    }
    let mut closure = BTreeSet::new();
    let mut frontier = VecDeque::new();
    let id = PermutationGate::identity(dim);
    closure.insert(id.clone());
    frontier.push_back(id);
    while let Some(g) = frontier.pop_front() {
        for gen in generators {
            let next = gen.compose(&g)?;
            if closure.insert(next.clone()) {
                if closure.len() > max_order {
                    return Err(Error::SizeLimit(format!(
                        "group closure exceeds {max_order} elements"
                    )));
                }
                frontier.push_back(next);
            }
        }
    }
    Ok(closure)
}

/// A finitely supported complex combination of permutation gates.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSum {
    dim: usize,
    terms: BTreeMap<PermutationGate, Complex64>,
}

impl GateSum {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// The sum `{identity: 1}`.
    pub fn identity(dim: usize) -> Self {
        let mut s = Self::new(dim);
        s.accumulate(PermutationGate::identity(dim), c64(1.0, 0.0));
        s
    }

    /// Aggregate explicit terms, pruning negligible coefficients.
    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (PermutationGate, Complex64)>,
    ) -> Result<Self> {
        let mut s = Self::new(dim);
        for (gate, coeff) in terms {
            if gate.dim() != dim {
                return Err(Error::InvalidArgument(format!(
                    "gate of dimension {} in a sum of dimension {dim}",
                    gate.dim()
                )));
            }
            s.accumulate(gate, coeff);
        }
        s.prune();
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `gate` (zero when absent).
    pub fn coefficient(&self, gate: &PermutationGate) -> Complex64 {
        self.terms.get(gate).copied().unwrap_or_else(|| c64(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PermutationGate, Complex64)> {
        self.terms.iter().map(|(g, &c)| (g, c))
    }

    pub fn support(&self) -> impl Iterator<Item = &PermutationGate> {
        self.terms.keys()
    }

    /// Add `coeff · gate`, merging with any existing term. No pruning.
    pub fn accumulate(&mut self, gate: PermutationGate, coeff: Complex64) {
        debug_assert_eq!(gate.dim(), self.dim);
        *self
            .terms
            .entry(gate)
            .or_insert_with(|| c64(0.0, 0.0)) += coeff;
    }

    /// Drop terms with |coefficient| below [`COEFF_PRUNE_TOL`].
    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= COEFF_PRUNE_TOL);
    }

    pub fn scale(&mut self, factor: Complex64) {
        for c in self.terms.values_mut() {
            *c *= factor;
        }
    }

    /// Group-algebra product: every term of `self` composed with every
    /// term of `rhs` (`self` applied after `rhs`).
    pub fn mul(&self, rhs: &GateSum) -> Result<GateSum> {
        if self.dim != rhs.dim {
            return Err(Error::InvalidArgument(format!(
                "cannot multiply gate sums of dimension {} and {}",
                self.dim, rhs.dim
            )));
        }
        let mut out = GateSum::new(self.dim);
        for (g1, c1) in self.terms() {
            for (g2, c2) in rhs.terms() {
                out.accumulate(g1.compose(g2)?, c1 * c2);
            }
        }
        Ok(out)
    }

    /// Evaluate `Σ c_g · P_g` as a dense matrix.
    pub fn render(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (gate, coeff) in self.terms() {
            for (col, &row) in gate.image().iter().enumerate() {
                m[(row, col)] += coeff;
            }
        }
        m
    }
}

/// A truncated group-algebra expansion of `exp(iβH)`.
///
/// `truncation_bound` is `(Σ_b |J_b| · |β|)^{order+1} / (order+1)!`, the
/// magnitude scale of the first omitted order; callers can check it
/// against their own tolerance to judge whether the truncation was deep
/// enough.
#[derive(Debug, Clone)]
pub struct SeriesExpansion {
    pub sum: GateSum,
    pub order: usize,
    pub truncation_bound: f64,
}

/// Expand `exp(iβH) = Σ_n (−iβ)^n/n! (Σ_b J_b h_b)^n` up to `n = order`,
/// aggregating coefficients per permutation gate.
///
/// Every bond must be exchange or antiferromagnetic: those are the kinds
/// representable in the permutation group algebra (the antiferromagnetic
/// operator enters distributively as `I − E_b`). Custom bond operators are
/// rejected; exact evolution of those systems is still available through
/// [`crate::matrix::hermitian_evolve`].
pub fn series_expand(sys: &BondSystem, beta: f64, order: usize) -> Result<SeriesExpansion> {
    if order > MAX_SERIES_ORDER {
        return Err(Error::InvalidArgument(format!(
            "series order {order} above the {MAX_SERIES_ORDER} cap"
        )));
    }
    if !beta.is_finite() {
        return Err(Error::InvalidArgument("beta must be finite".into()));
    }
    let dim = sys.hilbert_dim()?;

    // A = Σ_b J_b h_b in the group algebra.
    let mut coupled = GateSum::new(dim);
    let mut rate = 0.0;
    for (idx, bond) in sys.bonds().iter().enumerate() {
        if bond.coupling == 0.0 {
            continue;
        }
        rate += bond.coupling.abs();
        let mut factor = sys.bond_gate_factor(idx)?;
        factor.scale(c64(bond.coupling, 0.0));
        for (g, c) in factor.terms() {
            coupled.accumulate(g.clone(), c);
        }
    }

    let mut result = GateSum::identity(dim);
    let mut power = GateSum::identity(dim);
    let mut prefactor = c64(1.0, 0.0);
    for n in 1..=order {
        power = coupled.mul(&power)?;
        prefactor *= c64(0.0, -beta) / c64(n as f64, 0.0);
        for (g, c) in power.terms() {
            result.accumulate(g.clone(), prefactor * c);
        }
    }
    result.prune();

    let mut bound = 1.0;
    for n in 1..=(order + 1) {
        bound *= rate * beta.abs() / n as f64;
    }
    Ok(SeriesExpansion {
        sum: result,
        order,
        truncation_bound: bound,
    })
}
