//! Spin-1/2 systems: sites, bonds, the standard bond operators, and the
//! Hamiltonian `H = −Σ_{b∈B} J_b h_b`.
//!
//! Basis convention, fixed once for the whole crate: sites are ordered
//! big-endian, site 0 being the most significant bit, and spin-up is the
//! first basis vector of each site. The computational index of the pattern
//! `s_0 … s_{N−1}` (up = 0) is `Σ s_i 2^{N−1−i}`. Under this convention the
//! rendered two-bit exchange gate swaps indices 1 and 2, i.e. comes out as
//!
//! ```text
//!     1 0 0 0
//!     0 0 1 0
//!     0 1 0 0
//!     0 0 0 1
//! ```


use crate::error::{Error, Result};
use crate::gates::{GateSum, PermutationGate};
use crate::matrix::{c64, check_dim, hermiticity_defect, CMatrix, HERMITICITY_TOL, MAX_SITES};

/// The spin-1/2 generators in the basis where `s3` is diagonal with +1/2
/// first.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub s1: CMatrix,
    pub s2: CMatrix,
    pub s3: CMatrix,
}

/// Generators of the fundamental su(2) representation,
/// `[S^α, S^β] = i ε_{αβγ} S^γ`.
pub fn spin_matrices() -> SpinOperators {
    let z = c64(0.0, 0.0);
    SpinOperators {
        s1: CMatrix::from_row_slice(2, 2, &[z, c64(0.5, 0.0), c64(0.5, 0.0), z]),
        s2: CMatrix::from_row_slice(2, 2, &[z, c64(0.0, -0.5), c64(0.0, 0.5), z]),
        s3: CMatrix::from_row_slice(2, 2, &[c64(0.5, 0.0), z, z, c64(-0.5, 0.0)]),
    }
}

/// What a bond does to the sites it touches.
#[derive(Debug, Clone)]
pub enum BondKind {
    /// Swap the two sites' states (Heisenberg ferromagnet bond).
    Exchange,
    /// `I − E` on the two sites (Heisenberg antiferromagnet bond, twice
    /// the singlet projector).
    Antiferro,
    /// Any Hermitian operator on the bond's sites, dimension `2^{|b|}`.
    Custom(CMatrix),
}

impl BondKind {
    pub fn name(&self) -> &'static str {
        match self {
            BondKind::Exchange => "exchange",
            BondKind::Antiferro => "antiferro",
            BondKind::Custom(_) => "custom",
        }
    }
}

/// One interaction term: a site subset, its coupling `J_b`, and the
/// operator acting on it.
#[derive(Debug, Clone)]
pub struct Bond {
    pub sites: Vec<usize>,
    pub coupling: f64,
    pub kind: BondKind,
}

/// A finite set of sites plus the bonds coupling them.
///
/// Immutable after construction; construction validates every invariant,
/// so downstream code can trust site indices and operator dimensions.
#[derive(Debug, Clone)]
pub struct BondSystem {
    site_count: usize,
    bonds: Vec<Bond>,
}

impl BondSystem {
    pub fn new(site_count: usize, bonds: Vec<Bond>) -> Result<Self> {
        if site_count == 0 {
            return Err(Error::InvalidArgument("system needs at least one site".into()));
        }
        for (idx, bond) in bonds.iter().enumerate() {
            if bond.sites.is_empty() {
                return Err(Error::ContractViolation(format!(
                    "bond {idx} has an empty site set"
                )));
            }
            let mut seen = std::collections::BTreeSet::new();
            for &s in &bond.sites {
                if s >= site_count {
                    return Err(Error::ContractViolation(format!(
                        "bond {idx} references site {s} in a {site_count}-site system"
                    )));
                }
                if !seen.insert(s) {
                    return Err(Error::ContractViolation(format!(
                        "bond {idx} repeats site {s}"
                    )));
                }
            }
            if !bond.coupling.is_finite() {
                return Err(Error::ContractViolation(format!(
                    "bond {idx} has non-finite coupling"
                )));
            }
            match &bond.kind {
                BondKind::Exchange | BondKind::Antiferro => {
                    if bond.sites.len() != 2 {
                        return Err(Error::ContractViolation(format!(
                            "bond {idx} is {} but has {} sites (needs exactly 2)",
                            bond.kind.name(),
                            bond.sites.len()
                        )));
                    }
                }
                BondKind::Custom(m) => {
                    if bond.sites.len() > MAX_SITES {
                        return Err(Error::SizeLimit(format!(
                            "bond {idx} touches {} sites, above the {MAX_SITES} cap",
                            bond.sites.len()
                        )));
                    }
                    let want = 1usize << bond.sites.len();
                    if m.nrows() != want || m.ncols() != want {
                        return Err(Error::ContractViolation(format!(
                            "bond {idx} custom operator is {}x{}, expected {want}x{want}",
                            m.nrows(),
                            m.ncols()
                        )));
                    }
                    let defect = hermiticity_defect(m);
                    if defect > HERMITICITY_TOL {
                        return Err(Error::ContractViolation(format!(
                            "bond {idx} custom operator is not Hermitian (defect {defect:.3e})"
                        )));
                    }
                }
            }
        }
        Ok(Self { site_count, bonds })
    }

    /// Open chain of `site_count` sites with identical nearest-neighbour
    /// bonds of the given two-site kind.
    pub fn chain(site_count: usize, coupling: f64, kind: BondKind) -> Result<Self> {
        let bonds = (0..site_count.saturating_sub(1))
            .map(|i| Bond {
                sites: vec![i, i + 1],
                coupling,
                kind: kind.clone(),
            })
            .collect();
        Self::new(site_count, bonds)
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// `2^{site_count}`, guarded by the dense-matrix size cap.
    pub fn hilbert_dim(&self) -> Result<usize> {
        if self.site_count > MAX_SITES {
            return Err(Error::SizeLimit(format!(
                "{}-site system is above the {MAX_SITES}-site dense-matrix cap",
                self.site_count
            )));
        }
        Ok(1 << self.site_count)
    }

    /// Total event rate of the Poisson measure, `Σ_b |J_b|`.
    pub fn total_rate(&self) -> f64 {
        self.bonds.iter().map(|b| b.coupling.abs()).sum()
    }

    /// The bond operator as an element of the permutation group algebra on
    /// the full register: `{E_b: 1}` for exchange, `{1: 1, E_b: −1}` for
    /// antiferromagnetic bonds. Custom bonds are not representable.
    pub fn bond_gate_factor(&self, bond_idx: usize) -> Result<GateSum> {
        let bond = self.bonds.get(bond_idx).ok_or_else(|| {
            Error::InvalidArgument(format!("bond index {bond_idx} out of range"))
        })?;
        let dim = self.hilbert_dim()?;
        match bond.kind {
            BondKind::Exchange => {
                let e = exchange_gate(self.site_count, bond.sites[0], bond.sites[1])?;
                GateSum::from_terms(dim, [(e, c64(1.0, 0.0))])
            }
            BondKind::Antiferro => {
                let e = exchange_gate(self.site_count, bond.sites[0], bond.sites[1])?;
                GateSum::from_terms(
                    dim,
                    [
                        (PermutationGate::identity(dim), c64(1.0, 0.0)),
                        (e, c64(-1.0, 0.0)),
                    ],
                )
            }
            BondKind::Custom(_) => Err(Error::UnsupportedDecomposition(format!(
                "bond {bond_idx} is a custom operator, not representable as permutation gates"
            ))),
        }
    }
}

/// The exchange gate on sites `i`, `j` of an `n_sites` register: the
/// permutation of basis indices swapping the two sites' bits.
pub fn exchange_gate(n_sites: usize, i: usize, j: usize) -> Result<PermutationGate> {
    if i == j || i >= n_sites || j >= n_sites {
        return Err(Error::InvalidArgument(format!(
            "exchange gate needs two distinct sites below {n_sites}, got ({i}, {j})"
        )));
    }
    if n_sites > MAX_SITES {
        return Err(Error::SizeLimit(format!(
            "{n_sites}-site register is above the {MAX_SITES}-site cap"
        )));
    }
    let dim = 1usize << n_sites;
    // site s occupies bit n_sites − 1 − s of the index
    let bi = n_sites - 1 - i;
    let bj = n_sites - 1 - j;
    let map = (0..dim)
        .map(|idx| {
            let a = (idx >> bi) & 1;
            let b = (idx >> bj) & 1;
            if a == b {
                idx
            } else {
                idx ^ (1 << bi) ^ (1 << bj)
            }
        })
        .collect();
    PermutationGate::new(map)
}

/// The two-site antiferromagnet bond operator `I − E`, twice the singlet
/// projector.
pub fn antiferro_bond_operator() -> CMatrix {
    let e = exchange_gate(2, 0, 1).expect("static two-site gate");
    CMatrix::identity(4, 4) - e.to_matrix()
}

/// Embed `op` (acting on the listed sites, in listed order) into the full
/// `2^{n_sites}` register, identity elsewhere.
pub fn embed_bond_operator(op: &CMatrix, sites: &[usize], n_sites: usize) -> Result<CMatrix> {
    if n_sites > MAX_SITES {
        return Err(Error::SizeLimit(format!(
            "{n_sites}-site register is above the {MAX_SITES}-site cap"
        )));
    }
    let dim = 1usize << n_sites;
    let local_dim = 1usize << sites.len();
    if op.nrows() != local_dim || op.ncols() != local_dim {
        return Err(Error::InvalidArgument(format!(
            "operator is {}x{} but touches {} sites",
            op.nrows(),
            op.ncols(),
            sites.len()
        )));
    }
    // bit position (in the full index) of each listed site, MSB first locally
    let bits: Vec<usize> = sites.iter().map(|&s| n_sites - 1 - s).collect();
    let mut out = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        let mut local_row = 0usize;
        for &b in &bits {
            local_row = (local_row << 1) | ((row >> b) & 1);
        }
        for local_col in 0..local_dim {
            let v = op[(local_row, local_col)];
            if v == c64(0.0, 0.0) {
                continue;
            }
            let mut col = row;
            for (k, &b) in bits.iter().enumerate() {
                let bit = (local_col >> (bits.len() - 1 - k)) & 1;
                col = (col & !(1 << b)) | (bit << b);
            }
            out[(row, col)] += v;
        }
    }
    Ok(out)
}

/// Assemble the dense Hamiltonian `H = −Σ_b J_b h_b` on the full register.
pub fn build_hamiltonian(sys: &BondSystem) -> Result<CMatrix> {
    let dim = sys.hilbert_dim()?;
    check_dim(dim, "Hamiltonian")?;
    let mut h = CMatrix::zeros(dim, dim);
    for bond in sys.bonds() {
        let local: CMatrix = match &bond.kind {
            BondKind::Exchange => exchange_gate(2, 0, 1)?.to_matrix(),
            BondKind::Antiferro => antiferro_bond_operator(),
            BondKind::Custom(m) => m.clone(),
        };
        let embedded = embed_bond_operator(&local, &bond.sites, sys.site_count())?;
        h += embedded * c64(-bond.coupling, 0.0);
    }
    Ok(h)
}
