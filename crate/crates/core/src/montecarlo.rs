//! The stochastic side of the gate decomposition: Poisson bond-event
//! configurations, time-ordered kernels, and Monte Carlo estimates of
//! `exp(iβH)`.
//!
//! The target measure attaches the complex weight `(−i J_b)^{n_b}` to a
//! bond with `n_b` events, which cannot be sampled directly. Sampling
//! instead draws each bond's event count from a Poisson distribution with
//! mean `|J_b|·β` and times uniform on `(0, β]`, then reweights every
//! sample by `e^{Σ_b |J_b| β} · Π_b (−i · sign J_b)^{n_b}`. The reweighted
//! sample mean is an unbiased estimator of the exact evolution operator.
//!
//! Randomness is counter-based and splittable: sample `k` of a run draws
//! from the ChaCha stream `(seed, k)`, so results are reproducible and
//! independent of how samples are scheduled across threads.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::GateSum;
use crate::matrix::{c64, CMatrix};
use crate::spin::{BondKind, BondSystem};

/// Hard cap on Monte Carlo sample counts.
pub const MAX_SAMPLES: usize = 100_000_000;

/// Samples per accumulation block; block boundaries are the deterministic
/// units of parallel reduction.
const BLOCK: usize = 1024;

/// One bond event: which bond fired, and when.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondEvent {
    pub bond: usize,
    pub time: f64,
}

/// A time-sorted sequence of bond events on `[0, β]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    beta: f64,
    events: Vec<BondEvent>,
}

impl Configuration {
    /// Canonicalize (sort by time, ties by bond index) and validate.
    pub fn new(beta: f64, mut events: Vec<BondEvent>, sys: &BondSystem) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "configuration interval length must be >= 0, got {beta}"
            )));
        }
        for ev in &events {
            if ev.bond >= sys.bonds().len() {
                return Err(Error::InvalidArgument(format!(
                    "event references bond {} of a {}-bond system",
                    ev.bond,
                    sys.bonds().len()
                )));
            }
            if !(ev.time > 0.0 && ev.time <= beta) {
                return Err(Error::InvalidArgument(format!(
                    "event time {} outside (0, {beta}]",
                    ev.time
                )));
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.bond.cmp(&b.bond)));
        Ok(Self { beta, events })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn events(&self) -> &[BondEvent] {
        &self.events
    }

    /// Events on the given bond.
    pub fn bond_count(&self, bond: usize) -> usize {
        self.events.iter().filter(|e| e.bond == bond).count()
    }
}

/// Draw one configuration: per bond, a Poisson(|J_b|·β) number of events
/// with times uniform on `(0, β]`, merged and time-sorted.
pub fn sample_configuration<R: Rng + ?Sized>(
    sys: &BondSystem,
    beta: f64,
    rng: &mut R,
) -> Result<Configuration> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must be >= 0, got {beta}"
        )));
    }
    let mut events = Vec::new();
    for (idx, bond) in sys.bonds().iter().enumerate() {
        let rate = bond.coupling.abs() * beta;
        if rate == 0.0 {
            continue;
        }
        let n = Poisson::new(rate)
            .map_err(|e| Error::InvalidArgument(format!("bad Poisson rate {rate}: {e}")))?
            .sample(rng) as usize;
        for _ in 0..n {
            // 1 − u maps [0,1) onto (0,1]
            let t = beta * (1.0 - rng.random::<f64>());
            events.push(BondEvent { bond: idx, time: t });
        }
    }
    Configuration::new(beta, events, sys)
}

/// The time-ordered kernel `K(ω) = h_{b_n} ⋯ h_{b_1}`, latest event
/// leftmost, expanded in the permutation group algebra.
pub fn kernel(omega: &Configuration, sys: &BondSystem) -> Result<GateSum> {
    let dim = sys.hilbert_dim()?;
    let mut acc = GateSum::identity(dim);
    for ev in omega.events() {
        if matches!(sys.bonds()[ev.bond].kind, BondKind::Custom(_)) {
            return Err(Error::UnsupportedDecomposition(format!(
                "bond {} is a custom operator, kernel not representable as gates",
                ev.bond
            )));
        }
        let factor = sys.bond_gate_factor(ev.bond)?;
        acc = factor.mul(&acc)?;
    }
    Ok(acc)
}

/// A Monte Carlo estimate of `exp(iβH)`.
#[derive(Debug, Clone)]
pub struct McEstimate {
    pub mean: CMatrix,
    /// Frobenius-aggregated standard error of the mean.
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    entry_variance: DMatrix<f64>,
}

impl McEstimate {
    /// Per-entry sample variance of the estimator (diagnostic detail behind
    /// the scalar `stderr`).
    pub fn per_entry_variance(&self) -> &DMatrix<f64> {
        &self.entry_variance
    }
}

/// A running snapshot of the estimator partway through a run.
#[derive(Debug, Clone)]
pub struct TracePoint {
    pub samples: usize,
    pub mean: CMatrix,
    pub stderr: f64,
}

struct BlockSums {
    sum: CMatrix,
    sum_sq: DMatrix<f64>,
}

fn accumulate_block(
    sys: &BondSystem,
    beta: f64,
    seed: u64,
    range: std::ops::Range<usize>,
    dim: usize,
) -> Result<BlockSums> {
    let mut sum = CMatrix::zeros(dim, dim);
    let mut sum_sq = DMatrix::zeros(dim, dim);
    let mut scratch = CMatrix::zeros(dim, dim);
    let exp_rate = (sys.total_rate() * beta).exp();
    for k in range {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let omega = sample_configuration(sys, beta, &mut rng)?;
        let ks = kernel(&omega, sys)?;
        // phase carries (−i · sign J_b) once per event
        let mut phase = c64(1.0, 0.0);
        for ev in omega.events() {
            let sign = sys.bonds()[ev.bond].coupling.signum();
            phase *= c64(0.0, -sign);
        }
        let weight = phase * exp_rate;
        scratch.fill(c64(0.0, 0.0));
        for (gate, coeff) in ks.terms() {
            for (col, &row) in gate.image().iter().enumerate() {
                scratch[(row, col)] += coeff;
            }
        }
        for (s, (acc, acc_sq)) in scratch
            .iter()
            .zip(sum.iter_mut().zip(sum_sq.iter_mut()))
        {
            let v = weight * s;
            *acc += v;
            *acc_sq += v.norm_sqr();
        }
    }
    Ok(BlockSums { sum, sum_sq })
}

fn finalize(sum: &CMatrix, sum_sq: &DMatrix<f64>, count: usize) -> (CMatrix, DMatrix<f64>, f64) {
    let m = count as f64;
    let mean = sum / c64(m, 0.0);
    let variance = DMatrix::from_fn(sum.nrows(), sum.ncols(), |r, c| {
        if count < 2 {
            0.0
        } else {
            ((sum_sq[(r, c)] - sum[(r, c)].norm_sqr() / m) / (m - 1.0)).max(0.0)
        }
    });
    let stderr = (variance.sum() / m).sqrt();
    (mean, variance, stderr)
}

/// Estimate `exp(iβH)` from `samples` reweighted Poisson configurations.
///
/// Deterministic for a given `(sys, beta, samples, seed)`: the per-sample
/// streams are derived from `(seed, sample index)` and blocks are reduced
/// in a fixed order, so the result is bit-identical regardless of thread
/// count.
pub fn mc_estimate(sys: &BondSystem, beta: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    Ok(mc_estimate_traced(sys, beta, samples, seed, &[])?.0)
}

/// Same as [`mc_estimate`], also returning running snapshots at the given
/// sample counts (each rounded up to a block boundary).
pub fn mc_estimate_traced(
    sys: &BondSystem,
    beta: f64,
    samples: usize,
    seed: u64,
    checkpoints: &[usize],
) -> Result<(McEstimate, Vec<TracePoint>)> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    if samples > MAX_SAMPLES {
        return Err(Error::SizeLimit(format!(
            "{samples} samples above the {MAX_SAMPLES} cap"
        )));
    }
    let dim = sys.hilbert_dim()?;
    for (idx, bond) in sys.bonds().iter().enumerate() {
        if matches!(bond.kind, BondKind::Custom(_)) && bond.coupling != 0.0 {
            return Err(Error::UnsupportedDecomposition(format!(
                "bond {idx} is a custom operator, not representable as gates"
            )));
        }
    }

    let n_blocks = samples.div_ceil(BLOCK);
    let blocks: Vec<BlockSums> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(samples);
            accumulate_block(sys, beta, seed, lo..hi, dim)
        })
        .collect::<Result<_>>()?;

    let mut marks: Vec<usize> = checkpoints
        .iter()
        .map(|&c| c.clamp(2, samples))
        .collect();
    marks.sort_unstable();
    marks.dedup();

    let mut sum = CMatrix::zeros(dim, dim);
    let mut sum_sq = DMatrix::zeros(dim, dim);
    let mut done = 0usize;
    let mut trace = Vec::new();
    let mut next_mark = marks.iter().copied().peekable();
    for block in &blocks {
        sum += &block.sum;
        sum_sq += &block.sum_sq;
        done = (done + BLOCK).min(samples);
        let mut hit = false;
        while next_mark.peek().is_some_and(|&m| m <= done) {
            next_mark.next();
            hit = true;
        }
        if hit {
            let (mean, _, stderr) = finalize(&sum, &sum_sq, done);
            trace.push(TracePoint {
                samples: done,
                mean,
                stderr,
            });
        }
    }
    let (mean, entry_variance, stderr) = finalize(&sum, &sum_sq, samples);
    Ok((
        McEstimate {
            mean,
            stderr,
            samples,
            seed,
            entry_variance,
        },
        trace,
    ))
}

/// Count the closed world-line loops of a nearest-neighbour chain
/// configuration.
///
/// Each site carries a vertical world-line over `[0, β]`, cut at every
/// event touching it. An event on bond `{i, i+1}` joins the two strand
/// ends below it and the two ends above it. The count is the number of
/// cycles that never touch the `t = 0` or `t = β` boundary.
pub fn count_loops(omega: &Configuration, sys: &BondSystem) -> Result<usize> {
    let n_sites = sys.site_count();
    // resolve events to chain positions, insisting on {i, i+1} bonds
    let mut chain_pos = Vec::with_capacity(omega.events().len());
    for ev in omega.events() {
        let sites = &sys.bonds()[ev.bond].sites;
        let (lo, hi) = match sites.as_slice() {
            [a, b] => (*a.min(b), *a.max(b)),
            _ => {
                return Err(Error::UnsupportedGeometry(format!(
                    "bond {} touches {} sites; loop counting needs pairs",
                    ev.bond,
                    sites.len()
                )))
            }
        };
        if hi != lo + 1 {
            return Err(Error::UnsupportedGeometry(format!(
                "bond {} joins sites {lo} and {hi}; loop counting needs a nearest-neighbour chain",
                ev.bond
            )));
        }
        chain_pos.push(lo);
    }

    // events cutting each site's world-line, in configuration (time) order
    let mut cuts_per_site: Vec<Vec<usize>> = vec![Vec::new(); n_sites];
    for (ev_idx, &pos) in chain_pos.iter().enumerate() {
        cuts_per_site[pos].push(ev_idx);
        cuts_per_site[pos + 1].push(ev_idx);
    }

    // strand s of site i is the segment between cut s−1 and cut s;
    // strand 0 touches t=0, the last strand touches t=β
    let mut offsets = Vec::with_capacity(n_sites + 1);
    let mut total = 0usize;
    for cuts in &cuts_per_site {
        offsets.push(total);
        total += cuts.len() + 1;
    }
    offsets.push(total);

    let mut uf = UnionFind::new(total);
    for (site, cuts) in cuts_per_site.iter().enumerate() {
        for (k, &ev_idx) in cuts.iter().enumerate() {
            let pos = chain_pos[ev_idx];
            let other = if site == pos { pos + 1 } else { pos };
            let k_other = cuts_per_site[other]
                .iter()
                .position(|&e| e == ev_idx)
                .expect("event registered on both sites");
            // join below-ends and above-ends once per event
            if site < other {
                uf.union(offsets[site] + k, offsets[other] + k_other);
                uf.union(offsets[site] + k + 1, offsets[other] + k_other + 1);
            }
        }
    }

    let mut boundary = vec![false; total];
    for site in 0..n_sites {
        boundary[offsets[site]] = true;
        boundary[offsets[site + 1] - 1] = true;
    }
    let mut root_touches = std::collections::BTreeMap::new();
    for s in 0..total {
        let r = uf.find(s);
        *root_touches.entry(r).or_insert(false) |= boundary[s];
    }
    Ok(root_touches.values().filter(|&&touches| !touches).count())
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::PermutationGate;
    use crate::matrix::{frobenius_distance, hermitian_evolve};
    use crate::spin::{build_hamiltonian, exchange_gate, Bond};

    fn chain(n: usize, j: f64, kind: BondKind) -> BondSystem {
        BondSystem::chain(n, j, kind).unwrap()
    }

    #[test]
    fn zero_interval_or_rate_gives_empty_configuration() {
        let sys = chain(2, 1.0, BondKind::Exchange);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert!(sample_configuration(&sys, 0.0, &mut rng)
            .unwrap()
            .events()
            .is_empty());

        let dead = chain(2, 0.0, BondKind::Exchange);
        assert!(sample_configuration(&dead, 2.0, &mut rng)
            .unwrap()
            .events()
            .is_empty());
    }

    #[test]
    fn poisson_event_count_mean() {
        let sys = chain(2, 1.0, BondKind::Exchange);
        let beta = 2.0;
        let trials = 100_000;
        let mut total = 0usize;
        for k in 0..trials {
            let mut rng = ChaCha12Rng::seed_from_u64(11);
            rng.set_stream(k);
            total += sample_configuration(&sys, beta, &mut rng)
                .unwrap()
                .events()
                .len();
        }
        let mean = total as f64 / trials as f64;
        let tol = 3.0 * (beta / trials as f64).sqrt();
        assert!((mean - beta).abs() < tol, "mean {mean}, want {beta} ± {tol}");
    }

    #[test]
    fn kernel_cases() {
        let sys = chain(2, 1.0, BondKind::Exchange);
        let empty = Configuration::new(1.0, vec![], &sys).unwrap();
        assert_eq!(kernel(&empty, &sys).unwrap(), GateSum::identity(4));

        let single = Configuration::new(
            1.0,
            vec![BondEvent { bond: 0, time: 0.3 }],
            &sys,
        )
        .unwrap();
        let ks = kernel(&single, &sys).unwrap();
        let e = exchange_gate(2, 0, 1).unwrap();
        assert_eq!(ks.len(), 1);
        assert_eq!(ks.coefficient(&e), c64(1.0, 0.0));

        let anti = chain(2, 1.0, BondKind::Antiferro);
        let double = Configuration::new(
            1.0,
            vec![
                BondEvent { bond: 0, time: 0.2 },
                BondEvent { bond: 0, time: 0.9 },
            ],
            &anti,
        )
        .unwrap();
        let ks = kernel(&double, &anti).unwrap();
        assert_eq!(ks.coefficient(&PermutationGate::identity(4)), c64(2.0, 0.0));
        assert_eq!(ks.coefficient(&e), c64(-2.0, 0.0));
    }

    #[test]
    fn kernel_respects_time_order() {
        // mixed bonds on 3 sites: compare the gate-algebra kernel against a
        // direct matrix product in sorted order
        let sys = BondSystem::new(
            3,
            vec![
                Bond { sites: vec![0, 1], coupling: 1.0, kind: BondKind::Exchange },
                Bond { sites: vec![1, 2], coupling: 1.0, kind: BondKind::Antiferro },
            ],
        )
        .unwrap();
        let omega = Configuration::new(
            1.0,
            vec![
                BondEvent { bond: 1, time: 0.7 },
                BondEvent { bond: 0, time: 0.2 },
                BondEvent { bond: 1, time: 0.4 },
            ],
            &sys,
        )
        .unwrap();
        let ks = kernel(&omega, &sys).unwrap();

        let h0 = sys.bond_gate_factor(0).unwrap().render();
        let h1 = sys.bond_gate_factor(1).unwrap().render();
        // sorted times: 0.2 (bond 0), 0.4 (bond 1), 0.7 (bond 1) — latest leftmost
        let direct = &h1 * &h1 * &h0;
        assert!(frobenius_distance(&ks.render(), &direct) < 1e-14);
    }

    #[test]
    fn estimate_at_zero_beta() {
        let sys = chain(2, 1.0, BondKind::Exchange);
        let est = mc_estimate(&sys, 0.0, 100, 5).unwrap();
        assert_eq!(est.mean, CMatrix::identity(4, 4));
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn estimate_converges_to_exact() {
        let sys = chain(2, 1.0, BondKind::Exchange);
        let beta = 0.3;
        let est = mc_estimate(&sys, beta, 20_000, 42).unwrap();
        let exact = hermitian_evolve(&build_hamiltonian(&sys).unwrap(), beta).unwrap();
        let dist = frobenius_distance(&est.mean, &exact);
        assert!(
            dist < 5.0 * est.stderr,
            "distance {dist:.3e} vs stderr {:.3e}",
            est.stderr
        );
    }

    #[test]
    fn estimate_deterministic_and_schedule_independent() {
        let sys = chain(3, 0.8, BondKind::Antiferro);
        let a = mc_estimate(&sys, 0.4, 3000, 7).unwrap();
        let b = mc_estimate(&sys, 0.4, 3000, 7).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.stderr, b.stderr);

        // single-thread pool must reproduce the default-pool result exactly
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| mc_estimate(&sys, 0.4, 3000, 7)).unwrap();
        assert_eq!(a.mean, c.mean);
    }

    #[test]
    fn estimate_rejects_bad_sample_counts() {
        let sys = chain(2, 1.0, BondKind::Exchange);
        assert!(matches!(
            mc_estimate(&sys, 0.1, 1, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            mc_estimate(&sys, 0.1, MAX_SAMPLES + 1, 0),
            Err(Error::SizeLimit(_))
        ));
    }

    #[test]
    fn traced_checkpoints_cover_requests() {
        let sys = chain(2, 1.0, BondKind::Exchange);
        let (est, trace) = mc_estimate_traced(&sys, 0.3, 5000, 9, &[100, 2500, 5000]).unwrap();
        assert_eq!(trace.len(), 3);
        assert!(trace.windows(2).all(|w| w[0].samples < w[1].samples));
        assert_eq!(trace.last().unwrap().samples, est.samples);
        assert_eq!(trace.last().unwrap().mean, est.mean);
    }

    #[test]
    fn loops_single_event_and_disjoint_bridges() {
        let sys = chain(4, 1.0, BondKind::Antiferro);
        let lone = Configuration::new(
            1.0,
            vec![BondEvent { bond: 1, time: 0.5 }],
            &sys,
        )
        .unwrap();
        assert_eq!(count_loops(&lone, &sys).unwrap(), 0);

        let disjoint = Configuration::new(
            1.0,
            vec![
                BondEvent { bond: 0, time: 0.3 },
                BondEvent { bond: 2, time: 0.6 },
            ],
            &sys,
        )
        .unwrap();
        assert_eq!(count_loops(&disjoint, &sys).unwrap(), 0);
    }

    #[test]
    fn loops_same_bond_ladder() {
        let sys = chain(2, 1.0, BondKind::Antiferro);
        for n in 1..=6usize {
            let events = (1..=n)
                .map(|k| BondEvent { bond: 0, time: k as f64 * 0.1 })
                .collect();
            let omega = Configuration::new(1.0, events, &sys).unwrap();
            assert_eq!(count_loops(&omega, &sys).unwrap(), n - 1, "n = {n}");

            // kernel identity: K(ω) = 2^{loops} (I − E)
            let ks = kernel(&omega, &sys).unwrap();
            let factor = c64(2.0_f64.powi((n - 1) as i32), 0.0);
            let expect = crate::spin::antiferro_bond_operator() * factor;
            assert!(frobenius_distance(&ks.render(), &expect) < 1e-12);
        }
    }

    #[test]
    fn loops_reject_non_chain_bonds() {
        let sys = BondSystem::new(
            4,
            vec![Bond { sites: vec![0, 2], coupling: 1.0, kind: BondKind::Antiferro }],
        )
        .unwrap();
        let omega = Configuration::new(
            1.0,
            vec![BondEvent { bond: 0, time: 0.5 }],
            &sys,
        )
        .unwrap();
        assert!(matches!(
            count_loops(&omega, &sys),
            Err(Error::UnsupportedGeometry(_))
        ));
    }

    #[test]
    fn loops_nested_pattern() {
        // events on bonds 0 and 1 of a 3-site chain in an A-B-B-A pattern:
        // the two middle events close one loop between them
        let sys = chain(3, 1.0, BondKind::Antiferro);
        let omega = Configuration::new(
            1.0,
            vec![
                BondEvent { bond: 0, time: 0.1 },
                BondEvent { bond: 1, time: 0.3 },
                BondEvent { bond: 1, time: 0.6 },
                BondEvent { bond: 0, time: 0.9 },
            ],
            &sys,
        )
        .unwrap();
        assert_eq!(count_loops(&omega, &sys).unwrap(), 1);
    }
}
