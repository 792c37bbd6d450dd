use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, eigh, hermitian_part, identity, kron, sigma_x, sigma_y, sigma_z, trace, CMat};
use crate::propagation::validate_density;
use crate::rb::Generator;
use crate::seed::derive_seed;

/// Single-qubit pre-rotations applied before the joint readout.
pub const PRE_ROTATIONS: [Generator; 6] =
    [Generator::I, Generator::X, Generator::X2, Generator::MinusX2, Generator::Y2, Generator::MinusY2];

/// Joint readout observable `Σ w_k |k⟩⟨k|` over `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReadoutWeights(pub [f64; 4]);

impl Default for ReadoutWeights {
    /// Distinct weights with all three contrasts `Z⊗I`, `I⊗Z`, `Z⊗Z`
    /// nonzero, so local pre-rotations reach every two-qubit Pauli. The large
    /// `Z⊗Z` contrast keeps shot noise on correlations low. Any ordering of
    /// four evenly spaced weights zeroes one contrast and is not complete.
    fn default() -> Self {
        Self([4.0, 1.0, 0.0, 2.0])
    }
}

impl ReadoutWeights {
    pub fn observable(&self) -> CMat {
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(4, self.0.iter().map(|&w| c(w, 0.0))))
    }
}

/// Number of measurement shots per record, or exact expectation values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shots {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyRecord {
    pub pre_a: Generator,
    pub pre_b: Generator,
    pub expectation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub rho: CMat,
    /// `‖A c − e‖₂` of the linear inversion.
    pub residual: f64,
    /// Smallest eigenvalue before projection.
    pub raw_min_eigenvalue: f64,
}

fn paulis() -> [CMat; 4] {
    [identity(2), sigma_x(), sigma_y(), sigma_z()]
}

/// The 16 two-qubit Paulis `σ_i ⊗ σ_j`, qubit A first.
fn pauli_basis() -> Vec<CMat> {
    let p = paulis();
    let mut out = Vec::with_capacity(16);
    for a in &p {
        for b in &p {
            out.push(kron(a, b));
        }
    }
    out
}

fn settings() -> Vec<(Generator, Generator)> {
    PRE_ROTATIONS.iter().flat_map(|&a| PRE_ROTATIONS.iter().map(move |&b| (a, b))).collect()
}

fn rotated_observable(weights: &ReadoutWeights, a: Generator, b: Generator) -> CMat {
    let r = kron(&a.matrix(), &b.matrix());
    r.adjoint() * weights.observable() * r
}

/// Real design matrix `A[r][P] = Tr(M_r P)/4`, so that `e = A·c` with
/// `c_P = Tr(ρP)`.
fn design(weights: &ReadoutWeights, records: &[(Generator, Generator)]) -> DMatrix<f64> {
    let basis = pauli_basis();
    let mut a = DMatrix::zeros(records.len(), basis.len());
    for (r, &(ga, gb)) in records.iter().enumerate() {
        let m = rotated_observable(weights, ga, gb);
        for (k, p) in basis.iter().enumerate() {
            a[(r, k)] = 0.25 * trace(&(&m * p)).re;
        }
    }
    a
}

fn numeric_rank(a: &DMatrix<f64>) -> usize {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-10 * max.max(1e-300)).count()
}

/// Check that `weights` makes the 36 settings informationally complete.
pub fn check_informational_completeness(weights: &ReadoutWeights) -> Result<()> {
    let rank = numeric_rank(&design(weights, &settings()));
    if rank < 16 {
        return Err(Error::RankDeficient { rank, needed: 16 });
    }
    Ok(())
}

/// Expectation values of the rotated joint observable for all 36 settings.
pub fn simulate_tomography(rho: &CMat, weights: &ReadoutWeights, shots: Shots) -> Result<Vec<TomographyRecord>> {
    validate_density(rho, 4, 1e-9)?;
    check_informational_completeness(weights)?;
    let settings = settings();
    let records = settings
        .par_iter()
        .enumerate()
        .map(|(idx, &(pre_a, pre_b))| {
            let r = kron(&pre_a.matrix(), &pre_b.matrix());
            let rotated = &r * rho * r.adjoint();
            let pops: Vec<f64> = (0..4).map(|k| rotated[(k, k)].re.max(0.0)).collect();
            let expectation = match shots {
                Shots::Exact => pops.iter().zip(weights.0).map(|(p, w)| p * w).sum(),
                Shots::Sampled { shots, seed } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[idx as u64]));
                    let total: f64 = pops.iter().sum();
                    let mut acc = 0.0;
                    for _ in 0..shots {
                        let u: f64 = rng.random::<f64>() * total;
                        let mut cum = 0.0;
                        let mut k = 3;
                        for (i, p) in pops.iter().enumerate() {
                            cum += p;
                            if u < cum {
                                k = i;
                                break;
                            }
                        }
                        acc += weights.0[k];
                    }
                    acc / shots.max(1) as f64
                }
            };
            TomographyRecord { pre_a, pre_b, expectation }
        })
        .collect();
    Ok(records)
}

/// Least-squares linear inversion on the Pauli basis followed by projection
/// onto the nearest unit-trace PSD matrix.
pub fn reconstruct(records: &[TomographyRecord], weights: &ReadoutWeights) -> Result<Reconstruction> {
    let pairs: Vec<(Generator, Generator)> = records.iter().map(|r| (r.pre_a, r.pre_b)).collect();
    let a = design(weights, &pairs);
    let rank = numeric_rank(&a);
    if rank < 16 {
        return Err(Error::RankDeficient { rank, needed: 16 });
    }
    let e = DVector::from_iterator(records.len(), records.iter().map(|r| r.expectation));
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("tomography record".into()));
    }
    let svd = a.clone().svd(true, true);
    let coeffs = svd.solve(&e, 1e-12).map_err(|m| Error::InvalidState(format!("least-squares inversion failed: {m}")))?;
    let residual = (&a * &coeffs - &e).norm();
    let mut raw = CMat::zeros(4, 4);
    for (p, &ck) in pauli_basis().iter().zip(coeffs.iter()) {
        raw += p.scale(0.25 * ck);
    }
    let raw = hermitian_part(&raw);
    project_to_state(&raw).map(|(rho, raw_min_eigenvalue)| Reconstruction { rho, residual, raw_min_eigenvalue })
}

/// Nearest unit-trace PSD matrix in Frobenius norm: rescale to unit trace,
/// then zero the most negative eigenvalues and spread their mass evenly over
/// the rest until none is negative. Returns the raw smallest eigenvalue too.
pub fn project_to_state(raw: &CMat) -> Result<(CMat, f64)> {
    let tr = trace(raw).re;
    if !(tr > 0.0 && tr.is_finite()) {
        return Err(Error::InvalidState(format!("reconstruction has trace {tr}")));
    }
    let (vals, vecs) = eigh(&raw.unscale(tr));
    let min = vals[0] * tr;
    // Ascending order from eigh; walk up from the smallest.
    let d = vals.len();
    let mut lambda = vals.clone();
    let mut carry = 0.0;
    let mut lo = 0;
    while lo < d && lambda[lo] + carry / ((d - lo) as f64) < 0.0 {
        carry += lambda[lo];
        lambda[lo] = 0.0;
        lo += 1;
    }
    let share = carry / (d - lo) as f64;
    for v in lambda.iter_mut().skip(lo) {
        *v += share;
    }
    let mut rho = CMat::zeros(d, d);
    for (k, &v) in lambda.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(k);
            rho += (&col * col.adjoint()).scale(v);
        }
    }
    Ok((hermitian_part(&rho), min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ket_to_dm, trace_distance, CVec};

    fn random_state(rng: &mut ChaCha8Rng) -> CMat {
        // Mixture of random pure states with random weights.
        let mut rho = CMat::zeros(4, 4);
        let n = rng.random_range(1..=4);
        let mut total = 0.0;
        for _ in 0..n {
            let psi = CVec::from_fn(4, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            let psi = psi.unscale(psi.norm());
            let w: f64 = rng.random();
            total += w;
            rho += ket_to_dm(&psi).scale(w);
        }
        rho.unscale(total)
    }

    #[test]
    fn exact_round_trip() {
        let w = ReadoutWeights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let rho = random_state(&mut rng);
            let records = simulate_tomography(&rho, &w, Shots::Exact).unwrap();
            assert_eq!(records.len(), 36);
            let rec = reconstruct(&records, &w).unwrap();
            assert!(trace_distance(&rec.rho, &rho) < 1e-10);
            assert!(rec.residual < 1e-10);
        }
    }

    #[test]
    fn maximally_mixed_round_trip() {
        let w = ReadoutWeights::default();
        let rho = CMat::identity(4, 4).scale(0.25);
        let rec = reconstruct(&simulate_tomography(&rho, &w, Shots::Exact).unwrap(), &w).unwrap();
        assert!(trace_distance(&rec.rho, &rho) < 1e-10);
    }

    #[test]
    fn ground_state_reads_its_weight() {
        let w = ReadoutWeights::default();
        let rho = ket_to_dm(&crate::linalg::basis_ket(4, 0));
        let records = simulate_tomography(&rho, &w, Shots::Exact).unwrap();
        assert!((records[0].expectation - w.0[0]).abs() < 1e-14);
        assert_eq!((records[0].pre_a, records[0].pre_b), (Generator::I, Generator::I));
    }

    #[test]
    fn weights_without_correlation_term_are_rejected() {
        let flat = ReadoutWeights([3.0, 2.0, 1.0, 0.0]);
        // 3 + 0 = 2 + 1: the Z⊗Z contrast vanishes and the nine two-body Paulis are invisible.
        assert_eq!(check_informational_completeness(&flat), Err(Error::RankDeficient { rank: 7, needed: 16 }));
        assert!(check_informational_completeness(&ReadoutWeights::default()).is_ok());
        let rho = CMat::identity(4, 4).scale(0.25);
        assert!(simulate_tomography(&rho, &flat, Shots::Exact).is_err());
    }

    #[test]
    fn projection_clips_negative_spectrum() {
        let mut raw = CMat::from_diagonal(&DVector::from_vec(vec![c(0.6, 0.0), c(0.3, 0.0), c(0.15, 0.0), c(-0.05, 0.0)]));
        raw[(0, 1)] = c(0.01, 0.02);
        raw[(1, 0)] = c(0.01, -0.02);
        let (rho, min) = project_to_state(&raw).unwrap();
        assert!(min < 0.0);
        validate_density(&rho, 4, 1e-12).unwrap();
        assert!((trace(&rho).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sampled_records_are_seeded() {
        let w = ReadoutWeights::default();
        let rho = CMat::identity(4, 4).scale(0.25);
        let s = Shots::Sampled { shots: 500, seed: 9 };
        assert_eq!(simulate_tomography(&rho, &w, s).unwrap(), simulate_tomography(&rho, &w, s).unwrap());
    }
}
