use crate::error::Result;
use crate::pauli::{PauliKind, PauliOperator};
use crate::sampler::omega::OmegaSpec;

/// Scrambling estimate for one sampled Pauli pair.
#[derive(Clone, Debug)]
pub struct PairEstimate {
    pub p: PauliOperator,
    pub p_prime: PauliOperator,
    /// Mean over circuits of (1/4^n)·Tr(𝒫′ 𝒰 𝒫 𝒰⁻¹) for the sampled
    /// k-layer circuits 𝒰.
    pub estimate: f64,
}

/// Report from [`estimate_scrambling`]: how far a k-layer ensemble is from
/// mapping every non-identity Pauli to an even mixture over all of them.
#[derive(Clone, Debug)]
pub struct ScramblingReport {
    pub k: usize,
    pub pairs: Vec<PairEstimate>,
    pub circuits: usize,
    /// Probe Paulis per circuit, or `None` when each trace was evaluated
    /// exactly.
    pub probes: Option<usize>,
    /// max over pairs of (estimate − 1/4^n). Scrambling at scale δ means
    /// this stays at or below δ for every pair.
    pub delta_hat: f64,
}

/// Estimate how scrambling k layers of the Ω distribution are.
///
/// For each sampled pair (P, P′) of non-identity Paulis, and each of
/// `circuits` sampled k-layer circuits, the normalized trace
/// (1/4^n)·Tr(𝒫′ 𝒰 𝒫 𝒰⁻¹) equals the mean over all 4^n probe Paulis R of
/// c_{P′}(R)·c_Q(R), where Q is the circuit conjugate of P and c_A(R) is
/// +1 when A and R commute, −1 otherwise. The product is +1 for every R
/// exactly when Q and P′ agree up to sign and averages to 0 otherwise, so
/// with `probes = None` the trace is evaluated as that exact indicator;
/// otherwise it is a mean over `probes` uniform draws of R.
///
/// k = 0 (no layers, identity circuit) is allowed and useful as a
/// calibration point: the estimate is 1 for P′ = ±P and 0 otherwise.
pub fn estimate_scrambling(
    spec: &OmegaSpec,
    k: usize,
    pair_count: usize,
    circuits: usize,
    probes: Option<usize>,
    rng: &mut impl rand::Rng,
) -> Result<ScramblingReport> {
    let n = spec.qubit_count();
    let norm = 1.0 / 4f64.powi(n as i32);
    let mut pairs = Vec::with_capacity(pair_count);
    for _ in 0..pair_count {
        let p = PauliOperator::sample_random_nonidentity(n, rng);
        let p_prime = PauliOperator::sample_random_nonidentity(n, rng);
        let mut total = 0.0;
        for _ in 0..circuits {
            let mut q = p.clone();
            for _ in 0..k {
                spec.sample_layer(rng).conjugate_in_place(&mut q)?;
            }
            total += match probes {
                None => {
                    let same = (0..n).all(|i| q.site(i) == p_prime.site(i));
                    if same {
                        1.0
                    } else {
                        0.0
                    }
                }
                Some(m) => {
                    let mut sum = 0i64;
                    for _ in 0..m {
                        let r = random_probe(n, rng);
                        let cq = if q.commutes(&r)? { 1 } else { -1 };
                        let cp = if p_prime.commutes(&r)? { 1 } else { -1 };
                        sum += cq * cp;
                    }
                    sum as f64 / m as f64
                }
            };
        }
        pairs.push(PairEstimate {
            p,
            p_prime,
            estimate: total / circuits as f64,
        });
    }
    let delta_hat = pairs
        .iter()
        .map(|pe| pe.estimate - norm)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ScramblingReport {
        k,
        pairs,
        circuits,
        probes,
        delta_hat,
    })
}

/// Uniform over all 4^n unsigned Paulis, identity included (the probe sum
/// ranges over the full basis).
fn random_probe(n: usize, rng: &mut impl rand::Rng) -> PauliOperator {
    let sites: Vec<PauliKind> = (0..n)
        .map(|_| match rng.gen_range(0u8..4) {
            0 => PauliKind::I,
            1 => PauliKind::Z,
            2 => PauliKind::X,
            _ => PauliKind::Y,
        })
        .collect();
    PauliOperator::from_sites(&sites, 1)
}
