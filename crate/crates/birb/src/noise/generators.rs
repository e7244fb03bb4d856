use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::PauliOperator;

/// One elementary error generator with its rate. The Paulis are local
/// operators on the support the generator is attached to (k qubits for a
/// k-qubit gate), written with + sign.
#[derive(Clone, Debug, PartialEq)]
pub enum ErrorGenerator {
    /// S_P: ρ ↦ PρP − ρ. Rate must be ≥ 0.
    Stochastic { pauli: PauliOperator, rate: f64 },
    /// H_P: ρ ↦ −i[P, ρ]. Rate may be any real.
    Hamiltonian { pauli: PauliOperator, rate: f64 },
    /// A_{P,Q}: ρ ↦ i(PρQ − QρP) + (i/2){[P,Q], ρ}.
    Active {
        p: PauliOperator,
        q: PauliOperator,
        rate: f64,
    },
}

impl ErrorGenerator {
    pub fn stochastic(pauli: PauliOperator, rate: f64) -> Result<Self> {
        if rate < 0.0 || !rate.is_finite() {
            return Err(Error::domain(format!(
                "stochastic rate must be finite and non-negative, got {rate}"
            )));
        }
        validate_pauli(&pauli)?;
        Ok(ErrorGenerator::Stochastic { pauli, rate })
    }

    pub fn hamiltonian(pauli: PauliOperator, rate: f64) -> Result<Self> {
        if !rate.is_finite() {
            return Err(Error::domain("hamiltonian rate must be finite"));
        }
        validate_pauli(&pauli)?;
        Ok(ErrorGenerator::Hamiltonian { pauli, rate })
    }

    pub fn active(p: PauliOperator, q: PauliOperator, rate: f64) -> Result<Self> {
        if !rate.is_finite() {
            return Err(Error::domain("active rate must be finite"));
        }
        validate_pauli(&p)?;
        validate_pauli(&q)?;
        if p.qubit_count() != q.qubit_count() {
            return Err(Error::dimension(p.qubit_count(), q.qubit_count()));
        }
        if (0..p.qubit_count()).all(|i| p.site(i) == q.site(i)) {
            return Err(Error::domain("active generator needs two distinct Paulis"));
        }
        Ok(ErrorGenerator::Active { p, q, rate })
    }

    /// Width of the local support the generator acts on.
    pub fn qubit_count(&self) -> usize {
        match self {
            ErrorGenerator::Stochastic { pauli, .. } | ErrorGenerator::Hamiltonian { pauli, .. } => {
                pauli.qubit_count()
            }
            ErrorGenerator::Active { p, .. } => p.qubit_count(),
        }
    }

    pub fn rate(&self) -> f64 {
        match self {
            ErrorGenerator::Stochastic { rate, .. }
            | ErrorGenerator::Hamiltonian { rate, .. }
            | ErrorGenerator::Active { rate, .. } => *rate,
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, ErrorGenerator::Stochastic { .. })
    }
}

fn validate_pauli(p: &PauliOperator) -> Result<()> {
    if p.is_identity_up_to_sign() {
        return Err(Error::domain("error-generator Pauli must be non-identity"));
    }
    if !p.is_hermitian() || p.sign() != 1 {
        return Err(Error::domain(format!(
            "error-generator Pauli must have + sign, got {p}"
        )));
    }
    Ok(())
}

/// Accumulates w · T into a Pauli-basis column, where T is a product of
/// Paulis carrying an i^k phase. Every generator maps Hermitian operators
/// to Hermitian operators, so the imaginary parts cancel by the end.
fn add_term(col: &mut [Complex64], w: Complex64, t: &PauliOperator) {
    let phase = match t.relative_phase() {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let mut letters = t.clone();
    letters.normalize_letter_phase();
    col[letters.basis_index()] += w * phase;
}

/// The generator's Pauli-transfer matrix on its local support at unit
/// rate: entry (a, b) is the coefficient of Pauli a in the image of Pauli
/// b. The stored rate is not applied here; [`channel_from_generators`]
/// weights the sum with it. Exact up to f64 rounding of half-integers,
/// since every image is a signed Pauli combination computed symbolically.
pub fn generator_ptm(gen: &ErrorGenerator) -> DMatrix<f64> {
    let k = gen.qubit_count();
    assert!(k <= 8, "generator PTM is a 4^k matrix; k = {k} is too wide");
    let dim = 4usize.pow(k as u32);
    let mut m = DMatrix::zeros(dim, dim);
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    for b in 0..dim {
        let r = PauliOperator::from_basis_index(k, b);
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        match gen {
            ErrorGenerator::Stochastic { pauli: p, .. } => {
                let prp = p.multiply(&r.multiply(p).expect("same n")).expect("same n");
                add_term(&mut col, one, &prp);
                add_term(&mut col, -one, &r);
            }
            ErrorGenerator::Hamiltonian { pauli: p, .. } => {
                add_term(&mut col, -i, &p.multiply(&r).expect("same n"));
                add_term(&mut col, i, &r.multiply(p).expect("same n"));
            }
            ErrorGenerator::Active { p, q, .. } => {
                let prod = |a: &PauliOperator, b: &PauliOperator, c: &PauliOperator| {
                    a.multiply(&b.multiply(c).expect("same n")).expect("same n")
                };
                add_term(&mut col, i, &prod(p, &r, q));
                add_term(&mut col, -i, &prod(q, &r, p));
                add_term(&mut col, i * 0.5, &prod(p, q, &r));
                add_term(&mut col, -i * 0.5, &prod(q, p, &r));
                add_term(&mut col, i * 0.5, &prod(&r, p, q));
                add_term(&mut col, -i * 0.5, &prod(&r, q, p));
            }
        }
        for (a, c) in col.into_iter().enumerate() {
            debug_assert!(c.im.abs() < 1e-12, "non-Hermitian image: {c}");
            m[(a, b)] = c.re;
        }
    }
    m
}

/// Matrix exponential by scaling and squaring with a Taylor series; the
/// inputs are small generator sums (dimension ≤ 4^k), far from the regime
/// where Padé accuracy matters.
pub(crate) fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = a.nrows();
    let norm = a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut result = DMatrix::identity(dim, dim);
    let mut term = DMatrix::identity(dim, dim);
    for order in 1..=20 {
        term = (&term * &scaled) / order as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// e^(Σ rate·generator) as a Pauli-transfer matrix. All generators must
/// share one support width.
pub fn channel_from_generators(gens: &[ErrorGenerator], k: usize) -> Result<DMatrix<f64>> {
    let dim = 4usize.pow(k as u32);
    let mut total = DMatrix::zeros(dim, dim);
    for gen in gens {
        if gen.qubit_count() != k {
            return Err(Error::dimension(k, gen.qubit_count()));
        }
        if !gen.rate().is_finite() {
            return Err(Error::domain("non-finite generator rate"));
        }
        total += generator_ptm(gen) * gen.rate();
    }
    Ok(expm(&total))
}

/// Exact Pauli-error distribution of a purely stochastic generator list:
/// the channel's Pauli fidelities are λ_Q = exp(−2 Σ_i s_i·[P_i, Q}), and
/// the commutation-character transform turns fidelities into error
/// probabilities. Returned indexed by Pauli basis index, length 4^k.
pub fn pauli_error_distribution(gens: &[ErrorGenerator], k: usize) -> Result<Vec<f64>> {
    let dim = 4usize.pow(k as u32);
    let mut log_fidelity = vec![0.0f64; dim];
    for gen in gens {
        let ErrorGenerator::Stochastic { pauli, rate } = gen else {
            return Err(Error::domain(
                "error distribution is defined for stochastic generators only",
            ));
        };
        if pauli.qubit_count() != k {
            return Err(Error::dimension(k, pauli.qubit_count()));
        }
        for (q, lf) in log_fidelity.iter_mut().enumerate() {
            let other = PauliOperator::from_basis_index(k, q);
            if !pauli.commutes(&other).expect("same n") {
                *lf -= 2.0 * rate;
            }
        }
    }
    let fidelity: Vec<f64> = log_fidelity.into_iter().map(f64::exp).collect();
    let mut probs = vec![0.0f64; dim];
    for (e, pr) in probs.iter_mut().enumerate() {
        let error = PauliOperator::from_basis_index(k, e);
        let mut sum = 0.0;
        for (q, f) in fidelity.iter().enumerate() {
            let other = PauliOperator::from_basis_index(k, q);
            let sign = if error.commutes(&other).expect("same n") {
                1.0
            } else {
                -1.0
            };
            sum += sign * f;
        }
        *pr = (sum / dim as f64).max(0.0);
    }
    let total: f64 = probs.iter().sum();
    debug_assert!((total - 1.0).abs() < 1e-9, "probabilities sum to {total}");
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(probs)
}
