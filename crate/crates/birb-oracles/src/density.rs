use num_complex::Complex64;

use birb::pauli::PauliOperator;

use crate::matrices::{pauli_matrix, CMat};

/// One Lindblad-generator term, in the error-generator taxonomy:
/// `S_P[ρ] = PρP − ρ`, `H_P[ρ] = −i[P, ρ]`, and
/// `A_{P,Q}[ρ] = i(PρQ − QρP + ½{[P,Q], ρ})`.
#[derive(Clone, Debug)]
pub enum GeneratorTerm {
    Stochastic { pauli: PauliOperator, rate: f64 },
    Hamiltonian { pauli: PauliOperator, rate: f64 },
    Active { p: PauliOperator, q: PauliOperator, rate: f64 },
}

fn ci(im: f64) -> Complex64 {
    Complex64::new(0.0, im)
}

/// Superoperator acting on vec(ρ) (column-major), as a 4^n × 4^n matrix.
pub fn generator_superop(n: usize, term: &GeneratorTerm) -> CMat {
    let dim = 1usize << n;
    let id = CMat::identity(dim, dim);
    let sup_id = CMat::identity(dim * dim, dim * dim);
    // vec(AρB) = (Bᵀ ⊗ A) vec(ρ).
    let sandwich = |a: &CMat, b: &CMat| b.transpose().kronecker(a);
    match term {
        GeneratorTerm::Stochastic { pauli, rate } => {
            let p = pauli_matrix(pauli);
            (sandwich(&p, &p) - sup_id) * Complex64::new(*rate, 0.0)
        }
        GeneratorTerm::Hamiltonian { pauli, rate } => {
            let p = pauli_matrix(pauli);
            (sandwich(&p, &id) - sandwich(&id, &p)) * ci(-*rate)
        }
        GeneratorTerm::Active { p, q, rate } => {
            let pm = pauli_matrix(p);
            let qm = pauli_matrix(q);
            let comm = &pm * &qm - &qm * &pm;
            let m = (sandwich(&pm, &qm) - sandwich(&qm, &pm)) * ci(1.0)
                + (sandwich(&comm, &id) + sandwich(&id, &comm)) * ci(0.5);
            m * Complex64::new(*rate, 0.0)
        }
    }
}

/// exp(Σ terms) by scaling and squaring with a Taylor series.
pub fn channel_superop(n: usize, terms: &[GeneratorTerm]) -> CMat {
    let dim = 1usize << n;
    let mut gen = CMat::zeros(dim * dim, dim * dim);
    for term in terms {
        gen += generator_superop(n, term);
    }
    expm(&gen)
}

fn expm(a: &CMat) -> CMat {
    let norm: f64 = a.iter().map(|e| e.norm()).sum();
    let scale = norm.log2().ceil().max(0.0) as u32 + 1;
    let scaled = a / Complex64::new(f64::powi(2.0, scale as i32), 0.0);
    let mut result = CMat::identity(a.nrows(), a.ncols());
    let mut term = CMat::identity(a.nrows(), a.ncols());
    for k in 1..=24 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        result += &term;
    }
    for _ in 0..scale {
        result = &result * &result;
    }
    result
}

pub fn superop_apply(superop: &CMat, rho: &CMat) -> CMat {
    let dim = rho.nrows();
    let vec = CMat::from_iterator(dim * dim, 1, rho.iter().copied());
    let out = superop * vec;
    CMat::from_iterator(dim, dim, out.iter().copied())
}

/// |0…0⟩⟨0…0|.
pub fn initial_density(n: usize) -> CMat {
    let dim = 1usize << n;
    let mut rho = CMat::zeros(dim, dim);
    rho[(0, 0)] = Complex64::new(1.0, 0.0);
    rho
}

/// Tr(P ρ), which is real for Hermitian P.
pub fn density_expectation(rho: &CMat, p: &PauliOperator) -> f64 {
    (pauli_matrix(p) * rho).trace().re
}

/// Computational-basis outcome distribution: the diagonal of ρ.
pub fn measurement_distribution(rho: &CMat) -> Vec<f64> {
    (0..rho.nrows()).map(|b| rho[(b, b)].re).collect()
}
