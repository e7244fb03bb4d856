use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::pauli::gates::CliffordGate;
use crate::pauli::operator::PauliOperator;

/// An n-qubit Clifford unitary, stored as the signed images of the
/// generators under conjugation: `img_x[q] = U X_q U†`, `img_z[q] = U Z_q U†`.
///
/// Signs are tracked exactly, so the tableau determines the unitary up to
/// global phase.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordTableau {
    n: usize,
    img_x: Vec<PauliOperator>,
    img_z: Vec<PauliOperator>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        use crate::pauli::operator::PauliKind;
        let img_x = (0..n)
            .map(|q| PauliOperator::single(n, q, PauliKind::X).expect("index in range"))
            .collect();
        let img_z = (0..n)
            .map(|q| PauliOperator::single(n, q, PauliKind::Z).expect("index in range"))
            .collect();
        CliffordTableau { n, img_x, img_z }
    }

    /// Build from explicit generator images, validating the commutation
    /// relations that make the map a Clifford.
    pub fn from_images(img_x: Vec<PauliOperator>, img_z: Vec<PauliOperator>) -> Result<Self> {
        if img_x.len() != img_z.len() {
            return Err(Error::DimensionMismatch(img_x.len(), img_z.len()));
        }
        let n = img_x.len();
        let t = CliffordTableau { n, img_x, img_z };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        let pairs = |q: usize| [(q, &self.img_x[q]), (q, &self.img_z[q])];
        for q in 0..self.n {
            for (_, img) in pairs(q) {
                if img.qubit_count() != self.n {
                    return Err(Error::DimensionMismatch(img.qubit_count(), self.n));
                }
                if !img.is_hermitian() || img.is_identity_up_to_sign() {
                    return Err(Error::domain(format!(
                        "generator image {img} is not a signed non-identity Pauli"
                    )));
                }
            }
            if self.img_x[q].commutes(&self.img_z[q])? {
                return Err(Error::domain(format!(
                    "images of X_{q} and Z_{q} must anticommute"
                )));
            }
            for r in 0..q {
                for (_, a) in pairs(q) {
                    for (_, b) in pairs(r) {
                        if !a.commutes(b)? {
                            return Err(Error::domain(format!(
                                "images on distinct qubits {q} and {r} must commute"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn image_of_x(&self, qubit: usize) -> &PauliOperator {
        &self.img_x[qubit]
    }

    pub fn image_of_z(&self, qubit: usize) -> &PauliOperator {
        &self.img_z[qubit]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// Left-multiply by a gate: self ← gate · self.
    pub fn apply_gate(&mut self, gate: CliffordGate, qubits: &[usize]) -> Result<()> {
        for img in self.img_x.iter_mut().chain(self.img_z.iter_mut()) {
            img.apply_gate_conjugation(gate, qubits)?;
        }
        Ok(())
    }

    /// Left-multiply by a whole circuit: self ← U(circuit) · self.
    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.qubit_count() != self.n {
            return Err(Error::DimensionMismatch(circuit.qubit_count(), self.n));
        }
        for layer in circuit.layers() {
            for (gate, qubits) in layer.gates() {
                self.apply_gate(*gate, qubits)?;
            }
        }
        Ok(())
    }

    /// Tableau of the unitary a circuit implements.
    pub fn from_circuit(circuit: &Circuit) -> Self {
        let mut t = Self::identity(circuit.qubit_count());
        t.apply_circuit(circuit)
            .expect("circuit gates are validated at construction");
        t
    }

    /// Exact conjugation `U P U†`, phases included.
    pub fn conjugate(&self, p: &PauliOperator) -> Result<PauliOperator> {
        if p.qubit_count() != self.n {
            return Err(Error::DimensionMismatch(p.qubit_count(), self.n));
        }
        // P = i^k Π_q X_q^{x_q} Z_q^{z_q}; the image is the product of
        // generator images in the same factor order.
        let mut out = PauliOperator::identity(self.n);
        for q in 0..self.n {
            if p.x_bit(q) {
                out = out.multiply(&self.img_x[q])?;
            }
            if p.z_bit(q) {
                out = out.multiply(&self.img_z[q])?;
            }
        }
        out.add_phase(p.phase_exp());
        Ok(out)
    }

    /// Tableau of `later · self` (self acts first).
    pub fn then(&self, later: &CliffordTableau) -> Result<CliffordTableau> {
        let img_x = self
            .img_x
            .iter()
            .map(|p| later.conjugate(p))
            .collect::<Result<Vec<_>>>()?;
        let img_z = self
            .img_z
            .iter()
            .map(|p| later.conjugate(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(CliffordTableau {
            n: self.n,
            img_x,
            img_z,
        })
    }

    /// Tableau of U†.
    ///
    /// The symplectic part inverts in closed form (the inverse of a
    /// symplectic matrix is Ω Mᵀ Ω), and each sign is then fixed by one
    /// forward conjugation.
    #[must_use]
    pub fn inverse(&self) -> CliffordTableau {
        let n = self.n;
        let build = |x_of: &dyn Fn(usize, usize) -> bool, z_of: &dyn Fn(usize, usize) -> bool| {
            (0..n)
                .map(|q| {
                    let mut p = PauliOperator::identity(n);
                    for m in 0..n {
                        let code = (u8::from(x_of(m, q)) << 1) | u8::from(z_of(m, q));
                        p.set_site(m, crate::pauli::operator::PauliKind::from_code(code));
                    }
                    p.normalize_letter_phase();
                    p
                })
                .collect::<Vec<_>>()
        };
        // Inverse image of X_q reads column q of the forward z-columns, and
        // of Z_q the forward x-columns.
        let mut inv_x = build(
            &|m, q| self.img_z[m].z_bit(q),
            &|m, q| self.img_x[m].z_bit(q),
        );
        let mut inv_z = build(
            &|m, q| self.img_z[m].x_bit(q),
            &|m, q| self.img_x[m].x_bit(q),
        );
        for (q, cand) in inv_x.iter_mut().chain(inv_z.iter_mut()).enumerate() {
            let target_is_x = q < n;
            let q = q % n;
            let fwd = self
                .conjugate(cand)
                .expect("candidate has matching qubit count");
            debug_assert_eq!(
                fwd.support(),
                vec![q],
                "symplectic inverse must map back to a single generator"
            );
            debug_assert_eq!(fwd.x_bit(q), target_is_x);
            if fwd.sign() < 0 {
                *cand = cand.negated();
            }
        }
        CliffordTableau {
            n,
            img_x: inv_x,
            img_z: inv_z,
        }
    }
}
