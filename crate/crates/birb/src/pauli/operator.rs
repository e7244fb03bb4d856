use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use crate::error::{Error, Result};

/// Single-site Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PauliKind {
    I,
    X,
    Y,
    Z,
}

impl PauliKind {
    /// Symplectic site code `(x << 1) | z`: I=0, Z=1, X=2, Y=3.
    pub(crate) fn code(self) -> u8 {
        match self {
            PauliKind::I => 0b00,
            PauliKind::Z => 0b01,
            PauliKind::X => 0b10,
            PauliKind::Y => 0b11,
        }
    }

    pub(crate) fn from_code(code: u8) -> Self {
        match code & 0b11 {
            0b00 => PauliKind::I,
            0b01 => PauliKind::Z,
            0b10 => PauliKind::X,
            _ => PauliKind::Y,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            PauliKind::I => 'I',
            PauliKind::X => 'X',
            PauliKind::Y => 'Y',
            PauliKind::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliKind::I),
            'X' => Some(PauliKind::X),
            'Y' => Some(PauliKind::Y),
            'Z' => Some(PauliKind::Z),
            _ => None,
        }
    }
}

fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

fn parity(words: &[u64]) -> u8 {
    (words.iter().fold(0u32, |acc, w| acc ^ w.count_ones()) & 1) as u8
}

fn and_parity(a: &[u64], b: &[u64]) -> u8 {
    (a.iter()
        .zip(b)
        .fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones())
        & 1) as u8
}

/// A signed n-qubit Pauli operator.
///
/// The operator is `i^phase_exp · Π_q X_q^{x_q} Z_q^{z_q}` with the per-qubit
/// factor ordered X-then-Z, so `Y = i·X·Z` has `phase_exp = 1, x = z = 1`.
/// `phase_exp` is tracked exactly mod 4; every protocol-level operator is
/// Hermitian (phase relative to the I/X/Y/Z letter product is ±1), which
/// [`PauliOperator::sign`] exposes. The x/z components are packed bit
/// vectors, so gate conjugation is O(1) per gate and products are O(n/64).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    phase_exp: u8,
    x_bits: Vec<u64>,
    z_bits: Vec<u64>,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator {
            n,
            phase_exp: 0,
            x_bits: vec![0; word_count(n)],
            z_bits: vec![0; word_count(n)],
        }
    }

    /// Single-site operator `kind` on `qubit` with + sign.
    pub fn single(n: usize, qubit: usize, kind: PauliKind) -> Result<Self> {
        let mut p = Self::identity(n);
        p.check_index(qubit)?;
        p.set_site(qubit, kind);
        p.phase_exp = p.letter_phase();
        Ok(p)
    }

    /// Build from per-site letters with the given sign (+1 or -1).
    pub fn from_sites(sites: &[PauliKind], sign: i8) -> Self {
        let mut p = Self::identity(sites.len());
        for (q, &kind) in sites.iter().enumerate() {
            p.set_site(q, kind);
        }
        p.phase_exp = p.letter_phase();
        if sign < 0 {
            p.phase_exp = (p.phase_exp + 2) & 3;
        }
        p
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        self.phase_exp == 0
            && self.x_bits.iter().all(|&w| w == 0)
            && self.z_bits.iter().all(|&w| w == 0)
    }

    /// True when x and z components are both zero, regardless of sign.
    pub fn is_identity_up_to_sign(&self) -> bool {
        self.x_bits.iter().all(|&w| w == 0) && self.z_bits.iter().all(|&w| w == 0)
    }

    pub fn x_bit(&self, qubit: usize) -> bool {
        self.x_bits[qubit / 64] >> (qubit % 64) & 1 == 1
    }

    pub fn z_bit(&self, qubit: usize) -> bool {
        self.z_bits[qubit / 64] >> (qubit % 64) & 1 == 1
    }

    pub fn site(&self, qubit: usize) -> PauliKind {
        PauliKind::from_code((u8::from(self.x_bit(qubit)) << 1) | u8::from(self.z_bit(qubit)))
    }

    pub(crate) fn set_site(&mut self, qubit: usize, kind: PauliKind) {
        let code = kind.code();
        let (w, b) = (qubit / 64, qubit % 64);
        self.x_bits[w] = (self.x_bits[w] & !(1 << b)) | (u64::from(code >> 1) << b);
        self.z_bits[w] = (self.z_bits[w] & !(1 << b)) | (u64::from(code & 1) << b);
    }

    /// Raw phase exponent k of `i^k X^x Z^z`.
    pub fn phase_exp(&self) -> u8 {
        self.phase_exp
    }

    pub(crate) fn add_phase(&mut self, dk: u8) {
        self.phase_exp = (self.phase_exp + dk) & 3;
    }

    /// Reset the phase so the operator is the plain letter product (+ sign).
    pub(crate) fn normalize_letter_phase(&mut self) {
        self.phase_exp = self.letter_phase();
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z_bits
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x_bits
    }

    /// Number of Y sites, mod 4. The letter product `Π σ_q` equals
    /// `i^{letter_phase} X^x Z^z`, since each Y contributes one factor of i.
    fn letter_phase(&self) -> u8 {
        (self
            .x_bits
            .iter()
            .zip(&self.z_bits)
            .map(|(x, z)| (x & z).count_ones())
            .sum::<u32>()
            & 3) as u8
    }

    /// Phase relative to the signless letter product: 0,1,2,3 for +1,+i,-1,-i.
    pub fn relative_phase(&self) -> u8 {
        (self.phase_exp + 4 - self.letter_phase()) & 3
    }

    pub fn is_hermitian(&self) -> bool {
        self.relative_phase() & 1 == 0
    }

    /// Sign of a Hermitian operator: +1 or -1.
    ///
    /// # Panics
    /// Panics if the operator is not Hermitian (relative phase ±i).
    pub fn sign(&self) -> i8 {
        match self.relative_phase() {
            0 => 1,
            2 => -1,
            _ => panic!("sign() on non-Hermitian Pauli {self:?}"),
        }
    }

    /// Same operator with the opposite sign.
    #[must_use]
    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.phase_exp = (p.phase_exp + 2) & 3;
        p
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        self.x_bits
            .iter()
            .zip(&self.z_bits)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Indices of non-identity sites, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.x_bit(q) || self.z_bit(q))
            .collect()
    }

    fn check_same_n(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(self.n, other.n))
        }
    }

    fn check_index(&self, qubit: usize) -> Result<()> {
        if qubit < self.n {
            Ok(())
        } else {
            Err(Error::InvalidIndex {
                index: qubit,
                n: self.n,
                reason: "index past qubit count",
            })
        }
    }

    /// Group product `self · other` with exact phase tracking.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other)?;
        let mut out = Self::identity(self.n);
        // Moving other's X block left past self's Z block flips a sign per
        // overlapping site: k = k1 + k2 + 2·|z1 ∧ x2| (mod 4).
        out.phase_exp =
            (self.phase_exp + other.phase_exp + 2 * and_parity(&self.z_bits, &other.x_bits)) & 3;
        for w in 0..self.x_bits.len() {
            out.x_bits[w] = self.x_bits[w] ^ other.x_bits[w];
            out.z_bits[w] = self.z_bits[w] ^ other.z_bits[w];
        }
        Ok(out)
    }

    /// True iff the operators commute (symplectic form vanishes).
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_same_n(other)?;
        Ok(and_parity(&self.x_bits, &other.z_bits) == and_parity(&self.z_bits, &other.x_bits))
    }

    pub(crate) fn commutes_unchecked(&self, other: &Self) -> bool {
        and_parity(&self.x_bits, &other.z_bits) == and_parity(&self.z_bits, &other.x_bits)
    }

    /// Uniform sample over the 4^n − 1 non-identity unsigned Paulis,
    /// returned with + sign. (Protocol averages are invariant under
    /// s → −s because s appears twice, so signed sampling is redundant.)
    pub fn sample_random_nonidentity(n: usize, rng: &mut impl rand::RngCore) -> Self {
        assert!(n >= 1, "need at least one qubit");
        let words = word_count(n);
        let tail_mask = if n % 64 == 0 {
            u64::MAX
        } else {
            (1u64 << (n % 64)) - 1
        };
        let mut p = Self::identity(n);
        loop {
            for w in 0..words {
                p.x_bits[w] = rng.gen::<u64>();
                p.z_bits[w] = rng.gen::<u64>();
            }
            p.x_bits[words - 1] &= tail_mask;
            p.z_bits[words - 1] &= tail_mask;
            if !p.is_identity_up_to_sign() {
                break;
            }
        }
        p.phase_exp = p.letter_phase();
        p
    }

    /// Flattened basis index in lexicographic (x, z) site-code order:
    /// index = Σ_q code_q · 4^q with code = 2x+z. Identity maps to 0.
    /// Only valid for small n (callers in the dense engine cap n ≤ 6).
    pub(crate) fn basis_index(&self) -> usize {
        let mut idx = 0usize;
        for q in (0..self.n).rev() {
            idx = idx * 4 + self.site(q).code() as usize;
        }
        idx
    }

    /// Inverse of [`basis_index`], with + sign.
    pub(crate) fn from_basis_index(n: usize, mut idx: usize) -> Self {
        let mut p = Self::identity(n);
        for q in 0..n {
            p.set_site(q, PauliKind::from_code((idx & 3) as u8));
            idx >>= 2;
        }
        p.phase_exp = p.letter_phase();
        p
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator({self})")
    }
}

/// Text format: sign prefix then one letter per qubit, e.g. `+XIZY`.
/// Non-Hermitian phases render as `+i`/`-i` prefixes so the round-trip is
/// bit-exact for every operator.
impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.relative_phase() {
            0 => write!(f, "+")?,
            1 => write!(f, "+i")?,
            2 => write!(f, "-")?,
            _ => write!(f, "-i")?,
        }
        for q in 0..self.n {
            write!(f, "{}", self.site(q).to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |column: usize, message: &str| Error::Parse {
            line: 1,
            column,
            message: message.to_string(),
        };
        let mut chars = s.chars().peekable();
        let sign_exp: u8 = match chars.next() {
            Some('+') => 0,
            Some('-') | Some('\u{2212}') => 2,
            _ => return Err(err(1, "expected sign prefix '+' or '-'")),
        };
        let sign_exp = if chars.peek() == Some(&'i') {
            chars.next();
            (sign_exp + 1) & 3
        } else {
            sign_exp
        };
        let letters: Vec<PauliKind> = chars
            .clone()
            .enumerate()
            .map(|(i, c)| {
                PauliKind::from_char(c).ok_or_else(|| {
                    err(i + 2, &format!("invalid Pauli letter {c:?}, expected I/X/Y/Z"))
                })
            })
            .collect::<Result<_>>()?;
        if letters.is_empty() {
            return Err(err(2, "expected at least one Pauli letter"));
        }
        let mut p = PauliOperator::from_sites(&letters, 1);
        p.phase_exp = (p.letter_phase() + sign_exp) & 3;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng as _;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn phase_conventions() {
        assert_eq!(p("+X").multiply(&p("+Z")).unwrap().to_string(), "-iY");
        assert_eq!(p("+Z").multiply(&p("+X")).unwrap().to_string(), "+iY");
        assert_eq!(p("+Y").multiply(&p("+Y")).unwrap().to_string(), "+I");
        assert_eq!(p("+X").multiply(&p("+Y")).unwrap().to_string(), "+iZ");
        assert_eq!(p("+XX").multiply(&p("+ZZ")).unwrap().to_string(), "-YY");
    }

    #[test]
    fn display_round_trip() {
        for s in ["+XIZY", "-IZ", "+iY", "-iXX", "+I", "-IIII"] {
            assert_eq!(p(s).to_string(), s);
        }
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = "XZ".parse::<PauliOperator>().unwrap_err();
        match err {
            Error::Parse { line: 1, column: 1, .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
        let err = "+XQ".parse::<PauliOperator>().unwrap_err();
        match err {
            Error::Parse { line: 1, column: 3, .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn sign_and_hermiticity() {
        assert_eq!(p("+XYZ").sign(), 1);
        assert_eq!(p("-XYZ").sign(), -1);
        assert!(!p("+iX").is_hermitian());
        assert!(p("-YY").is_hermitian());
        assert_eq!(p("+X").multiply(&p("+Z")).unwrap().is_hermitian(), false);
    }

    #[test]
    fn commutation() {
        assert!(p("+XX").commutes(&p("+ZZ")).unwrap());
        assert!(!p("+XI").commutes(&p("+ZI")).unwrap());
        assert!(p("+XI").commutes(&p("+IZ")).unwrap());
        assert!(p("+XYZ").commutes(&p("+XYZ")).unwrap());
    }

    #[test]
    fn weight_and_support() {
        let op = p("+XIZY");
        assert_eq!(op.weight(), 3);
        assert_eq!(op.support(), vec![0, 2, 3]);
        assert_eq!(PauliOperator::identity(5).weight(), 0);
    }

    #[test]
    fn basis_index_round_trip() {
        for idx in 0..64 {
            let op = PauliOperator::from_basis_index(3, idx);
            assert_eq!(op.basis_index(), idx);
            assert_eq!(op.sign(), 1);
        }
    }

    #[test]
    fn random_nonidentity_is_signed_letter_product() {
        let mut rng = crate::rng::Rng::seed_from_u64(7);
        for n in [1, 3, 64, 70] {
            for _ in 0..40 {
                let op = PauliOperator::sample_random_nonidentity(n, &mut rng);
                assert!(!op.is_identity_up_to_sign());
                assert_eq!(op.sign(), 1);
                assert_eq!(op.qubit_count(), n);
            }
        }
    }

    #[test]
    fn mismatched_widths_error() {
        assert!(p("+X").multiply(&p("+XX")).is_err());
        assert!(p("+X").commutes(&p("+XX")).is_err());
    }
}
