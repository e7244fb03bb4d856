use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::pauli::operator::{PauliKind, PauliOperator};

/// One of the six signed Pauli axes, encoded +X=0, -X=1, +Y=2, -Y=3, +Z=4, -Z=5.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedAxis(u8);

impl SignedAxis {
    pub fn from_code(code: u8) -> Result<Self> {
        if code < 6 {
            Ok(SignedAxis(code))
        } else {
            Err(Error::domain(format!("signed axis code {code} out of range")))
        }
    }

    pub fn code(self) -> u8 {
        self.0
    }

    /// Base axis: 0 = X, 1 = Y, 2 = Z.
    pub fn axis(self) -> u8 {
        self.0 / 2
    }

    pub fn is_negative(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn kind(self) -> PauliKind {
        match self.axis() {
            0 => PauliKind::X,
            1 => PauliKind::Y,
            _ => PauliKind::Z,
        }
    }

    #[must_use]
    pub fn negated(self) -> Self {
        SignedAxis(self.0 ^ 1)
    }

    pub fn from_kind(kind: PauliKind, negative: bool) -> Result<Self> {
        let base = match kind {
            PauliKind::X => 0,
            PauliKind::Y => 2,
            PauliKind::Z => 4,
            PauliKind::I => return Err(Error::domain("identity has no axis")),
        };
        Ok(SignedAxis(base + u8::from(negative)))
    }

    /// Local (x, z, k) form of the signed letter, with `i^k X^x Z^z` phase
    /// convention (Y carries k=1; a minus sign adds 2).
    fn local(self) -> Local {
        let letter = match self.axis() {
            0 => Local { x: 1, z: 0, k: 0 },
            1 => Local { x: 1, z: 1, k: 1 },
            _ => Local { x: 0, z: 1, k: 0 },
        };
        Local {
            k: (letter.k + 2 * u8::from(self.is_negative())) & 3,
            ..letter
        }
    }

    fn from_local(l: Local) -> Self {
        // Hermitian letter recovery: sign is i^(k - y) with y the Y count.
        let y = l.x & l.z;
        let rel = (l.k + 4 - y) & 3;
        debug_assert!(rel & 1 == 0, "non-Hermitian local Pauli");
        let base = match (l.x, l.z) {
            (1, 0) => 0,
            (1, 1) => 2,
            (0, 1) => 4,
            _ => panic!("identity is not an axis"),
        };
        SignedAxis(base + u8::from(rel == 2))
    }
}

impl fmt::Display for SignedAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.is_negative() { '-' } else { '+' };
        write!(f, "{}{}", sign, self.kind().to_char())
    }
}

/// One-qubit Pauli in (x, z, k) form: `i^k X^x Z^z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Local {
    x: u8,
    z: u8,
    k: u8,
}

impl Local {
    fn multiply(self, rhs: Local) -> Local {
        Local {
            x: self.x ^ rhs.x,
            z: self.z ^ rhs.z,
            k: (self.k + rhs.k + 2 * (self.z & rhs.x)) & 3,
        }
    }

    fn pow(self, e: u8) -> Local {
        if e & 1 == 1 {
            self
        } else {
            Local { x: 0, z: 0, k: 0 }
        }
    }
}

/// One of the 24 single-qubit Clifford gates, identified by canonical index.
///
/// The canonical enumeration is fixed by the images of X and Z under
/// conjugation: index = 4·code(image of X) + position of (image of Z) in a
/// fixed list of the four signed axes orthogonal to it (the `ORTHO` table,
/// chosen so the identity gate gets index 0). The enumeration, alias names,
/// and conjugation tables are validated against 2×2 unitaries in tests.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SingleClifford(u8);

/// Signed axes orthogonal to each base axis: the other two base axes in
/// Z-before-Y-before-X order, + sign before −.
const ORTHO: [[u8; 4]; 3] = [[4, 5, 2, 3], [4, 5, 0, 1], [2, 3, 0, 1]];

impl SingleClifford {
    pub const COUNT: usize = 24;

    pub fn from_index(index: usize) -> Result<Self> {
        if index < Self::COUNT {
            Ok(SingleClifford(index as u8))
        } else {
            Err(Error::domain(format!(
                "single-qubit Clifford index {index} out of range 0..24"
            )))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = SingleClifford> {
        (0..Self::COUNT as u8).map(SingleClifford)
    }

    /// Image of X under conjugation.
    pub fn image_of_x(self) -> SignedAxis {
        SignedAxis(self.0 / 4)
    }

    /// Image of Z under conjugation.
    pub fn image_of_z(self) -> SignedAxis {
        let ix = self.image_of_x();
        SignedAxis(ORTHO[ix.axis() as usize][(self.0 % 4) as usize])
    }

    /// Image of Y, determined by Y = iXZ.
    pub fn image_of_y(self) -> SignedAxis {
        let prod = self.image_of_x().local().multiply(self.image_of_z().local());
        SignedAxis::from_local(Local {
            k: (prod.k + 1) & 3,
            ..prod
        })
    }

    pub fn image_of(self, axis: SignedAxis) -> SignedAxis {
        let img = match axis.axis() {
            0 => self.image_of_x(),
            1 => self.image_of_y(),
            _ => self.image_of_z(),
        };
        if axis.is_negative() {
            img.negated()
        } else {
            img
        }
    }

    /// Gate with the given conjugation images (which must be orthogonal axes).
    pub fn from_images(image_x: SignedAxis, image_z: SignedAxis) -> Result<Self> {
        if image_x.axis() == image_z.axis() {
            return Err(Error::domain(
                "images of X and Z must lie on different axes".to_string(),
            ));
        }
        let pos = ORTHO[image_x.axis() as usize]
            .iter()
            .position(|&c| c == image_z.code())
            .expect("orthogonal axis always listed");
        Ok(SingleClifford(image_x.code() * 4 + pos as u8))
    }

    /// Matrix product `self · rhs` (rhs acts first).
    #[must_use]
    pub fn compose(self, rhs: SingleClifford) -> SingleClifford {
        let ix = self.image_of(rhs.image_of_x());
        let iz = self.image_of(rhs.image_of_z());
        SingleClifford::from_images(ix, iz).expect("composition of Cliffords is a Clifford")
    }

    #[must_use]
    pub fn inverse(self) -> SingleClifford {
        tables().inverse[self.index()]
    }

    /// Preferred alias, if this gate has one.
    pub fn name(self) -> Option<&'static str> {
        ALIASES
            .iter()
            .find(|a| a.gate() == self)
            .map(|a| a.name)
    }

    pub fn from_name(name: &str) -> Option<Self> {
        if let Some(alias) = ALIASES.iter().find(|a| a.name == name) {
            return Some(alias.gate());
        }
        name.strip_prefix('C')
            .and_then(|idx| idx.parse::<usize>().ok())
            .and_then(|idx| SingleClifford::from_index(idx).ok())
    }

    /// Conjugation action on a site code (I=0, Z=1, X=2, Y=3 as (x<<1)|z):
    /// returns the new site code and the phase exponent to add (mod 4)
    /// in the `i^k X^x Z^z` convention.
    pub(crate) fn conj_site(self, code: u8) -> (u8, u8) {
        tables().conj1q[self.index()][code as usize]
    }

    fn conj_site_computed(self, code: u8) -> (u8, u8) {
        let x = code >> 1;
        let z = code & 1;
        let img = self
            .image_of_x()
            .local()
            .pow(x)
            .multiply(self.image_of_z().local().pow(z));
        ((img.x << 1) | img.z, img.k)
    }
}

impl fmt::Debug for SingleClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name() {
            Some(name) => write!(f, "SingleClifford({name})"),
            None => write!(f, "SingleClifford(C{})", self.0),
        }
    }
}

struct Alias {
    name: &'static str,
    image_x: u8,
    image_z: u8,
}

impl Alias {
    fn gate(&self) -> SingleClifford {
        SingleClifford::from_images(SignedAxis(self.image_x), SignedAxis(self.image_z))
            .expect("alias table lists valid image pairs")
    }
}

/// Named gates. X_{π/2} is `SX`, Y_{π/2} is `SY`, and product names read as
/// matrix products (`HSDG` = H·S†, i.e. S† applied first). Unnamed gates
/// serialize as `C<index>`.
const ALIASES: &[Alias] = &[
    Alias { name: "I", image_x: 0, image_z: 4 },
    Alias { name: "X", image_x: 0, image_z: 5 },
    Alias { name: "Y", image_x: 1, image_z: 5 },
    Alias { name: "Z", image_x: 1, image_z: 4 },
    Alias { name: "H", image_x: 4, image_z: 0 },
    Alias { name: "S", image_x: 2, image_z: 4 },
    Alias { name: "SDG", image_x: 3, image_z: 4 },
    Alias { name: "SX", image_x: 0, image_z: 3 },
    Alias { name: "SXDG", image_x: 0, image_z: 2 },
    Alias { name: "SY", image_x: 5, image_z: 0 },
    Alias { name: "SYDG", image_x: 4, image_z: 1 },
    Alias { name: "HSDG", image_x: 2, image_z: 0 },
    Alias { name: "SH", image_x: 4, image_z: 2 },
    Alias { name: "SDGH", image_x: 4, image_z: 3 },
];

impl SingleClifford {
    pub const I: SingleClifford = SingleClifford(0);

    pub fn x() -> Self {
        Self::from_name("X").unwrap()
    }
    pub fn y() -> Self {
        Self::from_name("Y").unwrap()
    }
    pub fn z() -> Self {
        Self::from_name("Z").unwrap()
    }
    pub fn h() -> Self {
        Self::from_name("H").unwrap()
    }
    pub fn s() -> Self {
        Self::from_name("S").unwrap()
    }
    pub fn sdg() -> Self {
        Self::from_name("SDG").unwrap()
    }
    pub fn sx() -> Self {
        Self::from_name("SX").unwrap()
    }
    pub fn sxdg() -> Self {
        Self::from_name("SXDG").unwrap()
    }
    pub fn sy() -> Self {
        Self::from_name("SY").unwrap()
    }
    pub fn sydg() -> Self {
        Self::from_name("SYDG").unwrap()
    }
    pub fn hsdg() -> Self {
        Self::from_name("HSDG").unwrap()
    }
    pub fn sh() -> Self {
        Self::from_name("SH").unwrap()
    }
    pub fn sdgh() -> Self {
        Self::from_name("SDGH").unwrap()
    }
}

/// A gate instance kind: one of the 24 single-qubit Cliffords, or CNOT.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CliffordGate {
    Single(SingleClifford),
    Cnot,
}

impl CliffordGate {
    pub fn arity(self) -> usize {
        match self {
            CliffordGate::Single(_) => 1,
            CliffordGate::Cnot => 2,
        }
    }

    pub fn name(self) -> String {
        match self {
            CliffordGate::Single(c) => c
                .name()
                .map_or_else(|| format!("C{}", c.index()), str::to_string),
            CliffordGate::Cnot => "CNOT".to_string(),
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        if name == "CNOT" || name == "CX" {
            Some(CliffordGate::Cnot)
        } else {
            SingleClifford::from_name(name).map(CliffordGate::Single)
        }
    }

    pub fn is_identity(self) -> bool {
        self == CliffordGate::Single(SingleClifford::I)
    }

    #[must_use]
    pub fn inverse(self) -> Self {
        match self {
            CliffordGate::Single(c) => CliffordGate::Single(c.inverse()),
            CliffordGate::Cnot => CliffordGate::Cnot,
        }
    }
}

/// CNOT conjugation on the joint site code
/// `(xc<<3)|(zc<<2)|(xt<<1)|zt`: returns (new code, phase exponent delta).
pub(crate) fn cnot_conj_site(code: u8) -> (u8, u8) {
    tables().cnot[code as usize]
}

struct Tables {
    conj1q: [[(u8, u8); 4]; 24],
    cnot: [(u8, u8); 16],
    inverse: [SingleClifford; 24],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

fn build_tables() -> Tables {
    let mut conj1q = [[(0u8, 0u8); 4]; 24];
    for c in 0..24 {
        let gate = SingleClifford(c as u8);
        for code in 0..4u8 {
            conj1q[c][code as usize] = gate.conj_site_computed(code);
        }
    }

    let mut inverse = [SingleClifford(0); 24];
    for c in 0..24 {
        let gate = SingleClifford(c as u8);
        let inv = SingleClifford::all()
            .find(|&g| gate.compose(g) == SingleClifford::I)
            .expect("every Clifford has an inverse in the table");
        inverse[c] = inv;
    }

    // Two-qubit locals: x/z are 2-bit masks with bit 0 = control, bit 1 = target.
    #[derive(Clone, Copy)]
    struct Local2 {
        x: u8,
        z: u8,
        k: u8,
    }
    impl Local2 {
        fn multiply(self, rhs: Local2) -> Local2 {
            Local2 {
                x: self.x ^ rhs.x,
                z: self.z ^ rhs.z,
                k: (self.k + rhs.k + 2 * ((self.z & rhs.x).count_ones() as u8 & 1)) & 3,
            }
        }
    }
    const ID2: Local2 = Local2 { x: 0, z: 0, k: 0 };
    // Generator images of CNOT: X_c → X_c X_t, Z_c → Z_c, X_t → X_t, Z_t → Z_c Z_t.
    let img_xc = Local2 { x: 0b11, z: 0, k: 0 };
    let img_zc = Local2 { x: 0, z: 0b01, k: 0 };
    let img_xt = Local2 { x: 0b10, z: 0, k: 0 };
    let img_zt = Local2 { x: 0, z: 0b11, k: 0 };

    let mut cnot = [(0u8, 0u8); 16];
    for code in 0..16u8 {
        let (xc, zc, xt, zt) = (code >> 3 & 1, code >> 2 & 1, code >> 1 & 1, code & 1);
        let mut img = ID2;
        // Site factor order X_c Z_c X_t Z_t matches the packed convention.
        for (bit, gen) in [(xc, img_xc), (zc, img_zc), (xt, img_xt), (zt, img_zt)] {
            if bit == 1 {
                img = img.multiply(gen);
            }
        }
        let new_code = (img.x & 1) << 3 | (img.z & 1) << 2 | (img.x >> 1) << 1 | (img.z >> 1);
        cnot[code as usize] = (new_code, img.k);
    }

    Tables {
        conj1q,
        cnot,
        inverse,
    }
}

impl PauliOperator {
    /// Conjugate by a gate instance: returns `U P U†`, acting as the
    /// identity outside `qubits`.
    pub fn conjugate_by_gate(&self, gate: CliffordGate, qubits: &[usize]) -> Result<Self> {
        let mut p = self.clone();
        p.apply_gate_conjugation(gate, qubits)?;
        Ok(p)
    }

    pub(crate) fn apply_gate_conjugation(
        &mut self,
        gate: CliffordGate,
        qubits: &[usize],
    ) -> Result<()> {
        let n = self.qubit_count();
        if qubits.len() != gate.arity() {
            return Err(Error::domain(format!(
                "gate {} takes {} qubit(s), got {}",
                gate.name(),
                gate.arity(),
                qubits.len()
            )));
        }
        for &q in qubits {
            if q >= n {
                return Err(Error::InvalidIndex {
                    index: q,
                    n,
                    reason: "gate qubit past operator width",
                });
            }
        }
        match gate {
            CliffordGate::Single(c) => {
                self.conj_single_unchecked(c, qubits[0]);
                Ok(())
            }
            CliffordGate::Cnot => {
                if qubits[0] == qubits[1] {
                    return Err(Error::InvalidIndex {
                        index: qubits[1],
                        n,
                        reason: "repeated qubit in two-qubit gate",
                    });
                }
                self.conj_cnot_unchecked(qubits[0], qubits[1]);
                Ok(())
            }
        }
    }

    pub(crate) fn conj_single_unchecked(&mut self, c: SingleClifford, q: usize) {
        let code = (u8::from(self.x_bit(q)) << 1) | u8::from(self.z_bit(q));
        if code == 0 {
            return;
        }
        let (new_code, dk) = c.conj_site(code);
        self.set_site(q, PauliKind::from_code(new_code));
        self.add_phase(dk);
    }

    pub(crate) fn conj_cnot_unchecked(&mut self, control: usize, target: usize) {
        let code = (u8::from(self.x_bit(control)) << 3)
            | (u8::from(self.z_bit(control)) << 2)
            | (u8::from(self.x_bit(target)) << 1)
            | u8::from(self.z_bit(target));
        if code == 0 {
            return;
        }
        let (new_code, dk) = cnot_conj_site(code);
        self.set_site(control, PauliKind::from_code(new_code >> 2));
        self.set_site(target, PauliKind::from_code(new_code & 0b11));
        self.add_phase(dk);
    }
}
