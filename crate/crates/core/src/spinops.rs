//! Spin-I matrices, tensor-product embedding and Hermitian diagonalization.
//!
//! Single-spin bases are ordered m = I, I−1, …, −I. Multi-spin bases are
//! tensor products with slot 0 varying slowest, so the basis index of
//! (m₀, m₁, …, m_{n−1}) is Σ k_s·d^{n−1−s} where k_s = I − m_s.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Largest supported spin, as 2I.
pub const MAX_TWICE_SPIN: u32 = 7;

/// Nuclear spin quantum number, stored as 2I.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin(u32);

impl Spin {
    pub const HALF: Spin = Spin(1);
    pub const THREE_HALVES: Spin = Spin(3);

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 || twice > MAX_TWICE_SPIN {
            return Err(Error::param(
                "spin",
                format!("2I = {twice} outside 1..={MAX_TWICE_SPIN}"),
            ));
        }
        Ok(Spin(twice))
    }

    /// Accepts any value whose double is a positive integer (within 1e-9).
    pub fn new(value: f64) -> Result<Self> {
        let twice = 2.0 * value;
        let rounded = twice.round();
        if !value.is_finite() || (twice - rounded).abs() > 1e-9 || rounded < 1.0 {
            return Err(Error::param(
                "spin",
                format!("{value} is not a positive half-integer"),
            ));
        }
        Spin::from_twice(rounded as u32)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// I(I+1)
    pub fn casimir(self) -> f64 {
        let i = self.value();
        i * (i + 1.0)
    }

    /// Magnetic quantum number of basis index `k`.
    pub fn m(self, k: usize) -> f64 {
        self.value() - k as f64
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub spin: Spin,
    pub iz: CMatrix,
    pub iplus: CMatrix,
    pub iminus: CMatrix,
}

impl SpinMatrices {
    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// Iˣ = (I⁺ + I⁻)/2
    pub fn ix(&self) -> CMatrix {
        (&self.iplus + &self.iminus) * C64::new(0.5, 0.0)
    }

    /// Iʸ = (I⁺ − I⁻)/2i
    pub fn iy(&self) -> CMatrix {
        (&self.iplus - &self.iminus) * C64::new(0.0, -0.5)
    }
}

pub fn spin_matrices(spin: Spin) -> SpinMatrices {
    let d = spin.dim();
    let i = spin.value();
    let mut iz = CMatrix::zeros(d, d);
    let mut iplus = CMatrix::zeros(d, d);
    for k in 0..d {
        iz[(k, k)] = C64::new(spin.m(k), 0.0);
    }
    // ⟨m+1|I⁺|m⟩ sits at (k−1, k) because index k−1 carries m+1.
    for k in 1..d {
        let m = spin.m(k);
        iplus[(k - 1, k)] = C64::new((i * (i + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let iminus = iplus.adjoint();
    SpinMatrices {
        spin,
        iz,
        iplus,
        iminus,
    }
}

/// Dense Hermitian matrix on a cluster Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMatrix);

/// Relative tolerance used by [`HermitianOperator::new`] and [`eigh`].
pub const HERMITIAN_TOL: f64 = 1e-12;

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_hermitian(&matrix)?;
        Ok(HermitianOperator(matrix))
    }

    pub(crate) fn new_unchecked(matrix: CMatrix) -> Self {
        debug_assert!(check_hermitian(&matrix).is_ok());
        HermitianOperator(matrix)
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianOperator(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn eigh(&self) -> Result<Eigh> {
        eigh_unchecked(self.0.clone())
    }
}

impl std::ops::Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator(&self.0 + &rhs.0)
    }
}

/// Returns the max |M − M†| deviation and the max |entry| scale.
pub fn hermitian_deviation(m: &CMatrix) -> (f64, f64) {
    let n = m.nrows();
    let mut dev = 0.0f64;
    let mut scale = 0.0f64;
    for c in 0..n {
        for r in 0..n {
            let a = m[(r, c)];
            scale = scale.max(a.norm());
            dev = dev.max((a - m[(c, r)].conj()).norm());
        }
    }
    (dev, scale)
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let (deviation, scale) = hermitian_deviation(m);
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation, scale });
    }
    Ok(())
}

/// Eigendecomposition H = V·diag(E)·V† with E ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn eigh(h: &CMatrix) -> Result<Eigh> {
    check_hermitian(h)?;
    eigh_unchecked(h.clone())
}

fn eigh_unchecked(h: CMatrix) -> Result<Eigh> {
    let n = h.nrows();
    let dec = SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or(Error::EigenFailure(n))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]));
    let values = order.iter().map(|&k| dec.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| dec.eigenvectors[(r, order[c])]);
    Ok(Eigh { values, vectors })
}

/// Embeds `op` (d×d) at slot `k` of an `n`-slot tensor product.
pub fn embed(op: &CMatrix, k: usize, n: usize, d: usize) -> Result<CMatrix> {
    check_slot(op, k, n, d)?;
    let dim = d.pow(n as u32);
    let mut out = CMatrix::zeros(dim, dim);
    add_embedded(&mut out, op, k, n, d, C64::new(1.0, 0.0));
    Ok(out)
}

fn check_slot(op: &CMatrix, k: usize, n: usize, d: usize) -> Result<()> {
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, local dimension is {d}",
            op.nrows(),
            op.ncols()
        )));
    }
    if k >= n {
        return Err(Error::DimensionMismatch(format!(
            "slot {k} outside cluster of size {n}"
        )));
    }
    Ok(())
}

fn nonzeros(op: &CMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for c in 0..op.ncols() {
        for r in 0..op.nrows() {
            let v = op[(r, c)];
            if v != C64::new(0.0, 0.0) {
                out.push((r, c, v));
            }
        }
    }
    out
}

/// `target += coeff · (1 ⊗ … ⊗ op@k ⊗ … ⊗ 1)`, touching only nonzero entries.
pub fn add_embedded(target: &mut CMatrix, op: &CMatrix, k: usize, n: usize, d: usize, coeff: C64) {
    let stride = d.pow((n - 1 - k) as u32);
    let outer = d.pow(k as u32);
    let entries = nonzeros(op);
    for hi in 0..outer {
        for lo in 0..stride {
            let base = hi * d * stride + lo;
            for &(r, c, v) in &entries {
                target[(base + r * stride, base + c * stride)] += coeff * v;
            }
        }
    }
}

/// `target += coeff · (op_a@ka ⊗ op_b@kb)` with identities elsewhere, `ka ≠ kb`.
#[allow(clippy::too_many_arguments)]
pub fn add_embedded_pair(
    target: &mut CMatrix,
    op_a: &CMatrix,
    ka: usize,
    op_b: &CMatrix,
    kb: usize,
    n: usize,
    d: usize,
    coeff: C64,
) {
    debug_assert_ne!(ka, kb);
    let dim = d.pow(n as u32);
    let stride_a = d.pow((n - 1 - ka) as u32);
    let stride_b = d.pow((n - 1 - kb) as u32);
    let ea = nonzeros(op_a);
    let eb = nonzeros(op_b);
    for base in 0..dim {
        // only basis indices with both slots at level 0
        if (base / stride_a) % d != 0 || (base / stride_b) % d != 0 {
            continue;
        }
        for &(ra, ca, va) in &ea {
            for &(rb, cb, vb) in &eb {
                let row = base + ra * stride_a + rb * stride_b;
                let col = base + ca * stride_a + cb * stride_b;
                target[(row, col)] += coeff * va * vb;
            }
        }
    }
}

/// Kronecker product a ⊗ b (a is the slower index).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
