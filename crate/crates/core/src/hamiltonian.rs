//! Effective cluster Hamiltonians: the hyperfine term plus the six-term
//! dipolar alphabet, each term switchable through a [`TermMask`].

use std::fmt;
use std::str::FromStr;

use crate::lattice::{BathRealization, PairGeometry};
use crate::spinops::{
    add_embedded, add_embedded_pair, spin_matrices, CMatrix, HermitianOperator, SpinMatrices, C64,
};
use crate::{Error, Result};

/// Which dipolar terms enter the Hamiltonian. 𝒞/𝒟 and ℰ/ℱ are adjoint
/// pairs and always switch together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermMask {
    pub a: bool,
    pub b: bool,
    pub cd: bool,
    pub ef: bool,
}

impl TermMask {
    pub const FULL: TermMask = TermMask {
        a: true,
        b: true,
        cd: true,
        ef: true,
    };
    /// High-field mode: only the secular 𝒜 and ℬ terms.
    pub const SECULAR: TermMask = TermMask {
        a: true,
        b: true,
        cd: false,
        ef: false,
    };
    pub const NONE: TermMask = TermMask {
        a: false,
        b: false,
        cd: false,
        ef: false,
    };

    pub fn is_secular(self) -> bool {
        !self.cd && !self.ef
    }

    pub fn union(self, other: TermMask) -> TermMask {
        TermMask {
            a: self.a || other.a,
            b: self.b || other.b,
            cd: self.cd || other.cd,
            ef: self.ef || other.ef,
        }
    }

    pub fn is_disjoint(self, other: TermMask) -> bool {
        !(self.a && other.a || self.b && other.b || self.cd && other.cd || self.ef && other.ef)
    }
}

impl Default for TermMask {
    fn default() -> Self {
        TermMask::FULL
    }
}

impl fmt::Display for TermMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [
            (self.a, "A"),
            (self.b, "B"),
            (self.cd, "CD"),
            (self.ef, "EF"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect();
        if names.is_empty() {
            write!(f, "none")
        } else {
            write!(f, "{}", names.join("+"))
        }
    }
}

impl FromStr for TermMask {
    type Err = Error;

    /// Accepts `full`, `secular`, `none`, or a `+`/`,` separated list of
    /// `A`, `B`, `CD`, `EF`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" | "all" => return Ok(TermMask::FULL),
            "secular" => return Ok(TermMask::SECULAR),
            "none" => return Ok(TermMask::NONE),
            _ => {}
        }
        let mut m = TermMask::NONE;
        for part in s.split(['+', ',']).map(str::trim).filter(|p| !p.is_empty()) {
            match part.to_ascii_uppercase().as_str() {
                "A" => m.a = true,
                "B" => m.b = true,
                "CD" => m.cd = true,
                "EF" => m.ef = true,
                other => {
                    return Err(Error::param("mask", format!("unknown term `{other}`")));
                }
            }
        }
        Ok(m)
    }
}

/// Central-spin projections entering the averaged hyperfine term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub p_plus: f64,
    pub p_minus: f64,
}

impl EffectiveParams {
    /// Projections whose average modulus is `c_hf`.
    pub fn with_c_hf(c_hf: f64) -> Result<Self> {
        if !(c_hf >= 0.0 && c_hf.is_finite()) {
            return Err(Error::param("c_hf", format!("{c_hf} must be nonnegative")));
        }
        Ok(EffectiveParams {
            p_plus: c_hf,
            p_minus: -c_hf,
        })
    }

    /// (|P₊| + |P₋|)/2
    pub fn c_hf(&self) -> f64 {
        (self.p_plus.abs() + self.p_minus.abs()) / 2.0
    }
}

impl Default for EffectiveParams {
    fn default() -> Self {
        EffectiveParams {
            p_plus: 0.5,
            p_minus: -0.5,
        }
    }
}

/// Alphabet coefficients (without operators) for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphabetCoefficients {
    /// multiplies IᶻIᶻ
    pub a: f64,
    /// multiplies I⁺I⁻ + I⁻I⁺
    pub b: f64,
    /// multiplies I⁺Iᶻ + IᶻI⁺ (𝒟 carries the conjugate)
    pub c: C64,
    /// multiplies I⁺I⁺ (ℱ carries the conjugate)
    pub e: C64,
}

pub fn alphabet_coefficients(geom: &PairGeometry, mask: TermMask) -> AlphabetCoefficients {
    let (st, ct) = geom.theta.sin_cos();
    let p = geom.prefactor;
    let legendre = 3.0 * ct * ct - 1.0;
    let on = |flag: bool| if flag { 1.0 } else { 0.0 };
    AlphabetCoefficients {
        a: on(mask.a) * p * legendre,
        b: on(mask.b) * p * (-legendre) / 4.0,
        c: C64::from_polar(on(mask.cd) * p * 0.75 * (2.0 * geom.theta).sin(), -geom.phi),
        e: C64::from_polar(on(mask.ef) * p * 0.75 * st * st, -2.0 * geom.phi),
    }
}

/// Adds the pair term for slots `i`, `j` of an `n`-spin cluster.
pub(crate) fn add_dipolar_pair(
    target: &mut CMatrix,
    geom: &PairGeometry,
    s: &SpinMatrices,
    mask: TermMask,
    i: usize,
    j: usize,
    n: usize,
) {
    let d = s.dim();
    let k = alphabet_coefficients(geom, mask);
    let re = |x: f64| C64::new(x, 0.0);
    if k.a != 0.0 {
        add_embedded_pair(target, &s.iz, i, &s.iz, j, n, d, re(k.a));
    }
    if k.b != 0.0 {
        add_embedded_pair(target, &s.iplus, i, &s.iminus, j, n, d, re(k.b));
        add_embedded_pair(target, &s.iminus, i, &s.iplus, j, n, d, re(k.b));
    }
    if k.c != C64::new(0.0, 0.0) {
        add_embedded_pair(target, &s.iplus, i, &s.iz, j, n, d, k.c);
        add_embedded_pair(target, &s.iz, i, &s.iplus, j, n, d, k.c);
        add_embedded_pair(target, &s.iminus, i, &s.iz, j, n, d, k.c.conj());
        add_embedded_pair(target, &s.iz, i, &s.iminus, j, n, d, k.c.conj());
    }
    if k.e != C64::new(0.0, 0.0) {
        add_embedded_pair(target, &s.iplus, i, &s.iplus, j, n, d, k.e);
        add_embedded_pair(target, &s.iminus, i, &s.iminus, j, n, d, k.e.conj());
    }
}

/// Two-spin dipolar Hamiltonian, dimension (2I+1)², slot 0 = spin i.
pub fn dipolar_pair_hamiltonian(
    geom: &PairGeometry,
    spins: &SpinMatrices,
    mask: TermMask,
) -> HermitianOperator {
    let d = spins.dim();
    let mut h = CMatrix::zeros(d * d, d * d);
    add_dipolar_pair(&mut h, geom, spins, mask, 0, 1, 2);
    HermitianOperator::new_unchecked(h)
}

fn check_cluster(cluster: &[usize], bath: &BathRealization) -> Result<()> {
    if cluster.is_empty() {
        return Err(Error::param("cluster", "must be non-empty"));
    }
    for (k, &i) in cluster.iter().enumerate() {
        if i >= bath.len() {
            return Err(Error::SiteOutOfRange {
                index: i,
                len: bath.len(),
            });
        }
        if cluster[..k].contains(&i) {
            return Err(Error::DuplicateSite(i));
        }
    }
    Ok(())
}

/// H = c_hf·Σ A_i Iᶻ_i + Σ_{i>j} H_dd(i, j) on the cluster's tensor space;
/// slot order follows `cluster`.
pub fn cluster_hamiltonian(
    cluster: &[usize],
    bath: &BathRealization,
    params: &EffectiveParams,
    mask: TermMask,
) -> Result<HermitianOperator> {
    check_cluster(cluster, bath)?;
    let s = spin_matrices(bath.species.spin);
    let d = s.dim();
    let n = cluster.len();
    let dim = d.pow(n as u32);
    let mut h = CMatrix::zeros(dim, dim);
    let c = params.c_hf();
    for (slot, &site) in cluster.iter().enumerate() {
        add_embedded(
            &mut h,
            &s.iz,
            slot,
            n,
            d,
            C64::new(c * bath.hf_couplings[site], 0.0),
        );
    }
    for a in 0..n {
        for b in 0..a {
            let geom = bath.pair(cluster[a], cluster[b])?;
            add_dipolar_pair(&mut h, &geom, &s, mask, a, b, n);
        }
    }
    Ok(HermitianOperator::new_unchecked(h))
}

/// Diagonal of βᶻ = Σ_{i∈ζ} A_i Iᶻ_i in the product basis.
pub fn bath_operator_diagonal(cluster: &[usize], bath: &BathRealization) -> Result<Vec<f64>> {
    check_cluster(cluster, bath)?;
    let spin = bath.species.spin;
    let d = spin.dim();
    let n = cluster.len();
    let dim = d.pow(n as u32);
    let mut diag = vec![0.0; dim];
    for (idx, v) in diag.iter_mut().enumerate() {
        let mut rest = idx;
        // slot n-1 is the fastest digit
        for slot in (0..n).rev() {
            *v += bath.hf_couplings[cluster[slot]] * spin.m(rest % d);
            rest /= d;
        }
    }
    Ok(diag)
}

pub fn total_bath_operator(cluster: &[usize], bath: &BathRealization) -> Result<HermitianOperator> {
    let diag = bath_operator_diagonal(cluster, bath)?;
    let n = diag.len();
    let m = CMatrix::from_fn(n, n, |r, c| {
        if r == c {
            C64::new(diag[r], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(HermitianOperator::new_unchecked(m))
}
