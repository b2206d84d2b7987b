//! Diamond-structure bath geometry, spinful-site sampling, hyperfine
//! couplings and pair angles relative to the hyperfine axis.

use std::io::{BufRead, Write};

use nalgebra::{Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::{HBAR, MU0_OVER_4PI};
use crate::spinops::Spin;
use crate::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Atom positions of the conventional diamond cell in units of a0: the FCC
/// sublattice followed by its copy shifted by (¼, ¼, ¼).
const DIAMOND_BASIS: [[f64; 3]; 8] = [
    [0.0, 0.0, 0.0],
    [0.0, 0.5, 0.5],
    [0.5, 0.0, 0.5],
    [0.5, 0.5, 0.0],
    [0.25, 0.25, 0.25],
    [0.25, 0.75, 0.75],
    [0.75, 0.25, 0.75],
    [0.75, 0.75, 0.25],
];

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesParams {
    pub spin: Spin,
    /// Gyromagnetic ratio, rad s⁻¹ T⁻¹.
    pub gamma: f64,
    /// Peak hyperfine coupling A0, rad/s.
    pub hf_peak: f64,
    /// Electron confinement radius L0, meters.
    pub l0: f64,
}

impl SpeciesParams {
    /// Species whose peak coupling is `ratio` × E_dd for lattice constant `a0`.
    pub fn with_peak_ratio(spin: Spin, gamma: f64, l0: f64, ratio: f64, a0: f64) -> Result<Self> {
        if !(ratio > 0.0) {
            return Err(Error::param("A0/E_dd", format!("{ratio} must be positive")));
        }
        let s = SpeciesParams {
            spin,
            gamma,
            hf_peak: ratio * compute_e_dd(gamma, a0)?,
            l0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hf_peak > 0.0 && self.hf_peak.is_finite()) {
            return Err(Error::param(
                "A0",
                format!("{} must be positive", self.hf_peak),
            ));
        }
        if !(self.l0 > 0.0 && self.l0.is_finite()) {
            return Err(Error::param("L0", format!("{} must be positive", self.l0)));
        }
        if !(self.gamma != 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma", "must be finite and nonzero"));
        }
        Ok(())
    }

    pub fn peak_ratio(&self, a0: f64) -> Result<f64> {
        Ok(self.hf_peak / compute_e_dd(self.gamma, a0)?)
    }
}

/// How the spinful sites are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum SiteSelection {
    /// Bernoulli(ρ) per site from a ChaCha8 stream seeded with this value.
    Seeded(u64),
    /// Explicit indices into the lattice site list; bypasses the PRNG.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub lattice_constant: f64,
    pub box_dims: [usize; 3],
    pub species: SpeciesParams,
    pub abundance: f64,
    pub sites: SiteSelection,
}

impl LatticeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lattice_constant > 0.0 && self.lattice_constant.is_finite()) {
            return Err(Error::param("a0", "must be positive"));
        }
        if self.box_dims.iter().any(|&n| n == 0) {
            return Err(Error::param("box", "each dimension must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.abundance) {
            return Err(Error::param(
                "abundance",
                format!("{} outside [0, 1]", self.abundance),
            ));
        }
        self.species.validate()
    }

    pub fn site_count(&self) -> usize {
        8 * self.box_dims.iter().product::<usize>()
    }
}

/// All 8·∏dims diamond sites, centered on the box center. Cells are visited
/// lexicographically (x slowest), then the basis in [`DIAMOND_BASIS`] order.
pub fn build_diamond_lattice(a0: f64, box_dims: [usize; 3]) -> Vec<Vec3> {
    let center = Vec3::new(
        box_dims[0] as f64 / 2.0,
        box_dims[1] as f64 / 2.0,
        box_dims[2] as f64 / 2.0,
    );
    let mut out = Vec::with_capacity(8 * box_dims.iter().product::<usize>());
    for i in 0..box_dims[0] {
        for j in 0..box_dims[1] {
            for k in 0..box_dims[2] {
                let cell = Vec3::new(i as f64, j as f64, k as f64);
                for b in DIAMOND_BASIS {
                    out.push((cell + Vec3::from(b) - center) * a0);
                }
            }
        }
    }
    out
}

/// Bernoulli(ρ) selection: one `f64` in [0, 1) per site, in site order, from
/// `ChaCha8Rng::seed_from_u64(seed)`; a site is kept iff its variate < ρ.
pub fn sample_spinful_sites(site_count: usize, rho: f64, seed: u64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::param("abundance", format!("{rho} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..site_count)
        .filter(|_| rng.random::<f64>() < rho)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HfCouplings {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
}

/// A_i = A0·exp(−|r_i|²/L0²) with the central spin at the origin.
pub fn assign_hf_couplings(positions: &[Vec3], species: &SpeciesParams) -> HfCouplings {
    let values: Vec<f64> = positions
        .iter()
        .map(|r| species.hf_peak * (-r.norm_squared() / (species.l0 * species.l0)).exp())
        .collect();
    let (mean, std_dev) = mean_std(&values);
    HfCouplings {
        values,
        mean,
        std_dev,
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Dipolar energy of two like spins one bond length (a0√3/4) apart, rad/s.
pub fn compute_e_dd(gamma: f64, a0: f64) -> Result<f64> {
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(Error::param("a0", "must be positive"));
    }
    let bond = a0 * 3f64.sqrt() / 4.0;
    Ok(dipolar_prefactor(gamma, bond))
}

/// (μ0/4π)·ħγ²/r³ in rad/s.
pub fn dipolar_prefactor(gamma: f64, r: f64) -> f64 {
    MU0_OVER_4PI * HBAR * gamma * gamma / (r * r * r)
}

/// Frame whose z-axis is the hyperfine axis, reached from the crystal frame
/// by the minimal rotation taking [001] onto the axis (about ẑ×n̂). An axis
/// antiparallel to [001] uses a rotation by π about x̂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HfFrame {
    axis: Unit<Vec3>,
    rotation: Rotation3<f64>,
}

impl HfFrame {
    pub fn new(axis: Vec3) -> Result<Self> {
        let norm = axis.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::param("hf_axis", "must be a nonzero finite vector"));
        }
        let axis = Unit::new_normalize(axis);
        let z = Vec3::z();
        let rotation = Rotation3::rotation_between(&z, &axis)
            .unwrap_or_else(|| Rotation3::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI));
        Ok(HfFrame { axis, rotation })
    }

    pub fn axis(&self) -> Vec3 {
        self.axis.into_inner()
    }

    /// Crystal-frame vector expressed in the hyperfine frame.
    pub fn to_local(&self, v: &Vec3) -> Vec3 {
        self.rotation.inverse_transform_vector(v)
    }
}

/// Geometry of one spin pair in the hyperfine frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub distance: f64,
    /// Polar angle from the hyperfine axis, [0, π].
    pub theta: f64,
    /// Azimuth in the hyperfine frame, [0, 2π).
    pub phi: f64,
    /// (μ0/4π)·ħγ²/|r_ij|³, rad/s.
    pub prefactor: f64,
}

pub fn pair_geometry(r_i: &Vec3, r_j: &Vec3, frame: &HfFrame, gamma: f64) -> Result<PairGeometry> {
    let d = r_j - r_i;
    let distance = d.norm();
    if distance == 0.0 {
        return Err(Error::ZeroSeparation);
    }
    let local = frame.to_local(&d);
    let theta = (local.z / distance).clamp(-1.0, 1.0).acos();
    let mut phi = local.y.atan2(local.x);
    if phi < 0.0 {
        phi += std::f64::consts::TAU;
    }
    if phi >= std::f64::consts::TAU {
        phi = 0.0;
    }
    Ok(PairGeometry {
        distance,
        theta,
        phi,
        prefactor: dipolar_prefactor(gamma, distance),
    })
}

/// Unit vector along the Miller direction [h k l].
pub fn miller_direction(h: i32, k: i32, l: i32) -> Result<Vec3> {
    let v = Vec3::new(h as f64, k as f64, l as f64);
    if v.norm() == 0.0 {
        return Err(Error::param(
            "hf_axis",
            "Miller direction [000] is undefined",
        ));
    }
    Ok(v.normalize())
}

/// Unit vector from polar/azimuthal angles (degrees) in the crystal frame.
pub fn axis_from_angles(theta_deg: f64, phi_deg: f64) -> Vec3 {
    let (t, p) = (theta_deg.to_radians(), phi_deg.to_radians());
    Vec3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos())
}

/// One bath realization: spinful-site positions (central spin at the
/// origin), their hyperfine couplings and the hyperfine axis.
#[derive(Debug, Clone, PartialEq)]
pub struct BathRealization {
    pub lattice_constant: f64,
    pub species: SpeciesParams,
    pub positions: Vec<Vec3>,
    pub hf_couplings: Vec<f64>,
    frame: HfFrame,
    pub e_dd: f64,
    pub a_bar: f64,
    pub sigma_hf: f64,
}

impl BathRealization {
    /// Builds the lattice, selects spinful sites and assigns couplings.
    pub fn generate(spec: &LatticeSpec, hf_axis: Vec3) -> Result<Self> {
        spec.validate()?;
        let sites = build_diamond_lattice(spec.lattice_constant, spec.box_dims);
        let chosen = match &spec.sites {
            SiteSelection::Seeded(seed) => {
                sample_spinful_sites(sites.len(), spec.abundance, *seed)?
            }
            SiteSelection::Explicit(idx) => {
                let mut idx = idx.clone();
                idx.sort_unstable();
                idx.dedup();
                if let Some(&bad) = idx.iter().find(|&&i| i >= sites.len()) {
                    return Err(Error::SiteOutOfRange {
                        index: bad,
                        len: sites.len(),
                    });
                }
                idx
            }
        };
        let positions = chosen.into_iter().map(|i| sites[i]).collect();
        Self::from_positions(
            spec.lattice_constant,
            spec.species.clone(),
            positions,
            hf_axis,
        )
    }

    /// Couplings from the Gaussian envelope.
    pub fn from_positions(
        lattice_constant: f64,
        species: SpeciesParams,
        positions: Vec<Vec3>,
        hf_axis: Vec3,
    ) -> Result<Self> {
        let hf = assign_hf_couplings(&positions, &species);
        Self::from_parts(lattice_constant, species, positions, hf.values, hf_axis)
    }

    /// Explicit positions and couplings, e.g. for detuned two-spin studies.
    pub fn from_parts(
        lattice_constant: f64,
        species: SpeciesParams,
        positions: Vec<Vec3>,
        hf_couplings: Vec<f64>,
        hf_axis: Vec3,
    ) -> Result<Self> {
        species.validate()?;
        if positions.len() != hf_couplings.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} positions but {} couplings",
                positions.len(),
                hf_couplings.len()
            )));
        }
        if let Some(a) = hf_couplings
            .iter()
            .find(|&&a| !(a > 0.0 && a <= species.hf_peak * (1.0 + 1e-12)))
        {
            return Err(Error::param(
                "hf_couplings",
                format!("A_i = {a} outside (0, A0 = {}]", species.hf_peak),
            ));
        }
        let e_dd = compute_e_dd(species.gamma, lattice_constant)?;
        let (a_bar, sigma_hf) = mean_std(&hf_couplings);
        Ok(BathRealization {
            lattice_constant,
            species,
            positions,
            hf_couplings,
            frame: HfFrame::new(hf_axis)?,
            e_dd,
            a_bar,
            sigma_hf,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn hf_axis(&self) -> Vec3 {
        self.frame.axis()
    }

    pub fn frame(&self) -> &HfFrame {
        &self.frame
    }

    /// Same sites and couplings under a different hyperfine axis.
    pub fn with_hf_axis(&self, hf_axis: Vec3) -> Result<Self> {
        let mut out = self.clone();
        out.frame = HfFrame::new(hf_axis)?;
        Ok(out)
    }

    pub fn pair(&self, i: usize, j: usize) -> Result<PairGeometry> {
        for &index in &[i, j] {
            if index >= self.len() {
                return Err(Error::SiteOutOfRange {
                    index,
                    len: self.len(),
                });
            }
        }
        pair_geometry(
            &self.positions[i],
            &self.positions[j],
            &self.frame,
            self.species.gamma,
        )
    }

    pub fn bond_length(&self) -> f64 {
        self.lattice_constant * 3f64.sqrt() / 4.0
    }

    /// Index pairs (i < j) separated by one bond length.
    pub fn nearest_neighbor_pairs(&self) -> Vec<(usize, usize)> {
        let cut = self.bond_length() * (1.0 + 1e-6);
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if (self.positions[j] - self.positions[i]).norm() <= cut {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Writes the comma-separated realization format: a header line
    /// `a0,L0,A0/E_dd,spin_I,gamma,hf_x,hf_y,hf_z`, then `index,x,y,z,A_i`
    /// per spinful site, floats with 17 significant digits.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let axis = self.hf_axis();
        let ratio = self.species.peak_ratio(self.lattice_constant)?;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt17(self.lattice_constant),
            fmt17(self.species.l0),
            fmt17(ratio),
            fmt17(self.species.spin.value()),
            fmt17(self.species.gamma),
            fmt17(axis.x),
            fmt17(axis.y),
            fmt17(axis.z)
        )?;
        for (i, (r, a)) in self.positions.iter().zip(&self.hf_couplings).enumerate() {
            writeln!(
                w,
                "{i},{},{},{},{}",
                fmt17(r.x),
                fmt17(r.y),
                fmt17(r.z),
                fmt17(*a)
            )?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            reason: "missing header line".into(),
        })?;
        let h = parse_fields(&header?, 8, 1)?;
        let a0 = h[0];
        // A0 is rebuilt from the stored ratio; couplings are read verbatim.
        let species = SpeciesParams::with_peak_ratio(Spin::new(h[3])?, h[4], h[1], h[2], a0)?;
        let axis = Vec3::new(h[5], h[6], h[7]);
        let mut positions = Vec::new();
        let mut couplings = Vec::new();
        for (n, line) in lines {
            let f = parse_fields(&line?, 5, n + 1)?;
            if f[0] as usize != positions.len() {
                return Err(Error::Parse {
                    line: n + 1,
                    reason: format!("site index {} out of sequence", f[0]),
                });
            }
            positions.push(Vec3::new(f[1], f[2], f[3]));
            couplings.push(f[4]);
        }
        Self::from_parts(a0, species, positions, couplings, axis)
    }
}

fn parse_fields(line: &str, expected: usize, line_no: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != expected {
        return Err(Error::Parse {
            line: line_no,
            reason: format!("expected {expected} fields, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|s| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                reason: format!("`{s}`: {e}"),
            })
        })
        .collect()
}

/// Scientific notation with 17 significant digits (round-trips any f64).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
