//! Spectral measures on the unit sphere and the Lévy measure they induce,
//! `ν(dx) = μ(dz) dr / r^{1+α}` in polar coordinates.

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::closed_form::norm_sq;
use crate::error::{domain, Error, Result};
use crate::index::StabilityIndex;

/// Atoms closer than this (in Euclidean distance) are treated as one direction.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Allowed deviation of a direction's norm from 1.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Largest dimension accepted from documents.
pub const MAX_DIMENSION: usize = 4096;

/// A point on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Direction(Vec<f64>);

impl Direction {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.iter().any(|c| !c.is_finite()) {
            return Err(domain("direction must be a non-empty finite vector"));
        }
        let norm = norm_sq(&coords).sqrt();
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(domain(format!("direction has norm {norm}, expected 1")));
        }
        Ok(Self(coords))
    }

    /// Rescales a non-zero finite vector onto the sphere.
    pub fn normalize(v: &[f64]) -> Result<Self> {
        let norm = norm_sq(v).sqrt();
        if v.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(domain("cannot normalise a zero or non-finite vector"));
        }
        Ok(Self(v.iter().map(|c| c / norm).collect()))
    }

    /// The `i`-th standard basis vector of `R^d`.
    pub fn axis(d: usize, i: usize) -> Self {
        let mut coords = vec![0.0; d];
        coords[i] = 1.0;
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    fn distance(&self, other: &Direction) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn antipodal_distance(&self, other: &Direction) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a + b) * (a + b))
            .sum::<f64>()
            .sqrt()
    }

    /// Representative of `{z, -z}` on the half-sphere whose first
    /// non-negligible coordinate is positive.
    fn half_sphere_rep(&self) -> Self {
        let leading = self
            .0
            .iter()
            .find(|c| c.abs() > 1e-9)
            .copied()
            .unwrap_or(0.0);
        if leading < 0.0 {
            self.neg()
        } else {
            self.clone()
        }
    }
}

/// Point mass `mass` at direction `z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub z: Direction,
    pub mass: f64,
}

impl Atom {
    pub fn new(z: Direction, mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(domain(format!(
                "atom mass must be positive and finite, got {mass}"
            )));
        }
        Ok(Self { z, mass })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Discrete(Vec<Atom>),
    Isotropic { total_mass: f64 },
}

/// Finite positive measure on the unit sphere of `R^d`.
///
/// Discrete measures store their atoms literally. A measure produced by
/// [`SpectralMeasure::symmetrize`] lists every direction together with its
/// antipode, half-sphere representative first, so [`SpectralMeasure::pairs`]
/// recovers the half-sphere form the path simulator works with.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    dim: usize,
    shape: Shape,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIMENSION {
        return Err(domain(format!(
            "dimension must be in 1..={MAX_DIMENSION}, got {dim}"
        )));
    }
    Ok(())
}

impl SpectralMeasure {
    /// Discrete measure from arbitrary positive atoms (not necessarily symmetric).
    pub fn discrete(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        check_dim(dim)?;
        if atoms.is_empty() {
            return Err(domain("discrete spectral measure needs at least one atom"));
        }
        if let Some(bad) = atoms.iter().find(|a| a.z.dim() != dim) {
            return Err(domain(format!(
                "atom direction has dimension {}, measure has {dim}",
                bad.z.dim()
            )));
        }
        if let Some(bad) = atoms.iter().find(|a| !(a.mass.is_finite() && a.mass > 0.0)) {
            return Err(domain(format!(
                "atom mass must be positive and finite, got {}",
                bad.mass
            )));
        }
        let total: f64 = atoms.iter().map(|a| a.mass).sum();
        if !total.is_finite() {
            return Err(domain("total mass overflows"));
        }
        Ok(Self {
            dim,
            shape: Shape::Discrete(atoms),
        })
    }

    /// Uniform measure on the sphere with the given total mass.
    pub fn isotropic(dim: usize, total_mass: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(total_mass.is_finite() && total_mass > 0.0) {
            return Err(domain(format!(
                "total mass must be positive and finite, got {total_mass}"
            )));
        }
        Ok(Self {
            dim,
            shape: Shape::Isotropic { total_mass },
        })
    }

    /// Symmetric pairs `{±z_i}` with mass `m` on each, e.g. the axis cross.
    pub fn from_pairs(dim: usize, pairs: &[(Direction, f64)]) -> Result<Self> {
        let mut atoms = Vec::with_capacity(2 * pairs.len());
        for (z, m) in pairs {
            atoms.push(Atom::new(z.clone(), *m)?);
            atoms.push(Atom::new(z.neg(), *m)?);
        }
        Self::discrete(dim, atoms)?.symmetrize()
    }

    /// Antipodal pair `±e_1` in `R^d` with mass `atom_mass` on each atom.
    pub fn antipodal(dim: usize, atom_mass: f64) -> Result<Self> {
        check_dim(dim)?;
        Self::from_pairs(dim, &[(Direction::axis(dim, 0), atom_mass)])
    }

    /// Atoms `±e_i` for every axis, each of mass `atom_mass`.
    pub fn axis_cross(dim: usize, atom_mass: f64) -> Result<Self> {
        check_dim(dim)?;
        let pairs: Vec<_> = (0..dim)
            .map(|i| (Direction::axis(dim, i), atom_mass))
            .collect();
        Self::from_pairs(dim, &pairs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self.shape, Shape::Isotropic { .. })
    }

    /// Atoms of a discrete measure; `None` for the isotropic one.
    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.shape {
            Shape::Discrete(atoms) => Some(atoms),
            Shape::Isotropic { .. } => None,
        }
    }

    /// `|μ| = μ(S)`.
    pub fn total_mass(&self) -> f64 {
        match &self.shape {
            Shape::Discrete(atoms) => atoms.iter().map(|a| a.mass).sum(),
            Shape::Isotropic { total_mass } => *total_mass,
        }
    }

    /// `(μ + μ∘(-·)) / 2` with coinciding directions merged.
    pub fn symmetrize(&self) -> Result<Self> {
        let atoms = match &self.shape {
            Shape::Isotropic { .. } => return Ok(self.clone()),
            Shape::Discrete(atoms) => atoms,
        };
        let mut reps: Vec<(Direction, f64)> = Vec::new();
        for atom in atoms {
            let half = 0.5 * atom.mass;
            match reps.iter_mut().find(|(z, _)| {
                z.distance(&atom.z) <= MERGE_TOLERANCE
                    || z.antipodal_distance(&atom.z) <= MERGE_TOLERANCE
            }) {
                Some((_, m)) => *m += half,
                None => reps.push((atom.z.half_sphere_rep(), half)),
            }
        }
        let mut out = Vec::with_capacity(2 * reps.len());
        for (z, m) in reps {
            let anti = z.neg();
            out.push(Atom { z, mass: m });
            out.push(Atom { z: anti, mass: m });
        }
        Self::discrete(self.dim, out)
    }

    /// Half-sphere representatives `(z_i, m_i)` of a symmetric discrete
    /// measure, where `m_i` is the mass carried by each of `z_i` and `-z_i`.
    pub fn pairs(&self) -> Result<Vec<(Direction, f64)>> {
        let atoms = match &self.shape {
            Shape::Discrete(atoms) => atoms,
            Shape::Isotropic { .. } => {
                return Err(domain("the isotropic measure has no atom pairs"));
            }
        };
        // (representative, mass on +rep, mass on -rep)
        let mut classes: Vec<(Direction, f64, f64)> = Vec::new();
        for atom in atoms {
            if let Some(class) = classes
                .iter_mut()
                .find(|(z, _, _)| z.distance(&atom.z) <= MERGE_TOLERANCE)
            {
                class.1 += atom.mass;
            } else if let Some(class) = classes
                .iter_mut()
                .find(|(z, _, _)| z.antipodal_distance(&atom.z) <= MERGE_TOLERANCE)
            {
                class.2 += atom.mass;
            } else {
                classes.push((atom.z.clone(), atom.mass, 0.0));
            }
        }
        let scale = self.total_mass();
        classes
            .into_iter()
            .map(|(z, plus, minus)| {
                if (plus - minus).abs() <= 1e-12 * scale {
                    Ok((z.half_sphere_rep(), 0.5 * (plus + minus)))
                } else {
                    Err(Error::Asymmetric)
                }
            })
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_isotropic() || self.pairs().is_ok()
    }

    /// `ν(|y| ≥ 1) = |μ| / α`.
    pub fn nu_ball_complement(&self, alpha: StabilityIndex) -> f64 {
        self.total_mass() / alpha.get()
    }

    /// `ν(|y| > δ) = |μ| δ^{-α} / α`, the rate of the compound Poisson part.
    pub fn big_jump_intensity(&self, alpha: StabilityIndex, delta: f64) -> Result<f64> {
        check_delta(delta)?;
        Ok(self.total_mass() * delta.powf(-alpha.get()) / alpha.get())
    }

    /// `∫_{|y| ≤ δ} y yᵀ ν(dy) = δ^{2-α}/(2-α) ∫_S z zᵀ μ(dz)`, row-major.
    pub fn small_jump_covariance(
        &self,
        alpha: StabilityIndex,
        delta: f64,
    ) -> Result<Vec<Vec<f64>>> {
        check_delta(delta)?;
        let radial = small_jump_radial_factor(alpha, delta);
        let d = self.dim;
        let mut cov = vec![vec![0.0; d]; d];
        match &self.shape {
            Shape::Discrete(atoms) => {
                for atom in atoms {
                    let z = atom.z.coords();
                    for i in 0..d {
                        for j in 0..d {
                            cov[i][j] += radial * atom.mass * z[i] * z[j];
                        }
                    }
                }
            }
            Shape::Isotropic { total_mass } => {
                for (i, row) in cov.iter_mut().enumerate() {
                    row[i] = radial * total_mass / d as f64;
                }
            }
        }
        Ok(cov)
    }

    /// Draws a direction from `μ / |μ|`.
    pub fn sample_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Direction {
        DirectionSampler::new(self).sample(rng)
    }

    /// Draws from `ν` restricted to `{|y| > δ}`, normalised.
    pub fn sample_big_jump<R: Rng + ?Sized>(
        &self,
        alpha: StabilityIndex,
        delta: f64,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        check_delta(delta)?;
        let mut out = vec![0.0; self.dim];
        DirectionSampler::new(self).sample_big_jump(alpha, delta, rng, &mut out);
        Ok(out)
    }

    pub fn to_document(&self) -> SpectralDocument {
        match &self.shape {
            Shape::Discrete(atoms) => SpectralDocument {
                d: self.dim,
                kind: MeasureKind::Discrete,
                atoms: Some(
                    atoms
                        .iter()
                        .map(|a| AtomDocument {
                            z: a.z.coords().to_vec(),
                            m: a.mass,
                        })
                        .collect(),
                ),
                total_mass: Some(self.total_mass()),
            },
            Shape::Isotropic { total_mass } => SpectralDocument {
                d: self.dim,
                kind: MeasureKind::Isotropic,
                atoms: None,
                total_mass: Some(*total_mass),
            },
        }
    }

    /// Parses a measure document and symmetrises it.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let doc: SpectralDocument = serde_json::from_str(json)?;
        Self::from_document(&doc)
    }

    pub fn from_document(doc: &SpectralDocument) -> Result<Self> {
        let measure = match doc.kind {
            MeasureKind::Isotropic => {
                if doc.atoms.as_ref().is_some_and(|a| !a.is_empty()) {
                    return Err(Error::Config(
                        "isotropic measure must not list atoms".into(),
                    ));
                }
                let total = doc
                    .total_mass
                    .ok_or_else(|| Error::Config("isotropic measure needs total_mass".into()))?;
                Self::isotropic(doc.d, total)?
            }
            MeasureKind::Discrete => {
                let raw = doc
                    .atoms
                    .as_ref()
                    .ok_or_else(|| Error::Config("discrete measure needs atoms".into()))?;
                check_dim(doc.d)?;
                let atoms = raw
                    .iter()
                    .map(|a| Atom::new(Direction::new(a.z.clone())?, a.m))
                    .collect::<Result<Vec<_>>>()?;
                let measure = Self::discrete(doc.d, atoms)?;
                if let Some(stated) = doc.total_mass {
                    let actual = measure.total_mass();
                    if (stated - actual).abs() > 1e-12 * actual {
                        return Err(Error::Config(format!(
                            "total_mass {stated} disagrees with the atom masses (sum {actual})"
                        )));
                    }
                }
                measure
            }
        };
        measure.symmetrize()
    }
}

impl Serialize for SpectralMeasure {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.to_document().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpectralMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let doc = SpectralDocument::deserialize(deserializer)?;
        Self::from_document(&doc).map_err(serde::de::Error::custom)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "jump threshold must be positive and finite, got {delta}"
        )))
    }
}

/// `∫_0^δ r² r^{-1-α} dr`.
pub(crate) fn small_jump_radial_factor(alpha: StabilityIndex, delta: f64) -> f64 {
    let a = alpha.get();
    delta.powf(2.0 - a) / (2.0 - a)
}

/// Precomputed direction sampler, reused across many draws in the simulators.
#[derive(Debug, Clone)]
pub(crate) enum DirectionSampler<'a> {
    Discrete {
        atoms: &'a [Atom],
        index: WeightedIndex<f64>,
    },
    Isotropic {
        dim: usize,
    },
}

impl<'a> DirectionSampler<'a> {
    pub(crate) fn new(mu: &'a SpectralMeasure) -> Self {
        match &mu.shape {
            Shape::Discrete(atoms) => Self::Discrete {
                atoms,
                index: WeightedIndex::new(atoms.iter().map(|a| a.mass))
                    .expect("atom masses are validated positive"),
            },
            Shape::Isotropic { .. } => Self::Isotropic { dim: mu.dim },
        }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Direction {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        Direction(out)
    }

    fn dim(&self) -> usize {
        match self {
            Self::Discrete { atoms, .. } => atoms[0].z.dim(),
            Self::Isotropic { dim } => *dim,
        }
    }

    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Self::Discrete { atoms, index } => {
                out.copy_from_slice(atoms[index.sample(rng)].z.coords());
            }
            Self::Isotropic { .. } => loop {
                for c in out.iter_mut() {
                    *c = rng.sample(StandardNormal);
                }
                let norm = norm_sq(out).sqrt();
                if norm > 1e-300 {
                    out.iter_mut().for_each(|c| *c /= norm);
                    return;
                }
            },
        }
    }

    /// Direction from `μ/|μ|`, radius `δ U^{-1/α}`.
    pub(crate) fn sample_big_jump<R: Rng + ?Sized>(
        &self,
        alpha: StabilityIndex,
        delta: f64,
        rng: &mut R,
        out: &mut [f64],
    ) {
        self.sample_into(rng, out);
        let u: f64 = rng.sample(Open01);
        let radius = delta * u.powf(-1.0 / alpha.get());
        out.iter_mut().for_each(|c| *c *= radius);
    }
}

/// A `d × d` matrix applied to directions, one evaluation point at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    rows: Vec<Vec<f64>>,
}

impl LinearMap {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(domain("linear map must be a non-empty square matrix"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(domain("linear map entries must be finite"));
        }
        Ok(Self { rows })
    }

    pub fn identity(d: usize) -> Self {
        Self::scaled_identity(d, 1.0)
    }

    pub fn scaled_identity(d: usize, s: f64) -> Self {
        let rows = (0..d)
            .map(|i| (0..d).map(|j| if i == j { s } else { 0.0 }).collect())
            .collect();
        Self { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Discrete,
    Isotropic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDocument {
    pub z: Vec<f64>,
    pub m: f64,
}

/// JSON form of a spectral measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralDocument {
    pub d: usize,
    #[serde(rename = "type")]
    pub kind: MeasureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_mass: Option<f64>,
}
