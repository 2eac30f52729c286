//! Chain parameters, magnon-sector bases and Hamiltonian matrices.
//!
//! Sites are indexed `0..L` from the left edge. The centered coordinate of
//! a site is `j - L/2`, so the walker starts at site `L/2`.
//! Basis states of the full space are bit masks with bit `j` set when site
//! `j` is flipped to `|1>`; `Z_j` is `+1` on an unflipped site.

use serde::{Deserialize, Serialize};

use crate::doublon::doublon_params;
use crate::dynamics::WalkState;
use crate::error::{Error, Result};

/// Largest chain handled in the full `2^L` Hilbert space.
pub const MAX_FULL_SITES: usize = 14;
/// Largest chain handled in the one- and two-magnon sectors.
pub const MAX_SECTOR_SITES: usize = 4096;
/// Smallest chain accepted for an experiment run.
pub const MIN_RUN_SITES: usize = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
}

/// Geometry and couplings of an XX / XXZ / next-nearest-neighbor chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    /// Number of sites `L`.
    pub sites: usize,
    /// Nearest-neighbor coupling `J`; sets the unit of time.
    pub coupling: f64,
    /// Anisotropy `Δ` of the `Z_j Z_{j+1}` term.
    pub anisotropy: f64,
    /// Next-nearest-neighbor hopping `J'`; zero gives the XXZ chain.
    pub nnn_coupling: f64,
    /// Number of flipped spins in the initial state (1 or 2).
    pub particles: usize,
    #[serde(default)]
    pub boundary: Boundary,
}

impl ChainSpec {
    /// XX chain (`Δ = 0`, `J' = 0`) with unit coupling and one walker.
    pub fn xx(sites: usize) -> Self {
        Self {
            sites,
            coupling: 1.0,
            anisotropy: 0.0,
            nnn_coupling: 0.0,
            particles: 1,
            boundary: Boundary::Open,
        }
    }

    /// XXZ chain with unit coupling and two adjacent walkers.
    pub fn xxz(sites: usize, anisotropy: f64) -> Self {
        Self {
            anisotropy,
            particles: 2,
            ..Self::xx(sites)
        }
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_nnn(mut self, nnn_coupling: f64) -> Self {
        self.nnn_coupling = nnn_coupling;
        self
    }

    pub fn with_particles(mut self, particles: usize) -> Self {
        self.particles = particles;
        self
    }

    /// Site where a single walker starts, `L / 2`.
    pub fn center(&self) -> usize {
        self.sites / 2
    }

    /// Checks the fields that every matrix builder relies on.
    ///
    /// Two sites are enough to build a Hamiltonian; experiment runs use
    /// [`ChainSpec::validate_run`] which additionally requires `L >= 4`.
    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidSpec(format!(
                "chain needs at least 2 sites, got {}",
                self.sites
            )));
        }
        for (name, value) in [
            ("J", self.coupling),
            ("delta", self.anisotropy),
            ("jprime", self.nnn_coupling),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidSpec(format!("{name} must be finite")));
            }
        }
        if self.anisotropy < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "delta must be >= 0, got {}",
                self.anisotropy
            )));
        }
        if !(1..=2).contains(&self.particles) {
            return Err(Error::InvalidSpec(format!(
                "particles must be 1 or 2, got {}",
                self.particles
            )));
        }
        Ok(())
    }

    pub fn validate_run(&self) -> Result<()> {
        self.validate()?;
        if self.sites < MIN_RUN_SITES {
            return Err(Error::InvalidSpec(format!(
                "L must be >= {MIN_RUN_SITES}, got {}",
                self.sites
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorKind {
    SingleMagnon,
    TwoMagnon,
    Doublon,
}

/// Label of one basis vector of a magnon sector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisState {
    Site(usize),
    /// Flipped sites `j < k`.
    Pair(usize, usize),
    /// Doublon on the bond between sites `b` and `b + 1`.
    Bond(usize),
}

/// Enumeration of a conserved-magnon sector of an `L`-site chain.
///
/// Pairs are ordered lexicographically in `(j, k)`; index maps are closed
/// form so the basis itself carries no storage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SectorBasis {
    kind: SectorKind,
    sites: usize,
}

impl SectorBasis {
    pub fn new(kind: SectorKind, sites: usize) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidBasis(format!(
                "sector basis needs at least 2 sites, got {sites}"
            )));
        }
        if sites > MAX_SECTOR_SITES {
            return Err(Error::ResourceLimit(format!(
                "sector bases are limited to L <= {MAX_SECTOR_SITES}, got {sites}"
            )));
        }
        Ok(Self { kind, sites })
    }

    pub fn single_magnon(sites: usize) -> Result<Self> {
        Self::new(SectorKind::SingleMagnon, sites)
    }

    pub fn two_magnon(sites: usize) -> Result<Self> {
        Self::new(SectorKind::TwoMagnon, sites)
    }

    pub fn doublon(sites: usize) -> Result<Self> {
        Self::new(SectorKind::Doublon, sites)
    }

    /// The sector holding `particles` flipped spins.
    pub fn for_particles(particles: usize, sites: usize) -> Result<Self> {
        match particles {
            1 => Self::single_magnon(sites),
            2 => Self::two_magnon(sites),
            n => Err(Error::InvalidSpec(format!(
                "particles must be 1 or 2, got {n}"
            ))),
        }
    }

    pub fn kind(&self) -> SectorKind {
        self.kind
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        let l = self.sites;
        match self.kind {
            SectorKind::SingleMagnon => l,
            SectorKind::TwoMagnon => l * (l - 1) / 2,
            SectorKind::Doublon => l - 1,
        }
    }

    /// Number of pairs whose first site is below `j`.
    fn pair_offset(&self, j: usize) -> usize {
        j * (2 * self.sites - j - 1) / 2
    }

    pub fn state(&self, index: usize) -> BasisState {
        debug_assert!(index < self.dim());
        match self.kind {
            SectorKind::SingleMagnon => BasisState::Site(index),
            SectorKind::Doublon => BasisState::Bond(index),
            SectorKind::TwoMagnon => {
                // Invert the triangular offset, then correct the float guess.
                let l = self.sites as f64;
                let disc = (2.0 * l - 1.0).powi(2) - 8.0 * index as f64;
                let mut j = ((2.0 * l - 1.0 - disc.max(0.0).sqrt()) / 2.0).floor() as usize;
                j = j.min(self.sites - 2);
                while j > 0 && self.pair_offset(j) > index {
                    j -= 1;
                }
                while j + 1 < self.sites - 1 && self.pair_offset(j + 1) <= index {
                    j += 1;
                }
                let k = index - self.pair_offset(j) + j + 1;
                BasisState::Pair(j, k)
            }
        }
    }

    pub fn index_of(&self, state: BasisState) -> Option<usize> {
        let l = self.sites;
        match (self.kind, state) {
            (SectorKind::SingleMagnon, BasisState::Site(j)) if j < l => Some(j),
            (SectorKind::Doublon, BasisState::Bond(b)) if b + 1 < l => Some(b),
            (SectorKind::TwoMagnon, BasisState::Pair(j, k)) if j < k && k < l => {
                Some(self.pair_offset(j) + k - j - 1)
            }
            _ => None,
        }
    }

    pub fn states(&self) -> impl Iterator<Item = BasisState> + '_ {
        let l = self.sites;
        let kind = self.kind;
        let flat: Box<dyn Iterator<Item = BasisState>> = match kind {
            SectorKind::SingleMagnon => Box::new((0..l).map(BasisState::Site)),
            SectorKind::Doublon => Box::new((0..l - 1).map(BasisState::Bond)),
            SectorKind::TwoMagnon => Box::new(
                (0..l).flat_map(move |j| (j + 1..l).map(move |k| BasisState::Pair(j, k))),
            ),
        };
        flat
    }

    /// Sites carrying a flipped spin in basis state `index`.
    pub fn flipped_sites(&self, index: usize) -> FlippedSites {
        match self.state(index) {
            BasisState::Site(j) => FlippedSites::One(j),
            BasisState::Pair(j, k) => FlippedSites::Two(j, k),
            BasisState::Bond(b) => FlippedSites::Two(b, b + 1),
        }
    }

    /// Index of the mirror image under `j -> L - 1 - j`.
    pub fn reflect(&self, index: usize) -> usize {
        let l = self.sites;
        let mirrored = match self.state(index) {
            BasisState::Site(j) => BasisState::Site(l - 1 - j),
            BasisState::Pair(j, k) => BasisState::Pair(l - 1 - k, l - 1 - j),
            BasisState::Bond(b) => BasisState::Bond(l - 2 - b),
        };
        self.index_of(mirrored).expect("mirror image stays in the sector")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlippedSites {
    One(usize),
    Two(usize, usize),
}

impl FlippedSites {
    pub fn mask(self) -> usize {
        match self {
            FlippedSites::One(j) => 1 << j,
            FlippedSites::Two(j, k) => (1 << j) | (1 << k),
        }
    }

    pub fn contains(self, site: usize) -> bool {
        match self {
            FlippedSites::One(j) => j == site,
            FlippedSites::Two(j, k) => j == site || k == site,
        }
    }
}

/// Hilbert space a matrix or state lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Full { sites: usize },
    Sector(SectorBasis),
}

impl Space {
    pub fn full(sites: usize) -> Result<Self> {
        if sites > MAX_FULL_SITES {
            return Err(Error::ResourceLimit(format!(
                "full-space operations are limited to L <= {MAX_FULL_SITES}, got {sites}"
            )));
        }
        if sites < 1 {
            return Err(Error::InvalidSpec("full space needs at least one site".into()));
        }
        Ok(Space::Full { sites })
    }

    pub fn sites(&self) -> usize {
        match self {
            Space::Full { sites } => *sites,
            Space::Sector(b) => b.sites(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Space::Full { sites } => 1 << sites,
            Space::Sector(b) => b.dim(),
        }
    }

    pub fn reflect(&self, index: usize) -> usize {
        match self {
            Space::Full { sites } => index.reverse_bits() >> (usize::BITS as usize - sites),
            Space::Sector(b) => b.reflect(index),
        }
    }
}

/// Dense real symmetric Hamiltonian, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMatrix {
    space: Space,
    dim: usize,
    entries: Vec<f64>,
}

impl HamiltonianMatrix {
    fn zeros(space: Space) -> Self {
        let dim = space.dim();
        Self {
            space,
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    fn add(&mut self, row: usize, col: usize, value: f64) {
        self.entries[row * self.dim + col] += value;
    }

    /// Largest `|H_ij - H_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Matrix-vector product with a complex vector.
    pub fn apply(&self, v: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
        assert_eq!(v.len(), self.dim, "vector length must match the matrix");
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(h, _)| **h != 0.0)
                    .map(|(h, x)| x * *h)
                    .sum()
            })
            .collect()
    }

    /// Restriction of a full-space matrix to a magnon sector.
    pub fn restrict(&self, basis: &SectorBasis) -> Result<HamiltonianMatrix> {
        let Space::Full { sites } = self.space else {
            return Err(Error::InvalidBasis("only full-space matrices can be restricted".into()));
        };
        if sites != basis.sites() {
            return Err(Error::InvalidBasis(format!(
                "basis has {} sites, matrix has {sites}",
                basis.sites()
            )));
        }
        let masks: Vec<usize> = (0..basis.dim())
            .map(|i| basis.flipped_sites(i).mask())
            .collect();
        let mut out = HamiltonianMatrix::zeros(Space::Sector(*basis));
        for (a, &ma) in masks.iter().enumerate() {
            for (b, &mb) in masks.iter().enumerate() {
                out.entries[a * out.dim + b] = self.get(ma, mb);
            }
        }
        Ok(out)
    }
}

fn z_of(mask: usize, site: usize) -> f64 {
    if mask >> site & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `H = -(J/4) Σ (XX + YY) - (ΔJ/4) Σ ZZ - (J'/4) Σ (X_i X_{i+2} + Y_i Y_{i+2})`
/// on the full `2^L` space with open boundaries.
pub fn build_full_hamiltonian(spec: &ChainSpec) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    let space = Space::full(spec.sites)?;
    let l = spec.sites;
    let mut h = HamiltonianMatrix::zeros(space);
    let zz = -spec.anisotropy * spec.coupling / 4.0;
    // XX + YY flips an anti-aligned pair with amplitude 2.
    let hop = -spec.coupling / 2.0;
    let hop_nnn = -spec.nnn_coupling / 2.0;
    for mask in 0..h.dim {
        let diag: f64 = (0..l - 1).map(|b| z_of(mask, b) * z_of(mask, b + 1)).sum();
        h.add(mask, mask, zz * diag);
        for (range, amp) in [(1usize, hop), (2usize, hop_nnn)] {
            if amp == 0.0 {
                continue;
            }
            for i in 0..l.saturating_sub(range) {
                let j = i + range;
                if (mask >> i & 1) != (mask >> j & 1) {
                    let other = mask ^ (1 << i) ^ (1 << j);
                    h.add(other, mask, amp);
                }
            }
        }
    }
    Ok(h)
}

/// `-(ΔJ/4) (aligned bonds - anti-aligned bonds)` for a few flipped sites.
fn zz_energy(spec: &ChainSpec, flipped: FlippedSites) -> f64 {
    let l = spec.sites;
    let sites: &[usize] = match &flipped {
        FlippedSites::One(j) => std::slice::from_ref(j),
        FlippedSites::Two(j, k) => &[*j, *k][..],
    };
    let mut anti = 0usize;
    for &s in sites {
        if s > 0 && !flipped.contains(s - 1) {
            anti += 1;
        }
        if s + 1 < l && !flipped.contains(s + 1) {
            anti += 1;
        }
    }
    let aligned = (l - 1) - anti;
    -spec.anisotropy * spec.coupling / 4.0 * (aligned as f64 - anti as f64)
}

/// Hamiltonian restricted to a conserved sector, built directly.
///
/// The doublon sector uses the effective hopping `J_eff = J / (2Δ)`; its
/// uniform field term only shifts the energy and is left out.
pub fn build_sector_hamiltonian(spec: &ChainSpec, basis: &SectorBasis) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    if basis.sites() != spec.sites {
        return Err(Error::InvalidBasis(format!(
            "basis has {} sites, spec has {}",
            basis.sites(),
            spec.sites
        )));
    }
    let mut h = HamiltonianMatrix::zeros(Space::Sector(*basis));
    let l = spec.sites;
    let hops = [(1usize, -spec.coupling / 2.0), (2usize, -spec.nnn_coupling / 2.0)];
    match basis.kind() {
        SectorKind::SingleMagnon => {
            for j in 0..l {
                h.add(j, j, zz_energy(spec, FlippedSites::One(j)));
                for &(range, amp) in &hops {
                    if amp != 0.0 && j + range < l {
                        h.add(j, j + range, amp);
                        h.add(j + range, j, amp);
                    }
                }
            }
        }
        SectorKind::TwoMagnon => {
            for a in 0..basis.dim() {
                let BasisState::Pair(j, k) = basis.state(a) else {
                    unreachable!()
                };
                h.add(a, a, zz_energy(spec, FlippedSites::Two(j, k)));
                for &(range, amp) in &hops {
                    if amp == 0.0 {
                        continue;
                    }
                    // Move each magnon left or right; the target must be empty.
                    for (moving, other) in [(j, k), (k, j)] {
                        for target in [moving.checked_sub(range), Some(moving + range)]
                            .into_iter()
                            .flatten()
                        {
                            if target >= l || target == other {
                                continue;
                            }
                            let pair = BasisState::Pair(target.min(other), target.max(other));
                            let b = basis.index_of(pair).expect("pair in sector");
                            h.add(b, a, amp);
                        }
                    }
                }
            }
        }
        SectorKind::Doublon => {
            let params = doublon_params(spec.coupling, spec.anisotropy)?;
            let amp = -params.j_eff / 2.0;
            for b in 0..l - 2 {
                h.add(b, b + 1, amp);
                h.add(b + 1, b, amp);
            }
        }
    }
    Ok(h)
}

/// Doublon-sector Hamiltonian including the uniform effective field.
///
/// With one doublon on `L - 1` bonds, `h_eff Σ Z^(D)` equals
/// `h_eff (L - 3)` on every basis state.
pub fn build_doublon_hamiltonian_with_field(spec: &ChainSpec) -> Result<HamiltonianMatrix> {
    let basis = SectorBasis::doublon(spec.sites)?;
    let mut h = build_sector_hamiltonian(spec, &basis)?;
    let params = doublon_params(spec.coupling, spec.anisotropy)?;
    let shift = params.h_eff * (basis.dim() as f64 - 2.0);
    for b in 0..basis.dim() {
        h.add(b, b, shift);
    }
    Ok(h)
}

/// Localized initial state: one flip at the center, two flips on
/// `(L/2 - 1, L/2)`, or a doublon on the bond between them.
pub fn initial_state(spec: &ChainSpec, space: Space) -> Result<WalkState> {
    spec.validate()?;
    if space.sites() != spec.sites {
        return Err(Error::InvalidBasis(format!(
            "space has {} sites, spec has {}",
            space.sites(),
            spec.sites
        )));
    }
    let c = spec.center();
    let index = match space {
        Space::Full { .. } => match spec.particles {
            1 => 1usize << c,
            _ => (1usize << (c - 1)) | (1usize << c),
        },
        Space::Sector(basis) => {
            let label = match basis.kind() {
                SectorKind::SingleMagnon => BasisState::Site(c),
                SectorKind::TwoMagnon => BasisState::Pair(c - 1, c),
                SectorKind::Doublon => BasisState::Bond(c - 1),
            };
            basis.index_of(label).expect("center lies inside the chain")
        }
    };
    Ok(WalkState::basis_vector(space, index))
}
