//! Joint atomic ⊗ Fock states with sparse, truncation-free amplitude maps.
//!
//! A basis vector is `|s, m⟩` with `s` a string over `{e, g}` (one letter per
//! atom, leftmost = atom 1) and `m` a photon number. States are finite
//! superpositions stored as ordered maps, so no Fock-space cutoff exists
//! anywhere: dynamics confined to an excitation sector stays exactly there.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Float};

/// One joint basis vector `|atoms, photons⟩`.
///
/// `e` is the upper level (first component of the 2×2 atomic blocks), `g` the
/// lower. Ordering is lexicographic on `(atoms, photons)`, which sorts the
/// atomic part with `e` before `g`, i.e. `"ee…e"` first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    atoms: String,
    photons: u32,
}

impl BasisLabel {
    /// Build a label, rejecting letters outside `{e, g}`.
    pub fn new(atoms: &str, photons: u32) -> Result<Self> {
        for c in atoms.chars() {
            if c != 'e' && c != 'g' {
                return Err(Error::InvalidAtomLetter(c));
            }
        }
        Ok(Self {
            atoms: atoms.to_owned(),
            photons,
        })
    }

    pub fn atoms(&self) -> &str {
        &self.atoms
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Number of excited atoms.
    pub fn excited_atoms(&self) -> u32 {
        self.atoms.chars().filter(|&c| c == 'e').count() as u32
    }

    /// Total excitation: excited atoms plus photons. Conserved by the
    /// coupling `S₊⊗a + S₋⊗a†`.
    pub fn excitation(&self) -> u32 {
        self.excited_atoms() + self.photons
    }

    /// Index of the atomic string in the lexicographic basis (`"ee…e"` = 0).
    pub fn atom_index(&self) -> usize {
        self.atoms
            .chars()
            .fold(0, |acc, c| (acc << 1) | usize::from(c == 'g'))
    }

    /// Same atomic string, different photon number.
    pub fn with_photons(&self, photons: u32) -> Self {
        Self {
            atoms: self.atoms.clone(),
            photons,
        }
    }
}

/// On-disk form of one amplitude, shared between the library and the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateRecord {
    pub atoms: String,
    pub photons: u32,
    pub re: f64,
    pub im: f64,
}

/// A finite superposition of joint basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState<T: Float> {
    n_atoms: usize,
    amps: BTreeMap<BasisLabel, Complex<T>>,
}

impl<T: Float> JointState<T> {
    /// The zero state on `n_atoms` atoms.
    pub fn zero(n_atoms: usize) -> Self {
        Self {
            n_atoms,
            amps: BTreeMap::new(),
        }
    }

    /// A single basis vector with unit amplitude.
    pub fn basis(label: BasisLabel) -> Self {
        let mut s = Self::zero(label.n_atoms());
        s.amps.insert(label, Complex::new(T::one(), T::zero()));
        s
    }

    /// Convenience constructor from `(atoms, photons)`.
    pub fn basis_from(atoms: &str, photons: u32) -> Result<Self> {
        Ok(Self::basis(BasisLabel::new(atoms, photons)?))
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Number of stored components.
    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    /// Amplitude on a label (zero when absent).
    pub fn amplitude(&self, label: &BasisLabel) -> Complex<T> {
        self.amps
            .get(label)
            .copied()
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    /// Iterate components in label order.
    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &Complex<T>)> {
        self.amps.iter()
    }

    /// Add `amp` onto the stored amplitude of `label`.
    ///
    /// Exact zeros are never inserted (adding 0 is a no-op), but small
    /// nonzero results of arithmetic are always retained: pruning is a
    /// display concern, not a state concern.
    pub fn add_amplitude(&mut self, label: BasisLabel, amp: Complex<T>) -> Result<()> {
        if label.n_atoms() != self.n_atoms {
            return Err(Error::AtomCountMismatch {
                expected: self.n_atoms,
                found: label.n_atoms(),
            });
        }
        if amp.re == T::zero() && amp.im == T::zero() && !self.amps.contains_key(&label) {
            return Ok(());
        }
        *self
            .amps
            .entry(label)
            .or_insert_with(|| Complex::new(T::zero(), T::zero())) += amp;
        Ok(())
    }

    /// Apply a pure ladder monomial: `a^k` for `k < 0`, `(a†)^k` for `k > 0`,
    /// identity for `k = 0`. The atomic part is untouched; components
    /// annihilated below the vacuum are dropped, not an error.
    pub fn apply_ladder(&self, power: i32) -> Self {
        assert!(
            power.abs() <= 3,
            "ladder monomials up to cubic are supported"
        );
        let mut out = Self::zero(self.n_atoms);
        for (label, amp) in &self.amps {
            if let Some((factor, photons)) = ladder_factor::<T>(label.photons(), power) {
                let scaled = *amp * factor;
                out.add_amplitude(label.with_photons(photons), scaled)
                    .expect("same atom count");
            }
        }
        out
    }

    /// Sesquilinear inner product `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.n_atoms != other.n_atoms {
            return Err(Error::AtomCountMismatch {
                expected: self.n_atoms,
                found: other.n_atoms,
            });
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for (label, amp) in &self.amps {
            if let Some(b) = other.amps.get(label) {
                acc += amp.conj() * *b;
            }
        }
        Ok(acc)
    }

    /// Squared norm Σ |amplitude|².
    pub fn norm_sqr(&self) -> T {
        self.amps
            .values()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn norm(&self) -> T {
        scalar::sqrt(self.norm_sqr())
    }

    /// Multiply every amplitude by a complex factor.
    pub fn scaled(&self, factor: Complex<T>) -> Self {
        let amps = self
            .amps
            .iter()
            .map(|(l, a)| (l.clone(), *a * factor))
            .collect();
        Self {
            n_atoms: self.n_atoms,
            amps,
        }
    }

    /// Componentwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (label, amp) in &other.amps {
            out.add_amplitude(label.clone(), *amp)?;
        }
        Ok(out)
    }

    /// Multiply each component by `phase(label)` (used for diagonal
    /// operators such as the free-Hamiltonian phase layer).
    pub fn map_phases(&self, mut phase: impl FnMut(&BasisLabel) -> Complex<T>) -> Self {
        let amps = self
            .amps
            .iter()
            .map(|(l, a)| (l.clone(), *a * phase(l)))
            .collect();
        Self {
            n_atoms: self.n_atoms,
            amps,
        }
    }

    /// Max-norm distance between two states over the union of supports.
    pub fn max_deviation(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for (label, amp) in &self.amps {
            let d = (*amp - other.amplitude(label)).norm();
            if d > worst {
                worst = d;
            }
        }
        for (label, amp) in &other.amps {
            if !self.amps.contains_key(label) {
                let d = amp.norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Population of the excited level of `atom` (0-based, leftmost = 0).
    pub fn p_excited(&self, atom: usize) -> T {
        assert!(atom < self.n_atoms);
        self.amps
            .iter()
            .filter(|(l, _)| l.atoms().as_bytes()[atom] == b'e')
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
    }

    /// Mean photon number Σ m |amplitude|².
    pub fn mean_photons(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, (l, a)| {
            acc + scalar::int::<T>(i64::from(l.photons())) * a.norm_sqr()
        })
    }

    /// Serialize to the shared JSON record form, in label order.
    pub fn to_records(&self) -> Vec<StateRecord> {
        self.amps
            .iter()
            .map(|(l, a)| StateRecord {
                atoms: l.atoms().to_owned(),
                photons: l.photons(),
                re: a.re.to_f64().unwrap_or(f64::NAN),
                im: a.im.to_f64().unwrap_or(f64::NAN),
            })
            .collect()
    }

    /// Rebuild a state from records, enforcing the expected atom count.
    /// Amplitudes on repeated labels accumulate.
    pub fn from_records(n_atoms: usize, records: &[StateRecord]) -> Result<Self> {
        let mut out = Self::zero(n_atoms);
        for r in records {
            let label = BasisLabel::new(&r.atoms, r.photons)?;
            if label.n_atoms() != n_atoms {
                return Err(Error::AtomCountMismatch {
                    expected: n_atoms,
                    found: label.n_atoms(),
                });
            }
            out.add_amplitude(label, Complex::new(scalar::lit(r.re), scalar::lit(r.im)))?;
        }
        Ok(out)
    }
}

/// Ladder factor for `a^|k|` or `(a†)^k` on `|m⟩`: the square-root prefactor
/// and the new photon number; `None` when annihilated below the vacuum.
pub(crate) fn ladder_factor<T: Float>(m: u32, power: i32) -> Option<(T, u32)> {
    match power.cmp(&0) {
        std::cmp::Ordering::Equal => Some((T::one(), m)),
        std::cmp::Ordering::Greater => {
            let k = power as u32;
            let mut prod = 1u64;
            for j in 1..=k {
                prod *= u64::from(m + j);
            }
            Some((scalar::sqrt(scalar::int::<T>(prod as i64)), m + k))
        }
        std::cmp::Ordering::Less => {
            let k = (-power) as u32;
            if m < k {
                return None;
            }
            let mut prod = 1u64;
            for j in 0..k {
                prod *= u64::from(m - j);
            }
            Some((scalar::sqrt(scalar::int::<T>(prod as i64)), m - k))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type S = JointState<f64>;

    fn label(atoms: &str, photons: u32) -> BasisLabel {
        BasisLabel::new(atoms, photons).unwrap()
    }

    #[test]
    fn label_validation_and_ordering() {
        assert!(BasisLabel::new("ex", 0).is_err());
        assert!(label("ee", 0) < label("eg", 0));
        assert!(label("eg", 0) < label("eg", 1));
        assert_eq!(label("eee", 0).atom_index(), 0);
        assert_eq!(label("ggg", 0).atom_index(), 7);
        assert_eq!(label("geg", 0).atom_index(), 5);
    }

    #[test]
    fn excitation_counts() {
        assert_eq!(label("gg", 0).excitation(), 0);
        assert_eq!(label("eg", 1).excitation(), 2);
        assert_eq!(label("eee", 5).excitation(), 8);
    }

    #[test]
    fn ladder_raises_vacuum() {
        let s = S::basis_from("g", 0).unwrap().apply_ladder(1);
        assert_eq!(s.support_len(), 1);
        assert_abs_diff_eq!(s.amplitude(&label("g", 1)).re, 1.0);
    }

    #[test]
    fn ladder_annihilates_vacuum() {
        let s = S::basis_from("g", 0).unwrap().apply_ladder(-1);
        assert_eq!(s.support_len(), 0);
    }

    #[test]
    fn ladder_double_lowering() {
        // a² |g,3⟩ = √(3·2) |g,1⟩
        let s = S::basis_from("g", 3).unwrap().apply_ladder(-2);
        assert_eq!(s.support_len(), 1);
        assert_abs_diff_eq!(
            s.amplitude(&label("g", 1)).re,
            6.0_f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn inner_product_examples() {
        let g0 = S::basis_from("g", 0).unwrap();
        let e0 = S::basis_from("e", 0).unwrap();
        let g1 = S::basis_from("g", 1).unwrap();
        assert_abs_diff_eq!(g0.inner(&g0).unwrap().re, 1.0);
        assert_abs_diff_eq!(g0.inner(&e0).unwrap().norm(), 0.0);
        let w = 0.5_f64.sqrt();
        let sup = e0.scaled(w.into()).add(&g1.scaled(w.into())).unwrap();
        assert_abs_diff_eq!(sup.inner(&g1).unwrap().re, w, epsilon = 1e-15);
    }

    #[test]
    fn inner_rejects_mismatched_atom_counts() {
        let one = S::basis_from("g", 0).unwrap();
        let two = S::basis_from("gg", 0).unwrap();
        assert!(matches!(
            one.inner(&two),
            Err(Error::AtomCountMismatch { .. })
        ));
    }

    #[test]
    fn record_round_trip() {
        let mut s = S::zero(2);
        s.add_amplitude(label("eg", 1), num_complex::Complex::new(0.5, -0.5))
            .unwrap();
        s.add_amplitude(label("gg", 2), num_complex::Complex::new(0.25, 0.0))
            .unwrap();
        let back = S::from_records(2, &s.to_records()).unwrap();
        assert_eq!(s, back);
        assert!(S::from_records(1, &s.to_records()).is_err());
    }

    #[test]
    fn observables() {
        let w = 0.5_f64.sqrt();
        let s = S::basis_from("eg", 0)
            .unwrap()
            .scaled(w.into())
            .add(&S::basis_from("gg", 1).unwrap().scaled(w.into()))
            .unwrap();
        assert_abs_diff_eq!(s.p_excited(0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.p_excited(1), 0.0);
        assert_abs_diff_eq!(s.mean_photons(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
    }
}
