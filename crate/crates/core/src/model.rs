//! Model parameters, collective spin operators, the coupling `A`, and the
//! Hamiltonian restricted to excitation sectors.
//!
//! The Hamiltonian is `H = ω·1⊗a†a + Δ·S₃⊗1 + g(S₊⊗a + S₋⊗a†)` with ħ = 1.
//! It commutes with the total excitation `S₃⊗1 + 1⊗a†a` (shifted to count
//! excited atoms plus photons), so it is never materialized on a truncated
//! Fock space: each sector is at most 2ⁿ-dimensional and exact.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{self, Float};
use crate::state::{BasisLabel, JointState};

/// Physical constants of the n-atom model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T: Float> {
    n_atoms: usize,
    omega: T,
    delta: T,
    g: T,
}

impl<T: Float> ModelParams<T> {
    /// `omega`: field frequency; `delta`: two-level splitting; `g`: coupling.
    pub fn new(n_atoms: usize, omega: T, delta: T, g: T) -> Result<Self> {
        if !(1..=3).contains(&n_atoms) {
            return Err(Error::UnsupportedAtomCount(n_atoms));
        }
        for (name, value) in [("omega", omega), ("delta", delta), ("g", g)] {
            if !num_traits::Float::is_finite(value) {
                return Err(Error::NonFiniteParameter {
                    name,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self {
            n_atoms,
            omega,
            delta,
            g,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn g(&self) -> T {
        self.g
    }

    /// Resonance condition Δ = ω, as exact equality of the stored values.
    /// The closed-form evolution is only valid on resonance.
    pub fn resonant(&self) -> bool {
        self.delta == self.omega
    }
}

/// All atomic strings of length `n` in basis order (lexicographic, `e < g`,
/// so index 0 is `"ee…e"`).
pub fn atom_strings(n: usize) -> Vec<String> {
    (0..1usize << n)
        .map(|idx| {
            (0..n)
                .map(|k| {
                    if idx >> (n - 1 - k) & 1 == 0 {
                        'e'
                    } else {
                        'g'
                    }
                })
                .collect()
        })
        .collect()
}

/// The ordered basis of one excitation-number eigenspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sector {
    excitation: u32,
    basis: Vec<BasisLabel>,
}

impl Sector {
    pub fn excitation(&self) -> u32 {
        self.excitation
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }

    /// Position of a label in the sector basis.
    pub fn index_of(&self, label: &BasisLabel) -> Option<usize> {
        self.basis.iter().position(|b| b == label)
    }
}

/// Basis of the excitation-`k` sector: atomic index ascending, photons fixed
/// to `k − #excited`, omitting strings that would need negative photons.
pub fn sector_basis(n: usize, k: u32) -> Result<Sector> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedAtomCount(n));
    }
    let mut basis = Vec::new();
    for atoms in atom_strings(n) {
        let excited = atoms.chars().filter(|&c| c == 'e').count() as u32;
        if excited <= k {
            basis.push(BasisLabel::new(&atoms, k - excited)?);
        }
    }
    Ok(Sector {
        excitation: k,
        basis,
    })
}

/// The triple `(S₊, S₋, S₃)` of collective spin matrices.
pub type CollectiveMatrices<T> = (
    DMatrix<Complex<T>>,
    DMatrix<Complex<T>>,
    DMatrix<Complex<T>>,
);

/// Collective spin matrices `(S₊, S₋, S₃)` on the 2ⁿ atomic space.
///
/// Entries are integers and halves, so the su(2) commutation relations hold
/// exactly in floating point.
pub fn collective_matrices<T: Float>(n: usize) -> Result<CollectiveMatrices<T>> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedAtomCount(n));
    }
    let dim = 1 << n;
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let half = Complex::new(T::one() / scalar::int(2), T::zero());
    let mut s_plus = DMatrix::from_element(dim, dim, zero);
    let mut s3 = DMatrix::from_element(dim, dim, zero);
    let strings = atom_strings(n);
    for (col, atoms) in strings.iter().enumerate() {
        let excited = atoms.chars().filter(|&c| c == 'e').count() as i64;
        s3[(col, col)] = half * scalar::int::<T>(2 * excited - n as i64);
        for (pos, c) in atoms.chars().enumerate() {
            if c == 'g' {
                let mut raised: Vec<char> = atoms.chars().collect();
                raised[pos] = 'e';
                let raised: String = raised.into_iter().collect();
                let row = strings.iter().position(|s| *s == raised).unwrap();
                s_plus[(row, col)] += one;
            }
        }
    }
    let s_minus = s_plus.transpose();
    Ok((s_plus, s_minus, s3))
}

/// Apply the coupling `A = S₊⊗a + S₋⊗a†` to a state. Every output component
/// keeps the excitation of the component it came from.
pub fn apply_coupling<T: Float>(state: &JointState<T>) -> JointState<T> {
    let mut out = JointState::zero(state.n_atoms());
    for (label, amp) in state.iter() {
        let m = label.photons();
        let atoms: Vec<char> = label.atoms().chars().collect();
        for pos in 0..atoms.len() {
            let mut flipped = atoms.clone();
            if atoms[pos] == 'g' {
                // S₊⊗a: raise the atom, absorb a photon
                if m == 0 {
                    continue;
                }
                flipped[pos] = 'e';
                let factor = scalar::sqrt(scalar::int::<T>(i64::from(m)));
                let target = BasisLabel::new(&flipped.iter().collect::<String>(), m - 1)
                    .expect("letters stay in {e,g}");
                out.add_amplitude(target, *amp * factor).expect("same n");
            } else {
                // S₋⊗a†: lower the atom, emit a photon
                flipped[pos] = 'g';
                let factor = scalar::sqrt(scalar::int::<T>(i64::from(m) + 1));
                let target = BasisLabel::new(&flipped.iter().collect::<String>(), m + 1)
                    .expect("letters stay in {e,g}");
                out.add_amplitude(target, *amp * factor).expect("same n");
            }
        }
    }
    out
}

/// Diagonal (free) part of the Hamiltonian on one basis label:
/// `ω·m + Δ·(#excited − n/2)`.
pub fn free_energy<T: Float>(params: &ModelParams<T>, label: &BasisLabel) -> T {
    let two = scalar::int::<T>(2);
    params.omega * scalar::int::<T>(i64::from(label.photons()))
        + params.delta
            * (scalar::int::<T>(2 * i64::from(label.excited_atoms()) - params.n_atoms() as i64)
                / two)
}

/// Matrix of the full Hamiltonian over a sector basis. Entries are real and
/// the matrix is exactly symmetric by construction.
pub fn hamiltonian_on_sector<T: Float>(
    params: &ModelParams<T>,
    sector: &Sector,
) -> Result<DMatrix<Complex<T>>> {
    let dim = sector.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let mut h = DMatrix::from_element(dim, dim, zero);
    for (col, label) in sector.basis().iter().enumerate() {
        if label.n_atoms() != params.n_atoms() {
            return Err(Error::AtomCountMismatch {
                expected: params.n_atoms(),
                found: label.n_atoms(),
            });
        }
        h[(col, col)] = Complex::new(free_energy(params, label), T::zero());
        let coupled = apply_coupling(&JointState::<T>::basis(label.clone()));
        for (target, amp) in coupled.iter() {
            let row = sector
                .index_of(target)
                .expect("coupling conserves excitation");
            h[(row, col)] += *amp * params.g();
        }
    }
    Ok(h)
}

/// Matrix of the bare coupling `A` over a sector basis (no ω, Δ, g).
pub fn coupling_on_sector<T: Float>(n: usize, sector: &Sector) -> Result<DMatrix<Complex<T>>> {
    let params = ModelParams::new(n, T::zero(), T::zero(), T::one())?;
    hamiltonian_on_sector(&params, sector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn max_abs(m: &DMatrix<Complex<f64>>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(4, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2, f64::NAN, 1.0, 1.0).is_err());
        let p = ModelParams::new(2, 1.5, 1.5, 0.3).unwrap();
        assert!(p.resonant());
        assert!(!ModelParams::new(2, 1.5, 1.4, 0.3).unwrap().resonant());
    }

    #[test]
    fn single_atom_matrices_are_pauli() {
        let (sp, sm, s3) = collective_matrices::<f64>(1).unwrap();
        assert_eq!(sp[(0, 1)].re, 1.0);
        assert_eq!(sp[(0, 0)].re, 0.0);
        assert_eq!(sm[(1, 0)].re, 1.0);
        assert_eq!(s3[(0, 0)].re, 0.5);
        assert_eq!(s3[(1, 1)].re, -0.5);
    }

    #[test]
    fn two_atom_s3_diagonal() {
        let (_, _, s3) = collective_matrices::<f64>(2).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| s3[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn su2_relations_exact() {
        for n in 1..=3 {
            let (sp, sm, s3) = collective_matrices::<f64>(n).unwrap();
            let c1 = &s3 * &sp - &sp * &s3 - &sp;
            let c2 = &s3 * &sm - &sm * &s3 + &sm;
            let c3 = &sp * &sm - &sm * &sp - &s3 * Complex::from(2.0);
            assert_eq!(max_abs(&c1), 0.0);
            assert_eq!(max_abs(&c2), 0.0);
            assert_eq!(max_abs(&c3), 0.0);
        }
    }

    #[test]
    fn coupling_kills_ground_vacuum() {
        for n in 1..=3 {
            let ground = "g".repeat(n);
            let s = JointState::<f64>::basis_from(&ground, 0).unwrap();
            assert_eq!(apply_coupling(&s).support_len(), 0);
        }
    }

    #[test]
    fn coupling_single_atom() {
        let s = JointState::<f64>::basis_from("e", 0).unwrap();
        let out = apply_coupling(&s);
        assert_eq!(out.support_len(), 1);
        let target = BasisLabel::new("g", 1).unwrap();
        assert_abs_diff_eq!(out.amplitude(&target).re, 1.0);
    }

    #[test]
    fn coupling_two_atoms() {
        let s = JointState::<f64>::basis_from("ee", 0).unwrap();
        let out = apply_coupling(&s);
        assert_eq!(out.support_len(), 2);
        for atoms in ["eg", "ge"] {
            let t = BasisLabel::new(atoms, 1).unwrap();
            assert_abs_diff_eq!(out.amplitude(&t).re, 1.0);
        }
    }

    #[test]
    fn coupling_conserves_excitation() {
        let s = JointState::<f64>::basis_from("egg", 4).unwrap();
        let out = apply_coupling(&s);
        for (label, _) in out.iter() {
            assert_eq!(label.excitation(), 5);
        }
    }

    #[test]
    fn sector_enumeration() {
        let s = sector_basis(1, 0).unwrap();
        assert_eq!(s.basis(), &[BasisLabel::new("g", 0).unwrap()]);

        let s = sector_basis(1, 1).unwrap();
        assert_eq!(
            s.basis(),
            &[
                BasisLabel::new("e", 0).unwrap(),
                BasisLabel::new("g", 1).unwrap()
            ]
        );

        let s = sector_basis(3, 1).unwrap();
        let expect: Vec<BasisLabel> = [("egg", 0), ("geg", 0), ("gge", 0), ("ggg", 1)]
            .iter()
            .map(|(a, m)| BasisLabel::new(a, *m).unwrap())
            .collect();
        assert_eq!(s.basis(), expect.as_slice());

        // n=3: every sector with K ≥ 3 is exactly 8-dimensional
        for k in 3..=12 {
            assert_eq!(sector_basis(3, k).unwrap().dim(), 8);
        }
    }

    #[test]
    fn one_atom_resonant_block() {
        let p = ModelParams::new(1, 2.0, 2.0, 0.7).unwrap();
        let sector = sector_basis(1, 1).unwrap();
        let h = hamiltonian_on_sector(&p, &sector).unwrap();
        assert_abs_diff_eq!(h[(0, 0)].re, 1.0); // ω/2
        assert_abs_diff_eq!(h[(1, 1)].re, 1.0);
        assert_abs_diff_eq!(h[(0, 1)].re, 0.7);
        assert_abs_diff_eq!(h[(1, 0)].re, 0.7);
    }

    #[test]
    fn ground_sector_energy() {
        let p = ModelParams::new(1, 1.0, 0.8, 0.3).unwrap();
        let sector = sector_basis(1, 0).unwrap();
        let h = hamiltonian_on_sector(&p, &sector).unwrap();
        assert_eq!(sector.dim(), 1);
        assert_abs_diff_eq!(h[(0, 0)].re, -0.4); // −Δ/2
    }

    #[test]
    fn three_atom_sector_hermitian_with_real_spectrum() {
        let p = ModelParams::new(3, 1.0, 1.0, 1.0).unwrap();
        let sector = sector_basis(3, 2).unwrap();
        assert_eq!(sector.dim(), 7);
        let h = hamiltonian_on_sector(&p, &sector).unwrap();
        assert_eq!(max_abs(&(h.clone() - h.adjoint())), 0.0);
        // Spectrum: ω(K − n/2) + g·{0, ±1, ±1, ±√10} on this sector.
        let mut eig = h.symmetric_eigen().eigenvalues.as_slice().to_vec();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let r10 = 10.0_f64.sqrt();
        let expect = [-r10, -1.0, -1.0, 0.0, 1.0, 1.0, r10].map(|x| 0.5 + x);
        for (got, want) in eig.iter().zip(expect) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn no_matrix_elements_between_sectors() {
        // H = diagonal + g·A; the diagonal is sector-local by construction,
        // so it suffices that A applied to sector states stays in the sector.
        for k in 0..=5u32 {
            let sector = sector_basis(3, k).unwrap();
            for label in sector.basis() {
                let s = JointState::<f64>::basis(label.clone());
                for (out, _) in apply_coupling(&s).iter() {
                    assert_eq!(out.excitation(), k);
                }
            }
        }
    }

    #[test]
    fn dense_coupling_matches_printed_grids() {
        // The 4×4 and 8×8 coupling grids, transcribed entrywise as
        // (row, col, +1 for a†, −1 for a), realized on sectors and compared
        // against the operator built from collective matrices.
        type Grid = Vec<(usize, usize, i32)>;
        let grids: [(usize, Grid); 2] = [
            (
                2,
                vec![
                    (0, 1, -1),
                    (0, 2, -1),
                    (1, 0, 1),
                    (1, 3, -1),
                    (2, 0, 1),
                    (2, 3, -1),
                    (3, 1, 1),
                    (3, 2, 1),
                ],
            ),
            (
                3,
                vec![
                    (0, 1, -1),
                    (0, 2, -1),
                    (0, 4, -1),
                    (1, 0, 1),
                    (1, 3, -1),
                    (1, 5, -1),
                    (2, 0, 1),
                    (2, 3, -1),
                    (2, 6, -1),
                    (3, 1, 1),
                    (3, 2, 1),
                    (3, 7, -1),
                    (4, 0, 1),
                    (4, 5, -1),
                    (4, 6, -1),
                    (5, 1, 1),
                    (5, 4, 1),
                    (5, 7, -1),
                    (6, 2, 1),
                    (6, 4, 1),
                    (6, 7, -1),
                    (7, 3, 1),
                    (7, 5, 1),
                    (7, 6, 1),
                ],
            ),
        ];
        for (n, entries) in grids {
            for k in 0..=8u32 {
                let sector = sector_basis(n, k).unwrap();
                let got = coupling_on_sector::<f64>(n, &sector).unwrap();
                let mut want =
                    DMatrix::from_element(sector.dim(), sector.dim(), Complex::from(0.0));
                for &(i, j, ladder) in &entries {
                    let (Some(row), Some(col)) = (
                        sector.basis().iter().position(|b| b.atom_index() == i),
                        sector.basis().iter().position(|b| b.atom_index() == j),
                    ) else {
                        continue;
                    };
                    let m = sector.basis()[col].photons();
                    let amp = if ladder > 0 {
                        (f64::from(m) + 1.0).sqrt()
                    } else if m == 0 {
                        continue;
                    } else {
                        f64::from(m).sqrt()
                    };
                    want[(row, col)] = Complex::from(amp);
                }
                assert_eq!(max_abs(&(got - want)), 0.0, "n={n} K={k}");
            }
        }
    }
}
