//! Independent ground truth: exact sector evolution by Hermitian
//! eigendecomposition (any detuning), plus the residual reports the
//! acceptance tests are built on.
//!
//! Nothing here shares a code path with the closed forms: sector matrices
//! come from the model Hamiltonian and the exponential from a spectral
//! decomposition, so agreement between the two routes is evidence, not
//! tautology.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::Serialize;

use crate::closedform::{evolve_closed_with, exp_a, reduction_matrix};
use crate::error::{Error, Result};
use crate::model::{
    atom_strings, collective_matrices, coupling_on_sector, hamiltonian_on_sector, sector_basis,
    ModelParams, Sector,
};
use crate::scalar::{self, Float};
use crate::state::JointState;

/// Largest matrix the dense spectral path accepts. Sectors of this model are
/// at most 8-dimensional; the slack is for external callers.
pub const MAX_DIM: usize = 64;

/// Hermiticity acceptance in units of machine epsilon (≈1e−13 for f64).
fn hermiticity_tol<T: Float>() -> T {
    <T as num_traits::Float>::epsilon() * scalar::lit::<T>(450.0)
}

/// `e^{−itH}` for Hermitian `H` via real-spectrum eigendecomposition.
///
/// The input is symmetrized before decomposition; asymmetry beyond tolerance
/// (scaled by the largest entry) is rejected.
pub fn exp_hermitian<T: Float>(h: &DMatrix<Complex<T>>, t: T) -> Result<DMatrix<Complex<T>>> {
    let dim = h.nrows();
    if dim != h.ncols() {
        // a non-square matrix is maximally non-Hermitian
        return Err(Error::NotHermitian {
            deviation: f64::INFINITY,
        });
    }
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge(dim));
    }
    let scale = h
        .iter()
        .map(|z| z.norm())
        .fold(T::one(), |a, b| if b > a { b } else { a });
    let asym = (h - h.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(T::zero(), |a, b| if b > a { b } else { a });
    if asym > hermiticity_tol::<T>() * scale {
        return Err(Error::NotHermitian {
            deviation: asym.to_f64().unwrap_or(f64::NAN),
        });
    }
    let half = Complex::new(scalar::lit::<T>(0.5), T::zero());
    let sym = (h + h.adjoint()) * half;
    let eig = sym.symmetric_eigen();
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|lam| scalar::cis(-(t * lam))));
    Ok(&eig.eigenvectors * phases * eig.eigenvectors.adjoint())
}

/// The exact evolution operator on one excitation sector.
#[derive(Clone, Debug)]
pub struct SectorUnitary<T: Float> {
    pub sector: Sector,
    pub matrix: DMatrix<Complex<T>>,
    pub t: T,
    pub params: ModelParams<T>,
}

/// Build `e^{−itH}` restricted to the excitation-`k` sector.
pub fn sector_unitary<T: Float>(params: &ModelParams<T>, t: T, k: u32) -> Result<SectorUnitary<T>> {
    let sector = sector_basis(params.n_atoms(), k)?;
    let h = hamiltonian_on_sector(params, &sector)?;
    let matrix = exp_hermitian(&h, t)?;
    Ok(SectorUnitary {
        sector,
        matrix,
        t,
        params: *params,
    })
}

/// Evolve a state for any parameters (resonance not required): decompose the
/// finite support into sectors, evolve each exactly, reassemble.
pub fn evolve_oracle<T: Float>(
    params: &ModelParams<T>,
    t: T,
    state: &JointState<T>,
) -> Result<JointState<T>> {
    if state.n_atoms() != params.n_atoms() {
        return Err(Error::AtomCountMismatch {
            expected: params.n_atoms(),
            found: state.n_atoms(),
        });
    }
    if t == T::zero() {
        // e^{0} = I exactly; match the closed form's bit-exact t = 0 path.
        return Ok(state.clone());
    }
    let mut excitations: Vec<u32> = state.iter().map(|(l, _)| l.excitation()).collect();
    excitations.sort_unstable();
    excitations.dedup();
    let mut out = JointState::zero(params.n_atoms());
    for k in excitations {
        let su = sector_unitary(params, t, k)?;
        let dim = su.sector.dim();
        let zero = Complex::new(T::zero(), T::zero());
        let mut coeffs = vec![zero; dim];
        for (idx, label) in su.sector.basis().iter().enumerate() {
            coeffs[idx] = state.amplitude(label);
        }
        for (row, label) in su.sector.basis().iter().enumerate() {
            let mut acc = zero;
            for (col, c) in coeffs.iter().enumerate() {
                acc += su.matrix[(row, col)] * *c;
            }
            out.add_amplitude(label.clone(), acc)?;
        }
    }
    Ok(out)
}

/// Sector matrix of the closed-form evolution, extracted column by column
/// through the public application path.
pub fn closed_sector_matrix<T: Float>(
    params: &ModelParams<T>,
    t: T,
    k: u32,
) -> Result<DMatrix<Complex<T>>> {
    if !params.resonant() {
        return Err(Error::NotResonant);
    }
    let sector = sector_basis(params.n_atoms(), k)?;
    let dim = sector.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = DMatrix::from_element(dim, dim, zero);
    let u = exp_a::<T>(params.n_atoms(), t * params.g())?;
    for (col, label) in sector.basis().iter().enumerate() {
        let evolved = evolve_closed_with(&u, params, t, &JointState::basis(label.clone()))?;
        for (row, target) in sector.basis().iter().enumerate() {
            out[(row, col)] = evolved.amplitude(target);
        }
    }
    Ok(out)
}

/// Max entrywise deviation between the closed-form and spectral sector
/// unitaries. Requires resonance (the closed form does).
pub fn compare_closed_oracle<T: Float>(params: &ModelParams<T>, t: T, k: u32) -> Result<T> {
    let closed = closed_sector_matrix(params, t, k)?;
    let oracle = sector_unitary(params, t, k)?.matrix;
    Ok(max_abs(&(closed - oracle)))
}

fn max_abs<T: Float>(m: &DMatrix<Complex<T>>) -> T {
    m.iter()
        .map(|z| z.norm())
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

fn max_abs_real<T: Float>(m: &DMatrix<T>) -> T {
    m.iter()
        .map(|&x| scalar::abs(x))
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// One residual record of the identity report.
#[derive(Clone, Debug)]
pub struct IdentityCheck<T: Float> {
    pub check: &'static str,
    pub n_atoms: usize,
    pub sector: Option<u32>,
    pub residual: T,
}

/// Serializable form of [`IdentityCheck`] (`{check, n, K, residual}`).
#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: Option<u32>,
    pub residual: f64,
}

/// Residuals of the operator identities behind the closed forms for `n`
/// atoms, each a max-norm number (over sectors K ≤ 12 where
/// sector-dependent).
#[derive(Clone, Debug, Default)]
pub struct IdentityReport<T: Float> {
    pub checks: Vec<IdentityCheck<T>>,
}

impl<T: Float> IdentityReport<T> {
    pub fn max_residual(&self) -> T {
        self.checks
            .iter()
            .map(|c| c.residual)
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn to_records(&self) -> Vec<CheckRecord> {
        self.checks
            .iter()
            .map(|c| CheckRecord {
                check: c.check.to_owned(),
                n: c.n_atoms,
                k: c.sector,
                residual: c.residual.to_f64().unwrap_or(f64::NAN),
            })
            .collect()
    }
}

/// Reduced coupling `J₊⊗a + J₋⊗a†` realized on the excitation-`k` sector,
/// given the superdiagonal of `J₊` and the excitation of each reduced row.
fn reduced_coupling_sector<T: Float>(superdiag: &[T], excitations: &[u32], k: u32) -> DMatrix<T> {
    let rows: Vec<(usize, u32)> = excitations
        .iter()
        .enumerate()
        .filter(|&(_, &e)| e <= k)
        .map(|(r, &e)| (r, k - e))
        .collect();
    let dim = rows.len();
    let mut out = DMatrix::from_element(dim, dim, T::zero());
    for (ii, &(ri, mi)) in rows.iter().enumerate() {
        for (jj, &(rj, mj)) in rows.iter().enumerate() {
            if rj == ri + 1 && mj == mi + 1 {
                // J₊ ⊗ a
                out[(ii, jj)] = superdiag[ri] * scalar::sqrt(scalar::int::<T>(i64::from(mj)));
            } else if rj + 1 == ri && mj + 1 == mi {
                // J₋ ⊗ a†
                out[(ii, jj)] = superdiag[rj] * scalar::sqrt(scalar::int::<T>(i64::from(mi)));
            }
        }
    }
    out
}

/// Block layout of `T†A_nT`: superdiagonals of each irreducible `J₊`, with
/// the atomic excitation of each reduced row.
fn block_specs<T: Float>(n: usize) -> Vec<(Vec<T>, Vec<u32>)> {
    let rt2 = scalar::sqrt(scalar::int::<T>(2));
    let rt3 = scalar::sqrt(scalar::int::<T>(3));
    match n {
        2 => vec![
            (vec![], vec![1]),               // singlet scalar 0
            (vec![rt2, rt2], vec![2, 1, 0]), // spin 1
        ],
        3 => vec![
            (vec![T::one()], vec![2, 1]),                       // doublet
            (vec![T::one()], vec![2, 1]),                       // doublet
            (vec![rt3, scalar::int(2), rt3], vec![3, 2, 1, 0]), // spin 3/2
        ],
        _ => unreachable!("validated by callers"),
    }
}

const SECTOR_SWEEP_MAX: u32 = 12;

/// Residuals of the algebraic identities behind the closed forms:
/// su(2) commutators, `A₁² = diag(N+1, N)`, `B₁³ = D·B₁`, orthogonality of
/// the reduction matrix, and the block structure of `T†A_nT`.
pub fn identity_report<T: Float>(n: usize) -> Result<IdentityReport<T>> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedAtomCount(n));
    }
    let mut report = IdentityReport::default();

    // su(2) relations of the collective matrices (exact: entries are halves)
    let (sp, sm, s3) = collective_matrices::<T>(n)?;
    let two = Complex::new(scalar::int::<T>(2), T::zero());
    let su2 = [
        &s3 * &sp - &sp * &s3 - &sp,
        &s3 * &sm - &sm * &s3 + &sm,
        &sp * &sm - &sm * &sp - &s3 * two,
    ]
    .iter()
    .map(max_abs)
    .fold(T::zero(), |a, b| if b > a { b } else { a });
    report.checks.push(IdentityCheck {
        check: "su2_commutators",
        n_atoms: n,
        sector: None,
        residual: su2,
    });

    if n == 1 {
        // A₁² = diag(N+1, N)
        for k in 0..=SECTOR_SWEEP_MAX {
            let a = reduced_coupling_sector::<T>(&[T::one()], &[1, 0], k);
            let rows: Vec<(u32, u32)> = [(1u32, 0u32), (0, 1)]
                .iter()
                .filter(|&&(e, _)| e <= k)
                .map(|&(e, is_ground)| (k - e, is_ground))
                .collect();
            let mut expected = DMatrix::from_element(a.nrows(), a.nrows(), T::zero());
            for (idx, &(m, is_ground)) in rows.iter().enumerate() {
                expected[(idx, idx)] = scalar::int::<T>(i64::from(m) + i64::from(is_ground == 0));
            }
            let res = max_abs_real(&(&a * &a - expected));
            report.checks.push(IdentityCheck {
                check: "a1_squared",
                n_atoms: n,
                sector: Some(k),
                residual: res,
            });
        }
    }

    if n == 2 {
        // B₁³ = D·B₁ with D = diag(2(2N+3), 2(2N+1), 2(2N−1)) by row
        for k in 0..=SECTOR_SWEEP_MAX {
            let b = reduced_coupling_sector::<T>(
                &[scalar::sqrt(scalar::int::<T>(2)); 2],
                &[2, 1, 0],
                k,
            );
            let shifts = [3i64, 1, -1];
            let rows: Vec<T> = [2u32, 1, 0]
                .iter()
                .enumerate()
                .filter(|&(_, &e)| e <= k)
                .map(|(r, &e)| scalar::int::<T>(2 * (2 * i64::from(k - e) + shifts[r])))
                .collect();
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(rows));
            let res = max_abs_real(&(&b * &b * &b - d * &b));
            report.checks.push(IdentityCheck {
                check: "b1_cubed",
                n_atoms: n,
                sector: Some(k),
                residual: res,
            });
        }
    }

    if n >= 2 {
        let reduction = reduction_matrix::<T>(n)?;
        let t = reduction.matrix();
        let gram = t.transpose() * t - DMatrix::identity(t.nrows(), t.ncols());
        report.checks.push(IdentityCheck {
            check: "t_orthogonality",
            n_atoms: n,
            sector: None,
            residual: max_abs_real(&gram),
        });

        // T†·A_n·T = blockdiag(…) on every sector (restricted to the rows
        // and columns present when K < n).
        let row_exc: Vec<u32> = atom_strings(n)
            .iter()
            .map(|s| s.chars().filter(|&c| c == 'e').count() as u32)
            .collect();
        for k in 0..=SECTOR_SWEEP_MAX {
            let sector = sector_basis(n, k)?;
            let a = coupling_on_sector::<T>(n, &sector)?.map(|z| z.re);
            let rows: Vec<usize> = (0..row_exc.len()).filter(|&i| row_exc[i] <= k).collect();
            let cols: Vec<usize> = (0..reduction.column_excitations().len())
                .filter(|&j| reduction.column_excitations()[j] <= k)
                .collect();
            let tk = DMatrix::from_fn(rows.len(), cols.len(), |i, j| t[(rows[i], cols[j])]);
            let conjugated = tk.transpose() * a * &tk;

            let mut expected = DMatrix::from_element(cols.len(), cols.len(), T::zero());
            let mut offset = 0;
            for (superdiag, excs) in block_specs::<T>(n) {
                let block = reduced_coupling_sector::<T>(&superdiag, &excs, k);
                let bdim = block.nrows();
                expected
                    .view_mut((offset, offset), (bdim, bdim))
                    .copy_from(&block);
                offset += bdim;
            }
            debug_assert_eq!(offset, cols.len());
            report.checks.push(IdentityCheck {
                check: "t_block_structure",
                n_atoms: n,
                sector: Some(k),
                residual: max_abs_real(&(conjugated - expected)),
            });
        }
    }

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn exp_hermitian_two_level() {
        let g = 0.8;
        let t = 1.7;
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from(0.0),
                Complex64::from(g),
                Complex64::from(g),
                Complex64::from(0.0),
            ],
        );
        let u = exp_hermitian(&h, t).unwrap();
        let (c, s) = ((g * t).cos(), (g * t).sin());
        assert_abs_diff_eq!(u[(0, 0)].re, c, epsilon = 1e-14);
        assert_abs_diff_eq!(u[(0, 1)].im, -s, epsilon = 1e-14);
        assert_abs_diff_eq!(u[(1, 0)].im, -s, epsilon = 1e-14);
        assert_abs_diff_eq!(u[(1, 1)].re, c, epsilon = 1e-14);
    }

    #[test]
    fn exp_hermitian_zero_matrix() {
        let h = DMatrix::from_element(3, 3, Complex64::from(0.0));
        let u = exp_hermitian(&h, 2.5).unwrap();
        assert!(max_abs(&(u - DMatrix::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn exp_hermitian_rejects_asymmetry() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from(0.0),
                Complex64::from(1.0),
                Complex64::from(0.5),
                Complex64::from(0.0),
            ],
        );
        assert!(matches!(
            exp_hermitian(&h, 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn exp_hermitian_reconstruction_and_unitarity() {
        let p = ModelParams::new(3, 1.2, 0.7, 1.9).unwrap();
        for k in [2u32, 5, 9] {
            let sector = sector_basis(3, k).unwrap();
            let h = hamiltonian_on_sector(&p, &sector).unwrap();
            let eig = h.clone().symmetric_eigen();
            let rec = &eig.eigenvectors
                * DMatrix::from_diagonal(&eig.eigenvalues.map(Complex64::from))
                * eig.eigenvectors.adjoint();
            assert!(max_abs(&(rec - h.clone())) <= 1e-12);
            let u = exp_hermitian(&h, 3.3).unwrap();
            let dim = u.nrows();
            assert!(max_abs(&(u.adjoint() * &u - DMatrix::identity(dim, dim))) <= 1e-13);
        }
    }

    #[test]
    fn oracle_identity_at_t0() {
        let p = ModelParams::new(2, 1.0, 0.6, 0.9).unwrap();
        let s = JointState::<f64>::basis_from("eg", 3)
            .unwrap()
            .scaled(Complex64::new(0.6, 0.0))
            .add(
                &JointState::basis_from("gg", 1)
                    .unwrap()
                    .scaled(Complex64::new(0.0, 0.8)),
            )
            .unwrap();
        let out = evolve_oracle(&p, 0.0, &s).unwrap();
        assert!(out.max_deviation(&s) < 1e-15);
    }

    #[test]
    fn oracle_ground_state_phase() {
        // |gg…g, 0⟩ spans a 1-dim sector with energy −Δn/2.
        for n in 1..=3usize {
            let p = ModelParams::new(n, 1.0, 0.7, 1.1).unwrap();
            let t = 2.3;
            let ground = "g".repeat(n);
            let s = JointState::<f64>::basis_from(&ground, 0).unwrap();
            let out = evolve_oracle(&p, t, &s).unwrap();
            let want = Complex64::from_polar(1.0, t * 0.7 * n as f64 / 2.0);
            let got = out.amplitude(&crate::state::BasisLabel::new(&ground, 0).unwrap());
            assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-14);
            assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn oracle_conserves_norm_and_excitation_off_resonance() {
        let p = ModelParams::new(3, 1.0, 0.4, 1.7).unwrap();
        let s = JointState::<f64>::basis_from("eeg", 2)
            .unwrap()
            .scaled(Complex64::from(0.6))
            .add(
                &JointState::basis_from("ggg", 1)
                    .unwrap()
                    .scaled(Complex64::from(0.8)),
            )
            .unwrap();
        let out = evolve_oracle(&p, 4.2, &s).unwrap();
        assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-12);
        for (label, amp) in out.iter() {
            if amp.norm() > 1e-13 {
                assert!(label.excitation() == 4 || label.excitation() == 1);
            }
        }
    }

    #[test]
    fn oracle_energy_conservation() {
        let p = ModelParams::new(2, 1.3, 0.8, 0.5).unwrap();
        let s = JointState::<f64>::basis_from("eg", 1)
            .unwrap()
            .scaled(Complex64::from(0.6))
            .add(
                &JointState::basis_from("ge", 1)
                    .unwrap()
                    .scaled(Complex64::new(0.0, 0.8)),
            )
            .unwrap();
        let energy = |state: &JointState<f64>| -> f64 {
            // ⟨ψ|H|ψ⟩ via the sector matrix
            let sector = sector_basis(2, 2).unwrap();
            let h = hamiltonian_on_sector(&p, &sector).unwrap();
            let v: Vec<Complex64> = sector.basis().iter().map(|l| state.amplitude(l)).collect();
            let mut acc = Complex64::from(0.0);
            for (i, vi) in v.iter().enumerate() {
                for (j, vj) in v.iter().enumerate() {
                    acc += vi.conj() * h[(i, j)] * vj;
                }
            }
            acc.re
        };
        let e0 = energy(&s);
        for t in [0.9, 3.7, 8.1] {
            let out = evolve_oracle(&p, t, &s).unwrap();
            assert_abs_diff_eq!(energy(&out), e0, epsilon = 1e-10 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn closed_and_oracle_agree_on_resonance() {
        let p = ModelParams::new(3, 1.0, 1.0, 1.0).unwrap();
        // K = 5 sector has the full dimension 8
        let dev = compare_closed_oracle(&p, 2.1, 5).unwrap();
        assert!(dev <= 1e-11, "deviation {dev}");
        assert_eq!(sector_basis(3, 5).unwrap().dim(), 8);
    }

    #[test]
    fn one_atom_routes_agree_to_machine_scale() {
        // Both sides are analytic for n = 1, so the agreement is tighter
        // than the general acceptance bound.
        for g in [0.4, 1.0, 3.3] {
            let p = ModelParams::new(1, 1.0, 1.0, g).unwrap();
            for t in [0.7, 4.9, 10.0] {
                for k in [0u32, 1, 5, 12] {
                    let dev = compare_closed_oracle(&p, t, k).unwrap();
                    assert!(dev <= 1e-12, "g={g} t={t} K={k}: {dev:e}");
                }
            }
        }
    }

    #[test]
    fn coupling_squared_is_number_diagonal() {
        // A₁ applied twice through the public path: A₁²|s,m⟩ = (N+1 or N)|s,m⟩.
        let mut worst: f64 = 0.0;
        for k in 0..=12u32 {
            for label in sector_basis(1, k).unwrap().basis() {
                let s = JointState::<f64>::basis(label.clone());
                let twice = crate::model::apply_coupling(&crate::model::apply_coupling(&s));
                let number = i64::from(label.photons()) + i64::from(label.atoms() == "e");
                let expected = s.scaled(Complex64::from(number as f64));
                worst = worst.max(twice.max_deviation(&expected));
            }
        }
        assert!(worst <= 1e-13, "{worst:e}");
    }

    #[test]
    fn sector_unitary_reproducible_bitwise() {
        let p = ModelParams::new(3, 1.2, 0.8, 2.7).unwrap();
        let a = sector_unitary(&p, 3.9, 6).unwrap();
        let b = sector_unitary(&p, 3.9, 6).unwrap();
        assert_eq!(a.matrix, b.matrix);
        let dim = a.matrix.nrows();
        let dev = max_abs(&(a.matrix.adjoint() * &a.matrix - DMatrix::identity(dim, dim)));
        assert!(dev <= 1e-13, "{dev:e}");
    }

    #[test]
    fn compare_is_zero_at_t0() {
        let p = ModelParams::new(2, 1.4, 1.4, 2.2).unwrap();
        for k in 0..=4 {
            let dev = compare_closed_oracle(&p, 0.0, k).unwrap();
            assert!(dev <= 1e-14);
        }
    }

    #[test]
    fn identity_report_residuals() {
        for n in 1..=3usize {
            let report = identity_report::<f64>(n).unwrap();
            for check in &report.checks {
                let bound = match check.check {
                    "su2_commutators" => 0.0,
                    "a1_squared" | "b1_cubed" => 1e-13,
                    "t_orthogonality" => 1e-15,
                    "t_block_structure" => 1e-14,
                    other => panic!("unexpected check {other}"),
                };
                assert!(
                    check.residual <= bound,
                    "{} (n={}, K={:?}): {:e}",
                    check.check,
                    check.n_atoms,
                    check.sector,
                    check.residual
                );
            }
        }
    }

    #[test]
    fn identity_report_serializes() {
        let report = identity_report::<f64>(2).unwrap();
        let json = serde_json::to_string(&report.to_records()).unwrap();
        assert!(json.contains("\"check\":\"b1_cubed\""));
        assert!(json.contains("\"K\":"));
    }
}
