//! The explicit evolution exponentials: `e^{-itgA₁}` and its Gauss
//! decomposition, the reduced spin-1 and spin-3/2 exponentials, the
//! orthogonal reduction matrices, and the assembled resonant evolution.
//!
//! Matrix entries are kept symbolic as term lists
//! `(complex coefficient) × (scalar kernel of the photon number) × (ladder
//! monomial)`. Kernels stand to the left of ladder monomials: applying a term
//! to `|m⟩` first applies the ladder, then evaluates the kernel at the
//! resulting photon number. Under that reading every entry within one
//! excitation sector shares a single Rabi frequency and the matrix is
//! unitary, which the oracle tests confirm wholesale.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::kernels::{self, SpectralData};
use crate::model::{atom_strings, ModelParams};
use crate::scalar::{self, Float};
use crate::state::{ladder_factor, BasisLabel, JointState};

/// Gauss-factor kernels divide by `cos(θ√λ)`; below this magnitude the
/// evaluation reports a pole instead of returning a huge value.
const POLE_EPS: f64 = 1e-12;

/// Primitive shapes of the one-atom family, argument `λ = m + shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FockPrim {
    /// cos(θ√λ)
    Cos,
    /// sin(θ√λ)/√λ
    Sinc,
    /// tan(θ√λ)/√λ (pole where the cosine vanishes)
    Tan,
    /// 1/cos(θ√λ) (pole where the cosine vanishes)
    Sec,
}

/// Primitive shapes of the spin-1 family, argument `λ = 2(2m + c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TripletPrim {
    /// constant 1 (for the rational parts of the corner entries)
    One,
    /// cos(θ√(2(2m+c)))
    Cos,
    /// sin(θ√(2(2m+c)))/√(2m+c) = √2·sinck(2(2m+c))
    SinNorm,
}

/// Kernels of the spin-3/2 grid, weighted combinations of the two
/// eigenfrequencies λ±(x) divided by 2√d(x).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuartetPrim {
    F1,
    F2,
    F3,
    F4,
    F5,
    H2,
    H3,
    H3Tilde,
    H4,
}

/// Integer-coefficient rational weight `(a₀ + a₁m)/(b₀ + b₁m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinearRational {
    pub num: (i64, i64),
    pub den: (i64, i64),
}

impl LinearRational {
    pub const ONE: Self = Self {
        num: (1, 0),
        den: (1, 0),
    };

    fn eval<T: Float>(&self, m: i64) -> T {
        let n = scalar::int::<T>(self.num.0 + self.num.1 * m);
        let d = scalar::int::<T>(self.den.0 + self.den.1 * m);
        n / d
    }
}

/// Which spectral family a kernel belongs to, and the integer shift fixing
/// its argument as a function of the photon number. Used by the
/// frequency-coherence checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralTag {
    /// argument m + shift
    Fock { shift: i64 },
    /// argument 2m + c
    Triplet { c: i64 },
    /// argument m + shift into λ±(·)
    Quartet { shift: i64 },
}

/// A scalar kernel of the (post-ladder) photon number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// constant 1
    Unit,
    Fock {
        prim: FockPrim,
        shift: i64,
    },
    Triplet {
        prim: TripletPrim,
        weight: LinearRational,
        c: i64,
    },
    Quartet {
        prim: QuartetPrim,
        shift: i64,
    },
}

impl Kernel {
    /// Evaluate at photon number `photons` (already post-ladder).
    pub fn eval<T: Float>(&self, theta: T, photons: u32) -> Result<T> {
        let m = i64::from(photons);
        match *self {
            Kernel::Unit => Ok(T::one()),
            Kernel::Fock { prim, shift } => {
                let lam = scalar::int::<T>(m + shift);
                match prim {
                    FockPrim::Cos => Ok(kernels::cosk(lam, theta)),
                    FockPrim::Sinc => Ok(kernels::sinck(lam, theta)),
                    FockPrim::Tan | FockPrim::Sec => {
                        let c = kernels::cosk(lam, theta);
                        if scalar::abs(c) < scalar::lit(POLE_EPS) {
                            return Err(Error::KernelPole { lambda: m + shift });
                        }
                        match prim {
                            FockPrim::Tan => Ok(kernels::sinck(lam, theta) / c),
                            _ => Ok(T::one() / c),
                        }
                    }
                }
            }
            Kernel::Triplet { prim, weight, c } => {
                let lam = scalar::int::<T>(2 * (2 * m + c));
                let w: T = weight.eval(m);
                let p = match prim {
                    TripletPrim::One => T::one(),
                    TripletPrim::Cos => kernels::cosk(lam, theta),
                    TripletPrim::SinNorm => {
                        scalar::sqrt(scalar::int::<T>(2)) * kernels::sinck(lam, theta)
                    }
                };
                Ok(w * p)
            }
            Kernel::Quartet { prim, shift } => {
                let s: SpectralData<T> = kernels::spectral(m + shift);
                let cp = kernels::cosk(s.lambda_plus, theta);
                let cm = kernels::cosk(s.lambda_minus, theta);
                let value = match prim {
                    QuartetPrim::F1 => s.v_plus * cp - s.v_minus * cm,
                    QuartetPrim::F2 => s.w_plus * cp - s.w_minus * cm,
                    QuartetPrim::F3 => cp - cm,
                    QuartetPrim::F4 => s.v_plus * cm - s.v_minus * cp,
                    QuartetPrim::F5 => s.w_plus * cm - s.w_minus * cp,
                    QuartetPrim::H2 => {
                        s.w_plus * kernels::sinck(s.lambda_plus, theta)
                            - s.w_minus * kernels::sinck(s.lambda_minus, theta)
                    }
                    QuartetPrim::H3 => {
                        kernels::sinck(s.lambda_plus, theta) - kernels::sinck(s.lambda_minus, theta)
                    }
                    QuartetPrim::H3Tilde => {
                        kernels::msin(s.lambda_plus, theta) - kernels::msin(s.lambda_minus, theta)
                    }
                    QuartetPrim::H4 => {
                        s.v_plus * kernels::sinck(s.lambda_minus, theta)
                            - s.v_minus * kernels::sinck(s.lambda_plus, theta)
                    }
                };
                Ok(value / (scalar::int::<T>(2) * scalar::sqrt(s.d)))
            }
        }
    }

    /// Family and shift of the kernel's spectral argument, if any.
    pub fn spectral_tag(&self) -> Option<SpectralTag> {
        match *self {
            Kernel::Unit => None,
            Kernel::Fock { shift, .. } => Some(SpectralTag::Fock { shift }),
            Kernel::Triplet { c, .. } => Some(SpectralTag::Triplet { c }),
            Kernel::Quartet { shift, .. } => Some(SpectralTag::Quartet { shift }),
        }
    }
}

/// One term of a matrix entry: coefficient × kernel × ladder monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct Term<T: Float> {
    pub coeff: Complex<T>,
    pub ladder: i32,
    pub kernel: Kernel,
}

/// An operator-valued matrix whose entries are term lists; `theta = t·g` is
/// fixed at construction. Rows carry their spin-excitation content so the
/// matrix can be realized on any excitation sector.
#[derive(Clone, Debug)]
pub struct ClosedFormMatrix<T: Float> {
    theta: T,
    row_excitations: Vec<u32>,
    entries: Vec<Vec<Vec<Term<T>>>>,
}

impl<T: Float> ClosedFormMatrix<T> {
    fn new(theta: T, row_excitations: Vec<u32>) -> Self {
        let dim = row_excitations.len();
        Self {
            theta,
            row_excitations,
            entries: vec![vec![Vec::new(); dim]; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.row_excitations.len()
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn row_excitations(&self) -> &[u32] {
        &self.row_excitations
    }

    pub fn entry(&self, row: usize, col: usize) -> &[Term<T>] {
        &self.entries[row][col]
    }

    /// Add a term at `(row, col)`, merging with an existing term of the same
    /// kernel and ladder power.
    fn push(&mut self, row: usize, col: usize, coeff: Complex<T>, ladder: i32, kernel: Kernel) {
        if coeff.re == T::zero() && coeff.im == T::zero() {
            return;
        }
        let list = &mut self.entries[row][col];
        if let Some(t) = list
            .iter_mut()
            .find(|t| t.ladder == ladder && t.kernel == kernel)
        {
            t.coeff += coeff;
        } else {
            list.push(Term {
                coeff,
                ladder,
                kernel,
            });
        }
    }

    /// Apply to a joint state; rows and columns are the 2ⁿ atomic strings in
    /// basis order, so this is only defined for the dense (assembled)
    /// matrices.
    pub fn apply(&self, state: &JointState<T>) -> Result<JointState<T>> {
        let n = state.n_atoms();
        if self.dim() != 1 << n {
            return Err(Error::AtomCountMismatch {
                expected: self.dim().trailing_zeros() as usize,
                found: n,
            });
        }
        let strings = atom_strings(n);
        let mut out = JointState::zero(n);
        for (label, amp) in state.iter() {
            let col = label.atom_index();
            for (atoms, rows) in strings.iter().zip(&self.entries) {
                for term in &rows[col] {
                    let Some((factor, photons)) = ladder_factor::<T>(label.photons(), term.ladder)
                    else {
                        continue;
                    };
                    let k = term.kernel.eval(self.theta, photons)?;
                    out.add_amplitude(
                        BasisLabel::new(atoms, photons)?,
                        *amp * term.coeff * (factor * k),
                    )?;
                }
            }
        }
        Ok(out)
    }

    /// Numeric realization on the excitation-`k` sector: rows with
    /// excitation ≤ k, each at photon number `k − excitation`, in row order.
    pub fn sector_matrix(&self, k: u32) -> Result<DMatrix<Complex<T>>> {
        let rows: Vec<(usize, u32)> = self
            .row_excitations
            .iter()
            .enumerate()
            .filter(|&(_, &e)| e <= k)
            .map(|(r, &e)| (r, k - e))
            .collect();
        let dim = rows.len();
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = DMatrix::from_element(dim, dim, zero);
        for (jj, &(rj, mj)) in rows.iter().enumerate() {
            for (ii, &(ri, mi)) in rows.iter().enumerate() {
                let mut acc = zero;
                for term in &self.entries[ri][rj] {
                    let Some((factor, photons)) = ladder_factor::<T>(mj, term.ladder) else {
                        continue;
                    };
                    if photons != mi {
                        continue;
                    }
                    acc += term.coeff * (factor * term.kernel.eval(self.theta, photons)?);
                }
                out[(ii, jj)] = acc;
            }
        }
        Ok(out)
    }
}

fn minus_i<T: Float>() -> Complex<T> {
    -scalar::i::<T>()
}

fn re<T: Float>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// `e^{-iθA₁}` for the one-atom coupling, as the 2×2 operator grid
/// `[[cos(θ√(N+1)), −i sinc(N+1)·a], [−i sinc(N)·a†, cos(θ√N)]]`.
pub fn exp_a1<T: Float>(theta: T) -> ClosedFormMatrix<T> {
    let mut m = ClosedFormMatrix::new(theta, vec![1, 0]);
    let one = re(T::one());
    m.push(
        0,
        0,
        one,
        0,
        Kernel::Fock {
            prim: FockPrim::Cos,
            shift: 1,
        },
    );
    m.push(
        0,
        1,
        minus_i(),
        -1,
        Kernel::Fock {
            prim: FockPrim::Sinc,
            shift: 1,
        },
    );
    m.push(
        1,
        0,
        minus_i(),
        1,
        Kernel::Fock {
            prim: FockPrim::Sinc,
            shift: 0,
        },
    );
    m.push(
        1,
        1,
        one,
        0,
        Kernel::Fock {
            prim: FockPrim::Cos,
            shift: 0,
        },
    );
    m
}

/// The Gauss decomposition `L·D·U` of `e^{-iθA₁}`: lower unitriangular,
/// diagonal, upper unitriangular. Each factor has poles where `cos(θ√m)`
/// vanishes; applying one there yields [`Error::KernelPole`].
pub fn gauss_factors<T: Float>(
    theta: T,
) -> (
    ClosedFormMatrix<T>,
    ClosedFormMatrix<T>,
    ClosedFormMatrix<T>,
) {
    let one = re(T::one());
    let unit = Kernel::Unit;

    let mut lower = ClosedFormMatrix::new(theta, vec![1, 0]);
    lower.push(0, 0, one, 0, unit);
    lower.push(
        1,
        0,
        minus_i(),
        1,
        Kernel::Fock {
            prim: FockPrim::Tan,
            shift: 0,
        },
    );
    lower.push(1, 1, one, 0, unit);

    let mut diag = ClosedFormMatrix::new(theta, vec![1, 0]);
    diag.push(
        0,
        0,
        one,
        0,
        Kernel::Fock {
            prim: FockPrim::Cos,
            shift: 1,
        },
    );
    diag.push(
        1,
        1,
        one,
        0,
        Kernel::Fock {
            prim: FockPrim::Sec,
            shift: 0,
        },
    );

    let mut upper = ClosedFormMatrix::new(theta, vec![1, 0]);
    upper.push(0, 0, one, 0, unit);
    upper.push(
        0,
        1,
        minus_i(),
        -1,
        Kernel::Fock {
            prim: FockPrim::Tan,
            shift: 1,
        },
    );
    upper.push(1, 1, one, 0, unit);

    (lower, diag, upper)
}

/// `e^{-iθB₁}` for the reduced spin-1 coupling `B₁ = J₊⊗a + J₋⊗a†`.
pub fn exp_b1<T: Float>(theta: T) -> ClosedFormMatrix<T> {
    let mut m = ClosedFormMatrix::new(theta, vec![2, 1, 0]);
    let one = re(T::one());
    let rat = |num: (i64, i64), den: (i64, i64)| LinearRational { num, den };

    // b₁₁ = (N+2 + (N+1)cos(θ√(2(2N+3)))) / (2N+3)
    m.push(
        0,
        0,
        one,
        0,
        Kernel::Triplet {
            prim: TripletPrim::One,
            weight: rat((2, 1), (3, 2)),
            c: 3,
        },
    );
    m.push(
        0,
        0,
        one,
        0,
        Kernel::Triplet {
            prim: TripletPrim::Cos,
            weight: rat((1, 1), (3, 2)),
            c: 3,
        },
    );
    // b₁₂ = −i sin(θ√(2(2N+3)))/√(2N+3) · a
    m.push(
        0,
        1,
        minus_i(),
        -1,
        Kernel::Triplet {
            prim: TripletPrim::SinNorm,
            weight: LinearRational::ONE,
            c: 3,
        },
    );
    // b₁₃ = (−1 + cos(θ√(2(2N+3)))) / (2N+3) · a²
    m.push(
        0,
        2,
        one,
        -2,
        Kernel::Triplet {
            prim: TripletPrim::One,
            weight: rat((-1, 0), (3, 2)),
            c: 3,
        },
    );
    m.push(
        0,
        2,
        one,
        -2,
        Kernel::Triplet {
            prim: TripletPrim::Cos,
            weight: rat((1, 0), (3, 2)),
            c: 3,
        },
    );
    // b₂₁, b₂₂, b₂₃ share the frequency 2(2N+1)
    m.push(
        1,
        0,
        minus_i(),
        1,
        Kernel::Triplet {
            prim: TripletPrim::SinNorm,
            weight: LinearRational::ONE,
            c: 1,
        },
    );
    m.push(
        1,
        1,
        one,
        0,
        Kernel::Triplet {
            prim: TripletPrim::Cos,
            weight: LinearRational::ONE,
            c: 1,
        },
    );
    m.push(
        1,
        2,
        minus_i(),
        -1,
        Kernel::Triplet {
            prim: TripletPrim::SinNorm,
            weight: LinearRational::ONE,
            c: 1,
        },
    );
    // b₃₁ = (−1 + cos(θ√(2(2N−1)))) / (2N−1) · (a†)²
    m.push(
        2,
        0,
        one,
        2,
        Kernel::Triplet {
            prim: TripletPrim::One,
            weight: rat((-1, 0), (-1, 2)),
            c: -1,
        },
    );
    m.push(
        2,
        0,
        one,
        2,
        Kernel::Triplet {
            prim: TripletPrim::Cos,
            weight: rat((1, 0), (-1, 2)),
            c: -1,
        },
    );
    // b₃₂ = −i sin(θ√(2(2N−1)))/√(2N−1) · a†
    m.push(
        2,
        1,
        minus_i(),
        1,
        Kernel::Triplet {
            prim: TripletPrim::SinNorm,
            weight: LinearRational::ONE,
            c: -1,
        },
    );
    // b₃₃ = (N−1 + N·cos(θ√(2(2N−1)))) / (2N−1); at the vacuum the cosine
    // term carries coefficient N = 0 and the entry is exactly 1.
    m.push(
        2,
        2,
        one,
        0,
        Kernel::Triplet {
            prim: TripletPrim::One,
            weight: rat((-1, 1), (-1, 2)),
            c: -1,
        },
    );
    m.push(
        2,
        2,
        one,
        0,
        Kernel::Triplet {
            prim: TripletPrim::Cos,
            weight: rat((0, 1), (-1, 2)),
            c: -1,
        },
    );
    m
}

/// `e^{-iθB₂}` for the reduced spin-3/2 coupling, the 4×4 grid of f/h
/// kernels at shifted arguments (N+2, N+1, N, N−1).
pub fn exp_b2<T: Float>(theta: T) -> ClosedFormMatrix<T> {
    let mut m = ClosedFormMatrix::new(theta, vec![3, 2, 1, 0]);
    let one = re(T::one());
    let rt3 = scalar::sqrt(scalar::int::<T>(3));
    let i3 = minus_i::<T>() * rt3; // −√3 i
    let c23 = re(scalar::int::<T>(2) * rt3); // 2√3
    let i6 = minus_i::<T>() * scalar::int::<T>(6); // −6i
    let i2 = minus_i::<T>() * scalar::int::<T>(2); // −2i
    let q = |prim: QuartetPrim, shift: i64| Kernel::Quartet { prim, shift };

    m.push(0, 0, one, 0, q(QuartetPrim::F1, 2));
    m.push(0, 1, i3, -1, q(QuartetPrim::H2, 2));
    m.push(0, 2, c23, -2, q(QuartetPrim::F3, 2));
    m.push(0, 3, i6, -3, q(QuartetPrim::H3, 2));

    m.push(1, 0, i3, 1, q(QuartetPrim::H2, 1));
    m.push(1, 1, one, 0, q(QuartetPrim::F2, 1));
    m.push(1, 2, i2, -1, q(QuartetPrim::H3Tilde, 1));
    m.push(1, 3, c23, -2, q(QuartetPrim::F3, 1));

    m.push(2, 0, c23, 2, q(QuartetPrim::F3, 0));
    m.push(2, 1, i2, 1, q(QuartetPrim::H3Tilde, 0));
    m.push(2, 2, one, 0, q(QuartetPrim::F4, 0));
    m.push(2, 3, i3, -1, q(QuartetPrim::H4, 0));

    m.push(3, 0, i6, 3, q(QuartetPrim::H3, -1));
    m.push(3, 1, c23, 2, q(QuartetPrim::F3, -1));
    m.push(3, 2, i3, 1, q(QuartetPrim::H4, -1));
    m.push(3, 3, one, 0, q(QuartetPrim::F5, -1));
    m
}

/// Constant orthogonal change of atomic basis realizing the spin
/// decompositions ½⊗½ = 0⊕1 and ½⊗½⊗½ = ½⊕½⊕3/2. Columns are grouped by
/// irreducible block and carry definite atomic excitation.
#[derive(Clone, Debug)]
pub struct ReductionMatrix<T: Float> {
    matrix: DMatrix<T>,
    column_excitations: Vec<u32>,
}

impl<T: Float> ReductionMatrix<T> {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// Atomic excitation carried by each reduced-basis column.
    pub fn column_excitations(&self) -> &[u32] {
        &self.column_excitations
    }
}

/// The reduction matrix for `n` atoms; `n = 1` is the identity.
///
/// Entries are 0, ±1, ±1/√2, ±1/√6, ±2/√6, ±1/√3. Columns are orthonormal
/// (so in particular no component can be 2/√3, which exceeds 1) and sorted
/// by irreducible block; conjugating the coupling gives exactly
/// `diag(0, B₁)` for n = 2 and `diag(A₁, A₁, B₂)` for n = 3.
pub fn reduction_matrix<T: Float>(n: usize) -> Result<ReductionMatrix<T>> {
    let r2 = <T as num_traits::FloatConst>::FRAC_1_SQRT_2();
    let r3 = T::one() / scalar::sqrt(scalar::int::<T>(3));
    let r6 = T::one() / scalar::sqrt(scalar::int::<T>(6));
    let q = scalar::int::<T>(2) * r6;
    let o = T::one();
    let z = T::zero();
    match n {
        1 => Ok(ReductionMatrix {
            matrix: DMatrix::identity(2, 2),
            column_excitations: vec![1, 0],
        }),
        2 => Ok(ReductionMatrix {
            #[rustfmt::skip]
            matrix: DMatrix::from_row_slice(4, 4, &[
                z,   o, z,  z,
                r2,  z, r2, z,
                -r2, z, r2, z,
                z,   z, z,  o,
            ]),
            column_excitations: vec![1, 2, 1, 0],
        }),
        3 => Ok(ReductionMatrix {
            #[rustfmt::skip]
            matrix: DMatrix::from_row_slice(8, 8, &[
                z,   z,   z,   z,   o, z,  z,  z,
                r2,  z,   r6,  z,   z, r3, z,  z,
                -r2, z,   r6,  z,   z, r3, z,  z,
                z,   z,   z,   q,   z, z,  r3, z,
                z,   z,   -q,  z,   z, r3, z,  z,
                z,   r2,  z,   -r6, z, z,  r3, z,
                z,   -r2, z,   -r6, z, z,  r3, z,
                z,   z,   z,   z,   z, z,  z,  o,
            ]),
            column_excitations: vec![2, 1, 2, 1, 3, 2, 1, 0],
        }),
        other => Err(Error::UnsupportedAtomCount(other)),
    }
}

/// Irreducible blocks of `T†A_nT` in column order: grids plus the atomic
/// excitation of each reduced row.
fn blocks<T: Float>(n: usize, theta: T) -> Result<Vec<ClosedFormMatrix<T>>> {
    match n {
        1 => Ok(vec![exp_a1(theta)]),
        2 => {
            // singlet scalar block: the dark state evolves trivially
            let mut scalar_block = ClosedFormMatrix::new(theta, vec![1]);
            scalar_block.push(0, 0, re(T::one()), 0, Kernel::Unit);
            Ok(vec![scalar_block, exp_b1(theta)])
        }
        3 => Ok(vec![exp_a1(theta), exp_a1(theta), exp_b2(theta)]),
        other => Err(Error::UnsupportedAtomCount(other)),
    }
}

/// `e^{-iθA_n}` on the full 2ⁿ atomic basis, assembled by conjugating the
/// block exponentials with the reduction matrix. The conjugation is absorbed
/// into the term lists, so entries stay exact (kernel, ladder) pairs.
pub fn exp_a<T: Float>(n: usize, theta: T) -> Result<ClosedFormMatrix<T>> {
    if n == 1 {
        return Ok(exp_a1(theta));
    }
    let reduction = reduction_matrix::<T>(n)?;
    let t = reduction.matrix();
    let blocks = blocks::<T>(n, theta)?;
    let dim = 1 << n;
    let row_exc: Vec<u32> = atom_strings(n)
        .iter()
        .map(|s| s.chars().filter(|&c| c == 'e').count() as u32)
        .collect();
    let mut out = ClosedFormMatrix::new(theta, row_exc);
    let mut offset = 0;
    for block in &blocks {
        let b = block.dim();
        for k in 0..b {
            for l in 0..b {
                for term in block.entry(k, l) {
                    for i in 0..dim {
                        let ti = t[(i, offset + k)];
                        if ti == T::zero() {
                            continue;
                        }
                        for j in 0..dim {
                            let w = ti * t[(j, offset + l)];
                            if w == T::zero() {
                                continue;
                            }
                            out.push(i, j, term.coeff * w, term.ladder, term.kernel);
                        }
                    }
                }
            }
        }
        offset += b;
    }
    debug_assert_eq!(offset, dim);
    Ok(out)
}

/// Full resonant evolution `U(t) = (e^{-itωS₃} ⊗ e^{-itωa†a}) e^{-itgA}`,
/// with `U(0)` the identity. Off resonance this returns
/// [`Error::NotResonant`]; the spectral oracle handles detuned parameters.
pub fn evolve_closed<T: Float>(
    params: &ModelParams<T>,
    t: T,
    state: &JointState<T>,
) -> Result<JointState<T>> {
    if !params.resonant() {
        return Err(Error::NotResonant);
    }
    if state.n_atoms() != params.n_atoms() {
        return Err(Error::AtomCountMismatch {
            expected: params.n_atoms(),
            found: state.n_atoms(),
        });
    }
    if t == T::zero() {
        // U(0) = I exactly; skip the assembled operator so the support is
        // reproduced bit for bit.
        return Ok(state.clone());
    }
    let u = exp_a::<T>(params.n_atoms(), t * params.g())?;
    evolve_closed_with(&u, params, t, state)
}

/// [`evolve_closed`] with a prebuilt `exp_a(n, t·g)`, for callers sweeping
/// many states at one time (the operator is immutable and shareable).
pub fn evolve_closed_with<T: Float>(
    u: &ClosedFormMatrix<T>,
    params: &ModelParams<T>,
    t: T,
    state: &JointState<T>,
) -> Result<JointState<T>> {
    let rotated = u.apply(state)?;
    let half_n = scalar::int::<T>(params.n_atoms() as i64) / scalar::int::<T>(2);
    Ok(rotated.map_phases(|label| {
        let s3_plus_n = scalar::int::<T>(i64::from(label.excited_atoms())) - half_n
            + scalar::int::<T>(i64::from(label.photons()));
        scalar::cis(-(t * params.omega() * s3_plus_n))
    }))
}
