use thiserror::Error;

/// Errors raised by state, model, and evolution operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A basis label used a letter other than `e`/`g`.
    #[error("invalid atomic letter {0:?}: atom strings are over {{e, g}}")]
    InvalidAtomLetter(char),

    /// Operands or operator built for a different number of atoms.
    #[error("atom count mismatch: expected {expected}, got {found}")]
    AtomCountMismatch { expected: usize, found: usize },

    /// Atom counts outside the supported range.
    #[error("unsupported atom count {0}: closed forms exist for 1, 2, or 3 atoms")]
    UnsupportedAtomCount(usize),

    /// A model parameter was NaN or infinite.
    #[error("non-finite model parameter {name} = {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },

    /// Closed-form evolution requested off resonance.
    #[error(
        "closed-form evolution requires resonance (delta = omega); \
         use the oracle evolution for detuned parameters"
    )]
    NotResonant,

    /// A Gauss-factor kernel was evaluated where cos(θ√m) vanishes.
    #[error("Gauss factor pole: |cos(theta*sqrt({lambda}))| < 1e-12")]
    KernelPole { lambda: i64 },

    /// Matrix handed to the spectral oracle is not Hermitian within tolerance.
    #[error("matrix is not Hermitian: max |H - H^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    /// Matrix handed to the spectral oracle exceeds the supported dimension.
    #[error("matrix dimension {0} exceeds the oracle limit of 64")]
    DimensionTooLarge(usize),
}

pub type Result<V> = std::result::Result<V, Error>;
