use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dispersion is degenerate at p = 0 with zero mass; spinor undefined")]
    DegenerateDispersion,

    #[error("quadrature unresolved: successive orders differ by {difference:.3e} (tolerance {tolerance:.1e})")]
    QuadratureUnresolved { difference: f64, tolerance: f64 },

    #[error("Fock space with {requested} modes exceeds the limit of {limit}")]
    DimensionTooLarge { requested: usize, limit: usize },

    #[error("detector widths differ ({0} vs {1}); mixed-width overlaps are not supported")]
    WidthMismatch(f64, f64),

    #[error("oscillator level {level} exceeds the recurrence bound {limit}")]
    LevelTooHigh { level: usize, limit: usize },

    #[error("{name} = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("conditional probability given b{column} undefined: column marginal is zero")]
    UndefinedConditional { column: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
