use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("field of order {p}^{n} exceeds the supported bound of {bound} elements")]
    DegreeOverflow { p: u32, n: u32, bound: u64 },
    #[error("inversion of zero")]
    DivisionByZero,
    #[error("x^(q-1) = {target} has no solution in F_(q^{m}); the tower degree is too small")]
    NoRoot { target: String, m: u32 },
    #[error("enumeration budget exceeded: q^{d} = {count} > {budget}")]
    Budget { d: u32, count: u128, budget: u64 },
    #[error("series is zero to precision {0}")]
    ZeroToPrecision(i64),
    #[error("valuation monotonicity violated at d = {d}: {prev} then {next}")]
    Monotonicity { d: u32, prev: i64, next: i64 },
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("precision insufficient: {0}")]
    Precision(String),
    #[error("no unique solution: {0}")]
    NoUniqueSolution(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
