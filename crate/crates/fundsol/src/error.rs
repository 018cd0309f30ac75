use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {value} is within {distance:e} of a pole at {pole}")]
    Pole { value: String, pole: String, distance: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("integrand does not follow the declared tail model: {0}")]
    TailModel(String),
    #[error("argument outside the supported domain: {0}")]
    Domain(String),
    #[error("representation not available here: {0}")]
    Regime(String),
    #[error("series terms stopped decreasing: {0}")]
    Divergence(String),
    #[error("bracket does not contain a sign change on [{a}, {b}]")]
    Bracket { a: f64, b: f64 },
    #[error("kernel evaluated on the diagonal x = y = {0}")]
    Diagonal(f64),
    #[error("time step collapsed to {dt:e} at t = {t}")]
    StepCollapse { t: f64, dt: f64 },
    #[error("profile is not resolved by the grid near node {0}")]
    Unresolved(usize),
    #[error("truncation dominates: boundary mass fraction {0:e}")]
    Truncation(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cache file error: {0}")]
    Cache(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
