use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument lies outside the range where the model is defined.
    #[error("`{name}` = {value} is out of range: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid photocount model: {0}")]
    InvalidModel(String),
    #[error("underdetermined fit: {0}")]
    Underdetermined(String),
    #[error("singular normal matrix; parameters are not identifiable from the data")]
    SingularJacobian,
    #[error("integration window contains no grid points")]
    EmptyWindow,
    #[error("malformed sample table: {0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Fails with [`Error::Domain`] unless `ok` holds.
pub(crate) fn ensure(ok: bool, name: &'static str, value: f64, expected: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain { name, value, expected })
    }
}
