//! Exit-code classification: 0 success, 2 input error, 3 internal
//! invariant violation.

use mlab_core::ingest::IngestError;

/// Marker for conditions that indicate a bug rather than bad input.
#[derive(Debug)]
pub struct Internal(pub String);

impl std::fmt::Display for Internal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "internal invariant violated: {}", self.0)
    }
}

impl std::error::Error for Internal {}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<Internal>().is_some() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<IngestError>() {
            if matches!(e, IngestError::Shape(_) | IngestError::WrongStage { .. }) {
                return 3;
            }
        }
    }
    2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_errors_exit_2_internal_errors_exit_3() {
        let input: anyhow::Error = IngestError::MissingRequiredColumn("server".into()).into();
        assert_eq!(exit_code(&input), 2);

        let invariant: anyhow::Error = Internal("row count drifted".into()).into();
        assert_eq!(exit_code(&invariant), 3);

        let shape: anyhow::Error = IngestError::Shape("ragged matrix".into()).into();
        assert_eq!(exit_code(&shape), 3);

        let wrapped = invariant_context();
        assert_eq!(exit_code(&wrapped), 3);
    }

    fn invariant_context() -> anyhow::Error {
        use anyhow::Context;
        let result: anyhow::Result<()> = Err(Internal("x".into()).into());
        result.context("while running").unwrap_err()
    }
}
