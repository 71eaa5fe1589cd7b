pub mod check;
pub mod decay;
pub mod fundsol;
pub mod repr;
pub mod report;
pub mod scenario;

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// A numerical tolerance was exceeded.
    Fail,
}

/// Maps core errors on user-supplied data to input errors.
pub fn core<T>(r: oseen_tp::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| crate::io::input_err(e.to_string()))
}
