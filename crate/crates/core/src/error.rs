// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (bad index,
    /// nonpositive radius, mismatched spaces, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The configuration is well formed but not runnable, e.g. the Hilbert
    /// space exceeds the dimension cap.
    #[error("rejected configuration: {0}")]
    RejectedConfig(String),

    #[error("tau = {tau} lies outside the sampled worldline range [{start}, {end}]")]
    Extrapolation { tau: f64, start: f64, end: f64 },

    #[error("no level crossing: mode frequency {omega0} does not exceed detector gap {gap}")]
    NoCrossing { omega0: f64, gap: f64 },

    #[error("norm drift {drift:e} exceeds tolerance {tolerance:e} first at tau = {tau}")]
    IntegrationAccuracy {
        tau: f64,
        drift: f64,
        tolerance: f64,
    },

    #[error("phase schedule undersampled: spacing {spacing} exceeds required {required}")]
    Sampling { spacing: f64, required: f64 },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
