use std::process::ExitCode;

use valuescope_gateway::GatewayError;

pub const OK: u8 = 0;
pub const VALIDATION: u8 = 1;
pub const IO: u8 = 2;
pub const GATEWAY: u8 = 3;

/// Input that parsed but breaks a rule; exits with [`VALIDATION`].
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Invalid(pub String);

fn core_code(e: &valuescope_core::Error) -> u8 {
    match e {
        valuescope_core::Error::Io { .. } => IO,
        _ => VALIDATION,
    }
}

/// Exit code for the first classifiable error in the chain.
pub fn code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(g) = cause.downcast_ref::<GatewayError>() {
            return match g {
                GatewayError::Io { .. } => IO,
                GatewayError::Core(c) => core_code(c),
                _ => GATEWAY,
            };
        }
        if let Some(c) = cause.downcast_ref::<valuescope_core::Error>() {
            return core_code(c);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return IO;
        }
        if cause.downcast_ref::<Invalid>().is_some() {
            return VALIDATION;
        }
    }
    VALIDATION
}

pub fn exit_code(code: u8) -> ExitCode {
    ExitCode::from(code)
}
