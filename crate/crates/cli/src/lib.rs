//! Instance files, the verification driver and report rendering behind the `coringlab` binary.

pub mod instance;
pub mod render;
pub mod verify;

pub use instance::Instance;
pub use verify::{verify, Options, Suite, VerificationReport};

/// `CORINGLAB_PRIME`, falling back to 2.
pub fn prime_from_env() -> anyhow::Result<u64> {
    match std::env::var("CORINGLAB_PRIME") {
        Err(_) => Ok(2),
        Ok(v) => {
            let p: u64 = v.trim().parse().map_err(|_| anyhow::anyhow!("CORINGLAB_PRIME={v:?} is not a number"))?;
            anyhow::ensure!(coringlab_core::linalg::is_prime(p), "CORINGLAB_PRIME={p} is not prime");
            Ok(p)
        }
    }
}
