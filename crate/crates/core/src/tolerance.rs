//! Process-wide multiplier applied to the numerical tolerances.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

static SCALE_BITS: AtomicU64 = AtomicU64::new(0x3FF0_0000_0000_0000);

/// Current multiplier, `1` unless changed.
pub fn scale() -> f64 {
    f64::from_bits(SCALE_BITS.load(Ordering::Relaxed))
}

/// Sets the multiplier; it must be finite and positive.
pub fn set_scale(s: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Precondition(format!("tolerance scale must be finite and positive, got {s}")));
    }
    SCALE_BITS.store(s.to_bits(), Ordering::Relaxed);
    Ok(())
}

/// `tol` times the current multiplier.
pub fn scaled(tol: f64) -> f64 {
    tol * scale()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_and_rejects() {
        assert_eq!(scaled(2.0), 2.0 * scale());
        assert!(set_scale(0.0).is_err());
        assert!(set_scale(f64::NAN).is_err());
    }
}
