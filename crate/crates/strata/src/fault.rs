//! Switchable single-sign faults for self-diagnosis.
//!
//! Each fault flips exactly one sign at one site in one module. They exist
//! so the test suite (and `strata selfcheck --inject-fault`) can demonstrate
//! that the verification layers actually catch sign errors. The switch is
//! thread-local: a fault armed on one test thread never leaks into another.

use std::cell::Cell;

/// One deliberately wrong sign, by site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fault {
    /// Koszul kernel: drop the sign for swapping two odd elements.
    KoszulOddSwap,
    /// Perturbed homotopy assembled as `h - h X h` instead of `h + h X h`.
    PerturbHomotopy,
    /// Outer sign of the associativity-tower residual flipped.
    StasheffOuter,
    /// Transfer seed `γ₁ := +j` instead of `γ₁ := -j`.
    TransferSeed,
    /// Curvature term in the covariant-letter exchange rule flipped.
    CurvatureSign,
}

impl Fault {
    /// All faults, in a fixed order.
    pub const ALL: [Fault; 5] = [
        Fault::KoszulOddSwap,
        Fault::PerturbHomotopy,
        Fault::StasheffOuter,
        Fault::TransferSeed,
        Fault::CurvatureSign,
    ];

    /// Stable name used by the CLI `--inject-fault` flag.
    pub fn name(self) -> &'static str {
        match self {
            Fault::KoszulOddSwap => "koszul-odd-swap",
            Fault::PerturbHomotopy => "perturb-homotopy",
            Fault::StasheffOuter => "stasheff-outer",
            Fault::TransferSeed => "transfer-seed",
            Fault::CurvatureSign => "curvature-sign",
        }
    }

    /// Parse a fault name as accepted by `name`.
    pub fn from_name(s: &str) -> Option<Fault> {
        Fault::ALL.into_iter().find(|f| f.name() == s)
    }
}

thread_local! {
    static ACTIVE: Cell<Option<Fault>> = const { Cell::new(None) };
}

/// True if `fault` is armed on the current thread.
pub fn armed(fault: Fault) -> bool {
    ACTIVE.with(|c| c.get() == Some(fault))
}

/// Arm `fault` on the current thread until the returned guard drops.
#[must_use = "the fault disarms when the guard drops"]
pub fn inject(fault: Fault) -> FaultGuard {
    ACTIVE.with(|c| c.set(Some(fault)));
    FaultGuard(())
}

/// RAII guard returned by [`inject`]; disarms the fault on drop.
pub struct FaultGuard(());

impl Drop for FaultGuard {
    fn drop(&mut self) {
        ACTIVE.with(|c| c.set(None));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_scopes_the_fault() {
        assert!(!armed(Fault::KoszulOddSwap));
        {
            let _g = inject(Fault::KoszulOddSwap);
            assert!(armed(Fault::KoszulOddSwap));
            assert!(!armed(Fault::TransferSeed));
        }
        assert!(!armed(Fault::KoszulOddSwap));
    }

    #[test]
    fn names_round_trip() {
        for f in Fault::ALL {
            assert_eq!(Fault::from_name(f.name()), Some(f));
        }
        assert_eq!(Fault::from_name("no-such-fault"), None);
    }
}
