//! Fault injection used by the mutation-sensitivity checks.
//!
//! Each [`Mutation`] corrupts exactly one formula. A mutation is active either
//! for the current thread (scoped, see [`with`]) or for the whole process
//! (see [`set_global`], used by the command-line tool).

use std::cell::Cell;
use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// Drop the `(-1)^j` sign in the descended polynomial.
    DescendSign,
    /// Drop the `(n - i)` factor of the integration operator.
    IntegrateFactor,
    /// Drop the `tau(2)` term of the step exponent `E_i`.
    StepExponentTau2,
    /// Use the digits of `n` instead of `n - 1` in `tau`.
    TauOffset,
    /// Off-by-one in the factorial valuation.
    FactorialValuation,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::DescendSign,
        Mutation::IntegrateFactor,
        Mutation::StepExponentTau2,
        Mutation::TauOffset,
        Mutation::FactorialValuation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::DescendSign => "descend-sign",
            Mutation::IntegrateFactor => "integrate-factor",
            Mutation::StepExponentTau2 => "step-exponent-tau2",
            Mutation::TauOffset => "tau-offset",
            Mutation::FactorialValuation => "factorial-valuation",
        }
    }

    pub fn from_name(name: &str) -> Option<Mutation> {
        Mutation::ALL.into_iter().find(|m| m.name() == name)
    }

    fn code(self) -> u8 {
        self as u8 + 1
    }
}

thread_local! {
    static LOCAL: Cell<Option<Mutation>> = const { Cell::new(None) };
}

static GLOBAL: AtomicU8 = AtomicU8::new(0);

pub fn active(m: Mutation) -> bool {
    LOCAL.with(|c| c.get() == Some(m)) || GLOBAL.load(Ordering::Relaxed) == m.code()
}

/// Runs `f` with `m` active on the current thread only.
pub fn with<R>(m: Mutation, f: impl FnOnce() -> R) -> R {
    struct Reset(Option<Mutation>);
    impl Drop for Reset {
        fn drop(&mut self) {
            LOCAL.with(|c| c.set(self.0));
        }
    }
    let _reset = Reset(LOCAL.with(|c| c.replace(Some(m))));
    f()
}

/// Activates `m` for every thread of the process.
pub fn set_global(m: Option<Mutation>) {
    GLOBAL.store(m.map_or(0, Mutation::code), Ordering::Relaxed);
}
