//! Scoped operation counters.
//!
//! Counting is per thread: a [`CountingScope`] registers a fresh set of
//! counters on the current thread and every group operation executed on that
//! thread while the scope is alive is recorded into it. Scopes nest; an inner
//! scope's operations are also visible to the enclosing scopes.

use std::cell::RefCell;
use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

/// Number of expensive group operations performed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub g1_exp: u64,
    pub g2_exp: u64,
    pub gt_exp: u64,
    pub pairings: u64,
    pub hash_to_g1: u64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Op {
    G1Exp,
    G2Exp,
    GtExp,
    Pairing,
    HashToG1,
}

impl OpCounters {
    fn bump(&mut self, op: Op, n: u64) {
        match op {
            Op::G1Exp => self.g1_exp += n,
            Op::G2Exp => self.g2_exp += n,
            Op::GtExp => self.gt_exp += n,
            Op::Pairing => self.pairings += n,
            Op::HashToG1 => self.hash_to_g1 += n,
        }
    }
}

struct ThreadCounters {
    scopes: Vec<OpCounters>,
    paused: u32,
}

thread_local! {
    static COUNTERS: RefCell<ThreadCounters> = const {
        RefCell::new(ThreadCounters { scopes: Vec::new(), paused: 0 })
    };
}

pub(crate) fn record(op: Op, n: u64) {
    COUNTERS.with(|c| {
        let mut c = c.borrow_mut();
        if c.paused > 0 {
            return;
        }
        for scope in c.scopes.iter_mut() {
            scope.bump(op, n);
        }
    });
}

/// Runs `f` without recording any operation into the active scopes.
///
/// Used for local self-checks (e.g. a prover validating its own witness)
/// that are not part of the protocol's computational cost.
pub fn uncounted<R>(f: impl FnOnce() -> R) -> R {
    struct Resume;
    impl Drop for Resume {
        fn drop(&mut self) {
            COUNTERS.with(|c| c.borrow_mut().paused -= 1);
        }
    }
    COUNTERS.with(|c| c.borrow_mut().paused += 1);
    let _resume = Resume;
    f()
}

/// A live counting scope bound to the current thread.
///
/// Scopes must be closed in LIFO order; dropping a scope closes it.
pub struct CountingScope {
    depth: usize,
    // Not Send: the counters live in thread-local storage.
    _thread: PhantomData<*const ()>,
}

impl CountingScope {
    pub fn begin() -> Self {
        let depth = COUNTERS.with(|c| {
            let mut c = c.borrow_mut();
            c.scopes.push(OpCounters::default());
            c.scopes.len()
        });
        CountingScope {
            depth,
            _thread: PhantomData,
        }
    }

    /// Snapshot of the counts recorded so far.
    pub fn counters(&self) -> OpCounters {
        COUNTERS.with(|c| c.borrow().scopes[self.depth - 1])
    }

    pub fn reset(&self) {
        COUNTERS.with(|c| c.borrow_mut().scopes[self.depth - 1] = OpCounters::default());
    }

    pub fn finish(self) -> OpCounters {
        self.counters()
    }
}

impl Drop for CountingScope {
    fn drop(&mut self) {
        COUNTERS.with(|c| {
            let mut c = c.borrow_mut();
            debug_assert_eq!(
                c.scopes.len(),
                self.depth,
                "counting scopes closed out of order"
            );
            c.scopes.truncate(self.depth - 1);
        });
    }
}

/// Runs `f` inside a fresh counting scope and returns its result with the counts.
pub fn count_ops<R>(f: impl FnOnce() -> R) -> (R, OpCounters) {
    let scope = CountingScope::begin();
    let out = f();
    (out, scope.finish())
}
