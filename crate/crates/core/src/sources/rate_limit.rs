use crate::record::SourceId;
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

/// Spaces successive requests to the same source by a fixed interval.
/// Each source has its own clock; different sources never wait on each
/// other.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    last_grant: [Mutex<Option<Instant>>; 3],
}

/// Proof that a request may start now.
#[derive(Debug, Clone, Copy)]
pub struct Permit {
    pub source: SourceId,
    pub granted_at: Instant,
    pub waited: Duration,
}

impl RateLimiter {
    pub fn new(interval: Duration) -> Self {
        RateLimiter {
            interval,
            last_grant: Default::default(),
        }
    }

    pub fn interval(&self) -> Duration {
        self.interval
    }

    /// Blocks until `interval` has passed since the previous permit for
    /// `source`. The first permit is immediate.
    pub fn acquire(&self, source: SourceId) -> Permit {
        let slot = &self.last_grant[usize::from(source.rank() - 1)];
        // holding the lock while sleeping serializes same-source callers
        let mut last = slot.lock().unwrap_or_else(|e| e.into_inner());
        let start = Instant::now();
        if let Some(prev) = *last {
            let ready = prev + self.interval;
            let now = Instant::now();
            if ready > now {
                thread::sleep(ready - now);
            }
        }
        let granted_at = Instant::now();
        *last = Some(granted_at);
        Permit {
            source,
            granted_at,
            waited: granted_at - start,
        }
    }
}
