use std::time::{Duration, Instant};

use parking_lot::Mutex;

/// Token bucket refilled at `rate` tokens per second, holding at most
/// `capacity` tokens.
#[derive(Debug)]
pub struct TokenBucket {
    rate: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    pub fn new(rate: f64, capacity: f64) -> Self {
        let capacity = capacity.max(1.0);
        Self {
            rate,
            capacity,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    /// Time to wait before one token is available; takes it if available.
    fn try_take(&self, now: Instant) -> Option<Duration> {
        let mut st = self.state.lock();
        let elapsed = now.saturating_duration_since(st.1).as_secs_f64();
        st.0 = (st.0 + elapsed * self.rate).min(self.capacity);
        st.1 = now;
        if st.0 >= 1.0 {
            st.0 -= 1.0;
            None
        } else {
            Some(Duration::from_secs_f64((1.0 - st.0) / self.rate))
        }
    }

    /// Blocks until a token is available. A non-positive rate never blocks.
    pub fn acquire(&self) {
        if self.rate <= 0.0 || !self.rate.is_finite() {
            return;
        }
        while let Some(wait) = self.try_take(Instant::now()) {
            std::thread::sleep(wait);
        }
    }
}
