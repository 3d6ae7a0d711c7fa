//! In-memory review sessions keyed by random ids, expired after an idle TTL.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use expertfind_core::ReviewSession;
use parking_lot::Mutex;

/// One live session. The inner mutex serializes every operation on it.
pub struct SessionSlot {
    pub session: Mutex<ReviewSession>,
    touched: Mutex<Instant>,
}

pub struct SessionStore {
    ttl: Duration,
    slots: Mutex<HashMap<String, Arc<SessionSlot>>>,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> Self {
        Self {
            ttl,
            slots: Mutex::new(HashMap::new()),
        }
    }

    pub fn new_id() -> String {
        uuid::Uuid::new_v4().simple().to_string()
    }

    pub fn insert(&self, session: ReviewSession) -> Arc<SessionSlot> {
        let id = session.id().to_owned();
        let slot = Arc::new(SessionSlot {
            session: Mutex::new(session),
            touched: Mutex::new(Instant::now()),
        });
        let mut slots = self.slots.lock();
        self.evict_expired(&mut slots);
        slots.insert(id, Arc::clone(&slot));
        slot
    }

    /// The session with `id`, refreshing its idle timer, or `None` when
    /// unknown or expired.
    pub fn get(&self, id: &str) -> Option<Arc<SessionSlot>> {
        let mut slots = self.slots.lock();
        self.evict_expired(&mut slots);
        let slot = slots.get(id)?;
        *slot.touched.lock() = Instant::now();
        Some(Arc::clone(slot))
    }

    pub fn len(&self) -> usize {
        let mut slots = self.slots.lock();
        self.evict_expired(&mut slots);
        slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn evict_expired(&self, slots: &mut HashMap<String, Arc<SessionSlot>>) {
        let now = Instant::now();
        slots.retain(|id, slot| {
            let live = now.duration_since(*slot.touched.lock()) < self.ttl;
            if !live {
                tracing::debug!(session = %id, "session expired");
            }
            live
        });
    }
}
