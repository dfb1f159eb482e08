//! Out-of-band voter notifications.

use std::sync::Mutex;

/// Sent once for every registration session appended to the ledger.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Notification {
    pub v_id: String,
    pub index: u64,
    pub d: u64,
    /// Encoded `V_e`, so the device can tell a renewal from a repeat.
    pub v_e: Vec<u8>,
}

#[derive(Debug, Default)]
pub struct Mailbox {
    events: Mutex<Vec<Notification>>,
}

impl Mailbox {
    pub(crate) fn deliver(&self, n: Notification) {
        self.events.lock().expect("mailbox poisoned").push(n);
    }

    pub fn all(&self) -> Vec<Notification> {
        self.events.lock().expect("mailbox poisoned").clone()
    }

    pub fn for_voter(&self, v_id: &str) -> Vec<Notification> {
        self.all().into_iter().filter(|n| n.v_id == v_id).collect()
    }

    pub fn len(&self) -> usize {
        self.events.lock().expect("mailbox poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
