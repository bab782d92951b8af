use serde::{Deserialize, Serialize};

pub type StimulusId = usize;

/// How a stimulus is delivered, i.e. which routers process it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StimulusKind {
    /// Event local to the originating router (host events, timers, sends).
    #[serde(rename = "orig")]
    Orig,
    /// Message processed by its destination router only.
    #[serde(rename = "dst")]
    Dst,
    /// Multicast message processed by all routers except the originator.
    #[serde(rename = "mcast")]
    Mcast,
    /// Multicast processed by all other downstream routers plus exactly one
    /// upstream router (the destination).
    #[serde(rename = "mcastDownstream")]
    McastDownstream,
}

impl StimulusKind {
    /// Message stimuli travel on the LAN and can be selectively lost;
    /// local events cannot.
    pub fn is_message(self) -> bool {
        !matches!(self, StimulusKind::Orig)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stimulus {
    pub name: String,
    pub kind: StimulusKind,
}
