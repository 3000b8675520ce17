use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The eight analogue channels of the 9-2LE dataset, in wire order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    IA,
    IB,
    IC,
    IN,
    VA,
    VB,
    VC,
    VN,
}

impl Channel {
    pub const ALL: [Channel; 8] = [
        Channel::IA,
        Channel::IB,
        Channel::IC,
        Channel::IN,
        Channel::VA,
        Channel::VB,
        Channel::VC,
        Channel::VN,
    ];

    pub const PHASE_CURRENTS: [Channel; 3] = [Channel::IA, Channel::IB, Channel::IC];
    pub const PHASE_VOLTAGES: [Channel; 3] = [Channel::VA, Channel::VB, Channel::VC];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub const fn is_current(self) -> bool {
        (self as usize) < 4
    }

    pub const fn name(self) -> &'static str {
        match self {
            Channel::IA => "IA",
            Channel::IB => "IB",
            Channel::IC => "IC",
            Channel::IN => "IN",
            Channel::VA => "VA",
            Channel::VB => "VB",
            Channel::VC => "VC",
            Channel::VN => "VN",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown channel '{s}'"))
    }
}
