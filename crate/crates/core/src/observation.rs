//! Per-terminal partial observations.
//!
//! Each terminal keeps a 3 x W ternary history: its own actions, the
//! consolidated activity of its audible neighbors, and the consolidated
//! activity of its hidden neighbors. Carrier sensing fills the middle row
//! while the terminal is silent; AP acknowledgements let it look back over
//! the judged packet window and fill in what sensing could not see.

use std::collections::VecDeque;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::medium::Sense;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Entry {
    Zero,
    One,
    Unk,
}

impl Entry {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Entry::One
        } else {
            Entry::Zero
        }
    }

    /// Network encoding: 0 -> 0.0, 1 -> 1.0, unknown -> 0.5.
    pub fn encode<F: Float>(self) -> F {
        match self {
            Entry::Zero => F::zero(),
            Entry::One => F::one(),
            Entry::Unk => F::from(0.5).unwrap(),
        }
    }

    pub fn known(self) -> Option<bool> {
        match self {
            Entry::Zero => Some(false),
            Entry::One => Some(true),
            Entry::Unk => None,
        }
    }
}

/// One slot of a terminal's view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub own: bool,
    pub oh: Entry,
    pub th: Entry,
}

/// Which look-back branch an acknowledgement triggered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Revision {
    /// Own packet acknowledged: nobody else was on the air.
    OwnSuccess,
    /// Silent and sensed idle throughout: a hidden neighbor succeeded.
    HiddenSuccess,
    /// Silent and sensed busy throughout: an audible neighbor succeeded.
    AudibleSuccess,
    /// No acknowledgement, or a window too mixed to reason about.
    None,
}

/// The 3 x W observation, oldest column first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    width: usize,
    columns: VecDeque<Column>,
}

impl Observation {
    /// History of an idle terminal that sensed an idle channel throughout.
    pub fn fresh(width: usize) -> Self {
        let col = Column { own: false, oh: Entry::Zero, th: Entry::Unk };
        Self { width, columns: std::iter::repeat(col).take(width).collect() }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &Column> + '_ {
        self.columns.iter()
    }

    /// Column `age` slots back; `age = 1` is the most recent.
    pub fn recent(&self, age: usize) -> &Column {
        &self.columns[self.width - age]
    }

    /// Appends the column for the slot just finished.
    pub fn sense_update(&mut self, own: bool, sense: Sense) {
        let oh = match (own, sense) {
            (true, _) | (false, Sense::NotSensed) => Entry::Unk,
            (false, Sense::Busy) => Entry::One,
            (false, Sense::Idle) => Entry::Zero,
        };
        self.columns.pop_front();
        self.columns.push_back(Column { own, oh, th: Entry::Unk });
    }

    /// Revises the last `d` columns after an acknowledgement judging them.
    pub fn lookback_revise(&mut self, ack: bool, d: usize) -> Revision {
        if !ack {
            return Revision::None;
        }
        let start = self.width - d;
        let window = self.columns.range(start..);
        let mut all_own = true;
        let mut all_silent_idle = true;
        let mut all_silent_busy = true;
        for c in window {
            all_own &= c.own;
            all_silent_idle &= !c.own && c.oh == Entry::Zero;
            all_silent_busy &= !c.own && c.oh == Entry::One;
        }
        let window = self.columns.range_mut(start..);
        if all_own {
            for c in window {
                c.oh = Entry::Zero;
                c.th = Entry::Zero;
            }
            Revision::OwnSuccess
        } else if all_silent_idle {
            for c in window {
                c.th = Entry::One;
            }
            Revision::HiddenSuccess
        } else if all_silent_busy {
            for c in window {
                c.th = Entry::Zero;
            }
            Revision::AudibleSuccess
        } else {
            Revision::None
        }
    }

    /// Share of unknown entries in the two neighbor rows.
    pub fn unknown_fraction(&self) -> f64 {
        let unk: usize = self
            .columns
            .iter()
            .map(|c| (c.oh == Entry::Unk) as usize + (c.th == Entry::Unk) as usize)
            .sum();
        unk as f64 / (2 * self.width) as f64
    }

    /// Time-major encoding `[t * 3 + row]`, oldest slot first.
    pub fn encode_into<F: Float>(&self, out: &mut [F]) {
        assert_eq!(out.len(), 3 * self.width);
        for (t, c) in self.columns.iter().enumerate() {
            out[3 * t] = Entry::from_bit(c.own).encode();
            out[3 * t + 1] = c.oh.encode();
            out[3 * t + 2] = c.th.encode();
        }
    }
}

/// Alternative layout: own action, sensed neighbor activity and the raw
/// ACK bit, with no look-back inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltObservation {
    width: usize,
    columns: VecDeque<(bool, Entry, bool)>,
}

impl AltObservation {
    pub fn fresh(width: usize) -> Self {
        Self { width, columns: std::iter::repeat((false, Entry::Zero, false)).take(width).collect() }
    }

    /// Appends the column for the slot just finished; `ack` marks an ACK
    /// emitted at the end of that slot.
    pub fn update(&mut self, own: bool, sense: Sense, ack: bool) {
        let oh = match (own, sense) {
            (true, _) | (false, Sense::NotSensed) => Entry::Unk,
            (false, Sense::Busy) => Entry::One,
            (false, Sense::Idle) => Entry::Zero,
        };
        self.columns.pop_front();
        self.columns.push_back((own, oh, ack));
    }

    pub fn unknown_fraction(&self) -> f64 {
        let unk = self.columns.iter().filter(|c| c.1 == Entry::Unk).count();
        unk as f64 / self.width as f64
    }

    pub fn encode_into<F: Float>(&self, out: &mut [F]) {
        assert_eq!(out.len(), 3 * self.width);
        for (t, &(own, oh, ack)) in self.columns.iter().enumerate() {
            out[3 * t] = Entry::from_bit(own).encode();
            out[3 * t + 1] = oh.encode();
            out[3 * t + 2] = Entry::from_bit(ack).encode();
        }
    }
}

/// Either observation layout behind one interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ObservationBuffer {
    LookBack(Observation),
    AckRow(AltObservation),
}

impl ObservationBuffer {
    pub fn new(kind: ObservationKind, width: usize) -> Self {
        match kind {
            ObservationKind::LookBack => Self::LookBack(Observation::fresh(width)),
            ObservationKind::AckRow => Self::AckRow(AltObservation::fresh(width)),
        }
    }

    /// Sensing update followed by look-back revision for the finished slot.
    pub fn advance(&mut self, own: bool, sense: Sense, ack: bool, d: usize) -> Revision {
        match self {
            Self::LookBack(o) => {
                o.sense_update(own, sense);
                o.lookback_revise(ack, d)
            }
            Self::AckRow(o) => {
                o.update(own, sense, ack);
                Revision::None
            }
        }
    }

    pub fn unknown_fraction(&self) -> f64 {
        match self {
            Self::LookBack(o) => o.unknown_fraction(),
            Self::AckRow(o) => o.unknown_fraction(),
        }
    }

    pub fn encode_into<F: Float>(&self, out: &mut [F]) {
        match self {
            Self::LookBack(o) => o.encode_into(out),
            Self::AckRow(o) => o.encode_into(out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationKind {
    #[default]
    LookBack,
    AckRow,
}
