//! Executable alignment schemes.

mod composition;
mod messages;
mod recovery;
mod run;
mod spec;

use thiserror::Error;

use crate::channel::ChannelError;
use crate::gfq::GfError;

pub use composition::{Composition, Compositions};
pub use messages::{decode, decode_child, random_messages, MessageBank, DEFAULT_MESSAGE_LEN};
pub use recovery::{recovery_check, recovery_check_matrices, satisfies_recovery, SlotUse};
pub use run::{
    beamform, child_run, jap_run, jap_run_with, japb_run, japb_run_with, ngjv_run, ngjv_run_with, subsets,
    tdma_run, ChildRun, ParentScheme, RoundRecord, RunOptions, SchemeId, SchemeRun, SubnetworkRun,
};
pub use spec::{Execution, SchemeSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("invalid composition {0:?}: parts must be positive and non-empty")]
    InvalidComposition(Vec<usize>),
    #[error("cannot parse composition from {0:?}")]
    Parse(String),
    #[error("expected {expected} users, found {found}")]
    UserMismatch { expected: usize, found: usize },
    #[error("receiver {receiver} out of range for {n} users")]
    ReceiverOutOfRange { receiver: usize, n: usize },
    #[error("alignment schemes need q >= 3, got q = {0}")]
    FieldTooSmall(u32),
    #[error("recovery check needs a non-empty history")]
    EmptyHistory,
    #[error("a round exceeded the wait limit of {0} slots")]
    WaitExceeded(u64),
    #[error("child scheme needs 1 <= m <= n, got m = {m}, n = {n}")]
    ChildSize { m: usize, n: usize },
    #[error("run is incomplete: receiver {receiver} was never served")]
    Incomplete { receiver: usize },
    #[error("message bank mismatch: {0}")]
    BankMismatch(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}
