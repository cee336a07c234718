use rand::Rng;

use crate::gfq::{FieldVector, PrimeField};

use super::recovery::SlotUse;
use super::run::{ChildRun, SchemeRun};
use super::SchemeError;

/// Default message length in symbols.
pub const DEFAULT_MESSAGE_LEN: usize = 8;

/// Messages `w_i` and the pseudomessages each receiver stored at every
/// matched slot: `y_j[t] = sum_i h_ji[t] g_i[t] w_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageBank {
    messages: Vec<FieldVector>,
    slots: Vec<SlotUse>,
    /// `[slot index][receiver]`.
    pseudomessages: Vec<Vec<FieldVector>>,
}

/// `n` messages of `len` uniform symbols.
pub fn random_messages<R: Rng + ?Sized>(n: usize, field: PrimeField, len: usize, rng: &mut R) -> Vec<FieldVector> {
    (0..n)
        .map(|_| {
            let symbols = (0..len)
                .map(|_| field.element(rng.gen_range(0..field.q()) as u64))
                .collect();
            FieldVector::new(field, symbols).expect("message length is positive")
        })
        .collect()
}

fn observe(slot: &SlotUse, receiver: usize, messages: &[FieldVector]) -> FieldVector {
    let mut acc = FieldVector::zeros(messages[0].field(), messages[0].len()).unwrap();
    for (i, w) in messages.iter().enumerate() {
        acc = acc.try_add(&w.scale(slot.effective(receiver, i))).unwrap();
    }
    acc
}

impl MessageBank {
    /// Transmits `messages` over the matched slots of `run`.
    pub fn transmit(run: &SchemeRun, messages: Vec<FieldVector>) -> Result<Self, SchemeError> {
        if messages.len() != run.n {
            return Err(SchemeError::BankMismatch(format!(
                "{} messages for {} users",
                messages.len(),
                run.n
            )));
        }
        let len = messages[0].len();
        if messages.iter().any(|w| w.len() != len || w.field() != run.field) {
            return Err(SchemeError::BankMismatch(
                "messages must share one field and length".into(),
            ));
        }
        let pseudomessages = run
            .slots
            .iter()
            .map(|s| (0..run.n).map(|j| observe(s, j, &messages)).collect())
            .collect();
        Ok(Self {
            messages,
            slots: run.slots.clone(),
            pseudomessages,
        })
    }

    pub fn messages(&self) -> &[FieldVector] {
        &self.messages
    }

    pub fn pseudomessage(&self, slot_index: usize, receiver: usize) -> &FieldVector {
        &self.pseudomessages[slot_index][receiver]
    }

    /// Recomputes every stored pseudomessage from the stored matrices, gains
    /// and messages.
    pub fn verify(&self) -> bool {
        self.slots.iter().zip(&self.pseudomessages).all(|(s, row)| {
            row.iter()
                .enumerate()
                .all(|(j, y)| *y == observe(s, j, &self.messages))
        })
    }

    /// Adds 1 to one stored symbol.
    pub fn corrupt(&mut self, slot_index: usize, receiver: usize, symbol: usize) {
        let y = &mut self.pseudomessages[slot_index][receiver];
        let old = y.get(symbol);
        y.set(symbol, old + old.field().one()).unwrap();
    }
}

/// Each receiver's combination of its stored pseudomessages with its round
/// coefficients. Equals the transmitted messages for every complete run.
pub fn decode(run: &SchemeRun, bank: &MessageBank) -> Result<Vec<FieldVector>, SchemeError> {
    if bank.slots != run.slots {
        return Err(SchemeError::BankMismatch(
            "bank was built for a different run".into(),
        ));
    }
    (0..run.n)
        .map(|j| {
            let (round, pos) = run
                .serving_round(j)
                .ok_or(SchemeError::Incomplete { receiver: j })?;
            let lambdas = &round.lambdas[pos];
            let mut acc = FieldVector::zeros(run.field, bank.messages[0].len())?;
            for (m, lam) in lambdas.iter().enumerate() {
                if !lam.is_zero() {
                    acc = acc.try_add(&bank.pseudomessage(m, j).scale(lam))?;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Decodes every sub-network of a child run; `banks[s]` belongs to
/// `child.subruns[s]`.
pub fn decode_child(child: &ChildRun, banks: &[MessageBank]) -> Result<Vec<Vec<FieldVector>>, SchemeError> {
    if banks.len() != child.subruns.len() {
        return Err(SchemeError::BankMismatch(format!(
            "{} banks for {} sub-networks",
            banks.len(),
            child.subruns.len()
        )));
    }
    child
        .subruns
        .iter()
        .zip(banks)
        .map(|(s, b)| decode(&s.run, b))
        .collect()
}
