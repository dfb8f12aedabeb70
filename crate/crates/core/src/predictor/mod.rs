//! Masked-token predictors.
//!
//! [`OfflinePredictor`] is a frequency model that needs no ML runtime;
//! [`RemotePredictor`] speaks the HTTP+JSON protocol of an MLM service:
//!
//! ```text
//! GET  /handshake -> {"mask_token": str, "max_input_tokens": int, "model_id": str}
//! POST /predict   {"text": str, "top_k": int} -> {"predictions": [{"token": str, "score": num}]}
//! ```

mod offline;
mod remote;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::masking::MaskedSequence;

pub use offline::OfflinePredictor;
pub use remote::{RemoteConfig, RemotePredictor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub token: String,
    pub score: f64,
}

impl Prediction {
    pub fn new(token: impl Into<String>, score: f64) -> Self {
        Prediction { token: token.into(), score }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictorHandshake {
    pub mask_token: String,
    pub max_input_tokens: usize,
    pub model_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PredictorError {
    #[error("predictor unavailable: {0}")]
    Unavailable(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid request: {0}")]
    InvalidInput(String),
}

/// Score descending, then token ascending.
pub fn prediction_order(a: &Prediction, b: &Prediction) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.token.cmp(&b.token))
}

pub fn sort_predictions(predictions: &mut [Prediction]) {
    predictions.sort_by(prediction_order);
}

/// Checks the single-mask and `top_k` preconditions shared by all predictors.
pub fn check_request(seq: &MaskedSequence, top_k: usize) -> Result<(), PredictorError> {
    if top_k == 0 {
        return Err(PredictorError::InvalidInput("top_k must be at least 1".into()));
    }
    match seq.placeholder_count() {
        1 => Ok(()),
        n => Err(PredictorError::InvalidInput(format!(
            "expected exactly one `{}` placeholder, found {n}",
            seq.placeholder
        ))),
    }
}

pub trait Predictor: Send + Sync {
    fn handshake(&self) -> Result<PredictorHandshake, PredictorError>;

    /// At most `top_k` predictions, sorted by [`prediction_order`].
    fn predict(&self, seq: &MaskedSequence, top_k: usize) -> Result<Vec<Prediction>, PredictorError>;

    /// Answers in request order.
    fn predict_batch(
        &self,
        seqs: &[MaskedSequence],
        top_k: usize,
    ) -> Vec<Result<Vec<Prediction>, PredictorError>> {
        seqs.iter().map(|s| self.predict(s, top_k)).collect()
    }
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn handshake(&self) -> Result<PredictorHandshake, PredictorError> {
        (**self).handshake()
    }

    fn predict(&self, seq: &MaskedSequence, top_k: usize) -> Result<Vec<Prediction>, PredictorError> {
        (**self).predict(seq, top_k)
    }

    fn predict_batch(
        &self,
        seqs: &[MaskedSequence],
        top_k: usize,
    ) -> Vec<Result<Vec<Prediction>, PredictorError>> {
        (**self).predict_batch(seqs, top_k)
    }
}
