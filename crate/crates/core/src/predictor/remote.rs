//! HTTP client for an MLM prediction service.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{check_request, sort_predictions, Prediction, Predictor, PredictorError, PredictorHandshake};
use crate::masking::MaskedSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub timeout: Duration,
    pub attempts: u32,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
    pub max_in_flight: usize,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            timeout: Duration::from_secs(30),
            attempts: 3,
            initial_backoff: Duration::from_millis(200),
            max_backoff: Duration::from_secs(2),
            max_in_flight: 4,
        }
    }
}

#[derive(Serialize)]
struct PredictRequest<'a> {
    text: &'a str,
    top_k: usize,
}

#[derive(Deserialize)]
struct PredictResponse {
    predictions: Vec<Prediction>,
}

pub struct RemotePredictor {
    config: RemoteConfig,
    agent: ureq::Agent,
}

enum Failure {
    Retry(String),
    Fatal(PredictorError),
}

impl RemotePredictor {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        RemotePredictor { config, agent }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn with_retries<T>(&self, mut call: impl FnMut() -> Result<T, Failure>) -> Result<T, PredictorError> {
        let mut delay = self.config.initial_backoff;
        let mut last = String::new();
        for attempt in 0..self.config.attempts.max(1) {
            if attempt > 0 {
                thread::sleep(delay);
                delay = (delay * 2).min(self.config.max_backoff);
            }
            match call() {
                Ok(v) => return Ok(v),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retry(msg)) => last = msg,
            }
        }
        Err(PredictorError::Unavailable(format!(
            "{} after {} attempts: {last}",
            self.config.endpoint, self.config.attempts
        )))
    }

    fn classify(err: ureq::Error) -> Failure {
        match err {
            ureq::Error::Status(400, resp) => {
                let body = resp.into_string().unwrap_or_default();
                Failure::Fatal(PredictorError::InvalidInput(body))
            }
            ureq::Error::Status(503, _) => Failure::Retry("service reports model not loaded (503)".into()),
            ureq::Error::Status(code, _) if code >= 500 => Failure::Retry(format!("status {code}")),
            ureq::Error::Status(code, _) => {
                Failure::Fatal(PredictorError::Protocol(format!("unexpected status {code}")))
            }
            ureq::Error::Transport(t) => Failure::Retry(t.to_string()),
        }
    }
}

fn check_predictions(mut predictions: Vec<Prediction>, top_k: usize) -> Result<Vec<Prediction>, PredictorError> {
    if let Some(bad) = predictions.iter().find(|p| !(p.score.is_finite() && (0.0..=1.0).contains(&p.score))) {
        return Err(PredictorError::Protocol(format!(
            "score {} for `{}` is outside [0, 1]",
            bad.score, bad.token
        )));
    }
    sort_predictions(&mut predictions);
    predictions.truncate(top_k);
    Ok(predictions)
}

impl Predictor for RemotePredictor {
    fn handshake(&self) -> Result<PredictorHandshake, PredictorError> {
        let url = format!("{}/handshake", self.config.endpoint);
        let hs: PredictorHandshake = self.with_retries(|| {
            let resp = self.agent.get(&url).call().map_err(Self::classify)?;
            resp.into_json()
                .map_err(|e| Failure::Fatal(PredictorError::Protocol(format!("handshake body: {e}"))))
        })?;
        if hs.mask_token.is_empty() || hs.max_input_tokens == 0 {
            return Err(PredictorError::Protocol(
                "handshake needs a non-empty mask token and a positive input budget".into(),
            ));
        }
        Ok(hs)
    }

    fn predict(&self, seq: &MaskedSequence, top_k: usize) -> Result<Vec<Prediction>, PredictorError> {
        check_request(seq, top_k)?;
        let url = format!("{}/predict", self.config.endpoint);
        let body = PredictRequest { text: &seq.text, top_k };
        let resp: PredictResponse = self.with_retries(|| {
            let resp = self.agent.post(&url).send_json(&body).map_err(Self::classify)?;
            resp.into_json()
                .map_err(|e| Failure::Fatal(PredictorError::Protocol(format!("predict body: {e}"))))
        })?;
        check_predictions(resp.predictions, top_k)
    }

    /// Up to `max_in_flight` concurrent requests; answers stay paired with
    /// their sequences.
    fn predict_batch(
        &self,
        seqs: &[MaskedSequence],
        top_k: usize,
    ) -> Vec<Result<Vec<Prediction>, PredictorError>> {
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<Vec<Prediction>, PredictorError>>>> =
            seqs.iter().map(|_| Mutex::new(None)).collect();
        let workers = self.config.max_in_flight.max(1).min(seqs.len().max(1));
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= seqs.len() {
                        break;
                    }
                    let answer = self.predict(&seqs[i], top_k);
                    *slots[i].lock().expect("slot lock") = Some(answer);
                });
            }
        });
        slots
            .into_iter()
            .map(|m| m.into_inner().expect("slot lock").expect("every slot answered"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_checks() {
        let preds = vec![Prediction::new("b", 0.1), Prediction::new("a", 0.7), Prediction::new("c", 0.2)];
        let out = check_predictions(preds, 2).unwrap();
        assert_eq!(out, vec![Prediction::new("a", 0.7), Prediction::new("c", 0.2)]);
        assert!(matches!(
            check_predictions(vec![Prediction::new("x", 1.5)], 1),
            Err(PredictorError::Protocol(_))
        ));
    }

    #[test]
    fn endpoint_is_normalized() {
        assert_eq!(RemoteConfig::new("http://h:1/").endpoint, "http://h:1");
    }
}
