use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AcceptorError;
use crate::alphabet::{Alphabet, Word};

/// One LSTM layer. Gate rows are stacked in the order i, f, g, o.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LstmLayer {
    /// `4h × in`, row-major.
    pub w_input: Vec<f64>,
    /// `4h × h`, row-major.
    pub w_hidden: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Classifier {
    pub w: Vec<f64>,
    pub b: f64,
}

#[derive(Serialize, Deserialize)]
struct LstmFile {
    alphabet: Vec<String>,
    layers: Vec<LstmLayer>,
    classifier: Classifier,
}

/// Stacked LSTM over one-hot symbols followed by a linear threshold classifier.
#[derive(Clone, Debug)]
pub struct LstmModel {
    alphabet: Alphabet,
    hidden: usize,
    layers: Vec<LstmLayer>,
    classifier: Classifier,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmModel {
    pub fn new(alphabet: Alphabet, layers: Vec<LstmLayer>, classifier: Classifier) -> Result<Self, AcceptorError> {
        let bad = |m: String| Err(AcceptorError::Schema(m));
        let Some(first) = layers.first() else {
            return bad("an LSTM needs at least one layer".into());
        };
        if first.bias.len() % 4 != 0 || first.bias.is_empty() {
            return bad(format!("bias length {} is not a positive multiple of 4", first.bias.len()));
        }
        let h = first.bias.len() / 4;
        let mut input = alphabet.len();
        for (n, layer) in layers.iter().enumerate() {
            if layer.bias.len() != 4 * h {
                return bad(format!("layer {n}: bias has {} entries, expected {}", layer.bias.len(), 4 * h));
            }
            if layer.w_input.len() != 4 * h * input {
                return bad(format!(
                    "layer {n}: w_input has {} entries, expected {}×{}",
                    layer.w_input.len(),
                    4 * h,
                    input
                ));
            }
            if layer.w_hidden.len() != 4 * h * h {
                return bad(format!("layer {n}: w_hidden has {} entries, expected {}×{}", layer.w_hidden.len(), 4 * h, h));
            }
            input = h;
        }
        if classifier.w.len() != h {
            return bad(format!("classifier has {} weights, expected {h}", classifier.w.len()));
        }
        Ok(LstmModel { alphabet, hidden: h, layers, classifier })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Top-layer hidden state after reading `word` from zero initial states.
    pub fn forward(&self, word: &Word) -> Vec<f64> {
        let h = self.hidden;
        let mut hs = vec![vec![0.0; h]; self.layers.len()];
        let mut cs = vec![vec![0.0; h]; self.layers.len()];
        let mut gates = vec![0.0; 4 * h];
        for sym in word.iter() {
            for (n, layer) in self.layers.iter().enumerate() {
                gates.copy_from_slice(&layer.bias);
                if n == 0 {
                    let k = self.alphabet.len();
                    for (row, g) in gates.iter_mut().enumerate() {
                        *g += layer.w_input[row * k + sym.index()];
                    }
                } else {
                    let x = &hs[n - 1];
                    for (row, g) in gates.iter_mut().enumerate() {
                        *g += dot(&layer.w_input[row * h..(row + 1) * h], x);
                    }
                }
                let prev = &hs[n];
                for (row, g) in gates.iter_mut().enumerate() {
                    *g += dot(&layer.w_hidden[row * h..(row + 1) * h], prev);
                }
                let mut next_h = vec![0.0; h];
                for j in 0..h {
                    let i = sigmoid(gates[j]);
                    let f = sigmoid(gates[h + j]);
                    let g = gates[2 * h + j].tanh();
                    let o = sigmoid(gates[3 * h + j]);
                    cs[n][j] = f * cs[n][j] + i * g;
                    next_h[j] = o * cs[n][j].tanh();
                }
                hs[n] = next_h;
            }
        }
        hs.pop().expect("at least one layer")
    }

    pub fn classify(&self, h: &[f64]) -> bool {
        dot(&self.classifier.w, h) + self.classifier.b > 0.0
    }

    pub fn accepts(&self, word: &Word) -> bool {
        self.classify(&self.forward(word))
    }

    pub fn from_json(text: &str) -> Result<Self, AcceptorError> {
        let file: LstmFile = serde_json::from_str(text).map_err(|e| AcceptorError::Schema(e.to_string()))?;
        let alphabet = Alphabet::new(&file.alphabet).map_err(|e| AcceptorError::Schema(e.to_string()))?;
        LstmModel::new(alphabet, file.layers, file.classifier)
    }

    pub fn to_json(&self) -> String {
        let file = LstmFile {
            alphabet: self.alphabet.names().to_vec(),
            layers: self.layers.clone(),
            classifier: self.classifier.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn load(path: &Path) -> Result<Self, AcceptorError> {
        let text = std::fs::read_to_string(path).map_err(|e| AcceptorError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn one_unit(w_in: [f64; 8], w_h: [f64; 4], bias: [f64; 4], w: f64, b: f64) -> LstmModel {
        LstmModel::new(
            ab(),
            vec![LstmLayer { w_input: w_in.to_vec(), w_hidden: w_h.to_vec(), bias: bias.to_vec() }],
            Classifier { w: vec![w], b },
        )
        .unwrap()
    }

    #[test]
    fn zero_model_stays_at_zero() {
        let m = one_unit([0.0; 8], [0.0; 4], [0.0; 4], 1.0, 0.0);
        let w = ab().parse_word("abba").unwrap();
        assert_eq!(m.forward(&w), vec![0.0]);
        assert_eq!(m.forward(&Word::empty()), vec![0.0]);
    }

    #[test]
    fn one_unit_trace_matches_hand_recurrence() {
        // Rows i, f, g, o; columns a, b.
        let w_in = [0.5, -0.3, 0.2, 0.1, 0.9, -0.7, 0.4, 0.6];
        let w_h = [0.3, -0.2, 0.5, 0.1];
        let bias = [0.1, 0.2, -0.1, 0.05];
        let m = one_unit(w_in, w_h, bias, 1.0, 0.0);

        let s = |x: f64| 1.0 / (1.0 + (-x).exp());
        let (mut h, mut c) = (0.0f64, 0.0f64);
        for col in [0usize, 1] {
            let i = s(w_in[col] + w_h[0] * h + bias[0]);
            let f = s(w_in[2 + col] + w_h[1] * h + bias[1]);
            let g = (w_in[4 + col] + w_h[2] * h + bias[2]).tanh();
            let o = s(w_in[6 + col] + w_h[3] * h + bias[3]);
            c = f * c + i * g;
            h = o * c.tanh();
        }
        let out = m.forward(&ab().parse_word("ab").unwrap());
        assert!((out[0] - h).abs() < 1e-9, "{} vs {h}", out[0]);
    }

    #[test]
    fn classifier_threshold() {
        let pos = one_unit([0.0; 8], [0.0; 4], [0.0; 4], 0.0, 1.0);
        assert!(pos.classify(&[5.0]));
        let neg = one_unit([0.0; 8], [0.0; 4], [0.0; 4], 0.0, -1.0);
        assert!(!neg.classify(&[5.0]));
        let id = one_unit([0.0; 8], [0.0; 4], [0.0; 4], 1.0, 0.0);
        assert!(id.classify(&[0.3]));
    }

    #[test]
    fn rejects_bad_dimensions() {
        let text = r#"{"alphabet":["a","b"],"layers":[{"w_input":[0,0,0,0],"w_hidden":[0,0,0,0],"bias":[0,0,0,0]}],"classifier":{"w":[0],"b":0}}"#;
        assert!(matches!(LstmModel::from_json(text), Err(AcceptorError::Schema(_))));
    }

    #[test]
    fn stacked_json_round_trip() {
        let layer = |inp: usize| LstmLayer {
            w_input: (0..8 * inp).map(|k| (k as f64 * 0.37).sin()).collect(),
            w_hidden: (0..16).map(|k| (k as f64 * 0.11).cos()).collect(),
            bias: vec![0.1; 8],
        };
        let m = LstmModel::new(ab(), vec![layer(2), layer(2), layer(2)], Classifier { w: vec![1.0, -1.0], b: 0.0 }).unwrap();
        let back = LstmModel::from_json(&m.to_json()).unwrap();
        let w = ab().parse_word("abbab").unwrap();
        assert_eq!(m.forward(&w), back.forward(&w));
        assert_eq!(back.layer_count(), 3);
    }
}
