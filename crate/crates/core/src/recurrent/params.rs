use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{glorot_init, Matrix, Rng};

/// Input weights `w` (H x D), recurrent weights `u` (H x H) and bias for one gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub w: Matrix,
    pub u: Matrix,
    pub b: Vec<f64>,
}

impl GateParams {
    fn zeros(hidden: usize, input: usize) -> Self {
        Self { w: Matrix::zeros(hidden, input), u: Matrix::zeros(hidden, hidden), b: vec![0.0; hidden] }
    }

    fn glorot(rng: &mut Rng, hidden: usize, input: usize) -> Self {
        Self { w: glorot_init(rng, hidden, input), u: glorot_init(rng, hidden, hidden), b: vec![0.0; hidden] }
    }

    /// `out += w x + u s + b`.
    pub(crate) fn preactivation_acc(&self, x: &[f64], s: &[f64], out: &mut [f64]) {
        self.w.matvec_acc(x, out);
        self.u.matvec_acc(s, out);
        for (o, b) in out.iter_mut().zip(&self.b) {
            *o += b;
        }
    }

    fn n_params(&self) -> usize {
        self.w.as_slice().len() + self.u.as_slice().len() + self.b.len()
    }

    fn slices(&self) -> [&[f64]; 3] {
        [self.w.as_slice(), self.u.as_slice(), &self.b]
    }

    fn slices_mut(&mut self) -> [&mut [f64]; 3] {
        [self.w.as_mut_slice(), self.u.as_mut_slice(), &mut self.b]
    }
}

/// Every trainable parameter of the LSTM forecaster. The same layout holds
/// gradients.
///
/// Flat order: forget, input, candidate, output gates (each `w`, `u`, `b`),
/// then the output gate's cell-state weights `v_o`, the projection row `w_y`
/// and the projection bias `b_y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub forget: GateParams,
    pub input: GateParams,
    pub candidate: GateParams,
    pub output: GateParams,
    /// Cell-state weights of the output gate (H x H).
    pub v_o: Matrix,
    pub w_y: Vec<f64>,
    pub b_y: f64,
}

impl LstmParams {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        Self {
            forget: GateParams::zeros(hidden, input),
            input: GateParams::zeros(hidden, input),
            candidate: GateParams::zeros(hidden, input),
            output: GateParams::zeros(hidden, input),
            v_o: Matrix::zeros(hidden, hidden),
            w_y: vec![0.0; hidden],
            b_y: 0.0,
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(rng: &mut Rng, hidden: usize, input: usize) -> Self {
        let forget = GateParams::glorot(rng, hidden, input);
        let input_gate = GateParams::glorot(rng, hidden, input);
        let candidate = GateParams::glorot(rng, hidden, input);
        let output = GateParams::glorot(rng, hidden, input);
        let v_o = glorot_init(rng, hidden, hidden);
        let w_y = glorot_init(rng, 1, hidden).as_slice().to_vec();
        Self { forget, input: input_gate, candidate, output, v_o, w_y, b_y: 0.0 }
    }

    pub fn hidden_size(&self) -> usize {
        self.w_y.len()
    }

    pub fn input_size(&self) -> usize {
        self.forget.w.cols()
    }

    pub fn n_params(&self) -> usize {
        self.gates().iter().map(|g| g.n_params()).sum::<usize>() + self.v_o.as_slice().len() + self.w_y.len() + 1
    }

    fn gates(&self) -> [&GateParams; 4] {
        [&self.forget, &self.input, &self.candidate, &self.output]
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for g in self.gates() {
            for s in g.slices() {
                out.extend_from_slice(s);
            }
        }
        out.extend_from_slice(self.v_o.as_slice());
        out.extend_from_slice(&self.w_y);
        out.push(self.b_y);
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::Shape(format!("{} flat values for {} parameters", flat.len(), self.n_params())));
        }
        if let Some(pos) = flat.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter {pos} is {}", flat[pos])));
        }
        let mut rest = flat;
        let mut take = |dst: &mut [f64]| {
            let (head, tail) = rest.split_at(dst.len());
            dst.copy_from_slice(head);
            rest = tail;
        };
        for g in [&mut self.forget, &mut self.input, &mut self.candidate, &mut self.output] {
            for s in g.slices_mut() {
                take(s);
            }
        }
        take(self.v_o.as_mut_slice());
        take(&mut self.w_y);
        self.b_y = rest[0];
        Ok(())
    }

    pub fn from_flat(hidden: usize, input: usize, flat: &[f64]) -> Result<Self> {
        let mut p = Self::zeros(hidden, input);
        p.set_flat(flat)?;
        Ok(p)
    }

    /// Checks every shape invariant and finiteness (used after deserializing).
    pub fn validate(&self) -> Result<()> {
        let h = self.hidden_size();
        let d = self.input_size();
        for g in self.gates() {
            if g.w.shape() != (h, d) || g.u.shape() != (h, h) || g.b.len() != h {
                return Err(Error::Shape(format!("gate shapes inconsistent with H={h}, D={d}")));
            }
        }
        if self.v_o.shape() != (h, h) {
            return Err(Error::Shape("v_o must be H x H".into()));
        }
        if self.to_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("lstm parameters".into()));
        }
        Ok(())
    }
}

/// Plain recurrent cell: `W` (H x D), `U` (H x H), bias, and a linear head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnParams {
    pub w: Matrix,
    pub u: Matrix,
    pub b: Vec<f64>,
    pub w_y: Vec<f64>,
    pub b_y: f64,
}

impl RnnParams {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        Self { w: Matrix::zeros(hidden, input), u: Matrix::zeros(hidden, hidden), b: vec![0.0; hidden], w_y: vec![0.0; hidden], b_y: 0.0 }
    }

    pub fn init(rng: &mut Rng, hidden: usize, input: usize) -> Self {
        let w = glorot_init(rng, hidden, input);
        let u = glorot_init(rng, hidden, hidden);
        let w_y = glorot_init(rng, 1, hidden).as_slice().to_vec();
        Self { w, u, b: vec![0.0; hidden], w_y, b_y: 0.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::make_rng;

    #[test]
    fn flat_round_trip_and_count() {
        let (h, d) = (3, 2);
        let p = LstmParams::init(&mut make_rng(1), h, d);
        assert_eq!(p.n_params(), 4 * (h * d + h * h + h) + h * h + h + 1);
        let flat = p.to_flat();
        assert_eq!(flat.len(), p.n_params());
        assert_eq!(LstmParams::from_flat(h, d, &flat).unwrap(), p);
        assert!(LstmParams::from_flat(h, d, &flat[1..]).is_err());
        p.validate().unwrap();
    }

    #[test]
    fn init_biases_zero() {
        let p = LstmParams::init(&mut make_rng(2), 4, 3);
        for g in p.gates() {
            assert!(g.b.iter().all(|&b| b == 0.0));
            let limit = (6.0f64 / 7.0).sqrt();
            assert!(g.w.as_slice().iter().all(|v| v.abs() <= limit));
        }
        assert_eq!(p.b_y, 0.0);
    }
}
