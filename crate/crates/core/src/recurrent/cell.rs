use super::params::{LstmParams, RnnParams};
use crate::error::{Error, Result};
use crate::numerics::{dot, sigmoid};

/// Everything one LSTM step computed, kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct GateTrace {
    pub x: Vec<f64>,
    /// Incoming hidden state `s_t`.
    pub s: Vec<f64>,
    /// Incoming cell state `c_t`.
    pub c: Vec<f64>,
    pub f: Vec<f64>,
    pub i: Vec<f64>,
    /// Candidate values.
    pub candidate: Vec<f64>,
    /// Updated cell state `c_{t+1}`.
    pub c_next: Vec<f64>,
    /// Output `o_t`, which is also the next hidden state.
    pub o: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmStep {
    pub output: Vec<f64>,
    pub state: Vec<f64>,
    pub cell: Vec<f64>,
    pub trace: GateTrace,
}

fn check(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape(format!("{what}: expected length {expected}, got {got}")))
    }
}

/// `o_t = tanh(W x_t + U s_t + b)`; the returned vector is also `s_{t+1}`.
pub fn rnn_step(params: &RnnParams, x: &[f64], s: &[f64]) -> Result<Vec<f64>> {
    let h = params.b.len();
    check("rnn input", params.w.cols(), x.len())?;
    check("rnn state", h, s.len())?;
    if params.w.rows() != h || params.u.shape() != (h, h) {
        return Err(Error::Shape("rnn parameter shapes".into()));
    }
    let mut a = params.b.clone();
    params.w.matvec_acc(x, &mut a);
    params.u.matvec_acc(s, &mut a);
    Ok(a.into_iter().map(f64::tanh).collect())
}

/// Linear read-out of a hidden output.
pub fn rnn_project(params: &RnnParams, o: &[f64]) -> f64 {
    dot(&params.w_y, o) + params.b_y
}

/// One LSTM step:
///
/// ```text
/// f  = sigmoid(W_f x + U_f s + b_f)
/// i  = sigmoid(W_i x + U_i s + b_i)
/// c~ = tanh(W_k x + U_k s + b_k)
/// c' = f * c + i * c~            (elementwise)
/// o  = sigmoid(W_o x + U_o s + V_o c' + b_o)
/// ```
///
/// The output gate reads the updated cell state `c'`. The returned state is
/// the output itself.
pub fn lstm_step(params: &LstmParams, x: &[f64], s: &[f64], c: &[f64]) -> Result<LstmStep> {
    let h = params.hidden_size();
    check("lstm input", params.input_size(), x.len())?;
    check("lstm state", h, s.len())?;
    check("lstm cell", h, c.len())?;
    let trace = step_unchecked(params, x.to_vec(), s.to_vec(), c.to_vec());
    Ok(LstmStep { output: trace.o.clone(), state: trace.o.clone(), cell: trace.c_next.clone(), trace })
}

pub(crate) fn step_unchecked(params: &LstmParams, x: Vec<f64>, s: Vec<f64>, c: Vec<f64>) -> GateTrace {
    let h = params.hidden_size();
    let mut f = vec![0.0; h];
    let mut i = vec![0.0; h];
    let mut candidate = vec![0.0; h];
    let mut a_o = vec![0.0; h];
    params.forget.preactivation_acc(&x, &s, &mut f);
    params.input.preactivation_acc(&x, &s, &mut i);
    params.candidate.preactivation_acc(&x, &s, &mut candidate);
    params.output.preactivation_acc(&x, &s, &mut a_o);
    f.iter_mut().for_each(|v| *v = sigmoid(*v));
    i.iter_mut().for_each(|v| *v = sigmoid(*v));
    candidate.iter_mut().for_each(|v| *v = v.tanh());
    let c_next: Vec<f64> = (0..h).map(|k| f[k] * c[k] + i[k] * candidate[k]).collect();
    params.v_o.matvec_acc(&c_next, &mut a_o);
    let o = a_o.into_iter().map(sigmoid).collect();
    GateTrace { x, s, c, f, i, candidate, c_next, o }
}
